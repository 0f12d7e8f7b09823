"""
Service mesure pour toposkms
Mesure μ^ρ d'un état, sections globales, propriétés (i)–(vi),
action du groupe et reconstruction d'un état à partir d'une table de mesure
"""

from __future__ import annotations

import itertools
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.models.report import INFO, ReportEntry
from src.models.state import AbstractMeasure, GlobalSection, State
from src.models.subobject import ClopenSubobject, SpectralPresheaf
from src.services.algebra import lattice_index_sets
from src.services.exceptions import (
    DomainMismatch,
    InconsistentTable,
    Infeasible,
    NotAdditive,
    ValidationError,
)
from src.services.numerics import (
    DEFAULT_TOLERANCES,
    Projection,
    TolerancePolicy,
    dagger,
    frobenius,
    hermitian_eig,
)
from src.services.presheaf import (
    anchor_domain,
    daseinisation_subobject,
    empty_subobject,
    full_subobject,
    heyting_negation,
    pullback,
    subobject_join,
    subobject_meet,
)

logger = logging.getLogger(__name__)

# réparation tolérée lors de la reconstruction
CLIP_LIMIT = 1e-6
RESIDUAL_LIMIT = 1e-6


def measure_of(state: State, subobject: ClopenSubobject, context_id: str) -> float:
    """μ^ρ(S)(V) = tr(ϱ·𝔖⁻¹(S_V))"""
    if context_id not in subobject.domain:
        raise DomainMismatch(f"{context_id} hors du domaine de {subobject.label}")
    return state.probability(subobject.projection_at(context_id))


def measure_section(state: State, subobject: ClopenSubobject) -> GlobalSection:
    """Section globale V ↦ μ^ρ(S)(V) sur le domaine du sous-objet"""
    values = {cid: measure_of(state, subobject, cid) for cid in subobject.domain}
    return GlobalSection(subobject.presheaf.poset, values, subobject.presheaf.tol)


def _pair_compatible(first: ClopenSubobject, second: ClopenSubobject) -> bool:
    return first.domain == second.domain and first.same_transport(second, first.presheaf.tol.eps_order)


def _worst(values: Dict[str, float]) -> Tuple[str, float]:
    if not values:
        return '', 0.0
    cid = max(sorted(values), key=lambda c: values[c])
    return cid, values[cid]


def verify_measure_properties(
    state: State,
    presheaf: SpectralPresheaf,
    pairs: Sequence[Tuple[ClopenSubobject, ClopenSubobject]],
) -> List[ReportEntry]:
    """
    Vérifie les propriétés (i)–(vi) de la mesure μ^ρ

    Les violations sont des entrées de rapport, jamais des exceptions.

    Args:
        state (State): état ϱ
        presheaf (SpectralPresheaf): préfaisceau du poset
        pairs: couples (S, T) de sous-objets de même domaine

    Returns:
        list: entrées de rapport
    """
    tol = presheaf.tol
    eps = tol.eps_measure
    poset = presheaf.poset
    entries: List[ReportEntry] = []

    empty = empty_subobject(presheaf)
    full = full_subobject(presheaf)
    zero_values = {cid: abs(measure_of(state, empty, cid)) for cid in poset.ids}
    cid, worst = _worst(zero_values)
    entries.append(ReportEntry.bound('measure.i_empty', 'Σ', worst, eps, detail=f"pire contexte {cid}"))
    one_values = {cid: abs(measure_of(state, full, cid) - 1) for cid in poset.ids}
    cid, worst = _worst(one_values)
    entries.append(ReportEntry.bound('measure.ii_total', 'Σ', worst, eps, detail=f"pire contexte {cid}"))

    samples: Dict[tuple, ClopenSubobject] = {}
    for first, second in pairs:
        location = f"{first.label}|{second.label}"
        if not _pair_compatible(first, second):
            entries.append(ReportEntry('measure.pair', location, verdict='skip', detail="domaines ou transports différents"))
            continue
        samples.setdefault((first.key, id(first.transport)), first)
        samples.setdefault((second.key, id(second.transport)), second)
        join = subobject_join(first, second)
        meet = subobject_meet(first, second)

        modularity = {}
        for cid in first.domain:
            lhs = measure_of(state, join, cid) + measure_of(state, meet, cid)
            rhs = measure_of(state, first, cid) + measure_of(state, second, cid)
            modularity[cid] = abs(lhs - rhs)
        cid, worst = _worst(modularity)
        entries.append(ReportEntry.bound('measure.iv_modularity', location, worst, eps, detail=f"pire contexte {cid}"))

        # (iii) aux contextes où S et T sont disjoints
        additivity = {
            cid: abs(measure_of(state, join, cid) - measure_of(state, first, cid) - measure_of(state, second, cid))
            for cid in sorted(first.domain) if not meet.components[cid]
        }
        if additivity:
            cid, worst = _worst(additivity)
            entries.append(ReportEntry.bound('measure.iii_disjoint', location, worst, eps, detail=f"pire contexte {cid}"))

    for subobject in samples.values():
        excluded = subobject_join(subobject, heyting_negation(subobject))
        values = {cid: measure_of(state, excluded, cid) for cid in subobject.domain}
        excess = {cid: max(0.0, value - 1) for cid, value in values.items()}
        cid, worst = _worst(excess)
        entries.append(ReportEntry.bound('measure.v_excluded_middle', subobject.label, worst, eps))
        lowest = min(sorted(values), key=lambda c: values[c])
        if values[lowest] < 1 - eps:
            entries.append(ReportEntry(
                'measure.v_strict', f"{subobject.label}@{lowest}", values[lowest], 1.0,
                1 - values[lowest], INFO, detail="μ(S∨¬S) < 1",
            ))

    ordered = sorted(samples.values(), key=lambda s: (s.key, s.label))
    for cid in poset.ids:
        family: List[ClopenSubobject] = []
        covered = set()
        for subobject in ordered:
            if cid not in subobject.domain or not subobject.components[cid]:
                continue
            if family and not _pair_compatible(family[0], subobject):
                continue
            if covered & subobject.components[cid]:
                continue
            family.append(subobject)
            covered |= subobject.components[cid]
        if len(family) < 2:
            continue
        joined = family[0]
        for subobject in family[1:]:
            joined = subobject_join(joined, subobject)
        lhs = measure_of(state, joined, cid)
        rhs = sum(measure_of(state, s, cid) for s in family)
        entries.append(ReportEntry.compare(
            'measure.vi_finite_additivity', cid, lhs, rhs, eps,
            detail=f"{len(family)} composantes disjointes",
        ))

    failed = sum(1 for e in entries if e.failed)
    if failed:
        logger.warning(f"❌ Propriétés de mesure: {failed} violation(s)")
    else:
        logger.info(f"✅ Propriétés de mesure vérifiées ({len(entries)} entrées)")
    return entries


def group_action_check(state: State, flow, t: float, subobject: ClopenSubobject) -> dict:
    """
    Action du groupe sur les mesures

    residual = max_V |μ^ρ(α_t*S)(V) − μ^{α_t(ϱ)}(S)(V)|, lemma_residual compare
    μ^ρ((α_t⁻¹)*S) à μ^{α_t(ϱ)}(S).

    Returns:
        dict: residual, lemma_residual, contexte le plus défavorable
    """
    presheaf = subobject.presheaf
    unitary = flow.unitary(t)
    moved_density = unitary @ state.density @ dagger(unitary)
    moved_density = (moved_density + dagger(moved_density)) / 2
    moved = State(moved_density, presheaf.tol)

    pulled = pullback(unitary, subobject)
    residuals = {
        cid: abs(measure_of(state, pulled, cid) - measure_of(moved, subobject, cid))
        for cid in pulled.domain
    }
    worst_context, residual = _worst(residuals)

    lemma_residual = None
    inverse = flow.unitary(-t)
    if anchor_domain([inverse], presheaf.poset, subobject.domain):
        pulled_inverse = pullback(inverse, subobject)
        lemma_residual = max(
            abs(measure_of(state, pulled_inverse, cid) - measure_of(moved, subobject, cid))
            for cid in pulled_inverse.domain
        )
    return {
        'residual': residual,
        'lemma_residual': lemma_residual,
        'worst_context': worst_context,
        'contexts': sorted(pulled.domain),
    }


def measure_table(state: State, presheaf: SpectralPresheaf) -> AbstractMeasure:
    """Table (δ(P), V) ↦ tr(ϱP) pour tout P ∈ P(V) et tout contexte V"""
    subobjects = {}
    table = {}
    for cid in presheaf.poset.ids:
        context = presheaf.poset.context(cid)
        for indices in lattice_index_sets(context):
            name = f"δ[{cid}:{','.join(str(i) for i in sorted(indices))}]"
            projection = Projection(context.projection_of(indices), presheaf.tol)
            subobjects[name] = daseinisation_subobject(projection, presheaf, name=name)
            value = state.probability(projection.matrix)
            table[(name, cid)] = min(max(value, 0.0), 1.0)
    return AbstractMeasure(presheaf, subobjects, table)


def hermitian_basis(dim: int) -> List[np.ndarray]:
    """Base orthonormée (pour tr(A*B)) des matrices hermitiennes n×n"""
    basis = []
    for i in range(dim):
        unit = np.zeros((dim, dim), dtype=complex)
        unit[i, i] = 1
        basis.append(unit)
    for i in range(dim):
        for j in range(i + 1, dim):
            symmetric = np.zeros((dim, dim), dtype=complex)
            symmetric[i, j] = symmetric[j, i] = 1 / np.sqrt(2)
            basis.append(symmetric)
            antisymmetric = np.zeros((dim, dim), dtype=complex)
            antisymmetric[i, j] = -1j / np.sqrt(2)
            antisymmetric[j, i] = 1j / np.sqrt(2)
            basis.append(antisymmetric)
    return basis


def _distinct_projections(measure: AbstractMeasure, tol: TolerancePolicy) -> List[dict]:
    distinct: List[dict] = []
    for (name, cid), value in sorted(measure.table.items()):
        projection = measure.subobjects[name].projection_at(cid)
        for known in distinct:
            if frobenius(known['projection'] - projection) <= tol.eps_order:
                if abs(known['value'] - value) > tol.eps_measure:
                    raise InconsistentTable(
                        f"Valeurs incompatibles pour un même projecteur: "
                        f"{known['location']} = {known['value']} et {name}@{cid} = {value}"
                    )
                break
        else:
            distinct.append({'projection': projection, 'value': value, 'location': f"{name}@{cid}"})
    return distinct


def _value_of(distinct: List[dict], projection: np.ndarray, tol: TolerancePolicy) -> Optional[float]:
    for known in distinct:
        if frobenius(known['projection'] - projection) <= tol.eps_order:
            return known['value']
    return None


def state_from_measure(measure: AbstractMeasure, tol: Optional[TolerancePolicy] = None) -> Tuple[State, dict]:
    """
    Reconstruit un état à partir d'une table de mesure abstraite

    Étapes: cohérence entre contextes, additivité finie, moindres carrés sur
    l'espace des matrices hermitiennes avec contrainte de trace, puis écrêtage
    des valeurs propres négatives.

    Args:
        measure (AbstractMeasure): table (sous-objet, contexte) → valeur

    Returns:
        tuple: (State, diagnostics)
    """
    tol = tol or measure.presheaf.tol
    poset = measure.poset
    dim = poset.dim
    distinct = _distinct_projections(measure, tol)

    missing = []
    for cid in poset.ids:
        context = poset.context(cid)
        values = {}
        for indices in lattice_index_sets(context):
            value = _value_of(distinct, context.projection_of(indices), tol)
            if value is None:
                missing.append(f"{cid}:{sorted(indices)}")
            values[indices] = value
        for first, second in itertools.combinations_with_replacement(values, 2):
            if first & second or values[first] is None or values[second] is None:
                continue
            union = values.get(first | second)
            if union is None:
                continue
            gap = abs(union - values[first] - values[second])
            if gap > tol.eps_measure:
                raise NotAdditive(
                    f"m(P∨Q) ≠ m(P) + m(Q) en {cid} pour {sorted(first)} et {sorted(second)} (écart {gap:.3e})"
                )
    if missing:
        raise ValidationError(f"Table incomplète: {', '.join(missing[:5])}")

    basis = hermitian_basis(dim)
    rows = [[float(np.trace(b @ known['projection']).real) for b in basis] for known in distinct]
    targets = [known['value'] for known in distinct]
    rows.append([float(np.trace(b).real) for b in basis])
    targets.append(1.0)
    matrix = np.array(rows)
    rhs = np.array(targets)

    solution, _, rank, _ = scipy.linalg.lstsq(matrix, rhs)
    rank = int(rank)
    residual = float(np.max(np.abs(matrix @ solution - rhs)))
    density = sum(x * b for x, b in zip(solution, basis))
    density = (density + dagger(density)) / 2

    eigenvalues, vectors = hermitian_eig(density, tol)
    clipped = float(max(0.0, -eigenvalues[0]))
    if clipped > CLIP_LIMIT:
        raise Infeasible(f"Aucun état positif compatible (valeur propre {eigenvalues[0]:.3e})")
    if residual > RESIDUAL_LIMIT:
        raise Infeasible(f"Table non réalisable par un état (résidu {residual:.3e})")
    repaired = np.clip(eigenvalues, 0.0, None)
    repaired = repaired / repaired.sum()
    density = (vectors * repaired) @ dagger(vectors)

    unique = rank == dim * dim
    diagnostics = {
        'projections': len(distinct),
        'spanned_dimension': rank,
        'hermitian_dimension': dim * dim,
        'unique': unique,
        'status': 'unique' if unique else 'underdetermined',
        'residual': residual,
        'clipped': clipped,
    }
    if unique:
        logger.info(f"✅ État reconstruit de façon unique (résidu {residual:.2e})")
    else:
        logger.warning(f"⚠️ Reconstruction sous-déterminée: rang {rank} < {dim * dim}")
    return State.from_unnormalized(density, tol), diagnostics
