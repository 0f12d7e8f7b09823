"""
Service KMS externe
États de Gibbs, conditions C1/C2 sur les mesures, objets et valeurs de vérité,
μ-équivalences et valeurs moyennes
"""

from __future__ import annotations

import logging
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.models.context import Context
from src.models.flow import AutomorphismFlow
from src.models.report import FAIL, INFO, PASS, SKIP, ReportEntry
from src.models.state import State
from src.models.subobject import ClopenSubobject, SpectralPresheaf
from src.models.truth import StageVR, TruthObject, TruthValue
from src.services.algebra import PosetOptions, build_poset, coefficients, context_from_operators
from src.services.exceptions import (
    AmbiguousMatch,
    ContextMissing,
    NotFaithful,
    PosetNotClosed,
    TrivialAlgebra,
    ValidationError,
)
from src.services.measure import measure_of
from src.services.numerics import (
    DEFAULT_TOLERANCES,
    Projection,
    TolerancePolicy,
    as_matrix,
    dagger,
    hermitian_eig,
    hermitian_log,
)
from src.services.presheaf import (
    DEFAULT_ENUMERATION_CAP,
    anchor_domain,
    build_presheaf,
    daseinisation_subobject,
    enumerate_subobjects,
    image_context_id,
    pullback,
    restrict_subobject,
    with_transport,
)

logger = logging.getLogger(__name__)

ANALYTIC_TOL = 1e-10
FINITE_DIM_NOTE = "V_α = V (dimension finie)"


def flow_element(flow: AutomorphismFlow, z: complex) -> Callable[[np.ndarray], np.ndarray]:
    """Transformateur A ↦ e^{izH}·A·e^{−izH}"""
    return flow.transformer(z)


def gibbs_state(hamiltonian, beta: float, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> State:
    """
    État de Gibbs ϱ = e^{−βH}/tr(e^{−βH})

    Args:
        hamiltonian: H hermitien
        beta (float): température inverse > 0

    Returns:
        State: état fidèle
    """
    beta = float(beta)
    if not beta > 0:
        raise ValidationError(f"β doit être strictement positif (reçu {beta})")
    eigenvalues, vectors = hermitian_eig(as_matrix(hamiltonian, "H"), tol)
    weights = np.exp(-beta * (eigenvalues - eigenvalues[0]))
    weights = weights / weights.sum()
    density = (vectors * weights) @ dagger(vectors)
    density = (density + dagger(density)) / 2
    density = density / np.trace(density).real
    return State(density, tol, label='gibbs')


def hamiltonian_from_state(state: State, beta: float, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> np.ndarray:
    """H = −(1/β)·Σ ln a_i P_i, qui régénère ϱ par gibbs_state"""
    if not state.faithful:
        raise NotFaithful("ϱ n'est pas fidèle: son logarithme n'existe pas")
    return -hermitian_log(state.density, tol) / float(beta)


def _anchors_for(flow: AutomorphismFlow, t: float, subobject: ClopenSubobject) -> frozenset:
    return anchor_domain([flow.unitary(t)], subobject.presheaf.poset, subobject.domain)


def _sorted_entries(entries: List[ReportEntry]) -> List[ReportEntry]:
    return sorted(entries, key=lambda e: e.sort_key())


def check_C1(
    state: State,
    flow: AutomorphismFlow,
    subobjects: Sequence[ClopenSubobject],
    t_grid: Iterable[float],
) -> List[ReportEntry]:
    """
    Condition C1: μ^ρ(S)(V) = μ^ρ(α_t*S)(V)

    Évaluée aux contextes ancres (toutes les images présentes); les contextes
    sans image sont listés dans une entrée 'skip'.

    Raises:
        PosetNotClosed: si aucun contexte ancre n'existe pour un couple (S, t)
    """
    entries = []
    eps = flow.tol.eps_measure
    for t in t_grid:
        unitary = flow.unitary(t)
        for subobject in subobjects:
            anchors = _anchors_for(flow, t, subobject)
            if not anchors:
                raise PosetNotClosed(f"Aucun contexte ancre pour {subobject.label} en t={t}")
            pulled = pullback(unitary, subobject, domain=anchors)
            for cid in sorted(anchors):
                entries.append(ReportEntry.compare(
                    'kms.C1', f"{subobject.label}@{cid}",
                    measure_of(state, subobject, cid), measure_of(state, pulled, cid), eps, parameter=float(t),
                ))
            skipped = sorted(subobject.domain - anchors)
            if skipped:
                entries.append(ReportEntry(
                    'kms.C1', f"{subobject.label}@*", verdict=SKIP, parameter=float(t),
                    detail=f"contextes sans image: {', '.join(skipped)}",
                ))
    failures = [e for e in entries if e.failed]
    if failures:
        worst = max(failures, key=lambda e: e.residual)
        logger.warning(f"❌ C1 échoue: résidu {worst.residual:.3e} en {worst.location}, t={worst.parameter}")
    else:
        logger.info(f"✅ C1 vérifiée ({len(entries)} entrées)")
    return _sorted_entries(entries)


def strip_function(state: State, flow: AutomorphismFlow, p_s: np.ndarray, p_t: np.ndarray, z: complex) -> complex:
    """F(z) = tr(ϱ·P_T·α_z(P_S)) par produit matriciel"""
    return complex(np.trace(state.density @ p_t @ flow.apply(p_s, z)))


def strip_function_closed_form(state: State, flow: AutomorphismFlow, p_s: np.ndarray, p_t: np.ndarray,
                               z: complex) -> complex:
    """F(z) = Σ_{k,l} e^{iz(λ_k−λ_l)}·M_{lk}·P_{kl} dans la base propre de H"""
    basis = flow.eigenvectors
    weights = dagger(basis) @ state.density @ p_t @ basis
    projected = dagger(basis) @ p_s @ basis
    gaps = flow.eigenvalues[:, None] - flow.eigenvalues[None, :]
    return complex(np.sum(np.exp(1j * complex(z) * gaps) * weights.T * projected))


def check_C2(
    state: State,
    flow: AutomorphismFlow,
    first: ClopenSubobject,
    second: ClopenSubobject,
    context_ids: Optional[Iterable[str]] = None,
    t_grid: Iterable[float] = (0.0,),
    gammas: Optional[Iterable[float]] = None,
    require_faithful: bool = True,
) -> List[ReportEntry]:
    """
    Condition C2: F(t+iβ) = tr(ϱ·α_t(P_S)·P_T) avec F(z) = tr(ϱ·P_T·α_z(P_S))

    Les valeurs de F sur la bande et le témoin d'analyticité (forme fermée
    dans la base propre) sont ajoutés au rapport.

    Args:
        first: sous-objet S (déplacé par le flot)
        second: sous-objet T
        context_ids: contextes évalués (par défaut les ancres communes)
        gammas: parties imaginaires de l'échantillon de bande (par défaut 0, β/2, β)
    """
    if require_faithful and not state.faithful:
        raise NotFaithful("C2 requiert un état fidèle")
    t_grid = [float(t) for t in t_grid]
    beta = flow.beta
    eps = flow.tol.eps_measure
    gammas = sorted(set(gammas)) if gammas is not None else [0.0, beta / 2, beta]

    poset = first.presheaf.poset
    common = first.domain & second.domain
    anchors = set(common)
    for t in t_grid:
        anchors &= anchor_domain([flow.unitary(t)], poset, common)
    if context_ids is None:
        context_ids = sorted(anchors)
        if not context_ids:
            raise PosetNotClosed("Aucun contexte ancre pour C2")
    else:
        context_ids = sorted(context_ids)
        missing = [cid for cid in context_ids if cid not in anchors]
        if missing:
            raise PosetNotClosed(f"Contextes sans image par le flot: {', '.join(missing)}")

    pair = f"{first.label}|{second.label}"
    entries = []
    for cid in context_ids:
        p_s = first.projection_at(cid)
        p_t = second.projection_at(cid)
        for t in t_grid:
            lhs = strip_function(state, flow, p_s, p_t, complex(t, beta))
            rhs = complex(np.trace(state.density @ flow.apply(p_s, t) @ p_t))
            entries.append(ReportEntry.compare('kms.C2', f"{pair}@{cid}", lhs, rhs, eps, parameter=t))
            witness = 0.0
            for gamma in gammas:
                z = complex(t, gamma)
                value = strip_function(state, flow, p_s, p_t, z)
                closed = strip_function_closed_form(state, flow, p_s, p_t, z)
                witness = max(witness, abs(value - closed) / max(1.0, abs(value)))
                entries.append(ReportEntry('kms.C2_strip', f"{pair}@{cid}", value, None, None, INFO, parameter=z))
            entries.append(ReportEntry.bound('kms.C2_analytic', f"{pair}@{cid}", witness, ANALYTIC_TOL,
                                             parameter=t, detail=FINITE_DIM_NOTE))
    failures = [e for e in entries if e.failed]
    if failures:
        logger.warning(f"❌ C2 échoue pour {pair}: {len(failures)} entrée(s)")
    else:
        logger.info(f"✅ C2 vérifiée pour {pair}")
    return _sorted_entries(entries)


def _threshold(state: State, subobject: ClopenSubobject, domain: Iterable[str]) -> float:
    return min(measure_of(state, subobject, cid) for cid in domain)


def truth_object(state: State, presheaf: SpectralPresheaf, context_ids: Optional[Iterable[str]] = None,
                 cap: int = DEFAULT_ENUMERATION_CAP) -> TruthObject:
    """
    Objet de vérité T^ρ: seuil τ(S, V) = min_{V′⊆V} μ^ρ(S)(V′) pour tout S sur ↓V

    Args:
        state (State): état ϱ
        presheaf (SpectralPresheaf): préfaisceau spectral
        context_ids: contextes V traités (par défaut tout le poset)
        cap (int): limite d'énumération des sous-objets
    """
    poset = presheaf.poset
    context_ids = sorted(context_ids) if context_ids is not None else poset.ids
    thresholds = {}
    for cid in context_ids:
        domain = poset.down_set(cid)
        subobjects = enumerate_subobjects(presheaf, domain, cap)
        thresholds[cid] = [(s, _threshold(state, s, domain)) for s in subobjects]
    logger.debug(f"📊 Objet de vérité: {len(thresholds)} contextes")
    return TruthObject(state, presheaf, thresholds, presheaf.tol.eps_measure)


def members_at(truth: TruthObject, context_id: str, r: float) -> List[ClopenSubobject]:
    """T^{ρ,r}_V = {S : τ(S, V) ≥ r}"""
    if not 0 < r <= 1:
        raise ValidationError(f"Seuil r hors de (0,1]: {r}")
    return truth.members(context_id, r)


def pullback_truth_object(truth: TruthObject, flow: AutomorphismFlow, t: float) -> TruthObject:
    """α_t*T: les membres en V sont les tirés en arrière des membres de T en α_t(V)"""
    poset = truth.poset
    unitary = flow.unitary(t)
    thresholds = {}
    for cid in poset.ids:
        target = image_context_id(unitary, cid, poset)
        if target is None or target not in truth.thresholds:
            continue
        domain = poset.down_set(cid)
        try:
            pulled = [pullback(unitary, s, domain=domain) for s, _ in truth.entries(target)]
        except PosetNotClosed:
            logger.debug(f"⚠️ ↓{cid} sans image complète en t={t}")
            continue
        thresholds[cid] = [(s, _threshold(truth.state, s, domain)) for s in pulled]
    if not thresholds:
        raise PosetNotClosed(f"Aucun contexte ne peut être tiré en arrière en t={t}")
    return TruthObject(truth.state, truth.presheaf, thresholds, truth.eps, transport=unitary)


def truth_value(state: State, projection: Projection, presheaf: SpectralPresheaf, context_id: str, r: float,
                name: Optional[str] = None) -> TruthValue:
    """v(δP ∈ T^ρ)(V, r): seuils V′ ↦ min(r, μ^ρ(δP)(V′)) sur ↓V"""
    stage = StageVR(context_id, float(r))
    dasein = daseinisation_subobject(projection, presheaf, name=name)
    return _truth_value_of(state, dasein, stage, presheaf)


def _truth_value_of(state: State, subobject: ClopenSubobject, stage: StageVR,
                    presheaf: SpectralPresheaf) -> TruthValue:
    domain = presheaf.poset.down_set(stage.context_id)
    cutoffs = {cid: min(stage.r, measure_of(state, subobject, cid)) for cid in domain}
    return TruthValue(subobject.label, stage, cutoffs, presheaf.poset)


def check_truth_value_invariance(
    state: State,
    flow: AutomorphismFlow,
    projection: Projection,
    presheaf: SpectralPresheaf,
    stages: Sequence[StageVR],
    t_grid: Iterable[float],
    name: str = "P",
) -> List[ReportEntry]:
    """
    Invariance des valeurs de vérité sous le flot

    truth.relabel: v(α_t*δP)(V, r) coïncide avec v(δP)(α_tV, r) relu par α_t (toujours vrai).
    truth.invariance: v(δP)(V, r) coïncide avec v(δ(α_tP))(α_tV, r) relu par α_t
    (vrai pour les états qui satisfont C1).
    """
    poset = presheaf.poset
    eps = presheaf.tol.eps_measure
    dasein = daseinisation_subobject(projection, presheaf, name=f"δ({name})")
    entries = []
    for t in t_grid:
        unitary = flow.unitary(t)
        moved = Projection(unitary @ projection.matrix @ dagger(unitary), presheaf.tol)
        moved_dasein = daseinisation_subobject(moved, presheaf, name=f"δ(α_t {name})")
        for stage in stages:
            domain = poset.down_set(stage.context_id)
            images = {cid: image_context_id(unitary, cid, poset) for cid in domain}
            location = f"{name}@({stage.context_id},{stage.r})"
            if any(image is None for image in images.values()):
                entries.append(ReportEntry('truth.invariance', location, verdict=SKIP, parameter=float(t),
                                           detail="↓V sans image complète par le flot"))
                continue
            original = _truth_value_of(state, dasein, stage, presheaf)
            target_stage = StageVR(images[stage.context_id], stage.r)
            target_original = _truth_value_of(state, dasein, target_stage, presheaf)
            target_moved = _truth_value_of(state, moved_dasein, target_stage, presheaf)
            pulled = pullback(unitary, dasein, domain=domain)
            pulled_value = _truth_value_of(state, pulled, stage, presheaf)

            relabel = max(abs(pulled_value.cutoffs[cid] - target_original.cutoffs[images[cid]]) for cid in domain)
            invariance = max(abs(original.cutoffs[cid] - target_moved.cutoffs[images[cid]]) for cid in domain)
            entries.append(ReportEntry.bound('truth.relabel', location, relabel, eps, parameter=float(t)))
            entries.append(ReportEntry.bound('truth.invariance', location, invariance, eps, parameter=float(t)))
    return _sorted_entries(entries)


def _section(state: State, subobject: ClopenSubobject, domain: Iterable[str]) -> Dict[str, float]:
    return {cid: measure_of(state, subobject, cid) for cid in domain}


def _section_distance(first: Dict[str, float], second: Dict[str, float]) -> float:
    return max(abs(first[cid] - second[cid]) for cid in first)


def mu_equivalent(
    first: TruthObject,
    second: TruthObject,
    stages: Sequence[StageVR],
    state: Optional[State] = None,
    raise_on_ambiguous: bool = False,
) -> dict:
    """
    μ-équivalence: à chaque stade, tout membre de l'un a un membre de l'autre
    de même section globale sur ↓V, et réciproquement

    Returns:
        dict: equivalent, failing (stades en échec), ambiguous (correspondances non uniques)
    """
    state = state or first.state
    eps = first.eps
    poset = first.poset
    failing, ambiguous = [], []
    for stage in stages:
        domain = poset.down_set(stage.context_id)
        sections = []
        for truth in (first, second):
            members = truth.members(stage.context_id, stage.r)
            sections.append([(s, _section(state, s, domain)) for s in members])
        for source, target, side in ((sections[0], sections[1], 'gauche'), (sections[1], sections[0], 'droite')):
            for subobject, section in source:
                matches = [s for s, other in target if _section_distance(section, other) <= eps]
                if not matches:
                    failing.append({'stage': stage.to_dict(), 'member': subobject.label, 'side': side})
                elif len(matches) > 1:
                    ambiguous.append({
                        'stage': stage.to_dict(), 'member': subobject.label, 'side': side,
                        'candidates': [m.label for m in matches],
                    })
    if ambiguous and raise_on_ambiguous:
        raise AmbiguousMatch(f"Correspondance non unique au stade {ambiguous[0]['stage']}")
    if failing:
        logger.warning(f"❌ μ-équivalence en échec à {len(failing)} stade(s)")
    return {'equivalent': not failing, 'failing': failing, 'ambiguous': ambiguous}


def transport_mapping(unitary: np.ndarray) -> Callable[[ClopenSubobject], ClopenSubobject]:
    """S ↦ sous-objet de mêmes indices transporté par U (membre correspondant de α*T)"""
    return lambda subobject: with_transport(subobject, unitary, name=f"α*{subobject.label}")


def identity_mapping(subobject: ClopenSubobject) -> ClopenSubobject:
    return subobject


def strong_mu_equivalence(
    first: TruthObject,
    second: TruthObject,
    mapping: Callable[[ClopenSubobject], ClopenSubobject],
    stages: Sequence[StageVR],
    state: Optional[State] = None,
    raise_on_ambiguous: bool = False,
) -> List[ReportEntry]:
    """
    μ-équivalence forte: la correspondance fournie envoie les membres sur des
    membres, préserve la mesure et commute aux restrictions
    """
    state = state or first.state
    eps = first.eps
    poset = first.poset
    tol = first.presheaf.tol.eps_order
    entries = []
    for stage in stages:
        domain = poset.down_set(stage.context_id)
        targets = second.members(stage.context_id, stage.r)
        target_sections = [(s, _section(state, s, domain)) for s in targets]
        for member in first.members(stage.context_id, stage.r):
            location = f"{member.label}@({stage.context_id},{stage.r})"
            image = mapping(member)
            is_member = any(t.key == image.key and t.same_transport(image, tol) for t in targets)
            entries.append(ReportEntry('equivalence.strong_membership', location, verdict=PASS if is_member else FAIL))

            section = _section(state, member, domain)
            image_section = _section(state, image, domain)
            entries.append(ReportEntry.bound('equivalence.strong_measure', location,
                                             _section_distance(section, image_section), eps))

            natural = True
            for smaller, larger in poset.edges():
                if smaller in domain and larger in domain:
                    down = poset.down_set(smaller)
                    lhs = mapping(restrict_subobject(member, down))
                    rhs = restrict_subobject(image, down)
                    if lhs.key != rhs.key or not lhs.same_transport(rhs, tol):
                        natural = False
            entries.append(ReportEntry('equivalence.strong_natural', location, verdict=PASS if natural else FAIL))

            matches = [s for s, other in target_sections if _section_distance(section, other) <= eps]
            if len(matches) > 1:
                if raise_on_ambiguous:
                    raise AmbiguousMatch(f"{len(matches)} membres de même mesure pour {location}")
                entries.append(ReportEntry('equivalence.ambiguous', location, verdict=INFO,
                                           detail=', '.join(m.label for m in matches)))
    return _sorted_entries(entries)


def spectral_pairs(observable, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> List[Tuple[float, Projection]]:
    """Décomposition A = Σ a_i P_i d'un observable hermitien"""
    matrix = as_matrix(observable, "observable")
    try:
        context = context_from_operators([matrix], tol=tol)
    except TrivialAlgebra:
        scalar = float(np.trace(matrix).real) / matrix.shape[0]
        return [(scalar, Projection.identity(matrix.shape[0]))]
    values = coefficients(context, matrix, tol)
    return [(float(value.real), block) for value, block in zip(values, context.blocks)]


def _validate_pairs(pairs: Sequence[Tuple[float, Projection]], tol: TolerancePolicy):
    for i, (_, first) in enumerate(pairs):
        for _, second in pairs[i + 1:]:
            if np.linalg.norm(first.matrix @ second.matrix) > tol.eps_order:
                raise ValidationError("Les projecteurs spectraux doivent être deux à deux orthogonaux")


def ensure_contexts(presheaf: SpectralPresheaf, projections: Sequence[Projection],
                    auto_insert: bool = True) -> Tuple[SpectralPresheaf, List[str]]:
    """
    Garantit que chaque projecteur appartient au treillis d'au moins un contexte

    Returns:
        tuple: (préfaisceau éventuellement étendu, contextes insérés)
    """
    poset = presheaf.poset
    tol = presheaf.tol
    missing = []
    for projection in projections:
        if projection.is_zero(tol) or projection.is_identity(tol):
            continue
        if not any(c.index_set_of(projection, tol) is not None for c in poset.contexts):
            missing.append(projection)
    if not missing:
        return presheaf, []
    if not auto_insert:
        raise ContextMissing(f"{len(missing)} projecteur(s) sans contexte dans le poset")
    seeds = list(poset.contexts)
    inserted = []
    for projection in missing:
        context = Context([projection, projection.complement(tol)], tol=tol)
        if all(not context.equals(seed, tol) for seed in seeds):
            seeds.append(context)
            inserted.append(context.id)
    extended = build_poset(seeds, PosetOptions(max_contexts=max(len(seeds), 1)), tol)
    extended.closure_flags.update(poset.closure_flags)
    logger.info(f"⚠️ Contextes insérés pour la valeur moyenne: {', '.join(inserted)}")
    return build_presheaf(extended), inserted


def expectation_value(
    state: State,
    pairs: Sequence[Tuple[float, Projection]],
    presheaf: SpectralPresheaf,
    auto_insert: bool = True,
) -> float:
    """
    E(A, ρ) = Σ a_i·min_V μ^ρ(δ(P_i))(V)

    Args:
        pairs: couples (a_i, P_i) de projecteurs orthogonaux (voir spectral_pairs)
        auto_insert (bool): insère {P_i, I−P_i} si aucun contexte ne contient P_i
    """
    tol = presheaf.tol
    _validate_pairs(pairs, tol)
    presheaf, _ = ensure_contexts(presheaf, [p for _, p in pairs], auto_insert)
    total = 0.0
    for value, projection in pairs:
        dasein = daseinisation_subobject(projection, presheaf)
        total += value * min(measure_of(state, dasein, cid) for cid in presheaf.poset.ids)
    return float(total)


def check_expectation_kms(
    state: State,
    flow: AutomorphismFlow,
    first: Sequence[Tuple[float, Projection]],
    second: Sequence[Tuple[float, Projection]],
    presheaf: SpectralPresheaf,
    t_grid: Iterable[float],
    auto_insert: bool = True,
) -> List[ReportEntry]:
    """
    Identités KMS sur les valeurs moyennes

    expectation.trace: E(A) = Σ a_i tr(ϱP_i); expectation.invariance: E(A) = E(α_tA);
    expectation.kms_boundary: tr(ϱ P_i α_{iβ}(P_j)) = tr(ϱ P_j P_i).
    """
    tol = presheaf.tol
    eps = tol.eps_measure
    entries = []
    value = expectation_value(state, first, presheaf, auto_insert)
    trace_value = sum(a * state.probability(p.matrix) for a, p in first)
    entries.append(ReportEntry.compare('expectation.trace', 'A', value, trace_value, eps))
    for t in t_grid:
        unitary = flow.unitary(t)
        moved = [(a, Projection(unitary @ p.matrix @ dagger(unitary), tol)) for a, p in first]
        entries.append(ReportEntry.compare('expectation.invariance', 'A', value,
                                           expectation_value(state, moved, presheaf, auto_insert),
                                           eps, parameter=float(t)))
    imaginary = complex(0.0, flow.beta)
    for i, (_, p_i) in enumerate(first):
        for j, (_, p_j) in enumerate(second):
            lhs = complex(np.trace(state.density @ p_i.matrix @ flow.apply(p_j.matrix, imaginary)))
            rhs = complex(np.trace(state.density @ p_j.matrix @ p_i.matrix))
            entries.append(ReportEntry.compare('expectation.kms_boundary', f"A{i}|B{j}", lhs, rhs, eps,
                                               detail=FINITE_DIM_NOTE))
    return _sorted_entries(entries)


def check_membership_bound(
    state: State,
    flow: AutomorphismFlow,
    truth: TruthObject,
    context_id: str,
    r: float,
    t_grid: Iterable[float],
) -> List[ReportEntry]:
    """Valeurs F_{T,S}(t+iβ) pour les couples de membres de T^{ρ,r}_V (entrées d'information)"""
    members = [m for m in truth.members(context_id, r) if not m.is_empty()]
    entries = []
    for first in members:
        for second in members:
            p_s = first.projection_at(context_id)
            p_t = second.projection_at(context_id)
            for t in t_grid:
                value = strip_function(state, flow, p_s, p_t, complex(t, flow.beta))
                entries.append(ReportEntry(
                    'truth.membership_bound', f"{first.label}|{second.label}@({context_id},{r})",
                    value, r, None, INFO, parameter=float(t),
                    detail='≥ r' if value.real >= r - truth.eps else '< r',
                ))
    return _sorted_entries(entries)
