"""
Service KMS interne
Sous-groupes fixes, orbites H/H_FV, objets « brève » (unions disjointes
d'orbites) et conditions internes C1/C2 sur un échantillon fini du flot
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.models.context import Context
from src.models.group import SAMPLE_TOL, OrbitDecomposition, SampledGroup
from src.models.report import INFO, ReportEntry
from src.models.state import GlobalSection, State
from src.models.subobject import ClopenSubobject, SpectralPresheaf
from src.models.truth import TruthObject
from src.services.exceptions import NotFaithful, PosetNotClosed, ValidationError
from src.services.measure import measure_of
from src.services.numerics import dagger, frobenius
from src.services.presheaf import anchor_domain, image_context_id, pullback, pushforward

logger = logging.getLogger(__name__)


def fixes_context(group: SampledGroup, t: float, context: Context) -> bool:
    """α_t(Q_i) = Q_i pour tout bloc, à eps_order près"""
    unitary = group.flow.unitary(t)
    return all(
        frobenius(unitary @ block.matrix @ dagger(unitary) - block.matrix) <= group.flow.tol.eps_order
        for block in context.blocks
    )


def fixed_point_subgroup(context: Context, group: SampledGroup) -> Tuple[float, ...]:
    """H_FV: échantillons dont le transformateur fixe chaque bloc de V"""
    return tuple(t for t in group.samples if fixes_context(group, t, context))


def orbits(context: Context, group: SampledGroup) -> OrbitDecomposition:
    """
    Classes [g] de H/H_FV: t rejoint la classe de représentant r si α_{t−r} fixe V
    """
    group.require_group()
    classes: List[List[float]] = []
    for t in group.samples:
        for members in classes:
            if fixes_context(group, t - members[0], context):
                members.append(t)
                break
        else:
            classes.append([t])
    decomposition = OrbitDecomposition(
        context.id, fixed_point_subgroup(context, group), [tuple(c) for c in classes]
    )
    logger.debug(f"📊 {decomposition.context_id}: {len(decomposition.classes)} classes d'orbite")
    return decomposition


def classify_automorphisms(context: Context, group: SampledGroup) -> Dict[str, List[float]]:
    """
    Répartit les échantillons selon la dimension d des éléments fixes de V

    d = 1 (seuls les scalaires): fidèles; d = k: fixent V; sinon ensemble intermédiaire.
    """
    tol = group.flow.tol
    result = {'faithful': [], 'fixing': [], 'middle': []}
    for t in group.samples:
        unitary = group.flow.unitary(t)
        columns = [
            (unitary @ block.matrix @ dagger(unitary) - block.matrix).reshape(-1)
            for block in context.blocks
        ]
        rank = int(np.linalg.matrix_rank(np.column_stack(columns), tol=tol.eps_order))
        fixed_dimension = context.k - rank
        if fixed_dimension == context.k:
            result['fixing'].append(t)
        elif fixed_dimension == 1:
            result['faithful'].append(t)
        else:
            result['middle'].append(t)
    return result


def faithful_automorphisms(context: Context, group: SampledGroup) -> List[float]:
    """Échantillons qui ne fixent aucun élément non scalaire de V"""
    return classify_automorphisms(context, group)['faithful']


def _group_anchors(group: SampledGroup, subobject: ClopenSubobject) -> frozenset:
    unitaries = [group.flow.unitary(t) for t in group.samples]
    return anchor_domain(unitaries, subobject.presheaf.poset, subobject.domain)


def _orbit_value(state: State, subobject: ClopenSubobject, context_id: str, group: SampledGroup, t: float) -> float:
    poset = subobject.presheaf.poset
    pulled = pullback(group.flow.unitary(t), subobject, domain=poset.down_set(context_id))
    return measure_of(state, pulled, context_id)


def breve_measure(state: State, subobject: ClopenSubobject, context_id: str,
                  group: SampledGroup) -> List[Tuple[float, float]]:
    """μ^ρ(l_g*S)(V) pour un représentant g par classe d'orbite"""
    poset = subobject.presheaf.poset
    decomposition = orbits(poset.context(context_id), group)
    return [
        (g, _orbit_value(state, subobject, context_id, group, g))
        for g in decomposition.representatives
    ]


def check_internal_C1(
    state: State,
    subobjects: Sequence[ClopenSubobject],
    group: SampledGroup,
    context_ids: Optional[Iterable[str]] = None,
) -> List[ReportEntry]:
    """
    C1 interne: μ^ρ(α_t*S)(V) constante sur tout l'échantillon (section constante Γ^c)

    Le verdict porte sur l'écart max − min ≤ eps_measure; les valeurs par orbite
    sont listées dans le détail.
    """
    eps = group.flow.tol.eps_measure
    entries = []
    for subobject in subobjects:
        anchors = _group_anchors(group, subobject)
        if context_ids is not None:
            requested = set(context_ids)
            missing = requested - anchors
            if missing:
                raise PosetNotClosed(f"Contextes sans orbite complète: {', '.join(sorted(missing))}")
            anchors = frozenset(requested)
        if not anchors:
            raise PosetNotClosed(f"Aucun contexte ancre pour {subobject.label}")
        for cid in sorted(anchors):
            values = [_orbit_value(state, subobject, cid, group, t) for t in group.samples]
            orbit_values = breve_measure(state, subobject, cid, group)
            spread = max(values) - min(values)
            entries.append(ReportEntry(
                'internal.C1', f"{subobject.label}@{cid}", min(values), max(values), spread,
                'pass' if spread <= eps else 'fail',
                detail='orbites: ' + ', '.join(f"[{g:.6g}]={v:.12g}" for g, v in orbit_values),
            ))
    failures = [e for e in entries if e.failed]
    if failures:
        logger.warning(f"❌ C1 interne: {len(failures)} orbite(s) non constante(s)")
    else:
        logger.info(f"✅ C1 interne vérifiée ({len(entries)} entrées)")
    return entries


def check_internal_C2(
    state: State,
    first: ClopenSubobject,
    second: ClopenSubobject,
    group: SampledGroup,
    gamma: Optional[float] = None,
    context_ids: Optional[Iterable[str]] = None,
    require_faithful: bool = True,
) -> List[ReportEntry]:
    """
    Diagramme d'échange interne entre t et t+iγ

    γ = β: tr(ϱ·P_T·α_{t+iβ}(P_S)) = tr(ϱ·α_t(P_S)·P_T).
    γ = 0: tr(ϱ·P_T·α_t(P_S)) = tr(ϱ·P_T·P_S), ce qui redonne C1 interne pour T = Σ.
    """
    if require_faithful and not state.faithful:
        raise NotFaithful("C2 interne requiert un état fidèle")
    flow = group.flow
    gamma = flow.beta if gamma is None else float(gamma)
    if not any(abs(gamma - g) <= SAMPLE_TOL for g in group.gammas):
        raise ValidationError(f"γ = {gamma} absent des échantillons de bande")
    if abs(gamma) > SAMPLE_TOL and abs(gamma - flow.beta) > SAMPLE_TOL:
        raise ValidationError("Le diagramme interne n'est défini que pour γ = 0 ou γ = β")
    eps = flow.tol.eps_measure

    poset = first.presheaf.poset
    common = first.domain & second.domain
    unitaries = [flow.unitary(t) for t in group.samples]
    anchors = anchor_domain(unitaries, poset, common)
    if context_ids is not None:
        missing = set(context_ids) - anchors
        if missing:
            raise PosetNotClosed(f"Contextes sans orbite complète: {', '.join(sorted(missing))}")
        anchors = frozenset(context_ids)
    if not anchors:
        raise PosetNotClosed("Aucun contexte ancre pour C2 interne")

    pair = f"{first.label}|{second.label}"
    entries = []
    for cid in sorted(anchors):
        p_s = first.projection_at(cid)
        p_t = second.projection_at(cid)
        for t in group.samples:
            strip = complex(np.trace(state.density @ p_t @ flow.apply(p_s, complex(t, gamma))))
            if abs(gamma) <= SAMPLE_TOL:
                target = complex(np.trace(state.density @ p_t @ p_s))
            else:
                target = complex(np.trace(state.density @ flow.apply(p_s, t) @ p_t))
            entries.append(ReportEntry.compare('internal.C2', f"{pair}@{cid}", strip, target, eps,
                                               parameter=complex(t, gamma)))
    return sorted(entries, key=lambda e: e.sort_key())


@dataclass
class BreveFiber:
    """Fibre d'un objet brève: représentant g, contexte α_g(V) et donnée portée"""

    representative: float
    context_id: str
    payload: object = None

    def to_dict(self) -> dict:
        payload = self.payload
        if hasattr(payload, 'to_dict'):
            payload = payload.to_dict()
        return {'representative': self.representative, 'context': self.context_id, 'payload': payload}


@dataclass
class BreveObject:
    """Union disjointe des fibres X(α_gV) indexées par H/H_FV"""

    kind: str
    fibers: Dict[str, List[BreveFiber]] = field(default_factory=dict)

    def fiber_count(self, context_id: str) -> int:
        return len(self.fibers[context_id])

    def to_dict(self) -> dict:
        return {
            'kind': self.kind,
            'fibers': {cid: [f.to_dict() for f in fibers] for cid, fibers in sorted(self.fibers.items())},
        }

    def __repr__(self):
        return f'<BreveObject {self.kind} {len(self.fibers)} contextes>'


def breve_object(
    fiber_of: Callable[[str], object],
    presheaf: SpectralPresheaf,
    group: SampledGroup,
    kind: str = 'X',
    context_ids: Optional[Iterable[str]] = None,
) -> BreveObject:
    """
    Construit l'objet brève: en V, une fibre X(α_gV) par classe [g] de H/H_FV

    Args:
        fiber_of: donnée du préfaisceau X en un contexte
        presheaf (SpectralPresheaf): préfaisceau du poset fermé par le groupe
        group (SampledGroup): échantillon du flot
        kind (str): nom de l'objet (Σ, [0,1], T)
    """
    poset = presheaf.poset
    context_ids = sorted(context_ids) if context_ids is not None else poset.ids
    fibers = {}
    for cid in context_ids:
        decomposition = orbits(poset.context(cid), group)
        entries = []
        for g in decomposition.representatives:
            image = image_context_id(group.flow.unitary(g), cid, poset)
            if image is None:
                raise PosetNotClosed(f"Image de {cid} en t={g} absente du poset")
            entries.append(BreveFiber(g, image, fiber_of(image)))
        fibers[cid] = entries
    return BreveObject(kind, fibers)


def breve_spectrum(presheaf: SpectralPresheaf, group: SampledGroup,
                   context_ids: Optional[Iterable[str]] = None) -> BreveObject:
    """Σ brève: une copie du spectre de α_g(V) par classe d'orbite"""
    return breve_object(presheaf.spectrum, presheaf, group, 'Σ', context_ids)


def breve_spectrum_restriction(breve: BreveObject, presheaf: SpectralPresheaf, group: SampledGroup,
                               smaller: str, larger: str) -> Dict[Tuple[float, int], Tuple[float, int]]:
    """
    Restriction fibre à fibre de Σ brève pour V′ ⊆ V

    (g, λ) en V est envoyé sur ([g]_{V′}, λ|) via la restriction α_gV → α_gV′.
    """
    poset = presheaf.poset
    if not poset.leq(smaller, larger):
        raise ValidationError(f"{smaller} n'est pas inclus dans {larger}")
    lower = orbits(poset.context(smaller), group)
    mapping = {}
    for fiber in breve.fibers[larger]:
        g = fiber.representative
        representative = lower.representatives[lower.class_of(g)]
        lower_fiber = next(f for f in breve.fibers[smaller] if f.representative == representative)
        moved_lower = image_context_id(group.flow.unitary(g), smaller, poset)
        table = presheaf.table(moved_lower, fiber.context_id)
        for index in range(presheaf.size(fiber.context_id)):
            restricted = table[index]
            if moved_lower != lower_fiber.context_id:
                # α_g V′ = α_{g′} V′ au bloc près: correspondance par égalité de projecteurs
                source = poset.context(moved_lower).blocks[restricted].matrix
                target = poset.context(lower_fiber.context_id)
                restricted = next(j for j, b in enumerate(target.blocks)
                                  if frobenius(b.matrix - source) <= presheaf.tol.eps_order)
            mapping[(g, index)] = (representative, restricted)
    return mapping


def breve_section(section: GlobalSection, presheaf: SpectralPresheaf, group: SampledGroup,
                  context_ids: Optional[Iterable[str]] = None) -> BreveObject:
    """[0,1] brève: en chaque fibre, les valeurs de la section sur ↓(α_gV)"""
    poset = presheaf.poset
    return breve_object(lambda cid: section.restricted_to(poset.down_set(cid)), presheaf, group, '[0,1]', context_ids)


def breve_truth(truth: TruthObject, group: SampledGroup,
                context_ids: Optional[Iterable[str]] = None) -> BreveObject:
    """T brève: seuils τ de l'objet de vérité en α_g(V)"""
    def fiber_of(cid: str):
        return {s.label: value for s, value in truth.entries(cid)}
    return breve_object(fiber_of, truth.presheaf, group, 'T', context_ids)


def check_breve_truth(truth: TruthObject, group: SampledGroup, context_id: str) -> List[ReportEntry]:
    """
    Compare les fibres de T brève: τ(S, V) = τ(α_g!S, α_gV) pour chaque classe [g]

    Les membres sont transportés par image directe le long du flot.
    """
    poset = truth.poset
    eps = truth.eps
    entries = []
    decomposition = orbits(poset.context(context_id), group)
    for g in decomposition.representatives:
        unitary = group.flow.unitary(g)
        image = image_context_id(unitary, context_id, poset)
        if image is None or image not in truth.thresholds:
            raise PosetNotClosed(f"Fibre α_g({context_id}) absente en t={g}")
        residual = 0.0
        for subobject, value in truth.entries(context_id):
            moved = pushforward(unitary, subobject)
            moved_value = min(measure_of(truth.state, moved, cid) for cid in moved.domain)
            residual = max(residual, abs(value - moved_value))
        entries.append(ReportEntry.bound('internal.breve_T', f"{context_id}→{image}", residual, eps,
                                         parameter=float(g)))
    return entries


def breve_fiber_summary(breve: BreveObject) -> List[ReportEntry]:
    """Entrées d'information: nombre de fibres par contexte"""
    return [
        ReportEntry(f"internal.breve_{breve.kind}", cid, len(fibers), None, None, INFO,
                    detail=', '.join(f.context_id for f in fibers))
        for cid, fibers in sorted(breve.fibers.items())
    ]
