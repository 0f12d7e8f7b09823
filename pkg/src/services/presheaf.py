"""
Service préfaisceau spectral
Restrictions, isomorphisme 𝔖, daseinisation extérieure, sous-objets clopen,
tirés en arrière par le flot et énumération
"""

from __future__ import annotations

import logging
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from src.models.context import Context
from src.models.poset import ContextPoset
from src.models.subobject import ClopenSubobject, SpectralPresheaf
from src.services.algebra import apply_automorphism, lattice_index_sets
from src.services.exceptions import (
    DimMismatch,
    DomainMismatch,
    EnumerationTooLarge,
    NotIncluded,
    NotInLattice,
    PosetNotClosed,
    ValidationError,
)
from src.services.numerics import (
    DEFAULT_TOLERANCES,
    Projection,
    TolerancePolicy,
    dagger,
    frobenius,
    proj_leq,
)

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 1_000_000


def restriction_map(larger: Context, smaller: Context, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> tuple:
    """
    Table de restriction Σ_V → Σ_V′ pour V′ ⊆ V

    Le bloc i de V est envoyé sur l'unique bloc j de V′ tel que Q_i ≤ Q′_j.
    """
    if larger.dim != smaller.dim:
        raise DimMismatch(f"Dimensions incompatibles: {larger.dim} et {smaller.dim}")
    table = []
    for block in larger.blocks:
        targets = [j for j, coarse in enumerate(smaller.blocks) if proj_leq(block, coarse, tol)]
        if len(targets) != 1:
            raise NotIncluded(f"{smaller.id} n'est pas inclus dans {larger.id}")
        table.append(targets[0])
    return tuple(table)


def build_presheaf(poset: ContextPoset) -> SpectralPresheaf:
    """Préfaisceau spectral: une table de restriction par inclusion du poset"""
    restrictions = {}
    for smaller, larger in poset.edges():
        restrictions[(smaller, larger)] = restriction_map(poset.context(larger), poset.context(smaller), poset.tol)
    presheaf = SpectralPresheaf(poset, restrictions)
    logger.debug(f"Préfaisceau spectral: {len(restrictions)} tables de restriction")
    return presheaf


def check_functoriality(presheaf: SpectralPresheaf) -> List[tuple]:
    """Liste des chaînes V″ ⊆ V′ ⊆ V dont la composée diffère de la restriction directe"""
    poset = presheaf.poset
    violations = []
    for middle, top in poset.edges():
        for bottom in poset.down_set(middle):
            if bottom == middle:
                continue
            upper = presheaf.table(middle, top)
            lower = presheaf.table(bottom, middle)
            direct = presheaf.table(bottom, top)
            composite = tuple(lower[j] for j in upper)
            if composite != direct:
                violations.append((bottom, middle, top))
    return violations


def S_map(projection: Projection, context: Context, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> frozenset:
    """𝔖(P) = {λ : λ(P) = 1} pour P ∈ P(V)"""
    indices = context.index_set_of(projection, tol)
    if indices is None:
        raise NotInLattice(f"Le projecteur n'appartient pas au treillis de {context.id}")
    return indices


def S_inverse(indices: Iterable[int], context: Context, transport: Optional[np.ndarray] = None,
              tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Projection:
    """𝔖⁻¹(S) = Σ_{i∈S} Q_i (conjugué par le transport éventuel)"""
    indices = frozenset(indices)
    if any(i < 0 or i >= context.k for i in indices):
        raise ValidationError(f"Indices hors du spectre de {context.id}: {sorted(indices)}")
    matrix = context.projection_of(indices)
    if transport is not None:
        matrix = transport @ matrix @ dagger(transport)
    return Projection(matrix, tol)


def outer_indices(projection: Projection, context: Context, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> frozenset:
    """Blocs Q_i avec ‖Q_i·P‖_F > eps_order"""
    if projection.dim != context.dim:
        raise DimMismatch(f"Dimensions incompatibles: {projection.dim} et {context.dim}")
    return frozenset(
        i for i, block in enumerate(context.blocks)
        if frobenius(block.matrix @ projection.matrix) > tol.eps_order
    )


def outer_daseinisation(projection: Projection, context: Context, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Projection:
    """δ°(P)_V: plus petit élément de P(V) au-dessus de P"""
    return Projection(context.projection_of(outer_indices(projection, context, tol)), tol)


def outer_daseinisation_bruteforce(projection: Projection, context: Context,
                                   tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Projection:
    """δ°(P)_V par filtrage exhaustif des 2^k éléments du treillis"""
    dominating = []
    for indices in lattice_index_sets(context):
        candidate = Projection(context.projection_of(indices), tol)
        if proj_leq(projection, candidate, tol):
            dominating.append(indices)
    smallest = frozenset.intersection(*dominating)
    return Projection(context.projection_of(smallest), tol)


def daseinisation_subobject(projection: Projection, presheaf: SpectralPresheaf,
                            name: Optional[str] = None) -> ClopenSubobject:
    """δ(P): composante 𝔖(δ°(P)_V) en chaque contexte du poset"""
    poset = presheaf.poset
    components = {
        cid: outer_indices(projection, poset.context(cid), presheaf.tol) for cid in poset.ids
    }
    return ClopenSubobject(presheaf, components, domain=poset.ids, name=name)


def full_subobject(presheaf: SpectralPresheaf, domain: Optional[Iterable[str]] = None,
                   name: str = "Σ") -> ClopenSubobject:
    domain = sorted(domain) if domain is not None else presheaf.poset.ids
    return ClopenSubobject(presheaf, {cid: presheaf.full(cid) for cid in domain}, domain=domain, name=name)


def empty_subobject(presheaf: SpectralPresheaf, domain: Optional[Iterable[str]] = None,
                    name: str = "∅") -> ClopenSubobject:
    domain = sorted(domain) if domain is not None else presheaf.poset.ids
    return ClopenSubobject(presheaf, {}, domain=domain, name=name)


def transport_matching(unitary: np.ndarray, source: Context, target: Context,
                       tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Optional[List[int]]:
    """Correspondance i ↦ j avec U Q_i U* = Q′_j, None si α(V) ≠ V′"""
    if source.signature() != target.signature():
        return None
    matching = []
    for block in source.blocks:
        image = unitary @ block.matrix @ dagger(unitary)
        found = [j for j, other in enumerate(target.blocks) if frobenius(image - other.matrix) <= tol.eps_order]
        if len(found) != 1:
            return None
        matching.append(found[0])
    return matching


def image_context_id(unitary: np.ndarray, context_id: str, poset: ContextPoset) -> Optional[str]:
    """Identifiant de α(V) dans le poset, None si absent"""
    image = apply_automorphism(unitary, poset.context(context_id), tol=poset.tol)
    return poset.find(image)


def anchor_domain(unitaries: Sequence[np.ndarray], poset: ContextPoset,
                  within: Optional[Iterable[str]] = None) -> frozenset:
    """
    Plus grand ensemble inférieur de contextes dont toutes les images sont présentes

    Args:
        unitaries: éléments du flot considérés
        poset (ContextPoset): poset de contextes
        within: restriction facultative des images autorisées (domaine d'un sous-objet)
    """
    allowed = set(within) if within is not None else set(poset.ids)
    anchors = set()
    for cid in poset.ids:
        images = [image_context_id(u, cid, poset) for u in unitaries]
        if all(image is not None and image in allowed for image in images):
            anchors.add(cid)
    return frozenset(cid for cid in anchors if set(poset.down_set(cid)) <= anchors)


def pullback(unitary, subobject: ClopenSubobject, domain: Optional[Iterable[str]] = None,
             name: Optional[str] = None) -> ClopenSubobject:
    """
    α*S: (α*S)_V = S_{α(V)} relu dans les indices de V

    Le transport devient T·U, de sorte que μ^ρ(α*S)(V) = tr(ϱ·P_{S_{α(V)}}).

    Args:
        unitary: U_t = e^{itH}
        subobject (ClopenSubobject): sous-objet S
        domain: ensemble inférieur cible (par défaut, les contextes ancres)

    Returns:
        ClopenSubobject: sous-objet tiré en arrière
    """
    presheaf = subobject.presheaf
    poset = presheaf.poset
    tol = presheaf.tol
    unitary = np.asarray(unitary, dtype=complex)
    if domain is None:
        domain = anchor_domain([unitary], poset, subobject.domain)
        if not domain:
            raise PosetNotClosed("Aucun contexte du poset n'a son image dans le domaine du sous-objet")
    domain = frozenset(domain)

    components = {}
    for cid in domain:
        context = poset.context(cid)
        target = image_context_id(unitary, cid, poset)
        if target is None or target not in subobject.domain:
            raise PosetNotClosed(f"Image de {cid} par le flot absente du poset")
        matching = transport_matching(unitary, context, poset.context(target), tol)
        if matching is None:
            raise PosetNotClosed(f"Correspondance de blocs introuvable pour {cid} → {target}")
        selected = subobject.components[target]
        components[cid] = frozenset(i for i, j in enumerate(matching) if j in selected)

    transport = unitary if subobject.transport is None else subobject.transport @ unitary
    return ClopenSubobject(presheaf, components, domain, transport, name or f"α*{subobject.label}")


def pushforward(unitary, subobject: ClopenSubobject, name: Optional[str] = None) -> ClopenSubobject:
    """
    α_!S: la composante en α(V′) est l'image de S_{V′} par la correspondance de blocs

    Les projecteurs représentés sont α(P_{S_V′}).
    """
    presheaf = subobject.presheaf
    poset = presheaf.poset
    tol = presheaf.tol
    unitary = np.asarray(unitary, dtype=complex)
    components = {}
    for cid in subobject.domain:
        target = image_context_id(unitary, cid, poset)
        if target is None:
            raise PosetNotClosed(f"Image de {cid} par le flot absente du poset")
        matching = transport_matching(unitary, poset.context(cid), poset.context(target), tol)
        if matching is None:
            raise PosetNotClosed(f"Correspondance de blocs introuvable pour {cid} → {target}")
        components[target] = frozenset(matching[i] for i in subobject.components[cid])
    if not poset.is_lower_set(components):
        raise PosetNotClosed("L'image du domaine par le flot n'est pas un ensemble inférieur")
    transport = None
    if subobject.transport is not None:
        transport = unitary @ subobject.transport @ dagger(unitary)
    return ClopenSubobject(presheaf, components, components.keys(), transport, name or f"α!{subobject.label}")


def subobject_from_assignment(presheaf: SpectralPresheaf, assignment: Dict[str, Iterable[int]],
                              domain: Optional[Iterable[str]] = None,
                              name: Optional[str] = None) -> ClopenSubobject:
    """
    Plus petite extension fermée d'une affectation partielle

    Un contexte non affecté reçoit l'union des restrictions des contextes affectés au-dessus, ∅ sinon.
    """
    poset = presheaf.poset
    domain = frozenset(domain) if domain is not None else frozenset(poset.ids)
    assignment = {cid: frozenset(indices) for cid, indices in assignment.items()}
    components = {}
    for cid in domain:
        if cid in assignment:
            components[cid] = assignment[cid]
            continue
        collected = set()
        for above in poset.up_set(cid):
            if above != cid and above in assignment:
                collected |= presheaf.restrict(above, cid, assignment[above])
        components[cid] = frozenset(collected)
    return ClopenSubobject(presheaf, components, domain, name=name)


def transported_family(projection: Projection, base_id: str, flow, samples: Iterable[float],
                       presheaf: SpectralPresheaf, name: Optional[str] = None) -> ClopenSubobject:
    """
    Famille α-covariante: composante 𝔖(α_s P) en α_s(V₀) pour chaque échantillon s

    Args:
        projection (Projection): P ∈ P(V₀)
        base_id (str): contexte de base V₀
        flow (AutomorphismFlow): flot α
        samples: paramètres réels s
        presheaf (SpectralPresheaf): préfaisceau spectral du poset
    """
    poset = presheaf.poset
    tol = presheaf.tol
    base = poset.context(base_id)
    S_map(projection, base, tol)
    assignment: Dict[str, frozenset] = {}
    for s in sorted(set(samples) | {0.0}):
        unitary = flow.unitary(s)
        target = image_context_id(unitary, base_id, poset)
        if target is None:
            logger.debug(f"⚠️ Image de {base_id} en t={s} absente du poset")
            continue
        moved = Projection(unitary @ projection.matrix @ dagger(unitary), tol)
        indices = S_map(moved, poset.context(target), tol)
        if target in assignment and assignment[target] != indices:
            raise ValidationError(f"Affectations incompatibles en {target} pour la famille transportée")
        assignment[target] = indices
    return subobject_from_assignment(presheaf, assignment, name=name)


def restrict_subobject(subobject: ClopenSubobject, domain: Iterable[str]) -> ClopenSubobject:
    """Restriction de S à un ensemble inférieur plus petit (↓W)"""
    domain = frozenset(domain)
    if not domain <= subobject.domain:
        raise DomainMismatch(f"Domaine hors de celui de {subobject.label}")
    components = {cid: subobject.components[cid] for cid in domain}
    return ClopenSubobject(subobject.presheaf, components, domain, subobject.transport, subobject.name)


def with_transport(subobject: ClopenSubobject, unitary: np.ndarray, name: Optional[str] = None) -> ClopenSubobject:
    """Mêmes indices, transport composé T·U"""
    transport = unitary if subobject.transport is None else subobject.transport @ unitary
    return ClopenSubobject(subobject.presheaf, subobject.components, subobject.domain, transport,
                           name or subobject.name)


def _require_compatible(first: ClopenSubobject, second: ClopenSubobject):
    if first.presheaf is not second.presheaf or first.domain != second.domain:
        raise DomainMismatch(f"Domaines différents: {first.label} et {second.label}")
    if not first.same_transport(second, first.presheaf.tol.eps_order):
        raise DomainMismatch(f"Transports différents: {first.label} et {second.label}")


def subobject_meet(first: ClopenSubobject, second: ClopenSubobject, name: Optional[str] = None) -> ClopenSubobject:
    _require_compatible(first, second)
    components = {cid: first.components[cid] & second.components[cid] for cid in first.domain}
    return ClopenSubobject(first.presheaf, components, first.domain, first.transport,
                           name or f"({first.label}∧{second.label})")


def subobject_join(first: ClopenSubobject, second: ClopenSubobject, name: Optional[str] = None) -> ClopenSubobject:
    _require_compatible(first, second)
    components = {cid: first.components[cid] | second.components[cid] for cid in first.domain}
    return ClopenSubobject(first.presheaf, components, first.domain, first.transport,
                           name or f"({first.label}∨{second.label})")


def heyting_negation(subobject: ClopenSubobject, name: Optional[str] = None) -> ClopenSubobject:
    """(¬S)_W = {λ : λ|_{W′} ∉ S_{W′} pour tout W′ ⊆ W du domaine}"""
    presheaf = subobject.presheaf
    poset = presheaf.poset
    components = {}
    for cid in subobject.domain:
        below = [w for w in poset.down_set(cid) if w in subobject.domain]
        kept = set()
        for index in range(presheaf.size(cid)):
            if all(presheaf.table(w, cid)[index] not in subobject.components[w] for w in below):
                kept.add(index)
        components[cid] = frozenset(kept)
    return ClopenSubobject(presheaf, components, subobject.domain, subobject.transport,
                           name or f"¬{subobject.label}")


def _supersets(required: frozenset, size: int) -> List[frozenset]:
    free = [i for i in range(size) if i not in required]
    return [
        required | frozenset(free[b] for b in range(len(free)) if mask >> b & 1)
        for mask in range(1 << len(free))
    ]


def enumerate_subobjects(presheaf: SpectralPresheaf, domain: Optional[Iterable[str]] = None,
                         cap: int = DEFAULT_ENUMERATION_CAP) -> List[ClopenSubobject]:
    """
    Énumère tous les sous-objets clopen sur un ensemble inférieur (typiquement ↓V)

    Parcours en profondeur des contextes du plus grand au plus petit: en chaque
    contexte, on choisit un sur-ensemble des restrictions imposées par le haut.

    Raises:
        EnumerationTooLarge: si le nombre de familles dépasse cap
    """
    poset = presheaf.poset
    domain = frozenset(domain) if domain is not None else frozenset(poset.ids)
    if not poset.is_lower_set(domain):
        raise ValidationError("Le domaine d'énumération doit être un ensemble inférieur")
    order = sorted(domain, key=lambda cid: (-presheaf.size(cid), cid))
    families: List[Dict[str, frozenset]] = []

    def visit(position: int, chosen: Dict[str, frozenset]):
        if position == len(order):
            if len(families) >= cap:
                raise EnumerationTooLarge(f"Plus de {cap} sous-objets sur le domaine")
            families.append(dict(chosen))
            return
        cid = order[position]
        required = set()
        for above, indices in chosen.items():
            if poset.leq(cid, above):
                required |= presheaf.restrict(above, cid, indices)
        for candidate in _supersets(frozenset(required), presheaf.size(cid)):
            chosen[cid] = candidate
            visit(position + 1, chosen)
            del chosen[cid]

    visit(0, {})
    subobjects = [ClopenSubobject(presheaf, family, domain) for family in families]
    subobjects.sort(key=lambda s: s.key)
    logger.debug(f"📊 {len(subobjects)} sous-objets énumérés sur {len(domain)} contextes")
    return subobjects
