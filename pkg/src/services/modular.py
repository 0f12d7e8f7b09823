"""
Service de théorie modulaire (Tomita–Takesaki en dimension finie)
Espace GNS, opérateurs S/Δ/J, flot modulaire et application J sur les contextes
"""

from __future__ import annotations

import logging
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.models.context import Context
from src.models.flow import AutomorphismFlow, FlowConvention
from src.models.modular import AntilinearOperator, GNSSpace, ModularData
from src.models.poset import ContextPoset
from src.models.report import FAIL, PASS, ReportEntry
from src.models.state import State
from src.services.algebra import includes
from src.services.exceptions import InvalidImage, NotCyclicSeparating, NotFaithful, ValidationError
from src.services.numerics import (
    DEFAULT_TOLERANCES,
    Projection,
    TolerancePolicy,
    dagger,
    frobenius,
    hermitian_log,
    positive_power,
    require_unitary,
)

logger = logging.getLogger(__name__)

MODULAR_TOL = 1e-10
FLOW_TOL = 1e-9


def gns_space(state: State, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> GNSSpace:
    """
    Espace de Hilbert–Schmidt de ϱ avec Ω = ϱ^{1/2}

    Ω est le vecteur cyclique; il est séparant exactement quand ϱ est fidèle.
    """
    if not state.faithful:
        raise NotFaithful(f"ϱ non fidèle (λ_min = {state.eigenvalues[0]:.3e})")
    return GNSSpace(state, positive_power(state.density, 0.5, tol))


def tomita_operators(state: State, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> ModularData:
    """
    Construit S(AΩ) = A*Ω, Δ = S*S et J à partir d'un état fidèle

    Args:
        state (State): état fidèle ϱ
        tol (TolerancePolicy): tolérances

    Returns:
        ModularData: opérateurs et résidus des identités de décomposition polaire
    """
    gns = gns_space(state, tol)
    n = gns.n
    omega = gns.omega
    omega_inv = positive_power(state.density, -0.5, tol)
    swap = gns.transpose_permutation()

    # x = AΩ ↦ Ω⁻¹·x*·Ω, soit (Ω⁻¹ ⊗ Ωᵀ)·T∘K
    S = AntilinearOperator(np.kron(omega_inv, omega.T) @ swap)
    J = AntilinearOperator(swap)
    delta = S.adjoint().compose(S)
    delta_closed = np.kron(state.density, np.linalg.inv(state.density).T)
    delta_half = np.kron(omega, omega_inv.T)
    delta_half_inv = np.kron(omega_inv, omega.T)

    omega_vector = gns.omega_vector
    identity = np.eye(n * n)
    residuals = {
        'delta_closed_form': frobenius(delta - delta_closed),
        'delta_hermitian': frobenius(delta - dagger(delta)),
        'S_equals_J_delta_half': frobenius(S.matrix - J.compose(delta_half).matrix),
        'S_equals_delta_inv_half_J': frobenius(S.matrix - delta_half_inv @ J.matrix),
        'S_involution': frobenius(S.compose(S) - identity),
        'J_involution': frobenius(J.compose(J) - identity),
        'J_selfadjoint': frobenius(J.adjoint().matrix - J.matrix),
        'delta_omega': float(np.linalg.norm(delta @ omega_vector - omega_vector)),
        'J_omega': float(np.linalg.norm(J.apply(omega_vector) - omega_vector)),
        'J_antiunitary': _antiunitarity_residual(J, gns),
    }
    minimum = float(np.min(np.linalg.eigvalsh((delta + dagger(delta)) / 2)))
    if minimum <= 0:
        raise ValidationError(f"Δ n'est pas défini positif (λ_min = {minimum:.3e})")

    data = ModularData(gns, S, delta, J, delta_half, residuals)
    worst = max(residuals.values())
    if worst > MODULAR_TOL:
        logger.warning(f"⚠️ Résidu modulaire maximal {worst:.3e}")
    else:
        logger.info(f"✅ Opérateurs modulaires construits (n = {n}, résidu max {worst:.3e})")
    return data


def _antiunitarity_residual(J: AntilinearOperator, gns: GNSSpace) -> float:
    """max |⟨Jx, Jy⟩ − ⟨y, x⟩| sur les paires d'unités matricielles"""
    images = [J.apply(gns.vec(unit)) for unit in gns.matrix_units()]
    vectors = [gns.vec(unit) for unit in gns.matrix_units()]
    worst = 0.0
    for i, x in enumerate(vectors):
        for j, y in enumerate(vectors):
            worst = max(worst, abs(gns.inner(images[i], images[j]) - gns.inner(y, x)))
    return worst


def check_tomita(data: ModularData) -> List[ReportEntry]:
    """Entrées de rapport pour chaque identité modulaire et le spectre {a_i/a_j}"""
    entries = [
        ReportEntry.bound(f"modular.{name}", f"n={data.gns.n}", value, MODULAR_TOL)
        for name, value in sorted(data.residuals.items())
    ]
    eigenvalues = data.gns.state.eigenvalues
    expected = np.sort(np.array([a / b for a in eigenvalues for b in eigenvalues]))
    actual = np.sort(np.linalg.eigvalsh((data.delta + dagger(data.delta)) / 2))
    entries.append(ReportEntry.bound('modular.delta_spectrum', f"n={data.gns.n}",
                                     float(np.max(np.abs(actual - expected))), MODULAR_TOL))
    return entries


def modular_unitary(state: State, t: float, beta: float = 1.0, normalized: bool = True,
                    tol: TolerancePolicy = DEFAULT_TOLERANCES) -> np.ndarray:
    """ϱ^{−its} avec s = 1/β si normalized, sinon s = 1"""
    if not state.faithful:
        raise NotFaithful("Le flot modulaire requiert un état fidèle")
    scale = 1.0 / beta if normalized else 1.0
    return positive_power(state.density, -1j * t * scale, tol)


def modular_flow(state: State, t: float, beta: float = 1.0, normalized: bool = True,
                 tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Callable[[np.ndarray], np.ndarray]:
    """
    Transformateur A ↦ ϱ^{−its}·A·ϱ^{its}

    Pour un état de Gibbs ϱ = e^{−βH}/Z et s = 1/β, on retrouve e^{itH}·A·e^{−itH}.
    """
    unitary = modular_unitary(state, t, beta, normalized, tol)
    inverse = dagger(unitary)
    return lambda operator: unitary @ np.asarray(operator, dtype=complex) @ inverse


def modular_hamiltonian(state: State, beta: float = 1.0, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> np.ndarray:
    """H_mod = −(1/β)·log ϱ"""
    if not state.faithful:
        raise NotFaithful("Hamiltonien modulaire indéfini pour un état non fidèle")
    return -hermitian_log(state.density, tol) / beta


def modular_automorphism_flow(state: State, beta: float = 1.0,
                              tol: TolerancePolicy = DEFAULT_TOLERANCES) -> AutomorphismFlow:
    return AutomorphismFlow(modular_hamiltonian(state, beta, tol), beta, FlowConvention.MODULAR, tol)


def check_modular_flow(
    state: State,
    beta: float,
    t_grid: Iterable[float],
    hamiltonian: Optional[np.ndarray] = None,
    tol: TolerancePolicy = DEFAULT_TOLERANCES,
) -> List[ReportEntry]:
    """
    Compare le flot modulaire au flot de H_mod (ou de H fourni) sur les unités matricielles

    Vérifie aussi que le transformateur préserve produits et adjoints (stabilité de M_n).
    """
    reference = AutomorphismFlow(
        hamiltonian if hamiltonian is not None else modular_hamiltonian(state, beta, tol),
        beta, FlowConvention.MODULAR, tol,
    )
    n = state.dim
    units = []
    for i in range(n):
        for j in range(n):
            unit = np.zeros((n, n), dtype=complex)
            unit[i, j] = 1
            units.append(unit)

    entries = []
    for t in t_grid:
        transformer = modular_flow(state, t, beta, True, tol)
        flow_residual = max(frobenius(transformer(u) - reference.apply(u, t)) for u in units)
        product_residual = max(
            frobenius(transformer(a @ b) - transformer(a) @ transformer(b)) for a in units for b in units
        )
        adjoint_residual = max(frobenius(transformer(dagger(u)) - dagger(transformer(u))) for u in units)
        entries.append(ReportEntry.bound('modular.flow_equals_hamiltonian', f"n={n}", flow_residual, FLOW_TOL,
                                         parameter=float(t)))
        entries.append(ReportEntry.bound('modular.flow_product', f"n={n}", product_residual, FLOW_TOL,
                                         parameter=float(t)))
        entries.append(ReportEntry.bound('modular.flow_adjoint', f"n={n}", adjoint_residual, FLOW_TOL,
                                         parameter=float(t)))
    return entries


def require_cyclic_separating(data: ModularData, subalgebra: Sequence[np.ndarray]):
    """
    Pré-test d'une sous-algèbre déclarée: Ω cyclique (rang de {AΩ} = n²) et séparant

    Raises:
        NotCyclicSeparating: si le rang de l'orbite est insuffisant
    """
    rank = data.gns.orbit_rank(subalgebra, MODULAR_TOL)
    if rank < data.gns.dim:
        raise NotCyclicSeparating(f"Ω n'est pas cyclique pour la sous-algèbre (rang {rank} < {data.gns.dim})")
    if not data.gns.state.faithful:
        raise NotCyclicSeparating("Ω n'est pas séparant: ϱ non fidèle")


def commutant_swap_check(data: ModularData, basis: Optional[Sequence[np.ndarray]] = None,
                         subalgebra: Optional[Sequence[np.ndarray]] = None) -> List[ReportEntry]:
    """
    Vérifie Jπ(A)J ∈ π(M_n)′ pour chaque élément de base A

    Args:
        data (ModularData): données modulaires de M_n
        basis: éléments A testés (unités matricielles par défaut)
        subalgebra: base d'une sous-algèbre déclarée, soumise au pré-test cyclique/séparant

    Returns:
        List[ReportEntry]: commutateur maximal et identification Jπ(A)J = x ↦ x·A*
    """
    gns = data.gns
    if subalgebra is not None:
        require_cyclic_separating(data, subalgebra)
        partners = list(subalgebra)
    else:
        partners = gns.matrix_units()
    basis = list(basis) if basis is not None else list(partners)

    commutator = 0.0
    right_residual = 0.0
    for a in basis:
        swapped = data.J.conjugate(gns.pi(a))
        right_residual = max(right_residual, frobenius(swapped - gns.right(dagger(a))))
        for b in partners:
            represented = gns.pi(b)
            commutator = max(commutator, frobenius(swapped @ represented - represented @ swapped))
    location = f"n={gns.n}"
    logger.info(f"📊 Commutateur maximal [JAJ, B] = {commutator:.3e}")
    return [
        ReportEntry.bound('modular.commutant_swap', location, commutator, MODULAR_TOL,
                          detail=f"{len(basis)} éléments de base"),
        ReportEntry.bound('modular.right_multiplication', location, right_residual, MODULAR_TOL),
    ]


def j_image_context(context: Context, unitary_part: np.ndarray,
                    tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Context:
    """Blocs U·conj(Q)·U* (conjugaison antiunitaire U∘K)"""
    unitary_part = np.asarray(unitary_part, dtype=complex)
    try:
        blocks = [Projection(unitary_part @ np.conj(b.matrix) @ dagger(unitary_part), tol) for b in context.blocks]
        return Context(blocks, tol=tol)
    except ValidationError as exc:
        raise InvalidImage(f"Image invalide pour {context.id}: {exc}") from exc


def jmap_on_contexts(unitary_part, poset: ContextPoset,
                     tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Tuple[ContextPoset, Dict[str, str]]:
    """
    Applique V ↦ JVJ à chaque contexte du poset

    Args:
        unitary_part: partie unitaire U de l'antiunitaire J = U∘K
        poset (ContextPoset): poset source
        tol (TolerancePolicy): tolérances

    Returns:
        (ContextPoset, dict): poset image et correspondance id source → id image
    """
    unitary_part = np.asarray(unitary_part, dtype=complex)
    if unitary_part.shape != (poset.dim, poset.dim):
        raise InvalidImage(f"Dimension de J incompatible: {unitary_part.shape} pour n = {poset.dim}")
    require_unitary(unitary_part, "J")

    images: List[Context] = []
    mapping: Dict[str, str] = {}
    for context in poset.contexts:
        image = j_image_context(context, unitary_part, tol)
        # réutilise l'identifiant source lorsque l'image coïncide avec un contexte du poset
        existing = poset.find(image)
        if existing is not None:
            image = image.relabel(existing)
        known = next((c for c in images if c.equals(image, tol)), None)
        if known is None:
            images.append(image)
            known = image
        mapping[context.id] = known.id

    inclusions = [
        (small.id, large.id)
        for small in images for large in images
        if small is not large and small.k < large.k and includes(small, large, tol)
    ]
    target = ContextPoset(images, inclusions, closure_flags={'jmap': True}, tol=tol)
    logger.info(f"✅ Application J: {len(poset)} contextes → {len(target)} images")
    return target, mapping


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


def check_order_continuity(mapping: Dict[str, str], source: ContextPoset,
                           target: ContextPoset) -> List[ReportEntry]:
    """
    Préservation de l'ordre, continuité d'Alexandroff et bijectivité d'une application de posets

    La continuité est testée sur la base {↓W} des ouverts du poset image: l'image
    réciproque de chaque ↓W doit être un ensemble inférieur de la source. Tout ouvert
    est une réunion de tels ↓W, le test couvre donc tous les ouverts.
    L'entrée `jmap.lemma` passe lorsque les deux premiers verdicts coïncident.
    """
    missing = [cid for cid in source.ids if mapping.get(cid) not in target]
    if missing:
        raise InvalidImage(f"Contextes sans image dans le poset cible: {', '.join(missing)}")

    order_violations = [
        (a, b) for a in source.ids for b in source.ids
        if a != b and source.leq(a, b) and not target.leq(mapping[a], mapping[b])
    ]
    continuity_violations = []
    for generator, lower in target.principal_lower_sets().items():
        preimage = frozenset(cid for cid in source.ids if mapping[cid] in lower)
        if not source.is_lower_set(preimage):
            continuity_violations.append(generator)

    images = [mapping[cid] for cid in source.ids]
    bijective = len(set(images)) == len(images) and set(images) == set(target.ids)
    inverse_violations = []
    if bijective:
        inverse = {mapping[cid]: cid for cid in source.ids}
        inverse_violations = [
            (a, b) for a in target.ids for b in target.ids
            if a != b and target.leq(a, b) and not source.leq(inverse[a], inverse[b])
        ]

    location = f"{len(source)}→{len(target)}"
    order_ok = not order_violations
    continuity_ok = not continuity_violations
    entries = [
        ReportEntry('jmap.order', location, len(order_violations), 0, float(len(order_violations)),
                    _verdict(order_ok), detail='; '.join(f"{a}⊆{b}" for a, b in order_violations[:5]) or None),
        ReportEntry('jmap.continuity', location, len(continuity_violations), 0, float(len(continuity_violations)),
                    _verdict(continuity_ok),
                    detail='; '.join(f"↓{w}" for w in continuity_violations[:5]) or None),
        ReportEntry('jmap.lemma', location, order_ok, continuity_ok, None, _verdict(order_ok == continuity_ok)),
        ReportEntry('jmap.bijective', location, len(set(images)), len(target), None, _verdict(bijective)),
    ]
    if bijective:
        entries.append(ReportEntry('jmap.inverse_order', location, len(inverse_violations), 0,
                                   float(len(inverse_violations)), _verdict(not inverse_violations)))
    if order_ok and continuity_ok:
        logger.info(f"✅ Application de posets croissante et continue ({location})")
    else:
        logger.warning(f"❌ Application de posets: ordre={order_ok}, continuité={continuity_ok}")
    return entries
