"""
Modèles de référence
Exemple C³ (contexte engendré par P₁₂), contextes diagonaux, poset couvrant
et modèle bipartite de l'application J
"""

from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.models.context import Context
from src.models.flow import AutomorphismFlow
from src.models.group import SampledGroup
from src.models.modular import ModularData
from src.models.poset import ContextPoset
from src.models.state import State
from src.models.subobject import ClopenSubobject, SpectralPresheaf
from src.services.algebra import PosetOptions, build_poset
from src.services.exceptions import ValidationError
from src.services.kms_external import members_at, truth_object
from src.services.modular import tomita_operators
from src.services.numerics import DEFAULT_TOLERANCES, Projection, TolerancePolicy, random_unitary
from src.services.presheaf import build_presheaf, daseinisation_subobject, transported_family

logger = logging.getLogger(__name__)

EXAMPLE_LABEL = 'example'
DIAGONAL_LABEL = 'diag'
EXAMPLE_WEIGHTS = (0.5, 0.3, 0.2)
EXAMPLE_HAMILTONIAN = np.diag([0.0, 1.0, 2.0])
C3_NAMES = ('S1', 'S2', 'S12')


def vector_projection(vector, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Projection:
    return Projection.from_vectors(np.asarray(vector, dtype=complex), tol)


def p12(tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Projection:
    """P₁₂ = ½(|1⟩+|2⟩)(⟨1|+⟨2|) dans ℂ³"""
    return vector_projection([1, 1, 0], tol)


def basis_projection(dim: int, index: int) -> Projection:
    matrix = np.zeros((dim, dim))
    matrix[index, index] = 1
    return Projection(matrix)


def example_context(tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Context:
    """V = lin(P₁₂, 1 − P₁₂)"""
    projection = p12(tol)
    return Context([projection, projection.complement(tol)], label=EXAMPLE_LABEL, tol=tol)


def diagonal_context(dim: int, label: Optional[str] = DIAGONAL_LABEL,
                     tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Context:
    return Context([basis_projection(dim, i) for i in range(dim)], label=label, tol=tol)


def example_state(weights: Sequence[float] = EXAMPLE_WEIGHTS,
                  tol: TolerancePolicy = DEFAULT_TOLERANCES) -> State:
    """ϱ = diag(a₁, a₂, a₃)"""
    weights = [float(a) for a in weights]
    if len(weights) != 3 or any(a < 0 for a in weights):
        raise ValidationError(f"Poids invalides pour l'exemple C³: {weights}")
    if abs(sum(weights) - 1) > 1e-12:
        raise ValidationError(f"Les poids doivent sommer à 1 (somme {sum(weights)})")
    return State(np.diag(weights), tol, label='c3')


def example_flow(beta: float = 1.0, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> AutomorphismFlow:
    return AutomorphismFlow(EXAMPLE_HAMILTONIAN, beta, tol=tol)


def cyclic_group(flow: AutomorphismFlow, gammas: Sequence[float] = ()) -> SampledGroup:
    """Échantillon {0, π/2, π, 3π/2, 2π} du flot de période 2π"""
    return SampledGroup.cyclic(flow, 4, 1.0, endpoint=True, gammas=gammas)


def negative_control_state(tol: TolerancePolicy = DEFAULT_TOLERANCES) -> State:
    """État pur (|1⟩+|2⟩)/√2"""
    return State.pure([1, 1, 0], tol, label='pure')


def group_action_state(tol: TolerancePolicy = DEFAULT_TOLERANCES) -> State:
    """État pur (|1⟩+i|2⟩)/√2, non invariant sous le flot de diag(0,1,2)"""
    return State.pure([1, 1j, 0], tol, label='pure-i')


def example_poset(group: Optional[SampledGroup] = None, group_depth: Optional[int] = None,
                  tol: TolerancePolicy = DEFAULT_TOLERANCES) -> ContextPoset:
    """Poset engendré par le contexte de l'exemple (fermé par le groupe si fourni)"""
    options = PosetOptions(group_closure=group, group_depth=group_depth)
    return build_poset([example_context(tol)], options, tol)


def diagonal_poset(dim: int, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> ContextPoset:
    """Contexte diagonal et tous ses sous-contextes"""
    return build_poset([diagonal_context(dim, tol=tol)], PosetOptions(downward_closure=True), tol)


def spanning_poset(dim: int, seed: int = 0, extra_bases: int = 3,
                   tol: TolerancePolicy = DEFAULT_TOLERANCES) -> ContextPoset:
    """Contexte diagonal et bases aléatoires: les projecteurs engendrent les hermitiennes"""
    rng = np.random.default_rng(seed)
    seeds = [diagonal_context(dim, tol=tol)]
    for index in range(extra_bases):
        unitary = random_unitary(rng, dim)
        blocks = [Projection(np.outer(unitary[:, j], unitary[:, j].conj()), tol) for j in range(dim)]
        seeds.append(Context(blocks, label=f"basis{index + 1}", tol=tol))
    return build_poset(seeds, PosetOptions(), tol)


def c3_subobjects(presheaf: SpectralPresheaf, group: Optional[SampledGroup] = None) -> Dict[str, ClopenSubobject]:
    """
    S₁, S₂, S₁₂ de l'exemple

    Sans groupe: daseinisations de P₁₂, 1−P₁₂ et 1. Avec groupe: familles
    transportées le long du flot depuis le contexte de l'exemple.
    """
    tol = presheaf.tol
    projection = p12(tol)
    projections = {
        'S1': projection,
        'S2': projection.complement(tol),
        'S12': Projection.identity(3),
    }
    if group is None:
        return {name: daseinisation_subobject(p, presheaf, name=name) for name, p in projections.items()}
    base = presheaf.poset.find(example_context(tol))
    return {
        name: transported_family(p, base, group.flow, group.samples, presheaf, name=name)
        for name, p in projections.items()
    }


def c3_memberships(weights: Sequence[float], r_values: Sequence[float],
                   tol: TolerancePolicy = DEFAULT_TOLERANCES) -> List[dict]:
    """
    Appartenance de S₁, S₂, S₁₂ à T^{ρ,r}_V pour chaque r

    Returns:
        list: {'r', 'measures', 'members'} par seuil
    """
    state = example_state(weights, tol)
    poset = example_poset(tol=tol)
    presheaf = build_presheaf(poset)
    named = c3_subobjects(presheaf)
    truth = truth_object(state, presheaf)
    by_key = {s.key: name for name, s in named.items()}
    rows = []
    for r in r_values:
        members = members_at(truth, EXAMPLE_LABEL, r)
        rows.append({
            'r': float(r),
            'measures': {name: truth.tau(s, EXAMPLE_LABEL) for name, s in named.items()},
            'members': sorted(by_key[m.key] for m in members if m.key in by_key),
        })
    return rows


def bipartite_model(rng_seed: int = 0, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Tuple[ModularData, ContextPoset]:
    """
    Espace GNS de M₂ pour ϱ = I/2: N_l = M₂ ⊗ I agit sur ℂ² ⊗ ℂ²

    Returns:
        tuple: (données modulaires, poset des contextes V ⊗ I de N_l)
    """
    data = tomita_operators(State(np.eye(2) / 2, tol, label='tracial'), tol)
    rng = np.random.default_rng(rng_seed)
    generic = random_unitary(rng, 2)
    bases = {
        'l-diag': np.eye(2, dtype=complex),
        'l-plus': np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
        'l-generic': generic,
    }
    contexts = []
    for label, basis in bases.items():
        blocks = [np.kron(np.outer(basis[:, j], basis[:, j].conj()), np.eye(2)) for j in range(2)]
        contexts.append(Context(blocks, label=label, tol=tol))
    poset = build_poset(contexts, PosetOptions(), tol)
    return data, poset
