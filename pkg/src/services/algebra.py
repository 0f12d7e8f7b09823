"""
Service algèbre pour toposkms
Contextes, treillis de projecteurs, spectres de Gel'fand, commutants
et construction du poset de contextes V(N)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence

import networkx as nx
import numpy as np
import scipy.linalg

from src.models.context import Character, Context
from src.models.group import SampledGroup
from src.models.poset import ContextPoset
from src.services.exceptions import (
    DimMismatch,
    LatticeTooLarge,
    NonCommuting,
    NotInAlgebra,
    PosetTooLarge,
    TrivialAlgebra,
    ValidationError,
)
from src.services.numerics import (
    DEFAULT_TOLERANCES,
    Projection,
    TolerancePolicy,
    as_matrix,
    cluster_eigenvalues,
    dagger,
    frobenius,
    hermitian_eig,
    require_unitary,
)

logger = logging.getLogger(__name__)

MAX_LATTICE_BLOCKS = 20
DEFAULT_MAX_CONTEXTS = 500


def _hermitian_parts(matrix: np.ndarray) -> List[np.ndarray]:
    real_part = (matrix + dagger(matrix)) / 2
    imaginary_part = (matrix - dagger(matrix)) / 2j
    parts = [real_part]
    if frobenius(imaginary_part) > 0:
        parts.append(imaginary_part)
    return parts


def context_from_operators(
    operators: Sequence,
    label: Optional[str] = None,
    tol: TolerancePolicy = DEFAULT_TOLERANCES,
) -> Context:
    """
    Construit le contexte engendré par des opérateurs normaux qui commutent

    Raffinement séquentiel: chaque sous-espace propre courant est redécoupé
    par la partie hermitienne suivante.

    Args:
        operators: liste non vide de matrices normales deux à deux commutantes
        label (str): identifiant optionnel du contexte
        tol (TolerancePolicy): tolérances

    Returns:
        Context: blocs = projecteurs propres joints
    """
    if not operators:
        raise ValidationError("La liste d'opérateurs est vide")
    matrices = [as_matrix(op, "opérateur") for op in operators]
    dim = matrices[0].shape[0]
    for matrix in matrices:
        if matrix.shape[0] != dim:
            raise DimMismatch(f"Opérateurs de dimensions différentes: {dim} et {matrix.shape[0]}")
        normality = frobenius(matrix @ dagger(matrix) - dagger(matrix) @ matrix)
        if normality > tol.eps_order * max(1.0, frobenius(matrix)) ** 2:
            raise ValidationError(f"Opérateur non normal (‖AA*−A*A‖ = {normality:.3e})")
    for i, first in enumerate(matrices):
        for second in matrices[i + 1:]:
            commutator = frobenius(first @ second - second @ first)
            if commutator > tol.eps_order:
                raise NonCommuting(f"Opérateurs non commutants (‖[A,B]‖ = {commutator:.3e})")

    subspaces = [np.eye(dim, dtype=complex)]
    for matrix in matrices:
        threshold = tol.eps_eig * max(1.0, frobenius(matrix))
        for part in _hermitian_parts(matrix):
            refined = []
            for basis in subspaces:
                compressed = dagger(basis) @ part @ basis
                eigenvalues, vectors = hermitian_eig((compressed + dagger(compressed)) / 2, tol)
                for group in cluster_eigenvalues(eigenvalues, threshold):
                    refined.append(basis @ vectors[:, group])
            subspaces = refined

    if len(subspaces) < 2:
        raise TrivialAlgebra("Les opérateurs sont scalaires: l'algèbre engendrée est ℂ·I")
    blocks = [Projection(basis @ dagger(basis), tol) for basis in subspaces]
    return Context(blocks, label=label, tol=tol)


def lattice_index_sets(context: Context) -> List[frozenset]:
    """Parties de {0..k−1} dans l'ordre des masques binaires"""
    if context.k > MAX_LATTICE_BLOCKS:
        raise LatticeTooLarge(f"Treillis de 2^{context.k} éléments refusé (k > {MAX_LATTICE_BLOCKS})")
    return [
        frozenset(i for i in range(context.k) if mask >> i & 1)
        for mask in range(1 << context.k)
    ]


def projection_lattice(context: Context, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> List[Projection]:
    """
    Treillis P(V) des 2^k sommes de blocs

    Returns:
        list: projecteurs indexés par masque binaire (0 en tête, I en dernier)
    """
    return [Projection(context.projection_of(indices), tol) for indices in lattice_index_sets(context)]


def spectrum(context: Context) -> List[Character]:
    """Spectre de Gel'fand Σ_V: un caractère par bloc minimal"""
    return context.characters()


def coefficients(context: Context, operator, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> np.ndarray:
    """Coefficients c_i avec A = Σ c_i Q_i"""
    matrix = np.asarray(operator, dtype=complex)
    if matrix.shape != (context.dim, context.dim):
        raise DimMismatch(f"Opérateur de forme {matrix.shape} pour un contexte de dimension {context.dim}")
    values = np.array([
        np.trace(block.matrix @ matrix) / block.rank for block in context.blocks
    ], dtype=complex)
    residual = frobenius(matrix - sum(c * b.matrix for c, b in zip(values, context.blocks)))
    if residual > tol.eps_order * max(1.0, frobenius(matrix)):
        raise NotInAlgebra(f"Opérateur hors de {context.id} (résidu {residual:.3e})")
    return values


def evaluate(character: Character, operator, context: Context, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> complex:
    """λ(A) pour A ∈ V"""
    if character.context_id != context.id:
        raise ValidationError(f"Caractère de {character.context_id} évalué sur {context.id}")
    return complex(coefficients(context, operator, tol)[character.index])


def commutant(basis: Sequence, dim: Optional[int] = None, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> List[np.ndarray]:
    """
    Base du commutant {X : [X, B] = 0 pour tout B}

    Noyau de l'application X ↦ (XB − BX)_B en vectorisation ligne par ligne.
    """
    matrices = [np.asarray(b, dtype=complex) for b in basis]
    if dim is None:
        if not matrices:
            raise ValidationError("Dimension requise pour un commutant de base vide")
        dim = matrices[0].shape[0]
    identity = np.eye(dim)
    if not matrices:
        return [u for u in _matrix_units(dim)]
    stacked = np.vstack([np.kron(identity, b.T) - np.kron(b, identity) for b in matrices])
    kernel = scipy.linalg.null_space(stacked, rcond=tol.eps_eig)
    return [kernel[:, j].reshape(dim, dim) for j in range(kernel.shape[1])]


def _matrix_units(dim: int) -> Iterator[np.ndarray]:
    for i in range(dim):
        for j in range(dim):
            unit = np.zeros((dim, dim), dtype=complex)
            unit[i, j] = 1
            yield unit


def span_rank(matrices: Iterable[np.ndarray], tol: float) -> int:
    columns = [np.asarray(m).reshape(-1) for m in matrices]
    if not columns:
        return 0
    return int(np.linalg.matrix_rank(np.column_stack(columns), tol=tol))


def bicommutant_check(context: Context, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> bool:
    """V'' = span(blocs)"""
    blocks = [b.matrix for b in context.blocks]
    first = commutant(blocks, context.dim, tol)
    second = commutant(first, context.dim, tol)
    rank_blocks = span_rank(blocks, tol.eps_eig)
    return span_rank(second, tol.eps_eig) == rank_blocks and span_rank(second + blocks, tol.eps_eig) == rank_blocks


def includes(smaller: Context, larger: Context, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> bool:
    """V′ ⊆ V: chaque bloc de V′ est une somme de blocs de V"""
    if smaller.dim != larger.dim:
        raise DimMismatch(f"Dimensions incompatibles: {smaller.dim} et {larger.dim}")
    if smaller.k > larger.k:
        return False
    return all(larger.index_set_of(block, tol) is not None for block in smaller.blocks)


def apply_automorphism(unitary, context: Context, label: Optional[str] = None,
                       tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Context:
    """α(V): blocs UQ_iU*"""
    unitary = np.asarray(unitary, dtype=complex)
    if unitary.shape != (context.dim, context.dim):
        raise DimMismatch(f"Unitaire de forme {unitary.shape} pour la dimension {context.dim}")
    require_unitary(unitary)
    blocks = [Projection(unitary @ b.matrix @ dagger(unitary), tol) for b in context.blocks]
    return Context(blocks, label=label, tol=tol)


def coarse_graining(context: Context, parts: Sequence[Sequence[int]], tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Context:
    """Contexte obtenu en fusionnant les blocs selon une partition des indices"""
    return Context([Projection(context.projection_of(part), tol) for part in parts], tol=tol)


def set_partitions(items: Sequence[int]) -> Iterator[List[List[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield [[first]] + partition
        for index in range(len(partition)):
            yield partition[:index] + [[first] + partition[index]] + partition[index + 1:]


def bell_number(k: int) -> int:
    row = [1]
    for _ in range(k):
        new_row = [row[-1]]
        for value in row:
            new_row.append(new_row[-1] + value)
        row = new_row
    return row[0]


def meet_context(first: Context, second: Context, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Optional[Context]:
    """
    Intersection V₁ ∩ V₂: composantes connexes du graphe de recouvrement des blocs

    Returns:
        Context | None: None si l'intersection est triviale (une seule composante)
    """
    graph = nx.Graph()
    graph.add_nodes_from(('a', i) for i in range(first.k))
    graph.add_nodes_from(('b', j) for j in range(second.k))
    for i, q in enumerate(first.blocks):
        for j, r in enumerate(second.blocks):
            if frobenius(q.matrix @ r.matrix) > tol.eps_order:
                graph.add_edge(('a', i), ('b', j))
    components = list(nx.connected_components(graph))
    if len(components) < 2:
        return None
    parts = [sorted(i for side, i in component if side == 'a') for component in components]
    return coarse_graining(first, parts, tol)


@dataclass(frozen=True)
class PosetOptions:
    """Options de construction du poset de contextes"""

    downward_closure: bool = False
    meet_closure: bool = False
    group_closure: Optional[SampledGroup] = None
    group_depth: Optional[int] = None
    max_contexts: int = DEFAULT_MAX_CONTEXTS

    def to_dict(self) -> dict:
        return {
            'downward_closure': self.downward_closure,
            'meet_closure': self.meet_closure,
            'group_closure': self.group_closure is not None,
            'group_depth': self.group_depth,
            'max_contexts': self.max_contexts,
        }


class _ContextRegistry:
    """Ensemble de contextes dédupliqué par égalité à tolérance près"""

    def __init__(self, max_contexts: int, tol: TolerancePolicy):
        self.contexts: List[Context] = []
        self.max_contexts = max_contexts
        self.tol = tol

    def find(self, context: Context) -> Optional[Context]:
        for existing in self.contexts:
            if existing.signature() == context.signature() and existing.equals(context, self.tol):
                return existing
        return None

    def add(self, context: Context) -> bool:
        if self.find(context) is not None:
            return False
        if any(existing.id == context.id for existing in self.contexts):
            raise ValidationError(f"Identifiant de contexte en double: {context.id}")
        if len(self.contexts) >= self.max_contexts:
            raise PosetTooLarge(f"Le poset dépasserait {self.max_contexts} contextes")
        self.contexts.append(context)
        return True


def build_poset(
    seeds: Sequence[Context],
    options: PosetOptions = PosetOptions(),
    tol: TolerancePolicy = DEFAULT_TOLERANCES,
) -> ContextPoset:
    """
    Construit un sous-poset fini de V(N)

    Fermetures appliquées dans l'ordre: groupe, puis vers le bas, puis intersections.

    Args:
        seeds: contextes de départ (non vide)
        options (PosetOptions): fermetures et limite de taille
        tol (TolerancePolicy): tolérances

    Returns:
        ContextPoset: contextes dédupliqués et toutes les inclusions
    """
    if not seeds:
        raise ValidationError("Au moins un contexte de départ est requis")
    registry = _ContextRegistry(options.max_contexts, tol)
    for seed in seeds:
        registry.add(seed)

    flags = {'downward': False, 'meet': False, 'group': False}

    group = options.group_closure
    if group is not None:
        frontier = list(registry.contexts)
        rounds = 0
        while frontier and (options.group_depth is None or rounds < options.group_depth):
            added = []
            for context in frontier:
                for t in group.samples:
                    if t == 0:
                        continue
                    image = apply_automorphism(group.flow.unitary(t), context, tol=tol)
                    if registry.add(image):
                        added.append(image)
            frontier = added
            rounds += 1
        flags['group'] = True
        flags['group_depth'] = options.group_depth
        flags['group_fixpoint'] = not frontier
        logger.info(f"📊 Fermeture par le groupe: {len(registry.contexts)} contextes après {rounds} tours")

    if options.downward_closure:
        for context in list(registry.contexts):
            if bell_number(context.k) - 1 > options.max_contexts:
                raise PosetTooLarge(f"Trop de sous-contextes pour k = {context.k}")
            for partition in set_partitions(list(range(context.k))):
                if 2 <= len(partition) < context.k:
                    registry.add(coarse_graining(context, partition, tol))
        flags['downward'] = True

    if options.meet_closure:
        changed = True
        while changed:
            changed = False
            current = list(registry.contexts)
            for i, first in enumerate(current):
                for second in current[i + 1:]:
                    meet = meet_context(first, second, tol)
                    if meet is not None and registry.add(meet):
                        changed = True
        flags['meet'] = True

    contexts = registry.contexts
    inclusions = []
    for smaller in contexts:
        for larger in contexts:
            if smaller is not larger and smaller.k < larger.k and includes(smaller, larger, tol):
                inclusions.append((smaller.id, larger.id))

    poset = ContextPoset(contexts, inclusions, closure_flags=flags, tol=tol)
    logger.info(f"✅ Poset construit: {len(poset)} contextes, {len(inclusions)} inclusions")
    return poset
