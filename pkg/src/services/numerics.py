"""
Service numérique de base pour toposkms
Matrices complexes denses, décomposition hermitienne, fonctions de matrices
et prédicats sur les projecteurs
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np
import scipy.linalg

from src.services.exceptions import (
    DimMismatch,
    NoConvergence,
    NotHermitian,
    NotProjection,
    NotUnitary,
    ValidationError,
)

logger = logging.getLogger(__name__)

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class TolerancePolicy:
    """Politique de tolérance globale (normes de Frobenius et scalaires)"""

    eps_herm: float = 1e-10
    eps_idem: float = 1e-10
    eps_eig: float = 1e-8
    eps_order: float = 1e-8
    eps_measure: float = 1e-8

    def __post_init__(self):
        for key, value in self.to_dict().items():
            if not (isinstance(value, (int, float)) and np.isfinite(value) and value > 0):
                raise ValidationError(f"Tolérance {key} invalide: {value}")
        if self.eps_measure < self.eps_order:
            raise ValidationError(
                f"eps_measure ({self.eps_measure}) doit être >= eps_order ({self.eps_order})"
            )

    @classmethod
    def from_config(cls, cfg) -> "TolerancePolicy":
        """Construit la politique à partir d'une classe Config"""
        return cls(**cfg.tolerance_settings())

    def with_overrides(self, **overrides) -> "TolerancePolicy":
        unknown = set(overrides) - set(self.to_dict())
        if unknown:
            raise ValidationError(f"Tolérance non reconnue: {', '.join(sorted(unknown))}")
        return dataclasses.replace(self, **{k: float(v) for k, v in overrides.items()})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_TOLERANCES = TolerancePolicy()


def as_matrix(entries, name: str = "matrice") -> np.ndarray:
    """
    Convertit des entrées en matrice complexe carrée finie

    Args:
        entries: tableau n×n (nombres réels ou complexes)
        name (str): nom utilisé dans les messages d'erreur

    Returns:
        np.ndarray: copie complexe en lecture seule
    """
    matrix = np.array(entries, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise ValidationError(f"{name} doit être carrée, forme reçue {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValidationError(f"{name} contient des valeurs non finies")
    matrix.setflags(write=False)
    return matrix


def frobenius(matrix: np.ndarray) -> float:
    return float(np.linalg.norm(matrix, 'fro'))


def dagger(matrix: np.ndarray) -> np.ndarray:
    return matrix.conj().T


def is_hermitian(matrix: np.ndarray, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> bool:
    return frobenius(matrix - dagger(matrix)) <= tol.eps_herm


def require_hermitian(matrix: np.ndarray, tol: TolerancePolicy = DEFAULT_TOLERANCES, name: str = "A"):
    residual = frobenius(matrix - dagger(matrix))
    if residual > tol.eps_herm:
        raise NotHermitian(f"{name} n'est pas hermitienne (‖A−A*‖ = {residual:.3e})")
    return matrix


def require_unitary(matrix: np.ndarray, name: str = "U"):
    n = matrix.shape[0]
    residual = frobenius(dagger(matrix) @ matrix - np.eye(n))
    if residual > UNITARY_TOL:
        raise NotUnitary(f"{name} n'est pas unitaire (‖U*U−I‖ = {residual:.3e})")


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    # composante de plus grand module réelle positive
    fixed = vectors.copy()
    for col in range(fixed.shape[1]):
        column = fixed[:, col]
        pivot = int(np.argmax(np.abs(column)))
        value = column[pivot]
        if abs(value) > 0:
            fixed[:, col] = column * (np.conj(value) / abs(value))
    return fixed


def hermitian_eig(matrix: np.ndarray, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Tuple[np.ndarray, np.ndarray]:
    """
    Décomposition spectrale d'une matrice hermitienne

    Args:
        matrix (np.ndarray): matrice hermitienne à eps_herm près
        tol (TolerancePolicy): tolérances

    Returns:
        tuple: (valeurs propres croissantes, U unitaire) avec A = U·diag(λ)·U*
    """
    matrix = np.asarray(matrix, dtype=complex)
    require_hermitian(matrix, tol)
    symmetric = (matrix + dagger(matrix)) / 2
    try:
        eigenvalues, vectors = scipy.linalg.eigh(symmetric)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise NoConvergence(f"Décomposition spectrale non convergente: {e}") from e
    return np.asarray(eigenvalues, dtype=float), _fix_phases(vectors)


def reconstruct(eigenvalues: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return (vectors * eigenvalues) @ dagger(vectors)


def entire_function_of(hamiltonian: np.ndarray, z: complex, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> np.ndarray:
    """Retourne e^{izH} via la base propre de H"""
    eigenvalues, vectors = hermitian_eig(hamiltonian, tol)
    phases = np.exp(1j * complex(z) * eigenvalues)
    return (vectors * phases) @ dagger(vectors)


def positive_power(matrix: np.ndarray, exponent: complex, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> np.ndarray:
    """Puissance complexe A^s d'une matrice hermitienne définie positive"""
    eigenvalues, vectors = hermitian_eig(matrix, tol)
    if np.min(eigenvalues) <= 0:
        raise ValidationError(f"Matrice non définie positive (λ_min = {np.min(eigenvalues):.3e})")
    values = np.exp(complex(exponent) * np.log(eigenvalues))
    return (vectors * values) @ dagger(vectors)


def hermitian_log(matrix: np.ndarray, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> np.ndarray:
    eigenvalues, vectors = hermitian_eig(matrix, tol)
    if np.min(eigenvalues) <= 0:
        raise ValidationError(f"Logarithme d'une matrice non définie positive (λ_min = {np.min(eigenvalues):.3e})")
    return (vectors * np.log(eigenvalues)) @ dagger(vectors)


def cluster_eigenvalues(eigenvalues: np.ndarray, threshold: float) -> list:
    """Regroupe les valeurs propres croissantes dont l'écart consécutif est <= threshold"""
    groups = []
    current = [0]
    for index in range(1, len(eigenvalues)):
        if eigenvalues[index] - eigenvalues[index - 1] <= threshold:
            current.append(index)
        else:
            groups.append(current)
            current = [index]
    groups.append(current)
    return groups


class Projection:
    """Projecteur orthogonal validé (hermitien, idempotent, spectre dans {0,1})"""

    __slots__ = ('matrix', 'rank')

    def __init__(self, matrix, tol: TolerancePolicy = DEFAULT_TOLERANCES):
        matrix = as_matrix(matrix, "projecteur")
        residual_herm = frobenius(matrix - dagger(matrix))
        if residual_herm > tol.eps_herm:
            raise NotProjection(f"Projecteur non hermitien (‖P−P*‖ = {residual_herm:.3e})")
        residual_idem = frobenius(matrix @ matrix - matrix)
        if residual_idem > tol.eps_idem:
            raise NotProjection(f"Projecteur non idempotent (‖P²−P‖ = {residual_idem:.3e})")
        eigenvalues = np.linalg.eigvalsh((matrix + dagger(matrix)) / 2)
        distance = np.minimum(np.abs(eigenvalues), np.abs(eigenvalues - 1))
        if np.max(distance) > tol.eps_eig:
            raise NotProjection(f"Spectre hors de {{0,1}} (écart {np.max(distance):.3e})")
        self.matrix = matrix
        self.rank = int(round(float(np.trace(matrix).real)))

    @classmethod
    def zero(cls, dim: int) -> "Projection":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def identity(cls, dim: int) -> "Projection":
        return cls(np.eye(dim))

    @classmethod
    def from_vectors(cls, vectors, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> "Projection":
        """Projecteur sur le sous-espace engendré par des vecteurs (colonnes)"""
        block = np.array(vectors, dtype=complex)
        if block.ndim == 1:
            block = block.reshape(-1, 1)
        basis = scipy.linalg.orth(block)
        return cls(basis @ dagger(basis), tol)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def complement(self, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> "Projection":
        return Projection(np.eye(self.dim) - self.matrix, tol)

    def is_zero(self, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> bool:
        return frobenius(self.matrix) <= tol.eps_order

    def is_identity(self, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> bool:
        return frobenius(self.matrix - np.eye(self.dim)) <= tol.eps_order

    def equals(self, other: "Projection", tol: TolerancePolicy = DEFAULT_TOLERANCES) -> bool:
        return self.dim == other.dim and frobenius(self.matrix - other.matrix) <= tol.eps_order

    def to_dict(self) -> dict:
        return {
            'dim': self.dim,
            'rank': self.rank,
            'matrix': encode_matrix(self.matrix),
        }

    def __repr__(self):
        return f'<Projection dim={self.dim} rank={self.rank}>'


def encode_complex(value: complex):
    """Encodage [re, im] des nombres complexes (réel simple si partie imaginaire nulle)"""
    value = complex(value)
    if value.imag == 0:
        return float(value.real)
    return [float(value.real), float(value.imag)]


def encode_matrix(matrix: np.ndarray) -> list:
    return [[encode_complex(x) for x in row] for row in np.asarray(matrix)]


def _check_dims(P: Projection, Q: Projection):
    if P.dim != Q.dim:
        raise DimMismatch(f"Dimensions incompatibles: {P.dim} et {Q.dim}")


def proj_leq(P: Projection, Q: Projection, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> bool:
    """P ≤ Q ssi ‖(I−Q)·P‖_F ≤ eps_order"""
    _check_dims(P, Q)
    return frobenius((np.eye(P.dim) - Q.matrix) @ P.matrix) <= tol.eps_order


def range_projection_of_null_space(matrix: np.ndarray, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Projection:
    """Projecteur sur les vecteurs propres de valeur propre <= eps_eig d'une matrice hermitienne positive"""
    eigenvalues, vectors = hermitian_eig(matrix, tol)
    kernel = vectors[:, eigenvalues <= tol.eps_eig]
    return Projection(kernel @ dagger(kernel), tol)


def proj_meet(P: Projection, Q: Projection, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Projection:
    """Projecteur sur range(P) ∩ range(Q), noyau de (I−P)+(I−Q)"""
    _check_dims(P, Q)
    identity = np.eye(P.dim)
    return range_projection_of_null_space((identity - P.matrix) + (identity - Q.matrix), tol)


def proj_join(P: Projection, Q: Projection, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Projection:
    """P ∨ Q = I − (I−P) ∧ (I−Q)"""
    _check_dims(P, Q)
    return proj_meet(P.complement(tol), Q.complement(tol), tol).complement(tol)


def sum_of_projections(projections: Iterable[Projection], dim: int) -> np.ndarray:
    total = np.zeros((dim, dim), dtype=complex)
    for projection in projections:
        total = total + projection.matrix
    return total


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (raw + dagger(raw)) / 2


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(raw)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_projection(rng: np.random.Generator, dim: int, rank: int) -> Projection:
    unitary = random_unitary(rng, dim)
    basis = unitary[:, :rank]
    return Projection(basis @ dagger(basis))


def random_density(rng: np.random.Generator, dim: int, min_weight: float = 0.05) -> np.ndarray:
    """Matrice densité fidèle aléatoire (valeurs propres >= min_weight/dim)"""
    weights = rng.dirichlet(np.ones(dim))
    weights = (1 - min_weight) * weights + min_weight / dim
    unitary = random_unitary(rng, dim)
    return (unitary * weights) @ dagger(unitary)
