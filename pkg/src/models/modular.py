"""
Modèles de la théorie modulaire en dimension finie
Espace GNS de Hilbert–Schmidt, opérateurs antilinéaires et données (S, Δ, J)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Union

import numpy as np

from src.models.state import State
from src.services.numerics import dagger


class GNSSpace:
    """
    Espace GNS de M_n: matrices n×n avec ⟨x, y⟩ = tr(x*y)

    Vectorisation ligne par ligne (ordre lexicographique des unités E_ij),
    vecteur cyclique Ω = ϱ^{1/2}, représentation π(A)x = A·x.
    """

    def __init__(self, state: State, omega: np.ndarray):
        self.state = state
        self.n = state.dim
        self.omega = omega
        self.omega_vector = self.vec(omega)

    @property
    def dim(self) -> int:
        return self.n * self.n

    def vec(self, matrix: np.ndarray) -> np.ndarray:
        return np.asarray(matrix, dtype=complex).reshape(-1)

    def unvec(self, vector: np.ndarray) -> np.ndarray:
        return np.asarray(vector, dtype=complex).reshape(self.n, self.n)

    def inner(self, x: np.ndarray, y: np.ndarray) -> complex:
        return complex(np.vdot(x, y))

    def pi(self, operator: np.ndarray) -> np.ndarray:
        """π(A) = A ⊗ I (multiplication à gauche)"""
        return np.kron(operator, np.eye(self.n))

    def right(self, operator: np.ndarray) -> np.ndarray:
        """x ↦ x·B, soit I ⊗ Bᵀ"""
        return np.kron(np.eye(self.n), np.asarray(operator).T)

    def transpose_permutation(self) -> np.ndarray:
        """T: vec(x) ↦ vec(xᵀ)"""
        n = self.n
        permutation = np.zeros((n * n, n * n))
        for i in range(n):
            for j in range(n):
                permutation[j * n + i, i * n + j] = 1
        return permutation

    def matrix_units(self) -> list:
        units = []
        for i in range(self.n):
            for j in range(self.n):
                unit = np.zeros((self.n, self.n), dtype=complex)
                unit[i, j] = 1
                units.append(unit)
        return units

    def orbit_rank(self, basis: Iterable[np.ndarray], tol: float = 1e-10) -> int:
        """Rang de {AΩ : A ∈ base} (cyclicité testée par le rang)"""
        columns = [self.vec(a @ self.omega) for a in basis]
        if not columns:
            return 0
        return int(np.linalg.matrix_rank(np.column_stack(columns), tol=tol))

    def to_dict(self) -> dict:
        return {'n': self.n, 'dim': self.dim, 'omega_norm': float(np.linalg.norm(self.omega_vector))}

    def __repr__(self):
        return f'<GNSSpace n={self.n} dim={self.dim}>'


class AntilinearOperator:
    """Opérateur antilinéaire stocké sous la forme M∘K (K: conjugaison complexe)"""

    def __init__(self, matrix: np.ndarray):
        self.matrix = np.asarray(matrix, dtype=complex)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ np.conj(vector)

    def compose(self, other: Union["AntilinearOperator", np.ndarray]):
        """
        self ∘ other

        Returns:
            np.ndarray si other est antilinéaire (M1·conj(M2)), sinon AntilinearOperator
        """
        if isinstance(other, AntilinearOperator):
            return self.matrix @ np.conj(other.matrix)
        return AntilinearOperator(self.matrix @ np.conj(np.asarray(other)))

    def premultiply(self, linear: np.ndarray) -> "AntilinearOperator":
        """L ∘ self"""
        return AntilinearOperator(np.asarray(linear) @ self.matrix)

    def adjoint(self) -> "AntilinearOperator":
        """(MK)* = MᵀK"""
        return AntilinearOperator(self.matrix.T)

    def conjugate(self, linear: np.ndarray) -> np.ndarray:
        """self ∘ L ∘ self pour L linéaire"""
        return self.matrix @ np.conj(linear) @ np.conj(self.matrix)

    def __repr__(self):
        return f'<AntilinearOperator dim={self.matrix.shape[0]}>'


@dataclass
class ModularData:
    """Données de Tomita–Takesaki (S, Δ, J) d'un état fidèle"""

    gns: GNSSpace
    S: AntilinearOperator
    delta: np.ndarray
    J: AntilinearOperator
    delta_half: np.ndarray
    residuals: Dict[str, float] = field(default_factory=dict)

    def delta_power(self, exponent: complex) -> np.ndarray:
        eigenvalues, vectors = np.linalg.eigh((self.delta + dagger(self.delta)) / 2)
        return (vectors * np.exp(complex(exponent) * np.log(eigenvalues))) @ dagger(vectors)

    def to_dict(self) -> dict:
        return {
            'gns': self.gns.to_dict(),
            'residuals': dict(sorted(self.residuals.items())),
        }

    def __repr__(self):
        return f'<ModularData n={self.gns.n}>'
