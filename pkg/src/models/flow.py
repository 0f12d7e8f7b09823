"""
Flot d'automorphismes à un paramètre α_z(A) = e^{izH}·A·e^{−izH}
"""

from __future__ import annotations

from enum import Enum
from typing import Dict

import numpy as np

from src.services.exceptions import ValidationError
from src.services.numerics import (
    DEFAULT_TOLERANCES,
    TolerancePolicy,
    as_matrix,
    dagger,
    encode_matrix,
    hermitian_eig,
)


PROPAGATOR_CACHE_SIZE = 256


class FlowConvention(str, Enum):
    """Convention de paramétrage du flot"""

    HAMILTONIAN = 'hamiltonian'
    MODULAR = 'modular'

    @classmethod
    def parse(cls, value) -> "FlowConvention":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"Convention non reconnue: {value}") from None


class AutomorphismFlow:
    """
    Flot α engendré par un hamiltonien H à température inverse β

    Convention hamiltonienne: α_z(A) = e^{izH} A e^{−izH}.
    Convention modulaire: α_z(A) = Δ^{−iz/β} A Δ^{iz/β} avec Δ = e^{−βH}, ce qui
    donne le même opérateur; H est alors le hamiltonien modulaire −(1/β)·log ϱ de l'état.
    La convention n'est qu'une étiquette: le paramètre z n'est jamais remis à l'échelle,
    la normalisation s = 1/β est déjà portée par H.
    """

    def __init__(
        self,
        hamiltonian,
        beta: float = 1.0,
        convention: FlowConvention = FlowConvention.HAMILTONIAN,
        tol: TolerancePolicy = DEFAULT_TOLERANCES,
    ):
        self.hamiltonian = as_matrix(hamiltonian, "H")
        beta = float(beta)
        if not beta > 0:
            raise ValidationError(f"β doit être strictement positif (reçu {beta})")
        self.beta = beta
        self.convention = FlowConvention.parse(convention)
        self.tol = tol
        self.eigenvalues, self.eigenvectors = hermitian_eig(self.hamiltonian, tol)
        self._propagators: Dict[complex, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def propagator(self, z: complex) -> np.ndarray:
        """e^{izH} dans la base propre de H, mis en cache par instance"""
        z = complex(z)
        matrix = self._propagators.get(z)
        if matrix is None:
            phases = np.exp(1j * z * self.eigenvalues)
            matrix = (self.eigenvectors * phases) @ dagger(self.eigenvectors)
            matrix.setflags(write=False)
            if len(self._propagators) >= PROPAGATOR_CACHE_SIZE:
                self._propagators.pop(next(iter(self._propagators)))
            self._propagators[z] = matrix
        return matrix

    def apply(self, operator: np.ndarray, z: complex) -> np.ndarray:
        """α_z(A)"""
        return self.propagator(z) @ operator @ self.propagator(-complex(z))

    def transformer(self, z: complex):
        """Retourne A ↦ α_z(A)"""
        forward = self.propagator(z)
        backward = self.propagator(-complex(z))
        return lambda operator: forward @ operator @ backward

    def unitary(self, t: float) -> np.ndarray:
        """U_t = e^{itH} pour t réel"""
        return self.propagator(float(t))

    def to_dict(self) -> dict:
        return {
            'hamiltonian': encode_matrix(self.hamiltonian),
            'beta': self.beta,
            'convention': self.convention.value,
        }

    def __repr__(self):
        return f'<AutomorphismFlow dim={self.dim} β={self.beta} {self.convention.value}>'
