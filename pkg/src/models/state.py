"""
Modèles d'états: matrice densité, sections globales et mesures abstraites
"""

from __future__ import annotations

from typing import Dict, Optional, Tuple

import numpy as np

from src.models.poset import ContextPoset
from src.services.exceptions import ValidationError
from src.services.numerics import (
    DEFAULT_TOLERANCES,
    TolerancePolicy,
    as_matrix,
    encode_matrix,
    frobenius,
    hermitian_eig,
)

TRACE_TOL = 1e-12


class State:
    """Matrice densité ϱ (hermitienne, positive, de trace 1)"""

    def __init__(self, density, tol: TolerancePolicy = DEFAULT_TOLERANCES, label: Optional[str] = None):
        density = as_matrix(density, "ϱ")
        eigenvalues, _ = hermitian_eig(density, tol)
        if eigenvalues[0] < -tol.eps_eig:
            raise ValidationError(f"ϱ n'est pas positive (λ_min = {eigenvalues[0]:.3e})")
        trace = complex(np.trace(density))
        if abs(trace - 1) > TRACE_TOL:
            raise ValidationError(f"tr ϱ = {trace.real:.12f} ≠ 1")
        self.density = density
        self.eigenvalues = eigenvalues
        self.faithful = bool(eigenvalues[0] > tol.eps_eig)
        self.label = label

    @classmethod
    def from_unnormalized(cls, matrix, tol: TolerancePolicy = DEFAULT_TOLERANCES, label: Optional[str] = None) -> "State":
        matrix = np.asarray(matrix, dtype=complex)
        matrix = (matrix + matrix.conj().T) / 2
        return cls(matrix / np.trace(matrix).real, tol, label)

    @classmethod
    def pure(cls, vector, tol: TolerancePolicy = DEFAULT_TOLERANCES, label: Optional[str] = None) -> "State":
        psi = np.asarray(vector, dtype=complex).ravel()
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ValidationError("Vecteur d'état nul")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()), tol, label)

    @property
    def dim(self) -> int:
        return self.density.shape[0]

    def expectation(self, operator: np.ndarray) -> complex:
        return complex(np.trace(self.density @ operator))

    def probability(self, projection: np.ndarray) -> float:
        return float(np.trace(self.density @ projection).real)

    def to_dict(self) -> dict:
        """Convertit en dictionnaire"""
        return {
            'label': self.label,
            'dim': self.dim,
            'faithful': self.faithful,
            'eigenvalues': [float(x) for x in self.eigenvalues],
            'density': encode_matrix(self.density),
        }

    def __repr__(self):
        return f'<State dim={self.dim} faithful={self.faithful}>'


class GlobalSection:
    """Section globale de [0,1]: valeur par contexte, décroissante selon l'inclusion"""

    def __init__(self, poset: ContextPoset, values: Dict[str, float], tol: TolerancePolicy = DEFAULT_TOLERANCES):
        self.poset = poset
        self.values = {cid: float(v) for cid, v in sorted(values.items())}
        self.tol = tol
        for cid, value in self.values.items():
            if value < -tol.eps_measure or value > 1 + tol.eps_measure:
                raise ValidationError(f"Valeur hors de [0,1] en {cid}: {value}")
        violations = self.order_violations()
        if violations:
            smaller, larger, gap = violations[0]
            raise ValidationError(
                f"Section non décroissante: valeur({smaller}) < valeur({larger}) de {gap:.3e}"
            )

    def order_violations(self) -> list:
        """Liste des (V′, V, écart) avec V′ ⊆ V et valeur(V′) < valeur(V) − eps_measure"""
        violations = []
        for smaller, larger in self.poset.edges():
            if smaller in self.values and larger in self.values:
                gap = self.values[larger] - self.values[smaller]
                if gap > self.tol.eps_measure:
                    violations.append((smaller, larger, gap))
        return violations

    def __getitem__(self, context_id: str) -> float:
        return self.values[context_id]

    def restricted_to(self, members) -> Dict[str, float]:
        return {cid: self.values[cid] for cid in sorted(members) if cid in self.values}

    def distance(self, other: "GlobalSection", members=None) -> float:
        keys = sorted(members) if members is not None else sorted(self.values)
        return max((abs(self.values[k] - other.values[k]) for k in keys), default=0.0)

    def to_dict(self) -> dict:
        return dict(self.values)

    def __repr__(self):
        return f'<GlobalSection {len(self.values)} valeurs>'


class AbstractMeasure:
    """
    Table de mesure abstraite: (sous-objet, contexte) → valeur dans [0,1]

    Les sous-objets référencés sont portés par `subobjects` (nom → ClopenSubobject).
    """

    def __init__(self, presheaf, subobjects: dict, table: Dict[Tuple[str, str], float]):
        self.presheaf = presheaf
        self.subobjects = dict(subobjects)
        self.table = {}
        for (name, context_id), value in table.items():
            if name not in self.subobjects:
                raise ValidationError(f"Sous-objet inconnu dans la table: {name}")
            if context_id not in self.subobjects[name].domain:
                raise ValidationError(f"Contexte {context_id} hors du domaine de {name}")
            value = float(value)
            if not 0 <= value <= 1:
                raise ValidationError(f"Valeur de mesure hors de [0,1]: {name}@{context_id} = {value}")
            self.table[(name, context_id)] = value

    @property
    def poset(self) -> ContextPoset:
        return self.presheaf.poset

    def value(self, name: str, context_id: str) -> float:
        return self.table[(name, context_id)]

    def to_dict(self) -> dict:
        return {
            'subobjects': sorted(self.subobjects),
            'entries': [
                {'subobject': name, 'context': cid, 'value': value}
                for (name, cid), value in sorted(self.table.items())
            ],
        }

    def __repr__(self):
        return f'<AbstractMeasure {len(self.table)} entrées>'


def density_distance(first: State, second: State) -> float:
    return frobenius(first.density - second.density)
