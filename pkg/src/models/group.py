"""
Échantillon fini du groupe à un paramètre et décompositions en orbites
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from src.models.flow import AutomorphismFlow
from src.services.exceptions import ValidationError

SAMPLE_TOL = 1e-9


class SampledGroup:
    """
    Échantillon {α_t} du flot, avec les points de bande t+iγ (γ ∈ [0, β])

    Les échantillons contiennent 0 et sont stables par t ↦ −t (modulo la période 2π/ω
    lorsqu'une fréquence est déclarée).
    `closure_defects` liste les couples (t, s) dont la somme sort de l'échantillon, t+s étant
    identifié à u lorsque α_{t+s−u} est l'identité (U ∝ I); `require_group` exige qu'il n'y en ait aucun.
    """

    def __init__(
        self,
        flow: AutomorphismFlow,
        samples: Iterable[float],
        gammas: Iterable[float] = (),
        frequency: Optional[float] = None,
    ):
        self.flow = flow
        self.samples: Tuple[float, ...] = tuple(sorted({round(float(t), 15) for t in samples}))
        self.frequency = float(frequency) if frequency else None
        if not any(abs(t) <= SAMPLE_TOL for t in self.samples):
            raise ValidationError("L'échantillon du groupe doit contenir t = 0")
        for t in self.samples:
            if not self.contains(-t):
                raise ValidationError(f"Échantillon non stable par négation: −{t} absent")

        gammas = sorted({float(g) for g in gammas} | {0.0})
        for gamma in gammas:
            if gamma < 0 or gamma > flow.beta + SAMPLE_TOL:
                raise ValidationError(f"γ = {gamma} hors de [0, β]")
        self.gammas: Tuple[float, ...] = tuple(gammas)
        self._defects: Optional[List[Tuple[float, float]]] = None

    @classmethod
    def cyclic(cls, flow: AutomorphismFlow, m: int, frequency: float = 1.0, endpoint: bool = False,
               gammas: Iterable[float] = ()) -> "SampledGroup":
        """Grille t_k = 2πk/(m·ω), k = 0..m−1 (k = m inclus si endpoint)"""
        if m < 1 or frequency <= 0:
            raise ValidationError("Grille cyclique invalide")
        count = m + 1 if endpoint else m
        samples = [2 * math.pi * k / (m * frequency) for k in range(count)]
        return cls(flow, samples, gammas, frequency)

    @property
    def period(self) -> Optional[float]:
        return 2 * math.pi / self.frequency if self.frequency else None

    def contains(self, t: float) -> bool:
        for sample in self.samples:
            difference = sample - t
            if self.period:
                difference = math.remainder(difference, self.period)
            if abs(difference) <= SAMPLE_TOL:
                return True
        return False

    def identified(self, t: float) -> bool:
        """t est dans l'échantillon, ou α_{t−u} est l'identité pour un échantillon u"""
        if self.contains(t):
            return True
        for sample in self.samples:
            unitary = self.flow.unitary(t - sample)
            if np.linalg.norm(unitary - unitary[0, 0] * np.eye(unitary.shape[0])) <= self.flow.tol.eps_order:
                return True
        return False

    def closure_defects(self) -> List[Tuple[float, float]]:
        """Couples (t, s), t ≤ s, dont la somme n'est pas identifiée à un échantillon"""
        if self._defects is None:
            self._defects = [
                (t, s) for i, t in enumerate(self.samples) for s in self.samples[i:]
                if not self.identified(t + s)
            ]
        return list(self._defects)

    @property
    def is_group(self) -> bool:
        return not self.closure_defects()

    def require_group(self) -> "SampledGroup":
        """Lève ValidationError si la loi de groupe ne se referme pas dans l'échantillon"""
        defects = self.closure_defects()
        if defects:
            t, s = defects[0]
            raise ValidationError(
                f"Échantillon non fermé pour la loi de groupe: {t} + {s} absent "
                f"({len(defects)} couples en défaut)"
            )
        return self

    def strip_samples(self) -> List[complex]:
        """Points t+iγ, copies γ = 0 comprises"""
        return [complex(t, gamma) for gamma in self.gammas for t in self.samples]

    def to_dict(self) -> dict:
        return {
            'samples': list(self.samples),
            'gammas': list(self.gammas),
            'frequency': self.frequency,
            'is_group': self.is_group,
        }

    def __len__(self):
        return len(self.samples)

    def __repr__(self):
        return f'<SampledGroup {len(self.samples)} échantillons, γ={list(self.gammas)}>'


@dataclass
class OrbitDecomposition:
    """Sous-groupe fixe H_FV et classes [g] de H/H_FV en un contexte"""

    context_id: str
    fixed: Tuple[float, ...]
    classes: List[Tuple[float, ...]] = field(default_factory=list)

    @property
    def representatives(self) -> List[float]:
        return [cls[0] for cls in self.classes]

    def class_of(self, t: float) -> int:
        for index, members in enumerate(self.classes):
            if any(abs(t - m) <= SAMPLE_TOL for m in members):
                return index
        raise ValidationError(f"Paramètre {t} hors de l'échantillon")

    def to_dict(self) -> dict:
        return {
            'context': self.context_id,
            'fixed': list(self.fixed),
            'classes': [list(c) for c in self.classes],
        }

    def __repr__(self):
        return f'<OrbitDecomposition {self.context_id}: {len(self.classes)} classes>'
