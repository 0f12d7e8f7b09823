"""
Objets de vérité T^{ρ,r} et valeurs de vérité v(δP ∈ T^ρ)(V, r)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

from src.models.poset import ContextPoset
from src.services.exceptions import ValidationError


@dataclass(frozen=True)
class StageVR:
    """Stade (V, r) avec r ∈ (0, 1]"""

    context_id: str
    r: float

    def __post_init__(self):
        if not 0 < self.r <= 1:
            raise ValidationError(f"Seuil r hors de (0,1]: {self.r}")

    def leq(self, other: "StageVR", poset: ContextPoset) -> bool:
        """(V′, r′) ≤ (V, r) ssi V′ ⊆ V et r′ ≤ r"""
        return poset.leq(self.context_id, other.context_id) and self.r <= other.r

    def to_dict(self) -> dict:
        return {'context': self.context_id, 'r': self.r}


class TruthObject:
    """
    Objet de vérité d'un état: seuils τ(S, V) = min_{V′⊆V} μ^ρ(S)(V′)

    thresholds[V] liste les couples (sous-objet sur ↓V, τ) dans l'ordre d'énumération.
    """

    def __init__(self, state, presheaf, thresholds: Dict[str, List[Tuple[object, float]]], eps: float, transport=None):
        self.state = state
        self.presheaf = presheaf
        self.thresholds = thresholds
        self.eps = eps
        self.transport = transport

    @property
    def poset(self) -> ContextPoset:
        return self.presheaf.poset

    @property
    def contexts(self) -> List[str]:
        return sorted(self.thresholds)

    def entries(self, context_id: str) -> List[Tuple[object, float]]:
        try:
            return self.thresholds[context_id]
        except KeyError:
            raise ValidationError(f"Contexte {context_id} absent de l'objet de vérité") from None

    def tau(self, subobject, context_id: str) -> float:
        for candidate, value in self.entries(context_id):
            if candidate.key == subobject.key:
                return value
        raise ValidationError(f"Sous-objet {subobject.label} absent en {context_id}")

    def members(self, context_id: str, r: float) -> list:
        """{S : τ(S, V) ≥ r}"""
        return [s for s, value in self.entries(context_id) if value >= r - self.eps]

    def to_dict(self) -> dict:
        return {
            cid: [{'subobject': s.label, 'tau': value} for s, value in self.thresholds[cid]]
            for cid in self.contexts
        }

    def __repr__(self):
        total = sum(len(v) for v in self.thresholds.values())
        return f'<TruthObject {len(self.thresholds)} contextes, {total} seuils>'


class TruthValue:
    """Valeur de vérité: seuils V′ ↦ min(r, μ^ρ(δP)(V′)) sur ↓V"""

    def __init__(self, proposition: str, stage: StageVR, cutoffs: Dict[str, float], poset: ContextPoset):
        self.proposition = proposition
        self.stage = stage
        self.cutoffs = dict(sorted(cutoffs.items()))
        self.poset = poset

    def contains(self, context_id: str, r: float) -> bool:
        """(V′, r′) appartient à la valeur de vérité ssi V′ ⊆ V et r′ ≤ seuil(V′)"""
        if context_id not in self.cutoffs:
            return False
        return 0 < r <= self.cutoffs[context_id]

    def is_totally_true(self, eps: float) -> bool:
        return all(abs(value - self.stage.r) <= eps for value in self.cutoffs.values())

    def to_dict(self) -> dict:
        return {
            'proposition': self.proposition,
            'stage': self.stage.to_dict(),
            'cutoffs': self.cutoffs,
        }

    def __repr__(self):
        return f'<TruthValue {self.proposition} @ ({self.stage.context_id}, {self.stage.r})>'
