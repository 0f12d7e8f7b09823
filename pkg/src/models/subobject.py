"""
Modèles du préfaisceau spectral et des sous-objets clopen
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from src.models.context import Character
from src.models.poset import ContextPoset
from src.services.exceptions import NotClopen, NotIncluded, ValidationError
from src.services.numerics import dagger, frobenius


class SpectralPresheaf:
    """
    Préfaisceau spectral Σ au-dessus d'un poset de contextes

    restrictions[(V′, V)] est la table d'indices bloc de V → bloc de V′ pour V′ ⊆ V.
    """

    def __init__(self, poset: ContextPoset, restrictions: Dict[Tuple[str, str], Tuple[int, ...]]):
        self.poset = poset
        self.restrictions = dict(restrictions)

    @property
    def tol(self):
        return self.poset.tol

    def spectrum(self, context_id: str) -> List[Character]:
        return self.poset.context(context_id).characters()

    def size(self, context_id: str) -> int:
        return self.poset.context(context_id).k

    def table(self, smaller: str, larger: str) -> Tuple[int, ...]:
        if smaller == larger:
            return tuple(range(self.size(larger)))
        try:
            return self.restrictions[(smaller, larger)]
        except KeyError:
            raise NotIncluded(f"{smaller} n'est pas inclus dans {larger}") from None

    def restrict(self, larger: str, smaller: str, indices: Iterable[int]) -> frozenset:
        """Image de S_V ⊆ Σ_V par la restriction Σ_V → Σ_V′"""
        table = self.table(smaller, larger)
        return frozenset(table[i] for i in indices)

    def full(self, context_id: str) -> frozenset:
        return frozenset(range(self.size(context_id)))

    def to_dict(self) -> dict:
        return {
            'contexts': {cid: self.size(cid) for cid in self.poset.ids},
            'restrictions': {
                f"{small}<{large}": list(table)
                for (small, large), table in sorted(self.restrictions.items())
            },
        }

    def __repr__(self):
        return f'<SpectralPresheaf {len(self.poset)} contextes, {len(self.restrictions)} restrictions>'


class ClopenSubobject:
    """
    Sous-objet clopen S: famille S_W ⊆ Σ_W stable par restriction sur un ensemble inférieur

    transport est un unitaire optionnel U: le projecteur représenté en W vaut U(Σ_{i∈S_W} Q_i)U*.
    """

    def __init__(
        self,
        presheaf: SpectralPresheaf,
        components: Dict[str, Iterable[int]],
        domain: Optional[Iterable[str]] = None,
        transport: Optional[np.ndarray] = None,
        name: Optional[str] = None,
    ):
        self.presheaf = presheaf
        poset = presheaf.poset
        self.domain = frozenset(domain) if domain is not None else frozenset(components)
        unknown = [d for d in self.domain if d not in poset]
        if unknown:
            raise ValidationError(f"Contextes inconnus dans le domaine: {sorted(unknown)}")
        if not poset.is_lower_set(self.domain):
            raise ValidationError("Le domaine d'un sous-objet doit être un ensemble inférieur")

        self.components: Dict[str, frozenset] = {}
        for context_id in sorted(self.domain):
            indices = frozenset(int(i) for i in components.get(context_id, ()))
            if any(i < 0 or i >= presheaf.size(context_id) for i in indices):
                raise ValidationError(f"Indice de caractère hors spectre en {context_id}: {sorted(indices)}")
            self.components[context_id] = indices
        extra = set(components) - self.domain
        if extra:
            raise ValidationError(f"Composantes hors domaine: {sorted(extra)}")

        if transport is not None:
            transport = np.asarray(transport, dtype=complex)
            if frobenius(transport - np.eye(transport.shape[0])) == 0:
                transport = None
        self.transport = transport
        self.name = name
        self._check_closure()

    def _check_closure(self):
        poset = self.presheaf.poset
        for smaller, larger in poset.edges():
            if smaller in self.domain and larger in self.domain:
                image = self.presheaf.restrict(larger, smaller, self.components[larger])
                if not image <= self.components[smaller]:
                    raise NotClopen(
                        f"Restriction {larger} → {smaller} sort du sous-objet: "
                        f"{sorted(image)} ⊄ {sorted(self.components[smaller])}"
                    )

    @property
    def key(self) -> tuple:
        return tuple((cid, tuple(sorted(self.components[cid]))) for cid in sorted(self.domain))

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return "{" + ", ".join(f"{cid}:{list(idx)}" for cid, idx in self.key) + "}"

    def component(self, context_id: str) -> frozenset:
        return self.components[context_id]

    def same_transport(self, other: "ClopenSubobject", tol: float) -> bool:
        if self.transport is None and other.transport is None:
            return True
        dim = self.presheaf.poset.dim
        mine = self.transport if self.transport is not None else np.eye(dim)
        theirs = other.transport if other.transport is not None else np.eye(dim)
        return frobenius(mine - theirs) <= tol

    def projection_at(self, context_id: str) -> np.ndarray:
        """Projecteur P_{S_W} = U(Σ_{i∈S_W} Q_i)U*"""
        context = self.presheaf.poset.context(context_id)
        projection = context.projection_of(self.components[context_id])
        if self.transport is None:
            return projection
        return self.transport @ projection @ dagger(self.transport)

    def is_empty(self) -> bool:
        return all(len(c) == 0 for c in self.components.values())

    def renamed(self, name: Optional[str]) -> "ClopenSubobject":
        return ClopenSubobject(self.presheaf, self.components, self.domain, self.transport, name)

    def to_dict(self) -> dict:
        """Convertit en dictionnaire"""
        return {
            'name': self.label,
            'domain': sorted(self.domain),
            'components': {cid: list(idx) for cid, idx in self.key},
            'transported': self.transport is not None,
        }

    def __repr__(self):
        return f'<ClopenSubobject {self.label}>'
