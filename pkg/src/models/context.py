"""
Modèle des contextes (sous-algèbres abéliennes de M_n(ℂ))
Un contexte est une partition de l'identité en projecteurs minimaux
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from src.services.exceptions import DimMismatch, TrivialAlgebra, ValidationError
from src.services.numerics import (
    DEFAULT_TOLERANCES,
    Projection,
    TolerancePolicy,
    frobenius,
)

FINGERPRINT_DECIMALS = 6


def _canonical_key(projection: Projection) -> tuple:
    entries = np.round(projection.matrix.ravel(), FINGERPRINT_DECIMALS) + 0.0
    return tuple((-float(x.real), -float(x.imag)) for x in entries)


def _fingerprint(blocks: Sequence[Projection]) -> str:
    digest = hashlib.sha256()
    for block in blocks:
        digest.update(f"{block.rank}|".encode())
        rounded = np.round(block.matrix.ravel(), FINGERPRINT_DECIMALS) + 0.0
        digest.update(np.ascontiguousarray(rounded.view(float)).tobytes())
    return digest.hexdigest()


class Context:
    """
    Contexte V: k projecteurs minimaux Q_1..Q_k deux à deux orthogonaux de somme I

    Les blocs sont rangés dans un ordre canonique (entrées arrondies), ce qui
    rend l'identifiant et l'empreinte indépendants de l'ordre de saisie.
    """

    def __init__(
        self,
        blocks: Iterable,
        label: Optional[str] = None,
        tol: TolerancePolicy = DEFAULT_TOLERANCES,
    ):
        projections = [b if isinstance(b, Projection) else Projection(b, tol) for b in blocks]
        projections = [p for p in projections if p.rank > 0 or not p.is_zero(tol)]
        if len(projections) < 2:
            raise TrivialAlgebra("Un contexte doit contenir au moins deux blocs (ℂ·I est exclu)")

        dims = {p.dim for p in projections}
        if len(dims) != 1:
            raise DimMismatch(f"Blocs de dimensions différentes: {sorted(dims)}")
        dim = dims.pop()

        for i, first in enumerate(projections):
            for second in projections[i + 1:]:
                overlap = frobenius(first.matrix @ second.matrix)
                if overlap > tol.eps_order:
                    raise ValidationError(f"Blocs non orthogonaux (‖Q_iQ_j‖ = {overlap:.3e})")

        total = sum(p.matrix for p in projections)
        residual = frobenius(total - np.eye(dim))
        if residual > tol.eps_idem:
            raise ValidationError(f"Les blocs ne forment pas une partition de I (‖ΣQ−I‖ = {residual:.3e})")

        self.blocks: tuple = tuple(sorted(projections, key=_canonical_key))
        self.dim = dim
        self.fingerprint = _fingerprint(self.blocks)
        self.label = label
        self.id = label if label else f"ctx-{self.fingerprint[:8]}"

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def ranks(self) -> tuple:
        return tuple(block.rank for block in self.blocks)

    def signature(self) -> tuple:
        """Préfiltre d'égalité: (k, rangs triés)"""
        return self.k, tuple(sorted(self.ranks))

    def relabel(self, label: Optional[str]) -> "Context":
        clone = object.__new__(Context)
        clone.blocks = self.blocks
        clone.dim = self.dim
        clone.fingerprint = self.fingerprint
        clone.label = label
        clone.id = label if label else f"ctx-{self.fingerprint[:8]}"
        return clone

    def block_matching(self, other: "Context", tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Optional[List[int]]:
        """
        Associe chaque bloc de self au bloc le plus proche de other

        Returns:
            list | None: matching[i] = indice du bloc de other égal à Q_i, None si les contextes diffèrent
        """
        if self.dim != other.dim or self.signature() != other.signature():
            return None
        available = set(range(other.k))
        matching = []
        for block in self.blocks:
            best, best_distance = None, None
            for j in available:
                distance = frobenius(block.matrix - other.blocks[j].matrix)
                if best_distance is None or distance < best_distance:
                    best, best_distance = j, distance
            if best is None or best_distance > tol.eps_order:
                return None
            matching.append(best)
            available.discard(best)
        return matching

    def equals(self, other: "Context", tol: TolerancePolicy = DEFAULT_TOLERANCES) -> bool:
        return self.block_matching(other, tol) is not None

    def index_set_of(self, projection: Projection, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> Optional[frozenset]:
        """Ensemble d'indices {i} tel que P = Σ Q_i, None si P n'est pas dans P(V)"""
        if projection.dim != self.dim:
            raise DimMismatch(f"Dimensions incompatibles: {projection.dim} et {self.dim}")
        indices = set()
        for i, block in enumerate(self.blocks):
            weight = float(np.trace(block.matrix @ projection.matrix).real) / block.rank
            if weight > 0.5:
                indices.add(i)
        candidate = sum((self.blocks[i].matrix for i in indices), np.zeros((self.dim, self.dim), dtype=complex))
        if frobenius(candidate - projection.matrix) > tol.eps_order:
            return None
        return frozenset(indices)

    def projection_of(self, indices: Iterable[int]) -> np.ndarray:
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for i in indices:
            total = total + self.blocks[i].matrix
        return total

    def characters(self) -> List["Character"]:
        return [Character(self.id, i) for i in range(self.k)]

    def to_dict(self) -> dict:
        """Convertit en dictionnaire"""
        return {
            'id': self.id,
            'dim': self.dim,
            'k': self.k,
            'ranks': list(self.ranks),
            'fingerprint': self.fingerprint,
            'blocks': [block.to_dict()['matrix'] for block in self.blocks],
        }

    def __repr__(self):
        return f'<Context {self.id} k={self.k} ranks={list(self.ranks)}>'


@dataclass(frozen=True)
class Character:
    """Caractère λ_i du contexte: λ(Q_j) = δ_ij"""

    context_id: str
    index: int

    def evaluate_block(self, j: int) -> int:
        return 1 if j == self.index else 0

    def to_dict(self) -> dict:
        return {'context': self.context_id, 'index': self.index}

    def __repr__(self):
        return f'<Character λ{self.index + 1}@{self.context_id}>'
