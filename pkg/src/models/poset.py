"""
Modèle du poset de contextes V(N)
Ordre d'inclusion de sous-algèbres, diagramme de Hasse et ensembles inférieurs
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional

import networkx as nx

from src.models.context import Context
from src.services.exceptions import PosetTooLarge
from src.services.numerics import DEFAULT_TOLERANCES, TolerancePolicy

LOWER_SET_CAP = 1_000_000


class ContextPoset:
    """
    Poset fini de contextes ordonné par inclusion

    Le graphe `order` contient une arête V′ → V pour chaque inclusion stricte V′ ⊂ V,
    `hasse` en est la réduction transitive.
    """

    def __init__(
        self,
        contexts: Iterable[Context],
        inclusions: Iterable[tuple],
        closure_flags: Optional[dict] = None,
        tol: TolerancePolicy = DEFAULT_TOLERANCES,
    ):
        self._contexts: Dict[str, Context] = {}
        for context in contexts:
            self._contexts[context.id] = context
        self.tol = tol
        self.closure_flags = dict(closure_flags or {})

        self.order = nx.DiGraph()
        self.order.add_nodes_from(sorted(self._contexts))
        self.order.add_edges_from(inclusions)
        self.hasse = nx.transitive_reduction(self.order)
        self.hasse.add_nodes_from(self.order.nodes)

    @property
    def ids(self) -> List[str]:
        return sorted(self._contexts)

    @property
    def contexts(self) -> List[Context]:
        return [self._contexts[i] for i in self.ids]

    @property
    def dim(self) -> int:
        return next(iter(self._contexts.values())).dim

    def __len__(self):
        return len(self._contexts)

    def __iter__(self):
        return iter(self.contexts)

    def __contains__(self, context_id: str) -> bool:
        return context_id in self._contexts

    def context(self, context_id: str) -> Context:
        return self._contexts[context_id]

    def find(self, context: Context) -> Optional[str]:
        """Identifiant du contexte égal (à eps_order près), None si absent"""
        if context.id in self._contexts and self._contexts[context.id].equals(context, self.tol):
            return context.id
        for candidate in self.contexts:
            if candidate.signature() == context.signature() and candidate.equals(context, self.tol):
                return candidate.id
        return None

    def leq(self, smaller: str, larger: str) -> bool:
        """V′ ⊆ V"""
        return smaller == larger or self.order.has_edge(smaller, larger)

    def down_set(self, context_id: str) -> List[str]:
        """↓V, V compris"""
        return sorted([context_id] + list(self.order.predecessors(context_id)))

    def up_set(self, context_id: str) -> List[str]:
        return sorted([context_id] + list(self.order.successors(context_id)))

    def edges(self) -> List[tuple]:
        """Toutes les inclusions strictes (V′, V)"""
        return sorted(self.order.edges)

    def hasse_edges(self) -> List[tuple]:
        return sorted(self.hasse.edges)

    def maximal(self) -> List[str]:
        return sorted(n for n in self.order.nodes if self.order.out_degree(n) == 0)

    def minimal(self) -> List[str]:
        return sorted(n for n in self.order.nodes if self.order.in_degree(n) == 0)

    def is_lower_set(self, members: Iterable[str]) -> bool:
        members = set(members)
        return all(set(self.order.predecessors(m)) <= members for m in members)

    def lower_set_of(self, members: Iterable[str]) -> frozenset:
        closure = set()
        for member in members:
            closure.update(self.down_set(member))
        return frozenset(closure)

    def principal_lower_sets(self) -> Dict[str, frozenset]:
        """↓V pour chaque V: base de la topologie d'Alexandroff"""
        return {cid: frozenset(self.down_set(cid)) for cid in self.ids}

    def lower_sets(self, cap: int = LOWER_SET_CAP) -> List[frozenset]:
        """
        Tous les ensembles inférieurs (ouverts de la topologie d'Alexandroff)

        Chaque ensemble inférieur est engendré par l'antichaîne de ses éléments maximaux,
        l'énumération est donc exhaustive. Au-delà de `cap` ensembles: PosetTooLarge.
        """
        results = set()
        for antichain in nx.antichains(self.order):
            if len(results) >= cap:
                raise PosetTooLarge(f"Plus de {cap} ensembles inférieurs sur {len(self)} contextes")
            results.add(self.lower_set_of(antichain))
        return sorted(results, key=lambda s: (len(s), sorted(s)))

    def restricted_to(self, members: Iterable[str]) -> "ContextPoset":
        """Sous-poset induit sur une partie (typiquement ↓V)"""
        members = set(members)
        return ContextPoset(
            [self._contexts[m] for m in members],
            [(a, b) for a, b in self.order.edges if a in members and b in members],
            closure_flags=self.closure_flags,
            tol=self.tol,
        )

    def to_dict(self) -> dict:
        """Convertit en dictionnaire"""
        return {
            'contexts': [
                {'id': c.id, 'k': c.k, 'ranks': list(c.ranks)} for c in self.contexts
            ],
            'hasse_edges': [list(edge) for edge in self.hasse_edges()],
            'closure_flags': self.closure_flags,
        }

    def __repr__(self):
        return f'<ContextPoset {len(self)} contextes, {self.hasse.number_of_edges()} arêtes de Hasse>'
