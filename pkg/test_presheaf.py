#!/usr/bin/env python3
"""
Tests du préfaisceau spectral, des sous-objets clopen et de la daseinisation
"""

import sys
import os
sys.path.insert(0, os.path.dirname(__file__))

import numpy as np
import pytest

from src.services.exceptions import NotClopen, NotInLattice
from src.services.numerics import Projection, random_projection, random_unitary
from src.services.presheaf import (
    S_inverse,
    S_map,
    build_presheaf,
    check_functoriality,
    daseinisation_subobject,
    enumerate_subobjects,
    heyting_negation,
    image_context_id,
    outer_daseinisation,
    outer_daseinisation_bruteforce,
    outer_indices,
    pullback,
    pushforward,
    restriction_map,
    subobject_join,
    subobject_meet,
    transported_family,
)
from src.models.subobject import ClopenSubobject
from src.services.reference_models import (
    basis_projection,
    cyclic_group,
    diagonal_context,
    diagonal_poset,
    example_context,
    example_flow,
    example_poset,
    p12,
)


def test_restriction_and_functoriality():
    """Tables de restriction et composition sur ↓V"""
    print("🧪 Test préfaisceau spectral...")
    poset = diagonal_poset(4)
    presheaf = build_presheaf(poset)
    assert check_functoriality(presheaf) == []
    for smaller, larger in poset.edges():
        table = presheaf.table(smaller, larger)
        assert len(table) == poset.context(larger).k
        assert set(table) == set(range(poset.context(smaller).k))

    coarse = build_presheaf(diagonal_poset(3)).poset
    for cid in coarse.ids:
        if cid != 'diag':
            table = restriction_map(coarse.context('diag'), coarse.context(cid))
            assert len(table) == 3
    print(f"✅ {len(poset.edges())} tables de restriction cohérentes")


def test_S_map_roundtrip_on_lattice():
    """𝔖 et 𝔖⁻¹ sont inverses sur P(V)"""
    context = diagonal_context(3)
    e1 = basis_projection(3, 0)
    indices = S_map(e1, context)
    assert len(indices) == 1
    assert S_inverse(indices, context).equals(e1)
    with pytest.raises(NotInLattice):
        S_map(p12(), context)


def test_outer_daseinisation():
    """δ°(P)_V: plus petit projecteur de V au-dessus de P"""
    print("🧪 Test daseinisation extérieure...")
    example = example_context()
    e1 = basis_projection(3, 0)
    assert outer_daseinisation(e1, example).is_identity()
    assert outer_daseinisation(p12(), example).equals(p12())
    assert outer_daseinisation(p12(), diagonal_context(3)).equals(Projection(np.diag([1.0, 1.0, 0])))
    print("✅ δ°(e1)_example = I")


def _seeded_projection(rng, dim):
    """Projecteur aléatoire, générique ou porté par quelques vecteurs de base"""
    if rng.random() < 0.5:
        return random_projection(rng, dim, int(rng.integers(1, dim)))
    support = np.sort(rng.choice(dim, size=int(rng.integers(1, dim + 1)), replace=False))
    rank = int(rng.integers(1, len(support) + 1))
    local = random_unitary(rng, len(support))[:, :rank]
    basis = np.zeros((dim, rank), dtype=complex)
    basis[support, :] = local
    return Projection(basis @ basis.conj().T)


def test_daseinisation_matches_bruteforce():
    """δ° rapide = minimum exhaustif du treillis, 200 projecteurs sur tous les contextes de ℂ⁴"""
    print("🧪 Test δ° contre l'énumération exhaustive...")
    poset = diagonal_poset(4)
    assert len(poset) == 14
    rng = np.random.default_rng(2024)
    nontrivial = 0
    for _ in range(200):
        projection = _seeded_projection(rng, 4)
        for context in poset.contexts:
            fast = outer_daseinisation(projection, context)
            slow = outer_daseinisation_bruteforce(projection, context)
            assert outer_indices(projection, context) == S_map(slow, context), context.id
            assert fast.equals(slow)
            if not fast.is_identity():
                nontrivial += 1
    assert nontrivial > 0
    print(f"✅ 200 × {len(poset)} cas, {nontrivial} δ° différents de I")


def test_subobject_closure():
    """Une famille non stable par restriction est refusée"""
    presheaf = build_presheaf(diagonal_poset(3))
    with pytest.raises(NotClopen):
        ClopenSubobject(presheaf, {'diag': {0}}, domain=presheaf.poset.ids)
    dasein = daseinisation_subobject(basis_projection(3, 0), presheaf, name='δ(e1)')
    assert dasein.components['diag'] == frozenset(S_map(basis_projection(3, 0), presheaf.poset.context('diag')))


def test_heyting_algebra():
    """∧, ∨ et négation de Heyting sur le poset diagonal fermé"""
    print("🧪 Test algèbre de Heyting...")
    presheaf = build_presheaf(diagonal_poset(3))
    S = daseinisation_subobject(basis_projection(3, 0), presheaf, name='S')
    T = daseinisation_subobject(basis_projection(3, 1), presheaf, name='T')
    meet = subobject_meet(S, T)
    join = subobject_join(S, T)
    for cid in presheaf.poset.ids:
        assert meet.components[cid] <= S.components[cid]
        assert join.components[cid] >= S.components[cid] | T.components[cid]

    negation = heyting_negation(S)
    assert negation.components['diag'] == frozenset()
    assert subobject_meet(S, negation).is_empty()
    print("✅ ¬δ(e1) vide au contexte diagonal")


def test_enumeration():
    """Sous-objets sur un contexte isolé: les 2^k parties"""
    presheaf = build_presheaf(example_poset())
    subobjects = enumerate_subobjects(presheaf)
    assert len(subobjects) == 4

    closed = build_presheaf(diagonal_poset(3))
    counted = enumerate_subobjects(closed, closed.poset.down_set('diag'))
    assert all(isinstance(s, ClopenSubobject) for s in counted)
    assert len({s.key for s in counted}) == len(counted)
    print(f"📊 {len(counted)} sous-objets sur ↓diag")


def test_transport_along_flow():
    """Famille transportée, image réciproque et image directe"""
    print("🧪 Test transport le long du flot...")
    group = cyclic_group(example_flow())
    presheaf = build_presheaf(example_poset(group))
    family = transported_family(p12(), 'example', group.flow, group.samples, presheaf, name='S1')
    assert family.domain == frozenset(presheaf.poset.ids)
    assert family.components['example'] == S_map(p12(), presheaf.poset.context('example'))

    poset = presheaf.poset
    unitary = group.flow.unitary(np.pi / 2)
    pulled = pullback(unitary, family)
    for cid in pulled.domain:
        target = image_context_id(unitary, cid, poset)
        assert np.linalg.norm(pulled.projection_at(cid) - family.projection_at(target)) < 1e-10

    pushed = pushforward(unitary, family)
    assert len(pushed.domain) == len(family.domain)
    for cid in family.domain:
        target = image_context_id(unitary, cid, poset)
        expected = unitary @ family.projection_at(cid) @ unitary.conj().T
        assert np.linalg.norm(pushed.projection_at(target) - expected) < 1e-10
    print("✅ Transport cohérent")


def run_presheaf_tests():
    """Exécute tous les tests du préfaisceau"""
    print("🚀 Début des tests préfaisceau et sous-objets...\n")

    tests = [
        test_restriction_and_functoriality,
        test_S_map_roundtrip_on_lattice,
        test_outer_daseinisation,
        test_daseinisation_matches_bruteforce,
        test_subobject_closure,
        test_heyting_algebra,
        test_enumeration,
        test_transport_along_flow,
    ]

    passed = 0
    for test in tests:
        try:
            test()
            passed += 1
        except Exception as e:
            print(f"❌ Erreur {test.__name__}: {e}")

    print(f"\n📊 Résultats: {passed}/{len(tests)} tests réussis")
    return passed == len(tests)


if __name__ == '__main__':
    success = run_presheaf_tests()
    sys.exit(0 if success else 1)
