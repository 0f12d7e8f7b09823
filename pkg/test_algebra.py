#!/usr/bin/env python3
"""
Tests des contextes et du poset V(N)
"""

import sys
import os
sys.path.insert(0, os.path.dirname(__file__))

import numpy as np
import pytest

from src.models.context import Context
from src.services.algebra import (
    PosetOptions,
    bell_number,
    bicommutant_check,
    build_poset,
    coefficients,
    commutant,
    context_from_operators,
    includes,
    meet_context,
    projection_lattice,
)
from src.services.exceptions import NonCommuting, NotInAlgebra, PosetTooLarge, TrivialAlgebra, ValidationError
from src.services.numerics import Projection
from src.services.reference_models import (
    cyclic_group,
    diagonal_context,
    diagonal_poset,
    example_context,
    example_flow,
    example_poset,
    p12,
)


def test_context_from_operators():
    """Contexte engendré par P₁₂ et contrôles d'entrée"""
    print("🧪 Test context_from_operators...")
    context = context_from_operators([p12().matrix], label='example')
    assert context.id == 'example'
    assert context.k == 2
    assert sorted(context.ranks) == [1, 2]
    assert context.equals(example_context())

    # H = diag(0,1,2) engendre le contexte diagonal
    diagonal = context_from_operators([np.diag([0.0, 1.0, 2.0])])
    assert diagonal.equals(diagonal_context(3))

    with pytest.raises(NonCommuting):
        context_from_operators([p12().matrix, np.diag([1.0, 0, 0])])
    with pytest.raises(TrivialAlgebra):
        context_from_operators([2 * np.eye(3)])
    with pytest.raises(ValidationError):
        context_from_operators([])
    print(f"✅ Contexte {context}")


def test_context_validation():
    """Blocs orthogonaux de somme I, au moins deux blocs"""
    print("🧪 Test validation des contextes...")
    e1 = np.diag([1.0, 0, 0])
    with pytest.raises(TrivialAlgebra):
        Context([np.eye(3)])
    with pytest.raises(ValidationError):
        Context([e1, np.diag([1.0, 1.0, 0])])
    with pytest.raises(ValidationError):
        Context([e1, np.diag([0, 1.0, 0])])
    # l'ordre de saisie ne change pas l'empreinte
    first = Context([e1, np.diag([0, 1.0, 1.0])])
    second = Context([np.diag([0, 1.0, 1.0]), e1])
    assert first.fingerprint == second.fingerprint
    print("✅ Contextes validés")


def test_lattice_and_coefficients():
    """Treillis P(V) et coordonnées dans la base des blocs"""
    lattice = projection_lattice(example_context())
    assert len(lattice) == 4
    assert lattice[0].is_zero() and lattice[-1].is_identity()

    context = example_context()
    values = coefficients(context, 3 * p12().matrix + np.eye(3))
    assert sorted(np.round(values.real, 10)) == [1.0, 4.0]
    with pytest.raises(NotInAlgebra):
        coefficients(context, np.diag([1.0, 0, 0]))
    print("✅ Treillis et coefficients")


def test_commutant_dimension():
    """Commutant du contexte de l'exemple: 1 + 4 = 5"""
    print("🧪 Test commutant...")
    context = example_context()
    basis = commutant([b.matrix for b in context.blocks], 3)
    assert len(basis) == 5
    assert bicommutant_check(context)
    assert bicommutant_check(diagonal_context(4))
    print(f"📊 dim V′ = {len(basis)}")


def test_downward_closure_sizes():
    """Sous-contextes du contexte diagonal: B(n) − 1"""
    print("🧪 Test fermeture vers le bas...")
    assert bell_number(3) == 5 and bell_number(4) == 15
    poset3 = diagonal_poset(3)
    poset4 = diagonal_poset(4)
    assert len(poset3) == 4
    assert len(poset4) == 14
    assert len(poset3.hasse_edges()) == 3
    assert poset3.maximal() == ['diag']
    for smaller, larger in poset3.edges():
        assert includes(poset3.context(smaller), poset3.context(larger))
    print(f"✅ ℂ³: {len(poset3)} contextes, ℂ⁴: {len(poset4)} contextes")


def test_meet_context():
    """Intersection de deux contextes"""
    e3 = Projection(np.diag([0, 0, 1.0]))
    coarse = Context([Projection(np.diag([1.0, 1.0, 0])), e3])
    meet = meet_context(diagonal_context(3), coarse)
    assert meet is not None and meet.equals(coarse)
    assert meet_context(diagonal_context(3), example_context()) is None


def test_group_closure():
    """Fermeture du contexte de l'exemple par la grille {0, π/2, π, 3π/2, 2π}"""
    print("🧪 Test fermeture par le groupe...")
    group = cyclic_group(example_flow())
    poset = example_poset(group)
    assert len(poset) == 4
    assert poset.closure_flags['group']
    assert poset.closure_flags['group_fixpoint']
    assert 'example' in poset
    print(f"✅ Orbite du contexte: {len(poset)} contextes")


def test_poset_size_limit():
    with pytest.raises(PosetTooLarge):
        build_poset([diagonal_context(4)], PosetOptions(downward_closure=True, max_contexts=5))


def test_lower_sets_exhaustive():
    """Ensembles inférieurs: énumération complète, refus au-delà du plafond"""
    print("🧪 Test ensembles inférieurs...")
    poset3 = diagonal_poset(3)
    lower = poset3.lower_sets()
    # ∅, trois singletons, trois paires, le triplet, puis tout le poset
    assert len(lower) == 9
    assert all(poset3.is_lower_set(s) for s in lower)
    assert frozenset(poset3.ids) in lower
    assert set(poset3.principal_lower_sets().values()) <= set(lower)
    with pytest.raises(PosetTooLarge):
        poset3.lower_sets(cap=5)

    poset5 = diagonal_poset(5)
    assert len(poset5) == 51
    with pytest.raises(PosetTooLarge):
        poset5.lower_sets(cap=4096)
    print(f"✅ {len(lower)} ouverts d'Alexandroff sur ℂ³")


def run_algebra_tests():
    """Exécute tous les tests d'algèbre"""
    print("🚀 Début des tests contextes et posets...\n")

    tests = [
        test_context_from_operators,
        test_context_validation,
        test_lattice_and_coefficients,
        test_commutant_dimension,
        test_downward_closure_sizes,
        test_meet_context,
        test_group_closure,
        test_poset_size_limit,
        test_lower_sets_exhaustive,
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
    success = run_algebra_tests()
    sys.exit(0 if success else 1)
