#!/usr/bin/env python3
"""
Tests de la mesure μ^ρ, de ses propriétés et de la reconstruction d'état
"""

import sys
import os
sys.path.insert(0, os.path.dirname(__file__))

import numpy as np
import pytest

from src.models.group import SampledGroup
from src.models.state import AbstractMeasure, State, density_distance
from src.services.exceptions import InconsistentTable, ValidationError
from src.services.measure import (
    group_action_check,
    measure_of,
    measure_section,
    measure_table,
    state_from_measure,
    verify_measure_properties,
)
from src.services.numerics import Projection, random_density, random_unitary
from src.services.presheaf import build_presheaf, daseinisation_subobject, transported_family
from src.services.reference_models import (
    EXAMPLE_LABEL,
    basis_projection,
    c3_subobjects,
    diagonal_poset,
    example_flow,
    example_poset,
    example_state,
    group_action_state,
    p12,
    spanning_poset,
)


def test_c3_measures():
    """μ(S₁) = ½(a₁+a₂), μ(S₂) = ½(a₁+a₂)+a₃, μ(S₁₂) = 1"""
    print("🧪 Test mesures de l'exemple C³...")
    state = example_state((0.5, 0.3, 0.2))
    presheaf = build_presheaf(example_poset())
    named = c3_subobjects(presheaf)
    assert abs(measure_of(state, named['S1'], EXAMPLE_LABEL) - 0.4) < 1e-12
    assert abs(measure_of(state, named['S2'], EXAMPLE_LABEL) - 0.6) < 1e-12
    assert abs(measure_of(state, named['S12'], EXAMPLE_LABEL) - 1.0) < 1e-12
    section = measure_section(state, named['S1'])
    assert section[EXAMPLE_LABEL] == pytest.approx(0.4)
    print("✅ μS₁ = 0.4, μS₂ = 0.6")


def test_measure_properties():
    """Propriétés (i)–(vi) et milieu exclu strict sur le poset diagonal fermé"""
    print("🧪 Test propriétés de la mesure...")
    state = State(np.diag([0.5, 0.3, 0.2]))
    presheaf = build_presheaf(diagonal_poset(3))
    S = daseinisation_subobject(basis_projection(3, 0), presheaf, name='δ(e1)')
    T = daseinisation_subobject(basis_projection(3, 1), presheaf, name='δ(e2)')
    entries = verify_measure_properties(state, presheaf, [(S, T)])
    failures = [e for e in entries if e.failed]
    assert not failures, failures
    checks = {e.check for e in entries}
    assert {'measure.i_empty', 'measure.ii_total', 'measure.iv_modularity', 'measure.v_excluded_middle'} <= checks

    strict = [e for e in entries if e.check == 'measure.v_strict' and e.location == 'δ(e1)@diag']
    assert len(strict) == 1
    assert abs(strict[0].lhs - 0.5) < 1e-12
    print(f"📊 μ(S∨¬S)(V_diag) = {strict[0].lhs}")


def _supported_projection(rng, dim):
    """Projecteur de rang aléatoire porté par une partie aléatoire de la base"""
    support = rng.choice(dim, size=int(rng.integers(1, dim + 1)), replace=False)
    rank = int(rng.integers(1, len(support) + 1))
    local = random_unitary(rng, len(support))[:, :rank]
    basis = np.zeros((dim, rank), dtype=complex)
    basis[np.sort(support), :] = local
    return Projection(basis @ basis.conj().T)


def test_measure_properties_seeded():
    """50 couples (δP, δQ) sur les 14 contextes du poset diagonal de ℂ⁴"""
    print("🧪 Test propriétés de la mesure (couples aléatoires)...")
    rng = np.random.default_rng(77)
    presheaf = build_presheaf(diagonal_poset(4))
    assert len(presheaf.poset) >= 10
    state = State(random_density(rng, 4))
    pairs = []
    for index in range(50):
        first = daseinisation_subobject(_supported_projection(rng, 4), presheaf, name=f'P{index}')
        second = daseinisation_subobject(_supported_projection(rng, 4), presheaf, name=f'Q{index}')
        pairs.append((first, second))
    entries = verify_measure_properties(state, presheaf, pairs)
    checked = [e for e in entries if e.check != 'measure.v_strict']
    assert not any(e.failed for e in checked), [e for e in checked if e.failed]
    worst = max(e.residual for e in checked if e.residual is not None)
    assert worst <= 1e-10
    assert sum(1 for e in entries if e.check == 'measure.iv_modularity') == 50

    strict = [e for e in entries if e.check == 'measure.v_strict']
    assert any(e.lhs < 1 - 1e-3 for e in strict)
    print(f"✅ résidu max {worst:.2e}, {len(strict)} cas stricts de μ(S∨¬S) < 1")


def test_finite_additivity_uses_joined_subobject():
    """(vi): μ du sous-objet joint δ(e1)∨δ(e2)∨δ(e3) contre la somme des μ"""
    state = State(np.diag([0.5, 0.3, 0.2]))
    presheaf = build_presheaf(diagonal_poset(3))
    components = [daseinisation_subobject(basis_projection(3, i), presheaf, name=f'δ(e{i + 1})') for i in range(3)]
    pairs = [(components[0], components[1]), (components[1], components[2])]
    entries = verify_measure_properties(state, presheaf, pairs)
    at_diag = [e for e in entries if e.check == 'measure.vi_finite_additivity' and e.location == 'diag']
    assert len(at_diag) == 1
    assert at_diag[0].lhs == pytest.approx(1.0)
    assert at_diag[0].rhs == pytest.approx(1.0)
    assert at_diag[0].detail == "3 composantes disjointes"

    disjoint = [e for e in entries if e.check == 'measure.iii_disjoint']
    assert len(disjoint) == 2 and not any(e.failed for e in disjoint)


def test_group_action_residual():
    """État non invariant: résidu |sin t| au contexte de l'exemple"""
    print("🧪 Test action du groupe...")
    flow = example_flow()
    group = SampledGroup(flow, [0.0, 1.0, -1.0])
    presheaf = build_presheaf(example_poset(group, group_depth=1))
    family = transported_family(p12(), EXAMPLE_LABEL, flow, group.samples, presheaf, name='S1')
    result = group_action_check(group_action_state(), flow, 1.0, family)
    assert abs(result['residual'] - np.sin(1.0)) < 1e-9
    assert result['worst_context'] == EXAMPLE_LABEL
    assert result['lemma_residual'] is not None and result['lemma_residual'] < 1e-9

    invariant = group_action_check(example_state(), flow, 1.0, family)
    assert invariant['residual'] < 1e-12
    print(f"✅ Résidu {result['residual']:.6f} ≈ sin 1")


def test_reconstruction_unique():
    """Un poset couvrant détermine l'état de façon unique"""
    print("🧪 Test reconstruction d'état...")
    rng = np.random.default_rng(5)
    state = State(random_density(rng, 3))
    presheaf = build_presheaf(spanning_poset(3, seed=2))
    reconstructed, diagnostics = state_from_measure(measure_table(state, presheaf))
    assert diagnostics['unique']
    assert diagnostics['spanned_dimension'] == 9
    assert density_distance(state, reconstructed) < 1e-8
    print(f"✅ Distance {density_distance(state, reconstructed):.2e}")


def test_reconstruction_underdetermined():
    """Le seul poset diagonal ne fixe que la diagonale"""
    state = example_state()
    presheaf = build_presheaf(diagonal_poset(3))
    reconstructed, diagnostics = state_from_measure(measure_table(state, presheaf))
    assert not diagnostics['unique']
    assert diagnostics['status'] == 'underdetermined'
    assert np.allclose(np.real(np.diag(reconstructed.density)), [0.5, 0.3, 0.2])


def test_reconstruction_inconsistent_table():
    """Deux valeurs différentes pour le même projecteur"""
    presheaf = build_presheaf(diagonal_poset(3))
    table = measure_table(example_state(), presheaf)
    values = dict(table.table)
    full = next(key for key in sorted(values) if key[1] == 'diag' and key[0] == 'δ[diag:0,1,2]')
    values[full] = 0.7
    with pytest.raises(InconsistentTable):
        state_from_measure(AbstractMeasure(presheaf, table.subobjects, values))
    with pytest.raises(ValidationError):
        AbstractMeasure(presheaf, table.subobjects, {full: 1.5})


def run_measure_tests():
    """Exécute tous les tests de mesure"""
    print("🚀 Début des tests de mesure...\n")

    tests = [
        test_c3_measures,
        test_measure_properties,
        test_measure_properties_seeded,
        test_finite_additivity_uses_joined_subobject,
        test_group_action_residual,
        test_reconstruction_unique,
        test_reconstruction_underdetermined,
        test_reconstruction_inconsistent_table,
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
    success = run_measure_tests()
    sys.exit(0 if success else 1)
