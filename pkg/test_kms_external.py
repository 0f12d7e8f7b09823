#!/usr/bin/env python3
"""
Tests des conditions KMS externes
C1/C2, objets de vérité, μ-équivalences et valeurs moyennes
"""

import sys
import os
sys.path.insert(0, os.path.dirname(__file__))

import numpy as np
import pytest

from src.models.group import SampledGroup
from src.models.truth import StageVR
from src.services.exceptions import NotFaithful, PosetNotClosed, ValidationError
from src.services.kms_external import (
    check_C1,
    check_C2,
    check_expectation_kms,
    check_truth_value_invariance,
    expectation_value,
    gibbs_state,
    hamiltonian_from_state,
    members_at,
    mu_equivalent,
    pullback_truth_object,
    spectral_pairs,
    strip_function,
    strip_function_closed_form,
    strong_mu_equivalence,
    transport_mapping,
    truth_object,
    truth_value,
)
from src.services.presheaf import build_presheaf
from src.services.reference_models import (
    EXAMPLE_HAMILTONIAN,
    EXAMPLE_LABEL,
    c3_memberships,
    c3_subobjects,
    example_flow,
    example_poset,
    example_state,
    negative_control_state,
    p12,
)

T_GRID = [-2.0, -1.0, 0.5, 1.0, 2.0]


def _closed_example():
    flow = example_flow()
    group = SampledGroup(flow, [0.0, -0.5] + T_GRID)
    presheaf = build_presheaf(example_poset(group, group_depth=1))
    return flow, group, presheaf


def test_gibbs_passes_C1_and_C2():
    """État de Gibbs sur le poset fermé par la grille"""
    print("🧪 Test C1/C2 pour l'état de Gibbs...")
    flow, group, presheaf = _closed_example()
    state = gibbs_state(EXAMPLE_HAMILTONIAN, 1.0)
    named = c3_subobjects(presheaf, group)
    entries = check_C1(state, flow, list(named.values()), T_GRID)
    assert entries and not any(e.failed for e in entries)
    worst = max(e.residual for e in entries if e.residual is not None)
    assert worst <= 1e-9

    for first, second in [('S1', 'S2'), ('S1', 'S12'), ('S2', 'S1')]:
        c2 = check_C2(state, flow, named[first], named[second], t_grid=T_GRID)
        assert not any(e.failed for e in c2), [e for e in c2 if e.failed]
        assert any(e.check == 'kms.C2_analytic' for e in c2)
    print(f"✅ C1 résidu max {worst:.2e}")


def test_negative_control_fails_C1():
    """État pur (|1⟩+|2⟩)/√2: résidu (1 − cos t)/2"""
    print("🧪 Test contrôle négatif...")
    flow, group, presheaf = _closed_example()
    state = negative_control_state()
    S1 = c3_subobjects(presheaf, group)['S1']
    entries = check_C1(state, flow, [S1], [1.0])
    at_example = [e for e in entries if e.location == f"S1@{EXAMPLE_LABEL}"]
    assert len(at_example) == 1
    assert at_example[0].failed
    assert abs(at_example[0].residual - (1 - np.cos(1.0)) / 2) < 1e-9
    with pytest.raises(NotFaithful):
        check_C2(state, flow, S1, S1, t_grid=[1.0])
    print(f"❌ attendu: résidu {at_example[0].residual:.4f}")


def test_C1_requires_anchor():
    """Sans image du contexte par le flot, aucun contexte ancre"""
    flow = example_flow()
    presheaf = build_presheaf(example_poset())
    S1 = c3_subobjects(presheaf)['S1']
    with pytest.raises(PosetNotClosed):
        check_C1(example_state(), flow, [S1], [1.0])


def test_strip_closed_form():
    """F(z) par produit matriciel et par la forme fermée"""
    flow = example_flow()
    state = gibbs_state(EXAMPLE_HAMILTONIAN, 1.0)
    p_s = p12().matrix
    p_t = np.eye(3) - p_s
    for z in [0.3 + 0.2j, -1.0 + 0.7j, 2.0 + 1.0j]:
        direct = strip_function(state, flow, p_s, p_t, z)
        closed = strip_function_closed_form(state, flow, p_s, p_t, z)
        assert abs(direct - closed) < 1e-12


def test_hamiltonian_from_state():
    """H régénère ϱ à β fixé"""
    state = gibbs_state(EXAMPLE_HAMILTONIAN, 1.0)
    regenerated = gibbs_state(hamiltonian_from_state(state, 1.0), 1.0)
    assert np.linalg.norm(regenerated.density - state.density) < 1e-12
    with pytest.raises(NotFaithful):
        hamiltonian_from_state(negative_control_state(), 1.0)


def test_c3_truth_memberships():
    """Membres de T^{ρ,r} au contexte de l'exemple"""
    print("🧪 Test objet de vérité C³...")
    rows = c3_memberships((0.5, 0.3, 0.2), [0.3, 0.45, 0.5, 0.7])
    members = {row['r']: set(row['members']) for row in rows}
    assert members[0.3] == {'S1', 'S2', 'S12'}
    assert members[0.45] == {'S2', 'S12'}
    assert members[0.5] == {'S2', 'S12'}
    assert members[0.7] == {'S12'}
    assert rows[0]['measures']['S1'] == pytest.approx(0.4)

    presheaf = build_presheaf(example_poset())
    truth = truth_object(example_state(), presheaf)
    with pytest.raises(ValidationError):
        members_at(truth, EXAMPLE_LABEL, 0.0)
    print(f"✅ Appartenances: {members}")


def test_truth_value_and_invariance():
    """Valeurs de vérité et invariance sous le flot pour l'état de Gibbs"""
    flow, group, presheaf = _closed_example()
    state = gibbs_state(EXAMPLE_HAMILTONIAN, 1.0)
    value = truth_value(state, p12(), presheaf, EXAMPLE_LABEL, 0.45)
    assert value.cutoffs[EXAMPLE_LABEL] == pytest.approx(0.45)
    assert value.contains(EXAMPLE_LABEL, 0.45)

    entries = check_truth_value_invariance(state, flow, p12(), presheaf,
                                           [StageVR(EXAMPLE_LABEL, 0.45)], T_GRID, name='P12')
    assert entries and not any(e.failed for e in entries)


def test_mu_equivalences():
    """T^ρ et α_t*T^ρ sont μ-équivalents (faiblement et fortement)"""
    print("🧪 Test μ-équivalences...")
    flow, group, presheaf = _closed_example()
    state = gibbs_state(EXAMPLE_HAMILTONIAN, 1.0)
    truth = truth_object(state, presheaf)
    stages = [StageVR(EXAMPLE_LABEL, 0.45)]
    pulled = pullback_truth_object(truth, flow, 1.0)
    result = mu_equivalent(truth, pulled, stages, state)
    assert result['equivalent'], result['failing']

    strong = strong_mu_equivalence(truth, pulled, transport_mapping(flow.unitary(1.0)), stages, state)
    assert strong and not any(e.failed for e in strong)
    print(f"✅ {len(strong)} entrées de μ-équivalence forte")


def test_expectation_values():
    """E(A, ρ) = tr(ϱA) et identités KMS sur les valeurs moyennes"""
    print("🧪 Test valeurs moyennes...")
    flow, group, presheaf = _closed_example()
    state = gibbs_state(EXAMPLE_HAMILTONIAN, 1.0)
    A = 2 * p12().matrix + 0.5 * np.diag([0.0, 0.0, 1.0])
    pairs = spectral_pairs(A)
    value = expectation_value(state, pairs, presheaf)
    assert abs(value - float(np.trace(state.density @ A).real)) < 1e-9

    B = spectral_pairs(np.diag([1.0, 0.0, 0.0]))
    entries = check_expectation_kms(state, flow, pairs, B, presheaf, [0.5, 1.0])
    assert entries and not any(e.failed for e in entries)
    print(f"📊 E(A) = {value:.6f}")


def run_kms_external_tests():
    """Exécute tous les tests KMS externes"""
    print("🚀 Début des tests KMS externes...\n")

    tests = [
        test_gibbs_passes_C1_and_C2,
        test_negative_control_fails_C1,
        test_C1_requires_anchor,
        test_strip_closed_form,
        test_hamiltonian_from_state,
        test_c3_truth_memberships,
        test_truth_value_and_invariance,
        test_mu_equivalences,
        test_expectation_values,
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
    success = run_kms_external_tests()
    sys.exit(0 if success else 1)
