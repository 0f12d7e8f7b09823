#!/usr/bin/env python3
"""
Tests KMS internes: orbites, objets brève et conditions C1/C2 internes
"""

import sys
import os
sys.path.insert(0, os.path.dirname(__file__))

import numpy as np
import pytest

from src.models.group import SampledGroup
from src.services.exceptions import NotFaithful, ValidationError
from src.services.kms_external import gibbs_state, truth_object
from src.services.kms_internal import (
    breve_fiber_summary,
    breve_spectrum,
    check_breve_truth,
    check_internal_C1,
    check_internal_C2,
    classify_automorphisms,
    orbits,
)
from src.services.presheaf import build_presheaf, full_subobject
from src.services.reference_models import (
    EXAMPLE_HAMILTONIAN,
    EXAMPLE_LABEL,
    c3_subobjects,
    cyclic_group,
    diagonal_context,
    example_context,
    example_flow,
    example_poset,
    negative_control_state,
)


def _cyclic_example():
    group = cyclic_group(example_flow(), gammas=[0.0, 1.0])
    presheaf = build_presheaf(example_poset(group))
    return group, presheaf


def test_orbits_on_cyclic_grid():
    """H_FV = {0, 2π} et quatre classes au contexte de l'exemple"""
    print("🧪 Test orbites H/H_FV...")
    group = cyclic_group(example_flow())
    decomposition = orbits(example_context(), group)
    assert len(decomposition.fixed) == 2
    assert decomposition.fixed[0] == pytest.approx(0.0)
    assert decomposition.fixed[1] == pytest.approx(2 * np.pi)
    assert len(decomposition.classes) == 4
    assert decomposition.class_of(2 * np.pi) == decomposition.class_of(0.0)

    classes = classify_automorphisms(example_context(), group)
    assert classes['faithful'] == pytest.approx([np.pi / 2, np.pi, 3 * np.pi / 2])
    assert len(classes['fixing']) == 2

    diagonal = orbits(diagonal_context(3), group)
    assert len(diagonal.classes) == 1
    print(f"✅ {len(decomposition.classes)} classes, fidèles: {classes['faithful']}")


def test_internal_C1_gibbs():
    """μ^ρ(α_t*S₁)(V) constante et égale à tr(ϱP₁₂)"""
    print("🧪 Test C1 interne (Gibbs)...")
    group, presheaf = _cyclic_example()
    state = gibbs_state(EXAMPLE_HAMILTONIAN, 1.0)
    named = c3_subobjects(presheaf, group)
    entries = check_internal_C1(state, list(named.values()), group)
    assert entries and not any(e.failed for e in entries)
    at_example = next(e for e in entries if e.location == f"S1@{EXAMPLE_LABEL}")
    assert abs(at_example.lhs - 0.454985) < 1e-6
    assert abs(at_example.rhs - 0.454985) < 1e-6
    print(f"📊 μ(S₁) = {at_example.lhs:.6f} sur toute l'orbite")


def test_internal_C1_pure_state_fails():
    """État pur (|1⟩+|2⟩)/√2: la section n'est pas constante"""
    group, presheaf = _cyclic_example()
    S1 = c3_subobjects(presheaf, group)['S1']
    entries = check_internal_C1(negative_control_state(), [S1], group)
    failures = [e for e in entries if e.failed]
    assert failures
    assert max(e.residual for e in failures) >= 0.1


def test_internal_C2():
    """Diagramme d'échange à γ = β et à γ = 0 contre Σ"""
    print("🧪 Test C2 interne...")
    group, presheaf = _cyclic_example()
    state = gibbs_state(EXAMPLE_HAMILTONIAN, 1.0)
    named = c3_subobjects(presheaf, group)

    at_beta = check_internal_C2(state, named['S1'], named['S2'], group)
    assert at_beta and not any(e.failed for e in at_beta)

    sigma = full_subobject(presheaf, named['S1'].domain)
    at_zero = check_internal_C2(state, named['S1'], sigma, group, gamma=0.0)
    assert at_zero and not any(e.failed for e in at_zero)

    with pytest.raises(ValidationError):
        check_internal_C2(state, named['S1'], named['S2'], group, gamma=0.5)
    with pytest.raises(NotFaithful):
        check_internal_C2(negative_control_state(), named['S1'], named['S2'], group)
    print(f"✅ {len(at_beta) + len(at_zero)} entrées C2 internes")


def test_breve_objects():
    """Σ brève: une fibre par classe; T brève cohérent pour l'état de Gibbs"""
    print("🧪 Test objets brève...")
    group, presheaf = _cyclic_example()
    breve = breve_spectrum(presheaf, group, [EXAMPLE_LABEL])
    assert breve.fiber_count(EXAMPLE_LABEL) == 4
    assert len({f.context_id for f in breve.fibers[EXAMPLE_LABEL]}) == 4
    summary = breve_fiber_summary(breve)
    assert summary[0].lhs == 4

    truth = truth_object(gibbs_state(EXAMPLE_HAMILTONIAN, 1.0), presheaf)
    entries = check_breve_truth(truth, group, EXAMPLE_LABEL)
    assert len(entries) == 4
    assert not any(e.failed for e in entries)
    print(f"✅ Σ brève: {breve.fiber_count(EXAMPLE_LABEL)} fibres")


def test_explicit_grid_group_law():
    """Une grille explicite doit se refermer pour la loi de groupe"""
    print("🧪 Test loi de groupe sur grille explicite...")
    flow = example_flow()
    open_grid = SampledGroup(flow, [0.0, 1.0, -1.0, 2.5, -2.5])
    assert not open_grid.is_group
    assert (1.0, 1.0) in open_grid.closure_defects()
    assert (1.0, 2.5) in open_grid.closure_defects()
    with pytest.raises(ValidationError):
        open_grid.require_group()
    with pytest.raises(ValidationError):
        orbits(example_context(), open_grid)

    # α_{2π} = id pour diag(0,1,2): la grille se referme à identification près
    quarter = np.pi / 2
    closed_grid = SampledGroup(flow, [k * quarter for k in range(-4, 5)])
    assert closed_grid.frequency is None
    assert closed_grid.is_group
    assert closed_grid.to_dict()['is_group']
    decomposition = orbits(example_context(), closed_grid)
    assert len(decomposition.classes) == 4
    assert len(decomposition.fixed) == 3
    print(f"✅ {len(open_grid.closure_defects())} couples en défaut sur la grille ouverte")


def run_kms_internal_tests():
    """Exécute tous les tests KMS internes"""
    print("🚀 Début des tests KMS internes...\n")

    tests = [
        test_orbits_on_cyclic_grid,
        test_explicit_grid_group_law,
        test_internal_C1_gibbs,
        test_internal_C1_pure_state_fails,
        test_internal_C2,
        test_breve_objects,
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
    success = run_kms_internal_tests()
    sys.exit(0 if success else 1)
