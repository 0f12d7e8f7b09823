#!/usr/bin/env python3
"""
Tests de la théorie modulaire en dimension finie
Opérateurs S/Δ/J, flot modulaire et application J sur les contextes
"""

import sys
import os
sys.path.insert(0, os.path.dirname(__file__))

import gc
import weakref

import numpy as np
import pytest

from src.models.context import Context
from src.models.flow import PROPAGATOR_CACHE_SIZE, AutomorphismFlow, FlowConvention
from src.models.group import SampledGroup
from src.models.state import State
from src.services.algebra import PosetOptions, build_poset
from src.services.exceptions import InvalidImage, NotCyclicSeparating, NotFaithful
from src.services.kms_external import check_C1, check_C2, gibbs_state
from src.services.modular import (
    MODULAR_TOL,
    check_modular_flow,
    check_order_continuity,
    check_tomita,
    commutant_swap_check,
    jmap_on_contexts,
    modular_flow,
    modular_automorphism_flow,
    modular_hamiltonian,
    tomita_operators,
)
from src.services.numerics import Projection, random_density, random_unitary
from src.services.presheaf import build_presheaf, transported_family
from src.services.reference_models import (
    EXAMPLE_HAMILTONIAN,
    bipartite_model,
    cyclic_group,
    diagonal_poset,
    example_flow,
    example_poset,
    negative_control_state,
    spanning_poset,
)


def test_tomita_identities_random_states():
    """S = JΔ^{1/2}, J² = I, ΔΩ = Ω sur 20 états fidèles aléatoires, n = 2..4"""
    print("🧪 Test identités de Tomita...")
    rng = np.random.default_rng(42)
    for index in range(20):
        n = 2 + index % 3
        state = State(random_density(rng, n))
        data = tomita_operators(state)
        assert max(data.residuals.values()) <= MODULAR_TOL
        entries = check_tomita(data)
        assert not any(e.failed for e in entries), [e for e in entries if e.failed]
        assert any(e.check == 'modular.delta_spectrum' for e in entries)
        swap = commutant_swap_check(data)
        assert not any(e.failed for e in swap)
        assert max(e.residual for e in swap) <= MODULAR_TOL
    print("✅ Identités vérifiées sur 20 états")


def test_delta_spectrum_diagonal_states():
    """États diagonaux: spectre de Δ = {a_i/a_j}"""
    rng = np.random.default_rng(9)
    for n in (2, 3, 4):
        weights = 0.9 * rng.dirichlet(np.ones(n)) + 0.1 / n
        data = tomita_operators(State(np.diag(weights)))
        spectrum = np.sort(np.linalg.eigvalsh((data.delta + data.delta.conj().T) / 2))
        expected = np.sort([a / b for a in weights for b in weights])
        assert np.max(np.abs(spectrum - expected)) <= MODULAR_TOL


def test_delta_spectrum_gibbs():
    """Spectre de Δ = {a_i/a_j}"""
    state = gibbs_state(EXAMPLE_HAMILTONIAN, 1.0)
    data = tomita_operators(state)
    spectrum = np.sort(np.linalg.eigvalsh((data.delta + data.delta.conj().T) / 2))
    expected = np.sort(np.exp([i - j for i in range(3) for j in range(3)]).astype(float))
    assert np.allclose(spectrum, expected, atol=1e-9)


def test_not_faithful():
    with pytest.raises(NotFaithful):
        tomita_operators(negative_control_state())
    with pytest.raises(NotFaithful):
        modular_hamiltonian(negative_control_state())


def test_commutant_swap():
    """Jπ(A)J commute avec π(M_n) et vaut x ↦ x·A*"""
    print("🧪 Test JMJ = M′...")
    rng = np.random.default_rng(1)
    data = tomita_operators(State(random_density(rng, 3)))
    entries = commutant_swap_check(data)
    assert not any(e.failed for e in entries)

    # les seules unités diagonales n'engendrent pas un vecteur cyclique
    diagonal_units = [np.diag(row) for row in np.eye(3)]
    with pytest.raises(NotCyclicSeparating):
        commutant_swap_check(data, subalgebra=diagonal_units)
    print("✅ Commutateurs nuls")


def test_modular_flow_matches_hamiltonian():
    """Pour ϱ = e^{−βH}/Z, le flot modulaire est le flot de H"""
    print("🧪 Test flot modulaire...")
    state = gibbs_state(EXAMPLE_HAMILTONIAN, 1.0)
    entries = check_modular_flow(state, 1.0, [0.0, 0.4, 1.3], hamiltonian=EXAMPLE_HAMILTONIAN)
    assert entries and not any(e.failed for e in entries)

    A = np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]], dtype=complex)
    moved = modular_flow(state, 0.7, 1.0)(A)
    assert abs(moved[0, 1] - np.exp(-0.7j)) < 1e-9

    # β = 2: la normalisation s = 1/β retrouve encore H
    hot = gibbs_state(EXAMPLE_HAMILTONIAN, 2.0)
    entries = check_modular_flow(hot, 2.0, [0.5], hamiltonian=EXAMPLE_HAMILTONIAN)
    assert not any(e.failed for e in entries)
    print("✅ σ_t = α_t")


def test_gns_vector_state_is_kms_for_modular_flow():
    """ω_Ω(A) = ⟨Ω, π(A)Ω⟩ avec Ω = ϱ^{1/2}: C1 et C2 sous le flot modulaire"""
    print("🧪 Test état vecteur GNS et flot modulaire...")
    rng = np.random.default_rng(8)
    for n in (2, 3, 4):
        state = State(random_density(rng, n))
        gns = tomita_operators(state).gns
        flow = modular_automorphism_flow(state, 1.0)
        unitary = random_unitary(rng, n)
        base = Context([Projection(np.outer(unitary[:, j], unitary[:, j].conj())) for j in range(n)],
                       label='basis')
        group = SampledGroup(flow, [0.0, 0.5, -0.5, 1.0, -1.0])
        presheaf = build_presheaf(build_poset([base], PosetOptions(group_closure=group, group_depth=1)))

        P = Projection(base.projection_of([0]))
        vector_value = np.vdot(gns.omega_vector, gns.pi(P.matrix) @ gns.omega_vector)
        assert abs(vector_value - state.probability(P.matrix)) < 1e-12

        S = transported_family(P, 'basis', flow, group.samples, presheaf, name='S')
        T = transported_family(Projection(np.eye(n) - P.matrix), 'basis', flow, group.samples, presheaf, name='T')
        c1 = check_C1(state, flow, [S, T], [-1.0, -0.5, 0.5, 1.0])
        assert c1 and not any(e.failed for e in c1)
        c2 = check_C2(state, flow, S, T, t_grid=[0.5, 1.0])
        assert c2 and not any(e.failed for e in c2), [e for e in c2 if e.failed]
    print("✅ ω_Ω est KMS pour σ_t")


def test_modular_convention_keeps_parameter():
    """La convention modulaire ne remet pas t à l'échelle: même opérateur que le flot de H"""
    state = gibbs_state(EXAMPLE_HAMILTONIAN, 2.0)
    modular = modular_automorphism_flow(state, 2.0)
    hamiltonian = AutomorphismFlow(EXAMPLE_HAMILTONIAN, 2.0)
    assert modular.convention == FlowConvention.MODULAR
    A = np.array([[0, 1, 0], [0, 0, 0], [0, 0, 1]], dtype=complex)
    for t in (0.5, 1.3):
        assert np.allclose(modular.apply(A, t), hamiltonian.apply(A, t), atol=1e-9)
        assert np.allclose(modular.apply(A, t), modular_flow(state, t, 2.0)(A), atol=1e-9)


def test_flow_propagator_cache():
    """Cache par instance, borné, qui ne retient pas le flot"""
    flow = AutomorphismFlow(EXAMPLE_HAMILTONIAN)
    assert flow.propagator(0.3) is flow.propagator(0.3)
    for k in range(PROPAGATOR_CACHE_SIZE + 10):
        flow.propagator(0.01 * k)
    assert len(flow._propagators) == PROPAGATOR_CACHE_SIZE
    other = AutomorphismFlow(2 * EXAMPLE_HAMILTONIAN)
    assert not np.allclose(other.propagator(0.3), flow.propagator(0.3))

    reference = weakref.ref(flow)
    del flow
    gc.collect()
    assert reference() is None


def test_jmap_identity_on_diagonal_poset():
    """J = K sur le poset diagonal: application identité, croissante et continue"""
    print("🧪 Test application J...")
    poset = diagonal_poset(3)
    target, mapping = jmap_on_contexts(np.eye(3), poset)
    assert all(mapping[cid] == cid for cid in poset.ids)
    entries = check_order_continuity(mapping, poset, target)
    verdicts = {e.check: e.verdict for e in entries}
    assert verdicts['jmap.order'] == 'pass'
    assert verdicts['jmap.continuity'] == 'pass'
    assert verdicts['jmap.lemma'] == 'pass'
    assert verdicts['jmap.bijective'] == 'pass'

    with pytest.raises(InvalidImage):
        jmap_on_contexts(np.eye(2), poset)
    print(f"✅ {len(mapping)} contextes fixés par J")


def test_jmap_bipartite_model():
    """N_l = M₂ ⊗ I: J envoie chaque contexte sur un contexte de N_l′"""
    data, poset = bipartite_model(rng_seed=3)
    target, mapping = jmap_on_contexts(data.J.matrix, poset)
    assert sorted(mapping) == ['l-diag', 'l-generic', 'l-plus']
    assert len(set(mapping.values())) == 3
    entries = check_order_continuity(mapping, poset, target)
    assert not any(e.failed for e in entries)
    for cid, image in mapping.items():
        for block in target.context(image).blocks:
            # bloc de la forme I ⊗ Q
            assert np.allclose(block.matrix[0:2, 0:2], block.matrix[2:4, 2:4])
            assert np.allclose(block.matrix[0:2, 2:4], 0)


def test_jmap_on_other_posets():
    """J = U∘K aléatoire: croissante et continue sur trois autres posets"""
    print("🧪 Test application J sur d'autres posets...")
    rng = np.random.default_rng(12)
    posets = [
        diagonal_poset(4),
        example_poset(cyclic_group(example_flow())),
        spanning_poset(3, seed=4),
    ]
    for poset in posets:
        target, mapping = jmap_on_contexts(random_unitary(rng, poset.dim), poset)
        verdicts = {e.check: e.verdict for e in check_order_continuity(mapping, poset, target)}
        assert verdicts['jmap.order'] == 'pass'
        assert verdicts['jmap.continuity'] == 'pass'
        assert verdicts['jmap.lemma'] == 'pass'
        assert verdicts['jmap.bijective'] == 'pass'
    print(f"✅ {len(posets)} posets")


def test_continuity_detects_violation_on_large_poset():
    """Échange d'un contexte minimal et du maximal sur les 51 contextes de ℂ⁵"""
    poset = diagonal_poset(5)
    top = poset.maximal()[0]
    bottom = poset.minimal()[0]
    identity = {cid: cid for cid in poset.ids}
    verdicts = {e.check: e.verdict for e in check_order_continuity(identity, poset, poset)}
    assert verdicts['jmap.continuity'] == 'pass'

    swapped = dict(identity, **{top: bottom, bottom: top})
    entries = {e.check: e for e in check_order_continuity(swapped, poset, poset)}
    assert entries['jmap.order'].verdict == 'fail'
    assert entries['jmap.continuity'].verdict == 'fail'
    assert entries['jmap.continuity'].lhs >= 1
    assert entries['jmap.lemma'].verdict == 'pass'


def run_modular_tests():
    """Exécute tous les tests modulaires"""
    print("🚀 Début des tests de théorie modulaire...\n")

    tests = [
        test_tomita_identities_random_states,
        test_delta_spectrum_diagonal_states,
        test_delta_spectrum_gibbs,
        test_not_faithful,
        test_commutant_swap,
        test_modular_flow_matches_hamiltonian,
        test_gns_vector_state_is_kms_for_modular_flow,
        test_modular_convention_keeps_parameter,
        test_flow_propagator_cache,
        test_jmap_identity_on_diagonal_poset,
        test_jmap_bipartite_model,
        test_jmap_on_other_posets,
        test_continuity_detects_violation_on_large_poset,
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
    success = run_modular_tests()
    sys.exit(0 if success else 1)
