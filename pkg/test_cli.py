#!/usr/bin/env python3
"""
Tests de la CLI toposkms
Codes de sortie, sorties texte et fichiers de rapport
"""

import sys
import os
sys.path.insert(0, os.path.dirname(__file__))
os.environ.setdefault('TOPOSKMS_ENV', 'testing')

import io
import json
import tempfile
from contextlib import redirect_stdout

from src.main import main

SCENARIOS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'scenarios')


def _run(argv):
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = main(argv)
    return code, buffer.getvalue()


def test_example_c3_output():
    """example-c3 --a 0.5,0.3,0.2 --r 0.45"""
    print("🧪 Test example-c3...")
    code, output = _run(['example-c3', '--a', '0.5,0.3,0.2', '--r', '0.45'])
    assert code == 0
    lines = output.strip().splitlines()
    assert lines[0] == "S₁: ½(a₁+a₂) = 0.4 ≥ 0.45? NO"
    assert lines[1] == "S₂: ½(a₁+a₂)+a₃ = 0.6 ≥ 0.45? YES"
    assert lines[2] == "S₁₂: always YES"
    print("✅ Sortie conforme")


def test_example_c3_rejects_bad_threshold():
    code, _ = _run(['example-c3', '--a', '0.5,0.3,0.2', '--r', '0'])
    assert code == 2
    code, _ = _run(['example-c3', '--a', '0.5,0.3,0.4', '--r', '0.5'])
    assert code == 2


def test_dasein_command():
    """δ°(e1) au contexte de l'exemple vaut I"""
    code, output = _run(['dasein', '--P', 'e1', '--context', 'example'])
    assert code == 0
    assert output.strip() == "δ°(e1)_example = I"
    code, _ = _run(['dasein', '--P', 'e1', '--context', 'inconnu'])
    assert code == 2


def test_run_gibbs_passes_and_writes_reports():
    """Scénario de Gibbs: code 0 et trois fichiers de rapport"""
    print("🧪 Test run (Gibbs)...")
    with tempfile.TemporaryDirectory() as out_dir:
        code, output = _run(['run', os.path.join(SCENARIOS, 'gibbs_internal.json'), '--out-dir', out_dir])
        assert code == 0, output
        for name in ('report.json', 'report.csv', 'summary.md'):
            assert os.path.exists(os.path.join(out_dir, name))
        with open(os.path.join(out_dir, 'report.json'), encoding='utf-8') as handle:
            report = json.load(handle)
        assert report['summary']['verdict'] == 'pass'
        assert report['entries']
    print("✅ Rapports écrits")


def test_run_negative_control_fails():
    """État pur non invariant: C1 échoue, code 1"""
    print("🧪 Test run (contrôle négatif)...")
    with tempfile.TemporaryDirectory() as out_dir:
        code, _ = _run(['run', os.path.join(SCENARIOS, 'negative_control.json'), '--out-dir', out_dir])
        assert code == 1
        with open(os.path.join(out_dir, 'report.json'), encoding='utf-8') as handle:
            report = json.load(handle)
        assert any(e['check'] == 'kms.C1' and e['verdict'] == 'fail' for e in report['entries'])
    print("❌ attendu: C1 en échec")


def test_reports_are_deterministic():
    """Deux exécutions successives: rapports identiques octet par octet"""
    print("🧪 Test déterminisme des rapports...")
    scenario = os.path.join(SCENARIOS, 'gibbs_internal.json')
    with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
        assert _run(['run', scenario, '--out-dir', first])[0] == 0
        assert _run(['run', scenario, '--out-dir', second])[0] == 0
        for name in ('report.json', 'report.csv', 'summary.md'):
            with open(os.path.join(first, name), 'rb') as handle:
                expected = handle.read()
            with open(os.path.join(second, name), 'rb') as handle:
                assert handle.read() == expected, name
    print("✅ Rapports identiques")


def test_input_errors():
    """Fichier absent ou suite inconnue: code 2, aucun rapport"""
    with tempfile.TemporaryDirectory() as out_dir:
        code, _ = _run(['run', os.path.join(out_dir, 'absent.json'), '--out-dir', out_dir])
        assert code == 2
        assert not os.path.exists(os.path.join(out_dir, 'report.json'))

        code, _ = _run(['run', os.path.join(SCENARIOS, 'example_c3.json'), '--checks', 'inconnue',
                        '--out-dir', out_dir])
        assert code == 2
        assert not os.path.exists(os.path.join(out_dir, 'report.json'))


def test_open_explicit_grid_is_input_error():
    """Grille explicite non fermée pour la loi de groupe: code 2"""
    with open(os.path.join(SCENARIOS, 'gibbs_internal.json'), encoding='utf-8') as handle:
        scenario = json.load(handle)
    scenario['group'] = {'samples': [0.0, 1.0, -1.0, 2.5, -2.5], 'gammas': [0.0, 1.0]}
    with tempfile.TemporaryDirectory() as out_dir:
        path = os.path.join(out_dir, 'open_grid.json')
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump(scenario, handle)
        code, _ = _run(['run', path, '--out-dir', os.path.join(out_dir, 'out')])
        assert code == 2
        assert not os.path.exists(os.path.join(out_dir, 'out', 'report.json'))


def run_cli_tests():
    """Exécute tous les tests de la CLI"""
    print("🚀 Début des tests CLI...\n")

    tests = [
        test_example_c3_output,
        test_example_c3_rejects_bad_threshold,
        test_dasein_command,
        test_run_gibbs_passes_and_writes_reports,
        test_run_negative_control_fails,
        test_reports_are_deterministic,
        test_input_errors,
        test_open_explicit_grid_is_input_error,
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
    success = run_cli_tests()
    sys.exit(0 if success else 1)
