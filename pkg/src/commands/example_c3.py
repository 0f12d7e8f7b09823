"""Sous-commande example-c3: conditions d'appartenance de l'exemple C³"""

import logging

from config import get_config
from src.commands.common import EXIT_PASS
from src.models.report import INFO, Report, ReportEntry
from src.services.exceptions import ValidationError
from src.services.numerics import TolerancePolicy
from src.services.reference_models import EXAMPLE_LABEL, c3_memberships
from src.services.report_generator import ReportGenerator

logger = logging.getLogger(__name__)

FORMULAS = {
    'S1': ('S₁', '½(a₁+a₂)'),
    'S2': ('S₂', '½(a₁+a₂)+a₃'),
}


def register(subparsers):
    parser = subparsers.add_parser('example-c3', help="exemple C³: appartenance à l'objet de vérité")
    parser.add_argument('--a', required=True, help="poids a₁,a₂,a₃ (somme 1)")
    parser.add_argument('--r', required=True, help="seuils r séparés par des virgules")
    parser.add_argument('--out-dir', dest='out_dir', help="répertoire des rapports")
    parser.set_defaults(handler=handle)


def _floats(text: str, name: str) -> list:
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise ValidationError(f"{name} doit être une liste de nombres: {text}") from None


def membership_lines(weights, r_values, tol: TolerancePolicy) -> list:
    """Lignes « S₁: ½(a₁+a₂) = 0.4 ≥ 0.45? NO » pour chaque seuil"""
    lines = []
    for row in c3_memberships(weights, r_values, tol):
        r = row['r']
        if len(r_values) > 1:
            lines.append(f"r = {r:g}")
        for name in ('S1', 'S2'):
            symbol, formula = FORMULAS[name]
            answer = 'YES' if name in row['members'] else 'NO'
            lines.append(f"{symbol}: {formula} = {row['measures'][name]:.12g} ≥ {r:g}? {answer}")
        lines.append("S₁₂: always YES")
    return lines


def handle(args) -> int:
    config = get_config()
    tol = TolerancePolicy.from_config(config)
    weights = _floats(args.a, '--a')
    r_values = _floats(args.r, '--r')
    for r in r_values:
        if not 0 < r <= 1:
            raise ValidationError(f"Seuil r hors de (0,1]: {r}")
    for line in membership_lines(weights, r_values, tol):
        print(line)

    if args.out_dir:
        report = Report(scenario={'name': 'example-c3', 'a': weights, 'r': r_values})
        for row in c3_memberships(weights, r_values, tol):
            for name, value in sorted(row['measures'].items()):
                report.add(ReportEntry('example.measure', f"{name}@{EXAMPLE_LABEL}", value, None, None, INFO,
                                       parameter=row['r']))
            report.add(ReportEntry('example.members', f"({EXAMPLE_LABEL},{row['r']})", len(row['members']),
                                   None, None, INFO, detail=', '.join(row['members'])))
        ReportGenerator(args.out_dir).write(report)
    return EXIT_PASS
