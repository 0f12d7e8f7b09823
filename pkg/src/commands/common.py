"""
Outils partagés par les sous-commandes
Arguments communs, résolution du scénario, exécution et écriture des rapports
"""

import logging
from typing import Iterable, Optional

from config import Config
from src.models.report import FAIL, Report
from src.services.exceptions import ValidationError
from src.services.pipeline import VerificationPipeline
from src.services.report_generator import ReportGenerator
from src.services.run_monitor import RunMonitor
from src.services.scenario_loader import CHECK_ORDER, Scenario, load_scenario, parse_scenario, parse_tolerance_flags

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


def add_common_arguments(parser, scenario_required: bool = True):
    """--scenario, --out-dir, --checks, --tol, --seed, --convention"""
    if scenario_required:
        parser.add_argument('scenario_path', nargs='?', help="fichier de scénario JSON")
    parser.add_argument('--scenario', dest='scenario_option', help="fichier de scénario JSON")
    parser.add_argument('--out-dir', dest='out_dir', help="répertoire des rapports")
    parser.add_argument('--checks', help="suites à exécuter, séparées par des virgules")
    parser.add_argument('--tol', action='append', default=[], metavar='KEY=VALUE', help="surcharge de tolérance")
    parser.add_argument('--seed', type=int, help="graine aléatoire")
    parser.add_argument('--convention', choices=['hamiltonian', 'modular'], help="convention du flot")
    parser.add_argument('--xlsx', action='store_true', help="exporte aussi report.xlsx")


def scenario_path(args) -> Optional[str]:
    return getattr(args, 'scenario_option', None) or getattr(args, 'scenario_path', None)


def resolve_checks(args, defaults: Iterable[str]) -> list:
    selected = list(defaults)
    if getattr(args, 'checks', None):
        requested = [c.strip() for c in args.checks.split(',') if c.strip()]
        unknown = [c for c in requested if c not in CHECK_ORDER]
        if unknown:
            raise ValidationError(f"Suites inconnues: {', '.join(unknown)}")
        selected = [c for c in CHECK_ORDER if c in requested]
    return selected


def load_from_args(args, data: Optional[dict] = None, config: type = Config) -> Scenario:
    """Scénario depuis --scenario/argument positionnel, ou depuis un dictionnaire construit par la commande"""
    options = {
        'tol_overrides': parse_tolerance_flags(getattr(args, 'tol', [])),
        'seed': getattr(args, 'seed', None),
        'convention': getattr(args, 'convention', None),
        'config': config,
    }
    if data is not None:
        return parse_scenario(data, **options)
    path = scenario_path(args)
    if not path:
        raise ValidationError("Aucun scénario fourni (argument ou --scenario)")
    return load_scenario(path, **options)


def execute(scenario: Scenario, args, checks: Optional[Iterable[str]] = None,
            default_out_dir: Optional[str] = None, config: type = Config) -> Report:
    """Exécute le pipeline sur les suites demandées puis écrit les rapports si un répertoire est fixé"""
    if checks is not None:
        scenario.checks = [c for c in CHECK_ORDER if c in set(checks)]
    monitor = RunMonitor(enabled=config.ENABLE_METRICS)
    report = VerificationPipeline(scenario, monitor, config).run()
    if monitor.monitoring_enabled:
        logger.info(f"📊 Métriques: {monitor.summary()['total_seconds']} s au total")

    out_dir = getattr(args, 'out_dir', None) or default_out_dir
    if out_dir:
        export_xlsx = getattr(args, 'xlsx', False) or config.EXPORT_XLSX
        ReportGenerator(out_dir).write(report, export_xlsx=export_xlsx)
    return report


def print_summary(report: Report):
    print(ReportGenerator().render_summary(report))


def exit_code(report: Report) -> int:
    return EXIT_FAIL if report.verdict == FAIL else EXIT_PASS
