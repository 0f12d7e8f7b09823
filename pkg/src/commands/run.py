"""Sous-commande run: toutes les suites du scénario dans l'ordre fixe"""

from config import get_config
from src.commands.common import add_common_arguments, execute, exit_code, load_from_args, print_summary, resolve_checks


def register(subparsers):
    parser = subparsers.add_parser('run', help="exécute un scénario complet")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    config = get_config()
    scenario = load_from_args(args, config=config)
    checks = resolve_checks(args, scenario.checks)
    report = execute(scenario, args, checks, default_out_dir=config.OUTPUT_DIR, config=config)
    print_summary(report)
    return exit_code(report)
