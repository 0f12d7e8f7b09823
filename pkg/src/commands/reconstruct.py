"""Sous-commande reconstruct: état reconstruit depuis une table de mesure"""

from config import get_config
from src.commands.common import add_common_arguments, execute, exit_code, load_from_args, print_summary

CHECKS = ('reconstruct',)


def register(subparsers):
    parser = subparsers.add_parser('reconstruct', help="reconstruction de ϱ depuis une mesure")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    config = get_config()
    scenario = load_from_args(args, config=config)
    report = execute(scenario, args, CHECKS, config=config)
    diagnostics = report.sections.get('reconstruction')
    if diagnostics:
        print(f"Statut: {diagnostics['status']} "
              f"(rang {diagnostics['spanned_dimension']} / {diagnostics['hermitian_dimension']})")
    print_summary(report)
    return exit_code(report)
