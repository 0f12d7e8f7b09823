"""Sous-commande kms-internal: orbites, objets brève et conditions internes"""

from config import get_config
from src.commands.common import add_common_arguments, execute, exit_code, load_from_args, print_summary

CHECKS = ('truth', 'internal')


def register(subparsers):
    parser = subparsers.add_parser('kms-internal', help="conditions KMS internes")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    config = get_config()
    scenario = load_from_args(args, config=config)
    report = execute(scenario, args, CHECKS, config=config)
    for entry in report.entries:
        if entry.check == 'internal.orbits':
            print(f"{entry.location}: {entry.lhs} classes d'orbite, {entry.detail}")
    print_summary(report)
    return exit_code(report)
