"""Sous-commande kms-external: C1/C2, objets de vérité, équivalences et valeurs moyennes"""

from config import get_config
from src.commands.common import add_common_arguments, execute, exit_code, load_from_args, print_summary

CHECKS = ('kms_external', 'truth', 'equivalence', 'expectation')


def register(subparsers):
    parser = subparsers.add_parser('kms-external', help="conditions KMS externes")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    config = get_config()
    scenario = load_from_args(args, config=config)
    report = execute(scenario, args, CHECKS, config=config)
    print_summary(report)
    return exit_code(report)
