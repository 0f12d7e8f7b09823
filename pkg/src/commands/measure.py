"""Sous-commande measure: mesure μ^ρ et propriétés (i)–(vi)"""

from config import get_config
from src.commands.common import add_common_arguments, execute, exit_code, load_from_args, print_summary

CHECKS = ('measure',)


def register(subparsers):
    parser = subparsers.add_parser('measure', help="mesure μ^ρ et propriétés de mesure")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    config = get_config()
    scenario = load_from_args(args, config=config)
    report = execute(scenario, args, CHECKS, config=config)
    for entry in report.entries:
        if entry.check == 'measure.value':
            print(f"μ({entry.location}) = {entry.lhs:.12g}")
    print_summary(report)
    return exit_code(report)
