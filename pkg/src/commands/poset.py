"""Sous-commande poset: contextes et diagramme de Hasse"""

from config import get_config
from src.commands.common import add_common_arguments, execute, exit_code, load_from_args


def register(subparsers):
    parser = subparsers.add_parser('poset', help="construit et affiche le poset de contextes")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    config = get_config()
    scenario = load_from_args(args, config=config)
    report = execute(scenario, args, checks=[], config=config)
    poset = report.sections['poset']
    print(f"{len(poset['contexts'])} contextes")
    for context in poset['contexts']:
        ranks = ','.join(str(r) for r in context['ranks'])
        print(f"  {context['id']}: k={context['k']} rangs=({ranks})")
    print(f"{len(poset['hasse_edges'])} arêtes de Hasse")
    for smaller, larger in poset['hasse_edges']:
        print(f"  {smaller} ⊂ {larger}")
    return exit_code(report)
