"""Sous-commande dasein: daseinisation extérieure δ°(P)_V"""

import numpy as np

from config import get_config
from src.commands.common import EXIT_PASS, add_common_arguments, load_from_args, scenario_path
from src.services.algebra import PosetOptions, build_poset
from src.services.exceptions import ValidationError
from src.services.numerics import Projection, TolerancePolicy
from src.services.pipeline import VerificationPipeline
from src.services.presheaf import outer_daseinisation
from src.services.reference_models import diagonal_context, example_context
from src.services.scenario_loader import parse_projection


def register(subparsers):
    parser = subparsers.add_parser('dasein', help="daseinisation extérieure d'un projecteur")
    add_common_arguments(parser)
    parser.add_argument('--P', dest='projection', required=True, help="projecteur (ex. e1, vec(1,1,0))")
    parser.add_argument('--context', required=True, help="identifiant du contexte")
    parser.set_defaults(handler=handle)


def render_projection(projection: Projection, tol: TolerancePolicy) -> str:
    """'I', '0' ou la matrice arrondie"""
    if projection.is_identity(tol):
        return 'I'
    if projection.is_zero(tol):
        return '0'
    return np.array2string(np.round(projection.matrix, 6), separator=', ', max_line_width=200)


def handle(args) -> int:
    config = get_config()
    if scenario_path(args):
        scenario = load_from_args(args, config=config)
        scenario.checks = []
        pipeline = VerificationPipeline(scenario, config=config)
        pipeline.run()
        poset, tol, dim = pipeline.poset, scenario.tolerances, scenario.dim
    else:
        tol = TolerancePolicy.from_config(config)
        dim = 3
        poset = build_poset([example_context(tol), diagonal_context(3, tol=tol)],
                            PosetOptions(downward_closure=True), tol)
    if args.context not in poset:
        raise ValidationError(f"Contexte inconnu: {args.context} (disponibles: {', '.join(poset.ids)})")
    projection = parse_projection(args.projection, dim, tol)
    result = outer_daseinisation(projection, poset.context(args.context), tol)
    print(f"δ°({args.projection})_{args.context} = {render_projection(result, tol)}")
    return EXIT_PASS
