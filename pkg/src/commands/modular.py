"""Sous-commande modular: opérateurs de Tomita–Takesaki, flot modulaire et application J"""

from config import get_config
from src.commands.common import add_common_arguments, execute, exit_code, load_from_args, scenario_path
from src.services.exceptions import ValidationError
from src.services.scenario_loader import infer_dim

CHECKS = ('modular',)
DEFAULT_T_GRID = (-1.0, 0.5, 1.0)


def register(subparsers):
    parser = subparsers.add_parser('modular', help="théorie modulaire de l'état")
    add_common_arguments(parser)
    parser.add_argument('--state', help="'gibbs', diag(...) ou vec(...)")
    parser.add_argument('--H', dest='hamiltonian', help="hamiltonien, ex. diag(0,1,2)")
    parser.add_argument('--beta', type=float, default=1.0)
    parser.add_argument('--t', dest='t_grid', help="instants séparés par des virgules")
    parser.set_defaults(handler=handle)


def _state_spec(text: str):
    text = text.strip()
    if text == 'gibbs':
        return 'gibbs'
    if text.startswith('diag(') and text.endswith(')'):
        return {'diag': [float(v) for v in text[5:-1].split(',')]}
    if text.startswith('vec(') and text.endswith(')'):
        return {'vector': [v.strip() for v in text[4:-1].split(',')]}
    raise ValidationError(f"État non reconnu: {text}")


def build_inline_scenario(args) -> dict:
    """Scénario minimal à partir de --state/--H/--beta"""
    if not args.state:
        raise ValidationError("--state requis sans fichier de scénario")
    state = _state_spec(args.state)
    if args.hamiltonian:
        dim = infer_dim(args.hamiltonian)
    elif isinstance(state, dict):
        dim = len(next(iter(state.values())))
    else:
        raise ValidationError("--H requis pour un état de Gibbs")
    t_grid = [float(t) for t in args.t_grid.split(',')] if args.t_grid else list(DEFAULT_T_GRID)
    return {
        'name': 'modular-inline',
        'dim': dim,
        'state': state,
        'hamiltonian': args.hamiltonian,
        'beta': args.beta,
        'contexts': [{'label': 'diag', 'diagonal': True}],
        't_grid': t_grid,
        'checks': list(CHECKS),
    }


def handle(args) -> int:
    config = get_config()
    if scenario_path(args):
        scenario = load_from_args(args, config=config)
    else:
        scenario = load_from_args(args, data=build_inline_scenario(args), config=config)
    report = execute(scenario, args, CHECKS, config=config)
    print(f"{'vérification':<48} {'résidu':>12}  verdict")
    for entry in report.entries:
        if entry.residual is None:
            continue
        print(f"{entry.check:<48} {entry.residual:>12.3e}  {entry.verdict}")
    print(f"Verdict: {report.verdict}")
    return exit_code(report)
