"""Sous-commandes de la CLI toposkms (une par suite de vérifications)"""

from src.commands import (
    dasein,
    example_c3,
    kms_external,
    kms_internal,
    measure,
    modular,
    poset,
    reconstruct,
    run,
)

COMMANDS = (run, poset, dasein, measure, kms_external, kms_internal, modular, reconstruct, example_c3)


def register_all(subparsers):
    for command in COMMANDS:
        command.register(subparsers)
