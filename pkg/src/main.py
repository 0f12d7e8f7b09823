import os
import sys
# DON'T CHANGE THIS !!!
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

import argparse
import logging

from dotenv import load_dotenv

# Charger les variables d'environnement avant la configuration
load_dotenv()

from config import get_config
from src.commands import register_all
from src.commands.common import EXIT_INPUT
from src.services.exceptions import TopoKMSError

logger = logging.getLogger('toposkms')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='toposkms',
        description="Vérification des conditions KMS topos et de la structure modulaire en dimension finie",
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    register_all(subparsers)
    return parser


def configure_logging(config):
    logging.basicConfig(
        level=getattr(logging, str(config.LOG_LEVEL).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    """
    Point d'entrée de la CLI

    Returns:
        int: 0 si tout passe, 1 en cas d'échec d'une vérification, 2 sur erreur d'entrée
    """
    config = get_config()
    configure_logging(config)
    if not config.validate():
        logger.error("❌ Configuration de tolérances invalide")
        return EXIT_INPUT

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0

    try:
        return args.handler(args)
    except (TopoKMSError, ValueError) as exc:
        logger.error(f"❌ {type(exc).__name__}: {exc}")
        print(f"Erreur: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
