"""
Configuration centralisée pour toposkms
Gère les variables d'environnement (tolérances, limites, sorties)
"""

import os
from typing import Optional


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in ('1', 'true', 'yes', 'oui')


class Config:
    """Configuration de base"""

    ENV = os.getenv('TOPOSKMS_ENV', 'development')
    DEBUG = ENV == 'development'

    # Tolérances numériques (normes de Frobenius et scalaires)
    EPS_HERM = float(os.getenv('TOPOSKMS_EPS_HERM', '1e-10'))
    EPS_IDEM = float(os.getenv('TOPOSKMS_EPS_IDEM', '1e-10'))
    EPS_EIG = float(os.getenv('TOPOSKMS_EPS_EIG', '1e-8'))
    EPS_ORDER = float(os.getenv('TOPOSKMS_EPS_ORDER', '1e-8'))
    EPS_MEASURE = float(os.getenv('TOPOSKMS_EPS_MEASURE', '1e-8'))

    # Limites de calcul
    MAX_CONTEXTS = int(os.getenv('TOPOSKMS_MAX_CONTEXTS', '500'))
    ENUMERATION_CAP = int(os.getenv('TOPOSKMS_ENUMERATION_CAP', '1000000'))
    MAX_DIM = int(os.getenv('TOPOSKMS_MAX_DIM', '16'))

    # Sorties
    OUTPUT_DIR = os.getenv('TOPOSKMS_OUTPUT_DIR', 'reports')
    EXPORT_XLSX = _env_bool('TOPOSKMS_EXPORT_XLSX', 'false')

    # Monitoring
    ENABLE_METRICS = _env_bool('ENABLE_METRICS', 'true')

    # Logging
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')

    @classmethod
    def tolerance_settings(cls) -> dict:
        """Retourne les tolérances sous forme de dictionnaire"""
        return {
            'eps_herm': cls.EPS_HERM,
            'eps_idem': cls.EPS_IDEM,
            'eps_eig': cls.EPS_EIG,
            'eps_order': cls.EPS_ORDER,
            'eps_measure': cls.EPS_MEASURE,
        }

    @classmethod
    def validate_tolerances(cls) -> list:
        """Liste les problèmes de cohérence des tolérances"""
        problems = []
        for key, value in cls.tolerance_settings().items():
            if not value > 0:
                problems.append(f"{key} doit être strictement positif (reçu {value})")
        if cls.EPS_MEASURE < cls.EPS_ORDER:
            problems.append("eps_measure doit être >= eps_order")
        return problems

    @classmethod
    def validate(cls) -> bool:
        return not cls.validate_tolerances()


class DevelopmentConfig(Config):
    """Configuration pour le développement"""
    DEBUG = True
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'DEBUG')


class ProductionConfig(Config):
    """Configuration pour les campagnes de vérification"""
    DEBUG = False
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING')

    @classmethod
    def validate(cls) -> bool:
        """Valide la configuration de production"""
        problems = cls.validate_tolerances()
        if problems:
            print(f"❌ Tolérances incohérentes: {'; '.join(problems)}")
            return False
        return True


class TestingConfig(Config):
    """Configuration pour les tests"""
    TESTING = True
    ENABLE_METRICS = False
    LOG_LEVEL = 'WARNING'


# Configuration par défaut
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(config_name: Optional[str] = None) -> Config:
    """Récupère la configuration appropriée"""
    if config_name is None:
        config_name = os.getenv('TOPOSKMS_ENV', 'default')

    return config.get(config_name, config['default'])
