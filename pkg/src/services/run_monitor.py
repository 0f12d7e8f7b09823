"""
Service de monitoring des exécutions toposkms
Temps et mémoire par étape de vérification
"""

import logging
import os
import time
from contextlib import contextmanager
from typing import Dict, List

import psutil

logger = logging.getLogger(__name__)


class RunMonitor:
    """Mesure le temps et la mémoire du processus pour chaque étape d'une exécution"""

    def __init__(self, enabled: bool = None):
        if enabled is None:
            enabled = os.getenv('ENABLE_METRICS', 'true').lower() == 'true'
        self.monitoring_enabled = enabled
        self.stages: List[Dict] = []
        self._process = psutil.Process(os.getpid()) if enabled else None
        self._start = time.perf_counter()

    def _memory_mb(self) -> float:
        return self._process.memory_info().rss / (1024 ** 2)

    @contextmanager
    def stage(self, name: str):
        """Contexte de mesure d'une étape"""
        if not self.monitoring_enabled:
            yield
            return
        started = time.perf_counter()
        memory_before = self._memory_mb()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - started
            memory_after = self._memory_mb()
            record = {
                'stage': name,
                'seconds': round(elapsed, 4),
                'memory_mb': round(memory_after, 2),
                'memory_delta_mb': round(memory_after - memory_before, 2),
            }
            self.stages.append(record)
            logger.info(f"📊 {name}: {record['seconds']} s, {record['memory_mb']} Mo")

    def summary(self) -> Dict:
        """Métriques collectées (jamais écrites dans les rapports)"""
        if not self.monitoring_enabled:
            return {'enabled': False}
        return {
            'enabled': True,
            'total_seconds': round(time.perf_counter() - self._start, 4),
            'cpu_percent': psutil.cpu_percent(interval=None),
            'peak_memory_mb': max((s['memory_mb'] for s in self.stages), default=round(self._memory_mb(), 2)),
            'stages': list(self.stages),
        }
