"""
Chargement des scénarios JSON
Opérateurs, états, contextes et options résolus avec leurs valeurs par défaut
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from config import Config
from src.models.context import Context
from src.models.flow import FlowConvention
from src.models.state import State
from src.services.algebra import context_from_operators
from src.services.exceptions import ParseError, ValidationError
from src.services.kms_external import gibbs_state
from src.services.numerics import (
    TolerancePolicy,
    Projection,
    random_unitary,
    require_hermitian,
)

logger = logging.getLogger(__name__)

CHECK_ORDER = (
    'poset', 'presheaf', 'measure', 'kms_external', 'truth', 'equivalence',
    'expectation', 'internal', 'modular', 'reconstruct',
)
GROUP_CLOSURE_MODES = ('none', 'group', 't_grid')

_BASIS_VECTOR = re.compile(r'^e(\d+)$')
_CALL = re.compile(r'^(diag|vec)\((.*)\)$')


def parse_complex(value) -> complex:
    """Nombre réel, [re, im] ou chaîne du type '1+2j'"""
    if isinstance(value, bool):
        raise ValidationError(f"Nombre attendu, reçu {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    if isinstance(value, str):
        try:
            return complex(value.replace(' ', ''))
        except ValueError:
            pass
    raise ValidationError(f"Nombre complexe non reconnu: {value!r}")


def _parse_vector(values) -> np.ndarray:
    if not isinstance(values, (list, tuple)):
        raise ValidationError(f"Vecteur attendu, reçu {values!r}")
    return np.array([parse_complex(v) for v in values], dtype=complex)


def _parse_rows(rows) -> np.ndarray:
    if not isinstance(rows, (list, tuple)) or not rows:
        raise ValidationError("Matrice attendue sous forme de liste de lignes")
    return np.array([[parse_complex(x) for x in row] for row in rows], dtype=complex)


def _vector_projector(vector: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vector)
    if norm == 0:
        raise ValidationError("Vecteur nul")
    unit = vector / norm
    return np.outer(unit, unit.conj())


def parse_operator(spec, dim: int) -> np.ndarray:
    """
    Opérateur n×n à partir d'une spécification

    Formes acceptées: "e1", "I", "diag(0,1,2)", "vec(1,1,0)" (projecteur),
    {"diag": [...]}, {"vector": [...]}, {"matrix": [[...]]} ou directement une liste de lignes.
    """
    if isinstance(spec, str):
        text = spec.strip()
        if text == 'I':
            return np.eye(dim, dtype=complex)
        match = _BASIS_VECTOR.match(text)
        if match:
            index = int(match.group(1)) - 1
            if not 0 <= index < dim:
                raise ValidationError(f"Vecteur de base hors de ℂ^{dim}: {text}")
            matrix = np.zeros((dim, dim), dtype=complex)
            matrix[index, index] = 1
            return matrix
        match = _CALL.match(text)
        if match:
            values = _parse_vector([v.strip() for v in match.group(2).split(',') if v.strip()])
            matrix = np.diag(values) if match.group(1) == 'diag' else _vector_projector(values)
        else:
            raise ValidationError(f"Opérateur non reconnu: {spec}")
    elif isinstance(spec, dict):
        if 'diag' in spec:
            matrix = np.diag(_parse_vector(spec['diag']))
        elif 'vector' in spec:
            matrix = _vector_projector(_parse_vector(spec['vector']))
        elif 'matrix' in spec:
            matrix = _parse_rows(spec['matrix'])
        else:
            raise ValidationError(f"Clés d'opérateur non reconnues: {sorted(spec)}")
    else:
        matrix = _parse_rows(spec)
    if matrix.shape != (dim, dim):
        raise ValidationError(f"Opérateur de forme {matrix.shape}, attendu ({dim}, {dim})")
    return matrix


def parse_projection(spec, dim: int, tol: TolerancePolicy) -> Projection:
    return Projection(parse_operator(spec, dim), tol)


def parse_state(spec, dim: int, hamiltonian: Optional[np.ndarray], beta: float,
                tol: TolerancePolicy) -> State:
    """
    État à partir de: "gibbs", {"gibbs": {"H": ..., "beta": ...}}, {"diag": [...]},
    {"density": [[...]]}, {"vector": [...]} ou {"spectrum": [...], "basis": [[...], ...]}
    """
    if spec == 'gibbs' or (isinstance(spec, dict) and 'gibbs' in spec):
        options = spec['gibbs'] if isinstance(spec, dict) and isinstance(spec['gibbs'], dict) else {}
        if 'H' in options:
            hamiltonian = parse_operator(options['H'], dim)
        if hamiltonian is None:
            raise ValidationError("État de Gibbs sans hamiltonien")
        return gibbs_state(hamiltonian, float(options.get('beta', beta)), tol)
    if not isinstance(spec, dict):
        raise ValidationError(f"Spécification d'état non reconnue: {spec!r}")
    label = spec.get('label')
    if 'diag' in spec:
        weights = [parse_complex(v).real for v in spec['diag']]
        return State(np.diag(weights), tol, label=label)
    if 'density' in spec:
        return State(parse_operator({'matrix': spec['density']}, dim), tol, label=label)
    if 'vector' in spec:
        return State.pure(_parse_vector(spec['vector']), tol, label=label)
    if 'spectrum' in spec:
        weights = [parse_complex(v).real for v in spec['spectrum']]
        basis = [_parse_vector(v) for v in spec['basis']]
        if len(weights) != len(basis):
            raise ValidationError("Spectre et base de tailles différentes")
        density = sum(w * _vector_projector(v) for w, v in zip(weights, basis))
        return State(density, tol, label=label)
    raise ValidationError(f"Clés d'état non reconnues: {sorted(spec)}")


def parse_tolerance_flags(flags: Sequence[str]) -> Dict[str, float]:
    """--tol key=value"""
    overrides = {}
    for flag in flags or ():
        if '=' not in flag:
            raise ValidationError(f"Tolérance attendue sous la forme clé=valeur: {flag}")
        key, value = flag.split('=', 1)
        try:
            overrides[key.strip()] = float(value)
        except ValueError:
            raise ValidationError(f"Valeur de tolérance non numérique: {flag}") from None
    return overrides


@dataclass
class Scenario:
    """Scénario résolu (valeurs par défaut matérialisées)"""

    name: str
    dim: int
    state: State
    tolerances: TolerancePolicy
    contexts: List[Context]
    hamiltonian: Optional[np.ndarray] = None
    beta: float = 1.0
    convention: FlowConvention = FlowConvention.HAMILTONIAN
    poset_options: Dict[str, Any] = field(default_factory=dict)
    group: Optional[Dict[str, Any]] = None
    subobjects: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    pairs: List[tuple] = field(default_factory=list)
    t_grid: List[float] = field(default_factory=lambda: [0.0])
    r_queries: List[float] = field(default_factory=list)
    stages: List[Dict[str, Any]] = field(default_factory=list)
    observables: Dict[str, Any] = field(default_factory=dict)
    checks: List[str] = field(default_factory=lambda: list(CHECK_ORDER))
    seed: int = 0
    require_faithful: bool = True
    reconstruct: Dict[str, Any] = field(default_factory=dict)
    raw: Dict[str, Any] = field(default_factory=dict)

    def has(self, check: str) -> bool:
        return check in self.checks

    def to_dict(self) -> dict:
        """Écho du scénario pour le rapport"""
        return {
            'name': self.name,
            'dim': self.dim,
            'state': self.raw.get('state'),
            'hamiltonian': self.raw.get('hamiltonian'),
            'beta': self.beta,
            'convention': self.convention.value,
            'contexts': self.raw.get('contexts'),
            'poset': dict(self.poset_options),
            'group': self.group,
            'subobjects': self.subobjects,
            'pairs': [list(p) for p in self.pairs],
            't_grid': list(self.t_grid),
            'r_queries': list(self.r_queries),
            'stages': list(self.stages),
            'observables': self.observables,
            'checks': list(self.checks),
            'tolerances': self.tolerances.to_dict(),
            'seed': self.seed,
            'require_faithful': self.require_faithful,
            'reconstruct': self.reconstruct,
        }


def _parse_contexts(specs, dim: int, seed: int, tol: TolerancePolicy) -> List[Context]:
    if not isinstance(specs, list) or not specs:
        raise ValidationError("Le scénario doit déclarer au moins un contexte")
    rng = np.random.default_rng(seed)
    contexts = []
    for index, spec in enumerate(specs):
        if not isinstance(spec, dict):
            raise ValidationError(f"Contexte #{index} invalide")
        label = spec.get('label')
        if 'operators' in spec:
            operators = [parse_operator(op, dim) for op in spec['operators']]
            contexts.append(context_from_operators(operators, label=label, tol=tol))
        elif 'blocks' in spec:
            contexts.append(Context([parse_projection(b, dim, tol) for b in spec['blocks']], label=label, tol=tol))
        elif spec.get('diagonal'):
            contexts.append(Context([parse_projection(f"e{i + 1}", dim, tol) for i in range(dim)],
                                    label=label, tol=tol))
        elif spec.get('random_basis'):
            unitary = random_unitary(rng, dim)
            blocks = [Projection(np.outer(unitary[:, j], unitary[:, j].conj()), tol) for j in range(dim)]
            contexts.append(Context(blocks, label=label, tol=tol))
        else:
            raise ValidationError(f"Contexte #{index}: clés non reconnues {sorted(spec)}")
    return contexts


def parse_scenario(
    data: Dict[str, Any],
    tol_overrides: Optional[Dict[str, float]] = None,
    seed: Optional[int] = None,
    convention: Optional[str] = None,
    config: type = Config,
) -> Scenario:
    """
    Résout un scénario: configuration < section `tolerances` < drapeaux --tol

    Raises:
        ValidationError: contenu invalide (dimension, opérateurs, état, noms)
    """
    if not isinstance(data, dict):
        raise ValidationError("Le scénario doit être un objet JSON")
    try:
        dim = int(data['dim'])
    except (KeyError, TypeError, ValueError):
        raise ValidationError("Champ 'dim' manquant ou invalide") from None
    if not 2 <= dim <= config.MAX_DIM:
        raise ValidationError(f"Dimension {dim} hors de [2, {config.MAX_DIM}]")

    tolerances = TolerancePolicy.from_config(config)
    section = data.get('tolerances') or {}
    if not isinstance(section, dict):
        raise ValidationError("La section 'tolerances' doit être un objet")
    tolerances = tolerances.with_overrides(**{k: float(v) for k, v in section.items()})
    if tol_overrides:
        tolerances = tolerances.with_overrides(**tol_overrides)

    seed = int(seed if seed is not None else data.get('seed', 0))
    beta = float(data.get('beta', 1.0))
    hamiltonian = None
    if data.get('hamiltonian') is not None:
        hamiltonian = require_hermitian(parse_operator(data['hamiltonian'], dim), tolerances, "H")
    if 'state' not in data:
        raise ValidationError("Champ 'state' manquant")
    state = parse_state(data['state'], dim, hamiltonian, beta, tolerances)
    contexts = _parse_contexts(data.get('contexts'), dim, seed, tolerances)

    poset_section = data.get('poset') or {}
    poset_options = {
        'downward_closure': bool(poset_section.get('downward_closure', False)),
        'meet_closure': bool(poset_section.get('meet_closure', False)),
        'group_closure': str(poset_section.get('group_closure', 'none')),
        'group_depth': poset_section.get('group_depth'),
        'max_contexts': int(poset_section.get('max_contexts', config.MAX_CONTEXTS)),
    }
    if poset_options['group_closure'] not in GROUP_CLOSURE_MODES:
        raise ValidationError(f"group_closure non reconnu: {poset_options['group_closure']}")

    subobjects = data.get('subobjects') or {}
    for name, spec in subobjects.items():
        if not isinstance(spec, dict) or 'projection' not in spec:
            raise ValidationError(f"Sous-objet {name}: champ 'projection' requis")
        parse_projection(spec['projection'], dim, tolerances)
    pairs = [tuple(p) for p in data.get('pairs') or []]
    for pair in pairs:
        if len(pair) != 2 or any(name not in subobjects for name in pair):
            raise ValidationError(f"Couple de sous-objets inconnu: {list(pair)}")

    checks = data.get('checks') or list(CHECK_ORDER)
    unknown = [c for c in checks if c not in CHECK_ORDER]
    if unknown:
        raise ValidationError(f"Vérifications inconnues: {', '.join(unknown)}")

    r_queries = [float(r) for r in data.get('r_queries') or []]
    for r in r_queries:
        if not 0 < r <= 1:
            raise ValidationError(f"Seuil r hors de (0,1]: {r}")

    scenario = Scenario(
        name=str(data.get('name', 'scenario')),
        dim=dim,
        state=state,
        tolerances=tolerances,
        contexts=contexts,
        hamiltonian=hamiltonian,
        beta=beta,
        convention=FlowConvention.parse(convention or data.get('convention', 'hamiltonian')),
        poset_options=poset_options,
        group=data.get('group'),
        subobjects=subobjects,
        pairs=pairs,
        t_grid=[float(t) for t in data.get('t_grid', [0.0])],
        r_queries=r_queries,
        stages=list(data.get('stages') or []),
        observables=dict(data.get('observables') or {}),
        checks=[c for c in CHECK_ORDER if c in checks],
        seed=seed,
        require_faithful=bool(data.get('require_faithful', True)),
        reconstruct=dict(data.get('reconstruct') or {}),
        raw=data,
    )
    logger.info(f"✅ Scénario {scenario.name} chargé (n = {dim}, {len(contexts)} contextes)")
    return scenario


def load_scenario(path: str, **kwargs) -> Scenario:
    """
    Lit un fichier de scénario

    Raises:
        ParseError: fichier absent ou JSON illisible
    """
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except FileNotFoundError:
        raise ParseError(f"Scénario introuvable: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"JSON invalide dans {path}: {exc}") from exc
    return parse_scenario(data, **kwargs)


def infer_dim(spec) -> int:
    """Dimension déduite d'une spécification d'opérateur (diag, vec, vecteur ou matrice)"""
    if isinstance(spec, str):
        match = _CALL.match(spec.strip())
        if match:
            return len([v for v in match.group(2).split(',') if v.strip()])
    elif isinstance(spec, dict):
        for key in ('diag', 'vector', 'matrix'):
            if key in spec:
                return len(spec[key])
    elif isinstance(spec, (list, tuple)):
        return len(spec)
    raise ValidationError(f"Impossible de déduire la dimension de {spec!r}")
