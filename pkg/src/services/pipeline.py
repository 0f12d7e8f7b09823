"""
Pipeline de vérification toposkms
Exécute les suites dans un ordre fixe et assemble un rapport déterministe
"""

from __future__ import annotations

import logging
from typing import Dict, List, Optional

import networkx
import numpy as np
import scipy

from config import Config
from src.models.flow import AutomorphismFlow, FlowConvention
from src.models.group import SampledGroup
from src.models.poset import ContextPoset
from src.models.report import FAIL, INFO, PASS, SKIP, Report, ReportEntry
from src.models.state import AbstractMeasure, density_distance
from src.models.subobject import ClopenSubobject, SpectralPresheaf
from src.models.truth import StageVR, TruthObject
from src.services import kms_external, kms_internal, measure, modular
from src.services.algebra import PosetOptions, build_poset
from src.services.exceptions import (
    InconsistentTable,
    Infeasible,
    NotAdditive,
    PosetNotClosed,
    ValidationError,
)
from src.services.presheaf import (
    anchor_domain,
    build_presheaf,
    check_functoriality,
    daseinisation_subobject,
    full_subobject,
    restrict_subobject,
    transported_family,
)
from src.services.reference_models import bipartite_model
from src.services.run_monitor import RunMonitor
from src.services.scenario_loader import Scenario, parse_operator, parse_projection

logger = logging.getLogger(__name__)

TOOL_VERSION = '1.0.0'
RECONSTRUCT_TOL = 1e-8

CONVENTIONS = {
    'flow': 'α_z(A) = e^{izH}·A·e^{−izH}',
    'modular_flow': 'ϱ^{−it/β}·A·ϱ^{it/β}',
    'gns_vectorization': 'lignes (E_ij lexicographique)',
    'complex_encoding': '[re, im]',
}


def _renamed(entries: List[ReportEntry], prefix: str) -> List[ReportEntry]:
    for entry in entries:
        entry.check = f"{prefix}.{entry.check}"
    return entries


class VerificationPipeline:
    """
    Chaîne poset → préfaisceau → mesure → KMS externe → vérité → équivalences
    → valeurs moyennes → KMS interne → modulaire → reconstruction
    """

    def __init__(self, scenario: Scenario, monitor: Optional[RunMonitor] = None, config: type = Config):
        self.scenario = scenario
        self.config = config
        self.monitor = monitor or RunMonitor(enabled=False)
        self.tol = scenario.tolerances
        self.state = scenario.state
        self.report = Report(
            scenario=scenario.to_dict(),
            versions={
                'toposkms': TOOL_VERSION,
                'numpy': np.__version__,
                'scipy': scipy.__version__,
                'networkx': networkx.__version__,
            },
            conventions=dict(CONVENTIONS, selected=scenario.convention.value),
        )
        self.flow: Optional[AutomorphismFlow] = None
        self.group: Optional[SampledGroup] = None
        self.closure_group: Optional[SampledGroup] = None
        self.poset: Optional[ContextPoset] = None
        self.presheaf: Optional[SpectralPresheaf] = None
        self.subobjects: Dict[str, ClopenSubobject] = {}
        self.truth: Optional[TruthObject] = None

    def run(self) -> Report:
        """Exécute les suites demandées dans l'ordre fixe et retourne le rapport"""
        self._prepare_flow()
        stages = [
            ('poset', self._stage_poset),
            ('presheaf', self._stage_presheaf),
            ('measure', self._stage_measure),
            ('kms_external', self._stage_kms_external),
            ('truth', self._stage_truth),
            ('equivalence', self._stage_equivalence),
            ('expectation', self._stage_expectation),
            ('internal', self._stage_internal),
            ('modular', self._stage_modular),
            ('reconstruct', self._stage_reconstruct),
        ]
        for name, stage in stages:
            # le poset et le préfaisceau sont requis par toutes les suites
            if name in ('poset', 'presheaf') or self.scenario.has(name):
                with self.monitor.stage(name):
                    stage()
        verdict = self.report.verdict
        emoji = '✅' if verdict != FAIL else '❌'
        logger.info(f"{emoji} Scénario {self.scenario.name}: {verdict} ({self.report.counts()})")
        return self.report

    def _skip(self, check: str, reason: str):
        self.report.add(ReportEntry(check, '*', verdict=SKIP, detail=reason))

    def _prepare_flow(self):
        scenario = self.scenario
        if scenario.convention == FlowConvention.MODULAR:
            hamiltonian = modular.modular_hamiltonian(self.state, scenario.beta, self.tol)
        else:
            hamiltonian = scenario.hamiltonian
        if hamiltonian is not None:
            self.flow = AutomorphismFlow(hamiltonian, scenario.beta, scenario.convention, self.tol)

        spec = scenario.group
        if spec is not None:
            if self.flow is None:
                raise ValidationError("Un échantillon du groupe requiert un hamiltonien")
            gammas = spec.get('gammas', [0.0, scenario.beta])
            if 'cyclic' in spec:
                self.group = SampledGroup.cyclic(self.flow, int(spec['cyclic']), float(spec.get('frequency', 1.0)),
                                                 bool(spec.get('endpoint', False)), gammas)
            elif 'samples' in spec:
                self.group = SampledGroup(self.flow, spec['samples'], gammas, spec.get('frequency')).require_group()
            else:
                raise ValidationError(f"Groupe non reconnu: {sorted(spec)}")

        mode = scenario.poset_options['group_closure']
        if mode == 'group':
            if self.group is None:
                raise ValidationError("group_closure='group' sans section 'group'")
            self.closure_group = self.group
        elif mode == 't_grid':
            if self.flow is None:
                raise ValidationError("group_closure='t_grid' requiert un hamiltonien")
            samples = {0.0} | {t for t in scenario.t_grid} | {-t for t in scenario.t_grid}
            self.closure_group = SampledGroup(self.flow, samples, (0.0, scenario.beta))

    def _stage_poset(self):
        options = self.scenario.poset_options
        poset_options = PosetOptions(
            downward_closure=options['downward_closure'],
            meet_closure=options['meet_closure'],
            group_closure=self.closure_group,
            group_depth=options['group_depth'],
            max_contexts=options['max_contexts'],
        )
        self.poset = build_poset(self.scenario.contexts, poset_options, self.tol)
        self.report.sections['poset'] = self.poset.to_dict()
        self.report.add(ReportEntry('poset.size', 'V(N)', len(self.poset), len(self.poset.hasse_edges()),
                                    None, INFO, detail='contextes / arêtes de Hasse'))

    def _stage_presheaf(self):
        self.presheaf = build_presheaf(self.poset)
        violations = check_functoriality(self.presheaf)
        self.report.add(ReportEntry.bound('presheaf.functoriality', 'Σ', float(len(violations)), 0.0))
        self.subobjects = self._build_subobjects()
        self.report.sections['subobjects'] = {name: s.to_dict() for name, s in sorted(self.subobjects.items())}

    def _build_subobjects(self) -> Dict[str, ClopenSubobject]:
        scenario = self.scenario
        samples_from = self.closure_group or self.group
        subobjects = {}
        for name, spec in sorted(scenario.subobjects.items()):
            projection = parse_projection(spec['projection'], scenario.dim, self.tol)
            base = spec.get('base')
            if base is not None and base not in self.poset:
                raise ValidationError(f"Contexte de base inconnu pour {name}: {base}")
            if base is not None and samples_from is not None and spec.get('transported', True):
                subobjects[name] = transported_family(projection, base, samples_from.flow, samples_from.samples,
                                                      self.presheaf, name=name)
            else:
                subobjects[name] = daseinisation_subobject(projection, self.presheaf, name=name)
        if not subobjects:
            for context in scenario.contexts:
                cid = self.poset.find(context)
                name = f"δ({cid}:1)"
                subobjects[name] = daseinisation_subobject(context.blocks[0], self.presheaf, name=name)
        return subobjects

    def _pairs(self) -> List[tuple]:
        return [(self.subobjects[a], self.subobjects[b]) for a, b in self.scenario.pairs]

    def _stage_measure(self):
        for name, subobject in sorted(self.subobjects.items()):
            for cid in sorted(subobject.domain):
                self.report.add(ReportEntry('measure.value', f"{name}@{cid}",
                                            measure.measure_of(self.state, subobject, cid), None, None, INFO))
        self.report.extend(measure.verify_measure_properties(self.state, self.presheaf, self._pairs()))

        if self.flow is None:
            return
        for name, subobject in sorted(self.subobjects.items()):
            for t in self.scenario.t_grid:
                try:
                    result = measure.group_action_check(self.state, self.flow, t, subobject)
                except PosetNotClosed as exc:
                    self.report.add(ReportEntry('measure.group_action', name, verdict=SKIP, parameter=t,
                                                detail=str(exc)))
                    continue
                self.report.add(ReportEntry('measure.group_action', name, None, None, result['residual'], INFO,
                                            parameter=t, detail=f"pire contexte {result['worst_context']}"))
                if result['lemma_residual'] is not None:
                    self.report.add(ReportEntry.bound('measure.group_action_lemma', name, result['lemma_residual'],
                                                      self.tol.eps_measure, parameter=t))

    def _stage_kms_external(self):
        if self.flow is None:
            self._skip('kms.C1', "aucun flot déclaré")
            return
        scenario = self.scenario
        self.report.extend(kms_external.check_C1(self.state, self.flow, list(self.subobjects.values()),
                                                 scenario.t_grid))
        gammas = self.group.gammas if self.group is not None else None
        for first, second in self._pairs():
            self.report.extend(kms_external.check_C2(
                self.state, self.flow, first, second, t_grid=scenario.t_grid, gammas=gammas,
                require_faithful=scenario.require_faithful,
            ))

    def _stages(self) -> List[StageVR]:
        if self.scenario.stages:
            return [StageVR(s['context'], float(s['r'])) for s in self.scenario.stages]
        return [StageVR(cid, r) for cid in self.poset.ids for r in self.scenario.r_queries]

    def _member_names(self, cid: str) -> Dict[tuple, str]:
        down = self.poset.down_set(cid)
        names = {}
        for name, subobject in self.subobjects.items():
            if set(down) <= subobject.domain:
                names.setdefault(restrict_subobject(subobject, down).key, name)
        return names

    def _stage_truth(self):
        self.truth = kms_external.truth_object(self.state, self.presheaf, cap=self.config.ENUMERATION_CAP)
        stages = self._stages()
        for stage in stages:
            names = self._member_names(stage.context_id)
            members = kms_external.members_at(self.truth, stage.context_id, stage.r)
            labels = sorted(names.get(m.key, m.label) for m in members)
            self.report.add(ReportEntry('truth.members', f"({stage.context_id},{stage.r})", len(members), stage.r,
                                        None, INFO, detail=', '.join(labels)))
        for cid in self.poset.ids:
            down = self.poset.down_set(cid)
            for name, subobject in sorted(self.subobjects.items()):
                if set(down) <= subobject.domain:
                    tau = self.truth.tau(restrict_subobject(subobject, down), cid)
                    self.report.add(ReportEntry('truth.tau', f"{name}@{cid}", tau, None, None, INFO))

        if self.flow is None or not stages:
            return
        for name, spec in sorted(self.scenario.subobjects.items()):
            projection = parse_projection(spec['projection'], self.scenario.dim, self.tol)
            self.report.extend(kms_external.check_truth_value_invariance(
                self.state, self.flow, projection, self.presheaf, stages, self.scenario.t_grid, name=name,
            ))
        for stage in stages:
            self.report.extend(kms_external.check_membership_bound(
                self.state, self.flow, self.truth, stage.context_id, stage.r, self.scenario.t_grid,
            ))

    def _stage_equivalence(self):
        if self.flow is None or self.truth is None:
            self._skip('equivalence.mu', "flot ou objet de vérité absent")
            return
        stages = self._stages()
        for t in self.scenario.t_grid:
            try:
                pulled = kms_external.pullback_truth_object(self.truth, self.flow, t)
            except PosetNotClosed as exc:
                self.report.add(ReportEntry('equivalence.mu', '*', verdict=SKIP, parameter=t, detail=str(exc)))
                continue
            usable = [s for s in stages if s.context_id in pulled.thresholds]
            result = kms_external.mu_equivalent(self.truth, pulled, usable, self.state)
            self.report.add(ReportEntry(
                'equivalence.mu', 'T^ρ ~ α_t*T^ρ', len(result['failing']), len(result['ambiguous']), None,
                PASS if result['equivalent'] else FAIL, parameter=t,
                detail=f"{len(usable)} stades, {len(result['ambiguous'])} correspondances ambiguës",
            ))
            mapping = kms_external.transport_mapping(self.flow.unitary(t))
            self.report.extend(kms_external.strong_mu_equivalence(self.truth, pulled, mapping, usable, self.state))

    def _stage_expectation(self):
        observables = self.scenario.observables
        if not observables:
            self._skip('expectation.trace', "aucun observable déclaré")
            return
        pairs = {
            name: kms_external.spectral_pairs(parse_operator(spec, self.scenario.dim), self.tol)
            for name, spec in sorted(observables.items())
        }
        names = sorted(pairs)
        for name in names:
            value = kms_external.expectation_value(self.state, pairs[name], self.presheaf)
            self.report.add(ReportEntry('expectation.value', name, value, None, None, INFO))
        if self.flow is None:
            return
        first = pairs[names[0]]
        second = pairs[names[1]] if len(names) > 1 else first
        self.report.extend(kms_external.check_expectation_kms(
            self.state, self.flow, first, second, self.presheaf, self.scenario.t_grid,
        ))

    def _stage_internal(self):
        group = self.group
        if group is None:
            self._skip('internal.C1', "aucun échantillon du groupe déclaré")
            return
        for context in self.poset.contexts:
            decomposition = kms_internal.orbits(context, group)
            self.report.add(ReportEntry('internal.orbits', context.id, len(decomposition.classes),
                                        len(decomposition.fixed), None, INFO,
                                        detail='fixes: ' + ', '.join(f"{t:.6g}" for t in decomposition.fixed)))
            classes = kms_internal.classify_automorphisms(context, group)
            self.report.add(ReportEntry('internal.automorphisms', context.id, len(classes['faithful']),
                                        len(classes['middle']), None, INFO,
                                        detail=f"fidèles / intermédiaires, {len(classes['fixing'])} fixant V"))

        for name, subobject in sorted(self.subobjects.items()):
            try:
                self.report.extend(kms_internal.check_internal_C1(self.state, [subobject], group))
            except PosetNotClosed as exc:
                self.report.add(ReportEntry('internal.C1', name, verdict=SKIP, detail=str(exc)))

        # γ = β sur les couples déclarés; γ = 0 contre Σ, où le diagramme redonne C1 interne
        legs = []
        if any(abs(group.flow.beta - g) <= 1e-9 for g in group.gammas):
            legs = [(first, second, group.flow.beta) for first, second in self._pairs()]
        legs += [(s, full_subobject(self.presheaf, s.domain), 0.0) for _, s in sorted(self.subobjects.items())]
        for first, second, gamma in legs:
            try:
                self.report.extend(kms_internal.check_internal_C2(
                    self.state, first, second, group, gamma, require_faithful=self.scenario.require_faithful,
                ))
            except PosetNotClosed as exc:
                self.report.add(ReportEntry('internal.C2', f"{first.label}|{second.label}", verdict=SKIP,
                                            parameter=gamma, detail=str(exc)))

        unitaries = [group.flow.unitary(t) for t in group.samples]
        anchors = sorted(anchor_domain(unitaries, self.poset, self.poset.ids))
        if anchors:
            breve = kms_internal.breve_spectrum(self.presheaf, group, anchors)
            self.report.extend(kms_internal.breve_fiber_summary(breve))
            if self.truth is not None:
                for cid in anchors:
                    self.report.extend(kms_internal.check_breve_truth(self.truth, group, cid))

    def _stage_modular(self):
        scenario = self.scenario
        if not self.state.faithful:
            self._skip('modular.tomita', "état non fidèle")
            return
        data = modular.tomita_operators(self.state, self.tol)
        self.report.extend(modular.check_tomita(data))
        self.report.extend(modular.commutant_swap_check(data))
        reference = scenario.hamiltonian if self.state.label == 'gibbs' else None
        self.report.extend(modular.check_modular_flow(self.state, scenario.beta, scenario.t_grid, reference, self.tol))

        modular_flow = modular.modular_automorphism_flow(self.state, scenario.beta, self.tol)
        try:
            self.report.extend(_renamed(kms_external.check_C1(
                self.state, modular_flow, list(self.subobjects.values()), scenario.t_grid), 'modular'))
            for first, second in self._pairs():
                self.report.extend(_renamed(kms_external.check_C2(
                    self.state, modular_flow, first, second, t_grid=scenario.t_grid), 'modular'))
        except PosetNotClosed as exc:
            self._skip('modular.kms', str(exc))

        target, mapping = modular.jmap_on_contexts(np.eye(scenario.dim), self.poset, self.tol)
        self.report.extend(_renamed(modular.check_order_continuity(mapping, self.poset, target), 'scenario'))
        bipartite_data, bipartite_poset = bipartite_model(scenario.seed, self.tol)
        image, bipartite_mapping = modular.jmap_on_contexts(bipartite_data.J.matrix, bipartite_poset, self.tol)
        self.report.extend(_renamed(modular.check_order_continuity(bipartite_mapping, bipartite_poset, image),
                                    'bipartite'))

    def _stage_reconstruct(self):
        spec = self.scenario.reconstruct
        source = spec.get('source', 'state' if 'table' not in spec else 'table')
        if source == 'state':
            table = measure.measure_table(self.state, self.presheaf)
        else:
            rows = spec.get('table') or []
            missing = sorted({row[0] for row in rows} - set(self.subobjects))
            if missing:
                raise ValidationError(f"Sous-objets inconnus dans la table: {', '.join(missing)}")
            table = AbstractMeasure(
                self.presheaf, self.subobjects, {(row[0], row[1]): float(row[2]) for row in rows},
            )
        try:
            reconstructed, diagnostics = measure.state_from_measure(table, self.tol)
        except (InconsistentTable, NotAdditive, Infeasible) as exc:
            self.report.add(ReportEntry('reconstruct.consistency', 'table', verdict=FAIL,
                                        detail=f"{type(exc).__name__}: {exc}"))
            return
        self.report.sections['reconstruction'] = {
            key: value for key, value in diagnostics.items() if key != 'projections'
        }
        self.report.add(ReportEntry('reconstruct.status', 'table', diagnostics['spanned_dimension'],
                                    diagnostics['hermitian_dimension'], diagnostics['residual'], INFO,
                                    detail=diagnostics['status']))
        if diagnostics['unique'] and source == 'state':
            distance = density_distance(self.state, reconstructed)
            self.report.add(ReportEntry.bound('reconstruct.distance', 'ϱ', distance, RECONSTRUCT_TOL))
        elif not diagnostics['unique']:
            logger.warning(f"⚠️ Reconstruction sous-déterminée ({diagnostics['spanned_dimension']} "
                           f"< {diagnostics['hermitian_dimension']})")
