"""
Coordination control of two attacked components: local plants extended
by coordinator events, local specifications and attacks, and the local
CA-supervisors whose conjunction achieves the global specification.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Tuple

from src.attacks.attack_model import AttackSpec, TransitionKey, pull_back_attack
from src.automata.automaton import Automaton, Verdict
from src.automata.errors import AttackModelError, AutomatonError
from src.automata.operations import (
    accessible,
    compose_parallel,
    project,
    refine_with_spec,
    restrict_to_safe_states,
    synchronous_product,
)
from src.config import get_settings
from src.coordination.decomposition import (
    DecompositionReport,
    check_conditional_decomposability,
    check_observer_property,
    extend_coordinator,
)
from src.estimation.synthesis import (
    SupervisorRealization,
    check_ca_controllability,
    check_ca_observability,
    synthesize_ca_supervisor,
)
from src.verification.oracles import assumption_one_bounded

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoordinationProblem:
    """
    Two components, a global specification and the sensor attacks.

    The specification is either an automaton `spec` (K = L(spec) ∩ L(G))
    or a set `safe` of states of G = g1 || g2. Attacks are given either
    globally on G or per component.
    """

    g1: Automaton
    g2: Automaton
    spec: Optional[Automaton] = None
    safe: Optional[FrozenSet[str]] = None
    coordinator: FrozenSet[str] = frozenset()
    extend: bool = True
    attack: Optional[AttackSpec] = None
    attack1: Optional[AttackSpec] = None
    attack2: Optional[AttackSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "coordinator", frozenset(self.coordinator))
        if (self.spec is None) == (self.safe is None):
            raise AutomatonError("Give the specification either as an automaton or as a set of safe states")
        if self.attack is not None and (self.attack1 is not None or self.attack2 is not None):
            raise AttackModelError("Give attacks either on the global plant or per component, not both")


def build_local_plant(gi: Automaton, gj: Automaton, sk: FrozenSet[str], name: Optional[str] = None) -> Automaton:
    """G̃_i = G_i || P_k(G_j) over Σ_i ∪ Σ_k."""
    sk = frozenset(sk)
    shared = gi.alphabet.events & gj.alphabet.events
    if not shared <= sk:
        raise AutomatonError(f"Coordinator events must contain the shared events {sorted(shared)}")
    local = compose_parallel(gi, project(gj, sk & gj.alphabet.events, name=f"Pk({gj.name})"))
    return local.renamed(name or f"{gi.name}~")


def lift_component_attacks(g: Automaton, component_of: Mapping[str, Tuple[str, str]],
                           atk1: Optional[AttackSpec], atk2: Optional[AttackSpec],
                           alphabets: Tuple[FrozenSet[str], FrozenSet[str]]) -> AttackSpec:
    """
    Global attack specification on G = G1 || G2 from component attack specifications.

    A transition of G is attacked with F when its move in a component that
    owns the event is attacked there with F.

    Raises:
        AttackModelError: the two components attack the same move differently
    """
    specs = (atk1 or AttackSpec.empty("G1"), atk2 or AttackSpec.empty("G2"))
    entries = []
    for source, event, target in sorted(g.transitions):
        found = []
        for i, (spec, events) in enumerate(zip(specs, alphabets)):
            if event not in events:
                continue
            f = spec.get((component_of[source][i], event, component_of[target][i]))
            if f is not None:
                found.append(f)
        if len(found) == 2 and found[0] != found[1]:
            raise AttackModelError(f"Components attack ({source}, {event}, {target}) with "
                                   f"{found[0].name} and {found[1].name}")
        if found:
            entries.append((TransitionKey(source, event, target), found[0]))
    return AttackSpec(g.name, tuple(entries))


def derive_local_attack(global_atk: AttackSpec, g: Automaton, local: Automaton) -> AttackSpec:
    """
    Local attack specification seen by a supervisor of `local`.

    Walks G and the local plant in step (the local plant moves on its own
    events only). An attacked global move on a local event attacks the
    matching local transition with F projected onto the local events.

    Raises:
        AttackModelError: a global move has no local counterpart, or one
            local transition would be attacked in two different ways
    """
    events = local.alphabet.events
    projected: Dict[Automaton, Automaton] = {}
    chosen: Dict[TransitionKey, Optional[Automaton]] = {}

    start = (g.initial, local.initial)
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for event, x_next in g.outgoing(x):
            y_next = y
            if event in events:
                y_next = local.step(y, event)
                if y_next is None:
                    raise AttackModelError(f"Move ({x}, {event}, {x_next}) of {g.name} has no counterpart "
                                           f"at {y} in {local.name}")
                f = global_atk.get((x, event, x_next))
                if f is not None and f not in projected:
                    projected[f] = project(f, f.alphabet.events & events, name=f"{f.name}@{local.name}")
                local_f = projected[f] if f is not None else None
                key = TransitionKey(y, event, y_next)
                if key in chosen and chosen[key] != local_f:
                    raise AttackModelError(f"Local transition {key} of {local.name} is attacked inconsistently")
                chosen[key] = local_f
            pair = (x_next, y_next)
            if pair not in seen:
                seen.add(pair)
                queue.append(pair)

    entries = tuple((key, f) for key, f in chosen.items() if f is not None)
    return AttackSpec(local.name, entries)


@dataclass
class ComponentReport:
    """Outcome of the local checks for one component."""

    plant: str
    alphabet: FrozenSet[str]
    extended_alphabet: FrozenSet[str]
    observer_property: Optional[Verdict] = None
    assumption: Optional[Verdict] = None
    controllability: Optional[Verdict] = None
    observability: Optional[Verdict] = None

    @property
    def holds(self) -> bool:
        gates = (self.assumption, self.controllability, self.observability)
        return all(v is not None and v.holds for v in gates)

    def lines(self) -> List[str]:
        lines = [f"{self.plant}: alphabet {{{', '.join(sorted(self.alphabet))}}} "
                 f"extended to {{{', '.join(sorted(self.extended_alphabet))}}}"]
        for label, verdict in (("observer property (advisory)", self.observer_property),
                               ("local observations (bounded)", self.assumption),
                               ("CA-controllability", self.controllability),
                               ("CA-observability", self.observability)):
            if verdict is None:
                lines.append(f"  {label}: not checked")
            elif verdict.holds:
                lines.append(f"  {label}: holds")
            else:
                lines.append(f"  {label}: FAILS, witness {verdict.witness_text()}")
        return lines

    def to_dict(self) -> Dict[str, Any]:
        def dump(v: Optional[Verdict]):
            return v.to_dict() if v is not None else None

        return {
            "plant": self.plant,
            "alphabet": sorted(self.alphabet),
            "extended_alphabet": sorted(self.extended_alphabet),
            "observer_property": dump(self.observer_property),
            "assumption": dump(self.assumption),
            "controllability": dump(self.controllability),
            "observability": dump(self.observability),
        }


@dataclass
class CoordinationReport:
    coordinator: FrozenSet[str]
    coordinator_source: str
    extension_steps: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()
    decomposition: Optional[DecompositionReport] = None
    components: List[ComponentReport] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def holds(self) -> bool:
        return (self.error is None and self.decomposition is not None and self.decomposition.decomposable
                and len(self.components) == 2 and all(c.holds for c in self.components))

    def lines(self) -> List[str]:
        lines = [f"coordinator events: {{{', '.join(sorted(self.coordinator))}}} ({self.coordinator_source})"]
        for event, counterexample in self.extension_steps:
            lines.append(f"  added {event} for counterexample {' '.join(counterexample) or 'ε'}")
        if self.decomposition is not None:
            lines.extend(self.decomposition.lines())
        for component in self.components:
            lines.extend(component.lines())
        if self.error:
            lines.append(f"error: {self.error}")
        lines.append("coordination: " + ("local supervisors synthesized" if self.holds else "FAILED"))
        return lines

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "coordinator": sorted(self.coordinator),
            "coordinator_source": self.coordinator_source,
            "extension_steps": [{"added": e, "counterexample": list(s)} for e, s in self.extension_steps],
            "decomposition": self.decomposition.to_dict() if self.decomposition else None,
            "components": [c.to_dict() for c in self.components],
            "error": self.error,
        }


@dataclass
class CoordinationResult:
    """Report plus every artifact of the pipeline; supervisors only on success."""

    report: CoordinationReport
    plant: Automaton
    spec: Automaton
    global_attack: AttackSpec
    local_plants: List[Automaton] = field(default_factory=list)
    local_specs: List[Automaton] = field(default_factory=list)
    local_attacks: List[AttackSpec] = field(default_factory=list)
    supervisors: List[SupervisorRealization] = field(default_factory=list)


def _global_spec(p: CoordinationProblem, g: Automaton) -> Automaton:
    if p.spec is not None:
        stray = p.spec.alphabet.events - g.alphabet.events
        if stray:
            raise AutomatonError(f"Specification {p.spec.name} uses events outside the plant: {sorted(stray)}")
        refinement = refine_with_spec(g, p.spec)
        return accessible(restrict_to_safe_states(refinement.plant, refinement.safe, name="K"))
    return accessible(restrict_to_safe_states(g, p.safe, name="K"))


def coordination_synthesize(p: CoordinationProblem, assumption_depth: Optional[int] = None) -> CoordinationResult:
    """
    End-to-end coordination synthesis.

    Args:
        p: The coordination problem
        assumption_depth: Depth of the bounded local-observation check
            (default DESA_ASSUMPTION_DEPTH)

    Returns:
        CoordinationResult; `report.holds` is true exactly when K is
        conditionally decomposable and both local plants pass the local
        observation, CA-controllability and CA-observability checks, in
        which case both supervisors are present
    """
    depth = get_settings().assumption_depth if assumption_depth is None else assumption_depth
    g, component_of = synchronous_product(p.g1, p.g2, name="G")
    k = _global_spec(p, g)
    s1, s2 = p.g1.alphabet.events, p.g2.alphabet.events

    if p.attack is not None:
        global_atk = AttackSpec(g.name, p.attack.entries)
    else:
        global_atk = lift_component_attacks(g, component_of, p.attack1, p.attack2, (s1, s2))
    global_atk.validate(g)

    if p.extend:
        extension = extend_coordinator(k, s1, s2, p.coordinator)
        coordinator, steps = extension.alphabet, extension.steps
    else:
        coordinator, steps = p.coordinator | (s1 & s2), ()
    source = "extended" if steps else "given"
    report = CoordinationReport(coordinator, source, steps)
    result = CoordinationResult(report, g, k, global_atk)

    report.decomposition = check_conditional_decomposability(k, s1, s2, coordinator)
    if not report.decomposition.decomposable:
        logger.info("coordination stops: %s", report.decomposition.lines()[-1])
        return result

    components = ((1, p.g1, p.g2), (2, p.g2, p.g1))
    for i, gi, gj in components:
        local = build_local_plant(gi, gj, coordinator, name=f"plant{i}")
        component = ComponentReport(local.name, gi.alphabet.events, local.alphabet.events)
        report.components.append(component)
        component.observer_property = check_observer_property(gj, coordinator & gj.alphabet.events)
        if not component.observer_property.holds:
            logger.warning("projection of %s onto the coordinator events lacks the observer property: %s",
                           gj.name, component.observer_property.detail)

        try:
            local_atk = derive_local_attack(global_atk, g, local)
        except AttackModelError as e:
            report.error = str(e)
            logger.warning("%s", e)
            return result
        component.assumption = assumption_one_bounded(g, global_atk, local, local_atk, depth, label=local.name)

        pk = project(k, local.alphabet.events, name=f"P{i}(K)")
        refinement = refine_with_spec(local, pk)
        plant = refinement.plant
        h = restrict_to_safe_states(plant, refinement.safe, name=f"H{i}")
        attack = pull_back_attack(local_atk, plant, refinement.component_of, name=plant.name)
        result.local_plants.append(plant)
        result.local_specs.append(h)
        result.local_attacks.append(attack)

        component.controllability = check_ca_controllability(plant, h, plant.alphabet)
        component.observability = check_ca_observability(plant, h, attack, plant.alphabet)
        logger.info("%s: %d states, CA-controllable %s, CA-observable %s", plant.name, len(plant.states),
                    component.controllability.holds, component.observability.holds)

    if report.holds:
        result.supervisors = [
            synthesize_ca_supervisor(plant, h, attack, plant.alphabet, force=True, name=f"sup{i}")
            for i, (plant, h, attack) in enumerate(zip(result.local_plants, result.local_specs,
                                                       result.local_attacks), start=1)
        ]
    return result
