"""
Seeded adversarial closed-loop simulation of attacked, supervised plants.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from src.attacks.attack_model import AttackSpec, actuator_pattern_bounds, trim_states
from src.automata.automaton import Automaton, StringSeq, format_string
from src.automata.operations import project
from src.config import get_settings
from src.estimation.synthesis import SupervisorRealization
from src.estimation.tracker import OFF_DOMAIN

logger = logging.getLogger(__name__)

ATTACKER_MODES = ("random", "maximal")


@dataclass
class SimConfig:
    """
    Simulation settings.

    `attacker_mode="random"` samples attack words and actuator tampering.
    `"maximal"` is a greedy per-step attacker: it tampers up to the upper
    actuator bound and reports, for each attacked transition, the attacked
    observation that leads the supervisor to its largest pattern. It does
    not plan ahead along the large-language tracker, so it approximates the
    most permissive attacker and its runs stay inside the large language.
    """

    runs: int = 100
    max_depth: int = 20
    seed: int = 0
    attacker_mode: str = "random"

    # Geometric stopping probability at marked attack-automaton states
    damping: Optional[float] = None
    # Attack walk length before completing along a shortest path
    max_attack_walk: Optional[int] = None

    record_traces: bool = False

    def __post_init__(self):
        if self.runs < 1 or self.max_depth < 1:
            raise ValueError("runs and max_depth must be at least 1")
        if self.attacker_mode not in ATTACKER_MODES:
            raise ValueError(f"attacker_mode must be one of {ATTACKER_MODES}, got {self.attacker_mode!r}")
        settings = get_settings()
        if self.damping is None:
            self.damping = settings.sim_damping
        if self.max_attack_walk is None:
            self.max_attack_walk = settings.max_attack_walk
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must be in (0, 1], got {self.damping}")


class Step(NamedTuple):
    event: str
    observed: Tuple[Optional[StringSeq], ...]
    patterns: Tuple[Tuple[Tuple[str, ...], Tuple[str, ...]], ...]


@dataclass
class RunTrace:
    run: int
    steps: List[Step] = field(default_factory=list)

    @property
    def string(self) -> StringSeq:
        return tuple(step.event for step in self.steps)


class Violation(NamedTuple):
    run: int
    string: StringSeq
    position: int


@dataclass
class SimReport:
    runs_executed: int
    violations: List[Violation]
    coverage: int
    seed: int
    traces: List[RunTrace] = field(default_factory=list)

    def lines(self) -> List[str]:
        lines = [f"seed: {self.seed}", f"runs: {self.runs_executed}",
                 f"coverage: {self.coverage}", f"violations: {len(self.violations)}"]
        lines.extend(f"  run {v.run}: {format_string(v.string)} (unsafe at position {v.position})"
                     for v in self.violations)
        return lines

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "runs": self.runs_executed,
            "coverage": self.coverage,
            "violations": [{"run": v.run, "string": list(v.string), "position": v.position} for v in self.violations],
        }


class _Component:
    """One supervised local plant with its attacker."""

    def __init__(self, plant: Automaton, sup: SupervisorRealization, attack: AttackSpec, cfg: SimConfig):
        self.plant = plant
        self.sup = sup
        self.attack = attack
        self.cfg = cfg
        self.observable = sup.observer.observable
        self.free = plant.alphabet.uncontrollable
        self._walks: Dict[Automaton, Tuple[nx.MultiDiGraph, frozenset]] = {}
        self._projected: Dict[Automaton, Automaton] = {}

    def pattern(self, x: Optional[str], rng: np.random.Generator) -> Tuple[frozenset, frozenset]:
        """Issued pattern and the pattern after actuator tampering."""
        gamma = self.sup.pattern_at(x) & self.plant.alphabet.events
        bounds = actuator_pattern_bounds(gamma, self.plant.alphabet)
        if self.cfg.attacker_mode == "maximal":
            return gamma, bounds.upper
        optional = sorted(bounds.upper - bounds.lower)
        chosen = {event for event in optional if rng.random() < 0.5}
        return gamma, bounds.lower | chosen

    def _walk_graph(self, f: Automaton):
        cached = self._walks.get(f)
        if cached is None:
            kept = trim_states(f)
            cached = (f.to_networkx().subgraph(kept).copy(), kept)
            self._walks[f] = cached
        return cached

    def attack_word(self, f: Automaton, rng: np.random.Generator) -> StringSeq:
        """
        Random walk on the trim part of `f`: at a marked state stop with
        probability `damping`; past `max_attack_walk` steps finish along a
        shortest path to a marked state.
        """
        graph, _ = self._walk_graph(f)
        state, word = f.initial, []
        while len(word) < self.cfg.max_attack_walk:
            moves = sorted((label, target) for _, target, label in graph.out_edges(state, keys=True))
            if state in f.marked and (not moves or rng.random() < self.cfg.damping):
                return tuple(word)
            label, state = moves[int(rng.integers(len(moves)))]
            word.append(label)
        if state not in f.marked:
            lengths = nx.single_source_shortest_path_length(graph, state)
            nearest = min((d, m) for m, d in lengths.items() if m in f.marked)[1]
            path = nx.shortest_path(graph, state, nearest)
            for source, target in zip(path, path[1:]):
                word.append(min(graph[source][target]))
        return tuple(word)

    def advance(self, x: Optional[str], fragment: StringSeq) -> Optional[str]:
        for event in fragment:
            if x is None:
                return None
            x = self.sup.observer.automaton.step(x, event)
        return x

    def _best_observation(self, x: Optional[str], f: Automaton) -> StringSeq:
        """Observation of the attack language leading to the observer state with the largest pattern."""
        projected = self._projected.get(f)
        if projected is None:
            projected = project(f, f.alphabet.events & self.observable)
            self._projected[f] = projected
        start = (x, projected.initial)
        words = {start: ()}
        queue = deque([start])
        best: Optional[Tuple[int, str, StringSeq]] = None
        while queue:
            y, p = queue.popleft()
            word = words[(y, p)]
            if p in projected.marked:
                size = len(self.sup.pattern_at(y))
                key = (-size, y or OFF_DOMAIN, word)
                if best is None or key[:2] < best[:2]:
                    best = key
            for event, p_next in projected.outgoing(p):
                pair = (y and self.sup.observer.automaton.step(y, event), p_next)
                if pair not in words:
                    words[pair] = word + (event,)
                    queue.append(pair)
        return best[2]

    def observe(self, x: Optional[str], transition: Tuple[str, str, str], rng: np.random.Generator) -> StringSeq:
        f = self.attack.get(transition)
        if f is None:
            return (transition[1],) if transition[1] in self.observable else ()
        if self.cfg.attacker_mode == "maximal":
            return self._best_observation(x, f)
        return tuple(e for e in self.attack_word(f, rng) if e in self.observable)


def simulate_closed_loop(plants: Sequence[Automaton], sups: Sequence[SupervisorRealization],
                         attacks: Sequence[AttackSpec], spec: Automaton, cfg: SimConfig) -> SimReport:
    """
    Run seeded episodes of the attacked closed loop.

    At each step every supervisor issues the pattern of its current
    observer state, the actuator attacker tampers with it within its
    bounds, and one event that is defined in every plant sharing it and
    enabled by each of their tampered patterns is chosen uniformly. Sensor
    attackers rewrite the observations of attacked transitions. Each run
    stops at its first string outside L(spec).

    Args:
        plants: Local plants (one per supervisor)
        sups: Local supervisors
        attacks: Local attack specifications
        spec: Deterministic automaton generating K
        cfg: Simulation settings

    Returns:
        SimReport; identical inputs and seed give identical reports
    """
    if not len(plants) == len(sups) == len(attacks):
        raise ValueError("plants, supervisors and attacks must have the same length")
    components = [_Component(p, s, a, cfg) for p, s, a in zip(plants, sups, attacks)]
    events = sorted(set().union(*(p.alphabet.events for p in plants)))
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.runs)

    violations: List[Violation] = []
    traces: List[RunTrace] = []
    executed = set()
    for run, child in enumerate(children):
        rng = np.random.default_rng(child)
        states = [c.plant.initial for c in components]
        views: List[Optional[str]] = [c.sup.observer.initial for c in components]
        trace = RunTrace(run)
        s: StringSeq = ()
        for _ in range(cfg.max_depth):
            patterns = [c.pattern(x, rng) for c, x in zip(components, views)]
            enabled = []
            for event in events:
                allowed = True
                for c, q, (_, tampered) in zip(components, states, patterns):
                    if event not in c.plant.alphabet.events:
                        continue
                    if c.plant.step(q, event) is None or not (event in tampered or event in c.free):
                        allowed = False
                        break
                if allowed:
                    enabled.append(event)
            if not enabled:
                break

            event = enabled[int(rng.integers(len(enabled)))]
            observed = []
            for i, c in enumerate(components):
                if event not in c.plant.alphabet.events:
                    observed.append(None)
                    continue
                target = c.plant.step(states[i], event)
                fragment = c.observe(views[i], (states[i], event, target), rng)
                views[i] = c.advance(views[i], fragment)
                states[i] = target
                observed.append(fragment)
            s = s + (event,)
            executed.add(s)
            if cfg.record_traces:
                trace.steps.append(Step(event, tuple(observed),
                                        tuple((tuple(sorted(g)), tuple(sorted(t))) for g, t in patterns)))
            if spec.run(s) is None:
                violations.append(Violation(run, s, len(s)))
                logger.debug("run %d left the specification: %s", run, format_string(s))
                break
        if cfg.record_traces:
            traces.append(trace)

    return SimReport(cfg.runs, violations, len(executed), cfg.seed, traces)
