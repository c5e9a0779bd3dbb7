"""
Tracker: deterministic product of the plant with the sets of observer
states reachable under every attacked observation of the plant string.

A tracker state (q, W) reached by s satisfies q = δ(q0, s) and
W = {ξ(x0, w) : w ∈ Φ^a(s)}, where observations whose observer run is
undefined are collapsed into the OFF_DOMAIN marker.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from src.attacks.attack_model import AttackSpec
from src.automata.alphabet import Alphabet
from src.automata.automaton import Automaton, StringSeq
from src.automata.errors import AutomatonError
from src.automata.operations import pair_name, project, subset_name
from src.estimation.observer import ObserverAutomaton

logger = logging.getLogger(__name__)

OFF_DOMAIN = "<off>"


@dataclass(frozen=True)
class TrackerState:
    plant: str
    views: FrozenSet[str]

    @property
    def name(self) -> str:
        return pair_name(self.plant, subset_name(self.views))


class ObservationStepper:
    """
    Update of the view set W along one plant transition.

    Projected attack automata are computed once per attack automaton and
    cached.
    """

    def __init__(self, observer: ObserverAutomaton, attack: AttackSpec):
        self.observer = observer
        self.attack = attack
        self._projected: Dict[Automaton, Automaton] = {}

    def advance(self, x: str, event: str) -> str:
        if x == OFF_DOMAIN:
            return OFF_DOMAIN
        return self.observer.automaton.step(x, event) or OFF_DOMAIN

    def _projected_attack(self, f: Automaton) -> Automaton:
        cached = self._projected.get(f)
        if cached is None:
            cached = project(f, f.alphabet.events & self.observer.observable, name=f"P({f.name})")
            self._projected[f] = cached
        return cached

    def reach_set(self, x: str, language: Automaton) -> FrozenSet[str]:
        """{ξ(x, u) : u marked by the deterministic `language`}, with OFF_DOMAIN for undefined runs."""
        start = (x, language.initial)
        seen = {start}
        queue = deque([start])
        reached = set()
        while queue:
            y, f = queue.popleft()
            if f in language.marked:
                reached.add(y)
            for event, f_next in language.outgoing(f):
                pair = (self.advance(y, event), f_next)
                if pair not in seen:
                    seen.add(pair)
                    queue.append(pair)
        return frozenset(reached)

    def step(self, views: FrozenSet[str], transition: Tuple[str, str, str]) -> FrozenSet[str]:
        f = self.attack.get(transition)
        event = transition[1]
        if f is not None:
            projected = self._projected_attack(f)
            return frozenset().union(*(self.reach_set(x, projected) for x in sorted(views)))
        if event not in self.observer.observable:
            return views
        return frozenset(self.advance(x, event) for x in views)

    def initial_views(self) -> FrozenSet[str]:
        return frozenset({self.observer.initial})


@dataclass(frozen=True)
class Tracker:
    """Reachable tracker states in breadth-first order with their shortest access strings."""

    plant_name: str
    initial: TrackerState
    states: Tuple[TrackerState, ...]
    transitions: Mapping[Tuple[TrackerState, str], TrackerState]
    access: Mapping[TrackerState, StringSeq]

    def step(self, state: TrackerState, event: str) -> Optional[TrackerState]:
        return self.transitions.get((state, event))

    def drive(self, s: Sequence[str]) -> Optional[TrackerState]:
        """Tracker state reached by the plant string `s`, or None."""
        state = self.initial
        for event in s:
            state = self.step(state, event)
            if state is None:
                return None
        return state

    def to_automaton(self, name: str, alphabet: Alphabet) -> Automaton:
        """Deterministic automaton over the tracker graph; states t0..tn in exploration order, all marked."""
        index = {state: f"t{i}" for i, state in enumerate(self.states)}
        transitions = [(index[src], event, index[dst]) for (src, event), dst in self.transitions.items()]
        return Automaton.build(name, alphabet, transitions, index[self.initial], states=index.values())


Admission = Callable[[TrackerState, str], bool]


def explore(plant: Automaton, stepper: ObservationStepper, admit: Optional[Admission] = None) -> Tracker:
    """
    Breadth-first exploration of the tracker over the transitions of
    `plant` that `admit` accepts (all of them by default). Events are
    tried in sorted order, so access strings are length-lexicographically
    minimal.
    """
    initial = TrackerState(plant.initial, stepper.initial_views())
    order: List[TrackerState] = [initial]
    access: Dict[TrackerState, StringSeq] = {initial: ()}
    transitions: Dict[Tuple[TrackerState, str], TrackerState] = {}
    queue = deque([initial])
    while queue:
        state = queue.popleft()
        for event, q_next in plant.outgoing(state.plant):
            if admit is not None and not admit(state, event):
                continue
            target = TrackerState(q_next, stepper.step(state.views, (state.plant, event, q_next)))
            transitions[(state, event)] = target
            if target not in access:
                access[target] = access[state] + (event,)
                order.append(target)
                queue.append(target)
    logger.debug("tracker over %s: %d states", plant.name, len(order))
    return Tracker(plant.name, initial, tuple(order), transitions, access)


def build_tracker(g: Automaton, h: Automaton, obs: ObserverAutomaton, atk: AttackSpec) -> Tracker:
    """Tracker over the transitions of the safe sub-automaton `h` of `g` under the attacks of `g`."""
    if not h.transitions <= g.transitions or h.initial != g.initial:
        raise AutomatonError(f"{h.name} is not a sub-automaton of {g.name}")
    stepper = ObservationStepper(obs, atk)
    return explore(h, stepper)


def views_after(tracker: Tracker, s: Iterable[str]) -> Optional[FrozenSet[str]]:
    state = tracker.drive(tuple(s))
    return None if state is None else state.views
