from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from src.automata.alphabet import Alphabet
from src.automata.errors import AutomatonError

EPSILON = ""

StringSeq = Tuple[str, ...]
Transition = Tuple[str, str, str]


def format_string(s: Sequence[str]) -> str:
    """Human-readable form of an event string; the empty string prints as ε."""
    return " ".join(s) if len(s) else "ε"


def length_lex(strings: Iterable[StringSeq]) -> List[StringSeq]:
    """Sort strings by length, then lexicographically by event name."""
    return sorted(set(strings), key=lambda s: (len(s), s))


def _check_state_name(state: str) -> None:
    if not isinstance(state, str) or not state or any(ch.isspace() for ch in state):
        raise AutomatonError(f"Invalid state name {state!r}")


@dataclass(frozen=True)
class Automaton:
    """
    A finite automaton used for plants, specifications, attack automata,
    observers and computed languages.

    States are whitespace-free string ids. Transitions are
    (source, label, target) triples where the label is an event of the
    alphabet or EPSILON. Every state generates (the generated language is
    prefix-closed); `marked` defines the marked language separately.
    `inserted` holds the states added by attack substitution, so
    `plant_states` are the original plant states.
    """

    name: str
    states: FrozenSet[str]
    alphabet: Alphabet
    transitions: FrozenSet[Transition]
    initial: str
    marked: FrozenSet[str]
    inserted: FrozenSet[str] = field(default=frozenset())
    _delta: Dict[Tuple[str, str], FrozenSet[str]] = field(init=False, repr=False, compare=False, hash=False)
    _out: Dict[str, List[Tuple[str, str]]] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "states", frozenset(self.states))
        object.__setattr__(self, "transitions", frozenset(tuple(t) for t in self.transitions))
        object.__setattr__(self, "marked", frozenset(self.marked))
        object.__setattr__(self, "inserted", frozenset(self.inserted))

        if not self.name or any(ch.isspace() for ch in self.name):
            raise AutomatonError(f"Invalid automaton name {self.name!r}")
        for state in self.states:
            _check_state_name(state)
        if self.initial not in self.states:
            raise AutomatonError(f"{self.name}: initial state {self.initial!r} is not a state")
        if not self.marked <= self.states:
            raise AutomatonError(f"{self.name}: marked states not declared: {sorted(self.marked - self.states)}")
        if not self.inserted <= self.states:
            raise AutomatonError(f"{self.name}: inserted states not declared: {sorted(self.inserted - self.states)}")

        delta: Dict[Tuple[str, str], Set[str]] = defaultdict(set)
        out: Dict[str, List[Tuple[str, str]]] = defaultdict(list)
        for source, label, target in self.transitions:
            if source not in self.states or target not in self.states:
                raise AutomatonError(f"{self.name}: transition ({source}, {label}, {target}) has an undeclared endpoint")
            if label != EPSILON and label not in self.alphabet.events:
                raise AutomatonError(f"{self.name}: transition label {label!r} not in alphabet")
            delta[(source, label)].add(target)
            out[source].append((label, target))
        object.__setattr__(self, "_delta", {key: frozenset(value) for key, value in delta.items()})
        object.__setattr__(self, "_out", {key: sorted(value) for key, value in out.items()})

    @classmethod
    def build(
        cls,
        name: str,
        alphabet: Alphabet,
        transitions: Iterable[Transition],
        initial: str,
        marked: Optional[Iterable[str]] = None,
        states: Optional[Iterable[str]] = None,
        inserted: Iterable[str] = (),
    ) -> "Automaton":
        """
        Convenience constructor.

        Args:
            name: Automaton name
            alphabet: Event attributes
            transitions: (source, label, target) triples
            initial: Initial state
            marked: Marked states (default: every state)
            states: Declared states (default: endpoints plus the initial state)
            inserted: Attack-inserted states

        Returns:
            The new automaton
        """
        transitions = [tuple(t) for t in transitions]
        all_states = set(states) if states is not None else set()
        all_states.add(initial)
        for source, _, target in transitions:
            all_states.update((source, target))
        return cls(
            name=name,
            states=frozenset(all_states),
            alphabet=alphabet,
            transitions=frozenset(transitions),
            initial=initial,
            marked=frozenset(all_states if marked is None else marked),
            inserted=frozenset(inserted),
        )

    @property
    def plant_states(self) -> FrozenSet[str]:
        return self.states - self.inserted

    @property
    def is_deterministic(self) -> bool:
        return all(label != EPSILON and len(targets) == 1 for (_, label), targets in self._delta.items())

    def tag_of(self, state: str) -> str:
        return "inserted" if state in self.inserted else "plant"

    def successors(self, state: str, label: str) -> FrozenSet[str]:
        return self._delta.get((state, label), frozenset())

    def outgoing(self, state: str) -> List[Tuple[str, str]]:
        """Sorted (label, target) pairs leaving `state`."""
        return self._out.get(state, [])

    def enabled(self, state: str) -> List[str]:
        """Sorted events (not ε) with a transition from `state`."""
        return sorted({label for label, _ in self.outgoing(state) if label != EPSILON})

    def step(self, state: str, event: str) -> Optional[str]:
        """Deterministic successor, or None when undefined."""
        targets = self._delta.get((state, event))
        if not targets:
            return None
        if len(targets) > 1:
            raise AutomatonError(f"{self.name}: nondeterministic on ({state}, {event})")
        return next(iter(targets))

    def has_transition(self, source: str, event: str, target: str) -> bool:
        return target in self._delta.get((source, event), frozenset())

    def epsilon_closure(self, states: Iterable[str]) -> FrozenSet[str]:
        """Unobservable reach: every state reachable through ε-transitions."""
        closure = set(states)
        stack = list(closure)
        while stack:
            state = stack.pop()
            for target in self.successors(state, EPSILON):
                if target not in closure:
                    closure.add(target)
                    stack.append(target)
        return frozenset(closure)

    def post(self, states: Iterable[str], event: str) -> FrozenSet[str]:
        """ε-closed set of states reached from `states` by one `event` step."""
        reached: Set[str] = set()
        for state in states:
            reached.update(self.successors(state, event))
        return self.epsilon_closure(reached)

    def run(self, s: Sequence[str]) -> Optional[str]:
        """State reached by a deterministic automaton on `s`, or None."""
        state = self.initial
        for event in s:
            state = self.step(state, event)
            if state is None:
                return None
        return state

    def renamed(self, name: str) -> "Automaton":
        return replace(self, name=name)

    def to_networkx(self) -> nx.MultiDiGraph:
        """Graph view: one node per state, one keyed edge per transition."""
        graph = nx.MultiDiGraph(name=self.name)
        for state in sorted(self.states):
            graph.add_node(state, marked=state in self.marked, tag=self.tag_of(state))
        for source, label, target in sorted(self.transitions):
            graph.add_edge(source, target, key=label, label=label)
        return graph

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "alphabet": self.alphabet.to_dict(),
            "states": sorted(self.states),
            "initial": self.initial,
            "marked": sorted(self.marked),
            "inserted": sorted(self.inserted),
            "transitions": [list(t) for t in sorted(self.transitions)],
        }


@dataclass(frozen=True)
class Verdict:
    """
    Outcome of a property check.

    `witness` (plus `event` where the property is about a continuation)
    is present exactly when the property fails and a counterexample
    exists. `bounded` marks verdicts obtained by depth-limited search.
    """

    holds: bool
    witness: Optional[StringSeq] = None
    event: Optional[str] = None
    detail: str = ""
    bounded: bool = False

    @classmethod
    def success(cls, detail: str = "", bounded: bool = False) -> "Verdict":
        return cls(True, None, None, detail, bounded)

    @classmethod
    def failure(cls, witness: Sequence[str], event: Optional[str] = None, detail: str = "",
                bounded: bool = False) -> "Verdict":
        return cls(False, tuple(witness), event, detail, bounded)

    def witness_text(self) -> str:
        if self.witness is None:
            return ""
        text = format_string(self.witness)
        return f"({text}, {self.event})" if self.event is not None else text

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "witness": list(self.witness) if self.witness is not None else None,
            "event": self.event,
            "detail": self.detail,
            "bounded": self.bounded,
        }
