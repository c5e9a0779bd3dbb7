"""
Sensor and actuator attack models.

A sensor attack replaces the observation of an attacked plant transition
by any string of its attack language A_tr = L_m(F_tr). An actuator attack
adds or removes actuator-attackable events from a control pattern.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from src.automata.alphabet import Alphabet
from src.automata.automaton import EPSILON, Automaton, format_string
from src.automata.errors import AttackModelError
from src.automata.operations import project

logger = logging.getLogger(__name__)


class TransitionKey(NamedTuple):
    source: str
    event: str
    target: str

    def __str__(self) -> str:
        return f"({self.source}, {self.event}, {self.target})"


def _validate_attack_automaton(key: TransitionKey, f: Automaton) -> None:
    if not f.is_deterministic:
        raise AttackModelError(f"Attack automaton {f.name} for {key} must be deterministic and ε-free")
    if not trim_states(f):
        raise AttackModelError(f"Attack automaton {f.name} for {key} marks the empty language")


@dataclass(frozen=True)
class AttackSpec:
    """
    Attack automata F_tr keyed by the attacked plant transitions (δ^a).

    Entries are kept sorted by transition key so equal specifications
    compare and serialize identically.
    """

    plant_name: str
    entries: Tuple[Tuple[TransitionKey, Automaton], ...] = ()

    def __post_init__(self):
        entries = tuple(sorted(((TransitionKey(*key), f) for key, f in self.entries), key=lambda item: item[0]))
        keys = [key for key, _ in entries]
        if len(set(keys)) != len(keys):
            raise AttackModelError(f"Duplicate attacked transition in attack on {self.plant_name}")
        for key, f in entries:
            _validate_attack_automaton(key, f)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def empty(cls, plant_name: str) -> "AttackSpec":
        return cls(plant_name, ())

    @classmethod
    def from_mapping(cls, plant_name: str, mapping: Mapping[Tuple[str, str, str], Automaton]) -> "AttackSpec":
        return cls(plant_name, tuple((TransitionKey(*key), f) for key, f in mapping.items()))

    @classmethod
    def for_event(cls, plant: Automaton, event: str, f: Automaton) -> "AttackSpec":
        """Attack every transition of `plant` labelled `event` with the same automaton."""
        keys = [TransitionKey(*t) for t in sorted(plant.transitions) if t[1] == event]
        if not keys:
            raise AttackModelError(f"No transition of {plant.name} is labelled {event!r}")
        return cls(plant.name, tuple((key, f) for key in keys))

    @property
    def keys(self) -> List[TransitionKey]:
        return [key for key, _ in self.entries]

    @property
    def events(self) -> FrozenSet[str]:
        return frozenset(key.event for key, _ in self.entries)

    def get(self, key: Tuple[str, str, str]) -> Optional[Automaton]:
        for candidate, f in self.entries:
            if candidate == key:
                return f
        return None

    def as_dict(self) -> Dict[TransitionKey, Automaton]:
        return dict(self.entries)

    def attack_automata(self) -> List[Automaton]:
        """Distinct attack automata, by name, in first-use order."""
        seen: Dict[str, Automaton] = {}
        for _, f in self.entries:
            known = seen.setdefault(f.name, f)
            if known != f:
                raise AttackModelError(f"Two different attack automata are named {f.name}")
        return list(seen.values())

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: object) -> bool:
        return self.get(key) is not None  # type: ignore[arg-type]

    def merged(self, other: "AttackSpec") -> "AttackSpec":
        return AttackSpec(self.plant_name, self.entries + other.entries)

    def validate(self, plant: Automaton) -> None:
        """
        Check the specification against its host plant.

        Raises:
            AttackModelError: a key is not a transition of the plant, its
                event is not sensor-attackable, or an attack automaton uses
                events outside the plant alphabet.
        """
        for key, f in self.entries:
            if not plant.has_transition(*key):
                raise AttackModelError(f"Attacked transition {key} is not a transition of {plant.name}")
            if key.event not in plant.alphabet.sensor_attackable:
                raise AttackModelError(f"Attacked transition {key}: event {key.event} is not sensor-attackable")
            stray = f.alphabet.events - plant.alphabet.events
            if stray:
                raise AttackModelError(f"Attack automaton {f.name} uses events outside {plant.name}: {sorted(stray)}")

    def restricted_to(self, h: Automaton) -> "AttackSpec":
        """Entries whose transitions survive in the sub-automaton `h`."""
        return AttackSpec(h.name, tuple((key, f) for key, f in self.entries if h.has_transition(*key)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "plant": self.plant_name,
            "targets": [{"source": k.source, "event": k.event, "target": k.target, "with": f.name}
                        for k, f in self.entries],
        }


@dataclass(frozen=True)
class PatternBounds:
    """
    Interval characterization of Δ(γ): a pattern γ^a can reach the plant
    after actuator tampering iff lower ⊆ γ^a ⊆ upper.
    """

    lower: FrozenSet[str]
    upper: FrozenSet[str]

    def __post_init__(self):
        object.__setattr__(self, "lower", frozenset(self.lower))
        object.__setattr__(self, "upper", frozenset(self.upper))
        if not self.lower <= self.upper:
            raise AttackModelError("Pattern lower bound must be included in the upper bound")

    def contains(self, gamma: Iterable[str]) -> bool:
        gamma = frozenset(gamma)
        return self.lower <= gamma <= self.upper

    def members(self) -> List[FrozenSet[str]]:
        """Every pattern of the interval, smallest first."""
        free = sorted(self.upper - self.lower)
        return [self.lower | frozenset(extra)
                for size in range(len(free) + 1)
                for extra in itertools.combinations(free, size)]


def actuator_pattern_bounds(gamma: Iterable[str], alphabet: Alphabet) -> PatternBounds:
    """Bounds (γ − Σ_c^a, γ ∪ Σ_c^a) of the patterns an actuator attacker can produce from γ."""
    gamma = frozenset(gamma)
    stray = gamma - alphabet.events
    if stray:
        raise AttackModelError(f"Control pattern events not in alphabet: {sorted(stray)}")
    return PatternBounds(gamma - alphabet.actuator_attackable, gamma | alphabet.actuator_attackable)


def trim_states(f: Automaton) -> FrozenSet[str]:
    """States of `f` that are reachable and can still reach a marked state."""
    graph = f.to_networkx()
    reachable = nx.descendants(graph, f.initial) | {f.initial}
    coreachable = set(f.marked).union(*(nx.ancestors(graph, m) for m in f.marked))
    return frozenset(reachable & coreachable)


def _copy_into(f: Automaton, prefix: str, source: str, target: str,
               states: set, transitions: set, inserted: set, reserved: FrozenSet[str]) -> None:
    """Insert a fresh copy of the trim part of `f` between `source` and `target` with ε-links."""
    def copy(state: str) -> str:
        return prefix + state

    kept = trim_states(f)
    for state in sorted(kept):
        if copy(state) in reserved:
            raise AttackModelError(f"Inserted state id {copy(state)} clashes with a plant state")
        states.add(copy(state))
        inserted.add(copy(state))
    transitions.update((copy(s), label, copy(t)) for s, label, t in f.transitions if s in kept and t in kept)
    transitions.add((source, EPSILON, copy(f.initial)))
    transitions.update((copy(m), EPSILON, target) for m in f.marked & kept)


def build_attacked_automaton(g: Automaton, atk: AttackSpec, name: Optional[str] = None) -> Automaton:
    """
    Extended automaton G^a: every attacked transition (q, σ, q') is replaced
    by a fresh copy of F_tr entered by ε from q and left by ε from its
    marked states to q'. Plant states are marked, so L_m(G^a) = Θ^a(L(G)).
    """
    if not g.is_deterministic:
        raise AttackModelError(f"Attacks are defined for deterministic plants; {g.name} is not")
    atk.validate(g)

    states, transitions, inserted = set(g.states), set(g.transitions), set()
    for key, f in atk.entries:
        transitions.discard(tuple(key))
        _copy_into(f, f"{key.source}/{key.event}/{key.target}:", key.source, key.target,
                   states, transitions, inserted, g.states)

    ga = Automaton(
        name=name or f"{g.name}^a",
        states=frozenset(states),
        alphabet=g.alphabet,
        transitions=frozenset(transitions),
        initial=g.initial,
        marked=g.states,
        inserted=frozenset(inserted),
    )
    logger.debug("attacked automaton %s: %d plant + %d inserted states", ga.name, len(g.states), len(inserted))
    return ga


def erase_unobservable(ga: Automaton, observable: Iterable[str]) -> Automaton:
    """G^a_ε: transitions labelled outside `observable` become ε-transitions."""
    observable = frozenset(observable) & ga.alphabet.events
    return Automaton(
        name=f"{ga.name}_eps",
        states=ga.states,
        alphabet=ga.alphabet.restrict(observable),
        transitions=frozenset((s, label if label in observable else EPSILON, t) for s, label, t in ga.transitions),
        initial=ga.initial,
        marked=ga.marked,
        inserted=ga.inserted,
    )


def theta_automaton(g: Automaton, atk: AttackSpec, s: Sequence[str]) -> Automaton:
    """
    Automaton marking Θ^a(s): the concatenation, along the run of `g` on
    `s`, of {σ_k} for unattacked steps and A_tr for attacked ones.

    Raises:
        AttackModelError: `s` is not generated by `g`.
    """
    states, transitions, inserted = {"t0"}, set(), set()
    q = g.initial
    for k, event in enumerate(s):
        if event not in g.alphabet.events:
            raise AttackModelError(f"Event {event!r} at position {k + 1} is not in the alphabet of {g.name}")
        q_next = g.step(q, event)
        if q_next is None:
            raise AttackModelError(f"{format_string(s)} is not in L({g.name}): undefined at position {k + 1}")
        here, there = f"t{k}", f"t{k + 1}"
        states.add(there)
        f = atk.get((q, event, q_next))
        if f is None:
            transitions.add((here, event, there))
        else:
            _copy_into(f, f"{here}:", here, there, states, transitions, inserted, frozenset())
        q = q_next

    return Automaton(
        name=f"Theta({g.name})",
        states=frozenset(states),
        alphabet=g.alphabet,
        transitions=frozenset(transitions),
        initial="t0",
        marked=frozenset({f"t{len(s)}"}),
        inserted=frozenset(inserted),
    )


def phi_automaton(g: Automaton, atk: AttackSpec, s: Sequence[str]) -> Automaton:
    """Deterministic automaton over Σ_o marking Φ^a(s) = P(Θ^a(s))."""
    return project(theta_automaton(g, atk, s), g.alphabet.observable, name=f"Phi({g.name})")


def pull_back_attack(atk: AttackSpec, product: Automaton, component_of: Mapping[str, str],
                     name: Optional[str] = None) -> AttackSpec:
    """
    Carry an attack specification through a product or refinement.

    A transition (x, σ, x') of `product` is attacked with F_tr exactly when
    tr = (component_of[x], σ, component_of[x']) is attacked in `atk`.
    """
    if not len(atk):
        return AttackSpec.empty(name or product.name)
    entries = []
    for source, event, target in sorted(product.transitions):
        f = atk.get((component_of[source], event, component_of[target]))
        if f is not None:
            entries.append((TransitionKey(source, event, target), f))
    return AttackSpec(name or product.name, tuple(entries))
