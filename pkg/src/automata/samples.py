"""
Canonical fixtures and seeded random instance families.
"""

from typing import FrozenSet, Iterable, List, NamedTuple, Optional

import numpy as np

from src.attacks.attack_model import AttackSpec, TransitionKey
from src.automata.alphabet import Alphabet
from src.automata.automaton import Automaton
from src.automata.operations import accessible, restrict_to_safe_states

RANDOM_EVENTS = ("a", "b", "c", "d")


class Fixture(NamedTuple):
    """A plant with its safe states (the specification K) and its attack specification."""

    plant: Automaton
    safe: FrozenSet[str]
    attack: AttackSpec

    def spec(self, name: str = "H") -> Automaton:
        return restrict_to_safe_states(self.plant, self.safe, name=name)


class CoordinationFixture(NamedTuple):
    g1: Automaton
    g2: Automaton
    spec: Automaton
    attack1: Optional[AttackSpec] = None
    attack2: Optional[AttackSpec] = None


def make_alphabet(events: Iterable[str], unobservable: Iterable[str] = (), uncontrollable: Iterable[str] = (),
                  sensor_attackable: Iterable[str] = (), actuator_attackable: Iterable[str] = ()) -> Alphabet:
    """Alphabet where every event is observable and controllable unless listed otherwise."""
    events = frozenset(events)
    return Alphabet(
        events=events,
        observable=events - frozenset(unobservable),
        controllable=events - frozenset(uncontrollable),
        sensor_attackable=frozenset(sensor_attackable),
        actuator_attackable=frozenset(actuator_attackable),
    )


def attack_automaton(name: str, alphabet: Alphabet, words: Iterable[Iterable[str]]) -> Automaton:
    """
    Deterministic tree automaton marking exactly the given finite set of words.

    The empty word is marked by the initial state; other states are named
    after the prefix they read.
    """
    transitions, marked = set(), set()
    for word in words:
        state = "f"
        for event in word:
            target = f"{state}_{event}"
            transitions.add((state, event, target))
            state = target
        marked.add(state)
    return Automaton.build(name, alphabet.restrict({t[1] for t in transitions}), transitions, "f", marked=marked)


def fix_lin(unobservable: Iterable[str] = (), uncontrollable: Iterable[str] = (),
            sensor_attackable: Iterable[str] = (), actuator_attackable: Iterable[str] = ()) -> Fixture:
    """Plant q0 -a-> q1 -b-> q2 with every state safe and no attack."""
    alphabet = make_alphabet(("a", "b"), unobservable, uncontrollable, sensor_attackable, actuator_attackable)
    plant = Automaton.build("G", alphabet, [("q0", "a", "q1"), ("q1", "b", "q2")], "q0")
    return Fixture(plant, plant.states, AttackSpec.empty(plant.name))


def fix_safe(**flags) -> Fixture:
    """FIX-LIN restricted to the safe states {q0, q1}, i.e. K = {ε, a}."""
    lin = fix_lin(**flags)
    return lin._replace(safe=frozenset({"q0", "q1"}))


def fix_del(unobservable: Iterable[str] = (), **flags) -> Fixture:
    """FIX-SAFE with the transition (q0, a, q1) attacked by pure deletion (A = {ε})."""
    lin = fix_safe(unobservable=unobservable, sensor_attackable={"a"}, **flags)
    deletion = attack_automaton("Fdel", lin.plant.alphabet, [()])
    attack = AttackSpec.from_mapping(lin.plant.name, {("q0", "a", "q1"): deletion})
    return lin._replace(attack=attack)


def fix_conf() -> Fixture:
    """
    Two branches a and b both observed as the fresh event x; only the
    c-continuation after b is unsafe.
    """
    alphabet = make_alphabet(("a", "b", "c", "x"), sensor_attackable={"a", "b"})
    plant = Automaton.build(
        "G", alphabet,
        [("q0", "a", "q1"), ("q0", "b", "q2"), ("q1", "c", "q3"), ("q2", "c", "q4")],
        "q0",
    )
    replace_by_x = attack_automaton("Fx", alphabet, [("x",)])
    attack = AttackSpec.from_mapping(plant.name, {("q0", "a", "q1"): replace_by_x, ("q0", "b", "q2"): replace_by_x})
    return Fixture(plant, frozenset({"q0", "q1", "q2", "q3"}), attack)


def fix_coord() -> CoordinationFixture:
    """G1 = p0 -a-> p1 -c-> p2, G2 = r0 -c-> r1 -b-> r2, K = closure of {ac}."""
    g1 = Automaton.build("G1", make_alphabet(("a", "c")), [("p0", "a", "p1"), ("p1", "c", "p2")], "p0")
    g2 = Automaton.build("G2", make_alphabet(("b", "c")), [("r0", "c", "r1"), ("r1", "b", "r2")], "r0")
    k = Automaton.build("K", make_alphabet(("a", "b", "c")), [("k0", "a", "k1"), ("k1", "c", "k2")], "k0")
    return CoordinationFixture(g1, g2, k)


def _random_flags(rng: np.random.Generator, events: List[str], attack_rate: float) -> Alphabet:
    observable = {e for e in events if rng.random() < 0.8}
    controllable = {e for e in events if rng.random() < 0.7}
    return Alphabet(
        events=frozenset(events),
        observable=frozenset(observable),
        controllable=frozenset(controllable),
        sensor_attackable=frozenset(e for e in sorted(observable) if rng.random() < attack_rate),
        actuator_attackable=frozenset(e for e in sorted(controllable) if rng.random() < attack_rate / 2),
    )


def random_acyclic_automaton(rng: np.random.Generator, alphabet: Alphabet, name: str,
                             max_states: int = 8, prefix: str = "q", density: float = 0.45) -> Automaton:
    """
    Deterministic acyclic automaton: transitions only go from a state to a
    higher-numbered one, so every language it generates is finite.
    """
    n = int(rng.integers(1, max_states + 1))
    events = sorted(alphabet.events)
    transitions = []
    for i in range(n - 1):
        for event in events:
            if rng.random() < density:
                j = int(rng.integers(i + 1, n))
                transitions.append((f"{prefix}{i}", event, f"{prefix}{j}"))
    states = [f"{prefix}{i}" for i in range(n)]
    return accessible(Automaton.build(name, alphabet, transitions, f"{prefix}0", states=states))


def random_attack_automaton(rng: np.random.Generator, alphabet: Alphabet, name: str, max_states: int = 3) -> Automaton:
    """Acyclic attack automaton over a random part of `alphabet` with a nonempty marked language."""
    f = random_acyclic_automaton(rng, alphabet, name, max_states=max_states, prefix="f", density=0.5)
    states = sorted(f.states)
    marked = {s for s in states if rng.random() < 0.5} or {states[int(rng.integers(len(states)))]}
    used = {label for _, label, _ in f.transitions}
    return Automaton.build(name, alphabet.restrict(used), f.transitions, f.initial, marked=marked, states=f.states)


def random_attack_spec(rng: np.random.Generator, plant: Automaton, attack_rate: float = 0.5,
                       max_attack_states: int = 3, output_events: Optional[Iterable[str]] = None,
                       prefix: str = "F") -> AttackSpec:
    """
    Attack each sensor-attackable transition of `plant` with probability
    `attack_rate`; attack automata write `output_events` (default: the
    whole plant alphabet).
    """
    outputs = plant.alphabet.restrict(plant.alphabet.events if output_events is None else output_events)
    entries = []
    for k, (source, event, target) in enumerate(sorted(plant.transitions)):
        if event in plant.alphabet.sensor_attackable and rng.random() < attack_rate:
            f = random_attack_automaton(rng, outputs, f"{prefix}{k}", max_states=max_attack_states)
            entries.append((TransitionKey(source, event, target), f))
    return AttackSpec(plant.name, tuple(entries))


def random_instance(seed: int, max_states: int = 8, max_events: int = 4, attack_rate: float = 0.5) -> Fixture:
    """
    Seeded random acyclic plant with a random safe set and attack specification.

    Args:
        seed: Seed of the numpy generator
        max_states: Upper bound on plant states
        max_events: Upper bound on alphabet size
        attack_rate: Probability used for attack-related flags and entries

    Returns:
        Fixture with at most `max_states` states and attack automata of at most 3 states
    """
    rng = np.random.default_rng(seed)
    events = list(RANDOM_EVENTS[: int(rng.integers(1, max_events + 1))])
    plant = random_acyclic_automaton(rng, _random_flags(rng, events, attack_rate), "G", max_states=max_states)
    safe = {plant.initial} | {s for s in sorted(plant.states) if rng.random() < 0.7}
    return Fixture(plant, frozenset(safe), random_attack_spec(rng, plant, attack_rate))


def random_coordination_instance(seed: int, max_states: int = 5, attack_rate: float = 0.5) -> CoordinationFixture:
    """
    Two random acyclic components over {a, c} and {b, c} sharing c, with a
    random specification K over {a, b, c}.

    Private events a and b may be sensor-attacked, with attack automata
    writing private events only, so the component observations never
    depend on the other component's moves.
    """
    rng = np.random.default_rng(seed)
    controllable = {"a", "b", "c"} if rng.random() < 0.5 else {"a", "b"}
    shared = make_alphabet(("a", "b", "c"), uncontrollable={"a", "b", "c"} - controllable,
                           sensor_attackable={"a", "b"})
    g1 = random_acyclic_automaton(rng, shared.restrict({"a", "c"}), "G1", max_states=max_states, prefix="p")
    g2 = random_acyclic_automaton(rng, shared.restrict({"b", "c"}), "G2", max_states=max_states, prefix="r")
    k = random_acyclic_automaton(rng, shared, "K", max_states=max_states + 2, prefix="k", density=0.6)
    attack1 = random_attack_spec(rng, g1, attack_rate, output_events={"a"}, prefix="F1_")
    attack2 = random_attack_spec(rng, g2, attack_rate, output_events={"b"}, prefix="F2_")
    return CoordinationFixture(g1, g2, k, attack1, attack2)


def fixtures() -> List[Fixture]:
    return [fix_lin(), fix_safe(), fix_del(), fix_conf()]
