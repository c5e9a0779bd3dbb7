"""
Tests for the sensor and actuator attack models
"""

import sys
import os
import itertools

# Add the project root to the path
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import pytest

from src.attacks.attack_model import (
    AttackSpec,
    PatternBounds,
    TransitionKey,
    actuator_pattern_bounds,
    build_attacked_automaton,
    erase_unobservable,
    phi_automaton,
    pull_back_attack,
    theta_automaton,
)
from src.automata.automaton import Automaton
from src.automata.errors import AttackModelError
from src.automata.operations import MARKED, compare_languages, enumerate_language, project, refine_with_spec
from src.automata.samples import attack_automaton, fix_conf, fix_del, fix_lin, make_alphabet, random_instance


def marked_strings(a, max_len=4):
    return enumerate_language(a, max_len, MARKED)


def fix_double_a():
    """FIX-LIN with (q0, a, q1) attacked by A = {a, aa}."""
    lin = fix_lin(sensor_attackable={"a"})
    f = attack_automaton("Faa", lin.plant.alphabet, [("a",), ("a", "a")])
    return lin.plant, AttackSpec.from_mapping("G", {("q0", "a", "q1"): f})


def test_attacked_automaton_without_attack_is_the_plant():
    plant = fix_lin().plant
    ga = build_attacked_automaton(plant, AttackSpec.empty("G"))
    assert ga.transitions == plant.transitions
    assert ga.marked == plant.states
    assert not ga.inserted


def test_attacked_automaton_deletion():
    fixture = fix_del()
    ga = build_attacked_automaton(fixture.plant, fixture.attack)
    assert marked_strings(ga, 3) == [(), ("b",)]
    assert ga.inserted == {"q0/a/q1:f"}
    assert ga.tag_of("q0/a/q1:f") == "inserted"
    assert ga.plant_states == fixture.plant.states


def test_attacked_automaton_concatenation():
    plant, attack = fix_double_a()
    ga = build_attacked_automaton(plant, attack)
    assert marked_strings(ga, 3) == [(), ("a",), ("a", "a"), ("a", "b"), ("a", "a", "b")]


def test_attacked_automaton_rejects_bad_keys():
    plant, attack = fix_double_a()
    f = attack.get(("q0", "a", "q1"))
    with pytest.raises(AttackModelError, match="q1, a, q2"):
        build_attacked_automaton(plant, AttackSpec.from_mapping("G", {("q1", "a", "q2"): f}))
    with pytest.raises(AttackModelError, match="not sensor-attackable"):
        build_attacked_automaton(fix_lin().plant, attack)


def test_attack_automaton_validation():
    alphabet = make_alphabet(("a",))
    dead = Automaton.build("Fdead", alphabet, [("f", "a", "g")], "f", marked=set())
    with pytest.raises(AttackModelError, match="empty language"):
        AttackSpec.from_mapping("G", {("q0", "a", "q1"): dead})
    nondet = Automaton.build("Fnd", alphabet, [("f", "a", "g"), ("f", "a", "h")], "f")
    with pytest.raises(AttackModelError, match="deterministic"):
        AttackSpec.from_mapping("G", {("q0", "a", "q1"): nondet})


def test_for_event_and_restriction():
    conf = fix_conf()
    f = conf.attack.get(("q0", "a", "q1"))
    spec = AttackSpec.for_event(conf.plant, "a", f)
    assert spec.keys == [TransitionKey("q0", "a", "q1")]
    assert conf.attack.events == {"a", "b"}
    assert len(conf.attack.restricted_to(conf.spec())) == 2
    with pytest.raises(AttackModelError):
        AttackSpec.for_event(conf.plant, "x", f)


def test_erase_unobservable():
    fixture = fix_del()
    ga = build_attacked_automaton(fixture.plant, fixture.attack)
    assert erase_unobservable(ga, ga.alphabet.observable).transitions == ga.transitions

    hidden = fix_del(unobservable={"b"})
    ga = build_attacked_automaton(hidden.plant, hidden.attack)
    assert marked_strings(erase_unobservable(ga, ga.alphabet.observable)) == [()]

    plain = fix_lin(unobservable={"a"}).plant
    ga = build_attacked_automaton(plain, AttackSpec.empty("G"))
    assert marked_strings(erase_unobservable(ga, plain.alphabet.observable)) == [(), ("b",)]


def test_theta_automaton():
    fixture = fix_del()
    assert marked_strings(theta_automaton(fixture.plant, fixture.attack, ("a", "b"))) == [("b",)]
    assert marked_strings(theta_automaton(fixture.plant, AttackSpec.empty("G"), ("a", "b"))) == [("a", "b")]
    plant, attack = fix_double_a()
    assert marked_strings(theta_automaton(plant, attack, ("a", "b"))) == [("a", "b"), ("a", "a", "b")]

    with pytest.raises(AttackModelError, match="position 1"):
        theta_automaton(fixture.plant, fixture.attack, ("b",))


def test_phi_automaton():
    fixture = fix_del()
    assert marked_strings(phi_automaton(fixture.plant, fixture.attack, ("a", "b"))) == [("b",)]
    hidden = fix_del(unobservable={"b"})
    assert marked_strings(phi_automaton(hidden.plant, hidden.attack, ("a", "b"))) == [()]
    conf = fix_conf()
    assert marked_strings(phi_automaton(conf.plant, conf.attack, ("a",))) == [("x",)]


def test_actuator_pattern_bounds():
    alphabet = make_alphabet(("a", "b"), actuator_attackable={"b"})
    bounds = actuator_pattern_bounds({"a"}, alphabet)
    assert (bounds.lower, bounds.upper) == ({"a"}, {"a", "b"})
    assert bounds.members() == [{"a"}, {"a", "b"}]

    bounds = actuator_pattern_bounds({"a", "b"}, alphabet)
    assert (bounds.lower, bounds.upper) == ({"a"}, {"a", "b"})

    unattacked = actuator_pattern_bounds({"a"}, make_alphabet(("a", "b")))
    assert unattacked.members() == [{"a"}]

    with pytest.raises(AttackModelError):
        PatternBounds({"a", "b"}, {"a"})


def test_pattern_bounds_match_tampering_definition():
    events = ("a", "b", "c", "d", "e")
    alphabet = make_alphabet(events, actuator_attackable={"b", "c", "d", "e"})
    subsets = [frozenset(c) for size in range(len(events) + 1) for c in itertools.combinations(events, size)]
    attackable = [s for s in subsets if s <= alphabet.actuator_attackable]
    for gamma in subsets[::3]:
        tampered = {(gamma - removed) | added for removed in attackable for added in attackable}
        bounds = actuator_pattern_bounds(gamma, alphabet)
        assert set(bounds.members()) == tampered
        assert all(bounds.contains(s) == (s in tampered) for s in subsets)


def test_pull_back_attack_through_refinement():
    conf = fix_conf()
    spec = Automaton.build("K", conf.plant.alphabet, [("k0", "a", "k1"), ("k0", "b", "k2")], "k0")
    refined, _, component_of = refine_with_spec(conf.plant, spec)
    lifted = pull_back_attack(conf.attack, refined, component_of)
    assert len(lifted) == 2
    assert {component_of[k.source] for k in lifted.keys} == {"q0"}


@pytest.mark.parametrize("seed", range(100))
def test_attacked_language_identities(seed):
    instance = random_instance(seed)
    plant, attack = instance.plant, instance.attack
    ga = build_attacked_automaton(plant, attack)

    depth = 6
    expected = set()
    for s in enumerate_language(plant, len(plant.states)):
        expected.update(marked_strings(theta_automaton(plant, attack, s), depth))
    assert set(marked_strings(ga, depth)) == expected

    observable = plant.alphabet.observable
    observed = set()
    for s in enumerate_language(plant, len(plant.states)):
        observed.update(marked_strings(phi_automaton(plant, attack, s), depth))
    assert set(marked_strings(erase_unobservable(ga, observable), depth)) == observed

    generated = set(enumerate_language(ga, 4))
    closure = {s[:k] for s in marked_strings(ga, 4 * len(plant.states)) for k in range(min(len(s), 4) + 1)}
    assert generated == closure


@pytest.mark.parametrize("seed", range(30))
def test_phi_is_projected_theta(seed):
    instance = random_instance(seed)
    plant, attack = instance.plant, instance.attack
    for s in enumerate_language(plant, 3):
        theta = theta_automaton(plant, attack, s)
        phi = phi_automaton(plant, attack, s)
        assert compare_languages(phi, project(theta, plant.alphabet.observable), which=MARKED).holds


def test_empty_attack_is_identity():
    instance = random_instance(7)
    plant = instance.plant
    for s in enumerate_language(plant, 4):
        assert marked_strings(theta_automaton(plant, AttackSpec.empty("G"), s), 8) == [tuple(s)]
