"""
Tests for conditional decomposability, coordinator extension, local plants,
local attacks and coordination synthesis
"""

import sys
import os

# Add the project root to the path
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import pytest

from src.attacks.attack_model import AttackSpec
from src.automata.automaton import Automaton
from src.automata.errors import AttackModelError, AutomatonError
from src.automata.operations import (
    MARKED,
    compare_languages,
    compose_parallel,
    enumerate_language,
    project,
    synchronous_product,
)
from src.automata.samples import (
    attack_automaton,
    fix_conf,
    fix_coord,
    make_alphabet,
    random_coordination_instance,
    random_instance,
)
from src.coordination.coordinator import (
    CoordinationProblem,
    build_local_plant,
    coordination_synthesize,
    derive_local_attack,
    lift_component_attacks,
)
from src.coordination.decomposition import (
    check_conditional_decomposability,
    check_observer_property,
    extend_coordinator,
    extend_coordinator_alphabet,
)
from src.verification.large_language import verify_closed_loop
from src.verification.oracles import assumption_one_bounded, longest_word, observer_property_bounded


def closure_ab():
    return Automaton.build("K", make_alphabet(("a", "b")), [("k0", "a", "k1"), ("k1", "b", "k2")], "k0")


def closure_ab_cd():
    return Automaton.build(
        "L", make_alphabet(("a", "b", "c", "d")),
        [("q0", "a", "q1"), ("q1", "b", "q2"), ("q0", "c", "q3"), ("q3", "d", "q4")],
        "q0",
    )


def singletons():
    """G1 = p0 -a-> p1 and G2 = r0 -b-> r1, whose product is the shuffle of a and b."""
    g1 = Automaton.build("G1", make_alphabet(("a",)), [("p0", "a", "p1")], "p0")
    g2 = Automaton.build("G2", make_alphabet(("b",)), [("r0", "b", "r1")], "r0")
    return g1, g2


def shared_deletion():
    """FIX-COORD with c sensor-attackable in both components and deleted by both attackers."""
    g1 = Automaton.build("G1", make_alphabet(("a", "c"), sensor_attackable={"c"}),
                         [("p0", "a", "p1"), ("p1", "c", "p2")], "p0")
    g2 = Automaton.build("G2", make_alphabet(("b", "c"), sensor_attackable={"c"}),
                         [("r0", "c", "r1"), ("r1", "b", "r2")], "r0")
    deletion = attack_automaton("Fdel", g1.alphabet, [()])
    attack1 = AttackSpec.from_mapping("G1", {("p1", "c", "p2"): deletion})
    attack2 = AttackSpec.from_mapping("G2", {("r0", "c", "r1"): deletion})
    return g1, g2, fix_coord().spec, attack1, attack2


def test_conditional_decomposability_examples():
    k = closure_ab()
    report = check_conditional_decomposability(k, {"a"}, {"b"})
    assert not report.decomposable
    assert report.counterexample == ("b",)
    assert report.to_dict()["counterexample"] == ["b"]
    assert check_conditional_decomposability(k, {"a", "b"}, {"b"}).decomposable

    coord = fix_coord()
    report = check_conditional_decomposability(coord.spec, {"a", "c"}, {"b", "c"})
    assert report.decomposable
    assert report.coordinator_used == {"c"}


def test_decomposability_rejects_uncovered_events():
    with pytest.raises(AutomatonError, match="outside both local alphabets"):
        check_conditional_decomposability(closure_ab(), {"a"}, set())


@pytest.mark.parametrize("seed", range(20))
def test_specification_is_included_in_its_decomposition(seed):
    instance = random_coordination_instance(seed)
    k = instance.spec
    composition = compose_parallel(project(k, {"a", "c"}), project(k, {"b", "c"}))
    assert compare_languages(k, composition, mode="inclusion").holds


def test_coordinator_extension():
    k = closure_ab()
    extension = extend_coordinator(k, {"a"}, {"b"})
    assert extension.alphabet == {"b"}
    assert extension.steps == (("b", ("b",)),)
    assert check_conditional_decomposability(k, {"a"}, {"b"}, extension.alphabet).decomposable

    coord = fix_coord()
    assert extend_coordinator_alphabet(coord.spec, {"a", "c"}, {"b", "c"}) == {"c"}
    assert check_conditional_decomposability(k, {"a"}, {"b"}, {"a", "b"}).decomposable


@pytest.mark.parametrize("seed", range(20))
def test_extended_coordinator_always_decomposes(seed):
    k = random_coordination_instance(seed).spec
    sk = extend_coordinator_alphabet(k, {"a", "c"}, {"b", "c"})
    assert "c" in sk
    assert check_conditional_decomposability(k, {"a", "c"}, {"b", "c"}, sk).decomposable


def test_local_plants_of_the_coordination_fixture():
    coord = fix_coord()
    local1 = build_local_plant(coord.g1, coord.g2, {"c"}, name="plant1")
    local2 = build_local_plant(coord.g2, coord.g1, {"c"})
    assert local1.name == "plant1"
    assert local1.alphabet.events == {"a", "c"}
    assert enumerate_language(local1, 4) == [(), ("a",), ("a", "c")]
    assert enumerate_language(local2, 4) == [(), ("c",), ("c", "b")]

    with pytest.raises(AutomatonError, match="shared events"):
        build_local_plant(coord.g1, coord.g2, set())


def test_local_plant_without_coordinator_events_keeps_the_component():
    g1, g2 = singletons()
    local = build_local_plant(g1, g2, set())
    assert enumerate_language(local, 3) == [(), ("a",)]


@pytest.mark.parametrize("seed", range(20))
def test_local_plants_recompose_the_global_plant(seed):
    instance = random_coordination_instance(seed)
    local1 = build_local_plant(instance.g1, instance.g2, {"c"})
    local2 = build_local_plant(instance.g2, instance.g1, {"c"})
    recomposed = compose_parallel(local1, local2)
    assert compare_languages(recomposed, compose_parallel(instance.g1, instance.g2)).holds


def test_observer_property_examples():
    assert check_observer_property(closure_ab(), {"a"}).holds

    verdict = check_observer_property(closure_ab_cd(), {"b", "d"})
    assert not verdict.holds
    assert verdict.witness == ("a",)
    assert verdict.event == "d"

    l = closure_ab_cd()
    verdict = check_observer_property(l, l.alphabet.events)
    assert verdict.holds
    assert "5 projected states for 5 states" in verdict.detail


@pytest.mark.parametrize("seed", range(30))
def test_observer_property_matches_definition(seed):
    plant = random_instance(seed).plant
    sk = {"a", "b"} & plant.alphabet.events
    expected = observer_property_bounded(plant, sk, longest_word(plant)).holds
    assert check_observer_property(plant, sk).holds == expected


def test_local_attack_keeps_local_attack_languages():
    alphabet1 = make_alphabet(("a", "c"), sensor_attackable={"a"})
    g1 = Automaton.build("G1", alphabet1, [("p0", "a", "p1"), ("p1", "c", "p2")], "p0")
    g2 = fix_coord().g2
    double = attack_automaton("Faa", alphabet1, [("a", "a")])
    attack1 = AttackSpec.from_mapping("G1", {("p0", "a", "p1"): double})
    g, component_of = synchronous_product(g1, g2, name="G")
    global_atk = lift_component_attacks(g, component_of, attack1, None, (g1.alphabet.events, g2.alphabet.events))
    assert global_atk.keys == [("(p0,r0)", "a", "(p1,r0)")]

    local1 = build_local_plant(g1, g2, {"c"}, name="plant1")
    local_atk = derive_local_attack(global_atk, g, local1)
    assert [key.event for key in local_atk.keys] == ["a"]
    f = local_atk.entries[0][1]
    assert f.name == "Faa@plant1"
    assert enumerate_language(f, 3, MARKED) == [("a", "a")]

    local2 = build_local_plant(g2, g1, {"c"}, name="plant2")
    assert not len(derive_local_attack(global_atk, g, local2))


def test_shared_deletion_is_seen_by_both_components():
    g1, g2, _, attack1, attack2 = shared_deletion()
    g, component_of = synchronous_product(g1, g2, name="G")
    global_atk = lift_component_attacks(g, component_of, attack1, attack2, (g1.alphabet.events, g2.alphabet.events))
    assert global_atk.keys == [("(p1,r0)", "c", "(p2,r1)")]
    for i, (gi, gj) in enumerate(((g1, g2), (g2, g1)), start=1):
        local = build_local_plant(gi, gj, {"c"}, name=f"plant{i}")
        local_atk = derive_local_attack(global_atk, g, local)
        assert local_atk.events == {"c"}
        assert assumption_one_bounded(g, global_atk, local, local_atk, 4).holds


def test_component_attacks_must_agree_on_shared_moves():
    g1, g2, _, attack1, _ = shared_deletion()
    other = attack_automaton("Fother", g2.alphabet, [("b",)])
    attack2 = AttackSpec.from_mapping("G2", {("r0", "c", "r1"): other})
    g, component_of = synchronous_product(g1, g2, name="G")
    with pytest.raises(AttackModelError, match="Fdel and Fother"):
        lift_component_attacks(g, component_of, attack1, attack2, (g1.alphabet.events, g2.alphabet.events))


def test_coordination_problem_validation():
    coord = fix_coord()
    with pytest.raises(AutomatonError, match="either"):
        CoordinationProblem(coord.g1, coord.g2)
    with pytest.raises(AttackModelError, match="not both"):
        CoordinationProblem(coord.g1, coord.g2, spec=coord.spec, attack=AttackSpec.empty("G"),
                            attack1=AttackSpec.empty("G1"))


def test_coordination_of_the_fixture():
    coord = fix_coord()
    result = coordination_synthesize(CoordinationProblem(coord.g1, coord.g2, spec=coord.spec))
    report = result.report
    assert report.holds
    assert report.coordinator == {"c"}
    assert report.coordinator_source == "given"
    assert [c.plant for c in report.components] == ["plant1", "plant2"]
    assert [s.name for s in result.supervisors] == ["sup1", "sup2"]
    assert report.lines()[-1] == "coordination: local supervisors synthesized"
    assert enumerate_language(result.spec, 4) == [(), ("a",), ("a", "c")]

    plant1, plant2 = result.local_plants
    sup1, sup2 = result.supervisors
    atk1, atk2 = result.local_attacks
    closed_loop = verify_closed_loop(plant1, plant2, result.spec, sup1, sup2, atk1, atk2)
    assert closed_loop.holds

    weakened = verify_closed_loop(plant1, plant2, result.spec, sup1, sup2.with_enabled({"b"}), atk1, atk2)
    checks = dict(weakened.checks)
    assert not weakened.holds
    assert checks["La(S1 & S2) = La(S1) || La(S2)"].holds
    assert checks["La(S1 & S2) = K"].witness == ("a", "c", "b")
    assert checks["La(S2) = P2(K)"].witness == ("c", "b")


def test_coordination_without_extension_stops_at_decomposability():
    g1, g2 = singletons()
    result = coordination_synthesize(CoordinationProblem(g1, g2, spec=closure_ab(), extend=False))
    assert not result.report.holds
    assert result.report.decomposition.counterexample == ("b",)
    assert not result.supervisors
    assert not result.report.components
    assert "coordination: FAILED" in result.report.lines()


def test_coordination_extends_the_coordinator():
    g1, g2 = singletons()
    result = coordination_synthesize(CoordinationProblem(g1, g2, spec=closure_ab()))
    report = result.report
    assert report.holds
    assert report.coordinator == {"b"}
    assert report.coordinator_source == "extended"
    assert report.to_dict()["extension_steps"] == [{"added": "b", "counterexample": ["b"]}]
    closed_loop = verify_closed_loop(*result.local_plants, result.spec, *result.supervisors, *result.local_attacks)
    assert closed_loop.holds


def test_coordination_reports_local_observability_failure():
    conf = fix_conf()
    g1 = conf.plant.renamed("G1")
    g2 = Automaton.build("G2", make_alphabet(("d",)), [("r0", "d", "r1")], "r0")
    attack1 = AttackSpec("G1", conf.attack.entries)
    result = coordination_synthesize(CoordinationProblem(g1, g2, spec=conf.spec("K"), attack1=attack1))
    report = result.report
    assert not report.holds
    assert not result.supervisors
    first = report.components[0]
    assert first.controllability.holds
    assert not first.observability.holds
    assert (first.observability.witness, first.observability.event) == (("a",), "c")


def test_coordination_under_shared_deletion():
    g1, g2, spec, attack1, attack2 = shared_deletion()
    result = coordination_synthesize(CoordinationProblem(g1, g2, spec=spec, attack1=attack1, attack2=attack2))
    assert result.report.holds
    assert all(c.assumption.holds and c.assumption.bounded for c in result.report.components)
    assert [a.events for a in result.local_attacks] == [{"c"}, {"c"}]
    closed_loop = verify_closed_loop(*result.local_plants, result.spec, *result.supervisors, *result.local_attacks)
    assert closed_loop.holds


def test_coordination_with_safe_states():
    coord = fix_coord()
    problem = CoordinationProblem(coord.g1, coord.g2, safe={"(p0,r0)", "(p1,r0)", "(p2,r1)"})
    result = coordination_synthesize(problem)
    assert result.report.holds
    assert compare_languages(result.spec, coord.spec).holds


def test_most_random_coordinations_succeed():
    holding = 0
    for seed in range(20):
        instance = random_coordination_instance(seed)
        problem = CoordinationProblem(instance.g1, instance.g2, spec=instance.spec,
                                      attack1=instance.attack1, attack2=instance.attack2)
        holding += coordination_synthesize(problem).report.holds
    assert holding >= 10


@pytest.mark.parametrize("seed", range(20))
def test_random_coordination(seed):
    instance = random_coordination_instance(seed)
    problem = CoordinationProblem(instance.g1, instance.g2, spec=instance.spec,
                                  attack1=instance.attack1, attack2=instance.attack2)
    result = coordination_synthesize(problem)
    report = result.report
    if not report.holds:
        assert not result.supervisors
        return
    assert all(c.controllability.holds and c.observability.holds for c in report.components)
    closed_loop = verify_closed_loop(*result.local_plants, result.spec, *result.supervisors, *result.local_attacks)
    assert closed_loop.holds, closed_loop.lines()
