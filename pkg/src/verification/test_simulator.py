"""
Tests for the seeded closed-loop simulator
"""

import sys
import os

# Add the project root to the path
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import pytest

from src.attacks.attack_model import actuator_pattern_bounds
from src.automata.operations import accepts
from src.automata.samples import fix_coord, fix_del, fix_safe, random_instance
from src.coordination.coordinator import CoordinationProblem, coordination_synthesize
from src.estimation.synthesis import synthesize_ca_supervisor
from src.verification.large_language import large_language
from src.verification.simulator import SimConfig, simulate_closed_loop


def single(fixture, force=False):
    h = fixture.spec()
    sup = synthesize_ca_supervisor(fixture.plant, h, fixture.attack, fixture.plant.alphabet, force=force)
    return [fixture.plant], [sup], [fixture.attack], h


def coordinated():
    coord = fix_coord()
    result = coordination_synthesize(CoordinationProblem(coord.g1, coord.g2, spec=coord.spec))
    return result.local_plants, result.supervisors, result.local_attacks, result.spec


def test_config_validation():
    with pytest.raises(ValueError, match="at least 1"):
        SimConfig(runs=0)
    with pytest.raises(ValueError, match="attacker_mode"):
        SimConfig(attacker_mode="clever")
    with pytest.raises(ValueError, match="damping"):
        SimConfig(damping=0.0)
    cfg = SimConfig(damping=0.25, max_attack_walk=3)
    assert (cfg.damping, cfg.max_attack_walk) == (0.25, 3)


@pytest.mark.parametrize("mode", ["random", "maximal"])
def test_coordinated_loop_is_safe(mode):
    plants, sups, attacks, spec = coordinated()
    report = simulate_closed_loop(plants, sups, attacks, spec, SimConfig(runs=1000, max_depth=20, seed=7,
                                                                          attacker_mode=mode))
    assert report.runs_executed == 1000
    assert report.violations == []
    assert report.coverage == 2


@pytest.mark.parametrize("mode", ["random", "maximal"])
def test_single_loop_under_deletion_is_safe(mode):
    plants, sups, attacks, spec = single(fix_del())
    report = simulate_closed_loop(plants, sups, attacks, spec, SimConfig(runs=1000, max_depth=20, seed=1,
                                                                          attacker_mode=mode))
    assert not report.violations


def test_identical_seeds_give_identical_reports():
    plants, sups, attacks, spec = coordinated()
    cfg = SimConfig(runs=50, max_depth=10, seed=42)
    first = simulate_closed_loop(plants, sups, attacks, spec, cfg)
    second = simulate_closed_loop(plants, sups, attacks, spec, cfg)
    assert first.to_dict() == second.to_dict()
    assert first.lines() == second.lines()


def test_unsupervised_loop_violates_specification():
    fixture = fix_safe()
    plants, sups, attacks, spec = single(fixture)
    permissive = [sups[0].with_enabled(fixture.plant.alphabet.events)]
    report = simulate_closed_loop(plants, permissive, attacks, spec, SimConfig(runs=10, max_depth=5, seed=3))
    assert len(report.violations) == 10
    assert report.violations[0].string == ("a", "b")
    assert report.violations[0].position == 2
    assert "violations: 10" in report.lines()
    assert report.to_dict()["violations"][0] == {"run": 0, "string": ["a", "b"], "position": 2}


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("mode", ["random", "maximal"])
def test_executed_strings_belong_to_large_language(seed, mode):
    fixture = random_instance(seed)
    plants, sups, attacks, spec = single(fixture, force=True)
    la = large_language(fixture.plant, sups[0], fixture.attack)
    cfg = SimConfig(runs=30, max_depth=8, seed=seed, attacker_mode=mode, record_traces=True)
    report = simulate_closed_loop(plants, sups, attacks, fixture.plant, cfg)
    assert not report.violations
    assert len(report.traces) == 30
    for trace in report.traces:
        assert accepts(la, trace.string)
        for step in trace.steps:
            issued, tampered = step.patterns[0]
            assert step.event in tampered or step.event in fixture.plant.alphabet.uncontrollable


@pytest.mark.parametrize("seed", range(10))
def test_maximal_attacker_tampers_up_to_the_upper_bound(seed):
    fixture = random_instance(seed)
    plants, sups, attacks, _ = single(fixture, force=True)
    cfg = SimConfig(runs=5, max_depth=8, seed=seed, attacker_mode="maximal", record_traces=True)
    report = simulate_closed_loop(plants, sups, attacks, fixture.plant, cfg)
    for trace in report.traces:
        for step in trace.steps:
            issued, tampered = step.patterns[0]
            assert set(tampered) == actuator_pattern_bounds(frozenset(issued), fixture.plant.alphabet).upper


def test_mismatched_inputs_are_rejected():
    plants, sups, attacks, spec = single(fix_del())
    with pytest.raises(ValueError, match="same length"):
        simulate_closed_loop(plants, sups + sups, attacks, spec, SimConfig(runs=1))
