"""
Command-line interface: `python -m src.cli.main COMMAND ...`

Exit codes: 0 when the command succeeds or the checked property holds,
1 when the property is violated (a witness is printed), 2 on usage or
validation errors.
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

from src.attacks.attack_model import AttackSpec, build_attacked_automaton
from src.automata.automaton import Automaton, format_string, length_lex
from src.automata.errors import AttackModelError, AutomatonError, ModelParseError, SynthesisError
from src.automata.operations import (
    GENERATED,
    MARKED,
    compose_parallel,
    enumerate_language,
    project,
    restrict_to_safe_states,
)
from src.automata.samples import fix_conf, fix_coord, fix_del, fix_lin, fix_safe
from src.cli.render import render_value
from src.cli.reports import automaton_summary, observer_table, pattern_table, verdict_lines, violation_table
from src.config import get_settings
from src.coordination.coordinator import CoordinationProblem, coordination_synthesize
from src.coordination.decomposition import (
    check_conditional_decomposability,
    check_observer_property,
    extend_coordinator,
)
from src.estimation.observer import ObserverAutomaton, build_ca_observer, state_estimate
from src.estimation.synthesis import check_ca_controllability, check_ca_observability, synthesize_ca_supervisor
from src.model_io.parser import ModelFile, load_model
from src.model_io.serializer import save_model
from src.verification.large_language import large_language, verify_closed_loop
from src.verification.oracles import ca_observability_bounded, large_language_bounded
from src.verification.simulator import ATTACKER_MODES, SimConfig, simulate_closed_loop

logger = logging.getLogger(__name__)

COORDINATION_FILE = "coordination.desa"


class CommandResult(NamedTuple):
    code: int
    lines: List[str]
    data: Dict[str, Any]


def parse_events(text: Optional[str]) -> FrozenSet[str]:
    """Comma- or space-separated names; empty input gives the empty set."""
    if not text:
        return frozenset()
    return frozenset(part for part in text.replace(",", " ").split() if part)


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = "DEBUG" if verbose else "ERROR" if quiet else get_settings().log_level
    logging.basicConfig(level=getattr(logging, level), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def load_plant(path: str, attack_path: Optional[str] = None) -> Tuple[Automaton, AttackSpec]:
    """First automaton of `path` and its attack specification (from `attack_path` or the same file)."""
    model = load_model(path)
    plant = model.automaton()
    if attack_path is None:
        return plant, model.attack_on(plant.name)
    return plant, load_model(attack_path, known=model.automata).attack_on(plant.name)


def safe_spec(plant: Automaton, safe: str) -> Automaton:
    states = parse_events(safe)
    unknown = states - plant.states
    if unknown:
        raise AutomatonError(f"--safe names states that are not in {plant.name}: {sorted(unknown)}")
    return restrict_to_safe_states(plant, states, name="H")


def verdict_result(label: str, verdict, extra: Optional[Dict[str, Any]] = None) -> CommandResult:
    data = {"property": label, "verdict": verdict.to_dict()}
    data.update(extra or {})
    return CommandResult(0 if verdict.holds else 1, verdict_lines(label, verdict), data)


def cmd_validate(args) -> CommandResult:
    model = load_model(args.file)
    lines, blocks = [], []
    for kind, value in model.blocks:
        if kind == "automaton":
            lines.append(f"automaton {automaton_summary(value)}")
            blocks.append({"kind": kind, "name": value.name, "states": len(value.states),
                           "transitions": len(value.transitions)})
        elif kind == "attack":
            lines.append(f"attack on {value.plant_name}: {len(value)} attacked transitions")
            blocks.append({"kind": kind, "name": value.plant_name, "targets": len(value)})
        elif kind == "observer":
            lines.append(f"observer {value.name}: {len(value.automaton.states)} states")
            blocks.append({"kind": kind, "name": value.name, "states": len(value.automaton.states)})
        else:
            lines.append(f"supervisor {value.name}: {len(value.observer.automaton.states)} observer states")
            blocks.append({"kind": kind, "name": value.name, "states": len(value.observer.automaton.states)})
    lines.append(f"{args.file}: valid")
    return CommandResult(0, lines, {"file": args.file, "valid": True, "blocks": blocks})


def _written(a: Automaton, path: str) -> CommandResult:
    return CommandResult(0, [automaton_summary(a), f"written to {path}"],
                         {"output": path, "automaton": a.name, "states": len(a.states),
                          "transitions": len(a.transitions)})


def cmd_compose(args) -> CommandResult:
    result = compose_parallel(load_model(args.a).automaton(), load_model(args.b).automaton())
    if args.name:
        result = result.renamed(args.name)
    save_model(args.output, [result])
    return _written(result, args.output)


def cmd_project(args) -> CommandResult:
    result = project(load_model(args.file).automaton(), parse_events(args.alphabet), name=args.name)
    save_model(args.output, [result])
    return _written(result, args.output)


def cmd_attack_expand(args) -> CommandResult:
    plant, attack = load_plant(args.plant, args.attack)
    ga = build_attacked_automaton(plant, attack)
    save_model(args.output, [ga])
    return _written(ga, args.output)


def cmd_observer(args) -> CommandResult:
    plant, attack = load_plant(args.plant, args.attack)
    obs = build_ca_observer(safe_spec(plant, args.safe), attack)
    save_model(args.output, [obs])
    lines = [observer_table(obs), f"{obs.name}: {len(obs.automaton.states)} states, written to {args.output}"]
    return CommandResult(0, lines, {"output": args.output, "observer": obs.to_dict()})


def _observer_of(model: ModelFile) -> ObserverAutomaton:
    if model.observers:
        return next(iter(model.observers.values()))
    return model.supervisor().observer


def cmd_estimate(args) -> CommandResult:
    obs = _observer_of(load_model(args.observer))
    trace = tuple(args.trace.split())
    estimate = state_estimate(obs, trace)
    return CommandResult(0, [f"estimate after {format_string(trace)}: {estimate}"],
                         {"trace": list(trace), "estimate": estimate.to_dict()})


def cmd_check_cc(args) -> CommandResult:
    plant, _ = load_plant(args.plant)
    return verdict_result("CA-controllability", check_ca_controllability(plant, safe_spec(plant, args.safe),
                                                                          plant.alphabet))


def cmd_check_co(args) -> CommandResult:
    plant, attack = load_plant(args.plant, args.attack)
    h = safe_spec(plant, args.safe)
    verdict = check_ca_observability(plant, h, attack, plant.alphabet)
    result = verdict_result("CA-observability", verdict)
    if args.oracle:
        depth = args.depth if args.depth is not None else get_settings().oracle_depth
        bounded = ca_observability_bounded(plant, h, attack, plant.alphabet, depth)
        result.lines.extend(verdict_lines(f"CA-observability up to depth {depth}", bounded))
        result.data["oracle"] = bounded.to_dict()
    return result


def cmd_check_cd(args) -> CommandResult:
    k = load_model(args.spec).automaton()
    s1, s2, coordinator = parse_events(args.s1), parse_events(args.s2), parse_events(args.coordinator)
    data: Dict[str, Any] = {}
    lines: List[str] = []
    if args.extend:
        extension = extend_coordinator(k, s1, s2, coordinator)
        coordinator = extension.alphabet
        data["extension"] = extension.to_dict()
        lines.extend(f"added {event} for counterexample {format_string(s)}" for event, s in extension.steps)
    report = check_conditional_decomposability(k, s1, s2, coordinator)
    data["decomposition"] = report.to_dict()
    return CommandResult(0 if report.decomposable else 1, lines + report.lines(), data)


def cmd_check_op(args) -> CommandResult:
    a = load_model(args.file).automaton()
    return verdict_result("observer property", check_observer_property(a, parse_events(args.events)))


def cmd_synthesize(args) -> CommandResult:
    plant, attack = load_plant(args.plant, args.attack)
    sup = synthesize_ca_supervisor(plant, safe_spec(plant, args.safe), attack, plant.alphabet,
                                   force=args.force, name=args.name)
    save_model(args.output, [sup])
    lines = [pattern_table(sup), f"supervisor {sup.name} written to {args.output}"]
    return CommandResult(0, lines, {"output": args.output, "supervisor": sup.to_dict()})


def cmd_large_lang(args) -> CommandResult:
    plant, attack = load_plant(args.plant, args.attack)
    sup = load_model(args.supervisor).supervisor()
    la = large_language(plant, sup, attack)
    save_model(args.output, [la])
    depth = args.depth if args.depth is not None else get_settings().oracle_depth
    strings = enumerate_language(la, depth)
    lines = [automaton_summary(la), f"strings up to length {depth}:"]
    lines.extend(f"  {format_string(s)}" for s in strings)
    data: Dict[str, Any] = {"output": args.output, "depth": depth, "strings": [list(s) for s in strings]}
    code = 0
    if args.oracle:
        expected = set(large_language_bounded(plant, sup, attack, depth))
        differences = length_lex(expected.symmetric_difference(strings))
        agrees = not differences
        data["oracle"] = {"agrees": agrees, "differences": [list(s) for s in differences]}
        if agrees:
            lines.append(f"oracle: agrees up to length {depth}")
        else:
            lines.append(f"oracle: DISAGREES, witness {format_string(differences[0])}")
            code = 1
    return CommandResult(code, lines, data)


def _component_attack(model: ModelFile, plant: Automaton) -> Optional[AttackSpec]:
    return model.attack_on(plant.name) if model.attacks else None


def cmd_coordinate(args) -> CommandResult:
    m1, m2 = load_model(args.g1), load_model(args.g2)
    g1, g2 = m1.automaton(), m2.automaton()
    problem = CoordinationProblem(
        g1, g2,
        spec=load_model(args.spec).automaton(),
        coordinator=parse_events(args.coordinator),
        extend=args.extend,
        attack1=_component_attack(m1, g1),
        attack2=_component_attack(m2, g2),
    )
    result = coordination_synthesize(problem, assumption_depth=args.assumption_depth)
    report = result.report

    os.makedirs(args.output, exist_ok=True)
    values: List[Any] = [result.plant, result.spec] + result.local_plants
    values += [result.global_attack] + result.local_attacks + result.supervisors
    save_model(os.path.join(args.output, COORDINATION_FILE), values)
    lines = report.lines()
    with open(os.path.join(args.output, "report.txt"), "w", encoding="utf-8") as file:
        file.write("\n".join(lines) + "\n")
    with open(os.path.join(args.output, "report.json"), "w", encoding="utf-8") as file:
        file.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return CommandResult(0 if report.holds else 1, lines, report.to_dict())


def load_coordination(directory: str):
    """Local plants, supervisors, attacks and K written by `coordinate`."""
    model = load_model(os.path.join(directory, COORDINATION_FILE))
    plants = [model.automaton("plant1"), model.automaton("plant2")]
    sups = [model.supervisor("sup1"), model.supervisor("sup2")]
    attacks = [model.attack_on(p.name) for p in plants]
    return plants, sups, attacks, model.automaton("K")


def cmd_verify_coord(args) -> CommandResult:
    plants, sups, attacks, k = load_coordination(args.directory)
    report = verify_closed_loop(plants[0], plants[1], k, sups[0], sups[1], attacks[0], attacks[1])
    return CommandResult(0 if report.holds else 1, report.lines(), report.to_dict())


def cmd_simulate(args) -> CommandResult:
    plants, sups, attacks, k = load_coordination(args.directory)
    cfg = SimConfig(runs=args.runs, max_depth=args.depth, seed=args.seed, attacker_mode=args.attacker,
                    damping=args.damping)
    report = simulate_closed_loop(plants, sups, attacks, k, cfg)
    lines = report.lines()
    if report.violations:
        lines.append(violation_table(report))
    return CommandResult(1 if report.violations else 0, lines, report.to_dict())


def cmd_enumerate(args) -> CommandResult:
    a = load_model(args.file).automaton(args.name)
    which = MARKED if args.marked else GENERATED
    strings = enumerate_language(a, args.max_len, which)
    return CommandResult(0, [format_string(s) for s in strings],
                         {"automaton": a.name, "which": which, "strings": [list(s) for s in strings]})


def cmd_samples(args) -> CommandResult:
    os.makedirs(args.output, exist_ok=True)
    coord = fix_coord()
    files = [
        ("fix_lin.desa", [fix_lin().plant], None),
        ("fix_safe.desa", [fix_safe().plant], fix_safe().safe),
        ("fix_del.desa", [fix_del().plant, fix_del().attack], fix_del().safe),
        ("fix_conf.desa", [fix_conf().plant, fix_conf().attack], fix_conf().safe),
        ("coord_g1.desa", [coord.g1], None),
        ("coord_g2.desa", [coord.g2], None),
        ("coord_k.desa", [coord.spec], None),
    ]
    lines, written = [], []
    for name, values, safe in files:
        path = os.path.join(args.output, name)
        save_model(path, values)
        written.append({"file": path, "safe": sorted(safe) if safe is not None else None})
        lines.append(path + (f" (safe states {','.join(sorted(safe))})" if safe is not None else ""))
    return CommandResult(0, lines, {"files": written})


def cmd_render(args) -> CommandResult:
    model = load_model(args.file)
    values = model.values
    if args.name:
        values = [v for v in values if getattr(v, "name", None) == args.name]
    values = [v for v in values if not isinstance(v, AttackSpec)]
    if not values:
        raise AutomatonError(f"{args.file} has no block{' named ' + args.name if args.name else ''} to render")
    value = values[0]
    unsafe: FrozenSet[str] = frozenset()
    if args.safe and isinstance(value, Automaton):
        unsafe = value.states - parse_events(args.safe)
    render_value(value, args.output, unsafe)
    return CommandResult(0, [f"{value.name} rendered to {args.output}"], {"output": args.output, "name": value.name})


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="errors only")

    parser = argparse.ArgumentParser(prog="desattack",
                                     description="Supervisory control of discrete event systems under attack")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, handler, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    p = command("validate", cmd_validate, "parse and validate a model file")
    p.add_argument("file")

    p = command("compose", cmd_compose, "synchronous product of two automata")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--name")

    p = command("project", cmd_project, "natural projection onto a set of events")
    p.add_argument("file")
    p.add_argument("--alphabet", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--name")

    p = command("attack-expand", cmd_attack_expand, "attacked automaton of a plant")
    p.add_argument("plant")
    p.add_argument("attack")
    p.add_argument("-o", "--output", required=True)

    p = command("observer", cmd_observer, "CA-observer of the safe part of a plant")
    p.add_argument("plant")
    p.add_argument("attack", nargs="?")
    p.add_argument("--safe", required=True)
    p.add_argument("-o", "--output", required=True)

    p = command("estimate", cmd_estimate, "state estimate after an observed string")
    p.add_argument("observer")
    p.add_argument("--trace", required=True)

    p = command("check-cc", cmd_check_cc, "CA-controllability")
    p.add_argument("plant")
    p.add_argument("--safe", required=True)

    p = command("check-co", cmd_check_co, "CA-observability")
    p.add_argument("plant")
    p.add_argument("attack", nargs="?")
    p.add_argument("--safe", required=True)
    p.add_argument("--oracle", action="store_true", help="also run the bounded definitional check")
    p.add_argument("--depth", type=int)

    p = command("check-cd", cmd_check_cd, "conditional decomposability")
    p.add_argument("spec")
    p.add_argument("--s1", required=True)
    p.add_argument("--s2", required=True)
    p.add_argument("--coordinator")
    p.add_argument("--extend", action="store_true")

    p = command("check-op", cmd_check_op, "observer property of a projection")
    p.add_argument("file")
    p.add_argument("--events", required=True)

    p = command("synthesize", cmd_synthesize, "CA-supervisor for the safe part of a plant")
    p.add_argument("plant")
    p.add_argument("attack", nargs="?")
    p.add_argument("--safe", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--name", default="S")
    p.add_argument("--force", action="store_true", help="skip the precondition checks")

    p = command("large-lang", cmd_large_lang, "large language of a supervised attacked plant")
    p.add_argument("plant")
    p.add_argument("supervisor")
    p.add_argument("attack", nargs="?")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--oracle", action="store_true")

    p = command("coordinate", cmd_coordinate, "coordination synthesis for two components")
    p.add_argument("g1")
    p.add_argument("g2")
    p.add_argument("spec")
    p.add_argument("--coordinator")
    p.add_argument("--extend", action="store_true")
    p.add_argument("--assumption-depth", type=int)
    p.add_argument("-o", "--output", required=True)

    p = command("verify-coord", cmd_verify_coord, "check the coordinated closed loop against K")
    p.add_argument("directory")

    p = command("simulate", cmd_simulate, "seeded closed-loop simulation")
    p.add_argument("directory")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--depth", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--attacker", choices=ATTACKER_MODES, default="random")
    p.add_argument("--damping", type=float)

    p = command("enumerate", cmd_enumerate, "strings of an automaton up to a length")
    p.add_argument("file")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--marked", action="store_true")
    p.add_argument("--name")

    p = command("samples", cmd_samples, "write the canonical fixtures as model files")
    p.add_argument("-o", "--output", required=True)

    p = command("render", cmd_render, "interactive HTML graph of a block")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--name")
    p.add_argument("--safe", help="color the other states of an automaton as unsafe")
    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    configure_logging(args.verbose, args.quiet)
    try:
        result = args.handler(args)
    except (ModelParseError, AutomatonError, AttackModelError, SynthesisError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args.json:
        print(json.dumps(result.data, indent=2, sort_keys=True))
    else:
        for line in result.lines:
            print(line)
    return result.code


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
