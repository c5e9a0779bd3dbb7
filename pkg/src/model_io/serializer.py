"""
Canonical text form of model values
"""

import logging
from typing import Any, Dict, Iterable, List, Sequence, Set

from src.attacks.attack_model import AttackSpec
from src.automata.alphabet import Alphabet
from src.automata.automaton import EPSILON, Automaton
from src.automata.errors import AttackModelError
from src.estimation.observer import ObserverAutomaton
from src.estimation.synthesis import SupervisorRealization
from src.model_io.parser import EPSILON_LABEL

logger = logging.getLogger(__name__)

INDENT = "  "


def _list_line(key: str, items: Iterable[str]) -> str:
    items = list(items)
    return f"{key}:" + (" " + " ".join(items) if items else "")


def _alphabet_lines(alphabet: Alphabet) -> List[str]:
    lines = ["alphabet:"]
    for event in sorted(alphabet.events):
        lines.append(f"{INDENT}{event} : {' '.join(alphabet.flags_of(event))}")
    return lines


def _machine_lines(a: Automaton, with_alphabet: bool = True) -> List[str]:
    lines = _alphabet_lines(a.alphabet) if with_alphabet else []
    lines.append(_list_line("states", sorted(a.states)))
    lines.append(f"initial: {a.initial}")
    lines.append(_list_line("marked", sorted(a.marked)))
    if a.inserted:
        lines.append(_list_line("inserted", sorted(a.inserted)))
    lines.append("trans:")
    for source, label, target in sorted(a.transitions):
        lines.append(f"{INDENT}{source} {EPSILON_LABEL if label == EPSILON else label} {target}")
    return lines


def _assignment_lines(section: str, mapping) -> List[str]:
    lines = [f"{section}:"]
    for key in sorted(mapping):
        members = sorted(mapping[key])
        lines.append(f"{INDENT}{key} =" + (" " + " ".join(members) if members else ""))
    return lines


def serialize_automaton(a: Automaton) -> List[str]:
    return [f"automaton {a.name}"] + _machine_lines(a) + ["end"]


def serialize_attack(spec: AttackSpec) -> List[str]:
    lines = [f"attack on {spec.plant_name}"]
    for key, f in spec.entries:
        lines.append(f"target: {key.source} {key.event} {key.target} with {f.name}")
    return lines + ["end"]


def serialize_observer(obs: ObserverAutomaton) -> List[str]:
    lines = [f"observer {obs.name}"] + _machine_lines(obs.automaton)
    lines.append(_list_line("plant-states", sorted(obs.plant_states)))
    lines += _assignment_lines("subsets", obs.subsets)
    return lines + ["end"]


def serialize_supervisor(sup: SupervisorRealization) -> List[str]:
    observer = sup.observer
    lines = [f"supervisor {sup.name}"] + _alphabet_lines(sup.local_alphabet)
    lines.append(_list_line("observed", sorted(observer.observable)))
    lines.append(f"observer: {observer.name}")
    lines += _machine_lines(observer.automaton, with_alphabet=False)
    lines.append(_list_line("plant-states", sorted(observer.plant_states)))
    lines += _assignment_lines("subsets", observer.subsets)
    lines += _assignment_lines("patterns", sup.pattern_of)
    lines.append(_list_line("off-domain", sorted(sup.off_domain_pattern)))
    return lines + ["end"]


def _claim_name(named: Dict[str, Automaton], a: Automaton) -> None:
    known = named.setdefault(a.name, a)
    if known != a:
        raise AttackModelError(f"Two different automata are named {a.name}; rename one before saving")


def serialize_model(values: Sequence[Any]) -> str:
    """
    Serialize values in canonical form.

    Blocks keep the input order. Attack automata referenced by an attack
    specification are written just before it unless already present. Two
    different automata sharing a name raise AttackModelError.
    """
    named: Dict[str, Automaton] = {}
    for value in values:
        if isinstance(value, Automaton):
            _claim_name(named, value)
    written = set(named)
    blocks: List[List[str]] = []
    emitted: Set[str] = set()
    for value in values:
        if isinstance(value, Automaton):
            if value.name not in emitted:
                emitted.add(value.name)
                blocks.append(serialize_automaton(value))
        elif isinstance(value, AttackSpec):
            for f in value.attack_automata():
                _claim_name(named, f)
                if f.name not in written:
                    written.add(f.name)
                    blocks.append(serialize_automaton(f))
            blocks.append(serialize_attack(value))
        elif isinstance(value, ObserverAutomaton):
            blocks.append(serialize_observer(value))
        elif isinstance(value, SupervisorRealization):
            blocks.append(serialize_supervisor(value))
        else:
            raise TypeError(f"Cannot serialize {type(value).__name__}")
    logger.debug("serialized %d blocks", len(blocks))
    return "\n\n".join("\n".join(block) for block in blocks) + "\n"


def save_model(path: str, values: Sequence[Any]) -> None:
    text = serialize_model(values)
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        file.write(text)
