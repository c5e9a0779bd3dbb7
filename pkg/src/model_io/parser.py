"""
Line-oriented text format for automata, attack specifications, observers
and supervisors.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

from src.attacks.attack_model import AttackSpec, TransitionKey
from src.automata.alphabet import EVENT_FLAGS, Alphabet
from src.automata.automaton import EPSILON, Automaton
from src.automata.errors import AttackModelError, AutomatonError, ModelParseError, SynthesisError
from src.estimation.observer import ObserverAutomaton
from src.estimation.synthesis import SupervisorRealization

logger = logging.getLogger(__name__)

EPSILON_LABEL = "eps"

# Keys allowed inside each block kind; sections hold indented lines until the next key
LIST_KEYS = {
    "automaton": ("states", "initial", "marked", "inserted"),
    "observer": ("states", "initial", "marked", "plant-states"),
    "supervisor": ("observed", "observer", "states", "initial", "marked", "plant-states", "off-domain"),
    "attack": (),
}
SECTION_KEYS = {
    "automaton": ("alphabet", "trans"),
    "observer": ("alphabet", "trans", "subsets"),
    "supervisor": ("alphabet", "trans", "subsets", "patterns"),
    "attack": (),
}


@dataclass
class _Block:
    kind: str
    name: str
    line: int
    lists: Dict[str, Tuple[int, List[str]]] = field(default_factory=dict)
    sections: Dict[str, List[Tuple[int, str]]] = field(default_factory=dict)
    targets: List[Tuple[int, str, Tuple[str, ...]]] = field(default_factory=list)


@dataclass
class ModelFile:
    """Parsed blocks in file order as (kind, value) pairs."""

    blocks: List[Tuple[str, Any]] = field(default_factory=list)
    source: Optional[str] = None

    @property
    def values(self) -> List[Any]:
        return [value for _, value in self.blocks]

    def _of_kind(self, kind: str) -> List[Any]:
        return [value for k, value in self.blocks if k == kind]

    @property
    def automata(self) -> Dict[str, Automaton]:
        return {a.name: a for a in self._of_kind("automaton")}

    @property
    def attacks(self) -> List[AttackSpec]:
        return self._of_kind("attack")

    @property
    def observers(self) -> Dict[str, ObserverAutomaton]:
        return {o.name: o for o in self._of_kind("observer")}

    @property
    def supervisors(self) -> Dict[str, SupervisorRealization]:
        return {s.name: s for s in self._of_kind("supervisor")}

    def automaton(self, name: Optional[str] = None) -> Automaton:
        """Automaton called `name`, or the first automaton of the file."""
        automata = self._of_kind("automaton")
        if name is None:
            if not automata:
                raise AutomatonError(f"{self.source or 'model'} contains no automaton")
            return automata[0]
        found = self.automata.get(name)
        if found is None:
            raise AutomatonError(f"{self.source or 'model'} has no automaton named {name}")
        return found

    def attack_on(self, plant_name: str) -> AttackSpec:
        """Merged attack specification for `plant_name` (empty when the file has none)."""
        spec = AttackSpec.empty(plant_name)
        for attack in self.attacks:
            if attack.plant_name == plant_name:
                spec = spec.merged(attack)
        return spec

    def supervisor(self, name: Optional[str] = None) -> SupervisorRealization:
        supervisors = self._of_kind("supervisor")
        if name is None and supervisors:
            return supervisors[0]
        found = self.supervisors.get(name) if name is not None else None
        if found is None:
            raise AutomatonError(f"{self.source or 'model'} has no supervisor{' named ' + name if name else ''}")
        return found


class ModelParser:
    """
    Parses model files.

    Attack blocks may refer to automata defined anywhere in the file or
    in `known` (for instance a plant loaded from another file).
    """

    def __init__(self):
        self.regex_patterns = {
            'block': r'^(automaton|observer|supervisor)\s+(\S+)$',
            'attack': r'^attack\s+on\s+(\S+)$',
            'section': r'^([a-z\-]+):$',
            'list': r'^([a-z\-]+):\s+(.*)$',
            'event': r'^([^\s:]+)(?:\s*:\s*(.*))?$',
            'target': r'^target:\s*(\S+)\s+(\S+)\s+(\S+)\s+with\s+(\S+)$',
            'target_event': r'^target-event:\s*(\S+)\s+with\s+(\S+)$',
            'assignment': r'^(\S+)\s+=(.*)$',
            'end': r'^end$',
        }
        self._compiled = {key: re.compile(pattern) for key, pattern in self.regex_patterns.items()}

    def _match(self, key: str, text: str):
        return self._compiled[key].match(text)

    def parse(self, text: str, source: Optional[str] = None,
              known: Optional[Mapping[str, Automaton]] = None) -> ModelFile:
        """
        Parse model text.

        Args:
            text: File contents
            source: File name used in error messages
            known: Automata defined elsewhere that attack blocks may refer to

        Returns:
            ModelFile with validated values in block order

        Raises:
            ModelParseError: syntax, reference or validation error, with its position
        """
        self.source = source
        self._lines = text.splitlines()
        blocks = self._read_blocks(text)

        names: Dict[str, int] = {}
        for block in blocks:
            if block.kind == "attack":
                continue
            if block.name in names:
                self._fail(f"{block.name} is defined twice (first on line {names[block.name]})", block.line)
            names[block.name] = block.line

        automata = {b.name: self._build_automaton(b) for b in blocks if b.kind == "automaton"}
        scope = dict(known or {})
        scope.update(automata)

        model = ModelFile(source=source)
        for block in blocks:
            if block.kind == "automaton":
                model.blocks.append(("automaton", automata[block.name]))
            elif block.kind == "attack":
                model.blocks.append(("attack", self._build_attack(block, scope)))
            elif block.kind == "observer":
                model.blocks.append(("observer", self._build_observer(block)))
            else:
                model.blocks.append(("supervisor", self._build_supervisor(block)))
        logger.debug("parsed %d blocks from %s", len(model.blocks), source or "text")
        return model

    def _fail(self, reason: str, line: int, column: int = 1):
        raise ModelParseError(reason, line, column, self.source)

    def _column(self, line: int, token: Optional[str] = None, index: int = 0) -> int:
        """
        1-based column of a token on `line`.

        With `token` the `index`-th occurrence of that word is used, otherwise
        the `index`-th whitespace-separated field (a leading `key:` counts as
        its own field).
        """
        raw = self._lines[line - 1].split("#", 1)[0]
        text = raw.lstrip()
        offset = len(raw) - len(text)
        if token is not None:
            spans = list(re.finditer(rf"(?<![^\s:=]){re.escape(token)}(?![^\s:=])", text))
        else:
            spans = list(re.finditer(r"^[a-z\-]+:(?=\S)|\S+", text))
        return offset + spans[index].start() + 1 if -len(spans) <= index < len(spans) else offset + 1

    def _read_blocks(self, text: str) -> List[_Block]:
        blocks: List[_Block] = []
        current: Optional[_Block] = None
        section: Optional[str] = None
        for number, raw in enumerate(text.splitlines(), start=1):
            content = raw.split("#", 1)[0].strip()
            if not content:
                continue
            column = len(raw) - len(raw.lstrip()) + 1

            if current is None:
                block_match = self._match('block', content)
                attack_match = self._match('attack', content)
                if block_match:
                    current = _Block(block_match.group(1), block_match.group(2), number)
                elif attack_match:
                    current = _Block("attack", attack_match.group(1), number)
                else:
                    self._fail(f"expected a block header, got {content.split()[0]!r}", number, column)
                section = None
                continue

            if self._match('end', content):
                blocks.append(current)
                current = None
                continue

            if current.kind == "attack":
                self._read_target(current, content, number, column)
                continue

            section_match = self._match('section', content)
            list_match = self._match('list', content)
            if section_match and section_match.group(1) in SECTION_KEYS[current.kind]:
                section = section_match.group(1)
                if section in current.sections:
                    self._fail(f"section {section}: appears twice", number, column)
                current.sections[section] = []
                continue
            key_match = list_match or section_match
            if key_match and key_match.group(1) in LIST_KEYS[current.kind]:
                key = key_match.group(1)
                if key in current.lists:
                    self._fail(f"{key}: appears twice", number, column)
                values = list_match.group(2).split() if list_match else []
                current.lists[key] = (number, values)
                section = None
                continue
            if section is None:
                self._fail(f"unknown keyword {content.split()[0]!r} in {current.kind} {current.name}", number, column)
            current.sections[section].append((number, content))

        if current is not None:
            self._fail(f"{current.kind} {current.name} is missing its end line", current.line)
        return blocks

    def _read_target(self, block: _Block, content: str, number: int, column: int) -> None:
        target = self._match('target', content)
        if target:
            block.targets.append((number, "target", target.groups()))
            return
        target_event = self._match('target_event', content)
        if target_event:
            block.targets.append((number, "target-event", target_event.groups()))
            return
        self._fail(f"expected 'target: SRC EVENT DST with F' or 'target-event: EVENT with F', got {content!r}",
                   number, column)

    def _alphabet(self, block: _Block) -> Alphabet:
        events, observable, controllable, sensor, actuator = set(), set(), set(), set(), set()
        for number, content in block.sections.get("alphabet", []):
            match = self._match('event', content)
            if not match:
                self._fail(f"expected 'EVENT : FLAGS', got {content!r}", number, self._column(number))
            event, flags = match.group(1), (match.group(2) or "").split()
            if event == EPSILON_LABEL:
                self._fail(f"event name {EPSILON_LABEL} is reserved for ε-transitions", number,
                           self._column(number, event))
            if event in events:
                self._fail(f"event {event} is declared twice", number, self._column(number, event))
            unknown = [flag for flag in flags if flag not in EVENT_FLAGS]
            if unknown:
                self._fail(f"unknown event flag {unknown[0]!r}", number, self._column(number, unknown[0]))
            if {"obs", "unobs"} <= set(flags) or {"ctrl", "unctrl"} <= set(flags):
                self._fail(f"contradictory flags for event {event}", number, self._column(number, event))
            if "sen-attack" in flags and "unobs" in flags:
                self._fail(f"sen-attack event {event} must be observable", number, self._column(number, "sen-attack"))
            if "act-attack" in flags and "unctrl" in flags:
                self._fail(f"act-attack event {event} must be controllable", number, self._column(number, "act-attack"))
            events.add(event)
            if "unobs" not in flags:
                observable.add(event)
            if "unctrl" not in flags:
                controllable.add(event)
            if "sen-attack" in flags:
                sensor.add(event)
            if "act-attack" in flags:
                actuator.add(event)
        return Alphabet(frozenset(events), frozenset(observable), frozenset(controllable),
                        frozenset(sensor), frozenset(actuator))

    def _single(self, block: _Block, key: str) -> str:
        if key not in block.lists:
            self._fail(f"{block.kind} {block.name} has no {key}: line", block.line)
        number, values = block.lists[key]
        if len(values) != 1:
            self._fail(f"{key}: takes exactly one value", number, self._column(number, index=2 if values else 0))
        return values[0]

    def _machine(self, block: _Block, alphabet: Alphabet, name: str) -> Automaton:
        transitions = []
        for number, content in block.sections.get("trans", []):
            parts = content.split()
            if len(parts) != 3:
                self._fail(f"expected 'SRC EVENT DST', got {content!r}", number, self._column(number))
            source, label, target = parts
            if label == EPSILON_LABEL:
                label = EPSILON
            elif label not in alphabet.events:
                self._fail(f"transition label {label!r} is not a declared event", number, self._column(number, index=1))
            transitions.append((source, label, target))

        declared = block.lists.get("states")
        if declared is not None:
            states = set(declared[1])
            for number, content in block.sections.get("trans", []):
                for position in (0, 2):
                    state = content.split()[position]
                    if state not in states:
                        column = self._column(number, index=position)
                        self._fail(f"state {state} is not declared in states:", number, column)
        marked = block.lists.get("marked")
        inserted = block.lists.get("inserted")
        try:
            return Automaton.build(
                name, alphabet, transitions, self._single(block, "initial"),
                marked=marked[1] if marked is not None else None,
                states=declared[1] if declared is not None else None,
                inserted=inserted[1] if inserted is not None else (),
            )
        except AutomatonError as e:
            self._fail(str(e), block.line)

    def _build_automaton(self, block: _Block) -> Automaton:
        return self._machine(block, self._alphabet(block), block.name)

    def _assignments(self, block: _Block, section: str) -> Dict[str, List[str]]:
        result: Dict[str, List[str]] = {}
        for number, content in block.sections.get(section, []):
            match = self._match('assignment', content)
            if not match:
                self._fail(f"expected 'STATE = ...', got {content!r}", number, self._column(number))
            result[match.group(1)] = match.group(2).split()
        return result

    def _observer(self, block: _Block, alphabet: Alphabet, name: str) -> ObserverAutomaton:
        automaton = self._machine(block, alphabet, name)
        plant_states = block.lists.get("plant-states", (0, []))[1]
        try:
            return ObserverAutomaton(automaton, self._assignments(block, "subsets"), frozenset(plant_states))
        except AutomatonError as e:
            self._fail(str(e), block.line)

    def _build_observer(self, block: _Block) -> ObserverAutomaton:
        return self._observer(block, self._alphabet(block), block.name)

    def _build_supervisor(self, block: _Block) -> SupervisorRealization:
        local = self._alphabet(block)
        observed = block.lists.get("observed", (0, sorted(local.observable)))[1]
        stray = set(observed) - local.events
        if stray:
            line = block.lists["observed"][0]
            self._fail(f"observed events not in alphabet: {sorted(stray)}", line, self._column(line, sorted(stray)[0]))
        observer = self._observer(block, local.restrict(observed), self._single(block, "observer"))
        patterns = self._assignments(block, "patterns")
        off_domain = block.lists.get("off-domain", (0, []))[1]
        for events in list(patterns.values()) + [off_domain]:
            unknown = set(events) - local.events
            if unknown:
                self._fail(f"pattern events not in alphabet: {sorted(unknown)}", block.line)
        try:
            return SupervisorRealization(block.name, observer, patterns, frozenset(off_domain), local)
        except SynthesisError as e:
            self._fail(str(e), block.line)

    def _build_attack(self, block: _Block, scope: Mapping[str, Automaton]) -> AttackSpec:
        plant = scope.get(block.name)
        if plant is None:
            self._fail(f"attack on unknown automaton {block.name}", block.line)
        spec = AttackSpec.empty(plant.name)
        for number, kind, groups in block.targets:
            f = scope.get(groups[-1])
            if f is None:
                self._fail(f"unknown attack automaton {groups[-1]}", number, self._column(number, index=-1))
            try:
                if kind == "target":
                    key = TransitionKey(*groups[:3])
                    if key in spec:
                        self._fail(f"transition {key} is attacked twice", number, self._column(number, index=1))
                    addition = AttackSpec(plant.name, ((key, f),))
                else:
                    addition = AttackSpec.for_event(plant, groups[0], f)
                addition.validate(plant)
                spec = spec.merged(addition)
            except AttackModelError as e:
                self._fail(str(e), number, self._column(number, index=1))
        return spec


def parse_model(text: str, source: Optional[str] = None, known: Optional[Mapping[str, Automaton]] = None) -> ModelFile:
    return ModelParser().parse(text, source, known)


def load_model(path: str, known: Optional[Mapping[str, Automaton]] = None) -> ModelFile:
    """Read and parse a UTF-8 model file."""
    with open(path, "r", encoding="utf-8") as file:
        return parse_model(file.read(), source=path, known=known)
