from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional

from src.automata.errors import AutomatonError

EVENT_FLAGS = ("obs", "unobs", "ctrl", "unctrl", "sen-attack", "act-attack")


def _frozen(events: Optional[Iterable[str]]) -> FrozenSet[str]:
    return frozenset(events) if events is not None else frozenset()


@dataclass(frozen=True)
class Alphabet:
    """
    A finite event set together with its observation, control and
    attack attributes.

    Unobservable and uncontrollable events are derived, never stored, so
    the attribute sets cannot disagree with each other.
    """

    events: FrozenSet[str]
    observable: FrozenSet[str] = field(default=frozenset())
    controllable: FrozenSet[str] = field(default=frozenset())
    sensor_attackable: FrozenSet[str] = field(default=frozenset())
    actuator_attackable: FrozenSet[str] = field(default=frozenset())

    def __post_init__(self):
        for name in ("events", "observable", "controllable", "sensor_attackable", "actuator_attackable"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

        for event in self.events:
            if not event or any(ch.isspace() for ch in event):
                raise AutomatonError(f"Invalid event name {event!r}")

        for name in ("observable", "controllable"):
            stray = getattr(self, name) - self.events
            if stray:
                raise AutomatonError(f"{name} events not in alphabet: {sorted(stray)}")

        if not self.sensor_attackable <= self.observable:
            bad = sorted(self.sensor_attackable - self.observable)
            raise AutomatonError(f"Sensor-attackable events must be observable: {bad}")
        if not self.actuator_attackable <= self.controllable:
            bad = sorted(self.actuator_attackable - self.controllable)
            raise AutomatonError(f"Actuator-attackable events must be controllable: {bad}")

    @classmethod
    def fully_observed(cls, events: Iterable[str], uncontrollable: Iterable[str] = ()) -> "Alphabet":
        """Alphabet where every event is observable and all but `uncontrollable` are controllable."""
        events = frozenset(events)
        return cls(events=events, observable=events, controllable=events - frozenset(uncontrollable))

    @property
    def unobservable(self) -> FrozenSet[str]:
        return self.events - self.observable

    @property
    def uncontrollable(self) -> FrozenSet[str]:
        return self.events - self.controllable

    def flags_of(self, event: str) -> List[str]:
        """Canonical flag list of one event, in file-format order."""
        if event not in self.events:
            raise AutomatonError(f"Event {event!r} not in alphabet")
        flags = ["obs" if event in self.observable else "unobs",
                 "ctrl" if event in self.controllable else "unctrl"]
        if event in self.sensor_attackable:
            flags.append("sen-attack")
        if event in self.actuator_attackable:
            flags.append("act-attack")
        return flags

    def restrict(self, events: Iterable[str]) -> "Alphabet":
        """Sub-alphabet over `events` with the attributes carried over."""
        kept = frozenset(events) & self.events
        return Alphabet(
            events=kept,
            observable=self.observable & kept,
            controllable=self.controllable & kept,
            sensor_attackable=self.sensor_attackable & kept,
            actuator_attackable=self.actuator_attackable & kept,
        )

    def merge(self, other: "Alphabet") -> "Alphabet":
        """
        Union of two alphabets.

        Raises:
            AutomatonError: a shared event carries different attributes.
        """
        for event in sorted(self.events & other.events):
            if self.flags_of(event) != other.flags_of(event):
                raise AutomatonError(
                    f"Conflicting attributes for shared event {event!r}: "
                    f"{' '.join(self.flags_of(event))} vs {' '.join(other.flags_of(event))}"
                )
        return Alphabet(
            events=self.events | other.events,
            observable=self.observable | other.observable,
            controllable=self.controllable | other.controllable,
            sensor_attackable=self.sensor_attackable | other.sensor_attackable,
            actuator_attackable=self.actuator_attackable | other.actuator_attackable,
        )

    def with_actuator_attacks(self, events: Iterable[str]) -> "Alphabet":
        return Alphabet(self.events, self.observable, self.controllable,
                        self.sensor_attackable, frozenset(events))

    def to_dict(self) -> Dict[str, List[str]]:
        return {event: self.flags_of(event) for event in sorted(self.events)}
