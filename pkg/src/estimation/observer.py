"""
CA-observers: determinized observation automata of a safe sub-automaton
under sensor attacks, whose states carry state estimates.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, Mapping, Optional, Sequence

from src.attacks.attack_model import AttackSpec, build_attacked_automaton, erase_unobservable
from src.automata.automaton import Automaton
from src.automata.errors import AutomatonError
from src.automata.operations import subset_construction, subset_name

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObserverAutomaton:
    """
    Deterministic observer over the observable events.

    `subsets` maps each observer state to its constituent states of H^a_ε;
    `plant_states` is Q_H, so the estimate carried by a state x is
    subsets[x] ∩ Q_H. States with an empty estimate are unmarked.
    """

    automaton: Automaton
    subsets: Mapping[str, FrozenSet[str]]
    plant_states: FrozenSet[str]

    def __post_init__(self):
        if not self.automaton.is_deterministic:
            raise AutomatonError(f"Observer {self.automaton.name} must be deterministic")
        missing = self.automaton.states - set(self.subsets)
        if missing:
            raise AutomatonError(f"Observer {self.automaton.name}: no subset for {sorted(missing)}")
        object.__setattr__(self, "subsets", {x: frozenset(v) for x, v in self.subsets.items()})
        object.__setattr__(self, "plant_states", frozenset(self.plant_states))

    @property
    def name(self) -> str:
        return self.automaton.name

    @property
    def initial(self) -> str:
        return self.automaton.initial

    @property
    def observable(self) -> FrozenSet[str]:
        return self.automaton.alphabet.events

    def estimate_of(self, x: str) -> FrozenSet[str]:
        return self.subsets[x] & self.plant_states

    def is_marked(self, x: Optional[str]) -> bool:
        return x is not None and x in self.automaton.marked

    def run(self, w: Sequence[str]) -> Optional[str]:
        """Observer state ξ(x0, w), or None when the run is undefined."""
        return self.automaton.run(w)

    def to_dict(self) -> Dict[str, Any]:
        data = self.automaton.to_dict()
        data["plant_states"] = sorted(self.plant_states)
        data["estimates"] = {x: sorted(self.estimate_of(x)) for x in sorted(self.automaton.states)}
        return data


@dataclass(frozen=True)
class StateEstimate:
    """Plant states consistent with an observation; `off_domain` when the observation is outside Φ^a(L(H))."""

    states: FrozenSet[str]
    off_domain: bool = False

    def __str__(self) -> str:
        return "off-domain" if self.off_domain else subset_name(self.states)

    def to_dict(self) -> Dict[str, Any]:
        return {"states": sorted(self.states), "off_domain": self.off_domain}


def build_ca_observer(h: Automaton, atk: AttackSpec, observable: Optional[Iterable[str]] = None,
                      name: Optional[str] = None) -> ObserverAutomaton:
    """
    CA-observer of the safe sub-automaton `h`.

    Builds H^a from the attacks on transitions of `h`, erases the
    unobservable labels and determinizes; the observer marks exactly
    Φ^a(L(H)).

    Args:
        h: Safe sub-automaton of the plant
        atk: Attack specification of the plant (entries outside `h` are ignored)
        observable: Observable events (default: the observable events of `h`)
        name: Optional observer name

    Returns:
        ObserverAutomaton whose estimates are subsets of the states of `h`
    """
    observable = h.alphabet.observable if observable is None else frozenset(observable)
    ha = build_attacked_automaton(h, atk.restricted_to(h), name=f"{h.name}^a")
    ha_eps = erase_unobservable(ha, observable)
    dfa, subsets = subset_construction(ha_eps, name=name or f"Obs({h.name})")
    logger.debug("CA-observer %s: %d states from %d states of %s", dfa.name, len(dfa.states), len(ha.states), ha.name)
    return ObserverAutomaton(dfa, subsets, h.states)


def state_estimate(obs: ObserverAutomaton, w: Sequence[str]) -> StateEstimate:
    """
    E(w) = ξ(x0, w) ∩ Q_H, or an off-domain result when the observer run
    is undefined or ends in an unmarked state.
    """
    x = obs.run(w)
    if not obs.is_marked(x):
        return StateEstimate(frozenset(), off_domain=True)
    return StateEstimate(obs.estimate_of(x))


def rho_disable(e: Iterable[str], g: Automaton, safe: Iterable[str]) -> FrozenSet[str]:
    """Events leading from some state of the estimate `e` to an unsafe state of `g`."""
    e, safe = frozenset(e), frozenset(safe)
    if not e <= safe:
        raise AutomatonError(f"Estimate contains unsafe states: {sorted(e - safe)}")
    return frozenset(event for q in e for event, target in g.outgoing(q) if target not in safe)
