"""
CA-controllability and CA-observability decision procedures and the
state-estimate supervisor.
"""

import logging
from collections import deque
from dataclasses import dataclass, replace
from typing import Any, Dict, FrozenSet, Iterable, Mapping, Optional, Sequence

from src.attacks.attack_model import AttackSpec
from src.automata.alphabet import Alphabet
from src.automata.automaton import Automaton, Verdict, format_string
from src.automata.errors import SynthesisError
from src.estimation.observer import ObserverAutomaton, build_ca_observer, rho_disable
from src.estimation.tracker import OFF_DOMAIN, build_tracker

logger = logging.getLogger(__name__)


def check_ca_controllability(g: Automaton, h: Automaton, alphabet: Alphabet) -> Verdict:
    """
    K(Σ_uc ∪ Σ_c^a) ∩ L(G) ⊆ K, with K = L(h).

    Walks the product of `h` and `g`; the witness is the shortest access
    string of a pair where an uncontrollable or actuator-attackable event
    is possible in `g` but not in `h`.
    """
    risky = sorted((alphabet.uncontrollable | alphabet.actuator_attackable) & g.alphabet.events)
    start = (h.initial, g.initial)
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        (qh, qg), s = queue.popleft()
        for event in risky:
            if g.step(qg, event) is not None and h.step(qh, event) is None:
                return Verdict.failure(s, event, f"{format_string(s + (event,))} leaves the specification "
                                                 f"through an uncontrollable or actuator-attackable event")
        for event, qh_next in h.outgoing(qh):
            qg_next = g.step(qg, event)
            if qg_next is None:
                continue
            pair = (qh_next, qg_next)
            if pair not in seen:
                seen.add(pair)
                queue.append((pair, s + (event,)))
    return Verdict.success(f"{h.name} is CA-controllable with respect to {g.name}")


def check_ca_observability(g: Automaton, h: Automaton, atk: AttackSpec, alphabet: Alphabet,
                           obs: Optional[ObserverAutomaton] = None) -> Verdict:
    """
    CA-observability of K = L(h) decided on the tracker.

    For every tracker state (q, W) and every σ defined at q in `h`, some
    marked observer state x ∈ W must have σ ∉ ρ(E(x)): then the witness
    observation justifies enabling σ for every preimage in K.
    """
    obs = obs or build_ca_observer(h, atk, alphabet.observable)
    tracker = build_tracker(g, h, obs, atk)
    for state in tracker.states:
        for event in h.enabled(state.plant):
            justified = any(
                obs.is_marked(x) and event not in rho_disable(obs.estimate_of(x), g, h.states)
                for x in state.views if x != OFF_DOMAIN
            )
            if not justified:
                s = tracker.access[state]
                return Verdict.failure(s, event, f"every attacked observation of {format_string(s)} "
                                                 f"confuses it with a string after which {event} is unsafe")
    return Verdict.success(f"{h.name} is CA-observable with respect to {g.name}")


def check_controllability(g: Automaton, h: Automaton, alphabet: Alphabet) -> Verdict:
    """Classical controllability: CA-controllability without actuator attacks."""
    return check_ca_controllability(g, h, alphabet.with_actuator_attacks(()))


def check_observability(g: Automaton, h: Automaton, alphabet: Alphabet) -> Verdict:
    """Classical observability: CA-observability without sensor attacks."""
    return check_ca_observability(g, h, AttackSpec.empty(g.name), alphabet)


@dataclass(frozen=True)
class SupervisorRealization:
    """
    Observer-based supervisor.

    `pattern_of` holds the pattern of every marked observer state; any
    other observation (undefined run, unmarked state, OFF_DOMAIN marker)
    gets `off_domain_pattern`.
    """

    name: str
    observer: ObserverAutomaton
    pattern_of: Mapping[str, FrozenSet[str]]
    off_domain_pattern: FrozenSet[str]
    local_alphabet: Alphabet

    def __post_init__(self):
        object.__setattr__(self, "pattern_of", {x: frozenset(p) for x, p in self.pattern_of.items()})
        object.__setattr__(self, "off_domain_pattern", frozenset(self.off_domain_pattern))
        unknown = set(self.pattern_of) - self.observer.automaton.marked
        if unknown:
            raise SynthesisError(f"Supervisor {self.name}: patterns for unmarked observer states {sorted(unknown)}")

    def pattern_at(self, x: Optional[str]) -> FrozenSet[str]:
        if x is None or x == OFF_DOMAIN or not self.observer.is_marked(x):
            return self.off_domain_pattern
        return self.pattern_of[x]

    def with_enabled(self, events: Iterable[str]) -> "SupervisorRealization":
        """Copy that additionally enables `events` everywhere."""
        extra = frozenset(events)
        return replace(
            self,
            pattern_of={x: p | extra for x, p in self.pattern_of.items()},
            off_domain_pattern=self.off_domain_pattern | extra,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "alphabet": self.local_alphabet.to_dict(),
            "observer": self.observer.to_dict(),
            "patterns": {x: sorted(p) for x, p in sorted(self.pattern_of.items())},
            "off_domain": sorted(self.off_domain_pattern),
        }


def synthesize_ca_supervisor(g: Automaton, h: Automaton, atk: AttackSpec, alphabet: Alphabet,
                             force: bool = False, name: str = "S") -> SupervisorRealization:
    """
    State-estimate supervisor achieving K = L(h).

    Args:
        g: Plant
        h: Safe sub-automaton of `g` generating K
        atk: Sensor attacks on `g`
        alphabet: Local alphabet with observation, control and attack attributes
        force: Skip the CA-controllability and CA-observability preconditions
        name: Supervisor name

    Returns:
        SupervisorRealization with pattern (Σ_i − ρ(E)) ∪ (Σ_uc ∩ Σ_i) on the observer domain
        and Σ_uc ∩ Σ_i elsewhere

    Raises:
        SynthesisError: a precondition fails and `force` is not set
    """
    obs = build_ca_observer(h, atk, alphabet.observable)
    if not force:
        for label, verdict in (("CA-controllability", check_ca_controllability(g, h, alphabet)),
                               ("CA-observability", check_ca_observability(g, h, atk, alphabet, obs))):
            if not verdict.holds:
                raise SynthesisError(f"{label} fails for {h.name}: witness {verdict.witness_text()}", verdict)

    always = alphabet.uncontrollable & alphabet.events
    patterns = {
        x: (alphabet.events - rho_disable(obs.estimate_of(x), g, h.states)) | always
        for x in sorted(obs.automaton.marked)
    }
    logger.debug("supervisor %s: %d observer states, %d on the domain", name, len(obs.automaton.states), len(patterns))
    return SupervisorRealization(name, obs, patterns, always, alphabet)


def control_pattern(sup: SupervisorRealization, w: Sequence[str]) -> FrozenSet[str]:
    """Pattern issued after observing `w`."""
    return sup.pattern_at(sup.observer.run(w))
