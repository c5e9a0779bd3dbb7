"""
Large languages of attacked closed loops and the equalities relating the
coordinated closed loop to its local parts and to the specification.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from src.attacks.attack_model import AttackSpec
from src.automata.automaton import Automaton, Verdict
from src.automata.operations import compare_languages, compose_parallel, project
from src.estimation.synthesis import SupervisorRealization
from src.estimation.tracker import Admission, ObservationStepper, TrackerState, explore

logger = logging.getLogger(__name__)


def enabling_rule(plant: Automaton, sup: SupervisorRealization) -> Admission:
    """
    σ may occur at (q, W) when it is uncontrollable, actuator-attackable
    (some tampered pattern contains it), outside the supervisor's alphabet,
    or enabled by the pattern of some observer state in W.
    """
    alphabet = plant.alphabet
    free = alphabet.uncontrollable | alphabet.actuator_attackable | (alphabet.events - sup.local_alphabet.events)

    def admit(state: TrackerState, event: str) -> bool:
        return event in free or any(event in sup.pattern_at(x) for x in state.views)

    return admit


def large_language(g: Automaton, sup: SupervisorRealization, atk: AttackSpec, name: Optional[str] = None) -> Automaton:
    """Deterministic automaton generating L_a(S^a/G); every state is marked."""
    tracker = explore(g, ObservationStepper(sup.observer, atk), enabling_rule(g, sup))
    return tracker.to_automaton(name or f"La({g.name})", g.alphabet)


def conjunction_large_language(g1: Automaton, g2: Automaton, s1: SupervisorRealization, s2: SupervisorRealization,
                               atk1: AttackSpec, atk2: AttackSpec, name: str = "La") -> Automaton:
    """
    Large language of the conjunction of two local supervisors on G1 ∥ G2.

    σ occurs when it is defined in every component whose alphabet has it
    and each such component's enabling rule accepts it; the view set of a
    component only moves on its own events.
    """
    alphabet = g1.alphabet.merge(g2.alphabet)
    parts = [(g1, ObservationStepper(s1.observer, atk1), enabling_rule(g1, s1)),
             (g2, ObservationStepper(s2.observer, atk2), enabling_rule(g2, s2))]

    initial = tuple(TrackerState(g.initial, stepper.initial_views()) for g, stepper, _ in parts)
    index = {initial: "t0"}
    transitions = []
    queue = deque([initial])
    while queue:
        state = queue.popleft()
        for event in sorted(alphabet.events):
            target = []
            for local, (g, stepper, admit) in zip(state, parts):
                if event not in g.alphabet.events:
                    target.append(local)
                    continue
                q_next = g.step(local.plant, event)
                if q_next is None or not admit(local, event):
                    break
                target.append(TrackerState(q_next, stepper.step(local.views, (local.plant, event, q_next))))
            else:
                target = tuple(target)
                if target not in index:
                    index[target] = f"t{len(index)}"
                    queue.append(target)
                transitions.append((index[state], event, index[target]))

    logger.debug("conjunction large language: %d states", len(index))
    return Automaton.build(name, alphabet, transitions, "t0", states=index.values())


@dataclass(frozen=True)
class ClosedLoopReport:
    """Named language equalities with their verdicts."""

    checks: Tuple[Tuple[str, Verdict], ...]

    @property
    def holds(self) -> bool:
        return all(verdict.holds for _, verdict in self.checks)

    def lines(self) -> List[str]:
        lines = []
        for label, verdict in self.checks:
            status = "holds" if verdict.holds else f"FAILS, witness {verdict.witness_text()}"
            lines.append(f"{label}: {status}")
        return lines

    def to_dict(self) -> Dict[str, Any]:
        return {"holds": self.holds, "checks": {label: verdict.to_dict() for label, verdict in self.checks}}


def verify_closed_loop(g1: Automaton, g2: Automaton, k: Automaton, sup1: SupervisorRealization,
                    sup2: SupervisorRealization, atk1: AttackSpec, atk2: AttackSpec) -> ClosedLoopReport:
    """
    Check the coordinated closed loop against its local parts and K.

    Args:
        g1, g2: Local plants the supervisors were synthesized on
        k: Automaton generating the global specification K
        sup1, sup2: Local supervisors
        atk1, atk2: Local attack specifications on g1 and g2

    Returns:
        ClosedLoopReport with the conjunction/local-product equality, the
        equality of each local large language with P_i(K), and the
        equality of the conjunction with K
    """
    la1 = large_language(g1, sup1, atk1, name="La1")
    la2 = large_language(g2, sup2, atk2, name="La2")
    conjunction = conjunction_large_language(g1, g2, sup1, sup2, atk1, atk2)
    checks = (
        ("La(S1 & S2) = La(S1) || La(S2)", compare_languages(conjunction, compose_parallel(la1, la2))),
        ("La(S1) = P1(K)", compare_languages(la1, project(k, g1.alphabet.events & k.alphabet.events, name="P1(K)"))),
        ("La(S2) = P2(K)", compare_languages(la2, project(k, g2.alphabet.events & k.alphabet.events, name="P2(K)"))),
        ("La(S1 & S2) = K", compare_languages(conjunction, k)),
    )
    report = ClosedLoopReport(checks)
    for line in report.lines():
        logger.debug(line)
    return report
