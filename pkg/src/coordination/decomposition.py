"""
Conditional decomposability, coordinator alphabet extension and the
observer property of natural projections.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx

from src.automata.automaton import Automaton, StringSeq, Verdict, format_string
from src.automata.errors import AutomatonError
from src.automata.operations import compare_languages, compose_parallel, project

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecompositionReport:
    decomposable: bool
    counterexample: Optional[StringSeq]
    coordinator_used: FrozenSet[str]

    def lines(self) -> List[str]:
        coordinator = "{" + ", ".join(sorted(self.coordinator_used)) + "}"
        if self.decomposable:
            return [f"conditionally decomposable with coordinator events {coordinator}"]
        return [f"not conditionally decomposable with coordinator events {coordinator}",
                f"counterexample: {format_string(self.counterexample)}"]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "decomposable": self.decomposable,
            "counterexample": list(self.counterexample) if self.counterexample is not None else None,
            "coordinator": sorted(self.coordinator_used),
        }


def _local_alphabets(k: Automaton, s1: Iterable[str], s2: Iterable[str],
                     coordinator: Iterable[str]) -> Tuple[FrozenSet[str], FrozenSet[str]]:
    s1, s2, coordinator = frozenset(s1), frozenset(s2), frozenset(coordinator)
    stray = k.alphabet.events - (s1 | s2)
    if stray:
        raise AutomatonError(f"Events of {k.name} outside both local alphabets: {sorted(stray)}")
    return (s1 | coordinator) & k.alphabet.events, (s2 | coordinator) & k.alphabet.events


def check_conditional_decomposability(k: Automaton, s1: Iterable[str], s2: Iterable[str],
                                      coordinator: Iterable[str] = ()) -> DecompositionReport:
    """
    Decide K = P1(K) || P2(K) for the local alphabets extended by `coordinator`.

    K is always included in the composition, so only the reverse inclusion
    is checked; its shortest failing string is the counterexample.
    """
    coordinator = frozenset(coordinator) | (frozenset(s1) & frozenset(s2))
    e1, e2 = _local_alphabets(k, s1, s2, coordinator)
    composition = compose_parallel(project(k, e1, name="P1(K)"), project(k, e2, name="P2(K)"))
    verdict = compare_languages(composition, k, mode="inclusion")
    if verdict.holds:
        return DecompositionReport(True, None, coordinator)
    logger.debug("%s is not decomposable: %s", k.name, format_string(verdict.witness))
    return DecompositionReport(False, verdict.witness, coordinator)


@dataclass(frozen=True)
class CoordinatorExtension:
    """Final coordinator alphabet and the (added event, counterexample) steps that produced it."""

    alphabet: FrozenSet[str]
    steps: Tuple[Tuple[str, StringSeq], ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alphabet": sorted(self.alphabet),
            "steps": [{"added": event, "counterexample": list(s)} for event, s in self.steps],
        }


def extend_coordinator(k: Automaton, s1: Iterable[str], s2: Iterable[str],
                       coordinator: Iterable[str] = ()) -> CoordinatorExtension:
    """
    Greedy counterexample-driven extension of the coordinator alphabet.

    Starting from (s1 ∩ s2) ∪ coordinator, repeatedly add the smallest
    event of the current counterexample that is not yet a coordinator
    event (or, failing that, the smallest remaining event of K) until K
    is conditionally decomposable. Ends at the latest when every event of
    K is a coordinator event.
    """
    current = frozenset(coordinator) | (frozenset(s1) & frozenset(s2))
    steps: List[Tuple[str, StringSeq]] = []
    while True:
        report = check_conditional_decomposability(k, s1, s2, current)
        if report.decomposable:
            break
        candidates = sorted(set(report.counterexample) - current) or sorted(k.alphabet.events - current)
        if not candidates:
            raise AutomatonError(f"{k.name} is not decomposable even with every event coordinated")
        steps.append((candidates[0], report.counterexample))
        current = current | {candidates[0]}
        logger.info("added coordinator event %s (counterexample %s)", candidates[0],
                    format_string(report.counterexample))
    return CoordinatorExtension(current, tuple(steps))


def extend_coordinator_alphabet(k: Automaton, s1: Iterable[str], s2: Iterable[str]) -> FrozenSet[str]:
    return extend_coordinator(k, s1, s2).alphabet


def check_observer_property(l: Automaton, sk: Iterable[str]) -> Verdict:
    """
    Observer property of the projection of L(l) onto `sk`.

    Walks the product of `l` with its projection; at every reachable pair
    (q, x), each event σ the projection allows at x must be reachable from
    q through events outside `sk` followed by σ.

    Returns:
        Verdict whose detail compares the state counts of `l` and its projection
    """
    if not l.is_deterministic:
        raise AutomatonError(f"Observer property check requires a deterministic automaton; {l.name} is not")
    sk = frozenset(sk) & l.alphabet.events
    projected = project(l, sk)

    hidden = nx.DiGraph()
    hidden.add_nodes_from(l.states)
    hidden.add_edges_from((s, t) for s, label, t in l.transitions if label not in sk)

    sizes = f"{len(projected.states)} projected states for {len(l.states)} states"
    start = (l.initial, projected.initial)
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        (q, x), s = queue.popleft()
        reach = nx.descendants(hidden, q) | {q}
        for event in projected.enabled(x):
            if not any(l.step(r, event) is not None for r in reach):
                return Verdict.failure(s, event, f"{event} cannot follow {format_string(s)} "
                                                 f"after unobserved moves; {sizes}")
        for event, q_next in l.outgoing(q):
            pair = (q_next, projected.step(x, event) if event in sk else x)
            if pair not in seen:
                seen.add(pair)
                queue.append((pair, s + (event,)))
    return Verdict.success(f"observer property holds; {sizes}")
