"""
Regular-language operations on automata: parallel composition, natural
projection, determinization, language comparison and enumeration, and
safe-state restriction. All operations return new automata.
"""

import logging
from collections import deque
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from src.automata.automaton import EPSILON, Automaton, StringSeq, Verdict, format_string
from src.automata.errors import AutomatonError

logger = logging.getLogger(__name__)

DUMP = "⊥"
GENERATED = "generated"
MARKED = "marked"


def subset_name(states: Iterable[str]) -> str:
    """Canonical id of a subset state: sorted constituents in braces."""
    return "{" + ",".join(sorted(states)) + "}"


def pair_name(left: str, right: str) -> str:
    return f"({left},{right})"


def _require_dfa(a: Automaton, operation: str) -> None:
    if not a.is_deterministic:
        raise AutomatonError(f"{operation} requires a deterministic, ε-free automaton; {a.name} is not")


def _as_dfa(a: Automaton) -> Automaton:
    return a if a.is_deterministic else determinize(a)


def _check_which(which: str) -> None:
    if which not in (GENERATED, MARKED):
        raise ValueError(f"which must be '{GENERATED}' or '{MARKED}', got {which!r}")


def accessible(a: Automaton) -> Automaton:
    """Restriction of `a` to the states reachable from its initial state."""
    graph = a.to_networkx()
    reachable = nx.descendants(graph, a.initial) | {a.initial}
    return Automaton(
        name=a.name,
        states=frozenset(reachable),
        alphabet=a.alphabet,
        transitions=frozenset(t for t in a.transitions if t[0] in reachable),
        initial=a.initial,
        marked=a.marked & reachable,
        inserted=a.inserted & reachable,
    )


def synchronous_product(a: Automaton, b: Automaton, name: Optional[str] = None) -> Tuple[Automaton, Dict[str, Tuple[str, str]]]:
    """
    Parallel composition with its state bookkeeping.

    Returns:
        Tuple of (composed automaton, mapping composed state -> (state of a, state of b))
    """
    _require_dfa(a, "compose_parallel")
    _require_dfa(b, "compose_parallel")
    alphabet = a.alphabet.merge(b.alphabet)
    events = sorted(alphabet.events)

    start = (a.initial, b.initial)
    components = {pair_name(*start): start}
    transitions = []
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for event in events:
            nx_ = a.step(x, event) if event in a.alphabet.events else x
            ny_ = b.step(y, event) if event in b.alphabet.events else y
            if nx_ is None or ny_ is None:
                continue
            target = pair_name(nx_, ny_)
            transitions.append((pair_name(x, y), event, target))
            if target not in components:
                components[target] = (nx_, ny_)
                queue.append((nx_, ny_))

    composed = Automaton(
        name=name or f"{a.name}||{b.name}",
        states=frozenset(components),
        alphabet=alphabet,
        transitions=frozenset(transitions),
        initial=pair_name(*start),
        marked=frozenset(s for s, (x, y) in components.items() if x in a.marked and y in b.marked),
    )
    logger.debug("composed %s: %d states", composed.name, len(composed.states))
    return composed, components


def compose_parallel(a: Automaton, b: Automaton) -> Automaton:
    """Synchronous product: generates L(a) || L(b) over the union alphabet."""
    return synchronous_product(a, b)[0]


def subset_construction(a: Automaton, name: Optional[str] = None) -> Tuple[Automaton, Dict[str, FrozenSet[str]]]:
    """
    Determinize `a` by the subset construction seeded with the
    unobservable reach of the initial state.

    Returns:
        Tuple of (deterministic automaton, mapping subset-state id -> constituent states)
    """
    events = sorted(a.alphabet.events)
    start = a.epsilon_closure({a.initial})
    subsets = {subset_name(start): start}
    transitions = []
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for event in events:
            target = a.post(current, event)
            if not target:
                continue
            target_name = subset_name(target)
            known = subsets.get(target_name)
            if known is None:
                subsets[target_name] = target
                queue.append(target)
            elif known != target:
                raise AutomatonError(f"{a.name}: state ids make subset {target_name} ambiguous")
            transitions.append((subset_name(current), event, target_name))

    result = Automaton(
        name=name or a.name,
        states=frozenset(subsets),
        alphabet=a.alphabet,
        transitions=frozenset(transitions),
        initial=subset_name(start),
        marked=frozenset(x for x, members in subsets.items() if members & a.marked),
    )
    logger.debug("determinized %s: %d -> %d states", a.name, len(a.states), len(result.states))
    return result, subsets


def determinize(a: Automaton) -> Automaton:
    """Deterministic automaton with the same generated and marked languages."""
    return subset_construction(a)[0]


def project(a: Automaton, target: Iterable[str], name: Optional[str] = None) -> Automaton:
    """
    Natural projection of L(a) (and L_m(a)) onto `target`.

    Args:
        a: Source automaton
        target: Events kept by the projection; must be a subset of a's alphabet
        name: Optional name of the result

    Returns:
        Deterministic automaton over `target`
    """
    target = frozenset(target)
    stray = target - a.alphabet.events
    if stray:
        raise AutomatonError(f"Projection events not in alphabet of {a.name}: {sorted(stray)}")
    relabeled = Automaton(
        name=a.name,
        states=a.states,
        alphabet=a.alphabet.restrict(target),
        transitions=frozenset((s, label if label in target else EPSILON, t) for s, label, t in a.transitions),
        initial=a.initial,
        marked=a.marked,
    )
    return subset_construction(relabeled, name=name or f"P({a.name})")[0]


def compare_languages(a: Automaton, b: Automaton, mode: str = "equality", which: str = GENERATED) -> Verdict:
    """
    Decide L(a) = L(b) or L(a) ⊆ L(b) (marked languages with which='marked').

    Both automata are completed with a non-accepting sink over the union
    alphabet. On failure the witness is the shortest, then
    length-lexicographically smallest, distinguishing string.
    """
    if mode not in ("equality", "inclusion"):
        raise ValueError(f"mode must be 'equality' or 'inclusion', got {mode!r}")
    _check_which(which)
    a, b = _as_dfa(a), _as_dfa(b)
    events = sorted(a.alphabet.events | b.alphabet.events)

    def accepting(aut: Automaton, state: Optional[str]) -> bool:
        return state is not None and (which == GENERATED or state in aut.marked)

    def advance(aut: Automaton, state: Optional[str], event: str) -> Optional[str]:
        if state is None or event not in aut.alphabet.events:
            return None
        return aut.step(state, event)

    start = (a.initial, b.initial)
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        (x, y), s = queue.popleft()
        in_a, in_b = accepting(a, x), accepting(b, y)
        if in_a and not in_b:
            return Verdict.failure(s, detail=f"{format_string(s)} is in {a.name} but not in {b.name}")
        if mode == "equality" and in_b and not in_a:
            return Verdict.failure(s, detail=f"{format_string(s)} is in {b.name} but not in {a.name}")
        for event in events:
            pair = (advance(a, x, event), advance(b, y, event))
            if pair == (None, None) or pair in seen:
                continue
            seen.add(pair)
            queue.append((pair, s + (event,)))

    relation = "=" if mode == "equality" else "⊆"
    return Verdict.success(detail=f"{which} language of {a.name} {relation} {b.name}")


def enumerate_language(a: Automaton, max_len: int, which: str = GENERATED) -> List[StringSeq]:
    """
    Strings of length at most `max_len` in the generated (or marked)
    language, in length-lexicographic order. ε-transitions and
    nondeterminism are handled by on-the-fly subset simulation.
    """
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    _check_which(which)
    events = sorted(a.alphabet.events)
    result: List[StringSeq] = []
    level = [((), a.epsilon_closure({a.initial}))]
    for length in range(max_len + 1):
        next_level = []
        for s, states in level:
            if which == GENERATED or states & a.marked:
                result.append(s)
            if length == max_len:
                continue
            for event in events:
                reached = a.post(states, event)
                if reached:
                    next_level.append((s + (event,), reached))
        level = next_level
    return result


def accepts(a: Automaton, s: Sequence[str], which: str = GENERATED) -> bool:
    """
    Membership of `s` in the generated (or marked) language of `a`.

    Raises:
        AutomatonError: an event of `s` is not in the alphabet of `a`.
    """
    _check_which(which)
    states = a.epsilon_closure({a.initial})
    for event in s:
        if event not in a.alphabet.events:
            raise AutomatonError(f"Event {event!r} not in alphabet of {a.name}")
        states = a.post(states, event)
        if not states:
            return False
    return which == GENERATED or bool(states & a.marked)


def restrict_to_safe_states(g: Automaton, safe: Iterable[str], name: Optional[str] = None) -> Automaton:
    """
    Sub-automaton H of `g` on the safe states; transitions leaving the
    safe set are dropped, so L(H) is prefix-closed and included in L(g).
    """
    safe = frozenset(safe)
    unknown = safe - g.states
    if unknown:
        raise AutomatonError(f"Safe states not in {g.name}: {sorted(unknown)}")
    if g.initial not in safe:
        raise AutomatonError(f"Initial state {g.initial} of {g.name} is unsafe; the specification would be empty")
    return Automaton(
        name=name or g.name,
        states=safe,
        alphabet=g.alphabet,
        transitions=frozenset(t for t in g.transitions if t[0] in safe and t[2] in safe),
        initial=g.initial,
        marked=g.marked & safe,
        inserted=g.inserted & safe,
    )


class Refinement(NamedTuple):
    plant: Automaton
    safe: FrozenSet[str]
    component_of: Dict[str, str]


def refine_with_spec(g: Automaton, spec: Automaton) -> Refinement:
    """
    Refine `g` by a deterministic specification automaton.

    The product of `g` with the completion of `spec` (missing moves go to
    a dump state) generates exactly L(g); its states whose specification
    part is not the dump form a safe set whose sub-automaton generates
    L(spec) ∩ L(g).

    Returns:
        Refinement(plant, safe states, mapping refined state -> state of g)
    """
    _require_dfa(g, "refine_with_spec")
    _require_dfa(spec, "refine_with_spec")
    if DUMP in spec.states:
        raise AutomatonError(f"State id {DUMP} is reserved")

    start = (g.initial, spec.initial)
    components = {pair_name(*start): start}
    transitions = []
    queue = deque([start])
    while queue:
        q, k = queue.popleft()
        for event, q_next in g.outgoing(q):
            k_next = spec.step(k, event) if k != DUMP and event in spec.alphabet.events else None
            k_next = DUMP if k_next is None else k_next
            target = pair_name(q_next, k_next)
            transitions.append((pair_name(q, k), event, target))
            if target not in components:
                components[target] = (q_next, k_next)
                queue.append((q_next, k_next))

    plant = Automaton(
        name=g.name,
        states=frozenset(components),
        alphabet=g.alphabet,
        transitions=frozenset(transitions),
        initial=pair_name(*start),
        marked=frozenset(s for s, (q, _) in components.items() if q in g.marked),
    )
    safe = frozenset(s for s, (_, k) in components.items() if k != DUMP)
    return Refinement(plant, safe, {s: q for s, (q, _) in components.items()})
