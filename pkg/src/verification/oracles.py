"""
Brute-force evaluation of the definitions, used to cross-check the
automaton-based decision procedures. Exact on acyclic instances.
"""

import logging
from typing import Dict, FrozenSet, List, Optional, Set

import networkx as nx

from src.attacks.attack_model import AttackSpec, phi_automaton, theta_automaton
from src.automata.alphabet import Alphabet
from src.automata.automaton import Automaton, StringSeq, Verdict, format_string
from src.automata.operations import MARKED, accepts, compare_languages, enumerate_language, project
from src.estimation.observer import ObserverAutomaton
from src.estimation.synthesis import SupervisorRealization, control_pattern
from src.estimation.tracker import OFF_DOMAIN

logger = logging.getLogger(__name__)


def longest_word(a: Automaton) -> int:
    """
    Length of the longest path of an acyclic automaton.

    Raises:
        ValueError: the automaton has a cycle
    """
    graph = nx.DiGraph(a.to_networkx())
    if not nx.is_directed_acyclic_graph(graph):
        raise ValueError(f"{a.name} is cyclic; bounded oracles need acyclic plants and attack automata")
    return nx.dag_longest_path_length(graph)


def observations(g: Automaton, atk: AttackSpec, s: StringSeq) -> List[StringSeq]:
    """Every string of Φ^a(s)."""
    phi = phi_automaton(g, atk, s)
    return enumerate_language(phi, longest_word(phi), MARKED)


def full_language(a: Automaton) -> List[StringSeq]:
    """All strings generated by an acyclic automaton."""
    return enumerate_language(a, longest_word(a))


def brute_state_estimate(h: Automaton, atk: AttackSpec, w: StringSeq) -> FrozenSet[str]:
    """{δ_H(q0, s) : s ∈ L(H), w ∈ Φ^a(s)}."""
    local = atk.restricted_to(h)
    return frozenset(h.run(s) for s in full_language(h) if accepts(phi_automaton(h, local, s), w, MARKED))


def brute_tracker_views(obs: ObserverAutomaton, g: Automaton, atk: AttackSpec, s: StringSeq) -> FrozenSet[str]:
    """{ξ(x0, w) : w ∈ Φ^a(s)}, with undefined runs collapsed to the off-domain marker."""
    return frozenset(obs.run(w) or OFF_DOMAIN for w in observations(g, atk, s))


def ca_observability_bounded(g: Automaton, h: Automaton, atk: AttackSpec, alphabet: Alphabet,
                             depth: int) -> Verdict:
    """
    Direct evaluation of CA-observability for strings of K up to `depth`:
    some observation w of s must make σ safe for every s' ∈ K observed as w.
    """
    local = atk.restricted_to(h)
    k_strings = full_language(h)
    observed: Dict[StringSeq, List[StringSeq]] = {}
    preimages: Dict[StringSeq, List[StringSeq]] = {}
    for s in k_strings:
        observed[s] = observations(h, local, s)
        for w in observed[s]:
            preimages.setdefault(w, []).append(s)

    for s in k_strings:
        if len(s) > depth:
            continue
        for event in h.enabled(h.run(s)):
            def safe_for(w: StringSeq) -> bool:
                return all(g.run(p + (event,)) is None or h.run(p + (event,)) is not None for p in preimages[w])

            if not any(safe_for(w) for w in observed[s]):
                return Verdict.failure(s, event, f"no observation of {format_string(s)} justifies {event}",
                                       bounded=True)
    return Verdict.success(f"CA-observable up to depth {depth}", bounded=True)


def classical_observability_bounded(g: Automaton, h: Automaton, observable: FrozenSet[str], depth: int) -> bool:
    """P(s) = P(s'), sσ ∈ K, s'σ ∈ L(G) imply s'σ ∈ K, for strings of K up to `depth`."""
    k_strings = [s for s in full_language(h) if len(s) <= depth]

    def p(s: StringSeq) -> StringSeq:
        return tuple(e for e in s if e in observable)

    for s in k_strings:
        for s_prime in k_strings:
            if p(s) != p(s_prime):
                continue
            for event in h.enabled(h.run(s)):
                if g.run(s_prime + (event,)) is not None and h.run(s_prime + (event,)) is None:
                    return False
    return True


def observer_property_bounded(l: Automaton, sk: FrozenSet[str], depth: int) -> Verdict:
    """
    Observer property for strings of L up to `depth`: whenever P(s)σ ∈ P(L)
    with σ ∈ Σ_k, some u over the other events has suσ ∈ L.
    """
    sk = frozenset(sk) & l.alphabet.events
    projected = project(l, sk)
    hidden = sorted(l.alphabet.events - sk)
    for s in enumerate_language(l, depth):
        x = projected.run(tuple(e for e in s if e in sk))
        suffixes = _hidden_suffixes(l, l.run(s), hidden)
        for event in projected.enabled(x):
            if not any(l.step(q, event) is not None for q in suffixes):
                return Verdict.failure(s, event, f"{event} is not reachable after {format_string(s)}", bounded=True)
    return Verdict.success(f"observer property holds up to depth {depth}", bounded=True)


def _hidden_suffixes(l: Automaton, q: str, hidden: List[str]) -> Set[str]:
    """States reached from q by strings over `hidden` of length below |Q|."""
    level, reached = {q}, {q}
    for _ in range(len(l.states)):
        successors = {l.step(state, e) for state in level for e in hidden}
        level = successors - {None}
        reached |= level
    return reached


def large_language_bounded(g: Automaton, sup: SupervisorRealization, atk: AttackSpec, depth: int) -> List[StringSeq]:
    """
    L_a up to length `depth` by the recursive definition: ε belongs to it,
    and sσ does when sσ ∈ L(G) and σ is uncontrollable, actuator-attackable,
    outside the supervisor's alphabet, or enabled by S(w) for some w ∈ Φ^a(s).
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    free = g.alphabet.uncontrollable | g.alphabet.actuator_attackable | (g.alphabet.events - sup.local_alphabet.events)
    result: List[StringSeq] = [()]
    level: List[StringSeq] = [()]
    for _ in range(depth):
        next_level = []
        for s in level:
            enabled = set(free)
            for w in observations(g, atk, s):
                enabled |= control_pattern(sup, w)
            next_level.extend(s + (event,) for event, _ in g.outgoing(g.run(s)) if event in enabled)
        result.extend(next_level)
        level = next_level
    return result


def assumption_one_bounded(g: Automaton, global_atk: AttackSpec, local: Automaton, local_atk: AttackSpec,
                           depth: int, label: Optional[str] = None) -> Verdict:
    """
    Local observations depend on the local projection only: for every s ∈ L(G)
    up to `depth`, the local attacked observations of P_i(s) equal the
    projection onto Σ_i ∩ Σ_o of the global attacked strings Θ^a(s).
    """
    events = local.alphabet.events
    local_observable = local.alphabet.observable
    for s in enumerate_language(g, depth):
        p_s = tuple(e for e in s if e in events)
        local_view = phi_automaton(local, local_atk, p_s)
        global_view = project(theta_automaton(g, global_atk, s), local_observable & g.alphabet.events)
        verdict = compare_languages(local_view, global_view, which=MARKED)
        if not verdict.holds:
            detail = f"local observations of {format_string(s)} differ on {verdict.witness_text()}"
            logger.warning("%s: %s", label or local.name, detail)
            return Verdict.failure(s, detail=detail, bounded=True)
    return Verdict.success(f"local observations consistent up to depth {depth}", bounded=True)
