"""
Interactive HTML export of automata, observers and supervisors with pyvis
"""

import logging
from typing import Dict, Iterable, Optional

from pyvis.network import Network

from src.automata.automaton import EPSILON, Automaton
from src.automata.operations import subset_name
from src.estimation.observer import ObserverAutomaton
from src.estimation.synthesis import SupervisorRealization

logger = logging.getLogger(__name__)

PLANT_COLOR = "#2196F3"
INSERTED_COLOR = "#9C27B0"
MARKED_COLOR = "#4CAF50"
UNSAFE_COLOR = "#F44336"
OTHER_COLOR = "#607D8B"


def state_color(a: Automaton, state: str, unsafe: Iterable[str] = ()) -> str:
    if state in unsafe:
        return UNSAFE_COLOR
    if state in a.inserted:
        return INSERTED_COLOR
    if state in a.marked:
        return MARKED_COLOR
    if state in a.plant_states:
        return PLANT_COLOR
    return OTHER_COLOR


def build_network(a: Automaton, unsafe: Iterable[str] = (), titles: Optional[Dict[str, str]] = None) -> Network:
    """
    Network with one node per state and one labelled edge per transition.

    Unsafe states win over inserted states, which win over marked states.
    """
    unsafe = frozenset(unsafe)
    titles = titles or {}
    net = Network(height="650px", width="100%", bgcolor="#ffffff", font_color="black", directed=True,
                  cdn_resources="remote")
    for state in sorted(a.states):
        label = f"→ {state}" if state == a.initial else state
        net.add_node(state, label=label, title=titles.get(state, state), color=state_color(a, state, unsafe))
    for source, event, target in sorted(a.transitions):
        net.add_edge(source, target, label="ε" if event == EPSILON else event)
    net.barnes_hut(spring_length=180)
    return net


def render_value(value, path: str, unsafe: Iterable[str] = ()) -> str:
    """
    Write the HTML graph of an automaton, observer or supervisor to `path`.

    Observer nodes carry their state estimates as tooltips; supervisor
    nodes also carry their control patterns.
    """
    if isinstance(value, SupervisorRealization):
        obs = value.observer
        titles = {x: f"estimate {subset_name(obs.estimate_of(x))}, enables {subset_name(value.pattern_at(x))}"
                  for x in obs.automaton.states}
        net = build_network(obs.automaton, titles=titles)
    elif isinstance(value, ObserverAutomaton):
        titles = {x: f"estimate {subset_name(value.estimate_of(x))}" for x in value.automaton.states}
        net = build_network(value.automaton, titles=titles)
    elif isinstance(value, Automaton):
        net = build_network(value, unsafe)
    else:
        raise TypeError(f"Cannot render {type(value).__name__}")
    net.save_graph(path)
    logger.info("rendered %s to %s", value.name, path)
    return path
