"""
Plain-text tables and verdict lines for the command-line reports
"""

from typing import Any, Dict, List

import pandas as pd

from src.automata.automaton import Automaton, Verdict
from src.automata.operations import subset_name
from src.estimation.observer import ObserverAutomaton
from src.estimation.synthesis import SupervisorRealization
from src.verification.simulator import SimReport


def table(rows: List[Dict[str, Any]], columns: List[str]) -> str:
    if not rows:
        return "(none)"
    return pd.DataFrame(rows, columns=columns).to_string(index=False)


def observer_table(obs: ObserverAutomaton) -> str:
    rows = [{"state": x, "marked": obs.is_marked(x), "estimate": subset_name(obs.estimate_of(x))}
            for x in sorted(obs.automaton.states)]
    return table(rows, ["state", "marked", "estimate"])


def pattern_table(sup: SupervisorRealization) -> str:
    """Pattern per marked observer state, plus the off-domain row."""
    obs = sup.observer
    rows = [{"state": x, "estimate": subset_name(obs.estimate_of(x)), "enabled": subset_name(p)}
            for x, p in sorted(sup.pattern_of.items())]
    rows.append({"state": "(otherwise)", "estimate": "-", "enabled": subset_name(sup.off_domain_pattern)})
    return table(rows, ["state", "estimate", "enabled"])


def violation_table(report: SimReport) -> str:
    rows = [{"run": v.run, "string": " ".join(v.string), "position": v.position} for v in report.violations]
    return table(rows, ["run", "string", "position"])


def automaton_summary(a: Automaton) -> str:
    return (f"{a.name}: {len(a.states)} states, {len(a.transitions)} transitions, "
            f"{len(a.alphabet.events)} events, {len(a.marked)} marked")


def verdict_line(label: str, verdict: Verdict) -> str:
    if verdict.holds:
        return f"{label}: holds"
    return f"{label}: FAILS, witness {verdict.witness_text()}"


def verdict_lines(label: str, verdict: Verdict) -> List[str]:
    lines = [verdict_line(label, verdict)]
    if verdict.detail:
        lines.append(f"  {verdict.detail}")
    if verdict.bounded:
        lines.append("  (bounded check)")
    return lines
