"""CD-model instrumentation for the lower-bound graph family.

Works over execution traces: classifies each round into the canonical
history (single transmitter: its message; several: #; none: silence),
tracks which components still share that history, and audits the
combinatorial departure facts that hold on these graphs by construction.
A failed audit points at an engine or audit bug, so failures are report
entries rather than exceptions.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import TextIO

from .graphs import LBFamilyDescriptor
from .sim import ExecutionTrace, Heard, TX

CANON_HASH = "#"
CANON_SILENCE = "eps"


def canonical_history(trace: ExecutionTrace) -> list:
    """Per-round classification from the global transmitter sets: the message
    if exactly one node transmits, '#' for two or more, 'eps' for none."""
    out = []
    for rec in trace.rounds:
        if len(rec.transmitters) == 1:
            (msg,) = rec.transmitters.values()
            out.append(("m", msg.hex()))
        elif rec.transmitters:
            out.append(CANON_HASH)
        else:
            out.append(CANON_SILENCE)
    return out


def _def3_entry(trace: ExecutionTrace, v: int, rnd: int):
    """Communication-history entry of node v for round rnd (CD semantics:
    transmitting and collision both append '#')."""
    obs = trace.observation_of(v, rnd)
    if obs is TX:
        return CANON_HASH
    if isinstance(obs, Heard):
        return ("m", obs.message.hex())
    # CD-mode silence/collision; no-CD noise is not a valid audit input
    from .sim import COLLISION

    return CANON_HASH if obs is COLLISION else CANON_SILENCE


def canonical_components(
    trace: ExecutionTrace, partition: LBFamilyDescriptor
) -> list[list[int]]:
    """For each round i, the set (as a sorted list of component indices) of
    components whose every node's history equals the canonical one after
    round i. Index 0 of the result corresponds to round 0 (all components)."""
    canon = canonical_history(trace)
    comp_of = partition.component_of()
    ncomp = len(partition.components)
    # first round at which each node's history diverges from the canonical
    diverge = {v: None for v in comp_of}
    for rnd in range(1, trace.num_rounds + 1):
        expected = canon[rnd - 1]
        for v in comp_of:
            if diverge[v] is None and _def3_entry(trace, v, rnd) != expected:
                diverge[v] = rnd
    out = [sorted(range(ncomp))]
    current = set(range(ncomp))
    for rnd in range(1, trace.num_rounds + 1):
        leaving = {
            comp_of[v] for v, d in diverge.items() if d == rnd
        }
        current -= leaving
        out.append(sorted(current))
    return out


@dataclass
class AuditReport:
    graph_n: int
    rounds: int
    departures: list[dict] = field(default_factory=list)
    round_summary: list[dict] = field(default_factory=list)
    violations: dict[str, list[dict]] = field(
        default_factory=lambda: {"F1": [], "L9": [], "F4": [], "F5": [], "LBL": [],
                                 "MONO": []}
    )
    trigger_labels: list[str] = field(default_factory=list)
    distinct_trigger_labels: int = 0

    @property
    def ok(self) -> bool:
        return all(not v for v in self.violations.values())

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.graph_n,
                "rounds": self.rounds,
                "ok": self.ok,
                "departures": self.departures,
                "violations": self.violations,
                "distinct_trigger_labels": self.distinct_trigger_labels,
            },
            indent=2,
        )

    def write_csv(self, fp: TextIO) -> None:
        """Per-round summary for rounds with any transmission activity."""
        w = csv.writer(fp)
        w.writerow(["round", "departures", "transmitter_components", "violations"])
        for row in self.round_summary:
            w.writerow(
                [
                    row["round"],
                    " ".join(map(str, row["departures"])),
                    " ".join(map(str, row["tx_components"])),
                    " ".join(row["violations"]),
                ]
            )


def audit_facts(
    trace: ExecutionTrace,
    partition: LBFamilyDescriptor,
    labels: list[str] | None = None,
) -> AuditReport:
    """Audit the per-round facts on a CD-mode trace:

    F1: with >= 2 transmitters outside a node's component, the node hears
        nothing. L9: a departing component has an in-component transmitter
        and at most one outside transmitter. F4: transmitters in >= 3
        components mean no departures. F5: at most 2 departures per round.
    LBL: the trigger-label multiset has every label at most twice.
    """
    comp_of = partition.component_of()
    report = AuditReport(graph_n=trace.graph.n, rounds=trace.num_rounds)
    comp_sets = canonical_components(trace, partition)
    for rnd in range(1, trace.num_rounds + 1):
        rec = trace.rounds[rnd - 1]
        txs = sorted(rec.transmitters)
        tx_comps = {comp_of[v] for v in txs}
        before, after = set(comp_sets[rnd - 1]), set(comp_sets[rnd])
        if not after <= before:
            report.violations["MONO"].append({"round": rnd, "gained": sorted(after - before)})
        leaving = sorted(before - after)
        # F1
        if len(txs) >= 2:
            for v in range(trace.graph.n):
                outside = sum(1 for u in txs if comp_of[u] != comp_of[v])
                if outside >= 2 and isinstance(trace.observation_of(v, rnd), Heard):
                    report.violations["F1"].append({"round": rnd, "node": v})
        # F4
        if len(tx_comps) >= 3 and leaving:
            report.violations["F4"].append({"round": rnd, "leaving": leaving})
        # F5
        if len(leaving) > 2:
            report.violations["F5"].append({"round": rnd, "leaving": leaving})
        # L9 + trigger labels
        for c in leaving:
            triggers = [v for v in txs if comp_of[v] == c]
            outside = len(txs) - len(triggers)
            if not triggers or outside > 1:
                report.violations["L9"].append(
                    {"round": rnd, "component": c, "triggers": triggers,
                     "outside": outside}
                )
            report.departures.append(
                {"round": rnd, "component": c, "triggers": triggers,
                 "outside": outside}
            )
        if leaving and labels is not None:
            c = leaving[0]
            triggers = [v for v in txs if comp_of[v] == c]
            if triggers:
                report.trigger_labels.append(labels[min(triggers)])
        if txs or leaving:
            hit = [
                name
                for name, rows in report.violations.items()
                if any(r.get("round") == rnd for r in rows)
            ]
            report.round_summary.append(
                {
                    "round": rnd,
                    "departures": leaving,
                    "tx_components": sorted(tx_comps),
                    "violations": hit,
                }
            )
    if labels is not None:
        counts: dict[str, int] = {}
        for lab in report.trigger_labels:
            counts[lab] = counts.get(lab, 0) + 1
        report.distinct_trigger_labels = len(counts)
        for lab, cnt in counts.items():
            if cnt > 2:
                report.violations["LBL"].append({"label": lab, "count": cnt})
    return report
