"""Scheme registry: build labels, run, and verify outputs per scheme name."""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import Graph, diameter
from .labels import SchemeBundle, int_to_bits
from .sim import ExecutionTrace, run
from .size_discovery import (
    build_compact_labels,
    auxiliary_sd_program,
    build_fast_sd,
    build_general_sd,
    fast_sd_program,
    general_sd_program,
)
from .toprec import (
    broadcast_bfs_program,
    build_bfs_labels,
    build_toprec_labels,
    gather_bfs_program,
    toprec_program,
)

SCHEMES = ("compact", "general", "fastsd", "toprec", "broadcast-bfs", "gather-bfs")

BROADCAST_TEST_MESSAGE = "101"


@dataclass
class SchemeResult:
    scheme: str
    bundle: SchemeBundle
    trace: ExecutionTrace
    ok: bool
    correct_outputs: int

    def bench_record(self, graph_id: str, g: Graph) -> dict:
        return {
            "graph": graph_id,
            "n": g.n,
            "max_degree": g.max_degree(),
            "diameter": diameter(g) if g.n > 1 else 0,
            "scheme": self.scheme,
            "max_label_bits": self.bundle.max_label_bits(),
            "total_rounds": self.trace.num_rounds,
            "correct_outputs": self.correct_outputs,
        }


def build_bundle(scheme: str, g: Graph) -> SchemeBundle:
    if scheme == "compact":
        return build_compact_labels(g)
    if scheme == "general":
        return build_general_sd(g)
    if scheme == "fastsd":
        return build_fast_sd(g)
    if scheme == "toprec":
        return build_toprec_labels(g)
    if scheme == "broadcast-bfs":
        return build_bfs_labels(g, 0)
    if scheme == "gather-bfs":
        return build_bfs_labels(
            g, 0, payloads=[int_to_bits(v + 1, max(g.n.bit_length(), 1)) for v in range(g.n)]
        )
    raise ValueError(f"unknown scheme {scheme!r} (choose from {SCHEMES})")


def program_for(scheme: str):
    if scheme == "compact":
        return auxiliary_sd_program()
    if scheme == "general":
        return general_sd_program()
    if scheme == "fastsd":
        return fast_sd_program()
    if scheme == "toprec":
        return toprec_program()
    if scheme == "broadcast-bfs":
        return broadcast_bfs_program(BROADCAST_TEST_MESSAGE)
    if scheme == "gather-bfs":
        return gather_bfs_program()
    raise ValueError(f"unknown scheme {scheme!r}")


def verify_outputs(scheme: str, g: Graph, bundle: SchemeBundle, trace) -> int:
    """Number of nodes with the expected output."""
    if scheme in ("compact", "general", "fastsd"):
        return sum(1 for out in trace.outputs if out == g.n)
    if scheme == "toprec":
        ids = bundle.meta["ids"]
        expected_edges = sorted(
            (min(ids[u], ids[v]), max(ids[u], ids[v])) for u, v in g.edges()
        )
        return sum(
            1
            for v, out in enumerate(trace.outputs)
            if out == (expected_edges, ids[v])
        )
    if scheme == "broadcast-bfs":
        return sum(1 for out in trace.outputs if out == BROADCAST_TEST_MESSAGE)
    if scheme == "gather-bfs":
        expected = sorted(
            int_to_bits(v + 1, max(g.n.bit_length(), 1)) for v in range(g.n)
        )
        score = 1 if trace.outputs[0] == expected else 0
        return score + sum(1 for out in trace.outputs[1:] if out is not None)
    raise ValueError(f"unknown scheme {scheme!r}")


def run_scheme(
    scheme: str, g: Graph, cd: bool = False, max_rounds: int | None = None
) -> SchemeResult:
    bundle = build_bundle(scheme, g)
    trace = run(g, bundle.labels, program_for(scheme), cd=cd, max_rounds=max_rounds)
    correct = verify_outputs(scheme, g, bundle, trace)
    return SchemeResult(
        scheme=scheme,
        bundle=bundle,
        trace=trace,
        ok=correct == g.n,
        correct_outputs=correct,
    )
