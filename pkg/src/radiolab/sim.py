"""Deterministic synchronous round engine for the radio model.

A node program sees only its own label, the global round number, and its own
observation history; the engine enforces this by interface shape (programs are
constructed from a label alone and fed one observation per round). Collision
semantics with and without collision detection follow the model exactly: a
listener hears a message iff exactly one neighbor transmits that round.
"""

from __future__ import annotations

import json
import os
from typing import Callable, Mapping, Sequence, TextIO

from .errors import RoundLimitExceeded
from .graphs import Graph

MAX_ROUNDS_ENV = "RADIOLAB_MAX_ROUNDS"


# ---------------------------------------------------------------------------
# Actions and observations
# ---------------------------------------------------------------------------


class Listen:
    __slots__ = ()

    def __repr__(self):
        return "Listen"


class Transmit:
    __slots__ = ("message",)

    def __init__(self, message: bytes):
        self.message = message

    def __repr__(self):
        return f"Transmit({self.message!r})"


LISTEN = Listen()


class Observation:
    __slots__ = ()


class Heard(Observation):
    __slots__ = ("message",)

    def __init__(self, message: bytes):
        self.message = message

    def __eq__(self, other):
        return isinstance(other, Heard) and other.message == self.message

    def __hash__(self):
        return hash(("heard", self.message))

    def __repr__(self):
        return f"Heard({self.message!r})"


class Noise(Observation):
    """No-CD: nothing received (silence and collision are indistinguishable)."""

    __slots__ = ()

    def __repr__(self):
        return "Noise"


class CollisionMark(Observation):
    __slots__ = ()

    def __repr__(self):
        return "CollisionMark"


class SilenceMark(Observation):
    __slots__ = ()

    def __repr__(self):
        return "SilenceMark"


class TxMark(Observation):
    """The node itself transmitted this round."""

    __slots__ = ()

    def __repr__(self):
        return "TxMark"


NOISE = Noise()
COLLISION = CollisionMark()
SILENCE = SilenceMark()
TX = TxMark()


def observation(
    v: int,
    transmitters: Mapping[int, bytes],
    g: Graph,
    cd: bool,
    v_transmitted: bool,
) -> Observation:
    """Observation of node v given this round's transmitter set."""
    if v_transmitted:
        return TX
    sending = [u for u in g.adj[v] if u in transmitters]
    if len(sending) == 1:
        return Heard(transmitters[sending[0]])
    if cd:
        return SILENCE if not sending else COLLISION
    return NOISE


# ---------------------------------------------------------------------------
# Node program contract
# ---------------------------------------------------------------------------


class NodeProgram:
    """Base class for node-local protocol logic.

    Subclasses override `action` (called at the start of each round) and
    `receive` (called with the node's observation at the end of the round).
    `output` is set once, when the node produces its final answer; `idle`
    means the node no longer needs the channel, so the run may stop once all
    outputs are emitted and every node is idle.
    """

    def __init__(self, label: str):
        self.label = label
        self.output = None

    def action(self, rnd: int):
        return LISTEN

    def receive(self, rnd: int, obs: Observation) -> None:
        pass

    @property
    def idle(self) -> bool:
        return self.output is not None


# ---------------------------------------------------------------------------
# Execution traces
# ---------------------------------------------------------------------------


class RoundRecord:
    __slots__ = ("transmitters", "heard")

    def __init__(self, transmitters: dict[int, bytes], heard: dict[int, bytes]):
        self.transmitters = transmitters
        self.heard = heard


class ExecutionTrace:
    """Per-round transmitter sets and deliveries, plus final outputs.

    Per-node observations are stored sparsely: a node's observation in a round
    is TxMark if it transmitted, Heard(m) if it appears in the round's
    delivery map, and otherwise Noise (no-CD) or Silence/Collision (CD)
    depending on its number of transmitting neighbors.
    """

    def __init__(self, g: Graph, cd: bool):
        self.graph = g
        self.cd = cd
        self.rounds: list[RoundRecord] = []
        self.outputs: list = [None] * g.n
        self.output_round: list[int | None] = [None] * g.n

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)

    def observation_of(self, v: int, rnd: int) -> Observation:
        rec = self.rounds[rnd - 1]
        if v in rec.transmitters:
            return TX
        if v in rec.heard:
            return Heard(rec.heard[v])
        if not self.cd:
            return NOISE
        k = sum(1 for u in self.graph.adj[v] if u in rec.transmitters)
        return SILENCE if k == 0 else COLLISION


def history_of(trace: ExecutionTrace, v: int) -> list[Observation]:
    """Exact per-round observation sequence of node v."""
    return [trace.observation_of(v, r) for r in range(1, trace.num_rounds + 1)]


def verify_trace(trace: ExecutionTrace) -> None:
    """Replay every round through observation(); raises AssertionError on any
    divergence between the stored deliveries and the model semantics."""
    g = trace.graph
    for idx, rec in enumerate(trace.rounds, start=1):
        for v in range(g.n):
            obs = observation(v, rec.transmitters, g, trace.cd, v in rec.transmitters)
            stored = trace.observation_of(v, idx)
            assert obs == stored or type(obs) is type(stored), (
                f"round {idx} node {v}: replay {obs!r} != stored {stored!r}"
            )
            if isinstance(obs, Heard):
                assert isinstance(stored, Heard) and stored.message == obs.message


def default_max_rounds(n: int) -> int:
    env = os.environ.get(MAX_ROUNDS_ENV)
    if env:
        return int(env)
    return 50 * n * n


def run(
    g: Graph,
    labels: Sequence[str],
    program: Callable[[str], NodeProgram],
    cd: bool = False,
    max_rounds: int | None = None,
) -> ExecutionTrace:
    """Run `program` on every node of `g` until all nodes have emitted a final
    output and report idle, or `max_rounds` elapses.

    All nodes start at round 1 and share the global clock. The engine is a
    pure function of its arguments: identical inputs give identical traces.
    """
    if len(labels) != g.n:
        raise ValueError(f"need one label per node: {len(labels)} != {g.n}")
    if max_rounds is None:
        max_rounds = default_max_rounds(g.n)
    nodes = [program(labels[v]) for v in range(g.n)]
    trace = ExecutionTrace(g, cd)
    adj = g.adj
    pending_output = set(range(g.n))

    for rnd in range(1, max_rounds + 1):
        # collect outputs emitted before this round (e.g. degenerate programs)
        for v in list(pending_output):
            if nodes[v].output is not None:
                trace.outputs[v] = nodes[v].output
                trace.output_round[v] = rnd - 1
                pending_output.discard(v)
        if not pending_output and all(p.idle for p in nodes):
            break

        transmitters: dict[int, bytes] = {}
        for v, prog in enumerate(nodes):
            act = prog.action(rnd)
            if act is LISTEN:
                continue
            transmitters[v] = act.message

        # count transmitting neighbors only around actual transmitters
        counts: dict[int, int] = {}
        src: dict[int, int] = {}
        for u in transmitters:
            for w in adj[u]:
                c = counts.get(w, 0) + 1
                counts[w] = c
                if c == 1:
                    src[w] = u
        heard: dict[int, bytes] = {}
        for w, c in counts.items():
            if c == 1 and w not in transmitters:
                heard[w] = transmitters[src[w]]
        trace.rounds.append(RoundRecord(transmitters, heard))

        if cd:
            for v, prog in enumerate(nodes):
                if v in transmitters:
                    prog.receive(rnd, TX)
                elif v in heard:
                    prog.receive(rnd, Heard(heard[v]))
                elif counts.get(v, 0) == 0:
                    prog.receive(rnd, SILENCE)
                else:
                    prog.receive(rnd, COLLISION)
        else:
            for v, prog in enumerate(nodes):
                if v in transmitters:
                    prog.receive(rnd, TX)
                elif v in heard:
                    prog.receive(rnd, Heard(heard[v]))
                else:
                    prog.receive(rnd, NOISE)

        for v in list(pending_output):
            if nodes[v].output is not None:
                trace.outputs[v] = nodes[v].output
                trace.output_round[v] = rnd
                pending_output.discard(v)
    else:
        if pending_output:
            raise RoundLimitExceeded(
                f"{len(pending_output)} node(s) produced no output within "
                f"{max_rounds} rounds: {sorted(pending_output)[:10]}"
            )
    return trace


# ---------------------------------------------------------------------------
# Message framing and trace dumps
# ---------------------------------------------------------------------------


def frame(*parts) -> bytes:
    """Encode a message as a compact JSON array; messages stay opaque bytes
    at the engine level, programs define their own framing on top."""
    return json.dumps(parts, separators=(",", ":")).encode()


def unframe(message: bytes) -> list:
    return json.loads(message.decode())


def dump_trace_jsonl(trace: ExecutionTrace, fp: TextIO) -> None:
    """One JSON record per round: transmitters with hex payloads plus the
    per-node observation codes."""
    g = trace.graph
    for idx, rec in enumerate(trace.rounds, start=1):
        obs_codes = []
        for v in range(g.n):
            o = trace.observation_of(v, idx)
            if isinstance(o, Heard):
                obs_codes.append("heard:" + o.message.hex())
            elif o is TX:
                obs_codes.append("tx")
            elif o is NOISE:
                obs_codes.append("noise")
            elif o is SILENCE:
                obs_codes.append("silence")
            else:
                obs_codes.append("collision")
        fp.write(
            json.dumps(
                {
                    "round": idx,
                    "transmitters": [
                        {"node": v, "msg_hex": m.hex()}
                        for v, m in sorted(rec.transmitters.items())
                    ],
                    "observations": obs_codes,
                },
                separators=(",", ":"),
            )
        )
        fp.write("\n")
