"""Stage-based broadcast engine with 3-bit labels.

Offline synthesis simulates the stage structure (three rounds per stage:
transmit, feedback, optional go round) and fixes each node's join/stay/go
bits on first use; the node-side core then reproduces the exact same
execution from labels and local history alone. The construction maintains,
per stage, a minimal set DOM of informed nodes dominating the frontier of
uninformed nodes, which yields the broadcast-tree level structure asserted
in tests (every DOM member informs at least one uniquely covered node per
stage, and membership intervals are consecutive).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptySourceSet, Undominatable
from .graphs import Graph
from .labels import SchemeBundle, encode_blocks
from .sim import LISTEN, Heard, NodeProgram, Transmit, frame, unframe


# ---------------------------------------------------------------------------
# Minimal dominating subsets
# ---------------------------------------------------------------------------


def minimal_dominating_subset(
    candidates: set[int], targets: set[int], g: Graph
) -> set[int]:
    """Subset of `candidates` dominating `targets` (every target keeps a
    neighbor in the set), minimal under removal; greedy removal in descending
    index order for determinism."""
    chosen = set(candidates)
    cover: dict[int, int] = {}
    for u in targets:
        c = sum(1 for w in g.adj[u] if w in chosen)
        if c == 0:
            raise Undominatable(f"target {u} has no candidate neighbor")
        cover[u] = c
    for v in sorted(chosen, reverse=True):
        touched = [u for u in g.adj[v] if u in cover]
        if all(cover[u] >= 2 for u in touched):
            chosen.discard(v)
            for u in touched:
                cover[u] -= 1
    return chosen


# ---------------------------------------------------------------------------
# Offline synthesis
# ---------------------------------------------------------------------------


@dataclass
class StageRecord:
    stage: int
    dom: set[int]
    frontier: set[int]
    newly: dict[int, int]  # newly informed node -> parent
    feedback: dict[int, int]  # DOM member -> its designated feedback node


@dataclass
class BroadcastTree:
    """First-successful-delivery parents under the stage broadcast."""

    sources: tuple[int, ...]
    parent: dict[int, int]
    level: dict[int, int]  # sources have level 0
    t: int  # total rounds (3 * stage count)

    def max_level(self) -> int:
        return max(self.level.values(), default=0)


@dataclass
class CoreSynthesis:
    tree: BroadcastTree
    stages: list[StageRecord]
    join: list[int]
    stay: list[int]
    go: list[int]
    dom1: list[int]
    t: int


def synthesize_core(g: Graph, sources: set[int]) -> CoreSynthesis:
    """Simulate the stage structure offline and fix label bits on first use.

    join is fixed the stage a node is informed (1 iff the greedy minimal
    dominating construction for the next frontier selects it); a feedback
    node's stay bit is fixed when designated. go is always 0 here: round 3
    of each stage stays silent but is still counted, preserving the mod-3
    level arithmetic.
    """
    if not sources:
        raise EmptySourceSet("need at least one source")
    n = g.n
    informed = set(sources)
    level = {s: 0 for s in sources}
    parent: dict[int, int] = {}
    join = [0] * n
    stay = [0] * n
    go = [0] * n
    dom1 = [0] * n

    frontier = {u for s in sources for u in g.adj[s] if u not in informed}
    dom = minimal_dominating_subset(sources, frontier, g) if frontier else set()
    for v in dom:
        dom1[v] = 1

    stages: list[StageRecord] = []
    stage = 1
    while len(informed) < n:
        if not dom:
            raise Undominatable("no dominators left but nodes remain uninformed")
        r1 = 3 * stage - 2
        newly: dict[int, int] = {}
        for u in frontier:
            senders = [w for w in g.adj[u] if w in dom]
            if len(senders) == 1:
                newly[u] = senders[0]
                level[u] = r1
        children: dict[int, list[int]] = {v: [] for v in dom}
        for u, p in newly.items():
            children[p].append(u)
        feedback = {}
        for v in dom:
            assert children[v], (
                f"stage {stage}: DOM member {v} informed nobody (minimality bug)"
            )
            feedback[v] = min(children[v])
        informed |= set(newly)
        next_frontier = {
            u
            for w in informed
            for u in g.adj[w]
            if u not in informed
        }
        if next_frontier:
            next_dom = minimal_dominating_subset(dom | set(newly), next_frontier, g)
        else:
            next_dom = set()
        for u in newly:
            join[u] = 1 if u in next_dom else 0
        for v in dom:
            stay[feedback[v]] = 1 if v in next_dom else 0
        stages.append(
            StageRecord(stage=stage, dom=dom, frontier=frontier, newly=newly,
                        feedback=feedback)
        )
        dom = next_dom
        frontier = next_frontier
        stage += 1
        assert stage <= n + 1, "stage count exceeded n"

    t = 3 * (stage - 1)
    for rec in stages:
        parent.update(rec.newly)
    tree = BroadcastTree(
        sources=tuple(sorted(sources)), parent=parent, level=level, t=t
    )
    return CoreSynthesis(
        tree=tree, stages=stages, join=join, stay=stay, go=go, dom1=dom1, t=t
    )


# ---------------------------------------------------------------------------
# Node-side core
# ---------------------------------------------------------------------------


class ExecCore:
    """Label-driven broadcast core, reactive unless started as a source.

    Relative rounds are learned from the round numbers attached to messages:
    a node informed at attached round r with global clock a derives the
    instance offset a - r, so no participant needs to know the start round
    in advance. Message kinds: ("b", rel, sender_level, payload) for the
    broadcast rounds, ("f", rel, stay, go) for feedback.
    """

    __slots__ = (
        "tag", "join", "stay", "go", "informed", "message", "level",
        "parent_level", "offset", "in_dom", "_stage", "_informed_this_stage",
        "_heard_stay", "_heard_go", "_fb_sent", "_settled", "tx_rounds",
    )

    def __init__(self, tag: str, join: int, stay: int, go: int):
        self.tag = tag
        self.join = join
        self.stay = stay
        self.go = go
        self.informed = False
        self.message = None
        self.level: int | None = None
        self.parent_level: int | None = None
        self.offset: int | None = None
        self.in_dom = False
        self._stage = 1
        self._informed_this_stage = False
        self._heard_stay = False
        self._heard_go = False
        self._fb_sent = False
        self._settled = False
        self.tx_rounds: list[int] = []

    def start_source(self, start_abs: int, message, in_dom: bool) -> None:
        """Become an initially informed node; relative round 1 = start_abs."""
        self.informed = True
        self.message = message
        self.level = 0
        self.offset = start_abs - 1
        self.in_dom = in_dom

    def _advance(self, stage: int) -> None:
        while self._stage < stage:
            self.in_dom = (self.in_dom and self._heard_stay) or (
                self._informed_this_stage and bool(self.join)
            )
            self._informed_this_stage = False
            self._heard_stay = False
            self._heard_go = False
            self._stage += 1

    def action(self, abs_rnd: int):
        if self._settled or self.offset is None:
            return None
        rel = abs_rnd - self.offset
        if rel < 1:
            return None
        stage = (rel + 2) // 3
        self._advance(stage)
        # an informed node outside DOM with its join consumed and feedback
        # duty behind it can never transmit again in this instance
        if (
            not self.in_dom
            and self.informed
            and not self._informed_this_stage
        ):
            self._settled = True
            return None
        pos = rel - 3 * (stage - 1)
        if pos == 1 and self.in_dom:
            self.tx_rounds.append(rel)
            return (self.tag, "b", rel, self.level, self.message)
        if pos == 2 and self._informed_this_stage and not self._fb_sent and (
            self.stay or self.go
        ):
            self._fb_sent = True
            return (self.tag, "f", rel, self.stay, self.go)
        if pos == 3 and self.in_dom and self._heard_go:
            self.tx_rounds.append(rel)
            return (self.tag, "b", rel, self.level, self.message)
        return None

    def on_message(self, abs_rnd: int, parts) -> None:
        kind = parts[1]
        if kind == "b":
            if not self.informed:
                rel = parts[2]
                self.informed = True
                self.level = rel
                self.offset = abs_rnd - rel
                self.parent_level = parts[3]
                self.message = parts[4]
                self._stage = (rel + 2) // 3
                self._informed_this_stage = True
        elif kind == "f":
            if self.in_dom:
                if parts[3]:
                    self._heard_stay = True
                if parts[4]:
                    self._heard_go = True

    def poststep(self, abs_rnd: int) -> None:
        """Process the end-of-stage membership update as soon as round 3 ends."""
        if self._settled or self.offset is None:
            return
        rel = abs_rnd - self.offset
        if rel >= 3 and rel % 3 == 0:
            self._advance(rel // 3 + 1)

    @property
    def active(self) -> bool:
        if not self.informed:
            return False
        return (
            self.in_dom
            or (self._informed_this_stage and bool(self.join))
            or (self._informed_this_stage and not self._fb_sent and bool(self.stay or self.go))
        )

    @property
    def passive(self) -> bool:
        """True when this core cannot transmit or change state except through
        a future reception (dormant, or permanently settled)."""
        return self._settled or self.offset is None


# ---------------------------------------------------------------------------
# Labels and programs for plain (multi-source) broadcast
# ---------------------------------------------------------------------------


def _core_blocks(syn: CoreSynthesis, v: int, src: bool) -> list[str]:
    jsg = f"{syn.join[v]}{syn.stay[v]}{syn.go[v]}"
    flags = f"{1 if src else 0}{syn.dom1[v]}"
    return [jsg, flags]


def synthesize_executor(g: Graph, s: int) -> SchemeBundle:
    """Single-source broadcast labels; bundle meta carries the broadcast tree,
    DOM schedule and round count for tests."""
    syn = synthesize_core(g, {s})
    labels = [encode_blocks(_core_blocks(syn, v, v == s)) for v in range(g.n)]
    return SchemeBundle(
        scheme="exec",
        labels=labels,
        meta={"synthesis": syn, "source": s, "t": syn.t},
    )


def synthesize_mbroadcast(g: Graph, sources: set[int]) -> SchemeBundle:
    """Multi-source variant: FRONTIER_1 is the out-neighborhood of the source
    set and DOM_1 a minimal dominating subset of the sources for it."""
    syn = synthesize_core(g, set(sources))
    labels = [
        encode_blocks(_core_blocks(syn, v, v in sources)) for v in range(g.n)
    ]
    return SchemeBundle(
        scheme="mbroadcast",
        labels=labels,
        meta={"synthesis": syn, "sources": sorted(sources), "t": syn.t},
    )


class BroadcastProgram(NodeProgram):
    """Runs one ExecCore; output is the received payload."""

    TAG = "x"

    def __init__(self, label: str, message="1"):
        super().__init__(label)
        from .labels import decode_blocks

        jsg, flags = decode_blocks(label)
        self.core = ExecCore(self.TAG, int(jsg[0]), int(jsg[1]), int(jsg[2]))
        self.is_source = flags[0] == "1"
        if self.is_source:
            self.core.start_source(1, message, flags[1] == "1")
            self.output = message

    def action(self, rnd: int):
        p = self.core.action(rnd)
        return Transmit(frame(*p)) if p else LISTEN

    def receive(self, rnd: int, obs) -> None:
        if isinstance(obs, Heard):
            parts = unframe(obs.message)
            if parts[0] == self.TAG:
                self.core.on_message(rnd, parts)
                if self.core.informed and self.output is None:
                    self.output = self.core.message
        self.core.poststep(rnd)

    @property
    def idle(self) -> bool:
        return self.output is not None and not self.core.active


def executor_program(message="1"):
    """Program factory for labels from synthesize_executor/mbroadcast."""

    def make(label: str) -> NodeProgram:
        return BroadcastProgram(label, message)

    return make


# ---------------------------------------------------------------------------
# Acknowledged broadcast (ExecAck)
# ---------------------------------------------------------------------------


def synthesize_execack(g: Graph, s: int) -> SchemeBundle:
    """Executor labels plus a path-marker bit and an end-marker bit for a
    root-to-leaf path ending at a node of maximum level."""
    syn = synthesize_core(g, {s})
    path = _max_level_path(syn.tree, s)
    v_p = path[-1]
    labels = []
    for v in range(g.n):
        blocks = _core_blocks(syn, v, v == s)
        blocks.append(f"{1 if v in path else 0}{1 if v == v_p and g.n > 1 else 0}")
        labels.append(encode_blocks(blocks))
    return SchemeBundle(
        scheme="execack",
        labels=labels,
        meta={"synthesis": syn, "source": s, "t": syn.t, "path": path},
    )


def _max_level_path(tree: BroadcastTree, s: int) -> list[int]:
    if not tree.parent:
        return [s]
    top = max(tree.level.values())
    v_p = min(v for v, l in tree.level.items() if l == top)
    path = [v_p]
    while path[-1] != s:
        path.append(tree.parent[path[-1]])
    path.reverse()
    return path


class AckMachine:
    """ExecAck as an embeddable machine: Executor run, upward relay of the
    round count along the marked path, then a second Executor run carrying t.
    Completion is padded to relative round 3t, which every node can compute.
    """

    def __init__(self, tag: str, jsg: str, flags: str, pathbits: str):
        j, st, go = int(jsg[0]), int(jsg[1]), int(jsg[2])
        self.tag = tag
        self.is_source = flags[0] == "1"
        self.dom1 = flags[1] == "1"
        self.on_path = pathbits[0] == "1"
        self.is_vp = pathbits[1] == "1"
        self.core1 = ExecCore(tag + "1", j, st, go)
        self.core2 = ExecCore(tag + "2", j, st, go)
        self.t: int | None = None
        self._relay_round: int | None = None
        self._relayed = False
        self.start_abs: int | None = None

    def start_source(self, start_abs: int, message) -> None:
        self.start_abs = start_abs
        self.core1.start_source(start_abs, message, self.dom1)
        if not self.dom1:
            # no frontier means a single-node graph: t = 0, done immediately
            self.t = 0

    @property
    def message(self):
        return self.core1.message

    @property
    def level(self):
        return self.core1.level

    @property
    def parent_level(self):
        return self.core1.parent_level

    @property
    def completion_abs(self) -> int | None:
        """Absolute round after which the acknowledged broadcast is over."""
        if self.t is None or self.core1.offset is None:
            return None
        return self.core1.offset + 3 * self.t

    @property
    def passive(self) -> bool:
        """No round-scheduled duty left; only receptions can change state."""
        return (
            self.core1.passive
            and self.core2.passive
            and self._relay_round is None
            and (not self.is_vp or self._relayed or not self.core1.informed)
        )

    def action(self, abs_rnd: int):
        if self.passive:
            return None
        p = self.core1.action(abs_rnd)
        if p:
            return p
        if self.is_vp and self.core1.informed and not self._relayed:
            lvl = self.core1.level
            t = 3 * ((lvl + 2) // 3)
            if abs_rnd - self.core1.offset == t + 1:
                self.t = t
                self._relayed = True
                return (self.tag + "a", "r", t, self.core1.parent_level)
        if self._relay_round is not None and abs_rnd == self._relay_round:
            self._relay_round = None
            return (self.tag + "a", "r", self.t, self.core1.parent_level)
        p = self.core2.action(abs_rnd)
        if p:
            return p
        return None

    def on_message(self, abs_rnd: int, parts) -> None:
        tag = parts[0]
        if tag == self.tag + "1":
            self.core1.on_message(abs_rnd, parts)
        elif tag == self.tag + "a":
            t, plv = parts[2], parts[3]
            if self.t is None:
                self.t = t
            if self.on_path and not self._relayed and self.core1.informed:
                mylvl = 0 if self.is_source else self.core1.level
                if plv == mylvl:
                    self._relayed = True
                    if self.is_source:
                        self.core2.start_source(abs_rnd + 1, t, self.dom1)
                    else:
                        self._relay_round = abs_rnd + 1
        elif tag == self.tag + "2":
            self.core2.on_message(abs_rnd, parts)
            if self.t is None and self.core2.informed:
                self.t = self.core2.message

    def poststep(self, abs_rnd: int) -> None:
        self.core1.poststep(abs_rnd)
        self.core2.poststep(abs_rnd)

    @property
    def active(self) -> bool:
        return (
            self.core1.active
            or self.core2.active
            or self._relay_round is not None
            or (self.is_vp and self.core1.informed and not self._relayed)
        )

    @property
    def done(self) -> bool:
        return (
            self.t is not None
            and self.core1.informed
            and not self.active
        )


class ExecAckProgram(NodeProgram):
    """Standalone acknowledged broadcast; output is (message, t, level,
    parent_level) once completion is known."""

    def __init__(self, label: str, message="1"):
        super().__init__(label)
        from .labels import decode_blocks

        jsg, flags, pathbits = decode_blocks(label)
        self.m = AckMachine("k", jsg, flags, pathbits)
        if self.m.is_source:
            self.m.start_source(1, message)

    def action(self, rnd: int):
        self._maybe_finish(rnd)
        p = self.m.action(rnd)
        return Transmit(frame(*p)) if p else LISTEN

    def receive(self, rnd: int, obs) -> None:
        if isinstance(obs, Heard):
            parts = unframe(obs.message)
            if parts[0].startswith("k"):
                self.m.on_message(rnd, parts)
        self.m.poststep(rnd)
        self._maybe_finish(rnd)

    def _maybe_finish(self, rnd: int) -> None:
        if self.output is None and self.m.completion_abs is not None:
            if rnd >= self.m.completion_abs and self.m.core1.informed:
                self.output = (
                    self.m.message,
                    self.m.t,
                    self.m.level,
                    self.m.parent_level,
                )

    @property
    def idle(self) -> bool:
        return self.output is not None and not self.m.active


def execack_program(message="1"):
    def make(label: str) -> NodeProgram:
        return ExecAckProgram(label, message)

    return make


# ---------------------------------------------------------------------------
# Message on a path (Lemma-4 primitive)
# ---------------------------------------------------------------------------


def synthesize_path_message(g: Graph, s: int, message_bits: str) -> SchemeBundle:
    """Split `message_bits` into chunks stored along marked nodes (one per
    broadcast-tree level), collect them at the root after an acknowledged
    broadcast, and re-broadcast the assembled message."""
    syn = synthesize_core(g, {s})
    path = _max_level_path(syn.tree, s)
    v_p = path[-1]
    t_exec = syn.t
    tack = 3 * t_exec
    top = syn.tree.max_level()

    # one marked node per level k = 1 mod 3: walk the path and, inside each
    # parent's span, pick the next path node where levels coincide, otherwise
    # the lowest-index child at that level (exists by the level-structure
    # property of the tree)
    marked: dict[int, int] = {0: s} if g.n >= 1 else {}
    children_at: dict[tuple[int, int], list[int]] = {}
    for u, p in syn.tree.parent.items():
        children_at.setdefault((p, syn.tree.level[u]), []).append(u)
    lv = syn.tree.level
    for j in range(len(path) - 1):
        pj, pj1 = path[j], path[j + 1]
        lo = lv[pj] if pj != s else 0
        hi = lv[pj1]
        for k in range(lo + 1, hi + 1):
            if k % 3 != 1:
                continue
            if k == hi:
                marked[k] = pj1
            else:
                cands = children_at.get((pj, k))
                assert cands, f"no child of {pj} at level {k} (tree property bug)"
                marked[k] = min(cands)
    # chunk assignment in level order
    m = len(message_bits)
    if tack == 0:
        chunks = {0: message_bits}
    else:
        size = 9 * (-(-m // tack)) if m else 1
        levels = sorted(marked)
        pieces = [message_bits[i : i + size] for i in range(0, m, size)] or [""]
        assert len(pieces) <= len(levels), "more chunks than marked nodes"
        chunks = {levels[i]: pieces[i] for i in range(len(pieces))}
    chunk_of = {marked[k]: chunks.get(k, "") for k in marked}

    labels = []
    for v in range(g.n):
        blocks = _core_blocks(syn, v, v == s)
        blocks.append(f"{1 if v in path else 0}{1 if v == v_p and g.n > 1 else 0}")
        blocks.append("1" if v in chunk_of else "0")
        blocks.append(chunk_of.get(v, ""))
        labels.append(encode_blocks(blocks))
    return SchemeBundle(
        scheme="pathmsg",
        labels=labels,
        meta={
            "synthesis": syn,
            "source": s,
            "t": t_exec,
            "path": path,
            "marked": marked,
            "chunks": chunks,
            "message": message_bits,
            "collection_window": (tack + 1, tack + top),
        },
    )


class PathMessageProgram(NodeProgram):
    """ExecAck, upward chunk collection (marked node at level l transmits at
    relative round 3t + L - l + 1 forwarding everything heard), then the root
    re-broadcasts the assembled message. Output is the message bit string."""

    def __init__(self, label: str):
        super().__init__(label)
        from .labels import decode_blocks

        jsg, flags, pathbits, markbit, chunk = decode_blocks(label)
        self.ack = AckMachine("p", jsg, flags, pathbits)
        self.marked = markbit == "1"
        self.chunk = chunk
        self.core3 = ExecCore("pm", int(jsg[0]), int(jsg[1]), int(jsg[2]))
        self.pairs: list[tuple[int, str]] = []
        self._collected = False
        self._fast = False
        self._wake = 0
        if self.ack.is_source:
            self.ack.start_source(1, "")
            if self.ack.t == 0:  # single node
                self.output = self.chunk

    def _schedule(self):
        """(tack, L, my collection round) once t is known, else None."""
        if self.ack.t is None or self.ack.core1.offset is None:
            return None
        t = self.ack.t
        tack, top = 3 * t, max(t - 2, 0)
        return tack, top

    def _next_wake(self) -> int | None:
        """Round before which action() cannot do anything, or None if the
        node has live state; receptions clear the resulting fast path."""
        if not (self.ack.passive and self.core3.passive):
            return None
        sched = self._schedule()
        if sched is not None:
            tack, top = sched
            off = self.ack.core1.offset
            if self.marked and not self.ack.is_source and not self._collected:
                return off + tack + top - self.ack.level + 1
            if self.ack.is_source and self.output is None:
                return off + tack + top + 1
        return 1 << 62

    def action(self, rnd: int):
        if self._fast and rnd < self._wake:
            return LISTEN
        self._fast = False
        p = self.ack.action(rnd)
        if p:
            return Transmit(frame(*p))
        sched = self._schedule()
        if sched is not None:
            tack, top = sched
            rel = rnd - self.ack.core1.offset
            if self.marked and not self.ack.is_source and not self._collected:
                lvl = self.ack.level
                if rel == tack + top - lvl + 1:
                    self._collected = True
                    mine = [[lvl, self.chunk]] + [list(x) for x in self.pairs]
                    return Transmit(frame("pc", "c", mine))
            if self.ack.is_source and self.output is None and rel == tack + top + 1:
                # the deepest collection slot is round tack+top; assemble after
                got = {0: self.chunk}
                for l, c in self.pairs:
                    got[l] = c
                msg = "".join(got[k] for k in sorted(got))
                self.output = msg
                self.core3.start_source(rnd, msg, self.ack.dom1)
        p = self.core3.action(rnd)
        if p:
            return Transmit(frame(*p))
        wake = self._next_wake()
        if wake is not None:
            self._fast, self._wake = True, wake
        return LISTEN

    def receive(self, rnd: int, obs) -> None:
        if isinstance(obs, Heard):
            self._fast = False
            parts = unframe(obs.message)
            tag = parts[0]
            if tag.startswith("p") and tag != "pc" and tag != "pm":
                self.ack.on_message(rnd, parts)
            elif tag == "pc":
                for l, c in parts[2]:
                    self.pairs.append((l, c))
            elif tag == "pm":
                self.core3.on_message(rnd, parts)
                if self.output is None and self.core3.informed:
                    self.output = self.core3.message
        elif self._fast:
            return
        self.ack.poststep(rnd)
        self.core3.poststep(rnd)

    @property
    def idle(self) -> bool:
        if self.output is None:
            return False
        if self.ack.active or self.core3.active:
            return False
        if self.marked and not self.ack.is_source and not self._collected:
            return False
        return True


def path_message_program():
    return PathMessageProgram


def bundle_sidecar(bundle: SchemeBundle) -> dict:
    """JSON-able oracle metadata (tree, levels, schedule) accompanying a
    label dump; consumed only by tests, never by node programs."""
    syn: CoreSynthesis = bundle.meta["synthesis"]
    return {
        "scheme": bundle.scheme,
        "t": syn.t,
        "sources": list(syn.tree.sources),
        "parent": {str(u): p for u, p in sorted(syn.tree.parent.items())},
        "level": {str(v): l for v, l in sorted(syn.tree.level.items())},
        "stages": [
            {
                "stage": s.stage,
                "dom": sorted(s.dom),
                "frontier": sorted(s.frontier),
                "newly": {str(u): p for u, p in sorted(s.newly.items())},
                "feedback": {str(v): u for v, u in sorted(s.feedback.items())},
            }
            for s in syn.stages
        ],
    }


# ---------------------------------------------------------------------------
# Structural verification (used by tests and the acceptance suite)
# ---------------------------------------------------------------------------


def check_tree_invariants(syn: CoreSynthesis, g: Graph) -> None:
    """Broadcast-tree structure: reception levels are 1 mod 3; a parent at
    level j with a child at level i has a child at every level k in [j+1, i]
    with k = 1 mod 3; the maximum level exceeds t - 3."""
    tree = syn.tree
    children_levels: dict[int, set[int]] = {}
    for u, p in tree.parent.items():
        assert tree.level[u] > tree.level[p]
        assert tree.level[u] % 3 == 1
        assert g.has_edge(u, p)
        children_levels.setdefault(p, set()).add(tree.level[u])
    for u, p in tree.parent.items():
        i, j = tree.level[u], tree.level[p]
        have = children_levels[p]
        for k in range(j + 1, i + 1):
            if k % 3 == 1:
                assert k in have, (
                    f"parent {p} (level {j}) lacks a child at level {k} <= {i}"
                )
    if g.n > 1:
        assert tree.max_level() > tree.t - 3
    # spanning: every non-source reached exactly once
    srcs = set(tree.sources)
    assert set(tree.parent) == set(range(g.n)) - srcs


def check_dom_schedule(syn: CoreSynthesis, g: Graph) -> None:
    """Properties of the per-stage DOM sets: dominate the frontier minimally,
    stay inside the informed set, inform at least one uniquely covered node
    per member per stage, and have consecutive membership intervals."""
    informed = set(syn.tree.sources)
    seen_stages: dict[int, list[int]] = {}
    assert len(syn.stages) <= g.n, "stage count exceeds n"
    for rec in syn.stages:
        assert rec.dom, "DOM empty while nodes remain uninformed"
        assert rec.dom <= informed, "DOM member not informed"
        assert rec.frontier == {
            u for w in informed for u in g.adj[w] if u not in informed
        }
        for u in rec.frontier:
            assert any(w in rec.dom for w in g.adj[u]), "frontier not dominated"
        for v in rec.dom:
            private = [
                u
                for u in rec.frontier
                if v in g.adj[u]
                and sum(1 for w in g.adj[u] if w in rec.dom) == 1
            ]
            assert private, f"DOM member {v} has no uniquely covered target"
            assert rec.feedback[v] in private or rec.feedback[v] in rec.newly
        for v in rec.dom:
            seen_stages.setdefault(v, []).append(rec.stage)
        for u, p in rec.newly.items():
            assert p in rec.dom and g.has_edge(u, p)
            assert sum(1 for w in g.adj[u] if w in rec.dom) == 1
        informed |= set(rec.newly)
    assert informed == set(range(g.n))
    for v, ss in seen_stages.items():
        assert ss == list(range(ss[0], ss[-1] + 1)), (
            f"node {v} has a non-consecutive DOM interval {ss}"
        )


def dom_membership_from_history(
    label_blocks: list[str], trace, v: int, tag: str = "x", offset: int = 0
) -> dict[int, bool]:
    """Recompute a node's per-stage DOM decisions from its label and its own
    observation history alone (the node-locality check: the result must match
    the offline schedule exactly)."""
    jsg, flags = label_blocks[0], label_blocks[1]
    core = ExecCore(tag, int(jsg[0]), int(jsg[1]), int(jsg[2]))
    if flags[0] == "1":
        core.start_source(offset + 1, None, flags[1] == "1")
    membership: dict[int, bool] = {}
    for rnd in range(1, trace.num_rounds + 1):
        if core.offset is not None:
            rel = rnd - core.offset
            if rel >= 1 and rel % 3 == 1:
                core.action(rnd)
                membership[(rel + 2) // 3] = core.in_dom
        obs = trace.observation_of(v, rnd)
        if isinstance(obs, Heard):
            parts = unframe(obs.message)
            if parts[0] == tag:
                core.on_message(rnd, parts)
        core.poststep(rnd)
    return membership


def verify_executor_run(g: Graph, bundle: SchemeBundle, trace) -> None:
    """End-to-end check of an Executor/MBroadcast trace against the oracle:
    tree and DOM properties, per-round transmitter sets, and node-local DOM
    decisions equal to the offline schedule."""
    from .labels import decode_blocks

    syn: CoreSynthesis = bundle.meta["synthesis"]
    check_tree_invariants(syn, g)
    check_dom_schedule(syn, g)
    # transmitters in round 1 of stage s are exactly DOM_s (go = 0 synthesis)
    for rec in syn.stages:
        r1 = 3 * rec.stage - 2
        assert set(trace.rounds[r1 - 1].transmitters) == rec.dom
        fb_round = r1 + 1
        expected_fb = {
            u for v, u in rec.feedback.items()
            if bundle.meta["synthesis"].stay[u] or bundle.meta["synthesis"].go[u]
        }
        actual_fb = set(trace.rounds[fb_round - 1].transmitters)
        assert actual_fb == expected_fb
        if r1 + 2 <= trace.num_rounds:
            assert not trace.rounds[r1 + 1].transmitters, "go round must be silent"
    # node locality
    dom_by_stage = {rec.stage: rec.dom for rec in syn.stages}
    for v in range(g.n):
        blocks = decode_blocks(bundle.labels[v])
        membership = dom_membership_from_history(blocks, trace, v)
        for stage, rec_dom in dom_by_stage.items():
            local = membership.get(stage, False)
            assert local == (v in rec_dom), (
                f"node {v} stage {stage}: local {local} vs oracle {v in rec_dom}"
            )
