"""Size-discovery schemes: compact labels with subtree bit packing, the
general selector, and the stripe-based fast scheme.

All three make every node output n. The subtree packing stores the binary
representation of n in at most 3 bits per node of a low-degree subtree of the
broadcast tree; the stripe scheme splits the BFS layering into stripes of
lg n = ceil(log2(n+1)) consecutive layers separated by equally thick gaps, so
per-stripe phases cannot interfere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .broadcast import (
    AckMachine,
    ExecCore,
    PathMessageProgram,
    synthesize_core,
    synthesize_path_message,
)
from .errors import (
    MessageTooLong,
    ProtocolViolation,
    TooShallow,
    WitnessNotFound,
)
from .graphs import Graph, LayerAssignment, bfs_layers, build_graph
from .labels import (
    SchemeBundle,
    bits_to_int,
    decode_blocks,
    encode_blocks,
    int_to_bits,
)
from .sim import LISTEN, Heard, NodeProgram, Transmit, frame, unframe

# Documented constant for the encoded compact-label length bound
# max_bits <= COMPACT_LENGTH_C * (ceil(log2 log2 (Delta+2)) + 1).
COMPACT_LENGTH_C = 24


# ---------------------------------------------------------------------------
# Subtree bit packing
# ---------------------------------------------------------------------------


@dataclass
class SubtreeAssignment:
    root: int
    bits: dict[int, str]  # node -> its own substring (<= 3 bits, root <= 2)
    child_num: dict[int, int]  # node -> k_v (children of a node: 1..c)
    children: dict[int, list[int]]  # node -> chosen children in k order

    def nodes(self) -> set[int]:
        return set(self.bits)

    def postorder_concat(self) -> str:
        def cat(v: int) -> str:
            return "".join(cat(c) for c in self.children.get(v, [])) + self.bits[v]

        return cat(self.root)


def _rooted_children(tree: Graph, root: int) -> tuple[dict[int, list[int]], dict[int, int]]:
    la = bfs_layers(tree, root)
    kids: dict[int, list[int]] = {v: [] for v in range(tree.n)}
    for v in range(tree.n):
        if v == root:
            continue
        parent = min(w for w in tree.adj[v] if la.layer[w] == la.layer[v] - 1)
        kids[parent].append(v)
    size = [1] * tree.n
    for v in sorted(range(tree.n), key=lambda x: -la.layer[x]):
        for c in kids[v]:
            size[v] += size[c]
    return kids, {v: size[v] for v in range(tree.n)}


def assign_subtree_bits(tree: Graph, root: int, message: str) -> SubtreeAssignment:
    """Recursive block splitting: children ordered by subtree size (ties by
    index), the top floor(log Delta)+1 recursed with slices of width
    ceil(log(n_child+1))+1 plus one extra bit kept at the child, the last
    <= 2 bits kept at the node. The post-order concatenation over the chosen
    subtree equals `message` exactly."""
    n = tree.n
    if len(message) > n.bit_length() + 1:
        raise MessageTooLong(
            f"|M|={len(message)} exceeds ceil(log2(n+1))+1={n.bit_length() + 1}"
        )
    delta = tree.max_degree()
    fanout = max(delta.bit_length(), 1)  # floor(log Delta)+1 for Delta >= 1
    kids, size = _rooted_children(tree, root)

    out = SubtreeAssignment(root=root, bits={}, child_num={}, children={})

    def rec(v: int, piece: str) -> None:
        chosen = sorted(kids[v], key=lambda c: (-size[c], c))[:fanout]
        pos = 0
        used: list[int] = []
        for c in chosen:
            if pos >= len(piece):
                break
            cap = size[c].bit_length() + 1
            inner = piece[pos : pos + cap]
            pos += len(inner)
            extra = piece[pos : pos + 1]
            pos += len(extra)
            rec(c, inner)
            out.bits[c] += extra
            used.append(c)
        own = piece[pos:]
        assert len(own) <= 2, f"node {v} left with {len(own)} bits (capacity bug)"
        out.bits[v] = own
        out.children[v] = used
        for i, c in enumerate(used, start=1):
            out.child_num[c] = i

    rec(root, message)
    out.child_num[root] = 0
    return out


def verify_subtree_assignment(
    tree: Graph, root: int, message: str, asg: SubtreeAssignment
) -> None:
    delta = tree.max_degree()
    fanout = max(delta.bit_length(), 1)
    for v in asg.nodes():
        limit = 2 if v == root else 3
        assert len(asg.bits[v]) <= limit, f"node {v}: {len(asg.bits[v])} bits"
        assert len(asg.children.get(v, [])) <= fanout
    assert asg.postorder_concat() == message
    # the chosen nodes form a subtree containing the root
    for v in asg.nodes():
        for c in asg.children.get(v, []):
            assert tree.has_edge(v, c)


# ---------------------------------------------------------------------------
# Compact labels + AuxiliarySD
# ---------------------------------------------------------------------------


def build_compact_labels(g: Graph) -> SchemeBundle:
    """Root = max-degree node (lowest index tie-break); labels carry the root
    bit, a Delta-block, the acknowledged-broadcast block, and the message
    block (INDEX, MESSAGE) of the subtree packing of binary(n)."""
    n = g.n
    root = min(range(n), key=lambda v: (-g.degree(v), v))
    delta = g.max_degree()
    k_rounds = delta.bit_length()  # floor(log Delta)+1 rounds, 0 for n = 1
    width_a = max(k_rounds.bit_length(), 1)

    syn = synthesize_core(g, {root})
    from .broadcast import _core_blocks, _max_level_path

    path = _max_level_path(syn.tree, root)
    v_p = path[-1]

    # Delta block: root holds the bit count; k chosen neighbors hold one bit
    # of binary(Delta) each
    a_field = ["0" * width_a] * n
    b_field = ["0"] * n
    a_field[root] = int_to_bits(k_rounds, width_a)
    delta_bits = int_to_bits(delta) if delta else ""
    chosen = list(g.adj[root])[:k_rounds]
    for i, v in enumerate(chosen, start=1):
        a_field[v] = int_to_bits(i, width_a)
        b_field[v] = delta_bits[i - 1]

    tree_graph = build_graph(n, [(u, p) for u, p in syn.tree.parent.items()])
    message = int_to_bits(n)
    asg = assign_subtree_bits(tree_graph, root, message)
    width_k = max(k_rounds.bit_length(), 1)

    labels = []
    for v in range(n):
        core = _core_blocks(syn, v, v == root)
        pathbits = f"{1 if v in path else 0}{1 if v == v_p and n > 1 else 0}"
        k_v = asg.child_num.get(v, 0)
        blocks = [
            "1" if v == root else "0",
            a_field[v],
            b_field[v],
            core[0],
            core[1],
            pathbits,
            int_to_bits(k_v, width_k) if k_v else "0" * width_k,
            asg.bits.get(v, ""),
        ]
        labels.append(encode_blocks(blocks))
    return SchemeBundle(
        scheme="compact",
        labels=labels,
        meta={
            "synthesis": syn,
            "root": root,
            "t": syn.t,
            "subtree": asg,
            "message": message,
            "delta": delta,
            "path": path,
        },
    )


class AuxiliarySDProgram(NodeProgram):
    """Delta-learning, acknowledged broadcast of Delta, size-learning along
    the packed subtree, then a final broadcast of the assembled size."""

    def __init__(self, label: str):
        super().__init__(label)
        (rootbit, a, b, jsg, flags, pathbits, kbits, msg) = decode_blocks(label)
        self.is_root = rootbit == "1"
        self.a = bits_to_int(a)
        self.b = b
        self.k = bits_to_int(kbits)
        self.msgbits = msg
        self.ack = AckMachine("A", jsg, flags, pathbits)
        jj, ss, gg = int(jsg[0]), int(jsg[1]), int(jsg[2])
        self.final = ExecCore("AF", jj, ss, gg)
        self.dom1 = flags[1] == "1"
        self._delta_bits: dict[int, str] = {}
        self._payloads: dict[int, str] = {}
        self._sent_sl = False
        self._started_ack = False
        self._started_final = False
        self._fast = False
        self.delta: int | None = None

    # -- schedule helpers ---------------------------------------------------

    def _k_rounds(self) -> int:
        if self.is_root:
            return self.a
        if self.delta is not None:
            return self.delta.bit_length()
        return -1

    def _sched(self):
        """(S0, L, K) once the ack part is complete, else None."""
        if self.ack.t is None or self.ack.core1.offset is None:
            return None
        if self.delta is None:
            return None
        k = self.delta.bit_length()
        s0 = self.ack.core1.offset + 3 * self.ack.t
        return s0, max(self.ack.t - 2, 0), k

    def _passive(self, rnd: int) -> bool:
        if not (self.ack.passive and self.final.passive):
            return False
        if self.is_root:
            if not self._started_ack:
                return False
        elif self.a >= 1 and rnd < self.a:
            return False
        if self._sched() is not None:
            if self.k >= 1 and not self._sent_sl:
                return False
            if self.is_root and not self._started_final:
                return False
        return True

    def action(self, rnd: int):
        if self._fast:
            return LISTEN
        # Delta-learning: chosen neighbor i transmits (0, b_i) in round i
        if not self.is_root and self.a >= 1 and rnd == self.a:
            return Transmit(frame("D", "d", self.b))
        if self.is_root and not self._started_ack and rnd == self.a + 1:
            self._started_ack = True
            bits = "".join(self._delta_bits.get(i, "0") for i in range(1, self.a + 1))
            self.delta = bits_to_int(bits)
            self.ack.start_source(rnd, self.delta)
        p = self.ack.action(rnd)
        if p:
            return Transmit(frame(*p))
        sched = self._sched()
        if sched is not None:
            s0, levels, k = sched
            if k > 0 and self.k >= 1 and not self._sent_sl and self.ack.core1.informed:
                lvl = self.ack.level
                phase = levels - lvl + 1
                if rnd == s0 + (phase - 1) * k + self.k:
                    self._sent_sl = True
                    return Transmit(frame("S", "s", self.k, lvl, self._assemble()))
            if self.is_root and not self._started_final and rnd == s0 + levels * k + 1:
                self._started_final = True
                m = self._assemble()
                try:
                    value = int(m, 2)
                except ValueError as exc:
                    raise ProtocolViolation(f"bad assembled message {m!r}") from exc
                self.output = value
                self.final.start_source(rnd, m, self.dom1)
        p = self.final.action(rnd)
        if p:
            return Transmit(frame(*p))
        self._fast = self._passive(rnd)
        return LISTEN

    def _assemble(self) -> str:
        return "".join(self._payloads[k] for k in sorted(self._payloads)) + self.msgbits

    def receive(self, rnd: int, obs) -> None:
        if isinstance(obs, Heard):
            self._fast = False
            parts = unframe(obs.message)
            tag = parts[0]
            if tag == "D":
                if self.is_root:
                    self._delta_bits[rnd] = parts[2]
            elif tag.startswith("A"):
                if tag == "AF":
                    self.final.on_message(rnd, parts)
                    if self.output is None and self.final.informed:
                        self.output = int(self.final.message, 2)
                else:
                    self.ack.on_message(rnd, parts)
                    if self.delta is None and self.ack.message is not None:
                        self.delta = self.ack.message
            elif tag == "S":
                # accept only payloads from nodes this node itself informed:
                # the sender's level must be one of our own transmit rounds
                k_w, lvl_w, payload = parts[2], parts[3], parts[4]
                if lvl_w in self.ack.core1.tx_rounds:
                    if k_w in self._payloads:
                        raise ProtocolViolation(
                            f"duplicate subtree index {k_w} from level {lvl_w}"
                        )
                    self._payloads[k_w] = payload
        elif self._fast:
            return
        self.ack.poststep(rnd)
        self.final.poststep(rnd)

    @property
    def idle(self) -> bool:
        if self.output is None:
            return False
        if self.ack.active or self.final.active:
            return False
        if self.k >= 1 and not self._sent_sl:
            return False
        return True


def auxiliary_sd_program():
    return AuxiliarySDProgram


# ---------------------------------------------------------------------------
# GeneralSD: selector between the compact scheme and the path-message scheme
# ---------------------------------------------------------------------------


def build_general_sd(g: Graph) -> SchemeBundle:
    """Mode bit per label: the compact scheme when the measured acknowledged
    broadcast is fast enough (t_G < log2 n), the message-on-path scheme with
    M = binary(n) otherwise."""
    n = g.n
    syn = synthesize_core(g, {0})
    t_g = 3 * syn.t
    use_compact = n > 1 and t_g < math.log2(n)
    if use_compact:
        inner = build_compact_labels(g)
    else:
        inner = synthesize_path_message(g, 0, int_to_bits(n))
    labels = [
        encode_blocks((["1"] if use_compact else ["0"]) + decode_blocks(lab))
        for lab in inner.labels
    ]
    return SchemeBundle(
        scheme="general",
        labels=labels,
        meta={"inner": inner, "branch": "compact" if use_compact else "pathmsg",
              "t_G": t_g},
    )


class GeneralSDProgram(NodeProgram):
    def __init__(self, label: str):
        super().__init__(label)
        blocks = decode_blocks(label)
        inner_label = encode_blocks(blocks[1:])
        if blocks[0] == "1":
            self.inner: NodeProgram = AuxiliarySDProgram(inner_label)
            self._convert = False
        else:
            self.inner = PathMessageProgram(inner_label)
            self._convert = True

    def action(self, rnd: int):
        act = self.inner.action(rnd)
        self._sync()
        return act

    def receive(self, rnd: int, obs) -> None:
        self.inner.receive(rnd, obs)
        self._sync()

    def _sync(self) -> None:
        if self.output is None and self.inner.output is not None:
            out = self.inner.output
            self.output = int(out, 2) if self._convert else out

    @property
    def idle(self) -> bool:
        return self.output is not None and self.inner.idle


def general_sd_program():
    return GeneralSDProgram


# ---------------------------------------------------------------------------
# Stripes, BFS-covers, conflict-free paths
# ---------------------------------------------------------------------------


@dataclass
class StripeData:
    index: int
    first_layer: int
    cover: list[int] = field(default_factory=list)
    paths: list[list[int]] = field(default_factory=list)
    xbfs: set[int] = field(default_factory=set)


@dataclass
class StripeDecomposition:
    graph: Graph
    layers: LayerAssignment
    lgn: int
    green: list[bool]
    supergreen: list[bool]
    stripe_of: list[int | None]
    stripes: dict[int, StripeData]

    def stripe_layers(self, j: int) -> range:
        return range(j * self.lgn, (j + 1) * self.lgn)


def stripe_decomposition(g: Graph, s: int) -> StripeDecomposition:
    """Layer i is green iff floor(i / lg n) is even; the last layer of each
    stripe is super-green. Stripes whose super-green layer exceeds the depth
    are not materialized (their nodes are covered by the global stage)."""
    n = g.n
    lgn = n.bit_length()
    la = bfs_layers(g, s)
    if la.depth < lgn:
        raise TooShallow(f"depth {la.depth} < lg n = {lgn}")
    green = [False] * n
    supergreen = [False] * n
    stripe_of: list[int | None] = [None] * n
    # a stripe is materialized only if its super-green layer exists
    stripes = {
        jj: StripeData(index=jj, first_layer=jj * lgn)
        for jj in range(0, la.depth // lgn + 1, 2)
        if (jj + 1) * lgn - 1 <= la.depth
    }
    for v in range(n):
        i = la.layer[v]
        block = i // lgn
        if block % 2 == 0:
            green[v] = True
            if block in stripes:
                stripe_of[v] = block
                if i == (block + 1) * lgn - 1:
                    supergreen[v] = True
    return StripeDecomposition(
        graph=g,
        layers=la,
        lgn=lgn,
        green=green,
        supergreen=supergreen,
        stripe_of=stripe_of,
        stripes=stripes,
    )


def _forward_reach(sd: StripeDecomposition, j: int, starts: set[int]) -> set[int]:
    """Closure along BFS-paths (each edge one layer deeper) inside stripe j."""
    g, la, lgn = sd.graph, sd.layers, sd.lgn
    first, last = j * lgn, (j + 1) * lgn - 1
    reach = set(starts)
    cur = set(starts)
    for layer in range(first, last):
        nxt = {
            w
            for v in cur
            for w in g.adj[v]
            if la.layer[w] == layer + 1
        }
        reach |= nxt
        cur = nxt
    return reach


def minimal_bfs_cover(sd: StripeDecomposition, j: int) -> list[int]:
    """Subset of the stripe's first layer from which every super-green node
    of the stripe is BFS-reachable; minimal under inclusion (greedy removal,
    descending index)."""
    la, lgn = sd.layers, sd.lgn
    first = j * lgn
    sg = {v for v in range(sd.graph.n) if sd.supergreen[v] and sd.stripe_of[v] == j}
    cover = {v for v in range(sd.graph.n) if la.layer[v] == first}
    assert sg <= _forward_reach(sd, j, cover), "super-green layer unreachable"
    for v in sorted(cover, reverse=True):
        trial = cover - {v}
        if trial and sg <= _forward_reach(sd, j, trial):
            cover = trial
    return sorted(cover)


def conflict_free_paths(
    sd: StripeDecomposition, j: int, cover: list[int]
) -> list[list[int]]:
    """One BFS-path per cover node to a witness super-green node reachable
    from no other cover member; verified conflict-free by exhaustive edge
    scan (no edge joins different layers of two distinct paths)."""
    g, la, lgn = sd.graph, sd.layers, sd.lgn
    sg = {v for v in range(g.n) if sd.supergreen[v] and sd.stripe_of[v] == j}
    reach = {u: _forward_reach(sd, j, {u}) for u in cover}
    paths: list[list[int]] = []
    for u in cover:
        others = set().union(*(reach[w] for w in cover if w != u)) if len(cover) > 1 else set()
        witnesses = sorted((reach[u] & sg) - others)
        if not witnesses:
            raise WitnessNotFound(
                f"cover node {u} of stripe {j} has no private witness"
            )
        y = witnesses[0]
        path = [y]
        while la.layer[path[-1]] > j * lgn:
            lvl = la.layer[path[-1]]
            prev = min(
                w
                for w in g.adj[path[-1]]
                if la.layer[w] == lvl - 1 and w in reach[u]
            )
            path.append(prev)
        path.reverse()
        assert path[0] == u and len(path) == lgn
        paths.append(path)
    # exhaustive conflict scan
    on_path = {v: idx for idx, p in enumerate(paths) for v in p}
    for a, b in g.edges():
        pa, pb = on_path.get(a), on_path.get(b)
        if pa is not None and pb is not None and pa != pb:
            assert la.layer[a] == la.layer[b], (
                f"conflicting edge ({a},{b}) between paths {pa} and {pb}"
            )
    return paths


# ---------------------------------------------------------------------------
# FastSD
# ---------------------------------------------------------------------------


def fast_sd_barrier(n: int) -> int:
    """Round at which super-green nodes start the global broadcast: Phase 1
    takes lg n rounds and the stage machinery is bounded by 3n rounds, both
    fully determined by n."""
    return n.bit_length() + 3 * n + 1


def build_fast_sd(g: Graph) -> SchemeBundle:
    n = g.n
    root = 0
    la = bfs_layers(g, root)
    lgn = n.bit_length()
    if la.depth < lgn:
        general = build_general_sd(g)
        labels = [
            encode_blocks(["0"] + decode_blocks(lab)) for lab in general.labels
        ]
        return SchemeBundle(
            scheme="fastsd",
            labels=labels,
            meta={"mode": "fallback", "inner": general},
        )

    sd = stripe_decomposition(g, root)
    message = int_to_bits(n)
    m_bit = ["0"] * n
    on_paths = [False] * n
    cover_flag = [False] * n
    reach_flag = [False] * n
    stripe_meta = {}
    b_bits: list[tuple[str, str]] = [("000", "00")] * n
    for j, data in sd.stripes.items():
        cover = minimal_bfs_cover(sd, j)
        paths = conflict_free_paths(sd, j, cover)
        xbfs = _forward_reach(sd, j, set(cover))
        data.cover, data.paths, data.xbfs = cover, paths, xbfs
        for u in cover:
            cover_flag[u] = True
        for p in paths:
            assert len(p) == lgn
            for i, v in enumerate(p, start=1):
                on_paths[v] = True
                m_bit[v] = message[i - 1]
        for v in xbfs:
            reach_flag[v] = True
        # broadcast labels inside the reachable set, sources = the cover
        sub_nodes = sorted(xbfs)
        sub_index = {v: i for i, v in enumerate(sub_nodes)}
        sub_edges = [
            (sub_index[a], sub_index[b])
            for a, b in g.edges()
            if a in xbfs and b in xbfs
        ]
        sub = build_graph(len(sub_nodes), sub_edges)
        syn = synthesize_core(sub, {sub_index[u] for u in cover})
        assert syn.t <= 3 * len(sub_nodes)
        assert lgn + syn.t < fast_sd_barrier(n), "phase 2 must end before stage 2"
        for v in xbfs:
            i = sub_index[v]
            b_bits[v] = (
                f"{syn.join[i]}{syn.stay[i]}{syn.go[i]}",
                f"{1 if v in cover else 0}{syn.dom1[i]}",
            )
        stripe_meta[j] = {
            "cover": cover,
            "paths": paths,
            "xbfs": sorted(xbfs),
            "phase2_t": syn.t,
        }

    sources = {v for v in range(n) if sd.supergreen[v]}
    s2 = synthesize_core(g, sources)
    assert s2.t <= 3 * n

    labels = []
    for v in range(n):
        flags = "".join(
            "1" if f else "0"
            for f in (reach_flag[v], sd.supergreen[v], cover_flag[v], on_paths[v])
        )
        blocks = [
            "1",
            flags,
            m_bit[v],
            b_bits[v][0],
            b_bits[v][1],
            f"{s2.join[v]}{s2.stay[v]}{s2.go[v]}",
            f"{1 if v in sources else 0}{s2.dom1[v]}",
        ]
        labels.append(encode_blocks(blocks))
    return SchemeBundle(
        scheme="fastsd",
        labels=labels,
        meta={
            "mode": "stripes",
            "decomposition": sd,
            "stripes": stripe_meta,
            "stage2": s2,
            "message": message,
            "barrier": fast_sd_barrier(n),
        },
    )


class FastSDProgram(NodeProgram):
    """Stage 1 phase 1: relay the size bits down each conflict-free path;
    phase 2: broadcast inside each stripe's reachable set from the cover;
    stage 2: global broadcast from all super-green nodes at the barrier
    round determined by n."""

    def __init__(self, label: str):
        super().__init__(label)
        blocks = decode_blocks(label)
        if blocks[0] == "0":
            self.inner: GeneralSDProgram | None = GeneralSDProgram(
                encode_blocks(blocks[1:])
            )
            return
        self.inner = None
        flags, m_v, bjsg, bflags, s2jsg, s2flags = blocks[1:]
        self.reach = flags[0] == "1"
        self.supergreen = flags[1] == "1"
        self.cover = flags[2] == "1"
        self.on_path = flags[3] == "1"
        self.m_v = m_v
        self.bcore = ExecCore("F2", int(bjsg[0]), int(bjsg[1]), int(bjsg[2]))
        self.b_dom1 = bflags[1] == "1"
        self.s2core = ExecCore("F3", int(s2jsg[0]), int(s2jsg[1]), int(s2jsg[2]))
        self.s2_dom1 = s2flags[1] == "1"
        self._relay_round: int | None = None
        self._relay_payload = ""
        self._relayed = False
        self._fast = False
        self.n_value: int | None = None

    def _learn(self, bits: str, rnd: int) -> None:
        if self.n_value is not None:
            return
        self.n_value = int(bits, 2)
        self.output = self.n_value
        if self.cover and self.bcore.offset is None:
            self.bcore.start_source(len(bits) + 1, bits, self.b_dom1)
        if self.supergreen:
            self.s2core.start_source(fast_sd_barrier(self.n_value), bits, self.s2_dom1)

    def action(self, rnd: int):
        if self.inner is not None:
            act = self.inner.action(rnd)
            if self.output is None and self.inner.output is not None:
                self.output = self.inner.output
            return act
        if self._fast:
            return LISTEN
        if self.supergreen and self.on_path and rnd == 1:
            self._relayed = True
            return Transmit(frame("F1", "p", self.m_v))
        if self._relay_round == rnd:
            self._relay_round = None
            self._relayed = True
            return Transmit(frame("F1", "p", self.m_v + self._relay_payload))
        p = self.bcore.action(rnd)
        if p:
            return Transmit(frame(*p))
        p = self.s2core.action(rnd)
        if p:
            return Transmit(frame(*p))
        if (
            rnd >= 1
            and self._relay_round is None
            and self.bcore.passive
            and self.s2core.passive
        ):
            self._fast = True
        return LISTEN

    def receive(self, rnd: int, obs) -> None:
        if self.inner is not None:
            self.inner.receive(rnd, obs)
            if self.output is None and self.inner.output is not None:
                self.output = self.inner.output
            return
        if isinstance(obs, Heard):
            self._fast = False
            parts = unframe(obs.message)
            tag = parts[0]
            if tag == "F1":
                if self.on_path and not self._relayed and self._relay_round is None:
                    self._relay_payload = parts[2]
                    self._relay_round = rnd + 1
                if self.cover:
                    self._learn(self.m_v + parts[2], rnd)
            elif tag == "F2":
                if self.reach:
                    self.bcore.on_message(rnd, parts)
                    if self.bcore.informed:
                        self._learn(self.bcore.message, rnd)
            elif tag == "F3":
                self.s2core.on_message(rnd, parts)
                if self.s2core.informed:
                    self._learn(self.s2core.message, rnd)
        elif self._fast:
            return
        self.bcore.poststep(rnd)
        self.s2core.poststep(rnd)

    @property
    def idle(self) -> bool:
        if self.inner is not None:
            return self.output is not None and self.inner.idle
        if self.output is None:
            return False
        if self.on_path and not self._relayed:
            return False
        if self.bcore.active or self.s2core.active:
            return False
        if self.supergreen and self.s2core.offset is None:
            return False
        return True


def fast_sd_program():
    return FastSDProgram
