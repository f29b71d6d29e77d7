"""Command-line surface: generators, scheme runs, bench suites, audits.

All randomness flows from --seed; default corpora are pinned in corpus.py so
CI outputs are reproducible. RADIOLAB_MAX_ROUNDS overrides the engine's
safety cap.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import corpus as corpus_mod
from .audit import audit_facts
from .errors import RadiolabError
from .graphs import (
    Graph,
    gen_cycle,
    gen_grid,
    gen_lb_family,
    gen_lb_general,
    gen_path,
    gen_random_connected,
    gen_star,
    gen_tree,
    read_edge_list,
    write_edge_list,
)
from .schemes import SCHEMES, build_bundle, run_scheme

BENCH_FIELDS = (
    "graph",
    "n",
    "max_degree",
    "diameter",
    "scheme",
    "max_label_bits",
    "total_rounds",
    "correct_outputs",
)


def _gen_graph(args) -> Graph:
    fam = args.family
    if fam == "path":
        return gen_path(args.n)
    if fam == "cycle":
        return gen_cycle(args.n)
    if fam == "star":
        return gen_star(args.n)
    if fam == "grid":
        rows = math.isqrt(args.n)
        while rows > 1 and args.n % rows:
            rows -= 1
        return gen_grid(rows, args.n // rows)
    if fam == "gnp-connected":
        return gen_random_connected(args.n, args.p, args.seed)
    if fam == "tree":
        return gen_tree(args.n, args.seed)
    if fam == "lbG":
        return gen_lb_family(args.n)[0]
    if fam == "lbH":
        return gen_lb_general(args.delta, args.n)[0]
    raise RadiolabError(f"unknown family {fam!r}")


def cmd_gen(args) -> int:
    g = _gen_graph(args)
    if args.out:
        with open(args.out, "w") as fp:
            write_edge_list(g, fp)
    else:
        write_edge_list(g, sys.stdout)
    return 0


def cmd_run(args) -> int:
    with open(args.graph) as fp:
        g = read_edge_list(fp)
    result = run_scheme(args.scheme, g, cd=args.cd)
    record = result.bench_record(Path(args.graph).name, g)
    if args.scheme == "toprec" and result.ok:
        from .toprec import serialize_toprec_output

        record["outputs"] = [
            serialize_toprec_output(out) for out in result.trace.outputs
        ]
    out = json.dumps(record, indent=2)
    if args.out:
        Path(args.out).write_text(out + "\n")
    else:
        print(out)
    return 0 if result.ok else 1


def _bench_rows(suite: str) -> list[dict]:
    rows = []
    if suite == "size":
        for gid, g in corpus_mod.corpus():
            for scheme in ("compact", "general", "fastsd"):
                rows.append(run_scheme(scheme, g).bench_record(gid, g))
    elif suite == "labels":
        for k in range(2, 13):
            n = 2**k + 1
            g = gen_star(n)
            for scheme in ("compact", "toprec"):
                bundle = build_bundle(scheme, g)
                rows.append(
                    {
                        "graph": f"star-2^{k}",
                        "n": n,
                        "max_degree": g.max_degree(),
                        "diameter": 2,
                        "scheme": scheme,
                        "max_label_bits": bundle.max_label_bits(),
                        "total_rounds": 0,
                        "correct_outputs": n,
                    }
                )
    elif suite == "toprec":
        for gid, g in corpus_mod.toprec_corpus():
            rows.append(run_scheme("toprec", g).bench_record(gid, g))
    elif suite == "scaling":
        for k in range(6, 12):
            n = 2**k
            g = gen_path(n)
            for scheme in ("fastsd", "general"):
                rows.append(run_scheme(scheme, g).bench_record(f"path-2^{k}", g))
    else:
        raise RadiolabError(f"unknown bench suite {suite!r}")
    return rows


def cmd_bench(args) -> int:
    rows = _bench_rows(args.suite)
    target = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(target, fieldnames=BENCH_FIELDS)
        w.writeheader()
        for row in rows:
            w.writerow(row)
    finally:
        if args.out:
            target.close()
    bad = [r for r in rows if r["correct_outputs"] != r["n"]]
    return 1 if bad else 0


def _lb_partition_for(g: Graph, partition_file: str | None):
    if partition_file:
        data = json.loads(Path(partition_file).read_text())
        from .graphs import LBFamilyDescriptor

        return LBFamilyDescriptor(
            n=g.n,
            components=[list(map(int, comp)) for comp in data["components"]],
            specials=list(map(int, data.get("specials", []))),
        )
    # recognize a G_n instance by regenerating it
    root = math.isqrt(g.n)
    if root * root == g.n and root % 2 == 0:
        ref, desc = gen_lb_family(g.n)
        if ref.edges() == g.edges():
            return desc
    raise RadiolabError(
        "graph is not a generated lower-bound instance; pass --partition"
    )


def cmd_audit(args) -> int:
    with open(args.graph) as fp:
        g = read_edge_list(fp)
    desc = _lb_partition_for(g, args.partition)
    result = run_scheme(args.scheme, g, cd=True)
    report = audit_facts(result.trace, desc, labels=result.bundle.labels)
    out = report.to_json()
    if args.out:
        Path(args.out).write_text(out + "\n")
        with open(Path(args.out).with_suffix(".csv"), "w", newline="") as fp:
            report.write_csv(fp)
    else:
        print(out)
    return 0 if (report.ok and result.ok) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="radiolab",
        description="radio-network labeling schemes: generate, run, bench, audit",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a graph as an edge-list file")
    p.add_argument("--family", required=True,
                   choices=["path", "cycle", "star", "grid", "gnp-connected",
                            "tree", "lbG", "lbH"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--delta", type=int, default=4)
    p.add_argument("--seed", type=int, default=corpus_mod.BASE_SEED)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="synthesize labels, run a scheme, verify")
    p.add_argument("graph", help="edge-list file")
    p.add_argument("--scheme", required=True, choices=list(SCHEMES))
    p.add_argument("--cd", action="store_true", help="collision-detection mode")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="run a pinned suite, write CSV records")
    p.add_argument("--suite", required=True,
                   choices=["size", "labels", "toprec", "scaling"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("audit", help="CD-mode run plus lower-bound audits")
    p.add_argument("graph", help="edge-list file")
    p.add_argument("--scheme", required=True, choices=list(SCHEMES))
    p.add_argument("--partition", help="JSON file with component partition")
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RadiolabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
