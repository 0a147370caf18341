"""privext command line: enumerate, verify, decompose, graph.

Problem files are JSON::

    {
      "states": ["a", "b", "c"],          # or {"dims": [2, 2]} or a count
      "prior": "uniform",                 # or ["1/2", "1/3", "1/6"]
      "budget": {"t": "2"},               # or {"epsilon": 0.7}
      "graph": {"kind": "complete"}       # differential | custom + "edges"
    }

Rationals are written as "p/q" strings unless --float is given.
Exit codes: 0 ok, 1 bad input, 2 internal invariant violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence

from .core import (
    Budget,
    Graph,
    InvariantViolation,
    NotMember,
    Posterior,
    Prior,
    PrivextError,
    StateSpace,
    as_rational,
    build_graph,
    complete_graph,
    edge_violations,
    is_extreme,
    is_member,
)
from .diffpriv import DimensionSpec, division_two_semichains, differential_graph, enumerate_division_sequences
from .oracle import DEFAULT_VERTEX_CAP, cross_check
from .semichain import (
    SemiChain,
    enumerate_extreme_posteriors,
    enumerate_two_semichains,
    is_strongly_connected,
    validate_semichain,
)
from .signals import decompose_into_extremes

log = logging.getLogger("privext")


@dataclass(frozen=True)
class Problem:
    graph: Graph
    prior: Prior
    budget: Budget
    dims: DimensionSpec | None = None

    @property
    def labels(self) -> tuple[str, ...]:
        return self.graph.states.labels


def _parse_states(spec, graph_spec: dict) -> tuple[StateSpace, DimensionSpec | None]:
    dims = graph_spec.get("dims")
    if isinstance(spec, dict):
        if "dims" in spec:
            dims = spec["dims"]
        elif "labels" in spec:
            return StateSpace(tuple(spec["labels"])), None
        else:
            raise PrivextError("states object needs 'labels' or 'dims'")
    elif isinstance(spec, list):
        return StateSpace(tuple(spec)), None
    elif isinstance(spec, int) and not isinstance(spec, bool):
        return StateSpace.of_size(spec), None
    elif spec is not None:
        raise PrivextError("states must be a label list, a count, or {'dims': [...]}")
    if dims is None:
        raise PrivextError("problem file has no states")
    d = DimensionSpec(tuple(dims))
    return StateSpace(tuple(d.label(s) for s in d.tuples())), d


def _parse_budget(spec) -> Budget:
    if not isinstance(spec, dict) or len(spec) != 1:
        raise PrivextError("budget must be {'t': \"p/q\"} or {'epsilon': number}")
    if "t" in spec:
        return Budget(as_rational(spec["t"]))
    if "epsilon" in spec:
        return Budget.from_epsilon(float(spec["epsilon"]))
    raise PrivextError("budget must give 't' or 'epsilon'")


def _edge_index(states: StateSpace, end) -> int:
    if isinstance(end, int) and not isinstance(end, bool):
        return end
    try:
        return states.index(str(end))
    except ValueError:
        raise PrivextError(f"unknown state {end!r} in edge list") from None


def parse_problem(data: dict) -> Problem:
    if not isinstance(data, dict):
        raise PrivextError("problem file must hold a JSON object")
    graph_spec = data.get("graph", {"kind": "complete"})
    if isinstance(graph_spec, str):
        graph_spec = {"kind": graph_spec}
    states, dims = _parse_states(data.get("states"), graph_spec)
    kind = graph_spec.get("kind", "complete")
    if kind == "complete":
        g = complete_graph(states)
    elif kind == "differential":
        if dims is None:
            raise PrivextError("a differential graph needs 'dims'")
        g = differential_graph(dims)
    elif kind == "custom":
        edges = graph_spec.get("edges")
        if not isinstance(edges, list):
            raise PrivextError("a custom graph needs an 'edges' list")
        g = build_graph(states, [(_edge_index(states, a), _edge_index(states, b)) for a, b in edges])
    else:
        raise PrivextError(f"unknown graph kind {kind!r}")
    prior_spec = data.get("prior", "uniform")
    prior = Prior.uniform(g.n) if prior_spec == "uniform" else Prior(tuple(as_rational(p) for p in prior_spec))
    if len(prior) != g.n:
        raise PrivextError(f"prior has {len(prior)} entries for {g.n} states")
    return Problem(g, prior, _parse_budget(data.get("budget", {"t": "2"})), dims)


def load_problem(path: str) -> Problem:
    if path == "-":
        return parse_problem(json.load(sys.stdin))
    with open(path) as fh:
        return parse_problem(json.load(fh))


def fmt_rational(x: Fraction, as_float: bool = False) -> str:
    if not as_float:
        return str(x)
    with localcontext() as ctx:
        ctx.prec = 12
        return str(+(Decimal(x.numerator) / Decimal(x.denominator)))


def parse_vector(text: str, n: int) -> tuple[Fraction, ...]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != n:
        raise PrivextError(f"expected {n} comma-separated rationals, got {len(parts)}")
    return tuple(as_rational(p) for p in parts)


def parse_chain(text: str, labels: Sequence[str]) -> SemiChain:
    """A chain given as JSON: a list of levels, each a list of state labels."""
    try:
        levels = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PrivextError(f"--chain is not valid JSON: {exc}") from None
    index = {lab: i for i, lab in enumerate(labels)}
    try:
        return SemiChain(tuple(tuple(index[str(s)] for s in lvl) for lvl in levels))
    except KeyError as exc:
        raise PrivextError(f"unknown state {exc.args[0]!r} in --chain") from None


def _chain_labels(c: SemiChain | None, labels: Sequence[str]):
    if c is None:
        return None
    return [[labels[s] for s in lvl] for lvl in c.levels]


def _header(p: Problem, as_float: bool) -> dict:
    return {
        "states": list(p.labels),
        "prior": [fmt_rational(x, as_float) for x in p.prior.probs],
        "t": fmt_rational(p.budget.t, as_float),
        "approximate": p.budget.approximate,
    }


def _dump(obj: dict) -> str:
    # One top-level key per line; lists of records get one record per line.
    def compact(v):
        return json.dumps(v, ensure_ascii=False, separators=(", ", ": "))

    lines = []
    for key, value in obj.items():
        if isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            body = ",\n".join("    " + compact(v) for v in value)
            lines.append(f"  {compact(key)}: [\n{body}\n  ]")
        else:
            lines.append(f"  {compact(key)}: {compact(value)}")
    return "{\n" + ",\n".join(lines) + "\n}\n"


def enumerate_records(p: Problem, max_level: int | None, strategy: str):
    points = enumerate_extreme_posteriors(p.graph, p.prior, p.budget, strategy, max_level)
    return sorted(points, key=lambda e: (e.chain.sort_key() if e.chain else (0, ()), e.posterior))


def cmd_enumerate(args, p: Problem) -> str:
    records = enumerate_records(p, args.max_level, args.strategy)
    labels = p.labels
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["record", "levels", "chain"] + ([] if args.chains_only else list(labels)))
        for k, e in enumerate(records):
            chain = "" if e.chain is None else " | ".join(" ".join(lvl) for lvl in _chain_labels(e.chain, labels))
            row = [k, e.chain.L if e.chain else 0, chain]
            if not args.chains_only:
                row += [fmt_rational(x, args.float) for x in e.posterior.probs]
            w.writerow(row)
        return buf.getvalue()
    if args.format != "json":
        raise PrivextError("enumerate supports --format json or csv")
    out = _header(p, args.float)
    items = []
    for e in records:
        item = {"chain": _chain_labels(e.chain, labels)}
        if not args.chains_only:
            item["posterior"] = [fmt_rational(x, args.float) for x in e.posterior.probs]
        items.append(item)
    out["count"] = len(items)
    out["records"] = items
    return _dump(out)


def parse_enumeration(text: str, p: Problem) -> list[tuple[SemiChain | None, Posterior | None]]:
    """Read ``enumerate --format json`` output back and re-validate every record.

    Raises InvariantViolation if a chain or posterior fails its checks.
    """
    data = json.loads(text)
    labels = p.labels
    if data["states"] != list(labels):
        raise PrivextError("enumeration belongs to a different state space")
    index = {lab: i for i, lab in enumerate(labels)}
    out = []
    for item in data["records"]:
        chain = None
        if item["chain"] is not None:
            chain = SemiChain(tuple(tuple(index[s] for s in lvl) for lvl in item["chain"]))
            if not (validate_semichain(chain, p.graph) and is_strongly_connected(chain, p.graph)):
                raise InvariantViolation(f"record chain {chain} is not a strongly connected semi-chain")
        mu = None
        if "posterior" in item:
            mu = Posterior(tuple(as_rational(x) for x in item["posterior"]))
            if not is_member(mu, p.prior, p.graph, p.budget):
                raise InvariantViolation(f"record posterior {mu.probs} is infeasible")
            if not p.budget.degenerate and not is_extreme(mu, p.prior, p.graph, p.budget):
                raise InvariantViolation(f"record posterior {mu.probs} is not extreme")
        out.append((chain, mu))
    return out


def division_check_line(p: Problem, strategy: str) -> str | None:
    if p.dims is None or p.dims.K != 2:
        return None
    n1, n2 = p.dims.sizes
    seqs = enumerate_division_sequences(n1, n2)
    dup = len(seqs) - len({s.codes for s in seqs})
    truth = enumerate_two_semichains(p.graph, strategy)
    agree = division_two_semichains(n1, n2) == truth and dup == 0
    verdict = "AGREE" if agree else "DISAGREE"
    return f"division sequences: {verdict}, {len(truth)} 2-semi-chains, {dup} duplicate sequences"


def cmd_verify(args, p: Problem) -> tuple[str, int]:
    report = cross_check(p.graph, p.prior, p.budget, args.oracle_cap, args.strategy)
    line = division_check_line(p, args.strategy)
    ok = report.match and (line is None or "AGREE," in line)
    if args.format == "json":
        out = _header(p, args.float)
        out.update(
            match=report.match,
            summary=report.summary(),
            oracle_vertices=len(report.oracle_vertices),
            chain_count=report.chain_count,
            missing_from_chains=[[fmt_rational(x, args.float) for x in m] for m in sorted(report.missing_from_chains)],
            extra_in_chains=[[fmt_rational(x, args.float) for x in m] for m in sorted(report.extra_in_chains)],
            chain_collisions=[[_chain_labels(c, p.labels) for c in grp] for grp in report.chain_collisions],
        )
        if line is not None:
            out["division_check"] = line
        return _dump(out), 0 if ok else 2
    text = report.summary() + "\n" + (line + "\n" if line else "")
    return text, 0 if ok else 2


def _random_member(vertices: Sequence[Posterior], rng: random.Random) -> Posterior:
    k = rng.randint(1, min(len(vertices), len(vertices[0]) + 2))
    pts = rng.sample(list(vertices), k)
    w = [rng.randint(1, 12) for _ in pts]
    total = sum(w)
    n = len(pts[0])
    return Posterior(tuple(sum(Fraction(wi, total) * q[i] for wi, q in zip(w, pts)) for i in range(n)))


def _signal_json(mu: Posterior, s, as_float: bool) -> dict:
    return {
        "posterior": [fmt_rational(x, as_float) for x in mu.probs],
        "support": [[fmt_rational(x, as_float) for x in q.probs] for q in s.support],
        "weights": [fmt_rational(w, as_float) for w in s.weights],
        "weight_sum": fmt_rational(sum(s.weights), as_float),
    }


def cmd_decompose(args, p: Problem) -> str:
    if args.random and args.posterior:
        raise PrivextError("give either --posterior or --random, not both")
    vertices = None
    if not p.budget.degenerate:
        vertices = sorted({e.posterior for e in enumerate_extreme_posteriors(p.graph, p.prior, p.budget, args.strategy)})
    if args.random:
        rng = random.Random(args.seed)
        targets = [_random_member(vertices or [Posterior(p.prior.probs)], rng) for _ in range(args.random)]
    elif args.posterior:
        mu = Posterior(parse_vector(args.posterior, p.graph.n))
        bad = edge_violations(mu, p.prior, p.graph, p.budget)
        if bad:
            names = ", ".join(f"{p.labels[i]}-{p.labels[j]}" for i, j in bad)
            raise NotMember(f"posterior is infeasible; violated edges: {names}")
        targets = [mu]
    else:
        targets = [Posterior(p.prior.probs)]
    results = [_signal_json(mu, decompose_into_extremes(mu, p.graph, p.prior, p.budget, vertices), args.float)
               for mu in targets]
    out = _header(p, args.float)
    if len(results) == 1 and not args.random:
        out.update(results[0])
    else:
        out["seed"] = args.seed
        out["decompositions"] = results
    return _dump(out)


def _dot_id(label: str) -> str:
    return '"' + label.replace('"', '\\"') + '"'


def cmd_graph(args, p: Problem) -> str:
    labels = p.labels
    chain = parse_chain(args.chain, labels) if args.chain else None
    if chain is not None and not validate_semichain(chain, p.graph):
        raise PrivextError("--chain is not a semi-chain of this graph")
    if args.format == "json":
        out = {
            "states": list(labels),
            "edges": [[labels[i], labels[j]] for i, j in p.graph.edges],
        }
        if chain is not None:
            out["levels"] = _chain_labels(chain, labels)
            out["strongly_connected"] = is_strongly_connected(chain, p.graph)
        return _dump(out)
    if args.format != "dot":
        raise PrivextError("graph supports --format dot or json")
    lines = ["graph G {"]
    if chain is not None:
        lines.append("  rankdir=BT;")
        for k, lvl in enumerate(chain.levels, start=1):
            members = " ".join(_dot_id(labels[s]) + ";" for s in lvl)
            lines.append(f"  {{ rank=same; {members} }}  // level {k}")
    else:
        for lab in labels:
            lines.append(f"  {_dot_id(lab)};")
    for i, j in p.graph.edges:
        lines.append(f"  {_dot_id(labels[i])} -- {_dot_id(labels[j])};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privext", description="Extreme posteriors under graph privacy constraints.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="problem file (JSON), or - for stdin")
    common.add_argument("--float", action="store_true", help="print decimals (12 significant digits)")
    common.add_argument("--strategy", choices=["trees", "scan"], default="trees",
                        help="how 2-semi-chains are found (default: trees)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", parents=[common], help="list extreme posteriors and their chains")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--max-level", type=int, default=None)
    p.add_argument("--chains-only", action="store_true")

    p = sub.add_parser("verify", parents=[common], help="compare against brute-force vertex enumeration")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--oracle-cap", type=int, default=DEFAULT_VERTEX_CAP)

    p = sub.add_parser("decompose", parents=[common], help="write a posterior as a mix of extreme ones")
    p.add_argument("--posterior", help='comma-separated rationals, e.g. "3/5,2/5" (default: the prior)')
    p.add_argument("--random", type=int, default=0, metavar="N", help="decompose N random feasible posteriors")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("graph", parents=[common], help="export the privacy graph")
    p.add_argument("--format", choices=["dot", "json"], default="dot")
    p.add_argument("--chain", help='levels as JSON, e.g. \'[["00","11"],["01","10"]]\'')
    return parser


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(err)
    handler.setFormatter(logging.Formatter("warning: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.WARNING)
    log.propagate = False
    try:
        p = load_problem(args.problem)
        if p.budget.approximate:
            print(f"warning: t = {p.budget.t} approximates e^epsilon", file=err)
        code = 0
        if args.command == "enumerate":
            text = cmd_enumerate(args, p)
        elif args.command == "verify":
            text, code = cmd_verify(args, p)
        elif args.command == "decompose":
            text = cmd_decompose(args, p)
        else:
            text = cmd_graph(args, p)
        out.write(text)
        return code
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=err)
        return 2
    except (PrivextError, ValueError, TypeError, KeyError, OSError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=err)
        return 1
    finally:
        log.removeHandler(handler)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
