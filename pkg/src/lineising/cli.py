"""Command line entry point: ``lineising {exact,sample,estimate,windability}``.

Machine output is JSON (stdout or ``--out``); a short human table goes to
stderr.  Exit codes: 0 ok, 1 infeasible or failed check, 2 usage or cap error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction


from .chains import ChainConfig, draw_samples, run_chain
from .estimator import default_burn_in, estimate_Z
from .graph import Graph, GraphError
from .oracle import OracleCapError, exact_summary
from .signatures import ModelParams, Signature, ising_signature
from .validation import check_graph
from .windability import is_windable

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunSpec:
    command: str
    graph: str | None = None
    beta: float = 0.0
    nu: float = 0.0
    fields: str | None = None
    seed: int | None = None
    steps: int | None = None
    burnin: int | None = None
    samples: int | None = None
    thin: int | None = None
    epsilon: float = 0.1
    chain: str = "glauber"
    threads: int = 1
    replicas: int = 1
    out: str | None = None
    signature: str | None = None
    mu: float | None = None
    degree: int | None = None
    mode: str | None = None

    def __post_init__(self):
        if self.command in ("exact", "sample", "estimate") and not self.graph:
            raise UsageError("--graph is required")
        if self.command in ("sample", "estimate") and self.seed is None:
            raise UsageError("--seed is required for sampling commands")
        if self.command == "windability":
            lit = self.signature is not None
            gen = self.degree is not None
            if lit == gen:
                raise UsageError("give exactly one of --signature or --degree (with --beta, --mu)")

    @property
    def kind(self) -> str:
        return self.chain.replace("-", "_")

    def load_graph(self) -> Graph:
        try:
            return check_graph(self.graph)
        except (GraphError, OSError) as exc:
            raise UsageError(f"bad graph {self.graph!r}: {exc}") from exc

    def load_params(self, g: Graph) -> ModelParams:
        if self.fields is None:
            return ModelParams(self.beta, self.nu)
        return ModelParams(self.beta, tuple(read_fields(self.fields, g.m, self.nu)))


def read_fields(path: str, m: int, default: float = 0.0) -> list[float]:
    """Per-edge fields from ``edge_index nu`` lines; unlisted edges keep ``default``."""
    nu = [float(default)] * m
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].split()
            if not line:
                continue
            try:
                e, v = int(line[0]), float(line[1])
            except (ValueError, IndexError) as exc:
                raise UsageError(f"{path}:{lineno}: expected 'edge_index nu_value'") from exc
            if len(line) != 2 or not 0 <= e < m:
                raise UsageError(f"{path}:{lineno}: bad field line")
            nu[e] = v
    return nu


def parse_signature(text: str) -> Signature:
    """``[1,0.70,0.70,1]`` with entries read exactly as fractions."""
    body = text.strip().lstrip("[").rstrip("]")
    try:
        vals = tuple(Fraction(t.strip()) for t in body.split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(f"cannot parse signature {text!r}") from exc
    if not vals:
        raise UsageError("empty signature")
    return Signature(vals)


def _emit(spec: RunSpec, payload, text: str | None = None):
    out = text if text is not None else json.dumps(payload, sort_keys=True, indent=1) + "\n"
    if spec.out:
        with open(spec.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _table(rows):
    w = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{w}}  {v}", file=sys.stderr)


def cmd_exact(spec: RunSpec) -> int:
    g = spec.load_graph()
    s = exact_summary(g, spec.load_params(g))
    d = s.to_dict()
    _emit(spec, d)
    _table(sorted(d.items()))
    return EXIT_OK


def cmd_sample(spec: RunSpec) -> int:
    g = spec.load_graph()
    params = spec.load_params(g)
    burn = default_burn_in(g) if spec.burnin is None else spec.burnin
    thin = spec.thin or 8 * g.m
    cfg = dict(kind=spec.kind, burn_in=burn, seed=spec.seed, thin=thin,
               replicas=spec.replicas, threads=spec.threads)
    if spec.samples is not None:
        res = draw_samples(g, params, spec.samples, ChainConfig(steps=0, **cfg))
    else:
        res = run_chain(g, params, ChainConfig(steps=spec.steps or 100 * thin, **cfg))
    lines = "".join("".join(map(str, row)) + "\n" for row in res.samples.tolist())
    _emit(spec, None, lines)
    diag = res.to_dict()
    p = res.omega0_fraction
    diag.update(graph=spec.graph, beta=params.beta, chain=spec.kind, seed=spec.seed, thin=thin, burn_in=burn,
                omega_ratio=(1 - p) / p if p > 0 else None)
    if spec.out:
        with open(spec.out + ".json", "w") as fh:
            json.dump(diag, fh, sort_keys=True, indent=1)
            fh.write("\n")
    _table([(k, diag[k]) for k in ("samples", "steps", "omega0_fraction", "acceptance_rate", "violations")])
    return EXIT_OK if res.violations == 0 else EXIT_FAIL


def cmd_estimate(spec: RunSpec) -> int:
    g = spec.load_graph()
    params = spec.load_params(g)
    rep = estimate_Z(g, params, spec.epsilon, seed=spec.seed, chain=spec.kind, samples=spec.samples,
                     burn_in=spec.burnin, spacing=spec.thin, replicas=spec.replicas, threads=spec.threads)
    _emit(spec, None, rep.to_json() + "\n")
    _table([("log_Z", f"{rep.log_Z:.10g}"), ("stderr", f"{rep.log_Z_stderr:.3g}"),
            ("levels", len(rep.ratio_means)), ("samples/level", rep.samples_per_level),
            ("steps", rep.total_steps), ("seconds", f"{rep.wall_time:.2f}")])
    return EXIT_OK


def cmd_windability(spec: RunSpec) -> int:
    if spec.signature is not None:
        sig = parse_signature(spec.signature)
        mode = spec.mode or "exact"
    else:
        sig = ising_signature(spec.beta, spec.mu or 0.0, spec.degree)
        mode = spec.mode or "float"
    rep = is_windable(sig, mode=mode)
    stream = "".join(json.dumps(c.to_dict(), sort_keys=True) + "\n" for c in rep.certificates)
    _emit(spec, None, stream)
    bad = [c for c in rep.certificates if not c.feasible]
    _table([("windable", rep.windable), ("pinnings", len(rep.certificates)), ("infeasible", len(bad)),
            ("worst margin", float(rep.worst.margin) if rep.worst else math.nan)])
    return EXIT_OK if rep.windable else EXIT_FAIL


COMMANDS = {"exact": cmd_exact, "sample": cmd_sample, "estimate": cmd_estimate, "windability": cmd_windability}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lineising", description="Ising model on line graphs: exact values, sampling, estimation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, sampling):
        sp.add_argument("--graph", help="edge-list file or generator spec such as hex:2, cycle:6, star:3")
        sp.add_argument("--beta", type=float, default=0.0)
        sp.add_argument("--nu", type=float, default=0.0, help="uniform field")
        sp.add_argument("--fields", help="file of 'edge_index nu_value' lines")
        sp.add_argument("--out")
        if sampling:
            sp.add_argument("--seed", type=int)
            sp.add_argument("--steps", type=int)
            sp.add_argument("--burnin", type=int)
            sp.add_argument("--samples", type=int)
            sp.add_argument("--thin", type=int, help="steps between recorded samples")
            sp.add_argument("--chain", choices=["half-edge", "glauber"], default="glauber")
            sp.add_argument("--threads", type=int, default=1)
            sp.add_argument("--replicas", type=int, default=1)

    common(sub.add_parser("exact", help="brute-force log Z, log H0, log H2"), False)
    common(sub.add_parser("sample", help="draw Gibbs samples"), True)
    est = sub.add_parser("estimate", help="annealed estimate of log Z")
    common(est, True)
    est.add_argument("--epsilon", type=float, default=0.1)
    w = sub.add_parser("windability", help="certify every pinning of a signature")
    w.add_argument("--signature", help="literal such as [1,0.70,0.70,1]")
    w.add_argument("--beta", type=float, default=0.0)
    w.add_argument("--mu", type=float, default=0.0)
    w.add_argument("--degree", type=int)
    w.add_argument("--mode", choices=["float", "exact"],
                   help="default: exact for literals, float for --degree")
    w.add_argument("--out")
    return p


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        spec = RunSpec(**{k: v for k, v in vars(ns).items() if v is not None or k in ("seed",)})
        return COMMANDS[spec.command](spec)
    except UsageError as exc:
        print(f"lineising: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OracleCapError, GraphError, ValueError) as exc:
        print(f"lineising: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
