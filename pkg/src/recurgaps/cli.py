"""Single entry point for every experiment, with reproducible config.

All structured output is JSONL (one object per line) on stdout or --out;
humans get progress and the verify table on stderr.  Identical configs
(including seed and thread count) produce byte-identical JSONL; wall-clock
timing is only attached under --timing because it would break that.

Exit codes: 0 success, 2 parameter/validation error, 1 internal error
(and 1 when `verify` finds a failing check).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import acceptance
from .admissible import (AdmissibleTuple, ParameterError, choose_b, compute_W,
                         dense_tuple, make_sieve_params, standard_tuple)
from .cluster import consecutive_filter, detector_sum, scan_clusters
from .dynamics import (BoxSet, Cube, KroneckerSystem, khintchine_set,
                       shifted_prime_recurrence_set, weighted_correlation_sum)
from .expsum import (RationalPoint, classify_arc, expsum_discrepancy,
                     expsum_main_term, minor_arc_scan, prime_expsum,
                     weighted_expsum)
from .primes import TableRangeError, build_prime_table
from .serialize import config_hash, dumps
from .sieve import SumReport, omega_sum, weighted_prime_sum
from .testfn import default_test_function, piecewise_test_function

DEFAULTS = {
    "n": 10 ** 6, "theta": 0.1, "k": 2, "w": 5, "w0": 1, "b": None,
    "eps": 0.01, "m": 1, "consecutive": False, "system": "g=4",
    "set": "0", "f_spec": "default", "h": None, "tuple_style": "standard",
    "out": None, "threads": 1, "seed": acceptance.DEFAULT_SEED,
    "timing": False,
}

_INT_KEYS = {"n", "k", "w", "w0", "b", "m", "threads", "seed"}
_FLOAT_KEYS = {"theta", "eps"}
_BOOL_KEYS = {"consecutive", "timing"}


def _read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParameterError(f"bad config line (need key = value): {line!r}")
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            val = val.strip()
            if key not in DEFAULTS:
                raise ParameterError(f"unknown config key {key!r}")
            if key in _INT_KEYS:
                out[key] = int(val)
            elif key in _FLOAT_KEYS:
                out[key] = float(val)
            elif key in _BOOL_KEYS:
                out[key] = val.lower() in ("1", "true", "yes", "on")
            else:
                out[key] = val
    return out


def _resolve(args: argparse.Namespace) -> dict:
    """flags > config file > builtin defaults."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(_read_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg["subcommand"] = args.subcommand
    return cfg


def parse_system(spec: str) -> KroneckerSystem:
    fields = {}
    for part in spec.split(","):
        if not part:
            continue
        key, _, val = part.partition("=")
        fields[key.strip()] = val.strip()
    g = int(fields.get("g", 1))
    d = int(fields.get("d", 0))
    gamma0 = int(fields.get("gamma0", 1 % max(g, 1)))
    kap = fields.get("kappa", "sqrt_primes")
    if d == 0:
        return KroneckerSystem(g=g, d=0, gamma0=gamma0 % g, kappa=())
    if kap == "sqrt_primes":
        return KroneckerSystem.with_sqrt_kappa(g=g, d=d, gamma0=gamma0)
    kappa = tuple(float(x) % 1.0 for x in kap.split(":"))
    return KroneckerSystem(g=g, d=d, gamma0=gamma0 % g, kappa=kappa)


def parse_set(spec: str, sys_: KroneckerSystem) -> BoxSet:
    if spec == "all":
        return BoxSet.whole_space(sys_)
    if spec in ("empty", "none"):
        return BoxSet.empty(sys_)
    pieces = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        gamma = int(parts[0])
        if sys_.d == 0:
            if len(parts) > 1:
                raise ParameterError(
                    f"piece {chunk!r} has torus data but the system has d=0")
            pieces.append((gamma, Cube((), 1.0)))
        else:
            if len(parts) != 3:
                raise ParameterError(
                    f"piece {chunk!r} must be gamma:c1,..,cd:side for d={sys_.d}")
            corner = tuple(float(x) for x in parts[1].split(","))
            pieces.append((gamma, Cube(corner, float(parts[2]))))
    return BoxSet(g=sys_.g, d=sys_.d, pieces=tuple(pieces))


def _build_tuple(cfg: dict) -> AdmissibleTuple:
    if cfg.get("h"):
        return AdmissibleTuple(tuple(int(x) for x in str(cfg["h"]).split(",")))
    if cfg["tuple_style"] == "dense":
        return dense_tuple(cfg["k"], cfg["w0"])
    return standard_tuple(cfg["k"], cfg["w0"])


def _build_params(cfg: dict):
    return make_sieve_params(N=cfg["n"], h=_build_tuple(cfg), theta=cfg["theta"],
                             w=cfg["w"], W0=cfg["w0"], b=cfg["b"],
                             consecutive=cfg["consecutive"])


def _build_F(cfg: dict, k: int):
    if cfg["f_spec"] == "default":
        return default_test_function(k)
    return piecewise_test_function(k, json.loads(cfg["f_spec"]))


class _Emitter:
    # thread count and output path are execution details with no effect on
    # computed values, so they stay out of the reproducibility echo/hash
    def __init__(self, cfg: dict, stream):
        self.cfg = {k: v for k, v in cfg.items() if k not in ("out", "threads")}
        self.hash = config_hash(self.cfg)
        self.stream = stream
        self.timing = cfg.get("timing", False)
        self._t0 = time.perf_counter()

    def emit(self, record: dict) -> None:
        line = dict(record)
        line["config_hash"] = self.hash
        line["config"] = self.cfg
        self.stream.write(dumps(line) + "\n")

    def emit_report(self, rep: SumReport) -> None:
        wall = (time.perf_counter() - self._t0) * 1000.0 if self.timing else None
        self._t0 = time.perf_counter()
        self.emit({"op": rep.op, "measured": rep.measured,
                   "predicted": rep.predicted, "ratio": rep.ratio,
                   "count": rep.count, "bound": rep.bound,
                   "wall_ms": wall, "params": rep.params})


def _cmd_tuple(cfg: dict, em: _Emitter, table) -> int:
    tup = _build_tuple(cfg)
    W = compute_W(cfg["w"], cfg["w0"])
    b, forced = choose_b(tup, cfg["w"], cfg["w0"], consecutive=cfg["consecutive"])
    em.emit({"op": "tuple", "h": list(tup.h), "W": W, "b": b,
             "forced": [list(x) for x in forced]})
    return 0


def _cmd_sums(cfg: dict, em: _Emitter, table) -> int:
    p = _build_params(cfg)
    F = _build_F(cfg, p.k)
    t = table(p.table_limit())
    em.emit_report(omega_sum(p, F, t, threads=cfg["threads"]))
    for i in range(p.k + 1):
        em.emit_report(weighted_prime_sum(p, F, i, t, threads=cfg["threads"]))
    return 0


def _cmd_expsum(cfg: dict, em: _Emitter, table, args) -> int:
    op = args.op
    if op == "classify":
        label = classify_arc(args.alpha, cfg["n"])
        em.emit({"op": "classify_arc", "alpha": args.alpha, "kind": label.kind,
                 "a": label.a, "q": label.q, "P": label.P, "Q": label.Q})
        return 0
    if op == "discrepancy":
        t = table(2 * cfg["n"] + 1)
        val = expsum_discrepancy(args.q, args.delta, cfg["n"], args.grid, t)
        em.emit({"op": "expsum_discrepancy", "q": args.q, "delta": args.delta,
                 "x": cfg["n"], "grid": args.grid, "value": val,
                 "semantics": "grid lower bound"})
        return 0
    pt = RationalPoint(args.a, args.q, args.theta_offset)
    if op == "prime":
        t = table(2 * cfg["n"] + 1)
        val = prime_expsum(cfg["n"], args.d_mod, args.b_res, pt, t)
        em.emit({"op": "prime_expsum", "x": cfg["n"], "D": args.d_mod,
                 "b": args.b_res, "a": pt.a, "q": pt.q,
                 "theta_offset": pt.theta, "value": val})
        return 0
    if op == "main-term":
        t = table(2 * cfg["n"] + 1)
        val = expsum_main_term(cfg["n"], args.d_mod, args.b_res, pt, t)
        em.emit({"op": "expsum_main_term", "x": cfg["n"], "D": args.d_mod,
                 "b": args.b_res, "a": pt.a, "q": pt.q,
                 "theta_offset": pt.theta, "value": val})
        return 0
    if op == "weighted":
        p = _build_params(cfg)
        F = _build_F(cfg, p.k)
        t = table(p.table_limit())
        em.emit_report(weighted_expsum(p, F, args.i, pt, t,
                                       threads=cfg["threads"]))
        return 0
    if op == "minor-scan":
        p = _build_params(cfg)
        F = _build_F(cfg, p.k)
        t = table(p.table_limit())
        alphas = [float(x) for x in args.alphas.split(",")]
        for rec in minor_arc_scan(p, F, args.i, alphas, t,
                                  threads=cfg["threads"]):
            em.emit({"op": "minor_arc_scan", **rec})
        return 0
    raise ParameterError(f"unknown expsum op {op!r}")


def _cmd_recur(cfg: dict, em: _Emitter, table, args) -> int:
    sys_ = parse_system(cfg["system"])
    A = parse_set(cfg["set"], sys_)
    if args.weighted:
        p = _build_params(cfg)
        F = _build_F(cfg, p.k)
        t = table(p.table_limit())
        for i in range(p.k + 1):
            em.emit_report(weighted_correlation_sum(
                p, F, sys_, A, i, cfg["eps"], t, threads=cfg["threads"]))
        return 0
    if args.pmax is not None:
        t = table(max(args.pmax, 2))
        ps = shifted_prime_recurrence_set(sys_, A, cfg["eps"], args.pmax, t)
        em.emit({"op": "shifted_prime_recurrence_set", "eps": cfg["eps"],
                 "pmax": args.pmax, "count": len(ps),
                 "primes": [int(x) for x in ps]})
    else:
        nmax = args.nmax if args.nmax is not None else 10 ** 4
        ns = khintchine_set(sys_, A, cfg["eps"], nmax)
        gaps = np.diff(ns) if len(ns) > 1 else np.array([0])
        em.emit({"op": "khintchine_set", "eps": cfg["eps"], "nmax": nmax,
                 "count": len(ns), "max_gap": int(gaps.max()),
                 "values": [int(x) for x in ns]})
    return 0


def _cmd_cluster(cfg: dict, em: _Emitter, table, args) -> int:
    sys_ = parse_system(cfg["system"])
    A = parse_set(cfg["set"], sys_)
    p = _build_params(cfg)
    F = _build_F(cfg, p.k)
    t = table(p.table_limit())
    em.emit_report(detector_sum(p, F, sys_, A, cfg["eps"], cfg["m"], t,
                                threads=cfg["threads"]))
    reports = scan_clusters(p, sys_, A, cfg["eps"], cfg["m"], t)
    reports = consecutive_filter(reports, p, t)
    for rep in reports:
        em.emit({"op": "cluster", **rep.as_dict()})
    em.emit({"op": "cluster_summary", "clusters": len(reports),
             "max_width": max((r.width for r in reports), default=0)})
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("n,primes,width,consecutive\n")
            for rep in reports:
                fh.write("%d,%s,%d,%s\n" % (
                    rep.n, ";".join(str(q) for q in rep.primes), rep.width,
                    rep.consecutive))
    return 0


def _cmd_verify(cfg: dict, em: _Emitter, table) -> int:
    results = acceptance.run_all(threads=cfg["threads"], seed=cfg["seed"])
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        status = "PASS" if (r.passed and r.runtime_ok) else "FAIL"
        if status == "FAIL":
            failed += 1
        print(f"[{status}] {r.num:>2}  {r.name:<{width}}  ({r.elapsed_s:.1f}s)",
              file=sys.stderr)
        em.emit(r.record())
    print(f"{len(results) - failed}/{len(results)} checks passed",
          file=sys.stderr)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="recurgaps",
        description="Prime clusters with recurrent shifts on explicit "
                    "rotation systems: sieve sums, exponential sums, exact "
                    "correlations, and cluster scans.")
    ap.add_argument("--config", help="key = value file; flags override it")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(sp, keys):
        if "n" in keys:
            sp.add_argument("--n", type=int)
        if "theta" in keys:
            sp.add_argument("--theta", type=float)
        if "k" in keys:
            sp.add_argument("--k", type=int)
        if "w" in keys:
            sp.add_argument("--w", type=int)
        if "w0" in keys:
            sp.add_argument("--w0", type=int)
        if "b" in keys:
            sp.add_argument("--b", type=int)
        if "h" in keys:
            sp.add_argument("--h", help="explicit shifts, comma separated")
            sp.add_argument("--tuple-style", dest="tuple_style",
                            choices=("standard", "dense"))
        if "eps" in keys:
            sp.add_argument("--eps", type=float)
        if "m" in keys:
            sp.add_argument("--m", type=int)
        if "consecutive" in keys:
            sp.add_argument("--consecutive", action="store_const", const=True)
        if "system" in keys:
            sp.add_argument("--system")
        if "set" in keys:
            sp.add_argument("--set")
        if "f_spec" in keys:
            sp.add_argument("--f-spec", dest="f_spec")
        sp.add_argument("--out")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--timing", action="store_const", const=True)

    sp = sub.add_parser("tuple", help="admissible tuple, W, and residue b")
    common(sp, {"k", "w", "w0", "h", "consecutive"})

    sp = sub.add_parser("sums", help="progression sums vs main terms")
    common(sp, {"n", "theta", "k", "w", "w0", "b", "h", "f_spec"})

    sp = sub.add_parser("expsum", help="exponential sums and arcs")
    common(sp, {"n", "theta", "k", "w", "w0", "b", "h", "f_spec"})
    sp.add_argument("--op", required=True,
                    choices=("prime", "main-term", "weighted", "discrepancy",
                             "classify", "minor-scan"))
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--q", type=int, default=1)
    sp.add_argument("--theta-offset", dest="theta_offset", type=float, default=0.0)
    sp.add_argument("--d-mod", dest="d_mod", type=int, default=1)
    sp.add_argument("--b-res", dest="b_res", type=int, default=1)
    sp.add_argument("--i", type=int, default=0)
    sp.add_argument("--delta", type=float, default=0.0)
    sp.add_argument("--grid", type=int, default=41)
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--alphas", default="0.6180339887498949")

    sp = sub.add_parser("recur", help="return sets: integers or shifted primes")
    common(sp, {"n", "theta", "k", "w", "w0", "b", "h", "eps", "system", "set",
                "f_spec"})
    sp.add_argument("--pmax", type=int)
    sp.add_argument("--nmax", type=int)
    sp.add_argument("--weighted", action="store_true",
                    help="emit the weighted correlation sums instead of sets")

    sp = sub.add_parser("cluster", help="detector sum and direct cluster scan")
    common(sp, {"n", "theta", "k", "w", "w0", "b", "h", "eps", "m",
                "consecutive", "system", "set", "f_spec"})
    sp.add_argument("--csv", help="also write an n,primes,width summary")

    sp = sub.add_parser("verify", help="run the built-in verification suite")
    common(sp, set())

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _resolve(args)
        out = open(cfg["out"], "w") if cfg.get("out") else sys.stdout
        try:
            em = _Emitter(cfg, out)
            tables: dict[int, object] = {}

            def table(limit: int):
                have = max(tables) if tables else 0
                if have < limit:
                    tables.clear()
                    tables[limit] = build_prime_table(limit)
                return tables[max(tables)]

            if args.subcommand == "tuple":
                return _cmd_tuple(cfg, em, table)
            if args.subcommand == "sums":
                return _cmd_sums(cfg, em, table)
            if args.subcommand == "expsum":
                return _cmd_expsum(cfg, em, table, args)
            if args.subcommand == "recur":
                return _cmd_recur(cfg, em, table, args)
            if args.subcommand == "cluster":
                return _cmd_cluster(cfg, em, table, args)
            if args.subcommand == "verify":
                return _cmd_verify(cfg, em, table)
            raise ParameterError(f"unknown subcommand {args.subcommand!r}")
        finally:
            if cfg.get("out"):
                out.close()
    except (ParameterError, TableRangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 -- report, then fail hard
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
