"""Command-line front end.

Parameters come from a JSON config file and/or flags; flags win over the
file, the file wins over defaults.  A config looks like::

    {"rates": {"alpha": 1, "beta": 1, "gamma": 0, "delta": 0, "q": 0},
     "numeric": {"quad_nodes": 200, "trunc_eps": 1e-15, "tol_grid": 1e-9}}

or uses ``"abcd": {"A": .., "B": .., "C": .., "D": .., "q": ..}``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics as asy
from . import oracle, usw, verify
from .asepmap import (ASEPRates, BoundaryParams, abcd_to_rates, admissible_time, classify_phase,
                      rates_to_abcd)
from .awmeasure import measure_to_dict, region_check
from .awpoly import scaled_params
from .errors import AsepAWError, ConfigError, InversionFailure, SingularCase
from .multitime import marginal_measure, pin_integral, transition_measure
from .qcore import TruncationSpec

RATE_KEYS = ("alpha", "beta", "gamma", "delta")
ABCD_KEYS = ("A", "B", "C", "D")
NUMERIC_DEFAULTS = {"quad_nodes": 200, "trunc_eps": 1e-15, "tol_grid": 1e-9, "threads": 1,
                    "out": "json"}

CSV_COLUMNS = {
    "profile": ("site", "x", "density", "prediction"),
    "fluct": ("x_i", "x_j", "cov", "cov_over_n", "prediction_over_n"),
    "asymptote": ("n", "log_Zn", "log_prediction", "ratio", "trend_ok"),
}

EPILOG = """CSV columns (stable):
  profile    site,x,density,prediction
  fluct      x_i,x_j,cov,cov_over_n,prediction_over_n
  asymptote  n,log_Zn,log_prediction,ratio,trend_ok
Exit status is 0 on success, 1 when a verification check fails and 2 on errors."""


@dataclass
class RunConfig:
    rates: ASEPRates | None
    bp: BoundaryParams
    quad_nodes: int = 200
    trunc_eps: float = 1e-15
    tol_grid: float = 1e-9
    threads: int = 1
    out: str = "json"
    extra: dict = field(default_factory=dict)

    @property
    def trunc(self) -> TruncationSpec:
        return TruncationSpec(eps=self.trunc_eps)


def _load_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the JSON file and command-line flags (in increasing priority)."""
    data = _load_file(args.config)
    numeric = dict(NUMERIC_DEFAULTS)
    numeric.update(data.get("numeric", {}))
    for key in NUMERIC_DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            numeric[key] = val

    rates = dict(data.get("rates", {}))
    abcd = dict(data.get("abcd", {}))
    q_file = data.get("q")
    cli_rates = {k: getattr(args, k) for k in RATE_KEYS if getattr(args, k, None) is not None}
    cli_abcd = {k: getattr(args, k) for k in ABCD_KEYS if getattr(args, k, None) is not None}
    # a parameterization given on the command line replaces the file's one
    if cli_rates:
        rates, abcd = {**(rates if not abcd else {}), **cli_rates}, {}
    if cli_abcd:
        abcd, rates = {**(abcd if not rates else {}), **cli_abcd}, {}
    if bool(rates) == bool(abcd):
        raise ConfigError("give exactly one of the rates (alpha, beta, gamma, delta) "
                          "or the boundary parameters (A, B, C, D)")
    q = args.q if args.q is not None else rates.get("q", abcd.get("q", q_file))
    if q is None:
        raise ConfigError("q is required")
    tol = float(numeric["tol_grid"])
    if rates:
        missing = [k for k in RATE_KEYS if k not in rates]
        if missing:
            raise ConfigError(f"missing rates: {', '.join(missing)}")
        r = ASEPRates(*(float(rates[k]) for k in RATE_KEYS), float(q))
        bp = rates_to_abcd(r, tol, allow_singular=True)
    else:
        missing = [k for k in ABCD_KEYS if k not in abcd]
        if missing:
            raise ConfigError(f"missing boundary parameters: {', '.join(missing)}")
        bp = BoundaryParams(*(float(abcd[k]) for k in ABCD_KEYS), float(q))
        try:
            r = abcd_to_rates(bp)
        except (InversionFailure, AsepAWError):
            r = None
    if numeric["out"] not in ("json", "csv"):
        raise ConfigError("--out must be json or csv")
    return RunConfig(r, bp, int(numeric["quad_nodes"]), float(numeric["trunc_eps"]), tol,
                     max(1, int(numeric["threads"])), numeric["out"])


# ------------------------------------------------------------------ commands


def cmd_phase(cfg: RunConfig) -> dict:
    ph = classify_phase(cfg.bp, cfg.tol_grid)
    t1 = admissible_time(cfg.bp, 1.0, tol=cfg.tol_grid)
    return {
        "rates": cfg.rates.as_dict() if cfg.rates else None,
        "abcd": cfg.bp.as_dict(),
        "phase": ph.phase.value,
        "region": ph.region.value,
        "singular_abcd": cfg.bp.is_singular(cfg.tol_grid),
        "bernoulli_product": abs(cfg.bp.A * cfg.bp.C - 1) < cfg.tol_grid,
        "t1_admissible": t1.ok,
        "t1_conditions": t1.conditions,
    }


def _require_rates(cfg: RunConfig) -> ASEPRates:
    if cfg.rates is None:
        raise ConfigError("these boundary parameters do not correspond to valid rates")
    return cfg.rates


def cmd_stationary(cfg: RunConfig, n: int, samples: int = 5, seed: int = 0) -> dict:
    r = _require_rates(cfg)
    dist = oracle.stationary(n, r)
    out = oracle.dist_to_dict(dist, r)
    rng = np.random.default_rng(seed)
    rows = []
    if not cfg.bp.is_singular(cfg.tol_grid):
        for _ in range(samples):
            ts = rng.uniform(0.1, 2.0, size=n)
            a = usw.gen_fn(n, ts, cfg.bp)
            b = oracle.oracle_gen_fn(n, r, ts, dist)
            rows.append({"ts": ts.tolist(), "mpa": a, "oracle": b, "abs_diff": abs(a - b)})
    out["cross_check"] = rows
    out["max_abs_diff"] = max((row["abs_diff"] for row in rows), default=None)
    out["bernoulli_product"] = abs(cfg.bp.A * cfg.bp.C - 1) < cfg.tol_grid
    return out


def cmd_measure(cfg: RunConfig, t: float) -> dict:
    m = marginal_measure(t, cfg.bp, cfg.quad_nodes, cfg.trunc, cfg.tol_grid)
    out = measure_to_dict(m)
    out["t"] = t
    out["region"] = region_check(scaled_params(cfg.bp, t), cfg.tol_grid).as_dict()
    return out


def cmd_kernel(cfg: RunConfig, s: float, t: float, x: float) -> dict:
    m = transition_measure(s, t, x, cfg.bp, cfg.quad_nodes, cfg.trunc, cfg.tol_grid)
    out = measure_to_dict(m)
    out.update({"s": s, "t": t, "x": x})
    return out


def cmd_pi(cfg: RunConfig, ts: list) -> dict:
    lhs = pin_integral(ts, cfg.bp, cfg.quad_nodes, cfg.trunc, cfg.tol_grid)
    rhs = float(usw.pi_n(ts, cfg.bp))
    return {"ts": ts, "signed_measure": lhs, "matrix_ansatz": rhs,
            "relative_error": abs(lhs - rhs) / abs(rhs)}


def cmd_profile(cfg: RunConfig, n: int) -> list:
    rho = usw.one_point_all(n, cfg.bp)
    rows = []
    for i, v in enumerate(rho, start=1):
        try:
            pred = asy.density_profile_prediction(i / n, cfg.bp)
        except AsepAWError:
            pred = float("nan")
        rows.append((i, i / n, float(v), pred))
    return rows


def cmd_fluct(cfg: RunConfig, n: int, xs: list) -> list:
    M = usw.two_point_all(n, cfg.bp)
    mu = np.diag(M).copy()
    cov = M - np.outer(mu, mu)
    np.fill_diagonal(cov, mu - mu**2)
    ks = [int(math.floor(n * x + 1e-12)) for x in xs]
    rows = []
    for xi, ki in zip(xs, ks):
        for xj, kj in zip(xs, ks):
            c = float(cov[:ki, :kj].sum())
            try:
                pred = asy.fluctuation_variance(min(xi, xj), cfg.bp)
            except AsepAWError:
                pred = float("nan")
            rows.append((xi, xj, c, c / n, pred))
    return rows


def cmd_asymptote(cfg: RunConfig, ns: list) -> list:
    def one(n):
        z = usw.partition(n, cfg.bp)
        pred = asy.zn_prediction(n, cfg.bp)
        return n, z.log_abs, pred.log_abs, float(z / pred)

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        results = list(pool.map(one, ns))
    rows = []
    prev = None
    for n, lz, lp, ratio in results:
        err = abs(ratio - 1)
        ok = prev is None or err < 0.7 * prev or err < 1e-12
        rows.append((n, lz, lp, ratio, ok))
        prev = err
    return rows


def cmd_verify(suite: str) -> dict:
    return verify.run(suite)


# ------------------------------------------------------------------ output


def _write_rows(name: str, rows: list, fmt: str, stream) -> None:
    cols = CSV_COLUMNS[name]
    if fmt == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(cols)
        w.writerows(rows)
    else:
        json.dump([dict(zip(cols, r)) for r in rows], stream, indent=2)
        stream.write("\n")


def _write_obj(obj: dict, fmt: str, stream) -> None:
    if fmt == "csv":
        # flat key,value listing for scalar entries
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(("key", "value"))
        for k, v in obj.items():
            if not isinstance(v, (list, dict)):
                w.writerow((k, v))
    else:
        json.dump(obj, stream, indent=2, default=str)
        stream.write("\n")


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list:
    return [int(v) for v in _floats(text)]


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--config", help="JSON config file")
    g.add_argument("--quad-nodes", dest="quad_nodes", type=int, help="quadrature nodes (default 200)")
    g.add_argument("--trunc-eps", dest="trunc_eps", type=float,
                   help="tail tolerance for infinite products (default 1e-15)")
    g.add_argument("--tol-grid", dest="tol_grid", type=float,
                   help="tolerance for q-lattice membership tests (default 1e-9)")
    g.add_argument("--out", choices=("json", "csv"), help="output format (default json)")
    g.add_argument("--threads", type=int, help="worker threads for sweeps (default 1)")
    p = common.add_argument_group("parameters (rates or A,B,C,D)")
    for k in RATE_KEYS:
        p.add_argument(f"--{k}", type=float)
    for k in ABCD_KEYS:
        p.add_argument(f"--{k}", dest=k, type=float)
    p.add_argument("--q", type=float)

    parser = argparse.ArgumentParser(prog="asepaw", description=__doc__.split("\n")[0],
                                     epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_, epilog=EPILOG,
                              formatter_class=argparse.RawDescriptionHelpFormatter)

    add("phase", "both parameterizations, phase and region")
    sp = add("stationary", "exact stationary distribution and matrix ansatz cross-check")
    sp.add_argument("--n", type=int, required=True)
    sp = add("measure", "marginal signed measure pi_t")
    sp.add_argument("--t", type=float, default=1.0)
    sp = add("kernel", "transition kernel P_{s,t}(x, .)")
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--x", type=float, required=True)
    sp = add("pi", "iterated signed-measure integral vs the matrix ansatz")
    sp.add_argument("--ts", type=_floats, required=True, help="comma-separated times")
    sp = add("profile", "density profile E[tau_i]")
    sp.add_argument("--n", type=int, required=True)
    sp = add("fluct", "covariance of the height function")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--xs", type=_floats, default=[0.5, 1.0], help="comma-separated points in (0,1]")
    sp = add("asymptote", "Z_n against its leading-order prediction")
    sp.add_argument("--ns", type=_ints, required=True, help="comma-separated sizes")
    sp = sub.add_parser("verify", parents=[common], help="run verification suites")
    sp.add_argument("--suite", choices=verify.SUITE_NAMES, default="all")
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            report = cmd_verify(args.suite)
            if args.out == "csv":
                w = csv.writer(stdout, lineterminator="\n")
                w.writerow(("suite", "check", "value", "limit", "passed", "seconds"))
                for r in report["checks"]:
                    w.writerow((r["suite"], r["name"], r["value"], r["limit"], r["passed"], r["seconds"]))
            else:
                json.dump(report, stdout, indent=2)
                stdout.write("\n")
            stderr.write(verify.format_table(report) + "\n")
            return 0 if report["passed"] else 1

        cfg = build_config(args)
        cmd = args.command
        if cmd in CSV_COLUMNS:
            rows = {"profile": lambda: cmd_profile(cfg, args.n),
                    "fluct": lambda: cmd_fluct(cfg, args.n, args.xs),
                    "asymptote": lambda: cmd_asymptote(cfg, args.ns)}[cmd]()
            _write_rows(cmd, rows, cfg.out, stdout)
            return 0
        obj = {"phase": lambda: cmd_phase(cfg),
               "stationary": lambda: cmd_stationary(cfg, args.n),
               "measure": lambda: cmd_measure(cfg, args.t),
               "kernel": lambda: cmd_kernel(cfg, args.s, args.t, args.x),
               "pi": lambda: cmd_pi(cfg, args.ts)}[cmd]()
        _write_obj(obj, cfg.out, stdout)
        return 0
    except (AsepAWError, SingularCase) as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


def run_captured(argv) -> tuple[int, str, str]:
    """Run the CLI in-process and return (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


if __name__ == "__main__":
    sys.exit(main())
