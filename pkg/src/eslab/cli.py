"""Batch front end: argument parsing, experiment orchestration, reports.

Subcommands: sieve, expsum, scan, hb-verify, waring, vmvt, nit.  Reports are
CSV (RFC-4180-style quoting, header row, floats at 17 significant digits) or
JSON (array of objects, stable key order); progress and notes go to stderr so
the report stream stays machine-parsable.  Identical configurations produce
byte-identical reports for any worker count: grid points are computed
independently, merged in grid order, and every CLI summation path runs in
compensated mode.

Exit codes: 0 success, 2 usage/configuration error, 3 budget error, 4 I/O
error.  The ESLAB_CACHE environment variable sets the sieve cache directory.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import circle, diophantine, expsums, sieve, vinogradov
from .errors import BudgetError, ConfigError
from .phase import Angle, PolynomialPhase, monomial_to_shifted
from .sieve import Window

DEFAULT_SEED = expsums.DEFAULT_SEED
THETA_NOTE = "note: theta <= 2/3 is outside the proved range -- exploratory only"


@dataclass
class RunConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    out: str | None = None
    fmt: str = "csv"
    cache_dir: str | None = None
    workers: int = 1
    seed: int = DEFAULT_SEED


def _window_args(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument("--N", type=int, required=required, help="window start")
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--H", type=int, help="window length")
    g.add_argument("--theta", type=float, help="window length exponent: H = floor(N^theta)")


def _common_args(p: argparse.ArgumentParser, default_fmt: str = "csv"):
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=default_fmt)
    p.add_argument("--cache-dir", help="sieve cache directory (overrides ESLAB_CACHE)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="eslab",
        description="Exponential sums of arithmetic functions over short intervals. "
        "Window ends are capped at 2^63.",
    )
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("sieve", help="sieve a window and write the binary cache")
    _window_args(p)
    _common_args(p)

    p = sub.add_parser("expsum", help="one weighted exponential sum")
    _window_args(p)
    p.add_argument("--k", type=int, default=1, help="monomial degree for --alpha")
    p.add_argument("--alpha", help="monomial coefficient: 'a/q', decimal, or 32-hex")
    p.add_argument(
        "--coeff",
        action="append",
        default=[],
        metavar="J=ANGLE",
        help="explicit shifted-basis coefficient (repeatable)",
    )
    p.add_argument("--weight", choices=("lambda", "mu", "unit"), default="lambda")
    _common_args(p)

    p = sub.add_parser("scan", help="Farey-grid scan of Lambda/mu sums vs q-search")
    _window_args(p)
    p.add_argument("--kmax", type=int, default=1)
    p.add_argument("--farey", type=int, default=20, help="Farey order of the grid")
    p.add_argument(
        "--perturb",
        type=float,
        action="append",
        default=None,
        help="perturbation multipliers eps (angle += eps/H^j); repeatable",
    )
    p.add_argument("--qmax", type=int, default=10**4)
    p.add_argument("--arc-exponent", type=float, default=2.0,
                   help="arc cutoff Q = (log N)^A for classification")
    _common_args(p)

    p = sub.add_parser("hb-verify", help="Heath-Brown decomposition identity check")
    _window_args(p)
    p.add_argument("--target", choices=("lambda", "mu"), default="lambda")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", help="monomial coefficient (default: zero phase)")
    p.add_argument("--budget", type=int, default=80_000_000)
    _common_args(p)

    p = sub.add_parser("waring", help="short-interval Waring-Goldbach pipeline")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--qmax", type=int, default=10**4)
    p.add_argument("--limit", type=int, default=10)
    _common_args(p, default_fmt="json")

    p = sub.add_parser("vmvt", help="Vinogradov system counts")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--H", type=int, action="append", required=True)
    _common_args(p)

    p = sub.add_parser("nit", help="n^{it} model fit on a progression")
    _window_args(p)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--B", type=float, default=8.0)
    p.add_argument("--A", type=float, default=2.0)
    p.add_argument("--t0", type=float,
                   help="construct the degree-k model phase for this t and recover it")
    p.add_argument("--coeff", action="append", default=[], metavar="J=ANGLE")
    p.add_argument("--residue", type=int, default=1)
    _common_args(p, default_fmt="json")
    return ap


def parse_config(argv: list[str]) -> RunConfig:
    """argv (without the program name) -> RunConfig; exits 2 on usage errors."""
    ns = _build_parser().parse_args(argv)
    params = dict(vars(ns))
    for key in ("out", "fmt", "cache_dir", "workers", "seed", "subcommand"):
        params.pop(key, None)
    cfg = RunConfig(
        subcommand=ns.subcommand,
        params=params,
        out=getattr(ns, "out", None),
        fmt=getattr(ns, "fmt", "csv"),
        cache_dir=getattr(ns, "cache_dir", None),
        workers=getattr(ns, "workers", 1),
        seed=getattr(ns, "seed", DEFAULT_SEED),
    )
    theta = params.get("theta")
    if theta is not None:
        if not 0 < theta <= 1:
            raise ConfigError(f"--theta must lie in (0, 1], got {theta}")
        if theta <= 2 / 3:
            print(THETA_NOTE, file=sys.stderr)
    return cfg


def _resolve_window(params: dict) -> Window:
    N = params["N"]
    if params.get("H") is not None:
        return Window(N, params["H"])
    return Window.from_theta(N, params["theta"])


def _cache_dir(cfg: RunConfig) -> Path | None:
    d = cfg.cache_dir or os.environ.get("ESLAB_CACHE")
    return Path(d) if d else None


def _sieve_cached(window: Window, cfg: RunConfig) -> sieve.ArithmeticTable:
    d = _cache_dir(cfg)
    if d is None:
        return sieve.sieve_window(window, workers=cfg.workers)
    d.mkdir(parents=True, exist_ok=True)
    path = d / f"table_{window.start}_{window.length}.bin"
    if path.exists():
        table = sieve.load_table(path)
        if table.window == window:
            return table
    table = sieve.sieve_window(window, workers=cfg.workers)
    sieve.save_table(table, path)
    return table


def _phase_from_params(params: dict, base: int) -> PolynomialPhase:
    coeff_items = params.get("coeff") or []
    if coeff_items:
        k = max(int(item.split("=", 1)[0]) for item in coeff_items)
        raw = [Angle(0)] * k
        for item in coeff_items:
            j_str, val = item.split("=", 1)
            j = int(j_str)
            if not 1 <= j <= k:
                raise ConfigError(f"coefficient index {j} out of range")
            raw[j - 1] = Angle.parse(val)
        return PolynomialPhase(base, tuple(raw))
    k = params.get("k") or 1
    alpha = Angle.parse(params["alpha"]) if params.get("alpha") else Angle(0)
    return monomial_to_shifted(alpha, k, base) if alpha.raw else PolynomialPhase(
        base, tuple(Angle(0) for _ in range(k))
    )


# -- report emission ----------------------------------------------------------


def _fmt_value(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def emit_report(rows: list[dict], fmt: str, path: str | None, allow_empty: bool = False) -> int:
    """Write rows as CSV or JSON; returns bytes written."""
    if not rows and not allow_empty:
        raise ConfigError("report has no rows (pass allow_empty to permit)")
    if rows:
        arity = len(rows[0])
        if any(len(r) != arity for r in rows):
            raise ConfigError("report rows have inconsistent arity")
    if fmt == "csv":
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\r\n")
        if rows:
            writer.writerow(list(rows[0].keys()))
            for r in rows:
                writer.writerow([_fmt_value(v) for v in r.values()])
        data = buf.getvalue().encode()
    else:
        data = (json.dumps(rows, indent=1) + "\n").encode()
    if path is None:
        sys.stdout.write(data.decode())
        sys.stdout.flush()
    else:
        try:
            with open(path, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return len(data)


def _pool_map(fn, items, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- subcommand handlers -------------------------------------------------------


def farey_fractions(order: int) -> list[Fraction]:
    """All reduced fractions in [0, 1] with denominator <= order, ascending."""
    if order < 1:
        raise ConfigError("Farey order must be at least 1")
    out = [Fraction(0, 1)]
    a, b, c, d = 0, 1, 1, order
    while c <= order:
        step = (order + b) // d
        a, b, c, d = c, d, step * c - a, step * d - b
        out.append(Fraction(a, b))
    return out


def run_sieve(cfg: RunConfig) -> list[dict]:
    window = _resolve_window(cfg.params)
    table = _sieve_cached(window, cfg)
    d = _cache_dir(cfg)
    return [
        {
            "N": window.start,
            "H": window.length,
            "psi_delta": sieve.chebyshev_psi_delta(table),
            "squarefree": table.squarefree_count(),
            "primes": int(table.is_prime.sum()),
            "cache": str(d) if d else "",
        }
    ]


def run_expsum(cfg: RunConfig) -> list[dict]:
    window = _resolve_window(cfg.params)
    table = _sieve_cached(window, cfg)
    phase = _phase_from_params(cfg.params, window.start)
    weight = cfg.params.get("weight", "lambda")
    if weight == "lambda":
        res = expsums.lambda_exp_sum(table, phase, compensated=True)
    elif weight == "mu":
        res = expsums.mobius_exp_sum(table, phase, compensated=True)
    else:
        res = expsums.unit_exp_sum(table, phase, compensated=True)
    return [
        {
            "op": f"{weight}_exp_sum",
            "N": window.start,
            "H": window.length,
            "k": phase.degree,
            "coeff_hex": "|".join(c.to_hex() for c in phase.coeffs),
            "re": res.value.real,
            "im": res.value.imag,
            "normalized": res.normalized,
            "terms": res.terms,
        }
    ]


def _scan_points(kmax: int, order: int, perturbs: list[float], H: int):
    """Deterministic grid: per degree k, leading coefficient on Farey x eps/H^k."""
    points = []
    for k in range(1, kmax + 1):
        for frac in farey_fractions(order):
            for eps in perturbs:
                alpha = Fraction(frac) + Fraction(eps) / H**k
                desc = f"{frac.numerator}/{frac.denominator}+{eps:g}/H^{k}"
                points.append((k, alpha, eps, desc))
    return points


def run_scan(cfg: RunConfig) -> list[dict]:
    window = _resolve_window(cfg.params)
    N, H = window.start, window.length
    table = _sieve_cached(window, cfg)
    perturbs = cfg.params.get("perturb")
    if not perturbs:
        perturbs = [0.0, 0.1, 10.0]
    qmax = cfg.params["qmax"]
    if qmax < 1:
        raise ConfigError("--qmax must be at least 1")
    arcQ = math.log(N) ** cfg.params.get("arc_exponent", 2.0)
    points = _scan_points(cfg.params.get("kmax") or 1, cfg.params["farey"], perturbs, H)

    def work(point):
        k, alpha_frac, eps, desc = point
        lead = Angle.from_fraction(alpha_frac)
        coeffs = tuple(Angle(0) for _ in range(k - 1)) + (lead,)
        phase = PolynomialPhase(N, coeffs)
        lam, mob = expsums.phase_weighted_sums(table, phase, compensated=True)
        br = diophantine.best_rational(lead, qmax)
        sim = diophantine.simultaneous_q_search(phase, H, qmax)
        arc = diophantine.classify_arc(lead, k, N, H, arcQ)
        return {
            "k": k,
            "alpha": desc,
            "alpha_hex": lead.to_hex(),
            "normalized_lambda": lam.normalized,
            "normalized_mu": mob.normalized,
            "best_q": br.q,
            "best_err": br.err,
            "sim_q": sim.q,
            "sim_quality": sim.quality,
            "arc_kind": "major" if arc.major else "minor",
            "arc_a": arc.a,
            "arc_q": arc.q,
        }

    rows = _pool_map(work, points, cfg.workers)
    return rows


def run_hb_verify(cfg: RunConfig) -> list[dict]:
    window = _resolve_window(cfg.params)
    table = _sieve_cached(window, cfg)
    phase = _phase_from_params(cfg.params, window.start)
    target = cfg.params.get("target", "lambda")
    hb = expsums.heath_brown_decompose(
        table, phase, target, budget_leaves=cfg.params.get("budget", 80_000_000)
    )
    if target == "lambda":
        direct = expsums.lambda_exp_sum(table, phase, compensated=True).value
    else:
        direct = expsums.mobius_exp_sum(table, phase, compensated=True).value
    err = abs(hb.total - direct) / max(1e-300, abs(direct))
    return [
        {
            "target": target,
            "N": window.start,
            "H": window.length,
            "z": hb.z,
            "total_re": hb.total.real,
            "total_im": hb.total.imag,
            "direct_re": direct.real,
            "direct_im": direct.imag,
            "rel_err": err,
            "per_n_max_err": hb.per_n_max_err,
            "components": len(hb.components),
            "leaves": hb.leaves,
        }
    ]


def run_waring(cfg: RunConfig) -> list[dict]:
    p = cfg.params
    inst = circle.WaringInstance.create(p["k"], p["s"], p["N"], p["theta"])
    series = circle.singular_series(inst, p.get("qmax") or 10**4)
    integral = circle.singular_integral(inst)
    rho = circle.rho_exact(inst)
    reps = circle.find_representations(inst, limit=p.get("limit") or 10)
    return [
        {
            "k": inst.k,
            "s": inst.s,
            "N": inst.N,
            "theta": inst.theta,
            "X": inst.X,
            "H": inst.H,
            "feasible": inst.feasible,
            "rho": rho.value,
            "prime_solutions": rho.prime_solutions,
            "main_term": series.value * integral,
            "series": series.value,
            "series_tail": series.tail_estimate,
            "integral": integral,
            "congruence_ok": reps.diagnosis.ok,
            "reps": [list(t) for t in reps.tuples],
        }
    ]


def run_vmvt(cfg: RunConfig) -> list[dict]:
    t, k = cfg.params["t"], cfg.params["k"]
    rows = []
    for H in cfg.params["H"]:
        c = vinogradov.count_vinogradov_solutions(t, k, H)
        rows.append(
            {"t": t, "k": k, "H": H, "J": c.count, "normalized": c.normalized}
        )
    return rows


def taylor_model_phase(t0: float, k: int, base: int) -> PolynomialPhase:
    """Degree-k phase whose e(.) matches n^{it0} around the base point."""
    coeffs = []
    for j in range(1, k + 1):
        beta = Fraction(t0) * (-1) ** (j - 1) / (2 * math.pi * j * base**j)
        coeffs.append(Angle.from_fraction(beta - math.floor(beta)))
    return PolynomialPhase(base, tuple(coeffs))


def run_nit(cfg: RunConfig) -> list[dict]:
    p = cfg.params
    window = _resolve_window(p)
    N = window.start
    if p.get("t0") is not None:
        phase = taylor_model_phase(p["t0"], p.get("k") or 3, N)
    elif p.get("coeff"):
        phase = _phase_from_params(p, N)
    else:
        raise ConfigError("nit needs --t0 or --coeff")
    model = diophantine.nit_approximation(
        phase,
        window,
        p.get("q") or 1,
        p.get("B", 8.0),
        A=p.get("A", 2.0),
        residue=p.get("residue", 1),
    )
    return [
        {
            "N": N,
            "H": window.length,
            "k": phase.degree,
            "q": p.get("q") or 1,
            "B": p.get("B", 8.0),
            "t0": p.get("t0"),
            "t": model.t,
            "max_dev": model.max_dev,
            "target_scale": model.target_scale,
            "structure_quality": model.structure_quality,
            "eta_re": model.eta.real,
            "eta_im": model.eta.imag,
            "progression_start": model.progression_start,
            "progression_step": model.progression_step,
            "progression_count": model.progression_count,
        }
    ]


_HANDLERS = {
    "sieve": run_sieve,
    "expsum": run_expsum,
    "scan": run_scan,
    "hb-verify": run_hb_verify,
    "waring": run_waring,
    "vmvt": run_vmvt,
    "nit": run_nit,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        rows = _HANDLERS[cfg.subcommand](cfg)
        emit_report(rows, cfg.fmt, cfg.out, allow_empty=True)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
