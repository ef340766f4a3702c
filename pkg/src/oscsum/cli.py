"""Command-line front end.

    oscsum <eval|compare|sweep|bounds|figure> [options]

JSON goes out as one top-level object, CSV with a header line.  Exit codes:
0 success, 2 validation error, 3 numeric failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Sequence

import numpy as np

from . import asymptotics, bounds, oracle, poisson
from .model import DoubleSumParams, ParameterError, SumParams, validate, window
from .quadrature import QuadratureError

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

COMMANDS = ("eval", "compare", "sweep", "bounds", "figure")
METHODS = ("closed", "windowed", "full", "stage", "ztilde", "zs", "zdouble", "zf")
SWEEP_METHODS = METHODS + ("compare",)

DEFAULTS: dict[str, Any] = {
    "method": "closed", "A": 0.0, "B": 0.0, "N": 1e4, "s": 1,
    "a1": 0.0, "a2": 0.0, "b1": 0.0, "b2": 0.0, "b3": 0.0,
    "q": 0.0, "profile": None, "widen": 1.0, "axis": None, "values": None,
    "figure": None, "format": None, "out": None, "a": None, "a_grid": None,
}


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return format(x, ".17g")


def parse_values(text: str) -> list[float]:
    """``v1,v2,...`` or an inclusive range ``start:stop:step``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(v) for v in parts)
        if not step > 0 or stop < start:
            raise UsageError(f"bad range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise UsageError("empty value list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oscsum", description="Oscillating Poisson sums: oracles and closed forms.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--method", choices=SWEEP_METHODS)
    for name in ("A", "B", "N", "a1", "a2", "b1", "b2", "b3", "q", "widen", "a"):
        ap.add_argument(f"--{name}", type=float)
    ap.add_argument("--s", type=int, choices=(1, 2))
    ap.add_argument("--profile")
    ap.add_argument("--axis")
    ap.add_argument("--values")
    ap.add_argument("--a-grid", dest="a_grid")
    ap.add_argument("--figure", type=int, choices=(1, 2, 3))
    ap.add_argument("--format", choices=("json", "csv"))
    ap.add_argument("--out")
    ap.add_argument("--config")
    return ap


def resolve(ns: argparse.Namespace) -> dict[str, Any]:
    """Merge flags over the optional JSON config over defaults."""
    spec = dict(DEFAULTS)
    spec["_n_given"] = ns.N is not None
    if ns.config:
        try:
            with open(ns.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config: {exc}") from exc
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        spec.update(cfg)
        spec["_n_given"] = spec["_n_given"] or "N" in cfg
    for key, val in vars(ns).items():
        if key in ("command", "config"):
            continue
        if val is not None:
            spec[key] = val
    spec["command"] = ns.command
    return spec


# --- evaluation helpers ---------------------------------------------------

def _sum_params(spec) -> SumParams:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return validate(spec["A"], spec["B"], spec["N"])


def _double_params(spec) -> DoubleSumParams:
    return DoubleSumParams(*(float(spec[k]) for k in ("a1", "a2", "b1", "b2", "b3", "N")))


def _oracle_cfg(spec) -> oracle.OracleConfig:
    return oracle.OracleConfig(widen=float(spec["widen"]))


def _profile(spec) -> asymptotics.FourierProfile:
    if not spec["profile"]:
        raise UsageError("method zf needs --profile")
    try:
        return asymptotics.FourierProfile.from_json(spec["profile"])
    except OSError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad profile: {exc}") from exc


def evaluate(spec) -> dict[str, Any]:
    method = spec["method"]
    cfg = _oracle_cfg(spec)
    if method == "closed":
        ev = asymptotics.z_closed(_sum_params(spec))
    elif method == "windowed":
        ev = oracle.sum_z_windowed(_sum_params(spec), cfg)
    elif method == "full":
        ev = oracle.sum_z_full(_sum_params(spec), cfg)
    elif method == "stage":
        return asymptotics.stage_pipeline(_sum_params(spec), cfg).to_dict()
    elif method == "ztilde":
        ev = asymptotics.ztilde_closed(_sum_params(spec))
    elif method == "zs":
        ev = asymptotics.zs_closed(_sum_params(spec), int(spec["s"]))
    elif method == "zdouble":
        ev = asymptotics.zdouble_closed(_double_params(spec))
    elif method == "zf":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ev = asymptotics.zf_quadrature(_profile(spec), float(spec["q"]), float(spec["N"]))
    else:
        raise UsageError(f"method {method!r} not valid here")
    return ev.to_dict()


def _pair(spec):
    """(closed form, oracle, N, SumParams or None) for the chosen family."""
    method = spec["method"]
    cfg = _oracle_cfg(spec)
    if method in ("closed", "full", "windowed", "stage"):
        p = _sum_params(spec)
        if method == "windowed" or not p.full_sum_eligible:
            ref = oracle.sum_z_windowed(p, cfg)
        else:
            ref = oracle.sum_z_full(p, cfg)
        return asymptotics.z_closed(p, with_bound=False), ref, p.N, p
    if method == "ztilde":
        p = _sum_params(spec)
        ref = oracle.sum_ztilde(p, cfg, full=p.full_sum_eligible)
        return asymptotics.ztilde_closed(p), ref, p.N, p
    if method == "zs":
        p = _sum_params(spec)
        s = int(spec["s"])
        ref = oracle.sum_zs(p, s, cfg, full=p.full_sum_eligible)
        return asymptotics.zs_closed(p, s), ref, p.N, p
    if method == "zdouble":
        d = _double_params(spec)
        return asymptotics.zdouble_closed(d), oracle.sum_zdouble(d, cfg), d.N, None
    if method == "zf":
        prof = _profile(spec)
        q, N = float(spec["q"]), float(spec["N"])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            closed = asymptotics.zf_quadrature(prof, q, N)
        return closed, oracle.sum_zf(prof, q, N, cfg), N, None
    raise UsageError(f"method {method!r} not valid for compare")


def compare(spec) -> dict[str, Any]:
    closed, ref, N, p = _pair(spec)
    diff = abs(closed.value - ref.value)
    out = {
        "method": spec["method"],
        "closed": closed.to_dict(),
        "oracle": ref.to_dict(),
        "abs_diff": diff,
        "diff_times_N": diff * N,
    }
    z_family = spec["method"] in ("closed", "full", "windowed", "stage")
    out["error_budget"] = bounds.error_budget(p) if z_family else None
    return out


def _sweep_row(spec, axis: str, v: float) -> list[float]:
    row_spec = dict(spec)
    row_spec[axis] = v
    if spec["method"] == "compare":
        row_spec["method"] = "closed"
        res = compare(row_spec)
        c, o = res["closed"]["value"], res["oracle"]["value"]
        budget = res["error_budget"]
        return [v, c["re"], c["im"], c["abs"], c["arg"], o["re"], o["im"],
                res["abs_diff"], res["diff_times_N"], budget if budget is not None else math.nan]
    res = evaluate(row_spec)
    if "value" not in res:
        raise UsageError("method stage cannot be swept")
    val = res["value"]
    return [v, val["re"], val["im"], val["abs"], val["arg"], res.get("error_bound", math.nan)]


def sweep(spec) -> tuple[list[str], list[list[float]]]:
    axis = spec["axis"]
    if not axis:
        raise UsageError("sweep needs --axis")
    if axis not in ("A", "B", "N", "q", "a1", "a2", "b1", "b2", "b3"):
        raise UsageError(f"cannot sweep {axis!r}")
    if not spec["values"]:
        raise UsageError("sweep needs --values")
    values = spec["values"] if isinstance(spec["values"], list) else parse_values(spec["values"])
    if spec["method"] == "compare":
        header = [axis, "re", "im", "abs", "arg", "oracle_re", "oracle_im", "abs_diff", "diff_times_N", "error_budget"]
    else:
        header = [axis, "re", "im", "abs", "arg", "error_bound"]
    threads = int(os.environ.get("THREADS", "1") or 1)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(lambda v: _sweep_row(spec, axis, float(v)), values))
    else:
        rows = [_sweep_row(spec, axis, float(v)) for v in values]
    return header, rows


def bounds_report(spec) -> dict[str, Any]:
    out: dict[str, Any] = {}
    a_values: list[float] = []
    if spec["a"] is not None:
        a_values.append(float(spec["a"]))
    if spec["a_grid"]:
        a_values.extend(parse_values(spec["a_grid"]))
    if a_values:
        rows = []
        for a in a_values:
            br = bounds.komatsu_tail(a)
            truth = bounds.gaussian_tail(a)
            rows.append({
                "a": a, "lower": br.lower, "upper": br.upper, "truth": truth,
                "contained": br.contains(truth),
                "moment_upper_k1": bounds.komatsu_moment_upper(a, 1),
                "moment_upper_k2": bounds.komatsu_moment_upper(a, 2),
            })
        out["komatsu"] = rows
        out["all_contained"] = all(r["contained"] for r in rows)
    if not a_values or spec.get("_n_given"):
        N = float(spec["N"])
        tb = bounds.tail_weight_bound(N)
        out["N"] = N
        out["tail_weight_bound"] = tb
        a = math.sqrt(2.0 * math.log(N))
        br = bounds.komatsu_tail(a)
        out["komatsu_at_window_edge"] = {"a": a, "lower": br.lower, "upper": br.upper}
        if N <= oracle.ORACLE_N_LIMIT:
            exact = oracle.tail_weight_exact(N, _oracle_cfg(spec))
            out["tail_weight_exact"] = exact
            out["exact_below_bound"] = exact <= tb
    return out


def figure(spec) -> tuple[list[str], list[list[float]]]:
    fig = spec["figure"]
    n_override = float(spec["N"]) if spec.get("_n_given") else None
    if fig is None:
        raise UsageError("figure needs --figure 1|2|3")
    if fig == 1:
        N = float(n_override or 1e4)
        w, _ = window(N)
        n = w.indices().astype(float)
        x = (n - N) / math.sqrt(N)
        p = np.exp(poisson.log_poisson(n, N))
        g = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi * N)
        corr = poisson.corrected_gaussian_density(x, N)
        return ["n", "poisson", "gaussian", "corrected_diff_x1e5"], \
            [[a, b, c, d] for a, b, c, d in zip(n, p, g, (p - corr) * 1e5)]
    if fig == 2:
        N = float(n_override or 1e4)
        w, _ = window(N)
        n = w.indices().astype(float)
        _, d1, d2 = poisson.pmf_derivatives(n, N)
        return ["n", "d1", "d2_x100"], [[a, b, c] for a, b, c in zip(n, d1, 100.0 * d2)]
    N = float(n_override or 1e3)
    grid = [round(0.1 * i, 10) for i in range(31)]
    rows = []
    for A in grid:
        for B in grid:
            p = SumParams(A, B, N)
            e = abs(asymptotics.z_closed(p, with_bound=False).value - oracle.sum_z_full(p).value)
            rows.append([A, B, e])
    return ["A", "B", "abs_error"], rows


# --- output ---------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def render_json(doc: dict) -> str:
    return json.dumps(_clean(doc), allow_nan=False) + "\n"


def render_csv(header: Sequence[str], rows: Sequence[Sequence[float]]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([fmt(float(v)) if isinstance(v, (float, int, np.floating, np.integer)) else v for v in row])
    return buf.getvalue()


def _flatten(doc: dict, prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        elif not isinstance(v, list):
            flat[key] = v
    return flat


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION

    def fail(code: int, kind: str, exc: BaseException) -> int:
        stderr.write(json.dumps({"error": kind, "message": str(exc)}) + "\n")
        return code

    try:
        spec = resolve(ns)
        cmd = spec["command"]
        if cmd != "sweep" and spec["method"] == "compare":
            raise UsageError("method compare is only valid for sweep")
        t0 = time.perf_counter()
        if cmd in ("sweep", "figure"):
            header, rows = sweep(spec) if cmd == "sweep" else figure(spec)
            if spec["format"] == "json":
                text = render_json({"columns": list(header), "rows": rows})
            else:
                text = render_csv(header, rows)
        else:
            doc = {"eval": evaluate, "compare": compare, "bounds": bounds_report}[cmd](spec)
            if cmd == "eval":
                doc["wall_time_ms"] = (time.perf_counter() - t0) * 1e3
            if spec["format"] == "csv":
                flat = _flatten(doc)
                text = render_csv(list(flat), [list(flat.values())])
            else:
                text = render_json(doc)
    except (UsageError, ParameterError, ValueError, TypeError) as exc:
        return fail(EXIT_VALIDATION, "validation", exc)
    except (FloatingPointError, QuadratureError, OverflowError, ZeroDivisionError) as exc:
        return fail(EXIT_NUMERIC, "numeric", exc)
    except OSError as exc:
        return fail(EXIT_IO, "io", exc)

    try:
        if spec["out"]:
            with open(spec["out"], "w", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
    except OSError as exc:
        return fail(EXIT_IO, "io", exc)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
