"""Command-line front end.

    ghostode <command> -c config.toml [--order n|lo..hi] [--distance d1|d2]
                                      [--out dir] [--threads k]

Commands: expand, minimize, sequence, ghost, refine, march, critical.
Exit status is 0 on success, 1 for configuration errors and 2 for numerical
failures.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from . import __version__
from .analysis import ghost_expansion, linear_correction
from .exceptions import CorrectionFailedError, GhostODEError
from .linsolve import BoundaryCondition
from .march import MarchConfig, march
from .metrics import d1, residual
from .optimize import (
    ParamSpec,
    SearchRange,
    critical_parameter,
    fit_asymptotics,
    scan_orders,
    track_sequences,
)
from .problems import CATALOG, get_problem
from .recurrence import ODEProblem, expand, partial_sum, partial_sum_derivs
from .validation import check_distance, check_interval, parse_orders

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

COMMANDS = ("expand", "minimize", "sequence", "ghost", "refine", "march", "critical")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: ODEProblem
    spec: ParamSpec
    orders: list[int]
    distance: str = "d1"
    out: Path = Path("out")
    samples: int = 201
    threads: int = 1
    raw: dict = field(default_factory=dict)
    source: bytes = b""


# -- config ---------------------------------------------------------------------

def _search_range(name, v) -> SearchRange:
    if isinstance(v, dict):
        unknown = set(v) - {"lo", "hi", "num", "scale"}
        if unknown:
            raise ConfigError(f"search.{name}: unknown key(s) {sorted(unknown)}")
        return SearchRange(float(v["lo"]), float(v["hi"]), int(v.get("num", 400)), v.get("scale", "log"))
    if isinstance(v, list) and len(v) in (2, 3, 4):
        return SearchRange(*v)
    raise ConfigError(f"search.{name} must be a number or a table {{lo, hi, num, scale}}")


def _build_problem(sec: dict) -> ODEProblem:
    has_name = "name" in sec
    has_inline = "g" in sec or "h" in sec
    if has_name == has_inline:
        raise ConfigError("[problem] needs exactly one of 'name' or inline 'g'/'h'")
    params = dict(sec.get("param", {}))
    if has_name:
        if sec["name"] not in CATALOG:
            raise ConfigError(f"unknown catalog problem {sec['name']!r}; choose from {sorted(CATALOG)}")
        problem = get_problem(sec["name"], **params)
        if any(k in sec for k in ("kind", "interval", "values")):
            kind = sec.get("kind", problem.kind)
            a, b = check_interval(sec.get("interval", problem.interval))
            vl, vr = sec.get("values", (problem.bc.value_left, problem.bc.value_right))
            problem = problem.with_bc(BoundaryCondition(kind, a, b, float(vl), float(vr)))
        return problem
    for k in ("g", "h", "kind", "interval", "values"):
        if k not in sec:
            raise ConfigError(f"inline problem needs '{k}'")
    a, b = check_interval(sec["interval"])
    vl, vr = sec["values"]
    bc = BoundaryCondition(sec["kind"], a, b, float(vl), float(vr))
    return ODEProblem(sec["g"], sec["h"], bc, params, None, sec.get("label", "inline"))


def _build_spec(sec: dict, problem: ODEProblem) -> ParamSpec:
    values, search = {}, {}
    for name in ("p0", "p1", "p2", "p3", "epsilon"):
        if name not in sec:
            continue
        v = sec[name]
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            values[name] = float(v)
        else:
            search[name] = _search_range(name, v)
    if not search and sec.get("default", True) and "p0" not in values:
        a, b = problem.interval
        return ParamSpec.default(T=b - a, strong=bool(sec.get("strong", False)), **values)
    return ParamSpec(values, search)


def load_config(path: str, order=None, distance=None, out=None, threads=None) -> RunConfig:
    try:
        source = Path(path).read_bytes()
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from None
    try:
        raw = tomllib.loads(source.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as err:
        raise ConfigError(f"config is not valid TOML: {err}") from None
    unknown = set(raw) - {"problem", "search", "output", "march", "critical", "ghost", "refine"}
    if unknown:
        raise ConfigError(f"unknown section(s) {sorted(unknown)}")
    try:
        problem = _build_problem(raw.get("problem", {}))
        search = raw.get("search", {})
        spec = _build_spec(search, problem)
        orders = parse_orders(order if order is not None else search.get("order", 10))
        kind = check_distance(distance if distance is not None else search.get("distance", "d1"))
        outsec = raw.get("output", {})
        outdir = Path(out if out is not None else outsec.get("dir", "out"))
        samples = int(outsec.get("samples", 201))
        nthreads = int(threads if threads is not None else search.get("threads", 1))
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, GhostODEError) as err:
        raise ConfigError(str(err)) from None
    if samples < 2:
        raise ConfigError("output.samples must be at least 2")
    return RunConfig(problem, spec, orders, kind, outdir, samples, max(1, nthreads), raw, source)


# -- output ---------------------------------------------------------------------

def fmt(v: float) -> str:
    return "%.17g" % v


def _clean(obj: Any) -> Any:
    """JSON-ready copy with numpy scalars and arrays converted."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, obj: Any) -> None:
    write_atomic(path, json.dumps(_clean(obj), indent=1, sort_keys=False) + "\n")


def write_csv(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    write_atomic(path, buf.getvalue())


def _samples(problem: ODEProblem, y, n: int) -> list[list[float]]:
    a, b = problem.interval
    x = np.linspace(a, b, n)
    r = residual(problem, y)
    dy = y.derivative()
    return [[float(xi), float(v), float(dv), float(rv)] for xi, v, dv, rv in zip(x, y(x), dy(x), r(x))]


SAMPLE_HEADER = ["x", "y", "dy", "residual"]


def _minima_rows(records, names):
    rows = []
    for n in sorted(records):
        for r in records[n]:
            rows.append([n] + [float(r.point[k]) for k in names] + [r.kind, float(r.d_star), float(r.basin_width)])
    return rows


def _sequence_json(seqs, names):
    out = []
    for s in seqs:
        fit = None
        if s.fit is not None:
            f = s.fit
            first = names[0]
            fit = {
                "a": f.a[first],
                "a_err": f.a_err[first],
                "a_by_param": dict(f.a),
                "b": f.b,
                "b_err": f.b_err,
                "delta": f.delta,
                "orders": list(f.orders),
                "reduced": f.reduced,
            }
        out.append(
            {
                "id": list(s.id),
                "period": s.period,
                "members": [{"n": m.n, "p": {k: m.point[k] for k in names}, "d_star": m.d_star} for m in s.members],
                "fit": fit,
            }
        )
    return out


def _fitted(seqs):
    out = []
    for s in seqs:
        try:
            out.append(fit_asymptotics(s))
        except ValueError:
            out.append(s)
    return out


# -- commands -------------------------------------------------------------------

def cmd_expand(cfg: RunConfig) -> list[str]:
    p = cfg.spec.params()
    n = max(cfg.orders)
    e = expand(cfg.problem, p, n)
    rows = []
    for k in cfg.orders:
        y, dy, d2y = partial_sum_derivs(e, k)
        rows.append([k, float(d1(cfg.problem, y, dy, d2y))])
    write_csv(cfg.out / "distances.csv", ["n", "d1"], rows)
    write_json(
        cfg.out / "expansion.json",
        {"params": dict(zip(("p0", "p1", "p2", "p3", "epsilon"), p.as_tuple())), "coeffs": [c.to_json() for c in e.y]},
    )
    write_csv(cfg.out / "samples.csv", SAMPLE_HEADER, _samples(cfg.problem, partial_sum(e, n), cfg.samples))
    return ["distances.csv", "expansion.json", "samples.csv"]


def cmd_minimize(cfg: RunConfig) -> list[str]:
    recs = scan_orders(cfg.problem, cfg.orders, cfg.spec, cfg.distance, cfg.threads)
    names = list(cfg.spec.searched)
    write_csv(cfg.out / "minima.csv", ["n"] + names + ["distance_kind", "d_star", "basin_width"], _minima_rows(recs, names))
    return ["minima.csv"]


def _sequences(cfg):
    recs = scan_orders(cfg.problem, cfg.orders, cfg.spec, cfg.distance, cfg.threads)
    return recs, _fitted(track_sequences(recs))


def cmd_sequence(cfg: RunConfig) -> list[str]:
    recs, seqs = _sequences(cfg)
    names = list(cfg.spec.searched)
    write_csv(cfg.out / "minima.csv", ["n"] + names + ["distance_kind", "d_star", "basin_width"], _minima_rows(recs, names))
    write_json(cfg.out / "sequences.json", _sequence_json(seqs, names))
    return ["minima.csv", "sequences.json"]


def cmd_ghost(cfg: RunConfig) -> list[str]:
    _, seqs = _sequences(cfg)
    want = cfg.raw.get("ghost", {}).get("sequence")
    if want is not None:
        match = [s for s in seqs if list(s.id) == list(want)]
        if not match:
            raise GhostODEError(f"no sequence with id {want}")
        seq = match[0]
    else:
        seq = max(seqs, key=lambda s: len(s.members))
    members = [partial_sum(expand(cfg.problem, m.params, m.n), m.n) for m in seq.members]
    write_json(cfg.out / "ghost.json", ghost_expansion(seq, members).to_json())
    return ["ghost.json"]


def cmd_refine(cfg: RunConfig) -> list[str]:
    sec = cfg.raw.get("refine", {})
    steps = int(sec.get("steps", 2))
    n = max(cfg.orders)
    recs = scan_orders(cfg.problem, [n], cfg.spec, cfg.distance, cfg.threads)[n]
    if not recs:
        raise GhostODEError(f"no local minimum at order {n}")
    idx = sec.get("minimum")
    rec = min(recs, key=lambda r: r.d_star) if idx is None else recs[int(idx)]
    y = partial_sum(expand(cfg.problem, rec.params, n), n)
    history = [{"step": 0, "d1": d1(cfg.problem, y)}]
    status = "ok"
    for k in range(1, steps + 1):
        try:
            y = y + linear_correction(cfg.problem, y)
        except CorrectionFailedError as err:
            status = f"stopped: {err}"
            break
        history.append({"step": k, "d1": d1(cfg.problem, y)})
    write_json(cfg.out / "refine.json", {"n": n, "point": rec.point, "history": history, "status": status})
    write_csv(cfg.out / "samples.csv", SAMPLE_HEADER, _samples(cfg.problem, y, cfg.samples))
    return ["refine.json", "samples.csv"]


def cmd_march(cfg: RunConfig) -> list[str]:
    sec = dict(cfg.raw.get("march", {}))
    try:
        mc = MarchConfig(
            order=int(sec.get("order", max(cfg.orders))),
            d_max=float(sec["d_max"]),
            T0=float(sec["T0"]),
            horizon=float(sec["horizon"]),
            shrink=float(sec.get("shrink", 0.75)),
            grow=float(sec.get("grow", 9 / 8)),
            max_pieces=int(sec.get("max_pieces", 1000)),
        )
    except (KeyError, ValueError, TypeError) as err:
        raise ConfigError(f"[march]: {err}") from None
    spec = cfg.spec
    if "p0" in spec.search and not cfg.raw.get("search", {}).get("p0"):
        spec = ParamSpec.default(T=mc.T0, **{k: v for k, v in spec.values.items() if k not in spec.search})
    sol = march(cfg.problem, mc, spec)
    write_json(cfg.out / "piecewise.json", sol.to_json())
    rows = sol.sample(cfg.problem, cfg.samples).tolist()
    write_csv(cfg.out / "samples.csv", SAMPLE_HEADER, rows)
    return ["piecewise.json", "samples.csv"]


def cmd_critical(cfg: RunConfig) -> list[str]:
    sec = cfg.raw.get("critical", {})
    name = cfg.raw.get("problem", {}).get("name")
    if name is None or "param" not in sec or "values" not in sec:
        raise ConfigError("[critical] needs a catalog problem plus 'param' and 'values'")
    base = dict(cfg.raw.get("problem", {}).get("param", {}))
    pname = sec["param"]

    def family(v):
        return get_problem(name, **{**base, pname: v})

    est = critical_parameter(family, [float(v) for v in sec["values"]], cfg.spec, cfg.orders, cfg.distance, n_jobs=cfg.threads)
    write_json(
        cfg.out / "critical.json",
        {"param": pname, "value": est.value, "bound": est.bound, "xis": est.xis, "slopes": est.slopes, "cubic": est.coeffs},
    )
    return ["critical.json"]


HANDLERS = {
    "expand": cmd_expand,
    "minimize": cmd_minimize,
    "sequence": cmd_sequence,
    "ghost": cmd_ghost,
    "refine": cmd_refine,
    "march": cmd_march,
    "critical": cmd_critical,
}


def run(command: str, cfg: RunConfig) -> list[str]:
    """Execute one command; returns the artifact names written."""
    t0 = time.perf_counter()
    with np.errstate(over="ignore", invalid="ignore"):
        artifacts = HANDLERS[command](cfg)
    manifest = {
        "command": command,
        "config_sha256": hashlib.sha256(cfg.source).hexdigest(),
        "orders": cfg.orders,
        "distance": cfg.distance,
        "artifacts": artifacts,
        "versions": {
            "ghostode": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": time.perf_counter() - t0,
    }
    write_json(cfg.out / "manifest.json", manifest)
    return artifacts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghostode", description="Ghost perturbation scheme for second-order ODEs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("-c", "--config", required=True, help="TOML configuration file")
        p.add_argument("--order", help="order n or range lo..hi")
        p.add_argument("--distance", choices=("d1", "d2"))
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="worker threads for grid scans")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        cfg = load_config(args.config, args.order, args.distance, args.out, args.threads)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    try:
        artifacts = run(args.command, cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except (GhostODEError, FloatingPointError, OverflowError, ZeroDivisionError) as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 2
    for a in artifacts:
        print(cfg.out / a)
    return 0


if __name__ == "__main__":
    sys.exit(main())
