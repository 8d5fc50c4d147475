"""Distance minimization over the linear-operator parameters.

A scan evaluates ``log10 d`` on a 1-D or 2-D grid of the searched
parameters, keeps the strict interior local minima and polishes each one by
golden-section line searches with coordinate cycling.  Minima found at
successive orders are then linked into sequences whose asymptotics are
fitted by linear least squares.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import ndimage

from .exceptions import INFEASIBLE, EmptyGridError
from .linsolve import LinearParams
from .metrics import d1, d2
from .recurrence import Expansion, ODEProblem, partial_sum_derivs

PARAM_NAMES = ("p0", "p1", "p2", "p3", "epsilon")
POLISH_RTOL = 1e-8
EDGE_RTOL = 1e-4
EXACT_TOL = 1e-14
INVPHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class SearchRange:
    """Grid for one searched parameter."""

    lo: float
    hi: float
    num: int = 400
    scale: str = "log"

    def __post_init__(self):
        if self.scale not in ("log", "linear"):
            raise ValueError(f"scale must be 'log' or 'linear', got {self.scale!r}")
        if not self.lo < self.hi:
            raise ValueError("search range needs lo < hi")
        if self.scale == "log" and self.lo <= 0:
            raise ValueError("log-scale search range needs lo > 0")
        if self.num < 3:
            raise ValueError("a search grid needs at least 3 points")

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.num)
        return np.linspace(self.lo, self.hi, self.num)

    def neighbors(self, x: float) -> tuple[float, float]:
        """Interval one grid step either side of ``x``, clipped to the range."""
        if self.scale == "log":
            r = (self.hi / self.lo) ** (1.0 / (self.num - 1))
            return max(self.lo, x / r), min(self.hi, x * r)
        h = (self.hi - self.lo) / (self.num - 1)
        return max(self.lo, x - h), min(self.hi, x + h)


@dataclass(frozen=True)
class ParamSpec:
    """Fixed values for every parameter plus the subset that is searched.

    ``epsilon`` fixed at 1 is the restricted setting; searching it is the
    strong one.
    """

    values: Mapping[str, float] = field(default_factory=lambda: {"p0": 1.0, "p1": 0.0, "p2": 0.0, "p3": 0.0, "epsilon": 1.0})
    search: Mapping[str, SearchRange] = field(default_factory=dict)

    def __post_init__(self):
        vals = {"p0": 1.0, "p1": 0.0, "p2": 0.0, "p3": 0.0, "epsilon": 1.0}
        vals.update(self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "search", dict(self.search))
        bad = (set(vals) | set(self.search)) - set(PARAM_NAMES)
        if bad:
            raise ValueError(f"unknown parameter(s) {sorted(bad)}")
        p0 = self.search.get("p0")
        if p0 is not None and p0.lo <= 0 <= p0.hi:
            raise ValueError("p0 search range must exclude 0")
        if "p0" not in self.search and vals["p0"] == 0:
            raise ValueError("p0 must be nonzero")

    @classmethod
    def default(cls, T: float = 1.0, strong: bool = False, num: int = 400, **fixed) -> "ParamSpec":
        """p0 on 400 log points in [1e-3, 10] T; epsilon on 40 points in [0.1, 2] if strong."""
        search = {"p0": SearchRange(1e-3 * T, 10.0 * T, num, "log")}
        if strong:
            search["epsilon"] = SearchRange(0.1, 2.0, 40, "linear")
        return cls(values=fixed, search=search)

    @property
    def searched(self) -> tuple[str, ...]:
        return tuple(self.search)

    def params(self, point: Mapping[str, float] | None = None) -> LinearParams:
        v = dict(self.values)
        if point:
            v.update(point)
        return LinearParams(v["p0"], v["p1"], v["p2"], v["p3"], v["epsilon"])

    def with_search(self, **ranges: SearchRange) -> "ParamSpec":
        s = dict(self.search)
        s.update(ranges)
        return ParamSpec(self.values, s)

    def with_values(self, **values: float) -> "ParamSpec":
        v = dict(self.values)
        v.update(values)
        return ParamSpec(v, self.search)


@dataclass(frozen=True)
class MinimaRecord:
    """One polished local minimum of the distance at order ``n``."""

    n: int
    point: Mapping[str, float]
    params: LinearParams
    d_star: float
    kind: str
    basin_width: float
    grid_d: float
    exact: bool = False


@dataclass(frozen=True)
class AsymptoticFit:
    """Least-squares asymptotics of one sequence.

    ``a[name]`` holds the coefficients of ``name*(n)`` in ``1, 1/n, 1/n^2, ..``
    and ``b`` those of ``log10 d*(n)`` in ``n, 1, 1/n, ..``.
    """

    a: Mapping[str, np.ndarray]
    a_err: Mapping[str, np.ndarray]
    b: np.ndarray
    b_err: np.ndarray
    delta: float
    orders: tuple[int, ...]
    reduced: bool = False
    scatter: float = 0.0


@dataclass(frozen=True)
class SequenceRecord:
    """Minima linked across orders: the ``l``-th one in residue class ``k``."""

    id: tuple[int, int]
    period: int
    members: tuple[MinimaRecord, ...]
    fit: AsymptoticFit | None = None

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(m.n for m in self.members)

    @property
    def delta(self) -> float | None:
        return None if self.fit is None else self.fit.delta

    def member(self, n: int) -> MinimaRecord:
        for m in self.members:
            if m.n == n:
                return m
        raise KeyError(n)


# -- distance evaluation --------------------------------------------------------

def _distance(problem, e, n, eps, kind):
    y, dy, d2y = partial_sum_derivs(e, n, eps)
    if kind == "d1":
        return d1(problem, y, dy, d2y)
    if kind == "d2":
        return d2(problem, y, dy)[0]
    raise ValueError(f"distance kind must be 'd1' or 'd2', got {kind!r}")


def _log10(d):
    if not np.isfinite(d):
        return np.inf
    return math.log10(max(d, 1e-300))


def _column(problem, p, orders, eps_list, kind):
    """``log10 d`` for one expansion, every order and every epsilon."""
    out = np.full((len(eps_list), len(orders)), np.inf)
    try:
        e = Expansion(problem, p)
    except INFEASIBLE:
        return out
    with np.errstate(over="ignore", invalid="ignore"):
        _fill(problem, e, orders, eps_list, kind, out)
    return out


def _fill(problem, e, orders, eps_list, kind, out):
    for j, n in enumerate(orders):
        try:
            e.extend(n)
        except INFEASIBLE:
            break
        for i, eps in enumerate(eps_list):
            try:
                out[i, j] = _log10(_distance(problem, e, n, eps, kind))
            except INFEASIBLE:
                pass


def distance(problem: ODEProblem, p: LinearParams, n: int, kind: str = "d1") -> float:
    """Distance of the order-``n`` partial sum at ``p``; ``inf`` if infeasible."""
    v = _column(problem, p, [n], [p.epsilon], kind)[0, 0]
    return 10.0**v if np.isfinite(v) else np.inf


def _grid_values(problem, orders, spec, kind, n_jobs):
    names = spec.searched
    if not 1 <= len(names) <= 2:
        raise ValueError("grid scans search one or two parameters")
    axes = [spec.search[k].grid() for k in names]
    shape = tuple(len(a) for a in axes)
    # epsilon enters only the partial sums: one expansion serves a whole column
    eps_axis = names.index("epsilon") if "epsilon" in names else None
    other = [i for i in range(len(names)) if i != eps_axis]
    eps_list = axes[eps_axis] if eps_axis is not None else [spec.values["epsilon"]]
    jobs = list(np.ndindex(*[shape[i] for i in other]))

    def run(idx):
        point = {names[i]: float(axes[i][j]) for i, j in zip(other, idx)}
        return _column(problem, spec.params(point), orders, eps_list, kind)

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            cols = list(pool.map(run, jobs))
    else:
        cols = [run(j) for j in jobs]
    vals = np.full((len(orders),) + shape, np.inf)
    for idx, col in zip(jobs, cols):
        for ie in range(len(eps_list)):
            full = [0] * len(names)
            for i, j in zip(other, idx):
                full[i] = j
            if eps_axis is not None:
                full[eps_axis] = ie
            vals[(slice(None),) + tuple(full)] = col[ie]
    return axes, vals


# -- local minima ---------------------------------------------------------------

def _grid_minima(v: np.ndarray) -> list[tuple[int, ...]]:
    """Seed cells of strict interior local minima; plateaus give their centroid cell."""
    if not np.any(np.isfinite(v)):
        return []
    footprint = np.ones((3,) * v.ndim, dtype=bool)
    padded = np.pad(v, 1, constant_values=np.inf)
    low = ndimage.minimum_filter(padded, footprint=footprint, mode="constant", cval=np.inf)[(slice(1, -1),) * v.ndim]
    cand = np.isfinite(v) & (v <= low)
    labels, count = ndimage.label(cand, structure=footprint)
    seeds = []
    for lab in range(1, count + 1):
        cells = np.argwhere(labels == lab)
        vmin = v[tuple(cells[0])]
        if np.any(v[tuple(cells.T)] != vmin):
            continue
        # interior: not touching the grid edge
        if np.any(cells == 0) or np.any(cells == np.array(v.shape) - 1):
            continue
        # strict: every neighbor outside the plateau is larger
        ok = True
        inside = {tuple(c) for c in cells}
        for c in cells:
            for off in np.ndindex(*(3,) * v.ndim):
                q = tuple(c + np.array(off) - 1)
                if q not in inside and not v[q] > vmin:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        centroid = cells.mean(axis=0)
        k = int(np.argmin(np.sum((cells - centroid) ** 2, axis=1)))
        seeds.append(tuple(int(i) for i in cells[k]))
    return seeds


def _basin_width(v, axis_vals, cell):
    """Span along the first axis where log10 d stays within one decade of the minimum."""
    line = v[(slice(None),) + tuple(cell[1:])] if v.ndim > 1 else v
    i0 = cell[0]
    lim = line[i0] + 1.0
    lo = hi = i0
    while lo > 0 and line[lo - 1] < lim:
        lo -= 1
    while hi < len(line) - 1 and line[hi + 1] < lim:
        hi += 1
    return float(axis_vals[hi] - axis_vals[lo])


def golden_section(f: Callable[[float], float], a: float, b: float, x0: float | None = None, f0: float | None = None, rtol: float = POLISH_RTOL, max_iter: int = 200) -> tuple[float, float]:
    """Minimize ``f`` on ``[a, b]``; returns the best point seen.

    ``(x0, f0)`` is a known point that the result never does worse than.
    """
    best_x, best_f = (x0, f0) if x0 is not None else (None, np.inf)
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx < best_f:
            best_x, best_f = x, fx
    for _ in range(max_iter):
        if abs(b - a) <= rtol * max(abs(c), abs(d), 1e-300):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
            if fc < best_f:
                best_x, best_f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
            if fd < best_f:
                best_x, best_f = d, fd
    return best_x, best_f


class _Objective:
    """``log10 d`` at a single order with expansions cached per operator."""

    def __init__(self, problem, spec, n, kind):
        self.problem, self.spec, self.n, self.kind = problem, spec, n, kind
        self._cache: dict = {}

    def __call__(self, point):
        p = self.spec.params(point)
        key = (p.p0, p.p1, p.p2, p.p3)
        e = self._cache.get(key)
        if e is None:
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    e = Expansion(self.problem, p).extend(self.n)
            except INFEASIBLE:
                e = False
            if len(self._cache) > 256:
                self._cache.clear()
            self._cache[key] = e
        if e is False:
            return np.inf
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                return _log10(_distance(self.problem, e, self.n, p.epsilon, self.kind))
        except INFEASIBLE:
            return np.inf


def polish(problem: ODEProblem, n: int, spec: ParamSpec, seed: Mapping[str, float], kind: str = "d1", f0: float | None = None, max_cycles: int = 30) -> tuple[dict, float]:
    """Coordinate-cycling golden-section refinement from ``seed``.

    Each line search is confined to one grid step either side of the current
    value.  Returns the refined point and its ``log10 d``.
    """
    obj = _Objective(problem, spec, n, kind)
    x = dict(seed)
    fx = obj(x) if f0 is None else f0
    names = spec.searched
    if len(names) == 2 and "epsilon" in names:
        return _polish_profile(obj, spec, x, fx)[:2]
    for _ in range(max_cycles):
        old = dict(x)
        for name in names:
            lo, hi = spec.search[name].neighbors(x[name])

            def line(v, name=name):
                return obj({**x, name: v})

            xv, fv = golden_section(line, lo, hi, x[name], fx)
            if fv < fx:
                x[name], fx = float(xv), fv
        if len(names) == 1 or all(abs(x[k] - old[k]) <= POLISH_RTOL * max(abs(x[k]), 1e-300) for k in names):
            break
    return x, fx


def _polish_profile(obj, spec, x, fx, max_shifts=8):
    """Golden section on the operator parameter of ``min_eps d``.

    Epsilon enters only the partial sums, so each inner search reuses one
    expansion.  The inner window follows the valley when its optimum lands
    on an edge, and so does the outer window, up to ``max_shifts`` cells.
    The third return value flags an outer optimum still on the edge of its
    window: the valley keeps descending and the seed is not a minimum.
    """
    name = next(k for k in spec.searched if k != "epsilon")
    er = spec.search["epsilon"]
    x, fx = dict(x), fx

    def inner(v, e0):
        best_e, best_f = e0, obj({**x, name: v, "epsilon": e0})
        for _ in range(max_shifts):
            lo, hi = er.neighbors(best_e)
            e, f = golden_section(lambda t: obj({**x, name: v, "epsilon": t}), lo, hi, best_e, best_f)
            moved = e != best_e
            best_e, best_f = e, f
            edge = min(abs(e - lo), abs(hi - e)) <= 1e-6 * (hi - lo)
            if not (moved and edge):
                break
        return best_e, best_f

    eps_at = {}

    def outer(v):
        e, f = inner(v, x["epsilon"])
        eps_at[v] = e
        return f

    for _ in range(max_shifts):
        lo, hi = spec.search[name].neighbors(x[name])
        v, f = golden_section(outer, lo, hi, x[name], fx)
        moved = f < fx
        if moved:
            x[name], x["epsilon"], fx = float(v), float(eps_at[v]), f
        edge = min(abs(x[name] - lo), abs(hi - x[name])) <= EDGE_RTOL * (hi - lo)
        if not (moved and edge):
            break
    return x, fx, edge


def _records_for_order(problem, n, spec, kind, axes, v):
    names = spec.searched
    out = []
    profile = len(names) == 2 and "epsilon" in names
    for cell in _grid_minima(v):
        seed = {names[i]: float(axes[i][cell[i]]) for i in range(len(names))}
        if profile:
            point, f, edge = _polish_profile(_Objective(problem, spec, n, kind), spec, seed, float(v[cell]))
            if edge:
                continue
        else:
            point, f = polish(problem, n, spec, seed, kind, f0=float(v[cell]))
        d_star = 10.0**f
        dup = False
        for r in out:
            if all(abs(r.point[k] - point[k]) <= 1e-6 * max(abs(point[k]), 1e-12) for k in names):
                dup = True
        if dup:
            continue
        out.append(
            MinimaRecord(
                n=n,
                point=point,
                params=spec.params(point),
                d_star=d_star,
                kind=kind,
                basin_width=_basin_width(v, axes[0], cell),
                grid_d=10.0 ** float(v[cell]),
                exact=d_star <= EXACT_TOL,
            )
        )
    out.sort(key=lambda r: tuple(r.point[k] for k in names))
    return out


def scan_orders(problem: ODEProblem, orders: Sequence[int], spec: ParamSpec, kind: str = "d1", n_jobs: int = 1) -> dict[int, list[MinimaRecord]]:
    """Local minima at each order; one expansion per grid point serves all orders."""
    orders = sorted(set(int(n) for n in orders))
    axes, vals = _grid_values(problem, orders, spec, kind, n_jobs)
    out = {}
    for j, n in enumerate(orders):
        if not np.any(np.isfinite(vals[j])):
            raise EmptyGridError(f"no feasible grid point at order {n}")
        out[n] = _records_for_order(problem, n, spec, kind, axes, vals[j])
    return out


def scan_minima(problem: ODEProblem, n: int, spec: ParamSpec, kind: str = "d1", n_jobs: int = 1) -> list[MinimaRecord]:
    """Polished strict interior local minima of the distance at order ``n``."""
    return scan_orders(problem, [n], spec, kind, n_jobs)[n]


def scan_grid(problem: ODEProblem, n: int, spec: ParamSpec, kind: str = "d1", n_jobs: int = 1) -> tuple[list[np.ndarray], np.ndarray]:
    """Raw ``log10 d`` landscape at order ``n`` (``inf`` where infeasible)."""
    axes, vals = _grid_values(problem, [n], spec, kind, n_jobs)
    return axes, vals[0]


# -- sequences ------------------------------------------------------------------

def _period(counts: Mapping[int, int], max_period: int) -> int:
    """Smallest period with a constant minima count per residue class.

    Failing that, the period whose classes have the fewest orders off their
    modal count, the smallest such period on ties.
    """
    ns = sorted(counts)
    best, best_bad = 1, None
    for k in range(1, max_period + 1):
        bad = 0
        for r in range(k):
            c = [counts[n] for n in ns if n % k == r]
            if c:
                mode = max(set(c), key=lambda v: (c.count(v), -v))
                bad += sum(1 for v in c if v != mode)
        if bad == 0:
            return k
        if best_bad is None or bad < best_bad:
            best, best_bad = k, bad
    return best


def _rel_gap(a: MinimaRecord, b: MinimaRecord) -> float:
    return max(abs(a.point[k] - b.point[k]) / max(abs(b.point[k]), 1e-300) for k in a.point)


def track_sequences(
    records: Mapping[int, Sequence[MinimaRecord]],
    threshold: float = 0.2,
    max_period: int = 4,
    period: int | None = None,
) -> list[SequenceRecord]:
    """Link minima across orders into sequences identified by ``(k, l)``.

    ``k`` is the residue class ``n mod kbar`` and ``l`` numbers the
    sequences of that class by their parameter at first appearance.
    ``period`` fixes ``kbar``; by default it is inferred from the counts.
    """
    ns = sorted(records)
    if len(ns) < 6 or ns != list(range(ns[0], ns[0] + len(ns))):
        raise ValueError("track_sequences needs records for at least 6 consecutive orders")
    if period is not None and not 1 <= period <= len(ns) // 2:
        raise ValueError(f"period must be in 1..{len(ns) // 2}, got {period}")
    kbar = period or _period({n: len(records[n]) for n in ns}, max_period)
    found = []
    for r in range(kbar):
        open_seqs: list[list[MinimaRecord]] = []
        closed: list[list[MinimaRecord]] = []
        for n in (n for n in ns if n % kbar == r):
            live = [s for s in open_seqs if s[-1].n == n - kbar]
            closed += [s for s in open_seqs if s[-1].n != n - kbar]
            pairs = sorted(
                (_rel_gap(m, s[-1]), i, j)
                for j, s in enumerate(live)
                for i, m in enumerate(records[n])
            )
            used_m, used_s = set(), set()
            for gap, i, j in pairs:
                if gap > threshold or i in used_m or j in used_s:
                    continue
                live[j].append(records[n][i])
                used_m.add(i)
                used_s.add(j)
            fresh = [[m] for i, m in enumerate(records[n]) if i not in used_m]
            open_seqs = live + fresh
        seqs = closed + open_seqs
        seqs.sort(key=lambda s: (s[0].n, tuple(s[0].point.values())))
        # l counts sequences within the class in order of first parameter value
        first = sorted(seqs, key=lambda s: (s[0].n, tuple(s[0].point.values())))
        for l, s in enumerate(first, start=1):
            found.append(SequenceRecord(id=(r, l), period=kbar, members=tuple(s)))
    found.sort(key=lambda s: s.id)
    return found


def _design(ns, powers):
    return np.column_stack([ns**p for p in powers])


def _lstsq(A, y):
    """Coefficients, standard errors, and whether columns had to be dropped."""
    reduced = False
    while A.shape[1] > 1 and np.linalg.matrix_rank(A / np.linalg.norm(A, axis=0)) < A.shape[1]:
        A = A[:, :-1]
        reduced = True
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    dof = len(y) - A.shape[1]
    res = y - A @ coef
    if dof > 0:
        s2 = float(res @ res) / dof
        cov = s2 * np.linalg.pinv(A.T @ A)
        err = np.sqrt(np.maximum(np.diag(cov), 0.0))
    else:
        err = np.full(A.shape[1], np.nan)
    return coef, err, reduced, float(np.sqrt(np.mean(res**2)))


def default_window(orders: Sequence[int]) -> tuple[int, int]:
    """Upper two-thirds of the available orders, keeping at least five."""
    orders = sorted(orders)
    keep = max(5, math.ceil(2 * len(orders) / 3))
    return orders[max(0, len(orders) - keep)], orders[-1]


def fit_asymptotics(seq: SequenceRecord, window: tuple[int, int] | None = None, p_terms: int = 4, d_terms: int = 3) -> SequenceRecord:
    """Fit ``p*(n)`` in ``{1, 1/n, ..}`` and ``log10 d*(n)`` in ``{n, 1, 1/n, ..}``.

    ``p_terms`` and ``d_terms`` count basis functions.  Returns the sequence
    with ``fit`` filled in; ``delta = 10**b0``.
    """
    lo, hi = window if window is not None else default_window(seq.orders)
    mem = [m for m in seq.members if lo <= m.n <= hi]
    if len(mem) < 5:
        raise ValueError(f"fit needs at least 5 members in [{lo}, {hi}], have {len(mem)}")
    ns = np.array([m.n for m in mem], dtype=float)
    reduced = False
    a, a_err = {}, {}
    Pa = _design(ns, [-k for k in range(p_terms)])
    for name in mem[0].point:
        y = np.array([m.point[name] for m in mem])
        a[name], a_err[name], red, _ = _lstsq(Pa, y)
        reduced |= red
    fin = [m for m in mem if m.d_star > 0]
    if len(fin) < 2:
        raise ValueError("fit needs at least two members with d* > 0")
    nf = np.array([m.n for m in fin], dtype=float)
    Pb = _design(nf, [1] + [-k for k in range(d_terms - 1)])
    b, b_err, red, scatter = _lstsq(Pb, np.log10([m.d_star for m in fin]))
    reduced |= red
    fit = AsymptoticFit(a, a_err, b, b_err, float(10.0 ** b[0]), tuple(int(n) for n in ns), reduced, scatter)
    return replace(seq, fit=fit)


# -- critical parameter and order prediction ------------------------------------

@dataclass(frozen=True)
class CriticalEstimate:
    """``value`` is the root of the cubic ``m(xi)`` or, with ``bound`` set, a one-sided limit."""

    value: float
    bound: str
    xis: tuple[float, ...]
    slopes: tuple[float, ...]
    coeffs: tuple[float, ...]


def critical_from_slopes(xis: Sequence[float], slopes: Sequence[float], extend: float = 0.25) -> CriticalEstimate:
    """Root of a cubic fit of ``m(xi)``.

    Roots are accepted inside the sampled range widened by ``extend`` times
    its span on either side.  Without one, the sign of the slopes gives a
    one-sided bound at the nearest end of the list.
    """
    x = np.asarray(xis, dtype=float)
    m = np.asarray(slopes, dtype=float)
    deg = min(3, len(x) - 1)
    coeffs = np.polyfit(x, m, deg)
    lo, hi = x.min(), x.max()
    span = hi - lo
    roots = np.roots(coeffs)
    real = sorted(
        float(r.real)
        for r in roots
        if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and lo - extend * span <= r.real <= hi + extend * span
    )
    info = dict(xis=tuple(map(float, x)), slopes=tuple(map(float, m)), coeffs=tuple(map(float, coeffs)))
    if real:
        # the root bounding the convergent region on the side of the data
        neg = m < 0
        if np.all(neg) or np.all(~neg):
            root = min(real, key=lambda r: min(abs(r - hi), abs(r - lo)))
        else:
            crossings = [i for i in range(len(m) - 1) if (m[i] < 0) != (m[i + 1] < 0)]
            c = 0.5 * (x[crossings[0]] + x[crossings[0] + 1])
            root = min(real, key=lambda r: abs(r - c))
        return CriticalEstimate(root, "root", **info)
    order = np.argsort(x)
    tail = m[order[-1]]
    return CriticalEstimate(float(hi), "lower" if tail < 0 else "upper", **info)


def critical_parameter(
    family: Callable[[float], ODEProblem],
    xis: Sequence[float],
    spec: ParamSpec,
    orders: Sequence[int],
    kind: str = "d1",
    window: tuple[int, int] | None = None,
    n_jobs: int = 1,
) -> CriticalEstimate:
    """Critical value of a family parameter where the decay slope ``b0`` reaches zero.

    For each ``xi`` the longest tracked sequence is fitted and its ``b0``
    taken as ``m(xi)``.
    """
    slopes = []
    for xi in xis:
        recs = scan_orders(family(xi), orders, spec, kind, n_jobs)
        seqs = [s for s in track_sequences(recs) if len(s.members) >= 5]
        if not seqs:
            raise ValueError(f"no sequence with five members at xi={xi}")
        best = max(seqs, key=lambda s: (len(s.members), -s.members[-1].d_star))
        slopes.append(fit_asymptotics(best, window, p_terms=1, d_terms=3).fit.b[0])
    return critical_from_slopes(xis, slopes)


def predict_order(b: Sequence[float], p: float, t: float) -> int:
    """Orders needed for ``d* = 10**-p`` on an interval of length ``10**t``.

    Largest real root of ``b0 n^3 + (p + t + b1) n^2 + b2 n + b3``, rounded up.
    """
    b = list(b) + [0.0] * (4 - len(b))
    if not b[0] < 0:
        raise ValueError("predict_order needs b0 < 0")
    roots = np.roots([b[0], p + t + b[1], b[2], b[3]])
    pos = [r.real for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and r.real > 0]
    if not pos:
        raise ValueError("no positive real root")
    return int(math.ceil(max(pos) - 1e-9))
