"""scikit-learn style front end: ``fit`` optimizes, ``predict`` evaluates."""

from __future__ import annotations

from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import GhostODEError
from .optimize import ParamSpec, SearchRange, scan_minima
from .problems import get_problem
from .recurrence import ODEProblem, expand, partial_sum
from .validation import check_distance, check_order, check_points


class GhostSolver(RegressorMixin, BaseEstimator):
    """Optimized order-``order`` approximation of an ODE solution.

    ``problem`` is a catalog name (with ``problem_params``) or an
    :class:`ODEProblem`.  ``search`` maps parameter names to
    ``(lo, hi[, num[, scale]])``; unspecified parameters keep the values in
    ``fixed``.  ``minimum`` picks among several local minima by ascending
    first searched parameter; ``None`` takes the smallest distance.
    """

    def __init__(
        self,
        problem="example1",
        problem_params=None,
        order=10,
        distance="d1",
        search=None,
        fixed=None,
        minimum=None,
        n_jobs=1,
    ):
        self.problem = problem
        self.problem_params = problem_params
        self.order = order
        self.distance = distance
        self.search = search
        self.fixed = fixed
        self.minimum = minimum
        self.n_jobs = n_jobs

    def _problem(self) -> ODEProblem:
        if isinstance(self.problem, ODEProblem):
            return self.problem
        return get_problem(self.problem, **(self.problem_params or {}))

    def _spec(self, problem: ODEProblem) -> ParamSpec:
        if self.search is None:
            a, b = problem.interval
            return ParamSpec.default(T=b - a, **(self.fixed or {}))
        search = {k: SearchRange(*v) for k, v in self.search.items()}
        return ParamSpec(dict(self.fixed or {}), search)

    def fit(self, X=None, y=None):
        """Scan and polish the distance minima.

        The ODE defines the target, so ``X`` and ``y`` are accepted for
        pipeline compatibility and otherwise ignored.
        """
        n = check_order(self.order)
        kind = check_distance(self.distance)
        problem = self._problem()
        records = scan_minima(problem, n, self._spec(problem), kind, self.n_jobs)
        if not records:
            raise GhostODEError(f"no local minimum of {kind} at order {n}")
        if self.minimum is None:
            rec = min(records, key=lambda r: r.d_star)
        else:
            rec = records[self.minimum]
        self.problem_ = problem
        self.minima_ = records
        self.params_ = rec.params
        self.d_star_ = rec.d_star
        self.solution_ = partial_sum(expand(problem, rec.params, n), n)
        return self

    def predict(self, X):
        """Approximate solution at the points ``X`` (shape ``(n,)`` or ``(n, 1)``)."""
        check_is_fitted(self, "solution_")
        x = check_points(X, self.problem_.interval)
        return self.solution_(x)
