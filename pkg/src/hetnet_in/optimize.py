"""Design-parameter optimization: U for IN, eta for ABS, and the bias B."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import association as assoc
from . import coverage as cov
from .config import NumericsParams, Scheme, SchemeParams, SystemParams, db_to_linear


@dataclass(frozen=True)
class DeltaReport:
    U: int
    gain: float
    penalty: float

    @property
    def net(self) -> float:
        return self.gain - self.penalty


@dataclass
class OptimumResult:
    arg_opt: float
    opt_value: float
    trace: list[tuple[float, float]]
    flags: dict[str, object] = field(default_factory=dict)


class _DeltaModel:
    """Shared pieces for every U at one (tau, params) point."""

    def __init__(self, params, tau, method, numerics):
        self.params = params
        st = assoc.assoc_stats(params)
        self.st = st
        self.orders = cov.macro_order_rates(params, tau, method, numerics)
        self.diff = cov.offloaded_class_rates(params, tau, method, numerics)[2]

    def delta(self, U) -> DeltaReport:
        p, st = self.params, self.st
        gain = st.a2o * assoc.in_probability_increment(p, U) * self.diff
        penalty = (st.a1 * assoc.prob_active_offloaded_at_least(p, U)
                   * self.orders[p.n1 - U])
        return DeltaReport(U, max(gain, 0.0), max(penalty, 0.0))


def delta_rate(U: int, tau: float, params: SystemParams, method: str = "mla",
               numerics: NumericsParams | None = None) -> DeltaReport:
    """Gain and penalty of raising the nulling DoF from U-1 to U."""
    if not 1 <= U <= params.n1 - 1:
        raise ValueError("U must lie in [1, n1-1]")
    return _DeltaModel(params, tau, method, numerics).delta(U)


def in_rate_curve(tau: float, params: SystemParams, method: str = "mla",
                  numerics: NumericsParams | None = None) -> np.ndarray:
    """Rate coverage of IN for U = 0..n1-1.

    Built as the U=0 value plus cumulative exact increments, so differences
    between neighbouring U stay accurate when both are very close to 1.
    """
    base = cov.rate_coverage(params, SchemeParams(Scheme.IN, 0, 0.5, tau), method,
                             numerics).overall
    if params.n1 == 1:
        return np.array([base])
    model = _DeltaModel(params, tau, method, numerics)
    nets = [model.delta(u).net for u in range(1, params.n1)]
    return base + np.concatenate([[0.0], np.cumsum(nets)])


def _argmax_smallest(values):
    values = np.asarray(values)
    return int(np.flatnonzero(values == values.max())[0])


def optimal_U(tau: float, params: SystemParams, method: str = "mla",
              numerics: NumericsParams | None = None) -> OptimumResult:
    """Exhaustive search over U in {0, ..., n1-1}; ties go to the smaller U."""
    if tau <= 0:
        raise ValueError("tau must be > 0")
    if method == "full-direct":
        vals = np.array([cov.rate_coverage(params, SchemeParams(Scheme.IN, u, 0.5, tau),
                                           "full", numerics).overall
                         for u in range(params.n1)])
    else:
        vals = in_rate_curve(tau, params, method, numerics)
    k = _argmax_smallest(vals)
    return OptimumResult(k, float(vals[k]), [(u, float(v)) for u, v in enumerate(vals)])


def abs_rate(eta: float, tau: float, params: SystemParams, method: str = "mla",
             numerics=None) -> float:
    return cov.rate_coverage(params, SchemeParams(Scheme.ABS, 0, eta, tau), method,
                             numerics).overall


def optimal_eta(tau: float, params: SystemParams, iterations: int | None = None,
                method: str = "mla", numerics: NumericsParams | None = None,
                eps: float = 1e-3) -> OptimumResult:
    """Bisection on the sign of the local slope of the ABS coverage in eta.

    Runs exactly ``iterations`` (default n1) halvings of (eps, 1-eps).
    Unimodality is assumed; the result is flagged when an endpoint beats
    the returned interior point.
    """
    iterations = params.n1 if iterations is None else iterations
    lo, hi = eps, 1.0 - eps
    trace = []

    def f(e):
        v = abs_rate(e, tau, params, method, numerics)
        trace.append((e, v))
        return v

    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        d = 1e-4 * (hi - lo)
        left, right = f(mid - d), f(mid + d)
        if right > left:
            lo = mid
        elif left > right:
            hi = mid
        else:
            q = 0.25 * (hi - lo)
            lo, hi = lo + q, hi - q
    eta = 0.5 * (lo + hi)
    val = f(eta)
    ends = (f(eps), f(1.0 - eps))
    flags = {"endpoint_beats_interior": bool(max(ends) > val)}
    return OptimumResult(eta, val, trace, flags)


DEFAULT_BIAS_GRID_DB = tuple(np.round(np.arange(0.0, 14.0001, 0.5), 10))


def optimal_bias(scheme: str | Scheme, tau: float, params: SystemParams,
                 bias_grid_db=DEFAULT_BIAS_GRID_DB, method: str = "mla",
                 numerics: NumericsParams | None = None) -> OptimumResult:
    """Grid search over the bias (dB) with the scheme's inner optimization."""
    scheme = Scheme(scheme)
    grid = sorted(float(b) for b in bias_grid_db)
    if not grid:
        raise ValueError("bias grid must be nonempty")
    trace, inner = [], {}
    for bdb in grid:
        p = params.with_(bias=db_to_linear(bdb))
        if scheme is Scheme.IN:
            r = optimal_U(tau, p, method, numerics)
            val, inner[bdb] = r.opt_value, r.arg_opt
        elif scheme is Scheme.ABS:
            r = optimal_eta(tau, p, method=method, numerics=numerics)
            val, inner[bdb] = r.opt_value, r.arg_opt
        else:
            val = cov.rate_coverage(p, SchemeParams(Scheme.SIMPLE_OFFLOAD, 0, 0.5, tau),
                                    method, numerics).overall
            inner[bdb] = 0
        trace.append((bdb, float(val)))
    k = _argmax_smallest([v for _, v in trace])
    return OptimumResult(trace[k][0], trace[k][1], trace,
                         {"inner_opt": inner, "inner_at_opt": inner[trace[k][0]]})


class UnderflowError(ArithmeticError):
    pass


def asymptotic_slope(quantity: str, params: SystemParams, taus, U: int | None = None,
                     n: int | None = None, method: str = "mla", numerics=None) -> float:
    """Least-squares slope of log(quantity) against log(tau).

    ``quantity`` is 'penalty' or 'gain' (needs U) or 'term' (the class-1
    order-n term, needs n).
    """
    taus = np.asarray(taus, dtype=float)
    vals = []
    for tau in taus:
        if quantity == "penalty":
            vals.append(delta_rate(U, tau, params, method, numerics).penalty)
        elif quantity == "gain":
            vals.append(delta_rate(U, tau, params, method, numerics).gain)
        elif quantity == "term":
            vals.append(cov.macro_order_rates(params, tau, method, numerics)[n])
        else:
            raise ValueError(f"unknown quantity {quantity!r}")
    vals = np.array(vals)
    if np.any(vals < 1e-300):
        raise UnderflowError(f"{quantity} underflows on the tau grid")
    return float(np.polyfit(np.log(taus), np.log(vals), 1)[0])


def small_tau_limit_set(params: SystemParams) -> tuple[int, ...]:
    """Candidate small-threshold optima {n1-n2-1, n1-n2}, clipped to the range."""
    lo, hi = params.n1 - params.n2 - 1, params.n1 - params.n2
    return tuple(u for u in (lo, hi) if 0 <= u <= params.n1 - 1) or (0,)



@dataclass
class AbsComparison:
    """Per-class MLA comparison of IN (fixed U) against ABS over an eta grid."""

    etas: np.ndarray
    in_rates: dict[str, float]
    abs_rates: dict[str, np.ndarray]
    unoff_threshold: float     # 1 - E[L_2Obar] / E[L_2]
    off_threshold: float       # E[L_2O] / E[L_2]

    def in_wins(self, k: str) -> np.ndarray:
        return self.in_rates[k] > self.abs_rates[k]

    def unoffloaded_condition_holds(self) -> bool:
        """IN beats ABS for unoffloaded users exactly when eta exceeds its threshold."""
        return bool(np.all(self.in_wins("2Obar") == (self.etas > self.unoff_threshold)))

    def offloaded_condition_holds(self) -> bool:
        """IN beating ABS for offloaded users requires eta below its threshold."""
        return bool(np.all(~self.in_wins("2O") | (self.etas < self.off_threshold)))

    def crossing(self, k: str) -> float:
        """First grid eta at which the IN-vs-ABS outcome for class k flips."""
        w = self.in_wins(k)
        idx = np.flatnonzero(w[1:] != w[:-1])
        return float(self.etas[idx[0] + 1]) if idx.size else float("nan")


def compare_in_abs(params: SystemParams, tau: float, U: int, etas,
                   numerics: NumericsParams | None = None) -> AbsComparison:
    etas = np.asarray(sorted(float(e) for e in etas))
    inr = cov.rate_coverage(params, SchemeParams(Scheme.IN, U, 0.5, tau), "mla", numerics)
    # the offloaded IN class mixes nulled and non-nulled users with the IN probability
    pe = assoc.in_probability(params, U)
    in_rates = {"1": inr.per_class["1"], "2Obar": inr.per_class["2Obar"],
                "2O": pe * inr.per_class["2OC"] + (1 - pe) * inr.per_class["2OCbar"]}
    abs_rates = {k: np.empty(etas.size) for k in ("1", "2Obar", "2O")}
    for i, e in enumerate(etas):
        r = cov.rate_coverage(params, SchemeParams(Scheme.ABS, 0, float(e), tau), "mla",
                              numerics)
        for k in abs_rates:
            abs_rates[k][i] = r.per_class[k]
    l2 = assoc.mean_load("2", params)
    return AbsComparison(etas, in_rates, abs_rates,
                         1.0 - assoc.mean_load("2Obar", params) / l2,
                         assoc.mean_load("2O", params) / l2)
