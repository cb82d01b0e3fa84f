"""Analytic SIR and rate coverage for the IN, simple-offloading and ABS schemes.

Notation used throughout: for an interfering tier with path-loss exponent
``alpha`` seen from exclusion radius ``r`` at Laplace argument ``s``, write
``x = s r^-alpha`` and ``g = pi lambda r^2``. Then

    log L(s, r)        = -g K_0(x)
    scaled cumulant c_a = g K_a(x),      a >= 1

with ``K_0 = (2/alpha) x^(2/alpha) B'(2/alpha, 1-2/alpha, 1/(1+x))`` and
``K_a = (2/alpha) x^(2/alpha) B'(1+2/alpha, a-2/alpha, 1/(1+x))``. The
threshold enters only through ``x`` and the distances only through ``g``,
so the incomplete-beta work is done once per threshold, not per node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import association as assoc
from ._quad import gauss_legendre, semi_infinite
from .config import NumericsParams, Scheme, SchemeParams, SystemParams
from .specfun import compositions3, log_comp_inc_beta_w, partitions

CLASSES_IN = ("1", "2Obar", "2OC", "2OCbar")
CLASSES_ABS = ("1", "2Obar", "2O")
WEDGE_NODES = 32
_BETA_CAP = 1e300
_CHUNK_ELEMS = 400_000


# ---------------------------------------------------------------- Laplace layer

@dataclass(frozen=True)
class LaplaceField:
    density: float
    alpha: float
    r: float
    s: float


def _tier_logk(x, alpha: float, order: int):
    """log K_a(x) for a = 0..order-1, shape (order,) + x.shape."""
    x = np.minimum(np.asarray(x, dtype=float), _BETA_CAP)
    d = 2.0 / alpha
    w = x / (1.0 + x)
    z = 1.0 / (1.0 + x)
    with np.errstate(divide="ignore"):
        base = math.log(d) + d * np.log(x)
    out = np.empty((order,) + x.shape)
    out[0] = base + log_comp_inc_beta_w(d, 1.0 - d, w, z)
    for a in range(1, order):
        out[a] = base + log_comp_inc_beta_w(1.0 + d, a - d, w, z)
    return out


def laplace_interference(field: LaplaceField) -> float:
    """E[exp(-s I)] for PPP interference outside radius r with Exp(1) marks."""
    if field.s < 0 or field.r < 0:
        raise ValueError("s and r must be nonnegative")
    if field.s == 0:
        return 1.0
    if field.r == 0:
        return 0.0
    x = field.s * field.r ** -field.alpha
    g = math.pi * field.density * field.r ** 2
    return float(np.exp(-g * np.exp(_tier_logk(x, field.alpha, 1)[0])))


def laplace_derivative_scaled(m: int, field: LaplaceField) -> float:
    """s^m E[I^m exp(-s I)], summed over the partitions of m.

    Every partition contributes a positive product; products are formed in
    the log domain and accumulated with compensated summation.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    lap = laplace_interference(field)
    if m == 0 or field.s == 0:
        return lap if m == 0 else 0.0
    x = field.s * field.r ** -field.alpha
    g = math.pi * field.density * field.r ** 2
    logk = _tier_logk(x, field.alpha, m + 1)
    logc = math.log(g) + logk[1:]
    lfm = special.gammaln(m + 1)
    terms = []
    for p in partitions(m):
        lt = lfm
        for a, pa in enumerate(p, start=1):
            if pa:
                lt += pa * logc[a - 1] - special.gammaln(pa + 1)
        terms.append(math.exp(lt))
    return lap * math.fsum(terms)


def _scaled_sequence(g, logk, order, log_pref=0.0):
    """a_m = s^m E[I^m e^{-sI}] / m! times exp(log_pref), m < order.

    Uses m a_m = sum_{j=1}^m j c_j a_{m-j}, a positive-term recursion that
    is equivalent to the partition sum and cheap on node grids.
    """
    k = np.exp(logk)
    a0 = np.exp(log_pref - g * k[0])
    seq = [a0]
    c = [None] + [g * k[j] for j in range(1, order)]
    for m in range(1, order):
        acc = c[1] * seq[m - 1]
        for j in range(2, m + 1):
            acc = acc + j * c[j] * seq[m - j]
        seq.append(acc / m)
    return seq


def _convolve(a, b, order):
    out = []
    for n in range(order):
        acc = a[0] * b[n]
        for i in range(1, n + 1):
            acc = acc + a[i] * b[n - i]
        out.append(acc)
    return out


# ---------------------------------------------------------------- per-class geometry

@dataclass(frozen=True)
class ClassGeometry:
    """Serving tier, exclusion radii and signal shape for one class at pinned distances."""

    k: str
    serving_tier: int
    r1: float
    r2: float
    signal_shape: int
    y_serving: float
    in_dof: int = 0


def class_geometry(k: str, params: SystemParams, y1: float | None = None,
                   y2: float | None = None, in_dof: int = 0) -> ClassGeometry:
    p = params
    if k == "1":
        if not 0 <= in_dof <= p.n1 - 1:
            raise ValueError("in_dof must lie in [0, n1-1]")
        r2 = (p.p2 * p.bias / p.p1) ** (1 / p.alpha2) * y1 ** (p.alpha1 / p.alpha2)
        return ClassGeometry(k, 1, y1, r2, p.n1 - in_dof, y1, in_dof)
    if k == "2Obar":
        r1 = (p.p1 / p.p2) ** (1 / p.alpha1) * y2 ** (p.alpha2 / p.alpha1)
        return ClassGeometry(k, 2, r1, y2, p.n2, y2)
    if k in ("2OC", "2OCbar"):
        return ClassGeometry(k, 2, y1, y2, p.n2, y2)
    if k == "2O_abs":
        return ClassGeometry(k, 2, math.inf, y2, p.n2, y2)
    raise ValueError(f"unknown class {k!r}")


def conditional_coverage(geom: ClassGeometry, beta: float, params: SystemParams) -> float:
    """Coverage at threshold beta conditioned on the class distances."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if beta == 0:
        return 1.0
    p = params
    pj = p.p1 if geom.serving_tier == 1 else p.p2
    aj = p.alpha1 if geom.serving_tier == 1 else p.alpha2
    head = beta * geom.y_serving ** aj / pj
    f1 = LaplaceField(p.lambda1, p.alpha1, geom.r1, head * p.p1)
    f2 = LaplaceField(p.lambda2, p.alpha2, geom.r2, head * p.p2)
    M = geom.signal_shape
    d1 = [0.0] * M if math.isinf(geom.r1) else [
        laplace_derivative_scaled(m, f1) / math.factorial(m) for m in range(M)]
    if math.isinf(geom.r1):
        d1[0] = 1.0
    d2 = [laplace_derivative_scaled(m, f2) / math.factorial(m) for m in range(M)]
    if geom.k != "2OCbar":
        return math.fsum(d1[i] * d2[n - i] for n in range(M) for i in range(n + 1))
    s3 = head * p.p1 * geom.r1 ** -p.alpha1
    d3 = [s3 ** q / (1 + s3) ** (q + 1) for q in range(M)]
    total = []
    for n in range(M):
        for q1, q2, q3 in compositions3(n):
            total.append(d1[q1] * d2[q2] * d3[q3])
    return math.fsum(total)


# ---------------------------------------------------------------- integrated terms

def _numerics(numerics):
    return NumericsParams() if numerics is None else numerics


def _chunks(betas, per_beta_cost):
    size = max(1, _CHUNK_ELEMS // max(1, per_beta_cost))
    for i in range(0, betas.size, size):
        yield slice(i, i + size)


def _run(betas, per_beta_cost, width, fn):
    betas = np.asarray(betas, dtype=float).ravel()
    out = np.zeros((betas.size, width))
    for sl in _chunks(betas, per_beta_cost):
        out[sl] = fn(betas[sl])
    return out


def macro_terms(params: SystemParams, betas, numerics=None, order=None) -> np.ndarray:
    """Integrals over the macro serving distance of the coverage terms.

    Returns shape (len(betas), order): entry n is the class-1 contribution of
    order n, so that the coverage with signal shape M is the sum over n < M.
    """
    p = params
    nu = _numerics(numerics)
    order = p.n1 if order is None else order
    st = assoc.assoc_stats(p)
    if st.a1 == 0.0:
        return np.zeros((np.size(betas), order))
    pl1, pl2 = math.pi * p.lambda1, math.pi * p.lambda2
    c2 = pl2 * (p.p2 * p.bias / p.p1) ** (2 / p.alpha2) * pl1 ** (-p.alpha1 / p.alpha2)
    e = p.alpha1 / p.alpha2
    la1 = math.log(st.a1)

    def solve(beta):
        lk1 = _tier_logk(beta, p.alpha1, order)[:, :, None]
        lk2 = _tier_logk(beta / p.bias, p.alpha2, order)[:, :, None]
        scale = 1.0 / (1.0 + np.exp(lk1[0, :, 0]) + c2 * (1.0 + np.exp(lk2[0, :, 0])))

        def f(v):
            g2 = c2 * v ** e
            a = _scaled_sequence(v, lk1, order, -v - g2 - la1)
            b = _scaled_sequence(g2, lk2, order)
            return np.stack(_convolve(a, b, order), axis=1)

        return semi_infinite(f, rtol=nu.quad_rel_tol, scale=scale, name="class 1").value

    return _run(betas, 400 * order * order, order, solve)


def pico_terms(params: SystemParams, betas, numerics=None, order=None) -> np.ndarray:
    """Per-order integrals for unoffloaded pico users; shape (len(betas), n2)."""
    p = params
    nu = _numerics(numerics)
    order = p.n2 if order is None else order
    st = assoc.assoc_stats(p)
    pl1, pl2 = math.pi * p.lambda1, math.pi * p.lambda2
    c1 = pl1 * (p.p1 / p.p2) ** (2 / p.alpha1) * pl2 ** (-p.alpha2 / p.alpha1)
    e = p.alpha2 / p.alpha1
    la = math.log(st.a2obar)

    def solve(beta):
        lk1 = _tier_logk(beta, p.alpha1, order)[:, :, None]
        lk2 = _tier_logk(beta, p.alpha2, order)[:, :, None]
        scale = 1.0 / (1.0 + np.exp(lk2[0, :, 0]) + c1 * (1.0 + np.exp(lk1[0, :, 0])))

        def f(v):
            g1 = c1 * v ** e
            b = _scaled_sequence(v, lk2, order, -v - g1 - la)
            a = _scaled_sequence(g1, lk1, order)
            return np.stack(_convolve(a, b, order), axis=1)

        return semi_infinite(f, rtol=nu.quad_rel_tol, scale=scale, name="class 2Obar").value

    return _run(betas, 400 * order * order, order, solve)


def offloaded_abs_terms(params: SystemParams, betas, numerics=None) -> np.ndarray:
    """Per-order integrals for offloaded users in protected subframes."""
    p = params
    nu = _numerics(numerics)
    order = p.n2
    st = assoc.assoc_stats(p)
    if st.a2o == 0.0:
        return np.zeros((np.size(betas), order))
    pl1, pl2 = math.pi * p.lambda1, math.pi * p.lambda2
    c1 = pl1 * (p.p1 / p.p2) ** (2 / p.alpha1) * pl2 ** (-p.alpha2 / p.alpha1)
    cb = c1 * p.bias ** (-2 / p.alpha1)
    e = p.alpha2 / p.alpha1
    la = math.log(st.a2o)

    def solve(beta):
        lk2 = _tier_logk(beta, p.alpha2, order)[:, :, None]
        scale = 1.0 / (1.0 + np.exp(lk2[0, :, 0]))

        def f(v):
            t = v ** e
            with np.errstate(divide="ignore"):
                lw = -cb * t + np.log(-np.expm1(-(c1 - cb) * t))
            b = _scaled_sequence(v, lk2, order, -v + lw - la)
            return np.stack(b, axis=1)

        return semi_infinite(f, rtol=nu.quad_rel_tol, scale=scale, name="class 2O (ABS)").value

    return _run(betas, 400 * order, order, solve)


def offloaded_terms(params: SystemParams, betas, numerics=None,
                    wedge_nodes: int = WEDGE_NODES) -> np.ndarray:
    """Coverage of offloaded users with and without nulling.

    Returns shape (len(betas), 3) with columns S_2OC, S_2OCbar and their
    difference, the last evaluated directly as a sum of positive terms.
    """
    p = params
    nu = _numerics(numerics)
    order = p.n2
    st = assoc.assoc_stats(p)
    if st.a2o == 0.0 or p.bias == 1.0:
        return np.zeros((np.size(betas), 3))
    pl1, pl2 = math.pi * p.lambda1, math.pi * p.lambda2
    co = pl2 * (p.p2 / p.p1) ** (2 / p.alpha2) * pl1 ** (-p.alpha1 / p.alpha2)
    e = p.alpha1 / p.alpha2
    u, wu = gauss_legendre(wedge_nodes, 0.0, math.log(p.bias))
    cnode = np.exp(u)
    lpre = math.log(2.0 / (st.a2o * p.alpha2)) + np.log(wu)          # (nc,)
    cfac = co * cnode ** (2 / p.alpha2)                               # (nc,)

    def solve(beta):
        bc = beta[:, None] * cnode[None, :]                          # (B, nc)
        lk1 = _tier_logk(bc, p.alpha1, order)[:, :, None, :]          # (M, B, 1, nc)
        lk2 = _tier_logk(beta, p.alpha2, order)[:, :, None, None]     # (M, B, 1, 1)
        with np.errstate(divide="ignore"):
            lrho = np.log(bc) - np.log1p(bc)                         # (B, nc)
        lrho = lrho[:, None, :]
        k0 = np.exp(lk1[0, :, 0, 0]) + co * (1.0 + np.exp(lk2[0, :, 0, 0]))
        scale = 1.0 / (1.0 + k0)

        def f(v):
            v3 = v[:, :, None]                                        # (B, n, 1)
            g2 = cfac[None, None, :] * v3 ** e                        # (B, n, nc)
            with np.errstate(divide="ignore"):
                pref = -v3 - g2 + np.log(g2) + lpre[None, None, :]
            a = _scaled_sequence(v3, lk1, order, pref)
            b = _scaled_sequence(g2, lk2, order)
            conv = _convolve(a, b, order)
            s_oc = sum(conv)
            diff = sum(cm * np.exp((order - m) * lrho) for m, cm in enumerate(conv))
            s_ocb = sum(cm * -np.expm1((order - m) * lrho) for m, cm in enumerate(conv))
            return np.stack([s_oc.sum(-1), s_ocb.sum(-1), diff.sum(-1)], axis=1)

        return semi_infinite(f, rtol=nu.quad_rel_tol, scale=scale,
                             name="class 2OC/2OCbar").value

    return _run(betas, 300 * wedge_nodes * order * 6, 3, solve)


# ---------------------------------------------------------------- SIR coverage

def _macro_coverage_from_terms(terms, params, U, numerics=None):
    """Mix the class-1 order terms over the IN-DoF distribution."""
    csum = np.cumsum(terms, axis=1)                      # csum[:, M-1] = sum_{n<M}
    if U == 0:
        return csum[:, -1]
    tab = assoc.pmf_in_dof(params, U, numerics)
    out = np.zeros(terms.shape[0])
    for u, pu in enumerate(tab.probs):
        out += pu * csum[:, params.n1 - u - 1]
    return out


def sir_coverage(k: str, beta, U: int, params: SystemParams, numerics=None):
    """Unconditional SIR coverage of class k at threshold(s) beta."""
    b = np.asarray(beta, dtype=float)
    flat = b.ravel()
    if k == "1":
        out = _macro_coverage_from_terms(macro_terms(params, flat, numerics), params, U, numerics)
    elif k == "2Obar":
        out = pico_terms(params, flat, numerics).sum(axis=1)
    elif k in ("2OC", "2OCbar"):
        out = offloaded_terms(params, flat, numerics)[:, 0 if k == "2OC" else 1]
    elif k == "2O_abs":
        out = offloaded_abs_terms(params, flat, numerics).sum(axis=1)
    else:
        raise ValueError(f"unknown class {k!r}")
    out = np.clip(out, 0.0, 1.0).reshape(b.shape)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- rate coverage

@dataclass
class CoverageReport:
    per_class: dict[str, float]
    overall: float
    method: str
    weights: dict[str, float] = field(default_factory=dict)
    ci: float | None = None
    class_ci: dict[str, float] | None = None
    error_bound: float = 0.0
    scheme: SchemeParams | None = None

    def check_total(self, tol: float = 1e-9) -> bool:
        return abs(sum(self.weights[k] * self.per_class[k] for k in self.per_class)
                   - self.overall) <= tol


def _threshold(n, tau, bandwidth, frac=1.0):
    """2^(n tau / (frac W)) - 1, computed without loss at small exponents."""
    expo = np.asarray(n, dtype=float) * tau / (frac * bandwidth)
    return np.minimum(np.expm1(np.minimum(expo, 1000.0) * math.log(2.0)), _BETA_CAP)


class _Plan:
    """Collects thresholds per evaluator so each runs once on a unique set."""

    def __init__(self):
        self.req: dict[str, list[np.ndarray]] = {}

    def add(self, kind, betas):
        arr = np.atleast_1d(np.asarray(betas, dtype=float))
        self.req.setdefault(kind, []).append(arr)
        return arr

    def run(self, params, numerics):
        funcs = {"macro": macro_terms, "pico": pico_terms, "off": offloaded_terms,
                 "offabs": offloaded_abs_terms}
        self.res = {}
        for kind, lst in self.req.items():
            allb = np.unique(np.concatenate(lst))
            vals = funcs[kind](params, allb, numerics)
            self.res[kind] = (allb, vals)

    def get(self, kind, betas):
        allb, vals = self.res[kind]
        idx = np.searchsorted(allb, np.asarray(betas, dtype=float))
        return vals[idx]


def _load_specs(params, scheme: SchemeParams, method: str, numerics):
    """(class -> (load kind, evaluator, resource fraction)) for the scheme."""
    if scheme.scheme is Scheme.ABS:
        eta = scheme.abs_eta
        return {"1": ("1", "macro", 1 - eta), "2Obar": ("2Obar", "pico", 1 - eta),
                "2O": ("2O", "offabs", eta)}
    return {"1": ("1", "macro", 1.0), "2Obar": ("2", "pico", 1.0), "2O": ("2", "off", 1.0)}


def _loads(kind, params, method, numerics):
    if method == "mla":
        return np.array([assoc.mean_load(kind, params)]), np.array([1.0]), 0.0
    tab = assoc.load_pmf(kind, params, numerics)
    return tab.support.astype(float), tab.probs, tab.tail


def rate_coverage_curve(params: SystemParams, scheme: SchemeParams, taus, method: str = "full",
                        numerics: NumericsParams | None = None) -> list[CoverageReport]:
    """Rate coverage reports at each threshold in ``taus`` (bits/s)."""
    method = method.lower()
    if method not in ("full", "mla"):
        raise ValueError("method must be 'full' or 'mla'")
    nu = _numerics(numerics)
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    st = assoc.assoc_stats(params)
    specs = _load_specs(params, scheme, method, nu)
    U = scheme.effective_u
    plan = _Plan()
    loads = {}
    for cls, (lk, ev, frac) in specs.items():
        n, w, tail = _loads(lk, params, method, nu)
        loads[cls] = (n, w, tail)
        for tau in taus:
            plan.add(ev, _threshold(n, tau, params.bandwidth, frac))
    plan.run(params, nu)

    reports = []
    for tau in taus:
        per, err = {}, 0.0
        for cls, (lk, ev, frac) in specs.items():
            n, w, tail = loads[cls]
            betas = _threshold(n, tau, params.bandwidth, frac)
            vals = plan.get(ev, betas)
            err += tail * st.weight("1" if cls == "1" else ("2Obar" if cls == "2Obar" else "2O"))
            if ev == "macro":
                if scheme.scheme is Scheme.ABS:
                    cov = vals.sum(axis=1)
                else:
                    cov = _macro_coverage_from_terms(vals, params, U, nu)
                per["1"] = float(np.dot(w, cov))
            elif ev in ("pico", "offabs"):
                per[cls] = float(np.dot(w, vals.sum(axis=1)))
            else:
                per["2OC"] = float(np.dot(w, vals[:, 0]))
                per["2OCbar"] = float(np.dot(w, vals[:, 1]))
        per = {k: min(1.0, max(0.0, v)) for k, v in per.items()}
        if scheme.scheme is Scheme.ABS:
            weights = {"1": st.a1, "2Obar": st.a2obar, "2O": st.a2o}
        else:
            pe = assoc.in_probability(params, U) if U > 0 else 0.0
            weights = {"1": st.a1, "2Obar": st.a2obar, "2OC": st.a2o * pe,
                       "2OCbar": st.a2o * (1.0 - pe)}
        overall = sum(weights[k] * per[k] for k in per)
        if tau == 0:
            per = {k: 1.0 for k in per}
            overall = 1.0
        reports.append(CoverageReport(per, float(overall), method.upper() if method == "mla"
                                      else "Full", weights, error_bound=err, scheme=scheme))
    return reports


def rate_coverage(params: SystemParams, scheme: SchemeParams, method: str = "full",
                  numerics: NumericsParams | None = None) -> CoverageReport:
    """Rate coverage at ``scheme.tau`` (IN, SimpleOffload or ABS)."""
    return rate_coverage_curve(params, scheme, [scheme.tau], method, numerics)[0]


def offloaded_class_rates(params: SystemParams, tau: float, method: str = "mla",
                          numerics=None):
    """(R_2OC, R_2OCbar, R_2OC - R_2OCbar) under the IN load model."""
    n, w, _ = _loads("2", params, method, _numerics(numerics))
    vals = offloaded_terms(params, _threshold(n, tau, params.bandwidth), numerics)
    return tuple(float(np.dot(w, vals[:, j])) for j in range(3))


def macro_order_rates(params: SystemParams, tau: float, method: str = "mla", numerics=None,
                      frac: float = 1.0):
    """Load-averaged class-1 order terms, shape (n1,)."""
    n, w, _ = _loads("1", params, method, _numerics(numerics))
    vals = macro_terms(params, _threshold(n, tau, params.bandwidth, frac), numerics)
    return w @ vals
