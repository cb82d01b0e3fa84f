"""Association-layer statistics.

Tier/class probabilities, serving-distance densities, load and
offloaded-user-count distributions, and the IN probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special, stats

from .config import NumericsParams, SystemParams


class TruncationError(RuntimeError):
    pass


class QuadratureFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class AssociationStats:
    a1: float
    a2: float
    a2obar: float
    a2o: float
    rho: float

    def weight(self, k: str) -> float:
        return {"1": self.a1, "2": self.a2, "2Obar": self.a2obar, "2O": self.a2o}[k]


# ---------------------------------------------------------------- association

def _quad_exp(fn, name: str) -> float:
    # integrands are e^{-u} times a bounded factor, after u = pi*lambda*z^2
    val, err = integrate.quad(fn, 0.0, np.inf, epsabs=1e-14, epsrel=1e-11, limit=400)
    if not math.isfinite(val) or err > 1e-7:
        raise QuadratureFailure(f"{name}: quadrature did not converge (err={err:.3g})")
    return val


@lru_cache(maxsize=512)
def _assoc(lambda1, lambda2, ratio, alpha1, alpha2, bias) -> AssociationStats:
    pl1, pl2 = math.pi * lambda1, math.pi * lambda2

    # A2: pico wins the biased comparison; u = pi*lambda2*z^2
    k_b = pl1 * (ratio / bias) ** (2 / alpha1)
    k_1 = pl1 * ratio ** (2 / alpha1)
    e21 = alpha2 / alpha1

    def f_a2(u):
        return math.exp(-u - k_b * (u / pl2) ** e21)

    def f_a2obar(u):
        return math.exp(-u - k_1 * (u / pl2) ** e21)

    def f_a2o(u):
        t = (u / pl2) ** e21
        return (math.exp(-k_b * t) - math.exp(-k_1 * t)) * math.exp(-u)

    k_m = pl2 * (bias / ratio) ** (2 / alpha2)
    e12 = alpha1 / alpha2

    def f_a1(u):
        return math.exp(-u - k_m * (u / pl1) ** e12)

    a1 = _quad_exp(f_a1, "A1")
    a2 = _quad_exp(f_a2, "A2")
    a2obar = _quad_exp(f_a2obar, "A2Obar")
    a2o = 0.0 if bias == 1.0 else _quad_exp(f_a2o, "A2O")
    rho = lambda2 * a2o / (a2 * lambda1)
    return AssociationStats(a1, a2, a2obar, a2o, rho)


def assoc_stats(params: SystemParams, bias: float | None = None) -> AssociationStats:
    """Association probabilities; memoized per parameter point."""
    b = params.bias if bias is None else bias
    return _assoc(params.lambda1, params.lambda2, params.p1 / params.p2,
                  params.alpha1, params.alpha2, b)


# ---------------------------------------------------------------- p.m.f. tables

@dataclass(frozen=True)
class PmfTable:
    """Truncated p.m.f. on ``offset, offset+1, ...`` with explicit tail mass."""

    offset: int
    probs: np.ndarray
    tail: float
    defect: float = 0.0
    renormalized: bool = False

    @property
    def support(self) -> np.ndarray:
        return self.offset + np.arange(self.probs.size)

    def pmf(self, n):
        n = np.asarray(n)
        idx = n - self.offset
        ok = (idx >= 0) & (idx < self.probs.size)
        out = np.where(ok, self.probs[np.clip(idx, 0, self.probs.size - 1)], 0.0)
        return float(out) if out.ndim == 0 else out

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def cdf(self, n) -> float:
        return float(self.probs[: max(0, n - self.offset + 1)].sum())

    def total(self) -> float:
        return float(self.probs.sum() + self.tail)


def _numerics(numerics):
    return NumericsParams() if numerics is None else numerics


def _negbin_table(log_pmf, r: float, q: float, offset: int, numerics, name: str) -> PmfTable:
    """Table for a law whose shifted version is NB(r, q) (success prob q).

    Probabilities come from the closed-form ``log_pmf(n)``; the tail mass is
    the negative-binomial survival function at the truncation point.
    """
    nu = _numerics(numerics)
    if q >= 1.0:
        return PmfTable(offset, np.array([1.0]), 0.0)
    k = np.arange(nu.load_sum_max)
    sf = stats.nbinom.sf(k, r, q)
    hit = np.nonzero(sf <= nu.pmf_tail_eps)[0]
    if hit.size == 0:
        raise TruncationError(f"{name}: tail mass {sf[-1]:.3g} exceeds pmf_tail_eps at "
                              f"load_sum_max={nu.load_sum_max}")
    kmax = int(hit[0])
    n = offset + np.arange(kmax + 1)
    probs = np.exp(log_pmf(n))
    tail = float(sf[kmax])
    defect = abs(probs.sum() + tail - 1.0)
    renorm = False
    if defect > 1e-6:
        probs = probs * (1.0 - tail) / probs.sum()
        renorm = True
    return PmfTable(offset, probs, tail, defect, renorm)


_R = 3.5
_LG_R = special.gammaln(_R)


def _lp_count(n, x):
    """log of 3.5^3.5 G(n+3.5)/(G(3.5) n!) x^n (3.5+x)^-(n+3.5), n >= 0."""
    n = np.asarray(n, dtype=float)
    return (_R * math.log(_R) + special.gammaln(n + _R) - _LG_R - special.gammaln(n + 1)
            + special.xlogy(n, x) - (n + _R) * math.log(_R + x))


def _lp_sized(n, x):
    """log of 3.5^3.5 G(n+3.5)/(G(3.5) G(n)) x^(n-1) (3.5+x)^-(n+3.5), n >= 1."""
    n = np.asarray(n, dtype=float)
    return (_R * math.log(_R) + special.gammaln(n + _R) - _LG_R - special.gammaln(n)
            + special.xlogy(n - 1, x) - (n + _R) * math.log(_R + x))


def pmf_active_offloaded(params: SystemParams, numerics: NumericsParams | None = None) -> PmfTable:
    """Active offloaded users associated (by nearest macro) with a macro BS."""
    rho = assoc_stats(params).rho
    return _negbin_table(lambda n: _lp_count(n, rho), _R, _R / (_R + rho), 0, numerics,
                         "U2Oa")


def pmf_active_offloaded_nearest(params: SystemParams,
                                 numerics: NumericsParams | None = None) -> PmfTable:
    """Same count seen from an offloaded typical user (size-biased), n >= 1."""
    rho = assoc_stats(params).rho
    return _negbin_table(lambda n: _lp_sized(n, rho), _R + 1.0, _R / (_R + rho), 1, numerics,
                         "U2Oa_hat")


def pmf_in_dof(params: SystemParams, U: int, numerics: NumericsParams | None = None) -> PmfTable:
    """min(U, U2Oa): the DoF a macro BS spends on nulling."""
    _check_u(params, U)
    base = pmf_active_offloaded(params, numerics)
    if U >= base.probs.size:
        return base
    probs = base.probs[: U + 1].copy()
    probs[U] = 1.0 - base.probs[:U].sum()
    # carry the upper tail explicitly folded into the last bin
    return PmfTable(0, probs, 0.0, base.defect, base.renormalized)


def prob_active_offloaded_at_least(params: SystemParams, U: int) -> float:
    """Pr(U2Oa >= U), evaluated without cancellation."""
    if U <= 0:
        return 1.0
    rho = assoc_stats(params).rho
    if rho == 0.0:
        return 0.0
    return float(stats.nbinom.sf(U - 1, _R, _R / (_R + rho)))


def _check_u(params, U):
    if not (isinstance(U, (int, np.integer)) and 0 <= U <= params.n1 - 1):
        raise ValueError(f"U must be an integer in [0, {params.n1 - 1}]")


def harmonic_term(rho: float) -> float:
    """Sum over n >= 1 of Pr(U2Oa_hat = n) / n, in closed form."""
    if rho == 0.0:
        return 1.0
    return -math.expm1(-_R * math.log1p(rho / _R)) / rho


def in_probability(params: SystemParams, U: int) -> float:
    """Probability that an offloaded typical user is selected for nulling."""
    _check_u(params, U)
    if U == 0:
        return 0.0
    rho = assoc_stats(params).rho
    n = np.arange(1, U + 1)
    p = np.exp(_lp_sized(n, rho))
    return float(U * (harmonic_term(rho) - np.sum(p / n)) + np.sum(p))


def in_probability_increment(params: SystemParams, U: int) -> float:
    """Pr(E(U)) - Pr(E(U-1)) = sum over n >= U of Pr(U_hat = n)/n, for U >= 1."""
    _check_u(params, U)
    if U == 0:
        return 0.0
    rho = assoc_stats(params).rho
    if rho == 0.0:
        return 1.0 if U == 1 else 0.0
    # Pr(U_hat = n)/n = Pr(U2Oa = n)/rho
    return float(stats.nbinom.sf(U - 1, _R, _R / (_R + rho)) / rho)


def in_probability_direct(params: SystemParams, U: int,
                          numerics: NumericsParams | None = None) -> float:
    """Truncated-sum evaluation of the IN probability (cross-check path)."""
    tab = pmf_active_offloaded_nearest(params, numerics)
    n = tab.support
    w = np.minimum(1.0, U / n)
    return float(np.dot(w, tab.probs))


# ---------------------------------------------------------------- loads

LOAD_KINDS = ("1", "2", "2Obar", "2O")


def _load_x(which: str, params: SystemParams) -> float:
    st = assoc_stats(params)
    if which not in LOAD_KINDS:
        raise ValueError(f"unknown load kind {which!r}")
    lam = params.lambda1 if which == "1" else params.lambda2
    return params.lambda_u * st.weight(which) / lam


def load_pmf(which: str, params: SystemParams, numerics: NumericsParams | None = None) -> PmfTable:
    """Load (users incl. the typical one) of the typical user's serving BS."""
    x = _load_x(which, params)
    return _negbin_table(lambda n: _lp_sized(n, x), _R + 1.0, _R / (_R + x), 1, numerics,
                         f"L[{which}]")


def mean_load(which: str, params: SystemParams) -> float:
    return 1.0 + 1.28 * _load_x(which, params)


# ---------------------------------------------------------------- distances

class DomainError(ValueError):
    pass


@dataclass
class DistancePdf:
    """Serving-distance density for one user class.

    ``kind`` is one of '1', '2Obar', '2' (any pico user), '2O_abs'
    (offloaded, marginal in the pico distance) or '2O' (joint in the macro
    distance x and pico distance y, supported on the offloading wedge).
    """

    kind: str
    params: SystemParams
    norm: float = field(init=False)

    def __post_init__(self):
        st = assoc_stats(self.params)
        self.norm = {"1": st.a1, "2Obar": st.a2obar, "2": st.a2, "2O_abs": st.a2o,
                     "2O": st.a2o}[self.kind]

    @property
    def joint(self) -> bool:
        return self.kind == "2O"

    def wedge(self, x):
        """(lower, upper) pico distance limits at macro distance x."""
        p = self.params
        base = (p.p2 / p.p1) ** (1 / p.alpha2) * np.asarray(x, float) ** (p.alpha1 / p.alpha2)
        return base, base * p.bias ** (1 / p.alpha2)

    def __call__(self, y, x=None):
        p = self.params
        y = np.asarray(y, dtype=float)
        if np.any(y < 0):
            raise DomainError("distance must be >= 0")
        pl1, pl2 = math.pi * p.lambda1, math.pi * p.lambda2
        ratio = p.p1 / p.p2
        if self.kind == "2O":
            if x is None:
                raise DomainError("joint density needs both x (macro) and y (pico)")
            x = np.asarray(x, dtype=float)
            lo, hi = self.wedge(x)
            if np.any((x < 0) | (y < lo * (1 - 1e-12)) | (y > hi * (1 + 1e-12))):
                raise DomainError("point outside the offloading wedge")
            return (4 * math.pi ** 2 * p.lambda1 * p.lambda2 / self.norm * x * y
                    * np.exp(-pl1 * x ** 2 - pl2 * y ** 2))
        if self.kind == "1":
            r2sq = (p.bias / ratio) ** (2 / p.alpha2) * y ** (2 * p.alpha1 / p.alpha2)
            return 2 * pl1 / self.norm * y * np.exp(-pl1 * y ** 2 - pl2 * r2sq)
        e = 2 * p.alpha2 / p.alpha1
        if self.kind == "2Obar":
            return 2 * pl2 / self.norm * y * np.exp(-pl2 * y ** 2 - pl1 * ratio ** (2 / p.alpha1) * y ** e)
        if self.kind == "2":
            return 2 * pl2 / self.norm * y * np.exp(
                -pl2 * y ** 2 - pl1 * (ratio / p.bias) ** (2 / p.alpha1) * y ** e)
        if self.kind == "2O_abs":
            if self.norm == 0.0:
                return np.zeros_like(y)
            t = y ** e
            return (2 * pl2 / self.norm * y * np.exp(-pl2 * y ** 2)
                    * (np.exp(-pl1 * (ratio / p.bias) ** (2 / p.alpha1) * t)
                       - np.exp(-pl1 * ratio ** (2 / p.alpha1) * t)))
        raise DomainError(f"unknown class {self.kind!r}")

    def cdf(self, y: float) -> float:
        if self.joint:
            raise DomainError("cdf is defined for one-distance densities only")
        return integrate.quad(lambda t: float(self(t)), 0.0, y, limit=200)[0]

    def total_mass(self) -> float:
        p = self.params
        if not self.joint:
            scale = 1.0 / math.sqrt(math.pi * min(p.lambda1, p.lambda2))
            head = integrate.quad(lambda t: float(self(t)), 0.0, 10 * scale, limit=400,
                                  epsrel=1e-10)[0]
            tail = integrate.quad(lambda t: float(self(t)), 10 * scale, np.inf, limit=400,
                                  epsrel=1e-10)[0]
            return head + tail

        def inner(x):
            lo, hi = self.wedge(x)
            return integrate.quad(lambda y: float(self(y, x)), float(lo), float(hi),
                                  epsrel=1e-10)[0]

        return integrate.quad(inner, 0.0, np.inf, limit=400, epsrel=1e-9)[0]


def distance_pdf(kind: str, params: SystemParams) -> DistancePdf:
    return DistancePdf(kind, params)
