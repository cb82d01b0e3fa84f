"""Monte Carlo oracle for the spatial model.

Each drop samples macro/pico BS and user PPPs in a disc centred on a
typical user at the origin, associates every user, schedules one user per
BS (the typical user is always scheduled), counts active offloaded users
per macro BS and ranks them with random keys. A uniform U-subset is then
"rank < U", so one set of drops serves every U; likewise rates for every
threshold come from the stored SIR components and loads.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _mc_kernels as K
from .config import NumericsParams, Scheme, SchemeParams, SystemParams

CLS_MACRO, CLS_UNOFF, CLS_OFF = 0, 1, 2
Z95 = 1.959963984540054


def window_radius(params: SystemParams, numerics: NumericsParams | None = None) -> float:
    if numerics is not None and numerics.mc_window_radius is not None:
        return float(numerics.mc_window_radius)
    return 6.0 / math.sqrt(math.pi * min(params.lambda1, params.lambda2))


def drop_rng(seed: int, drop: int) -> np.random.Generator:
    """Independent stream per drop, derived from (seed, drop) only."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(drop,))))


def _disc(rng, lam, radius):
    n = rng.poisson(lam * math.pi * radius * radius)
    r = radius * np.sqrt(rng.random(n))
    th = 2.0 * math.pi * rng.random(n)
    return np.column_stack((r * np.cos(th), r * np.sin(th)))


# ---------------------------------------------------------------- realization

@dataclass
class NetworkRealization:
    """One snapshot. User 0 is the typical user at the origin.

    Class codes: 0 macro user, 1 unoffloaded pico user, 2 offloaded user.
    ``in_users`` lists, per macro BS, the offloaded users it nulls.
    """

    macro_xy: np.ndarray
    pico_xy: np.ndarray
    user_xy: np.ndarray
    user_tier: np.ndarray
    user_bs: np.ndarray
    user_class: np.ndarray
    user_near_macro: np.ndarray
    macro_load: np.ndarray
    pico_load: np.ndarray
    macro_sched: np.ndarray
    pico_sched: np.ndarray
    active_offloaded: np.ndarray
    in_users: list
    in_dof_param: int
    resamples: int = 0

    @property
    def loads(self):
        return self.macro_load, self.pico_load

    def typical_class(self) -> str:
        c = int(self.user_class[0])
        if c == CLS_MACRO:
            return "1"
        if c == CLS_UNOFF:
            return "2Obar"
        return "2OC" if 0 in self.in_users[int(self.user_near_macro[0])] else "2OCbar"


def _drop(params: SystemParams, radius: float, rng):
    p = params
    resamples = 0
    while True:
        mxy = _disc(rng, p.lambda1, radius)
        pxy = _disc(rng, p.lambda2, radius)
        if len(mxy) and len(pxy):
            break
        resamples += 1
    uxy = np.vstack((np.zeros((1, 2)), _disc(rng, p.lambda_u, radius)))
    um = rng.random(len(mxy))
    up = rng.random(len(pxy))
    key = rng.random(len(pxy))
    out = K.associate_drop(uxy, mxy, pxy, radius, 1.0 / math.sqrt(p.lambda1),
                           1.0 / math.sqrt(p.lambda2), math.log(p.p1), math.log(p.p2),
                           p.alpha1, p.alpha2, math.log(p.bias), um, up, key)
    return mxy, pxy, uxy, out, resamples


def sample_realization(params: SystemParams, seed: int, drop_index: int, U: int = 0,
                       window: float | None = None) -> NetworkRealization:
    radius = window_radius(params) if window is None else window
    rng = drop_rng(seed, drop_index)
    mxy, pxy, uxy, out, resamples = _drop(params, radius, rng)
    (tier, off, near_m, near_p, _, _, m_load, p_load, _, m_sched, p_sched, act, rank) = out
    ucls = np.where(tier == 1, CLS_MACRO, np.where(off, CLS_OFF, CLS_UNOFF)).astype(np.int8)
    in_users = [[] for _ in range(len(mxy))]
    for i in np.flatnonzero(rank >= 0):
        if rank[i] < U:
            in_users[near_m[i]].append(int(i))
    return NetworkRealization(mxy, pxy, uxy, tier.copy(), np.where(tier == 1, near_m, near_p),
                              ucls, near_m.copy(), m_load, p_load, m_sched, p_sched, act,
                              [sorted(s) for s in in_users], U, resamples)


# ---------------------------------------------------------------- drop samples

@dataclass
class DropSample:
    """Per-drop typical-user quantities, independent of U, eta and tau."""

    params: SystemParams
    cls: np.ndarray          # 0/1/2
    y: np.ndarray            # serving distance
    load: np.ndarray         # users at the serving BS
    load_class: np.ndarray   # users of the typical user's class at the serving BS
    count: np.ndarray        # class 0: active offloaded at serving macro; class 2: incl. self
    rank: np.ndarray         # class 2: rank among candidates of the nearest macro
    signal: np.ndarray       # cumulative Exp(1) sums times serving path gain, (drops, N)
    i_rest: np.ndarray       # interference without serving BS (and nearest macro for class 2)
    i_dom: np.ndarray        # nearest-macro term for class 2, else 0
    i_pico: np.ndarray       # pico-only interference without serving BS
    resamples: int = 0
    seed: int = 0

    @property
    def drops(self) -> int:
        return self.cls.size

    def in_classes(self, U: int) -> np.ndarray:
        """0: macro, 1: unoffloaded, 2: offloaded and nulled, 3: offloaded, not nulled."""
        out = self.cls.astype(np.int8).copy()
        off = self.cls == CLS_OFF
        out[off & (self.rank >= U)] = 3
        return out

    def sir_in(self, U: int) -> tuple[np.ndarray, np.ndarray]:
        p = self.params
        cls4 = self.in_classes(U)
        shape = np.where(self.cls == CLS_MACRO, p.n1 - np.minimum(U, self.count), p.n2)
        sig = self.signal[np.arange(self.drops), shape - 1]
        interf = self.i_rest + np.where(cls4 == 2, 0.0, self.i_dom)
        return cls4, sig / interf

    def sir_abs(self) -> np.ndarray:
        p = self.params
        shape = np.where(self.cls == CLS_MACRO, p.n1, p.n2)
        sig = self.signal[np.arange(self.drops), shape - 1]
        interf = np.where(self.cls == CLS_OFF, self.i_pico, self.i_rest + self.i_dom)
        return sig / interf


def simulate_drops(params: SystemParams, drops: int, seed: int | None = None,
                   numerics: NumericsParams | None = None, window: float | None = None,
                   start: int = 0) -> DropSample:
    """Run ``drops`` independent drops with per-drop substreams of ``seed``."""
    nu = NumericsParams() if numerics is None else numerics
    seed = nu.rng_seed if seed is None else seed
    radius = window_radius(params, nu) if window is None else window
    p = params
    nmax = max(p.n1, p.n2)
    cls = np.empty(drops, np.int8)
    y = np.empty(drops)
    load = np.empty(drops, np.int64)
    load_cls = np.empty(drops, np.int64)
    count = np.zeros(drops, np.int64)
    rank = np.full(drops, -1, np.int64)
    signal = np.empty((drops, nmax))
    i_rest = np.empty(drops)
    i_dom = np.zeros(drops)
    i_pico = np.empty(drops)
    resamples = 0
    for d in range(drops):
        rng = drop_rng(seed, start + d)
        mxy, pxy, uxy, out, rs = _drop(p, radius, rng)
        resamples += rs
        (tier, off, near_m, near_p, dm2, dp2, m_load, p_load, p_off_load, _, _, act,
         rk) = out
        jm, jp = near_m[0], near_p[0]
        gm = rng.exponential(size=len(mxy))
        gp = rng.exponential(size=len(pxy))
        expo = np.cumsum(rng.exponential(size=nmax))
        if tier[0] == 1:
            c = CLS_MACRO
            yy = math.sqrt(dm2[0])
            load[d] = load_cls[d] = m_load[jm]
            count[d] = act[jm]
            im, ip = K.interference_sums(mxy, pxy, gm, gp, p.p1, p.p2, p.alpha1, p.alpha2, jm, -1)
            i_rest[d] = im + ip
            _, i_pico[d] = 0.0, ip
            signal[d] = p.p1 * yy ** -p.alpha1 * expo
        else:
            yy = math.sqrt(dp2[0])
            load[d] = p_load[jp]
            im, ip = K.interference_sums(mxy, pxy, gm, gp, p.p1, p.p2, p.alpha1, p.alpha2, -1, jp)
            i_pico[d] = ip
            signal[d] = p.p2 * yy ** -p.alpha2 * expo
            if off[0]:
                c = CLS_OFF
                load_cls[d] = p_off_load[jp]
                count[d] = act[jm]
                rank[d] = rk[0]
                dom = p.p1 * gm[jm] * dm2[0] ** (-0.5 * p.alpha1)
                i_dom[d] = dom
                i_rest[d] = im - dom + ip
            else:
                c = CLS_UNOFF
                load_cls[d] = p_load[jp] - p_off_load[jp]
                i_rest[d] = im + ip
        cls[d] = c
        y[d] = yy
    return DropSample(p, cls, y, load, load_cls, count, rank, signal, i_rest, i_dom, i_pico,
                      resamples, seed)


# ---------------------------------------------------------------- estimators

def _prop_ci(hits, n):
    p = hits / n if n else float("nan")
    return p, (Z95 * math.sqrt(max(p * (1 - p), 0.0) / n) if n else float("nan"))


@dataclass
class McEstimate:
    estimate: float
    ci: float
    per_class: dict[str, float]
    class_ci: dict[str, float]
    class_fraction: dict[str, float]
    drops: int


def _summarize(ok, labels, names):
    n = ok.size
    est, ci = _prop_ci(float(ok.sum()), n)
    per, pci, frac = {}, {}, {}
    for code, name in names.items():
        m = labels == code
        cnt = int(m.sum())
        frac[name] = cnt / n
        if cnt:
            per[name], pci[name] = _prop_ci(float(ok[m].sum()), cnt)
    return McEstimate(est, ci, per, pci, frac, n)


_IN_NAMES = {0: "1", 1: "2Obar", 2: "2OC", 3: "2OCbar"}
_ABS_NAMES = {0: "1", 1: "2Obar", 2: "2O"}


def estimate_sir_coverage(params: SystemParams, U: int, betas, drops: int | None = None,
                          seed: int | None = None, sample: DropSample | None = None,
                          numerics: NumericsParams | None = None) -> list[McEstimate]:
    """SIR coverage for IN with nulling DoF U at each threshold."""
    if sample is None:
        nu = NumericsParams() if numerics is None else numerics
        sample = simulate_drops(params, drops or nu.mc_drops, seed, nu)
    cls4, sir = sample.sir_in(U)
    return [_summarize(sir > b, cls4, _IN_NAMES) for b in np.atleast_1d(betas)]


def estimate_rate_coverage(params: SystemParams, scheme: SchemeParams, taus,
                           drops: int | None = None, seed: int | None = None,
                           sample: DropSample | None = None,
                           numerics: NumericsParams | None = None) -> list[McEstimate]:
    """Rate coverage with the realized serving-BS load of each drop."""
    if sample is None:
        nu = NumericsParams() if numerics is None else numerics
        sample = simulate_drops(params, drops or nu.mc_drops, seed, nu)
    W = params.bandwidth
    out = []
    if scheme.scheme is Scheme.ABS:
        eta = scheme.abs_eta
        sir = sample.sir_abs()
        frac = np.where(sample.cls == CLS_OFF, eta, 1.0 - eta)
        rate_unit = frac * W * np.log2(1.0 + sir) / sample.load_class
        labels = sample.cls
        names = _ABS_NAMES
    else:
        labels, sir = sample.sir_in(scheme.effective_u)
        rate_unit = W * np.log2(1.0 + sir) / sample.load
        names = _IN_NAMES
    for tau in np.atleast_1d(taus):
        ok = rate_unit > tau if tau > 0 else np.ones(sample.drops, bool)
        out.append(_summarize(ok, labels, names))
    return out


def estimate_class_fractions(sample: DropSample) -> dict[str, tuple[float, float]]:
    n = sample.drops
    return {name: _prop_ci(float(np.sum(sample.cls == c)), n)
            for c, name in {0: "1", 1: "2Obar", 2: "2O"}.items()}


@dataclass
class OffloadPmfEstimate:
    active_offloaded: np.ndarray          # histogram of U2Oa seen by macro typical users
    active_offloaded_nearest: np.ndarray  # histogram of U_hat seen by offloaded typical users
    in_probability: dict[int, tuple[float, float]]
    samples_macro: int
    samples_offloaded: int
    sufficient: bool


def estimate_offload_pmfs(params: SystemParams, drops: int | None = None, seed=None,
                          U_values=(1, 2, 3, 4), sample: DropSample | None = None,
                          min_samples: int = 100) -> OffloadPmfEstimate:
    if sample is None:
        sample = simulate_drops(params, drops or NumericsParams().mc_drops, seed)
    mac = sample.count[sample.cls == CLS_MACRO]
    offm = sample.cls == CLS_OFF
    hat = sample.count[offm]
    n_off = int(offm.sum())
    h_mac = np.bincount(mac, minlength=1) / max(mac.size, 1)
    h_hat = np.bincount(hat, minlength=2) / max(n_off, 1) if n_off else np.zeros(2)
    pin = {}
    for U in U_values:
        pin[U] = _prop_ci(float(np.sum(sample.rank[offm] < U)), n_off) if n_off else (
            float("nan"), float("nan"))
    return OffloadPmfEstimate(h_mac, h_hat, pin, int(mac.size), n_off,
                              n_off >= min_samples and mac.size >= min_samples)


def estimate_active_offloaded_per_bs(params: SystemParams, drops: int, seed: int = 0,
                                     inner_fraction: float = 0.5) -> np.ndarray:
    """Histogram of active offloaded users over macro BSs in the inner window."""
    radius = window_radius(params)
    counts = []
    for d in range(drops):
        mxy, _, _, out, _ = _drop(params, radius, drop_rng(seed, d))
        inner = np.hypot(mxy[:, 0], mxy[:, 1]) < inner_fraction * radius
        counts.append(out[11][inner])
    allc = np.concatenate(counts)
    return np.bincount(allc, minlength=1) / max(allc.size, 1)


# ---------------------------------------------------------------- functionals

@dataclass
class FunctionalEstimate:
    laplace: float
    laplace_se: float
    moments: np.ndarray      # s^m E[I^m e^{-sI}], m = 0..mmax
    moments_se: np.ndarray


def _ppp_annulus_sums(rng, lam, alpha, r_in, r_out, n):
    counts = rng.poisson(lam * math.pi * (r_out ** 2 - r_in ** 2), size=n)
    tot = int(counts.sum())
    rad2 = r_in ** 2 + rng.random(tot) * (r_out ** 2 - r_in ** 2)
    contrib = rng.exponential(size=tot) * rad2 ** (-0.5 * alpha)
    idx = np.repeat(np.arange(n), counts)
    return np.bincount(idx, weights=contrib, minlength=n)


def estimate_interference_functional(params: SystemParams, tier: int, s: float, r: float,
                                     drops: int, seed: int = 0, mmax: int = 4,
                                     r_out: float | None = None,
                                     batch: int = 20_000) -> FunctionalEstimate:
    """E[e^{-sI}] and s^m E[I^m e^{-sI}] for tier PPP interference beyond r.

    Points beyond an outer radius are replaced by their mean contribution.
    The radius defaults to a value where the variance of the replaced part,
    times s^2, is below 1e-6, well under the sampling error.
    """
    if r <= 0:
        raise ValueError("r must be > 0")
    lam = params.lambda1 if tier == 1 else params.lambda2
    alpha = params.alpha1 if tier == 1 else params.alpha2
    if r_out is None:
        # far-field variance with Exp(1) marks: 4 pi lam r^(2-2a) / (2a-2)
        need = (max(s, 1e-300) ** 2 * 4 * math.pi * lam / ((2 * alpha - 2) * 1e-6)) ** (
            1 / (2 * alpha - 2))
        r_out = max(need, r + 10.0 / math.sqrt(math.pi * lam))
    far = s * 2 * math.pi * lam * r_out ** (2 - alpha) / (alpha - 2)
    rng = drop_rng(seed, 0)
    acc = np.zeros((mmax + 1, 2))
    per_draw = lam * math.pi * (r_out ** 2 - r ** 2)
    batch = max(1, min(batch, int(4e6 / max(per_draw, 1.0))))
    done = 0
    while done < drops:
        n = min(batch, drops - done)
        sI = s * _ppp_annulus_sums(rng, lam, alpha, r, r_out, n) + far
        e = np.exp(-sI)
        for m in range(mmax + 1):
            v = sI ** m * e
            acc[m, 0] += v.sum()
            acc[m, 1] += (v * v).sum()
        done += n
    mean = acc[:, 0] / drops
    var = np.maximum(acc[:, 1] / drops - mean ** 2, 0.0)
    se = np.sqrt(var / drops)
    return FunctionalEstimate(float(mean[0]), float(se[0]), mean, se)


def estimate_conditional_coverage(params: SystemParams, geom, beta: float, draws: int,
                                  seed: int = 0, batch: int = 20_000) -> tuple[float, float]:
    """Coverage at pinned distances: Gamma signal, PPP interference beyond the exclusions.

    For class '2OCbar' the nearest macro at distance r1 adds one Exp(1)
    interferer; for '2OC' it is nulled.
    """
    p = params
    rng = drop_rng(seed, 1)
    pj = p.p1 if geom.serving_tier == 1 else p.p2
    aj = p.alpha1 if geom.serving_tier == 1 else p.alpha2
    out_r1 = geom.r1 + 12.0 / math.sqrt(math.pi * p.lambda1) * 4
    out_r2 = geom.r2 + 12.0 / math.sqrt(math.pi * p.lambda2) * 4
    hits = 0
    done = 0
    while done < draws:
        n = min(batch, draws - done)
        i1 = _ppp_annulus_sums(rng, p.lambda1, p.alpha1, geom.r1, out_r1, n) if math.isfinite(
            geom.r1) else np.zeros(n)
        i2 = _ppp_annulus_sums(rng, p.lambda2, p.alpha2, geom.r2, out_r2, n)
        interf = p.p1 * i1 + p.p2 * i2
        if geom.k == "2OCbar":
            interf = interf + p.p1 * rng.exponential(size=n) * geom.r1 ** -p.alpha1
        sig = pj * geom.y_serving ** -aj * rng.gamma(geom.signal_shape, size=n)
        hits += int(np.sum(sig > beta * interf))
        done += n
    return _prop_ci(hits, draws)


# ---------------------------------------------------------------- explicit precoders

@dataclass
class ExplicitDraw:
    """Typical-user gains from explicit channels and zero-forcing precoders."""

    cls: str
    signal_gain: float
    shape: int
    macro_gains: np.ndarray
    pico_gains: np.ndarray
    precoder: np.ndarray = field(repr=False, default=None)


def _cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def _zf_first(H):
    """First column of H^H (H H^H)^-1, normalized; row k of H gives gain |H[k] @ f|^2."""
    Hh = H.conj().T
    W = Hh @ np.linalg.inv(H @ Hh)
    f = W[:, 0]
    return f / np.linalg.norm(f)


def explicit_channel_draw(real: NetworkRealization, params: SystemParams,
                          rng: np.random.Generator) -> ExplicitDraw:
    """Draw complex channels, build every BS precoder, return the typical user's gains."""
    p = params
    n1, n2 = p.n1, p.n2
    cls = real.typical_class()
    serving_m = int(real.user_near_macro[0]) if real.user_tier[0] == 1 else -1
    serving_p = int(real.user_bs[0]) if real.user_tier[0] == 2 else -1
    mg = np.empty(len(real.macro_xy))
    f0 = None
    sig = None
    for j in range(len(real.macro_xy)):
        nulls = real.in_users[j]
        H = _cn(rng, 1 + len(nulls), n1)        # row 0: scheduled (or virtual) user
        f = _zf_first(H)
        if j == serving_m:
            sig = float(np.abs(H[0] @ f) ** 2)
            f0 = f
            mg[j] = 0.0
        elif 0 in nulls:
            # the typical user's channel is one of the nulled rows
            k = nulls.index(0) + 1
            mg[j] = float(np.abs(H[k] @ f) ** 2)
        else:
            h0 = _cn(rng, n1)
            mg[j] = float(np.abs(h0.conj() @ f) ** 2)
    pg = np.empty(len(real.pico_xy))
    for j in range(len(real.pico_xy)):
        h = _cn(rng, n2)
        f = h / np.linalg.norm(h)
        if j == serving_p:
            sig = float(np.abs(h.conj() @ f) ** 2)
            f0 = f
            pg[j] = 0.0
        else:
            pg[j] = float(np.abs(_cn(rng, n2).conj() @ f) ** 2)
    shape = n1 - len(real.in_users[serving_m]) if serving_m >= 0 else n2
    return ExplicitDraw(cls, sig, shape, mg, pg, f0)


def explicit_sir_sample(params: SystemParams, U: int, drops: int, seed: int = 0,
                        window: float | None = None):
    """(class, SIR, signal gain, shape) per drop via explicit precoders."""
    p = params
    out = []
    for d in range(drops):
        real = sample_realization(p, seed, d, U, window)
        draw = explicit_channel_draw(real, p, drop_rng(seed + 1, d))
        dm = np.hypot(real.macro_xy[:, 0], real.macro_xy[:, 1])
        dp = np.hypot(real.pico_xy[:, 0], real.pico_xy[:, 1])
        interf = p.p1 * np.sum(draw.macro_gains * dm ** -p.alpha1) + p.p2 * np.sum(
            draw.pico_gains * dp ** -p.alpha2)
        if real.user_tier[0] == 1:
            s = p.p1 * draw.signal_gain * dm[real.user_near_macro[0]] ** -p.alpha1
        else:
            s = p.p2 * draw.signal_gain * dp[real.user_bs[0]] ** -p.alpha2
        out.append((draw.cls, s / interf, draw.signal_gain, draw.shape))
    return out


# ---------------------------------------------------------------- binary dump

_MAGIC = b"HNRZ"
_VERSION = 1
_HEADER = struct.Struct("<4sHHIIIi")


def write_realization(path: str | Path, real: NetworkRealization) -> None:
    """Little-endian dump.

    Header: magic 'HNRZ', u16 version, u16 reserved, u32 macro count,
    u32 pico count, u32 user count, i32 U. Then float64 macro xy, pico xy,
    user xy; int32 user tier, serving BS, class, nearest macro; int32 macro
    and pico loads and schedules; int32 active offloaded counts; then for
    each macro an int32 count followed by its nulled user indices.
    """
    m, pc, u = len(real.macro_xy), len(real.pico_xy), len(real.user_xy)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, 0, m, pc, u, real.in_dof_param))
        for arr in (real.macro_xy, real.pico_xy, real.user_xy):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        for arr in (real.user_tier, real.user_bs, real.user_class, real.user_near_macro,
                    real.macro_load, real.pico_load, real.macro_sched, real.pico_sched,
                    real.active_offloaded):
            fh.write(np.ascontiguousarray(arr, dtype="<i4").tobytes())
        for lst in real.in_users:
            fh.write(np.array([len(lst)] + list(lst), dtype="<i4").tobytes())


def read_realization(path: str | Path) -> NetworkRealization:
    data = Path(path).read_bytes()
    magic, ver, _, m, pc, u, U = _HEADER.unpack_from(data, 0)
    if magic != _MAGIC or ver != _VERSION:
        raise ValueError("not a realization dump of a supported version")
    off = _HEADER.size

    def take(n, dt):
        nonlocal off
        arr = np.frombuffer(data, dtype=dt, count=n, offset=off).copy()
        off += n * np.dtype(dt).itemsize
        return arr

    mxy = take(2 * m, "<f8").reshape(m, 2)
    pxy = take(2 * pc, "<f8").reshape(pc, 2)
    uxy = take(2 * u, "<f8").reshape(u, 2)
    tier, bs, ucls, nm = (take(u, "<i4") for _ in range(4))
    ml, pl = take(m, "<i4"), take(pc, "<i4")
    ms, ps = take(m, "<i4"), take(pc, "<i4")
    act = take(m, "<i4")
    in_users = []
    for _ in range(m):
        k = int(take(1, "<i4")[0])
        in_users.append([int(v) for v in take(k, "<i4")])
    return NetworkRealization(mxy, pxy, uxy, tier.astype(np.int8), bs.astype(np.int64),
                              ucls.astype(np.int8), nm.astype(np.int64), ml.astype(np.int64),
                              pl.astype(np.int64), ms.astype(np.int64), ps.astype(np.int64),
                              act.astype(np.int64), in_users, int(U))
