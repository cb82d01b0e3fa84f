"""Model parameters, validation and the canonical ``key = value`` config format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path


class Scheme(str, Enum):
    IN = "IN"
    SIMPLE_OFFLOAD = "SimpleOffload"
    ABS = "ABS"


@dataclass(frozen=True)
class SystemParams:
    """Physical and network constants of the two-tier network.

    Tier 1 is the macro tier, tier 2 the pico tier. Powers and bias are
    linear; densities are per square metre.
    """

    lambda1: float
    lambda2: float
    lambda_u: float
    p1: float
    p2: float
    alpha1: float
    alpha2: float
    n1: int
    n2: int
    bias: float
    bandwidth: float = 10e6

    @property
    def power_ratio(self) -> float:
        return self.p1 / self.p2

    @property
    def bias_db(self) -> float:
        return 10.0 * math.log10(self.bias)

    def with_(self, **kw) -> "SystemParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class SchemeParams:
    scheme: Scheme = Scheme.IN
    in_dof: int = 0
    abs_eta: float = 0.5
    tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))

    @property
    def effective_u(self) -> int:
        return 0 if self.scheme is Scheme.SIMPLE_OFFLOAD else self.in_dof


@dataclass(frozen=True)
class NumericsParams:
    quad_rel_tol: float = 1e-8
    pmf_tail_eps: float = 1e-10
    load_sum_max: int = 512
    mc_drops: int = 10_000
    mc_window_radius: float | None = None  # None: 6 / sqrt(pi * lambda_min)
    rng_seed: int = 20160301


@dataclass(frozen=True)
class Violation:
    field: str
    message: str


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def fields(self) -> list[str]:
        return [v.field for v in self.violations]


class ConfigError(ValueError):
    pass


def validate(params: SystemParams, scheme: SchemeParams | None = None,
             numerics: NumericsParams | None = None) -> ValidationResult:
    out: list[Violation] = []

    def need(ok, name, msg):
        if not ok:
            out.append(Violation(name, msg))

    for name in ("lambda1", "lambda2", "lambda_u"):
        v = getattr(params, name)
        need(_finite(v) and v > 0, name, f"{name} must be > 0 (got {v!r})")
    need(_finite(params.p1) and params.p1 > 0, "p1", "p1 must be > 0")
    need(_finite(params.p2) and params.p2 > 0, "p2", "p2 must be > 0")
    for name in ("alpha1", "alpha2"):
        v = getattr(params, name)
        need(_finite(v) and v > 2, name, f"{name}={v!r} violates the model requirement alpha_j > 2")
    for name in ("n1", "n2"):
        v = getattr(params, name)
        need(isinstance(v, int) and v >= 1, name, f"{name} must be an integer >= 1")
    need(_finite(params.bias) and params.bias >= 1, "bias", "bias must be >= 1 (0 dB)")
    need(_finite(params.bandwidth) and params.bandwidth > 0, "bandwidth", "bandwidth must be > 0")

    if scheme is not None:
        if scheme.scheme is Scheme.IN:
            ok = isinstance(scheme.in_dof, int) and 0 <= scheme.in_dof <= params.n1 - 1
            need(ok, "in_dof", f"in_dof must lie in [0, n1-1] = [0, {params.n1 - 1}]")
        if scheme.scheme is Scheme.ABS:
            need(_finite(scheme.abs_eta) and 0 < scheme.abs_eta < 1, "abs_eta",
                 "abs_eta must lie in (0, 1)")
        need(_finite(scheme.tau) and scheme.tau >= 0, "tau", "tau must be >= 0")

    if numerics is not None:
        need(0 < numerics.quad_rel_tol <= 1e-3, "quad_rel_tol", "quad_rel_tol must lie in (0, 1e-3]")
        need(0 < numerics.pmf_tail_eps <= 1e-4, "pmf_tail_eps", "pmf_tail_eps must lie in (0, 1e-4]")
        need(numerics.load_sum_max >= 1, "load_sum_max", "load_sum_max must be >= 1")
        need(numerics.mc_drops >= 1, "mc_drops", "mc_drops must be >= 1")
        r = numerics.mc_window_radius
        need(r is None or r > 0, "mc_window_radius", "mc_window_radius must be > 0")
    return ValidationResult(tuple(out))


def require_valid(params, scheme=None, numerics=None) -> None:
    res = validate(params, scheme, numerics)
    if not res.ok:
        raise ConfigError("; ".join(f"{v.field}: {v.message}" for v in res.violations))


def normalize_power_ratio(params: SystemParams) -> SystemParams:
    """Rescale so that p2 = 1; results depend on powers only through p1/p2."""
    if params.p2 == 1.0:
        return params
    return replace(params, p1=params.p1 / params.p2, p2=1.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def _finite(x) -> bool:
    try:
        return math.isfinite(x)
    except TypeError:
        return False


# ---------------------------------------------------------------- file format

@dataclass(frozen=True)
class Config:
    system: SystemParams
    scheme: SchemeParams = field(default_factory=SchemeParams)
    numerics: NumericsParams = field(default_factory=NumericsParams)


_SYSTEM_KEYS = ("lambda1", "lambda2", "lambda_u", "p1_db_over_p2", "alpha1", "alpha2",
                "n1", "n2", "bias_db", "bandwidth_hz")
_SCHEME_KEYS = ("scheme", "in_dof", "abs_eta", "tau_bps")
_NUMERICS_KEYS = ("numerics.quad_rel_tol", "numerics.pmf_tail_eps", "numerics.load_sum_max",
                  "numerics.mc_drops", "numerics.mc_window_radius", "numerics.rng_seed")
KEYS = _SYSTEM_KEYS + _SCHEME_KEYS + _NUMERICS_KEYS

_INT_KEYS = {"n1", "n2", "in_dof", "numerics.load_sum_max", "numerics.mc_drops",
             "numerics.rng_seed"}


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _fmt_db(x: float) -> str:
    return format(x, ".15g")


def to_mapping(cfg: Config) -> dict[str, str]:
    s, sc, nu = cfg.system, cfg.scheme, cfg.numerics
    return {
        "lambda1": _fmt_float(s.lambda1),
        "lambda2": _fmt_float(s.lambda2),
        "lambda_u": _fmt_float(s.lambda_u),
        "p1_db_over_p2": _fmt_db(linear_to_db(s.p1 / s.p2)),
        "alpha1": _fmt_float(s.alpha1),
        "alpha2": _fmt_float(s.alpha2),
        "n1": str(s.n1),
        "n2": str(s.n2),
        "bias_db": _fmt_db(linear_to_db(s.bias)),
        "bandwidth_hz": _fmt_float(s.bandwidth),
        "scheme": sc.scheme.value,
        "in_dof": str(sc.in_dof),
        "abs_eta": _fmt_float(sc.abs_eta),
        "tau_bps": _fmt_float(sc.tau),
        "numerics.quad_rel_tol": _fmt_float(nu.quad_rel_tol),
        "numerics.pmf_tail_eps": _fmt_float(nu.pmf_tail_eps),
        "numerics.load_sum_max": str(nu.load_sum_max),
        "numerics.mc_drops": str(nu.mc_drops),
        "numerics.mc_window_radius": "auto" if nu.mc_window_radius is None
        else _fmt_float(nu.mc_window_radius),
        "numerics.rng_seed": str(nu.rng_seed),
    }


def serialize(cfg: Config) -> str:
    m = to_mapping(cfg)
    return "".join(f"{k} = {m[k]}\n" for k in KEYS)


def _convert(key: str, raw: str):
    raw = raw.strip()
    if key == "scheme":
        return Scheme(raw)
    if key == "numerics.mc_window_radius" and raw.lower() in ("auto", "none", ""):
        return None
    if key in _INT_KEYS:
        return int(raw)
    return float(raw)


def parse_mapping(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        k, v = (t.strip() for t in line.split("=", 1))
        if k not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {k!r}")
        out[k] = v
    return out


def from_mapping(m: dict[str, str], base: Config | None = None) -> Config:
    """Build a Config from string values; missing keys fall back to ``base``."""
    vals: dict[str, object] = {}
    if base is not None:
        vals.update({k: _convert(k, v) for k, v in to_mapping(base).items()})
    for k, v in m.items():
        if k not in KEYS:
            raise ConfigError(f"unknown key {k!r}")
        try:
            vals[k] = _convert(k, v)
        except ValueError as exc:
            raise ConfigError(f"bad value for {k}: {v!r}") from exc
    missing = [k for k in _SYSTEM_KEYS if k not in vals]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")
    system = SystemParams(
        lambda1=vals["lambda1"], lambda2=vals["lambda2"], lambda_u=vals["lambda_u"],
        p1=db_to_linear(vals["p1_db_over_p2"]), p2=1.0,
        alpha1=vals["alpha1"], alpha2=vals["alpha2"], n1=vals["n1"], n2=vals["n2"],
        bias=db_to_linear(vals["bias_db"]), bandwidth=vals["bandwidth_hz"])
    d = SchemeParams()
    scheme = SchemeParams(scheme=vals.get("scheme", d.scheme), in_dof=vals.get("in_dof", d.in_dof),
                          abs_eta=vals.get("abs_eta", d.abs_eta), tau=vals.get("tau_bps", d.tau))
    dn = NumericsParams()
    numerics = NumericsParams(
        quad_rel_tol=vals.get("numerics.quad_rel_tol", dn.quad_rel_tol),
        pmf_tail_eps=vals.get("numerics.pmf_tail_eps", dn.pmf_tail_eps),
        load_sum_max=vals.get("numerics.load_sum_max", dn.load_sum_max),
        mc_drops=vals.get("numerics.mc_drops", dn.mc_drops),
        mc_window_radius=vals.get("numerics.mc_window_radius", dn.mc_window_radius),
        rng_seed=vals.get("numerics.rng_seed", dn.rng_seed))
    return Config(system, scheme, numerics)


def parse(text: str, overrides: dict[str, str] | None = None) -> Config:
    m = parse_mapping(text)
    if overrides:
        m.update(overrides)
    return from_mapping(m)


def load(path: str | Path, overrides: dict[str, str] | None = None) -> Config:
    return parse(Path(path).read_text(encoding="utf-8"), overrides)


def make_params(*, lambda1=1e-4, lambda2=5e-4, lambda_u=0.01, p_ratio_db=10.0,
                alpha1=4.0, alpha2=None, n1=8, n2=4, bias_db=5.0,
                bandwidth=10e6) -> SystemParams:
    """Convenience constructor taking dB quantities."""
    return SystemParams(lambda1=lambda1, lambda2=lambda2, lambda_u=lambda_u,
                        p1=db_to_linear(p_ratio_db), p2=1.0, alpha1=alpha1,
                        alpha2=alpha1 if alpha2 is None else alpha2, n1=n1, n2=n2,
                        bias=db_to_linear(bias_db), bandwidth=bandwidth)
