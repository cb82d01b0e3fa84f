"""Experiment runner: coverage curves, optimizations, p.m.f. tables and validation.

Every command writes a CSV with a ``#`` metadata header and a plot script
that reads only that CSV. All files of one run are rendered in memory and
then moved into place, so a failing run leaves no partial output.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import subprocess
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import association as assoc
from . import coverage as cov
from . import montecarlo as mc
from . import optimize as opt
from ._quad import QuadratureError
from .config import (Config, ConfigError, Scheme, SchemeParams, from_mapping, load,
                     require_valid, serialize, to_mapping)

AXES = ("tau", "U", "eta", "B", "beta")
METHODS = ("full", "mla", "mc")
COMMANDS = ("coverage-curve", "optimize-u", "optimize-eta", "compare-schemes", "pmf",
            "validate")


class SpecError(ValueError):
    pass


# ---------------------------------------------------------------- experiment specs

@dataclass
class ExperimentSpec:
    name: str
    config: str
    command: str = "coverage-curve"
    axis: str = "tau"
    grid: tuple[float, ...] = ()
    methods: tuple[str, ...] = ("full",)
    out: str = "results"
    series_key: str | None = None
    series: tuple[str, ...] = ()
    overrides: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise SpecError(f"unknown command {self.command!r}")
        if self.axis not in AXES:
            raise SpecError(f"axis must be one of {', '.join(AXES)}")
        if not self.methods:
            raise SpecError("methods must be nonempty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise SpecError(f"unknown methods: {', '.join(bad)}")
        if self.command not in ("pmf", "validate"):
            if not self.grid:
                raise SpecError("grid must be nonempty")
            if list(self.grid) != sorted(self.grid):
                raise SpecError("grid must be sorted")


def parse_grid(text: str) -> tuple[float, ...]:
    """``1,2,3`` or ``geom:a:b:n`` or ``lin:a:b:n``."""
    text = text.strip()
    if not text:
        return ()
    if text.startswith(("geom:", "lin:")):
        kind, a, b, n = text.split(":")
        fn = np.geomspace if kind == "geom" else np.linspace
        return tuple(float(v) for v in fn(float(a), float(b), int(n)))
    return tuple(float(v) for v in text.split(","))


def parse_spec(text: str, base_dir: str | Path = ".") -> ExperimentSpec:
    vals: dict[str, str] = {}
    overrides: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = value'")
        k, v = (t.strip() for t in line.split("=", 1))
        if k.startswith("set."):
            overrides[k[4:]] = v
        else:
            vals[k] = v
    for req in ("name", "config"):
        if req not in vals:
            raise SpecError(f"missing {req!r}")
    cfg = Path(vals["config"])
    if not cfg.is_absolute():
        cfg = Path(base_dir) / cfg
    series_key, series = None, ()
    if vals.get("series"):
        series_key, raw = vals["series"].split(":", 1)
        series = tuple(s.strip() for s in raw.split(","))
    spec = ExperimentSpec(
        name=vals["name"], config=str(cfg), command=vals.get("command", "coverage-curve"),
        axis=vals.get("axis", "tau"), grid=parse_grid(vals.get("grid", "")),
        methods=tuple(m.strip().lower() for m in vals.get("methods", "full").split(",")
                      if m.strip()),
        out=vals.get("out", "results"), series_key=series_key, series=series,
        overrides=overrides)
    spec.validate()
    return spec


def load_spec(path: str | Path) -> ExperimentSpec:
    path = Path(path)
    # configs are referenced relative to the repository root or the spec file
    text = path.read_text(encoding="utf-8")
    spec = parse_spec(text, base_dir=".")
    if not Path(spec.config).exists():
        spec = parse_spec(text, base_dir=path.parent)
    return spec


# ---------------------------------------------------------------- output helpers

def git_revision() -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True,
                             text=True, cwd=Path(__file__).resolve().parent, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else format(float(v), ".10g")
    return "" if v is None else str(v)


def render_csv(columns, rows, cfg: Config, meta: dict[str, str]) -> str:
    buf = io.StringIO()
    buf.write(f"# command: {meta.get('command', '')}\n")
    for k in sorted(meta):
        if k != "command":
            buf.write(f"# {k}: {meta[k]}\n")
    buf.write(f"# git_revision: {git_revision()}\n")
    buf.write("# columns: " + ",".join(columns) + "\n")
    for line in serialize(cfg).splitlines():
        buf.write(f"# config: {line}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(r.get(c)) for c in columns) + "\n")
    return buf.getvalue()


def read_csv(path: str | Path) -> tuple[list[str], list[dict[str, str]]]:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()
             if not ln.startswith("#")]
    cols = lines[0].split(",")
    return cols, [dict(zip(cols, ln.split(","))) for ln in lines[1:]]


def plot_script(csv_name: str, x: str, y, group: list[str], logx: bool,
                ci: str | None = None) -> str:
    """A standalone script that plots column(s) ``y`` against ``x`` from the CSV alone."""
    ys = [y] if isinstance(y, str) else list(y)
    return f'''"""Plot {", ".join(ys)} against {x} from {csv_name}."""
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, {csv_name!r}), encoding="utf-8") as fh:
    rows = list(csv.DictReader(ln for ln in fh if not ln.startswith("#")))
curves = defaultdict(list)
for r in rows:
    for y in {ys!r}:
        if r[y] == "":
            continue
        key = " ".join([y] * {len(ys) > 1!r} + [f"{{g}}={{r[g]}}" for g in {group!r}])
        curves[key].append((float(r[{x!r}]), float(r[y]),
                            float(r[{ci!r}]) if {ci!r} and r.get({ci!r}) else 0.0))
fig, ax = plt.subplots(figsize=(7, 4.5))
for key, pts in sorted(curves.items()):
    pts.sort()
    xs, ys, es = zip(*pts)
    if any(es):
        ax.errorbar(xs, ys, yerr=es, label=key, capsize=2)
    else:
        ax.plot(xs, ys, marker=".", label=key)
if {logx!r}:
    ax.set_xscale("log")
ax.set_xlabel({x!r})
ax.set_ylabel({", ".join(ys)!r})
ax.grid(True, alpha=0.3)
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(os.path.join(here, {csv_name.rsplit(".", 1)[0] + ".png"!r}), dpi=150)
if "--show" in sys.argv:
    plt.show()
'''


def write_atomic(files: dict[Path, str]) -> None:
    """Write all files or none: render to temporaries, then rename."""
    temps = []
    try:
        for path, text in files.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            temps.append((tmp, path))
    except BaseException:
        for tmp, _ in temps:
            os.unlink(tmp)
        raise
    for tmp, path in temps:
        os.replace(tmp, path)


# ---------------------------------------------------------------- runs

@dataclass
class RunContext:
    cfg: Config
    seed: int
    drops: int
    meta: dict[str, str] = field(default_factory=dict)


def _series_configs(spec: ExperimentSpec, cfg: Config):
    if not spec.series_key:
        return [("", cfg)]
    out = []
    for v in spec.series:
        m = to_mapping(cfg)
        m[spec.series_key] = v
        out.append((f"{spec.series_key}={v}", from_mapping(m)))
    return out


def _in_weights(params, U):
    st = assoc.assoc_stats(params)
    pe = assoc.in_probability(params, U)
    return {"1": st.a1, "2Obar": st.a2obar, "2OC": st.a2o * pe, "2OCbar": st.a2o * (1 - pe)}


def run_coverage_curve(spec: ExperimentSpec, ctx: RunContext):
    cols = ["series", spec.axis, "method", "class", "value", "ci"]
    rows = []
    for label, cfg in _series_configs(spec, ctx.cfg):
        p, sc = cfg.system, cfg.scheme
        require_valid(p, sc, cfg.numerics)
        grid = np.asarray(spec.grid)
        sample = None
        if "mc" in spec.methods:
            sample = mc.simulate_drops(p, ctx.drops, ctx.seed, cfg.numerics)
        for method in spec.methods:
            if spec.axis == "beta":
                if method == "mla":
                    continue
                U = sc.effective_u
                if method == "mc":
                    ests = mc.estimate_sir_coverage(p, U, grid, sample=sample)
                    for b, e in zip(grid, ests):
                        rows.append(dict(series=label, beta=b, method="mc", **{"class": "all"},
                                         value=e.estimate, ci=e.ci))
                        for k, v in e.per_class.items():
                            rows.append(dict(series=label, beta=b, method="mc",
                                             **{"class": k}, value=v, ci=e.class_ci[k]))
                else:
                    w = _in_weights(p, U)
                    per = {k: np.atleast_1d(cov.sir_coverage(k, grid, U, p, cfg.numerics))
                           for k in w}
                    for i, b in enumerate(grid):
                        rows.append(dict(series=label, beta=b, method=method,
                                         **{"class": "all"},
                                         value=sum(w[k] * per[k][i] for k in w)))
                        for k in w:
                            rows.append(dict(series=label, beta=b, method=method,
                                             **{"class": k}, value=per[k][i]))
                continue
            if spec.axis != "tau":
                raise SpecError("coverage-curve supports the tau and beta axes")
            if method == "mc":
                ests = mc.estimate_rate_coverage(p, sc, grid, sample=sample)
                for t, e in zip(grid, ests):
                    rows.append(dict(series=label, tau=t, method="mc", **{"class": "all"},
                                     value=e.estimate, ci=e.ci))
                    for k, v in e.per_class.items():
                        rows.append(dict(series=label, tau=t, method="mc", **{"class": k},
                                         value=v, ci=e.class_ci[k]))
            else:
                reps = cov.rate_coverage_curve(p, sc, grid, method, cfg.numerics)
                for t, r in zip(grid, reps):
                    rows.append(dict(series=label, tau=t, method=method, **{"class": "all"},
                                     value=r.overall))
                    for k, v in r.per_class.items():
                        rows.append(dict(series=label, tau=t, method=method, **{"class": k},
                                         value=v))
    return {"": (cols, rows, dict(x=spec.axis, y="value", group=["series", "method", "class"],
                                  logx=True, ci="ci"))}


def _analytic_method(spec):
    ms = [m for m in spec.methods if m != "mc"]
    return ms[0] if ms else "mla"


def run_optimize_u(spec: ExperimentSpec, ctx: RunContext):
    if spec.axis != "tau":
        raise SpecError("optimize-u sweeps tau")
    rows = []
    n1 = ctx.cfg.system.n1
    ucols = [f"R_U{u}" for u in range(n1)]
    cols = ["series", "tau", "method", "U_opt", "value"] + ucols
    for label, cfg in _series_configs(spec, ctx.cfg):
        for method in [m for m in spec.methods if m != "mc"]:
            for tau in spec.grid:
                r = opt.optimal_U(tau, cfg.system, method, cfg.numerics)
                row = dict(series=label, tau=tau, method=method, U_opt=r.arg_opt,
                           value=r.opt_value)
                row.update({f"R_U{u}": v for u, v in r.trace})
                rows.append(row)
    return {"": (cols, rows, dict(x="tau", y="U_opt", group=["series", "method"], logx=True))}


def run_optimize_eta(spec: ExperimentSpec, ctx: RunContext):
    if spec.axis not in ("tau", "eta"):
        raise SpecError("optimize-eta sweeps tau (or evaluates an eta grid)")
    rows = []
    if spec.axis == "eta":
        cols = ["series", "eta", "method", "value"]
        for label, cfg in _series_configs(spec, ctx.cfg):
            for method in [m for m in spec.methods if m != "mc"]:
                for eta in spec.grid:
                    rows.append(dict(series=label, eta=eta, method=method,
                                     value=opt.abs_rate(eta, cfg.scheme.tau, cfg.system,
                                                        method, cfg.numerics)))
        return {"": (cols, rows, dict(x="eta", y="value", group=["series", "method"],
                                      logx=False))}
    cols = ["series", "tau", "method", "eta_opt", "value", "endpoint_beats_interior"]
    for label, cfg in _series_configs(spec, ctx.cfg):
        for method in [m for m in spec.methods if m != "mc"]:
            for tau in spec.grid:
                r = opt.optimal_eta(tau, cfg.system, method=method, numerics=cfg.numerics)
                rows.append(dict(series=label, tau=tau, method=method, eta_opt=r.arg_opt,
                                 value=r.opt_value,
                                 endpoint_beats_interior=r.flags["endpoint_beats_interior"]))
    return {"": (cols, rows, dict(x="tau", y="eta_opt", group=["series", "method"],
                                  logx=True))}


def run_compare_schemes(spec: ExperimentSpec, ctx: RunContext):
    if spec.axis != "B":
        raise SpecError("compare-schemes sweeps B (dB)")
    cfg = ctx.cfg
    p, tau = cfg.system, cfg.scheme.tau
    method = _analytic_method(spec)
    res = {s: opt.optimal_bias(s, tau, p, spec.grid, method, cfg.numerics) for s in Scheme}
    cols = ["bias_db", "IN", "U_opt", "SimpleOffload", "ABS", "eta_opt"]
    rows = []
    for i, b in enumerate(sorted(spec.grid)):
        rows.append(dict(bias_db=b, IN=res[Scheme.IN].trace[i][1],
                         U_opt=res[Scheme.IN].flags["inner_opt"][b],
                         SimpleOffload=res[Scheme.SIMPLE_OFFLOAD].trace[i][1],
                         ABS=res[Scheme.ABS].trace[i][1],
                         eta_opt=res[Scheme.ABS].flags["inner_opt"][b]))
    bcols = ["scheme", "bias_db_opt", "inner_opt", "class", "weight", "value"]
    brows = []
    for s, r in res.items():
        b = r.arg_opt
        pb = p.with_(bias=10 ** (b / 10))
        inner = r.flags["inner_at_opt"]
        if s is Scheme.IN:
            sp = SchemeParams(Scheme.IN, int(inner), 0.5, tau)
        elif s is Scheme.ABS:
            sp = SchemeParams(Scheme.ABS, 0, float(inner), tau)
        else:
            sp = SchemeParams(Scheme.SIMPLE_OFFLOAD, 0, 0.5, tau)
        rep = cov.rate_coverage(pb, sp, method, cfg.numerics)
        brows.append(dict(scheme=s.value, bias_db_opt=b, inner_opt=inner, **{"class": "all"},
                          weight=1.0, value=rep.overall))
        for k, v in rep.per_class.items():
            brows.append(dict(scheme=s.value, bias_db_opt=b, inner_opt=inner, **{"class": k},
                              weight=rep.weights.get(k), value=v))
    ctx.meta["method"] = method
    ctx.meta["optima"] = "; ".join(f"{s.value}: B*={r.arg_opt} dB value={r.opt_value:.6f}"
                                   for s, r in res.items())
    return {"": (cols, rows, dict(x="bias_db", y=["IN", "SimpleOffload", "ABS"], group=[],
                                   logx=False)),
            "_breakdown": (bcols, brows, dict(x="bias_db_opt", y="value",
                                              group=["scheme", "class"], logx=False))}


def run_pmf(spec: ExperimentSpec, ctx: RunContext):
    cols = ["series", "n", "method", "U2Oa", "U2Oa_hat"]
    rows = []
    for label, cfg in _series_configs(spec, ctx.cfg):
        p = cfg.system
        a = assoc.pmf_active_offloaded(p, cfg.numerics)
        h = assoc.pmf_active_offloaded_nearest(p, cfg.numerics)
        nmax = max(a.support[-1], h.support[-1]) if a.probs.size else 0
        nmax = min(int(nmax), 40)
        for n in range(nmax + 1):
            rows.append(dict(series=label, n=n, method="analytic", U2Oa=a.pmf(n),
                             U2Oa_hat=h.pmf(n)))
        if "mc" in spec.methods:
            per_bs = mc.estimate_active_offloaded_per_bs(p, max(ctx.drops // 10, 1), ctx.seed)
            sample = mc.simulate_drops(p, ctx.drops, ctx.seed, cfg.numerics)
            est = mc.estimate_offload_pmfs(p, sample=sample)
            hat = est.active_offloaded_nearest
            for n in range(nmax + 1):
                rows.append(dict(series=label, n=n, method="mc",
                                 U2Oa=per_bs[n] if n < per_bs.size else 0.0,
                                 U2Oa_hat=hat[n] if n < hat.size else 0.0))
    return {"": (cols, rows, dict(x="n", y="U2Oa", group=["series", "method"], logx=False))}


# ---------------------------------------------------------------- validation

@dataclass
class Check:
    name: str
    measured: float
    threshold: float
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    config: dict[str, str]
    seed: int
    drops: int
    checks: list[Check]

    def __post_init__(self):
        for c in self.checks:
            c.measured, c.threshold, c.passed = (float(c.measured), float(c.threshold),
                                                 bool(c.passed))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        d = {"config": self.config, "seed": self.seed, "drops": self.drops,
             "passed": self.passed, "checks": [asdict(c) for c in self.checks]}
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ValidationReport":
        d = json.loads(text)
        return cls(d["config"], d["seed"], d["drops"], [Check(**c) for c in d["checks"]])


DEFAULT_THRESHOLDS = {"coverage": 0.02, "fraction": 0.01, "in_probability": 0.04,
                      "pmf": 0.06, "laplace_sigma": 3.0}


def run_validate(cfg: Config, drops: int, seed: int, analytic: Config | None = None,
                 thresholds: dict[str, float] | None = None,
                 taus=None, betas=(0.1, 0.3, 1.0, 3.0, 10.0)) -> ValidationReport:
    """Compare analytic engines against the simulator.

    ``analytic`` (default ``cfg``) parameterizes the analytic side only, which
    lets a deliberately mismatched model be detected.
    """
    th = dict(DEFAULT_THRESHOLDS, **(thresholds or {}))
    an = cfg if analytic is None else analytic
    p, pa = cfg.system, an.system
    U = cfg.scheme.effective_u
    taus = np.geomspace(1e4, 3e6, 10) if taus is None else np.asarray(taus, float)
    sample = mc.simulate_drops(p, drops, seed, cfg.numerics)
    checks = []

    st = assoc.assoc_stats(pa)
    fr = mc.estimate_class_fractions(sample)
    dev = max(abs(fr["1"][0] - st.a1), abs(fr["2Obar"][0] - st.a2obar),
              abs(fr["2O"][0] - st.a2o))
    tol = max(th["fraction"], max(c for _, c in fr.values()))
    checks.append(Check("class_fractions", dev, tol, dev <= tol))

    n_off = int(np.sum(sample.cls == mc.CLS_OFF))
    if n_off:
        devs = []
        for u in range(1, p.n1):
            est, ci = mc._prop_ci(float(np.sum(sample.rank[sample.cls == mc.CLS_OFF] < u)),
                                  n_off)
            devs.append(abs(est - assoc.in_probability(pa, u)))
        m = max(devs)
        checks.append(Check("in_probability", m, th["in_probability"],
                            m <= th["in_probability"], "max over U of |analytic - MC|"))
        est = mc.estimate_offload_pmfs(p, sample=sample)
        h = assoc.pmf_active_offloaded_nearest(pa, an.numerics)
        k = np.arange(max(est.active_offloaded_nearest.size, 16))
        emp = np.pad(est.active_offloaded_nearest, (0, k.size - est.active_offloaded_nearest.size))
        d = float(np.max(np.abs(emp - h.pmf(k))))
        checks.append(Check("pmf_sup_norm_hat", d, th["pmf"], d <= th["pmf"]))

    ests = mc.estimate_sir_coverage(p, U, betas, sample=sample)
    w = _in_weights(pa, U)
    worst, margin = 0.0, th["coverage"]
    for b, e in zip(betas, ests):
        anv = sum(w[k] * float(cov.sir_coverage(k, b, U, pa, an.numerics)) for k in w)
        d = abs(anv - e.estimate)
        worst = max(worst, d)
        margin = max(margin, e.ci)
    checks.append(Check("sir_coverage_sup", worst, margin, worst <= margin))

    for method in ("full",):
        reps = cov.rate_coverage_curve(pa, an.scheme, taus, method, an.numerics)
        mces = mc.estimate_rate_coverage(p, cfg.scheme, taus, sample=sample)
        worst = max(abs(r.overall - e.estimate) for r, e in zip(reps, mces))
        margin = max(th["coverage"], max(e.ci for e in mces))
        checks.append(Check(f"rate_coverage_sup_{method}", worst, margin, worst <= margin))

    # Laplace functionals of macro-tier interference beyond r at three thresholds
    r0 = 0.5 / math.sqrt(math.pi * pa.lambda1)
    zs = []
    for s_fac in (0.3, 1.0, 3.0):
        s = s_fac * r0 ** pa.alpha1
        fe = mc.estimate_interference_functional(p, 1, s, r0, max(drops // 2, 2000),
                                                 seed=seed, mmax=3)
        fld = cov.LaplaceField(pa.lambda1, pa.alpha1, r0, s)
        for m in range(4):
            anv = cov.laplace_derivative_scaled(m, fld)
            se = max(fe.moments_se[m], 1e-12)
            zs.append(abs(anv - fe.moments[m]) / se)
    z = max(zs)
    checks.append(Check("laplace_functional_z", z, th["laplace_sigma"], z <= th["laplace_sigma"],
                        "max |analytic - MC| / standard error"))
    return ValidationReport(to_mapping(cfg), seed, drops, checks)


# ---------------------------------------------------------------- entry point

RUNNERS = {"coverage-curve": run_coverage_curve, "optimize-u": run_optimize_u,
           "optimize-eta": run_optimize_eta, "compare-schemes": run_compare_schemes,
           "pmf": run_pmf}

_DEFAULT_AXIS = {"coverage-curve": "tau", "optimize-u": "tau", "optimize-eta": "tau",
                 "compare-schemes": "B", "pmf": "tau", "validate": "tau"}


def _parse_sets(items) -> dict[str, str]:
    out = {}
    for it in items or []:
        if "=" not in it:
            raise ConfigError(f"--set expects key=value, got {it!r}")
        k, v = it.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hetnet-in", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--spec", help="experiment spec file")
        sp.add_argument("--config", help="config file (key = value)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--drops", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--methods", help="comma list from full,mla,mc")
        sp.add_argument("--grid", help="'1,2,3', 'geom:a:b:n' or 'lin:a:b:n'")
        sp.add_argument("--axis", choices=AXES)
        sp.add_argument("--series", help="KEY:v1,v2,... one curve per value")
        sp.add_argument("--name", help="output file stem")
        if name == "validate":
            sp.add_argument("--analytic-set", action="append", default=[],
                            metavar="KEY=VALUE", help="override applied to the analytic side")
    return ap


def _resolve(args) -> tuple[ExperimentSpec, RunContext]:
    if args.spec:
        spec = load_spec(args.spec)
        if spec.command != args.command:
            raise SpecError(f"spec is for {spec.command!r}, not {args.command!r}")
    else:
        if not args.config:
            raise SpecError("either --spec or --config is required")
        spec = ExperimentSpec(name=args.name or args.command.replace("-", "_"),
                              config=args.config, command=args.command,
                              axis=_DEFAULT_AXIS[args.command])
    if args.axis:
        spec.axis = args.axis
    if args.grid:
        spec.grid = parse_grid(args.grid)
    if args.methods:
        spec.methods = tuple(m.strip().lower() for m in args.methods.split(",") if m.strip())
    if args.series:
        key, raw = args.series.split(":", 1)
        spec.series_key, spec.series = key, tuple(v.strip() for v in raw.split(","))
    if args.out:
        spec.out = args.out
    if args.name:
        spec.name = args.name
    spec.validate()
    overrides = dict(spec.overrides, **_parse_sets(args.set))
    cfg = load(spec.config, overrides)
    require_valid(cfg.system, cfg.scheme, cfg.numerics)
    seed = cfg.numerics.rng_seed if args.seed is None else args.seed
    drops = cfg.numerics.mc_drops if args.drops is None else args.drops
    meta = {"command": spec.command, "experiment": spec.name, "seed": str(seed),
            "methods": ",".join(spec.methods), "axis": spec.axis}
    if "mc" in spec.methods or spec.command == "validate":
        meta["drops"] = str(drops)
    return spec, RunContext(cfg, seed, drops, meta)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec, ctx = _resolve(args)
        out = Path(spec.out)
        if args.command == "validate":
            an = None
            if args.analytic_set:
                m = to_mapping(ctx.cfg)
                m.update(_parse_sets(args.analytic_set))
                an = from_mapping(m)
            grid = spec.grid if spec.grid else None
            rep = run_validate(ctx.cfg, ctx.drops, ctx.seed, an, taus=grid)
            write_atomic({out / f"{spec.name}.json": rep.to_json()})
            for c in rep.checks:
                print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: measured={c.measured:.4g} "
                      f"threshold={c.threshold:.4g}")
            return 0 if rep.passed else 1
        tables = RUNNERS[args.command](spec, ctx)
        files = {}
        for suffix, (cols, rows, plot) in tables.items():
            stem = f"{spec.name}{suffix}"
            files[out / f"{stem}.csv"] = render_csv(cols, rows, ctx.cfg, ctx.meta)
            files[out / f"plot_{stem}.py"] = plot_script(f"{stem}.csv", **plot)
        write_atomic(files)
        for path in files:
            print(path)
        return 0
    except (ValueError, OSError, ArithmeticError, assoc.TruncationError,
            assoc.QuadratureFailure, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
