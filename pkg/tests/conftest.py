import json
from pathlib import Path

import pytest

from hetnet_in import make_params

ROOT = Path(__file__).resolve().parent.parent
ORACLE = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())


def coverage_params(bias_db=5.0, **kw):
    """Two-tier network with 8/4 antennas and alpha=4 at a 10 dB power ratio."""
    base = dict(lambda1=1e-4, lambda2=5e-4, lambda_u=0.01, p_ratio_db=10, alpha1=4, n1=8,
                n2=4, bias_db=bias_db)
    base.update(kw)
    return make_params(**base)


def small_tau_params(bias_db=2.5):
    """5/2 antennas, alpha=3, dense picos: the small-threshold DoF regime."""
    return make_params(lambda1=1e-4, lambda2=0.0015, lambda_u=0.01, p_ratio_db=10, alpha1=3,
                       n1=5, n2=2, bias_db=bias_db)


def skewed_params(bias_db=4.0, lambda_u=0.03, n1=10, n2=8):
    """Unequal path-loss exponents, 13 dB power ratio."""
    return make_params(lambda1=8e-5, lambda2=1e-3, lambda_u=lambda_u, p_ratio_db=13,
                       alpha1=4.5, alpha2=4.7, n1=n1, n2=n2, bias_db=bias_db)


@pytest.fixture
def p_cov():
    return coverage_params()


@pytest.fixture
def p_small():
    return small_tau_params()


@pytest.fixture
def p_skew():
    return skewed_params()


@pytest.fixture(scope="session")
def oracle():
    return ORACLE


@pytest.fixture(scope="session")
def mc_sample():
    from hetnet_in import montecarlo as mc
    return mc.simulate_drops(coverage_params(10.0), 6000, seed=314)


ACCEPTANCE: list[str] = []


def report(label: str, passed: bool, detail: str) -> bool:
    """Record one acceptance line; printed again in the terminal summary."""
    line = f"{'PASS' if passed else 'FAIL'} {label}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bias_sweep_optima():
    """Bias-optimized results per scheme for both antenna configurations (MLA)."""
    from hetnet_in import config
    from hetnet_in import optimize as O
    from hetnet_in.config import Scheme
    out = {}
    for name in ("bias_sweep_8x6", "bias_sweep_18x16"):
        c = config.load(ROOT / "configs" / f"{name}.cfg")
        out[name] = {s: O.optimal_bias(s, c.scheme.tau, c.system) for s in Scheme}
    return out
