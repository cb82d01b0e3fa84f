import math

import pytest
from hypothesis import given, settings, strategies as st

from hetnet_in import config as C
from conftest import ROOT, skewed_params


def test_valid_params_pass():
    assert C.validate(skewed_params()).ok


@pytest.mark.parametrize("field,value", [("alpha1", 2.0), ("alpha2", 1.5), ("lambda1", 0.0),
                                         ("n1", 0), ("bias", 0.5), ("lambda_u", -1.0)])
def test_invalid_fields_reported(field, value):
    p = skewed_params().with_(**{field: value})
    res = C.validate(p)
    assert not res.ok
    assert field in res.fields()


def test_alpha_message():
    res = C.validate(skewed_params().with_(alpha1=2.0))
    assert any("alpha_j > 2" in v.message for v in res.violations)


def test_require_valid_raises():
    with pytest.raises(C.ConfigError):
        C.require_valid(skewed_params().with_(n2=0))


def test_power_ratio_normalization():
    p = skewed_params()
    q = C.normalize_power_ratio(p.with_(p1=p.p1 * 7, p2=7.0))
    assert q.p2 == 1.0
    assert q.p1 == pytest.approx(p.p1, rel=1e-14)


def test_db_round_trip():
    assert C.db_to_linear(13) == pytest.approx(10 ** 1.3)
    assert C.linear_to_db(C.db_to_linear(4.6)) == pytest.approx(4.6, abs=1e-12)


def test_serialize_parse_round_trip():
    cfg = C.Config(skewed_params(), C.SchemeParams(C.Scheme.ABS, 0, 0.3, 5e5))
    text = C.serialize(cfg)
    again = C.parse(text)
    assert C.serialize(again) == text
    assert again.system.alpha2 == 4.7
    assert again.scheme.scheme is C.Scheme.ABS


def test_unknown_key_rejected():
    with pytest.raises(C.ConfigError):
        C.parse("lambda1 = 1e-4\nbogus = 3\n")


def test_missing_key_rejected():
    with pytest.raises(C.ConfigError):
        C.parse("lambda1 = 1e-4\n")


def test_overrides_win():
    cfg = C.load(ROOT / "configs" / "rate_coverage.cfg", {"bias_db": "10", "n1": "6"})
    assert cfg.system.bias == pytest.approx(10.0)
    assert cfg.system.n1 == 6


def test_shipped_configs_valid():
    for path in (ROOT / "configs").glob("*.cfg"):
        cfg = C.load(path)
        assert C.validate(cfg.system, cfg.scheme, cfg.numerics).ok, path.name


@settings(max_examples=40, deadline=None)
@given(l1=st.floats(1e-6, 1e-2), ratio=st.floats(1.0, 50.0), a=st.floats(2.05, 6.0),
       bdb=st.floats(0.0, 20.0), n1=st.integers(1, 20), n2=st.integers(1, 20))
def test_round_trip_property(l1, ratio, a, bdb, n1, n2):
    p = C.make_params(lambda1=l1, lambda2=l1 * ratio, alpha1=a, n1=n1, n2=n2, bias_db=bdb)
    cfg = C.parse(C.serialize(C.Config(p)))
    assert cfg.system.lambda1 == p.lambda1
    assert math.isclose(cfg.system.bias, p.bias, rel_tol=1e-11)
    assert cfg.system.n1 == n1
