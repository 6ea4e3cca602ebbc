import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayesel.diagnostics import (SummaryTable, acceptance_report, ess, heidelberger_welch,
                                 pcramer, spectrum0, summarize)
from bayesel.errors import EmptyTrace, TooShort
from bayesel.sampler import Trace


def _ar1(rng, n, rho):
    e = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = e[0] / np.sqrt(1 - rho * rho)
    for t in range(1, n):
        x[t] = rho * x[t - 1] + e[t]
    return x


def test_constant_chain_summary():
    tab = summarize({"c": np.full(50, 2.5)})
    s = tab["c"]
    assert (s.mean, s.sd, s.q025, s.median, s.q975) == (2.5, 0.0, 2.5, 2.5, 2.5)


def test_normal_draws_summary():
    x = np.random.default_rng(0).standard_normal(1_000_000)
    s = summarize({"x": x})["x"]
    assert abs(s.mean) < 0.005
    assert s.q025 == pytest.approx(-1.96, abs=0.02)
    assert s.q975 == pytest.approx(1.96, abs=0.02)


def test_type7_quantiles_and_burn_in():
    x = np.array([100.0, 1.0, 2.0, 3.0, 4.0])
    s = summarize({"x": x}, burn_in=1)["x"]
    assert s.median == 2.5
    assert s.q025 == pytest.approx(1.075)


def test_derived_quantity():
    tab = summarize({"a": np.arange(10.0), "b": np.ones(10)},
                    derived={"d": lambda c: c["a"] - 2 * c["b"]})
    assert tab["d"].mean == pytest.approx(2.5)


def test_empty_after_burn_in():
    with pytest.raises(EmptyTrace):
        summarize({"x": np.ones(5)}, burn_in=5)


def test_summary_outputs(tmp_path):
    tab = summarize({"x": np.arange(20.0)})
    assert isinstance(tab, SummaryTable)
    assert json.loads(tab.to_json())["x"]["median"] == 9.5
    text = tab.to_text().splitlines()
    assert text[0].split() == ["Mean", "SD", "2.5%", "Median", "97.5%"]
    lines = tab.write_csv(tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "parameter,mean,sd,q025,median,q975"


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_summary_permutation(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(200)
    a = summarize({"x": x})["x"]
    b = summarize({"x": rng.permutation(x)})["x"]
    assert a.mean == pytest.approx(b.mean, abs=1e-14) and a.sd == pytest.approx(b.sd, abs=1e-14)
    assert (a.q025, a.median, a.q975) == (b.q025, b.median, b.q975)
    assert a.q025 <= a.median <= a.q975


def test_hw_constant():
    r = heidelberger_welch(np.full(200, 3.0))
    assert r.stationary and r.halfwidth_ok


def test_hw_too_short():
    with pytest.raises(TooShort):
        heidelberger_welch(np.ones(99))


def test_hw_iid_calibration():
    passes = sum(heidelberger_welch(np.random.default_rng(s).standard_normal(1000)).stationary
                 for s in range(100))
    assert passes >= 90


def test_hw_trend_fails():
    rng = np.random.default_rng(0)
    x = np.linspace(0, 4, 1000) + rng.standard_normal(1000)
    assert not heidelberger_welch(x).stationary


def test_hw_kept_fraction_after_initial_transient():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(2000)
    x[:150] += np.linspace(6, 0, 150)
    r = heidelberger_welch(x)
    assert r.stationary and r.kept_fraction < 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0), st.floats(-1e3, 1e3),
       st.booleans())
def test_hw_affine_invariance(seed, scale, shift, trend):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(500)
    if trend:
        x += np.linspace(0, 2, 500)
    assert heidelberger_welch(scale * x + shift).stationary == heidelberger_welch(x).stationary


def test_pcramer_is_a_distribution_function():
    q = np.linspace(0.01, 5, 300)
    p = np.array([pcramer(v) for v in q])
    assert np.all(np.diff(p) >= -1e-12)
    assert pcramer(0.0) == 0.0 and pcramer(1e5) == 1.0
    # textbook 5% critical value of the Cramer-von Mises bridge statistic
    assert pcramer(0.4614) == pytest.approx(0.95, abs=2e-3)


def test_spectrum0_unbiased():
    # one estimate is noisy (about 70 ordinates); the average is not
    white = [spectrum0(np.random.default_rng(s).standard_normal(20000)) for s in range(40)]
    assert np.mean(white) == pytest.approx(1.0, rel=0.1)
    rho = 0.5
    ar = [spectrum0(_ar1(np.random.default_rng(s), 20000, rho)) for s in range(40)]
    assert np.mean(ar) == pytest.approx(1 / (1 - rho) ** 2, rel=0.1)


def test_ess_iid():
    x = np.random.default_rng(4).standard_normal(10000)
    assert ess(x) == pytest.approx(10000, rel=0.1)


def test_ess_ar1():
    rho = 0.9
    x = _ar1(np.random.default_rng(5), 50000, rho)
    assert ess(x) == pytest.approx(50000 * (1 - rho) / (1 + rho), rel=0.2)


def test_ess_alternating_is_clamped():
    x = np.tile([1.0, -1.0], 500)
    assert ess(x) == 1000


def test_ess_bounds_and_errors():
    x = _ar1(np.random.default_rng(6), 500, 0.5)
    assert 0 < ess(x) <= 500
    with pytest.raises(TooShort):
        ess(np.ones(9))


def _trace(accepted):
    n = len(accepted)
    return Trace(np.zeros((n, 1)), np.zeros((n, 1)), np.zeros(n), np.array(accepted, bool),
                 np.zeros((n, 1)), acceptance_counts={"two_step": (sum(accepted), n)})


def test_acceptance_report_extremes():
    assert acceptance_report(_trace([True] * 10))["overall"] == 1.0
    rep = acceptance_report(_trace([False] * 10))
    assert rep["overall"] == 0.0 and rep["by_move_type"]["two_step"] == 0.0

