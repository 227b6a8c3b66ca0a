import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cesaro_kothe import trend

LD = np.longdouble
I = np.arange(1, 4097, dtype=LD)


@pytest.mark.parametrize("logv,expected", [
    (-I, "vanishing"),
    (-np.log(I), "vanishing"),
    (np.log(I), "divergent"),
    (I / 10, "divergent"),
    (np.zeros(4096), "bounded"),
    (-1 / I, "bounded"),
    (np.log(np.log1p(1 / I)), "vanishing"),
])
def test_classification(logv, expected):
    assert trend.sequence_trend(logv).classification == expected


def test_plateau_is_nonvanishing():
    rep = trend.sequence_trend(np.log(2 + 1 / I))
    assert rep.classification == "bounded" and rep.plateau and rep.nonvanishing


def test_slow_decay_is_not_certified():
    # 1/log log i moves too slowly on this window to be called anything but bounded
    rep = trend.sequence_trend(-np.log(np.log(np.log(I + 20))))
    assert not rep.vanishing


def test_sup_and_offset():
    lv = -((I - 7) ** 2)
    rep = trend.sequence_trend(lv)
    assert rep.argsup == 7 and rep.log_sup == 0.0
    rep = trend.sequence_trend(lv, offset=1)
    assert rep.argsup == 8 and rep.N == 4097


def test_longdouble_values_beyond_float_range():
    lv = -np.exp(I / LD(1))  # log a_1(i) for the nuclear example reaches -e^4096
    rep = trend.sequence_trend(lv)
    assert rep.classification == "vanishing"
    assert math.isinf(rep.samples[-1][1])


def test_sample_indices():
    idx = trend.sample_indices(4096)
    assert idx[0] == 1 and idx[-1] == 4096
    assert np.all(np.diff(idx) > 0)
    assert len(trend.sample_indices(3)) == 3


def test_short_input_is_unknown():
    assert trend.classify([0.0, -1.0, -2.0], [1, 2, 3])[0] == "unknown"


@pytest.mark.parametrize("p,expected", [(2.0, "convergent"), (1.5, "convergent"), (0.9, "divergent"), (0.5, "divergent")])
def test_p_series(p, expected):
    assert trend.series_trend(-p * np.log(I)).classification == expected


def test_harmonic_series_sits_inside_the_margin():
    # p = 1 is the boundary case; the finite window does not certify either way
    assert trend.series_trend(-np.log(I)).classification == "unknown"


def test_geometric_series_and_finite_support():
    rep = trend.series_trend(-I)
    assert rep.classification == "convergent"
    assert rep.log_total == pytest.approx(math.log(1 / (math.e - 1)), rel=1e-9)
    assert trend.series_trend(np.log(I), finite_support=True).classification == "convergent"


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=40))
def test_log_cumsum_exp_matches_direct_sum(xs):
    out = trend.log_cumsum_exp(np.array(xs, dtype=np.float64))
    direct = np.log(np.cumsum(np.exp(np.array(xs))))
    assert np.allclose(out, direct, rtol=1e-12, atol=1e-12)
