from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cesaro_kothe import ergodic, kernel, weights
from cesaro_kothe.criteria import Status
from cesaro_kothe.kernel import SequenceVector as V
from cesaro_kothe.oracle import cesaro_matrix

from conftest import G1_BUILTINS, g1_family


def ex(*vals):
    return V.from_values([F(v) for v in vals], exact=True)


def test_power_iterate_examples():
    x = ex(1, 0, 0)
    assert ergodic.power_iterate(x, 0) is x
    assert ergodic.power_iterate(ex(1, 1, 1), 7).equals(ex(1, 1, 1))
    assert ergodic.power_iterate(x, 2).equals(ex(1, F(3, 4), F(11, 18)))
    with pytest.raises(ValueError):
        ergodic.power_iterate(x, -1)


def test_cesaro_means_examples():
    x = ex(1, 0)
    assert ergodic.cesaro_means(x, 1).equals(kernel.cesaro_apply(x))
    assert ergodic.cesaro_means(ex(1, 1, 1), 9).equals(ex(1, 1, 1))
    assert ergodic.cesaro_means(x, 2).equals(ex(1, F(5, 8)))
    with pytest.raises(ValueError):
        ergodic.cesaro_means(x, 0)


def test_projection_examples():
    assert ergodic.ergodic_projection(ex(1, 0, 0)).equals(ex(1, 1, 1))
    assert ergodic.ergodic_projection(ex(0, 1, 0)).equals(ex(0, 0, 0))
    x = ex(2, 5, -1)
    p = ergodic.ergodic_projection(x)
    assert p.equals(ex(2, 2, 2)) and (x - p).equals(ex(0, 3, -3))


@given(st.lists(st.fractions(-20, 20, max_denominator=9), min_size=1, max_size=25))
def test_projection_identities(vals):
    x = V.from_values(vals, exact=True)
    P = ergodic.ergodic_projection
    assert (x - P(x)).at(1) == 0
    assert P(P(x)).equals(P(x))
    assert P(kernel.cesaro_apply(x)).equals(P(x))


def test_make_vector():
    assert ergodic.make_vector("e1", 4).equals(V.unit(1, 4))
    assert ergodic.make_vector("e3", 4).equals(V.unit(3, 4))
    assert ergodic.make_vector("ej:2", 4).equals(V.unit(2, 4))
    assert ergodic.make_vector("ones", 3).equals(V.ones(3))
    assert ergodic.make_vector("random:5", 10).equals(ergodic.make_vector("random:5", 10))
    with pytest.raises(ValueError):
        ergodic.make_vector("bogus", 3)


def test_mean_ergodic_run_power_series():
    run = ergodic.run_ergodic(weights.power_series(), "e1", 1, (1, 10, 100, 1000), 400)
    v = run.values[1]
    assert all(b <= a for a, b in zip(v, v[1:]))
    assert v[-1] / v[0] <= 0.1
    assert run.status is Status.HOLDS and run.power_violations == 0
    assert v == pytest.approx((0.06767, 0.01352, 0.001353, 0.0001353), rel=1e-3)


def _oracle_means(k, M=40):
    # a_1(i) = e^{-i} makes everything past i = 40 invisible at double precision
    C = cesaro_matrix(M).entries
    cur = np.array([F(int(i == 0)) for i in range(M)], dtype=object)
    acc = np.array([F(0)] * M, dtype=object)
    for _ in range(k):
        cur = C.dot(cur)
        acc = acc + cur
    return max(np.exp(-(i + 1)) * abs(float(acc[i] / k) - 1) for i in range(M))


def test_mean_values_against_dense_oracle():
    run = ergodic.run_ergodic(weights.power_series(), "e1", 1, (1, 3, 10, 100, 1000), 400)
    for k, got in zip((1, 3, 10), run.values[1]):
        assert got == pytest.approx(_oracle_means(k), rel=1e-12)
    Cf = np.tril(np.ones((60, 60))) / np.arange(1, 61)[:, None]
    for k, got in zip((100, 1000), run.values[1][3:]):
        acc, cur = np.zeros(60), np.eye(60)[:, 0]
        for _ in range(k):
            cur = Cf @ cur
            acc += cur
        want = np.max(np.exp(-np.arange(1, 61)) * np.abs(acc / k - 1))
        assert got == pytest.approx(want, rel=1e-9)


def test_ones_is_fixed():
    run = ergodic.run_ergodic(weights.power_series(), "ones", 2, (1, 10, 100, 1000), 400)
    assert all(t == 0 for vals in run.values.values() for t in vals)
    assert run.status is Status.HOLDS


@pytest.mark.parametrize("key", list(G1_BUILTINS))
def test_power_bound_random_vectors(key):
    fam = g1_family(key)
    bad = 0
    for seed in range(100):
        run = ergodic.run_ergodic(fam, f"random:{seed}", 2, (1, 2, 5), 200)
        bad += run.power_violations
    assert bad == 0


def test_run_records_and_notes():
    run = ergodic.run_ergodic(weights.power_series(), "e2", 2, (1, 3, 10, 31), 100)
    rows = list(run.rows())
    assert len(rows) == 8 and rows[0][:2] == (1, 1)
    assert any("supercyclic" in n for n in run.notes)
    assert any("uniformity" in n for n in run.notes)
    assert run.to_json()["power_bound_violations"] == 0


def test_schedule_validation():
    with pytest.raises(ValueError):
        ergodic.run_ergodic(weights.power_series(), "e1", 1, (0, 1), 50)


# --- closed range -------------------------------------------------------------------

def test_r_entries():
    assert ergodic.r_matrix_entry(1, 1) == 2
    assert ergodic.r_matrix_entry(2, 1) == 1
    assert ergodic.r_matrix_entry(2, 2) == F(3, 2)
    assert ergodic.r_matrix_entry(1, 2) == 0


@pytest.mark.parametrize("N", [1, 6, 30])
def test_t_r_inverse_pair(N):
    T, R = ergodic.t_matrix(N), ergodic.r_matrix(N)
    eye = np.eye(N, dtype=int).tolist()
    assert T.dot(R).tolist() == eye
    assert R.dot(T).tolist() == eye


def test_closed_range_power_series():
    v = ergodic.verify_closed_range(weights.power_series(), 1, 2)
    assert v.holds
    assert v.details["T_R_identity"] and v.details["R_T_identity"]
    assert v.details["bound"] == "vanishing" and v.details["column_1"] == "vanishing"
    assert v.details["row_sum_le_bound"]


def test_closed_range_needs_larger_m():
    with pytest.raises(ValueError):
        ergodic.verify_closed_range(weights.power_series(), 2, 1)
