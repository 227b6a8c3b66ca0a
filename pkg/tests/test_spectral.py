from fractions import Fraction as F

import numpy as np
import pytest

from cesaro_kothe import criteria, kernel, spectral, weights
from cesaro_kothe.exact import GaussianRational as G
from cesaro_kothe.kernel import SequenceVector as V
from cesaro_kothe.oracle import ExactMatrix, cesaro_matrix, dense_triangular_inverse

LAM = 0.4 + 0.3j
GRID = [0.4 + 0.3j, 2, -0.5, 0.7 - 0.4j, 1j, 0.5 + 0.5j, 0.05 + 0.2j, 0.3 + 0.05j]


# --- parameters ----------------------------------------------------------------------

def test_alpha_is_real_part_of_inverse():
    p = spectral.ResolventParams(LAM)
    assert p.alpha == pytest.approx(1.6)
    assert not p.exact and spectral.ResolventParams(2).exact


@pytest.mark.parametrize("lam", [F(1, 3), F(1), 0, F(0), 0.5, 1 / 7 + 1e-12, 1e-12j])
def test_sigma_points_rejected(lam):
    with pytest.raises(spectral.SigmaProximityError):
        spectral.ResolventParams(lam)


def test_exact_points_near_sigma_accepted():
    assert spectral.ResolventParams(F(1, 3) + F(1, 10**12)).exact
    assert spectral.ResolventParams(G(F(1, 2), F(1, 10**9))).exact


# --- entries -----------------------------------------------------------------------------

def test_entry_examples():
    assert spectral.resolvent_entry(1, 1, 2) == -1
    assert spectral.resolvent_entry(2, 1, 2) == F(-1, 3)
    assert spectral.resolvent_entry(1, 3, 2) == 0
    assert spectral.resolvent_entry(1, 3, LAM) == 0
    D, E = spectral.split_DE(2)
    assert D(2, 2) == F(-2, 3)
    assert all(E(i, j) == 0 for i in range(1, 6) for j in range(i, 8))


def test_entries_match_dense_inverse_exactly():
    N = 25
    C = cesaro_matrix(N)
    for lam in (F(2), F(3, 7), F(-5, 2), G(F(2, 5), F(3, 10))):
        inv = dense_triangular_inverse(C.scaled_identity_shift(lam))
        assert inv.first_difference(lambda i, j: spectral.resolvent_entry(i, j, lam)) is None
        R = spectral.resolvent_matrix(lam, N)
        assert inv.first_difference(ExactMatrix(R)) is None


def test_float_entries_match_exact_values():
    lam = G(F(2, 5), F(3, 10))
    z = complex(lam)
    for i, j in [(1, 1), (7, 1), (30, 4), (40, 40)]:
        a = complex(spectral.resolvent_entry(i, j, lam))
        b = spectral.resolvent_entry(i, j, z)
        assert abs(a - b) <= 1e-12 * abs(a)


@pytest.mark.parametrize("lam", [LAM, 2.0, -0.5, 0.3 + 0.05j])
def test_recombination_float(lam):
    N = 20
    D, E = spectral.split_DE(lam)
    lam = complex(lam)
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            want = spectral.resolvent_entry(i, j, lam)
            got = D(i, j) - E(i, j) / lam ** 2
            assert abs(got - want) <= 1e-12 * max(1.0, abs(want))
    Dm = kernel.truncate_kernel(D, N)
    Em = kernel.truncate_kernel(E, N)
    assert np.allclose(Dm - Em / lam ** 2, spectral.resolvent_matrix(lam, N), rtol=1e-12, atol=0)


def test_column_one_is_part_of_E():
    D, E = spectral.split_DE(F(3, 7))
    assert E(2, 1) != 0
    assert D(2, 1) - E(2, 1) / F(9, 49) == spectral.resolvent_entry(2, 1, F(3, 7))


@pytest.mark.parametrize("lam", GRID)
def test_resolvent_identity_on_grid(lam):
    N = 100
    R = spectral.resolvent_matrix(complex(lam), N)
    CL = kernel.truncate_kernel(kernel.cesaro_kernel(False), N) - complex(lam) * np.eye(N)
    assert np.max(np.abs(CL @ R - np.eye(N))) <= 1e-8 * max(1.0, np.max(np.abs(R)))


def test_large_alpha_window_overflow_is_reported():
    with pytest.raises(OverflowError):
        # alpha is about 300: (i/j)^alpha passes e^709 well inside the window
        spectral.resolvent_matrix(0.0033 + 0.00001j, 4000)


# --- apply -------------------------------------------------------------------------

def test_apply_examples():
    x = spectral.resolvent_apply(V.unit(1, 1, exact=True), 2)
    assert x.equals(V.from_values([-1], exact=True))
    x = spectral.resolvent_apply(V.unit(1, 2, exact=True), 2)
    assert x.equals(V.from_values([-1, F(-1, 3)], exact=True))


def test_apply_round_trip(rng):
    for _ in range(10):
        y = V.from_values(rng.normal(size=100) + 1j * rng.normal(size=100))
        x, dev = spectral.resolvent_apply(y, LAM, verify=True)
        back = kernel.cesaro_apply(x).entries - LAM * x.entries
        assert np.max(np.abs(back - y.entries)) <= 1e-10
        assert dev <= 1e-10 * max(1.0, np.max(np.abs(x.entries)))


def test_apply_exact_lambda_float_rhs():
    y = V.from_values(np.linspace(-1, 1, 30))
    x, dev = spectral.resolvent_apply(y, F(3, 7), verify=True)
    assert dev < 1e-12


# --- scaled row sums -----------------------------------------------------------------------

@pytest.mark.parametrize("fam", [weights.power_series(), weights.nuclear_g1_example()], ids=["power", "nuclear"])
def test_scaled_row_sums_bounded(fam):
    m = criteria.check_nuclearity(fam, n_max=1, alpha=1.6).witness_for(1).m
    rep = spectral.scaled_E_row_sums(fam, 1, m, LAM, window=4096)
    assert rep.trend.bounded
    assert rep.column_trend.vanishing
    assert np.isfinite(rep.max_log_ratio)
    assert rep.alpha == pytest.approx(1.6)


def test_scaled_row_sums_needs_larger_m():
    with pytest.raises(ValueError):
        spectral.scaled_E_row_sums(weights.power_series(), 2, 2, LAM)


def test_row_sums_agree_with_dense_sum():
    fam = weights.power_series()
    N = 60
    rep = spectral.scaled_E_row_sums(fam, 1, 2, LAM, window=N)
    E = kernel.truncate_kernel(spectral.split_DE(LAM)[1], N)
    an = np.exp(fam.row(1, N).astype(float))
    am = np.exp(fam.row(2, N).astype(float))
    direct = (an[:, None] / am[None, :] * np.abs(E)).sum(axis=1)
    assert np.allclose(np.exp(rep.log_row_sums.astype(float)), direct[1:], rtol=1e-10)


@pytest.mark.parametrize("lam", [0.4 + 0.3j, 2, -0.5, 0.7 - 0.4j, 1j, 0.5 + 0.5j])
def test_reade_ratio_within_band(lam):
    lo, hi = spectral.reade_ratio_bounds(complex(lam), 400)
    assert 1 / 50 <= lo <= hi <= 50


# --- dual eigenvectors ---------------------------------------------------------------------

def test_dual_eigenvector_examples():
    assert spectral.dual_eigenvector(F(1, 2), 5).equals(V.from_values([1, -1, 0, 0, 0], exact=True))
    assert spectral.dual_eigenvector(F(1), 4).equals(V.unit(1, 4, exact=True))
    assert spectral.dual_eigenvector(F(1, 3), 6).equals(V.from_values([1, -2, 1, 0, 0, 0], exact=True))


@pytest.mark.parametrize("s", range(1, 9))
def test_dual_eigen_identity_exact(s):
    y = spectral.dual_eigenvector(F(1, s), 20)
    assert all(v == 0 for v in y.entries[s:])
    assert kernel.cesaro_dual_apply(y).equals(y.scale(F(1, s)))
    assert not y.tail_truncated


def test_dual_eigenvector_float_zeros_are_exact():
    y = spectral.dual_eigenvector(0.25, 50)
    assert np.all(y.entries[4:] == 0) and np.all(y.entries[:4] != 0)


def test_dual_residual_is_small_away_from_tail():
    assert spectral.dual_residual(0.2, 2000) < 1e-6


def test_dual_norm_trends():
    fam = weights.point_spectrum(3)
    rep = spectral.dual_norm_trend(fam, 1, spectral.dual_eigenvector(0.2, 4096))
    assert rep.classification == "convergent"
    rep = spectral.dual_norm_trend(weights.nuclear_g1_example(), 1, spectral.dual_eigenvector(0.4, 4096))
    assert rep.classification == "divergent"
    y = spectral.dual_eigenvector(F(1, 5), 100)
    assert spectral.dual_norm_trend(weights.nuclear_g1_example(), 3, y).finite_support


# --- disks and regions --------------------------------------------------------------------

def test_disk_membership_examples():
    inside, diag = spectral.disk_membership(0.4, 1)
    assert inside and diag["re_inv_lambda"] == pytest.approx(2.5) and diag["agrees"]
    assert not spectral.disk_membership(1.0, 1)[0]
    assert not spectral.disk_membership(0.5, 2)[0]
    assert not spectral.disk_membership(-0.1, 1)[0]
    with pytest.raises(ValueError):
        spectral.Disk(0.5)


def test_disk_agrees_with_inverse_real_part(rng):
    for z in rng.uniform(-1, 1, 400) + 1j * rng.uniform(-1, 1, 400):
        for r in (1, 2.5, 4):
            assert spectral.disk_membership(z, r)[1]["agrees"]


def test_nuclear_region():
    reg = spectral.assemble_spectrum(weights.nuclear_g1_example(), k_max=20)
    assert reg.classification == "Nuclear"
    assert reg.sigma_points[-1] == F(1, 20) and not reg.zero_included and not reg.disks
    assert reg.classify_point(0.5) == "spectrum"
    assert reg.classify_point(0.4 + 0.3j) == "resolvent"
    assert reg.classify_point(0) == "resolvent"


def test_point_spectrum_region():
    reg = spectral.assemble_spectrum(weights.point_spectrum(3))
    assert reg.classification == "NonNuclearWithSn"
    radii = [d.r for d in reg.disks]
    assert radii[0] == 1.0
    assert any(3.5 <= r <= 4.5 for r in radii[1:])
    assert reg.zero_included
    assert reg.classify_point(0.4) == "spectrum"
    assert reg.classify_point(-0.5) == "undetermined"


def test_contradictory_verdicts():
    fam = weights.power_series()
    nuc = criteria.check_nuclearity(fam, window=512)
    fake = criteria.SnReport(1, ((2.0, "member"),), 2.0, (1.0, 2.0))
    with pytest.raises(spectral.ConsistencyError):
        spectral.assemble_spectrum(fam, {"nuclearity": nuc, "sn": [fake]})
    with pytest.raises(spectral.ConsistencyError):
        spectral.SpectrumRegion((F(1),), True, (), "Nuclear")
