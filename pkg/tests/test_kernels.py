import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holoball.kernels import (
    DEFAULT_SERIES,
    HomogeneousPolynomial,
    KernelParams,
    SeriesControl,
    SeriesTruncationError,
    apply_I_st,
    coeff_c,
    diff_coeff,
    homogeneous_parts,
    hyp2f1_11,
    kernel_K,
    kernel_bounds_scan,
    kernel_inner,
    kernel_series_partial,
    pochhammer,
)


# ---- Pochhammer ----------------------------------------------------------

def test_pochhammer_known_values():
    assert pochhammer(1.0, 4) == 24.0
    assert pochhammer(2.5, 3) == pytest.approx(2.5 * 3.5 * 4.5)
    assert pochhammer(3.0, 0) == 1.0


def test_pochhammer_rejects_bad_order():
    with pytest.raises(ValueError):
        pochhammer(1.0, -1)
    with pytest.raises(ValueError):
        pochhammer(1.0, 1.5)


@given(st.floats(0.1, 10.0), st.integers(0, 12))
def test_pochhammer_recurrence(u, k):
    assert pochhammer(u, k + 1) == pytest.approx(pochhammer(u, k) * (u + k), rel=1e-12)


@given(st.floats(0.5, 8.0), st.integers(0, 10))
def test_pochhammer_matches_gamma_ratio(u, k):
    expected = math.exp(math.lgamma(u + k) - math.lgamma(u))
    assert pochhammer(u, k) == pytest.approx(expected, rel=1e-10)


# ---- series coefficients -------------------------------------------------

def test_coeff_c_power_branch():
    # N=1, a=0: c_k = (2)_k / k!
    p = KernelParams(1, 0.0)
    assert coeff_c(p, 0.0, 2) == pytest.approx(3.0)


def test_coeff_c_series_branch():
    # N=1, a=-3: c_k = k! / (3)_k
    p = KernelParams(1, -3.0)
    assert coeff_c(p, -3.0, 2) == pytest.approx(2.0 / 12.0)


@given(st.floats(-1.5, 2.0), st.floats(-0.5, 1.5), st.floats(-0.5, 1.5),
       st.integers(0, 8))
def test_diff_coeff_composition(s, t, u, k):
    # d_k(s,t) d_k(s+t,u) = d_k(s,t+u) whenever all coefficients exist
    p = KernelParams(1, 0.0)
    lhs = diff_coeff(s, t, p, k) * diff_coeff(s + t, u, p, k)
    rhs = diff_coeff(s, t + u, p, k)
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_diff_coeff_identity_at_t_zero():
    p = KernelParams(2, 0.0)
    for k in range(6):
        assert diff_coeff(0.5, 0.0, p, k) == pytest.approx(1.0)


# ---- hypergeometric series ----------------------------------------------

def test_hyp2f1_closed_form_c2():
    # 2F1(1,1;2;v) = -ln(1-v)/v
    for v in (0.1, 0.5, 0.9, -0.7, 0.3 + 0.4j):
        got = hyp2f1_11(2.0, v)
        assert got == pytest.approx(-np.log(1 - v) / v, rel=1e-10)


def test_hyp2f1_value_at_half():
    assert hyp2f1_11(2.0, 0.5) == pytest.approx(2.0 * math.log(2.0), rel=1e-10)


def test_hyp2f1_vectorized_matches_scalar():
    v = np.array([0.0, 0.2, -0.4, 0.5 + 0.1j])
    out = hyp2f1_11(3.0, v)
    for vi, oi in zip(v, out):
        assert hyp2f1_11(3.0, vi) == pytest.approx(oi, rel=1e-12)


def test_hyp2f1_rejects_outside_disk():
    with pytest.raises(ValueError):
        hyp2f1_11(2.0, 1.0)


def test_hyp2f1_rejects_nonpositive_integer_c():
    with pytest.raises(ValueError):
        hyp2f1_11(-1.0, 0.5)


def test_hyp2f1_truncation_budget():
    with pytest.raises(SeriesTruncationError):
        hyp2f1_11(2.0, 0.9999, SeriesControl(max_terms=10))


def test_scipy_cross_check():
    from scipy.special import hyp2f1 as sp_hyp2f1

    rng = np.random.default_rng(0)
    v = 0.95 * np.sqrt(rng.uniform(0, 1, 200)) * np.exp(2j * np.pi * rng.uniform(0, 1, 200))
    ours = hyp2f1_11(2.7, v)
    ref = sp_hyp2f1(1.0, 1.0, 2.7, v)
    assert np.max(np.abs(ours - ref) / np.abs(ref)) < 1e-10


# ---- kernel evaluation ---------------------------------------------------

def test_kernel_power_branch_value():
    # N=1, q=0, <z,w>=0.25: (1-0.25)^{-2} = 16/9
    assert kernel_inner(KernelParams(1, 0.0), 0.25) == pytest.approx(16.0 / 9.0)


def test_kernel_series_branch_log_form():
    # N=1, q=-2: the series is -ln(1-v)/v
    p = KernelParams(1, -2.0)
    for v in np.arange(0.1, 0.95, 0.1):
        assert kernel_inner(p, v) == pytest.approx(-math.log(1 - v) / v, rel=1e-10)


def test_kernel_K_on_points():
    z = np.array([0.5 + 0.0j])
    w = np.array([0.5 + 0.0j])
    assert kernel_K(KernelParams(1, 0.0), z, w) == pytest.approx((1 - 0.25) ** -2)


@given(st.floats(0.0, 0.9), st.floats(0.0, 2 * math.pi))
@settings(max_examples=40)
def test_kernel_hermitian_symmetry(r, theta):
    # K(z,w) = conj(K(w,z)) becomes K(conj v) = conj(K(v))
    v = r * np.exp(1j * theta)
    for q in (0.0, -3.0):
        p = KernelParams(1, q)
        assert kernel_inner(p, np.conj(v)) == pytest.approx(
            np.conj(kernel_inner(p, v)), rel=1e-10)


def test_series_partial_matches_power():
    rng = np.random.default_rng(1)
    v = 0.95 * np.sqrt(rng.uniform(0, 1, 500)) * np.exp(2j * np.pi * rng.uniform(0, 1, 500))
    for N, q in ((1, 0.0), (2, -0.5), (1, 1.0)):
        p = KernelParams(N, q)
        closed = kernel_inner(p, v)
        series = kernel_series_partial(p, v)
        assert np.max(np.abs(series - closed) / np.abs(closed)) < 1e-10


def test_scan_q0_lower_bound():
    scan = kernel_bounds_scan(KernelParams(1, 0.0))
    assert scan.min_modulus >= 2.0 ** (-2)  # 2^{-(1+N+q)}
    assert not scan.max_is_finite
    assert 0 < scan.rho0_estimate < 1


def test_scan_qm3_bounded():
    scan = kernel_bounds_scan(KernelParams(1, -3.0))
    assert scan.max_is_finite
    assert scan.min_modulus > 0
    assert scan.max_modulus < 10


# ---- polynomials and the radial-derivative operator ----------------------

def test_homogeneous_polynomial_rejects_mixed_degree():
    with pytest.raises(ValueError):
        HomogeneousPolynomial([((1, 0), 1.0), ((1, 1), 1.0)])


def test_homogeneous_polynomial_eval():
    f = HomogeneousPolynomial([((2,), 3.0)])
    assert f(np.array([0.5 + 0j])) == pytest.approx(0.75)
    batch = f(np.array([[0.5 + 0j], [0.2 + 0j]]))
    assert batch[1] == pytest.approx(3.0 * 0.04)


def test_homogeneous_parts_split():
    parts = homogeneous_parts([((0,), 1.0), ((1,), 2.0), ((2,), 1.0)])
    assert sorted(parts) == [0, 1, 2]


def test_apply_I_st_t_zero_is_identity():
    terms = [((0,), 1.0), ((1,), 2.0), ((3,), -0.5)]
    p = KernelParams(1, 0.0)
    z = np.array([0.4 + 0.1j])
    direct = sum(part(z) for part in homogeneous_parts(terms).values())
    assert apply_I_st(terms, 0.5, 0.0, p, z) == pytest.approx(direct, rel=1e-12)


def test_apply_I_st_single_monomial():
    # I_s^t z^k = (1-|z|^2)^t d_k(s,t) z^k
    p = KernelParams(1, 0.0)
    s, t, k = 0.0, 1.0, 2
    z = np.array([0.5 + 0j])
    expected = (1 - 0.25) ** t * diff_coeff(s, t, p, k) * 0.25
    assert apply_I_st([((k,), 1.0)], s, t, p, z) == pytest.approx(expected)
