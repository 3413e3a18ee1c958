import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holoball.integration import (
    Integrand,
    MCEstimate,
    SampleStream,
    distribution_estimate,
    forelli_rudin_exponent,
    integrate_mu_q,
    lp_norm,
    mu_q_total,
)
from holoball.kernels import KernelParams


def test_mu_q_total_values():
    assert mu_q_total(1, 0.0) == pytest.approx(1.0)
    assert mu_q_total(1, 1.0) == pytest.approx(0.5)
    assert mu_q_total(2, 1.0) == pytest.approx(2.0 / 6.0)
    assert mu_q_total(3, 0.5) == pytest.approx(
        math.exp(math.lgamma(4) + math.lgamma(1.5) - math.lgamma(4.5)))


def test_mu_q_total_divergent():
    with pytest.raises(ValueError):
        mu_q_total(1, -1.0)


def test_mc_estimate_rejects_negative_stderr():
    with pytest.raises(ValueError):
        MCEstimate(1.0, -0.1, 10, 0)


def test_stream_reproducible():
    a = SampleStream(2, 0.0, 500, 11).points
    b = SampleStream(2, 0.0, 500, 11).points
    assert np.array_equal(a, b)
    c = SampleStream(2, 0.0, 500, 12).points
    assert not np.array_equal(a, c)


def test_stream_rejects_bad_proposal():
    with pytest.raises(ValueError):
        SampleStream(1, -1.0, 100, 0)


def test_stream_points_inside_ball():
    s = SampleStream(3, 0.5, 2000, 3)
    assert np.all(np.linalg.norm(s.points, axis=1) < 1.0)
    assert np.allclose(s.rho2, np.linalg.norm(s.points, axis=1) ** 2)


def test_integrate_constant_is_exact():
    est = integrate_mu_q(lambda pts: np.ones(pts.shape[0]), 1.0, 1, 1000, 0)
    assert est.real == pytest.approx(0.5)
    assert est.stderr == pytest.approx(0.0, abs=1e-14)


@given(st.floats(-0.9, 2.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
@settings(max_examples=20, deadline=None)
def test_integrate_linearity_on_shared_stream(q, alpha, beta):
    st_ = SampleStream(1, q, 400, 5)
    f = lambda pts: np.abs(pts[:, 0])
    g = lambda pts: np.real(pts[:, 0]) ** 2
    lhs = st_.integrate(lambda pts: alpha * f(pts) + beta * g(pts)).real
    rhs = alpha * st_.integrate(f).real + beta * st_.integrate(g).real
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


def test_integrate_monotone_on_shared_stream():
    st_ = SampleStream(2, 0.0, 1000, 6)
    small = st_.integrate(lambda pts: np.abs(pts[:, 0])).real
    big = st_.integrate(lambda pts: np.abs(pts[:, 0]) + 0.1).real
    assert big > small


def test_integrate_radial_moment():
    # integral (1-rho^2) dmu_0 = mu_1 total = 1/2 for N=1
    est = integrate_mu_q(lambda pts: 1.0 - np.abs(pts[:, 0]) ** 2, 0.0, 1,
                         40_000, 7)
    assert abs(est.real - 0.5) < 4 * est.stderr + 1e-4


def test_integrate_divergent_requires_decay_tag():
    with pytest.raises(ValueError):
        integrate_mu_q(lambda pts: np.ones(pts.shape[0]), -1.5, 1, 100, 0)
    g = Integrand(lambda pts: (1 - np.abs(pts[:, 0]) ** 2) ** 0.7,
                  decay_exponent=0.7)
    est = integrate_mu_q(g, -1.5, 1, 200_000, 8)
    # equals mu_{-0.8}(B) exactly
    assert abs(est.real - mu_q_total(1, -0.8)) < 4 * est.stderr


def test_lp_norm_constant_and_guard():
    est = lp_norm(lambda pts: 2.0 * np.ones(pts.shape[0]), 2.0, None, 1.0, 1,
                  500, 0)
    assert est.real == pytest.approx(2.0 * math.sqrt(0.5))
    with pytest.raises(ValueError):
        lp_norm(lambda pts: np.ones(pts.shape[0]), 0.5, None, 0.0, 1, 100, 0)


def test_distribution_estimate_radial():
    # mu({rho > lam}) = 1 - lam^{2N}
    est = distribution_estimate(lambda pts: np.abs(pts[:, 0]), 0.5, 0.0, 1,
                                60_000, 9)
    assert abs(est.real - 0.75) < 4 * est.stderr
    with pytest.raises(ValueError):
        distribution_estimate(lambda pts: np.abs(pts[:, 0]), 0.0, 0.0, 1, 100, 0)


def test_forelli_rudin_bounded_case():
    # c - d < 0: the integral stays bounded, fitted exponent near 0
    fit = forelli_rudin_exponent(0.0, 1.0, KernelParams(1, 0.0), n=60_000, seed=1)
    assert not fit.log_flag
    assert abs(fit.fitted_exponent) < 0.15


def test_forelli_rudin_log_flag():
    fit = forelli_rudin_exponent(0.5, 0.5, KernelParams(1, 0.0), n=40_000, seed=2)
    assert fit.log_flag


def test_forelli_rudin_guards():
    with pytest.raises(ValueError):
        forelli_rudin_exponent(0.0, -1.0, KernelParams(1, 0.0), n=100, seed=0)
    with pytest.raises(ValueError):
        forelli_rudin_exponent(0.0, 0.0, KernelParams(1, 0.0),
                               radii=(0.9, 0.9), n=100, seed=0)
