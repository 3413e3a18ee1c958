"""Acceptance gate: the eleven primary checks, one printed verdict line each.

Budgets are sized for a single desktop core; every check states its tolerance
inline.  Comparative quantities share streams so ratios are smooth.
"""

import math

import numpy as np
import pytest

from holoball.geometry import (
    BallPoint,
    PseudoBall,
    ball_measure_mc,
    ball_measure_model,
    ball_point,
    boundary_ball_family,
    interior_ball_family,
)
from holoball.integration import SampleStream, forelli_rudin_exponent, integrate_mu_q
from holoball.kernels import KernelParams, kernel_bounds_scan, kernel_inner, kernel_series_partial
from holoball.maximal import MaximalKind, maximal_value, regularize, tail_bound_ratio
from holoball.operators import TestFunction as TF
from holoball.operators import projection_identity_check
from holoball.experiments import (
    good_lambda_experiment,
    nonexistence_probe,
    norm_equivalence_experiment,
    weak_type_experiment,
)
from holoball.weights import (
    ClassSpec,
    Weight,
    ball_class_quantity,
    membership_verdict,
    parse_weight,
)


def _verdict(num, label, ok):
    print(f"ACCEPTANCE {num:2d} [{'PASS' if ok else 'FAIL'}] {label}")
    assert ok, f"acceptance criterion {num} failed: {label}"


def _random_inners(N, count, seed, cap=0.95):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        z = rng.standard_normal((count, N)) + 1j * rng.standard_normal((count, N))
        z *= rng.random((count, 1)) ** (1 / (2 * N)) / np.linalg.norm(z, axis=1, keepdims=True)
        w = rng.standard_normal((count, N)) + 1j * rng.standard_normal((count, N))
        w *= rng.random((count, 1)) ** (1 / (2 * N)) / np.linalg.norm(w, axis=1, keepdims=True)
        v = np.sum(z * np.conj(w), axis=1)
        out.extend(v[np.abs(v) <= cap])
    return np.asarray(out[:count])


def test_acceptance_01_kernel_agreement():
    # series partial sums vs closed-form power, 1e-10 relative
    worst = 0.0
    for N in (1, 2):
        v = _random_inners(N, 1000, seed=101 + N)
        for q in (-0.5, 0.0, 1.0):
            params = KernelParams(N, q)
            closed = kernel_inner(params, v)
            series = kernel_series_partial(params, v)
            worst = max(worst, float(np.max(np.abs(series - closed) / np.abs(closed))))
    _verdict(1, f"kernel series vs closed form, max rel err {worst:.2e} < 1e-10",
             worst < 1e-10)


def test_acceptance_02_hypergeometric_branch():
    # q=-2 log form within 1e-10; q=-3 scan bounded above and below
    p2 = KernelParams(1, -2.0)
    errs = [abs(kernel_inner(p2, v) + math.log(1 - v) / v) / abs(math.log(1 - v) / v)
            for v in np.arange(0.1, 0.95, 0.1)]
    scan = kernel_bounds_scan(KernelParams(1, -3.0))
    ok = max(errs) < 1e-10 and scan.max_is_finite and scan.min_modulus > 0
    _verdict(2, f"series branch: log-form err {max(errs):.2e}, "
                f"q=-3 bounds ({scan.min_modulus:.3f}, {scan.max_modulus:.3f})", ok)


def test_acceptance_03_ball_measure_model():
    # 100+ boundary and 100+ interior balls, one fitted C < 20 across q in {0,1}
    boundary = boundary_ball_family(1, j_max=9, radius_factors=(1.2, 1.5, 2.2, 3.0),
                                    n_dirs=3)
    interior = interior_ball_family(1, j_max=9, radius_factors=(0.15, 0.25, 0.35, 0.45),
                                    n_dirs=3)
    assert len(boundary) >= 100 and len(interior) >= 100
    worst = 1.0
    for q in (0.0, 1.0):
        for i, B in enumerate(boundary + interior):
            mc = ball_measure_mc(B, q, 20_000, 300 + i).real
            model = ball_measure_model(B, q)
            ratio = mc / model
            if ratio > 0:
                worst = max(worst, ratio, 1.0 / ratio)
            else:
                worst = math.inf
    _verdict(3, f"MC/model over {2 * (len(boundary) + len(interior))} cases: "
                f"fitted C = {worst:.2f} < 20", worst < 20)


def test_acceptance_04_forelli_rudin():
    ok = True
    details = []
    for c, d in ((1.0, 0.0), (0.0, 1.0), (0.5, 0.0)):
        fit = forelli_rudin_exponent(c, d, KernelParams(1, 0.0), n=150_000, seed=40)
        expected = max(c - d, 0.0)
        tol = 0.15 * max(expected, 1.0)
        ok = ok and not fit.log_flag and abs(fit.fitted_exponent - expected) <= tol
        details.append(f"({c:g},{d:g})->{fit.fitted_exponent:.3f}")
    log_fit = forelli_rudin_exponent(0.5, 0.5, KernelParams(1, 0.0), n=60_000, seed=41)
    ok = ok and log_fit.log_flag
    _verdict(4, "boundary growth exponents " + ", ".join(details) +
             f", log flag at c=d: {log_fit.log_flag}", ok)


def test_acceptance_05_projection_identity():
    # lhs/rhs in 1 +- 5 sigma with sigma < 0.02, for f in {1, z1}, N in {1,2}
    ok = True
    details = []
    for N in (1, 2):
        for terms in ([((0,) * N, 1.0)], [((1,) + (0,) * (N - 1), 1.0)]):
            z0 = ball_point(*([0.4] + [0.0] * (N - 1)))
            lhs, rhs, ratio = projection_identity_check(
                0.0, 1.0, terms, z0, N, n=300_000, seed=50 + N)
            sigma = lhs.stderr / abs(rhs)
            ok = ok and sigma < 0.02 and abs(ratio - 1.0) < 5 * sigma
            details.append(f"N={N}: ratio={float(np.real(ratio)):.4f} sigma={sigma:.4f}")
    _verdict(5, "projection identity " + "; ".join(details), ok)


def test_acceptance_06_norm_equivalence_window():
    # bounded-kernel regime: ratio stable within factor 4 under budget doubling;
    # a weight with divergent product flips the verdict to unbounded
    ok = True
    details = []
    for w in (Weight.constant(1.0), Weight.standard(0.5)):
        ratios = []
        for n, grid in ((15_000, 1500), (30_000, 3000)):
            rep = norm_equivalence_experiment(
                -3.0, 0.0, 2.0, 0.0, 0.0, w,
                budgets={"n": n, "grid": grid}, N=1, seed=60)
            ok = ok and rep.passed
            ratios.append(rep.fits["ratio"])
        stable = max(ratios) / min(ratios) < 4.0
        ok = ok and stable
        details.append(f"{w.label}: ratios {ratios[0]:.3f}/{ratios[1]:.3f}")
    div = norm_equivalence_experiment(-3.0, 0.0, 2.0, 0.0, 0.0,
                                      Weight.standard(1.0), N=1, seed=61)
    flipped = div.fits.get("verdict") == "unbounded"
    ok = ok and flipped
    _verdict(6, "; ".join(details) + f"; divergent weight flips: {flipped}", ok)


def test_acceptance_07_weak_type():
    rep = weak_type_experiment(0.0, 0.25, 0.0, n=6000, seed=70, grid=40_000)
    wk = rep.fits["weak_max"]
    strong = rep.fits["strong"]
    run_max = wk[0]
    bounded = True
    for v in wk[1:]:
        bounded = bounded and v < 1.10 * max(run_max, 1e-300)
        run_max = max(run_max, v)
    monotone = all(b >= a for a, b in zip(strong, strong[1:]))
    ok = bounded and monotone and rep.passed
    _verdict(7, f"weak ratios bounded (max {max(wk):.3f}), "
                f"strong ratios monotone {strong[0]:.3f}->{strong[-1]:.3f}", ok)


def test_acceptance_08_good_lambda():
    rep = good_lambda_experiment(Weight.constant(1.0), 0.0, 0.0, 0.0, 0.0, 2.0,
                                 n=4000, seed=80, N=1, grid=32_768, maximal_n=400)
    beta = rep.fits["beta"]
    r2 = rep.fits["r_squared"]
    ok = rep.fits["nonincreasing"] and math.isfinite(beta) and beta > 0 and r2 > 0.8
    _verdict(8, f"good-lambda decay beta={beta:.2f}, R^2={r2:.3f}, "
                f"nonincreasing={rep.fits['nonincreasing']}", ok)


def test_acceptance_09_class_machinery():
    fam = boundary_ball_family(1, j_max=7)
    ok = True
    details = []
    # member verdicts in valid regimes
    for label, spec, w in (
        ("Bp/const", ClassSpec("Bp", 1, 2.0, {"a": 0.0}), Weight.constant(1.0)),
        ("Bp/standard", ClassSpec("Bp", 1, 2.0, {"a": 0.0}), Weight.standard(0.3)),
        ("Dp/const", ClassSpec("Dp", 1, 2.0, {"s": 0.0, "t": 0.0, "q": 0.0, "Q": 0.0}),
         Weight.constant(1.0)),
    ):
        v, _ = membership_verdict(spec, w, family=fam, n=6000, seed=90)
        ok = ok and v == "member"
        details.append(f"{label}:{v}")
    # non-member with negative divergence slope
    v, rep = membership_verdict(ClassSpec("Bp", 1, 2.0, {"a": 0.0}),
                                Weight.standard(-2.0), family=fam, n=6000, seed=91)
    ok = ok and v == "non_member" and rep.slope < 0
    details.append(f"Bp/(1-|z|^2)^-2:{v} slope={rep.slope:.2f}")
    # Kp = Dp at Q = q within 1e-6 relative on shared streams
    params = {"s": 0.25, "t": 0.0, "q": 0.5, "Q": 0.5}
    B = PseudoBall(ball_point(0.875), 1.5 * 0.125)
    w = Weight.standard(0.3)
    kq = ball_class_quantity(ClassSpec("Kp", 1, 2.0, params), w, B, n=8000, seed=92)
    dq = ball_class_quantity(ClassSpec("Dp", 1, 2.0, params), w, B, n=8000, seed=92)
    agree = abs(kq.value - dq.value) / dq.value < 1e-6
    ok = ok and agree
    details.append(f"Kp=Dp rel diff {abs(kq.value - dq.value) / dq.value:.1e}")
    _verdict(9, "; ".join(details), ok)


def test_acceptance_10_nonexistence_probes():
    ok = True
    details = []
    for regime in ("st_low", "shifted_low", "Q_below_q"):
        rep = nonexistence_probe(regime, n=6000, seed=100)
        slopes = rep.fits["slopes"]
        ok = ok and all(s < -0.05 for s in slopes)
        details.append(f"{regime}: min slope {min(slopes):.2f}")
    _verdict(10, "; ".join(details), ok)


def _maximal_of_regularized(kind, k, b, f, z, n_max, n_reg, seed):
    """m_{a,b}(R_k^b f) at z: the inner average evaluated pointwise."""

    def rf(pts):
        pts = np.asarray(pts, dtype=complex)
        out = np.empty(pts.shape[0])
        for i in range(pts.shape[0]):
            out[i] = regularize("Rkb", k, b, f, pts[i], n=n_reg,
                                seed=seed + 3 * i).real
        return out

    return maximal_value(kind, rf, z, n=n_max, seed=seed + 1).real


def _regularized_maximal(kind, k, b, g, z, n_reg, n_max, seed):
    """R_k^b (m_{a,b} g)(z): the maximal function averaged over B_k(z)."""

    def mg(pts):
        pts = np.asarray(pts, dtype=complex)
        out = np.empty(pts.shape[0])
        for i in range(pts.shape[0]):
            out[i] = maximal_value(kind, g, pts[i], n=n_max,
                                   seed=seed + 5 * i).real
        return out

    return regularize("Rkb", k, b, mg, z, n=n_reg, seed=seed + 2).real


def test_acceptance_11_maximal_lemmas():
    s, t = 0.0, 0.25
    a, b = s + t, s
    kind = MaximalKind("m", a=a, b=b, N=1)
    z = ball_point(0.85)

    def f(pts):
        rho2 = np.sum(np.abs(pts) ** 2, axis=1)
        return 1.0 + 3.0 * (rho2 > 0.5)

    ok = True
    details = []
    for k in (0.1, 0.25):
        # domination of m by m of the regularized function: fitted constant
        c7 = []
        for n_max, n_reg in ((120, 200), (240, 400)):
            mf = maximal_value(kind, f, z, n=n_max, seed=110).real
            mrf = _maximal_of_regularized(kind, k, b, f, z, n_max, n_reg, 111)
            c7.append(mf / max(mrf, 1e-300))
        stable7 = max(c7) / min(c7) < 2.0 and all(map(math.isfinite, c7))

        # duality transfer: int f R_k^b g dmu_Q <= C int g R_{k'}^{b,Q} f dmu_b
        Qm = b + 2 * t  # a target measure exponent distinct from b
        c9 = []
        for n_out, n_reg in ((250, 200), (500, 400)):
            st_Q = SampleStream(1, Qm, n_out, 112, path=(1,))
            st_b = SampleStream(1, b, n_out, 112, path=(2,))

            def Rg(pts):
                pts = np.asarray(pts, dtype=complex)
                return np.array([
                    regularize("Rkb", k, b, f, pts[i], n=n_reg, seed=113 + i).real
                    for i in range(pts.shape[0])])

            def RQf(pts):
                pts = np.asarray(pts, dtype=complex)
                return np.array([
                    regularize("RkbQ", k, b, f, pts[i], n=n_reg, seed=114 + i,
                               Q=Qm).real
                    for i in range(pts.shape[0])])

            lhs = st_Q.integrate(lambda pts: f(pts) * Rg(pts)).real
            rhs = st_b.integrate(lambda pts: f(pts) * RQf(pts)).real
            c9.append(lhs / max(rhs, 1e-300))
        stable9 = max(c9) / min(c9) < 2.0 and all(map(math.isfinite, c9))

        # two-sided comparability of R_k^b(m g) with m g
        c11 = []
        for n_reg, n_max in ((120, 100), (240, 200)):
            mg = maximal_value(kind, f, z, n=n_max, seed=115).real
            rmg = _regularized_maximal(kind, k, b, f, z, n_reg, n_max, 116)
            c11.append(rmg / max(mg, 1e-300))
        stable11 = (max(c11) / min(c11) < 2.0 and all(map(math.isfinite, c11))
                    and all(c > 0 for c in c11))

        ok = ok and stable7 and stable9 and stable11
        details.append(f"k={k:g}: C7~{c7[-1]:.2f} C9~{c9[-1]:.2f} C11~{c11[-1]:.2f}")

    # tail bound against the explicit constant A = a0 2^{N+1+s+t} / (1-2^-beta)
    beta = 1.0
    z0 = ball_point(0.9)
    R = 0.1
    a0 = 0.0
    for j in range(6):
        RR = min(2.0 ** (j + 1) * R, 4.0)
        B = PseudoBall(z0, RR)
        a0 = max(a0, ball_measure_mc(B, s + t, 20_000, 117 + j).real
                 / RR ** (1 + 1 + s + t))
    A = a0 * 2.0 ** (1 + 1 + s + t) / (1.0 - 2.0 ** (-beta))
    est = tail_bound_ratio(s, t, z0, R, f, z0, beta, 1, n=40_000, seed=118)
    tail_ok = est.real <= A
    ok = ok and tail_ok
    details.append(f"tail ratio {est.real:.3f} <= A={A:.3f}")
    _verdict(11, "; ".join(details), ok)
