"""The weighted integral operators T_{a,b}, S_{a,b}, P_{s,t} and friends.

    T_{a,b} f(z) = integral K_a(z,w) f(w) (1-|w|^2)^{b-q} dmu_q(w)
                 = integral K_a(z,w) f(w) dmu_b(w)
    S_{a,b} f(z) = the same with |K_a| |f|
    P_{s,t} f(z) = (1-|z|^2)^t T_{s+t,s} f(z)

Evaluation integrates against mu_b directly (b > -1 throughout).  Test
functions with small supports are integrated on a sampler restricted to the
support, which keeps the variance independent of the support size.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import BallPoint, BallSampler, PseudoBall, pseudo_distance, pseudo_distance_batch
from .integration import MCEstimate, SampleStream, mu_q_total
from .kernels import DEFAULT_SERIES, KernelParams, kernel_inner, pochhammer, apply_I_st
from .streams import make_rng


@dataclass(frozen=True)
class OperatorSpec:
    op: str  # "T" | "S" | "P"
    N: int
    a: float = None  # T/S parameters
    b: float = None
    s: float = None  # P parameters
    t: float = None
    p: float = 2.0
    q: float = 0.0
    Q: float = 0.0

    def __post_init__(self):
        if self.op in ("T", "S"):
            if self.a is None or self.b is None:
                raise ValueError(f"{self.op} needs parameters a, b")
            if self.b <= -1:
                raise ValueError("b > -1 is required throughout")
        elif self.op == "P":
            if self.s is None or self.t is None:
                raise ValueError("P needs parameters s, t")
            if self.s <= -1:
                raise ValueError("s > -1 is required throughout")
        else:
            raise ValueError(f"unknown operator {self.op!r}")

    @property
    def kernel_a(self):
        return self.a if self.op in ("T", "S") else self.s + self.t

    @property
    def measure_b(self):
        return self.b if self.op in ("T", "S") else self.s


class TestFunction:
    """Evaluable test function with support/decay metadata.

    kinds: indicator(ball, boundary power), dual-weight, monomial, and the
    kernel-window (1-|w|^2)^{-b} chi_{B(0,R)} used by the reproducing-
    property checks.
    """

    def __init__(self, fn, kind, support=None, decay_exponent=0.0, label=""):
        self.fn = fn
        self.kind = kind
        self.support = support  # PseudoBall or None for global support
        self.decay_exponent = decay_exponent
        self.label = label or kind

    def __call__(self, pts):
        return self.fn(np.asarray(pts, dtype=complex))

    @staticmethod
    def indicator(ball, beta=0.0):
        def fn(pts):
            rho2 = np.sum(np.abs(pts) ** 2, axis=1)
            inside = pseudo_distance_batch(pts, ball.center) < ball.radius
            return inside * (1.0 - rho2) ** beta

        return TestFunction(fn, "indicator", support=ball, decay_exponent=beta,
                            label=f"chi_B*(1-|z|^2)^{beta:g}")

    @staticmethod
    def dual_weight_fn(w, p, exponent):
        def fn(pts):
            rho2 = np.sum(np.abs(pts) ** 2, axis=1)
            return w(pts) ** (-1.0 / (p - 1.0)) * (1.0 - rho2) ** exponent

        eta = w.boundary_exponent_hint() or 0.0
        return TestFunction(fn, "dual", decay_exponent=exponent - eta / (p - 1.0),
                            label=f"w^(-1/(p-1))*(1-|z|^2)^{exponent:g}")

    @staticmethod
    def monomial(alpha):
        alpha = tuple(int(a) for a in alpha)

        def fn(pts):
            out = np.ones(pts.shape[0], dtype=complex)
            for j, e in enumerate(alpha):
                if e:
                    out = out * pts[:, j] ** e
            return out

        return TestFunction(fn, "monomial", label=f"z^{alpha}")

    @staticmethod
    def kernel_window(b, R, N):
        ball = PseudoBall(BallPoint((0.0,) * N), R)

        def fn(pts):
            rho2 = np.sum(np.abs(pts) ** 2, axis=1)
            inside = np.sqrt(rho2) < R
            return inside * (1.0 - rho2) ** (-b)

        return TestFunction(fn, "kernel_window", support=ball, decay_exponent=-b,
                            label=f"(1-|w|^2)^{-b:g}*chi_(|w|<{R:g})")


def _coords(z):
    return np.asarray(getattr(z, "coords", z), dtype=complex)


def _eval_T_like(spec, f, z, n, seed, absolute, ctl, stream):
    a, b = spec.kernel_a, spec.measure_b
    params = KernelParams(spec.N, a)
    zc = _coords(z)

    def integrand(pts):
        K = kernel_inner(params, np.conj(pts) @ zc, ctl)
        vals = np.asarray(f(pts))
        if absolute:
            return np.abs(K) * np.abs(vals)
        return K * vals

    support = getattr(f, "support", None)
    if support is not None:
        sampler = stream if isinstance(stream, BallSampler) else BallSampler(
            support, n, seed, path=(4,)
        )
        return sampler.integrate(integrand, q=b)
    st = stream or SampleStream(spec.N, b, n, seed, path=(4,))
    return st.integrate(integrand)


def apply_T(spec, f, z, n=100_000, seed=0, ctl=DEFAULT_SERIES, stream=None):
    """MC estimate of T_{a,b} f(z) (integration against mu_b)."""
    return _eval_T_like(spec, f, z, n, seed, absolute=False, ctl=ctl, stream=stream)


def apply_S(spec, f, z, n=100_000, seed=0, ctl=DEFAULT_SERIES, stream=None):
    """MC estimate of S_{a,b} f(z) >= |T_{a,b} f(z)| on shared streams."""
    return _eval_T_like(spec, f, z, n, seed, absolute=True, ctl=ctl, stream=stream)


def apply_P(spec, f, z, n=100_000, seed=0, ctl=DEFAULT_SERIES, stream=None,
            direct=False):
    """P_{s,t} f(z) = (1-|z|^2)^t T_{s+t,s} f(z).

    direct=True integrates the kernel H_{s,t}(z,w) explicitly instead of
    using the identity; on a shared stream both paths must agree.
    """
    if spec.op != "P":
        raise ValueError("apply_P needs a P operator spec")
    zc = _coords(z)
    factor = (1.0 - float(np.sum(np.abs(zc) ** 2))) ** spec.t
    tspec = OperatorSpec("T", spec.N, a=spec.s + spec.t, b=spec.s,
                         p=spec.p, q=spec.q, Q=spec.Q)
    if direct:
        params = KernelParams(spec.N, spec.s + spec.t)

        def integrand(pts):
            H = factor * kernel_inner(params, np.conj(pts) @ zc, ctl)
            return H * np.asarray(f(pts))

        support = getattr(f, "support", None)
        if support is not None:
            sampler = stream if isinstance(stream, BallSampler) else BallSampler(
                support, n, seed, path=(4,)
            )
            return sampler.integrate(integrand, q=spec.s)
        st = stream or SampleStream(spec.N, spec.s, n, seed, path=(4,))
        return st.integrate(integrand)
    base = apply_T(tspec, f, z, n=n, seed=seed, ctl=ctl, stream=stream)
    return MCEstimate(factor * base.value, factor * base.stderr,
                      base.n_samples, base.seed)


def eval_grid(spec, f, Z, n=20_000, seed=0, ctl=DEFAULT_SERIES, absolute=False,
              stream=None, chunk=512):
    """Vectorized T/S (or H-kernel for P) values on a grid Z of shape (m,N).

    One shared w-sample serves every grid point (common random numbers), so
    ratios across the grid are smooth.  Returns a complex (or real) array.
    """
    a, b = spec.kernel_a, spec.measure_b
    params = KernelParams(spec.N, a)
    Z = np.asarray(Z, dtype=complex)
    support = getattr(f, "support", None)
    if support is not None:
        sampler = stream or BallSampler(support, n, seed, path=(5,))
        W = sampler.points
        base_w = sampler.weights * (1.0 - sampler.rho2) ** b / sampler.n
    else:
        st = stream or SampleStream(spec.N, b, n, seed, path=(5,))
        W = st.points
        base_w = np.full(W.shape[0], st.total / st.n)
    fw = np.asarray(f(W))
    out = np.empty(Z.shape[0], dtype=float if absolute else complex)
    for i0 in range(0, Z.shape[0], chunk):
        zblk = Z[i0 : i0 + chunk]
        V = zblk @ np.conj(W.T)
        K = kernel_inner(params, V, ctl)
        if absolute:
            out[i0 : i0 + chunk] = (np.abs(K) * (np.abs(fw) * base_w)[None, :]).sum(axis=1)
        else:
            out[i0 : i0 + chunk] = (K * (fw * base_w)[None, :]).sum(axis=1)
    if spec.op == "P":
        rho2 = np.sum(np.abs(Z) ** 2, axis=1)
        out = out * (1.0 - rho2) ** spec.t
    return out


def boundedness_predicate(a, b, q, Q, p, P, N):
    """Unweighted boundedness criterion for T_{a,b}: L^p_q -> L^P_Q.

    Case 1 < p <= P < infinity: (1+q)/p < 1+b and
    a <= b + (1+N+Q)/P - (1+N+q)/p; for p=1 both hold weakly with at least
    one strict; for P=infinity both are strict.
    """
    if not (1 <= p <= P):
        raise ValueError("need 1 <= p <= P")
    if P != math.inf and Q <= -1:
        raise ValueError("need Q > -1 when P < infinity")
    if b <= -1 or q <= -1:
        raise ValueError("need b > -1 and q > -1")
    lhs1, rhs1 = (1.0 + q) / p, 1.0 + b
    if P == math.inf:
        lhs2, rhs2 = a, b - (1.0 + N + q) / p
        return lhs1 < rhs1 and lhs2 < rhs2
    lhs2, rhs2 = a, b + (1.0 + N + Q) / P - (1.0 + N + q) / p
    if p == 1:
        return lhs1 <= rhs1 and lhs2 <= rhs2 and (lhs1 < rhs1 or lhs2 < rhs2)
    return lhs1 < rhs1 and lhs2 <= rhs2


def hormander_integral(s, t, q, w, w0, C2, N, n=200_000, seed=0, ctl=DEFAULT_SERIES):
    """integral over {d(z,w0) > C2 d(w,w0)} of |H_st(z,w) - H_st(z,w0)| dmu_q(z).

    H_{s,t}(z,w) = (1-|z|^2)^t (1-<z,w>)^{-(N+1+s+t)} is the kernel of P_{s,t}.
    """
    wc, w0c = _coords(w), _coords(w0)
    dist = pseudo_distance(wc, w0c)
    params = KernelParams(N, s + t)
    stream = SampleStream(N, max(q, 0.0), n, seed, path=(6,))

    def integrand(pts):
        rho2 = np.sum(np.abs(pts) ** 2, axis=1)
        mask = pseudo_distance_batch(pts, w0c) > C2 * dist
        H1 = kernel_inner(params, pts @ np.conj(wc), ctl)
        H0 = kernel_inner(params, pts @ np.conj(w0c), ctl)
        return mask * (1.0 - rho2) ** t * np.abs(H1 - H0)

    return stream.integrate(integrand, extra_exponent=q - stream.q_proposal)


def projection_identity_check(s, t, f_terms, z0, N, n=400_000, seed=0,
                              ctl=DEFAULT_SERIES):
    """lhs = P_s(I_s^t f)(z0) vs rhs = N!/((1+s+t)_N) f(z0) for polynomial f.

    P_s here is the Bergman-Besov projection T_{s,s} at level q=s.
    """
    params = KernelParams(N, s)
    z0c = _coords(z0)
    stream = SampleStream(N, s, n, seed, path=(8,))

    def integrand(pts):
        K = kernel_inner(params, np.conj(pts) @ z0c, ctl)
        return K * apply_I_st(f_terms, s, t, params, pts)

    lhs_est = stream.integrate(integrand)
    from .kernels import homogeneous_parts

    parts = homogeneous_parts(f_terms)
    f_at_z0 = sum(part(z0c) for part in parts.values())
    rhs = math.factorial(N) / pochhammer(1.0 + s + t, N) * f_at_z0
    ratio = lhs_est.value / rhs if rhs != 0 else math.inf
    return lhs_est, rhs, ratio


def interpolated_norm(A_p0, p0, A_p1, p1, p_t, convention="subtractive"):
    """Marcinkiewicz interpolation constant for the strong (p_t,p_t) bound.

    The source formula subtracts the two weak-norm terms where the classical
    statement adds them; both conventions are available and labeled.  For
    p1 = infinity the bracket has a single term and the conventions agree.
    A negative bracket under the subtractive convention raises.
    """
    if not (p0 < p_t < p1):
        raise ValueError("need p0 < p_t < p1")
    if p1 == math.inf:
        bracket = p_t * A_p0**p0 / (p_t - p0)
    else:
        second = A_p1**p1 / (p1 - p_t)
        first = A_p0**p0 / (p_t - p0)
        if convention == "subtractive":
            bracket = p_t * (first - second)
        elif convention == "classical":
            bracket = p_t * (first + second)
        else:
            raise ValueError(f"unknown convention {convention!r}")
    if bracket <= 0:
        raise ValueError(
            f"nonpositive bracket {bracket:g} under the {convention} convention; "
            "use convention='classical'"
        )
    return 2.0 * bracket ** (1.0 / p_t)


def paired_boundary_balls(N, R, C1=4.0, margin=3.0):
    """Two boundary-touching balls of radius R at pseudo-distance margin*C1*R.

    Used by the kernel lower-bound tests: a positive f supported in the
    first ball makes |T_{a,b} f| comparable to R^{-(N+1+a)} integral_B f dmu_b
    on the second.  The separation margin 3 is our slack on "sufficiently far".
    """
    sep = margin * C1 * R
    r = 1.0 - R / 2.0
    phi = 2.0 * math.asin(min(1.0, sep / 2.0))
    c1 = np.zeros(N, dtype=complex)
    c1[0] = r
    c2 = np.zeros(N, dtype=complex)
    c2[0] = r * np.exp(1j * phi)
    B_i = PseudoBall(BallPoint(tuple(c1)), R)
    B_j = PseudoBall(BallPoint(tuple(c2)), R)
    return B_i, B_j
