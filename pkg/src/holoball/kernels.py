"""Bergman-Besov kernels on the unit ball of C^N.

The kernel K_q(z,w) has two parameter branches:

  q > -(N+1):  (1 - <z,w>)^{-(N+1+q)}        (principal power)
  q <= -(N+1): 2F1(1,1; 1-(N+q); <z,w>)      (Gauss hypergeometric series)

where <z,w> = sum_j z_j conj(w_j).  The principal power is safe because
Re(1 - <z,w>) > 0 on the ball, so the branch cut is never crossed.

Everything here is gamma-free: Pochhammer symbols for integer order are
computed as direct products, which avoids pole handling for nonpositive
arguments.
"""

from dataclasses import dataclass

import numpy as np


class SeriesTruncationError(RuntimeError):
    """Hypergeometric series did not converge within the term budget."""

    def __init__(self, tail_bound, terms_used):
        super().__init__(
            f"series truncation budget exhausted after {terms_used} terms, "
            f"tail bound {tail_bound:.3e}"
        )
        self.tail_bound = tail_bound
        self.terms_used = terms_used


class DegenerateCoefficientError(ValueError):
    """d_k(s,t) requested where c_k(s) = 0."""


@dataclass(frozen=True)
class KernelParams:
    N: int
    q: float

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"dimension N must be >= 1, got {self.N}")

    @property
    def power_branch(self):
        """True when K_q is the closed-form power (q > -(N+1))."""
        return self.q > -(self.N + 1)


@dataclass(frozen=True)
class SeriesControl:
    max_terms: int = 10**6
    tail_tolerance: float = 1e-12

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_SERIES = SeriesControl()


def pochhammer(u, k):
    """Rising factorial (u)_k = u (u+1) ... (u+k-1) as a direct product."""
    if k < 0 or k != int(k):
        raise ValueError(f"pochhammer order must be a nonnegative integer, got {k}")
    out = 1.0
    for j in range(int(k)):
        out *= u + j
    return out


def coeff_c(params, a, k):
    """Kernel power-series coefficient c_k(a).

    c_k(a) = (N+1+a)_k / k!   if a > -(N+1)
           = k! / (1-N-a)_k   otherwise
    """
    N = params.N
    if a > -(N + 1):
        return pochhammer(N + 1 + a, k) / pochhammer(1.0, k)
    denom = pochhammer(1 - N - a, k)
    if denom == 0.0:
        raise DegenerateCoefficientError(f"c_{k}({a}) hits a zero Pochhammer factor")
    return pochhammer(1.0, k) / denom


def diff_coeff(s, t, params, k):
    """Radial-derivative coefficient d_k(s,t) = c_k(s+t)/c_k(s)."""
    den = coeff_c(params, s, k)
    if den == 0.0:
        raise DegenerateCoefficientError(
            f"d_{k}({s},{t}) undefined: c_{k}({s}) = 0"
        )
    return coeff_c(params, s + t, k) / den


def hyp2f1_11(c, v, ctl=DEFAULT_SERIES):
    """2F1(1,1;c;v) = sum_k k!/(c)_k v^k for |v| < 1, vectorized over v.

    Truncates when the geometric tail bound |term_k|/(1-|v|) drops below
    ctl.tail_tolerance; raises SeriesTruncationError if the budget runs out.
    """
    v = np.asarray(v, dtype=complex)
    scalar = v.ndim == 0
    v = np.atleast_1d(v)
    absv = np.abs(v)
    if np.any(absv >= 1.0):
        raise ValueError("hyp2f1_11 requires |v| < 1")
    if c <= 0 and c == int(c):
        raise ValueError(f"hyp2f1_11 parameter c={c} is a nonpositive integer")

    shape = v.shape
    v = v.ravel()
    gap = np.maximum(1.0 - np.abs(v), 1e-300)  # guards v = 0 entries
    total = np.ones_like(v)
    term = np.ones_like(v)
    # only the not-yet-converged entries advance; entries with |v| near 1
    # need many more terms than the bulk and must not drag everything along
    active = np.arange(v.size)
    k = 0
    while active.size:
        # term_{k+1} = term_k * (k+1)/(c+k) * v
        t = term[active] * ((k + 1.0) / (c + k)) * v[active]
        term[active] = t
        total[active] += t
        k += 1
        tail = np.abs(t) / gap[active]
        active = active[tail >= ctl.tail_tolerance]
        if k >= ctl.max_terms and active.size:
            raise SeriesTruncationError(float(np.max(np.abs(term[active]) / gap[active])), k)
    total = total.reshape(shape)
    return total[0] if scalar else total


def kernel_inner(params, v, ctl=DEFAULT_SERIES):
    """K_q as a function of the inner product v = <z,w>, vectorized."""
    v = np.asarray(v, dtype=complex)
    if params.power_branch:
        return np.exp(-(params.N + 1 + params.q) * np.log(1.0 - v))
    return hyp2f1_11(1.0 - (params.N + params.q), v, ctl)


def _coords(z):
    return np.asarray(getattr(z, "coords", z), dtype=complex)


def inner_product(z, w):
    """Hermitian inner product <z,w> = sum z_j conj(w_j)."""
    return complex(np.sum(_coords(z) * np.conj(_coords(w))))


def kernel_K(params, z, w, ctl=DEFAULT_SERIES):
    """Bergman-Besov kernel K_q(z,w) on the open ball."""
    return complex(kernel_inner(params, inner_product(z, w), ctl))


def kernel_series_partial(params, v, n_terms=None, ctl=DEFAULT_SERIES):
    """Truncated power series sum_k c_k(q) v^k of the kernel, vectorized.

    Used to cross-check the closed-form power branch against its expansion.
    Terms advance by the recurrence c_{k+1} = c_k (N+1+q+k)/(k+1) when
    q > -(N+1); for the lower branch this simply delegates to the 2F1 series.
    """
    if not params.power_branch:
        return kernel_inner(params, v, ctl)
    v = np.asarray(v, dtype=complex)
    absv = np.abs(v)
    gap = np.maximum(1.0 - absv, 1e-300)
    total = np.ones_like(v)
    term = np.ones_like(v)
    c = params.N + 1 + params.q
    k = 0
    budget = n_terms if n_terms is not None else ctl.max_terms
    while True:
        term = term * ((c + k) / (k + 1.0)) * v
        total = total + term
        k += 1
        if n_terms is not None:
            if k >= budget:
                break
            continue
        if np.all(np.abs(term) * np.maximum(c, 1.0) / gap < ctl.tail_tolerance):
            break
        if k >= ctl.max_terms:
            raise SeriesTruncationError(float(np.max(np.abs(term) / gap)), k)
    return total


@dataclass
class KernelScan:
    min_modulus: float
    max_modulus: float
    max_is_finite: bool
    rho0_estimate: float


def kernel_bounds_scan(params, grid_density=48, ctl=DEFAULT_SERIES):
    """Scan |K_q| over the disk of inner products, |v| capped at 1 - 1e-4.

    Reports the scanned min/max modulus, whether the max is finite in the
    limit (true iff q < -(N+1); the power branch blows up as v -> 1), and the
    largest radius rho0 such that Re K_q >= 1/2 whenever |v| <= rho0.
    """
    # radii accumulate toward the boundary where the kernel degenerates
    radii = 1.0 - np.logspace(0, -4, grid_density)
    radii = radii[radii > 0]
    angles = np.linspace(0.0, 2 * np.pi, 2 * grid_density, endpoint=False)
    rr, aa = np.meshgrid(radii, angles, indexing="ij")
    v = rr * np.exp(1j * aa)
    K = kernel_inner(params, v, ctl)
    mod = np.abs(K)
    re_min_by_radius = np.min(K.real, axis=1)
    # Re K >= 1/2 on |v| <= rho needs every scanned radius up to rho to pass
    ok = np.minimum.accumulate(re_min_by_radius) >= 0.5
    rho0 = float(radii[ok][-1]) if np.any(ok) else 0.0
    return KernelScan(
        min_modulus=float(np.min(mod)),
        max_modulus=float(np.max(mod)),
        max_is_finite=params.q < -(params.N + 1),
        rho0_estimate=rho0,
    )


class HomogeneousPolynomial:
    """Finite sum of monomials c_alpha z^alpha, all of one degree."""

    def __init__(self, terms):
        terms = [(tuple(int(a) for a in alpha), complex(c)) for alpha, c in terms]
        degrees = {sum(alpha) for alpha, _ in terms}
        if len(degrees) > 1:
            raise ValueError(f"terms of mixed degree {sorted(degrees)}")
        self.terms = terms
        self.degree = degrees.pop() if degrees else 0

    def __call__(self, z):
        z = np.asarray(getattr(z, "coords", z), dtype=complex)
        batch = z.ndim == 2
        Z = z if batch else z[None, :]
        out = np.zeros(Z.shape[0], dtype=complex)
        for alpha, c in self.terms:
            mono = np.ones(Z.shape[0], dtype=complex)
            for j, e in enumerate(alpha):
                if e:
                    mono = mono * Z[:, j] ** e
            out += c * mono
        return out if batch else complex(out[0])


def homogeneous_parts(terms):
    """Split a list of (multi-index, coefficient) terms by total degree."""
    by_deg = {}
    for alpha, c in terms:
        by_deg.setdefault(sum(alpha), []).append((alpha, c))
    return {d: HomogeneousPolynomial(ts) for d, ts in sorted(by_deg.items())}


def apply_I_st(f_terms, s, t, params, z):
    """I_s^t f(z) = (1-|z|^2)^t sum_k d_k(s,t) f_k(z) for polynomial f.

    f_terms is a list of (multi-index, coefficient) pairs, or a dict of
    homogeneous parts as produced by homogeneous_parts().
    """
    parts = f_terms if isinstance(f_terms, dict) else homogeneous_parts(f_terms)
    zc = np.asarray(getattr(z, "coords", z), dtype=complex)
    batch = zc.ndim == 2
    Z = zc if batch else zc[None, :]
    rho2 = np.sum(np.abs(Z) ** 2, axis=1)
    acc = np.zeros(Z.shape[0], dtype=complex)
    for deg, part in parts.items():
        acc += diff_coeff(s, t, params, deg) * part(Z)
    out = (1.0 - rho2) ** t * acc
    return out if batch else complex(out[0])
