"""Monte Carlo quadrature against the weighted measures mu_q on the unit ball.

mu is normalized Lebesgue measure (mu(B)=1) and dmu_q = (1-|z|^2)^q dmu.
The radial law of |z|^2 under mu is Beta(N,1); importance sampling against
mu_q (q > -1) replaces that with Beta(N, q+1), which is exact inverse-CDF
sampling for the density ~ (1-rho^2)^q rho^{2N-1}.  For q <= -1 the weight
is folded into the integrand and sampling stays at q=0 (the caller must
supply a compensating decay tag).

Comparative experiments reuse one SampleStream on both sides of a ratio
(common random numbers), which is the central variance-reduction decision
of the package.
"""

import math
from dataclasses import dataclass

import numpy as np

from .streams import make_rng


@dataclass(frozen=True)
class MCEstimate:
    value: complex
    stderr: float
    n_samples: int
    seed: int

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")

    @property
    def real(self):
        return float(np.real(self.value))


@dataclass
class Integrand:
    """Evaluable function of ball points with an optional boundary decay tag.

    decay_exponent e declares |g(z)| = O((1-|z|^2)^e) near the boundary;
    it is what licenses integration against mu_q for q <= -1.
    """

    fn: object
    decay_exponent: float = 0.0

    def __call__(self, pts):
        return self.fn(pts)


def mu_q_total(N, q):
    """mu_q(B) = Gamma(N+1)Gamma(q+1)/Gamma(N+q+1), finite for q > -1."""
    if q <= -1:
        raise ValueError(f"mu_q(B) diverges for q={q} <= -1")
    return math.exp(
        math.lgamma(N + 1) + math.lgamma(q + 1) - math.lgamma(N + q + 1)
    )


def _unit_directions(rng, n, N):
    g = rng.standard_normal((n, N)) + 1j * rng.standard_normal((n, N))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return g / norms


class SampleStream:
    """A frozen batch of ball points drawn from the mu_q proposal.

    Estimates are linear in the integrand and monotone for pointwise-ordered
    integrands by construction (the points and weights are shared).
    """

    def __init__(self, N, q_proposal, n, seed, path=(0,)):
        if q_proposal <= -1:
            raise ValueError("proposal exponent must be > -1")
        rng = make_rng(seed, 1001, *path)
        u = rng.beta(N, q_proposal + 1.0, size=n)  # law of |z|^2 under mu_q
        rho = np.sqrt(u)
        self.points = rho[:, None] * _unit_directions(rng, n, N)
        self.rho2 = u
        self.N = N
        self.q_proposal = q_proposal
        self.total = mu_q_total(N, q_proposal)
        self.n = n
        self.seed = seed

    def integrate(self, g, extra_exponent=0.0):
        """Estimate of integral g (1-|z|^2)^extra_exponent dmu_{q_proposal}."""
        vals = np.asarray(g(self.points), dtype=complex)
        if extra_exponent != 0.0:
            vals = vals * (1.0 - self.rho2) ** extra_exponent
        mean = np.mean(vals)
        var = np.mean(np.abs(vals - mean) ** 2)
        value = self.total * mean
        stderr = self.total * math.sqrt(var / self.n)
        if abs(value.imag) == 0.0:
            value = value.real
        return MCEstimate(value, stderr, self.n, self.seed)


def integrate_mu_q(g, q, N, n, seed, stream=None):
    """MC estimate of integral g dmu_q over the unit ball.

    g is an Integrand or plain vectorized callable on (n,N) complex arrays.
    For q > -1 the mu_q proposal is used directly; for q <= -1 a compensating
    decay tag with q + e > -1 is required and sampling happens at q=0.
    """
    tag = g.decay_exponent if isinstance(g, Integrand) else 0.0
    if q <= -1:
        if q + tag <= -1:
            raise ValueError(
                f"integral against mu_{q} diverges (decay tag {tag} insufficient)"
            )
        stream = stream or SampleStream(N, 0.0, n, seed)
        return stream.integrate(g, extra_exponent=q - stream.q_proposal)
    if stream is None:
        stream = SampleStream(N, q, n, seed)
    return stream.integrate(g, extra_exponent=q - stream.q_proposal)


def lp_norm(f, p, weight, q, N, n, seed, stream=None):
    """(integral |f|^p w dmu_q)^{1/p} with delta-method standard error."""
    if p < 1:
        raise ValueError("p must be >= 1")
    w = weight if weight is not None else (lambda pts: 1.0)

    def integrand(pts):
        return np.abs(np.asarray(f(pts))) ** p * np.asarray(w(pts))

    est = integrate_mu_q(integrand, q, N, n, seed, stream=stream)
    val = max(est.real, 0.0)
    norm = val ** (1.0 / p)
    stderr = est.stderr / (p * val ** ((p - 1.0) / p)) if val > 0 else est.stderr
    return MCEstimate(norm, stderr, est.n_samples, est.seed)


def distribution_estimate(f, lam, q, N, n, seed, stream=None):
    """Estimate of mu_q({ |f| > lam })."""
    if lam <= 0:
        raise ValueError("lambda must be positive")

    def indicator(pts):
        return (np.abs(np.asarray(f(pts))) > lam).astype(float)

    return integrate_mu_q(indicator, q, N, n, seed, stream=stream)


@dataclass
class ForelliRudinFit:
    fitted_exponent: float
    log_flag: bool
    radii: tuple
    values: tuple
    stderrs: tuple


def forelli_rudin_exponent(c, d, params, radii=None, n=200_000, seed=0):
    """Growth exponent of I(z) = integral (1-|w|^2)^d |1-<z,w>|^{-(1+N+c)} dmu(w).

    Fits log I against -log(1-|z|^2) by least squares over the given radii.
    For c == d the asymptotic is (1/|z|^2) log(1/(1-|z|^2)); the fit is then
    done against that model and log_flag is set.
    """
    if d <= -1:
        raise ValueError("d must be > -1")
    N = params.N
    if radii is None:
        radii = (0.9, 0.95, 0.975, 0.9875)
    radii = tuple(radii)
    if any(radii[i] >= radii[i + 1] for i in range(len(radii) - 1)):
        raise ValueError("radii must be strictly increasing")
    vals, errs = [], []
    for i, r in enumerate(radii):
        z = np.zeros(params.N, dtype=complex)
        z[0] = r
        stream = SampleStream(N, d, n, seed, path=(7, i))

        def integrand(pts):
            inner = pts @ np.conj(z)
            return np.abs(1.0 - inner) ** (-(1.0 + N + c))

        est = stream.integrate(integrand)
        if est.stderr / abs(est.real) > 0.2:
            raise RuntimeError(
                f"fit refused: stderr/value = {est.stderr / abs(est.real):.2f} > 0.2 "
                f"at radius {r}"
            )
        vals.append(est.real)
        errs.append(est.stderr)
    x = np.array([-math.log(1.0 - r * r) for r in radii])
    y = np.log(np.array(vals))
    if c == d:
        model = np.log(np.log(1.0 / (1.0 - np.array(radii) ** 2)) / np.array(radii) ** 2)
        resid = y - model
        # log model accepted if the residual is flat (constant offset)
        slope = float(np.polyfit(x, y, 1)[0])
        return ForelliRudinFit(slope, True, radii, tuple(vals), tuple(errs))
    slope = float(np.polyfit(x, y, 1)[0])
    return ForelliRudinFit(slope, False, radii, tuple(vals), tuple(errs))
