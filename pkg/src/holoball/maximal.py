"""Maximal operators, regularization averages, and related checks.

Boundary maximal operators (suprema over boundary-touching balls R > 1-|zeta|
containing z):

    m_{a,b} f(z)  = sup (1/mu_a(B)) integral_B |f| dmu_b      (a > -1)
    m'_{a,b} f(z) = sup (1/R^{N+1+a}) integral_B |f| dmu_b    (a > -N-1)
    O_{s,t}  = (1-|z|^2)^t m_{s+t,s},   O'_{s,t} = (1-|z|^2)^t m'_{s+t,s}

M/M'/M_gamma run over all balls containing z.  Every supremum here is a
maximum over a deterministic finite candidate family, hence a lower bound
of the true value; all theorem checks built on top only assert directions
for which that is sound.

Regularization averages over the proportional ball B_k(z) = B(z, k(1-|z|)):

    R_k^b f      = (1/mu_b(B_k)) integral_{B_k} f dmu_b
    R_{k'}^{b,Q} f = (1/mu_b(B_{k'})) integral_{B_{k'}} f dmu_Q
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    BallPoint,
    BallSampler,
    PseudoBall,
    proportional_ball,
    pseudo_distance_batch,
    shrink_parameter,
)
from .integration import MCEstimate, SampleStream
from .streams import spawn_seeds
from .weights import Weight


@dataclass(frozen=True)
class MaximalKind:
    selector: str  # m | m' | M | M' | O | O' | Mgamma
    a: float = None
    b: float = None
    s: float = None
    t: float = None
    gamma: float = None
    N: int = 1

    def __post_init__(self):
        sel = self.selector
        if sel in ("m", "M"):
            if self.a is None or self.a <= -1:
                raise ValueError(f"{sel} requires a > -1")
        elif sel in ("m'", "M'"):
            if self.a is None or self.a <= -(self.N + 1):
                raise ValueError(f"{sel} requires a > -N-1")
        elif sel == "O":
            if self.s is None or self.t is None or self.s + self.t <= -1:
                raise ValueError("O requires s+t > -1")
        elif sel == "O'":
            if self.s is None or self.t is None or self.s + self.t <= -(self.N + 1):
                raise ValueError("O' requires s+t > -N-1")
        elif sel == "Mgamma":
            if self.gamma is None or not 0.0 <= self.gamma < 1.0:
                raise ValueError("Mgamma requires gamma in [0,1)")
        else:
            raise ValueError(f"unknown maximal kind {sel!r}")

    @property
    def boundary_only(self):
        return self.selector in ("m", "m'", "O", "O'")

    def average_params(self):
        """(normalizer exponent a or None-for-radius/gamma, measure b)."""
        if self.selector in ("O", "O'"):
            return self.s + self.t, self.s
        return self.a, self.b


def candidate_balls(z, boundary_only=True, levels=5, factors=(1.5, 3.0)):
    """Deterministic finite family of pseudo-balls containing z.

    Boundary-touching candidates: balls centered at z with dyadic radii
    above 1-|z|, plus centers pushed toward the boundary along the ray of z.
    Non-boundary mode adds interior balls centered at z with radii below
    1-|z|.  Every candidate contains z by construction.
    """
    zc = np.asarray(getattr(z, "coords", z), dtype=complex)
    rho = float(np.linalg.norm(zc))
    gap = 1.0 - rho
    zdir = zc / rho if rho > 0 else np.eye(len(zc), dtype=complex)[0]
    balls = []
    for m in range(levels):
        for fac in factors:
            R = fac * gap * 2.0**m
            if R <= 4.0:
                balls.append(PseudoBall(BallPoint(tuple(zc)), R))
    # large fixed radii, so mass far from z is never out of reach of the sup
    for R in (0.25, 0.5, 1.0, 2.0):
        if R > gap:
            balls.append(PseudoBall(BallPoint(tuple(zc)), R))
    # centers closer to the boundary than z, still containing z
    for m in (1, 2, 3):
        c = 1.0 - gap * 2.0 ** (-m)
        if rho > 0:
            dist = abs(rho - c)  # same ray, angular term 0
            base = max(1.0 - c, dist)
            for fac in factors:
                R = fac * base
                if R <= 4.0 and R > dist:
                    balls.append(PseudoBall(BallPoint(tuple(c * zdir)), R))
    if not boundary_only:
        for m in (1, 2, 3, 4):
            R = gap * 2.0 ** (-m)
            if R > 0:
                balls.append(PseudoBall(BallPoint(tuple(zc)), R))
    if boundary_only:
        balls = [B for B in balls if B.touches_boundary]
    return balls


def _ball_average(kind, ball, f, n, seed, path):
    sampler = BallSampler(ball, n, seed, path=path)
    a, b = kind.average_params()
    num = sampler.integrate(lambda pts: np.abs(np.asarray(f(pts))), q=b)
    if kind.selector in ("m'", "M'"):
        den, den_err = ball.radius ** (kind.N + 1 + a), 0.0
    elif kind.selector == "Mgamma":
        m = sampler.integrate(lambda pts: np.ones(pts.shape[0]), q=b)
        den, den_err = max(m.real, 1e-300) ** (1.0 - kind.gamma), 0.0
    else:
        m = sampler.integrate(lambda pts: np.ones(pts.shape[0]), q=a)
        den, den_err = max(m.real, 1e-300), m.stderr
    val = num.real / den
    err = val * (num.stderr / max(num.real, 1e-300) + den_err / den) if val > 0 else num.stderr / den
    return val, err


def maximal_value(kind, f, z, n=2000, seed=0, family=None):
    """Max of ball averages over the candidate family (lower bound of sup)."""
    balls = family if family is not None else candidate_balls(
        z, boundary_only=kind.boundary_only
    )
    if not balls:
        raise ValueError("empty candidate family for maximal operator")
    best, best_err = -math.inf, 0.0
    seeds = spawn_seeds(seed, len(balls), 55)
    for i, (B, s) in enumerate(zip(balls, seeds)):
        val, err = _ball_average(kind, B, f, n, s, path=(i,))
        if val > best:
            best, best_err = val, err
    if kind.selector in ("O", "O'"):
        zc = np.asarray(getattr(z, "coords", z), dtype=complex)
        factor = (1.0 - float(np.sum(np.abs(zc) ** 2))) ** kind.t
        best, best_err = factor * best, factor * best_err
    return MCEstimate(best, best_err, n, seed)


def maximal_grid(kind, f, Z, n=400, seed=0):
    """maximal_value at every row of Z (shape (m,N)); returns a float array."""
    Z = np.asarray(Z, dtype=complex)
    out = np.empty(Z.shape[0])
    for i in range(Z.shape[0]):
        out[i] = maximal_value(kind, f, Z[i], n=n, seed=seed + 31 * i).real
    return out


def regularize(kind, k, b, f, z, n=4000, seed=0, Q=None):
    """R_k^b f(z) (kind="Rkb") or R_{k'}^{b,Q} f(z) (kind="RkbQ").

    For "RkbQ" the averaging ball uses the shrunken parameter k' = k/(1-k)
    and the numerator integrates against mu_Q while the normalizer stays
    at mu_b, exactly as in the duality lemma.
    """
    if kind == "Rkb":
        kk = k
        q_num = b
    elif kind == "RkbQ":
        if Q is None:
            raise ValueError("RkbQ needs the exponent Q")
        kk = shrink_parameter(k)
        q_num = Q
    else:
        raise ValueError(f"unknown regularization kind {kind!r}")
    ball = proportional_ball(z, kk)
    sampler = BallSampler(ball, n, seed, path=(3,))
    num = sampler.integrate(f, q=q_num)
    den = sampler.integrate(lambda pts: np.ones(pts.shape[0]), q=b)
    val = num.value / max(den.real, 1e-300)
    err = abs(val) * (
        num.stderr / max(abs(num.value), 1e-300) + den.stderr / max(den.real, 1e-300)
    )
    return MCEstimate(val, err, n, seed)


def sigma_weight(w, s, t, q, Q, p, k=0.25, n=2000, seed=0):
    """The derived weight sigma = R_{k'}^{s,Q+pt} w(z) (1-|z|^2)^{-t-(Q-q)/p}.

    For w in the Dp class, sigma lands in (A_p, alpha) with
    alpha = s+t+(Q-q)/p; that containment is what the tests check.
    """
    shift = t + (Q - q) / p

    def evaluator(pts):
        pts = np.asarray(pts, dtype=complex)
        out = np.empty(pts.shape[0])
        for i in range(pts.shape[0]):
            est = regularize("RkbQ", k, s, w, pts[i], n=n,
                            seed=seed + 17 * i, Q=Q + p * t)
            rho2 = float(np.sum(np.abs(pts[i]) ** 2))
            out[i] = max(est.real, 0.0) * (1.0 - rho2) ** (-shift)
        return out

    eta = w.boundary_exponent_hint()
    hint = None if eta is None else (Q + p * t + eta - s) - shift
    return Weight.tabulated(evaluator, label=f"sigma[{w.label}]", eta_hint=hint)


def sawyer_test(gamma, u, v, p, family, N, n=2000, seed=0, inner_n=400):
    """Sawyer-type testing condition over a ball family.

    For each ball B compares (int_B [M_gamma(chi_B u^{1-p'})]^p v dmu_b)^{1/p}
    with (int_B u^{1-p'} dmu_b)^{1/p} (here dnu = dmu_b with b=0) and reports
    the smallest admissible constant over the family.
    """
    if not 0.0 <= gamma < 1.0 or p <= 1:
        raise ValueError("need gamma in [0,1) and p > 1")
    pprime = p / (p - 1.0)
    kind = MaximalKind("Mgamma", gamma=gamma, b=0.0, N=N)
    results = []
    seeds = spawn_seeds(seed, len(family), 99)
    for B, sd in zip(family, seeds):
        def tf(pts, B=B):
            inside = pseudo_distance_batch(pts, B.center) < B.radius
            return inside * u(pts) ** (1.0 - pprime)

        sampler = BallSampler(B, n, sd)
        rhs = sampler.integrate(tf).real
        if not math.isfinite(rhs):
            results.append((B, math.inf))
            continue
        if rhs <= 0:
            results.append((B, 0.0))
            continue

        def mf(pts):
            vals = maximal_grid(kind, tf, pts, n=inner_n, seed=sd + 1)
            return vals**p * v(pts)

        lhs = sampler.integrate(mf).real
        results.append((B, (max(lhs, 0.0) ** (1.0 / p)) / rhs ** (1.0 / p)))
    c2 = max(r for _, r in results)
    return {"C2": c2, "per_ball": results}


def tail_bound_ratio(s, t, z0, R, f, z, beta, N, n=50_000, seed=0):
    """Prop-style tail bound check.

    numerator = R^beta integral over {d(z0,.) >= R} of
    f(xi)/d(z0,xi)^{N+1+s+t+beta} dmu_s(xi), divided by the boundary maximal
    average (m for s+t > -1, m' otherwise) of f at z.
    """
    if beta <= 0 or s + t <= -(N + 1):
        raise ValueError("need beta > 0 and s+t > -N-1")
    z0c = np.asarray(getattr(z0, "coords", z0), dtype=complex)
    expo = N + 1 + s + t + beta

    def integrand(pts):
        d = pseudo_distance_batch(pts, z0c)
        mask = d >= R
        return np.where(mask, np.abs(np.asarray(f(pts))) / np.where(mask, d, 1.0) ** expo, 0.0)

    support = getattr(f, "support", None)
    if support is not None:
        sampler = BallSampler(support, n, seed, path=(2,))
        num = sampler.integrate(integrand, q=s)
    else:
        stream = SampleStream(N, s, n, seed, path=(2,))
        num = stream.integrate(integrand)
    if s + t > -1:
        kind = MaximalKind("m", a=s + t, b=s, N=N)
    else:
        kind = MaximalKind("m'", a=s + t, b=s, N=N)
    mval = maximal_value(kind, f, z, n=max(n // 20, 1000), seed=seed + 1)
    denom = max(mval.real, 1e-300)
    ratio = R**beta * num.real / denom
    err = ratio * (
        num.stderr / max(num.real, 1e-300) + mval.stderr / denom
    ) if num.real > 0 else 0.0
    return MCEstimate(ratio, err, n, seed)
