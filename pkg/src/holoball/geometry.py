"""Pseudo-metric geometry of the unit ball of C^N.

The pseudo-distance is

    d(z,w) = ||z| - |w|| + |1 - <z,w>/(|z||w|)|

with the angular term defined as 0 when either argument sits at the origin
(so d(0,w) = |w|); the formula itself is indeterminate there, and every
model claim below is restricted to centers away from 0 accordingly.

The key structural fact used throughout: d(z,w) depends only on the radii
(rho, r) and the direction inner product v = <z/|z|, w/|w|>, and Lebesgue
measure factorizes through the same coordinates:

    dmu = 2N rho^{2N-1} drho  x  nu_N(dv)  x  (uniform on the orthogonal sphere)

where nu_N is the law of v for a uniform direction: the uniform circle for
N=1, density (N-1)/pi (1-|v|^2)^{N-2} on the unit disk for N >= 2.  A
pseudo-ball is a product region in (rho, v), so restricted sampling is done
by proposing (rho, v) from a tight bounding box and importance-weighting
back to mu.  That makes small boundary balls as cheap as big ones.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .integration import MCEstimate
from .streams import make_rng

REJECTION_BUDGET = 10_000


def _coords(z):
    return np.asarray(getattr(z, "coords", z), dtype=complex)


@dataclass(frozen=True)
class BallPoint:
    coords: tuple
    modulus: float = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=complex).reshape(-1)
        object.__setattr__(self, "coords", tuple(c))
        m = float(np.linalg.norm(c))
        if m >= 1.0:
            raise ValueError(f"|z| = {m} is not inside the open unit ball")
        object.__setattr__(self, "modulus", m)

    @property
    def N(self):
        return len(self.coords)

    def as_array(self):
        return np.asarray(self.coords, dtype=complex)


def ball_point(*coords):
    return BallPoint(tuple(complex(c) for c in coords))


def pseudo_distance(z, w):
    """d(z,w) = ||z|-|w|| + |1 - <z,w>/(|z||w|)|, angular term 0 at the origin."""
    zc, wc = _coords(z), _coords(w)
    rz, rw = np.linalg.norm(zc), np.linalg.norm(wc)
    radial = abs(rz - rw)
    if rz == 0.0 or rw == 0.0:
        return float(radial)
    inner = np.sum(zc * np.conj(wc))
    return float(radial + abs(1.0 - inner / (rz * rw)))


def pseudo_distance_batch(Z, w):
    """Vectorized d(., w) for Z of shape (n, N)."""
    Z = np.asarray(Z, dtype=complex)
    wc = _coords(w)
    rho = np.linalg.norm(Z, axis=1)
    r = float(np.linalg.norm(wc))
    radial = np.abs(rho - r)
    if r == 0.0:
        return radial
    inner = Z @ np.conj(wc)
    with np.errstate(divide="ignore", invalid="ignore"):
        ang = np.abs(1.0 - inner / (rho * r))
    ang[rho == 0.0] = 0.0
    return radial + ang


@dataclass(frozen=True)
class PseudoBall:
    center: BallPoint
    radius: float

    def __post_init__(self):
        if not isinstance(self.center, BallPoint):
            object.__setattr__(self, "center", BallPoint(tuple(self.center)))
        if not (0.0 < self.radius <= 4.0):
            raise ValueError(
                f"radius {self.radius} outside (0, 4] (pseudo-metric diameter bound)"
            )

    @property
    def touches_boundary(self):
        return self.radius > 1.0 - self.center.modulus

    @property
    def N(self):
        return self.center.N


def ball_contains(B, z):
    return pseudo_distance(B.center, z) < B.radius


@dataclass
class GeometryConstants:
    quasi_triangle_K: float
    separation_C1: float = 4.0


def probe_quasi_triangle(N, n_triples=10_000, seed=0):
    """Empirical minimal K with d(x,y) <= K (d(x,z) + d(z,y)) over random triples."""
    rng = make_rng(seed, 42, N)
    pts = _uniform_ball(rng, 3 * n_triples, N).reshape(3, n_triples, N)
    worst = 0.0
    x, y, z = pts[0], pts[1], pts[2]
    dxy = _pairwise_d(x, y)
    dxz = _pairwise_d(x, z)
    dzy = _pairwise_d(z, y)
    denom = dxz + dzy
    ok = denom > 0
    worst = float(np.max(dxy[ok] / denom[ok]))
    return GeometryConstants(quasi_triangle_K=worst)


def _pairwise_d(X, Y):
    rx = np.linalg.norm(X, axis=1)
    ry = np.linalg.norm(Y, axis=1)
    inner = np.sum(X * np.conj(Y), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ang = np.abs(1.0 - inner / (rx * ry))
    ang[(rx == 0) | (ry == 0)] = 0.0
    return np.abs(rx - ry) + ang


def _uniform_ball(rng, n, N):
    g = rng.standard_normal((n, N)) + 1j * rng.standard_normal((n, N))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    rho = rng.random(n) ** (1.0 / (2 * N))
    return rho[:, None] * (g / norms)


def _complement_basis(wdir):
    """Orthonormal basis of the orthogonal complement of a unit vector."""
    N = wdir.shape[0]
    M = np.column_stack([wdir, np.eye(N, dtype=complex)])
    Q, _ = np.linalg.qr(M)
    return Q[:, 1:]


class BallSampler:
    """Importance sampler for mu-integrals restricted to a pseudo-ball.

    Draws n proposals from a bounding product region in (rho, v) coordinates
    and keeps the ones landing in B intersect the open ball, with weights
    such that for any vectorized g,

        integral_{B} g dmu  ~=  sum(weights * g(points)) / n

    stderr comes from the proposal population (rejected draws count as 0).
    """

    def __init__(self, ball, n, seed, path=(0,)):
        rng = make_rng(seed, 2002, *path)
        self.ball = ball
        self.n = n
        self.seed = seed
        c = ball.center.as_array()
        r = ball.center.modulus
        R = ball.radius
        N = ball.N

        rho_lo = max(0.0, r - R)
        rho_hi = min(1.0, r + R)
        L = rho_hi - rho_lo
        rho = rho_lo + L * rng.random(n)
        w_rad = (2.0 * N) * rho ** (2 * N - 1) * L

        if r == 0.0:
            # Euclidean ball about the origin: d(0,z) = |z|
            dirs = _normalize(rng.standard_normal((n, N)) + 1j * rng.standard_normal((n, N)))
            pts = rho[:, None] * dirs
            weights = w_rad
            keep = rho < 1.0
        else:
            wdir = c / r
            if N == 1:
                tmax = 2.0 * math.asin(min(R, 2.0) / 2.0)
                theta = (2.0 * rng.random(n) - 1.0) * tmax
                v = np.exp(1j * theta)
                w_ang = tmax / math.pi
                pts = (rho * v)[:, None] * wdir[None, :]
                weights = w_rad * w_ang
            else:
                Rv = min(R, 2.0)
                re_lo = max(-1.0, 1.0 - Rv)
                im_hi = min(Rv, 1.0)
                area = (1.0 - re_lo) * (2.0 * im_hi)
                v = (re_lo + (1.0 - re_lo) * rng.random(n)) + 1j * (
                    (2.0 * rng.random(n) - 1.0) * im_hi
                )
                one_minus_v2 = 1.0 - np.abs(v) ** 2
                dens = np.where(
                    one_minus_v2 > 0,
                    (N - 1) / math.pi * np.maximum(one_minus_v2, 0.0) ** (N - 2),
                    0.0,
                )
                comp = _complement_basis(wdir)
                u = _normalize(
                    rng.standard_normal((n, N - 1)) + 1j * rng.standard_normal((n, N - 1))
                )
                tang = np.sqrt(np.maximum(one_minus_v2, 0.0))[:, None] * (u @ comp.T)
                pts = rho[:, None] * (v[:, None] * wdir[None, :] + tang)
                weights = w_rad * dens * area
            d = np.abs(rho - r) + np.abs(1.0 - v)
            keep = (d < R) & (rho < 1.0) & (weights > 0)

        if r == 0.0:
            d = rho
            keep = (d < R) & (rho < 1.0)

        self.points = pts[keep]
        self.weights = weights[keep]
        self.rho2 = np.abs(rho[keep]) ** 2
        self.accept_fraction = float(np.mean(keep)) if n else 0.0

    def integrate(self, g, q=0.0):
        """MCEstimate of integral_B g dmu_q (g vectorized over (m,N) points)."""
        if self.points.shape[0] == 0:
            return MCEstimate(0.0, 0.0, self.n, self.seed)
        vals = np.asarray(g(self.points), dtype=complex) * self.weights
        if q != 0.0:
            vals = vals * (1.0 - self.rho2) ** q
        s = np.sum(vals)
        s2 = np.sum(np.abs(vals) ** 2)
        mean = s / self.n
        var = s2 / self.n - np.abs(mean) ** 2
        value = mean if abs(mean.imag) > 0 else mean.real
        return MCEstimate(value, math.sqrt(max(var, 0.0) / self.n), self.n, self.seed)

    def measure(self, q=0.0):
        return self.integrate(lambda pts: np.ones(pts.shape[0]), q=q)


def _normalize(g):
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return g / norms


def ball_measure_mc(B, q, n, seed, path=(0,)):
    """Monte Carlo estimate of mu_q(B) = integral_B (1-|z|^2)^q dmu."""
    _check_measure_regime(B, q)
    return BallSampler(B, n, seed, path=path).measure(q=q)


def _check_measure_regime(B, q):
    if q > -1:
        return
    if B.touches_boundary:
        raise ValueError(f"mu_q(B) diverges for q={q} on a boundary-touching ball")
    if B.radius >= (1.0 - B.center.modulus) / 2.0:
        raise ValueError(
            f"q={q} <= -1 requires radius < (1-|center|)/2 (away from the boundary)"
        )


def ball_measure_model(B, q):
    """Model value R^{N+1} max(R, 1-r)^q (R^N when q = -1) for mu_q(B)."""
    r = B.center.modulus
    if r <= 0.0:
        raise ValueError("measure model is not asserted for balls centered at the origin")
    R = B.radius
    N = B.N
    if q == -1:
        _check_measure_regime(B, q)
        return R**N
    if q < -1:
        _check_measure_regime(B, q)
    return R ** (N + 1) * max(R, 1.0 - r) ** q


def sample_ball(B, seed):
    """One point uniform w.r.t. Lebesgue measure on B intersect the open ball.

    Rejection from the sampler's bounding product region; fails after a
    bounded budget, which signals a degenerate ball.
    """
    # proposal is uniform in (rho, v, u); accept with probability
    # proportional to the mu-density ratio, bounded by its box maximum
    batch = 256
    tried = 0
    stage = 0
    while tried < REJECTION_BUDGET:
        s = BallSampler(B, batch, seed, path=(9, stage))
        tried += batch
        stage += 1
        if s.points.shape[0] == 0:
            continue
        wmax = np.max(s.weights)
        rng = make_rng(seed, 3003, stage)
        u = rng.random(s.points.shape[0])
        acc = np.nonzero(u < s.weights / wmax)[0]
        if acc.size:
            return BallPoint(tuple(s.points[acc[0]]))
    raise RuntimeError(f"rejection budget {REJECTION_BUDGET} exhausted: degenerate ball {B}")


def shrink_parameter(k):
    """The map k -> k' = k/(1-k): z' in B_k(z) implies z in B_{k'}(z')."""
    if not 0.0 < k < 1.0:
        raise ValueError("k must lie in (0,1)")
    return k / (1.0 - k)


def proportional_ball(z, k):
    """B_k(z) = {w : d(z,w) < k(1-|z|)}, the regularization ball."""
    if not isinstance(z, BallPoint):
        z = BallPoint(tuple(_coords(z)))
    return PseudoBall(z, k * (1.0 - z.modulus))


def _directions(N, count=3):
    """Deterministic unit directions used by the ball families."""
    dirs = []
    if N == 1:
        for j in range(count):
            dirs.append(np.array([np.exp(2j * math.pi * j / count)]))
    else:
        e = np.eye(N, dtype=complex)
        dirs.append(e[0])
        dirs.append(_coords(np.ones(N)) / math.sqrt(N))
        mixed = np.array([1.0 + 0.0j] + [1j] * (N - 1)) / math.sqrt(N)
        dirs.append(mixed)
    return dirs[:count]


def boundary_ball_family(N, j_max=10, radius_factors=(1.5, 3.0), n_dirs=2):
    """Deterministic dyadic family of boundary-touching pseudo-balls.

    Centers r e_theta with r = 1 - 2^{-j}, radii factor * 2^{-j}; every
    factor > 1 makes the ball touch the boundary.  Enumeration order is
    fixed so supremum estimates are reproducible.
    """
    fam = []
    for j in range(1, j_max + 1):
        r = 1.0 - 2.0 ** (-j)
        for f in radius_factors:
            if f <= 1.0:
                raise ValueError("boundary family needs radius factors > 1")
            for d in _directions(N, n_dirs):
                fam.append(PseudoBall(BallPoint(tuple(r * d)), f * 2.0 ** (-j)))
    return fam


def interior_ball_family(N, j_max=8, radius_factors=(0.25, 0.4), n_dirs=2):
    """Dyadic family of interior balls with R < (1-r)/2 (valid for q <= -1)."""
    fam = []
    for j in range(1, j_max + 1):
        r = 1.0 - 2.0 ** (-j)
        for f in radius_factors:
            if f >= 0.5:
                raise ValueError("interior family needs radius factors < 0.5")
            for d in _directions(N, n_dirs):
                fam.append(PseudoBall(BallPoint(tuple(r * d)), f * 2.0 ** (-j)))
    return fam
