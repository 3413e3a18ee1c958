"""Weights on the ball and Bekolle-Bonami type class constants.

Classes implemented (all suprema over boundary-touching pseudo-balls):

  Bp       two-average product against mu_a (classic Bekolle-Bonami form)
  ApAlpha  the same product against mu_alpha (Muckenhoupt-type class)
  BpABQQ   four-case class with normalizer mu_b(B)/mu_a(B)^2 (a > -1) or
           mu_b(B)/R^{2(N+1+a)} (a > -N-1), mu_b bumped to b+(Q-q)/p when Q > q;
           integrals of omega d mu_Q and omega^{-1/(p-1)} d mu_{q+p'(b-q)}
  Kp, Dp   two-case classes for the shifted projection, with radius-power
           normalizers in the regime -1 > s+t > -N-1 and measure normalizers
           in the regime s+t > -1, Q >= q

Divergence handling: for weights with a known radial boundary exponent eta,
a constituent integral over a boundary-touching ball with effective exponent
e = eta + (measure exponent) <= -1 is genuinely infinite.  Such quantities
are labeled infinite, and the reported blow-up rate is e_worst + 1 (the
power at which a boundary cutoff delta makes the truncated integral diverge,
integral ~ delta^{e+1}).  Finite families get a least-squares slope of
log(quantity) against log(radius) over the shrinking family instead.
"""

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .geometry import BallSampler
from .streams import spawn_seeds


class Weight:
    """Nonnegative weight on the ball: c * (1-|z|^2)^eta, or tabulated.

    Analytic kinds carry their boundary exponent exactly; tabulated weights
    estimate it by radial regression when divergence analysis needs it.
    """

    def __init__(self, c=1.0, eta=0.0, evaluator=None, label=None, eta_hint=None):
        if evaluator is None and c < 0:
            raise ValueError("constant factor must be nonnegative")
        self.c = float(c)
        self.eta = float(eta)
        self.evaluator = evaluator
        self.label = label or self._default_label()
        self._eta_hint = eta_hint

    # -- constructors -------------------------------------------------
    @staticmethod
    def constant(c):
        return Weight(c=c, eta=0.0)

    @staticmethod
    def standard(eta):
        return Weight(c=1.0, eta=eta)

    @staticmethod
    def product(factors):
        w = Weight.constant(1.0)
        for f in factors:
            w = w * f
        return w

    @staticmethod
    def tabulated(evaluator, label="tabulated", eta_hint=None):
        return Weight(evaluator=evaluator, label=label, eta_hint=eta_hint)

    # -- algebra ------------------------------------------------------
    def __mul__(self, other):
        if self.evaluator is None and other.evaluator is None:
            return Weight(self.c * other.c, self.eta + other.eta)
        return Weight.tabulated(
            lambda pts: self(pts) * other(pts),
            label=f"{self.label}*{other.label}",
            eta_hint=self.boundary_exponent_hint() + other.boundary_exponent_hint()
            if self.boundary_exponent_hint() is not None
            and other.boundary_exponent_hint() is not None
            else None,
        )

    def power(self, e):
        if self.evaluator is None:
            return Weight(self.c**e, self.eta * e)
        hint = self.boundary_exponent_hint()
        return Weight.tabulated(
            lambda pts: self(pts) ** e,
            label=f"({self.label})^{e:g}",
            eta_hint=None if hint is None else hint * e,
        )

    # -- evaluation ---------------------------------------------------
    def __call__(self, pts):
        pts = np.asarray(pts, dtype=complex)
        if self.evaluator is not None:
            return np.asarray(self.evaluator(pts), dtype=float)
        if self.eta == 0.0:
            return np.full(pts.shape[0], self.c)
        rho2 = np.sum(np.abs(pts) ** 2, axis=1)
        return self.c * (1.0 - rho2) ** self.eta

    def boundary_exponent_hint(self):
        """Known or hinted radial exponent; None when it must be estimated."""
        if self.evaluator is None:
            return self.eta
        return self._eta_hint

    def boundary_exponent(self, N=1, n_grid=64):
        """Radial boundary exponent, estimated by regression if necessary."""
        hint = self.boundary_exponent_hint()
        if hint is not None:
            return hint
        # regression of log w against log(1-|z|^2) along a radial ray
        r = 1.0 - np.logspace(-1, -5, n_grid)
        pts = np.zeros((n_grid, N), dtype=complex)
        pts[:, 0] = r
        vals = np.maximum(self(pts), 1e-300)
        x = np.log(1.0 - r**2)
        return float(np.polyfit(x, np.log(vals), 1)[0])

    def _default_label(self):
        if self.eta == 0.0:
            return f"{self.c:g}"
        if self.c == 1.0:
            return f"(1-|z|^2)^{self.eta:g}"
        return f"{self.c:g}*(1-|z|^2)^{self.eta:g}"

    def __repr__(self):
        return f"Weight({self.label})"


_TERM_RE = re.compile(r"^\(1-\|z\|\^2\)(?:\^(-?\d+(?:\.\d+)?))?$")


def parse_weight(expr):
    """Parse the small weight grammar: `c`, `(1-|z|^2)^eta`, and products."""
    w = Weight.constant(1.0)
    for term in expr.replace(" ", "").split("*"):
        if not term:
            raise ValueError(f"empty factor in weight expression {expr!r}")
        m = _TERM_RE.match(term)
        if m:
            eta = float(m.group(1)) if m.group(1) else 1.0
            w = w * Weight.standard(eta)
            continue
        try:
            c = float(term)
        except ValueError:
            raise ValueError(f"cannot parse weight factor {term!r}") from None
        if c < 0:
            raise ValueError("weight constants must be nonnegative")
        w = w * Weight.constant(c)
    return w


def dual_weight(w, p):
    """omega^{-1/(p-1)}; the weight appearing in every class definition."""
    if p <= 1:
        raise ValueError("dual weight needs p > 1")
    return w.power(-1.0 / (p - 1.0))


@dataclass(frozen=True)
class ClassSpec:
    """A weight class with its exponent data and regime case.

    class_id in {Bp, ApAlpha, BpABQQ, Kp, Dp}.  Illegal parameter regimes
    are constructor errors, never silent fallbacks.
    """

    class_id: str
    N: int
    p: float
    params: dict
    quantifier: str = "boundary"  # Bp alternatively admits "closure"
    case: str = field(init=False, default="")

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError("weight classes need p > 1")
        g = self.params.get
        if self.class_id == "Bp":
            if g("a") is None or g("a") <= -1:
                raise ValueError("Bp needs a > -1")
            object.__setattr__(self, "case", "classic")
        elif self.class_id == "ApAlpha":
            if g("alpha") is None or g("alpha") <= -1:
                raise ValueError("ApAlpha needs alpha > -1")
            object.__setattr__(self, "case", "classic")
        elif self.class_id == "BpABQQ":
            a, b = g("a"), g("b")
            if b is None or b <= -1:
                raise ValueError("BpABQQ needs b > -1")
            if a is None or a <= -(self.N + 1):
                raise ValueError("BpABQQ needs a > -N-1")
            for k in ("q", "Q"):
                if g(k) is None:
                    raise ValueError(f"BpABQQ needs parameter {k}")
            norm = "measure" if a > -1 else "radius"
            bump = "bumped" if g("Q") > g("q") else "plain"
            object.__setattr__(self, "case", f"{norm}-{bump}")
        elif self.class_id in ("Kp", "Dp"):
            s, t, q, Q = g("s"), g("t"), g("q"), g("Q")
            if None in (s, t, q, Q):
                raise ValueError(f"{self.class_id} needs s, t, q, Q")
            if s <= -1:
                raise ValueError(f"{self.class_id} needs s > -1")
            st = s + t
            shifted = st + (Q - q) / self.p
            if -1 > st > -(self.N + 1) and shifted > -1:
                object.__setattr__(self, "case", "radius")
            elif st > -1 and Q >= q:
                object.__setattr__(self, "case", "measure")
            else:
                raise ValueError(
                    f"{self.class_id} regime invalid: s+t={st}, "
                    f"s+t+(Q-q)/p={shifted}, Q-q={Q - q}"
                )
        else:
            raise ValueError(f"unknown class id {self.class_id!r}")

    @property
    def p_conj(self):
        return self.p / (self.p - 1.0)

    def integral_exponents(self):
        """(measure exponent of the omega integral, of the dual integral)."""
        g = self.params.get
        if self.class_id == "Bp":
            return g("a"), g("a")
        if self.class_id == "ApAlpha":
            return g("alpha"), g("alpha")
        if self.class_id == "BpABQQ":
            q, Q, b = g("q"), g("Q"), g("b")
            return Q, q + self.p_conj * (b - q)
        q, Q, s, t = g("q"), g("Q"), g("s"), g("t")
        return Q + self.p * t, q + self.p_conj * (s - q)


@dataclass
class BallQuantity:
    ball: object
    value: float  # math.inf when a constituent integral diverges
    stderr: float
    divergent: bool
    blow_up_rate: float  # 0.0 for finite quantities


@dataclass
class ClassConstantReport:
    spec: ClassSpec
    weight: Weight
    entries: list
    supremum: float
    slope: float
    any_divergent: bool

    def finite_entries(self):
        return [e for e in self.entries if not e.divergent]


def _normalizer(spec, ball, sampler):
    """The common factor multiplying both integrals, and its relative stderr."""
    g = spec.params.get
    R = ball.radius
    if spec.class_id in ("Bp", "ApAlpha"):
        a = g("a") if spec.class_id == "Bp" else g("alpha")
        m = sampler.integrate(lambda pts: np.ones(pts.shape[0]), q=a)
        return 1.0 / max(m.real, 1e-300), m.stderr / max(m.real, 1e-300)
    if spec.class_id == "BpABQQ":
        b = g("b") + ((g("Q") - g("q")) / spec.p if "bumped" in spec.case else 0.0)
        num = sampler.integrate(lambda pts: np.ones(pts.shape[0]), q=b)
        if "measure" in spec.case:
            den = sampler.integrate(lambda pts: np.ones(pts.shape[0]), q=g("a"))
            rel = num.stderr / max(num.real, 1e-300) + 2 * den.stderr / max(den.real, 1e-300)
            return num.real / max(den.real, 1e-300) ** 2, rel
        return num.real / R ** (2 * (spec.N + 1 + g("a"))), num.stderr / max(num.real, 1e-300)
    st = g("s") + g("t")
    shift = (g("Q") - g("q")) / spec.p
    if spec.class_id == "Kp":
        if spec.case == "radius":
            return R**shift / R ** (spec.N + 1 + st), 0.0
        den = sampler.integrate(lambda pts: np.ones(pts.shape[0]), q=st)
        return R**shift / max(den.real, 1e-300), den.stderr / max(den.real, 1e-300)
    # Dp
    if spec.case == "radius":
        return 1.0 / R ** (spec.N + 1 + st + shift), 0.0
    den = sampler.integrate(lambda pts: np.ones(pts.shape[0]), q=st + shift)
    return 1.0 / max(den.real, 1e-300), den.stderr / max(den.real, 1e-300)


def ball_class_quantity(spec, w, ball, n=20_000, seed=0, path=(0,)):
    """The per-ball product displayed in the class definition.

    Divergent constituent integrals yield an infinite labeled quantity, not
    an exception; the blow-up rate records how fast a boundary cutoff delta
    makes the truncated integral grow (value ~ delta^{rate}, rate < 0).
    """
    if spec.quantifier == "boundary":
        if not ball.touches_boundary:
            raise ValueError("class definitions quantify over boundary-touching balls")
    else:  # closure mode of the classic definition
        if ball.radius < 1.0 - ball.center.modulus:
            raise ValueError("closure mode still needs radius >= 1 - |center|")

    e1m, e2m = spec.integral_exponents()
    dual = dual_weight(w, spec.p)
    eta = w.boundary_exponent(spec.N)
    eta_dual = -eta / (spec.p - 1.0)
    rates = []
    if ball.touches_boundary:
        for eta_i, m_i in ((eta, e1m), (eta_dual, e2m)):
            e = eta_i + m_i
            if e <= -1:
                rates.append(e + 1.0)
    if rates:
        return BallQuantity(ball, math.inf, 0.0, True, min(rates))

    sampler = BallSampler(ball, n, seed, path=path)
    norm, norm_rel = _normalizer(spec, ball, sampler)
    I1 = sampler.integrate(w, q=e1m)
    I2 = sampler.integrate(dual, q=e2m)
    v1 = max(I1.real, 0.0)
    v2 = max(I2.real, 0.0)
    value = (norm * v1) * (norm * v2) ** (spec.p - 1.0)
    rel = (
        I1.stderr / max(v1, 1e-300)
        + (spec.p - 1.0) * I2.stderr / max(v2, 1e-300)
        + spec.p * norm_rel
    )
    return BallQuantity(ball, value, abs(value) * rel, False, 0.0)


def class_constant_estimate(spec, w, family, n=20_000, seed=0):
    """Supremum of ball quantities over a deterministic family.

    The result is a lower bound on the true supremum.  The divergence slope
    is the fitted log(quantity) vs log(radius) slope over finite entries;
    divergent entries override it with their analytic blow-up rate.
    """
    if not family:
        raise ValueError("empty ball family")
    entries = []
    seeds = spawn_seeds(seed, len(family), 77)
    for i, (ball, s) in enumerate(zip(family, seeds)):
        entries.append(ball_class_quantity(spec, w, ball, n=n, seed=s, path=(i,)))
    finite = [e for e in entries if not e.divergent]
    divergent = [e for e in entries if e.divergent]
    supremum = math.inf if divergent else max(e.value for e in finite)
    if divergent:
        slope = min(e.blow_up_rate for e in divergent)
    elif len(finite) >= 3:
        x = np.log([e.ball.radius for e in finite])
        y = np.log([max(e.value, 1e-300) for e in finite])
        slope = float(np.polyfit(x, y, 1)[0])
    else:
        slope = 0.0
    return ClassConstantReport(spec, w, entries, supremum, slope, bool(divergent))


def testing_function_ratio(spec, w, ball, n=20_000, seed=0):
    """Cross-check of the testing-function characterization on one ball.

    Evaluates (norm * int_B f dmu_b)^p int_B w dmu_{Q-side} / int_B f^p w dmu_q
    for the extremal f = (1-|z|^2)^{(p'-1)(b-q)} w^{-1/(p-1)} chi_B.  For a
    class member this stays comparable to the ball quantity.
    """
    g = spec.params.get
    if spec.class_id in ("Kp", "Dp"):
        b_eff, q_eff, Q_side = g("s"), g("q"), g("Q") + spec.p * g("t")
    elif spec.class_id == "BpABQQ":
        b_eff, q_eff, Q_side = g("b"), g("q"), g("Q")
    else:
        a = g("a") if spec.class_id == "Bp" else g("alpha")
        b_eff = q_eff = Q_side = a
    dual = dual_weight(w, spec.p)
    expo = (spec.p_conj - 1.0) * (b_eff - q_eff)

    def f(pts):
        rho2 = np.sum(np.abs(pts) ** 2, axis=1)
        return dual(pts) * (1.0 - rho2) ** expo

    sampler = BallSampler(ball, n, seed)
    norm, _ = _normalizer(spec, ball, sampler)
    lhs_int = sampler.integrate(f, q=b_eff).real
    w_ball = sampler.integrate(w, q=Q_side).real
    rhs = sampler.integrate(lambda pts: f(pts) ** spec.p * w(pts), q=q_eff).real
    if rhs <= 0:
        return 0.0
    return (norm * lhs_int) ** spec.p * w_ball / rhs


def membership_verdict(spec, w, report=None, family=None, n=20_000, seed=0,
                       eps_slope=0.1):
    """member / non_member / inconclusive from a ClassConstantReport.

    member: finite supremum and shrinking-family slope >= -eps_slope;
    non_member: a divergent quantity or a consistently negative slope;
    in-between slopes are inconclusive.  The verdict is cross-checked with
    the testing-function ratio on a few balls (it must be finite for members).
    """
    if report is None:
        report = class_constant_estimate(spec, w, family, n=n, seed=seed)
    if report.any_divergent:
        return "non_member", report
    if report.slope < -eps_slope:
        return "non_member", report
    if report.slope < -eps_slope / 2.0:
        return "inconclusive", report
    # cross-check: testing-function ratios stay finite on sampled balls
    balls = [e.ball for e in report.entries[:: max(1, len(report.entries) // 4)]]
    for i, b in enumerate(balls):
        ratio = testing_function_ratio(spec, w, b, n=n, seed=seed + 13 * i + 1)
        if not math.isfinite(ratio):
            return "inconclusive", report
    return "member", report
