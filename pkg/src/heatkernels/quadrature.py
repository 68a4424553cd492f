"""Tail-aware quadrature of log-space integrands over R^n, n <= 3.

Integrands are supplied as ``log|g|`` plus an optional sign.  Each panel is
rescaled by its largest log value before exponentiation, and panels are
combined against a common scale, so integrals far below the double range
(or far above it) keep their relative accuracy through ``log_abs_value``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

MAX_DIM = 3
_EPS = np.finfo(float).eps

_X_HI, _W_HI = leggauss(21)
_X_LO, _W_LO = leggauss(10)
_PANEL_COST = _X_HI.size + _X_LO.size


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 0.0
    max_evals: int = 10_000_000
    tail_mass_tol: float = 1e-12
    base_points_per_axis: int = 64

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be nonnegative")
        if not self.tail_mass_tol > 0:
            raise ValueError("tail_mass_tol must be positive")
        if self.max_evals < 1000:
            raise ValueError("max_evals must be at least 1000")
        if self.base_points_per_axis < 1:
            raise ValueError("base_points_per_axis must be positive")


@dataclass
class IntegrationResult:
    """Outcome of one integral.

    ``value`` may overflow to ``inf`` or underflow to 0 while
    ``log_abs_value`` and ``sign`` still describe it exactly.  A divergent
    result has ``divergent=True``, ``value=inf`` and ``converged=False``.
    """

    value: float
    error_estimate: float
    evals_used: int
    truncation_radius: float
    converged: bool
    log_abs_value: float = -math.inf
    sign: float = 0.0
    divergent: bool = False

    @property
    def relative_error(self) -> float:
        if self.value == 0.0:
            return 0.0 if self.error_estimate == 0.0 else math.inf
        return self.error_estimate / abs(self.value)

    @classmethod
    def divergence(cls, evals_used: int = 0) -> "IntegrationResult":
        return cls(math.inf, math.inf, evals_used, math.inf, False, math.inf, 1.0, True)


@dataclass(frozen=True)
class Envelope:
    """Growth bound ``(1 + r)^degree * exp(sum(coef * r**power))`` in ``r = |y|``."""

    degree: float = 0.0
    terms: tuple = ()

    def log(self, r):
        r = np.asarray(r, dtype=float)
        out = self.degree * np.log1p(r)
        for coef, power in self.terms:
            out = out + coef * r ** power
        return out

    def times(self, other: "Envelope") -> "Envelope":
        return Envelope(self.degree + other.degree, self.terms + other.terms)

    def rate(self, power: float) -> float:
        return sum(c for c, p in self.terms if p == power)

    def integrable(self, t_eff: float) -> bool:
        """Whether the envelope times exp(-r^2 / 4 t_eff) has finite mass."""
        powers = sorted({p for c, p in self.terms if c != 0.0}, reverse=True)
        for p in powers:
            c = self.rate(p)
            if c == 0.0:
                continue
            if p > 2.0:
                return c < 0.0
            if p == 2.0:
                return c < 1.0 / (4.0 * t_eff)
            return True
        return True


BOUNDED = Envelope()


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in np.atleast_1d(self.lo)))
        object.__setattr__(self, "hi", tuple(float(v) for v in np.atleast_1d(self.hi)))
        if len(self.lo) != len(self.hi):
            raise ValueError("box corners differ in dimension")
        if any(h < l for l, h in zip(self.lo, self.hi)):
            raise ValueError("box upper corner below lower corner")

    @property
    def n(self) -> int:
        return len(self.lo)


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if not self.radius >= 0:
            raise ValueError("ball radius must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.center)

    def bounding_box(self) -> Box:
        c = np.asarray(self.center)
        return Box(tuple(c - self.radius), tuple(c + self.radius))


@dataclass(frozen=True)
class Factor:
    """A one-dimensional log-space integrand ``y -> log|g(y)|`` with optional sign.

    ``breakpoints`` mark kinks, jumps or narrow peaks the initial panel
    layout must respect.
    """

    log_abs: Callable[[np.ndarray], np.ndarray]
    sign: Optional[Callable[[np.ndarray], np.ndarray]] = None
    breakpoints: tuple = field(default=())


def _log_ball_surface(n: int) -> float:
    # surface area of the unit sphere in R^n; 2 for n = 1
    return math.log(2.0) + 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n)


def truncation_radius(center, t_eff: float, growth: Envelope = BOUNDED,
                      config: QuadratureConfig = QuadratureConfig()) -> float:
    """Radius about ``center`` outside which the heat-type tail is negligible.

    The tail of ``(4 pi t_eff)^(-n/2) exp(-|y - center|^2 / 4 t_eff)``
    times the growth envelope (bounded above over each shell) carries mass
    at most ``config.tail_mass_tol`` outside the returned radius.  Returns
    ``math.inf`` when the envelope beats the Gaussian (non-integrable).
    """
    if not t_eff > 0:
        raise ValueError("t_eff must be positive")
    if not growth.integrable(t_eff):
        return math.inf
    c = np.atleast_1d(np.asarray(center, dtype=float))
    n = c.size
    c0 = float(np.sqrt(np.sum(c * c)))
    log_tol = math.log(config.tail_mass_tol)
    sigma = math.sqrt(2.0 * t_eff)
    # effective quadratic rate after absorbing the envelope's own r^2 term
    rate = 1.0 / (4.0 * t_eff) - max(growth.rate(2.0), 0.0)
    scale = 1.0 / math.sqrt(4.0 * rate) if rate > 0 else sigma
    r_max = c0 + scale * (2.0 * math.sqrt(-log_tol + 50.0) + 20.0)
    m = 1501
    while True:
        r = np.linspace(0.0, r_max, m)
        # envelope bound over the shell |y - center| = r, i.e. |y| in [c0 - r, c0 + r]
        frac = np.linspace(0.0, 1.0, 9)
        lo = np.maximum(c0 - r, 0.0)[:, None]
        hi = (c0 + r)[:, None]
        env = np.max(growth.log(lo + (hi - lo) * frac), axis=1)
        phi = (_log_ball_surface(n) + (n - 1) * np.log(np.maximum(r, 1e-300))
               - 0.5 * n * math.log(4.0 * math.pi * t_eff) - r * r / (4.0 * t_eff) + env)
        if n > 1:
            phi[0] = -math.inf
        if phi[-1] < log_tol - 60.0 and phi[-1] < phi[-2]:
            break
        r_max *= 2.0
        if r_max > 1e8:
            return math.inf
    dr = r[1] - r[0]
    # tail mass from the right, trapezoid in log space
    seg = np.logaddexp(phi[:-1], phi[1:]) + math.log(0.5 * dr)
    tail = np.logaddexp.accumulate(seg[::-1])[::-1]
    ok = np.nonzero(tail > log_tol)[0]
    if ok.size == 0:
        return float(r[1])
    return float(r[min(ok[-1] + 1, m - 1)])


def gaussian_heat_oracle(a: float, x, t: float, n: Optional[int] = None) -> float:
    """Closed form of ``W_t[exp(-a|.|^2)](x) = (1+4at)^(-n/2) exp(-a|x|^2/(1+4at))``.

    Returns ``math.inf`` (divergence) when ``1 + 4at <= 0``.
    """
    if not t > 0:
        raise ValueError("time must be strictly positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size if n is None else n
    q = 1.0 + 4.0 * a * t
    if q <= 0:
        return math.inf
    return float(q ** (-0.5 * n) * math.exp(-a * float(np.sum(x * x)) / q))


# -- one-dimensional adaptive engine --------------------------------------

@dataclass
class _Axis:
    total: float        # integral scaled by exp(-log_scale)
    log_scale: float
    err: float          # error estimate, same scale
    abs_total: float    # integral of |g|, same scale
    evals: int
    converged: bool

    @property
    def value(self) -> float:
        if self.total == 0.0:
            return 0.0
        with np.errstate(over="ignore"):
            return float(self.total * math.exp(self.log_scale)) if self.log_scale < 709 else math.copysign(math.inf, self.total)

    @property
    def log_abs(self) -> float:
        return math.log(abs(self.total)) + self.log_scale if self.total != 0.0 else -math.inf

    @property
    def log_err(self) -> float:
        return math.log(self.err) + self.log_scale if self.err > 0.0 else -math.inf


def _panels(factor: Factor, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    y_hi = mid[:, None] + half[:, None] * _X_HI
    y_lo = mid[:, None] + half[:, None] * _X_LO
    with np.errstate(divide="ignore", invalid="ignore"):
        l_hi = np.asarray(factor.log_abs(y_hi.ravel()), dtype=float).reshape(y_hi.shape)
        l_lo = np.asarray(factor.log_abs(y_lo.ravel()), dtype=float).reshape(y_lo.shape)
    if np.any(np.isnan(l_hi)) or np.any(np.isnan(l_lo)) or np.any(l_hi == np.inf) or np.any(l_lo == np.inf):
        raise FloatingPointError("integrand is not finite on the domain")
    if factor.sign is None:
        s_hi = s_lo = 1.0
    else:
        s_hi = np.asarray(factor.sign(y_hi.ravel()), dtype=float).reshape(y_hi.shape)
        s_lo = np.asarray(factor.sign(y_lo.ravel()), dtype=float).reshape(y_lo.shape)
    m = np.maximum(l_hi.max(axis=1), l_lo.max(axis=1))
    safe = np.where(np.isfinite(m), m, 0.0)
    e_hi = np.exp(l_hi - safe[:, None])
    e_lo = np.exp(l_lo - safe[:, None])
    q_hi = half * np.sum(_W_HI * s_hi * e_hi, axis=1)
    q_lo = half * np.sum(_W_LO * s_lo * e_lo, axis=1)
    a_hi = half * np.sum(_W_HI * e_hi, axis=1)
    return m, q_hi, np.abs(q_hi - q_lo), a_hi


def _abs_floor(abs_tol: float, log_scale: float) -> float:
    # abs_tol expressed on the exp(log_scale) scale of the panel sums
    if abs_tol == 0.0:
        return 0.0
    return abs_tol * math.exp(-log_scale) if log_scale > -700 else math.inf


def _initial_edges(a: float, b: float, breakpoints, config: QuadratureConfig):
    k = max(1, config.base_points_per_axis // 8)
    edges = np.linspace(a, b, k + 1)
    bp = np.asarray([p for p in breakpoints if a < p < b], dtype=float)
    return np.unique(np.concatenate([edges, bp]))


def _adaptive_1d(factor: Factor, a: float, b: float, config: QuadratureConfig,
                 budget: int) -> _Axis:
    if b <= a:
        return _Axis(0.0, 0.0, 0.0, 0.0, 0, True)
    edges = _initial_edges(a, b, factor.breakpoints, config)
    lo, hi = edges[:-1], edges[1:]
    m, q, e, ab = _panels(factor, lo, hi)
    evals = lo.size * _PANEL_COST
    while True:
        finite = np.isfinite(m)
        if not np.any(finite):
            return _Axis(0.0, 0.0, 0.0, 0.0, evals, True)
        scale = float(m[finite].max())
        w = np.where(finite, np.exp(np.where(finite, m, scale) - scale), 0.0)
        vals, errs, abss = q * w, e * w, ab * w
        total = float(math.fsum(vals))
        err = float(math.fsum(errs))
        abs_total = float(math.fsum(abss))
        target = max(config.rel_tol * abs(total), _abs_floor(config.abs_tol, scale),
                     64.0 * _EPS * abs_total)
        if err <= target:
            return _Axis(total, scale, err, abs_total, evals, True)
        # split panels carrying more than their share of the error budget
        split = errs > target / errs.size
        if not np.any(split):
            split = errs == errs.max()
        cost = 2 * int(split.sum()) * _PANEL_COST
        if evals + cost > budget:
            return _Axis(total, scale, err, abs_total, evals, False)
        mid = 0.5 * (lo[split] + hi[split])
        if np.any((mid <= lo[split]) | (mid >= hi[split])):
            return _Axis(total, scale, err, abs_total, evals, False)
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        nm, nq, ne, nab = _panels(factor, new_lo, new_hi)
        evals += cost
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        m = np.concatenate([m[keep], nm])
        q = np.concatenate([q[keep], nq])
        e = np.concatenate([e[keep], ne])
        ab = np.concatenate([ab[keep], nab])
        order = np.argsort(lo, kind="stable")
        lo, hi, m, q, e, ab = lo[order], hi[order], m[order], q[order], e[order], ab[order]


def _result_from_axes(axes: Sequence[_Axis], radius: float) -> IntegrationResult:
    evals = sum(ax.evals for ax in axes)
    converged = all(ax.converged for ax in axes)
    sign = 1.0
    log_abs = 0.0
    for ax in axes:
        sign *= math.copysign(1.0, ax.total) if ax.total != 0.0 else 0.0
        log_abs += ax.log_abs
    if sign == 0.0:
        log_abs = -math.inf
    # first-order error propagation through the product
    log_terms = []
    for i, ax in enumerate(axes):
        others = sum(o.log_abs for j, o in enumerate(axes) if j != i)
        log_terms.append(ax.log_err + others)
    log_err = float(np.logaddexp.reduce(log_terms)) if log_terms else -math.inf
    with np.errstate(over="ignore"):
        value = sign * math.exp(log_abs) if log_abs < 709.7 else sign * math.inf
        error = math.exp(log_err) if log_err < 709.7 else math.inf
    return IntegrationResult(value, error, evals, radius, converged, log_abs, sign)


def integrate_1d(factor: Factor, a: float, b: float,
                 config: QuadratureConfig = QuadratureConfig()) -> IntegrationResult:
    """Adaptive integral of one factor over ``[a, b]``."""
    ax = _adaptive_1d(factor, float(a), float(b), config, config.max_evals)
    return _result_from_axes([ax], 0.5 * (b - a))


def integrate_separable(factors: Sequence[Factor], box: Box,
                        config: QuadratureConfig = QuadratureConfig()) -> IntegrationResult:
    """Product of per-axis adaptive integrals (Fubini on a product integrand)."""
    if len(factors) != box.n:
        raise ValueError("one factor per axis required")
    if box.n > MAX_DIM:
        raise ValueError(f"dimension capped at {MAX_DIM}")
    budget = config.max_evals
    axes = []
    for f, a, b in zip(factors, box.lo, box.hi):
        ax = _adaptive_1d(f, a, b, config, budget)
        budget -= ax.evals
        axes.append(ax)
    radius = 0.5 * max(h - l for l, h in zip(box.lo, box.hi))
    return _result_from_axes(axes, radius)


def _tensor_rule(lo, hi, panels: int):
    nodes, weights = [], []
    for a, b in zip(lo, hi):
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        nodes.append((mid[:, None] + half[:, None] * _X_LO).ravel())
        weights.append((half[:, None] * _W_LO).ravel())
    grids = np.meshgrid(*nodes, indexing="ij")
    wgrid = np.ones_like(grids[0])
    for i, w in enumerate(np.meshgrid(*weights, indexing="ij")):
        wgrid = wgrid * w
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    return pts, wgrid.ravel()


def _tensor_pass(log_abs, sign, pts, w, mask):
    with np.errstate(divide="ignore", invalid="ignore"):
        l = np.asarray(log_abs(pts), dtype=float)
    if mask is not None:
        l = np.where(mask(pts), l, -np.inf)
    if np.any(np.isnan(l)) or np.any(l == np.inf):
        raise FloatingPointError("integrand is not finite on the domain")
    s = 1.0 if sign is None else np.asarray(sign(pts), dtype=float)
    m = float(l.max()) if np.any(np.isfinite(l)) else -math.inf
    if m == -math.inf:
        return 0.0, 0.0, 0.0
    e = np.exp(l - m)
    return float(math.fsum(w * s * e)), float(math.fsum(w * e)), m


def integrate(integrand, domain, config: QuadratureConfig = QuadratureConfig(),
              sign=None) -> IntegrationResult:
    """Integrate a log-space integrand over a box or ball in R^n (n <= 3).

    ``integrand`` is either a sequence of :class:`Factor` (a separable
    product, one factor per axis) or a callable mapping points of shape
    ``(m, n)`` to ``log|g|``; ``sign`` then optionally gives the sign.
    Separable integrands on boxes are integrated axis by axis; everything
    else goes through a doubling tensor Gauss-Legendre rule.
    """
    if domain.n > MAX_DIM:
        raise ValueError(f"dimension capped at {MAX_DIM}")
    if isinstance(integrand, (list, tuple)):
        if isinstance(domain, Box):
            return integrate_separable(integrand, domain, config)
        factors = list(integrand)

        def log_abs(p):
            return sum(f.log_abs(p[:, i]) for i, f in enumerate(factors))

        def sign(p):
            out = np.ones(p.shape[0])
            for i, f in enumerate(factors):
                if f.sign is not None:
                    out = out * f.sign(p[:, i])
            return out

        integrand = log_abs
    mask = None
    box = domain
    radius = 0.5 * max(h - l for l, h in zip(domain.bounding_box().lo, domain.bounding_box().hi)) \
        if isinstance(domain, Ball) else 0.5 * max(h - l for l, h in zip(domain.lo, domain.hi))
    if isinstance(domain, Ball):
        c = np.asarray(domain.center)
        r2 = domain.radius ** 2

        def mask(p):
            return np.sum((p - c) ** 2, axis=1) <= r2

        box = domain.bounding_box()
    if domain.n == 1 and mask is None:
        f = Factor(lambda y: integrand(y[:, None]),
                   None if sign is None else (lambda y: sign(y[:, None])))
        return integrate_separable([f], box, config)
    panels = max(1, config.base_points_per_axis // 8)
    evals = 0
    prev = None
    while True:
        pts, w = _tensor_rule(box.lo, box.hi, panels)
        if evals + w.size > config.max_evals:
            break
        val, absval, m = _tensor_pass(integrand, sign, pts, w, mask)
        evals += w.size
        if prev is not None:
            pval, pabs, pm = prev
            common = max(m, pm)
            if common == -math.inf:
                return IntegrationResult(0.0, 0.0, evals, radius, True, -math.inf, 0.0)
            a = val * math.exp(m - common) if m > -math.inf else 0.0
            b = pval * math.exp(pm - common) if pm > -math.inf else 0.0
            abs_a = absval * math.exp(m - common) if m > -math.inf else 0.0
            err = abs(a - b)
            target = max(config.rel_tol * abs(a), 64.0 * _EPS * abs_a,
                         _abs_floor(config.abs_tol, common))
            if err <= target:
                return _tensor_result(a, err, common, evals, radius, True)
        prev = (val, absval, m)
        panels *= 2
    if prev is None:
        return IntegrationResult(math.nan, math.inf, evals, radius, False, math.nan, 0.0)
    pval, pabs, pm = prev
    return _tensor_result(pval, math.inf if pm == -math.inf else abs(pval), pm, evals, radius, False)


def _tensor_result(scaled, scaled_err, log_scale, evals, radius, converged):
    if scaled == 0.0 or log_scale == -math.inf:
        return IntegrationResult(0.0, 0.0 if converged else math.inf, evals, radius, converged, -math.inf, 0.0)
    log_abs = math.log(abs(scaled)) + log_scale
    sign = math.copysign(1.0, scaled)
    value = sign * math.exp(log_abs) if log_abs < 709.7 else sign * math.inf
    if scaled_err == math.inf:
        err = math.inf
    elif scaled_err == 0.0:
        err = 0.0
    else:
        le = math.log(scaled_err) + log_scale
        err = math.exp(le) if le < 709.7 else math.inf
    return IntegrationResult(value, err, evals, radius, converged, log_abs, sign)


def integrate_radial(log_profile: Callable[[np.ndarray], np.ndarray], n: int, radius: float,
                     config: QuadratureConfig = QuadratureConfig(),
                     breakpoints=()) -> IntegrationResult:
    """Integral of a radial function ``g(|y|)`` over the ball of given radius in R^n."""
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"dimension must be in 1..{MAX_DIM}")
    log_s = _log_ball_surface(n)

    def log_abs(r):
        with np.errstate(divide="ignore"):
            return log_s + (n - 1) * np.log(r) + log_profile(r)

    return integrate_1d(Factor(log_abs, breakpoints=tuple(breakpoints)), 0.0, radius, config)
