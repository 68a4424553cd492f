"""Semigroup actions on initial data, maximal operators, and convergence runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .datum import InitialDatum, QuarticExponential
from .kernels import KernelKind, TimeParam, kernel_profile, log_kernel
from .quadrature import (Box, Factor, IntegrationResult, QuadratureConfig, integrate,
                         integrate_radial, integrate_separable, truncation_radius)

# panel breakpoints placed at these multiples of the kernel width around its center
_PEAK_OFFSETS = np.array([-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0])


def _widen(log_abs, a: float, b: float, log_tol: float):
    """Grow [a, b] until both ends sit far below the integrand's peak."""
    for _ in range(40):
        y = np.linspace(a, b, 2001)
        with np.errstate(divide="ignore", invalid="ignore"):
            l = np.asarray(log_abs(y), dtype=float)
        top = np.max(l[np.isfinite(l)]) if np.any(np.isfinite(l)) else -math.inf
        if top == -math.inf:
            return a, b
        cut = top + log_tol - 10.0
        grow_a, grow_b = l[0] > cut, l[-1] > cut
        if not (grow_a or grow_b):
            return a, b
        w = 0.5 * (b - a)
        a, b = (a - w if grow_a else a), (b + w if grow_b else b)
    return a, b


def _shift(res: IntegrationResult, log_factor: float) -> IntegrationResult:
    if res.divergent:
        return res
    factor = math.exp(log_factor)
    return replace(res, value=res.value * factor, error_estimate=res.error_estimate * factor,
                   log_abs_value=res.log_abs_value + log_factor)


def apply(kind: KernelKind, f: InitialDatum, x, tp: TimeParam,
          config: QuadratureConfig = QuadratureConfig()) -> IntegrationResult:
    """u(x, t) = integral of kernel(x, y, t) f(y) dy for the chosen semigroup.

    Non-integrable data come back with ``divergent=True``; a quadrature that
    exhausts its budget comes back with ``converged=False``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != f.n:
        raise ValueError(f"point has {x.size} coordinates, datum lives in R^{f.n}")
    t = tp.t
    if kind is KernelKind.HERMITE_SHIFTED:
        # exp(-t(H - n)) = e^{nt} exp(-tH)
        return _shift(apply(KernelKind.HERMITE, f, x, tp, config), f.n * t)
    center, t_eff = kernel_profile(kind, x, t)
    if not f.envelope.integrable(t_eff):
        return IntegrationResult.divergence()
    sigma = math.sqrt(2.0 * t_eff)
    log_tol = math.log(config.tail_mass_tol)
    axes = f.axes()
    if axes is None:
        radius = truncation_radius(center, t_eff, f.envelope, config)
        if math.isinf(radius):
            return IntegrationResult.divergence()
        box = Box(tuple(center - radius), tuple(center + radius))

        def log_abs(y):
            return log_kernel(kind, x, y, t) + f.log_abs(y)

        res = integrate(log_abs, box, config, sign=f.sign)
        return replace(res, truncation_radius=radius)
    factors, lo, hi = [], [], []
    radius = 0.0
    axis_config = replace(config, tail_mass_tol=config.tail_mass_tol / f.n)
    for i, ax in enumerate(axes):
        xi = x[i:i + 1]

        def log_abs(y, xi=xi, ax=ax):
            return log_kernel(kind, xi, y[:, None], t) + ax.log_abs(y)

        if ax.support is not None:
            a, b = ax.support
        else:
            r = truncation_radius(center[i:i + 1], t_eff, ax.envelope, axis_config)
            if math.isinf(r):
                return IntegrationResult.divergence()
            a, b = _widen(log_abs, center[i] - r, center[i] + r, log_tol)
        radius = max(radius, 0.5 * (b - a))
        peaks = tuple(center[i] + sigma * _PEAK_OFFSETS)
        factors.append(Factor(log_abs, ax.sign, tuple(ax.breakpoints) + peaks))
        lo.append(a)
        hi.append(b)
    res = integrate_separable(factors, Box(tuple(lo), tuple(hi)), config)
    return replace(res, truncation_radius=radius)


@dataclass
class MaximalReport:
    point: list
    horizon: float
    time_grid: list
    values: list
    sup_value: float
    argmax_time: Optional[float]
    finite: bool
    all_converged: bool = True


def maximal(kind: KernelKind, f: InitialDatum, x, R: float, J: int,
            config: QuadratureConfig = QuadratureConfig()) -> MaximalReport:
    """Grid approximation of sup_{t < R} |u(x, t)| over t_j = R 2^-j, j = 1..J."""
    if not R > 0:
        raise ValueError("horizon must be positive")
    if J < 2:
        raise ValueError("grid needs at least two times")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    grid = [R * 2.0 ** -j for j in range(1, J + 1)]
    values = []
    finite = True
    all_conv = True
    for t in grid:
        res = apply(kind, f, x, TimeParam.from_t(t), config)
        if res.divergent:
            finite = False
            values.append(math.inf)
            continue
        all_conv = all_conv and res.converged
        values.append(abs(res.value))
    if not finite:
        return MaximalReport(x.tolist(), R, grid, values, math.inf, None, False, all_conv)
    j = int(np.argmax(values))
    return MaximalReport(x.tolist(), R, grid, values, values[j], grid[j], True, all_conv)


@dataclass
class ConvergenceReport:
    point: list
    times: list
    values: list
    target: float
    errors: list
    converged: bool
    divergence_index: Optional[int] = None
    quadrature_converged: list = field(default_factory=list)


def converge(kind: KernelKind, f: InitialDatum, x, t0: float = 1.0, steps: int = 10,
             shrink: float = 0.25, threshold: float = 1e-3,
             config: QuadratureConfig = QuadratureConfig()) -> ConvergenceReport:
    """Track u(x, t_k) -> f(x) along t_k = t0 * shrink^k, k = 0..steps."""
    if not t0 > 0:
        raise ValueError("t0 must be positive")
    if not 0 < shrink < 1:
        raise ValueError("shrink factor must lie in (0, 1)")
    if steps < 1:
        raise ValueError("need at least one step")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    target = f.value(x)
    times, values, errors, flags = [], [], [], []
    for k in range(steps + 1):
        t = t0 * shrink ** k
        res = apply(kind, f, x, TimeParam.from_t(t), config)
        if res.divergent:
            return ConvergenceReport(x.tolist(), times, values, target, errors, False, k, flags)
        times.append(t)
        values.append(res.value)
        errors.append(abs(res.value - target))
        flags.append(res.converged)
    return ConvergenceReport(x.tolist(), times, values, target, errors, errors[-1] < threshold,
                             None, flags)


@dataclass
class DivergenceDemo:
    """Witness that a weight outside D_p^W admits data with no solution.

    The weight is v(y) = exp(-|y|^4) and the datum f(y) = exp(|y|^4 / 2p):
    f lies in L^p(v dy), yet the heat integral of f diverges.
    """

    p: float
    n: int
    norm_radii: list
    norm_values: list          # truncated integrals of |f|^p v
    norm_stable: bool
    truncation_radii: list
    log_truncated: list        # log of truncated W_1 f(0)
    weight_member: bool
    apply_divergent: bool
    note: str = ("witness pair chosen by this tool: v = exp(-|y|^4), f = exp(|y|^4 / 2p); "
                 "not taken from a published counterexample")

    @property
    def truncated(self) -> list:
        return [math.exp(v) if v < 709.7 else math.inf for v in self.log_truncated]


def divergence_demo(p: float, n: int = 1, config: QuadratureConfig = QuadratureConfig(),
                    norm_radii=(4.0, 8.0, 16.0), radii=(4.0, 8.0, 12.0)) -> DivergenceDemo:
    from .weights import LebesgueExponent, StretchedExp, dpw_classify

    if not 1 <= p < math.inf:
        raise ValueError("p must lie in [1, inf)")
    # |f|^p v = exp(-|y|^4 / 2)
    norms = [integrate_radial(lambda r: -0.5 * r ** 4, n, R, config).value for R in norm_radii]
    stable = abs(norms[-1] - norms[-2]) <= 1e-9 * abs(norms[-1])
    c = 1.0 / (2.0 * p)

    def log_heat(r):
        return -0.5 * n * math.log(4.0 * math.pi) - r * r / 4.0 + c * r ** 4

    logs = [integrate_radial(log_heat, n, R, config).log_abs_value for R in radii]
    verdict = dpw_classify(StretchedExp(1.0, 4.0), LebesgueExponent(p), n)
    res = apply(KernelKind.CLASSICAL, QuarticExponential(c, n), np.zeros(n),
                TimeParam.from_t(1.0), config)
    return DivergenceDemo(p, n, list(norm_radii), norms, stable, list(radii), logs,
                          verdict.member, res.divergent)
