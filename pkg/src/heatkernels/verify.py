"""Randomized certification of the kernel inequalities and identities.

Kernel-level checks compare log densities directly: an inequality
``A <= B`` is scored by ``(log B - log A) / max(1, |log A|, |log B|)`` so
the slack is relative to the size of the numbers being compared, and
nothing is exponentiated before the comparison.  Quadrature-level checks
go through :func:`heatkernels.semigroup.apply`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels as K
from .datum import BoxIndicator, HermiteFunction, HermitePolynomial, IsometryImage, hermite_poly
from .kernels import KernelKind, TimeParam
from .quadrature import Box, Factor, QuadratureConfig, integrate_separable, truncation_radius
from .semigroup import apply

INEQUALITY_SLACK = 1e-12
FORMS_TOL = 1e-11
FORMS_TOL_SMALL_T = 1e-9
QUADRATURE_TOL = 1e-8
SYMMETRY_TOL = 1e-12
EQUILIBRIUM_TOL = 1e-4
LOG_34_9 = math.log(34.0 / 9.0)

KERNEL_SAMPLES = 100_000
QUADRATURE_SAMPLES = 100


@dataclass
class CheckReport:
    check_name: str
    samples: int
    worst_margin: float
    worst_sample: dict
    passed: bool
    excluded: int = 0
    details: dict = field(default_factory=dict)


def _rel_margin(log_lhs, log_rhs):
    scale = np.maximum(1.0, np.maximum(np.abs(log_lhs), np.abs(log_rhs)))
    return (log_rhs - log_lhs) / scale


def _split_dims(rng, count, dims=(1, 2, 3)):
    ns = rng.choice(np.asarray(dims), size=count)
    return {n: int(np.sum(ns == n)) for n in dims}


def _worst_min(records):
    """records: list of (margins array, sample-builder). Returns (min, sample dict)."""
    best, where = math.inf, {}
    for margins, build in records:
        if margins.size == 0:
            continue
        i = int(np.argmin(margins))
        if margins[i] < best:
            best, where = float(margins[i]), build(i)
    return best, where


def _uniform(rng, count, n, half=10.0):
    return rng.uniform(-half, half, size=(count, n))


def check_remark_upper(sample_count: int = KERNEL_SAMPLES, seed: int = 42) -> CheckReport:
    """Hermite kernel at time t(s) never exceeds (1 - s^2)^(n/2) times W_s."""
    rng = np.random.default_rng(seed)
    records = []
    for n, m in _split_dims(rng, sample_count).items():
        x = _uniform(rng, m, n)
        y = _uniform(rng, m, n)
        # a tenth of the pairs sit near y = -x, where the margin s|x+y|^2/4 vanishes
        near = rng.random(m) < 0.1
        y[near] = -x[near] + rng.normal(scale=1e-3, size=(int(near.sum()), n))
        s = rng.uniform(1e-4, 1 - 1e-4, size=m)
        lhs = K.hermite_kernel_s(x, y, s)
        rhs = 0.5 * n * (np.log1p(-s) + np.log1p(s)) + K.classical_kernel(x, y, s)
        margins = _rel_margin(lhs, rhs)
        records.append((margins, lambda i, x=x, y=y, s=s, n=n: {
            "n": n, "x": x[i].tolist(), "y": y[i].tolist(), "s": float(s[i])}))
    worst, where = _worst_min(records)
    return CheckReport("check_remark_upper", sample_count, worst, where,
                       worst >= -INEQUALITY_SLACK)


def s_star(s):
    return 9.0 * s / (9.0 + 25.0 * s * s)


def _exponent(x, y, s):
    # (s|x+y|^2 + |x-y|^2/s) / 4
    return 0.25 * (s * np.sum((x + y) ** 2, axis=-1) + np.sum((x - y) ** 2, axis=-1) / s)


def _case_bound(x, y, s):
    # ((25 s^2 + 9) / 9s) |x-y|^2 / 4
    return (25.0 * s * s + 9.0) / (9.0 * s) * np.sum((x - y) ** 2, axis=-1) / 4.0


def _random_directions(rng, m, n):
    d = rng.normal(size=(m, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def check_lemma_lower(sample_count: int = KERNEL_SAMPLES, seed: int = 42) -> CheckReport:
    """Lower bound of the Hermite kernel by the heat kernel at the reduced time s*.

    Main check, at kernel level:
    (1-s^2)^(n/2) W_{s*}(x-y) <= (34/9)^(n/2) e^{25 s |x|^2 / 4} W^H_{t(s)}(x, y).
    Sub-checks: the two exponent bounds of the case split and the prefactor bound.
    """
    rng = np.random.default_rng(seed)
    records, case1, case2, pref = [], [], [], []
    for n, m in _split_dims(rng, sample_count).items():
        x = _uniform(rng, m, n)
        y = _uniform(rng, m, n)
        s = rng.uniform(1e-4, 1 - 1e-4, size=m)
        lhs = 0.5 * n * (np.log1p(-s) + np.log1p(s)) + K.classical_kernel(x, y, s_star(s))
        rhs = 0.5 * n * LOG_34_9 + 6.25 * s * np.sum(x * x, axis=1) + K.hermite_kernel_s(x, y, s)
        records.append((_rel_margin(lhs, rhs), lambda i, x=x, y=y, s=s, n=n: {
            "n": n, "x": x[i].tolist(), "y": y[i].tolist(), "s": float(s[i])}))

        # case 1: |y| > 4|x|
        xr = rng.uniform(0.0, 2.5, size=m)
        x1 = _random_directions(rng, m, n) * xr[:, None]
        yr = rng.uniform(4.0 * xr, 10.0 + 4.0 * xr)
        yr = np.nextafter(yr, np.inf)
        y1 = _random_directions(rng, m, n) * yr[:, None]
        s1 = rng.uniform(1e-4, 1 - 1e-4, size=m)
        case1.append(_rel_margin(_exponent(x1, y1, s1), _case_bound(x1, y1, s1)))
        # case 2: |y| <= 4|x|
        x2 = _uniform(rng, m, n)
        y2 = _random_directions(rng, m, n) * (rng.uniform(0.0, 1.0, size=m)
                                             * 4.0 * np.linalg.norm(x2, axis=1))[:, None]
        s2 = rng.uniform(1e-4, 1 - 1e-4, size=m)
        bound2 = 6.25 * s2 * np.sum(x2 * x2, axis=1) + _case_bound(x2, y2, s2)
        case2.append(_rel_margin(_exponent(x2, y2, s2), bound2))
        # prefactor: (s*)^(-n/2) <= (34/9)^(n/2) s^(-n/2), equality at s = 1
        sp = np.concatenate([rng.uniform(1e-4, 1.0, size=m), [1.0]])
        pref.append(_rel_margin(-0.5 * n * np.log(s_star(sp)),
                                0.5 * n * (LOG_34_9 - np.log(sp))))
    worst, where = _worst_min(records)
    sub = {"case1_exponent": float(min(c.min() for c in case1 if c.size)),
           "case2_exponent": float(min(c.min() for c in case2 if c.size)),
           "prefactor": float(min(c.min() for c in pref if c.size))}
    passed = worst >= -INEQUALITY_SLACK and all(v >= -INEQUALITY_SLACK for v in sub.values())
    return CheckReport("check_lemma_lower", sample_count, worst, where, passed,
                       details={"subchecks_worst_margin": sub})


def chain_log_constant(s: float, x, n: int) -> float:
    """log of 2^n (1-s^2)^(-n/2) (34/9)^(n/2) e^{25 s |x|^2 / 4}."""
    x = np.asarray(x, dtype=float)
    return (n * math.log(2.0) - 0.5 * n * (math.log1p(-s) + math.log1p(s))
            + 0.5 * n * LOG_34_9 + 6.25 * s * float(np.sum(x * x)))


def chain_middle_identity(s: float, n: int) -> float:
    """Deviation of ((1+s*)/(1-s*))^(n/2) (1-s*^2)^(n/2) from (1+s*)^n."""
    ss = s_star(s)
    lhs = ((1 + ss) / (1 - ss)) ** (0.5 * n) * (1 - ss * ss) ** (0.5 * n)
    return abs(lhs - (1 + ss) ** n) / (1 + ss) ** n


def _side_ok(res) -> bool:
    return res.converged and not res.divergent and res.relative_error <= QUADRATURE_TOL


def check_chain26(sample_count: int = QUADRATURE_SAMPLES, seed: int = 42,
                  config: QuadratureConfig = QuadratureConfig()) -> CheckReport:
    """Integrated lower chain and the upper chain, for h_0 and a box indicator.

    Lower: W^{(H-n)}_{t(s*)} f(x) <= 2^n (1-s^2)^(-n/2) (34/9)^(n/2) e^{25s|x|^2/4} W^H_{t(s)} f(x)
    Upper: W^H_{t(s)} f(x) <= 2^n W_s f(x)
    Both sides come from quadrature; slack is the 1e-8 side tolerance.
    """
    rng = np.random.default_rng(seed)
    worst, where, excluded = math.inf, {}, 0
    worst_upper, worst_mid = math.inf, 0.0
    for i in range(sample_count):
        n = 1 + i % 2
        s = float(rng.uniform(0.01, 0.95))
        x = rng.uniform(-2.0, 2.0, size=n)
        f = HermiteFunction([0] * n) if (i // 2) % 2 == 0 else BoxIndicator([-1.0] * n, [1.0] * n)
        ss = s_star(s)
        lhs = apply(KernelKind.HERMITE_SHIFTED, f, x, TimeParam.from_s(ss), config)
        herm = apply(KernelKind.HERMITE, f, x, TimeParam.from_s(s), config)
        heat = apply(KernelKind.CLASSICAL, f, x, TimeParam(s, math.tanh(s)), config)
        if not (_side_ok(lhs) and _side_ok(herm) and _side_ok(heat)):
            excluded += 1
            continue
        # log-space margins; quadrature error on each side bounds the slack
        m_low = (chain_log_constant(s, x, n) + herm.log_abs_value) - lhs.log_abs_value
        m_up = (n * math.log(2.0) + heat.log_abs_value) - herm.log_abs_value
        worst_mid = max(worst_mid, chain_middle_identity(s, n))
        if m_low < worst:
            worst, where = m_low, {"n": n, "x": x.tolist(), "s": s, "datum": f.describe()}
        worst_upper = min(worst_upper, m_up)
    slack = -2.0 * QUADRATURE_TOL
    passed = (worst >= slack and worst_upper >= slack and worst_mid <= 1e-14
              and excluded < sample_count)
    return CheckReport("check_chain26", sample_count, worst, where, passed, excluded,
                       {"upper_chain_worst_log_margin": worst_upper,
                        "middle_identity_worst_rel_dev": worst_mid})


def check_kernel_forms(sample_count: int = KERNEL_SAMPLES, seed: int = 42) -> CheckReport:
    """Physical-time and Meda-parameter forms of the Mehler kernel agree.

    Pairs are drawn at heat-kernel scale, y = x + sqrt(2t) z with z standard
    normal, so log densities stay of moderate size and an absolute log
    tolerance of 1e-11 is resolvable in double precision.  One sample in
    ten uses a tiny time t in [1e-8, 1e-4], judged against 1e-9.
    """
    rng = np.random.default_rng(seed)
    worst, where = 0.0, {}
    passed = True
    uniform_rel = 0.0
    for n, m in _split_dims(rng, sample_count).items():
        small = rng.random(m) < 0.1
        t = np.where(small, 10.0 ** rng.uniform(-8, -4, size=m), 10.0 ** rng.uniform(-3, math.log10(5.0), size=m))
        x = _uniform(rng, m, n)
        y = x + np.sqrt(2.0 * t)[:, None] * rng.normal(size=(m, n))
        s = K.meda_inverse(t)
        dev = np.abs(K.hermite_kernel_t(x, y, t) - K.hermite_kernel_s(x, y, s))
        tol = np.where(t < 1e-4, FORMS_TOL_SMALL_T, FORMS_TOL)
        if np.any(dev > tol):
            passed = False
        j = int(np.argmax(dev))
        if dev[j] > worst:
            worst, where = float(dev[j]), {"n": n, "x": x[j].tolist(), "y": y[j].tolist(),
                                          "t": float(t[j])}
        # informational: same comparison on the full cube, relative to log size
        yu = _uniform(rng, m, n)
        lt, ls = K.hermite_kernel_t(x, yu, t), K.hermite_kernel_s(x, yu, s)
        uniform_rel = max(uniform_rel, float(np.max(np.abs(lt - ls) / np.maximum(1.0, np.abs(lt)))))
    return CheckReport("check_kernel_forms", sample_count, worst, where, passed,
                       details={"uniform_cube_worst_rel_dev": uniform_rel})


def check_transference(degree_max: int = 4, sample_count: int = QUADRATURE_SAMPLES, seed: int = 42,
                       config: QuadratureConfig = QuadratureConfig()) -> CheckReport:
    """Conjugating the shifted Hermite semigroup by U reproduces the OU semigroup on polynomials.

    For each Hermite polynomial H_k with |k| <= degree_max the left side
    pi^{n/4} e^{|x|^2/2} W^{(H-n)}_t[U H_k](x), the right side
    integral of K_t^O(x, y) H_k(y) dy, and the eigenvalue value
    e^{-2|k|t} H_k(x) must agree pairwise to 1e-8 (relative to max(1, |H_k|)).
    """
    if degree_max > 4:
        raise ValueError("degree_max is capped at 4")
    rng = np.random.default_rng(seed)
    worst, where, excluded = 0.0, {}, 0
    for i in range(sample_count):
        n = 1 + i % 2
        x = rng.uniform(-3.0, 3.0, size=n)
        t = float(rng.uniform(0.05, 2.0))
        tp = TimeParam.from_t(t)
        for k in _multi_indices(n, degree_max):
            f = HermitePolynomial(k)
            oracle = math.exp(-2.0 * sum(k) * t) * float(np.prod([hermite_poly(kk, xx) for kk, xx in zip(k, x)]))
            left = apply(KernelKind.HERMITE_SHIFTED, IsometryImage(f), x, tp, config)
            right = apply(KernelKind.ORNSTEIN_UHLENBECK, f, x, tp, config)
            if not (left.converged and right.converged):
                excluded += 1
                continue
            lval = left.value * math.exp(0.25 * n * K.LOG_PI + 0.5 * float(x @ x))
            scale = max(1.0, abs(oracle))
            dev = max(abs(lval - right.value), abs(lval - oracle), abs(right.value - oracle)) / scale
            if dev > worst:
                worst, where = dev, {"n": n, "k": list(k), "x": x.tolist(), "t": t,
                                     "left": lval, "right": right.value, "oracle": oracle}
    return CheckReport("check_transference", sample_count, worst, where,
                       worst <= QUADRATURE_TOL and excluded == 0, excluded,
                       {"degree_max": degree_max})


def _multi_indices(n: int, degree_max: int):
    if n == 1:
        return [(k,) for k in range(degree_max + 1)]
    return [(k,) + rest for k in range(degree_max + 1)
            for rest in _multi_indices(n - 1, degree_max - k)]


def ou_mass(x, t: float, config: QuadratureConfig = QuadratureConfig()):
    """Integral over y of K_t^O(x, y), axis by axis."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    center, t_eff = K.kernel_profile(KernelKind.ORNSTEIN_UHLENBECK, x, t)
    sigma = math.sqrt(2.0 * t_eff)
    factors, lo, hi = [], [], []
    for i in range(x.size):
        r = truncation_radius(center[i:i + 1], t_eff, config=config)
        factors.append(Factor(lambda y, xi=x[i:i + 1]: K.ou_kernel(xi, y[:, None], t),
                              breakpoints=tuple(center[i] + sigma * np.array([-2.0, 0.0, 2.0]))))
        lo.append(center[i] - r)
        hi.append(center[i] + r)
    return integrate_separable(factors, Box(tuple(lo), tuple(hi)), config)


def check_ou_markov(sample_count: int = QUADRATURE_SAMPLES, seed: int = 42,
                    config: QuadratureConfig = QuadratureConfig()) -> CheckReport:
    """OU kernel conserves mass, and e^{|y|^2} pi^{n/2} K_t^O(x, y) is symmetric.

    Also compares the long-time action on a box indicator with the box's
    Gaussian measure (t = 10, tolerance 1e-4).
    """
    rng = np.random.default_rng(seed)
    worst, where, excluded = 0.0, {}, 0
    worst_sym, worst_eq = 0.0, 0.0
    for i in range(sample_count):
        n = 1 + i % 3
        x = rng.uniform(-5.0, 5.0, size=n)
        y = rng.uniform(-5.0, 5.0, size=n)
        t = float(10.0 ** rng.uniform(-3.0, 1.0))
        res = ou_mass(x, t, config)
        if not res.converged:
            excluded += 1
            continue
        dev = abs(res.value - 1.0)
        if dev > worst:
            worst, where = dev, {"n": n, "x": x.tolist(), "t": t}
        a, b = K.ou_gaussian_kernel(x, y, t), K.ou_gaussian_kernel(y, x, t)
        worst_sym = max(worst_sym, abs(float(a - b)) / max(1.0, abs(float(a))))
        if i < 10:
            x1 = rng.uniform(-1.0, 1.0, size=1)
            box = BoxIndicator([-1.0], [1.0])
            val = apply(KernelKind.ORNSTEIN_UHLENBECK, box, x1, TimeParam.from_t(10.0), config).value
            worst_eq = max(worst_eq, abs(val - math.erf(1.0)))
    passed = (worst <= QUADRATURE_TOL and worst_sym <= SYMMETRY_TOL and worst_eq <= EQUILIBRIUM_TOL
              and excluded == 0)
    return CheckReport("check_ou_markov", sample_count, worst, where, passed, excluded,
                       {"symmetry_worst_rel_dev": worst_sym, "equilibrium_worst_dev": worst_eq})


CHECKS: dict = {
    "check_remark_upper": (check_remark_upper, KERNEL_SAMPLES),
    "check_lemma_lower": (check_lemma_lower, KERNEL_SAMPLES),
    "check_chain26": (check_chain26, QUADRATURE_SAMPLES),
    "check_kernel_forms": (check_kernel_forms, KERNEL_SAMPLES),
    "check_transference": (check_transference, QUADRATURE_SAMPLES),
    "check_ou_markov": (check_ou_markov, QUADRATURE_SAMPLES),
}


def run_checks(names=("all",), sample_count: Optional[int] = None, seed: int = 42,
               config: Optional[QuadratureConfig] = None) -> list:
    """Run the named checks (or every check for ``"all"``) in registry order."""
    names = list(names)
    if "all" in names:
        names = list(CHECKS)
    unknown = [nm for nm in names if nm not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}")
    reports = []
    for nm in names:
        fn, default = CHECKS[nm]
        kwargs = {"sample_count": sample_count or default, "seed": seed}
        if config is not None and nm in ("check_chain26", "check_transference", "check_ou_markov"):
            kwargs["config"] = config
        reports.append(fn(**kwargs))
    return reports
