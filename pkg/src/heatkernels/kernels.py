"""Log-space kernels of the heat, Hermite and Ornstein-Uhlenbeck semigroups.

Points carry their ``n`` coordinates on the last axis; leading axes
broadcast, so ``x`` of shape ``(n,)`` against ``y`` of shape ``(m, n)``
returns ``m`` log densities.  Every kernel here is strictly positive and
is returned as its natural logarithm.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

LOG_2 = math.log(2.0)
LOG_PI = math.log(math.pi)
LOG_4PI = math.log(4.0 * math.pi)
LOG_2PI = math.log(2.0 * math.pi)

# largest double strictly below 1
S_MAX = float(np.nextafter(1.0, 0.0))


class DomainError(ValueError):
    """Argument outside the domain of a kernel or of the time maps."""


class KernelKind(enum.Enum):
    CLASSICAL = "classical"
    HERMITE = "hermite"
    HERMITE_SHIFTED = "hermite-shifted"
    ORNSTEIN_UHLENBECK = "ou"

    @classmethod
    def parse(cls, name: str) -> "KernelKind":
        key = name.strip().lower().replace("_", "-")
        aliases = {"ornstein-uhlenbeck": "ou", "heat": "classical", "shifted": "hermite-shifted"}
        key = aliases.get(key, key)
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown kernel kind {name!r}")


def _as_points(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    return x


def _sq(v):
    return np.sum(v * v, axis=-1)


def _scalar_or_array(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def meda_forward(s):
    """Physical time ``t = (1/2) log((1+s)/(1-s))`` for a Meda parameter ``s``."""
    s_arr = np.asarray(s, dtype=float)
    if not np.all((s_arr > 0.0) & (s_arr < 1.0)):
        raise DomainError("Meda parameter must lie in (0, 1)")
    # log1p keeps full relative accuracy as s -> 0
    return _scalar_or_array(0.5 * (np.log1p(s_arr) - np.log1p(-s_arr)))


def meda_inverse(t):
    """Meda parameter ``s = tanh t``, clamped strictly below 1."""
    t_arr = np.asarray(t, dtype=float)
    if not np.all(t_arr > 0.0):
        raise DomainError("time must be strictly positive")
    return _scalar_or_array(np.minimum(np.tanh(t_arr), S_MAX))


@dataclass(frozen=True)
class TimeParam:
    """Physical time ``t`` together with its Meda parameter ``s = tanh t``.

    Build with :meth:`from_t` or :meth:`from_s`; the other coordinate is
    derived from the one supplied.
    """

    t: float
    s: float

    @classmethod
    def from_t(cls, t: float) -> "TimeParam":
        return cls(float(t), meda_inverse(float(t)))

    @classmethod
    def from_s(cls, s: float) -> "TimeParam":
        return cls(meda_forward(float(s)), float(s))

    def __post_init__(self):
        if not self.t > 0.0:
            raise DomainError("time must be strictly positive")
        if not 0.0 < self.s < 1.0:
            raise DomainError("Meda parameter must lie in (0, 1)")


def classical_kernel(x, y, t):
    """log W_t(x - y) with W_t(z) = (4 pi t)^(-n/2) exp(-|z|^2 / 4t)."""
    if not np.all(np.asarray(t) > 0):
        raise DomainError("time must be strictly positive")
    x, y = _as_points(x), _as_points(y)
    n = x.shape[-1]
    return -0.5 * n * np.log(4.0 * np.pi * t) - _sq(x - y) / (4.0 * t)


def hermite_kernel_s(x, y, s):
    """Mehler kernel of exp(-tH) written in the Meda parameter ``s``.

    ``((1-s^2)/(4 pi s))^(n/2) exp(-[s|x+y|^2 + |x-y|^2/s] / 4)``
    """
    s = np.asarray(s, dtype=float)
    if not np.all((s > 0.0) & (s < 1.0)):
        raise DomainError("Meda parameter must lie in (0, 1)")
    x, y = _as_points(x), _as_points(y)
    n = x.shape[-1]
    log_pref = 0.5 * n * (np.log1p(-s) + np.log1p(s) - np.log(s) - LOG_4PI)
    return log_pref - 0.25 * (s * _sq(x + y) + _sq(x - y) / s)


def _log_sinh(z):
    # sinh z = e^z (1 - e^{-2z}) / 2, accurate for tiny and huge z
    return z - LOG_2 + np.log(-np.expm1(-2.0 * z))


def hermite_kernel_t(x, y, t):
    """Mehler kernel of exp(-tH) in physical time.

    ``(2 pi sinh 2t)^(-n/2) exp(-[|x-y|^2 coth(2t) / 2 + x.y tanh t])``
    """
    t = np.asarray(t, dtype=float)
    if not np.all(t > 0.0):
        raise DomainError("time must be strictly positive")
    x, y = _as_points(x), _as_points(y)
    n = x.shape[-1]
    coth2t = 1.0 / np.tanh(2.0 * t)
    dot = np.sum(x * y, axis=-1)
    return (-0.5 * n * (LOG_2PI + _log_sinh(2.0 * t))
            - (0.5 * _sq(x - y) * coth2t + dot * np.tanh(t)))


def hermite_shifted_kernel(x, y, t):
    """Kernel of exp(-t(H - n)), i.e. e^{nt} times the Hermite kernel."""
    x = _as_points(x)
    n = x.shape[-1]
    return n * np.asarray(t, dtype=float) + hermite_kernel_t(x, y, t)


def ou_kernel(x, y, t):
    """Lebesgue-measure transition kernel K_t^O(x, y) of exp(-tO).

    Unfolding the conjugation by ``U f = pi^(-n/4) e^{-|x|^2/2} f`` of the
    shifted Hermite semigroup gives
    ``K_t^O(x, y) = e^{nt} e^{(|x|^2 - |y|^2)/2} W_t^H(x, y)``.
    """
    x, y = _as_points(x), _as_points(y)
    n = x.shape[-1]
    return (n * np.asarray(t, dtype=float) + 0.5 * (_sq(x) - _sq(y))
            + hermite_kernel_t(x, y, t))


def ou_gaussian_kernel(x, y, t):
    """log M_t(x, y) = log(e^{|y|^2} pi^{n/2} K_t^O(x, y)), symmetric in x, y.

    This is the kernel of exp(-tO) against the Gaussian measure.
    """
    x, y = _as_points(x), _as_points(y)
    n = x.shape[-1]
    return _sq(y) + 0.5 * n * LOG_PI + ou_kernel(x, y, t)


def log_kernel(kind: KernelKind, x, y, t):
    if kind is KernelKind.CLASSICAL:
        return classical_kernel(x, y, t)
    if kind is KernelKind.HERMITE:
        return hermite_kernel_t(x, y, t)
    if kind is KernelKind.HERMITE_SHIFTED:
        return hermite_shifted_kernel(x, y, t)
    if kind is KernelKind.ORNSTEIN_UHLENBECK:
        return ou_kernel(x, y, t)
    raise ValueError(f"unknown kernel kind {kind!r}")


def kernel_profile(kind: KernelKind, x, t: float):
    """Center and effective heat time of ``y -> kernel(x, y, t)``.

    Each kernel is, as a function of ``y``, proportional to
    ``exp(-|y - center|^2 / (4 t_eff))``.
    """
    x = _as_points(x)
    if kind is KernelKind.CLASSICAL:
        return x.copy(), float(t)
    if kind in (KernelKind.HERMITE, KernelKind.HERMITE_SHIFTED):
        s = meda_inverse(t)
        # 1/cosh(2t) = (1 - s^2)/(1 + s^2)
        return x / math.cosh(2.0 * t), s / (1.0 + s * s)
    if kind is KernelKind.ORNSTEIN_UHLENBECK:
        # drift rate 2: mean e^{-2t} x, variance (1 - e^{-4t}) / 2
        return x * math.exp(-2.0 * t), -0.25 * math.expm1(-4.0 * t)
    raise ValueError(f"unknown kernel kind {kind!r}")
