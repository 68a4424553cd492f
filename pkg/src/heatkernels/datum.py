"""Parametric initial data for the semigroups.

Separable families expose one :class:`Axis` per coordinate, which lets the
quadrature integrate kernel-weighted data axis by axis.  Every family
declares its growth envelope, its support when compact, and which kernel
kinds have a closed-form image of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import hermite as _herm

from .kernels import LOG_PI, KernelKind
from .quadrature import BOUNDED, Envelope


def hermite_poly(k: int, y):
    """Physicists' Hermite polynomial H_k evaluated at ``y``."""
    coef = np.zeros(k + 1)
    coef[k] = 1.0
    return _herm.hermval(np.asarray(y, dtype=float), coef)


def log_hermite_norm(k: int) -> float:
    """log of (2^k k! sqrt(pi))^(1/2), the L^2 norm of H_k e^{-y^2/2}."""
    return 0.5 * (k * math.log(2.0) + math.lgamma(k + 1) + 0.5 * LOG_PI)


def hermite_function(k: int, y):
    y = np.asarray(y, dtype=float)
    return hermite_poly(k, y) * np.exp(-0.5 * y * y - log_hermite_norm(k))


def _log_abs_sign(v):
    with np.errstate(divide="ignore"):
        return np.log(np.abs(v)), np.sign(v)


@dataclass(frozen=True)
class Axis:
    """One coordinate factor of a separable datum."""

    log_abs: object
    sign: Optional[object] = None
    envelope: Envelope = BOUNDED
    support: Optional[tuple] = None
    breakpoints: tuple = ()


class InitialDatum:
    """Base class; subclasses set ``family`` and implement the hooks below."""

    family = "datum"
    closed_form_kinds: frozenset = frozenset()

    @property
    def n(self) -> int:
        raise NotImplementedError

    @property
    def params(self) -> dict:
        return {}

    def axes(self) -> Optional[list]:
        """Per-coordinate factors, or ``None`` when not separable."""
        return None

    @property
    def envelope(self) -> Envelope:
        axes = self.axes()
        # radial bound of a product: degrees add, decaying rates take the
        # weakest axis, growing rates add
        degree = sum(a.envelope.degree for a in axes)
        powers = sorted({p for a in axes for _, p in a.envelope.terms})
        terms = []
        for p in powers:
            coefs = [a.envelope.rate(p) for a in axes]
            c = max(coefs) if max(coefs) <= 0 else sum(v for v in coefs if v > 0)
            if c != 0.0:
                terms.append((c, p))
        return Envelope(degree, tuple(terms))

    @property
    def support(self):
        axes = self.axes()
        if axes is None or any(a.support is None for a in axes):
            return None
        return tuple(a.support for a in axes)

    def log_abs(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return sum(a.log_abs(y[:, i]) for i, a in enumerate(self.axes()))

    def sign(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        out = np.ones(y.shape[0])
        for i, a in enumerate(self.axes()):
            if a.sign is not None:
                out = out * a.sign(y[:, i])
        return out

    def value(self, x):
        """f(x) at one point (shape ``(n,)``) or many (shape ``(m, n)``)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        with np.errstate(over="ignore"):
            out = self.sign(pts) * np.exp(self.log_abs(pts))
        return float(out[0]) if single else out

    def describe(self) -> str:
        return f"{self.family}({', '.join(f'{k}={v}' for k, v in self.params.items())})"


class Gaussian(InitialDatum):
    """f(x) = exp(-a|x|^2 + b.x)."""

    family = "gaussian"
    closed_form_kinds = frozenset({KernelKind.CLASSICAL})

    def __init__(self, a: float, b=None, n: int = 1):
        self.a = float(a)
        self.b = np.zeros(n) if b is None else np.atleast_1d(np.asarray(b, dtype=float))
        self._n = self.b.size

    @property
    def n(self):
        return self._n

    @property
    def params(self):
        return {"a": self.a, "b": self.b.tolist()}

    def axes(self):
        out = []
        for bi in self.b:
            out.append(Axis(lambda y, bi=bi: -self.a * y * y + bi * y,
                            envelope=Envelope(0.0, ((-self.a, 2.0), (abs(bi), 1.0)))))
        return out


class HermiteFunction(InitialDatum):
    """Normalized Hermite function h_k, an eigenfunction of H with eigenvalue 2|k| + n."""

    family = "hermite-fn"
    closed_form_kinds = frozenset({KernelKind.HERMITE, KernelKind.HERMITE_SHIFTED})

    def __init__(self, k):
        self.k = tuple(int(v) for v in np.atleast_1d(k))
        if any(v < 0 for v in self.k):
            raise ValueError("Hermite index must be nonnegative")

    @property
    def n(self):
        return len(self.k)

    @property
    def params(self):
        return {"k": list(self.k)}

    @property
    def eigenvalue(self) -> int:
        return 2 * sum(self.k) + self.n

    def axes(self):
        out = []
        for k in self.k:
            def log_abs(y, k=k):
                la, _ = _log_abs_sign(hermite_poly(k, y))
                return la - 0.5 * y * y - log_hermite_norm(k)
            out.append(Axis(log_abs, None if k == 0 else (lambda y, k=k: np.sign(hermite_poly(k, y))),
                            envelope=Envelope(float(k), ((-0.5, 2.0),))))
        return out


class HermitePolynomial(InitialDatum):
    """Product of Hermite polynomials, an eigenfunction of O with eigenvalue 2|k|."""

    family = "hermite-poly"
    closed_form_kinds = frozenset({KernelKind.ORNSTEIN_UHLENBECK})

    def __init__(self, k):
        self.k = tuple(int(v) for v in np.atleast_1d(k))
        if any(v < 0 for v in self.k):
            raise ValueError("Hermite index must be nonnegative")

    @property
    def n(self):
        return len(self.k)

    @property
    def params(self):
        return {"k": list(self.k)}

    @property
    def eigenvalue(self) -> int:
        return 2 * sum(self.k)

    def axes(self):
        out = []
        for k in self.k:
            out.append(Axis(lambda y, k=k: _log_abs_sign(hermite_poly(k, y))[0],
                            None if k == 0 else (lambda y, k=k: np.sign(hermite_poly(k, y))),
                            envelope=Envelope(float(k))))
        return out


class BoxIndicator(InitialDatum):
    """Indicator of the box [lo, hi]."""

    family = "box"
    closed_form_kinds = frozenset({KernelKind.CLASSICAL})

    def __init__(self, lo, hi):
        self.lo = np.atleast_1d(np.asarray(lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if self.lo.shape != self.hi.shape or np.any(self.hi <= self.lo):
            raise ValueError("box needs lo < hi in every coordinate")

    @property
    def n(self):
        return self.lo.size

    @property
    def params(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    def axes(self):
        out = []
        for a, b in zip(self.lo, self.hi):
            def log_abs(y, a=a, b=b):
                return np.where((y >= a) & (y <= b), 0.0, -np.inf)
            out.append(Axis(log_abs, support=(float(a), float(b)), breakpoints=(float(a), float(b))))
        return out


class QuarticExponential(InitialDatum):
    """f(x) = exp(c|x|^4); not separable, and not integrable against any Gaussian for c > 0."""

    family = "quartic-exp"

    def __init__(self, c: float, n: int = 1):
        self.c = float(c)
        self._n = int(n)

    @property
    def n(self):
        return self._n

    @property
    def params(self):
        return {"c": self.c, "n": self.n}

    @property
    def envelope(self):
        return Envelope(0.0, ((self.c, 4.0),))

    @property
    def support(self):
        return None

    def axes(self):
        if self.n == 1:
            return [Axis(lambda y: self.c * y ** 4, envelope=self.envelope)]
        return None

    def log_abs(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        r2 = np.sum(y * y, axis=1)
        return self.c * r2 * r2

    def sign(self, y):
        return np.ones(np.atleast_2d(y).shape[0])


class TabulatedContinuous(InitialDatum):
    """Compactly supported, piecewise-linear data: a product of 1D tables.

    Each table ``(nodes, values)`` must start and end at value 0 so that the
    extension by zero outside ``[nodes[0], nodes[-1]]`` stays continuous.
    """

    family = "tabulated"

    def __init__(self, tables):
        self.tables = []
        for nodes, values in tables:
            nodes = np.asarray(nodes, dtype=float)
            values = np.asarray(values, dtype=float)
            if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 3:
                raise ValueError("each table needs matching 1D nodes and values (at least 3)")
            if np.any(np.diff(nodes) <= 0):
                raise ValueError("nodes must be strictly increasing")
            if values[0] != 0.0 or values[-1] != 0.0:
                raise ValueError("table must vanish at both ends to stay continuous")
            self.tables.append((nodes, values))

    @classmethod
    def hat(cls, lo=-1.0, hi=1.0, peak=1.0, n: int = 1) -> "TabulatedContinuous":
        mid = 0.5 * (lo + hi)
        return cls([([lo, mid, hi], [0.0, peak, 0.0])] * n)

    @property
    def n(self):
        return len(self.tables)

    @property
    def params(self):
        return {"tables": [[nodes.tolist(), values.tolist()] for nodes, values in self.tables]}

    def axes(self):
        out = []
        for nodes, values in self.tables:
            def interp(y, nodes=nodes, values=values):
                return np.interp(y, nodes, values, left=0.0, right=0.0)
            out.append(Axis(lambda y, f=interp: _log_abs_sign(f(y))[0],
                            lambda y, f=interp: np.sign(f(y)),
                            support=(float(nodes[0]), float(nodes[-1])),
                            breakpoints=tuple(float(v) for v in nodes)))
        return out


class Zero(InitialDatum):
    family = "zero"

    def __init__(self, n: int = 1):
        self._n = int(n)

    @property
    def n(self):
        return self._n

    @property
    def params(self):
        return {"n": self.n}

    def axes(self):
        return [Axis(lambda y: np.full(np.shape(y), -np.inf), support=(0.0, 0.0))
                for _ in range(self.n)]


class IsometryImage(InitialDatum):
    """U f with U f(x) = pi^(-n/4) exp(-|x|^2/2) f(x), mapping L^2(dgamma) onto L^2(dx)."""

    family = "isometry-image"

    def __init__(self, base: InitialDatum):
        if base.axes() is None:
            raise ValueError("isometry image needs a separable base datum")
        self.base = base

    @property
    def n(self):
        return self.base.n

    @property
    def params(self):
        return {"base": self.base.describe()}

    def axes(self):
        out = []
        for ax in self.base.axes():
            out.append(Axis(lambda y, la=ax.log_abs: la(y) - 0.5 * y * y - 0.25 * LOG_PI,
                            ax.sign, ax.envelope.times(Envelope(0.0, ((-0.5, 2.0),))),
                            ax.support, ax.breakpoints))
        return out


def parse_datum(spec: str, n: int = 1) -> InitialDatum:
    """Build a datum from the compact ``family:params`` syntax used by the CLI.

    ``gaussian:a[,b1,...]``, ``hermite-fn:k1[,k2,...]``,
    ``hermite-poly:k1[,...]``, ``box:lo,hi`` (repeated per axis),
    ``quartic-exp:c``, ``hat:lo,hi[,peak]``, ``zero``.
    """
    family, _, rest = spec.strip().partition(":")
    family = family.lower()
    vals = [v for v in rest.split(",") if v.strip()] if rest else []
    try:
        nums = [float(v) for v in vals]
    except ValueError:
        raise ValueError(f"bad numeric parameters in datum spec {spec!r}") from None
    if family == "gaussian":
        if not nums:
            raise ValueError("gaussian needs a sharpness a")
        b = nums[1:] if len(nums) > 1 else [0.0] * n
        if len(b) != n:
            raise ValueError("gaussian linear term needs n components")
        return Gaussian(nums[0], b)
    if family in ("hermite-fn", "hermite-poly"):
        ks = [int(v) for v in nums] or [0]
        if len(ks) == 1 and n > 1:
            ks = ks + [0] * (n - 1)
        if len(ks) != n:
            raise ValueError("Hermite multi-index needs n entries")
        return (HermiteFunction if family == "hermite-fn" else HermitePolynomial)(ks)
    if family == "box":
        if len(nums) == 2:
            nums = nums * n
        if len(nums) != 2 * n:
            raise ValueError("box needs lo,hi per axis")
        return BoxIndicator(nums[0::2], nums[1::2])
    if family == "quartic-exp":
        if len(nums) != 1:
            raise ValueError("quartic-exp needs one coefficient")
        return QuarticExponential(nums[0], n)
    if family == "hat":
        if len(nums) not in (2, 3):
            raise ValueError("hat needs lo,hi[,peak]")
        return TabulatedContinuous.hat(*nums, n=n)
    if family == "zero":
        return Zero(n)
    raise ValueError(f"unknown datum family {family!r}")
