"""Discretized H^1-curves in a chart, with the families used by experiments.

A curve is any object exposing batched ``pos(t)`` / ``vel(t)`` on [0, 1], a
``basepoint``, and ``breakpoints`` (interior times where the velocity may
jump; integrators align segment boundaries with them).  Concrete families:
cubic-Hermite node curves, exact Fourier loops and arcs, circles, figure
eights, plus wrappers for reparameterization and pointwise perturbation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .quadrature import make_grid

__all__ = [
    "HermiteCurve",
    "FourierLoop",
    "FourierArc",
    "LineCurve",
    "CircleLoop",
    "FigureEight",
    "ReparamCurve",
    "PerturbedCurve",
    "reparameterize",
    "random_fourier_loops",
    "random_fourier_arcs",
    "is_loop",
    "h1_norm",
]


class _CurveBase:
    breakpoints: tuple = ()
    label: str = "curve"

    @property
    def basepoint(self) -> np.ndarray:
        return self.pos(np.array(0.0))

    def endpoint(self) -> np.ndarray:
        return self.pos(np.array(1.0))


def is_loop(curve, tol: float = 1e-10) -> bool:
    return bool(np.linalg.norm(curve.endpoint() - curve.basepoint) < tol)


@dataclass
class HermiteCurve(_CurveBase):
    """C^1 cubic Hermite interpolant of (t_k, x_k) nodes.

    Node velocities default to second-order finite differences of the nodes
    (one-sided at the ends).  H^1 generality is represented at desk scale by
    refining nodes.
    """

    ts: np.ndarray
    xs: np.ndarray
    vs: np.ndarray | None = None
    label: str = "hermite"

    def __post_init__(self):
        self.ts = np.asarray(self.ts, dtype=float)
        self.xs = np.asarray(self.xs, dtype=float)
        if self.ts.ndim != 1 or self.xs.shape != (self.ts.size, 4):
            raise DomainError("need node times (n,) and positions (n, 4)")
        if abs(self.ts[0]) > 1e-14 or abs(self.ts[-1] - 1.0) > 1e-14:
            raise DomainError("node times must span [0, 1]")
        if np.any(np.diff(self.ts) <= 0):
            raise DomainError("node times must be strictly increasing")
        if self.vs is None:
            t, x = self.ts, self.xs
            v = np.empty_like(x)
            v[1:-1] = (x[2:] - x[:-2]) / (t[2:] - t[:-2])[:, None]
            v[0] = (x[1] - x[0]) / (t[1] - t[0])
            v[-1] = (x[-1] - x[-2]) / (t[-1] - t[-2])
            self.vs = v
        else:
            self.vs = np.asarray(self.vs, dtype=float)

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        flat = np.clip(t.reshape(-1), 0.0, 1.0)
        idx = np.clip(np.searchsorted(self.ts, flat, side="right") - 1, 0, self.ts.size - 2)
        h = self.ts[idx + 1] - self.ts[idx]
        s = (flat - self.ts[idx]) / h
        return t.shape, idx, s, h

    def pos(self, t):
        shape, idx, s, h = self._locate(t)
        s2, s3 = s * s, s**3
        h00 = 2 * s3 - 3 * s2 + 1
        h10 = s3 - 2 * s2 + s
        h01 = -2 * s3 + 3 * s2
        h11 = s3 - s2
        out = (
            h00[:, None] * self.xs[idx]
            + (h10 * h)[:, None] * self.vs[idx]
            + h01[:, None] * self.xs[idx + 1]
            + (h11 * h)[:, None] * self.vs[idx + 1]
        )
        return out.reshape(shape + (4,))

    def vel(self, t):
        shape, idx, s, h = self._locate(t)
        s2 = s * s
        d00 = (6 * s2 - 6 * s) / h
        d10 = 3 * s2 - 4 * s + 1
        d01 = (-6 * s2 + 6 * s) / h
        d11 = 3 * s2 - 2 * s
        out = (
            d00[:, None] * self.xs[idx]
            + d10[:, None] * self.vs[idx]
            + d01[:, None] * self.xs[idx + 1]
            + d11[:, None] * self.vs[idx + 1]
        )
        return out.reshape(shape + (4,))


@dataclass
class FourierLoop(_CurveBase):
    """Closed analytic loop x(t) = m + sum_k a_k (cos 2 pi k t - 1) + b_k sin 2 pi k t."""

    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    base: np.ndarray = field(default_factory=lambda: np.zeros(4))
    label: str = "fourier_loop"

    def __post_init__(self):
        self.cos_coeffs = np.atleast_2d(np.asarray(self.cos_coeffs, dtype=float))
        self.sin_coeffs = np.atleast_2d(np.asarray(self.sin_coeffs, dtype=float))
        self.base = np.asarray(self.base, dtype=float)

    def pos(self, t):
        t = np.asarray(t, dtype=float)
        out = np.broadcast_to(self.base, t.shape + (4,)).copy()
        for k in range(self.cos_coeffs.shape[0]):
            w = 2 * np.pi * (k + 1)
            out += np.multiply.outer(np.cos(w * t) - 1.0, self.cos_coeffs[k])
            out += np.multiply.outer(np.sin(w * t), self.sin_coeffs[k])
        return out

    def vel(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (4,))
        for k in range(self.cos_coeffs.shape[0]):
            w = 2 * np.pi * (k + 1)
            out += np.multiply.outer(-w * np.sin(w * t), self.cos_coeffs[k])
            out += np.multiply.outer(w * np.cos(w * t), self.sin_coeffs[k])
        return out


@dataclass
class FourierArc(_CurveBase):
    """Open analytic curve x(t) = m + d t + sum_k c_k sin(pi k t)."""

    drift: np.ndarray
    sin_coeffs: np.ndarray
    base: np.ndarray = field(default_factory=lambda: np.zeros(4))
    label: str = "fourier_arc"

    def __post_init__(self):
        self.drift = np.asarray(self.drift, dtype=float)
        self.sin_coeffs = np.atleast_2d(np.asarray(self.sin_coeffs, dtype=float))
        self.base = np.asarray(self.base, dtype=float)

    def pos(self, t):
        t = np.asarray(t, dtype=float)
        out = self.base + np.multiply.outer(t, self.drift)
        for k in range(self.sin_coeffs.shape[0]):
            out += np.multiply.outer(np.sin(np.pi * (k + 1) * t), self.sin_coeffs[k])
        return out

    def vel(self, t):
        t = np.asarray(t, dtype=float)
        out = np.broadcast_to(self.drift, t.shape + (4,)).copy()
        for k in range(self.sin_coeffs.shape[0]):
            w = np.pi * (k + 1)
            out += np.multiply.outer(w * np.cos(w * t), self.sin_coeffs[k])
        return out


def LineCurve(base, direction, label: str = "line") -> FourierArc:
    """Straight segment x(t) = base + t * direction."""
    arc = FourierArc(np.asarray(direction, dtype=float), np.zeros((1, 4)), np.asarray(base, dtype=float))
    arc.label = label
    return arc


def CircleLoop(base, radius: float, plane=(0, 1), label: str = "circle") -> FourierLoop:
    """Coordinate circle through the basepoint in the given plane."""
    a = np.zeros((1, 4))
    b = np.zeros((1, 4))
    a[0, plane[0]] = radius
    b[0, plane[1]] = radius
    loop = FourierLoop(a, b, np.asarray(base, dtype=float))
    loop.label = label
    return loop


def FigureEight(base, size: float, planes=((0, 1), (2, 3)), label: str = "figure8") -> FourierLoop:
    """Two-lobe loop mixing first and second harmonics in two planes."""
    a = np.zeros((2, 4))
    b = np.zeros((2, 4))
    a[0, planes[0][0]] = size
    b[0, planes[0][1]] = size
    a[1, planes[1][0]] = 0.5 * size
    b[1, planes[1][1]] = -0.5 * size
    loop = FourierLoop(a, b, np.asarray(base, dtype=float))
    loop.label = label
    return loop


@dataclass
class ReparamCurve(_CurveBase):
    """gamma_r: runs gamma on [0, r], then rests at gamma(1).

    Velocity jumps at t = r, which is exposed through ``breakpoints`` so
    integrators split there exactly.
    """

    basecurve: object
    r: float
    label: str = "reparam"

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise DomainError("reparameterization factor must lie in (0, 1]")
        self.label = f"{getattr(self.basecurve, 'label', 'curve')}@r={self.r:g}"

    @property
    def breakpoints(self):
        return () if self.r >= 1.0 else (self.r,)

    def pos(self, t):
        t = np.asarray(t, dtype=float)
        return self.basecurve.pos(np.minimum(t / self.r, 1.0))

    def vel(self, t):
        t = np.asarray(t, dtype=float)
        inside = t < self.r
        v = self.basecurve.vel(np.minimum(t / self.r, 1.0)) / self.r
        return np.where(inside[..., None], v, 0.0)


def reparameterize(curve, r: float) -> object:
    """gamma_r(t) = gamma(t/r) for t <= r, frozen at gamma(1) after."""
    if r == 1.0:
        return curve
    return ReparamCurve(curve, r)


@dataclass
class PerturbedCurve(_CurveBase):
    """gamma + eps * h for a direction field h(t) given by callables."""

    basecurve: object
    eps: float
    h_pos: object
    h_vel: object
    label: str = "perturbed"

    @property
    def breakpoints(self):
        return getattr(self.basecurve, "breakpoints", ())

    def pos(self, t):
        return self.basecurve.pos(t) + self.eps * self.h_pos(np.asarray(t, dtype=float))

    def vel(self, t):
        return self.basecurve.vel(t) + self.eps * self.h_vel(np.asarray(t, dtype=float))


def random_fourier_loops(seed: int, count: int, modes: int = 3, scale: float = 0.6, base=None):
    """Seeded family of smooth loops, scaled to stay within |x - m| <= scale."""
    rng = np.random.default_rng(seed)
    base = np.zeros(4) if base is None else np.asarray(base, dtype=float)
    loops = []
    for i in range(count):
        decay = np.arange(1, modes + 1)[:, None] ** 2
        a = rng.standard_normal((modes, 4)) / decay
        b = rng.standard_normal((modes, 4)) / decay
        reach = np.sum(2 * np.linalg.norm(a, axis=1) + np.linalg.norm(b, axis=1))
        f = scale / max(reach, 1e-12)
        loop = FourierLoop(f * a, f * b, base)
        loop.label = f"loop{i:03d}"
        loops.append(loop)
    return loops


def random_fourier_arcs(seed: int, count: int, modes: int = 3, scale: float = 0.6, base=None):
    """Seeded family of smooth open curves with endpoints away from the base."""
    rng = np.random.default_rng(seed)
    base = np.zeros(4) if base is None else np.asarray(base, dtype=float)
    arcs = []
    for i in range(count):
        d = rng.standard_normal(4)
        c = rng.standard_normal((modes, 4)) / (np.arange(1, modes + 1)[:, None] ** 2)
        reach = np.linalg.norm(d) + np.sum(np.linalg.norm(c, axis=1))
        f = scale / max(reach, 1e-12)
        arc = FourierArc(f * d, f * c, base)
        arc.label = f"arc{i:03d}"
        arcs.append(arc)
    return arcs


def h1_norm(curve, n: int = 512) -> float:
    """Flat-chart H^1 norm sqrt(int |x|^2 + |xdot|^2 dt)."""
    grid = make_grid(n, getattr(curve, "breakpoints", ()))
    x = curve.pos(grid.nodes)
    v = curve.vel(grid.nodes)
    val = grid.integrate(np.einsum("tm,tm->t", x, x) + np.einsum("tm,tm->t", v, v))
    return float(np.sqrt(val))
