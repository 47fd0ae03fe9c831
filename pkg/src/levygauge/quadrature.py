"""Composite Simpson quadrature on segmented time grids and R^4 regions.

All integrals in the package go through this module so there is a single
quadrature error budget.  Time grids are unions of uniform segments (curve
corners sit exactly on segment boundaries, preserving Simpson's order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Weights for composite Simpson on n uniform intervals of width h (n even)."""
    if n < 2 or n % 2:
        raise DomainError(f"Simpson needs an even interval count >= 2, got {n}")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


@dataclass(frozen=True)
class TimeGrid:
    """Nodes on [0, 1] split into uniform Simpson segments.

    ``segments`` holds (start, stop) node-index pairs; node ``stop`` of one
    segment is node ``start`` of the next, so interior breakpoints appear once.
    """

    nodes: np.ndarray
    segments: tuple

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights aligned with ``nodes`` (segments summed)."""
        w = np.zeros(self.size)
        for a, b in self.segments:
            n = b - a
            h = (self.nodes[b] - self.nodes[a]) / n
            w[a : b + 1] += simpson_weights(n, h)
        return w

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate node samples over [0, 1]; leading axis indexes nodes."""
        if values.shape[0] != self.size:
            raise DomainError("sample count does not match grid")
        w = self.weights
        return np.tensordot(w, values, axes=(0, 0))

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])


def make_grid(n: int, breakpoints: tuple = ()) -> TimeGrid:
    """Uniform-by-segment grid on [0, 1] with ~n intervals total.

    Interior breakpoints become segment boundaries; each segment gets an even
    interval count proportional to its length (at least 2).
    """
    bps = sorted(b for b in breakpoints if 0.0 < b < 1.0)
    edges = [0.0] + bps + [1.0]
    nodes = [np.array([0.0])]
    segments = []
    start = 0
    for a, b in zip(edges[:-1], edges[1:]):
        m = max(2, int(round(n * (b - a))))
        m += m % 2
        seg = np.linspace(a, b, m + 1)
        nodes.append(seg[1:])
        segments.append((start, start + m))
        start += m
    return TimeGrid(np.concatenate(nodes), tuple(segments))


def s3_quadrature(n_psi: int = 16, n_theta: int = 16, n_phi: int = 32):
    """Tensor-Simpson quadrature on the unit 3-sphere.

    Returns (points (M, 4), weights (M,)) with sum(weights) = 2 pi^2 up to
    quadrature error.  Coordinates: omega = (cos psi, sin psi cos theta,
    sin psi sin theta cos phi, sin psi sin theta sin phi).
    """
    psi = np.linspace(0.0, np.pi, n_psi + 1)
    th = np.linspace(0.0, np.pi, n_theta + 1)
    ph = np.linspace(0.0, 2.0 * np.pi, n_phi + 1)
    wp = simpson_weights(n_psi, np.pi / n_psi)
    wt = simpson_weights(n_theta, np.pi / n_theta)
    wf = simpson_weights(n_phi, 2.0 * np.pi / n_phi)
    P, T, F = np.meshgrid(psi, th, ph, indexing="ij")
    pts = np.stack(
        [
            np.cos(P),
            np.sin(P) * np.cos(T),
            np.sin(P) * np.sin(T) * np.cos(F),
            np.sin(P) * np.sin(T) * np.sin(F),
        ],
        axis=-1,
    ).reshape(-1, 4)
    jac = (np.sin(P) ** 2) * np.sin(T)
    wgt = (
        wp[:, None, None] * wt[None, :, None] * wf[None, None, :] * jac
    ).reshape(-1)
    return pts, wgt


def ball_integral(
    density,
    center: np.ndarray,
    radius: float,
    n_radial: int = 160,
    angular: tuple = (16, 16, 32),
    radial_split: float | None = None,
    chunk: int = 16_000,
) -> float:
    """Integrate ``density`` over the ball |x - center| < radius.

    Radial-angular decomposition: int = int_0^R r^3 dr int_{S^3} f(c + r w) dW.
    The radial axis is split into an inner and an outer Simpson panel so that
    densities concentrated near the center stay resolved.  ``density`` must be
    vectorized over a leading point axis.
    """
    if radius <= 0:
        raise DomainError("radius must be positive")
    pts, wgt = s3_quadrature(*angular)
    split = radial_split if radial_split is not None else radius / 10.0
    split = min(max(split, radius / 1000.0), radius * 0.999)
    panels = [(0.0, split), (split, radius)]
    total = 0.0
    for a, b in panels:
        r = np.linspace(a, b, n_radial + 1)
        wr = simpson_weights(n_radial, (b - a) / n_radial)
        shell = np.zeros(n_radial + 1)
        for k in range(0, pts.shape[0], max(1, chunk // (n_radial + 1))):
            sl = slice(k, min(k + max(1, chunk // (n_radial + 1)), pts.shape[0]))
            x = center + r[:, None, None] * pts[None, sl, :]
            vals = density(x.reshape(-1, 4)).reshape(r.size, -1)
            if not np.all(np.isfinite(vals)):
                raise NumericError("non-finite density sample in ball integral")
            shell += vals @ wgt[sl]
        total += float(np.dot(wr, shell * r**3))
    return total


def box_integral(density, bounds, nodes_per_axis: int = 12, chunk: int = 16_000) -> float:
    """Tensor-Simpson integral of ``density`` over a coordinate box in R^4."""
    axes = []
    wts = []
    for lo, hi in bounds:
        n = nodes_per_axis + nodes_per_axis % 2
        axes.append(np.linspace(lo, hi, n + 1))
        wts.append(simpson_weights(n, (hi - lo) / n))
    G = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in G], axis=-1)
    W = np.multiply.outer(
        np.multiply.outer(wts[0], wts[1]), np.multiply.outer(wts[2], wts[3])
    ).ravel()
    total = 0.0
    for k in range(0, pts.shape[0], chunk):
        sl = slice(k, min(k + chunk, pts.shape[0]))
        vals = density(pts[sl])
        if not np.all(np.isfinite(vals)):
            raise NumericError("non-finite density sample in box integral")
        total += float(np.dot(W[sl], vals))
    return total
