"""Parallel transport along curves: gauge and Levi-Civita.

The gauge transport U(t) = U_{t,0} solves dU/dt = -A_mu(gamma(t)) gammadot^mu U,
U(0) = I; the Levi-Civita transport moves a g-orthonormal frame E(t) by
dE/dt = -Gamma<gammadot> E.  Both use fixed-step RK4 with a projection back to
the constraint manifold each step (polar for the gauge group, metric-polar for
frames).  Curve corners (reparameterizations) sit on segment boundaries of the
time grid, preserving the integrator's order.

Evaluations of A and Gamma along the curve are batched over the whole grid
before the RK loop, so connections with finite-difference derivatives stay
affordable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import polar_project
from .connection import Connection, curvature
from .errors import ContractError, DomainError, NumericError
from .geometry import MetricChart, christoffel, metric_eval, orthonormal_frame, selfdual_basis
from .quadrature import TimeGrid, make_grid

__all__ = [
    "TransportResult",
    "gauge_transport",
    "levi_civita_transport",
    "transports",
    "transport_bivectors",
    "first_variation",
    "default_grid",
]


def _ein(*operands):
    return np.einsum(*operands, optimize=True)


def default_grid(curve, n: int = 1024) -> TimeGrid:
    return make_grid(n, getattr(curve, "breakpoints", ()))


def _sample_times(grid: TimeGrid):
    """Node and midpoint times interleaved: t_0, m_0, t_1, m_1, ..., t_K."""
    nodes = grid.nodes
    mids = grid.midpoints()
    ts = np.empty(nodes.size + mids.size)
    ts[0::2] = nodes
    ts[1::2] = mids
    return ts


def _nudge_into_segments(ts: np.ndarray, grid: TimeGrid, scale: float = 1e-12):
    """Pull samples off segment boundaries so one-sided velocities resolve.

    Only applied when the curve has corners; the positional error is O(1e-12)
    per unit velocity, far below integration tolerances.
    """
    out = ts.copy()
    for a, b in grid.segments:
        lo, hi = grid.nodes[a], grid.nodes[b]
        eps = scale * max(1.0, hi - lo)
        sel = (out >= lo) & (out <= hi)
        out[sel] = np.clip(out[sel], lo + eps, hi - eps)
    return out


def _rk4_group(B: np.ndarray, hs: np.ndarray, project) -> np.ndarray:
    """Integrate dU/dt = B(t) U with RK4; B sampled at nodes and midpoints.

    B has shape (2K+1, 4, 4) (node, mid, node, ...); hs the K step widths.
    ``project`` maps a matrix near the constraint set back onto it.
    """
    K = hs.size
    U = np.eye(4)
    out = np.empty((K + 1, 4, 4))
    out[0] = U
    for k in range(K):
        h = hs[k]
        B0, Bm, B1 = B[2 * k], B[2 * k + 1], B[2 * k + 2]
        k1 = B0 @ U
        k2 = Bm @ (U + 0.5 * h * k1)
        k3 = Bm @ (U + 0.5 * h * k2)
        k4 = B1 @ (U + h * k3)
        U = U + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        U = project(U, k)
        out[k + 1] = U
    return out


@dataclass
class TransportResult:
    """Transports along one curve on a shared time grid.

    U[k] = gauge transport U_{t_k, 0} (None if not computed); frames[k] has
    columns e_mu(gamma, t_k), the Levi-Civita transported orthonormal frame;
    U_between(i, j) composes U_{t_j, t_i} from stored group elements.
    """

    grid: TimeGrid
    curve: object
    chart: MetricChart | None = None
    U: np.ndarray | None = None
    frames: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def U_between(self, i: int, j: int) -> np.ndarray:
        if self.U is None:
            raise DomainError("gauge transport not computed")
        return self.U[j] @ self.U[i].T

    @property
    def positions(self) -> np.ndarray:
        return self.curve.pos(self.grid.nodes)

    @property
    def velocities(self) -> np.ndarray:
        ts = self.grid.nodes
        if getattr(self.curve, "breakpoints", ()):
            ts = _nudge_into_segments(ts, self.grid)
        return self.curve.vel(ts)


def gauge_transport(conn: Connection, curve, grid: TimeGrid | None = None, n: int = 1024) -> TransportResult:
    """Transport U^A along the curve; orthogonality enforced by polar steps."""
    grid = grid if grid is not None else default_grid(curve, n)
    ts = _sample_times(grid)
    if getattr(curve, "breakpoints", ()):
        ts = _nudge_into_segments(ts, grid)
    pos = curve.pos(ts)
    vel = curve.vel(ts)
    A = conn.A(pos)
    B = -_ein("tm,tmij->tij", vel, A)
    if not np.all(np.isfinite(B)):
        raise NumericError("non-finite connection sample along the curve")
    hs = np.diff(grid.nodes)
    U = _rk4_group(B, hs, lambda M, k: polar_project(M))
    defect = np.abs(np.swapaxes(U, -1, -2) @ U - np.eye(4)).max()
    if defect > 1e-9:
        raise NumericError(f"gauge transport left the group (defect {defect:.2e})")
    return TransportResult(grid, curve, None, U=U, meta={"orthogonality_defect": float(defect)})


def levi_civita_transport(chart: MetricChart, curve, grid: TimeGrid | None = None, n: int = 1024) -> TransportResult:
    """Transport the chart-orthonormal frame at the basepoint along the curve.

    Frames are re-projected to g-orthonormality each step with the metric
    polar map E -> E (E^T g E)^{-1/2}.
    """
    grid = grid if grid is not None else default_grid(curve, n)
    ts = _sample_times(grid)
    if getattr(curve, "breakpoints", ()):
        ts = _nudge_into_segments(ts, grid)
    pos = curve.pos(ts)
    vel = curve.vel(ts)
    chart.check_domain(pos)
    G = christoffel(chart, pos)
    B = -_ein("tkln,tn->tkl", G, vel)
    hs = np.diff(grid.nodes)
    gs = metric_eval(chart, pos[0::2])  # metric at nodes

    E0 = orthonormal_frame(chart, pos[0])

    def project(E, k):
        g = gs[k + 1]
        gram = E.T @ g @ E
        vals, vecs = np.linalg.eigh(gram)
        inv_sqrt = (vecs * (1.0 / np.sqrt(vals))) @ vecs.T
        return E @ inv_sqrt

    K = hs.size
    E = E0.copy()
    frames = np.empty((K + 1, 4, 4))
    frames[0] = E
    for k in range(K):
        h = hs[k]
        B0, Bm, B1 = B[2 * k], B[2 * k + 1], B[2 * k + 2]
        k1 = B0 @ E
        k2 = Bm @ (E + 0.5 * h * k1)
        k3 = Bm @ (E + 0.5 * h * k2)
        k4 = B1 @ (E + h * k3)
        E = E + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        E = project(E, k)
        frames[k + 1] = E
    gram = _ein("tam,tab,tbn->tmn", frames, gs, frames)
    defect = np.abs(gram - np.eye(4)).max()
    if defect > 1e-9:
        raise NumericError(f"frame transport lost orthonormality (defect {defect:.2e})")
    return TransportResult(grid, curve, chart, frames=frames, meta={"isometry_defect": float(defect)})


def transports(conn: Connection, chart: MetricChart, curve, grid: TimeGrid | None = None, n: int = 1024) -> TransportResult:
    """Gauge and Levi-Civita transports on one shared grid."""
    grid = grid if grid is not None else default_grid(curve, n)
    gt = gauge_transport(conn, curve, grid)
    lc = levi_civita_transport(chart, curve, grid)
    return TransportResult(
        grid,
        curve,
        chart,
        U=gt.U,
        frames=lc.frames,
        meta={**gt.meta, **lc.meta},
    )


def transport_bivectors(result: TransportResult):
    """(plus, minus) with plus[k, i] = v_i^+(gamma, t_k) as chart bivectors."""
    if result.frames is None:
        raise DomainError("frame transport not computed")
    return selfdual_basis(result.frames, metric_eval(result.chart, result.positions))


def first_variation(
    conn: Connection,
    chart: MetricChart,
    curve,
    h_coeff,
    grid: TimeGrid | None = None,
    n: int = 1024,
    tr: TransportResult | None = None,
) -> np.ndarray:
    """Directional derivative of U_{1,0} along the frame-transported field.

    ``h_coeff`` maps times to R^4 coefficient vectors with h(0) = 0; the
    direction is htilde(t) = e_mu(gamma, t) h^mu(t).  Value:

        dU = -int U_{1,t} F(gamma(t))<htilde, gammadot> U_{t,0} dt
             - A<htilde(1)>(gamma(1)) U_{1,0}

    The boundary term vanishes for h(1) = 0 (the variation space of the
    second-derivative kernels).
    """
    if tr is None:
        tr = transports(conn, chart, curve, grid, n)
    ts = tr.grid.nodes
    h = np.asarray(h_coeff(ts), dtype=float)
    if np.linalg.norm(h[0]) > 1e-12:
        raise ContractError("variation field must vanish at t = 0")
    pos = tr.positions
    vel = tr.velocities
    htil = _ein("tam,tm->ta", tr.frames, h)
    F = curvature(conn, pos)
    Fh = _ein("tmnij,tm,tn->tij", F, htil, vel)
    U1 = tr.U[-1]
    U1t = _ein("ab,tcb->tac", U1, tr.U)  # U_{1, t_k} = U(1) U(t_k)^T
    integrand = U1t @ Fh @ tr.U
    val = -tr.grid.integrate(integrand)
    if np.linalg.norm(h[-1]) > 1e-12:
        A1 = conn.A(pos[-1])
        val = val - _ein("mij,m->ij", A1, htil[-1]) @ U1
    return val
