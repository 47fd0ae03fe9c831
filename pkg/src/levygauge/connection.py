"""Gauge connections with structure group S^3_L in SO(4).

The gauge algebra g = Lie(S^3_L) is su(2) realized as real 4x4 matrices (left
quaternion multiplications).  The curvature norm uses the su(2)-fundamental
normalization (B1, B2) = -tr(B1 B2)/2 of this realization, which makes the
one-instanton numbers come out as S_YM = 4 pi^2 and k = -1.

Presets: zero, the quaternionic one-instanton family (analytic derivatives),
compact bump perturbations, and gauge transforms.  Derivatives of perturbed or
gauge-transformed fields fall back to 4th-order central differences (step
1e-4).  Every evaluator broadcasts over leading point axes; arrays follow
A[..., mu, i, j], dA[..., lam, mu, i, j], F[..., mu, nu, i, j].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def _ein(*operands):
    return np.einsum(*operands, optimize=True)

from .algebra import exp_so4, from_coefficients, left_matrix, project_left, project_right
from .errors import ContractError, DomainError, NumericError
from .geometry import MetricChart, christoffel, hodge_star, metric_eval, volume_density
from .quadrature import ball_integral

__all__ = [
    "Connection",
    "ZeroConnection",
    "QuaternionInstanton",
    "PerturbedConnection",
    "GaugeTransformedConnection",
    "GaugeField",
    "quaternion_instanton",
    "bump_perturbation",
    "gauge_field",
    "gauge_transform",
    "curvature",
    "curvature_split",
    "grad_curvature",
    "codifferential",
    "gauge_inner",
    "gauge_norm2_form",
    "ym_density",
    "ym_action",
    "topological_charge",
    "BallRegion",
]

FD_STEP = 1e-4
_FD4 = (1.0, -8.0, 8.0, -1.0)
_FD4_SHIFTS = (-2.0, -1.0, 1.0, 2.0)


def gauge_inner(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """(X, Y) = -tr(X Y)/2 on the 4x4 realization of g (fundamental index)."""
    return -0.5 * _ein("...ij,...ji->...", X, Y)


def _conj_q(x):
    out = -x.copy()
    out[..., 0] = x[..., 0]
    return out


def _qmul(p, q):
    a1, b1, c1, d1 = (p[..., i] for i in range(4))
    a2, b2, c2, d2 = (q[..., i] for i in range(4))
    return np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=-1,
    )


class Connection:
    """Base class: evaluators A, dA, d2A with FD fallbacks."""

    label = "connection"
    analytic_order = 0  # how many derivative levels are analytic

    def A(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dA(self, x: np.ndarray) -> np.ndarray:
        """dA[..., lam, mu, i, j] = d_lam A_mu; 4th-order FD fallback."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (4, 4, 4, 4))
        for lam in range(4):
            e = np.zeros(4)
            e[lam] = FD_STEP
            acc = np.zeros(x.shape[:-1] + (4, 4, 4))
            for c, s in zip(_FD4, _FD4_SHIFTS):
                acc += c * self.A(x + s * e)
            out[..., lam, :, :, :] = acc / (12.0 * FD_STEP)
        return out

    def d2A(self, x: np.ndarray) -> np.ndarray:
        """d2A[..., kap, lam, mu, i, j] = d_kap d_lam A_mu via FD on dA."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (4, 4, 4, 4, 4))
        for kap in range(4):
            e = np.zeros(4)
            e[kap] = FD_STEP
            acc = np.zeros(x.shape[:-1] + (4, 4, 4, 4))
            for c, s in zip(_FD4, _FD4_SHIFTS):
                acc += c * self.dA(x + s * e)
            out[..., kap, :, :, :, :] = acc / (12.0 * FD_STEP)
        return out

    def action_tail_bound(self, radius: float) -> float:
        """Analytic bound on the YM action outside |x - center| = radius."""
        return float("nan")

    def check_gauge_valued(self, x: np.ndarray, tol: float = 1e-12):
        A = self.A(x)
        defect = np.abs(A + np.swapaxes(A, -1, -2)).max()
        right = np.abs(project_right(A)).max()
        if max(defect, right) > tol:
            raise ContractError(
                f"A leaves Lie(S3_L): antisym defect {defect:.2e}, right part {right:.2e}"
            )


class ZeroConnection(Connection):
    label = "zero"
    analytic_order = 2

    def A(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (4, 4, 4))

    def dA(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (4, 4, 4, 4))

    def d2A(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (4, 4, 4, 4, 4))

    def action_tail_bound(self, radius):
        return 0.0


class QuaternionInstanton(Connection):
    """A(x) = Im(qbar dq) / (1 + |q|^2), q = (x - center)/rho.

    Purely anti-self-dual curvature (F_+ = 0) in the right-handed flat chart;
    the 'self_dual' variant reflects the fourth coordinate, which flips the
    duality while keeping the values in Lie(S^3_L).  All derivatives analytic.
    """

    analytic_order = 2

    def __init__(self, rho: float = 1.0, center=(0, 0, 0, 0), duality: str = "anti_self_dual"):
        if rho <= 0:
            raise DomainError("instanton scale rho must be positive")
        if duality not in ("anti_self_dual", "self_dual"):
            raise DomainError("duality must be 'anti_self_dual' or 'self_dual'")
        self.rho = float(rho)
        self.center = np.asarray(center, dtype=float)
        self.duality = duality
        self.label = f"instanton(rho={rho:g},{duality})"
        # reflection of the 4th coordinate swaps the duality
        self._refl = np.ones(4) if duality == "anti_self_dual" else np.array([1.0, 1.0, 1.0, -1.0])

    # imaginary parts of qbar e_mu as linear functions of q: _IM[mu] @ q
    _IM = np.zeros((4, 3, 4))
    _IM[0] = [[0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]]
    _IM[1] = [[1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
    _IM[2] = [[0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]]
    _IM[3] = [[0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]

    def _q(self, x):
        return (np.asarray(x, dtype=float) * self._refl - self.center) / self.rho

    def A(self, x):
        q = self._q(x)
        s = _ein("...m,...m->...", q, q)
        phi = 1.0 / (1.0 + s)
        coeff = _ein("mcq,...q->...mc", self._IM, q)  # (..., mu, 3)
        Amats = left_matrix(coeff[..., 0], coeff[..., 1], coeff[..., 2])
        out = (phi / self.rho)[..., None, None, None] * Amats
        return out * self._refl[..., :, None, None]

    def dA(self, x):
        q = self._q(x)
        s = _ein("...m,...m->...", q, q)
        phi = 1.0 / (1.0 + s)
        dphi = -(phi**2)
        coeff = _ein("mcq,...q->...mc", self._IM, q)
        Amats = left_matrix(coeff[..., 0], coeff[..., 1], coeff[..., 2])
        const = left_matrix(self._IM[:, 0, :], self._IM[:, 1, :], self._IM[:, 2, :])
        # const[mu, lam] = d A-matrix structure / d q_lam, shape (4, 4, 4, 4)
        dmats = np.swapaxes(const, 0, 1)  # (lam, mu, 4, 4)
        term1 = 2.0 * _ein("...,...l,...mij->...lmij", dphi, q, Amats)
        term2 = phi[..., None, None, None, None] * dmats
        out = (term1 + term2) / self.rho**2
        return out * (self._refl[:, None, None, None] * self._refl[None, :, None, None])

    def d2A(self, x):
        q = self._q(x)
        s = _ein("...m,...m->...", q, q)
        phi = 1.0 / (1.0 + s)
        dphi = -(phi**2)
        d2phi = 2.0 * phi**3
        coeff = _ein("mcq,...q->...mc", self._IM, q)
        Amats = left_matrix(coeff[..., 0], coeff[..., 1], coeff[..., 2])
        const = left_matrix(self._IM[:, 0, :], self._IM[:, 1, :], self._IM[:, 2, :])
        dmats = np.swapaxes(const, 0, 1)  # (lam, mu, i, j)
        I4 = np.eye(4)
        out = (
            4.0 * _ein("...,...k,...l,...mij->...klmij", d2phi, q, q, Amats)
            + 2.0 * _ein("...,kl,...mij->...klmij", dphi, I4, Amats)
            + 2.0 * _ein("...,...l,kmij->...klmij", dphi, q, dmats)
            + 2.0 * _ein("...,...k,lmij->...klmij", dphi, q, dmats)
        ) / self.rho**3
        r = self._refl
        return out * (
            r[:, None, None, None, None] * r[None, :, None, None, None] * r[None, None, :, None, None]
        )

    def action_tail_bound(self, radius):
        # density 0.5 ||F||^2 <= 24/rho^4 (rho/r)^8 outside the core
        return 12.0 * np.pi**2 * (self.rho / radius) ** 4


def quaternion_instanton(rho=1.0, center=(0, 0, 0, 0), duality="anti_self_dual") -> QuaternionInstanton:
    return QuaternionInstanton(rho, center, duality)


@dataclass
class BumpPerturbation:
    """Compactly supported g-valued 1-form: delta A_mu = beta(x) D_mu.

    beta is the standard C-infinity bump exp(1 - 1/(1 - u)), u = |x-c|^2/R^2,
    supported in |x - c| < R with max 1 at the center.
    """

    center: np.ndarray
    radius: float
    amplitude: float
    directions: np.ndarray  # (4, 3) coefficient triples in Lie(S3_L)

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.directions = np.asarray(self.directions, dtype=float)
        if self.directions.shape != (4, 3):
            raise DomainError("need one Lie(S3_L) coefficient triple per coordinate")
        if self.radius <= 0:
            raise DomainError("bump radius must be positive")

    def beta(self, x):
        d = np.asarray(x, dtype=float) - self.center
        u = _ein("...m,...m->...", d, d) / self.radius**2
        out = np.zeros(u.shape)
        inside = u < 1.0
        ui = np.where(inside, u, 0.0)
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui))[inside]
        return self.amplitude * out

    def delta_A(self, x):
        b = self.beta(x)
        D = left_matrix(self.directions[:, 0], self.directions[:, 1], self.directions[:, 2])
        return b[..., None, None, None] * D


def bump_perturbation(center=(0.3, 0, 0, 0), radius=1.0, amplitude=0.1, directions=None) -> BumpPerturbation:
    if directions is None:
        directions = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [0.5, -0.5, 0.25]])
    return BumpPerturbation(np.asarray(center, float), radius, amplitude, np.asarray(directions, float))


class PerturbedConnection(Connection):
    """base + compact bump; derivatives via the generic FD fallback."""

    def __init__(self, base: Connection, bump: BumpPerturbation):
        self.base = base
        self.bump = bump
        self.label = f"perturbed({base.label},amp={bump.amplitude:g})"

    def A(self, x):
        return self.base.A(x) + self.bump.delta_A(x)

    def action_tail_bound(self, radius):
        # the bump is compactly supported; outside its ball the tail is the base's
        return self.base.action_tail_bound(radius)


class GaugeField:
    """psi: R^4 -> S^3_L of the form exp(chi(x) K), K a fixed unit generator.

    K commutes with itself along rays, so d psi = (d chi) K psi analytically.
    """

    def __init__(self, chi, direction=(1.0, 0.0, 0.0), label: str = "psi"):
        self.chi = chi  # ScalarField
        n = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(n)
        if norm < 1e-14:
            raise DomainError("gauge field direction must be nonzero")
        self.K = left_matrix(*(n / norm))
        self.label = label

    def psi(self, x):
        c = self.chi.value(np.asarray(x, dtype=float))
        return exp_so4(c[..., None, None] * self.K)

    def dpsi(self, x):
        """d_mu psi = (d_mu chi) K psi."""
        x = np.asarray(x, dtype=float)
        g = self.chi.grad(x)
        p = self.psi(x)
        return g[..., :, None, None] * (self.K @ p)[..., None, :, :]

    def check_in_group(self, x, tol: float = 1e-8):
        p = self.psi(x)
        defect = np.abs(np.swapaxes(p, -1, -2) @ p - np.eye(4)).max()
        if defect > tol:
            raise ContractError(f"gauge field leaves the group (defect {defect:.2e})")


def gauge_field(family: str = "gaussian", direction=(1.0, 0.0, 0.0), **params) -> GaugeField:
    from .geometry import scalar_field

    chi = scalar_field(family, **params)
    return GaugeField(chi, direction, label=f"psi[{family}]")


class GaugeTransformedConnection(Connection):
    """A' = psi^-1 A psi + psi^-1 d psi; higher derivatives via FD."""

    def __init__(self, base: Connection, psi: GaugeField):
        psi.check_in_group(np.zeros((8, 4)) + np.linspace(-1, 1, 8)[:, None])
        self.base = base
        self.psi = psi
        self.label = f"gauge({base.label},{psi.label})"

    def A(self, x):
        p = self.psi.psi(x)
        pinv = np.swapaxes(p, -1, -2)
        A = self.base.A(x)
        dpsi = self.psi.dpsi(x)
        return _ein("...ij,...mjk,...kl->...mil", pinv, A, p) + _ein(
            "...ij,...mjk->...mik", pinv, dpsi
        )


def gauge_transform(conn: Connection, psi: GaugeField) -> Connection:
    """Act on a connection by a gauge transform (checks psi stays in G)."""
    return GaugeTransformedConnection(conn, psi)


def curvature(conn: Connection, x: np.ndarray) -> np.ndarray:
    """F_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu]."""
    x = np.asarray(x, dtype=float)
    dA = conn.dA(x)
    A = conn.A(x)
    F = dA - np.swapaxes(dA, -4, -3)
    comm = A[..., :, None, :, :] @ A[..., None, :, :, :]
    F = F + comm - np.swapaxes(comm, -4, -3)
    if not np.all(np.isfinite(F)):
        raise NumericError("curvature evaluation produced non-finite entries")
    return F


def curvature_split(chart: MetricChart, x: np.ndarray, F: np.ndarray):
    """(F_plus, F_minus): eigenparts of the Hodge star, F = F_+ + F_-."""
    sF = hodge_star(chart, x, F, kind="form")
    return 0.5 * (F + sF), 0.5 * (F - sF)


def grad_curvature(conn: Connection, x: np.ndarray, fd_step: float = FD_STEP) -> np.ndarray:
    """Plain derivative d_lam F_{mu nu} (no gauge or Christoffel terms).

    Analytic when the connection provides d2A, otherwise 4th-order central
    differences of the curvature.
    """
    x = np.asarray(x, dtype=float)
    if conn.analytic_order >= 2:
        # dF_{l m n} = d2A_{l m n} - d2A_{l n m} + [dA_{l m}, A_n] + [A_m, dA_{l n}]
        d2A = conn.d2A(x)
        dA = conn.dA(x)
        A = conn.A(x)
        t1 = d2A - np.swapaxes(d2A, -4, -3)
        dA_lm = dA[..., :, :, None, :, :]
        A_n = A[..., None, None, :, :, :]
        t2 = dA_lm @ A_n - A_n @ dA_lm
        A_m = A[..., None, :, None, :, :]
        dA_ln = dA[..., :, None, :, :, :]
        t3 = A_m @ dA_ln - dA_ln @ A_m
        return t1 + t2 + t3
    out = np.zeros(x.shape[:-1] + (4, 4, 4, 4, 4))
    for lam in range(4):
        e = np.zeros(4)
        e[lam] = fd_step
        acc = np.zeros(x.shape[:-1] + (4, 4, 4, 4))
        for c, s in zip(_FD4, _FD4_SHIFTS):
            acc += c * curvature(conn, x + s * e)
        out[..., lam, :, :, :, :] = acc / (12.0 * fd_step)
    return out


def covariant_grad_curvature(
    conn: Connection, chart: MetricChart, x: np.ndarray, F: np.ndarray | None = None
) -> np.ndarray:
    """nabla_lam F_{mu nu} = d_lam F + [A_lam, F] - F_{mu k} Gamma^k_{lam nu}
    - F_{k nu} Gamma^k_{lam mu}."""
    x = np.asarray(x, dtype=float)
    if F is None:
        F = curvature(conn, x)
    dF = grad_curvature(conn, x)
    A = conn.A(x)
    comm = _ein("...lij,...mnjk->...lmnik", A, F) - _ein(
        "...mnij,...ljk->...lmnik", F, A
    )
    G = christoffel(chart, x)
    geo = _ein("...mkij,...kln->...lmnij", F, G) + _ein(
        "...knij,...klm->...lmnij", F, G
    )
    return dF + comm - geo


def codifferential(conn: Connection, chart: MetricChart, x: np.ndarray) -> np.ndarray:
    """(D_A* F)_nu = -g^{lam mu} nabla_lam F_{mu nu}; shape (..., 4, N, N).

    For connections with analytic second derivatives the metric contraction
    is folded into each term, avoiding the rank-6 gradient tensor (matters on
    large sample grids).
    """
    x = np.asarray(x, dtype=float)
    ginv = np.linalg.inv(metric_eval(chart, x))
    if conn.analytic_order >= 2:
        d2A = conn.d2A(x)
        dA = conn.dA(x)
        A = conn.A(x)
        F = curvature(conn, x)
        # g^{lm} (d2A_{lmn} - d2A_{lnm})
        t1 = _ein("...lm,...lmnij->...nij", ginv, d2A) - _ein(
            "...lm,...lnmij->...nij", ginv, d2A
        )
        # g^{lm} [dA_{lm}, A_n]
        dAc = _ein("...lm,...lmij->...ij", ginv, dA)
        t2 = dAc[..., None, :, :] @ A - A @ dAc[..., None, :, :]
        # g^{lm} [A_m, dA_{ln}]
        Araised = _ein("...lm,...mij->...lij", ginv, A)
        t3 = _ein("...lij,...lnjk->...nik", Araised, dA) - _ein(
            "...lnij,...ljk->...nik", dA, Araised
        )
        # g^{lm} [A_l, F_{mn}]
        t4 = _ein("...lij,...lnjk->...nik", Araised, F) - _ein(
            "...lnij,...ljk->...nik", F, Araised
        )
        # Christoffel terms: g^{lm} (F_{mk} G^k_{ln} + F_{kn} G^k_{lm})
        G = christoffel(chart, x)
        Gu = _ein("...lm,...kln->...kmn", ginv, G)  # G^{k m}_n raised on l
        t5 = _ein("...mkij,...kmn->...nij", F, Gu) + _ein(
            "...knij,...kmm->...nij", F, Gu
        )
        out = -(t1 + t2 + t3 + t4 - t5)
    else:
        covF = covariant_grad_curvature(conn, chart, x)
        out = -_ein("...lm,...lmnij->...nij", ginv, covF)
    if not np.all(np.isfinite(out)):
        raise NumericError("codifferential produced non-finite entries")
    return out


def gauge_norm2_form(chart: MetricChart, x: np.ndarray, F: np.ndarray) -> np.ndarray:
    """||F||^2(x) = (1/2) g^{ma} g^{nb} (F_{mn}, F_{ab}); trace product -tr/2."""
    ginv = np.linalg.inv(metric_eval(chart, x))
    Fup = _ein("...ma,...nb,...abij->...mnij", ginv, ginv, F)
    return -0.25 * _ein("...mnij,...mnji->...", Fup, F)


def ym_density(conn: Connection, chart: MetricChart, x: np.ndarray) -> np.ndarray:
    """Yang-Mills Lagrangian density 0.5 ||F||^2 sqrt(det g)."""
    F = curvature(conn, np.asarray(x, dtype=float))
    return 0.5 * gauge_norm2_form(chart, x, F) * volume_density(chart, x)


def charge_density(conn: Connection, chart: MetricChart, x: np.ndarray) -> np.ndarray:
    """(||F_+||^2 - ||F_-||^2) sqrt(det g) / (8 pi^2)."""
    x = np.asarray(x, dtype=float)
    F = curvature(conn, x)
    Fp, Fm = curvature_split(chart, x, F)
    np2 = gauge_norm2_form(chart, x, Fp)
    nm2 = gauge_norm2_form(chart, x, Fm)
    return (np2 - nm2) * volume_density(chart, x) / (8.0 * np.pi**2)


@dataclass(frozen=True)
class BallRegion:
    """Ball |x - center| < radius with quadrature resolution knobs."""

    center: tuple = (0.0, 0.0, 0.0, 0.0)
    radius: float = 50.0
    n_radial: int = 160
    angular: tuple = (16, 16, 32)
    radial_split: float | None = None


def ym_action(conn: Connection, chart: MetricChart, region: BallRegion):
    """(action over the region, analytic tail bound outside it)."""
    val = ball_integral(
        lambda pts: ym_density(conn, chart, pts),
        np.asarray(region.center, dtype=float),
        region.radius,
        region.n_radial,
        region.angular,
        region.radial_split,
    )
    return val, conn.action_tail_bound(region.radius)


def topological_charge(conn: Connection, chart: MetricChart, region: BallRegion):
    """(charge over the region, tail bound)."""
    val = ball_integral(
        lambda pts: charge_density(conn, chart, pts),
        np.asarray(region.center, dtype=float),
        region.radius,
        region.n_radial,
        region.angular,
        region.radial_split,
    )
    tail = conn.action_tail_bound(region.radius)
    tail_k = tail / (2.0 * np.pi**2) if np.isfinite(tail) else tail
    return val, tail_k
