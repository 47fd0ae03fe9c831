"""so(4) structure: the two normal subgroups of SO(4) and rotation curves.

Identifying R^4 with the quaternions via (x1, x2, x3, x4) = x1 + x2 i + x3 j
+ x4 k, the subgroup S3_L (S3_R) acts by left (right) multiplication with unit
quaternions.  The basis {e1, e2, e3} of Lie(S3_L) is fixed as the unit (b,c,d)
coefficients of

        ( 0 -b -c -d )
        ( b  0 -d  c )
        ( c  d  0 -b )
        ( d -c  b  0 ),

i.e. e_i = left multiplication by i, j, k; coefficient extraction is
normalized so omega(e_i) has i-th entry 1.  Everything broadcasts over leading
batch axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def _ein(*operands):
    return np.einsum(*operands, optimize=True)
from scipy.linalg import expm

from .errors import ContractError, DomainError
from .geometry import assert_antisymmetric

__all__ = [
    "LEFT_BASIS",
    "RIGHT_BASIS",
    "left_matrix",
    "right_matrix",
    "project_left",
    "project_right",
    "omega_coefficients",
    "from_coefficients",
    "exp_so4",
    "polar_project",
    "bivector_of",
    "so4_of_bivector",
    "trace_inner",
    "RotationCurve",
    "constant_rotation_curve",
    "trig_rotation_curve",
    "rotation_curve_from_nodes",
]


def left_matrix(b, c, d) -> np.ndarray:
    """Element of Lie(S3_L) with coefficients (b, c, d); broadcasts."""
    b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (b, c, d)))
    z = np.zeros_like(b)
    rows = [
        [z, -b, -c, -d],
        [b, z, -d, c],
        [c, d, z, -b],
        [d, -c, b, z],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def right_matrix(b, c, d) -> np.ndarray:
    """Element of Lie(S3_R) with coefficients (b, c, d); broadcasts."""
    b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (b, c, d)))
    z = np.zeros_like(b)
    rows = [
        [z, -b, -c, -d],
        [b, z, d, -c],
        [c, -d, z, b],
        [d, c, -b, z],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


LEFT_BASIS = np.stack([left_matrix(1, 0, 0), left_matrix(0, 1, 0), left_matrix(0, 0, 1)])
RIGHT_BASIS = np.stack([right_matrix(1, 0, 0), right_matrix(0, 1, 0), right_matrix(0, 0, 1)])


def omega_coefficients(X: np.ndarray, check: bool = True):
    """(omega_plus, omega_minus): coefficients of X in the left/right bases.

    Reconstruction from_coefficients(omega_coefficients(X)) reproduces X
    exactly: the six entries parameterize so(4) completely.
    """
    X = np.asarray(X, dtype=float)
    if check:
        assert_antisymmetric(X, what="so(4) element")
    plus = np.stack(
        [
            0.5 * (X[..., 1, 0] + X[..., 3, 2]),
            0.5 * (X[..., 2, 0] - X[..., 3, 1]),
            0.5 * (X[..., 3, 0] + X[..., 2, 1]),
        ],
        axis=-1,
    )
    minus = np.stack(
        [
            0.5 * (X[..., 1, 0] - X[..., 3, 2]),
            0.5 * (X[..., 2, 0] + X[..., 3, 1]),
            0.5 * (X[..., 3, 0] - X[..., 2, 1]),
        ],
        axis=-1,
    )
    return plus, minus


def from_coefficients(plus, minus) -> np.ndarray:
    plus = np.asarray(plus, dtype=float)
    minus = np.asarray(minus, dtype=float)
    return left_matrix(plus[..., 0], plus[..., 1], plus[..., 2]) + right_matrix(
        minus[..., 0], minus[..., 1], minus[..., 2]
    )


def project_left(X: np.ndarray) -> np.ndarray:
    """Orthogonal projection of so(4) onto Lie(S3_L) (trace product)."""
    plus, _ = omega_coefficients(X)
    return left_matrix(plus[..., 0], plus[..., 1], plus[..., 2])


def project_right(X: np.ndarray) -> np.ndarray:
    """Orthogonal projection of so(4) onto Lie(S3_R)."""
    _, minus = omega_coefficients(X)
    return right_matrix(minus[..., 0], minus[..., 1], minus[..., 2])


def trace_inner(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Trace product -tr(XY) on so(4)."""
    return -_ein("...ij,...ji->...", X, Y)


def _quat_exp(v: np.ndarray) -> np.ndarray:
    """exp of an imaginary quaternion (..., 3) -> unit quaternion (..., 4)."""
    th = np.linalg.norm(v, axis=-1)
    small = th < 1e-12
    sinc = np.where(small, 1.0 - th**2 / 6.0, np.sin(np.where(small, 1.0, th)) / np.where(small, 1.0, th))
    out = np.empty(v.shape[:-1] + (4,))
    out[..., 0] = np.cos(th)
    out[..., 1:] = sinc[..., None] * v
    return out


def _left_group(q: np.ndarray) -> np.ndarray:
    """Left multiplication by the quaternion q = (a, b, c, d) as a 4x4 matrix."""
    a, b, c, d = (q[..., i] for i in range(4))
    rows = [
        [a, -b, -c, -d],
        [b, a, -d, c],
        [c, d, a, -b],
        [d, -c, b, a],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def _right_group(q: np.ndarray) -> np.ndarray:
    """Right multiplication by q as a 4x4 matrix."""
    a, b, c, d = (q[..., i] for i in range(4))
    rows = [
        [a, -b, -c, -d],
        [b, a, d, -c],
        [c, -d, a, b],
        [d, c, -b, a],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def exp_so4(X: np.ndarray) -> np.ndarray:
    """Matrix exponential so(4) -> SO(4), in closed form.

    The left and right parts commute, and each exponentiates to a quaternion
    multiplication: exp(X) = L(exp(x_L)) R(exp(x_R)).
    """
    plus, minus = omega_coefficients(X)
    return _left_group(_quat_exp(plus)) @ _right_group(_quat_exp(minus))


def polar_project(M: np.ndarray) -> np.ndarray:
    """Nearest special-orthogonal matrix (polar factor, det +1 enforced)."""
    U, _, Vt = np.linalg.svd(M)
    R = U @ Vt
    det = np.linalg.det(R)
    if np.any(det < 0):
        U = U.copy()
        U[..., :, -1] *= np.where(det < 0, -1.0, 1.0)[..., None]
        R = U @ Vt
    return R


def bivector_of(X: np.ndarray, basis_plus: np.ndarray | None = None, basis_minus: np.ndarray | None = None) -> np.ndarray:
    """so(4) -> bivector under e_i <-> v_i^+, right basis <-> v_i^-.

    With the standard frame bases, the map sends the left element with
    coefficients (b, c, d) to b v1+ + c v2+ + d v3+ and extends linearly.  It
    is a bijection, isometric up to the fixed factor 1/2 between the trace
    norm and the bivector norm (||e_i||_tr = 2, ||v_i|| = 1).
    """
    from .geometry import selfdual_basis

    if basis_plus is None or basis_minus is None:
        basis_plus, basis_minus = selfdual_basis()
    plus, minus = omega_coefficients(X)
    return _ein("...i,...iab->...ab", plus, basis_plus) + _ein(
        "...i,...iab->...ab", minus, basis_minus
    )


def so4_of_bivector(B: np.ndarray, basis_plus: np.ndarray | None = None, basis_minus: np.ndarray | None = None) -> np.ndarray:
    """Inverse of bivector_of: read bivector coefficients, rebuild the matrix."""
    from .geometry import form_inner, selfdual_basis

    if basis_plus is None or basis_minus is None:
        basis_plus, basis_minus = selfdual_basis()
    plus = np.stack([form_inner(B, basis_plus[..., i, :, :]) for i in range(3)], axis=-1)
    minus = np.stack([form_inner(B, basis_minus[..., i, :, :]) for i in range(3)], axis=-1)
    return from_coefficients(plus, minus)


@dataclass
class RotationCurve:
    """W in C^1([0,1], SO(4)) specified by its generator path L_W(t) = W^-1 Wdot.

    ``generator`` maps a time array (...,) to so(4) elements (..., 4, 4).
    W is realized on a requested time grid by integrating Wdot = W L_W
    (closed-form exponential when the generator is constant, Lie-midpoint
    steps plus polar projection otherwise) and cached per grid.

    ``side``: 'left' constrains L_W to Lie(S3_L), 'right' to Lie(S3_R),
    'general' is unconstrained.  The coefficient functions omega and alpha are
    read off the spatial (right) logarithmic derivative Wdot W^-1 = Ad_W L_W,
    which is what the modified trace pairs with kernels; for constant
    generators both derivatives coincide.
    """

    generator: Callable
    side: str = "general"
    label: str = "W"
    constant: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.side not in ("left", "right", "general"):
            raise DomainError("side must be 'left', 'right' or 'general'")
        ts = np.linspace(0.0, 1.0, 17)
        L = self.log_derivative(ts)
        assert_antisymmetric(L, tol=1e-10, what="rotation generator")
        if self.side == "left" and np.abs(project_right(L)).max() > 1e-10:
            raise ContractError("side='left' but generator leaves Lie(S3_L)")
        if self.side == "right" and np.abs(project_left(L)).max() > 1e-10:
            raise ContractError("side='right' but generator leaves Lie(S3_R)")

    def log_derivative(self, t) -> np.ndarray:
        """L_W(t) = W^-1(t) Wdot(t); equals the stored generator."""
        t = np.asarray(t, dtype=float)
        if np.any((t < -1e-12) | (t > 1 + 1e-12)):
            raise DomainError("rotation curve is defined on [0, 1]")
        return self.generator(t)

    def realize(self, ts: np.ndarray) -> np.ndarray:
        """W at the given sorted times in [0, 1], W(0) = I."""
        key = (ts.shape[0], float(ts[0]), float(ts[-1]), ts.tobytes())
        if key in self._cache:
            return self._cache[key]
        if self.constant is not None:
            Ws = np.stack([expm(t * self.constant) for t in ts])
        else:
            Ws = np.empty((ts.shape[0], 4, 4))
            W = np.eye(4)
            Ws[0] = W
            for k in range(ts.shape[0] - 1):
                h = ts[k + 1] - ts[k]
                # Lie midpoint step: W <- W exp(h L(t + h/2)), then re-polarize.
                W = W @ exp_so4(h * self.generator(ts[k] + 0.5 * h))
                W = polar_project(W)
                Ws[k + 1] = W
        self._cache[key] = Ws
        return Ws

    def right_log_derivative(self, ts: np.ndarray) -> np.ndarray:
        """Wdot W^-1 = W L_W W^T on the given grid."""
        W = self.realize(ts)
        L = self.log_derivative(ts)
        return _ein("tij,tjk,tlk->til", W, L, W)

    def omega(self, ts: np.ndarray):
        """(omega_plus, omega_minus)(t) of Wdot W^-1 on the grid."""
        return omega_coefficients(self.right_log_derivative(ts), check=False)

    def alpha(self, grid) -> tuple:
        """(alpha_plus, alpha_minus): composite-Simpson integrals of omega."""
        plus, minus = self.omega(grid.nodes)
        return grid.integrate(plus), grid.integrate(minus)


def constant_rotation_curve(plus=(0.0, 0.0, 0.0), minus=(0.0, 0.0, 0.0), label: str | None = None) -> RotationCurve:
    """W(t) = exp(t X) for the constant generator with the given coefficients."""
    X = from_coefficients(np.asarray(plus, dtype=float), np.asarray(minus, dtype=float))
    side = "general"
    if np.allclose(minus, 0.0):
        side = "left"
    elif np.allclose(plus, 0.0):
        side = "right"
    if label is None:
        label = f"const{tuple(np.round(plus, 3))}|{tuple(np.round(minus, 3))}"

    def gen(t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(X, t.shape + (4, 4)).copy()

    return RotationCurve(gen, side=side, label=label, constant=X)


def trig_rotation_curve(terms, label: str | None = None) -> RotationCurve:
    """Generator sum_k [a_k cos(2 pi f_k t) + b_k sin(2 pi f_k t)] X_k.

    ``terms``: sequence of (plus, minus, freq, a, b) with plus/minus the
    coefficient triples of X_k.
    """
    mats = [from_coefficients(np.asarray(p, float), np.asarray(m, float)) for p, m, *_ in terms]
    meta = [(float(f), float(a), float(b)) for _, _, f, a, b in terms]
    side = "general"
    if all(np.abs(project_right(M)).max() < 1e-14 for M in mats):
        side = "left"
    elif all(np.abs(project_left(M)).max() < 1e-14 for M in mats):
        side = "right"

    def gen(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (4, 4))
        for M, (f, a, b) in zip(mats, meta):
            c = a * np.cos(2 * np.pi * f * t) + b * np.sin(2 * np.pi * f * t)
            out += c[..., None, None] * M
        return out

    return RotationCurve(gen, side=side, label=label or f"trig[{len(mats)}]")


def rotation_curve_from_nodes(ts_nodes, mats, side: str = "general", label: str = "W_nodes") -> RotationCurve:
    """Generator given as so(4) values on a node grid, linearly interpolated."""
    ts_nodes = np.asarray(ts_nodes, dtype=float)
    mats = np.asarray(mats, dtype=float)
    if ts_nodes.ndim != 1 or mats.shape != (ts_nodes.size, 4, 4):
        raise DomainError("need matching 1d node times and (n, 4, 4) matrices")

    def gen(t):
        t = np.asarray(t, dtype=float)
        flat = np.clip(t.reshape(-1), ts_nodes[0], ts_nodes[-1])
        idx = np.clip(np.searchsorted(ts_nodes, flat) - 1, 0, ts_nodes.size - 2)
        lam = (flat - ts_nodes[idx]) / (ts_nodes[idx + 1] - ts_nodes[idx])
        vals = (1 - lam)[:, None, None] * mats[idx] + lam[:, None, None] * mats[idx + 1]
        return vals.reshape(t.shape + (4, 4))

    return RotationCurve(gen, side=side, label=label)
