"""Chart-based Riemannian 4-geometry.

A ``MetricChart`` is a single coordinate chart with a smooth metric g(x),
analytic Christoffel symbols for the presets, the Hodge star on 2-forms, and
g-orthonormal frames.  Compact manifolds are represented at desk scale through
one chart: the round 4-sphere via stereographic projection (conformal factor
2/(1+|x|^2), radius 1) and S^1 x S^3 via an angle times a stereographic S^3
chart on a finite window of the universal cover.

Index conventions: points are arrays (..., 4); metrics (..., 4, 4);
Christoffels Gamma[..., k, l, n] = Gamma^k_{l n}; 2-forms are antisymmetric
(..., 4, 4) arrays of covariant components; bivectors the contravariant
analogue.  All evaluators broadcast over leading point axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable

import numpy as np


def _ein(*operands):
    return np.einsum(*operands, optimize=True)

from .errors import ContractError, DomainError, NumericError

__all__ = [
    "MetricChart",
    "ScalarField",
    "flat_chart",
    "conformally_flat_chart",
    "round_s4_chart",
    "s1xs3_chart",
    "metric_eval",
    "christoffel",
    "christoffel_fd",
    "hodge_star",
    "selfdual_basis",
    "volume_density",
    "orthonormal_frame",
    "laplace_beltrami",
    "scalar_field",
    "wedge",
    "form_inner",
    "assert_antisymmetric",
]

_EPS4 = np.zeros((4, 4, 4, 4))
for _p in permutations(range(4)):
    _s = 1
    for _i in range(4):
        for _j in range(_i + 1, 4):
            if _p[_i] > _p[_j]:
                _s = -_s
    _EPS4[_p] = _s


def assert_antisymmetric(B: np.ndarray, tol: float = 1e-12, what: str = "2-form"):
    if B.shape[-2:] != (4, 4):
        raise ContractError(f"{what} must have trailing shape (4, 4)")
    defect = np.abs(B + np.swapaxes(B, -1, -2)).max()
    if defect > tol:
        raise ContractError(f"{what} not antisymmetric (defect {defect:.2e})")


def wedge(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """u ^ v as an antisymmetric matrix: (u^v)_{ab} = u_a v_b - u_b v_a."""
    return u[..., :, None] * v[..., None, :] - v[..., :, None] * u[..., None, :]


def form_inner(B: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Euclidean 2-form inner product <B, C> = (1/2) B_{ab} C_{ab}."""
    return 0.5 * _ein("...ab,...ab->...", B, C)


@dataclass(frozen=True)
class ScalarField:
    """Smooth scalar field with analytic gradient and Hessian."""

    name: str
    value: Callable
    grad: Callable
    hess: Callable
    params: dict = field(default_factory=dict)


def scalar_field(name: str, **params) -> ScalarField:
    """Built-in scalar-field families (used for conformal factors and test
    functionals): zero, linear(a), norm2, product12, gaussian(amp, width, center),
    quadratic(coeffs)."""
    if name == "zero":
        return ScalarField(
            name,
            lambda x: np.zeros(x.shape[:-1]),
            lambda x: np.zeros(x.shape),
            lambda x: np.zeros(x.shape + (4,)),
        )
    if name == "linear":
        a = np.asarray(params.get("a", (0.1, 0.0, 0.0, 0.0)), dtype=float)
        return ScalarField(
            name,
            lambda x: x @ a,
            lambda x: np.broadcast_to(a, x.shape).copy(),
            lambda x: np.zeros(x.shape + (4,)),
            params={"a": a.tolist()},
        )
    if name == "norm2":
        return ScalarField(
            name,
            lambda x: _ein("...m,...m->...", x, x),
            lambda x: 2.0 * x,
            lambda x: np.broadcast_to(2.0 * np.eye(4), x.shape + (4,)).copy(),
        )
    if name == "product12":
        def _hess(x):
            H = np.zeros(x.shape + (4,))
            H[..., 0, 1] = 1.0
            H[..., 1, 0] = 1.0
            return H

        return ScalarField(
            name,
            lambda x: x[..., 0] * x[..., 1],
            lambda x: np.stack(
                [x[..., 1], x[..., 0], np.zeros(x.shape[:-1]), np.zeros(x.shape[:-1])],
                axis=-1,
            ),
            _hess,
        )
    if name == "gaussian":
        amp = float(params.get("amp", 1.0))
        w = float(params.get("width", 1.0))
        c = np.asarray(params.get("center", (0.0, 0.0, 0.0, 0.0)), dtype=float)

        def _val(x):
            d = x - c
            return amp * np.exp(-_ein("...m,...m->...", d, d) / w**2)

        def _grad(x):
            d = x - c
            return _val(x)[..., None] * (-2.0 / w**2) * d

        def _hess(x):
            d = x - c
            v = _val(x)[..., None, None]
            outer = d[..., :, None] * d[..., None, :]
            return v * ((4.0 / w**4) * outer - (2.0 / w**2) * np.eye(4))

        return ScalarField(name, _val, _grad, _hess, params={"amp": amp, "width": w, "center": c.tolist()})
    if name == "quadratic":
        Q = np.asarray(params.get("coeffs", np.diag((0.1, 0.05, -0.02, 0.08))), dtype=float)
        Q = 0.5 * (Q + Q.T)
        return ScalarField(
            name,
            lambda x: _ein("...m,mn,...n->...", x, Q, x),
            lambda x: 2.0 * _ein("mn,...n->...m", Q, x),
            lambda x: np.broadcast_to(2.0 * Q, x.shape + (4,)).copy(),
            params={"coeffs": Q.tolist()},
        )
    raise DomainError(f"unknown scalar field family '{name}'")


@dataclass(frozen=True)
class MetricChart:
    """A coordinate chart with metric, analytic Christoffels, and orientation.

    ``orientation`` is +1 for the right-handed coordinate order (default);
    flipping it swaps the self-dual and anti-self-dual eigenspaces of the star.
    """

    name: str
    metric_fn: Callable
    christoffel_fn: Callable
    domain_fn: Callable
    orientation: int = 1
    params: dict = field(default_factory=dict)

    def check_domain(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 4:
            raise DomainError("points must have trailing dimension 4")
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite point")
        bad = ~self.domain_fn(x)
        if np.any(bad):
            raise DomainError(f"{int(np.sum(bad))} point(s) outside chart domain of '{self.name}'")

    def flipped(self) -> "MetricChart":
        return MetricChart(
            self.name,
            self.metric_fn,
            self.christoffel_fn,
            self.domain_fn,
            -self.orientation,
            dict(self.params),
        )


def _conformal_metric(phi: ScalarField):
    def _g(x):
        f = np.exp(2.0 * phi.value(x))
        return f[..., None, None] * np.eye(4)

    def _gamma(x):
        # Gamma^k_{ln} = d_n phi delta^k_l + d_l phi delta^k_n - d_k phi delta_{ln}
        dp = phi.grad(x)
        I = np.eye(4)
        return (
            _ein("...n,kl->...kln", dp, I)
            + _ein("...l,kn->...kln", dp, I)
            - _ein("...k,ln->...kln", dp, I)
        )

    return _g, _gamma


def flat_chart() -> MetricChart:
    g, gamma = _conformal_metric(scalar_field("zero"))
    return MetricChart("flat", g, gamma, lambda x: np.ones(x.shape[:-1], dtype=bool))


def conformally_flat_chart(phi: ScalarField) -> MetricChart:
    """g_{mn}(x) = exp(2 phi(x)) delta_{mn} with a named built-in phi."""
    g, gamma = _conformal_metric(phi)
    return MetricChart(
        "conformally_flat",
        g,
        gamma,
        lambda x: np.ones(x.shape[:-1], dtype=bool),
        params={"phi": phi.name, **phi.params},
    )


def round_s4_chart() -> MetricChart:
    """Unit round S^4 in the stereographic chart: factor 2/(1+|x|^2)."""

    def _phi_val(x):
        return np.log(2.0) - np.log1p(_ein("...m,...m->...", x, x))

    def _phi_grad(x):
        s = _ein("...m,...m->...", x, x)
        return (-2.0 / (1.0 + s))[..., None] * x

    phi = ScalarField("stereo_s4", _phi_val, _phi_grad, None)
    g, gamma = _conformal_metric(phi)
    return MetricChart(
        "round_s4", g, gamma, lambda x: np.ones(x.shape[:-1], dtype=bool), params={"radius": 1.0}
    )


def s1xs3_chart(circle_radius: float = 1.0, window: float = 2.0 * np.pi) -> MetricChart:
    """S^1 x S^3 (unit S^3, stereographic; S^1 of the given radius).

    Coordinates (theta, y1, y2, y3); theta ranges over a finite window
    [-window, window] of the universal cover, so only contractible loops are
    representable.  Metric: diag(r1^2, mu^2, mu^2, mu^2), mu = 2/(1+|y|^2).
    """
    r1 = float(circle_radius)
    if r1 <= 0:
        raise DomainError("circle radius must be positive")

    def _g(x):
        y = x[..., 1:]
        mu = 2.0 / (1.0 + _ein("...m,...m->...", y, y))
        g = np.zeros(x.shape[:-1] + (4, 4))
        g[..., 0, 0] = r1**2
        for i in range(1, 4):
            g[..., i, i] = mu**2
        return g

    def _gamma(x):
        # 3d conformal block: psi = log mu on the y coordinates, theta flat.
        y = x[..., 1:]
        s = _ein("...m,...m->...", y, y)
        dpsi = (-2.0 / (1.0 + s))[..., None] * y  # d psi / d y_i
        G = np.zeros(x.shape[:-1] + (4, 4, 4))
        I3 = np.eye(3)
        G3 = (
            _ein("...n,kl->...kln", dpsi, I3)
            + _ein("...l,kn->...kln", dpsi, I3)
            - _ein("...k,ln->...kln", dpsi, I3)
        )
        G[..., 1:, 1:, 1:] = G3
        return G

    def _domain(x):
        return np.abs(x[..., 0]) <= window

    return MetricChart(
        "s1xs3", _g, _gamma, _domain, params={"circle_radius": r1, "window": window}
    )


def metric_eval(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    """g_{mn}(x); symmetric positive definite on the chart domain."""
    chart.check_domain(x)
    g = chart.metric_fn(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(g)):
        raise NumericError("metric evaluation produced non-finite entries")
    return g


def christoffel(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    """Gamma^k_{ln}(x), analytic for the presets."""
    chart.check_domain(x)
    return chart.christoffel_fn(np.asarray(x, dtype=float))


def christoffel_fd(chart: MetricChart, x: np.ndarray, h: float = 1e-4, order: int = 2) -> np.ndarray:
    """Christoffels from central differences of the metric (test oracle).

    order 2 is the spec'd oracle; order 4 matches the production fallback
    accuracy for non-preset metrics.
    """
    x = np.asarray(x, dtype=float)
    dg = np.zeros(x.shape[:-1] + (4, 4, 4))  # dg[..., l, m, n] = d_l g_{mn}
    for lam in range(4):
        e = np.zeros(4)
        e[lam] = h
        if order == 2:
            dg[..., lam, :, :] = (metric_eval(chart, x + e) - metric_eval(chart, x - e)) / (2 * h)
        else:
            dg[..., lam, :, :] = (
                -metric_eval(chart, x + 2 * e)
                + 8 * metric_eval(chart, x + e)
                - 8 * metric_eval(chart, x - e)
                + metric_eval(chart, x - 2 * e)
            ) / (12 * h)
    g = metric_eval(chart, x)
    ginv = np.linalg.inv(g)
    half = 0.5 * (
        _ein("...lsn->...sln", dg)
        + _ein("...nsl->...sln", dg)
        - _ein("...sln->...sln", dg)
    )
    return _ein("...ks,...sln->...kln", ginv, half)


def volume_density(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    """sqrt(det g(x)) > 0."""
    det = np.linalg.det(metric_eval(chart, x))
    if np.any(det <= 0):
        raise NumericError("degenerate metric: det g <= 0")
    return np.sqrt(det)


def hodge_star(chart: MetricChart, x: np.ndarray, B: np.ndarray, kind: str = "form") -> np.ndarray:
    """Hodge star on 2-forms (covariant, kind='form') or bivectors
    (contravariant, kind='bivector') at x.  Involutive; orientation-sensitive.

    ``B`` may carry extra trailing value axes after the two form axes, e.g.
    gauge-algebra-valued curvature of shape (..., 4, 4, N, N): the star acts on
    the leading pair of form axes.
    """
    B = np.asarray(B, dtype=float)
    extra = B.ndim - (np.asarray(x, dtype=float).ndim - 1) - 2
    if extra < 0 or B.shape[: B.ndim - extra][-2:] != (4, 4):
        raise ContractError("2-form argument has incompatible shape")
    g = metric_eval(chart, x)
    sg = np.sqrt(np.linalg.det(g))
    sub = "" if extra == 0 else "ABCD"[:extra]
    if kind == "form":
        ginv = np.linalg.inv(g)
        out = 0.5 * _ein(
            f"mnrs,...ra,...sb,...ab{sub}->...mn{sub}", _EPS4, ginv, ginv, B
        )
        out *= sg[..., None, None] if extra == 0 else sg.reshape(sg.shape + (1,) * (2 + extra))
    elif kind == "bivector":
        out = 0.5 * _ein(
            f"mnrs,...ra,...sb,...ab{sub}->...mn{sub}", _EPS4, g, g, B
        )
        inv = 1.0 / sg
        out *= inv[..., None, None] if extra == 0 else inv.reshape(inv.shape + (1,) * (2 + extra))
    else:
        raise DomainError("kind must be 'form' or 'bivector'")
    return chart.orientation * out


def orthonormal_frame(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    """Right-handed g-orthonormal frame at x: columns E[..., :, mu] = e_mu.

    Uses the symmetric inverse square root g^{-1/2}, which is smooth in x and
    orientation-preserving.
    """
    g = metric_eval(chart, x)
    vals, vecs = np.linalg.eigh(g)
    if np.any(vals <= 0):
        raise NumericError("metric not positive definite")
    inv_sqrt = _ein(
        "...am,...m,...bm->...ab", vecs, 1.0 / np.sqrt(vals), vecs
    )
    return inv_sqrt


def selfdual_basis(frame: np.ndarray | None = None, metric: np.ndarray | None = None, tol: float = 1e-8):
    """Self-dual and anti-self-dual bivector bases from an orthonormal frame.

    Returns (plus, minus), each (3, 4, 4) (or broadcast over leading axes),
    with v1+- = (f1^f2 +- f3^f4)/sqrt2, v2+- = (f1^f3 -+ f2^f4)/sqrt2,
    v3+- = (f1^f4 +- f2^f3)/sqrt2.  The frame must be orthonormal for the
    given metric (identity if omitted) and right-handed.
    """
    E = np.eye(4) if frame is None else np.asarray(frame, dtype=float)
    g = np.eye(4) if metric is None else np.asarray(metric, dtype=float)
    gram = _ein("...am,...ab,...bn->...mn", E, g, E)
    if np.abs(gram - np.eye(4)).max() > tol:
        raise ContractError("frame is not orthonormal for the given metric")
    if np.any(np.linalg.det(E) <= 0):
        raise ContractError("frame is not right-handed")
    f = [E[..., :, m] for m in range(4)]
    rt = 1.0 / np.sqrt(2.0)
    plus = np.stack(
        [
            rt * (wedge(f[0], f[1]) + wedge(f[2], f[3])),
            rt * (wedge(f[0], f[2]) - wedge(f[1], f[3])),
            rt * (wedge(f[0], f[3]) + wedge(f[1], f[2])),
        ],
        axis=-3,
    )
    minus = np.stack(
        [
            rt * (wedge(f[0], f[1]) - wedge(f[2], f[3])),
            rt * (wedge(f[0], f[2]) + wedge(f[1], f[3])),
            rt * (wedge(f[0], f[3]) - wedge(f[1], f[2])),
        ],
        axis=-3,
    )
    return plus, minus


def laplace_beltrami(chart: MetricChart, f: ScalarField, x: np.ndarray) -> np.ndarray:
    """Laplace-Beltrami of f at x: g^{mn} (d_m d_n f - Gamma^l_{mn} d_l f)."""
    x = np.asarray(x, dtype=float)
    g = metric_eval(chart, x)
    ginv = np.linalg.inv(g)
    H = f.hess(x)
    grad = f.grad(x)
    G = christoffel(chart, x)
    cov_hess = H - _ein("...lmn,...l->...mn", G, grad)
    return _ein("...mn,...mn->...", ginv, cov_hess)
