"""Holonomy of the self-dual 2-form bundle: estimation and classification.

Loop transports of the Levi-Civita connection act on the transported bivector
bases; restricted to the self-dual triple {v_i^+} each contractible loop gives
an SO(3) matrix.  The span of the matrix logarithms over a seeded loop family
classifies the restricted holonomy group as trivial, SO(2), or SO(3)
(dimension 2 is impossible for a connected subgroup and is reported as a
classification failure).  An SO(2)-generator mode injects synthetic rotations
about a fixed axis through the same pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .algebra import RotationCurve
from .curves import is_loop, random_fourier_loops
from .errors import ClassificationError, ContractError
from .geometry import MetricChart, form_inner, metric_eval, selfdual_basis
from .quadrature import make_grid
from .transport import TransportResult, levi_civita_transport, transport_bivectors

__all__ = [
    "HolonomyClassification",
    "loop_holonomy_2forms",
    "classify_from_rotations",
    "classify_holonomy",
    "synthetic_so2_rotations",
    "w_plus",
    "check_W_conditions",
    "WConditionReport",
    "orbit_span_report",
]


def _ein(*operands):
    return np.einsum(*operands, optimize=True)


@dataclass
class HolonomyClassification:
    """Result of thresholded rank estimation on loop-holonomy logarithms."""

    algebra_dimension: int
    class_name: str  # 'trivial' | 'so2' | 'so3'
    singular_values: np.ndarray
    sample_count: int
    fixed_axis: np.ndarray | None = None  # unit coefficients in the v+ basis (so2 only)
    algebra_basis: np.ndarray | None = None  # (dim, 3) rotation-vector basis
    diagnostics: dict = field(default_factory=dict)

    @property
    def fixed_bivector(self):
        """Chart bivector fixed by the holonomy (so2 class only)."""
        if self.fixed_axis is None:
            return None
        plus, _ = selfdual_basis()
        return _ein("i,iab->ab", self.fixed_axis, plus)


def loop_holonomy_2forms(chart: MetricChart, loop, n: int = 1024, tol: float = 1e-8):
    """Matrix of the loop holonomy on the self-dual bivector triple.

    Returns (R, diagnostics): R is 3x3 special orthogonal; diagnostics carry
    the full 6x6 action on (v+, v-) and the cross-block norm, which vanishes
    because the star commutes with the transport.
    """
    if not is_loop(loop):
        raise ContractError("holonomy needs a closed loop (endpoint = basepoint)")
    tr = levi_civita_transport(chart, loop, n=n)
    plus0, minus0 = transport_bivectors(tr)
    basis0 = np.concatenate([plus0[0], minus0[0]])  # bivectors at the basepoint
    basis1 = np.concatenate([plus0[-1], minus0[-1]])  # their transports, same point
    g0 = metric_eval(chart, tr.positions[0])
    # <v_a(0), K v_b(0)>_g with K the induced map on 2-vectors
    full = np.empty((6, 6))
    for a in range(6):
        for b in range(6):
            lowered = g0 @ basis1[b] @ g0.T
            full[a, b] = 0.5 * np.tensordot(basis0[a], lowered, axes=2)
    R = full[:3, :3]
    cross = max(np.abs(full[:3, 3:]).max(), np.abs(full[3:, :3]).max())
    defect = np.abs(R @ R.T - np.eye(3)).max()
    det = float(np.linalg.det(R))
    if defect > tol or abs(det - 1.0) > tol:
        raise ContractError(
            f"holonomy matrix not special orthogonal (defect {defect:.2e}, det {det:.6f})"
        )
    return R, {"cross_block": float(cross), "orthogonality_defect": float(defect), "full": full}


def synthetic_so2_rotations(seed: int, count: int = 50, axis=(1.0, 0.0, 0.0)) -> np.ndarray:
    """Rotations about a fixed self-dual axis with seeded random angles."""
    rng = np.random.default_rng(seed)
    ax = np.asarray(axis, dtype=float)
    ax = ax / np.linalg.norm(ax)
    angles = rng.uniform(-2.5, 2.5, size=count)
    return Rotation.from_rotvec(angles[:, None] * ax).as_matrix()


def classify_from_rotations(
    Rs: np.ndarray,
    rel_threshold: float = 1e-6,
    noise_floor: float = 1e-9,
) -> HolonomyClassification:
    """Rank of the span of rotation logarithms, thresholded singular values."""
    Rs = np.asarray(Rs, dtype=float)
    logs = Rotation.from_matrix(Rs).as_rotvec()
    _, sv, vt = np.linalg.svd(logs, full_matrices=False)
    top = sv[0] if sv.size else 0.0
    if top < noise_floor:
        rank = 0
    else:
        rank = int(np.sum(sv > rel_threshold * top))
    if rank == 2:
        raise ClassificationError(
            "holonomy algebra of dimension 2 is impossible for a connected "
            f"subgroup of SO(3); singular values {sv.tolist()}"
        )
    names = {0: "trivial", 1: "so2", 3: "so3"}
    fixed = None
    basis = None
    if rank >= 1:
        basis = vt[:rank]
    if rank == 1:
        fixed = vt[0] / np.linalg.norm(vt[0])
        if fixed[np.argmax(np.abs(fixed))] < 0:
            fixed = -fixed
    return HolonomyClassification(
        algebra_dimension=rank,
        class_name=names[rank],
        singular_values=sv,
        sample_count=int(Rs.shape[0]),
        fixed_axis=fixed,
        algebra_basis=basis,
    )


def classify_holonomy(
    chart: MetricChart,
    loops=None,
    n: int = 1024,
    seed: int = 7,
    count: int = 50,
    scale: float = 0.6,
    rel_threshold: float = 1e-6,
) -> HolonomyClassification:
    """Classify Hol^0 on the self-dual bundle from a seeded loop family."""
    if loops is None:
        loops = random_fourier_loops(seed, count, scale=scale)
    Rs = []
    diags = []
    for loop in loops:
        R, d = loop_holonomy_2forms(chart, loop, n=n)
        Rs.append(R)
        diags.append({"loop": getattr(loop, "label", "loop"), **{k: v for k, v in d.items() if k != "full"}})
    cls = classify_from_rotations(np.asarray(Rs), rel_threshold=rel_threshold)
    cls.diagnostics["per_loop"] = diags
    cls.diagnostics["chart"] = chart.name
    return cls


def w_plus(W: RotationCurve, tr: TransportResult) -> np.ndarray:
    """w_W^+(gamma, 1) = sum_i alpha_i^+ v_i^+(gamma, 1) as a chart bivector."""
    plus, _ = transport_bivectors(tr)
    alpha_p, _ = W.alpha(make_grid(512))
    return _ein("i,iab->ab", alpha_p, plus[-1])


@dataclass
class WConditionReport:
    passed: bool
    class_name: str
    alpha_plus: np.ndarray
    projection_v1: float
    projection_v2: float
    note: str


def check_W_conditions(W: RotationCurve, cls: HolonomyClassification, tol: float = 1e-8) -> WConditionReport:
    """Sufficient conditions on a left rotation curve for the equivalence.

    so3 class: the integrated generator must not vanish (|alpha+| > tol).
    so2 class: both its projection on the fixed axis and on the orthogonal
    plane must be nonzero.  trivial class: always fails (a conformal change
    of metric is needed to create holonomy first).
    """
    if W.side != "left":
        raise ContractError("the equivalence conditions are stated for side='left' curves")
    alpha_p, _ = W.alpha(make_grid(512))
    norm = float(np.linalg.norm(alpha_p))
    if cls.class_name == "so3":
        return WConditionReport(norm > tol, cls.class_name, alpha_p, norm, norm, "need |alpha+| > 0")
    if cls.class_name == "so2":
        ax = cls.fixed_axis
        p1 = float(abs(alpha_p @ ax))
        p2 = float(np.linalg.norm(alpha_p - (alpha_p @ ax) * ax))
        return WConditionReport(
            p1 > tol and p2 > tol,
            cls.class_name,
            alpha_p,
            p1,
            p2,
            "need projections on the fixed axis and its orthogonal plane both nonzero",
        )
    return WConditionReport(
        False,
        cls.class_name,
        alpha_p,
        0.0,
        0.0,
        "trivial holonomy: no W works; conformally change the metric first",
    )


def orbit_span_report(
    cls: HolonomyClassification,
    w_coeffs: np.ndarray,
    samples: int = 64,
    seed: int = 0,
    tol: float = 1e-8,
) -> int:
    """Dimension of span(Orb(w)) under the classified group, by sampling.

    ``w_coeffs``: coefficients of the bivector in the {v_i^+} basis.
    """
    w = np.asarray(w_coeffs, dtype=float)
    rng = np.random.default_rng(seed)
    if np.linalg.norm(w) < tol:
        return 0
    if cls.class_name == "trivial":
        return 1
    if cls.class_name == "so2":
        ax = cls.fixed_axis
        angles = rng.uniform(0.0, 2.0 * np.pi, size=samples)
        mats = Rotation.from_rotvec(angles[:, None] * ax).as_matrix()
    else:
        rotvecs = rng.standard_normal((samples, 3))
        mats = Rotation.from_rotvec(rotvecs).as_matrix()
    orbit = mats @ w
    sv = np.linalg.svd(orbit, compute_uv=False)
    return int(np.sum(sv > tol * max(sv[0], 1.0)))
