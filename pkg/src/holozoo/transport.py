"""Parallel transport and geodesics along curves in a chart.

Transport solves the matrix ODE M' = -(Gamma . c') M with classical
4th-order steps; the step count doubles until the result changes by less
than ``TRANSPORT_TOL`` in the max-norm (that change is the error estimate).
Whole families of curves with a common segment structure integrate in one
batch: all stage-point Christoffels for a segment are evaluated in a single
vectorised call, which is where the speed comes from.

Deck-closed loops (paths that close only up to a chart identification) are
composed with the inverse differential of the identification so the result
maps the start tangent space to itself.

Geodesics integrate x'' + Gamma(x')(x') = 0 with adaptive step doubling.
When a trajectory leaves the domain box the integrator tries to fold it
back through the declared identifications (velocity mapped by the linear
part), which realises motion on quotient charts such as tori.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import (BLOWUP_SPEED, BLOWUP_STEP_FLOOR, TRANSPORT_STEP_FLOOR,
                        TRANSPORT_TOL)
from .expr import Expr, ExprDomainError, evaluate_jets
from .geometry import ChartMetric, DomainBoxError, Identification, TangentVec

__all__ = [
    "CurveSpec", "TransportResult", "GeodesicResult",
    "coordinate_rectangle_loop", "parallel_transport", "integrate_geodesic",
    "transport_polylines",
]


@dataclass
class CurveSpec:
    """A curve for transport: polyline, rectangle, parametric or deck-closed."""

    kind: str                                  # polyline | rectangle | parametric | deck
    points: Optional[np.ndarray] = None        # (K+1, n) vertices
    exprs: Optional[list] = None               # parametric: n Expr in the parameter "s"
    breakpoints: Optional[np.ndarray] = None   # parametric subinterval boundaries
    path: Optional["CurveSpec"] = None         # deck: underlying open path
    identification: Optional[Identification] = None
    label: str = ""

    @staticmethod
    def polyline(points, label="") -> "CurveSpec":
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise ValueError("polyline needs at least two vertices")
        return CurveSpec("polyline", points=pts, label=label)

    @staticmethod
    def parametric(exprs, breakpoints, label="") -> "CurveSpec":
        bp = np.asarray(breakpoints, dtype=float)
        if bp.ndim != 1 or len(bp) < 2 or np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        return CurveSpec("parametric", exprs=list(exprs), breakpoints=bp, label=label)

    @staticmethod
    def deck_closed(path: "CurveSpec", identification: Identification,
                    label="") -> "CurveSpec":
        return CurveSpec("deck", path=path, identification=identification, label=label)


@dataclass
class TransportResult:
    """Coordinate-basis transport matrix with its step-halving error estimate."""

    matrix: np.ndarray
    err_est: float
    loop: Optional[CurveSpec]
    start: np.ndarray
    end: np.ndarray
    converged: bool = True
    steps_per_segment: int = 0

    def metricity_defect(self, metric: ChartMetric) -> float:
        g0 = metric.metric_at(self.start)
        g1 = metric.metric_at(self.end)
        return float(np.max(np.abs(self.matrix.T @ g1 @ self.matrix - g0)))


def coordinate_rectangle_loop(i: int, j: int, p, a: float, b: float,
                              metric: Optional[ChartMetric] = None) -> CurveSpec:
    """Closed rectangle p -> p+a e_i -> p+a e_i+b e_j -> p+b e_j -> p."""
    p = np.asarray(p, dtype=float)
    if i == j:
        raise ValueError("rectangle axes must differ")
    ei = np.zeros_like(p)
    ej = np.zeros_like(p)
    ei[i] = 1.0
    ej[j] = 1.0
    pts = np.stack([p, p + a * ei, p + a * ei + b * ej, p + b * ej, p])
    spec = CurveSpec("rectangle", points=pts, label=f"rect[{i},{j}] a={a:g} b={b:g}")
    if metric is not None:
        metric.require_inside(pts, what="rectangle corner")
    return spec


# ---------------------------------------------------------------------------
# batched transport engine


def _stage_matrices(metric, pts_flat, vel_flat, shape):
    """-(Gamma . velocity) at many stage points, reshaped to ``shape``+(n,n)."""
    n = metric.n
    gamma = np.empty(pts_flat.shape[:1] + (n, n, n))
    # chunk to bound the memory of jet temporaries
    chunk = max(1, 200_000 // max(1, n ** 3 // 4))
    for k in range(0, pts_flat.shape[0], chunk):
        gamma[k:k + chunk] = metric.christoffel_at(pts_flat[k:k + chunk])
    A = -np.einsum("qkij,qi->qkj", gamma, vel_flat)
    return A.reshape(shape + (n, n))


def _rk4_sweep(A, h, M):
    """March M through one segment given stage matrices A (B, 2N+1, n, n)."""
    steps = (A.shape[1] - 1) // 2
    for s in range(steps):
        a0 = A[:, 2 * s]
        am = A[:, 2 * s + 1]
        a1 = A[:, 2 * s + 2]
        k1 = a0 @ M
        k2 = am @ (M + (0.5 * h) * k1)
        k3 = am @ (M + (0.5 * h) * k2)
        k4 = a1 @ (M + h * k3)
        M = M + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return M


def _polyline_pass(metric, vertices, steps):
    B, Kp1, n = vertices.shape
    K = Kp1 - 1
    seg = vertices[:, 1:] - vertices[:, :-1]          # (B, K, n)
    s = np.linspace(0.0, 1.0, 2 * steps + 1)
    M = np.broadcast_to(np.eye(n), (B, n, n)).copy()
    h = 1.0 / steps
    for k in range(K):
        pts = vertices[:, k, None, :] + s[None, :, None] * seg[:, k, None, :]
        flat = pts.reshape(-1, n)
        vel = np.repeat(seg[:, k], 2 * steps + 1, axis=0)
        A = _stage_matrices(metric, flat, vel, (B, 2 * steps + 1))
        M = _rk4_sweep(A, h, M)
    return M


def transport_polylines(metric: ChartMetric, vertices, tol: float = TRANSPORT_TOL,
                        step_floor: float = TRANSPORT_STEP_FLOOR, n0: int = 8):
    """Transport along a batch of polylines sharing a segment count.

    ``vertices``: (B, K+1, n).  Returns (matrices (B,n,n), err (B,),
    converged (B,), steps).  Boxes are convex, so checking the vertices
    keeps every stage point inside the domain.
    """
    vertices = np.asarray(vertices, dtype=float)
    if vertices.ndim == 2:
        vertices = vertices[None]
    metric.require_inside(vertices.reshape(-1, metric.n), what="curve vertex")
    steps = n0
    prev = _polyline_pass(metric, vertices, steps)
    while True:
        steps *= 2
        cur = _polyline_pass(metric, vertices, steps)
        err = np.max(np.abs(cur - prev), axis=(1, 2))
        if np.all(err < tol):
            return cur, err, np.ones(len(err), dtype=bool), steps
        if 1.0 / (2 * steps) < step_floor:
            return cur, err, err < tol, steps
        prev = cur


def _parametric_pass(metric, spec, steps):
    bp = spec.breakpoints
    n = metric.n
    K = len(bp) - 1
    M = np.eye(n)[None]
    for k in range(K):
        s_vals = np.linspace(bp[k], bp[k + 1], 2 * steps + 1)
        jets = evaluate_jets(spec.exprs, s_vals[:, None], order=1)
        pts = np.stack([v for v, _, _ in jets], axis=-1)
        vel = np.stack([g[:, 0] for _, g, _ in jets], axis=-1)
        if not np.all(metric.contains(pts)):
            bad = pts[np.argmax(~metric.contains(pts))]
            raise DomainBoxError(f"parametric curve leaves the domain at {bad.tolist()}")
        A = _stage_matrices(metric, pts, vel, (1, 2 * steps + 1))
        M = _rk4_sweep(A, (bp[k + 1] - bp[k]) / steps, M)
    return M


def _refine(pass_fn, tol, step_floor, n0=8):
    steps = n0
    prev = pass_fn(steps)
    while True:
        steps *= 2
        cur = pass_fn(steps)
        err = float(np.max(np.abs(cur - prev)))
        if err < tol or 1.0 / (2 * steps) < step_floor:
            return cur, err, err < tol, steps
        prev = cur


def parallel_transport(metric: ChartMetric, curve: CurveSpec,
                       tol: float = TRANSPORT_TOL) -> TransportResult:
    """Parallel transport along one curve, refined until converged."""
    if curve.kind in ("polyline", "rectangle"):
        mats, errs, conv, steps = transport_polylines(metric, curve.points[None], tol)
        return TransportResult(mats[0], float(errs[0]), curve,
                               curve.points[0].copy(), curve.points[-1].copy(),
                               bool(conv[0]), steps)
    if curve.kind == "parametric":
        M, err, conv, steps = _refine(lambda s: _parametric_pass(metric, curve, s),
                                      tol, TRANSPORT_STEP_FLOOR)
        ends = evaluate_jets(curve.exprs, curve.breakpoints[[0, -1], None], order=0)
        pts = np.stack([v for v, _, _ in ends], axis=-1)
        return TransportResult(M[0], err, curve, pts[0], pts[1], conv, steps)
    if curve.kind == "deck":
        inner = parallel_transport(metric, curve.path, tol)
        A = curve.identification.matrix
        matrix = np.linalg.solve(A, inner.matrix)
        return TransportResult(matrix, inner.err_est, curve,
                               inner.start, inner.start, inner.converged,
                               inner.steps_per_segment)
    raise ValueError(f"unknown curve kind {curve.kind!r}")


# ---------------------------------------------------------------------------
# geodesics


@dataclass
class GeodesicResult:
    outcome: str                 # completed | left_domain | blowup
    s_end: float
    s: np.ndarray                # sample parameters
    x: np.ndarray                # (S, n) positions
    u: np.ndarray                # (S, n) velocities
    energy: np.ndarray           # g(x', x') along the way
    folds: int = 0
    final_speed: float = 0.0
    detail: str = ""

    @property
    def energy_drift(self) -> float:
        e0 = self.energy[0]
        return float(np.max(np.abs(self.energy - e0)) / max(abs(e0), 1.0))


def _fold(metric, x, u):
    """Map (x, u) back into the domain through identifications, if possible."""
    folds = 0
    for _ in range(16):
        if metric.contains(x):
            return x, u, folds, True
        moved = False
        for ident in metric.identifications:
            fwd = ident.apply(x)
            if metric.contains(fwd):
                x, u = fwd, ident.matrix @ u
                folds += 1
                moved = True
                break
            back = ident.apply_inverse(x)
            if metric.contains(back):
                x, u = back, np.linalg.solve(ident.matrix, u)
                folds += 1
                moved = True
                break
        if not moved:
            return x, u, folds, False
    return x, u, folds, metric.contains(x)


def integrate_geodesic(metric: ChartMetric, p, v: TangentVec, affine_span: float,
                       blowup_threshold: float = BLOWUP_SPEED,
                       rel_tol: float = 1e-10, max_steps: int = 500_000) -> GeodesicResult:
    """Integrate x'' + Gamma(x', x') = 0 adaptively from (p, v) for a span.

    Outcomes: ``completed`` (reached the span), ``left_domain`` (no
    identification folds the trajectory back) or ``blowup`` (auxiliary
    Euclidean speed crossed ``blowup_threshold``, or the adaptive step
    collapsed below the floor).  g(x', x') is recorded along the way.
    """
    n = metric.n
    x = np.asarray(p, dtype=float).copy()
    u = np.asarray(v.comp, dtype=float).copy()
    metric.require_inside(x)

    def acc(xx, uu):
        # no box check here: steps may poke past a fold boundary before the
        # identification maps them back
        gamma = metric.christoffel_at(xx, check=False)
        return -np.einsum("kij,i,j->k", gamma, uu, uu)

    def rk4(xx, uu, h):
        k1x, k1u = uu, acc(xx, uu)
        k2x, k2u = uu + 0.5 * h * k1u, acc(xx + 0.5 * h * k1x, uu + 0.5 * h * k1u)
        k3x, k3u = uu + 0.5 * h * k2u, acc(xx + 0.5 * h * k2x, uu + 0.5 * h * k2u)
        k4x, k4u = uu + h * k3u, acc(xx + h * k3x, uu + h * k3u)
        return (xx + (h / 6) * (k1x + 2 * (k2x + k3x) + k4x),
                uu + (h / 6) * (k1u + 2 * (k2u + k3u) + k4u))

    s = 0.0
    h = min(affine_span / 64.0, 0.25)
    samples = [(s, x.copy(), u.copy(), float(u @ metric.metric_at(x) @ u))]
    folds = 0
    outcome, detail = "completed", ""

    steps = 0
    while s < affine_span and steps < max_steps:
        steps += 1
        h = min(h, affine_span - s)
        try:
            x1, u1 = rk4(x, u, h)
            xa, ua = rk4(x, u, 0.5 * h)
            x2, u2 = rk4(xa, ua, 0.5 * h)
            bad = not (np.all(np.isfinite(x2)) and np.all(np.isfinite(u2))
                       and np.all(np.isfinite(x1)) and np.all(np.isfinite(u1)))
        except (ExprDomainError, DomainBoxError):
            bad = True
        if not bad:
            scale = 1.0 + float(np.max(np.abs(np.concatenate([x2, u2]))))
            err = float(np.max(np.abs(np.concatenate([x2 - x1, u2 - u1])))) / 15.0
            tol_step = rel_tol * scale
        if bad or err > tol_step:
            h *= 0.25 if bad else max(0.1, 0.9 * (tol_step / err) ** 0.2)
            if h < BLOWUP_STEP_FLOOR:
                outcome, detail = "blowup", "adaptive step collapsed"
                break
            continue
        s += h
        x, u = x2, u2
        if not metric.contains(x):
            x, u, nf, ok = _fold(metric, x, u)
            folds += nf
            if not ok:
                outcome, detail = "left_domain", f"at s={s:.6g}"
                break
        samples.append((s, x.copy(), u.copy(), float(u @ metric.metric_at(x) @ u)))
        speed = float(np.linalg.norm(u))
        if speed > blowup_threshold:
            outcome, detail = "blowup", f"speed {speed:.3e} at s={s:.9g}"
            break
        if err > 0:
            h *= min(4.0, max(0.2, 0.9 * (tol_step / err) ** 0.2))
        else:
            h *= 4.0
    else:
        if s < affine_span:
            outcome, detail = "blowup", "step budget exhausted"

    arr = lambda i: np.array([row[i] for row in samples])
    return GeodesicResult(outcome, s, arr(0), np.stack(arr(1)), np.stack(arr(2)),
                          arr(3), folds, float(np.linalg.norm(u)), detail)
