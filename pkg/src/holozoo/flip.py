"""Flip Riemannian metrics and null sectional curvature.

Given a unit timelike parallel field V, the flip metric

    g_R(X, Y) = g(X, Y) + 2 g(X, V) g(Y, V)

is Riemannian and shares the Levi-Civita connection with g.  V is a sampled
field without a closed form, so the flip metric is materialised by grid
evaluation plus on-demand pointwise evaluation, and its Christoffel symbols
use central finite differences with Richardson extrapolation (the one place
finite differences are permitted; tolerance relaxed to FLIP_CONNECTION_TOL).
Stencil values of V come from one-step transports seeded at the query point,
so the transport error of V cancels in the differences.

Null sectional curvature of a degenerate plane span{u, v} (u null, v
spacelike, g(u, v) = 0) is K_u = g(R(u, v)v, u) / g(v, v); the sign
convention makes it +1 on a unit-sphere factor.  Fixing a timelike U and
normalising u by g(u, U) = 1 turns K into a map on degenerate planes; the
pointwise check samples random planes and measures the spread.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .constants import (FLIP_CONNECTION_TOL, FLIP_FD_STEP, PARALLEL_FIELD_TOL)
from .geometry import ChartMetric, GeometryError, TangentVec
from .holonomy import ParallelField
from .transport import transport_polylines

__all__ = [
    "DegeneratePlane", "FlipMetric", "AnalyticVectorField", "flip_metric",
    "connection_coincidence", "null_sectional_curvature", "null_curvature_wrt",
    "pointwise_nullsec_check", "random_degenerate_plane",
]


@dataclass
class AnalyticVectorField:
    """Vector field given by a callable; used for synthetic (negative) controls."""

    metric: ChartMetric
    fn: Callable[[np.ndarray], np.ndarray]   # (B, n) -> (B, n)
    path_independence_residual: float = float("inf")
    exact_pointwise = True  # stencil values come straight from the callable

    def at(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        out = self.fn(pts[None] if single else pts)
        return out[0] if single else out


def _field_values(field, pts):
    return field.at(pts)


def _flip_values(metric, pts, vvals):
    g = metric.metric_at(pts)
    gv = np.einsum("bij,bj->bi", g, vvals)
    return g + 2.0 * gv[:, :, None] * gv[:, None, :]


class FlipMetric:
    """Riemannian flip of a Lorentzian metric around a unit timelike field."""

    def __init__(self, metric: ChartMetric, field, require_parallel: bool = True,
                 unit_tol: float = 1e-8, parallel_tol: float = PARALLEL_FIELD_TOL,
                 check_grid: int = 5):
        self.base_metric = metric
        self.field = field
        self.n = metric.n
        self.coords = metric.coords
        self.name = metric.name + "_flip"
        self.signature = "riemannian"
        self.working_box = metric.working_box

        if require_parallel and field.path_independence_residual > parallel_tol:
            raise GeometryError(
                "field is not numerically parallel "
                f"(residual {field.path_independence_residual:.3e} > {parallel_tol:g});"
                " the flip would not share the connection")
        rng = np.random.default_rng(7)
        pts = metric.random_points(200, rng)
        vvals = _field_values(field, pts)
        g = metric.metric_at(pts)
        unit = np.einsum("bi,bij,bj->b", vvals, g, vvals)
        worst = float(np.max(np.abs(unit + 1.0)))
        if worst > unit_tol:
            raise GeometryError(
                f"field is not unit timelike (max |g(V,V)+1| = {worst:.3e})")
        gr = _flip_values(metric, pts, vvals)
        if np.any(np.linalg.eigvalsh(gr)[:, 0] <= 0):
            raise GeometryError("flip metric failed to be positive definite")

    def metric_at(self, pts, field_values=None) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        batch = pts[None] if single else pts
        vv = _field_values(self.field, batch) if field_values is None else field_values
        out = _flip_values(self.base_metric, batch, vv)
        return out[0] if single else out

    def _stencil_field(self, pts, vvals, offsets):
        """Field values at pts + offsets via one-step transports from pts.

        Seeding each stencil at the query point's own field value makes the
        field error common to the stencil, so it cancels in differences.
        """
        B = pts.shape[0]
        S = offsets.shape[0]
        starts = np.repeat(pts, S, axis=0)
        ends = starts + np.tile(offsets, (B, 1))
        verts = np.stack([starts, ends], axis=1)
        # one fixed RK4 step: local error ~ |h|^5, far below everything else
        from .transport import _polyline_pass
        mats = _polyline_pass(self.base_metric, verts, steps=1)
        vals = np.einsum("qij,qj->qi", mats, np.repeat(vvals, S, axis=0))
        return ends, vals

    def christoffel_at(self, pts, field_values=None, h: float = FLIP_FD_STEP) -> np.ndarray:
        """FD Christoffels of the flip metric (Richardson-extrapolated)."""
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        batch = pts[None] if single else pts
        B, n = batch.shape
        vv = _field_values(self.field, batch) if field_values is None else field_values

        offsets = []
        for k in range(n):
            for step in (h, 0.5 * h):
                for sign in (1.0, -1.0):
                    off = np.zeros(n)
                    off[k] = sign * step
                    offsets.append(off)
        offsets = np.asarray(offsets)          # (4n, n)
        if getattr(self.field, "exact_pointwise", False):
            ends = (batch[:, None, :] + offsets[None, :, :]).reshape(-1, n)
            vals = self.field.at(ends)
        else:
            ends, vals = self._stencil_field(batch, vv, offsets)
        gr = _flip_values(self.base_metric, ends, vals).reshape(B, n, 4, n, n)
        d_h = (gr[:, :, 0] - gr[:, :, 1]) / (2.0 * h)
        d_h2 = (gr[:, :, 2] - gr[:, :, 3]) / h
        dg = (4.0 * d_h2 - d_h) / 3.0          # (B, n, n, n): d_k gR_ij
        g0 = _flip_values(self.base_metric, batch, vv)
        ginv = np.linalg.inv(g0)
        T = (np.einsum("bijl->blij", dg) + np.einsum("bjil->blij", dg) - dg)
        gamma = 0.5 * np.einsum("bkl,blij->bkij", ginv, T)
        return gamma[0] if single else gamma


def flip_metric(metric: ChartMetric, field, require_parallel: bool = True) -> FlipMetric:
    """Build the flip metric around a sampled unit timelike (parallel) field."""
    return FlipMetric(metric, field, require_parallel=require_parallel)


def connection_coincidence(metric: ChartMetric, flipped: FlipMetric,
                           grid=10) -> float:
    """Max |Gamma(g) - Gamma(g_flip)| over a working-box grid."""
    n = metric.n
    if np.isscalar(grid):
        grid = [int(grid)] * n
    axes = [np.linspace(lo, hi, g) for (lo, hi), g in zip(metric.working_box, grid)]
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.reshape(-1) for m in mesh], axis=-1)
    worst = 0.0
    chunk = 4000
    for q in range(0, len(nodes), chunk):
        block = nodes[q:q + chunk]
        ga = metric.christoffel_at(block)
        gb = flipped.christoffel_at(block)
        worst = max(worst, float(np.max(np.abs(ga - gb))))
    return worst


# ---------------------------------------------------------------------------
# null sectional curvature


@dataclass
class DegeneratePlane:
    """span{u, v} with u null, v spacelike and g(u, v) = 0."""

    base: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def validate(self, metric: ChartMetric, tol: float = 1e-10):
        g = metric.metric_at(self.base)
        uu = float(self.u @ g @ self.u)
        vv = float(self.v @ g @ self.v)
        uv = float(self.u @ g @ self.v)
        scale = max(1.0, float(self.u @ self.u), float(self.v @ self.v))
        if abs(uu) > tol * scale:
            raise GeometryError(f"u is not null: g(u,u) = {uu:.3e}")
        if vv <= 1e-12:
            raise GeometryError(f"v is not spacelike: g(v,v) = {vv:.3e}")
        if abs(uv) > tol * scale:
            raise GeometryError(f"plane is not degenerate: g(u,v) = {uv:.3e}")


def null_sectional_curvature(metric: ChartMetric, plane: DegeneratePlane) -> float:
    """K_u(plane) = g(R(u, v)v, u) / g(v, v)."""
    plane.validate(metric)
    g = metric.metric_at(plane.base)
    R = metric.riemann_at(plane.base)
    w = np.einsum("lkij,k,i,j->l", R, plane.v, plane.u, plane.v)
    return float((w @ g @ plane.u) / (plane.v @ g @ plane.v))


def null_curvature_wrt(metric: ChartMetric, plane: DegeneratePlane,
                       U: np.ndarray) -> float:
    """K with u rescaled to the unique null vector satisfying g(u, U) = 1."""
    g = metric.metric_at(plane.base)
    pairing = float(plane.u @ g @ U)
    if abs(pairing) < 1e-14:
        raise GeometryError("null direction is orthogonal to U; cannot normalise")
    scaled = DegeneratePlane(plane.base, plane.u / pairing, plane.v)
    return null_sectional_curvature(metric, scaled)


def random_degenerate_plane(metric: ChartMetric, p, U, rng) -> DegeneratePlane:
    """u = T + e with e a random unit spacelike vector g-orthogonal to T.

    T is U normalised to g(T, T) = -1; v is a random unit spacelike vector
    orthogonal to both, so span{u, v} is degenerate by construction.
    """
    p = np.asarray(p, dtype=float)
    g = metric.metric_at(p)
    n = metric.n
    U = np.asarray(U, dtype=float)
    q = float(U @ g @ U)
    if q >= 0:
        raise GeometryError("U must be timelike")
    T = U / np.sqrt(-q)

    def g_orthonormal_spacelike(excluded):
        for _ in range(64):
            cand = rng.normal(size=n)
            for b in excluded:
                gb = float(b @ g @ b)
                cand = cand - (float(cand @ g @ b) / gb) * b
            norm2 = float(cand @ g @ cand)
            if norm2 > 1e-8:
                return cand / np.sqrt(norm2)
        raise GeometryError("failed to sample a spacelike direction")

    e = g_orthonormal_spacelike([T])
    v = g_orthonormal_spacelike([T, e])
    return DegeneratePlane(p, T + e, v)


def pointwise_nullsec_check(metric: ChartMetric, p, U: TangentVec,
                            samples: int = 64, seed: int = 0) -> dict:
    """Sample degenerate planes at p; the curvature map is pointwise when
    the spread over planes vanishes (relative tolerance 1e-6)."""
    rng = np.random.default_rng(seed)
    p = np.asarray(p, dtype=float)
    values = []
    for _ in range(samples):
        plane = random_degenerate_plane(metric, p, U.comp, rng)
        values.append(null_curvature_wrt(metric, plane, U.comp))
    values = np.asarray(values)
    spread = float(values.max() - values.min())
    mean = float(values.mean())
    return {
        "is_pointwise": spread < 1e-6 * (1.0 + abs(mean)),
        "spread": spread,
        "value": mean,
        "samples": samples,
    }
