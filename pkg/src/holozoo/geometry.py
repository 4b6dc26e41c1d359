"""Lorentzian metrics on a coordinate chart and their pointwise tensors.

A chart is a single coordinate box (possibly unbounded) with optional affine
identifications; this covers direct products, flat tori and dilation
quotients.  All tensor operations accept a single point (n,) or a batch
(B, n) and are vectorised over the batch.

Conventions, fixed for the whole package:

* signature (-, +, ..., +), exactly one negative eigenvalue;
* Christoffel symbols  Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij);
* curvature  R(X, Y)Z = nab_X nab_Y Z - nab_Y nab_X Z - nab_[X,Y] Z, stored as
  R[l, k, i, j] = component l of R(e_i, e_j) e_k.  With this sign the round
  sphere has sectional curvature +1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .constants import METRIC_DEGENERACY_COND, IDENTIFICATION_TOL
from .expr import Expr, evaluate_jets, parse_expr, to_source

__all__ = [
    "GeometryError", "DomainBoxError", "SingularMetricError", "SignatureError",
    "IdentificationError", "Identification", "ChartMetric", "TangentVec",
    "LorFrame", "CausalClass", "causal_classify", "signature_check",
    "chart_from_strings",
]

_BOX_EPS = 1e-12


class GeometryError(ValueError):
    pass


class DomainBoxError(GeometryError):
    pass


class SingularMetricError(GeometryError):
    pass


class SignatureError(GeometryError):
    pass


class IdentificationError(GeometryError):
    pass


@dataclass(frozen=True)
class Identification:
    """Affine chart identification x -> A x + b that must be a g-isometry."""

    kind: str                 # "translation" | "linear"
    matrix: np.ndarray        # (n, n); identity for translations
    offset: np.ndarray        # (n,)

    @staticmethod
    def translation(offset) -> "Identification":
        offset = np.asarray(offset, dtype=float)
        return Identification("translation", np.eye(len(offset)), offset)

    @staticmethod
    def linear(matrix, offset=None) -> "Identification":
        matrix = np.asarray(matrix, dtype=float)
        if offset is None:
            offset = np.zeros(matrix.shape[0])
        return Identification("linear", matrix, np.asarray(offset, dtype=float))

    def apply(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(pts) @ self.matrix.T + self.offset

    def apply_inverse(self, pts: np.ndarray) -> np.ndarray:
        return (np.asarray(pts) - self.offset) @ np.linalg.inv(self.matrix).T


@dataclass
class TangentVec:
    """Coordinate-basis tangent vector at a chart point."""

    base: np.ndarray
    comp: np.ndarray

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        self.comp = np.asarray(self.comp, dtype=float)


@dataclass
class LorFrame:
    """A (possibly partial) frame of tangent vectors at a common base point."""

    base: np.ndarray
    vectors: np.ndarray  # (k, n)

    def gram(self, metric: "ChartMetric") -> np.ndarray:
        g = metric.metric_at(self.base)
        return self.vectors @ g @ self.vectors.T

    def orthonormality_residual(self, metric: "ChartMetric") -> float:
        k = self.vectors.shape[0]
        eta = np.diag([-1.0] + [1.0] * (k - 1))
        return float(np.max(np.abs(self.gram(metric) - eta)))


class CausalClass(NamedTuple):
    character: str    # timelike | null | spacelike | zero
    orientation: str  # future | past | none


@dataclass
class ChartMetric:
    """Metric tensor given by component expressions on a coordinate box."""

    name: str
    coords: tuple
    components: list            # n x n nested list of Expr, symmetric by sharing
    domain: list                # per-coordinate (lo, hi), possibly infinite
    identifications: list = field(default_factory=list)
    time_orientation: list = None
    signature: str = "lorentzian"    # or "riemannian"
    working_box: list = None         # finite truncation used for sampling

    def __post_init__(self):
        n = len(self.coords)
        self.coords = tuple(self.coords)
        if len(self.components) != n:
            raise GeometryError("component matrix does not match dimension")
        self.domain = [(float(lo), float(hi)) for lo, hi in self.domain]
        if self.working_box is None:
            self.working_box = [
                (max(lo, -2.0), min(hi, 2.0)) if not np.isfinite([lo, hi]).all()
                else (lo, hi)
                for lo, hi in self.domain
            ]
        self.working_box = [(float(lo), float(hi)) for lo, hi in self.working_box]
        for lo, hi in self.working_box:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise GeometryError("working box must be finite and nonempty")
        # unique upper-triangle expressions drive all evaluations
        self._upper = [(i, j) for i in range(n) for j in range(i, n)]
        self._exprs = [self.components[i][j] for i, j in self._upper]

    @property
    def n(self) -> int:
        return len(self.coords)

    # -- point bookkeeping -------------------------------------------------

    def _batch(self, pts):
        pts = np.asarray(pts, dtype=float)
        if pts.ndim == 1:
            return pts[None, :], True
        return pts, False

    def contains(self, pts, box=None) -> np.ndarray:
        """Componentwise box membership with a small float slack."""
        pts, single = self._batch(pts)
        box = self.domain if box is None else box
        ok = np.ones(pts.shape[0], dtype=bool)
        for axis, (lo, hi) in enumerate(box):
            ok &= (pts[:, axis] >= lo - _BOX_EPS) & (pts[:, axis] <= hi + _BOX_EPS)
        return bool(ok[0]) if single else ok

    def require_inside(self, pts, what="point"):
        pts, _ = self._batch(pts)
        ok = self.contains(pts)
        if not np.all(ok):
            bad = pts[np.argmax(~ok)]
            raise DomainBoxError(
                f"{what} {bad.tolist()} outside the domain of {self.name!r}")

    def random_points(self, count: int, rng) -> np.ndarray:
        lo = np.array([b[0] for b in self.working_box])
        hi = np.array([b[1] for b in self.working_box])
        return lo + (hi - lo) * rng.random((count, self.n))

    def box_center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2.0 for lo, hi in self.working_box])

    # -- tensor evaluation ---------------------------------------------------

    def _jets(self, pts, order):
        """Assemble g (B,n,n), dg (B,n,n,n) and ddg (B,n,n,n,n) from jets.

        dg[b, k, i, j] = d_k g_ij and ddg[b, m, k, i, j] = d_m d_k g_ij.
        """
        n = self.n
        B = pts.shape[0]
        jets = evaluate_jets(self._exprs, pts, order)
        g = np.empty((B, n, n))
        dg = np.empty((B, n, n, n)) if order >= 1 else None
        ddg = np.empty((B, n, n, n, n)) if order >= 2 else None
        for (i, j), (v, gr, he) in zip(self._upper, jets):
            g[:, i, j] = v
            g[:, j, i] = v
            if order >= 1:
                dg[:, :, i, j] = gr
                dg[:, :, j, i] = gr
            if order >= 2:
                ddg[:, :, :, i, j] = he
                ddg[:, :, :, j, i] = he
        return g, dg, ddg

    def metric_at(self, pts) -> np.ndarray:
        """Evaluated component matrix, exactly symmetric."""
        batch, single = self._batch(pts)
        self.require_inside(batch)
        g = self._jets(batch, order=0)[0]
        return g[0] if single else g

    def _inverse(self, g, pts):
        # cheap condition estimate on the max-norm
        ginv = np.linalg.inv(g)
        cond = (np.abs(g).sum(axis=-1).max(axis=-1)
                * np.abs(ginv).sum(axis=-1).max(axis=-1))
        if np.any(cond > METRIC_DEGENERACY_COND):
            bad = pts[np.argmax(cond > METRIC_DEGENERACY_COND)]
            raise SingularMetricError(
                f"metric of {self.name!r} is numerically singular at {bad.tolist()}"
                f" (condition estimate {cond.max():.3e})")
        return ginv

    def inverse_metric_at(self, pts) -> np.ndarray:
        batch, single = self._batch(pts)
        self.require_inside(batch)
        g = self._jets(batch, order=0)[0]
        ginv = self._inverse(g, batch)
        return ginv[0] if single else ginv

    def _christoffel(self, pts, order):
        g, dg, ddg = self._jets(pts, order + 1)
        ginv = self._inverse(g, pts)
        # T[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
        T = (np.einsum("bijl->blij", dg) + np.einsum("bjil->blij", dg) - dg)
        gamma = 0.5 * np.einsum("bkl,blij->bkij", ginv, T)
        if order == 0:
            return g, ginv, dg, gamma, None
        dginv = -np.einsum("bka,bmac,bcl->bmkl", ginv, dg, ginv)
        dT = (np.einsum("bmijl->bmlij", ddg) + np.einsum("bmjil->bmlij", ddg) - ddg)
        dgamma = 0.5 * (np.einsum("bmkl,blij->bmkij", dginv, T)
                        + np.einsum("bkl,bmlij->bmkij", ginv, dT))
        return g, ginv, dg, gamma, dgamma

    def christoffel_at(self, pts, check: bool = True) -> np.ndarray:
        """Gamma[k, i, j], symmetric in (i, j)."""
        batch, single = self._batch(pts)
        if check:
            self.require_inside(batch)
        gamma = self._christoffel(batch, order=0)[3]
        return gamma[0] if single else gamma

    def riemann_at(self, pts) -> np.ndarray:
        """R[l, k, i, j] = component l of R(e_i, e_j) e_k."""
        batch, single = self._batch(pts)
        self.require_inside(batch)
        _, _, _, gamma, dgamma = self._christoffel(batch, order=1)
        R = (np.einsum("biljk->blkij", dgamma)
             - np.einsum("bjlik->blkij", dgamma)
             + np.einsum("blia,bajk->blkij", gamma, gamma)
             - np.einsum("blja,baik->blkij", gamma, gamma))
        return R[0] if single else R

    def time_axis_at(self, pts) -> np.ndarray:
        """The declared time-orientation vector field, evaluated."""
        if self.time_orientation is None:
            raise GeometryError(f"{self.name!r} has no time orientation")
        batch, single = self._batch(pts)
        jets = evaluate_jets(self.time_orientation, batch, order=0)
        T = np.stack([v for v, _, _ in jets], axis=-1)
        return T[0] if single else T

    def stripped(self) -> "ChartMetric":
        """Copy with identifications removed (the covering chart)."""
        return replace(self, name=self.name + "_cover", identifications=[])


def causal_classify(metric: ChartMetric, v: TangentVec,
                    causal_tol: float = 1e-10) -> CausalClass:
    """Classify g(v, v) with future/past read off the time orientation."""
    metric.require_inside(v.base)
    g = metric.metric_at(v.base)
    norm2 = float(v.comp @ v.comp)
    if norm2 == 0.0:
        return CausalClass("zero", "none")
    q = float(v.comp @ g @ v.comp)
    tol = causal_tol * norm2
    if q < -tol:
        character = "timelike"
    elif q > tol:
        return CausalClass("spacelike", "none")
    else:
        character = "null"
    T = metric.time_axis_at(v.base)
    s = float(v.comp @ g @ T)
    return CausalClass(character, "future" if s < 0 else "past")


def signature_check(metric: ChartMetric, samples: int = 10000, seed: int = 0) -> dict:
    """Eigenvalue-signature test at random working-box points.

    Raises SignatureError (with the worst point) when the declared signature
    fails or the metric degenerates.  Returns margin diagnostics.
    """
    rng = np.random.default_rng(seed)
    pts = metric.random_points(samples, rng)
    g = metric._jets(pts, order=0)[0]
    ev = np.linalg.eigvalsh(g)
    neg = (ev < 0).sum(axis=1)
    degeneracy = np.abs(ev).min(axis=1) / np.abs(ev).max(axis=1)
    want_neg = 1 if metric.signature == "lorentzian" else 0
    bad = neg != want_neg
    if np.any(bad):
        p = pts[np.argmax(bad)]
        raise SignatureError(
            f"{metric.name!r} is not {metric.signature} at {p.tolist()}"
            f" (eigenvalues {ev[np.argmax(bad)].tolist()})")
    if np.any(degeneracy < 1.0 / METRIC_DEGENERACY_COND):
        p = pts[np.argmin(degeneracy)]
        raise SignatureError(f"{metric.name!r} degenerates at {p.tolist()}")
    worst = int(np.argmin(degeneracy))
    return {
        "samples": samples,
        "min_degeneracy_ratio": float(degeneracy[worst]),
        "worst_point": pts[worst].tolist(),
    }


def identification_residual(metric: ChartMetric, samples: int = 1000,
                            seed: int = 0) -> float:
    """Max pullback deviation |A^T g(Ax+b) A - g(x)| over sampled points."""
    if not metric.identifications:
        return 0.0
    rng = np.random.default_rng(seed)
    pts = metric.random_points(samples, rng)
    g = metric._jets(pts, order=0)[0]
    worst = 0.0
    for ident in metric.identifications:
        mapped = ident.apply(pts)
        gm = metric._jets(mapped, order=0)[0]
        pulled = np.einsum("ai,bac,cj->bij", ident.matrix, gm, ident.matrix)
        worst = max(worst, float(np.max(np.abs(pulled - g))))
    return worst


def validate_identifications(metric: ChartMetric, samples: int = 1000,
                             seed: int = 0, tol: float = IDENTIFICATION_TOL):
    dev = identification_residual(metric, samples, seed)
    if dev > tol:
        raise IdentificationError(
            f"identification of {metric.name!r} is not an isometry"
            f" (max deviation {dev:.3e} > {tol:g})")
    return dev


def metricity_residual(metric: ChartMetric, samples: int = 100, seed: int = 0) -> float:
    """Max |nabla g| over random points; zero for the Levi-Civita connection."""
    rng = np.random.default_rng(seed)
    pts = metric.random_points(samples, rng)
    g, _, dg, gamma, _ = metric._christoffel(pts, order=0)
    nab = (dg
           - np.einsum("blki,blj->bkij", gamma, g)
           - np.einsum("blkj,bil->bkij", gamma, g))
    return float(np.max(np.abs(nab)))


def chart_from_strings(name: str, coords: Sequence[str], upper: Sequence[str],
                       domain, identifications=None, time_orientation=None,
                       signature: str = "lorentzian", working_box=None) -> ChartMetric:
    """Build a ChartMetric from upper-triangle component strings.

    ``upper`` lists g_ij row-major for i <= j.  Equal source strings share
    one tree so symmetric entries evaluate once.
    """
    n = len(coords)
    if len(upper) != n * (n + 1) // 2:
        raise GeometryError(
            f"expected {n * (n + 1) // 2} upper-triangle components, got {len(upper)}")
    pool: dict[str, Expr] = {}

    def parsed(src: str) -> Expr:
        if src not in pool:
            pool[src] = parse_expr(src, coords)
        return pool[src]

    comp = [[None] * n for _ in range(n)]
    it = iter(upper)
    for i in range(n):
        for j in range(i, n):
            tree = parsed(next(it))
            comp[i][j] = tree
            comp[j][i] = tree
    torient = None
    if time_orientation is not None:
        torient = [parsed(src) for src in time_orientation]
    return ChartMetric(name=name, coords=tuple(coords), components=comp,
                       domain=list(domain), identifications=list(identifications or []),
                       time_orientation=torient, signature=signature,
                       working_box=working_box)
