"""Sampling the holonomy group and deciding precompactness.

A holonomy sample is a family of loop transports at a base point:
seeded rectangle loops at three scales, lassoed to the base, plus one
deck-closed loop per chart identification.  From the sample we compute

* the common fixed subspace of all generators (numerical null space of the
  stacked P - I),
* a precompactness verdict: a timelike invariant direction certifies
  `precompact_timelike`, an invariant null line only `causal_only`, and
  everything else `not_precompact`,
* invariant vectors by iterated group averaging,
* parallel fields by grid transport with a path-independence residual,
* orthonormal systems of parallel vectors, relative holonomy of slices,
  covering comparisons and the dimension of the generator Lie algebra.

Finitely many loops can certify `not_precompact` definitively (a boost
witness); `precompact_timelike` only holds relative to the sampled loops,
so verdicts carry their residuals and budgets.  Whether the group (not its
closure) is compact is not decidable from samples, and reports say so.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .constants import (ALGEBRA_LOG_RADIUS, ALGEBRA_RANK_RTOL, FIXED_SPACE_RTOL,
                        HAAR_RESIDUAL_TOL, LOOP_SCALES, SLICE_GEODESIC_TOL,
                        TIMELIKE_EIG_TOL, TRANSPORT_TOL)
from .geometry import (ChartMetric, GeometryError, TangentVec, LorFrame,
                       causal_classify)
from .transport import (CurveSpec, TransportResult, parallel_transport,
                        transport_polylines)

__all__ = [
    "HolonomySample", "FixedSubspace", "HolonomyVerdict", "ParallelField",
    "sample_holonomy", "fixed_subspace", "precompactness_verdict",
    "haar_average_vector", "parallel_field_extend", "orthonormal_parallel_system",
    "relative_holonomy", "covering_compare", "holonomy_algebra_dim",
    "algebra_report", "VerdictError", "SliceError",
]


class VerdictError(GeometryError):
    pass


class SliceError(GeometryError):
    pass


@dataclass
class HolonomySample:
    """Loop transports at a base point; the numerical stand-in for the group."""

    metric_name: str
    base: np.ndarray
    gram: np.ndarray                      # metric at the base
    generators: list                      # converged TransportResults
    seed: int
    budget: int
    future_axis: np.ndarray               # time orientation at the base
    dropped: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.base)

    def matrices(self) -> np.ndarray:
        return np.stack([t.matrix for t in self.generators])

    def deck_indices(self) -> list:
        return [i for i, t in enumerate(self.generators)
                if t.loop is not None and t.loop.kind == "deck"]

    def gram_defect(self) -> float:
        """Max deviation of P^T g P from g over the generators."""
        P = self.matrices()
        pulled = np.einsum("qai,ab,qbj->qij", P, self.gram, P)
        return float(np.max(np.abs(pulled - self.gram)))


@dataclass
class FixedSubspace:
    """Common fixed vectors of the sampled generators."""

    basis: np.ndarray            # (n, k), Euclidean-orthonormal columns
    gram_restricted: np.ndarray  # (k, k) metric restricted to the basis
    singular_values: np.ndarray  # of the stacked (P_i - I)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass
class HolonomyVerdict:
    kind: str                          # precompact_timelike | causal_only | not_precompact
    witness: Optional[TangentVec]
    residuals: dict


def _lasso_rectangle(base, corner, i, j, a, b):
    n = len(base)
    ei = np.zeros(n)
    ej = np.zeros(n)
    ei[i] = a
    ej[j] = b
    return np.stack([base, corner, corner + ei, corner + ei + ej,
                     corner + ej, corner, base])


def sample_holonomy(metric: ChartMetric, base=None, budget: int = 50,
                    seed: int = 0, tol: float = TRANSPORT_TOL) -> HolonomySample:
    """Deterministic loop family at ``base``: rectangles plus deck loops.

    Rectangles are placed at the scales ``LOOP_SCALES`` of the working box,
    cycling through all coordinate-axis pairs, at RNG-seeded positions, each
    lassoed to the base point.  Unconverged transports are dropped and
    reported in ``sample.dropped``.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    n = metric.n
    base = metric.box_center() if base is None else np.asarray(base, dtype=float)
    metric.require_inside(base, what="base point")
    rng = np.random.default_rng(seed)
    box = metric.working_box
    sizes = np.array([hi - lo for lo, hi in box])
    pairs = list(itertools.combinations(range(n), 2))

    loops = []
    for m in range(budget):
        scale = LOOP_SCALES[m % len(LOOP_SCALES)]
        i, j = pairs[(m // len(LOOP_SCALES)) % len(pairs)]
        a = scale * sizes[i]
        b = scale * sizes[j]
        corner = np.empty(n)
        for axis, (lo, hi) in enumerate(box):
            hi_eff = hi - (a if axis == i else b if axis == j else 0.0)
            corner[axis] = rng.uniform(lo, hi_eff)
        verts = _lasso_rectangle(base, corner, i, j, a, b)
        label = f"rect[{i},{j}] scale={scale:g} seed-loop {m}"
        loops.append((CurveSpec("rectangle", points=verts, label=label), verts, scale))

    generators: list = [None] * len(loops)
    dropped = []
    # batch per scale so halving depth matches loop size
    for scale in sorted({s for _, _, s in loops}, reverse=True):
        idx = [q for q, (_, _, s) in enumerate(loops) if s == scale]
        verts = np.stack([loops[q][1] for q in idx])
        mats, errs, conv, steps = transport_polylines(metric, verts, tol)
        for row, q in enumerate(idx):
            res = TransportResult(mats[row], float(errs[row]), loops[q][0],
                                  base.copy(), base.copy(), bool(conv[row]), steps)
            generators[q] = res

    for ident_idx, ident in enumerate(metric.identifications):
        target = ident.apply(base)
        direction = "fwd"
        if not metric.contains(target):
            target = ident.apply_inverse(base)
            direction = "inv"
            if not metric.contains(target):
                dropped.append(f"identification {ident_idx}: image of base "
                               "outside the domain")
                continue
        path = CurveSpec.polyline([base, target])
        spec = CurveSpec.deck_closed(path, ident,
                                     label=f"deck[{ident_idx}] {direction}")
        inner = parallel_transport(metric, path, tol)
        A = ident.matrix if direction == "fwd" else np.linalg.inv(ident.matrix)
        matrix = np.linalg.solve(A, inner.matrix)
        generators.append(TransportResult(matrix, inner.err_est, spec,
                                          base.copy(), base.copy(),
                                          inner.converged, inner.steps_per_segment))

    kept = []
    for res in generators:
        if res.converged:
            kept.append(res)
        else:
            dropped.append(f"unconverged transport ({res.loop.label}), "
                           f"err={res.err_est:.3e}")
    if not kept:
        raise GeometryError("no loop transport converged; domain too small?")
    return HolonomySample(metric.name, base, metric.metric_at(base), kept,
                          seed, budget, metric.time_axis_at(base), dropped)


def fixed_subspace(sample: HolonomySample,
                   rel_tol: float = FIXED_SPACE_RTOL) -> FixedSubspace:
    """Numerical null space of the stacked (P_i - I)."""
    if not sample.generators:
        raise ValueError("sample has no generators")
    n = sample.n
    eye = np.eye(n)
    stacked = np.concatenate([t.matrix - eye for t in sample.generators])
    _, s, vh = np.linalg.svd(stacked)
    smax = s[0] if len(s) else 0.0
    k = int(np.sum(s <= rel_tol * smax))
    basis = vh[n - k:].T if k else np.zeros((n, 0))
    gram_r = basis.T @ sample.gram @ basis
    return FixedSubspace(basis, gram_r, s)


def _orient_future(sample: HolonomySample, w: np.ndarray) -> np.ndarray:
    s = float(w @ sample.gram @ sample.future_axis)
    return -w if s > 0 else w


def _fix_residual(sample: HolonomySample, w: np.ndarray) -> float:
    nw = np.linalg.norm(w)
    return max(float(np.linalg.norm(t.matrix @ w - w)) for t in sample.generators) / nw


def precompactness_verdict(metric: ChartMetric, sample: HolonomySample,
                           rel_tol: float = FIXED_SPACE_RTOL,
                           eig_tol: float = TIMELIKE_EIG_TOL) -> HolonomyVerdict:
    """Grade the sample by the causal character of its fixed subspace.

    A negative direction of g on the fixed subspace gives a unit timelike
    witness (`precompact_timelike`); a positive-semidefinite restriction
    with kernel gives a null witness (`causal_only`); otherwise there is no
    invariant causal direction and the sample is `not_precompact`.
    """
    F = fixed_subspace(sample, rel_tol)
    residuals = {
        "singular_values": F.singular_values.tolist(),
        "fixed_dim": F.dim,
        "generator_count": len(sample.generators),
        "budget": sample.budget,
        "gram_defect": sample.gram_defect(),
        "compactness_note": ("compactness of the group itself (vs its closure)"
                             " is not decidable from finitely many loops"),
    }
    witness = None
    kind = "not_precompact"
    if F.dim:
        lam, vecs = np.linalg.eigh(F.gram_restricted)
        residuals["restricted_eigenvalues"] = lam.tolist()
        if lam[0] < -eig_tol:
            w = F.basis @ vecs[:, 0]
            w = _orient_future(sample, w / np.sqrt(-lam[0]))
            kind = "precompact_timelike"
            witness = TangentVec(sample.base, w)
        elif np.any(np.abs(lam) <= eig_tol):
            pick = int(np.argmin(np.abs(lam)))
            w = F.basis @ vecs[:, pick]
            w = _orient_future(sample, w / np.linalg.norm(w))
            kind = "causal_only"
            witness = TangentVec(sample.base, w)
    if witness is not None:
        residuals["witness_fix_residual"] = _fix_residual(sample, witness.comp)
    return HolonomyVerdict(kind, witness, residuals)


def haar_average_vector(sample: HolonomySample, v0: TangentVec,
                        word_len: int = 256, samples: int = 10000, seed: int = 0,
                        tol: float = HAAR_RESIDUAL_TOL):
    """Average v0 over random words in the generators and their inverses.

    Iterated averaging: each round replaces v by the mean of P v over a
    pool of group elements (the generators, their inverses, and random
    longer words added up front so that mixing is fast).  The fixed
    component of v is untouched by every pool element, while the moving
    component is multiplied by a contraction factor each round, so the
    iteration converges geometrically whenever the orbit of v0 is bounded
    and signals divergence (boosts) otherwise.  Rounds stop at ``word_len``
    or once ``samples`` word applications are spent.

    Returns ``(TangentVec or None, report dict)``.
    """
    cls = causal_classify_from_sample(sample, v0)
    if cls != ("timelike", "future"):
        raise ValueError(f"v0 must be future timelike at the base, got {cls}")
    gens = [t.matrix for t in sample.generators]
    n = sample.n
    pool = []
    for G in gens:
        pool.append(G)
        pool.append(np.linalg.inv(G))
    rng = np.random.default_rng(seed)
    consumed = 0

    # enrich the pool with random words; longer words mix faster
    max_len = max(2, min(32, word_len))
    n_words = min(64, max(0, samples // (4 * max_len)))
    lengths = [2 ** (1 + q % 5) for q in range(n_words)]
    base_pool = len(pool)
    for ell in lengths:
        ell = min(ell, max_len)
        letters = rng.integers(0, base_pool, size=ell)
        W = pool[letters[0]]
        for idx in letters[1:]:
            W = pool[idx] @ W
        pool.append(W)
        pool.append(np.linalg.inv(W))
        consumed += 2 * ell

    arr = np.stack(pool)
    v = v0.comp.astype(float).copy()
    norm0 = np.linalg.norm(v)
    residual = _fix_residual(sample, v)
    rounds = 0
    diverged = False
    k_cap = 64
    while residual > tol and rounds < word_len and consumed + min(len(arr), k_cap) <= samples:
        if len(arr) <= k_cap:
            batch = arr
        else:
            batch = arr[rng.integers(0, len(arr), size=k_cap)]
        v_new = np.mean(batch @ v, axis=0)
        consumed += len(batch)
        rounds += 1
        norm = np.linalg.norm(v_new)
        if norm < 1e-12 * norm0:
            report = {"converged": False, "diverged": False, "zero_average": True,
                      "residual": float("nan"), "rounds": rounds,
                      "word_samples": consumed, "norm_ratio": 0.0}
            return None, report
        if norm > 1e9 * max(1.0, norm0):
            diverged = True
            v = v_new
            break
        v = v_new
        residual = _fix_residual(sample, v)

    report = {
        "converged": bool(residual <= tol and not diverged),
        "diverged": diverged,
        "zero_average": False,
        "residual": float(residual),
        "rounds": rounds,
        "word_samples": consumed,
        "norm_ratio": float(np.linalg.norm(v) / norm0),
    }
    if not report["converged"]:
        return None, report
    return TangentVec(sample.base, v), report


def causal_classify_from_sample(sample: HolonomySample, v: TangentVec,
                                causal_tol: float = 1e-10):
    """Causal classification using the sample's stored gram and orientation."""
    norm2 = float(v.comp @ v.comp)
    if norm2 == 0.0:
        return ("zero", "none")
    q = float(v.comp @ sample.gram @ v.comp)
    tol = causal_tol * norm2
    if q > tol:
        return ("spacelike", "none")
    character = "timelike" if q < -tol else "null"
    s = float(v.comp @ sample.gram @ sample.future_axis)
    return (character, "future" if s < 0 else "past")


# ---------------------------------------------------------------------------
# parallel fields


@dataclass
class ParallelField:
    """Vector field produced by transporting a seed vector to grid nodes."""

    metric: ChartMetric
    base: np.ndarray
    seed_vector: np.ndarray
    axes: list                        # per-coordinate node arrays
    values: np.ndarray                # grid shape + (n,)
    path_independence_residual: float

    def grid_points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)

    def at(self, pts) -> np.ndarray:
        """Transport the seed vector from the base to arbitrary points."""
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        batch = pts[None] if single else pts
        mats = _axis_path_transports(self.metric, self.base, batch)
        out = mats @ self.seed_vector
        return out[0] if single else out


def _axis_path_transports(metric, base, targets, order=None):
    """Transports from base to each target along axis-ordered polylines."""
    n = metric.n
    order = list(range(n)) if order is None else list(order)
    B = targets.shape[0]
    verts = np.empty((B, n + 1, n))
    verts[:, 0] = base
    cur = np.broadcast_to(base, (B, n)).copy()
    for depth, axis in enumerate(order):
        cur = cur.copy()
        cur[:, axis] = targets[:, axis]
        verts[:, depth + 1] = cur
    mats, _, conv, _ = transport_polylines(metric, verts)
    if not np.all(conv):
        raise GeometryError("grid transport failed to converge")
    return mats


def _grid_transports(metric, base, axes, order):
    """Transport matrices to all grid nodes, sharing path prefixes."""
    n = metric.n
    sizes = [len(ax) for ax in axes]
    pts = np.asarray(base, dtype=float)[None, :]
    mats = np.eye(n)[None]
    done_axes = []
    for axis in order:
        vals = axes[axis]
        m = len(vals)
        B = pts.shape[0]
        starts = np.repeat(pts, m, axis=0)
        ends = starts.copy()
        ends[:, axis] = np.tile(vals, B)
        verts = np.stack([starts, ends], axis=1)
        seg_mats, _, conv, _ = transport_polylines(metric, verts)
        if not np.all(conv):
            raise GeometryError("grid transport failed to converge")
        mats = seg_mats @ np.repeat(mats, m, axis=0)
        pts = ends
        done_axes.append(axis)
    # rows are ordered with the first-transported axis slowest
    shaped = mats.reshape([sizes[a] for a in order] + [n, n])
    perm = np.argsort(order).tolist()
    return np.transpose(shaped, perm + [len(order), len(order) + 1])


def parallel_field_extend(metric: ChartMetric, w: TangentVec, grid=6) -> ParallelField:
    """Extend w to grid nodes by transport along axis-ordered paths.

    The residual is the worst disagreement between the two opposite axis
    orderings; below PARALLEL_FIELD_TOL it certifies a numerically parallel
    field.
    """
    n = metric.n
    if np.isscalar(grid):
        grid = [int(grid)] * n
    axes = [np.linspace(lo, hi, g) for (lo, hi), g in zip(metric.working_box, grid)]
    fwd = _grid_transports(metric, w.base, axes, list(range(n)))
    bwd = _grid_transports(metric, w.base, axes, list(range(n))[::-1])
    vals_f = fwd @ w.comp
    vals_b = bwd @ w.comp
    residual = float(np.max(np.abs(vals_f - vals_b)) / max(1.0, np.linalg.norm(w.comp)))
    return ParallelField(metric, np.asarray(w.base, dtype=float), w.comp.copy(),
                         axes, vals_f, residual)


def orthonormal_parallel_system(metric: ChartMetric, sample: HolonomySample,
                                eig_tol: float = TIMELIKE_EIG_TOL) -> LorFrame:
    """Orthonormal invariant vectors, first timelike, rest spacelike.

    Eigenvectors of the restricted gram are g-orthogonal already, so sorting
    by eigenvalue and normalising yields the system; the most negative
    direction comes first.  Requires a precompact_timelike verdict.
    """
    verdict = precompactness_verdict(metric, sample)
    if verdict.kind != "precompact_timelike":
        raise VerdictError(
            f"orthonormal system needs a precompact_timelike verdict, got {verdict.kind}")
    F = fixed_subspace(sample)
    lam, vecs = np.linalg.eigh(F.gram_restricted)
    if np.any(np.abs(lam) <= eig_tol):
        raise VerdictError("fixed subspace is numerically degenerate")
    cols = []
    for a in range(F.dim):
        w = F.basis @ vecs[:, a] / np.sqrt(abs(lam[a]))
        if a == 0:
            w = _orient_future(sample, w)
        cols.append(w)
    return LorFrame(sample.base.copy(), np.stack(cols))


# ---------------------------------------------------------------------------
# slices, coverings, algebra dimension


def relative_holonomy(metric: ChartMetric, hold: Sequence, base=None,
                      budget: int = 50, seed: int = 0,
                      geodesic_tol: float = SLICE_GEODESIC_TOL):
    """Holonomy of loops constrained to a coordinate slice.

    ``hold`` lists coordinates (names or indices) frozen at their base
    values.  The slice must be spacelike and totally geodesic; violations
    raise SliceError naming the offending Christoffel components.  Returns
    a dict with the sample, fixed subspace, verdict and an invariant
    section with maximal normal component.
    """
    n = metric.n
    held = sorted(metric.coords.index(h) if isinstance(h, str) else int(h)
                  for h in hold)
    if not held or len(set(held)) != len(held) or any(a >= n for a in held):
        raise ValueError(f"bad slice specification {hold!r}")
    tangent = [a for a in range(n) if a not in held]
    if len(tangent) < 2:
        raise SliceError("slice needs at least two tangent directions for loops")
    base = metric.box_center() if base is None else np.asarray(base, dtype=float)

    rng = np.random.default_rng(seed)
    probes = metric.random_points(200, rng)
    probes[:, held] = base[held]
    g = metric.metric_at(probes)
    induced = g[np.ix_(range(len(probes)), tangent, tangent)]
    if np.any(np.linalg.eigvalsh(induced)[:, 0] <= 0):
        raise SliceError("slice is not spacelike on the sampled points")
    gamma = metric.christoffel_at(probes)
    second_form = gamma[np.ix_(range(len(probes)), held, tangent, tangent)]
    worst = float(np.max(np.abs(second_form)))
    if worst > geodesic_tol:
        a, i, j = np.unravel_index(
            np.argmax(np.abs(second_form).max(axis=0)), second_form.shape[1:])
        raise SliceError(
            f"slice is not totally geodesic: |Gamma^{metric.coords[held[a]]}"
            f"_{{{metric.coords[tangent[i]]},{metric.coords[tangent[j]]}}}|"
            f" reaches {worst:.3e}")

    # sample with rectangles confined to the slice
    pairs = [(i, j) for i, j in itertools.combinations(tangent, 2)]
    sizes = np.array([hi - lo for lo, hi in metric.working_box])
    loops = []
    for m in range(budget):
        scale = LOOP_SCALES[m % len(LOOP_SCALES)]
        i, j = pairs[(m // len(LOOP_SCALES)) % len(pairs)]
        a = scale * sizes[i]
        b = scale * sizes[j]
        corner = base.copy()
        for axis in tangent:
            lo, hi = metric.working_box[axis]
            hi_eff = hi - (a if axis == i else b if axis == j else 0.0)
            corner[axis] = rng.uniform(lo, hi_eff)
        loops.append(_lasso_rectangle(base, corner, i, j, a, b))
    mats, errs, conv, steps = transport_polylines(metric, np.stack(loops))
    gens = [TransportResult(mats[q], float(errs[q]),
                            CurveSpec("rectangle", points=loops[q],
                                      label=f"slice-rect {q}"),
                            base.copy(), base.copy(), bool(conv[q]), steps)
            for q in range(len(loops)) if conv[q]]
    sample = HolonomySample(metric.name + "|slice", base, metric.metric_at(base),
                            gens, seed, budget, metric.time_axis_at(base))
    F = fixed_subspace(sample)
    verdict = precompactness_verdict(metric, sample)
    section = None
    normal_norm = 0.0
    normal_rank = 0
    if F.dim:
        normal_block = F.basis[held, :]
        u, s, vh = np.linalg.svd(normal_block)
        normal_rank = int(np.sum(s > 1e-8))
        if normal_rank:
            w = F.basis @ vh[0]
            section = TangentVec(base, w / np.linalg.norm(w))
            normal_norm = float(s[0])
    return {
        "sample": sample,
        "fixed": F,
        "verdict": verdict,
        "section": section,
        "section_normal_norm": normal_norm,
        "normal_rank": normal_rank,
        "second_form_max": worst,
    }


def covering_compare(metric: ChartMetric, budget: int = 50, seed: int = 0) -> dict:
    """Compare holonomy samples of a chart and its identification-stripped cover.

    With a common seed the contractible loops coincide, so each cover
    generator must reappear among the base generators (the covering map
    sends loop transports to loop transports); deck generators are the
    extra elements of the quotient and are reported with their eigenvalues.
    """
    if not metric.identifications:
        raise GeometryError(f"{metric.name!r} has no identifications to strip")
    cover = metric.stripped()
    base_sample = sample_holonomy(metric, budget=budget, seed=seed)
    cover_sample = sample_holonomy(cover, budget=budget, seed=seed)
    deck_idx = set(base_sample.deck_indices())
    contractible = [t for q, t in enumerate(base_sample.generators)
                    if q not in deck_idx]
    dev = 0.0
    matched = 0
    for cov_t in cover_sample.generators:
        best = min(float(np.max(np.abs(cov_t.matrix - t.matrix)))
                   for t in contractible)
        dev = max(dev, best)
        matched += 1
    deck_report = []
    for q in sorted(deck_idx):
        P = base_sample.generators[q].matrix
        ev = np.linalg.eigvals(P)
        deck_report.append({
            "label": base_sample.generators[q].loop.label,
            "eigenvalue_moduli": sorted(np.abs(ev).tolist()),
            "distance_from_identity": float(np.max(np.abs(P - np.eye(metric.n)))),
        })
    return {
        "cover_generator_count": matched,
        "max_embedding_deviation": dev,
        "embedded": dev < 1e-6,
        "deck_generators": deck_report,
        "base_sample": base_sample,
        "cover_sample": cover_sample,
    }


def algebra_report(sample: HolonomySample,
                   log_radius: float = ALGEBRA_LOG_RADIUS,
                   rank_rtol: float = ALGEBRA_RANK_RTOL) -> dict:
    """Dimension of the span of the principal generator logarithms."""
    n = sample.n
    eye = np.eye(n)
    logs = []
    skipped = []
    for t in sample.generators:
        if np.max(np.abs(t.matrix - eye)) > log_radius:
            skipped.append(t.loop.label if t.loop else "?")
            continue
        L = scipy.linalg.logm(t.matrix)
        if np.max(np.abs(L.imag)) > 1e-10:
            skipped.append(t.loop.label if t.loop else "?")
            continue
        logs.append(L.real.reshape(-1))
    if not logs:
        return {"dim": 0, "skipped": skipped, "singular_values": []}
    s = np.linalg.svd(np.stack(logs), compute_uv=False)
    # all-identity samples have only noise-level logs: dimension zero
    if s[0] <= 1e-8:
        return {"dim": 0, "skipped": skipped, "singular_values": s.tolist()}
    dim = int(np.sum(s > rank_rtol * s[0]))
    return {"dim": dim, "skipped": skipped, "singular_values": s.tolist()}


def holonomy_algebra_dim(sample: HolonomySample) -> int:
    return algebra_report(sample)["dim"]
