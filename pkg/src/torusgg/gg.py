"""Sampled global-generation verdicts for line bundles and pushforward bundles.

At a sample point the evaluation matrix of the sections onto the fiber is
assembled from normalized section values (metric-unit fiber frames), so
its singular values are comparable across points. The margin at a point is
the smallest singular value divided by the largest singular value seen over
the whole sample set. A GENERATED verdict is evidence at the samples only.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .appell_humbert import LineBundleData, is_ample, tensor_power
from .errors import NotAmple
from .lattice import Isogeny, Torus, lcm, reduce_mod_lattice
from .semihomogeneous import SHBundle, from_pushforward, is_ample_sh, sh_h0, tensor_power_sections
from .theta import TruncationParams, section_basis

FULL_RANK = 1e-6
HARD_ZERO = 1e-10
REFINE_ITERATIONS = 200
GENERATED = "GENERATED_AT_ALL_SAMPLES"
BASE_POINT = "BASE_POINT_FOUND"
INCONCLUSIVE = "INCONCLUSIVE"
_GOLDEN = (math.sqrt(5) - 1) / 2
_MAX_WITNESSES = 32
_CHUNK = 4096


@dataclass(frozen=True)
class SampleStrategy:
    grid_n: int = 1
    torsion_order: int = 0
    extra_points: tuple = ()
    refinement: bool = True

    def __post_init__(self):
        if self.grid_n < 1:
            raise ValueError("grid_n must be at least 1")
        if self.torsion_order < 0:
            raise ValueError("torsion_order must be nonnegative")

    def denominator(self) -> int:
        return lcm(self.grid_n, *range(1, self.torsion_order + 1))

    def coords(self, T: Torus) -> np.ndarray:
        """Lattice coordinates of all sample points, ``(N, 2g)``, in canonical order.

        Grid and torsion points are integer numerators over a common
        denominator, deduplicated and sorted lexicographically; extra points
        follow in sorted order.
        """
        dim = 2 * T.g
        D = self.denominator()
        parts = []
        for j in [self.grid_n, *range(1, self.torsion_order + 1)]:
            ks = np.indices((j,) * dim).reshape(dim, -1).T
            parts.append(ks * (D // j))
        nums = np.unique(np.concatenate(parts), axis=0)
        out = nums / D
        if self.extra_points:
            extras = []
            for p in self.extra_points:
                x = T.lattice_coords(np.asarray(p, dtype=complex).reshape(T.g))
                extras.append(tuple(float(t) for t in x - np.floor(x)))
            out = np.concatenate([out, np.array(sorted(extras))])
        return out

    def to_dict(self) -> dict:
        return {
            "grid_n": self.grid_n,
            "torsion_order": self.torsion_order,
            "extra_points": len(self.extra_points),
            "refinement": self.refinement,
        }


@dataclass
class EvaluationReport:
    samples: int
    verdict: str
    min_margin: float
    median_margin: float
    sigma_ref: float
    uncertainty: float
    h0: int
    fiber_rank: int
    witnesses: list = field(default_factory=list)
    witness_count: int = 0
    refined: dict | None = None
    full_rank_samples: int = 0
    reason: str = ""
    radius: int | None = None
    tail_bound: float | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "samples": self.samples,
            "h0": self.h0,
            "fiber_rank": self.fiber_rank,
            "full_rank_samples": self.full_rank_samples,
            "min_margin": self.min_margin,
            "median_margin": self.median_margin,
            "sigma_ref": self.sigma_ref,
            "uncertainty": self.uncertainty,
            "witness_count": self.witness_count,
            "witnesses": self.witnesses,
            "refined": self.refined,
            "reason": self.reason,
            "radius": self.radius,
            "tail_bound": self.tail_bound,
        }


class _Evaluator:
    """Blocks of normalized evaluation matrices at points of the base torus.

    ``blocks`` is a list of ``(basis, lift)``; ``lift`` maps base points
    ``(P, g)`` to the ``(P, r, g)`` array of fiber preimages.
    """

    def __init__(self, torus: Torus, blocks, rank: int, tp: TruncationParams, threads: int = 1):
        self.torus = torus
        self.blocks = blocks
        self.rank = rank
        self.tp = tp
        self.threads = max(1, int(threads))

    @property
    def h0(self) -> int:
        return sum(len(b) for b, _ in self.blocks)

    def singular_values(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-point smallest and largest singular value of the block-diagonal matrix."""
        chunks = [points[i : i + _CHUNK] for i in range(0, points.shape[0], _CHUNK)]
        if self.threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(self.threads) as pool:
                parts = list(pool.map(self._chunk, chunks))
        else:
            parts = [self._chunk(c) for c in chunks]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

    def _chunk(self, pts: np.ndarray):
        smin = np.full(pts.shape[0], np.inf)
        smax = np.zeros(pts.shape[0])
        for basis, lift in self.blocks:
            lifted = lift(pts)
            P, r, g = lifted.shape
            vals = basis.evaluate(lifted.reshape(P * r, g), self.tp, normalized=True)
            mats = vals.reshape(P, r, -1)
            sv = np.linalg.svd(mats, compute_uv=False)
            smin = np.minimum(smin, sv[:, -1])
            smax = np.maximum(smax, sv[:, 0])
        return smin, smax

    def radius(self) -> int:
        return max(b.certified_radius(self.tp) for b, _ in self.blocks)


def _golden_min(f, lo: float, hi: float, budget: int, tol: float):
    """Golden-section minimisation on ``[lo, hi]``; returns ``(x, f(x), iterations)``."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    used = 0
    while used < budget and b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
        used += 1
    return (c, fc, used) if fc < fd else (d, fd, used)


def _refine(ev: _Evaluator, start: np.ndarray, start_margin: float, sigma_ref: float, width: float):
    """Coordinate-wise golden-section descent on the margin over real coordinates of ``V``."""
    g = ev.torus.g
    x = np.concatenate([start.real, start.imag])

    def margin(y):
        v = (y[:g] + 1j * y[g:]).reshape(1, g)
        return float(ev.singular_values(v)[0][0] / sigma_ref)

    best = start_margin
    remaining = REFINE_ITERATIONS
    h = width
    while remaining > 0 and best > HARD_ZERO * 1e-3:
        improved = False
        for k in range(2 * g):
            if remaining <= 0:
                break

            def line(t, k=k):
                y = x.copy()
                y[k] = t
                return margin(y)

            t, val, used = _golden_min(line, x[k] - h, x[k] + h, remaining, 1e-14 * max(1.0, abs(x[k])))
            remaining -= max(used, 1)
            if val < best:
                x[k] = t
                best = val
                improved = True
        if not improved:
            break
        h = h / 4
    point = x[:g] + 1j * x[g:]
    return point, best, REFINE_ITERATIONS - remaining


def _point_dict(T: Torus, coords, margin: float) -> dict:
    v = T.point(np.array(coords, dtype=float))
    return {
        "coords": [float(c) for c in coords],
        "point": [[float(z.real), float(z.imag)] for z in v],
        "margin": float(margin),
    }


def _run(ev: _Evaluator, s: SampleStrategy, blocks_dims) -> EvaluationReport:
    T = ev.torus
    coords = s.coords(T)
    points = coords @ T.period_matrix.T
    r = ev.rank
    h0 = ev.h0
    deficient = [d for d in blocks_dims if d < r]
    if deficient:
        first = _point_dict(T, coords[0], 0.0)
        return EvaluationReport(
            samples=len(coords),
            verdict=BASE_POINT,
            min_margin=0.0,
            median_margin=0.0,
            sigma_ref=0.0,
            uncertainty=0.0,
            h0=h0,
            fiber_rank=r * len(blocks_dims),
            witnesses=[first],
            witness_count=len(coords),
            reason=f"dimension count: a summand has {min(deficient)} sections for fiber rank {r}; deficient at every point",
            radius=ev.radius(),
            tail_bound=ev.tp.tail_bound,
        )
    smin, smax = ev.singular_values(points)
    sigma_ref = float(smax.max())
    margins = smin / sigma_ref
    largest_block = max(blocks_dims)
    delta = ev.tp.tail_bound * math.sqrt(largest_block * r) / sigma_ref
    order = np.argsort(margins, kind="stable")
    low = [int(i) for i in order if margins[i] < FULL_RANK]
    witnesses = [_point_dict(T, coords[i], margins[i]) for i in low[:_MAX_WITNESSES]]
    min_margin = float(margins.min())
    report = EvaluationReport(
        samples=len(coords),
        verdict=INCONCLUSIVE,
        min_margin=min_margin,
        median_margin=float(np.median(margins)),
        sigma_ref=sigma_ref,
        uncertainty=delta,
        h0=h0,
        fiber_rank=r * len(blocks_dims),
        witnesses=witnesses,
        witness_count=len(low),
        full_rank_samples=int(np.sum(margins - delta > FULL_RANK)),
        radius=ev.radius(),
        tail_bound=ev.tp.tail_bound,
    )
    if min_margin - delta > FULL_RANK:
        report.verdict = GENERATED
        report.reason = "full rank at every sample"
        return report
    worst = int(order[0])
    best_point, best_margin = points[worst], min_margin
    if s.refinement:
        width = float(np.abs(T.period_matrix).max()) / max(s.grid_n, 2)
        best_point, best_margin, used = _refine(ev, points[worst], min_margin, sigma_ref, width)
        x = T.lattice_coords(reduce_mod_lattice(T, best_point))
        report.refined = {**_point_dict(T, x, best_margin), "iterations": used}
    if best_margin + delta < HARD_ZERO:
        report.verdict = BASE_POINT
        report.reason = "refined margin below the hard-zero threshold"
    else:
        report.reason = "margin between the hard-zero and full-rank thresholds"
    return report


def check_gg_line(L: LineBundleData, s: SampleStrategy, tp: TruncationParams | None = None, threads: int = 1) -> EvaluationReport:
    if not is_ample(L):
        raise NotAmple("global generation is checked for ample bundles")
    tp = tp or TruncationParams()
    B = section_basis(L)
    g = L.g
    ev = _Evaluator(L.torus, [(B, lambda pts: pts.reshape(-1, 1, g))], 1, tp, threads)
    return _run(ev, s, [len(B)])


def check_gg_bundle(E: SHBundle, m: int, s: SampleStrategy, tp: TruncationParams | None = None, threads: int = 1) -> EvaluationReport:
    """Evaluation-rank check of ``E^{(x) m}`` for a pushforward ``E = p_* L``."""
    if not is_ample_sh(E):
        raise NotAmple("global generation is checked for ample bundles")
    tp = tp or TruncationParams()
    summands = tensor_power_sections(E, m)
    p = E.realization.isogeny
    kernel = np.array(E.kernel_data.points)
    alpha_inv = np.linalg.inv(p.linear_map)
    src = p.source

    def lift(pts):
        u = pts @ alpha_inv.T
        x = src.lattice_coords(u)
        b0 = (x - np.floor(x)) @ src.period_matrix.T
        return b0[:, None, :] + kernel[None, :, :]

    ev = _Evaluator(E.torus, [(t.basis, lift) for t in summands], E.rank, tp, threads)
    return _run(ev, s, [t.h0 for t in summands])


def lefschetz_suite(L: LineBundleData, s: SampleStrategy | None = None, tp: TruncationParams | None = None, threads: int = 1) -> dict:
    """Powers 1, 2, 3 of a principal bundle: base point for ``L``, generated for the square and cube."""
    s = s or SampleStrategy(grid_n=20, torsion_order=4)
    reports = {m: check_gg_line(tensor_power(L, m), s, tp, threads) for m in (1, 2, 3)}
    principal = all(d == 1 for d in L.divisors)
    checks = {
        "square_generated": reports[2].verdict == GENERATED and reports[2].min_margin > 1e-4,
        "cube_generated": reports[3].verdict == GENERATED and reports[3].min_margin > 1e-4,
    }
    if principal:
        refined = reports[1].refined
        checks["base_point_found"] = (
            reports[1].verdict == BASE_POINT and refined is not None and refined["margin"] < 1e-8
        )
    return {
        "checks": checks,
        "passed": all(checks.values()),
        "reports": {f"power_{m}": rep.to_dict() for m, rep in reports.items()},
    }


def tensor_square_suite(p: Isogeny, L: LineBundleData, grid_n: int = 20, tp: TruncationParams | None = None, threads: int = 1) -> dict:
    E = from_pushforward(p, L)
    # Euler characteristic of the rank r^2 bundle E (x) E: 2^g r chi(E)
    summands = tensor_power_sections(E, 2)
    h0_total = sum(t.h0 for t in summands)
    rep = check_gg_bundle(E, 2, SampleStrategy(grid_n=grid_n, refinement=False), tp, threads)
    rank = E.rank**2
    checks = {
        "h0_square": h0_total == 2**E.torus.g * E.rank * sh_h0(E),
        "fiber_rank_everywhere": rep.full_rank_samples == rep.samples and rep.fiber_rank == rank,
        "margin": rep.min_margin > 1e-5,
    }
    return {
        "h0_square": h0_total,
        "fiber_rank": rank,
        "checks": checks,
        "passed": all(checks.values()),
        "report": rep.to_dict(),
    }


def remark_gg_prim_suite(p: Isogeny, theta: LineBundleData, tp: TruncationParams | None = None) -> dict:
    """``p_* Theta`` with ``h0 = 1`` below the rank is deficient everywhere."""
    E = from_pushforward(p, theta)
    rep = check_gg_bundle(E, 1, SampleStrategy(grid_n=4, refinement=False), tp)
    checks = {"h0_below_rank": rep.h0 < E.rank, "base_point": rep.verdict == BASE_POINT}
    return {"h0": rep.h0, "rank": E.rank, "checks": checks, "passed": all(checks.values()), "report": rep.to_dict()}
