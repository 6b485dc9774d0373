"""Monte Carlo emulation of the two-party homodyne record.

Pairs (x_A, x_B) are drawn from the Born density
|sum_n c_n e^(i n chi) psi_n(x_A) psi_n(x_B)|^2: x_A from its marginal (a
mixture of |psi_n|^2 weighted by c_n^2) via inverse CDF on a fine grid, then
x_B from the exact conditional density of x_A's grid cell.  Outcomes are
dichotomized by sign.  The per-state tables (marginal CDF and per-cell
conditional CDFs over the marginal's support) are precomputed once and
cached, so repeated seeded runs against one state cost only the draws.

Randomness comes from numpy's counter-based Philox engine; the algorithm name
is recorded in each batch, and a batch is a pure function of its seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bell import hermite_basis
from .fock_core import CoefficientVector

GENERATOR_NAME = "philox4x64"
GRID_POINTS = 2 ** 14
GRID_HALF_WIDTH = 12.0
_SUPPORT_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Sign-binned counts of one seeded batch at one angle pair."""

    seed: int
    n_samples: int
    theta: float
    phi: float
    counts: np.ndarray            # 2x2, rows = A sign (+,-), cols = B sign (+,-)
    generator: str = GENERATOR_NAME
    samples: np.ndarray | None = None   # optional raw (x_A, x_B) pairs

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (2, 2) or int(c.sum()) != self.n_samples:
            raise ValueError("counts must form a 2x2 table summing to n_samples")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def chi(self) -> float:
        return self.theta + self.phi

    def correlation(self) -> float:
        c = self.counts
        return float(c[0, 0] + c[1, 1] - c[0, 1] - c[1, 0]) / self.n_samples

    def p_plus_plus(self) -> float:
        return float(self.counts[0, 0]) / self.n_samples


class _SamplerPlan:
    """Precomputed inverse-CDF tables for one (state, chi) pair."""

    def __init__(self, coeffs: np.ndarray, chi: float,
                 grid_points: int = GRID_POINTS, half_width: float = GRID_HALF_WIDTH):
        k = coeffs.size
        self.edges = np.linspace(-half_width, half_width, grid_points + 1)
        self.dx = self.edges[1] - self.edges[0]
        centers = 0.5 * (self.edges[:-1] + self.edges[1:])
        V = hermite_basis(k - 1, centers)
        marginal = (coeffs[:, None] ** 2 * V ** 2).sum(axis=0)
        mass = np.cumsum(marginal)
        self.marginal_cdf = mass / mass[-1]
        lo = int(np.searchsorted(self.marginal_cdf, _SUPPORT_EPS))
        hi = int(np.searchsorted(self.marginal_cdf, 1.0 - _SUPPORT_EPS)) + 1
        self.support = (lo, hi)
        # Conditional CDF row for every support cell, chunked to bound memory.
        phased = (coeffs * np.exp(1j * chi * np.arange(k)))[:, None] * V
        V_c = V.astype(complex)
        rows = np.empty((hi - lo, grid_points), dtype=np.float32)
        for start in range(lo, hi, 1024):
            stop = min(start + 1024, hi)
            amp = phased[:, start:stop].T @ V_c
            dens = np.abs(amp) ** 2
            cdf = np.cumsum(dens, axis=1)
            rows[start - lo:stop - lo] = (cdf / cdf[:, -1:]).astype(np.float32)
        self.conditional_cdf = rows


@lru_cache(maxsize=4)
def _plan_for(coeff_bytes: bytes, k: int, chi: float) -> _SamplerPlan:
    coeffs = np.frombuffer(coeff_bytes, dtype=float, count=k)
    return _SamplerPlan(coeffs, chi)


def _lower_bound_rows(rows: np.ndarray, row_idx: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Vectorized per-row lower-bound binary search: first j with rows[r, j] >= t."""
    lo = np.zeros(targets.size, dtype=np.int64)
    hi = np.full(targets.size, rows.shape[1] - 1, dtype=np.int64)
    while np.any(lo < hi):
        mid = (lo + hi) // 2
        below = rows[row_idx, mid] < targets
        lo = np.where(below, mid + 1, lo)
        hi = np.where(below, hi, mid)
    return lo


def _invert_cells(cdf_vals_prev, cdf_vals_at, idx, edges, dx, u):
    span = cdf_vals_at - cdf_vals_prev
    frac = np.where(span > 0, (u - cdf_vals_prev) / np.where(span > 0, span, 1.0), 0.5)
    return edges[idx] + np.clip(frac, 0.0, 1.0) * dx


def sample_joint(v: CoefficientVector, chi: float, n: int, seed: int,
                 keep_samples: bool = False) -> SampleBatch:
    """Draw n i.i.d. quadrature pairs and bin their signs.

    Deterministic for a given seed.  The angle pair is recorded as
    (theta, phi) = (chi, 0); only the sum enters the statistics.
    """
    c = v.coeffs
    n2 = float(np.dot(c, c))
    if abs(n2 - 1.0) > 1e-8:
        raise ValueError("sampling requires a normalized state")
    if n < 1:
        raise ValueError("need at least one sample")
    plan = _plan_for(c.tobytes(), c.size, float(chi))
    rng = np.random.Generator(np.random.Philox(seed))
    u_a = rng.random(n)
    u_b = rng.random(n)

    ia = np.searchsorted(plan.marginal_cdf, u_a)
    ia = np.clip(ia, plan.support[0], plan.support[1] - 1)
    prev_a = np.where(ia > 0, plan.marginal_cdf[np.maximum(ia - 1, 0)], 0.0)
    x_a = _invert_cells(prev_a, plan.marginal_cdf[ia], ia, plan.edges, plan.dx, u_a)

    rows = plan.conditional_cdf
    ridx = ia - plan.support[0]
    jb = _lower_bound_rows(rows, ridx, u_b.astype(np.float32))
    prev_b = np.where(jb > 0, rows[ridx, np.maximum(jb - 1, 0)], 0.0)
    x_b = _invert_cells(prev_b, rows[ridx, jb], jb, plan.edges, plan.dx, u_b)

    plus_a = x_a >= 0
    plus_b = x_b >= 0
    counts = np.array([
        [int(np.sum(plus_a & plus_b)), int(np.sum(plus_a & ~plus_b))],
        [int(np.sum(~plus_a & plus_b)), int(np.sum(~plus_a & ~plus_b))],
    ])
    samples = np.column_stack([x_a, x_b]) if keep_samples else None
    return SampleBatch(seed=seed, n_samples=n, theta=float(chi), phi=0.0,
                       counts=counts, samples=samples)


@dataclass(frozen=True)
class BEstimate:
    """Sampled CHSH estimate with its standard error."""

    b: float
    stderr: float
    batch_chi: SampleBatch
    batch_3chi: SampleBatch


def estimate_B(v: CoefficientVector, chi: float, n: int, seed: int) -> BEstimate:
    """Estimate B = 3 E(chi) - E(3 chi) from two independent sampled batches.

    Child seeds are spawned deterministically from `seed`; the standard error
    combines the binomial variances (1 - E^2)/n of the two correlations.
    """
    child_a, child_b = (int(s) for s in
                        np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64))
    batch1 = sample_joint(v, chi, n, seed=child_a)
    batch3 = sample_joint(v, 3.0 * chi, n, seed=child_b)
    e1, e3 = batch1.correlation(), batch3.correlation()
    var = 9.0 * (1.0 - e1 * e1) / n + (1.0 - e3 * e3) / n
    return BEstimate(b=3.0 * e1 - e3, stderr=float(np.sqrt(var)),
                     batch_chi=batch1, batch_3chi=batch3)
