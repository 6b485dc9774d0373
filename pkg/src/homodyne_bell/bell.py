"""Quadrature wavefunctions, half-line overlaps, and the CHSH/CH functionals.

Homodyne outcomes are dichotomized by sign.  For a state sum_n c_n |n,n> with
real c_n, the probability that both parties see a nonnegative quadrature
depends only on the angle sum chi = theta + phi and reduces to

    P++(chi) = sum_{n,m} c_n c_m cos((n - m) chi) G_nm^2,

where G_nm = integral_0^inf psi_n(x) psi_m(x) dx over orthonormal oscillator
wavefunctions.  The dimensionless quadrature convention is immaterial because
sign binning is scale invariant.  From the marginals P+ = 1/2 and the parity
relations, E(chi) = 4 P++(chi) - 1, the CHSH combination becomes
B = 3 E(chi) - E(3 chi) and the CH combination S = 3 P++(chi) - P++(3 chi),
tied by S = B/4 + 1/2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .fock_core import CoefficientVector

_EVAL_NORM_TOL = 1e-8
_QUAD_POINTS = 800


def hermite_wavefunction(n: int, x):
    """Orthonormal oscillator wavefunction psi_n(x) = H_n(x) e^(-x^2/2) / sqrt(2^n n! sqrt(pi)).

    Evaluated by the stable three-term recurrence on the normalized functions;
    accepts scalars or arrays.
    """
    if n < 0:
        raise ValueError("wavefunction index must be nonnegative")
    xs = np.asarray(x, dtype=float)
    basis = hermite_basis(n, np.atleast_1d(xs))
    out = basis[n]
    return float(out[0]) if xs.ndim == 0 else out.reshape(xs.shape)


def hermite_basis(n_max: int, xs: np.ndarray) -> np.ndarray:
    """All psi_0..psi_n_max on a grid, shape (n_max+1, len(xs))."""
    out = np.empty((n_max + 1, xs.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * xs ** 2)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * xs * out[0]
    for n in range(1, n_max):
        out[n + 1] = (np.sqrt(2.0 / (n + 1)) * xs * out[n]
                      - np.sqrt(n / (n + 1.0)) * out[n - 1])
    return out


def quadrature_grid(n_max: int, x_max: float | None = None, points: int = _QUAD_POINTS):
    """Gauss-Legendre nodes/weights on [0, x_max] covering psi_{n_max} mass to < 1e-14."""
    if x_max is None:
        x_max = max(12.0, np.sqrt(2.0 * n_max + 1.0) + 6.0)
    x, w = leggauss(points)
    return 0.5 * x_max * (x + 1.0), 0.5 * x_max * w


@dataclass(frozen=True, eq=False)
class OverlapTable:
    """Symmetric matrix of half-line overlaps G_nm = integral_0^inf psi_n psi_m dx."""

    G: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.G, dtype=float)
        g = np.array(g, copy=True)
        g.setflags(write=False)
        object.__setattr__(self, "G", g)

    @property
    def size(self) -> int:
        return self.G.shape[0] - 1


@lru_cache(maxsize=64)
def _overlap_matrix(n_max: int) -> np.ndarray:
    xs, ws = quadrature_grid(n_max)
    V = hermite_basis(n_max, xs)
    G = (V * ws) @ V.T
    G = 0.5 * (G + G.T)
    G.setflags(write=False)
    return G


def overlap_table(n_max: int) -> OverlapTable:
    """Overlap table for indices 0..n_max (cached)."""
    if n_max < 0:
        raise ValueError("table size must be nonnegative")
    return OverlapTable(_overlap_matrix(n_max))


@dataclass(frozen=True)
class BellAngles:
    """Local-oscillator phase settings (theta_1, theta_2) for A, (phi_1, phi_2) for B."""

    theta1: float = 0.0
    theta2: float = np.pi / 2
    phi1: float = -np.pi / 4
    phi2: float = np.pi / 4


def _checked_coeffs(v: CoefficientVector) -> np.ndarray:
    c = v.coeffs
    n2 = float(np.dot(c, c))
    if abs(n2 - 1.0) > _EVAL_NORM_TOL:
        raise ValueError(f"Bell evaluation needs a normalized state (norm^2 = {n2!r})")
    return c / np.sqrt(n2)


def _quadrant_sum(c: np.ndarray, chi: float, lower: bool = False) -> float:
    k = c.size
    G = _overlap_matrix(k - 1)[:k, :k]
    d = np.subtract.outer(np.arange(k), np.arange(k))
    M = np.cos(d * chi) * G * G
    if lower:
        M = M * np.where(d % 2 == 0, 1.0, -1.0)
    return float(c @ M @ c)


def p_plus_plus(v: CoefficientVector, chi: float) -> float:
    """Joint probability that both homodyne outcomes are nonnegative, at angle sum chi."""
    return _quadrant_sum(_checked_coeffs(v), chi, lower=False)


def marginal_plus(v: CoefficientVector, theta: float) -> float:
    """Single-party sign probability P+(theta): upper plus lower quadrant sum.

    Equals 1/2 for every photon-number-correlated state, independent of angle.
    """
    c = _checked_coeffs(v)
    return _quadrant_sum(c, theta, lower=False) + _quadrant_sum(c, theta, lower=True)


def correlation_E(v: CoefficientVector, chi: float) -> float:
    """Correlation E = P++ + P-- - P+- - P-+ at angle sum chi."""
    c = _checked_coeffs(v)
    upper = _quadrant_sum(c, chi, lower=False)   # P++ = P--
    mixed = _quadrant_sum(c, chi, lower=True)    # P+- = P-+
    return 2.0 * (upper - mixed)


def chsh_B(v: CoefficientVector, chi: float) -> float:
    """CHSH combination B = 3 E(chi) - E(3 chi); |B| <= 2 for local models."""
    return 3.0 * correlation_E(v, chi) - correlation_E(v, 3.0 * chi)


def ch_S(v: CoefficientVector, chi: float) -> float:
    """CH combination S = 3 P++(chi) - P++(3 chi); |S| <= 1 for local realism."""
    return 3.0 * p_plus_plus(v, chi) - p_plus_plus(v, 3.0 * chi)


def ch_ratio_literal(v: CoefficientVector, angles: BellAngles = BellAngles()) -> float:
    """The four-angle CH ratio evaluated literally from the angle list.

    [P++(t1+f1) - P++(t1+f2) + P++(t2+f1) + P++(t2+f2)] / [P+(t2) + P+(f1)].
    For the default angle list this is P++(pi/4) + P++(3 pi/4), which differs
    from the simplified ch_S; the gap is diagnostic, not an error.
    """
    num = (p_plus_plus(v, angles.theta1 + angles.phi1)
           - p_plus_plus(v, angles.theta1 + angles.phi2)
           + p_plus_plus(v, angles.theta2 + angles.phi1)
           + p_plus_plus(v, angles.theta2 + angles.phi2))
    den = marginal_plus(v, angles.theta2) + marginal_plus(v, angles.phi1)
    return num / den


def p_plus_plus_quadrature_oracle(v: CoefficientVector, chi: float,
                                  x_max: float | None = None, points: int = 400,
                                  scale: float = 1.0) -> float:
    """Direct 2-D quadrature of |sum_n c_n e^(i n chi) psi_n(x) psi_n(y)|^2
    over the positive quadrant.

    `scale` rescales the quadrature convention (psi_n(x) -> sqrt(s) psi_n(s x))
    to exhibit the scale invariance of sign binning.  Independent of the
    closed-form reduction; used as its oracle.
    """
    c = _checked_coeffs(v)
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    n_max = c.size - 1
    if x_max is None:
        x_max = max(12.0, np.sqrt(2.0 * n_max + 1.0) + 6.0) / scale
    xs, ws = quadrature_grid(n_max, x_max=x_max, points=points)
    V = np.sqrt(scale) * hermite_basis(n_max, scale * xs)
    phases = c * np.exp(1j * chi * np.arange(c.size))
    amp = (V * phases[:, None]).T @ V    # amp[i, j] = sum_n c_n e^{in chi} psi_n(x_i) psi_n(y_j)
    dens = np.abs(amp) ** 2
    return float(ws @ dens @ ws)


@dataclass(frozen=True)
class BellReport:
    """Bell functional evaluation of one state at one angle sum."""

    chi: float
    p_pp_chi: float
    p_pp_3chi: float
    E_chi: float
    E_3chi: float
    B: float
    S: float
    cutoff: int
    provenance: str

    _FIELDS = ("chi", "p_pp_chi", "p_pp_3chi", "E_chi", "E_3chi",
               "B", "S", "cutoff", "provenance")

    def __post_init__(self):
        for name in ("p_pp_chi", "p_pp_3chi"):
            p = getattr(self, name)
            if not -1e-10 <= p <= 1.0 + 1e-10:
                raise ValueError(f"{name} = {p!r} is not a probability")
        for name in ("E_chi", "E_3chi"):
            if abs(getattr(self, name)) > 1.0 + 1e-10:
                raise ValueError(f"{name} out of [-1, 1]")
        if abs(self.S - (self.B / 4.0 + 0.5)) > 1e-10:
            raise ValueError("CH/CHSH identity S = B/4 + 1/2 violated")

    def to_json(self) -> str:
        pairs = []
        for name in self._FIELDS:
            val = getattr(self, name)
            if isinstance(val, float):
                pairs.append(f'  "{name}": {val:.12g}')
            else:
                pairs.append(f'  "{name}": {json.dumps(val)}')
        return "{\n" + ",\n".join(pairs) + "\n}\n"

    def to_csv(self) -> str:
        header = ",".join(self._FIELDS)
        vals = []
        for name in self._FIELDS:
            val = getattr(self, name)
            if isinstance(val, float):
                vals.append(f"{val:.12g}")
            elif isinstance(val, str) and ("," in val or '"' in val):
                vals.append('"' + val.replace('"', '""') + '"')
            else:
                vals.append(str(val))
        return header + "\n" + ",".join(vals) + "\n"


def bell_report(v: CoefficientVector, chi: float, provenance: str | None = None) -> BellReport:
    """Evaluate P++, E, B and S for one state at chi (and 3 chi)."""
    p1 = p_plus_plus(v, chi)
    p3 = p_plus_plus(v, 3.0 * chi)
    e1 = correlation_E(v, chi)
    e3 = correlation_E(v, 3.0 * chi)
    return BellReport(chi=chi, p_pp_chi=p1, p_pp_3chi=p3, E_chi=e1, E_3chi=e3,
                      B=3.0 * e1 - e3, S=3.0 * p1 - p3, cutoff=v.cutoff,
                      provenance=v.provenance if provenance is None else provenance)
