"""Closed-form coefficient generators for the named state families.

Families (amplitudes of sum_n c_n |n,n>):

* two-mode squeezed state:       c_n = lambda^n sqrt(1 - lambda^2)
* circle state:                  c_n = r^(2n) / (n! sqrt(I0(2 r^2)))
* photon-subtracted squeezed:    c_n = sqrt((1-lambda^2)^3 / (1+lambda^2)) (n+1) lambda^n
* two-term seed:                 (|0,0> + xi |1,1>) / sqrt(1 + xi^2)

Generators renormalize the truncated tail (the discarded mass is below the
tail tolerance at auto-selected cutoffs, so printed-formula values survive to
better than 1e-12).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log

import numpy as np

from .fock_core import TAIL_TOL, CoefficientVector, normalize

HARD_CUTOFF_CAP = 64


def bessel_i0(x: float) -> float:
    """Modified Bessel I0 by its power series with term-ratio recurrence.

    Arguments used here stay below ~20, where the series converges quickly.
    """
    if x < 0:
        raise ValueError("I0 series implemented for x >= 0")
    term = 1.0
    total = 1.0
    k = 0
    while term > 1e-18 * total:
        k += 1
        term *= (x * x / 4.0) / (k * k)
        total += term
        if k > 1000:
            raise ValueError(f"I0 series failed to converge for x = {x!r}")
    return total


def _auto_cutoff(log_coeff, cutoff: int | None) -> int:
    """Smallest N with c_N^2 < tail tolerance, capped; or the explicit cutoff."""
    if cutoff is not None:
        if cutoff < 0:
            raise ValueError("cutoff must be nonnegative")
        return cutoff
    for n in range(1, HARD_CUTOFF_CAP + 1):
        if 2.0 * log_coeff(n) < log(TAIL_TOL):
            return n
    return HARD_CUTOFF_CAP


def tmss(lam: float, cutoff: int | None = None) -> CoefficientVector:
    """Two-mode squeezed state with lambda = tanh(squeezing), 0 <= lambda < 1."""
    if not 0.0 <= lam < 1.0:
        raise ValueError("squeezing parameter lambda must lie in [0, 1)")
    if lam == 0.0:
        n_max = cutoff if cutoff is not None else 1
        c = np.zeros(n_max + 1)
        c[0] = 1.0
        return CoefficientVector(c, normalized=True, provenance="tmss(0)")
    n_max = _auto_cutoff(lambda n: n * log(lam), cutoff)
    n = np.arange(n_max + 1)
    c = lam ** n * np.sqrt(1.0 - lam * lam)
    v = normalize(CoefficientVector(c))
    return CoefficientVector(v.coeffs, normalized=True, provenance=f"tmss({lam:g})")


def circle(r: float, cutoff: int | None = None) -> CoefficientVector:
    """Circle state; the printed form is self-normalizing via sum r^(4n)/(n!)^2 = I0(2 r^2)."""
    if r < 0:
        raise ValueError("circle parameter r must be nonnegative")
    if r == 0.0:
        n_max = cutoff if cutoff is not None else 1
        c = np.zeros(n_max + 1)
        c[0] = 1.0
        return CoefficientVector(c, normalized=True, provenance="circle(0)")
    n_max = _auto_cutoff(lambda n: 2 * n * log(r) - lgamma(n + 1) - 0.5 * log(bessel_i0(2 * r * r)),
                         cutoff)
    n = np.arange(n_max + 1)
    logc = 2 * n * log(r) - np.array([lgamma(k + 1) for k in n])
    c = np.exp(logc) / np.sqrt(bessel_i0(2.0 * r * r))
    v = normalize(CoefficientVector(c))
    return CoefficientVector(v.coeffs, normalized=True, provenance=f"circle({r:g})")


def ps_tmss(lam: float, cutoff: int | None = None) -> CoefficientVector:
    """Photon-subtracted two-mode squeezed state."""
    if not 0.0 <= lam < 1.0:
        raise ValueError("squeezing parameter lambda must lie in [0, 1)")
    if lam == 0.0:
        n_max = cutoff if cutoff is not None else 1
        c = np.zeros(n_max + 1)
        c[0] = 1.0
        return CoefficientVector(c, normalized=True, provenance="ps_tmss(0)")
    n_max = _auto_cutoff(lambda n: log(n + 1.0) + n * log(lam), cutoff)
    n = np.arange(n_max + 1)
    c = np.sqrt((1.0 - lam * lam) ** 3 / (1.0 + lam * lam)) * (n + 1) * lam ** n
    v = normalize(CoefficientVector(c))
    return CoefficientVector(v.coeffs, normalized=True, provenance=f"ps_tmss({lam:g})")


def seed(xi: float, cutoff: int | None = None) -> CoefficientVector:
    """Normalized two-term state (1, xi)/sqrt(1 + xi^2), zero-padded."""
    if xi < 0:
        raise ValueError("seed parameter xi must be nonnegative")
    n_max = cutoff if cutoff is not None else 2
    if n_max < 1 and xi > 0:
        raise ValueError("seed needs cutoff >= 1 to hold the |1,1> term")
    c = np.zeros(n_max + 1)
    c[0] = 1.0
    if xi > 0:
        c[1] = xi
    c /= np.sqrt(1.0 + xi * xi)
    return CoefficientVector(c, normalized=True, provenance=f"seed({xi:g})")


def seed_transmissivity(xi: float, lam: float) -> float:
    """|T(lambda)| = |xi - sqrt(xi^2 + 8 lambda^2)| / (4 lambda).

    Small-lambda limit lambda/xi.  Singular at lambda = 0.
    """
    if lam <= 0.0:
        raise ValueError("transmissivity formula is singular at lambda = 0")
    return abs(xi - np.sqrt(xi * xi + 8.0 * lam * lam)) / (4.0 * lam)


_FAMILIES = ("tmss", "circle", "ps_tmss", "seed", "custom")


@dataclass(frozen=True)
class CatalogSpec:
    """A named state family plus its parameter, resolvable to coefficients."""

    family: str
    parameter: float | None = None
    path: str | None = None
    cutoff: int | None = None

    def __post_init__(self):
        fam = self.family.replace("-", "_")
        object.__setattr__(self, "family", fam)
        if fam not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {_FAMILIES}")
        if fam == "custom":
            if not self.path:
                raise ValueError("custom family requires a state-file path")
        elif self.parameter is None:
            raise ValueError(f"family {fam!r} requires a parameter")

    def build(self) -> CoefficientVector:
        if self.family == "tmss":
            return tmss(self.parameter, self.cutoff)
        if self.family == "circle":
            return circle(self.parameter, self.cutoff)
        if self.family == "ps_tmss":
            return ps_tmss(self.parameter, self.cutoff)
        if self.family == "seed":
            return seed(self.parameter, self.cutoff)
        from .fock_core import read_state_file
        return read_state_file(self.path)
