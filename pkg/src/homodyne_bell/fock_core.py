"""Truncated Fock-space state containers and metrics.

A two-mode state correlated in photon number, sum_n c_n |n,n>, is stored as a
CoefficientVector holding the real amplitudes c_0..c_N.  Beam-splitter action
breaks the |n,n> correlation mid-computation, so a general two-mode pure state
is kept as a dense TwoModeAmplitudeMatrix, and the four-mode heralding
verification uses a rank-4 FourModeTensor.  Conditioning on an on/off detector
produces a ConditionalEnsemble: a weighted list of post-measurement pure
states plus the total success probability.

All containers are immutable after construction; arrays are stored with the
write flag cleared so values can be shared freely between workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-10
TAIL_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """Real amplitudes c_0..c_N of a photon-number-correlated two-mode state."""

    coeffs: np.ndarray
    normalized: bool = False
    provenance: str = ""

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficient vector must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficient vector contains non-finite entries")
        object.__setattr__(self, "coeffs", _readonly(c))
        if self.normalized:
            n2 = float(np.dot(c, c))
            if abs(n2 - 1.0) > NORM_TOL:
                raise ValueError(
                    f"vector flagged normalized but has squared norm {n2!r}"
                )

    @property
    def cutoff(self) -> int:
        return self.coeffs.size - 1

    @property
    def tail_mass(self) -> float:
        """Squared amplitude of the top retained level, c_N^2."""
        return float(self.coeffs[-1] ** 2)

    @property
    def converged(self) -> bool:
        return self.tail_mass < TAIL_TOL

    def padded(self, cutoff: int) -> "CoefficientVector":
        """Zero-extend to a larger cutoff (identity if already large enough)."""
        if cutoff < self.cutoff:
            raise ValueError("padded() cannot shrink a vector; slice coeffs instead")
        out = np.zeros(cutoff + 1)
        out[: self.coeffs.size] = self.coeffs
        return CoefficientVector(out, normalized=self.normalized,
                                 provenance=self.provenance)


@dataclass(frozen=True, eq=False)
class TwoModeAmplitudeMatrix:
    """Dense amplitude matrix psi[m, n] of a general two-mode pure state.

    Sub-normalized matrices (squared Frobenius norm < 1) represent conditional
    states before renormalization.  `notes` carries truncation warnings.
    """

    amps: np.ndarray
    notes: tuple = ()

    def __post_init__(self):
        a = np.asarray(self.amps)
        if a.ndim != 2:
            raise ValueError("two-mode amplitudes must form a 2-D matrix")
        a = a.astype(complex if np.iscomplexobj(a) else float)
        n2 = float(np.sum(np.abs(a) ** 2))
        if n2 > 1.0 + NORM_TOL:
            raise ValueError(f"squared norm {n2!r} exceeds 1 beyond tolerance")
        object.__setattr__(self, "amps", _readonly(a))

    @property
    def cutoffs(self) -> tuple:
        return (self.amps.shape[0] - 1, self.amps.shape[1] - 1)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


@dataclass(frozen=True, eq=False)
class FourModeTensor:
    """Rank-4 amplitude tensor over modes (a, b, c, d) with small cutoffs."""

    amps: np.ndarray
    notes: tuple = ()

    def __post_init__(self):
        a = np.asarray(self.amps)
        if a.ndim != 4:
            raise ValueError("four-mode amplitudes must form a rank-4 tensor")
        a = a.astype(complex if np.iscomplexobj(a) else float)
        n2 = float(np.sum(np.abs(a) ** 2))
        if n2 > 1.0 + NORM_TOL:
            raise ValueError(f"squared norm {n2!r} exceeds 1 beyond tolerance")
        object.__setattr__(self, "amps", _readonly(a))

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


@dataclass(frozen=True, eq=False)
class ConditionalEnsemble:
    """Weighted post-measurement pure states plus heralding probability.

    Weights are renormalized to sum to one; `success_probability` keeps the
    pre-normalization mass of the conditioned branches.
    """

    branches: tuple
    success_probability: float

    def __post_init__(self):
        if not self.branches:
            raise ValueError("ensemble must contain at least one branch")
        w = np.array([b[0] for b in self.branches], dtype=float)
        if np.any(w < -NORM_TOL):
            raise ValueError("branch weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > NORM_TOL:
            raise ValueError(f"branch weights sum to {w.sum()!r}, expected 1")
        if not -NORM_TOL <= self.success_probability <= 1.0 + NORM_TOL:
            raise ValueError("success probability out of [0, 1]")
        object.__setattr__(self, "branches", tuple(self.branches))

    def density_matrix(self) -> np.ndarray:
        """Density matrix on the flattened two-mode space."""
        dim = self.branches[0][1].amps.size
        rho = np.zeros((dim, dim), dtype=complex)
        for w, state in self.branches:
            v = state.amps.reshape(-1)
            rho += w * np.outer(v, v.conj())
        return rho


def norm_squared(v: CoefficientVector) -> float:
    """Sum of squared coefficients, exact for the stored truncation."""
    c = v.coeffs
    return float(np.dot(c, c))


def normalize(v: CoefficientVector) -> CoefficientVector:
    """Rescale to unit norm, making the first nonzero coefficient nonnegative.

    Raises ValueError on a zero vector (an impossible conditioning branch).
    """
    c = np.array(v.coeffs)
    n2 = float(np.dot(c, c))
    if n2 <= 0.0:
        raise ValueError("cannot normalize a zero coefficient vector")
    c /= np.sqrt(n2)
    nz = np.flatnonzero(np.abs(c) > 0)
    if nz.size and c[nz[0]] < 0:
        c = -c
    return CoefficientVector(c, normalized=True, provenance=v.provenance)


def embed_diagonal(v: CoefficientVector) -> TwoModeAmplitudeMatrix:
    """Embed c_n as the diagonal psi[n, n] of a two-mode amplitude matrix."""
    return TwoModeAmplitudeMatrix(np.diag(v.coeffs))


def diagonal_coefficients(m: TwoModeAmplitudeMatrix) -> np.ndarray:
    """Read the photon-number-correlated diagonal back out of a matrix."""
    return np.array(np.diagonal(m.amps))


def trace_distance_pure_vs_ensemble(target: CoefficientVector,
                                    e: ConditionalEnsemble) -> float:
    """Trace distance (1/2)||rho_e - |t><t|||_1 between ensemble and pure target.

    The target embeds diagonally; branch matrices must share its cutoff on
    both modes, otherwise a ValueError is raised.
    """
    shape = e.branches[0][1].amps.shape
    if shape != (target.cutoff + 1, target.cutoff + 1):
        raise ValueError(
            f"cutoff mismatch: ensemble branches are {shape}, "
            f"target needs {(target.cutoff + 1,) * 2}"
        )
    t = np.diag(target.coeffs).reshape(-1).astype(complex)
    delta = e.density_matrix() - np.outer(t, t.conj())
    eigs = np.linalg.eigvalsh(delta)
    return float(0.5 * np.sum(np.abs(eigs)))


# --- state file format (shared with the CLI) ---------------------------------

def state_file_text(v: CoefficientVector) -> str:
    """Serialize to the JSON state document with 17-significant-digit floats."""
    coeffs = ", ".join(f"{x:.17g}" for x in v.coeffs)
    return (
        "{\n"
        f'  "cutoff": {v.cutoff},\n'
        f'  "coefficients": [{coeffs}],\n'
        f'  "normalized": {"true" if v.normalized else "false"},\n'
        f'  "provenance": {json.dumps(v.provenance)}\n'
        "}\n"
    )


def write_state_file(v: CoefficientVector, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(state_file_text(v))


def read_state_file(path) -> CoefficientVector:
    with open(path) as fh:
        doc = json.load(fh)
    coeffs = np.asarray(doc["coefficients"], dtype=float)
    if int(doc["cutoff"]) != coeffs.size - 1:
        raise ValueError(f"state file {path}: cutoff field does not match coefficients")
    return CoefficientVector(coeffs, normalized=bool(doc["normalized"]),
                             provenance=str(doc.get("provenance", "")))
