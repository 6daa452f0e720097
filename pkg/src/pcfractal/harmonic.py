"""Energy forms from a harmonic structure (D, r): assembly, verification,
harmonic extension.

The level-m form is the sum over all m-cells of the boundary form D scaled by
1/r_w, pushed onto the cell's vertex tuple.  The harmonic-structure condition
(level-(m+1) energy minimized over extensions reproduces the level-m energy)
is checked once, at the bottom level, as a Schur-complement identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

from .structure import (
    LevelComplex,
    SelfSimilarStructure,
    Word,
    build_level,
    refinement_indices,
)


class HarmonicError(ValueError):
    """Harmonic structure violates its invariants."""


@dataclass(frozen=True)
class HarmonicStructure:
    D: np.ndarray  # boundary Laplacian, n0 x n0
    r: np.ndarray  # resistance weights, length N

    def __post_init__(self):
        object.__setattr__(self, "D", np.asarray(self.D, dtype=float))
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        D, r = self.D, self.r
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise HarmonicError(f"D must be square, got shape {D.shape}")
        if not np.allclose(D, D.T, atol=1e-12):
            raise HarmonicError("D must be symmetric")
        off = D - np.diag(np.diag(D))
        if np.any(off > 1e-12):
            raise HarmonicError("off-diagonal entries of D must be <= 0")
        colsums = D.sum(axis=0)
        if np.any(np.abs(colsums) > 1e-10):
            raise HarmonicError(f"columns of D must sum to 0, max dev {np.abs(colsums).max():.3g}")
        w = np.linalg.eigvalsh(D)
        if w[0] < -1e-10:
            raise HarmonicError(f"D must be positive semidefinite, min eig {w[0]:.3g}")
        if D.shape[0] > 1 and w[1] <= 1e-12:
            raise HarmonicError("kernel of D must be exactly the constants")
        if np.any(r <= 0) or np.any(r >= 1):
            bad = r[(r <= 0) | (r >= 1)]
            raise HarmonicError(f"regularity requires 0 < r_i < 1, got {bad}")


@dataclass(frozen=True)
class EnergyForm:
    """Level-m graph energy: quadratic form u^T H u with per-edge conductances."""

    level: int
    complex: LevelComplex
    H: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_c: np.ndarray
    cell_scales: dict[Word, float] = field(repr=False, default=None)

    def energy(self, u: np.ndarray) -> float:
        return float(u @ self.H @ u)

    def bilinear(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(u @ self.H @ v)

    @property
    def n_edges(self) -> int:
        return len(self.edge_c)


def assemble_energy(
    S: SelfSimilarStructure,
    hs: HarmonicStructure,
    m: int,
    cm: LevelComplex | None = None,
) -> EnergyForm:
    """Assemble H_m = sum over m-cells of D / r_w on the cell's vertices."""
    if len(hs.r) != S.N:
        raise HarmonicError(f"r has length {len(hs.r)}, structure has N={S.N}")
    if hs.D.shape[0] != S.n0:
        raise HarmonicError(f"D is {hs.D.shape[0]}x{hs.D.shape[0]}, structure has n0={S.n0}")
    if cm is None:
        cm = build_level(S, m)
    H = np.zeros((cm.n_vertices, cm.n_vertices))
    scales = {}
    for w, idx in cm.cells.items():
        rw = prod(hs.r[letter - 1] for letter in w)
        scales[w] = rw
        H[np.ix_(idx, idx)] += hs.D / rw
    iu, iv = np.nonzero(np.triu(H, k=1) < -1e-14)
    return EnergyForm(
        level=m,
        complex=cm,
        H=H,
        edge_u=iu.astype(np.int64),
        edge_v=iv.astype(np.int64),
        edge_c=-H[iu, iv],
        cell_scales=scales,
    )


def verify_harmonic(
    S: SelfSimilarStructure, hs: HarmonicStructure, tol: float = 1e-9
) -> dict:
    """Check the renormalization identity: Schur complement of H_1 onto the
    boundary equals D.  Sufficient for all levels, since the minimization
    condition at the bottom level propagates upward."""
    ef1 = assemble_energy(S, hs, 1)
    cm = ef1.complex
    b = list(cm.boundary_vertices)
    interior = [v for v in range(cm.n_vertices) if v not in set(b)]
    H = ef1.H
    if interior:
        Hii = H[np.ix_(interior, interior)]
        Hib = H[np.ix_(interior, b)]
        try:
            X = np.linalg.solve(Hii, Hib)
        except np.linalg.LinAlgError:
            return {"pass": False, "deviation": float("inf"), "tol": tol,
                    "error": "singular interior block (disconnected interior)"}
        schur = H[np.ix_(b, b)] - Hib.T @ X
    else:
        schur = H[np.ix_(b, b)]
    deviation = float(np.abs(schur - hs.D).max())
    return {"pass": deviation <= tol, "deviation": deviation, "tol": tol}


def harmonic_extension(
    S: SelfSimilarStructure,
    hs: HarmonicStructure,
    m: int,
    u: np.ndarray,
    cm: LevelComplex | None = None,
    cm1: LevelComplex | None = None,
) -> np.ndarray:
    """Extend u on V_m to the energy-minimizing function on V_{m+1}."""
    if cm is None:
        cm = build_level(S, m)
    if cm1 is None:
        cm1 = build_level(S, m + 1)
    u = np.asarray(u, dtype=float)
    if len(u) != cm.n_vertices:
        raise ValueError(f"u has length {len(u)}, level {m} has {cm.n_vertices} vertices")
    ef1 = assemble_energy(S, hs, m + 1, cm=cm1)
    fixed = refinement_indices(cm, cm1)
    free = np.setdiff1d(np.arange(cm1.n_vertices), fixed)
    out = np.empty(cm1.n_vertices)
    out[fixed] = u
    if len(free):
        H = ef1.H
        Hff = H[np.ix_(free, free)]
        rhs = -H[np.ix_(free, fixed)] @ u
        out[free] = np.linalg.solve(Hff, rhs)
    return out


def extend_to_level(
    S: SelfSimilarStructure, hs: HarmonicStructure, m0: int, u0: np.ndarray, m: int
) -> np.ndarray:
    """Iterated harmonic extension from V_{m0} up to V_m."""
    if m < m0:
        raise ValueError("target level below base level")
    u = np.asarray(u0, dtype=float)
    for k in range(m0, m):
        u = harmonic_extension(S, hs, k, u)
    return u


def extension_matrices(S: SelfSimilarStructure, hs: HarmonicStructure) -> list[np.ndarray]:
    """Per-cell boundary-to-boundary extension matrices A_i.

    (A_i)_{qp} is the value, at the q-th boundary point of cell i, of the
    harmonic extension of the indicator of boundary point p.  Rows sum to 1.
    """
    cm0 = build_level(S, 0)
    cm1 = build_level(S, 1)
    n0 = S.n0
    ext = np.empty((cm1.n_vertices, n0))
    for p in range(n0):
        ext[:, p] = harmonic_extension(S, hs, 0, np.eye(n0)[p], cm=cm0, cm1=cm1)
    out = []
    for i in range(1, S.N + 1):
        idx = list(cm1.cells[(i,)])
        out.append(ext[idx, :].copy())
    return out


def harmonic_function(
    S: SelfSimilarStructure,
    hs: HarmonicStructure,
    m0: int,
    m: int,
    boundary_values: np.ndarray | None = None,
    seed: int | None = None,
) -> np.ndarray:
    """An m0-harmonic test function on V_m: data on V_{m0}, extended harmonically.

    Either explicit values on V_{m0} or a seed for uniform random values.
    """
    cm0 = build_level(S, m0)
    if boundary_values is not None:
        u0 = np.asarray(boundary_values, dtype=float)
        if len(u0) != cm0.n_vertices:
            raise ValueError(
                f"expected {cm0.n_vertices} values on level-{m0} vertices, got {len(u0)}"
            )
    else:
        rng = np.random.default_rng(seed)
        u0 = rng.uniform(-1.0, 1.0, size=cm0.n_vertices)
    return extend_to_level(S, hs, m0, u0, m)
