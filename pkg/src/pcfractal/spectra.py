"""Self-similar measures, generalized eigenproblems, Weyl asymptotics and
spectral kernels.

L2 of the fractal is discretized by mass lumping with harmonic-tent integrals,
so each level carries a generalized symmetric eigenproblem H u = lambda M u
with M the diagonal lumped-mass matrix.  All spectra are computed densely.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gamma as gamma_fn
from math import prod

import numpy as np
import scipy.linalg

from .harmonic import EnergyForm, HarmonicStructure, extension_matrices
from .structure import LevelComplex, SelfSimilarStructure, build_level


class SpectraError(ValueError):
    pass


@dataclass(frozen=True)
class MeasureWeights:
    mu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        if np.any(self.mu <= 0):
            raise SpectraError("measure weights must be positive")
        if abs(self.mu.sum() - 1.0) > 1e-12:
            raise SpectraError(f"measure weights must sum to 1, got {self.mu.sum()!r}")

    def check_compatible(self, hs: HarmonicStructure):
        bad = self.mu * hs.r >= 1
        if np.any(bad):
            raise SpectraError(f"need mu_i * r_i < 1 for all i, violated at {np.nonzero(bad)[0] + 1}")


@dataclass(frozen=True)
class SpectralExponent:
    d_S: float
    gamma: np.ndarray  # gamma_i = sqrt(r_i mu_i)
    lattice: bool


@dataclass(frozen=True)
class SpectralData:
    """Eigenpairs of (H_m, mass) under a boundary condition.

    Vectors are stored on the solve support (all vertices for Neumann, the
    interior for Dirichlet) and are orthonormal in the mass inner product.
    """

    bc: str  # "neumann" | "dirichlet"
    level: int
    complex: LevelComplex
    support: np.ndarray  # vertex indices carrying the eigenvectors
    eigenvalues: np.ndarray  # ascending
    vectors: np.ndarray  # len(support) x K, columns mass-orthonormal
    mass: np.ndarray  # full per-vertex mass vector

    def full_vectors(self) -> np.ndarray:
        """Vectors padded with zeros on eliminated (Dirichlet boundary) vertices."""
        out = np.zeros((self.complex.n_vertices, self.vectors.shape[1]))
        out[self.support, :] = self.vectors
        return out


def solve_spectral_exponent(hs: HarmonicStructure, mw: MeasureWeights) -> SpectralExponent:
    """Unique positive root of sum_i gamma_i^d = 1, gamma_i = sqrt(r_i mu_i)."""
    mw.check_compatible(hs)
    gam = np.sqrt(hs.r * mw.mu)

    def f(d):
        return np.sum(gam**d) - 1.0

    # f is strictly decreasing, f(0+) = N-1 > 0, f(2) = sum r_i mu_i - 1 < 0
    lo, hi = 1e-12, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    d = 0.5 * (lo + hi)
    for _ in range(5):  # Newton polish
        fd = f(d)
        dfd = np.sum(gam**d * np.log(gam))
        d -= fd / dfd
    if abs(f(d)) > 1e-12:
        raise SpectraError(f"spectral-exponent root residual {f(d):.3g} too large")
    return SpectralExponent(d_S=float(d), gamma=gam, lattice=_is_lattice(gam))


def _is_lattice(gam: np.ndarray, max_den: int = 64, tol: float = 1e-9) -> bool:
    """Commensurability proxy: all log-ratios rational with small denominator."""
    logs = np.log(gam)
    for ratio in logs / logs[0]:
        frac = Fraction(ratio).limit_denominator(max_den)
        if abs(ratio - float(frac)) > tol:
            return False
    return True


def kl_weights(se: SpectralExponent) -> np.ndarray:
    """Weights gamma_i^{d_S} of the spectrally natural self-similar measure."""
    nu = se.gamma**se.d_S
    assert abs(nu.sum() - 1.0) <= 1e-12
    return nu


def tent_integrals(
    S: SelfSimilarStructure, hs: HarmonicStructure, mw: MeasureWeights
) -> np.ndarray:
    """Integrals of the harmonic tent functions against the self-similar measure.

    The vector I of tent integrals is the fixed point of I = (sum_i mu_i A_i^T) I,
    normalized to sum 1; existence/uniqueness is Perron-Frobenius.
    """
    A = extension_matrices(S, hs)
    M = sum(mu_i * Ai.T for mu_i, Ai in zip(mw.mu, A))
    ns = scipy.linalg.null_space(M - np.eye(S.n0), rcond=1e-10)
    if ns.shape[1] != 1:
        raise SpectraError(
            f"tent-integral fixed point not unique (null space dim {ns.shape[1]})"
        )
    I = ns[:, 0]
    I = I / I.sum()
    if np.any(I <= 0):
        raise SpectraError("tent integrals must be positive")
    return I


def mass_vector(
    S: SelfSimilarStructure,
    hs: HarmonicStructure,
    mw: MeasureWeights,
    m: int,
    cm: LevelComplex | None = None,
) -> np.ndarray:
    """Lumped per-vertex masses: m_p = sum over incidences (w, q) of mu_w I_q."""
    if cm is None:
        cm = build_level(S, m)
    I = tent_integrals(S, hs, mw)
    mass = np.zeros(cm.n_vertices)
    for w, idx in cm.cells.items():
        mu_w = prod(mw.mu[letter - 1] for letter in w)
        for q, v in enumerate(idx):
            mass[v] += mu_w * I[q]
    return mass


def eigensolve(ef: EnergyForm, mass: np.ndarray, bc: str) -> SpectralData:
    """Full generalized symmetric eigendecomposition of (H, diag(mass)).

    Dirichlet eliminates the boundary rows/columns.  Returned vectors satisfy
    A^T M A = I on the support.
    """
    bc = bc.lower()
    if bc not in ("neumann", "dirichlet"):
        raise SpectraError(f"unknown boundary condition {bc!r}")
    mass = np.asarray(mass, dtype=float)
    if np.any(mass <= 0):
        raise SpectraError("mass vector must be strictly positive")
    cm = ef.complex
    if bc == "dirichlet":
        support = np.setdiff1d(np.arange(cm.n_vertices), np.asarray(cm.boundary_vertices))
    else:
        support = np.arange(cm.n_vertices)
    H = ef.H[np.ix_(support, support)]
    ms = mass[support]
    # symmetric scaling instead of a generalized solve: M is diagonal
    s = 1.0 / np.sqrt(ms)
    Ht = H * np.outer(s, s)
    Ht = 0.5 * (Ht + Ht.T)
    evals, V = scipy.linalg.eigh(Ht)
    vectors = V * s[:, None]
    return SpectralData(
        bc=bc,
        level=ef.level,
        complex=cm,
        support=support,
        eigenvalues=evals,
        vectors=vectors,
        mass=mass,
    )


def counting_function(sd: SpectralData, x: float) -> int:
    """Number of eigenvalues <= x, with multiplicity."""
    if x < 0:
        return 0
    return int(np.searchsorted(sd.eigenvalues, x, side="right"))


def weyl_fit(sd: SpectralData, se: SpectralExponent, slope_tol: float = 0.05) -> dict:
    """Log-log fit of the counting function over the middle decade of the
    spectrum.

    The window is the central factor-of-10 band in log x between the first
    positive eigenvalue and the top of the spectrum; this keeps clear of both
    the handful of low modes and the unphysical top of a discrete spectrum.
    """
    evals = sd.eigenvalues
    K = len(evals)
    if K < 50:
        raise SpectraError(f"need at least 50 eigenvalues for a Weyl fit, got {K}")
    pos = evals[evals > 0]
    l0, l1 = np.log10(pos[0]), np.log10(pos[-1])
    mid = 0.5 * (l0 + l1)
    half = min(0.5, 0.5 * (l1 - l0))
    sel = (evals >= 10 ** (mid - half)) & (evals <= 10 ** (mid + half))
    idx = np.nonzero(sel)[0]
    if len(idx) < 10:
        raise SpectraError("middle-decade window contains too few eigenvalues")
    xs = evals[idx]
    rho = idx + 1.0  # counting function evaluated at its jump points
    slope, intercept = np.polyfit(np.log(xs), np.log(rho), 1)
    ratio = rho / xs ** (se.d_S / 2)
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "ratio_band": [float(ratio.min()), float(ratio.max())],
        "expected_slope": se.d_S / 2,
        "slope_tol": slope_tol,
        "pass": bool(abs(slope - se.d_S / 2) <= slope_tol and ratio.min() > 0),
    }


def green_diagonal(sd: SpectralData) -> tuple[np.ndarray, float]:
    """Diagonal of the Green kernel, g(x) = sum_k a_k(x)^2 / lambda_k.

    Returns the full-length vector (zero on the boundary) and its sup.
    """
    if sd.bc != "dirichlet":
        raise SpectraError("Green diagonal requires Dirichlet spectral data")
    g = np.zeros(sd.complex.n_vertices)
    g[sd.support] = (sd.vectors**2 / sd.eigenvalues[None, :]).sum(axis=1)
    return g, float(g.max())


def heat_kernel_matrix(sd: SpectralData, t: float) -> np.ndarray:
    """Kernel p(t,x,y) = sum_k exp(-lambda_k t) a_k(x) a_k(y) on the support."""
    if t <= 0:
        raise SpectraError("heat kernel requires t > 0")
    w = np.exp(-sd.eigenvalues * t)
    return (sd.vectors * w[None, :]) @ sd.vectors.T


def heat_kernel(sd: SpectralData, t: float, x: int, y: int) -> float:
    """Heat-kernel value between two support-local vertex indices."""
    if t <= 0:
        raise SpectraError("heat kernel requires t > 0")
    w = np.exp(-sd.eigenvalues * t)
    return float(np.sum(w * sd.vectors[x] * sd.vectors[y]))


def c1_estimate(sd: SpectralData, se: SpectralExponent, n_grid: int = 24) -> float:
    """Smallest constant making the two-sided heat bound hold on the
    resolvable window: c1 = sup over t in [1/lambda_max, 1] of
    t^{d_S/2} sup_{x,y} p_D(t,x,y).

    This dominates sup p_D(1,x,y), so the large-time branch
    p <= c1 exp(-(t-1) lambda_1) holds as well."""
    t_min = 1.0 / sd.eigenvalues[-1]
    c1 = 0.0
    for t in np.geomspace(max(t_min, 1e-12), 1.0, n_grid):
        c1 = max(c1, t ** (se.d_S / 2) * float(heat_kernel_matrix(sd, t).max()))
    return c1


def heat_bound_check(
    sd: SpectralData, se: SpectralExponent, c1: float | None = None, n_grid: int = 24
) -> dict:
    """On-diagonal heat bound: p(t,x,x) <= c1 t^{-d_S/2} for resolvable t <= 1
    and <= c1 exp(-(t-1) lambda_1) for t >= 1."""
    if c1 is None:
        c1 = c1_estimate(sd, se)
    lam1 = sd.eigenvalues[0]
    t_min = 1.0 / sd.eigenvalues[-1]
    ts_small = np.geomspace(max(t_min, 1e-12), 1.0, n_grid)
    ts_large = np.geomspace(1.0, 8.0 / lam1 if lam1 > 0 else 10.0, n_grid)
    worst = 0.0
    for t in ts_small:
        diag = np.diag(heat_kernel_matrix(sd, t)).max()
        worst = max(worst, diag / (c1 * t ** (-se.d_S / 2)))
    for t in ts_large:
        diag = np.diag(heat_kernel_matrix(sd, t)).max()
        worst = max(worst, diag / (c1 * np.exp(-(t - 1.0) * lam1)))
    return {"c1": c1, "worst_ratio": worst, "pass": bool(worst <= 1.0 + 1e-10)}


def potential_kernel(sd: SpectralData, se: SpectralExponent, p: float) -> dict:
    """Diagonal of the fractional potential kernel Gamma(p/2) H_D^{-p/2} and
    the uniform bound c1 (1/lambda_1 + 2/(p - d_S))."""
    if not se.d_S < p <= 2:
        raise SpectraError(f"need d_S < p <= 2, got p={p}, d_S={se.d_S}")
    if sd.bc != "dirichlet":
        raise SpectraError("potential kernel requires Dirichlet spectral data")
    coeff = gamma_fn(p / 2) * sd.eigenvalues ** (-p / 2)
    diag = (sd.vectors**2 * coeff[None, :]).sum(axis=1)
    c1 = c1_estimate(sd, se)
    lam1 = float(sd.eigenvalues[0])
    rhs = c1 * (1.0 / lam1 + 2.0 / (p - se.d_S))
    return {
        "p": p,
        "max_diag": float(diag.max()),
        "bound": rhs,
        "c1": c1,
        "lambda1": lam1,
        "pass": bool(diag.max() <= rhs),
    }


def spectral_volume_estimate(
    sd: SpectralData, se: SpectralExponent
) -> tuple[float, float]:
    """Non-lattice Weyl limit of rho(x)/x^{d_S/2} via the renewal integrand.

    With R(x) = rho(x) - sum_i rho(gamma_i^2 x) and U(t) = exp(-t d_S) R(exp 2t),
    the limit is (-sum nu_i ln nu_i)^{-1} d_S * integral of U.  The integral is
    taken exactly on the jump grid of R, truncated at the top of the computed
    spectrum; the returned band is the shift under truncating at lambda_max/4.
    """
    if se.lattice:
        raise SpectraError(
            "spectral-volume estimator requires the non-lattice case "
            "(the log-contraction ratios are commensurable)"
        )
    evals = sd.eigenvalues
    nu = kl_weights(se)
    norm = se.d_S / float(-(nu * np.log(nu)).sum())

    def estimate(x_cut: float) -> float:
        # R jumps at lambda_k (by +1) and at lambda_k / gamma_i^2 (by -1)
        jumps = [evals[evals <= x_cut]]
        for g in se.gamma:
            lam_over = evals / g**2
            jumps.append(lam_over[lam_over <= x_cut])
        xs = np.unique(np.concatenate([x for x in jumps if len(x)]))
        xs = xs[xs > 1.0]  # integration domain t in (0, t_cut]
        grid = np.concatenate([[1.0], xs, [x_cut]])
        total = 0.0
        for a, b in zip(grid[:-1], grid[1:]):
            if b <= a:
                continue
            xm = np.sqrt(a * b)  # any point strictly inside the plateau
            R = counting_function(sd, xm) - sum(
                counting_function(sd, g**2 * xm) for g in se.gamma
            )
            # integral of exp(-d_S t) over [ln a / 2, ln b / 2]
            ta, tb = 0.5 * np.log(a), 0.5 * np.log(b)
            total += R * (np.exp(-se.d_S * ta) - np.exp(-se.d_S * tb)) / se.d_S
        return norm * total

    full = estimate(float(evals[-1]))
    quarter = estimate(float(evals[-1]) / 4.0)
    return full, abs(full - quarter)
