"""Littlewood-Paley decomposition and the function-space norms used by the
solver diagnostics: L^q, Sobolev H^g_q / homogeneous variant, Besov B^g_q /
homogeneous variant, and L^p-in-time composites over snapshot sequences.

The dyadic cutoff family is fixed explicitly (norms are cutoff-independent
up to constants; a second family exists so that independence is testable).
Homogeneous norms follow the zero-mode policy of the spectral module: the
mean coefficient is excluded, and nonzero-mean input without an explicit
`remove_mean` opt-in is an error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .spectral import Field, PeriodicGrid, ZeroModePolicyError

INF = math.inf


class EmptyBandWarning(UserWarning):
    """A dyadic band lies entirely outside the resolvable lattice."""


class CutoffFamily:
    """Smooth radial partition: chi0 == 1 on r <= 1, supported in r <= 2;
    chi(r) = chi0(r) - chi0(2r) is supported in 1/2 <= r <= 2."""

    def __init__(self, theta, name: str):
        self._theta = theta
        self.name = name

    def chi0(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        a = self._theta(2.0 - r)
        b = self._theta(r - 1.0)
        return a / (a + b)

    def chi(self, r: np.ndarray) -> np.ndarray:
        return self.chi0(r) - self.chi0(2.0 * np.asarray(r, dtype=float))


def _theta_exp(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def _theta_exp_sq(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos] ** 2)
    return out


STANDARD_CUTOFF = CutoffFamily(_theta_exp, "exp(-1/s)")
ALT_CUTOFF = CutoffFamily(_theta_exp_sq, "exp(-1/s^2)")


@dataclass(frozen=True)
class DyadicBand:
    """One dyadic frequency block: the low block (scale None) or the annulus
    N/2 <= |xi| <= 2N at scale N = 2^k."""

    scale: Optional[float]

    @staticmethod
    def low() -> "DyadicBand":
        return DyadicBand(None)

    @staticmethod
    def at(k: int) -> "DyadicBand":
        return DyadicBand(2.0 ** k)

    @property
    def is_low(self) -> bool:
        return self.scale is None


def resolvable_range(grid: PeriodicGrid, homogeneous: bool) -> Tuple[int, int]:
    """Dyadic index range [k_lo, k_hi] covering the lattice.

    Homogeneous: k_lo = floor(log2 xi_min) so the lowest band still clears
    the smallest nonzero wavenumber; inhomogeneous starts at k = 1 above the
    low block. k_hi = ceil(log2 xi_max) so the top telescoping tail is 1.
    """
    xi_min = 2.0 * np.pi / grid.box_length
    xi_max = np.pi * grid.n / grid.box_length * math.sqrt(grid.d)
    k_hi = math.ceil(math.log2(xi_max))
    k_lo = math.floor(math.log2(xi_min)) if homogeneous else 1
    return k_lo, k_hi


def bands(grid: PeriodicGrid, homogeneous: bool) -> list:
    k_lo, k_hi = resolvable_range(grid, homogeneous)
    out = [] if homogeneous else [DyadicBand.low()]
    out.extend(DyadicBand.at(k) for k in range(k_lo, k_hi + 1))
    return out


def lp_project(field: Field, band: DyadicBand,
               cutoff: CutoffFamily = STANDARD_CUTOFF) -> Field:
    """Smooth projection onto one dyadic block, with hard zeros outside the
    block's exact support annulus (low block: |xi| <= 2)."""
    grid = field.grid
    r = grid.xi_magnitude()
    coeffs = field.coefficients()
    if band.is_low:
        symbol = cutoff.chi0(r)
        support = r <= 2.0
    else:
        n = float(band.scale)
        xi_max = np.pi * grid.n / grid.box_length * math.sqrt(grid.d)
        if n / 2.0 > xi_max:
            warnings.warn(f"band at scale {n} lies above the lattice Nyquist radius",
                          EmptyBandWarning)
            return Field.zero(grid)
        symbol = cutoff.chi(r / n)
        support = (r >= n / 2.0) & (r <= 2.0 * n)
        if not support.any():
            warnings.warn(f"band at scale {n} contains no lattice point",
                          EmptyBandWarning)
            return Field.zero(grid)
    return Field.from_coefficients(grid, np.where(support, coeffs * symbol, 0.0))


def project_all(field: Field, homogeneous: bool = False,
                cutoff: CutoffFamily = STANDARD_CUTOFF) -> dict:
    """All resolvable block projections, keyed by DyadicBand."""
    return {band: lp_project(field, band, cutoff)
            for band in bands(field.grid, homogeneous)}


def partition_values(grid: PeriodicGrid, homogeneous: bool,
                     cutoff: CutoffFamily = STANDARD_CUTOFF) -> np.ndarray:
    """Pointwise sum of the cutoff family over the resolvable blocks."""
    r = grid.xi_magnitude()
    k_lo, k_hi = resolvable_range(grid, homogeneous)
    total = np.zeros(grid.shape)
    if not homogeneous:
        total += cutoff.chi0(r)
    for k in range(k_lo, k_hi + 1):
        total += cutoff.chi(r / 2.0 ** k)
    return total


def coverage_leakage(field: Field, homogeneous: bool = True,
                     cutoff: CutoffFamily = STANDARD_CUTOFF) -> float:
    """Fraction of spectral mass missed by the resolvable partition:
    sum |u_hat|^2 (1 - sum_chi)^2 / sum |u_hat|^2 over xi != 0."""
    grid = field.grid
    coeffs = field.coefficients()
    weight = np.abs(coeffs) ** 2
    weight[(0,) * grid.d] = 0.0
    total = float(weight.sum())
    if total == 0.0:
        return 0.0
    defect = 1.0 - partition_values(grid, homogeneous, cutoff)
    defect[(0,) * grid.d] = 0.0
    return float((weight * defect ** 2).sum() / total)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def lebesgue_norm(field: Field, q) -> float:
    """Quadrature L^q norm: (L^d/n^d * sum |u|^q)^(1/q); q = inf is the grid max."""
    q = float(q)
    if q < 1:
        raise ValueError(f"Lebesgue exponent must be >= 1, got {q}")
    mags = np.abs(field.values)
    if math.isinf(q):
        return float(mags.max())
    return float((field.grid.cell_volume * (mags ** q).sum()) ** (1.0 / q))


def _mean_policy(field: Field, remove_mean: bool) -> np.ndarray:
    """Coefficients with the zero mode cleared, enforcing the opt-in policy."""
    coeffs = field.coefficients()
    zero = (0,) * field.grid.d
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if abs(coeffs[zero]) > 1e-12 * max(scale, 1e-300) and not remove_mean:
        raise ZeroModePolicyError(
            "homogeneous norm on nonzero-mean data; pass remove_mean=True "
            "to project out the mean explicitly")
    coeffs = coeffs.copy()
    coeffs[zero] = 0.0
    return coeffs


def sobolev_norm(field: Field, gamma: float, q=2, homogeneous: bool = False,
                 remove_mean: bool = False) -> float:
    """||<Lam>^g u||_{L^q} or, homogeneous, |||xi|^g u||_{L^q} (mean excluded)."""
    grid = field.grid
    gamma = float(gamma)
    if not homogeneous:
        r = grid.xi_magnitude()
        weighted = field.coefficients() * (1.0 + r * r) ** (0.5 * gamma)
        return lebesgue_norm(Field.from_coefficients(grid, weighted), q)
    coeffs = _mean_policy(field, remove_mean)
    r = grid.xi_magnitude()
    symbol = np.zeros(grid.shape)
    nonzero = r > 0
    symbol[nonzero] = r[nonzero] ** gamma
    return lebesgue_norm(Field.from_coefficients(grid, coeffs * symbol), q)


def h_dot_sq(field: Field, gamma: float) -> float:
    """Squared homogeneous L^2 Sobolev norm via Plancherel (mean excluded).

    Quadratic in the coefficients, so no mean policy applies: the zero mode
    simply does not contribute for the torus analog of S'_0.
    """
    grid = field.grid
    coeffs = field.coefficients()
    r = grid.xi_magnitude()
    weight = np.zeros(grid.shape)
    nonzero = r > 0
    weight[nonzero] = r[nonzero] ** (2.0 * float(gamma))
    return float(grid.box_length ** grid.d * (weight * np.abs(coeffs) ** 2).sum())


def besov_norm(field: Field, gamma: float, q=2, homogeneous: bool = False,
               remove_mean: bool = False,
               cutoff: CutoffFamily = STANDARD_CUTOFF) -> float:
    """||P_0 u||_{L^q} + (sum_N N^{2g} ||P_N u||_{L^q}^2)^(1/2); the
    homogeneous variant drops the low block and sums dyadically over the
    resolvable range."""
    gamma = float(gamma)
    if homogeneous:
        base = Field.from_coefficients(field.grid, _mean_policy(field, remove_mean))
        low = 0.0
    else:
        base = field
        low = lebesgue_norm(lp_project(base, DyadicBand.low(), cutoff), q)
    k_lo, k_hi = resolvable_range(field.grid, homogeneous)
    acc = 0.0
    for k in range(k_lo, k_hi + 1):
        n = 2.0 ** k
        piece = lebesgue_norm(lp_project(base, DyadicBand.at(k), cutoff), q)
        acc += n ** (2.0 * gamma) * piece ** 2
    return low + math.sqrt(acc)


def spacetime_norm(snapshots: Sequence[Tuple[float, Field]], p, inner) -> float:
    """Composite-trapezoid L^p-in-time of a spatial norm over snapshots.

    `snapshots` is a sequence of (time, Field) with strictly increasing
    times; `inner` maps a Field to its spatial norm. p = inf is the max.
    """
    if len(snapshots) < 2:
        raise ValueError("space-time norm needs at least two snapshots")
    times = np.array([t for t, _ in snapshots], dtype=float)
    if not np.all(np.diff(times) > 0):
        raise ValueError("snapshot times must be strictly increasing")
    values = np.array([inner(f) for _, f in snapshots], dtype=float)
    p = float(p)
    if math.isinf(p):
        return float(values.max())
    if p < 1:
        raise ValueError(f"time exponent must be >= 1, got {p}")
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    return float(trapezoid(values ** p, times) ** (1.0 / p))


# ---------------------------------------------------------------------------
# named norm specifications (CLI surface)
# ---------------------------------------------------------------------------

SPACES = ("lebesgue", "sobolev", "sobolev-hom", "besov", "besov-hom")


@dataclass(frozen=True)
class NormSpec:
    """A named spatial norm, optionally composed with L^p in time."""

    space: str
    gamma: float = 0.0
    q: float = 2.0
    p: Optional[float] = None
    remove_mean: bool = False

    def __post_init__(self):
        if self.space not in SPACES:
            raise ValueError(f"unknown space {self.space!r}; choose from {SPACES}")

    def evaluate(self, field: Field) -> float:
        if self.space == "lebesgue":
            return lebesgue_norm(field, self.q)
        if self.space == "sobolev":
            return sobolev_norm(field, self.gamma, self.q)
        if self.space == "sobolev-hom":
            return sobolev_norm(field, self.gamma, self.q, homogeneous=True,
                                remove_mean=self.remove_mean)
        if self.space == "besov":
            return besov_norm(field, self.gamma, self.q)
        return besov_norm(field, self.gamma, self.q, homogeneous=True,
                          remove_mean=self.remove_mean)

    def label(self) -> str:
        tag = {"lebesgue": f"L{_expstr(self.q)}",
               "sobolev": f"H{self.gamma:g}_{_expstr(self.q)}",
               "sobolev-hom": f"Hdot{self.gamma:g}_{_expstr(self.q)}",
               "besov": f"B{self.gamma:g}_{_expstr(self.q)}",
               "besov-hom": f"Bdot{self.gamma:g}_{_expstr(self.q)}"}[self.space]
        if self.p is not None:
            tag = f"L{_expstr(self.p)}t_" + tag
        return tag


def _expstr(v) -> str:
    v = float(v)
    return "inf" if math.isinf(v) else f"{v:g}"
