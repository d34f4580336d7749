"""Periodic spectral engine: grids, transforms, Fourier multipliers, and the
exact linear propagators of the fractional Schrodinger and wave flows.

Conventions. The domain is the torus [0, L)^d with n samples per axis (n a
power of two). The forward transform divides by n^d so the zero coefficient
is the spatial mean and Plancherel reads ||u||_{L^2}^2 = L^d * sum |u_hat|^2.
The zero mode represents the torus analog of working modulo polynomials:
negative-order multipliers refuse nonzero-mean data unless the caller opts
into mean removal.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

SNAPSHOT_MAGIC = b"FDSP"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIIdQ")  # magic, version, d, n, box_length, count

_MEAN_FREE_RTOL = 1e-12


class NonFiniteFieldError(ValueError):
    """A field sample is NaN or infinite."""


class ZeroModePolicyError(ValueError):
    """A negative-order multiplier met nonzero-mean data without opt-in."""


class PeriodicGrid:
    """Uniform grid on [0, L)^d with the exact wavenumber lattice 2*pi*k/L."""

    def __init__(self, d: int, n: int, box_length: float):
        if d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"points per axis must be a power of two >= 8, got {n}")
        if not (box_length > 0):
            raise ValueError(f"box length must be positive, got {box_length}")
        self.d = int(d)
        self.n = int(n)
        self.box_length = float(box_length)
        # integer mode numbers in FFT layout: 0..n/2-1, -n/2..-1
        self.modes = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)
        self.xi_axis = 2.0 * np.pi * self.modes / self.box_length
        self._xi_mag = None
        self._nyquist = None

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def size(self):
        return self.n ** self.d

    @property
    def dx(self):
        return self.box_length / self.n

    @property
    def cell_volume(self):
        return (self.box_length / self.n) ** self.d

    def axes(self):
        """Per-axis sample coordinates in [0, L)."""
        x = np.arange(self.n) * self.dx
        return [x] * self.d

    def meshgrid(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def xi_magnitude(self) -> np.ndarray:
        """|xi| on the full lattice, FFT layout."""
        if self._xi_mag is None:
            sq = np.zeros(self.shape)
            for axis in range(self.d):
                shape = [1] * self.d
                shape[axis] = self.n
                sq = sq + (self.xi_axis ** 2).reshape(shape)
            self._xi_mag = np.sqrt(sq)
            self._xi_mag.setflags(write=False)
        return self._xi_mag

    def nyquist_mask(self) -> np.ndarray:
        """Lattice points with the unpaired mode -n/2 on some axis."""
        if self._nyquist is None:
            mask = np.zeros(self.shape, dtype=bool)
            for axis in range(self.d):
                shape = [1] * self.d
                shape[axis] = self.n
                mask |= (self.modes == -self.n // 2).reshape(shape)
            self._nyquist = mask
            self._nyquist.setflags(write=False)
        return self._nyquist

    def forward(self, values: np.ndarray) -> np.ndarray:
        return np.fft.fftn(values) / self.size

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(coeffs) * self.size

    def __eq__(self, other):
        return (isinstance(other, PeriodicGrid) and self.d == other.d
                and self.n == other.n and self.box_length == other.box_length)

    def __hash__(self):
        return hash((self.d, self.n, self.box_length))

    def __repr__(self):
        return f"PeriodicGrid(d={self.d}, n={self.n}, box_length={self.box_length})"


def make_grid(d: int, n: int, box_length: float) -> PeriodicGrid:
    return PeriodicGrid(d, n, box_length)


class Field:
    """Complex samples of one scalar field on a PeriodicGrid. Immutable."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: PeriodicGrid, values: np.ndarray, copy: bool = True):
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != grid.shape:
            raise ValueError(f"sample shape {values.shape} != grid shape {grid.shape}")
        if not np.all(np.isfinite(values.view(np.float64))):
            raise NonFiniteFieldError("field contains NaN or infinite samples")
        if copy:
            values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __setattr__(self, *_):
        raise AttributeError("Field is immutable")

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def coefficients(self) -> np.ndarray:
        return self.grid.forward(self.values)

    def mean(self) -> complex:
        return complex(self.values.mean())

    def is_mean_free(self, rtol: float = _MEAN_FREE_RTOL) -> bool:
        scale = float(np.sqrt(np.mean(np.abs(self.values) ** 2)))
        return abs(self.mean()) <= rtol * max(scale, 1e-300)

    @staticmethod
    def from_coefficients(grid: PeriodicGrid, coeffs: np.ndarray) -> "Field":
        return Field(grid, grid.inverse(coeffs), copy=False)

    @staticmethod
    def zero(grid: PeriodicGrid) -> "Field":
        return Field(grid, np.zeros(grid.shape, dtype=np.complex128), copy=False)


class WaveState:
    """Pair (position, velocity) of the second-order flow, on one grid."""

    __slots__ = ("position", "velocity")

    def __init__(self, position: Field, velocity: Field):
        if position.grid != velocity.grid:
            raise ValueError("position and velocity must share one grid")
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "velocity", velocity)

    def __setattr__(self, *_):
        raise AttributeError("WaveState is immutable")

    @property
    def grid(self):
        return self.position.grid


class Multiplier:
    """Radial Fourier multiplier m(|xi|), with explicit zero-mode value.

    `radial` maps an array of |xi| >= 0 to symbol values; `zero_value`
    overrides the symbol at xi = 0 (used to regularize removable
    singularities such as sin(t*r)/r); `negative_order` marks symbols that
    are singular at xi = 0 and triggers the zero-mode policy; `odd` marks
    sign-antisymmetric symbols whose Nyquist row has no partner and is
    therefore zeroed first.
    """

    def __init__(self, radial, name: str, zero_value=None,
                 negative_order: bool = False, odd: bool = False):
        self.radial = radial
        self.name = name
        self.zero_value = zero_value
        self.negative_order = negative_order
        self.odd = odd

    def symbol(self, grid: PeriodicGrid) -> np.ndarray:
        r = grid.xi_magnitude()
        if self.negative_order or self.zero_value is not None:
            values = np.empty(grid.shape, dtype=np.complex128)
            nonzero = r > 0
            values[nonzero] = self.radial(r[nonzero])
            values[~nonzero] = 0.0 if self.zero_value is None else self.zero_value
        else:
            values = np.asarray(self.radial(r), dtype=np.complex128)
        if not np.all(np.isfinite(values.view(np.float64))):
            raise ValueError(f"multiplier {self.name!r} is not finite on the lattice")
        return values

    def __mul__(self, other: "Multiplier") -> "Multiplier":
        def product(r):
            return np.asarray(self.radial(r)) * np.asarray(other.radial(r))

        zv = None
        if self.zero_value is not None or other.zero_value is not None:
            a = self.zero_value if self.zero_value is not None else (
                0.0 if self.negative_order else complex(np.asarray(self.radial(np.array([0.0])))[0]))
            b = other.zero_value if other.zero_value is not None else (
                0.0 if other.negative_order else complex(np.asarray(other.radial(np.array([0.0])))[0]))
            zv = a * b
        return Multiplier(product, f"({self.name})*({other.name})", zero_value=zv,
                          negative_order=self.negative_order or other.negative_order,
                          odd=self.odd ^ other.odd)

    def __repr__(self):
        return f"Multiplier({self.name})"


def frac_laplacian(sigma: float) -> Multiplier:
    """|xi|^sigma, the fractional Laplacian symbol (value 0 at xi = 0)."""
    return Multiplier(lambda r: r ** float(sigma), f"|xi|^{sigma}", zero_value=0.0)


def bracket(gamma: float) -> Multiplier:
    """(1 + |xi|^2)^(gamma/2), the inhomogeneous smoothing symbol."""
    return Multiplier(lambda r: (1.0 + r * r) ** (0.5 * float(gamma)),
                      f"<xi>^{gamma}")


def frac_integral(sigma: float) -> Multiplier:
    """|xi|^(-sigma); singular at xi = 0, so the zero-mode policy applies."""
    return Multiplier(lambda r: r ** (-float(sigma)), f"|xi|^-{sigma}",
                      negative_order=True)


def schrodinger_phase(t: float, sigma: float) -> Multiplier:
    """exp(-i*t*|xi|^sigma), the free Schrodinger propagator symbol."""
    return Multiplier(lambda r: np.exp(-1j * t * r ** float(sigma)),
                      f"exp(-i{t}|xi|^{sigma})")


def wave_cos(t: float, sigma: float) -> Multiplier:
    """cos(t*|xi|^sigma)."""
    return Multiplier(lambda r: np.cos(t * r ** float(sigma)) + 0j,
                      f"cos({t}|xi|^{sigma})")


def wave_sinc(t: float, sigma: float) -> Multiplier:
    """sin(t*|xi|^sigma)/|xi|^sigma with the limiting value t at xi = 0."""
    def radial(r):
        rs = r ** float(sigma)
        return np.sin(t * rs) / rs

    return Multiplier(radial, f"sinc({t}|xi|^{sigma})", zero_value=complex(t))


def wave_sin_scaled(t: float, sigma: float) -> Multiplier:
    """|xi|^sigma * sin(t*|xi|^sigma) (value 0 at xi = 0)."""
    def radial(r):
        rs = r ** float(sigma)
        return rs * np.sin(t * rs)

    return Multiplier(radial, f"|xi|^{sigma} sin({t}|xi|^{sigma})", zero_value=0.0)


def apply_multiplier(field: Field, mult: Multiplier, *,
                     project_out_mean: bool = False) -> Field:
    """Inverse-transform(symbol * forward-transform(field)).

    Negative-order symbols on nonzero-mean data raise ZeroModePolicyError
    unless project_out_mean is set, in which case the mean is removed first.
    """
    coeffs = field.coefficients()
    if mult.negative_order:
        zero = (0,) * field.grid.d
        scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
        if abs(coeffs[zero]) > _MEAN_FREE_RTOL * max(scale, 1e-300):
            if not project_out_mean:
                raise ZeroModePolicyError(
                    f"multiplier {mult.name!r} needs mean-free data; pass "
                    "project_out_mean=True to remove the mean explicitly")
            coeffs = coeffs.copy()
            coeffs[zero] = 0.0
    if mult.odd:
        coeffs = np.where(field.grid.nyquist_mask(), 0.0, coeffs)
    return Field.from_coefficients(field.grid, coeffs * mult.symbol(field.grid))


def schrodinger_propagate(field: Field, t: float, sigma: float) -> Field:
    """Free fractional Schrodinger flow over time t (L^2-unitary)."""
    return apply_multiplier(field, schrodinger_phase(t, sigma))


def wave_propagate(state: WaveState, t: float, sigma: float) -> WaveState:
    """Free fractional wave flow over time t.

    position <- cos(t*Lam^s) v + sin(t*Lam^s)/Lam^s w
    velocity <- -Lam^s sin(t*Lam^s) v + cos(t*Lam^s) w
    with the zero mode following the free-particle limit (v + t*w, w).
    """
    grid = state.grid
    v_hat = state.position.coefficients()
    w_hat = state.velocity.coefficients()
    cos_sym = wave_cos(t, sigma).symbol(grid)
    sinc_sym = wave_sinc(t, sigma).symbol(grid)
    sin_sym = wave_sin_scaled(t, sigma).symbol(grid)
    pos = Field.from_coefficients(grid, cos_sym * v_hat + sinc_sym * w_hat)
    vel = Field.from_coefficients(grid, -sin_sym * v_hat + cos_sym * w_hat)
    return WaveState(pos, vel)


# ---------------------------------------------------------------------------
# binary snapshot format
# ---------------------------------------------------------------------------

def write_snapshot(path, field: Field) -> None:
    """Write one field: header {FDSP, version, d, n, L, count} then complex
    samples as little-endian float64 (re, im) pairs, row-major."""
    grid = field.grid
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.d, grid.n,
                          grid.box_length, grid.size)
    payload = np.ascontiguousarray(field.values, dtype="<c16").tobytes()
    Path(path).write_bytes(header + payload)


def read_snapshot(path) -> Field:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"snapshot file too short: {path}")
    magic, version, d, n, box_length, count = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"bad snapshot magic {magic!r} in {path}")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version} in {path}")
    grid = PeriodicGrid(d, n, box_length)
    if count != grid.size:
        raise ValueError(f"sample count {count} != n^d = {grid.size} in {path}")
    data = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size, count=count)
    return Field(grid, data.reshape(grid.shape))
