"""Initial-data profiles and the seeded random-field generator used by the
inequality and norm suites.

Random fields are band-limited complex Gaussians with power-law spectra
|xi|^-alpha; the generator is seed-deterministic and, via `modes_cap`, can
produce the same continuum function on refined grids (coarse-band coefficients
embedded in the finer lattice).
"""

from __future__ import annotations

import numpy as np

from .spectral import Field, PeriodicGrid, read_snapshot


def gaussian(grid: PeriodicGrid, amplitude: float = 1.0, width: float = 1.0,
             center=None, velocity=None) -> Field:
    """amplitude * exp(-|x-center|^2 / (2 width^2)) * exp(i velocity . x).

    center defaults to the box midpoint; velocity is an integer mode vector
    so the phase factor is grid-periodic.
    """
    if center is None:
        center = [grid.box_length / 2.0] * grid.d
    center = np.atleast_1d(np.asarray(center, dtype=float))
    coords = grid.meshgrid()
    sq = np.zeros(grid.shape)
    for axis in range(grid.d):
        delta = coords[axis] - center[axis]
        # nearest periodic image keeps the bump smooth across the seam
        delta -= grid.box_length * np.round(delta / grid.box_length)
        sq += delta ** 2
    values = amplitude * np.exp(-sq / (2.0 * width ** 2)).astype(np.complex128)
    if velocity is not None:
        modes = np.atleast_1d(np.asarray(velocity, dtype=float))
        phase = np.zeros(grid.shape)
        for axis in range(grid.d):
            phase += 2.0 * np.pi * modes[axis] / grid.box_length * coords[axis]
        values = values * np.exp(1j * phase)
    return Field(grid, values, copy=False)


def plane_wave(grid: PeriodicGrid, amplitude: float = 1.0, mode=1) -> Field:
    """amplitude * exp(i xi0 . x) with xi0 = 2*pi*mode/L on the lattice."""
    modes = np.atleast_1d(np.asarray(mode, dtype=float))
    if modes.size != grid.d:
        modes = np.resize(modes, grid.d)
    coords = grid.meshgrid()
    phase = np.zeros(grid.shape)
    for axis in range(grid.d):
        phase += 2.0 * np.pi * modes[axis] / grid.box_length * coords[axis]
    return Field(grid, amplitude * np.exp(1j * phase), copy=False)


def bump(grid: PeriodicGrid, amplitude: float = 1.0, width: float = 1.0,
         center=None) -> Field:
    """Soliton-like sech profile, periodized to the nearest image."""
    if center is None:
        center = [grid.box_length / 2.0] * grid.d
    center = np.atleast_1d(np.asarray(center, dtype=float))
    coords = grid.meshgrid()
    sq = np.zeros(grid.shape)
    for axis in range(grid.d):
        delta = coords[axis] - center[axis]
        delta -= grid.box_length * np.round(delta / grid.box_length)
        sq += delta ** 2
    values = amplitude / np.cosh(np.sqrt(sq) / width)
    return Field(grid, values.astype(np.complex128), copy=False)


def band_profile(grid: PeriodicGrid, scale: float = 1.0, center=None,
                 envelope_order: int = 0) -> Field:
    """Wave packet whose transform is the smooth annulus bump at |xi| ~ scale,
    centered at the box midpoint. Used by the dispersive-decay probe.

    With envelope_order = k > 0 the bump is multiplied by the polynomial
    window [4 (r-a)(b-r) / (b-a)^2]^k on [a, b] = [0.55, 1.95] * scale (zero
    outside). The support stays inside the band annulus, while the packet's
    spatial tails improve from the bump's slow Gevrey rate to x^-(k+1),
    which keeps free-space probes on large boxes below the wraparound alarm.
    """
    from .lpnorms import STANDARD_CUTOFF

    if center is None:
        center = [grid.box_length / 2.0] * grid.d
    center = np.atleast_1d(np.asarray(center, dtype=float))
    r = grid.xi_magnitude()
    coeffs = STANDARD_CUTOFF.chi(r / float(scale)).astype(np.complex128)
    if envelope_order > 0:
        a, b = 0.55 * float(scale), 1.95 * float(scale)
        window = np.clip(4.0 * (r - a) * (b - r) / (b - a) ** 2, 0.0, None)
        coeffs = coeffs * window ** int(envelope_order)
    # modulate so the packet sits at `center` instead of the origin
    for axis in range(grid.d):
        shape = [1] * grid.d
        shape[axis] = grid.n
        coeffs = coeffs * np.exp(-1j * grid.xi_axis * center[axis]).reshape(shape)
    return Field.from_coefficients(grid, coeffs)


def random_field(grid: PeriodicGrid, seed: int, alpha: float = 0.0,
                 modes_cap: int = None, mean_free: bool = False,
                 amplitude: float = 1.0) -> Field:
    """Band-limited complex Gaussian with spectrum ~ |xi|^-alpha.

    Modes with per-axis index |k| >= modes_cap (default n/4) are zero, so a
    field drawn at (seed, modes_cap) on a coarse grid and on any refinement
    of it represents the same band-limited function.
    """
    if modes_cap is None:
        modes_cap = grid.n // 4
    rng = np.random.default_rng(seed)
    shape = (2 * modes_cap - 1,) * grid.d  # per-axis indices -(cap-1)..cap-1
    raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    idx = np.arange(-(modes_cap - 1), modes_cap)
    grids = np.meshgrid(*([idx] * grid.d), indexing="ij")
    ksq = np.zeros(shape)
    for g in grids:
        ksq += (2.0 * np.pi / grid.box_length * g) ** 2
    kmag = np.sqrt(ksq)
    weight = np.ones(shape)
    nonzero = kmag > 0
    weight[nonzero] = kmag[nonzero] ** (-float(alpha))
    if mean_free:
        weight[~nonzero] = 0.0
    target = tuple(g % grid.n for g in grids)
    coeffs[target] = amplitude * raw * weight
    return Field.from_coefficients(grid, coeffs)


def from_file(grid: PeriodicGrid, path) -> Field:
    """Load a snapshot and check it matches the requested grid."""
    field = read_snapshot(path)
    if field.grid != grid:
        raise ValueError(
            f"snapshot grid {field.grid!r} does not match configured {grid!r}")
    return field
