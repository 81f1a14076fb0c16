"""Split-step Monte Carlo solver for the rescaled stochastic paraxial equation.

Each propagation step of length dz is a symmetric (Strang) composition:
half a free-diffraction step applied as a Fourier multiplier, one random
phase screen applied pointwise, and another half diffraction step.  The
screen multiplier exp(i w dB / (2 eta)) is an exponential martingale whose
mean carries exactly the damping term of the Ito equation, so no separate
drift factor is applied and both substeps are unitary: pathwise energy is
conserved to FFT roundoff.

Screens are synthesized spectrally: independent complex gaussians weighted
by the medium spectrum, with the real part providing the Hermitian
symmetrization.  The resulting field has the exact periodic covariance
dz * R_per(x - y), where R_per is the periodization of the model covariance
(indistinguishable from R once the box holds several correlation lengths).

Every realization owns a counter-based Philox stream derived from
(seed, realization_index); a realization's screens depend only on that
stream and the step sequence, which makes shared-medium pair propagation
and bitwise reproducibility trivial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .core import Grid, SourceSpec, WaveField

__all__ = [
    "PhaseScreen",
    "CompensatedField",
    "EnsembleSpec",
    "dz_bound",
    "init_source",
    "make_screen",
    "step",
    "propagate",
    "phase_compensate",
    "propagate_pair_shared_noise",
    "realization_rng",
    "propagate_ensemble",
]


@dataclass
class PhaseScreen:
    """Accumulated medium increment over one axial step of extent dz."""

    values: np.ndarray
    dz: float


@dataclass
class CompensatedField:
    """Field in the Fourier domain with free phase and damping removed."""

    values: np.ndarray
    z: float
    omega: float
    k: tuple
    grid: Grid


@dataclass(frozen=True)
class EnsembleSpec:
    """Monte Carlo ensemble contract: size, master seed, batch granularity."""

    n_realizations: int
    seed: int
    batch_size: int = 256

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValueError("ensemble needs at least one realization")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


def realization_rng(seed, index):
    """Independent counter-based stream for one realization."""
    return Generator(Philox(SeedSequence((int(seed), int(index)))))


def dz_bound(regime, grid, model, omega=None):
    """Largest admissible step: edge-mode phase and screen variance both < 1.

    The diffraction phase at the Nyquist mode, eta*dz*xi_max^2/(2*eps*omega),
    and the per-step screen variance, omega^2 R(0) dz / (4 eta^2), must each
    stay below one for the splitting to resolve the dynamics.
    """
    w = regime.omega0 if omega is None else omega
    xi_max_sq = grid.nyquist**2 * regime.d
    phase_cap = 2.0 * regime.epsilon * w / (regime.eta * xi_max_sq)
    if model.r0 > 0:
        var_cap = 4.0 * regime.eta**2 / (w**2 * model.r0)
    else:
        var_cap = math.inf
    return min(phase_cap, var_cap)


def init_source(regime, grid, spec):
    """Sample the incident beam u0(eps*x) exp(i k.x) on the grid.

    The total tilt k = k0 + eps*kappa is taken from ``spec.tilt`` (already in
    physical units) added to the regime carrier; it must resolve on the grid.
    """
    d = regime.d
    k = tuple(k0 + t for k0, t in zip(regime.k0, (spec.tilt + (0.0,) * d)[:d]))
    if any(abs(ki) >= grid.nyquist for ki in k):
        raise ValueError(
            f"tilt {k} is at or beyond the grid Nyquist wavenumber {grid.nyquist:.4g}"
        )
    mesh = grid.x_mesh(d)
    envelope = spec.envelope(*(regime.epsilon * m for m in mesh))
    phase = sum(ki * m for ki, m in zip(k, mesh))
    values = envelope * np.exp(1j * phase)
    return WaveField(values=values, z=0.0, omega=regime.omega0, k=k, grid=grid)


@lru_cache(maxsize=64)
def _screen_amplitude(model, grid, dz):
    """sqrt of the per-mode spectral variance dz * Rhat(xi) / L^d."""
    d = model.d
    spec = model.Rhat_radial_sq(grid.xi_squared(d))
    return np.sqrt(np.maximum(dz * spec / grid.length**d, 0.0))


def _screen_block(model, grid, dz, rngs):
    """Draw one screen per stream in ``rngs``; returns (len(rngs), *shape)."""
    d = model.d
    shape = grid.shape(d)
    npts = grid.n**d
    amp = _screen_amplitude(model, grid, dz)
    coeff = np.empty((len(rngs), npts), dtype=np.complex128)
    for i, rng in enumerate(rngs):
        coeff[i] = rng.standard_normal(2 * npts).view(np.complex128)
    coeff = coeff.reshape((len(rngs),) + shape)
    coeff *= amp
    vals = np.fft.ifftn(coeff, axes=tuple(range(1, d + 1)))
    return vals.real * npts


def make_screen(model, grid, dz, rng):
    """One phase-screen increment with covariance dz * R(x1 - x2)."""
    if dz < 0:
        raise ValueError("dz must be non-negative")
    values = _screen_block(model, grid, dz, [rng])[0]
    return PhaseScreen(values=values, dz=dz)


def _half_multiplier(field, regime, dz):
    xi2 = field.grid.xi_squared(field.d)
    return np.exp(-1j * regime.eta * dz * xi2 / (4.0 * regime.epsilon * field.omega))


def step(field, model, regime, dz, rng):
    """One Strang step: half diffraction, phase screen, half diffraction."""
    bound = dz_bound(regime, field.grid, model, omega=field.omega)
    if dz > bound * (1.0 + 1e-12):
        raise ValueError(f"dz={dz:.4g} exceeds the admissible step {bound:.4g}")
    half = _half_multiplier(field, regime, dz)
    uhat = np.fft.fftn(field.values) * half
    u = np.fft.ifftn(uhat)
    screen = make_screen(model, field.grid, dz, rng)
    u *= np.exp((1j * field.omega / (2.0 * regime.eta)) * screen.values)
    uhat = np.fft.fftn(u) * half
    u = np.fft.ifftn(uhat)
    return WaveField(u, field.z + dz, field.omega, field.k, field.grid)


def _n_steps(z_from, z_to, dz):
    span = z_to - z_from
    if span < 0:
        raise ValueError(f"z_target {z_to} is behind the field position {z_from}")
    if span == 0:
        return 0, dz
    n = max(1, int(math.ceil(span / dz - 1e-12)))
    return n, span / n


def propagate(field, model, regime, z_target, dz, rng, trace_every=None):
    """Advance the field to z_target by repeated Strang steps.

    The span is divided into equal steps no longer than dz.  With
    ``trace_every=m`` every m-th intermediate field is collected and the
    return value is ``(field, trace)``.
    """
    n, h = _n_steps(field.z, z_target, dz)
    out = field.copy()
    trace = []
    for i in range(n):
        out = step(out, model, regime, h, rng)
        if trace_every and (i + 1) % trace_every == 0:
            trace.append(out.copy())
    if trace_every:
        return out, trace
    return out


def phase_compensate(field, regime, model):
    """Remove the free Fourier phase and the mean damping from the field.

    Returns the spectral array dx^d * FFT(u) * exp(i eta z |xi|^2/(2 eps w))
    * exp(w^2 R(0) z/(8 eta^2)).  The growth exponent is clamped at 700 to
    keep the compensation representable.
    """
    growth = field.omega**2 * model.r0 * field.z / (8.0 * regime.eta**2)
    if growth > 700.0:
        raise ValueError(
            f"compensation exponent {growth:.3g} exceeds 700; field too deep to compensate"
        )
    xi2 = field.grid.xi_squared(field.d)
    phase = regime.eta * field.z * xi2 / (2.0 * regime.epsilon * field.omega)
    values = field.fft() * np.exp(1j * phase) * math.exp(growth)
    return CompensatedField(
        values=values, z=field.z, omega=field.omega, k=field.k, grid=field.grid
    )


def propagate_pair_shared_noise(field_a, field_b, model, regime, z_target, dz, rng):
    """Advance two fields through identical screen realizations."""
    if field_a.grid != field_b.grid or field_a.d != field_b.d:
        raise ValueError("paired fields must share one grid")
    if field_a.z != field_b.z:
        raise ValueError("paired fields must start at the same z")
    n, h = _n_steps(field_a.z, z_target, dz)
    a, b = field_a.copy(), field_b.copy()
    for _ in range(n):
        screen = make_screen(model, a.grid, h, rng)
        a = _step_with_screen(a, regime, h, screen)
        b = _step_with_screen(b, regime, h, screen)
    return a, b


def _step_with_screen(field, regime, dz, screen):
    half = _half_multiplier(field, regime, dz)
    uhat = np.fft.fftn(field.values) * half
    u = np.fft.ifftn(uhat)
    u *= np.exp((1j * field.omega / (2.0 * regime.eta)) * screen.values)
    uhat = np.fft.fftn(u) * half
    return WaveField(np.fft.ifftn(uhat), field.z + dz, field.omega, field.k, field.grid)


def propagate_ensemble(regime, grid, model, specs, z_stops, dz, ensemble, start=0, stop=None):
    """Batched ensemble propagation with shared screens across sources.

    Parameters
    ----------
    specs : list of SourceSpec propagated jointly through identical media
        (one realization = one medium seen by every spec).
    z_stops : increasing checkpoint positions; each segment is divided into
        equal steps no longer than dz.
    ensemble : EnsembleSpec.
    start, stop : realization index range to process (defaults to the full
        ensemble); realization i always uses the stream (seed, i), so any
        partition over ranges reproduces the same per-realization fields.

    Yields ``(start_index, {z: block})`` per batch, where ``block`` has shape
    ``(batch, len(specs), *grid.shape(d))``.  The half-steps of adjacent
    Strang steps are merged inside a batch (an exact regrouping), and the
    reduction order over batches is fixed, so results are reproducible and
    independent of batching.
    """
    if isinstance(specs, SourceSpec):
        specs = [specs]
    z_stops = [float(z) for z in z_stops]
    if not z_stops or z_stops[0] <= 0 or any(
        z2 <= z1 for z1, z2 in zip(z_stops, z_stops[1:])
    ):
        raise ValueError("z_stops must be positive and strictly increasing")
    d = regime.d
    fields0 = [init_source(regime, grid, s) for s in specs]
    omegas = np.array([f.omega for f in fields0])
    for w in omegas:
        b = dz_bound(regime, grid, model, omega=float(w))
        if dz > b * (1.0 + 1e-12):
            raise ValueError(f"dz={dz:.4g} exceeds the admissible step {b:.4g}")

    # steps per segment; every segment must divide evenly into steps of ~dz
    seg_edges = [0.0] + z_stops
    seg_steps = []
    for z1, z2 in zip(seg_edges, seg_edges[1:]):
        n, h = _n_steps(z1, z2, dz)
        seg_steps.append((n, h))

    xi2 = grid.xi_squared(d)
    amp_cache = {}

    base = np.stack([f.values for f in fields0])  # (nspec, *shape)
    scale = (1j * omegas / (2.0 * regime.eta)).reshape((-1,) + (1,) * d)

    stop = ensemble.n_realizations if stop is None else min(stop, ensemble.n_realizations)
    bs = ensemble.batch_size
    for first in range(start, stop, bs):
        b = min(bs, stop - first)
        rngs = [realization_rng(ensemble.seed, first + i) for i in range(b)]
        uhat = np.broadcast_to(base, (b,) + base.shape).copy()
        uhat = np.fft.fftn(uhat, axes=tuple(range(2, d + 2)))
        out = {}
        for (n, h), z_stop in zip(seg_steps, z_stops):
            if h not in amp_cache:
                phase = regime.eta * h * xi2 / (4.0 * regime.epsilon)
                amp_cache[h] = np.exp(
                    -1j * phase[None] / omegas.reshape((-1,) + (1,) * d)
                )
            half = amp_cache[h]
            uhat *= half  # open the segment's first step
            for m in range(n):
                u = np.fft.ifftn(uhat, axes=tuple(range(2, d + 2)))
                screens = _screen_block(model, grid, h, rngs)
                u *= np.exp(scale * screens[:, None])
                uhat = np.fft.fftn(u, axes=tuple(range(2, d + 2)))
                uhat *= half  # close step m
                if m < n - 1:
                    uhat *= half  # reopen: two merged halves form a full step
            out[z_stop] = np.fft.ifftn(uhat, axes=tuple(range(2, d + 2)))
        yield first, out
