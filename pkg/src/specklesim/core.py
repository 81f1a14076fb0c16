"""Shared parameter, grid and field types, plus the multiscale coordinate maps.

Everything downstream works in the natural units of the rescaled propagation
equation: transverse positions are measured in medium correlation lengths and
the axial coordinate in units of the reference distance.  Macroscopic queries
(axial offset h, lateral offset x, frequency offset Omega, tilt offset kappa)
are converted to physical simulation coordinates by :func:`map_offsets`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ScalingRegime",
    "QueryOffsets",
    "Grid",
    "WaveField",
    "SourceSpec",
    "map_offsets",
    "map_offsets_inverse",
    "build_grid",
    "coupling_scale_hint",
]


def _as_vector(value, d, name):
    """Coerce a scalar or sequence to a length-d float tuple (scalars broadcast)."""
    if np.isscalar(value):
        return (float(value),) * d
    vec = tuple(float(v) for v in value)
    if len(vec) != d:
        raise ValueError(f"{name} must have {d} components, got {len(vec)}")
    return vec


def coupling_scale_hint(epsilon):
    """Asymptotic coupling scale 1/log|log eps| associated with a small parameter.

    Informational only: any pair eps << eta <= 1 defines a usable regime, this
    is the bookkeeping relation of the asymptotic analysis.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    return 1.0 / math.log(abs(math.log(epsilon)))


@dataclass(frozen=True)
class ScalingRegime:
    """Parameter bundle of the weak-coupling / diffusive propagation regime.

    Attributes
    ----------
    epsilon : small envelope scale, 0 < epsilon < eta
    eta : intermediate coupling scale in (0, 1]; optical depth is 1/eta**2
    omega0 : carrier frequency (inverse length), > 0
    k0 : carrier transverse wavevector, length-d tuple
    z0 : reference propagation distance, >= 0
    d : transverse dimension, 1 or 2
    """

    epsilon: float = 0.01
    eta: float = 0.25
    omega0: float = 1.0
    k0: tuple = (0.0,)
    z0: float = 1.0
    d: int = 1

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"transverse dimension must be 1 or 2, got {self.d}")
        if not 0 < self.epsilon < self.eta:
            raise ValueError(
                f"require 0 < epsilon < eta, got epsilon={self.epsilon}, eta={self.eta}"
            )
        if not self.eta <= 1.0:
            raise ValueError(f"eta must be <= 1, got {self.eta}")
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.z0 < 0:
            raise ValueError(f"z0 must be non-negative, got {self.z0}")
        object.__setattr__(self, "k0", _as_vector(self.k0, self.d, "k0"))

    @property
    def optical_depth(self):
        return 1.0 / self.eta**2

    def soft_notes(self):
        """Non-fatal consistency notes (returned, never raised).

        The asymptotic analysis ties eta to 1/log|log eps|; the simulator
        treats them as free parameters, so the relation is only reported.
        """
        notes = []
        hint = coupling_scale_hint(self.epsilon)
        notes.append(
            f"coupling hint: eta ~ 1/log|log eps| = {hint:.4g} (configured eta={self.eta:.4g})"
        )
        if self.optical_depth < 4:
            notes.append(
                f"optical depth 1/eta^2 = {self.optical_depth:.3g} is shallow; "
                "diffusive-limit formulas assume eta << 1"
            )
        return notes


@dataclass(frozen=True)
class QueryOffsets:
    """Macroscopic offsets (h, x, Omega, kappa) around a base point r.

    The physical evaluation point is obtained through :func:`map_offsets`.
    """

    h: float = 0.0
    x: tuple = (0.0,)
    Omega: float = 0.0
    kappa: tuple = (0.0,)
    r: tuple = (0.0,)

    def __post_init__(self):
        d = max(
            len(v) if not np.isscalar(v) else 1 for v in (self.x, self.kappa, self.r)
        )
        for name in ("x", "kappa", "r"):
            object.__setattr__(self, name, _as_vector(getattr(self, name), d, name))
        for name in ("h", "Omega"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)


def map_offsets(regime, q):
    """Map macroscopic offsets to physical coordinates.

    Returns ``(z, x_phys, omega, k)`` with

        z      = z0 + eps*eta*h
        x_phys = r/eps + eta*x      (componentwise)
        omega  = omega0 + eps*eta*Omega
        k      = k0 + eps*kappa     (componentwise)
    """
    eps, eta = regime.epsilon, regime.eta
    z = regime.z0 + eps * eta * q.h
    x_phys = tuple(r / eps + eta * x for r, x in zip(q.r, q.x))
    omega = regime.omega0 + eps * eta * q.Omega
    k = tuple(k0 + eps * kap for k0, kap in zip(regime.k0, q.kappa))
    return z, x_phys, omega, k


def map_offsets_inverse(regime, z, x_phys, omega, k, r=None):
    """Invert :func:`map_offsets` for a fixed regime and base point r."""
    eps, eta = regime.epsilon, regime.eta
    if r is None:
        r = (0.0,) * regime.d
    r = _as_vector(r, regime.d, "r")
    h = (z - regime.z0) / (eps * eta)
    x = tuple((xp - ri / eps) / eta for xp, ri in zip(x_phys, r))
    Omega = (omega - regime.omega0) / (eps * eta)
    kappa = tuple((ki - k0i) / eps for ki, k0i in zip(k, regime.k0))
    return QueryOffsets(h=h, x=x, Omega=Omega, kappa=kappa, r=r)


@dataclass(frozen=True)
class Grid:
    """Periodic transverse grid with n points per dimension over length L.

    The dual grid carries wavenumbers ``xi = 2*pi*fftfreq(n, dx)`` in FFT
    ordering, spacing ``2*pi/L`` and Nyquist magnitude ``pi/dx``.
    """

    n: int
    length: float

    def __post_init__(self):
        n = int(self.n)
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"grid length must be positive, got {self.length}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self):
        return self.length / self.n

    @property
    def nyquist(self):
        return math.pi / self.spacing

    def x_axis(self):
        """Centered coordinates -L/2 .. L/2 - dx (periodic; envelopes sit mid-box)."""
        return (np.arange(self.n) - self.n // 2) * self.spacing

    def xi_axis(self):
        return 2.0 * math.pi * np.fft.fftfreq(self.n, d=self.spacing)

    def shape(self, d):
        return (self.n,) * d

    def x_mesh(self, d):
        """Tuple of d coordinate arrays broadcast over the d-dim grid."""
        ax = self.x_axis()
        if d == 1:
            return (ax,)
        return np.meshgrid(*([ax] * d), indexing="ij")

    def xi_mesh(self, d):
        ax = self.xi_axis()
        if d == 1:
            return (ax,)
        return np.meshgrid(*([ax] * d), indexing="ij")

    def xi_squared(self, d):
        """|xi|^2 on the d-dim dual grid, FFT ordering."""
        out = 0.0
        for m in self.xi_mesh(d):
            out = out + m**2
        return out


def build_grid(n, length):
    """Construct a validated periodic grid."""
    return Grid(n=n, length=length)


@dataclass
class WaveField:
    """Complex field on the periodic grid at axial position z.

    ``values`` has shape ``grid.shape(d)``; ``omega`` and ``k`` record the
    source frequency and tilt the field was launched with.
    """

    values: np.ndarray
    z: float
    omega: float
    k: tuple
    grid: Grid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        d = self.values.ndim
        if self.values.shape != self.grid.shape(d):
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape(d)}"
            )
        self.k = _as_vector(self.k, d, "k")

    @property
    def d(self):
        return self.values.ndim

    def energy(self):
        """Discrete L2 mass sum(|u|^2) * dx^d, conserved by propagation."""
        return float(np.sum(np.abs(self.values) ** 2)) * self.grid.spacing**self.d

    def fft(self):
        """Continuum-normalized transform: dx^d * FFT(values)."""
        return np.fft.fftn(self.values) * self.grid.spacing**self.d

    def copy(self):
        return WaveField(self.values.copy(), self.z, self.omega, self.k, self.grid)


@dataclass(frozen=True)
class SourceSpec:
    """Incident beam profile: broad envelope u0(eps*x) with a plane-phase tilt.

    profile 'plane_wave' has unit modulus; 'gaussian' has envelope
    exp(-|y|^2 / (2 w^2)) evaluated at y = eps*x.
    """

    profile: str = "plane_wave"
    width: float = 1.0
    tilt: tuple = (0.0,)

    def __post_init__(self):
        if self.profile not in ("plane_wave", "gaussian"):
            raise ValueError(f"unknown source profile {self.profile!r}")
        if self.profile == "gaussian" and not self.width > 0:
            raise ValueError("gaussian source width must be positive")
        tilt = self.tilt
        if np.isscalar(tilt):
            tilt = (float(tilt),)
        object.__setattr__(self, "tilt", tuple(float(t) for t in tilt))

    def envelope(self, *y):
        """Envelope u0 evaluated at macroscopic coordinates y (one array per axis)."""
        if self.profile == "plane_wave":
            return np.ones_like(np.asarray(y[0], dtype=float))
        r2 = sum(np.asarray(c, dtype=float) ** 2 for c in y)
        return np.exp(-r2 / (2.0 * self.width**2))

    @property
    def is_plane_wave(self):
        return self.profile == "plane_wave"

    def gamma_check(self, *k):
        """Source angular spectrum Gamma_check(k) = int |u0(r)|^2 exp(-i k.r) dr.

        Defined for decaying envelopes; plane waves carry a delta at k=0 and
        are handled by the callers' plane-wave branches.
        """
        if self.is_plane_wave:
            raise ValueError(
                "gamma_check of a plane wave is a delta; use the plane-wave branch"
            )
        d = len(k)
        k2 = sum(np.asarray(c, dtype=float) ** 2 for c in k)
        w = self.width
        return (math.pi * w * w) ** (d / 2.0) * np.exp(-(w * w) * k2 / 4.0)
