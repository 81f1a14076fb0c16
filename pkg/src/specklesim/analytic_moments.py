"""Closed-form and semi-analytic evaluation of the limiting two-point moment.

The mutual coherence function M(z, r, tau) of the diffusive limit solves a
transport equation whose r-Fourier modes decouple.  Three independent routes
to it are provided:

* a complex quadratic ansatz whose coefficients (a, b, c, d) obey a small ODE
  system integrated by classical fixed-step RK4, with closed hyperbolic forms
  for a and b as an oracle,
* a direct split-step solve of the (zeta, tau) transport equation,
* for zero frequency offset, the explicit solution as a double quadrature
  over the dual variable and the source plane.

The full two-point function m11(h, tau) at axial/chromatic offsets is the
Fresnel transform of M in tau; for plane waves it reduces to an explicit
complex gaussian expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SourceSpec

__all__ = [
    "ABCDState",
    "ABCDTrajectory",
    "solve_abcd",
    "closed_ab",
    "m11_planewave",
    "h_optimal",
    "fresnel_apply",
    "diffusion_kernel",
    "mcf_equal_frequency",
    "mcf_from_ansatz",
    "mcf_split_step",
    "default_zeta_quadrature",
    "m11",
]


def _vec(x, d):
    if np.isscalar(x):
        return (float(x),) * d
    out = tuple(float(v) for v in x)
    if len(out) != d:
        raise ValueError(f"expected {d} components, got {len(out)}")
    return out


def _norm_sq(v):
    return float(sum(c * c for c in v))


def _dot(u, v):
    return float(sum(a * b for a, b in zip(u, v)))


@dataclass
class ABCDState:
    """Quadratic-ansatz coefficients at one axial position."""

    z: float
    a: complex
    b: complex
    c: complex
    d: complex
    alpha: complex

    def frak_b(self, h, omega0):
        """b_R + i(b_I - omega0/(2h)); the Fresnel-shifted curvature."""
        if h == 0:
            raise ValueError("frak_b is undefined at h = 0 (delta-kernel branch)")
        return complex(self.b.real, self.b.imag - omega0 / (2.0 * h))


@dataclass
class ABCDTrajectory:
    """RK4 trajectory of the ansatz coefficients on a uniform z mesh."""

    z: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    alpha: complex

    def final(self):
        return ABCDState(
            z=float(self.z[-1]),
            a=complex(self.a[-1]),
            b=complex(self.b[-1]),
            c=complex(self.c[-1]),
            d=complex(self.d[-1]),
            alpha=self.alpha,
        )


def _alpha_of(Omega, sigma2):
    """alpha = exp(i pi/4) sqrt(sigma2 * Omega / 4) for Omega >= 0."""
    return np.exp(1j * math.pi / 4.0) * math.sqrt(sigma2 * Omega / 4.0)


def solve_abcd(z, Omega, omega0, sigma2, dz_ode=1e-3, dim=1, guard=1e8):
    """Integrate the quadratic-ansatz ODE system from 0 to z with RK4.

        a' = dim * i Omega b / omega0^2
        b' = -2 i Omega b^2 / omega0^2 + omega0^2 sigma2 / 8
        c' = -2 i Omega b c / omega0^2 + omega0 sigma2 z / 4
        d' = -i Omega c^2 / (2 omega0^2) + sigma2 z^2 / 8

    with a(0)=b(0)=c(0)=d(0)=0.  The laplacian of the ansatz contributes one
    copy of b per transverse dimension, hence the ``dim`` factor in a'.
    """
    if dz_ode <= 0:
        raise ValueError("dz_ode must be positive")
    n = max(1, int(math.ceil(z / dz_ode - 1e-12))) if z > 0 else 0
    h = z / n if n else 0.0
    w2 = omega0**2

    def rhs(zz, y):
        a, b, c, d = y
        return np.array(
            [
                dim * 1j * Omega * b / w2,
                -2j * Omega * b * b / w2 + w2 * sigma2 / 8.0,
                -2j * Omega * b * c / w2 + omega0 * sigma2 * zz / 4.0,
                -1j * Omega * c * c / (2.0 * w2) + sigma2 * zz * zz / 8.0,
            ],
            dtype=np.complex128,
        )

    zs = np.linspace(0.0, z, n + 1)
    traj = np.zeros((n + 1, 4), dtype=np.complex128)
    y = np.zeros(4, dtype=np.complex128)
    for i in range(n):
        zz = zs[i]
        k1 = rhs(zz, y)
        k2 = rhs(zz + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(zz + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(zz + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if abs(y[1]) > guard:
            raise ValueError(
                f"ansatz coefficient b diverged (|b|={abs(y[1]):.3g}) at z={zs[i + 1]:.4g}; "
                "reduce dz_ode"
            )
        traj[i + 1] = y
    alpha = _alpha_of(abs(Omega), sigma2)
    return ABCDTrajectory(
        z=zs, a=traj[:, 0], b=traj[:, 1], c=traj[:, 2], d=traj[:, 3], alpha=alpha
    )


def closed_ab(z, Omega, omega0, sigma2, dim=1):
    """Hyperbolic closed forms for a and b; returns (a, b, alpha).

    For Omega > 0, with alpha = exp(i pi/4) sqrt(sigma2 Omega / 4),

        a = (dim/2) * log cosh(alpha z),   b = omega0^2 sigma2 tanh(alpha z)/(8 alpha).

    The complex log is branch-tracked continuously along the ray from 0 to z
    (cosh of a complex ray can wind around the origin).  Omega < 0 values
    follow from the conjugation symmetry of the coefficient ODEs, and
    Omega = 0 is the algebraic limit a = 0, b = omega0^2 sigma2 z / 8.

    ``z`` may be a scalar or an increasing array starting near 0.
    """
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    scalar = np.isscalar(z) or np.ndim(z) == 0
    if Omega == 0:
        a = np.zeros_like(zs, dtype=np.complex128)
        b = (omega0**2 * sigma2 / 8.0) * zs.astype(np.complex128)
        if scalar:
            return complex(a[0]), complex(b[0]), 0j
        return a, b, 0j
    if Omega < 0:
        a, b, alpha = closed_ab(zs, -Omega, omega0, sigma2, dim=dim)
        a, b = np.conj(a), np.conj(b)
        if scalar:
            return complex(a[0]), complex(b[0]), alpha
        return a, b, alpha

    alpha = _alpha_of(Omega, sigma2)
    z_max = float(zs.max())
    # dense ray for continuous branch tracking, with the requested nodes merged in
    dense = np.union1d(np.linspace(0.0, z_max, 4097), zs)
    w = np.cosh(alpha * dense)
    phase = np.unwrap(np.angle(w))
    log_cosh = np.log(np.abs(w)) + 1j * phase
    idx = np.searchsorted(dense, zs)
    a = (dim / 2.0) * log_cosh[idx]
    b = (omega0**2 * sigma2 / (8.0 * alpha)) * np.tanh(alpha * zs)
    if scalar:
        return complex(a[0]), complex(b[0]), alpha
    return a, b, alpha


def h_optimal(b, omega0):
    """Axial offset maximizing the plane-wave correlation at tau = 0."""
    br, bi = b.real, b.imag
    return bi * omega0 / (2.0 * (br * br + bi * bi))


def m11_planewave(h, tau, Omega, z0, omega0, sigma2, dim=1):
    """Two-point function of a plane-wave source at offsets (h, tau, Omega).

    For h != 0,

        m = (omega0 / (2 i h bfrak))^{dim/2} e^{-a}
            * exp(-omega0^2 bfrak_R |tau|^2 / (4 h^2 |bfrak|^2))
            * exp(i omega0 |tau|^2/(2h) * (1 + omega0 bfrak_I / (2 h |bfrak|^2)))

    with bfrak = b_R + i(b_I - omega0/(2h)); the h = 0 branch is the
    delta-kernel limit exp(-a - b |tau|^2).  Omega < 0 follows by conjugation.
    """
    tau = _vec(tau, dim)
    t2 = _norm_sq(tau)
    if Omega < 0:
        return complex(np.conj(m11_planewave(-h, tau, -Omega, z0, omega0, sigma2, dim)))
    a, b, _ = closed_ab(z0, Omega, omega0, sigma2, dim=dim)
    if h == 0:
        return complex(np.exp(-a - b * t2))
    bf = complex(b.real, b.imag - omega0 / (2.0 * h))
    mod2 = abs(bf) ** 2
    pref = (omega0 / (2j * h * bf)) ** (dim / 2.0)
    decay = math.exp(-(omega0**2) * bf.real * t2 / (4.0 * h * h * mod2))
    phase = np.exp(
        1j * omega0 * t2 / (2.0 * h) * (1.0 + omega0 * bf.imag / (2.0 * h * mod2))
    )
    return complex(pref * np.exp(-a) * decay * phase)


def fresnel_apply(mhat, xi_sq, h, omega0):
    """Apply the axial-offset multiplier exp(-i h |xi|^2/(2 omega0)) and invert.

    ``mhat`` holds FFT-ordered spectral coefficients (plain ``np.fft.fftn``
    output) and ``xi_sq`` the matching |xi|^2 mesh.  The multiplier has unit
    modulus, so the transform is unitary.
    """
    return np.fft.ifftn(mhat * np.exp(-1j * h * xi_sq / (2.0 * omega0)))


def diffusion_kernel(z, tau, xi, omega0, sigma2):
    """Lateral decorrelation kernel of the diffusive limit.

    exp(-(omega0^2 sigma2 z / 8) * [|tau|^2 + z (xi.tau)/omega0
        + z^2 |xi|^2 / (3 omega0^2)])
    which is the closed form of the unit-interval average of
    |tau + s xi z/omega0|^2.
    """
    if np.isscalar(tau):
        tau = (tau,)
    if np.isscalar(xi):
        xi = (xi,)
    t2 = sum(np.asarray(c, dtype=float) ** 2 for c in tau)
    x2 = sum(np.asarray(c, dtype=float) ** 2 for c in xi)
    dot = sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float) for a, b in zip(tau, xi))
    bracket = t2 + z * dot / omega0 + z * z * x2 / (3.0 * omega0**2)
    return np.exp(-(omega0**2) * sigma2 * z / 8.0 * bracket)


def _q_line_average(model, eta, tau, shift, n_s, quadratic):
    """Average of Q(eta*(tau - s*shift)) over s in [0, 1].

    ``tau`` and ``shift`` are arrays broadcastable against each other
    (d = 1 path).  With ``quadratic=True`` the gaussian well is replaced by
    its curvature -sigma2 x^2 / 2 and the average is taken in closed form.
    """
    tau = np.asarray(tau, dtype=float)
    shift = np.asarray(shift, dtype=float)
    if quadratic:
        # int_0^1 (tau - s*shift)^2 ds = tau^2 - tau*shift + shift^2/3
        bracket = tau * tau - tau * shift + shift * shift / 3.0
        return -0.5 * model.sigma2 * eta * eta * bracket
    nodes, weights = np.polynomial.legendre.leggauss(n_s)
    s = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    acc = 0.0
    for si, wi in zip(s, w):
        acc = acc + wi * model.Q(eta * (tau - si * shift))
    return acc


def mcf_equal_frequency(
    z,
    r,
    tau,
    kappa,
    source,
    model,
    regime,
    *,
    quadratic=False,
    envelope_limit=False,
    n_xi=128,
    n_rp=128,
    n_s=32,
    xi_halfwidth=None,
    rp_halfwidth=None,
):
    """Explicit zero-frequency-offset coherence by double quadrature.

    Evaluates

        M(z, r, tau) = (2 pi)^-1 int dxi int dr' u0(r' + A) u0*(r' - A)
                       exp(i xi (r - r')) exp(i r' kappa)
                       exp((omega0^2 z / (4 eta^2)) avg_s Q(eta (tau - s z xi / omega0)))

    with A = eps*eta*(tau - z xi/omega0)/2, the characteristics solution of
    the coherence transport equation at Omega = 0.  ``envelope_limit=True``
    collapses the envelope product to |u0(r')|^2 (broad-beam limit) and
    ``quadratic=True`` replaces the covariance well by its curvature; with
    both set this is the explicit diffusive-limit formula, independent of
    (eps, eta).

    Plane-wave sources collapse the quadrature: the r' integral pins
    xi = kappa exactly.  Only d = 1 envelopes are quadrature-supported.
    """
    d = regime.d
    omega0, eta, eps = regime.omega0, regime.eta, regime.epsilon
    depth = omega0**2 * z / (4.0 * eta**2)
    kappa_v = _vec(kappa, d)
    tau_v = _vec(tau, d)
    r_v = _vec(r, d)

    if source.is_plane_wave:
        # the r' integral gives a delta at xi = kappa for each axis
        val = np.exp(1j * _dot(r_v, kappa_v))
        if quadratic:
            tau_arr = np.array(tau_v)
            shift = np.array(kappa_v) * z / omega0
            bracket = float(np.sum(tau_arr**2 - tau_arr * shift + shift**2 / 3.0))
            return complex(val * math.exp(-0.5 * model.sigma2 * eta * eta * bracket * depth))
        nodes, weights = np.polynomial.legendre.leggauss(n_s)
        s = 0.5 * (nodes + 1.0)
        w = 0.5 * weights
        acc = 0.0
        for si, wi in zip(s, w):
            pt = tuple(eta * (t - si * z * k / omega0) for t, k in zip(tau_v, kappa_v))
            acc += wi * float(model.Q(*pt))
        return complex(val * math.exp(depth * acc))

    if d != 1:
        raise NotImplementedError("envelope quadrature is implemented for d = 1")
    w_src = source.width
    if xi_halfwidth is None:
        xi_halfwidth = 9.0 / w_src
    if rp_halfwidth is None:
        rp_halfwidth = 5.0 / (1.0 / w_src)  # 5 envelope widths
    kap, tau_s, r_s = kappa_v[0], tau_v[0], r_v[0]

    xn, xw = np.polynomial.legendre.leggauss(n_xi)
    xi = kap + xn * xi_halfwidth
    wxi = xw * xi_halfwidth
    rn, rw = np.polynomial.legendre.leggauss(n_rp)
    rp = rn * rp_halfwidth
    wrp = rw * rp_halfwidth

    shift = z * xi / omega0
    kern = np.exp(depth * _q_line_average(model, eta, tau_s, shift, n_s, quadratic))

    if envelope_limit:
        env = source.envelope(rp) ** 2  # |u0(r')|^2
        rp_int = np.array(
            [np.sum(wrp * env * np.exp(1j * rp * (kap - x))) for x in xi]
        )
    else:
        A = eps * eta * (tau_s - shift) / 2.0
        rp_int = np.empty(n_xi, dtype=np.complex128)
        for j, (x, a) in enumerate(zip(xi, A)):
            env = source.envelope(rp + a) * np.conj(source.envelope(rp - a))
            rp_int[j] = np.sum(wrp * env * np.exp(1j * rp * (kap - x)))
    val = np.sum(wxi * kern * rp_int * np.exp(1j * xi * r_s)) / (2.0 * math.pi)

    # quadrature convergence report: the integrand must have decayed at the edges
    edge = abs(kern[0] * rp_int[0]) + abs(kern[-1] * rp_int[-1])
    peak = float(np.max(np.abs(kern * rp_int)))
    if peak > 0 and edge > 1e-6 * peak:
        raise ValueError(
            "quadrature did not converge: integrand not resolved at the xi boundary; "
            "increase xi_halfwidth or n_xi"
        )
    return complex(val)


def default_zeta_quadrature(source, kappa, dim, n=96):
    """Gauss-Legendre nodes covering the angular support of the source.

    Returns ``(nodes, weights)`` with nodes of shape (m, dim).  Plane waves
    have a single delta node at kappa with weight (2 pi)^dim.
    """
    kappa = _vec(kappa, dim)
    if source.is_plane_wave:
        return np.array([kappa]), np.array([(2.0 * math.pi) ** dim])
    half = 9.0 / source.width
    xn, xw = np.polynomial.legendre.leggauss(n)
    axes_nodes = [kappa[i] + xn * half for i in range(dim)]
    axes_weights = [xw * half for _ in range(dim)]
    if dim == 1:
        return axes_nodes[0][:, None], axes_weights[0]
    n1, n2 = np.meshgrid(*axes_nodes, indexing="ij")
    w1, w2 = np.meshgrid(*axes_weights, indexing="ij")
    return np.stack([n1.ravel(), n2.ravel()], axis=1), (w1 * w2).ravel()


def _gamma_check_values(source, zeta_nodes, kappa, dim):
    """Gamma_check(zeta - kappa) on the quadrature nodes (1.0 for plane waves)."""
    if source.is_plane_wave:
        return np.ones(len(zeta_nodes))
    diffs = [zeta_nodes[:, i] - kappa[i] for i in range(dim)]
    return source.gamma_check(*diffs)


def mcf_from_ansatz(
    z,
    r,
    tau,
    Omega,
    kappa,
    source,
    omega0,
    sigma2,
    dim=1,
    zeta_nodes=None,
    zeta_weights=None,
    dz_ode=1e-3,
    abcd=None,
):
    """Coherence M(z, r, tau) assembled from the quadratic ansatz.

    M = (2 pi)^-dim  int Gamma_check(zeta - kappa)
        exp(-[a + b|t|^2 + c t.zeta + d |zeta|^2]) exp(i zeta.r) dzeta,
    with t = tau - zeta z / omega0 (the advected separation).

    ``tau`` may be a scalar/vector for one point or an (m, dim) array; the
    return value matches.  A precomputed ABCDState may be passed to amortize
    the ODE solve across evaluations.
    """
    kappa_v = _vec(kappa, dim)
    r_v = _vec(r, dim)
    tau_arr = np.asarray(tau, dtype=float)
    if tau_arr.ndim == 0:
        single, pts = True, np.array([_vec(tau, dim)])
    elif tau_arr.ndim == 1 and dim > 1:
        single, pts = True, np.array([_vec(tau, dim)])
    elif tau_arr.ndim == 1:
        single, pts = False, tau_arr[:, None]
    else:
        single, pts = False, tau_arr
    if pts.shape[1] != dim:
        raise ValueError(f"tau points must have {dim} components")

    if abcd is None:
        abcd = solve_abcd(z, Omega, omega0, sigma2, dz_ode=dz_ode, dim=dim).final()
    a, b, c, dd = abcd.a, abcd.b, abcd.c, abcd.d

    if zeta_nodes is None or zeta_weights is None:
        zeta_nodes, zeta_weights = default_zeta_quadrature(source, kappa_v, dim)
    zeta_nodes = np.atleast_2d(np.asarray(zeta_nodes, dtype=float))
    if zeta_nodes.shape[1] != dim:
        zeta_nodes = zeta_nodes.reshape(-1, dim)
    gam = _gamma_check_values(source, zeta_nodes, kappa_v, dim)
    if not source.is_plane_wave:
        interior = np.max(np.abs(gam))
        edge = max(abs(gam[0]), abs(gam[-1]))
        if interior > 0 and edge > 1e-6 * interior:
            raise ValueError(
                "zeta grid under-resolves the source angular spectrum; widen the nodes"
            )

    zr = zeta_nodes @ np.array(r_v)  # (m,)
    z2 = np.sum(zeta_nodes**2, axis=1)
    # t = tau - zeta z / omega0, broadcast (npts, m, dim)
    t = pts[:, None, :] - zeta_nodes[None, :, :] * (z / omega0)
    t2 = np.sum(t**2, axis=2)
    tdotz = np.einsum("pmd,md->pm", t, zeta_nodes)
    expo = np.exp(-(a + b * t2 + c * tdotz + dd * z2[None, :]))
    vals = (expo * (gam * zeta_weights * np.exp(1j * zr))[None, :]).sum(axis=1)
    vals = vals / (2.0 * math.pi) ** dim
    if single:
        return complex(vals[0])
    return vals


def mcf_split_step(
    z,
    r,
    tau,
    Omega,
    kappa,
    source,
    omega0,
    sigma2,
    dim=1,
    zeta_nodes=None,
    zeta_weights=None,
    tau_max=16.0,
    n_tau=512,
    dz=2.5e-4,
):
    """Coherence M(z, r, tau) by direct split-step solve of the transport PDE.

    For each zeta mode the tau-space equation

        dM/dz = (i Omega/(2 omega0^2)) Lap_tau M - (zeta/omega0).grad_tau M
                - (omega0^2 sigma2 / 8) |tau|^2 M,    M(0) = Gamma_check(zeta - kappa)

    is advanced by Strang splitting: half potential (pointwise), full kinetic
    step (exact Fourier multiplier for both the laplacian and the advection),
    half potential.  Requested tau values must lie on the periodic tau grid.
    """
    if dim != 1:
        raise NotImplementedError("split-step transport solve is implemented for d = 1")
    kappa_v = _vec(kappa, 1)
    r_v = _vec(r, 1)
    tau_req = np.atleast_1d(np.asarray(tau, dtype=float))
    single = np.ndim(tau) == 0

    if zeta_nodes is None or zeta_weights is None:
        zeta_nodes, zeta_weights = default_zeta_quadrature(source, kappa_v, 1)
    zeta_nodes = np.asarray(zeta_nodes, dtype=float).reshape(-1)
    zeta_weights = np.asarray(zeta_weights, dtype=float).reshape(-1)
    gam = _gamma_check_values(source, zeta_nodes[:, None], kappa_v, 1)

    dtau = 2.0 * tau_max / n_tau
    tg = -tau_max + dtau * np.arange(n_tau)
    idx = np.rint((tau_req + tau_max) / dtau).astype(int)
    if np.any(np.abs(tg[idx % n_tau] - tau_req) > 1e-9 * max(1.0, tau_max)):
        raise ValueError("requested tau values must lie on the tau grid")
    idx %= n_tau

    xi = 2.0 * math.pi * np.fft.fftfreq(n_tau, d=dtau)
    n_steps = max(1, int(math.ceil(z / dz - 1e-12)))
    h = z / n_steps
    # step-bound guard: kinetic phase per step at the edge mode must stay < 1
    zmax = float(np.max(np.abs(zeta_nodes))) if len(zeta_nodes) else 0.0
    xim = float(np.max(np.abs(xi)))
    phase_cap = h * (abs(Omega) * xim**2 / (2.0 * omega0**2) + zmax * xim / omega0)
    if phase_cap > 1.0 + 1e-12:
        raise ValueError(
            f"kinetic phase per step {phase_cap:.3g} exceeds 1; reduce dz or the grids"
        )

    pot_half = np.exp(-(h / 2.0) * (omega0**2 * sigma2 / 8.0) * tg**2)
    kin = np.exp(
        h * (-1j * Omega * xi**2 / (2.0 * omega0**2))[None, :]
        - 1j * h * np.outer(zeta_nodes / omega0, xi)
    )
    fields = np.repeat(gam.astype(np.complex128)[:, None], n_tau, axis=1)
    for _ in range(n_steps):
        fields *= pot_half
        fields = np.fft.ifft(np.fft.fft(fields, axis=1) * kin, axis=1)
        fields *= pot_half

    phase_r = np.exp(1j * zeta_nodes * r_v[0])
    weights = zeta_weights * phase_r / (2.0 * math.pi)
    vals = (weights[:, None] * fields[:, idx]).sum(axis=0)
    if single:
        return complex(vals[0])
    return vals


def m11(
    h,
    tau,
    Omega=0.0,
    kappa=0.0,
    source=SourceSpec("plane_wave"),
    *,
    z0,
    omega0,
    sigma2,
    dim=1,
    r=0.0,
    solver="ansatz",
    tau_max=32.0,
    n_tau=2048,
    **solver_kwargs,
):
    """Two-point function m11(h, tau) at axial offset h: Fresnel transform of M.

    Composes a coherence solver (``ansatz`` or ``pde``) with the tau-space
    Fresnel multiplier.  ``h = 0`` is the identity branch.  Negative Omega is
    mapped through the conjugation symmetry m(h, tau; Omega, kappa) =
    conj(m(-h, tau; -Omega, -kappa)).  Only d = 1 grids are supported here.
    """
    if dim != 1:
        raise NotImplementedError("the gridded Fresnel composition supports d = 1")
    if Omega < 0:
        # exchange of the two fields: all offsets negate and the value conjugates
        kneg = tuple(-k for k in _vec(kappa, dim))
        tneg = tuple(-t for t in _vec(tau, dim))
        return complex(
            np.conj(
                m11(
                    -h,
                    tneg,
                    -Omega,
                    kneg,
                    source,
                    z0=z0,
                    omega0=omega0,
                    sigma2=sigma2,
                    dim=dim,
                    r=r,
                    solver=solver,
                    tau_max=tau_max,
                    n_tau=n_tau,
                    **solver_kwargs,
                )
            )
        )

    def mcf(tau_values):
        if solver == "ansatz":
            return mcf_from_ansatz(
                z0, r, tau_values[:, None], Omega, kappa, source, omega0, sigma2,
                dim=1, **solver_kwargs,
            )
        if solver == "pde":
            return mcf_split_step(
                z0, r, tau_values, Omega, kappa, source, omega0, sigma2,
                dim=1, tau_max=tau_max, n_tau=n_tau, **solver_kwargs,
            )
        raise ValueError(f"unknown solver {solver!r}")

    tau_s = _vec(tau, 1)[0]
    if h == 0:
        return complex(np.asarray(mcf(np.array([tau_s])))[0])

    dtau = 2.0 * tau_max / n_tau
    tg = -tau_max + dtau * np.arange(n_tau)
    j = int(round((tau_s + tau_max) / dtau))
    if abs(tg[j % n_tau] - tau_s) > 1e-9 * max(1.0, tau_max):
        raise ValueError("tau must lie on the Fresnel tau grid; adjust tau_max/n_tau")
    mvals = np.asarray(mcf(tg), dtype=np.complex128)
    xi = 2.0 * math.pi * np.fft.fftfreq(n_tau, d=dtau)
    out = fresnel_apply(np.fft.fft(mvals), xi**2, h, omega0)
    return complex(out[j % n_tau])
