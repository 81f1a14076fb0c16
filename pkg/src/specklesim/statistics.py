"""Ensemble moment estimation and complex-gaussianity diagnostics.

Estimators reduce per-realization complex samples with batch-mean jackknife
standard errors (default batch 50) so residual within-grid correlations are
absorbed.  The gaussianity report compares the measured fourth moment with
the permutation (permanent) prediction built from measured second moments,
quantified as z-scores rather than accept/reject decisions: the gaussian
limit is asymptotic and the report measures distance to it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MomentEstimate",
    "MomentRequest",
    "reduce_moment",
    "estimate_moment",
    "gaussian_summation_prediction",
    "GaussianityReport",
    "gaussianity_report",
    "FirstMomentReport",
    "first_moment_check",
    "factorial_sum_identity",
]

DEFAULT_BATCH = 50


@dataclass
class MomentEstimate:
    """Complex Monte Carlo estimate with its standard error."""

    value: complex
    stderr: float
    n_samples: int

    def z_score(self, reference):
        """|value - reference| in units of the standard error."""
        if self.stderr == 0:
            return math.inf if abs(self.value - reference) > 0 else 0.0
        return abs(self.value - reference) / self.stderr


@dataclass(frozen=True)
class MomentRequest:
    """Moment order (p, q) and the p+q evaluation offsets."""

    p: int
    q: int
    points: tuple = ()

    def __post_init__(self):
        if self.p < 0 or self.q < 0 or self.p + self.q < 1:
            raise ValueError("need p, q >= 0 with p + q >= 1")
        if self.p + self.q > 4:
            raise ValueError("moments above p + q = 4 are not supported at desk scale")
        if self.points and len(self.points) != self.p + self.q:
            raise ValueError(f"expected {self.p + self.q} evaluation points")


def _batch_means(samples, batch):
    samples = np.asarray(samples)
    n = len(samples)
    if n < 2:
        raise ValueError("need at least two samples for a standard error")
    b = max(1, min(batch, n // 2))
    nb = n // b
    trimmed = samples[: nb * b].reshape(nb, b)
    means = trimmed.mean(axis=1)
    # the value itself uses every sample; batches only feed the error bar
    return means, samples.mean()


def reduce_moment(samples, batch=DEFAULT_BATCH):
    """Mean of complex per-realization samples with batch jackknife stderr.

    stderr is the jackknife (equivalently batch-mean) standard error of the
    complex mean, combining real and imaginary fluctuations in quadrature.
    """
    means, full_mean = _batch_means(samples, batch)
    nb = len(means)
    if nb < 2:
        # fall back to the plain sample stderr
        s = np.asarray(samples)
        var = np.mean(np.abs(s - s.mean()) ** 2) / (len(s) - 1)
        return MomentEstimate(complex(s.mean()), math.sqrt(var.real), len(s))
    center = means.mean()
    var = np.sum(np.abs(means - center) ** 2) / (nb * (nb - 1))
    return MomentEstimate(complex(full_mean), math.sqrt(float(var)), len(np.asarray(samples)))


def estimate_moment(samples, req, batch=DEFAULT_BATCH):
    """Estimate mu_{p,q} from per-realization field values at the mapped points.

    ``samples`` has shape (n_realizations, p + q): the first p columns enter
    unconjugated, the remaining q conjugated.
    """
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.ndim != 2 or samples.shape[1] != req.p + req.q:
        raise ValueError(f"samples must have shape (n, {req.p + req.q})")
    if samples.shape[0] < 2:
        raise ValueError("insufficient samples")
    prod = np.prod(samples[:, : req.p], axis=1) * np.prod(
        np.conj(samples[:, req.p :]), axis=1
    )
    return reduce_moment(prod, batch=batch)


def gaussian_summation_prediction(second_moments):
    """Permutation-sum prediction for mu_{p,p} from the p x p matrix of m11.

    ``second_moments[j, l]`` holds E[upsilon_j upsilon_l^*].  Returns
    sum over permutations pi of prod_j m[j, pi(j)] (a permanent); moments with
    p != q are predicted to vanish identically, which the caller encodes by
    comparing against zero.
    """
    m = np.asarray(second_moments, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("second-moment matrix must be square (p = q)")
    p = m.shape[0]
    if p > 4:
        raise ValueError("permutation sum enumerated only up to p = 4")
    total = 0j
    for perm in itertools.permutations(range(p)):
        term = 1.0 + 0j
        for j, pj in enumerate(perm):
            term *= m[j, pj]
        total += term
    return total


@dataclass
class GaussianityReport:
    """Fourth-moment factorization and circularity diagnostics."""

    mu11: list
    mu22: MomentEstimate
    prediction: complex
    prediction_stderr: float
    z_mu22: float
    mu20: MomentEstimate
    mu21: MomentEstimate
    z_mu20: float
    z_mu21: float
    contrast: float
    contrast_stderr: float
    n_samples: int
    notes: list = field(default_factory=list)

    @property
    def combined_stderr(self):
        return math.hypot(self.mu22.stderr, self.prediction_stderr)


def gaussianity_report(point_values, intensity_m2=None, intensity_m4=None, batch=DEFAULT_BATCH):
    """Compare measured fourth moments against the permutation prediction.

    Parameters
    ----------
    point_values : (n, 2) complex array of per-realization field values at two
        mapped evaluation points.
    intensity_m2, intensity_m4 : optional (n,) arrays of per-realization
        spatial averages of |u|^2 and |u|^4, used for the speckle contrast
        (falls back to the first point's values).
    """
    v = np.asarray(point_values, dtype=np.complex128)
    if v.ndim != 2 or v.shape[1] != 2:
        raise ValueError("point_values must have shape (n, 2)")
    n = v.shape[0]
    if n < 1000:
        raise ValueError("gaussianity check needs an ensemble of at least 1e3")
    u1, u2 = v[:, 0], v[:, 1]

    m11_entries = {}
    for (j, l), (a, b) in {
        (0, 0): (u1, u1),
        (0, 1): (u1, u2),
        (1, 0): (u2, u1),
        (1, 1): (u2, u2),
    }.items():
        m11_entries[(j, l)] = reduce_moment(a * np.conj(b), batch=batch)

    mu22 = reduce_moment(u1 * u2 * np.conj(u1) * np.conj(u2), batch=batch)
    mat = np.array(
        [
            [m11_entries[(0, 0)].value, m11_entries[(0, 1)].value],
            [m11_entries[(1, 0)].value, m11_entries[(1, 1)].value],
        ]
    )
    prediction = gaussian_summation_prediction(mat)
    # first-order error propagation through the permanent
    grads = {
        (0, 0): mat[1, 1],
        (1, 1): mat[0, 0],
        (0, 1): mat[1, 0],
        (1, 0): mat[0, 1],
    }
    pred_var = sum(
        (abs(grads[k]) * m11_entries[k].stderr) ** 2 for k in grads
    )
    pred_err = math.sqrt(pred_var)
    comb = math.hypot(mu22.stderr, pred_err)
    z22 = abs(mu22.value - prediction) / comb if comb > 0 else math.inf

    mu20 = reduce_moment(u1 * u2, batch=batch)
    mu21 = reduce_moment(u1 * u2 * np.conj(u1), batch=batch)
    z20 = mu20.z_score(0.0)
    z21 = mu21.z_score(0.0)

    if intensity_m2 is None or intensity_m4 is None:
        intensity_m2 = np.abs(u1) ** 2
        intensity_m4 = np.abs(u1) ** 4
    contrast, contrast_err = _contrast_jackknife(
        np.asarray(intensity_m2, dtype=float),
        np.asarray(intensity_m4, dtype=float),
        batch,
    )

    return GaussianityReport(
        mu11=[m11_entries[(0, 0)], m11_entries[(0, 1)], m11_entries[(1, 1)]],
        mu22=mu22,
        prediction=complex(prediction),
        prediction_stderr=pred_err,
        z_mu22=z22,
        mu20=mu20,
        mu21=mu21,
        z_mu20=z20,
        z_mu21=z21,
        contrast=contrast,
        contrast_stderr=contrast_err,
        n_samples=n,
    )


def _contrast_jackknife(m2, m4, batch):
    """Speckle contrast sqrt(E|u|^4 - (E|u|^2)^2)/E|u|^2 with drop-batch errors."""
    n = len(m2)
    b = max(1, min(batch, n // 2))
    nb = n // b
    s2 = m2[: nb * b].reshape(nb, b).mean(axis=1)
    s4 = m4[: nb * b].reshape(nb, b).mean(axis=1)

    def contrast(mean2, mean4):
        var = max(mean4 - mean2**2, 0.0)
        return math.sqrt(var) / mean2 if mean2 > 0 else 0.0

    full = contrast(float(np.mean(m2)), float(np.mean(m4)))
    if nb < 2:
        return full, math.inf
    drops = np.array(
        [
            contrast(
                float((s2.sum() - s2[i]) / (nb - 1)),
                float((s4.sum() - s4[i]) / (nb - 1)),
            )
            for i in range(nb)
        ]
    )
    var = (nb - 1) / nb * np.sum((drops - drops.mean()) ** 2)
    return full, math.sqrt(float(var))


@dataclass
class FirstMomentReport:
    """Measured coherent-amplitude damping against its exact rate."""

    measured: float
    target: float
    stderr: float
    z_score: float
    n_samples: int


def first_moment_check(mean_samples, regime, model, z, omega=None, free_magnitude=1.0, batch=DEFAULT_BATCH):
    """Check |E u| against the exact damping of the mean field.

    ``mean_samples`` are per-realization (spatially averaged) field values at
    distance z; for a plane wave the free-propagation magnitude is 1.
    """
    w = regime.omega0 if omega is None else omega
    target = free_magnitude * math.exp(-(w**2) * model.r0 * z / (8.0 * regime.eta**2))
    est = reduce_moment(np.asarray(mean_samples, dtype=np.complex128), batch=batch)
    measured = abs(est.value)
    zsc = abs(measured - target) / est.stderr if est.stderr > 0 else math.inf
    return FirstMomentReport(
        measured=measured,
        target=target,
        stderr=est.stderr,
        z_score=zsc,
        n_samples=est.n_samples,
    )


def factorial_sum_identity(p, c, n_max=None, tol=1e-13):
    """Partial sums of sum_{n1+..+np=2n} c^n (2n)! / (n! n1! .. np!).

    The composition sum for each n is accumulated in exact integer
    arithmetic (the multinomial weights are integers), so the only floating
    error is one rounding per n-term plus the compensated final sum; the
    overflow-prone factorials never leave the integer domain.  The series
    increases monotonically to exp(p^2 c); iteration stops once the
    exponential tail bound falls below the absolute tolerance ``tol``.
    Returns ``(value, n_used, tail_bound)``.
    """
    if p < 1 or c < 0:
        raise ValueError("need p >= 1 and c >= 0")
    if c == 0:
        return 1.0, 0, 0.0
    if n_max is None:
        n_max = 512

    terms = []
    n_used = 0
    tail = math.inf
    for n in range(n_max + 1):
        weight = c**n / math.factorial(n)  # one rounding, not an iterated product
        inner = 0
        f2n = math.factorial(2 * n)
        for comp in _compositions(2 * n, p):
            denom = 1
            for k in comp:
                denom *= math.factorial(k)
            inner += f2n // denom
        terms.append(float(inner) * weight)
        n_used = n
        # tail of sum_{m>n} (c p^2)^m / m! bounded by a geometric series
        x = c * p * p
        head = x ** (n + 1) / math.gamma(n + 2)
        ratio = x / (n + 2)
        tail = head / (1.0 - ratio) if ratio < 1 else math.inf
        if tail < tol:
            break
    return math.fsum(terms), n_used, tail


def _compositions(total, parts):
    """All orderings of non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest
