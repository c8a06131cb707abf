"""Heat-kernel utilities: the Gaussian kernel, the Poisson jump kernel, the
scaled semi-discrete kernel converging to the Gaussian one, slope-weighted
periodized sums, and a closed-form iterated-kernel integral certified by a
smoothed Gauss-Legendre quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "KernelParams",
    "PeriodizedValue",
    "DirichletReport",
    "gauss_kernel",
    "gauss_kernel_sq",
    "poisson_kernel",
    "pn_kernel",
    "periodized_kernel",
    "periodized_pn_kernel",
    "dirichlet_integral",
    "dirichlet_integral_alt",
    "dirichlet_quadrature",
    "dirichlet_report",
]


@dataclass(frozen=True)
class KernelParams:
    """Slope weight and truncation policy for periodized kernel sums."""

    theta: float = 0.0
    eps: float = 1e-12
    r_max: int = 200

    def __post_init__(self):
        if not (0 < self.eps < 1):
            raise ValueError("eps must lie in (0, 1)")
        if self.r_max < 3:
            raise ValueError("r_max must be at least 3")


@dataclass(frozen=True)
class PeriodizedValue:
    value: float
    radius: int
    converged: bool


def gauss_kernel(t, x):
    """Full-space Gaussian kernel, zero for nonpositive times."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    pos = t > 0
    tt = np.where(pos, t, 1.0)
    val = np.exp(-(x * x) / (2.0 * tt)) / np.sqrt(2.0 * np.pi * tt)
    out = np.where(pos, val, 0.0)
    return float(out) if out.ndim == 0 else out


def gauss_kernel_sq(t, x):
    """Squared Gaussian kernel, zero for nonpositive times."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    pos = t > 0
    tt = np.where(pos, t, 1.0)
    out = np.where(pos, np.exp(-(x * x) / tt) / (2.0 * np.pi * tt), 0.0)
    return float(out) if out.ndim == 0 else out


def poisson_kernel(t, n):
    """Poisson jump kernel on the quadrant t >= 0, n in {0, 1, ...}.

    Evaluated in log space via the log-gamma function; exact 1 at the
    corner t = 0, n = 0, and 0 outside the quadrant.
    """
    t = np.asarray(t, dtype=float)
    n = np.asarray(n, dtype=float)
    inside = (t >= 0) & (n >= 0) & (n == np.floor(n))
    tt = np.where(t > 0, t, 1.0)
    nn = np.where(inside, n, 0.0)
    logq = -tt + nn * np.log(tt) - gammaln(nn + 1.0)
    corner = np.where(nn == 0, 1.0, 0.0)  # limit value at t = 0
    out = np.where(inside, np.where(t > 0, np.exp(logq), corner), 0.0)
    return float(out) if out.ndim == 0 else out


def pn_kernel(n_period, t, y, s, x):
    """Scaled semi-discrete kernel: the Poisson kernel evaluated on the
    lattice index gap, times the period count.

    The index is computed with one fused floor per argument so the two
    sides never round differently.
    """
    if n_period < 1:
        raise ValueError("n_period must be at least 1")
    nsq = float(n_period) ** 2
    m = np.floor(np.asarray(t) * nsq + np.asarray(y) * n_period) - np.floor(
        np.asarray(s) * nsq + np.asarray(x) * n_period
    )
    return n_period * poisson_kernel((np.asarray(t) - np.asarray(s)) * nsq, m)


def _periodize(term, eps, r_max):
    acc = float(term(0))
    prev = math.inf
    for j in range(1, r_max + 1):
        pair = float(term(j)) + float(term(-j))
        acc += pair
        if pair <= prev and pair < eps * max(acc, 1e-300):
            return PeriodizedValue(acc, j, True)
        prev = pair
    return PeriodizedValue(acc, r_max, False)


def periodized_kernel(params: KernelParams, t, y, s, x) -> PeriodizedValue:
    """Slope-weighted periodization of the Gaussian kernel over integer
    shifts, summed symmetrically outward until the next pair of terms falls
    below eps of the running total (hard cap r_max, reported not fatal)."""
    if not np.all(np.asarray(t) > np.asarray(s)):
        raise ValueError("requires t > s")
    dt = float(t) - float(s)
    dy = float(y) - float(x)
    th = params.theta

    def term(r):
        return math.exp(-th * r) * gauss_kernel(dt, dy + r)

    return _periodize(term, params.eps, params.r_max)


def periodized_pn_kernel(params: KernelParams, n_period: int, t, y, s, x) -> PeriodizedValue:
    """Slope-weighted periodization of the semi-discrete kernel; same
    truncation contract as the Gaussian version."""
    if not np.all(np.asarray(t) > np.asarray(s)):
        raise ValueError("requires t > s")
    th = params.theta

    def term(r):
        return math.exp(-th * r) * pn_kernel(n_period, t, float(y) + r, s, x)

    return _periodize(term, params.eps, params.r_max)


def _dirichlet_prefactor(k: int) -> float:
    g = math.gamma
    return g(0.5) ** (k + 1) / (g((k + 1) / 2.0) * 2.0**k * math.pi ** (k / 2.0))


def dirichlet_integral(k: int, tau: float, z: float) -> float:
    """Iterated squared-kernel integral over the k-simplex of times and free
    spatial coordinates, in the closed form certified by the quadrature
    oracle: tau^(k/2) times a Gamma-function prefactor times the squared
    kernel at the endpoints.

    Only k = 1, 2 are certified; larger k raises.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if k not in (1, 2):
        raise ValueError("closed form certified for k in {1, 2} only")
    return tau ** (k / 2.0) * _dirichlet_prefactor(k) * gauss_kernel_sq(tau, z)


def dirichlet_integral_alt(k: int, tau: float, z: float) -> float:
    """Alternate exponent variant tau^((k+3)/2) of the same closed form,
    evaluated for comparison; it disagrees with the quadrature oracle
    whenever tau != 1."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return tau ** ((k + 3) / 2.0) * _dirichlet_prefactor(k) * gauss_kernel_sq(tau, z)


def _sin_sq_map(tau0, tau1, nodes):
    # map [0,1] GL nodes onto [tau0, tau1] with sin^2 warping; the Jacobian
    # vanishes like sqrt at both ends, cancelling the kernel's dt^(-1/2)
    u = 0.5 * (nodes + 1.0)
    t = tau0 + (tau1 - tau0) * np.sin(0.5 * np.pi * u) ** 2
    jac = (tau1 - tau0) * 0.5 * np.pi * np.sin(np.pi * u)
    return t, jac


def dirichlet_quadrature(k: int, tau: float, z: float, n: int = 64) -> float:
    """Direct Gauss-Legendre evaluation of the iterated squared-kernel
    integral for k in {1, 2}: sin^2 time substitutions absorb the endpoint
    singularities and bridge-standardized spatial coordinates resolve the
    Gaussian peaks. Pure change of variables, no closed form used."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    nodes, weights = np.polynomial.legendre.leggauss(n)
    wu = 0.5 * weights
    xi = 8.0 * nodes
    wxi = 8.0 * weights
    if k == 1:
        t, jac = _sin_sq_map(0.0, tau, nodes)
        total = 0.0
        for ti, ji, wi in zip(t, jac, wu):
            mu = z * ti / tau
            sig = math.sqrt(ti * (tau - ti) / (2.0 * tau))
            y = mu + sig * xi
            f = gauss_kernel_sq(ti, y) * gauss_kernel_sq(tau - ti, z - y)
            total += wi * ji * sig * np.dot(wxi, f)
        return total
    if k == 2:
        t1, jac1 = _sin_sq_map(0.0, tau, nodes)
        total = 0.0
        for a in range(n):
            rem = tau - t1[a]
            t2, jac2 = _sin_sq_map(t1[a], tau, nodes)
            mu1 = z * t1[a] / tau
            sig1 = math.sqrt(t1[a] * (tau - t1[a]) / (2.0 * tau))
            y1 = mu1 + sig1 * xi
            f1 = gauss_kernel_sq(t1[a], y1)
            for b in range(n):
                g2 = t2[b] - t1[a]
                g3 = tau - t2[b]
                mu2 = y1 + (z - y1) * g2 / max(rem, 1e-300)
                sig2 = math.sqrt(max(g2 * g3 / (2.0 * rem), 0.0)) if rem > 0 else 0.0
                y2 = mu2[:, None] + sig2 * xi[None, :]
                f = f1[:, None] * gauss_kernel_sq(g2, y2 - y1[:, None]) * gauss_kernel_sq(g3, z - y2)
                inner = f @ wxi
                total += wu[a] * jac1[a] * wu[b] * jac2[b] * sig2 * np.dot(wxi * sig1, inner)
        return total
    raise ValueError("quadrature implemented for k in {1, 2} only")


@dataclass(frozen=True)
class DirichletReport:
    k: int
    tau: float
    z: float
    value: float
    quadrature: float
    alt_value: float
    rel_err_value: float
    rel_err_alt: float


def dirichlet_report(k: int, tau: float, z: float, n: int = 64) -> DirichletReport:
    """Evaluate the certified closed form, the quadrature oracle, and the
    alternate exponent variant side by side, with relative discrepancies."""
    q = dirichlet_quadrature(k, tau, z, n)
    v = dirichlet_integral(k, tau, z)
    a = dirichlet_integral_alt(k, tau, z)
    return DirichletReport(
        k, tau, z, v, q, a,
        rel_err_value=abs(v - q) / abs(q),
        rel_err_alt=abs(a - q) / abs(q),
    )
