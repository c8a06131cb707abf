"""Random generation: log-inverse-gamma vectors, the conditioned product
measure on a slope hyperplane, its pushed-forward ordered families, sloped
Brownian bridges, and the bridge-level pair/stack maps with their small- and
large-noise limit forms.

All draws are deterministic functions of an explicit RngStream; nothing here
touches global RNG state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cyclic import SlopedFamily, dk_stack

__all__ = [
    "RngStream",
    "McmcConfig",
    "BridgePath",
    "BridgeFamily",
    "log_inv_gamma",
    "sample_nu",
    "sample_mu",
    "sample_bridge",
    "phi2",
    "psi_k",
    "sample_horizon",
    "phi2_trop",
    "derivative_limit_sample",
]


@dataclass(frozen=True)
class RngStream:
    """Reproducible counter-based random stream.

    Identical (seed, stream, path) always reproduce identical draws;
    distinct ids give independent streams. child(k) derives a subordinate
    stream for parallel work.
    """

    seed: int
    stream: int = 0
    path: tuple = ()

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream,) + tuple(self.path)
        )
        return np.random.Generator(np.random.Philox(ss))

    def child(self, k: int) -> "RngStream":
        return RngStream(self.seed, self.stream, tuple(self.path) + (int(k),))


@dataclass(frozen=True)
class McmcConfig:
    burn_in: int = 800
    thin: int = 8
    proposal_scale: float = 1.0
    accept_band: tuple = (0.30, 0.45)

    def __post_init__(self):
        if self.burn_in < 0 or self.thin < 0 or self.burn_in + self.thin < 1:
            raise ValueError("chain length must be positive")
        if self.proposal_scale <= 0:
            raise ValueError("proposal scale must be positive")
        lo, hi = self.accept_band
        if not (0 < lo < hi < 1):
            raise ValueError("acceptance band must satisfy 0 < lo < hi < 1")


def log_inv_gamma(rng: RngStream, shape: float, scale: float, size=None):
    """Draw X with density proportional to exp(-shape*x - scale*exp(-x)).

    Equivalently X = log(scale) - log(G) for G gamma(shape, 1)-distributed.
    """
    if shape <= 0 or scale <= 0:
        raise ValueError("shape and scale must be positive")
    g = rng.generator().standard_gamma(shape, size=size)
    return np.log(scale) - np.log(g)


def _nu_logpdf_free(z, theta, beta):
    # z holds the free coordinates (x_1..x_{N-1}); x_0 closes the sum to theta
    x0 = theta - np.sum(z, axis=-1)
    return -(beta**-2) * (np.exp(-x0) + np.sum(np.exp(-z), axis=-1))


def sample_nu(rng: RngStream, n: int, theta: float, beta: float,
              cfg: McmcConfig = McmcConfig(), size=None):
    """Draw from the conditioned product measure on the slope-theta hyperplane.

    Random-walk Metropolis on the N-1 free coordinates, one independent
    chain per requested draw; x_0 is computed from the slope constraint, so
    every returned vector has entry sum exactly theta (up to rounding of the
    closing subtraction). The proposal scale is tuned during burn-in to the
    configured acceptance band.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if beta <= 0:
        raise ValueError("beta must be positive")
    batch = () if size is None else tuple(np.atleast_1d(size).astype(int))
    if n == 1:
        return np.full(batch + (1,), float(theta))

    gen = rng.generator()
    free = n - 1
    chains = int(np.prod(batch)) if batch else 1
    # overdispersed start around the flat point theta/n
    z = theta / n + 2.0 * max(beta, 1.0) * gen.standard_normal(batch + (free,))
    logp = _nu_logpdf_free(z, theta, beta)
    scale = cfg.proposal_scale * beta
    window_acc = 0
    window_tot = 0
    for step in range(cfg.burn_in + cfg.thin):
        prop = z + scale * gen.standard_normal(batch + (free,))
        logp_prop = _nu_logpdf_free(prop, theta, beta)
        accept = np.log(gen.random(batch)) < logp_prop - logp
        z = np.where(accept[..., None], prop, z)
        logp = np.where(accept, logp_prop, logp)
        if step < cfg.burn_in:
            window_acc += int(np.count_nonzero(accept))
            window_tot += chains
            if window_tot >= 50 * chains:
                rate = window_acc / window_tot
                lo, hi = cfg.accept_band
                if rate < lo:
                    scale *= 0.8
                elif rate > hi:
                    scale *= 1.25
                window_acc = 0
                window_tot = 0
    x0 = theta - np.sum(z, axis=-1, keepdims=True)
    return np.concatenate([x0, z], axis=-1)


def sample_mu(rng: RngStream, n: int, slopes, beta: float,
              cfg: McmcConfig = McmcConfig(), size=None) -> SlopedFamily:
    """Draw an ordered family: independent hyperplane draws per slope,
    passed through the stacked transform."""
    slopes = np.atleast_1d(np.asarray(slopes, dtype=float))
    vecs = np.stack([
        sample_nu(rng.child(r), n, slopes[r], beta, cfg, size=size)
        for r in range(slopes.shape[0])
    ])
    return SlopedFamily(dk_stack(vecs), slopes)


@dataclass(frozen=True)
class BridgePath:
    """A pinned path on the uniform grid x_j = j/M: values[0] = 0 and the
    recorded slope is values[M] - values[0]."""

    values: np.ndarray  # (..., M+1)

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.shape[-1] < 2:
            raise ValueError("a bridge path needs at least two grid values")
        if np.any(self.values[..., 0] != 0.0):
            raise ValueError("bridge paths start at 0")

    @property
    def m(self) -> int:
        return self.values.shape[-1] - 1

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.m + 1) / self.m

    @property
    def theta(self):
        return self.values[..., -1]


@dataclass(frozen=True)
class BridgeFamily:
    """k bridge paths on a common grid with their recorded slopes."""

    paths: np.ndarray  # (k, ..., M+1)
    slopes: np.ndarray = field(default=None)

    def __post_init__(self):
        paths = np.asarray(self.paths, dtype=float)
        object.__setattr__(self, "paths", paths)
        if paths.ndim < 2:
            raise ValueError("paths must be (k, ..., M+1)")
        slopes = self.slopes
        if slopes is None:
            slopes = paths[..., -1]
            while slopes.ndim > 1:
                slopes = slopes[..., 0]
        slopes = np.atleast_1d(np.asarray(slopes, dtype=float))
        object.__setattr__(self, "slopes", slopes)
        if slopes.shape[0] != paths.shape[0]:
            raise ValueError("one slope per path required")
        ref = slopes.reshape((-1,) + (1,) * (paths.ndim - 2))
        if np.any(np.abs(paths[..., -1] - ref) > 1e-9):
            raise ValueError("recorded slopes disagree with path endpoints")

    @property
    def k(self) -> int:
        return self.paths.shape[0]

    @property
    def m(self) -> int:
        return self.paths.shape[-1] - 1


def sample_bridge(rng: RngStream, m: int, beta: float, theta: float,
                  size=None) -> BridgePath:
    """Sloped Brownian bridge on the grid: mean theta*x and covariance
    beta^2 (min(x,y) - xy), sampled exactly at the grid points.

    Cumulative sums of i.i.d. normals scaled by beta/sqrt(M), then pinned by
    the affine correction; f(0) = 0 and f(1) = theta hold exactly.
    """
    if m < 1:
        raise ValueError("grid size must be at least 1")
    shape = (m,) if size is None else (int(size), m)
    inc = rng.generator().standard_normal(shape) * (beta / np.sqrt(m))
    f = np.concatenate([np.zeros(shape[:-1] + (1,)), np.cumsum(inc, axis=-1)], axis=-1)
    x = np.arange(m + 1) / m
    f = f - x * f[..., -1:] + theta * x
    f[..., 0] = 0.0
    f[..., -1] = theta
    return BridgePath(f)


def _values(f):
    return f.values if isinstance(f, BridgePath) else np.asarray(f, dtype=float)


def _cum_trapz_exp(d):
    # cumulative trapezoid of exp(d) over the grid axis, max-shifted;
    # the uniform spacing cancels in every ratio taken downstream
    m = np.max(d, axis=-1, keepdims=True)
    w = np.exp(d - m)
    inc = 0.5 * (w[..., :-1] + w[..., 1:])
    c = np.concatenate(
        [np.zeros(w.shape[:-1] + (1,)), np.cumsum(inc, axis=-1)], axis=-1
    )
    return c


def phi2(f1, f2):
    """Bridge pair map: f1 plus the log-weighted running integral of
    exp(f2 - f1).

    Output starts at 0 and ends at f2's endpoint exactly; equal endpoints
    return f1 unchanged.
    """
    v1, v2 = _values(f1), _values(f2)
    if v1.shape[-1] != v2.shape[-1]:
        raise ValueError(f"grid mismatch: {v1.shape[-1]} vs {v2.shape[-1]}")
    c = _cum_trapz_exp(v2 - v1)
    r = c / c[..., -1:]
    delta = v2[..., -1:] - v1[..., -1:]
    big = delta > 30.0
    with np.errstate(divide="ignore"):
        stable = np.logaddexp(np.log1p(-np.minimum(r, 1.0)), delta + np.log(r))
    plain = np.log1p(np.expm1(np.where(big, 0.0, delta)) * r)
    out = v1 + np.where(big, stable, plain)
    out[..., 0] = 0.0
    out[..., -1] = v2[..., -1]
    if isinstance(f1, BridgePath):
        return BridgePath(out)
    return out


def psi_k(family) -> "BridgeFamily":
    """Stacked bridge transform: r-th output is the pair map folded over the
    first r inputs. Slopes pass through; with sorted slopes the outputs are
    pointwise ordered with increments bounded by the slope gaps."""
    if isinstance(family, BridgeFamily):
        arr, slopes = family.paths, family.slopes
    else:
        arr = np.asarray(family, dtype=float)
        slopes = None
    out = []
    for r in range(arr.shape[0]):
        h = arr[r]
        for s in range(r - 1, -1, -1):
            h = phi2(arr[s], h)
        out.append(h)
    return BridgeFamily(np.stack(out), slopes)


def sample_horizon(rng: RngStream, m: int, beta: float, slopes,
                   size=None) -> BridgeFamily:
    """Joint sloped-bridge family: independent bridges per slope passed
    through the stacked transform. The r-th marginal is again a sloped
    bridge with the r-th slope."""
    slopes = np.atleast_1d(np.asarray(slopes, dtype=float))
    raw = np.stack([
        sample_bridge(rng.child(r), m, beta, slopes[r], size=size).values
        for r in range(slopes.shape[0])
    ])
    return psi_k(BridgeFamily(raw, slopes))


def phi2_trop(f1, f2):
    """Max-plus limit of the bridge pair map.

    out(x) = f1(x) + max(delta + max_{y<=x} d(y), max_{y>=x} d(y)) - max_y d(y)
    with d = f2 - f1 and delta the endpoint gap, maxima over grid points; the
    x = 0 prefix is empty, matching the vanishing cumulative of the finite-
    scale map. This is the exact large-scale limit of phi2 on the same grid.
    """
    v1, v2 = _values(f1), _values(f2)
    if v1.shape[-1] != v2.shape[-1]:
        raise ValueError(f"grid mismatch: {v1.shape[-1]} vs {v2.shape[-1]}")
    d = v2 - v1
    delta = d[..., -1:] - d[..., :1]
    prefix = np.maximum.accumulate(d, axis=-1)
    prefix = np.concatenate(
        [np.full(d.shape[:-1] + (1,), -np.inf), prefix[..., 1:]], axis=-1
    )
    suffix = np.flip(np.maximum.accumulate(np.flip(d, axis=-1), axis=-1), axis=-1)
    total = suffix[..., :1]
    out = v2 - d + np.maximum(prefix + delta, suffix) - total
    if isinstance(f1, BridgePath):
        return BridgePath(out)
    return out


def derivative_limit_sample(rng: RngStream, m: int, beta: float,
                            size=None) -> BridgePath:
    """Normalized running integral of exp(beta * (B1 + B2)) for two
    independent standard bridges: starts at 0, ends at 1, strictly
    increasing on the grid."""
    b1 = sample_bridge(rng.child(0), m, 1.0, 0.0, size=size).values
    b2 = sample_bridge(rng.child(1), m, 1.0, 0.0, size=size).values
    c = _cum_trapz_exp(beta * (b1 + b2))
    return BridgePath(c / c[..., -1:])
