"""Time evolution: Euler-Maruyama integration of the coupled system and its
dual, the discrete-time coupled Markov chain, and the windowed polymer ratio
recursion used as an independent oracle for the pair transform."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .cyclic import SlopedFamily, coupled_step, logsumexp, slope
from .samplers import McmcConfig, RngStream, log_inv_gamma, sample_nu

__all__ = [
    "SdeState",
    "PolymerEnvironment",
    "em_step_sbe",
    "em_step_dual",
    "evolve",
    "chain_step",
    "draw_polymer_environment",
    "polymer_ratio_layer",
]

STIFFNESS_MAX_HALVINGS = 10


@dataclass(frozen=True)
class SdeState:
    """Instantaneous state of k coupled components driven by shared noise."""

    family: SlopedFamily
    t: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.t < 0:
            raise ValueError("time must be nonnegative")


def _grad(v):
    # discrete gradient (nabla v)_i = v_i - v_{i-1}; telescopes over the ring
    return v - np.roll(v, 1, axis=-1)


def _lap(v):
    # discrete Laplacian (delta v)_i = v_{i+1} - 2 v_i + v_{i-1}
    return np.roll(v, -1, axis=-1) - 2.0 * v + np.roll(v, 1, axis=-1)


def em_step_sbe(state: SdeState, dt: float, noise) -> SdeState:
    """One explicit Euler step of the coupled system: every component sees
    the drift gradient of its own exp(-U) and the same noise gradient.

    Per-component entry sums are conserved up to rounding (both drift and
    noise telescope around the ring).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    u = state.family.vectors
    upd = u + _grad(np.exp(-u)) * dt + state.beta * _grad(np.asarray(noise))
    fam = SlopedFamily(upd, state.family.slopes)
    return replace(state, family=fam, t=state.t + dt)


def em_step_dual(state: SdeState, dt: float, noise) -> SdeState:
    """One explicit Euler step of the dual system: component r feels its own
    drift gradient minus the Laplacians of all lower components, same shared
    noise gradient. Entry sums are conserved up to rounding."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = state.family.vectors
    ex = np.exp(-x)
    lap_cum = np.cumsum(_lap(ex), axis=0)  # prefix sums over components
    drift = _grad(ex).copy()
    drift[1:] -= lap_cum[:-1]
    upd = x + drift * dt + state.beta * _grad(np.asarray(noise))
    fam = SlopedFamily(upd, state.family.slopes)
    return replace(state, family=fam, t=state.t + dt)


def _step_refined(step, state, dt, db, gen, depth):
    # stiffness guard: split the step (and its Brownian increment) when the
    # drift scale exceeds 1/dt; conditional midpoint keeps the increment law
    if depth >= STIFFNESS_MAX_HALVINGS or np.max(np.exp(-state.family.vectors)) <= 1.0 / dt:
        return step(state, dt, db)
    xi = gen.standard_normal(db.shape) * np.sqrt(dt / 4.0)
    db1 = db / 2.0 + xi
    mid = _step_refined(step, state, dt / 2.0, db1, gen, depth + 1)
    return _step_refined(step, mid, dt / 2.0, db - db1, gen, depth + 1)


def evolve(state: SdeState, dt: float, t_horizon: float, rng: RngStream,
           step=em_step_sbe, snapshot_stride=None, stiffness_guard=True):
    """Drive a state to time t_horizon with fresh shared noise each step.

    Returns (final state, snapshots), snapshots taken every
    snapshot_stride steps when requested. Deterministic given the stream.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_horizon < 0:
        raise ValueError("horizon must be nonnegative")
    n_steps = int(round(t_horizon / dt))
    if abs(n_steps * dt - t_horizon) > dt:
        raise ValueError("dt must divide the horizon within one step")
    gen = rng.generator()
    noise_shape = state.family.vectors.shape[1:]
    snapshots = []
    for s in range(n_steps):
        db = gen.standard_normal(noise_shape) * np.sqrt(dt)
        if stiffness_guard:
            state = _step_refined(step, state, dt, db, gen, 0)
        else:
            state = step(state, dt, db)
        if snapshot_stride and (s + 1) % snapshot_stride == 0:
            snapshots.append(state)
    return state, snapshots


def chain_step(family: SlopedFamily, rng: RngStream, mode: str = "iid-lig",
               beta: float = 1.0, gamma: float = None, alpha: float = None,
               cfg: McmcConfig = McmcConfig(), weights=None) -> SlopedFamily:
    """One discrete-time update: draw a weight vector and map every
    component with it through the pair transform's lower line.

    mode "iid-lig" draws i.i.d. log-inverse-gamma entries (shape gamma,
    scale beta^-2); mode "conditioned" draws from the slope-alpha hyperplane
    measure. A pre-drawn weight vector can be supplied instead.
    """
    vecs = family.vectors
    n = vecs.shape[-1]
    if weights is None:
        if mode == "iid-lig":
            if gamma is None:
                raise ValueError("iid-lig mode needs gamma")
            weights = log_inv_gamma(rng, gamma, beta**-2, size=vecs.shape[1:])
        elif mode == "conditioned":
            if alpha is None:
                raise ValueError("conditioned mode needs alpha")
            batch = vecs.shape[1:-1]
            size = None if batch == () else batch
            weights = sample_nu(rng, n, alpha, beta, cfg, size=size)
        else:
            raise ValueError(f"unknown weight mode: {mode}")
    return SlopedFamily(coupled_step(np.asarray(weights), vecs), family.slopes)


@dataclass(frozen=True)
class PolymerEnvironment:
    """Pre-drawn layer weights, one cyclic vector per time layer."""

    weights: np.ndarray  # (layers, ..., N)
    slopes: np.ndarray = None  # (layers,)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim < 2:
            raise ValueError("weights must be (layers, ..., N)")
        if not np.isfinite(w).all():
            raise ValueError("weights must be finite")
        object.__setattr__(self, "weights", w)
        s = self.slopes
        if s is None:
            s = slope(w)
            while s.ndim > 1:
                s = s[..., 0]
        object.__setattr__(self, "slopes", np.atleast_1d(np.asarray(s, dtype=float)))

    @property
    def layers(self) -> int:
        return self.weights.shape[0]


def draw_polymer_environment(rng: RngStream, layers: int, n: int,
                             mode: str = "iid-lig", beta: float = 1.0,
                             gamma: float = None, alpha: float = None,
                             cfg: McmcConfig = McmcConfig(),
                             size=None) -> PolymerEnvironment:
    """Draw a full environment of layer weights for the discrete chain."""
    if layers < 1:
        raise ValueError("need at least one layer")
    draws = []
    for m in range(layers):
        sub = rng.child(m)
        if mode == "iid-lig":
            if gamma is None:
                raise ValueError("iid-lig mode needs gamma")
            shape = (n,) if size is None else (int(size), n)
            draws.append(log_inv_gamma(sub, gamma, beta**-2, size=shape))
        elif mode == "conditioned":
            if alpha is None:
                raise ValueError("conditioned mode needs alpha")
            draws.append(sample_nu(sub, n, alpha, beta, cfg, size=size))
        else:
            raise ValueError(f"unknown weight mode: {mode}")
    return PolymerEnvironment(np.stack(draws))


def polymer_ratio_layer(u_prev, w):
    """Ratio vector of the next polymer layer over the previous one.

    For each site the window sum of the last N backward segment products of
    exp(w - u_prev) is scaled by the closed geometric tail factor, then
    spatially differenced. Convergence requires slope(u_prev) > slope(w).
    Independent route to the same values as d2(w, u_prev).
    """
    u = np.asarray(u_prev, dtype=float)
    w = np.asarray(w, dtype=float)
    if u.shape[-1] != w.shape[-1]:
        raise ValueError("period mismatch")
    n = u.shape[-1]
    gap = slope(w) - slope(u)
    if np.any(gap >= 0):
        raise ValueError("divergent partition sum: slope(u_prev) must exceed slope(w)")
    a = w - u
    # backward closed segments ending at i, lengths 1..N, by repeated rolls
    run = np.zeros_like(a)
    segs = []
    for d in range(n):
        run = run + np.roll(a, d, axis=-1)
        segs.append(run.copy())
    window = logsumexp(np.stack(segs, axis=-1), axis=-1)
    logg = window - np.asarray(np.log1p(-np.exp(gap)))[..., None]
    return u + (logg - np.roll(logg, 1, axis=-1))
