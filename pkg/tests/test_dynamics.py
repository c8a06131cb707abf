"""Time evolution: integrator steps, the discrete chain, polymer recursion."""

import numpy as np
import pytest

import helpers as H
from periodic_pitman.cyclic import SlopedFamily, d2, dk_stack, slope
from periodic_pitman.dynamics import (
    PolymerEnvironment,
    SdeState,
    chain_step,
    draw_polymer_environment,
    em_step_dual,
    em_step_sbe,
    evolve,
    polymer_ratio_layer,
)
from periodic_pitman.samplers import McmcConfig, RngStream

FAST_CFG = McmcConfig(burn_in=400, thin=4)


def make_state(seed=0, n=4, k=2, beta=1.0):
    gen = np.random.default_rng(seed)
    slopes = np.arange(k, dtype=float)
    vecs = 0.3 * gen.standard_normal((k, n))
    vecs = vecs - vecs.mean(axis=-1, keepdims=True) + slopes[:, None] / n
    return SdeState(SlopedFamily(vecs, slopes), beta=beta)


def test_em_step_conserves_slopes():
    state = make_state(1)
    gen = np.random.default_rng(2)
    for step in (em_step_sbe, em_step_dual):
        nxt = step(state, 1e-3, gen.standard_normal(4) * np.sqrt(1e-3))
        np.testing.assert_allclose(slope(nxt.family.vectors),
                                   state.family.slopes, atol=1e-12)
        assert nxt.t == pytest.approx(1e-3)


def test_dual_single_component_matches_coupled():
    # with one component the cross-coupling term is absent
    gen = np.random.default_rng(3)
    vecs = gen.standard_normal((1, 5))
    vecs -= vecs.mean(axis=-1, keepdims=True)
    state = SdeState(SlopedFamily(vecs, np.zeros(1)))
    db = gen.standard_normal(5) * 0.03
    a = em_step_sbe(state, 1e-3, db).family.vectors
    b = em_step_dual(state, 1e-3, db).family.vectors
    np.testing.assert_array_equal(a, b)


def test_em_step_euler_update_explicit():
    vecs = np.array([[0.1, -0.1, 0.2, -0.2]])
    state = SdeState(SlopedFamily(vecs, np.zeros(1)), beta=2.0)
    db = np.array([0.01, -0.02, 0.005, 0.005])
    out = em_step_sbe(state, 1e-2, db).family.vectors[0]
    ex = np.exp(-vecs[0])
    expect = (vecs[0] + (ex - np.roll(ex, 1)) * 1e-2
              + 2.0 * (db - np.roll(db, 1)))
    np.testing.assert_allclose(out, expect, atol=1e-15)


def test_evolve_step_count_and_determinism():
    state = make_state(5)
    final, snaps = evolve(state, dt=1e-2, t_horizon=0.1, rng=RngStream(9),
                          snapshot_stride=5)
    assert final.t == pytest.approx(0.1)
    assert len(snaps) == 2
    again, _ = evolve(state, dt=1e-2, t_horizon=0.1, rng=RngStream(9))
    np.testing.assert_array_equal(final.family.vectors, again.family.vectors)


def test_evolve_rounds_horizon_to_step_grid():
    # an incommensurate horizon runs the nearest whole number of steps
    state = make_state(6)
    final, _ = evolve(state, dt=3e-3, t_horizon=1e-2, rng=RngStream(0))
    assert final.t == pytest.approx(9e-3)


def test_evolve_rejects_bad_step_arguments():
    state = make_state(6)
    with pytest.raises(ValueError):
        evolve(state, dt=-1e-3, t_horizon=1e-2, rng=RngStream(0))
    with pytest.raises(ValueError):
        evolve(state, dt=1e-3, t_horizon=-1.0, rng=RngStream(0))


def test_evolve_zero_horizon_is_noop():
    state = make_state(7)
    final, snaps = evolve(state, dt=1e-3, t_horizon=0.0, rng=RngStream(0))
    np.testing.assert_array_equal(final.family.vectors, state.family.vectors)
    assert snaps == []


def test_stiffness_guard_tames_deep_wells():
    # a deep negative entry makes exp(-u) >> 1/dt; the raw explicit step
    # overshoots by drift*dt ~ 80, the guarded one relaxes smoothly
    vecs = np.array([[-9.0, 3.0, 3.0, 3.0]])
    state = SdeState(SlopedFamily(vecs, np.array([0.0])))
    guarded, _ = evolve(state, 1e-2, 0.05, RngStream(3), stiffness_guard=True)
    assert np.max(np.abs(guarded.family.vectors)) < 10.0
    np.testing.assert_allclose(slope(guarded.family.vectors), 0.0, atol=1e-10)
    # the raw step blows up until the slope consistency check rejects it
    with pytest.raises(ValueError):
        evolve(state, 1e-2, 0.05, RngStream(3), stiffness_guard=False)


def test_sde_state_validation():
    fam = SlopedFamily(np.zeros((1, 3)), np.zeros(1))
    with pytest.raises(ValueError):
        SdeState(fam, beta=0.0)
    with pytest.raises(ValueError):
        SdeState(fam, t=-1.0)


# ---------------------------------------------------------------------------
# discrete chain


def test_chain_step_iid_mode_shapes_and_slopes():
    fam = SlopedFamily(*_batch_family(11, n=3, k=2, batch=40))
    out = chain_step(fam, RngStream(1), mode="iid-lig", beta=1.0, gamma=2.0)
    assert out.vectors.shape == (2, 40, 3)
    np.testing.assert_allclose(slope(out.vectors)[0], 0.0, atol=1e-12)
    np.testing.assert_allclose(slope(out.vectors)[1], 1.0, atol=1e-12)


def test_chain_step_conditioned_mode():
    fam = SlopedFamily(*_batch_family(12, n=2, k=2, batch=30))
    out = chain_step(fam, RngStream(2), mode="conditioned", beta=1.0,
                     alpha=-1.0, cfg=FAST_CFG)
    np.testing.assert_allclose(slope(out.vectors), slope(fam.vectors), atol=1e-11)


def test_chain_step_supplied_weights_bypass_rng():
    fam = SlopedFamily(*_batch_family(13, n=3, k=2, batch=5))
    w = np.full((5, 3), -0.4)
    out = chain_step(fam, RngStream(3), weights=w)
    expect = np.stack([d2(w, fam.vectors[r]) for r in range(2)])
    np.testing.assert_array_equal(out.vectors, expect)


def test_chain_step_mode_errors():
    fam = SlopedFamily(*_batch_family(14, n=2, k=1, batch=2))
    with pytest.raises(ValueError):
        chain_step(fam, RngStream(0), mode="iid-lig")  # gamma missing
    with pytest.raises(ValueError):
        chain_step(fam, RngStream(0), mode="conditioned")  # alpha missing
    with pytest.raises(ValueError):
        chain_step(fam, RngStream(0), mode="bogus", gamma=1.0)


def _batch_family(seed, n, k, batch):
    gen = np.random.default_rng(seed)
    slopes = np.arange(k, dtype=float)
    vecs = 0.3 * gen.standard_normal((k, batch, n))
    vecs = vecs - vecs.mean(axis=-1, keepdims=True) + slopes[:, None, None] / n
    return vecs, slopes


def test_chain_preserves_pointwise_order():
    vecs, slopes = _batch_family(15, n=3, k=3, batch=100)
    fam = SlopedFamily(dk_stack(vecs), slopes)
    out = chain_step(fam, RngStream(5), mode="iid-lig", beta=1.0, gamma=2.0)
    assert np.all(np.diff(out.vectors, axis=0) > 0)


# ---------------------------------------------------------------------------
# polymer environment and ratio recursion


def test_environment_draw_shapes():
    env = draw_polymer_environment(RngStream(7), layers=3, n=4,
                                   mode="iid-lig", beta=1.0, gamma=2.0, size=10)
    assert env.weights.shape == (3, 10, 4)
    assert env.layers == 3
    a = draw_polymer_environment(RngStream(7), layers=3, n=4,
                                 mode="iid-lig", beta=1.0, gamma=2.0, size=10)
    np.testing.assert_array_equal(env.weights, a.weights)


def test_environment_validation():
    with pytest.raises(ValueError):
        PolymerEnvironment(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        PolymerEnvironment(np.full((2, 3), np.inf))
    with pytest.raises(ValueError):
        draw_polymer_environment(RngStream(0), layers=0, n=2, gamma=1.0)
    with pytest.raises(ValueError):
        draw_polymer_environment(RngStream(0), layers=1, n=2, mode="bogus",
                                 gamma=1.0)


def test_polymer_ratio_matches_pair_transform():
    gen = np.random.default_rng(21)
    for n in (1, 2, 4, 8):
        for _ in range(5):
            w = 0.5 * gen.standard_normal(n)
            w -= w.mean()
            u = 0.5 * gen.standard_normal(n)
            u = u - u.mean() + (0.5 + gen.random()) / n
            np.testing.assert_allclose(polymer_ratio_layer(u, w), d2(w, u),
                                       atol=1e-11)


def test_polymer_ratio_matches_window_brute():
    gen = np.random.default_rng(22)
    w = 0.4 * gen.standard_normal(5)
    w -= w.mean()
    u = 0.4 * gen.standard_normal(5)
    u = u - u.mean() + 1.7 / 5
    np.testing.assert_allclose(polymer_ratio_layer(u, w),
                               H.polymer_window_brute(list(u), list(w)),
                               atol=1e-11)


def test_polymer_ratio_slope_domain():
    with pytest.raises(ValueError, match="divergent"):
        polymer_ratio_layer(np.zeros(3), np.full(3, 0.1))
    with pytest.raises(ValueError):
        polymer_ratio_layer(np.zeros(3), np.zeros(4))
