import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticewalk.analysis import factorization_residual, marginal
from latticewalk.coins import (
    COIN_NAMES,
    CoinOperator,
    CoinSchedule,
    hadamard_2x2,
    hwp_matrix,
    kron_coin,
    named_coin,
)
from latticewalk.oracle import one_dimensional_walk
from latticewalk.walk import (
    NormalizationError,
    WalkState,
    apply_coin,
    apply_step,
    evolve,
    new_localized_state,
    position_distribution,
    trajectory,
)

ORIGIN = (0, 0, -1, -1)
identity = CoinSchedule.constant(CoinOperator(np.eye(4), "I"))


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_localized_state_origin():
    s = new_localized_state(*ORIGIN)
    assert s.amplitudes == {ORIGIN: 1 + 0j}
    assert s.step_count == 0


def test_localized_state_elsewhere():
    s = new_localized_state(5, -3, 1, -1)
    assert s.amplitudes == {(5, -3, 1, -1): 1 + 0j}
    assert s.norm_squared() == 1


@pytest.mark.parametrize("coin", [(0, 0), (2, 1), (1, 0), (-1, 3)])
def test_localized_state_bad_coin(coin):
    with pytest.raises(ValueError):
        new_localized_state(0, 0, *coin)


def test_identity_coin_leaves_state():
    s = WalkState.from_amplitudes({(0, 0, -1, -1): 0.6, (2, 0, 1, 1): 0.8j})
    assert apply_coin(s, identity, 0).amplitudes == s.amplitudes


def test_hadamard_coin_on_origin():
    # (|+1> - |-1>)(|+1> - |-1>)/2 read out in COIN_ORDER.
    s = apply_coin(new_localized_state(*ORIGIN), named_coin("hadamard"), 0)
    got = [s.amplitude(0, 0, *c) for c in [(-1, -1), (-1, 1), (1, 1), (1, -1)]]
    assert np.allclose(got, [0.5, -0.5, 0.5, -0.5], atol=1e-15)


def test_position_dependent_coin():
    a, b = hwp_matrix(1, np.pi / 8), hwp_matrix(3, np.pi / 8)
    sched = CoinSchedule.constant(a).with_override(b, lambda x1, x2: (x1, x2) == (1, 1))
    s = WalkState.from_amplitudes({(0, 0, -1, -1): np.sqrt(0.5), (1, 1, -1, -1): np.sqrt(0.5)})
    out = apply_coin(s, sched, 0)
    v0 = np.sqrt(0.5) * a.matrix[:, 0]
    v1 = np.sqrt(0.5) * b.matrix[:, 0]
    assert np.allclose(out.sites[(0, 0)], v0)
    assert np.allclose(out.sites[(1, 1)], v1)


def test_step_origin():
    s = apply_step(new_localized_state(*ORIGIN))
    assert s.amplitudes == {(-1, -1, -1, -1): 1}
    assert s.step_count == 1


def test_step_other():
    assert apply_step(new_localized_state(2, -2, 1, -1)).amplitudes == {(3, -3, 1, -1): 1}


def test_step_superposition():
    s = WalkState.from_amplitudes({(0, 0, 1, 1): 0.6, (0, 0, -1, 1): 0.8j})
    assert apply_step(s).amplitudes == {(1, 1, 1, 1): 0.6, (-1, 1, -1, 1): 0.8j}


def test_evolve_zero_steps():
    s = new_localized_state(*ORIGIN)
    out = evolve(s, named_coin("controlled_xz"), 0)
    assert out.amplitudes == s.amplitudes and out.step_count == 0


def test_evolve_negative():
    with pytest.raises(ValueError):
        evolve(new_localized_state(*ORIGIN), identity, -1)


def test_one_hadamard_step_corners():
    p = position_distribution(evolve(new_localized_state(*ORIGIN), named_coin("hadamard"), 1))
    assert set(p.weights) == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
    for v in p.weights.values():
        assert v == pytest.approx(0.25, abs=1e-15)


def test_ten_hadamard_steps_factorise():
    p = position_distribution(evolve(new_localized_state(*ORIGIN), named_coin("hadamard"), 10))
    assert factorization_residual(p) < 1e-10
    ref = one_dimensional_walk((0, -1), hadamard_2x2(), 10)
    for axis in (1, 2):
        m = marginal(p, axis)
        assert set(m) == set(ref)
        assert max(abs(m[x] - ref[x]) for x in ref) < 1e-12


def test_localized_distribution_is_delta():
    p = position_distribution(new_localized_state(3, -1, 1, 1))
    assert dict(p.weights) == {(3, -1): 1.0}


def test_coin_does_not_move_probability():
    s = evolve(new_localized_state(*ORIGIN), named_coin("controlled_xz"), 3)
    before = position_distribution(s)
    after = position_distribution(apply_coin(s, named_coin("controlled_xz"), 3))
    assert before.weights.keys() == after.weights.keys()
    for k in before.weights:
        assert after.weights[k] == pytest.approx(before.weights[k], abs=1e-14)


def test_broken_coin_detected():
    # Bypass construction checks to simulate a coin-construction bug.
    bad = CoinOperator(np.eye(4))
    object.__setattr__(bad, "matrix", 1.1 * np.eye(4))
    with pytest.raises(NormalizationError):
        apply_coin(new_localized_state(*ORIGIN), CoinSchedule.constant(bad), 0)


def test_state_is_immutable():
    s = new_localized_state(*ORIGIN)
    with pytest.raises(TypeError):
        s.sites[(9, 9)] = np.zeros(4)
    with pytest.raises(ValueError):
        s.sites[(0, 0)][0] = 3


def test_trajectory_matches_evolve():
    sched = named_coin("nonlinear_cz_diagonal")
    traj = trajectory(new_localized_state(*ORIGIN), sched, 5)
    assert [s.step_count for s in traj] == list(range(6))
    direct = evolve(new_localized_state(*ORIGIN), sched, 5).amplitudes
    assert all(abs(traj[-1].amplitudes[k] - a) < 1e-15 for k, a in direct.items())


def test_staged_needs_stages():
    with pytest.raises(ValueError, match="stages"):
        evolve(new_localized_state(*ORIGIN), identity, 1, mode="staged")


@pytest.mark.parametrize("name", ["hadamard", "controlled_xz"])
@pytest.mark.parametrize("n", [1, 2])
def test_staged_matches_combined(name, n):
    s0 = new_localized_state(*ORIGIN)
    a = evolve(s0, named_coin(name), n).amplitudes
    b = evolve(s0, named_coin(name), n, mode="staged").amplitudes
    assert set(a) == set(b)
    assert max(abs(a[k] - b[k]) for k in a) < 1e-12


def test_staged_eom_uses_pre_shift_position():
    # The diagonal test uses the site before the x2 shift: (1, -1) gets no phase,
    # (2, 2) picks up -1 on coin (-1, -1).
    sched = named_coin("nonlinear_cz_diagonal")
    s0 = new_localized_state(1, -1, -1, -1)
    staged = evolve(s0, sched, 1, mode="staged").amplitudes
    plain = evolve(s0, named_coin("hadamard"), 1).amplitudes
    assert max(abs(staged[k] - plain[k]) for k in plain) < 1e-15
    s1 = new_localized_state(2, 2, -1, -1)
    on = evolve(s1, sched, 1, mode="staged").amplitudes
    assert max(abs(on[k] + plain_k) for k, plain_k in
               evolve(s1, named_coin("hadamard"), 1).amplitudes.items()) < 1e-15


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(0, 12))
def test_unitarity_random_schedule(seed, n):
    rng = np.random.default_rng(seed)
    ops = [CoinOperator(random_unitary(rng, 4)) for _ in range(3)]
    sched = (CoinSchedule.constant(ops[0])
             .with_override(ops[1], lambda x1, x2: (x1 + 3 * x2) % 3 == 0)
             .with_override(ops[2], lambda x1, x2: True, lambda step: step % 2 == 1))
    s = evolve(new_localized_state(*ORIGIN), sched, n)
    assert abs(s.norm_squared() - 1) < 1e-9
    assert len(s) <= 4 * (n + 1) ** 2
    for (x1, x2, _, _) in s.amplitudes:
        assert (x1 - n) % 2 == 0 and (x2 - n) % 2 == 0
        assert abs(x1) <= n and abs(x2) <= n


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8))
def test_separable_coin_gives_product_distribution(seed, n):
    rng = np.random.default_rng(seed)
    u1, u2 = random_unitary(rng, 2), random_unitary(rng, 2)
    sched = CoinSchedule.constant(CoinOperator(kron_coin(u1, u2)))
    assert sched.separable
    a = rng.normal(size=2) + 1j * rng.normal(size=2)
    b = rng.normal(size=2) + 1j * rng.normal(size=2)
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    init = {(0, 0, c1, c2): a[(c1 + 1) // 2] * b[(c2 + 1) // 2] for c1 in (-1, 1) for c2 in (-1, 1)}
    p = position_distribution(evolve(WalkState.from_amplitudes(init), sched, n))
    assert factorization_residual(p) < 1e-10


@pytest.mark.parametrize("name", COIN_NAMES)
def test_norm_after_twelve_steps(name):
    s = evolve(new_localized_state(*ORIGIN), named_coin(name), 12)
    assert abs(s.norm_squared() - 1) < 1e-9
    assert position_distribution(s).is_normalized()
