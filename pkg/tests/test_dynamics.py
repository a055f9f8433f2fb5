import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import closed_form_D, closed_form_U
from ptflow.dynamics import (
    DistinguishabilitySeries,
    check_density_matrix,
    distinguishability_series,
    evolve,
    evolve_spectral,
    evolve_state,
    oscillation_period,
    propagator,
    pure_state,
    pure_trace_distance,
    recurrence_time,
    relaxation_time,
    spectral_recurrence,
    tail_exponent,
    trace_distance,
)
from ptflow.errors import DimensionMismatch, FitUnstable, NonExponentialTail, NoRecurrence
from ptflow.spectral import eig_biorthogonal, gainloss_chain, two_level

UP = pure_state([1, 0])
DOWN = pure_state([0, 1])


def random_density(rng, n, rank=None):
    rank = rank or n
    A = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


@given(a=st.floats(0.0, 0.95), t=st.floats(0.0, 20.0))
def test_propagator_matches_closed_form(a, t):
    U = propagator(two_level(1.0, a), t, shift=0.0)
    np.testing.assert_allclose(U, closed_form_U(t, a), atol=1e-9 * max(1.0, np.abs(closed_form_U(t, a)).max()))


@pytest.mark.parametrize("a", [0.25, 0.5, 0.75, 0.9])
def test_series_matches_closed_form(a):
    T = np.pi / np.sqrt(1 - a * a)
    s = distinguishability_series(two_level(1.0, a), UP, DOWN, 3 * T, 500)
    np.testing.assert_allclose(s.values, closed_form_D(s.times, a), atol=1e-8)


def test_ep_series_matches_limit():
    s = distinguishability_series(two_level(1.0, 1.0), UP, DOWN, 20.0, 400)
    np.testing.assert_allclose(s.values, closed_form_D(s.times, 1.0), atol=1e-8)


def test_spectral_and_expm_evolution_agree():
    H = gainloss_chain(4, 1.0, 0.3)
    rho = pure_state([1, 0.5j, 0, -0.2])
    es = eig_biorthogonal(H)
    for t in (0.3, 2.0, 7.5):
        np.testing.assert_allclose(evolve_spectral(es, rho, t), evolve(H, rho, t), atol=1e-10)


def test_evolved_state_is_density_matrix():
    rng = np.random.default_rng(3)
    rho = random_density(rng, 3)
    out = evolve(gainloss_chain(3, 1.0, 2.0), rho, 5.0)
    check_density_matrix(out, atol=1e-10)


def test_pure_state_evolution_consistent_with_density():
    H = two_level(1.0, 1.4)
    psi = evolve_state(H, [1, 1j], 3.0)
    np.testing.assert_allclose(np.outer(psi, psi.conj()), evolve(H, pure_state([1, 1j]), 3.0), atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4))
@settings(max_examples=50)
def test_trace_distance_metric_axioms(seed, n):
    rng = np.random.default_rng(seed)
    r1, r2, r3 = (random_density(rng, n) for _ in range(3))
    d12, d13, d23 = trace_distance(r1, r2), trace_distance(r1, r3), trace_distance(r2, r3)
    assert 0.0 <= d12 <= 1.0
    assert trace_distance(r1, r1) < 1e-12
    assert abs(d12 - trace_distance(r2, r1)) < 1e-12
    assert d13 <= d12 + d23 + 1e-12


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_pure_state_formula_agrees(seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=3) + 1j * rng.normal(size=3)
    phi = rng.normal(size=3) + 1j * rng.normal(size=3)
    assert abs(pure_trace_distance(psi, phi) - trace_distance(pure_state(psi), pure_state(phi))) < 1e-10


@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0.0, 10.0))
@settings(max_examples=30)
def test_unitary_evolution_preserves_distance(seed, t):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    H = A + A.conj().T
    r1, r2 = random_density(rng, 3), random_density(rng, 3)
    assert abs(trace_distance(evolve(H, r1, t), evolve(H, r2, t)) - trace_distance(r1, r2)) < 1e-9


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        trace_distance(np.eye(2) / 2, np.eye(3) / 3)


def test_recurrence_time_a06():
    a = 0.6
    T = np.pi / np.sqrt(1 - a * a)
    r = recurrence_time(distinguishability_series(two_level(1.0, a), UP, DOWN, 3 * T, 2000))
    assert abs(r.value - T) / T < 1e-3
    assert r.details["commensurable"]
    # Bohr gap is 2 sqrt(1 - a^2), so 2 pi / gap equals T
    assert abs(r.details["spectral_estimate"] - T) < 1e-9


def test_recurrence_absent_for_constant_series():
    s = DistinguishabilitySeries(np.linspace(0, 1, 10), np.ones(10))
    with pytest.raises(NoRecurrence):
        recurrence_time(s)


def test_spectral_recurrence_incommensurate():
    H = np.diag([0.0, 1.0, np.sqrt(2)]).astype(complex)
    period, comm = spectral_recurrence(eig_biorthogonal(H))
    assert not comm
    assert period == pytest.approx(2 * np.pi / (np.sqrt(2) - 1))


@pytest.mark.parametrize("a", [1.25, 2.0])
def test_relaxation_time(a):
    tau = 1 / (2 * np.sqrt(a * a - 1))
    dg = 2 * np.sqrt(a * a - 1)
    r = relaxation_time(distinguishability_series(two_level(1.0, a), UP, DOWN, 10 / dg, 2000))
    assert abs(r.value - tau) / tau < 0.05


def test_relaxation_rejects_power_law():
    t = np.linspace(1, 100, 200)
    with pytest.raises(NonExponentialTail):
        relaxation_time(DistinguishabilitySeries(t, 1 / t**2), tail_fraction=0.9)


def test_tail_exponent_at_ep():
    s = distinguishability_series(two_level(1.0, 1.0), UP, DOWN, 100.0, 4000)
    r = tail_exponent(s, (10.0, 100.0))
    assert abs(r.value - 2.0) < 0.05


def test_tail_exponent_unstable_on_noise():
    rng = np.random.default_rng(0)
    t = np.linspace(1, 2, 5)
    with pytest.raises(FitUnstable):
        tail_exponent(DistinguishabilitySeries(t, np.exp(rng.normal(size=5) * 3)), (1, 2))


def test_oscillation_period():
    t = np.linspace(0, 50, 5001)
    assert oscillation_period(t, np.cos(2 * np.pi * t / 3.7)) == pytest.approx(3.7, rel=1e-4)


def test_csv_roundtrip(tmp_path):
    s = distinguishability_series(two_level(1.0, 0.5), UP, DOWN, 1.0, 11)
    text = s.to_csv(tmp_path / "d.csv")
    rows = text.strip().splitlines()
    assert rows[0] == "t,D"
    assert float(rows[-1].split(",")[1]) == s.values[-1]
