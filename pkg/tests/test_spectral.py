import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptflow.errors import BadDimension, DefectiveMatrix, NoCoalescence
from ptflow.spectral import (
    Phase,
    build_pt_hamiltonian,
    classify_phase,
    eig_biorthogonal,
    ep_order,
    gainloss_chain,
    gainloss_pattern,
    model_family,
    perturbed_jordan,
    two_level,
    with_spectator,
)


@given(a=st.floats(0.0, 0.98), s=st.floats(0.1, 5.0))
def test_two_level_spectrum_unbroken(a, s):
    es = eig_biorthogonal(two_level(s, a))
    expected = np.sort([-s * np.sqrt(1 - a * a), s * np.sqrt(1 - a * a)])
    np.testing.assert_allclose(np.sort(es.energies), expected, atol=1e-10 * s)
    assert np.max(np.abs(es.gammas)) < 1e-10 * s


@given(a=st.floats(1.02, 5.0))
def test_two_level_spectrum_broken_is_conjugate_pair(a):
    es = eig_biorthogonal(two_level(1.0, a))
    g = np.sqrt(a * a - 1)
    np.testing.assert_allclose(es.gammas, [g, -g], atol=1e-10)
    np.testing.assert_allclose(es.energies, 0.0, atol=1e-10)


@pytest.mark.parametrize(
    "a, phase",
    [(0.0, Phase.UNBROKEN), (0.6, Phase.UNBROKEN), (1.0, Phase.EXCEPTIONAL), (1.25, Phase.BROKEN), (2.0, Phase.BROKEN)],
)
def test_phase_labels(a, phase):
    assert classify_phase(two_level(1.0, a)).phase is phase


def test_exceptional_point_raises_defective():
    with pytest.raises(DefectiveMatrix) as info:
        eig_biorthogonal(two_level(1.0, 1.0))
    assert info.value.cond > 1e8


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 6))
@settings(max_examples=40)
def test_biorthogonal_reconstruction(seed, n):
    rng = np.random.default_rng(seed)
    H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    es = eig_biorthogonal(H)
    scale = np.linalg.norm(H, 2)
    assert np.linalg.norm(es.reconstruct() - H, 2) < 1e-9 * scale * es.cond
    off = es.overlaps - np.diag(np.diag(es.overlaps))
    assert np.max(np.abs(off)) < 1e-9 * es.cond
    for k in range(n):
        lam = es.eigenvalues[k]
        assert np.linalg.norm(H @ es.right[:, k] - lam * es.right[:, k]) < 1e-9 * scale * es.cond
        assert np.linalg.norm(es.left[:, k].conj() @ H - lam * es.left[:, k].conj()) < 1e-9 * scale * es.cond


def test_ordering_by_gamma_then_energy():
    H = np.diag([1.0 + 0.5j, 2.0 + 0.0j, -1.0 + 0.5j, 0.0 - 1.0j])
    es = eig_biorthogonal(H)
    np.testing.assert_allclose(es.eigenvalues, [1 + 0.5j, -1 + 0.5j, 2.0, -1j])


def test_degenerate_hermitian_block_is_biorthonormal():
    H = np.diag([1.0, 1.0, 2.0]).astype(complex)
    es = eig_biorthogonal(H)
    np.testing.assert_allclose(np.abs(es.overlaps), np.eye(3), atol=1e-12)


def test_gainloss_pattern_is_antisymmetric():
    for n in range(2, 9):
        p = gainloss_pattern(n)
        np.testing.assert_array_equal(p, -p[::-1])
        if n % 2:
            assert p[n // 2] == 0


@pytest.mark.parametrize("n", [3, 4])
def test_gainloss_chain_pt_symmetric_and_unbroken(n):
    H = gainloss_chain(n, 1.0, 0.3)
    P = np.fliplr(np.eye(n))
    # PT: P H* P = H
    np.testing.assert_allclose(P @ H.conj() @ P, H)
    assert classify_phase(H).phase is Phase.UNBROKEN


def test_gainloss_chain_broken_spectrum_closed_under_conjugation():
    H = gainloss_chain(4, 1.0, 1.5)
    w = np.linalg.eigvals(H)
    assert classify_phase(H).phase is Phase.BROKEN
    assert np.max(np.min(np.abs(w[:, None] - w.conj()[None, :]), axis=1)) < 1e-10


def test_chain_too_short():
    with pytest.raises(BadDimension):
        gainloss_chain(1)


def test_ep_order_two_level():
    est = ep_order(lambda a: two_level(1.0, a), 1.0)
    assert est.p == 2
    assert abs(est.fit_exponent - 0.5) < 0.02


def test_ep_order_jordan_block():
    # eigenvalues are the cube roots of lam, so the gap scales as lam**(1/3)
    est = ep_order(lambda lam: perturbed_jordan(3, lam), 0.0, side=+1)
    assert est.p == 3
    assert abs(est.fit_exponent - 1 / 3) < 1e-6


def test_ep_order_hermitian_family_has_no_ep():
    with pytest.raises(NoCoalescence):
        ep_order(lambda lam: np.diag([lam, -lam]).astype(complex) + np.eye(2), 0.0, side=+1)


def test_builders():
    np.testing.assert_allclose(build_pt_hamiltonian("two_level", s=2.0, a=0.5), two_level(2.0, 0.5))
    H = build_pt_hamiltonian("two_level_spectator", a=1.0, level=3.0)
    np.testing.assert_allclose(H, with_spectator(two_level(1.0, 1.0), 3.0))
    fam = model_family("gainloss_chain", "gamma", n=3)
    np.testing.assert_allclose(fam(0.2), gainloss_chain(3, 1.0, 0.2))
    with pytest.raises(ValueError):
        build_pt_hamiltonian("nope")
