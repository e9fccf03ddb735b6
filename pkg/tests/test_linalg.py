import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_su2
from dirguess import linalg as la
from dirguess.errors import DimensionError, NotHermitianError, NotPositiveError
from oracles import PSI_M, PSI_P, X

seeds = st.integers(0, 2**32 - 1)


def rand_herm(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (z + z.conj().T) / 2


def rand_psd(rng, n, rank=None):
    z = rng.normal(size=(n, rank or n)) + 1j * rng.normal(size=(n, rank or n))
    return z @ z.conj().T


def test_kron_identity():
    assert np.array_equal(la.kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_left_factor_is_slow_index():
    ket10 = np.array([0, 0, 1, 0])
    assert np.allclose(la.kron(X, np.eye(2)) @ ket10, [1, 0, 0, 0])


def test_singlet_invariant_under_random_product_unitaries(rng):
    for _ in range(50):
        u = random_su2(rng)
        assert np.linalg.norm(la.kron(u, u) @ PSI_M - PSI_M) < 1e-10


@given(seeds)
def test_kron_mixed_product_and_associativity(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (rand_herm(rng, 2) for _ in range(4))
    assert np.allclose(la.kron(a, b) @ la.kron(c, d), la.kron(a @ c, b @ d), atol=1e-10)
    assert np.allclose(la.kron(la.kron(a, b), c), la.kron(a, la.kron(b, c)), atol=1e-10)


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionError):
        la.matmul(np.eye(2), np.eye(3))


def test_herm_eig_examples():
    w, _ = la.herm_eig(np.diag([4.0, 2.0, 3.0, 1.0]))
    assert np.allclose(w, [1, 2, 3, 4])
    w, _ = la.herm_eig(np.outer(PSI_M, PSI_M))
    assert np.allclose(w, [0, 0, 0, 1], atol=1e-12)
    # abstain element with lambda_0 = 1 - 0.5926 on the singlet and nothing on the triplet
    w, _ = la.herm_eig(0.4074 * np.outer(PSI_M, PSI_M))
    assert np.allclose(w, [0, 0, 0, 0.4074], atol=1e-12)


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        la.herm_eig(np.array([[0, 1], [0, 0]], dtype=complex))


@given(seeds, st.integers(1, 32))
def test_herm_eig_reconstruction(seed, n):
    a = rand_herm(np.random.default_rng(seed), n)
    w, v = la.herm_eig(a)
    assert np.all(np.diff(w) >= 0)
    assert np.linalg.norm(a - v @ np.diag(w) @ v.conj().T) < 1e-9


def test_psd_power_examples():
    assert np.allclose(la.psd_power(np.eye(4), -0.5), np.eye(4))
    assert np.allclose(la.psd_power(np.diag([4.0, 1, 1, 1]), 0.5), np.diag([2.0, 1, 1, 1]))
    ps = np.outer(PSI_M, PSI_M.conj())
    accept = 0.25 * ps + (np.eye(4) - ps)
    assert np.allclose(la.psd_power(accept, -0.5), 2 * ps + (np.eye(4) - ps), atol=1e-12)


def test_psd_power_pseudo_inverse_on_support():
    pp = np.outer(PSI_P, PSI_P.conj())
    a = 0.25 * pp
    assert np.allclose(la.psd_power(a, -0.5), 2 * pp, atol=1e-12)
    assert np.allclose(la.support_projector(a), pp, atol=1e-12)


def test_psd_power_rejects_negative():
    with pytest.raises(NotPositiveError):
        la.psd_power(np.diag([1.0, -1e-6]), 0.5)
    # tiny roundoff negatives are tolerated
    la.psd_power(np.diag([1.0, -1e-12]), 0.5)


def test_psd_square_root_on_100_random_matrices(rng):
    for _ in range(100):
        n = int(rng.integers(1, 33))
        a = rand_psd(rng, n, rank=int(rng.integers(1, n + 1)))
        r = la.psd_power(a, 0.5)
        assert np.linalg.norm(r @ r - a) < 1e-9 * max(1.0, np.linalg.norm(a))


def test_psd_power_stack_matches_single(rng):
    mats = np.array([rand_psd(rng, 4, rank=r) for r in (1, 2, 4)])
    got = la.psd_power_stack(mats, -0.5)
    for g, m in zip(got, mats):
        assert np.allclose(g, la.psd_power(m, -0.5), atol=1e-10)
