import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirguess import hilbert as hb
from oracles import PSI_M, PSI_P, PHI_M, PHI_P, X, Y, Z, bloch_first, rotation_expm, tetrahedron_by_angles

unit_vectors = (
    st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3)
    .map(np.array)
    .filter(lambda v: np.linalg.norm(v) > 1e-3)
    .map(lambda v: v / np.linalg.norm(v))
)


def sigma(n):
    return n[0] * X + n[1] * Y + n[2] * Z


def test_bell_columns_match_hand_written_states():
    for col, ref in zip(hb.BELL_MATRIX.T, (PSI_M, PSI_P, PHI_P, PHI_M)):
        assert np.allclose(col, ref)


def test_bell_round_trip(rng):
    for _ in range(20):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        assert np.allclose(hb.from_bell(hb.to_bell(v)), v, atol=1e-12)


def test_direction_requires_unit_norm():
    with pytest.raises(ValueError):
        hb.Direction(1.0, 1.0, 0.0)


def test_su2_examples():
    assert np.allclose(hb.su2_rotation(hb.Direction(0, 0, 1)), np.eye(2))
    assert np.allclose(hb.su2_rotation(hb.Direction(0, 0, -1)), [[0, -1], [1, 0]])
    u = hb.su2_rotation(hb.Direction(1, 0, 0))
    assert np.linalg.norm(u @ Z @ u.conj().T - X) < 1e-10


@given(unit_vectors)
def test_su2_matches_matrix_exponential(n):
    u = hb.su2_rotation(hb.Direction.from_vector(n))
    assert np.allclose(u, rotation_expm(n), atol=1e-10)


def test_su2_unitary_det_one_and_conjugation(rng):
    for _ in range(1000):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        u = hb.su2_rotation(hb.Direction.from_vector(n))
        assert np.linalg.norm(u @ u.conj().T - np.eye(2)) < 1e-10
        assert abs(np.linalg.det(u) - 1) < 1e-10
        assert np.linalg.norm(u @ Z @ u.conj().T - sigma(n)) < 1e-10


@given(unit_vectors)
def test_rotation_commutes_with_triplet_projector(n):
    uu = hb.two_qubit_rotation(hb.Direction.from_vector(n))
    assert np.linalg.norm(uu @ hb.P_TRIPLET - hb.P_TRIPLET @ uu) < 1e-10
    assert np.linalg.norm(hb.rotate_two_qubit(hb.Direction.from_vector(n), PSI_M) - PSI_M) < 1e-10


def test_rotate_plus_z_is_identity(rng):
    s = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert np.allclose(hb.rotate_two_qubit(hb.Direction(0, 0, 1), s), s)


def test_rotate_n2_on_01_gives_first_qubit_bloch_n2():
    n2 = hb.TETRAHEDRON[1]
    s = hb.rotate_two_qubit(n2, np.array([0, 1, 0, 0], dtype=complex))
    assert np.allclose(bloch_first(s), n2.vec, atol=1e-9)
    assert np.allclose(hb.local_bloch_first(s), n2.vec, atol=1e-9)


def test_build_input_state_examples():
    assert np.allclose(hb.build_input_state(hb.InputStateSpec(1.0, (0.3, 0.4j, np.sqrt(0.75)))), PSI_M)
    assert np.allclose(hb.build_input_state(hb.InputStateSpec(1 / np.sqrt(2))), [0, 1, 0, 0])
    b = hb.to_bell(hb.build_input_state(hb.InputStateSpec(0.5)))
    assert np.allclose(b, [0.5, np.sqrt(3) / 2, 0, 0])


@given(st.floats(0, 1), st.tuples(*[st.floats(-1, 1)] * 6).filter(lambda t: np.linalg.norm(t) > 1e-3))
def test_build_input_state_bell_projection(c0, t):
    v = np.array(t[:3]) + 1j * np.array(t[3:])
    v /= np.linalg.norm(v)
    spec = hb.InputStateSpec(c0, tuple(v))
    s = hb.build_input_state(spec)
    b = hb.to_bell(s)
    c1 = np.sqrt(1 - c0**2)
    # Bell order (psi-, psi+, phi+, phi-); psi_sym is over (phi+, psi+, phi-)
    assert np.allclose(b, [c0, c1 * v[1], c1 * v[0], c1 * v[2]], atol=1e-12)
    assert abs(np.linalg.norm(s) - 1) < 1e-12
    assert abs(abs(b[0]) ** 2 - c0**2) < 1e-12


def test_tetrahedron():
    tet = hb.direction_tetrahedron()
    assert np.allclose(tet[0].vec, [0, 0, 1])
    assert np.allclose(tet[1].vec, [2 * np.sqrt(2) / 3, 0, -1 / 3], atol=1e-12)
    for got, want in zip(tet, tetrahedron_by_angles()):
        assert np.allclose(got.vec, want, atol=1e-12)
    for i in range(4):
        for j in range(i + 1, 4):
            assert abs(tet[i].dot(tet[j]) + 1 / 3) < 1e-12


def test_tetrahedron_from_qubit_states():
    # Bloch vectors of |0> and (|0> + sqrt2 w^k |1>)/sqrt3
    w = np.exp(2j * np.pi / 3)
    kets = [np.array([1, 0])] + [np.array([1, np.sqrt(2) * w**k]) / np.sqrt(3) for k in range(3)]
    for ket, n in zip(kets, hb.TETRAHEDRON):
        rho = np.outer(ket, ket.conj())
        assert np.allclose([np.trace(rho @ p).real for p in (X, Y, Z)], n.vec, atol=1e-12)


def test_rotated_bell():
    for n in hb.TETRAHEDRON + hb.AXES:
        assert np.allclose(hb.rotated_bell(n, hb.Bell.PSI_MINUS), PSI_M, atol=1e-12)
    assert np.allclose(hb.rotated_bell(hb.Direction(0, 0, 1), hb.Bell.PSI_PLUS), PSI_P)
    for i in range(4):
        for j in range(i + 1, 4):
            a = hb.rotated_bell(hb.TETRAHEDRON[i], hb.Bell.PSI_PLUS)
            b = hb.rotated_bell(hb.TETRAHEDRON[j], hb.Bell.PSI_PLUS)
            assert abs(np.vdot(a, b) + 1 / 3) < 1e-10
