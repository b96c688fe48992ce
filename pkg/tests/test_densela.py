import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_hermitian, random_state
from fullerene_gates import densela
from fullerene_gates.errors import DimensionMismatch, NonHermitianInput, SimulationError
from fullerene_gates.spin_model import spin_operators

P_HAT = 1j * np.fliplr(np.eye(4))


def kron_oracle(a, b):
    # element-by-element definition, independent of np.kron
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def test_kron_identity():
    np.testing.assert_array_equal(densela.kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_sz_identity_diagonal():
    got = densela.kron(spin_operators()["s_z"], np.eye(4))
    expected = np.diag(np.repeat([3, 1, -1, -3], 4) / 2)
    np.testing.assert_array_equal(got, expected)


def test_kron_matches_index_formula(rng):
    a = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    b = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
    np.testing.assert_allclose(densela.kron(a, b), kron_oracle(a, b), atol=0)


@pytest.mark.parametrize("n", [2, 4])
def test_kron_mixed_product(rng, n):
    a, b, c, d = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(4))
    lhs = densela.kron(a, b) @ densela.kron(c, d)
    rhs = densela.kron(a @ c, b @ d)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(rhs))


def test_herm_expm_zero_is_identity():
    np.testing.assert_array_equal(densela.herm_expm(np.zeros((4, 4)), 5.0), np.eye(4))


def test_herm_expm_sx_pi_is_i_antidiag():
    u = densela.herm_expm(spin_operators()["s_x"], math.pi)
    assert np.linalg.norm(u - P_HAT) <= 1e-10


def test_herm_expm_semigroup(rng):
    h = random_hermitian(rng, 16)
    u = densela.herm_expm(h, 0.3) @ densela.herm_expm(h, 1.1)
    assert np.linalg.norm(u - densela.herm_expm(h, 1.4)) <= 1e-10


def test_herm_expm_diagonal_is_elementwise(rng):
    e = rng.normal(size=16) * 50
    u = densela.herm_expm(np.diag(e), 0.7)
    np.testing.assert_allclose(u, np.diag(np.exp(-1j * e * 0.7)), atol=1e-14)


def test_herm_expm_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        densela.herm_expm(np.array([[0, 1], [0, 0]]), 1.0)


def test_errors_share_base_class():
    assert issubclass(NonHermitianInput, SimulationError)
    assert issubclass(DimensionMismatch, ValueError)


def test_hermitian_tolerance_is_relative():
    h = np.diag([1e6, -1e6]).astype(complex)
    h[0, 1] = 1e-8  # tiny defect relative to the norm
    assert densela.is_hermitian(h)
    assert not densela.is_hermitian(np.array([[0, 1e-3], [0, 0]]))


def test_batch_matches_single(rng):
    hs = np.stack([random_hermitian(rng, 4) for _ in range(5)])
    dts = rng.uniform(0, 2, size=5)
    batch = densela.herm_expm_batch(hs, dts)
    for h, dt, u in zip(hs, dts, batch):
        np.testing.assert_allclose(u, densela.herm_expm(h, dt), atol=1e-12)


def test_dagger_involution(rng):
    m = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
    np.testing.assert_array_equal(densela.dagger(densela.dagger(m)), m)


def test_frob_norm_identity():
    assert densela.frob_norm(np.eye(16)) == pytest.approx(4.0, abs=1e-15)


def test_apply_p_hat_to_top_state():
    out = densela.apply(densela.herm_expm(spin_operators()["s_x"], math.pi), [1, 0, 0, 0])
    np.testing.assert_allclose(out, [0, 0, 0, 1j], atol=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        densela.matmul(np.eye(3), np.eye(4))
    with pytest.raises(DimensionMismatch):
        densela.apply(np.eye(4), np.ones(3))


def test_commutator_of_commuting_is_zero():
    sz = spin_operators()["s_z"]
    assert densela.frob_norm(densela.commutator(sz, sz @ sz)) == 0


def test_basis_state_normalized():
    v = densela.basis_state(16, 5)
    assert densela.is_normalized(v) and v[5] == 1


_complex = st.complex_numbers(max_magnitude=20, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(arrays(np.complex128, (6, 6), elements=_complex), st.floats(-50, 50))
def test_unitarity_property(a, t):
    h = (a + a.conj().T) / 2
    u = densela.herm_expm(h, t)
    assert densela.unitarity_defect(u) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_apply_preserves_norm(seed):
    rng = np.random.default_rng(seed)
    u = densela.herm_expm(random_hermitian(rng, 16, 10.0), rng.uniform(-3, 3))
    v = random_state(rng, 16)
    assert abs(np.linalg.norm(densela.apply(u, v)) - 1) <= 1e-10
