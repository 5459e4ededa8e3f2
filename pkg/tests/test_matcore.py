import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blochbody.matcore import (
    DensityMatrix,
    NotAStateError,
    UnsupportedConfigurationError,
    ValidationError,
    eigh_batch,
    eigvalsh_batch,
    hermitian_eigenvalues,
    kron_all,
    maximally_mixed,
    partial_trace,
    partial_trace_array,
    partial_transpose,
    partial_transpose_array,
    psd_sqrt_batch,
    seeded_rng,
    split_seed,
    tensor,
)

from conftest import ginibre_states, random_kets


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


# --- eigensolver ------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4, 8, 16, 32])
def test_jacobi_matches_lapack(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        h = random_hermitian(rng, n)
        ours = hermitian_eigenvalues(h)
        ref = np.sort(np.linalg.eigvalsh(h))[::-1]
        scale = max(1.0, np.abs(ref).max())
        assert np.max(np.abs(ours - ref)) / scale <= 1e-11


def test_eigenvalues_descending_and_vectors_diagonalise():
    rng = np.random.default_rng(3)
    h = np.array([random_hermitian(rng, 6) for _ in range(20)])
    w, v = eigh_batch(h)
    assert np.all(np.diff(w, axis=1) <= 1e-14)
    recon = v @ (w[..., None] * np.conj(np.swapaxes(v, 1, 2)))
    assert np.max(np.abs(recon - h)) < 1e-12
    eye = np.conj(np.swapaxes(v, 1, 2)) @ v
    assert np.max(np.abs(eye - np.eye(6))) < 1e-12


def test_degenerate_and_diagonal_inputs():
    np.testing.assert_allclose(hermitian_eigenvalues(np.eye(4)), [1, 1, 1, 1], atol=0)
    np.testing.assert_allclose(hermitian_eigenvalues(np.diag([0.2, 0.5, 0.0, 0.3])), [0.5, 0.3, 0.2, 0.0], atol=0)
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    np.testing.assert_allclose(hermitian_eigenvalues(np.outer(phi, phi)), [1, 0, 0, 0], atol=1e-15)


def test_eigenvalue_input_validation():
    with pytest.raises(ValidationError, match="square"):
        hermitian_eigenvalues(np.zeros((2, 3)))
    with pytest.raises(ValidationError, match="Hermitian"):
        hermitian_eigenvalues(np.array([[0, 1], [0, 0]], dtype=complex))


def test_batched_eigenvalues_match_loop():
    m = ginibre_states(5, 50, 4)
    batch = eigvalsh_batch(m)
    for k in range(50):
        np.testing.assert_allclose(batch[k], np.sort(np.linalg.eigvalsh(m[k]))[::-1], atol=1e-14)


def test_psd_sqrt_squares_back():
    m = ginibre_states(6, 30, 4, rank=2)
    r = psd_sqrt_batch(m)
    assert np.max(np.abs(r @ r - m)) < 1e-12
    assert np.max(np.abs(r - np.conj(np.swapaxes(r, 1, 2)))) < 1e-14


# --- DensityMatrix ------------------------------------------------------------

def test_density_matrix_invariants():
    rho = DensityMatrix((2, 2), ginibre_states(1, 1, 4)[0])
    assert not rho.matrix.flags.writeable
    assert rho.dim == 4
    assert abs(np.sum(rho.eigenvalues()) - 1) < 1e-12
    with pytest.raises(ValidationError, match="unit trace"):
        DensityMatrix((2,), np.eye(2))
    with pytest.raises(ValidationError, match="Hermitian"):
        DensityMatrix((2,), np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(NotAStateError) as info:
        DensityMatrix((2,), np.diag([1.5, -0.5]))
    assert info.value.min_eigenvalue == pytest.approx(-0.5)
    with pytest.raises(ValidationError):
        DensityMatrix((2, 3), np.eye(4) / 4)
    with pytest.raises(UnsupportedConfigurationError):
        DensityMatrix((65,), np.eye(65) / 65)


def test_psd_tolerance_band():
    DensityMatrix((2,), np.diag([1 + 5e-11, -5e-11]))
    with pytest.raises(NotAStateError):
        DensityMatrix((2,), np.diag([1 + 5e-10, -5e-10]))


def test_from_ket_requires_normalisation():
    with pytest.raises(ValidationError, match="normalized"):
        DensityMatrix.from_ket(np.array([1.0, 1.0]), (2,))
    assert DensityMatrix.from_ket(np.array([1.0, 0.0]), (2,)).purity() == pytest.approx(1.0)


# --- partial trace / transpose -------------------------------------------------

def loop_partial_trace_bipartite(m, da, db, keep):
    out = np.zeros((da, da) if keep == 0 else (db, db), dtype=complex)
    for i in range(da):
        for j in range(da):
            for k in range(db):
                for l in range(db):
                    v = m[i * db + k, j * db + l]
                    if keep == 0 and k == l:
                        out[i, j] += v
                    if keep == 1 and i == j:
                        out[k, l] += v
    return out


def loop_partial_transpose_second(m, da, db):
    out = np.zeros_like(m)
    for i in range(da):
        for j in range(da):
            for k in range(db):
                for l in range(db):
                    out[i * db + k, j * db + l] = m[i * db + l, j * db + k]
    return out


@pytest.mark.parametrize("da,db", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_partial_trace_matches_loops(da, db):
    m = ginibre_states(da * 10 + db, 4, da * db)
    for rho in m:
        for keep in (0, 1):
            ours = partial_trace_array(rho, (da, db), [keep])
            np.testing.assert_allclose(ours, loop_partial_trace_bipartite(rho, da, db, keep), atol=1e-15)


@pytest.mark.parametrize("da,db", [(2, 2), (2, 3), (3, 3)])
def test_partial_transpose_matches_loops(da, db):
    for rho in ginibre_states(7, 4, da * db):
        ours = partial_transpose_array(rho, (da, db), 1)
        np.testing.assert_allclose(ours, loop_partial_transpose_second(rho, da, db), atol=0)


def test_partial_trace_of_product_and_tripartite():
    a = DensityMatrix((2,), ginibre_states(1, 1, 2)[0])
    b = DensityMatrix((3,), ginibre_states(2, 1, 3)[0])
    c = DensityMatrix((2,), ginibre_states(3, 1, 2)[0])
    abc = tensor(a, b, c)
    assert abc.dims == (2, 3, 2)
    np.testing.assert_allclose(partial_trace(abc, [1]).matrix, b.matrix, atol=1e-14)
    np.testing.assert_allclose(partial_trace(abc, [0, 2]).matrix, kron_all(a.matrix, c.matrix), atol=1e-14)
    with pytest.raises(ValueError):
        partial_trace(abc, [])
    with pytest.raises(ValueError):
        partial_trace(abc, [0, 1, 2])


def test_partial_transpose_subsystem_range():
    rho = maximally_mixed((2, 2))
    with pytest.raises(ValueError):
        partial_transpose(rho, 2)


def test_partial_transpose_of_bell_state():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    pt = partial_transpose(DensityMatrix.from_ket(psi, (2, 2)), 1)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(pt)), [-0.5, 0.5, 0.5, 0.5], atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), da=st.integers(2, 4), db=st.integers(2, 4))
def test_partial_trace_preserves_trace_and_hermiticity(seed, da, db):
    rho = DensityMatrix((da, db), ginibre_states(seed, 1, da * db)[0])
    for keep in ([0], [1]):
        red = partial_trace(rho, keep)
        assert abs(np.trace(red.matrix) - 1) < 1e-12
        assert np.max(np.abs(red.matrix - red.matrix.conj().T)) <= 1e-15


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_partial_transpose_is_involution_and_keeps_trace(seed):
    rho = ginibre_states(seed, 1, 6)[0]
    pt = partial_transpose_array(rho, (2, 3), 0)
    assert abs(np.trace(pt) - 1) < 1e-12
    np.testing.assert_allclose(partial_transpose_array(pt, (2, 3), 0), rho, atol=0)


# --- randomness ---------------------------------------------------------------

def test_seeded_rng_is_deterministic():
    assert np.array_equal(seeded_rng(42).random(5), seeded_rng(42).random(5))
    assert not np.array_equal(seeded_rng(42).random(5), seeded_rng(43).random(5))
    with pytest.raises(ValueError):
        seeded_rng(-1)


def test_split_seed_distinct_and_stable():
    seeds = [split_seed(99, w) for w in range(100)]
    assert len(set(seeds)) == 100
    assert seeds == [split_seed(99, w) for w in range(100)]
    assert all(0 <= s < 2**64 for s in seeds)
    # XOR rule: (master, worker) pairs with equal XOR share a stream
    assert split_seed(5, 3) == split_seed(6, 0)


def test_ket_helper_and_kron():
    psi = random_kets(0, 1, 4)[0]
    rho = DensityMatrix.from_ket(psi, (2, 2))
    assert rho.purity() == pytest.approx(1.0, abs=1e-12)
    assert kron_all(np.eye(2), np.eye(3)).shape == (6, 6)
