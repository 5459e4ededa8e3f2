import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from blochbody.bloch import (
    PAULIS,
    BlochDecomposition,
    ModelPoint,
    bloch_length,
    decompose,
    decompose_batch,
    marginal_bloch_lengths,
    model_point,
    reconstruct,
)
from blochbody.families import diagonal_state
from blochbody.matcore import (
    ConsistencyError,
    DensityMatrix,
    NotAStateError,
    UnsupportedConfigurationError,
    ValidationError,
    maximally_mixed,
)

from conftest import ginibre_states, random_kets

ID = np.eye(2)


def loop_decomposition(rho):
    """Direct Tr(rho P) evaluation with explicit Kronecker products."""
    a = [np.trace(rho @ np.kron(s, ID)).real for s in PAULIS]
    b = [np.trace(rho @ np.kron(ID, s)).real for s in PAULIS]
    t = [[np.trace(rho @ np.kron(si, sj)).real for sj in PAULIS] for si in PAULIS]
    return np.array(a), np.array(b), np.array(t)


def test_decomposition_matches_direct_traces():
    for rho in ginibre_states(11, 25, 4):
        d = decompose(DensityMatrix.hermitized(rho, (2, 2)))
        a, b, t = loop_decomposition(rho)
        np.testing.assert_allclose(d.a, a, atol=1e-14)
        np.testing.assert_allclose(d.b, b, atol=1e-14)
        np.testing.assert_allclose(d.t, t, atol=1e-14)


def test_landmark_decompositions():
    phi = DensityMatrix.from_ket(np.array([1, 0, 0, 1]) / math.sqrt(2), (2, 2))
    d = decompose(phi)
    np.testing.assert_allclose(d.t, np.diag([1, -1, 1]), atol=1e-15)
    np.testing.assert_allclose(d.a, 0, atol=1e-15)
    up = DensityMatrix.from_ket(np.array([1, 0, 0, 0]), (2, 2))
    d = decompose(up)
    np.testing.assert_allclose(d.a, [0, 0, 1])
    np.testing.assert_allclose(d.b, [0, 0, 1])
    np.testing.assert_allclose(d.t, np.diag([0, 0, 1]))


def test_imaginary_residue_aborts():
    bad = np.eye(4, dtype=complex) / 4
    bad[0, 1] = 0.1j  # not Hermitian: coefficients become complex
    with pytest.raises(ConsistencyError):
        decompose_batch(bad[None])


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rank=st.integers(1, 4))
def test_round_trip(seed, rank):
    rho = DensityMatrix.hermitized(ginibre_states(seed, 1, 4, rank)[0], (2, 2))
    back = reconstruct(decompose(rho))
    assert np.max(np.abs(back.matrix - rho.matrix)) <= 1e-12


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_purity_identity(seed):
    """4 Tr rho^2 = 1 + |a|^2 + |b|^2 + |T|^2."""
    rho = DensityMatrix.hermitized(ginibre_states(seed, 1, 4)[0], (2, 2))
    d = decompose(rho)
    assert abs(4 * rho.purity() - 1 - d.total_length_squared()) < 1e-12


def test_reconstruct_rejects_non_state():
    with pytest.raises(NotAStateError):
        reconstruct(BlochDecomposition([0, 0, 1], [0, 0, 1], np.diag([0, 0, -1])))


def test_decomposition_json_round_trip():
    d = decompose(DensityMatrix.hermitized(ginibre_states(2, 1, 4)[0], (2, 2)))
    back = BlochDecomposition.from_json(d.to_json())
    assert np.array_equal(back.t, d.t)
    with pytest.raises(ValidationError):
        BlochDecomposition.from_json({"a": [0, 0], "b": [0, 0, 0], "t": [[0] * 3] * 3})
    with pytest.raises(ValidationError):
        BlochDecomposition.from_json({"a": [0, 0, 0]})


def test_bloch_length_basis_free():
    phi = DensityMatrix.from_ket(np.array([1, 0, 0, 1]) / math.sqrt(2), (2, 2))
    assert bloch_length(phi) == pytest.approx(math.sqrt(3), abs=1e-12)
    assert bloch_length(maximally_mixed((3, 3))) == pytest.approx(0.0, abs=1e-12)
    ghz = np.zeros(8)
    ghz[[0, 7]] = 1 / math.sqrt(2)
    lengths = marginal_bloch_lengths(DensityMatrix.from_ket(ghz, (2, 2, 2)))
    np.testing.assert_allclose(lengths, 0.0, atol=1e-7)


def test_marginal_lengths_unsupported_layouts():
    with pytest.raises(UnsupportedConfigurationError):
        marginal_bloch_lengths(maximally_mixed((2, 3)))
    with pytest.raises(UnsupportedConfigurationError):
        marginal_bloch_lengths(maximally_mixed((2, 2, 2, 2)))


def test_qubit_lengths_agree_with_decomposition():
    for rho in ginibre_states(4, 20, 4):
        r = DensityMatrix.hermitized(rho, (2, 2))
        p = model_point(r)
        np.testing.assert_allclose(marginal_bloch_lengths(r), [p.x, p.y], atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_pure_state_marginals_have_equal_length(seed):
    psi = random_kets(seed, 1, 4)[0]
    p = model_point(DensityMatrix.from_ket(psi, (2, 2)))
    assert abs(p.x - p.y) < 1e-10
    assert abs(p.radius() - math.sqrt(3)) < 1e-10


def test_model_point_validation():
    with pytest.raises(ValueError):
        ModelPoint(-0.1, 0, 0)
    with pytest.raises(ValueError):
        ModelPoint(0, float("nan"), 0)
    assert ModelPoint(0, 0, 1.8).z == 1.8


HULL = np.array([(1, 1, 1), (1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 0, 0)], dtype=float)


def in_hull_lp(point):
    """Feasibility of point = sum w_k v_k with w on the simplex."""
    a_eq = np.vstack([HULL.T, np.ones(len(HULL))])
    b_eq = np.append(point, 1.0)
    res = linprog(np.zeros(len(HULL)), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * len(HULL),
                  method="highs")
    return res.status == 0


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=4, max_size=4).filter(lambda v: sum(v) > 1e-3))
def test_diagonal_states_land_in_hull(weights):
    p = np.array(weights) / sum(weights)
    pt = np.array(model_point(diagonal_state(p)).as_tuple())
    assert in_hull_lp(pt)


def test_hull_oracle_rejects_outside_points():
    assert not in_hull_lp(np.array([1.0, 1.0, 0.0]))
    assert not in_hull_lp(np.array([0.0, 0.0, 1.1]))
    assert in_hull_lp(np.array([0.5, 0.5, 0.5]))
