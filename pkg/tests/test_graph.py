import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from gccha.exceptions import (
    DimensionMismatch,
    DirectedGraphUnsupported,
    DisconnectedGraph,
    DuplicateEdge,
    NegativeWeight,
    NotNormal,
    SelfLoop,
)
from gccha.graph import (
    FilterBank,
    ShiftOperator,
    adjacency,
    apply_filter_bank,
    build_graph,
    gft,
    inverse_gft,
    laplacian,
    spectral_basis,
    total_variation,
)
from oracles import dense_laplacian, random_connected_edges


def _random_basis(n, seed):
    rng = np.random.default_rng(seed)
    edges = random_connected_edges(n, rng)
    g = build_graph(edges, n)
    return g, spectral_basis(laplacian(g))


# -- build_graph ------------------------------------------------------------

def test_path_graph_p2_is_valid():
    g = build_graph([(0, 1, 1.0)], 2)
    assert g.node_count == 2
    np.testing.assert_array_equal(g.weights, [[0, 1], [1, 0]])


def test_isolated_node_is_disconnected():
    with pytest.raises(DisconnectedGraph):
        build_graph([(0, 1, 1), (1, 2, 1)], 4)


def test_self_loop_rejected():
    with pytest.raises(SelfLoop):
        build_graph([(0, 0, 1)], 1)


def test_negative_weight_rejected():
    with pytest.raises(NegativeWeight):
        build_graph([(0, 1, -0.5)], 2)


def test_duplicate_edge_rejected_in_either_orientation():
    with pytest.raises(DuplicateEdge):
        build_graph([(0, 1, 1), (1, 0, 2)], 2)
    # a directed graph may carry both orientations
    g = build_graph([(0, 1, 1), (1, 0, 2)], 2, directed=True)
    assert g.weights[1, 0] == 2


def test_zero_weight_edge_does_not_connect():
    with pytest.raises(DisconnectedGraph):
        build_graph([(0, 1, 0.0)], 2)


def test_validation_errors_are_value_errors():
    with pytest.raises(ValueError):
        build_graph([(0, 5, 1)], 2)


# -- laplacian ----------------------------------------------------------------

def test_laplacian_p2():
    np.testing.assert_array_equal(laplacian(build_graph([(0, 1, 1)], 2)).matrix, [[1, -1], [-1, 1]])


def test_laplacian_weighted_p2():
    np.testing.assert_array_equal(laplacian(build_graph([(0, 1, 3)], 2)).matrix, [[3, -3], [-3, 3]])


def test_laplacian_triangle():
    g = build_graph([(0, 1, 1), (1, 2, 1), (0, 2, 1)], 3)
    expected = np.diag([2.0, 2, 2]) - (np.ones((3, 3)) - np.eye(3))
    np.testing.assert_array_equal(laplacian(g).matrix, expected)


def test_laplacian_rejects_directed():
    g = build_graph([(0, 1, 1), (1, 2, 1), (2, 0, 1)], 3, directed=True)
    with pytest.raises(DirectedGraphUnsupported):
        laplacian(g)


def test_laplacian_matches_dense_oracle():
    rng = np.random.default_rng(3)
    edges = random_connected_edges(9, rng)
    s = laplacian(build_graph(edges, 9)).matrix
    np.testing.assert_allclose(s, dense_laplacian(edges, 9), atol=0)
    np.testing.assert_allclose(s.sum(axis=1), 0, atol=1e-12)
    assert np.linalg.eigvalsh(s).min() > -1e-12


# -- spectral_basis -------------------------------------------------------------

def test_p2_basis_closed_form():
    b = spectral_basis(laplacian(build_graph([(0, 1, 1)], 2)))
    np.testing.assert_allclose(b.eigenvalues, [0, 2], atol=1e-14)
    np.testing.assert_allclose(b.eigenvectors[:, 0], [1 / np.sqrt(2)] * 2, atol=1e-14)
    np.testing.assert_allclose(b.eigenvectors[:, 1], [1 / np.sqrt(2), -1 / np.sqrt(2)], atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_connected_laplacian_first_mode_is_constant(seed):
    _, b = _random_basis(7 + seed, seed)
    assert abs(b.eigenvalues[0]) < 1e-10
    v1 = b.eigenvectors[:, 0]
    np.testing.assert_allclose(v1, np.full(b.n, 1 / np.sqrt(b.n)), atol=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_random_basis_diagonalizes_and_matches_dense_oracle(seed):
    g, b = _random_basis(8, 100 + seed)
    s = laplacian(g).matrix
    v = b.eigenvectors
    d = v.conj().T @ s @ v
    off = d - np.diag(np.diag(d))
    assert np.abs(off).max() < 1e-8
    np.testing.assert_allclose(v.conj().T @ v, np.eye(8), atol=1e-10)
    np.testing.assert_allclose(b.eigenvalues, scipy.linalg.eigvalsh(s), atol=1e-10)
    resid = np.linalg.norm(s @ v - v * b.eigenvalues, axis=0).max()
    assert resid <= 1e-8 * np.linalg.norm(s)
    assert np.all(np.diff(b.frequency_keys) >= 0)


def test_phase_convention_largest_entry_real_positive():
    _, b = _random_basis(10, 7)
    for col in b.eigenvectors.T:
        k = np.argmax(np.abs(col))
        assert col[k] > 0


def test_basis_is_deterministic():
    g, b1 = _random_basis(12, 11)
    b2 = spectral_basis(laplacian(g))
    np.testing.assert_array_equal(b1.eigenvectors, b2.eigenvectors)
    np.testing.assert_array_equal(b1.eigenvalues, b2.eigenvalues)


def test_degenerate_cluster_is_lexicographic():
    # K4 has eigenvalue 4 with multiplicity 3
    edges = [(i, j, 1.0) for i in range(4) for j in range(i + 1, 4)]
    b = spectral_basis(laplacian(build_graph(edges, 4)))
    np.testing.assert_allclose(b.eigenvalues, [0, 4, 4, 4], atol=1e-12)
    cols = [tuple(np.round(b.eigenvectors[:, k], 10)) for k in range(1, 4)]
    assert cols == sorted(cols)


def test_adjacency_ordered_by_distance_from_one():
    rng = np.random.default_rng(5)
    g = build_graph(random_connected_edges(7, rng), 7)
    b = spectral_basis(adjacency(g))
    keys = np.abs(1 - b.eigenvalues)
    np.testing.assert_allclose(b.frequency_keys, keys)
    assert np.all(np.diff(keys) >= -1e-12)


def test_custom_normal_directed_cycle():
    n = 6
    s = np.roll(np.eye(n), 1, axis=1)  # directed cycle: unitary, normal, not Hermitian
    b = spectral_basis(ShiftOperator(s, "custom-normal"))
    v = b.eigenvectors
    np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-10)
    np.testing.assert_allclose(s @ v, v * b.eigenvalues, atol=1e-10)
    np.testing.assert_allclose(np.abs(b.eigenvalues), 1, atol=1e-12)
    assert np.all(np.diff(b.frequency_keys) >= -1e-12)
    assert abs(b.eigenvalues[0] - 1) < 1e-12


def test_user_order_key():
    g, _ = _random_basis(6, 1)
    b = spectral_basis(laplacian(g), order_key=lambda lam: np.max(lam.real) - lam.real)
    assert np.all(np.diff(b.eigenvalues) <= 1e-12)


def test_not_normal_rejected():
    with pytest.raises(NotNormal):
        ShiftOperator(np.array([[0.0, 1.0], [0.0, 0.0]]))


# -- total variation ------------------------------------------------------------

def test_total_variation_of_modes_equals_eigenvalues():
    g, b = _random_basis(9, 2)
    s = laplacian(g)
    tv = [total_variation(b.eigenvectors[:, k], s) for k in range(b.n)]
    np.testing.assert_allclose(tv, b.eigenvalues, atol=1e-10)
    assert np.all(np.diff(tv) >= -1e-10)


def test_total_variation_constant_is_zero():
    g, _ = _random_basis(9, 4)
    assert abs(total_variation(np.full(9, 3.0), laplacian(g))) < 1e-12


def test_total_variation_p2():
    s = laplacian(build_graph([(0, 1, 1)], 2))
    x = np.array([1.0, -1.0])
    assert total_variation(x, s) == pytest.approx(4.0)
    assert total_variation(x, s) == pytest.approx(x @ s.matrix @ x)


def test_dirichlet_form_for_other_operators():
    rng = np.random.default_rng(0)
    g = build_graph(random_connected_edges(5, rng), 5)
    a = adjacency(g)
    x = rng.standard_normal(5)
    for p in (1, 2, 3):
        ref = np.sum(np.abs(x - a.matrix @ x) ** p) / p
        assert total_variation(x, a, p) == pytest.approx(ref)


def test_total_variation_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        total_variation(np.ones(3), laplacian(build_graph([(0, 1, 1)], 2)))


# -- GFT ------------------------------------------------------------------------------

def test_gft_of_constant_on_p2():
    b = spectral_basis(laplacian(build_graph([(0, 1, 1)], 2)))
    np.testing.assert_allclose(gft(np.array([2.5, 2.5]), b), [2.5 * np.sqrt(2), 0], atol=1e-14)


def test_gft_of_mode_is_unit_vector():
    _, b = _random_basis(8, 9)
    for k in range(8):
        np.testing.assert_allclose(gft(b.eigenvectors[:, k], b), np.eye(8)[k], atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gft_round_trip_and_parseval(seed):
    rng = np.random.default_rng(seed)
    _, b = _random_basis(8, 0)
    x = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    c = gft(x, b)
    assert abs(np.linalg.norm(c) - np.linalg.norm(x)) <= 1e-10 * np.linalg.norm(x)
    np.testing.assert_allclose(inverse_gft(c, b), x, atol=1e-10)


def test_gft_dimension_mismatch():
    _, b = _random_basis(5, 0)
    with pytest.raises(DimensionMismatch):
        gft(np.ones(4), b)


# -- filter banks ------------------------------------------------------------

def test_identity_bank_is_identity():
    _, b = _random_basis(7, 3)
    x = np.random.default_rng(1).standard_normal((7, 3))
    np.testing.assert_allclose(apply_filter_bank(FilterBank.identity(7, 3), x, b), x, atol=1e-10)


def test_lowpass_indicator_keeps_constant():
    _, b = _random_basis(7, 3)
    resp = np.zeros((7, 1, 1))
    resp[0] = 1.0
    x = np.full((7, 1), 1.7)
    np.testing.assert_allclose(apply_filter_bank(FilterBank(resp), x, b), x, atol=1e-10)


def test_summing_bank_is_linear():
    _, b = _random_basis(7, 3)
    x = np.random.default_rng(2).standard_normal((7, 2))
    out = apply_filter_bank(FilterBank(np.ones((7, 1, 2))), x, b)
    np.testing.assert_allclose(out[:, 0], x[:, 0] + x[:, 1], atol=1e-10)


def test_bank_matches_node_domain_filter():
    # V diag(h) V^H acting on each channel, summed with the bank weights
    rng = np.random.default_rng(4)
    _, b = _random_basis(6, 8)
    resp = rng.standard_normal((6, 2, 3)) + 1j * rng.standard_normal((6, 2, 3))
    x = rng.standard_normal((6, 3))
    v = b.eigenvectors
    ref = np.zeros((6, 2), dtype=complex)
    for i in range(2):
        for j in range(3):
            ref[:, i] += v @ np.diag(resp[:, i, j]) @ v.conj().T @ x[:, j]
    np.testing.assert_allclose(apply_filter_bank(FilterBank(resp), x, b), ref, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
def test_filter_composition(seed, d_in, d_mid, d_out):
    rng = np.random.default_rng(seed)
    _, b = _random_basis(6, 5)
    inner = FilterBank(rng.standard_normal((6, d_mid, d_in)) + 1j * rng.standard_normal((6, d_mid, d_in)))
    outer = FilterBank(rng.standard_normal((6, d_out, d_mid)))
    x = rng.standard_normal((6, d_in, 2))
    two_step = apply_filter_bank(outer, apply_filter_bank(inner, x, b), b)
    np.testing.assert_allclose(apply_filter_bank(outer.compose(inner), x, b), two_step, atol=1e-10)


def test_filter_dimension_mismatch():
    _, b = _random_basis(5, 0)
    with pytest.raises(DimensionMismatch):
        apply_filter_bank(FilterBank.identity(5, 2), np.ones((5, 3)), b)
