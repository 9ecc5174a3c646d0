import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptive_consensus.errors import (
    DuplicateEdgeError,
    NodeRangeError,
    PreconditionError,
    SelfLoopError,
)
from adaptive_consensus.graph import (
    build_graph,
    complete_graph,
    is_connected,
    laplacian_spectrum,
    lemma1_certificate,
    line_graph,
    random_connected_graph,
)

# Eigenvalues from the exact characteristic polynomials (sympy):
# line:     l^3 - 4 l^2 + 3 l               -> 0, 1, 3
# complete: roots of l (l - 3)^2            -> 0, 3, 3
# L + diag(5, 5, 0) on the line: l^3 - 14 l^2 + 53 l - 35, smallest root:
LINE3_K550_LAMBDA_MIN = 0.832604450242011612063927961990


def test_line_laplacian(line3):
    np.testing.assert_array_equal(line3.laplacian, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
    np.testing.assert_array_equal(line3.degree, [1, 2, 1])


def test_single_node():
    g = build_graph(1, [])
    np.testing.assert_array_equal(g.laplacian, [[0]])
    assert is_connected(g)
    np.testing.assert_array_equal(laplacian_spectrum(g), [0.0])


@pytest.mark.parametrize("edges, err", [
    ([(1, 1)], SelfLoopError),
    ([(1, 2), (2, 1)], DuplicateEdgeError),
    ([(1, 2), (1, 2)], DuplicateEdgeError),
    ([(1, 4)], NodeRangeError),
    ([(0, 1)], NodeRangeError),
])
def test_invalid_edges(edges, err):
    with pytest.raises(err):
        build_graph(3, edges)


def test_graph_views_are_immutable(line3):
    with pytest.raises(ValueError):
        line3.laplacian[0, 0] = 5


@pytest.mark.parametrize("n, edges, expected", [
    (3, [(1, 2), (2, 3)], True),
    (2, [], False),
    (4, [(1, 2), (3, 4)], False),
])
def test_is_connected(n, edges, expected):
    assert is_connected(build_graph(n, edges)) is expected


@pytest.mark.parametrize("g, expected", [
    (line_graph(3), [0.0, 1.0, 3.0]),
    (complete_graph(3), [0.0, 3.0, 3.0]),
])
def test_spectrum_known(g, expected):
    lam = laplacian_spectrum(g)
    np.testing.assert_allclose(lam, expected, atol=1e-12)
    assert lam[0] == 0.0


def _all_graphs(n):
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    for mask in range(1 << len(pairs)):
        yield build_graph(n, [p for b, p in enumerate(pairs) if mask >> b & 1])


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_exhaustive_small_graphs(n):
    for g in _all_graphs(n):
        L = g.laplacian
        assert np.array_equal(L, L.T)
        assert not np.any(L @ np.ones(n, dtype=np.int64))
        off = L[~np.eye(n, dtype=bool)]
        assert set(np.unique(off)) <= {0, -1}
        np.testing.assert_array_equal(np.diag(L), g.degree)
        lam = laplacian_spectrum(g)
        assert np.all(np.diff(lam) >= -1e-12)
        assert abs(lam[0]) <= 1e-10
        connected = n == 1 or lam[1] > 1e-8
        assert connected == is_connected(g)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 64), st.integers(0, 2**32 - 1), st.floats(0.0, 0.6))
def test_random_connected_generator(n, seed, p):
    g = random_connected_graph(n, np.random.default_rng(seed), p)
    assert is_connected(g)
    assert laplacian_spectrum(g)[1] > 1e-8
    assert not np.any(g.laplacian @ np.ones(n, dtype=np.int64))


def test_directed_edges_grouped_by_source(line3):
    assert line3.directed_edges == ((1, 2), (2, 1), (2, 3), (3, 2))


def test_certificate_default_gains(line3):
    lam, ok = lemma1_certificate(line3, [5, 5, 0])
    assert ok
    assert lam == pytest.approx(LINE3_K550_LAMBDA_MIN, abs=1e-12)


def test_certificate_zero_gains(line3):
    with pytest.raises(PreconditionError):
        lemma1_certificate(line3, [0, 0, 0])


def test_certificate_disconnected():
    with pytest.raises(PreconditionError):
        lemma1_certificate(build_graph(4, [(1, 2), (3, 4)]), [1, 1, 1, 1])


def test_certificate_single_unit_gain_random(rng):
    for _ in range(50):
        g = random_connected_graph(6, rng)
        k = np.zeros(6)
        k[0] = 1.0
        lam, ok = lemma1_certificate(g, k)
        oracle = min(np.linalg.eigvals(g.laplacian + np.diag(k)).real)
        assert ok and lam == pytest.approx(oracle, abs=1e-10)


def test_rayleigh_expansion_at_minimizer(rng):
    # x'(L + K1)x = sum over edges (x_i - x_j)^2 + phi x_i^2 for the minimising eigenvector
    for _ in range(200):
        n = int(rng.integers(2, 9))
        g = random_connected_graph(n, rng)
        node = int(rng.integers(0, n))
        phi = float(rng.uniform(0.1, 5))
        k1 = np.zeros(n)
        k1[node] = phi
        lam, vec = np.linalg.eigh(g.laplacian + np.diag(k1))
        x = vec[:, 0]
        expansion = sum((x[i - 1] - x[j - 1]) ** 2 for i, j in g.edges) + phi * x[node] ** 2
        assert expansion == pytest.approx(lam[0], abs=1e-8)
        assert lam[0] > 0
