import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genrebayes.correlation import GenreCorrelationMatrix, compute_correlation, is_similar
from genrebayes.errors import ContractError

import oracle
from conftest import make_dataset


def assert_valid(c: GenreCorrelationMatrix):
    v = c.values
    both = ~np.isnan(v)
    assert np.array_equal(both, both.T)
    assert np.array_equal(v[both], v.T[both])
    finite = v[both]
    assert np.all((finite >= -1) & (finite <= 1))
    for i in range(c.size):
        if not np.isnan(v[i, i]):
            assert v[i, i] == 1.0


class TestComputeCorrelation:
    def test_t1_pair(self, t1):
        c = compute_correlation(t1.genres, [1, 2, 3])
        assert math.isclose(c[0, 1], -0.5, abs_tol=1e-15)
        assert c[0, 0] == c[1, 1] == 1.0
        assert math.isclose(oracle.pearson([1, 0, 1], [0, 1, 1]), -0.5, abs_tol=1e-15)

    def test_identical_columns(self):
        ds = make_dataset(2, ("A", "B", "C"), [{0, 1}, {2}, {0, 1, 2}], [])
        assert compute_correlation(ds.genres)[0, 1] == 1.0

    def test_zero_variance_is_undefined(self):
        ds = make_dataset(2, ("A", "B", "C"), [{0}, {0, 1}], [])
        c = compute_correlation(ds.genres)
        assert np.isnan(c[2]).all() and np.isnan(c[:, 2]).all()
        assert np.isnan(c[0, 0])  # A is in every movie
        assert c[1, 1] == 1.0

    def test_empty_subset(self, t1):
        with pytest.raises(ContractError):
            compute_correlation(t1.genres, [])

    def test_weights_mode(self, t1):
        c = compute_correlation(t1.genres, [1, 2, 3], mode="weights")
        expected = oracle.pearson([1, 0, 0.5], [0, 1, 0.5])
        assert math.isclose(c[0, 1], expected, abs_tol=1e-15)

    def test_csv(self, t1, tmp_path):
        c = compute_correlation(t1.genres, [1, 2, 3])
        c.to_csv(tmp_path / "c.csv", ["x"])
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines[:2] == ["# x", "genre,A,B"]
        assert lines[2] == "A,1.0,-0.5"


@st.composite
def memberships(draw):
    n_movies = draw(st.integers(1, 12))
    n_genres = draw(st.integers(1, 6))
    sets = [
        draw(st.sets(st.integers(0, n_genres - 1), min_size=1, max_size=n_genres))
        for _ in range(n_movies)
    ]
    return n_genres, sets


@settings(max_examples=150, deadline=None)
@given(memberships(), st.randoms(use_true_random=False))
def test_matches_definition_and_is_order_free(case, rnd):
    n_genres, sets = case
    names = tuple(f"g{i}" for i in range(n_genres))
    ds = make_dataset(2, names, sets, [])
    c = compute_correlation(ds.genres)
    assert_valid(c)
    cols = [[1 if g in s else 0 for s in sets] for g in range(n_genres)]
    for i in range(n_genres):
        for j in range(n_genres):
            want = oracle.pearson(cols[i], cols[j])
            if math.isnan(want):
                assert math.isnan(c[i, j])
            else:
                assert abs(c[i, j] - want) <= 1e-12
    order = list(range(len(sets)))
    rnd.shuffle(order)
    shuffled = make_dataset(2, names, [sets[k] for k in order], [])
    np.testing.assert_array_equal(compute_correlation(shuffled.genres).values, c.values)


class TestIsSimilar:
    def matrix(self, value):
        return GenreCorrelationMatrix(np.array([[1.0, value], [value, 1.0]]), ("P", "T"))

    def test_above_threshold(self):
        assert is_similar(self.matrix(0.25), 0, {1}, 0.1)

    def test_threshold_is_strict(self):
        assert not is_similar(self.matrix(0.1), 0, {1}, 0.1)

    def test_undefined_entry(self):
        assert not is_similar(self.matrix(float("nan")), 0, {1}, 0.1)

    def test_max_over_true_set(self):
        v = np.array([[1, -0.3, 0.4], [-0.3, 1, 0], [0.4, 0, 1]])
        c = GenreCorrelationMatrix(v, ("a", "b", "c"))
        assert is_similar(c, 0, {1, 2})
        assert not is_similar(c, 0, {1})

    def test_unknown_genre(self):
        with pytest.raises(KeyError):
            is_similar(self.matrix(0.5), 5, {1})
        with pytest.raises(KeyError):
            is_similar(self.matrix(0.5), 0, {7})

    def test_infinite_threshold_never_fires(self):
        assert not is_similar(self.matrix(0.99), 0, {1}, float("inf"))


@pytest.mark.movielens
def test_movielens_matrix_matches_brute_force(movielens):
    c = compute_correlation(movielens.genres)
    assert c.size == 18
    assert_valid(c)
    assert not np.isnan(c.values).any()
    flags = movielens.genres.flags[movielens.movies - 1].astype(int)
    cols = [flags[:, g].tolist() for g in range(18)]
    for i in range(18):
        for j in range(18):
            assert abs(c[i, j] - oracle.pearson(cols[i], cols[j])) <= 1e-12
