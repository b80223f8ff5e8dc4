import os
from pathlib import Path

import numpy as np
import pytest

from genrebayes.dataset import Dataset, GenreAssignment, RatingEvents

ROOT = Path(__file__).resolve().parents[1]


def movielens_dir():
    env = os.environ.get("GENREBAYES_ML100K")
    return Path(env) if env else ROOT / "data" / "ml-100k"


def make_dataset(num_users, genre_names, movie_genres, ratings):
    """Small in-memory dataset.

    ``movie_genres[i]`` is the genre-index set of movie ``i + 1``;
    ``ratings`` holds ``(user, movie, rating)`` triples.
    """
    flags = np.zeros((len(movie_genres), len(genre_names)), dtype=bool)
    for i, gs in enumerate(movie_genres):
        flags[i, sorted(gs)] = True
    n = len(movie_genres)
    genres = GenreAssignment(
        genre_names,
        flags,
        np.zeros(n, dtype=bool),
        np.ones(n, dtype=bool),
        tuple((f"movie {i + 1}",) for i in range(n)),
    )
    users = [u for u, _, _ in ratings]
    movies = [m for _, m, _ in ratings]
    values = [r for _, _, r in ratings]
    events = RatingEvents(users, movies, values, list(range(len(ratings))), num_users, n)
    return Dataset(events, genres)


# T1: users u1..u3, genres A=0 and B=1, all ratings at r=3.
#   m1 {A} rated by u1, u2;  m2 {B} rated by u3;  m3 {A, B} rated by u1.
# m4 {A} rated by u1 is an extra held-out movie for evaluation tests.
T1_RATING = 3
T1_GENRE_SETS = {1: {0}, 2: {1}, 3: {0, 1}, 4: {0}}
T1_RATED = {1: {1, 2}, 2: {3}, 3: {1}, 4: {1}}


@pytest.fixture
def t1():
    ratings = [(u, m, T1_RATING) for m, us in T1_RATED.items() for u in sorted(us)]
    return make_dataset(3, ("A", "B"), [T1_GENRE_SETS[m] for m in (1, 2, 3, 4)], ratings)


def random_micro(rng, max_users=5, max_movies=6, max_genres=3):
    """Random tiny dataset plus the plain-python description the oracle consumes."""
    num_users = int(rng.integers(2, max_users + 1))
    num_movies = int(rng.integers(1, max_movies + 1))
    num_genres = int(rng.integers(1, max_genres + 1))
    genre_sets = {}
    rated = {}
    ratings = []
    for m in range(1, num_movies + 1):
        k = int(rng.integers(1, num_genres + 1))
        genre_sets[m] = set(rng.choice(num_genres, size=k, replace=False).tolist())
        rated[m] = set()
        for u in range(1, num_users + 1):
            if rng.random() < 0.5:
                r = int(rng.integers(1, 6))
                ratings.append((u, m, r))
    names = tuple("ABCDEFGHIJKLMNOPQR"[:num_genres])
    ds = make_dataset(num_users, names, [genre_sets[m] for m in range(1, num_movies + 1)], ratings)
    return ds, genre_sets, ratings


@pytest.fixture(scope="session")
def movielens():
    from genrebayes.dataset import load_movielens_dir

    d = movielens_dir()
    if not (d / "u.data").exists():
        pytest.skip(f"MovieLens 100k not found in {d}; run tools/fetch_movielens.py")
    return load_movielens_dir(d)


# One verdict line per acceptance criterion, repeated at the end of the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
