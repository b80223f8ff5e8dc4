# %% [markdown]
# # Loading MovieLens 100k
#
# Parse the raw `u.data` / `u.item` / `u.genre` files, check the counts and
# write the canonical dataset file the other notebooks and the CLI can reuse.
# Fetch the raw files first with `python tools/fetch_movielens.py data/ml-100k`.

# %%
import os
from pathlib import Path

import numpy as np

from genrebayes import load_movielens_dir, read_dataset, write_dataset

DATA = Path(os.environ.get("GENREBAYES_ML100K", "data/ml-100k"))
ds = load_movielens_dir(DATA)

# %%
report = ds.validate()
print(report.summary())
print("anomalies:", report.anomalies or "none")
print("excluded (unknown genre only):", list(report.excluded_movies))

# %% [markdown]
# Ratings per user never drop below 20, and the rating distribution is skewed
# towards 3 and 4.

# %%
per_user = ds.events.ratings_per_user()
print("ratings/user min, median, max:", per_user.min(), int(np.median(per_user)), per_user.max())
values, counts = np.unique(ds.events.ratings, return_counts=True)
print("rating counts:", dict(zip(values.tolist(), counts.tolist())))

# %%
movies_per_genre = ds.genres.flags[ds.movies - 1].sum(axis=0)
for name, count in sorted(zip(ds.genre_names, movies_per_genre), key=lambda t: -t[1]):
    print(f"{name:12s} {count:5d}")

# %% [markdown]
# The canonical file round-trips exactly.

# %%
out = Path("out")
out.mkdir(exist_ok=True)
write_dataset(ds, out / "ml100k.dataset")
assert read_dataset(out / "ml100k.dataset") == ds
