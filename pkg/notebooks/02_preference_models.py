# %% [markdown]
# # Per-rating preference models
#
# One model per rating value r. Each genre row holds P(u|g,r), the chance
# that user u gives a movie of that genre the rating r.

# %%
import os
from pathlib import Path

import numpy as np

from genrebayes import load_movielens_dir, posterior, train_preference_model
from genrebayes.model import write_movie_likelihood_csv, write_user_prob_csv

DATA = Path(os.environ.get("GENREBAYES_ML100K", "data/ml-100k"))
ds = load_movielens_dir(DATA)
out = Path("out")
out.mkdir(exist_ok=True)

models = {r: train_preference_model(ds.indicator(r), ds.genres, ds.movies) for r in range(1, 6)}

# %%
for r, m in models.items():
    top = np.argsort(m.priors)[::-1][:3]
    print(r, ", ".join(f"{m.genre_names[g]} {m.priors[g]:.3f}" for g in top))

# %% [markdown]
# Users who most reliably give Drama a 5.

# %%
m5 = models[5]
drama = m5.genre_names.index("Drama")
best = np.argsort(m5.user_prob[drama])[::-1][:5]
print([(int(u) + 1, round(float(m5.user_prob[drama, u]), 4)) for u in best])

# %% [markdown]
# Tables behind the user-preference and movie-likelihood heatmaps.
# Movie likelihoods are written as logs; raw products underflow.

# %%
write_user_prob_csv(m5, out / "user_prob_r5.csv")
write_movie_likelihood_csv(m5, ds.indicator(5), ds.movies[:50], out / "movie_loglik_r5.csv", log=True)

# %%
movie = 50
post = posterior(m5, ds.indicator(5).feature_vector(movie))
print(ds.genres.title(movie), "->", m5.genre_names[post.best], f"{post.probabilities[post.best]:.3f}")
print("true:", [ds.genre_names[g] for g in sorted(ds.genres.membership(movie))])
