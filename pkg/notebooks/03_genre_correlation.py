# %% [markdown]
# # Genre correlation
#
# Pearson correlation between genre membership columns. A wrong prediction is
# still acceptable when it correlates with one of the true genres above 0.1.

# %%
import os
from pathlib import Path


from genrebayes import compute_correlation, is_similar, load_movielens_dir

DATA = Path(os.environ.get("GENREBAYES_ML100K", "data/ml-100k"))
ds = load_movielens_dir(DATA)
corr = compute_correlation(ds.genres)

# %%
names = ds.genre_names
pairs = [(corr[i, j], names[i], names[j]) for i in range(len(names)) for j in range(i + 1, len(names))]
for c, a, b in sorted(pairs, reverse=True)[:8]:
    print(f"{a:12s} {b:12s} {c:+.3f}")
print("pairs above 0.1:", sum(c > 0.1 for c, _, _ in pairs), "of", len(pairs))

# %%
g = names.index
print(is_similar(corr, g("Thriller"), [g("Crime")]), is_similar(corr, g("Drama"), [g("Action")]))

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(7, 6))
    im = ax.imshow(corr.values, cmap="RdBu_r", vmin=-1, vmax=1)
    ax.set_xticks(range(len(names)), names, rotation=90)
    ax.set_yticks(range(len(names)), names)
    fig.colorbar(im)
    fig.tight_layout()
    Path("out").mkdir(exist_ok=True)
    fig.savefig("out/genre_correlation.png")
