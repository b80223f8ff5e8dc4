# %% [markdown]
# # Learning curves
#
# Exact and with-similar accuracy against training fraction, 20 random splits
# per point with a 20% test set. Takes a few seconds per prior mode.

# %%
import os
from pathlib import Path

from genrebayes import EvalOptions, learning_curve, load_movielens_dir

DATA = Path(os.environ.get("GENREBAYES_ML100K", "data/ml-100k"))
ds = load_movielens_dir(DATA)

reports = {mode: learning_curve(ds, seed=0, options=EvalOptions(prior_mode=mode), jobs=4)
           for mode in ("empirical", "uniform")}

# %%
for mode, rep in reports.items():
    print(mode)
    for r in range(1, 6):
        c = rep.cell(r, 0.8)
        print(f"  r={r}  exact {100 * c.exact_mean:.1f}+-{100 * c.exact_std:.1f}"
              f"  similar {100 * c.similar_mean:.1f}+-{100 * c.similar_std:.1f}")

# %%
Path("out").mkdir(exist_ok=True)
for mode, rep in reports.items():
    rep.to_csv(f"out/learning_curve_{mode}.csv")

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    rep = reports["empirical"]
    fig, axes = plt.subplots(1, 5, figsize=(18, 3.5), sharey=True)
    for ax, r in zip(axes, range(1, 6)):
        cells = [c for c in rep.cells if c.rating == r]
        f = [c.train_fraction for c in cells]
        ax.plot(f, [c.exact_mean for c in cells], "o-", label="exact")
        ax.plot(f, [c.similar_mean for c in cells], "s--", label="with similar")
        ax.set_title(f"rating {r}")
        ax.set_xlabel("training fraction")
    axes[0].set_ylabel("accuracy")
    axes[0].legend()
    fig.tight_layout()
    fig.savefig("out/learning_curves.png")
