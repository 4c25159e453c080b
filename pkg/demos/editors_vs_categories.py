"""
Editors vs. categories as features
==================================

Synthetic world with two latent clusters of entities.  Editors mostly
stay within one cluster; categories are assigned at random.  Users like
one cluster each.  The same EASE pipeline is fit on both feature sources.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from wikiease import ease, evaluation
from wikiease.synthetic import make_world

world = make_world(seed=7)
plan = evaluation.make_split(world.interactions, 5, 0.8, seed=7)
cutoffs = [5, 10, 20, 50]

# %%
reports = {
    "editors": evaluation.evaluate_model(plan, ease.fit(world.editors, 100.0), cutoffs),
    "categories": evaluation.evaluate_model(plan, ease.fit(world.categories, 100.0), cutoffs),
    "popularity": evaluation.evaluate_popularity(plan, 200, cutoffs),
}
for name, rep in reports.items():
    print(name, [round(rep.mean["recall", r], 3) for r in cutoffs])

# %%
# Block structure of the editor-based weights, entities ordered by cluster.
order = np.argsort(world.entity_cluster, kind="stable")
b = ease.fit(world.editors, 100.0).weights[np.ix_(order, order)]
fig, axes = plt.subplots(1, 2, figsize=(10, 4))
axes[0].imshow(b, cmap="RdBu_r", vmin=-np.abs(b).max(), vmax=np.abs(b).max())
axes[0].set_title("editor weights")
for name, rep in reports.items():
    axes[1].errorbar(cutoffs, [rep.mean["recall", r] for r in cutoffs],
                     yerr=[rep.std["recall", r] for r in cutoffs], label=name, capsize=3)
axes[1].set_xlabel("R")
axes[1].set_ylabel("Recall@R")
axes[1].legend()
fig.tight_layout()
fig.savefig("editors_vs_categories.png", dpi=100)
