"""
User-fold top-R evaluation
==========================

Split users into five folds, hold out 20% of each user's items, and
score Recall@R / nDCG@R of the EASE recommender against a popularity
ranking.
"""

from wikiease import ease, evaluation
from wikiease.synthetic import make_world

world = make_world(n_entities=120, n_editors=200, n_users=300, items_per_user=15, seed=1)

# %%
plan = evaluation.make_split(world.interactions, n_folds=5, history_fraction=0.8, seed=42)
user = plan.fold_users(0)[0]
history, answer = plan.parts[user]
print(user, "history:", sorted(history), "answer:", sorted(answer))
print("users per fold:", [len(plan.fold_users(f)) for f in range(5)])

# %%
# One model per lambda on the full feature matrix; the split only decides
# who is evaluated on what.
cutoffs = [5, 10, 20]
reports = evaluation.evaluate(world.editors, world.interactions, [1.0, 10.0, 100.0], cutoffs, seed=42)
reports["popularity"] = evaluation.evaluate_popularity(plan, world.editors.n_entities, cutoffs)

for label, rep in reports.items():
    cells = "  ".join(f"R@{r}={rep.mean['recall', r]:.3f}±{rep.std['recall', r]:.3f}" for r in cutoffs)
    print(f"{str(label):>10}  {cells}")

# %%
# The metrics on their own.
rec = [3, 7, 9, 1]
print(evaluation.recall_at_r(rec, {7, 1}, 2), evaluation.ndcg_at_r(rec, {7, 1}, 2))
