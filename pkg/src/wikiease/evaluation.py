"""User-fold evaluation of top-R recommendations.

Users are dealt into ``n_folds`` groups; each user's interactions are split
into a history part (fed to the scorer) and a disjoint answer part (held
out).  Recall@R and nDCG@R are averaged over the users of each fold and
then summarised as mean and population standard deviation across folds.

    Recall@R = |top_R ∩ answer| / min(R, |answer|)
    nDCG@R   = sum_{p<=R, rec[p] in answer} 1/log2(p+1)
               / sum_{p<=min(R,|answer|)} 1/log2(p+1)
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import ease
from .featurize import FeatureMatrix
from .recommend import InteractionSet, score_user, top_r
from .rng import Xoshiro256

_log = logging.getLogger(__name__)

METRICS = ("recall", "ndcg")
DEFAULT_CUTOFFS = (5, 10, 20, 50)
DEFAULT_FOLDS = 5
DEFAULT_HISTORY_FRACTION = 0.8


class SplitError(ValueError):
    pass


def history_size(n: int, fraction: float) -> int:
    """round(fraction * n) with halves rounded up, clamped to [1, n-1]."""
    h = math.floor(fraction * n + 0.5)
    return min(max(h, 1), n - 1)


@dataclass(frozen=True)
class SplitPlan:
    seed: int
    n_folds: int
    history_fraction: float
    fold_of_user: Mapping[str, int]
    parts: Mapping[str, tuple[frozenset[int], frozenset[int]]]

    def fold_users(self, fold: int) -> list[str]:
        return sorted(u for u, f in self.fold_of_user.items() if f == fold)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_folds": self.n_folds,
            "history_fraction": self.history_fraction,
            "users": {
                u: {
                    "fold": self.fold_of_user[u],
                    "history": sorted(self.parts[u][0]),
                    "answer": sorted(self.parts[u][1]),
                }
                for u in sorted(self.fold_of_user)
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def make_split(
    interactions: InteractionSet,
    n_folds: int = DEFAULT_FOLDS,
    history_fraction: float = DEFAULT_HISTORY_FRACTION,
    seed: int = 0,
) -> SplitPlan:
    """Deterministically assign users to folds and split their interactions.

    Users with fewer than two interactions cannot supply both a history and
    an answer and are left out.
    """
    if n_folds < 2:
        raise SplitError(f"n_folds must be >= 2, got {n_folds}")
    if not 0.0 < history_fraction < 1.0:
        raise SplitError(f"history_fraction must lie in (0, 1), got {history_fraction}")

    users = [u for u in interactions.sorted_users() if len(interactions.users[u]) >= 2]
    skipped = interactions.n_users - len(users)
    if skipped:
        _log.info("make_split: excluded %d users with a single interaction", skipped)
    if not users:
        raise SplitError("no user has at least 2 interactions")

    rng = Xoshiro256(seed)
    rng.shuffle(users)
    fold_of_user = {}
    parts = {}
    for pos, u in enumerate(users):
        fold_of_user[u] = pos % n_folds
        items = sorted(interactions.users[u])
        rng.shuffle(items)
        h = history_size(len(items), history_fraction)
        parts[u] = (frozenset(items[:h]), frozenset(items[h:]))
    return SplitPlan(seed, n_folds, history_fraction, fold_of_user, parts)


def recall_at_r(recommended: Sequence[int], answer: Iterable[int], r: int) -> float:
    answer = set(answer)
    if r < 1 or not answer:
        raise ValueError("need r >= 1 and a non-empty answer set")
    hits = sum(1 for j in recommended[:r] if j in answer)
    return hits / min(r, len(answer))


def ndcg_at_r(recommended: Sequence[int], answer: Iterable[int], r: int) -> float:
    answer = set(answer)
    if r < 1 or not answer:
        raise ValueError("need r >= 1 and a non-empty answer set")
    dcg = sum(1.0 / math.log2(p + 2) for p, j in enumerate(recommended[:r]) if j in answer)
    idcg = sum(1.0 / math.log2(p + 2) for p in range(min(r, len(answer))))
    return dcg / idcg


@dataclass(frozen=True)
class EvalReport:
    """Metrics of one recommender over all folds.

    ``per_fold`` is keyed by ``(fold, metric, R)``; ``mean`` and ``std`` by
    ``(metric, R)``.  ``std`` divides by the number of folds.
    """

    label: str
    cutoffs: tuple[int, ...]
    n_folds: int
    per_fold: Mapping[tuple[int, str, int], float]
    mean: Mapping[tuple[str, int], float]
    std: Mapping[tuple[str, int], float]
    fold_sizes: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "cutoffs": list(self.cutoffs),
            "n_folds": self.n_folds,
            "fold_sizes": list(self.fold_sizes),
            "metrics": {
                m: {
                    str(r): {
                        "per_fold": [self.per_fold[f, m, r] for f in range(self.n_folds)],
                        "mean": self.mean[m, r],
                        "std": self.std[m, r],
                    }
                    for r in self.cutoffs
                }
                for m in METRICS
            },
        }

    def rows(self):
        """``(metric, R, fold, value)`` tuples; fold is an int, "mean" or "std"."""
        for m in METRICS:
            for r in self.cutoffs:
                for f in range(self.n_folds):
                    yield m, r, f, self.per_fold[f, m, r]
                yield m, r, "mean", self.mean[m, r]
                yield m, r, "std", self.std[m, r]


Scorer = Callable[[frozenset], np.ndarray]


def evaluate_scorer(
    plan: SplitPlan,
    scorer: Scorer,
    cutoffs: Sequence[int] = DEFAULT_CUTOFFS,
    label: str = "",
) -> EvalReport:
    """Evaluate any history -> score-vector function under ``plan``."""
    cutoffs = _check_cutoffs(cutoffs)
    rmax = max(cutoffs)
    per_fold = {}
    sizes = []
    for f in range(plan.n_folds):
        users = plan.fold_users(f)
        if not users:
            raise SplitError(f"fold {f} has no users; need at least {plan.n_folds} evaluable users")
        sizes.append(len(users))
        sums = {(m, r): 0.0 for m in METRICS for r in cutoffs}
        for u in users:
            hist, ans = plan.parts[u]
            rec = top_r(scorer(hist), hist, rmax)
            for r in cutoffs:
                sums["recall", r] += recall_at_r(rec, ans, r)
                sums["ndcg", r] += ndcg_at_r(rec, ans, r)
        for key, s in sums.items():
            per_fold[(f, *key)] = s / len(users)
    mean, std = {}, {}
    for m in METRICS:
        for r in cutoffs:
            vals = np.array([per_fold[f, m, r] for f in range(plan.n_folds)])
            mean[m, r] = float(vals.mean())
            std[m, r] = float(vals.std(ddof=0))
    return EvalReport(label, cutoffs, plan.n_folds, per_fold, mean, std, tuple(sizes))


def popularity_scores(plan: SplitPlan, n_entities: int) -> np.ndarray:
    """Interaction counts over every user's history part."""
    counts = np.zeros(n_entities, dtype=np.float64)
    for u in sorted(plan.parts):
        for j in plan.parts[u][0]:
            counts[j] += 1.0
    return counts


def evaluate_popularity(plan: SplitPlan, n_entities: int, cutoffs: Sequence[int] = DEFAULT_CUTOFFS) -> EvalReport:
    pop = popularity_scores(plan, n_entities)
    return evaluate_scorer(plan, lambda _h: pop, cutoffs, label="popularity")


def evaluate_model(plan: SplitPlan, model: ease.SimilarityModel, cutoffs: Sequence[int] = DEFAULT_CUTOFFS, label: str | None = None) -> EvalReport:
    if label is None:
        label = f"ease:{model.lam!r}"
    return evaluate_scorer(plan, lambda h: score_user(h, model), cutoffs, label=label)


def evaluate(
    fm: FeatureMatrix,
    interactions: InteractionSet,
    lambdas: Sequence[float] = (ease.DEFAULT_LAMBDA,),
    cutoffs: Sequence[int] = DEFAULT_CUTOFFS,
    n_folds: int = DEFAULT_FOLDS,
    history_fraction: float = DEFAULT_HISTORY_FRACTION,
    seed: int = 0,
) -> dict[float, EvalReport]:
    """Fit one model per lambda on the full feature matrix and evaluate each
    under the same split.

    The weights never see interaction data, so folds only change which
    users are evaluated.  ``interactions`` must be aligned to ``fm``'s
    entity vocabulary.
    """
    if interactions.entity_vocab != fm.entity_vocab:
        raise ValueError("interactions are not aligned to the feature matrix's entity vocabulary")
    if not lambdas:
        raise ValueError("need at least one lambda")
    plan = make_split(interactions, n_folds, history_fraction, seed)
    reports = {}
    for lam in lambdas:
        model = ease.fit(fm, lam)
        reports[float(lam)] = evaluate_model(plan, model, cutoffs)
    return reports


def _check_cutoffs(cutoffs: Sequence[int]) -> tuple[int, ...]:
    cut = tuple(sorted(set(int(r) for r in cutoffs)))
    if not cut or cut[0] < 1:
        raise ValueError("cutoffs must be positive integers")
    return cut
