"""Synthetic two-cluster data for desk-scale experiments.

Entities fall into latent clusters.  Simulated editors mostly edit articles
of one cluster, while category labels are drawn independently of the
cluster.  Users each like one cluster, so editor features should carry the
signal a recommender needs and category features should not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .featurize import FeatureMatrix
from .recommend import InteractionSet
from .vocab import Vocabulary


@dataclass(frozen=True)
class SyntheticWorld:
    entity_cluster: np.ndarray
    editors: FeatureMatrix
    categories: FeatureMatrix
    interactions: InteractionSet


def make_world(
    n_entities: int = 200,
    n_clusters: int = 2,
    n_editors: int = 300,
    edits_per_editor: int = 10,
    in_cluster_prob: float = 0.9,
    n_categories: int = 30,
    category_prob: float = 0.1,
    n_users: int = 500,
    items_per_user: int = 20,
    seed: int = 0,
) -> SyntheticWorld:
    rng = np.random.default_rng(seed)
    cluster = np.arange(n_entities) % n_clusters
    members = [np.flatnonzero(cluster == c) for c in range(n_clusters)]

    ed = np.zeros((n_entities, n_editors))
    for k in range(n_editors):
        home = rng.integers(n_clusters)
        for _ in range(edits_per_editor):
            c = home if rng.random() < in_cluster_prob else rng.choice([c for c in range(n_clusters) if c != home])
            ed[rng.choice(members[c]), k] = 1.0

    cat = (rng.random((n_entities, n_categories)) < category_prob).astype(np.float64)

    entities = Vocabulary([f"ent{i:05d}" for i in range(n_entities)], presorted=True)
    users = {}
    for u in range(n_users):
        c = rng.integers(n_clusters)
        picks = rng.choice(members[c], size=min(items_per_user, len(members[c])), replace=False)
        users[f"user{u:05d}"] = frozenset(int(j) for j in picks)

    return SyntheticWorld(
        entity_cluster=cluster,
        editors=FeatureMatrix.from_dense(ed, entities=entities, features=[f"editor{k:05d}" for k in range(n_editors)]),
        categories=FeatureMatrix.from_dense(cat, entities=entities, features=[f"cat{k:03d}" for k in range(n_categories)]),
        interactions=InteractionSet(users, entities),
    )
