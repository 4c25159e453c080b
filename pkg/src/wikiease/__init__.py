"""Entity similarity from binary entity-feature matrices with EASE, plus a
user-fold top-R evaluation harness."""

from .ease import DEFAULT_LAMBDA, SimilarityModel, fit, load, save, similarity, sparsify, top_similar
from .evaluation import EvalReport, SplitPlan, evaluate, make_split, ndcg_at_r, recall_at_r
from .featurize import FeatureMatrix, Mode, ParseError, binarize, load_feature_pairs
from .recommend import InteractionSet, align, load_interactions, score_user, top_r
from .vocab import Vocabulary

__version__ = "0.1.0"
