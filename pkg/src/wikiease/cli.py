"""Command-line front end: ``wikiease {fit,similar,recommend,evaluate,inspect}``.

Settings resolve as command-line flag > ``--config`` JSON file > default,
and the resolved settings are written into every evaluation report.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from . import ease, evaluation
from .featurize import Mode, ParseError, load_feature_pairs
from .recommend import DEFAULT_RATING_THRESHOLD, AlignmentError, align, load_interactions, recommend_all

_log = logging.getLogger("wikiease")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    features: str | None = None
    interactions: str | None = None
    model: str | None = None
    mode: str = "binary"
    min_feature_count: int = 1
    lambdas: list[float] = field(default_factory=lambda: [ease.DEFAULT_LAMBDA])
    cutoffs: list[int] = field(default_factory=lambda: list(evaluation.DEFAULT_CUTOFFS))
    folds: int = evaluation.DEFAULT_FOLDS
    history_fraction: float = evaluation.DEFAULT_HISTORY_FRACTION
    seed: int = 0
    rating_threshold: float = DEFAULT_RATING_THRESHOLD
    sparsify: float = 0.0
    entity: str | None = None
    k: int = 10
    top: int = 10
    out: str | None = None
    report: str | None = None

    def validate(self) -> "RunConfig":
        try:
            self.mode = Mode(self.mode).value
        except ValueError:
            raise ConfigError(f"mode must be 'binary' or 'count', got {self.mode!r}") from None
        if self.min_feature_count < 1:
            raise ConfigError("min_feature_count must be >= 1")
        if not self.lambdas:
            raise ConfigError("need at least one lambda")
        for lam in self.lambdas:
            if not (lam > 0 and np.isfinite(lam)):
                raise ConfigError(f"lambda must be positive, got {lam}")
        if not self.cutoffs or min(self.cutoffs) < 1:
            raise ConfigError("cutoffs must be positive integers")
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if not 0 < self.history_fraction < 1:
            raise ConfigError("history_fraction must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.k < 1 or self.top < 1:
            raise ConfigError("k and top must be >= 1")
        if self.sparsify < 0:
            raise ConfigError("sparsify threshold must be >= 0")
        return self


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wikiease", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        S = argparse.SUPPRESS
        sp.add_argument("--config", help="JSON file with RunConfig fields")
        sp.add_argument("--features", default=S, help="entity<TAB>feature[<TAB>count] pair file")
        sp.add_argument("--interactions", default=S, help="user<TAB>entity[<TAB>rating] file")
        sp.add_argument("--model", default=S, help="model file (EASEB format)")
        sp.add_argument("--mode", choices=[m.value for m in Mode], default=S)
        sp.add_argument("--min-feature-count", dest="min_feature_count", type=int, default=S)
        sp.add_argument("--lambda", dest="lambdas", type=float, action="append", default=S,
                        help="L2 strength; repeat for a grid")
        sp.add_argument("--cutoffs", type=_int_list, default=S, help="comma-separated R values")
        sp.add_argument("--folds", type=int, default=S)
        sp.add_argument("--history-fraction", dest="history_fraction", type=float, default=S)
        sp.add_argument("--seed", type=int, default=S)
        sp.add_argument("--rating-threshold", dest="rating_threshold", type=float, default=S)
        sp.add_argument("--out", default=S)
        return sp

    fitp = common(sub.add_parser("fit", help="fit a model from a pair file"))
    fitp.add_argument("--sparsify", type=float, default=argparse.SUPPRESS,
                      help="zero weights below this magnitude (lossy)")

    sim = common(sub.add_parser("similar", help="most similar entities"))
    sim.add_argument("--entity", default=argparse.SUPPRESS)
    sim.add_argument("-k", "--k", type=int, default=argparse.SUPPRESS)

    rec = common(sub.add_parser("recommend", help="top-R lists for every user"))
    rec.add_argument("--top", type=int, default=argparse.SUPPRESS)

    ev = common(sub.add_parser("evaluate", help="run the user-fold evaluation"))
    ev.add_argument("--report", default=argparse.SUPPRESS, help="JSON report path")

    common(sub.add_parser("inspect", help="print model header and weight statistics"))
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as f:
            loaded = json.load(f)
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        if "lambda" in loaded:
            loaded["lambdas"] = loaded.pop("lambda")
        unknown = set(loaded) - _FIELDS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for name in _FIELDS:
        if name in vars(args):
            values[name] = getattr(args, name)
    if isinstance(values.get("lambdas"), (int, float)):
        values["lambdas"] = [values["lambdas"]]
    if isinstance(values.get("cutoffs"), str):
        values["cutoffs"] = _int_list(values["cutoffs"])
    cfg = RunConfig(**values)
    cfg.lambdas = [float(x) for x in cfg.lambdas]
    cfg.cutoffs = [int(x) for x in cfg.cutoffs]
    return cfg.validate()


@contextlib.contextmanager
def atomic_output(path: str | None, binary: bool = False):
    """Yield a writable file; replace ``path`` only if the block succeeds."""
    if path is None or path == "-":
        yield sys.stdout.buffer if binary else sys.stdout
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb" if binary else "w", encoding=None if binary else "utf-8", newline=None if binary else "\n") as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError("missing required setting(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def cmd_fit(cfg: RunConfig) -> int:
    _require(cfg, "features", "out")
    if len(cfg.lambdas) != 1:
        raise ConfigError("fit takes exactly one --lambda")
    lam = cfg.lambdas[0]
    t0 = time.perf_counter()
    fm = load_feature_pairs(cfg.features, cfg.mode, cfg.min_feature_count)
    model = ease.fit(fm, lam)
    if cfg.sparsify > 0:
        model = ease.sparsify(model, cfg.sparsify)
    with atomic_output(cfg.out, binary=True) as f:
        ease.save(model, f)
    print(f"N={fm.n_entities}\tM={fm.n_features}\tlambda={lam!r}\twall={time.perf_counter() - t0:.3f}s")
    return 0


def cmd_similar(cfg: RunConfig) -> int:
    _require(cfg, "model", "entity")
    model = ease.load(cfg.model)
    for rank, (name, w) in enumerate(ease.top_similar(model, cfg.entity, cfg.k), start=1):
        print(f"{rank}\t{name}\t{w:.6g}")
    return 0


def cmd_recommend(cfg: RunConfig) -> int:
    _require(cfg, "model", "interactions")
    model = ease.load(cfg.model)
    inter = align(load_interactions(cfg.interactions, cfg.rating_threshold), model)
    lists = recommend_all(inter, model, cfg.top)
    with atomic_output(cfg.out) as f:
        for u, recs in lists.items():
            for rank, (j, s) in enumerate(recs, start=1):
                f.write(f"{u}\t{rank}\t{model.entity_vocab.term(j)}\t{s:.6g}\n")
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    _require(cfg, "features", "interactions")
    fm = load_feature_pairs(cfg.features, cfg.mode, cfg.min_feature_count)
    raw = load_interactions(cfg.interactions, cfg.rating_threshold)
    try:
        inter = align(raw, fm.entity_vocab)
    except AlignmentError as exc:
        raise AlignmentError(f"{exc}; {fm.n_entities} entities in features, {len(raw.users)} users") from None
    plan = evaluation.make_split(inter, cfg.folds, cfg.history_fraction, cfg.seed)
    reports = []
    for lam in cfg.lambdas:
        model = ease.fit(fm, lam)
        reports.append((repr(lam), evaluation.evaluate_model(plan, model, cfg.cutoffs, label=f"ease:{lam!r}")))
    reports.append(("popularity", evaluation.evaluate_popularity(plan, fm.n_entities, cfg.cutoffs)))

    with atomic_output(cfg.out) as f:
        f.write("lambda\tmetric\tR\tfold\tvalue\n")
        for lam_label, rep in reports:
            for m, r, fold, v in rep.rows():
                f.write(f"{lam_label}\t{m}\t{r}\t{fold}\t{v:.6f}\n")
    if cfg.report:
        doc = {
            "config": dataclasses.asdict(cfg),
            "data": {
                "n_entities": fm.n_entities,
                "n_features": fm.n_features,
                "n_users": inter.n_users,
                "dropped_entities": inter.dropped_entities,
                "dropped_pairs": inter.dropped_pairs,
                "dropped_users": inter.dropped_users,
            },
            "split": {
                "seed": plan.seed,
                "n_folds": plan.n_folds,
                "history_fraction": plan.history_fraction,
                "n_evaluated_users": len(plan.fold_of_user),
                "prng": "xoshiro256** seeded by splitmix64",
            },
            "reports": [rep.to_dict() for _, rep in reports],
        }
        with atomic_output(cfg.report) as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
    return 0


def cmd_inspect(cfg: RunConfig) -> int:
    _require(cfg, "model")
    with open(cfg.model, "rb") as f:
        n, names = ease.read_header(f)
    model = ease.load(cfg.model)
    w = model.weights
    off = w[~np.eye(n, dtype=bool)]
    print(f"magic\t{ease.MAGIC!r}")
    print(f"n_entities\t{n}")
    print(f"file_bytes\t{os.path.getsize(cfg.model)}")
    print(f"diagonal_zero\t{bool(np.all(np.diag(w) == 0))}")
    if off.size:
        print(f"nonzero_offdiag\t{int(np.count_nonzero(off))}")
        print(f"min\t{off.min():.6g}")
        print(f"max\t{off.max():.6g}")
        print(f"mean\t{off.mean():.6g}")
    print(f"first_entities\t{', '.join(names[:5])}")
    return 0


COMMANDS = {
    "fit": cmd_fit,
    "similar": cmd_similar,
    "recommend": cmd_recommend,
    "evaluate": cmd_evaluate,
    "inspect": cmd_inspect,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except (ConfigError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"wikiease: argument error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"wikiease: argument error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"wikiease: error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return 1
    except (ParseError, ValueError, OSError, RuntimeError) as exc:
        print(f"wikiease: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
