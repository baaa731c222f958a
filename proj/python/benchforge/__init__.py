"""Python access to the benchforge translation pipeline and evaluation core."""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    DatasetError,
    EvalError,
    JudgeParseError,
    average_precision,
    average_precision_ranked,
    benchmark_average,
    check_dataset,
    combine_score,
    cosine_similarity,
    default_criteria,
    kept_ratio_means,
    meets_threshold,
    ndcg_at_k,
    parse_scorecard,
    pearson,
    score_bin,
    spearman,
    v_measure,
)

__all__ = [
    "ConfigError",
    "DatasetError",
    "EvalError",
    "JudgeParseError",
    "average_precision",
    "average_precision_ranked",
    "benchmark_average",
    "check_dataset",
    "combine_score",
    "config_fingerprint",
    "cosine_similarity",
    "default_config",
    "default_criteria",
    "dry_run",
    "estimate_cost",
    "evaluate",
    "kept_ratio_means",
    "load_summary",
    "meets_threshold",
    "ndcg_at_k",
    "parse_scorecard",
    "pearson",
    "run_pipeline",
    "score_bin",
    "spearman",
    "v_measure",
    "validate_config",
]


def _dump(config):
    return config if isinstance(config, str) else _json.dumps(config)


def default_config():
    return _json.loads(_core.default_config())


def validate_config(config):
    return [dict(field=f, rule=r, message=m) for f, r, m in _core.validate_config(_dump(config))]


def config_fingerprint(config):
    return _core.config_fingerprint(_dump(config))


def dry_run(manifest, config=None):
    return _json.loads(_core.dry_run(str(manifest), _dump(config or {})))


def run_pipeline(manifest, config, run_translation=True, run_validation=True):
    """Runs (or resumes) the pipeline and returns the run summary."""
    return _json.loads(_core.run_pipeline(str(manifest), _dump(config), run_translation, run_validation))


def load_summary(run_dir):
    return _json.loads(_core.load_summary(str(run_dir)))


def evaluate(manifest, embeddings, seed=42):
    return _json.loads(_core.evaluate(str(manifest), str(embeddings), seed))


def estimate_cost(tokens, rate, gpus, watts, duplex=2.0):
    return _json.loads(_core.estimate_cost(tokens, rate, gpus, watts, duplex))
