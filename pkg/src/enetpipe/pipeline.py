"""End-to-end evaluation: k-fold splitting, per-fold fitting, metrics,
and the two-selector comparison.

Every per-fold artifact (column standardization, PCA basis, sparse support,
classifier weights) is fit on that fold's training rows only; the held-out
rows are transformed with the frozen parameters. This is load-bearing: the
leakage test recomputes a fold with garbage test rows and requires identical
fitted parameters.

Determinism: all randomness flows from config.seed through the portable
generator. The only nondeterministic report content is wall-clock timing.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .data import (StandardizationRecord, apply_standardization,
                   standardize_columns, validate_feature_matrix)
from .elm import ElmModel, elm_predict, elm_train
from .errors import (ConfigError, DimensionError, EnetPipeError,
                     UndefinedMetricError)
from .pca import PcaModel, pca_fit, pca_transform
from .rng import PortableRng
from .solvers import (PenaltyConfig, elastic_net_fit_cd, lasso_fit,
                      select_support)
from .sven import elastic_net_fit_svm_reduction

__all__ = ["PipelineConfig", "FoldOutcome", "EvaluationReport",
           "ComparisonBlock", "kfold_split", "holdout_split", "accuracy",
           "stddev_population", "run_pipeline", "compare_selectors"]

SELECTORS = ("lasso", "elastic_net_cd", "elastic_net_svm", "none")

# Number of lambda1 candidates tried by the per-fold internal validation.
_LAMBDA_GRID_POINTS = 5
_LAMBDA_GRID_DECADES = 3.0


@dataclass(frozen=True)
class PipelineConfig:
    selector: str = "elastic_net_cd"
    use_pca: bool = True
    pca_retain: float | int = 0.95
    lambda1: float | None = None      # None: per-fold internal validation
    lambda2: float | None = None      # None: 0.5 * lambda1
    stop_thr: float = 1e-7
    max_sweeps: int = 10_000
    elm_gamma: float | None = None    # None: median heuristic
    elm_ridge: float = 100.0
    k_folds: int = 10
    seed: int = 0
    holdout: float | None = None      # test fraction; None = k-fold protocol
    min_support_magnitude: float = 1e-10
    group_name: str = "synthetic"

    def __post_init__(self):
        if self.selector not in SELECTORS:
            raise ConfigError(
                f"unknown selector {self.selector!r}; choose from {SELECTORS}")
        if self.k_folds < 2:
            raise ConfigError(f"k_folds must be >= 2, got {self.k_folds}")
        if self.holdout is not None and not 0.0 < self.holdout < 1.0:
            raise ConfigError(
                f"holdout fraction must be in (0, 1), got {self.holdout}")
        if self.lambda1 is not None and self.lambda1 < 0:
            raise ConfigError(f"lambda1 must be >= 0, got {self.lambda1}")
        if self.lambda2 is not None and self.lambda2 < 0:
            raise ConfigError(f"lambda2 must be >= 0, got {self.lambda2}")


@dataclass
class FoldOutcome:
    fold_index: int
    test_indices: np.ndarray
    accuracy: float | None
    time_ms: float | None             # median per-sample predict latency
    support: np.ndarray | None
    n_candidate_features: int
    lambda1: float | None
    lambda2: float | None
    warnings: tuple = ()
    failure: str | None = None
    standardization: StandardizationRecord | None = field(default=None, repr=False)
    post_pca_standardization: StandardizationRecord | None = field(default=None, repr=False)
    pca: PcaModel | None = field(default=None, repr=False)
    elm: ElmModel | None = field(default=None, repr=False)


@dataclass
class ComparisonBlock:
    baseline_selector: str
    proposed_selector: str
    baseline_mean_accuracy: float
    proposed_mean_accuracy: float
    baseline_mean_time_ms: float
    proposed_mean_time_ms: float
    fold_accuracy_deltas: list
    fold_time_deltas_ms: list
    mean_accuracy_delta: float
    mean_time_delta_ms: float
    baseline_folds: list = field(default_factory=list, repr=False)


@dataclass
class EvaluationReport:
    group: str
    selector: str
    k_folds: int
    seed: int
    folds: list
    mean_accuracy: float
    accuracy_sigma: float
    mean_time_ms: float
    mean_support_size: float
    warnings: tuple
    fold_hash: str
    comparison: ComparisonBlock | None = None


def kfold_split(n: int, k: int, seed: int) -> list:
    """k disjoint, covering, size-balanced (within 1) index arrays."""
    if k < 2 or k > n:
        raise ConfigError(f"fold count must satisfy 2 <= k <= {n}, got {k}")
    order = PortableRng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(order, k)]


def holdout_split(n: int, test_fraction: float, seed: int):
    """Single shuffled (train, test) split with ceil(n*fraction) test rows."""
    n_test = max(1, int(np.ceil(n * test_fraction)))
    if n_test >= n:
        raise ConfigError(
            f"holdout fraction {test_fraction} leaves no training rows")
    order = PortableRng(seed).permutation(n)
    return np.sort(order[n_test:]), np.sort(order[:n_test])


def accuracy(predictions, truth) -> float:
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape:
        raise DimensionError(
            f"length mismatch: {predictions.shape} vs {truth.shape}")
    if predictions.size == 0:
        raise UndefinedMetricError("accuracy of an empty set is undefined")
    return float(np.mean(predictions == truth))


def stddev_population(samples) -> float:
    """Population standard deviation: sqrt(sum|x - mean|^2 / n)."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise UndefinedMetricError("standard deviation of an empty set is undefined")
    return float(np.sqrt(np.mean(np.abs(samples - samples.mean()) ** 2)))


def _fold_hash(folds) -> str:
    digest = hashlib.sha256()
    for fold in folds:
        digest.update(np.asarray(fold, dtype=np.int64).tobytes())
        digest.update(b"|")
    return digest.hexdigest()


def _signed_targets(labels) -> np.ndarray:
    classes = np.unique(labels)
    if classes.shape[0] != 2:
        raise ConfigError(
            f"sparse selection needs exactly 2 classes, got {classes.shape[0]}; "
            "use selector='none' for other label sets")
    return np.where(labels == classes[0], -1.0, 1.0)


def _fit_selector(X, y, selector: str, lambda1: float, lambda2: float,
                  cfg: PipelineConfig):
    pen = PenaltyConfig(lambda1=lambda1, lambda2=lambda2,
                        stop_thr=cfg.stop_thr, max_sweeps=cfg.max_sweeps)
    if selector == "lasso":
        return lasso_fit(X, y, pen)
    if selector == "elastic_net_cd":
        return elastic_net_fit_cd(X, y, pen)
    if selector == "elastic_net_svm":
        if lambda2 <= 0.0:
            raise ConfigError(
                "selector elastic_net_svm needs lambda2 > 0")
        return elastic_net_fit_svm_reduction(X, y, pen)
    raise ConfigError(f"selector {selector!r} does not fit coefficients")


def _choose_lambda1(X, y, selector: str, cfg: PipelineConfig, seed: int):
    """5-point log-grid internal validation on an 80/20 split of the
    training fold; ties prefer the larger (sparser) lambda1."""
    n = X.shape[0]
    n_val = max(1, n // 5)
    if n - n_val < 2:
        # too small to validate; fall back to a mid-grid value
        lam_max = float(np.abs(X.T @ y).max()) / n
        return max(lam_max * 10.0 ** (-_LAMBDA_GRID_DECADES / 2.0), 1e-12)
    order = PortableRng(seed).permutation(n)
    fit_idx, val_idx = order[n_val:], order[:n_val]
    X_fit, rec = standardize_columns(X[fit_idx])
    y_fit = y[fit_idx]
    X_val = apply_standardization(rec, X[val_idx])
    lam_max = float(np.abs(X_fit.T @ y_fit).max()) / X_fit.shape[0]
    if lam_max <= 0.0:
        return 1e-12
    grid = lam_max * 10.0 ** np.linspace(-_LAMBDA_GRID_DECADES, 0.0,
                                         _LAMBDA_GRID_POINTS)
    best_lam, best_mse = None, np.inf
    for lam in grid:
        lam2 = 0.0 if selector == "lasso" else (
            cfg.lambda2 if cfg.lambda2 is not None else 0.5 * lam)
        result = _fit_selector(X_fit, y_fit, selector, lam, lam2, cfg)
        resid = y[val_idx] - X_val @ result.coefficients
        mse = float(resid @ resid) / len(val_idx)
        if mse <= best_mse:          # ascending grid, so ties keep larger lam
            best_lam, best_mse = lam, mse
    return float(best_lam)


def _evaluate_fold(cfg: PipelineConfig, X, labels, train_idx, test_idx,
                   fold_index: int) -> FoldOutcome:
    warnings = []
    X_train, record = standardize_columns(X[train_idx])
    X_test = apply_standardization(record, X[test_idx])
    y_train_labels = labels[train_idx]
    y_test_labels = labels[test_idx]

    pca_model = None
    if cfg.use_pca:
        pca_model = pca_fit(X_train, retain=cfg.pca_retain)
        X_train = pca_transform(pca_model, X_train)
        X_test = pca_transform(pca_model, X_test)

    # The selector contract requires unit-variance columns, and PCA output
    # does not have them; re-standardize on the training rows.
    X_train, post_record = standardize_columns(X_train)
    X_test = apply_standardization(post_record, X_test)

    lambda1 = cfg.lambda1
    lambda2 = cfg.lambda2
    support = np.arange(X_train.shape[1])
    if cfg.selector != "none":
        y_signed = _signed_targets(labels)[train_idx]
        if lambda1 is None:
            lambda1 = _choose_lambda1(X_train, y_signed, cfg.selector, cfg,
                                      seed=cfg.seed + 9973 * (fold_index + 1))
        if lambda2 is None:
            lambda2 = 0.0 if cfg.selector == "lasso" else 0.5 * lambda1
        result = _fit_selector(X_train, y_signed, cfg.selector,
                               lambda1, lambda2, cfg)
        if not result.converged:
            warnings.append(
                f"fold {fold_index}: selector did not converge in "
                f"{cfg.max_sweeps} sweeps")
        support = select_support(result, cfg.min_support_magnitude)
        if support.size == 0:
            warnings.append(
                f"fold {fold_index}: empty support, falling back to all "
                f"{X_train.shape[1]} features")
            support = np.arange(X_train.shape[1])

    model = elm_train(X_train[:, support], y_train_labels,
                      gamma=cfg.elm_gamma, ridge_c=cfg.elm_ridge)
    X_test_sel = X_test[:, support]
    predictions = np.empty(len(test_idx), dtype=y_test_labels.dtype)
    latencies = np.empty(len(test_idx))
    for i in range(len(test_idx)):
        started = time.perf_counter()
        scored = elm_predict(model, X_test_sel[i:i + 1])
        latencies[i] = time.perf_counter() - started
        predictions[i] = model.classes[scored.predicted_class[0]]

    return FoldOutcome(
        fold_index=fold_index,
        test_indices=np.asarray(test_idx),
        accuracy=accuracy(predictions, y_test_labels),
        time_ms=float(np.median(latencies) * 1000.0),
        support=support,
        n_candidate_features=X_train.shape[1],
        lambda1=lambda1,
        lambda2=lambda2,
        warnings=tuple(warnings),
        standardization=record,
        post_pca_standardization=post_record,
        pca=pca_model,
        elm=model,
    )


def _folds_for(cfg: PipelineConfig, n: int):
    if cfg.holdout is not None:
        _, test_idx = holdout_split(n, cfg.holdout, cfg.seed)
        return [test_idx]
    if cfg.k_folds > n:
        raise ConfigError(
            f"k_folds={cfg.k_folds} exceeds the sample count {n}")
    return kfold_split(n, cfg.k_folds, cfg.seed)


def run_pipeline(cfg: PipelineConfig, features, labels) -> EvaluationReport:
    X = validate_feature_matrix(features)
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] != X.shape[0]:
        raise DimensionError(
            f"labels have shape {labels.shape}, expected ({X.shape[0]},)")

    folds = _folds_for(cfg, X.shape[0])
    all_indices = np.arange(X.shape[0])
    outcomes = []
    for fold_index, test_idx in enumerate(folds):
        train_mask = np.ones(X.shape[0], dtype=bool)
        train_mask[test_idx] = False
        train_idx = all_indices[train_mask]
        try:
            outcome = _evaluate_fold(cfg, X, labels, train_idx, test_idx,
                                     fold_index)
        except (EnetPipeError, np.linalg.LinAlgError) as exc:
            outcome = FoldOutcome(
                fold_index=fold_index, test_indices=np.asarray(test_idx),
                accuracy=None, time_ms=None, support=None,
                n_candidate_features=0, lambda1=None, lambda2=None,
                failure=f"{type(exc).__name__}: {exc}")
        outcomes.append(outcome)

    completed = [o for o in outcomes if o.failure is None]
    if not completed:
        raise EnetPipeError(
            "every fold failed; first failure: " + outcomes[0].failure)
    accuracies = [o.accuracy for o in completed]
    warnings = tuple(w for o in outcomes for w in o.warnings) + tuple(
        f"fold {o.fold_index} failed: {o.failure}"
        for o in outcomes if o.failure is not None)
    return EvaluationReport(
        group=cfg.group_name,
        selector=cfg.selector,
        k_folds=len(folds),
        seed=cfg.seed,
        folds=outcomes,
        mean_accuracy=float(np.mean(accuracies)),
        accuracy_sigma=stddev_population(accuracies),
        mean_time_ms=float(np.mean([o.time_ms for o in completed])),
        mean_support_size=float(np.mean([o.support.size for o in completed])),
        warnings=warnings,
        fold_hash=_fold_hash(folds),
    )


def compare_selectors(cfg: PipelineConfig, features, labels,
                      baseline: str = "lasso",
                      proposed: str | None = None) -> EvaluationReport:
    """Run two selector arms on identical folds and attach paired deltas."""
    proposed = proposed if proposed is not None else cfg.selector
    base_cfg = replace(cfg, selector=baseline)
    if baseline == "lasso":
        # an explicit ridge weight belongs to the elastic-net arm only
        base_cfg = replace(base_cfg, lambda2=None)
    base_report = run_pipeline(base_cfg, features, labels)
    prop_report = run_pipeline(replace(cfg, selector=proposed), features, labels)
    if base_report.fold_hash != prop_report.fold_hash:
        raise EnetPipeError(
            "comparison arms received different fold assignments")

    acc_deltas, time_deltas = [], []
    for b, p in zip(base_report.folds, prop_report.folds):
        if b.failure is None and p.failure is None:
            acc_deltas.append(p.accuracy - b.accuracy)
            time_deltas.append(p.time_ms - b.time_ms)
    comparison = ComparisonBlock(
        baseline_selector=baseline,
        proposed_selector=proposed,
        baseline_mean_accuracy=base_report.mean_accuracy,
        proposed_mean_accuracy=prop_report.mean_accuracy,
        baseline_mean_time_ms=base_report.mean_time_ms,
        proposed_mean_time_ms=prop_report.mean_time_ms,
        fold_accuracy_deltas=acc_deltas,
        fold_time_deltas_ms=time_deltas,
        mean_accuracy_delta=float(np.mean(acc_deltas)) if acc_deltas else 0.0,
        mean_time_delta_ms=float(np.mean(time_deltas)) if time_deltas else 0.0,
        baseline_folds=base_report.folds,
    )
    return replace(prop_report, comparison=comparison,
                   warnings=base_report.warnings + prop_report.warnings)
