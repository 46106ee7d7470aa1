"""Classification, explainability, robustness, and timing metrics.

Explanation metrics consume an explainer callable with the signature
``explain(model, x, background, seed) -> Explanation`` (see
``explain.build_explainer``). Every metric is a pure function of its
inputs and seeds; per-instance seeds derive from (master seed, index) so
aggregates are schedule-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import (
    AllInstancesIdentical,
    KOutOfRange,
    NoFlipFound,
    SingleClassLabels,
)
from .explain import Background
from .seeding import derive_seed


@dataclass(frozen=True)
class ClassificationMetrics:
    false_positive_rate: float
    auc: float
    balanced_accuracy: float
    mcc: float
    confusion: tuple[int, int, int, int]  # (tp, fp, tn, fn)

    def to_dict(self) -> dict:
        tp, fp, tn, fn = self.confusion
        return {
            "false_positive_rate": self.false_positive_rate,
            "auc": self.auc,
            "balanced_accuracy": self.balanced_accuracy,
            "mcc": self.mcc,
            "confusion": {"tp": tp, "fp": fp, "tn": tn, "fn": fn},
        }


@dataclass(frozen=True)
class ExplanationMetrics:
    explanation_error: float
    sens_max: float
    sens_radius: float
    auc_morf: float
    morf_features_evaluated: int

    def to_dict(self) -> dict:
        return {
            "explanation_error": self.explanation_error,
            "sens_max": self.sens_max,
            "sens_radius": self.sens_radius,
            "auc_morf": self.auc_morf,
            "morf_features_evaluated": self.morf_features_evaluated,
        }


@dataclass(frozen=True)
class RobustnessMetrics:
    delta_adv: tuple[float, ...]
    mean_delta_adv: float | None
    lipschitz_lower: float
    pairs_evaluated: int

    def to_dict(self) -> dict:
        return {
            "delta_adv": list(self.delta_adv),
            "mean_delta_adv": self.mean_delta_adv,
            "lipschitz_lower": self.lipschitz_lower,
            "pairs_evaluated": self.pairs_evaluated,
        }


@dataclass(frozen=True)
class TimingMetrics:
    train_time: float
    predict_time: float
    explain_time: float

    def to_dict(self) -> dict:
        return {
            "train_time": self.train_time,
            "predict_time": self.predict_time,
            "explain_time": self.explain_time,
        }


# --- classification ---------------------------------------------------------

def auc_score(scores: np.ndarray, labels: np.ndarray) -> float:
    """Rank-based (Mann-Whitney) AUC with ties counted as 0.5."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if pos.size == 0 or neg.size == 0:
        raise SingleClassLabels("AUC needs both classes")
    ranks = rankdata(scores)
    u = ranks[labels == 1].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


def classification_metrics(scores, labels, threshold: float = 0.5) -> ClassificationMetrics:
    """FPR, AUC, balanced accuracy, and Matthews correlation at a threshold."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape or scores.size < 2:
        raise ValueError("scores and labels must be equal-length vectors (n >= 2)")
    if np.unique(labels).size < 2:
        raise SingleClassLabels("classification metrics need both classes")

    pred = (scores >= threshold).astype(np.int64)
    tp = int(np.sum((pred == 1) & (labels == 1)))
    fp = int(np.sum((pred == 1) & (labels == 0)))
    tn = int(np.sum((pred == 0) & (labels == 0)))
    fn = int(np.sum((pred == 0) & (labels == 1)))

    fpr = fp / (fp + tn)
    tpr = tp / (tp + fn)
    tnr = tn / (tn + fp)
    balanced = (tpr + tnr) / 2.0

    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = 0.0 if denom == 0 else (tp * tn - fp * fn) / np.sqrt(denom)

    return ClassificationMetrics(
        false_positive_rate=float(fpr),
        auc=auc_score(scores, labels),
        balanced_accuracy=float(balanced),
        mcc=float(mcc),
        confusion=(tp, fp, tn, fn),
    )


# --- explanation accuracy -----------------------------------------------------

def explanation_error(explain_fn, model, instances: np.ndarray,
                      background: Background, seed: int = 0) -> float:
    """Mean |(base + sum(phi)) - score(x)| over the instances."""
    instances = np.atleast_2d(np.asarray(instances, dtype=np.float64))
    scores = model.score(instances)
    errors = []
    for i, x in enumerate(instances):
        expl = explain_fn(model, x, background, seed=derive_seed(seed, "expl_err", i))
        errors.append(abs(expl.prediction() - float(scores[i])))
    return float(np.mean(errors))


# --- explanation stability ------------------------------------------------------

def sens_max(explain_fn, model, x, r: float, n_probes: int = 8,
             seed: int = 0, background: Background | None = None) -> float:
    """Maximum observed explanation shift under inf-ball input perturbations.

    Candidates: the 2d axis-extreme points x +- r*e_i, the two diagonal
    corners x +- r*1, and ``n_probes`` seeded uniform draws from the ball.
    All candidate explanations reuse the same derived seed (common random
    numbers), so sampled-mode noise does not register as sensitivity. The
    result is a lower bound on the true maximum.
    """
    if r < 0:
        raise ValueError("perturbation radius must be >= 0")
    if r == 0.0:
        return 0.0
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[0]

    candidates = [x + r * e for e in np.eye(d)] + [x - r * e for e in np.eye(d)]
    candidates.append(x + r * np.ones(d))
    candidates.append(x - r * np.ones(d))
    rng = np.random.default_rng(derive_seed(seed, "sens_probes"))
    for _ in range(int(n_probes)):
        candidates.append(x + rng.uniform(-r, r, size=d))

    expl_seed = derive_seed(seed, "sens_explain")
    phi0 = explain_fn(model, x, background, seed=expl_seed).phi
    worst = 0.0
    for cand in candidates:
        phi = explain_fn(model, cand, background, seed=expl_seed).phi
        worst = max(worst, float(np.linalg.norm(phi - phi0)))
    return worst


# --- degree of importance (perturbation curve) -----------------------------------

def morf_curve(explain_fn, model, x, K: int, background: Background,
               seed: int = 0, order: np.ndarray | None = None) -> np.ndarray:
    """Model scores along the most-relevant-first perturbation path.

    Point k replaces the top-k attributed features (ties broken by lower
    feature index) with the background mean; point 0 is the unperturbed
    instance. Returns K+1 scores.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[0]
    if not 1 <= K <= d:
        raise KOutOfRange(f"K={K} outside 1..{d}")
    if order is None:
        expl = explain_fn(model, x, background, seed=derive_seed(seed, "morf"))
        order = np.argsort(-np.abs(expl.phi), kind="stable")
    mean = background.mean()
    points = np.tile(x, (K + 1, 1))
    for k in range(1, K + 1):
        points[k:, order[k - 1]] = mean[order[k - 1]]
    return model.score(points)


def auc_morf(explain_fn, model, x, K: int, background: Background,
             seed: int = 0, order: np.ndarray | None = None) -> float:
    """Trapezoid area under the K-step perturbation curve (lower = more faithful)."""
    curve = morf_curve(explain_fn, model, x, K, background, seed=seed, order=order)
    return float(np.sum((curve[:-1] + curve[1:]) / 2.0))


# --- adversarial robustness ---------------------------------------------------

@dataclass(frozen=True)
class RobustnessProbe:
    delta: float
    witness: np.ndarray  # a point past the boundary with the flipped label


def _bisect_flip(score_at, base_label: int, threshold: float, lo: float,
                 hi: float, tol: float) -> float:
    """Shrink [lo, hi] with no flip at lo and a flip at hi down to tol."""
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if int(score_at(mid) >= threshold) != base_label:
            hi = mid
        else:
            lo = mid
    return hi


def adversarial_robustness_detail(model, x, candidates: np.ndarray,
                                  n_random_dirs: int = 4, seed: int = 0,
                                  tol: float = 1e-6) -> RobustnessProbe:
    """Minimum found L2 perturbation that flips the predicted label.

    Directions: toward every opposite-labeled candidate (a flip is certain
    on that segment) plus seeded random unit directions with an expanding
    search capped at 10x the data's bounding-box diagonal. The result is an
    upper bound on the true minimal perturbation.
    """
    x = np.asarray(x, dtype=np.float64)
    candidates = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    base_label = int(model.score(x[None, :])[0] >= model.threshold)

    extent = np.vstack([candidates, x[None, :]])
    diameter = float(np.linalg.norm(extent.max(axis=0) - extent.min(axis=0)))
    cap = 10.0 * diameter if diameter > 0 else 10.0

    directions: list[tuple[np.ndarray, float | None]] = []
    cand_labels = (model.score(candidates) >= model.threshold).astype(np.int64)
    for c, cl in zip(candidates, cand_labels):
        if int(cl) != base_label:
            dist = float(np.linalg.norm(c - x))
            if dist > 0:
                directions.append(((c - x) / dist, dist))
    rng = np.random.default_rng(derive_seed(seed, "adv_dirs"))
    for _ in range(int(n_random_dirs)):
        u = rng.normal(size=x.shape[0])
        norm = np.linalg.norm(u)
        if norm > 0:
            directions.append((u / norm, None))

    best: RobustnessProbe | None = None
    for unit, known_flip in directions:
        def score_at(t, _u=unit):
            return float(model.score((x + t * _u)[None, :])[0])

        if known_flip is None:
            # expanding search for any flip along the ray
            t, flip_at, prev = tol, None, 0.0
            while t <= cap:
                if int(score_at(t) >= model.threshold) != base_label:
                    flip_at = t
                    break
                prev, t = t, t * 2.0
            if flip_at is None:
                continue
            lo, hi = prev, flip_at
        else:
            lo, hi = 0.0, known_flip
        found = _bisect_flip(score_at, base_label, model.threshold, lo, hi, tol)
        if best is None or found < best.delta:
            best = RobustnessProbe(delta=float(found), witness=x + found * unit)

    if best is None:
        raise NoFlipFound("no probed direction flipped the predicted label")
    return best


def adversarial_robustness(model, x, candidates, n_random_dirs: int = 4,
                           seed: int = 0, tol: float = 1e-6) -> float:
    return adversarial_robustness_detail(model, x, candidates, n_random_dirs,
                                         seed, tol).delta


# --- Lipschitz lower bound ------------------------------------------------------

def lipschitz_lower_detail(model, instances: np.ndarray, max_pairs: int = 10000,
                           seed: int = 0) -> tuple[float, int]:
    """Max observed |score(x_i)-score(x_j)| / ||x_i-x_j||_2 over instance pairs.

    Evaluates all pairs when n(n-1)/2 <= max_pairs, else the first
    ``max_pairs`` distinct pairs of a seeded stream (prefixes are nested, so
    the bound never decreases as max_pairs grows). Returns (bound, pairs).
    """
    X = np.atleast_2d(np.asarray(instances, dtype=np.float64))
    n = X.shape[0]
    if n < 2:
        raise AllInstancesIdentical("need >= 2 instances")
    scores = model.score(X)

    total = n * (n - 1) // 2
    if total <= max_pairs:
        pairs_i, pairs_j = np.triu_indices(n, k=1)
    else:
        rng = np.random.default_rng(derive_seed(seed, "lipschitz_pairs"))
        chosen: dict[tuple[int, int], None] = {}
        while len(chosen) < max_pairs:
            draw = rng.integers(0, n, size=(max_pairs, 2))
            for a, b in draw:
                if a == b:
                    continue
                key = (int(min(a, b)), int(max(a, b)))
                if key not in chosen:
                    chosen[key] = None
                    if len(chosen) == max_pairs:
                        break
        keys = list(chosen)
        pairs_i = np.array([k[0] for k in keys])
        pairs_j = np.array([k[1] for k in keys])

    dists = np.linalg.norm(X[pairs_i] - X[pairs_j], axis=1)
    valid = dists > 0
    if not valid.any():
        raise AllInstancesIdentical("all evaluated instance pairs are identical")
    ratios = np.abs(scores[pairs_i[valid]] - scores[pairs_j[valid]]) / dists[valid]
    return float(ratios.max()), int(valid.sum())


def lipschitz_lower(model, instances, max_pairs: int = 10000, seed: int = 0) -> float:
    return lipschitz_lower_detail(model, instances, max_pairs, seed)[0]


# --- aggregation helpers for study runs ------------------------------------------

def explanation_metrics_suite(explain_fn, model, instances: np.ndarray,
                              background: Background, r: float = 0.01,
                              n_probes: int = 8, K: int = 5,
                              seed: int = 0) -> ExplanationMetrics:
    """Instance-averaged explanation accuracy, stability, and importance."""
    instances = np.atleast_2d(np.asarray(instances, dtype=np.float64))
    err = explanation_error(explain_fn, model, instances, background, seed=seed)
    sens_values = []
    morf_values = []
    K_eff = min(K, instances.shape[1])
    for i, x in enumerate(instances):
        sens_values.append(sens_max(explain_fn, model, x, r, n_probes,
                                    seed=derive_seed(seed, "sens", i),
                                    background=background))
        morf_values.append(auc_morf(explain_fn, model, x, K_eff, background,
                                    seed=derive_seed(seed, "morf", i)))
    return ExplanationMetrics(
        explanation_error=err,
        sens_max=float(np.mean(sens_values)),
        sens_radius=float(r),
        auc_morf=float(np.mean(morf_values)),
        morf_features_evaluated=int(K_eff),
    )


def robustness_metrics_suite(model, instances: np.ndarray, candidates: np.ndarray,
                             n_random_dirs: int = 4, max_pairs: int = 10000,
                             seed: int = 0) -> RobustnessMetrics:
    """Per-instance minimal perturbations plus the dataset Lipschitz bound."""
    instances = np.atleast_2d(np.asarray(instances, dtype=np.float64))
    deltas = []
    for i, x in enumerate(instances):
        try:
            deltas.append(adversarial_robustness(
                model, x, candidates, n_random_dirs,
                seed=derive_seed(seed, "adv", i)))
        except NoFlipFound:
            continue
    bound, pairs = lipschitz_lower_detail(model, instances, max_pairs,
                                          seed=derive_seed(seed, "lip"))
    return RobustnessMetrics(
        delta_adv=tuple(float(v) for v in deltas),
        mean_delta_adv=float(np.mean(deltas)) if deltas else None,
        lipschitz_lower=bound,
        pairs_evaluated=pairs,
    )
