"""Classifiers: logreg / CART / MLP from scratch, plus a stacked ensemble.

Run:  python3 demos/03_classifiers_and_stacking.py
"""

from gridbench import (
    PipelineConfig,
    SyntheticSpec,
    apply_pipeline,
    classification_metrics,
    fit_pipeline,
    generate_synthetic,
    split,
    train,
    train_stack,
)

ds = generate_synthetic(SyntheticSpec(n=400, d_numeric=5, class_separation=1.5),
                        seed=21)
pair = split(ds, 0.7, seed=21)
pipeline = fit_pipeline(pair.train, PipelineConfig())
X_train = apply_pipeline(pipeline, pair.train)
X_test = apply_pipeline(pipeline, pair.test)
y_train, y_test = pair.train.labels, pair.test.labels

# Single models. Training is a pure function of (data, hyper, seed):
# full-batch gradient descent, fixed epochs, deterministic tree tie-breaks.
for kind in ("logreg", "tree", "mlp"):
    model = train(kind, X_train, y_train, seed=5)
    m = classification_metrics(model.score(X_test), y_test, model.threshold)
    print(f"{kind:>6}: auc={m.auc:.3f} fpr={m.false_positive_rate:.3f} "
          f"bal_acc={m.balanced_accuracy:.3f} mcc={m.mcc:.3f}")

# Stacking: first-level models train on everything; the second level trains
# on out-of-fold first-level scores (no leakage). Identical (data, specs,
# seed) give bit-identical ensembles.
ens = train_stack(
    first_specs=[("logreg", {}), ("tree", {}), ("mlp", {})],
    second_spec=("logreg", {}),
    X=X_train, y=y_train, folds=5, seed=5)
m = classification_metrics(ens.score(X_test), y_test, ens.threshold)
print(f"\n stack: auc={m.auc:.3f} fpr={m.false_positive_rate:.3f} "
      f"bal_acc={m.balanced_accuracy:.3f} mcc={m.mcc:.3f}")
print("second-level input = first-level score vector:",
      ens.first_level_scores(X_test[:1]).round(3))
print("parameter digest:", ens.parameter_digest()[:16], "...")
