"""Preprocessing: one-hot -> min-max -> optional PCA, fit on train only.

Run:  python3 demos/02_preprocessing_pipeline.py
"""

import numpy as np

from gridbench import (
    PipelineConfig,
    SyntheticSpec,
    apply_pipeline,
    fit_pipeline,
    generate_synthetic,
    split,
)

ds = generate_synthetic(SyntheticSpec(n=300, d_numeric=4, d_categorical=1,
                                      class_separation=2.0), seed=3)
pair = split(ds, 0.7, seed=3)

# Fit learns: per-category indicator columns (first-seen train order),
# per-column (min, max), and optionally a PCA projection.
pipeline = fit_pipeline(pair.train, PipelineConfig(use_onehot=True,
                                                   use_minmax=True))
X_train = apply_pipeline(pipeline, pair.train)
X_test = apply_pipeline(pipeline, pair.test)
print("post-encoding dimension:", pipeline.output_dimension)
print("train column ranges: min", X_train.min(axis=0).round(3))
print("                     max", X_train.max(axis=0).round(3))

# Test values outside the train envelope are NOT clipped; leaving [0, 1]
# is useful signal for anomaly detection.
print("test range overall: [%.3f, %.3f]" % (X_test.min(), X_test.max()))

# PCA variant: components sorted by descending eigenvalue, signs pinned so
# each component's largest-magnitude loading is positive.
pca_pipeline = fit_pipeline(pair.train, PipelineConfig(use_pca=True,
                                                       pca_components=3))
X_pca = apply_pipeline(pca_pipeline, pair.test)
print("\nPCA output shape:", X_pca.shape)
print("explained variance ratios:",
      np.round(pca_pipeline.pca_variance_ratios, 4))
print("fitted parameter digest:", pca_pipeline.parameter_digest()[:16], "...")
