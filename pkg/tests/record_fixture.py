"""A small, schema-valid study record used across store/report/CLI tests."""

import copy

from gridbench.store import LD_CONTEXT, SCHEMA_VERSION, reproducibility_digest


def _metric_entry(algorithm, dataset, shift=0.0):
    return {
        "algorithm": algorithm,
        "dataset": dataset,
        "classification": {
            "false_positive_rate": 0.1 + shift,
            "auc": 0.9 - shift,
            "balanced_accuracy": 0.85,
            "mcc": 0.7,
            "confusion": {"tp": 8, "fp": 1, "tn": 9, "fn": 2},
        },
        "explanation": {
            "explanation_error": 0.01 + shift,
            "sens_max": 0.02 + shift,
            "sens_radius": 0.01,
            "auc_morf": 2.1,
            "morf_features_evaluated": 5,
        },
        "robustness": {
            "delta_adv": [0.2, 0.3],
            "mean_delta_adv": 0.25,
            "lipschitz_lower": 1.5,
            "pairs_evaluated": 10,
        },
        "timings": {
            "train_time": 0.5,
            "predict_time": 0.01,
            "explain_time": 1.25 + shift,
        },
    }


def minimal_record(study_id="00000000-0000-4000-8000-000000000000",
                   created_at="2026-01-01T00:00:00.000000Z"):
    record = {
        "study_id": study_id,
        "created_at": created_at,
        "schema_version": SCHEMA_VERSION,
        "ld_context": dict(LD_CONTEXT),
        "master_seed": 7,
        "datasets": [
            {
                "name": name,
                "content_hash": "c" * 64,
                "purdue_level": None,
                "split_seed": 11,
                "train_fraction": 0.7,
                "synthetic_spec": {"n": 100},
                "n_rows": 100,
                "n_train": 70,
                "n_test": 30,
                "dropped_rows": 0,
                "train_content_hash": "d" * 64,
                "test_content_hash": "e" * 64,
            }
            for name in ("ds_one", "ds_two")
        ],
        "preprocessing": {
            "config": {"use_onehot": True, "use_minmax": True,
                       "use_pca": False, "pca_components": None},
            "fitted": [
                {"dataset": "ds_one", "parameter_digest": "f" * 64,
                 "output_dimension": 5},
                {"dataset": "ds_two", "parameter_digest": "a" * 64,
                 "output_dimension": 5},
            ],
        },
        "models": [
            {"algorithm": algo, "dataset": ds, "kind": "stack",
             "hyperparameters": {"folds": 5}, "train_seed": 123,
             "threshold": 0.5, "parameter_digest": "b" * 64}
            for algo in ("a", "b") for ds in ("ds_one", "ds_two")
        ],
        "explainers": [
            {"algorithm": "a", "dataset": ds, "kind": "blackbox",
             "mode": "auto", "n_samples": 2000, "background_size": 50,
             "background_seed": 5}
            for ds in ("ds_one", "ds_two")
        ] + [
            {"algorithm": "b", "dataset": ds, "kind": "basic_join",
             "mode": "auto", "n_samples": 2000, "background_size": 50,
             "background_seed": 5}
            for ds in ("ds_one", "ds_two")
        ],
        "metrics_config": {
            "statistics": True,
            "sens_radius": 0.01,
            "morf_k": 5,
            "n_probes": 8,
            "explain_instances": 12,
            "robustness_instances": 8,
            "n_random_dirs": 4,
            "lipschitz_max_pairs": 2000,
            "bootstrap_resamples": 5000,
            "confidence_level": 0.95,
        },
        "metrics": [
            _metric_entry("a", "ds_one"),
            _metric_entry("a", "ds_two", shift=0.002),
            _metric_entry("b", "ds_one", shift=0.01),
            _metric_entry("b", "ds_two", shift=0.015),
        ],
        "comparison": [
            {
                "metric_name": "sens_max",
                "point_estimate": -0.0115,
                "a_values": [0.02, 0.022],
                "b_values": [0.03, 0.035],
                "wilcoxon": {"statistic": 0.0, "p_value": 0.5,
                             "n_effective": 2, "method": "exact"},
                "wilcoxon_incomputable": None,
                "cohens_d": -2.5,
                "cohens_d_incomputable": None,
                "effect_label": "large",
                "effect_size_buckets": {"small_max": 0.35, "medium_max": 0.65},
                "bootstrap_ci": {"low": -0.015, "high": -0.008, "level": 0.95,
                                 "n_resamples": 5000, "method": "bca",
                                 "seed": 9},
            }
        ],
        "environment": {
            "cpu_model": "test-cpu",
            "logical_cores": 4,
            "ram_bytes": 8_000_000_000,
            "os": "Linux test",
            "artifact_version": "0.1.0",
        },
        "timings": {"total_seconds": 12.5},
    }
    record["reproducibility_digest"] = reproducibility_digest(record)
    return copy.deepcopy(record)
