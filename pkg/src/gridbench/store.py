"""File-backed document store for study records.

Documents are canonical JSON (sorted keys, 17-significant-digit floats) so
reloading and re-serializing a record is byte-identical. The schema is
closed: unknown fields are violations, which keeps silent drift impossible.
Writers serialize through an advisory lock file; readers never block.
"""

from __future__ import annotations

import fcntl
import json
import os
import platform
import uuid
import warnings
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import jsonschema

from .canonical import canonical_json, sha256_hex
from .errors import CorruptIndex, GridBenchError, NotFound, SchemaViolation

SCHEMA_VERSION = "1"

# Static linked-data context shipped with every record; no resolution is
# performed, the store only demonstrates the documents are JSON-LD ready.
LD_CONTEXT = {
    "@vocab": "https://gridbench.invalid/terms#",
    "study_id": "https://gridbench.invalid/terms#studyIdentifier",
    "datasets": "https://gridbench.invalid/terms#datasetDescriptor",
    "models": "https://gridbench.invalid/terms#modelDescriptor",
    "metrics": "https://gridbench.invalid/terms#metricReport",
    "comparison": "https://gridbench.invalid/terms#comparisonResult",
    "environment": "https://gridbench.invalid/terms#environmentInfo",
}

_NUMBER = {"type": "number"}
_INT = {"type": "integer"}
_STR = {"type": "string"}
_BOOL = {"type": "boolean"}


def _obj(properties: dict, required: list[str] | None = None) -> dict:
    return {
        "type": "object",
        "properties": properties,
        "required": sorted(properties) if required is None else required,
        "additionalProperties": False,
    }


_CLASSIFICATION = _obj({
    "false_positive_rate": _NUMBER,
    "auc": _NUMBER,
    "balanced_accuracy": _NUMBER,
    "mcc": _NUMBER,
    "confusion": _obj({"tp": _INT, "fp": _INT, "tn": _INT, "fn": _INT}),
})

_EXPLANATION = _obj({
    "explanation_error": _NUMBER,
    "sens_max": _NUMBER,
    "sens_radius": _NUMBER,
    "auc_morf": _NUMBER,
    "morf_features_evaluated": _INT,
})

_ROBUSTNESS = _obj({
    "delta_adv": {"type": "array", "items": _NUMBER},
    "mean_delta_adv": {"type": ["number", "null"]},
    "lipschitz_lower": _NUMBER,
    "pairs_evaluated": _INT,
})

_TIMINGS = _obj({
    "train_time": _NUMBER,
    "predict_time": _NUMBER,
    "explain_time": _NUMBER,
})

# Incomputable tests keep the object shape with null members so the schema
# stays inside the subset (types, required, enum, closed objects).
_WILCOXON = _obj({
    "statistic": {"type": ["number", "null"]},
    "p_value": {"type": ["number", "null"]},
    "n_effective": {"type": ["integer", "null"]},
    "method": {"enum": ["exact", "normal_approximation", None]},
})

_BOOTSTRAP = _obj({
    "low": _NUMBER,
    "high": _NUMBER,
    "level": _NUMBER,
    "n_resamples": _INT,
    "method": {"enum": ["bca", "percentile", "degenerate"]},
    "seed": _INT,
})

_COMPARISON = _obj({
    "metric_name": _STR,
    "point_estimate": _NUMBER,
    "a_values": {"type": "array", "items": _NUMBER},
    "b_values": {"type": "array", "items": _NUMBER},
    "wilcoxon": _WILCOXON,
    "wilcoxon_incomputable": {"type": ["string", "null"]},
    "cohens_d": {"type": ["number", "null"]},
    "cohens_d_incomputable": {"type": ["string", "null"]},
    "effect_label": {"enum": ["small", "medium", "large", None]},
    "effect_size_buckets": _obj({"small_max": _NUMBER, "medium_max": _NUMBER}),
    "bootstrap_ci": _BOOTSTRAP,
})

STUDY_RECORD_SCHEMA = _obj({
    "study_id": _STR,
    "created_at": _STR,
    "schema_version": _STR,
    "ld_context": _obj({key: _STR for key in LD_CONTEXT}),
    "master_seed": _INT,
    "datasets": {"type": "array", "items": _obj({
        "name": _STR,
        "content_hash": _STR,
        "purdue_level": {"type": ["integer", "null"]},
        "split_seed": _INT,
        "train_fraction": _NUMBER,
        "synthetic_spec": {"type": ["object", "null"]},
        "n_rows": _INT,
        "n_train": _INT,
        "n_test": _INT,
        "dropped_rows": _INT,
        "train_content_hash": _STR,
        "test_content_hash": _STR,
    })},
    "preprocessing": _obj({
        "config": _obj({
            "use_onehot": _BOOL,
            "use_minmax": _BOOL,
            "use_pca": _BOOL,
            "pca_components": {"type": ["integer", "null"]},
        }),
        "fitted": {"type": "array", "items": _obj({
            "dataset": _STR,
            "parameter_digest": _STR,
            "output_dimension": _INT,
        })},
    }),
    "models": {"type": "array", "items": _obj({
        "algorithm": _STR,
        "dataset": _STR,
        "kind": {"enum": ["logreg", "tree", "mlp", "stack"]},
        "hyperparameters": {"type": "object"},
        "train_seed": _INT,
        "threshold": _NUMBER,
        "parameter_digest": _STR,
    })},
    "explainers": {"type": "array", "items": _obj({
        "algorithm": _STR,
        "dataset": _STR,
        "kind": {"enum": ["blackbox", "basic_join"]},
        "mode": {"enum": ["auto", "exact", "sampled"]},
        "n_samples": _INT,
        "background_size": _INT,
        "background_seed": _INT,
    })},
    "metrics_config": _obj({
        "statistics": _BOOL,
        "sens_radius": _NUMBER,
        "morf_k": _INT,
        "n_probes": _INT,
        "explain_instances": _INT,
        "robustness_instances": _INT,
        "n_random_dirs": _INT,
        "lipschitz_max_pairs": _INT,
        "bootstrap_resamples": _INT,
        "confidence_level": _NUMBER,
    }),
    "metrics": {"type": "array", "items": _obj({
        "algorithm": _STR,
        "dataset": _STR,
        "classification": _CLASSIFICATION,
        "explanation": _EXPLANATION,
        "robustness": _ROBUSTNESS,
        "timings": _TIMINGS,
    })},
    "comparison": {"type": "array", "items": _COMPARISON},
    "environment": _obj({
        "cpu_model": _STR,
        "logical_cores": _INT,
        "ram_bytes": _INT,
        "os": _STR,
        "artifact_version": _STR,
    }),
    "timings": _obj({"total_seconds": _NUMBER}),
    "reproducibility_digest": _STR,
})

# Fields a rerun cannot reproduce; everything else feeds the digest.
DIGEST_EXCLUDED_FIELDS = ("study_id", "created_at", "environment", "timings",
                          "reproducibility_digest")
# Wall-clock metrics stay in the record (their comparison is itself a
# reported result) but never enter the digest.
TIMING_METRIC_NAMES = ("train_time", "predict_time", "explain_time")


@dataclass(frozen=True)
class EnvironmentInfo:
    cpu_model: str
    logical_cores: int
    ram_bytes: int
    os: str
    artifact_version: str

    def to_dict(self) -> dict:
        return {
            "cpu_model": self.cpu_model,
            "logical_cores": self.logical_cores,
            "ram_bytes": self.ram_bytes,
            "os": self.os,
            "artifact_version": self.artifact_version,
        }


def _read_cpu_model() -> str:
    try:
        with open("/proc/cpuinfo", encoding="utf-8") as handle:
            for line in handle:
                if line.lower().startswith("model name"):
                    return line.split(":", 1)[1].strip()
    except OSError:
        pass
    return platform.processor() or platform.machine() or "unknown"


def capture_environment() -> EnvironmentInfo:
    """Best-effort host introspection; failures degrade to 'unknown', never raise."""
    from . import __version__

    try:
        cpu = _read_cpu_model()
    except Exception:  # introspection must be total
        warnings.warn("CPU model could not be determined")
        cpu = "unknown"
    try:
        cores = os.cpu_count() or 0
    except Exception:
        cores = 0
    try:
        ram = os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_PHYS_PAGES")
    except (OSError, ValueError, AttributeError):
        warnings.warn("RAM size could not be determined")
        ram = 0
    try:
        os_name = f"{platform.system()} {platform.release()}"
    except Exception:
        os_name = "unknown"
    return EnvironmentInfo(
        cpu_model=cpu or "unknown",
        logical_cores=int(cores),
        ram_bytes=int(ram),
        os=os_name or "unknown",
        artifact_version=__version__,
    )


def new_study_id() -> str:
    return str(uuid.uuid4())


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def validate(document: dict) -> list[str]:
    """Validate against the study-record schema; returns JSON-pointer violations."""
    validator = jsonschema.Draft202012Validator(STUDY_RECORD_SCHEMA)
    violations = []
    for error in sorted(validator.iter_errors(document),
                        key=lambda e: list(map(str, e.absolute_path))):
        pointer = "/" + "/".join(str(p) for p in error.absolute_path)
        if pointer == "/":
            pointer = ""
        violations.append(f"{pointer}: {error.message}")
    return violations


def reproducibility_digest(record: dict) -> str:
    """Hash over all seed/config/metric content (timings and host excluded)."""
    doc = {k: v for k, v in record.items() if k not in DIGEST_EXCLUDED_FIELDS}
    if "metrics" in doc:
        doc["metrics"] = [{k: v for k, v in entry.items() if k != "timings"}
                          for entry in doc["metrics"]]
    if "comparison" in doc:
        doc["comparison"] = [c for c in doc["comparison"]
                             if c.get("metric_name") not in TIMING_METRIC_NAMES]
    return sha256_hex(canonical_json(doc))


class DocumentStore:
    """Directory of schema-validated study records plus an index file.

    Layout: <root>/records/<study_id>.json, <root>/index.json,
    <root>/schema/<version>.json.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.records_dir = self.root / "records"
        self.records_dir.mkdir(parents=True, exist_ok=True)
        schema_dir = self.root / "schema"
        schema_dir.mkdir(exist_ok=True)
        schema_path = schema_dir / f"{SCHEMA_VERSION}.json"
        if not schema_path.exists():
            self._atomic_write(schema_path,
                               canonical_json(STUDY_RECORD_SCHEMA).encode("utf-8"))

    @property
    def index_path(self) -> Path:
        return self.root / "index.json"

    def _atomic_write(self, path: Path, data: bytes):
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "wb") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)

    def save(self, record: dict) -> str:
        violations = validate(record)
        if violations:
            raise SchemaViolation(violations)
        study_id = record["study_id"]
        if (self.records_dir / f"{study_id}.json").exists():
            raise GridBenchError(
                f"record {study_id} already exists; records are immutable")
        payload = canonical_json(record).encode("utf-8")
        lock_path = self.root / ".lock"
        with open(lock_path, "w") as lock:
            fcntl.flock(lock, fcntl.LOCK_EX)
            try:
                self._atomic_write(self.records_dir / f"{study_id}.json", payload)
                index = self._load_index(rebuild_on_corruption=True)
                index["records"][study_id] = self._summary(record)
                self._atomic_write(self.index_path,
                                   canonical_json(index).encode("utf-8"))
            finally:
                fcntl.flock(lock, fcntl.LOCK_UN)
        return study_id

    @staticmethod
    def _summary(record: dict) -> dict:
        return {
            "study_id": record["study_id"],
            "created_at": record["created_at"],
            "dataset_names": [d["name"] for d in record.get("datasets", [])],
            "dataset_hashes": [d["content_hash"] for d in record.get("datasets", [])],
            "model_kinds": sorted({m["kind"] for m in record.get("models", [])}),
            "reproducibility_digest": record.get("reproducibility_digest", ""),
        }

    def load_bytes(self, study_id: str) -> bytes:
        path = self.records_dir / f"{study_id}.json"
        if not path.is_file():
            raise NotFound(f"no record {study_id!r} in {self.root}")
        return path.read_bytes()

    def load(self, study_id: str) -> dict:
        return json.loads(self.load_bytes(study_id).decode("utf-8"))

    def _load_index(self, rebuild_on_corruption: bool = False) -> dict:
        if not self.index_path.exists():
            return self.rebuild_index(write=False)
        try:
            index = json.loads(self.index_path.read_text(encoding="utf-8"))
            if not isinstance(index, dict) or "records" not in index:
                raise ValueError("index missing 'records'")
            return index
        except (ValueError, OSError) as exc:
            if rebuild_on_corruption:
                return self.rebuild_index(write=False)
            raise CorruptIndex(f"index unreadable: {exc}") from exc

    def rebuild_index(self, write: bool = True) -> dict:
        """Reconstruct the index from the record documents on disk."""
        index = {"records": {}}
        for path in sorted(self.records_dir.glob("*.json")):
            try:
                record = json.loads(path.read_text(encoding="utf-8"))
            except ValueError:
                continue
            index["records"][record.get("study_id", path.stem)] = self._summary(record)
        if write:
            self._atomic_write(self.index_path, canonical_json(index).encode("utf-8"))
        return index

    def query(self, dataset_name: str | None = None, model_kind: str | None = None,
              date_range: tuple[str, str] | None = None) -> list[dict]:
        """Record summaries matching every given filter; never mutates."""
        try:
            index = self._load_index()
        except CorruptIndex:
            index = self.rebuild_index(write=False)
        out = []
        for summary in index["records"].values():
            if dataset_name is not None and dataset_name not in summary["dataset_names"]:
                continue
            if model_kind is not None and model_kind not in summary["model_kinds"]:
                continue
            if date_range is not None:
                lo, hi = date_range
                if not lo <= summary["created_at"] <= hi:
                    continue
            out.append(summary)
        return sorted(out, key=lambda s: (s["created_at"], s["study_id"]))
