"""Dataset ingestion, synthetic generation, and deterministic splitting.

A :class:`Dataset` holds raw cell values (numeric features as floats,
categorical features as strings) in an immutable object-dtype matrix plus
binary labels and per-feature descriptors. Loading goes through a JSON
manifest so the harness never guesses label encodings; the synthetic
generator is the desk-scale stand-in for public dataset suites.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .canonical import canonical_float, sha256_hex
from .errors import (
    DegenerateSplit,
    InvalidSpec,
    MalformedManifest,
    MissingFile,
    NonBinaryLabel,
    UnknownLabelColumn,
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureDescriptor:
    """Name and kind of one input feature; categories learned from data."""

    name: str
    kind: str
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise InvalidSpec(f"unknown feature kind {self.kind!r} for {self.name!r}")
        if self.kind == CATEGORICAL and len(self.categories) < 1:
            raise InvalidSpec(f"categorical feature {self.name!r} has no categories")


def _canonical_cell(value, kind: str) -> str:
    if kind == NUMERIC:
        return canonical_float(float(value))
    return str(value)


def _content_hash(features: np.ndarray, labels: np.ndarray,
                  descriptors: list[FeatureDescriptor]) -> str:
    """Hash of a canonical UTF-8 CSV of cells, labels, and descriptors."""
    lines = []
    for desc in descriptors:
        lines.append("#desc," + desc.name + "," + desc.kind + ","
                     + "|".join(desc.categories))
    for i in range(features.shape[0]):
        cells = [_canonical_cell(features[i, j], descriptors[j].kind)
                 for j in range(features.shape[1])]
        cells.append(str(int(labels[i])))
        lines.append(",".join(cells))
    return sha256_hex("\n".join(lines))


@dataclass(frozen=True)
class Dataset:
    """Labeled binary-class tabular data with provenance metadata.

    ``features`` is an (n, d) object array; numeric cells are floats and
    categorical cells are strings. ``labels`` is an (n,) int array of
    0=normal / 1=anomaly. Both arrays are frozen after construction.
    """

    name: str
    features: np.ndarray
    labels: np.ndarray
    descriptors: tuple[FeatureDescriptor, ...]
    purdue_level: int | None = None
    metadata: dict = field(default_factory=dict)
    content_hash: str = ""

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=object)
        labels = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2 or feats.shape[0] < 1:
            raise InvalidSpec("dataset needs a non-empty 2-D feature matrix")
        n, d = feats.shape
        if labels.shape != (n,):
            raise InvalidSpec("labels length must match the number of rows")
        if not np.all(np.isin(labels, (0, 1))):
            raise NonBinaryLabel(f"labels of {self.name!r} contain values outside {{0,1}}")
        if len(self.descriptors) != d:
            raise InvalidSpec("descriptor count must equal the column count")
        names = [desc.name for desc in self.descriptors]
        if len(set(names)) != len(names):
            raise InvalidSpec("duplicate feature names")
        if self.purdue_level is not None and not 0 <= self.purdue_level <= 5:
            raise InvalidSpec("purdue_level must be in 0..5")
        feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "descriptors", tuple(self.descriptors))
        object.__setattr__(
            self, "content_hash",
            _content_hash(feats, labels, list(self.descriptors)))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def take(self, indices: np.ndarray, name: str) -> "Dataset":
        """New dataset from a row subset (descriptors and metadata carried over)."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            name=name,
            features=self.features[idx].copy(),
            labels=self.labels[idx].copy(),
            descriptors=self.descriptors,
            purdue_level=self.purdue_level,
            metadata=dict(self.metadata),
        )


@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset
    split_seed: int
    train_fraction: float


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for the seeded two-blob synthetic generator."""

    n: int
    d_numeric: int = 4
    d_categorical: int = 0
    anomaly_fraction: float = 0.3
    class_separation: float = 2.0
    categories_per_feature: int = 3
    name: str = "synthetic"
    purdue_level: int | None = None

    def validate(self):
        if self.n < 10:
            raise InvalidSpec("synthetic spec needs n >= 10")
        if not 0.0 < self.anomaly_fraction < 1.0:
            raise InvalidSpec("anomaly_fraction must be in (0, 1)")
        if self.class_separation < 0.0:
            raise InvalidSpec("class_separation must be >= 0")
        if self.d_numeric < 0 or self.d_categorical < 0 or self.d_numeric + self.d_categorical < 1:
            raise InvalidSpec("need at least one feature column")
        if self.d_categorical > 0 and self.categories_per_feature < 2:
            raise InvalidSpec("categorical features need >= 2 categories")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d_numeric": self.d_numeric,
            "d_categorical": self.d_categorical,
            "anomaly_fraction": self.anomaly_fraction,
            "class_separation": self.class_separation,
            "categories_per_feature": self.categories_per_feature,
            "name": self.name,
            "purdue_level": self.purdue_level,
        }


def generate_synthetic(spec: SyntheticSpec, seed: int) -> Dataset:
    """Seeded synthetic dataset: two Gaussian blobs plus class-conditional categories.

    Numeric feature j is N(0, 1) for normals and N(class_separation, 1) for
    anomalies. Categorical features draw from per-class category weights
    exp(-+ class_separation * k / (C-1)); at separation 0 both classes are
    uniform, so labels carry no signal.
    """
    spec.validate()
    rng = np.random.default_rng(seed)

    n_anom = int(np.floor(spec.n * spec.anomaly_fraction + 0.5))
    n_anom = max(1, min(spec.n - 1, n_anom))
    labels = np.zeros(spec.n, dtype=np.int64)
    labels[:n_anom] = 1
    rng.shuffle(labels)

    features = np.empty((spec.n, spec.d_numeric + spec.d_categorical), dtype=object)
    if spec.d_numeric > 0:
        means = labels[:, None] * spec.class_separation
        numeric = rng.normal(loc=0.0, scale=1.0, size=(spec.n, spec.d_numeric)) + means
        for j in range(spec.d_numeric):
            features[:, j] = numeric[:, j]

    descriptors = [FeatureDescriptor(f"num_{j}", NUMERIC)
                   for j in range(spec.d_numeric)]

    if spec.d_categorical > 0:
        c = spec.categories_per_feature
        cats = tuple(f"cat_{k}" for k in range(c))
        grid = np.arange(c) / (c - 1)
        w0 = np.exp(-spec.class_separation * grid)
        w1 = np.exp(spec.class_separation * grid)
        p0, p1 = w0 / w0.sum(), w1 / w1.sum()
        for j in range(spec.d_categorical):
            draws = np.where(labels == 1,
                             rng.choice(c, size=spec.n, p=p1),
                             rng.choice(c, size=spec.n, p=p0))
            col = spec.d_numeric + j
            features[:, col] = np.array([cats[k] for k in draws], dtype=object)
            descriptors.append(FeatureDescriptor(f"sym_{j}", CATEGORICAL, cats))

    return Dataset(
        name=spec.name,
        features=features,
        labels=labels,
        descriptors=tuple(descriptors),
        purdue_level=spec.purdue_level,
        metadata={"synthetic_spec": spec.to_dict(), "generator_seed": int(seed)},
    )


def _read_manifest(manifest_path) -> dict:
    path = Path(manifest_path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise MalformedManifest(f"manifest {path} is not valid JSON: {exc}") from exc
    for key in ("csv_path", "label_column", "positive_label_values", "columns"):
        if key not in manifest:
            raise MalformedManifest(f"manifest {path} missing required field {key!r}")
    for col in manifest["columns"]:
        if not isinstance(col, dict) or "name" not in col or "kind" not in col:
            raise MalformedManifest("every manifest column needs 'name' and 'kind'")
        if col["kind"] not in (NUMERIC, CATEGORICAL):
            raise MalformedManifest(f"unknown column kind {col['kind']!r}")
    return manifest


def load_csv(manifest_path) -> Dataset:
    """Load a dataset described by a JSON manifest.

    Manifest fields: csv_path (relative paths resolve against the manifest),
    label_column, positive_label_values, optional negative_label_values,
    columns [{name, kind}], optional purdue_level and name. The CSV needs a
    header row. Rows with any missing cell are dropped; the drop count lands
    in ``metadata``.
    """
    manifest = _read_manifest(manifest_path)
    base = Path(manifest_path).parent
    csv_path = Path(manifest["csv_path"])
    if not csv_path.is_absolute():
        csv_path = base / csv_path
    if not csv_path.is_file():
        raise MissingFile(f"CSV not found: {csv_path}")

    with open(csv_path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedManifest(f"CSV {csv_path} is empty") from None
        rows = list(reader)

    label_column = manifest["label_column"]
    if label_column not in header:
        raise UnknownLabelColumn(f"label column {label_column!r} not in CSV header")
    label_idx = header.index(label_column)

    column_specs = manifest["columns"]
    feature_names = [c["name"] for c in column_specs]
    for name in feature_names:
        if name not in header:
            raise MalformedManifest(f"manifest column {name!r} not in CSV header")
    if label_column in feature_names:
        raise MalformedManifest("label column must not be listed among feature columns")
    col_idx = [header.index(name) for name in feature_names]
    kinds = [c["kind"] for c in column_specs]

    positive = {str(v) for v in manifest["positive_label_values"]}
    declared_negative = manifest.get("negative_label_values")
    negative = None if declared_negative is None else {str(v) for v in declared_negative}

    kept_cells: list[list] = []
    raw_labels: list[str] = []
    dropped = 0
    for row in rows:
        if len(row) != len(header) or any(row[i].strip() == "" for i in col_idx + [label_idx]):
            dropped += 1
            continue
        cells = []
        try:
            for i, kind in zip(col_idx, kinds):
                cells.append(float(row[i]) if kind == NUMERIC else row[i])
        except ValueError:
            # unparsable numeric cell counts as a missing value
            dropped += 1
            continue
        kept_cells.append(cells)
        raw_labels.append(row[label_idx].strip())

    if not kept_cells:
        raise MalformedManifest(f"no usable rows in {csv_path}")

    # Without an explicit normal set, binary-ness requires the non-anomaly
    # remainder to be a single distinct value.
    if negative is None:
        others = sorted({raw for raw in raw_labels if raw not in positive})
        if len(others) > 1:
            raise NonBinaryLabel(
                f"label column has multiple non-anomaly values {others}; "
                "declare negative_label_values in the manifest")
        kept_labels = [1 if raw in positive else 0 for raw in raw_labels]
    else:
        kept_labels = []
        for raw in raw_labels:
            if raw in positive:
                kept_labels.append(1)
            elif raw in negative:
                kept_labels.append(0)
            else:
                raise NonBinaryLabel(f"label value {raw!r} outside declared label sets")

    features = np.empty((len(kept_cells), len(feature_names)), dtype=object)
    for i, cells in enumerate(kept_cells):
        for j, value in enumerate(cells):
            features[i, j] = value

    descriptors = []
    for j, (name, kind) in enumerate(zip(feature_names, kinds)):
        if kind == CATEGORICAL:
            seen: list[str] = []
            for value in features[:, j]:
                if value not in seen:
                    seen.append(value)
            descriptors.append(FeatureDescriptor(name, CATEGORICAL, tuple(seen)))
        else:
            descriptors.append(FeatureDescriptor(name, NUMERIC))

    return Dataset(
        name=manifest.get("name", csv_path.stem),
        features=features,
        labels=np.array(kept_labels, dtype=np.int64),
        descriptors=tuple(descriptors),
        purdue_level=manifest.get("purdue_level"),
        metadata={"source_csv": str(csv_path), "dropped_rows": dropped,
                  "manifest": str(Path(manifest_path))},
    )


def split(ds: Dataset, train_fraction: float, seed: int) -> SplitPair:
    """Stratified shuffle split, deterministic in seed.

    Per-class train counts round half away from zero; raises
    DegenerateSplit if any class would vanish from either part.
    """
    if not 0.0 < train_fraction < 1.0:
        raise InvalidSpec("train_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for cls in (0, 1):
        members = np.flatnonzero(ds.labels == cls)
        if members.size == 0:
            raise DegenerateSplit(f"class {cls} absent from dataset {ds.name!r}")
        n_train = int(np.floor(train_fraction * members.size + 0.5))
        if n_train < 1 or n_train >= members.size:
            raise DegenerateSplit(
                f"class {cls} would be absent from one part "
                f"({members.size} rows at fraction {train_fraction})")
        order = rng.permutation(members.size)
        train_idx.append(members[order[:n_train]])
        test_idx.append(members[order[n_train:]])

    train_rows = np.sort(np.concatenate(train_idx))
    test_rows = np.sort(np.concatenate(test_idx))
    return SplitPair(
        train=ds.take(train_rows, f"{ds.name}/train"),
        test=ds.take(test_rows, f"{ds.name}/test"),
        split_seed=int(seed),
        train_fraction=float(train_fraction),
    )
