"""Record featurization: schema inference, vector encoding, bucketing.

Records are plain dicts of raw field values (as read from CSV).  A
FeatureSchema freezes everything learned from the training data (means,
deviations, vocabularies) so evaluation data is encoded identically.
"""

from __future__ import annotations

import csv
import hashlib
import string
from dataclasses import dataclass
from datetime import datetime
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .serialize import canonical_digest, read_json, write_json

FIELD_KINDS = ("continuous", "categorical", "domain_charcount")

# Character inventory for domain-name count vectors: one slot per legal
# domain character, dot included so label structure is represented.
DOMAIN_ALPHABET = string.ascii_lowercase + string.ascii_uppercase + string.digits + "-."

SCHEMA_FORMAT = "feature-schema"
SCHEMA_FORMAT_VERSION = 1

_WEEKDAYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")


@dataclass(frozen=True)
class FieldSpec:
    """How one raw field expands into feature columns.

    continuous: one column, (value - mean) / std with the population std
    of the training data.  categorical: one column per vocabulary entry
    (first-seen order); unknown values encode as all zeros.
    domain_charcount: one count column per alphabet character.
    """

    name: str
    kind: str
    mean: float = 0.0
    std: float = 1.0
    vocabulary: tuple = ()
    alphabet: str = ""

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ConfigError(f"unknown field kind {self.kind!r}; expected one of {FIELD_KINDS}")
        if self.kind == "continuous" and not (np.isfinite(self.std) and self.std > 0):
            raise DataError(f"field {self.name!r}: std must be positive, got {self.std!r}")
        if self.kind == "categorical":
            if not self.vocabulary:
                raise DataError(f"field {self.name!r}: empty categorical vocabulary")
            if len(set(self.vocabulary)) != len(self.vocabulary):
                raise DataError(f"field {self.name!r}: vocabulary entries must be unique")
        if self.kind == "domain_charcount":
            if not self.alphabet:
                raise DataError(f"field {self.name!r}: empty charcount alphabet")
            if len(set(self.alphabet)) != len(self.alphabet):
                raise DataError(f"field {self.name!r}: alphabet characters must be unique")

    @property
    def width(self) -> int:
        if self.kind == "continuous":
            return 1
        if self.kind == "categorical":
            return len(self.vocabulary)
        return len(self.alphabet)


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered field specs; the expanded vector is their concatenation."""

    fields: tuple

    def __post_init__(self):
        if not self.fields:
            raise DataError("a schema needs at least one field")
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise DataError(f"duplicate field names in schema: {names}")

    @property
    def expanded_width(self) -> int:
        return sum(f.width for f in self.fields)

    def to_dict(self) -> dict:
        return {
            "format": SCHEMA_FORMAT,
            "version": SCHEMA_FORMAT_VERSION,
            "fields": [
                {
                    "name": f.name,
                    "kind": f.kind,
                    "mean": f.mean,
                    "std": f.std,
                    "vocabulary": list(f.vocabulary),
                    "alphabet": f.alphabet,
                }
                for f in self.fields
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FeatureSchema":
        if payload.get("format") != SCHEMA_FORMAT:
            raise DataError(f"not a schema payload: format={payload.get('format')!r}")
        if payload.get("version") != SCHEMA_FORMAT_VERSION:
            raise DataError(
                f"unsupported schema version {payload.get('version')!r}; "
                f"this build reads version {SCHEMA_FORMAT_VERSION}"
            )
        return cls(tuple(
            FieldSpec(
                name=f["name"],
                kind=f["kind"],
                mean=f["mean"],
                std=f["std"],
                vocabulary=tuple(f["vocabulary"]),
                alphabet=f["alphabet"],
            )
            for f in payload["fields"]
        ))

    def digest(self) -> str:
        return canonical_digest(self.to_dict())


def save_schema(schema: FeatureSchema, path) -> None:
    write_json(schema.to_dict(), path)


def load_schema(path) -> FeatureSchema:
    return FeatureSchema.from_dict(read_json(path))


def _parse_float(value, field_name: str, row: int) -> float:
    try:
        parsed = float(value)
    except (TypeError, ValueError):
        raise DataError(
            f"row {row}, field {field_name!r}: cannot parse {value!r} as a number"
        ) from None
    if not np.isfinite(parsed):
        raise DataError(f"row {row}, field {field_name!r}: non-finite value {value!r}")
    return parsed


def infer_schema(records: Sequence[Mapping], field_kinds: Mapping[str, str]) -> FeatureSchema:
    """Learn a schema from training records.

    ``field_kinds`` maps field name to kind, in schema order.  Continuous
    statistics use the population std; a constant continuous field is an
    error naming the field.  Categorical vocabularies collect values in
    first-seen order.
    """
    records = list(records)
    if not records:
        raise DataError("cannot infer a schema from zero records")
    if not field_kinds:
        raise ConfigError("field_kinds must declare at least one field")
    for name, kind in field_kinds.items():
        if kind not in FIELD_KINDS:
            raise ConfigError(
                f"field {name!r}: unknown kind {kind!r}; expected one of {FIELD_KINDS}"
            )
    for i, record in enumerate(records):
        for name in field_kinds:
            if name not in record:
                raise DataError(f"row {i}: missing field {name!r}")
    specs = []
    for name, kind in field_kinds.items():
        if kind == "continuous":
            values = np.array(
                [_parse_float(r[name], name, i) for i, r in enumerate(records)]
            )
            std = float(values.std())  # population std
            if std == 0.0:
                raise DataError(
                    f"field {name!r} is constant in the training data; "
                    f"a continuous field needs nonzero spread"
                )
            specs.append(FieldSpec(name=name, kind=kind, mean=float(values.mean()), std=std))
        elif kind == "categorical":
            seen = []
            lookup = set()
            for record in records:
                value = str(record[name])
                if value not in lookup:
                    lookup.add(value)
                    seen.append(value)
            specs.append(FieldSpec(name=name, kind=kind, vocabulary=tuple(seen)))
        else:
            specs.append(FieldSpec(name=name, kind=kind, alphabet=DOMAIN_ALPHABET))
    return FeatureSchema(tuple(specs))


def _encode_field(spec: FieldSpec, value, row: int, out: np.ndarray) -> None:
    if spec.kind == "continuous":
        out[0] = (_parse_float(value, spec.name, row) - spec.mean) / spec.std
    elif spec.kind == "categorical":
        try:
            out[spec.vocabulary.index(str(value))] = 1.0
        except ValueError:
            pass  # unknown category encodes as all zeros
    else:
        text = str(value)
        for ch in text:
            idx = spec.alphabet.find(ch)
            if idx >= 0:
                out[idx] += 1.0


@dataclass
class Dataset:
    """A feature matrix plus the schema and original records behind it.

    ``records`` is None for synthetic outputs such as reconstructions;
    otherwise row i of ``features`` encodes ``records[i]``.
    """

    features: np.ndarray
    schema: FeatureSchema
    records: Optional[list] = None
    bucket_key: Optional[str] = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {self.features.shape}")
        if self.features.shape[1] != self.schema.expanded_width:
            raise DataError(
                f"features have {self.features.shape[1]} columns but the schema "
                f"expands to {self.schema.expanded_width}"
            )
        if self.records is not None and len(self.records) != self.features.shape[0]:
            raise DataError(
                f"{len(self.records)} records do not match {self.features.shape[0]} "
                f"feature rows"
            )

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def width(self) -> int:
        return self.features.shape[1]

    def label(self) -> str:
        """Short human-readable identity: bucket key or content digest."""
        if self.bucket_key is not None:
            return self.bucket_key
        digest = canonical_digest({
            "shape": list(self.features.shape),
            "sha": _matrix_digest(self.features),
        })
        return f"dataset-{digest[:12]}"


def _matrix_digest(x: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(x).tobytes())
    return h.hexdigest()


def featurize(schema: FeatureSchema, records: Sequence[Mapping],
              bucket_key: Optional[str] = None) -> Dataset:
    """Encode records under a frozen schema.

    Unknown categorical values become all-zero blocks; characters outside
    a charcount alphabet contribute nothing.  Zero records give a 0-row
    Dataset with the schema's width.
    """
    records = list(records)
    width = schema.expanded_width
    x = np.zeros((len(records), width))
    offsets = np.cumsum([0] + [f.width for f in schema.fields])
    for i, record in enumerate(records):
        for spec, start, end in zip(schema.fields, offsets, offsets[1:]):
            if spec.name not in record:
                raise DataError(f"row {i}: missing field {spec.name!r}")
            _encode_field(spec, record[spec.name], i, x[i, start:end])
    return Dataset(features=x, schema=schema, records=records, bucket_key=bucket_key)


def vector_schema(width: int, prefix: str = "x") -> FeatureSchema:
    """Identity schema for already-numeric vectors: ``width`` continuous
    fields named x0..x{width-1} with mean 0 and std 1."""
    if width < 1:
        raise ConfigError(f"width must be positive, got {width}")
    return FeatureSchema(tuple(
        FieldSpec(name=f"{prefix}{j}", kind="continuous") for j in range(width)
    ))


def matrix_dataset(x, bucket_key: Optional[str] = None, prefix: str = "x") -> Dataset:
    """Wrap a numeric matrix as a Dataset under the identity schema."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DataError(f"expected a 2-D matrix, got shape {x.shape}")
    schema = vector_schema(x.shape[1], prefix=prefix)
    records = [
        {f"{prefix}{j}": float(x[i, j]) for j in range(x.shape[1])}
        for i in range(x.shape[0])
    ]
    return Dataset(features=x, schema=schema, records=records, bucket_key=bucket_key)


@dataclass
class BucketResult:
    """Partition of records by a time or value key.

    ``rejected`` holds (row_index, record) pairs whose key could not be
    parsed; bucket sizes plus rejects add up to the input size.
    """

    buckets: dict
    rejected: list

    def counts(self) -> dict:
        return {key: len(rows) for key, rows in self.buckets.items()}


def _parse_timestamp(value) -> datetime:
    return datetime.fromisoformat(str(value))


def bucket(records: Sequence[Mapping], kind: str, field_name: str) -> BucketResult:
    """Group records by hour_of_week, year, or a raw field value.

    hour_of_week keys look like "wed-12" (168 possible); year accepts ISO
    timestamps or bare integer years.  Unparseable keys go to ``rejected``.
    """
    if kind not in ("hour_of_week", "year", "value"):
        raise ConfigError(
            f"unknown bucket kind {kind!r}; expected hour_of_week, year, or value"
        )
    buckets: dict = {}
    rejected: list = []
    for i, record in enumerate(records):
        if field_name not in record:
            rejected.append((i, record))
            continue
        raw = record[field_name]
        try:
            if kind == "hour_of_week":
                stamp = _parse_timestamp(raw)
                key = f"{_WEEKDAYS[stamp.weekday()]}-{stamp.hour:02d}"
            elif kind == "year":
                text = str(raw).strip()
                if text.lstrip("+-").isdigit():
                    key = str(int(text))
                else:
                    key = str(_parse_timestamp(raw).year)
            else:
                key = str(raw)
        except (ValueError, TypeError):
            rejected.append((i, record))
            continue
        buckets.setdefault(key, []).append(record)
    return BucketResult(buckets=buckets, rejected=rejected)


def read_records(path, delimiter: str = ",") -> list:
    """Read a delimited file with a header row into a list of dicts."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle, delimiter=delimiter)
            if reader.fieldnames is None:
                raise DataError(f"{path} has no header row")
            rows = [dict(row) for row in reader]
    except OSError as exc:
        raise FileNotFoundError(f"cannot read {path}: {exc}") from exc
    return rows


def write_records(records: Sequence[Mapping], path, fieldnames: Optional[Sequence[str]] = None,
                  delimiter: str = ",") -> None:
    records = list(records)
    if fieldnames is None:
        if not records:
            raise DataError("cannot infer a header from zero records")
        fieldnames = list(records[0].keys())
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(fieldnames), delimiter=delimiter)
        writer.writeheader()
        for record in records:
            writer.writerow(record)
