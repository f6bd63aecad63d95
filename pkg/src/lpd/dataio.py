"""File formats: CSV datasets, JSON model files, CSV reports.

All writers are deterministic (floats serialized with 17 significant
digits, fixed key/column order) and atomic: content is written to a
temporary file and renamed into place, so failures never leave partial
output.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .classifier import LpdModel
from .errors import NonFiniteValue, ParseError, RaggedRows, SchemaVersionMismatch
from .stats import LabeledDataset

MODEL_SCHEMA_VERSION = 1
REPORT_HEADER = ("section", "name", "mean", "sd")


@dataclass
class DataFileSchema:
    """Layout of a delimited dataset file."""

    delimiter: str = ","
    label_column: int = 0
    has_header: bool = False


def fmt_float(x) -> str:
    """17-significant-digit decimal form; lossless for binary64 round trips."""
    return "%.17g" % float(x)


def _atomic_write(path, text):
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_dataset(path, schema: DataFileSchema | None = None) -> LabeledDataset:
    """Read a delimited file into a dataset.

    The label column may hold arbitrary text; labels are mapped to
    1, 2, ... in first-seen order and the mapping is kept on the dataset
    as ``label_names``. Rows of differing length and non-finite feature
    values are rejected with the offending row named.
    """
    if schema is None:
        schema = DataFileSchema()
    rows = []
    labels = []
    label_ids: dict[str, int] = {}
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter=schema.delimiter)
        width = None
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            if schema.has_header and lineno == 1:
                width = len(row)
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise RaggedRows(
                    f"{path}: row {lineno} has {len(row)} fields, expected {width}"
                )
            if not 0 <= schema.label_column < len(row):
                raise ParseError(
                    f"{path}: row {lineno} has no label column {schema.label_column}"
                )
            raw_label = row[schema.label_column].strip()
            if raw_label not in label_ids:
                label_ids[raw_label] = len(label_ids) + 1
            labels.append(label_ids[raw_label])
            values = []
            for col, cell in enumerate(row):
                if col == schema.label_column:
                    continue
                try:
                    value = float(cell)
                except ValueError as exc:
                    raise ParseError(
                        f"{path}: row {lineno}, column {col}: not a number: {cell!r}"
                    ) from exc
                if not math.isfinite(value):
                    raise NonFiniteValue(
                        f"{path}: row {lineno}, column {col}: non-finite value {cell!r}"
                    )
                values.append(value)
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    names = tuple(sorted(label_ids, key=label_ids.get))
    return LabeledDataset(np.asarray(rows, dtype=float), np.asarray(labels), names)


def save_dataset(path, dataset: LabeledDataset, schema: DataFileSchema | None = None):
    """Write a dataset in the same layout :func:`load_dataset` reads."""
    if schema is None:
        schema = DataFileSchema()
    names = dataset.label_names
    out = io.StringIO()
    for row, label in zip(dataset.features, dataset.labels):
        text = names[label - 1] if names else str(int(label))
        fields = [fmt_float(v) for v in row]
        fields.insert(schema.label_column, text)
        out.write(schema.delimiter.join(fields))
        out.write("\n")
    _atomic_write(path, out.getvalue())


def _json_value(value):
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        inner = ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in sorted(value.items()))
        return "{" + inner + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def save_model(path, model: LpdModel):
    """Persist a fitted model as line-oriented JSON.

    save -> load -> save is byte-identical: floats are emitted with 17
    significant digits and provenance keys are sorted.
    """
    fields = [
        ("schema_version", MODEL_SCHEMA_VERSION),
        ("p", model.p),
        ("beta", model.beta),
        ("mu_hat", model.mu_hat),
        ("threshold", float(model.threshold)),
        ("lambda", float(model.lam)),
        ("ridge_rho", float(model.ridge_rho)),
        ("kept_indices", None if model.kept_indices is None else model.kept_indices),
        ("provenance", model.metadata or {}),
    ]
    lines = ["{"]
    for i, (key, value) in enumerate(fields):
        comma = "," if i < len(fields) - 1 else ""
        lines.append(f'  "{key}": {_json_value(value)}{comma}')
    lines.append("}")
    _atomic_write(path, "\n".join(lines) + "\n")


def load_model(path) -> LpdModel:
    """Read a model file; unknown schema versions are rejected explicitly."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid model JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: model file must hold a JSON object")
    version = doc.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"{path}: schema_version {version!r}; this build reads version {MODEL_SCHEMA_VERSION}"
        )
    try:
        beta = np.asarray(doc["beta"], dtype=float)
        mu_hat = np.asarray(doc["mu_hat"], dtype=float)
        model = LpdModel(
            beta=beta,
            mu_hat=mu_hat,
            threshold=float(doc["threshold"]),
            lam=float(doc["lambda"]),
            ridge_rho=float(doc["ridge_rho"]),
            kept_indices=None if doc.get("kept_indices") is None else np.asarray(doc["kept_indices"], dtype=int),
            metadata=dict(doc.get("provenance") or {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed model payload: {exc}") from exc
    if int(doc.get("p", model.p)) != model.p:
        raise ParseError(f"{path}: declared p={doc.get('p')} but beta has length {model.p}")
    return model


def _csv_text(header, rows):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


def save_report(path, report):
    """Write an EvalReport as (section, name, mean, sd) CSV rows."""
    rows = [
        (section, name, fmt_float(mean), fmt_float(sd))
        for section, name, mean, sd in report.to_rows()
    ]
    _atomic_write(path, _csv_text(REPORT_HEADER, rows))


def save_predictions(path, classes, scores):
    """Write per-sample predictions: index, class id, raw decision score."""
    rows = [
        (i, int(c), fmt_float(s))
        for i, (c, s) in enumerate(zip(np.atleast_1d(classes), np.atleast_1d(scores)))
    ]
    _atomic_write(path, _csv_text(("sample_index", "predicted_class", "score"), rows))


def save_cv_table(path_or_none, result):
    """CV counts as CSV text; writes when a path is given, always returns the text."""
    rows = []
    for j, (lam, count) in enumerate(zip(result.lambda_grid, result.correct_counts)):
        eligible = "no" if j in result.failures else "yes"
        chosen = "yes" if float(lam) == result.chosen_lambda else "no"
        rows.append((fmt_float(lam), int(count), eligible, chosen))
    text = _csv_text(("lambda", "correct", "eligible", "chosen"), rows)
    if path_or_none is not None:
        _atomic_write(path_or_none, text)
    return text


def save_indices(path, kept_indices):
    """Map of screened column -> original column, as CSV."""
    rows = [(new, int(orig)) for new, orig in enumerate(kept_indices)]
    _atomic_write(path, _csv_text(("column", "original_column"), rows))


def load_indices(path) -> np.ndarray:
    """Read an index map written by :func:`save_indices`; returns the
    original-column ids in screened-column order."""
    pairs = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        for lineno, row in enumerate(reader, start=1):
            if lineno == 1:
                continue
            try:
                pairs.append((int(row[0]), int(row[1])))
            except (IndexError, ValueError) as exc:
                raise ParseError(f"{path}: row {lineno}: bad index pair {row!r}") from exc
    if not pairs:
        raise ParseError(f"{path}: no index rows")
    if [new for new, _ in pairs] != list(range(len(pairs))):
        raise ParseError(f"{path}: screened columns must be 0..{len(pairs) - 1} in order")
    return np.asarray([orig for _, orig in pairs], dtype=int)
