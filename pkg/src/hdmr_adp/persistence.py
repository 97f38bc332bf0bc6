"""JSON persistence for HDMR models and stage-table manifests.

Floats are written with ``repr`` precision, so a save/load round trip
reproduces every table bit for bit.  Axis labels in files are 1-based.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ModelFormatError, PreconditionError
from .hdmr import GridDomain, HdmrModel

MODEL_FORMAT = "hdmr-adp-model"
MANIFEST_FORMAT = "hdmr-adp-stages"
FORMAT_VERSION = 1


def _reject_constant(name):
    raise ModelFormatError(f"non-finite value {name} in model file")


def model_to_dict(model: HdmrModel, axis_roles: Sequence[str] | None = None) -> dict:
    doc = {
        "format": MODEL_FORMAT,
        "format_version": FORMAT_VERSION,
        "axis_sizes": list(model.domain.axis_sizes),
        "g0": model.g0,
        "first_order": [t.tolist() for t in model.first_order],
        "second_order": [{"m": m + 1, "n": n + 1, "table": t.tolist()}
                         for (m, n), t in model.second_order.items()],
    }
    if axis_roles is not None:
        doc["axis_roles"] = list(axis_roles)
    return doc


def save_model(model: HdmrModel, path, axis_roles: Sequence[str] | None = None) -> None:
    try:
        text = json.dumps(model_to_dict(model, axis_roles), allow_nan=False)
    except ValueError:
        raise ModelFormatError("model contains NaN or Inf and cannot be saved") from None
    Path(path).write_text(text + "\n", encoding="utf-8")


def _table(value, shape, what) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ModelFormatError(f"{what} is not a numeric table") from None
    if arr.shape != shape:
        raise ModelFormatError(f"{what} has shape {arr.shape}, expected {shape}")
    return arr


def model_from_dict(doc) -> HdmrModel:
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not an HDMR model file")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {doc.get('format_version')!r}")
    try:
        sizes = [int(s) for s in doc["axis_sizes"]]
        domain = GridDomain(sizes)
        g0 = float(doc["g0"])
        first = doc["first_order"]
        second = doc["second_order"]
    except (KeyError, TypeError, ValueError, PreconditionError) as exc:
        raise ModelFormatError(f"malformed model header: {exc}") from None
    if not math.isfinite(g0):
        raise ModelFormatError("g0 is not finite")
    if not isinstance(first, list) or len(first) != len(sizes):
        raise ModelFormatError(f"expected {len(sizes)} first-order tables")
    first_t = tuple(_table(t, (s,), f"first-order table {m + 1}") for m, (t, s) in enumerate(zip(first, sizes)))
    pairs = {}
    for entry in second:
        try:
            m, n = int(entry["m"]) - 1, int(entry["n"]) - 1
        except (KeyError, TypeError, ValueError):
            raise ModelFormatError("second-order entry without valid m/n labels") from None
        if not (0 <= m < n < len(sizes)):
            raise ModelFormatError(f"invalid second-order pair ({m + 1}, {n + 1})")
        if (m, n) in pairs:
            raise ModelFormatError(f"duplicate second-order pair ({m + 1}, {n + 1})")
        pairs[(m, n)] = _table(entry.get("table"), (sizes[m], sizes[n]), f"table ({m + 1},{n + 1})")
    for t in first_t + tuple(pairs.values()):
        if not np.all(np.isfinite(t)):
            raise ModelFormatError("model tables contain non-finite values")
    return HdmrModel(domain, g0, first_t, pairs)


def load_model(path) -> HdmrModel:
    return model_from_dict(_read_json(path))


def _read_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFormatError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def save_stage_tables(tables, directory, phi: float | None = None) -> Path:
    """Write one model file per stage plus ``manifest.json``; returns the manifest path.

    ``stages`` in the manifest lists file names in stage order ``t = 1..horizon``.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stages = []
    for tab in tables:
        name = f"stage_{tab.t}.json"
        save_model(tab.model, directory / name, tab.axis_roles)
        stages.append(name)
    manifest = {
        "format": MANIFEST_FORMAT,
        "format_version": FORMAT_VERSION,
        "phi": phi,
        "horizon": len(stages),
        "axis_roles": tables[0].axis_roles if tables else [],
        "actions": tables[0].actions.tolist() if tables else [],
        "stages": stages,
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return path


def load_stage_tables(manifest_path):
    """Inverse of :func:`save_stage_tables`: stage tables ordered by ``t``."""
    from .adp import HdmrStageTable

    manifest_path = Path(manifest_path)
    doc = _read_json(manifest_path)
    if not isinstance(doc, dict) or doc.get("format") != MANIFEST_FORMAT:
        raise ModelFormatError("not a stage manifest")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {doc.get('format_version')!r}")
    try:
        actions = np.array(doc["actions"], dtype=np.int64)
        na = list(doc["axis_roles"]).count("action")
        stages = [str(f) for f in doc["stages"]]
        horizon = int(doc["horizon"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed manifest: {exc}") from None
    if len(stages) != horizon:
        raise ModelFormatError(f"manifest lists {len(stages)} stages for horizon {horizon}")
    tables = []
    for t, name in enumerate(stages, start=1):
        f = manifest_path.parent / name
        if not f.is_file():
            raise ModelFormatError(f"stage {t}: file {name} is missing")
        model = load_model(f)
        if model.domain.ndim != len(doc["axis_roles"]):
            raise ModelFormatError(f"stage {t}: model has {model.domain.ndim} axes, manifest has "
                                   f"{len(doc['axis_roles'])} axis roles")
        if not model.is_balanced():
            raise ModelFormatError(f"stage {t}: tables are not rebalanced")
        tables.append(HdmrStageTable(t, actions, model, na))
    return tables
