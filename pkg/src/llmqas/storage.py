"""On-disk campaign logs.

Layout of a log directory::

    manifest.json          schema version, config snapshot, seeds, iteration index
    iteration_0001.json    one document per completed iteration
    ...

Every file is written to a temporary sibling and renamed into place, so a
crash leaves either the old or the new version, never a torn file.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from .errors import EmptyCampaign, PersistError, UnknownSchemaVersion

SCHEMA_VERSION = "1"
MANIFEST = "manifest.json"
CSV_COLUMNS = ("iteration", "ansatz", "kl_mean", "kl_min", "kl_max", "params", "depth", "seconds")


def atomic_write_json(path, obj) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=1, allow_nan=False)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def iteration_filename(iteration: int) -> str:
    return f"iteration_{iteration:04d}.json"


def init_log_dir(log_dir, config: dict, seed: int) -> dict:
    """Create the directory and an empty manifest (no-op if a manifest exists)."""
    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    if (log_dir / MANIFEST).exists():
        return load_manifest(log_dir)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config,
        "seeds": {"master": seed},
        "iterations": [],
        "status": "running",
        "stop_reason": None,
        "best": None,
    }
    atomic_write_json(log_dir / MANIFEST, manifest)
    return manifest


def load_manifest(log_dir) -> dict:
    log_dir = Path(log_dir)
    path = log_dir / MANIFEST
    if not path.exists():
        raise FileNotFoundError(f"no campaign manifest in {log_dir}")
    manifest = _read_json(path)
    version = manifest.get("schema_version")
    if version != SCHEMA_VERSION:
        raise UnknownSchemaVersion(
            f"{path} has schema version {version!r}; this version of llmqas reads only {SCHEMA_VERSION!r}"
        )
    for entry in manifest["iterations"]:
        if not (log_dir / entry["file"]).exists():
            raise FileNotFoundError(f"manifest references missing file {entry['file']}")
    return manifest


def update_manifest(log_dir, **fields) -> dict:
    log_dir = Path(log_dir)
    manifest = load_manifest(log_dir)
    manifest.update(fields)
    try:
        atomic_write_json(log_dir / MANIFEST, manifest)
    except OSError as exc:
        raise PersistError(f"manifest update failed; previous manifest left in place: {exc}") from exc
    return manifest


def persist_iteration(log_dir, record: dict, **manifest_fields) -> str:
    """Write one iteration document and append it to the manifest.

    Returns the file name relative to ``log_dir``. If the manifest update
    fails the iteration file may exist on disk but is not referenced, and
    the log still reloads to its previous state.
    """
    log_dir = Path(log_dir)
    name = iteration_filename(record["iteration"])
    try:
        atomic_write_json(log_dir / name, record)
    except OSError as exc:
        raise PersistError(f"could not write {name}; manifest unchanged: {exc}") from exc
    manifest = load_manifest(log_dir)
    manifest["iterations"] = [e for e in manifest["iterations"] if e["iteration"] != record["iteration"]]
    manifest["iterations"].append({"iteration": record["iteration"], "file": name})
    manifest["iterations"].sort(key=lambda e: e["iteration"])
    manifest.update(manifest_fields)
    try:
        atomic_write_json(log_dir / MANIFEST, manifest)
    except OSError as exc:
        raise PersistError(
            f"{name} written but the manifest update failed; the log still reflects the previous iteration: {exc}"
        ) from exc
    return name


def load_iteration(log_dir, name: str) -> dict:
    return _read_json(Path(log_dir) / name)


def load_iterations(log_dir) -> list[dict]:
    manifest = load_manifest(log_dir)
    return [load_iteration(log_dir, e["file"]) for e in manifest["iterations"]]


# -- reports -----------------------------------------------------------------

def report_rows(log_dir) -> list[dict]:
    rows = []
    for rec in load_iterations(log_dir):
        rows.append(
            {
                "iteration": rec["iteration"],
                "ansatz": "[" + ",".join(str(b) for b in rec["spec"]["blocks"]) + "]",
                "kl_mean": rec["kl_summary"]["mean"],
                "kl_min": rec["kl_summary"]["min"],
                "kl_max": rec["kl_summary"]["max"],
                "params": rec["feedback"]["ansatz_parameter_count"],
                "depth": rec["feedback"]["ansatz_depth"],
                "seconds": rec["seconds"],
            }
        )
    return rows


def _fmt(row: dict) -> dict:
    out = dict(row)
    for k in ("kl_mean", "kl_min", "kl_max"):
        out[k] = f"{row[k]:.6g}"
    out["seconds"] = f"{row['seconds']:.1f}"
    return out


def emit_report(log_dir, fmt: str = "table") -> str:
    """Render the per-iteration summary as an aligned table or CSV.

    CSV columns: iteration, ansatz (block list such as "[2,4,2,4]"), kl_mean,
    kl_min, kl_max (final KL over repeats, 6 significant digits), params,
    depth, seconds (wall clock for the iteration's training).
    """
    if fmt not in ("table", "csv"):
        raise ValueError(f"unknown report format {fmt!r}")
    manifest = load_manifest(log_dir)
    rows = report_rows(log_dir)
    if not rows:
        raise EmptyCampaign(f"campaign in {log_dir} has no completed iterations")
    formatted = [_fmt(r) for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(formatted)
        return buf.getvalue()

    best_iter = (manifest.get("best") or {}).get("iteration")
    header = list(CSV_COLUMNS)
    cells = [[str(r[c]) for c in header] + ["*" if r["iteration"] == best_iter else ""] for r in formatted]
    header = header + ["best"]
    widths = [max(len(h), *(len(row[i]) for row in cells)) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
