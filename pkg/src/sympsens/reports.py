"""Matrix files and command reports.

Matrix files come in two flavours:

* plain text: the first line holds the dimension ``2n``, followed by ``2n``
  rows of ``2n`` whitespace-separated reals;
* JSON: ``{"dim": 2n, "rows": [[...], ...]}``.

Reports are emitted either as ``key: value`` text lines or as JSON. Reals are
written with 17 significant digits, so parsing a report gives back the exact
float64 values.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SympsensError, asymmetry


class MatrixFormatError(SympsensError, ValueError):
    """A matrix file could not be parsed."""


class ReportFormatError(SympsensError, ValueError):
    """A report could not be parsed."""


def _check_matrix(a: np.ndarray, source: str) -> np.ndarray:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MatrixFormatError(f"{source}: matrix is not square (shape {a.shape})")
    if a.shape[0] == 0 or a.shape[0] % 2:
        raise MatrixFormatError(f"{source}: dimension must be even and positive, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise MatrixFormatError(f"{source}: matrix has non-finite entries")
    return a


def parse_matrix(text: str, source: str = "<string>") -> np.ndarray:
    """Parse either matrix format from a string."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
            dim = int(obj["dim"])
            a = np.array(obj["rows"], dtype=np.float64)
        except (ValueError, KeyError, TypeError) as exc:
            raise MatrixFormatError(f"{source}: invalid JSON matrix: {exc}") from exc
        if a.shape != (dim, dim):
            raise MatrixFormatError(f"{source}: declared dim {dim} but rows have shape {a.shape}")
        return _check_matrix(a, source)

    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MatrixFormatError(f"{source}: empty file")
    if len(lines[0]) != 1:
        raise MatrixFormatError(f"{source}: first line must hold the dimension only")
    try:
        dim = int(lines[0][0])
    except ValueError as exc:
        raise MatrixFormatError(f"{source}: bad dimension {lines[0][0]!r}") from exc
    rows = lines[1:]
    if dim <= 0 or len(rows) != dim:
        raise MatrixFormatError(f"{source}: expected {dim} rows, found {len(rows)}")
    for k, row in enumerate(rows, start=2):
        if len(row) != dim:
            raise MatrixFormatError(f"{source}: line {k} has {len(row)} entries, expected {dim}")
    try:
        a = np.array(rows, dtype=np.float64)
    except ValueError as exc:
        raise MatrixFormatError(f"{source}: {exc}") from exc
    return _check_matrix(a, source)


@dataclass(frozen=True)
class LoadedMatrix:
    """A matrix symmetrised on load; ``asymmetry`` is the largest ``|a_ij - a_ji|`` of the raw input."""
    matrix: np.ndarray
    raw: np.ndarray
    asymmetry: float
    path: str


def load_matrix(path) -> LoadedMatrix:
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise MatrixFormatError(f"{path}: cannot read: {exc}") from exc
    raw = parse_matrix(text, str(path))
    return LoadedMatrix(0.5 * (raw + raw.T), raw, asymmetry(raw), str(path))


def format_real(x: float) -> str:
    return format(float(x), ".17g")


def format_matrix(a, fmt: str = "plain") -> str:
    a = np.asarray(a, dtype=np.float64)
    if fmt == "json":
        return json.dumps({"dim": a.shape[0], "rows": a.tolist()}) + "\n"
    if fmt != "plain":
        raise ValueError(f"unknown matrix format {fmt!r}")
    lines = [str(a.shape[0])]
    lines += [" ".join(format_real(x) for x in row) for row in a]
    return "\n".join(lines) + "\n"


def save_matrix(path, a, fmt: str = "plain") -> None:
    Path(path).write_text(format_matrix(a, fmt))


def digest(*arrays, extra: str = "") -> str:
    """SHA-256 over shapes and float64 bytes of the inputs (plus an optional string)."""
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a, dtype=np.float64)
        h.update(repr(a.shape).encode())
        h.update(a.tobytes())
    h.update(extra.encode())
    return "sha256:" + h.hexdigest()


_SECTIONS = {"residual": "residuals", "tol": "tolerances", "flag": "flags"}


@dataclass
class Report:
    """Outcome of one command.

    ``payload`` maps names to reals, arrays or strings; ``residuals`` and
    ``tolerances`` map names to reals and ``flags`` to booleans. Payload and
    section names must not contain ``": "`` or spaces.
    """
    command: str
    seed: int | None = None
    digest: str = ""
    payload: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    # ---------------------------------------------------------------- text
    def to_text(self) -> str:
        lines = [f"command: {self.command}",
                 f"seed: {'none' if self.seed is None else int(self.seed)}",
                 f"digest: {self.digest}"]
        for key, value in self.payload.items():
            lines.append(_text_entry(key, value))
        for prefix, attr in _SECTIONS.items():
            for key, value in getattr(self, attr).items():
                if attr == "flags":
                    lines.append(f"{prefix} {key}: {'true' if value else 'false'}")
                else:
                    lines.append(f"{prefix} {key}: {format_real(value)}")
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Report":
        report = cls(command="")
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            key, sep, value = line.partition(": ")
            if not sep:
                if line.endswith(":"):
                    key, value = line[:-1], ""
                else:
                    raise ReportFormatError(f"line {lineno}: expected 'key: value', got {line!r}")
            if key == "command":
                report.command = value
            elif key == "seed":
                report.seed = None if value == "none" else int(value)
            elif key == "digest":
                report.digest = value
            elif key == "warning":
                report.warnings.append(value)
            elif " " in key:
                prefix, name = key.split(" ", 1)
                if prefix not in _SECTIONS:
                    raise ReportFormatError(f"line {lineno}: unknown section {prefix!r}")
                if prefix == "flag":
                    if value not in ("true", "false"):
                        raise ReportFormatError(f"line {lineno}: flag must be true or false")
                    report.flags[name] = value == "true"
                else:
                    getattr(report, _SECTIONS[prefix])[name] = float(value)
            else:
                name, parsed = _parse_entry(key, value)
                report.payload[name] = parsed
        return report

    # ---------------------------------------------------------------- json
    def to_json(self) -> str:
        obj = {
            "command": self.command,
            "seed": self.seed,
            "digest": self.digest,
            "payload": {k: _json_value(v) for k, v in self.payload.items()},
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "tolerances": {k: float(v) for k, v in self.tolerances.items()},
            "flags": {k: bool(v) for k, v in self.flags.items()},
            "warnings": list(self.warnings),
        }
        return json.dumps(obj, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        try:
            obj = json.loads(text)
        except ValueError as exc:
            raise ReportFormatError(f"invalid JSON report: {exc}") from exc
        payload = {k: (np.array(v, dtype=np.float64) if isinstance(v, list) else v)
                   for k, v in obj.get("payload", {}).items()}
        return cls(command=obj["command"], seed=obj.get("seed"), digest=obj.get("digest", ""),
                   payload=payload, residuals=dict(obj.get("residuals", {})),
                   tolerances=dict(obj.get("tolerances", {})), flags=dict(obj.get("flags", {})),
                   warnings=list(obj.get("warnings", [])))

    def emit(self, as_json: bool = False) -> str:
        return self.to_json() if as_json else self.to_text()


def parse_report(text: str) -> Report:
    """Parse a report in either format."""
    return Report.from_json(text) if text.lstrip().startswith("{") else Report.from_text(text)


def _json_value(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    arr = np.asarray(value, dtype=np.float64)
    return float(arr) if arr.ndim == 0 else arr.tolist()


def _text_entry(key: str, value) -> str:
    if isinstance(value, str):
        return f"{key}: {value}"
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 2:
        body = " ".join(format_real(x) for x in arr.ravel())
        return f"{key}[{arr.shape[0]}x{arr.shape[1]}]: {body}"
    return f"{key}: " + " ".join(format_real(x) for x in arr.ravel())


def _parse_entry(key: str, value: str):
    if key.endswith("]") and "[" in key:
        name, shape = key[:-1].split("[", 1)
        try:
            rows, cols = (int(s) for s in shape.split("x"))
            arr = np.array([float(t) for t in value.split()], dtype=np.float64)
            return name, arr.reshape(rows, cols)
        except ValueError as exc:
            raise ReportFormatError(f"bad matrix entry {key!r}: {exc}") from exc
    tokens = value.split()
    try:
        nums = [float(t) for t in tokens]
    except ValueError:
        return key, value
    if not nums:
        return key, value
    return key, nums[0] if len(nums) == 1 else np.array(nums)


def payload_equal(x, y) -> bool:
    """Exact equality of payload values, treating scalars and length-1 vectors alike."""
    if isinstance(x, str) or isinstance(y, str):
        return x == y
    ax = np.asarray(x, dtype=np.float64)
    ay = np.asarray(y, dtype=np.float64)
    if ax.ndim == 2 or ay.ndim == 2:
        return ax.shape == ay.shape and np.array_equal(ax, ay)
    return np.array_equal(ax.ravel(), ay.ravel())
