"""Deterministic file writers: fixed 12-significant-digit floats, sorted JSON keys, run manifest."""
from dataclasses import dataclass, field, asdict
import csv
import io
import json
import math
from pathlib import Path

import numpy as np

SIG_DIGITS = 12


def fmt(x):
    """Format a number with 12 significant digits (integers and strings pass through)."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        s = format(x, f".{SIG_DIGITS}g")
        return "0" if s == "-0" else s
    return str(x)


def _round(obj):
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_round(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return fmt(x)
        return float(format(x, f".{SIG_DIGITS}g"))
    return obj


def dumps_json(obj):
    return json.dumps(_round(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(obj), encoding="utf-8")
    return path


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(header, rows), encoding="utf-8")
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [row for row in r if row]
    return header, rows


@dataclass
class RunManifest:
    """Provenance for one CLI run; ``created`` comes from SOURCE_DATE_EPOCH so reruns stay byte-identical."""
    command: str
    spec_path: str
    parameter_hash: str
    framework: str = ""
    tau_p_s: float | None = None
    settings: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    created: str | None = None

    def __post_init__(self):
        if self.created is None:
            import os
            epoch = os.environ.get("SOURCE_DATE_EPOCH")
            if epoch is not None:
                from datetime import datetime, timezone
                self.created = datetime.fromtimestamp(int(epoch), timezone.utc).isoformat()

    def add(self, path):
        self.outputs.append(Path(path).name)
        return path

    def to_dict(self):
        return asdict(self)
