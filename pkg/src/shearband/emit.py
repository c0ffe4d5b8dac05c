"""Deterministic writers for CSV, JSON, SVG and run manifests.

CSV: comma separated, header row, LF endings, floats via ``repr``.
JSON: UTF-8, sorted keys, ``schema_version`` "1".
SVG: 1.1, self-contained polylines, no external assets.
"""

from __future__ import annotations

import configparser
import json
import math
import os
from pathlib import Path
from typing import Iterable, Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import IoError, ValidationError

SCHEMA_VERSION = "1"
CONFIG_KEYS = ("n", "lambda", "gamma_bar0", "u_bar0", "gamma0")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return obj


def _open(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with _open(path) as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def write_json(path, payload: Mapping) -> Path:
    path = Path(path)
    body = dict(to_jsonable(payload))
    body["schema_version"] = SCHEMA_VERSION
    with _open(path) as fh:
        fh.write(json.dumps(body, sort_keys=True, indent=2, allow_nan=False) + "\n")
    return path


def write_manifest(out_dir, command: str, config: Mapping, outputs: Sequence) -> Path:
    """Manifest of one run: subcommand, resolved configuration, written files."""
    out_dir = Path(out_dir)
    files = sorted(str(Path(p).relative_to(out_dir)) if Path(p).is_relative_to(out_dir) else str(p) for p in outputs)
    return write_json(
        out_dir / f"{command}.manifest.json",
        {"command": command, "config": dict(config), "outputs": files, "deterministic": True},
    )


# -- config files ------------------------------------------------------------------


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file into floats (unknown keys rejected)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ValidationError(f"malformed config file {path}: {exc}") from exc
    out = {}
    for key, raw in parser["run"].items():
        if key not in CONFIG_KEYS:
            raise ValidationError(f"unknown config key {key!r}; allowed: {', '.join(CONFIG_KEYS)}")
        try:
            out[key] = float(raw)
        except ValueError as exc:
            raise ValidationError(f"config key {key!r} is not a number: {raw!r}") from exc
    return out


# -- SVG -----------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, (b - a) // 6)
        return [float(k) for k in range(a, b + 1, step)]
    span = hi - lo or 1.0
    raw = span / 5.0
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=mag)
    start = math.ceil(lo / step) * step
    return [start + k * step for k in range(int((hi - start) / step + 1e-9) + 1)]


def svg_line_plot(
    series: Sequence[tuple[str, np.ndarray, np.ndarray]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logy: bool = False,
    width: int = 640,
    height: int = 420,
) -> str:
    """Self-contained SVG 1.1 line plot of ``(label, x, y)`` series."""
    ml, mr, mt, mb = 70, 20, 36, 50
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = [np.asarray(s[2], float) for s in series]
    if logy:
        if any(np.any(y <= 0) for y in ys):
            raise ValidationError("logarithmic axis needs positive data")
        ys = [np.log10(y) for y in ys]
    yall = np.concatenate(ys)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(yall.min()), float(yall.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.04 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - ml - mr, height - mt - mb
    X = lambda v: ml + (v - x0) / (x1 - x0) * pw
    Y = lambda v: mt + (1.0 - (v - y0) / (y1 - y0)) * ph
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for tx in _ticks(x0, x1, False):
        out.append(f'<line x1="{X(tx):.2f}" y1="{mt + ph}" x2="{X(tx):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X(tx):.2f}" y="{mt + ph + 18}" font-size="11" text-anchor="middle">{tx:.4g}</text>')
    for ty in _ticks(y0, y1, logy):
        if not y0 <= ty <= y1:
            continue
        label = f"1e{int(ty)}" if logy else f"{ty:.4g}"
        out.append(f'<line x1="{ml - 5}" y1="{Y(ty):.2f}" x2="{ml}" y2="{Y(ty):.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{Y(ty) + 4:.2f}" font-size="11" text-anchor="end">{label}</text>')
    for k, ((label, x, _), y) in enumerate(zip(series, ys)):
        pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(np.asarray(x, float), y))
        color = _PALETTE[k % len(_PALETTE)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(
            f'<text x="{ml + pw - 8}" y="{mt + 16 + 14 * k}" font-size="12" text-anchor="end" '
            f'fill="{color}">{escape(label)}</text>'
        )
    scale = " (log scale)" if logy else ""
    out.append(f'<text x="{width / 2:.1f}" y="22" font-size="14" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{mt + ph / 2:.1f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{escape(ylabel + scale)}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, svg: str) -> Path:
    path = Path(path)
    with _open(path) as fh:
        fh.write(svg)
    return path


def ensure_dir(path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {path}: {exc.strerror or exc}") from exc
    if not os.access(path, os.W_OK):
        raise IoError(f"output directory {path} is not writable")
    return path
