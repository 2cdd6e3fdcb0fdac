"""Binary archives, CSV tables and static SVG plots.

Archive layout (all integers little endian)::

    b"SGLB" | version u32 | header length u32 | header (UTF-8 JSON) | checksum u64 | payload

The payload is the concatenation of the arrays listed in the header, each
stored as little-endian float64 in row-major order (complex arrays as a real
plane followed by an imaginary plane).  The checksum is a 64-bit BLAKE2b
digest of the header (without its optional ``timestamp`` entry) and the
payload.
"""

import csv
import hashlib
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classify import DecayReport
from .diophantine import DiophantineReport, FailingSubsequence, SmallDivisorTable
from .errors import (ArchiveError, AxisError, ChecksumError, FormatError, ParameterError,
                     TruncatedFileError, VersionError)
from .evolution import CoefficientField, SolveReport, TimeGrid
from .grid import Grid, OperatorSpec
from .spectral import EigenDecomposition, WeylFit

MAGIC = b"SGLB"
VERSION = 1
_PREFIX = struct.Struct("<4sII")
_CHECKSUM = struct.Struct("<Q")


def _checksum(header, payload):
    canonical = {k: v for k, v in header.items() if k != "timestamp"}
    h = hashlib.blake2b(digest_size=8)
    h.update(json.dumps(canonical, sort_keys=True, separators=(",", ":")).encode())
    h.update(payload)
    return _CHECKSUM.unpack(h.digest())[0]


def _pack(arrays):
    chunks, layout = [], []
    for name, a in arrays:
        a = np.asarray(a)
        if np.iscomplexobj(a):
            planes = [np.ascontiguousarray(a.real, "<f8"), np.ascontiguousarray(a.imag, "<f8")]
        else:
            planes = [np.ascontiguousarray(a, "<f8")]
        layout.append({"name": name, "shape": list(a.shape), "complex": bool(np.iscomplexobj(a))})
        chunks.extend(p.tobytes() for p in planes)
    return b"".join(chunks), layout


def write_archive(path, kind, meta, arrays, timestamp=None):
    """Write named arrays plus JSON metadata to ``path``."""
    payload, layout = _pack(arrays)
    header = {"kind": kind, "meta": meta, "arrays": layout}
    if timestamp is not None:
        header["timestamp"] = str(timestamp)
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    data = _PREFIX.pack(MAGIC, VERSION, len(blob)) + blob + _CHECKSUM.pack(_checksum(header, payload)) + payload
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise ArchiveError(f"cannot write {path}: {exc}") from exc


def read_archive(path, kind=None):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ArchiveError(f"cannot read {path}: {exc}") from exc
    if len(data) < _PREFIX.size:
        raise TruncatedFileError(f"{path}: {len(data)} bytes, too short for an archive header")
    magic, version, hlen = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: not an archive (bad magic {magic!r})")
    if version != VERSION:
        raise VersionError(f"{path}: format version {version}, expected {VERSION}")
    start = _PREFIX.size + hlen + _CHECKSUM.size
    if len(data) < start:
        raise TruncatedFileError(f"{path}: header cut short")
    try:
        header = json.loads(data[_PREFIX.size:_PREFIX.size + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable header ({exc})") from exc
    if kind is not None and header.get("kind") != kind:
        raise FormatError(f"{path}: archive holds {header.get('kind')!r}, expected {kind!r}")
    (stored,) = _CHECKSUM.unpack_from(data, _PREFIX.size + hlen)
    payload = data[start:]
    expected = sum(8 * math.prod(a["shape"]) * (2 if a["complex"] else 1) for a in header["arrays"])
    if len(payload) < expected:
        raise TruncatedFileError(f"{path}: payload has {len(payload)} bytes, expected {expected}")
    if len(payload) > expected:
        raise FormatError(f"{path}: {len(payload) - expected} trailing bytes")
    if _checksum(header, payload) != stored:
        raise ChecksumError(f"{path}: checksum mismatch")
    arrays, offset = {}, 0
    for a in header["arrays"]:
        n = math.prod(a["shape"])
        planes = []
        for _ in range(2 if a["complex"] else 1):
            planes.append(np.frombuffer(payload, "<f8", n, offset).reshape(a["shape"]).astype(float))
            offset += 8 * n
        arrays[a["name"]] = planes[0] + 1j * planes[1] if a["complex"] else planes[0]
    return header, arrays


def save_eig(eig, path, timestamp=None):
    meta = {"spacing": float(eig.spacing).hex(), "trusted_count": int(eig.trusted_count),
            "params": eig.params}
    if eig.grid is not None:
        meta["grid"] = {"L": float(eig.grid.half_width).hex(), "N": eig.grid.points}
    if eig.spec is not None:
        meta["spec"] = {"m": eig.spec.m, "mu": eig.spec.mu}
    write_archive(path, "eigendecomposition", meta,
                  [("eigenvalues", eig.eigenvalues), ("eigenvectors", eig.eigenvectors)], timestamp)


def load_eig(path):
    header, arrays = read_archive(path, "eigendecomposition")
    meta = header["meta"]
    grid = spec = None
    if "grid" in meta:
        grid = Grid(float.fromhex(meta["grid"]["L"]), int(meta["grid"]["N"]))
    if "spec" in meta:
        spec = OperatorSpec(meta["spec"]["m"], meta["spec"]["mu"])
    lam, vec = arrays["eigenvalues"], arrays["eigenvectors"]
    lam.flags.writeable = False
    vec.flags.writeable = False
    return EigenDecomposition(lam, vec, float.fromhex(meta["spacing"]), int(meta["trusted_count"]),
                              grid, spec, dict(meta.get("params", {})))


def save_field(field_, path, timestamp=None):
    write_archive(path, "coefficient-field", {"T": field_.grid.T, "source": field_.source},
                  [("spectrum", field_.spectrum), ("values", field_.values)], timestamp)


def load_field(path):
    header, arrays = read_archive(path, "coefficient-field")
    grid = TimeGrid(int(header["meta"]["T"]))
    if header["meta"]["source"] == "time":
        return CoefficientField.from_time(arrays["values"], grid)
    return CoefficientField.from_spectrum(arrays["spectrum"], grid)


# ---------------------------------------------------------------- CSV

@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple
    rows: list = field(default_factory=list)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def weyl_table(eig, fit, log_corrected=None):
    """weyl(j, lambda, fit) over the fitted window; the fit column follows
    ``fit.log_corrected`` unless overridden."""
    lam = eig.eigenvalues if isinstance(eig, EigenDecomposition) else np.asarray(eig)
    j_lo, j_hi = fit.j_range
    j = np.arange(j_lo, j_hi + 1, dtype=float)
    if fit.log_corrected if log_corrected is None else log_corrected:
        model = np.exp(fit.intercept_logcorrected) * (j / np.log(j)) ** fit.slope_logcorrected
    else:
        model = np.exp(fit.intercept_plain) * j ** fit.slope_plain
    return Table("weyl", ("j", "lambda", "fit"),
                 [(int(a), float(b), float(c)) for a, b, c in zip(j, lam[j_lo - 1:j_hi], model)])


def to_table(report):
    """Convert any report object to its CSV table."""
    if isinstance(report, Table):
        return report
    if isinstance(report, EigenDecomposition):
        return Table("eigenvalues", ("j", "lambda"),
                     [(j, float(v)) for j, v in enumerate(report.eigenvalues, start=1)])
    if isinstance(report, WeylFit):
        return Table("weylfit", ("j_lo", "j_hi", "slope_plain", "slope_logcorrected", "residual_rms",
                                 "predicted_exponent"),
                     [(report.j_range[0], report.j_range[1], report.slope_plain, report.slope_logcorrected,
                       report.residual_rms, report.predicted_exponent)])
    if isinstance(report, DiophantineReport):
        rows = [("constant", e, c, None, None, None) for e, c in zip(report.epsilons, report.constants)]
        for w in report.witnesses:
            if w is not None:
                rows.append(("witness", w.epsilon, w.scaled, w.j, w.tau, w.gap))
        rows += [("resonant", None, None, j, tau, 0.0) for j, tau in report.resonant]
        return Table("diophantine", ("kind", "epsilon", "C", "j", "tau", "gap"), rows)
    if isinstance(report, FailingSubsequence):
        return Table("subsequence", ("k", "j", "tau", "C", "gap", "gap_exact"),
                     [(e.k, e.j, e.tau, float(e.C), float(e.gap_high), str(e.gap_high)) for e in report.entries])
    if isinstance(report, SmallDivisorTable):
        rows = []
        for j, t, g, ti, gi in zip(report.j, report.theta, report.gamma, report.theta_infinite,
                                   report.gamma_infinite):
            rows.append((int(j), "resonant" if ti else float(t), "resonant" if gi else float(g)))
        return Table("smalldiv", ("j", "theta", "gamma"), rows)
    if isinstance(report, SolveReport):
        adm = {a.j: a.residual for a in report.admissibility}
        return Table("solve", ("j", "method", "residual", "admissibility"),
                     [(j, m, float(r), adm.get(j)) for j, (m, r) in
                      enumerate(zip(report.methods, report.residuals), start=1)])
    if isinstance(report, DecayReport):
        return Table("decay", ("gamma", "slope", "ci_low", "ci_high", "verdict"),
                     [(r.gamma, r.slope, r.ci_low, r.ci_high, report.verdict) for r in report.rows])
    raise ParameterError(f"no CSV schema for {type(report).__name__}")


def write_csv(report, path):
    table = to_table(report)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise ArchiveError(f"cannot write {path}: {exc}") from exc
    return table


def _parse(cell):
    if cell == "":
        return None
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_csv(path):
    """(columns, rows) with numbers parsed; tokens such as 'resonant' stay strings."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        columns = tuple(next(reader, ()))
        rows = [tuple(_parse(c) for c in row) for row in reader]
    return columns, rows


# ---------------------------------------------------------------- SVG

@dataclass(frozen=True)
class Axes:
    xlabel: str = "x"
    ylabel: str = "y"
    xlog: bool = False
    ylog: bool = False
    title: str = ""
    width: int = 640
    height: int = 480


_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _escape(text):
    return str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _normalise_series(series):
    out = []
    for i, s in enumerate(series):
        if len(s) == 3:
            label, xs, ys = s
        else:
            (xs, ys), label = s, f"series {i + 1}"
        xs, ys = np.asarray(xs, dtype=float).ravel(), np.asarray(ys, dtype=float).ravel()
        if xs.shape != ys.shape:
            raise AxisError(f"{label}: x and y lengths differ")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise AxisError(f"{label}: non-finite data")
        out.append((label, xs, ys))
    return out


def _range(values, log):
    if values.size == 0:
        return (0.0, 1.0)
    v = np.log10(values) if log else values
    lo, hi = float(v.min()), float(v.max())
    if hi - lo == 0:
        lo, hi = lo - 1.0, hi + 1.0
    return lo, hi


def emit_svg(series, axes, path):
    """Static SVG with one polyline per (label, xs, ys) curve."""
    series = _normalise_series(series)
    for label, xs, ys in series:
        if axes.xlog and np.any(xs <= 0):
            raise AxisError(f"{label}: non-positive x on a log axis")
        if axes.ylog and np.any(ys <= 0):
            raise AxisError(f"{label}: non-positive y on a log axis")
    allx = np.concatenate([s[1] for s in series]) if series else np.array([])
    ally = np.concatenate([s[2] for s in series]) if series else np.array([])
    x0, x1 = _range(allx, axes.xlog)
    y0, y1 = _range(ally, axes.ylog)
    w, h = axes.width, axes.height
    left, right, top, bottom = 70, 20, 40, 50
    pw, ph = w - left - right, h - top - bottom

    def px(x):
        x = math.log10(x) if axes.xlog else x
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        y = math.log10(y) if axes.ylog else y
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        fy = y0 + (y1 - y0) * i / 4
        tx = left + pw * i / 4
        ty = top + ph - ph * i / 4
        lx = f"1e{fx:.2f}" if axes.xlog else f"{fx:.4g}"
        ly = f"1e{fy:.2f}" if axes.ylog else f"{fy:.4g}"
        out.append(f'<line x1="{tx:.2f}" y1="{top + ph}" x2="{tx:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{tx:.2f}" y="{top + ph + 18}" font-size="11" text-anchor="middle">{lx}</text>')
        out.append(f'<line x1="{left - 5}" y1="{ty:.2f}" x2="{left}" y2="{ty:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{ty + 4:.2f}" font-size="11" text-anchor="end">{ly}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{h - 10}" font-size="13" text-anchor="middle">'
               f'{_escape(axes.xlabel)}</text>')
    out.append(f'<text x="15" y="{top + ph / 2:.2f}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 15 {top + ph / 2:.2f})">{_escape(axes.ylabel)}</text>')
    if axes.title:
        out.append(f'<text x="{w / 2:.2f}" y="22" font-size="14" text-anchor="middle">{_escape(axes.title)}</text>')
    for i, (label, xs, ys) in enumerate(series):
        colour = _COLOURS[i % len(_COLOURS)]
        pts = " ".join(f"{px(x):.3f},{py(y):.3f}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}">'
                   f'<title>{_escape(label)}</title></polyline>')
        out.append(f'<text x="{left + 10}" y="{top + 16 + 14 * i}" font-size="11" fill="{colour}">'
                   f'{_escape(label)}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ArchiveError(f"cannot write {path}: {exc}") from exc
    return text
