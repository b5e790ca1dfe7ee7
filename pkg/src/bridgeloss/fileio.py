"""Trace parsers, delimited tables, flat key-value reports and configuration."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cpw import CpwGeometry
from .errors import BridgeLossError, DomainError, ParseError
from .loss import BridgeGeometry, DielectricSpec
from .reference import (
    ALOX_PERMITTIVITY,
    ALOX_THICKNESS,
    AMORPHOUS_LOSS_TANGENT,
    BRIDGE_HEIGHT,
    BRIDGE_SPAN,
    BRIDGE_WIDTH,
    CENTER_WIDTH,
    GAP,
    SIO2_PERMITTIVITY,
    SUBSTRATE_PERMITTIVITY,
)
from .regression import LossDataset
from .resonator import S21Trace

CONFIG_ENV = "BRIDGELOSS_CONFIG"

FREQ_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
DATA_FORMATS = ("RI", "MA", "DB")
POWER_MARKER = "input_power_dbm"


class ReportError(BridgeLossError):
    """A report or figure could not be written."""


# --- Touchstone -----------------------------------------------------------------

@dataclass(frozen=True)
class TouchstoneOptions:
    freq_unit: str = "GHZ"
    parameter: str = "S"
    data_format: str = "MA"
    reference: float = 50.0


def parse_option_line(line: str, where: str = "option line") -> TouchstoneOptions:
    tokens = line[1:].split()
    opts = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in FREQ_UNITS:
            key, val = "freq_unit", tok
        elif tok in ("S", "Y", "Z", "H", "G"):
            key, val = "parameter", tok
        elif tok in DATA_FORMATS:
            key, val = "data_format", tok
        elif tok == "R":
            if i + 1 >= len(tokens):
                raise ParseError("option line: R without a reference impedance", where)
            try:
                val = float(tokens[i + 1])
            except ValueError:
                raise ParseError(f"option line: bad reference impedance {tokens[i + 1]!r}",
                                 where) from None
            key = "reference"
            i += 1
        else:
            raise ParseError(f"option line: unknown token {tokens[i]!r}", where)
        if key in opts:
            raise ParseError(f"option line: {key} given twice", where)
        opts[key] = val
        i += 1
    result = TouchstoneOptions(**opts)
    if result.parameter != "S":
        raise ParseError(f"only S parameters are supported, got {result.parameter}",
                         where)
    return result


def _pair_to_complex(a: float, b: float, data_format: str) -> complex:
    if data_format == "RI":
        return complex(a, b)
    mag = a if data_format == "MA" else 10.0 ** (a / 20.0)
    ang = math.radians(b)
    return complex(mag * math.cos(ang), mag * math.sin(ang))


def _power_from_comment(comment: str):
    # "! input_power_dbm = -120" starts a new sweep block.
    body = comment.strip()
    if not body.lower().startswith(POWER_MARKER):
        return None
    rest = body[len(POWER_MARKER):].strip().lstrip("=:").strip()
    try:
        return float(rest.split()[0])
    except (ValueError, IndexError):
        return None


def parse_touchstone_text(text: str, source: str = "<string>") -> list[S21Trace]:
    """Parse 2-port Touchstone v1 content into S21 traces.

    A comment of the form ``! input_power_dbm = <value>`` starts a new trace
    at that feedline power, so one file can hold a power sweep.
    """
    options = None
    blocks = []
    current = {"power": None, "f": [], "z": []}

    def flush():
        if current["f"]:
            blocks.append(dict(current))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line, _, comment = raw.partition("!")
        if comment:
            power = _power_from_comment(comment)
            if power is not None and not line.strip():
                flush()
                current = {"power": power, "f": [], "z": []}
                continue
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if options is not None:
                raise ParseError("second option line", f"{source}:{lineno}")
            options = parse_option_line(line, f"{source}:{lineno}")
            continue
        if line.startswith("["):
            raise ParseError("Touchstone v2 keywords are not supported", f"{source}:{lineno}")
        if options is None:
            options = TouchstoneOptions()
        cols = line.split()
        if len(cols) != 9:
            raise ParseError(f"expected 9 columns for a 2-port row, got {len(cols)}",
                             f"{source}:{lineno}")
        try:
            vals = [float(c) for c in cols]
        except ValueError:
            raise ParseError("non-numeric value in data row", f"{source}:{lineno}") from None
        freq = vals[0] * FREQ_UNITS[options.freq_unit]
        if current["f"] and not freq > current["f"][-1]:
            raise ParseError("frequencies must be strictly increasing", f"{source}:{lineno}")
        current["f"].append(freq)
        current["z"].append(_pair_to_complex(vals[3], vals[4], options.data_format))
    flush()
    if not blocks:
        raise ParseError("no data rows", source)
    return [S21Trace(np.array(b["f"]), np.array(b["z"]), b["power"]) for b in blocks]


def parse_touchstone(path) -> list[S21Trace]:
    path = Path(path)
    return parse_touchstone_text(path.read_text(), str(path))


def format_touchstone(traces: Sequence[S21Trace], freq_unit: str = "HZ") -> str:
    """2-port RI Touchstone text with S21 = S12 = trace and S11 = S22 = 0."""
    scale = FREQ_UNITS[freq_unit.upper()]
    out = [f"# {freq_unit.upper()} S RI R 50"]
    for tr in traces:
        if tr.input_power is not None:
            out.append(f"! {POWER_MARKER} = {tr.input_power:.17g}")
        for f, z in zip(tr.frequencies, tr.s21):
            re, im = f"{z.real:.17g}", f"{z.imag:.17g}"
            out.append(f"{f / scale:.17g} 0 0 {re} {im} {re} {im} 0 0")
    return "\n".join(out) + "\n"


# --- CSV traces -----------------------------------------------------------------

CSV_TRACE_HEADER = ("freq_hz", "s21_re", "s21_im")


def _read_rows(text: str, source: str):
    rows = list(csv.reader(io.StringIO("\n".join(text.splitlines()))))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty file", source)
    header = [c.strip().lower() for c in rows[0]]
    return header, rows[1:]


def _float(cell: str, source: str, row: int, col: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"non-numeric {col} value {cell!r}", f"{source}: row {row}") from None


def parse_csv_sweep(path) -> list[S21Trace]:
    """CSV traces grouped by the optional ``power_dbm`` column, in file order."""
    path = Path(path)
    return parse_csv_sweep_text(path.read_text(), str(path))


def parse_csv_sweep_text(text: str, source: str = "<string>") -> list[S21Trace]:
    header, rows = _read_rows(text, source)
    if tuple(header[:3]) != CSV_TRACE_HEADER or len(header) > 4 or (
            len(header) == 4 and header[3] != "power_dbm"):
        raise ParseError("header must be freq_hz,s21_re,s21_im[,power_dbm]", f"{source}: row 0")
    has_power = len(header) == 4
    groups: dict = {}
    for i, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(row)}",
                             f"{source}: row {i}")
        f = _float(row[0], source, i, "freq_hz")
        z = complex(_float(row[1], source, i, "s21_re"), _float(row[2], source, i, "s21_im"))
        p = _float(row[3], source, i, "power_dbm") if has_power else None
        g = groups.setdefault(p, ([], [], []))
        if g[0] and not f > g[0][-1]:
            raise ParseError("frequencies must be strictly increasing", f"{source}: row {i}")
        g[0].append(f)
        g[1].append(z)
        g[2].append(i)
    if not groups:
        raise ParseError("no data rows", source)
    return [S21Trace(np.array(f), np.array(z), p) for p, (f, z, _) in groups.items()]


def parse_csv_complex(path) -> S21Trace:
    path = Path(path)
    return parse_csv_complex_text(path.read_text(), str(path))


def parse_csv_complex_text(text: str, source: str = "<string>") -> S21Trace:
    traces = parse_csv_sweep_text(text, source)
    if len(traces) != 1:
        raise ParseError(f"file holds {len(traces)} power levels; use a sweep reader", source)
    return traces[0]


def format_csv_traces(traces: Sequence[S21Trace]) -> str:
    with_power = any(t.input_power is not None for t in traces)
    if with_power and any(t.input_power is None for t in traces):
        raise DomainError("either all or none of the traces need an input power")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_TRACE_HEADER + (("power_dbm",) if with_power else ()))
    for tr in traces:
        for f, z in zip(tr.frequencies, tr.s21):
            row = [f"{f:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"]
            if with_power:
                row.append(f"{tr.input_power:.17g}")
            w.writerow(row)
    return buf.getvalue()


def write_csv_trace(trace: S21Trace | Sequence[S21Trace], path) -> Path:
    traces = [trace] if isinstance(trace, S21Trace) else list(trace)
    return _write_text(path, format_csv_traces(traces))


def read_traces(path, fmt: str | None = None) -> list[S21Trace]:
    """Read traces from a Touchstone (.s2p/.ts) or CSV file."""
    path = Path(path)
    if fmt is None:
        fmt = "csv_complex" if path.suffix.lower() == ".csv" else "touchstone_2port"
    if fmt == "csv_complex":
        return parse_csv_sweep(path)
    if fmt == "touchstone_2port":
        return parse_touchstone(path)
    raise DomainError(f"unknown trace format {fmt!r}")


# --- Loss datasets --------------------------------------------------------------

def parse_loss_csv(path, power_label: str = "low") -> LossDataset:
    """CSV with header ``bridge_count,loss[,loss_err]``."""
    path = Path(path)
    source = str(path)
    header, rows = _read_rows(path.read_text(), source)
    if header[:2] != ["bridge_count", "loss"] or len(header) > 3 or (
            len(header) == 3 and header[2] != "loss_err"):
        raise ParseError("header must be bridge_count,loss[,loss_err]", f"{source}: row 0")
    counts, losses, errs = [], [], []
    for i, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(row)}",
                             f"{source}: row {i}")
        n = _float(row[0], source, i, "bridge_count")
        if n != int(n):
            raise ParseError(f"bridge_count must be an integer, got {row[0]!r}",
                             f"{source}: row {i}")
        counts.append(int(n))
        losses.append(_float(row[1], source, i, "loss"))
        if len(header) == 3:
            errs.append(_float(row[2], source, i, "loss_err"))
    try:
        return LossDataset(np.array(counts), np.array(losses),
                           np.array(errs) if errs else None, power_label)
    except DomainError as exc:
        raise ParseError(str(exc), source) from exc


def format_loss_csv(dataset: LossDataset) -> str:
    rows = [["bridge_count", "loss"] + (["loss_err"] if dataset.loss_errs is not None else [])]
    for n, y, e in dataset.points:
        rows.append([str(n), f"{y:.17g}"] + ([f"{e:.17g}"] if e is not None else []))
    return "".join(",".join(r) + "\n" for r in rows)


def format_table(columns: Mapping[str, Iterable[float]]) -> str:
    """Comma-delimited table with a header row, floats at 17 significant digits."""
    names = list(columns)
    data = [list(columns[n]) for n in names]
    if len({len(d) for d in data}) > 1:
        raise DomainError("table columns differ in length")
    lines = [",".join(names)]
    for row in zip(*data):
        lines.append(",".join(_fmt_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _fmt_cell(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if v is None:
        return ""
    return f"{float(v):.17g}"


# --- Reports --------------------------------------------------------------------

def _clean(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, complex):
        raise DomainError("complex values must be split before reporting")
    return v


def format_report(record: Mapping[str, object]) -> str:
    """Flat key-value JSON with sorted keys; nested mappings are rejected."""
    flat = {}
    for k, v in record.items():
        if isinstance(v, Mapping) or (isinstance(v, (list, tuple)) and not isinstance(v, str)):
            raise DomainError(f"report value for {k!r} is not a scalar")
        flat[str(k)] = _clean(v)
    return json.dumps(flat, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(record: Mapping[str, object], path) -> Path:
    return _write_text(path, format_report(record))


def read_report(path) -> dict:
    return json.loads(Path(path).read_text())


def _write_text(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}") from exc
    return path


def write_text(path, text: str) -> Path:
    return _write_text(path, text)


# --- Configuration --------------------------------------------------------------

def default_dielectrics() -> dict[str, DielectricSpec]:
    return {
        # Residue thickness is illustrative; override per run.
        "SiO2": DielectricSpec(100e-9, SIO2_PERMITTIVITY, AMORPHOUS_LOSS_TANGENT),
        "AlOx": DielectricSpec(ALOX_THICKNESS, ALOX_PERMITTIVITY, AMORPHOUS_LOSS_TANGENT),
    }


@dataclass(frozen=True)
class ProjectConfig:
    geometry: CpwGeometry = field(default_factory=lambda: CpwGeometry(
        CENTER_WIDTH, GAP, SUBSTRATE_PERMITTIVITY))
    bridge: BridgeGeometry = field(default_factory=lambda: BridgeGeometry(
        BRIDGE_SPAN, BRIDGE_WIDTH, BRIDGE_HEIGHT))
    dielectrics: dict = field(default_factory=default_dielectrics)
    max_iterations: int = 200
    step_tol: float = 1e-10
    output_dir: str = "bridgeloss-out"

    def __post_init__(self):
        missing = {"SiO2", "AlOx"} - set(self.dielectrics)
        if missing:
            raise DomainError(f"dielectric presets missing: {sorted(missing)}")


def _scaled(section: Mapping, key: str, unit: float, default: float) -> float:
    if key in section:
        return float(section[key]) * unit
    return default


def load_config(path=None) -> ProjectConfig:
    """Load a JSON config from ``path`` or the ``BRIDGELOSS_CONFIG`` variable.

    Lengths use ``_um``/``_nm`` key suffixes. Unknown top-level keys are
    rejected. User dielectrics are merged over the SiO2/AlOx presets.
    """
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    cfg = ProjectConfig()
    if path is None:
        return cfg
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"{path}:{exc.lineno}") from exc
    if not isinstance(data, dict):
        raise ParseError("config must be a JSON object", str(path))
    known = {"geometry", "bridge", "dielectrics", "fit", "output_dir"}
    unknown = set(data) - known
    if unknown:
        raise ParseError(f"unknown config keys {sorted(unknown)}", str(path))

    g = data.get("geometry", {})
    geometry = CpwGeometry(
        _scaled(g, "center_width_um", 1e-6, cfg.geometry.center_width),
        _scaled(g, "gap_um", 1e-6, cfg.geometry.gap),
        float(g.get("substrate_rel_permittivity", cfg.geometry.substrate_rel_permittivity)),
        str(g.get("film", cfg.geometry.film)),
    )
    b = data.get("bridge", {})
    bridge = BridgeGeometry(
        _scaled(b, "span_width_um", 1e-6, cfg.bridge.span_width),
        _scaled(b, "bridge_width_um", 1e-6, cfg.bridge.bridge_width),
        _scaled(b, "height_um", 1e-6, cfg.bridge.height),
    )
    dielectrics = dict(cfg.dielectrics)
    for name, spec in data.get("dielectrics", {}).items():
        base = dielectrics.get(name, DielectricSpec(0.0, 1.0, AMORPHOUS_LOSS_TANGENT))
        dielectrics[name] = DielectricSpec(
            _scaled(spec, "thickness_nm", 1e-9, base.thickness),
            float(spec.get("rel_permittivity", base.rel_permittivity)),
            float(spec.get("loss_tangent", base.loss_tangent)),
        )
    fit = data.get("fit", {})
    return replace(
        cfg,
        geometry=geometry,
        bridge=bridge,
        dielectrics=dielectrics,
        max_iterations=int(fit.get("max_iterations", cfg.max_iterations)),
        step_tol=float(fit.get("step_tol", cfg.step_tol)),
        output_dir=str(data.get("output_dir", cfg.output_dir)),
    )


def dataclass_record(obj, prefix: str = "") -> dict:
    """Flatten a dataclass of scalars into report keys."""
    if not is_dataclass(obj):
        raise DomainError("expected a dataclass")
    out = {}
    for f in fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, (int, float, str, np.floating, np.integer)):
            out[prefix + f.name] = v
    return out
