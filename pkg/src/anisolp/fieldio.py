"""File formats: AFLD field snapshots, run configuration, monitor CSV.

AFLD layout (all little-endian):

    magic   4 bytes  b"AFLD"
    version u16      1
    n1, n2, n3  u32
    ncomp   u16
    layout  u8       0 = real samples, 1 = complex half-spectrum
    payload          float64, component-major then row-major (C order)

Layout 1 stores, per component, the complex coefficients for k3 in
[0, n3/2] (shape n1 x n2 x (n3/2 + 1), 16 bytes per entry); the negative-k3
half is reconstructed by Hermitian symmetry.  Writing a spectral field and
reading it back is bit-exact on the stored half; fields are canonicalized
(negative half replaced by the conjugate image) before writing so that the
in-memory and on-disk representations agree bitwise.
"""

import struct

import numpy as np

from .errors import ConfigError, FieldFileError
from .grid import Grid, RealField, SpectralField

MAGIC = b"AFLD"
VERSION = 1
_HEADER = struct.Struct("<4sHIIIHB")

FLOAT_FMT = "%.17g"  # lossless decimal round trip for float64


def _half(coeffs):
    n3 = coeffs.shape[2]
    return coeffs[:, :, : n3 // 2 + 1]


def _full_from_half(half, n3):
    n1, n2 = half.shape[:2]
    full = np.zeros((n1, n2, n3), dtype=np.complex128)
    full[:, :, : n3 // 2 + 1] = half
    rev1 = (-np.arange(n1)) % n1
    rev2 = (-np.arange(n2)) % n2
    src3 = np.arange(n3 // 2 - 1, 0, -1)
    full[:, :, n3 // 2 + 1 :] = np.conj(half[np.ix_(rev1, rev2, src3)])
    return full


def hermitian_canonical(a: SpectralField) -> SpectralField:
    """Replace the negative-k3 half by the exact conjugate image of the
    stored half, making the coefficients exactly what AFLD will hold."""
    return SpectralField(a.grid, _full_from_half(_half(a.coeffs), a.grid.n3))


def write_afld(path, grid: Grid, components, layout: int):
    """Write real samples (layout 0) or spectral fields (layout 1)."""
    if layout not in (0, 1):
        raise FieldFileError(f"unknown layout {layout}")
    ncomp = len(components)
    parts = [_HEADER.pack(MAGIC, VERSION, grid.n1, grid.n2, grid.n3, ncomp, layout)]
    for comp in components:
        if layout == 0:
            arr = np.ascontiguousarray(comp.samples.real, dtype="<f8")
        else:
            arr = np.ascontiguousarray(_half(comp.coeffs), dtype="<c16")
        parts.append(arr.tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def read_afld(path):
    """Read an AFLD file; returns (grid, layout, list of fields)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise FieldFileError("file shorter than header")
    magic, version, n1, n2, n3, ncomp, layout = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FieldFileError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FieldFileError(f"unsupported version {version}")
    if layout not in (0, 1):
        raise FieldFileError(f"unknown layout {layout}")
    grid = Grid(n1, n2, n3)
    if layout == 0:
        per_comp = n1 * n2 * n3 * 8
        dtype = "<f8"
        shape = (n1, n2, n3)
    else:
        per_comp = n1 * n2 * (n3 // 2 + 1) * 16
        dtype = "<c16"
        shape = (n1, n2, n3 // 2 + 1)
    expected = _HEADER.size + ncomp * per_comp
    if len(blob) != expected:
        raise FieldFileError(
            f"payload length {len(blob) - _HEADER.size} does not match header "
            f"arithmetic ({ncomp} x {per_comp} bytes)"
        )
    fields = []
    for i in range(ncomp):
        start = _HEADER.size + i * per_comp
        arr = np.frombuffer(blob[start : start + per_comp], dtype=dtype).reshape(shape)
        if layout == 0:
            fields.append(RealField(grid, arr.copy()))
        else:
            fields.append(SpectralField(grid, _full_from_half(arr, n3)))
    return grid, layout, fields


# ---------------------------------------------------------------------------
# run configuration


RUN_CONFIG_KEYS = {
    "grid.n": int,
    "solver.nu": float,
    "solver.dt": float,
    "solver.t_end": float,
    "solver.integrator": str,
    "monitor.p": float,
    "monitor.r": float,
    "monitor.theta": float,
    "monitor.e": "vec3",
    "monitor.cadence": int,
    "init.kind": str,
    "init.seed": int,
    "output.dir": str,
}

OPTIONAL_KEYS = {
    "init.band": "vec2",
    "init.slope": float,
    "init.amplitude": float,
    "solver.dealias": str,
}

KEY_ORDER = list(RUN_CONFIG_KEYS) + list(OPTIONAL_KEYS)


def _convert(key, raw, kind, line_no):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is str:
            return raw
        parts = raw.replace(",", " ").split()
        if kind == "vec3":
            if len(parts) != 3:
                raise ValueError("expected three numbers")
            return tuple(float(x) for x in parts)
        if kind == "vec2":
            if len(parts) != 2:
                raise ValueError("expected two numbers")
            return tuple(int(x) for x in parts)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {key} = {raw!r}: {exc}", line_no) from None
    raise ConfigError(f"unhandled kind for {key}", line_no)


def parse_run_config(text: str) -> dict:
    """Strict key = value parser; unknown or duplicate keys are errors."""
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", line_no)
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key in RUN_CONFIG_KEYS:
            kind = RUN_CONFIG_KEYS[key]
        elif key in OPTIONAL_KEYS:
            kind = OPTIONAL_KEYS[key]
        else:
            raise ConfigError(f"unknown key {key!r}", line_no)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", line_no)
        values[key] = _convert(key, raw, kind, line_no)
    missing = [k for k in RUN_CONFIG_KEYS if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    return values


def format_run_config(values: dict) -> str:
    lines = []
    for key in KEY_ORDER:
        if key not in values:
            continue
        val = values[key]
        if isinstance(val, tuple):
            rendered = " ".join(
                str(int(x)) if float(x).is_integer() else FLOAT_FMT % x for x in val
            )
        elif isinstance(val, float):
            rendered = FLOAT_FMT % val
        else:
            rendered = str(val)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def load_run_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_run_config(fh.read())


# ---------------------------------------------------------------------------
# monitor CSV


def monitor_csv(records, field_names) -> str:
    lines = [",".join(field_names)]
    for rec in records:
        cells = []
        for name in field_names:
            val = getattr(rec, name)
            if name == "healthy":
                cells.append(str(int(val)))
            else:
                cells.append(FLOAT_FMT % val)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
