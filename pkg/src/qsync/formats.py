"""Trajectory CSV tables, binary checkpoints and atomic file writes."""

from __future__ import annotations

import csv
import io
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import FormatError
from .grid import GridSpec
from .model import EnsembleState
from .observables import ObservableFrame, correlation_from_upper

REAL_FMT = "%.17g"
MAGIC = b"QSYN1"
_HEADER = struct.Struct("<iidid")


def _file_mode() -> int:
    # mkstemp creates 0600 files; give outputs the usual umask-derived mode
    mask = os.umask(0)
    os.umask(mask)
    return 0o666 & ~mask


def atomic_write(path, data) -> Path:
    """Write ``data`` (str or bytes) to ``path`` through a temporary file in
    the same directory and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode("utf-8") if isinstance(data, str) else bytes(data)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.chmod(tmp, _file_mode())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


# ---------------------------------------------------------------- trajectories


def trajectory_columns(n_osc: int, dim: int) -> list[str]:
    cols = ["time"]
    cols += [f"lambda_{j}" for j in range(1, n_osc + 1)]
    cols += [f"theta_{j}" for j in range(1, n_osc + 1)]
    for j in range(1, n_osc + 1):
        if dim == 1:
            cols.append(f"x_{j}")
        else:
            cols += [f"x_{j}_{d}" for d in range(1, dim + 1)]
    cols += ["zeta_norm", "min_corr", "theta_spread", "diameter"]
    pairs = [(j, k) for j in range(1, n_osc + 1) for k in range(j + 1, n_osc + 1)]
    cols += [f"corr_re_{j}_{k}" for j, k in pairs]
    cols += [f"corr_im_{j}_{k}" for j, k in pairs]
    return cols


def _frame_row(f: ObservableFrame) -> list[float]:
    iu = np.triu_indices(f.n_osc, 1)
    return (
        [f.time]
        + list(f.masses)
        + list(f.thetas)
        + list(f.centers.ravel())
        + [f.zeta_norm, f.min_corr, f.theta_spread, f.diameter]
        + list(f.corr_re[iu])
        + list(f.corr_im[iu])
    )


def format_trajectory(frames, n_osc: int | None = None, dim: int | None = None) -> str:
    frames = list(frames)
    if frames:
        n_osc, dim = frames[0].n_osc, frames[0].dim
    if n_osc is None or dim is None:
        raise ValueError("an empty trajectory needs n_osc and dim for its header")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trajectory_columns(n_osc, dim))
    for f in frames:
        if f.n_osc != n_osc or f.dim != dim:
            raise ValueError("frames disagree on ensemble size or dimension")
        w.writerow([REAL_FMT % float(v) for v in _frame_row(f)])
    return buf.getvalue()


def write_trajectory(path, frames, n_osc=None, dim=None) -> Path:
    return atomic_write(path, format_trajectory(frames, n_osc, dim))


def _shape_from_header(header: list[str]) -> tuple[int, int]:
    n_osc = sum(1 for c in header if c.startswith("lambda_"))
    n_x = sum(1 for c in header if c.startswith("x_"))
    if n_osc < 1 or n_x % n_osc:
        raise FormatError("header does not describe an ensemble", line=1)
    dim = n_x // n_osc
    if header != trajectory_columns(n_osc, dim):
        raise FormatError("unexpected column layout", line=1)
    return n_osc, dim


def parse_trajectory(text: str) -> list[ObservableFrame]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise FormatError("missing header", line=1)
    n, dim = _shape_from_header(rows[0])
    width = len(rows[0])
    npair = n * (n - 1) // 2
    frames, last_t = [], -np.inf
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            raise FormatError(f"expected {width} fields, found {len(row)}", line=lineno)
        try:
            v = np.array([float(x) for x in row])
        except ValueError as exc:
            raise FormatError(str(exc), line=lineno) from None
        t = v[0]
        if not t > last_t:
            raise FormatError("time column is not strictly increasing", line=lineno)
        last_t = t
        i = 1
        masses = v[i : i + n]
        i += n
        thetas = v[i : i + n]
        i += n
        centers = v[i : i + n * dim].reshape(n, dim)
        i += n * dim
        zeta_norm, min_corr, spread, diam = v[i : i + 4]
        i += 4
        up_re = v[i : i + npair]
        up_im = v[i + npair : i + 2 * npair]
        c = correlation_from_upper(n, up_re + 1j * up_im)
        frames.append(
            ObservableFrame(
                time=float(t),
                masses=masses.copy(),
                thetas=thetas.copy(),
                centers=centers.copy(),
                corr_re=c.real.copy(),
                corr_im=c.imag.copy(),
                zeta_norm=float(zeta_norm),
                min_corr=float(min_corr),
                theta_spread=float(spread),
                diameter=float(diam),
            )
        )
    return frames


def read_trajectory(path) -> list[ObservableFrame]:
    return parse_trajectory(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------- checkpoints


def checkpoint(state: EnsembleState) -> bytes:
    g = state.grid
    head = _HEADER.pack(g.dim, g.points_per_dim, g.half_width, state.n_osc, state.time)
    theta = np.ascontiguousarray(state.theta, dtype="<f8").tobytes()
    fields = np.ascontiguousarray(state.psi, dtype="<c16").tobytes()
    return MAGIC + head + theta + fields


def restore(blob: bytes) -> EnsembleState:
    blob = bytes(blob)
    if not blob.startswith(MAGIC):
        raise FormatError("not a checkpoint (bad magic or version)")
    off = len(MAGIC)
    if len(blob) < off + _HEADER.size:
        raise FormatError("checkpoint truncated in header")
    dim, n, half_width, n_osc, time = _HEADER.unpack_from(blob, off)
    off += _HEADER.size
    try:
        grid = GridSpec(dim, n, half_width)
    except ValueError as exc:
        raise FormatError(f"invalid grid in checkpoint: {exc}") from None
    if n_osc < 1:
        raise FormatError("checkpoint declares no oscillators")
    n_field = n_osc * n**dim
    expected = off + 8 * n_osc + 16 * n_field
    if len(blob) != expected:
        raise FormatError(f"checkpoint has {len(blob)} bytes, expected {expected}")
    theta = np.frombuffer(blob, dtype="<f8", count=n_osc, offset=off).astype(float)
    off += 8 * n_osc
    psi = np.frombuffer(blob, dtype="<c16", count=n_field, offset=off).astype(complex)
    return EnsembleState(grid, psi.reshape((n_osc,) + grid.shape), theta, time)


def save_checkpoint(path, state: EnsembleState) -> Path:
    return atomic_write(path, checkpoint(state))


def load_checkpoint(path) -> EnsembleState:
    return restore(Path(path).read_bytes())
