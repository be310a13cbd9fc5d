"""
Whitespace-separated tables for distributions and states.

Every file starts with a ``#`` header naming its columns; the header decides
how the file is read back:

    # x1 x2 probability              site distribution
    # x1 x2 c1 c2 probability        coin-resolved distribution
    # x1 x2 c1 c2 re im              state amplitudes
"""

from __future__ import annotations

from pathlib import Path

from .analysis import Distribution

__all__ = [
    "POSITION_HEADER",
    "COIN_HEADER",
    "STATE_HEADER",
    "write_positions",
    "write_coin_resolved",
    "write_state",
    "read_table",
    "TableFormatError",
]

POSITION_HEADER = "# x1 x2 probability"
COIN_HEADER = "# x1 x2 c1 c2 probability"
STATE_HEADER = "# x1 x2 c1 c2 re im"


class TableFormatError(ValueError):
    pass


def _p(x: float) -> str:
    return f"{x:.12g}"


def write_positions(path, dist: Distribution) -> None:
    rows = [f"{x1} {x2} {_p(p)}" for (x1, x2), p in sorted(dist.weights.items())]
    Path(path).write_text("\n".join([POSITION_HEADER, *rows]) + "\n")


def write_coin_resolved(path, dist: Distribution) -> None:
    if dist.coin_weights is None:
        raise ValueError("distribution has no coin resolution")
    rows = [f"{x1} {x2} {c1} {c2} {_p(p)}"
            for (x1, x2, c1, c2), p in sorted(dist.coin_weights.items())]
    Path(path).write_text("\n".join([COIN_HEADER, *rows]) + "\n")


def write_state(path, amplitudes: dict) -> None:
    # 17 significant digits: floats survive the round trip exactly.
    rows = [f"{x1} {x2} {c1} {c2} {a.real:.17g} {a.imag:.17g}"
            for (x1, x2, c1, c2), a in sorted(amplitudes.items())]
    Path(path).write_text("\n".join([STATE_HEADER, *rows]) + "\n")


def read_table(path):
    """
    Read a table written by this module.

    Returns ``("positions", Distribution)``, ``("coins", Distribution)`` or
    ``("state", {(x1, x2, c1, c2): complex})``.
    """
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise TableFormatError(f"{path}: empty file")
    header = " ".join(lines[0].split())
    body = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        body.append((lineno, line.split()))
    try:
        if header == POSITION_HEADER:
            w = {}
            for lineno, f in body:
                _ncols(path, lineno, f, 3)
                w[(int(f[0]), int(f[1]))] = float(f[2])
            return "positions", Distribution(w)
        if header == COIN_HEADER:
            w = {}
            for lineno, f in body:
                _ncols(path, lineno, f, 5)
                w[tuple(int(v) for v in f[:4])] = float(f[4])
            return "coins", Distribution.from_coin_resolved(w)
        if header == STATE_HEADER:
            amps = {}
            for lineno, f in body:
                _ncols(path, lineno, f, 6)
                amps[tuple(int(v) for v in f[:4])] = complex(float(f[4]), float(f[5]))
            return "state", amps
    except ValueError as exc:
        if isinstance(exc, TableFormatError):
            raise
        raise TableFormatError(f"{path}: {exc}") from exc
    raise TableFormatError(f"{path}:1: unrecognised header {lines[0]!r}")


def _ncols(path, lineno, fields, n):
    if len(fields) != n:
        raise TableFormatError(f"{path}:{lineno}: expected {n} columns, got {len(fields)}")
