"""Named-block text serialization for model parameters.

A file is a sequence of blocks.  Each block starts with a header line
``name: d1 [d2 ...]`` giving the array shape, followed by the values in
row-major order: vectors on one line, higher-rank arrays one line per
leading index.  Values are written with 17 significant digits so doubles
round-trip exactly.  Lines starting with ``#`` before a header are ignored,
as are blank lines between blocks.
"""

import numpy as np

from .errors import DataFormatError


def format_value(v: float) -> str:
    return "%.17g" % v


def write_blocks(path, blocks: dict, preamble: list | None = None):
    with open(path, "w", encoding="ascii") as fh:
        for line in preamble or []:
            fh.write(line.rstrip("\n") + "\n")
        for name, array in blocks.items():
            arr = np.asarray(array, dtype=np.float64)
            shape = arr.shape if arr.ndim > 0 else (1,)
            fh.write(f"{name}: " + " ".join(str(d) for d in shape) + "\n")
            rows = arr.reshape(shape[0], -1) if arr.ndim > 1 else arr.reshape(1, -1)
            for row in rows:
                fh.write(" ".join(format_value(v) for v in row) + "\n")


def read_blocks(path):
    """Parse a block file; returns ``(blocks)`` dict of name -> ndarray.

    Use :func:`read_blocks_with_preamble` when leading non-block lines
    carry metadata.
    """
    blocks, _ = read_blocks_with_preamble(path, allow_preamble=False)
    return blocks


def read_blocks_with_preamble(path, allow_preamble: bool = True):
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    preamble = []
    blocks = {}
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if line == "" or line.startswith("#"):
            i += 1
            continue
        header = _try_parse_header(line)
        if header is None:
            if not allow_preamble or blocks:
                raise DataFormatError(f"malformed block header at line {i + 1}: {line!r}")
            preamble.append(lines[i])
            i += 1
            continue
        name, shape = header
        n_lines = shape[0] if len(shape) > 1 else 1
        per_line = int(np.prod(shape[1:], dtype=np.int64)) if len(shape) > 1 else shape[0]
        values = []
        i += 1
        for _ in range(n_lines):
            if i >= len(lines):
                raise DataFormatError(f"block {name!r} truncated in {path}")
            toks = lines[i].split()
            if len(toks) != per_line:
                raise DataFormatError(
                    f"block {name!r}: expected {per_line} values on line "
                    f"{i + 1}, got {len(toks)}"
                )
            try:
                values.extend(float(t) for t in toks)
            except ValueError as exc:
                raise DataFormatError(
                    f"block {name!r}: bad value on line {i + 1}"
                ) from exc
            i += 1
        blocks[name] = np.array(values, dtype=np.float64).reshape(shape)
    return blocks, preamble


def _try_parse_header(line):
    if ":" not in line:
        return None
    name, _, rest = line.partition(":")
    toks = rest.split()
    if not toks:
        return None
    try:
        shape = tuple(int(t) for t in toks)
    except ValueError:
        return None
    if any(d < 1 for d in shape):
        return None
    return name.strip(), shape
