"""Plain-text interchange for complex arrays.

The format is one header line ``dims: d1 d2 ...`` giving the shape,
followed by the entries in row-major (C) order as ``re,im`` pairs
separated by whitespace.  Entries are written with 17 significant digits
so a write/read round trip is exact for double precision.
"""

from __future__ import annotations

import io

import numpy as np

def dump_matrix(array: np.ndarray, per_line: int = 4) -> str:
    """Serialize a complex array to the textual interchange format.

    Parameters
    ----------
    array : np.ndarray
        Any-rank array; entries are emitted in C order.
    per_line : int
        Number of ``re,im`` pairs per text line (cosmetic only).
    """
    arr = np.asarray(array, dtype=complex)
    out = io.StringIO()
    out.write("dims: " + " ".join(str(d) for d in arr.shape) + "\n")
    flat = arr.reshape(-1)
    for start in range(0, flat.size, per_line):
        chunk = flat[start : start + per_line]
        out.write(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in chunk) + "\n")
    return out.getvalue()

def load_matrix(text: str) -> np.ndarray:
    """Parse the textual interchange format back into a complex array."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("dims:"):
        raise ValueError("missing 'dims:' header line")
    dims = tuple(int(tok) for tok in lines[0][len("dims:") :].split())
    entries = []
    for ln in lines[1:]:
        for token in ln.split():
            re_s, _, im_s = token.partition(",")
            if not _:
                raise ValueError(f"malformed entry {token!r}: expected 're,im'")
            entries.append(complex(float(re_s), float(im_s)))
    expected = int(np.prod(dims)) if dims else 1
    if len(entries) != expected:
        raise ValueError(f"expected {expected} entries for dims {dims}, got {len(entries)}")
    return np.array(entries, dtype=complex).reshape(dims)

def write_matrix(path, array: np.ndarray) -> None:
    """Write ``array`` to ``path`` in the interchange format."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dump_matrix(array))

def read_matrix(path) -> np.ndarray:
    """Read an array previously written by :func:`write_matrix`."""
    with open(path, "r", encoding="ascii") as fh:
        return load_matrix(fh.read())
