"""Plain-text matrix file format used for golden tests.

First line: "rows cols". Then one row per line, space-separated decimals
with 17 significant digits (bit-exact float64 round trip).
"""

import numpy as np

from .errors import ParseError


def save_matrix(A, path):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ParseError("only 2-d matrices can be saved")
    with open(path, "w") as fh:
        fh.write(f"{A.shape[0]} {A.shape[1]}\n")
        for row in A:
            fh.write(" ".join("%.17g" % x for x in row))
            fh.write("\n")


def load_matrix(path):
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError("header must be 'rows cols'", line=1)
        try:
            rows, cols = int(header[0]), int(header[1])
        except ValueError as exc:
            raise ParseError(f"bad header: {exc}", line=1) from exc
        data = np.empty((rows, cols), dtype=np.float64)
        for i in range(rows):
            parts = fh.readline().split()
            if len(parts) != cols:
                raise ParseError(f"expected {cols} values, got {len(parts)}", line=i + 2)
            try:
                data[i] = [float(p) for p in parts]
            except ValueError as exc:
                raise ParseError(f"bad value: {exc}", line=i + 2) from exc
    return data
