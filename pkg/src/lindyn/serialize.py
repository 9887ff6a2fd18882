"""JSON / CSV formats and atomic report writing.

Complex numbers are written as ``[re, im]`` pairs.  A space header is
``{"p": p, "dim": d}`` with ``p = "inf"`` for the sup norm.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile

import numpy as np

from .operators import MatOp, ScaledOrbit
from .spaces import Functional, SpaceDesc, SpaceVec, norm


def space_to_json(space: SpaceDesc) -> dict:
    return {"p": "inf" if math.isinf(space.p) else space.p, "dim": space.dim}


def space_from_json(obj) -> SpaceDesc:
    p = obj["p"]
    return SpaceDesc(math.inf if p in ("inf", "Infinity") else float(p), int(obj["dim"]))


def complex_pairs(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [complex_pairs(x) for x in a]


def from_pairs(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def vector_to_json(v) -> dict:
    kind = "functional" if isinstance(v, Functional) else "vector"
    return {"kind": kind, "space": space_to_json(v.space), "coords": complex_pairs(v.coords)}


def vector_from_json(obj):
    space = space_from_json(obj["space"])
    cls = Functional if obj.get("kind") == "functional" else SpaceVec
    return cls(space, from_pairs(obj["coords"]))


def matrix_to_json(m) -> list:
    return complex_pairs(np.asarray(m))


def matrix_from_json(obj) -> np.ndarray:
    m = from_pairs(obj)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def load_operator(path, p: float = 2.0) -> MatOp:
    """Read a square matrix file (nested ``[re, im]`` arrays) as an operator on l^p_d."""
    with open(path) as fh:
        m = matrix_from_json(json.load(fh))
    space = SpaceDesc(p, m.shape[0])
    return MatOp(space, space, m)


def tensor_to_json(z) -> dict:
    return {
        "left_space": space_to_json(z.left),
        "right_space": space_to_json(z.right),
        "coeff_matrix": complex_pairs(z.coeff),
    }


def tensor_from_json(obj):
    from .tensor import tensor_from_matrix

    return tensor_from_matrix(from_pairs(obj["coeff_matrix"]),
                              space_from_json(obj["left_space"]),
                              space_from_json(obj["right_space"]))


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed separators, trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False, default=_default) + "\n"


def _default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _clean(obj):
    # JSON has no infinity; encode it as a string the same way p is encoded
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def report_text(obj) -> str:
    return dumps(_clean(obj))


def atomic_write_text(path, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(rows, columns) -> str:
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: r[c] for c in columns})
    return buf.getvalue()


ORBIT_COLUMNS = ["n", "coord", "re", "im", "norm"]
DENSITY_COLUMNS = ["target_index", "best_n", "alpha_re", "alpha_im", "distance"]
LEMMA_COLUMNS = [
    "term", "alpha_re", "alpha_im", "norm_a", "budget_phi", "error_phi", "resolution_phi",
    "norm_phi_sub", "budget_x", "error_x", "resolution_x", "contribution",
]


def orbit_rows(orb: ScaledOrbit) -> list[dict]:
    rows = []
    for n, v in orb:
        nv = norm(v)
        for i, c in enumerate(v.coords):
            rows.append({"n": n, "coord": i, "re": c.real, "im": c.imag, "norm": nv})
    return rows


def orbit_csv(orb: ScaledOrbit) -> str:
    return csv_text(orbit_rows(orb), ORBIT_COLUMNS)


def density_csv(report) -> str:
    return csv_text(report.rows(), DENSITY_COLUMNS)


def lemma_log_csv(result) -> str:
    return csv_text([s.row() for s in result.steps], LEMMA_COLUMNS)
