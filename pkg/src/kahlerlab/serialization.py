"""Tensor files in the ``kct-1`` JSON format.

    {"schema": "kct-1", "n": 2, "entries": [[a, b, c, d, re, im], ...]}

Indices are 1-based.  A file may list only a generating set of components;
the loader closes it under the Kähler symmetries.  Listed values always win
over values implied by symmetry, which makes a save/load round trip
bitwise exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import LoadError
from .tensor_core import KahlerCurvatureTensor, validate

SCHEMA = "kct-1"
LOAD_TOL = 1e-8

_GENERATORS = (((2, 1, 0, 3), False), ((0, 3, 2, 1), False), ((1, 0, 3, 2), True))


def to_dict(T: KahlerCurvatureTensor) -> dict:
    rows = []
    for idx in zip(*np.nonzero(T.entries)):
        z = T.entries[idx]
        rows.append([int(i) + 1 for i in idx] + [float(z.real), float(z.imag)])
    return {"schema": SCHEMA, "n": T.n, "entries": rows}


def serialize(T: KahlerCurvatureTensor, path) -> Path:
    """Write every nonzero component of ``T``."""
    path = Path(path)
    path.write_text(json.dumps(to_dict(T), indent=1) + "\n")
    return path


def _orbit(index: tuple[int, ...]) -> dict[tuple[int, ...], bool]:
    """Orbit of ``index``; the flag says whether the value is conjugated."""
    seen = {index: False}
    frontier = [index]
    while frontier:
        p = frontier.pop()
        for perm, conj in _GENERATORS:
            q = tuple(p[k] for k in perm)
            if q not in seen:
                seen[q] = seen[p] ^ conj
                frontier.append(q)
    return seen


@dataclass(frozen=True)
class LoadReport:
    """Counts of listed components and the 1-based indices filled in by symmetry."""

    given: int
    completed: list[tuple[int, int, int, int]]


def from_dict(data: dict) -> tuple[KahlerCurvatureTensor, LoadReport]:
    """Build a tensor from parsed ``kct-1`` data.

    Raises
    ------
    LoadError
        On a wrong schema, malformed rows, out-of-range indices, or
        components that disagree by more than ``1e-8`` with each other or
        with their symmetry partners.
    """
    if not isinstance(data, dict) or data.get("schema") != SCHEMA:
        raise LoadError(f"expected schema {SCHEMA!r}")
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise LoadError("n must be a positive integer")
    rows = data.get("entries")
    if not isinstance(rows, list):
        raise LoadError("entries must be a list")
    given: dict[tuple[int, ...], complex] = {}
    defects = []
    for k, row in enumerate(rows):
        if not isinstance(row, (list, tuple)) or len(row) != 6:
            raise LoadError(f"entry {k} must be [a, b, c, d, re, im]")
        try:
            idx = tuple(int(i) - 1 for i in row[:4])
            val = complex(float(row[4]), float(row[5]))
        except (TypeError, ValueError) as exc:
            raise LoadError(f"entry {k} is not numeric") from exc
        if any(not 0 <= i < n for i in idx) or any(float(i) != int(i) for i in row[:4]):
            raise LoadError(f"entry {k} has indices outside 1..{n}")
        if idx in given:
            if abs(given[idx] - val) > LOAD_TOL:
                defects.append(f"duplicate {_one_based(idx)}: {given[idx]} vs {val}")
            continue
        given[idx] = val
    implied: dict[tuple[int, ...], tuple[complex, tuple]] = {}
    for idx, val in given.items():
        for q, conj in _orbit(idx).items():
            v = val.conjugate() if conj else val
            if q in given:
                if abs(given[q] - v) > LOAD_TOL:
                    defects.append(f"{_one_based(q)} = {given[q]} but symmetry with "
                                   f"{_one_based(idx)} requires {v}")
            elif q in implied:
                if abs(implied[q][0] - v) > LOAD_TOL:
                    defects.append(f"{_one_based(q)} implied inconsistently by "
                                   f"{_one_based(implied[q][1])} and {_one_based(idx)}")
            else:
                implied[q] = (v, idx)
    if defects:
        raise LoadError("inconsistent tensor file:\n  " + "\n  ".join(sorted(set(defects))))
    arr = np.zeros((n,) * 4, dtype=complex)
    for q, (v, _) in implied.items():
        arr[q] = v
    for q, v in given.items():
        arr[q] = v
    T = KahlerCurvatureTensor(arr)
    bad = validate(T, LOAD_TOL)
    if bad:
        raise LoadError(f"{len(bad)} symmetry defect(s) after closure, worst at "
                        f"{_one_based(bad[0].index)}")
    return T, LoadReport(len(given), sorted(_one_based(q) for q in implied))


def _one_based(idx) -> tuple[int, ...]:
    return tuple(i + 1 for i in idx)


def deserialize_with_report(path) -> tuple[KahlerCurvatureTensor, LoadReport]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"cannot read tensor file {path}: {exc}") from exc
    return from_dict(data)


def deserialize(path) -> KahlerCurvatureTensor:
    """Load a ``kct-1`` file; see :func:`from_dict` for the checks."""
    return deserialize_with_report(path)[0]
