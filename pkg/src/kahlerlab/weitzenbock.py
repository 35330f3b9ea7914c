"""Curvature term of the Bochner formula on diagonal real (1,1)-forms.

A real (1,1)-form diagonalized in a unitary frame is described by its
eigenvalues ``a``.  Only the roots ``x_i - x_j`` pair nontrivially with it,
so the curvature term reduces to

    q(a) = Σ_{i<j} (a_i - a_j)^2 R_{i ī j j̄}

with the positive normalization constant of the Bochner formula set to 1.
Sign and vanishing locus, which are all that matter here, do not depend on
that constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructuralError
from .tensor_core import KahlerCurvatureTensor, iter_pairs


def _form(a, n: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (n,):
        raise StructuralError(f"form needs {n} eigenvalues, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise StructuralError("form eigenvalues must be finite")
    return a


def bisectional_diagonal(T: KahlerCurvatureTensor) -> np.ndarray:
    """Real matrix ``B[i, j] = R_{i ī j j̄}``."""
    return np.einsum("iijj->ij", T.entries).real


def curvature_term(T: KahlerCurvatureTensor, a) -> float:
    """``Σ_{i<j} (a_i - a_j)^2 R_{iījj̄}`` for the form with eigenvalues ``a``."""
    a = _form(a, T.n)
    B = bisectional_diagonal(T)
    D = (a[:, None] - a[None, :]) ** 2
    # full sum counts each unordered pair twice; the diagonal has D = 0
    return float(0.5 * np.sum(D * B))


def polarization(T: KahlerCurvatureTensor, i: int, j: int) -> float:
    """Recover ``R_{iījj̄}`` from values of the curvature term.

    ``q(e_i) + q(e_j) - q(e_i + e_j) = 2 R_{iījj̄}`` for ``i != j``.
    """
    n = T.n
    e = np.eye(n)
    q = lambda v: curvature_term(T, v)  # noqa: E731
    return 0.5 * (q(e[i]) + q(e[j]) - q(e[i] + e[j]))


@dataclass(frozen=True)
class ParallelReport:
    """Outcome of :func:`parallel_consequence_check`.

    ``applicable`` is True when the curvature term vanishes to ``tol``;
    only then must ``offending`` be empty.
    """

    curvature_term: float
    applicable: bool
    distinct: bool
    offending: list[tuple[int, int]]

    @property
    def ok(self) -> bool:
        return not (self.applicable and self.offending)

    def to_dict(self) -> dict:
        return {
            "curvature_term": self.curvature_term,
            "applicable": self.applicable,
            "distinct": self.distinct,
            "offending": [list(p) for p in self.offending],
            "ok": self.ok,
        }


def parallel_consequence_check(T: KahlerCurvatureTensor, a, tol: float = 1e-8) -> ParallelReport:
    """Check that a vanishing curvature term kills the bisectional terms it sees.

    For a tensor with nonnegative orthogonal bisectional curvature every
    summand of the curvature term is nonnegative, so ``q(a) <= tol`` forces
    each summand ``(a_i - a_j)^2 R_{iījj̄}`` below ``tol``.  A pair is listed
    when its difference and its component both exceed ``tol`` and so does
    their product; with the product test the list is guaranteed empty
    whenever the term vanishes and the tensor lies in the cone.
    """
    a = _form(a, T.n)
    B = bisectional_diagonal(T)
    q = curvature_term(T, a)
    offending = []
    for i, j in iter_pairs(T.n):
        d = (a[i] - a[j]) ** 2
        if d > tol and B[i, j] > tol and d * B[i, j] > tol:
            offending.append((i, j))
    distinct = len(np.unique(a)) == len(a)
    return ParallelReport(q, q <= tol, distinct, offending)
