"""Numerical certification of curvature-positivity cones.

Each condition is the minimum of a polynomial over a frame manifold:

========== ======================================= ==================================
condition  objective                               frame manifold
========== ======================================= ==================================
OHB        R(X, X̄, Y, Ȳ)                           Hermitian-orthonormal pairs in C^n
HB         R(X, X̄, Y, Ȳ)                           pairs of unit vectors in C^n
HolSec     R(X, X̄, X, X̄)                           unit vectors in C^n
Isotropic  K13 + K14 + K23 + K24 - 2 R1234         orthonormal 4-frames in R^2n
========== ======================================= ==================================

The isotropic objective is the standard four-frame expression, evaluated on
:func:`~kahlerlab.tensor_core.realify` output.  ``Kij`` is the sectional
curvature ``R(ei, ej, ej, ei)`` and ``R1234`` is taken in the convention
where ``R(a, b, a, b)`` is sectional, i.e. ``R1234 = R(e1, e2, e4, e3)`` here.
The minimum is insensitive to that sign choice since swapping ``e3`` and
``e4`` flips it.

Minimization is multi-start projected gradient descent: an ambient gradient
step, projection onto the tangent space, Gram–Schmidt re-orthonormalization,
and step halving whenever the value fails to decrease.  All starts advance
together as one batch, so results depend only on the seed.

"Certified" is a numerical statement: every start ended at a stationary
point with value ``>= -tolerance``.  Nothing here is a proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import PreconditionError, StructuralError
from .tensor_core import KahlerCurvatureTensor, RealCurvatureTensor, realify


class Condition(str, Enum):
    OHB = "OHB"
    HB = "HB"
    HOLSEC = "HolSec"
    ISOTROPIC = "Isotropic"


class Status(str, Enum):
    CERTIFIED = "CertifiedNonnegative"
    VIOLATED = "Violated"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class CertifyOptions:
    starts: int = 64
    max_iters: int = 500
    tolerance: float = 1e-9
    seed: int = 0
    gtol: float = 1e-6


@dataclass(frozen=True)
class CertificationResult:
    """Outcome of one cone-membership minimization.

    ``argmin`` holds the frame vectors: ``(X, Y)`` for OHB/HB, ``(X,)`` for
    HolSec and the four real vectors for Isotropic.
    """

    condition: Condition
    min_value: float
    argmin: tuple
    status: Status
    starts: int
    tolerance: float
    converged: int = 0
    iterations: int = 0
    start_values: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        def enc(v):
            v = np.asarray(v)
            if np.iscomplexobj(v):
                return [[float(z.real), float(z.imag)] for z in v]
            return [float(z) for z in v]

        return {
            "condition": self.condition.value,
            "min_value": float(self.min_value),
            "status": self.status.value,
            "starts": self.starts,
            "converged": self.converged,
            "iterations": self.iterations,
            "tolerance": self.tolerance,
            "argmin": [enc(v) for v in self.argmin],
        }


def _gram_schmidt(Q: np.ndarray) -> np.ndarray:
    """Orthonormalize the rows of each frame in a batch ``(S, k, m)``."""
    Q = Q.copy()
    k = Q.shape[1]
    for i in range(k):
        v = Q[:, i]
        for j in range(i):
            u = Q[:, j]
            v = v - np.sum(v * u.conj(), axis=1, keepdims=True) * u
        v = v / np.linalg.norm(v, axis=1, keepdims=True)
        Q[:, i] = v
    return Q


def _project_stiefel(Q: np.ndarray, G: np.ndarray) -> np.ndarray:
    # tangent space of {Q Q^H = I}: Z Q^H + Q Z^H = 0
    A = G @ Q.conj().transpose(0, 2, 1)
    sym = 0.5 * (A + A.conj().transpose(0, 2, 1))
    return G - sym @ Q


def _project_spheres(Q: np.ndarray, G: np.ndarray) -> np.ndarray:
    radial = np.sum(G * Q.conj(), axis=2, keepdims=True).real
    return G - radial * Q


class _Problem:
    """Objective, gradient and manifold structure for one condition."""

    dtype = complex

    def __init__(self, entries: np.ndarray, k: int, dim: int):
        self.R = entries
        self.k = k
        self.dim = dim

    def random_frames(self, rng: np.random.Generator, S: int) -> np.ndarray:
        shape = (S, self.k, self.dim)
        Q = rng.standard_normal(shape)
        if self.dtype is complex:
            Q = Q + 1j * rng.standard_normal(shape)
        return self.retract(Q)

    def retract(self, Q):
        return _gram_schmidt(Q)

    def project(self, Q, G):
        return _project_stiefel(Q, G)

    def value_grad(self, Q):
        raise NotImplementedError


class _PairProblem(_Problem):
    def value_grad(self, Q):
        X, Y = Q[:, 0], Q[:, 1]
        M = np.einsum("abcd,sc,sd->sab", self.R, Y, Y.conj())
        N = np.einsum("abcd,sa,sb->scd", self.R, X, X.conj())
        gX = 2.0 * np.einsum("sab,sa->sb", M, X)
        gY = 2.0 * np.einsum("scd,sc->sd", N, Y)
        f = np.einsum("sb,sb->s", gX, X.conj()).real / 2.0
        return f, np.stack([gX, gY], axis=1)


class _OHBProblem(_PairProblem):
    def __init__(self, entries):
        super().__init__(entries, 2, entries.shape[0])


class _HBProblem(_PairProblem):
    def __init__(self, entries):
        super().__init__(entries, 2, entries.shape[0])

    def retract(self, Q):
        return Q / np.linalg.norm(Q, axis=2, keepdims=True)

    def project(self, Q, G):
        return _project_spheres(Q, G)


class _HolSecProblem(_Problem):
    def __init__(self, entries):
        super().__init__(entries, 1, entries.shape[0])

    def value_grad(self, Q):
        X = Q[:, 0]
        M = np.einsum("abcd,sc,sd->sab", self.R, X, X.conj())
        g = 4.0 * np.einsum("sab,sa->sb", M, X)
        f = np.einsum("sb,sb->s", g, X.conj()).real / 4.0
        return f, g[:, None, :]


# (coefficient, slots) of K13 + K14 + K23 + K24 - 2 R1234, 0-based slots, in
# the convention R(a, b, b, a) = sectional.
_ISOTROPIC_TERMS = (
    (1.0, (0, 2, 2, 0)),
    (1.0, (0, 3, 3, 0)),
    (1.0, (1, 2, 2, 1)),
    (1.0, (1, 3, 3, 1)),
    (-2.0, (0, 1, 3, 2)),
)


def isotropic_weights() -> np.ndarray:
    W = np.zeros((4, 4, 4, 4))
    for coef, (p, q, r, s) in _ISOTROPIC_TERMS:
        W[p, q, r, s] += coef
    return W


class _IsotropicProblem(_Problem):
    dtype = float

    def __init__(self, real_entries):
        super().__init__(real_entries, 4, real_entries.shape[0])
        self.W = isotropic_weights()

    def value_grad(self, Q):
        # f = Σ W[p,q,r,s] R(e_p, e_q, e_r, e_s); contract slot by slot
        R = self.R
        G = np.zeros_like(Q)
        f = np.zeros(Q.shape[0])
        for coef, (p, q, r, s) in _ISOTROPIC_TERMS:
            a, b, c, d = Q[:, p], Q[:, q], Q[:, r], Q[:, s]
            Rd = np.einsum("ijkl,sl->sijk", R, d)
            Rcd = np.einsum("sijk,sk->sij", Rd, c)
            g_a = np.einsum("sij,sj->si", Rcd, b)
            f += coef * np.einsum("si,si->s", g_a, a)
            G[:, p] += coef * g_a
            G[:, q] += coef * np.einsum("sij,si->sj", Rcd, a)
            Rab = np.einsum("ijkl,si,sj->skl", R, a, b)
            G[:, r] += coef * np.einsum("skl,sl->sk", Rab, d)
            G[:, s] += coef * np.einsum("skl,sk->sl", Rab, c)
        return f, G


def isotropic_objective(Rr: RealCurvatureTensor, frames: np.ndarray) -> np.ndarray:
    """Isotropic-curvature value for a batch of real 4-frames ``(S, 4, 2n)``."""
    f, _ = _IsotropicProblem(Rr.entries).value_grad(np.asarray(frames, dtype=float))
    return f


def _make_problem(T: KahlerCurvatureTensor, condition: Condition) -> _Problem:
    if condition is Condition.OHB:
        if T.n < 2:
            raise PreconditionError("OHB needs n >= 2")
        return _OHBProblem(T.entries)
    if condition is Condition.HB:
        return _HBProblem(T.entries)
    if condition is Condition.HOLSEC:
        return _HolSecProblem(T.entries)
    if condition is Condition.ISOTROPIC:
        if T.n < 2:
            raise PreconditionError("isotropic curvature needs real dimension >= 4")
        return _IsotropicProblem(realify(T).entries)
    raise StructuralError(f"unknown condition {condition!r}")


def _descend(problem: _Problem, Q: np.ndarray, max_iters: int, gtol: float, step0: float,
             stall_gtol: float):
    """Batched projected gradient descent with Armijo step halving.

    Trial steps come from a Barzilai–Borwein estimate and are halved on
    failure.  Returns frames, values, a per-start convergence mask and the iteration
    count.  A start whose step collapses counts as converged only if its
    gradient is below ``stall_gtol``: at that point the predicted decrease
    is lost in rounding.
    """
    S = Q.shape[0]

    def refresh(sel, frames):
        fv, Gv = problem.value_grad(frames)
        Pv = problem.project(frames, Gv)
        Q[sel], f[sel], P[sel] = frames, fv, Pv
        gnorm[sel] = np.sqrt(np.sum(np.abs(Pv) ** 2, axis=(1, 2)))

    f = np.empty(S)
    P = np.empty_like(Q)
    gnorm = np.empty(S)
    refresh(slice(None), Q)
    step = np.full(S, step0)
    it = 0
    for it in range(1, max_iters + 1):
        active = (gnorm > gtol) & (step > 1e-14)
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        trial = problem.retract(Q[idx] - step[idx, None, None] * P[idx])
        ft, Gt = problem.value_grad(trial)
        ok = ft <= f[idx] - 1e-4 * step[idx] * gnorm[idx] ** 2
        good, bad = idx[ok], idx[~ok]
        if good.size:
            Pn = problem.project(trial[ok], Gt[ok])
            # Barzilai-Borwein estimate for the next trial step
            sdiff = trial[ok] - Q[good]
            ydiff = Pn - P[good]
            ss = np.sum(np.abs(sdiff) ** 2, axis=(1, 2))
            sy = np.sum((sdiff * ydiff.conj()).real, axis=(1, 2))
            bb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), 2.0 * step[good])
            step[good] = np.clip(bb, 1e-3 * step0, 1e3 * step0)
            Q[good], f[good], P[good] = trial[ok], ft[ok], Pn
            gnorm[good] = np.sqrt(np.sum(np.abs(Pn) ** 2, axis=(1, 2)))
        step[bad] *= 0.5
    converged = (gnorm <= gtol) | ((step <= 1e-14) & (gnorm <= stall_gtol))
    return Q, f, converged, it


def certify(
    T: KahlerCurvatureTensor,
    condition: Condition | str,
    opts: CertifyOptions | None = None,
    warm_start=None,
) -> CertificationResult:
    """Minimize the condition's objective over its frame manifold.

    Never raises for numerical trouble; a start that stalls above the
    gradient tolerance makes a nonnegative outcome ``Inconclusive``.

    Parameters
    ----------
    warm_start : array_like, optional
        Frames of shape ``(k, vectors, dim)`` that replace the first ``k``
        random starts, e.g. the previous argmin along a trajectory.  They
        are re-orthonormalized first.
    """
    opts = opts or CertifyOptions()
    condition = Condition(condition)
    problem = _make_problem(T, condition)
    scale = 1.0 + float(np.linalg.norm(problem.R.ravel()))
    rng = np.random.default_rng(opts.seed)
    Q0 = problem.random_frames(rng, opts.starts)
    if warm_start is not None:
        W = np.asarray(warm_start, dtype=problem.dtype)
        if W.ndim == 2:
            W = W[None]
        if W.shape[1:] != Q0.shape[1:]:
            raise StructuralError(f"warm start frames must have shape (k, {Q0.shape[1]}, {Q0.shape[2]})")
        k = min(len(W), opts.starts)
        Q0[:k] = problem.retract(W[:k])
    Q, f, conv, iters = _descend(problem, Q0, opts.max_iters, opts.gtol * scale, 0.25 / scale,
                                 1e-4 * scale)
    f, _ = problem.value_grad(Q)
    f = np.where(np.isfinite(f), f, np.inf)
    best = int(np.argmin(f))
    min_value = float(f[best])
    if not np.isfinite(min_value):
        status = Status.INCONCLUSIVE
    elif min_value < -opts.tolerance:
        status = Status.VIOLATED
    elif conv.all():
        status = Status.CERTIFIED
    else:
        status = Status.INCONCLUSIVE
    return CertificationResult(
        condition=condition,
        min_value=min_value,
        argmin=tuple(np.array(v) for v in Q[best]),
        status=status,
        starts=opts.starts,
        tolerance=opts.tolerance,
        converged=int(conv.sum()),
        iterations=iters,
        start_values=f,
    )


def evaluate_frame(T: KahlerCurvatureTensor, condition: Condition | str, frame) -> float:
    """Objective value at one frame, e.g. to re-check an ``argmin``."""
    condition = Condition(condition)
    problem = _make_problem(T, condition)
    Q = np.asarray(frame, dtype=problem.dtype)[None]
    f, _ = problem.value_grad(Q)
    return float(f[0])


@dataclass(frozen=True)
class PairInequality:
    """Values of the derived pairwise inequalities at one index pair."""

    pair: tuple[int, int]
    difference: float   # R_aaaa + R_bbbb - R_abab - R_baba, frame (e_a + e_b, e_a - e_b)
    sum: float          # R_aaaa + R_bbbb + R_abab + R_baba, frame (e_a + i e_b, e_a - i e_b)
    holomorphic: float  # R_aaaa + R_bbbb, half the total of the two above


@dataclass(frozen=True)
class InequalityReport:
    pairs: list[PairInequality]
    scalar: float
    tolerance: float
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "scalar": self.scalar,
            "tolerance": self.tolerance,
            "failures": list(self.failures),
            "pairs": [
                {"pair": list(p.pair), "difference": p.difference, "sum": p.sum,
                 "holomorphic": p.holomorphic}
                for p in self.pairs
            ],
        }


def derived_inequalities(T: KahlerCurvatureTensor, tol: float = 1e-8) -> InequalityReport:
    """Componentwise consequences of nonnegative orthogonal bisectional curvature.

    Evaluating ``R(X, X̄, Y, Ȳ)`` on the orthogonal pairs
    ``(e_a + e_b, e_a - e_b)`` and ``(e_a + i e_b, e_a - i e_b)`` gives the
    ``difference`` and ``sum`` values; their average is
    ``R_aaaa + R_bbbb``, and summing the holomorphic sectionals together
    with the bisectional terms gives the scalar curvature.  Any value below
    ``-tol`` is listed in ``failures``.
    """
    from .tensor_core import iter_pairs, scalar

    R = T.entries
    pairs = []
    failures = []
    for a, b in iter_pairs(T.n):
        hol = float((R[a, a, a, a] + R[b, b, b, b]).real)
        cross = float((R[a, b, a, b] + R[b, a, b, a]).real)
        rec = PairInequality((a, b), hol - cross, hol + cross, hol)
        pairs.append(rec)
        for name in ("difference", "sum", "holomorphic"):
            v = getattr(rec, name)
            if v < -tol:
                failures.append(f"{name}{(a, b)} = {v:.3e}")
    sc = scalar(T)
    if sc < -tol:
        failures.append(f"scalar = {sc:.3e}")
    return InequalityReport(pairs, sc, tol, failures)


def _block_indices(blocks) -> tuple[list[list[int]], np.ndarray | None]:
    """Accept a ProductStructure or a plain list of index lists."""
    if hasattr(blocks, "blocks"):
        return [list(b.indices) for b in blocks.blocks], blocks.change_of_frame
    return [list(b) for b in blocks], None


def sub_tensor(T: KahlerCurvatureTensor, indices) -> KahlerCurvatureTensor:
    """Components with every index in ``indices``."""
    idx = np.asarray(list(indices), dtype=int)
    return KahlerCurvatureTensor(T.entries[np.ix_(idx, idx, idx, idx)])


def mixed_defect(T: KahlerCurvatureTensor, partition) -> float:
    """Largest component whose indices touch two different blocks."""
    label = np.empty(T.n, dtype=int)
    for k, idx in enumerate(partition):
        label[list(idx)] = k
    L = label
    same = (
        (L[:, None, None, None] == L[None, :, None, None])
        & (L[:, None, None, None] == L[None, None, :, None])
        & (L[:, None, None, None] == L[None, None, None, :])
    )
    mixed = np.abs(T.entries)[~same]
    return float(mixed.max()) if mixed.size else 0.0


def min_holomorphic_sectional(T: KahlerCurvatureTensor, opts: CertifyOptions | None = None) -> float:
    """Minimum of ``R(X, X̄, X, X̄)`` over unit ``X``; exact when ``n = 1``."""
    if T.n == 1:
        return float(T.entries[0, 0, 0, 0].real)
    return certify(T, Condition.HOLSEC, opts).min_value


@dataclass(frozen=True)
class CrossFactorReport:
    block_minima: list[float]
    pair_sums: dict[tuple[int, int], float]
    flagged: list[tuple[int, int]]

    @property
    def min_sum(self) -> float:
        return min(self.pair_sums.values()) if self.pair_sums else float("inf")

    @property
    def ok(self) -> bool:
        return not self.flagged

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "block_minima": list(self.block_minima),
            "min_sum": self.min_sum,
            "pair_sums": [
                {"blocks": [i, j], "value": v} for (i, j), v in sorted(self.pair_sums.items())
            ],
            "flagged": [list(p) for p in self.flagged],
        }


def cross_factor_bound(
    T: KahlerCurvatureTensor,
    blocks,
    tol: float = 1e-8,
    opts: CertifyOptions | None = None,
) -> CrossFactorReport:
    """Pairwise sums of minimal holomorphic sectional curvatures across blocks.

    For unit ``X`` in block ``i`` and ``Y`` in block ``j`` the orthogonal
    pair ``((X + Y)/√2, (X - Y)/√2)`` has bisectional value
    ``(H(X) + H(Y))/4`` on a block-diagonal tensor, so a negative sum is an
    explicit violation of nonnegative orthogonal bisectional curvature.

    Parameters
    ----------
    blocks : ProductStructure or list of index lists
        When a ``ProductStructure`` is given, ``T`` is first moved to its
        block-adapted frame.

    Raises
    ------
    StructuralError
        If ``T`` has mixed components above ``tol`` for this partition.
    """
    from .tensor_core import conjugate_frame

    partition, U = _block_indices(blocks)
    flat = sorted(i for idx in partition for i in idx)
    if flat != list(range(T.n)):
        raise StructuralError("blocks must partition the index set")
    if U is not None:
        T = conjugate_frame(T, U)
    defect = mixed_defect(T, partition)
    if defect > tol:
        raise StructuralError(f"tensor is not block diagonal (mixed component {defect:.3e})")
    minima = [min_holomorphic_sectional(sub_tensor(T, idx), opts) for idx in partition]
    sums = {}
    flagged = []
    for i in range(len(partition)):
        for j in range(len(partition)):
            if i != j:
                sums[(i, j)] = minima[i] + minima[j]
                if sums[(i, j)] < -tol:
                    flagged.append((i, j))
    return CrossFactorReport(minima, sums, flagged)
