"""Block (product) structure of a curvature tensor and its classification.

The curvature endomorphisms ``M^{(cd)}`` with ``M^{(cd)}_{ab} = R_{ab̄cd̄}``
span a family of matrices; an orthogonal splitting ``C^n = V_1 ⊕ V_2`` into
subspaces invariant under all of them, with every mixed component zero, is
the algebraic shadow of a product.  Any vector killed by every ``M^{(cd)}``
splits off a flat factor.  On the rest, a random Hermitian combination of the
endomorphisms is diagonalized and its eigenvectors are grouped by the
couplings the whole family induces between them; the groups are the
candidate blocks and are accepted only if the conjugated tensor has no mixed
component above tolerance.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .cones import mixed_defect, min_holomorphic_sectional, sub_tensor
from .errors import DegeneracyWarning, PreconditionError
from .tensor_core import KahlerCurvatureTensor, conjugate_frame, scalar

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tag:
    """Classification of one block.

    ``kind`` is ``"Flat"``, ``"FubiniStudyLike"`` (``value`` = c),
    ``"Surface"`` (``value`` = κ) or ``"Unclassified"``.
    """

    kind: str
    value: float | None = None

    def __str__(self) -> str:
        return self.kind if self.value is None else f"{self.kind}({self.value:.6g})"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class Block:
    indices: tuple[int, ...]
    tag: Tag

    @property
    def size(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class ProductStructure:
    """Partition of the block-adapted frame into blocks.

    Conjugating the input tensor by ``change_of_frame`` puts each block's
    basis vectors at the consecutive indices listed in ``blocks``.
    """

    blocks: list[Block]
    change_of_frame: np.ndarray = field(repr=False)
    mixed_defect: float = 0.0
    degenerate: bool = False

    @property
    def sizes(self) -> list[int]:
        return sorted(b.size for b in self.blocks)

    def adapted(self, T: KahlerCurvatureTensor) -> KahlerCurvatureTensor:
        return conjugate_frame(T, self.change_of_frame)

    def block_tensors(self, T: KahlerCurvatureTensor) -> list[KahlerCurvatureTensor]:
        A = self.adapted(T)
        return [sub_tensor(A, b.indices) for b in self.blocks]

    def to_dict(self) -> dict:
        return {
            "blocks": [{"indices": list(b.indices), "tag": b.tag.to_dict()} for b in self.blocks],
            "mixed_defect": self.mixed_defect,
            "degenerate": self.degenerate,
        }


def _endomorphisms(T: KahlerCurvatureTensor) -> np.ndarray:
    """Stack of the transposes of ``M^{(cd)}`` as an ``(n², n, n)`` array.

    Acting on coordinate columns, ``(Mᵀx)_b = Σ_a R_{ab̄cd̄} x_a`` so that
    ``R(x, ȳ, e_c, ē_d) = ⟨Mᵀx, y⟩``; a block is a common invariant subspace.
    """
    n = T.n
    return T.entries.transpose(2, 3, 1, 0).reshape(n * n, n, n)


def _null_space(Ms: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of the common kernel and its complement."""
    n = Ms.shape[1]
    K = np.einsum("kji,kjl->il", Ms.conj(), Ms)  # Σ M^H M
    w, V = np.linalg.eigh(K)
    flat = w <= tol * tol * max(1, n)
    return V[:, flat], V[:, ~flat]


def _group(Ms: np.ndarray, V: np.ndarray, tol: float) -> list[np.ndarray]:
    """Connected components of the coupling graph between basis columns."""
    C = np.einsum("ia,kij,jb->kab", V.conj(), Ms, V)
    coupling = np.max(np.abs(C), axis=0)
    np.fill_diagonal(coupling, 0.0)
    ncomp, labels = connected_components(coupling > tol, directed=False)
    return [np.nonzero(labels == k)[0] for k in range(ncomp)]


def classify_block(T_block: KahlerCurvatureTensor, tol: float = 1e-8) -> Tag:
    """Match a block against the model library.

    Flat when the norm is at most ``tol``; Surface(κ) for ``n = 1``;
    FubiniStudyLike(c) when ``T`` equals ``c(δδ + δδ)`` with
    ``c = scalar / (n(n+1))`` up to ``tol``; Unclassified otherwise.
    """
    n = T_block.n
    if T_block.norm() <= tol:
        return Tag("Flat")
    if n == 1:
        return Tag("Surface", float(T_block.entries[0, 0, 0, 0].real))
    c = scalar(T_block) / (n * (n + 1))
    eye = np.eye(n)
    model = c * (np.einsum("ab,cd->abcd", eye, eye) + np.einsum("ad,cb->abcd", eye, eye))
    if np.linalg.norm((T_block.entries - model).ravel()) <= tol and c > 0:
        return Tag("FubiniStudyLike", float(c))
    return Tag("Unclassified")


def _assemble(T: KahlerCurvatureTensor, cols: list[np.ndarray]):
    """Frame change whose rows are the given column groups, in order."""
    U = _unitarize(np.concatenate(cols, axis=1).T)
    partition = _partition([c.shape[1] for c in cols])
    A = conjugate_frame(T, U)
    return U, partition, A, mixed_defect(A, partition)


def detect_blocks(T: KahlerCurvatureTensor, tol: float = 1e-8, seed: int = 0,
                  attempts: int = 3) -> ProductStructure:
    """Finest orthogonal splitting with no mixed components above ``tol``.

    A flat factor (the common kernel of all curvature endomorphisms) is
    split into one-dimensional Flat blocks.  Each attempt diagonalizes a
    fresh random combination; a candidate is accepted once its mixed
    components verify.  If every attempt had eigenvalue clusters inside a
    merged group, the partition may be coarser than the true one and a
    :class:`DegeneracyWarning` is emitted.
    """
    rng = np.random.default_rng(seed)
    Ms = _endomorphisms(T)
    K0, V = _null_space(Ms, tol)
    flat_cols = [K0[:, [i]] for i in range(K0.shape[1])]
    best = None
    degenerate = False
    if V.shape[1]:
        degenerate = True
        for attempt in range(attempts):
            coef = rng.standard_normal(len(Ms)) + 1j * rng.standard_normal(len(Ms))
            H = np.einsum("k,kij->ij", coef, Ms)
            H = V.conj().T @ (H + H.conj().T) @ V
            w, W = np.linalg.eigh(H)
            basis = V @ W
            groups = _group(Ms, basis, tol)
            found = _assemble(T, [basis[:, g] for g in groups] + flat_cols)
            if found[3] > tol:
                log.debug("block detection attempt %d failed verification", attempt)
                continue
            if best is None or len(found[1]) > len(best[1]):
                best = found
            gap = 1e3 * tol * (1.0 + np.abs(w).max())
            clustered = any(np.any(np.diff(w[g]) <= gap) for g in groups if len(g) > 1)
            if not clustered:
                degenerate = False
                break
        if best is None:
            best = _assemble(T, [V] + flat_cols)
    else:
        best = _assemble(T, flat_cols)
    U, partition, A, defect = best
    blocks = [Block(tuple(idx), classify_block(sub_tensor(A, idx), tol)) for idx in partition]
    if degenerate:
        warnings.warn("eigenvalue clusters may have merged blocks", DegeneracyWarning, stacklevel=2)
    return ProductStructure(blocks, U, defect, degenerate)


def _partition(sizes: list[int]) -> list[list[int]]:
    out, k = [], 0
    for s in sizes:
        out.append(list(range(k, k + s)))
        k += s
    return out


def _unitarize(U: np.ndarray) -> np.ndarray:
    """Nearest unitary (polar factor); removes rounding drift from eigh bases."""
    W, _, Vh = np.linalg.svd(U)
    return W @ Vh


def block_min_hol_sec(T: KahlerCurvatureTensor, structure: ProductStructure, seed: int = 0) -> list[float]:
    """Minimal holomorphic sectional curvature on each block."""
    from .cones import CertifyOptions

    return [min_holomorphic_sectional(B, CertifyOptions(seed=seed)) for B in structure.block_tensors(T)]


@dataclass(frozen=True)
class CaseReport:
    """Outcome of :func:`theorem_case`.

    ``case`` is 1, 2 or None (violation).  ``negative_block`` is the index
    of the negatively curved block ``Y`` in case 2; ``witness`` is a pair
    ``(Y, i)`` breaking ``minHolSec(i) >= -minHolSec(Y)``.
    """

    case: int | None
    negative_block: int | None
    bound_checks: list[dict]
    witness: tuple[int, int] | None
    message: str
    negative_block_dim: int | None = None

    @property
    def violation(self) -> bool:
        return self.case is None

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "violation": self.violation,
            "negative_block": self.negative_block,
            "negative_block_dim": self.negative_block_dim,
            "bound_checks": self.bound_checks,
            "witness": None if self.witness is None else list(self.witness),
            "message": self.message,
        }


def theorem_case(structure: ProductStructure, min_hol_sec, compact_flags=None,
                 tol: float = 1e-8) -> CaseReport:
    """Decide which product case a block structure falls into.

    Case 1: no block has negative minimal holomorphic sectional curvature.
    Case 2: exactly one block ``Y`` does, and every other block satisfies
    ``minHolSec(i) >= -minHolSec(Y)``.  Several negative blocks, or a
    failed bound, give a violation with a witness pair.  A compact ``Y`` of
    dimension at least 2 is reported as case 1 after the same bound check,
    since a compact factor of that kind cannot carry the negative part.

    Raises
    ------
    PreconditionError
        When the lists do not align with the blocks.
    """
    k = len(structure.blocks)
    m = [float(v) for v in min_hol_sec]
    compact = [False] * k if compact_flags is None else [bool(c) for c in compact_flags]
    if len(m) != k or len(compact) != k:
        raise PreconditionError("per-block lists must align with the blocks")
    negative = [i for i, v in enumerate(m) if v < -tol]
    if not negative:
        return CaseReport(1, None, [], None, "no negatively curved block")
    if len(negative) > 1:
        return CaseReport(None, None, [], (negative[0], negative[1]),
                          f"blocks {negative} are both negatively curved")
    y = negative[0]
    checks = []
    witness = None
    for i in range(k):
        if i == y:
            continue
        ok = m[i] >= -m[y] - tol
        checks.append({"block": i, "min_hol_sec": m[i], "bound": -m[y], "ok": ok})
        if not ok and witness is None:
            witness = (y, i)
    dim = structure.blocks[y].size
    if witness is not None:
        i = witness[1]
        return CaseReport(None, y, checks, witness,
                          f"block {i} has minHolSec {m[i]:.6g} < {-m[y]:.6g}", dim)
    if compact[y] and dim >= 2:
        return CaseReport(1, y, checks, None, "negative block is compact of dimension >= 2", dim)
    return CaseReport(2, y, checks, None, "one negatively curved block; cross bound holds", dim)
