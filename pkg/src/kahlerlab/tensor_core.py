r"""Algebraic Kähler curvature tensors in a fixed unitary frame.

A tensor is stored densely as ``entries[a, b, c, d] = R_{a \bar b c \bar d}``
(0-based indices).  The Kähler symmetries are

* ``R[a,b,c,d] == R[c,b,a,d]``   (exchange of the unbarred slots)
* ``R[a,b,c,d] == R[a,d,c,b]``   (exchange of the barred slots)
* ``conj(R[a,b,c,d]) == R[b,a,d,c]``  (Hermitian symmetry)

and every function here is a pure function of immutable values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import PreconditionError, StructuralError, SymmetryError

DEFAULT_TOL = 1e-10

#: When True, operations re-validate their tensor arguments.
debug_checks = False


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class KahlerCurvatureTensor:
    """Curvature components ``R_{a b̄ c d̄}`` of a Kähler tensor.

    ``entries`` is an ``(n, n, n, n)`` complex array.  The constructor does
    not symmetrize; use :func:`kahler_tensor` for that.
    """

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=complex)
        if arr.ndim != 4 or len(set(arr.shape)) != 1 or arr.shape[0] < 1:
            raise StructuralError(f"entries must have shape (n,n,n,n), got {arr.shape}")
        object.__setattr__(self, "entries", _frozen(arr))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries.ravel()))

    def __add__(self, other: "KahlerCurvatureTensor") -> "KahlerCurvatureTensor":
        return KahlerCurvatureTensor(self.entries + other.entries)

    def __sub__(self, other: "KahlerCurvatureTensor") -> "KahlerCurvatureTensor":
        return KahlerCurvatureTensor(self.entries - other.entries)

    def __mul__(self, scale: float) -> "KahlerCurvatureTensor":
        return KahlerCurvatureTensor(self.entries * scale)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"KahlerCurvatureTensor(n={self.n}, norm={self.norm():.6g})"


@dataclass(frozen=True)
class OrthonormalTwoFrame:
    """A pair of complex n-vectors meant to be Hermitian-orthonormal.

    Construction does not enforce orthonormality because Taylor-truncated
    frame curves are only orthonormal up to a small defect; call
    :meth:`check` where exactness is required.
    """

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=complex)
        Y = np.asarray(self.Y, dtype=complex)
        if X.shape != Y.shape or X.ndim != 1:
            raise StructuralError("frame vectors must be 1-d arrays of equal length")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "Y", _frozen(Y))

    def defect(self) -> float:
        """Largest deviation of the Gram matrix from the identity."""
        gram = np.array(
            [[inner(self.X, self.X), inner(self.X, self.Y)],
             [inner(self.Y, self.X), inner(self.Y, self.Y)]]
        )
        return float(np.max(np.abs(gram - np.eye(2))))

    def check(self, tol: float = 1e-12) -> "OrthonormalTwoFrame":
        d = self.defect()
        if d > tol:
            raise PreconditionError(f"frame is not orthonormal (defect {d:.3e} > {tol:.1e})")
        return self


@dataclass(frozen=True)
class RealCurvatureTensor:
    """Riemannian curvature ``R(u, v, w, z)`` on the underlying real 2n-space.

    Basis ordering is ``u_1..u_n, Ju_1..Ju_n`` so that ``J u_i = u_{n+i}``.
    Sign convention: the sectional curvature of the plane ``u ∧ v`` is
    ``R(u, v, v, u)`` for orthonormal ``u, v``.
    """

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 4 or len(set(arr.shape)) != 1 or arr.shape[0] % 2:
            raise StructuralError(f"real entries must have shape (2n,)*4, got {arr.shape}")
        object.__setattr__(self, "entries", _frozen(arr))

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.m // 2

    @property
    def complex_structure(self) -> np.ndarray:
        """Matrix of ``J`` acting on coordinate columns."""
        n = self.n
        J = np.zeros((2 * n, 2 * n))
        J[n:, :n] = np.eye(n)
        J[:n, n:] = -np.eye(n)
        return J

    def evaluate(self, u, v, w, z) -> float:
        return float(np.einsum("ijkl,i,j,k,l->", self.entries, u, v, w, z))

    def sectional(self, u, v) -> float:
        """Sectional curvature of the plane spanned by ``u`` and ``v``."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        area = u @ u * (v @ v) - (u @ v) ** 2
        if area <= 0:
            raise PreconditionError("u and v must be linearly independent")
        return self.evaluate(u, v, v, u) / area


class Violation(NamedTuple):
    """One symmetry-orbit defect found by :func:`validate`."""

    index: tuple[int, int, int, int]
    partner: tuple[int, int, int, int]
    kinds: tuple[str, ...]
    defect: float


def inner(x, y) -> complex:
    """Hermitian inner product, linear in the first slot."""
    return complex(np.vdot(y, x))


# Index permutations of the symmetry generators.  Each maps position p to the
# position whose value must equal entries[p] (conjugated for "hermitian").
_SWAP_UNBARRED = (2, 1, 0, 3)
_SWAP_BARRED = (0, 3, 2, 1)
_HERMITIAN = (1, 0, 3, 2)


def _apply(arr: np.ndarray, perm, conj=False) -> np.ndarray:
    out = arr.transpose(perm)
    return out.conj() if conj else out


def symmetrize(arr) -> np.ndarray:
    """Average ``arr`` over the Kähler symmetry group.

    The group is generated by three commuting involutions; averaging them
    one after another makes the result symmetric bit-for-bit, not just to
    rounding.
    """
    arr = np.asarray(arr, dtype=complex)
    if arr.ndim != 4 or len(set(arr.shape)) != 1:
        raise StructuralError(f"expected an (n,n,n,n) array, got {arr.shape}")
    s = 0.5 * (arr + _apply(arr, _SWAP_UNBARRED))
    s = 0.5 * (s + _apply(s, _SWAP_BARRED))
    s = 0.5 * (s + _apply(s, _HERMITIAN, conj=True))
    return s


def kahler_tensor(arr) -> KahlerCurvatureTensor:
    """Symmetrize ``arr`` and wrap it."""
    return KahlerCurvatureTensor(symmetrize(arr))


def symmetry_orbit(index) -> list[tuple[int, int, int, int]]:
    """All index tuples related to ``index`` by the symmetry group."""
    orbit = {tuple(index)}
    frontier = [tuple(index)]
    while frontier:
        p = frontier.pop()
        for perm in (_SWAP_UNBARRED, _SWAP_BARRED, _HERMITIAN):
            q = tuple(p[k] for k in perm)
            if q not in orbit:
                orbit.add(q)
                frontier.append(q)
    return sorted(orbit)


def validate(T: KahlerCurvatureTensor | np.ndarray, tol: float = DEFAULT_TOL) -> list[Violation]:
    """List symmetry defects larger than ``tol``, one record per orbit.

    Raises
    ------
    StructuralError
        If the entries are not an ``n^4`` array.
    """
    arr = T.entries if isinstance(T, KahlerCurvatureTensor) else np.asarray(T, dtype=complex)
    if arr.ndim != 4 or len(set(arr.shape)) != 1:
        raise StructuralError(f"expected an (n,n,n,n) array, got {arr.shape}")
    checks = (
        ("unbarred-exchange", _SWAP_UNBARRED, False),
        ("barred-exchange", _SWAP_BARRED, False),
        ("hermitian", _HERMITIAN, True),
    )
    worst: dict[tuple, list] = {}
    for name, perm, conj in checks:
        defect = np.abs(arr - _apply(arr, perm, conj))
        for idx in zip(*np.nonzero(defect > tol)):
            idx = tuple(int(i) for i in idx)
            rep = symmetry_orbit(idx)[0]
            partner = tuple(idx[k] for k in np.argsort(perm))
            rec = worst.setdefault(rep, [idx, partner, set(), 0.0])
            rec[2].add(name)
            if defect[idx] > rec[3]:
                rec[0], rec[1], rec[3] = idx, partner, float(defect[idx])
    return [
        Violation(rec[0], rec[1], tuple(sorted(rec[2])), rec[3])
        for _, rec in sorted(worst.items())
    ]


def require_valid(T: KahlerCurvatureTensor, tol: float = DEFAULT_TOL) -> KahlerCurvatureTensor:
    bad = validate(T, tol)
    if bad:
        raise SymmetryError(f"{len(bad)} symmetry violation(s), worst {max(v.defect for v in bad):.3e}")
    return T


def _maybe_check(T: KahlerCurvatureTensor) -> None:
    if debug_checks:
        require_valid(T)


def _vector(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape != (n,):
        raise StructuralError(f"vector of length {n} expected, got shape {x.shape}")
    return x


def bisectional_complex(T: KahlerCurvatureTensor, X, Y) -> complex:
    """Raw complex value of ``Σ R_{ab̄cd̄} X_a conj(X_b) Y_c conj(Y_d)``."""
    X = _vector(X, T.n)
    Y = _vector(Y, T.n)
    return complex(np.einsum("abcd,a,b,c,d->", T.entries, X, X.conj(), Y, Y.conj()))


def evaluate_bisectional(T: KahlerCurvatureTensor, X, Y) -> float:
    """Holomorphic bisectional form ``R(X, X̄, Y, Ȳ)``.

    The vectors are not normalized.  A validated tensor gives a real number;
    an imaginary part above ``1e-9 (1 + |value|)`` raises :class:`SymmetryError`.
    """
    _maybe_check(T)
    val = bisectional_complex(T, X, Y)
    if abs(val.imag) > 1e-9 * (1.0 + abs(val.real)):
        raise SymmetryError(f"bisectional value has imaginary part {val.imag:.3e}")
    return val.real


def holomorphic_sectional(T: KahlerCurvatureTensor, X) -> float:
    X = _vector(X, T.n)
    if abs(np.linalg.norm(X) - 1.0) > 1e-12:
        raise PreconditionError("holomorphic sectional curvature needs a unit vector")
    return evaluate_bisectional(T, X, X)


def is_unitary(U, tol: float = 1e-10) -> bool:
    U = np.asarray(U)
    return U.ndim == 2 and U.shape[0] == U.shape[1] and np.allclose(
        U @ U.conj().T, np.eye(U.shape[0]), atol=tol, rtol=0
    )


def conjugate_frame(T: KahlerCurvatureTensor, U) -> KahlerCurvatureTensor:
    """Components in the frame ``e'_α = Σ_a U[α, a] e_a``.

    ``R'_{αβ̄γδ̄} = Σ U_{αa} conj(U_{βb}) U_{γc} conj(U_{δd}) R_{ab̄cd̄}``.
    Composition: conjugating by ``U`` then ``V`` equals conjugating by ``V @ U``.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (T.n, T.n):
        raise StructuralError(f"frame change must be {T.n}x{T.n}")
    if not is_unitary(U):
        raise PreconditionError("frame change is not unitary within 1e-10")
    Uc = U.conj()
    out = np.einsum("abcd,ia,jb,kc,ld->ijkl", T.entries, U, Uc, U, Uc, optimize=True)
    return KahlerCurvatureTensor(out)


def ricci(T: KahlerCurvatureTensor) -> np.ndarray:
    """Ricci form ``Ric_{αβ̄} = Σ_μ R_{αβ̄μμ̄}`` as a Hermitian matrix."""
    _maybe_check(T)
    return np.einsum("abcc->ab", T.entries)


def scalar(T: KahlerCurvatureTensor) -> float:
    """Scalar curvature ``Σ_{α,β} R_{αᾱββ̄}``; checked against ``tr Ric``."""
    direct = np.einsum("aabb->", T.entries)
    trace = np.trace(ricci(T))
    if abs(direct - trace) > 1e-10 * (1.0 + abs(direct)):
        raise SymmetryError("scalar curvature disagrees with the Ricci trace")
    return float(direct.real)


def ricci_norm_squared(T: KahlerCurvatureTensor) -> float:
    return float(np.sum(np.abs(ricci(T)) ** 2))


def real_frame_map(n: int) -> np.ndarray:
    """Rows give the (1,0)-part of each real basis vector.

    With ``e_i = (u_i - i J u_i)/sqrt(2)`` one has ``u_i = (e_i + ē_i)/sqrt(2)``
    and ``J u_i = i (e_i - ē_i)/sqrt(2)``.
    """
    Z = np.zeros((2 * n, n), dtype=complex)
    Z[np.arange(n), np.arange(n)] = 1 / np.sqrt(2)
    Z[n + np.arange(n), np.arange(n)] = 1j / np.sqrt(2)
    return Z


def realify(T: KahlerCurvatureTensor) -> RealCurvatureTensor:
    """Riemannian curvature tensor of the underlying real vector space.

    For real vectors with (1,0)-parts ``z_k``,
    ``R(v1, v2, v3, v4) = 2 Re[F(z1, z2, z3, z4) - F(z1, z2, z4, z3)]`` where
    ``F`` is the sesquilinear evaluation of the complex components.  This
    gives ``R(u_i, Ju_i, Ju_j, u_j) = R_{iījj̄}`` and puts the sectional
    curvatures of ``fubini_study(n, 4)`` in ``[1, 4]``.
    """
    Z = real_frame_map(T.n)
    G = np.einsum("abcd,pa,qb,rc,sd->pqrs", T.entries, Z, Z.conj(), Z, Z.conj(), optimize=True)
    return RealCurvatureTensor(2.0 * (G - G.transpose(0, 1, 3, 2)).real)


def real_rotation(U) -> np.ndarray:
    """Orthogonal matrix on ``R^{2n}`` induced by the unitary frame change ``U``."""
    U = np.asarray(U, dtype=complex)
    A, B = U.real, U.imag
    return np.block([[A, B], [-B, A]])


def conjugate_real(Rr: RealCurvatureTensor, O) -> RealCurvatureTensor:
    O = np.asarray(O, dtype=float)
    out = np.einsum("ijkl,pi,qj,rk,sl->pqrs", Rr.entries, O, O, O, O, optimize=True)
    return RealCurvatureTensor(out)


def validate_real(Rr: RealCurvatureTensor, tol: float = 1e-10) -> dict[str, float]:
    """Defects of the Riemannian symmetries; all should be ``<= tol``.

    Returns the maximal defect per identity.
    """
    R = Rr.entries
    bianchi = R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)
    return {
        "antisym_first": float(np.max(np.abs(R + R.transpose(1, 0, 2, 3)))),
        "antisym_last": float(np.max(np.abs(R + R.transpose(0, 1, 3, 2)))),
        "pair_exchange": float(np.max(np.abs(R - R.transpose(2, 3, 0, 1)))),
        "first_bianchi": float(np.max(np.abs(bianchi))),
    }


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary matrix."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, Rm = np.linalg.qr(Z)
    d = np.diagonal(Rm)
    return Q * (d / np.abs(d))


def random_tensor(rng: np.random.Generator, n: int, scale: float = 1.0) -> KahlerCurvatureTensor:
    """Symmetrized complex Gaussian tensor (not in any cone)."""
    shape = (n,) * 4
    raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return KahlerCurvatureTensor(scale * symmetrize(raw))


def iter_pairs(n: int):
    """Ordered index pairs ``(α, β)`` with ``α < β``."""
    return itertools.combinations(range(n), 2)
