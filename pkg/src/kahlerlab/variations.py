"""Frame variations of the orthogonal bisectional function and their formulas.

The function ``u(X, Y) = R(X, X̄, Y, Ȳ)`` lives on orthonormal 2-frames.
Each :class:`VariationFamily` is a curve of frames through
``(e_a, e_b)``; :func:`first_variation` and :func:`second_variation`
return closed-form derivatives of ``u`` along it at ``s = 0``, and the
``fd_*`` helpers give the finite-difference values they are tested against.

Families (``a, b`` the frame indices, ``m`` a third index):

==================== ==============================================  =============================
kind                 frame at ``s``                                  ``du/ds`` at 0
==================== ==============================================  =============================
RotationReal         (cos s e_a + sin s e_b, -sin s e_a + cos s e_b)  2 Re(R_{ab̄bb̄} - R_{aāab̄})
RotationImag         (cos s e_a + i sin s e_b, i sin s e_a + cos s e_b) 2 Im(R_{ab̄bb̄} - R_{aāab̄})
TranslationReal      (normalized e_a + s e_m, e_b)                   2 Re R_{am̄bb̄}
TranslationImag      (normalized e_a + i s e_m, e_b)                 2 Im R_{am̄bb̄}
TranslationBetaSlot  (e_a, normalized e_b + s e_m)                   2 Re R_{aābm̄}
TranslationBetaSlotImag (e_a, normalized e_b + i s e_m)              2 Im R_{aābm̄}
==================== ==============================================  =============================

Normalizing the translation curves changes ``u`` only at order ``s²``, so
the derivative formulas hold verbatim.  ``SecondOrder`` is the curve

    v_a = e_a + s w_a - s²/2 (⟨w_a, w_a⟩ e_a + ⟨w_a, w_b⟩ e_b)
    v_b = e_b + s w_b - s²/2 (⟨w_b, w_a⟩ e_a + ⟨w_b, w_b⟩ e_b)

with ``w_a, w_b`` orthogonal to ``e_a, e_b``.  It is orthonormal up to
``O(s⁴)`` and is not normalized.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import PreconditionError, StructuralError
from .flow import zero_set_conditions
from .tensor_core import KahlerCurvatureTensor, OrthonormalTwoFrame, bisectional_complex, inner


class Kind(str, Enum):
    ROTATION_REAL = "RotationReal"
    ROTATION_IMAG = "RotationImag"
    TRANSLATION_REAL = "TranslationReal"
    TRANSLATION_IMAG = "TranslationImag"
    TRANSLATION_BETA_SLOT = "TranslationBetaSlot"
    TRANSLATION_BETA_SLOT_IMAG = "TranslationBetaSlotImag"
    SECOND_ORDER = "SecondOrder"


FIRST_ORDER_KINDS = tuple(k for k in Kind if k is not Kind.SECOND_ORDER)
_TRANSLATIONS = (
    Kind.TRANSLATION_REAL,
    Kind.TRANSLATION_IMAG,
    Kind.TRANSLATION_BETA_SLOT,
    Kind.TRANSLATION_BETA_SLOT_IMAG,
)


@dataclass(frozen=True)
class VariationFamily:
    """A curve of 2-frames through ``(e_a, e_b)`` in ``C^n``.

    ``m`` is required for translations; ``omega_a``/``omega_b`` for
    ``SecondOrder`` and must be orthogonal to ``e_a`` and ``e_b``.
    """

    kind: Kind
    n: int
    a: int
    b: int
    m: int | None = None
    omega_a: np.ndarray | None = None
    omega_b: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        idx = [self.a, self.b]
        if self.kind in _TRANSLATIONS:
            if self.m is None:
                raise PreconditionError(f"{self.kind.value} needs a third index m")
            idx.append(self.m)
        if any(not 0 <= i < self.n for i in idx):
            raise StructuralError(f"indices {idx} out of range for n={self.n}")
        if len(set(idx)) != len(idx):
            raise PreconditionError(f"indices must be distinct, got {idx}")
        if self.kind is Kind.SECOND_ORDER:
            for name in ("omega_a", "omega_b"):
                w = getattr(self, name)
                w = np.zeros(self.n, complex) if w is None else np.asarray(w, dtype=complex)
                if w.shape != (self.n,):
                    raise StructuralError(f"{name} must have length {self.n}")
                if max(abs(w[self.a]), abs(w[self.b])) > 1e-12:
                    raise PreconditionError(f"{name} must be orthogonal to e_a and e_b")
                w = w.copy()
                w.setflags(write=False)
                object.__setattr__(self, name, w)

    @classmethod
    def second_order(cls, n, a, b, omega_a, omega_b) -> "VariationFamily":
        return cls(Kind.SECOND_ORDER, n, a, b, omega_a=omega_a, omega_b=omega_b)


def u_value(T: KahlerCurvatureTensor, frame: OrthonormalTwoFrame) -> float:
    return bisectional_complex(T, frame.X, frame.Y).real


def _curve(family: VariationFamily, s, dtype=complex) -> tuple[np.ndarray, np.ndarray]:
    """Frame vectors at ``s`` computed in ``dtype``."""
    n, a, b, m = family.n, family.a, family.b, family.m
    real = np.empty(0, dtype=dtype).real.dtype
    s = real.type(s)
    e = np.eye(n, dtype=dtype)
    kind = family.kind
    c, sn = np.cos(s), np.sin(s)
    if kind is Kind.ROTATION_REAL:
        return c * e[a] + sn * e[b], -sn * e[a] + c * e[b]
    if kind is Kind.ROTATION_IMAG:
        return c * e[a] + 1j * sn * e[b], 1j * sn * e[a] + c * e[b]
    if kind in _TRANSLATIONS:
        step = s if kind in (Kind.TRANSLATION_REAL, Kind.TRANSLATION_BETA_SLOT) else 1j * s
        moved = (e[a] if kind in (Kind.TRANSLATION_REAL, Kind.TRANSLATION_IMAG) else e[b]) + step * e[m]
        norm = np.sqrt(np.sum(np.abs(moved) ** 2))
        if not np.isfinite(norm) or norm < 1e-12:
            raise PreconditionError("translation curve is degenerate at this s")
        moved = moved / norm
        if kind in (Kind.TRANSLATION_REAL, Kind.TRANSLATION_IMAG):
            return moved, e[b]
        return e[a], moved
    wa = family.omega_a.astype(dtype)
    wb = family.omega_b.astype(dtype)
    ip = lambda x, y: np.sum(x * np.conj(y))  # noqa: E731
    va = e[a] + s * wa - s * s / 2 * (ip(wa, wa) * e[a] + ip(wa, wb) * e[b])
    vb = e[b] + s * wb - s * s / 2 * (ip(wb, wa) * e[a] + ip(wb, wb) * e[b])
    return va, vb


def frame_curve(family: VariationFamily, s: float) -> OrthonormalTwoFrame:
    """Frame of ``family`` at parameter ``s``.

    Raises
    ------
    PreconditionError
        When a translation curve cannot be normalized.
    """
    return OrthonormalTwoFrame(*_curve(family, s))


def first_variation(T: KahlerCurvatureTensor, family: VariationFamily) -> float:
    """Closed-form ``du/ds`` at ``s = 0`` (see the module table)."""
    R = T.entries
    a, b, m = family.a, family.b, family.m
    kind = family.kind
    if kind is Kind.ROTATION_REAL:
        return float(2 * (R[a, b, b, b] - R[a, a, a, b]).real)
    if kind is Kind.ROTATION_IMAG:
        return float(2 * (R[a, b, b, b] - R[a, a, a, b]).imag)
    if kind is Kind.TRANSLATION_REAL:
        return float(2 * R[a, m, b, b].real)
    if kind is Kind.TRANSLATION_IMAG:
        return float(2 * R[a, m, b, b].imag)
    if kind is Kind.TRANSLATION_BETA_SLOT:
        return float(2 * R[a, a, b, m].real)
    if kind is Kind.TRANSLATION_BETA_SLOT_IMAG:
        return float(2 * R[a, a, b, m].imag)
    # SecondOrder: first derivative from the linear part of the curve
    e = np.eye(T.n, dtype=complex)
    val = 2 * (
        bisectional_slots(T, family.omega_a, e[a], e[b], e[b])
        + bisectional_slots(T, e[a], e[a], family.omega_b, e[b])
    )
    return float(val.real)


def bisectional_slots(T: KahlerCurvatureTensor, x, y, z, w) -> complex:
    """``R(x, ȳ, z, w̄) = Σ R_{ij̄kl̄} x_i conj(y_j) z_k conj(w_l)``."""
    return complex(np.einsum("ijkl,i,j,k,l->", T.entries, x, np.conj(y), z, np.conj(w)))


def second_variation(T: KahlerCurvatureTensor, family: VariationFamily) -> float:
    """Closed-form ``½ d²u/ds²`` at ``s = 0`` along a ``SecondOrder`` curve.

    ``R(w_a, w̄_a, e_b, ē_b) + R(e_a, ē_a, w_b, w̄_b)
    + 2 Re R(w_a, ē_a, w_b, ē_b) + 2 Re R(w_a, ē_a, e_b, w̄_b)
    - (⟨w_a, w_a⟩ + ⟨w_b, w_b⟩) R_{aābb̄}
    - Re(⟨w_a, w_b⟩ R_{bābb̄} + ⟨w_b, w_a⟩ R_{aāab̄})``
    """
    if family.kind is not Kind.SECOND_ORDER:
        raise PreconditionError("second_variation needs a SecondOrder family")
    R = T.entries
    a, b = family.a, family.b
    e = np.eye(T.n, dtype=complex)
    wa, wb = family.omega_a, family.omega_b
    S = lambda x, y, z, w: bisectional_slots(T, x, y, z, w)  # noqa: E731
    val = (
        S(wa, wa, e[b], e[b])
        + S(e[a], e[a], wb, wb)
        + 2 * S(wa, e[a], wb, e[b]).real
        + 2 * S(wa, e[a], e[b], wb).real
        - (inner(wa, wa) + inner(wb, wb)) * R[a, a, b, b]
        - (inner(wa, wb) * R[b, a, b, b] + inner(wb, wa) * R[a, a, a, b]).real
    )
    return float(val.real)


def _u_extended(T: KahlerCurvatureTensor, family: VariationFamily, s: float) -> np.longdouble:
    X, Y = _curve(family, s, np.clongdouble)
    R = T.entries.astype(np.clongdouble)
    return np.einsum("ijkl,i,j,k,l->", R, X, X.conj(), Y, Y.conj()).real


def fd_first(T: KahlerCurvatureTensor, family: VariationFamily, h: float = 1e-4) -> float:
    """Centered difference ``(u(h) - u(-h)) / 2h``.

    ``u`` is evaluated in extended precision so that the truncation error
    dominates the cancellation error at the default steps.
    """
    up = _u_extended(T, family, h)
    um = _u_extended(T, family, -h)
    return float((up - um) / (2 * np.longdouble(h)))


def fd_second_half(T: KahlerCurvatureTensor, family: VariationFamily, h: float = 1e-3) -> float:
    """Half the centered second difference, matching :func:`second_variation`."""
    up = _u_extended(T, family, h)
    u0 = _u_extended(T, family, 0.0)
    um = _u_extended(T, family, -h)
    return float((up - 2 * u0 + um) / (2 * np.longdouble(h) ** 2))


@dataclass(frozen=True)
class FDCheck:
    """Formula value against finite differences at steps ``h`` and ``h/2``."""

    label: str
    formula: float
    fd_coarse: float
    fd_fine: float
    h: float

    @property
    def error_coarse(self) -> float:
        return abs(self.fd_coarse - self.formula)

    @property
    def error_fine(self) -> float:
        return abs(self.fd_fine - self.formula)

    @property
    def ratio(self) -> float:
        return self.error_coarse / self.error_fine if self.error_fine > 0 else float("inf")

    def row(self) -> dict:
        return {
            "label": self.label,
            "formula": self.formula,
            "fd_coarse": self.fd_coarse,
            "fd_fine": self.fd_fine,
            "h": self.h,
            "error_coarse": self.error_coarse,
            "error_fine": self.error_fine,
            "ratio": self.ratio,
        }


def check_first(T: KahlerCurvatureTensor, family: VariationFamily, h: float = 1e-4) -> FDCheck:
    return FDCheck(
        f"first:{family.kind.value}",
        first_variation(T, family),
        fd_first(T, family, h),
        fd_first(T, family, h / 2),
        h,
    )


def check_second(T: KahlerCurvatureTensor, family: VariationFamily, h: float = 1e-3) -> FDCheck:
    return FDCheck(
        "second:SecondOrder",
        second_variation(T, family),
        fd_second_half(T, family, h),
        fd_second_half(T, family, h / 2),
        h,
    )


def random_directions(rng: np.random.Generator, n: int, a: int, b: int, scale: float = 1.0):
    """Random complex ``w_a, w_b`` supported off the indices ``a, b``."""
    out = []
    for _ in range(2):
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w[[a, b]] = 0
        out.append(scale * w / np.sqrt(2))
    return out


def _complement(n: int, a: int, b: int) -> np.ndarray:
    return np.array([i for i in range(n) if i not in (a, b)], dtype=int)


def block_psd_gap(T: KahlerCurvatureTensor, a: int, b: int) -> float:
    """``tr(A C) - tr(B B̄)`` on the orthogonal complement of ``e_a, e_b``.

    ``A_{μν} = R_{μν̄bb̄}``, ``C_{μν} = R_{aāμν̄}`` and ``B_{μν} = R_{μāνb̄}``.
    The value is checked against
    ``Σ_{μ,ν} R_{aāμν̄} R_{νμ̄bb̄} - |R_{aμ̄bν̄}|²``.

    Raises
    ------
    PreconditionError
        When the complement is empty (``n < 3``) or ``a == b``.
    """
    if a == b:
        raise PreconditionError("indices must differ")
    idx = _complement(T.n, a, b)
    if idx.size == 0:
        raise PreconditionError("the orthogonal complement is empty (n < 3)")
    R = T.entries
    sub = np.ix_(idx, idx)
    A = R[:, :, b, b][sub]
    C = R[a, a][sub]
    B = R[:, a, :, b][sub]
    gap = np.trace(A @ C) - np.trace(B @ B.conj())
    direct = np.einsum("pq,qp->", R[a, a][sub], R[:, :, b, b][sub]) - np.sum(
        np.abs(R[a, :, b, :][sub]) ** 2
    )
    if abs(gap - direct) > 1e-10 * (1.0 + T.norm() ** 2):
        raise AssertionError("matrix form of the gap disagrees with the component sum")
    return float(gap.real)


@dataclass(frozen=True)
class RotationResult:
    expansion: float
    predicted: float

    @property
    def residual(self) -> float:
        return abs(self.expansion - self.predicted)

    def to_dict(self) -> dict:
        return {"expansionValue": self.expansion, "predictedValue": self.predicted,
                "residual": self.residual}


def rotation_propagation(T: KahlerCurvatureTensor, a: int, b: int, theta: float,
                         tol: float = 1e-12) -> RotationResult:
    """Compare the rotated bisectional value with ``cos²θ sin²θ (R_aaaa + R_bbbb)``.

    The frame is ``(sin θ e_a - cos θ e_b, cos θ e_a + sin θ e_b)``.  The
    expansion sums all sixteen components of the ``{a, b}`` sub-block.

    Raises
    ------
    PreconditionError
        When a zero-set condition at ``(a, b)`` fails at ``tol``; the message
        names the failing condition.
    """
    rep = zero_set_conditions(T, a, b, tol)
    failing = [k for k, v in rep.passed.items() if not v]
    if failing:
        raise PreconditionError(f"zero-set condition(s) fail at {(a, b)}: {', '.join(failing)}")
    c, s = np.cos(theta), np.sin(theta)
    x = np.array([s, -c])
    y = np.array([c, s])
    sub = T.entries[np.ix_([a, b], [a, b], [a, b], [a, b])]
    expansion = float(np.einsum("ijkl,i,j,k,l->", sub, x, x, y, y).real)
    predicted = float(c * c * s * s * (T.entries[a, a, a, a] + T.entries[b, b, b, b]).real)
    return RotationResult(expansion, predicted)


@dataclass(frozen=True)
class ScalarChainReport:
    """Outcome of :func:`zero_set_scalar_chain`."""

    zero_sets_hold: bool
    bisectional_vanish: bool
    holomorphic_pairs_vanish: bool
    scalar: float

    @property
    def applicable(self) -> bool:
        return self.zero_sets_hold and self.bisectional_vanish and self.holomorphic_pairs_vanish

    def to_dict(self) -> dict:
        return {
            "zero_sets_hold": self.zero_sets_hold,
            "bisectional_vanish": self.bisectional_vanish,
            "holomorphic_pairs_vanish": self.holomorphic_pairs_vanish,
            "applicable": self.applicable,
            "scalar": self.scalar,
        }


def zero_set_scalar_chain(T: KahlerCurvatureTensor, tol: float = 1e-12) -> ScalarChainReport:
    """When the zero-set conditions hold at every pair, the scalar curvature vanishes.

    Checks the zero sets at every pair, ``R_{μμ̄νν̄} = 0`` and
    ``R_{μμ̄μμ̄} + R_{νν̄νν̄} = 0`` for ``μ != ν``, and reports the scalar
    curvature, which is then a sum of vanishing pairs.
    """
    from .tensor_core import iter_pairs, scalar

    R = T.entries
    zs = bis = hol = True
    for m, v in iter_pairs(T.n):
        zs &= zero_set_conditions(T, m, v, tol).ok
        bis &= abs(R[m, m, v, v]) <= tol
        hol &= abs(R[m, m, m, m] + R[v, v, v, v]) <= tol
    return ScalarChainReport(bool(zs), bool(bis), bool(hol), scalar(T))


def first_order_consequences(T: KahlerCurvatureTensor, a: int, b: int) -> dict[str, float]:
    """Largest ``|R_{am̄bb̄}|`` and ``|R_{aābm̄}|`` over ``m`` off ``{a, b}``.

    Both vanish at a zero of ``u`` inside the cone, since they are first
    derivatives along translation curves.
    """
    idx = _complement(T.n, a, b)
    if idx.size == 0:
        return {"alpha_slot": 0.0, "beta_slot": 0.0}
    R = T.entries
    return {
        "alpha_slot": float(np.max(np.abs(R[a, idx, b, b]))),
        "beta_slot": float(np.max(np.abs(R[a, a, b, idx]))),
    }


def families_at(n: int, a: int, b: int, rng: np.random.Generator | None = None,
                second_order: int = 0) -> list[VariationFamily]:
    """Every first-order family at ``(a, b)`` plus random ``SecondOrder`` ones."""
    fams = [VariationFamily(Kind.ROTATION_REAL, n, a, b), VariationFamily(Kind.ROTATION_IMAG, n, a, b)]
    for m in _complement(n, a, b):
        for kind in _TRANSLATIONS:
            fams.append(VariationFamily(kind, n, a, b, int(m)))
    if second_order and n > 2:
        rng = rng or np.random.default_rng(0)
        for _ in range(second_order):
            wa, wb = random_directions(rng, n, a, b)
            fams.append(VariationFamily.second_order(n, a, b, wa, wb))
    return fams
