"""Named curvature models: flat space, Fubini–Study, Riemann surfaces, products.

Fubini–Study models are parametrized by their holomorphic sectional
curvature ``hol_sec``; the tensor is ``c (δ_ab δ_cd + δ_ad δ_cb)`` with
``c = hol_sec / 2``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import GenerationError, PreconditionError
from .tensor_core import (
    KahlerCurvatureTensor,
    conjugate_frame,
    random_tensor,
    random_unitary,
    symmetrize,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Flat:
    n: int


@dataclass(frozen=True)
class FubiniStudy:
    n: int
    hol_sec: float


@dataclass(frozen=True)
class Surface:
    kappa: float


ModelSpec = Flat | FubiniStudy | Surface


def make_model(spec: ModelSpec) -> KahlerCurvatureTensor:
    if isinstance(spec, Flat):
        if spec.n < 1:
            raise PreconditionError("Flat needs n >= 1")
        return flat(spec.n)
    if isinstance(spec, FubiniStudy):
        return fubini_study(spec.n, spec.hol_sec)
    if isinstance(spec, Surface):
        return riemann_surface(spec.kappa)
    raise PreconditionError(f"unknown model spec {spec!r}")


def flat(n: int) -> KahlerCurvatureTensor:
    if n < 1:
        raise PreconditionError("n must be >= 1")
    return KahlerCurvatureTensor(np.zeros((n,) * 4, dtype=complex))


def fubini_study(n: int, hol_sec: float = 4.0) -> KahlerCurvatureTensor:
    if n < 1:
        raise PreconditionError("n must be >= 1")
    if not hol_sec > 0:
        raise PreconditionError("holomorphic sectional curvature must be positive")
    eye = np.eye(n)
    c = hol_sec / 2.0
    entries = c * (np.einsum("ab,cd->abcd", eye, eye) + np.einsum("ad,cb->abcd", eye, eye))
    return KahlerCurvatureTensor(entries.astype(complex))


def riemann_surface(kappa: float) -> KahlerCurvatureTensor:
    return KahlerCurvatureTensor(np.full((1, 1, 1, 1), kappa, dtype=complex))


def product(A: KahlerCurvatureTensor, B: KahlerCurvatureTensor, *more: KahlerCurvatureTensor) -> KahlerCurvatureTensor:
    """Direct sum: each factor's components copied, mixed components zero."""
    factors = (A, B) + more
    n = sum(f.n for f in factors)
    out = np.zeros((n,) * 4, dtype=complex)
    k = 0
    for f in factors:
        s = slice(k, k + f.n)
        out[s, s, s, s] = f.entries
        k += f.n
    return KahlerCurvatureTensor(out)


def example_1_2(n: int) -> KahlerCurvatureTensor:
    """Riemann surface at κ = -4 times ``CP^n`` with holomorphic sectional curvature 4.

    Index 0 is the surface direction, 1..n the projective ones.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    return product(riemann_surface(-4.0), fubini_study(n, 4.0))


def sample_cone(
    seed: int,
    n: int,
    condition: str = "OHB",
    *,
    scale: float | None = None,
    margin: float = 1e-6,
    starts: int = 64,
    max_shifts: int = 8,
) -> KahlerCurvatureTensor:
    """Random tensor shifted toward Fubini–Study until the certifier accepts it.

    The raw tensor is a symmetrized complex Gaussian (std ``scale``, default
    ``0.5/n``).  On orthonormal frames the OHB value of ``FS(n, 2)`` is
    identically 1, and the HB value is at least 1, so the shift ``t`` needed
    is read off the certified minimum; it is re-certified with a fresh seed
    and raised again whenever a deeper minimum turns up.  ``t = 0`` is kept
    when the raw tensor is already certified.

    Raises
    ------
    GenerationError
        When ``max_shifts`` rounds do not produce a certified tensor.
    """
    from .cones import Condition, CertifyOptions, Status, certify

    if n < 2:
        raise PreconditionError("sample_cone needs n >= 2")
    cond = Condition(condition)
    if cond not in (Condition.OHB, Condition.HB):
        raise PreconditionError("sample_cone shifts only into the OHB or HB cone")
    rng = np.random.default_rng([seed, n])
    raw = random_tensor(rng, n, 0.5 / n if scale is None else scale)
    shift_dir = fubini_study(n, 2.0)

    opts = CertifyOptions(starts=starts, seed=seed)
    first = certify(raw, cond, opts)
    if first.status is Status.CERTIFIED and first.min_value >= 0.0:
        return raw
    t = 0.0
    lowest = first.min_value
    for k in range(max_shifts):
        t = max(t, margin - lowest)
        candidate = KahlerCurvatureTensor(symmetrize(raw.entries + t * shift_dir.entries))
        check = certify(candidate, cond, CertifyOptions(starts=starts, seed=seed + 7919 * (k + 1)))
        if check.status is Status.CERTIFIED and check.min_value >= 0.0:
            return candidate
        # a deeper local minimum of the raw part showed up; shift further
        lowest = min(lowest, check.min_value - t)
        log.debug("sample_cone seed=%d round %d: min %.3e", seed, k, check.min_value)
    raise GenerationError(f"no certified sample for seed={seed}, n={n} after {max_shifts} shifts")


def sample_operator_cone(seed: int, n: int, terms: int = 3) -> KahlerCurvatureTensor:
    """Positive combination of unitarily rotated products of nonnegative models.

    Fubini–Study blocks, nonnegatively curved surfaces and flat factors all
    have nonnegative curvature operator, as do their products, rotations and
    positive sums; every such tensor has nonnegative isotropic curvature.
    """
    if n < 2:
        raise PreconditionError("n must be >= 2")
    rng = np.random.default_rng([seed, n, 17])
    total = np.zeros((n,) * 4, dtype=complex)
    for _ in range(terms):
        sizes = []
        left = n
        while left:
            k = int(rng.integers(1, left + 1))
            sizes.append(k)
            left -= k
        blocks = []
        for k in sizes:
            kind = rng.integers(3)
            if kind == 0:
                blocks.append(flat(k))
            elif k == 1:
                blocks.append(riemann_surface(float(rng.uniform(0.0, 2.0))))
            else:
                blocks.append(fubini_study(k, float(rng.uniform(0.5, 2.0))))
        T = blocks[0] if len(blocks) == 1 else product(*blocks)
        T = conjugate_frame(T, random_unitary(rng, n))
        total += float(rng.uniform(0.2, 1.0)) * T.entries
    return KahlerCurvatureTensor(symmetrize(total))
