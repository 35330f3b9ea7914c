"""Reaction ODE of the Kähler–Ricci flow on algebraic curvature tensors.

In an evolving unitary frame the curvature of a Kähler–Ricci flow obeys
``∂R = ΔR + Q(R)``.  Dropping the Laplacian leaves the ODE ``dR/dt = Q(R)``
studied here, with

    Q_{i j̄ k l̄} = Σ_{p,q} R_{i j̄ p q̄} R_{q p̄ k l̄}
                 - R_{i p̄ k q̄} R_{p j̄ q l̄}
                 + R_{i l̄ p q̄} R_{q p̄ k j̄}.

Its diagonal ``Q_{a ā b b̄}`` is the familiar expression
``Σ R_{aāμν̄} R_{νμ̄bb̄} - |R_{aμ̄bν̄}|² + |R_{ab̄μν̄}|²`` and its double trace
is ``|Ric|²``, which is the reaction term of the scalar curvature.
:func:`reaction_full` asserts all three properties on request.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .cones import Condition, CertifyOptions, certify
from .errors import PreconditionError
from .tensor_core import (
    KahlerCurvatureTensor,
    ricci,
    ricci_norm_squared,
    scalar,
    symmetrize,
    validate,
)

log = logging.getLogger(__name__)

BLOWUP_CAP = 1e6
MONITOR_STARTS = 8
MONITOR_DIP = -1e-6


def reaction_diagonal(T: KahlerCurvatureTensor) -> np.ndarray:
    """Real matrix ``D[a, b] = Q_{aābb̄}`` computed from its own formula."""
    R = T.entries
    first = np.einsum("aapq,qpbb->ab", R, R)
    second = np.einsum("apbq->ab", np.abs(R) ** 2)
    third = np.einsum("abpq->ab", np.abs(R) ** 2)
    return (first - second + third).real


def _quadratic(R: np.ndarray) -> np.ndarray:
    return (
        np.einsum("ijpq,qpkl->ijkl", R, R)
        - np.einsum("ipkq,pjql->ijkl", R, R)
        + np.einsum("ilpq,qpkj->ijkl", R, R)
    )


def reaction_full(T: KahlerCurvatureTensor, check: bool = True) -> KahlerCurvatureTensor:
    """Full quadratic reaction term ``Q(R)``.

    Parameters
    ----------
    check : bool
        Verify Kähler symmetry, the diagonal restriction and the ``|Ric|²``
        double trace.  Failure raises ``AssertionError``: it would mean the
        quadratic itself is wrong.
    """
    Q = _quadratic(T.entries)
    if check:
        scale = 1.0 + T.norm() ** 2
        bad = validate(Q, 1e-10 * scale)
        if bad:
            raise AssertionError(f"reaction term breaks Kähler symmetry at {bad[0].index}")
        diag = np.einsum("aabb->ab", Q)
        if np.max(np.abs(diag - reaction_diagonal(T))) > 1e-10 * scale:
            raise AssertionError("reaction term disagrees with its diagonal formula")
        ric2 = ricci_norm_squared(T)
        if abs(np.einsum("aabb->", Q) - ric2) > 1e-9 * (1.0 + ric2):
            raise AssertionError("double trace of the reaction term is not |Ric|^2")
    return KahlerCurvatureTensor(Q)


@dataclass(frozen=True)
class Monitor:
    time: float
    scalar: float
    min_ricci_eigenvalue: float
    ohb_min: float
    tensor_norm: float
    full_check: bool = False

    def row(self) -> dict:
        return {
            "time": self.time,
            "scalar": self.scalar,
            "ohbMin": self.ohb_min,
            "minRicciEigenvalue": self.min_ricci_eigenvalue,
            "tensorNorm": self.tensor_norm,
        }


@dataclass
class FlowTrajectory:
    """States of the reaction ODE at the integration times.

    ``monitors`` holds one record per monitored step (every
    ``monitor_every`` steps plus the final one).  ``blew_up`` marks a run
    truncated because the tensor norm passed the cap.
    """

    times: list[float]
    states: list[KahlerCurvatureTensor]
    monitors: list[Monitor] = field(default_factory=list)
    blew_up: bool = False
    max_symmetry_defect: float = 0.0

    @property
    def final(self) -> KahlerCurvatureTensor:
        return self.states[-1]

    def min_ohb(self) -> float:
        vals = [m.ohb_min for m in self.monitors if not math.isnan(m.ohb_min)]
        return min(vals) if vals else float("nan")

    def rows(self) -> list[dict]:
        return [m.row() for m in self.monitors]


def _monitor(t: float, T: KahlerCurvatureTensor, seed: int, warm):
    """Cheap OHB minimum with a full certification on any dip."""
    ohb = float("nan")
    argmin = None
    full = False
    if T.n >= 2:
        res = certify(T, Condition.OHB, CertifyOptions(starts=MONITOR_STARTS, seed=seed),
                      warm_start=warm)
        ohb = res.min_value
        argmin = np.stack(res.argmin)
        if ohb < MONITOR_DIP:
            full = True
            res = certify(T, Condition.OHB, CertifyOptions(seed=seed), warm_start=argmin)
            log.info("OHB monitor dip %.3e at t=%.4g; full certification gives %.3e",
                     ohb, t, res.min_value)
            ohb = res.min_value
            argmin = np.stack(res.argmin)
    ev = np.linalg.eigvalsh(ricci(T))
    return Monitor(t, scalar(T), float(ev[0]), ohb, T.norm(), full), argmin


def integrate(
    T0: KahlerCurvatureTensor,
    dt: float,
    horizon: float,
    monitor_every: int = 1,
    *,
    monitor: bool = True,
    seed: int = 0,
) -> FlowTrajectory:
    """Classical fourth-order Runge–Kutta for ``dR/dt = Q(R)``.

    Each accepted state is re-symmetrized.  When ``horizon`` is not a
    multiple of ``dt`` the final step is shortened to land on it.  A run
    whose tensor norm exceeds ``BLOWUP_CAP`` stops early with
    ``blew_up = True``.

    Raises
    ------
    PreconditionError
        For nonpositive ``dt``, ``horizon`` or ``monitor_every``.
    """
    if not dt > 0 or not horizon > 0:
        raise PreconditionError("dt and horizon must be positive")
    if monitor_every < 1:
        raise PreconditionError("monitor_every must be >= 1")
    # the symmetry guard runs once on the initial data
    reaction_full(T0, check=True)
    steps = max(1, math.ceil(horizon / dt - 1e-9))

    def F(R):
        return _quadratic(R)

    R = symmetrize(T0.entries)
    traj = FlowTrajectory([0.0], [KahlerCurvatureTensor(R)])
    warm = None
    if monitor:
        m, warm = _monitor(0.0, traj.states[0], seed, warm)
        traj.monitors.append(m)
    t = 0.0
    for k in range(1, steps + 1):
        h = dt if k < steps else horizon - (steps - 1) * dt
        k1 = F(R)
        k2 = F(R + 0.5 * h * k1)
        k3 = F(R + 0.5 * h * k2)
        k4 = F(R + h * k3)
        new = R + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        sym = symmetrize(new)
        traj.max_symmetry_defect = max(traj.max_symmetry_defect, float(np.max(np.abs(new - sym))))
        R = sym
        t = horizon if k == steps else k * dt
        state = KahlerCurvatureTensor(R)
        traj.times.append(t)
        traj.states.append(state)
        norm = state.norm()
        blown = not np.isfinite(norm) or norm > BLOWUP_CAP
        if monitor and (k % monitor_every == 0 or k == steps or blown):
            if blown:
                traj.monitors.append(Monitor(t, float("nan"), float("nan"), float("nan"), norm))
            else:
                m, warm = _monitor(t, state, seed, warm)
                traj.monitors.append(m)
        if blown:
            traj.blew_up = True
            log.info("blow-up at t=%.6g (norm %.3e)", t, norm)
            break
    return traj


def fubini_study_scale(c0: float, n: int, t: float) -> float:
    """Closed-form ``c(t) = c0 / (1 - (n+1) c0 t)`` of the self-similar solution."""
    return c0 / (1.0 - (n + 1) * c0 * t)


@dataclass(frozen=True)
class ZeroSetReport:
    """Itemized zero-set conditions at an index pair ``(a, b)``.

    ``quadratic`` is ``Σ_{μν} R_{aāμν̄}R_{νμ̄bb̄} - |R_{aμ̄bν̄}|²``;
    ``mixed`` is ``max |R_{ab̄μν̄}|``; ``off_diagonal`` is
    ``max(|R_{aāμb̄}|, |R_{bb̄μā}|)``.
    """

    pair: tuple[int, int]
    quadratic: float
    mixed: float
    off_diagonal: float
    tolerance: float

    @property
    def passed(self) -> dict[str, bool]:
        tol = self.tolerance
        return {
            "quadratic": abs(self.quadratic) <= tol,
            "mixed": self.mixed <= tol,
            "off_diagonal": self.off_diagonal <= tol,
        }

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "quadratic": self.quadratic,
            "mixed": self.mixed,
            "off_diagonal": self.off_diagonal,
            "passed": self.passed,
            "ok": self.ok,
        }


def zero_set_conditions(T: KahlerCurvatureTensor, a: int, b: int, tol: float = 1e-10) -> ZeroSetReport:
    """Conditions forced on the tensor at a boundary zero ``R_{aābb̄} = 0``."""
    if a == b:
        raise PreconditionError("zero-set conditions need distinct indices")
    R = T.entries
    quad = np.einsum("pq,qp->", R[a, a], R[:, :, b, b]) - np.sum(np.abs(R[a, :, b, :]) ** 2)
    mixed = float(np.max(np.abs(R[a, b])))
    off = float(max(np.max(np.abs(R[a, a, :, b])), np.max(np.abs(R[b, b, :, a]))))
    return ZeroSetReport((a, b), float(quad.real), mixed, off, tol)
