"""Command-line front end and experiment runner.

Every experiment writes ``summary.json`` (sorted keys, no timestamps, so
identical configurations give byte-identical files) plus plain CSV tables
into the output directory.  Exit codes: 0 success, 1 a checked property
failed, 2 usage or input error, 3 internal error (the offending tensor is
dumped next to the summary).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import re
import sys
import traceback
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import cones, decomposition, flow, models, variations, weitzenbock
from .errors import KahlerLabError, LoadError
from .serialization import deserialize_with_report, serialize
from .tensor_core import (
    KahlerCurvatureTensor,
    conjugate_frame,
    evaluate_bisectional,
    inner,
    random_tensor,
    random_unitary,
    realify,
    ricci_norm_squared,
)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class Experiment(str, Enum):
    VERIFY_EXAMPLE = "VerifyExample12"
    CERTIFY = "Certify"
    FLOW = "Flow"
    VARIATIONS = "Variations"
    DECOMPOSE = "Decompose"
    INEQUALITY_CHAIN = "InequalityChain"


class UsageError(KahlerLabError):
    """The configuration cannot be run as given."""


@dataclass
class ExperimentConfig:
    experiment: Experiment
    model: str | None = None
    input: Path | None = None
    seeds: list[int] = field(default_factory=lambda: [0])
    tol: float = 1e-8
    out: Path = Path("kahlerlab-out")
    dt: float = 1e-3
    horizon: float = 0.1
    starts: int = 64
    conditions: list[str] | None = None

    def validate(self) -> None:
        if self.input is not None and not Path(self.input).is_file():
            raise UsageError(f"input file {self.input} does not exist")
        if self.model is not None and self.input is not None:
            raise UsageError("give either a model or an input file, not both")
        if not self.tol > 0:
            raise UsageError("tolerance must be positive")
        if not self.dt > 0 or not self.horizon > 0:
            raise UsageError("dt and horizon must be positive")
        if self.starts < 1:
            raise UsageError("starts must be >= 1")
        if not self.seeds:
            raise UsageError("at least one seed is required")

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment.value,
            "model": self.model,
            "input": None if self.input is None else str(self.input),
            "seeds": list(self.seeds),
            "tol": self.tol,
            "dt": self.dt,
            "horizon": self.horizon,
            "starts": self.starts,
            "conditions": self.conditions,
        }


# ---------------------------------------------------------------- model specs

_TERM = re.compile(r"^\s*(\w+)\s*\(([^()]*)\)\s*$")


def parse_model(text: str) -> tuple[KahlerCurvatureTensor, list[models.ModelSpec]]:
    """Parse ``Flat(n)``, ``FubiniStudy(n,h)``, ``Surface(k)``, ``Example12(n)``.

    Factors joined with ``*`` form a product.  Returns the tensor and the
    list of factor specs (``Example12`` expands to its two factors).
    """
    specs: list[models.ModelSpec] = []
    for part in text.split("*"):
        m = _TERM.match(part)
        if not m:
            raise UsageError(f"cannot parse model term {part!r}")
        name, args = m.group(1), [a for a in m.group(2).split(",") if a.strip()]
        try:
            if name == "Flat" and len(args) == 1:
                specs.append(models.Flat(int(args[0])))
            elif name == "FubiniStudy" and len(args) in (1, 2):
                specs.append(models.FubiniStudy(int(args[0]), float(args[1]) if len(args) == 2 else 4.0))
            elif name == "Surface" and len(args) == 1:
                specs.append(models.Surface(float(args[0])))
            elif name == "Example12" and len(args) == 1:
                specs += [models.Surface(-4.0), models.FubiniStudy(int(args[0]), 4.0)]
            else:
                raise UsageError(f"unknown model term {part.strip()!r}")
        except ValueError as exc:
            raise UsageError(f"bad arguments in {part.strip()!r}: {exc}") from exc
    try:
        factors = [models.make_model(s) for s in specs]
    except KahlerLabError as exc:
        raise UsageError(str(exc)) from exc
    T = factors[0] if len(factors) == 1 else models.product(*factors)
    return T, specs


# ------------------------------------------------------------------- reports

class Report:
    """Checks and results collected by one experiment."""

    def __init__(self):
        self.checks: list[dict] = []
        self.results: dict = {}
        self.tables: dict[str, list[dict]] = {}
        self.notes: list[str] = []
        self.current: KahlerCurvatureTensor | None = None  # dumped on internal errors

    def check(self, name: str, passed: bool, value=None, threshold=None) -> bool:
        self.checks.append({"name": name, "passed": bool(passed), "value": value,
                            "threshold": threshold})
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, NaN/inf to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_clean(data), sort_keys=True, indent=2) + "\n")


def write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_value(v) for k, v in row.items()})


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return v


# ---------------------------------------------------------------- experiments

def _input_tensor(cfg: ExperimentConfig, report: Report):
    if cfg.input is not None:
        T, load = deserialize_with_report(cfg.input)
        report.results["load"] = {"given": load.given, "completed": len(load.completed)}
        return T, None
    if cfg.model is not None:
        return parse_model(cfg.model)
    return None, None


def _hermitian_orthogonal_pair(rng, n):
    X = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    Y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    X /= np.linalg.norm(X)
    Y -= inner(Y, X) * X
    Y /= np.linalg.norm(Y)
    return X, Y


def example_identity_residual(n: int, samples: int, rng) -> float:
    """Largest ``|R(X,X̄,Y,Ȳ) - 2 Σ_{i<j} |a_i b_j - a_j b_i|²|`` on example_1_2(n).

    Index 0 is the surface direction; the sum runs over projective indices.
    """
    T = models.example_1_2(n)
    worst = 0.0
    for _ in range(samples):
        X, Y = _hermitian_orthogonal_pair(rng, n + 1)
        a, b = X[1:], Y[1:]
        W = np.outer(a, b) - np.outer(b, a)
        rhs = np.sum(np.abs(np.triu(W, 1)) ** 2) * 2
        worst = max(worst, abs(evaluate_bisectional(T, X, Y) - rhs))
    return worst


def isotropic_oracle(T: KahlerCurvatureTensor, samples: int, rng, batch: int = 20000) -> float:
    """Brute-force isotropic minimum over random orthonormal real 4-frames."""
    Rr = realify(T)
    m = Rr.m
    best = math.inf
    left = samples
    while left > 0:
        k = min(batch, left)
        G = rng.standard_normal((k, m, 4))
        Q, _ = np.linalg.qr(G)
        best = min(best, float(cones.isotropic_objective(Rr, Q.transpose(0, 2, 1)).min()))
        left -= k
    return best


def _verify_example(cfg: ExperimentConfig, report: Report) -> None:
    n = 2
    if cfg.model is not None:
        m = re.fullmatch(r"\s*Example12\((\d+)\)\s*", cfg.model)
        if not m:
            raise UsageError("VerifyExample12 takes --model Example12(n)")
        n = int(m.group(1))
    seed = cfg.seeds[0]
    rng = np.random.default_rng(seed)
    T = models.example_1_2(n)
    report.current = T
    resid = example_identity_residual(n, 1000, rng)
    report.check("identityResidualMax", resid <= 1e-10, resid, 1e-10)
    opts = cones.CertifyOptions(starts=cfg.starts, seed=seed)
    ohb = cones.certify(T, cones.Condition.OHB, opts)
    report.check("ohbMin", abs(ohb.min_value) <= 1e-6, ohb.min_value, 1e-6)
    iso = cones.certify(T, cones.Condition.ISOTROPIC, opts)
    oracle = isotropic_oracle(T, 100_000, rng)
    report.check("isotropicViolated", iso.status is cones.Status.VIOLATED and iso.min_value < 0,
                 iso.min_value, 0.0)
    report.check("isotropicBelowOracle", iso.min_value <= oracle + 1e-4, iso.min_value, oracle + 1e-4)
    report.results.update({
        "n": n,
        "identityResidualMax": resid,
        "ohbMin": ohb.min_value,
        "ohbFrame": ohb.to_dict()["argmin"],
        "isotropicMin": iso.min_value,
        "isotropicOracleMin": oracle,
        "ohb": ohb.to_dict(),
        "isotropic": iso.to_dict(),
    })


def _certify(cfg: ExperimentConfig, report: Report) -> None:
    T, _ = _input_tensor(cfg, report)
    if T is None:
        raise UsageError("Certify needs --model or --input")
    report.current = T
    conds = cfg.conditions or [c.value for c in cones.Condition]
    rows = []
    for name in conds:
        try:
            cond = cones.Condition(name)
        except ValueError as exc:
            raise UsageError(f"unknown condition {name!r}") from exc
        if T.n < 2 and cond in (cones.Condition.OHB, cones.Condition.ISOTROPIC):
            report.notes.append(f"{cond.value} skipped: needs n >= 2")
            continue
        for seed in cfg.seeds:
            res = cones.certify(T, cond, cones.CertifyOptions(starts=cfg.starts, seed=seed))
            again = cones.evaluate_frame(T, cond, res.argmin)
            report.check(f"{cond.value}[seed={seed}].notViolated",
                         res.status is not cones.Status.VIOLATED, res.min_value, -res.tolerance)
            report.check(f"{cond.value}[seed={seed}].argminReevaluates",
                         abs(again - res.min_value) <= 1e-9, abs(again - res.min_value), 1e-9)
            report.results.setdefault("certifications", []).append(dict(res.to_dict(), seed=seed))
            rows.append({"condition": cond.value, "seed": seed, "minValue": res.min_value,
                         "status": res.status.value, "converged": res.converged,
                         "starts": res.starts})
    report.tables["certify"] = rows


def _flow(cfg: ExperimentConfig, report: Report) -> None:
    T, specs = _input_tensor(cfg, report)
    fs = specs[0] if specs and len(specs) == 1 and isinstance(specs[0], models.FubiniStudy) else None
    starts = [(seed, T if T is not None else models.sample_cone(seed, 3)) for seed in cfg.seeds]
    if T is not None:
        starts = starts[:1]
    for seed, T0 in starts:
        report.current = T0
        tag = f"seed={seed}"
        cert = cones.certify(T0, cones.Condition.OHB, cones.CertifyOptions(seed=seed)) if T0.n >= 2 else None
        traj = flow.integrate(T0, cfg.dt, cfg.horizon, seed=seed)
        report.tables[f"trajectory_seed{seed}"] = traj.rows()
        report.check(f"{tag}.symmetryDrift", traj.max_symmetry_defect <= 1e-8,
                     traj.max_symmetry_defect, 1e-8)
        trace_err = 0.0
        for state in traj.states[:: max(1, len(traj.states) // 20)]:
            Q = flow.reaction_full(state, check=False)
            ric2 = ricci_norm_squared(state)
            trace_err = max(trace_err, abs(np.einsum("aabb->", Q.entries).real - ric2) / (1 + ric2))
        report.check(f"{tag}.traceIdentity", trace_err <= 1e-9, trace_err, 1e-9)
        entry = {"seed": seed, "steps": len(traj.times) - 1, "final_time": traj.times[-1],
                 "blew_up": traj.blew_up, "ohb_min_along": traj.min_ohb(),
                 "initial_ohb": None if cert is None else cert.min_value}
        if cert is not None and cert.status is cones.Status.CERTIFIED:
            report.check(f"{tag}.ohbPreserved", traj.min_ohb() >= -1e-6, traj.min_ohb(), -1e-6)
        if fs is not None:
            c0 = fs.hol_sec / 2
            c = flow.fubini_study_scale(c0, fs.n, traj.times[-1])
            resid = float(np.max(np.abs(traj.final.entries - models.fubini_study(fs.n, 2 * c).entries)))
            report.check(f"{tag}.closedFormResidual", resid <= 1e-6, resid, 1e-6)
            entry.update(closed_form_c=c, closed_form_residual=resid)
        report.results.setdefault("trajectories", []).append(entry)


def _zero_set_tensor(rng, n: int) -> KahlerCurvatureTensor:
    """Diagonal tensor: only ``R_{iīiī}`` nonzero, so every pair meets the zero sets."""
    arr = np.zeros((n,) * 4, dtype=complex)
    for i in range(n):
        arr[i, i, i, i] = rng.uniform(-2, 2)
    return KahlerCurvatureTensor(arr)


def _variations(cfg: ExperimentConfig, report: Report) -> None:
    T_in, _ = _input_tensor(cfg, report)
    rows = []
    for seed in cfg.seeds:
        rng = np.random.default_rng(seed)
        T = T_in if T_in is not None else random_tensor(rng, 4)
        report.current = T
        n = T.n
        if n < 2:
            raise UsageError("Variations needs n >= 2")
        a, b = (int(i) for i in rng.choice(n, 2, replace=False))
        for fam in variations.families_at(n, a, b, rng, second_order=3 if n > 2 else 0):
            checks = [variations.check_first(T, fam)]
            if fam.kind is variations.Kind.SECOND_ORDER:
                checks.append(variations.check_second(T, fam, 4e-4))
            for chk in checks:
                rows.append(dict(chk.row(), seed=seed, pair=[a, b], m=fam.m))
                # ratios are meaningless once both errors sit at rounding level
                ratio_ok = chk.error_coarse <= 1e-11 or 3.5 <= chk.ratio <= 4.5
                report.check(f"seed={seed}.{chk.label}.ratio", ratio_ok, chk.ratio, [3.5, 4.5])
                report.check(f"seed={seed}.{chk.label}.abs", chk.error_fine <= 1e-5, chk.error_fine, 1e-5)
        if n >= 3:
            report.results.setdefault("block_psd_gap", []).append(
                {"seed": seed, "pair": [a, b], "value": variations.block_psd_gap(T, a, b)})
        D = _zero_set_tensor(rng, max(n, 2))
        for theta in (math.pi / 6, math.pi / 4, math.pi / 3):
            rot = variations.rotation_propagation(D, 0, 1, theta)
            report.check(f"seed={seed}.rotation[{theta:.6f}]", rot.residual <= 1e-10, rot.residual, 1e-10)
    report.tables["variations"] = rows


def _random_product(rng, max_n: int = 6):
    total = int(rng.integers(2, max_n + 1))
    sizes = []
    while total:
        k = int(rng.integers(1, total + 1))
        sizes.append(k)
        total -= k
    factors, expect = [], []
    for k in sizes:
        kind = int(rng.integers(3))
        if kind == 0:
            factors.append(models.flat(k))
            expect += [("Flat", None)] * k
        elif k == 1:
            kappa = float(rng.uniform(-3, 3))
            factors.append(models.riemann_surface(kappa))
            expect.append(("Surface", kappa))
        else:
            h = float(rng.uniform(0.5, 4))
            factors.append(models.fubini_study(k, h))
            expect.append(("FubiniStudyLike", h / 2))
    T = factors[0] if len(factors) == 1 else models.product(*factors)
    return conjugate_frame(T, random_unitary(rng, T.n)), expect


def tags_match(structure: decomposition.ProductStructure, expect, tol: float = 1e-6) -> bool:
    """Compare recovered tags to expected ``(kind, value)`` pairs as multisets."""
    got = sorted((b.tag.kind, b.tag.value if b.tag.value is not None else 0.0) for b in structure.blocks)
    want = sorted((k, v if v is not None else 0.0) for k, v in expect)
    return len(got) == len(want) and all(
        g[0] == w[0] and abs(g[1] - w[1]) <= tol for g, w in zip(got, want)
    )


def _decompose(cfg: ExperimentConfig, report: Report) -> None:
    T_in, _ = _input_tensor(cfg, report)
    rows = []
    cases = [(seed, T_in, None) for seed in cfg.seeds[:1]] if T_in is not None else [
        (seed, *_random_product(np.random.default_rng(seed))) for seed in cfg.seeds
    ]
    for seed, T, expect in cases:
        report.current = T
        st = decomposition.detect_blocks(T, cfg.tol, seed=seed)
        report.check(f"seed={seed}.mixedDefect", st.mixed_defect <= cfg.tol, st.mixed_defect, cfg.tol)
        if expect is not None:
            report.check(f"seed={seed}.tagsRecovered", tags_match(st, expect))
        minima = decomposition.block_min_hol_sec(T, st, seed=seed)
        case = decomposition.theorem_case(st, minima, tol=cfg.tol)
        if expect is None:
            # a user tensor whose blocks break the cross bound is a finding;
            # random test products may legitimately do so
            report.check(f"seed={seed}.caseConsistent", not case.violation, case.case)
        if len(st.blocks) > 1:
            cross = cones.cross_factor_bound(T, st, cfg.tol)
            report.results.setdefault("cross_factor", []).append(dict(cross.to_dict(), seed=seed))
        report.results.setdefault("structures", []).append(
            dict(st.to_dict(), seed=seed, min_hol_sec=minima, case=case.to_dict()))
        for k, blk in enumerate(st.blocks):
            rows.append({"seed": seed, "block": k, "size": blk.size, "tag": str(blk.tag),
                         "min_hol_sec": minima[k]})
    report.tables["blocks"] = rows


def _inequality_chain(cfg: ExperimentConfig, report: Report) -> None:
    T_in, _ = _input_tensor(cfg, report)
    rows = []
    for seed in cfg.seeds:
        tensors = [T_in] if T_in is not None else [models.sample_cone(seed, n) for n in (2, 3, 4)]
        rng = np.random.default_rng([seed, 99])
        for T in tensors:
            report.current = T
            tag = f"seed={seed},n={T.n}"
            inq = cones.derived_inequalities(T, cfg.tol)
            if T_in is not None and T.n >= 2:
                cert = cones.certify(T, cones.Condition.OHB, cones.CertifyOptions(starts=cfg.starts, seed=seed))
                report.results.setdefault("ohb", []).append(cert.to_dict())
                in_cone = cert.status is cones.Status.CERTIFIED
            else:
                in_cone = True
            if in_cone:
                report.check(f"{tag}.derivedInequalities", inq.ok, inq.failures)
            report.results.setdefault("inequalities", []).append(dict(inq.to_dict(), seed=seed))
            for p in inq.pairs:
                rows.append({"seed": seed, "n": T.n, "pair": list(p.pair), "difference": p.difference,
                             "sum": p.sum, "holomorphic": p.holomorphic})
            worst = math.inf
            for _ in range(5):
                worst = min(worst, weitzenbock.curvature_term(T, rng.standard_normal(T.n)))
            if in_cone:
                report.check(f"{tag}.curvatureTerm", worst >= -cfg.tol, worst, -cfg.tol)
    report.tables["inequalities"] = rows


_RUNNERS = {
    Experiment.VERIFY_EXAMPLE: _verify_example,
    Experiment.CERTIFY: _certify,
    Experiment.FLOW: _flow,
    Experiment.VARIATIONS: _variations,
    Experiment.DECOMPOSE: _decompose,
    Experiment.INEQUALITY_CHAIN: _inequality_chain,
}


def summary_dict(cfg: ExperimentConfig, report: Report) -> dict:
    return {
        "config": cfg.to_dict(),
        "passed": report.passed,
        "checks": report.checks,
        "failed_checks": [c["name"] for c in report.checks if not c["passed"]],
        "results": report.results,
        "notes": report.notes,
    }


def run(cfg: ExperimentConfig) -> int:
    """Run one experiment and write its reports; returns the exit status."""
    out = Path(cfg.out)
    try:
        cfg.validate()
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    out.mkdir(parents=True, exist_ok=True)
    report = Report()
    try:
        _RUNNERS[cfg.experiment](cfg, report)
    except (UsageError, LoadError) as exc:
        log.error("%s", exc)
        write_json(out / "summary.json", dict(summary_dict(cfg, report), error=str(exc)))
        return EXIT_USAGE
    except Exception as exc:  # any escape here is a bug; leave a reproducer behind
        log.error("internal error: %s", exc)
        (out / "error.txt").write_text(traceback.format_exc())
        if report.current is not None:
            serialize(report.current, out / "dump_tensor.json")
        write_json(out / "summary.json", dict(summary_dict(cfg, report), error=repr(exc)))
        return EXIT_INTERNAL
    for name, rows in report.tables.items():
        write_csv(out / f"{name}.csv", rows)
    write_json(out / "summary.json", summary_dict(cfg, report))
    return EXIT_OK if report.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kahlerlab", description=__doc__.splitlines()[0])
    p.add_argument("--experiment", required=True, choices=[e.value for e in Experiment])
    p.add_argument("--model", help="e.g. 'FubiniStudy(2,4)', 'Surface(-4)*FubiniStudy(2,4)', 'Example12(2)'")
    p.add_argument("--input", type=Path, help="tensor file in kct-1 format")
    p.add_argument("--seed", type=int, action="append", dest="seeds", help="repeatable; default 0")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", type=Path, default=Path("kahlerlab-out"))
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, default=0.1)
    p.add_argument("--starts", type=int, default=64)
    p.add_argument("--condition", action="append", dest="conditions",
                   choices=[c.value for c in cones.Condition], help="Certify only; repeatable")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = ExperimentConfig(
        experiment=Experiment(args.experiment),
        model=args.model,
        input=args.input,
        seeds=args.seeds or [0],
        tol=args.tol,
        out=args.out,
        dt=args.dt,
        horizon=args.horizon,
        starts=args.starts,
        conditions=args.conditions,
    )
    status = run(cfg)
    summary = Path(cfg.out) / "summary.json"
    if summary.exists():
        data = json.loads(summary.read_text())
        failed = data.get("failed_checks", [])
        print(f"{cfg.experiment.value}: {'passed' if status == 0 else 'status ' + str(status)}"
              f" ({len(data.get('checks', []))} checks, {len(failed)} failed) -> {summary}")
        for name in failed[:10]:
            print(f"  failed: {name}")
    return status


if __name__ == "__main__":
    sys.exit(main())
