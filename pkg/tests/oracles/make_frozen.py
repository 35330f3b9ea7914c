"""Regenerate ``tests/data/frozen.json`` from independent reference computations.

Nothing here calls the package's contraction code.  Tensors are written out
component by component in plain Python (or sympy), and every contraction is
an explicit loop, so the frozen values check the einsum-based
implementation rather than restate it.  The only package call is
``realify`` for the isotropic brute force, whose own conventions are tested
separately.

Run from the repository root::

    python3 tests/oracles/make_frozen.py
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path

import numpy as np
import sympy as sp
from scipy.stats import qmc

OUT = Path(__file__).resolve().parents[1] / "data" / "frozen.json"


def fs_components(n, c):
    """Dictionary of ``R[a,b,c,d] = c(δab δcd + δad δcb)``."""
    R = {}
    for a, b, x, d in itertools.product(range(n), repeat=4):
        R[a, b, x, d] = c * ((a == b) * (x == d) + (a == d) * (x == b))
    return R


def reaction_diagonal_loops(R, n):
    """Diagonal reaction term by its componentwise formula, with plain sums."""
    D = {}
    for a, b in itertools.product(range(n), repeat=2):
        total = 0
        for m, v in itertools.product(range(n), repeat=2):
            total += R[a, a, m, v] * R[v, m, b, b]
            total -= R[a, m, b, v] * sp.conjugate(R[a, m, b, v])
            total += R[a, b, m, v] * sp.conjugate(R[a, b, m, v])
        D[a, b] = sp.simplify(total)
    return D


def reaction_full_loops(R, n):
    Q = {}
    for i, j, k, l in itertools.product(range(n), repeat=4):
        total = 0
        for p, q in itertools.product(range(n), repeat=2):
            total += R[i, j, p, q] * R[q, p, k, l]
            total -= R[i, p, k, q] * R[p, j, q, l]
            total += R[i, l, p, q] * R[q, p, k, j]
        Q[i, j, k, l] = sp.expand(total)
    return Q


def symbolic_reaction():
    c, t, c0 = sp.symbols("c t c0", positive=True)
    out = {}
    for n in (2, 3):
        R = fs_components(n, c)
        D = reaction_diagonal_loops(R, n)
        Q = reaction_full_loops(R, n)
        off = sp.simplify(D[0, 1] / c**2)
        diag = sp.simplify(D[0, 0] / c**2)
        # Q(FS_c) is proportional to FS_c; find the factor componentwise
        lam = sp.simplify(Q[0, 0, 0, 0] / R[0, 0, 0, 0])
        closure = all(sp.simplify(Q[k] - lam * R[k]) == 0 for k in R)
        # dc/dt is read off the (0,0,0,0) component, where R = 2c
        cf = sp.Function("cf")
        rate = sp.simplify(lam * c / 1)
        sol = sp.dsolve(sp.Eq(cf(t).diff(t), rate.subs(c, cf(t))), cf(t), ics={cf(0): c0})
        out[str(n)] = {
            "diag_over_c2": str(diag),
            "offdiag_over_c2": str(off),
            "closure_factor_over_c": str(sp.simplify(lam / c)),
            "family_closed": bool(closure),
            "double_trace_minus_ric2": str(sp.simplify(
                sum(D[a, b] for a in range(n) for b in range(n))
                - sum((sum(R[a, b, m, m] for m in range(n))) ** 2 for a in range(n) for b in range(n))
            )),
            "c_of_t": str(sp.simplify(sol.rhs)),
        }
    return out


def _bisectional(R, n, X, Y):
    total = 0j
    for a, b, x, d in itertools.product(range(n), repeat=4):
        total += R[a, b, x, d] * X[a] * np.conj(X[b]) * Y[x] * np.conj(Y[d])
    return total


def example_components(n):
    """Surface at κ = -4 on index 0, FS with holomorphic sectional 4 on 1..n."""
    N = n + 1
    R = {k: 0.0 for k in itertools.product(range(N), repeat=4)}
    R[0, 0, 0, 0] = -4.0
    fs = fs_components(n, 2.0)
    for (a, b, x, d), v in fs.items():
        R[a + 1, b + 1, x + 1, d + 1] = float(v)
    return R


def ohb_grid_min(R, n_points_log2=20):
    """OHB minimum for n = 2 over a Sobol grid of the frame space.

    Up to phases a 2-frame in C^2 is ``X = (cos s, e^{iψ} sin s)`` with
    ``Y = (-e^{-iψ} sin s, cos s)``; the value depends on (s, ψ) only.
    """
    pts = qmc.Sobol(2, scramble=True, seed=7).random_base2(n_points_log2)
    s = pts[:, 0] * (np.pi / 2)
    psi = pts[:, 1] * 2 * np.pi
    X = np.stack([np.cos(s), np.exp(1j * psi) * np.sin(s)], axis=1)
    Y = np.stack([-np.exp(-1j * psi) * np.sin(s), np.cos(s)], axis=1)
    vals = np.zeros(len(s), dtype=complex)
    for (a, b, x, d), v in R.items():
        if v != 0:
            vals += v * X[:, a] * X[:, b].conj() * Y[:, x] * Y[:, d].conj()
    return float(vals.real.min())


def isotropic_brute_force(samples=100_000, seed=11):
    from kahlerlab.models import example_1_2
    from kahlerlab.tensor_core import realify

    Rr = realify(example_1_2(2)).entries
    m = Rr.shape[0]
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((samples, m, 4)))
    e = [Q[:, :, k] for k in range(4)]

    def R4(a, b, c, d):
        return np.einsum("ijkl,si,sj,sk,sl->s", Rr, a, b, c, d)

    def K(a, b):
        return R4(a, b, b, a)

    # R(e1, e2, e4, e3) is the mixed term in the convention R(a,b,b,a) = sectional
    vals = K(e[0], e[2]) + K(e[0], e[3]) + K(e[1], e[2]) + K(e[1], e[3]) - 2 * R4(e[0], e[1], e[3], e[2])
    return float(vals.min())


def main():
    frozen = {"reaction": symbolic_reaction()}

    # closed forms on the FS tensor with holomorphic sectional 4 (c = 2)
    fs3 = fs_components(3, 2.0)
    X = np.array([1, 0, 0]); Y = np.array([0, 1, 0])
    frozen["fs3_bisectional_e1e2"] = _bisectional(fs3, 3, X, Y).real
    fs2 = fs_components(2, 2.0)
    frozen["fs2_ricci"] = [[float(sum(fs2[a, b, m, m] for m in range(2))) for b in range(2)] for a in range(2)]
    frozen["fs2_scalar"] = float(sum(fs2[a, a, b, b] for a in range(2) for b in range(2)))
    ex2 = example_components(2)
    frozen["example2_scalar"] = float(sum(ex2[a, a, b, b] for a in range(3) for b in range(3)))
    frozen["fs3_block_psd_gap"] = float(
        sum(fs3[0, 0, m, v] * fs3[v, m, 1, 1] - abs(fs3[0, m, 1, v]) ** 2 for m in [2] for v in [2])
    )
    frozen["fs2_weitzenbock_10"] = float((1 - 0) ** 2 * fs2[0, 0, 1, 1])

    # quasi-random grid minima for the n = 2 OHB cone
    rng = np.random.default_rng(2024)
    grid = {"fs2": ohb_grid_min(fs2), "tensors": []}
    for k in range(20):
        raw = rng.standard_normal((2,) * 4) + 1j * rng.standard_normal((2,) * 4)
        # close under the symmetries with explicit loops
        R = {}
        for idx in itertools.product(range(2), repeat=4):
            a, b, x, d = idx
            orbit = [(a, b, x, d), (x, b, a, d), (a, d, x, b), (x, d, a, b)]
            vals = [raw[o] for o in orbit] + [np.conj(raw[o[1], o[0], o[3], o[2]]) for o in orbit]
            R[idx] = complex(np.mean(vals))
        grid["tensors"].append({
            "entries": [[list(i), R[i].real, R[i].imag] for i in sorted(R)],
            "grid_min": ohb_grid_min(R),
        })
    frozen["ohb_grid_n2"] = grid

    frozen["example2_isotropic_bruteforce_min"] = isotropic_brute_force()
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(frozen, indent=1, sort_keys=True) + "\n")
    print(json.dumps({k: v for k, v in frozen.items() if k != "ohb_grid_n2"}, indent=1, sort_keys=True))
    print("grid minima:", [round(t["grid_min"], 6) for t in grid["tensors"]])


if __name__ == "__main__":
    main()
