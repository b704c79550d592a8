"""Acceptance criteria 1 to 13, each at its stated tolerance.

Every test records one PASS/FAIL line; conftest prints them after the run.
``python tests/test_acceptance.py`` runs the same checks without pytest.
"""

from __future__ import annotations

import io
import math
import os
import subprocess
import sys
import time
from contextlib import redirect_stdout
from fractions import Fraction
from functools import lru_cache

import sympy

from cayleylab.bounds import BoundReport, compare
from cayleylab.cayley import build_ball, growth_estimate
from cayleylab.cli import run
from cayleylab.criteria import (CERTIFIED_FALSE, CERTIFIED_TRUE, check_bs3, check_growth4, check_radius_half,
                                lift_rho_scan, uniform_conductance_scan)
from cayleylab.gensets import lift_multiset, power_multiset, power_set, standard_genset
from cayleylab.groups import DirectProduct, FreeAbelian, FreeGroup
from cayleylab.isoperimetry import (box, finite_set, folner_deficiency, iso_upper_via_family, mohar_propagate,
                                    phi_from_h)
from cayleylab.percolation import PercConfig, crossing_indicators, pc_bounds, pc_estimate, theta_r, tree_theta_oracle
from cayleylab.spectral import (ratio_from_list, rho_lower, rho_ratio_estimate, rho_report, tree_return_oracle,
                                walk_series)

from oracles import brute_force_return, tree_sphere_sizes

RESULTS: list = []

F2 = FreeGroup(2)
S2 = standard_genset(F2)
F3 = FreeGroup(3)
S3 = standard_genset(F3)
SQRT3_2 = sympy.sqrt(3) / 2


@lru_cache(maxsize=None)
def f2_ball(r: int):
    return build_ball(F2, S2, r)


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS.append(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(RESULTS[-1])
    assert ok, detail


def test_criterion_01_ball_exactness():
    buf = io.StringIO()
    t0 = time.perf_counter()
    with redirect_stdout(buf):
        code = run(["ball", "F2", "--r", "10", "--format", "csv"])
    elapsed = time.perf_counter() - t0
    lines = [l for l in buf.getvalue().splitlines() if l and not l.startswith("#")]
    spheres = [int(l.split(",")[1]) for l in lines[1:-1]]
    total = int(lines[-1].split(",")[1])
    ok = code == 0 and total == 118097 and spheres == tree_sphere_sizes(4, 10) and elapsed < 1.0
    record(1, ok, f"|B_10|={total}, spheres match 4*3^(j-1): {spheres == tree_sphere_sizes(4, 10)}, "
                  f"{elapsed:.2f}s in-process")


def test_criterion_02_walk_exactness():
    series = walk_series(F2, S2, 4)
    brute2 = brute_force_return(F2, S2.elements, 2)
    brute4 = brute_force_return(F2, S2.elements, 4)
    ok = series.P[2] == Fraction(1, 4) == brute2 and series.P[4] == Fraction(7, 64) == brute4
    record(2, ok, f"P2={series.P[2]}, P4={series.P[4]}, brute force {brute2}, {brute4}")


def test_criterion_03_spectral_convergence():
    t0 = time.perf_counter()
    tree_ratio = ratio_from_list(tree_return_oracle(4, 200))
    series = walk_series(F2, S2, 24)
    walk_ratio = rho_ratio_estimate(series)
    # P_2m^(1/2m) <= sqrt(3)/2  <=>  P_2m <= (3/4)^m, exact rationals.
    roots_ok = all(series.even(m) <= Fraction(3, 4) ** m for m in range(1, series.max_m + 1))
    elapsed = time.perf_counter() - t0
    target = math.sqrt(3) / 2
    ok = abs(tree_ratio - target) < 0.005 and abs(walk_ratio - target) < 0.05 and roots_ok and elapsed < 30
    record(3, ok, f"tree ratio {tree_ratio:.5f}, walk ratio {walk_ratio:.5f}, roots <= sqrt3/2: {roots_ok}, "
                  f"{elapsed:.1f}s")


def test_criterion_04_multiset_power_identity():
    bad = []
    for k in (2, 3):
        M = power_multiset(F2, S2, k)
        for m in (1, 2, 3):
            lhs = walk_series(F2, M, 2 * m).P[2 * m]
            rhs = walk_series(F2, S2, 2 * m * k).P[2 * m * k]
            if lhs != rhs:
                bad.append((k, m, lhs, rhs))
    record(4, not bad, f"P^(k)_2m == P_2mk for k in 2,3 and m in 1..3; mismatches: {bad}")


def test_criterion_05_power_bound():
    f2 = rho_lower(walk_series(F2, power_set(F2, S2, 2), 12))
    f3 = rho_lower(walk_series(F3, power_set(F3, S3, 2), 8))
    ok = compare(f2.lower.exact, sympy.Rational(12, 13)) <= 0 and compare(f3.lower.exact, sympy.Rational(20, 31)) <= 0
    record(5, ok, f"F2 S^2 rho_lower {f2.lower.value:.5f} <= 12/13, F3 S^2 rho_lower {f3.lower.value:.5f} <= 20/31")


def test_criterion_06_mohar_chain():
    rho = rho_report(F2, S2)
    h = mohar_propagate(rho, 4)
    hand_lo = 4 * (1 - math.sqrt(3) / 2) / 3
    fam = iso_upper_via_family(F2, S2, [8], rho=rho)
    h_upper_ball = fam.upper.value / 4
    reports = [rho, h, phi_from_h(h, 4), fam]
    ordered = all(r.certified_lower is None or r.certified_upper is None
                  or r.certified_lower.value <= r.certified_upper.value for r in reports)
    ok = (abs(h.lower.value - hand_lo) < 1e-4 and abs(h.upper.value - 0.5) < 1e-4
          and abs(h_upper_ball - 0.5) < 1e-3 and ordered)
    record(6, ok, f"h in [{h.lower.value:.6f}, {h.upper.value:.6f}], ball h-upper r=8 {h_upper_ball:.6f}, "
                  f"lower<=upper everywhere: {ordered}")


def test_criterion_07_percolation_oracle():
    t0 = time.perf_counter()
    ball = f2_ball(12)
    inside = 0
    for r in (4, 6, 8, 10, 12):
        for p in (0.2, 0.3, 0.4, 0.5, 0.6):
            est = theta_r(PercConfig(ball, p, 10_000, 7, radius=r))
            inside += est.within(tree_theta_oracle(4, r, p), z=3.0)
    monotone = True
    prev = None
    for i in range(41):
        cur = crossing_indicators(ball, i / 40, 10_000, 7)
        if prev is not None and (cur < prev).any():
            monotone = False
        prev = cur
    elapsed = time.perf_counter() - t0
    record(7, inside >= 24 and monotone and elapsed < 120,
           f"{inside}/25 within 3 Wilson sigma, coupled monotone in p: {monotone}, {elapsed:.1f}s")


def test_criterion_08_pc_bracketing():
    ball = f2_ball(12)
    estimates = {}
    for r in (8, 10, 12):
        rep = pc_estimate(F2, S2, r, 2000, seed=7, ball=ball)
        estimates[r] = rep.estimate.value
    lo, hi = rep.certified_lower, rep.certified_upper
    bracket = lo.value <= estimates[12] <= hi.value
    decreasing = estimates[8] > estimates[10] > estimates[12]
    shown = ", ".join(f"r={r}: {v:.4f}" for r, v in estimates.items())
    record(8, bracket and decreasing,
           f"certified [{lo.value:.4f}, {hi.value:.4f}], crossing estimates {shown}; "
           f"r=12 inside: {bracket}, decreasing: {decreasing}")


def test_criterion_09_condition_verdicts():
    def parts(k):
        F = FreeGroup(k)
        S = standard_genset(F)
        return S, rho_report(F, S), growth_estimate(F, S, 3)

    S, rho2, gr2 = parts(2)
    g2 = check_growth4(rho2, len(S), gr2)
    bs2 = check_bs3(rho2, BoundReport("p_c", *pc_bounds(S, rho2)), len(S))
    S, rho3, gr3 = parts(3)
    g3 = check_growth4(rho3, len(S), gr3)
    _, rho13, _ = parts(13)
    half13 = check_radius_half(rho13)
    ok = (g2.verdict == CERTIFIED_FALSE and compare(g2.lower.exact, 2 / sympy.sqrt(3)) == 0
          and g3.verdict == CERTIFIED_TRUE and compare(g3.upper.exact, 2 / sympy.sqrt(5)) == 0
          and half13.verdict == CERTIFIED_TRUE and half13.upper.exact == sympy.Rational(5, 13)
          and bs2.verdict == CERTIFIED_FALSE and compare(bs2.lower.exact, 2 / sympy.sqrt(3)) == 0)
    record(9, ok, f"GROWTH4 F2 {g2.verdict} ({g2.lower.exact}), F3 {g3.verdict} ({g3.upper.exact}), "
                  f"RADIUS_HALF F13 {half13.verdict}, BS3 F2 {bs2.verdict}")


def test_criterion_10_uniform_conductance():
    t0 = time.perf_counter()
    scan = uniform_conductance_scan(F3, S3, 4)
    elapsed = time.perf_counter() - t0
    rows = scan["rows"]
    h_ok = len(rows) == 4 and all(r["h_lower_certified"] and r["h_lower"] >= 0.05 for r in rows)
    col = [r["rho_upper_product"] for r in rows]
    ratios = [b / a for a, b in zip(col, col[1:])]
    geometric = all(q < 0.95 for q in ratios)
    record(10, h_ok and geometric and elapsed < 120,
           f"h lower {[round(r['h_lower'], 4) for r in rows]}, rho upper {[round(c, 4) for c in col]} "
           f"(ratios {[round(q, 3) for q in ratios]}), {elapsed:.1f}s")


def test_criterion_11_lift():
    ambient = DirectProduct((F2, FreeAbelian(1)))
    pairs = lift_multiset(ambient, S2, 2)
    fiber = {h for g, h in pairs if g == ()}
    projected = {}
    for g, _ in pairs:
        projected[g] = projected.get(g, 0) + 1
    multiplicities_ok = projected == dict(power_multiset(F2, S2, 2).multiplicity)
    rows = lift_rho_scan(ambient, S2, 2, 6)
    decreasing = rows[1]["ratio_estimate"] < rows[0]["ratio_estimate"]
    ok = len(pairs) == 16 and len(fiber) == 4 and multiplicities_ok and decreasing
    record(11, ok, f"{len(pairs)} lifted pairs, {len(fiber)} identity-fiber elements, projection matches: "
                   f"{multiplicities_ok}, ratio n=1 {rows[0]['ratio_estimate']:.4f} > n=2 "
                   f"{rows[1]['ratio_estimate']:.4f}")


def test_criterion_12_folner():
    Z2 = FreeAbelian(2)
    box_def = folner_deficiency(Z2, standard_genset(Z2), box(Z2, 40))
    ball = build_ball(F2, S2, 6)
    ball_defs = [folner_deficiency(F2, S2, finite_set(F2, ball.vertices[:ball.size(r)])) for r in range(1, 7)]
    ok = box_def == Fraction(1, 20) and all(d >= Fraction(9, 10) for d in ball_defs)
    record(12, ok, f"Z^2 box 40 deficiency {box_def}, F2 ball deficiencies {[str(d) for d in ball_defs]}")


def test_criterion_13_determinism():
    commands = [
        ["percolate", "F2", "--gens", "standard", "--r", "12", "--p", "0.4", "--trials", "10000", "--format", "csv"],
        ["pc", "F2", "--r", "8", "--trials", "2000", "--format", "csv"],
        ["pc", "F2", "--r", "6", "--trials", "1000", "--format", "json"],
    ]
    mismatched = []
    for argv in commands:
        outputs = set()
        for threads in ("1", "4", "8"):
            env = dict(os.environ, CAYLEYLAB_THREADS=threads)
            proc = subprocess.run([sys.executable, "-m", "cayleylab", *argv, "--seed", "7"],
                                  capture_output=True, env=env, check=True)
            outputs.add(proc.stdout)
        if len(outputs) != 1:
            mismatched.append(argv[0])
    record(13, not mismatched, f"{len(commands)} stochastic commands at 1/4/8 threads, "
                               f"mismatches: {mismatched or 'none'}")


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
