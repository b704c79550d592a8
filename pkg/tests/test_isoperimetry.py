from __future__ import annotations

from fractions import Fraction

import pytest
import sympy

from cayleylab import groups
from cayleylab.bounds import BoundReport, exact_endpoint, float_endpoint
from cayleylab.cayley import build_ball
from cayleylab.errors import ValidationError
from cayleylab.gensets import standard_genset
from cayleylab.groups import FreeAbelian, FreeGroup
from cayleylab.isoperimetry import (average_folner_deficiency, ball_boundary_table, box, edge_boundary,
                                    finite_set, folner_deficiency, iso_upper_via_family,
                                    min_boundary_ratio_bruteforce, mohar_propagate, phi_from_h,
                                    vertex_boundary)

F2 = FreeGroup(2)
S2 = standard_genset(F2)
Z2 = FreeAbelian(2)
SZ = standard_genset(Z2)


def test_box_boundaries():
    F = box(Z2, 3)
    assert edge_boundary(Z2, SZ, F) == 12
    assert vertex_boundary(Z2, SZ, F) == 12
    assert folner_deficiency(Z2, SZ, box(Z2, 40)) == Fraction(1, 20)
    assert average_folner_deficiency(Z2, SZ, box(Z2, 40)) == Fraction(1, 20)


def test_singleton_is_fully_deficient():
    F = finite_set(F2, [()])
    assert folner_deficiency(F2, S2, F) == 2
    assert edge_boundary(F2, S2, F) == 4


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_boundary_chain_on_balls(r):
    ball = build_ball(F2, S2, r)
    F = finite_set(F2, ball.vertices)
    eb, vb = edge_boundary(F2, S2, F), vertex_boundary(F2, S2, F)
    assert vb <= eb <= len(S2) * vb
    assert folner_deficiency(F2, S2, F) <= 2


def test_ball_table_matches_explicit_sets():
    ball = build_ball(F2, S2, 5)
    for row in ball_boundary_table(F2, S2, range(1, 6)):
        F = finite_set(F2, ball.vertices[:row["setsize"]])
        assert row["edge_boundary"] == edge_boundary(F2, S2, F)
        assert row["edge_boundary"] == 4 * 3 ** row["k"]


def test_mohar_exact_f2():
    rho = BoundReport("rho", exact_endpoint(sympy.sqrt(3) / 2, "lower"), exact_endpoint(sympy.sqrt(3) / 2, "upper"))
    h = mohar_propagate(rho, 4)
    assert h.lower.exact == sympy.Rational(4, 3) - 2 * sympy.sqrt(3) / 3
    assert h.upper.exact == sympy.Rational(1, 2)
    phi = phi_from_h(h, 4)
    assert phi.lower.value == pytest.approx(0.714531, abs=1e-6)


def test_mohar_from_power_bound():
    h = mohar_propagate(BoundReport("rho", None, exact_endpoint(sympy.Rational(12, 13), "upper")), 13)
    assert h.lower.exact == sympy.Rational(1, 12)


def test_mohar_amenable_and_reverse():
    h = BoundReport("h", exact_endpoint(0, "lower"), exact_endpoint(0, "upper"))
    rho = mohar_propagate(h, 4)
    assert rho.lower.exact == 1 and rho.upper.exact == 1


def test_mohar_float_path_rounds_outward():
    h = mohar_propagate(BoundReport("rho", None, float_endpoint(0.75, "upper")), 4)
    assert h.lower.value < 4 * 0.25 / 3


def test_mohar_rejects_out_of_range():
    with pytest.raises(ValidationError):
        mohar_propagate(BoundReport("rho", None, exact_endpoint(2, "upper")), 4)
    with pytest.raises(ValidationError):
        mohar_propagate(BoundReport("phi", None, exact_endpoint(1, "upper")), 4)


def test_family_upper_f2():
    rep = iso_upper_via_family(F2, S2, range(1, 9))
    assert rep.upper.exact == sympy.Rational(4 * 3**8, 2 * 3**8 - 1)
    assert iso_upper_via_family(F2, S2, [1]).upper.exact == sympy.Rational(12, 5)
    assert rep.lower.value <= rep.upper.value


def test_family_upper_z2_decays():
    rep = iso_upper_via_family(Z2, SZ, [5, 10, 20], boxes=[10, 40])
    assert rep.upper.exact == sympy.Rational(1, 10)
    assert rep.lower.exact == 0


def test_bruteforce_min_ratio_respects_mohar_lower():
    pool = build_ball(F2, S2, 2).vertices
    best = min_boundary_ratio_bruteforce(F2, S2, pool, 5)
    h_lower = float(sympy.Rational(4, 3) - 2 * sympy.sqrt(3) / 3)
    assert best / 4 >= h_lower
    # A subtree on n vertices leaves by 2n + 2 edges, so n = 5 is best.
    assert best == Fraction(12, 5)
