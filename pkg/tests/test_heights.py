import math
from fractions import Fraction

import pytest

from p1dyn.errors import DomainError, IterationBudgetError
from p1dyn.heights import (
    HeightValue,
    Place,
    canonical_height,
    height_constants,
    naive_height,
    naive_height_by_places,
    neron_tate,
    place_decomposition,
    tate_limit_raw,
)
from p1dyn.lattes import catalog, curve_E1, curve_E2, lattes_double
from p1dyn.quadfield import QuadFieldElement as QF
from p1dyn.ratmaps import Poly, ProjPoint, RationalMap


def rmap(num, den, d=0):
    return RationalMap(Poly(num, d), Poly(den, d))


def pt(x, y, d=0):
    return ProjPoint(QF(x, 0, d) if not isinstance(x, QF) else x,
                     QF(y, 0, d) if not isinstance(y, QF) else y, d)


class TestNaive:
    def test_trivial_points(self):
        assert naive_height(pt(1, 1)).value == 0.0
        assert naive_height(ProjPoint.infinity()).value == 0.0
        assert naive_height(pt(0, 1)).value == 0.0

    def test_two_to_one(self):
        assert naive_height(pt(2, 1)).value == pytest.approx(math.log(2), abs=1e-14)

    def test_reduction_first(self):
        assert naive_height(pt(6, 4)).value == pytest.approx(math.log(3), abs=1e-14)
        assert naive_height(pt(Fraction(1, 2), 3)).value == pytest.approx(
            math.log(6), abs=1e-14
        )

    def test_gaussian_point(self):
        p = ProjPoint(QF(1, 1, 1), QF(1, 0, 1), 1)
        assert naive_height(p).value == pytest.approx(0.5 * math.log(2), abs=1e-14)

    def test_eisenstein_point(self):
        rho = QF(Fraction(1, 2), Fraction(1, 2), 3)
        p = ProjPoint(rho, QF(1, 0, 3), 3)
        # unit coordinate: height 0
        assert naive_height(p).value == pytest.approx(0.0, abs=1e-14)

    def test_huge_coordinates(self):
        n = 7**500
        h = naive_height(pt(n, 1)).value
        assert h == pytest.approx(500 * math.log(7), rel=1e-12)


class TestByPlaces:
    @pytest.mark.parametrize(
        "x,y,expect",
        [(6, 4, math.log(3)), (1, 0, 0.0), (10, 1, math.log(10)),
         (12, 18, math.log(3)), (-9, 6, math.log(3))],
    )
    def test_oracle_values(self, x, y, expect):
        assert naive_height_by_places(pt(x, y)).value == pytest.approx(
            expect, abs=1e-12
        )

    def test_matches_reducing_route(self):
        for x, y in [(6, 4), (100, 64), (81, 24), (7, 13), (0, 5)]:
            a = naive_height_by_places(pt(x, y)).value
            b = naive_height(pt(x, y)).value
            assert abs(a - b) <= 1e-12

    def test_rejects_non_rational(self):
        with pytest.raises(DomainError):
            naive_height_by_places(ProjPoint(QF(1, 1, 1), QF(1, 0, 1), 1))

    def test_place_decomposition(self):
        places = place_decomposition(pt(6, 4))
        kinds = [p.kind for p, _ in places]
        assert kinds[0] == "archimedean"
        assert {p.prime for p, _ in places[1:]} == {2}
        assert sum(v for _, v in places) == pytest.approx(math.log(3), abs=1e-12)

    def test_place_validation(self):
        with pytest.raises(DomainError):
            Place("finite")
        with pytest.raises(DomainError):
            Place("nowhere")


class TestHeightValue:
    def test_nonnegative(self):
        with pytest.raises(DomainError):
            HeightValue(-0.5, 3, 0.0)
        with pytest.raises(DomainError):
            HeightValue(0.5, 3, -1.0)


class TestPowerMaps:
    def test_square_map_equals_naive(self):
        sq = rmap([0, 0, 1], [1])
        for x, y in [(2, 1), (3, 2), (7, 5), (1, 1), (100, 9)]:
            hv = canonical_height(sq, pt(x, y), 1e-9)
            assert abs(hv.value - naive_height(pt(x, y)).value) <= 1e-9

    def test_cube_and_fifth_power(self):
        for k in (3, 5):
            phi = rmap([0] * k + [1], [1])
            for x, y in [(2, 1), (5, 3)]:
                hv = canonical_height(phi, pt(x, y), 1e-9)
                assert abs(hv.value - naive_height(pt(x, y)).value) <= 1e-9

    def test_constants_are_zero(self):
        sq = rmap([0, 0, 1], [1])
        c = height_constants(sq)
        assert c["c_upper"] == 0.0
        assert c["c_lower"] == 0.0
        assert c["resultant_norm"] == 1
        assert c["bad_primes"] == []


class TestPreperiodicCancellation:
    """Preperiodic points force the finite sum to cancel the archimedean
    part exactly; the two sides come from unrelated machinery."""

    def test_doubling_at_zero_and_infinity(self):
        dbl = lattes_double(curve_E1())
        assert canonical_height(dbl, pt(0, 1, 1), 1e-10).value == 0.0
        assert canonical_height(dbl, ProjPoint.infinity(1), 1e-10).value == 0.0

    def test_doubling_at_one(self):
        # 1 -> 0 -> infinity: ramified prime 2 carries all the content
        dbl = lattes_double(curve_E1())
        hv = canonical_height(dbl, pt(1, 1, 1), 1e-10)
        assert hv.value <= hv.error_bound

    def test_sqrt3_at_minus_one(self):
        # fixed 2-torsion image; prime 3 ramifies in the hexagonal order
        phi = catalog("phi_sqrt-3")
        hv = canonical_height(phi, pt(-1, 1, 3), 1e-10)
        assert hv.value <= hv.error_bound

    def test_degree5_fixed_point_at_i(self):
        # phi_1+2i fixes i; primes 2 and 5 (split) both appear
        phi = catalog("phi_1+2i")
        hv = canonical_height(phi, ProjPoint(QF(0, 1, 1), QF(1, 0, 1), 1), 1e-10)
        assert hv.value <= hv.error_bound

    def test_inert_prime_preperiodic(self):
        # (z^2 - 9)/(3z) over the Gaussian field: 3 is inert; the orbit
        # 3 -> 0 -> infinity is preperiodic
        phi = rmap([-9, 0, 1], [0, 3], d=1)
        hv = canonical_height(phi, pt(3, 1, 1), 1e-10)
        assert hv.value <= hv.error_bound

    def test_split_prime_preperiodic(self):
        # (z^2 - 49)/(7z) over the Eisenstein field: 7 splits; orbit
        # 7 -> 0 -> infinity
        phi = rmap([-49, 0, 1], [0, 7], d=3)
        hv = canonical_height(phi, pt(7, 1, 3), 1e-10)
        assert hv.value <= hv.error_bound

    def test_order_six_torsion_on_E2(self):
        assert neron_tate(curve_E2(), 2, 1e-9).value <= 1e-9


class TestCanonicalGeneric:
    def test_against_raw_tate_oracle(self):
        dbl = lattes_double(curve_E1())
        hv = canonical_height(dbl, pt(2, 1, 1), 1e-10)
        raw = tate_limit_raw(dbl, pt(2, 1, 1), 6)
        c = height_constants(dbl)
        c_raw = max(c["c_upper"], c["c_lower"] + 0.5 * math.log(c["resultant_norm"]))
        tail = c_raw / (4**6 * 3)
        assert abs(hv.value - raw[-1]) <= tail + hv.error_bound

    def test_raw_oracle_hexagonal(self):
        phi = catalog("phi_sqrt-3")
        hv = canonical_height(phi, pt(2, 1, 3), 1e-10)
        raw = tate_limit_raw(phi, pt(2, 1, 3), 7)
        c = height_constants(phi)
        c_raw = max(c["c_upper"], c["c_lower"] + 0.5 * math.log(c["resultant_norm"]))
        tail = c_raw / (3**7 * 2)
        assert abs(hv.value - raw[-1]) <= tail + hv.error_bound

    def test_functional_equation(self):
        dbl = lattes_double(curve_E1())
        p = pt(2, 1, 1)
        image = dbl(p)
        h1 = canonical_height(dbl, image, 1e-10)
        h2 = canonical_height(dbl, p, 1e-10)
        assert abs(h1.value - 4 * h2.value) <= h1.error_bound + 4 * h2.error_bound + 1e-12

    def test_functional_equation_degree_5(self):
        phi = catalog("phi_1+2i")
        p = pt(2, 1, 1)
        h1 = canonical_height(phi, phi(p), 1e-9)
        h2 = canonical_height(phi, p, 1e-9)
        assert abs(h1.value - 5 * h2.value) <= h1.error_bound + 5 * h2.error_bound + 1e-12

    def test_commuting_maps_share_height(self):
        p = pt(2, 1, 1)
        h_dbl = canonical_height(lattes_double(curve_E1()), p, 1e-8)
        h_deg2 = canonical_height(catalog("phi_1+i"), p, 1e-8)
        h_conj = canonical_height(catalog("phi_1-i"), p, 1e-8)
        assert abs(h_dbl.value - h_deg2.value) <= 1e-6
        assert abs(h_deg2.value - h_conj.value) <= 1e-6

    def test_commuting_power_maps_share_height(self):
        p = pt(3, 2)
        h2 = canonical_height(rmap([0, 0, 1], [1]), p, 1e-9)
        h3 = canonical_height(rmap([0, 0, 0, 1], [1]), p, 1e-9)
        assert abs(h2.value - h3.value) <= 1e-9

    def test_hexagonal_commuting_pair(self):
        p = pt(2, 1, 3)
        ha = canonical_height(catalog("phi_sqrt-3"), p, 1e-8)
        hb = canonical_height(catalog("phi_sqrt-3*rho"), p, 1e-8)
        assert abs(ha.value - hb.value) <= 1e-6

    def test_rational_point_embeds(self):
        dbl = lattes_double(curve_E1())
        a = canonical_height(dbl, pt(2, 1), 1e-9).value
        b = canonical_height(dbl, pt(2, 1, 1), 1e-9).value
        assert a == b

    def test_error_bound_honored(self):
        dbl = lattes_double(curve_E1())
        hv = canonical_height(dbl, pt(5, 3, 1), 1e-6)
        assert hv.error_bound <= 1e-6
        hv2 = canonical_height(dbl, pt(5, 3, 1), 1e-10)
        assert abs(hv.value - hv2.value) <= 1e-6 + hv2.error_bound


class TestNeronTate:
    def test_two_torsion_vanishes(self):
        assert neron_tate(curve_E1(), 0).value == 0.0
        assert neron_tate(curve_E2(), -1, 1e-10).value <= 1e-10

    def test_independent_of_the_map(self):
        h_via_dbl = neron_tate(curve_E1(), 2, 1e-8)
        h_via_deg2 = canonical_height(catalog("phi_1+i"), pt(2, 1, 1), 1e-8)
        assert abs(h_via_dbl.value - h_via_deg2.value) <= 1e-6

    def test_nontorsion_positive(self):
        # x = 1/4 gives a non-torsion point on y^2 = x^3 + x
        hv = neron_tate(curve_E1(), Fraction(1, 4), 1e-8)
        assert hv.value > 0.01


class TestBudgetsAndErrors:
    def test_budget_exceeded_carries_partial(self):
        dbl = lattes_double(curve_E1())
        with pytest.raises(IterationBudgetError) as err:
            canonical_height(dbl, pt(2, 1, 1), 1e-300)
        partial = err.value.partial
        assert isinstance(partial, HeightValue)
        assert partial.value > 0

    def test_degree_one_rejected(self):
        with pytest.raises(DomainError):
            canonical_height(rmap([1, 1], [1]), pt(2, 1), 1e-9)

    def test_bad_target(self):
        with pytest.raises(DomainError):
            canonical_height(rmap([0, 0, 1], [1]), pt(2, 1), 0.0)

    def test_field_mismatch(self):
        dbl = lattes_double(curve_E1())
        with pytest.raises(DomainError):
            canonical_height(dbl, pt(1, 1, 3), 1e-9)
