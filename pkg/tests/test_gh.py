import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from corpora import certified_map, random_space
from wstab import families
from wstab.errors import TooLarge
from wstab.gh import (
    Correspondence,
    PointMap,
    best_approx_search,
    certify,
    correspondence_from_map,
    distortion,
    gh_distance_bruteforce,
    gh_lower_diameter,
    gh_upper_from_map,
    surjectivity_defect,
)
from wstab.metric import MetricPair, validate_metric


class TestDistortionDefect:
    def test_cycle_collapse(self, c4):
        c3 = families.ngon(3, 3.0)
        f = PointMap(c4, c3, (0, 1, 2, 0))
        assert distortion(f) == pytest.approx(1.0)
        assert surjectivity_defect(f) == 0

    def test_inclusion_defect(self, c4):
        sub = MetricPair(c4, (0, 2)).sub
        inc = PointMap(sub, c4, (0, 2))
        assert distortion(inc) == 0
        assert surjectivity_defect(inc) == 1

    def test_constant_map_on_two_points(self):
        x = families.two_point(1.0)
        f = PointMap(x, x, (0, 0))
        assert distortion(f) == 1 and surjectivity_defect(f) == 1
        cert = certify(f, 0.5)
        assert not cert.valid and cert.distortion == 1

    def test_identity(self, rng):
        x = random_space(rng, 5)
        assert distortion(PointMap.identity(x)) == 0
        assert surjectivity_defect(PointMap.identity(x)) == 0

    def test_against_loops(self, rng):
        for _ in range(100):
            f, _ = certified_map(rng)
            dx, dy = f.source.d.tolist(), f.target.d.tolist()
            assert distortion(f) == pytest.approx(oracles.distortion(dx, dy, f.image), abs=1e-12)
            assert surjectivity_defect(f) == pytest.approx(oracles.defect(dy, f.image), abs=1e-12)

    def test_map_validation(self, c4):
        with pytest.raises(ValueError):
            PointMap(c4, c4, (0, 1, 2))
        with pytest.raises(ValueError):
            PointMap(c4, c4, (0, 1, 2, 4))


class TestCertify:
    def test_examples(self, c4):
        c3 = families.ngon(3, 3.0)
        f = PointMap(c4, c3, (0, 1, 2, 0))
        assert certify(f, 1.0).valid
        assert not certify(f, 0.9).valid
        assert certify(f, 1.0 - 1e-9).valid  # within the certificate tolerance
        assert certify(f, 0.0).measured == 1.0

    def test_negative_epsilon(self, c4):
        with pytest.raises(ValueError):
            certify(PointMap.identity(c4), -0.1)

    def test_composition_adds_errors(self, rng):
        for _ in range(50):
            f, ef = certified_map(rng, 5)
            y = f.target
            z = random_space(rng, int(rng.integers(1, 5)))
            g = PointMap(y, z, rng.integers(0, z.n, size=y.n))
            eg = certify(g, 0.0).measured
            # distortions add; defect of the composite is at most defect(g) + eps_f + dis(g)
            h = f.then(g)
            assert distortion(h) <= ef + eg + 1e-9
            assert surjectivity_defect(h) <= 2 * eg + ef + 1e-9


class TestCorrespondence:
    def test_coverage_required(self, c4):
        x = families.two_point(1.0)
        with pytest.raises(ValueError):
            Correspondence(x, c4, frozenset({(0, 0), (1, 1)}))
        with pytest.raises(ValueError):
            Correspondence(c4, x, frozenset({(0, 0), (1, 1)}))

    def test_from_map_covers_target(self, rng):
        for _ in range(50):
            f, eps = certified_map(rng)
            r = correspondence_from_map(f)
            assert {j for _, j in r.relation} == set(range(f.target.n))
            # the added pairs cost at most twice the defect on top of the distortion
            assert r.distortion() <= distortion(f) + 2 * surjectivity_defect(f) + 1e-9
            assert gh_upper_from_map(f) == pytest.approx(r.distortion() / 2)


class TestExactGH:
    def test_examples(self):
        one, two = families.point(), families.two_point(1.0)
        assert gh_distance_bruteforce(one, one) == 0
        assert gh_distance_bruteforce(one, two) == pytest.approx(0.5)
        assert gh_distance_bruteforce(two, families.two_point(1.4)) == pytest.approx(0.2)

    def test_two_point_closed_form(self):
        for s in np.linspace(0.1, 3.0, 10):
            for t in np.linspace(0.1, 3.0, 10):
                v = gh_distance_bruteforce(families.two_point(s), families.two_point(t))
                assert v == pytest.approx(abs(s - t) / 2, abs=1e-12)

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 3))
    def test_matches_all_relations(self, seed, nx, ny):
        rng = np.random.default_rng(seed)
        x, y = random_space(rng, nx), random_space(rng, ny)
        expected = oracles.gh_all_relations(x.d.tolist(), y.d.tolist())
        assert gh_distance_bruteforce(x, y) == pytest.approx(expected, abs=1e-12)

    def test_sandwich_and_symmetry(self, rng):
        for _ in range(40):
            x, y = random_space(rng, int(rng.integers(1, 6))), random_space(rng, int(rng.integers(1, 6)))
            v = gh_distance_bruteforce(x, y)
            assert v == pytest.approx(gh_distance_bruteforce(y, x), abs=1e-12)
            assert gh_lower_diameter(x, y) <= v + 1e-12
            f, _ = best_approx_search(x, y)
            assert v <= gh_upper_from_map(f) + 1e-12

    def test_triangle_inequality(self, rng):
        for _ in range(40):
            a, b, c = (random_space(rng, int(rng.integers(1, 5))) for _ in range(3))
            ab, bc, ac = gh_distance_bruteforce(a, b), gh_distance_bruteforce(b, c), gh_distance_bruteforce(a, c)
            assert ac <= ab + bc + 1e-9

    def test_zero_on_relabelled_copies(self, rng):
        for _ in range(20):
            x = random_space(rng, 5)
            p = rng.permutation(5)
            y = validate_metric(x.d[np.ix_(p, p)])
            assert gh_distance_bruteforce(x, y) == pytest.approx(0.0, abs=1e-12)

    def test_bounded_by_one_and_a_half_eps(self, rng):
        worst = 0.0
        for _ in range(300):
            f, eps = certified_map(rng, 5)
            if eps == 0:
                continue
            v = gh_distance_bruteforce(f.source, f.target)
            worst = max(worst, v / eps)
            assert v <= 1.5 * eps + 1e-9
        assert worst <= 1.5

    def test_cap(self):
        with pytest.raises(TooLarge):
            gh_distance_bruteforce(families.ngon(6), families.point())


class TestSearch:
    def test_two_point_rescaling(self):
        f, cert = best_approx_search(families.two_point(1.0), families.two_point(1.2))
        assert cert.measured == pytest.approx(0.2)
        assert cert.valid

    def test_identical_spaces_give_a_zero_certificate(self, rng):
        x = random_space(rng, 4)
        _, cert = best_approx_search(x, x)
        assert cert.measured == 0

    def test_search_result_certifies_itself(self, rng):
        x, y = families.random_euclidean(rng, 5), families.random_euclidean(rng, 5)
        f, cert = best_approx_search(x, y)
        assert cert.valid and certify(f, cert.measured).valid
        assert gh_lower_diameter(x, y) <= gh_upper_from_map(f) + 1e-12

    def test_exhaustive_matches_loops(self, rng):
        for _ in range(60):
            x, y = random_space(rng, int(rng.integers(1, 5))), random_space(rng, int(rng.integers(1, 5)))
            f, cert = best_approx_search(x, y, mode="exhaustive")
            image, score = oracles.best_map_loops(x.d.tolist(), y.d.tolist())
            assert cert.measured == pytest.approx(score, abs=1e-12)
            assert f.image == image

    def test_heuristic_is_an_upper_bound(self, rng):
        for _ in range(40):
            x, y = random_space(rng, int(rng.integers(1, 6))), random_space(rng, int(rng.integers(1, 6)))
            _, exact = best_approx_search(x, y, mode="exhaustive")
            _, approx = best_approx_search(x, y, mode="heuristic")
            assert approx.measured >= exact.measured - 1e-12
            assert approx.valid

    def test_heuristic_never_worse_than_candidate(self, rng):
        y = families.ngon(16)
        x = families.ngon(8)
        inclusion = PointMap(x, y, tuple(2 * i for i in range(8)))
        _, cert = best_approx_search(x, y, mode="heuristic", candidates=[inclusion])
        assert cert.measured <= certify(inclusion, 0.0).measured + 1e-12
        assert cert.measured == pytest.approx(2 * math.pi / 16, abs=1e-9)
        assert gh_lower_diameter(x, y) == pytest.approx(0.0, abs=1e-12)  # both diameters are pi

    def test_cap_and_mode(self):
        x, y = families.ngon(8), families.ngon(8)
        with pytest.raises(TooLarge):
            best_approx_search(x, y, mode="exhaustive", cap=1000)
        with pytest.raises(ValueError):
            best_approx_search(x, y, mode="greedy")
