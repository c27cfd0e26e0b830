"""Local parameter classes, pair eigenvalues, coefficient positivity,
majorants, and pair-conductor bookkeeping."""

import math

import numpy as np
import pytest

from witnesskit.characters import primitive_characters
from witnesskit.core import ConstructionError, DomainError
from witnesskit.rankin_satake import (
    PairBoundVerdict,
    SatakeClass,
    SyntheticConductor,
    coefficient_majorant_check,
    conductor_pair_bound,
    dual_class,
    family_from_csv,
    family_to_csv,
    gl1_conductor,
    gl1_pair_conductor,
    rb_of,
    rs_coefficients,
    rs_local_eigenvalues,
    sample_classes,
    schur_positivity_check,
    self_dual_eigenvalues,
)


def sorted_c(values):
    return sorted(values, key=lambda z: (round(z.real, 12), round(z.imag, 12)))


class TestSatakeClass:
    def test_rb_examples(self):
        assert SatakeClass(7, (np.exp(0.83j),)).rb == pytest.approx(0.0, abs=1e-15)
        shifted = SatakeClass(4, (4 ** 0.1 * np.exp(0.3j),))
        assert shifted.rb == pytest.approx(0.1)
        mixed = [SatakeClass(2, (1 + 0j,)), SatakeClass(2, (2 ** 0.07 + 0j,))]
        assert rb_of(mixed) == pytest.approx(0.07)
        # the downward direction counts too
        assert SatakeClass(2, (2 ** -0.3 + 0j,)).rb == pytest.approx(0.3)

    def test_validation(self):
        with pytest.raises(ConstructionError):
            SatakeClass(6, (1 + 0j,))   # not a prime power
        with pytest.raises(ConstructionError):
            SatakeClass(1, (1 + 0j,))
        with pytest.raises(ConstructionError):
            SatakeClass(5, ())
        with pytest.raises(ConstructionError):
            SatakeClass(5, (1 + 0j, 0j))

    def test_rb_of_empty_rejected(self):
        with pytest.raises(DomainError):
            rb_of([])

    def test_dual_conjugates(self):
        sigma = SatakeClass(3, (0.5 + 0.5j, 2j))
        assert dual_class(sigma).params == (0.5 - 0.5j, -2j)


class TestPairEigenvalues:
    def test_degree_one_self_dual_is_one(self):
        for theta in (0.0, 0.83, 2.4, -1.1):
            sigma = SatakeClass(7, (np.exp(1j * theta),))
            (eig,) = self_dual_eigenvalues(sigma)
            assert abs(eig - 1) < 1e-15

    def test_degree_two_signed_pair(self):
        sigma = SatakeClass(3, (1j, -1j))
        eigs = sorted_c(self_dual_eigenvalues(sigma))
        assert eigs == [-1, -1, 1, 1]

    def test_degree_two_ones(self):
        sigma = SatakeClass(3, (1 + 0j, 1 + 0j))
        assert self_dual_eigenvalues(sigma) == (1, 1, 1, 1)

    def test_cross_degrees(self):
        a = SatakeClass(5, (2 + 0j,))
        b = SatakeClass(5, (1j, 3 + 0j))
        assert rs_local_eigenvalues(a, b) == (2j, 6 + 0j)

    def test_residue_mismatch_rejected(self):
        with pytest.raises(DomainError):
            rs_local_eigenvalues(SatakeClass(3, (1 + 0j,)),
                                 SatakeClass(9, (1 + 0j,)))


def brute_coefficients(eigs, M):
    """Independent oracle: multiply the truncated geometric series."""
    out = np.zeros(M + 1, dtype=np.complex128)
    out[0] = 1.0
    for e in eigs:
        factor = np.asarray([complex(e) ** k for k in range(M + 1)])
        out = np.convolve(out, factor)[:M + 1]
    return out


class TestCoefficients:
    def test_four_ones(self):
        h = rs_coefficients((1, 1, 1, 1), 2)
        assert h[0] == 1 and h[1] == 4 and h[2] == 10  # C(5, 2)

    def test_signed_pair_expansion(self):
        h = rs_coefficients((1, -1, -1, 1), 4)
        assert np.allclose(h, [1, 0, 2, 0, 3])  # (1 - X^2)^(-2)

    def test_against_convolution_oracle(self):
        rng = np.random.default_rng(404)
        for d in (1, 2, 3, 4):
            sigma = sample_classes(rng, 1, d)[0]
            eigs = self_dual_eigenvalues(sigma)
            got = rs_coefficients(eigs, 8)
            assert np.allclose(got, brute_coefficients(eigs, 8), atol=1e-10)

    def test_self_dual_coefficients_are_real(self):
        rng = np.random.default_rng(77)
        worst = 0.0
        for sigma in sample_classes(rng, 50, 3, max_shift=0.3):
            h = rs_coefficients(self_dual_eigenvalues(sigma), 12)
            worst = max(worst, float(np.max(np.abs(h.imag))))
        assert worst < 1e-12

    def test_first_coefficient_is_square_of_trace(self):
        rng = np.random.default_rng(31)
        for d in (1, 2, 3, 4):
            for sigma in sample_classes(rng, 25, d):
                h = rs_coefficients(self_dual_eigenvalues(sigma), 1)
                trace = sum(sigma.params)
                assert h[1].real == pytest.approx(abs(trace) ** 2, abs=1e-12)

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            rs_coefficients((1,), 0)
        with pytest.raises(DomainError):
            rs_coefficients((), 3)


class TestSchurPositivity:
    def test_degree_one_exact(self):
        res = schur_positivity_check(SatakeClass(2, (np.exp(2.1j),)))
        assert res.a_qd == pytest.approx(1.0) and res.passed

    def test_signed_pair(self):
        res = schur_positivity_check(SatakeClass(3, (1j, -1j)))
        assert res.a_qd == pytest.approx(2.0) and res.passed

    def test_random_unit_modulus(self):
        rng = np.random.default_rng(2026)
        for d in (1, 2, 3, 4):
            for sigma in sample_classes(rng, 250, d):
                res = schur_positivity_check(sigma)
                assert res.passed, (sigma, res)

    def test_random_shifted_pairs(self):
        rng = np.random.default_rng(515)
        fam = sample_classes(rng, 250, 4, max_shift=0.4)
        assert rb_of(fam) <= 0.4
        assert all(schur_positivity_check(s).passed for s in fam)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(909)
        for sigma in sample_classes(rng, 40, 3):
            eigs = self_dual_eigenvalues(sigma)
            oracle = brute_coefficients(eigs, 3)[3].real
            assert schur_positivity_check(sigma).a_qd == pytest.approx(
                oracle, abs=1e-10)


class TestMajorant:
    def test_geometric_equality_case(self):
        # d=1, R=0, H=1, q=2: both sides are exactly 4/3
        assert coefficient_majorant_check([SatakeClass(2, (1 + 0j,))], 1.0, 0.0)

    def test_strict_case_degree_two(self):
        assert coefficient_majorant_check(
            [SatakeClass(2, (1 + 0j, 1 + 0j))], 1.0, 0.0)

    def test_empty_family(self):
        assert coefficient_majorant_check([], 0.5, 0.0) is True

    def test_mixed_family_with_shifts(self):
        rng = np.random.default_rng(8)
        fam = sample_classes(rng, 30, 2, max_shift=0.2)
        assert coefficient_majorant_check(fam, 0.5, 0.2)

    def test_rb_above_declared_R_rejected(self):
        sigma = SatakeClass(2, (2 ** 0.3 + 0j,))
        with pytest.raises(DomainError):
            coefficient_majorant_check([sigma], 1.0, 0.1)

    def test_nonpositive_H_rejected(self):
        with pytest.raises(DomainError):
            coefficient_majorant_check([], 0.0, 0.0)


class TestConductors:
    def test_extended_product(self):
        sc = SyntheticConductor(12, (0j, 1 + 1j))
        assert sc.extended_C == pytest.approx(12 * (1 + abs(1 + 1j)))
        assert sc.extended_C >= sc.level_N

    def test_validation(self):
        with pytest.raises(ConstructionError):
            SyntheticConductor(0, ())
        with pytest.raises(ConstructionError):
            SyntheticConductor(4, (-0.5 + 0j,))

    def test_gl1_levels_and_parity(self):
        chi4 = primitive_characters(4)[0]
        c = gl1_conductor(chi4)
        assert c.level_N == 4 and c.extended_C == pytest.approx(8.0)  # odd
        chi8 = [c for c in primitive_characters(8) if c.parity_b == 0][0]
        assert gl1_conductor(chi8).extended_C == pytest.approx(8.0)  # even

    def test_small_pair_example(self):
        chi4 = primitive_characters(4)[0]
        chi3 = primitive_characters(3)[0]
        pair = gl1_pair_conductor(chi4, chi3)
        assert pair.level_N == 12
        verdict = conductor_pair_bound(gl1_conductor(chi4), gl1_conductor(chi3),
                                       pair, 1, 1, 1)
        assert verdict.level_ok and verdict.level_bound == 12
        assert verdict.passed

    def test_self_pair_collapses(self):
        chi4 = primitive_characters(4)[0]
        pair = gl1_pair_conductor(chi4, chi4.conjugate())
        assert pair.level_N == 1
        assert conductor_pair_bound(gl1_conductor(chi4), gl1_conductor(chi4),
                                    pair, 1, 1, 1).passed

    def test_inflated_level_fails(self):
        chi4 = primitive_characters(4)[0]
        chi3 = primitive_characters(3)[0]
        bad = SyntheticConductor(10 * 4 * 3, (0j,))
        verdict = conductor_pair_bound(gl1_conductor(chi4), gl1_conductor(chi3),
                                       bad, 1, 1, 1)
        assert not verdict.level_ok and not verdict.passed
        assert isinstance(verdict, PairBoundVerdict)

    def test_exhaustive_small_conductor_pairs(self):
        chars = [chi for f in range(3, 25) for chi in primitive_characters(f)]
        for chi in chars:
            a = gl1_conductor(chi)
            for psi in chars:
                pair = gl1_pair_conductor(chi, psi)
                assert conductor_pair_bound(a, gl1_conductor(psi), pair,
                                            1, 1, 1).passed


class TestSampling:
    def test_deterministic_given_seed(self):
        fam1 = sample_classes(np.random.default_rng(99), 20, 3, max_shift=0.1)
        fam2 = sample_classes(np.random.default_rng(99), 20, 3, max_shift=0.1)
        assert all(a == b for a, b in zip(fam1, fam2))

    def test_unit_modulus_default(self):
        fam = sample_classes(np.random.default_rng(1), 50, 2)
        assert rb_of(fam) < 1e-12

    def test_shift_bound_respected(self):
        fam = sample_classes(np.random.default_rng(2), 50, 2, max_shift=0.25)
        assert 0 < rb_of(fam) <= 0.25

    def test_validation(self):
        rng = np.random.default_rng(3)
        with pytest.raises(DomainError):
            sample_classes(rng, -1, 2)
        with pytest.raises(DomainError):
            sample_classes(rng, 5, 0)
        with pytest.raises(DomainError):
            sample_classes(rng, 5, 2, max_shift=0.5)


class TestCsvRoundTrip:
    def test_round_trip(self, tmp_path):
        fam = sample_classes(np.random.default_rng(7), 9, 3, max_shift=0.3)
        path = tmp_path / "family.csv"
        family_to_csv(fam, path)
        back = family_from_csv(path)
        assert len(back) == len(fam)
        for a, b in zip(fam, back):
            assert a.residue_q == b.residue_q and a.params == b.params

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.csv"
        path.write_text("alpha,beta\n1,2\n")
        with pytest.raises(DomainError):
            family_from_csv(path)

    def test_rejects_truncated_row(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text("q,d,re_im_pairs\n5,2,1.0,0.0\n")
        with pytest.raises(DomainError):
            family_from_csv(path)
