"""Solver, Schwarzian, embedding, and welding tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from utkit._bipoly import BiPoly, eval_principal
from utkit.errors import (
    CriticalPoint,
    DomainMismatch,
    FitFailure,
    NoConvergence,
    NormTooLarge,
    TruncationExceeded,
)
from utkit.geometry import Domain, MoebiusMap
from utkit.qc_solver import (
    QCMap,
    _run_series,
    _taylor_from_tail,
    bers_embedding,
    beurling_transform,
    cauchy_transform,
    schwarzian,
    solve_beltrami,
    welding_decompose,
)
from utkit.quadrature import GridFunction, QuadRule
from utkit.series import BeltramiField, HoloCoeffs, lambda_map

RNG = np.random.default_rng(np.random.PCG64(20240820))

A2_UNIT = 1.0 / math.sqrt(12.0 * math.pi)  # storage coefficient of the first basis field


def harmonic(a):
    return BeltramiField.harmonic(Domain.EXTERIOR_DISK, a)


def wirtinger_fd(f, z, h=1e-5):
    # sixth order central stencils for both Wirtinger derivatives
    st6 = ((-3, -1.0), (-2, 9.0), (-1, -45.0), (1, 45.0), (2, -9.0), (3, 1.0))
    dx = sum(w * f(z + k * h) for k, w in st6) / (60.0 * h)
    dy = sum(w * f(z + 1j * k * h) for k, w in st6) / (60.0 * h)
    return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)


class TestCauchyTransform:
    def test_zero_density(self):
        rule = QuadRule(16, 32)
        zero = GridFunction.from_callable(np.zeros_like, rule, Domain.UNIT_DISK)
        assert cauchy_transform(zero, 0.3 + 0.1j) == 0.0

    def test_constant_density(self):
        rule = QuadRule(32, 64)
        one = GridFunction.from_callable(np.ones_like, rule, Domain.UNIT_DISK)
        for z in (0.3 + 0.2j, -0.55 + 0.41j, 0.05j):
            assert cauchy_transform(one, z) == pytest.approx(np.conj(z), abs=2e-4)
        z = 1.7 - 0.4j
        assert cauchy_transform(one, z) == pytest.approx(1.0 / z, abs=1e-12)

    def test_antiholomorphic_density(self):
        rule = QuadRule(32, 64)
        zb = GridFunction.from_callable(np.conj, rule, Domain.UNIT_DISK)
        z = -0.4 + 0.33j
        assert cauchy_transform(zb, z) == pytest.approx(np.conj(z) ** 2 / 2, abs=2e-4)
        z = 2.1 + 0.6j
        assert cauchy_transform(zb, z) == pytest.approx(0.5 / z**2, abs=1e-12)

    def test_linearity(self):
        rule = QuadRule(16, 32)
        f = GridFunction.from_callable(lambda z: z**2, rule, Domain.UNIT_DISK)
        g = GridFunction.from_callable(np.conj, rule, Domain.UNIT_DISK)
        combo = GridFunction(rule, Domain.UNIT_DISK, 2.0 * f.values - 1j * g.values)
        z = 0.25 - 0.6j
        lhs = cauchy_transform(combo, z)
        rhs = 2.0 * cauchy_transform(f, z) - 1j * cauchy_transform(g, z)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_rejects_exterior_samples(self):
        rule = QuadRule(12, 24)
        gf = GridFunction.from_callable(np.ones_like, rule, Domain.EXTERIOR_DISK)
        with pytest.raises(DomainMismatch):
            cauchy_transform(gf, 1.5 + 0j)


class TestBeurlingTransform:
    def test_constant(self):
        rule = QuadRule(16, 32)
        one = GridFunction.from_callable(np.ones_like, rule, Domain.UNIT_DISK)
        assert beurling_transform(one, 0.4 - 0.2j) == pytest.approx(0.0, abs=1e-10)
        z = 1.9 + 0.3j
        assert beurling_transform(one, z) == pytest.approx(-1.0 / z**2, rel=1e-10)

    def test_mixed_monomial(self):
        # density z zbar has transform zbar^2/2 inside, -1/(2 z^2) outside
        rule = QuadRule(24, 48)
        gf = GridFunction.from_callable(lambda z: z * np.conj(z), rule,
                                        Domain.UNIT_DISK)
        z = 0.3 + 0.1j
        assert beurling_transform(gf, z) == pytest.approx(np.conj(z) ** 2 / 2,
                                                          rel=1e-8)
        z = 1.6 - 0.7j
        assert beurling_transform(gf, z) == pytest.approx(-0.5 / z**2, rel=1e-8)

    def test_matches_derivative_of_cauchy(self):
        # H must be the z-derivative of the closed-form transform at 50
        # random points, interior and exterior alike
        bp = (BiPoly.from_term(1.3 - 0.4j, 2, 1)
              + BiPoly.from_term(0.7j, 0, 3)
              + BiPoly.from_term(-0.5, 1, 0)
              + BiPoly.from_term(0.4, 3, 2)
              + BiPoly.from_term(0.2, 1, -1))
        interior, _ = bp.cauchy()
        rng = np.random.default_rng(41)
        pts_in = (0.45 + 0.45 * rng.random(45)) * np.exp(2j * np.pi * rng.random(45))
        pts_out = (1.5 + rng.random(5)) * np.exp(2j * np.pi * rng.random(5))
        for z in pts_in:
            fd, _ = wirtinger_fd(interior.eval, complex(z), h=0.01)
            val = beurling_transform(bp, z)
            assert abs(val - fd) <= 1e-8 * (1.0 + abs(val))
        _, tail = bp.cauchy()
        for z in pts_out:
            got = beurling_transform(bp, z)
            fd, _ = wirtinger_fd(lambda w: eval_principal(tail, w), complex(z),
                                 h=0.01)
            assert abs(got - fd) <= 1e-8 * (1.0 + abs(got))

    def test_rough_density_rejected(self):
        rule = QuadRule(16, 32)
        gf = GridFunction.from_callable(lambda z: np.exp(2.0 * z.real), rule,
                                        Domain.UNIT_DISK)
        with pytest.raises(TruncationExceeded):
            beurling_transform(gf, 0.2 + 0j, degrees=(2, 2), tol=1e-10)


class TestSolveBeltrami:
    def test_zero_dilatation_gives_identity(self):
        qc = solve_beltrami(harmonic([0.0]), "ModelB", 1e-8, rule=QuadRule(16, 32))
        assert qc.seriesTermCount == 0
        assert qc.residualNorm == 0.0
        for gf in qc.grid:
            assert np.max(np.abs(gf.values - gf.nodes())) < 1e-12

    def test_radial_exact_solution(self):
        # k z/zbar outside the circle maps to z |z|^(2 alpha), alpha = k/(1-k)
        k = 0.2
        rule = QuadRule(64, 128)
        ext = rule.nodes(Domain.EXTERIOR_DISK)
        mu = BeltramiField.sampled(
            GridFunction(rule, Domain.EXTERIOR_DISK, k * ext / np.conj(ext)))
        qc = solve_beltrami(mu, "ModelB", 1e-8, rule=rule)
        assert qc.residualNorm < 1e-8
        alpha = k / (1.0 - k)
        rng = np.random.default_rng(11)
        pts = (1.0 + 2.0 * rng.random(200)) * np.exp(2j * np.pi * rng.random(200))
        exact = pts * np.abs(pts) ** (2.0 * alpha)
        assert np.max(np.abs(qc.evaluate(pts) - exact)) < 1e-4
        for name in ("w(0)", "w'(0)-1", "w''(0)"):
            assert qc.normalizationChecks[name] < 1e-8
        # geometric decay of the series terms
        assert qc.decayRatios
        assert max(qc.decayRatios) < min(0.95, 4.0 * k)

    def test_harmonic_model_b(self):
        mu = harmonic([0.12 * A2_UNIT * 1j, 0.0, 0.06 * A2_UNIT])
        qc = solve_beltrami(mu, "ModelB", 1e-9, rule=QuadRule(24, 48))
        assert qc.residualNorm <= 1e-9
        for name in ("w(0)", "w'(0)-1", "w''(0)"):
            assert qc.normalizationChecks[name] < 1e-8
        # independent residual check away from the series identity
        z = 1.5 + 0.5j
        wz, wzb = wirtinger_fd(qc.evaluate, z)
        assert abs(wzb - mu(np.asarray(z)) * wz) < 1e-6

    def test_norm_cap(self):
        with pytest.raises(NormTooLarge):
            solve_beltrami(harmonic([1.0]), "ModelB", 1e-8)

    def test_term_budget(self):
        rule = QuadRule(16, 32)
        ext = rule.nodes(Domain.EXTERIOR_DISK)
        mu = BeltramiField.sampled(
            GridFunction(rule, Domain.EXTERIOR_DISK, 0.2 * ext / np.conj(ext)))
        with pytest.raises(NoConvergence):
            solve_beltrami(mu, "ModelB", 1e-8, rule=rule, max_terms=2)

    def test_contraction_guard(self):
        # a density far larger than the claimed sup must trip the ratio cap
        nu = BiPoly.from_term(0.8, 1, 1) + BiPoly.from_term(0.5, 2, 0)
        nodes = QuadRule(8, 16).nodes(Domain.EXTERIOR_DISK)
        with pytest.raises(NoConvergence):
            _run_series(nu, 0.01, 1e-12, nodes, nodes, 50)

    def test_domain_checked(self):
        mu = BeltramiField.harmonic(Domain.UNIT_DISK, [0.01])
        with pytest.raises(DomainMismatch):
            solve_beltrami(mu, "ModelB", 1e-8, rule=QuadRule(12, 24))

    def test_unknown_normalization(self):
        with pytest.raises(ValueError):
            solve_beltrami(harmonic([0.01]), "ModelC", 1e-8)

    def test_model_a_normalization(self):
        mu = harmonic([0.1 * A2_UNIT])
        qc = solve_beltrami(mu, "ModelA", 1e-9, rule=QuadRule(32, 64))
        for name in ("w(-1)+1", "w(-i)+i", "w(1)-1"):
            assert qc.normalizationChecks[name] < 1e-8
        assert qc.residualNorm < 1e-9

    def test_model_a_reflection_symmetry(self):
        mu = harmonic([0.08 * A2_UNIT, 0.05 * A2_UNIT * 1j])
        qc = solve_beltrami(mu, "ModelA", 1e-9, rule=QuadRule(24, 48))
        rng = np.random.default_rng(5)
        z = (1.1 + rng.random(40)) * np.exp(2j * np.pi * rng.random(40))
        dev = 1.0 / qc.evaluate(z) - np.conj(qc.evaluate(1.0 / np.conj(z)))
        assert np.max(np.abs(dev)) < 1e-6

    def test_model_a_harmonic_fixes_origin(self):
        qc = solve_beltrami(harmonic([0.1 * A2_UNIT]), "ModelA", 1e-9,
                            rule=QuadRule(24, 48))
        assert abs(qc.evaluate(0.0)) < 1e-8

    def test_model_a_origin_moves_otherwise(self):
        # a non-harmonic dilatation shifts the image of the origin
        rule = QuadRule(24, 48)
        ext = rule.nodes(Domain.EXTERIOR_DISK)
        mu = BeltramiField.sampled(
            GridFunction(rule, Domain.EXTERIOR_DISK, 0.3 * ext / np.conj(ext) ** 2))
        qc = solve_beltrami(mu, "ModelA", 1e-8, rule=rule)
        assert abs(qc.evaluate(0.0)) > 0.1

    def test_invert_round_trip(self):
        qc = solve_beltrami(harmonic([0.1 * A2_UNIT]), "ModelB", 1e-9,
                            rule=QuadRule(24, 48))
        for z0 in (1.4 + 0.3j, 0.5 - 0.2j, -2.0 + 1.0j):
            assert qc.invert(qc.evaluate(z0)) == pytest.approx(z0, abs=1e-10)

    @pytest.mark.parametrize("normalization,z0", [
        ("ModelB", 1.7 - 0.6j),
        ("ModelB", 0.45 + 0.25j),
        ("ModelA", 1.7 - 0.6j),
        ("ModelA", 0.45 + 0.25j),
    ])
    def test_derivatives_match_finite_differences(self, normalization, z0):
        mu = harmonic([0.1 * A2_UNIT, 0.04 * A2_UNIT])
        qc = solve_beltrami(mu, normalization, 1e-9, rule=QuadRule(24, 48))
        fd_z, fd_zb = wirtinger_fd(qc.evaluate, z0)
        wz, wzb = qc.derivatives(z0)
        assert abs(wz - fd_z) < 1e-8
        assert abs(wzb - fd_zb) < 1e-8

    @settings(max_examples=10, deadline=None, derandomize=True)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_jets_hold_for_random_harmonic_fields(self, seed):
        rng = np.random.default_rng(seed)
        a = (rng.normal(size=3) + 1j * rng.normal(size=3)) * 0.03 * A2_UNIT
        mu = harmonic(a)
        qc = solve_beltrami(mu, "ModelB", 1e-8, rule=QuadRule(12, 24))
        assert qc.residualNorm <= 1e-8
        for name in ("w(0)", "w'(0)-1", "w''(0)"):
            assert qc.normalizationChecks[name] < 1e-8
        # harmonic data keeps the inverted solution pinned at the origin
        assert abs(qc._series.interior.eval(0.0)) < 1e-12


class TestSchwarzian:
    def test_square(self):
        f = HoloCoeffs(Domain.UNIT_DISK, [0.0, 0.0, 1.0])
        assert schwarzian(f, 1.0) == pytest.approx(-1.5, rel=1e-12)

    def test_critical_point(self):
        f = HoloCoeffs(Domain.UNIT_DISK, [0.0, 0.0, 1.0])
        with pytest.raises(CriticalPoint):
            schwarzian(f, 0.0)

    def test_moebius_annihilated(self):
        m = MoebiusMap(complex(math.sqrt(1.04)), 0.2 + 0j)
        co = np.zeros(60, dtype=complex)
        num = np.zeros(60, dtype=complex)
        den = np.zeros(60, dtype=complex)
        num[0], num[1] = m.b, m.a
        den[0], den[1] = np.conj(m.a), np.conj(m.b)
        for k in range(60):
            acc = num[k] - (np.dot(den[1:k + 1], co[k - 1::-1]) if k else 0.0)
            co[k] = acc / den[0]
        for z in (0.0, 0.4, -0.3 + 0.5j):
            assert abs(schwarzian(HoloCoeffs(Domain.UNIT_DISK, co), z)) < 1e-12

    def test_cocycle_on_grid_samples(self):
        # postcomposing with a Moebius map leaves the Schwarzian alone
        f = HoloCoeffs(Domain.UNIT_DISK, [0.0, 1.0, 0.0, 0.05])
        m = MoebiusMap(complex(math.sqrt(1.04)), 0.2 + 0j)
        gf = GridFunction.from_callable(lambda z: m.apply(f(z)),
                                        QuadRule(24, 64), Domain.UNIT_DISK)
        z = 0.3 + 0.1j
        assert schwarzian(gf, z) == pytest.approx(schwarzian(f, z), rel=1e-10)

    def test_input_type_checked(self):
        with pytest.raises(TypeError):
            schwarzian(lambda z: z, 0.1)


class TestBersEmbedding:
    def test_zero_field(self):
        out = bers_embedding(harmonic([0.0]), truncation=10)
        assert np.max(np.abs(out.coeffs)) == 0.0

    def test_radial_maps_to_origin(self):
        rule = QuadRule(24, 48)
        ext = rule.nodes(Domain.EXTERIOR_DISK)
        mu = BeltramiField.sampled(
            GridFunction(rule, Domain.EXTERIOR_DISK, 0.2 * ext / np.conj(ext)))
        out = bers_embedding(mu, truncation=10, rule=rule)
        assert np.max(np.abs(out.coeffs)) < 1e-8

    @pytest.mark.parametrize("seed", [7, 19])
    def test_weighted_section_inverts(self, seed):
        # the harmonic field built from phi embeds back onto phi
        rng = np.random.default_rng(seed)
        c = rng.normal(size=4) + 1j * rng.normal(size=4)
        phi = HoloCoeffs(Domain.UNIT_DISK, c)
        phi = HoloCoeffs(Domain.UNIT_DISK, c * (0.45 / phi.sup_norm()))
        out = bers_embedding(lambda_map(phi), truncation=30)
        diff = out.coeffs.copy()
        diff[:phi.coeffs.size] -= phi.coeffs
        assert HoloCoeffs(Domain.UNIT_DISK, diff).sup_norm() < 1e-3


class TestWelding:
    def test_identity(self):
        qc = solve_beltrami(harmonic([0.0]), "ModelA", 1e-8, rule=QuadRule(16, 32))
        wd = welding_decompose(qc, truncation=8)
        assert wd.capacity == pytest.approx(1.0, abs=1e-12)
        assert wd.potentialK == pytest.approx(0.0, abs=1e-12)
        assert wd.fCoeffs[0] == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(wd.fCoeffs[1:])) < 1e-12
        assert np.max(np.abs(wd.gCoeffs[1:])) < 1e-10

    def test_area_identity(self):
        qc = solve_beltrami(harmonic([0.1 * A2_UNIT]), "ModelA", 1e-10,
                            rule=QuadRule(32, 64))
        wd = welding_decompose(qc, truncation=32)
        assert abs(wd.area_residual()) < 1e-3
        # capacity is pinned by the leading exterior-map coefficient
        assert wd.capacity == pytest.approx(1.0 / qc._dress["phi"][0], abs=1e-8)

    def test_needs_symmetric_normalization(self):
        qc = solve_beltrami(harmonic([0.05 * A2_UNIT]), "ModelB", 1e-8,
                            rule=QuadRule(16, 32))
        with pytest.raises(ValueError):
            welding_decompose(qc)

    def test_unreachable_tolerance(self):
        qc = solve_beltrami(harmonic([0.1 * A2_UNIT]), "ModelA", 1e-9,
                            rule=QuadRule(24, 48))
        with pytest.raises(FitFailure):
            welding_decompose(qc, truncation=32, tol=1e-18)

    def test_interior_series_linearizes(self):
        # at small t the cubic coefficient of f recovers the storage value
        t = 1e-2
        qc = solve_beltrami(harmonic([t * A2_UNIT]), "ModelA", 1e-11,
                            rule=QuadRule(24, 48))
        wd = welding_decompose(qc, truncation=16)
        assert wd.fCoeffs[2] == pytest.approx(t * A2_UNIT, rel=5e-2)

    def test_potential_flat_at_origin(self):
        # K(t) must scale quadratically, so doubling t quadruples it
        def pot(t):
            qc = solve_beltrami(harmonic([t * A2_UNIT]), "ModelA", 1e-10,
                                rule=QuadRule(24, 48))
            return welding_decompose(qc, truncation=24).potentialK

        ratio = pot(0.1) / pot(0.05)
        assert 3.5 < ratio < 4.5


def test_taylor_reciprocal_consistency():
    # the interior Taylor data must reproduce the evaluated map
    mu = harmonic([0.1 * A2_UNIT, 0.05 * A2_UNIT * 1j])
    qc = solve_beltrami(mu, "ModelB", 1e-11, rule=QuadRule(24, 48))
    a = _taylor_from_tail(qc._series.tail, 24)
    z = 0.3 * np.exp(2j * np.pi * np.arange(6) / 6)
    series = z * np.polynomial.polynomial.polyval(z, a)
    assert np.max(np.abs(series - qc.evaluate(z))) < 1e-10
