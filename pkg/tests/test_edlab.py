import math
from fractions import Fraction

import numpy as np
import pytest

from dssyklab import edlab as ed
from dssyklab import moments as mo


class TestMajoranaAlgebra:
    @pytest.mark.parametrize("N", [2, 4, 6, 8, 10])
    def test_clifford_relations(self, N):
        ops = [ed.majorana(l, N) for l in range(1, N + 1)]
        dim = 2 ** (N // 2)
        eye2 = 2 * np.eye(dim)
        for i in range(N):
            assert np.abs(ops[i] - ops[i].conj().T).max() < 1e-13
            for j in range(i, N):
                anti = ops[i] @ ops[j] + ops[j] @ ops[i]
                target = eye2 if i == j else 0.0
                assert np.abs(anti - target).max() < 1e-13

    def test_n2_pair_anticommutes(self):
        p1, p2 = ed.majorana(1, 2), ed.majorana(2, 2)
        assert np.abs(p1 @ p2 + p2 @ p1).max() < 1e-13

    @pytest.mark.parametrize("N", [4, 6])
    def test_chirality_diagonal_signs(self, N):
        chi = ed._chirality(N)
        off = chi - np.diag(np.diag(chi))
        assert np.abs(off).max() < 1e-13
        diag = np.diag(chi)
        assert np.abs(diag.imag).max() < 1e-13
        assert set(np.round(diag.real).astype(int)) == {-1, 1}

    def test_index_bounds(self):
        with pytest.raises(ValueError):
            ed.majorana(0, 4)
        with pytest.raises(ValueError):
            ed.majorana(5, 4)
        with pytest.raises(ValueError):
            ed.majorana(1, 7)

    def test_dimension_cap(self):
        with pytest.raises(ValueError):
            ed.majorana(1, 26)


class TestDefectMatrix:
    def test_k0_identity(self):
        assert np.array_equal(ed.build_dc(6, 0), np.eye(8))

    def test_kmax_single_entry(self):
        d = ed.build_dc(6, 3)
        assert d[0, 0] == 1.0 and d.sum() == 1.0

    def test_trace_fraction(self):
        for N in (4, 6, 8):
            for k in range(N // 2 + 1):
                d = ed.build_dc(N, k)
                assert np.trace(d) / 2 ** (N // 2) == 2.0 ** (-k)

    @pytest.mark.parametrize("N,k", [(4, 1), (6, 2), (8, 3)])
    def test_printed_expansions(self, N, k):
        assert ed.verify_dc_majorana_expansion(N, k)

    @pytest.mark.parametrize("N,k", [(6, 1), (8, 2), (10, 3), (6, 3), (8, 4), (10, 5)])
    def test_general_expansion(self, N, k):
        assert ed.verify_dc_majorana_expansion(N, k)

    def test_half_case_explicit(self):
        # (1 + chirality)/2 puts ones exactly on the first half of the diagonal
        N = 4
        expanded = (np.eye(4) + ed._chirality(N)) / 2
        assert np.abs(expanded - ed.build_dc(N, 1)).max() < 1e-13


class TestHamiltonian:
    def test_hermitian(self):
        params = ed.ModelParams(N=12, p=4, seed=5)
        H = ed.build_h_syk(params, ed.sample_rng(5, 0))
        assert np.abs(H - H.conj().T).max() < 1e-13

    def test_traceless(self):
        params = ed.ModelParams(N=10, p=4, seed=5)
        H = ed.build_h_syk(params, ed.sample_rng(5, 0))
        assert abs(np.trace(H)) < 1e-12

    def test_trace_h2_normalized(self):
        params = ed.ModelParams(N=16, p=4, seed=11, samples=50)
        vals = np.array([np.sum(np.abs(ed.build_h_syk(params, ed.sample_rng(11, s))) ** 2)
                         / params.dim for s in range(params.samples)])
        mean = vals.mean()
        stderr = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(mean - 1.0) < 3 * stderr

    def test_p_equals_n_single_term(self):
        params = ed.ModelParams(N=4, p=4, seed=3)
        H = ed.build_h_syk(params, ed.sample_rng(3, 0))
        eigs = np.linalg.eigvalsh(H)
        assert eigs[0] == pytest.approx(-abs(eigs[-1]), abs=1e-12)
        assert np.allclose(np.abs(eigs), abs(eigs[0]), atol=1e-12)

    def test_streaming_matches_cached(self):
        params = ed.ModelParams(N=10, p=4, seed=9)
        cached = ed.build_h_syk(params, ed.sample_rng(9, 0))
        ed._term_structure.cache_clear()
        old = ed._STRUCTURE_BUDGET
        try:
            ed._STRUCTURE_BUDGET = 0
            streamed = ed.build_h_syk(params, ed.sample_rng(9, 0))
        finally:
            ed._STRUCTURE_BUDGET = old
            ed._term_structure.cache_clear()
        assert np.abs(cached - streamed).max() == 0.0


class TestSampling:
    def test_eigenvalue_counts_and_sorting(self):
        params = ed.ModelParams(N=8, p=4, theta=1.5, k=1, seed=2, samples=3)
        spectra = ed.sample_spectra(params)
        assert len(spectra) == 3
        for s in spectra:
            assert len(s.eigenvalues) == params.dim
            assert np.all(np.diff(s.eigenvalues) >= 0)

    def test_determinism(self):
        params = ed.ModelParams(N=8, p=4, theta=1.0, k=1, seed=7, samples=2)
        a = ed.sample_spectra(params)
        b = ed.sample_spectra(params)
        for s1, s2 in zip(a, b):
            assert np.array_equal(s1.eigenvalues, s2.eigenvalues)

    def test_sample_streams_order_insensitive(self):
        params1 = ed.ModelParams(N=8, p=4, seed=7, samples=3)
        params5 = ed.ModelParams(N=8, p=4, seed=7, samples=1)
        full = ed.sample_spectra(params1)
        first = ed.sample_spectra(params5)
        assert np.array_equal(full[0].eigenvalues, first[0].eigenvalues)

    def test_theta_zero_is_pure_random(self):
        params = ed.ModelParams(N=8, p=4, theta=0.0, k=2, seed=4)
        spectrum = ed.sample_spectra(params)[0].eigenvalues
        H = ed.build_h_syk(params, ed.sample_rng(4, 0))
        assert np.allclose(spectrum, np.linalg.eigvalsh(H), atol=1e-13)

    def test_empirical_moment_normalization(self):
        params = ed.ModelParams(N=10, p=4, theta=2.0, k=1, seed=6, samples=4)
        moments_0_2 = ed.empirical_moments(ed.sample_spectra(params), 2)
        assert moments_0_2[0] == pytest.approx(1.0, abs=1e-12)

    def test_first_two_empirical_moments(self):
        params = ed.ModelParams(N=12, p=4, theta=2.0, k=1, seed=8, samples=40)
        spectra = ed.sample_spectra(params)
        vals = ed.empirical_moments(spectra, 2)
        r = params.r
        per1 = [np.mean(s.eigenvalues) for s in spectra]
        se1 = np.std(per1, ddof=1) / math.sqrt(len(per1))
        assert abs(vals[1] - r * 2.0) < 4 * se1
        per2 = [np.mean(s.eigenvalues ** 2) for s in spectra]
        se2 = np.std(per2, ddof=1) / math.sqrt(len(per2))
        assert abs(vals[2] - (1.0 + r * 4.0)) < 4 * se2


class TestPairedComparison:
    def test_matches_analytic_moments(self):
        params = ed.ModelParams(N=14, p=4, theta=3.0, k=2, seed=424242, samples=25)
        means, errs = ed.paired_reduced_moments(params, 6)
        q = ed.qn_finite(params.p, params.N)
        qt = ed.qtilde_weight(params.p, params.N, params.k)
        for n in range(1, 7):
            analytic = float(mo.reduced_moment(n).substitute(q=q, qt=qt).evaluate(theta=3.0))
            scale = max(errs[n - 1], 1e-10 * max(1.0, abs(analytic)))
            assert abs(means[n - 1] - analytic) < 3 * scale, f"n={n}"


class TestFiniteSizeWeights:
    def test_asymptotic_q(self):
        assert abs(float(ed.qn_finite(4, 1000)) - math.exp(-32 / 1000)) < 1e-2

    def test_p_equals_n(self):
        for p in (2, 4, 6):
            assert ed.qn_finite(p, p) == (-1) ** p

    def test_frozen_value_n26(self):
        assert ed.qn_finite(4, 26) == Fraction(1227, 7475)

    def test_q0_is_one(self):
        assert ed.qj_weight(4, 20, 0) == 1

    def test_qtilde_k1(self):
        assert ed.qtilde_weight(4, 26, 1) == ed.qj_weight(4, 26, 0)

    def test_qtilde_k2(self):
        q0, q1 = ed.qj_weight(4, 26, 0), ed.qj_weight(4, 26, 1)
        assert ed.qtilde_weight(4, 26, 2) == (q0 + q1) / 2

    def test_qtilde_k4_closing_display(self):
        q = [ed.qj_weight(4, 26, j) for j in range(4)]
        assert ed.qtilde_weight(4, 26, 4) == (q[0] + 3 * (q[1] + q[2]) + q[3]) / 8

    def test_qtilde_k3_variants(self):
        q = [ed.qj_weight(4, 26, j) for j in range(3)]
        assert ed.qtilde_weight(4, 26, 3) == (q[0] + 2 * q[1] + q[2]) / 4
        assert ed.qtilde_weight_main_text(4, 26, 3) == (q[0] + 2 * q[1]) / 4
        assert ed.qtilde_weight_main_text(4, 26, 2) == ed.qtilde_weight(4, 26, 2)

    def test_validation(self):
        with pytest.raises(ValueError):
            ed.qn_finite(6, 4)
        with pytest.raises(ValueError):
            ed.qtilde_weight(3, 26, 2)


class TestPhaseScan:
    def test_gap_appears_at_large_theta(self):
        base = ed.ModelParams(N=12, p=4, k=2, seed=3, samples=10)
        rows = ed.phase_scan(base, thetas=[1.0, 5.0])
        by_theta = {r["theta"]: r for r in rows}
        assert not by_theta[1.0]["bimodal"]
        assert by_theta[1.0]["gap"] == 0.0
        assert by_theta[5.0]["bimodal"]
        assert by_theta[5.0]["gap"] > 0.5

    def test_report_fields(self):
        report = ed.spectral_gap_report(np.concatenate([np.linspace(0, 1, 300),
                                                        np.linspace(5, 6, 300)]))
        assert report["bimodal"] and report["gap"] > 3.5

    def test_unimodal_uniform(self):
        report = ed.spectral_gap_report(np.linspace(0, 1, 2000))
        assert not report["bimodal"] and report["gap"] == 0.0


class TestModelParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            ed.ModelParams(N=7, p=4)
        with pytest.raises(ValueError):
            ed.ModelParams(N=8, p=3)
        with pytest.raises(ValueError):
            ed.ModelParams(N=8, p=4, k=5)
        with pytest.raises(ValueError):
            ed.ModelParams(N=26, p=4)

    def test_derived_quantities(self):
        params = ed.ModelParams(N=16, p=4, k=2)
        assert params.dim == 256
        assert params.r == 0.25
        assert params.nonzero_entries == 64
