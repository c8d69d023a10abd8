import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from tomonet.measurement import (
    STANDARD_SETTING_LABELS,
    add_readout_noise,
    assemble_b,
    build_A,
    linear_inversion_qst,
    readout_length,
    reduce_vector,
    setting_from_label,
    simulate_readout,
    single_quantum_transitions,
    standard_settings,
)
from tomonet.quantum import fidelity, pauli_expand, pauli_strings
from tomonet.data import random_mixed_state, random_pure_state


class TestSettings:
    def test_standard_labels(self):
        assert [s.label for s in standard_settings(2)] == ["II", "IX", "IY", "XX"]
        assert [s.label for s in standard_settings(3)] == [
            "III", "IIY", "IYY", "YII", "XYX", "XXY", "XXX",
        ]

    def test_unsupported_size(self):
        with pytest.raises(ValueError):
            standard_settings(4)

    def test_bad_label(self):
        with pytest.raises(ValueError):
            setting_from_label("XZ")

    def test_rotations_unitary(self):
        for s in standard_settings(2) + standard_settings(3):
            r = s.rotation
            assert np.abs(r.conj().T @ r - np.eye(r.shape[0])).max() < 1e-12


class TestTransitions:
    def test_two_qubit_pairs(self):
        assert single_quantum_transitions(2) == ((0, 2), (1, 3), (0, 1), (2, 3))

    def test_three_qubit_pairs(self):
        pairs = single_quantum_transitions(3)
        assert len(pairs) == 12
        # every pair differs in exactly one bit, lower index first
        for r, c in pairs:
            assert r < c
            assert bin(r ^ c).count("1") == 1

    def test_lengths(self):
        assert readout_length(2) == 33
        assert readout_length(3) == 169


class TestReadout:
    def test_diagonal_state_silent_at_identity_setting(self):
        rho = np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex)
        vals = simulate_readout(rho, setting_from_label("II"))
        assert np.abs(vals).max() == 0.0

    def test_single_coherence_lands_in_right_slot(self):
        # (|00> + |01>)/sqrt(2): only the qubit-1 transition (0, 1) fires
        k = np.zeros(4, dtype=complex)
        k[0] = k[1] = 1 / np.sqrt(2)
        rho = np.outer(k, k.conj())
        vals = simulate_readout(rho, setting_from_label("II"))
        expected = np.zeros(8)
        expected[4] = 0.5  # pair index 2 -> real slot 2*2
        np.testing.assert_allclose(vals, expected, atol=1e-14)

    def test_qubit_size_mismatch(self):
        with pytest.raises(ValueError):
            simulate_readout(np.eye(4, dtype=complex) / 4, setting_from_label("III"))

    @pytest.mark.parametrize("n", [2, 3])
    def test_readout_is_linear_in_pauli_coefficients(self, n):
        # oracle: per-setting readout equals the matching A block times coeffs
        rng = np.random.default_rng(21)
        sts = standard_settings(n)
        A = build_A(sts)
        block = 2 * len(single_quantum_transitions(n))
        for _ in range(50):
            rho = random_mixed_state(n, rng)
            coeffs = pauli_expand(rho)
            for k, s in enumerate(sts):
                vals = simulate_readout(rho, s)
                np.testing.assert_allclose(
                    vals, A[k * block : (k + 1) * block] @ coeffs, atol=1e-12
                )


class TestCoefficientMatrix:
    @pytest.mark.parametrize("n,shape", [(2, (33, 16)), (3, (169, 64))])
    def test_shape_and_rank(self, n, shape):
        A = build_A(standard_settings(n))
        assert A.shape == shape
        assert np.linalg.matrix_rank(A) == shape[1]

    def test_cached_and_immutable(self):
        a1 = build_A(standard_settings(2))
        a2 = build_A(standard_settings(2))
        assert a1 is a2
        with pytest.raises(ValueError):
            a1[0, 0] = 1.0

    def test_trace_row(self):
        A = build_A(standard_settings(2))
        expected = np.zeros(16)
        expected[0] = 4.0
        np.testing.assert_allclose(A[-1], expected)

    def test_empty_settings(self):
        with pytest.raises(ValueError):
            build_A([])

    @pytest.mark.parametrize("n", [2, 3])
    def test_b_equals_A_x(self, n):
        rng = np.random.default_rng(22)
        sts = standard_settings(n)
        A = build_A(sts)
        for _ in range(100):
            rho = random_mixed_state(n, rng)
            b = assemble_b(rho, sts)
            assert b[-1] == 1.0
            assert np.abs(b - A @ pauli_expand(rho)).max() < 1e-10

    def test_maximally_mixed_data_vector(self):
        b = assemble_b(np.eye(4, dtype=complex) / 4, standard_settings(2))
        assert np.abs(b[:-1]).max() < 1e-14
        assert b[-1] == 1.0


class TestLinearInversion:
    def test_round_trip_exact(self):
        rng = np.random.default_rng(23)
        sts = standard_settings(2)
        A = build_A(sts)
        for _ in range(200):
            rho = random_mixed_state(2, rng)
            rec = linear_inversion_qst(assemble_b(rho, sts), A)
            assert fidelity(rec, rho) > 1 - 1e-9

    def test_three_qubit_round_trip(self):
        rng = np.random.default_rng(24)
        sts = standard_settings(3)
        A = build_A(sts)
        for _ in range(50):
            rho = random_pure_state(3, rng)
            rec = linear_inversion_qst(assemble_b(rho, sts), A)
            assert fidelity(rec, rho) > 1 - 1e-9

    def test_noisy_data_degrades_gracefully(self):
        rng = np.random.default_rng(25)
        sts = standard_settings(2)
        A = build_A(sts)
        fids = []
        for _ in range(200):
            rho = random_pure_state(2, rng)
            b = add_readout_noise(assemble_b(rho, sts), 0.01, rng)
            fids.append(fidelity(linear_inversion_qst(b, A), rho))
        assert np.mean(fids) > 0.98

    def test_rank_deficient_rejected(self):
        # a single setting cannot determine all 16 coefficients
        A1 = build_A([setting_from_label("II")])
        with pytest.raises(ValueError, match="ill-posed"):
            linear_inversion_qst(np.zeros(A1.shape[0]), A1)

    def test_length_mismatch(self):
        A = build_A(standard_settings(2))
        with pytest.raises(ValueError):
            linear_inversion_qst(np.zeros(10), A)


class TestNoise:
    def test_trace_row_untouched(self):
        rng = np.random.default_rng(26)
        b = assemble_b(random_mixed_state(2, rng), standard_settings(2))
        noisy = add_readout_noise(b, 0.5, rng)
        assert noisy[-1] == b[-1]
        assert not np.allclose(noisy[:-1], b[:-1])

    def test_zero_sigma_changes_nothing(self):
        rng = np.random.default_rng(27)
        b = assemble_b(random_mixed_state(2, rng), standard_settings(2))
        np.testing.assert_array_equal(add_readout_noise(b, 0.0, rng), b)


class TestReduceVector:
    def test_full_keep(self):
        rng = np.random.default_rng(28)
        b = rng.standard_normal(33)
        red = reduce_vector(b, 33, rng)
        assert red.mask.all()
        np.testing.assert_array_equal(red.values, b)

    def test_zero_keep(self):
        rng = np.random.default_rng(29)
        red = reduce_vector(rng.standard_normal(33), 0, rng)
        assert not red.mask.any()
        assert np.abs(red.values).max() == 0.0

    def test_out_of_range(self):
        rng = np.random.default_rng(30)
        with pytest.raises(ValueError):
            reduce_vector(np.zeros(10), 11, rng)

    def test_seed_determinism(self):
        b = np.arange(33.0)
        r1 = reduce_vector(b, 8, np.random.default_rng(5))
        r2 = reduce_vector(b, 8, np.random.default_rng(5))
        np.testing.assert_array_equal(r1.mask, r2.mask)
        np.testing.assert_array_equal(r1.values, r2.values)

    @given(st.integers(0, 33), st.integers(0, 10_000))
    @hsettings(max_examples=50, deadline=None)
    def test_mask_invariants(self, m, seed):
        rng = np.random.default_rng(seed)
        b = np.random.default_rng(0).standard_normal(33)
        red = reduce_vector(b, m, rng)
        assert red.mask.sum() == m
        # kept entries exact, dropped entries exactly zero
        np.testing.assert_array_equal(red.values[red.mask], b[red.mask])
        assert np.abs(red.values[~red.mask]).max(initial=0.0) == 0.0

    def test_reduction_idempotent_under_kept_mask(self):
        rng = np.random.default_rng(31)
        b = rng.standard_normal(33)
        red = reduce_vector(b, 12, rng)
        again = np.where(red.mask, red.values, 0.0)
        np.testing.assert_array_equal(again, red.values)
