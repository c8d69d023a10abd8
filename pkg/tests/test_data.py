import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from tomonet.data import (
    DatasetFile,
    draw_m_data,
    export_csv,
    gen_qpt_dataset,
    gen_qst_dataset,
    load_dataset,
    normalize_policy,
    random_mixed_state,
    random_pure_state,
    save_dataset,
)
from tomonet.measurement import assemble_b, build_A, standard_settings
from tomonet.process import build_beta, vec_to_chi
from tomonet.quantum import check_density_matrix, pauli_reconstruct, pauli_strings


class TestPolicies:
    def test_canonical_forms(self):
        assert normalize_policy("full") == "full"
        assert normalize_policy(8) == 8
        assert normalize_policy("8") == 8
        assert normalize_policy("uniform:10-33") == ("uniform", 10, 33)
        assert normalize_policy(("uniform", 5, 12)) == ("uniform", 5, 12)

    def test_invalid_policies(self):
        for bad in (-1, "nope", ("uniform", 9, 3), True):
            with pytest.raises(ValueError):
                normalize_policy(bad)

    def test_draw_fixed_and_full(self):
        rng = np.random.default_rng(0)
        assert draw_m_data("full", 33, rng) == 33
        assert draw_m_data(8, 33, rng) == 8
        with pytest.raises(ValueError):
            draw_m_data(40, 33, rng)

    @given(st.integers(0, 10_000))
    @hsettings(max_examples=30, deadline=None)
    def test_draw_uniform_in_bounds(self, seed):
        rng = np.random.default_rng(seed)
        m = draw_m_data(("uniform", 5, 20), 33, rng)
        assert 5 <= m <= 20


class TestRandomStates:
    def test_pure_state_is_rank_one(self):
        rng = np.random.default_rng(1)
        rho = random_pure_state(2, rng)
        check_density_matrix(rho)
        assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-12)

    def test_mixed_state_physical(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            check_density_matrix(random_mixed_state(2, rng))

    def test_mixed_state_mean_purity(self):
        # analytic oracle: E Tr(rho^2) = 2d / (d^2 + 1) for square Ginibre,
        # = 8/17 for d = 4; Monte-Carlo check within a generous band
        rng = np.random.default_rng(3)
        draws = 20_000
        purity = np.empty(draws)
        for i in range(draws):
            rho = random_mixed_state(2, rng)
            purity[i] = np.trace(rho @ rho).real
        assert abs(purity.mean() - 8 / 17) < 5 * purity.std() / np.sqrt(draws)


class TestQstGeneration:
    def test_header_and_shapes(self):
        ds = gen_qst_dataset(2, 10, seed=5)
        assert ds.header["task"] == "qst"
        assert ds.inputs.shape == (10, 33)
        assert ds.masks.all()
        assert ds.targets.shape == (10, 16)
        assert ds.count == 10

    def test_noiseless_inputs_satisfy_linear_model(self):
        ds = gen_qst_dataset(2, 20, seed=6)
        A = build_A(standard_settings(2))
        for i in range(20):
            assert np.abs(ds.inputs[i] - A @ ds.targets[i]).max() < 1e-10

    def test_targets_are_valid_states(self):
        ds = gen_qst_dataset(3, 10, seed=7)
        for t in ds.targets:
            check_density_matrix(pauli_reconstruct(t))

    def test_masked_entries_exactly_zero(self):
        ds = gen_qst_dataset(2, 30, m_data_policy=8, seed=8)
        assert (ds.masks.sum(axis=1) == 8).all()
        assert np.abs(ds.inputs[~ds.masks]).max(initial=0.0) == 0.0

    def test_pure_fraction_extremes(self):
        pure = gen_qst_dataset(2, 20, pure_fraction=1.0, seed=9)
        for t in pure.targets:
            rho = pauli_reconstruct(t)
            assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-10)
        mixed = gen_qst_dataset(2, 20, pure_fraction=0.0, seed=9)
        purities = [
            np.trace(pauli_reconstruct(t) @ pauli_reconstruct(t)).real
            for t in mixed.targets
        ]
        assert np.mean(purities) < 0.9

    def test_reproducible_and_worker_invariant(self):
        a = gen_qst_dataset(2, 40, m_data_policy="uniform:5-33", noise_sigma=0.01,
                            seed=10, workers=1)
        b = gen_qst_dataset(2, 40, m_data_policy="uniform:5-33", noise_sigma=0.01,
                            seed=10, workers=4)
        np.testing.assert_array_equal(a.inputs, b.inputs)
        np.testing.assert_array_equal(a.masks, b.masks)
        np.testing.assert_array_equal(a.targets, b.targets)

    def test_seed_changes_data(self):
        a = gen_qst_dataset(2, 5, seed=11)
        b = gen_qst_dataset(2, 5, seed=12)
        assert not np.allclose(a.inputs, b.inputs)

    def test_bad_args(self):
        with pytest.raises(ValueError):
            gen_qst_dataset(2, 0)
        with pytest.raises(ValueError):
            gen_qst_dataset(2, 5, pure_fraction=1.5)


class TestQptGeneration:
    def test_header_and_shapes(self):
        ds = gen_qpt_dataset(2, 8, seed=13)
        assert ds.header["task"] == "qpt"
        assert ds.header["lambda_mode"] == "compact"
        assert ds.inputs.shape == (8, 256)
        assert ds.targets.shape == (8, 256)

    def test_noiseless_inputs_satisfy_linear_model(self):
        ds = gen_qpt_dataset(2, 10, seed=14)
        beta = build_beta(2, "compact")
        for i in range(10):
            assert np.abs(beta @ ds.targets[i] - ds.inputs[i]).max() < 1e-9

    def test_targets_are_unitary_channels(self):
        # rank-1 PSD chi with unit top eigenvalue, trace preserving
        P = pauli_strings(2)
        ds = gen_qpt_dataset(2, 10, seed=15)
        for t in ds.targets:
            chi = vec_to_chi(t)
            w = np.linalg.eigvalsh(chi)
            assert w[-1] == pytest.approx(1.0, abs=1e-8)
            assert np.abs(w[:-1]).max() < 1e-8
            acc = np.einsum("mn,nki,mij->kj", chi, P.conj().transpose(0, 2, 1), P)
            assert np.abs(acc - np.eye(4)).max() < 1e-8

    def test_reproducible_and_worker_invariant(self):
        a = gen_qpt_dataset(2, 16, m_data_policy=160, noise_sigma=0.01, seed=16, workers=1)
        b = gen_qpt_dataset(2, 16, m_data_policy=160, noise_sigma=0.01, seed=16, workers=4)
        np.testing.assert_array_equal(a.inputs, b.inputs)
        np.testing.assert_array_equal(a.masks, b.masks)
        np.testing.assert_array_equal(a.targets, b.targets)

    def test_only_two_qubits(self):
        with pytest.raises(ValueError):
            gen_qpt_dataset(3, 5)


class TestFileFormat:
    def test_round_trip_byte_identical(self, tmp_path):
        ds = gen_qst_dataset(2, 12, m_data_policy="uniform:4-33", noise_sigma=0.02, seed=17)
        p1, p2 = tmp_path / "a.tnds", tmp_path / "b.tnds"
        save_dataset(ds, p1)
        loaded = load_dataset(p1)
        assert loaded.header == ds.header
        np.testing.assert_array_equal(loaded.inputs, ds.inputs)
        np.testing.assert_array_equal(loaded.masks, ds.masks)
        np.testing.assert_array_equal(loaded.targets, ds.targets)
        save_dataset(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "x.tnds"
        p.write_bytes(b"WRNG" + b"\0" * 32)
        with pytest.raises(ValueError, match="not a dataset"):
            load_dataset(p)

    def test_truncated_body(self, tmp_path):
        ds = gen_qst_dataset(2, 6, seed=18)
        p = tmp_path / "x.tnds"
        save_dataset(ds, p)
        blob = p.read_bytes()
        p.write_bytes(blob[: len(blob) - 100])
        with pytest.raises(ValueError, match="truncated"):
            load_dataset(p)

    def test_bad_version(self, tmp_path):
        ds = gen_qst_dataset(2, 3, seed=19)
        ds.header["format_version"] = 99
        p = tmp_path / "x.tnds"
        save_dataset(ds, p)
        with pytest.raises(ValueError, match="version"):
            load_dataset(p)

    def test_header_count_mismatch(self, tmp_path):
        ds = gen_qst_dataset(2, 3, seed=20)
        ds.header["count"] = 4
        with pytest.raises(ValueError):
            save_dataset(ds, tmp_path / "x.tnds")

    def test_csv_export(self, tmp_path):
        ds = gen_qst_dataset(2, 4, seed=21)
        p = tmp_path / "x.csv"
        export_csv(ds, p)
        lines = p.read_text().splitlines()
        assert len(lines) == 5
        assert lines[0].startswith("in_0,") and "target_0" in lines[0]
        row = np.array([float(v) for v in lines[1].split(",")])
        np.testing.assert_array_equal(row[:33], ds.inputs[0])
        np.testing.assert_array_equal(row[33:], ds.targets[0])
