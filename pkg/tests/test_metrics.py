import statistics

import numpy as np
import pytest

from tomonet.measurement import assemble_b, build_A, linear_inversion_qst, standard_settings
from tomonet.metrics import FidelityStats, ensemble_stats, repeated_mask_fidelity
from tomonet.quantum import fidelity
from tomonet.data import random_pure_state


class TestEnsembleStats:
    def test_constant_list(self):
        s = ensemble_stats([0.9, 0.9, 0.9])
        assert s.mean == pytest.approx(0.9)
        assert s.std == 0.0
        assert s.count == 3

    def test_two_point_spread(self):
        s = ensemble_stats([0.0, 1.0])
        assert s.mean == pytest.approx(0.5)
        assert s.std == pytest.approx(np.sqrt(0.5))

    def test_matches_statistics_stdev(self):
        # independent oracle from the stdlib (same N-1 convention)
        vals = np.random.default_rng(1).random(1000).tolist()
        s = ensemble_stats(vals)
        assert s.mean == pytest.approx(statistics.fmean(vals), abs=1e-12)
        assert s.std == pytest.approx(statistics.stdev(vals), abs=1e-12)

    def test_single_item(self):
        s = ensemble_stats([0.42])
        assert s.std == 0.0 and s.count == 1

    def test_order_invariance(self):
        a = ensemble_stats([0.1, 0.5, 0.9])
        b = ensemble_stats([0.9, 0.1, 0.5])
        assert a.mean == pytest.approx(b.mean) and a.std == pytest.approx(b.std)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ensemble_stats([])


class TestRepeatedMaskFidelity:
    def test_full_mask_perfect_predictor(self):
        sts = standard_settings(2)
        A = build_A(sts)
        rho = random_pure_state(2, np.random.default_rng(2))
        b = assemble_b(rho, sts)
        f = repeated_mask_fidelity(
            b, lambda v: linear_inversion_qst(v, A), rho,
            m_data=33, repeats=5, rng=np.random.default_rng(3),
        )
        assert f == pytest.approx(1.0, abs=1e-9)

    def test_deterministic_for_fixed_seed(self):
        sts = standard_settings(2)
        A = build_A(sts)
        rho = random_pure_state(2, np.random.default_rng(4))
        b = assemble_b(rho, sts)
        pred = lambda v: linear_inversion_qst(np.where(np.abs(v) > 0, v, 0.0) + 0 * v, A)
        args = (b, pred, rho)
        f1 = repeated_mask_fidelity(*args, m_data=20, repeats=8, rng=np.random.default_rng(5))
        f2 = repeated_mask_fidelity(*args, m_data=20, repeats=8, rng=np.random.default_rng(5))
        assert f1 == f2

    def test_repeats_validated(self):
        with pytest.raises(ValueError):
            repeated_mask_fidelity(np.ones(33), lambda v: np.eye(4) / 4, np.eye(4) / 4,
                                   m_data=8, repeats=0, rng=np.random.default_rng(6))

    def test_reduction_hurts_naive_inversion(self):
        # zero-padding the data vector and inverting blindly loses fidelity
        sts = standard_settings(2)
        A = build_A(sts)
        rho = random_pure_state(2, np.random.default_rng(7))
        b = assemble_b(rho, sts)
        f = repeated_mask_fidelity(
            b, lambda v: linear_inversion_qst(v, A), rho,
            m_data=8, repeats=20, rng=np.random.default_rng(8),
        )
        assert f < 0.99
