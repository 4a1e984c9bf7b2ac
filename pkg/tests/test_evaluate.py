import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcmcodec import (
    ContractError,
    Fcm,
    adjust_flips,
    align_nodes,
    detect_flip,
    edge_preservation,
    evaluate_reconstruction,
    label_similarity,
    project_to_target,
    reconstruction_error,
)
from fcmcodec.fixtures import (
    CELIAC_NODE_LABELS,
    CELIAC_PARAPHRASED_NODE_LABELS,
    DEPRESSION_NODE_LABELS,
    DEPRESSION_PARAPHRASED_NODE_LABELS,
)
from conftest import norms_oracle, random_fcm


def zero_fcm(labels):
    return Fcm(labels, np.zeros((len(labels), len(labels))))


class TestDetectFlip:
    def test_privative_marker_flips(self):
        assert detect_flip("Loss of appetite", "Appetite")

    def test_attenuation_is_not_negation(self):
        assert not detect_flip("Recurrent thoughts of death", "Thoughts of death")

    def test_identical_labels_never_flip(self):
        assert not detect_flip("Insomnia", "Insomnia")

    def test_marker_on_both_sides_cancels(self):
        assert not detect_flip("Loss of appetite", "loss of appetite")

    def test_marker_with_unrelated_head_does_not_flip(self):
        assert not detect_flip("Loss of appetite", "Insomnia")

    def test_table_classification(self):
        flips = [
            i + 1
            for i, (a, b) in enumerate(
                zip(DEPRESSION_NODE_LABELS, DEPRESSION_PARAPHRASED_NODE_LABELS)
            )
            if detect_flip(a, b)
        ]
        assert flips == [4, 9, 10]

    def test_empty_label_rejected(self):
        with pytest.raises(ContractError):
            detect_flip("", "Appetite")


class TestAlignNodes:
    def test_identity_alignment(self):
        fcm = zero_fcm(["alpha load", "beta drive"])
        alignment = align_nodes(fcm, fcm)
        assert len(alignment.pairs) == 2
        assert all(p.similarity == 1.0 and not p.flipped for p in alignment.pairs)
        assert alignment.unmatched_target == ()
        assert alignment.unmatched_recon == ()

    def test_paraphrased_depression_lists_align_fully(self):
        target = zero_fcm(DEPRESSION_NODE_LABELS)
        recon = zero_fcm(DEPRESSION_PARAPHRASED_NODE_LABELS)
        alignment = align_nodes(target, recon)
        assert len(alignment.pairs) == 14
        assert all(p.target_index == p.recon_index for p in alignment.pairs)
        assert sorted(i + 1 for i in alignment.flipped_target_indices) == [4, 9, 10]

    def test_celiac_paraphrases_match_without_flips(self):
        target = zero_fcm(CELIAC_NODE_LABELS)
        recon = zero_fcm(CELIAC_PARAPHRASED_NODE_LABELS)
        alignment = align_nodes(target, recon)
        assert len(alignment.pairs) == 8
        assert alignment.flipped_target_indices == ()

    def test_mitoses_matches_mitotic_activity(self):
        alignment = align_nodes(zero_fcm(["Mitoses"]), zero_fcm(["Mitotic activity"]))
        assert len(alignment.pairs) == 1
        assert not alignment.pairs[0].flipped

    def test_unrelated_labels_stay_unmatched(self):
        alignment = align_nodes(zero_fcm(["Insomnia"]), zero_fcm(["Epithelial changes"]))
        assert alignment.pairs == ()
        assert alignment.unmatched_target == (0,)
        assert alignment.unmatched_recon == (0,)

    def test_permuting_recon_changes_indices_not_pairs(self):
        target = zero_fcm(DEPRESSION_NODE_LABELS)
        recon = zero_fcm(DEPRESSION_PARAPHRASED_NODE_LABELS)
        shuffled = zero_fcm(tuple(reversed(DEPRESSION_PARAPHRASED_NODE_LABELS)))
        base = {
            (target.labels[p.target_index], recon.labels[p.recon_index], p.flipped)
            for p in align_nodes(target, recon).pairs
        }
        perm = {
            (target.labels[p.target_index], shuffled.labels[p.recon_index], p.flipped)
            for p in align_nodes(target, shuffled).pairs
        }
        assert base == perm

    def test_min_similarity_validated(self):
        fcm = zero_fcm(["a"])
        with pytest.raises(ContractError):
            align_nodes(fcm, fcm, min_similarity=1.5)


class TestProjection:
    def test_unmatched_rows_and_columns_zero(self):
        target = zero_fcm(["alpha load", "beta drive", "gamma stress"])
        recon = Fcm(["beta drive", "alpha load"], [[0, 0.5], [-0.25, 0]])
        alignment = align_nodes(target, recon)
        projected = project_to_target(recon, alignment)
        assert projected.shape == (3, 3)
        assert projected[1, 0] == 0.5  # beta -> alpha in target order
        assert projected[0, 1] == -0.25
        assert np.count_nonzero(projected[2, :]) == 0
        assert np.count_nonzero(projected[:, 2]) == 0


class TestAdjustFlips:
    def test_empty_flip_set_is_identity(self):
        m = np.array([[0.0, 0.5], [-0.25, 0.0]])
        assert np.array_equal(adjust_flips(m, set()), m)

    def test_double_flip_preserves_sign(self):
        # 14-node fixture with flips {4, 9, 10} (1-based); entry (9, 4) has
        # both endpoints flipped, so it keeps its sign.
        m = np.zeros((14, 14))
        m[8, 3] = 0.8
        m[8, 6] = -0.8
        flips = {3, 8, 9}
        adjusted = adjust_flips(m, flips)
        assert adjusted[8, 3] == 0.8
        assert adjusted[8, 6] == 0.8

    def test_involution(self):
        rng = np.random.default_rng(37)
        for _ in range(50):
            n = int(rng.integers(1, 8))
            m = rng.uniform(-1, 1, (n, n))
            flips = {int(i) for i in rng.choice(n, size=rng.integers(0, n + 1), replace=False)}
            assert np.allclose(adjust_flips(adjust_flips(m, flips), flips), m)

    def test_non_square_rejected(self):
        with pytest.raises(ContractError):
            adjust_flips(np.zeros((2, 3)), set())

    def test_out_of_range_index_rejected(self):
        with pytest.raises(ContractError):
            adjust_flips(np.zeros((2, 2)), {5})


class TestReconstructionError:
    def test_identical_matrices(self):
        m = np.array([[0.0, 0.5], [-0.25, 0.0]])
        assert reconstruction_error(m, m) == {"l1": 0.0, "l2": 0.0, "l_inf": 0.0}

    def test_single_unit_difference(self):
        a = np.zeros((2, 2))
        b = np.zeros((2, 2))
        b[0, 1] = 1.0
        assert reconstruction_error(a, b) == {"l1": 1.0, "l2": 1.0, "l_inf": 1.0}

    def test_matches_elementwise_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(25):
            a = rng.uniform(-1, 1, (5, 5))
            b = rng.uniform(-1, 1, (5, 5))
            got = reconstruction_error(a, b)
            want = norms_oracle(a.tolist(), b.tolist())
            for key in got:
                assert got[key] == pytest.approx(want[key], abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ContractError):
            reconstruction_error(np.zeros((2, 2)), np.zeros((3, 3)))

    @settings(max_examples=60)
    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_metric_axioms(self, n, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (rng.uniform(-1, 1, (n, n)) for _ in range(3))
        dab = reconstruction_error(a, b)
        dba = reconstruction_error(b, a)
        dac = reconstruction_error(a, c)
        dcb = reconstruction_error(c, b)
        for key in ("l1", "l2", "l_inf"):
            assert dab[key] >= 0
            assert dab[key] == pytest.approx(dba[key], abs=1e-12)
            assert dab[key] <= dac[key] + dcb[key] + 1e-9
        assert reconstruction_error(a, a) == {"l1": 0.0, "l2": 0.0, "l_inf": 0.0}

    def test_norm_bounds_for_unit_matrices(self):
        rng = np.random.default_rng(43)
        for _ in range(20):
            n = int(rng.integers(1, 7))
            a = rng.uniform(-1, 1, (n, n))
            b = rng.uniform(-1, 1, (n, n))
            norms = reconstruction_error(a, b)
            assert norms["l_inf"] <= 2.0
            assert norms["l1"] <= 2.0 * n * n
            assert norms["l2"] <= 2.0 * n


class TestEdgePreservation:
    def test_identity_preserves_everything(self):
        m = np.array([[0.0, 0.9], [-0.7, 0.0]])
        assert edge_preservation(m, m) == 1.0

    def test_zero_reconstruction_preserves_nothing(self):
        m = np.array([[0.0, 0.9], [-0.7, 0.0]])
        assert edge_preservation(m, np.zeros((2, 2))) == 0.0

    def test_partial_preservation(self):
        target = np.zeros((3, 3))
        target[0, 1] = target[0, 2] = target[1, 2] = target[2, 0] = 0.8
        recon = target.copy()
        recon[2, 0] = 0.0
        assert edge_preservation(target, recon) == 0.75

    def test_sign_flip_breaks_preservation(self):
        target = np.zeros((2, 2))
        target[0, 1] = 0.8
        recon = np.zeros((2, 2))
        recon[0, 1] = -0.8
        assert edge_preservation(target, recon) == 0.0

    def test_no_strong_edges_is_vacuously_preserved(self):
        assert edge_preservation(np.zeros((2, 2)), np.zeros((2, 2))) == 1.0

    def test_threshold_bounds(self):
        with pytest.raises(ContractError):
            edge_preservation(np.zeros((2, 2)), np.zeros((2, 2)), strong_threshold=1.5)


class TestEvaluateReconstruction:
    def test_self_evaluation_is_perfect(self):
        rng = np.random.default_rng(47)
        fcm = random_fcm(rng, 6, density=0.5)
        report = evaluate_reconstruction(fcm, fcm)
        assert report.norms_raw == {"l1": 0.0, "l2": 0.0, "l_inf": 0.0}
        assert report.norms_adjusted == {"l1": 0.0, "l2": 0.0, "l_inf": 0.0}
        assert report.strong_edge_preservation == 1.0

    def test_flip_adjustment_reduces_error_on_negated_reconstruction(self):
        n = 14
        rng = np.random.default_rng(53)
        matrix = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i != j and rng.random() < 0.4:
                    matrix[i, j] = rng.uniform(0.1, 1.0)
        target = Fcm(DEPRESSION_NODE_LABELS, matrix)
        flipped_positions = (3, 8, 9)
        signs = np.array([-1.0 if i in flipped_positions else 1.0 for i in range(n)])
        recon = Fcm(
            DEPRESSION_PARAPHRASED_NODE_LABELS, np.outer(signs, signs) * matrix
        )
        report = evaluate_reconstruction(target, recon)
        assert sorted(report.alignment.flipped_target_indices) == list(flipped_positions)
        assert report.norms_adjusted["l1"] < report.norms_raw["l1"]
        assert report.norms_adjusted["l1"] == pytest.approx(0.0, abs=1e-12)


def test_label_similarity_threshold_examples():
    assert label_similarity("villi blunting", "villous blunting") >= 0.55
    assert label_similarity("fatigue", "fatigue or loss of energy") >= 0.55
    assert label_similarity("insomnia", "epithelial changes") < 0.55
