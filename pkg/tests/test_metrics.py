import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgas.errors import InvalidInputError
from dgas.metrics import (
    ConfusionMatrix,
    accuracy,
    f1,
    f1_from_scores,
    micro_macro,
    precision,
    recall,
    roc,
    roc_to_csv,
    tpr_at_fpr,
)


def brute_force_auc(scored):
    """P(score_pos > score_neg) + half credit for ties, over all pairs."""
    pos = [s for lab, s in scored if lab == 1]
    neg = [s for lab, s in scored if lab == 0]
    total = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                total += 1.0
            elif sp == sn:
                total += 0.5
    return total / (len(pos) * len(neg))


class TestConfusion:
    def test_all_correct_is_diagonal(self):
        pairs = [("a", "a"), ("b", "b"), ("a", "a")]
        cm = ConfusionMatrix.from_pairs(pairs, ("a", "b"))
        np.testing.assert_array_equal(cm.counts, [[2, 0], [0, 1]])

    def test_binary_example_counts(self):
        pairs = [("malware", "malware")] * 9 + [("malware", "benign")] + [("benign", "benign")] * 90
        cm = ConfusionMatrix.from_pairs(pairs, ("malware", "benign"))
        tp, fp, fn, tn = cm.binary_counts("malware")
        assert (tp, fp, fn, tn) == (9, 0, 1, 90)
        assert cm.total == 100

    def test_random_pairs_match_brute_force_tally(self):
        rng = np.random.default_rng(17)
        classes = ("a", "b", "c", "d", "e")
        pairs = [
            (classes[rng.integers(5)], classes[rng.integers(5)]) for _ in range(1000)
        ]
        cm = ConfusionMatrix.from_pairs(pairs, classes)
        for i, actual in enumerate(classes):
            for j, predicted in enumerate(classes):
                expected = sum(1 for a, p in pairs if a == actual and p == predicted)
                assert cm.counts[i, j] == expected

    def test_unknown_label_rejected(self):
        with pytest.raises(InvalidInputError):
            ConfusionMatrix.from_pairs([("a", "z")], ("a", "b"))


class TestBasicMetrics:
    @pytest.fixture
    def binary_cm(self):
        pairs = [("malware", "malware")] * 9 + [("malware", "benign")] + [("benign", "benign")] * 90
        return ConfusionMatrix.from_pairs(pairs, ("malware", "benign"))

    def test_reported_scores(self, binary_cm):
        assert accuracy(binary_cm) == pytest.approx(0.99)
        assert precision(binary_cm, "malware") == 1.0
        assert recall(binary_cm, "malware") == pytest.approx(0.9)

    def test_f1_spot_check(self):
        # Harmonic mean of 0.972 precision and 0.970 recall rounds to 0.971.
        assert f1_from_scores(0.972, 0.970) == pytest.approx(0.971, abs=5e-4)

    def test_no_predicted_positives_gives_zero_precision(self):
        pairs = [("malware", "benign"), ("benign", "benign")]
        cm = ConfusionMatrix.from_pairs(pairs, ("malware", "benign"))
        assert precision(cm, "malware") == 0.0
        assert f1(cm, "malware") == 0.0

    def test_f1_between_min_and_max_of_p_r(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            p, r = rng.uniform(0.0, 1.0, size=2)
            score = f1_from_scores(p, r)
            if p + r > 0:
                assert min(p, r) - 1e-12 <= score <= max(p, r) + 1e-12
            if p * r == 0:
                assert score == 0.0


class TestMicroMacro:
    def test_perfect_balanced_case(self):
        pairs = [("a", "a"), ("b", "b"), ("c", "c")] * 5
        mm = micro_macro(ConfusionMatrix.from_pairs(pairs, ("a", "b", "c")))
        assert mm.micro_f1 == mm.macro_f1 == 1.0

    def test_empty_predicted_class_drags_macro_below_micro(self):
        # Class "b" is never predicted; its zero scores pull the macro mean
        # down while micro (count-weighted) stays higher.
        pairs = [("a", "a")] * 8 + [("b", "a")] * 2
        mm = micro_macro(ConfusionMatrix.from_pairs(pairs, ("a", "b")))
        assert mm.macro_f1 < mm.micro_f1

    def test_random_matrix_matches_independent_aggregation(self):
        rng = np.random.default_rng(29)
        classes = ("w", "x", "y", "z")
        pairs = [(classes[rng.integers(4)], classes[rng.integers(4)]) for _ in range(500)]
        cm = ConfusionMatrix.from_pairs(pairs, classes)
        mm = micro_macro(cm)

        # Independent per-class computation straight from the pair list.
        stats = {}
        for cls in classes:
            tp = sum(1 for a, p in pairs if a == cls and p == cls)
            fp = sum(1 for a, p in pairs if a != cls and p == cls)
            fn = sum(1 for a, p in pairs if a == cls and p != cls)
            stats[cls] = (tp, fp, fn)
        tp_sum = sum(s[0] for s in stats.values())
        fp_sum = sum(s[1] for s in stats.values())
        fn_sum = sum(s[2] for s in stats.values())
        micro_p = tp_sum / (tp_sum + fp_sum)
        micro_r = tp_sum / (tp_sum + fn_sum)
        per_p = [s[0] / (s[0] + s[1]) if s[0] + s[1] else 0.0 for s in stats.values()]
        per_r = [s[0] / (s[0] + s[2]) if s[0] + s[2] else 0.0 for s in stats.values()]

        assert mm.micro_precision == pytest.approx(micro_p, abs=1e-12)
        assert mm.micro_recall == pytest.approx(micro_r, abs=1e-12)
        assert mm.macro_precision == pytest.approx(np.mean(per_p), abs=1e-12)
        assert mm.macro_recall == pytest.approx(np.mean(per_r), abs=1e-12)

    def test_micro_equals_accuracy_for_single_label_multiclass(self):
        rng = np.random.default_rng(31)
        classes = ("a", "b", "c")
        pairs = [(classes[rng.integers(3)], classes[rng.integers(3)]) for _ in range(200)]
        cm = ConfusionMatrix.from_pairs(pairs, classes)
        mm = micro_macro(cm)
        assert mm.micro_precision == pytest.approx(accuracy(cm), abs=1e-12)
        assert mm.micro_recall == pytest.approx(accuracy(cm), abs=1e-12)


class TestRoc:
    def test_perfect_separation(self):
        scored = [(1, 0.9), (1, 0.8), (0, 0.2), (0, 0.1)]
        curve = roc(scored)
        assert curve.auc == 1.0

    def test_chance_level_for_independent_scores(self):
        rng = np.random.default_rng(101)
        scored = [(int(rng.integers(2)), float(rng.uniform())) for _ in range(6000)]
        assert roc(scored).auc == pytest.approx(0.5, abs=0.03)

    def test_trapezoid_equals_pairwise_statistic(self):
        rng = np.random.default_rng(7)
        for trial in range(20):
            n = int(rng.integers(10, 120))
            scored = [
                (int(rng.integers(2)), float(rng.choice([0.1, 0.3, 0.5, 0.7, round(rng.uniform(), 3)])))
                for _ in range(n)
            ]
            if not any(lab == 1 for lab, _ in scored) or not any(lab == 0 for lab, _ in scored):
                continue
            assert roc(scored).auc == pytest.approx(brute_force_auc(scored), abs=1e-9)

    def test_curve_is_monotone_with_endpoints(self):
        rng = np.random.default_rng(13)
        scored = [(int(rng.integers(2)), float(rng.uniform())) for _ in range(100)]
        curve = roc(scored)
        assert (np.diff(curve.fpr) >= 0).all()
        assert (np.diff(curve.tpr) >= 0).all()
        assert (curve.fpr[0], curve.tpr[0]) == (0.0, 0.0)
        assert (curve.fpr[-1], curve.tpr[-1]) == (1.0, 1.0)

    def test_single_class_rejected(self):
        with pytest.raises(InvalidInputError):
            roc([(1, 0.5), (1, 0.6)])

    def test_csv_export_shape(self):
        curve = roc([(1, 0.9), (0, 0.1)])
        lines = roc_to_csv(curve).strip().splitlines()
        assert lines[0] == "threshold,fpr,tpr"
        assert len(lines) == len(curve) + 1


class TestTprAtFpr:
    def test_perfect_classifier_hits_one_everywhere(self):
        curve = roc([(1, 0.9), (1, 0.8), (0, 0.2)])
        for target in (0.0, 1e-3, 0.5, 1.0):
            assert tpr_at_fpr(curve, target) == 1.0

    def test_target_one_gives_full_recall(self):
        rng = np.random.default_rng(3)
        scored = [(int(rng.integers(2)), float(rng.uniform())) for _ in range(50)]
        assert tpr_at_fpr(roc(scored), 1.0) == 1.0

    def test_hand_walked_step_curve(self):
        # 5 positives scoring 0.9 .. 0.5, 5 negatives scoring 0.55 .. 0.15.
        scored = [(1, 0.9), (1, 0.8), (1, 0.7), (1, 0.6), (1, 0.5)]
        scored += [(0, 0.55), (0, 0.45), (0, 0.35), (0, 0.25), (0, 0.15)]
        curve = roc(scored)
        # FPR 0 is achievable down to threshold 0.6 where TPR is 4/5.
        assert tpr_at_fpr(curve, 0.0) == pytest.approx(0.8)
        # One tolerated false positive (FPR 0.2) unlocks all positives.
        assert tpr_at_fpr(curve, 0.2) == pytest.approx(1.0)
        # Between the steps the lower step holds.
        assert tpr_at_fpr(curve, 0.19) == pytest.approx(0.8)

    def test_target_below_smallest_achievable_uses_zero_fpr_point(self):
        scored = [(1, 0.9), (0, 0.8), (1, 0.7), (0, 0.1)]
        curve = roc(scored)
        assert tpr_at_fpr(curve, 1e-6) == pytest.approx(0.5)
        assert tpr_at_fpr(curve, -1.0) == pytest.approx(0.5)


@given(st.permutations(range(40)))
@settings(max_examples=25, deadline=None)
def test_metric_permutation_invariance(perm):
    rng = np.random.default_rng(5)
    base = [("malware" if rng.integers(2) else "benign", "malware" if rng.integers(2) else "benign") for _ in range(40)]
    shuffled = [base[i] for i in perm]
    cm_a = ConfusionMatrix.from_pairs(base, ("malware", "benign"))
    cm_b = ConfusionMatrix.from_pairs(shuffled, ("malware", "benign"))
    np.testing.assert_array_equal(cm_a.counts, cm_b.counts)
