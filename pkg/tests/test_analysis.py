import numpy as np
import pytest

from recloop.analysis import (ClassifierSpec, Label, LabeledTrial, LinearSvm,
                              chi2_sf, f1_score, knn_predict, loocv_f1,
                              pca_fit_transform, pearson_matrix,
                              rating_to_label, spearman_fisher, t_sf,
                              two_sample_t)

# Reference tail values computed independently at 30 digits (mpmath
# regularized incomplete gamma/beta).
CHI2_REFERENCE = [
    (3.841, 1, 0.0500136837639567),
    (5.991, 2, 0.05001161502657909),
    (7.815, 3, 0.04999390297488389),
    (9.488, 4, 0.04999440557799464),
    (11.07, 5, 0.05000961862240548),
    (18.307, 10, 0.05000058909139812),
    (31.41, 20, 0.050005239202315165),
    (11.982929094546606, 4, 0.01747866136529367),
    (0.5, 1, 0.4795001221869535),
    (2.0, 2, 0.36787944117144233),
]
T_REFERENCE = [
    (2.228, 10, 0.025005885908555684),
    (1.812, 10, 0.05003763103292364),
    (2.086, 20, 0.024998177228720112),
    (1.0, 5, 0.18160873382456133),
    (2.571, 5, 0.024987317341925695),
    (1.96, 1000, 0.02513659247787447),
    (0.0, 7, 0.5),
    (3.0, 3, 0.028834442811218653),
    (-1.5, 8, 0.9139983540240444),
    (12.706, 1, 0.025000401179066593),
]


class TestTailFunctions:
    @pytest.mark.parametrize("x,df,expected", CHI2_REFERENCE)
    def test_chi2_sf_spot_values(self, x, df, expected):
        assert chi2_sf(x, df) == pytest.approx(expected, abs=1e-6)

    @pytest.mark.parametrize("t,df,expected", T_REFERENCE)
    def test_t_sf_spot_values(self, t, df, expected):
        assert t_sf(t, df) == pytest.approx(expected, abs=1e-6)


class TestLabels:
    def test_three_point_classes(self):
        assert rating_to_label(1.0) == Label.LOW
        assert rating_to_label(3.0) == Label.LOW
        assert rating_to_label(4.0) == Label.MID
        assert rating_to_label(6.0) == Label.MID
        assert rating_to_label(7.0) == Label.HIGH
        assert rating_to_label(9.0) == Label.HIGH

    def test_out_of_scale_rejected(self):
        with pytest.raises(ValueError):
            rating_to_label(9.5)


class TestPca:
    def test_line_in_2d_explains_everything(self):
        rng = np.random.default_rng(0)
        t = rng.normal(size=200)
        x = np.stack([t, 2 * t], axis=1)
        with pytest.warns(UserWarning, match="rank"):
            model, _ = pca_fit_transform(x, out_dim=2)
        share = model.explained_variance[0] / model.explained_variance.sum()
        assert share >= 0.999

    def test_isotropic_eigenvalues_close(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(10 ** 4, 2))
        model, _ = pca_fit_transform(x, out_dim=2)
        ratio = model.explained_variance[1] / model.explained_variance[0]
        assert ratio > 0.9

    def test_mean_point_projects_to_origin(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(50, 5))
        model, _ = pca_fit_transform(x, out_dim=2)
        assert np.allclose(model.transform(x.mean(axis=0)), 0.0, atol=1e-12)

    def test_full_rank_projection_preserves_distances(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(40, 2))
        _, proj = pca_fit_transform(x, out_dim=2)
        for i in range(0, 40, 7):
            for j in range(0, 40, 5):
                orig = np.linalg.norm(x[i] - x[j])
                new = np.linalg.norm(proj[i] - proj[j])
                assert new == pytest.approx(orig, abs=1e-9)

    def test_rank_deficient_zero_fills_with_warning(self):
        x = np.tile([1.0, 2.0, 3.0], (5, 1))
        x[:, 0] = np.arange(5)
        with pytest.warns(UserWarning, match="rank"):
            model, proj = pca_fit_transform(x, out_dim=2)
        assert np.allclose(model.components[1], 0.0)
        assert np.allclose(proj[:, 1], 0.0)

    def test_sign_convention(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(60, 4))
        model, _ = pca_fit_transform(x, out_dim=2)
        for comp in model.components:
            assert comp[np.argmax(np.abs(comp))] >= 0


def blobs(n_per_class=12, spread=0.25, seed=0, d=2):
    rng = np.random.default_rng(seed)
    centers = {Label.LOW: np.r_[0.0, 0.0, np.zeros(d - 2)],
               Label.MID: np.r_[3.0, 0.0, np.zeros(d - 2)],
               Label.HIGH: np.r_[0.0, 3.0, np.zeros(d - 2)]}
    trials = []
    for label, center in centers.items():
        for _ in range(n_per_class):
            trials.append(LabeledTrial(
                features=center + rng.normal(0, spread, size=d), label=label))
    return trials


class TestSvm:
    def test_separable_blobs_perfect_training_f1(self):
        trials = blobs()
        x = np.stack([t.features for t in trials])
        labels = [t.label for t in trials]
        svm = LinearSvm().fit(x, labels)
        preds = svm.predict(x)
        assert f1_score(labels, preds) == 1.0

    def test_conflicting_duplicates_no_crash(self):
        x = np.tile([[1.0, 0.0]], (6, 1))
        labels = [Label.LOW, Label.HIGH] * 3
        svm = LinearSvm().fit(x, labels)
        preds = svm.predict(x)
        assert f1_score(labels, preds) < 1.0

    def test_label_permutation_symmetry(self):
        trials = blobs(seed=5)
        x = np.stack([t.features for t in trials])
        labels = [t.label for t in trials]
        perm = {Label.LOW: Label.HIGH, Label.MID: Label.LOW,
                Label.HIGH: Label.MID}
        base = LinearSvm().fit(x, labels).predict(x)
        permuted = LinearSvm().fit(x, [perm[l] for l in labels]).predict(x)
        assert [perm[p] for p in base] == permuted

    def test_single_class_constant_predictor(self):
        x = np.random.default_rng(6).normal(size=(5, 2))
        with pytest.warns(UserWarning, match="single-class"):
            svm = LinearSvm().fit(x, [Label.MID] * 5)
        assert svm.predict(x) == [Label.MID] * 5

    def test_joint_feature_rescaling_invariant(self):
        trials = blobs(seed=7)
        x = np.stack([t.features for t in trials])
        labels = [t.label for t in trials]
        preds_base = LinearSvm().fit(x, labels).predict(x)
        preds_scaled = LinearSvm().fit(x * 53.0, labels).predict(x * 53.0)
        assert preds_base == preds_scaled


class TestKnn:
    def test_k1_returns_nearest_label(self):
        x = np.array([[0.0, 0.0], [5.0, 5.0]])
        labels = [Label.LOW, Label.HIGH]
        assert knn_predict(x, labels, np.array([0.4, 0.1]), k=1) == Label.LOW

    def test_query_on_training_point(self):
        x = np.array([[0.0, 0.0], [5.0, 5.0], [1.0, 1.0]])
        labels = [Label.LOW, Label.HIGH, Label.MID]
        assert knn_predict(x, labels, x[1], k=1) == Label.HIGH

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(40, 3))
        labels = [Label(int(l)) for l in rng.integers(0, 3, size=40)]
        for _ in range(100):
            q = rng.normal(size=3)
            k = int(rng.integers(1, 8))
            got = knn_predict(x, labels, q, k=k)
            dists = np.linalg.norm(x - q, axis=1)
            order = sorted(range(40), key=lambda i: (dists[i], i))
            neighbours = order[:k]
            from collections import Counter
            votes = Counter(labels[i] for i in neighbours)
            best = max(votes.values())
            tied = {l for l, c in votes.items() if c == best}
            expected = next(labels[i] for i in neighbours if labels[i] in tied)
            assert got == expected

    def test_vote_tie_goes_to_nearest(self):
        x = np.array([[1.0, 0], [1.1, 0], [2.0, 0], [2.1, 0]])
        labels = [Label.LOW, Label.LOW, Label.HIGH, Label.HIGH]
        assert knn_predict(x, labels, np.array([0.0, 0.0]), k=4) == Label.LOW

    def test_empty_train_rejected(self):
        with pytest.raises(ValueError):
            knn_predict(np.zeros((0, 2)), [], np.zeros(2), k=1)

    def test_k_capped(self):
        with pytest.raises(ValueError):
            knn_predict(np.zeros((2, 2)), [Label.LOW, Label.MID],
                        np.zeros(2), k=3)


class TestLoocv:
    def test_separable_data_high_f1_both_classifiers(self):
        trials = blobs(n_per_class=10, spread=0.3, seed=9, d=4)
        for kind in ("svm", "knn"):
            f1 = loocv_f1(trials, ClassifierSpec(kind=kind, pca_dim=2))
            assert f1 >= 0.95, f"{kind}: {f1}"

    def test_shuffled_labels_near_chance(self):
        rng = np.random.default_rng(10)
        trials = blobs(n_per_class=30, spread=0.3, seed=10, d=4)
        labels = [t.label for t in trials]
        rng.shuffle(labels)
        shuffled = [LabeledTrial(t.features, l) for t, l in zip(trials, labels)]
        f1 = loocv_f1(shuffled, ClassifierSpec(kind="knn"))
        assert abs(f1 - 1 / 3) <= 0.15

    def test_needs_three_trials(self):
        with pytest.raises(ValueError):
            loocv_f1(blobs(n_per_class=1)[:2], ClassifierSpec())

    def test_trial_order_invariance_without_ties(self):
        trials = blobs(n_per_class=8, spread=0.4, seed=11, d=3)
        spec = ClassifierSpec(kind="knn", k=3)
        f1 = loocv_f1(trials, spec)
        rng = np.random.default_rng(12)
        for _ in range(3):
            perm = rng.permutation(len(trials))
            assert loocv_f1([trials[i] for i in perm], spec) == f1


class TestF1:
    def test_absent_class_scores_zero(self):
        y = [Label.LOW] * 4
        assert f1_score(y, y) == pytest.approx(1 / 3)

    def test_micro_average(self):
        y_true = [Label.LOW, Label.MID, Label.HIGH, Label.LOW]
        y_pred = [Label.LOW, Label.MID, Label.LOW, Label.LOW]
        assert f1_score(y_true, y_pred, average="micro") == 0.75


class TestSpearmanFisher:
    def test_monotone_series_rho_one(self):
        x = np.arange(10.0)
        row = spearman_fisher([(x, x ** 3)])
        assert row.mean_r == pytest.approx(1.0)

    def test_reversed_series_flips_sign(self):
        x = np.arange(10.0)
        y = np.random.default_rng(0).normal(size=10)
        a = spearman_fisher([(x, y)])
        b = spearman_fisher([(x, -y)])
        assert a.mean_r == pytest.approx(-b.mean_r)
        assert abs(a.mean_r) == pytest.approx(abs(b.mean_r))

    def test_fisher_combination_example(self):
        # two subjects with p = 0.05 each: the combined statistic and the
        # chi-square survival value were derived independently at 30 digits
        stat = -2.0 * (np.log(0.05) + np.log(0.05))
        assert stat == pytest.approx(11.982929094546606, abs=1e-9)
        assert chi2_sf(stat, 4) == pytest.approx(0.017478661367769956, abs=1e-9)

    def test_constant_series_skipped(self):
        x = np.arange(5.0)
        with pytest.warns(UserWarning, match="skipped"):
            row = spearman_fisher([(x, np.ones(5)), (x, x)])
        assert row.n_subjects == 1

    def test_all_constant_rejected(self):
        x = np.arange(5.0)
        with pytest.warns(UserWarning):
            with pytest.raises(ValueError):
                spearman_fisher([(x, np.ones(5))])

    def test_short_series_rejected(self):
        with pytest.raises(ValueError):
            spearman_fisher([(np.arange(2.0), np.arange(2.0))])

    def test_fisher_all_ones_gives_one(self):
        # p_i = 1 -> statistic 0 -> combined p = 1
        assert chi2_sf(0.0, 4) == 1.0


class TestPearsonMatrix:
    def test_self_correlation_is_one(self):
        rng = np.random.default_rng(2)
        table = rng.normal(size=(30, 3))
        r, p, masked = pearson_matrix(table)
        assert np.allclose(np.diag(r), 1.0)
        assert np.allclose(np.diag(masked), 1.0)

    def test_affine_relation_r_one(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=25)
        table = np.stack([x, 2 * x + 1], axis=1)
        r, _, _ = pearson_matrix(table)
        assert r[0, 1] == pytest.approx(1.0)

    def test_independent_noise_mostly_masked(self):
        hits = 0
        for seed in range(40):
            rng = np.random.default_rng(seed)
            table = rng.normal(size=(20, 2))
            r, _, masked = pearson_matrix(table, alpha=0.01)
            if abs(r[0, 1]) >= 0.6:
                hits += 1
        assert hits <= 2

    def test_zero_variance_column_masked(self):
        rng = np.random.default_rng(4)
        table = np.stack([rng.normal(size=10), np.full(10, 3.0)], axis=1)
        r, p, masked = pearson_matrix(table)
        assert np.isnan(masked[0, 1]) and np.isnan(masked[1, 1])


class TestTwoSampleT:
    def test_identical_groups_t_zero_p_one(self):
        t, p = two_sample_t([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert t == 0.0
        assert p == 1.0

    def test_constant_equal_groups(self):
        t, p = two_sample_t([2.0, 2.0], [2.0, 2.0])
        assert (t, p) == (0.0, 1.0)

    def test_separated_groups_tiny_p(self):
        rng = np.random.default_rng(5)
        a = rng.normal(0.0, 0.01, size=4)
        b = rng.normal(1.0, 0.01, size=4)
        t, p = two_sample_t(a, b)
        assert p < 0.001

    def test_matches_textbook_formula(self):
        rng = np.random.default_rng(6)
        a = rng.normal(0, 1, size=12)
        b = rng.normal(0.4, 1.3, size=9)
        t, p = two_sample_t(a, b)
        n1, n2 = len(a), len(b)
        sp2 = ((n1 - 1) * np.var(a, ddof=1) + (n2 - 1) * np.var(b, ddof=1)) \
            / (n1 + n2 - 2)
        expected_t = (a.mean() - b.mean()) / np.sqrt(sp2 * (1 / n1 + 1 / n2))
        assert t == pytest.approx(expected_t)
        from scipy.stats import ttest_ind
        t_ref, p_ref = ttest_ind(a, b)
        assert t == pytest.approx(float(t_ref))
        assert p == pytest.approx(float(p_ref), abs=1e-12)

    def test_groups_need_two_values(self):
        with pytest.raises(ValueError):
            two_sample_t([1.0], [1.0, 2.0])
