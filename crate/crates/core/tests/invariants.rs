use approx::assert_abs_diff_eq;
use gessvdd::data::Dataset;
use gessvdd::eval::{
    cv_folds, inject_noise, metrics, stratified_split, train_count, FeatureBounds, OneClassTask, SplitPlan,
};
use gessvdd::graph::{laplacian_from_weights, laplacian_knn, laplacian_total, scatter_matrix};
use gessvdd::linalg::sym_eig;
use gessvdd::{train, Hyperparams, Variant};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-5.0..5.0f64, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn sized_matrix() -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..6, 8usize..30).prop_flat_map(|(r, c)| matrix(r, c))
}

fn weights(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(0.0..1.0f64, n).prop_map(|v| {
        let v = DVector::from_vec(v);
        let s = v.sum();
        if s > 0.0 { v / s } else { DVector::from_element(v.len(), 1.0 / v.len() as f64) }
    })
}

fn labeled(classes: usize) -> impl Strategy<Value = Dataset> {
    (2usize..4, prop::collection::vec(2usize..12, classes)).prop_flat_map(|(dim, sizes)| {
        let n: usize = sizes.iter().sum();
        matrix(dim, n).prop_map(move |x| {
            let labels = sizes
                .iter()
                .enumerate()
                .flat_map(|(c, &k)| std::iter::repeat_n(format!("c{c}"), k))
                .collect();
            Dataset::new("p", x, labels).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_laplacian_is_centered_psd(alpha in (2usize..30).prop_flat_map(weights)) {
        let l = laplacian_from_weights(&alpha).unwrap();
        prop_assert!(l.max_row_sum() < 1e-12);
        prop_assert!(sym_eig(&l.matrix).unwrap().values[0] > -1e-10);
    }

    #[test]
    fn knn_laplacian_is_symmetric_psd(x in sized_matrix(), k in 1usize..6) {
        let l = laplacian_knn(&x, k).unwrap();
        prop_assert!((&l.matrix - l.matrix.transpose()).amax() == 0.0);
        prop_assert!(l.max_row_sum() < 1e-12);
        prop_assert!(sym_eig(&l.matrix).unwrap().values[0] > -1e-9);
    }

    #[test]
    fn total_scatter_is_covariance(x in sized_matrix()) {
        let n = x.ncols();
        let s = scatter_matrix(&x, &laplacian_total(n).matrix).unwrap();
        let mean = x.column_mean();
        let mut centered = x.clone();
        for mut c in centered.column_iter_mut() {
            c -= &mean;
        }
        let cov = &centered * centered.transpose();
        prop_assert!((s - cov).amax() < 1e-9);
    }

    #[test]
    fn trained_projection_has_orthonormal_rows(
        x in sized_matrix(),
        variant in prop::sample::select(Variant::all()),
        seed in 0u64..4,
    ) {
        let mut p = Hyperparams::new(variant);
        p.d = 1 + (seed as usize % x.nrows().min(2));
        p.c = 0.4;
        p.iterations = 2;
        p.seed = seed;
        match train(&x, &p) {
            Ok(model) => {
                let q = &model.projection;
                let gram = q * q.transpose();
                prop_assert!((gram - DMatrix::identity(p.d, p.d)).amax() < 1e-8);
            }
            // rank-deficient graphs on tiny random samples are legitimate failures
            Err(e) => {
                let expected = e.is_numeric() || matches!(e, gessvdd::Error::RankDeficient { .. });
                prop_assert!(expected, "unexpected error {}", e);
            }
        }
    }

    #[test]
    fn metric_identities(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 2..60)) {
        let (pred, truth): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
        match metrics(&pred, &truth) {
            Ok(m) => {
                assert_abs_diff_eq!(m.tpr + m.fnr, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(m.tnr + m.fpr, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(m.gmean * m.gmean, m.tpr * m.tnr, epsilon = 1e-12);
                prop_assert_eq!(m.tp + m.fn_ + m.tn + m.fp, pred.len());
            }
            Err(_) => prop_assert!(truth.iter().all(|&t| t) || truth.iter().all(|&t| !t)),
        }
    }

    #[test]
    fn noise_stays_in_positive_box(data in labeled(2), seed in any::<u64>()) {
        let members = data.members(0);
        let out = inject_noise(&data, &members, seed).unwrap();
        let bounds = FeatureBounds::of_columns(&data.columns(&members)).unwrap();
        prop_assert!(bounds.contains(&out.features));
        prop_assert_eq!(out.labels, data.labels);
    }

    #[test]
    fn splits_partition_each_class(data in labeled(3), seed in 0u64..1000) {
        let plan = SplitPlan { seed, ..SplitPlan::default() };
        for split in stratified_split(&data, &plan).unwrap() {
            let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..data.len()).collect::<Vec<_>>());
            for (c, &count) in data.class_counts().iter().enumerate() {
                let k = split.train.iter().filter(|&&i| data.labels[i] == c).count();
                prop_assert_eq!(k, train_count(count, plan.train_fraction));
            }
        }
    }

    #[test]
    fn folds_fit_on_positives_and_cover_training(data in labeled(3), seed in 0u64..1000) {
        let task = OneClassTask::new(data.clone(), "c0").unwrap();
        let train: Vec<usize> = (0..data.len()).collect();
        prop_assume!(task.positives(&train).len() >= 2);
        let folds = cv_folds(&task, &train, 2, seed).unwrap();
        let mut seen: Vec<usize> = folds.iter().flat_map(|f| f.validate.clone()).collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, train);
        for f in &folds {
            prop_assert!(f.fit.iter().all(|&i| task.is_positive(i)));
            prop_assert!(f.fit.iter().all(|i| !f.validate.contains(i)));
        }
    }
}
