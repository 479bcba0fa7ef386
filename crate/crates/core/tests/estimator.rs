mod common;

use common::*;
use rand::Rng;
use structural_confidence::estimator::*;
use structural_confidence::metrics::auroc;

fn split(rows: &[Vec<f64>], labels: &[bool], at: usize) -> (FeatureMatrix, Vec<bool>, FeatureMatrix, Vec<bool>) {
    (
        FeatureMatrix::from_rows(&rows[..at]).unwrap(),
        labels[..at].to_vec(),
        FeatureMatrix::from_rows(&rows[at..]).unwrap(),
        labels[at..].to_vec(),
    )
}

fn small_cfg() -> TrainConfig {
    TrainConfig { n_trees: 30, ..Default::default() }
}

#[test]
fn separable_synthetic_is_learned() {
    let (rows, labels) = separable_synthetic(7, 1000);
    let (xtr, ytr, xte, yte) = split(&rows, &labels, 700);
    let model = train(&xtr, &ytr, &TrainConfig::default()).unwrap();
    let scores = model.predict_batch(xte.iter_rows()).unwrap();
    let auc = auroc(&scores, &yte).unwrap();
    assert!(auc >= 0.99, "held-out AUROC {auc}");
}

#[test]
fn shuffled_labels_are_not_learned() {
    let (rows, labels) = separable_synthetic(7, 1000);
    let labels = shuffled(&labels, 99);
    let (xtr, ytr, xte, yte) = split(&rows, &labels, 700);
    let model = train(&xtr, &ytr, &TrainConfig::default()).unwrap();
    let scores = model.predict_batch(xte.iter_rows()).unwrap();
    let auc = auroc(&scores, &yte).unwrap();
    assert!((0.40..=0.60).contains(&auc), "held-out AUROC {auc}");
}

#[test]
fn training_loss_never_increases() {
    let (rows, labels) = separable_synthetic(3, 400);
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let (_, history) = train_traced(&x, &labels, &TrainConfig::default()).unwrap();
    assert_eq!(history.len(), 201);
    for (round, pair) in history.windows(2).enumerate() {
        assert!(pair[1] <= pair[0], "round {round}: {} -> {}", pair[0], pair[1]);
    }
}

#[test]
fn model_files_are_byte_deterministic() {
    let (rows, labels) = separable_synthetic(4, 300);
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let a = train(&x, &labels, &small_cfg()).unwrap().to_json();
    let b = train(&x, &labels, &TrainConfig { seed: 1234, ..small_cfg() }).unwrap().to_json();
    assert_eq!(a, b);
}

#[test]
fn reloaded_model_predicts_identically() {
    let (rows, labels) = separable_synthetic(8, 300);
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let model = train(&x, &labels, &small_cfg()).unwrap();
    let reloaded = ConfidenceModel::from_json(&model.to_json()).unwrap();
    let mut r = rng(17);
    for _ in 0..100 {
        let v: Vec<f64> = (0..70).map(|_| r.random_range(-2.0..2.0)).collect();
        assert_eq!(model.predict(&v).unwrap().to_bits(), reloaded.predict(&v).unwrap().to_bits());
    }
}

#[test]
fn batch_equals_single_prediction() {
    let (rows, labels) = separable_synthetic(9, 200);
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let model = train(&x, &labels, &small_cfg()).unwrap();
    let batch = model.predict_batch(x.iter_rows()).unwrap();
    for (row, p) in x.iter_rows().zip(&batch) {
        assert_eq!(model.predict(row).unwrap(), *p);
        assert!(*p > 0.0 && *p < 1.0);
    }
}

#[test]
fn feature_subset_equals_physical_restriction() {
    let (rows, labels) = separable_synthetic(12, 400);
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let subset: Vec<usize> = (0..48).collect();
    let cfg = TrainConfig { feature_subset: Some(subset.clone()), ..small_cfg() };
    let masked = train(&x, &labels, &cfg).unwrap();
    let restricted_x = x.select_columns(&subset).unwrap();
    let restricted = train(&restricted_x, &labels, &small_cfg()).unwrap();

    assert_eq!(masked.base_score, restricted.base_score);
    for (a, b) in masked.trees.iter().zip(&restricted.trees) {
        for (na, nb) in a.nodes.iter().zip(&b.nodes) {
            match (na, nb) {
                (
                    Node::Split { feature: fa, threshold: ta, left: la, right: ra },
                    Node::Split { feature: fb, threshold: tb, left: lb, right: rb },
                ) => {
                    assert_eq!(*fa, subset[*fb]);
                    assert_eq!((ta, la, ra), (tb, lb, rb));
                }
                (Node::Leaf { value: va }, Node::Leaf { value: vb }) => assert_eq!(va, vb),
                _ => panic!("tree shapes differ"),
            }
        }
    }
    for (full, cut) in x.iter_rows().zip(restricted_x.iter_rows()) {
        assert_eq!(masked.predict(full).unwrap(), restricted.predict(cut).unwrap());
    }
}

#[test]
fn pca_matches_dense_covariance_oracle() {
    let mut r = rng(50);
    let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..10).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let p = fit_pca(&x, 10).unwrap();
    let want = oracle_covariance_eigenvalues(&rows);
    for (g, w) in p.explained_variance.iter().zip(&want) {
        assert!((g - w).abs() < 1e-6, "{g} vs {w}");
    }
    for pair in p.explained_variance.windows(2) {
        assert!(pair[0] >= pair[1]);
    }
    for i in 0..10 {
        for j in 0..10 {
            let d: f64 = p.component(i).iter().zip(p.component(j)).map(|(a, b)| a * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((d - want).abs() < 1e-6);
        }
        let c = p.component(i);
        let pivot = c.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        assert!(pivot > 0.0);
    }
    for row in x.iter_rows() {
        let back = p.reconstruct(&p.project(row).unwrap()).unwrap();
        for (a, b) in back.iter().zip(row) {
            assert!((a - b).abs() < 1e-5);
        }
    }
}

#[test]
fn kmeans_recovers_separated_blobs() {
    let mut r = rng(77);
    let centers = [[-5.0, 0.0], [5.0, 3.0]];
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|i| {
            let c = centers[i % 2];
            vec![c[0] + r.random_range(-0.5..0.5), c[1] + r.random_range(-0.5..0.5)]
        })
        .collect();
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let model = KMeansOutlier::fit(&x, 2, 100, 42).unwrap();
    for c in &centers {
        let hit = model
            .centroids
            .iter()
            .any(|m| (m[0] - c[0]).abs() < 0.1 && (m[1] - c[1]).abs() < 0.1);
        assert!(hit, "{:?} not recovered in {:?}", c, model.centroids);
    }
    let probe = FeatureMatrix::from_rows(&[model.centroids[0].clone()]).unwrap();
    assert_eq!(model.score(&probe).unwrap(), vec![0.0]);
    let scores = kmeans_outlier_score(&x, &x, 2, 100, 42).unwrap();
    assert!(scores.iter().all(|&s| s <= 0.0));
}
