mod common;

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fs;

use noisereg_core::data::{feature_column, MinMax, COLUMNS};
use noisereg_core::{load_diabetes, prepare, Error, PrepareOptions};

#[test]
fn canonical_file_shape_and_first_row() {
    let raw = load_diabetes(common::data_path()).unwrap();
    assert_eq!(raw.len(), 442);
    let first = raw.rows[0];
    assert_eq!(first[0], 59.0);
    assert_eq!(first[1], 2.0);
    assert_eq!(first[2], 32.1);
    assert_eq!(first[10], 151.0);
    assert_eq!(feature_column("bmi"), Some(2));
    assert_eq!(feature_column("ltg"), Some(8));
}

#[test]
fn split_is_disjoint_sized_and_scaled() {
    let raw = load_diabetes(common::data_path()).unwrap();
    for seed in [0, 7, 123] {
        let d = prepare(&raw, &PrepareOptions::with_seed(seed)).unwrap();
        assert_eq!(d.train.len(), 40);
        assert_eq!(d.validation.len(), 400);
        let train: HashSet<_> = d.indices_train.iter().collect();
        assert_eq!(train.len(), 40);
        assert!(d.indices_val.iter().all(|i| !train.contains(i)));
        assert_eq!(d.indices_val.iter().collect::<HashSet<_>>().len(), 400);

        for k in 0..2 {
            let xs: Vec<f64> = d.train.iter().map(|s| s.features[k]).collect();
            assert_eq!(xs.iter().cloned().fold(f64::INFINITY, f64::min), -PI);
            assert_eq!(xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max), PI);
        }
        let ys: Vec<f64> = d.train.iter().map(|s| s.target).collect();
        assert_eq!(ys.iter().cloned().fold(f64::INFINITY, f64::min), -1.0);
        assert_eq!(ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
    }
}

#[test]
fn same_seed_same_split_other_seed_other_split() {
    let raw = load_diabetes(common::data_path()).unwrap();
    let a = prepare(&raw, &PrepareOptions::with_seed(3)).unwrap();
    let b = prepare(&raw, &PrepareOptions::with_seed(3)).unwrap();
    let c = prepare(&raw, &PrepareOptions::with_seed(4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.indices_train, c.indices_train);
}

#[test]
fn scaler_is_fitted_on_training_rows_only() {
    let raw = load_diabetes(common::data_path()).unwrap();
    let d = prepare(&raw, &PrepareOptions::with_seed(7)).unwrap();
    let scaler = d.scaler.unwrap();
    let bmi = feature_column("bmi").unwrap();
    let from_train = MinMax::fit(d.indices_train.iter().map(|&i| raw.rows[i][bmi]), -PI, PI).unwrap();
    let from_val = MinMax::fit(d.indices_val.iter().map(|&i| raw.rows[i][bmi]), -PI, PI).unwrap();
    assert_eq!(scaler.features[0], from_train);
    assert_ne!(scaler.features[0], from_val);
    // validation values are not clipped into the training range
    assert!(d.validation.iter().any(|s| s.target.abs() > 1.0 || s.features.iter().any(|x| x.abs() > PI)));
}

#[test]
fn positive_affine_transforms_do_not_change_the_split() {
    let raw = load_diabetes(common::data_path()).unwrap();
    let reference = prepare(&raw, &PrepareOptions::with_seed(11)).unwrap();
    let cols = [feature_column("bmi").unwrap(), feature_column("ltg").unwrap(), 10];
    let means: Vec<f64> = cols.iter().map(|&c| raw.column(c).sum::<f64>() / raw.len() as f64).collect();

    let transforms: [&dyn Fn(usize, f64) -> f64; 2] = [&|_, x| 2.0 * x + 1.0, &|k, x| (x - means[k]) / 7.5];
    for f in transforms {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("variant.tab");
        let mut text = COLUMNS.join("\t") + "\n";
        for row in &raw.rows {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, v)| match cols.iter().position(|&k| k == c) {
                    Some(k) => format!("{}", f(k, *v)),
                    None => format!("{v}"),
                })
                .collect();
            text += &(cells.join("\t") + "\n");
        }
        fs::write(&path, text).unwrap();
        let variant = prepare(&load_diabetes(&path).unwrap(), &PrepareOptions::with_seed(11)).unwrap();
        assert_eq!(variant.indices_train, reference.indices_train);
        for (a, b) in variant
            .train
            .iter()
            .chain(&variant.validation)
            .zip(reference.train.iter().chain(&reference.validation))
        {
            assert!((a.features[0] - b.features[0]).abs() <= 1e-12);
            assert!((a.features[1] - b.features[1]).abs() <= 1e-12);
            assert!((a.target - b.target).abs() <= 1e-12);
        }
    }
}

#[test]
fn load_errors_carry_context() {
    let dir = tempfile::tempdir().unwrap();
    match load_diabetes(dir.path().join("none.tab")) {
        Err(Error::Io { context, .. }) => assert!(context.contains("none.tab")),
        other => panic!("expected io error, got {other:?}"),
    }
    let path = dir.path().join("bad.tab");
    fs::write(&path, format!("{}\n1\t2\t3\t4\t5\t6\t7\t8\t9\t10\t11\n1\t2\t3\t4\t5\t6\t7\t8\tnan?\t10\t11\n", COLUMNS.join("\t"))).unwrap();
    let err = load_diabetes(&path).unwrap_err().to_string();
    assert!(err.contains(":3:") && err.contains("S5"), "{err}");
}
