use addl::bundle::{decode_bundle, encode_bundle};
use addl::formats::{decode_bin, encode_bin, parse_csv, to_csv};
use addl::pipeline::{self, TrainConfig};
use addl::{load_dataset, load_model, save_dataset, save_model, DatasetFormat};
use addl_core::dataset::synth_generate;
use addl_core::{Hyperparams, LabeledDataset, Matrix, Serial, TrainOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dataset(seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // mix magnitudes so the text form has to carry every bit
    let x = Matrix::from_fn(8, 20, |_, _| rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-12..12)));
    let labels = (0..20).map(|j| j % 4).collect();
    LabeledDataset::new(x, labels, 4).unwrap()
}

fn bits(m: &Matrix) -> Vec<u64> {
    m.iter().map(|v| v.to_bits()).collect()
}

#[test]
fn datasets_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..5 {
        let ds = random_dataset(seed);
        for fmt in [DatasetFormat::Csv, DatasetFormat::Bin] {
            let path = dir.path().join(format!("d{seed}.{}", fmt.extension()));
            save_dataset(&ds, &path, fmt).unwrap();
            let back = load_dataset(&path, fmt).unwrap();
            assert_eq!(bits(back.features()), bits(ds.features()));
            assert_eq!(back.labels(), ds.labels());
            assert_eq!(back.class_count(), ds.class_count());
        }
        assert_eq!(parse_csv(&to_csv(&ds)).unwrap(), ds);
        assert_eq!(decode_bin(&encode_bin(&ds)).unwrap(), ds);
    }
}

#[test]
fn format_follows_extension() {
    assert_eq!(DatasetFormat::from_path("a/b.bin".as_ref()), DatasetFormat::Bin);
    assert_eq!(DatasetFormat::from_path("a/b.csv".as_ref()), DatasetFormat::Csv);
}

fn trained(parallel: bool, unit_norm: bool, pca_energy: Option<f64>) -> addl::Bundle {
    let ds = synth_generate(3, 4, 20, 15, 0.01, 21).unwrap();
    let cfg = TrainConfig { hyper: Hyperparams { seed: 3, ..Hyperparams::default() }, unit_norm, pca_energy, parallel };
    pipeline::fit(&ds, &cfg).unwrap().bundle
}

#[test]
fn bundles_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for (unit_norm, pca) in [(false, None), (true, Some(0.95))] {
        let bundle = trained(false, unit_norm, pca);
        let path = dir.path().join("m.addl");
        save_model(&bundle, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, bundle);
        for (a, b) in back.model.d.iter().chain(&back.model.p).chain(&back.model.w).zip(
            bundle.model.d.iter().chain(&bundle.model.p).chain(&bundle.model.w),
        ) {
            assert_eq!(bits(a), bits(b));
        }
        assert_eq!(encode_bundle(&back).unwrap(), encode_bundle(&bundle).unwrap());
        assert_eq!(decode_bundle(&encode_bundle(&bundle).unwrap()).unwrap(), bundle);
    }
}

#[test]
fn parallel_and_serial_training_agree_bit_for_bit() {
    let a = trained(false, false, None);
    let b = trained(true, false, None);
    assert_eq!(encode_bundle(&a).unwrap(), encode_bundle(&b).unwrap());

    let ds = synth_generate(4, 3, 16, 10, 0.02, 5).unwrap();
    let hyper = Hyperparams { seed: 9, ..Hyperparams::default() };
    let opts = TrainOptions { record_trace: true, parallel_classes: true };
    let serial = addl_core::train_with(&ds, hyper, opts, &Serial, &addl_core::NoClock).unwrap();
    let rayon = addl_core::train_with(&ds, hyper, opts, &addl::RayonExecutor, &addl_core::NoClock).unwrap();
    assert_eq!(serial.model, rayon.model);
    assert_eq!(serial.codes, rayon.codes);
    assert_eq!(serial.trace, rayon.trace);
}

#[test]
fn preprocessing_is_replayed_at_evaluation() {
    let ds = synth_generate(3, 4, 20, 15, 0.01, 21).unwrap();
    let bundle = trained(false, true, Some(0.95));
    assert!(bundle.preprocess.pca.is_some());
    assert_eq!(bundle.input_dim(), 20);
    assert!(bundle.model.dim < 20);
    let eval = pipeline::evaluate(&bundle, &ds, false).unwrap();
    assert_eq!(eval.predictions.len(), ds.len());
    let wrong = LabeledDataset::new(Matrix::zeros(7, 3), vec![0, 1, 2], 3).unwrap();
    let err = pipeline::evaluate(&bundle, &wrong, false).unwrap_err().to_string();
    assert!(err.contains("20") && err.contains('7'), "{err}");
}
