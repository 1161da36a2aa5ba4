mod common;

use std::collections::BTreeSet;
use std::fs;

use palmkit::dataset::{choose_training, load_corpus, read_gray, split, split_indices, synth_generate, write_corpus, ImageFormat};
use palmkit::features::extract_features;
use palmkit::fusion::{feature_distance, DistanceMode};
use palmkit::{Band, Corpus, Error, PipelineParams};

fn bits(c: &Corpus) -> Vec<u64> {
    c.samples().flat_map(|s| s.bands().iter().flat_map(|b| b.data().iter().map(|v| v.to_bits())).collect::<Vec<_>>()).collect()
}

#[test]
fn synth_is_deterministic_and_seed_sensitive() {
    let a: Corpus = synth_generate(3, 2, 32, 42).unwrap();
    let b: Corpus = synth_generate(3, 2, 32, 42).unwrap();
    let c: Corpus = synth_generate(3, 2, 32, 43).unwrap();
    assert_eq!(bits(&a), bits(&b));
    assert_ne!(bits(&a), bits(&c));
    assert_eq!(a.subjects().len(), 3);
    assert_eq!(a.n_samples(), 6);
    // Growing the corpus does not change existing subjects.
    let big: Corpus = synth_generate(5, 2, 32, 42).unwrap();
    assert_eq!(big.subjects()[..3], a.subjects()[..]);
    for s in a.samples() {
        for band in s.bands() {
            assert!(band.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert!(band.data().iter().all(|&v| (v * 255.0).round() / 255.0 == v));
        }
    }
}

#[test]
fn synth_rejects_bad_geometry() {
    assert!(synth_generate::<f64>(2, 2, 100, 1).is_err());
    assert!(synth_generate::<f64>(0, 2, 32, 1).is_err());
    assert!(synth_generate::<f64>(2, 0, 32, 1).is_err());
    assert!(synth_generate::<f64>(1, 1, 8, 1).is_ok());
}

#[test]
fn same_subject_samples_are_closer_than_other_subjects() {
    let c: Corpus = synth_generate(6, 4, 128, 42).unwrap();
    let p = PipelineParams::default();
    let feats: Vec<Vec<_>> = c.subjects().iter().map(|s| s.samples.iter().map(|x| extract_features(x, &p).unwrap()).collect()).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    for modality in 0..2 {
        let d = |a: &palmkit::SampleFeatures, b: &palmkit::SampleFeatures| {
            if modality == 0 { feature_distance(&a.line, &b.line, DistanceMode::Concat) } else { feature_distance(&a.wavelet, &b.wavelet, DistanceMode::Concat) }
        };
        let (mut within, mut between) = (Vec::new(), Vec::new());
        for (i, fi) in feats.iter().enumerate() {
            for (j, fj) in feats.iter().enumerate() {
                for (a, x) in fi.iter().enumerate() {
                    for (b, y) in fj.iter().enumerate() {
                        if i == j && a < b {
                            within.push(d(x, y));
                        } else if i < j {
                            between.push(d(x, y));
                        }
                    }
                }
            }
        }
        assert!(mean(&within) < 0.8 * mean(&between), "modality {modality}: {} vs {}", mean(&within), mean(&between));
    }
}

#[test]
fn write_then_load_round_trips_exactly() {
    for format in [ImageFormat::Png, ImageFormat::Pgm] {
        let c: Corpus = synth_generate(3, 4, 32, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(write_corpus(&c, dir.path(), format).unwrap(), 3 * 4 * 4);
        let (back, report): (Corpus, _) = load_corpus(dir.path()).unwrap();
        assert!(report.is_clean());
        assert_eq!(back.subjects().len(), 3);
        for (a, b) in back.samples().zip(c.samples()) {
            assert_eq!(a.subject_id, b.subject_id);
            assert_eq!(a.sample_index, b.sample_index);
            assert_eq!(a.bands(), b.bands());
        }
        let f = dir.path().join("s001").join(format!("2_N.{}", format.extension()));
        assert_eq!(read_gray::<f64>(&f).unwrap(), *c.subjects()[1].samples[2].band(Band::Nir));
    }
}

#[test]
fn writing_twice_gives_identical_files() {
    let c: Corpus = synth_generate(2, 2, 32, 8).unwrap();
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_corpus(&c, d1.path(), ImageFormat::Png).unwrap();
    write_corpus(&c, d2.path(), ImageFormat::Png).unwrap();
    for s in ["s000", "s001"] {
        for i in 0..2 {
            for t in ["R", "G", "B", "N"] {
                let rel = format!("{s}/{i}_{t}.png");
                assert_eq!(fs::read(d1.path().join(&rel)).unwrap(), fs::read(d2.path().join(&rel)).unwrap());
            }
        }
    }
}

#[test]
fn missing_band_skips_only_that_sample() {
    let c: Corpus = synth_generate(2, 3, 32, 6).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_corpus(&c, dir.path(), ImageFormat::Png).unwrap();
    fs::remove_file(dir.path().join("s001/1_N.png")).unwrap();
    fs::write(dir.path().join("s000/notes.txt"), "x").unwrap();
    let (back, report): (Corpus, _) = load_corpus(dir.path()).unwrap();
    assert_eq!(back.n_samples(), 5);
    assert_eq!(back.subjects()[1].samples.iter().map(|s| s.sample_index).collect::<Vec<_>>(), vec![0, 2]);
    assert!(report.issues.iter().any(|i| i.path.to_string_lossy().contains("s001") && i.reason.contains('N')), "{:?}", report.issues);
}

#[test]
fn empty_or_missing_root_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_corpus::<f64>(dir.path()), Err(Error::EmptyCorpus(_))));
    assert!(load_corpus::<f64>(&dir.path().join("nope")).is_err());
}

#[test]
fn split_properties() {
    let c: Corpus = synth_generate(5, 12, 8, 1).unwrap();
    for n in [1, 4, 6, 11] {
        for seed in [None, Some(0), Some(42)] {
            let s = split_indices(&c, n, seed).unwrap();
            for (tr, te) in s.train.iter().zip(&s.test) {
                assert_eq!(tr.len(), n);
                assert_eq!(te.len(), 12 - n);
                let all: BTreeSet<usize> = tr.iter().chain(te).copied().collect();
                assert_eq!(all, (0..12).collect());
            }
            assert_eq!(split_indices(&c, n, seed).unwrap(), s);
            if seed.is_none() {
                assert!(s.train.iter().all(|t| *t == (0..n).collect::<Vec<_>>()));
            }
        }
    }
    let a = split_indices(&c, 6, Some(1)).unwrap();
    let b = split_indices(&c, 6, Some(2)).unwrap();
    assert_ne!(a, b);
    assert!(split_indices(&c, 12, None).is_err());
    assert!(split_indices(&c, 0, None).is_err());
    assert_eq!(choose_training(&c, 12, Some(3)).unwrap()[0], (0..12).collect::<Vec<_>>());

    let (train, test) = split(&c, 6, None).unwrap();
    assert_eq!((train.n_samples(), test.n_samples()), (30, 30));
    assert!(train.samples().all(|s| s.sample_index < 6));
    assert!(test.samples().all(|s| s.sample_index >= 6));
}
