mod common;

use common::*;
use palmkit::dataset::synth_generate;
use palmkit::features::{extract_features, SpectralFeature};
use palmkit::fusion::{argmin, decide, feature_distance, identify, normalize, raw_distances};
use palmkit::gallery::{build_template, load_gallery, save_gallery, Fingerprint};
use palmkit::wavelet::WaveletParams;
use palmkit::{Corpus, DistanceMode, Error, Gallery, GalleryError, LinePipelineParams, PipelineParams, SampleFeatures, Template};
use rand::seq::SliceRandom;
use rand::Rng;

fn small_params() -> PipelineParams {
    PipelineParams { line: LinePipelineParams::default(), wavelet: WaveletParams { levels: 2, grid: 4 } }
}

fn random_features(r: &mut impl Rng, fp: Fingerprint) -> SampleFeatures {
    let line = (0..fp.line_len()).map(|_| r.random::<f64>()).collect();
    let wavelet = (0..fp.wavelet_len()).map(|_| r.random::<f64>()).collect();
    SampleFeatures {
        line: SpectralFeature::from_concatenated(line).unwrap(),
        wavelet: SpectralFeature::from_concatenated(wavelet).unwrap(),
        fingerprint: fp,
    }
}

fn random_gallery(r: &mut impl Rng, n: usize, fp: Fingerprint) -> Gallery {
    let templates = (0..n)
        .map(|i| {
            let f = random_features(r, fp);
            Template { class_id: format!("c{i:02}"), line: f.line, wavelet: f.wavelet, n_train: 1 + i % 3, fingerprint: fp }
        })
        .collect();
    Gallery::from_templates(fp, templates).unwrap()
}

/// Straight-line rendering of mean normalization, fused sum and
/// first-minimum selection.
fn brute_decide(dl: &[f64], dw: &[f64]) -> (Vec<f64>, usize) {
    let n = dl.len() as f64;
    let mut sl = 0.0;
    let mut sw = 0.0;
    for i in 0..dl.len() {
        sl += dl[i];
        sw += dw[i];
    }
    let (ml, mw) = (sl / n, sw / n);
    let mut df = Vec::new();
    for i in 0..dl.len() {
        df.push(dl[i] / ml + dw[i] / mw);
    }
    let mut best = 0;
    for i in 1..df.len() {
        if df[i] < df[best] {
            best = i;
        }
    }
    (df, best)
}

#[test]
fn raw_distances_match_loop_oracle() {
    let mut r = rng(30);
    let fp = Fingerprint::new(32, &small_params()).unwrap();
    let g = random_gallery(&mut r, 10, fp);
    let probe = random_features(&mut r, fp);
    let (dl, dw) = raw_distances(&probe, &g, DistanceMode::Concat).unwrap();
    let (pl, pw) = raw_distances(&probe, &g, DistanceMode::PerBandMean).unwrap();
    for (j, t) in g.templates().iter().enumerate() {
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        assert!((dl[j] - d(probe.line.as_slice(), t.line.as_slice())).abs() < 1e-12);
        assert!((dw[j] - d(probe.wavelet.as_slice(), t.wavelet.as_slice())).abs() < 1e-12);
        let per_band = |a: &SpectralFeature<f64>, b: &SpectralFeature<f64>| {
            let n = a.band_len();
            (0..4).map(|k| d(&a.as_slice()[k * n..(k + 1) * n], &b.as_slice()[k * n..(k + 1) * n])).sum::<f64>() / 4.0
        };
        assert!((pl[j] - per_band(&probe.line, &t.line)).abs() < 1e-12);
        assert!((pw[j] - per_band(&probe.wavelet, &t.wavelet)).abs() < 1e-12);
    }
    assert_eq!(feature_distance(&probe.line, &probe.line, DistanceMode::Concat), 0.0);
}

#[test]
fn raw_distances_reject_foreign_fingerprint() {
    let mut r = rng(31);
    let g = random_gallery(&mut r, 3, Fingerprint::new(32, &small_params()).unwrap());
    let other = PipelineParams { line: LinePipelineParams { edge_quantile: 0.9, ..Default::default() }, ..small_params() };
    let probe = random_features(&mut r, Fingerprint::new(32, &other).unwrap());
    assert!(matches!(raw_distances(&probe, &g, DistanceMode::Concat), Err(Error::Data(_))));
}

#[test]
fn normalized_vectors_have_unit_mean() {
    let mut r = rng(32);
    for _ in 0..500 {
        let n = r.random_range(1..300);
        let d: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1e3)).collect();
        let m = normalize(&d).unwrap();
        let mean = m.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 1e-9);
    }
}

#[test]
fn decide_matches_brute_force_including_ties() {
    let mut r = rng(33);
    for trial in 0..1000 {
        let n = r.random_range(10..=500);
        // Every fourth configuration draws from a handful of values so that
        // exact ties are common.
        let coarse = trial % 4 == 0;
        let mut draw = || if coarse { r.random_range(1..4) as f64 } else { r.random_range(0.0..10.0) };
        let dl: Vec<f64> = (0..n).map(|_| draw()).collect();
        let dw: Vec<f64> = (0..n).map(|_| draw()).collect();
        let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let t = decide(&refs, &dl, &dw).unwrap();
        let (df, best) = brute_decide(&dl, &dw);
        assert_eq!(t.decided, best, "trial {trial}");
        assert_eq!(t.rows.iter().map(|x| x.df).collect::<Vec<_>>(), df);
        assert_eq!(t.tied, df.iter().filter(|&&v| v == df[best]).count());
    }
}

#[test]
fn decision_is_invariant_to_modality_scaling() {
    let mut r = rng(34);
    for _ in 0..300 {
        let n = r.random_range(2..100);
        let dl: Vec<f64> = (0..n).map(|_| r.random_range(0.1..5.0)).collect();
        let dw: Vec<f64> = (0..n).map(|_| r.random_range(0.1..5.0)).collect();
        let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let base = decide(&refs, &dl, &dw).unwrap();
        // Powers of two scale without rounding: scores are bit-identical.
        for (a, b) in [(2.0, 0.25), (1024.0, 1.0), (0.5, 8.0)] {
            let sl: Vec<f64> = dl.iter().map(|v| v * a).collect();
            let sw: Vec<f64> = dw.iter().map(|v| v * b).collect();
            let t = decide(&refs, &sl, &sw).unwrap();
            assert_eq!(t.decided, base.decided);
            assert_eq!(t.rows.iter().map(|x| x.df).collect::<Vec<_>>(), base.rows.iter().map(|x| x.df).collect::<Vec<_>>());
        }
        let (a, b) = (r.random_range(0.01..100.0), r.random_range(0.01..100.0));
        let sl: Vec<f64> = dl.iter().map(|v| v * a).collect();
        let sw: Vec<f64> = dw.iter().map(|v| v * b).collect();
        assert_eq!(decide(&refs, &sl, &sw).unwrap().decided, base.decided);
    }
}

#[test]
fn constant_modality_reduces_to_the_other() {
    let mut r = rng(35);
    for _ in 0..200 {
        let n = r.random_range(2..50);
        let dl: Vec<f64> = (0..n).map(|_| r.random_range(0.1..5.0)).collect();
        let dw = vec![r.random_range(0.1..5.0); n];
        let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let t = decide(&refs, &dl, &dw).unwrap();
        assert_eq!(t.decided, argmin(&dl).unwrap());
        assert_eq!(t.line_only(), argmin(&dl).unwrap());
        let t = decide(&refs, &dw, &dl).unwrap();
        assert_eq!(t.decided, argmin(&dl).unwrap());
    }
}

#[test]
fn all_zero_distances_are_degenerate() {
    assert!(matches!(decide(&["a", "b"], &[0.0, 0.0], &[1.0, 2.0]), Err(Error::DegenerateProbe { .. })));
    assert!(decide(&["a"], &[1.0, 2.0], &[1.0, 2.0]).is_err());
}

#[test]
fn template_averages_sample_features() {
    let c: Corpus = synth_generate(1, 4, 32, 11).unwrap();
    let p = small_params();
    let samples: Vec<_> = c.subjects()[0].samples.iter().collect();
    let t = build_template("s000", &samples, &p).unwrap();
    let feats: Vec<_> = samples.iter().map(|s| extract_features(s, &p).unwrap()).collect();
    for (k, &v) in t.line.as_slice().iter().enumerate() {
        let e = feats.iter().map(|f| f.line.as_slice()[k]).sum::<f64>() / 4.0;
        assert!((v - e).abs() <= 1e-12 * e.abs().max(1e-12));
    }
    for (k, &v) in t.wavelet.as_slice().iter().enumerate() {
        let e = feats.iter().map(|f| f.wavelet.as_slice()[k]).sum::<f64>() / 4.0;
        assert!((v - e).abs() <= 1e-12 * e.abs().max(1e-12));
    }
    assert_eq!(t.n_train, 4);

    let mut shuffled = samples.clone();
    shuffled.shuffle(&mut rng(5));
    shuffled.reverse();
    let u = build_template("s000", &shuffled, &p).unwrap();
    assert!(rel_err(u.line.as_slice(), t.line.as_slice()) < 1e-12);
    assert!(rel_err(u.wavelet.as_slice(), t.wavelet.as_slice()) < 1e-12);
}

#[test]
fn training_sample_probe_scores_zero() {
    let c: Corpus = synth_generate(4, 2, 32, 12).unwrap();
    let p = small_params();
    let fp = Fingerprint::new(32, &p).unwrap();
    let templates = c
        .subjects()
        .iter()
        .map(|s| build_template(s.id.clone(), &[&s.samples[0]], &p).unwrap())
        .collect();
    let g = Gallery::from_templates(fp, templates).unwrap();
    for s in c.subjects() {
        let t = identify(&extract_features(&s.samples[0], &p).unwrap(), &g, DistanceMode::Concat).unwrap();
        assert_eq!(t.decided_class(), s.id);
        assert_eq!(t.decided_df(), 0.0);
        assert_eq!(t.rows.len(), 4);
    }
}

#[test]
fn gallery_round_trip_is_bit_exact() {
    let mut r = rng(36);
    let fp = Fingerprint::new(32, &small_params()).unwrap();
    let g = random_gallery(&mut r, 5, fp);
    let bytes = g.to_bytes();
    let back = Gallery::from_bytes(&bytes).unwrap();
    assert_eq!(back, g);
    assert_eq!(back.to_bytes(), bytes);
    for (a, b) in back.templates().iter().zip(g.templates()) {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a.line.as_slice()), bits(b.line.as_slice()));
        assert_eq!(bits(a.wavelet.as_slice()), bits(b.wavelet.as_slice()));
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.pkgl");
    save_gallery(&g, &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
    assert_eq!(load_gallery::<f64>(&path).unwrap(), g);
}

#[test]
fn damaged_gallery_files_fail_loudly() {
    let mut r = rng(37);
    let fp = Fingerprint::new(32, &small_params()).unwrap();
    let bytes = random_gallery(&mut r, 2, fp).to_bytes();
    let kind = |b: &[u8]| match Gallery::from_bytes(b) {
        Err(Error::Gallery(k)) => k,
        other => panic!("expected a gallery error, got {other:?}"),
    };
    assert!(matches!(kind(&bytes[..bytes.len() - 3]), GalleryError::Truncated));
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(matches!(kind(&extra), GalleryError::TrailingBytes { .. }));
    let mut magic = bytes.clone();
    magic[0] ^= 0xff;
    assert!(matches!(kind(&magic), GalleryError::BadMagic));
    // Flip a byte inside the fingerprint block.
    let mut fpc = bytes.clone();
    fpc[12] ^= 0x01;
    assert!(matches!(kind(&fpc), GalleryError::FingerprintCorrupt));
}

#[test]
fn duplicate_and_mismatched_templates_are_rejected() {
    let mut r = rng(38);
    let fp = Fingerprint::new(32, &small_params()).unwrap();
    let mut g = random_gallery(&mut r, 2, fp);
    let dup = g.templates()[0].clone();
    assert!(matches!(g.insert(dup), Err(GalleryError::DuplicateClass(_))));
    let other = Fingerprint::new(64, &small_params()).unwrap();
    let f = random_features(&mut r, other);
    let t = Template { class_id: "z".into(), line: f.line, wavelet: f.wavelet, n_train: 1, fingerprint: other };
    assert!(matches!(g.insert(t), Err(GalleryError::FingerprintMismatch)));
}
