//! Identification experiments: repeated train/test splits scored three
//! ways (line-only, wavelet-only, fused) and the train-count sweep.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{split_indices, Corpus};
use crate::error::{param, Result};
use crate::features::{extract_all, PipelineParams, SampleFeatures};
use crate::fusion::{csv_err, identify, DistanceMode};
use crate::gallery::{Fingerprint, Gallery, Template};
use crate::palmline::LinePipelineParams;
use crate::scalar::Scalar;
use crate::wavelet::WaveletParams;

/// Feature and matching settings of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub line: LinePipelineParams,
    pub wavelet: WaveletParams,
    pub distance: DistanceMode,
}

impl ExperimentConfig {
    pub fn pipeline(&self) -> PipelineParams {
        PipelineParams { line: self.line, wavelet: self.wavelet }
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub correct: usize,
    pub misidentified: usize,
    pub accuracy: f64,
}

impl Tally {
    fn new(correct: usize, total: usize) -> Self {
        let accuracy = if total == 0 { 0.0 } else { correct as f64 / total as f64 };
        Self { correct, misidentified: total - correct, accuracy }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatResult {
    pub repeat: usize,
    /// `None` for the fixed first-`n_train` split.
    pub split_seed: Option<u64>,
    pub test_probes: usize,
    pub line: Tally,
    pub wavelet: Tally,
    pub hybrid: Tally,
}

/// Mean and sample standard deviation (zero for a single repeat).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub mean: f64,
    pub std: f64,
}

impl AccuracySummary {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, std }
    }
}

/// Decisions for one test probe in one repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub repeat: usize,
    pub subject: String,
    pub sample_index: u32,
    pub line_decision: String,
    pub wavelet_decision: String,
    pub hybrid_decision: String,
    pub hybrid_df: f64,
    pub margin: Option<f64>,
}

impl ProbeRecord {
    pub fn line_correct(&self) -> bool {
        self.line_decision == self.subject
    }

    pub fn wavelet_correct(&self) -> bool {
        self.wavelet_decision == self.subject
    }

    pub fn hybrid_correct(&self) -> bool {
        self.hybrid_decision == self.subject
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub n_train: usize,
    pub repeats: usize,
    pub seed: Option<u64>,
    pub subjects: usize,
    pub side: usize,
    pub runs: Vec<RepeatResult>,
    pub line: AccuracySummary,
    pub wavelet: AccuracySummary,
    pub hybrid: AccuracySummary,
    /// Where the per-probe CSV was written, if anywhere.
    pub scores_csv: Option<String>,
    #[serde(skip)]
    pub probes: Vec<ProbeRecord>,
}

impl ExperimentReport {
    /// Test probes per repeat (constant across repeats).
    pub fn test_probes_per_repeat(&self) -> usize {
        self.runs.first().map_or(0, |r| r.test_probes)
    }

    pub fn write_probe_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "repeat", "subject", "sample_index", "line_decision", "wavelet_decision",
            "hybrid_decision", "line_correct", "wavelet_correct", "hybrid_correct", "hybrid_df", "margin",
        ])
        .map_err(csv_err)?;
        for p in &self.probes {
            w.write_record([
                p.repeat.to_string(),
                p.subject.clone(),
                p.sample_index.to_string(),
                p.line_decision.clone(),
                p.wavelet_decision.clone(),
                p.hybrid_decision.clone(),
                p.line_correct().to_string(),
                p.wavelet_correct().to_string(),
                p.hybrid_correct().to_string(),
                p.hybrid_df.to_string(),
                p.margin.map_or_else(String::new, |m| m.to_string()),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Features of every corpus sample, indexed `[subject][position]`.
pub fn corpus_features<T: Scalar>(
    corpus: &Corpus<T>,
    params: &PipelineParams,
) -> Result<Vec<Vec<SampleFeatures<T>>>> {
    let flat: Vec<_> = corpus.samples().collect();
    let mut features = extract_all(&flat, params)?.into_iter();
    Ok(corpus
        .subjects()
        .iter()
        .map(|s| features.by_ref().take(s.samples.len()).collect())
        .collect())
}

/// Runs `repeats` independent splits. Repeat `r` splits with seed
/// `seed + r`; with `seed = None` every repeat uses the first `n_train`
/// samples of each subject.
pub fn run_experiment<T: Scalar>(
    corpus: &Corpus<T>,
    n_train: usize,
    repeats: usize,
    seed: Option<u64>,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    config.validate()?;
    let features = corpus_features(corpus, &config.pipeline())?;
    run_with_features(corpus, &features, n_train, repeats, seed, config)
}

fn run_with_features<T: Scalar>(
    corpus: &Corpus<T>,
    features: &[Vec<SampleFeatures<T>>],
    n_train: usize,
    repeats: usize,
    seed: Option<u64>,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if repeats == 0 {
        return Err(param("repeats must be at least 1"));
    }
    let fingerprint = Fingerprint::new(corpus.side(), &config.pipeline())?;
    let mut runs = Vec::with_capacity(repeats);
    let mut probes = Vec::new();
    for repeat in 0..repeats {
        let split_seed = seed.map(|s| s.wrapping_add(repeat as u64));
        let split = split_indices(corpus, n_train, split_seed)?;

        let templates = corpus
            .subjects()
            .iter()
            .zip(&split.train)
            .zip(features)
            .map(|((subject, train), feats)| Template::from_features(&subject.id, train.iter().map(|&i| &feats[i])))
            .collect::<Result<Vec<_>>>()?;
        let gallery = Gallery::from_templates(fingerprint, templates)?;

        let jobs: Vec<(usize, usize)> = split
            .test
            .iter()
            .enumerate()
            .flat_map(|(s, test)| test.iter().map(move |&i| (s, i)))
            .collect();
        let records = jobs
            .par_iter()
            .map(|&(s, i)| {
                let table = identify(&features[s][i], &gallery, config.distance)?;
                let subject = &corpus.subjects()[s];
                Ok(ProbeRecord {
                    repeat,
                    subject: subject.id.clone(),
                    sample_index: subject.samples[i].sample_index,
                    line_decision: table.rows[table.line_only()].class_id.clone(),
                    wavelet_decision: table.rows[table.wavelet_only()].class_id.clone(),
                    hybrid_decision: table.decided_class().to_owned(),
                    hybrid_df: table.decided_df().as_f64(),
                    margin: table.margin.map(Scalar::as_f64),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let total = records.len();
        let count = |f: fn(&ProbeRecord) -> bool| records.iter().filter(|r| f(r)).count();
        runs.push(RepeatResult {
            repeat,
            split_seed,
            test_probes: total,
            line: Tally::new(count(ProbeRecord::line_correct), total),
            wavelet: Tally::new(count(ProbeRecord::wavelet_correct), total),
            hybrid: Tally::new(count(ProbeRecord::hybrid_correct), total),
        });
        probes.extend(records);
    }

    let summary = |f: fn(&RepeatResult) -> f64| AccuracySummary::of(&runs.iter().map(f).collect::<Vec<_>>());
    Ok(ExperimentReport {
        config: *config,
        n_train,
        repeats,
        seed,
        subjects: corpus.subjects().len(),
        side: corpus.side(),
        line: summary(|r| r.line.accuracy),
        wavelet: summary(|r| r.wavelet.accuracy),
        hybrid: summary(|r| r.hybrid.accuracy),
        runs,
        scores_csv: None,
        probes,
    })
}

/// [`run_experiment`] for each training-set size, sharing one feature pass.
pub fn sweep_train_count<T: Scalar>(
    corpus: &Corpus<T>,
    train_counts: &[usize],
    repeats: usize,
    seed: Option<u64>,
    config: &ExperimentConfig,
) -> Result<Vec<ExperimentReport>> {
    if train_counts.is_empty() {
        return Err(param("train_counts must not be empty"));
    }
    config.validate()?;
    let features = corpus_features(corpus, &config.pipeline())?;
    train_counts
        .iter()
        .map(|&n| run_with_features(corpus, &features, n, repeats, seed, config))
        .collect()
}

/// One row of the train-count table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n_train: usize,
    /// Summed over all repeats.
    pub test_samples: usize,
    pub line: f64,
    pub wavelet: f64,
    pub hybrid: f64,
}

pub fn table_rows(reports: &[ExperimentReport]) -> Vec<TableRow> {
    reports
        .iter()
        .map(|r| TableRow {
            n_train: r.n_train,
            test_samples: r.runs.iter().map(|x| x.test_probes).sum(),
            line: r.line.mean,
            wavelet: r.wavelet.mean,
            hybrid: r.hybrid.mean,
        })
        .collect()
}

pub fn format_table(rows: &[TableRow]) -> String {
    let mut s = String::new();
    writeln!(s, "{:>8}  {:>12}  {:>10}  {:>10}  {:>10}", "n_train", "test_samples", "line", "wavelet", "hybrid").unwrap();
    for r in rows {
        writeln!(
            s,
            "{:>8}  {:>12}  {:>9.2}%  {:>9.2}%  {:>9.2}%",
            r.n_train,
            r.test_samples,
            100.0 * r.line,
            100.0 * r.wavelet,
            100.0 * r.hybrid
        )
        .unwrap();
    }
    s
}
