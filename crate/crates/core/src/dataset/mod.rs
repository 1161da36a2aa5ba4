//! Multispectral samples, corpora, train/test splits, disk I/O and the
//! synthetic corpus generator.

mod io;
mod synth;

pub use io::{load_corpus, read_gray, read_sample, write_corpus, ImageFormat, LoadIssue, LoadReport};
pub use synth::{synth_generate, synth_generate_with, SynthParams};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{data, param, Result};
use crate::features::Band;
use crate::imgcore::Image;
use crate::scalar::Scalar;

/// One capture: four aligned square band images.
#[derive(Debug, Clone, PartialEq)]
pub struct MultispectralSample<T> {
    pub subject_id: String,
    pub sample_index: u32,
    bands: [Image<T>; 4],
}

impl<T: Scalar> MultispectralSample<T> {
    /// `bands` are in R, G, B, NIR order and must be square and equal in size.
    pub fn new(subject_id: impl Into<String>, sample_index: u32, bands: [Image<T>; 4]) -> Result<Self> {
        let dims = bands[0].dimensions();
        if bands.iter().any(|b| b.dimensions() != dims) {
            return Err(data("band images differ in size"));
        }
        if dims.0 != dims.1 {
            return Err(data(format!("band images must be square, got {}x{}", dims.0, dims.1)));
        }
        Ok(Self { subject_id: subject_id.into(), sample_index, bands })
    }

    pub fn band(&self, band: Band) -> &Image<T> {
        &self.bands[band.index()]
    }

    pub fn bands(&self) -> &[Image<T>; 4] {
        &self.bands
    }

    pub fn side(&self) -> usize {
        self.bands[0].width()
    }

    /// Same sample with the bands reordered: band `i` of the result is
    /// band `order[i]` of `self`.
    pub fn permute_bands(&self, order: [Band; 4]) -> Self {
        Self {
            subject_id: self.subject_id.clone(),
            sample_index: self.sample_index,
            bands: order.map(|b| self.band(b).clone()),
        }
    }

    pub fn map_pixels(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            subject_id: self.subject_id.clone(),
            sample_index: self.sample_index,
            bands: self.bands.clone().map(|b| b.map(&f)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subject<T> {
    pub id: String,
    /// Ordered by `sample_index`.
    pub samples: Vec<MultispectralSample<T>>,
}

/// Samples grouped by subject, all of one square geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus<T> {
    subjects: Vec<Subject<T>>,
    side: usize,
}

impl<T: Scalar> Corpus<T> {
    pub fn new(subjects: Vec<Subject<T>>) -> Result<Self> {
        let side = subjects
            .iter()
            .flat_map(|s| s.samples.first())
            .map(|s| s.side())
            .next()
            .ok_or_else(|| data("corpus has no samples"))?;
        for s in &subjects {
            if s.samples.is_empty() {
                return Err(data(format!("subject {:?} has no samples", s.id)));
            }
            if let Some(bad) = s.samples.iter().find(|x| x.side() != side) {
                return Err(data(format!(
                    "sample {}/{} has side {}, corpus side is {side}",
                    s.id,
                    bad.sample_index,
                    bad.side()
                )));
            }
        }
        let mut ids: Vec<_> = subjects.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(data(format!("duplicate subject id {:?}", w[0])));
        }
        Ok(Self { subjects, side })
    }

    pub fn subjects(&self) -> &[Subject<T>] {
        &self.subjects
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn n_samples(&self) -> usize {
        self.subjects.iter().map(|s| s.samples.len()).sum()
    }

    pub fn samples(&self) -> impl Iterator<Item = &MultispectralSample<T>> {
        self.subjects.iter().flat_map(|s| s.samples.iter())
    }
}

/// Per-subject positions (into `Subject::samples`) of training and test
/// samples, both ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<Vec<usize>>,
    pub test: Vec<Vec<usize>>,
}

/// Picks `n_train` sample positions per subject, ascending. With
/// `seed = None` the first `n_train` positions are taken; otherwise each
/// subject's positions are shuffled by one ChaCha8 stream seeded with
/// `seed`, visiting subjects in corpus order, and the first `n_train` kept.
/// Subjects may have exactly `n_train` samples.
pub fn choose_training<T: Scalar>(
    corpus: &Corpus<T>,
    n_train: usize,
    seed: Option<u64>,
) -> Result<Vec<Vec<usize>>> {
    Ok(partition(corpus, n_train, seed, false)?.train)
}

/// Partitions every subject's samples into `n_train` training samples and
/// the rest for testing, using the selection rule of [`choose_training`].
/// Every subject needs more than `n_train` samples.
pub fn split_indices<T: Scalar>(
    corpus: &Corpus<T>,
    n_train: usize,
    seed: Option<u64>,
) -> Result<SplitIndices> {
    partition(corpus, n_train, seed, true)
}

fn partition<T: Scalar>(
    corpus: &Corpus<T>,
    n_train: usize,
    seed: Option<u64>,
    need_test: bool,
) -> Result<SplitIndices> {
    if n_train == 0 {
        return Err(param("n_train must be at least 1"));
    }
    let min = if need_test { n_train + 1 } else { n_train };
    if let Some(s) = corpus.subjects.iter().find(|s| s.samples.len() < min) {
        return Err(param(format!(
            "subject {:?} has {} samples, need at least {min} for n_train = {n_train}",
            s.id,
            s.samples.len()
        )));
    }
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut train = Vec::with_capacity(corpus.subjects.len());
    let mut test = Vec::with_capacity(corpus.subjects.len());
    for s in &corpus.subjects {
        let mut order: Vec<usize> = (0..s.samples.len()).collect();
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        let (tr, te) = order.split_at(n_train);
        let (mut tr, mut te) = (tr.to_vec(), te.to_vec());
        tr.sort_unstable();
        te.sort_unstable();
        train.push(tr);
        test.push(te);
    }
    Ok(SplitIndices { train, test })
}

/// [`split_indices`], materialized as two corpora.
pub fn split<T: Scalar>(
    corpus: &Corpus<T>,
    n_train: usize,
    seed: Option<u64>,
) -> Result<(Corpus<T>, Corpus<T>)> {
    let idx = split_indices(corpus, n_train, seed)?;
    let pick = |sel: &[Vec<usize>]| {
        let subjects = corpus
            .subjects
            .iter()
            .zip(sel)
            .map(|(s, keep)| Subject {
                id: s.id.clone(),
                samples: keep.iter().map(|&i| s.samples[i].clone()).collect(),
            })
            .collect();
        Corpus::new(subjects)
    };
    Ok((pick(&idx.train)?, pick(&idx.test)?))
}
