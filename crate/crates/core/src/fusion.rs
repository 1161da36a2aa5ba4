//! Probe-to-gallery distances, per-probe normalization and the hybrid
//! decision rule.
//!
//! Each modality's distances are divided by their mean over the gallery,
//! so both have unit mean per probe and contribute equally to the fused
//! score `df = line_norm + wavelet_norm`. The identity is the argmin of
//! `df`; ties go to the lowest gallery index.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{data, param, Error, Result};
use crate::features::{Band, SampleFeatures, SpectralFeature};
use crate::gallery::Gallery;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Euclidean norm of the difference of the concatenated 4-band vectors.
    #[default]
    Concat,
    /// Mean over bands of the per-band Euclidean norms.
    PerBandMean,
}

impl std::str::FromStr for DistanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concat" => Ok(DistanceMode::Concat),
            "per-band-mean" => Ok(DistanceMode::PerBandMean),
            other => Err(param(format!("distance must be concat or per-band-mean, got {other:?}"))),
        }
    }
}

fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

pub fn feature_distance<T: Scalar>(a: &SpectralFeature<T>, b: &SpectralFeature<T>, mode: DistanceMode) -> T {
    match mode {
        DistanceMode::Concat => euclidean(a.as_slice(), b.as_slice()),
        DistanceMode::PerBandMean => {
            Band::ALL
                .iter()
                .map(|&band| euclidean(a.band(band), b.band(band)))
                .sum::<T>()
                / T::lit(4.0)
        }
    }
}

/// Line and wavelet distances from the probe to each template, in gallery
/// order.
pub fn raw_distances<T: Scalar>(
    probe: &SampleFeatures<T>,
    gallery: &Gallery<T>,
    mode: DistanceMode,
) -> Result<(Vec<T>, Vec<T>)> {
    if probe.fingerprint != *gallery.fingerprint() {
        return Err(data("probe features were computed under a different fingerprint than the gallery"));
    }
    Ok(gallery
        .templates()
        .iter()
        .map(|t| {
            (
                feature_distance(&probe.line, &t.line, mode),
                feature_distance(&probe.wavelet, &t.wavelet, mode),
            )
        })
        .unzip())
}

fn normalize_modality<T: Scalar>(d: &[T], modality: &'static str) -> Result<Vec<T>> {
    if d.is_empty() {
        return Err(param("cannot normalize an empty distance vector"));
    }
    let mean = d.iter().copied().sum::<T>() / T::from_usize_lossy(d.len());
    if mean.is_nan() || mean <= T::zero() {
        return Err(Error::DegenerateProbe { modality });
    }
    Ok(d.iter().map(|&v| v / mean).collect())
}

/// Divides every distance by the mean distance.
pub fn normalize<T: Scalar>(d: &[T]) -> Result<Vec<T>> {
    normalize_modality(d, "distance")
}

/// Index of the first minimum.
pub fn argmin<T: Scalar>(values: &[T]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v >= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow<T> {
    pub class_id: String,
    pub line_raw: T,
    pub wavelet_raw: T,
    pub line_norm: T,
    pub wavelet_norm: T,
    pub df: T,
}

/// Scores of one probe against every gallery class.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable<T> {
    pub rows: Vec<ScoreRow<T>>,
    /// Gallery index with the smallest fused score.
    pub decided: usize,
    /// Number of classes sharing the minimal fused score.
    pub tied: usize,
    /// Second-smallest minus smallest fused score; `None` for a
    /// single-class gallery.
    pub margin: Option<T>,
}

impl<T: Scalar> ScoreTable<T> {
    pub fn decided_class(&self) -> &str {
        &self.rows[self.decided].class_id
    }

    pub fn decided_df(&self) -> T {
        self.rows[self.decided].df
    }

    /// Argmin of the normalized line distance alone.
    pub fn line_only(&self) -> usize {
        argmin(&self.rows.iter().map(|r| r.line_norm).collect::<Vec<_>>()).expect("non-empty table")
    }

    /// Argmin of the normalized wavelet distance alone.
    pub fn wavelet_only(&self) -> usize {
        argmin(&self.rows.iter().map(|r| r.wavelet_norm).collect::<Vec<_>>()).expect("non-empty table")
    }

    /// One row per gallery class, in gallery order, with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gallery_index", "class_id", "line_raw", "wavelet_raw", "line_norm", "wavelet_norm", "df", "decided"])
            .map_err(csv_err)?;
        for (i, r) in self.rows.iter().enumerate() {
            w.write_record([
                i.to_string(),
                r.class_id.clone(),
                r.line_raw.as_f64().to_string(),
                r.wavelet_raw.as_f64().to_string(),
                r.line_norm.as_f64().to_string(),
                r.wavelet_norm.as_f64().to_string(),
                r.df.as_f64().to_string(),
                (i == self.decided).to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Data(format!("csv: {other:?}")),
    }
}

/// Normalizes both distance vectors and picks the class with the smallest
/// fused score.
pub fn decide<T: Scalar>(class_ids: &[&str], line_raw: &[T], wavelet_raw: &[T]) -> Result<ScoreTable<T>> {
    if class_ids.is_empty() {
        return Err(param("cannot decide against an empty gallery"));
    }
    if line_raw.len() != class_ids.len() || wavelet_raw.len() != class_ids.len() {
        return Err(param("distance vectors must have one entry per gallery class"));
    }
    let line_norm = normalize_modality(line_raw, "line")?;
    let wavelet_norm = normalize_modality(wavelet_raw, "wavelet")?;
    let rows: Vec<ScoreRow<T>> = (0..class_ids.len())
        .map(|j| ScoreRow {
            class_id: class_ids[j].to_owned(),
            line_raw: line_raw[j],
            wavelet_raw: wavelet_raw[j],
            line_norm: line_norm[j],
            wavelet_norm: wavelet_norm[j],
            df: line_norm[j] + wavelet_norm[j],
        })
        .collect();
    let df: Vec<T> = rows.iter().map(|r| r.df).collect();
    let decided = argmin(&df).expect("non-empty");
    let best = df[decided];
    let tied = df.iter().filter(|&&v| v == best).count();
    let margin = df
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != decided)
        .map(|(_, &v)| v - best)
        .reduce(T::min);
    Ok(ScoreTable { rows, decided, tied, margin })
}

/// Scores a probe against the gallery.
pub fn identify<T: Scalar>(
    probe: &SampleFeatures<T>,
    gallery: &Gallery<T>,
    mode: DistanceMode,
) -> Result<ScoreTable<T>> {
    if gallery.is_empty() {
        return Err(param("cannot identify against an empty gallery"));
    }
    let (dl, dw) = raw_distances(probe, gallery, mode)?;
    let ids: Vec<&str> = gallery.class_ids().collect();
    decide(&ids, &dl, &dw)
}
