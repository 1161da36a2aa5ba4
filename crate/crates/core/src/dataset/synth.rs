//! Deterministic palm-like multispectral corpora.
//!
//! A population palm (three principal lines and a plane-wave skin texture)
//! is drawn from the seed. Each subject perturbs the population lines, may
//! add one or two extra lines, and gets its own shallow wrinkles, a faint
//! vein pattern and extra texture. Each sample re-renders the subject under
//! a small random similarity transform with an illumination ramp, per-band
//! brightness and contrast drift, and additive noise. Bands share geometry
//! but weight the layers differently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::io::level_to_intensity;
use super::{Corpus, MultispectralSample, Subject};
use crate::error::{param, Result};
use crate::imgcore::Image;
use crate::scalar::Scalar;

/// Knobs of the generator. Lengths are in pixels at side 128 and scale
/// with the requested side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub max_rotation_deg: f64,
    pub max_shift_px: f64,
    pub max_scale_jitter: f64,
    pub noise_sigma: f64,
    pub max_brightness_jitter: f64,
    pub max_contrast_jitter: f64,
    /// Peak amplitude of a per-sample illumination ramp across the palm.
    pub max_shading: f64,
    /// Standard deviation (unit coordinates) of a subject's principal-line
    /// control points around the population's.
    pub subject_variation: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            max_rotation_deg: 2.5,
            max_shift_px: 2.0,
            max_scale_jitter: 0.025,
            noise_sigma: 0.02,
            max_brightness_jitter: 0.03,
            max_contrast_jitter: 0.05,
            max_shading: 0.08,
            subject_variation: 0.07,
        }
    }
}

/// Per-band mixing: `base + contrast · (texture·t - lines·l - wrinkles·w - veins·v)`.
struct BandMix {
    base: f64,
    lines: f64,
    wrinkles: f64,
    veins: f64,
    texture: f64,
}

const BAND_MIX: [BandMix; 4] = [
    BandMix { base: 0.62, lines: 0.95, wrinkles: 0.55, veins: 0.10, texture: 0.8 },
    BandMix { base: 0.55, lines: 1.00, wrinkles: 0.80, veins: 0.05, texture: 1.0 },
    BandMix { base: 0.50, lines: 0.90, wrinkles: 1.00, veins: 0.00, texture: 1.1 },
    BandMix { base: 0.66, lines: 0.60, wrinkles: 0.30, veins: 0.90, texture: 0.6 },
];

#[derive(Debug, Clone)]
struct Stroke {
    /// Quadratic Bezier control points in unit coordinates.
    ctrl: [(f64, f64); 3],
    /// Profile standard deviation in reference pixels.
    width: f64,
    depth: f64,
}

impl Stroke {
    fn point(&self, t: f64) -> (f64, f64) {
        let [p0, p1, p2] = self.ctrl;
        let u = 1.0 - t;
        (
            u * u * p0.0 + 2.0 * u * t * p1.0 + t * t * p2.0,
            u * u * p0.1 + 2.0 * u * t * p1.1 + t * t * p2.1,
        )
    }
}

#[derive(Debug, Clone)]
struct Wave {
    /// Spatial frequency in cycles per reference pixel.
    kx: f64,
    ky: f64,
    phase: f64,
    amplitude: f64,
}

#[derive(Debug, Clone)]
struct SubjectModel {
    lines: Vec<Stroke>,
    wrinkles: Vec<Stroke>,
    veins: Vec<Stroke>,
    waves: Vec<Wave>,
}

fn unit_point(rng: &mut impl Rng, lo: f64, hi: f64) -> (f64, f64) {
    (rng.random_range(lo..hi), rng.random_range(lo..hi))
}

fn stroke(rng: &mut impl Rng, length: (f64, f64), width: (f64, f64), depth: (f64, f64), bend: f64) -> Stroke {
    let p0 = unit_point(rng, 0.05, 0.95);
    let len = rng.random_range(length.0..length.1);
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let p2 = (p0.0 + len * angle.cos(), p0.1 + len * angle.sin());
    let mid = ((p0.0 + p2.0) / 2.0, (p0.1 + p2.1) / 2.0);
    let off = rng.random_range(-bend..bend) * len;
    let p1 = (mid.0 - off * angle.sin(), mid.1 + off * angle.cos());
    Stroke {
        ctrl: [p0, p1, p2],
        width: rng.random_range(width.0..width.1),
        depth: rng.random_range(depth.0..depth.1),
    }
}

/// Features every palm shares: principal lines in roughly the same places
/// and a common skin texture. Subjects perturb it.
#[derive(Debug, Clone)]
struct Population {
    lines: Vec<Stroke>,
    waves: Vec<Wave>,
}

fn wave(rng: &mut impl Rng, amplitude: (f64, f64)) -> Wave {
    let f = rng.random_range(0.03..0.12);
    let a = rng.random_range(0.0..std::f64::consts::PI);
    Wave {
        kx: f * a.cos(),
        ky: f * a.sin(),
        phase: rng.random_range(0.0..std::f64::consts::TAU),
        amplitude: rng.random_range(amplitude.0..amplitude.1),
    }
}

impl Population {
    fn draw(rng: &mut impl Rng) -> Self {
        let lines = (0..3)
            .map(|_| stroke(rng, (0.55, 0.85), (1.2, 1.8), (0.3, 0.4), 0.35))
            .collect();
        let waves = (0..6).map(|_| wave(rng, (0.01, 0.03))).collect();
        Self { lines, waves }
    }
}

impl SubjectModel {
    fn draw(rng: &mut impl Rng, population: &Population, variation: f64) -> Self {
        let jitter = Normal::new(0.0, variation.max(f64::MIN_POSITIVE)).expect("valid sigma");
        let mut lines: Vec<Stroke> = population
            .lines
            .iter()
            .map(|l| Stroke {
                ctrl: l.ctrl.map(|(x, y)| (x + jitter.sample(rng), y + jitter.sample(rng))),
                width: l.width * rng.random_range(0.8..1.25),
                depth: l.depth * rng.random_range(0.75..1.3),
            })
            .collect();
        let n_extra = rng.random_range(0..=2);
        lines.extend((0..n_extra).map(|_| stroke(rng, (0.3, 0.7), (0.9, 1.6), (0.18, 0.35), 0.35)));
        let n_wrinkles = rng.random_range(10..=16);
        let wrinkles = (0..n_wrinkles)
            .map(|_| stroke(rng, (0.08, 0.3), (0.6, 1.0), (0.08, 0.16), 0.5))
            .collect();
        let veins = (0..3)
            .map(|_| stroke(rng, (0.5, 0.9), (3.0, 5.0), (0.06, 0.12), 0.25))
            .collect();
        let mut waves: Vec<Wave> = population
            .waves
            .iter()
            .map(|w| Wave { amplitude: w.amplitude * rng.random_range(0.7..1.3), ..w.clone() })
            .collect();
        waves.extend((0..3).map(|_| wave(rng, (0.01, 0.025))));
        Self { lines, wrinkles, veins, waves }
    }
}

/// Similarity transform from subject space to image space, about the
/// image center.
struct Pose {
    cos: f64,
    sin: f64,
    scale: f64,
    dx: f64,
    dy: f64,
    center: f64,
}

impl Pose {
    fn forward(&self, x: f64, y: f64) -> (f64, f64) {
        let (u, v) = (x - self.center, y - self.center);
        (
            self.center + self.scale * (self.cos * u - self.sin * v) + self.dx,
            self.center + self.scale * (self.sin * u + self.cos * v) + self.dy,
        )
    }

    fn inverse(&self, x: f64, y: f64) -> (f64, f64) {
        let (u, v) = ((x - self.center - self.dx) / self.scale, (y - self.center - self.dy) / self.scale);
        (self.center + self.cos * u + self.sin * v, self.center - self.sin * u + self.cos * v)
    }
}

/// Pixel-space layer holding the maximum Gaussian ridge profile over the
/// strokes.
fn render_strokes(strokes: &[Stroke], pose: &Pose, side: usize, px: f64) -> Vec<f64> {
    let mut layer = vec![0.0; side * side];
    let size = side as f64;
    for s in strokes {
        let w = s.width * px * pose.scale;
        let reach = (3.0 * w).ceil() as isize + 1;
        let chord = {
            let (a, b) = (s.ctrl[0], s.ctrl[2]);
            ((a.0 - b.0).hypot(a.1 - b.1) + 1e-9) * size
        };
        // Sample spacing well under the profile width keeps the max-combined
        // ridge smooth.
        let spacing = (0.35 * w).max(0.3);
        let steps = (chord * 1.6 / spacing).ceil() as usize + 1;
        for i in 0..=steps {
            let (ux, uy) = s.point(i as f64 / steps as f64);
            let (cx, cy) = pose.forward(ux * size, uy * size);
            let (ix, iy) = (cx.round() as isize, cy.round() as isize);
            for y in (iy - reach).max(0)..=(iy + reach).min(side as isize - 1) {
                for x in (ix - reach).max(0)..=(ix + reach).min(side as isize - 1) {
                    let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                    let v = s.depth * (-d2 / (2.0 * w * w)).exp();
                    let cell = &mut layer[y as usize * side + x as usize];
                    if v > *cell {
                        *cell = v;
                    }
                }
            }
        }
    }
    layer
}

fn render_sample<T: Scalar>(
    model: &SubjectModel,
    subject_id: &str,
    sample_index: u32,
    side: usize,
    params: &SynthParams,
    rng: &mut impl Rng,
) -> MultispectralSample<T> {
    let px = side as f64 / 128.0;
    let angle = (rng.random_range(-1.0..=1.0) * params.max_rotation_deg).to_radians();
    let pose = Pose {
        cos: angle.cos(),
        sin: angle.sin(),
        scale: 1.0 + rng.random_range(-1.0..=1.0) * params.max_scale_jitter,
        dx: rng.random_range(-1.0..=1.0) * params.max_shift_px * px,
        dy: rng.random_range(-1.0..=1.0) * params.max_shift_px * px,
        center: (side as f64 - 1.0) / 2.0,
    };

    let lines = render_strokes(&model.lines, &pose, side, px);
    let wrinkles = render_strokes(&model.wrinkles, &pose, side, px);
    let veins = render_strokes(&model.veins, &pose, side, px);
    let texture: Vec<f64> = (0..side * side)
        .map(|i| {
            let (u, v) = pose.inverse((i % side) as f64, (i / side) as f64);
            let (u, v) = (u / px, v / px);
            model
                .waves
                .iter()
                .map(|w| w.amplitude * (std::f64::consts::TAU * (w.kx * u + w.ky * v) + w.phase).sin())
                .sum()
        })
        .collect();

    let shade_angle = rng.random_range(0.0..std::f64::consts::TAU);
    let shade_amp = rng.random_range(0.0..=params.max_shading);
    let shade: Vec<f64> = (0..side * side)
        .map(|i| {
            let u = (i % side) as f64 / side as f64 - 0.5;
            let v = (i / side) as f64 / side as f64 - 0.5;
            2.0 * shade_amp * (u * shade_angle.cos() + v * shade_angle.sin())
        })
        .collect();

    let noise = Normal::new(0.0, params.noise_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let bands = BAND_MIX.each_ref().map(|mix| {
        let brightness = rng.random_range(-1.0..=1.0) * params.max_brightness_jitter;
        let contrast = 1.0 + rng.random_range(-1.0..=1.0) * params.max_contrast_jitter;
        let data = (0..side * side)
            .map(|i| {
                let signal = mix.texture * texture[i]
                    - mix.lines * lines[i]
                    - mix.wrinkles * wrinkles[i]
                    - mix.veins * veins[i];
                let v = mix.base + brightness + shade[i] + contrast * signal + noise.sample(rng);
                let level = (v * 255.0).round().clamp(0.0, 255.0) as u8;
                level_to_intensity::<T>(level)
            })
            .collect();
        Image::new(side, side, data).expect("generated band is valid")
    });
    MultispectralSample::new(subject_id, sample_index, bands).expect("bands share geometry")
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates `n_subjects × n_samples` samples of side `side`. The result
/// depends only on the arguments; subjects are rendered in parallel from
/// independent per-subject and per-sample streams.
pub fn synth_generate<T: Scalar>(
    n_subjects: usize,
    n_samples: usize,
    side: usize,
    seed: u64,
) -> Result<Corpus<T>> {
    synth_generate_with(n_subjects, n_samples, side, seed, &SynthParams::default())
}

pub fn synth_generate_with<T: Scalar>(
    n_subjects: usize,
    n_samples: usize,
    side: usize,
    seed: u64,
    params: &SynthParams,
) -> Result<Corpus<T>> {
    if n_subjects == 0 || n_samples == 0 {
        return Err(param("synthetic corpus needs at least one subject and one sample"));
    }
    if side == 0 || !side.is_multiple_of(8) {
        return Err(param(format!("synthetic side must be a positive multiple of 8, got {side}")));
    }
    let population = Population::draw(&mut ChaCha8Rng::seed_from_u64(mix_seed(seed, u64::MAX, 0)));
    let subjects = (0..n_subjects)
        .into_par_iter()
        .map(|s| {
            let id = format!("s{s:03}");
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, s as u64, 0));
            let model = SubjectModel::draw(&mut rng, &population, params.subject_variation);
            let samples = (0..n_samples)
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, s as u64, i as u64 + 1));
                    render_sample(&model, &id, i as u32, side, params, &mut rng)
                })
                .collect();
            Subject { id, samples }
        })
        .collect();
    Corpus::new(subjects)
}
