#![allow(dead_code)]

use palmkit::imgcore::Image;
use palmkit::{BinaryImage, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize) -> GrayImage {
    Image::from_fn(w, h, |_, _| rng.random::<f64>())
}

pub fn random_mask(rng: &mut impl Rng, w: usize, h: usize, p: f64) -> BinaryImage {
    BinaryImage::from_fn(w, h, |_, _| rng.random_bool(p))
}

/// Pixel with coordinates clamped into the image.
pub fn clamped(img: &GrayImage, x: isize, y: isize) -> f64 {
    let x = x.clamp(0, img.width() as isize - 1) as usize;
    let y = y.clamp(0, img.height() as isize - 1) as usize;
    img.data()[y * img.width() + x]
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖a − b‖ / max(‖b‖, tiny)`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b).max(1e-300)
}
