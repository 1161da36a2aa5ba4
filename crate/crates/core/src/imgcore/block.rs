use super::Image;
use crate::error::{param, Result};
use crate::scalar::Scalar;

/// Mean squared intensity of each `block_w × block_h` tile.
///
/// Tiles are numbered row-major: left to right across the top row of
/// tiles, then the next row down.
pub fn block_power<T: Scalar>(image: &Image<T>, block_w: usize, block_h: usize) -> Result<Vec<T>> {
    let (w, h) = image.dimensions();
    if block_w == 0 || block_h == 0 {
        return Err(param("block dimensions must be positive"));
    }
    if w % block_w != 0 || h % block_h != 0 {
        return Err(param(format!(
            "{block_w}x{block_h} blocks do not tile a {w}x{h} image"
        )));
    }
    let area = T::from_usize_lossy(block_w * block_h);
    let mut squares = Vec::with_capacity(block_w * block_h);
    let mut out = Vec::with_capacity((w / block_w) * (h / block_h));
    for by in (0..h).step_by(block_h) {
        for bx in (0..w).step_by(block_w) {
            squares.clear();
            for y in by..by + block_h {
                for x in bx..bx + block_w {
                    let p = image.get(x, y);
                    squares.push(p * p);
                }
            }
            out.push(pairwise_sum(&squares) / area);
        }
    }
    Ok(out)
}

/// Recursive halving sum. For a power-of-two count of equal values the
/// result is exact.
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
