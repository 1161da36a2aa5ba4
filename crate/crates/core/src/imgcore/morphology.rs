use super::BinaryImage;
use crate::error::{param, Result};

/// Drops set pixels with fewer than `min_neighbors` set pixels among their
/// eight neighbors. All decisions are taken from the input image in a single
/// pass; pixels outside the image count as unset.
pub fn remove_isolated(edges: &BinaryImage, min_neighbors: usize) -> Result<BinaryImage> {
    if min_neighbors > 8 {
        return Err(param(format!("min_neighbors must be in 0..=8, got {min_neighbors}")));
    }
    let (w, h) = (edges.width(), edges.height());
    Ok(BinaryImage::from_fn(w, h, |x, y| {
        if !edges.get(x, y) {
            return false;
        }
        let mut n = 0;
        for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
            for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                if (nx, ny) != (x, y) && edges.get(nx, ny) {
                    n += 1;
                }
            }
        }
        n >= min_neighbors
    }))
}

/// Binary dilation by a `(2r + 1)`-square structuring element, clipped at
/// the borders. Separable: a row max pass followed by a column max pass.
pub fn dilate(mask: &BinaryImage, radius: usize) -> BinaryImage {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width(), mask.height());
    let rows = BinaryImage::from_fn(w, h, |x, y| {
        (x.saturating_sub(radius)..=(x + radius).min(w - 1)).any(|nx| mask.get(nx, y))
    });
    BinaryImage::from_fn(w, h, |x, y| {
        (y.saturating_sub(radius)..=(y + radius).min(h - 1)).any(|ny| rows.get(x, ny))
    })
}
