//! Kernel application over a full image with explicit border handling.
//!
//! Application is correlation-style: the kernel is laid over the window as
//! printed, without flipping. Every output pixel is defined; borders are
//! computed by extending the image under the chosen policy rather than
//! cropping.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernels::Kernel;

/// Image extension policy for pixels outside the frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Border {
    /// Reflect without repeating the edge pixel: -1 maps to 1.
    #[default]
    Mirror,
    /// Clamp to the nearest edge pixel.
    Replicate,
}

/// Real-valued raster aligned with a source image.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl ResponseMap {
    pub fn zeros(width: u32, height: u32) -> Self {
        ResponseMap {
            width,
            height,
            values: vec![0.0; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    /// Pointwise max with the absolute values of another map.
    pub(crate) fn absorb_abs_max(&mut self, other: &ResponseMap) {
        debug_assert!(self.width == other.width && self.height == other.height);
        for (dst, &src) in self.values.iter_mut().zip(other.values.iter()) {
            let mag = src.abs();
            if mag > *dst {
                *dst = mag;
            }
        }
    }
}

#[inline]
fn fold_mirror(idx: i64, size: i64) -> usize {
    if size == 1 {
        return 0;
    }
    let period = 2 * (size - 1);
    let mut t = idx.rem_euclid(period);
    if t >= size {
        t = period - t;
    }
    t as usize
}

#[inline]
fn fold_replicate(idx: i64, size: i64) -> usize {
    idx.clamp(0, size - 1) as usize
}

/// Apply `kernel` at every pixel: response(x, y) is the sum over kernel
/// offsets (i, j) of `k[i][j] * P_ext(x + j - n, y + i - n)`, with `P_ext`
/// the border-extended image. Deterministic for a given input regardless
/// of evaluation order.
///
/// Kernels whose coefficients sum to exactly zero are applied in anchored
/// form, `sum k * (sample - center)`: identical in exact arithmetic, and
/// it keeps the response of a flat window at exactly 0.0 instead of a
/// rounding residue.
pub fn convolve(img: &Image, kernel: &Kernel, border: Border) -> Result<ResponseMap> {
    let width = img.width() as i64;
    let height = img.height() as i64;
    let size = kernel.size() as i64;
    let limit = 2 * width.min(height) + 1;
    if size > limit {
        return Err(Error::KernelTooLarge {
            kernel: kernel.size(),
            width: img.width(),
            height: img.height(),
            limit: limit as usize,
        });
    }

    let n = kernel.scale() as i64;
    // Sparse tap list: most family kernels are dominated by zeros.
    let coeffs = kernel.to_f64();
    let mut taps: Vec<(i64, i64, f64)> = Vec::new();
    for (idx, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            let di = (idx as i64) / size - n;
            let dj = (idx as i64) % size - n;
            taps.push((di, dj, c));
        }
    }

    let pixels = img.pixels();
    let mut values = vec![0.0f64; (width * height) as usize];
    let anchored = kernel.is_zero_sum();

    let fold: fn(i64, i64) -> usize = match border {
        Border::Mirror => fold_mirror,
        Border::Replicate => fold_replicate,
    };

    for y in 0..height {
        let interior_row = y >= n && y + n < height;
        for x in 0..width {
            let interior = interior_row && x >= n && x + n < width;
            let anchor = if anchored {
                pixels[(y * width + x) as usize] as f64
            } else {
                0.0
            };
            let mut acc = 0.0f64;
            if interior {
                for &(di, dj, c) in &taps {
                    let sy = (y + di) as usize;
                    let sx = (x + dj) as usize;
                    acc += c * (pixels[sy * width as usize + sx] as f64 - anchor);
                }
            } else {
                for &(di, dj, c) in &taps {
                    let sy = fold(y + di, height);
                    let sx = fold(x + dj, width);
                    acc += c * (pixels[sy * width as usize + sx] as f64 - anchor);
                }
            }
            values[(y * width + x) as usize] = acc;
        }
    }

    Ok(ResponseMap {
        width: img.width(),
        height: img.height(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Image;
    use crate::kernels::{ko_x2, ky_x2, ky_xy, rotate_90};
    use proptest::prelude::*;

    fn image_from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Image {
        let mut pixels = Vec::with_capacity((width * height) as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Image::new(width, height, pixels).unwrap()
    }

    #[test]
    fn mirror_fold_reflects_without_repeating_edges() {
        assert_eq!(fold_mirror(-1, 10), 1);
        assert_eq!(fold_mirror(-3, 10), 3);
        assert_eq!(fold_mirror(0, 10), 0);
        assert_eq!(fold_mirror(9, 10), 9);
        assert_eq!(fold_mirror(10, 10), 8);
        assert_eq!(fold_mirror(12, 10), 6);
        // Long offsets keep folding.
        assert_eq!(fold_mirror(-9, 5), 1);
        assert_eq!(fold_mirror(0, 1), 0);
        assert_eq!(fold_mirror(-4, 1), 0);
    }

    #[test]
    fn constant_image_gives_zero_response() {
        let img = Image::filled(16, 12, 77).unwrap();
        for kernel in [ky_x2(2).unwrap(), ko_x2(3).unwrap(), ky_xy(1).unwrap()] {
            for border in [Border::Mirror, Border::Replicate] {
                let r = convolve(&img, &kernel, border).unwrap();
                assert!(r.values().iter().all(|&v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn column_ramp_vanishes_in_the_interior() {
        let img = image_from_fn(20, 8, |x, _| (3 * x) as u8);
        let k = ko_x2(2).unwrap();
        let r = convolve(&img, &k, Border::Mirror).unwrap();
        for y in 2..6 {
            for x in 2..18 {
                assert!(r.get(x, y).abs() < 1e-12, "at ({x},{y}): {}", r.get(x, y));
            }
        }
    }

    #[test]
    fn quadratic_column_profile_has_constant_second_derivative() {
        // 16 columns keep x^2 within u8 range, so interior responses are
        // exactly 2.
        let img = image_from_fn(16, 10, |x, _| (x * x) as u8);
        let k = ko_x2(2).unwrap();
        let r = convolve(&img, &k, Border::Mirror).unwrap();
        for y in 0..10 {
            for x in 2..14 {
                assert!((r.get(x, y) - 2.0).abs() < 1e-12);
            }
        }

        // On a wider grid the profile saturates at 255; columns whose whole
        // window stays below the clamp still read exactly 2.
        let wide = image_from_fn(32, 6, |x, _| (x * x).min(255) as u8);
        let rw = convolve(&wide, &k, Border::Mirror).unwrap();
        for y in 0..6 {
            for x in 2..=13 {
                assert!((rw.get(x, y) - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interior_is_border_policy_independent() {
        let img = image_from_fn(24, 24, |x, y| ((x * 7 + y * 13) % 251) as u8);
        let k = ky_xy(3).unwrap();
        let a = convolve(&img, &k, Border::Mirror).unwrap();
        let b = convolve(&img, &k, Border::Replicate).unwrap();
        for y in 3..21 {
            for x in 3..21 {
                assert_eq!(a.get(x, y).to_bits(), b.get(x, y).to_bits());
            }
        }
        // And near the border the two policies genuinely differ somewhere.
        assert_ne!(a.values(), b.values());
    }

    #[test]
    fn rotated_kernel_matches_rotated_image() {
        let img = image_from_fn(14, 14, |x, y| ((x * x + 3 * y) % 256) as u8);
        let k = ky_x2(2).unwrap();
        let rk = rotate_90(&k);

        // Quarter-turn the image clockwise, apply k, turn the result back.
        let w = img.width();
        let h = img.height();
        let turned = {
            let mut px = vec![0u8; (w * h) as usize];
            for y in 0..h {
                for x in 0..w {
                    // (x, y) -> (h-1-y, x) under a clockwise turn.
                    px[(x * h + (h - 1 - y)) as usize] = img.get(x, y);
                }
            }
            Image::new(h, w, px).unwrap()
        };
        let on_turned = convolve(&turned, &k, Border::Mirror).unwrap();
        let direct = convolve(&img, &rk, Border::Mirror).unwrap();
        for y in 0..h {
            for x in 0..w {
                let back = on_turned.get(h - 1 - y, x);
                assert!(
                    (direct.get(x, y) - back).abs() < 1e-12,
                    "mismatch at ({x},{y})"
                );
            }
        }
    }

    #[test]
    fn oversized_kernel_is_rejected() {
        let img = Image::filled(3, 3, 0).unwrap();
        let k = ko_x2(4).unwrap(); // 9x9 > 2*3+1
        assert!(matches!(
            convolve(&img, &k, Border::Mirror),
            Err(crate::error::Error::KernelTooLarge { .. })
        ));
        // 7x7 on a 3x3 image is the boundary case and is allowed.
        let k3 = ko_x2(3).unwrap();
        assert!(convolve(&img, &k3, Border::Mirror).is_ok());
    }

    proptest! {
        // Linearity on the float view: responses to a+b equal the sum of
        // responses, up to accumulated rounding.
        #[test]
        fn convolution_is_linear(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let w = 12u32;
            let h = 9u32;
            let a = image_from_fn(w, h, |_, _| rng.gen());
            let b = image_from_fn(w, h, |_, _| rng.gen::<u8>() / 2);
            let sum = {
                let px: Vec<u8> = a
                    .pixels()
                    .iter()
                    .zip(b.pixels())
                    .map(|(&x, &y)| x.saturating_add(y).min(255))
                    .collect();
                Image::new(w, h, px).unwrap()
            };
            // Only exercise pixel pairs that did not saturate.
            let unsaturated: Vec<usize> = a
                .pixels()
                .iter()
                .zip(b.pixels())
                .enumerate()
                .filter(|(_, (&x, &y))| (x as u16 + y as u16) <= 255)
                .map(|(i, _)| i)
                .collect();
            let k = ky_xy(2).unwrap();
            let ra = convolve(&a, &k, Border::Replicate).unwrap();
            let rb = convolve(&b, &k, Border::Replicate).unwrap();
            let rsum = convolve(&sum, &k, Border::Replicate).unwrap();
            // Interior only: border folding touches saturated pixels.
            for y in 2..(h - 2) {
                for x in 2..(w - 2) {
                    let idx = (y * w + x) as usize;
                    let window_clean = (0..5).all(|di| {
                        (0..5).all(|dj| {
                            let p = ((y + di - 2) * w + (x + dj - 2)) as usize;
                            unsaturated.binary_search(&p).is_ok()
                        })
                    });
                    if window_clean {
                        let lhs = rsum.values()[idx];
                        let rhs = ra.values()[idx] + rb.values()[idx];
                        prop_assert!((lhs - rhs).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
