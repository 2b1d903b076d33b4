//! Per-pixel embedding costs from aggregated second-derivative magnitudes.
//!
//! The cost is a reciprocal Hölder mean with negative exponent p:
//!
//! ```text
//! rho = (dxx^p + dyy^p + dxy^p)^(-1/p)
//! ```
//!
//! Large derivatives in every direction make a pixel cheap to touch; a
//! single vanishing derivative drives the cost to the wet sentinel, marking
//! the pixel as one the embedder must avoid.

use crate::error::{Error, Result};
use crate::hessian::HessianField;
use crate::image::Image;

/// Finite sentinel cost for pixels that must not be touched.
pub const DEFAULT_WET_COST: f64 = 1e10;

/// Default Hölder exponent.
pub const DEFAULT_P: f64 = -1.0;

/// Per-pixel modification costs, all strictly positive and capped at the
/// wet sentinel.
#[derive(Clone, Debug)]
pub struct CostMap {
    width: u32,
    height: u32,
    costs: Vec<f64>,
    wet_cost: f64,
    p: f64,
}

impl CostMap {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn wet_cost(&self) -> f64 {
        self.wet_cost
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn pixel_count(&self) -> usize {
        self.costs.len()
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.costs[y as usize * self.width as usize + x as usize]
    }

    pub fn is_wet(&self, index: usize) -> bool {
        self.costs[index] == self.wet_cost
    }

    pub fn wet_count(&self) -> usize {
        self.costs.iter().filter(|&&c| c == self.wet_cost).count()
    }

    /// Build directly from raw values; used by tests and by callers that
    /// load a map from disk.
    pub fn from_costs(width: u32, height: u32, costs: Vec<f64>, wet_cost: f64, p: f64) -> Result<Self> {
        if costs.len() != width as usize * height as usize {
            return Err(Error::TruncatedPayload {
                expected: width as usize * height as usize,
                found: costs.len(),
            });
        }
        if !(wet_cost > 0.0) {
            return Err(Error::InvalidParameter("wet cost must be positive".into()));
        }
        if costs.iter().any(|&c| !(c > 0.0) || c > wet_cost) {
            return Err(Error::InvalidParameter(
                "costs must lie in (0, wet_cost]".into(),
            ));
        }
        Ok(CostMap {
            width,
            height,
            costs,
            wet_cost,
            p,
        })
    }

    /// 8-bit rendering of -log(rho), affinely rescaled so the cheapest
    /// pixel is white. Degenerate (constant) maps render mid-gray.
    pub fn visualization(&self) -> Image {
        let logs: Vec<f64> = self.costs.iter().map(|&c| -c.ln()).collect();
        let min = logs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pixels = if max > min {
            logs.iter()
                .map(|&v| ((v - min) / (max - min) * 255.0).round() as u8)
                .collect()
        } else {
            vec![128u8; logs.len()]
        };
        Image::new(self.width, self.height, pixels).expect("valid dimensions")
    }
}

/// Cost of one pixel from its three derivative magnitudes. Inputs must be
/// non-negative; a zero anywhere returns `wet_cost` exactly, and finite
/// results are capped at `wet_cost`.
///
/// Evaluated as `(sum_i (d_i/m)^p)^(-1/p) / m` with `m` the largest of the
/// three sorted magnitudes, which keeps intermediate powers bounded and
/// makes the result independent of argument order.
pub fn holder_cost(dxx: f64, dyy: f64, dxy: f64, p: f64, wet_cost: f64) -> f64 {
    debug_assert!(p < 0.0 && wet_cost > 0.0);
    debug_assert!(dxx >= 0.0 && dyy >= 0.0 && dxy >= 0.0);
    let mut d = [dxx, dyy, dxy];
    if d.iter().any(|&v| v == 0.0) {
        return wet_cost;
    }
    d.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let m = d[0];
    let s = 1.0 + (d[1] / m).powf(p) + (d[2] / m).powf(p);
    let rho = s.powf(-1.0 / p) / m;
    if rho.is_finite() && rho < wet_cost {
        rho
    } else {
        wet_cost
    }
}

/// Map a derivative field to per-pixel costs.
pub fn cost_map(field: &HessianField, p: f64, wet_cost: f64) -> Result<CostMap> {
    if !(p < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Hölder exponent p must be negative, got {p}"
        )));
    }
    if !(wet_cost > 0.0) || !wet_cost.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "wet cost must be positive and finite, got {wet_cost}"
        )));
    }
    let costs = field
        .pxx()
        .values()
        .iter()
        .zip(field.pyy().values())
        .zip(field.pxy().values())
        .map(|((&dxx, &dyy), &dxy)| holder_cost(dxx, dyy, dxy, p, wet_cost))
        .collect();
    Ok(CostMap {
        width: field.width(),
        height: field.height(),
        costs,
        wet_cost,
        p,
    })
}
