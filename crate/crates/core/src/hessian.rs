//! Multi-scale second-derivative magnitude maps.
//!
//! For a chosen kernel family, each of the three maps (xx, yy, xy) holds at
//! every pixel the maximum absolute kernel response over scales n = 1..=N.
//! The sign of the strongest response is discarded: the cost model consumes
//! magnitudes only.

use crate::convolve::{convolve, Border, ResponseMap};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernels::{ko_x2, ko_xy, ky_x2, ky_xy, rotate_90, Kernel};

/// The two second-derivative kernel families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelFamily {
    /// Closed-form gradient-variation stencils.
    Ky,
    /// Lagrange-interpolation stencils.
    Ko,
}

impl KernelFamily {
    /// Scale picked for this family when the caller does not choose one.
    pub fn default_n(self) -> u32 {
        match self {
            KernelFamily::Ky => 4,
            KernelFamily::Ko => 12,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KernelFamily::Ky => "ky",
            KernelFamily::Ko => "ko",
        }
    }

    pub fn x2_kernel(self, n: u32) -> Result<Kernel> {
        match self {
            KernelFamily::Ky => ky_x2(n),
            KernelFamily::Ko => ko_x2(n),
        }
    }

    pub fn xy_kernel(self, n: u32) -> Result<Kernel> {
        match self {
            KernelFamily::Ky => ky_xy(n),
            KernelFamily::Ko => ko_xy(n),
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ky" => Ok(KernelFamily::Ky),
            "ko" => Ok(KernelFamily::Ko),
            other => Err(Error::InvalidParameter(format!(
                "unknown kernel family {other:?} (expected ky or ko)"
            ))),
        }
    }
}

/// Aggregated magnitudes of the three second partial derivatives.
#[derive(Clone, Debug)]
pub struct HessianField {
    pxx: ResponseMap,
    pyy: ResponseMap,
    pxy: ResponseMap,
    family: KernelFamily,
    n_max: u32,
}

impl HessianField {
    pub fn pxx(&self) -> &ResponseMap {
        &self.pxx
    }

    pub fn pyy(&self) -> &ResponseMap {
        &self.pyy
    }

    pub fn pxy(&self) -> &ResponseMap {
        &self.pxy
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn width(&self) -> u32 {
        self.pxx.width()
    }

    pub fn height(&self) -> u32 {
        self.pxx.height()
    }
}

/// Build the three maps by running every scale of the family over the
/// image and keeping the pointwise maximum magnitude. The yy kernel is the
/// quarter-turned xx kernel of the same scale.
pub fn build_field(
    img: &Image,
    family: KernelFamily,
    n_max: u32,
    border: Border,
) -> Result<HessianField> {
    if n_max < 1 {
        return Err(Error::InvalidParameter(
            "scale bound N must be at least 1".into(),
        ));
    }
    let mut pxx = ResponseMap::zeros(img.width(), img.height());
    let mut pyy = ResponseMap::zeros(img.width(), img.height());
    let mut pxy = ResponseMap::zeros(img.width(), img.height());

    for n in 1..=n_max {
        let x2 = family.x2_kernel(n)?;
        let y2 = rotate_90(&x2);
        let xy = family.xy_kernel(n)?;
        pxx.absorb_abs_max(&convolve(img, &x2, border)?);
        pyy.absorb_abs_max(&convolve(img, &y2, border)?);
        pxy.absorb_abs_max(&convolve(img, &xy, border)?);
    }

    Ok(HessianField {
        pxx,
        pyy,
        pxy,
        family,
        n_max,
    })
}
