//! Adaptive grayscale steganography driven by second-order image structure.
//!
//! The pipeline: load an 8-bit cover, build the three second-derivative
//! magnitude maps with one of two exact kernel families (closed-form
//! gradient-variation stencils or Lagrange-interpolation stencils), turn
//! them into a per-pixel cost map through a reciprocal Hölder mean, and
//! spend the payload where costs are low — either statistically (the
//! payload-limited sender) or for real through syndrome-trellis coding
//! with keyed extraction.

pub mod convolve;
pub mod cost;
pub mod embed;
pub mod error;
pub mod hessian;
pub mod image;
pub mod kernels;
pub mod key;
pub mod raster;
pub mod stc;

pub use convolve::{convolve, Border, ResponseMap};
pub use cost::{cost_map, holder_cost, CostMap, DEFAULT_P, DEFAULT_WET_COST};
pub use embed::{
    binary_entropy, change_probabilities, change_stats, embed, extract, message_bits_for,
    simulate, ChangeProbabilities, ChangeStats, EmbedMode, EmbedParams, Message,
    DEFAULT_CONSTRAINT_HEIGHT,
};
pub use error::{Error, Result};
pub use hessian::{build_field, HessianField, KernelFamily};
pub use image::{diff, load_image, save_image, DiffMap, Image};
pub use kernels::{
    classic_gradient, classic_second_order, compose_second_order, ko_x2, ko_xy, ky_x2, ky_xy,
    lagrange_d1, oracle_second_derivative, rotate_90, DerivKind, GradientName, Kernel,
    KernelKind, Rational, RationalMatrix,
};
pub use key::StegoKey;
pub use stc::{TrellisCode, MAX_CONSTRAINT_HEIGHT, MIN_CONSTRAINT_HEIGHT};
