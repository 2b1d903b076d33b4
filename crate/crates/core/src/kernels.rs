//! Exact derivative kernels over rational coefficients.
//!
//! Two parameterized families produce the second-order stencils used by the
//! cost model, both on odd square windows of size 2n+1:
//!
//! * `ky_*`: closed-form gradient-variation kernels. `ky_x2(n)` averages the
//!   horizontal gradient change across the window (middle row
//!   `[1/2n, 0.., -2/2n, 0.., 1/2n]`); `ky_xy(n)` averages the diagonal
//!   change over the window ring with weights `1/(4|i||j|)`.
//! * `ko_*`: kernels obtained by differentiating the bivariate Lagrange
//!   interpolant of the window at its center. `ko_x2(n)` is the 1-D
//!   second-derivative stencil in the middle row; `ko_xy(n)` is the outer
//!   product of the first-derivative stencil with itself.
//!
//! The classical 3x3 gradient operators (Sobel, Prewitt, central and
//! intermediate differences) and their induced second-order kernels are
//! also provided, both as frozen coefficient tables and through a
//! composition route (`compose_second_order`) that rebuilds them by
//! convolving the gradient kernel with itself or with its quarter-turn.
//!
//! All coefficients are exact rationals; conversion to floating point
//! happens at convolution time only.

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Shorthand for a reduced rational.
pub fn rat(numer: i128, denom: i128) -> Rational {
    Ratio::new(numer, denom)
}

/// Dense matrix of exact rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        RationalMatrix {
            rows: nrows,
            cols: ncols,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    fn from_ints(rows: &[&[i128]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rational::from_integer(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Rational {
        self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Rational) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn row_slice(&self, row: usize) -> &[Rational] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|r| *r.numer() as f64 / *r.denom() as f64)
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = RationalMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// Quarter turn clockwise.
    pub fn rotate_cw(&self) -> Self {
        let mut out = RationalMatrix::zeros(self.cols, self.rows);
        for r in 0..self.cols {
            for c in 0..self.rows {
                out.set(r, c, self.get(self.rows - 1 - c, r));
            }
        }
        out
    }

    /// Quarter turn counterclockwise.
    pub fn rotate_ccw(&self) -> Self {
        let mut out = RationalMatrix::zeros(self.cols, self.rows);
        for r in 0..self.cols {
            for c in 0..self.rows {
                out.set(r, c, self.get(c, self.cols - 1 - r));
            }
        }
        out
    }

    pub fn rotate_180(&self) -> Self {
        self.rotate_cw().rotate_cw()
    }

    pub fn scaled(&self, factor: Rational) -> Self {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| e * factor).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scaled(-Rational::one())
    }

    /// Full (un-cropped) 2-D linear convolution.
    pub fn convolve_full(&self, other: &RationalMatrix) -> RationalMatrix {
        let rows = self.rows + other.rows - 1;
        let cols = self.cols + other.cols - 1;
        let mut out = RationalMatrix::zeros(rows, cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.get(r1, c1);
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        let b = other.get(r2, c2);
                        if !b.is_zero() {
                            let cur = out.get(r1 + r2, c1 + c2);
                            out.set(r1 + r2, c1 + c2, cur + a * b);
                        }
                    }
                }
            }
        }
        out
    }

    /// Strip concentric all-zero rings: a ring is removed only when the top
    /// and bottom rows and the left and right columns are zero together, so
    /// the matrix stays square and centered. A lone zero border row (as in
    /// the central-difference x2 kernel) is preserved.
    pub fn trim_zero_rings(&self) -> RationalMatrix {
        let mut top = 0usize;
        let mut rows = self.rows;
        let mut cols = self.cols;
        while rows > 1 && cols > 1 {
            let bottom = top + rows - 1;
            let right = top + cols - 1;
            let ring_zero = (top..top + cols).all(|c| self.get(top, c).is_zero())
                && (top..top + cols).all(|c| self.get(bottom, c).is_zero())
                && (top..top + rows).all(|r| self.get(r, top).is_zero())
                && (top..top + rows).all(|r| self.get(r, right).is_zero());
            if !ring_zero {
                break;
            }
            top += 1;
            rows -= 2;
            cols -= 2;
        }
        let mut out = RationalMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.set(r, c, self.get(top + r, top + c));
            }
        }
        out
    }
}

/// Role tag carried by a [`Kernel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    FirstX,
    FirstY,
    X2,
    Y2,
    Xy,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::FirstX => "first_x",
            KernelKind::FirstY => "first_y",
            KernelKind::X2 => "x2",
            KernelKind::Y2 => "y2",
            KernelKind::Xy => "xy",
        }
    }
}

/// Which second partial derivative is requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivKind {
    X2,
    Y2,
    Xy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientName {
    Sobel,
    Prewitt,
    CentralDifference,
    IntermediateDifference,
}

/// Odd square stencil of exact rational coefficients with half-width `n`
/// (size 2n+1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    kind: KernelKind,
    scale: u32,
    coeffs: RationalMatrix,
}

impl Kernel {
    pub(crate) fn new(kind: KernelKind, coeffs: RationalMatrix) -> Self {
        assert_eq!(coeffs.rows(), coeffs.cols(), "kernel must be square");
        assert!(coeffs.rows() % 2 == 1, "kernel must be odd-sized");
        let scale = ((coeffs.rows() - 1) / 2) as u32;
        Kernel {
            kind,
            scale,
            coeffs,
        }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// Half-width n; the window is (2n+1) x (2n+1).
    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn size(&self) -> usize {
        self.coeffs.rows()
    }

    pub fn coeffs(&self) -> &RationalMatrix {
        &self.coeffs
    }

    /// Whether the coefficients sum to exactly zero, i.e. the kernel
    /// annihilates constant windows.
    pub fn is_zero_sum(&self) -> bool {
        self.coeffs
            .entries()
            .iter()
            .fold(Rational::zero(), |acc, &e| acc + e)
            .is_zero()
    }

    /// Coefficient at signed offsets from the center, rows down and
    /// columns right.
    pub fn at_offset(&self, row_offset: i64, col_offset: i64) -> Rational {
        let n = self.scale as i64;
        assert!(row_offset.abs() <= n && col_offset.abs() <= n);
        self.coeffs
            .get((row_offset + n) as usize, (col_offset + n) as usize)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.to_f64()
    }

    /// Plain-text dump: header `kind n size`, then one row per line with
    /// entries as reduced rationals (`num/den`, bare integer when den is 1).
    pub fn dump(&self) -> String {
        let mut out = format!("{} {} {}\n", self.kind.as_str(), self.scale, self.size());
        for r in 0..self.size() {
            let row: Vec<String> = self
                .coeffs
                .row_slice(r)
                .iter()
                .map(|e| e.to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Quarter-turn (clockwise) rotation; x-role tags swap to y-role ones.
pub fn rotate_90(kernel: &Kernel) -> Kernel {
    let kind = match kernel.kind {
        KernelKind::FirstX => KernelKind::FirstY,
        KernelKind::FirstY => KernelKind::FirstX,
        KernelKind::X2 => KernelKind::Y2,
        KernelKind::Y2 => KernelKind::X2,
        KernelKind::Xy => KernelKind::Xy,
    };
    Kernel::new(kind, kernel.coeffs.rotate_cw())
}

/// Classical 3x3 horizontal-gradient operators.
pub fn classic_gradient(name: GradientName) -> Kernel {
    let coeffs = match name {
        GradientName::Sobel => {
            RationalMatrix::from_ints(&[&[-1, 0, 1], &[-2, 0, 2], &[-1, 0, 1]])
        }
        GradientName::Prewitt => {
            RationalMatrix::from_ints(&[&[-1, 0, 1], &[-1, 0, 1], &[-1, 0, 1]])
        }
        GradientName::CentralDifference => RationalMatrix::from_rows(vec![
            vec![Rational::zero(); 3],
            vec![rat(-1, 2), Rational::zero(), rat(1, 2)],
            vec![Rational::zero(); 3],
        ]),
        GradientName::IntermediateDifference => {
            RationalMatrix::from_ints(&[&[0, 0, 0], &[0, -1, 1], &[0, 0, 0]])
        }
    };
    Kernel::new(KernelKind::FirstX, coeffs)
}

/// Second-order kernels induced by the classical gradient operators, as
/// frozen coefficient tables. With `DerivKind::Y2` the x2 table is rotated.
///
/// These must agree entry-for-entry with [`compose_second_order`], which
/// rebuilds them by convolution; keeping both routes makes each one an
/// oracle for the other.
pub fn classic_second_order(name: GradientName, kind: DerivKind) -> Kernel {
    if kind == DerivKind::Y2 {
        return rotate_90(&classic_second_order(name, DerivKind::X2));
    }
    let z = Rational::zero();
    let coeffs = match (name, kind) {
        (GradientName::Sobel, DerivKind::X2) => RationalMatrix::from_ints(&[
            &[1, 0, -2, 0, 1],
            &[4, 0, -8, 0, 4],
            &[6, 0, -12, 0, 6],
            &[4, 0, -8, 0, 4],
            &[1, 0, -2, 0, 1],
        ]),
        (GradientName::Prewitt, DerivKind::X2) => RationalMatrix::from_ints(&[
            &[1, 0, -2, 0, 1],
            &[2, 0, -4, 0, 2],
            &[3, 0, -6, 0, 3],
            &[2, 0, -4, 0, 2],
            &[1, 0, -2, 0, 1],
        ]),
        (GradientName::CentralDifference, DerivKind::X2) => RationalMatrix::from_rows(vec![
            vec![z; 5],
            vec![z; 5],
            vec![rat(1, 4), z, rat(-1, 2), z, rat(1, 4)],
            vec![z; 5],
            vec![z; 5],
        ]),
        (GradientName::IntermediateDifference, DerivKind::X2) => RationalMatrix::from_ints(&[
            &[0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0],
            &[0, 0, 1, -2, 1],
            &[0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0],
        ]),
        (GradientName::Sobel, DerivKind::Xy) => RationalMatrix::from_ints(&[
            &[-1, -2, 0, 2, 1],
            &[-2, -4, 0, 4, 2],
            &[0, 0, 0, 0, 0],
            &[2, 4, 0, -4, -2],
            &[1, 2, 0, -2, -1],
        ]),
        (GradientName::Prewitt, DerivKind::Xy) => RationalMatrix::from_ints(&[
            &[-1, -1, 0, 1, 1],
            &[-1, -1, 0, 1, 1],
            &[0, 0, 0, 0, 0],
            &[1, 1, 0, -1, -1],
            &[1, 1, 0, -1, -1],
        ]),
        (GradientName::CentralDifference, DerivKind::Xy) => RationalMatrix::from_rows(vec![
            vec![rat(-1, 4), z, rat(1, 4)],
            vec![z; 3],
            vec![rat(1, 4), z, rat(-1, 4)],
        ]),
        (GradientName::IntermediateDifference, DerivKind::Xy) => {
            RationalMatrix::from_ints(&[&[0, -1, 1], &[0, 1, -1], &[0, 0, 0]])
        }
        (_, DerivKind::Y2) => unreachable!(),
    };
    let kind = match kind {
        DerivKind::X2 => KernelKind::X2,
        DerivKind::Xy => KernelKind::Xy,
        DerivKind::Y2 => unreachable!(),
    };
    Kernel::new(kind, coeffs)
}

/// Rebuild a second-order kernel by composing the gradient kernel with
/// itself: a full linear convolution with the kernel (x2) or with its
/// counterclockwise quarter-turn (xy), then stripping all-zero rings.
/// The counterclockwise turn is what reproduces the frozen tables'
/// xy sign orientation exactly.
pub fn compose_second_order(name: GradientName, kind: DerivKind) -> Kernel {
    let g = classic_gradient(name);
    let (tag, full) = match kind {
        DerivKind::X2 => (KernelKind::X2, g.coeffs.convolve_full(&g.coeffs)),
        DerivKind::Y2 => (
            KernelKind::Y2,
            g.coeffs.convolve_full(&g.coeffs).rotate_cw(),
        ),
        DerivKind::Xy => (
            KernelKind::Xy,
            g.coeffs.convolve_full(&g.coeffs.rotate_ccw()),
        ),
    };
    Kernel::new(tag, full.trim_zero_rings())
}

fn require_scale(n: u32) -> Result<i64> {
    if n < 1 {
        return Err(Error::InvalidParameter(
            "kernel scale n must be at least 1".into(),
        ));
    }
    Ok(n as i64)
}

/// Gradient-variation kernel for the horizontal second derivative:
/// middle row `1/(2n)` at column offsets -n and +n, `-2/(2n)` at the
/// center, zero elsewhere. Its response to samples of x^2 is n.
pub fn ky_x2(n: u32) -> Result<Kernel> {
    let ni = require_scale(n)?;
    let size = (2 * ni + 1) as usize;
    let mut m = RationalMatrix::zeros(size, size);
    let mid = ni as usize;
    m.set(mid, 0, rat(1, 2 * ni as i128));
    m.set(mid, mid, rat(-2, 2 * ni as i128));
    m.set(mid, size - 1, rat(1, 2 * ni as i128));
    Ok(Kernel::new(KernelKind::X2, m))
}

/// Gradient-variation kernel for the mixed derivative: nonzero only on the
/// window ring away from the axes, with magnitude `1/(4|i||j|)` at offset
/// (i, j) and the sign of i*j (top-left corner positive).
pub fn ky_xy(n: u32) -> Result<Kernel> {
    let ni = require_scale(n)?;
    let size = (2 * ni + 1) as usize;
    let mut m = RationalMatrix::zeros(size, size);
    for i in -ni..=ni {
        for j in -ni..=ni {
            if i == 0 || j == 0 || (i.abs() != ni && j.abs() != ni) {
                continue;
            }
            let magnitude = rat(1, 4 * (i.abs() * j.abs()) as i128);
            let value = if i.signum() == j.signum() {
                magnitude
            } else {
                -magnitude
            };
            m.set((i + ni) as usize, (j + ni) as usize, value);
        }
    }
    Ok(Kernel::new(KernelKind::Xy, m))
}

// ---------------------------------------------------------------------------
// Lagrange-interpolation stencils (symbolic route)
// ---------------------------------------------------------------------------

/// Multiply two polynomials given as coefficient vectors (index = power).
fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = out[i + j] + ai * bj;
        }
    }
    out
}

/// Coefficients of the Lagrange basis polynomial for `node` over the
/// integer nodes -n..=n.
fn lagrange_basis_coeffs(n: i64, node: i64) -> Vec<Rational> {
    let mut coeffs = vec![Rational::one()];
    let mut denom = Rational::one();
    for k in -n..=n {
        if k == node {
            continue;
        }
        coeffs = poly_mul(&coeffs, &[Rational::from_integer(-(k as i128)), Rational::one()]);
        denom *= Rational::from_integer((node - k) as i128);
    }
    let inv = denom.recip();
    coeffs.into_iter().map(|c| c * inv).collect()
}

/// 1-D stencil of the exact first derivative at 0 of the degree-2n
/// polynomial interpolating (k, f(k)) for k in -n..=n, obtained by
/// symbolic differentiation of each basis polynomial.
pub fn lagrange_d1(n: u32) -> Result<RationalMatrix> {
    let ni = require_scale(n)?;
    let row: Vec<Rational> = (-ni..=ni)
        .map(|node| lagrange_basis_coeffs(ni, node)[1])
        .collect();
    Ok(RationalMatrix::from_rows(vec![row]))
}

/// Second-derivative-at-0 stencil of the same interpolant (2 * the
/// quadratic coefficient of each basis polynomial).
fn lagrange_d2(n: i64) -> Vec<Rational> {
    (-n..=n)
        .map(|node| lagrange_basis_coeffs(n, node)[2] * Rational::from_integer(2))
        .collect()
}

/// Interpolation kernel for the horizontal second derivative: the 1-D
/// second-derivative stencil placed in the middle row. Only the center
/// row of the window contributes because the interpolant is evaluated at
/// the window center, where every off-row basis function vanishes.
pub fn ko_x2(n: u32) -> Result<Kernel> {
    let ni = require_scale(n)?;
    let size = (2 * ni + 1) as usize;
    let stencil = lagrange_d2(ni);
    let mut m = RationalMatrix::zeros(size, size);
    for (j, &w) in stencil.iter().enumerate() {
        m.set(ni as usize, j, w);
    }
    Ok(Kernel::new(KernelKind::X2, m))
}

/// Interpolation kernel for the mixed derivative: the outer product of the
/// first-derivative stencil with itself (top-left corner positive).
pub fn ko_xy(n: u32) -> Result<Kernel> {
    require_scale(n)?;
    let d1 = lagrange_d1(n)?;
    let len = d1.cols();
    let mut m = RationalMatrix::zeros(len, len);
    for i in 0..len {
        for j in 0..len {
            m.set(i, j, d1.get(0, i) * d1.get(0, j));
        }
    }
    Ok(Kernel::new(KernelKind::Xy, m))
}

// ---------------------------------------------------------------------------
// Independent brute-force oracle (nested sum-product route)
// ---------------------------------------------------------------------------

/// `l_j(0)` by direct product evaluation.
fn basis_value_at_zero(n: i64, node: i64) -> Rational {
    let mut acc = Rational::one();
    for k in -n..=n {
        if k != node {
            acc *= rat(-(k as i128), (node - k) as i128);
        }
    }
    acc
}

/// `l_j'(0)` by the sum-of-products expansion of the derivative.
fn basis_d1_at_zero(n: i64, node: i64) -> Rational {
    let mut total = Rational::zero();
    for k in -n..=n {
        if k == node {
            continue;
        }
        let mut term = rat(1, (node - k) as i128);
        for l in -n..=n {
            if l != node && l != k {
                term *= rat(-(l as i128), (node - l) as i128);
            }
        }
        total += term;
    }
    total
}

/// `l_j''(0)` by the doubly nested expansion (ordered pairs of dropped
/// factors).
fn basis_d2_at_zero(n: i64, node: i64) -> Rational {
    let mut total = Rational::zero();
    for k in -n..=n {
        if k == node {
            continue;
        }
        for l in -n..=n {
            if l == node || l == k {
                continue;
            }
            let mut term = rat(1, (node - k) as i128) * rat(1, (node - l) as i128);
            for m in -n..=n {
                if m != node && m != k && m != l {
                    term *= rat(-(m as i128), (node - m) as i128);
                }
            }
            total += term;
        }
    }
    total
}

/// Brute-force second derivative at the center of an odd square window:
/// builds the tensor-product Lagrange interpolant through every window
/// sample and differentiates it directly via the nested sum-product
/// formulas, without touching the generated kernels. Row index i moves
/// down (y), column index j moves right (x).
pub fn oracle_second_derivative(window: &[Vec<f64>], kind: DerivKind) -> f64 {
    let size = window.len();
    assert!(size % 2 == 1, "window must be odd-sized");
    assert!(
        window.iter().all(|r| r.len() == size),
        "window must be square"
    );
    let n = (size as i64 - 1) / 2;

    let weight = |w: Rational| *w.numer() as f64 / *w.denom() as f64;
    let mut total = 0.0;
    for (ri, row) in window.iter().enumerate() {
        let i = ri as i64 - n;
        let row_w = match kind {
            DerivKind::X2 => basis_value_at_zero(n, i),
            DerivKind::Y2 => basis_d2_at_zero(n, i),
            DerivKind::Xy => basis_d1_at_zero(n, i),
        };
        if row_w.is_zero() {
            continue;
        }
        let row_w = weight(row_w);
        for (cj, &sample) in row.iter().enumerate() {
            let j = cj as i64 - n;
            let col_w = match kind {
                DerivKind::X2 => basis_d2_at_zero(n, j),
                DerivKind::Y2 => basis_value_at_zero(n, j),
                DerivKind::Xy => basis_d1_at_zero(n, j),
            };
            if !col_w.is_zero() {
                total += row_w * weight(col_w) * sample;
            }
        }
    }
    total
}
