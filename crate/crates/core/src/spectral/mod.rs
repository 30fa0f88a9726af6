//! Doubly periodic 2-D spectral fields: unitary transforms, radial
//! multiplier application, dealiasing, exact padded products, weighted
//! Sobolev/Gevrey norms, and the Bernstein ratio probe.
//!
//! The frequency lattice of an N x N grid with box side L is
//! `k = (k1, k2) in {-N/2+1, ..., N/2} * (2 pi / L)` per dimension. The
//! transform pair is unitary: `sum_k |f_hat(k)|^2 = sum_x |f(x)|^2`, so the
//! discrete L^2 norm reads directly off the coefficients.

mod lp;
mod snapshot;

pub use lp::{besov_norm, lp_block_weight, lp_bump_zeta, lp_partition, LPBlocks};
pub use snapshot::{load_field, save_field};

use crate::error::{CoreError, Result};
use crate::multipliers::SymbolExpr;
use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

/// Exponent cap for Gevrey weights: e^700 is near the top of f64 range, and
/// capping with an explicit saturation flag keeps the failure observable
/// instead of overflowing the norm to infinity.
pub const GEVREY_EXPONENT_CAP: f64 = 700.0;

/// Geometry of the periodic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Modes (and samples) per dimension; must be even.
    pub n: usize,
    /// Box side length.
    pub l_box: f64,
    /// Fraction of the Nyquist range kept by dealiasing, per dimension.
    pub dealias_fraction: f64,
}

impl GridSpec {
    /// Standard grid: period 2 pi, two-thirds dealiasing.
    pub fn new(n: usize) -> Result<Self> {
        GridSpec::with_box(n, 2.0 * PI)
    }

    /// Grid with an explicit box side.
    pub fn with_box(n: usize, l_box: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(CoreError::ShapeMismatch(format!(
                "grid size must be even and at least 4, got {n}"
            )));
        }
        if !l_box.is_finite() || l_box <= 0.0 {
            return Err(CoreError::ShapeMismatch(format!(
                "box side must be positive, got {l_box}"
            )));
        }
        Ok(GridSpec {
            n,
            l_box,
            dealias_fraction: 2.0 / 3.0,
        })
    }

    /// Signed integer mode number at array index `i`: indices above N/2 wrap
    /// to negatives, giving the range {-N/2+1, ..., N/2}.
    pub fn mode_int(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Physical wavenumber at array index `i`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.mode_int(i) as f64 * 2.0 * PI / self.l_box
    }

    /// Euclidean |k| at index pair `(i1, i2)`.
    pub fn k_abs(&self, i1: usize, i2: usize) -> f64 {
        let k1 = self.wavenumber(i1);
        let k2 = self.wavenumber(i2);
        k1.hypot(k2)
    }

    /// Largest integer mode kept by the dealiasing rule.
    pub fn dealias_cut(&self) -> i64 {
        ((self.n as f64 / 2.0) * self.dealias_fraction).floor() as i64
    }

    /// Largest |k| on the grid (corner mode).
    pub fn k_max(&self) -> f64 {
        let m = (self.n / 2) as f64 * 2.0 * PI / self.l_box;
        m * std::f64::consts::SQRT_2
    }

    /// Physical sample coordinates along one axis.
    pub fn axis(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| i as f64 * self.l_box / self.n as f64)
            .collect()
    }
}

/// A real field stored by its Fourier coefficients.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Array2<Complex64>,
    zero_mean: bool,
}

impl SpectralField {
    /// Wraps a coefficient array, deriving the zero-mean flag.
    pub fn from_coeffs(grid: GridSpec, coeffs: Array2<Complex64>) -> Result<Self> {
        if coeffs.dim() != (grid.n, grid.n) {
            return Err(CoreError::ShapeMismatch(format!(
                "coefficient array {:?} does not match grid N = {}",
                coeffs.dim(),
                grid.n
            )));
        }
        let l2_sq: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        let zero_mean = coeffs[[0, 0]].norm() <= 1e-12 * l2_sq.sqrt().max(f64::MIN_POSITIVE);
        Ok(SpectralField {
            grid,
            coeffs,
            zero_mean,
        })
    }

    /// The zero field.
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: Array2::zeros((grid.n, grid.n)),
            zero_mean: true,
        }
    }

    /// Forward transform of physical samples.
    pub fn from_physical(grid: GridSpec, samples: &Array2<f64>) -> Result<Self> {
        if samples.dim() != (grid.n, grid.n) {
            return Err(CoreError::ShapeMismatch(format!(
                "sample array {:?} does not match grid N = {}",
                samples.dim(),
                grid.n
            )));
        }
        let mut data = samples.mapv(|v| Complex64::new(v, 0.0));
        fft2(&mut data, FftDirection::Forward);
        let scale = 1.0 / grid.n as f64;
        data.mapv_inplace(|c| c * scale);
        SpectralField::from_coeffs(grid, data)
    }

    /// Inverse transform to physical samples (real part; the imaginary
    /// residue of a Hermitian spectrum is transform roundoff).
    pub fn to_physical(&self) -> Array2<f64> {
        let mut data = self.coeffs.clone();
        fft2(&mut data, FftDirection::Inverse);
        let scale = 1.0 / self.grid.n as f64;
        data.mapv(|c| c.re * scale)
    }

    /// Grid geometry.
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Coefficient array.
    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    /// Mutable coefficient access for in-place construction; the zero-mean
    /// flag is re-derived when the field is next wrapped.
    pub fn coeffs_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coeffs
    }

    /// Whether the mean (k = 0 coefficient) vanishes.
    pub fn zero_mean(&self) -> bool {
        self.zero_mean
    }

    /// Discrete L^2 norm, `(sum_k |f_hat|^2)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Max of |f| over the physical grid samples. A lower bound on the true
    /// supremum of the trigonometric interpolant, adequate for the smooth
    /// fields the experiments use.
    pub fn linf_norm(&self) -> f64 {
        self.to_physical().iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// Zeroes every mode outside the dealiasing box (per-dimension integer
    /// cut at `dealias_fraction * N/2`).
    pub fn dealiased(&self) -> SpectralField {
        let cut = self.grid.dealias_cut();
        let mut coeffs = self.coeffs.clone();
        for ((i1, i2), c) in coeffs.indexed_iter_mut() {
            if self.grid.mode_int(i1).abs() > cut || self.grid.mode_int(i2).abs() > cut {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        SpectralField::from_coeffs(self.grid, coeffs).expect("shape preserved")
    }

    /// Subtracts the mean, making the field exactly zero-mean.
    pub fn without_mean(&self) -> SpectralField {
        let mut coeffs = self.coeffs.clone();
        coeffs[[0, 0]] = Complex64::new(0.0, 0.0);
        SpectralField::from_coeffs(self.grid, coeffs).expect("shape preserved")
    }

    /// Largest deviation from Hermitian symmetry, relative to the L^2 norm;
    /// identically zero spectra report zero.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n;
        let mut worst = 0.0f64;
        for i1 in 0..n {
            for i2 in 0..n {
                let j1 = (n - i1) % n;
                let j2 = (n - i2) % n;
                let d = (self.coeffs[[i1, i2]] - self.coeffs[[j1, j2]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / self.l2_norm().max(f64::MIN_POSITIVE)
    }
}

/// How [`apply_multiplier`] treats the k = 0 coefficient when the symbol is
/// singular at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroModeRule {
    /// Zero out the mean.
    Zero,
    /// Pass the mean through unchanged.
    Keep,
    /// Refuse: report `SingularAtOrigin`.
    Error,
}

/// Coefficient-wise product with the radial symbol `sym(|k|)`.
///
/// Real radial symbols preserve Hermitian symmetry. Symbol values are
/// memoized per squared integer radius, so the cost is one `eval` per
/// distinct |k| on the grid.
pub fn apply_multiplier(
    f: &SpectralField,
    sym: &SymbolExpr,
    rule: ZeroModeRule,
) -> Result<SpectralField> {
    let grid = f.grid();
    let mut cache: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    let two_pi_over_l = 2.0 * PI / grid.l_box;
    let mut coeffs = f.coeffs().clone();
    for ((i1, i2), c) in coeffs.indexed_iter_mut() {
        let m1 = grid.mode_int(i1);
        let m2 = grid.mode_int(i2);
        let rsq = (m1 * m1 + m2 * m2) as u64;
        if rsq == 0 {
            match sym.eval(0.0) {
                Ok(v) => *c *= v,
                Err(CoreError::SingularAtOrigin(_)) => match rule {
                    ZeroModeRule::Zero => *c = Complex64::new(0.0, 0.0),
                    ZeroModeRule::Keep => {}
                    ZeroModeRule::Error => {
                        return Err(CoreError::SingularAtOrigin(format!(
                            "{sym} undefined at k = 0 and zero-mode rule is `error`"
                        )))
                    }
                },
                Err(e) => return Err(e),
            }
            continue;
        }
        let v = match cache.get(&rsq) {
            Some(&v) => v,
            None => {
                let r = (rsq as f64).sqrt() * two_pi_over_l;
                let v = sym.eval(r)?;
                cache.insert(rsq, v);
                v
            }
        };
        *c *= v;
    }
    SpectralField::from_coeffs(grid, coeffs)
}

/// Spectral partial derivative along one axis (0 or 1): multiplies each
/// coefficient by `i * k_axis`. Exact for trigonometric polynomials and
/// commutes with every radial multiplier and dealiasing mask.
pub fn partial_derivative(f: &SpectralField, axis: usize) -> SpectralField {
    assert!(axis < 2, "axis must be 0 or 1");
    let grid = f.grid();
    let mut coeffs = f.coeffs().clone();
    for ((i1, i2), c) in coeffs.indexed_iter_mut() {
        let k = grid.wavenumber(if axis == 0 { i1 } else { i2 });
        *c *= Complex64::new(0.0, k);
    }
    SpectralField::from_coeffs(grid, coeffs).expect("shape preserved")
}

/// Weighted norm with an arbitrary radial weight function:
/// `(sum_k base(|k|)^2 w(|k|)^2 |f_hat(k)|^2)^(1/2)` where `base` is
/// `|k|^sigma` (homogeneous, k = 0 skipped) or `(1+|k|^2)^(sigma/2)`.
///
/// This is the escape hatch for weights outside the symbol grammar, e.g.
/// fractional powers of a shifted dissipation symbol. Modes with zero energy
/// are skipped, so `w` is never evaluated where it cannot matter.
pub fn custom_weighted_norm(
    f: &SpectralField,
    sigma: f64,
    homogeneous: bool,
    w: &dyn Fn(f64) -> Result<f64>,
) -> Result<f64> {
    let grid = f.grid();
    if homogeneous && sigma < 0.0 && !f.zero_mean() {
        return Err(CoreError::ZeroModeUndefined(format!(
            "homogeneous norm of order {sigma} needs a zero-mean field"
        )));
    }
    let mut cache: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    let two_pi_over_l = 2.0 * PI / grid.l_box;
    let mut sum = 0.0f64;
    for ((i1, i2), c) in f.coeffs().indexed_iter() {
        let energy = c.norm_sqr();
        if energy == 0.0 {
            continue;
        }
        let m1 = grid.mode_int(i1);
        let m2 = grid.mode_int(i2);
        let rsq = (m1 * m1 + m2 * m2) as u64;
        if rsq == 0 && homogeneous {
            continue;
        }
        let weight = match cache.get(&rsq) {
            Some(&v) => v,
            None => {
                let r = (rsq as f64).sqrt() * two_pi_over_l;
                let base = if homogeneous {
                    r.powf(sigma)
                } else {
                    (1.0 + r * r).powf(sigma / 2.0)
                };
                let v = base * w(r)?;
                cache.insert(rsq, v);
                v
            }
        };
        sum += weight * weight * energy;
    }
    Ok(sum.sqrt())
}

/// Exact product of two band-limited fields: both inputs are zero-padded to
/// a 2N grid, multiplied pointwise in physical space, and truncated back, so
/// the result is the exact Galerkin projection of the product whenever the
/// combined bandwidth stays below the doubled Nyquist frequency.
pub fn product_padded(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    if a.grid() != b.grid() {
        return Err(CoreError::ShapeMismatch(
            "padded product requires matching grids".into(),
        ));
    }
    let grid = a.grid();
    let big = GridSpec {
        n: 2 * grid.n,
        ..grid
    };
    let mut pa = upsample(a, big);
    let mut pb = upsample(b, big);
    fft2(&mut pa, FftDirection::Inverse);
    fft2(&mut pb, FftDirection::Inverse);
    // Unitary inverse scaling (1/M each), folded into the product.
    let inv_sq = 1.0 / (big.n as f64 * big.n as f64);
    for (pa_c, pb_c) in pa.iter_mut().zip(pb.iter()) {
        *pa_c = *pa_c * *pb_c * inv_sq;
    }
    fft2(&mut pa, FftDirection::Forward);
    let fwd_scale = 1.0 / big.n as f64;
    pa.mapv_inplace(|c| c * fwd_scale);
    let coeffs = downsample(&pa, big, grid);
    SpectralField::from_coeffs(grid, coeffs)
}

/// Zero-pads a field to a finer grid with `n_big` points per side. The
/// represented function is unchanged; only the physical-space sampling rate
/// increases. Used internally where pointwise nonlinearities need more
/// bandwidth than a single padded product provides.
pub(crate) fn padded_to(f: &SpectralField, n_big: usize) -> Result<SpectralField> {
    let grid = f.grid();
    if n_big < grid.n || n_big % 2 != 0 {
        return Err(CoreError::ShapeMismatch(format!(
            "padding target {n_big} must be an even size >= {}",
            grid.n
        )));
    }
    let big = GridSpec { n: n_big, ..grid };
    SpectralField::from_coeffs(big, upsample(f, big))
}

/// Spreads N-grid coefficients onto an M-grid (M > N), rescaling by M/N to
/// keep the represented function identical under the unitary convention.
/// The Nyquist row/column is split evenly between its two images.
fn upsample(f: &SpectralField, big: GridSpec) -> Array2<Complex64> {
    let n = f.grid().n;
    let m = big.n;
    let scale = m as f64 / n as f64;
    let mut out = Array2::<Complex64>::zeros((m, m));
    let half = n / 2;
    let map = |i: usize| -> (usize, Option<usize>, f64) {
        // Returns target index, optional mirror index, and weight per image.
        if i < half {
            (i, None, 1.0)
        } else if i == half {
            (half, Some(m - half), 0.5)
        } else {
            (i + (m - n), None, 1.0)
        }
    };
    for ((i1, i2), &c) in f.coeffs().indexed_iter() {
        let (t1, m1, w1) = map(i1);
        let (t2, m2, w2) = map(i2);
        let v = c * scale;
        for (a, wa) in std::iter::once((t1, w1)).chain(m1.map(|x| (x, w1))) {
            for (b, wb) in std::iter::once((t2, w2)).chain(m2.map(|x| (x, w2))) {
                out[[a, b]] += v * wa * wb;
            }
        }
    }
    out
}

/// Gathers M-grid coefficients back to the N-grid, folding the two Nyquist
/// images together and rescaling by N/M.
fn downsample(coeffs: &Array2<Complex64>, big: GridSpec, grid: GridSpec) -> Array2<Complex64> {
    let n = grid.n;
    let m = big.n;
    let scale = n as f64 / m as f64;
    let half = n / 2;
    let mut out = Array2::<Complex64>::zeros((n, n));
    let sources = |i: usize| -> (usize, Option<usize>) {
        if i < half {
            (i, None)
        } else if i == half {
            (half, Some(m - half))
        } else {
            (i + (m - n), None)
        }
    };
    for i1 in 0..n {
        let (s1, x1) = sources(i1);
        for i2 in 0..n {
            let (s2, x2) = sources(i2);
            let mut v = coeffs[[s1, s2]];
            if let Some(a) = x1 {
                v += coeffs[[a, s2]];
            }
            if let Some(b) = x2 {
                v += coeffs[[s1, b]];
                if let Some(a) = x1 {
                    v += coeffs[[a, b]];
                }
            }
            out[[i1, i2]] = v * scale;
        }
    }
    out
}

/// Optional Gevrey factor of a weighted norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GevreySpec {
    /// Smoothing radius; zero reduces the factor to exactly 1.
    pub lambda: f64,
    /// Smoothing rate symbol.
    pub nu: SymbolExpr,
}

/// Specification of a weighted (and optionally Gevrey) Sobolev norm.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNormSpec {
    /// Sobolev order sigma.
    pub sigma: f64,
    /// Weight symbol applied as omega(|k|).
    pub omega: SymbolExpr,
    /// Homogeneous (`|k|^sigma`, k = 0 excluded) vs inhomogeneous
    /// (`(1+|k|^2)^(sigma/2)`).
    pub homogeneous: bool,
    /// Optional Gevrey factor `e^(lambda nu(|k|))`.
    pub gevrey: Option<GevreySpec>,
}

impl WeightedNormSpec {
    /// Plain Sobolev norm of the given order and homogeneity.
    pub fn sobolev(sigma: f64, omega: SymbolExpr, homogeneous: bool) -> Self {
        WeightedNormSpec {
            sigma,
            omega,
            homogeneous,
            gevrey: None,
        }
    }
}

/// A norm value together with the Gevrey saturation flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormValue {
    /// The computed norm. Finite even under saturation: clamped terms make
    /// the value a sentinel whose magnitude is no longer meaningful.
    pub value: f64,
    /// True when the exponent cap was hit on a mode carrying energy, or a
    /// squared term had to be clamped to keep the sum representable.
    pub saturated: bool,
}

/// Evaluates `(sum_k w(k)^2 |f_hat(k)|^2)^(1/2)` with
/// `w = |k|^sigma omega(|k|) e^(lambda nu(|k|))` (homogeneous) or
/// `(1+|k|^2)^(sigma/2) omega(|k|) e^(lambda nu(|k|))` (inhomogeneous).
pub fn weighted_norm(f: &SpectralField, spec: &WeightedNormSpec) -> Result<NormValue> {
    let grid = f.grid();
    if spec.homogeneous && spec.sigma < 0.0 && !f.zero_mean() {
        return Err(CoreError::ZeroModeUndefined(format!(
            "homogeneous norm of order {} needs a zero-mean field",
            spec.sigma
        )));
    }
    let mut cache: std::collections::HashMap<u64, (f64, bool)> = std::collections::HashMap::new();
    let two_pi_over_l = 2.0 * PI / grid.l_box;
    let mut sum = 0.0f64;
    let mut saturated = false;
    for ((i1, i2), c) in f.coeffs().indexed_iter() {
        let m1 = grid.mode_int(i1);
        let m2 = grid.mode_int(i2);
        let rsq = (m1 * m1 + m2 * m2) as u64;
        if rsq == 0 {
            if spec.homogeneous {
                continue;
            }
            let w0 = spec.omega.eval(0.0)? * gevrey_factor(&spec.gevrey, 0.0)?.0;
            sum += (w0 * c.norm()).powi(2);
            continue;
        }
        let energy = c.norm_sqr();
        if energy == 0.0 {
            continue;
        }
        let (w, capped) = match cache.get(&rsq) {
            Some(&v) => v,
            None => {
                let r = (rsq as f64).sqrt() * two_pi_over_l;
                let base = if spec.homogeneous {
                    r.powf(spec.sigma)
                } else {
                    (1.0 + r * r).powf(spec.sigma / 2.0)
                };
                let (g, capped) = gevrey_factor(&spec.gevrey, r)?;
                let w = base * spec.omega.eval(r)? * g;
                cache.insert(rsq, (w, capped));
                (w, capped)
            }
        };
        if capped && energy > 0.0 {
            saturated = true;
        }
        let mut term = w * w * energy;
        // A capped weight of e^700 still overflows once squared; clamp the
        // term (flagged) so the total stays finite and observable.
        if !term.is_finite() {
            term = f64::MAX * 1e-10;
            if energy > 0.0 {
                saturated = true;
            }
        }
        sum += term;
    }
    Ok(NormValue {
        value: sum.sqrt(),
        saturated,
    })
}

/// The Gevrey factor and whether the cap was applied at this radius.
fn gevrey_factor(g: &Option<GevreySpec>, r: f64) -> Result<(f64, bool)> {
    match g {
        None => Ok((1.0, false)),
        Some(spec) => {
            let e = spec.lambda * spec.nu.eval(r)?;
            if e > GEVREY_EXPONENT_CAP {
                Ok((GEVREY_EXPONENT_CAP.exp(), true))
            } else {
                Ok((e.exp(), false))
            }
        }
    }
}

/// Bernstein ratio `||Lambda^sigma block||_2 / (2^(sigma j) ||block||_2)` for
/// a field supported in the dyadic annulus `A_j = (2^(j-1), 2^(j+1))`.
///
/// The support bound forces the ratio into `[2^(-|sigma|), 2^(|sigma|)]`.
pub fn bernstein_probe(j: i32, block: &SpectralField, sigma: f64) -> Result<f64> {
    let grid = block.grid();
    let lo = 2f64.powi(j - 1);
    let hi = 2f64.powi(j + 1);
    let l2 = block.l2_norm();
    if l2 == 0.0 {
        return Err(CoreError::EmptyBlock(j));
    }
    let mut weighted = 0.0f64;
    for ((i1, i2), c) in block.coeffs().indexed_iter() {
        let energy = c.norm_sqr();
        if energy == 0.0 {
            continue;
        }
        let r = grid.k_abs(i1, i2);
        if r <= lo || r >= hi {
            return Err(CoreError::LocalizationViolated(format!(
                "energy at |k| = {r:.6} outside the annulus ({lo}, {hi}) of shell {j}"
            )));
        }
        weighted += r.powf(2.0 * sigma) * energy;
    }
    Ok(weighted.sqrt() / (2f64.powi(j).powf(sigma) * l2))
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// In-place 2-D FFT over both axes, unnormalized (callers apply the unitary
/// 1/N per direction).
pub(crate) fn fft2(data: &mut Array2<Complex64>, direction: FftDirection) {
    let n = data.nrows();
    debug_assert_eq!(n, data.ncols());
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // Rows are contiguous in the standard layout.
    for mut row in data.rows_mut() {
        let slice = row.as_slice_mut().expect("row-major layout");
        fft.process_with_scratch(slice, &mut scratch);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[[i, j]];
        }
        fft.process_with_scratch(&mut col, &mut scratch);
        for i in 0..n {
            data[[i, j]] = col[i];
        }
    }
}
