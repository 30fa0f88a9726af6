//! Dyadic (Littlewood-Paley) frequency decomposition built from one fixed
//! smooth bump, plus the Besov norm read off the blocks.
//!
//! The cutoff is `zeta(r) = B(2(1-r))` where `B` is the normalized integral
//! of the standard C-infinity bump `exp(-1/(s(1-s)))` over [0, clamp(t, 0, 1)]:
//! `zeta = 1` on [0, 1/2], `zeta = 0` on [1, inf), smooth and strictly
//! decreasing between. The ring function `phi(r) = zeta(r/2) - zeta(r)` is
//! supported in the annulus (1/2, 2), and the masks telescope:
//! `zeta(|k|/2^jmin) + sum_j phi(|k|/2^j) = zeta(|k|/2^(jmax+1))`, which is
//! identically 1 on the grid once `2^jmax` clears the largest occupied |k| —
//! that is the whole reconstruction argument.

use super::{apply_multiplier, SpectralField, ZeroModeRule};
use crate::error::{CoreError, Result};
use crate::multipliers::{adaptive_simpson, QuadSpec, SymbolExpr};
use ndarray::Array2;
use num_complex::Complex64;
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::OnceLock;

/// Normalization `B(1)` of the bump integral, computed once per process from
/// the same quadrature used for every other value, so the cutoff is exactly
/// 1 at its left edge by construction rather than by a frozen constant.
static BUMP_TOTAL: OnceLock<f64> = OnceLock::new();

fn bump_integral(t: f64) -> f64 {
    let upper = t.clamp(0.0, 1.0);
    if upper == 0.0 {
        return 0.0;
    }
    // The integrand vanishes to all orders at both endpoints, so adaptive
    // Simpson reaches 1e-13 absolute comfortably within the depth budget.
    let spec = QuadSpec {
        abs_tol: 1e-13,
        max_depth: 48,
    };
    let f = |s: f64| -> Result<f64> {
        let d = s * (1.0 - s);
        Ok(if d <= 0.0 { 0.0 } else { (-1.0 / d).exp() })
    };
    adaptive_simpson(&f, 0.0, upper, &spec).expect("smooth bounded integrand")
}

thread_local! {
    static ZETA_CACHE: RefCell<HashMap<u64, f64>> = RefCell::new(HashMap::new());
}

/// The fixed radial cutoff: 1 on [0, 1/2], 0 on [1, inf), smooth between.
/// Values are memoized per thread since partition masks re-query the same
/// |k|/2^j ratios heavily.
pub fn lp_bump_zeta(r: f64) -> f64 {
    if r <= 0.5 {
        return 1.0;
    }
    if r >= 1.0 {
        return 0.0;
    }
    ZETA_CACHE.with(|cache| {
        let key = r.to_bits();
        if let Some(&v) = cache.borrow().get(&key) {
            return v;
        }
        let total = *BUMP_TOTAL.get_or_init(|| bump_integral(1.0));
        let v = bump_integral(2.0 * (1.0 - r)) / total;
        cache.borrow_mut().insert(key, v);
        v
    })
}

/// The ring weight `phi_j(r) = zeta(r / 2^(j+1)) - zeta(r / 2^j)` applied by
/// `lp_partition` to shell `j`: supported in the open annulus
/// `(2^(j-1), 2^(j+1))` and equal to 1 on `[2^j / sqrt(2), 2^j]` up to the
/// bump's transition regions.
pub fn lp_block_weight(j: i32, r: f64) -> f64 {
    lp_bump_zeta(r / 2f64.powi(j + 1)) - lp_bump_zeta(r / 2f64.powi(j))
}

/// A dyadic decomposition: the low-frequency part plus one block per shell.
#[derive(Debug, Clone)]
pub struct LPBlocks {
    /// Lowest shell index; the low part holds |k| <= 2^j_min.
    pub j_min: i32,
    /// Highest shell index; 2^j_max must clear the largest occupied |k|.
    pub j_max: i32,
    /// Low-frequency part, masked by `zeta(|k|/2^j_min)`.
    pub low: SpectralField,
    /// Shell blocks `(j, Delta_j f)`, each spectrally supported in the open
    /// annulus `(2^(j-1), 2^(j+1))`.
    pub blocks: Vec<(i32, SpectralField)>,
}

impl LPBlocks {
    /// The block for shell `j`, if that shell is in range.
    pub fn block(&self, j: i32) -> Option<&SpectralField> {
        self.blocks
            .iter()
            .find(|(jj, _)| *jj == j)
            .map(|(_, b)| b)
    }

    /// Coefficient-wise sum `low + sum_j blocks`, for reconstruction checks.
    pub fn reassemble(&self) -> SpectralField {
        let grid = self.low.grid();
        let mut coeffs = self.low.coeffs().clone();
        for (_, b) in &self.blocks {
            coeffs += b.coeffs();
        }
        SpectralField::from_coeffs(grid, coeffs).expect("blocks share the grid")
    }
}

/// Splits `f` into a low part and dyadic shell blocks for
/// `j in {j_min, ..., j_max}`.
///
/// Fails with `RangeTooNarrow` when `2^j_max` is below the largest |k|
/// carrying energy, since the telescoped masks then sum short of 1 and the
/// decomposition could not reconstruct the field.
pub fn lp_partition(f: &SpectralField, j_min: i32, j_max: i32) -> Result<LPBlocks> {
    if j_min > j_max {
        return Err(CoreError::RangeTooNarrow(format!(
            "empty shell range: j_min = {j_min} > j_max = {j_max}"
        )));
    }
    let grid = f.grid();
    let mut k_top = 0.0f64;
    for ((i1, i2), c) in f.coeffs().indexed_iter() {
        if c.norm_sqr() > 0.0 {
            k_top = k_top.max(grid.k_abs(i1, i2));
        }
    }
    if 2f64.powi(j_max) < k_top * (1.0 - 1e-12) {
        return Err(CoreError::RangeTooNarrow(format!(
            "2^{j_max} < |k| = {k_top:.3}: shells cannot cover the field"
        )));
    }

    let shells: Vec<i32> = (j_min..=j_max).collect();
    let mut low_c = Array2::<Complex64>::zeros((grid.n, grid.n));
    let mut block_c: Vec<Array2<Complex64>> = shells
        .iter()
        .map(|_| Array2::zeros((grid.n, grid.n)))
        .collect();
    for ((i1, i2), &c) in f.coeffs().indexed_iter() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let r = grid.k_abs(i1, i2);
        low_c[[i1, i2]] = c * lp_bump_zeta(r / 2f64.powi(j_min));
        for (idx, &j) in shells.iter().enumerate() {
            let mask = lp_bump_zeta(r / 2f64.powi(j + 1)) - lp_bump_zeta(r / 2f64.powi(j));
            if mask != 0.0 {
                block_c[idx][[i1, i2]] = c * mask;
            }
        }
    }

    Ok(LPBlocks {
        j_min,
        j_max,
        low: SpectralField::from_coeffs(grid, low_c)?,
        blocks: shells
            .into_iter()
            .zip(block_c)
            .map(|(j, c)| Ok((j, SpectralField::from_coeffs(grid, c)?)))
            .collect::<Result<Vec<_>>>()?,
    })
}

/// Weighted Besov norm `(sum_j 2^(2 sigma j) ||omega(D) Delta_j f||_2^2)^(1/2)`
/// over the shells of a decomposition (the low part is excluded: the
/// homogeneous scale sums over shells only).
pub fn besov_norm(blocks: &LPBlocks, sigma: f64, omega: &SymbolExpr) -> Result<f64> {
    let mut sum = 0.0f64;
    for (j, block) in &blocks.blocks {
        let weighted = apply_multiplier(block, omega, ZeroModeRule::Zero)?;
        let l2 = weighted.l2_norm();
        sum += 4f64.powi(*j).powf(sigma) * l2 * l2;
    }
    Ok(sum.sqrt())
}
