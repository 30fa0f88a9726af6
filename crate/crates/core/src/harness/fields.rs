//! Seeded random field generators shared by the experiments and probes.
//!
//! Every generator draws complex Gaussian coefficients from a `ChaCha8`
//! stream keyed by an explicit seed, Hermitian-symmetrizes them so the
//! physical field is real, and applies a deterministic spectral envelope.
//! Two calls with the same arguments therefore produce bit-identical
//! fields on every platform.

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CoreError, Result};
use crate::spectral::{lp_block_weight, GridSpec, SpectralField};

/// Hermitian-symmetrized unit complex Gaussians:
/// `c(k) = (z(k) + conj(z(-k))) / 2` with `z` i.i.d. standard complex
/// Gaussian. The pairing index is `(n - i) % n`, which fixes the k = 0 and
/// Nyquist rows to their own mirrors and so makes them real.
fn gaussian_hermitian(grid: GridSpec, seed: u64) -> Array2<Complex64> {
    let n = grid.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = Array2::<Complex64>::zeros((n, n));
    for z in raw.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *z = Complex64::new(re, im);
    }
    let mut sym = Array2::<Complex64>::zeros((n, n));
    for ((i1, i2), out) in sym.indexed_iter_mut() {
        let j1 = (n - i1) % n;
        let j2 = (n - i2) % n;
        *out = 0.5 * (raw[[i1, i2]] + raw[[j1, j2]].conj());
    }
    sym
}

/// Smooth random field: Gaussian coefficients under the decaying envelope
/// `(1 + |k|)^{-3}`, band-limited to `max(|k_1|, |k_2|) <= k_cut`, zero
/// mean.
pub fn random_spectrum(grid: GridSpec, seed: u64, k_cut: i64) -> SpectralField {
    let mut coeffs = gaussian_hermitian(grid, seed);
    for ((i1, i2), c) in coeffs.indexed_iter_mut() {
        let m1 = grid.mode_int(i1);
        let m2 = grid.mode_int(i2);
        if (m1 == 0 && m2 == 0) || m1.abs() > k_cut || m2.abs() > k_cut {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        *c *= (1.0 + grid.k_abs(i1, i2)).powi(-3);
    }
    SpectralField::from_coeffs(grid, coeffs).expect("generator output matches its grid")
}

/// Band-limited field whose coefficients all share unit modulus (random
/// phases only), band `max(|k_1|, |k_2|) <= k_cut`, zero mean. With no
/// amplitude spread, per-mode relative comparisons sit equally far from the
/// rounding floor on every occupied mode — the right input for oracles that
/// check each mode individually.
pub fn random_phase_band(grid: GridSpec, seed: u64, k_cut: i64) -> SpectralField {
    let mut coeffs = gaussian_hermitian(grid, seed);
    for ((i1, i2), c) in coeffs.indexed_iter_mut() {
        let m1 = grid.mode_int(i1);
        let m2 = grid.mode_int(i2);
        if (m1 == 0 && m2 == 0) || m1.abs() > k_cut || m2.abs() > k_cut {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let modulus = c.norm();
        *c = if modulus == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            *c / modulus
        };
    }
    SpectralField::from_coeffs(grid, coeffs).expect("generator output matches its grid")
}

/// Random field supported exactly on the open dyadic annulus
/// `2^{j-1} < |k| < 2^{j+1}`: Gaussian coefficients masked by the smooth
/// block weight for shell `j`. The mask vanishes identically outside the
/// annulus (including at k = 0, so the result is automatically zero-mean)
/// and is strictly positive inside it.
pub fn random_annulus(grid: GridSpec, seed: u64, j: i32) -> SpectralField {
    let mut coeffs = gaussian_hermitian(grid, seed);
    for ((i1, i2), c) in coeffs.indexed_iter_mut() {
        *c *= lp_block_weight(j, grid.k_abs(i1, i2));
    }
    SpectralField::from_coeffs(grid, coeffs).expect("generator output matches its grid")
}

/// Analytic initial conditions by name. `"sinsin"` is the checkerboard
/// eigenfield `sin(x_1) sin(x_2)`, whose extrema make maximum-principle
/// violations easy to spot.
pub fn named_field(name: &str, grid: GridSpec) -> Result<SpectralField> {
    match name {
        "sinsin" => {
            let xs = grid.axis();
            let mut samples = Array2::<f64>::zeros((grid.n, grid.n));
            for ((i1, i2), v) in samples.indexed_iter_mut() {
                *v = xs[i1].sin() * xs[i2].sin();
            }
            SpectralField::from_physical(grid, &samples)
        }
        other => Err(CoreError::FileFormat(format!(
            "unknown named field '{other}' (available: sinsin)"
        ))),
    }
}

/// Rescales a field so its physical grid maximum equals `target`. Zero
/// fields are returned unchanged.
pub fn with_linf(f: &SpectralField, target: f64) -> SpectralField {
    rescaled(f, f.linf_norm(), target)
}

/// Rescales a field to the prescribed discrete L2 norm. Zero fields are
/// returned unchanged.
pub fn with_l2(f: &SpectralField, target: f64) -> SpectralField {
    rescaled(f, f.l2_norm(), target)
}

fn rescaled(f: &SpectralField, current: f64, target: f64) -> SpectralField {
    if current == 0.0 {
        return f.clone();
    }
    let factor = target / current;
    let mut coeffs = f.coeffs().clone();
    coeffs.mapv_inplace(|c| c * factor);
    SpectralField::from_coeffs(f.grid(), coeffs).expect("rescaling preserves the grid")
}
