//! Inequality probes: empirical left/right-hand sides for the commutator
//! and product estimates that drive the uniqueness, stability, and
//! smoothing arguments.
//!
//! Probes never assert. They return [`ProbeSample`] ratios; the caller
//! checks boundedness and shell-to-shell stability. Unspecified analytic
//! constants are pinned to 1 and the dyadic envelope constants `c_j` to 1,
//! so ratios carry meaning only relative to one another — a flat ratio
//! profile across shells is the success signal, not any particular value.

use std::ops::RangeInclusive;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::multipliers::{MultiplierSuite, SymbolExpr};
use crate::solver::axpy;
use crate::spectral::{
    apply_multiplier, custom_weighted_norm, lp_block_weight, partial_derivative, product_padded,
    weighted_norm, GridSpec, SpectralField, WeightedNormSpec, ZeroModeRule,
};

use super::fields::{random_annulus, random_spectrum, with_l2};
use super::{fnv1a64, ProbeSample};

/// A pointwise radial weight `prod_i expr_i(r)^{e_i}`.
///
/// The estimates combine symbols through fractional powers (for example
/// `m1^{gamma/2}` or `p^{-1/2}`) that the symbol grammar cannot express as
/// one tree, so weighted norms built from them evaluate through this
/// numeric product instead.
#[derive(Debug, Clone)]
pub struct RadialWeight {
    factors: Vec<(SymbolExpr, f64)>,
}

impl RadialWeight {
    pub fn new(factors: Vec<(SymbolExpr, f64)>) -> Self {
        RadialWeight { factors }
    }

    /// The trivial weight 1.
    pub fn one() -> Self {
        RadialWeight {
            factors: Vec::new(),
        }
    }

    /// Evaluates the weight at radius `r`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        let mut acc = 1.0;
        for (expr, exponent) in &self.factors {
            acc *= expr.eval(r)?.powf(*exponent);
        }
        Ok(acc)
    }
}

/// The shell constant Γ in the localized commutator estimate. The analysis
/// fixes Γ only up to constitutive-law factors, so the three candidate
/// forms are all exposed; `M1` (`m1^{gamma/2}`) is the default used by
/// [`probe_commutator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaChoice {
    /// `m1(y)^{gamma/2}`
    M1,
    /// `m1(y)^{gamma/2} / p(y)`
    M1OverP,
    /// `m1(y)^{gamma/2} / sqrt(p(y))`
    M1OverSqrtP,
}

impl GammaChoice {
    pub fn eval(&self, suite: &MultiplierSuite, y: f64) -> Result<f64> {
        let base = suite.m1(y)?.powf(suite.gamma / 2.0);
        Ok(match self {
            GammaChoice::M1 => base,
            GammaChoice::M1OverP => base / suite.p(y)?,
            GammaChoice::M1OverSqrtP => base / suite.p(y)?.sqrt(),
        })
    }
}

/// Projection onto dyadic shell `j` through the smooth block weight
/// (support strictly inside `2^{j-1} < |k| < 2^{j+1}`).
pub fn block_project(f: &SpectralField, j: i32) -> SpectralField {
    let grid = f.grid();
    let mut coeffs = f.coeffs().clone();
    for ((i1, i2), c) in coeffs.indexed_iter_mut() {
        *c *= lp_block_weight(j, grid.k_abs(i1, i2));
    }
    SpectralField::from_coeffs(grid, coeffs).expect("mask preserves the grid")
}

/// The Plancherel pairing `sum_k x_hat(k) conj(y_hat(k))` of two real
/// fields (real part; the imaginary residue is roundoff).
pub fn pairing(x: &SpectralField, y: &SpectralField) -> f64 {
    x.coeffs()
        .iter()
        .zip(y.coeffs().iter())
        .map(|(a, b)| (a * b.conj()).re)
        .sum()
}

/// The same pairing evaluated as a physical grid sum `sum_x x(x) y(x)`.
/// Under the unitary transform convention the two forms agree to roundoff;
/// the determinism suite cross-checks them.
pub fn physical_pairing(x: &SpectralField, y: &SpectralField) -> f64 {
    let xp = x.to_physical();
    let yp = y.to_physical();
    xp.iter().zip(yp.iter()).map(|(a, b)| a * b).sum()
}

fn sub(x: &SpectralField, y: &SpectralField) -> SpectralField {
    axpy(-1.0, y, x)
}

/// Errors unless every occupied mode of `x` lies strictly inside the open
/// annulus `2^{j-1} < |k| < 2^{j+1}`.
fn check_annulus_support(x: &SpectralField, j: i32, label: &str) -> Result<()> {
    let lo = 2f64.powi(j - 1);
    let hi = 2f64.powi(j + 1);
    let grid = x.grid();
    for ((i1, i2), c) in x.coeffs().indexed_iter() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let r = grid.k_abs(i1, i2);
        if !(r > lo && r < hi) {
            return Err(CoreError::LocalizationViolated(format!(
                "{label} carries energy at |k| = {r:.3}, outside the open annulus ({lo}, {hi}) of shell j = {j}"
            )));
        }
    }
    Ok(())
}

/// The commutator field `[A, g] x = A(g x) - g (A x)` for the operator
/// `A = Lambda^{-s} p(D) d_axis`, with exact Galerkin products.
pub fn commutator_field(
    suite: &MultiplierSuite,
    s: f64,
    axis: usize,
    g: &SpectralField,
    x: &SpectralField,
) -> Result<SpectralField> {
    let sym = SymbolExpr::product(SymbolExpr::PowerLaw(-s), suite.p_expr());
    let apply = |f: &SpectralField| -> Result<SpectralField> {
        Ok(partial_derivative(
            &apply_multiplier(f, &sym, ZeroModeRule::Zero)?,
            axis,
        ))
    };
    let a_gx = apply(&product_padded(g, x)?)?;
    let g_ax = product_padded(g, &apply(x)?)?;
    Ok(sub(&a_gx, &g_ax))
}

/// One localized commutator measurement on shell `j`:
///
/// * lhs — the worse of the two directions of
///   `|<[Lambda^{-s} p(D) d_l, g] f, h>|`;
/// * rhs — `(p(2^j) Γ(2^j) + p_a(2^j)/ω(2^j)) · 2^{εj}
///   · ||g||_{H^{2-s-ε}_ω} ||f||_2 ||h||_2`, all constants pinned to 1.
///
/// `f` and `h` must be supported in the open annulus
/// `2^{j-1} < |k| < 2^{j+1}`; anything else is a localization error. Valid
/// parameters are `s ∈ [0,1)`, `ε ∈ [0,1]`, `s + ε ≤ 1`. Both sides are
/// homogeneous of degree one in each of `g`, `f`, `h`, so normalization of
/// the inputs cancels from the ratio.
#[allow(clippy::too_many_arguments)]
pub fn commutator_sample(
    j: i32,
    s: f64,
    eps: f64,
    suite: &MultiplierSuite,
    gamma: GammaChoice,
    g: &SpectralField,
    f: &SpectralField,
    h: &SpectralField,
    seed: u64,
) -> Result<ProbeSample> {
    if !(0.0..1.0).contains(&s) || !(0.0..=1.0).contains(&eps) || s + eps > 1.0 {
        return Err(CoreError::InvalidSuite(format!(
            "commutator probe needs s in [0,1), eps in [0,1], s+eps <= 1; got s={s}, eps={eps}"
        )));
    }
    check_annulus_support(f, j, "f")?;
    check_annulus_support(h, j, "h")?;

    let mut lhs = 0.0f64;
    for axis in 0..2 {
        let comm = commutator_field(suite, s, axis, g, f)?;
        lhs = lhs.max(pairing(&comm, h).abs());
    }

    let y = 2f64.powi(j);
    let prefactor = suite.p(y)? * gamma.eval(suite, y)? + suite.p_a.eval(y)? / suite.omega(y)?;
    let g_norm = weighted_norm(
        g,
        &WeightedNormSpec::sobolev(2.0 - s - eps, suite.omega_expr(), false),
    )?
    .value;
    let rhs = prefactor * 2f64.powf(eps * j as f64) * g_norm * f.l2_norm() * h.l2_norm();
    Ok(ProbeSample::new(j, lhs, rhs, seed))
}

/// Sweeps the localized commutator estimate over dyadic shells: for each
/// `j` in `j_range` and each trial, a smooth random `g` (band 8) against
/// an annulus-supported random `f` on shell `j`, with the default shell
/// constant Γ = `m1^{gamma/2}`.
///
/// The pairing partner `h` is the shell projection of the commutator
/// applied to `f` (the image direction), so the measured lhs tracks the
/// shell operator norm the estimate bounds. Pairing against an
/// *independent* random `h` instead would dilute the form by the square
/// root of the shell mode count — a factor-two-per-shell decay on 2-D
/// annuli that reflects the measurement, not the estimate, and would
/// swamp the shell-stability statistic the sweep exists to record.
pub fn probe_commutator(
    grid: GridSpec,
    j_range: RangeInclusive<i32>,
    s: f64,
    eps: f64,
    suite: &MultiplierSuite,
    trials: usize,
    seed: u64,
) -> Result<Vec<ProbeSample>> {
    let mut samples = Vec::new();
    for j in j_range {
        for t in 0..trials {
            let ts = seed ^ fnv1a64(format!("commutator:{j}:{t}").as_bytes());
            let g = random_spectrum(grid, ts, 8);
            let f = random_annulus(grid, ts ^ 0x9e37_79b9_7f4a_7c15, j);
            let h = with_l2(
                &block_project(&commutator_field(suite, s, 0, &g, &f)?, j),
                1.0,
            );
            samples.push(commutator_sample(
                j,
                s,
                eps,
                suite,
                GammaChoice::M1,
                &g,
                &f,
                &h,
                ts,
            )?);
        }
    }
    Ok(samples)
}

/// Unlocalized commutator estimate: no shell restriction on `f`, `h`.
///
/// * lhs — as in [`commutator_sample`];
/// * rhs — `||g||_{H^{2-s-δ}} (||p_a(D) f||_{Ḣ^ε} ||h||_2 +
///   ||p_a(D) h||_{Ḣ^ε} ||f||_2)` with the *unweighted* Sobolev norm on
///   `g` and `δ = ε/2` (the estimate holds for any `δ < ε`; the midpoint
///   is recorded in reports).
///
/// Returned samples carry `j = -1` since no shell is involved. Requires
/// `s ∈ [0,1)`, `ε ∈ (0,1]`, `s + ε ≤ 1`.
pub fn probe_commutator_unlocalized(
    grid: GridSpec,
    s: f64,
    eps: f64,
    suite: &MultiplierSuite,
    trials: usize,
    seed: u64,
) -> Result<Vec<ProbeSample>> {
    if !(0.0..1.0).contains(&s) || !(eps > 0.0 && eps <= 1.0) || s + eps > 1.0 {
        return Err(CoreError::InvalidSuite(format!(
            "unlocalized commutator probe needs s in [0,1), eps in (0,1], s+eps <= 1; got s={s}, eps={eps}"
        )));
    }
    let delta = eps / 2.0;
    let band = (grid.n / 3) as i64;
    let mut samples = Vec::new();
    for t in 0..trials {
        let ts = seed ^ fnv1a64(format!("unlocalized:{t}").as_bytes());
        let g = random_spectrum(grid, ts, 8);
        let f = random_spectrum(grid, ts ^ 0x9e37_79b9_7f4a_7c15, band);
        let h = random_spectrum(grid, ts ^ 0x2545_f491_4f6c_dd1d, band);

        let mut lhs = 0.0f64;
        for axis in 0..2 {
            let comm = commutator_field(suite, s, axis, &g, &f)?;
            lhs = lhs.max(pairing(&comm, &h).abs());
        }

        let g_norm = weighted_norm(
            &g,
            &WeightedNormSpec::sobolev(2.0 - s - delta, SymbolExpr::Identity, false),
        )?
        .value;
        let graded = |x: &SpectralField| -> Result<f64> {
            let px = apply_multiplier(x, &suite.p_a, ZeroModeRule::Zero)?;
            weighted_norm(
                &px,
                &WeightedNormSpec::sobolev(eps, SymbolExpr::Identity, true),
            )
            .map(|nv| nv.value)
        };
        let rhs = g_norm * (graded(&f)? * h.l2_norm() + graded(&h)? * f.l2_norm());
        samples.push(ProbeSample::new(-1, lhs, rhs, ts));
    }
    Ok(samples)
}

/// Weighted-block commutator estimate at Gevrey rate zero: the operator is
/// `B = ω(D) Λ^r Δ_j d_l` with `r = s`, `s̄ = 1`, where `Δ_j` is the smooth
/// dyadic block. The estimate itself places `f` and `g` freely and only
/// needs `h` shell-localized; the sweep draws `f` on shell `j` so its
/// right-hand norms carry the same power of `2^j` as the left side does,
/// and pairs against the image direction (see [`probe_commutator`]) —
/// otherwise the ratio profile would just replay the decay of the test
/// field's spectrum across shells. At rate zero the exponential factors in
/// the estimate are exactly one and the dyadic prefactor `2^{(r-s-s̄+1)j}`
/// is exactly `2^0`, so the ratio profile isolates the weight bookkeeping:
///
/// rhs = `Γ(2^j) [ π^{s,1}_{ω₁,ω̃₁}(f, Λg) + π^{1,s}_{ω₂,ω̃₂}(Λg, f)
///        + ρ^{s,1}_{ω₃,ω̃₃}(f, Λg) ] ||h||_2`
///
/// with `(ω₁,ω̃₁) = (ω, m1^{γ/2} p^{-1} ω)`, `(ω₂,ω̃₂) = (p^{-1} ω,
/// m1^{γ/2} ω)`, `(ω₃,ω̃₃) = (ω, m1^{γ/2} p^{-1} ω)`, `Γ = m1^{γ/2}`.
/// Positive Gevrey rates are exercised end-to-end by the smoothing
/// experiment instead.
pub fn probe_commutator_gevrey(
    grid: GridSpec,
    j_range: RangeInclusive<i32>,
    s: f64,
    suite: &MultiplierSuite,
    trials: usize,
    seed: u64,
) -> Result<Vec<ProbeSample>> {
    if !(0.0..=1.0).contains(&s) {
        return Err(CoreError::InvalidSuite(format!(
            "block commutator probe needs s in [0,1]; got s={s}"
        )));
    }
    let sbar = 1.0;
    // Operator order; the estimate is probed on the diagonal r = s, which
    // keeps the dyadic prefactor formula visible below.
    let r_op = s;
    let omega = suite.omega_expr();
    let m1 = SymbolExpr::one_plus(suite.m.clone());
    let half_gamma = suite.gamma / 2.0;
    let w1 = (
        RadialWeight::new(vec![(omega.clone(), 1.0)]),
        RadialWeight::new(vec![
            (m1.clone(), half_gamma),
            (suite.p_expr(), -1.0),
            (omega.clone(), 1.0),
        ]),
    );
    let w2 = (
        RadialWeight::new(vec![(suite.p_expr(), -1.0), (omega.clone(), 1.0)]),
        RadialWeight::new(vec![(m1.clone(), half_gamma), (omega.clone(), 1.0)]),
    );
    let w3 = w1.clone();
    let gamma_weight = RadialWeight::new(vec![(m1, half_gamma)]);

    let op_sym = SymbolExpr::product(omega, SymbolExpr::PowerLaw(s));
    let mut samples = Vec::new();
    for j in j_range {
        for t in 0..trials {
            let ts = seed ^ fnv1a64(format!("gevrey-block:{j}:{t}").as_bytes());
            let g = random_spectrum(grid, ts, 8);
            let f = random_annulus(grid, ts ^ 0x9e37_79b9_7f4a_7c15, j);

            let apply = |x: &SpectralField, axis: usize| -> Result<SpectralField> {
                let weighted = apply_multiplier(x, &op_sym, ZeroModeRule::Zero)?;
                Ok(partial_derivative(&block_project(&weighted, j), axis))
            };
            let commutator = |axis: usize| -> Result<SpectralField> {
                let b_gf = apply(&product_padded(&g, &f)?, axis)?;
                let g_bf = product_padded(&g, &apply(&f, axis)?)?;
                Ok(sub(&b_gf, &g_bf))
            };
            let h = with_l2(&block_project(&commutator(0)?, j), 1.0);
            let mut lhs = 0.0f64;
            for axis in 0..2 {
                lhs = lhs.max(pairing(&commutator(axis)?, &h).abs());
            }

            let lam_g = apply_multiplier(&g, &SymbolExpr::PowerLaw(1.0), ZeroModeRule::Zero)?;
            let y = 2f64.powi(j);
            let dyadic = 2f64.powf((r_op - s - sbar + 1.0) * j as f64);
            let t1 = pi_product(&f, s, &w1.0, &lam_g, sbar, &w1.1)?;
            let t2 = pi_product(&lam_g, sbar, &w2.0, &f, s, &w2.1)?;
            let t3 = rho_product(&f, s, &w3.0, &lam_g, sbar, &w3.1)?;
            let rhs = gamma_weight.eval(y)? * dyadic * (t1 + t2 + t3) * h.l2_norm();
            samples.push(ProbeSample::new(j, lhs, rhs, ts));
        }
    }
    Ok(samples)
}

/// `π^{r,t}_{ϱ,ϱ̃}(a, b)`: the first factor is the homogeneous weighted
/// norm for `r` below the critical order 1 (= d/2) and the inhomogeneous
/// one exactly at it; the second factor is always homogeneous.
fn pi_product(
    a: &SpectralField,
    ra: f64,
    wa: &RadialWeight,
    b: &SpectralField,
    rb: f64,
    wb: &RadialWeight,
) -> Result<f64> {
    debug_assert!(ra <= 1.0, "pi requires first order <= d/2 = 1");
    let na = custom_weighted_norm(a, ra, ra < 1.0, &|r| wa.eval(r))?;
    let nb = custom_weighted_norm(b, rb, true, &|r| wb.eval(r))?;
    Ok(na * nb)
}

/// `ρ^{r,t}_{ϱ,ϱ̃}(a, b)`: both factors homogeneous.
fn rho_product(
    a: &SpectralField,
    ra: f64,
    wa: &RadialWeight,
    b: &SpectralField,
    rb: f64,
    wb: &RadialWeight,
) -> Result<f64> {
    let na = custom_weighted_norm(a, ra, true, &|r| wa.eval(r))?;
    let nb = custom_weighted_norm(b, rb, true, &|r| wb.eval(r))?;
    Ok(na * nb)
}

/// The weight instantiation for the dyadic product estimate: the
/// shell-level weight `omega` (whose reciprocal at `2^j` prefixes the
/// bound) plus the three weight pairs and shell constants.
#[derive(Debug, Clone)]
pub struct ProductWeights {
    pub omega: RadialWeight,
    pub pairs: [(RadialWeight, RadialWeight); 3],
    pub gammas: [RadialWeight; 3],
}

impl ProductWeights {
    /// The instantiation used to close the weighted energy estimate at
    /// `(s, s̄) = (1, 0)`: `(ω₁,ω̃₁) = (p^{-1}ω, m1^{γ/2}ω)`,
    /// `(ω₂,ω̃₂) = (ω, p^{-1} m1^{γ/2} ω)`, `(ω₃,ω̃₃) = (p^{-1}ω,
    /// m1^{γ/2}ω)`, `Γ₁ = Γ₂ = Γ₃ = m1^{γ/2}`, shell weight `ω`.
    pub fn constitutive(suite: &MultiplierSuite) -> ProductWeights {
        let omega = suite.omega_expr();
        let p = suite.p_expr();
        let m1 = SymbolExpr::one_plus(suite.m.clone());
        let half_gamma = suite.gamma / 2.0;
        let p_inv_omega = RadialWeight::new(vec![(p.clone(), -1.0), (omega.clone(), 1.0)]);
        let m1_omega = RadialWeight::new(vec![(m1.clone(), half_gamma), (omega.clone(), 1.0)]);
        let p_inv_m1_omega = RadialWeight::new(vec![
            (p, -1.0),
            (m1.clone(), half_gamma),
            (omega.clone(), 1.0),
        ]);
        let gamma_weight = RadialWeight::new(vec![(m1, half_gamma)]);
        ProductWeights {
            omega: RadialWeight::new(vec![(omega.clone(), 1.0)]),
            pairs: [
                (p_inv_omega.clone(), m1_omega.clone()),
                (RadialWeight::new(vec![(omega, 1.0)]), p_inv_m1_omega),
                (p_inv_omega, m1_omega),
            ],
            gammas: [
                gamma_weight.clone(),
                gamma_weight.clone(),
                gamma_weight,
            ],
        }
    }
}

/// One dyadic shell of the weighted product estimate:
///
/// * lhs — `||Δ_j(f g)||_2` through the smooth block and exact Galerkin
///   product;
/// * rhs — `ω(2^j)^{-1} 2^{-(s+s̄-1)j} [ Γ₁(2^j) π^{s,s̄}_{ω₁,ω̃₁}(f,g)
///   + Γ₂(2^j) π^{s̄,s}_{ω₂,ω̃₂}(g,f) + Γ₃(2^j) ρ^{s,s̄}_{ω₃,ω̃₃}(f,g) ]`,
///   with the analytic constant and `c_j` both pinned to 1.
///
/// Sampling: `f` is a smooth band-8 field — it carries the order-`s`
/// factors — while `g` is drawn on shell `j` and rides the order-`s̄`
/// slots. With `s̄ = 0` this makes every right-hand `g`-norm scale with
/// `2^j` exactly as `||Δ_j(f g)||_2` does, so per-shell maxima are
/// comparable across shells; two full-band draws would instead make the
/// ratio decay at the rate of their spectral envelopes.
pub fn probe_product(
    grid: GridSpec,
    j: i32,
    s: f64,
    sbar: f64,
    weights: &ProductWeights,
    trials: usize,
    seed: u64,
) -> Result<Vec<ProbeSample>> {
    if s > 1.0 || sbar > 1.0 || s + sbar <= 0.0 {
        return Err(CoreError::InvalidSuite(format!(
            "product probe needs s, sbar <= 1 with s + sbar > 0; got s={s}, sbar={sbar}"
        )));
    }
    let mut samples = Vec::new();
    for t in 0..trials {
        let ts = seed ^ fnv1a64(format!("product:{j}:{t}").as_bytes());
        let f = random_spectrum(grid, ts, 8);
        let g = random_annulus(grid, ts ^ 0x9e37_79b9_7f4a_7c15, j);

        let lhs = block_project(&product_padded(&f, &g)?, j).l2_norm();

        let y = 2f64.powi(j);
        let prefactor = weights.omega.eval(y)?.recip() * 2f64.powf(-(s + sbar - 1.0) * j as f64);
        let t1 = weights.gammas[0].eval(y)? * pi_product(&f, s, &weights.pairs[0].0, &g, sbar, &weights.pairs[0].1)?;
        let t2 = weights.gammas[1].eval(y)? * pi_product(&g, sbar, &weights.pairs[1].0, &f, s, &weights.pairs[1].1)?;
        let t3 = weights.gammas[2].eval(y)? * rho_product(&f, s, &weights.pairs[2].0, &g, sbar, &weights.pairs[2].1)?;
        let rhs = prefactor * (t1 + t2 + t3);
        samples.push(ProbeSample::new(j, lhs, rhs, ts));
    }
    Ok(samples)
}

/// Residual of the paraproduct decomposition
/// `fg = T_f g + T_g f + R(f, g)`, relative to `||fg||_2`, with
/// `T_f g = sum_k S_{k-3} f Δ_k g`, `S_m = sum_{i <= m-1} Δ_i`, and
/// `R = sum_k Δ_k f Δ̃_k g`, `Δ̃_k = sum_{|i-k| <= 3} Δ_i`.
///
/// The three index buckets `{j <= k-4}`, `{k <= j-4}`, `{|j-k| <= 3}`
/// partition all block pairs exactly, and with band-limited zero-mean
/// inputs every product is an exact Galerkin product, so the residual is
/// pure roundoff.
pub fn bony_residual(f: &SpectralField, g: &SpectralField) -> Result<f64> {
    if !(f.zero_mean() && g.zero_mean()) {
        return Err(CoreError::ZeroModeUndefined(
            "paraproduct decomposition over homogeneous blocks needs zero-mean fields".into(),
        ));
    }
    let grid = f.grid();
    let product = product_padded(f, g)?;
    let scale = product.l2_norm();
    if scale == 0.0 {
        return Ok(0.0);
    }

    let occupied_top = |x: &SpectralField| -> f64 {
        x.coeffs()
            .indexed_iter()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|((i1, i2), _)| grid.k_abs(i1, i2))
            .fold(0.0f64, f64::max)
    };
    let k_top = occupied_top(f).max(occupied_top(g)).max(1.0);
    let j_top = k_top.log2().ceil() as i32;

    let blocks = |x: &SpectralField| -> Vec<SpectralField> {
        (0..=j_top).map(|j| block_project(x, j)).collect()
    };
    let bf = blocks(f);
    let bg = blocks(g);
    // Prefix sums prefix[m] = sum_{i <= m} Δ_i.
    let prefix = |b: &[SpectralField]| -> Vec<SpectralField> {
        let mut acc = Array2::<Complex64>::zeros((grid.n, grid.n));
        b.iter()
            .map(|blk| {
                acc += blk.coeffs();
                SpectralField::from_coeffs(grid, acc.clone()).expect("accumulator matches the grid")
            })
            .collect()
    };
    let pf = prefix(&bf);
    let pg = prefix(&bg);

    let mut total = Array2::<Complex64>::zeros((grid.n, grid.n));
    for k in 0..=j_top as usize {
        // T_f g and T_g f: low-pass partner four shells down.
        if k >= 4 {
            total += product_padded(&pf[k - 4], &bg[k])?.coeffs();
            total += product_padded(&pg[k - 4], &bf[k])?.coeffs();
        }
        // R: near-diagonal window of width three.
        let lo = k.saturating_sub(3);
        let hi = (k + 3).min(j_top as usize);
        let mut window = Array2::<Complex64>::zeros((grid.n, grid.n));
        for bgi in bg.iter().take(hi + 1).skip(lo) {
            window += bgi.coeffs();
        }
        let tilde = SpectralField::from_coeffs(grid, window).expect("window matches the grid");
        total += product_padded(&bf[k], &tilde)?.coeffs();
    }

    let mut diff = product.coeffs().clone();
    diff -= &total;
    let residual = SpectralField::from_coeffs(grid, diff)
        .expect("difference matches the grid")
        .l2_norm();
    Ok(residual / scale)
}
