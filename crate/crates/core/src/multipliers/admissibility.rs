//! The admissibility decision for a multiplier suite and the family
//! threshold scan built on it.
//!
//! Admissibility requires two suprema over all frequencies y to be finite:
//!
//! ```text
//! sup1 = sup_y m1(y)^(-gamma) * I(y)^(1/2),
//!        I(y) = int_0^y r (p^2(y) + p^2(r)) / ((1 + r^2) omega^2(r)) dr,
//! sup2 = sup_y p_a(y) omega_b(y) / m1(y)^gamma,
//! ```
//!
//! with `m1 = 1 + m`. Neither supremum is computable exactly, so finiteness
//! is decided by a growth-trend statistic: the slope of `ln I(y)` regressed
//! on `2 ln m1(y)` (resp. of `ln(p_a omega_b)` on `ln m1`) over the top
//! decades of the grid estimates the limiting exponent `q` with
//! `sup finite <=> q < gamma`. The margin and fallback constants below were
//! calibrated against the analytic threshold `mu > mutilde + 1/2` for the
//! built-in log and iterated-log families; every calibration grid cell except
//! the one adjacent to the threshold classifies correctly.

use super::quad::{adaptive_simpson, QuadSpec};
use super::{MultiplierSuite, RadialGrid};
use crate::error::{CoreError, Result};

/// Safety margin subtracted from gamma when comparing fitted growth
/// exponents: the regression over a finite window carries curvature bias of
/// a few hundredths for slowly varying symbols, and the borderline case
/// (exponent exactly gamma) must classify as inadmissible.
const SLOPE_MARGIN: f64 = 0.05;

/// Fit window: only samples with y >= 1e4 enter the regressions, discarding
/// the transient where the unit shift in m1 = 1 + m dominates.
const FIT_Y_MIN: f64 = 1e4 - 1.0;

/// Variance guard below which ln m1 counts as flat and the regression is
/// replaced by the increment-trend fallback.
const FLAT_VARIANCE: f64 = 1e-9;

/// Increment-decay cut for the fallback: with flat m1 the integral I is
/// compared across the decade marks 1e3/1e6/1e9/1e12, and it counts as
/// divergent when the last decade-window gain keeps at least a quarter of
/// the first — the signature of logarithmic (or slower) divergence, while
/// convergent tails lose mass geometrically.
const INCREMENT_CUT: f64 = 0.25;

/// Outcome of [`admissibility_check`] for one gamma.
///
/// The suprema are grid maxima and therefore always finite numbers; the
/// `*_finite` flags carry the trend verdicts that decide whether the true
/// suprema are bounded. `heuristic` is always true: finiteness of a supremum
/// over all y cannot be certified from samples, only inferred from growth
/// trends, and consumers are expected to treat the verdict accordingly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    /// Exponent the check ran at.
    pub gamma: f64,
    /// Grid maximum of `m1^(-gamma) * I^(1/2)`.
    pub sup1: f64,
    /// Grid maximum of `p_a * omega_b / m1^gamma`.
    pub sup2: f64,
    /// Trend verdict: the first supremum is bounded.
    pub sup1_finite: bool,
    /// Trend verdict: the second supremum is bounded.
    pub sup2_finite: bool,
    /// Fitted growth exponent of I relative to m1^2 (or the increment ratio
    /// in the flat-m1 fallback).
    pub growth1: f64,
    /// Fitted growth exponent of `p_a omega_b` relative to m1 (or its
    /// log-increment over the top two decades in the fallback).
    pub growth2: f64,
    /// Conjunction of the two finiteness verdicts.
    pub admissible: bool,
    /// Always true: the verdict rests on a growth-trend statistic.
    pub heuristic: bool,
}

/// Grid-sampled data the decision is made from; gamma-independent, so a
/// gamma scan computes it once.
struct SuiteProfile {
    ys: Vec<f64>,
    i_vals: Vec<f64>,
    m1: Vec<f64>,
    pa_ob: Vec<f64>,
}

/// Decides admissibility of `suite` at the given gamma.
///
/// `I(y)` is accumulated segment-by-segment over the log grid with adaptive
/// Simpson quadrature, splitting the integrand as `p^2(y) A(y) + B(y)` so
/// that the y-dependent factor stays outside the integrals.
pub fn admissibility_check(
    suite: &MultiplierSuite,
    gamma: f64,
    y_grid: &RadialGrid,
    quad: &QuadSpec,
) -> Result<AdmissibilityReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(CoreError::InvalidSuite(format!(
            "admissibility exponent must lie in (0,1), got {gamma}"
        )));
    }
    if y_grid.r_max() < 1e12 {
        return Err(CoreError::GridTooSmall(y_grid.r_max()));
    }
    let profile = compute_profile(suite, y_grid, quad)?;
    Ok(decide(&profile, gamma))
}

fn compute_profile(
    suite: &MultiplierSuite,
    y_grid: &RadialGrid,
    quad: &QuadSpec,
) -> Result<SuiteProfile> {
    let ys = y_grid.log_values();
    // The factor r annihilates the integrand at the origin; elsewhere an
    // evaluation failure means the suite is singular on (0, y].
    let guard = |r: f64, v: Result<f64>| -> Result<f64> {
        v.map_err(|e| CoreError::SingularIntegrand(format!("at r = {r:e}: {e}")))
    };
    let f_a = |r: f64| -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let om = guard(r, suite.omega(r))?;
        Ok(r / ((1.0 + r * r) * om * om))
    };
    let f_b = |r: f64| -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let om = guard(r, suite.omega(r))?;
        let p = guard(r, suite.p(r))?;
        Ok(r * p * p / ((1.0 + r * r) * om * om))
    };

    let mut i_vals = Vec::with_capacity(ys.len());
    let mut m1 = Vec::with_capacity(ys.len());
    let mut pa_ob = Vec::with_capacity(ys.len());
    let mut a_cum = 0.0;
    let mut b_cum = 0.0;
    let mut lo = 0.0;
    for &y in &ys {
        a_cum += adaptive_simpson(&f_a, lo, y, quad)?;
        b_cum += adaptive_simpson(&f_b, lo, y, quad)?;
        lo = y;
        let p_y = suite.p(y)?;
        i_vals.push(p_y * p_y * a_cum + b_cum);
        m1.push(suite.m1(y)?);
        pa_ob.push(suite.p_a.eval(y)? * suite.omega_b.eval(y)?);
    }
    Ok(SuiteProfile {
        ys,
        i_vals,
        m1,
        pa_ob,
    })
}

fn decide(profile: &SuiteProfile, gamma: f64) -> AdmissibilityReport {
    let n = profile.ys.len();
    let mut sup1 = 0.0f64;
    let mut sup2 = 0.0f64;
    for i in 0..n {
        sup1 = sup1.max(profile.m1[i].powf(-gamma) * profile.i_vals[i].max(0.0).sqrt());
        sup2 = sup2.max(profile.pa_ob[i] / profile.m1[i].powf(gamma));
    }

    let fit: Vec<usize> = (0..n).filter(|&i| profile.ys[i] >= FIT_Y_MIN).collect();
    let ln_m1: Vec<f64> = fit.iter().map(|&i| profile.m1[i].ln()).collect();
    let ln_i: Vec<f64> = fit
        .iter()
        .map(|&i| profile.i_vals[i].max(1e-300).ln())
        .collect();
    let ln_paob: Vec<f64> = fit
        .iter()
        .map(|&i| profile.pa_ob[i].max(1e-300).ln())
        .collect();

    let (sup1_finite, sup2_finite, growth1, growth2) = match slope(&ln_m1, &ln_i) {
        Some(s1) => {
            let q1 = s1 / 2.0;
            // ln m1 has spread here, so the second regression is defined too.
            let q2 = slope(&ln_m1, &ln_paob).unwrap_or(0.0);
            (q1 <= gamma - SLOPE_MARGIN, q2 <= gamma - SLOPE_MARGIN, q1, q2)
        }
        None => {
            // m1 flat: sup1 is finite iff I stays bounded, judged by the
            // decay of its decade-window increments.
            let mark = |v: f64| -> f64 {
                let i = nearest_index(&profile.ys, v);
                profile.i_vals[i]
            };
            let (i3, i6, i9, i12) = (mark(1e3), mark(1e6), mark(1e9), mark(1e12));
            let d_first = i6 - i3;
            let d_last = i12 - i9;
            let significant = d_first > 1e-12 * i12.max(1e-300);
            let divergent = significant && d_last >= INCREMENT_CUT * d_first;
            let ratio = if significant { d_last / d_first } else { 0.0 };
            // p_a omega_b growth over the top two decades of the grid.
            let g2 = ln_paob[ln_paob.len() - 1] - ln_paob[ln_paob.len().saturating_sub(21)];
            (!divergent, g2 <= gamma - SLOPE_MARGIN, ratio, g2)
        }
    };

    AdmissibilityReport {
        gamma,
        sup1,
        sup2,
        sup1_finite,
        sup2_finite,
        growth1,
        growth2,
        admissible: sup1_finite && sup2_finite,
        heuristic: true,
    }
}

/// Least-squares slope of `z` on `x`; `None` when x has no spread.
fn slope(x: &[f64], z: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let zm = z.iter().sum::<f64>() / n;
    let vx: f64 = x.iter().map(|&v| (v - xm) * (v - xm)).sum();
    if vx < FLAT_VARIANCE {
        return None;
    }
    let cov: f64 = x.iter().zip(z).map(|(&a, &b)| (a - xm) * (b - zm)).sum();
    Some(cov / vx)
}

fn nearest_index(ys: &[f64], target: f64) -> usize {
    let mut best = 0;
    let mut dist = f64::INFINITY;
    for (i, &y) in ys.iter().enumerate() {
        let d = (y - target).abs();
        if d < dist {
            dist = d;
            best = i;
        }
    }
    best
}

/// The two built-in one-parameter symbol families the threshold scan covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolFamily {
    /// Powers of `ln(e + r^2)` with the trivial weight.
    Log,
    /// Powers of `ln(e + ln(1 + r^2))` with the half-power log weight.
    IterLog,
}

/// Classification matrix from [`threshold_scan`]: `cells[i][j]` is the
/// verdict for `(mu_grid[i], mutilde_grid[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdMatrix {
    /// Family scanned.
    pub family: SymbolFamily,
    /// Dissipation exponents, row index.
    pub mu_grid: Vec<f64>,
    /// Constitutive-law exponents, column index.
    pub mutilde_grid: Vec<f64>,
    /// Exponents the per-cell OR ranged over.
    pub gamma_grid: Vec<f64>,
    /// Admissibility verdicts.
    pub cells: Vec<Vec<bool>>,
}

impl ThresholdMatrix {
    /// Verdict for one cell.
    pub fn cell(&self, i_mu: usize, i_mutilde: usize) -> bool {
        self.cells[i_mu][i_mutilde]
    }
}

/// The default gamma search grid: the admissibility condition asks for
/// existence of some gamma < 1, and the built-in families are monotone in
/// gamma, so five equispaced samples up to 0.95 suffice.
pub fn default_gamma_grid() -> Vec<f64> {
    vec![0.55, 0.65, 0.75, 0.85, 0.95]
}

/// Scans a symbol family over exponent grids, classifying each
/// `(mu, mutilde)` cell as admissible when any gamma in `gamma_grid` admits
/// it. Runs on the standard radial grid with default quadrature.
pub fn threshold_scan(
    family: SymbolFamily,
    mu_grid: &[f64],
    mutilde_grid: &[f64],
    gamma_grid: &[f64],
) -> Result<ThresholdMatrix> {
    let y_grid = RadialGrid::standard();
    let quad = QuadSpec::default();
    let mut cells = Vec::with_capacity(mu_grid.len());
    for &mu in mu_grid {
        let mut row = Vec::with_capacity(mutilde_grid.len());
        for &mutilde in mutilde_grid {
            // Any valid placeholder works for the suite's own gamma/beta:
            // the decision below takes gamma explicitly and beta never
            // enters the admissibility integrals.
            let suite = match family {
                SymbolFamily::Log => MultiplierSuite::log_family(mu, mutilde, 0.5, 1.0)?,
                SymbolFamily::IterLog => MultiplierSuite::iterlog_family(mu, mutilde, 0.5, 1.0)?,
            };
            let profile = compute_profile(&suite, &y_grid, &quad)?;
            let admissible = gamma_grid
                .iter()
                .any(|&gamma| decide(&profile, gamma).admissible);
            row.push(admissible);
        }
        cells.push(row);
    }
    Ok(ThresholdMatrix {
        family,
        mu_grid: mu_grid.to_vec(),
        mutilde_grid: mutilde_grid.to_vec(),
        gamma_grid: gamma_grid.to_vec(),
        cells,
    })
}
