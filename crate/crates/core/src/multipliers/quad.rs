//! Adaptive quadrature and the closed-form log identity used to cross-check
//! it.

use crate::error::{CoreError, Result};

/// Tolerances for [`adaptive_simpson`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    /// Absolute tolerance target for the whole interval. On integrals whose
    /// magnitude exceeds one the tolerance is applied relatively.
    pub abs_tol: f64,
    /// Maximum bisection depth before giving up.
    pub max_depth: u32,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            abs_tol: 1e-10,
            max_depth: 40,
        }
    }
}

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// Classic bisection with the 15-to-1 acceptance rule and Richardson
/// extrapolation of the accepted panels. Integrand errors propagate out
/// unchanged; exhausting the depth budget reports
/// [`CoreError::QuadratureFailure`] rather than returning a value of unknown
/// accuracy.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, spec: &QuadSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = simpson(a, b, fa, fm, fb);
    // Scale the tolerance with the crude estimate so large integrals are not
    // held to an unattainable absolute target.
    let tol = spec.abs_tol * whole.abs().max(1.0);
    recurse(f, a, b, fa, fm, fb, whole, tol, spec.max_depth)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(CoreError::QuadratureFailure(format!(
            "depth exhausted on [{a:e}, {b:e}] with residual {:e}",
            delta.abs()
        )));
    }
    Ok(recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}

/// Evaluates the subordination identity
/// `ln(1 + lambda) = int_0^inf (1 - e^(-s*lambda)) e^(-s) ds / s`
/// numerically, as an end-to-end exercise of the quadrature plumbing against
/// a closed form.
///
/// The integrand extends continuously by `lambda` at s = 0; below s = 1e-8
/// the head is taken from the series
/// `int_0^s0 = lambda * s0 * (1 - s0*(lambda + 2)/4) + O(s0^3)`.
/// The upper cutoff 35 bounds the discarded tail by `e^(-35)/35 < 1e-12`.
pub fn log_identity_quadrature(lambda: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(CoreError::SingularIntegrand(format!(
            "log identity defined for lambda >= 0, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let s0 = 1e-8;
    let head = lambda * s0 * (1.0 - s0 * (lambda + 2.0) / 4.0);
    // expm1 keeps 1 - e^(-s*lambda) accurate when s*lambda is tiny.
    let integrand = |s: f64| -> Result<f64> { Ok(-(-s * lambda).exp_m1() * (-s).exp() / s) };
    let spec = QuadSpec::default();
    // Fixed breakpoints keep each panel mild for the adaptive pass; the
    // integrand has a boundary layer of width 1/lambda for large lambda.
    let marks = [1e-6, 1e-4, 1e-2, 1.0, 35.0];
    let mut total = head;
    let mut lo = s0;
    for &hi in &marks {
        total += adaptive_simpson(&integrand, lo, hi, &spec)?;
        lo = hi;
    }
    Ok(total)
}
