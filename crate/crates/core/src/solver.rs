//! Dealiased pseudo-spectral time integration of the protean conservation
//! law `d_t theta + Div F_q(theta) = -m(D) theta + G` on the doubly periodic
//! square, with the diagonal linear part (dissipation plus optional
//! artificial viscosity) absorbed exactly by an integrating factor.
//!
//! The flux has one branch for constitutive exponents `beta <= 1`,
//! `F_q(theta) = (grad^perp a(D) q) theta` with `a(D) = Lambda^(beta-2) p(D)`,
//! and picks up the commuted second branch `a(D)((grad^perp theta) q)` for
//! `beta > 1`. The active scalar equation itself is the specialization
//! `q = -theta`, under which the flux divergence collapses to the transport
//! term `v(theta) . grad theta` with `v(q) = -grad^perp a(D) q`.
//!
//! Products are formed pointwise in physical space between 2/3-truncated
//! factors and the result is truncated to the same band, so every retained
//! mode of a quadratic term is alias-free: the discrete flux is the exact
//! Galerkin projection of the continuum flux of the truncated fields. That
//! exactness is what the conservation, skew-symmetry, and splitting checks
//! downstream lean on.

use crate::error::{CoreError, Result};
use crate::multipliers::{MultiplierSuite, SymbolExpr};
use crate::spectral::{
    apply_multiplier, custom_weighted_norm, partial_derivative, weighted_norm, GevreySpec,
    GridSpec, SpectralField, WeightedNormSpec, ZeroModeRule,
};
use ndarray::Array2;
use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

/// Time-stepping scheme: classical RK4 or forward Euler, both applied to the
/// integrating-factor transformed variable so the linear part is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    IfRk4,
    IfEuler,
}

/// Step-size selection: a fixed step, or the automatic rule
/// `dt = min(0.5 dx / max|u(0)|, T/100)` frozen at the initial time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtSpec {
    Auto,
    Fixed(f64),
}

/// Source of the flux field `q`: the evolving scalar itself (`q = -theta`,
/// the active scalar equation) or a fixed prescribed field.
#[derive(Debug, Clone)]
pub enum QMode {
    SelfAdvect,
    Prescribed(SpectralField),
}

/// Everything a run needs besides the initial data.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: GridSpec,
    /// Carries the constitutive exponent `beta` and every symbol: `m` for
    /// dissipation, `p` for the velocity law, `omega` and `nu` for norms.
    pub suite: MultiplierSuite,
    pub dt: DtSpec,
    pub t_final: f64,
    pub scheme: Scheme,
    /// Artificial viscosity coefficient: adds `eps_visc |k|^2` to the
    /// dissipation symbol inside the integrating factor.
    pub eps_visc: f64,
    pub q_mode: QMode,
    /// Optional time-independent source `G`; must be zero-mean for the mean
    /// of the scalar to stay put.
    pub forcing: Option<SpectralField>,
    /// Gevrey tracking rate: when positive, the norm series records
    /// `||e^(lambda_track t nu(D)) theta||` in the homogeneous weighted norm.
    pub lambda_track: f64,
    /// Weighted norms evaluated at each output time; the first entry feeds
    /// the `sob` column of the norm series.
    pub norm_specs: Vec<WeightedNormSpec>,
    /// Record every `cadence`-th step (step 0 and the final step always).
    pub cadence: usize,
}

impl RunConfig {
    /// A self-advecting, inviscid-forcing-free configuration with automatic
    /// step selection and the standard norm `H^(1+beta)_omega`.
    pub fn new(grid: GridSpec, suite: MultiplierSuite, t_final: f64) -> Self {
        let norm_specs = vec![WeightedNormSpec::sobolev(
            1.0 + suite.beta,
            suite.omega_expr(),
            false,
        )];
        RunConfig {
            grid,
            suite,
            dt: DtSpec::Auto,
            t_final,
            scheme: Scheme::IfRk4,
            eps_visc: 0.0,
            q_mode: QMode::SelfAdvect,
            forcing: None,
            lambda_track: 0.0,
            norm_specs,
            cadence: 10,
        }
    }
}

/// One output record of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRow {
    pub t: f64,
    /// `L^2` norm of the scalar.
    pub l2: f64,
    /// Maximum of `|theta|` over the collocation grid.
    pub linf: f64,
    /// The first configured weighted norm (default `H^(1+beta)_omega`).
    pub sob: f64,
    /// Dissipation norm `||m(D)^(1/2) theta||_(H^(1+beta)_omega)`.
    pub diss: f64,
    /// Gevrey norm `||e^(lambda t nu(D)) theta||` in the homogeneous
    /// `H^(1+beta)_omega` scale when tracking is on; a copy of `sob` when
    /// `lambda_track = 0`.
    pub gevrey: f64,
    /// True when the Gevrey exponent cap clipped a mode carrying energy.
    pub saturated: bool,
}

/// The per-cadence norm records of one run.
#[derive(Debug, Clone, Default)]
pub struct NormSeries {
    pub rows: Vec<NormRow>,
}

impl NormSeries {
    /// Writes the series as CSV (header `t,l2,linf,sob,diss,gevrey,saturated`),
    /// atomically via a temp file in the destination directory.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        writeln!(tmp, "t,l2,linf,sob,diss,gevrey,saturated")?;
        for r in &self.rows {
            writeln!(
                tmp,
                "{},{},{},{},{},{},{}",
                r.t, r.l2, r.linf, r.sob, r.diss, r.gevrey, r.saturated
            )?;
        }
        tmp.persist(path).map_err(|e| CoreError::Io(e.error))?;
        Ok(())
    }
}

/// Snapshots of one run at the output cadence, plus the final state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<SpectralField>,
    pub final_state: SpectralField,
}

/// The velocity `v(q) = -grad^perp a(D) q` with `a(D) = Lambda^(beta-2) p(D)`
/// and `grad^perp = (-d_2, d_1)`, i.e. `u1_hat = +i k_2 a(|k|) q_hat` and
/// `u2_hat = -i k_1 a(|k|) q_hat`. Divergence-free mode by mode.
pub fn compute_velocity(
    q: &SpectralField,
    beta: f64,
    p: &SymbolExpr,
) -> Result<(SpectralField, SpectralField)> {
    if !q.zero_mean() {
        return Err(CoreError::ZeroModeUndefined(
            "velocity law Lambda^(beta-2) p(D) needs a zero-mean source".into(),
        ));
    }
    let a_sym = SymbolExpr::product(SymbolExpr::PowerLaw(beta - 2.0), p.clone());
    let aq = apply_multiplier(q, &a_sym, ZeroModeRule::Zero)?;
    let u1 = partial_derivative(&aq, 1);
    let u2 = scaled(&partial_derivative(&aq, 0), -1.0);
    Ok((u1, u2))
}

/// The spectral divergence of the protean flux `F_q(theta)`:
/// `Div((grad^perp a(D) q) theta)`, plus `a(D) Div((grad^perp theta) q)` when
/// `beta > 1`.
///
/// With `dealias` set, both product factors are truncated by the grid's 2/3
/// mask before the pointwise multiplication and the result is truncated
/// again, making the retained band alias-free. Unset, the raw collocation
/// products are returned — useful only for demonstrating the aliasing error.
///
/// `theta` may carry a mean (it is transported and the divergence kills it
/// exactly); `q` must be zero-mean for the velocity law to make sense.
pub fn flux_divergence(
    q: &SpectralField,
    theta: &SpectralField,
    beta: f64,
    p: &SymbolExpr,
    dealias: bool,
) -> Result<SpectralField> {
    if q.grid() != theta.grid() {
        return Err(CoreError::ShapeMismatch(
            "flux needs q and theta on the same grid".into(),
        ));
    }
    let prep = |f: &SpectralField| if dealias { f.dealiased() } else { f.clone() };
    let q_d = prep(q);
    let th_d = prep(theta);
    let th_phys = th_d.to_physical();

    // First branch: the flux vector is (grad^perp a q) theta = -(u theta)
    // with u = v(q), so its divergence is -[d1(u1 theta) + d2(u2 theta)].
    let (u1, u2) = compute_velocity(&q_d, beta, p)?;
    let f1 = pointwise_product(&u1.to_physical(), &th_phys, theta.grid())?;
    let f2 = pointwise_product(&u2.to_physical(), &th_phys, theta.grid())?;
    let mut div = add(
        &partial_derivative(&f1, 0),
        &partial_derivative(&f2, 1),
    );
    div = scaled(&div, -1.0);

    // Second branch for beta > 1: a(D) Div((grad^perp theta) q) with
    // grad^perp theta = (-d2 theta, d1 theta).
    if beta > 1.0 {
        let q_phys = q_d.to_physical();
        let g1 = pointwise_product(
            &scaled(&partial_derivative(&th_d, 1), -1.0).to_physical(),
            &q_phys,
            theta.grid(),
        )?;
        let g2 = pointwise_product(&partial_derivative(&th_d, 0).to_physical(), &q_phys, theta.grid())?;
        let div_g = add(
            &partial_derivative(&g1, 0),
            &partial_derivative(&g2, 1),
        );
        let a_sym = SymbolExpr::product(SymbolExpr::PowerLaw(beta - 2.0), p.clone());
        let second = apply_multiplier(&div_g, &a_sym, ZeroModeRule::Zero)?;
        div = add(&div, &second);
    }

    Ok(if dealias { div.dealiased() } else { div })
}

/// The diagonal factor `e^(-dt (m(|k|) + eps_visc |k|^2))` of the exact
/// linear propagator over one step, one entry per mode. A dissipation symbol
/// singular at the origin maps the zero mode to 0 (its limit); zero-mean
/// fields never touch that entry. Evaluation failures elsewhere propagate.
pub fn linear_propagator(
    grid: GridSpec,
    suite: &MultiplierSuite,
    eps_visc: f64,
    dt: f64,
) -> Result<Array2<f64>> {
    let mut cache: HashMap<u64, f64> = HashMap::new();
    let mut out = Array2::<f64>::zeros((grid.n, grid.n));
    for i1 in 0..grid.n {
        for i2 in 0..grid.n {
            let m1 = grid.mode_int(i1);
            let m2 = grid.mode_int(i2);
            let rsq = (m1 * m1 + m2 * m2) as u64;
            let factor = match cache.get(&rsq) {
                Some(&v) => v,
                None => {
                    let r = grid.k_abs(i1, i2);
                    let v = match suite.m.eval(r) {
                        Ok(m_val) => (-dt * (m_val + eps_visc * r * r)).exp(),
                        Err(CoreError::SingularAtOrigin(_)) if rsq == 0 => 0.0,
                        Err(e) => return Err(e),
                    };
                    cache.insert(rsq, v);
                    v
                }
            };
            out[[i1, i2]] = factor;
        }
    }
    Ok(out)
}

/// Nonlinear tendency callback for (possibly joint) states: given the
/// component fields and the current time, returns one tendency per
/// component.
pub type TendencyFn<'a> = dyn FnMut(&[SpectralField], f64) -> Result<Vec<SpectralField>> + 'a;

/// One step's worth of precomputed propagators plus the scheme, reusable
/// across every step of a fixed-dt run and across the components of a joint
/// multi-field state.
///
/// `advance` treats each component identically and independently (shared
/// stage structure, same sequence of floating-point operations per
/// component), so a field co-evolved inside a joint state reproduces its
/// solo evolution bit for bit.
pub struct IntegratorKernel {
    scheme: Scheme,
    dt: f64,
    e_full: Array2<f64>,
    e_half: Array2<f64>,
}

impl IntegratorKernel {
    pub fn new(
        grid: GridSpec,
        suite: &MultiplierSuite,
        eps_visc: f64,
        dt: f64,
        scheme: Scheme,
    ) -> Result<Self> {
        Ok(IntegratorKernel {
            scheme,
            dt,
            e_full: linear_propagator(grid, suite, eps_visc, dt)?,
            e_half: linear_propagator(grid, suite, eps_visc, dt / 2.0)?,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances a joint state one step. `rhs(fields, t)` must return one
    /// nonlinear tendency per component; the linear part is handled here by
    /// the integrating factor (exactly — with `rhs = 0` the step is the
    /// exact diagonal solution).
    pub fn advance(
        &self,
        fields: &[SpectralField],
        t: f64,
        rhs: &mut TendencyFn<'_>,
    ) -> Result<Vec<SpectralField>> {
        let h = self.dt;
        match self.scheme {
            Scheme::IfEuler => {
                let a = self.checked(fields.len(), rhs(fields, t)?)?;
                Ok(fields
                    .iter()
                    .zip(&a)
                    .map(|(u, au)| mode_scale(&axpy(h, au, u), &self.e_full))
                    .collect())
            }
            Scheme::IfRk4 => {
                // Classical RK4 on the transformed variable w = e^(tL) u:
                // every stage value below is the untransformed field the
                // nonlinearity actually sees.
                let a = self.checked(fields.len(), rhs(fields, t)?)?;
                let ub: Vec<SpectralField> = fields
                    .iter()
                    .zip(&a)
                    .map(|(u, au)| mode_scale(&axpy(0.5 * h, au, u), &self.e_half))
                    .collect();
                let b = self.checked(fields.len(), rhs(&ub, t + 0.5 * h)?)?;
                let uc: Vec<SpectralField> = fields
                    .iter()
                    .zip(&b)
                    .map(|(u, bu)| axpy(0.5 * h, bu, &mode_scale(u, &self.e_half)))
                    .collect();
                let c = self.checked(fields.len(), rhs(&uc, t + 0.5 * h)?)?;
                let ud: Vec<SpectralField> = fields
                    .iter()
                    .zip(&c)
                    .map(|(u, cu)| axpy(h, &mode_scale(cu, &self.e_half), &mode_scale(u, &self.e_full)))
                    .collect();
                let d = self.checked(fields.len(), rhs(&ud, t + h)?)?;
                Ok((0..fields.len())
                    .map(|i| {
                        // u+ = E_h u + (h/6)(E_h a + 2 E_h/2 (b + c) + d)
                        let mut acc = mode_scale(&a[i], &self.e_full);
                        acc = axpy(2.0, &mode_scale(&add(&b[i], &c[i]), &self.e_half), &acc);
                        acc = add(&acc, &d[i]);
                        axpy(h / 6.0, &acc, &mode_scale(&fields[i], &self.e_full))
                    })
                    .collect())
            }
        }
    }

    fn checked(&self, want: usize, got: Vec<SpectralField>) -> Result<Vec<SpectralField>> {
        if got.len() != want {
            return Err(CoreError::ShapeMismatch(format!(
                "rhs returned {} tendencies for {} components",
                got.len(),
                want
            )));
        }
        Ok(got)
    }
}

/// Advances one state by a single step of the configured scheme. Convenience
/// wrapper that rebuilds the propagators each call; loops should construct
/// an [`IntegratorKernel`] once instead.
pub fn step(state: &SpectralField, t: f64, dt: f64, config: &RunConfig) -> Result<SpectralField> {
    let kernel = IntegratorKernel::new(config.grid, &config.suite, config.eps_visc, dt, config.scheme)?;
    let mut rhs = protean_rhs(config);
    let mut out = kernel.advance(std::slice::from_ref(state), t, &mut rhs)?;
    Ok(out.pop().expect("one component in, one out"))
}

/// The nonlinear tendency `-Div F_q(theta) + G` of the protean law for a
/// single-field state, with `q` per the configured mode.
pub fn protean_rhs(config: &RunConfig) -> impl FnMut(&[SpectralField], f64) -> Result<Vec<SpectralField>> + '_ {
    let p = config.suite.p_expr();
    move |fields: &[SpectralField], _t: f64| {
        let theta = &fields[0];
        let q = match &config.q_mode {
            QMode::SelfAdvect => scaled(theta, -1.0),
            QMode::Prescribed(qf) => qf.clone(),
        };
        let div = flux_divergence(&q, theta, config.suite.beta, &p, true)?;
        let mut tendency = scaled(&div, -1.0);
        if let Some(g) = &config.forcing {
            tendency = add(&tendency, g);
        }
        Ok(vec![tendency])
    }
}

/// Integrates the configured run, handing every recorded state (step index,
/// time, field) to `observer` — step 0 and the final step always, plus every
/// `cadence`-th step between — without retaining any snapshot itself.
/// Returns the final state.
///
/// Fails with `CflViolation` when the step specification cannot produce a
/// usable dt and with `Blowup` (carrying the last time at which the state
/// was still finite) when the `L^2` norm leaves the representable range.
pub fn run_observed(
    config: &RunConfig,
    theta0: &SpectralField,
    observer: &mut dyn FnMut(usize, f64, &SpectralField) -> Result<()>,
) -> Result<SpectralField> {
    if theta0.grid() != config.grid {
        return Err(CoreError::ShapeMismatch(
            "initial data grid differs from the configured grid".into(),
        ));
    }
    if !config.t_final.is_finite() || config.t_final < 0.0 {
        return Err(CoreError::CflViolation(format!(
            "cannot integrate to T = {}",
            config.t_final
        )));
    }
    if config.t_final == 0.0 {
        observer(0, 0.0, theta0)?;
        return Ok(theta0.clone());
    }

    let (dt, n_steps) = resolve_dt(config, theta0)?;
    let kernel = IntegratorKernel::new(config.grid, &config.suite, config.eps_visc, dt, config.scheme)?;
    let mut rhs = protean_rhs(config);
    let cadence = config.cadence.max(1);

    let mut state = theta0.clone();
    observer(0, 0.0, &state)?;
    let mut last_good_t = 0.0f64;
    for step_idx in 1..=n_steps {
        let t_prev = dt * (step_idx - 1) as f64;
        let mut advanced = kernel.advance(std::slice::from_ref(&state), t_prev, &mut rhs)?;
        state = advanced.pop().expect("one component in, one out");
        let t_now = if step_idx == n_steps {
            config.t_final
        } else {
            dt * step_idx as f64
        };
        if !state.l2_norm().is_finite() {
            return Err(CoreError::Blowup {
                t: last_good_t,
                what: "L2 norm left the representable range".into(),
            });
        }
        last_good_t = t_now;
        if step_idx % cadence == 0 || step_idx == n_steps {
            observer(step_idx, t_now, &state)?;
        }
    }
    Ok(state)
}

/// Integrates the configured run and records the standard norm series at the
/// output cadence: `L^2`, `L^inf`, the first configured weighted norm, the
/// dissipation norm `||m^(1/2) theta||_(H^(1+beta)_omega)`, and the Gevrey
/// norm when `lambda_track > 0` (otherwise the `gevrey` column repeats
/// `sob`).
pub fn run(config: &RunConfig, theta0: &SpectralField) -> Result<(Trajectory, NormSeries)> {
    let sob_spec = config.norm_specs.first().cloned().unwrap_or_else(|| {
        WeightedNormSpec::sobolev(1.0 + config.suite.beta, config.suite.omega_expr(), false)
    });
    let mut rows: Vec<NormRow> = Vec::new();
    let mut times: Vec<f64> = Vec::new();
    let mut snapshots: Vec<SpectralField> = Vec::new();
    let final_state = run_observed(config, theta0, &mut |_, t, field| {
        rows.push(norm_row(t, field, config, &sob_spec)?);
        times.push(t);
        snapshots.push(field.clone());
        Ok(())
    })?;
    Ok((
        Trajectory {
            times,
            snapshots,
            final_state,
        },
        NormSeries { rows },
    ))
}

fn norm_row(
    t: f64,
    field: &SpectralField,
    config: &RunConfig,
    sob_spec: &WeightedNormSpec,
) -> Result<NormRow> {
    let suite = &config.suite;
    let sob = weighted_norm(field, sob_spec)?;
    let diss = custom_weighted_norm(field, 1.0 + suite.beta, false, &|r| {
        let m_val = suite.m.eval(r)?;
        Ok(suite.omega(r)? * m_val.max(0.0).sqrt())
    })?;
    let (gevrey, saturated) = if config.lambda_track > 0.0 {
        let spec = WeightedNormSpec {
            sigma: 1.0 + suite.beta,
            omega: suite.omega_expr(),
            homogeneous: true,
            gevrey: Some(GevreySpec {
                lambda: config.lambda_track * t,
                nu: suite.nu.clone(),
            }),
        };
        let nv = weighted_norm(field, &spec)?;
        (nv.value, nv.saturated)
    } else {
        (sob.value, sob.saturated)
    };
    Ok(NormRow {
        t,
        l2: field.l2_norm(),
        linf: field.linf_norm(),
        sob: sob.value,
        diss,
        gevrey,
        saturated,
    })
}

fn resolve_dt(config: &RunConfig, theta0: &SpectralField) -> Result<(f64, usize)> {
    let t_final = config.t_final;
    let raw = match config.dt {
        DtSpec::Fixed(dt) => {
            if !dt.is_finite() || dt <= 0.0 {
                return Err(CoreError::CflViolation(format!(
                    "fixed dt = {dt} is not a positive finite step"
                )));
            }
            dt
        }
        DtSpec::Auto => {
            let q0 = match &config.q_mode {
                QMode::SelfAdvect => scaled(theta0, -1.0),
                QMode::Prescribed(q) => q.clone(),
            };
            let (u1, u2) = compute_velocity(&q0, config.suite.beta, &config.suite.p_expr())?;
            let (p1, p2) = (u1.to_physical(), u2.to_physical());
            let umax = p1
                .iter()
                .zip(p2.iter())
                .map(|(a, b)| a.hypot(*b))
                .fold(0.0f64, f64::max);
            if !umax.is_finite() {
                return Err(CoreError::CflViolation(format!(
                    "initial velocity maximum {umax} gives no usable step"
                )));
            }
            let dx = config.grid.l_box / config.grid.n as f64;
            let cfl = if umax > 0.0 { 0.5 * dx / umax } else { f64::INFINITY };
            let dt = cfl.min(t_final / 100.0);
            if !dt.is_finite() || dt <= 0.0 {
                return Err(CoreError::CflViolation(format!(
                    "automatic selection produced dt = {dt}"
                )));
            }
            dt
        }
    };
    // Uniform steps that land exactly on T: snap the count when T/dt is an
    // integer up to roundoff, otherwise round up (shrinking dt, never CFL-
    // violating growth).
    let ratio = t_final / raw;
    let n = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    }
    .max(1);
    Ok((t_final / n as f64, n))
}

/// Pointwise collocation product of two physical-space sample grids,
/// returned in spectral form.
fn pointwise_product(a: &Array2<f64>, b: &Array2<f64>, grid: GridSpec) -> Result<SpectralField> {
    let prod = a * b;
    SpectralField::from_physical(grid, &prod)
}

pub(crate) fn scaled(f: &SpectralField, s: f64) -> SpectralField {
    let coeffs = f.coeffs().mapv(|c| c * s);
    SpectralField::from_coeffs(f.grid(), coeffs).expect("shape preserved")
}

pub(crate) fn add(x: &SpectralField, y: &SpectralField) -> SpectralField {
    let coeffs = x.coeffs() + y.coeffs();
    SpectralField::from_coeffs(x.grid(), coeffs).expect("shape preserved")
}

/// `y + a x`, the basic stage update.
pub(crate) fn axpy(a: f64, x: &SpectralField, y: &SpectralField) -> SpectralField {
    let mut coeffs = y.coeffs().clone();
    coeffs.zip_mut_with(x.coeffs(), |yc, xc| *yc += *xc * a);
    SpectralField::from_coeffs(y.grid(), coeffs).expect("shape preserved")
}

/// Entrywise product with a real diagonal factor (a propagator).
pub(crate) fn mode_scale(f: &SpectralField, factor: &Array2<f64>) -> SpectralField {
    let mut coeffs = f.coeffs().clone();
    coeffs.zip_mut_with(factor, |c, &s| *c *= s);
    SpectralField::from_coeffs(f.grid(), coeffs).expect("shape preserved")
}
