//! Integration tests for the radial symbol calculus: evaluation against
//! closed forms, derivative rules, class verification, the admissibility
//! decision, and the quadrature identity.

use approx::assert_relative_eq;
use gsqg_core::{
    admissibility_check, default_gamma_grid, threshold_scan, CoreError, DerivRule,
    MultiplierSuite, Property, QuadSpec, RadialGrid, SymbolClass, SymbolExpr, SymbolFamily,
};
use std::f64::consts::E;

fn one() -> SymbolExpr {
    SymbolExpr::Constant(1.0)
}

// ---------------------------------------------------------------- evaluation

#[test]
fn log_power_normalization_at_origin() {
    // ln(e + 0) = 1, so every exponent gives exactly 1.
    assert_eq!(SymbolExpr::LogPower(1.0).eval(0.0).unwrap(), 1.0);
    assert_eq!(SymbolExpr::LogPower(-3.5).eval(0.0).unwrap(), 1.0);
    assert_eq!(SymbolExpr::IterLogPower(2.0).eval(0.0).unwrap(), 1.0);
}

#[test]
fn log_power_hits_closed_form_spot_values() {
    // ln(e + (e^2 - e)) = ln(e^2) = 2 exactly; the only error is the f64
    // representation of the radius, so ask for 1e-14 relative.
    let r = (E * E - E).sqrt();
    assert_relative_eq!(
        SymbolExpr::LogPower(1.0).eval(r).unwrap(),
        2.0,
        max_relative = 1e-14
    );
    assert_relative_eq!(
        SymbolExpr::LogPower(1.0).eval(5.0).unwrap(),
        3.322092189300348, // ln(e + 25)
        max_relative = 1e-15
    );
}

#[test]
fn composite_trees_evaluate_pointwise() {
    // r^2 * ln(e + r^2) at r = 5.
    let sym = SymbolExpr::product(SymbolExpr::PowerLaw(2.0), SymbolExpr::LogPower(1.0));
    assert_relative_eq!(sym.eval(5.0).unwrap(), 83.0523047325087, max_relative = 1e-15);

    // (1 + ln(e + r^2)) / ln(e + r^2) at r = 0 -> 2.
    let sym = SymbolExpr::quotient(
        SymbolExpr::one_plus(SymbolExpr::LogPower(1.0)),
        SymbolExpr::LogPower(1.0),
    );
    assert_eq!(sym.eval(0.0).unwrap(), 2.0);
}

#[test]
fn negative_power_law_is_singular_at_origin_only() {
    let sym = SymbolExpr::PowerLaw(-1.0);
    assert!(matches!(
        sym.eval(0.0),
        Err(CoreError::SingularAtOrigin(_))
    ));
    assert!(sym.singular_at_origin());
    assert_eq!(sym.eval(2.0).unwrap(), 0.5);
    assert!(!SymbolExpr::LogPower(-1.0).singular_at_origin());
}

#[test]
fn overflow_is_reported_not_saturated() {
    // 10^(10 * 1e6) far exceeds f64 range; the error names the symbol.
    let sym = SymbolExpr::PowerLaw(1e6);
    assert!(matches!(
        sym.eval(1e10),
        Err(CoreError::Overflow { .. })
    ));
}

#[test]
fn quotient_by_zero_denominator_is_reported() {
    let sym = SymbolExpr::quotient(one(), SymbolExpr::PowerLaw(1.0));
    assert!(matches!(
        sym.eval(0.0),
        Err(CoreError::DivisionByZero { .. })
    ));
}

// --------------------------------------------------------------- derivatives

#[test]
fn derivative_of_constant_and_power_law() {
    let c = SymbolExpr::Constant(5.0);
    assert_eq!(c.derivative(3.0, DerivRule::Analytic).unwrap(), 0.0);
    let p2 = SymbolExpr::PowerLaw(2.0);
    assert_relative_eq!(
        p2.derivative(3.0, DerivRule::Analytic).unwrap(),
        6.0,
        max_relative = 1e-15
    );
}

#[test]
fn log_power_derivative_matches_closed_form_and_finite_difference() {
    let sym = SymbolExpr::LogPower(1.0);
    let analytic = sym.derivative(1.0, DerivRule::Analytic).unwrap();
    // d/dr ln(e + r^2) = 2r/(e + r^2) -> 2/(e+1) at r = 1.
    assert_relative_eq!(analytic, 0.5378828427399902, max_relative = 1e-15);
    // Central difference with h = 1e-4*(1+r): error is h^2/6 * f''' ~ 7e-9,
    // so 1e-7 gives an order of headroom.
    let fd = sym.derivative(1.0, DerivRule::CentralDiff).unwrap();
    assert_relative_eq!(analytic, fd, max_relative = 1e-7);
}

#[test]
fn analytic_derivative_cross_checks_finite_difference_on_composites() {
    let sym = SymbolExpr::quotient(
        SymbolExpr::product(SymbolExpr::LogPower(1.5), SymbolExpr::PowerLaw(0.5)),
        SymbolExpr::one_plus(SymbolExpr::IterLogPower(2.0)),
    );
    for &r in &[0.3, 1.0, 7.0, 123.0] {
        let a = sym.derivative(r, DerivRule::Analytic).unwrap();
        let fd = sym.derivative(r, DerivRule::CentralDiff).unwrap();
        // Same h^2 error bound as above, scaled by the (order-one) third
        // derivative of a smooth log-type composite.
        assert_relative_eq!(a, fd, max_relative = 1e-6);
    }
}

// ------------------------------------------------------------ quotient form

#[test]
fn quotient_form_moves_negative_exponents_downstairs() {
    let (num, den) = SymbolExpr::LogPower(-2.0).to_quotient_form();
    assert_eq!(num, SymbolExpr::Constant(1.0));
    assert_eq!(den, SymbolExpr::LogPower(2.0));

    // 1 + a/b == (b + a)/b as functions; check pointwise.
    let sym = SymbolExpr::one_plus(SymbolExpr::quotient(
        SymbolExpr::LogPower(1.0),
        SymbolExpr::IterLogPower(1.0),
    ));
    let (num, den) = sym.to_quotient_form();
    for &r in &[0.0, 0.5, 3.0, 1e4] {
        let direct = sym.eval(r).unwrap();
        let reassembled = num.eval(r).unwrap() / den.eval(r).unwrap();
        assert_relative_eq!(direct, reassembled, max_relative = 1e-14);
    }
}

// ------------------------------------------------------- class verification

#[test]
fn constant_symbol_passes_weight_class_with_small_constants() {
    let report = verify(one(), SymbolClass::W);
    assert!(report.pass);
    for (prop, verdict) in &report.verdicts {
        assert!(verdict.pass, "{prop} failed on the constant symbol");
        assert!(
            verdict.constant <= 2.0,
            "{prop} constant {} exceeds 2",
            verdict.constant
        );
    }
}

#[test]
fn log_powers_pass_weight_class_with_log_derivative_at_most_two_mu() {
    for &mu in &[0.5, 1.0, 2.0] {
        let report = verify(SymbolExpr::LogPower(mu), SymbolClass::W);
        assert!(report.pass, "LogPower({mu}) should be a weight");
        let o2 = report.verdict(Property::O2).unwrap();
        // Exact sup of r*sym'/sym is 2mu * r^2/((e+r^2) ln(e+r^2)) <= 2mu
        // (the bracket peaks at ~0.6357 near r = 2.4).
        assert!(o2.constant <= 2.0 * mu);
        assert!(o2.constant > 0.5 * mu);
    }
}

#[test]
fn power_law_fails_weight_class_log_derivative_boundedness() {
    // r * (r^alpha)'/r^alpha = alpha is bounded, so a bare power law passes
    // O2; it is O3 (near-subadditivity under multiplication of radii) that
    // separates genuine log-type weights: r1^a * r2^a vs r1^a + r2^a grows
    // without bound along r1 = r2.
    let report = verify(SymbolExpr::PowerLaw(1.0), SymbolClass::W);
    let o3 = report.verdict(Property::O3).unwrap();
    // sup r^2/(2r) = r_max_pair/2 over pairs with product <= 1e12 -> 5e5.
    assert!(
        o3.constant > 1e4,
        "power-law O3 constant should scale with the grid, got {}",
        o3.constant
    );
}

#[test]
fn weight_class_closed_under_products() {
    let candidates = [
        SymbolExpr::LogPower(0.5),
        SymbolExpr::LogPower(1.0),
        SymbolExpr::IterLogPower(2.0),
        one(),
    ];
    for a in &candidates {
        for b in &candidates {
            assert!(verify(a.clone(), SymbolClass::W).pass);
            assert!(verify(b.clone(), SymbolClass::W).pass);
            let prod = SymbolExpr::product(a.clone(), b.clone());
            assert!(
                verify(prod, SymbolClass::W).pass,
                "product of passing weights must pass: {a} * {b}"
            );
        }
    }
}

#[test]
fn constitutive_class_divergence_decided_symbolically_for_builtins() {
    // Borderline inverse-half log power still diverges (exponent -1/2).
    let report = verify(SymbolExpr::LogPower(-0.5), SymbolClass::C);
    assert!(report.verdict(Property::McDivergence).unwrap().pass);
    assert!(report.pass);

    // Inverse-first-power log converges: int dr/(r ln^2) < inf.
    let report = verify(SymbolExpr::LogPower(-1.0), SymbolClass::C);
    assert!(!report.verdict(Property::McDivergence).unwrap().pass);
    assert!(!report.pass);
}

#[test]
fn constitutive_class_divergence_for_composites_uses_quadrature_trend() {
    // Same two symbols as the symbolic test, wrapped so the tree is no
    // longer a single built-in factor; the four-decade trend must agree.
    let divergent = SymbolExpr::product(one(), SymbolExpr::LogPower(-0.5));
    let report = verify(divergent, SymbolClass::C);
    assert!(report.verdict(Property::McDivergence).unwrap().pass);

    let convergent = SymbolExpr::product(one(), SymbolExpr::LogPower(-1.0));
    let report = verify(convergent, SymbolClass::C);
    assert!(!report.verdict(Property::McDivergence).unwrap().pass);
}

#[test]
fn dissipation_class_shifts_by_one_before_checking() {
    // m = ln(e+r^2) - 1 is zero at the origin (not positive), but
    // 1 + m = ln(e+r^2) is a weight, which is exactly what class D asks.
    let m = SymbolExpr::sum(SymbolExpr::LogPower(1.0), SymbolExpr::Constant(0.0));
    assert!(verify(m, SymbolClass::D).pass);
    assert!(verify(SymbolExpr::Constant(0.0), SymbolClass::D).pass);
}

#[test]
fn smoothing_class_checks_monotonicity_and_growth_rate() {
    assert!(verify(SymbolExpr::LogPower(1.0), SymbolClass::SOfM).pass);
    assert!(verify(SymbolExpr::Constant(0.0), SymbolClass::SOfM).pass);
    // A decreasing symbol violates S1.
    let report = verify(SymbolExpr::LogPower(-1.0), SymbolClass::SOfM);
    assert!(!report.verdict(Property::S1).unwrap().pass);
    assert!(!report.pass);
}

#[test]
fn class_verification_requires_a_wide_grid() {
    let narrow = RadialGrid::new(1e-2, 1e5, 10).unwrap();
    let err = gsqg_core::multipliers::verify_class(
        &SymbolExpr::LogPower(1.0),
        SymbolClass::W,
        &narrow,
        1e-9,
    )
    .unwrap_err();
    assert!(matches!(err, CoreError::GridTooSmall(r) if r == 1e5));
}

fn verify(sym: SymbolExpr, class: SymbolClass) -> gsqg_core::ClassReport {
    // 1e-9 monotonicity tolerance: built-in families are exactly monotone;
    // the slack only absorbs float noise in composite evaluation.
    gsqg_core::multipliers::verify_class(&sym, class, &RadialGrid::standard(), 1e-9).unwrap()
}

// ------------------------------------------------------------- admissibility

fn log_suite(mu: f64, mutilde: f64) -> MultiplierSuite {
    MultiplierSuite::log_family(mu, mutilde, 0.75, 1.0).unwrap()
}

#[test]
fn admissible_above_the_half_step_threshold() {
    // mu = 1, mutilde = 0 sits comfortably above mu > mutilde + 1/2.
    let report = admissibility_check(
        &log_suite(1.0, 0.0),
        0.75,
        &RadialGrid::standard(),
        &QuadSpec::default(),
    )
    .unwrap();
    assert!(report.admissible);
    assert!(report.sup1_finite && report.sup2_finite);
    assert!(report.heuristic, "verdict must be flagged as trend-based");
    assert!(report.sup1.is_finite() && report.sup2.is_finite());
}

#[test]
fn borderline_equality_is_inadmissible_for_every_gamma() {
    // mu = mutilde + 1/2 exactly: I(y) grows like m1^2gamma only at
    // gamma = 1, which is outside the admissible range.
    for gamma in default_gamma_grid() {
        let report = admissibility_check(
            &log_suite(0.5, 0.0),
            gamma,
            &RadialGrid::standard(),
            &QuadSpec::default(),
        )
        .unwrap();
        assert!(!report.admissible, "gamma = {gamma} must reject mu = 0.5");
    }
}

#[test]
fn undamped_suite_with_slow_decay_is_inadmissible() {
    // m = 0 makes m1 flat; I(y) ~ (1/2) ln ln y diverges, caught by the
    // increment-trend fallback.
    let suite = MultiplierSuite::new(
        SymbolExpr::Constant(0.0),
        one(),
        SymbolExpr::LogPower(0.5),
        one(),
        one(),
        SymbolExpr::Constant(0.0),
        0.75,
        1.0,
    )
    .unwrap();
    let report = admissibility_check(
        &suite,
        0.75,
        &RadialGrid::standard(),
        &QuadSpec::default(),
    )
    .unwrap();
    assert!(!report.admissible);
    assert!(!report.sup1_finite);
}

#[test]
fn admissibility_is_monotone_in_the_dissipation_exponent() {
    let grid = RadialGrid::standard();
    let quad = QuadSpec::default();
    let at = |mu: f64| {
        admissibility_check(&log_suite(mu, 0.0), 0.75, &grid, &quad)
            .unwrap()
            .admissible
    };
    assert!(at(1.0));
    assert!(at(1.5), "raising mu must preserve admissibility");
    assert!(at(2.0));
}

#[test]
fn admissibility_rejects_bad_gamma_and_narrow_grids() {
    let suite = log_suite(1.0, 0.0);
    let err = admissibility_check(&suite, 1.2, &RadialGrid::standard(), &QuadSpec::default())
        .unwrap_err();
    assert!(matches!(err, CoreError::InvalidSuite(_)));

    let narrow = RadialGrid::new(1e-2, 1e10, 10).unwrap();
    let err = admissibility_check(&suite, 0.75, &narrow, &QuadSpec::default()).unwrap_err();
    assert!(matches!(err, CoreError::GridTooSmall(_)));
}

#[test]
fn threshold_scan_log_family_flips_at_mu_0_8() {
    let mus: Vec<f64> = (3..=10).map(|i| 0.2 * i as f64).collect(); // 0.6..=2.0
    let matrix = threshold_scan(SymbolFamily::Log, &mus, &[0.0], &default_gamma_grid()).unwrap();
    for (i, &mu) in mus.iter().enumerate() {
        let want = mu >= 0.8 - 1e-9;
        assert_eq!(
            matrix.cell(i, 0),
            want,
            "log family mu = {mu} classified {}",
            matrix.cell(i, 0)
        );
    }
}

#[test]
fn threshold_scan_pinned_cells() {
    // mu = mutilde = 1.5 violates mu > mutilde + 1/2.
    let matrix =
        threshold_scan(SymbolFamily::Log, &[1.5], &[1.5], &default_gamma_grid()).unwrap();
    assert!(!matrix.cell(0, 0));

    // Iterated-log family comfortably above its threshold.
    let matrix =
        threshold_scan(SymbolFamily::IterLog, &[2.0], &[1.0], &default_gamma_grid()).unwrap();
    assert!(matrix.cell(0, 0));
}

// ------------------------------------------------------------------ suites

#[test]
fn suite_constructor_validates_ranges_and_monotonicity() {
    assert!(matches!(
        MultiplierSuite::log_family(1.0, 0.0, 1.2, 1.0),
        Err(CoreError::InvalidSuite(_))
    ));
    assert!(matches!(
        MultiplierSuite::log_family(1.0, 0.0, 0.75, 2.5),
        Err(CoreError::InvalidSuite(_))
    ));
    // A decreasing component is rejected outright.
    let err = MultiplierSuite::new(
        SymbolExpr::Constant(0.0),
        SymbolExpr::LogPower(-1.0),
        one(),
        one(),
        one(),
        SymbolExpr::Constant(0.0),
        0.75,
        1.0,
    )
    .unwrap_err();
    assert!(matches!(err, CoreError::InvalidSuite(_)));
}

#[test]
fn negative_family_exponents_build_nondecreasing_quotients() {
    let suite = MultiplierSuite::log_family(1.0, -0.5, 0.75, 1.0).unwrap();
    // p = ln^{-1/2}: stored as 1 / LogPower(0.5).
    assert_eq!(suite.p_a, SymbolExpr::Constant(1.0));
    assert_eq!(suite.p_b, SymbolExpr::LogPower(0.5));
    assert_relative_eq!(
        suite.p(5.0).unwrap(),
        (E + 25.0f64).ln().powf(-0.5),
        max_relative = 1e-15
    );
}

#[test]
fn stream_function_symbol_combines_power_law_and_constitutive_law() {
    let suite = MultiplierSuite::log_family(1.0, 1.0, 0.75, 1.0).unwrap();
    // a(r) = r^(beta-2) p(r) with beta = 1.
    assert_relative_eq!(
        suite.a_radial(5.0).unwrap(),
        5.0f64.powf(-1.0) * (E + 25.0f64).ln(),
        max_relative = 1e-14
    );
    assert!(suite.a_radial(0.0).is_err());
}

// ---------------------------------------------------------------- quadrature

#[test]
fn adaptive_simpson_integrates_polynomials_exactly() {
    let spec = QuadSpec::default();
    let val =
        gsqg_core::multipliers::adaptive_simpson(&|x: f64| Ok(x * x), 0.0, 1.0, &spec).unwrap();
    assert_relative_eq!(val, 1.0 / 3.0, max_relative = 1e-12);
}

#[test]
fn adaptive_simpson_propagates_integrand_errors() {
    let spec = QuadSpec::default();
    let err = gsqg_core::multipliers::adaptive_simpson(
        &|x: f64| {
            if x > 0.5 {
                Err(CoreError::SingularIntegrand("test".into()))
            } else {
                Ok(1.0)
            }
        },
        0.0,
        1.0,
        &spec,
    )
    .unwrap_err();
    assert!(matches!(err, CoreError::SingularIntegrand(_)));
}

#[test]
fn log_identity_quadrature_matches_closed_form() {
    use gsqg_core::multipliers::log_identity_quadrature;
    assert_eq!(log_identity_quadrature(0.0).unwrap(), 0.0);
    // Subordination identity gives ln(1 + lambda); quadrature tolerance
    // 1e-10 per panel across six panels leaves 1e-8 comfortable.
    for &lambda in &[1e-6, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3] {
        let got = log_identity_quadrature(lambda).unwrap();
        let want = (1.0 + lambda).ln();
        assert!(
            (got - want).abs() <= 1e-8,
            "lambda = {lambda}: got {got}, want {want}"
        );
    }
}

#[test]
fn radial_grid_prepends_zero_and_spans_twelve_decades() {
    let grid = RadialGrid::standard();
    let values = grid.values();
    assert_eq!(values.len(), 142);
    assert_eq!(values[0], 0.0);
    assert_relative_eq!(values[1], 1e-2, max_relative = 1e-12);
    assert_relative_eq!(values[141], 1e12, max_relative = 1e-12);
}
