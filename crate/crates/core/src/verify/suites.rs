use super::{CheckResult, Context, SuiteOutput};
use crate::exact_constants::{constant_chain, flux_check, gamma_half, sphere_area, ConstantChain, ConstantMode, ExactScalar};
use crate::golden::{self, golden_row};
use crate::highprec::rational_string;
use crate::radial_calculus::{curvature_constant, initial_data, normalized_solution, NormalizedSolution, RadialExpr};
use crate::radial_ode::{
    classify_trajectory, integrate_with, mass_identity_residual, minus_sign_grid, perturbation_grid, shoot_grid,
    sign_constant, window_checkpoints, FateKind, IntegrateOptions, OdeSystem, ShotResult, Sign, PERTURBATIONS,
};
use crate::riesz_potential::{
    jensen_gap, nested_mean_value_check, pohozaev_integral, potential, spherical_mean, PotentialValue,
    QuadratureConfig, RadialDensity,
};
use crate::Result;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const POHOZAEV_RADII: [f64; 3] = [0.5, 1.0, 2.0];
const MEAN_VALUE_CENTRES: [f64; 2] = [0.0, 2.0];
const MEAN_VALUE_RADII: [f64; 2] = [0.5, 1.0];
const REPRODUCTION_RADII: [f64; 4] = [1.0, 5.0, 25.0, 50.0];
const REPRODUCTION_TOL: f64 = 1e-12;
/// Bound on `ε·r^{2N-2}` above which round-off carried by the growing
/// homogeneous modes can exceed the reproduction tolerance.
const FATE_RESOLVABLE: f64 = 0.1;
const REPRODUCTION_REL: f64 = 1e-8;
const GROWTH_RATE_REL: f64 = 1e-3;
const JENSEN_INSTANCES: usize = 200;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn dimension(ctx: &Context) -> i64 {
    2 * ctx.config.order as i64 - 1
}

/// 50 log-spaced radii in `[10⁻³, 10³]`.
fn sample_radii() -> Vec<f64> {
    (0..50).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 49.0)).collect()
}

fn solution(ctx: &Context) -> Result<NormalizedSolution> {
    normalized_solution(ctx.config.order, ctx.config.precision)
}

/// Radii in `sample_radii` where `keep(sign of f)` fails, evaluated exactly.
fn sign_violations(f: &RadialExpr, precision: u32, keep: impl Fn(&BigRational) -> bool) -> Result<Vec<f64>> {
    let mut bad = Vec::new();
    for r in sample_radii() {
        if !keep(f.evaluate(r, precision)?.rational()) {
            bad.push(r);
        }
    }
    Ok(bad)
}

fn describe(bad: &[f64]) -> String {
    if bad.is_empty() {
        "holds at all 50 radii".into()
    } else {
        format!("fails at r = {:?}", bad)
    }
}

pub(super) fn symbolic(ctx: &Context) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    let order = ctx.config.order;
    let n = dimension(ctx);
    let base = RadialExpr::base_power(1);
    let p2 = -(4 * order as i32 - 1);

    match (base.polylaplacian(n, order as u32), curvature_constant(order)) {
        (Ok(image), Ok(k)) => {
            let expected = RadialExpr::from_terms(0, [(p2, -k.clone())]);
            out.checks.push(CheckResult::exact(
                "symbolic.classification",
                "solution-family",
                image.to_string(),
                expected.to_string(),
                format!("(-Δ)^{order} (1+r²)^(1/2) in dimension {n}"),
            ));
            out.checks.push(match golden_row(order) {
                Some(g) => CheckResult::exact(
                    "symbolic.curvature_constant",
                    "solution-family",
                    rational_string(&k),
                    g.curvature_constant.to_string(),
                    "K_N against the frozen table",
                ),
                None => CheckResult::skipped("symbolic.curvature_constant", "solution-family", "no frozen value for this N"),
            });
        }
        (Err(e), _) | (_, Err(e)) => out.checks.push(CheckResult::failed("symbolic.classification", "solution-family", &e)),
    }

    match solution(ctx) {
        Ok(sol) => {
            let tol = 2f64.powi(8 - ctx.config.precision as i32);
            out.checks.push(CheckResult::numeric(
                "symbolic.scaling",
                "solution-family",
                sol.scaling_defect(),
                0.0,
                tol,
                "|K_N a^{4N} - 1| at the working precision",
            ));
            let u = sol.solution();
            let image = sol.polylaplacian(order as u32);
            let worst = sample_radii()
                .iter()
                .map(|&r| {
                    let lhs = image.eval(r);
                    let rhs = -u.eval(r).powi(p2);
                    (lhs - rhs).abs() / rhs.abs()
                })
                .fold(0.0, f64::max);
            out.checks.push(CheckResult::numeric(
                "symbolic.equation_residual",
                "target-equations",
                worst,
                0.0,
                1e-12,
                "max relative |(-Δ)^N u + u^{-(4N-1)}| / u^{-(4N-1)} over 50 radii",
            ));
        }
        Err(e) => out.checks.push(CheckResult::failed("symbolic.scaling", "solution-family", &e)),
    }

    for k in 1..order as u32 {
        let id = format!("symbolic.sub_polyharmonic.k{k}");
        match base.polylaplacian(n, k) {
            Ok(v) => {
                let positive = v.terms().filter(|(_, a)| a.is_positive()).count();
                let negative = v.terms().filter(|(_, a)| a.is_negative()).count();
                let bad = positive + usize::from(negative == 0);
                out.checks.push(CheckResult::violations(id, "sub-polyharmonic-signs", bad, format!("(-Δ)^{k} u / a = {v}")));
            }
            Err(e) => out.checks.push(CheckResult::failed(id, "sub-polyharmonic-signs", &e)),
        }
    }

    out.checks.push(match golden_row(order) {
        Some(g) => {
            let values: Result<Vec<String>> = (0..order as u32)
                .map(|k| Ok(rational_string(&base.polylaplacian(n, k)?.value_at_origin())))
                .collect();
            match values {
                Ok(v) => CheckResult::exact(
                    "symbolic.initial_data",
                    "sub-polyharmonic-signs",
                    v.join(","),
                    g.origin_values.join(","),
                    "v_k(0)/a against the frozen table",
                ),
                Err(e) => CheckResult::failed("symbolic.initial_data", "sub-polyharmonic-signs", &e),
            }
        }
        None => CheckResult::skipped("symbolic.initial_data", "sub-polyharmonic-signs", "no frozen value for this N"),
    });

    let second = base.derivative().derivative();
    out.checks.push(CheckResult::exact(
        "symbolic.convexity",
        "average-convexity",
        second.to_string(),
        RadialExpr::base_power(-3).to_string(),
        "u''/a",
    ));

    match reciprocal(&base, n) {
        Ok((lhs, rhs)) => {
            out.checks.push(CheckResult::exact(
                "symbolic.reciprocal_identity",
                "reciprocal-identity",
                lhs.to_string(),
                rhs.to_string(),
                "Δ(1/u) against -Δu/u² + 2|∇u|²/u³, for u/a",
            ));
            let negative = lhs.terms().filter(|(_, c)| c.is_negative()).count();
            out.informational.push(CheckResult::violations(
                "symbolic.reciprocal_sign",
                "reciprocal-identity",
                negative,
                "negative coefficients of Δ(1/u); the explicit solution has Δ(1/u) < 0",
            ));
        }
        Err(e) => out.checks.push(CheckResult::failed("symbolic.reciprocal_identity", "reciprocal-identity", &e)),
    }
    out
}

fn reciprocal(base: &RadialExpr, n: i64) -> Result<(RadialExpr, RadialExpr)> {
    let lhs = RadialExpr::base_power(-1).laplacian(n)?;
    let d = base.derivative();
    let first = base.laplacian(n)?.neg().mul(&RadialExpr::base_power(-2));
    let second = d.mul(&d).scale(&rat(2)).mul(&RadialExpr::base_power(-3));
    Ok((lhs, first.add(&second)?))
}

pub(super) fn constants(ctx: &Context) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    let order = ctx.config.order;
    for n in (3..=15).step_by(2) {
        let id = format!("constants.sphere_area.n{n}");
        match (sphere_area(n), gamma_half(n)) {
            (Ok(w), Ok(g)) => out.checks.push(CheckResult::exact(
                id,
                "sphere-area",
                (&w * &g).to_string(),
                ExactScalar::new(rat(2), n as i32).to_string(),
                "ω_n Γ(n/2) = 2π^{n/2}",
            )),
            (Err(e), _) | (_, Err(e)) => out.checks.push(CheckResult::failed(id, "sphere-area", &e)),
        }
    }

    let mut chains: Vec<ConstantChain> = Vec::new();
    for mode in ConstantMode::ALL {
        let id = format!("constants.{}.invariants", mode.name());
        match constant_chain(order, mode) {
            Ok(chain) => {
                let verdict = chain.check_invariants().map(|_| "ok".to_string()).unwrap_or_else(|e| e);
                let rendering: Vec<String> = chain.constants().iter().map(|c| c.to_string()).collect();
                out.checks.push(CheckResult::exact(id, "constants-ledger", verdict, "ok".into(), rendering.join(", ")));
                chains.push(chain);
            }
            Err(e) => out.checks.push(CheckResult::failed(id, "constants-ledger", &e)),
        }
        let id = format!("constants.{}.flux", mode.name());
        let expected = match mode {
            ConstantMode::Corrected => 1,
            ConstantMode::PaperLiteral => 2 * order as i64 - 3,
        };
        match flux_check(order, mode) {
            Ok(f) => out.checks.push(CheckResult::exact(
                id,
                "green-normalization",
                f.to_string(),
                expected.to_string(),
                "flux of ∂_r(-c_{N-1} r^{-(2N-3)}) through a sphere",
            )),
            Err(e) => out.checks.push(CheckResult::failed(id, "green-normalization", &e)),
        }
    }

    if let [paper, corrected] = chains.as_slice() {
        let factor = rat(2 * order as i64 - 3);
        let mismatched = (0..order).filter(|&k| *paper.get(k) != corrected.get(k).scale(&factor)).count();
        out.checks.push(CheckResult::violations(
            "constants.mode_ratio",
            "constants-ledger",
            mismatched,
            format!("c_k differ between modes by the factor {factor} at every k"),
        ));
    }
    out
}

fn radius_tag(r: f64) -> String {
    format!("{r}")
}

pub(super) fn representation(ctx: &Context) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    let order = ctx.config.order;
    let n = dimension(ctx);
    let cfg = QuadratureConfig::for_tolerance(ctx.config.tol, ctx.config.truncation_radius, ctx.config.precision);
    let rel = ctx.config.check_tolerance();
    let setup = (|| -> Result<_> {
        let sol = solution(ctx)?;
        let f = RadialDensity::solution_source(order)?;
        let chain = constant_chain(order, ctx.mode)?;
        let flux = flux_check(order, ctx.mode)?;
        Ok((sol, f, chain, flux))
    })();
    let (sol, f, chain, flux) = match setup {
        Ok(s) => s,
        Err(e) => {
            out.checks.push(CheckResult::failed("representation.setup", "representation-u", &e));
            return out;
        }
    };
    let other_mode = ConstantMode::ALL.into_iter().find(|m| *m != ctx.mode).expect("two modes");
    let other = constant_chain(order, other_mode).ok().filter(|c| c.constants() != chain.constants());

    out.checks.push(CheckResult::exact(
        "representation.flux",
        "green-normalization",
        flux.to_string(),
        "1".into(),
        format!("constant mode {}", ctx.mode.name()),
    ));

    // Potentials at every sample radius: k = 0 uses |x-y|, k ≥ 1 uses |x-y|^{-(2k-1)}.
    let jobs: Vec<(f64, usize)> = ctx
        .config
        .radii
        .iter()
        .flat_map(|&r| (0..order).map(move |k| (r, k)))
        .collect();
    let values: Vec<Result<PotentialValue>> = jobs
        .par_iter()
        .map(|&(r, k)| {
            let beta = if k == 0 { 1.0 } else { -(2.0 * k as f64 - 1.0) };
            potential(&f, beta, r, n, &cfg)
        })
        .collect();

    let u = sol.solution();
    let mut offsets = Vec::new();
    for (&(r, k), value) in jobs.iter().zip(&values) {
        let (id, anchor) = if k == 0 {
            (format!("representation.u.r{}", radius_tag(r)), "representation-u")
        } else {
            (format!("representation.k{k}.r{}", radius_tag(r)), "representation-chain")
        };
        let expected = if k == 0 { u.eval(r) } else { -sol.polylaplacian(k as u32).eval(r) };
        match value {
            Ok(p) => {
                let c = chain.get(k).to_f64();
                let notes = format!("c_{k} = {}; quadrature error {:e}, tail {:e}", chain.get(k), p.error_estimate, p.tail_bound_used);
                out.checks.push(CheckResult::relative(id.clone(), anchor, c * p.value, expected, rel, notes));
                if k == 0 {
                    offsets.push(expected - c * p.value);
                }
                if let Some(o) = &other {
                    let c_other = o.get(k).to_f64();
                    out.informational.push(CheckResult::relative(
                        format!("other_mode.{id}"),
                        anchor,
                        c_other * p.value,
                        expected,
                        rel,
                        format!("constant mode {}", other_mode.name()),
                    ));
                }
            }
            Err(e) => out.checks.push(CheckResult::failed(id, anchor, e)),
        }
    }

    if !offsets.is_empty() && offsets.len() == ctx.config.radii.len() {
        let gamma = offsets.iter().sum::<f64>() / offsets.len() as f64;
        let spread = offsets.iter().map(|o| (o - gamma).abs()).fold(0.0, f64::max);
        out.gamma_estimate = Some(gamma);
        out.checks.push(CheckResult::numeric(
            "representation.gamma",
            "gamma-vanishes",
            gamma,
            0.0,
            rel,
            format!("mean of u(r) - c_0 ∫|x-y| u^{{-(4N-1)}} over the sample radii; spread {spread:e}"),
        ));
    }

    match potential(&f, 0.0, 0.0, n, &cfg) {
        Ok(mass) => {
            let alpha = chain.get(0).to_f64() * mass.value;
            out.alpha_from_mass = Some(alpha);
            out.checks.push(CheckResult::relative(
                "representation.mass",
                "mass-growth",
                alpha,
                sol.scale(),
                rel,
                "c_0 ∫ u^{-(4N-1)} against the growth rate a",
            ));
        }
        Err(e) => out.checks.push(CheckResult::failed("representation.mass", "mass-growth", &e)),
    }

    let derivative = sol.base().derivative();
    let pohozaev: Vec<Result<PotentialValue>> =
        POHOZAEV_RADII.par_iter().map(|&r| pohozaev_integral(&f, r, n, &cfg)).collect();
    for (&r, value) in POHOZAEV_RADII.iter().zip(&pohozaev) {
        let id = format!("representation.pohozaev.r{}", radius_tag(r));
        match value {
            Ok(p) => {
                let expected = r * sol.scale() * derivative.eval_f64(r);
                out.checks.push(CheckResult::relative(
                    id,
                    "pohozaev",
                    chain.get(0).to_f64() * p.value,
                    expected,
                    rel,
                    format!("against r u'(r); quadrature error {:e}", p.error_estimate),
                ));
            }
            Err(e) => out.checks.push(CheckResult::failed(id, "pohozaev", e)),
        }
    }
    out
}

pub(super) fn decay(ctx: &Context) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    match decay_checks(ctx, &mut out) {
        Ok(()) => {}
        Err(e) => out.checks.push(CheckResult::failed("decay.setup", "decay-limits", &e)),
    }
    out
}

fn decay_checks(ctx: &Context, out: &mut SuiteOutput) -> Result<()> {
    let order = ctx.config.order;
    let n = dimension(ctx);
    let prec = ctx.config.precision;
    let sol = solution(ctx)?;
    let a = sol.scale();
    let base = sol.base().clone();
    let r = RadialExpr::r();

    // w = -Δu and m = N-1, so n - 2m = 1.
    let w = base.laplacian(n)?.neg();
    let m = order as i64 - 1;
    let first = r.mul(&w.derivative()).add(&w.scale(&rat(n - 2 * m)))?;
    let mut bad = sign_violations(&first, prec, |v| !v.is_positive())?;
    let lead = first.leading_asymptotics()?;
    if lead.lead_coeff.is_positive() {
        bad.push(f64::INFINITY);
    }
    if first.value_at_origin().is_positive() {
        bad.push(0.0);
    }
    out.checks.push(CheckResult::violations(
        "decay.barrier.first",
        "barrier-inequality",
        bad.len(),
        format!("r w' + (n-2m) w ≤ 0 with w = -Δu: {}; lead {}·r^{}", describe(&bad), lead.lead_coeff, lead.growth_exponent),
    ));

    let second = r.mul(&w.derivative().derivative()).add(&w.derivative().scale(&rat(2)))?;
    let mut bad = sign_violations(&second, prec, |v| !v.is_negative())?;
    let lead = second.leading_asymptotics()?;
    if lead.lead_coeff.is_negative() {
        bad.push(f64::INFINITY);
    }
    out.checks.push(CheckResult::violations(
        "decay.barrier.second",
        "barrier-inequality",
        bad.len(),
        format!("r w'' + 2 w' ≥ 0: {}; lead {}·r^{}", describe(&bad), lead.lead_coeff, lead.growth_exponent),
    ));

    let convex = base.derivative().derivative();
    let bad = sign_violations(&convex, prec, |v| !v.is_negative())?;
    out.checks.push(CheckResult::violations("decay.convexity", "average-convexity", bad.len(), format!("u'' ≥ 0: {}", describe(&bad))));

    // r^{2N-2} = (t - 1)^{N-1} with t = 1 + r².
    let t_minus_one = RadialExpr::base_power(2).sub(&RadialExpr::constant(BigRational::one()))?;
    let mut power = RadialExpr::constant(BigRational::one());
    for _ in 0..order - 1 {
        power = power.mul(&t_minus_one);
    }
    let du = base.derivative();
    let g = power.mul(&du);
    let lhs = r.mul(&g.derivative());
    let rhs = g.scale(&rat(2 * order as i64 - 2));
    let diff = lhs.sub(&rhs)?;
    let identity = r.mul(&power).mul(&convex);
    out.checks.push(CheckResult::exact(
        "decay.monotonicity.identity",
        "second-derivative-monotonicity",
        diff.to_string(),
        identity.to_string(),
        "r (r^{2N-2} u')' - (2N-2) r^{2N-2} u' = r^{2N-1} u''",
    ));
    let bad = sign_violations(&diff, prec, |v| !v.is_negative())?;
    out.checks.push(CheckResult::violations(
        "decay.monotonicity",
        "second-derivative-monotonicity",
        bad.len(),
        format!("r (r^{{2N-2}} u')' ≥ (2N-2) r^{{2N-2}} u': {}", describe(&bad)),
    ));

    for k in 1..order as u32 {
        let v = base.polylaplacian(n, k)?;
        let lead = v.leading_asymptotics()?;
        let far = a * v.eval_f64(1e6);
        out.checks.push(CheckResult::violations(
            format!("decay.exponent.k{k}"),
            "decay-limits",
            usize::from(lead.growth_exponent > -1),
            format!("(-Δ)^{k} u ~ {}·a·r^{}; value at r = 1e6 is {far:e}", lead.lead_coeff, lead.growth_exponent),
        ));
    }

    let lead = base.leading_asymptotics()?;
    let slope = a * du.eval_f64(1.0);
    let bad = usize::from(lead.growth_exponent != 1) + usize::from(!lead.lead_coeff.is_positive()) + usize::from(!(slope > 0.0));
    out.checks.push(CheckResult::violations(
        "decay.alpha.sign",
        "positive-growth-rate",
        bad,
        format!("u ~ {}·a·r^{}, u'(1) = {slope:e}", lead.lead_coeff, lead.growth_exponent),
    ));
    if let Some(g) = golden_row(order) {
        let frozen: f64 = g.scale.parse().unwrap_or(f64::NAN);
        let alpha = a * crate::highprec::rational_to_f64(&lead.lead_coeff);
        out.checks.push(CheckResult::relative("decay.alpha.value", "positive-growth-rate", alpha, frozen, 1e-15, "α = a against the frozen table"));
    }

    let mut bad = Vec::new();
    for k in 0..order as u32 {
        let v = base.polylaplacian(n, k)?;
        let lead = v.leading_asymptotics()?;
        let c = crate::highprec::rational_to_f64(&lead.lead_coeff);
        for big in [1e3, 1e4, 1e5] {
            let value = v.evaluate(big, prec)?.to_f64() / big.powi(lead.growth_exponent);
            if (value - c).abs() > 10.0 / big * c.abs() {
                bad.push((k, big));
            }
        }
    }
    out.checks.push(CheckResult::violations(
        "decay.asymptotic_lead",
        "decay-limits",
        bad.len(),
        format!("f(r)/r^p within 10/r of the lead coefficient at r = 1e3, 1e4, 1e5: failures {bad:?}"),
    ));
    Ok(())
}

pub(super) fn mean_value(ctx: &Context) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    let order = ctx.config.order;
    let cfg = QuadratureConfig::for_tolerance(ctx.config.tol, ctx.config.truncation_radius, ctx.config.precision);
    let rel = ctx.config.check_tolerance();
    let jobs: Vec<(f64, f64)> = MEAN_VALUE_CENTRES
        .iter()
        .flat_map(|&x| MEAN_VALUE_RADII.iter().map(move |&r| (x, r)))
        .collect();
    let results: Vec<_> = jobs.par_iter().map(|&(x, r)| nested_mean_value_check(order, x, r, &cfg)).collect();
    for (&(x, r), res) in jobs.iter().zip(results) {
        let id = format!("mean_value.x{}.r{}", radius_tag(x), radius_tag(r));
        match res {
            Ok(cmp) => {
                out.checks.push(CheckResult::relative(
                    id.clone(),
                    "nested-mean-value",
                    cmp.lhs,
                    cmp.rhs,
                    rel,
                    "iterated ball-mass integral against ω z(x) - ω z̄(r) - (ω/2n) w(x) r²",
                ));
                out.informational.push(CheckResult::relative(
                    format!("{id}.plus_variant"),
                    "nested-mean-value",
                    cmp.lhs,
                    cmp.rhs_plus_variant,
                    rel,
                    "the same right side with +ω z(x); it does not vanish as r → 0",
                ));
            }
            Err(e) => out.checks.push(CheckResult::failed(id, "nested-mean-value", &e)),
        }
    }
    out
}

pub(super) fn jensen(ctx: &Context) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    let order = ctx.config.order;
    let p = 4.0 * order as f64 - 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a65_6e73_656e + order as u64);
    let mut bad = Vec::new();
    let mut errors = Vec::new();
    for i in 0..JENSEN_INSTANCES {
        let m = rng.gen_range(2..=12);
        let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let values: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0f64..3.0).exp()).collect();
        let q = if i % 2 == 0 { p } else { rng.gen_range(0.1..p) };
        match jensen_gap(&weights, &values, q) {
            Ok(gap) => {
                let scale: f64 = weights.iter().zip(&values).map(|(w, v)| w * v.powf(-q)).sum();
                if gap < -1e-12 * scale {
                    bad.push(i);
                }
            }
            Err(e) => errors.push(format!("instance {i}: {e}")),
        }
    }
    if errors.is_empty() {
        out.checks.push(CheckResult::violations(
            "jensen.discrete",
            "jensen",
            bad.len(),
            format!("{JENSEN_INSTANCES} random weighted instances; violating instances {bad:?}"),
        ));
    } else {
        out.checks.push(CheckResult::violations("jensen.discrete", "jensen", errors.len(), errors.join("; ")));
    }

    let cfg = QuadratureConfig::for_tolerance(ctx.config.tol, ctx.config.truncation_radius, ctx.config.precision);
    let spheres = match solution(ctx) {
        Ok(sol) => {
            let u = sol.solution();
            let mut bad = Vec::new();
            let mut failure = None;
            for c in [0.0, 2.0] {
                for rho in [0.5, 1.0, 3.0] {
                    let mean = spherical_mean(|s| u.eval(s), c, rho, dimension(ctx), &cfg);
                    let mean_neg = spherical_mean(|s| u.eval(s).powf(-p), c, rho, dimension(ctx), &cfg);
                    match (mean, mean_neg) {
                        (Ok(m), Ok(mn)) => {
                            if mn < m.powf(-p) * (1.0 - 1e-12) {
                                bad.push((c, rho));
                            }
                        }
                        (Err(e), _) | (_, Err(e)) => failure = Some(e),
                    }
                }
            }
            match failure {
                Some(e) => CheckResult::failed("jensen.spherical", "jensen", &e),
                None => CheckResult::violations(
                    "jensen.spherical",
                    "jensen",
                    bad.len(),
                    format!("(⨍u)^{{-{p}}} ≤ ⨍u^{{-{p}}} on spheres centred at distance 0, 2 with radii 0.5, 1, 3; failures {bad:?}"),
                ),
            }
        }
        Err(e) => CheckResult::failed("jensen.spherical", "jensen", &e),
    };
    out.checks.push(spheres);
    out
}

/// Growing homogeneous modes scale integration error roughly by r^(2N-2).
fn amplified_error(order: usize, r: f64) -> f64 {
    REPRODUCTION_TOL * r.powi(2 * order as i32 - 2)
}

pub(super) fn ode_reproduction(ctx: &Context) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    if let Err(e) = ode_checks(ctx, &mut out) {
        out.checks.push(CheckResult::failed("ode.setup", "target-equations", &e));
    }
    out
}

fn ode_checks(ctx: &Context, out: &mut SuiteOutput) -> Result<()> {
    let order = ctx.config.order;
    let sol = solution(ctx)?;
    let sys = OdeSystem::new(order, Sign::PlusNegativePower)?;
    let init = initial_data(order)?;
    let r_max = golden::FATE_R_MAX;
    let window = golden::FATE_WINDOW;
    let mut checkpoints = window_checkpoints(r_max, window);
    checkpoints.extend(REPRODUCTION_RADII);
    let opts = IntegrateOptions::new(REPRODUCTION_TOL).with_checkpoints(&checkpoints);
    let traj = integrate_with(&sys, &init, r_max, &opts)?;

    for &r in &REPRODUCTION_RADII {
        let state = traj.state_at(r);
        let amplification = amplified_error(order, r);
        for k in 0..order {
            let id = format!("ode.reproduction.v{k}.r{}", radius_tag(r));
            if amplification > REPRODUCTION_REL {
                out.checks.push(CheckResult::skipped(
                    id,
                    "target-equations",
                    format!("tol·r^(2N-2) = {amplification:e} exceeds {REPRODUCTION_REL:e}"),
                ));
                continue;
            }
            let expected = sol.polylaplacian(k as u32).eval(r);
            match state {
                Some(y) => out.checks.push(CheckResult::relative(
                    id,
                    "target-equations",
                    y[2 * k],
                    expected,
                    REPRODUCTION_REL,
                    format!("integrated at tolerance {REPRODUCTION_TOL:e}"),
                )),
                None => out.checks.push(CheckResult::failed(
                    id,
                    "target-equations",
                    &crate::Error::Internal(format!("trajectory ended at {} before r = {r}", traj.last_radius())),
                )),
            }
        }
    }

    let residual = mass_identity_residual(&traj);
    out.checks.push(CheckResult::numeric(
        "ode.flux_identity",
        "representation-chain",
        residual,
        0.0,
        1e-7,
        "max relative residual of r^{n-1} v_k' + ∫ s^{n-1} v_{k+1} ds",
    ));

    let amplification = amplified_error(order, r_max);
    if amplification > FATE_RESOLVABLE {
        let note = format!("tol·r_max^(2N-2) = {amplification:e} exceeds {FATE_RESOLVABLE:e}");
        out.checks.push(CheckResult::skipped("ode.linear_growth", "positive-growth-rate", note.clone()));
        out.checks.push(CheckResult::skipped("ode.sign_structure", "sub-polyharmonic-signs", note));
        return Ok(());
    }

    let fate = classify_trajectory(&traj, window)?;
    let a = sol.scale();
    out.checks.push(match fate.kind {
        FateKind::LinearGrowth { alpha } => CheckResult::relative(
            "ode.linear_growth",
            "positive-growth-rate",
            alpha,
            a,
            GROWTH_RATE_REL,
            fate.detail,
        ),
        other => CheckResult::exact(
            "ode.linear_growth",
            "positive-growth-rate",
            other.label().into(),
            "linear_growth".into(),
            fate.detail,
        ),
    });

    let mut bad = Vec::new();
    if !sign_constant(&traj) {
        bad.push("v_k changes sign".to_string());
    }
    for i in 0..traj.grid.len() {
        if let Some(d2) = traj.second_derivative_v0(i) {
            if d2 < -1e-9 {
                bad.push(format!("v0'' = {d2:e} at r = {}", traj.grid[i]));
                break;
            }
        }
    }
    out.checks.push(CheckResult::violations(
        "ode.sign_structure",
        "sub-polyharmonic-signs",
        bad.len(),
        if bad.is_empty() { "v_k < 0 for k ≥ 1 and v0'' ≥ 0 along the trajectory".into() } else { bad.join("; ") },
    ));
    Ok(())
}

fn labels(results: &[ShotResult]) -> Vec<&'static str> {
    results
        .iter()
        .map(|r| r.fate.as_ref().map(|f| f.kind.label()).unwrap_or("error"))
        .collect()
}

fn fate_notes(results: &[ShotResult]) -> String {
    results
        .iter()
        .map(|r| match &r.fate {
            Ok(f) => format!("v1(0)={:e}: {}", r.init[2], f.kind),
            Err(e) => format!("v1(0)={:e}: error {e}", r.init[2]),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

pub(super) fn nonexistence_scan(ctx: &Context) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    if ctx.config.order != 2 {
        out.checks.push(CheckResult::skipped(
            "nonexistence.golden",
            "sign-conflict",
            "the frozen fate tables exist for N = 2 only",
        ));
        return out;
    }
    let setup = (|| -> Result<_> {
        Ok((
            OdeSystem::new(2, Sign::MinusNegativePower)?,
            OdeSystem::new(2, Sign::PlusNegativePower)?,
            initial_data(2)?,
            solution(ctx)?.scale(),
        ))
    })();
    let (minus, plus, init, a) = match setup {
        Ok(s) => s,
        Err(e) => {
            out.checks.push(CheckResult::failed("nonexistence.setup", "sign-conflict", &e));
            return out;
        }
    };
    let minus_grid = minus_sign_grid();
    let plus_grid = perturbation_grid(&init, &PERTURBATIONS);
    let runs: Vec<(f64, Vec<ShotResult>, Vec<ShotResult>)> = golden::FATE_TOLERANCES
        .par_iter()
        .map(|&tol| {
            (
                tol,
                shoot_grid(&minus, &minus_grid, golden::FATE_R_MAX, tol, golden::FATE_WINDOW),
                shoot_grid(&plus, &plus_grid, golden::FATE_R_MAX, tol, golden::FATE_WINDOW),
            )
        })
        .collect();

    for (tol, m, p) in &runs {
        out.checks.push(CheckResult::exact(
            format!("nonexistence.minus.golden.tol{tol:e}"),
            "sign-conflict",
            labels(m).join(","),
            golden::MINUS_GRID_FATES.join(","),
            fate_notes(m),
        ));
        out.checks.push(CheckResult::exact(
            format!("nonexistence.plus.golden.tol{tol:e}"),
            "sign-conflict",
            labels(p).join(","),
            golden::PLUS_GRID_FATES.join(","),
            fate_notes(p),
        ));
        let both = m
            .iter()
            .filter(|r| r.sign_constant && matches!(r.fate, Ok(ref f) if matches!(f.kind, FateKind::LinearGrowth { .. })))
            .count();
        out.informational.push(CheckResult::violations(
            format!("nonexistence.minus.linear_and_sign_constant.tol{tol:e}"),
            "sign-conflict",
            both,
            "entries of the - equation grid with linear growth and constant signs",
        ));
    }
    if let [(_, m1, p1), (_, m2, p2)] = runs.as_slice() {
        let first: Vec<_> = labels(m1).into_iter().chain(labels(p1)).collect();
        let second: Vec<_> = labels(m2).into_iter().chain(labels(p2)).collect();
        out.checks.push(CheckResult::exact(
            "nonexistence.tolerance_agreement",
            "sign-conflict",
            first.join(","),
            second.join(","),
            format!("fate labels at tolerances {:e} and {:e}", golden::FATE_TOLERANCES[0], golden::FATE_TOLERANCES[1]),
        ));
    }
    if let Some((tol, _, p)) = runs.last() {
        let centre = PERTURBATIONS.iter().position(|d| *d == 0.0).expect("unperturbed entry");
        let linear: Vec<usize> = p
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(r.fate, Ok(ref f) if matches!(f.kind, FateKind::LinearGrowth { .. })))
            .map(|(i, _)| i)
            .collect();
        out.informational.push(CheckResult::violations(
            "nonexistence.plus.linear_only_unperturbed",
            "sign-conflict",
            linear.iter().filter(|&&i| i != centre).count() + usize::from(!linear.contains(&centre)),
            format!("entries with linear growth at tolerance {tol:e}: {linear:?}"),
        ));
        if let Ok(f) = &p[centre].fate {
            if let FateKind::LinearGrowth { alpha } = f.kind {
                out.informational.push(CheckResult::relative(
                    "nonexistence.plus.unperturbed_alpha",
                    "positive-growth-rate",
                    alpha,
                    a,
                    GROWTH_RATE_REL,
                    f.detail.clone(),
                ));
            }
        }
    }
    out
}
