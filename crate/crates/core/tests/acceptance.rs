use polyharmonic::exact_constants::{constant_chain, flux_check, ConstantMode, ExactScalar};
use polyharmonic::golden::table_entry;
use polyharmonic::radial_calculus::curvature_constant;
use polyharmonic::radial_ode::{classify_trajectory, integrate, minus_sign_grid, sign_constant, FateKind, OdeSystem, Sign};
use polyharmonic::verify::{run_suite, CheckResult, Measure, Status, Suite, VerificationReport, VerifyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::{Command, ExitCode};
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn double_factorial(m: u64) -> u64 {
    (1..=m).rev().step_by(2).product()
}

/// `K_N^{-1/(4N)}` with `K_N = (4N-3)!!`.
fn scale_oracle(order: usize) -> f64 {
    (double_factorial(4 * order as u64 - 3) as f64).powf(-1.0 / (4.0 * order as f64))
}

fn real(m: &Measure) -> Option<f64> {
    match m {
        Measure::Real(x) => Some(*x),
        Measure::Exact(_) => None,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn suite(s: Suite, order: usize) -> Result<VerificationReport, String> {
    run_suite(s, &VerifyConfig::new(order)).map_err(|e| format!("N = {order}: {e}"))
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_pass(r: &VerificationReport) -> Result<(), String> {
    let bad: Vec<&str> = r.failures().map(|c| c.id.as_str()).collect();
    require(bad.is_empty(), || format!("N = {}: failing checks {bad:?}", r.order))
}

fn checks<'a>(r: &'a VerificationReport, prefix: &'a str) -> impl Iterator<Item = &'a CheckResult> + 'a {
    r.checks.iter().filter(move |c| c.id.starts_with(prefix))
}

/// Largest relative error of the numeric checks with the given prefix.
fn worst_relative(r: &VerificationReport, prefix: &str) -> Result<(f64, usize), String> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for c in checks(r, prefix) {
        let (Some(m), Some(e)) = (real(&c.measured), real(&c.expected)) else {
            return Err(format!("{} is not numeric ({:?})", c.id, c.status));
        };
        worst = worst.max(rel(m, e));
        count += 1;
    }
    require(count > 0, || format!("no checks named {prefix}*"))?;
    Ok((worst, count))
}

fn symbolic_classification() -> Outcome {
    let start = Instant::now();
    for order in 2..=6 {
        let k = curvature_constant(order).map_err(|e| e.to_string())?;
        let oracle = double_factorial(4 * order as u64 - 3);
        require(k == num_rational::BigRational::from_integer(oracle.into()), || format!("K_{order} = {k}, expected {oracle}"))?;
        all_pass(&suite(Suite::Symbolic, order)?)?;
    }
    let elapsed = start.elapsed();
    let e = table_entry(2).map_err(|e| e.to_string())?;
    require(e.curvature_constant == "15", || format!("K_2 = {}", e.curvature_constant))?;
    require(e.scale_256 == e.scale_512, || "a_2 differs between 256 and 512 bits".into())?;
    let a2: f64 = e.scale_256.parse().map_err(|_| "a_2 does not parse".to_string())?;
    require(rel(a2, 15f64.powf(-0.125)) < 1e-15, || format!("a_2 = {a2}"))?;
    require(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!("K_2..K_6 = (4N-3)!!, a_2 agrees at 256/512 bits, {:.0} ms", elapsed.as_secs_f64() * 1e3))
}

fn constant_chains() -> Outcome {
    let start = Instant::now();
    for order in 2..=8 {
        for mode in ConstantMode::ALL {
            let chain = constant_chain(order, mode).map_err(|e| e.to_string())?;
            chain.check_invariants().map_err(|e| format!("N = {order}, {}: {e}", mode.name()))?;
        }
        let corrected = flux_check(order, ConstantMode::Corrected).map_err(|e| e.to_string())?;
        require(corrected == ExactScalar::one(), || format!("N = {order}: corrected flux {corrected}"))?;
        let literal = flux_check(order, ConstantMode::PaperLiteral).map_err(|e| e.to_string())?;
        let expected = ExactScalar::integer(2 * order as i64 - 3);
        require(literal == expected, || format!("N = {order}: literal flux {literal}, expected {expected}"))?;
    }
    let elapsed = start.elapsed();
    require(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!("N = 2..8, literal flux = 2N-3 (unit only at N = 2), {:.0} ms", elapsed.as_secs_f64() * 1e3))
}

fn integral_representation() -> Outcome {
    let mut notes = Vec::new();
    for order in [2, 3] {
        let r = suite(Suite::Representation, order)?;
        require(r.constant_mode == ConstantMode::Corrected, || format!("N = {order}: adjudicated {:?}", r.constant_mode))?;
        let a = scale_oracle(order);
        for c in checks(&r, "representation.u.r") {
            let radius: f64 = c.id.trim_start_matches("representation.u.r").parse().map_err(|_| c.id.clone())?;
            let e = real(&c.expected).ok_or_else(|| c.id.clone())?;
            require(rel(e, a * (1.0 + radius * radius).sqrt()) < 1e-12, || format!("{}: expected value {e} is not ũ", c.id))?;
        }
        let (wu, nu) = worst_relative(&r, "representation.u.")?;
        let (wk, nk) = worst_relative(&r, "representation.k")?;
        require(nu == 5 && nk == 5 * (order - 1), || format!("N = {order}: {nu} + {nk} checks"))?;
        require(wu.max(wk) <= 1e-5, || format!("N = {order}: worst relative error {:e}", wu.max(wk)))?;
        let gamma = r.gamma_estimate.ok_or("gamma missing")?;
        require(gamma.abs() <= 1e-5, || format!("N = {order}: gamma = {gamma:e}"))?;
        notes.push(format!("N = {order}: max rel {:.1e}, |gamma| {:.1e}", wu.max(wk), gamma.abs()));
    }
    Ok(notes.join("; "))
}

fn pohozaev() -> Outcome {
    let r = suite(Suite::Representation, 2)?;
    let a = scale_oracle(2);
    for c in checks(&r, "representation.pohozaev.r") {
        let radius: f64 = c.id.trim_start_matches("representation.pohozaev.r").parse().map_err(|_| c.id.clone())?;
        let e = real(&c.expected).ok_or_else(|| c.id.clone())?;
        let oracle = a * radius * radius / (1.0 + radius * radius).sqrt();
        require(rel(e, oracle) < 1e-12, || format!("{}: expected value {e} is not r ũ'(r)", c.id))?;
    }
    let (worst, count) = worst_relative(&r, "representation.pohozaev.")?;
    require(count == 3 && worst <= 1e-5, || format!("{count} checks, worst {worst:e}"))?;
    Ok(format!("r in {{0.5, 1, 2}}, max rel {worst:.1e}"))
}

fn nested_mean_value() -> Outcome {
    let mut notes = Vec::new();
    for order in [2, 3] {
        let r = suite(Suite::MeanValue, order)?;
        let (worst, count) = worst_relative(&r, "mean_value.")?;
        require(count == 4 && worst <= 1e-5, || format!("N = {order}: {count} checks, worst {worst:e}"))?;
        notes.push(format!("N = {order}: max rel {worst:.1e}"));
    }
    Ok(notes.join("; "))
}

fn sign_and_limit_properties() -> Outcome {
    let start = Instant::now();
    for order in 2..=6 {
        let sym = suite(Suite::Symbolic, order)?;
        let decay = suite(Suite::Decay, order)?;
        all_pass(&sym)?;
        all_pass(&decay)?;
        for k in 1..order {
            require(sym.check(&format!("symbolic.sub_polyharmonic.k{k}")).is_some_and(|c| c.status == Status::Pass), || {
                format!("N = {order}: sign check k = {k} missing")
            })?;
            require(decay.check(&format!("decay.exponent.k{k}")).is_some_and(|c| c.status == Status::Pass), || {
                format!("N = {order}: decay exponent k = {k} missing")
            })?;
        }
        for id in ["decay.barrier.first", "decay.barrier.second", "decay.convexity", "decay.monotonicity", "decay.alpha.sign"] {
            require(decay.check(id).is_some_and(|c| c.status == Status::Pass), || format!("N = {order}: {id} missing"))?;
        }
        let alpha = decay.check("decay.alpha.value").and_then(|c| real(&c.measured)).ok_or("alpha missing")?;
        require(alpha > 0.0 && rel(alpha, scale_oracle(order)) < 1e-14, || format!("N = {order}: alpha = {alpha}"))?;
    }
    let elapsed = start.elapsed();
    require(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!("N = 2..6, alpha = K_N^(-1/4N) > 0, {:.0} ms", elapsed.as_secs_f64() * 1e3))
}

fn ode_reproduction() -> Outcome {
    let r = suite(Suite::OdeReproduction, 2)?;
    all_pass(&r)?;
    let a = scale_oracle(2);
    let mut worst = 0.0f64;
    for radius in [1.0f64, 5.0, 25.0, 50.0] {
        let t = 1.0 + radius * radius;
        // v1 = -Δ(a t^{1/2}) in R^3.
        let oracle = [a * t.sqrt(), -a * (2.0 / t.sqrt() + 1.0 / (t * t.sqrt()))];
        for (k, o) in oracle.iter().enumerate() {
            let id = format!("ode.reproduction.v{k}.r{radius}");
            let c = r.check(&id).ok_or_else(|| format!("{id} missing"))?;
            let m = real(&c.measured).ok_or_else(|| format!("{id} is {:?}", c.status))?;
            worst = worst.max(rel(m, *o));
        }
    }
    require(worst <= 1e-8, || format!("worst relative error {worst:e}"))?;
    let c = r.check("ode.linear_growth").ok_or("ode.linear_growth missing")?;
    let alpha = real(&c.measured).ok_or_else(|| format!("fate {:?}", c.measured))?;
    let target = 15f64.powf(-0.125);
    require(rel(alpha, target) <= 1e-3, || format!("alpha = {alpha}"))?;
    Ok(format!("max rel {worst:.1e}, alpha = {alpha:.6} vs {target:.6}"))
}

fn nonexistence() -> Outcome {
    let r = suite(Suite::NonexistenceScan, 2)?;
    all_pass(&r)?;
    let golden = checks(&r, "nonexistence.").filter(|c| c.status == Status::Pass).count();
    require(golden == 5, || format!("{golden} of 5 golden/agreement checks"))?;
    let sys = OdeSystem::new(2, Sign::MinusNegativePower).map_err(|e| e.to_string())?;
    let mut hits = 0;
    for init in minus_sign_grid() {
        let t = integrate(&sys, &init, 50.0, 1e-10).map_err(|e| e.to_string())?;
        let fate = classify_trajectory(&t, 10.0).map_err(|e| e.to_string())?;
        if matches!(fate.kind, FateKind::LinearGrowth { .. }) && sign_constant(&t) {
            hits += 1;
        }
    }
    require(hits == 0, || format!("{hits} grid entries are linear and sign-constant"))?;
    for tol in ["1e-8", "1e-10"] {
        let id = format!("nonexistence.minus.linear_and_sign_constant.tol{tol}");
        let c = r.check(&id).ok_or_else(|| format!("{id} missing"))?;
        require(real(&c.measured) == Some(0.0), || format!("{id} = {:?}", c.measured))?;
    }
    Ok("10-point grid: no linear sign-constant fate; golden fates match at 1e-8 and 1e-10".into())
}

fn jensen() -> Outcome {
    let r = suite(Suite::Jensen, 2)?;
    let c = r.check("jensen.discrete").ok_or("jensen.discrete missing")?;
    require(c.status == Status::Pass && c.notes.starts_with("200 "), || format!("{:?}: {}", c.status, c.notes))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    for _ in 0..200 {
        let m = rng.gen_range(1..=10);
        let w: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total: f64 = w.iter().sum();
        let f: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..10.0)).collect();
        let q = rng.gen_range(0.5..15.0);
        let mean = w.iter().zip(&f).map(|(w, f)| w * f).sum::<f64>() / total;
        let mean_neg = w.iter().zip(&f).map(|(w, f)| w * f.powf(-q)).sum::<f64>() / total;
        if mean.powf(-q) > mean_neg * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    require(violations == 0, || format!("{violations} violations in the independent sample"))?;
    Ok("200 suite instances and 200 independent instances, zero violations".into())
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("polyharmonic-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for i in 0..2 {
        let path = dir.join(format!("report{i}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_polyharmonic"))
            .args(["run", "--suite", "all", "--n", "2", "--out"])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        require(status.success(), || format!("run {i} exited with {status}"))?;
        reports.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    require(reports[0] == reports[1], || "reports differ".into())?;
    Ok(format!("two runs, {} identical bytes", reports[0].len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("symbolic classification", symbolic_classification),
        ("constant chains and flux", constant_chains),
        ("integral representation", integral_representation),
        ("Pohozaev identity", pohozaev),
        ("nested mean-value identity", nested_mean_value),
        ("sign and limit properties", sign_and_limit_properties),
        ("ODE reproduction", ode_reproduction),
        ("non-existence exploration", nonexistence),
        ("Jensen inequality", jensen),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
