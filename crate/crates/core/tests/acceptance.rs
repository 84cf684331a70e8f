//! Acceptance criteria 1–8, one PASS/FAIL line each. Exits non-zero if any
//! criterion fails.

use std::time::{Duration, Instant};

use weissbench::counterexample::{self as cx, CounterexampleParams, GramCache, Witness};
use weissbench::quadrature::QuadratureSpec;
use weissbench::report::Check;
use weissbench::suites::{self, SuiteConfig, SuiteOutput, WITNESS_MODES};

struct Outcome {
    checks: Vec<Check>,
}

impl Outcome {
    fn from_suite(out: SuiteOutput, names: &[&str]) -> Self {
        let mut checks = Vec::new();
        for name in names {
            match out.check(name) {
                Some(c) => checks.push(c.clone()),
                None => {
                    // The suite errored before producing this check.
                    let errors = out.checks.iter().filter(|c| c.details.starts_with("error"));
                    checks.extend(errors.cloned());
                    checks.push(Check::new(name, false, None, "not produced".into()));
                }
            }
        }
        Self { checks }
    }
}

fn criterion<F: FnOnce() -> Outcome>(id: u32, title: &str, budget: Duration, f: F) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let in_budget = elapsed <= budget;
    let pass = in_budget && outcome.checks.iter().all(|c| c.pass);
    println!(
        "criterion {id} {}: {title} [{:.1}s, budget {}s]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    for c in &outcome.checks {
        println!("    {}", c.line());
    }
    if !in_budget {
        println!("    FAIL runtime exceeded the budget");
    }
    pass
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn lorentz_closed_forms() -> Outcome {
    let out = suites::lorentz_closed_forms(&SuiteConfig::default());
    Outcome::from_suite(
        out,
        &["exp_l21_closed_form", "indicator_closed_form", "lpp_matches_lp"],
    )
}

fn rearrangement() -> Outcome {
    let out = suites::rearrangement_suite(&SuiteConfig::default());
    Outcome::from_suite(out, &["equimeasurability", "decreasing_fixed_point"])
}

fn laplace_identity() -> Outcome {
    let out = suites::laplace_suite(&SuiteConfig::default());
    Outcome::from_suite(out, &["laplace_identity"])
}

fn orthonormal_model() -> Outcome {
    let out = suites::orthonormal_suite(&SuiteConfig::default());
    Outcome::from_suite(
        out,
        &["orthonormal_weiss_sup_stable", "orthonormal_decay_bounded"],
    )
}

fn coefficients() -> Outcome {
    let mut checks = Vec::new();
    for q in [3.0, 4.0, 8.0] {
        let cfg = SuiteConfig {
            q,
            ..SuiteConfig::default()
        };
        let out = suites::coefficient_suite(&cfg);
        let part = Outcome::from_suite(
            out,
            &["xi_nonnegative", "period_integrals_nonnegative", "xi_scaled_drift"],
        );
        for mut c in part.checks {
            c.name = format!("{} (q = {q})", c.name);
            checks.push(c);
        }
    }
    Outcome { checks }
}

fn orbit_bounds() -> Outcome {
    let params = CounterexampleParams::new(4.0).unwrap();
    let check = match Witness::new(params, WITNESS_MODES, &spec())
        .and_then(|w| cx::orbit_lower_bound_check(&w, 0..=20, 8, 1e-9))
    {
        Ok(r) => Check::at_least(
            "orbit_lower_bound",
            r.worst_slack,
            -1e-9,
            format!(
                "{} points, n in [0, 20]; worst slack {:.6e} at n = {}",
                r.points, r.worst_slack, r.worst_n
            ),
        ),
        Err(e) => Check::errored("orbit_lower_bound", &e),
    };
    Outcome {
        checks: vec![check],
    }
}

fn endpoint_dichotomy() -> Outcome {
    let q = 4.0;
    let params = CounterexampleParams::new(q).unwrap();
    let eps = [1e-2, 1e-4, 1e-6, 1e-8];
    let rows = match Witness::new(params, WITNESS_MODES, &spec())
        .and_then(|w| cx::divergence_profile(&w, &eps, 1.0, 1e-12))
    {
        Ok(rows) => rows,
        Err(e) => {
            return Outcome {
                checks: vec![Check::errored("divergence_profile", &e)],
            }
        }
    };
    let n = rows.len();
    let change = (rows[n - 1].orbit_weak - rows[n - 2].orbit_weak).abs() / rows[n - 2].orbit_weak;
    let weak = Check::at_most(
        "orbit_weak_stabilizes",
        change,
        0.05,
        format!(
            "L^(2,inf) norms {}",
            rows.iter().map(|r| format!("{:.6}", r.orbit_weak)).collect::<Vec<_>>().join(", ")
        ),
    );

    let x: Vec<f64> = rows.iter().map(|r| (1.0 - r.eps.ln()).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.orbit_lq.powf(q)).collect();
    let slope = cx::fitted_slope(&x, &y);
    // Same regression with the orbit rescaled by its own weak norm.
    let y_scaled: Vec<f64> = rows
        .iter()
        .map(|r| (r.orbit_lq / rows[n - 1].orbit_weak).powf(q))
        .collect();
    let slope_scaled = cx::fitted_slope(&x, &y_scaled);
    let band = Check::new(
        "orbit_lq_slope_band",
        (0.3..=3.0).contains(&slope),
        Some((slope - 0.3).min(3.0 - slope)),
        format!(
            "slope of ||CT(.)x||^q vs log(1+log(1/eps)) is {slope:.4} (target [0.3, 3]); \
             after dividing the orbit by its weak norm {slope_scaled:.4}"
        ),
    );

    let increasing = rows.windows(2).all(|w| w[1].orbit_lq > w[0].orbit_lq);
    let growth = Check::new(
        "orbit_lq_increasing",
        increasing,
        None,
        format!(
            "L^(2,q) norms {}",
            rows.iter().map(|r| format!("{:.6}", r.orbit_lq)).collect::<Vec<_>>().join(", ")
        ),
    );
    Outcome {
        checks: vec![weak, band, growth],
    }
}

fn basis_properties() -> Outcome {
    let params = CounterexampleParams::new(4.0).unwrap();
    let spec = spec();
    let n_max = 1600;
    let (cache, xi) = match GramCache::new(n_max, &params, &spec).and_then(|cache| {
        let top = cx::BasisIndexMap::frequency(n_max).unsigned_abs() as usize;
        cx::xi_table(top, &params, &spec).map(|xi| (cache, xi))
    }) {
        Ok(pair) => pair,
        Err(e) => {
            return Outcome {
                checks: vec![Check::errored("gram_cache", &e)],
            }
        }
    };
    let rows = cx::bessel_rows(&cache, &xi, &[100, 400, 1600]);
    let x2 = cx::state_norm(&params).powi(2);

    let growth = rows[2].ratio() / rows[0].ratio();
    let bessel = Check::at_least(
        "bessel_ratio_growth",
        growth,
        2.0,
        format!("ratio grows by {growth:.4} from N = 100 to N = 1600"),
    );
    let worst = rows
        .iter()
        .map(|r| (r.quadratic_form - x2).abs() / x2)
        .fold(0.0, f64::max);
    let form = Check::at_most(
        "quadratic_form_near_state_norm",
        worst,
        0.05,
        format!(
            "xi*G xi / (2 pi^gamma/gamma) = {}",
            rows.iter()
                .map(|r| format!("{:.4} (N = {})", r.quadratic_form / x2, r.n))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );

    let h400 = cache.hilbertian_estimate(suites::HILBERTIAN_TRIALS, 400, 42);
    let h1600 = cache.hilbertian_estimate(suites::HILBERTIAN_TRIALS, 1600, 42);
    let spread = (h1600 / h400).max(h400 / h1600);
    let hilbertian = Check::at_most(
        "hilbertian_bounded",
        spread,
        2.0,
        format!("estimates {h400:.6} (N = 400), {h1600:.6} (N = 1600)"),
    );

    let closed = cx::gram_diagonal(&params);
    let mut diag_worst = (cache.by_difference()[0] - closed).abs() / closed;
    for k in [0usize, 1, 2, 99, 800, 1599] {
        match cx::gram_entry(k, k, &params, &spec) {
            Ok(g) => diag_worst = diag_worst.max((g.re - closed).abs() / closed),
            Err(e) => {
                return Outcome {
                    checks: vec![bessel, form, hilbertian, Check::errored("gram_diagonal", &e)],
                }
            }
        }
    }
    let diagonal = Check::at_most(
        "gram_diagonal_closed_form",
        diag_worst,
        1e-8,
        format!("max relative gap {diag_worst:.3e} to 2 pi^(2 beta + 1)/(2 beta + 1)"),
    );
    Outcome {
        checks: vec![bessel, form, hilbertian, diagonal],
    }
}

fn main() {
    let results = [
        criterion(1, "Lorentz closed forms", secs(30), lorentz_closed_forms),
        criterion(2, "rearrangement equimeasurability", secs(10), rearrangement),
        criterion(3, "Laplace identity", secs(60), laplace_identity),
        criterion(4, "orthonormal model Weiss and decay suprema", secs(60), orthonormal_model),
        criterion(5, "coefficient positivity and scaling", secs(300), coefficients),
        criterion(6, "orbit lower bound", secs(60), orbit_bounds),
        criterion(7, "endpoint dichotomy", secs(180), endpoint_dichotomy),
        criterion(8, "basis properties", secs(600), basis_properties),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
