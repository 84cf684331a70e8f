//! Verification suites: each runs one family of checks and returns its CSV
//! tables alongside the check records.
//!
//! Numerical failures inside a suite become failed checks rather than early
//! returns, so a report always lists everything that was attempted.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::counterexample::{self as cx, CounterexampleParams, GramCache, Lcg, Witness};
use crate::lorentz::{self, LorentzIndex, StepFunction};
use crate::quadrature::{self, QuadratureSpec};
use crate::report::{Check, Table};
use crate::semigroup::{self, CoefficientVector, DiagonalSystem, LambdaGrid};
use crate::{Error, Result};

/// Modes kept for the witness; enough for `t ≥ 10^{-12}` and `|λ| ≤ 10^8`.
pub const WITNESS_MODES: usize = 64;
/// Modes kept for the orthonormal square-root model.
pub const ORTHONORMAL_MODES: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub q: f64,
    pub tol: f64,
    pub tau: f64,
    pub eps_min: f64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            q: 4.0,
            tol: 1e-10,
            tau: 1.0,
            eps_min: 1e-8,
            seed: 42,
        }
    }
}

impl SuiteConfig {
    /// Quadrature at relative tolerance `tol`, clamped to the supported range.
    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        QuadratureSpec::default().with_relative_tolerance(self.tol.clamp(1e-14, 1e-2))
    }

    pub fn params(&self) -> Result<CounterexampleParams> {
        CounterexampleParams::new(self.q)
    }

    /// `10^{-2}τ, 10^{-4}τ, …` down to `eps_min`.
    pub fn eps_list(&self) -> Vec<f64> {
        (1..)
            .map(|k| self.tau * 10f64.powi(-2 * k))
            .take_while(|&e| e >= self.eps_min * (1.0 - 1e-12))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteOutput {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

impl SuiteOutput {
    pub fn append(&mut self, mut other: SuiteOutput) {
        self.tables.append(&mut other.tables);
        self.checks.append(&mut other.checks);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn guard<F: FnOnce(&mut SuiteOutput) -> Result<()>>(&mut self, name: &str, f: F) {
        if let Err(err) = f(self) {
            self.checks.push(Check::errored(name, &err));
        }
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Random step function for property sweeps: up to 40 cells, some ties.
pub fn random_step_function(rng: &mut Lcg) -> StepFunction {
    let cells = 1 + (rng.next_u64() % 40) as usize;
    let mut b = 10.0 * rng.next_unit();
    let mut breakpoints = vec![b];
    let mut values = Vec::with_capacity(cells);
    for _ in 0..cells {
        b += 0.01 + 3.0 * rng.next_unit();
        breakpoints.push(b);
        let v = if rng.next_unit() < 0.3 {
            (8.0 * rng.next_unit()).floor() / 4.0
        } else {
            5.0 * rng.next_unit()
        };
        values.push(v);
    }
    StepFunction::new(breakpoints, values).expect("generated breakpoints increase")
}

/// Strictly decreasing step function on `[0, b)` with dyadic cells, a fixed
/// point of the rearrangement.
pub fn random_decreasing_step_function(rng: &mut Lcg) -> StepFunction {
    let cells = 1 + (rng.next_u64() % 30) as usize;
    let mut breakpoints = vec![0.0];
    let mut values = Vec::with_capacity(cells);
    let mut v = 10.0 + rng.next_unit();
    for _ in 0..cells {
        let width = (1 + rng.next_u64() % 1024) as f64 / 256.0;
        breakpoints.push(breakpoints[breakpoints.len() - 1] + width);
        values.push(v);
        v *= 0.5 + 0.49 * rng.next_unit();
    }
    StepFunction::new(breakpoints, values).expect("generated breakpoints increase")
}

/// `‖e^{-at}‖_{L^{2,1}} = √(π/a)`, indicator closed forms and `L^{p,p} = L^p`.
pub fn lorentz_closed_forms(cfg: &SuiteConfig) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    out.guard("exp_l21_closed_form", |out| {
        let mut table = Table::new(
            "lorentz_closed_form.csv",
            &["a", "computed", "expected", "relative_error"],
        );
        let l21 = LorentzIndex::new(2.0, 1.0)?;
        let rows = [0.5, 1.0, 2.0, 10.0]
            .par_iter()
            .map(|&a| {
                let grid = lorentz::uniform_grid(0.0, 40.0 / a, 1_000_000);
                let f = StepFunction::sample_midpoint(&grid, |t| (-a * t).exp())?;
                Ok((a, lorentz::lorentz_norm(&f, l21), (PI / a).sqrt()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut worst: f64 = 0.0;
        for (a, computed, expected) in rows {
            let err = relative(computed, expected);
            worst = worst.max(err);
            table.push(vec![a.into(), computed.into(), expected.into(), err.into()]);
        }
        out.tables.push(table);
        out.checks.push(Check::at_most(
            "exp_l21_closed_form",
            worst,
            1e-5,
            format!("max relative error {worst:.3e} over a in {{0.5, 1, 2, 10}}, 10^6 steps"),
        ));
        Ok(())
    });
    out.guard("indicator_closed_form", |out| {
        let mut worst: f64 = 0.0;
        for &(p, q) in &[(1.25, 1.0), (2.0, 1.0), (2.0, 4.0), (1.5, 3.0), (4.0, 1.0), (1.1, 9.0)] {
            for &(start, len) in &[(0.0, 1.0), (0.25, 3.5), (2.0, 1e-3), (7.0, 1e4)] {
                let f = StepFunction::indicator(start, start + len)?;
                let got = lorentz::lorentz_norm(&f, LorentzIndex::new(p, q)?);
                let expected = (p / q).powf(1.0 / q) * len.powf(1.0 / p);
                worst = worst.max(relative(got, expected));
            }
        }
        for p in [1.25, 2.0, 5.0] {
            let f = StepFunction::indicator(1.0, 3.0)?;
            let got = lorentz::lorentz_norm(&f, LorentzIndex::weak(p)?);
            worst = worst.max(relative(got, 2f64.powf(1.0 / p)));
        }
        out.checks.push(Check::at_most(
            "indicator_closed_form",
            worst,
            1e-12,
            format!("max relative error {worst:.3e}"),
        ));
        Ok(())
    });
    out.guard("lpp_matches_lp", |out| {
        let mut rng = Lcg::new(cfg.seed);
        let mut worst: f64 = 0.0;
        let ps = [1.25, 1.5, 2.0, 3.0, 7.0];
        for i in 0..200 {
            let f = random_step_function(&mut rng);
            let p = ps[i % ps.len()];
            let got = lorentz::lorentz_norm(&f, LorentzIndex::new(p, p)?);
            worst = worst.max(relative(got, lorentz::lp_norm(&f, p)));
        }
        out.checks.push(Check::at_most(
            "lpp_matches_lp",
            worst,
            1e-12,
            format!("max relative gap {worst:.3e} over 200 random step functions"),
        ));
        Ok(())
    });
    out
}

/// Equimeasurability of the rearrangement and fixed points.
pub fn rearrangement_suite(cfg: &SuiteConfig) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    let mut rng = Lcg::new(cfg.seed ^ 0x5eed);
    let mut mismatches = 0usize;
    let mut levels = 0usize;
    for _ in 0..500 {
        let f = random_step_function(&mut rng);
        let star = lorentz::decreasing_rearrangement(&f);
        let mut alphas: Vec<f64> = f.values().to_vec();
        alphas.extend(f.values().iter().map(|v| v * 0.5 + 0.1));
        alphas.push(0.0);
        alphas.push(-1.0);
        for alpha in alphas {
            levels += 1;
            let a = lorentz::distribution_function(&f, alpha);
            let b = lorentz::distribution_function(&star, alpha);
            if a.to_bits() != b.to_bits() {
                mismatches += 1;
            }
        }
    }
    out.checks.push(Check::new(
        "equimeasurability",
        mismatches == 0,
        None,
        format!("{mismatches} bitwise mismatches of d_f* vs d_f at {levels} levels, 500 functions"),
    ));

    let mut moved = 0usize;
    for _ in 0..200 {
        let f = random_decreasing_step_function(&mut rng);
        if lorentz::decreasing_rearrangement(&f) != f {
            moved += 1;
        }
    }
    out.checks.push(Check::new(
        "decreasing_fixed_point",
        moved == 0,
        None,
        format!("{moved} of 200 decreasing inputs changed by rearrangement"),
    ));
    out
}

/// Finite-mode system number `j` of the Laplace suite.
fn laplace_system(j: usize, rng: &mut Lcg) -> Result<(DiagonalSystem, CoefficientVector)> {
    let modes = 1 + j % 4;
    let base = 0.5 + 0.1 * j as f64;
    let ratio = 1.5 + 0.1 * j as f64;
    let mu: Vec<f64> = (0..modes).map(|k| base * ratio.powi(k as i32)).collect();
    let c: Vec<f64> = (0..modes).map(|_| 0.1 + 0.9 * rng.next_unit()).collect();
    let xi: Vec<f64> = (0..modes).map(|_| 0.1 + 0.9 * rng.next_unit()).collect();
    Ok((DiagonalSystem::finite(&mu, &c)?, CoefficientVector::finite(xi)))
}

/// 50 points: 10 moduli in `[10^{-2}, 10^2]` times 5 arguments.
pub fn laplace_lambda_grid() -> Vec<Complex64> {
    let edge = FRAC_PI_2 - 0.01;
    let mut out = Vec::with_capacity(50);
    for i in 0..10 {
        let r = 10f64.powf(-2.0 + 4.0 * i as f64 / 9.0);
        for j in 0..5 {
            let arg = -edge + 2.0 * edge * j as f64 / 4.0;
            out.push(Complex64::from_polar(r, arg));
        }
    }
    out
}

/// Resolvent series against the Laplace transform of the orbit.
pub fn laplace_suite(cfg: &SuiteConfig) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    out.guard("laplace_identity", |out| {
        let spec = cfg.quadrature()?;
        let tol = cfg.tol.min(1e-12);
        let mut rng = Lcg::new(cfg.seed ^ 0x1a91ace);
        let systems = (0..20)
            .map(|j| laplace_system(j, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let lambdas = laplace_lambda_grid();
        let jobs: Vec<(usize, Complex64)> = (0..systems.len())
            .flat_map(|j| lambdas.iter().map(move |&l| (j, l)))
            .collect();
        let rows = jobs
            .par_iter()
            .map(|&(j, lambda)| {
                let (sys, xi) = &systems[j];
                let series = semigroup::resolvent_observation(sys, xi, lambda, tol)?.value;
                let cutoff = 30.0 / sys.mu(0);
                let orbit = |t: f64| {
                    (0..sys.n_active())
                        .map(|k| xi.values()[k] * sys.c(k) * (-sys.mu(k) * t).exp())
                        .sum::<f64>()
                };
                let quad = quadrature::laplace_quadrature(orbit, lambda, cutoff, &spec)?.value;
                Ok((j, lambda, series, quad))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Table::new(
            "laplace.csv",
            &[
                "system",
                "re_lambda",
                "im_lambda",
                "series_re",
                "series_im",
                "quadrature_re",
                "quadrature_im",
                "relative_error",
            ],
        );
        let mut worst: f64 = 0.0;
        for (j, lambda, series, quad) in rows {
            let err = (series - quad).norm() / series.norm();
            worst = worst.max(err);
            table.push(vec![
                j.into(),
                lambda.re.into(),
                lambda.im.into(),
                series.re.into(),
                series.im.into(),
                quad.re.into(),
                quad.im.into(),
                err.into(),
            ]);
        }
        out.tables.push(table);
        out.checks.push(Check::at_most(
            "laplace_identity",
            worst,
            1e-6,
            format!("max relative gap {worst:.3e} over 20 systems x 50 points"),
        ));
        Ok(())
    });
    out
}

fn weiss_table(name: &str, samples: &[semigroup::WeissSample]) -> Table {
    let mut table = Table::new(name, &["re_lambda", "im_lambda", "weiss_quotient"]);
    for s in samples {
        table.push(vec![s.lambda.re.into(), s.lambda.im.into(), s.quotient.into()]);
    }
    table
}

fn decay_table(name: &str, samples: &[semigroup::DecaySample]) -> Table {
    let mut table = Table::new(name, &["t", "decay_sample"]);
    for s in samples {
        table.push(vec![s.t.into(), s.value.into()]);
    }
    table
}

fn stability_check(name: &str, what: &str, coarse: f64, fine: f64) -> Check {
    let change = relative(coarse, fine);
    let pass = coarse.is_finite() && fine.is_finite() && change < 0.05;
    Check::new(
        name,
        pass,
        Some(0.05 - change),
        format!("{what}: {coarse:.6e} -> {fine:.6e} under refinement ({:.3}% change)", 100.0 * change),
    )
}

/// Weiss and decay suprema of the orthonormal model `μ_k = 2^k`, `c_k = 2^{k/2}`.
pub fn orthonormal_suite(cfg: &SuiteConfig) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    out.guard("orthonormal_weiss_sup_stable", |out| {
        let sys = DiagonalSystem::square_root_model(ORTHONORMAL_MODES)?;
        let grid = LambdaGrid::default();
        let coarse = semigroup::weiss_scan_orthonormal(&sys, &grid, cfg.tol)?;
        let fine = semigroup::weiss_scan_orthonormal(&sys, &grid.refined(), cfg.tol)?;
        let (a, b) = (semigroup::sup_quotient(&coarse), semigroup::sup_quotient(&fine));
        out.tables.push(weiss_table("weiss_scan_orthonormal.csv", &coarse));
        out.checks
            .push(stability_check("orthonormal_weiss_sup_stable", "sup Weiss norm", a, b));
        Ok(())
    });
    out.guard("orthonormal_decay_bounded", |out| {
        let sys = DiagonalSystem::square_root_model(ORTHONORMAL_MODES)?;
        let coarse_grid = lorentz::log_grid(1e-8, 1.0, 64);
        let fine_grid = lorentz::log_grid(1e-8, 1.0, 128);
        let coarse = semigroup::decay_profile_orthonormal(&sys, &coarse_grid, cfg.tol)?;
        let fine = semigroup::decay_profile_orthonormal(&sys, &fine_grid, cfg.tol)?;
        let (a, b) = (semigroup::sup_decay(&coarse), semigroup::sup_decay(&fine));
        out.tables.push(decay_table("decay_orthonormal.csv", &coarse));
        out.checks.push(stability_check(
            "orthonormal_decay_bounded",
            "sup t^(1/2)|CT(t)| on [1e-8, 1]",
            a,
            b,
        ));
        Ok(())
    });
    out
}

/// Weiss quotients of the witness over the λ grid.
pub fn weiss_scan_suite(cfg: &SuiteConfig) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    out.guard("witness_weiss_sup_stable", |out| {
        let spec = cfg.quadrature()?;
        let w = Witness::new(cfg.params()?, WITNESS_MODES, &spec)?;
        let grid = LambdaGrid::default();
        let coarse = semigroup::weiss_scan(w.system(), w.xi(), w.x_norm(), &grid, cfg.tol)?;
        let fine =
            semigroup::weiss_scan(w.system(), w.xi(), w.x_norm(), &grid.refined(), cfg.tol)?;
        let (a, b) = (semigroup::sup_quotient(&coarse), semigroup::sup_quotient(&fine));
        out.tables.push(weiss_table("weiss_scan.csv", &coarse));
        out.checks
            .push(stability_check("witness_weiss_sup_stable", "sup Weiss quotient", a, b));
        Ok(())
    });
    out
}

/// Normalized decay samples `t^{1/2}|CT(t)x|/‖x‖` of the witness on `[eps_min, tau]`.
pub fn orbit_suite(cfg: &SuiteConfig) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    out.guard("witness_decay_sup_stable", |out| {
        let spec = cfg.quadrature()?;
        let w = Witness::new(cfg.params()?, WITNESS_MODES, &spec)?;
        let coarse_grid = lorentz::log_grid(cfg.eps_min, cfg.tau, 64);
        let fine_grid = lorentz::log_grid(cfg.eps_min, cfg.tau, 128);
        let coarse =
            semigroup::decay_profile(w.system(), w.xi(), w.x_norm(), &coarse_grid, cfg.tol)?;
        let fine = semigroup::decay_profile(w.system(), w.xi(), w.x_norm(), &fine_grid, cfg.tol)?;
        let (a, b) = (semigroup::sup_decay(&coarse), semigroup::sup_decay(&fine));
        out.tables.push(decay_table("decay.csv", &coarse));
        out.checks.push(stability_check(
            "witness_decay_sup_stable",
            "sup t^(1/2)|CT(t)x|/|x|",
            a,
            b,
        ));
        Ok(())
    });
    out
}

/// Orthonormal model plus witness scans.
pub fn theorem1_suite(cfg: &SuiteConfig) -> SuiteOutput {
    let mut out = orthonormal_suite(cfg);
    out.append(weiss_scan_suite(cfg));
    out.append(orbit_suite(cfg));
    out
}

/// Largest index in the coefficient table and the period table.
pub const XI_TABLE_MAX: usize = 10_000;
pub const PERIOD_TABLE_LEN: usize = 1_001;

/// Positivity, asymptotics and the period decomposition of `ξ_n`.
pub fn coefficient_suite(cfg: &SuiteConfig) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    let q = cfg.q;
    out.guard("gamma_identity", |out| {
        let p = cfg.params()?;
        let gap = (p.gamma() - 1.0 / q).abs();
        let beta_in_range = p.beta() > 0.25 && p.beta() < 0.5;
        out.checks.push(Check::new(
            "gamma_identity",
            gap <= 4.0 * f64::EPSILON * p.gamma() && beta_in_range,
            Some(4.0 * f64::EPSILON * p.gamma() - gap),
            format!("|gamma - 1/q| = {gap:.3e}, beta = {}", p.beta()),
        ));
        Ok(())
    });
    out.guard("xi_coefficients", |out| {
        let p = cfg.params()?;
        let spec = cfg.quadrature()?;
        let table = cx::xi_table(XI_TABLE_MAX, &p, &spec)?;
        let g = p.gamma();

        let exact0 = PI.powf(g - 1.0) / g;
        let err0 = relative(table[0].value, exact0);
        out.checks.push(Check::at_most(
            "xi_zero_closed_form",
            err0,
            1e-10,
            format!("xi_0 = {:.17e} vs pi^(gamma-1)/gamma", table[0].value),
        ));

        let (argmin, min) = table
            .iter()
            .enumerate()
            .map(|(n, e)| (n, e.value))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        out.checks.push(Check::at_least(
            "xi_nonnegative",
            min,
            0.0,
            format!("min xi_n over n <= {XI_TABLE_MAX} is {min:.6e} at n = {argmin}"),
        ));

        let scaled = |n: usize| table[n].value * (n as f64).powf(g);
        let drift = relative(scaled(2000), scaled(8000));
        out.checks.push(Check::at_most(
            "xi_scaled_drift",
            drift,
            0.02,
            format!(
                "xi_n n^gamma: {:.10} at 2000, {:.10} at 8000",
                scaled(2000),
                scaled(8000)
            ),
        ));

        let limit = cx::xi_asymptotic(1, &p)?;
        let gap = relative(scaled(XI_TABLE_MAX), limit);
        out.checks.push(Check::at_most(
            "xi_asymptotic_constant",
            gap,
            0.02,
            format!(
                "xi_n n^gamma = {:.10} at n = {XI_TABLE_MAX}; cos(gamma pi/2) Gamma(gamma)/pi = {limit:.10}",
                scaled(XI_TABLE_MAX)
            ),
        ));

        let mut csv = Table::new("xi.csv", &["n", "xi", "xi_scaled", "xi_asymptotic"]);
        for (n, e) in table.iter().enumerate().skip(1) {
            csv.push(vec![
                n.into(),
                e.value.into(),
                scaled(n).into(),
                cx::xi_asymptotic(n as u64, &p)?.into(),
            ]);
        }
        out.tables.push(csv);
        Ok(())
    });
    out.guard("period_integrals", |out| {
        let p = cfg.params()?;
        let spec = cfg.quadrature()?;
        let periods = cx::xi_period_decomposition(PERIOD_TABLE_LEN, &p, &spec)?;
        let min = periods.iter().copied().fold(f64::INFINITY, f64::min);
        out.checks.push(Check::at_least(
            "period_integrals_nonnegative",
            min,
            0.0,
            format!("min I_l over l < {PERIOD_TABLE_LEN} is {min:.6e}"),
        ));
        let rises = periods.windows(2).filter(|w| w[1] >= w[0]).count();
        out.checks.push(Check::new(
            "period_integrals_decreasing",
            rises == 0,
            None,
            format!("{rises} non-decreasing steps"),
        ));
        let mut csv = Table::new("periods.csv", &["l", "period_integral"]);
        for (l, v) in periods.iter().enumerate() {
            csv.push(vec![l.into(), (*v).into()]);
        }
        out.tables.push(csv);

        let g = p.gamma();
        let rho = |n: usize| -> Result<f64> {
            let xi = cx::xi_coefficient(2 * n as u64, &p, &spec)?.value;
            Ok(xi * (2.0 * n as f64).powf(g) / periods[..n].iter().sum::<f64>())
        };
        let fitted = rho(10)?;
        let worst = [50, 200]
            .iter()
            .map(|&n| rho(n).map(|r| relative(r, fitted)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        out.checks.push(Check::at_most(
            "period_prefactor_constant",
            worst,
            1e-8,
            format!(
                "rho = xi_2n (2n)^gamma / sum I_l fitted at n = 10: {fitted:.15}, 1/pi = {:.15}; max drift at n in {{50, 200}} {worst:.3e}",
                1.0 / PI
            ),
        ));
        Ok(())
    });
    out
}

/// Coefficient suite, norm consistency, orbit lower bound and the divergence profile.
pub fn counterexample_suite(cfg: &SuiteConfig) -> SuiteOutput {
    let mut out = coefficient_suite(cfg);
    out.guard("state_norm_quadrature", |out| {
        let p = cfg.params()?;
        let spec = cfg.quadrature()?.with_relative_tolerance(1e-12)?;
        let quad = 2.0 * quadrature::singular_oscillatory_integral(p.gamma(), 0, &spec)?.value;
        let closed = cx::state_norm(&p).powi(2);
        out.checks.push(Check::at_most(
            "state_norm_quadrature",
            relative(quad, closed),
            1e-10,
            format!("2 int_0^pi s^(gamma-1) ds = {quad:.15} vs 2 pi^gamma/gamma = {closed:.15}"),
        ));
        Ok(())
    });
    out.guard("orbit_lower_bound", |out| {
        let spec = cfg.quadrature()?;
        let w = Witness::new(cfg.params()?, WITNESS_MODES, &spec)?;
        let check = match cx::orbit_lower_bound_check(&w, 0..=20, 8, 1e-9) {
            Ok(r) => Check::new(
                "orbit_lower_bound",
                true,
                Some(r.worst_slack),
                format!(
                    "{} points on n in [0, 20]; worst slack at n = {}, t = {:.6e}",
                    r.points, r.worst_n, r.worst_t
                ),
            ),
            Err(Error::BoundViolated { n, t, slack }) => Check::new(
                "orbit_lower_bound",
                false,
                Some(slack),
                format!("violated at n = {n}, t = {t:.6e}"),
            ),
            Err(e) => return Err(e),
        };
        out.checks.push(check);
        Ok(())
    });
    out.guard("divergence_profile", |out| {
        let spec = cfg.quadrature()?;
        let p = cfg.params()?;
        let w = Witness::new(p, WITNESS_MODES, &spec)?;
        let eps = cfg.eps_list();
        let rows = cx::divergence_profile(&w, &eps, cfg.tau, cfg.tol)?;
        let mut csv = Table::new(
            "divergence.csv",
            &["eps", "envelope_lq", "envelope_lq_closed_form", "orbit_lq", "orbit_weak"],
        );
        for r in &rows {
            csv.push(vec![
                r.eps.into(),
                r.envelope_lq.into(),
                r.envelope_lq_closed_form.into(),
                r.orbit_lq.into(),
                r.orbit_weak.into(),
            ]);
        }
        out.tables.push(csv);
        out.checks.extend(divergence_checks(&rows, &p, cfg.tau));
        Ok(())
    });
    out
}

/// Checks on a divergence table: monotone columns, stabilizing weak norm,
/// `L^{2,q}` growth that does not level off, and the envelope closed form.
pub fn divergence_checks(
    rows: &[cx::DivergenceRow],
    params: &CounterexampleParams,
    tau: f64,
) -> Vec<Check> {
    let mut checks = Vec::new();
    if rows.len() < 3 {
        checks.push(Check::new(
            "divergence_profile",
            false,
            None,
            format!("need at least 3 eps values, got {}", rows.len()),
        ));
        return checks;
    }
    let q = params.q();
    let columns: [(&str, fn(&cx::DivergenceRow) -> f64); 3] = [
        ("envelope_lq", |r| r.envelope_lq),
        ("orbit_lq", |r| r.orbit_lq),
        ("orbit_weak", |r| r.orbit_weak),
    ];
    let mut decreases = Vec::new();
    for (name, col) in columns {
        if rows.windows(2).any(|w| col(&w[1]) < col(&w[0])) {
            decreases.push(name);
        }
    }
    checks.push(Check::new(
        "divergence_columns_monotone",
        decreases.is_empty(),
        None,
        if decreases.is_empty() {
            "every norm column non-decreasing as eps shrinks".into()
        } else {
            format!("decreasing columns: {}", decreases.join(", "))
        },
    ));

    let n = rows.len();
    let change = relative(rows[n - 1].orbit_weak, rows[n - 2].orbit_weak);
    checks.push(Check::at_most(
        "orbit_weak_stabilizes",
        change,
        0.05,
        format!(
            "L^(2,inf) norm {:.10} -> {:.10} over the last two eps",
            rows[n - 2].orbit_weak,
            rows[n - 1].orbit_weak
        ),
    ));

    // (L^{2,q} norm)^q against log(1 + log(1/ε)); the envelope model is affine.
    let x: Vec<f64> = rows.iter().map(|r| (1.0 - r.eps.ln()).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.orbit_lq.powf(q)).collect();
    let slopes: Vec<f64> = x
        .windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (ys[1] - ys[0]) / (xs[1] - xs[0]))
        .collect();
    let min = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let max = slopes.iter().copied().fold(0.0, f64::max);
    let pass = min > 0.0 && min >= 0.5 * max;
    checks.push(Check::new(
        "orbit_lq_unbounded_growth",
        pass,
        Some(min - 0.5 * max),
        format!(
            "segment slopes of ||CT(.)x||^q vs log(1+log(1/eps)): {}; fitted slope {:.4}",
            slopes.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>().join(", "),
            cx::fitted_slope(&x, &y)
        ),
    ));

    let worst = rows
        .iter()
        .map(|r| relative(r.envelope_lq, cx::envelope_lq_closed_form(r.eps, tau, params)))
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "envelope_closed_form",
        worst,
        0.05,
        format!("sampled envelope vs closed form, max relative gap {worst:.3e}"),
    ));
    checks
}

/// Basis sizes for the Bessel table.
pub const BESSEL_SIZES: [usize; 5] = [1, 25, 100, 400, 1600];
/// Basis sizes and trial count for the Hilbertian estimate.
pub const HILBERTIAN_SIZES: [usize; 3] = [100, 400, 1600];
pub const HILBERTIAN_TRIALS: usize = 16;

/// Gram diagonal, the non-Besselian ratio and the Hilbertian estimate.
pub fn bessel_suite(cfg: &SuiteConfig) -> SuiteOutput {
    let mut out = SuiteOutput::default();
    out.guard("bessel", |out| {
        let p = cfg.params()?;
        let spec = cfg.quadrature()?;
        let n_max = BESSEL_SIZES[BESSEL_SIZES.len() - 1].max(HILBERTIAN_SIZES[2]);
        let cache = GramCache::new(n_max, &p, &spec)?;

        let closed = cx::gram_diagonal(&p);
        let mut worst = relative(cache.by_difference()[0], closed);
        for k in [0usize, 1, 17, 400] {
            let direct = cx::gram_entry(k, k, &p, &spec)?.re;
            worst = worst.max(relative(direct, closed));
        }
        out.checks.push(Check::at_most(
            "gram_diagonal_closed_form",
            worst,
            1e-8,
            format!("<e_k, e_k> vs 2 pi^(2 beta + 1)/(2 beta + 1) = {closed:.15}"),
        ));

        let top = cx::BasisIndexMap::frequency(n_max).unsigned_abs() as usize;
        let xi = cx::xi_table(top, &p, &spec)?;
        let rows = cx::bessel_rows(&cache, &xi, &BESSEL_SIZES);
        let x2 = cx::state_norm(&p).powi(2);
        let mut csv = Table::new(
            "bessel.csv",
            &["n", "coefficient_sum", "quadratic_form", "ratio", "quadratic_form_over_state_norm_sq"],
        );
        for r in &rows {
            csv.push(vec![
                r.n.into(),
                r.coefficient_sum.into(),
                r.quadratic_form.into(),
                r.ratio().into(),
                (r.quadratic_form / x2).into(),
            ]);
        }
        out.tables.push(csv);

        let at = |n: usize| rows.iter().find(|r| r.n == n).expect("size in table");
        let growth = at(1600).ratio() / at(100).ratio();
        out.checks.push(Check::at_least(
            "bessel_ratio_growth",
            growth,
            2.0,
            format!("sum xi^2 / xi*G xi grows by {growth:.4} from N = 100 to N = 1600"),
        ));
        let rises = rows.windows(2).filter(|w| w[1].quadratic_form >= w[0].quadratic_form).count();
        out.checks.push(Check::new(
            "quadratic_form_decreasing",
            rises == 0,
            None,
            format!(
                "xi*G xi / |x|^2 = {}",
                rows.iter()
                    .map(|r| format!("{:.4} (N = {})", r.quadratic_form / x2, r.n))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        ));

        let mut csv = Table::new("hilbertian.csv", &["n", "estimate"]);
        let mut estimates = Vec::new();
        for &n in &HILBERTIAN_SIZES {
            let e = cache.hilbertian_estimate(HILBERTIAN_TRIALS, n, cfg.seed);
            estimates.push(e);
            csv.push(vec![n.into(), e.into()]);
        }
        out.tables.push(csv);
        let ratio = estimates[2] / estimates[1];
        out.checks.push(Check::new(
            "hilbertian_bounded",
            (0.5..=2.0).contains(&ratio),
            Some(2.0 - ratio.max(1.0 / ratio)),
            format!(
                "estimate {:.6} at N = 400, {:.6} at N = 1600 ({HILBERTIAN_TRIALS} trials, seed {})",
                estimates[1], estimates[2], cfg.seed
            ),
        ));
        Ok(())
    });
    out
}

/// Every suite, in reporting order.
pub fn full_report(cfg: &SuiteConfig) -> SuiteOutput {
    let mut out = lorentz_closed_forms(cfg);
    out.append(rearrangement_suite(cfg));
    out.append(laplace_suite(cfg));
    out.append(theorem1_suite(cfg));
    out.append(counterexample_suite(cfg));
    out.append(bessel_suite(cfg));
    out
}
