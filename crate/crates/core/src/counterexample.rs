//! The conditional-basis witness: an exponentially stable analytic diagonal
//! semigroup on `L²(-π, π)` whose observed orbit lies in `L^{2,∞}` but in no
//! `L^{2,q}` with `q < ∞`.
//!
//! Basis: `e_k(s) = |s|^β e^{iν_k s}` with frequencies `ν_k` from
//! [`BasisIndexMap`]; system: `T(t)e_k = e^{-4^k t} e_k`, `C e_k = 2^k`;
//! state: `x(s) = |s|^{-β}`. Its coefficients are
//!
//! ```text
//! ξ_ν = (1/2π) ∫_{-π}^{π} |s|^{-2β} e^{-iνs} ds = (1/π) ∫_0^π s^{γ-1} cos(νs) ds,
//! ```
//!
//! with `β = 1/(2q')` and `γ = 1 - 2β = 1/q`.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::lorentz::{self, LorentzIndex, StepFunction};
use crate::quadrature::{self, Estimate, QuadratureSpec};
use crate::semigroup::{self, CoefficientVector, DiagonalSystem};
use crate::{Error, Result};

/// `(q, q', β, γ)` with `q ∈ (2, ∞)`, `q' = q/(q-1)`, `β = 1/(2q')`,
/// `γ = 1 - 2β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleParams {
    q: f64,
    q_conj: f64,
    beta: f64,
    gamma: f64,
}

impl CounterexampleParams {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 2.0 && q.is_finite()) {
            return Err(Error::Domain {
                name: "q",
                value: q,
                domain: "(2, ∞)",
            });
        }
        Ok(Self::derive(q))
    }

    // `1 - 2β` cancels for large q; γ = 1/q and β = (1 - γ)/2 are the same
    // identities evaluated without it.
    fn derive(q: f64) -> Self {
        let gamma = 1.0 / q;
        Self {
            q,
            q_conj: q / (q - 1.0),
            beta: (1.0 - gamma) / 2.0,
            gamma,
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn q_conj(&self) -> f64 {
        self.q_conj
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Exponent of the Gram kernel `s^{2β}` in `singular_oscillatory_integral`.
    fn gram_exponent(&self) -> f64 {
        2.0 * self.beta + 1.0
    }
}

/// Enumeration `0, -1, +1, -2, +2, …` of the integer frequencies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BasisIndexMap;

impl BasisIndexMap {
    pub fn frequency(k: usize) -> i64 {
        let half = k.div_ceil(2) as i64;
        if k % 2 == 1 {
            -half
        } else {
            half
        }
    }

    pub fn index_of(frequency: i64) -> usize {
        if frequency < 0 {
            (2 * (-frequency) - 1) as usize
        } else {
            (2 * frequency) as usize
        }
    }
}

/// `ξ_n = (1/π) ∫_0^π s^{γ-1} cos(ns) ds`, shared by `±n`.
pub fn xi_coefficient(
    n: u64,
    params: &CounterexampleParams,
    spec: &QuadratureSpec,
) -> Result<Estimate<f64>> {
    let est = quadrature::singular_oscillatory_integral(params.gamma, n, spec)?;
    Ok(Estimate {
        value: est.value / PI,
        error: est.error / PI,
        panels: est.panels,
    })
}

/// `ξ_0 … ξ_{n_max}` in one sweep.
///
/// With `u = ns`, `ξ_n = n^{-γ} F(nπ) / π` where `F(X) = ∫_0^X u^{γ-1} cos u du`,
/// so all coefficients follow from cumulative half-period integrals.
pub fn xi_table(
    n_max: usize,
    params: &CounterexampleParams,
    spec: &QuadratureSpec,
) -> Result<Vec<Estimate<f64>>> {
    let g = params.gamma;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(xi_coefficient(0, params, spec)?);
    if n_max == 0 {
        return Ok(out);
    }
    let first = quadrature::singular_oscillatory_integral(g, 1, spec)?;
    let rest: Vec<Estimate<f64>> = (2..=n_max)
        .into_par_iter()
        .map(|m| quadrature::power_cosine_integral(g, (m - 1) as f64 * PI, m as f64 * PI, spec))
        .collect::<Result<_>>()?;
    let mut cumulative = first.value;
    let mut error = first.error;
    let mut panels = first.panels;
    for n in 1..=n_max {
        if n >= 2 {
            let h = &rest[n - 2];
            cumulative += h.value;
            error += h.error;
            panels += h.panels;
        }
        let scale = (n as f64).powf(-g) / PI;
        out.push(Estimate {
            value: scale * cumulative,
            error: scale * error,
            panels,
        });
    }
    Ok(out)
}

/// Leading term `(1/π) n^{-γ} cos(γπ/2) Γ(γ)`.
pub fn xi_asymptotic(n: u64, params: &CounterexampleParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("xi_asymptotic needs n >= 1".into()));
    }
    let g = params.gamma;
    Ok((n as f64).powf(-g) * (g * PI / 2.0).cos() * quadrature::gamma_function(g)? / PI)
}

/// Per-period integrals `I_l = ∫_0^{2π} (2πl + x)^{γ-1} cos x dx`, `l < n`.
///
/// Each `I_l` is non-negative because `(2πl + x)^{γ-1}` is positive,
/// decreasing and convex.
pub fn xi_period_decomposition(
    n: usize,
    params: &CounterexampleParams,
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "period decomposition needs n >= 1".into(),
        ));
    }
    let g = params.gamma;
    (0..n)
        .into_par_iter()
        .map(|l| {
            if l == 0 {
                // u = 2s maps [0, 2π] onto [0, π].
                let est = quadrature::singular_oscillatory_integral(g, 2, spec)?;
                Ok(2f64.powf(g) * est.value)
            } else {
                let a = 2.0 * PI * l as f64;
                Ok(quadrature::power_cosine_integral(g, a, a + 2.0 * PI, spec)?.value)
            }
        })
        .collect()
}

/// Reassembles `ξ_{2n}` from `n` period integrals: `ξ_{2n} = (2n)^{-γ} Σ I_l / π`.
pub fn xi_from_periods(periods: &[f64], params: &CounterexampleParams) -> f64 {
    let two_n = 2.0 * periods.len() as f64;
    two_n.powf(-params.gamma) * periods.iter().sum::<f64>() / PI
}

/// `f(t) = (1 + |log t|)^{-1/q} t^{-1/2}`.
pub fn envelope(t: f64, params: &CounterexampleParams) -> f64 {
    (1.0 + t.ln().abs()).powf(-1.0 / params.q) / t.sqrt()
}

/// `(∫_ε^τ (t^{1/2} f(t))^q dt/t)^{1/q} = log((1+log(1/ε)) / (1+log(1/τ)))^{1/q}`.
pub fn envelope_lq_closed_form(eps: f64, tau: f64, params: &CounterexampleParams) -> f64 {
    ((1.0 - eps.ln()) / (1.0 - tau.ln())).ln().powf(1.0 / params.q)
}

/// `‖x‖_{L²(-π,π)} = (2π^γ/γ)^{1/2}` for `x(s) = |s|^{-β}`.
pub fn state_norm(params: &CounterexampleParams) -> f64 {
    let g = params.gamma;
    (2.0 * PI.powf(g) / g).sqrt()
}

/// The witness system and state, truncated to `n_active` modes.
#[derive(Debug, Clone)]
pub struct Witness {
    params: CounterexampleParams,
    system: DiagonalSystem,
    xi: CoefficientVector,
    x_norm: f64,
}

impl Witness {
    pub fn new(params: CounterexampleParams, n_active: usize, spec: &QuadratureSpec) -> Result<Self> {
        let top = BasisIndexMap::frequency(n_active).unsigned_abs() as usize;
        let table = xi_table(top + 1, &params, spec)?;
        let values: Vec<f64> = (0..n_active)
            .map(|k| table[BasisIndexMap::frequency(k).unsigned_abs() as usize].value)
            .collect();
        // |ξ_n| <= ξ_0 since |∫ s^{γ-1} cos(ns)| <= ∫ s^{γ-1}.
        let xi = CoefficientVector::with_tail_bound(values, table[0].value)?;
        Ok(Self {
            params,
            system: DiagonalSystem::geometric(n_active)?,
            xi,
            x_norm: state_norm(&params),
        })
    }

    pub fn params(&self) -> &CounterexampleParams {
        &self.params
    }

    pub fn system(&self) -> &DiagonalSystem {
        &self.system
    }

    pub fn xi(&self) -> &CoefficientVector {
        &self.xi
    }

    pub fn x_norm(&self) -> f64 {
        self.x_norm
    }

    pub fn orbit(&self, t: f64, tol: f64) -> Result<f64> {
        Ok(semigroup::orbit_observation(&self.system, &self.xi, t, tol)?.value)
    }

    /// `|CT(·)x|` sampled at left endpoints of a log grid on `[eps, tau]`.
    pub fn sampled_orbit(
        &self,
        eps: f64,
        tau: f64,
        points_per_decade: usize,
        tol: f64,
    ) -> Result<StepFunction> {
        let grid = lorentz::log_grid(eps, tau, points_per_decade);
        let values = grid[..grid.len() - 1]
            .par_iter()
            .map(|&t| self.orbit(t, tol).map(f64::abs))
            .collect::<Result<Vec<_>>>()?;
        StepFunction::new(grid, values)
    }
}

/// Samples per decade used for orbit and envelope norms.
pub const POINTS_PER_DECADE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceRow {
    pub eps: f64,
    pub envelope_lq: f64,
    pub envelope_lq_closed_form: f64,
    pub orbit_lq: f64,
    pub orbit_weak: f64,
}

/// Norms over `(ε, τ)` of the envelope and the observed orbit.
pub fn divergence_profile(
    witness: &Witness,
    eps_list: &[f64],
    tau: f64,
    tol: f64,
) -> Result<Vec<DivergenceRow>> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
            domain: "(0, 1]",
        });
    }
    if eps_list.iter().any(|&e| !(e > 0.0 && e < tau)) {
        return Err(Error::InvalidInput("every eps must lie in (0, tau)".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("eps_list must be decreasing".into()));
    }
    let params = witness.params;
    let lq = LorentzIndex::new(2.0, params.q)?;
    let weak = LorentzIndex::weak(2.0)?;
    eps_list
        .iter()
        .map(|&eps| {
            let orbit = witness.sampled_orbit(eps, tau, POINTS_PER_DECADE, tol)?;
            let grid = orbit.breakpoints();
            let env = StepFunction::sample_left(grid, |t| envelope(t, &params))?;
            Ok(DivergenceRow {
                eps,
                envelope_lq: lorentz::lorentz_norm(&env, lq),
                envelope_lq_closed_form: envelope_lq_closed_form(eps, tau, &params),
                orbit_lq: lorentz::lorentz_norm(&orbit, lq),
                orbit_weak: lorentz::lorentz_norm(&orbit, weak),
            })
        })
        .collect()
}

/// Least-squares slope of `y` against `x`.
pub fn fitted_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundReport {
    pub points: usize,
    pub worst_slack: f64,
    pub worst_n: usize,
    pub worst_t: f64,
}

/// Checks `CT(t)x ≥ ξ_n c_n e^{-1}` on `t ∈ [4^{-n-1}, 4^{-n})`.
///
/// All coefficients are non-negative, so dropping every term but the `n`-th
/// and using `μ_n t < 1` gives the bound; a violation beyond `tol` is a bug.
pub fn orbit_lower_bound_check(
    witness: &Witness,
    n_range: RangeInclusive<usize>,
    samples_per_interval: usize,
    tol: f64,
) -> Result<LowerBoundReport> {
    if samples_per_interval == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let sys = &witness.system;
    let xi = witness.xi.values();
    if let Some(k) = xi.iter().position(|&v| v < 0.0) {
        return Err(Error::InvalidInput(format!(
            "coefficient {k} is negative; the lower bound needs ξ ≥ 0"
        )));
    }
    let mut report = LowerBoundReport {
        points: 0,
        worst_slack: f64::INFINITY,
        worst_n: *n_range.start(),
        worst_t: 0.0,
    };
    for n in n_range {
        let coefficient = *xi.get(n).ok_or(Error::TruncationOverflow {
            cap: xi.len(),
            tail: f64::INFINITY,
            tol,
        })?;
        let bound = coefficient * sys.c(n) * (-1.0f64).exp();
        let left = 4f64.powi(-(n as i32) - 1);
        for j in 0..samples_per_interval {
            let t = left * 4f64.powf(j as f64 / samples_per_interval as f64);
            let y = semigroup::orbit_observation(sys, &witness.xi, t, tol)?;
            let slack = y.value - bound;
            report.points += 1;
            if slack < report.worst_slack {
                report.worst_slack = slack;
                report.worst_n = n;
                report.worst_t = t;
            }
            if slack < -tol {
                return Err(Error::BoundViolated { n, t, slack });
            }
        }
    }
    Ok(report)
}

/// `⟨e_j, e_k⟩ = 2 ∫_0^π s^{2β} cos((ν_j - ν_k)s) ds`; the imaginary part
/// vanishes because the weight is even.
pub fn gram_entry(
    j: usize,
    k: usize,
    params: &CounterexampleParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let d = (BasisIndexMap::frequency(j) - BasisIndexMap::frequency(k)).unsigned_abs();
    let est = quadrature::singular_oscillatory_integral(params.gram_exponent(), d, spec)?;
    Ok(Complex64::new(2.0 * est.value, 0.0))
}

/// Closed form of every diagonal Gram entry, `2π^{2β+1}/(2β+1)`.
pub fn gram_diagonal(params: &CounterexampleParams) -> f64 {
    let a = params.gram_exponent();
    2.0 * PI.powf(a) / a
}

/// Gram entries cached by frequency difference; entries depend only on
/// `|ν_j - ν_k|`.
#[derive(Debug, Clone)]
pub struct GramCache {
    by_difference: Vec<f64>,
}

impl GramCache {
    /// Covers basis indices `0..n`.
    pub fn new(n: usize, params: &CounterexampleParams, spec: &QuadratureSpec) -> Result<Self> {
        let max_diff = if n <= 1 {
            0
        } else {
            (BasisIndexMap::frequency(n - 1) - BasisIndexMap::frequency(n - 2)).unsigned_abs()
        };
        let exponent = params.gram_exponent();
        let by_difference = (0..=max_diff)
            .into_par_iter()
            .map(|d| {
                quadrature::singular_oscillatory_integral(exponent, d, spec)
                    .map(|est| 2.0 * est.value)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { by_difference })
    }

    pub fn by_difference(&self) -> &[f64] {
        &self.by_difference
    }

    pub fn entry(&self, j: usize, k: usize) -> f64 {
        let d = (BasisIndexMap::frequency(j) - BasisIndexMap::frequency(k)).unsigned_abs();
        self.by_difference[d as usize]
    }

    /// `α* G α` for real coefficients on basis indices `0..α.len()`.
    pub fn quadratic_form(&self, alpha: &[f64]) -> f64 {
        let freq: Vec<i64> = (0..alpha.len()).map(BasisIndexMap::frequency).collect();
        alpha
            .par_iter()
            .zip(&freq)
            .map(|(&a, &nu)| {
                let row: f64 = alpha
                    .iter()
                    .zip(&freq)
                    .map(|(&b, &mu)| b * self.by_difference[(nu - mu).unsigned_abs() as usize])
                    .sum();
                a * row
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum()
    }

    /// Max over random `α` of `(α*Gα)^{1/2} / ‖α‖_2`, a lower bound for `c_H`.
    pub fn hilbertian_estimate(&self, trials: usize, n: usize, seed: u64) -> f64 {
        let mut rng = Lcg::new(seed);
        (0..trials)
            .map(|_| {
                let alpha: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
                let norm2: f64 = alpha.iter().map(|a| a * a).sum();
                (self.quadratic_form(&alpha) / norm2).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselRow {
    pub n: usize,
    pub coefficient_sum: f64,
    pub quadratic_form: f64,
}

impl BesselRow {
    pub fn ratio(&self) -> f64 {
        self.coefficient_sum / self.quadratic_form
    }
}

/// `(N, Σ_{k<N} ξ_k², ‖Σ_{k<N} ξ_k e_k‖²)` for each `N`.
///
/// The first column diverges like `N^{1-2/q}` while the second stays bounded,
/// so no constant `c_B` can satisfy `Σ|ξ_k|² ≤ c_B ‖Σ ξ_k e_k‖`.
pub fn bessel_failure_witness(
    params: &CounterexampleParams,
    n_list: &[usize],
    spec: &QuadratureSpec,
) -> Result<Vec<BesselRow>> {
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let cache = GramCache::new(n_max, params, spec)?;
    let top = BasisIndexMap::frequency(n_max).unsigned_abs() as usize;
    let table = xi_table(top, params, spec)?;
    Ok(bessel_rows(&cache, &table, n_list))
}

pub fn bessel_rows(cache: &GramCache, table: &[Estimate<f64>], n_list: &[usize]) -> Vec<BesselRow> {
    n_list
        .iter()
        .map(|&n| {
            let xi: Vec<f64> = (0..n)
                .map(|k| table[BasisIndexMap::frequency(k).unsigned_abs() as usize].value)
                .collect();
            BesselRow {
                n,
                coefficient_sum: xi.iter().map(|v| v * v).sum(),
                quadratic_form: cache.quadratic_form(&xi),
            }
        })
        .collect()
}

pub fn hilbertian_constant_estimate(
    params: &CounterexampleParams,
    trials: usize,
    n: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if trials == 0 || n == 0 {
        return Err(Error::InvalidInput("trials and n must be positive".into()));
    }
    Ok(GramCache::new(n, params, spec)?.hilbertian_estimate(trials, n, seed))
}

/// 64-bit linear congruential generator,
/// `state ← 6364136223846793005·state + 1442695040888963407 (mod 2^64)`.
/// Uniform draws take the top 53 bits.
#[derive(Debug, Clone)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub const MULTIPLIER: u64 = 6_364_136_223_846_793_005;
    pub const INCREMENT: u64 = 1_442_695_040_888_963_407;

    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        self.state
    }

    /// Uniform on `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[-1, 1)`.
    pub fn next_symmetric(&mut self) -> f64 {
        2.0 * self.next_unit() - 1.0
    }
}
