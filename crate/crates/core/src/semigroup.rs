//! Diagonal observation systems `x' + Ax = 0, y = Cx`.
//!
//! The generator acts as `A e_k = μ_k e_k` and the observation as
//! `C e_k = c_k`, so for a state `x = Σ ξ_k e_k`
//!
//! ```text
//! CT(t)x        = Σ ξ_k c_k e^{-μ_k t}
//! C(λ+A)^{-1}x  = Σ ξ_k c_k / (λ + μ_k)
//! ```
//!
//! Every series is truncated at the smallest index whose tail bound falls below
//! the requested tolerance; the bound is returned with the value. Modes past
//! `n_active` are never summed. Their contribution is bounded by
//! `sup_{k≥n} |ξ_k|` times a geometric extrapolation of the last two system
//! weights (`c_k e^{-μ_k t}` or `c_k/μ_k`), which fails closed (infinite
//! bound) when the weights stop decreasing.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::{Error, Result};

/// Spectrum `μ_k`, observation coefficients `c_k` and the truncation cap.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSystem {
    // Both hold `n_active + 1` entries; the last one is only used to bound
    // the remainder past the cap.
    mu: Vec<f64>,
    c: Vec<f64>,
    n_active: usize,
}

impl DiagonalSystem {
    pub fn from_rules<M, C>(mu: M, c: C, n_active: usize) -> Result<Self>
    where
        M: Fn(usize) -> f64,
        C: Fn(usize) -> f64,
    {
        if n_active == 0 {
            return Err(Error::InvalidInput("n_active must be positive".into()));
        }
        let mu: Vec<f64> = (0..=n_active).map(&mu).collect();
        let c: Vec<f64> = (0..=n_active).map(&c).collect();
        if !mu.iter().all(|m| m.is_finite() && *m > 0.0) {
            return Err(Error::InvalidInput(
                "eigenvalues must be finite and positive".into(),
            ));
        }
        if mu.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "eigenvalues must be strictly increasing".into(),
            ));
        }
        if !c.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput(
                "observation coefficients must be finite".into(),
            ));
        }
        Ok(Self { mu, c, n_active })
    }

    /// Finitely many modes; the system is exactly `mu.len()` dimensional.
    pub fn finite(mu: &[f64], c: &[f64]) -> Result<Self> {
        if mu.len() != c.len() || mu.is_empty() {
            return Err(Error::InvalidInput(
                "mu and c must be non-empty and of equal length".into(),
            ));
        }
        let n = mu.len();
        let top = mu[n - 1];
        Self::from_rules(
            |k| if k < n { mu[k] } else { 2.0 * top + 1.0 },
            |k| if k < n { c[k] } else { 0.0 },
            n,
        )
    }

    /// `μ_k = 4^k`, `c_k = 2^k`.
    pub fn geometric(n_active: usize) -> Result<Self> {
        Self::from_rules(|k| 4f64.powi(k as i32), |k| 2f64.powi(k as i32), n_active)
    }

    /// `μ_k = 2^k`, `c_k = μ_k^{1/2}`, a square-root type observation.
    pub fn square_root_model(n_active: usize) -> Result<Self> {
        Self::from_rules(
            |k| 2f64.powi(k as i32),
            |k| 2f64.powf(k as f64 / 2.0),
            n_active,
        )
    }

    pub fn n_active(&self) -> usize {
        self.n_active
    }

    pub fn mu(&self, k: usize) -> f64 {
        self.mu[k]
    }

    pub fn c(&self, k: usize) -> f64 {
        self.c[k]
    }
}

/// Expansion coefficients `ξ_k` of a state.
///
/// Coefficients past `values` are unknown but bounded by `tail_sup`; a zero
/// bound means the vector is finitely supported.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    values: Vec<f64>,
    tail_sup: f64,
}

impl CoefficientVector {
    pub fn finite(values: Vec<f64>) -> Self {
        Self {
            values,
            tail_sup: 0.0,
        }
    }

    pub fn with_tail_bound(values: Vec<f64>, tail_sup: f64) -> Result<Self> {
        if !(tail_sup.is_finite() && tail_sup >= 0.0) {
            return Err(Error::InvalidInput(
                "tail bound must be finite and non-negative".into(),
            ));
        }
        Ok(Self { values, tail_sup })
    }

    pub fn zero() -> Self {
        Self::finite(Vec::new())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail_sup(&self) -> f64 {
        self.tail_sup
    }

    fn get(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    fn magnitude_bound(&self, k: usize) -> f64 {
        self.values.get(k).map_or(self.tail_sup, |v| v.abs())
    }

    /// `sup_{k ≥ n} |ξ_k|`.
    fn sup_from(&self, n: usize) -> f64 {
        self.values
            .iter()
            .skip(n)
            .fold(self.tail_sup, |m, v| m.max(v.abs()))
    }

    /// Number of leading modes whose coefficient is actually known.
    fn known(&self) -> usize {
        if self.tail_sup > 0.0 {
            self.values.len()
        } else {
            usize::MAX
        }
    }

    /// `ξ_k ↦ ξ_k e^{-μ_k t}` over the first `n` modes.
    pub fn propagate(&self, sys: &DiagonalSystem, t: f64) -> Self {
        let n = self.values.len().min(sys.n_active);
        Self {
            values: (0..n).map(|k| self.values[k] * (-sys.mu[k] * t).exp()).collect(),
            tail_sup: self.tail_sup,
        }
    }
}

/// A truncated series value with a bound on everything left out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncated<T> {
    pub value: T,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Smallest number of leading terms whose tail bound is below `tol`.
///
/// Term `k` is bounded by `coeff(k) · weights[k]`; `weights` has one entry per
/// active mode plus one look-ahead entry. Modes from the cap on are bounded by
/// `past_cap · Σ_{k≥n} w_k`, extrapolating the weights geometrically.
fn truncation_point<C: Fn(usize) -> f64>(
    weights: &[f64],
    coeff: C,
    past_cap: f64,
    known: usize,
    tol: f64,
) -> Result<(usize, f64)> {
    let n = weights.len() - 1;
    let cap_remainder = if past_cap == 0.0 {
        0.0
    } else {
        past_cap * remainder_past_cap(weights)
    };
    let mut tail = cap_remainder;
    let mut suffix = vec![0.0; n + 1];
    suffix[n] = tail;
    for k in (0..n).rev() {
        tail += coeff(k) * weights[k];
        suffix[k] = tail;
    }
    let terms = (1..=n).find(|&j| suffix[j] < tol).ok_or(Error::TruncationOverflow {
        cap: n,
        tail: cap_remainder,
        tol,
    })?;
    if terms > known {
        return Err(Error::TruncationOverflow {
            cap: known,
            tail: suffix[known.min(n)],
            tol,
        });
    }
    Ok((terms, suffix[terms]))
}

/// Geometric extrapolation `w_n / (1 - ρ)` with `ρ = w_n / w_{n-1}`.
fn remainder_past_cap(weights: &[f64]) -> f64 {
    let n = weights.len() - 1;
    let last = weights[n];
    if last == 0.0 {
        return 0.0;
    }
    if n == 0 {
        return f64::INFINITY;
    }
    let ratio = last / weights[n - 1];
    if ratio < 1.0 {
        last / (1.0 - ratio)
    } else {
        f64::INFINITY
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "tol",
            value: tol,
            domain: "(0, ∞)",
        })
    }
}

fn check_half_plane(lambda: Complex64) -> Result<()> {
    if lambda.re > 0.0 && lambda.im.is_finite() && lambda.re.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "Re(lambda)",
            value: lambda.re,
            domain: "(0, ∞)",
        })
    }
}

/// `CT(t)x = Σ ξ_k c_k e^{-μ_k t}`.
pub fn orbit_observation(
    sys: &DiagonalSystem,
    xi: &CoefficientVector,
    t: f64,
    tol: f64,
) -> Result<Truncated<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain {
            name: "t",
            value: t,
            domain: "(0, ∞)",
        });
    }
    check_tolerance(tol)?;
    let weights: Vec<f64> = (0..=sys.n_active)
        .map(|k| sys.c[k].abs() * (-sys.mu[k] * t).exp())
        .collect();
    let (terms, tail_bound) = truncation_point(
        &weights,
        |k| xi.magnitude_bound(k),
        xi.sup_from(sys.n_active),
        xi.known(),
        tol,
    )?;
    let value = (0..terms)
        .map(|k| xi.get(k) * sys.c[k] * (-sys.mu[k] * t).exp())
        .sum();
    Ok(Truncated {
        value,
        tail_bound,
        terms,
    })
}

/// `C(λ+A)^{-1}x = Σ ξ_k c_k / (λ + μ_k)`, tail bounded by `Σ |ξ_k c_k| / μ_k`.
pub fn resolvent_observation(
    sys: &DiagonalSystem,
    xi: &CoefficientVector,
    lambda: Complex64,
    tol: f64,
) -> Result<Truncated<Complex64>> {
    check_half_plane(lambda)?;
    check_tolerance(tol)?;
    let weights: Vec<f64> = (0..=sys.n_active)
        .map(|k| sys.c[k].abs() / sys.mu[k])
        .collect();
    let (terms, tail_bound) = truncation_point(
        &weights,
        |k| xi.magnitude_bound(k),
        xi.sup_from(sys.n_active),
        xi.known(),
        tol,
    )?;
    let value = (0..terms)
        .map(|k| Complex64::from(xi.get(k) * sys.c[k]) / (lambda + sys.mu[k]))
        .sum();
    Ok(Truncated {
        value,
        tail_bound,
        terms,
    })
}

/// `Re(λ)^{1/2} |C(λ+A)^{-1}x| / ‖x‖` for a caller-supplied state norm.
pub fn weiss_quotient(
    sys: &DiagonalSystem,
    xi: &CoefficientVector,
    x_norm: f64,
    lambda: Complex64,
    tol: f64,
) -> Result<f64> {
    check_state_norm(x_norm)?;
    let r = resolvent_observation(sys, xi, lambda, tol)?;
    Ok(lambda.re.sqrt() * r.value.norm() / x_norm)
}

fn check_state_norm(x_norm: f64) -> Result<()> {
    if x_norm > 0.0 && x_norm.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "x_norm",
            value: x_norm,
            domain: "(0, ∞)",
        })
    }
}

/// Squared-sum helper for the orthonormal model: returns `(Σ terms, tail)`.
fn orthonormal_sum<T, B>(sys: &DiagonalSystem, term: T, bound: B, tol: f64) -> Result<(f64, f64)>
where
    T: Fn(usize) -> f64,
    B: Fn(usize) -> f64,
{
    let weights: Vec<f64> = (0..=sys.n_active).map(bound).collect();
    let (terms, tail) = truncation_point(&weights, |_| 1.0, 1.0, usize::MAX, tol)?;
    Ok(((0..terms).map(term).sum(), tail))
}

/// `‖C(λ+A)^{-1}‖ · Re(λ)^{1/2}` when `(e_k)` is orthonormal and `Y = ℂ`,
/// i.e. `Re(λ)^{1/2} (Σ |c_k|² / |λ+μ_k|²)^{1/2}`.
pub fn weiss_norm_orthonormal(
    sys: &DiagonalSystem,
    lambda: Complex64,
    tol: f64,
) -> Result<Truncated<f64>> {
    check_half_plane(lambda)?;
    check_tolerance(tol)?;
    let n = sys.n_active;
    let tail_terms = |k: usize| (sys.c[k] / sys.mu[k]).powi(2);
    if tail_terms(n) > 0.0 && tail_terms(n) >= tail_terms(n - 1).max(f64::MIN_POSITIVE) {
        return Err(Error::DivergentSum {
            ratio: tail_terms(n) / tail_terms(n - 1),
        });
    }
    let (sum, tail) = orthonormal_sum(
        sys,
        |k| sys.c[k] * sys.c[k] / (lambda + sys.mu[k]).norm_sqr(),
        |k| (sys.c[k] / (lambda.re + sys.mu[k])).powi(2),
        tol,
    )?;
    let scale = lambda.re.sqrt();
    let value = scale * sum.sqrt();
    Ok(Truncated {
        value,
        tail_bound: scale * ((sum + tail).sqrt() - sum.sqrt()),
        terms: n,
    })
}

/// `‖CT(t)‖ = (Σ |c_k|² e^{-2μ_k t})^{1/2}` in the orthonormal model.
pub fn orbit_norm_orthonormal(sys: &DiagonalSystem, t: f64, tol: f64) -> Result<Truncated<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain {
            name: "t",
            value: t,
            domain: "(0, ∞)",
        });
    }
    check_tolerance(tol)?;
    let term = |k: usize| sys.c[k] * sys.c[k] * (-2.0 * sys.mu[k] * t).exp();
    let (sum, tail) = orthonormal_sum(sys, term, term, tol)?;
    Ok(Truncated {
        value: sum.sqrt(),
        tail_bound: (sum + tail).sqrt() - sum.sqrt(),
        terms: sys.n_active,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySample {
    pub t: f64,
    pub value: f64,
}

/// Samples `t^{1/2} |CT(t)x| / ‖x‖`; their supremum estimates the decay
/// constant `K` in `|CT(t)x| ≤ K t^{-1/2} ‖x‖`.
pub fn decay_profile(
    sys: &DiagonalSystem,
    xi: &CoefficientVector,
    x_norm: f64,
    t_grid: &[f64],
    tol: f64,
) -> Result<Vec<DecaySample>> {
    check_state_norm(x_norm)?;
    t_grid
        .par_iter()
        .map(|&t| {
            let y = orbit_observation(sys, xi, t, tol)?;
            Ok(DecaySample {
                t,
                value: t.sqrt() * y.value.abs() / x_norm,
            })
        })
        .collect()
}

/// Samples `t^{1/2} ‖CT(t)‖` in the orthonormal model.
pub fn decay_profile_orthonormal(
    sys: &DiagonalSystem,
    t_grid: &[f64],
    tol: f64,
) -> Result<Vec<DecaySample>> {
    t_grid
        .par_iter()
        .map(|&t| {
            let y = orbit_norm_orthonormal(sys, t, tol)?;
            Ok(DecaySample {
                t,
                value: t.sqrt() * y.value,
            })
        })
        .collect()
}

pub fn sup_decay(samples: &[DecaySample]) -> f64 {
    samples.iter().map(|s| s.value).fold(0.0, f64::max)
}

/// Points of the open right half-plane: log-spaced moduli times arguments
/// spread uniformly over `(-π/2 + 0.01, π/2 - 0.01)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaGrid {
    pub min_modulus: f64,
    pub max_modulus: f64,
    pub moduli_per_decade: usize,
    pub arguments: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            min_modulus: 1e-4,
            max_modulus: 1e8,
            moduli_per_decade: 8,
            arguments: 17,
        }
    }
}

impl LambdaGrid {
    const EDGE: f64 = 0.01;

    pub fn points(&self) -> Vec<Complex64> {
        let moduli =
            crate::lorentz::log_grid(self.min_modulus, self.max_modulus, self.moduli_per_decade);
        let lo = -FRAC_PI_2 + Self::EDGE;
        let hi = FRAC_PI_2 - Self::EDGE;
        let args: Vec<f64> = if self.arguments <= 1 {
            vec![0.0]
        } else {
            (0..self.arguments)
                .map(|j| lo + (hi - lo) * j as f64 / (self.arguments - 1) as f64)
                .collect()
        };
        moduli
            .iter()
            .flat_map(|&r| args.iter().map(move |&a| Complex64::from_polar(r, a)))
            .collect()
    }

    /// Twice the density in both directions; contains every point of `self`.
    pub fn refined(&self) -> Self {
        Self {
            moduli_per_decade: 2 * self.moduli_per_decade,
            arguments: 2 * self.arguments - 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeissSample {
    pub lambda: Complex64,
    pub quotient: f64,
}

pub fn weiss_scan(
    sys: &DiagonalSystem,
    xi: &CoefficientVector,
    x_norm: f64,
    grid: &LambdaGrid,
    tol: f64,
) -> Result<Vec<WeissSample>> {
    grid.points()
        .into_par_iter()
        .map(|lambda| {
            Ok(WeissSample {
                lambda,
                quotient: weiss_quotient(sys, xi, x_norm, lambda, tol)?,
            })
        })
        .collect()
}

pub fn weiss_scan_orthonormal(
    sys: &DiagonalSystem,
    grid: &LambdaGrid,
    tol: f64,
) -> Result<Vec<WeissSample>> {
    grid.points()
        .into_par_iter()
        .map(|lambda| {
            Ok(WeissSample {
                lambda,
                quotient: weiss_norm_orthonormal(sys, lambda, tol)?.value,
            })
        })
        .collect()
}

pub fn sup_quotient(samples: &[WeissSample]) -> f64 {
    samples.iter().map(|s| s.quotient).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::E;

    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn single_mode_orbit_and_resolvent() {
        let sys = DiagonalSystem::finite(&[3.0], &[2.0]).unwrap();
        let xi = CoefficientVector::finite(vec![1.5]);
        for t in [1e-3, 0.1, 2.0] {
            let y = orbit_observation(&sys, &xi, t, TOL).unwrap();
            assert_eq!(y.value, 1.5 * 2.0 * (-3.0 * t).exp());
            assert_eq!(y.tail_bound, 0.0);
        }
        let lambda = Complex64::new(1.0, 2.0);
        let r = resolvent_observation(&sys, &xi, lambda, TOL).unwrap();
        assert!((r.value - Complex64::from(3.0) / (lambda + 3.0)).norm() < 1e-15);
    }

    #[test]
    fn default_system_three_modes() {
        let sys = DiagonalSystem::geometric(40).unwrap();
        let xi = CoefficientVector::finite(vec![1.0, 1.0, 1.0]);
        let y = orbit_observation(&sys, &xi, 1.0, TOL).unwrap();
        let expected = (-1.0f64).exp() + 2.0 * (-4.0f64).exp() + 4.0 * (-16.0f64).exp();
        assert!((y.value - expected).abs() < 1e-16);

        let lambda = Complex64::new(1.0, 10.0);
        let r = resolvent_observation(&sys, &xi, lambda, TOL).unwrap();
        let expected: Complex64 = (0..3)
            .map(|k| Complex64::from(2f64.powi(k)) / (lambda + 4f64.powi(k)))
            .sum();
        assert!((r.value - expected).norm() < 1e-16);
    }

    #[test]
    fn zero_state_gives_zero() {
        let sys = DiagonalSystem::geometric(40).unwrap();
        let xi = CoefficientVector::zero();
        let lambda = Complex64::new(0.3, -2.0);
        assert_eq!(weiss_quotient(&sys, &xi, 1.0, lambda, TOL).unwrap(), 0.0);
        let profile = decay_profile(&sys, &xi, 1.0, &[1e-3, 1e-1, 1.0], TOL).unwrap();
        assert!(profile.iter().all(|s| s.value == 0.0));
    }

    #[test]
    fn single_mode_weiss_quotient_matches_orthonormal_norm() {
        let sys = DiagonalSystem::finite(&[1.0], &[1.0]).unwrap();
        let lambda = Complex64::new(1.0, 0.0);
        let w = weiss_norm_orthonormal(&sys, lambda, TOL).unwrap();
        assert!((w.value - 0.5).abs() < 1e-16);

        let sys = DiagonalSystem::finite(&[2.0], &[3.0]).unwrap();
        let xi = CoefficientVector::finite(vec![1.0]);
        for lambda in [Complex64::new(0.5, 3.0), Complex64::new(4.0, -1.0)] {
            let q = weiss_quotient(&sys, &xi, 1.0, lambda, TOL).unwrap();
            let expected = lambda.re.sqrt() * 3.0 / (lambda + 2.0).norm();
            assert!((q - expected).abs() < 1e-15);
            let w = weiss_norm_orthonormal(&sys, lambda, TOL).unwrap();
            assert!((w.value - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_observation_has_zero_weiss_norm() {
        let sys = DiagonalSystem::from_rules(|k| 2f64.powi(k as i32), |_| 0.0, 30).unwrap();
        let w = weiss_norm_orthonormal(&sys, Complex64::new(1.0, 1.0), TOL).unwrap();
        assert_eq!(w.value, 0.0);
    }

    #[test]
    fn divergent_observation_is_rejected() {
        let sys = DiagonalSystem::from_rules(|k| 2f64.powi(k as i32), |k| 2f64.powi(k as i32), 30)
            .unwrap();
        assert!(matches!(
            weiss_norm_orthonormal(&sys, Complex64::new(1.0, 0.0), TOL),
            Err(Error::DivergentSum { .. })
        ));
        let xi = CoefficientVector::with_tail_bound(vec![1.0; 30], 1.0).unwrap();
        assert!(matches!(
            resolvent_observation(&sys, &xi, Complex64::new(1.0, 0.0), TOL),
            Err(Error::TruncationOverflow { .. })
        ));
    }

    #[test]
    fn overflow_when_cap_is_too_small() {
        let sys = DiagonalSystem::geometric(5).unwrap();
        let xi = CoefficientVector::with_tail_bound(vec![1.0; 5], 1.0).unwrap();
        assert!(matches!(
            orbit_observation(&sys, &xi, 1e-6, TOL),
            Err(Error::TruncationOverflow { .. })
        ));
        // Known coefficients run out before the tail is small enough.
        let sys = DiagonalSystem::geometric(60).unwrap();
        let short = CoefficientVector::with_tail_bound(vec![1.0; 4], 1.0).unwrap();
        assert!(matches!(
            orbit_observation(&sys, &short, 1e-6, TOL),
            Err(Error::TruncationOverflow { .. })
        ));
    }

    #[test]
    fn rejects_bad_arguments() {
        let sys = DiagonalSystem::geometric(10).unwrap();
        let xi = CoefficientVector::finite(vec![1.0]);
        assert!(orbit_observation(&sys, &xi, 0.0, TOL).is_err());
        assert!(orbit_observation(&sys, &xi, 1.0, 0.0).is_err());
        assert!(resolvent_observation(&sys, &xi, Complex64::new(0.0, 1.0), TOL).is_err());
        assert!(weiss_quotient(&sys, &xi, 0.0, Complex64::new(1.0, 0.0), TOL).is_err());
        assert!(DiagonalSystem::finite(&[2.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(DiagonalSystem::finite(&[0.0], &[1.0]).is_err());
    }

    #[test]
    fn single_mode_decay_supremum() {
        // sup_t t^{1/2} e^{-μt} = (2eμ)^{-1/2} at t = 1/(2μ).
        let mu = 3.0;
        let sys = DiagonalSystem::finite(&[mu], &[1.0]).unwrap();
        let xi = CoefficientVector::finite(vec![1.0]);
        let grid = crate::lorentz::log_grid(1e-4, 10.0, 2000);
        let sup = sup_decay(&decay_profile(&sys, &xi, 1.0, &grid, TOL).unwrap());
        let exact = (2.0 * E * mu).powf(-0.5);
        assert!(sup <= exact && exact - sup < 1e-6 * exact, "{sup} vs {exact}");
    }

    #[test]
    fn semigroup_law_at_observation_level() {
        let sys = DiagonalSystem::geometric(60).unwrap();
        let xi = CoefficientVector::finite((0..30).map(|k| 1.0 / (1.0 + k as f64)).collect());
        for (t1, t2) in [(1e-3, 2e-3), (0.05, 1e-5), (1e-6, 1e-6)] {
            let whole = orbit_observation(&sys, &xi, t1 + t2, TOL).unwrap();
            let split = orbit_observation(&sys, &xi.propagate(&sys, t1), t2, TOL).unwrap();
            let slack = whole.tail_bound + split.tail_bound + 1e-14 * whole.value.abs();
            assert!((whole.value - split.value).abs() <= slack);
        }
    }

    #[test]
    fn truncation_is_honest() {
        let sys = DiagonalSystem::geometric(60).unwrap();
        let xi = CoefficientVector::with_tail_bound(vec![0.7; 60], 0.7).unwrap();
        let loose = resolvent_observation(&sys, &xi, Complex64::new(0.2, 5.0), 1e-4).unwrap();
        let tight = resolvent_observation(&sys, &xi, Complex64::new(0.2, 5.0), 1e-13).unwrap();
        assert!(tight.terms > loose.terms);
        assert!((tight.value - loose.value).norm() <= loose.tail_bound);

        let coarse = orbit_observation(&sys, &xi, 1e-5, 1e-3).unwrap();
        let fine = orbit_observation(&sys, &xi, 1e-5, 1e-13).unwrap();
        assert!((fine.value - coarse.value).abs() <= coarse.tail_bound);
    }

    #[test]
    fn square_root_model_is_weiss_bounded() {
        let sys = DiagonalSystem::square_root_model(90).unwrap();
        let grid = LambdaGrid {
            min_modulus: 1e-6,
            max_modulus: 1e8,
            moduli_per_decade: 4,
            arguments: 1,
        };
        let sup = sup_quotient(&weiss_scan_orthonormal(&sys, &grid, TOL).unwrap());
        assert!(sup.is_finite() && sup < 2.0, "{sup}");
    }

    #[test]
    fn lambda_grid_is_nested_and_in_half_plane() {
        let grid = LambdaGrid::default();
        let pts = grid.points();
        assert_eq!(pts.len(), 97 * 17);
        assert!(pts.iter().all(|l| l.re > 0.0));
        let fine = grid.refined().points();
        for p in pts.iter().step_by(37) {
            assert!(fine.iter().any(|q| (p - q).norm() <= 1e-12 * p.norm()));
        }
    }
}
