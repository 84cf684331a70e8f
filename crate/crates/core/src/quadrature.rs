//! Controlled-accuracy integration of singular and oscillatory kernels.
//!
//! All integrals go through one adaptive engine: an initial mesh chosen by the
//! caller (geometric toward a singular endpoint, oscillation-limited panels
//! elsewhere), a fixed 20-point Gauss–Legendre rule per panel, and an error
//! estimate obtained by comparing each panel against its two halves. Panels
//! with the largest estimate are bisected until the total estimate drops below
//! the target or the panel budget runs out. Final sums are taken left to right,
//! so results are bit-stable for a fixed [`QuadratureSpec`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::{Error, Result};

const GAUSS_ORDER: usize = 20;

/// Reported errors never drop below this multiple of `ε · ∫|f|`.
const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Largest per-halving error contraction assumed next to a singular endpoint.
const MAX_CONTRACTION: f64 = 0.95;

/// Depth of the geometric mesh toward a singular endpoint, as a fraction of
/// the first panel.
const GRADED_DEPTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    relative_tolerance: f64,
    max_panels: usize,
    grading_ratio: f64,
}

impl QuadratureSpec {
    pub fn new(relative_tolerance: f64, max_panels: usize, grading_ratio: f64) -> Result<Self> {
        if !(1e-14..=1e-2).contains(&relative_tolerance) {
            return Err(Error::Domain {
                name: "relative_tolerance",
                value: relative_tolerance,
                domain: "[1e-14, 1e-2]",
            });
        }
        if max_panels == 0 {
            return Err(Error::InvalidInput("max_panels must be positive".into()));
        }
        if !(0.1..=0.9).contains(&grading_ratio) {
            return Err(Error::Domain {
                name: "grading_ratio",
                value: grading_ratio,
                domain: "[0.1, 0.9]",
            });
        }
        Ok(Self {
            relative_tolerance,
            max_panels,
            grading_ratio,
        })
    }

    pub fn relative_tolerance(&self) -> f64 {
        self.relative_tolerance
    }

    pub fn max_panels(&self) -> usize {
        self.max_panels
    }

    pub fn grading_ratio(&self) -> f64 {
        self.grading_ratio
    }

    pub fn with_relative_tolerance(self, relative_tolerance: f64) -> Result<Self> {
        Self::new(relative_tolerance, self.max_panels, self.grading_ratio)
    }

    pub fn with_max_panels(self, max_panels: usize) -> Result<Self> {
        Self::new(self.relative_tolerance, max_panels, self.grading_ratio)
    }

    pub fn with_grading_ratio(self, grading_ratio: f64) -> Result<Self> {
        Self::new(self.relative_tolerance, self.max_panels, grading_ratio)
    }

    /// Breakpoints `top·r^K < … < top·r < top` covering three decades.
    fn geometric_mesh(&self, top: f64) -> Vec<f64> {
        let r = self.grading_ratio;
        let depth = (GRADED_DEPTH.ln() / r.ln()).ceil() as i32;
        (0..=depth).rev().map(|k| top * r.powi(k)).collect()
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-10,
            max_panels: 200_000,
            grading_ratio: 0.5,
        }
    }
}

/// A value together with its error estimate and the number of panels used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
}

impl Estimate<Complex64> {
    fn real(self) -> Estimate<f64> {
        Estimate {
            value: self.value.re,
            error: self.error,
            panels: self.panels,
        }
    }
}

struct GaussRule {
    nodes: [f64; GAUSS_ORDER],
    weights: [f64; GAUSS_ORDER],
}

/// Legendre roots by Newton iteration from the Chebyshev-like initial guess.
fn gauss_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_ORDER;
        let mut nodes = [0.0; GAUSS_ORDER];
        let mut weights = [0.0; GAUSS_ORDER];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut derivative = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                derivative = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / derivative;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * derivative * derivative);
        }
        GaussRule { nodes, weights }
    })
}

/// Gauss rule on `[a, b]`, returning `(∫f, ∫|f|)`.
///
/// Integrands receive the panel's left edge and the offset from it rather
/// than the rounded node `a + t`, so phases like `ω(a + t)` with large `ωa`
/// can be evaluated without losing the small part (see [`phase`]).
fn gauss_panel<F: Fn(f64, f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let rule = gauss_rule();
    let half = 0.5 * (b - a);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(a, half * (1.0 + x));
        sum += v * *w;
        abs += v.norm() * w;
    }
    (sum * half, abs * half)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    left: Complex64,
    right: Complex64,
    abs: f64,
    error: f64,
}

impl Panel {
    fn value(&self) -> Complex64 {
        self.left + self.right
    }
}

fn evaluate_panel<F: Fn(f64, f64) -> Complex64>(f: &F, a: f64, b: f64, whole: Complex64) -> Result<Panel> {
    let mid = 0.5 * (a + b);
    let (left, abs_l) = gauss_panel(f, a, mid);
    let (right, abs_r) = gauss_panel(f, mid, b);
    let value = left + right;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "integrand is not finite on [{a:e}, {b:e}]"
        )));
    }
    Ok(Panel {
        a,
        b,
        left,
        right,
        abs: abs_l + abs_r,
        error: (value - whole).norm(),
    })
}

/// Like [`evaluate_panel`], for a panel whose left end may carry an
/// integrable singularity `t^α`. There the halving estimate contracts only by
/// `r = 2^{-(α+1)}` per level, so it understates the error by `r/(1-r)`; `r` is
/// measured from one more level of halving.
fn evaluate_endpoint_panel<F: Fn(f64, f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    whole: Complex64,
) -> Result<Panel> {
    let mut panel = evaluate_panel(f, a, b, whole)?;
    let mid = 0.5 * (a + b);
    let quarter = 0.5 * (a + mid);
    let (q1, _) = gauss_panel(f, a, quarter);
    let (q2, _) = gauss_panel(f, quarter, mid);
    let inner = (q1 + q2 - panel.left).norm();
    let r = if panel.error > 0.0 {
        (inner / panel.error).min(MAX_CONTRACTION)
    } else {
        MAX_CONTRACTION
    };
    let r = if r.is_finite() { r } else { MAX_CONTRACTION };
    // The extrapolation is only asymptotic; the factor 2 is margin.
    panel.error *= (2.0 * r / (1.0 - r)).max(1.0);
    Ok(panel)
}

#[derive(PartialEq)]
struct ByError(f64, usize);

impl Eq for ByError {}

impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ByError {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// `(cos, sin)` of `ω(a + t)`; `ωa` is split exactly into `p + e`, so the
/// result is accurate even when `ωa` is large.
fn phase(omega: f64, a: f64, t: f64) -> (f64, f64) {
    let p = omega * a;
    let e = omega.mul_add(a, -p);
    let (sp, cp) = p.sin_cos();
    let (st, ct) = (e + omega * t).sin_cos();
    (cp * ct - sp * st, sp * ct + cp * st)
}

/// A piece of the integral computed outside the panel engine (e.g. a series).
#[derive(Debug, Clone, Copy, Default)]
struct Head {
    value: Complex64,
    error: f64,
    abs: f64,
}

/// `singular_left` marks `mesh[0]` as a possible integrable singularity.
fn integrate_mesh<F: Fn(f64, f64) -> Complex64>(
    f: &F,
    mesh: &[f64],
    head: Head,
    singular_left: bool,
    spec: &QuadratureSpec,
) -> Result<Estimate<Complex64>> {
    let start = mesh.first().copied().unwrap_or(0.0);
    let evaluate = |a: f64, b: f64, whole: Complex64| {
        if singular_left && a == start {
            evaluate_endpoint_panel(f, a, b, whole)
        } else {
            evaluate_panel(f, a, b, whole)
        }
    };
    let cells = mesh.len().saturating_sub(1);
    if cells > spec.max_panels {
        return Err(Error::ToleranceNotMet {
            estimate: f64::INFINITY,
            target: 0.0,
            panels: cells,
        });
    }
    let mut panels = Vec::with_capacity(cells);
    for w in mesh.windows(2) {
        let (whole, _) = gauss_panel(f, w[0], w[1]);
        panels.push(evaluate(w[0], w[1], whole)?);
    }

    let mut heap: BinaryHeap<ByError> = panels
        .iter()
        .enumerate()
        .map(|(i, p)| ByError(p.error, i))
        .collect();
    let mut value = head.value + panels.iter().map(Panel::value).sum::<Complex64>();
    let mut error = head.error + panels.iter().map(|p| p.error).sum::<f64>();
    let mut abs = head.abs + panels.iter().map(|p| p.abs).sum::<f64>();

    loop {
        let target = (spec.relative_tolerance * value.norm()).max(ROUNDING_FLOOR * abs);
        if error <= target {
            break;
        }
        if panels.len() >= spec.max_panels {
            return Err(Error::ToleranceNotMet {
                estimate: error,
                target,
                panels: panels.len(),
            });
        }
        let Some(ByError(_, i)) = heap.pop() else { break };
        let old = panels[i];
        let mid = 0.5 * (old.a + old.b);
        if !(mid > old.a && mid < old.b) {
            return Err(Error::ToleranceNotMet {
                estimate: error,
                target,
                panels: panels.len(),
            });
        }
        let left = evaluate(old.a, mid, old.left)?;
        let right = evaluate(mid, old.b, old.right)?;
        value += left.value() + right.value() - old.value();
        error = (error + left.error + right.error - old.error).max(0.0);
        abs += left.abs + right.abs - old.abs;
        panels[i] = left;
        panels.push(right);
        heap.push(ByError(left.error, i));
        heap.push(ByError(right.error, panels.len() - 1));
    }

    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = head.value;
    let mut error = head.error;
    let mut abs = head.abs;
    for p in &panels {
        value += p.value();
        error += p.error;
        abs += p.abs;
    }
    Ok(Estimate {
        value,
        error: error.max(ROUNDING_FLOOR * abs),
        panels: panels.len(),
    })
}

/// `∫_0^δ s^{γ-1} cos(ns) ds` by its power series; used for the innermost
/// piece next to the singular endpoint.
fn power_cosine_head(gamma_exp: f64, n: f64, delta: f64) -> Head {
    let x2 = (n * delta) * (n * delta);
    let mut term = delta.powf(gamma_exp);
    let mut sum = term / gamma_exp;
    let mut last = sum.abs();
    for j in 1..200 {
        let j = j as f64;
        term *= -x2 / ((2.0 * j - 1.0) * (2.0 * j));
        let contribution = term / (gamma_exp + 2.0 * j);
        sum += contribution;
        last = contribution.abs();
        if last <= 1e-18 * sum.abs() {
            break;
        }
    }
    Head {
        value: Complex64::new(sum, 0.0),
        error: last,
        abs: delta.powf(gamma_exp) / gamma_exp,
    }
}

/// `∫_0^π s^{γ-1} cos(ns) ds`.
///
/// The first oscillation `[0, π/n]` gets a geometric mesh toward the singular
/// endpoint with the last `10^{-3}` of it summed as a power series; the rest
/// of `[0, π]` is cut into half-period panels of width `π/n`. Exponents
/// `γ ∈ (0, 2]` are accepted; for `γ ≥ 1` the grading is harmless.
pub fn singular_oscillatory_integral(
    gamma_exp: f64,
    n: u64,
    spec: &QuadratureSpec,
) -> Result<Estimate<f64>> {
    if !(gamma_exp > 0.0 && gamma_exp <= 2.0) {
        return Err(Error::Domain {
            name: "gamma_exp",
            value: gamma_exp,
            domain: "(0, 2]",
        });
    }
    let periods = n.max(1);
    if periods as usize > spec.max_panels {
        return Err(Error::ToleranceNotMet {
            estimate: f64::INFINITY,
            target: 0.0,
            panels: periods as usize,
        });
    }
    let freq = n as f64;
    let first = PI / periods as f64;
    let mut mesh = spec.geometric_mesh(first);
    mesh.extend((2..=periods).map(|j| j as f64 * PI / periods as f64));
    let head = power_cosine_head(gamma_exp, freq, mesh[0]);
    let expo = gamma_exp - 1.0;
    let f = |a: f64, t: f64| Complex64::new((a + t).powf(expo) * phase(freq, a, t).0, 0.0);
    integrate_mesh(&f, &mesh, head, false, spec).map(Estimate::real)
}

/// `∫_a^b u^{γ-1} cos u du` for `0 < a < b`, on panels no wider than `π/2`.
pub fn power_cosine_integral(
    gamma_exp: f64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate<f64>> {
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "power_cosine_integral needs 0 < a < b < ∞, got [{a}, {b}]"
        )));
    }
    let cells = ((b - a) / (0.5 * PI)).ceil().max(1.0) as usize;
    let mesh = crate::lorentz::uniform_grid(a, b, cells);
    let expo = gamma_exp - 1.0;
    let f = |a: f64, t: f64| Complex64::new((a + t).powf(expo) * phase(1.0, a, t).0, 0.0);
    integrate_mesh(&f, &mesh, Head::default(), false, spec).map(Estimate::real)
}

/// `∫_0^T e^{-λt} orbit(t) dt`.
///
/// The mesh is geometric from `T` down to `T·10^{-3}`-ish depth (ratio set by
/// the spec), and the remaining innermost panel touches zero; adaptive
/// bisection then resolves an integrable blow-up such as `t^{-1/2}`. No panel
/// is wider than half an oscillation period `π/|Im λ|`.
pub fn laplace_quadrature<F: Fn(f64) -> f64>(
    orbit: F,
    lambda: Complex64,
    cutoff: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate<Complex64>> {
    if !(lambda.re > 0.0) {
        return Err(Error::Domain {
            name: "Re(lambda)",
            value: lambda.re,
            domain: "(0, ∞)",
        });
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::Domain {
            name: "cutoff",
            value: cutoff,
            domain: "(0, ∞)",
        });
    }
    let mut mesh = vec![0.0];
    mesh.extend(spec.geometric_mesh(cutoff));
    if lambda.im != 0.0 {
        let width = PI / lambda.im.abs();
        let mut refined = vec![0.0];
        for w in mesh.windows(2) {
            let pieces = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / pieces as f64;
            refined.extend((1..pieces).map(|i| w[0] + h * i as f64));
            refined.push(w[1]);
        }
        mesh = refined;
    }
    let f = |a: f64, h: f64| {
        let t = a + h;
        let (c, s) = phase(lambda.im, a, h);
        Complex64::new(c, -s) * ((-lambda.re * t).exp() * orbit(t))
    };
    integrate_mesh(&f, &mesh, Head::default(), true, spec)
}

/// Γ(x) on `(0, 2]`, relative error well below `10^{-12}`.
pub fn gamma_function(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 2.0) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            domain: "(0, 2]",
        });
    }
    Ok(libm::tgamma(x))
}
