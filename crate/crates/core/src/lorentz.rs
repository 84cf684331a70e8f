//! Distribution functions, decreasing rearrangements and Lorentz quasi-norms.
//!
//! Every function handled here is a non-negative step function on an interval
//! of the half-line. Continuous profiles enter through caller-chosen sampling,
//! after which every quantity below is computed exactly (up to the final
//! floating-point rounding of closed-form segment integrals).
//!
//! The weak norm is `sup_t t^{1/p} f*(t)`, the form under which `|t|^{-1/p}`
//! has norm one.

use std::fmt::Write as _;

use crate::exact::ExactSum;
use crate::{Error, Result};

/// Magnitude profile `t ↦ ‖f(t)‖` that is constant on each `[b_i, b_{i+1})`
/// and zero outside `[b_0, b_last)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidInput(
                "a step function needs at least two breakpoints".into(),
            ));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            )));
        }
        if !breakpoints.iter().all(|b| b.is_finite() && *b >= 0.0) {
            return Err(Error::InvalidInput(
                "breakpoints must be finite and non-negative".into(),
            ));
        }
        if let Some(i) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "breakpoints must be strictly increasing (index {i}: {} then {})",
                breakpoints[i],
                breakpoints[i + 1]
            )));
        }
        if !values.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(Error::InvalidInput(
                "values are magnitudes and must be finite and non-negative".into(),
            ));
        }
        Ok(Self { breakpoints, values })
    }

    /// Samples `f` at the left endpoint of every cell of `grid`.
    pub fn sample_left<F: Fn(f64) -> f64>(grid: &[f64], f: F) -> Result<Self> {
        let values = grid[..grid.len().saturating_sub(1)]
            .iter()
            .map(|&t| f(t).abs())
            .collect();
        Self::new(grid.to_vec(), values)
    }

    /// Samples `f` at the midpoint of every cell of `grid`.
    pub fn sample_midpoint<F: Fn(f64) -> f64>(grid: &[f64], f: F) -> Result<Self> {
        let values = grid
            .windows(2)
            .map(|w| f(0.5 * (w[0] + w[1])).abs())
            .collect();
        Self::new(grid.to_vec(), values)
    }

    pub fn indicator(start: f64, end: f64) -> Result<Self> {
        Self::new(vec![start, end], vec![1.0])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[0], w[1], v))
    }

    /// Value at `t`; zero outside the covered domain.
    pub fn eval(&self, t: f64) -> f64 {
        let b = &self.breakpoints;
        if t < b[0] || t >= b[b.len() - 1] {
            return 0.0;
        }
        let i = b.partition_point(|&x| x <= t) - 1;
        self.values[i]
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(
            self.breakpoints.clone(),
            self.values.iter().map(|v| v * c).collect(),
        )
    }

    /// Total measure of the covered domain.
    pub fn domain_measure(&self) -> f64 {
        let mut acc = ExactSum::new();
        acc.add_difference(self.breakpoints[self.breakpoints.len() - 1], self.breakpoints[0]);
        acc.value()
    }

    /// CSV with header `breakpoint,value`; the last row has an empty value cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("breakpoint,value\n");
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", fmt_decimal(*b), fmt_decimal(*v));
        }
        let _ = writeln!(out, "{},", fmt_decimal(self.breakpoints[self.breakpoints.len() - 1]));
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim() == "breakpoint,value" => {}
            Some((i, header)) => {
                return Err(Error::Csv {
                    line: i + 1,
                    message: format!("expected header `breakpoint,value`, found `{header}`"),
                })
            }
            None => {
                return Err(Error::Csv {
                    line: 1,
                    message: "empty input".into(),
                })
            }
        }
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        let mut closed = false;
        for (i, line) in lines {
            let line_no = i + 1;
            if closed {
                return Err(Error::Csv {
                    line: line_no,
                    message: "rows after the final breakpoint".into(),
                });
            }
            let (b, v) = line.split_once(',').ok_or_else(|| Error::Csv {
                line: line_no,
                message: "expected two comma-separated cells".into(),
            })?;
            breakpoints.push(parse_cell(b, line_no)?);
            if v.trim().is_empty() {
                closed = true;
            } else {
                values.push(parse_cell(v, line_no)?);
            }
        }
        if !closed {
            return Err(Error::Csv {
                line: text.lines().count(),
                message: "missing final breakpoint row with an empty value cell".into(),
            });
        }
        Self::new(breakpoints, values)
    }
}

fn parse_cell(cell: &str, line: usize) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|e| Error::Csv {
        line,
        message: format!("`{}`: {e}", cell.trim()),
    })
}

/// Decimal with 17 significant digits; parses back to the same double.
pub fn fmt_decimal(x: f64) -> String {
    format!("{x:.16e}")
}

/// The pair `(p, q)` indexing `L^{p,q}`; `q` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzIndex {
    p: f64,
    q: f64,
}

impl LorentzIndex {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::Domain {
                name: "p",
                value: p,
                domain: "(1, ∞)",
            });
        }
        if q.is_nan() || q < 1.0 {
            return Err(Error::Domain {
                name: "q",
                value: q,
                domain: "[1, ∞]",
            });
        }
        Ok(Self { p, q })
    }

    /// The weak space `L^{p,∞}`.
    pub fn weak(p: f64) -> Result<Self> {
        Self::new(p, f64::INFINITY)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_weak(&self) -> bool {
        self.q.is_infinite()
    }
}

/// Measure of `{t : f(t) > alpha}`.
pub fn distribution_function(f: &StepFunction, alpha: f64) -> f64 {
    let mut acc = ExactSum::new();
    for (a, b, v) in f.segments() {
        if v > alpha {
            acc.add_difference(b, a);
        }
    }
    acc.value()
}

/// Non-increasing rearrangement `f*` on `[0, |domain|)`.
///
/// Segments are ordered by value and equal values merged. Each new breakpoint
/// is the correctly rounded exact measure of everything to its left, which
/// makes `d_{f*}(α) = d_f(α)` hold bit for bit. A segment too short to move
/// the rounded cumulative measure is dropped; it carries no representable mass.
pub fn decreasing_rearrangement(f: &StepFunction) -> StepFunction {
    let mut order: Vec<usize> = (0..f.values.len()).collect();
    order.sort_by(|&i, &j| f.values[j].total_cmp(&f.values[i]));

    let mut acc = ExactSum::new();
    let mut breakpoints = vec![0.0];
    let mut values = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let v = f.values[order[k]];
        while k < order.len() && f.values[order[k]] == v {
            let i = order[k];
            acc.add_difference(f.breakpoints[i + 1], f.breakpoints[i]);
            k += 1;
        }
        let end = acc.value();
        if end > breakpoints[breakpoints.len() - 1] {
            breakpoints.push(end);
            values.push(v);
        }
    }
    StepFunction { breakpoints, values }
}

/// `e^r - s^r` for `0 <= s < e` without cancellation.
fn power_difference(e: f64, s: f64, r: f64) -> f64 {
    if s == 0.0 {
        e.powf(r)
    } else {
        s.powf(r) * (r * ((e - s) / s).ln_1p()).exp_m1()
    }
}

/// `L^{p,q}` quasi-norm of `f`, exact for step functions.
///
/// For `q < ∞` each rearranged step contributes
/// `v^q (p/q) (end^{q/p} - start^{q/p})`; for `q = ∞` the result is
/// `max v · end^{1/p}` over the rearranged steps.
pub fn lorentz_norm(f: &StepFunction, idx: LorentzIndex) -> f64 {
    let star = decreasing_rearrangement(f);
    let peak = star.values.first().copied().unwrap_or(0.0);
    if peak == 0.0 {
        return 0.0;
    }
    let (p, q) = (idx.p, idx.q);
    if idx.is_weak() {
        return star
            .segments()
            .map(|(_, end, v)| v * end.powf(1.0 / p))
            .fold(0.0, f64::max);
    }
    let ratio = q / p;
    let sum: f64 = star
        .segments()
        .map(|(start, end, v)| (v / peak).powf(q) * power_difference(end, start, ratio))
        .sum();
    peak * (sum / ratio).powf(1.0 / q)
}

/// Direct `(∫ f^p)^{1/p}`, used to cross-check `L^{p,p} = L^p`.
pub fn lp_norm(f: &StepFunction, p: f64) -> f64 {
    let peak = f.values.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let sum: f64 = f
        .segments()
        .map(|(a, b, v)| (v / peak).powf(p) * (b - a))
        .sum();
    peak * sum.powf(1.0 / p)
}

/// Constant in `‖f‖_{p,q2} <= K ‖f‖_{p,q1}` for `q1 <= q2`:
/// `K = (q1/p)^{1/q1 - 1/q2}`.
pub fn inclusion_constant(p: f64, q1: f64, q2: f64) -> f64 {
    let exponent = 1.0 / q1 - if q2.is_infinite() { 0.0 } else { 1.0 / q2 };
    (q1 / p).powf(exponent)
}

/// `∫ f g` over the common refinement of both breakpoint sets.
pub fn holder_pairing(f: &StepFunction, g: &StepFunction) -> f64 {
    let (fb, gb) = (&f.breakpoints, &g.breakpoints);
    let lo = fb[0].max(gb[0]);
    let hi = fb[fb.len() - 1].min(gb[gb.len() - 1]);
    if lo >= hi {
        return 0.0;
    }
    let mut cuts: Vec<f64> = fb
        .iter()
        .chain(gb.iter())
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        while fb[i + 1] <= a {
            i += 1;
        }
        while gb[j + 1] <= a {
            j += 1;
        }
        total += f.values[i] * g.values[j] * (b - a);
    }
    total
}

/// `n + 1` log-uniformly spaced points from `start` to `end`.
pub fn log_grid(start: f64, end: f64, points_per_decade: usize) -> Vec<f64> {
    let decades = (end / start).log10();
    let cells = ((decades * points_per_decade as f64).ceil() as usize).max(1);
    let (l0, l1) = (start.ln(), end.ln());
    let mut grid: Vec<f64> = (0..=cells)
        .map(|i| (l0 + (l1 - l0) * i as f64 / cells as f64).exp())
        .collect();
    grid[0] = start;
    grid[cells] = end;
    grid
}

/// `n` equal cells on `[start, end]`.
pub fn uniform_grid(start: f64, end: f64, cells: usize) -> Vec<f64> {
    let h = (end - start) / cells as f64;
    let mut grid: Vec<f64> = (0..=cells).map(|i| start + h * i as f64).collect();
    grid[cells] = end;
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steps(b: &[f64], v: &[f64]) -> StepFunction {
        StepFunction::new(b.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_malformed_step_functions() {
        assert!(StepFunction::new(vec![0.0, 1.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 1.0], vec![-1.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(StepFunction::new(vec![-1.0, 1.0], vec![1.0]).is_err());
        assert!(StepFunction::new(vec![0.0], vec![]).is_err());
        assert!(StepFunction::new(vec![0.0, f64::INFINITY], vec![1.0]).is_err());
    }

    #[test]
    fn distribution_of_indicator_and_zero() {
        let f = StepFunction::indicator(0.0, 2.0).unwrap();
        assert_eq!(distribution_function(&f, 0.5), 2.0);
        assert_eq!(distribution_function(&f, 1.0), 0.0);
        let zero = steps(&[0.0, 1.0, 5.0], &[0.0, 0.0]);
        assert_eq!(distribution_function(&zero, 0.1), 0.0);
    }

    #[test]
    fn distribution_of_inverse_square_root() {
        // d_f(α) = α^{-2} on a fine grid; oracle counts cells directly.
        let grid = uniform_grid(1e-4, 1.0, 1_000_000);
        let f = StepFunction::sample_midpoint(&grid, |t| t.powf(-0.5)).unwrap();
        let oracle: f64 = grid
            .windows(2)
            .filter(|w| (0.5 * (w[0] + w[1])).powf(-0.5) > 2.0)
            .map(|w| w[1] - w[0])
            .sum();
        let d = distribution_function(&f, 2.0);
        assert!((d - oracle).abs() < 1e-9);
        // {t^{-1/2} > 2} = [1e-4, 1/4)
        assert!((d - 0.2499).abs() < 2e-6);
    }

    #[test]
    fn rearrangement_examples() {
        let f = StepFunction::indicator(1.0, 3.0).unwrap();
        assert_eq!(decreasing_rearrangement(&f), steps(&[0.0, 2.0], &[1.0]));

        let g = steps(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]);
        assert_eq!(
            decreasing_rearrangement(&g),
            steps(&[0.0, 1.0, 2.0, 3.0], &[3.0, 2.0, 1.0])
        );
    }

    #[test]
    fn rearrangement_merges_ties() {
        let f = steps(&[0.0, 1.0, 2.0, 4.0], &[2.0, 1.0, 2.0]);
        assert_eq!(
            decreasing_rearrangement(&f),
            steps(&[0.0, 3.0, 4.0], &[2.0, 1.0])
        );
    }

    #[test]
    fn decreasing_input_is_a_fixed_point_up_to_shift() {
        let grid = uniform_grid(0.0, 10.0, 1000);
        let f = StepFunction::sample_left(&grid, |t| (-t).exp()).unwrap();
        assert_eq!(decreasing_rearrangement(&f), f);

        let shifted: Vec<f64> = grid.iter().map(|t| t + 5.0).collect();
        let g = StepFunction::new(shifted, f.values().to_vec()).unwrap();
        let star = decreasing_rearrangement(&g);
        assert_eq!(star.values(), f.values());
        for (a, b) in star.breakpoints().iter().zip(f.breakpoints()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn indicator_norm_closed_form() {
        let f = StepFunction::indicator(2.0, 5.0).unwrap();
        for &(p, q) in &[(2.0f64, 1.0f64), (2.0, 2.0), (3.0, 1.5), (1.5, 4.0)] {
            let expected = (p / q).powf(1.0 / q) * 3f64.powf(1.0 / p);
            let got = lorentz_norm(&f, LorentzIndex::new(p, q).unwrap());
            assert!((got - expected).abs() <= 1e-12 * expected, "{p} {q}");
        }
        let weak = lorentz_norm(&f, LorentzIndex::weak(2.0).unwrap());
        assert!((weak - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn weak_norm_of_inverse_square_root_tends_to_one() {
        let mut last = 0.0;
        for delta in [1e-2, 1e-4, 1e-6] {
            let grid = log_grid(delta, 1.0, 200);
            // Right-endpoint samples stay below the profile, so the weak norm is <= 1.
            let values = grid[1..].iter().map(|t| t.powf(-0.5)).collect();
            let f = StepFunction::new(grid.clone(), values).unwrap();
            let w = lorentz_norm(&f, LorentzIndex::weak(2.0).unwrap());
            assert!(w <= 1.0 + 1e-12);
            assert!(w >= last);
            last = w;
        }
        assert!((last - 1.0).abs() < 1e-2);
    }

    #[test]
    fn l21_norm_of_exponential() {
        for a in [0.5, 1.0, 2.0] {
            let grid = uniform_grid(0.0, 40.0 / a, 200_000);
            let f = StepFunction::sample_midpoint(&grid, |t| (-a * t).exp()).unwrap();
            let norm = lorentz_norm(&f, LorentzIndex::new(2.0, 1.0).unwrap());
            let expected = (std::f64::consts::PI / a).sqrt();
            assert!((norm - expected).abs() < 1e-4 * expected, "a = {a}: {norm}");
        }
    }

    #[test]
    fn pairing_examples() {
        let f = StepFunction::indicator(0.0, 1.0).unwrap();
        assert_eq!(holder_pairing(&f, &f), 1.0);
        let zero = steps(&[0.0, 0.5, 2.0], &[0.0, 0.0]);
        assert_eq!(holder_pairing(&f, &zero), 0.0);
        let far = StepFunction::indicator(3.0, 4.0).unwrap();
        assert_eq!(holder_pairing(&f, &far), 0.0);
        let g = steps(&[0.5, 0.75, 3.0], &[2.0, 4.0]);
        assert!((holder_pairing(&f, &g) - (0.25 * 2.0 + 0.25 * 4.0)).abs() < 1e-15);
    }

    #[test]
    fn duality_ratio_for_exponential_against_weak_profile() {
        let grid = log_grid(1e-6, 50.0, 100);
        let f = StepFunction::sample_left(&grid, |t| (-t).exp()).unwrap();
        let g = StepFunction::sample_left(&grid, |t| t.powf(-0.5)).unwrap();
        let pairing = holder_pairing(&f, &g);
        let f21 = lorentz_norm(&f, LorentzIndex::new(2.0, 1.0).unwrap());
        let g2inf = lorentz_norm(&g, LorentzIndex::weak(2.0).unwrap());
        let ratio = pairing / (f21 * g2inf);
        assert!(ratio <= 1.0 && ratio > 0.5, "{ratio}");
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let f = steps(&[0.0, 0.1, 1.0 / 3.0, 7.25], &[std::f64::consts::PI, 0.0, 1e-300]);
        let text = f.to_csv();
        assert!(text.starts_with("breakpoint,value\n"));
        assert!(text.ends_with(",\n"));
        assert_eq!(StepFunction::from_csv(&text).unwrap(), f);
    }

    #[test]
    fn csv_errors_are_reported() {
        assert!(StepFunction::from_csv("t,v\n0,1\n1,\n").is_err());
        assert!(StepFunction::from_csv("breakpoint,value\n0,1\n1,2\n").is_err());
        assert!(StepFunction::from_csv("breakpoint,value\n0,x\n1,\n").is_err());
        assert!(StepFunction::from_csv("breakpoint,value\n0,1\n1,\n2,\n").is_err());
    }

    #[test]
    fn index_validation() {
        assert!(LorentzIndex::new(1.0, 2.0).is_err());
        assert!(LorentzIndex::new(2.0, 0.5).is_err());
        assert!(LorentzIndex::new(2.0, f64::NAN).is_err());
        assert!(LorentzIndex::weak(2.0).unwrap().is_weak());
    }
}
