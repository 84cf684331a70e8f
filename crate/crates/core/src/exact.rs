//! Exact floating-point summation.
//!
//! Partial sums are kept as a list of non-overlapping doubles (Shewchuk's
//! expansion arithmetic), so the represented value is the exact real sum of
//! every input. [`ExactSum::value`] rounds that real to the nearest double,
//! ties to even.

#[derive(Debug, Clone, Default)]
pub(crate) struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    /// Adds `b - a` without rounding the difference.
    pub(crate) fn add_difference(&mut self, b: f64, a: f64) {
        self.add(b);
        self.add(-a);
    }

    /// The exact sum rounded to nearest.
    pub(crate) fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Half-way case: the remaining partials decide the rounding direction.
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

#[cfg(test)]
pub(crate) fn exact_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = ExactSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}
