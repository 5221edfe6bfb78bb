//! Compensated (Neumaier) summation.
//!
//! Weighted sums over sample points are the numerical backbone of every
//! objective and gradient. They accumulate in fixed point order with error
//! compensation so that results are reproducible bit-for-bit and accurate to
//! a few ulps regardless of grid size.

/// Running Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    /// Empty sum.
    pub const fn new() -> Self {
        CompensatedSum {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    /// Add one term.
    #[inline(always)]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if crate::math::abs(self.sum) >= crate::math::abs(value) {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Fold another partial sum into this one (in argument order).
    #[inline]
    pub fn merge(&mut self, other: CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    /// Current total.
    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Sum a slice with compensation.
pub fn compensated_total(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}
