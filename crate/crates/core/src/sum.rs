//! Compensated accumulation.
//!
//! All quadratures in the crate reduce through these accumulators in a fixed
//! order, so results are reproducible bit for bit however the surrounding
//! pixel loop is scheduled.

use crate::algebra::DiracSpinor;
use crate::C64;

/// Kahan–Babuška (Neumaier) running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of complex values; real and imaginary parts are tracked
/// independently.
#[derive(Debug, Default, Clone, Copy)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: C64) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    #[inline]
    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// Componentwise compensated sum of spinors.
#[derive(Debug, Default, Clone, Copy)]
pub struct SpinorSum {
    parts: [ComplexSum; 4],
}

impl SpinorSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: &DiracSpinor) {
        for (acc, c) in self.parts.iter_mut().zip(value.components()) {
            acc.add(*c);
        }
    }

    pub fn value(&self) -> DiracSpinor {
        DiracSpinor::new(self.parts.map(|p| p.value()))
    }
}

/// Compensated sum of a slice in index order.
pub fn sum_f64(values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    values.iter().for_each(|&v| acc.add(v));
    acc.value()
}
