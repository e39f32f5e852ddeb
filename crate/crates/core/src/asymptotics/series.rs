//! Power series in a small parameter `ε`, truncated after `ε²`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Series2 {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Series2 {
    pub const fn new(c0: f64, c1: f64, c2: f64) -> Self {
        Self { c0, c1, c2 }
    }

    pub const fn constant(c0: f64) -> Self {
        Self::new(c0, 0.0, 0.0)
    }

    /// `ε · self`
    pub fn shift(self) -> Self {
        Self::new(0.0, self.c0, self.c1)
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(k * self.c0, k * self.c1, k * self.c2)
    }

    /// `ln(self)`; needs `c0 > 0`.
    pub fn ln(self) -> Self {
        let (a, b, c) = (self.c0, self.c1, self.c2);
        Self::new(a.ln(), b / a, c / a - b * b / (2.0 * a * a))
    }

    /// `self · ln(self)`
    pub fn xlnx(self) -> Self {
        self * self.ln()
    }

    /// Bernoulli entropy `−s ln s − (1−s) ln(1−s)` of the series `s`.
    pub fn bernoulli_entropy(self) -> Self {
        -(self.xlnx() + (Series2::constant(1.0) - self).xlnx())
    }
}

impl Add for Series2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.c0 + o.c0, self.c1 + o.c1, self.c2 + o.c2)
    }
}

impl Sub for Series2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for Series2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Series2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.c0 * o.c0,
            self.c0 * o.c1 + self.c1 * o.c0,
            self.c0 * o.c2 + self.c1 * o.c1 + self.c2 * o.c0,
        )
    }
}
