//! Truncated Taylor expansions in one and two complex variables.
//!
//! Coefficients are stored normalised: entry `k` holds `f^(k)(center) / k!`.

use num_complex::Complex64 as C64;
use std::ops::{Add, Mul, Neg, Sub};

/// Univariate truncated Taylor expansion of a holomorphic function.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarJet {
    pub center: C64,
    pub coeffs: Vec<C64>,
}

impl ScalarJet {
    pub fn new(center: C64, coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet carries at least its value");
        Self { center, coeffs }
    }

    /// Builds a jet from raw derivatives `f, f', f'', ...`.
    pub fn from_derivatives(center: C64, derivs: &[C64]) -> Self {
        let mut fact = 1.0;
        let coeffs = derivs
            .iter()
            .enumerate()
            .map(|(k, d)| {
                if k > 0 {
                    fact *= k as f64;
                }
                d / fact
            })
            .collect();
        Self::new(center, coeffs)
    }

    pub fn constant(center: C64, value: C64, order: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); order + 1];
        coeffs[0] = value;
        Self { center, coeffs }
    }

    /// Jet of `exp(v + slope·(x − center))`, with `v` supplied as the exponent at the center.
    pub fn exp_linear(center: C64, exponent: C64, slope: C64, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut c = exponent.exp();
        for k in 0..=order {
            if k > 0 {
                c = c * slope / k as f64;
            }
            coeffs.push(c);
        }
        Self { center, coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    /// `k`-th derivative at the center.
    pub fn derivative(&self, k: usize) -> C64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeffs[k] * fact
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.center, self.coeffs[..=order.min(self.order())].to_vec())
    }

    /// Jet of the derivative function; one order is lost.
    pub fn differentiate(&self) -> Self {
        if self.order() == 0 {
            return Self::constant(self.center, C64::new(0.0, 0.0), 0);
        }
        let coeffs = (1..=self.order())
            .map(|k| self.coeffs[k] * k as f64)
            .collect();
        Self::new(self.center, coeffs)
    }

    /// Primitive with the given constant term; one order is gained.
    pub fn integrate(&self, constant: C64) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(constant);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / (k + 1) as f64),
        );
        Self::new(self.center, coeffs)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.center, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn recip(&self) -> Self {
        let n = self.coeffs.len();
        let a0 = self.coeffs[0];
        let mut out = vec![C64::new(0.0, 0.0); n];
        out[0] = a0.inv();
        for k in 1..n {
            let mut s = C64::new(0.0, 0.0);
            for i in 1..=k {
                s += self.coeffs[i] * out[k - i];
            }
            out[k] = -s / a0;
        }
        Self::new(self.center, out)
    }

    pub fn div(&self, other: &Self) -> Self {
        self * &other.recip()
    }

    pub fn exp(&self) -> Self {
        // f' = g' f, solved coefficientwise.
        let n = self.coeffs.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        out[0] = self.coeffs[0].exp();
        for k in 1..n {
            let mut s = C64::new(0.0, 0.0);
            for i in 1..=k {
                s += self.coeffs[i] * i as f64 * out[k - i];
            }
            out[k] = s / k as f64;
        }
        Self::new(self.center, out)
    }

    /// Principal-branch logarithm; higher coefficients are branch independent.
    pub fn ln(&self) -> Self {
        if self.order() == 0 {
            return Self::constant(self.center, self.coeffs[0].ln(), 0);
        }
        let d = self.differentiate().div(&self.truncate(self.order() - 1));
        d.integrate(self.coeffs[0].ln())
    }

    /// Evaluates the truncated polynomial at `x`.
    pub fn eval(&self, x: C64) -> C64 {
        let dx = x - self.center;
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * dx + c)
    }
}

impl Mul for &ScalarJet {
    type Output = ScalarJet;
    fn mul(self, rhs: &ScalarJet) -> ScalarJet {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            for (j, b) in rhs.coeffs.iter().take(n - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        ScalarJet::new(self.center, out)
    }
}

impl Add for &ScalarJet {
    type Output = ScalarJet;
    fn add(self, rhs: &ScalarJet) -> ScalarJet {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        ScalarJet::new(
            self.center,
            (0..n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect(),
        )
    }
}

impl Sub for &ScalarJet {
    type Output = ScalarJet;
    fn sub(self, rhs: &ScalarJet) -> ScalarJet {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        ScalarJet::new(
            self.center,
            (0..n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect(),
        )
    }
}

impl Neg for &ScalarJet {
    type Output = ScalarJet;
    fn neg(self) -> ScalarJet {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Bivariate truncated Taylor expansion in `(c, z)` with independent orders.
///
/// `coeffs[i][j]` is `∂_c^i ∂_z^j f / (i! j!)` at `(c_center, z_center)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariateJet {
    pub c_center: C64,
    pub z_center: C64,
    pub coeffs: Vec<Vec<C64>>,
}

impl BivariateJet {
    pub fn zeros(c_center: C64, z_center: C64, order_c: usize, order_z: usize) -> Self {
        Self {
            c_center,
            z_center,
            coeffs: vec![vec![C64::new(0.0, 0.0); order_z + 1]; order_c + 1],
        }
    }

    pub fn order_c(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn order_z(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0][0]
    }

    /// Embeds a jet in `c` alone.
    pub fn from_c(jet: &ScalarJet, z_center: C64, order_c: usize, order_z: usize) -> Self {
        let mut out = Self::zeros(jet.center, z_center, order_c, order_z);
        for (i, row) in out.coeffs.iter_mut().enumerate() {
            row[0] = jet.coeffs.get(i).copied().unwrap_or_default();
        }
        out
    }

    /// Embeds a jet in `z` alone.
    pub fn from_z(jet: &ScalarJet, c_center: C64, order_c: usize, order_z: usize) -> Self {
        let mut out = Self::zeros(c_center, jet.center, order_c, order_z);
        for j in 0..=order_z {
            out.coeffs[0][j] = jet.coeffs.get(j).copied().unwrap_or_default();
        }
        out
    }

    /// Jet in `c` at fixed `z = z_center` (the `j = 0` column).
    pub fn c_slice(&self) -> ScalarJet {
        ScalarJet::new(self.c_center, self.coeffs.iter().map(|row| row[0]).collect())
    }

    /// Jet in `z` at fixed `c = c_center`.
    pub fn z_slice(&self) -> ScalarJet {
        ScalarJet::new(self.z_center, self.coeffs[0].clone())
    }

    /// Mixed partial `∂_c^i ∂_z^j` at the center.
    pub fn derivative(&self, i: usize, j: usize) -> C64 {
        let fi: f64 = (1..=i).map(|k| k as f64).product();
        let fj: f64 = (1..=j).map(|k| k as f64).product();
        self.coeffs[i][j] * fi * fj
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let oc = self.order_c().min(rhs.order_c());
        let oz = self.order_z().min(rhs.order_z());
        let mut out = Self::zeros(self.c_center, self.z_center, oc, oz);
        for i1 in 0..=oc {
            for j1 in 0..=oz {
                let a = self.coeffs[i1][j1];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for i2 in 0..=(oc - i1) {
                    for j2 in 0..=(oz - j1) {
                        out.coeffs[i1 + i2][j1 + j2] += a * rhs.coeffs[i2][j2];
                    }
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Self {
        let (oc, oz) = (self.order_c(), self.order_z());
        let a00 = self.coeffs[0][0];
        let mut out = Self::zeros(self.c_center, self.z_center, oc, oz);
        for k in 0..=oc {
            for l in 0..=oz {
                if k == 0 && l == 0 {
                    out.coeffs[0][0] = a00.inv();
                    continue;
                }
                let mut s = C64::new(0.0, 0.0);
                for i in 0..=k {
                    for j in 0..=l {
                        if i == 0 && j == 0 {
                            continue;
                        }
                        s += self.coeffs[i][j] * out.coeffs[k - i][l - j];
                    }
                }
                out.coeffs[k][l] = -s / a00;
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for row in &mut out.coeffs {
            for c in row {
                *c *= s;
            }
        }
        out
    }
}
