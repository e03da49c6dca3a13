//! The odd Jacobi theta function θ₁₁ and the two quasi-periodic functions
//! built from it, ζ₁₁ = θ₁₁'/θ₁₁ and
//!
//! ```text
//! w_c(z) = θ₁₁'(0) θ₁₁(z − c) / (θ₁₁(z) θ₁₁(−c)),
//! ```
//!
//! together with their Taylor jets in every argument.
//!
//! Arguments are first reduced to the rectangle `[0, 1) × [0, Im τ)`; the
//! series is summed there and the exact quasi-periodicity factors are applied
//! afterwards. Jets are obtained by differentiating the series term by term,
//! never by finite differences.

mod jet;

pub use jet::{BivariateJet, ScalarJet};

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use thiserror::Error;

/// Highest jet order accepted by the public evaluators.
pub const MAX_ORDER: usize = 6;
/// Default relative cutoff for the last retained series term.
pub const DEFAULT_EPS_TERM: f64 = 1e-16;
/// Default hard cap on the number of series terms.
pub const DEFAULT_N_MAX: usize = 64;
/// `|θ₁₁| < POLE_FLOOR · |θ₁₁'(0)|` is reported as a pole.
pub const POLE_FLOOR: f64 = 1e-12;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("modulus τ = {0} must have strictly positive imaginary part")]
    InvalidModulus(C64),
    #[error("theta series did not converge within {terms} terms (|q| = {q_abs})")]
    NonConvergence { terms: usize, q_abs: f64 },
    #[error("jet order {requested} exceeds the supported maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },
    #[error("{argument} = {value} sits on the pole at lattice point {m}τ + {n}")]
    Pole {
        argument: PoleArgument,
        value: C64,
        m: i64,
        n: i64,
    },
}

/// Which argument of a function hit a zero of θ₁₁.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleArgument {
    Z,
    C,
}

impl std::fmt::Display for PoleArgument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PoleArgument::Z => write!(f, "z"),
            PoleArgument::C => write!(f, "c"),
        }
    }
}

/// Modulus of the elliptic curve together with the series truncation policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularData {
    tau: C64,
    q: C64,
    eps_term: f64,
    n_max: usize,
    theta_prime0: C64,
}

impl ModularData {
    pub fn new(tau: C64) -> Result<Self, EllipticError> {
        Self::with_truncation(tau, DEFAULT_EPS_TERM, DEFAULT_N_MAX)
    }

    pub fn with_truncation(tau: C64, eps_term: f64, n_max: usize) -> Result<Self, EllipticError> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(EllipticError::InvalidModulus(tau));
        }
        let q = (2.0 * PI * I * tau).exp();
        let mut md = Self {
            tau,
            q,
            eps_term,
            n_max: n_max.max(2),
            theta_prime0: C64::new(0.0, 0.0),
        };
        md.theta_prime0 = theta_series(&md, C64::new(0.0, 0.0), 1)?[1];
        Ok(md)
    }

    /// Modulus from the nome `q = e^{2πiτ}` (principal branch of the logarithm).
    pub fn from_nome(q: C64) -> Result<Self, EllipticError> {
        Self::new(q.ln() / (2.0 * PI * I))
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    pub fn eps_term(&self) -> f64 {
        self.eps_term
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// θ₁₁'(0), the literal derivative of the defining series at the origin.
    pub fn theta_prime0(&self) -> C64 {
        self.theta_prime0
    }
}

/// `z = z0 + m·τ + n` with `z0` in the fundamental rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeReduction {
    pub z0: C64,
    pub m: i64,
    pub n: i64,
}

impl LatticeReduction {
    pub fn recompose(&self, md: &ModularData) -> C64 {
        self.z0 + md.tau * self.m as f64 + self.n as f64
    }

    /// Lattice point (as `(m, n)`) closest to the reduced argument.
    pub fn nearest_lattice_point(&self, md: &ModularData) -> (i64, i64) {
        let mut best = (self.m, self.n);
        let mut best_d = f64::INFINITY;
        for a in 0..=1 {
            for b in 0..=1 {
                let d = (self.z0 - md.tau * a as f64 - b as f64).norm();
                if d < best_d {
                    best_d = d;
                    best = (self.m + a, self.n + b);
                }
            }
        }
        best
    }
}

/// Distance from `z` to the nearest point of `Z + Zτ`.
pub fn lattice_distance(z: C64, md: &ModularData) -> f64 {
    let (m, n) = reduce_to_cell(z, md).nearest_lattice_point(md);
    (z - md.tau * m as f64 - n as f64).norm()
}

pub fn reduce_to_cell(z: C64, md: &ModularData) -> LatticeReduction {
    let tau = md.tau;
    let mut m = (z.im / tau.im).floor() as i64;
    let mut z1 = z - tau * m as f64;
    // floor can land one cell off after the subtraction rounds.
    if z1.im < 0.0 {
        m -= 1;
        z1 = z - tau * m as f64;
    } else if z1.im >= tau.im {
        m += 1;
        z1 = z - tau * m as f64;
    }
    let mut n = z1.re.floor() as i64;
    let mut z0 = z1 - n as f64;
    if z0.re < 0.0 {
        n -= 1;
        z0 = z1 - n as f64;
    } else if z0.re >= 1.0 {
        n += 1;
        z0 = z1 - n as f64;
    }
    if z0.im < 0.0 {
        z0.im = 0.0;
    }
    LatticeReduction { z0, m, n }
}

/// Raw derivatives θ₁₁^{(d)}(z), d = 0..=max_deriv, by direct summation.
fn theta_series(md: &ModularData, z: C64, max_deriv: usize) -> Result<Vec<C64>, EllipticError> {
    let mut sums = vec![C64::new(0.0, 0.0); max_deriv + 1];
    let mut abs_sums = vec![0.0f64; max_deriv + 1];
    let shift = z + 0.5;
    for t in 0..md.n_max {
        // n = 0, -1, 1, -2, 2, ...; each pair shares |n + 1/2|.
        let n = if t % 2 == 0 { (t / 2) as f64 } else { -(((t + 1) / 2) as f64) };
        let k = n + 0.5;
        let e = (PI * I * md.tau * (k * k) + 2.0 * PI * I * shift * k).exp();
        let factor = 2.0 * PI * I * k;
        let mut term = e;
        let mut small = true;
        for d in 0..=max_deriv {
            if d > 0 {
                term *= factor;
            }
            sums[d] += term;
            abs_sums[d] += term.norm();
            if term.norm() >= md.eps_term * abs_sums[d] {
                small = false;
            }
        }
        if t % 2 == 1 && small {
            return Ok(sums);
        }
    }
    Err(EllipticError::NonConvergence {
        terms: md.n_max,
        q_abs: md.q.norm(),
    })
}

fn check_order(order: usize) -> Result<(), EllipticError> {
    if order > MAX_ORDER {
        return Err(EllipticError::OrderTooHigh {
            requested: order,
            max: MAX_ORDER,
        });
    }
    Ok(())
}

/// Series jet at the reduced point together with the reduction, no prefactor.
fn reduced_theta(
    z: C64,
    md: &ModularData,
    order: usize,
) -> Result<(LatticeReduction, ScalarJet), EllipticError> {
    let red = reduce_to_cell(z, md);
    let derivs = theta_series(md, red.z0, order)?;
    Ok((red, ScalarJet::from_derivatives(z, &derivs)))
}

fn is_pole_value(v: C64, md: &ModularData) -> bool {
    v.norm() < POLE_FLOOR * md.theta_prime0.norm()
}

/// Prefactor relating θ₁₁(z) to θ₁₁(z0): `(−1)^{m+n} exp(−πi m²τ − 2πi m z0)`.
fn quasi_period_factor(red: &LatticeReduction, center: C64, md: &ModularData, order: usize) -> ScalarJet {
    let m = red.m as f64;
    let exponent = -PI * I * m * m * md.tau - 2.0 * PI * I * m * red.z0;
    let sign = if (red.m + red.n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    ScalarJet::exp_linear(center, exponent, -2.0 * PI * I * m, order).scale(C64::new(sign, 0.0))
}

fn theta_jet_unchecked(z: C64, md: &ModularData, order: usize) -> Result<(LatticeReduction, ScalarJet), EllipticError> {
    let (red, core) = reduced_theta(z, md, order)?;
    let pref = quasi_period_factor(&red, z, md, order);
    Ok((red, &pref * &core))
}

/// Jet of θ₁₁ in `z` up to `order` (≤ [`MAX_ORDER`]).
pub fn theta11(z: C64, md: &ModularData, order: usize) -> Result<ScalarJet, EllipticError> {
    check_order(order)?;
    Ok(theta_jet_unchecked(z, md, order)?.1)
}

/// Jet of ζ₁₁ = d/dz log θ₁₁ in `z` up to `order`.
pub fn zeta11(z: C64, md: &ModularData, order: usize) -> Result<ScalarJet, EllipticError> {
    check_order(order)?;
    let (red, th) = reduced_theta(z, md, order + 1)?;
    if is_pole_value(th.value(), md) {
        let (m, n) = red.nearest_lattice_point(md);
        return Err(EllipticError::Pole {
            argument: PoleArgument::Z,
            value: z,
            m,
            n,
        });
    }
    let mut zeta = th.differentiate().div(&th.truncate(order));
    zeta.coeffs[0] -= 2.0 * PI * I * red.m as f64;
    Ok(zeta)
}

/// Bivariate jet of `w_c(z)` in `(c, z)` with `order_c + order_z ≤ MAX_ORDER`.
pub fn w(
    c: C64,
    z: C64,
    md: &ModularData,
    order_c: usize,
    order_z: usize,
) -> Result<BivariateJet, EllipticError> {
    check_order(order_c + order_z)?;
    let total = order_c + order_z;

    let (rz, theta_z) = reduced_theta(z, md, order_z)?;
    if is_pole_value(theta_z.value(), md) {
        let (m, n) = rz.nearest_lattice_point(md);
        return Err(EllipticError::Pole {
            argument: PoleArgument::Z,
            value: z,
            m,
            n,
        });
    }
    let rc = reduce_to_cell(c, md);
    let (c0, z0) = (rc.z0, rz.z0);

    // θ₁₁(−c0) as a function of c: the reduced series decides the pole test.
    let (rneg, theta_negc_core) = reduced_theta(-c0, md, order_c)?;
    if is_pole_value(theta_negc_core.value(), md) {
        let (m, n) = rc.nearest_lattice_point(md);
        return Err(EllipticError::Pole {
            argument: PoleArgument::C,
            value: c,
            m,
            n,
        });
    }
    let theta_negc = &quasi_period_factor(&rneg, -c0, md, order_c) * &theta_negc_core;
    // chain rule for x = −c
    let denom_c = ScalarJet::new(
        c,
        theta_negc
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, v)| if i % 2 == 0 { *v } else { -*v })
            .collect(),
    );

    // θ₁₁(z0 − c0) as a function of (c, z).
    let (_, theta_diff) = theta_jet_unchecked(z0 - c0, md, total)?;
    let mut numer = BivariateJet::zeros(c, z, order_c, order_z);
    for i in 0..=order_c {
        for j in 0..=order_z {
            let d = theta_diff.derivative(i + j);
            let fi: f64 = (1..=i).map(|k| k as f64).product();
            let fj: f64 = (1..=j).map(|k| k as f64).product();
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            numer.coeffs[i][j] = d * sign / (fi * fj);
        }
    }

    let inv_z = BivariateJet::from_z(&theta_z.recip(), c, order_c, order_z);
    let inv_c = BivariateJet::from_c(&denom_c.recip(), z, order_c, order_z);
    let core = numer.mul(&inv_z).mul(&inv_c).scale(md.theta_prime0);

    // w_c(z) = e^{2πi m c} w_c(z0) and w_c(z0) = e^{2πi p z0} w_{c0}(z0).
    let shift_c = ScalarJet::exp_linear(c, 2.0 * PI * I * rz.m as f64 * c, 2.0 * PI * I * rz.m as f64, order_c);
    let shift_z = ScalarJet::exp_linear(z, 2.0 * PI * I * rc.m as f64 * z0, 2.0 * PI * I * rc.m as f64, order_z);
    Ok(core
        .mul(&BivariateJet::from_c(&shift_c, z, order_c, order_z))
        .mul(&BivariateJet::from_z(&shift_z, c, order_c, order_z)))
}

/// Jet of `w_c(z)` in `c` at fixed `z`.
pub fn w_in_c(c: C64, z: C64, md: &ModularData, order_c: usize) -> Result<ScalarJet, EllipticError> {
    Ok(w(c, z, md, order_c, 0)?.c_slice())
}
