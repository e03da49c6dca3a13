use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{build_laplacian, build_nabla, build_potential, check_in_s, GaudinError, GaudinProblem};
use crate::diffop::{DiffOpError, DiffOperator, MatrixJet};
use crate::elliptic::{EllipticError, ModularData, ScalarJet};
use crate::liealg::RootSystem;

/// The Weyl–Kac denominator and its logarithmic derivatives at one point, as
/// 1×1 jets in the Cartan coordinates.
#[derive(Debug, Clone)]
pub struct PiJets {
    pub value: C64,
    pub pi: MatrixJet,
    pub inv: MatrixJet,
    /// Jet of `log Π` (branch fixed only up to an additive constant).
    pub log: MatrixJet,
    /// Jet of `∂_τ log Π`.
    pub dtau_log: MatrixJet,
}

impl PiJets {
    /// Jet of `∂_{ξ_r} log Π`; one order lower than [`PiJets::log`].
    pub fn dlog(&self, r: usize) -> MatrixJet {
        let mut e = vec![0; self.log.nvars()];
        e[r] = 1;
        self.log.derivative_jet(&e).expect("log jet has order ≥ 1")
    }
}

struct RootFactor {
    prod: ScalarJet,
    log: ScalarJet,
    dtau: ScalarJet,
}

/// `Π_{n≥0} (1 − q^{n+1} e^{2πi x})` around `x0` together with its log and τ-log-derivative.
fn q_factor(x0: C64, md: &ModularData, order: usize) -> Result<RootFactor, EllipticError> {
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let log_q = two_pi_i * md.tau();
    let one = ScalarJet::constant(x0, C64::new(1.0, 0.0), order);
    let mut prod = one.clone();
    let mut log = ScalarJet::constant(x0, C64::new(0.0, 0.0), order);
    let mut dtau = log.clone();
    for n in 0..md.n_max() {
        let k = (n + 1) as f64;
        let y = ScalarJet::exp_linear(x0, log_q * k + two_pi_i * x0, two_pi_i, order);
        let small = y.value().norm();
        let f = &one - &y;
        prod = &prod * &f;
        log = &log + &f.ln();
        // ∂_τ log(1 − y) = −2πi (n+1) y / (1 − y)
        dtau = &dtau + &y.div(&f).scale(-two_pi_i * k);
        if small < md.eps_term() {
            return Ok(RootFactor { prod, log, dtau });
        }
    }
    Err(EllipticError::NonConvergence {
        terms: md.n_max(),
        q_abs: md.q().norm(),
    })
}

/// `log(q^{dim g/24} (q;q)_∞^l)` and its τ-derivative.
fn prefactor(md: &ModularData, rs: &RootSystem) -> Result<(C64, C64, C64), EllipticError> {
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let l = rs.rank() as f64;
    let q = md.q();
    let mut value = (two_pi_i * md.tau() * (rs.dim() as f64 / 24.0)).exp();
    let mut log = two_pi_i * md.tau() * (rs.dim() as f64 / 24.0);
    let mut dtau = two_pi_i * (rs.dim() as f64 / 24.0);
    let mut qn = C64::new(1.0, 0.0);
    for n in 1..=md.n_max() {
        qn *= q;
        let f = C64::new(1.0, 0.0) - qn;
        value *= f.powf(l);
        log += f.ln() * l;
        dtau += -two_pi_i * (n as f64) * qn / f * l;
        if qn.norm() < md.eps_term() {
            return Ok((value, log, dtau));
        }
    }
    Err(EllipticError::NonConvergence {
        terms: md.n_max(),
        q_abs: q.norm(),
    })
}

/// Evaluates `Π(H, τ)` with jets of order `order` in ξ.
pub fn weyl_kac_pi(
    h: &[C64],
    md: &ModularData,
    rs: &RootSystem,
    order: usize,
) -> Result<PiJets, GaudinError> {
    check_in_s(rs, h)?;
    let (c_val, c_log, c_dtau) = prefactor(md, rs)?;
    let i_pi = C64::new(0.0, PI);
    let mut pi = MatrixJet::scalar_constant(h, order, c_val);
    let mut inv = MatrixJet::scalar_constant(h, order, c_val.inv());
    let mut log = MatrixJet::scalar_constant(h, order, c_log);
    let mut dtau = MatrixJet::scalar_constant(h, order, c_dtau);
    let chart = |k: usize| -> Vec<C64> { rs.root(k).chart.iter().map(|v| C64::new(*v, 0.0)).collect() };
    for k in 0..rs.num_positive() {
        let x0 = rs.root_value(k, h);
        let s = &ScalarJet::exp_linear(x0, i_pi * x0, i_pi, order)
            - &ScalarJet::exp_linear(x0, -i_pi * x0, -i_pi, order);
        let slope = chart(k);
        pi = pi.mul(&MatrixJet::from_univariate(h, &s, &slope))?;
        inv = inv.mul(&MatrixJet::from_univariate(h, &s.recip(), &slope))?;
        log = log.add(&MatrixJet::from_univariate(h, &s.ln(), &slope))?;
    }
    for k in 0..rs.roots().len() {
        let x0 = rs.root_value(k, h);
        let f = q_factor(x0, md, order)?;
        let slope = chart(k);
        pi = pi.mul(&MatrixJet::from_univariate(h, &f.prod, &slope))?;
        inv = inv.mul(&MatrixJet::from_univariate(h, &f.prod.recip(), &slope))?;
        log = log.add(&MatrixJet::from_univariate(h, &f.log, &slope))?;
        dtau = dtau.add(&MatrixJet::from_univariate(h, &f.dtau, &slope))?;
    }
    Ok(PiJets {
        value: pi.value()[(0, 0)],
        pi,
        inv,
        log,
        dtau_log: dtau,
    })
}

/// Which expression of the conjugated transfer matrix to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TildeRoute {
    /// `Π⁻¹ ∘ τ̂(u) ∘ Π` by operator composition.
    Conjugation,
    /// `½Σ∇² + Σ(∂_r log Π)∇_r + potential + 2πi h∨ ∂_τ log Π`.
    Explicit,
}

fn scalar_multiplication<F>(nvars: usize, dim: usize, f: F) -> DiffOperator
where
    F: Fn(&[C64], usize) -> Result<MatrixJet, DiffOpError> + Send + Sync + 'static,
{
    DiffOperator::multiplication(nvars, dim, usize::MAX, move |at, order| {
        MatrixJet::identity(at, order, dim).mul(&f(at, order)?)
    })
}

/// `g⁻¹ ∘ op ∘ g` for a scalar function `g` given by the jets of `g` and `g⁻¹`.
pub fn conjugate<F, G>(op: &DiffOperator, g: F, g_inv: G) -> Result<DiffOperator, DiffOpError>
where
    F: Fn(&[C64], usize) -> Result<MatrixJet, DiffOpError> + Send + Sync + 'static,
    G: Fn(&[C64], usize) -> Result<MatrixJet, DiffOpError> + Send + Sync + 'static,
{
    let right = scalar_multiplication(op.nvars, op.dim, g);
    let left = scalar_multiplication(op.nvars, op.dim, g_inv);
    left.compose(&op.compose(&right)?)
}

fn pi_source(
    p: &GaudinProblem,
    pick: fn(PiJets, usize) -> MatrixJet,
    extra_order: usize,
) -> impl Fn(&[C64], usize) -> Result<MatrixJet, DiffOpError> + Send + Sync + 'static {
    let rs = p.rs.clone();
    let md = p.md.clone();
    move |at: &[C64], order: usize| {
        let jets = weyl_kac_pi(at, &md, &rs, order + extra_order).map_err(|e| match e {
            GaudinError::DiffOp(d) => d,
            GaudinError::Elliptic(el) => DiffOpError::Elliptic(el),
            other => DiffOpError::Domain(other.to_string()),
        })?;
        Ok(pick(jets, order))
    }
}

/// The conjugated transfer matrix `τ̃(u)`.
pub fn build_tilde_transfer(
    p: &GaudinProblem,
    u: C64,
    route: TildeRoute,
) -> Result<DiffOperator, GaudinError> {
    let l = p.rank();
    let dim = p.dim();
    match route {
        TildeRoute::Conjugation => {
            let tau_hat = super::build_transfer(p, u)?;
            let g = pi_source(p, |j, _| j.pi, 0);
            let g_inv = pi_source(p, |j, _| j.inv, 0);
            Ok(conjugate(&tau_hat, g, g_inv)?)
        }
        TildeRoute::Explicit => {
            let hv = p.rs.dual_coxeter() as f64;
            let mut terms = vec![
                (C64::new(1.0, 0.0), build_laplacian(p, u)?),
                (C64::new(1.0, 0.0), build_potential(p, u)?),
            ];
            for r in 0..l {
                let dlog = scalar_multiplication(l, dim, {
                    let src = pi_source(p, |j, _| j.log, 1);
                    move |at, order| {
                        let log = src(at, order)?;
                        let mut e = vec![0; log.nvars()];
                        e[r] = 1;
                        log.derivative_jet(&e)
                    }
                });
                terms.push((C64::new(1.0, 0.0), dlog.compose(&build_nabla(p, r, u)?)?));
            }
            let heat = scalar_multiplication(l, dim, pi_source(p, |j, _| j.dtau_log, 0));
            terms.push((C64::new(0.0, 2.0 * PI * hv), heat));
            Ok(DiffOperator::linear_combination(&terms)?)
        }
    }
}
