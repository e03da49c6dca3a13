//! Numerical checks shared by the subcommands and the acceptance suite.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use fgaudin::bethe::{BetheConfig, BetheError, BetheVector};
use fgaudin::diffop::{DiffOperator, MultiIndex};
use fgaudin::elliptic::{lattice_distance, theta11, w, zeta11, EllipticError, ModularData};
use fgaudin::gaudin::{build_tilde_transfer, weyl_kac_pi, GaudinError, GaudinProblem, TildeRoute};
use fgaudin::liealg::RootSystem;
use fgaudin::C64;
use nalgebra::DMatrix;
use rand::Rng;

/// Step of the five-point stencils.
pub const FD_STEP: f64 = 1e-3;

/// Fourth-order central first derivative.
pub fn fd1<F: Fn(C64) -> Result<C64, E>, E>(f: F, x: C64, h: f64) -> Result<C64, E> {
    let h = C64::new(h, 0.0);
    Ok((-f(x + h * 2.0)? + f(x + h)? * 8.0 - f(x - h)? * 8.0 + f(x - h * 2.0)?) / (h * 12.0))
}

/// Fourth-order central second derivative.
pub fn fd2<F: Fn(C64) -> Result<C64, E>, E>(f: F, x: C64, h: f64) -> Result<C64, E> {
    Ok((-f(x + 2.0 * h)? + f(x + h)? * 16.0 - f(x)? * 30.0 + f(x - h)? * 16.0 - f(x - 2.0 * h)?)
        / (12.0 * h * h))
}

fn rel(a: C64, b: C64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

/// Uniform point `a + bτ` of the fundamental cell.
pub fn cell_point<R: Rng>(md: &ModularData, rng: &mut R) -> C64 {
    md.tau() * rng.random_range(0.0..1.0) + rng.random_range(0.0..1.0)
}

/// Cell point at distance at least `guard` from every point of `avoid` modulo the lattice.
pub fn guarded_point<R: Rng>(md: &ModularData, avoid: &[C64], guard: f64, rng: &mut R) -> Option<C64> {
    (0..100_000).find_map(|_| {
        let z = cell_point(md, rng);
        avoid.iter().all(|p| lattice_distance(z - p, md) >= guard).then_some(z)
    })
}

/// `c` for `w_c`: real part in `[−1, 1]`, imaginary part a third of `Im τ`, away from the lattice.
fn random_c<R: Rng>(md: &ModularData, rng: &mut R) -> C64 {
    loop {
        let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0) * md.tau().im / 3.0);
        if lattice_distance(c, md) >= 0.1 {
            return c;
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PeriodicityErrors {
    pub zeta_1: f64,
    pub zeta_tau: f64,
    pub w_1: f64,
    pub w_tau: f64,
}

/// Largest relative violations of the quasi-periodicity laws of `ζ₁₁` and `w_c` over `n` random points.
pub fn periodicity_errors<R: Rng>(md: &ModularData, n: usize, rng: &mut R) -> Result<PeriodicityErrors, EllipticError> {
    let tau = md.tau();
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let mut e = PeriodicityErrors::default();
    for _ in 0..n {
        let c = random_c(md, rng);
        let z = guarded_point(md, &[C64::new(0.0, 0.0), c], 0.05, rng).expect("cell minus two disks is nonempty");
        let zt = zeta11(z, md, 0)?.value();
        e.zeta_1 = e.zeta_1.max(rel(zeta11(z + 1.0, md, 0)?.value(), zt));
        e.zeta_tau = e.zeta_tau.max(rel(zeta11(z + tau, md, 0)?.value(), zt - two_pi_i));
        let wz = w(c, z, md, 0, 0)?.value();
        e.w_1 = e.w_1.max(rel(w(c, z + 1.0, md, 0, 0)?.value(), wz));
        e.w_tau = e.w_tau.max(rel(w(c, z + tau, md, 0, 0)?.value(), (two_pi_i * c).exp() * wz));
    }
    Ok(e)
}

/// Richardson limit at 0 of `g` sampled at `h, h/2, h/4`, exact for quadratics.
fn richardson<F: Fn(C64) -> Result<C64, EllipticError>>(g: F, h: C64) -> Result<C64, EllipticError> {
    Ok((g(h / 4.0)? * 8.0 - g(h / 2.0)? * 6.0 + g(h)?) / 3.0)
}

/// `|lim z·ζ₁₁(z) − 1|` and `|lim z·w_c(z) − 1|`, worst over `n` directions and `c` values.
pub fn pole_errors<R: Rng>(md: &ModularData, n: usize, rng: &mut R) -> Result<(f64, f64), EllipticError> {
    let (mut ez, mut ew) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let h = C64::from_polar(1e-4, rng.random_range(0.0..2.0 * PI));
        let c = random_c(md, rng);
        let lz = richardson(|z| Ok(z * zeta11(z, md, 0)?.value()), h)?;
        let lw = richardson(|z| Ok(z * w(c, z, md, 0, 0)?.value()), h)?;
        ez = ez.max((lz - 1.0).norm());
        ew = ew.max((lw - 1.0).norm());
    }
    Ok((ez, ew))
}

/// Largest relative gap between analytic jets of `θ₁₁`, `ζ₁₁`, `w` (orders ≤ 2 in each variable)
/// and five-point finite differences, over `n` random configurations.
pub fn elliptic_jet_error<R: Rng>(md: &ModularData, n: usize, rng: &mut R) -> Result<f64, EllipticError> {
    let h = FD_STEP;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let c = random_c(md, rng);
        let z = guarded_point(md, &[C64::new(0.0, 0.0), c], 0.1, rng).expect("cell minus two disks is nonempty");
        let th = theta11(z, md, 2)?;
        let th_f = |x: C64| theta11(x, md, 0).map(|j| j.value());
        worst = worst.max(rel(th.derivative(1), fd1(th_f, z, h)?));
        worst = worst.max(rel(th.derivative(2), fd2(th_f, z, h)?));
        let ze = zeta11(z, md, 2)?;
        let ze_f = |x: C64| zeta11(x, md, 0).map(|j| j.value());
        worst = worst.max(rel(ze.derivative(1), fd1(ze_f, z, h)?));
        worst = worst.max(rel(ze.derivative(2), fd2(ze_f, z, h)?));
        let wj = w(c, z, md, 2, 2)?;
        let in_z = |x: C64| w(c, x, md, 0, 0).map(|j| j.value());
        let in_c = |x: C64| w(x, z, md, 0, 0).map(|j| j.value());
        worst = worst.max(rel(wj.derivative(0, 1), fd1(in_z, z, h)?));
        worst = worst.max(rel(wj.derivative(0, 2), fd2(in_z, z, h)?));
        worst = worst.max(rel(wj.derivative(1, 0), fd1(in_c, c, h)?));
        worst = worst.max(rel(wj.derivative(2, 0), fd2(in_c, c, h)?));
        let mixed = fd1(|y: C64| fd1(|x: C64| w(y, x, md, 0, 0).map(|j| j.value()), z, h), c, h)?;
        worst = worst.max(rel(wj.derivative(1, 1), mixed));
    }
    Ok(worst)
}

/// Largest relative gap between `∂_{ξ_r} log Π`, `∂_τ log Π` and finite differences of `Π`.
pub fn pi_log_error(rs: &RootSystem, md: &ModularData, hs: &[Vec<C64>]) -> Result<f64, GaudinError> {
    let h = FD_STEP;
    let mut worst: f64 = 0.0;
    for at in hs {
        let pj = weyl_kac_pi(at, md, rs, 1)?;
        for r in 0..rs.rank() {
            let f = |x: C64| {
                let mut p = at.clone();
                p[r] = x;
                weyl_kac_pi(&p, md, rs, 0).map(|j| j.value)
            };
            let fd = fd1(f, at[r], h)? / pj.value;
            worst = worst.max(rel(pj.dlog(r).value()[(0, 0)], fd));
        }
        let f = |t: C64| -> Result<C64, GaudinError> {
            let m = ModularData::with_truncation(t, md.eps_term(), md.n_max())?;
            weyl_kac_pi(at, &m, rs, 0).map(|j| j.value)
        };
        // Smaller step: Π varies like q^{dim/24} in τ.
        let fd = fd1(f, md.tau(), 1e-4)? / pj.value;
        worst = worst.max(rel(pj.dtau_log.value()[(0, 0)], fd));
    }
    Ok(worst)
}

fn vec_rel(a: &[C64], b: &[C64]) -> f64 {
    let s = a.iter().chain(b).map(|v| v.norm()).fold(0.0, f64::max);
    if s == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / s
}

/// Largest relative gap between first and pure second `ξ`-derivatives of `Ψ` and finite differences.
pub fn psi_gradient_error(cfg: &BetheConfig, t: &[C64], hs: &[Vec<C64>]) -> Result<f64, BetheError> {
    let psi = BetheVector::new(cfg.clone(), t.to_vec())?;
    let l = cfg.problem.rank();
    let h = FD_STEP;
    let mut worst: f64 = 0.0;
    for at in hs {
        let jet = psi.jet_at(at, 2)?;
        for r in 0..l {
            let shifted = |s: f64| -> Result<Vec<C64>, BetheError> {
                let mut p = at.clone();
                p[r] += s;
                Ok(psi.value_at(&p)?.iter().copied().collect())
            };
            let (p2, p1, p0, m1, m2) = (shifted(2.0 * h)?, shifted(h)?, shifted(0.0)?, shifted(-h)?, shifted(-2.0 * h)?);
            let d1: Vec<C64> = (0..p0.len())
                .map(|k| (-p2[k] + p1[k] * 8.0 - m1[k] * 8.0 + m2[k]) / (12.0 * h))
                .collect();
            let d2: Vec<C64> = (0..p0.len())
                .map(|k| (-p2[k] + p1[k] * 16.0 - p0[k] * 30.0 + m1[k] * 16.0 - m2[k]) / (12.0 * h * h))
                .collect();
            let mut e = vec![0u32; l];
            e[r] = 1;
            let j1: Vec<C64> = jet.derivative(&e).expect("order-2 jet").iter().copied().collect();
            e[r] = 2;
            let j2: Vec<C64> = jet.derivative(&e).expect("order-2 jet").iter().copied().collect();
            worst = worst.max(vec_rel(&j1, &d1)).max(vec_rel(&j2, &d2));
        }
    }
    Ok(worst)
}

fn coefficient_map(op: &DiffOperator, h: &[C64]) -> Result<BTreeMap<MultiIndex, DMatrix<C64>>, GaudinError> {
    Ok(op
        .coefficients_at(h, 0)?
        .into_iter()
        .map(|(b, j)| (b, j.value().clone()))
        .collect())
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Entrywise gap between the two routes to `τ̃(u)` at `h`, relative to the larger operator.
pub fn tilde_route_error(p: &GaudinProblem, u: C64, h: &[C64]) -> Result<f64, GaudinError> {
    let a = coefficient_map(&build_tilde_transfer(p, u, TildeRoute::Conjugation)?, h)?;
    let b = coefficient_map(&build_tilde_transfer(p, u, TildeRoute::Explicit)?, h)?;
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in a.keys().chain(b.keys()) {
        let (x, y) = (a.get(k), b.get(k));
        let d = match (x, y) {
            (Some(x), Some(y)) => max_abs(&(x - y)),
            (Some(x), None) | (None, Some(x)) => max_abs(x),
            (None, None) => 0.0,
        };
        diff = diff.max(d);
        scale = scale.max(x.map_or(0.0, max_abs)).max(y.map_or(0.0, max_abs));
    }
    Ok(if scale == 0.0 { 0.0 } else { diff / scale })
}
