//! Bethe equations, their Newton solver, Bethe vectors and the eigenvector check.

mod solver;
mod vector;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::elliptic::{lattice_distance, zeta11, EllipticError};
use crate::gaudin::{GaudinError, GaudinProblem, DOMAIN_TOL};
use crate::liealg::Weight;

pub use solver::{halton_seeds, solve_bethe, BetheSolution, SolverOptions};
pub use vector::{
    bracket, eigenvalue_tau_psi, verify_eigenvector, BetheVector, EigenReport, EigenSample, ZetaBar,
};

/// Relative tolerance of the charge condition for complex weights.
pub const CHARGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Point {
    Site(usize),
    Root(usize),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BetheError {
    #[error("charge condition fails: Σλ_i − Σα_(i(j)) has simple-root coordinates {defect:?}")]
    Charge { defect: Vec<(f64, f64)> },
    #[error("assignment refers to simple root {0}, which does not exist")]
    BadAssignment(usize),
    #[error("expected {expected} Bethe roots, got {got}")]
    RootCount { expected: usize, got: usize },
    #[error("{a:?} and {b:?} collide modulo the lattice")]
    Collision { a: Point, b: Point },
    #[error("site {site} carries no pairing ȷ; Bethe vectors need dual Verma modules")]
    NotDualVerma { site: usize },
    #[error("site {site} is truncated at depth {depth} but {needed} is needed")]
    DepthShortfall { site: usize, depth: usize, needed: usize },
    #[error("no seed converged ({seeds} tried, best residual {best:e})")]
    NoConvergence { seeds: usize, best: f64 },
    #[error(transparent)]
    Gaudin(#[from] GaudinError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

/// A Gaudin problem together with the simple roots `α_{i(j)}` of the Bethe roots.
#[derive(Debug, Clone)]
pub struct BetheConfig {
    pub problem: GaudinProblem,
    /// `assignment[j]` is the 0-based index of the simple root `α_{i(j)}`.
    pub assignment: Vec<usize>,
}

impl BetheConfig {
    pub fn new(problem: GaudinProblem, assignment: Vec<usize>) -> Result<Self, BetheError> {
        if let Some(&bad) = assignment.iter().find(|&&i| i >= problem.rank()) {
            return Err(BetheError::BadAssignment(bad));
        }
        Ok(Self { problem, assignment })
    }

    pub fn m(&self) -> usize {
        self.assignment.len()
    }

    pub fn root_weight(&self, j: usize) -> Weight {
        let rs = &self.problem.rs;
        rs.root_as_weight(rs.simple_root(self.assignment[j]))
    }

    pub fn site_weight(&self, i: usize) -> &Weight {
        &self.problem.sites[i].module.highest
    }

    /// `Σ_i λ_i − Σ_j α_{i(j)}` in simple-root coordinates.
    pub fn charge_defect(&self) -> Vec<C64> {
        let l = self.problem.rank();
        let mut d = vec![C64::new(0.0, 0.0); l];
        for s in &self.problem.sites {
            for (x, y) in d.iter_mut().zip(&s.module.highest_simple) {
                *x += y;
            }
        }
        for &i in &self.assignment {
            d[i] -= 1.0;
        }
        d
    }

    /// `(α_{i(j)} | λ_i)`.
    pub fn pair_site(&self, j: usize, i: usize) -> C64 {
        self.problem.rs.inner(&self.root_weight(j), self.site_weight(i))
    }

    /// `(α_{i(j)} | α_{i(j′)})`.
    pub fn pair_roots(&self, j: usize, k: usize) -> C64 {
        self.problem.rs.cartan_matrix()[(self.assignment[j], self.assignment[k])].into()
    }

    /// Rejects roots on top of sites or of each other.
    pub fn check_roots(&self, t: &[C64]) -> Result<(), BetheError> {
        if t.len() != self.m() {
            return Err(BetheError::RootCount {
                expected: self.m(),
                got: t.len(),
            });
        }
        let md = &self.problem.md;
        for (j, tj) in t.iter().enumerate() {
            for (i, s) in self.problem.sites.iter().enumerate() {
                if lattice_distance(tj - s.z, md) < DOMAIN_TOL {
                    return Err(BetheError::Collision {
                        a: Point::Root(j),
                        b: Point::Site(i),
                    });
                }
            }
            for (k, tk) in t.iter().enumerate().skip(j + 1) {
                if lattice_distance(tj - tk, md) < DOMAIN_TOL {
                    return Err(BetheError::Collision {
                        a: Point::Root(j),
                        b: Point::Root(k),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Whether `Σ λ_i = Σ α_{i(j)}`, up to a relative tolerance for complex weights.
pub fn check_charge(cfg: &BetheConfig) -> bool {
    let scale = cfg
        .problem
        .sites
        .iter()
        .flat_map(|s| s.module.highest_simple.iter().map(|v| v.norm()))
        .fold(1.0, f64::max);
    cfg.charge_defect().iter().all(|d| d.norm() <= CHARGE_TOL * scale)
}

/// Residuals of the Bethe equations and their Jacobian at `t`.
pub fn bethe_system(cfg: &BetheConfig, t: &[C64]) -> Result<(DVector<C64>, DMatrix<C64>), BetheError> {
    cfg.check_roots(t)?;
    let m = cfg.m();
    let md = &cfg.problem.md;
    let mut f = DVector::zeros(m);
    let mut jac = DMatrix::zeros(m, m);
    for j in 0..m {
        for (i, s) in cfg.problem.sites.iter().enumerate() {
            let a = cfg.pair_site(j, i);
            if a.norm() == 0.0 {
                continue;
            }
            let z = zeta11(t[j] - s.z, md, 1)?;
            f[j] += a * z.coeffs[0];
            jac[(j, j)] += a * z.coeffs[1];
        }
        for k in 0..m {
            if k == j {
                continue;
            }
            let b = cfg.pair_roots(j, k);
            if b.norm() == 0.0 {
                continue;
            }
            let z = zeta11(t[j] - t[k], md, 1)?;
            f[j] -= b * z.coeffs[0];
            jac[(j, j)] -= b * z.coeffs[1];
            jac[(j, k)] += b * z.coeffs[1];
        }
    }
    Ok((f, jac))
}
