//! The transfer matrix `τ̂(u)` on `V*(0)`-valued functions of the Cartan
//! coordinates, its conjugate by the Weyl–Kac denominator, and the
//! commutativity residual.

mod pi;
mod residual;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::diffop::{DiffOpError, DiffOperator, MatrixJet};
use crate::elliptic::{lattice_distance, w_in_c, zeta11, EllipticError, ModularData, MAX_ORDER};
use crate::liealg::{
    zero_weight_basis, BasisElement, LieError, RepresentedModule, RootSystem, ZeroWeightSpace,
};

pub use pi::{build_tilde_transfer, conjugate, weyl_kac_pi, PiJets, TildeRoute};
pub use residual::{
    commutativity_residual, operator_norm_at, sample_points, try_sample_points, CommutativityReport, SampleBox,
    SampleResidual,
};

/// Tolerance for `α(H) ∈ Z` and for coincidences modulo the lattice.
pub const DOMAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GaudinError {
    #[error("a Gaudin problem needs at least one site")]
    NoSites,
    #[error("site module rank does not match the root system")]
    RankMismatch,
    #[error("sites {i} and {j} coincide modulo the lattice")]
    SitesCoincide { i: usize, j: usize },
    #[error("spectral parameter coincides with site {site} modulo the lattice")]
    SpectralAtSite { site: usize },
    #[error("H is outside S: root {root} takes the near-integer value {value}")]
    NotInS { root: usize, value: C64 },
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
}

/// A marked point of the curve with its module.
#[derive(Debug, Clone)]
pub struct Site {
    pub z: C64,
    pub module: Arc<RepresentedModule>,
}

/// Root data, the elliptic curve, the marked points and cached `V*(0)` matrices.
#[derive(Debug, Clone)]
pub struct GaudinProblem {
    pub rs: Arc<RootSystem>,
    pub md: ModularData,
    pub sites: Vec<Site>,
    pub space: Arc<ZeroWeightSpace>,
    cartan: Arc<Vec<Vec<DVector<C64>>>>,
    hop: Arc<Vec<Option<DMatrix<C64>>>>,
}

/// Nearest-integer distance used by the `S` membership test.
fn integer_distance(v: C64) -> f64 {
    (v - C64::new(v.re.round(), 0.0)).norm()
}

/// Checks `α(H) ∉ Z` for every root.
pub fn check_in_s(rs: &RootSystem, h: &[C64]) -> Result<(), GaudinError> {
    for k in 0..rs.roots().len() {
        let v = rs.root_value(k, h);
        if integer_distance(v) < DOMAIN_TOL {
            return Err(GaudinError::NotInS { root: k, value: v });
        }
    }
    Ok(())
}

impl GaudinProblem {
    pub fn new(rs: Arc<RootSystem>, md: ModularData, sites: Vec<Site>) -> Result<Self, GaudinError> {
        if sites.is_empty() {
            return Err(GaudinError::NoSites);
        }
        if sites.iter().any(|s| s.module.highest.0.len() != rs.rank()) {
            return Err(GaudinError::RankMismatch);
        }
        for i in 0..sites.len() {
            for j in (i + 1)..sites.len() {
                if lattice_distance(sites[i].z - sites[j].z, &md) < DOMAIN_TOL {
                    return Err(GaudinError::SitesCoincide { i, j });
                }
            }
        }
        let space = zero_weight_basis(sites.iter().map(|s| s.module.clone()).collect());
        let cartan = (0..sites.len())
            .map(|i| {
                (0..rs.rank())
                    .map(|r| DVector::from_vec(space.dual_cartan(i, r)))
                    .collect()
            })
            .collect();
        let n = sites.len();
        let nroots = rs.roots().len();
        let mut hop = Vec::with_capacity(n * n * nroots);
        for i in 0..n {
            for j in 0..n {
                for k in 0..nroots {
                    let ea = rs.basis_index(BasisElement::Root(k));
                    let ema = rs.basis_index(BasisElement::Root(rs.negative_of(k)));
                    let m = space.dual_chain(&[(j, ema), (i, ea)]);
                    let nonzero = m.iter().any(|v| v.norm() != 0.0);
                    hop.push(nonzero.then_some(m));
                }
            }
        }
        Ok(Self {
            rs,
            md,
            sites,
            space: Arc::new(space),
            cartan: Arc::new(cartan),
            hop: Arc::new(hop),
        })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn nsites(&self) -> usize {
        self.sites.len()
    }

    pub fn rank(&self) -> usize {
        self.rs.rank()
    }

    /// `ρ*_j(e_{−α}) ρ*_i(e_α)` on `V*(0)` for the root with index `k`; `None` if it vanishes.
    pub fn hopping(&self, i: usize, j: usize, k: usize) -> Option<&DMatrix<C64>> {
        let n = self.sites.len();
        let nroots = self.rs.roots().len();
        self.hop[(i * n + j) * nroots + k].as_ref()
    }

    /// Diagonal of `ρ*_i(h_r)` on `V*(0)`.
    pub fn dual_cartan(&self, i: usize, r: usize) -> &DVector<C64> {
        &self.cartan[i][r]
    }

    pub fn check_spectral(&self, u: C64) -> Result<(), GaudinError> {
        for (site, s) in self.sites.iter().enumerate() {
            if lattice_distance(s.z - u, &self.md) < DOMAIN_TOL {
                return Err(GaudinError::SpectralAtSite { site });
            }
        }
        Ok(())
    }

    pub fn check_point(&self, h: &[C64]) -> Result<(), GaudinError> {
        check_in_s(&self.rs, h)
    }

    /// `Σ_i ζ₁₁(z_i − u) ρ*_i(h_r)` as a diagonal.
    pub fn connection_diagonal(&self, r: usize, u: C64) -> Result<DVector<C64>, GaudinError> {
        self.check_spectral(u)?;
        let mut d = DVector::zeros(self.dim());
        for (i, s) in self.sites.iter().enumerate() {
            let z = zeta11(s.z - u, &self.md, 0)?.value();
            d += self.dual_cartan(i, r) * z;
        }
        Ok(d)
    }
}

/// `∇_r = ∂/∂ξ_r − Σ_i ζ₁₁(z_i − u) ρ*_i(h_r)`.
pub fn build_nabla(p: &GaudinProblem, r: usize, u: C64) -> Result<DiffOperator, GaudinError> {
    let diag = p.connection_diagonal(r, u)?;
    let l = p.rank();
    let m = DiffOperator::constant(l, DMatrix::from_diagonal(&diag));
    Ok(DiffOperator::partial(l, p.dim(), r).sub(&m)?)
}

/// The zeroth-order part `½ Σ_{i,j} Σ_α w_{α(H)}(z_i−u) w_{−α(H)}(z_j−u) ρ*_j(e_{−α}) ρ*_i(e_α)`.
pub fn build_potential(p: &GaudinProblem, u: C64) -> Result<DiffOperator, GaudinError> {
    p.check_spectral(u)?;
    let prob = p.clone();
    let l = p.rank();
    let dim = p.dim();
    let f = move |at: &[C64], order: usize| -> Result<MatrixJet, DiffOpError> {
        check_in_s(&prob.rs, at).map_err(|e| DiffOpError::Domain(e.to_string()))?;
        let rs = &prob.rs;
        let nroots = rs.roots().len();
        let n = prob.nsites();
        // wj[k][i]: jet in ξ of w_{α_k(H)}(z_i − u).
        let mut wj = Vec::with_capacity(nroots);
        for k in 0..nroots {
            let slope: Vec<C64> = rs.root(k).chart.iter().map(|v| C64::new(*v, 0.0)).collect();
            let c0 = rs.root_value(k, at);
            let mut row = Vec::with_capacity(n);
            for s in &prob.sites {
                let jc = w_in_c(c0, s.z - u, &prob.md, order)?;
                row.push(MatrixJet::from_univariate(at, &jc, &slope));
            }
            wj.push(row);
        }
        let mut out = MatrixJet::zeros(at, order, dim, dim);
        for k in 0..nroots {
            let nk = rs.negative_of(k);
            for i in 0..n {
                for j in 0..n {
                    let Some(m) = prob.hopping(i, j, k) else {
                        continue;
                    };
                    let s = wj[k][i].mul(&wj[nk][j])?;
                    for (o, sc) in out.coeffs.iter_mut().zip(&s.coeffs) {
                        *o += m * (sc[(0, 0)] * 0.5);
                    }
                }
            }
        }
        Ok(out)
    };
    Ok(DiffOperator::multiplication(l, dim, MAX_ORDER, f))
}

/// `½ Σ_r ∇_r²`.
pub fn build_laplacian(p: &GaudinProblem, u: C64) -> Result<DiffOperator, GaudinError> {
    let mut terms = Vec::with_capacity(p.rank());
    for r in 0..p.rank() {
        let nab = build_nabla(p, r, u)?;
        terms.push((C64::new(0.5, 0.0), nab.compose(&nab)?));
    }
    Ok(DiffOperator::linear_combination(&terms)?)
}

/// The transfer matrix `τ̂(u)`.
pub fn build_transfer(p: &GaudinProblem, u: C64) -> Result<DiffOperator, GaudinError> {
    Ok(build_laplacian(p, u)?.add(&build_potential(p, u)?)?)
}
