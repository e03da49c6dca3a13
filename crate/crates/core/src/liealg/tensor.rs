use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::module::RepresentedModule;

const CHARGE_TOL: f64 = 1e-9;

/// Product-basis tuples of total weight zero in `V = ⊗ V_i`.
///
/// The same tuples index the dual basis of `V*(0)`; operators on `V*(0)`
/// are returned as matrices acting on coordinate columns.
#[derive(Debug, Clone)]
pub struct ZeroWeightSpace {
    pub factors: Vec<Arc<RepresentedModule>>,
    basis: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

/// Integer target depths `Σ_i λ_i` in simple-root coordinates, if any exist.
fn total_depth(factors: &[Arc<RepresentedModule>]) -> Option<Vec<u32>> {
    let rank = factors[0].highest_simple.len();
    let mut total = vec![C64::new(0.0, 0.0); rank];
    for f in factors {
        for (t, c) in total.iter_mut().zip(&f.highest_simple) {
            *t += c;
        }
    }
    let mut out = Vec::with_capacity(rank);
    for t in total {
        let r = t.re.round();
        let tol = CHARGE_TOL * t.norm().max(1.0);
        if t.im.abs() > tol || (t.re - r).abs() > tol || r < 0.0 {
            return None;
        }
        out.push(r as u32);
    }
    Some(out)
}

/// Enumerates the zero-weight sub-basis of the tensor product.
pub fn zero_weight_basis(factors: Vec<Arc<RepresentedModule>>) -> ZeroWeightSpace {
    assert!(!factors.is_empty(), "at least one tensor factor");
    let mut basis = Vec::new();
    if let Some(target) = total_depth(&factors) {
        let grouped: Vec<BTreeMap<&Vec<u32>, Vec<usize>>> = factors
            .iter()
            .map(|f| {
                let mut m: BTreeMap<&Vec<u32>, Vec<usize>> = BTreeMap::new();
                for (v, d) in f.depths.iter().enumerate() {
                    m.entry(d).or_default().push(v);
                }
                m
            })
            .collect();
        fn rec(
            grouped: &[BTreeMap<&Vec<u32>, Vec<usize>>],
            site: usize,
            budget: &[u32],
            cur: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if site == grouped.len() {
                if budget.iter().all(|b| *b == 0) {
                    out.push(cur.clone());
                }
                return;
            }
            for (d, vs) in &grouped[site] {
                if d.iter().zip(budget).any(|(a, b)| a > b) {
                    continue;
                }
                let rest: Vec<u32> = budget.iter().zip(d.iter()).map(|(b, a)| b - a).collect();
                for &v in vs {
                    cur.push(v);
                    rec(grouped, site + 1, &rest, cur, out);
                    cur.pop();
                }
            }
        }
        rec(&grouped, 0, &target, &mut Vec::new(), &mut basis);
        basis.sort();
    }
    let index = basis.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    ZeroWeightSpace {
        factors,
        basis,
        index,
    }
}

impl ZeroWeightSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        self.index.get(tuple).copied()
    }

    /// Applies `ρ_{s_k}(X_k) ⋯ ρ_{s_1}(X_1)` (first pair first) to a product-basis tuple.
    pub fn apply_chain(&self, start: &[usize], ops: &[(usize, usize)]) -> Vec<(Vec<usize>, C64)> {
        let mut cur: Vec<(Vec<usize>, C64)> = vec![(start.to_vec(), C64::new(1.0, 0.0))];
        for &(site, a) in ops {
            let m = self.factors[site].act(a);
            let mut next: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
            for (t, c) in &cur {
                for (i, v) in m.column(t[site]) {
                    let mut t2 = t.clone();
                    t2[site] = i;
                    *next.entry(t2).or_insert(C64::new(0.0, 0.0)) += c * v;
                }
            }
            cur = next.into_iter().filter(|(_, c)| c.norm() != 0.0).collect();
        }
        cur
    }

    /// Matrix on `V*(0)` of `ρ*_{s_1}(X_1) ⋯ ρ*_{s_k}(X_k)`.
    ///
    /// The right action reverses composition, so this is the transpose of the
    /// `V(0)` operator that applies `(s_1, X_1)` first. Components leaving
    /// `V(0)` are discarded, which happens only for weight-changing chains.
    pub fn dual_chain(&self, ops: &[(usize, usize)]) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (b, t) in self.basis.iter().enumerate() {
            for (t2, c) in self.apply_chain(t, ops) {
                if let Some(i) = self.index_of(&t2) {
                    // V-matrix entry (i, b); transposed into (b, i).
                    m[(b, i)] += c;
                }
            }
        }
        m
    }

    /// Diagonal of `ρ*_site(h_r)` on `V*(0)`.
    pub fn dual_cartan(&self, site: usize, r: usize) -> Vec<C64> {
        self.basis
            .iter()
            .map(|t| self.factors[site].weights[t[site]].0[r])
            .collect()
    }
}

/// A vector in the full product space `⊗ V_i`, dense over the product basis.
#[derive(Debug, Clone)]
pub struct TensorState {
    pub dims: Vec<usize>,
    pub coeffs: Vec<C64>,
}

impl TensorState {
    pub fn zeros(factors: &[Arc<RepresentedModule>]) -> Self {
        let dims: Vec<usize> = factors.iter().map(|f| f.dim()).collect();
        let n = dims.iter().product();
        Self {
            dims,
            coeffs: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn flat_index(&self, tuple: &[usize]) -> usize {
        tuple.iter().zip(&self.dims).fold(0, |acc, (t, d)| acc * d + t)
    }

    pub fn tuple(&self, mut flat: usize) -> Vec<usize> {
        let mut t = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            t[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
        t
    }

    pub fn from_zero_weight(space: &ZeroWeightSpace, coords: &[C64]) -> Self {
        let mut s = Self::zeros(&space.factors);
        for (t, c) in space.basis().iter().zip(coords) {
            let i = s.flat_index(t);
            s.coeffs[i] = *c;
        }
        s
    }

    /// Keeps only the components of total weight zero.
    pub fn project_zero_weight(&self, space: &ZeroWeightSpace) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if space.index_of(&self.tuple(i)).is_none() {
                *c = C64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Applies `ρ*_site(h_r)`, which is diagonal in the product basis.
    pub fn apply_dual_cartan(&self, factors: &[Arc<RepresentedModule>], site: usize, r: usize) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let t = self.tuple(i);
            *c *= factors[site].weights[t[site]].0[r];
        }
        out
    }

    pub fn zero_weight_coords(&self, space: &ZeroWeightSpace) -> Vec<C64> {
        space.basis().iter().map(|t| self.coeffs[self.flat_index(t)]).collect()
    }
}
