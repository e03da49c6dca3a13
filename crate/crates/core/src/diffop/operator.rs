use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::jet::{binomial, degree, factorial, MatrixJet, MultiIndex};
use super::DiffOpError;

/// Hard cap on operator order.
pub const MAX_OPERATOR_ORDER: usize = 4;

/// Supplies coefficient jets of an operator, one per support multi-index.
pub trait CoefficientSource: Send + Sync {
    fn jets(&self, at: &[C64], order: usize) -> Result<Vec<MatrixJet>, DiffOpError>;
}

impl<F> CoefficientSource for F
where
    F: Fn(&[C64], usize) -> Result<Vec<MatrixJet>, DiffOpError> + Send + Sync,
{
    fn jets(&self, at: &[C64], order: usize) -> Result<Vec<MatrixJet>, DiffOpError> {
        self(at, order)
    }
}

/// A vector-valued function of the Cartan coordinates with computable jets.
pub trait JetFunction {
    /// `dim × 1` jet at `at`.
    fn jet(&self, at: &[C64], order: usize) -> Result<MatrixJet, DiffOpError>;
}

/// `Σ_β c_β(ξ) ∂^β` acting on `dim`-vector valued functions of `ξ ∈ C^nvars`.
#[derive(Clone)]
pub struct DiffOperator {
    pub nvars: usize,
    pub dim: usize,
    pub support: Vec<MultiIndex>,
    /// Highest jet order the coefficient source can deliver.
    pub max_jet_order: usize,
    source: Arc<dyn CoefficientSource>,
}

impl fmt::Debug for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffOperator")
            .field("nvars", &self.nvars)
            .field("dim", &self.dim)
            .field("support", &self.support)
            .field("max_jet_order", &self.max_jet_order)
            .finish()
    }
}

fn unit_index(nvars: usize, r: usize) -> MultiIndex {
    let mut e = vec![0; nvars];
    e[r] = 1;
    e
}

// Sub-multi-indices δ ≤ β.
fn below(beta: &[u32]) -> Vec<MultiIndex> {
    let mut out = vec![Vec::new()];
    for &b in beta {
        out = out
            .into_iter()
            .flat_map(|p: MultiIndex| {
                (0..=b).map(move |d| {
                    let mut q = p.clone();
                    q.push(d);
                    q
                })
            })
            .collect();
    }
    out
}

impl DiffOperator {
    pub fn new(
        nvars: usize,
        dim: usize,
        support: Vec<MultiIndex>,
        max_jet_order: usize,
        source: Arc<dyn CoefficientSource>,
    ) -> Result<Self, DiffOpError> {
        let order = support.iter().map(|b| degree(b)).max().unwrap_or(0);
        if order > MAX_OPERATOR_ORDER {
            return Err(DiffOpError::OrderTooHigh { order });
        }
        if support.iter().any(|b| b.len() != nvars) {
            return Err(DiffOpError::ShapeMismatch);
        }
        Ok(Self {
            nvars,
            dim,
            support,
            max_jet_order,
            source,
        })
    }

    pub fn order(&self) -> usize {
        self.support.iter().map(|b| degree(b)).max().unwrap_or(0)
    }

    /// Coefficient jets in support order.
    pub fn jets(&self, at: &[C64], order: usize) -> Result<Vec<MatrixJet>, DiffOpError> {
        if order > self.max_jet_order {
            return Err(DiffOpError::InsufficientJetOrder {
                needed: order,
                available: self.max_jet_order,
            });
        }
        if at.len() != self.nvars {
            return Err(DiffOpError::ShapeMismatch);
        }
        let out = self.source.jets(at, order)?;
        debug_assert_eq!(out.len(), self.support.len());
        Ok(out)
    }

    /// Coefficient jets keyed by multi-index.
    pub fn coefficients_at(
        &self,
        at: &[C64],
        order: usize,
    ) -> Result<Vec<(MultiIndex, MatrixJet)>, DiffOpError> {
        Ok(self.support.iter().cloned().zip(self.jets(at, order)?).collect())
    }

    /// Multiplication by a constant matrix.
    pub fn constant(nvars: usize, value: DMatrix<C64>) -> Self {
        let dim = value.nrows();
        let src = move |at: &[C64], order: usize| Ok(vec![MatrixJet::constant(at, order, value.clone())]);
        Self::new(nvars, dim, vec![vec![0; nvars]], usize::MAX, Arc::new(src))
            .expect("order-0 operator")
    }

    pub fn identity(nvars: usize, dim: usize) -> Self {
        Self::constant(nvars, DMatrix::identity(dim, dim))
    }

    pub fn zero(nvars: usize, dim: usize) -> Self {
        let src = |_: &[C64], _: usize| Ok(Vec::new());
        Self::new(nvars, dim, Vec::new(), usize::MAX, Arc::new(src)).expect("empty operator")
    }

    /// Multiplication by a matrix function given through its jets.
    pub fn multiplication<F>(nvars: usize, dim: usize, max_jet_order: usize, f: F) -> Self
    where
        F: Fn(&[C64], usize) -> Result<MatrixJet, DiffOpError> + Send + Sync + 'static,
    {
        let src = move |at: &[C64], order: usize| Ok(vec![f(at, order)?]);
        Self::new(nvars, dim, vec![vec![0; nvars]], max_jet_order, Arc::new(src))
            .expect("order-0 operator")
    }

    /// `∂/∂ξ_r` times the identity.
    pub fn partial(nvars: usize, dim: usize, r: usize) -> Self {
        let src = move |at: &[C64], order: usize| Ok(vec![MatrixJet::identity(at, order, dim)]);
        Self::new(nvars, dim, vec![unit_index(nvars, r)], usize::MAX, Arc::new(src))
            .expect("first-order operator")
    }

    /// Linear combination `Σ s_k D_k`.
    pub fn linear_combination(terms: &[(C64, DiffOperator)]) -> Result<Self, DiffOpError> {
        let first = &terms.first().ok_or(DiffOpError::ShapeMismatch)?.1;
        let (nvars, dim) = (first.nvars, first.dim);
        if terms.iter().any(|(_, d)| d.nvars != nvars || d.dim != dim) {
            return Err(DiffOpError::ShapeMismatch);
        }
        let mut support: Vec<MultiIndex> = Vec::new();
        for (_, d) in terms {
            for b in &d.support {
                if !support.contains(b) {
                    support.push(b.clone());
                }
            }
        }
        support.sort_by_key(|b| (degree(b), std::cmp::Reverse(b.clone())));
        let maps: Vec<Vec<usize>> = terms
            .iter()
            .map(|(_, d)| {
                d.support
                    .iter()
                    .map(|b| support.iter().position(|x| x == b).expect("union"))
                    .collect()
            })
            .collect();
        let max_jet_order = terms.iter().map(|(_, d)| d.max_jet_order).min().unwrap_or(0);
        let terms: Vec<(C64, DiffOperator)> = terms.to_vec();
        let n = support.len();
        let src = move |at: &[C64], order: usize| {
            let mut out = vec![MatrixJet::zeros(at, order, dim, dim); n];
            for ((s, d), map) in terms.iter().zip(&maps) {
                for (j, k) in d.jets(at, order)?.into_iter().zip(map) {
                    out[*k].add_assign_scaled(&j, *s);
                }
            }
            Ok(out)
        };
        Self::new(nvars, dim, support, max_jet_order, Arc::new(src))
    }

    pub fn add(&self, other: &Self) -> Result<Self, DiffOpError> {
        let one = C64::new(1.0, 0.0);
        Self::linear_combination(&[(one, self.clone()), (one, other.clone())])
    }

    pub fn sub(&self, other: &Self) -> Result<Self, DiffOpError> {
        Self::linear_combination(&[(C64::new(1.0, 0.0), self.clone()), (C64::new(-1.0, 0.0), other.clone())])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::linear_combination(&[(s, self.clone())]).expect("single term")
    }

    /// Operator product `self ∘ other` by the Leibniz rule.
    pub fn compose(&self, other: &Self) -> Result<Self, DiffOpError> {
        if self.nvars != other.nvars || self.dim != other.dim {
            return Err(DiffOpError::ShapeMismatch);
        }
        let o1 = self.order();
        let total = o1 + other.order();
        if total > MAX_OPERATOR_ORDER {
            return Err(DiffOpError::OrderTooHigh { order: total });
        }
        if other.max_jet_order < o1 {
            return Err(DiffOpError::InsufficientJetOrder {
                needed: o1,
                available: other.max_jet_order,
            });
        }
        // a_β ∂^β (b_γ ∂^γ) = Σ_{δ≤β} C(β,δ) a_β (∂^δ b_γ) ∂^{β−δ+γ}
        let mut plan: BTreeMap<MultiIndex, Vec<(usize, usize, MultiIndex, f64)>> = BTreeMap::new();
        for (i, beta) in self.support.iter().enumerate() {
            for (j, gamma) in other.support.iter().enumerate() {
                for delta in below(beta) {
                    let target: MultiIndex = beta
                        .iter()
                        .zip(&delta)
                        .zip(gamma)
                        .map(|((b, d), g)| b - d + g)
                        .collect();
                    plan.entry(target)
                        .or_default()
                        .push((i, j, delta.clone(), binomial(beta, &delta)));
                }
            }
        }
        let mut support: Vec<MultiIndex> = plan.keys().cloned().collect();
        support.sort_by_key(|b| (degree(b), std::cmp::Reverse(b.clone())));
        let plan: Vec<Vec<(usize, usize, MultiIndex, f64)>> =
            support.iter().map(|b| plan[b].clone()).collect();
        let left = self.clone();
        let right = other.clone();
        let dim = self.dim;
        let src = move |at: &[C64], order: usize| {
            let a = left.jets(at, order)?;
            let b = right.jets(at, order + o1)?;
            let mut out = Vec::with_capacity(plan.len());
            for terms in &plan {
                let mut acc = MatrixJet::zeros(at, order, dim, dim);
                for (i, j, delta, c) in terms {
                    let db = b[*j].derivative_jet(delta)?.truncate(order);
                    acc.add_assign_scaled(&a[*i].mul(&db)?, C64::new(*c, 0.0));
                }
                out.push(acc);
            }
            Ok(out)
        };
        let max_jet_order = self.max_jet_order.min(other.max_jet_order.saturating_sub(o1));
        Self::new(self.nvars, dim, support, max_jet_order, Arc::new(src))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self, DiffOpError> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// `Σ_β c_β(H) ∂^β f(H)`.
    pub fn apply(&self, f: &dyn JetFunction, at: &[C64]) -> Result<DVector<C64>, DiffOpError> {
        let o = self.order();
        let fj = f.jet(at, o)?;
        let coeffs = self.jets(at, 0)?;
        let mut out = DVector::zeros(self.dim);
        for (beta, c) in self.support.iter().zip(&coeffs) {
            let d = fj.coeff(beta).ok_or(DiffOpError::InsufficientJetOrder {
                needed: degree(beta),
                available: fj.order(),
            })?;
            let v = c.value() * d * C64::new(factorial(beta), 0.0);
            out += v.column(0);
        }
        Ok(out)
    }
}
