use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::DiffOpError;
use crate::elliptic::ScalarJet;

pub type MultiIndex = Vec<u32>;

/// Enumeration of the multi-indices of total degree ≤ `order` in `nvars`
/// variables, with a precomputed product table.
#[derive(Debug)]
pub struct JetLayout {
    pub nvars: usize,
    pub order: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    products: Vec<(usize, usize, usize)>,
}

impl JetLayout {
    /// Shared layout for the given shape.
    pub fn get(nvars: usize, order: usize) -> Arc<JetLayout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetLayout::build(nvars, order)))
            .clone()
    }

    fn build(nvars: usize, order: usize) -> Self {
        let mut indices = Vec::new();
        for deg in 0..=order {
            let mut cur = vec![0u32; nvars];
            fill(&mut indices, &mut cur, 0, deg as u32);
        }
        let lookup: HashMap<MultiIndex, usize> =
            indices.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                let s: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(&k) = lookup.get(&s) {
                    products.push((i, j, k));
                }
            }
        }
        Self {
            nvars,
            order,
            indices,
            lookup,
            products,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, m: &[u32]) -> Option<usize> {
        self.lookup.get(m).copied()
    }
}

// Multi-indices of exact degree `deg`, first variable most significant.
fn fill(out: &mut Vec<MultiIndex>, cur: &mut MultiIndex, var: usize, deg: u32) {
    if var + 1 == cur.len() {
        cur[var] = deg;
        out.push(cur.clone());
        return;
    }
    if cur.is_empty() {
        if deg == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for d in (0..=deg).rev() {
        cur[var] = d;
        fill(out, cur, var + 1, deg - d);
    }
    cur[var] = 0;
}

pub fn degree(m: &[u32]) -> usize {
    m.iter().map(|v| *v as usize).sum()
}

pub fn factorial(m: &[u32]) -> f64 {
    m.iter()
        .map(|&k| (1..=k).map(|i| i as f64).product::<f64>())
        .product()
}

/// Multi-binomial `Π C(β_r, δ_r)`.
pub fn binomial(beta: &[u32], delta: &[u32]) -> f64 {
    beta.iter()
        .zip(delta)
        .map(|(&b, &d)| {
            let mut c = 1.0;
            for i in 0..d {
                c = c * (b - i) as f64 / (i + 1) as f64;
            }
            c
        })
        .product()
}

/// Matrix-valued truncated Taylor expansion in the Cartan coordinates.
///
/// Coefficient `k` is `∂^β f(H) / β!` for `β = layout.indices()[k]`.
#[derive(Debug, Clone)]
pub struct MatrixJet {
    pub base: Vec<C64>,
    pub layout: Arc<JetLayout>,
    pub rows: usize,
    pub cols: usize,
    pub coeffs: Vec<DMatrix<C64>>,
}

impl MatrixJet {
    pub fn zeros(base: &[C64], order: usize, rows: usize, cols: usize) -> Self {
        let layout = JetLayout::get(base.len(), order);
        let coeffs = vec![DMatrix::zeros(rows, cols); layout.len()];
        Self {
            base: base.to_vec(),
            layout,
            rows,
            cols,
            coeffs,
        }
    }

    pub fn constant(base: &[C64], order: usize, value: DMatrix<C64>) -> Self {
        let mut j = Self::zeros(base, order, value.nrows(), value.ncols());
        j.coeffs[0] = value;
        j
    }

    pub fn identity(base: &[C64], order: usize, dim: usize) -> Self {
        Self::constant(base, order, DMatrix::identity(dim, dim))
    }

    pub fn scalar_constant(base: &[C64], order: usize, value: C64) -> Self {
        Self::constant(base, order, DMatrix::from_element(1, 1, value))
    }

    /// The 1×1 jet of the coordinate function `ξ_r`.
    pub fn coordinate(base: &[C64], order: usize, r: usize) -> Self {
        let mut j = Self::scalar_constant(base, order, base[r]);
        if order >= 1 {
            let mut e = vec![0; base.len()];
            e[r] = 1;
            let k = j.layout.position(&e).expect("degree-1 index present");
            j.coeffs[k] = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        }
        j
    }

    /// Jet of `ξ ↦ f(Σ_r a_r ξ_r + const)` from the univariate jet of `f` at
    /// `Σ_r a_r H_r + const`.
    pub fn from_univariate(base: &[C64], f: &ScalarJet, slope: &[C64]) -> Self {
        let order = f.order();
        let mut j = Self::zeros(base, order, 1, 1);
        let layout = j.layout.clone();
        for (k, beta) in layout.indices().iter().enumerate() {
            let n = degree(beta);
            // f_n · (Σ a_r δ_r)^n expanded: multinomial n!/β! · Π a_r^{β_r}.
            let fact_n: f64 = (1..=n).map(|i| i as f64).product();
            let mut c = f.coeffs[n] * (fact_n / factorial(beta));
            for (r, &b) in beta.iter().enumerate() {
                c *= slope[r].powu(b);
            }
            j.coeffs[k][(0, 0)] = c;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn value(&self) -> &DMatrix<C64> {
        &self.coeffs[0]
    }

    pub fn coeff(&self, beta: &[u32]) -> Option<&DMatrix<C64>> {
        self.layout.position(beta).map(|k| &self.coeffs[k])
    }

    /// `∂^β f(H)`.
    pub fn derivative(&self, beta: &[u32]) -> Option<DMatrix<C64>> {
        self.coeff(beta).map(|c| c * C64::new(factorial(beta), 0.0))
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        let mut out = Self::zeros(&self.base, order, self.rows, self.cols);
        let n = out.layout.len();
        // Layouts of lower order are prefixes.
        out.coeffs.clone_from_slice(&self.coeffs[..n]);
        out
    }

    /// Jet of `∂^δ f`; the order drops by `|δ|`.
    pub fn derivative_jet(&self, delta: &[u32]) -> Result<Self, DiffOpError> {
        let d = degree(delta);
        if d > self.order() {
            return Err(DiffOpError::InsufficientJetOrder {
                needed: d,
                available: self.order(),
            });
        }
        let mut out = Self::zeros(&self.base, self.order() - d, self.rows, self.cols);
        let layout = out.layout.clone();
        for (k, beta) in layout.indices().iter().enumerate() {
            let shifted: MultiIndex = beta.iter().zip(delta).map(|(b, x)| b + x).collect();
            let src = self.layout.position(&shifted).expect("degree within source order");
            let scale = factorial(&shifted) / factorial(beta);
            out.coeffs[k] = &self.coeffs[src] * C64::new(scale, 0.0);
        }
        Ok(out)
    }

    fn check_compatible(&self, other: &Self) -> Result<(), DiffOpError> {
        if self.base != other.base {
            return Err(DiffOpError::BaseMismatch);
        }
        if self.order() != other.order() {
            return Err(DiffOpError::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        Ok(())
    }

    /// Truncated product.
    pub fn mul(&self, other: &Self) -> Result<Self, DiffOpError> {
        self.check_compatible(other)?;
        let scalar_left = self.rows == 1 && self.cols == 1;
        let scalar_right = other.rows == 1 && other.cols == 1;
        let (rows, cols) = if scalar_left && !scalar_right {
            (other.rows, other.cols)
        } else if scalar_right && !scalar_left {
            (self.rows, self.cols)
        } else {
            if self.cols != other.rows {
                return Err(DiffOpError::ShapeMismatch);
            }
            (self.rows, other.cols)
        };
        let mut out = Self::zeros(&self.base, self.order(), rows, cols);
        let zero = |m: &DMatrix<C64>| m.iter().all(|v| v.norm() == 0.0);
        let lz: Vec<bool> = self.coeffs.iter().map(zero).collect();
        let rz: Vec<bool> = other.coeffs.iter().map(zero).collect();
        for &(i, j, k) in &self.layout.products {
            if lz[i] || rz[j] {
                continue;
            }
            let (a, b) = (&self.coeffs[i], &other.coeffs[j]);
            if scalar_left && !scalar_right {
                out.coeffs[k] += b * a[(0, 0)];
            } else if scalar_right && !scalar_left {
                out.coeffs[k] += a * b[(0, 0)];
            } else {
                out.coeffs[k] += a * b;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, DiffOpError> {
        self.check_compatible(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(DiffOpError::ShapeMismatch);
        }
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, DiffOpError> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for a in &mut out.coeffs {
            *a *= s;
        }
        out
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: C64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
    }

    /// Evaluates the truncated polynomial at `x`.
    pub fn eval(&self, x: &[C64]) -> DMatrix<C64> {
        let dx: Vec<C64> = x.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for (k, beta) in self.layout.indices().iter().enumerate() {
            let mut mono = C64::new(1.0, 0.0);
            for (r, &b) in beta.iter().enumerate() {
                mono *= dx[r].powu(b);
            }
            out += &self.coeffs[k] * mono;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|m| m.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}
