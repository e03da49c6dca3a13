use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::fmt;
use std::str::FromStr;

use super::LieError;

/// Cartan–Killing series label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Series {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl FromStr for Series {
    type Err = LieError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "A" | "a" => Series::A,
            "B" | "b" => Series::B,
            "C" | "c" => Series::C,
            "D" | "d" => Series::D,
            "E" | "e" => Series::E,
            "F" | "f" => Series::F,
            "G" | "g" => Series::G,
            other => return Err(LieError::UnknownSeries(other.to_string())),
        })
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Series::A => "A",
            Series::B => "B",
            Series::C => "C",
            Series::D => "D",
            Series::E => "E",
            Series::F => "F",
            Series::G => "G",
        };
        f.write_str(s)
    }
}

/// Highest rank accepted by [`build_root_system`].
pub const MAX_RANK: usize = 3;

/// A weight in the orthonormal chart: entry `r` is `λ(h_r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight(pub Vec<C64>);

impl Weight {
    pub fn zero(rank: usize) -> Self {
        Weight(vec![C64::new(0.0, 0.0); rank])
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: C64) -> Weight {
        Weight(self.0.iter().map(|a| a * s).collect())
    }

    /// Pairing with a Cartan element given in ξ-coordinates.
    pub fn eval(&self, h: &[C64]) -> C64 {
        self.0.iter().zip(h).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// A root `ε_i − ε_j` of `sl_{l+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    /// `α(h_r)` for the orthonormal Cartan basis.
    pub chart: Vec<f64>,
    /// Coefficients in the simple roots (all ≥ 0 or all ≤ 0).
    pub simple_coords: Vec<i64>,
    pub height: i64,
    /// Matrix unit `E_{ij}` realising `e_α`.
    pub ends: (usize, usize),
}

/// Index into the basis of `g`: Cartan elements first, then positive roots,
/// then negative roots in the same order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisElement {
    Cartan(usize),
    Root(usize),
}

/// Coefficients of an element of `g` in the basis enumerated by [`RootSystem::basis_index`].
pub type AlgebraElement = Vec<C64>;

/// Root data for `A_l` in the defining realisation by traceless `(l+1) × (l+1)` matrices.
///
/// Conventions: `e_α = E_{ij}` for `α = ε_i − ε_j`, so `e_{−α} = e_α^T` and the
/// normalised form is `tr(AB)`; `h_r` is the Gram–Schmidt orthonormal basis of
/// the diagonal traceless matrices; positive roots are ordered by height, then
/// by first index, which puts the simple roots first.
#[derive(Debug, Clone)]
pub struct RootSystem {
    series: Series,
    rank: usize,
    n: usize,
    roots: Vec<Root>,
    cartan: Vec<Vec<f64>>,
    rho: Vec<f64>,
    dual_coxeter: usize,
    structure: Vec<Vec<Vec<(usize, f64)>>>,
}

pub fn build_root_system(series: Series, rank: usize) -> Result<RootSystem, LieError> {
    if series != Series::A || rank == 0 || rank > MAX_RANK {
        return Err(LieError::UnsupportedAlgebra { series, rank });
    }
    let n = rank + 1;
    let cartan: Vec<Vec<f64>> = (1..=rank)
        .map(|r| {
            let norm = ((r * (r + 1)) as f64).sqrt();
            (0..n)
                .map(|k| match k.cmp(&r) {
                    std::cmp::Ordering::Less => 1.0 / norm,
                    std::cmp::Ordering::Equal => -(r as f64) / norm,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect();

    let mut pos: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    pos.sort_by_key(|&(i, j)| (j - i, i));
    let make = |i: usize, j: usize| {
        let chart = cartan.iter().map(|h| h[i] - h[j]).collect();
        let (lo, hi, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
        let simple_coords = (0..rank).map(|k| if k >= lo && k < hi { sign } else { 0 }).collect();
        Root {
            chart,
            simple_coords,
            height: sign * (hi - lo) as i64,
            ends: (i, j),
        }
    };
    let mut roots: Vec<Root> = pos.iter().map(|&(i, j)| make(i, j)).collect();
    roots.extend(pos.iter().map(|&(i, j)| make(j, i)));

    let s = pos.len();
    let mut rho = vec![0.0; rank];
    for root in &roots[..s] {
        for (r, v) in root.chart.iter().enumerate() {
            rho[r] += 0.5 * v;
        }
    }

    let mut rs = RootSystem {
        series,
        rank,
        n,
        roots,
        cartan,
        rho,
        dual_coxeter: n,
        structure: Vec::new(),
    };
    let dim = rs.dim();
    let mats: Vec<DMatrix<f64>> = (0..dim).map(|a| rs.defining_matrix(a)).collect();
    rs.structure = (0..dim)
        .map(|a| {
            (0..dim)
                .map(|b| rs.decompose(&(&mats[a] * &mats[b] - &mats[b] * &mats[a])))
                .collect()
        })
        .collect();
    Ok(rs)
}

impl RootSystem {
    pub fn series(&self) -> Series {
        self.series
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Dimension of `g`.
    pub fn dim(&self) -> usize {
        self.rank + self.roots.len()
    }

    pub fn dual_coxeter(&self) -> usize {
        self.dual_coxeter
    }

    pub fn num_positive(&self) -> usize {
        self.roots.len() / 2
    }

    /// All roots, positives first.
    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn positive_roots(&self) -> &[Root] {
        &self.roots[..self.num_positive()]
    }

    pub fn root(&self, k: usize) -> &Root {
        &self.roots[k]
    }

    /// Index of `−α` given the index of `α`.
    pub fn negative_of(&self, k: usize) -> usize {
        let s = self.num_positive();
        if k < s {
            k + s
        } else {
            k - s
        }
    }

    /// Index of the simple root `α_i` (0-based) among all roots.
    pub fn simple_root(&self, i: usize) -> usize {
        i
    }

    pub fn highest_root_height(&self) -> usize {
        self.rank
    }

    /// `ρ` in the orthonormal chart.
    pub fn rho(&self) -> Weight {
        Weight(self.rho.iter().map(|v| C64::new(*v, 0.0)).collect())
    }

    /// Diagonal entries of `h_r` in the defining representation.
    pub fn cartan_diagonal(&self, r: usize) -> &[f64] {
        &self.cartan[r]
    }

    pub fn basis_index(&self, e: BasisElement) -> usize {
        match e {
            BasisElement::Cartan(r) => r,
            BasisElement::Root(k) => self.rank + k,
        }
    }

    pub fn basis_element(&self, a: usize) -> BasisElement {
        if a < self.rank {
            BasisElement::Cartan(a)
        } else {
            BasisElement::Root(a - self.rank)
        }
    }

    /// Chevalley anti-involution on basis indices: `h ↦ h`, `e_α ↦ e_{−α}`.
    pub fn transpose_index(&self, a: usize) -> usize {
        match self.basis_element(a) {
            BasisElement::Cartan(_) => a,
            BasisElement::Root(k) => self.basis_index(BasisElement::Root(self.negative_of(k))),
        }
    }

    pub fn root_as_weight(&self, k: usize) -> Weight {
        Weight(self.roots[k].chart.iter().map(|v| C64::new(*v, 0.0)).collect())
    }

    /// `α(H)` for `H` given in ξ-coordinates.
    pub fn root_value(&self, k: usize, h: &[C64]) -> C64 {
        self.roots[k].chart.iter().zip(h).map(|(a, x)| x * a).sum()
    }

    /// Normalised inner product of two weights (the chart is orthonormal).
    pub fn inner(&self, a: &Weight, b: &Weight) -> C64 {
        a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum()
    }

    /// Matrix of a basis element in the defining representation.
    pub fn defining_matrix(&self, a: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        match self.basis_element(a) {
            BasisElement::Cartan(r) => {
                for (k, v) in self.cartan[r].iter().enumerate() {
                    m[(k, k)] = *v;
                }
            }
            BasisElement::Root(k) => {
                let (i, j) = self.roots[k].ends;
                m[(i, j)] = 1.0;
            }
        }
        m
    }

    fn decompose(&self, m: &DMatrix<f64>) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for r in 0..self.rank {
            let c: f64 = (0..self.n).map(|k| m[(k, k)] * self.cartan[r][k]).sum();
            if c.abs() > 1e-14 {
                out.push((r, c));
            }
        }
        for (k, root) in self.roots.iter().enumerate() {
            let (i, j) = root.ends;
            if m[(i, j)] != 0.0 {
                out.push((self.rank + k, m[(i, j)]));
            }
        }
        out
    }

    /// `[X_a, X_b]` as a sparse combination of basis elements.
    pub fn bracket_basis(&self, a: usize, b: usize) -> &[(usize, f64)] {
        &self.structure[a][b]
    }

    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (a, xa) in x.iter().enumerate() {
            if xa.norm() == 0.0 {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.norm() == 0.0 {
                    continue;
                }
                for &(c, f) in &self.structure[a][b] {
                    out[c] += xa * yb * f;
                }
            }
        }
        out
    }

    pub fn unit(&self, a: usize) -> AlgebraElement {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[a] = C64::new(1.0, 0.0);
        v
    }

    /// Chevalley generator `E_i = e_{α_i}`.
    pub fn chevalley_e(&self, i: usize) -> AlgebraElement {
        self.unit(self.basis_index(BasisElement::Root(self.simple_root(i))))
    }

    /// Chevalley generator `F_i = e_{−α_i}`.
    pub fn chevalley_f(&self, i: usize) -> AlgebraElement {
        self.unit(self.basis_index(BasisElement::Root(self.negative_of(self.simple_root(i)))))
    }

    /// Coroot `H_i = [E_i, F_i]`.
    pub fn chevalley_h(&self, i: usize) -> AlgebraElement {
        self.bracket(&self.chevalley_e(i), &self.chevalley_f(i))
    }

    /// Cartan element with ξ-coordinates `h`.
    pub fn cartan_element(&self, h: &[C64]) -> AlgebraElement {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[..self.rank].copy_from_slice(&h[..self.rank]);
        v
    }

    /// Matrix of `ad x` in the basis of `g`.
    pub fn ad_matrix(&self, x: &AlgebraElement) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (a, xa) in x.iter().enumerate() {
            if xa.norm() == 0.0 {
                continue;
            }
            for b in 0..d {
                for &(c, f) in &self.structure[a][b] {
                    m[(c, b)] += xa * f;
                }
            }
        }
        m
    }

    /// `(A|B) = Tr(ad A ad B) / (2h∨)`.
    pub fn normalized_form(&self, x: &AlgebraElement, y: &AlgebraElement) -> C64 {
        (self.ad_matrix(x) * self.ad_matrix(y)).trace() / (2.0 * self.dual_coxeter as f64)
    }

    fn simple_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rank, self.rank, |i, r| self.roots[self.simple_root(i)].chart[r])
    }

    /// `(α_i|α_j)`.
    pub fn cartan_matrix(&self) -> DMatrix<f64> {
        let s = self.simple_matrix();
        &s * s.transpose()
    }

    pub fn weight_from_dynkin(&self, labels: &[C64]) -> Result<Weight, LieError> {
        self.check_len(labels.len())?;
        // (λ|α_i) = a_i, i.e. S λ = a.
        let s = self.simple_matrix().map(|v| C64::new(v, 0.0));
        let a = DVector::from_column_slice(labels);
        let lambda = s.lu().solve(&a).expect("simple roots are a basis");
        Ok(Weight(lambda.iter().copied().collect()))
    }

    pub fn weight_from_simple_roots(&self, coords: &[C64]) -> Result<Weight, LieError> {
        self.check_len(coords.len())?;
        let mut w = Weight::zero(self.rank);
        for (i, c) in coords.iter().enumerate() {
            w = w.add(&self.root_as_weight(self.simple_root(i)).scale(*c));
        }
        Ok(w)
    }

    /// `(λ|α_i)` for each simple root; equals `λ(H_i)` since every root has length² 2.
    pub fn dynkin_labels(&self, w: &Weight) -> Vec<C64> {
        (0..self.rank)
            .map(|i| self.inner(w, &self.root_as_weight(self.simple_root(i))))
            .collect()
    }

    /// Coefficients of `w` in the simple roots.
    pub fn simple_root_coords(&self, w: &Weight) -> Vec<C64> {
        let c = self.cartan_matrix().map(|v| C64::new(v, 0.0));
        let a = DVector::from_vec(self.dynkin_labels(w));
        c.lu().solve(&a).expect("Cartan matrix is invertible").iter().copied().collect()
    }

    /// Weyl dimension formula for a dominant integral weight given by its Dynkin labels.
    pub fn weyl_dimension(&self, labels: &[u32]) -> usize {
        let w = self
            .weight_from_dynkin(&labels.iter().map(|v| C64::new(*v as f64, 0.0)).collect::<Vec<_>>())
            .expect("length checked by caller");
        let rho = self.rho();
        let lr = w.add(&rho);
        let d: f64 = (0..self.num_positive())
            .map(|k| {
                let a = self.root_as_weight(k);
                self.inner(&lr, &a).re / self.inner(&rho, &a).re
            })
            .product();
        d.round() as usize
    }

    fn check_len(&self, len: usize) -> Result<(), LieError> {
        if len != self.rank {
            return Err(LieError::WeightLength {
                expected: self.rank,
                got: len,
            });
        }
        Ok(())
    }
}
