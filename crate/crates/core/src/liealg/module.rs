use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::roots::{AlgebraElement, RootSystem, Weight};

/// Modules up to this dimension store dense matrices.
pub const DENSE_LIMIT: usize = 64;

/// Square matrix of a module operator.
#[derive(Debug, Clone, PartialEq)]
pub enum ModuleMatrix {
    Dense(DMatrix<C64>),
    /// Column-major triplets: `cols[j]` lists `(i, value)` with value ≠ 0.
    Sparse { dim: usize, cols: Vec<Vec<(usize, C64)>> },
}

impl ModuleMatrix {
    pub fn from_columns(dim: usize, cols: Vec<Vec<(usize, C64)>>) -> Self {
        if dim <= DENSE_LIMIT {
            let mut m = DMatrix::zeros(dim, dim);
            for (j, col) in cols.iter().enumerate() {
                for &(i, v) in col {
                    m[(i, j)] += v;
                }
            }
            ModuleMatrix::Dense(m)
        } else {
            ModuleMatrix::Sparse { dim, cols }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModuleMatrix::Dense(m) => m.nrows(),
            ModuleMatrix::Sparse { dim, .. } => *dim,
        }
    }

    /// Nonzero entries of column `j`.
    pub fn column(&self, j: usize) -> Vec<(usize, C64)> {
        match self {
            ModuleMatrix::Dense(m) => m
                .column(j)
                .iter()
                .enumerate()
                .filter(|(_, v)| v.norm() != 0.0)
                .map(|(i, v)| (i, *v))
                .collect(),
            ModuleMatrix::Sparse { cols, .. } => cols[j].clone(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match self {
            ModuleMatrix::Dense(m) => m.clone(),
            ModuleMatrix::Sparse { dim, cols } => {
                let mut m = DMatrix::zeros(*dim, *dim);
                for (j, col) in cols.iter().enumerate() {
                    for &(i, v) in col {
                        m[(i, j)] += v;
                    }
                }
                m
            }
        }
    }

    pub fn transpose(&self) -> Self {
        match self {
            ModuleMatrix::Dense(m) => ModuleMatrix::Dense(m.transpose()),
            ModuleMatrix::Sparse { dim, cols } => {
                let mut out = vec![Vec::new(); *dim];
                for (j, col) in cols.iter().enumerate() {
                    for &(i, v) in col {
                        out[i].push((j, v));
                    }
                }
                ModuleMatrix::Sparse { dim: *dim, cols: out }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModuleKind {
    Irreducible,
    DualVermaTruncated { depth: usize },
}

/// A weight module with explicit matrices for every basis element of `g`.
#[derive(Debug, Clone)]
pub struct RepresentedModule {
    pub kind: ModuleKind,
    pub highest: Weight,
    /// Simple-root coordinates of the highest weight.
    pub highest_simple: Vec<C64>,
    /// Per basis vector: simple-root coordinates of `λ − wt`.
    pub depths: Vec<Vec<u32>>,
    pub weights: Vec<Weight>,
    /// Indexed like the basis of `g`.
    pub generators: Vec<ModuleMatrix>,
    /// Covector dual to the highest weight vector (dual Vermas only).
    pub jmath: Option<Vec<C64>>,
    /// PBW words (positive-root indices) labelling each basis vector.
    pub words: Vec<Vec<usize>>,
}

impl RepresentedModule {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn height(&self, v: usize) -> u32 {
        self.depths[v].iter().sum()
    }

    pub fn act(&self, a: usize) -> &ModuleMatrix {
        &self.generators[a]
    }

    /// Dense matrix of `ρ(x)`.
    pub fn element_matrix(&self, x: &AlgebraElement) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (a, xa) in x.iter().enumerate() {
            if xa.norm() != 0.0 {
                m += self.generators[a].to_dense() * *xa;
            }
        }
        m
    }

    /// `ȷ(v)`; zero for modules without a pairing.
    pub fn pair(&self, v: &[C64]) -> C64 {
        match &self.jmath {
            Some(j) => j.iter().zip(v).map(|(a, b)| a * b).sum(),
            None => C64::new(0.0, 0.0),
        }
    }
}

/// Matrix of the right action `ρ*(x)`, i.e. the transpose of `ρ(x)`.
pub fn dual_action(module: &RepresentedModule, x: &AlgebraElement) -> DMatrix<C64> {
    module.element_matrix(x).transpose()
}

fn apply_sparse(m: &ModuleMatrix, v: &HashMap<usize, C64>) -> HashMap<usize, C64> {
    let mut out: HashMap<usize, C64> = HashMap::new();
    for (&j, &x) in v {
        for (i, a) in m.column(j) {
            *out.entry(i).or_default() += a * x;
        }
    }
    out
}

/// `max ‖[ρ(X),ρ(Y)] − ρ([X,Y])‖_∞` over all pairs of basis elements of `g`.
///
/// A truncated dual Verma module is only checked on vectors of height at most
/// `depth − ht θ`, where no intermediate vector leaves the truncation.
pub fn commutation_defect(rs: &RootSystem, module: &RepresentedModule) -> f64 {
    let limit = match module.kind {
        ModuleKind::Irreducible => u32::MAX,
        ModuleKind::DualVermaTruncated { depth } => match depth.checked_sub(rs.highest_root_height()) {
            Some(l) => l as u32,
            None => return 0.0,
        },
    };
    let mut worst: f64 = 0.0;
    for v in (0..module.dim()).filter(|&v| module.height(v) <= limit) {
        let ev: HashMap<usize, C64> = [(v, C64::new(1.0, 0.0))].into();
        let images: Vec<HashMap<usize, C64>> = module.generators.iter().map(|g| apply_sparse(g, &ev)).collect();
        for a in 0..rs.dim() {
            for b in 0..rs.dim() {
                let mut diff = apply_sparse(&module.generators[a], &images[b]);
                for (i, x) in apply_sparse(&module.generators[b], &images[a]) {
                    *diff.entry(i).or_default() -= x;
                }
                for &(c, f) in rs.bracket_basis(a, b) {
                    for (&i, &x) in &images[c] {
                        *diff.entry(i).or_default() -= x * f;
                    }
                }
                worst = diff.values().map(|x| x.norm()).fold(worst, f64::max);
            }
        }
    }
    worst
}
