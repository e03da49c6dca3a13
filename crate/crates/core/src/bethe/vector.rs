use std::collections::HashMap;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::{BetheConfig, BetheError};
use crate::diffop::{DiffOpError, JetFunction, MatrixJet};
use crate::elliptic::{w_in_c, zeta11};
use crate::gaudin::build_transfer;
use crate::liealg::{BasisElement, RepresentedModule};

/// Below this sup-norm a sample of `Ψ` is treated as vanishing.
pub const PSI_FLOOR: f64 = 1e-13;

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Row vector `ȷ ∘ E_{i_m} ⋯ E_{i_1}` over the module basis, for `word = [i_1, …, i_m]`.
fn raised_pairing(module: &RepresentedModule, rs_e: &[usize], word: &[usize]) -> Vec<C64> {
    let mut row: Vec<C64> = module.jmath.clone().expect("checked by caller");
    for &i in word.iter().rev() {
        let e = module.act(rs_e[i]);
        let mut next = vec![C64::new(0.0, 0.0); row.len()];
        for (c, slot) in next.iter_mut().enumerate() {
            for (r, v) in e.column(c) {
                *slot += row[r] * v;
            }
        }
        row = next;
    }
    row
}

/// `⟨I; v; z_site, t⟩` for every dual basis vector `v` of the site module, as
/// sparse 1×1 jets in ξ.
///
/// Each permutation σ of `subset` contributes
/// `Π_k w_{S_k}(t_{σ(k+1)} − t_{σ(k)}) · w_{S_m}(z − t_{σ(m)}) · ȷ(E_{σ(m)} ⋯ E_{σ(1)} v)`
/// with `S_k = α_{σ(1)} + … + α_{σ(k)}` evaluated at `H`.
pub fn bracket(
    cfg: &BetheConfig,
    site: usize,
    subset: &[usize],
    t: &[C64],
    h: &[C64],
    order: usize,
) -> Result<Vec<(usize, MatrixJet)>, BetheError> {
    let p = &cfg.problem;
    let rs = &p.rs;
    let module = &p.sites[site].module;
    if module.jmath.is_none() {
        return Err(BetheError::NotDualVerma { site });
    }
    let z = p.sites[site].z;
    let e_index: Vec<usize> = (0..rs.rank())
        .map(|i| rs.basis_index(BasisElement::Root(rs.simple_root(i))))
        .collect();
    let mut acc: HashMap<usize, MatrixJet> = HashMap::new();
    let mut rows: HashMap<Vec<usize>, Vec<C64>> = HashMap::new();
    for sigma in permutations(subset) {
        let mut coef = MatrixJet::scalar_constant(h, order, C64::new(1.0, 0.0));
        let mut slope = vec![C64::new(0.0, 0.0); rs.rank()];
        for (k, &j) in sigma.iter().enumerate() {
            let alpha = cfg.root_weight(j);
            for (s, a) in slope.iter_mut().zip(&alpha.0) {
                *s += a;
            }
            let c0: C64 = slope.iter().zip(h).map(|(a, x)| a * x).sum();
            let arg = match sigma.get(k + 1) {
                Some(&next) => t[next] - t[j],
                None => z - t[j],
            };
            let wj = w_in_c(c0, arg, &p.md, order)?;
            coef = coef
                .mul(&MatrixJet::from_univariate(h, &wj, &slope))
                .map_err(|e| BetheError::Gaudin(e.into()))?;
        }
        let word: Vec<usize> = sigma.iter().map(|&j| cfg.assignment[j]).collect();
        let row = rows
            .entry(word.clone())
            .or_insert_with(|| raised_pairing(module, &e_index, &word));
        for (v, x) in row.iter().enumerate() {
            if x.norm() == 0.0 {
                continue;
            }
            let term = coef.scale(*x);
            match acc.get_mut(&v) {
                Some(j) => j.add_assign_scaled(&term, C64::new(1.0, 0.0)),
                None => {
                    acc.insert(v, term);
                }
            }
        }
    }
    let mut out: Vec<(usize, MatrixJet)> = acc.into_iter().collect();
    out.sort_by_key(|(v, _)| *v);
    Ok(out)
}

/// The Bethe vector `Ψ(H; ·)` as a function on `V(0)`.
#[derive(Debug, Clone)]
pub struct BetheVector {
    pub cfg: BetheConfig,
    pub t: Vec<C64>,
}

impl BetheVector {
    pub fn new(cfg: BetheConfig, t: Vec<C64>) -> Result<Self, BetheError> {
        cfg.check_roots(&t)?;
        for (site, s) in cfg.problem.sites.iter().enumerate() {
            if s.module.jmath.is_none() {
                return Err(BetheError::NotDualVerma { site });
            }
            if let crate::liealg::ModuleKind::DualVermaTruncated { depth } = s.module.kind {
                if depth < cfg.m() {
                    return Err(BetheError::DepthShortfall {
                        site,
                        depth,
                        needed: cfg.m(),
                    });
                }
            }
        }
        Ok(Self { cfg, t })
    }

    /// Brackets for every site and every subset of roots (bitmask-indexed).
    fn all_brackets(&self, h: &[C64], order: usize) -> Result<Vec<Vec<HashMap<usize, MatrixJet>>>, BetheError> {
        let m = self.cfg.m();
        let n = self.cfg.problem.nsites();
        let mut out = Vec::with_capacity(n);
        for site in 0..n {
            let mut per = Vec::with_capacity(1 << m);
            for mask in 0..(1usize << m) {
                let subset: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
                per.push(bracket(&self.cfg, site, &subset, &self.t, h, order)?.into_iter().collect());
            }
            out.push(per);
        }
        Ok(out)
    }

    fn assemble(
        &self,
        brackets: &[Vec<HashMap<usize, MatrixJet>>],
        tuple: &[usize],
        h: &[C64],
        order: usize,
    ) -> Result<MatrixJet, BetheError> {
        let m = self.cfg.m();
        let n = self.cfg.problem.nsites();
        let mut total = MatrixJet::scalar_constant(h, order, C64::new(0.0, 0.0));
        // Each root goes to one of the N sites.
        let count = n.pow(m as u32);
        'assign: for code in 0..count {
            let mut masks = vec![0usize; n];
            let mut x = code;
            for j in 0..m {
                masks[x % n] |= 1 << j;
                x /= n;
            }
            let mut term = MatrixJet::scalar_constant(h, order, C64::new(1.0, 0.0));
            for site in 0..n {
                let Some(j) = brackets[site][masks[site]].get(&tuple[site]) else {
                    continue 'assign;
                };
                term = term.mul(j).map_err(|e| BetheError::Gaudin(e.into()))?;
            }
            total.add_assign_scaled(&term, C64::new(1.0, 0.0));
        }
        Ok(total)
    }

    /// `Ψ(H; v_1 ⊗ … ⊗ v_N)` for an arbitrary product basis tuple.
    pub fn eval_tuple(&self, tuple: &[usize], h: &[C64], order: usize) -> Result<MatrixJet, BetheError> {
        let b = self.all_brackets(h, order)?;
        self.assemble(&b, tuple, h, order)
    }

    /// `dim V*(0) × 1` jet of `Ψ` at `H`.
    pub fn jet_at(&self, h: &[C64], order: usize) -> Result<MatrixJet, BetheError> {
        let p = &self.cfg.problem;
        let b = self.all_brackets(h, order)?;
        let mut out = MatrixJet::zeros(h, order, p.dim(), 1);
        for (k, tuple) in p.space.basis().iter().enumerate() {
            let s = self.assemble(&b, tuple, h, order)?;
            for (o, c) in out.coeffs.iter_mut().zip(&s.coeffs) {
                o[(k, 0)] = c[(0, 0)];
            }
        }
        Ok(out)
    }

    pub fn value_at(&self, h: &[C64]) -> Result<DVector<C64>, BetheError> {
        let j = self.jet_at(h, 0)?;
        Ok(DVector::from_column_slice(j.value().as_slice()))
    }
}

impl JetFunction for BetheVector {
    fn jet(&self, at: &[C64], order: usize) -> Result<MatrixJet, DiffOpError> {
        self.jet_at(at, order).map_err(|e| match e {
            BetheError::Elliptic(el) => DiffOpError::Elliptic(el),
            other => DiffOpError::Domain(other.to_string()),
        })
    }
}

/// `ζ̄(h; z, t; u) = Σ_i λ_i(h) ζ₁₁(z_i − u) − Σ_j α_{i(j)}(h) ζ₁₁(t_j − u)`.
pub struct ZetaBar<'a> {
    cfg: &'a BetheConfig,
    t: &'a [C64],
}

impl<'a> ZetaBar<'a> {
    pub fn new(cfg: &'a BetheConfig, t: &'a [C64]) -> Self {
        Self { cfg, t }
    }

    /// Returns `(ζ̄, ∂_u ζ̄)` for the Cartan element with ξ-coordinates `h`.
    pub fn eval(&self, h: &[C64], u: C64) -> Result<(C64, C64), BetheError> {
        let md = &self.cfg.problem.md;
        let mut v = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for (i, s) in self.cfg.problem.sites.iter().enumerate() {
            let lam = self.cfg.site_weight(i).eval(h);
            if lam.norm() == 0.0 {
                continue;
            }
            let z = zeta11(s.z - u, md, 1)?;
            v += lam * z.coeffs[0];
            d -= lam * z.coeffs[1];
        }
        for (j, tj) in self.t.iter().enumerate() {
            let a = self.cfg.root_weight(j).eval(h);
            let z = zeta11(tj - u, md, 1)?;
            v -= a * z.coeffs[0];
            d += a * z.coeffs[1];
        }
        Ok((v, d))
    }

    pub fn value(&self, h: &[C64], u: C64) -> Result<C64, BetheError> {
        Ok(self.eval(h, u)?.0)
    }
}

/// `τ_Ψ(u) = ½ Σ_r ζ̄(h_r)² + ∂_u ζ̄(ρ)`, with `ρ` read as a Cartan element through the form.
pub fn eigenvalue_tau_psi(cfg: &BetheConfig, t: &[C64], u: C64) -> Result<C64, BetheError> {
    let zb = ZetaBar::new(cfg, t);
    let l = cfg.problem.rank();
    let mut out = C64::new(0.0, 0.0);
    for r in 0..l {
        let mut e = vec![C64::new(0.0, 0.0); l];
        e[r] = C64::new(1.0, 0.0);
        let v = zb.value(&e, u)?;
        out += 0.5 * v * v;
    }
    let rho = cfg.problem.rs.rho();
    out += zb.eval(&rho.0, u)?.1;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSample {
    pub u: C64,
    pub h: Vec<C64>,
    pub tau_psi: C64,
    pub psi_norm: f64,
    /// `None` when `Ψ(H)` vanishes.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenReport {
    pub samples: Vec<EigenSample>,
    /// Largest conclusive residual; `None` if every sample was inconclusive.
    pub max_residual: Option<f64>,
    pub inconclusive: usize,
}

/// `‖(τ̂(u)Ψ)(H) − τ_Ψ(u) Ψ(H)‖_∞ / ‖Ψ(H)‖_∞` at each `(u, H)` pair.
pub fn verify_eigenvector(
    cfg: &BetheConfig,
    t: &[C64],
    points: &[(C64, Vec<C64>)],
) -> Result<EigenReport, BetheError> {
    let psi = BetheVector::new(cfg.clone(), t.to_vec())?;
    let mut samples = Vec::with_capacity(points.len());
    for (u, h) in points {
        cfg.problem.check_point(h)?;
        let tau_hat = build_transfer(&cfg.problem, *u)?;
        let tau_psi = eigenvalue_tau_psi(cfg, t, *u)?;
        let value = psi.value_at(h)?;
        let psi_norm = value.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let residual = if psi_norm < PSI_FLOOR {
            None
        } else {
            let applied = tau_hat
                .apply(&psi, h)
                .map_err(|e| BetheError::Gaudin(e.into()))?;
            let diff = applied - &value * tau_psi;
            Some(diff.iter().map(|v| v.norm()).fold(0.0, f64::max) / psi_norm)
        };
        samples.push(EigenSample {
            u: *u,
            h: h.clone(),
            tau_psi,
            psi_norm,
            residual,
        });
    }
    let max_residual = samples
        .iter()
        .filter_map(|s| s.residual)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    let inconclusive = samples.iter().filter(|s| s.residual.is_none()).count();
    Ok(EigenReport {
        samples,
        max_residual,
        inconclusive,
    })
}
