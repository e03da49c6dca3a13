//! Verma modules on the PBW basis, their finite quotients and their duals.
//!
//! A PBW word is a nondecreasing list of positive-root indices `p_1 ≤ … ≤ p_k`
//! standing for `e_{−β_{p_1}} ⋯ e_{−β_{p_k}} v_λ`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::module::{ModuleKind, ModuleMatrix, RepresentedModule};
use super::roots::{BasisElement, RootSystem, Weight};
use super::LieError;

type Word = Vec<usize>;
type Combo = Vec<(Word, C64)>;

/// Largest module `build_irrep` will construct.
pub const MAX_IRREP_DIM: usize = 4096;

const INTEGRALITY_TOL: f64 = 1e-9;

struct Pbw<'a> {
    rs: &'a RootSystem,
    lambda: &'a Weight,
    max_height: i64,
    act_cache: HashMap<(usize, Word), Combo>,
    ins_cache: HashMap<(usize, Word), Combo>,
}

fn accumulate(acc: &mut BTreeMap<Word, C64>, terms: &Combo, scale: C64) {
    for (w, c) in terms {
        *acc.entry(w.clone()).or_insert(C64::new(0.0, 0.0)) += c * scale;
    }
}

fn finish(acc: BTreeMap<Word, C64>) -> Combo {
    acc.into_iter().filter(|(_, c)| c.norm() != 0.0).collect()
}

impl<'a> Pbw<'a> {
    fn new(rs: &'a RootSystem, lambda: &'a Weight, max_height: usize) -> Self {
        Self {
            rs,
            lambda,
            max_height: max_height as i64,
            act_cache: HashMap::new(),
            ins_cache: HashMap::new(),
        }
    }

    fn height(&self, w: &[usize]) -> i64 {
        w.iter().map(|&p| self.rs.root(p).height).sum()
    }

    fn lowering_index(&self, p: usize) -> usize {
        self.rs.basis_index(BasisElement::Root(self.rs.negative_of(p)))
    }

    /// `e_{−β_p} · word`, rewritten in PBW order.
    fn insert(&mut self, p: usize, w: &[usize]) -> Combo {
        if self.height(w) + self.rs.root(p).height > self.max_height {
            return Vec::new();
        }
        if w.is_empty() || p <= w[0] {
            let mut out = Vec::with_capacity(w.len() + 1);
            out.push(p);
            out.extend_from_slice(w);
            return vec![(out, C64::new(1.0, 0.0))];
        }
        let key = (p, w.to_vec());
        if let Some(hit) = self.ins_cache.get(&key) {
            return hit.clone();
        }
        let q = w[0];
        let rest = &w[1..];
        let mut acc = BTreeMap::new();
        // f_p f_q rest = f_q (f_p rest) + [f_p, f_q] rest
        for (w2, c) in self.insert(p, rest) {
            let t = self.insert(q, &w2);
            accumulate(&mut acc, &t, c);
        }
        let (fp, fq) = (self.lowering_index(p), self.lowering_index(q));
        for &(b, f) in self.rs.bracket_basis(fp, fq).to_vec().iter() {
            let BasisElement::Root(k) = self.rs.basis_element(b) else {
                unreachable!("negative root vectors close on negative root vectors")
            };
            let t = self.insert(self.rs.negative_of(k), rest);
            accumulate(&mut acc, &t, C64::new(f, 0.0));
        }
        let out = finish(acc);
        self.ins_cache.insert(key, out.clone());
        out
    }

    /// Basis element `a` of `g` acting on a word.
    fn act(&mut self, a: usize, w: &[usize]) -> Combo {
        match self.rs.basis_element(a) {
            BasisElement::Cartan(r) => {
                let mut v = self.lambda.0[r];
                for &p in w {
                    v -= self.rs.root(p).chart[r];
                }
                if v.norm() == 0.0 {
                    Vec::new()
                } else {
                    vec![(w.to_vec(), v)]
                }
            }
            BasisElement::Root(k) => {
                let positive = k < self.rs.num_positive();
                if w.is_empty() {
                    return if positive {
                        Vec::new()
                    } else {
                        self.insert(self.rs.negative_of(k), w)
                    };
                }
                if !positive {
                    return self.insert(self.rs.negative_of(k), w);
                }
                let key = (a, w.to_vec());
                if let Some(hit) = self.act_cache.get(&key) {
                    return hit.clone();
                }
                let p = w[0];
                let rest = &w[1..];
                let mut acc = BTreeMap::new();
                // X f_p rest = f_p (X rest) + [X, f_p] rest
                for (w2, c) in self.act(a, rest) {
                    let t = self.insert(p, &w2);
                    accumulate(&mut acc, &t, c);
                }
                let fp = self.lowering_index(p);
                for &(b, f) in self.rs.bracket_basis(a, fp).to_vec().iter() {
                    let t = self.act(b, rest);
                    accumulate(&mut acc, &t, C64::new(f, 0.0));
                }
                let out = finish(acc);
                self.act_cache.insert(key, out.clone());
                out
            }
        }
    }

    /// Shapovalov pairing `⟨u, w⟩`: coefficient of `v_λ` in `σ(u) w`.
    fn shapovalov(&mut self, u: &[usize], w: &[usize]) -> C64 {
        let mut vec: Combo = vec![(w.to_vec(), C64::new(1.0, 0.0))];
        for &p in u {
            let e = self.rs.basis_index(BasisElement::Root(p));
            let mut acc = BTreeMap::new();
            for (w2, c) in &vec {
                let t = self.act(e, w2);
                accumulate(&mut acc, &t, *c);
            }
            vec = finish(acc);
        }
        vec.iter()
            .find(|(w2, _)| w2.is_empty())
            .map(|(_, c)| *c)
            .unwrap_or_default()
    }
}

/// Every PBW word of height at most `max_height`, ordered by height then lexicographically.
fn words_up_to(rs: &RootSystem, max_height: usize) -> Vec<Word> {
    fn rec(rs: &RootSystem, start: usize, budget: i64, cur: &mut Word, out: &mut Vec<Word>) {
        out.push(cur.clone());
        for p in start..rs.num_positive() {
            let h = rs.root(p).height;
            if h <= budget {
                cur.push(p);
                rec(rs, p, budget - h, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(rs, 0, max_height as i64, &mut Vec::new(), &mut out);
    out.sort_by_key(|w| (w.iter().map(|&p| rs.root(p).height).sum::<i64>(), w.clone()));
    out
}

fn word_depth(rs: &RootSystem, w: &[usize]) -> Vec<u32> {
    let mut d = vec![0u32; rs.rank()];
    for &p in w {
        for (i, c) in rs.root(p).simple_coords.iter().enumerate() {
            d[i] += *c as u32;
        }
    }
    d
}

fn depth_weight(rs: &RootSystem, lambda: &Weight, depth: &[u32]) -> Weight {
    let mut w = lambda.clone();
    for (i, d) in depth.iter().enumerate() {
        w = w.sub(&rs.root_as_weight(rs.simple_root(i)).scale(C64::new(*d as f64, 0.0)));
    }
    w
}

/// Dual of the Verma module `M_λ`, truncated to PBW height `depth`.
///
/// The matrix of `X` is the transpose of the Verma matrix of `σ(X)` in the
/// basis dual to the PBW words, so raising operators are exact everywhere and
/// lowering operators lose only the components that would leave the truncation.
pub fn build_dual_verma(
    rs: &RootSystem,
    lambda: &Weight,
    depth: usize,
) -> Result<RepresentedModule, LieError> {
    if depth == 0 {
        return Err(LieError::DepthTooSmall);
    }
    if lambda.0.len() != rs.rank() {
        return Err(LieError::WeightLength {
            expected: rs.rank(),
            got: lambda.0.len(),
        });
    }
    let words = words_up_to(rs, depth);
    let index: HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let dim = words.len();
    let mut pbw = Pbw::new(rs, lambda, depth);
    let verma: Vec<ModuleMatrix> = (0..rs.dim())
        .map(|a| {
            let cols = words
                .iter()
                .map(|w| {
                    pbw.act(a, w)
                        .into_iter()
                        .filter_map(|(w2, c)| index.get(&w2).map(|&i| (i, c)))
                        .collect()
                })
                .collect();
            ModuleMatrix::from_columns(dim, cols)
        })
        .collect();
    let generators = (0..rs.dim())
        .map(|a| verma[rs.transpose_index(a)].transpose())
        .collect();
    let depths: Vec<Vec<u32>> = words.iter().map(|w| word_depth(rs, w)).collect();
    let weights = depths.iter().map(|d| depth_weight(rs, lambda, d)).collect();
    let mut jmath = vec![C64::new(0.0, 0.0); dim];
    jmath[0] = C64::new(1.0, 0.0);
    Ok(RepresentedModule {
        kind: ModuleKind::DualVermaTruncated { depth },
        highest: lambda.clone(),
        highest_simple: rs.simple_root_coords(lambda),
        depths,
        weights,
        generators,
        jmath: Some(jmath),
        words,
    })
}

/// Dynkin labels of `λ` if it is dominant integral.
pub fn dominant_labels(rs: &RootSystem, lambda: &Weight) -> Result<Vec<u32>, LieError> {
    let labels = rs.dynkin_labels(lambda);
    let mut out = Vec::with_capacity(labels.len());
    for a in &labels {
        let r = a.re.round();
        if a.im.abs() > INTEGRALITY_TOL || (a.re - r).abs() > INTEGRALITY_TOL || r < 0.0 {
            return Err(LieError::NonDominantWeight {
                labels: labels.iter().map(|v| (v.re, v.im)).collect(),
            });
        }
        out.push(r as u32);
    }
    Ok(out)
}

/// Picks rows of a Gram matrix greedily until they span its row space.
fn independent_rows(g: &DMatrix<C64>) -> Vec<usize> {
    let scale = g.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-9 * scale;
    let mut ortho: Vec<DVector<C64>> = Vec::new();
    let mut picked = Vec::new();
    for i in 0..g.nrows() {
        let mut r: DVector<C64> = g.row(i).transpose();
        for q in &ortho {
            let c = q.dotc(&r);
            r -= q * c;
        }
        let n = r.norm();
        if n > tol {
            ortho.push(r / C64::new(n, 0.0));
            picked.push(i);
        }
    }
    picked
}

/// Finite-dimensional irreducible module `L(λ)` as the quotient of the Verma
/// module by the radical of its Shapovalov form.
pub fn build_irrep(rs: &RootSystem, lambda: &Weight) -> Result<RepresentedModule, LieError> {
    if lambda.0.len() != rs.rank() {
        return Err(LieError::WeightLength {
            expected: rs.rank(),
            got: lambda.0.len(),
        });
    }
    let labels = dominant_labels(rs, lambda)?;
    let expected = rs.weyl_dimension(&labels);
    if expected > MAX_IRREP_DIM {
        return Err(LieError::ModuleTooLarge {
            dim: expected,
            limit: MAX_IRREP_DIM,
        });
    }
    // Every weight of L(λ) lies above the lowest weight w₀λ.
    let max_height = (0..rs.num_positive())
        .map(|k| rs.inner(lambda, &rs.root_as_weight(k)).re.round() as usize)
        .sum::<usize>();
    let words = words_up_to(rs, max_height);
    let mut spaces: BTreeMap<Vec<u32>, Vec<Word>> = BTreeMap::new();
    for w in words {
        spaces.entry(word_depth(rs, &w)).or_default().push(w);
    }
    let mut pbw = Pbw::new(rs, lambda, max_height);

    struct Space {
        words: Vec<Word>,
        gram: DMatrix<C64>,
        chosen: Vec<usize>,
        first: usize,
    }
    let mut by_depth: BTreeMap<Vec<u32>, Space> = BTreeMap::new();
    let mut order: Vec<(Vec<u32>, usize)> = Vec::new();
    let mut total = 0;
    // Sort weight spaces by height so the basis is graded.
    let mut depths: Vec<Vec<u32>> = spaces.keys().cloned().collect();
    depths.sort_by_key(|d| (d.iter().sum::<u32>(), d.clone()));
    for d in depths {
        let ws = spaces.remove(&d).expect("key from map");
        let n = ws.len();
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = pbw.shapovalov(&ws[i], &ws[j]);
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let chosen = independent_rows(&gram);
        if chosen.is_empty() {
            continue;
        }
        for k in 0..chosen.len() {
            order.push((d.clone(), k));
        }
        let first = total;
        total += chosen.len();
        by_depth.insert(
            d,
            Space {
                words: ws,
                gram,
                chosen,
                first,
            },
        );
    }
    if total != expected {
        return Err(LieError::DimensionMismatch {
            built: total,
            expected,
        });
    }

    let lu: BTreeMap<&Vec<u32>, _> = by_depth
        .iter()
        .map(|(d, s)| {
            let sub = DMatrix::from_fn(s.chosen.len(), s.chosen.len(), |i, j| {
                s.gram[(s.chosen[i], s.chosen[j])]
            });
            (d, sub.lu())
        })
        .collect();
    let word_pos: BTreeMap<&Vec<u32>, HashMap<&Word, usize>> = by_depth
        .iter()
        .map(|(d, s)| (d, s.words.iter().enumerate().map(|(i, w)| (w, i)).collect()))
        .collect();

    let mut generators = Vec::with_capacity(rs.dim());
    for a in 0..rs.dim() {
        let mut cols = Vec::with_capacity(total);
        for (d, k) in &order {
            let s = &by_depth[d];
            let src = &s.words[s.chosen[*k]];
            let image = pbw.act(a, src);
            if image.is_empty() {
                cols.push(Vec::new());
                continue;
            }
            let td = word_depth(rs, &image[0].0);
            let Some(t) = by_depth.get(&td) else {
                cols.push(Vec::new());
                continue;
            };
            let pos = &word_pos[&td];
            let rhs = DVector::from_fn(t.chosen.len(), |i, _| {
                image
                    .iter()
                    .map(|(w, c)| t.gram[(t.chosen[i], pos[w])] * c)
                    .sum::<C64>()
            });
            let coords = lu[&td].solve(&rhs).expect("chosen Gram block is nonsingular");
            cols.push(
                coords
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.norm() > 1e-14)
                    .map(|(i, c)| (t.first + i, *c))
                    .collect(),
            );
        }
        generators.push(ModuleMatrix::from_columns(total, cols));
    }

    let depths: Vec<Vec<u32>> = order.iter().map(|(d, _)| d.clone()).collect();
    let weights = depths.iter().map(|d| depth_weight(rs, lambda, d)).collect();
    let words = order
        .iter()
        .map(|(d, k)| {
            let s = &by_depth[d];
            s.words[s.chosen[*k]].clone()
        })
        .collect();
    Ok(RepresentedModule {
        kind: ModuleKind::Irreducible,
        highest: lambda.clone(),
        highest_simple: rs.simple_root_coords(lambda),
        depths,
        weights,
        generators,
        jmath: None,
        words,
    })
}
