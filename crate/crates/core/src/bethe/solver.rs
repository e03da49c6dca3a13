use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{bethe_system, check_charge, BetheConfig, BetheError};
use crate::elliptic::lattice_distance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub dedup_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 200,
            max_halvings: 20,
            dedup_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetheSolution {
    pub t: Vec<C64>,
    pub seed: Vec<C64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// `σ_max / σ_min` of the Jacobian at the solution.
    pub condition_estimate: f64,
}

fn sup_norm(v: &DVector<C64>) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

enum Outcome {
    Converged(BetheSolution),
    Failed(f64),
}

fn newton(cfg: &BetheConfig, seed: &[C64], opts: &SolverOptions) -> Outcome {
    let mut t = seed.to_vec();
    let Ok((mut f, mut jac)) = bethe_system(cfg, &t) else {
        return Outcome::Failed(f64::INFINITY);
    };
    let mut norm = sup_norm(&f);
    for it in 0..=opts.max_iterations {
        if norm < opts.tolerance {
            let sv = jac.clone().singular_values();
            let (mx, mn) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), s| (a.max(*s), b.min(*s)));
            return Outcome::Converged(BetheSolution {
                t,
                seed: seed.to_vec(),
                residual_norm: norm,
                iterations: it,
                condition_estimate: if mn > 0.0 { mx / mn } else { f64::INFINITY },
            });
        }
        if it == opts.max_iterations {
            break;
        }
        let Some(step) = jac.clone().lu().solve(&(-&f)) else {
            return Outcome::Failed(norm);
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<C64> = t.iter().zip(step.iter()).map(|(a, d)| a + d * lambda).collect();
            if let Ok((f2, j2)) = bethe_system(cfg, &trial) {
                let n2 = sup_norm(&f2);
                if n2.is_finite() && n2 < norm {
                    t = trial;
                    f = f2;
                    jac = j2;
                    norm = n2;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Outcome::Failed(norm);
        }
    }
    Outcome::Failed(norm)
}

/// Whether two root sets agree modulo the lattice and permutations of roots with equal `α_{i(j)}`.
fn same_solution(cfg: &BetheConfig, a: &[C64], b: &[C64], tol: f64) -> bool {
    let md = &cfg.problem.md;
    let mut used = vec![false; b.len()];
    for (j, ta) in a.iter().enumerate() {
        let hit = (0..b.len()).find(|&k| {
            !used[k]
                && cfg.assignment[k] == cfg.assignment[j]
                && lattice_distance(ta - b[k], md) < tol
        });
        match hit {
            Some(k) => used[k] = true,
            None => return false,
        }
    }
    true
}

/// Damped Newton from every seed in parallel; converged roots are de-duplicated.
pub fn solve_bethe(
    cfg: &BetheConfig,
    seeds: &[Vec<C64>],
    opts: &SolverOptions,
) -> Result<Vec<BetheSolution>, BetheError> {
    if !check_charge(cfg) {
        return Err(BetheError::Charge {
            defect: cfg.charge_defect().iter().map(|v| (v.re, v.im)).collect(),
        });
    }
    for s in seeds {
        if s.len() != cfg.m() {
            return Err(BetheError::RootCount {
                expected: cfg.m(),
                got: s.len(),
            });
        }
    }
    let outcomes: Vec<Outcome> = seeds.par_iter().map(|s| newton(cfg, s, opts)).collect();
    let mut best = f64::INFINITY;
    let mut found: Vec<BetheSolution> = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Converged(sol) => {
                best = best.min(sol.residual_norm);
                if !found.iter().any(|f| same_solution(cfg, &f.t, &sol.t, opts.dedup_tolerance)) {
                    found.push(sol);
                }
            }
            Outcome::Failed(r) => best = best.min(r),
        }
    }
    if found.is_empty() {
        return Err(BetheError::NoConvergence {
            seeds: seeds.len(),
            best,
        });
    }
    Ok(found)
}

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base) as f64 * inv;
        n /= base;
        inv /= base as f64;
    }
    out
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Halton points `t_j = a + bτ` over the fundamental cell, skipping any whose
/// roots come within `guard` of a site or of each other.
pub fn halton_seeds(cfg: &BetheConfig, count: usize, guard: f64) -> Vec<Vec<C64>> {
    let m = cfg.m();
    assert!(2 * m <= PRIMES.len(), "Halton seeding supports at most 8 roots");
    let tau = cfg.problem.md.tau();
    let md = &cfg.problem.md;
    let mut out = Vec::with_capacity(count);
    let mut n = 1u64;
    // Enough draws to fill `count` unless the guard disks cover the cell.
    let limit = 1000 * count as u64 + 1000;
    while out.len() < count && n < limit {
        let t: Vec<C64> = (0..m)
            .map(|j| {
                let a = radical_inverse(n, PRIMES[2 * j]);
                let b = radical_inverse(n, PRIMES[2 * j + 1]);
                tau * b + a
            })
            .collect();
        n += 1;
        let clear_sites = t.iter().all(|tj| {
            cfg.problem
                .sites
                .iter()
                .all(|s| lattice_distance(tj - s.z, md) >= guard)
        });
        let clear_roots = (0..m).all(|j| ((j + 1)..m).all(|k| lattice_distance(t[j] - t[k], md) >= guard));
        if clear_sites && clear_roots {
            out.push(t);
        }
    }
    out
}
