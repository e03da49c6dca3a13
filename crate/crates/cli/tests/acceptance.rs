//! Acceptance criteria 1–8. Each test prints one `criterion N: PASS|FAIL` line.
//!
//! Lines go straight to the stdout handle so they survive libtest's capture.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use fgaudin::bethe::{solve_bethe, BetheVector, SolverOptions};
use fgaudin::elliptic::{lattice_distance, w_in_c, zeta11, ModularData};
use fgaudin::gaudin::{build_potential, sample_points, GaudinProblem, SampleBox};
use fgaudin::C64;
use fgaudin_cli::checks;
use fgaudin_cli::{run, Command, Instance, Report, RunOptions};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn line(n: u32, title: &str, pass: bool, detail: &str, secs: f64, budget: Option<f64>) -> bool {
    let in_time = budget.is_none_or(|b| secs < b);
    let ok = pass && in_time;
    let time = match budget {
        Some(b) => format!("{secs:.2} s of {b} s"),
        None => format!("{secs:.2} s"),
    };
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {n} [{title}]: {}; {detail}; {time}", if ok { "PASS" } else { "FAIL" }).unwrap();
    out.flush().unwrap();
    ok
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn instance(name: &str) -> Instance {
    Instance::from_toml(&std::fs::read_to_string(configs().join(name)).unwrap()).unwrap()
}

fn residual(rep: &Report, name: &str) -> f64 {
    rep.records
        .iter()
        .find(|r| r.name == name)
        .and_then(|r| r.residual)
        .unwrap_or(f64::INFINITY)
}

const A1_M1: &str = r#"
[algebra]
series = "A"
rank = 1

[elliptic]
tau = "TAU"

[[sites]]
z = "0.1+0.05i"
kind = "dual_verma"
weight = { simple = ["C1"] }

[[sites]]
z = "0.55+0.3i"
kind = "dual_verma"
weight = { simple = ["C2"] }

[bethe]
assignment = [0]
"#;

fn a1_m1(tau: C64, cc: C64) -> Instance {
    let src = A1_M1
        .replace("TAU", &fgaudin_cli::format_complex(tau))
        .replace("C1", &fgaudin_cli::format_complex(cc))
        .replace("C2", &fgaudin_cli::format_complex(c(1.0, 0.0) - cc));
    Instance::from_toml(&src).unwrap()
}

#[test]
fn criterion_1_elliptic_identities() {
    let start = Instant::now();
    let mut worst_p: f64 = 0.0;
    let mut worst_pole: f64 = 0.0;
    for (k, tau) in [c(0.0, 0.8), c(0.3, 1.1)].into_iter().enumerate() {
        let md = ModularData::new(tau).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        let e = checks::periodicity_errors(&md, 100, &mut rng).unwrap();
        worst_p = worst_p.max(e.zeta_1).max(e.zeta_tau).max(e.w_1).max(e.w_tau);
        let (ez, ew) = checks::pole_errors(&md, 20, &mut rng).unwrap();
        worst_pole = worst_pole.max(ez).max(ew);
    }
    let pass = worst_p <= 1e-10 && worst_pole <= 1e-8;
    let detail = format!("quasi-periodicity rel err {worst_p:.2e} (tol 1e-10), pole limits {worst_pole:.2e} (tol 1e-8)");
    assert!(line(1, "elliptic identities", pass, &detail, start.elapsed().as_secs_f64(), Some(5.0)));
}

#[test]
fn criterion_2_jet_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let (mut e_ell, mut e_pi, mut e_psi) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..50 {
        let tau = c(rng.random_range(-0.5..0.5), rng.random_range(0.7..1.5));
        let md = ModularData::new(tau).unwrap();
        e_ell = e_ell.max(checks::elliptic_jet_error(&md, 1, &mut rng).unwrap());
        let inst = a1_m1(tau, c(0.37, 0.11));
        let rank_rs = if k % 2 == 0 {
            inst.rs.clone()
        } else {
            std::sync::Arc::new(fgaudin::liealg::build_root_system(fgaudin::liealg::Series::A, 2).unwrap())
        };
        let h = sample_points(&rank_rs, 1, &SampleBox::default(), &mut rng);
        e_pi = e_pi.max(checks::pi_log_error(&rank_rs, &md, &h).unwrap());
        let sols = inst.solve().unwrap();
        let hp = sample_points(&inst.rs, 1, &SampleBox::default(), &mut rng);
        e_psi = e_psi.max(checks::psi_gradient_error(inst.bethe.as_ref().unwrap(), &sols[0].t, &hp).unwrap());
    }
    let worst = e_ell.max(e_pi).max(e_psi);
    let detail = format!(
        "50 configurations: θ/ζ/w {e_ell:.2e}, ∂log Π {e_pi:.2e}, Ψ {e_psi:.2e} (tol 1e-6)"
    );
    assert!(line(2, "jet correctness", worst <= 1e-6, &detail, start.elapsed().as_secs_f64(), Some(10.0)));
}

#[test]
fn criterion_3_commutativity() {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (label, file) in [
        ("(a) A1 fund⊗fund", "a1_fund_fund.toml"),
        ("(b) A1 fund⊗fund⊗adj", "a1_fund_fund_adjoint.toml"),
        ("(c) A2 3⊗3̄", "a2_three_antithree.toml"),
    ] {
        let inst = instance(file);
        assert_eq!(inst.cfg.sampling.commute_samples, 20);
        let rep = run(Command::CommuteCheck, &inst, RunOptions::default());
        let n = residual(&rep, "commute.normalized");
        let t = residual(&rep, "commute.top_order");
        pass &= n <= 1e-8 && t <= 1e-12;
        parts.push(format!("{label} {n:.2e}/{t:.2e}"));
    }
    let detail = format!(
        "normalized/top-order residuals {} (tol 1e-8/1e-12, 20 samples each)",
        parts.join(", ")
    );
    assert!(line(3, "commutativity", pass, &detail, start.elapsed().as_secs_f64(), Some(60.0)));
}

#[test]
fn criterion_4_eigenvector_one_root() {
    let start = Instant::now();
    let tau = c(0.1, 0.9);
    let inst = a1_m1(tau, c(0.37, 0.11));
    let rep = run(Command::EigenCheck, &inst, RunOptions::default());
    let (smp, tol) = (&inst.cfg.sampling, &inst.cfg.tolerances);
    assert_eq!((smp.eigen_h, smp.eigen_u, tol.perturbation), (5, 5, 1e-3));
    let eig = residual(&rep, "eigen.residual");
    let neg = residual(&rep, "eigen.negative_control");

    // Symmetric case: (z₁+z₂)/2 + 1/2 must be among the solver's roots.
    let sym = a1_m1(tau, c(0.5, 0.0));
    let cfg = sym.bethe.as_ref().unwrap();
    let sols = solve_bethe(cfg, &sym.seeds(cfg), &SolverOptions::default()).unwrap();
    let z = [sym.problem.sites[0].z, sym.problem.sites[1].z];
    let want = (z[0] + z[1]) / 2.0 + 0.5;
    let gap = sols
        .iter()
        .map(|s| lattice_distance(s.t[0] - want, &sym.md))
        .fold(f64::INFINITY, f64::min);

    let pass = eig <= 1e-7 && neg > 1e-4 && gap <= 1e-9;
    let detail = format!(
        "eigen-residual {eig:.2e} (tol 1e-7, 25 points), negative control {neg:.2e} (> 1e-4), symmetric root gap {gap:.2e} (tol 1e-9)"
    );
    assert!(line(4, "eigenvector, M=1", pass, &detail, start.elapsed().as_secs_f64(), Some(30.0)));
}

/// `Ψ(H)` summed over root-to-site assignments and orderings, all `α_{i(j)} = α`.
fn psi_oracle(p: &GaudinProblem, t: &[C64], h: &[C64]) -> Vec<C64> {
    let md = &p.md;
    let a = h[0] * SQRT_2;
    let wv = |cc: C64, x: C64| w_in_c(cc, x, md, 0).unwrap().value();
    let m = t.len();
    let n = p.nsites();
    // ȷ(E^k v) per site and basis vector.
    let jpow: Vec<Vec<Vec<C64>>> = p
        .sites
        .iter()
        .map(|s| {
            let e = s.module.element_matrix(&p.rs.chevalley_e(0));
            let jm = nalgebra::DVector::from_vec(s.module.jmath.clone().unwrap());
            (0..=m)
                .map(|k| {
                    let mut ek = DMatrix::<C64>::identity(s.module.dim(), s.module.dim());
                    for _ in 0..k {
                        ek = &e * ek;
                    }
                    (0..s.module.dim()).map(|v| jm.dot(&ek.column(v))).collect()
                })
                .collect()
        })
        .collect();
    let perms = |set: &[usize]| -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..set.len() {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<usize>| {
                    set.iter()
                        .filter(|&&x| !prefix.contains(&x))
                        .map(|&x| {
                            let mut q = prefix.clone();
                            q.push(x);
                            q
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        out
    };
    // Σ_σ Π_k w_{kα}(t_σ(k+1) − t_σ(k)) · w_{mα}(z − t_σ(m)).
    let weight = |site: usize, set: &[usize]| -> C64 {
        if set.is_empty() {
            return c(1.0, 0.0);
        }
        perms(set)
            .iter()
            .map(|s| {
                let mut v = c(1.0, 0.0);
                for k in 1..s.len() {
                    v *= wv(a * k as f64, t[s[k]] - t[s[k - 1]]);
                }
                v * wv(a * s.len() as f64, p.sites[site].z - t[s[s.len() - 1]])
            })
            .sum()
    };
    let mut out = Vec::with_capacity(p.dim());
    for tup in p.space.basis() {
        let mut total = c(0.0, 0.0);
        for code in 0..n.pow(m as u32) {
            let mut owner = Vec::with_capacity(m);
            let mut x = code;
            for _ in 0..m {
                owner.push(x % n);
                x /= n;
            }
            let mut term = c(1.0, 0.0);
            for (site, &v) in tup.iter().enumerate() {
                let set: Vec<usize> = (0..m).filter(|&j| owner[j] == site).collect();
                term *= weight(site, &set) * jpow[site][set.len()][v];
            }
            total += term;
        }
        out.push(total);
    }
    out
}

#[test]
fn criterion_5_eigenvector_two_roots() {
    let start = Instant::now();
    let inst = instance("a1_dual_verma_m2.toml");
    let rep = run(Command::EigenCheck, &inst, RunOptions::default());
    let eig = residual(&rep, "eigen.residual");
    let sols = inst.solve().unwrap();
    let cfg = inst.bethe.as_ref().unwrap();
    let t = &sols[0].t;
    let psi = BetheVector::new(cfg.clone(), t.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut gap: f64 = 0.0;
    for h in sample_points(&inst.rs, 5, &SampleBox::default(), &mut rng) {
        let got = psi.value_at(&h).unwrap();
        let want = psi_oracle(&inst.problem, t, &h);
        let scale = want.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let d = got.iter().zip(&want).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        gap = gap.max(d / scale);
    }
    let pass = eig <= 1e-6 && gap <= 1e-10;
    let detail = format!("eigen-residual {eig:.2e} (tol 1e-6), Ψ vs partition/permutation oracle {gap:.2e} (tol 1e-10)");
    assert!(line(5, "eigenvector, M=2", pass, &detail, start.elapsed().as_secs_f64(), Some(60.0)));
}

#[test]
fn criterion_6_conjugation_identity() {
    let start = Instant::now();
    let inst = instance("a1_fund_fund.toml");
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let hs = sample_points(&inst.rs, 10, &SampleBox::default(), &mut rng);
    let us = inst.sample_u(10, &[], &mut rng).unwrap();
    let worst = hs
        .iter()
        .zip(&us)
        .map(|(h, u)| checks::tilde_route_error(&inst.problem, *u, h).unwrap())
        .fold(0.0, f64::max);
    let detail = format!("Π⁻¹τ̂Π vs explicit τ̃, 10 samples, rel err {worst:.2e} (tol 1e-6)");
    assert!(line(6, "conjugation identity", worst <= 1e-6, &detail, start.elapsed().as_secs_f64(), Some(20.0)));
}

fn cot(z: C64) -> C64 {
    z.cos() / z.sin()
}

/// `w_c(z) = π(cot πz − cot πc) + 4π Σ_{n,m≥1} qⁿᵐ sin 2π(nz − mc)`, summed while `nm ≤ 4`.
fn w_small_q(q: f64, cc: C64, x: C64) -> C64 {
    let mut v = (cot(x * PI) - cot(cc * PI)) * PI;
    for n in 1..=4 {
        for m in 1..=4 / n {
            v += ((x * n as f64 - cc * m as f64) * (2.0 * PI)).sin() * (4.0 * PI * q.powi((n * m) as i32));
        }
    }
    v
}

/// Small-q A_1 fund⊗fund potential on `V*(0) = span{φ₀⊗φ₁, φ₁⊗φ₀}`.
fn trig_potential(p: &GaudinProblem, q: f64, u: C64, xi: C64) -> DMatrix<C64> {
    let wt = |cc: C64, x: C64| w_small_q(q, cc, x);
    let a = xi * SQRT_2;
    let e = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let f = e.transpose();
    let id = DMatrix::<C64>::identity(2, 2);
    let at = |site: usize, m: &DMatrix<C64>| if site == 0 { m.kronecker(&id) } else { id.kronecker(m) };
    let z = [p.sites[0].z, p.sites[1].z];
    let mut full = DMatrix::<C64>::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            // α and −α; the right action transposes ρ_i(e_α)ρ_j(e_{−α}).
            full += (at(i, &e) * at(j, &f)).transpose() * (wt(a, z[i] - u) * wt(-a, z[j] - u) * 0.5);
            full += (at(i, &f) * at(j, &e)).transpose() * (wt(-a, z[i] - u) * wt(a, z[j] - u) * 0.5);
        }
    }
    let idx: Vec<usize> = p.space.basis().iter().map(|t| 2 * t[0] + t[1]).collect();
    DMatrix::from_fn(idx.len(), idx.len(), |r, s| full[(idx[r], idx[s])])
}

#[test]
fn criterion_7_trigonometric_degeneration() {
    let start = Instant::now();
    let md = ModularData::from_nome(c(1e-10, 0.0)).unwrap();
    let mut zeta_gap: f64 = 0.0;
    for i in 0..10 {
        for j in -3..=3 {
            let z = c(0.05 + 0.1 * i as f64, 0.1 * j as f64);
            let want = cot(z * PI) * PI;
            zeta_gap = zeta_gap.max((zeta11(z, &md, 0).unwrap().value() - want).norm());
        }
    }
    let src = std::fs::read_to_string(configs().join("a1_fund_fund.toml")).unwrap();
    let base = Instance::from_toml(&src).unwrap();
    let p = GaudinProblem::new(base.rs.clone(), md.clone(), base.problem.sites.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let mut pot_gap: f64 = 0.0;
    for h in sample_points(&p.rs, 5, &SampleBox::default(), &mut rng) {
        let u = c(rng.random_range(0.2..0.4), rng.random_range(-0.2..0.2));
        let op = build_potential(&p, u).unwrap();
        let got = op.coefficients_at(&h, 0).unwrap();
        let got = got.iter().find(|(b, _)| b.iter().all(|&x| x == 0)).unwrap().1.value().clone();
        let want = trig_potential(&p, 1e-10, u, h[0]);
        let scale = want.iter().map(|v| v.norm()).fold(0.0, f64::max);
        pot_gap = pot_gap.max((got - want).iter().map(|v| v.norm()).fold(0.0, f64::max) / scale);
    }
    let pass = zeta_gap <= 1e-8 && pot_gap <= 1e-6;
    let detail = format!(
        "q = 1e-10: |ζ − π cot πz| {zeta_gap:.2e} (tol 1e-8), A1 potential vs small-q oracle {pot_gap:.2e} (tol 1e-6)"
    );
    assert!(line(7, "degeneration", pass, &detail, start.elapsed().as_secs_f64(), Some(5.0)));
}

#[test]
fn criterion_8_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("a1_dual_verma_m1.toml");
    let mut outs = Vec::new();
    for k in 0..2 {
        let d = dir.path().join(k.to_string());
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_fgaudin"))
            .args(["full-verify", "--format", "jsonl", "--seed", "2024", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&d)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        outs.push(std::fs::read(d.join("report.jsonl")).unwrap());
    }
    let same = outs[0] == outs[1] && !outs[0].is_empty();
    let lines = outs[0].iter().filter(|&&b| b == b'\n').count();
    let detail = format!("two full-verify runs, seed 2024: {lines} JSON lines, byte-identical = {same}");
    assert!(line(8, "determinism", same, &detail, start.elapsed().as_secs_f64(), None));
}

#[test]
fn small_q_oracle_tracks_the_theta_quotient() {
    let md = ModularData::from_nome(c(1e-3, 0.0)).unwrap();
    for (cc, x) in [(c(0.3, 0.1), c(0.2, -0.1)), (c(-0.7, 0.05), c(0.45, 0.2))] {
        let got = w_in_c(cc, x, &md, 0).unwrap().value();
        assert!((got - w_small_q(1e-3, cc, x)).norm() < 1e-10 * got.norm().max(1.0));
    }
}

