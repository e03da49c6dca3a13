//! Instance construction and orchestration of the subcommands.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use fgaudin::bethe::{
    bethe_system, eigenvalue_tau_psi, halton_seeds, solve_bethe, verify_eigenvector, BetheConfig, BetheSolution,
    SolverOptions,
};
use fgaudin::elliptic::{theta11, w, zeta11, ModularData};
use fgaudin::gaudin::{commutativity_residual, try_sample_points, GaudinProblem, SampleBox, Site};
use fgaudin::liealg::{build_dual_verma, build_irrep, commutation_defect, RepresentedModule, RootSystem};
use fgaudin::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::checks::{self, guarded_point};
use crate::complex::format_complex;
use crate::config::{self, ConfigError, ExperimentConfig, SiteKind};
use crate::report::{Comparison, Record, Report, SweepRow, TableRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Command {
    EllipticCheck,
    DescribeAlgebra,
    CommuteCheck,
    BetheSolve,
    EigenCheck,
    FullVerify,
}

impl Command {
    pub fn needs_bethe(self) -> bool {
        matches!(self, Command::BetheSolve | Command::EigenCheck)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Verify the eigenvector at deliberately perturbed roots.
    pub negative_control: bool,
}

/// A validated configuration with its modules, Gaudin problem and Bethe data built.
#[derive(Debug, Clone)]
pub struct Instance {
    pub cfg: ExperimentConfig,
    pub digest: String,
    pub rs: Arc<RootSystem>,
    pub md: ModularData,
    pub problem: GaudinProblem,
    pub bethe: Option<BetheConfig>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// First 16 hex digits of the SHA-256 of the canonical TOML.
pub fn digest(cfg: &ExperimentConfig) -> String {
    hex(&Sha256::digest(cfg.to_toml().as_bytes())[..8])
}

fn built(constraint: &'static str, e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Semantic {
        constraint,
        detail: e.to_string(),
    }
}

impl Instance {
    pub fn build(cfg: ExperimentConfig) -> Result<Self, ConfigError> {
        let cfg = config::validate(cfg)?;
        let rs = Arc::new(config::root_system(&cfg)?);
        let el = &cfg.elliptic;
        let md = ModularData::with_truncation(el.tau.0, el.eps_term, el.n_max).map_err(|e| built("Im τ > 0", e))?;
        let mut cache: HashMap<String, Arc<RepresentedModule>> = HashMap::new();
        let mut sites = Vec::with_capacity(cfg.sites.len());
        for s in &cfg.sites {
            let wgt = config::site_weight(&rs, s)?;
            let key = format!("{:?}/{:?}/{:?}", s.kind, s.depth, wgt.0);
            let module = match cache.get(&key) {
                Some(m) => m.clone(),
                None => {
                    let m = match s.kind {
                        SiteKind::Irrep => build_irrep(&rs, &wgt),
                        SiteKind::DualVerma => build_dual_verma(&rs, &wgt, s.depth.expect("validation fills the depth")),
                    }
                    .map_err(|e| built("module buildable", e))?;
                    let m = Arc::new(m);
                    cache.insert(key, m.clone());
                    m
                }
            };
            sites.push(Site { z: s.z.0, module });
        }
        let problem =
            GaudinProblem::new(rs.clone(), md.clone(), sites).map_err(|e| built("well-posed Gaudin problem", e))?;
        if problem.dim() == 0 {
            return Err(built("zero-weight space nonempty", "V*(0) = 0"));
        }
        let bethe = match &cfg.bethe {
            Some(b) => Some(
                BetheConfig::new(problem.clone(), b.assignment.clone())
                    .map_err(|e| built("assignment names a simple root", e))?,
            ),
            None => None,
        };
        let digest = digest(&cfg);
        Ok(Self {
            cfg,
            digest,
            rs,
            md,
            problem,
            bethe,
        })
    }

    pub fn from_toml(src: &str) -> Result<Self, ConfigError> {
        Self::build(config::parse_config(src)?)
    }

    pub fn sample_box(&self) -> SampleBox {
        let s = &self.cfg.sampling;
        SampleBox {
            re: (s.box_re[0], s.box_re[1]),
            im: (s.box_im[0], s.box_im[1]),
            margin: s.margin,
        }
    }

    /// Independent RNG stream for each check group.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.cfg.run.seed);
        r.set_stream(stream);
        r
    }

    pub fn sample_h(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<C64>>, String> {
        try_sample_points(&self.rs, n, &self.sample_box(), rng, 10_000 * n + 10_000)
            .ok_or_else(|| "sample box contains too few points of S".to_string())
    }

    /// Spectral parameters away from the sites and from `extra`.
    pub fn sample_u(&self, n: usize, extra: &[C64], rng: &mut ChaCha8Rng) -> Result<Vec<C64>, String> {
        let mut avoid: Vec<C64> = self.problem.sites.iter().map(|s| s.z).collect();
        avoid.extend_from_slice(extra);
        (0..n)
            .map(|_| {
                guarded_point(&self.md, &avoid, self.cfg.sampling.pole_guard, rng)
                    .ok_or_else(|| "pole guards cover the cell".to_string())
            })
            .collect()
    }

    pub fn solver_options(&self) -> SolverOptions {
        let t = &self.cfg.tolerances;
        let b = self.cfg.bethe.as_ref();
        SolverOptions {
            tolerance: t.newton,
            max_iterations: b.map_or(200, |b| b.max_iterations),
            max_halvings: b.map_or(20, |b| b.max_halvings),
            dedup_tolerance: t.dedup,
        }
    }

    pub fn seeds(&self, cfg: &BetheConfig) -> Vec<Vec<C64>> {
        let b = self.cfg.bethe.as_ref().expect("Bethe data present");
        match &b.seeds {
            Some(s) => s.iter().map(|v| v.iter().map(|c| c.0).collect()).collect(),
            None => halton_seeds(cfg, b.seed_count, self.cfg.sampling.pole_guard),
        }
    }

    /// All converged solutions, best conditioned first.
    pub fn solve(&self) -> Result<Vec<BetheSolution>, String> {
        let cfg = self.bethe.as_ref().ok_or("no [bethe] section")?;
        let mut sols = solve_bethe(cfg, &self.seeds(cfg), &self.solver_options()).map_err(|e| e.to_string())?;
        sols.sort_by(|a, b| a.condition_estimate.total_cmp(&b.condition_estimate));
        Ok(sols)
    }
}

fn cstr(z: C64) -> String {
    format_complex(z)
}

fn timed(name: &str, inst: &Instance, f: impl FnOnce() -> Result<Report, String>) -> Report {
    let start = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f));
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let mut rep = match out {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => Report {
            records: vec![Record::error(name, &inst.digest, e)],
            ..Report::default()
        },
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            Report {
                records: vec![Record::error(name, &inst.digest, format!("panic: {msg}"))],
                ..Report::default()
            }
        }
    };
    for r in &mut rep.records {
        r.wall_ms = ms;
    }
    rep
}

fn elliptic_check(inst: &Instance) -> Result<Report, String> {
    let md = &inst.md;
    let (tol, smp) = (&inst.cfg.tolerances, &inst.cfg.sampling);
    let d = &inst.digest;
    let mut rng = inst.rng(1);
    let mut rep = Report::default();
    let e = checks::periodicity_errors(md, smp.elliptic_points, &mut rng).map_err(|e| e.to_string())?;
    let n = smp.elliptic_points;
    for (name, v, law) in [
        ("elliptic.zeta_period_1", e.zeta_1, "ζ(z+1) = ζ(z)"),
        ("elliptic.zeta_period_tau", e.zeta_tau, "ζ(z+τ) = ζ(z) − 2πi"),
        ("elliptic.w_period_1", e.w_1, "w_c(z+1) = w_c(z)"),
        ("elliptic.w_period_tau", e.w_tau, "w_c(z+τ) = e^{2πic} w_c(z)"),
    ] {
        rep.records.push(
            Record::measured(name, d, v, tol.periodicity, Comparison::AtMost).with_detail(format!("{law}, {n} points")),
        );
    }
    let (ez, ew) = checks::pole_errors(md, 10, &mut rng).map_err(|e| e.to_string())?;
    rep.records.push(
        Record::measured("elliptic.zeta_pole", d, ez, tol.pole_normalization, Comparison::AtMost)
            .with_detail("z·ζ(z) → 1"),
    );
    rep.records.push(
        Record::measured("elliptic.w_pole", d, ew, tol.pole_normalization, Comparison::AtMost)
            .with_detail("z·w_c(z) → 1"),
    );
    let ej = checks::elliptic_jet_error(md, smp.jet_configs, &mut rng).map_err(|e| e.to_string())?;
    rep.records.push(
        Record::measured("elliptic.jets_fd", d, ej, tol.jet_fd, Comparison::AtMost)
            .with_detail(format!("θ, ζ, w jets vs finite differences, {} configurations", smp.jet_configs)),
    );
    let hs = inst.sample_h(smp.jet_configs.min(10), &mut rng)?;
    let ep = checks::pi_log_error(&inst.rs, md, &hs).map_err(|e| e.to_string())?;
    rep.records.push(
        Record::measured("elliptic.pi_log_fd", d, ep, tol.jet_fd, Comparison::AtMost)
            .with_detail("∂ log Π vs finite differences"),
    );

    // Table along a horizontal line through the cell.
    let c = C64::new(1.0 / 3.0, 0.0) + md.tau() * 0.2;
    let np = smp.sweep_points;
    for k in 0..np {
        let z = C64::new(k as f64 / np as f64, 0.0) + md.tau() * 0.37;
        let val = |r: Result<fgaudin::elliptic::ScalarJet, _>| r.ok().map(|j| (j.value().re, j.value().im));
        rep.table.push(TableRow {
            z: (z.re, z.im),
            theta: val(theta11(z, md, 0)),
            zeta: val(zeta11(z, md, 0)),
            w: w(c, z, md, 0, 0).ok().map(|j| (j.value().re, j.value().im)),
        });
    }
    Ok(rep)
}

fn describe_algebra(inst: &Instance) -> Result<Report, String> {
    let rs = &inst.rs;
    let d = &inst.digest;
    let mut rep = Report::default();
    rep.notes.push(format!(
        "algebra {}_{}: dim {}, dual Coxeter number {}",
        rs.series(),
        rs.rank(),
        rs.dim(),
        rs.dual_coxeter()
    ));
    for (k, root) in rs.positive_roots().iter().enumerate() {
        let coords: Vec<String> = root.simple_coords.iter().map(|c| c.to_string()).collect();
        rep.notes.push(format!("  positive root {k}: [{}] height {}", coords.join(", "), root.height));
    }
    let rho: Vec<String> = rs.dynkin_labels(&rs.rho()).iter().map(|c| cstr(*c)).collect();
    rep.notes.push(format!("  ρ Dynkin labels: [{}]", rho.join(", ")));
    let mut worst: f64 = 0.0;
    for (i, s) in inst.problem.sites.iter().enumerate() {
        let m = &s.module;
        let labels: Vec<String> = rs.dynkin_labels(&m.highest).iter().map(|c| cstr(*c)).collect();
        rep.notes.push(format!(
            "  site {i}: z = {}, {:?}, highest weight Dynkin [{}], dim {}",
            cstr(s.z),
            m.kind,
            labels.join(", "),
            m.dim()
        ));
        worst = worst.max(commutation_defect(rs, m));
    }
    rep.notes.push(format!("  dim V*(0) = {}", inst.problem.dim()));
    rep.records.push(
        Record::measured("algebra.relations", d, worst, inst.cfg.tolerances.relations, Comparison::AtMost)
            .with_detail("[ρ(X), ρ(Y)] = ρ([X, Y]) on every site module"),
    );
    rep.records
        .push(Record::info("algebra.zero_weight_space", d, format!("dim V*(0) = {}", inst.problem.dim())));
    Ok(rep)
}

fn commute_check(inst: &Instance) -> Result<Report, String> {
    let (tol, smp) = (&inst.cfg.tolerances, &inst.cfg.sampling);
    let d = &inst.digest;
    let p = &inst.problem;
    let mut rng = inst.rng(2);
    let hs = inst.sample_h(smp.commute_samples, &mut rng)?;
    let us = inst.sample_u(2 * smp.commute_samples, &[], &mut rng)?;
    let (mut worst, mut top) = (0.0f64, 0.0f64);
    for (k, h) in hs.iter().enumerate() {
        let u = us[2 * k];
        let u2 = if smp.equal_spectral { u } else { us[2 * k + 1] };
        let rep = commutativity_residual(p, u, u2, std::slice::from_ref(h)).map_err(|e| e.to_string())?;
        worst = worst.max(rep.max_normalized);
        top = top.max(rep.max_top_order);
    }
    let mut rep = Report::default();
    let which = if smp.equal_spectral { "u′ = u" } else { "independent u, u′" };
    rep.records.push(
        Record::measured("commute.normalized", d, worst, tol.commute, Comparison::AtMost)
            .with_detail(format!("[τ̂(u), τ̂(u′)] over {} samples, {which}", hs.len())),
    );
    rep.records.push(
        Record::measured("commute.top_order", d, top, tol.top_order, Comparison::AtMost)
            .with_detail("orders 3 and 4 of the commutator"),
    );

    let mut rng = inst.rng(3);
    let hs = inst.sample_h(smp.tilde_samples, &mut rng)?;
    let us = inst.sample_u(smp.tilde_samples, &[], &mut rng)?;
    let mut gap: f64 = 0.0;
    for (h, u) in hs.iter().zip(&us) {
        gap = gap.max(checks::tilde_route_error(p, *u, h).map_err(|e| e.to_string())?);
    }
    rep.records.push(
        Record::measured("commute.tilde_routes", d, gap, tol.tilde_routes, Comparison::AtMost)
            .with_detail(format!("Π⁻¹ τ̂ Π vs explicit τ̃ over {} samples", hs.len())),
    );
    Ok(rep)
}

fn solutions_json(sols: &[BetheSolution]) -> serde_json::Value {
    let c = |v: &[C64]| v.iter().map(|z| cstr(*z)).collect::<Vec<_>>();
    json!(sols
        .iter()
        .map(|s| json!({
            "t": c(&s.t),
            "seed": c(&s.seed),
            "iterations": s.iterations,
            "residual": s.residual_norm,
            "condition": s.condition_estimate,
        }))
        .collect::<Vec<_>>())
}

fn bethe_solve(inst: &Instance) -> Result<Report, String> {
    let cfg = inst.bethe.as_ref().ok_or("no [bethe] section")?;
    let d = &inst.digest;
    let tol = &inst.cfg.tolerances;
    let mut rep = Report::default();
    let defect = cfg.charge_defect().iter().map(|v| v.norm()).fold(0.0, f64::max);
    rep.records.push(
        Record::measured("bethe.charge", d, defect, fgaudin::bethe::CHARGE_TOL, Comparison::AtMost)
            .with_detail("Σλ_i − Σα_i(j) in simple-root coordinates"),
    );
    let sols = inst.solve()?;
    let mut worst: f64 = 0.0;
    for s in &sols {
        let (f, _) = bethe_system(cfg, &s.t).map_err(|e| e.to_string())?;
        worst = worst.max(f.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    rep.records.push(
        Record::measured("bethe.newton", d, worst, tol.newton, Comparison::AtMost)
            .with_detail(format!("{} distinct solutions from {} seeds", sols.len(), inst.seeds(cfg).len()))
            .with_data(solutions_json(&sols)),
    );
    Ok(rep)
}

fn eigen_check(inst: &Instance, opts: RunOptions) -> Result<Report, String> {
    let cfg = inst.bethe.as_ref().ok_or("no [bethe] section")?;
    let d = &inst.digest;
    let (tol, smp) = (&inst.cfg.tolerances, &inst.cfg.sampling);
    let sols = inst.solve()?;
    let t = sols[0].t.clone();
    let mut bad = t.clone();
    if let Some(t0) = bad.first_mut() {
        *t0 += tol.perturbation;
    }
    let mut rng = inst.rng(4);
    let hs = inst.sample_h(smp.eigen_h, &mut rng)?;
    let mut avoid = t.clone();
    avoid.extend_from_slice(&bad);
    let us = inst.sample_u(smp.eigen_u, &avoid, &mut rng)?;
    let points: Vec<(C64, Vec<C64>)> = us.iter().flat_map(|u| hs.iter().map(move |h| (*u, h.clone()))).collect();

    let mut rep = Report::default();
    let verify = |roots: &[C64]| verify_eigenvector(cfg, roots, &points).map_err(|e| e.to_string());
    let main_roots = if opts.negative_control { &bad } else { &t };
    let er = verify(main_roots)?;
    let what = if opts.negative_control {
        format!("negative control: t_0 displaced by {:e}", tol.perturbation)
    } else {
        format!("t = [{}]", t.iter().map(|z| cstr(*z)).collect::<Vec<_>>().join(", "))
    };
    let rec = match er.max_residual {
        Some(r) => Record::measured("eigen.residual", d, r, tol.eigen, Comparison::AtMost).with_detail(format!(
            "{what}; {} points, {} inconclusive",
            points.len(),
            er.inconclusive
        )),
        None => Record::info(
            "eigen.residual",
            d,
            format!("{what}; inconclusive: Ψ vanishes at all {} points", points.len()),
        ),
    };
    rep.records.push(rec);
    if !opts.negative_control && !t.is_empty() {
        let nr = verify(&bad)?;
        let rec = match nr.max_residual {
            Some(r) => Record::measured("eigen.negative_control", d, r, tol.negative_control, Comparison::Above)
                .with_detail(format!("t_0 displaced by {:e}", tol.perturbation)),
            None => Record::info("eigen.negative_control", d, "inconclusive: Ψ vanishes at all points"),
        };
        rep.records.push(rec);
    }
    let gh = &hs[..hs.len().min(3)];
    let eg = checks::psi_gradient_error(cfg, &t, gh).map_err(|e| e.to_string())?;
    rep.records.push(
        Record::measured("eigen.psi_jets_fd", d, eg, tol.jet_fd, Comparison::AtMost)
            .with_detail("∂Ψ, ∂²Ψ vs finite differences"),
    );

    // τ_Ψ(u) along a horizontal line, Re u increasing.
    let np = smp.sweep_points;
    let offset = inst.md.tau() * 0.37;
    for k in 0..np {
        let u = C64::new(k as f64 / np as f64, 0.0) + offset;
        let tau = eigenvalue_tau_psi(cfg, &t, u).ok().map(|v| (v.re, v.im));
        rep.sweep.push(SweepRow {
            u_re: u.re,
            u_im: u.im,
            tau,
        });
    }
    Ok(rep)
}

/// Runs the checks of `command`; failures are recorded, never propagated.
pub fn run(command: Command, inst: &Instance, opts: RunOptions) -> Report {
    let mut rep = Report::default();
    let all = command == Command::FullVerify;
    if command == Command::EllipticCheck || all {
        rep.extend(timed("elliptic", inst, || elliptic_check(inst)));
    }
    if command == Command::DescribeAlgebra || all {
        rep.extend(timed("algebra", inst, || describe_algebra(inst)));
    }
    if command == Command::CommuteCheck || all {
        rep.extend(timed("commute", inst, || commute_check(inst)));
    }
    let bethe = inst.bethe.is_some();
    if command == Command::BetheSolve || (all && bethe) {
        rep.extend(timed("bethe", inst, || bethe_solve(inst)));
    }
    if command == Command::EigenCheck || (all && bethe) {
        rep.extend(timed("eigen", inst, || eigen_check(inst, opts)));
    }
    rep.sort();
    rep
}
