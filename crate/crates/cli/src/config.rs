//! Experiment configuration: TOML in, validated and fully materialized out.

use std::path::Path;

use fgaudin::bethe::CHARGE_TOL;
use fgaudin::elliptic::{lattice_distance, ModularData};
use fgaudin::gaudin::DOMAIN_TOL;
use fgaudin::liealg::{build_root_system, RootSystem, Series, Weight, MAX_IRREP_DIM};
use fgaudin::C64;
use serde::{Deserialize, Serialize};

use crate::complex::Cx;

/// Largest accepted dual Verma truncation depth.
pub const MAX_DEPTH: usize = 12;
pub const MAX_SITES: usize = 6;
pub const MAX_ROOTS: usize = 8;
/// Upper bound on every sample count.
pub const MAX_COUNT: usize = 100_000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("constraint \"{constraint}\" violated: {detail}")]
    Semantic { constraint: &'static str, detail: String },
}

fn semantic(constraint: &'static str, detail: impl Into<String>) -> ConfigError {
    ConfigError::Semantic {
        constraint,
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algebra: AlgebraSection,
    pub elliptic: EllipticSection,
    pub sites: Vec<SiteSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bethe: Option<BetheSection>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSection {
    pub series: String,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticSection {
    pub tau: Cx,
    #[serde(default = "d_eps_term")]
    pub eps_term: f64,
    #[serde(default = "d_n_max")]
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteKind {
    Irrep,
    DualVerma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// `λ(h_i)` for the simple coroots.
    Dynkin(Vec<Cx>),
    /// Coordinates in the basis of simple roots.
    Simple(Vec<Cx>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteSection {
    pub z: Cx,
    pub kind: SiteKind,
    pub weight: WeightSpec,
    /// Truncation depth of a dual Verma module; filled in by validation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetheSection {
    /// 0-based simple root index of each Bethe root.
    pub assignment: Vec<usize>,
    /// Explicit Newton seeds; Halton seeding when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<Vec<Cx>>>,
    #[serde(default = "d_seed_count")]
    pub seed_count: usize,
    #[serde(default = "d_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "d_max_halvings")]
    pub max_halvings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "d_periodicity")]
    pub periodicity: f64,
    #[serde(default = "d_pole_normalization")]
    pub pole_normalization: f64,
    #[serde(default = "d_jet_fd")]
    pub jet_fd: f64,
    #[serde(default = "d_relations")]
    pub relations: f64,
    #[serde(default = "d_commute")]
    pub commute: f64,
    #[serde(default = "d_top_order")]
    pub top_order: f64,
    #[serde(default = "d_tilde_routes")]
    pub tilde_routes: f64,
    #[serde(default = "d_newton")]
    pub newton: f64,
    #[serde(default = "d_dedup")]
    pub dedup: f64,
    #[serde(default = "d_eigen")]
    pub eigen: f64,
    #[serde(default = "d_negative_control")]
    pub negative_control: f64,
    /// Displacement applied to the first Bethe root in the negative control.
    #[serde(default = "d_perturbation")]
    pub perturbation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default = "d_elliptic_points")]
    pub elliptic_points: usize,
    #[serde(default = "d_jet_configs")]
    pub jet_configs: usize,
    #[serde(default = "d_commute_samples")]
    pub commute_samples: usize,
    #[serde(default = "d_tilde_samples")]
    pub tilde_samples: usize,
    #[serde(default = "d_eigen_h")]
    pub eigen_h: usize,
    #[serde(default = "d_eigen_u")]
    pub eigen_u: usize,
    #[serde(default = "d_sweep_points")]
    pub sweep_points: usize,
    #[serde(default = "d_box_re")]
    pub box_re: [f64; 2],
    #[serde(default = "d_box_im")]
    pub box_im: [f64; 2],
    /// Minimum distance of every `α(H)` from the integers.
    #[serde(default = "d_margin")]
    pub margin: f64,
    /// Exclusion radius around sites and Bethe roots for spectral parameters and seeds.
    #[serde(default = "d_pole_guard")]
    pub pole_guard: f64,
    /// Use `u′ = u` in the commutativity check.
    #[serde(default)]
    pub equal_spectral: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "d_seed")]
    pub seed: u64,
}

fn d_eps_term() -> f64 {
    fgaudin::elliptic::DEFAULT_EPS_TERM
}
fn d_n_max() -> usize {
    fgaudin::elliptic::DEFAULT_N_MAX
}
fn d_seed_count() -> usize {
    24
}
fn d_max_iterations() -> usize {
    200
}
fn d_max_halvings() -> usize {
    20
}
fn d_periodicity() -> f64 {
    1e-10
}
fn d_pole_normalization() -> f64 {
    1e-8
}
fn d_jet_fd() -> f64 {
    1e-6
}
fn d_relations() -> f64 {
    1e-12
}
fn d_commute() -> f64 {
    1e-8
}
fn d_top_order() -> f64 {
    1e-12
}
fn d_tilde_routes() -> f64 {
    1e-6
}
fn d_newton() -> f64 {
    1e-12
}
fn d_dedup() -> f64 {
    1e-8
}
fn d_eigen() -> f64 {
    1e-7
}
fn d_negative_control() -> f64 {
    1e-4
}
fn d_perturbation() -> f64 {
    1e-3
}
fn d_elliptic_points() -> usize {
    100
}
fn d_jet_configs() -> usize {
    50
}
fn d_commute_samples() -> usize {
    20
}
fn d_tilde_samples() -> usize {
    10
}
fn d_eigen_h() -> usize {
    5
}
fn d_eigen_u() -> usize {
    5
}
fn d_sweep_points() -> usize {
    100
}
fn d_box_re() -> [f64; 2] {
    [-1.0, 1.0]
}
fn d_box_im() -> [f64; 2] {
    [-0.25, 0.25]
}
fn d_margin() -> f64 {
    0.05
}
fn d_pole_guard() -> f64 {
    0.05
}
fn d_seed() -> u64 {
    1
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            periodicity: d_periodicity(),
            pole_normalization: d_pole_normalization(),
            jet_fd: d_jet_fd(),
            relations: d_relations(),
            commute: d_commute(),
            top_order: d_top_order(),
            tilde_routes: d_tilde_routes(),
            newton: d_newton(),
            dedup: d_dedup(),
            eigen: d_eigen(),
            negative_control: d_negative_control(),
            perturbation: d_perturbation(),
        }
    }
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            elliptic_points: d_elliptic_points(),
            jet_configs: d_jet_configs(),
            commute_samples: d_commute_samples(),
            tilde_samples: d_tilde_samples(),
            eigen_h: d_eigen_h(),
            eigen_u: d_eigen_u(),
            sweep_points: d_sweep_points(),
            box_re: d_box_re(),
            box_im: d_box_im(),
            margin: d_margin(),
            pole_guard: d_pole_guard(),
            equal_spectral: false,
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: d_seed() }
    }
}

impl ExperimentConfig {
    /// Number of Bethe roots, zero without a `[bethe]` section.
    pub fn bethe_roots(&self) -> usize {
        self.bethe.as_ref().map_or(0, |b| b.assignment.len())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config values are always representable in TOML")
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src.as_bytes()[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let col = offset - before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1) + 1;
    (line, col)
}

/// Parses without semantic validation.
pub fn parse_config(src: &str) -> Result<ExperimentConfig, ConfigError> {
    toml::from_str(src).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(src, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

/// Parses and validates, materializing every default.
pub fn load_config_str(src: &str) -> Result<ExperimentConfig, ConfigError> {
    validate(parse_config(src)?)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_config_str(&src)
}

fn finite(z: &Cx) -> bool {
    z.0.re.is_finite() && z.0.im.is_finite()
}

fn positive(name: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(semantic("positive finite tolerance", format!("{name} = {v}")))
    }
}

fn count(name: &'static str, v: usize) -> Result<(), ConfigError> {
    if (1..=MAX_COUNT).contains(&v) {
        Ok(())
    } else {
        Err(semantic("sample count in range", format!("{name} = {v}, allowed 1..={MAX_COUNT}")))
    }
}

pub fn root_system(cfg: &ExperimentConfig) -> Result<RootSystem, ConfigError> {
    let series: Series = cfg
        .algebra
        .series
        .parse()
        .map_err(|e: fgaudin::liealg::LieError| semantic("supported algebra", e.to_string()))?;
    build_root_system(series, cfg.algebra.rank).map_err(|e| semantic("supported algebra", e.to_string()))
}

/// Highest weight of a site in the chart of the root system.
pub fn site_weight(rs: &RootSystem, site: &SiteSection) -> Result<Weight, ConfigError> {
    let (coords, dynkin) = match &site.weight {
        WeightSpec::Dynkin(v) => (v, true),
        WeightSpec::Simple(v) => (v, false),
    };
    if coords.len() != rs.rank() {
        return Err(semantic(
            "weight length equals rank",
            format!("expected {} coordinates, got {}", rs.rank(), coords.len()),
        ));
    }
    if !coords.iter().all(finite) {
        return Err(semantic("finite weight", "weight has a non-finite coordinate"));
    }
    let v: Vec<C64> = coords.iter().map(|c| c.0).collect();
    let w = if dynkin {
        rs.weight_from_dynkin(&v)
    } else {
        rs.weight_from_simple_roots(&v)
    };
    w.map_err(|e| semantic("weight length equals rank", e.to_string()))
}

/// Semantic checks; fills in the default truncation depth of dual Verma sites.
pub fn validate(mut cfg: ExperimentConfig) -> Result<ExperimentConfig, ConfigError> {
    let rs = root_system(&cfg)?;
    let el = &cfg.elliptic;
    if !finite(&el.tau) {
        return Err(semantic("Im τ > 0", "τ is not finite"));
    }
    if !(el.n_max >= 1 && el.n_max <= 1000) {
        return Err(semantic("series cap in range", format!("n_max = {}, allowed 1..=1000", el.n_max)));
    }
    let md = ModularData::with_truncation(el.tau.0, el.eps_term, el.n_max)
        .map_err(|e| semantic("Im τ > 0", e.to_string()))?;

    let n = cfg.sites.len();
    if n == 0 || n > MAX_SITES {
        return Err(semantic("site count in range", format!("{n} sites, allowed 1..={MAX_SITES}")));
    }
    let m = cfg.bethe_roots();
    if m > MAX_ROOTS {
        return Err(semantic("Bethe root count in range", format!("{m} roots, allowed 0..={MAX_ROOTS}")));
    }
    let default_depth = (m + 2).max(m + rs.highest_root_height());
    let mut weights = Vec::with_capacity(n);
    for (i, s) in cfg.sites.iter_mut().enumerate() {
        if !finite(&s.z) {
            return Err(semantic("finite site position", format!("site {i}")));
        }
        let w = site_weight(&rs, s)?;
        match s.kind {
            SiteKind::Irrep => {
                if s.depth.is_some() {
                    return Err(semantic("depth only for dual Verma sites", format!("site {i}")));
                }
                let labels = rs.dynkin_labels(&w);
                let mut ints = Vec::with_capacity(labels.len());
                for l in &labels {
                    let r = l.re.round();
                    if (l - C64::new(r, 0.0)).norm() > 1e-9 || !(0.0..=64.0).contains(&r) {
                        return Err(semantic(
                            "irrep weight dominant integral",
                            format!("site {i} has Dynkin labels {labels:?}"),
                        ));
                    }
                    ints.push(r as u32);
                }
                let dim = rs.weyl_dimension(&ints);
                if dim > MAX_IRREP_DIM {
                    return Err(semantic(
                        "irrep dimension bounded",
                        format!("site {i} has dimension {dim} > {MAX_IRREP_DIM}"),
                    ));
                }
            }
            SiteKind::DualVerma => {
                let d = *s.depth.get_or_insert(default_depth);
                if d > MAX_DEPTH {
                    return Err(semantic("depth bounded", format!("site {i} depth {d} > {MAX_DEPTH}")));
                }
                if d < m {
                    return Err(semantic(
                        "depth covers the Bethe roots",
                        format!("site {i} depth {d} < {m} roots"),
                    ));
                }
            }
        }
        weights.push(w);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if lattice_distance(cfg.sites[i].z.0 - cfg.sites[j].z.0, &md) < DOMAIN_TOL {
                return Err(semantic("sites coincide mod lattice", format!("sites {i} and {j}")));
            }
        }
    }

    if let Some(b) = &cfg.bethe {
        if let Some(&bad) = b.assignment.iter().find(|&&a| a >= rs.rank()) {
            return Err(semantic("assignment names a simple root", format!("index {bad} with rank {}", rs.rank())));
        }
        if let Some(i) = cfg.sites.iter().position(|s| s.kind != SiteKind::DualVerma) {
            return Err(semantic("Bethe sites are dual Verma modules", format!("site {i} is an irrep")));
        }
        let mut defect = vec![C64::new(0.0, 0.0); rs.rank()];
        let mut scale: f64 = 1.0;
        for w in &weights {
            for (d, c) in defect.iter_mut().zip(rs.simple_root_coords(w)) {
                *d += c;
                scale = scale.max(c.norm());
            }
        }
        for &a in &b.assignment {
            defect[a] -= 1.0;
        }
        if defect.iter().any(|d| d.norm() > CHARGE_TOL * scale) {
            return Err(semantic(
                "charge condition Σλ_i = Σα_i(j)",
                format!("defect in simple-root coordinates {defect:?}"),
            ));
        }
        if let Some(seeds) = &b.seeds {
            if seeds.is_empty() || seeds.len() > MAX_COUNT {
                return Err(semantic("seed count in range", format!("{} seeds", seeds.len())));
            }
            if let Some(s) = seeds.iter().find(|s| s.len() != m || !s.iter().all(finite)) {
                return Err(semantic("seed has one finite value per root", format!("{} values", s.len())));
            }
        }
        count("seed_count", b.seed_count)?;
        count("max_iterations", b.max_iterations)?;
        if b.max_halvings > 60 {
            return Err(semantic("halvings bounded", format!("max_halvings = {}", b.max_halvings)));
        }
    }

    let t = &cfg.tolerances;
    for (name, v) in [
        ("periodicity", t.periodicity),
        ("pole_normalization", t.pole_normalization),
        ("jet_fd", t.jet_fd),
        ("relations", t.relations),
        ("commute", t.commute),
        ("top_order", t.top_order),
        ("tilde_routes", t.tilde_routes),
        ("newton", t.newton),
        ("dedup", t.dedup),
        ("eigen", t.eigen),
        ("negative_control", t.negative_control),
        ("perturbation", t.perturbation),
    ] {
        positive(name, v)?;
    }

    let s = &cfg.sampling;
    for (name, v) in [
        ("elliptic_points", s.elliptic_points),
        ("jet_configs", s.jet_configs),
        ("commute_samples", s.commute_samples),
        ("tilde_samples", s.tilde_samples),
        ("eigen_h", s.eigen_h),
        ("eigen_u", s.eigen_u),
        ("sweep_points", s.sweep_points),
    ] {
        count(name, v)?;
    }
    let ok_range = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
    if !ok_range(s.box_re) || !ok_range(s.box_im) {
        return Err(semantic("sample box nonempty", format!("re {:?}, im {:?}", s.box_re, s.box_im)));
    }
    // A margin of ½ or more leaves no admissible point for the sampler.
    if !(s.margin > 0.0 && s.margin < 0.45) || s.box_re[1] - s.box_re[0] < 1.0 {
        return Err(semantic(
            "sample box meets S",
            format!("margin {} with real width {}", s.margin, s.box_re[1] - s.box_re[0]),
        ));
    }
    if !(s.pole_guard > 0.0 && s.pole_guard < 0.2) {
        return Err(semantic("pole guard in (0, 0.2)", format!("pole_guard = {}", s.pole_guard)));
    }
    Ok(cfg)
}
