use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ConfigResult, ExperimentConfig, GridSpec};
use super::csv::{flag, num, CsvFile, CsvRow};
use crate::dynamics::{build_liouvillian, steady_state, steady_state_direct, DensityMatrix, ModelKind, SplitGenerator};
use crate::model::{CouplingKind, SystemParams};
use crate::observables::{
    cooling_power, efficiency, kappa_per_chi, performance, virtual_temperature, PerformanceRecord,
};
use crate::{Error, Result};

/// Worker count from `QARBENCH_THREADS`, or rayon's default.
pub fn worker_threads() -> usize {
    std::env::var("QARBENCH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// Order-preserving parallel map.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    match rayon::ThreadPoolBuilder::new().num_threads(worker_threads()).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

fn status_of<T>(r: &Result<T>) -> &'static str {
    match r {
        Ok(_) => "ok",
        Err(e) => e.code(),
    }
}

fn cooling_at(cfg: &ExperimentConfig, p: &SystemParams, temps: [f64; 3], kind: ModelKind) -> Result<f64> {
    let b = cfg.baths(p, temps[0], temps[1], temps[2], cfg.chi)?;
    let l = build_liouvillian(p, &b, kind)?;
    let ss = steady_state_direct(&l)?;
    Ok(cooling_power(&l, &ss.rho_energy))
}

fn record_at(cfg: &ExperimentConfig, g: f64, coupling: CouplingKind, kind: ModelKind) -> Result<PerformanceRecord> {
    let p = cfg.system(g, coupling)?;
    let b = cfg.baths(&p, cfg.t_hot, cfg.t_cold, cfg.t_work, cfg.chi)?;
    let l = build_liouvillian(&p, &b, kind)?;
    let ss = steady_state(&l)?;
    performance(&l, &ss)
}

/// Full performance record at the configured single parameter point,
/// for the first configured Hamiltonian and model.
pub fn single_point(cfg: &ExperimentConfig) -> Result<PerformanceRecord> {
    record_at(cfg, cfg.g, cfg.hamiltonians[0], cfg.models[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    SweepCoupling,
    CoolingWindow,
    PerformanceMap,
    RandomOptimization,
    EntropyScan,
}

impl Study {
    pub const ALL: [Study; 5] = [
        Study::SweepCoupling,
        Study::CoolingWindow,
        Study::PerformanceMap,
        Study::RandomOptimization,
        Study::EntropyScan,
    ];

    /// Defaults of the study, to be overridden by a configuration file.
    pub fn preset(self) -> ExperimentConfig {
        let base = ExperimentConfig::default();
        match self {
            Study::SweepCoupling | Study::PerformanceMap => base,
            Study::CoolingWindow => ExperimentConfig {
                hamiltonians: vec![CouplingKind::Xxx],
                models: vec![ModelKind::CoarseGrained],
                ..base
            },
            Study::RandomOptimization => ExperimentConfig {
                hamiltonians: vec![CouplingKind::Xxx],
                models: vec![ModelKind::CoarseGrained],
                ..base
            },
            Study::EntropyScan => {
                ExperimentConfig { t_hot: 2.0, t_cold: 1.0, t_work: 2.0, hamiltonians: vec![CouplingKind::Xxx], ..base }
            }
        }
    }

    /// Runs the study and renders its CSV outputs.
    pub fn run(self, cfg: &ExperimentConfig) -> ConfigResult<Vec<CsvFile>> {
        Ok(match self {
            Study::SweepCoupling => vec![CsvFile::new("sweep_coupling.csv", &sweep_coupling(cfg)?)],
            Study::CoolingWindow => {
                let w = cooling_window_scan(cfg)?;
                vec![
                    CsvFile::new("cooling_window.csv", &w.cells),
                    CsvFile::new("cooling_window_boundary.csv", &w.boundary),
                ]
            }
            Study::PerformanceMap => {
                let m = performance_map(cfg)?;
                vec![CsvFile::new("performance_map.csv", &m.cells), CsvFile::new("performance_map_ridge.csv", &m.ridge)]
            }
            Study::RandomOptimization => vec![CsvFile::new("random_opt.csv", &random_temperature_optimization(cfg)?)],
            Study::EntropyScan => vec![CsvFile::new("entropy_scan.csv", &entropy_scan(cfg)?)],
        })
    }
}

// ---------------------------------------------------------------- coupling

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub g: f64,
    pub model: ModelKind,
    pub hamiltonian: CouplingKind,
    pub p_c: f64,
    pub p_h: f64,
    pub p_w: f64,
    pub eta: f64,
    pub entropy_rate: f64,
    pub negativity_h_cw: f64,
    pub negativity_c_hw: f64,
    pub coherence_100_011: f64,
    pub residual: f64,
    pub status: &'static str,
}

impl CsvRow for SweepRow {
    const HEADER: &'static [&'static str] = &[
        "g",
        "model",
        "hamiltonian",
        "P_c",
        "P_h",
        "P_w",
        "eta",
        "entropy_rate",
        "negativity_h_cw",
        "negativity_c_hw",
        "coherence_100_011",
        "residual",
        "status",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            num(self.g),
            self.model.name().into(),
            self.hamiltonian.name().into(),
            num(self.p_c),
            num(self.p_h),
            num(self.p_w),
            num(self.eta),
            num(self.entropy_rate),
            num(self.negativity_h_cw),
            num(self.negativity_c_hw),
            num(self.coherence_100_011),
            num(self.residual),
            self.status.into(),
        ]
    }

    fn status(&self) -> &str {
        self.status
    }
}

pub fn sweep_coupling(cfg: &ExperimentConfig) -> ConfigResult<Vec<SweepRow>> {
    let gs = cfg.grid("g", GridSpec::log(1e-3, 1.0, 60))?.points();
    let mut jobs = Vec::new();
    for &model in &cfg.models {
        for &hamiltonian in &cfg.hamiltonians {
            for &g in &gs {
                jobs.push((model, hamiltonian, g));
            }
        }
    }
    Ok(par_map(&jobs, |&(model, hamiltonian, g)| {
        let r = record_at(cfg, g, hamiltonian, model);
        let status = status_of(&r);
        let r = r.ok();
        let f = |get: fn(&PerformanceRecord) -> f64| r.as_ref().map_or(f64::NAN, get);
        SweepRow {
            g,
            model,
            hamiltonian,
            p_c: f(|r| r.p_c),
            p_h: f(|r| r.p_h),
            p_w: f(|r| r.p_w),
            eta: f(|r| r.eta),
            entropy_rate: f(|r| r.entropy_rate),
            negativity_h_cw: f(|r| r.negativity_h_cw),
            negativity_c_hw: f(|r| r.negativity_c_hw),
            coherence_100_011: f(|r| r.coherence_100_011),
            residual: f(|r| r.residual),
            status,
        }
    }))
}

// ---------------------------------------------------------------- windows

#[derive(Debug, Clone, PartialEq)]
pub struct WindowRow {
    pub g: f64,
    pub t_hot: f64,
    pub t_work: f64,
    pub p_c: f64,
    pub cooling: bool,
    pub status: &'static str,
}

impl CsvRow for WindowRow {
    const HEADER: &'static [&'static str] = &["g", "T_h", "T_w", "P_c", "cooling", "status"];

    fn cells(&self) -> Vec<String> {
        vec![num(self.g), num(self.t_hot), num(self.t_work), num(self.p_c), flag(self.cooling), self.status.into()]
    }

    fn status(&self) -> &str {
        self.status
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRow {
    pub g: f64,
    pub t_hot: f64,
    pub t_work: f64,
    pub p_c: f64,
    pub status: &'static str,
}

impl CsvRow for BoundaryRow {
    const HEADER: &'static [&'static str] = &["g", "T_h", "T_w", "P_c", "status"];

    fn cells(&self) -> Vec<String> {
        vec![num(self.g), num(self.t_hot), num(self.t_work), num(self.p_c), self.status.into()]
    }

    fn status(&self) -> &str {
        self.status
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingWindow {
    /// Sorted by `(g, T_h, T_w)`.
    pub cells: Vec<WindowRow>,
    /// `P_c = 0` crossings along `T_w`, sorted by `(g, T_h, T_w)`.
    pub boundary: Vec<BoundaryRow>,
}

/// Residual cooling power at which a bisected boundary point is accepted.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

fn bisect_boundary(
    cfg: &ExperimentConfig,
    p: &SystemParams,
    t_hot: f64,
    kind: ModelKind,
    (mut lo, mut p_lo): (f64, f64),
    (mut hi, mut p_hi): (f64, f64),
) -> BoundaryRow {
    let at = |t_w: f64| cooling_at(cfg, p, [t_hot, cfg.t_cold, t_w], kind);
    let row = |t_work, p_c, status| BoundaryRow { g: p.g, t_hot, t_work, p_c, status };
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let p_mid = match at(mid) {
            Ok(v) => v,
            Err(e) => return row(mid, f64::NAN, e.code()),
        };
        if p_mid.abs() <= BOUNDARY_TOLERANCE {
            return row(mid, p_mid, "ok");
        }
        if (p_mid > 0.0) == (p_lo > 0.0) {
            (lo, p_lo) = (mid, p_mid);
        } else {
            (hi, p_hi) = (mid, p_mid);
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    let (t, v) = if p_lo.abs() < p_hi.abs() { (lo, p_lo) } else { (hi, p_hi) };
    row(t, v, "bisection_stalled")
}

pub fn cooling_window_scan(cfg: &ExperimentConfig) -> ConfigResult<CoolingWindow> {
    let gs = cfg.grid("g", GridSpec::linear(0.1, 0.7, 4))?.points();
    let ths = cfg.grid("T_h", GridSpec::linear(1.0, 2.2, 40))?.points();
    let tws = cfg.grid("T_w", GridSpec::log(1.0, 50.0, 40))?.points();
    let coupling = cfg.hamiltonians[0];
    let kind = cfg.models[0];
    let mut lines = Vec::new();
    for &g in &gs {
        for &t_hot in &ths {
            lines.push((g, t_hot));
        }
    }
    let results = par_map(&lines, |&(g, t_hot)| {
        let p = match cfg.system(g, coupling) {
            Ok(p) => p,
            Err(e) => {
                let cells = tws
                    .iter()
                    .map(|&t_work| WindowRow { g, t_hot, t_work, p_c: f64::NAN, cooling: false, status: e.code() })
                    .collect();
                return (cells, Vec::new());
            }
        };
        let cells: Vec<WindowRow> = tws
            .iter()
            .map(|&t_work| {
                let r = cooling_at(cfg, &p, [t_hot, cfg.t_cold, t_work], kind);
                let p_c = *r.as_ref().unwrap_or(&f64::NAN);
                WindowRow { g, t_hot, t_work, p_c, cooling: p_c > 0.0, status: status_of(&r) }
            })
            .collect();
        let boundary = cells
            .windows(2)
            .filter(|w| w[0].status == "ok" && w[1].status == "ok" && (w[0].p_c > 0.0) != (w[1].p_c > 0.0))
            .map(|w| {
                if w[0].p_c.abs() <= BOUNDARY_TOLERANCE {
                    return BoundaryRow { g, t_hot, t_work: w[0].t_work, p_c: w[0].p_c, status: "ok" };
                }
                bisect_boundary(cfg, &p, t_hot, kind, (w[0].t_work, w[0].p_c), (w[1].t_work, w[1].p_c))
            })
            .collect();
        (cells, boundary)
    });
    let (mut cells, mut boundary) = (Vec::new(), Vec::new());
    for (c, b) in results {
        cells.extend(c);
        boundary.extend(b);
    }
    Ok(CoolingWindow { cells, boundary })
}

// ---------------------------------------------------------------- map

#[derive(Debug, Clone, PartialEq)]
pub struct MapRow {
    pub g: f64,
    pub chi: f64,
    pub kappa_eff: f64,
    pub p_c: f64,
    pub eta: f64,
    pub eta_over_eta_opt: f64,
    pub status: &'static str,
}

impl CsvRow for MapRow {
    const HEADER: &'static [&'static str] = &["g", "chi", "kappa_eff", "P_c", "eta", "eta_over_eta_opt", "status"];

    fn cells(&self) -> Vec<String> {
        vec![
            num(self.g),
            num(self.chi),
            num(self.kappa_eff),
            num(self.p_c),
            num(self.eta),
            num(self.eta_over_eta_opt),
            self.status.into(),
        ]
    }

    fn status(&self) -> &str {
        self.status
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeRow {
    pub g: f64,
    pub kappa_eff_at_max: f64,
    pub p_c_max: f64,
    pub status: &'static str,
}

impl CsvRow for RidgeRow {
    const HEADER: &'static [&'static str] = &["g", "kappa_eff_at_max", "P_c_max", "status"];

    fn cells(&self) -> Vec<String> {
        vec![num(self.g), num(self.kappa_eff_at_max), num(self.p_c_max), self.status.into()]
    }

    fn status(&self) -> &str {
        self.status
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceMap {
    /// Sorted by `(g, κ_eff)`.
    pub cells: Vec<MapRow>,
    /// `argmax_κ P_c` for every `g` of the map.
    pub ridge: Vec<RidgeRow>,
}

impl PerformanceMap {
    /// Completed cell with the largest cooling power.
    pub fn maximum(&self) -> Option<&MapRow> {
        self.cells.iter().filter(|r| r.status == "ok").max_by(|a, b| a.p_c.total_cmp(&b.p_c))
    }
}

pub fn performance_map(cfg: &ExperimentConfig) -> ConfigResult<PerformanceMap> {
    let gs = cfg.grid("g", GridSpec::log(1e-3, 1.0, 50))?.points();
    let kappas = cfg.grid("kappa", GridSpec::log(1e-3, 1.0, 50))?.points();
    let coupling = cfg.hamiltonians[0];
    let kind = cfg.models[0];
    let temps = [cfg.t_hot, cfg.t_cold, cfg.t_work];
    let eta_opt = cfg.omega_c / cfg.omega_w;
    let per_g = par_map(&gs, |&g| {
        let split = cfg.system(g, coupling).and_then(|p| {
            let b = cfg.baths(&p, temps[0], temps[1], temps[2], cfg.chi)?;
            Ok((SplitGenerator::new(&p, &b, kind)?, kappa_per_chi(&p, &temps)))
        });
        let cells: Vec<MapRow> = kappas
            .iter()
            .map(|&kappa_eff| {
                let (chi, powers) = match &split {
                    Ok((s, kpc)) => (kappa_eff / kpc, s.powers(kappa_eff / kpc)),
                    Err(e) => (f64::NAN, Err(e.clone())),
                };
                let status = status_of(&powers);
                let [_, p_c, p_w] = powers.unwrap_or([f64::NAN; 3]);
                let eta = efficiency(p_c, p_w).unwrap_or(f64::NAN);
                MapRow { g, chi, kappa_eff, p_c, eta, eta_over_eta_opt: eta / eta_opt, status }
            })
            .collect();
        let ridge = match cells.iter().filter(|r| r.status == "ok").max_by(|a, b| a.p_c.total_cmp(&b.p_c)) {
            Some(best) => RidgeRow { g, kappa_eff_at_max: best.kappa_eff, p_c_max: best.p_c, status: "ok" },
            None => RidgeRow {
                g,
                kappa_eff_at_max: f64::NAN,
                p_c_max: f64::NAN,
                status: cells.first().map_or("empty", |c| c.status),
            },
        };
        (cells, ridge)
    });
    let (mut cells, mut ridge) = (Vec::new(), Vec::new());
    for (c, r) in per_g {
        cells.extend(c);
        ridge.push(r);
    }
    Ok(PerformanceMap { cells, ridge })
}

// ---------------------------------------------------------------- random

/// Temperature sampling rule of the random optimisation.
///
/// `T_c/ω_c ~ U[1, 10]`, `T_h/T_c − 1 ~ U[0, 0.9 ω_w/ω_c]` and
/// `(ω_h/T_h − ω_c/T_c) T_w/ω_w ~ U[1, 10]`. The last rule places every
/// draw inside the virtual-temperature cooling region, provided the
/// energies are resonant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleLaw {
    pub omega_h: f64,
    pub omega_c: f64,
    pub omega_w: f64,
}

impl SampleLaw {
    /// Resonant panel with `ω_w = ratio · ω_c`.
    pub fn panel(omega_c: f64, ratio: f64) -> Self {
        Self { omega_h: omega_c * (1.0 + ratio), omega_c, omega_w: omega_c * ratio }
    }

    /// Draws `[T_h, T_c, T_w]`.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> [f64; 3] {
        let t_c = self.omega_c * rng.random_range(1.0..=10.0);
        let t_h = t_c * (1.0 + rng.random_range(0.0..=0.9 * self.omega_w / self.omega_c));
        let bias = self.omega_h / t_h - self.omega_c / t_c;
        let t_w = rng.random_range(1.0..=10.0) * self.omega_w / bias;
        [t_h, t_c, t_w]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptRow {
    pub panel: usize,
    pub omega_w: f64,
    pub t_cold: f64,
    pub t_hot: f64,
    pub t_work: f64,
    pub g_opt: f64,
    pub chi_opt: f64,
    pub kappa_eff_opt: f64,
    pub p_c_max: f64,
    pub cooling: bool,
    pub status: &'static str,
}

impl CsvRow for OptRow {
    const HEADER: &'static [&'static str] =
        &["panel", "omega_w", "T_c", "T_h", "T_w", "g_opt", "chi_opt", "kappa_eff_opt", "P_c_max", "cooling", "status"];

    fn cells(&self) -> Vec<String> {
        vec![
            self.panel.to_string(),
            num(self.omega_w),
            num(self.t_cold),
            num(self.t_hot),
            num(self.t_work),
            num(self.g_opt),
            num(self.chi_opt),
            num(self.kappa_eff_opt),
            num(self.p_c_max),
            flag(self.cooling),
            self.status.into(),
        ]
    }

    fn status(&self) -> &str {
        self.status
    }
}

/// Outcome of a two-dimensional log-grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub g: f64,
    pub chi: f64,
    pub p_c: f64,
    /// Best value on the initial coarse grid.
    pub coarse_p_c: f64,
}

#[derive(Default)]
struct Search {
    best: Option<(f64, f64, f64)>,
    first_error: Option<Error>,
}

impl Search {
    fn consider(&mut self, g: f64, split: Result<SplitGenerator>, chis: &[f64]) {
        let split = match split {
            Ok(s) => s,
            Err(e) => {
                self.first_error.get_or_insert(e);
                return;
            }
        };
        for &chi in chis {
            match split.cooling_power(chi) {
                Ok(v) if self.best.is_none_or(|b| v > b.2) => self.best = Some((g, chi, v)),
                Ok(_) => {}
                Err(e) => {
                    self.first_error.get_or_insert(e);
                }
            }
        }
    }
}

/// Zoom rounds after the coarse grid.
pub const ZOOM_ROUNDS: usize = 3;

/// Maximises `P_c(g, χ)` on a coarse log grid, then refines with
/// [`ZOOM_ROUNDS`] rounds of 5×5 grids centred on the incumbent, halving
/// the log step each round.
pub fn maximize_cooling(
    p: &SystemParams,
    temps: [f64; 3],
    kind: ModelKind,
    cfg: &ExperimentConfig,
    g_grid: GridSpec,
    chi_grid: GridSpec,
) -> Result<Optimum> {
    let make = |g: f64| -> Result<SplitGenerator> {
        let pg = p.with_g(g);
        let b = cfg.baths(&pg, temps[0], temps[1], temps[2], cfg.chi)?;
        SplitGenerator::new(&pg, &b, kind)
    };
    let mut search = Search::default();
    let chis = chi_grid.points();
    for g in g_grid.points() {
        search.consider(g, make(g), &chis);
    }
    let coarse_p_c = search.best.map(|b| b.2);
    let step = |grid: &GridSpec| (grid.max / grid.min).ln() / (grid.count - 1) as f64;
    let (mut hg, mut hc) = (step(&g_grid), step(&chi_grid));
    for _ in 0..ZOOM_ROUNDS {
        let Some((g0, c0, _)) = search.best else { break };
        hg /= 2.0;
        hc /= 2.0;
        let around = |x0: f64, h: f64, grid: &GridSpec| -> Vec<f64> {
            (-2..=2).map(|k| (x0 * (k as f64 * h).exp()).clamp(grid.min, grid.max)).collect()
        };
        let chis = around(c0, hc, &chi_grid);
        for g in around(g0, hg, &g_grid) {
            search.consider(g, make(g), &chis);
        }
    }
    match (search.best, coarse_p_c) {
        (Some((g, chi, p_c)), Some(coarse_p_c)) => Ok(Optimum { g, chi, p_c, coarse_p_c }),
        _ => Err(search.first_error.unwrap_or_else(|| Error::InvalidParameter("empty search grid".into()))),
    }
}

/// Counter-based generator for sample `index` of `panel`.
pub fn sample_rng(seed: u64, panel: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((panel as u64) << 32) | index as u64);
    rng
}

pub fn random_temperature_optimization(cfg: &ExperimentConfig) -> ConfigResult<Vec<OptRow>> {
    let g_grid = cfg.grid("g", GridSpec::log(1e-3, 1.0, 12))?;
    let chi_grid = cfg.grid("chi", GridSpec::log(1e-4, 0.1, 12))?;
    if g_grid.scale != super::config::Scale::Log || chi_grid.scale != super::config::Scale::Log {
        return Err(super::config::ConfigError::InvalidValue {
            key: "grid.g.scale".into(),
            value: "linear".into(),
            reason: "the optimiser searches log grids".into(),
        });
    }
    let coupling = cfg.hamiltonians[0];
    let kind = cfg.models[0];
    let mut jobs = Vec::new();
    for (panel, &ratio) in cfg.panels.iter().enumerate() {
        for index in 0..cfg.samples {
            jobs.push((panel, ratio, index));
        }
    }
    Ok(par_map(&jobs, |&(panel, ratio, index)| {
        let law = SampleLaw::panel(cfg.omega_c, ratio);
        let [t_hot, t_cold, t_work] = law.draw(&mut sample_rng(cfg.seed, panel, index));
        let temps = [t_hot, t_cold, t_work];
        let result = SystemParams::new(law.omega_h, law.omega_c, law.omega_w, g_grid.max, coupling).and_then(|p| {
            let opt = maximize_cooling(&p, temps, kind, cfg, g_grid, chi_grid)?;
            Ok((opt, kappa_per_chi(&p, &temps)))
        });
        let status = status_of(&result);
        let (g_opt, chi_opt, kappa_eff_opt, p_c_max) = match result {
            Ok((o, kpc)) => (o.g, o.chi, o.chi * kpc, o.p_c),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        OptRow {
            panel,
            omega_w: law.omega_w,
            t_cold,
            t_hot,
            t_work,
            g_opt,
            chi_opt,
            kappa_eff_opt,
            p_c_max,
            cooling: p_c_max > 0.0,
            status,
        }
    }))
}

// ---------------------------------------------------------------- entropy

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyRow {
    pub g: f64,
    pub model: ModelKind,
    pub entropy_rate: f64,
    pub status: &'static str,
}

impl CsvRow for EntropyRow {
    const HEADER: &'static [&'static str] = &["g", "model", "entropy_rate", "status"];

    fn cells(&self) -> Vec<String> {
        vec![num(self.g), self.model.name().into(), num(self.entropy_rate), self.status.into()]
    }

    fn status(&self) -> &str {
        self.status
    }
}

pub fn entropy_scan(cfg: &ExperimentConfig) -> ConfigResult<Vec<EntropyRow>> {
    let gs = cfg.grid("g", GridSpec::log(1e-3, 1.0, 60))?.points();
    let coupling = cfg.hamiltonians[0];
    let mut jobs = Vec::new();
    for &model in &cfg.models {
        for &g in &gs {
            jobs.push((model, g));
        }
    }
    Ok(par_map(&jobs, |&(model, g)| {
        let r = record_at(cfg, g, coupling, model);
        EntropyRow { g, model, entropy_rate: r.as_ref().map_or(f64::NAN, |r| r.entropy_rate), status: status_of(&r) }
    }))
}

// ---------------------------------------------------------------- evolve

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub p_c: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub status: &'static str,
}

impl CsvRow for TrajectoryRow {
    const HEADER: &'static [&'static str] = &["t", "P_c_instantaneous", "trace", "min_eigenvalue", "status"];

    fn cells(&self) -> Vec<String> {
        vec![num(self.t), num(self.p_c), num(self.trace), num(self.min_eigenvalue), self.status.into()]
    }

    fn status(&self) -> &str {
        self.status
    }
}

/// Relaxation from the thermal product state at the configured point,
/// sampled at `points` equally spaced times in `[0, t_max]`.
pub fn trajectory(cfg: &ExperimentConfig, t_max: f64, points: usize) -> Result<Vec<TrajectoryRow>> {
    if !(t_max > 0.0) || points < 2 {
        return Err(Error::InvalidParameter(format!("t_max = {t_max}, points = {points}")));
    }
    let p = cfg.system(cfg.g, cfg.hamiltonians[0])?;
    let b = cfg.baths(&p, cfg.t_hot, cfg.t_cold, cfg.t_work, cfg.chi)?;
    let l = build_liouvillian(&p, &b, cfg.models[0])?;
    let grid: Vec<f64> = (0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect();
    let mut rows = Vec::with_capacity(points);
    crate::dynamics::evolve_with(&l, &DensityMatrix::thermal_product(&p, &b), &grid, |t, rho| {
        let product = DensityMatrix::new(l.eigensystem.to_product_frame(rho));
        rows.push(TrajectoryRow {
            t,
            p_c: cooling_power(&l, rho),
            trace: product.trace().re,
            min_eigenvalue: product.min_eigenvalue(),
            status: "ok",
        });
    })?;
    Ok(rows)
}

/// Whether the virtual-temperature predicate expects cooling at `temps = [T_h, T_c, T_w]`.
pub fn predicted_cooling(p: &SystemParams, temps: [f64; 3]) -> bool {
    virtual_temperature(p, temps[0], temps[2], temps[1]).is_ok_and(|v| v.cooling_predicted)
}
