//! Subcommands. Each writes its tables under the output directory together with the
//! resolved configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use lmg_rat::analysis::{
    classical_point, fit_area, fit_coupling, join_curve, quantum_sweep, scaling_epsilon_max, ClassicalPoint,
    CouplingFit, IslandSummary, PowerLawFit, SplittingCurve,
};
use lmg_rat::classical::{poincare_section, StroboscopicMap};
use lmg_rat::extraction::{harmonic_splitting, rat_splitting, PendulumParams};
use lmg_rat::floquet::FloquetBuilder;
use lmg_rat::quantum::{build_spin_matrices, quantum_period, select_resonant_index, ResonanceSpec, SpectrumCache, StaticSpectrum};
use lmg_rat::{Kick, Resonance, Spin};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::output::{num, opt, parse_num, read_csv, write_csv, write_json};
use crate::CliError;

pub const POINCARE_HEADER: [&str; 4] = ["seed_id", "iter", "phi", "z"];
pub const SPECTRUM_HEADER: [&str; 5] = ["J", "k_R", "E_kR", "T_r1", "T_r2"];
pub const CLASSICAL_HEADER: [&str; 12] =
    ["r", "s", "tau", "epsilon", "S_plus", "S_minus", "trM", "detM", "I_rs", "m_rs", "K_rs", "status"];
pub const PENDULUM_HEADER: [&str; 14] = [
    "J", "r", "s", "tau", "epsilon", "S_plus", "S_minus", "trM", "detM", "I_rs", "m_rs", "K_rs", "delta_rat", "delta_harm",
];
pub const SPLITTING_HEADER: [&str; 9] = ["J", "r", "s", "tau", "epsilon", "delta_phi", "delta_scaled", "overlap", "status"];
pub const SWEEP_HEADER: [&str; 12] = [
    "J", "r", "s", "tau", "epsilon", "delta_quantum", "delta_rat", "delta_harm", "K_rs", "m_rs", "overlap", "status",
];

pub const RESOLVED_CONFIG: &str = "config.resolved.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Poincare,
    Splitting,
    Pendulum,
    Sweep,
    Fit,
}

#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub resume: bool,
}

/// What a command produced; `failures` lists rows that could not be computed.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl Context {
    pub fn new(cfg: RunConfig, out: Option<PathBuf>, resume: bool) -> Self {
        let out = out.unwrap_or_else(|| cfg.output.directory.clone());
        Self { cfg, out, resume }
    }

    fn cache(&self) -> SpectrumCache {
        SpectrumCache::new(self.out.join("cache"))
    }

    fn tag(&self) -> String {
        let r = self.cfg.resonance();
        format!("r{}_s{}", r.r, r.s)
    }

    fn path(&self, name: String) -> PathBuf {
        self.out.join(name)
    }

    fn spectrum(&self, j: f64) -> Result<StaticSpectrum, CliError> {
        let (spec, status) = self.cache().load_or_compute(Spin::new(j)?, self.cfg.lmg())?;
        log::debug!("J = {j}: spectrum {status:?}");
        Ok(spec)
    }
}

pub fn run(cmd: Command, ctx: &Context) -> Result<Report, CliError> {
    std::fs::create_dir_all(&ctx.out).map_err(|e| CliError::Io(format!("{}: {e}", ctx.out.display())))?;
    let mut echo = ctx.cfg.resolved();
    echo.output.directory = ctx.out.clone();
    lmg_rat::quantum::cache::write_atomic(&ctx.out.join(RESOLVED_CONFIG), echo.to_toml().as_bytes())?;
    let mut report = match cmd {
        Command::Spectrum => cmd_spectrum(ctx),
        Command::Poincare => cmd_poincare(ctx),
        Command::Pendulum => cmd_pendulum(ctx),
        Command::Splitting => cmd_splitting(ctx),
        Command::Sweep => cmd_sweep(ctx),
        Command::Fit => cmd_fit(ctx),
    }?;
    report.files.push(ctx.out.join(RESOLVED_CONFIG));
    Ok(report)
}

fn cmd_spectrum(ctx: &Context) -> Result<Report, CliError> {
    let (e_r, _) = ctx.cfg.resonant_torus()?;
    let mut rows = Vec::new();
    for j in ctx.cfg.j_list() {
        let spec = ctx.spectrum(j)?;
        let k = select_resonant_index(&spec, e_r);
        let lower = |r: usize| {
            k.checked_sub(r).ok_or(lmg_rat::Error::OutOfBounds { index: k, dim: spec.dim() })
        };
        let t1 = quantum_period(&spec, lower(1)?, 1)?;
        let t2 = quantum_period(&spec, lower(2)?, 2)?;
        println!("J = {j}: k_R = {k}, T(r=1) = {t1}, T(r=2) = {t2}");
        rows.push(vec![num(j), k.to_string(), num(spec.energies[k] / j), num(t1), num(t2)]);
    }
    let path = ctx.path("spectrum.csv".into());
    write_csv(&path, &SPECTRUM_HEADER, &rows)?;
    Ok(Report { files: vec![path], failures: vec![] })
}

pub fn poincare_file_name(tau: f64, epsilon: f64) -> String {
    format!("poincare_tau{}_eps{}.csv", num(tau), num(epsilon))
}

fn cmd_poincare(ctx: &Context) -> Result<Report, CliError> {
    let (_, tau) = ctx.cfg.resonant_torus()?;
    let base = ctx.cfg.base_map(tau)?;
    let seeds = ctx.cfg.seeds();
    let n_iter = ctx.cfg.poincare.n_iter;
    let mut report = Report::default();
    for eps in ctx.cfg.eps_grid() {
        let map = StroboscopicMap { kick: Kick::new(tau, eps)?, ..base };
        let runs: Vec<_> = seeds.par_iter().map(|s| poincare_section(std::slice::from_ref(s), n_iter, &map)).collect();
        let mut rows = Vec::new();
        for (i, run) in runs.into_iter().enumerate() {
            match run {
                Ok(traj) => {
                    for (it, p) in traj[0].points.iter().enumerate() {
                        rows.push(vec![i.to_string(), it.to_string(), num(p.phi), num(p.z)]);
                    }
                }
                Err(e) => report.failures.push(format!("eps {eps}, seed {i}: {e}")),
            }
        }
        let path = ctx.path(poincare_file_name(tau, eps));
        write_csv(&path, &POINCARE_HEADER, &rows)?;
        report.files.push(path);
    }
    Ok(report)
}

fn classical_row(res: Resonance, tau: f64, p: &ClassicalPoint) -> Vec<String> {
    let mut row = vec![res.r.to_string(), res.s.to_string(), num(tau), num(p.epsilon)];
    match (&p.summary, &p.error) {
        (Some(s), _) => {
            let pp = s.pendulum;
            row.extend([s.s_plus, s.s_minus, s.trace, s.det, pp.i_rs, pp.m_rs, pp.k_rs].map(num));
            row.push("ok".into());
        }
        (None, err) => {
            row.extend(std::iter::repeat_n(String::new(), 7));
            row.push(err.clone().unwrap_or_else(|| "failed".into()));
        }
    }
    row
}

fn parse_classical(row: &[String], res: Resonance, tau: f64) -> Result<Option<ClassicalPoint>, CliError> {
    if row.len() != CLASSICAL_HEADER.len() {
        return Ok(None);
    }
    let matches = row[0] == res.r.to_string() && row[1] == res.s.to_string() && parse_num(&row[2])? == tau;
    if !matches {
        return Ok(None);
    }
    let epsilon = parse_num(&row[3])?;
    if row[11] != "ok" {
        return Ok(Some(ClassicalPoint { epsilon, summary: None, error: Some(row[11].clone()) }));
    }
    let f: Vec<f64> = row[4..11].iter().map(|s| parse_num(s)).collect::<Result<_, _>>()?;
    let pendulum = PendulumParams { i_rs: f[4], m_rs: f[5], k_rs: f[6], r: res.r, s: res.s, tau, epsilon };
    let summary = IslandSummary { s_plus: f[0], s_minus: f[1], trace: f[2], det: f[3], pendulum };
    Ok(Some(ClassicalPoint { epsilon, summary: Some(summary), error: None }))
}

/// Classical table over the configured grid, reusing stored points when resuming.
fn classical_points(ctx: &Context) -> Result<(f64, Vec<ClassicalPoint>, PathBuf), CliError> {
    let res = ctx.cfg.resonance();
    let (_, tau) = ctx.cfg.resonant_torus()?;
    let path = ctx.path(format!("classical_{}.csv", ctx.tag()));
    let mut known: BTreeMap<u64, ClassicalPoint> = BTreeMap::new();
    if ctx.resume {
        for row in read_csv(&path, &CLASSICAL_HEADER)?.unwrap_or_default() {
            if let Some(p) = parse_classical(&row, res, tau)? {
                known.insert(p.epsilon.to_bits(), p);
            }
        }
    }
    let grid = ctx.cfg.eps_grid();
    let todo: Vec<f64> = grid.iter().copied().filter(|e| !known.contains_key(&e.to_bits())).collect();
    if !known.is_empty() {
        info!("resuming classical table: {} of {} points stored", grid.len() - todo.len(), grid.len());
    }
    let base = ctx.cfg.base_map(tau)?;
    let extraction = ctx.cfg.extraction();
    let fresh: Vec<ClassicalPoint> = todo.par_iter().map(|&e| classical_point(&base, res, e, &extraction)).collect();
    for p in fresh {
        known.insert(p.epsilon.to_bits(), p);
    }
    let points: Vec<ClassicalPoint> = grid.iter().map(|e| known[&e.to_bits()].clone()).collect();
    let rows: Vec<Vec<String>> = points.iter().map(|p| classical_row(res, tau, p)).collect();
    write_csv(&path, &CLASSICAL_HEADER, &rows)?;
    Ok((tau, points, path))
}

fn classical_failures(points: &[ClassicalPoint]) -> Vec<String> {
    points
        .iter()
        .filter_map(|p| p.error.as_ref().map(|e| format!("classical eps {}: {e}", p.epsilon)))
        .collect()
}

fn cmd_pendulum(ctx: &Context) -> Result<Report, CliError> {
    let (tau, points, classical_path) = classical_points(ctx)?;
    let mut rows = Vec::new();
    for j in ctx.cfg.j_list() {
        let hbar = 1.0 / j;
        for p in &points {
            if let Some(s) = &p.summary {
                let pp = &s.pendulum;
                let mut row = vec![num(j), pp.r.to_string(), pp.s.to_string(), num(tau), num(p.epsilon)];
                row.extend([s.s_plus, s.s_minus, s.trace, s.det, pp.i_rs, pp.m_rs, pp.k_rs].map(num));
                row.push(num(rat_splitting(pp, hbar)));
                row.push(num(harmonic_splitting(pp)));
                rows.push(row);
            }
        }
    }
    let path = ctx.path(format!("pendulum_{}.csv", ctx.tag()));
    write_csv(&path, &PENDULUM_HEADER, &rows)?;
    Ok(Report { files: vec![classical_path, path], failures: classical_failures(&points) })
}

struct Prepared {
    spectrum: StaticSpectrum,
    res: ResonanceSpec,
}

fn prepare(ctx: &Context, j: f64, e_r: f64) -> Result<Prepared, CliError> {
    let spectrum = ctx.spectrum(j)?;
    let res = ResonanceSpec::resolve(&spectrum, ctx.cfg.resonance(), e_r)?;
    Ok(Prepared { spectrum, res })
}

fn quantum_points(ctx: &Context, p: &Prepared) -> Result<Vec<lmg_rat::analysis::QuantumPoint>, CliError> {
    let ops = build_spin_matrices(p.spectrum.spin);
    let builder = FloquetBuilder::new(&p.spectrum, &ops)?;
    Ok(quantum_sweep(&builder, &p.spectrum, &p.res, &ctx.cfg.eps_grid(), &ctx.cfg.quantum())?)
}

fn cmd_splitting(ctx: &Context) -> Result<Report, CliError> {
    let (e_r, _) = ctx.cfg.resonant_torus()?;
    let mut report = Report::default();
    let mut rows = Vec::new();
    for j in ctx.cfg.j_list() {
        let p = prepare(ctx, j, e_r)?;
        let r = p.res.resonance;
        for q in quantum_points(ctx, &p)? {
            let status = match &q.error {
                None => "ok".to_string(),
                Some(e) => {
                    report.failures.push(format!("J {j}, eps {}: {e}", q.epsilon));
                    e.clone()
                }
            };
            rows.push(vec![
                num(j),
                r.r.to_string(),
                r.s.to_string(),
                num(p.res.tau_q),
                num(q.epsilon),
                opt(q.delta_phi),
                opt(q.scaled),
                opt(q.overlap),
                status,
            ]);
        }
    }
    let path = ctx.path(format!("splitting_{}.csv", ctx.tag()));
    write_csv(&path, &SPLITTING_HEADER, &rows)?;
    report.files.push(path);
    Ok(report)
}

/// One entry of the fits file. Failed fits keep their error and leave the numbers empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitEntry {
    pub quantity: String,
    pub resonance: String,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residual_rms: Option<f64>,
    pub n_points: Option<usize>,
    #[serde(rename = "J_list")]
    pub j_list: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn fit_entry(quantity: &str, res: Resonance, j_list: &[f64], fit: Result<PowerLawFit, String>) -> FitEntry {
    let (ok, error) = match fit {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e)),
    };
    FitEntry {
        quantity: quantity.into(),
        resonance: res.to_string(),
        slope: ok.map(|f| f.slope),
        intercept: ok.map(|f| f.intercept),
        residual_rms: ok.map(|f| f.residual_rms),
        n_points: ok.map(|f| f.n_points),
        j_list: j_list.to_vec(),
        error,
    }
}

fn fits(ctx: &Context, points: &[ClassicalPoint]) -> (Result<CouplingFit, String>, Vec<FitEntry>) {
    let res = ctx.cfg.resonance();
    let j_list = ctx.cfg.j_list();
    let coupling = fit_coupling(points, res).map_err(|e| e.to_string());
    let scaling = coupling
        .as_ref()
        .map_err(|e| e.clone())
        .and_then(|c| scaling_epsilon_max(c, &j_list).map(|(_, f)| f).map_err(|e| e.to_string()));
    let entries = vec![
        fit_entry("K_vs_epsilon", res, &j_list, coupling.as_ref().map(|c| c.coupling).map_err(|e| e.clone())),
        fit_entry("area_vs_epsilon", res, &j_list, fit_area(points).map_err(|e| e.to_string())),
        fit_entry("epsilon_max_vs_J", res, &j_list, scaling),
    ];
    (coupling, entries)
}

fn write_fits(ctx: &Context, entries: &[FitEntry], report: &mut Report) -> Result<(), CliError> {
    for e in entries {
        match &e.error {
            Some(msg) => {
                warn!("{} fit failed: {msg}", e.quantity);
                report.failures.push(format!("{} fit: {msg}", e.quantity));
            }
            None => info!("{} slope {}", e.quantity, e.slope.unwrap_or(f64::NAN)),
        }
    }
    if ctx.cfg.wants(Format::Json) {
        let path = ctx.path(format!("fits_{}.json", ctx.tag()));
        write_json(&path, &entries)?;
        report.files.push(path);
    }
    Ok(())
}

fn sweep_rows(j: f64, curve: &SplittingCurve, overlaps: &[Option<f64>]) -> Vec<Vec<String>> {
    let r = curve.resonance;
    curve
        .rows
        .iter()
        .zip(overlaps)
        .map(|(row, overlap)| {
            vec![
                num(j),
                r.r.to_string(),
                r.s.to_string(),
                num(curve.tau_q),
                num(row.epsilon),
                opt(row.quantum_scaled),
                num(row.rat_scaled),
                num(row.harmonic_scaled),
                num(row.k_rs),
                num(row.m_rs),
                opt(*overlap),
                row.gap.clone().unwrap_or_else(|| "ok".into()),
            ]
        })
        .collect()
}

/// Sort key of a master-table row: `(J, eps)`.
fn row_key(row: &[String]) -> (f64, f64) {
    (row[0].parse().unwrap_or(f64::NAN), row[4].parse().unwrap_or(f64::NAN))
}

#[derive(Debug, Serialize)]
struct CurveSummary {
    #[serde(rename = "J")]
    j: f64,
    tau_q: f64,
    epsilon_max_estimate: Option<f64>,
    epsilon_max_crossing: Option<f64>,
    diagnostic: Option<String>,
}

fn cmd_sweep(ctx: &Context) -> Result<Report, CliError> {
    let (e_r, _) = ctx.cfg.resonant_torus()?;
    let res = ctx.cfg.resonance();
    let (_, points, classical_path) = classical_points(ctx)?;
    let mut report = Report { files: vec![classical_path], failures: classical_failures(&points) };
    let (coupling, entries) = fits(ctx, &points);
    write_fits(ctx, &entries, &mut report)?;
    let coupling = match coupling {
        Ok(c) => c,
        Err(e) => {
            report.failures.push(format!("no coupling fit, quantum sweep skipped: {e}"));
            return Ok(report);
        }
    };

    let path = ctx.path(format!("sweep_{}.csv", ctx.tag()));
    let grid = ctx.cfg.eps_grid();
    let mut stored: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    if ctx.resume {
        for row in read_csv(&path, &SWEEP_HEADER)?.unwrap_or_default() {
            if row.len() == SWEEP_HEADER.len() && row[1] == res.r.to_string() && row[2] == res.s.to_string() {
                stored.entry(row[0].clone()).or_default().push(row);
            }
        }
    }
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut summaries = Vec::new();
    for j in ctx.cfg.j_list() {
        let p = prepare(ctx, j, e_r)?;
        let expected: Vec<String> = grid.iter().map(|e| num(*e)).collect();
        let previous = stored.remove(&num(j)).unwrap_or_default();
        let complete = previous.len() == expected.len()
            && previous.iter().zip(&expected).all(|(row, e)| &row[4] == e && row[3] == num(p.res.tau_q));
        let block = if complete {
            info!("J = {j}: {} rows already present, skipped", previous.len());
            previous
        } else {
            info!("J = {j}: sweeping {} kick strengths", grid.len());
            let quantum = quantum_points(ctx, &p)?;
            let overlaps: Vec<Option<f64>> = quantum.iter().map(|q| q.overlap).collect();
            let curve = join_curve(j, &p.res, &quantum, &coupling, &points);
            sweep_rows(j, &curve, &overlaps)
        };
        for row in &block {
            if row[11] != "ok" {
                report.failures.push(format!("J {j}, eps {}: {}", row[4], row[11]));
            }
        }
        rows.extend(block);
        rows.sort_by(|a, b| row_key(a).partial_cmp(&row_key(b)).unwrap_or(std::cmp::Ordering::Equal));
        write_csv(&path, &SWEEP_HEADER, &rows)?;

        let curve = join_curve(j, &p.res, &[], &coupling, &points);
        if let Some(d) = &curve.diagnostic {
            warn!("J = {j}: {d}");
        }
        summaries.push(CurveSummary {
            j,
            tau_q: p.res.tau_q,
            epsilon_max_estimate: curve.epsilon_max_estimate,
            epsilon_max_crossing: curve.epsilon_max_crossing,
            diagnostic: curve.diagnostic,
        });
    }
    report.files.push(path);
    if ctx.cfg.wants(Format::Json) {
        let curves = ctx.path(format!("curves_{}.json", ctx.tag()));
        write_json(&curves, &summaries)?;
        report.files.push(curves);
    }
    Ok(report)
}

/// Fits from a stored classical table; nothing is recomputed.
fn cmd_fit(ctx: &Context) -> Result<Report, CliError> {
    let res = ctx.cfg.resonance();
    let (_, tau) = ctx.cfg.resonant_torus()?;
    let path = ctx.path(format!("classical_{}.csv", ctx.tag()));
    let rows = read_csv(&path, &CLASSICAL_HEADER)?
        .ok_or_else(|| CliError::Io(format!("{}: no classical table; run `pendulum` or `sweep` first", path.display())))?;
    let mut points = Vec::new();
    for row in rows {
        if let Some(p) = parse_classical(&row, res, tau)? {
            points.push(p);
        }
    }
    points.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let mut report = Report::default();
    let (_, entries) = fits(ctx, &points);
    write_fits(ctx, &entries, &mut report)?;
    Ok(report)
}
