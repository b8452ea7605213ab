//! Dispatch a parsed config to the core library and persist the results.
//!
//! Exit-code contract: 0 on success, 2 when a hypothesis or solvability
//! precondition fails, 3 on budget exhaustion, 1 for anything else. Outputs
//! are written atomically; a failed run leaves no partial artifacts.

use crate::config::{parse_rat, Command, ConfigError, ExperimentConfig};
use crate::manifest::{atomic_write, csv_text, RunManifest};
use limsup_core::approx::{balance_rho_real, ApproxSpec, BalanceOutcome, Schedule};
use limsup_core::dimension::{
    closed_form, grid_optimize_lower_bound, mtpr_lower_bound, select_exponents, ClosedFormCase,
    DimError, SelectionCase, Setting,
};
use limsup_core::exact::{Monomial, Rat};
use limsup_core::lab::{
    box_count_dimension, knee_centered_scales, measure_scan, DichotomyScan, LabError,
};
use limsup_core::rings::text::{parse_matrix, parse_ring};
use limsup_core::rings::IntegerPoint;
use limsup_core::solver::{
    certify_minkowski, empirical_ubiquity_check, solve, LinearFormSystem, Precondition,
    SolutionRecord, SolveStatus, Strategy, UbiquityMode,
};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

/// Environment variable overriding the box-count cell budget.
pub const CELL_CAP_ENV: &str = "LIMSUP_LAB_CELL_CAP";
const DEFAULT_CELL_CAP: u64 = 1 << 36;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Io(std::io::Error),
    Hypothesis(String),
    Budget(String),
    Other(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Io(e) => write!(f, "io error: {e}"),
            RunError::Hypothesis(m) => write!(f, "hypothesis violated: {m}"),
            RunError::Budget(m) => write!(f, "budget exhausted: {m}"),
            RunError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Hypothesis(_) => 2,
            RunError::Budget(_) => 3,
            _ => 1,
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<DimError> for RunError {
    fn from(e: DimError) -> Self {
        match e {
            DimError::HypothesisViolated(m) => RunError::Hypothesis(m),
            other => RunError::Other(other.to_string()),
        }
    }
}

impl From<LabError> for RunError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::BudgetExceeded(m) => RunError::Budget(m),
            LabError::Dim(DimError::HypothesisViolated(m)) => RunError::Hypothesis(m),
            other => RunError::Other(other.to_string()),
        }
    }
}

pub struct RunOutcome {
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    fs::create_dir_all(out_dir)?;
    if config.command.is_stochastic() {
        config.require("seed")?;
    }
    let mut manifest = RunManifest::start(config.command.token(), &config.source);
    let mut artifacts = Vec::new();

    let summary = match config.command {
        Command::DimEval => run_dim_eval(config, out_dir, &mut manifest, &mut artifacts)?,
        Command::DimSearch => run_dim_search(config, out_dir, &mut manifest, &mut artifacts)?,
        Command::Solve => run_solve(config, out_dir, &mut manifest, &mut artifacts)?,
        Command::Certify => run_certify(config, out_dir, &mut manifest, &mut artifacts)?,
        Command::MeasureScan => run_measure_scan(config, out_dir, &mut manifest, &mut artifacts)?,
        Command::BoxDim => run_box_dim(config, out_dir, &mut manifest, &mut artifacts)?,
        Command::Series => run_series(config, out_dir, &mut manifest, &mut artifacts)?,
        Command::Ubiquity => run_ubiquity(config, out_dir, &mut manifest, &mut artifacts)?,
    };

    let manifest_path = out_dir.join(format!("{}_manifest.txt", config.command.token()));
    manifest.finish_and_write(&manifest_path)?;
    artifacts.push(manifest_path);
    Ok(RunOutcome { artifacts, summary })
}

fn write_csv(
    out_dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
    manifest: &mut RunManifest,
    artifacts: &mut Vec<PathBuf>,
) -> Result<PathBuf, RunError> {
    let path = out_dir.join(name);
    atomic_write(&path, &csv_text(header, rows))?;
    manifest.record_output(&path)?;
    artifacts.push(path.clone());
    Ok(path)
}

// ---------------------------------------------------------------------------
// Shared parsing helpers
// ---------------------------------------------------------------------------

fn parse_setting(config: &ExperimentConfig) -> Result<Setting, RunError> {
    let tok = config.require("setting")?;
    let dims = || -> Result<(usize, usize), RunError> {
        Ok((config.usize_key("m")?, config.usize_key("n")?))
    };
    Ok(match tok {
        "two_dim" => Setting::TwoDimSimultaneous,
        "real" => {
            let (m, n) = dims()?;
            Setting::RealLinearForms { m, n }
        }
        "padic" => {
            let (m, n) = dims()?;
            Setting::Padic { m, n }
        }
        "complex" => {
            let (m, n) = dims()?;
            Setting::Complex { m, n }
        }
        "quaternion" => {
            let (m, n) = dims()?;
            Setting::Quaternion { m, n }
        }
        "laurent" => {
            let (m, n) = dims()?;
            Setting::Laurent { m, n }
        }
        other => {
            return Err(ConfigError::BadValue { key: "setting".into(), msg: other.into() }.into())
        }
    })
}

fn parse_case(config: &ExperimentConfig) -> Result<ClosedFormCase, RunError> {
    let setting = parse_setting(config)?;
    let tau = config.rat_list("tau")?;
    Ok(ClosedFormCase::new(setting, tau)?)
}

fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Point rendering for CSV cells: coordinate commas become colons so the cell
/// stays a single CSV field.
fn point_cell(p: &IntegerPoint) -> String {
    p.to_string().replace(',', ":")
}

fn setting_cells(setting: &Setting) -> (String, String, String) {
    let (m, n) = setting.dims();
    (setting.name().to_string(), m.to_string(), n.to_string())
}

// ---------------------------------------------------------------------------
// Command handlers
// ---------------------------------------------------------------------------

fn run_dim_eval(
    config: &ExperimentConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    artifacts: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let case = parse_case(config)?;
    let cf = closed_form(&case)?;
    let (sname, m, n) = setting_cells(&case.setting);
    let mut row = vec![
        sname,
        m,
        n,
        join(case.tau.iter()),
        cf.value.to_string(),
        join(cf.argmin.iter()),
        cf.dirichlet_regime.to_string(),
    ];
    if cf.dirichlet_regime {
        row.extend(["".into(), "".into(), "".into(), "".into(), "".into()]);
    } else {
        let sel = select_exponents(&case)?;
        let lb = mtpr_lower_bound(&sel.to_problem())?;
        let tag = match sel.case_tag {
            SelectionCase::BallToRectangle => "ball_to_rectangle",
            SelectionCase::RectangleToRectangle => "rectangle_to_rectangle",
        };
        row.extend([
            tag.to_string(),
            join(sel.a.iter()),
            join(sel.t.iter()),
            lb.value.to_string(),
            join(lb.minimizers.iter().map(|c| c.level)),
        ]);
    }
    let header = [
        "setting",
        "m",
        "n",
        "tau",
        "value",
        "argmin",
        "dirichlet_regime",
        "case_tag",
        "a",
        "t",
        "mtpr_value",
        "min_levels",
    ];
    write_csv(out_dir, "dim_eval.csv", &header, &[row], manifest, artifacts)?;
    Ok(format!("value {}", cf.value))
}

fn run_dim_search(
    config: &ExperimentConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    artifacts: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let case = parse_case(config)?;
    let resolution = config.u64_key("resolution")?;
    let cf = closed_form(&case)?;
    let g = grid_optimize_lower_bound(&case, resolution)?;
    let (sname, m, n) = setting_cells(&case.setting);
    let row = vec![
        sname,
        m,
        n,
        join(case.tau.iter()),
        resolution.to_string(),
        g.value.to_string(),
        join(g.best_a.iter()),
        g.box_relaxed.to_string(),
        cf.value.to_string(),
        g.evaluated.to_string(),
    ];
    let header = [
        "setting",
        "m",
        "n",
        "tau",
        "resolution",
        "grid_value",
        "best_a",
        "box_relaxed",
        "closed_form",
        "evaluated",
    ];
    write_csv(out_dir, "dim_search.csv", &header, &[row], manifest, artifacts)?;
    Ok(format!("grid optimum {}", g.value))
}

fn solution_row(rec: &SolutionRecord) -> Vec<String> {
    let status = match rec.status {
        SolveStatus::Found => "found",
        SolveStatus::CertifiedNone => "certified_none",
        SolveStatus::SearchExhausted => "search_exhausted",
    };
    vec![
        status.to_string(),
        rec.height.to_string(),
        join(rec.q.iter().map(point_cell)),
        join(rec.p.iter().map(point_cell)),
        join(rec.errors.iter().map(|e| {
            if e.below_floor {
                format!("<{}", e.value)
            } else {
                e.value.to_string()
            }
        })),
    ]
}

fn run_solve(
    config: &ExperimentConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    artifacts: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let precision = config.opt_u64("precision")?.unwrap_or(32) as u32;
    let ring = parse_ring(config.require("ring")?, precision)
        .map_err(|e| RunError::Other(e.to_string()))?;
    let matrix_path = PathBuf::from(config.require("matrix")?);
    manifest.record_input(&matrix_path)?;
    let text = fs::read_to_string(&matrix_path)?;
    let (file_ring, matrix) =
        parse_matrix(&text, precision).map_err(|e| RunError::Other(e.to_string()))?;
    if file_ring != ring {
        return Err(RunError::Other("matrix file ring disagrees with config".into()));
    }
    let errors: Vec<Monomial> =
        config.rat_list("error")?.iter().map(Monomial::from_rat).collect();
    let heights = config.rat_list("heights")?;
    let mut sys = LinearFormSystem::new(ring, matrix, errors, heights)
        .map_err(|e| RunError::Other(e.to_string()))?;
    if let Some(cb) = config.get("companions") {
        let caps = cb
            .split(',')
            .map(|tok| {
                parse_rat(tok).ok_or_else(|| ConfigError::BadValue {
                    key: "companions".into(),
                    msg: tok.into(),
                })
            })
            .collect::<Result<Vec<Rat>, _>>()?;
        sys.companion_bounds = Some(caps);
    }
    let strategy = match config.get("strategy").unwrap_or("first") {
        "first" => Strategy::FirstFound,
        "min_error" => Strategy::MinError,
        "min_height" => Strategy::MinHeight,
        other => {
            return Err(ConfigError::BadValue { key: "strategy".into(), msg: other.into() }.into())
        }
    };
    let budget = config.opt_u64("budget")?;
    let rec = solve(&sys, strategy, budget).map_err(|e| RunError::Other(e.to_string()))?;
    let header = ["status", "height", "q", "p", "errors"];
    write_csv(out_dir, "solve.csv", &header, &[solution_row(&rec)], manifest, artifacts)?;
    Ok(solution_row(&rec)[0].clone())
}

fn run_certify(
    config: &ExperimentConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    artifacts: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let precision = config.opt_u64("precision")?.unwrap_or(32) as u32;
    let ring = parse_ring(config.require("ring")?, precision)
        .map_err(|e| RunError::Other(e.to_string()))?;
    let m = config.usize_key("m")?;
    let n = config.usize_key("n")?;
    let errors: Vec<Monomial> =
        config.rat_list("error")?.iter().map(Monomial::from_rat).collect();
    let heights = config.rat_list("heights")?;
    let companions = match config.get("companions") {
        None => None,
        Some(_) => Some(config.rat_list("companions")?),
    };
    let trials = config.u64_key("trials")? as u32;
    let seed = config.u64_key("seed")?;
    let report = certify_minkowski(&ring, m, n, &errors, &heights, companions, trials, seed)
        .map_err(|e| RunError::Other(e.to_string()))?;
    if let Precondition::Unmet(msg) = &report.precondition {
        return Err(RunError::Hypothesis(format!("product condition unmet: {msg}")));
    }
    let header = ["ring", "m", "n", "trials", "found", "failures"];
    let row = vec![
        config.require("ring")?.to_string(),
        m.to_string(),
        n.to_string(),
        report.trials.to_string(),
        report.found.to_string(),
        join(report.failures.iter()),
    ];
    write_csv(out_dir, "certify.csv", &header, &[row], manifest, artifacts)?;
    Ok(format!("{}/{}", report.found, report.trials))
}

fn run_measure_scan(
    config: &ExperimentConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    artifacts: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let ladder = config.u64_list("ladder")?;
    let samples = config.u64_key("samples")? as u32;
    let seed = config.u64_key("seed")?;
    let top = *ladder.last().ok_or_else(|| RunError::Other("empty ladder".into()))?;
    let kmax = (64 - top.leading_zeros()).max(1);
    let schedule =
        Schedule::new(2, 1, kmax).map_err(|e| RunError::Other(e.to_string()))?;
    let mut specs = Vec::new();
    for part in config.require("specs")?.split(';') {
        let (id, taus) = part.split_once(':').ok_or_else(|| ConfigError::BadValue {
            key: "specs".into(),
            msg: format!("expected id:tau list in `{part}`"),
        })?;
        let taus: Vec<Rat> = taus
            .split(',')
            .map(|tok| {
                parse_rat(tok).ok_or_else(|| ConfigError::BadValue {
                    key: "specs".into(),
                    msg: format!("bad fraction `{tok}`"),
                })
            })
            .collect::<Result<_, _>>()?;
        let n = taus.len();
        let spec = ApproxSpec::power_law(1, n, taus, schedule)
            .map_err(|e| RunError::Other(e.to_string()))?;
        specs.push((id.to_string(), spec));
    }
    let scan = DichotomyScan { specs, samples, ladder, seed };
    let tables = measure_scan(&scan)?;
    let header = ["spec_id", "H", "hits", "N", "fraction", "ci_lo", "ci_hi"];
    let fmt_rows = |rows: &[limsup_core::lab::ScanRow]| -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| {
                vec![
                    r.spec_id.clone(),
                    r.h.to_string(),
                    r.hits.to_string(),
                    r.n.to_string(),
                    format!("{:.6}", r.fraction),
                    format!("{:.6}", r.ci_lo),
                    format!("{:.6}", r.ci_hi),
                ]
            })
            .collect()
    };
    write_csv(out_dir, "scan_full.csv", &header, &fmt_rows(&tables.full), manifest, artifacts)?;
    write_csv(out_dir, "scan_tail.csv", &header, &fmt_rows(&tables.tail), manifest, artifacts)?;
    // gnuplot blocks: one (H, fraction) block per spec
    for (name, rows) in [("scan_full.dat", &tables.full), ("scan_tail.dat", &tables.tail)] {
        let mut dat = String::new();
        let mut current = None;
        for r in rows.iter() {
            if current != Some(&r.spec_id) {
                if current.is_some() {
                    dat.push('\n');
                }
                dat.push_str(&format!("# {}\n", r.spec_id));
                current = Some(&r.spec_id);
            }
            dat.push_str(&format!("{} {:.6}\n", r.h, r.fraction));
        }
        write_plot(out_dir, name, &dat, manifest, artifacts)?;
    }
    Ok(format!("{} rows", tables.full.len() + tables.tail.len()))
}

fn run_box_dim(
    config: &ExperimentConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    artifacts: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let tau = config.rat_list("tau")?;
    let case = ClosedFormCase::new(Setting::TwoDimSimultaneous, tau)?;
    let q = config.u64_key("q")?;
    let scales = match config.get("scales") {
        None | Some("auto") => knee_centered_scales(q, 2 * q),
        Some(_) => config.u64_list("scales")?.into_iter().map(|x| x as u32).collect(),
    };
    let budget = std::env::var(CELL_CAP_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_CELL_CAP);
    let est = box_count_dimension(&case, q, 2 * q, &scales, budget)?;
    let header = ["eps", "count", "log_eps", "log_count", "slope", "residual"];
    let rows: Vec<Vec<String>> = est
        .counts
        .iter()
        .map(|(j, c)| {
            vec![
                format!("2^-{j}"),
                c.to_string(),
                format!("{:.6}", -(*j as f64) * std::f64::consts::LN_2),
                format!("{:.6}", (*c as f64).ln()),
                format!("{:.6}", est.slope),
                format!("{:.6}", est.residual),
            ]
        })
        .collect();
    write_csv(out_dir, "box_dim.csv", &header, &rows, manifest, artifacts)?;
    let dat: String = est
        .counts
        .iter()
        .map(|(j, c)| {
            format!("{:.6} {:.6}\n", -(*j as f64) * std::f64::consts::LN_2, (*c as f64).ln())
        })
        .collect();
    write_plot(out_dir, "box_dim.dat", &dat, manifest, artifacts)?;
    Ok(format!("slope {:.4}", est.slope))
}

fn run_series(
    config: &ExperimentConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    artifacts: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let m = config.usize_key("m")?;
    let n = config.usize_key("n")?;
    let tau = config.rat_list("tau")?;
    let base = config.u64_key("base")?;
    let kmax = config.u64_key("kmax")? as u32;
    let rmax = config.u64_key("rmax")?;
    let schedule = Schedule::new(base, 1, kmax).map_err(|e| RunError::Other(e.to_string()))?;
    let spec = ApproxSpec::power_law(m, n, tau.clone(), schedule)
        .map_err(|e| RunError::Other(e.to_string()))?;
    let report = limsup_core::lab::series_report(&spec, rmax)
        .map_err(|e| RunError::Other(e.to_string()))?;
    let header = ["quantity", "value"];
    let rows: Vec<Vec<String>> =
        report.into_iter().map(|(k, v)| vec![k, v.replace(',', ";")]).collect();
    write_csv(out_dir, "series.csv", &header, &rows, manifest, artifacts)?;

    // optional cover-cost partial sums for a dimension setting
    if config.get("setting").is_some() {
        let case = parse_case(config)?;
        let s = config.rat_key("s")?;
        let q_lo = config.opt_u64("q_lo")?.unwrap_or(2);
        let q_hi = config.opt_u64("q_hi")?.unwrap_or(2000);
        let sums = limsup_core::lab::covering_sum(&case, &s, q_lo, q_hi)?;
        let header = ["s", "Q", "partial_sum"];
        let rows: Vec<Vec<String>> = sums
            .rows
            .iter()
            .map(|(q, v)| vec![s.to_string(), q.to_string(), format!("{v:.6}")])
            .collect();
        write_csv(out_dir, "covering.csv", &header, &rows, manifest, artifacts)?;
        let dat: String =
            sums.rows.iter().map(|(q, v)| format!("{q} {v:.6}\n")).collect();
        write_plot(out_dir, "covering.dat", &dat, manifest, artifacts)?;
        let class = match sums.classification {
            limsup_core::lab::TailClass::Flat => "flat",
            limsup_core::lab::TailClass::Exploding => "exploding",
        };
        return Ok(format!("series written; cover tail {class}"));
    }
    Ok("series written".into())
}

fn write_plot(
    out_dir: &Path,
    name: &str,
    body: &str,
    manifest: &mut RunManifest,
    artifacts: &mut Vec<PathBuf>,
) -> Result<(), RunError> {
    let path = out_dir.join(name);
    atomic_write(&path, body)?;
    manifest.record_output(&path)?;
    artifacts.push(path);
    Ok(())
}

fn run_ubiquity(
    config: &ExperimentConfig,
    out_dir: &Path,
    manifest: &mut RunManifest,
    artifacts: &mut Vec<PathBuf>,
) -> Result<String, RunError> {
    let tau = config.rat_list("tau")?;
    let base = config.u64_key("base")?;
    let k = config.u64_key("k")? as u32;
    let samples = config.u64_key("samples")? as u32;
    let seed = config.u64_key("seed")?;
    let mode = match config.get("mode").unwrap_or("window") {
        "window" => UbiquityMode::ScheduleWindow,
        "minkowski" => UbiquityMode::MinkowskiFull,
        other => {
            return Err(ConfigError::BadValue { key: "mode".into(), msg: other.into() }.into())
        }
    };
    let multiplier = match config.get("multiplier") {
        None => Rat::from_integer(base as i64),
        Some(_) => config.rat_key("multiplier")?,
    };
    let schedule = Schedule::new(base, 1, k).map_err(|e| RunError::Other(e.to_string()))?;
    let spec =
        ApproxSpec::power_law(1, 2, tau, schedule).map_err(|e| RunError::Other(e.to_string()))?;
    let header = ["k", "window_lo", "window_hi", "covered", "samples", "fraction", "note"];
    let row = match balance_rho_real(&spec).map_err(|e| RunError::Other(e.to_string()))? {
        BalanceOutcome::FullMeasureShortcut => vec![
            k.to_string(),
            "".into(),
            "".into(),
            samples.to_string(),
            samples.to_string(),
            "1.000000".into(),
            "full_measure_shortcut".into(),
        ],
        BalanceOutcome::Balanced(rho) => {
            let rep = empirical_ubiquity_check(&spec, &rho, k, samples, seed, &multiplier, mode)
                .map_err(|e| RunError::Other(e.to_string()))?;
            vec![
                k.to_string(),
                rep.window.0.to_string(),
                rep.window.1.to_string(),
                rep.covered.to_string(),
                rep.samples.to_string(),
                format!("{:.6}", rep.fraction),
                "".into(),
            ]
        }
    };
    let summary = format!("fraction {}", row[5]);
    write_csv(out_dir, "ubiquity.csv", &header, &[row], manifest, artifacts)?;
    Ok(summary)
}
