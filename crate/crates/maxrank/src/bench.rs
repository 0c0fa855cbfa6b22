//! Scenario-driven benchmark harness: runs solve/projection checks over an
//! operator x domain x exponent matrix and writes one CSV row per check plus
//! a JSON summary. Deterministic given the seed: two runs with the same
//! configuration produce byte-identical CSV bodies (timestamps live only in
//! the summary metadata).

use crate::catalog::{self, CatalogEntry};
use crate::classify::{classify, AnnihilatorPair, Classification, SampleConfig};
use crate::domain::{named_mask, DomainMask, Shape};
use crate::error::{Error, Result};
use crate::grid::{random_band_limited, BoxGrid};
use crate::multiplier::apply_operator;
use crate::norms::{lp_norm, neg_sobolev_norm_2};
use crate::project::{
    empirical_constant, helmholtz_decompose, korn_project_with_tables,
    weak_korn_project_with_table, weak_korn_table, ConstantReport, EnsembleConfig,
    ProjectionConfig,
};
use crate::solver::{build_tables, solve_with_tables, SolveConfig};
use crate::stencil::fd_operator_field;
use crate::symbol::OperatorSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub const CSV_SCHEMA: &str = "maxrank.bench.v1";
pub const CSV_HEADER: &str = "scenario,operator,domain,grid,p,r,check,metric,value,threshold,status";

/// Operator reference in a scenario file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum OperatorRef {
    Catalog {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, i64>,
    },
    SpecFile {
        path: String,
    },
    /// Annihilator pair for weak-Korn scenarios.
    Pair {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, i64>,
    },
}

/// Domain reference in a scenario file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum DomainRef {
    Family(String),
    Shape(Shape),
    MaskFile(String),
}

impl DomainRef {
    fn label(&self) -> String {
        match self {
            DomainRef::Family(f) => f.clone(),
            DomainRef::Shape(_) => "shape".into(),
            DomainRef::MaskFile(p) => format!("file:{p}"),
        }
    }

    fn build(&self, grid: &BoxGrid) -> Result<DomainMask> {
        match self {
            DomainRef::Family(f) => named_mask(grid, f),
            DomainRef::Shape(s) => DomainMask::from_shape(grid, s),
            DomainRef::MaskFile(p) => DomainMask::read_mask_file(Path::new(p), grid),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    SolveResidual,
    Idempotence,
    KernelResidual,
    ConstantDrift,
    Helmholtz,
    WeakKorn,
    MeasureData,
}

impl CheckKind {
    fn name(&self) -> &'static str {
        match self {
            CheckKind::SolveResidual => "solve_residual",
            CheckKind::Idempotence => "idempotence",
            CheckKind::KernelResidual => "kernel_residual",
            CheckKind::ConstantDrift => "constant_drift",
            CheckKind::Helmholtz => "helmholtz",
            CheckKind::WeakKorn => "weak_korn",
            CheckKind::MeasureData => "measure_data",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EnsembleSpec {
    pub seed: u64,
    pub samples: usize,
    #[serde(default)]
    pub band: Option<usize>,
}

fn default_pad() -> usize {
    2
}
fn default_length() -> f64 {
    1.0
}
fn default_stencil_order() -> usize {
    4
}
fn default_p() -> Vec<f64> {
    vec![2.0]
}

/// One benchmark scenario: operator, domain family, refinement ladder,
/// exponents and the checks to run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub operator: OperatorRef,
    pub domain: DomainRef,
    /// Grid sizes, strictly increasing powers of two.
    pub grids: Vec<usize>,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    /// Negative-norm orders; entries > 0 require p = 2 and must equal the
    /// operator order.
    #[serde(default)]
    pub r: Vec<u32>,
    pub ensemble: EnsembleSpec,
    pub checks: Vec<CheckKind>,
    #[serde(default = "default_pad")]
    pub pad: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_stencil_order")]
    pub stencil_order: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SuiteConfig {
    pub scenarios: Vec<Scenario>,
}

impl SuiteConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: SuiteConfig = serde_json::from_str(&text).map_err(|e| {
            Error::InvalidConfig(format!("cannot parse scenario config {path:?}: {e}"))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.scenarios {
            if s.grids.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "scenario '{}': empty grid ladder",
                    s.name
                )));
            }
            for w in s.grids.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::InvalidConfig(format!(
                        "scenario '{}': grid ladder must be strictly increasing",
                        s.name
                    )));
                }
            }
            for &g in &s.grids {
                if !g.is_power_of_two() {
                    return Err(Error::InvalidConfig(format!(
                        "scenario '{}': grid size {g} is not a power of two",
                        s.name
                    )));
                }
            }
            if s.r.iter().any(|&r| r > 0) && !s.p.iter().any(|&p| p == 2.0) {
                return Err(Error::InvalidConfig(format!(
                    "scenario '{}': r > 0 requires p = 2 in the exponent list",
                    s.name
                )));
            }
            if s.stencil_order == 0 || s.stencil_order % 2 != 0 {
                return Err(Error::InvalidConfig(format!(
                    "scenario '{}': stencil order must be a positive even integer",
                    s.name
                )));
            }
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub scenario: String,
    pub operator: String,
    pub domain: String,
    pub grid: usize,
    pub p: String,
    pub r: String,
    pub check: String,
    pub metric: String,
    pub value: String,
    pub threshold: String,
    pub status: String,
}

impl BenchRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.operator,
            self.domain,
            self.grid,
            self.p,
            self.r,
            self.check,
            self.metric,
            self.value,
            self.threshold,
            self.status
        )
    }
}

fn fmt_val(v: f64) -> String {
    format!("{v:.12e}")
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub rows: usize,
    pub failures: usize,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchSummary {
    pub schema: String,
    pub seed_override: Option<u64>,
    pub scenarios: usize,
    pub rows: usize,
    pub failures: usize,
    pub per_scenario: Vec<ScenarioSummary>,
    pub metadata: BTreeMap<String, String>,
}

enum ResolvedOperator {
    Single(OperatorSpec, String, Option<Classification>),
    Pair(AnnihilatorPair, String),
}

fn resolve_operator(op: &OperatorRef) -> Result<ResolvedOperator> {
    match op {
        OperatorRef::Catalog { name, params } => {
            let entry: CatalogEntry = catalog::make_catalog_operator(name, params)?;
            let c = classify(&entry.spec, &SampleConfig::default())?;
            let label = entry.label();
            Ok(ResolvedOperator::Single(entry.spec, label, Some(c)))
        }
        OperatorRef::SpecFile { path } => {
            let spec = crate::io::read_spec_json(Path::new(path))?;
            let c = classify(&spec, &SampleConfig::default())?;
            Ok(ResolvedOperator::Single(
                spec,
                format!("file:{path}"),
                Some(c),
            ))
        }
        OperatorRef::Pair { name, params } => {
            let pair = catalog::catalog_annihilator(name, params)?;
            let ps: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let label = if ps.is_empty() {
                format!("pair:{name}")
            } else {
                format!("pair:{name}({})", ps.join(","))
            };
            Ok(ResolvedOperator::Pair(pair, label))
        }
    }
}

/// Runs every scenario at every grid size; writes `bench.csv` and
/// `summary.json` under `out_dir` and returns the summary. A failing
/// scenario records error rows and never aborts the suite.
pub fn run_scenarios(
    config: &SuiteConfig,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<BenchSummary> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut per_scenario = Vec::new();

    for scenario in &config.scenarios {
        let mut sc = scenario.clone();
        if let Some(seed) = seed_override {
            sc.ensemble.seed = seed;
        }
        let before = rows.len();
        let mut errors = Vec::new();
        if let Err(e) = run_scenario(&sc, &mut rows) {
            errors.push(e.to_string());
            rows.push(BenchRow {
                scenario: sc.name.clone(),
                operator: String::new(),
                domain: sc.domain.label(),
                grid: 0,
                p: String::new(),
                r: String::new(),
                check: "scenario".into(),
                metric: "error".into(),
                value: String::new(),
                threshold: String::new(),
                status: "error".into(),
            });
        }
        let slice = &rows[before..];
        per_scenario.push(ScenarioSummary {
            name: sc.name.clone(),
            rows: slice.len(),
            failures: slice
                .iter()
                .filter(|r| r.status == "fail" || r.status == "error")
                .count(),
            errors,
        });
    }

    let mut csv = String::new();
    writeln!(csv, "# schema {CSV_SCHEMA}").unwrap();
    writeln!(csv, "{CSV_HEADER}").unwrap();
    for row in &rows {
        writeln!(csv, "{}", row.csv()).unwrap();
    }
    std::fs::write(out_dir.join("bench.csv"), csv)?;

    let failures = per_scenario.iter().map(|s| s.failures).sum();
    let mut metadata = BTreeMap::new();
    metadata.insert(
        "timestamp_unix".to_string(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs().to_string())
            .unwrap_or_default(),
    );
    metadata.insert("version".to_string(), env!("CARGO_PKG_VERSION").to_string());
    let summary = BenchSummary {
        schema: CSV_SCHEMA.to_string(),
        seed_override,
        scenarios: config.scenarios.len(),
        rows: rows.len(),
        failures,
        per_scenario,
        metadata,
    };
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

struct RowSink<'a> {
    rows: &'a mut Vec<BenchRow>,
    scenario: String,
    operator: String,
    domain: String,
}

impl<'a> RowSink<'a> {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        grid: usize,
        p: &str,
        r: &str,
        check: CheckKind,
        metric: &str,
        value: Option<f64>,
        threshold: Option<f64>,
        status: &str,
    ) {
        self.rows.push(BenchRow {
            scenario: self.scenario.clone(),
            operator: self.operator.clone(),
            domain: self.domain.clone(),
            grid,
            p: p.to_string(),
            r: r.to_string(),
            check: check.name().to_string(),
            metric: metric.to_string(),
            value: value.map(fmt_val).unwrap_or_default(),
            threshold: threshold.map(fmt_val).unwrap_or_default(),
            status: status.to_string(),
        });
    }
}

fn run_scenario(sc: &Scenario, rows: &mut Vec<BenchRow>) -> Result<()> {
    let resolved = resolve_operator(&sc.operator)?;
    let (label, n) = match &resolved {
        ResolvedOperator::Single(spec, label, _) => (label.clone(), spec.n()),
        ResolvedOperator::Pair(pair, label) => (label.clone(), pair.operator().n()),
    };
    let mut sink = RowSink {
        rows,
        scenario: sc.name.clone(),
        operator: label,
        domain: sc.domain.label(),
    };
    let proj_cfg = ProjectionConfig {
        stencil_order: sc.stencil_order,
        p: 2.0,
        solve: SolveConfig {
            check_spec: false,
            ..SolveConfig::default()
        },
    };

    match &resolved {
        ResolvedOperator::Single(spec, _, classification) => {
            // r-order validation against the operator order
            for &r in &sc.r {
                if r != 0 && r != spec.order() {
                    return Err(Error::InvalidConfig(format!(
                        "scenario '{}': r = {r} must be 0 or the operator order {}",
                        sc.name,
                        spec.order()
                    )));
                }
            }
            let maximal = classification
                .as_ref()
                .map(|c| c.is_maximal_rank)
                .unwrap_or(false);
            let mut drift_state: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            let mut kernel_state: Vec<f64> = Vec::new();
            for &size in &sc.grids {
                let grid = BoxGrid::new(n, size, sc.length, sc.pad)?;
                let mask = sc.domain.build(&grid)?;
                run_single_grid(
                    sc,
                    spec,
                    maximal,
                    &grid,
                    &mask,
                    &proj_cfg,
                    &mut sink,
                    &mut drift_state,
                    &mut kernel_state,
                )?;
            }
            // cross-grid rows
            emit_drift_rows(sc, &mut sink, &drift_state)?;
            emit_kernel_decay_row(sc, &mut sink, &kernel_state);
        }
        ResolvedOperator::Pair(pair, _) => {
            let mut ratio_per_grid = Vec::new();
            let mut kernel_state = Vec::new();
            for &size in &sc.grids {
                let grid = BoxGrid::new(n, size, sc.length, sc.pad)?;
                let mask = sc.domain.build(&grid)?;
                run_weak_korn_grid(
                    sc,
                    pair,
                    &grid,
                    &mask,
                    &proj_cfg,
                    &mut sink,
                    &mut ratio_per_grid,
                    &mut kernel_state,
                )?;
            }
            if sc.checks.contains(&CheckKind::WeakKorn) && ratio_per_grid.len() >= 2 {
                let last = ratio_per_grid[ratio_per_grid.len() - 1];
                let prev = ratio_per_grid[ratio_per_grid.len() - 2];
                let drift = (last - prev).abs() / last.max(1e-300);
                let status = if drift < 0.20 { "pass" } else { "fail" };
                sink.push(
                    *sc.grids.last().unwrap(),
                    "2",
                    "k",
                    CheckKind::WeakKorn,
                    "ratio_drift",
                    Some(drift),
                    Some(0.20),
                    status,
                );
            }
            emit_kernel_decay_row(sc, &mut sink, &kernel_state);
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_single_grid(
    sc: &Scenario,
    spec: &OperatorSpec,
    maximal: bool,
    grid: &BoxGrid,
    mask: &DomainMask,
    proj_cfg: &ProjectionConfig,
    sink: &mut RowSink,
    drift_state: &mut BTreeMap<String, Vec<f64>>,
    kernel_state: &mut Vec<f64>,
) -> Result<()> {
    let size = grid.size();
    // band pinned to the coarsest grid so every rung sees the same data
    let band = sc.ensemble.band.unwrap_or(sc.grids[0] / 8).max(1);
    let needs_solver = sc.checks.iter().any(|c| {
        matches!(
            c,
            CheckKind::SolveResidual
                | CheckKind::Idempotence
                | CheckKind::KernelResidual
                | CheckKind::ConstantDrift
                | CheckKind::Helmholtz
                | CheckKind::MeasureData
        )
    });
    if !needs_solver {
        return Ok(());
    }
    if !maximal {
        for check in &sc.checks {
            sink.push(
                size,
                "",
                "",
                *check,
                "guard",
                None,
                None,
                "precondition-failed: not maximal rank",
            );
        }
        return Ok(());
    }
    let tables = build_tables(spec, grid, &proj_cfg.solve)?;

    if sc.checks.contains(&CheckKind::SolveResidual) {
        let f = random_band_limited(grid, spec.dim_w(), band, sc.ensemble.seed ^ 0x501e);
        let solved = solve_with_tables(spec, &f, mask, &tables, &proj_cfg.solve)?;
        let v = solved.report.residual_rel_mask;
        let status = if v <= proj_cfg.solve.tol_solve {
            "pass"
        } else {
            "fail"
        };
        sink.push(
            size,
            "2",
            "",
            CheckKind::SolveResidual,
            "residual_rel_mask",
            Some(v),
            Some(proj_cfg.solve.tol_solve),
            status,
        );
        sink.push(
            size,
            "",
            "",
            CheckKind::SolveResidual,
            "multiplier_unit_norm",
            Some(solved.report.multiplier_norms.unit_norm_sup),
            None,
            "info",
        );
        sink.push(
            size,
            "",
            "",
            CheckKind::SolveResidual,
            "multiplier_homogeneous_sup",
            Some(solved.report.multiplier_norms.homogeneous_sup),
            None,
            "info",
        );
    }

    if sc.checks.contains(&CheckKind::Idempotence) {
        match idempotence_defect(sc, spec, grid, mask, &tables, proj_cfg, band) {
            Ok((value, threshold)) => {
                let status = if value <= threshold { "pass" } else { "fail" };
                sink.push(
                    size,
                    "2",
                    "",
                    CheckKind::Idempotence,
                    "t_squared_defect",
                    Some(value),
                    Some(threshold),
                    status,
                );
            }
            Err(Error::InvalidConfig(msg)) if msg.contains("interior margin") => {
                // the mask is too small for a double margin at this grid
                sink.push(size, "2", "", CheckKind::Idempotence, "t_squared_defect", None, None, "skip");
            }
            Err(Error::EmptyMask) => {
                sink.push(size, "2", "", CheckKind::Idempotence, "t_squared_defect", None, None, "skip");
            }
            Err(e) => return Err(e),
        }
    }

    if sc.checks.contains(&CheckKind::KernelResidual) {
        // honest data pair with a nonzero A-free part; the interior residual
        // of t_u is then pure stencil error
        let probe = crate::project::symbol_kernel_probe(spec, grid, band, sc.ensemble.seed)?
            .or_else(|| match &sc.operator {
                OperatorRef::Catalog { name, params } => {
                    catalog::analytic_kernel_field(name, params, grid)
                }
                _ => None,
            });
        let radius = crate::stencil::operator_stencil_radius(spec, sc.stencil_order);
        let interior_cells = mask.interior_cells(radius).len();
        let probe = if interior_cells < 50 { None } else { probe };
        match probe {
            Some(g) => {
                match crate::project::kernel_decay_probe(spec, grid, mask, &tables, proj_cfg, &g) {
                    Ok(rel) => {
                        kernel_state.push(rel);
                        sink.push(
                            size,
                            "2",
                            "",
                            CheckKind::KernelResidual,
                            "interior_residual_rel",
                            Some(rel),
                            None,
                            "info",
                        );
                    }
                    Err(Error::InvalidConfig(msg)) if msg.contains("interior margin") => {
                        sink.push(size, "2", "", CheckKind::KernelResidual, "interior_residual_rel", None, None, "skip");
                    }
                    Err(e) => return Err(e),
                }
            }
            None => {
                sink.push(
                    size,
                    "2",
                    "",
                    CheckKind::KernelResidual,
                    "interior_residual_rel",
                    None,
                    None,
                    "skip",
                );
            }
        }
    }

    if sc.checks.contains(&CheckKind::Helmholtz) {
        let f = random_band_limited(grid, spec.dim_w(), band, sc.ensemble.seed ^ 0x4e14);
        let w0 = solve_with_tables(spec, &f, mask, &tables, &proj_cfg.solve)?.field;
        match helmholtz_decompose(spec, &w0, &f, mask, proj_cfg) {
            Ok((v, _w, _res)) => {
                let vn = lp_norm(&v, mask, 2.0)?.value;
                let wn = lp_norm(&w0, mask, 2.0)?.value.max(1e-300);
                let value = vn / wn;
                let status = if value <= 1e-6 { "pass" } else { "fail" };
                sink.push(
                    size,
                    "2",
                    "",
                    CheckKind::Helmholtz,
                    "pure_solved_v_rel",
                    Some(value),
                    Some(1e-6),
                    status,
                );
            }
            Err(Error::InvalidConfig(msg)) if msg.contains("interior margin") => {
                sink.push(size, "2", "", CheckKind::Helmholtz, "pure_solved_v_rel", None, None, "skip");
            }
            Err(e) => return Err(e),
        }
    }

    let wants_constants = sc.checks.contains(&CheckKind::ConstantDrift)
        || sc.checks.contains(&CheckKind::MeasureData);
    if wants_constants {
        // the running max of a ratio ensemble must stop moving under a final
        // sample doubling; extend the ensemble (up to 4x) when it has not
        // settled yet -- deterministic, since sample seeds derive from the
        // sample index
        let mut samples = sc.ensemble.samples;
        let mut report;
        loop {
            let ens = EnsembleConfig {
                seed: sc.ensemble.seed,
                samples,
                band: Some(band),
                p_values: sc.p.clone(),
                with_negative_norm: sc.r.iter().any(|&r| r > 0),
                measure_q: None,
            };
            report = empirical_constant(spec, grid, mask, &ens, proj_cfg)?;
            let unstable = report.metrics.values().any(|m| {
                (m.max - m.half_max).abs() / m.max.max(1e-300) >= 0.10
            });
            if !unstable || samples >= 4 * sc.ensemble.samples {
                break;
            }
            samples *= 2;
        }
        if samples != sc.ensemble.samples {
            sink.push(
                size,
                "",
                "",
                CheckKind::ConstantDrift,
                "ensemble_extended_to",
                Some(samples as f64),
                None,
                "info",
            );
        }
        emit_constant_rows(sc, sink, size, &report, drift_state);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn idempotence_defect(
    sc: &Scenario,
    spec: &OperatorSpec,
    grid: &BoxGrid,
    mask: &crate::domain::DomainMask,
    tables: &crate::solver::SolverTables,
    proj_cfg: &ProjectionConfig,
    band: usize,
) -> Result<(f64, f64)> {
    let u = random_band_limited(grid, spec.dim_v(), band, sc.ensemble.seed ^ 0x1de3);
    let au = apply_operator(spec, &u)?;
    let first = korn_project_with_tables(spec, &u, &au, mask, tables, proj_cfg)?;
    // feed (t_u, interior-FD A t_u) back in on the interior mask
    let radius = crate::stencil::operator_stencil_radius(spec, sc.stencil_order);
    let inner_mask = mask.interior_mask(radius)?;
    let (au2, _) = fd_operator_field(spec, &first.t_u, mask, sc.stencil_order)?;
    let second = korn_project_with_tables(spec, &first.t_u, &au2, &inner_mask, tables, proj_cfg)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for &idx in inner_mask.true_cells() {
        for c in 0..spec.dim_v() {
            num += (second.t_u.at(idx, c) - first.t_u.at(idx, c)).norm_sqr();
            den += first.t_u.at(idx, c).norm_sqr();
        }
    }
    let value = (num / den.max(1e-300)).sqrt();
    // self-calibrated bound: |T^2u - Tu| = |w_2| <= C |au_2| with C the
    // measured solver constant of this very scenario
    let au2_rel =
        lp_norm(&au2, &inner_mask, 2.0)?.value / lp_norm(&au, mask, 2.0)?.value.max(1e-300);
    let c_obs = first.norms.korn_ratio.unwrap_or(1.0).max(1.0);
    let threshold = 10.0 * c_obs * au2_rel + 1e-10;
    Ok((value, threshold))
}

fn metric_pr(metric: &str, k: u32) -> (String, String) {
    // p and r columns for a metric key like korn_p1.5 / fm_p2_rk / measure_q*
    if let Some(p) = metric.strip_prefix("korn_p") {
        (p.to_string(), "0".into())
    } else if metric.starts_with("fm_p2") {
        ("2".into(), k.to_string())
    } else if let Some(q) = metric.strip_prefix("measure_q") {
        (q.to_string(), "0".into())
    } else {
        (String::new(), String::new())
    }
}

fn emit_constant_rows(
    sc: &Scenario,
    sink: &mut RowSink,
    size: usize,
    report: &ConstantReport,
    drift_state: &mut BTreeMap<String, Vec<f64>>,
) {
    for (metric, stats) in &report.metrics {
        let is_measure = metric.starts_with("measure");
        let check = if is_measure {
            CheckKind::MeasureData
        } else {
            CheckKind::ConstantDrift
        };
        if is_measure && !sc.checks.contains(&CheckKind::MeasureData) {
            continue;
        }
        if !is_measure && !sc.checks.contains(&CheckKind::ConstantDrift) {
            continue;
        }
        let (p, r) = metric_pr(metric, operator_order_hint(sc));
        sink.push(
            size,
            &p,
            &r,
            check,
            &format!("{metric}_max"),
            Some(stats.max),
            None,
            "info",
        );
        sink.push(
            size,
            &p,
            &r,
            check,
            &format!("{metric}_median"),
            Some(stats.median),
            None,
            "info",
        );
        if stats.kernel_hits > 0 {
            sink.push(
                size,
                &p,
                &r,
                check,
                &format!("{metric}_kernel_hits"),
                Some(stats.kernel_hits as f64),
                None,
                "info",
            );
        }
        // running-max stability under the final sample doubling
        let stab = (stats.max - stats.half_max).abs() / stats.max.max(1e-300);
        let status = if stab < 0.10 { "pass" } else { "fail" };
        sink.push(
            size,
            &p,
            &r,
            check,
            &format!("{metric}_stability"),
            Some(stab),
            Some(0.10),
            status,
        );
        drift_state.entry(metric.clone()).or_default().push(stats.max);
    }
}

fn operator_order_hint(sc: &Scenario) -> u32 {
    sc.r.iter().copied().max().unwrap_or(0)
}

fn emit_drift_rows(
    sc: &Scenario,
    sink: &mut RowSink,
    drift_state: &BTreeMap<String, Vec<f64>>,
) -> Result<()> {
    if sc.grids.len() < 2 {
        return Ok(());
    }
    for (metric, maxima) in drift_state {
        if maxima.len() < 2 {
            continue;
        }
        let last = maxima[maxima.len() - 1];
        let prev = maxima[maxima.len() - 2];
        let drift = (last - prev).abs() / last.max(1e-300);
        let is_measure = metric.starts_with("measure");
        let check = if is_measure {
            CheckKind::MeasureData
        } else {
            CheckKind::ConstantDrift
        };
        let (p, r) = metric_pr(metric, operator_order_hint(sc));
        let status = if drift < 0.20 { "pass" } else { "fail" };
        sink.push(
            *sc.grids.last().unwrap(),
            &p,
            &r,
            check,
            &format!("{metric}_drift"),
            Some(drift),
            Some(0.20),
            status,
        );
    }
    Ok(())
}

fn emit_kernel_decay_row(sc: &Scenario, sink: &mut RowSink, kernel_state: &[f64]) {
    if !sc.checks.contains(&CheckKind::KernelResidual) || kernel_state.len() < 2 {
        return;
    }
    let prev = kernel_state[kernel_state.len() - 2];
    let last = kernel_state[kernel_state.len() - 1];
    let ratio = prev / last.max(1e-300);
    let expect = 2.0f64.powi(sc.stencil_order as i32);
    // lower-bound gate: kernel fields on the characteristic variety of
    // elliptic systems superconverge (the h^q stencil error term carries a
    // factor of the symbol), so faster-than-2^q decay is a pass; the
    // acceptance suite pins the two-sided 20% band on the operators with
    // nontrivial symbol kernels, where the order is exactly q
    let status = if ratio >= 0.5 * expect { "pass" } else { "fail" };
    sink.push(
        *sc.grids.last().unwrap(),
        "2",
        "",
        CheckKind::KernelResidual,
        "decay_ratio",
        Some(ratio),
        Some(expect),
        status,
    );
}

#[allow(clippy::too_many_arguments)]
fn run_weak_korn_grid(
    sc: &Scenario,
    pair: &AnnihilatorPair,
    grid: &BoxGrid,
    mask: &DomainMask,
    proj_cfg: &ProjectionConfig,
    sink: &mut RowSink,
    ratio_per_grid: &mut Vec<f64>,
    kernel_state: &mut Vec<f64>,
) -> Result<()> {
    if !sc.checks.contains(&CheckKind::WeakKorn) {
        return Ok(());
    }
    let size = grid.size();
    let band = sc.ensemble.band.unwrap_or(sc.grids[0] / 8).max(1);
    let a = pair.operator();
    let k = a.order();
    let kq = pair.annihilator().order();

    // closed-form check of the Delta_W multiplier where it applies
    let dw_spec = crate::classify::delta_w(pair)?;
    let closed_form = {
        let xi: Vec<f64> = (0..a.n()).map(|j| 0.37 + 0.21 * j as f64).collect();
        let m = dw_spec.eval_symbol(&xi)?;
        let n2: f64 = xi.iter().map(|x| x * x).sum();
        let id = nalgebra::DMatrix::<f64>::identity(m.nrows(), m.ncols());
        (m - id * n2.powi((k * kq) as i32)).norm() < 1e-10
    };
    if closed_form {
        let table = crate::project::delta_w_multiplier(pair, grid)?;
        let scale = 2.0 * std::f64::consts::PI / grid.length();
        let mut max_dev = 0.0f64;
        for pnt in 1..grid.points() {
            let mfreq = grid.freq(pnt);
            let m2: f64 = mfreq.iter().map(|&x| (x * x) as f64).sum();
            let expect = (scale * m2.sqrt()).powi(2 * (k * kq) as i32);
            for rr in 0..dw_spec.dim_w() {
                for cc in 0..dw_spec.dim_w() {
                    let want = if rr == cc { expect } else { 0.0 };
                    let got = table.value(pnt, rr, cc);
                    max_dev = max_dev.max(
                        ((got.re - want).abs() + got.im.abs()) / expect.max(1e-300),
                    );
                }
            }
        }
        let status = if max_dev <= 1e-10 { "pass" } else { "fail" };
        sink.push(
            size,
            "",
            "",
            CheckKind::WeakKorn,
            "delta_w_closed_form_dev",
            Some(max_dev),
            Some(1e-10),
            status,
        );
    } else {
        sink.push(
            size,
            "",
            "",
            CheckKind::WeakKorn,
            "delta_w_closed_form_dev",
            None,
            None,
            "skip",
        );
    }

    let table = weak_korn_table(pair, grid)?;
    let u = random_band_limited(grid, a.dim_v(), band, sc.ensemble.seed ^ 0x3ea5);
    let res = weak_korn_project_with_table(pair, &u, mask, &table, proj_cfg)?;
    let scale = lp_norm(&u, mask, 2.0)?.value.max(1e-300);
    let rel = res.kernel_residual.value / scale;
    kernel_state.push(rel);
    sink.push(
        size,
        "2",
        "",
        CheckKind::WeakKorn,
        "delta_a_interior_residual_rel",
        Some(rel),
        None,
        "info",
    );

    // ratio |u - Pi u|_{L2(mask)} / |A u|_{H^{-k}(box)}
    let au = apply_operator(a, &u)?;
    let (den, _) = neg_sobolev_norm_2(&au, k);
    let num = lp_norm(&res.w, mask, 2.0)?.value;
    let ratio = num / den.value.max(1e-300);
    ratio_per_grid.push(ratio);
    sink.push(
        size,
        "2",
        "k",
        CheckKind::WeakKorn,
        "neg_norm_ratio",
        Some(ratio),
        None,
        "info",
    );
    Ok(())
}

/// The default suite: every maximal-rank bench entry x the four mask
/// families x p in {1.5, 2, 3} with r in {0, k at p = 2}, plus the weak-Korn
/// pairs and one non-maximal guard scenario.
pub fn default_suite() -> SuiteConfig {
    let mut scenarios = Vec::new();
    let families = ["disk", "square", "two_ball", "blob"];
    for entry in catalog::maximal_rank_bench_entries() {
        let three_d = entry.spec.n() == 3;
        let grids = if three_d {
            vec![32usize, 64]
        } else {
            vec![64usize, 128]
        };
        let order = entry.spec.order();
        for family in families {
            scenarios.push(Scenario {
                name: format!("{}__{}", entry.label().replace([',', '(', ')'], "_"), family),
                operator: OperatorRef::Catalog {
                    name: entry.name.clone(),
                    params: entry.params.clone(),
                },
                domain: DomainRef::Family(family.to_string()),
                grids: grids.clone(),
                p: vec![1.5, 2.0, 3.0],
                r: vec![0, order],
                ensemble: EnsembleSpec {
                    seed: 0xbe9c,
                    samples: 64,
                    band: None,
                },
                checks: vec![
                    CheckKind::SolveResidual,
                    CheckKind::Idempotence,
                    CheckKind::KernelResidual,
                    CheckKind::Helmholtz,
                    CheckKind::ConstantDrift,
                    CheckKind::MeasureData,
                ],
                pad: 2,
                length: 1.0,
                stencil_order: 4,
            });
        }
    }
    for (name, params, grids) in [
        ("grad_curl", vec![("n", 2i64)], vec![64usize, 128]),
        ("grad_curl", vec![("n", 3)], vec![32, 64]),
        ("d_d", vec![("n", 3), ("l", 0)], vec![32, 64]),
    ] {
        scenarios.push(Scenario {
            name: format!(
                "weak_korn_{}_{}",
                name,
                params
                    .iter()
                    .map(|(k, v)| format!("{k}{v}"))
                    .collect::<Vec<_>>()
                    .join("_")
            ),
            operator: OperatorRef::Pair {
                name: name.to_string(),
                params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            },
            domain: DomainRef::Family("disk".to_string()),
            grids,
            p: vec![2.0],
            r: vec![0],
            ensemble: EnsembleSpec {
                seed: 0xbe9c,
                samples: 8,
                band: None,
            },
            checks: vec![CheckKind::WeakKorn],
            pad: 2,
            length: 1.0,
            stencil_order: 4,
        });
    }
    // guarded precondition example: a non-maximal-rank operator
    scenarios.push(Scenario {
        name: "gradient_guard".into(),
        operator: OperatorRef::Catalog {
            name: "gradient".into(),
            params: [("n".to_string(), 2i64)].into_iter().collect(),
        },
        domain: DomainRef::Family("disk".into()),
        grids: vec![64],
        p: vec![2.0],
        r: vec![0],
        ensemble: EnsembleSpec {
            seed: 0xbe9c,
            samples: 4,
            band: None,
        },
        checks: vec![CheckKind::SolveResidual],
        pad: 2,
        length: 1.0,
        stencil_order: 4,
    });
    SuiteConfig { scenarios }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_suite_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SuiteConfig { scenarios: vec![] };
        let summary = run_scenarios(&cfg, dir.path(), None).unwrap();
        assert_eq!(summary.failures, 0);
        assert_eq!(summary.rows, 0);
        let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains(CSV_SCHEMA));
        assert_eq!(lines[1], CSV_HEADER);
    }

    #[test]
    fn validation_rejects_bad_ladders_and_r() {
        let mut sc = default_suite().scenarios[0].clone();
        sc.grids = vec![64, 64];
        assert!(SuiteConfig { scenarios: vec![sc.clone()] }.validate().is_err());
        sc.grids = vec![48];
        assert!(SuiteConfig { scenarios: vec![sc.clone()] }.validate().is_err());
        sc.grids = vec![64];
        sc.r = vec![1];
        sc.p = vec![1.5];
        assert!(SuiteConfig { scenarios: vec![sc] }.validate().is_err());
    }

    #[test]
    fn non_maximal_operator_yields_precondition_rows() {
        let dir = tempfile::tempdir().unwrap();
        let sc = Scenario {
            name: "guard".into(),
            operator: OperatorRef::Catalog {
                name: "gradient".into(),
                params: [("n".to_string(), 2i64)].into_iter().collect(),
            },
            domain: DomainRef::Family("disk".into()),
            grids: vec![32],
            p: vec![2.0],
            r: vec![0],
            ensemble: EnsembleSpec {
                seed: 1,
                samples: 2,
                band: None,
            },
            checks: vec![CheckKind::SolveResidual],
            pad: 2,
            length: 1.0,
            stencil_order: 4,
        };
        let summary = run_scenarios(&SuiteConfig { scenarios: vec![sc] }, dir.path(), None).unwrap();
        assert_eq!(summary.failures, 0);
        let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
        assert!(csv.contains("precondition-failed"));
    }

    #[test]
    fn small_scenario_runs_and_is_reproducible() {
        let sc = Scenario {
            name: "smoke".into(),
            operator: OperatorRef::Catalog {
                name: "divergence".into(),
                params: [("n".to_string(), 2i64), ("rows".to_string(), 1)]
                    .into_iter()
                    .collect(),
            },
            domain: DomainRef::Family("disk".into()),
            grids: vec![32, 64],
            p: vec![2.0],
            r: vec![0, 1],
            ensemble: EnsembleSpec {
                seed: 11,
                samples: 4,
                band: None,
            },
            checks: vec![
                CheckKind::SolveResidual,
                CheckKind::Idempotence,
                CheckKind::KernelResidual,
                CheckKind::Helmholtz,
                CheckKind::ConstantDrift,
                CheckKind::MeasureData,
            ],
            pad: 2,
            length: 1.0,
            stencil_order: 4,
        };
        let cfg = SuiteConfig {
            scenarios: vec![sc],
        };
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let s1 = run_scenarios(&cfg, d1.path(), Some(7)).unwrap();
        let s2 = run_scenarios(&cfg, d2.path(), Some(7)).unwrap();
        assert_eq!(s1.rows, s2.rows);
        let c1 = std::fs::read(d1.path().join("bench.csv")).unwrap();
        let c2 = std::fs::read(d2.path().join("bench.csv")).unwrap();
        assert_eq!(c1, c2, "csv bodies must be byte-identical");
        // no hard failures on this smoke scenario
        let csv = String::from_utf8(c1).unwrap();
        for line in csv.lines() {
            assert!(!line.ends_with(",fail"), "unexpected failure row: {line}");
        }
    }

    #[test]
    fn weak_korn_scenario_smoke() {
        let dir = tempfile::tempdir().unwrap();
        let sc = Scenario {
            name: "wk".into(),
            operator: OperatorRef::Pair {
                name: "grad_curl".into(),
                params: [("n".to_string(), 2i64)].into_iter().collect(),
            },
            domain: DomainRef::Family("disk".into()),
            grids: vec![32, 64],
            p: vec![2.0],
            r: vec![0],
            ensemble: EnsembleSpec {
                seed: 3,
                samples: 2,
                band: None,
            },
            checks: vec![CheckKind::WeakKorn],
            pad: 2,
            length: 1.0,
            stencil_order: 4,
        };
        let summary =
            run_scenarios(&SuiteConfig { scenarios: vec![sc] }, dir.path(), None).unwrap();
        assert_eq!(summary.failures, 0, "{summary:?}");
        let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
        assert!(csv.contains("delta_w_closed_form_dev"));
        assert!(csv.contains("neg_norm_ratio"));
    }

    #[test]
    fn failing_scenario_does_not_block_later_ones() {
        let dir = tempfile::tempdir().unwrap();
        let broken = Scenario {
            name: "broken".into(),
            operator: OperatorRef::Catalog {
                name: "no_such_operator".into(),
                params: BTreeMap::new(),
            },
            domain: DomainRef::Family("disk".into()),
            grids: vec![32],
            p: vec![2.0],
            r: vec![],
            ensemble: EnsembleSpec { seed: 1, samples: 2, band: None },
            checks: vec![CheckKind::SolveResidual],
            pad: 2,
            length: 1.0,
            stencil_order: 4,
        };
        let mut fine = broken.clone();
        fine.name = "fine".into();
        fine.operator = OperatorRef::Catalog {
            name: "laplacian".into(),
            params: [("n".to_string(), 2i64)].into_iter().collect(),
        };
        let cfg = SuiteConfig { scenarios: vec![broken, fine] };
        let summary = run_scenarios(&cfg, dir.path(), None).unwrap();
        assert_eq!(summary.per_scenario[0].failures, 1);
        assert_eq!(summary.per_scenario[1].failures, 0);
        assert!(summary.per_scenario[1].rows > 0, "later scenario must still run");
    }

    #[test]
    fn default_suite_validates() {
        let cfg = default_suite();
        cfg.validate().unwrap();
        assert!(cfg.scenarios.len() > 40);
    }
}
