//! Command-line front end: operator classification reports, single solves
//! and projections on masked domains, and the scenario-driven bench suite.
//!
//! Exit codes: 0 all checks pass, 1 check failures, 2 configuration errors.

use clap::{Args, Parser, Subcommand};
use maxrank::bench::{default_suite, run_scenarios, SuiteConfig};
use maxrank::catalog;
use maxrank::classify::{classify, ClassificationReport, SampleConfig};
use maxrank::domain::{DomainMask, Shape};
use maxrank::error::Error;
use maxrank::grid::BoxGrid;
use maxrank::io;
use maxrank::norms::lp_norm;
use maxrank::project::{korn_project, ProjectionConfig};
use maxrank::solver::{solve, SolveConfig};
use maxrank::symbol::OperatorSpec;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "maxrank", version, about = "Pseudo-spectral solves and Korn-type projections for maximal-rank operators on masked domains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Args)]
struct OperatorArgs {
    /// `catalog:<name>` (with parameter flags) or a path to an operator JSON file.
    operator: String,
    /// Spatial dimension parameter for catalog operators.
    #[arg(long)]
    n: Option<i64>,
    /// Form degree / row-count parameters for catalog operators.
    #[arg(long)]
    l: Option<i64>,
    #[arg(long)]
    k: Option<i64>,
    #[arg(long)]
    rows: Option<i64>,
}

impl OperatorArgs {
    fn params(&self) -> BTreeMap<String, i64> {
        let mut ps = BTreeMap::new();
        if let Some(n) = self.n {
            ps.insert("n".to_string(), n);
        }
        if let Some(l) = self.l {
            ps.insert("l".to_string(), l);
        }
        if let Some(k) = self.k {
            ps.insert("k".to_string(), k);
        }
        if let Some(rows) = self.rows {
            ps.insert("rows".to_string(), rows);
        }
        ps
    }

    fn resolve(&self) -> Result<(OperatorSpec, String), Error> {
        if let Some(name) = self.operator.strip_prefix("catalog:") {
            let entry = catalog::make_catalog_operator(name, &self.params())?;
            let label = entry.label();
            Ok((entry.spec, label))
        } else {
            let spec = io::read_spec_json(&PathBuf::from(&self.operator))?;
            Ok((spec, self.operator.clone()))
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify an operator and print the report JSON.
    Classify {
        #[command(flatten)]
        op: OperatorArgs,
        /// Seed for the pseudo-random half of the sphere sample.
        #[arg(long)]
        seed: Option<u64>,
        /// Relative singular-value cutoff for ranks.
        #[arg(long)]
        tol: Option<f64>,
        /// Sample count per half (quasi-uniform and pseudo-random).
        #[arg(long)]
        samples: Option<usize>,
        /// Write the report JSON here as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Catalog queries.
    Catalog {
        #[command(subcommand)]
        sub: CatalogCmd,
    },
    /// Solve `A v = f` on a masked domain.
    Solve {
        #[command(flatten)]
        op: OperatorArgs,
        /// Right-hand side field file (values used on the mask cells).
        #[arg(long)]
        rhs: PathBuf,
        /// Mask file; alternatively pass --shape.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Shape expression JSON (fractions of the box length).
        #[arg(long)]
        shape: Option<String>,
        /// Padding factor of the grid.
        #[arg(long, default_value_t = 2)]
        pad: usize,
        /// Expected grid size (validated against the rhs header).
        #[arg(long)]
        grid: Option<usize>,
        /// Pseudo-inverse rank tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Output field file for v.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Residuals and multiplier norms as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Korn projection from the data pair (u, au) on a mask.
    Project {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        au: PathBuf,
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long)]
        shape: Option<String>,
        #[arg(long, default_value_t = 2)]
        pad: usize,
        /// Exponent for the norm bundle.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Interior stencil accuracy order.
        #[arg(long, default_value_t = 4)]
        stencil_order: usize,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Output field for the A-free part.
        #[arg(long)]
        out_tu: Option<PathBuf>,
        /// Output field for the solved part.
        #[arg(long)]
        out_w: Option<PathBuf>,
    },
    /// Run bench scenarios and write bench.csv + summary.json.
    Bench {
        /// Scenario configuration JSON; the built-in default suite when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "bench-out")]
        out_dir: PathBuf,
        /// Override every scenario's ensemble seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the built-in default suite to this path and exit.
        #[arg(long)]
        write_default_config: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// List catalog names and parameter hints.
    List,
    /// Write an operator-spec JSON for a catalog entry.
    Dump {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_mask(
    grid: &BoxGrid,
    mask: &Option<PathBuf>,
    shape: &Option<String>,
) -> Result<DomainMask, Error> {
    match (mask, shape) {
        (Some(path), None) => DomainMask::read_mask_file(path, grid),
        (None, Some(text)) => {
            let shape: Shape = serde_json::from_str(text)
                .map_err(|e| Error::InvalidConfig(format!("cannot parse shape: {e}")))?;
            DomainMask::from_shape(grid, &shape)
        }
        _ => Err(Error::InvalidConfig(
            "pass exactly one of --mask or --shape".into(),
        )),
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidConfig(_)
            | Error::Json(_)
            | Error::Format(_)
            | Error::UnknownCatalogName(_)
            | Error::InvalidParams(_)
            | Error::Io(_)
            | Error::InvalidSpec(_)
    )
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("MAXRANK_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if is_config_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Classify {
            op,
            seed,
            tol,
            samples,
            out,
        } => {
            let (spec, label) = op.resolve()?;
            let mut cfg = SampleConfig::default();
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = tol {
                cfg.rank_rel_tol = t;
            }
            if let Some(n) = samples {
                cfg.quasi_samples = n;
                cfg.random_samples = n;
            }
            let classification = classify(&spec, &cfg)?;
            let report = ClassificationReport {
                classification,
                tolerance: cfg.rank_rel_tol,
                seed: cfg.seed,
            };
            let text = serde_json::to_string_pretty(&report)?;
            println!("# {label} (sampled verdict)");
            println!("{text}");
            if let Some(path) = out {
                std::fs::write(path, text)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Catalog { sub } => match sub {
            CatalogCmd::List => {
                for (name, hint) in catalog::catalog_names() {
                    println!("{name:24} {hint}");
                }
                Ok(ExitCode::SUCCESS)
            }
            CatalogCmd::Dump { op, out } => {
                let (spec, label) = op.resolve()?;
                let text = serde_json::to_string_pretty(&spec)?;
                match out {
                    Some(path) => {
                        std::fs::write(&path, &text)?;
                        println!("wrote {label} to {}", path.display());
                    }
                    None => println!("{text}"),
                }
                Ok(ExitCode::SUCCESS)
            }
        },
        Cmd::Solve {
            op,
            rhs,
            mask,
            shape,
            pad,
            grid,
            tol,
            out,
            report,
        } => {
            let (spec, label) = op.resolve()?;
            let f = io::read_field(&rhs, pad)?;
            if let Some(g) = grid {
                if g != f.grid().size() {
                    return Err(Error::InvalidConfig(format!(
                        "--grid {g} does not match the rhs grid size {}",
                        f.grid().size()
                    )));
                }
            }
            let mask = load_mask(f.grid(), &mask, &shape)?;
            let mut cfg = SolveConfig::default();
            if let Some(t) = tol {
                cfg.rank_rel_tol = t;
            }
            let result = solve(&spec, &f, &mask, &cfg)?;
            println!(
                "{label}: residual {:.3e} on {} mask cells (tol {:.1e})",
                result.report.residual_rel_mask,
                mask.cell_count(),
                cfg.tol_solve
            );
            for w in &result.report.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(path) = out {
                io::write_field(&path, &result.field)?;
            }
            if let Some(path) = report {
                std::fs::write(path, serde_json::to_string_pretty(&result.report)?)?;
            }
            Ok(if result.report.residual_rel_mask <= cfg.tol_solve {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::Project {
            op,
            u,
            au,
            mask,
            shape,
            pad,
            p,
            stencil_order,
            report,
            out_tu,
            out_w,
        } => {
            let (spec, label) = op.resolve()?;
            let u = io::read_field(&u, pad)?;
            let au = io::read_field(&au, pad)?;
            let mask = load_mask(u.grid(), &mask, &shape)?;
            let cfg = ProjectionConfig {
                stencil_order,
                p,
                solve: SolveConfig::default(),
            };
            let res = korn_project(&spec, &u, &au, &mask, &cfg)?;
            println!(
                "{label}: kernel residual {:.3e} over {} interior cells",
                res.kernel_residual.value, res.kernel_residual.cells_used
            );
            if let Some(r) = res.norms.korn_ratio {
                println!("|u - Tu|_W^(k,p) / |Au|_Lp = {r:.6}");
            }
            let tu_norm = lp_norm(&res.t_u, &mask, p)?;
            println!("|Tu|_Lp = {:.6e}", tu_norm.value);
            if let Some(path) = out_tu {
                io::write_field(&path, &res.t_u)?;
            }
            if let Some(path) = out_w {
                io::write_field(&path, &res.w)?;
            }
            if let Some(path) = report {
                let doc = serde_json::json!({
                    "operator": label,
                    "kernel_residual": res.kernel_residual,
                    "norms": res.norms,
                    "au_consistency_fd": res.au_consistency_fd,
                    "solve_report": res.solve_report,
                });
                std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Bench {
            config,
            out_dir,
            seed,
            write_default_config,
        } => {
            if let Some(path) = write_default_config {
                let suite = default_suite();
                std::fs::write(&path, serde_json::to_string_pretty(&suite)?)?;
                println!("wrote default suite ({} scenarios) to {}", suite.scenarios.len(), path.display());
                return Ok(ExitCode::SUCCESS);
            }
            let suite = match config {
                Some(path) => SuiteConfig::from_file(&path)?,
                None => default_suite(),
            };
            let summary = run_scenarios(&suite, &out_dir, seed)?;
            println!(
                "{} scenarios, {} rows, {} failures -> {}",
                summary.scenarios,
                summary.rows,
                summary.failures,
                out_dir.display()
            );
            Ok(if summary.failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
