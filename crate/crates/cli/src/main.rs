mod pfn;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use etacong::certify::{
    certificate_consistent, certify, CertStore, Certificate, CertifyOptions, DEFAULT_ORDER_CAP,
};
use etacong::params::{compute_params, crosscheck_tables};
use etacong::spaces::DEFAULT_MARGIN;
use etacong::verify::{reproduce_reference, ReproduceOptions};
use etacong::Error;
use serde_json::json;

/// Congruences for two-colour partition functions via Hecke matrices on eta-quotient spaces.
#[derive(Parser, Debug)]
#[command(name = "etacong", version)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Extra coefficients checked beyond every Sturm bound.
    #[arg(long, global = true, default_value_t = DEFAULT_MARGIN)]
    prec_margin: usize,
    /// Maximum number of matrix powers tried in the order search.
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER_CAP)]
    order_cap: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Certificate directory.
    #[arg(long, global = true, env = "ETACONG_STORE", default_value = "./certs")]
    store: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derived parameters of a triple, with the closed-form table cross-check.
    Params(Triple),
    /// Hecke matrix, block matrix orders and congruences; writes a certificate.
    Certify {
        #[command(flatten)]
        triple: Triple,
        /// Hecke prime.
        #[arg(short, long)]
        m: u64,
        /// Recompute even if the store has a certificate.
        #[arg(long)]
        force: bool,
    },
    /// Reproduce the reference forms, matrices and orders.
    VerifyPaper {
        /// Hecke prime for the first worked example.
        #[arg(long, default_value_t = 7)]
        m: u64,
        /// Coefficients used to confirm each recovered form.
        #[arg(long, default_value_t = 2000)]
        n_terms: usize,
    },
    /// Exact value of p_[1,p](n).
    Pfn {
        #[arg(short, long)]
        p: u64,
        #[arg(short, long)]
        n: usize,
    },
    /// Certify every (l, m) pair of a grid with l != m.
    Scan {
        #[arg(short, long)]
        p: u64,
        #[arg(short, long, default_value_t = 1)]
        j: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        ell: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct Triple {
    #[arg(short, long)]
    p: u64,
    #[arg(short = 'l', long = "ell")]
    ell: u64,
    #[arg(short, long, default_value_t = 1)]
    j: u32,
}

/// Validated run configuration.
#[derive(Debug, Clone)]
struct RunConfig {
    margin: usize,
    order_cap: u64,
    threads: Option<usize>,
    store: CertStore,
    format: Format,
}

impl RunConfig {
    fn from_args(a: &ConfigArgs) -> anyhow::Result<Self> {
        if a.prec_margin == 0 || a.order_cap == 0 || a.threads == Some(0) {
            bail!(Error::InvalidParameters(
                "--prec-margin, --order-cap and --threads must be positive".into()
            ));
        }
        Ok(RunConfig {
            margin: a.prec_margin,
            order_cap: a.order_cap,
            threads: a.threads,
            store: CertStore::new(&a.store),
            format: a.format,
        })
    }

    fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            margin: self.margin,
            order_cap: self.order_cap,
        }
    }
}

/// Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 insufficient
/// precision, 4 nonzero residual or degenerate basis, 5 order cap exceeded,
/// 6 i/o or serialization, 7 anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidParameters(_)
            | Error::UnsupportedPrime(_)
            | Error::OddWeight(_)
            | Error::NotCoprimeToLevel { .. },
        ) => 2,
        Some(Error::InsufficientPrecision { .. }) => 3,
        Some(
            Error::NonzeroResidual { .. }
            | Error::RankDeficient { .. }
            | Error::NonUnitPivot { .. },
        ) => 4,
        Some(Error::OrderCapExceeded { .. }) => 5,
        Some(Error::Io(_) | Error::Serialization(_)) => 6,
        Some(_) => 7,
        None if err.downcast_ref::<std::io::Error>().is_some() => 6,
        None => 7,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Returns whether every requested check passed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    let cfg = RunConfig::from_args(&cli.config)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Params(t) => cmd_params(&cfg, t),
        Command::Certify { triple, m, force } => cmd_certify(&cfg, triple, m, force),
        Command::VerifyPaper { m, n_terms } => cmd_verify_paper(&cfg, m, n_terms),
        Command::Pfn { p, n } => cmd_pfn(&cfg, p, n),
        Command::Scan { p, j, ell, m } => cmd_scan(&cfg, p, j, &ell, &m),
    }
}

fn print_json(v: &serde_json::Value) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn cmd_params(cfg: &RunConfig, t: Triple) -> anyhow::Result<bool> {
    let params = compute_params(t.p, t.ell, t.j)?;
    let table = crosscheck_tables(t.p, t.ell, t.j)?;
    match cfg.format {
        Format::Json => print_json(&json!({
            "params": params,
            "table_row": table.row.to_string(),
            "table_x": table.table_x,
            "table_y": table.table_y,
            "table_k": table.table_k,
            "table_matches": table.matches(),
        }))?,
        Format::Table => {
            let rows = [
                ("p", params.p.to_string()),
                ("l", params.ell.to_string()),
                ("j", params.j.to_string()),
                ("l^j", params.ell_j.to_string()),
                ("gcd(24, p+1)", params.delta_gcd.to_string()),
                ("D", params.d.to_string()),
                ("alpha", params.alpha.to_string()),
                ("beta", params.beta.to_string()),
                ("delta", params.delta.to_string()),
                ("t", params.t.to_string()),
                ("x", params.x.to_string()),
                ("y", params.y.to_string()),
                ("k", params.k.to_string()),
                ("s", params.s.to_string()),
                ("lambda", params.lambda.to_string()),
                ("character", params.character.to_string()),
                ("table row", table.row.to_string()),
                ("table agrees", table.matches().to_string()),
            ];
            for (k, v) in rows {
                println!("{k:<14} {v}");
            }
        }
    }
    Ok(table.matches())
}

/// Loads a consistent cached certificate or computes and stores a new one.
fn obtain_certificate(
    cfg: &RunConfig,
    p: u64,
    ell: u64,
    j: u32,
    m: u64,
    force: bool,
) -> anyhow::Result<(Certificate, PathBuf, bool)> {
    let path = cfg.store.path_for(p, ell, j, m);
    if !force {
        if let Some(cert) = cfg.store.load(p, ell, j, m)? {
            if certificate_consistent(&cert)? {
                return Ok((cert, path, true));
            }
        }
    }
    let out = certify(p, ell, j, m, cfg.certify_options())?;
    let path = cfg.store.save(&out.certificate)?;
    Ok((out.certificate, path, false))
}

fn summary_line(c: &Certificate, cached: bool) -> String {
    format!(
        "p={} l={} j={} m={}: J={} N={} c={} dim={}{}",
        c.p,
        c.ell,
        c.j,
        c.m,
        c.order_pgl_j,
        c.order_gl_n,
        c.scalar_c,
        c.dim,
        if cached { " (cached)" } else { "" }
    )
}

fn cmd_certify(cfg: &RunConfig, t: Triple, m: u64, force: bool) -> anyhow::Result<bool> {
    let (cert, path, cached) = obtain_certificate(cfg, t.p, t.ell, t.j, m, force)?;
    match cfg.format {
        Format::Json => print_json(&json!({
            "certificate": cert,
            "path": path,
            "cached": cached,
        }))?,
        Format::Table => {
            println!("{}", summary_line(&cert, cached));
            println!("{}", cert.congruence_vanishing);
            println!("{}", cert.congruence_periodic);
            println!(
                "{} {}",
                if cached { "loaded from" } else { "written to" },
                path.display()
            );
        }
    }
    Ok(true)
}

fn cmd_verify_paper(cfg: &RunConfig, m: u64, n_terms: usize) -> anyhow::Result<bool> {
    let report = reproduce_reference(&ReproduceOptions {
        example1_m: m,
        n_terms,
        margin: cfg.margin,
        order_cap: cfg.order_cap,
    })?;
    match cfg.format {
        Format::Json => println!("{}", report.to_json()?),
        Format::Table => print!("{}", report.render_table()),
    }
    Ok(report.passed())
}

fn cmd_pfn(cfg: &RunConfig, p: u64, n: usize) -> anyhow::Result<bool> {
    if p == 0 {
        bail!(Error::InvalidParameters("p must be positive".into()));
    }
    let v = pfn::pfn_exact(p, n);
    match cfg.format {
        Format::Json => print_json(&json!({ "p": p, "n": n, "value": v.to_string() }))?,
        Format::Table => println!("{v}"),
    }
    Ok(true)
}

fn cmd_scan(cfg: &RunConfig, p: u64, j: u32, ells: &[u64], ms: &[u64]) -> anyhow::Result<bool> {
    use rayon::prelude::*;
    let grid: Vec<(u64, u64)> = ells
        .iter()
        .flat_map(|&l| ms.iter().map(move |&m| (l, m)))
        .filter(|&(l, m)| l != m)
        .collect();
    let results: Vec<_> = grid
        .par_iter()
        .map(|&(l, m)| (l, m, obtain_certificate(cfg, p, l, j, m, false)))
        .collect();
    let mut all_ok = true;
    let mut json_rows = Vec::new();
    for (l, m, r) in results {
        match r {
            Ok((cert, path, cached)) => {
                if cfg.format == Format::Table {
                    println!("{}", summary_line(&cert, cached));
                }
                json_rows.push(json!({
                    "ell": l, "m": m, "ok": true, "cached": cached, "path": path,
                    "order_pgl_J": cert.order_pgl_j, "order_gl_N": cert.order_gl_n, "scalar_c": cert.scalar_c,
                }));
            }
            Err(e) => {
                all_ok = false;
                if cfg.format == Format::Table {
                    println!("p={p} l={l} j={j} m={m}: error: {e}");
                }
                json_rows.push(json!({ "ell": l, "m": m, "ok": false, "error": e.to_string() }));
            }
        }
    }
    if cfg.format == Format::Json {
        print_json(&json!({ "p": p, "j": j, "results": json_rows }))?;
    }
    Ok(all_ok)
}
