//! The `bench` subcommand: cartesian sweeps over round parameters, CSV
//! emission, and improvement-factor summaries against the lambda = 1 cell.

use anyhow::{Context, Result};
use clap::Args;
use pvf_core::orchestrator::{parse_round_config, BackendKind, Extension, SweepGrid};
use pvf_core::{run_campaign, CampaignCell, FieldConfig, PadPolicy, SecurityProfile};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Args)]
pub struct BenchArgs {
    /// Backend to benchmark.
    #[arg(long, default_value = "mask")]
    backend: String,
    /// Protocol extension: none, uce, or rve.
    #[arg(long, default_value = "none")]
    extension: String,
    /// Thaw placement: auto derives it from backend and extension.
    #[arg(long, default_value = "auto")]
    thaw: String,
    /// User count.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Vector length.
    #[arg(long, default_value_t = 100_000)]
    m: usize,
    /// Comma-separated compression factors; include 1 for the baseline.
    #[arg(long, value_delimiter = ',', default_value = "1,100")]
    lambda: Vec<usize>,
    /// Comma-separated broken-element bounds.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    delta: Vec<usize>,
    /// Dropout rate.
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    /// Repetitions per cell.
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Security profile: standard or test.
    #[arg(long, default_value = "standard", value_parser = crate::parse_profile)]
    profile: SecurityProfile,
    /// Also run every cell with a full extra padding group and report the
    /// padding overhead.
    #[arg(long, default_value_t = false)]
    padding_worst_case: bool,
    /// Key=value round file supplying defaults for n/m/lambda/delta/eta/
    /// backend/extension/seed/reps.
    #[arg(long)]
    config: Option<PathBuf>,
}

pub const CSV_HEADER: &str = "backend,extension,thaw_side,profile,padding,n,m,lambda,delta,eta,\
                              seed,rep,freeze_ms,user_secagg_ms,server_secagg_ms,verify_ms,\
                              thaw_ms,user_bytes,correctness,error";

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn csv_row(cell: &CampaignCell) -> String {
    let c = &cell.config;
    let pad = match c.pad_policy {
        PadPolicy::Minimal => "minimal",
        PadPolicy::FullGroup => "full",
    };
    let head = format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        c.backend,
        c.extension,
        c.thaw_side,
        c.profile,
        pad,
        c.n,
        c.m,
        c.lambda,
        c.delta,
        c.eta,
        c.master_seed,
        cell.rep
    );
    match &cell.result {
        Ok(r) => format!(
            "{head},{:.3},{:.3},{:.3},{:.3},{:.3},{},{},",
            ms(r.phases.freeze),
            ms(r.phases.secagg_user),
            ms(r.phases.secagg_server),
            ms(r.phases.verify),
            ms(r.phases.thaw),
            r.user_bytes,
            r.correctness
        ),
        Err(e) => format!("{head},,,,,,,,{}", e.replace(',', ";")),
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    if xs.is_empty() {
        return f64::NAN;
    }
    let mid = xs.len() / 2;
    if xs.len() % 2 == 0 {
        (xs[mid - 1] + xs[mid]) / 2.0
    } else {
        xs[mid]
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Per-cell cost summary: medians and means over repetitions.
#[derive(Debug, Clone, Copy)]
pub struct CellCost {
    pub user_ms_median: f64,
    pub user_ms_mean: f64,
    pub server_ms_median: f64,
    pub server_ms_mean: f64,
    pub total_ms_median: f64,
    pub bytes: f64,
    pub backend_entries: usize,
}

type CellKey = (String, String, usize, usize, u64, usize, usize);

/// Groups successful cells by configuration and reduces repetitions.
pub fn summarize(cells: &[CampaignCell]) -> BTreeMap<CellKey, CellCost> {
    let mut grouped: BTreeMap<CellKey, Vec<&CampaignCell>> = BTreeMap::new();
    for cell in cells {
        if cell.result.is_ok() {
            let c = &cell.config;
            let key = (
                c.backend.to_string(),
                c.extension.to_string(),
                c.n,
                c.m,
                (c.eta * 1e6) as u64,
                c.lambda,
                c.delta,
            );
            grouped.entry(key).or_default().push(cell);
        }
    }
    grouped
        .into_iter()
        .map(|(key, cells)| {
            let user: Vec<f64> =
                cells.iter().map(|c| ms(c.result.as_ref().unwrap().user_compute)).collect();
            let server: Vec<f64> =
                cells.iter().map(|c| ms(c.result.as_ref().unwrap().server_compute)).collect();
            let total: Vec<f64> = user.iter().zip(&server).map(|(u, s)| u + s).collect();
            let first = cells[0].result.as_ref().unwrap();
            (
                key,
                CellCost {
                    user_ms_median: median(user.clone()),
                    user_ms_mean: mean(&user),
                    server_ms_median: median(server.clone()),
                    server_ms_mean: mean(&server),
                    total_ms_median: median(total),
                    bytes: first.user_bytes as f64,
                    backend_entries: first.backend_entries_per_user,
                },
            )
        })
        .collect()
}

pub fn run(args: BenchArgs) -> Result<ExitCode> {
    let mut backend: BackendKind = args.backend.parse()?;
    let mut extension: Extension = args.extension.parse()?;
    let mut n = args.n;
    let mut m = args.m;
    let mut lambdas = args.lambda.clone();
    let mut deltas = args.delta.clone();
    let mut eta = args.eta;
    let mut reps = args.reps;
    let mut seed = args.seed;
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let (cfg, file_reps) = parse_round_config(&text)?;
        backend = cfg.backend;
        extension = cfg.extension;
        n = cfg.n;
        m = cfg.m;
        lambdas = vec![cfg.lambda];
        deltas = vec![cfg.delta];
        eta = cfg.eta;
        seed = cfg.master_seed;
        reps = file_reps;
    }
    if args.thaw != "auto" {
        // The campaign derives thaw placement; reject contradictions early.
        let side: pvf_core::ThawSide = args.thaw.parse()?;
        let derived = match (backend, extension) {
            (BackendKind::He, _) | (_, Extension::Rve) => pvf_core::ThawSide::User,
            _ => pvf_core::ThawSide::Server,
        };
        if side != derived {
            anyhow::bail!(
                "thaw side {side} conflicts with backend {backend} and extension {extension}"
            );
        }
    }

    let grid = SweepGrid {
        lambdas,
        deltas,
        ns: vec![n],
        ms: vec![m],
        etas: vec![eta],
        backends: vec![backend],
        extensions: vec![extension],
    };
    let field = FieldConfig::default();
    eprintln!(
        "running sweep: backend={backend} extension={extension} n={n} m={m} eta={eta} reps={reps} profile={}",
        args.profile
    );
    let mut cells = run_campaign(&grid, reps, args.profile, PadPolicy::Minimal, seed, field);
    if args.padding_worst_case {
        let padded = run_campaign(&grid, reps, args.profile, PadPolicy::FullGroup, seed, field);
        cells.extend(padded);
    }

    if let Some(path) = &args.out {
        let mut file = std::fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))?;
        writeln!(file, "{CSV_HEADER}")?;
        for cell in &cells {
            writeln!(file, "{}", csv_row(cell))?;
        }
        eprintln!("wrote {} rows to {}", cells.len(), path.display());
    } else {
        println!("{CSV_HEADER}");
        for cell in &cells {
            println!("{}", csv_row(cell));
        }
    }

    let failures = cells.iter().filter(|c| c.result.is_err()).count();
    print_improvement_factors(&cells);
    if args.padding_worst_case {
        print_padding_overhead(&cells);
    }
    if failures > 0 {
        eprintln!("{failures} cell(s) recorded errors (see the error column)");
    }
    Ok(ExitCode::SUCCESS)
}

fn print_improvement_factors(cells: &[CampaignCell]) {
    let minimal: Vec<CampaignCell> = cells
        .iter()
        .filter(|c| c.config.pad_policy == PadPolicy::Minimal)
        .cloned()
        .collect();
    let summary = summarize(&minimal);
    let mut printed_header = false;
    for (key, cost) in &summary {
        let (backend, extension, n, m, eta_micro, lambda, delta) = key.clone();
        if lambda == 1 {
            continue;
        }
        let baseline_key = (backend.clone(), extension.clone(), n, m, eta_micro, 1, 0);
        let Some(base) = summary.get(&baseline_key) else {
            continue;
        };
        if !printed_header {
            println!("improvement factors vs lambda=1 (median over reps; mean in parens):");
            printed_header = true;
        }
        println!(
            "  backend={backend} ext={extension} n={n} m={m} eta={:.2} lambda={lambda} delta={delta}: \
             user {:.1}x ({:.1}x), server {:.1}x ({:.1}x), comm {:.1}x, backend entries {}",
            eta_micro as f64 / 1e6,
            base.user_ms_median / cost.user_ms_median,
            base.user_ms_mean / cost.user_ms_mean,
            base.server_ms_median / cost.server_ms_median,
            base.server_ms_mean / cost.server_ms_mean,
            base.bytes / cost.bytes,
            cost.backend_entries,
        );
    }
    if !printed_header {
        println!("no improvement factors: sweep lacks a lambda=1 baseline cell");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pvf_core::SecurityProfile;

    #[test]
    fn median_handles_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn csv_rows_have_header_arity() {
        let grid = SweepGrid {
            lambdas: vec![1, 3],
            deltas: vec![0],
            ns: vec![3],
            ms: vec![7],
            etas: vec![0.0],
            backends: vec![BackendKind::Plain],
            extensions: vec![Extension::None],
        };
        let cells = run_campaign(
            &grid,
            1,
            SecurityProfile::Test,
            PadPolicy::Minimal,
            5,
            FieldConfig::default(),
        );
        let want = CSV_HEADER.split(',').count();
        for cell in &cells {
            assert_eq!(csv_row(cell).split(',').count(), want);
        }
        let summary = summarize(&cells);
        assert_eq!(summary.len(), 2);
        assert!(summary.values().all(|c| c.user_ms_median >= 0.0));
    }
}

fn print_padding_overhead(cells: &[CampaignCell]) {
    let split = |policy: PadPolicy| {
        let subset: Vec<CampaignCell> =
            cells.iter().filter(|c| c.config.pad_policy == policy).cloned().collect();
        summarize(&subset)
    };
    let minimal = split(PadPolicy::Minimal);
    let full = split(PadPolicy::FullGroup);
    println!("padding overhead (full extra group vs minimal):");
    for (key, pad_cost) in &full {
        let Some(base) = minimal.get(key) else { continue };
        let (_, _, _, _, _, lambda, delta) = key;
        let time_delta =
            (pad_cost.total_ms_median - base.total_ms_median) / base.total_ms_median * 100.0;
        let byte_delta = pad_cost.bytes - base.bytes;
        println!(
            "  lambda={lambda} delta={delta}: round time {:+.3}% , user bytes {:+.0}",
            time_delta, byte_delta
        );
    }
}
