//! Command execution and serialization behind the CLI: every computation in
//! the crate is reachable as a subcommand that emits CSV or JSON. CSV files
//! carry data only (diffable against published tables); JSON wraps the same
//! data with a provenance block. Floats in CSV are written with 17
//! significant digits; JSON numbers round-trip exactly.

use crate::error::{Error, Result};
use crate::finite_n::cdf_exact_tol;
use crate::lg::{lg_approx, scaled_zeta, LGFrame};
use crate::mc::{build_table, rng_metadata, TABLE_QUANTILES};
use crate::rates::{
    fact221_sweep, lemma3_sweep, m_envelope, theorem2_sweep, MEnvelopeRow, RateReport,
    DEFAULT_N_GRID_GAMMA1, DEFAULT_S_GRID,
};
use crate::sequences::{
    naive_sequences, r_n_exact, r_n_expansion, refined_sequences, sequence_diagnostics,
    sequences_of_kind, SeqKind,
};
use crate::specfun::{airy_ai, scaled_laguerre, WishartPair};
use crate::tw::{f2_fredholm, tw_quantile};
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Global options shared by all commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub tol: f64,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { format: OutputFormat::Csv, out: None, seed: 42, tol: 1e-9, threads: None }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tol = {} must be in (0, 1)", self.tol)));
        }
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(Error::Config("threads must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Environment variable naming the default worker count.
pub const THREADS_ENV: &str = "LUE_EDGE_THREADS";

/// Install the requested rayon pool size (flag first, then environment).
/// Safe to call repeatedly; only the first call takes effect.
pub fn configure_threads(requested: Option<usize>) -> usize {
    let from_env = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok());
    if let Some(t) = requested.or(from_env) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    rayon::current_num_threads()
}

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Everything a command produces: preformatted CSV plus a JSON value.
#[derive(Debug)]
pub struct CommandOutput {
    pub command: String,
    pub csv_header: String,
    pub csv_rows: Vec<String>,
    pub json_data: serde_json::Value,
}

fn provenance(cfg: &RunConfig, command: &str) -> serde_json::Value {
    let (rng, normals) = rng_metadata();
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": cfg.seed,
        "tol": cfg.tol,
        "threads": rayon::current_num_threads(),
        "rng": rng,
        "normals": normals,
    })
}

/// Serialize to the chosen sink. CSV is data-only; JSON nests the data under
/// a provenance block.
pub fn write_output(cfg: &RunConfig, output: &CommandOutput) -> Result<()> {
    let body = match cfg.format {
        OutputFormat::Csv => {
            let mut s = String::with_capacity(4096);
            s.push_str(&output.csv_header);
            s.push('\n');
            for row in &output.csv_rows {
                s.push_str(row);
                s.push('\n');
            }
            s
        }
        OutputFormat::Json => {
            let doc = json!({
                "provenance": provenance(cfg, &output.command),
                "data": output.json_data,
            });
            let mut s = serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
            s.push('\n');
            s
        }
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .map_err(|e| Error::Config(format!("stdout write failed: {e}")))
        }
    }
}

fn parse_seq_kind(s: &str) -> Result<SeqKind> {
    match s {
        "naive" => Ok(SeqKind::Naive),
        "refined" => Ok(SeqKind::Refined),
        other => Err(Error::Config(format!(
            "unknown sequence kind '{other}' (expected naive|refined)"
        ))),
    }
}

#[derive(Serialize)]
struct TwRow {
    quantile: f64,
    tw_cdf: f64,
}

/// `tw-table`: CDF values at quantiles, or quantiles at probabilities.
pub fn cmd_tw_table(
    cfg: &RunConfig,
    quantiles: Option<Vec<f64>>,
    ps: Option<Vec<f64>>,
) -> Result<CommandOutput> {
    if let Some(ps) = ps {
        if ps.is_empty() {
            return Err(Error::Config("probability list must not be empty".into()));
        }
        let rows: Vec<(f64, f64)> =
            ps.iter().map(|&p| Ok((p, tw_quantile(p)?))).collect::<Result<_>>()?;
        return Ok(CommandOutput {
            command: "tw-table --p".into(),
            csv_header: "p,quantile".into(),
            csv_rows: rows.iter().map(|(p, q)| format!("{},{}", fmt17(*p), fmt17(*q))).collect(),
            json_data: json!(rows
                .iter()
                .map(|(p, q)| json!({"p": p, "quantile": q}))
                .collect::<Vec<_>>()),
        });
    }
    let qs = quantiles.unwrap_or_else(|| TABLE_QUANTILES.to_vec());
    if qs.is_empty() {
        return Err(Error::Config("quantile list must not be empty".into()));
    }
    let rows: Vec<TwRow> = qs
        .iter()
        .map(|&q| Ok(TwRow { quantile: q, tw_cdf: f2_fredholm(q)? }))
        .collect::<Result<_>>()?;
    Ok(CommandOutput {
        command: "tw-table".into(),
        csv_header: "quantile,tw_cdf".into(),
        csv_rows: rows
            .iter()
            .map(|r| format!("{},{}", fmt17(r.quantile), fmt17(r.tw_cdf)))
            .collect(),
        json_data: serde_json::to_value(&rows).unwrap(),
    })
}

/// `simulate`: empirical CDF table at the reference quantiles.
pub fn cmd_simulate(
    _cfg: &RunConfig,
    n: u32,
    m: u32,
    reps: u64,
    seed: u64,
    kind: &str,
) -> Result<CommandOutput> {
    let kind = parse_seq_kind(kind)?;
    let pair = WishartPair::new(n, m)?;
    let cs = sequences_of_kind(pair, kind);
    let table = build_table(pair, &cs, reps, seed, &TABLE_QUANTILES)?;
    let csv_rows = table
        .quantiles
        .iter()
        .zip(&table.nominal)
        .zip(&table.values)
        .zip(&table.se)
        .map(|(((q, nom), v), se)| {
            format!("{},{},{},{}", fmt17(*q), fmt17(*nom), fmt17(*v), fmt17(*se))
        })
        .collect();
    Ok(CommandOutput {
        command: format!("simulate {n} {m} {reps} {seed}"),
        csv_header: "quantile,tw_cdf,empirical,se".into(),
        csv_rows,
        json_data: serde_json::to_value(&table).unwrap(),
    })
    .map(|out| {
        let _ = cfg;
        out
    })
}

#[derive(Serialize)]
struct FiniteCdfRow {
    s: f64,
    cdf: f64,
}

/// `finite-cdf`: exact rescaled CDF at one or more s values.
pub fn cmd_finite_cdf(
    cfg: &RunConfig,
    n: u32,
    m: u32,
    s_grid: &[f64],
    kind: &str,
) -> Result<CommandOutput> {
    if s_grid.is_empty() {
        return Err(Error::Config("s grid must not be empty".into()));
    }
    let kind = parse_seq_kind(kind)?;
    let pair = WishartPair::new(n, m)?;
    let cs = sequences_of_kind(pair, kind);
    let rows: Vec<FiniteCdfRow> = s_grid
        .iter()
        .map(|&s| Ok(FiniteCdfRow { s, cdf: cdf_exact_tol(pair, &cs, s, cfg.tol)? }))
        .collect::<Result<_>>()?;
    Ok(CommandOutput {
        command: format!("finite-cdf {n} {m}"),
        csv_header: "s,cdf".into(),
        csv_rows: rows.iter().map(|r| format!("{},{}", fmt17(r.s), fmt17(r.cdf))).collect(),
        json_data: serde_json::to_value(&rows).unwrap(),
    })
}

fn rate_reports_to_output(command: String, reports: Vec<RateReport>) -> CommandOutput {
    let mut csv_rows = Vec::new();
    for r in &reports {
        for (i, &n) in r.n_grid.iter().enumerate() {
            for (j, &s) in r.s_grid.iter().enumerate() {
                csv_rows.push(format!(
                    "raw,{},{},{},{},{},{}",
                    r.label,
                    fmt17(r.gamma),
                    fmt17(r.beta),
                    n,
                    fmt17(s),
                    fmt17(r.raw[i][j])
                ));
            }
        }
        for (i, &n) in r.n_grid.iter().enumerate() {
            csv_rows.push(format!(
                "envelope,{},{},{},{},,{}",
                r.label,
                fmt17(r.gamma),
                fmt17(r.beta),
                n,
                fmt17(r.scaled_envelope[i])
            ));
        }
        csv_rows.push(format!(
            "slope,{},{},{},,,{}",
            r.label,
            fmt17(r.gamma),
            fmt17(r.beta),
            fmt17(r.fitted_slope)
        ));
    }
    CommandOutput {
        command,
        csv_header: "kind,label,gamma,beta,N,s,value".into(),
        csv_rows,
        json_data: serde_json::to_value(&reports).unwrap(),
    }
}

/// `rate`: one of the sweep drivers.
#[allow(clippy::too_many_arguments)]
pub fn cmd_rate(
    cfg: &RunConfig,
    which: &str,
    gamma: u32,
    n_grid: Option<Vec<u32>>,
    s_grid: Option<Vec<f64>>,
    kind: &str,
    check_bounds: bool,
) -> Result<CommandOutput> {
    let kind = parse_seq_kind(kind)?;
    let n_grid = n_grid.unwrap_or_else(|| DEFAULT_N_GRID_GAMMA1.to_vec());
    let s_grid = s_grid.unwrap_or_else(|| DEFAULT_S_GRID.to_vec());
    if gamma == 0 {
        return Err(Error::Config("gamma must be >= 1".into()));
    }
    match which {
        "fact221" => {
            let reports = fact221_sweep(gamma, &n_grid, &s_grid, kind)?;
            Ok(rate_reports_to_output(format!("rate fact221 {gamma}"), reports.to_vec()))
        }
        "lemma3" => {
            let reports = lemma3_sweep(gamma, &n_grid, &s_grid, kind)?;
            Ok(rate_reports_to_output(format!("rate lemma3 {gamma}"), reports.to_vec()))
        }
        "theorem2" => {
            let report = theorem2_sweep(gamma, &n_grid, &s_grid, kind, cfg.tol, check_bounds)?;
            Ok(rate_reports_to_output(format!("rate theorem2 {gamma}"), vec![report]))
        }
        "m-envelope" => {
            let rows = m_envelope(gamma, &n_grid, &s_grid, kind)?;
            Ok(m_envelope_output(gamma, rows))
        }
        other => Err(Error::Config(format!(
            "unknown rate kind '{other}' (expected fact221|lemma3|theorem2|m-envelope)"
        ))),
    }
}

fn m_envelope_output(gamma: u32, rows: Vec<MEnvelopeRow>) -> CommandOutput {
    CommandOutput {
        command: format!("rate m-envelope {gamma}"),
        csv_header: "s0,c_hat,sbar_trace,m_hat".into(),
        csv_rows: rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{}",
                    fmt17(r.s0),
                    fmt17(r.c_hat),
                    fmt17(r.sbar_trace),
                    fmt17(r.m_hat)
                )
            })
            .collect(),
        json_data: serde_json::to_value(&rows).unwrap(),
    }
}

/// `sequences`: the scalar sequence panel for one pair.
pub fn cmd_sequences(_cfg: &RunConfig, n: u32, m: u32) -> Result<CommandOutput> {
    let pair = WishartPair::new(n, m)?;
    let naive = naive_sequences(pair);
    let (refined, gamma) = refined_sequences(pair);
    let (c, s) = sequence_diagnostics(pair, refined.mu, refined.sigma);
    let r_exact = r_n_exact(pair)?;
    let r_exp = r_n_expansion(pair);
    let quantities: Vec<(&str, f64)> = vec![
        ("mu", naive.mu),
        ("sigma", naive.sigma),
        ("mu_tilde", refined.mu),
        ("sigma_tilde", refined.sigma),
        ("gamma_mix", gamma),
        ("r_exact", r_exact),
        ("r_expansion", r_exp),
        ("centering_defect", c),
        ("scaling_defect", s),
    ];
    Ok(CommandOutput {
        command: format!("sequences {n} {m}"),
        csv_header: "quantity,value".into(),
        csv_rows: quantities.iter().map(|(k, v)| format!("{k},{}", fmt17(*v))).collect(),
        json_data: json!(quantities
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect::<std::collections::BTreeMap<String, f64>>()),
    })
}

#[derive(Serialize)]
struct LgCheckRow {
    s: f64,
    x: f64,
    f_exact: f64,
    f_lg: f64,
    abs_err: f64,
    zeta_scaled: f64,
    b: f64,
    d: f64,
    u: f64,
}

/// `lg-check`: Airy-frame diagnostics of the pair's own scaled Laguerre
/// function along x = mu + sigma s.
pub fn cmd_lg_check(_cfg: &RunConfig, n: u32, m: u32, s_grid: &[f64]) -> Result<CommandOutput> {
    if s_grid.is_empty() {
        return Err(Error::Config("s grid must not be empty".into()));
    }
    let pair = WishartPair::new(n, m)?;
    let frame = LGFrame::new(pair);
    let cs = naive_sequences(pair);
    let r = r_n_exact(pair)?;
    let rows: Vec<LgCheckRow> = s_grid
        .iter()
        .map(|&s| {
            let x = cs.mu + cs.sigma * s;
            let f_exact = scaled_laguerre(pair, x)?;
            let f_lg = lg_approx(&frame, x)?;
            let zs = scaled_zeta(&frame, x)?;
            let theta = f_exact * (cs.mu / x);
            Ok(LgCheckRow {
                s,
                x,
                f_exact,
                f_lg,
                abs_err: (f_exact - f_lg).abs(),
                zeta_scaled: zs,
                b: (theta - r * airy_ai(zs)).abs(),
                d: airy_ai(zs) - airy_ai(s),
                u: zs - s,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CommandOutput {
        command: format!("lg-check {n} {m}"),
        csv_header: "s,x,f_exact,f_lg,abs_err,zeta_scaled,b,d,u".into(),
        csv_rows: rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{},{}",
                    fmt17(r.s),
                    fmt17(r.x),
                    fmt17(r.f_exact),
                    fmt17(r.f_lg),
                    fmt17(r.abs_err),
                    fmt17(r.zeta_scaled),
                    fmt17(r.b),
                    fmt17(r.d),
                    fmt17(r.u)
                )
            })
            .collect(),
        json_data: serde_json::to_value(&rows).unwrap(),
    })
}
