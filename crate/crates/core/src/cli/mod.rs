//! Command-line front end: rate points, tradeoff curves, simulated rounds and audits.

pub mod curve;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::audit::{
    audit_colluding, audit_correctness, audit_privacy_aux, audit_privacy_exact, audit_privacy_rank, format_demand,
    trial_rng, AuditReport, Honest, Mode,
};
use crate::bounds::{rat, Rational};
use crate::error::{CachingError, Result};
use crate::library::FileLibrary;
use crate::scheme::Scheme;
use curve::{curve_rows, decimal, write_csv, GRID_POINTS};

pub const SEED_ENV: &str = "PRIVCACHE_SEED";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARAM: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "privcache", version, about = "Demand-private coded caching toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the (M, R) a scheme achieves.
    Point(Settings),
    /// Emit every tradeoff series as CSV.
    Curve(Settings),
    /// Run one placement and delivery and decode for every user.
    Simulate(Settings),
    /// Run an auditor and print its JSON report.
    Audit {
        kind: AuditKind,
        #[command(flatten)]
        settings: Settings,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AuditKind {
    Correctness,
    Privacy,
    Colluding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Trivial,
    Vu,
    MdsA,
    MdsB,
    Share,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMode {
    /// Enumerate every library and randomness outcome.
    Exact,
    /// Full-rank certificate for the coded payload.
    Rank,
    /// Enumerate the auxiliary indices and pads.
    Aux,
    /// Sample the auxiliary indices and test homogeneity.
    Statistical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

/// Options shared by every command. A `--config` JSON object supplies
/// defaults under the same names (underscores for dashes); flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    /// Share of memory given to the first component, e.g. `1/2`.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long, value_enum)]
    pub first: Option<SchemeKind>,
    #[arg(long)]
    pub first_r: Option<usize>,
    #[arg(long, value_enum)]
    pub second: Option<SchemeKind>,
    #[arg(long)]
    pub second_r: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Symbols per subfile unit.
    #[arg(long)]
    pub subfile_bytes: Option<usize>,
    /// Comma-separated demand vector, e.g. `0,1,0`.
    #[arg(long)]
    pub demand: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<AuditMode>,
    /// Comma-separated colluding users.
    #[arg(long)]
    pub colluders: Option<String>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Include the packet structure table.
    #[arg(long)]
    pub table: bool,
    #[arg(long)]
    pub zero_library: bool,
}

macro_rules! overlay {
    ($top:ident, $base:ident; $($field:ident),*) => {
        $( if $top.$field.is_none() { $top.$field = $base.$field; } )*
    };
}

impl Settings {
    /// Fills unset fields from the config file and the seed variable.
    pub fn resolve(mut self) -> Result<Settings> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CachingError::Parameter(format!("reading {}: {e}", path.display())))?;
            let base: Settings = serde_json::from_str(&text)
                .map_err(|e| CachingError::Parameter(format!("config {}: {e}", path.display())))?;
            overlay!(self, base; scheme, n, k, r, alpha, first, first_r, second, second_r, seed, subfile_bytes,
                demand, trials, draws, mode, colluders, grid, format);
            self.table |= base.table;
            self.zero_library |= base.zero_library;
        }
        if self.seed.is_none() {
            if let Ok(v) = std::env::var(SEED_ENV) {
                let seed = v.trim().parse().map_err(|_| CachingError::Parameter(format!("{SEED_ENV}={v} is not a u64")))?;
                self.seed = Some(seed);
            }
        }
        Ok(self)
    }

    fn require<T: Copy>(value: Option<T>, name: &str) -> Result<T> {
        value.ok_or_else(|| CachingError::Parameter(format!("--{name} is required")))
    }

    pub fn files(&self) -> Result<usize> {
        Self::require(self.n, "n")
    }

    pub fn users(&self) -> Result<usize> {
        Self::require(self.k, "k")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn single(&self, kind: SchemeKind, r: Option<usize>, flag: &str) -> Result<Scheme> {
        let (n, k) = (self.files()?, self.users()?);
        match kind {
            SchemeKind::Trivial => Scheme::trivial(n, k),
            SchemeKind::Vu => Scheme::virtual_user(n, k, Self::require(r, flag)?),
            SchemeKind::MdsA => Scheme::mds_a(n, k),
            SchemeKind::MdsB => Scheme::mds_b(n, k),
            SchemeKind::Share => Err(CachingError::Parameter("memory sharing components cannot be shared schemes".into())),
        }
    }

    pub fn scheme(&self) -> Result<Scheme> {
        match Self::require(self.scheme, "scheme")? {
            SchemeKind::Share => {
                let alpha = parse_rational(self.alpha.as_deref().unwrap_or(""))?;
                let first = self.single(Self::require(self.first, "first")?, self.first_r, "first-r")?;
                let second = self.single(Self::require(self.second, "second")?, self.second_r, "second-r")?;
                Scheme::shared(first, second, alpha)
            }
            kind => self.single(kind, self.r, "r"),
        }
    }

    pub fn demand(&self, files: usize, users: usize) -> Result<Vec<usize>> {
        let Some(text) = &self.demand else {
            return Ok((0..users).map(|k| k % files).collect());
        };
        let demand = parse_list(text, "demand")?;
        if demand.len() != users || demand.iter().any(|&d| d >= files) {
            return Err(CachingError::Parameter(format!("demand {text} needs {users} entries below {files}")));
        }
        Ok(demand)
    }
}

fn parse_list(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| CachingError::Parameter(format!("{what}: '{s}' is not an index"))))
        .collect()
}

/// Parses `a/b` or an integer.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || CachingError::Parameter(format!("'{text}' is not a fraction like 1/2"));
    let (num, den) = text.split_once('/').unwrap_or((text, "1"));
    let num: i128 = num.trim().parse().map_err(|_| bad())?;
    let den: i128 = den.trim().parse().map_err(|_| bad())?;
    if den == 0 {
        return Err(bad());
    }
    Ok(rat(num, den))
}

fn exit_code(err: &CachingError) -> i32 {
    match err {
        CachingError::Infeasible { .. } => EXIT_INFEASIBLE,
        _ => EXIT_PARAM,
    }
}

fn io_err(e: std::io::Error) -> CachingError {
    CachingError::Internal(format!("writing output: {e}"))
}

fn point(settings: &Settings, out: &mut dyn Write) -> Result<i32> {
    let scheme = settings.scheme()?;
    let (m, r) = scheme.formula_point();
    match settings.format.unwrap_or(Format::Text) {
        Format::Text => writeln!(out, "M={m} R={r}\nM={} R={}", decimal(m), decimal(r)),
        Format::Json => writeln!(
            out,
            "{}",
            json!({"scheme": scheme.name(), "m": m.to_string(), "r": r.to_string(), "m_decimal": decimal(m), "r_decimal": decimal(r)})
        ),
    }
    .map_err(io_err)?;
    Ok(EXIT_PASS)
}

fn curve(settings: &Settings, out: &mut dyn Write) -> Result<i32> {
    let rows = curve_rows(settings.files()?, settings.users()?, settings.grid.unwrap_or(GRID_POINTS))?;
    write_csv(&rows, out).map_err(io_err)?;
    Ok(EXIT_PASS)
}

/// Outcome of one simulated round.
#[derive(Debug, Clone, Serialize)]
pub struct Transcript {
    pub scheme: String,
    pub params: std::collections::BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub demand: Vec<usize>,
    pub file_symbols: usize,
    pub symbol_bits: u32,
    pub payload_m: String,
    pub payload_r: String,
    pub formula_m: String,
    pub formula_r: String,
    pub total_m_bits: u64,
    pub total_r_bits: u64,
    pub decodes: Vec<DecodeVerdict>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<(String, String)>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecodeVerdict {
    pub user: usize,
    pub file: usize,
    pub ok: bool,
    pub detail: String,
}

pub fn simulate_round(settings: &Settings) -> Result<Transcript> {
    let scheme = settings.scheme()?;
    let (n, k) = (scheme.files(), scheme.users());
    let demand = settings.demand(n, k)?;
    let seed = settings.seed();
    let mut rng = trial_rng(seed, 0);
    let units = settings.subfile_bytes.unwrap_or(1).max(1);
    let library = if settings.zero_library {
        FileLibrary::zeros(n, units * scheme.file_len_unit(), scheme.default_symbol_bits())
    } else {
        scheme.random_library(units, &mut rng)
    };
    let round = scheme.round(&library, &demand, &mut rng)?;
    let rates = scheme.measure(&round, library.file_len(), library.symbol_bits());
    let decodes: Vec<DecodeVerdict> = round
        .placement
        .caches
        .iter()
        .enumerate()
        .map(|(user, cache)| {
            let file = demand[user];
            let detail = scheme.decode(cache, &round.packet, file).and_then(|got| library.verify(file, &got));
            DecodeVerdict { user, file, ok: detail.is_ok(), detail: detail.err().map(|e| e.to_string()).unwrap_or_default() }
        })
        .collect();
    let table = if settings.table {
        let rows = scheme.packet_table(&round.placement.server, &round.packet, &demand)?;
        Some(rows.into_iter().map(|r| (r.label, r.content)).collect())
    } else {
        None
    };
    let (fm, fr) = scheme.formula_point();
    Ok(Transcript {
        scheme: scheme.name().into(),
        params: crate::audit::scheme_params(&scheme),
        seed,
        demand,
        file_symbols: rates.file_symbols,
        symbol_bits: rates.symbol_bits,
        payload_m: rates.payload_m.to_string(),
        payload_r: rates.payload_r.to_string(),
        formula_m: fm.to_string(),
        formula_r: fr.to_string(),
        total_m_bits: rates.total_m_bits,
        total_r_bits: rates.total_r_bits,
        pass: decodes.iter().all(|d| d.ok),
        decodes,
        table,
    })
}

fn simulate(settings: &Settings, out: &mut dyn Write) -> Result<i32> {
    let t = simulate_round(settings)?;
    match settings.format.unwrap_or(Format::Json) {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&t).expect("serializable")),
        Format::Text => {
            let mut text = format!(
                "{} demand {}: M={} R={} ({} symbols of {} bits per file)\n",
                t.scheme,
                format_demand(&t.demand),
                t.payload_m,
                t.payload_r,
                t.file_symbols,
                t.symbol_bits
            );
            for d in &t.decodes {
                let verdict = if d.ok { "ok".to_string() } else { format!("FAILED: {}", d.detail) };
                text += &format!("user {} file {}: {verdict}\n", d.user, d.file);
            }
            for (label, content) in t.table.iter().flatten() {
                text += &format!("{label:<16} {content}\n");
            }
            write!(out, "{text}")
        }
    }
    .map_err(io_err)?;
    Ok(if t.pass { EXIT_PASS } else { EXIT_FAIL })
}

pub fn run_audit(kind: AuditKind, settings: &Settings) -> Result<AuditReport> {
    let scheme = settings.scheme()?;
    let seed = settings.seed();
    let mds = matches!(scheme, Scheme::MdsA(_) | Scheme::MdsB(_));
    match kind {
        AuditKind::Correctness => audit_correctness(
            &scheme,
            settings.trials.unwrap_or(100),
            seed,
            settings.subfile_bytes.unwrap_or(1),
            settings.zero_library,
            &Honest,
        ),
        AuditKind::Privacy => match settings.mode.unwrap_or(if mds { AuditMode::Rank } else { AuditMode::Exact }) {
            AuditMode::Exact => audit_privacy_exact(&scheme, &Honest),
            AuditMode::Rank => audit_privacy_rank(&scheme, settings.draws.unwrap_or(100), seed, &Honest),
            AuditMode::Aux => audit_privacy_aux(&scheme, Mode::Exact, 0, seed, &Honest),
            AuditMode::Statistical => {
                audit_privacy_aux(&scheme, Mode::Statistical, settings.trials.unwrap_or(100_000), seed, &Honest)
            }
        },
        AuditKind::Colluding => {
            let colluders = parse_list(settings.colluders.as_deref().unwrap_or("0"), "colluders")?;
            audit_colluding(&scheme, &colluders, &Honest)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Point(s) => point(&s.resolve()?, out),
        Command::Curve(s) => curve(&s.resolve()?, out),
        Command::Simulate(s) => simulate(&s.resolve()?, out),
        Command::Audit { kind, settings } => {
            let report = run_audit(kind, &settings.resolve()?)?;
            writeln!(out, "{}", report.to_json()).map_err(io_err)?;
            Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Errors go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_PARAM } else { EXIT_PASS };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("privcache").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn points() {
        let (code, out, _) = call(&["point", "--scheme", "mds-a", "--n", "2", "--k", "2"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next(), Some("M=1/3 R=4/3"));
        let (_, out, _) = call(&["point", "--scheme", "trivial", "--n", "5", "--k", "10"]);
        assert_eq!(out.lines().next(), Some("M=0 R=5"));
    }

    #[test]
    fn parameter_errors_name_the_constraint() {
        let (code, _, err) = call(&["point", "--scheme", "mds-b", "--n", "2", "--k", "2"]);
        assert_eq!(code, EXIT_PARAM);
        assert!(err.contains("N"), "{err}");
        let (code, _, _) = call(&["point", "--scheme", "vu", "--n", "2", "--k", "2"]);
        assert_eq!(code, EXIT_PARAM);
        assert_eq!(call(&["bogus"]).0, EXIT_PARAM);
    }

    #[test]
    fn audits_and_exit_codes() {
        let (code, out, _) = call(&["audit", "privacy", "--scheme", "vu", "--n", "2", "--k", "2", "--r", "1", "--mode", "exact"]);
        assert_eq!(code, EXIT_PASS, "{out}");
        let report: AuditReport = serde_json::from_str(&out).unwrap();
        assert!(report.pass);
        let (code, out, _) = call(&["audit", "privacy", "--scheme", "mds-a", "--n", "2", "--k", "2", "--mode", "rank", "--draws", "10"]);
        assert_eq!(code, EXIT_PASS);
        assert!(out.contains("rank 5/5"));
        let (code, _, err) = call(&["audit", "privacy", "--scheme", "mds-a", "--n", "2", "--k", "2", "--mode", "exact"]);
        assert_eq!(code, EXIT_INFEASIBLE, "{err}");
    }

    #[test]
    fn simulate_reports_sizes() {
        let settings = Settings {
            scheme: Some(SchemeKind::MdsA),
            n: Some(2),
            k: Some(2),
            demand: Some("0,1".into()),
            table: true,
            zero_library: true,
            ..Settings::default()
        };
        let t = simulate_round(&settings).unwrap();
        assert!(t.pass);
        assert_eq!((t.payload_m.as_str(), t.payload_r.as_str()), ("1/3", "4/3"));
        assert!(t.table.unwrap().iter().any(|(label, _)| label.starts_with("J1")));
    }

    #[test]
    fn config_file_and_flags() {
        let dir = std::env::temp_dir().join(format!("privcache-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.json");
        std::fs::write(&path, r#"{"scheme": "vu", "n": 2, "k": 3, "r": 2}"#).unwrap();
        let p = path.to_str().unwrap();
        let (_, out, _) = call(&["point", "--config", p]);
        assert_eq!(out.lines().next(), Some("M=2/3 R=1"));
        let (_, out, _) = call(&["point", "--config", p, "--r", "0"]);
        assert_eq!(out.lines().next(), Some("M=2 R=0"));
        std::fs::write(&path, r#"{"scheme": "vu", "colour": 1}"#).unwrap();
        assert_eq!(call(&["point", "--config", p]).0, EXIT_PARAM);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
