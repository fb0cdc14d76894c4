//! Command-line front end: argument parsing, fixtures, configuration and
//! report rendering.

pub mod config;
pub mod fixtures;
pub mod records;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::curves::{check_obstruction, compute_fga, fga_candidates, FgaResult};
use crate::moduli::{calibrate, derive_recursion, format_point, parse_complex, Derivation};
use crate::nucleus::contraction_check;
use crate::portraits::enumerate_q4;
use crate::twist::{compute_attractor, twist_solve, VirtualEndomorphism};
use crate::word::Word;
use config::{Config, ConfigError};
use fixtures::{FixtureError, Fixtures, RecursionRecord};
use verify::Check;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "wreathkit",
    version,
    about = "Wreath recursions, twisting and curve pullback for quadratic Thurston maps"
)]
pub struct Cli {
    /// Configuration file with `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Fixture directory (defaults to the built-in tables).
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RowArg {
    /// Row id (e.g. q4-1m2z-sq) or 1-based row number.
    #[arg(long)]
    pub row: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the nucleus of a recursion row.
    Nucleus {
        #[command(flatten)]
        row: RowArg,
        /// Compare with the tabulated nucleus.
        #[arg(long)]
        verify: bool,
        /// Every row.
        #[arg(long)]
        all: bool,
    },
    /// Solve a twisting problem by iterating the twisting map.
    Twist {
        #[command(flatten)]
        row: RowArg,
        /// The twist h, a word in a, A, b, B.
        #[arg(long)]
        word: Option<String>,
        /// Word multiplied on the left of h before iterating.
        #[arg(long)]
        prefix: Option<String>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        coordinate: u8,
        /// Compare computed attractors with the table.
        #[arg(long)]
        verify_attractors: bool,
    },
    /// Finite global attractor of the curve pullback.
    Fga {
        #[command(flatten)]
        row: RowArg,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        coordinate: u8,
        #[arg(long)]
        verify: bool,
    },
    /// Search the pullback candidates for an obstructing curve.
    Obstruction {
        #[command(flatten)]
        row: RowArg,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        coordinate: u8,
    },
    /// Enumerate postcritical portraits.
    Portraits {
        #[arg(long)]
        list: bool,
        /// Check the postcomposition actions on the table rows.
        #[arg(long)]
        verify_actions: bool,
    },
    /// Derive a wreath recursion numerically by lifting loops.
    Derive {
        /// Map label as tabulated, e.g. "1/z^2", or its fixture key.
        #[arg(long)]
        gmap: String,
        /// `re,im`, or `formal` for z^2.
        #[arg(long, allow_hyphen_values = true)]
        fixed_point: String,
        #[arg(long)]
        verify: bool,
    },
    /// Reproduce the tables.
    VerifyTables {
        #[arg(long)]
        all: bool,
        /// Table number 1 to 6; repeatable.
        #[arg(long)]
        table: Vec<u8>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("unknown row `{0}`")]
    UnknownRow(String),
    #[error("unknown g-map `{0}`")]
    UnknownMap(String),
    #[error("malformed word `{text}`: {source}")]
    Word { text: String, source: crate::word::ParseError },
    #[error("malformed fixed point `{0}`")]
    FixedPoint(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("fixtures: {0}")]
    Fixtures(#[from] FixtureError),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => EXIT_MISMATCH,
            _ => EXIT_USAGE,
        }
    }
}

fn compute<E: ToString>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Clone, Debug, Default)]
pub struct Section {
    pub title: String,
    pub lines: Vec<String>,
}

/// What a command did: inputs, outputs and any differences from the tables.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<(String, String)>,
    pub sections: Vec<Section>,
    pub mismatch: bool,
}

impl Report {
    fn new(command: &str) -> Report {
        Report { command: command.into(), ..Report::default() }
    }

    fn input(&mut self, k: &str, v: impl ToString) {
        self.inputs.push((k.into(), v.to_string()));
    }

    fn section(&mut self, title: impl Into<String>, lines: Vec<String>) {
        self.sections.push(Section { title: title.into(), lines });
    }

    fn checks(&mut self, checks: &[Check]) {
        for c in checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            self.section(format!("{verdict} {} {}", c.id, c.title), c.details.clone());
            self.mismatch |= !c.passed;
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.mismatch {
            EXIT_MISMATCH
        } else {
            EXIT_OK
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.command);
        for (k, v) in &self.inputs {
            out.push_str(&format!("  {k}: {v}\n"));
        }
        for s in &self.sections {
            out.push_str(&format!("\n{}\n", s.title));
            for l in &s.lines {
                out.push_str(&format!("  {l}\n"));
            }
        }
        out.push_str(&format!("\nstatus: {}\n", if self.mismatch { "mismatch" } else { "ok" }));
        out
    }

    pub fn to_json(&self) -> Value {
        let inputs: serde_json::Map<String, Value> = self.inputs.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let sections: Vec<Value> =
            self.sections.iter().map(|s| json!({ "title": s.title, "lines": s.lines })).collect();
        json!({
            "command": self.command,
            "inputs": inputs,
            "sections": sections,
            "status": if self.mismatch { "mismatch" } else { "ok" },
        })
    }
}

/// Rendered output of one invocation.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses `argv` (program name first), runs the command and renders it.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { stdout: text, stderr: String::new(), code: EXIT_OK }
                }
                _ => Outcome { stdout: String::new(), stderr: text, code: EXIT_USAGE },
            };
        }
    };
    let json = cli.json;
    match load_config(&cli).and_then(|cfg| run_command(&cli.command, &cfg)) {
        Ok(report) => {
            let stdout = if json {
                format!("{}\n", serde_json::to_string_pretty(&report.to_json()).expect("report serializes"))
            } else {
                report.to_text()
            };
            Outcome { stdout, stderr: String::new(), code: report.exit_code() }
        }
        Err(e) => Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), code: e.exit_code() },
    }
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(dir) = &cli.fixtures {
        cfg.fixtures = Some(dir.clone());
    }
    Ok(cfg)
}

fn load_fixtures(cfg: &Config) -> Result<Fixtures, CliError> {
    Ok(match &cfg.fixtures {
        Some(dir) => Fixtures::load(dir)?,
        None => Fixtures::builtin(),
    })
}

fn parse_word(text: &str) -> Result<Word, CliError> {
    Word::parse(text).map_err(|source| CliError::Word { text: text.into(), source })
}

fn find_row<'a>(fx: &'a Fixtures, id: &str) -> Result<&'a RecursionRecord, CliError> {
    fx.row(id).ok_or_else(|| CliError::UnknownRow(id.into()))
}

/// The selected row, or every row when `all` is set.
fn select_rows<'a>(fx: &'a Fixtures, row: &RowArg, all: bool) -> Result<Vec<&'a RecursionRecord>, CliError> {
    match (&row.row, all) {
        (Some(id), false) => Ok(vec![find_row(fx, id)?]),
        (None, true) => Ok(fx.recursions.iter().collect()),
        (Some(_), true) => Err(CliError::Usage("--row and --all are exclusive".into())),
        (None, false) => Err(CliError::Usage("--row <id> is required".into())),
    }
}

fn row_title(r: &RecursionRecord) -> String {
    format!("row {} {} ({} at {})", r.index, r.id, r.gmap, r.fixed_label)
}

/// Executes one parsed command.
pub fn run_command(cmd: &Command, cfg: &Config) -> Result<Report, CliError> {
    let fx = load_fixtures(cfg)?;
    match cmd {
        Command::Nucleus { row, verify, all } => cmd_nucleus(&fx, cfg, row, *verify, *all),
        Command::Twist { row, word, prefix, coordinate, verify_attractors } => {
            cmd_twist(&fx, cfg, row, word.as_deref(), prefix.as_deref(), *coordinate, *verify_attractors)
        }
        Command::Fga { row, coordinate, verify } => cmd_fga(&fx, cfg, row, *coordinate, *verify),
        Command::Obstruction { row, coordinate } => cmd_obstruction(&fx, cfg, row, *coordinate),
        Command::Portraits { list, verify_actions } => cmd_portraits(&fx, *list, *verify_actions),
        Command::Derive { gmap, fixed_point, verify } => cmd_derive(&fx, cfg, gmap, fixed_point, *verify),
        Command::VerifyTables { all, table } => cmd_verify_tables(&fx, cfg, *all, table),
    }
}

fn cmd_nucleus(fx: &Fixtures, cfg: &Config, row: &RowArg, verify: bool, all: bool) -> Result<Report, CliError> {
    let mut rep = Report::new("nucleus");
    let rows = select_rows(fx, row, all || (verify && row.row.is_none()))?;
    rep.input("rows", rows.len());
    rep.input("window", cfg.nucleus.window);
    for r in rows {
        let res = verify::computed_nucleus(r, cfg).map_err(CliError::Compute)?;
        let report = contraction_check(&r.recursion, &res.nucleus, &cfg.nucleus);
        let mut lines = vec![
            format!("recursion: {}", r.recursion),
            format!("nucleus: {}", res.nucleus),
            format!("augmentation rounds: {}", res.rounds),
            format!("contraction: {:?}, k = {}", report.status, report.k),
        ];
        lines.extend(report.edges.iter().map(|(p, q)| format!("  {p} -> {q}")));
        if verify {
            let published = verify::published_nucleus(r, cfg);
            if res.nucleus.same_as(&published) {
                lines.push("table: match".into());
            } else {
                let (missing, extra) = verify::nucleus_diff(&published, &res.nucleus);
                let show =
                    |v: Vec<crate::word::Pattern>| v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ");
                lines.push(format!("table: {published}"));
                lines.push(format!("mismatch: missing [{}] extra [{}]", show(missing), show(extra)));
                rep.mismatch = true;
            }
        }
        rep.section(row_title(r), lines);
    }
    Ok(rep)
}

fn cmd_twist(
    fx: &Fixtures,
    cfg: &Config,
    row: &RowArg,
    word: Option<&str>,
    prefix: Option<&str>,
    coordinate: u8,
    verify_attractors: bool,
) -> Result<Report, CliError> {
    let mut rep = Report::new("twist");
    rep.input("coordinate", coordinate);
    if verify_attractors {
        let mut checks = vec![verify::check_attractors(fx, cfg)];
        checks.push(verify::check_obstructed_table(fx, cfg));
        rep.checks(&checks);
        return Ok(rep);
    }
    let Some(id) = &row.row else { return Err(CliError::Usage("--row <id> is required".into())) };
    let r = find_row(fx, id)?;
    let Some(word) = word else { return Err(CliError::Usage("--word <w> is required".into())) };
    let h = parse_word(word)?;
    let prefix = prefix.map(parse_word).transpose()?;
    rep.input("row", row_title(r));
    rep.input("word", &h);
    if let Some(p) = &prefix {
        rep.input("prefix", p);
    }
    let n = verify::computed_nucleus(r, cfg).map_err(CliError::Compute)?;
    let ve = VirtualEndomorphism::new(r.recursion.clone(), usize::from(coordinate - 1));
    let att = compute_attractor(&ve, &n.nucleus, &cfg.attractor).map_err(compute)?;
    rep.section("attractor", vec![att.to_string()]);
    let sol = twist_solve(&ve, &att, &h, prefix.as_ref()).map_err(compute)?;
    let trace: Vec<String> = sol.trace.iter().map(|w| w.to_string()).collect();
    rep.section("orbit", vec![trace.join(" -> ")]);
    rep.section("label", vec![sol.label.to_string()]);
    Ok(rep)
}

fn cmd_fga(fx: &Fixtures, cfg: &Config, row: &RowArg, coordinate: u8, verify: bool) -> Result<Report, CliError> {
    let mut rep = Report::new("fga");
    rep.input("coordinate", coordinate);
    rep.input("bound", cfg.fga.bound);
    if verify && row.row.is_none() {
        rep.checks(&[verify::check_fgas(fx, cfg)]);
        return Ok(rep);
    }
    let rows = select_rows(fx, row, false)?;
    for r in rows {
        let n = verify::computed_nucleus(r, cfg).map_err(CliError::Compute)?;
        let ve = VirtualEndomorphism::new(r.recursion.clone(), usize::from(coordinate - 1));
        let res = compute_fga(&ve, &n.nucleus, &cfg.fga).map_err(compute)?;
        let mut lines = Vec::new();
        match &res {
            FgaResult::Closed { cycles } => lines.push(format!("cycles: {}", verify::cycles_text(cycles))),
            FgaResult::NotClosed { periodic, visited } => {
                lines.push(format!("not closed: {visited} curves visited, {} periodic", periodic.len()));
                let shown: Vec<String> = periodic.iter().take(24).map(|c| c.to_string()).collect();
                lines.push(format!("periodic sample: {}", shown.join(", ")));
            }
        }
        if verify {
            let published = fx.attractor(&r.id);
            let check = verify::check_fgas(
                &Fixtures { attractors: published.into_iter().cloned().collect(), ..fx.clone() },
                cfg,
            );
            lines.extend(check.details.iter().cloned());
            lines.push(format!("table: {}", if check.passed { "match" } else { "mismatch" }));
            rep.mismatch |= !check.passed;
        }
        rep.section(row_title(r), lines);
    }
    Ok(rep)
}

fn cmd_obstruction(fx: &Fixtures, cfg: &Config, row: &RowArg, coordinate: u8) -> Result<Report, CliError> {
    let mut rep = Report::new("obstruction");
    let r = select_rows(fx, row, false)?[0];
    rep.input("row", row_title(r));
    rep.input("coordinate", coordinate);
    let n = verify::computed_nucleus(r, cfg).map_err(CliError::Compute)?;
    let ve = VirtualEndomorphism::new(r.recursion.clone(), usize::from(coordinate - 1));
    let cands = fga_candidates(&ve, &n.nucleus, &cfg.fga).map_err(compute)?;
    rep.input("candidates", cands.len());
    let line = match check_obstruction(&ve, &cands).map_err(compute)? {
        Some((c, (num, 1))) => format!("{c} with multiplier {num}"),
        Some((c, (num, den))) => format!("{c} with multiplier {num}/{den}"),
        None => "none found".into(),
    };
    rep.section("certificate", vec![line]);
    Ok(rep)
}

fn cmd_portraits(fx: &Fixtures, _list: bool, verify_actions: bool) -> Result<Report, CliError> {
    let mut rep = Report::new("portraits");
    if verify_actions {
        rep.checks(&[verify::check_portraits(fx)]);
        return Ok(rep);
    }
    let maps: Vec<_> = fx.gmaps.iter().map(|g| g.map.clone()).collect();
    let classes = enumerate_q4(&maps);
    rep.input("classes", classes.len());
    for (i, c) in classes.iter().enumerate() {
        let members: Vec<String> = c.members.iter().map(|(g, s)| format!("{} slot {s}", fx.gmaps[*g].label)).collect();
        let table: Vec<String> = fx
            .portraits
            .iter()
            .filter(|p| crate::portraits::portraits_equivalent(&p.portrait, &c.portrait).is_some())
            .map(|p| format!("table {} row {}", p.table, p.row))
            .collect();
        rep.section(
            format!("class {}", i + 1),
            vec![c.portrait.to_string(), format!("from: {}", members.join("; ")), format!("as: {}", table.join("; "))],
        );
    }
    Ok(rep)
}

fn cmd_derive(fx: &Fixtures, cfg: &Config, gmap: &str, fixed: &str, verify: bool) -> Result<Report, CliError> {
    let mut rep = Report::new("derive");
    let g = fx.gmap(gmap).ok_or_else(|| CliError::UnknownMap(gmap.into()))?;
    rep.input("gmap", &g.label);
    let approx = match fixed.trim() {
        "formal" if !fx.recursions.iter().any(|r| r.gmap == g.label && r.fixed.is_none()) => {
            return Err(CliError::Usage(format!("{} has no formal fixed point", g.label)));
        }
        "formal" => None,
        s => Some(parse_complex(s).map_err(|_| CliError::FixedPoint(s.into()))?),
    };
    let tol = cfg.fixed_point_tolerance.max(verify::SELECTION_TOLERANCE);
    let z0 = match approx {
        None => None,
        Some(z) => Some(g.map.nearest_fixed_point(z, tol).map_err(|e| CliError::Usage(e.to_string()))?),
    };
    rep.input("fixed point", z0.map_or("formal".to_string(), |z| format_point(Some(z))));
    let offset = match (approx, z0) {
        (Some(a), Some(z)) if (a - z).norm() > cfg.fixed_point_tolerance => Some((a - z).norm()),
        _ => None,
    };
    let cal = calibrate(&cfg.lift).map_err(compute)?;
    let d: Derivation = derive_recursion(&g.map, z0, cal, &cfg.lift).map_err(compute)?;
    rep.section("recursion", vec![format!("alpha = {}", d.recursion.alpha), format!("beta = {}", d.recursion.beta)]);
    rep.section(
        "diagnostics",
        vec![
            format!("calibration: {cal}"),
            format!("basepoint: {}", format_point(Some(d.basepoint))),
            format!("preimages: {}, {}", format_point(Some(d.preimages[0])), format_point(Some(d.preimages[1]))),
            format!("max lift residual: {:.1e}", d.max_residual),
        ],
    );
    if let Some(off) = offset {
        rep.section("note", vec![format!("given fixed point is {off:.4} from the exact one")]);
    }
    if verify {
        let row = fx.recursions.iter().find(|r| {
            r.gmap == g.label
                && match (r.fixed, z0) {
                    (None, None) => true,
                    (Some(a), Some(b)) => (a - b).norm() <= tol,
                    _ => false,
                }
        });
        let line = match row {
            None => {
                rep.mismatch = true;
                "table: no row for this map and fixed point".to_string()
            }
            Some(r) if r.recursion == d.recursion => format!("table: match (row {})", r.index),
            Some(r) => {
                rep.mismatch = true;
                format!("table: mismatch with row {}: {}", r.index, r.recursion)
            }
        };
        rep.section("verify", vec![line]);
    }
    Ok(rep)
}

fn cmd_verify_tables(fx: &Fixtures, cfg: &Config, all: bool, tables: &[u8]) -> Result<Report, CliError> {
    let mut rep = Report::new("verify-tables");
    if all == !tables.is_empty() {
        return Err(CliError::Usage("give either --all or at least one --table".into()));
    }
    if let Some(t) = tables.iter().find(|t| !(1..=6).contains(*t)) {
        return Err(CliError::Usage(format!("no table {t} (tables are 1 to 6)")));
    }
    let checks = if all {
        let mut c = verify::all_checks(fx, cfg);
        c.push(verify::check_obstructed_table(fx, cfg));
        c
    } else {
        let mut seen = std::collections::BTreeSet::new();
        tables.iter().flat_map(|&t| verify::table_checks(fx, cfg, t)).filter(|c| seen.insert(c.id.clone())).collect()
    };
    rep.input("checks", checks.len());
    rep.checks(&checks);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> Outcome {
        run(std::iter::once("wreathkit").chain(args.iter().copied()))
    }

    #[test]
    fn unknown_row_is_usage_error() {
        let o = go(&["nucleus", "--row", "unknown"]);
        assert_eq!(o.code, EXIT_USAGE);
        assert!(o.stderr.contains("unknown row"));
    }

    #[test]
    fn malformed_word_is_usage_error() {
        let o = go(&["twist", "--row", "1", "--word", "bxb"]);
        assert_eq!(o.code, EXIT_USAGE);
        assert!(o.stderr.contains("malformed word"));
    }

    #[test]
    fn bad_subcommand_is_usage_error() {
        assert_eq!(go(&["frobnicate"]).code, EXIT_USAGE);
    }

    #[test]
    fn twist_bbb_lands_on_alpha() {
        let o = go(&["twist", "--row", "q4-1m2z-sq", "--word", "bbb"]);
        assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
        assert!(o.stdout.contains("bbb -> aaa -> a\n"), "{}", o.stdout);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = go(&["--json", "fga", "--row", "13"]);
        let b = go(&["--json", "fga", "--row", "13"]);
        assert_eq!(a.code, EXIT_OK);
        assert_eq!(a.stdout, b.stdout);
        let v: Value = serde_json::from_str(&a.stdout).unwrap();
        assert_eq!(v["status"], "ok");
    }
}
