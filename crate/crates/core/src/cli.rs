//! Command-line front end. [`run`] parses arguments and returns the exit code:
//! 0 for success or an affirmative verdict, 1 for a negative verdict, 2 for
//! usage and validation errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lens::{canonical_key, IsometryMode, OrientationMode, SpinLabel, SpinLensSpace};
use crate::oracle::oracle_compare;
use crate::search::{
    export_csv, family_thm51, family_thm52, family_thm53, run_census, run_census_range, save_results,
    verify_family, Execution, FORMAT_VERSION,
};
use crate::spectrum::{fingerprint, spectrum_table, MultiplicityRow};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "DIRAC_LENS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "dirac-lens", version, about = "Exact Dirac spectra of spin lens spaces")]
struct Cli {
    /// Worker threads for census runs (0 = rayon default).
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Run censuses on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print mult(-lambda_k) and mult(+lambda_k) for k = 0..=k_max.
    Spectrum {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(short = 'k', long = "k-max", default_value_t = 10)]
        k_max: u64,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Decide Dirac isospectrality of two spaces given as Q:S1,...,SM[:SPIN].
    Isospec {
        a: String,
        b: String,
        /// Also accept spectra that agree after reversing orientation.
        #[arg(long)]
        unoriented: bool,
    },
    /// Search for isospectral families in dimension n over a range of q.
    Search {
        #[arg(short = 'n', long)]
        dimension: u64,
        #[arg(long, default_value_t = 1)]
        q_min: u64,
        #[arg(long)]
        q_max: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Unoriented)]
        mode: ModeArg,
        /// Structured result file (JSON).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Family listing as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// List and optionally verify one of the explicit families.
    Family {
        #[arg(value_enum)]
        family: FamilyKind,
        #[arg(short = 'r')]
        r: Option<u64>,
        #[arg(short = 't')]
        t: Option<u64>,
        #[arg(long)]
        verify: bool,
        /// Allow t >= 2 for the third family.
        #[arg(long)]
        experimental: bool,
    },
    /// Compare exact multiplicities with the generating function series.
    Oracle {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(short = 'k', long = "k-max", default_value_t = 40)]
        k_max: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
struct SpaceArgs {
    #[arg(short = 'q')]
    q: u64,
    /// Comma-separated parameters.
    #[arg(short = 's', value_delimiter = ',', allow_hyphen_values = true, required = true)]
    s: Vec<i64>,
    /// unique, h0 or h1; required for even q.
    #[arg(long)]
    spin: Option<String>,
}

impl SpaceArgs {
    fn space(&self) -> Result<SpinLensSpace> {
        let spin = self.spin.as_deref().map(str::parse).transpose()?;
        SpinLensSpace::from_parts(self.q, &self.s, spin)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Plain,
    Csv,
    Structured,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Oriented,
    Unoriented,
}

impl From<ModeArg> for OrientationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Oriented => OrientationMode::Oriented,
            ModeArg::Unoriented => OrientationMode::Unoriented,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyKind {
    #[value(name = "51")]
    T51,
    #[value(name = "52")]
    T52,
    #[value(name = "53")]
    T53,
}

/// Parses a space written as `Q:S1,...,SM` or `Q:S1,...,SM:SPIN`.
pub fn parse_space(text: &str) -> Result<SpinLensSpace> {
    let bad = || Error::InvalidArgument(format!("expected Q:S1,...,SM[:SPIN], got '{text}'"));
    let mut parts = text.split(':');
    let q = parts.next().ok_or_else(bad)?.trim().parse::<u64>().map_err(|_| bad())?;
    let s = parts
        .next()
        .ok_or_else(bad)?
        .split(',')
        .map(|v| v.trim().parse::<i64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    let spin = parts.next().map(str::parse::<SpinLabel>).transpose()?;
    if parts.next().is_some() {
        return Err(bad());
    }
    SpinLensSpace::from_parts(q, &s, spin)
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    configure_threads(cli.threads);
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match dispatch(cli.command, exec, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // A second call in the same process keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: Option<usize>) {}

fn dispatch(cmd: Command, exec: Execution, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Spectrum { space, k_max, format } => cmd_spectrum(&space.space()?, k_max, format, out),
        Command::Isospec { a, b, unoriented } => cmd_isospec(&parse_space(&a)?, &parse_space(&b)?, unoriented, out),
        Command::Search {
            dimension,
            q_min,
            q_max,
            mode,
            out: path,
            csv,
        } => cmd_search(dimension, q_min, q_max, mode.into(), path, csv, exec, out, err),
        Command::Family {
            family,
            r,
            t,
            verify,
            experimental,
        } => cmd_family(family, r, t, verify, experimental, out),
        Command::Oracle { space, k_max, tol } => cmd_oracle(&space.space()?, k_max, tol, out),
    }
}

#[derive(Serialize)]
struct SpectrumDoc<'a> {
    format_version: u32,
    space: String,
    q: u64,
    s: &'a [i64],
    spin: SpinLabel,
    rows: &'a [MultiplicityRow],
}

fn cmd_spectrum(x: &SpinLensSpace, k_max: u64, format: Format, out: &mut dyn Write) -> Result<i32> {
    let table = spectrum_table(x, k_max)?;
    match format {
        Format::Plain => {
            writeln!(out, "# {x}")?;
            writeln!(out, "{:>6} {:>8} {:>20} {:>20}", "k", "2lambda", "mult(-)", "mult(+)")?;
            for row in &table.rows {
                writeln!(out, "{:>6} {:>8} {:>20} {:>20}", row.k, row.value2, row.minus.to_string(), row.plus.to_string())?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["k", "two_lambda", "mult_minus", "mult_plus"])
                .map_err(csv_error)?;
            for row in &table.rows {
                w.write_record([
                    row.k.to_string(),
                    row.value2.to_string(),
                    row.minus.to_string(),
                    row.plus.to_string(),
                ])
                .map_err(csv_error)?;
            }
            w.flush()?;
        }
        Format::Structured => {
            let doc = SpectrumDoc {
                format_version: FORMAT_VERSION,
                space: x.to_string(),
                q: x.q(),
                s: x.s(),
                spin: x.spin(),
                rows: &table.rows,
            };
            serde_json::to_writer_pretty(&mut *out, &doc).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            writeln!(out)?;
        }
    }
    Ok(0)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn cmd_isospec(a: &SpinLensSpace, b: &SpinLensSpace, unoriented: bool, out: &mut dyn Write) -> Result<i32> {
    if a.m() != b.m() || a.q() != b.q() {
        writeln!(out, "not isospectral")?;
        writeln!(
            out,
            "note: spaces differ in q or m ({} vs {}); not compared",
            a, b
        )?;
        return Ok(1);
    }
    let fa = fingerprint(a)?;
    let fb = fingerprint(b)?;
    if fa == fb {
        writeln!(out, "isospectral")?;
        return Ok(0);
    }
    if fa.swapped() == fb {
        if unoriented {
            writeln!(out, "isospectral")?;
            writeln!(out, "note: inverse-isospectral (spectra agree after reversing orientation)")?;
            return Ok(0);
        }
        writeln!(out, "not isospectral")?;
        writeln!(out, "note: inverse-isospectral; pass --unoriented to accept")?;
        return Ok(1);
    }
    writeln!(out, "not isospectral")?;
    Ok(1)
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    n: u64,
    q_min: u64,
    q_max: u64,
    mode: OrientationMode,
    path: Option<PathBuf>,
    csv_path: Option<PathBuf>,
    exec: Execution,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    if q_min > q_max {
        return Err(Error::InvalidArgument(format!("q-min {q_min} exceeds q-max {q_max}")));
    }
    let (results, skipped) = run_census_range(n, q_min, q_max, mode, exec)?;
    if !skipped.is_empty() {
        writeln!(err, "skipped {} orders without a spin structure", skipped.len())?;
    }
    let mut found = 0;
    for r in &results {
        for f in r.nontrivial_families() {
            found += 1;
            let members: Vec<String> = f.members.iter().map(|x| x.to_string()).collect();
            writeln!(out, "n={} q={}: {}", r.dimension, r.q, members.join(" ~ "))?;
        }
    }
    if found == 0 {
        writeln!(out, "no families found")?;
    } else {
        writeln!(out, "{found} families found")?;
    }
    if let Some(p) = path {
        save_results(&results, &p)?;
    }
    if let Some(p) = csv_path {
        let file = BufWriter::new(File::create(&p)?);
        export_csv(&results, file)?;
    }
    Ok(0)
}

fn cmd_family(
    family: FamilyKind,
    r: Option<u64>,
    t: Option<u64>,
    verify: bool,
    experimental: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let need = |v: Option<u64>, name: &str| v.ok_or_else(|| Error::InvalidArgument(format!("-{name} is required")));
    let (families, iso_mode): (Vec<Vec<SpinLensSpace>>, IsometryMode) = match family {
        FamilyKind::T51 => (vec![family_thm51(need(r, "r")?)?], IsometryMode::Any),
        FamilyKind::T52 => (vec![family_thm52(need(t, "t")?)?.to_vec()], IsometryMode::Any),
        FamilyKind::T53 => (
            family_thm53(need(r, "r")?, t.unwrap_or(1), experimental)?
                .into_iter()
                .map(|p| p.to_vec())
                .collect(),
            IsometryMode::Any,
        ),
    };
    let mut ok = true;
    for members in &families {
        let m = members[0].m();
        writeln!(out, "dimension {}, q = {}", 2 * m - 1, members[0].q())?;
        for x in members {
            writeln!(out, "  {x}  [canonical {}]", canonical_key(x, OrientationMode::Unoriented))?;
        }
        if verify {
            match verify_family(members, true, iso_mode) {
                Ok(report) => write!(out, "{report}")?,
                Err(Error::VerificationFailed(msg)) => {
                    writeln!(out, "FAIL {msg}")?;
                    ok = false;
                }
                Err(e) => return Err(e),
            }
            if matches!(family, FamilyKind::T53) {
                note_census_match(members, out)?;
            }
        }
    }
    if verify {
        writeln!(out, "{}", if ok { "verification passed" } else { "verification failed" })?;
    }
    Ok(if ok { 0 } else { 1 })
}

/// For small q, reports whether the pair appears in the dimension census.
fn note_census_match(members: &[SpinLensSpace], out: &mut dyn Write) -> Result<()> {
    let (q, m) = (members[0].q(), members[0].m() as u64);
    if q > 100 {
        return Ok(());
    }
    let census = run_census(2 * m - 1, q, OrientationMode::Unoriented)?;
    let keys: Vec<_> = members
        .iter()
        .map(|x| canonical_key(x, OrientationMode::Unoriented))
        .collect();
    let hit = census.families.iter().any(|f| {
        keys.iter().all(|k| {
            f.members
                .iter()
                .any(|y| canonical_key(y, OrientationMode::Unoriented) == *k)
        })
    });
    if hit {
        writeln!(out, "note: canonical forms match a census family at n = {}, q = {q}", 2 * m - 1)?;
    } else {
        writeln!(out, "note: no census family at n = {}, q = {q} contains this pair", 2 * m - 1)?;
    }
    Ok(())
}

fn cmd_oracle(x: &SpinLensSpace, k_max: usize, tol: f64, out: &mut dyn Write) -> Result<i32> {
    let report = oracle_compare(x, k_max, tol)?;
    writeln!(out, "{x}, k <= {k_max}, tol = {tol:e}")?;
    writeln!(out, "max |delta| = {:e}", report.max_delta)?;
    writeln!(out, "max |imag|  = {:e}", report.max_imag)?;
    writeln!(out, "max snap    = {:e}", report.max_snap)?;
    writeln!(out, "assignment  = {:?}", report.assignment)?;
    if report.unexpected_assignment() {
        writeln!(out, "warning: matched only with the swapped sign assignment")?;
    }
    if report.passed {
        writeln!(out, "pass")?;
        Ok(0)
    } else {
        writeln!(
            out,
            "fail: deviation exceeds tolerance (double-precision rounding of the series limits attainable accuracy)"
        )?;
        Ok(1)
    }
}
