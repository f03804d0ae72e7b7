//! Command-line front end.
//!
//! Subcommands: `validate`, `condition-e`, `moments`, `values`, `cascade`,
//! `example`. Exit codes: 0 on success, 1 on domain errors (missing
//! eigenvalue, degenerate normalization, ...), 2 on usage and file errors.
//! All numeric output is deterministic: 17 significant digits, fixed
//! formatting, fixed row order.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::cascade::{self, CascadeError, CascadeState};
use crate::mask::{self, MaskError, TwoDirectionSystem};
use crate::moments::{self, MomentError, MomentTable};
use crate::pointvals::{self, PointValueError, PointValueTable, SpectralReport};
use crate::{derivs, fixtures};

/// Grid-size guard: levels beyond this are refused.
pub const MAX_LEVEL: u32 = 14;

const EXIT_DOMAIN: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "twodir",
    version,
    about = "Point values and moments of two-direction multiscaling functions and multiwavelets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a mask file and print its shape
    Validate {
        /// Mask file path or builtin id (5.1, 5.2)
        input: String,
    },
    /// Report Condition E for the scaling mask
    ConditionE { input: String },
    /// Print discrete and continuous moments as JSON
    Moments {
        input: String,
        /// Highest moment order
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Point values of the scaling function, wavelets, or derivatives (CSV/JSON)
    Values {
        input: String,
        /// Dyadic refinement level of the output grid
        #[arg(long, default_value_t = 0)]
        levels: u32,
        /// Derivative order n (point values of D^n)
        #[arg(long)]
        derivative: Option<u32>,
        /// Function selector: phi or psi:s
        #[arg(long, default_value = "phi")]
        function: String,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format: csv or json
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Approximate point values by cascade iteration (CSV)
    Cascade {
        input: String,
        #[arg(long, default_value_t = 5)]
        levels: u32,
        /// Iteration cap
        #[arg(long, default_value_t = 60)]
        iterations: u32,
        /// Sup-norm stopping tolerance
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a builtin example mask file
    Example {
        /// Builtin id: 5.1 or 5.2
        id: String,
        /// Destination path
        #[arg(long)]
        emit: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Mask(#[from] MaskError),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write `{path}`: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => EXIT_DOMAIN,
            _ => EXIT_USAGE,
        }
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<PointValueError> for CliError {
    fn from(e: PointValueError) -> Self {
        match e {
            PointValueError::WaveletIndexOutOfRange { s, max } => CliError::Usage(format!(
                "function selector psi:{s} is out of range, the mask has {max} wavelet(s)"
            )),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<CascadeError> for CliError {
    fn from(e: CascadeError) -> Self {
        match e {
            CascadeError::Moments(m) => CliError::Domain(m.to_string()),
            usage => CliError::Usage(usage.to_string()),
        }
    }
}

/// Run the CLI on an argument vector; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.exit_code() == 0 { 0 } else { EXIT_USAGE };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { input } => cmd_validate(&input),
        Command::ConditionE { input } => cmd_condition_e(&input),
        Command::Moments { input, order } => cmd_moments(&input, order),
        Command::Values {
            input,
            levels,
            derivative,
            function,
            out,
            format,
        } => cmd_values(
            &input,
            levels,
            derivative,
            &function,
            out.as_deref(),
            &format,
        ),
        Command::Cascade {
            input,
            levels,
            iterations,
            tol,
            out,
        } => cmd_cascade(&input, levels, iterations, tol, out.as_deref()),
        Command::Example { id, emit } => cmd_example(&id, &emit),
    }
}

fn load_input(input: &str) -> Result<TwoDirectionSystem, CliError> {
    if Path::new(input).exists() {
        return Ok(mask::load_system(input)?);
    }
    if let Some(text) = fixtures::builtin(input) {
        return Ok(mask::parse_system(text)?);
    }
    Err(CliError::Usage(format!(
        "`{input}` is neither a mask file nor a builtin id ({})",
        fixtures::builtin_ids().join(", ")
    )))
}

fn warn_if_condition_e_fails(sys: &TwoDirectionSystem) {
    let report = mask::condition_e(sys);
    if !report.satisfied {
        eprintln!(
            "warning: Condition E is not satisfied for `{}`; results may be meaningless",
            sys.name()
        );
    }
}

// ---------------------------------------------------------------------------
// Deterministic formatting
// ---------------------------------------------------------------------------

/// 17 significant digits; negative zero collapses to zero.
fn fmt(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn fmt_list(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt).collect::<Vec<_>>().join(", ")
}

fn table_csv(table: &PointValueTable) -> String {
    let mut out = String::from("x");
    for j in 1..=table.multiplicity() {
        out.push_str(&format!(",f_{j}"));
    }
    out.push('\n');
    for (x, v) in table.iter() {
        out.push_str(&fmt(x));
        for value in v.iter() {
            out.push(',');
            out.push_str(&fmt(*value));
        }
        out.push('\n');
    }
    out
}

fn cascade_csv(state: &CascadeState) -> String {
    let mut out = String::from("x");
    for j in 1..=state.value(0).len() {
        out.push_str(&format!(",f_{j}"));
    }
    out.push('\n');
    for i in 0..state.len() {
        out.push_str(&fmt(state.x(i)));
        for value in state.value(i).iter() {
            out.push(',');
            out.push_str(&fmt(*value));
        }
        out.push('\n');
    }
    out
}

fn table_json(table: &PointValueTable, report: &SpectralReport) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"kind\": \"{}\",\n", table.kind().label()));
    out.push_str(&format!("  \"level\": {},\n", table.level()));
    out.push_str(&format!(
        "  \"grid\": [{}],\n",
        fmt_list(table.iter().map(|(x, _)| x))
    ));
    out.push_str("  \"values\": [\n");
    let rows: Vec<String> = table
        .iter()
        .map(|(_, v)| format!("    [{}]", fmt_list(v.iter().copied())))
        .collect();
    out.push_str(&rows.join(",\n"));
    out.push_str("\n  ],\n");
    let spectrum: Vec<String> = report
        .eigenvalues
        .iter()
        .map(|z| format!("    {{\"re\": {}, \"im\": {}}}", fmt(z.re), fmt(z.im)))
        .collect();
    out.push_str("  \"spectrum\": [\n");
    out.push_str(&spectrum.join(",\n"));
    out.push_str("\n  ],\n");
    out.push_str(&format!(
        "  \"normalizing_constant\": {}\n",
        fmt(report.normalizing_constant)
    ));
    out.push_str("}\n");
    out
}

fn moments_json(sys: &TwoDirectionSystem, table: &MomentTable) -> String {
    let matrix_json = |m: &crate::Matrix| {
        let rows: Vec<String> = (0..m.nrows())
            .map(|i| format!("[{}]", fmt_list((0..m.ncols()).map(|j| m[(i, j)]))))
            .collect();
        format!("[{}]", rows.join(", "))
    };
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"name\": {},\n", json_string(sys.name())));
    out.push_str(&format!("  \"dilation\": {},\n", sys.dilation()));
    out.push_str(&format!("  \"multiplicity\": {},\n", sys.multiplicity()));
    out.push_str(&format!("  \"order\": {},\n", table.order()));
    let m_rows: Vec<String> = (0..=table.order())
        .map(|j| format!("    [{}]", fmt_list(table.m(j).iter().copied())))
        .collect();
    out.push_str("  \"m\": [\n");
    out.push_str(&m_rows.join(",\n"));
    out.push_str("\n  ],\n");
    let plus: Vec<String> = (0..=table.order())
        .map(|j| format!("    {}", matrix_json(table.m_plus(j))))
        .collect();
    out.push_str("  \"m_plus\": [\n");
    out.push_str(&plus.join(",\n"));
    out.push_str("\n  ],\n");
    let minus: Vec<String> = (0..=table.order())
        .map(|j| format!("    {}", matrix_json(table.m_minus(j))))
        .collect();
    out.push_str("  \"m_minus\": [\n");
    out.push_str(&minus.join(",\n"));
    out.push_str("\n  ]\n");
    out.push_str("}\n");
    out
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_validate(input: &str) -> Result<(), CliError> {
    let sys = load_input(input)?;
    let hull = mask::support_hull(&sys);
    println!("name: {}", sys.name());
    println!("dilation: {}", sys.dilation());
    println!("multiplicity: {}", sys.multiplicity());
    let support = |seq: &mask::CoeffSeq| match seq.support() {
        Some((lo, hi)) => format!("[{lo}, {hi}]"),
        None => "empty".into(),
    };
    println!("phi plus support: {}", support(sys.phi_plus()));
    println!("phi minus support: {}", support(sys.phi_minus()));
    println!("wavelet masks: {}", sys.wavelets().len());
    println!("support hull: [{}, {}]", hull.a, hull.b);
    if !hull.converged {
        println!(
            "warning: support interval iteration did not converge; hull is the fallback bound"
        );
    }
    println!("ok");
    Ok(())
}

fn cmd_condition_e(input: &str) -> Result<(), CliError> {
    let sys = load_input(input)?;
    let report = mask::condition_e(&sys);
    println!("satisfied: {}", report.satisfied);
    println!("gap: {}", fmt(report.gap));
    println!("eigenvalues:");
    for z in &report.eigenvalues {
        println!("{} {}", fmt(z.re), fmt(z.im));
    }
    Ok(())
}

fn cmd_moments(input: &str, order: usize) -> Result<(), CliError> {
    let sys = load_input(input)?;
    warn_if_condition_e_fails(&sys);
    let table = moments::continuous_moments(&sys, order)?;
    print!("{}", moments_json(&sys, &table));
    Ok(())
}

fn parse_function(selector: &str) -> Result<Option<usize>, CliError> {
    if selector == "phi" {
        return Ok(None);
    }
    if let Some(rest) = selector.strip_prefix("psi:") {
        if let Ok(s) = rest.parse::<usize>() {
            if s >= 1 {
                return Ok(Some(s));
            }
        }
    }
    Err(CliError::Usage(format!(
        "invalid function selector `{selector}` (expected phi or psi:s with s >= 1)"
    )))
}

fn check_level(levels: u32) -> Result<(), CliError> {
    if levels > MAX_LEVEL {
        return Err(CliError::Usage(format!(
            "level {levels} exceeds the grid-size guard {MAX_LEVEL}"
        )));
    }
    Ok(())
}

fn cmd_values(
    input: &str,
    levels: u32,
    derivative: Option<u32>,
    function: &str,
    out: Option<&Path>,
    format: &str,
) -> Result<(), CliError> {
    check_level(levels)?;
    let wavelet = parse_function(function)?;
    if !matches!(format, "csv" | "json") {
        return Err(CliError::Usage(format!(
            "invalid format `{format}` (expected csv or json)"
        )));
    }
    let sys = load_input(input)?;
    if let Some(s) = wavelet {
        let max = (sys.dilation() - 1) as usize;
        if s > max {
            return Err(CliError::Usage(format!(
                "function selector psi:{s} is out of range for dilation {} (s <= {max})",
                sys.dilation()
            )));
        }
    }
    warn_if_condition_e_fails(&sys);

    let n = derivative.unwrap_or(0);
    let (table, report) = if n == 0 {
        let (phi, report) = pointvals::values_at_level(&sys, levels)?;
        match wavelet {
            None => (phi, report),
            Some(s) => (pointvals::wavelet_values(&sys, s, &phi)?, report),
        }
    } else {
        let request = derivs::DerivativeRequest {
            order: n,
            wavelet,
            level: levels,
        };
        request.evaluate(&sys)?
    };

    let text = match format {
        "csv" => table_csv(&table),
        _ => table_json(&table, &report),
    };
    emit(&text, out)
}

fn cmd_cascade(
    input: &str,
    levels: u32,
    iterations: u32,
    tol: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    check_level(levels)?;
    let sys = load_input(input)?;
    warn_if_condition_e_fails(&sys);
    let state = cascade::cascade_run(&sys, levels, iterations, tol)?;
    let stats = format!(
        "iterations: {}\nfinal delta: {}\nconverged: {}\n",
        state.iteration(),
        fmt(state.delta()),
        state.converged()
    );
    let csv = cascade_csv(&state);
    match out {
        Some(_) => {
            emit(&csv, out)?;
            print!("{stats}");
        }
        None => {
            emit(&csv, None)?;
            eprint!("{stats}");
        }
    }
    Ok(())
}

fn cmd_example(id: &str, emit_path: &Path) -> Result<(), CliError> {
    let text = fixtures::builtin(id).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown example id `{id}` (available: {})",
            fixtures::builtin_ids().join(", ")
        ))
    })?;
    std::fs::write(emit_path, text).map_err(|source| CliError::Output {
        path: emit_path.display().to_string(),
        source,
    })
}
