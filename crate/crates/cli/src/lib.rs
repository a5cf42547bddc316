//! Command-line front end for `occupancy-core`.
//!
//! [`run`] parses arguments, dispatches to the engines and returns the
//! process exit code: 0 on success, 2 for invalid arguments, 3 for a
//! numeric failure and 4 when a resource limit refuses the request.

pub mod args;
pub mod render;
pub mod verify;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use occupancy_core::montecarlo::estimate_cdf;
use occupancy_core::{
    build_table, cdf_rational, cdf_scaled, cdf_weighted, p_value, Method, OccupancyError,
    OccupancyProblem, PValueTable, TableRow, WeightVector,
};

use crate::args::{CellArgs, Cli, Command, FormatArg, MethodArg, OutputArgs, PointArgs};
use crate::render::{Format, JsonRow, OutputFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Engine(OccupancyError),
    Io(std::io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Engine(e) => match e {
                OccupancyError::InvalidProblem(_) | OccupancyError::InvalidWeights(_) => EXIT_USAGE,
                OccupancyError::Overflow(_) | OccupancyError::NumericInstability { .. } => {
                    EXIT_NUMERIC
                }
                OccupancyError::ResourceLimit { .. } => EXIT_RESOURCE,
            },
            Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(s) => f.write_str(s),
            Failure::Engine(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "write failed: {e}"),
        }
    }
}

impl From<OccupancyError> for Failure {
    fn from(e: OccupancyError) -> Self {
        Failure::Engine(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

/// Runs the program on `argv` (including the program name) with the
/// process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let text = e.to_string();
                    let line = text.lines().next().unwrap_or("invalid arguments");
                    let _ = writeln!(err, "{line}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {failure}");
            failure.exit_code()
        }
    }
}

fn output_format(args: &OutputArgs) -> OutputFormat {
    let kind = match args.format {
        FormatArg::Plain => Format::Plain,
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    OutputFormat::new(kind, usize::from(args.decimals)).expect("clap bounds decimals")
}

enum Cells {
    Equal(u64),
    Weighted(WeightVector),
}

impl Cells {
    fn count(&self) -> u64 {
        match self {
            Cells::Equal(n) => *n,
            Cells::Weighted(w) => w.len() as u64,
        }
    }
}

fn resolve_cells(args: &CellArgs, err: &mut dyn Write) -> Outcome<Cells> {
    if let Some(path) = &args.weights {
        let weights = WeightVector::from_file(path)?;
        if let Some(n) = args.cells {
            if n != weights.len() as u64 {
                return Err(Failure::Usage(format!(
                    "--cells {n} disagrees with the {} weights in {}",
                    weights.len(),
                    path.display()
                )));
            }
        }
        return Ok(Cells::Weighted(weights));
    }
    if let (Some(population), Some(community)) = (args.population, args.community) {
        if community == 0 {
            return Err(Failure::Usage("--community must be positive".into()));
        }
        // round half up in integers
        let n = (2 * u128::from(population) + u128::from(community)) / (2 * u128::from(community));
        let n = u64::try_from(n).expect("quotient fits");
        if n == 0 {
            return Err(Failure::Usage(format!(
                "population {population} is smaller than half a community of {community}"
            )));
        }
        if u128::from(population) == u128::from(n) * u128::from(community) {
            writeln!(err, "note: n = {population}/{community} = {n} exactly")?;
        } else {
            writeln!(
                err,
                "note: n = {population}/{community} = {:.4} rounded to {n}",
                population as f64 / community as f64
            )?;
        }
        return Ok(Cells::Equal(n));
    }
    match args.cells {
        Some(n) => Ok(Cells::Equal(n)),
        None => Err(Failure::Usage(
            "give the cell count with -n, --population/--community or --weights".into(),
        )),
    }
}

fn engine(method: Option<MethodArg>, cells: &Cells) -> Outcome<Method> {
    match (cells, method) {
        (Cells::Weighted(_), None) => Ok(Method::Weighted),
        (Cells::Weighted(_), Some(m)) => Err(Failure::Usage(format!(
            "--method {} does not apply to weighted cells",
            if m == MethodArg::Scaled {
                "scaled"
            } else {
                "rational"
            }
        ))),
        (Cells::Equal(_), None | Some(MethodArg::Scaled)) => Ok(Method::Scaled),
        (Cells::Equal(_), Some(MethodArg::Rational)) => Ok(Method::Rational),
    }
}

fn cdf_value(balls: u64, cells: &Cells, m: u64, method: Method) -> Outcome<f64> {
    Ok(match cells {
        Cells::Weighted(w) => cdf_weighted(balls, w, m)?.value,
        Cells::Equal(n) => {
            let problem = OccupancyProblem::new(balls, *n, m)?;
            if method == Method::Rational {
                cdf_rational(&problem)?.to_f64()
            } else {
                cdf_scaled(&problem)?.value
            }
        }
    })
}

fn p_value_of(balls: u64, cells: &Cells, m: u64, method: Method) -> Outcome<f64> {
    if let (Cells::Equal(n), Method::Scaled) = (cells, method) {
        return Ok(p_value(balls, *n, m)?.value);
    }
    if m == 0 {
        OccupancyProblem::new(balls, cells.count().max(1), 0)?;
        return Ok(1.0);
    }
    Ok(1.0 - cdf_value(balls, cells, m - 1, method)?)
}

fn point(args: PointArgs, want_cdf: bool, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let cells = resolve_cells(&args.cells, err)?;
    let method = engine(args.method, &cells)?;
    let row = if want_cdf {
        JsonRow {
            m: args.max,
            cdf: Some(cdf_value(args.balls, &cells, args.max, method)?),
            monte_carlo: None,
            p_value: None,
        }
    } else {
        JsonRow {
            m: args.max,
            cdf: None,
            monte_carlo: None,
            p_value: Some(p_value_of(args.balls, &cells, args.max, method)?),
        }
    };
    let text = render::render_single(
        args.balls,
        cells.count(),
        method.as_str(),
        row,
        output_format(&args.output),
    );
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn table(
    balls: u64,
    cells: &Cells,
    m_min: u64,
    m_max: u64,
    method: Method,
) -> Outcome<PValueTable> {
    if m_min > m_max {
        OccupancyProblem::new(balls, cells.count().max(1), 0)?;
        return Ok(PValueTable {
            balls,
            cells: cells.count(),
            method,
            rows: Vec::new(),
        });
    }
    match cells {
        Cells::Equal(n) => Ok(build_table(balls, *n, m_min, m_max, method)?),
        Cells::Weighted(w) => {
            let mut below = if m_min == 0 {
                0.0
            } else {
                cdf_weighted(balls, w, m_min - 1)?.value
            };
            let mut rows = Vec::new();
            for m in m_min..=m_max {
                let cdf = cdf_weighted(balls, w, m)?.value;
                rows.push(TableRow {
                    m,
                    cdf,
                    p_value: 1.0 - below,
                });
                below = cdf;
            }
            Ok(PValueTable {
                balls,
                cells: cells.count(),
                method,
                rows,
            })
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome<i32> {
    match command {
        Command::Cdf(args) => point(args, true, out, err)?,
        Command::Pvalue(args) => point(args, false, out, err)?,
        Command::Table(args) => {
            let cells = resolve_cells(&args.cells, err)?;
            let method = engine(args.method, &cells)?;
            let t = table(args.balls, &cells, args.m_min, args.m_max, method)?;
            out.write_all(render::render_table(&t, output_format(&args.output)).as_bytes())?;
        }
        Command::Simulate(args) => {
            let cells = match resolve_cells(&args.cells, err)? {
                Cells::Equal(n) => n,
                Cells::Weighted(_) => {
                    return Err(Failure::Usage(
                        "simulate draws equally likely cells only".into(),
                    ))
                }
            };
            if args.m_min > args.m_max {
                return Err(Failure::Usage(format!(
                    "empty threshold range {}..={}",
                    args.m_min, args.m_max
                )));
            }
            let estimate = estimate_cdf(
                args.balls, cells, args.m_min, args.m_max, args.reps, args.seed, args.ci,
            )?;
            let exact = build_table(args.balls, cells, args.m_min, args.m_max, Method::Scaled)?;
            let text = render::render_simulation(&estimate, &exact, output_format(&args.output));
            out.write_all(text.as_bytes())?;
        }
        Command::Verify => {
            let checks = verify::all_checks()?;
            out.write_all(verify::render(&checks).as_bytes())?;
            if !checks.iter().all(verify::Check::passed) {
                return Ok(EXIT_NUMERIC);
            }
        }
    }
    Ok(EXIT_OK)
}
