//! Command line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::cf_core::{self, PartitionSpec, Word};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Rule};
use crate::holder::{self, HolderFunction};
use crate::parallel;
use crate::scan::{self, Which};
use crate::special::hurwitz_zeta_with_error;
use crate::three_term::{self, Evaluable, PeriodicFunction, ThreeTermSolution};
use crate::transfer::{self, BetaParam, DEFAULT_TOL};

/// Exit code for malformed command lines.
pub const EXIT_USAGE: i32 = 64;
/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "GAUSS_SPECTRAL_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleArg {
    Chebyshev,
    Linear,
}

impl From<RuleArg> for Rule {
    fn from(r: RuleArg) -> Rule {
        match r {
            RuleArg::Chebyshev => Rule::ChebyshevBarycentric,
            RuleArg::Linear => Rule::PiecewiseLinear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WhichArg {
    Minus,
    Plus,
}

impl From<WhichArg> for Which {
    fn from(w: WhichArg) -> Which {
        match w {
            WhichArg::Minus => Which::Minus,
            WhichArg::Plus => Which::Plus,
        }
    }
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected re,im, got {s:?}")),
    }
}

/// Evaluation points given as `a:b:n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PointGrid(pub Vec<f64>);

/// `a:b:n`, n evenly spaced points from a to b.
fn parse_range(s: &str) -> std::result::Result<PointGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected a:b:n, got {s:?}"));
    }
    let a: f64 = parts[0].parse().map_err(|e| format!("{e}"))?;
    let b: f64 = parts[1].parse().map_err(|e| format!("{e}"))?;
    let n: usize = parts[2].parse().map_err(|e| format!("{e}"))?;
    if n < 2 || !(a < b) {
        return Err("range needs a < b and n >= 2".into());
    }
    Ok(PointGrid((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()))
}

fn parse_periodic(s: &str) -> std::result::Result<PeriodicFunction, String> {
    serde_json::from_str(s).map_err(|e| format!("periodic function JSON: {e}"))
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "gauss-spectral", version, about = "Transfer operators of the Gauss map")]
pub struct Cli {
    /// Collocation dimension.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Numerical tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized experiments.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Decimal places for scalar results in csv mode.
    #[arg(long, global = true, default_value_t = 10)]
    pub digits: usize,
    /// Run the built-in invariant checks and print a pass/fail table.
    #[arg(long)]
    pub self_test: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Hurwitz zeta ζ_H(s, z).
    Hurwitz {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        s: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
    },
    /// Apply L_β to a function read from an x,re,im CSV file.
    Apply {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        beta: Complex64,
        /// Continuation order; the smallest admissible one by default.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, value_enum, default_value_t = RuleArg::Chebyshev)]
        rule: RuleArg,
        /// Evaluation points; the input nodes by default.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        z: Option<Vec<f64>>,
    },
    /// Leading eigenvalues of the collocation matrix.
    Spectrum {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        beta: Complex64,
        #[arg(long, default_value_t = 6)]
        count: usize,
        /// Print the node values of this eigenfunction instead.
        #[arg(long)]
        eigenfunction: Option<usize>,
    },
    /// Fredholm determinants det(I ∓ M).
    Dets {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        beta: Complex64,
    },
    /// Leading eigenvalue λ₁(t).
    Lambda1 {
        #[arg(long)]
        t: f64,
    },
    /// Determinants along β = σ + ir.
    Scan {
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long, allow_hyphen_values = true)]
        r_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        r_max: f64,
        #[arg(long)]
        step: f64,
    },
    /// Newton refinement of a determinant zero.
    FindZero {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        beta: Complex64,
        #[arg(long, value_enum)]
        which: WhichArg,
        #[arg(long, default_value_t = scan::DEFAULT_BRACKET)]
        bracket: f64,
    },
    /// Lewis' three-term equation.
    ThreeTerm {
        #[command(subcommand)]
        action: ThreeTermCmd,
    },
    /// Partition interpolation P_{l,N} of a CSV function.
    Pln {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        cutoff: u32,
    },
    /// Monte-Carlo estimate of ‖L^l − L^l P_{l,N}‖.
    Defect {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        beta: Complex64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        cutoff: u32,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Random check of the chaining inequality.
    ChainTest {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct SeriesArgs {
    /// Periodic function as {"constant": c, "cos": [...], "sin": [...]}.
    #[arg(long, value_parser = parse_periodic)]
    pub q: PeriodicFunction,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: Complex64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub beta: Complex64,
    #[arg(long, default_value_t = 60)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub digit_cutoff: usize,
    /// Continuation order; the smallest admissible one by default.
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "action")]
pub enum ThreeTermCmd {
    /// Evaluate the series solution built from Q.
    Solve {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        z: Vec<f64>,
    },
    /// Residual of the series solution, or of the closed form with --closed-form.
    Residual {
        #[command(flatten)]
        series: SeriesArgs,
        /// Evaluation grid a:b:n.
        #[arg(long, value_parser = parse_range, default_value = "0:2:41")]
        grid: PointGrid,
        /// Use the closed-form example with λ = sign instead of the series.
        #[arg(long)]
        closed_form: bool,
    },
    /// Asymptotic coefficients C_n and C*_n.
    Coeffs {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
}

/// Output sink honoring --format and --out.
struct Sink {
    w: Box<dyn Write + Send>,
    format: Format,
    digits: usize,
}

impl Sink {
    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.w, "{s}").map_err(io_err)
    }

    fn scalar(&mut self, name: &str, v: f64) -> Result<()> {
        match self.format {
            Format::Csv => {
                let s = format!("{:.*}", self.digits, v);
                self.line(&s)
            }
            Format::Json => self.line(&json!({ name: v }).to_string()),
        }
    }

    fn complex(&mut self, name: &str, v: Complex64) -> Result<()> {
        match self.format {
            Format::Csv if v.im == 0.0 => self.scalar(name, v.re),
            Format::Csv => {
                let s = format!("{:.*},{:.*}", self.digits, v.re, self.digits, v.im);
                self.line(&s)
            }
            Format::Json => self.line(&json!({ name: [v.re, v.im] }).to_string()),
        }
    }

    /// Rows of numbers: CSV with a header, or a JSON array of objects.
    fn table(&mut self, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        match self.format {
            Format::Csv => {
                self.line(&header.join(","))?;
                for r in rows {
                    let s: Vec<String> = r.iter().map(|v| fmt_num(*v)).collect();
                    self.line(&s.join(","))?;
                }
                Ok(())
            }
            Format::Json => {
                let arr: Vec<serde_json::Value> = rows
                    .iter()
                    .map(|r| {
                        let m: serde_json::Map<String, serde_json::Value> = header
                            .iter()
                            .zip(r)
                            .map(|(h, v)| (h.to_string(), json_number(*v)))
                            .collect();
                        serde_json::Value::Object(m)
                    })
                    .collect();
                self.line(&serde_json::Value::Array(arr).to_string())
            }
        }
    }

    fn value<T: Serialize>(&mut self, v: &T) -> Result<()> {
        let s = serde_json::to_string(v).map_err(|e| Error::Input(e.to_string()))?;
        self.line(&s)
    }
}

/// Shortest decimal that round-trips, in exponent form for very small or large magnitudes.
fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn json_number(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

fn io_err(e: io::Error) -> Error {
    Error::Input(e.to_string())
}

fn read_grid(path: &PathBuf, rule: Rule) -> Result<GridFunction> {
    let f = File::open(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    GridFunction::read_csv(BufReader::new(f), rule)
}

fn beta_param(value: Complex64, order: Option<usize>) -> Result<BetaParam> {
    match order {
        Some(k) => BetaParam::new(value, k),
        None => BetaParam::auto(value),
    }
}

fn series_solution(a: &SeriesArgs) -> Result<ThreeTermSolution> {
    ThreeTermSolution::new(a.q.clone(), a.lambda, beta_param(a.beta, a.order)?, a.depth, a.digit_cutoff)
}

/// Parses `argv` (including the program name) and runs the command,
/// writing to stdout or `--out`. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        parallel::init_thread_cap(t);
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let w: Box<dyn Write + Send> = match &cli.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    };
    let mut sink = Sink {
        w,
        format: cli.format,
        digits: cli.digits,
    };
    if cli.format == Format::Json {
        let mut config = serde_json::to_value(cli).map_err(|e| Error::Input(e.to_string()))?;
        if let (Some(cmd), Some(obj)) = (&cli.command, config.as_object_mut()) {
            let (dim, tol) = resolved_defaults(cmd);
            if cli.dim.is_none() {
                obj.insert("dim".into(), dim.map_or(serde_json::Value::Null, |d| json!(d)));
            }
            if cli.tol.is_none() {
                obj.insert("tol".into(), tol.map_or(serde_json::Value::Null, json_number));
            }
        }
        sink.value(&json!({ "config": config }))?;
    }
    let code = if cli.self_test {
        if self_test(&mut sink)? {
            0
        } else {
            2
        }
    } else {
        match &cli.command {
            Some(cmd @ Command::Scan { .. }) => {
                dispatch(cli, cmd, &mut sink)?;
                0
            }
            Some(cmd) => {
                parallel::single_threaded(|| dispatch(cli, cmd, &mut sink))?;
                0
            }
            None => return Err(Error::Input("no subcommand given; see --help".into())),
        }
    };
    sink.w.flush().map_err(io_err)?;
    Ok(code)
}

/// Dimension and tolerance a command uses when the flags are absent.
fn resolved_defaults(cmd: &Command) -> (Option<usize>, Option<f64>) {
    match cmd {
        Command::Hurwitz { .. } => (None, Some(1e-17)),
        Command::Apply { .. } => (None, Some(DEFAULT_TOL)),
        Command::Spectrum { .. } => (Some(48), Some(DEFAULT_TOL)),
        Command::Dets { .. } | Command::Scan { .. } => (Some(64), None),
        Command::Lambda1 { .. } => (Some(transfer::LAMBDA1_DIM), Some(1e-12)),
        Command::FindZero { .. } => (Some(64), Some(1e-10)),
        Command::ThreeTerm { .. } => (Some(three_term::SERIES_DIM), None),
        Command::Pln { .. } | Command::Defect { .. } | Command::ChainTest { .. } => (None, None),
    }
}

fn dispatch(cli: &Cli, cmd: &Command, sink: &mut Sink) -> Result<()> {
    let tol = cli.tol;
    match cmd {
        Command::Hurwitz { s, z } => {
            let (v, _) = hurwitz_zeta_with_error(*s, *z, tol.unwrap_or(1e-17))?;
            sink.complex("value", v)
        }
        Command::Apply {
            input,
            beta,
            order,
            rule,
            z,
        } => {
            let f = read_grid(input, (*rule).into())?;
            let b = beta_param(*beta, *order)?;
            let prepared = transfer::PreparedTransfer::new(&b, &f, tol.unwrap_or(DEFAULT_TOL))?;
            let points = z.clone().unwrap_or_else(|| f.nodes().to_vec());
            let mut rows = Vec::with_capacity(points.len());
            for x in points {
                let v = prepared.eval(x)?;
                rows.push(vec![x, v.re, v.im]);
            }
            sink.table(&["z", "re", "im"], &rows)
        }
        Command::Spectrum {
            beta,
            count,
            eigenfunction,
        } => {
            let n = cli.dim.unwrap_or(48);
            let b = BetaParam::auto(*beta)?;
            let op = transfer::build_collocation(&b, n, None, tol.unwrap_or(DEFAULT_TOL))?;
            let want = eigenfunction.map_or(*count, |i| (*count).max(i + 1)).min(n);
            let sp = transfer::spectrum(&op, want)?;
            if let Some(i) = eigenfunction {
                let f = &sp.get(*i).ok_or_else(|| Error::domain("eigenfunction index out of range"))?.1;
                let rows: Vec<Vec<f64>> = f.nodes().iter().zip(f.values()).map(|(x, v)| vec![*x, v.re, v.im]).collect();
                return sink.table(&["x", "re", "im"], &rows);
            }
            let rows: Vec<Vec<f64>> = sp
                .iter()
                .enumerate()
                .map(|(i, (v, _))| vec![i as f64, v.re, v.im, v.norm()])
                .collect();
            sink.table(&["index", "re", "im", "modulus"], &rows)
        }
        Command::Dets { beta } => {
            let n = cli.dim.unwrap_or(64);
            let d = transfer::fredholm_dets(&BetaParam::auto(*beta)?, n)?;
            let z = d.det_minus * d.det_plus;
            let rows = vec![vec![
                d.det_minus.re,
                d.det_minus.im,
                d.det_plus.re,
                d.det_plus.im,
                z.re,
                z.im,
                n as f64,
                if d.stable { 1.0 } else { 0.0 },
            ]];
            sink.table(
                &["det_minus_re", "det_minus_im", "det_plus_re", "det_plus_im", "Z_re", "Z_im", "dim", "stable"],
                &rows,
            )
        }
        Command::Lambda1 { t } => {
            let n = cli.dim.unwrap_or(transfer::LAMBDA1_DIM);
            let v = transfer::lambda1_with_dim(*t, tol.unwrap_or(1e-12), n)?;
            sink.scalar("lambda1", v)
        }
        Command::Scan {
            sigma,
            r_min,
            r_max,
            step,
        } => {
            let n = cli.dim.unwrap_or(64);
            let entries = scan::scan_line(*sigma, *r_min, *r_max, *step, n)?;
            let nan = f64::NAN;
            let rows: Vec<Vec<f64>> = entries
                .iter()
                .map(|e| match &e.record {
                    Ok(r) => vec![
                        e.r,
                        r.det_minus.re,
                        r.det_minus.im,
                        r.det_plus.re,
                        r.det_plus.im,
                        r.selberg_z.re,
                        r.selberg_z.im,
                        r.dim_used as f64,
                    ],
                    Err(err) => {
                        log::warn!("r = {}: {err}", e.r);
                        vec![e.r, nan, nan, nan, nan, nan, nan, n as f64]
                    }
                })
                .collect();
            sink.table(
                &["r", "det_minus_re", "det_minus_im", "det_plus_re", "det_plus_im", "Z_re", "Z_im", "dim"],
                &rows,
            )
        }
        Command::FindZero { beta, which, bracket } => {
            let n = cli.dim.unwrap_or(64);
            let z = scan::find_zero_with_bracket(*beta, (*which).into(), tol.unwrap_or(1e-10), n, *bracket)?;
            sink.table(
                &["beta_re", "beta_im", "det_re", "det_im", "iterations", "dim"],
                &[vec![z.beta.re, z.beta.im, z.det.re, z.det.im, z.iterations as f64, n as f64]],
            )
        }
        Command::ThreeTerm { action } => three_term_cmd(cli, action, sink),
        Command::Pln {
            input,
            alpha,
            l,
            n,
            cutoff,
        } => {
            let f = HolderFunction::new(read_grid(input, Rule::PiecewiseLinear)?, *alpha)?;
            let p = holder::pln_apply(&f, &PartitionSpec::new(*l, *n, *cutoff)?)?;
            let g = p.function();
            let rows: Vec<Vec<f64>> = g.nodes().iter().zip(g.values()).map(|(x, v)| vec![*x, v.re, v.im]).collect();
            sink.table(&["x", "re", "im"], &rows)
        }
        Command::Defect {
            beta,
            alpha,
            l,
            n,
            cutoff,
            trials,
        } => {
            let spec = PartitionSpec::new(*l, *n, *cutoff)?;
            let v = holder::norm_defect_estimate(*beta, *alpha, *l, &spec, *trials, cli.seed)?;
            sink.scalar("defect", v)
        }
        Command::ChainTest { alpha, samples } => {
            let r = holder::chain_test(*alpha, *samples, cli.seed)?;
            match sink.format {
                Format::Json => sink.value(&r),
                Format::Csv => sink.table(
                    &["alpha", "samples", "violations", "worst_ratio"],
                    &[vec![r.alpha, r.samples as f64, r.violations as f64, r.worst_ratio]],
                ),
            }
        }
    }
}

fn three_term_cmd(cli: &Cli, action: &ThreeTermCmd, sink: &mut Sink) -> Result<()> {
    match action {
        ThreeTermCmd::Solve { series, z } => {
            let s = series_solution(series)?.solve_with_dim(cli.dim.unwrap_or(three_term::SERIES_DIM))?;
            let mut rows = Vec::with_capacity(z.len());
            for &x in z {
                let (v, err) = s.eval_with_error(x)?;
                rows.push(vec![x, v.re, v.im, err]);
            }
            sink.table(&["z", "re", "im", "err"], &rows)
        }
        ThreeTermCmd::Residual {
            series,
            grid,
            closed_form,
        } => {
            let r = if *closed_form {
                let sign = series.lambda.re.round() as i32;
                if series.lambda.im != 0.0 || (sign != 1 && sign != -1) || series.lambda.re != f64::from(sign) {
                    return Err(Error::domain("the closed form needs λ = ±1"));
                }
                let f = three_term::lewis_zagier_example(series.q.clone(), series.beta, sign)?;
                three_term::residual(&f as &dyn Evaluable, series.lambda, series.beta, &grid.0)?
            } else {
                let s = series_solution(series)?.solve_with_dim(cli.dim.unwrap_or(three_term::SERIES_DIM))?;
                three_term::residual(&s, series.lambda, series.beta, &grid.0)?
            };
            sink.scalar("residual", r)
        }
        ThreeTermCmd::Coeffs { series, k } => {
            let s = series_solution(series)?.solve_with_dim(cli.dim.unwrap_or(three_term::SERIES_DIM))?;
            let (c, cs) = three_term::asymptotic_coefficients(&s, *k)?;
            let rows: Vec<Vec<f64>> = c
                .iter()
                .zip(&cs)
                .enumerate()
                .map(|(n, (a, b))| vec![n as f64, a.re, a.im, b.re, b.im])
                .collect();
            sink.table(&["n", "C_re", "C_im", "Cstar_re", "Cstar_im"], &rows)
        }
    }
}

fn check(name: &str, f: impl FnOnce() -> Result<bool>) -> (String, bool, String) {
    match f() {
        Ok(ok) => (name.to_string(), ok, String::new()),
        Err(e) => (name.to_string(), false, e.to_string()),
    }
}

/// Fast versions of the main invariants. Returns whether all passed.
fn self_test(sink: &mut Sink) -> Result<bool> {
    let one = BetaParam::real(1.0)?;
    let results = vec![
        check("branch conjugacy", || {
            let w = Word::new(vec![3, 1, 4, 1, 5])?;
            let mut worst = 0.0f64;
            for i in 0..20 {
                let x = i as f64 / 20.0;
                let lhs = cf_core::gauss_map(cf_core::branch_eval(&w, x))?;
                worst = worst.max((lhs - cf_core::branch_eval(&w.tail(), x)).abs());
            }
            Ok(worst < 1e-12)
        }),
        check("gauss fixed point", || {
            let h = GridFunction::chebyshev(32, 0.0, 1.0, |x| Complex64::new(1.0 / (1.0 + x), 0.0))?;
            let p = transfer::PreparedTransfer::new(&one, &h, DEFAULT_TOL)?;
            let mut worst = 0.0f64;
            for i in 0..50 {
                let z = i as f64 / 49.0;
                worst = worst.max((p.eval(z)? - 1.0 / (1.0 + z)).norm());
            }
            Ok(worst < 1e-10)
        }),
        check("lambda1(1) = 1", || Ok((transfer::lambda1(1.0, 1e-12)? - 1.0).abs() < 1e-8)),
        check("second eigenvalue", || {
            let a = transfer::spectrum(&transfer::build_collocation(&one, 32, None, DEFAULT_TOL)?, 2)?;
            let b = transfer::spectrum(&transfer::build_collocation(&one, 48, None, DEFAULT_TOL)?, 2)?;
            Ok((a[1].0.norm() - b[1].0.norm()).abs() < 1e-8)
        }),
        check("hurwitz shift identity", || {
            let s = Complex64::new(1.7, 3.0);
            let a = crate::special::hurwitz_zeta(s, 0.4)?;
            let b = crate::special::hurwitz_zeta(s, 1.4)?;
            Ok((a - b - crate::special::real_pow_neg(0.4, s)).norm() < 1e-12)
        }),
        check("hurwitz at negative real part", || {
            let v = crate::special::hurwitz_zeta(Complex64::new(-3.5, 0.0), 0.25)?;
            Ok((v.re - 0.004_004_229_373_495_992).abs() < 1e-13 && v.im.abs() < 1e-13)
        }),
        check("chaining lemma", || Ok(holder::chain_test(0.5, 10_000, 1)?.violations == 0)),
        check("interpolation idempotent", || {
            let nodes: Vec<f64> = (0..65).map(|i| i as f64 / 64.0).collect();
            let f = HolderFunction::sample(nodes, 0.5, |x| (5.0 * x).sin())?;
            let spec = PartitionSpec::new(1, 8, 8)?;
            let p = holder::pln_apply(&f, &spec)?;
            let pp = holder::pln_apply(&p, &spec)?;
            Ok(p
                .function()
                .values()
                .iter()
                .zip(pp.function().values())
                .all(|(a, b)| (a - b).norm() < 1e-14))
        }),
        check("closed-form solution", || {
            let q = PeriodicFunction::new(0.0, vec![], vec![1.0]);
            let beta = Complex64::new(0.5, 9.5);
            let f = three_term::lewis_zagier_example(q, beta, 1)?;
            let grid: Vec<f64> = (0..20).map(|i| 0.1 + 0.1 * i as f64).collect();
            Ok(three_term::residual(&f, Complex64::new(1.0, 0.0), beta, &grid)? < 1e-8)
        }),
        check("series round trip", || {
            let q = PeriodicFunction::new(0.3, vec![0.5], vec![-0.2]);
            let sol = ThreeTermSolution::new(q.clone(), Complex64::new(2.0, 0.0), one, 60, 0)?.solve()?;
            let grid: Vec<f64> = (0..32).map(|i| i as f64 / 32.0).collect();
            let a = three_term::associated_periodic(&sol, Complex64::new(2.0, 0.0), &one, &grid, 3, 1e-8)?;
            Ok(a.q.re.max_coeff_distance(&q) < 1e-8)
        }),
        check("zero at beta = 1", || {
            let z = scan::find_zero(Complex64::new(1.0, 0.0), Which::Minus, 1e-10, 32)?;
            Ok((z.beta - 1.0).norm() < 1e-8)
        }),
    ];
    let all = results.iter().all(|r| r.1);
    match sink.format {
        Format::Json => {
            let v: Vec<_> = results
                .iter()
                .map(|(n, ok, d)| json!({"check": n, "pass": ok, "detail": d}))
                .collect();
            sink.value(&v)?;
        }
        Format::Csv => {
            for (n, ok, d) in &results {
                let mark = if *ok { "PASS" } else { "FAIL" };
                let line = if d.is_empty() {
                    format!("{mark}  {n}")
                } else {
                    format!("{mark}  {n}  ({d})")
                };
                sink.line(&line)?;
            }
        }
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn value_parsers() {
        assert_eq!(parse_complex("1.5,-2").unwrap(), Complex64::new(1.5, -2.0));
        assert_eq!(parse_complex("-3").unwrap(), Complex64::new(-3.0, 0.0));
        assert!(parse_complex("1,2,3").is_err());
        assert_eq!(parse_range("0:1:3").unwrap().0, vec![0.0, 0.5, 1.0]);
        assert!(parse_range("1:0:3").is_err());
        assert_eq!(fmt_num(1.9147961242991893e-17), "1.9147961242991893e-17");
        assert_eq!(fmt_num(0.25), "0.25");
        assert_eq!(fmt_num(-0.0), "-0");
    }

    #[test]
    fn every_subcommand_parses() {
        let q = r#"{"constant":0,"cos":[1],"sin":[]}"#;
        let lines: Vec<Vec<&str>> = vec![
            vec!["hurwitz", "--s", "2,0", "--z", "1"],
            vec!["apply", "--input", "f.csv", "--beta", "1", "--rule", "linear", "--z", "0,0.5"],
            vec!["spectrum", "--beta", "1", "--eigenfunction", "0"],
            vec!["dets", "--beta", "0.5,9.5"],
            vec!["lambda1", "--t", "2"],
            vec!["scan", "--sigma", "0.5", "--r-min", "-1", "--r-max", "1", "--step", "0.5"],
            vec!["find-zero", "--beta", "0.5,9.53", "--which", "plus"],
            vec!["three-term", "solve", "--q", q, "--lambda", "2", "--beta", "1", "--z", "0"],
            vec!["three-term", "residual", "--q", q, "--lambda", "2", "--beta", "1", "--grid", "0:1:5"],
            vec!["three-term", "coeffs", "--q", q, "--lambda", "2", "--beta", "1"],
            vec!["pln", "--input", "f.csv", "--alpha", "0.5", "--l", "1", "--n", "4"],
            vec!["defect", "--beta", "1", "--alpha", "0.6", "--l", "1", "--n", "8"],
            vec!["chain-test", "--alpha", "0.5"],
        ];
        for l in lines {
            let argv = std::iter::once("gauss-spectral").chain(l.iter().copied());
            assert!(Cli::try_parse_from(argv).is_ok(), "{l:?}");
        }
    }
}
