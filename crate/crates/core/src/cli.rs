//! Command-line front end.
//!
//! Every command writes CSV or JSON to standard output or to `--out`. Exit
//! status is 0 on success, 1 on a usage error and 2 when a computed check
//! exceeds its tolerance.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::chebyshev::closed_form_tn;
use crate::determinant::{direct_determinant, general_solution_tn, minor_sequence};
use crate::dipole::{chain_couplings, critical_separations, DipoleConfig};
use crate::eigvec::{ansatz_fit, boundary_rank_check, eigenpairs};
use crate::error::{ChainError, Result};
use crate::model::{build_hamiltonian, ChainParams};
use crate::roots::{
    degeneracy_crossings, imaginary_to_real_crossovers, series_x0, sweep_curves, tangent_root, Branch,
    SeriesExpansion,
};
use crate::spectrum::solve_spectrum;

/// Largest relative disagreement tolerated between characteristic-polynomial evaluators.
pub const CPOLY_TOL: f64 = 1e-8;
/// Largest eigenvector residual tolerated by `eigvec`.
pub const EIGVEC_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "nnn-chain", version, about = "Single-excitation spectra of qubit chains with NN and NNN couplings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Minus,
    Plus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Minus => Branch::Minus,
            BranchArg::Plus => Branch::Plus,
        }
    }
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Chain {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub omega0: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct GammaGrid {
    #[arg(long, default_value_t = 0.0)]
    pub gamma_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 400)]
    pub gamma_steps: usize,
}

impl GammaGrid {
    fn points(&self) -> Result<Vec<f64>> {
        if self.gamma_steps == 0 || self.gamma_max.partial_cmp(&self.gamma_min) != Some(std::cmp::Ordering::Greater) || self.gamma_min < 0.0 {
            return Err(ChainError::InvalidArgument(
                "need 0 <= gamma-min < gamma-max and gamma-steps >= 1".into(),
            ));
        }
        let span = self.gamma_max - self.gamma_min;
        Ok((0..=self.gamma_steps).map(|i| self.gamma_min + span * i as f64 / self.gamma_steps as f64).collect())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues with residuals.
    Spectrum {
        #[command(flatten)]
        chain: Chain,
        #[command(flatten)]
        output: Output,
    },
    /// Compare the characteristic-polynomial evaluators on random draws.
    VerifyCpoly {
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 200)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Root curves x(γ) with b = 1 and a = 4γ².
    Curves {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        grid: GammaGrid,
        #[command(flatten)]
        output: Output,
    },
    /// Truncated series against numeric roots of a tangent equation.
    Series {
        #[arg(long)]
        n: usize,
        /// Root index; all roots when absent.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value_t = BranchArg::Minus)]
        branch: BranchArg,
        #[arg(long, default_value_t = 0.01)]
        gamma_min: f64,
        #[arg(long, default_value_t = 0.05)]
        gamma_max: f64,
        #[arg(long, default_value_t = 4)]
        gamma_steps: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Eigenvectors with ansatz fit and boundary rank.
    Eigvec {
        #[command(flatten)]
        chain: Chain,
        #[command(flatten)]
        output: Output,
    },
    /// Chain couplings and zeros of the dipole interaction.
    Couplings {
        #[arg(long)]
        d_over_lambda: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        cos_mu_r: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma_decay: f64,
        #[arg(long, default_value_t = 1.0)]
        x_min: f64,
        #[arg(long, default_value_t = 10.0)]
        x_max: f64,
        #[command(flatten)]
        output: Output,
    },
}

/// Formats with 12 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round12(v);
    if r == 0.0 {
        "0".into()
    } else if r.abs() < 1e-4 || r.abs() >= 1e15 {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn round12(v: f64) -> f64 {
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// JSON number rounded like [`fmt_num`]; non-finite values become strings.
pub fn json_num(v: f64) -> Value {
    if v.is_finite() {
        json!(round12(v))
    } else {
        Value::String(fmt_num(v))
    }
}

/// Rows of a table with named columns, rendered as CSV or JSON.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.clone())).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if !n.is_i64() && !n.is_u64() => fmt_num(f),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

/// Result of one command: rendered text and whether its checks passed.
struct Report {
    text: String,
    passed: bool,
}

fn render(table: &Table, format: Format, extra: Map<String, Value>) -> String {
    match format {
        Format::Csv => table.csv(),
        Format::Json => {
            let mut obj = extra;
            obj.insert("rows".into(), table.json_rows());
            let mut s = serde_json::to_string_pretty(&Value::Object(obj)).unwrap_or_default();
            s.push('\n');
            s
        }
    }
}

/// Per-length summary of the evaluator comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CpolyRow {
    pub n: usize,
    pub draws: usize,
    /// Draws on which the root expansion was singular and skipped.
    pub general_skipped: usize,
    /// Draws on which the Chebyshev form was singular and skipped.
    pub closed_skipped: usize,
    pub max_rel_err: f64,
}

/// Compares the recurrence, dense determinant, Chebyshev closed form and
/// root expansion of `T_n` on seeded random draws for `n = 2..=n_max`.
///
/// Couplings and `ω₀` are uniform in `±[0.05, 1]`, `[−1, 1]` and the energy
/// is uniform on the Gershgorin interval. The error of each evaluator is
/// relative to the recurrence value.
pub fn cpoly_comparison(n_max: usize, draws: usize, seed: u64) -> Result<Vec<CpolyRow>> {
    if n_max < 2 || draws == 0 {
        return Err(ChainError::InvalidArgument("need n-max >= 2 and draws >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coupling = |rng: &mut ChaCha8Rng| {
        let m: f64 = rng.gen_range(0.05..1.0);
        if rng.gen_bool(0.5) {
            m
        } else {
            -m
        }
    };
    let mut rows = Vec::new();
    for n in 2..=n_max {
        let mut row = CpolyRow { n, draws, general_skipped: 0, closed_skipped: 0, max_rel_err: 0.0 };
        for _ in 0..draws {
            let omega0: f64 = rng.gen_range(-1.0..1.0);
            let a = coupling(&mut rng);
            let b = coupling(&mut rng);
            let p = ChainParams::new(n, omega0, a, b)?;
            let r = p.gershgorin_radius();
            let e: f64 = rng.gen_range(omega0 - r..omega0 + r);
            let reference = minor_sequence(&p, e).last();
            let rel = |v: f64| (v - reference).abs() / reference.abs();
            row.max_rel_err = row.max_rel_err.max(rel(direct_determinant(&build_hamiltonian(&p)?, e)));
            match closed_form_tn(&p, e, n) {
                Ok(v) => row.max_rel_err = row.max_rel_err.max(rel(v)),
                Err(_) => row.closed_skipped += 1,
            }
            match general_solution_tn(&p, e, n) {
                Ok(v) => row.max_rel_err = row.max_rel_err.max(rel(v)),
                Err(_) => row.general_skipped += 1,
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

fn spectrum_cmd(chain: &Chain, format: Format) -> Result<Report> {
    let p = chain_params(chain)?;
    let spec = solve_spectrum(&p, chain.tol)?;
    let mut t = Table::new(&["k", "E", "residual"]);
    for (k, (e, r)) in spec.eigenvalues.iter().zip(&spec.residuals).enumerate() {
        t.push(vec![json!(k + 1), json_num(*e), json_num(*r)]);
    }
    let mut extra = Map::new();
    extra.insert("method".into(), json!(spec.method.as_str()));
    Ok(Report { text: render(&t, format, extra), passed: true })
}

fn chain_params(chain: &Chain) -> Result<ChainParams> {
    if chain.tol.is_nan() || chain.tol <= 0.0 {
        return Err(ChainError::InvalidArgument("tol must be positive".into()));
    }
    ChainParams::new(chain.n, chain.omega0, chain.a, chain.b)
}

fn verify_cmd(n_max: usize, draws: usize, seed: u64, format: Format) -> Result<Report> {
    let rows = cpoly_comparison(n_max, draws, seed)?;
    let worst = rows.iter().map(|r| r.max_rel_err).fold(0.0, f64::max);
    let mut t = Table::new(&["n", "draws", "closed_form_skipped", "general_solution_skipped", "max_rel_err"]);
    for r in &rows {
        t.push(vec![
            json!(r.n),
            json!(r.draws),
            json!(r.closed_skipped),
            json!(r.general_skipped),
            json_num(r.max_rel_err),
        ]);
    }
    let passed = worst <= CPOLY_TOL;
    let mut extra = Map::new();
    extra.insert("seed".into(), json!(seed));
    extra.insert("max_rel_err".into(), json_num(worst));
    extra.insert("tolerance".into(), json_num(CPOLY_TOL));
    extra.insert("pass".into(), json!(passed));
    let mut text = render(&t, format, extra);
    if format == Format::Csv {
        let _ = writeln!(text, "all,{},,,{}", rows.iter().map(|r| r.draws).sum::<usize>(), fmt_num(worst));
    }
    Ok(Report { text, passed })
}

fn curves_cmd(n: usize, grid: &GammaGrid, format: Format) -> Result<Report> {
    let gammas = grid.points()?;
    let curves = sweep_curves(n, &gammas)?;
    let mut t = Table::new(&["branch", "gamma", "x", "alpha_re", "alpha_im", "alpha_class"]);
    for c in &curves {
        for i in 0..c.gamma_grid.len() {
            t.push(vec![
                json!(c.branch_index),
                json_num(c.gamma_grid[i]),
                json_num(c.x_values[i]),
                json_num(c.alpha_values[i].re),
                json_num(c.alpha_values[i].im),
                json!(c.alpha_class[i].as_str()),
            ]);
        }
    }
    let mut extra = Map::new();
    extra.insert("n".into(), json!(n));
    let crossovers: Vec<Value> = curves
        .iter()
        .map(|c| json!({ "branch": c.branch_index, "gamma": imaginary_to_real_crossovers(c).into_iter().map(json_num).collect::<Vec<_>>() }))
        .collect();
    extra.insert("crossovers".into(), Value::Array(crossovers));
    // Pairing only exists when the grid starts at γ = 0.
    if let Ok(pairs) = degeneracy_crossings(&curves) {
        let pairs: Vec<Value> = pairs
            .iter()
            .map(|p| {
                json!({
                    "branches": [curves[p.curves.0].branch_index, curves[p.curves.1].branch_index],
                    "x_start": json_num(p.x_start),
                    "count": p.count,
                })
            })
            .collect();
        extra.insert("degeneracies".into(), Value::Array(pairs));
    }
    Ok(Report { text: render(&t, format, extra), passed: true })
}

#[allow(clippy::too_many_arguments)]
fn series_cmd(
    n: usize,
    k: Option<usize>,
    branch: Branch,
    gamma_min: f64,
    gamma_max: f64,
    steps: usize,
    format: Format,
) -> Result<Report> {
    if n < 2 || n % 2 == 1 {
        return Err(ChainError::InvalidArgument(format!("series needs even n >= 2, got {n}")));
    }
    let grid = GammaGrid { gamma_min, gamma_max, gamma_steps: steps }.points()?;
    let ks: Vec<usize> = match k {
        Some(k) => vec![k],
        None => (1..=n / 2).collect(),
    };
    let mut t = Table::new(&["k", "gamma", "x_series", "x_numeric", "abs_diff"]);
    for k in ks {
        let s = SeriesExpansion::new(n, k, branch)?;
        for &g in &grid {
            let xs = s.evaluate(g);
            let xn = tangent_root(n, g, series_x0(n, k), branch).unwrap_or(f64::NAN);
            t.push(vec![json!(k), json_num(g), json_num(xs), json_num(xn), json_num((xs - xn).abs())]);
        }
    }
    let mut extra = Map::new();
    extra.insert("n".into(), json!(n));
    extra.insert("branch".into(), json!(branch.as_str()));
    Ok(Report { text: render(&t, format, extra), passed: true })
}

fn eigvec_cmd(chain: &Chain, format: Format) -> Result<Report> {
    let p = chain_params(chain)?;
    let spec = solve_spectrum(&p, chain.tol)?;
    let pairs = eigenpairs(&p, &spec.eigenvalues)?;
    let mut t = Table::new(&["k", "j", "E", "c", "residual", "fit_error", "boundary_rank"]);
    let mut passed = true;
    for (k, pair) in pairs.iter().enumerate() {
        passed &= pair.residual <= EIGVEC_TOL;
        let fit = ansatz_fit(&p, pair).map(|f| f.fit_error).unwrap_or(f64::NAN);
        let rank = boundary_rank_check(&p, pair.energy).map(|r| json!(r)).unwrap_or(Value::Null);
        for (j, c) in pair.c.iter().enumerate() {
            t.push(vec![
                json!(k + 1),
                json!(j + 1),
                json_num(pair.energy),
                json_num(*c),
                json_num(pair.residual),
                json_num(fit),
                rank.clone(),
            ]);
        }
    }
    let mut extra = Map::new();
    extra.insert("pass".into(), json!(passed));
    Ok(Report { text: render(&t, format, extra), passed })
}

fn couplings_cmd(d: f64, cos_mu_r: f64, gamma_decay: f64, x_min: f64, x_max: f64, format: Format) -> Result<Report> {
    let cfg = DipoleConfig::new(d, cos_mu_r, gamma_decay)?;
    let (a, b) = chain_couplings(&cfg)?;
    let zeros = critical_separations(cos_mu_r, (x_min, x_max))?;
    let mut t = Table::new(&["quantity", "value"]);
    t.push(vec![json!("a"), json_num(a)]);
    t.push(vec![json!("b"), json_num(b)]);
    for (i, z) in zeros.iter().enumerate() {
        t.push(vec![json!(format!("critical_x_{}", i + 1)), json_num(*z)]);
    }
    Ok(Report { text: render(&t, format, Map::new()), passed: true })
}

fn is_usage(e: &ChainError) -> bool {
    matches!(
        e,
        ChainError::InvalidLength(_)
            | ChainError::NonFinite { .. }
            | ChainError::InvalidArgument(_)
            | ChainError::SizeLimit { .. }
    )
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let (result, output) = match &cli.command {
        Command::Spectrum { chain, output } => (spectrum_cmd(chain, output.format), output),
        Command::VerifyCpoly { n_max, draws, seed, output } => (verify_cmd(*n_max, *draws, *seed, output.format), output),
        Command::Curves { n, grid, output } => (curves_cmd(*n, grid, output.format), output),
        Command::Series { n, k, branch, gamma_min, gamma_max, gamma_steps, output } => (
            series_cmd(*n, *k, (*branch).into(), *gamma_min, *gamma_max, *gamma_steps, output.format),
            output,
        ),
        Command::Eigvec { chain, output } => (eigvec_cmd(chain, output.format), output),
        Command::Couplings { d_over_lambda, cos_mu_r, gamma_decay, x_min, x_max, output } => (
            couplings_cmd(*d_over_lambda, *cos_mu_r, *gamma_decay, *x_min, *x_max, output.format),
            output,
        ),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return if is_usage(&e) { 1 } else { 2 };
        }
    };
    let written = match &output.out {
        Some(path) => std::fs::write(path, &report.text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(report.text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: {msg}");
        return 1;
    }
    if report.passed {
        0
    } else {
        let _ = writeln!(stderr, "verification failed: tolerance exceeded");
        2
    }
}
