//! The `potts-sd` command line: argument parsing, configuration merging and
//! the six subcommands. Every number is computed by the library; this module
//! only selects points, runs the operations and writes JSON or CSV.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bethe::{self, BetheRootsJson, Schedule, SurfaceTable};
use crate::bundle::{Route, SeriesBundle, SeriesBundleJson};
use crate::closedform::critical::{ContinuationCheck, FcAsymptote, ModulusCheck};
use crate::closedform::{self, numeric as cf};
use crate::error::{Error, Result};
use crate::lattice::{self, sixvertex::potts_via_sixvertex, LatticeSpec, VertexWeights};
use crate::params::{q_from_potts_q, QsPoint, SpectralParams};
use crate::qseries::SeriesJson;
use crate::relations::{self, summary_table, GridPoint, IdentityReport};
use crate::scalar::{self, HpFloat, Real, DEFAULT_PRECISION_BITS};

/// Environment variable read for the worker count when neither a flag nor
/// the config file sets it.
pub const THREADS_ENV: &str = "POTTS_SD_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Free energies at numeric points.
    Eval,
    /// Exact series of the closed forms.
    Series,
    /// Finite-lattice partition functions and the extracted free energies.
    Lattice,
    /// Bethe roots and the finite-width surface free energy.
    Bethe,
    /// Inversion and rotation relations.
    Verify,
    /// The critical regime as the number of states approaches four.
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RingKind {
    F64,
    Hp,
    Rational,
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RouteName {
    Closedform,
    Bethe,
}

/// Everything a run depends on. Config files use this schema; fields left
/// out take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Option<Command>,
    pub q: Vec<f64>,
    pub s: Vec<f64>,
    /// When nonempty, points are `(q, u/lambda)` instead of `(q, s)`.
    pub u_frac: Vec<f64>,
    /// Number of Potts states; overrides `q` when set.
    #[serde(rename = "Q")]
    pub potts_q: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub order: i32,
    pub ring: Option<RingKind>,
    pub precision_bits: usize,
    pub threads: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub route: Vec<RouteName>,
    pub extract: bool,
    pub grid: String,
    /// Random points added to the default grid.
    pub extra_points: usize,
    pub eps: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subcommand: None,
            q: vec![0.2],
            s: vec![1.0],
            u_frac: Vec::new(),
            potts_q: None,
            n: None,
            m: None,
            order: 16,
            ring: None,
            precision_bits: DEFAULT_PRECISION_BITS,
            threads: None,
            seed: 0,
            out: None,
            format: Format::Json,
            route: vec![RouteName::Closedform],
            extract: false,
            grid: "default".into(),
            extra_points: 5,
            eps: vec![0.02],
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "potts-sd", version, about = "Free energies of the self-dual Potts model with Q > 4")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Default, clap::Args)]
pub struct Flags {
    /// JSON file with the RunConfig schema.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub s: Option<Vec<f64>>,
    #[arg(long = "u-frac", global = true, value_delimiter = ',')]
    pub u_frac: Option<Vec<f64>>,
    #[arg(long = "Q", global = true)]
    pub potts_q: Option<f64>,
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    #[arg(long = "M", global = true)]
    pub m: Option<usize>,
    /// Truncation order in t = q^(1/4).
    #[arg(long, global = true)]
    pub order: Option<i32>,
    #[arg(long, global = true)]
    pub ring: Option<RingKind>,
    #[arg(long = "precision-bits", global = true)]
    pub precision_bits: Option<usize>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub route: Option<Vec<RouteName>>,
    /// Extract the four free energies from a family of lattices.
    #[arg(long, global = true)]
    pub extract: bool,
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long = "extra-points", global = true)]
    pub extra_points: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
}

/// Flags over the config file over defaults; the thread count falls back
/// to [`THREADS_ENV`] before the default.
pub fn resolve(cli: Cli, env_threads: Option<String>) -> Result<RunConfig> {
    let mut c = match &cli.flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Domain(format!("--config {}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| Error::Domain(format!("--config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let f = cli.flags;
    macro_rules! over {
        ($($field:ident),*) => { $( if let Some(v) = f.$field { c.$field = v; } )* };
    }
    over!(q, s, u_frac, order, precision_bits, seed, format, route, grid, extra_points, eps);
    if f.potts_q.is_some() {
        c.potts_q = f.potts_q;
    }
    if f.n.is_some() {
        c.n = f.n;
    }
    if f.m.is_some() {
        c.m = f.m;
    }
    if f.ring.is_some() {
        c.ring = f.ring;
    }
    if f.out.is_some() {
        c.out = f.out;
    }
    if f.threads.is_some() {
        c.threads = f.threads;
    }
    c.extract |= f.extract;
    if cli.command.is_some() {
        c.subcommand = cli.command;
    }
    if c.threads.is_none() {
        if let Some(v) = env_threads {
            let n = v.trim().parse::<usize>().map_err(|_| Error::Domain(format!("{THREADS_ENV}={v} is not a thread count")))?;
            c.threads = Some(n);
        }
    }
    if c.subcommand.is_none() {
        return Err(Error::Domain("no subcommand given on the command line or in the config file".into()));
    }
    if c.precision_bits < 64 {
        return Err(Error::Domain(format!("--precision-bits {} is below 64", c.precision_bits)));
    }
    Ok(c)
}

/// A command's result and its exit status.
pub struct Outcome {
    pub json: serde_json::Value,
    pub csv: Vec<u8>,
    pub table: String,
    pub exit: i32,
}

#[derive(Serialize)]
struct Envelope<'a> {
    config: &'a RunConfig,
    result: &'a serde_json::Value,
}

/// Exit status for an error: 1 for bad input, 3 when a numeric method did
/// not converge.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Convergence(_) | Error::NotStabilized { .. } | Error::Continuation(_) => 3,
        _ => 1,
    }
}

fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt17(x: Option<f64>) -> String {
    x.map(sig17).unwrap_or_default()
}

fn csv_writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new().flexible(true).from_writer(buf)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn to_value<T: Serialize>(x: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(x)?)
}

/// Runs the resolved configuration on a pool of `threads` workers.
pub fn run(config: &mut RunConfig) -> Result<Outcome> {
    let bits = config.precision_bits;
    let mut builder = rayon::ThreadPoolBuilder::new().start_handler(move |_| scalar::set_precision(bits));
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Domain(format!("--threads: {e}")))?;
    let cmd = config.subcommand.expect("resolved config has a subcommand");
    let c = &*config;
    let out = pool.install(|| {
        scalar::with_precision(bits, || match cmd {
            Command::Eval => cmd_eval(c),
            Command::Series => cmd_series(c),
            Command::Lattice => cmd_lattice(c),
            Command::Bethe => cmd_bethe(c),
            Command::Verify => cmd_verify(c),
            Command::Critical => cmd_critical(c),
        })
    })?;
    config.ring = Some(ring_or(config, default_ring(cmd)));
    Ok(out)
}

fn default_ring(cmd: Command) -> RingKind {
    match cmd {
        Command::Series | Command::Lattice => RingKind::Series,
        _ => RingKind::F64,
    }
}

fn ring_or(c: &RunConfig, d: RingKind) -> RingKind {
    c.ring.unwrap_or(d)
}

/// Serializes the outcome with the effective config and writes it to
/// `--out` or stdout; the human table goes to stdout when the machine
/// output goes to a file, to stderr otherwise.
pub fn emit(config: &RunConfig, out: &Outcome) -> Result<()> {
    let bytes = match config.format {
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(&Envelope { config, result: &out.json })?;
            s.push(b'\n');
            s
        }
        Format::Csv => {
            let mut s = format!("# config: {}\n", serde_json::to_string(config)?).into_bytes();
            s.extend_from_slice(&out.csv);
            s
        }
    };
    match &config.out {
        Some(path) => {
            std::fs::write(path, bytes)?;
            print!("{}", out.table);
        }
        None => {
            eprint!("{}", out.table);
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(())
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let mut config = match resolve(cli, std::env::var(THREADS_ENV).ok()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match run(&mut config).and_then(|o| emit(&config, &o).map(|_| o.exit)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

// ---------------------------------------------------------------- points

/// A requested evaluation point in f64.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct Point {
    q: f64,
    s: Option<f64>,
    u_frac: Option<f64>,
}

fn points(c: &RunConfig) -> Result<Vec<Point>> {
    let qs = match c.potts_q {
        Some(pq) => {
            if !(pq > 4.0) {
                return Err(Error::Domain(format!("--Q {pq} must exceed 4")));
            }
            vec![q_from_potts_q(pq)?]
        }
        None => c.q.clone(),
    };
    if qs.is_empty() {
        return Err(Error::Domain("--q needs at least one value".into()));
    }
    let mut pts = Vec::new();
    for &q in &qs {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("--q {q} is outside (0, 1)")));
        }
        if c.u_frac.is_empty() {
            for &s in &c.s {
                if !(s > 0.0) {
                    return Err(Error::Domain(format!("--s {s} must be positive")));
                }
                pts.push(Point { q, s: Some(s), u_frac: None });
            }
        } else {
            for &u in &c.u_frac {
                if !(u > 0.0 && u < 1.0) {
                    return Err(Error::Domain(format!("--u-frac {u} is outside (0, 1)")));
                }
                pts.push(Point { q, s: None, u_frac: Some(u) });
            }
        }
    }
    if pts.is_empty() {
        return Err(Error::Domain("--s needs at least one value".into()));
    }
    Ok(pts)
}

impl Point {
    fn spectral<S: Real>(&self) -> Result<SpectralParams<S>> {
        let q = S::from_f64(self.q);
        match (self.s, self.u_frac) {
            (Some(s), _) => SpectralParams::from_ts(q.sqrt().sqrt(), S::from_f64(s)),
            (None, Some(u)) => {
                let lambda = -q.ln() / S::from_i64(2);
                SpectralParams::from_lambda_u(lambda.clone(), lambda * S::from_f64(u))
            }
            (None, None) => unreachable!("points carry s or u/lambda"),
        }
    }

    fn f64_params(&self) -> Result<SpectralParams<f64>> {
        match self.s {
            Some(s) => QsPoint { q: self.q, s }.spectral(),
            None => self.spectral::<f64>(),
        }
    }
}

// ---------------------------------------------------------------- eval

#[derive(Debug, Clone, PartialEq, Serialize)]
struct EvalRow {
    route: Route,
    q: f64,
    s: f64,
    u_frac: f64,
    physical: bool,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    f_b: Option<f64>,
    f_s: Option<f64>,
    f_s_h: Option<f64>,
    f_c: Option<f64>,
}

fn closedform_row<S: Real>(p: &Point) -> Result<EvalRow> {
    let sp = p.spectral::<S>()?;
    Ok(EvalRow {
        route: Route::ClosedForm,
        q: p.q,
        s: p.s.unwrap_or_else(|| sp.s().to_f64()),
        u_frac: sp.u_frac().to_f64(),
        physical: sp.is_physical(),
        n: None,
        f_b: Some(cf::bulk(&sp)?.to_f64()),
        f_s: Some(cf::surface(&sp)?.to_f64()),
        f_s_h: Some(cf::surface_h(&sp)?.to_f64()),
        f_c: Some(cf::corner(sp.q())?.to_f64()),
    })
}

fn bethe_row(p: &Point, n: usize) -> Result<EvalRow> {
    let sp = p.f64_params()?;
    let (f_s, _, _) = bethe::finite_surface(n, &sp, Schedule::default())?;
    Ok(EvalRow {
        route: Route::Bethe,
        q: p.q,
        s: p.s.unwrap_or_else(|| sp.s()),
        u_frac: sp.u_frac(),
        physical: sp.is_physical(),
        n: Some(n),
        f_b: None,
        f_s: Some(f_s),
        f_s_h: None,
        f_c: None,
    })
}

pub fn cmd_eval(c: &RunConfig) -> Result<Outcome> {
    let ring = ring_or(c, RingKind::F64);
    let pts = points(c)?;
    let mut rows = Vec::new();
    for route in &c.route {
        match route {
            RouteName::Closedform => {
                for p in &pts {
                    rows.push(match ring {
                        RingKind::F64 => closedform_row::<f64>(p)?,
                        RingKind::Hp => closedform_row::<HpFloat>(p)?,
                        other => {
                            return Err(Error::Domain(format!("eval is numeric; --ring {other:?} is not available")))
                        }
                    });
                }
            }
            RouteName::Bethe => {
                let n = c.n.ok_or_else(|| Error::Domain("--route bethe needs --N".into()))?;
                for p in &pts {
                    rows.push(bethe_row(p, n)?);
                }
            }
        }
    }
    let mut csv = Vec::new();
    {
        let mut w = csv_writer(&mut csv);
        w.write_record(["route", "q", "s", "u_frac", "physical", "N", "f_b", "f_s", "f_s_h", "f_c"]).map_err(csv_err)?;
        for r in &rows {
            w.write_record([
                to_value(&r.route)?.as_str().unwrap_or_default().to_string(),
                sig17(r.q),
                sig17(r.s),
                sig17(r.u_frac),
                r.physical.to_string(),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                opt17(r.f_b),
                opt17(r.f_s),
                opt17(r.f_s_h),
                opt17(r.f_c),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
    }
    let fmt = |x: Option<f64>| x.map(|v| format!("{v:>22.15e}")).unwrap_or_else(|| format!("{:>22}", "-"));
    let mut table = format!(
        "{:<11} {:>8} {:>8} {:>8} {:>22} {:>22} {:>22} {:>22}\n",
        "route", "q", "s", "u/lambda", "f_b", "f_s", "f'_s", "f_c"
    );
    for r in &rows {
        table.push_str(&format!(
            "{:<11} {:>8.4} {:>8.4} {:>8.4} {} {} {} {}\n",
            to_value(&r.route)?.as_str().unwrap_or_default(),
            r.q,
            r.s,
            r.u_frac,
            fmt(r.f_b),
            fmt(r.f_s),
            fmt(r.f_s_h),
            fmt(r.f_c)
        ));
    }
    Ok(Outcome { json: to_value(&rows)?, csv, table, exit: 0 })
}

// ---------------------------------------------------------------- series

fn series_table(b: &SeriesBundle) -> String {
    let mut s = String::new();
    let mut block = |name: &str, ser: Option<&crate::TruncatedSeries>| {
        s.push_str(&format!("{name}:\n"));
        match ser {
            Some(ser) => {
                for (d, p) in ser.terms() {
                    s.push_str(&format!("  t^{d:<3} {p}\n"));
                }
                s.push_str(&format!("  + O(t^{})\n", ser.order()));
            }
            None => s.push_str("  constant term undetermined\n"),
        }
    };
    block("f_b + log Q", Some(&b.f_b_reduced));
    block("f_s", Some(&b.f_s));
    block("f'_s", Some(&b.f_s_h));
    block("f_c", b.f_c.known());
    s
}

fn series_outcome(b: &SeriesBundle) -> Result<Outcome> {
    let mut csv = Vec::new();
    b.write_csv(&mut csv)?;
    let json: SeriesBundleJson = b.to_json();
    Ok(Outcome { json: to_value(&json)?, csv, table: series_table(b), exit: 0 })
}

fn exact_ring(c: &RunConfig, what: &str) -> Result<()> {
    match ring_or(c, RingKind::Series) {
        RingKind::Series | RingKind::Rational => Ok(()),
        other => Err(Error::Domain(format!("{what} is exact; --ring {other:?} is not available"))),
    }
}

fn check_order(order: i32) -> Result<()> {
    if order < 0 {
        return Err(Error::Domain(format!("--order {order} is negative")));
    }
    Ok(())
}

pub fn cmd_series(c: &RunConfig) -> Result<Outcome> {
    exact_ring(c, "series")?;
    check_order(c.order)?;
    series_outcome(&closedform::closed_form_bundle(c.order)?)
}

// ---------------------------------------------------------------- lattice

#[derive(Debug, Serialize)]
struct LatticeNumeric {
    q: f64,
    s: f64,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    log_z: f64,
}

pub fn cmd_lattice(c: &RunConfig) -> Result<Outcome> {
    check_order(c.order)?;
    if c.extract {
        exact_ring(c, "extraction")?;
        let mut out = series_outcome(&lattice::lattice_bundle(c.order)?)?;
        let a = lattice::extract::stabilization_side(c.order);
        if c.m.is_some_and(|m| m > a + 2) || c.n.is_some_and(|n| n > a + 2) {
            out.table.push_str(&format!("note: extraction at t^{} uses sides {a}..{}; --M/--N are not needed\n", c.order, a + 2));
        }
        return Ok(out);
    }
    let m = c.m.ok_or_else(|| Error::Domain("lattice needs --M (or --extract)".into()))?;
    let n = c.n.ok_or_else(|| Error::Domain("lattice needs --N (or --extract)".into()))?;
    let spec = LatticeSpec::new(m, n)?;
    match ring_or(c, RingKind::Series) {
        RingKind::Series | RingKind::Rational => {
            let s = lattice::series_log_z(spec, c.order)?;
            let json: SeriesJson = s.to_json();
            let mut csv = Vec::new();
            {
                let mut w = csv_writer(&mut csv);
                w.write_record(["tdeg", "sdeg", "num", "den"]).map_err(csv_err)?;
                for (d, p) in s.terms() {
                    for (k, q) in p.terms() {
                        w.write_record([d.to_string(), k.to_string(), q.numer().to_string(), q.denom().to_string()])
                            .map_err(csv_err)?;
                    }
                }
                w.flush()?;
            }
            let table = format!("log(Z/Q^(MN)) on {m}x{n}:\n{s}\n");
            Ok(Outcome { json: to_value(&json)?, csv, table, exit: 0 })
        }
        RingKind::F64 => {
            let mut rows = Vec::new();
            for p in points(c)? {
                let sp = p.f64_params()?;
                let z = potts_via_sixvertex(spec, &sp.sqrt_potts_q(), &VertexWeights::self_dual(&sp)?)?;
                if !(z > 0.0 && z.is_finite()) {
                    return Err(Error::Domain(format!("Z = {z} at q = {}, s = {} is not a positive finite number", p.q, sp.s())));
                }
                rows.push(LatticeNumeric { q: p.q, s: p.s.unwrap_or_else(|| sp.s()), m, n, log_z: z.ln() });
            }
            let mut csv = Vec::new();
            {
                let mut w = csv_writer(&mut csv);
                w.write_record(["q", "s", "M", "N", "log_z"]).map_err(csv_err)?;
                for r in &rows {
                    w.write_record([sig17(r.q), sig17(r.s), r.m.to_string(), r.n.to_string(), sig17(r.log_z)]).map_err(csv_err)?;
                }
                w.flush()?;
            }
            let table = rows.iter().map(|r| format!("q={} s={} {m}x{n}: log Z = {:.15e}\n", r.q, r.s, r.log_z)).collect();
            Ok(Outcome { json: to_value(&rows)?, csv, table, exit: 0 })
        }
        RingKind::Hp => Err(Error::Domain("lattice --ring hp is not available; use f64 or series".into())),
    }
}

// ---------------------------------------------------------------- bethe

#[derive(Debug, Serialize)]
struct BetheOut {
    q: f64,
    s: f64,
    roots: BetheRootsJson,
    lambda2: f64,
    lambda2_product_form: f64,
    surface: SurfaceTable,
}

pub fn cmd_bethe(c: &RunConfig) -> Result<Outcome> {
    if ring_or(c, RingKind::F64) != RingKind::F64 {
        return Err(Error::Domain("bethe solves in f64 only".into()));
    }
    let n = c.n.unwrap_or(8);
    if n < 2 {
        return Err(Error::Domain(format!("--N {n} must be at least 2")));
    }
    let mut outs = Vec::new();
    for p in points(c)? {
        let sp = p.f64_params()?;
        let roots = bethe::solve(n, *sp.q(), *sp.w(), Schedule::default())?;
        let (lambda2, alt) = bethe::eigenvalue(&roots.roots, *sp.q(), *sp.w())?;
        let surface = bethe::surface_convergence(n, &sp, Schedule::default())?;
        outs.push(BetheOut { q: p.q, s: p.s.unwrap_or_else(|| sp.s()), roots: roots.to_json(), lambda2, lambda2_product_form: alt, surface });
    }
    let mut csv = Vec::new();
    let mut table = String::new();
    {
        let mut w = csv_writer(&mut csv);
        w.write_record(["q", "s", "N", "lambda2", "f_s", "deviation", "residual"]).map_err(csv_err)?;
        for o in &outs {
            table.push_str(&format!("q={} s={}  closed-form f_s = {:.15e}\n", o.q, o.s, o.surface.f_s_closed));
            for r in &o.surface.rows {
                w.write_record([sig17(o.q), sig17(o.s), r.n.to_string(), sig17(r.lambda2), sig17(r.f_s), sig17(r.deviation), sig17(r.residual)])
                    .map_err(csv_err)?;
                table.push_str(&format!("  N={:<3} f_s={:>22.15e}  deviation={:>10.3e}\n", r.n, r.f_s, r.deviation));
            }
            if let Some(rate) = o.surface.log_decay_rate {
                table.push_str(&format!("  log|deviation| slope in N: {rate:.4}\n"));
            }
        }
        w.flush()?;
    }
    Ok(Outcome { json: to_value(&outs)?, csv, table, exit: 0 })
}

// ---------------------------------------------------------------- verify

fn grid(c: &RunConfig) -> Result<Vec<GridPoint>> {
    match c.grid.as_str() {
        "default" => Ok(relations::default_grid(c.seed, c.extra_points)),
        "points" => {
            if c.u_frac.is_empty() {
                return Err(Error::Domain("--grid points needs --u-frac".into()));
            }
            Ok(points(c)?.into_iter().map(|p| GridPoint { q: p.q, u_frac: p.u_frac.unwrap_or_default() }).collect())
        }
        other => Err(Error::Domain(format!("--grid {other}: expected default or points"))),
    }
}

/// Every relation check: transfer-matrix products and the eigenvalue
/// corollary at a few grid points, the exact series identities, and the
/// numeric identities on the whole grid.
pub fn verify_reports(c: &RunConfig) -> Result<Vec<IdentityReport>> {
    check_order(c.order)?;
    let ring = ring_or(c, RingKind::F64);
    let pts = grid(c)?;
    let n = c.n.unwrap_or(3);
    let potts_q = match c.potts_q {
        None => 3,
        Some(x) if x >= 2.0 && x.fract() == 0.0 => x as u32,
        Some(x) => return Err(Error::Domain(format!("--Q {x}: the matrix checks need an integer number of states"))),
    };
    let mut reports = Vec::new();
    for gp in pts.iter().step_by(6) {
        let c64 = relations::with_potts_q(&gp.spectral()?, potts_q)?;
        reports.extend(relations::verify_matrix_inversion(n, potts_q, &c64)?);
        reports.push(relations::verify_vv(n, potts_q, &c64)?);
        reports.push(relations::verify_eigenvalue_inversion(n, potts_q, &c64)?);
    }
    let mut reports = IdentityReport::merge(reports);
    reports.extend(relations::verify_series(&closedform::closed_form_bundle(c.order)?)?);
    reports.push(relations::series::fc_report(&closedform::closed_form_bundle(c.order)?)?);
    match ring {
        RingKind::Hp => reports.extend(relations::verify_numeric::<HpFloat>(&pts)?),
        _ => reports.extend(relations::verify_numeric::<f64>(&pts)?),
    }
    Ok(reports)
}

pub fn cmd_verify(c: &RunConfig) -> Result<Outcome> {
    let reports = verify_reports(c)?;
    let all = reports.iter().all(|r| r.pass);
    let mut csv = Vec::new();
    {
        let mut w = csv_writer(&mut csv);
        w.write_record(["id", "ring", "points", "max_defect", "tolerance", "pass"]).map_err(csv_err)?;
        for r in &reports {
            w.write_record([r.id.clone(), r.ring.clone(), r.points.len().to_string(), sig17(r.max_defect), sig17(r.tolerance), r.pass.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
    }
    let mut table = summary_table(&reports);
    table.push_str(if all { "all identities hold\n" } else { "some identities FAIL\n" });
    Ok(Outcome { json: to_value(&reports)?, csv, table, exit: if all { 0 } else { 2 } })
}

// ---------------------------------------------------------------- critical

#[derive(Debug, Serialize)]
struct CriticalOut {
    eps: f64,
    asymptote: FcAsymptote,
    /// `|ratio - 1| <= 0.05`.
    within_5_percent: bool,
    modulus: Vec<ModulusCheck>,
}

#[derive(Debug, Serialize)]
struct CriticalReport {
    points: Vec<CriticalOut>,
    continuation: ContinuationCheck,
}

pub fn cmd_critical(c: &RunConfig) -> Result<Outcome> {
    let ring = ring_or(c, RingKind::F64);
    let mut pts = Vec::new();
    for &eps in &c.eps {
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("--eps {eps} must be positive")));
        }
        let a = closedform::fc_asymptote(eps)?;
        let modulus = match ring {
            RingKind::Hp => closedform::conjugate_modulus(HpFloat::from_f64(eps))?,
            RingKind::F64 => closedform::conjugate_modulus(eps)?,
            other => return Err(Error::Domain(format!("critical is numeric; --ring {other:?} is not available"))),
        };
        pts.push(CriticalOut { eps, within_5_percent: (a.ratio - 1.0).abs() <= 0.05, asymptote: a, modulus });
    }
    let u = c.u_frac.first().copied().unwrap_or(0.25);
    let continuation = closedform::fs_continuation_check(0.4, 1.0, 13, u)?;
    let mut table = String::new();
    let mut csv = Vec::new();
    {
        let mut w = csv_writer(&mut csv);
        w.write_record(["eps", "f_c", "asymptote", "ratio", "modular_value"]).map_err(csv_err)?;
        for p in &pts {
            let a = &p.asymptote;
            w.write_record([sig17(a.eps), sig17(a.value), sig17(a.asymptote), sig17(a.ratio), sig17(a.modular_value)]).map_err(csv_err)?;
            table.push_str(&format!(
                "eps={}: f_c={:.12e}  -pi/(8 eps)={:.12e}  ratio={:.6}  {}\n",
                a.eps,
                a.value,
                a.asymptote,
                a.ratio,
                if p.within_5_percent { "within 5%" } else { "outside 5%" }
            ));
            for m in &p.modulus {
                table.push_str(&format!("  {:<34} rel. difference {:.3e}\n", m.id, m.relative_difference));
            }
        }
        w.flush()?;
    }
    table.push_str(&format!(
        "singular part decay: fitted rate {:.6}, expected {:.6} (relative error {:.2e})\n",
        continuation.rate, continuation.expected_rate, continuation.relative_error
    ));
    let report = CriticalReport { points: pts, continuation };
    Ok(Outcome { json: to_value(&report)?, csv, table, exit: 0 })
}
