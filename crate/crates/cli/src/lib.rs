//! Experiment runner behind the `polyharmonic` binary: a flat key/value
//! configuration is validated, dispatched to the numerical library and
//! turned into JSON reports, CSV tables and two-column plot files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use polyharmonic::bubbles::{bubble_integrals, bubble_residual, BubbleProfile};
use polyharmonic::bvp::{continuation, dirichlet_eigenvalue, solve_from_bubbles, ContinuationOptions};
use polyharmonic::green::{boggio_table, discrete_green_poles, green_bound_certificate, GreenTable};
use polyharmonic::inequalities::{coercivity_margin, hardy_constant, mollify_potential};
use polyharmonic::neumann::{neumann_iterate, random_pairs, MIN_SAMPLES};
use polyharmonic::operator::{assemble_operator, HardyPotential};
use polyharmonic::pohozaev::{dkn, pohozaev_residual};
use polyharmonic::{make_grid, GridScheme, Parity, ProblemParams, RadialField, RadialGrid};
use serde::Serialize;
use serde_json::{json, Value};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "POLYHARMONIC_OUT";
pub const DEFAULT_OUT_DIR: &str = "polyharmonic-out";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numerics(#[from] polyharmonic::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Input { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// `1` for bad input or an unusable output path, `2` for numerical failure.
    pub fn exit_code(&self) -> i32 {
        use polyharmonic::Error as E;
        match self {
            CliError::Usage(_) | CliError::Output { .. } | CliError::Input { .. } => 1,
            CliError::Numerics(e) => match e {
                E::Domain { .. }
                | E::InvalidArgument(_)
                | E::Precondition(_)
                | E::GridTooSmall { .. }
                | E::OrderTooHigh { .. }
                | E::Parse(_) => 1,
                _ => 2,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Bubble,
    Green,
    Pohozaev,
    Branch,
    Coercivity,
    Certify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bubble => "bubble",
            Command::Green => "green",
            Command::Pohozaev => "pohozaev",
            Command::Branch => "branch",
            Command::Coercivity => "coercivity",
            Command::Certify => "certify",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bubble" => Command::Bubble,
            "green" => Command::Green,
            "pohozaev" => Command::Pohozaev,
            "branch" => Command::Branch,
            "coercivity" => Command::Coercivity,
            "certify" => Command::Certify,
            other => return Err(usage(format!("unknown command '{other}'"))),
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A command plus its flat parameter map. Keys use the long-flag spelling
/// (`lambda-start`); underscores are accepted and normalized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub params: BTreeMap<String, String>,
}

pub fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

/// Parses `key = value` lines; `#` starts a comment. A `command` key, if
/// present, is returned separately.
pub fn parse_config_text(text: &str) -> Result<(Option<Command>, BTreeMap<String, String>)> {
    let mut params = BTreeMap::new();
    let mut command = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value, got '{line}'", lineno + 1)))?;
        let key = normalize_key(k);
        let value = v.trim().to_string();
        if key.is_empty() {
            return Err(usage(format!("config line {}: empty key", lineno + 1)));
        }
        if key == "command" {
            command = Some(value.parse()?);
        } else {
            params.insert(key, value);
        }
    }
    Ok((command, params))
}

pub fn read_config_file(path: &Path) -> Result<(Option<Command>, BTreeMap<String, String>)> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_text(&text)
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(normalize_key(key), value.to_string());
        self
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("parameter {key}: cannot parse '{raw}'"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| usage(format!("{} requires --{key}", self.command)))
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.params.get(key).map(String::as_str) {
            None | Some("false") => Ok(false),
            Some("true") | Some("") => Ok(true),
            Some(other) => Err(usage(format!("flag {key}: expected true or false, got '{other}'"))),
        }
    }

    pub fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| usage(format!("parameter {key}: cannot parse '{s}'")))
                })
                .collect(),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        match self.params.get("out") {
            Some(p) => PathBuf::from(p),
            None => std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
        }
    }

    /// `(n, k)` with the domain checked before any work is done.
    fn params(&self, lambda: f64) -> Result<ProblemParams> {
        let n = self.require("n")?;
        let k = self.require("k")?;
        Ok(ProblemParams::new(n, k, lambda)?)
    }
}

/// Files written by one run; `report` is the JSON report path.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub report: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir).map_err(|source| CliError::Output { path: dir.clone(), source })?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<fs::File>> {
        let path = self.dir.join(name);
        let file = fs::File::create(&path).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?;
        self.files.push(path);
        Ok(BufWriter::new(file))
    }

    fn io<T>(&self, name: &str, r: std::io::Result<T>) -> Result<T> {
        r.map_err(|source| CliError::Output {
            path: self.dir.join(name),
            source,
        })
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<PathBuf> {
        let mut out = self.create(name)?;
        let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
        self.io(name, writeln!(out, "{text}").and_then(|_| out.flush()))?;
        Ok(self.dir.join(name))
    }

    fn plot(&mut self, name: &str, header: &str, xs: &[f64], ys: &[f64]) -> Result<()> {
        let mut out = self.create(name)?;
        let mut body = format!("# {header}\n");
        for (x, y) in xs.iter().zip(ys) {
            body.push_str(&format!("{x:.12e} {y:.12e}\n"));
        }
        self.io(name, out.write_all(body.as_bytes()).and_then(|_| out.flush()))
    }

    fn field(&mut self, name: &str, f: &RadialField) -> Result<()> {
        let out = self.create(name)?;
        f.write_csv(out)?;
        Ok(())
    }
}

fn envelope(config: &ExperimentConfig, report: Value) -> Value {
    json!({
        "command": config.command,
        "config": config.params,
        "report": report,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Runs one experiment and writes its artifacts under the output directory.
pub fn run(config: &ExperimentConfig) -> Result<Artifacts> {
    match config.command {
        Command::Bubble => run_bubble(config),
        Command::Green => run_green(config),
        Command::Pohozaev => run_pohozaev(config),
        Command::Branch => run_branch(config),
        Command::Coercivity => run_coercivity(config),
        Command::Certify => run_certify(config),
    }
}

/// Writes `<command>_error.json` describing a failed run; best effort.
pub fn write_diagnostic(config: &ExperimentConfig, err: &CliError) -> Option<PathBuf> {
    let dir = config.out_dir();
    fs::create_dir_all(&dir).ok()?;
    let path = dir.join(format!("{}_error.json", config.command));
    let value = json!({
        "command": config.command,
        "config": config.params,
        "error": err.to_string(),
        "exit_code": err.exit_code(),
    });
    fs::write(&path, serde_json::to_string_pretty(&value).ok()? + "\n").ok()?;
    Some(path)
}

fn run_bubble(c: &ExperimentConfig) -> Result<Artifacts> {
    let p = c.params(0.0)?;
    let mu = c.get_or("mu", 1.0)?;
    let eps = c.get_or("eps", 1.0)?;
    let points = c.get_or("grid-points", 600)?;
    let r_max = c.get_or("r-max", 15.0)?;
    let stretch = c.get_or("stretch", 2.0)?;
    let r_lo = c.get_or("r-lo", 0.05)?;
    let r_hi = c.get_or("r-hi", 10.0)?;
    let b = BubbleProfile::new(p, mu, eps)?;
    let grid = Arc::new(RadialGrid::clustered(points, r_max, stretch)?);
    let residual = bubble_residual(&b, &grid, r_lo, r_hi)?;
    let masses = bubble_integrals(&p)?;
    let mut w = Writer::new(c.out_dir())?;
    let field = b.field(&grid)?;
    w.field("bubble.csv", &field)?;
    w.plot("bubble.dat", "r U(r)", field.nodes(), field.values())?;
    let report = json!({
        "ank": b.ank(),
        "residual": residual,
        "massU2s": masses.mass_u2s,
        "massU2sm1": masses.mass_u2sm1,
        "integration_radius": masses.radius,
        "tail_bound": masses.tail_bound,
    });
    let path = w.json("bubble.json", &envelope(c, report))?;
    Ok(Artifacts {
        report: path,
        files: w.files,
        summary: format!("ank = {:.12} residual = {residual:.3e}", b.ank()),
    })
}

fn potential(c: &ExperimentConfig, k: usize) -> Result<HardyPotential> {
    let mu: f64 = c.get_or("mu", 0.0)?;
    let v = if mu == 0.0 {
        HardyPotential::zero()
    } else {
        HardyPotential::inverse_power(mu, k)?
    };
    match c.get::<f64>("mollify")? {
        Some(eps) => Ok(mollify_potential(&v, eps)?),
        None => Ok(v),
    }
}

fn ball_grid(c: &ExperimentConfig, default_points: usize) -> Result<Arc<RadialGrid>> {
    let points = c.get_or("grid-points", default_points)?;
    let scheme = match c.params.get("grid").map(String::as_str) {
        None | Some("clustered") => GridScheme::Clustered,
        Some("uniform") => GridScheme::Uniform,
        Some(other) => return Err(usage(format!("grid must be clustered or uniform, got '{other}'"))),
    };
    Ok(Arc::new(make_grid(points, scheme, 1.0)?))
}

fn green_table(c: &ExperimentConfig, p: &ProblemParams, grid: &Arc<RadialGrid>, poles: &[f64]) -> Result<GreenTable> {
    match c.params.get("provenance").map(String::as_str) {
        None | Some("discrete") => {
            let v = potential(c, p.k())?;
            let op = assemble_operator(p, &v, grid)?;
            Ok(discrete_green_poles(&op, poles)?)
        }
        Some("boggio") => {
            if poles != [0.0] || p.lambda() != 0.0 || c.get_or("mu", 0.0)? != 0.0 {
                return Err(usage("boggio tables exist only for the centre pole with lambda = 0 and mu = 0"));
            }
            Ok(boggio_table(p, grid)?)
        }
        Some(other) => Err(usage(format!("provenance must be discrete or boggio, got '{other}'"))),
    }
}

fn run_green(c: &ExperimentConfig) -> Result<Artifacts> {
    let p = c.params(c.get_or("lambda", 0.0)?)?;
    let grid = ball_grid(c, 400)?;
    let poles = c.list("poles", &[0.0])?;
    let table = green_table(c, &p, &grid, &poles)?;
    let worst = match c.get::<f64>("gamma")? {
        Some(gamma) => Some(green_bound_certificate(&table, gamma, table.mu())?),
        None => None,
    };
    let mut w = Writer::new(c.out_dir())?;
    let out = w.create("green.csv")?;
    table.write_csv(out)?;
    for (i, col) in table.columns().iter().enumerate() {
        w.plot(&format!("green_pole{i}.dat"), &format!("r G(pole = {}, r)", col.pole), grid.nodes(), &col.values)?;
    }
    let mut report = to_value(&table.sidecar(worst));
    report["symmetry_defect"] = json!(table.symmetry_defect());
    let path = w.json("green.json", &envelope(c, report))?;
    Ok(Artifacts {
        report: path,
        files: w.files,
        summary: format!("{} poles on {} nodes", poles.len(), grid.len()),
    })
}

fn run_pohozaev(c: &ExperimentConfig) -> Result<Artifacts> {
    let p = c.params(0.0)?;
    let mut w = Writer::new(c.out_dir())?;
    if c.flag("dkn")? {
        let r = c.get_or("r", 0.5)?;
        let value = dkn(&p, r)?;
        let report = json!({ "r": r, "value": value });
        let path = w.json("pohozaev.json", &envelope(c, report))?;
        return Ok(Artifacts {
            report: path,
            files: w.files,
            summary: format!("D_r = {value:.3e} at r = {r}"),
        });
    }
    let outer = c.get_or("r", 1.0)?;
    let inner: Option<f64> = c.get("inner")?;
    let points = c.get_or("grid-points", 600)?;
    let (field, coupling) = match c.params.get("field").map(String::as_str) {
        None | Some("bubble") => {
            let b = BubbleProfile::standard(p)?;
            let grid = Arc::new(RadialGrid::clustered(points, 2.0 * outer, 2.0)?);
            (b.field(&grid)?, 1.0)
        }
        Some("fundamental") => {
            let a = inner.ok_or_else(|| usage("the fundamental solution needs --inner"))?;
            let grid = Arc::new(RadialGrid::annulus(points, GridScheme::Clustered, 0.5 * a, 2.0 * outer)?);
            let e = 2.0 * p.k() as f64 - p.n() as f64;
            (RadialField::from_fn(&grid, Parity::None, |r| r.powf(e))?, 0.0)
        }
        Some(other) => return Err(usage(format!("field must be bubble or fundamental, got '{other}'"))),
    };
    let report = pohozaev_residual(&field, coupling, outer, inner, &p)?;
    let mut value = to_value(&report);
    value["relative_residual"] = json!(report.relative_residual());
    let path = w.json("pohozaev.json", &envelope(c, value))?;
    Ok(Artifacts {
        report: path,
        files: w.files,
        summary: format!("residual = {:.3e} (tolerance {:.3e})", report.residual, report.tolerance),
    })
}

fn run_branch(c: &ExperimentConfig) -> Result<Artifacts> {
    let template = c.params(0.0)?;
    let start: f64 = c.require("lambda-start")?;
    let end: f64 = c.require("lambda-end")?;
    let steps: usize = c.get_or("steps", 10)?;
    if steps == 0 {
        return Err(usage("steps must be positive"));
    }
    let defaults = ContinuationOptions::default();
    let opts = ContinuationOptions {
        tol: c.get_or("tol", defaults.tol)?,
        grid_points: c.get_or("grid-points", defaults.grid_points)?,
        max_halvings: c.get_or("max-halvings", defaults.max_halvings)?,
    };
    let lambda1 = dirichlet_eigenvalue(template.n(), template.k(), &Arc::new(make_grid(opts.grid_points, GridScheme::Clustered, 1.0)?))?;
    // λ values are given in units of the principal eigenvalue
    let path: Vec<f64> = (0..=steps)
        .map(|i| lambda1 * (start + (end - start) * i as f64 / steps as f64))
        .collect();
    let p0 = template.with_lambda(path[0]);
    let seed = solve_from_bubbles(&p0, opts.grid_points, opts.tol)?;
    let branch = continuation(&template, &path, &seed.field, &opts)?;
    let mut w = Writer::new(c.out_dir().join("branch"))?;
    branch
        .write_fields(&w.dir)
        .map_err(|e| match e {
            polyharmonic::Error::Io(source) => CliError::Output { path: w.dir.clone(), source },
            other => other.into(),
        })?;
    let lambdas: Vec<f64> = branch.entries.iter().map(|e| e.lambda / lambda1).collect();
    let sups: Vec<f64> = branch.entries.iter().map(|e| e.sup_norm).collect();
    let l2: Vec<f64> = branch.entries.iter().map(|e| e.l2star_norm).collect();
    w.plot("sup_norm.dat", "lambda/lambda1 sup|u|", &lambdas, &sups)?;
    w.plot("l2star_norm.dat", "lambda/lambda1 |u|_{2*}", &lambdas, &l2)?;
    let mut report = to_value(&branch.manifest());
    report["lambda1"] = json!(lambda1);
    let path = w.json("manifest.json", &envelope(c, report))?;
    if branch.entries.is_empty() {
        let reason = branch.failure.map(|f| f.reason).unwrap_or_default();
        return Err(polyharmonic::Error::NotConverged {
            iterations: 0,
            detail: format!("first continuation step failed: {reason}"),
        }
        .into());
    }
    let summary = match &branch.failure {
        Some(f) => format!(
            "{} entries, sup growth {:.3}, stopped at lambda/lambda1 = {:.6}",
            branch.entries.len(),
            branch.sup_growth(),
            f.lambda / lambda1
        ),
        None => format!("{} entries, sup growth {:.3}", branch.entries.len(), branch.sup_growth()),
    };
    Ok(Artifacts {
        report: path,
        files: w.files,
        summary,
    })
}

fn run_coercivity(c: &ExperimentConfig) -> Result<Artifacts> {
    let p = c.params(0.0)?;
    let grid = ball_grid(c, 400)?;
    let v = potential(c, p.k())?;
    let h_value = match (c.get::<f64>("h")?, c.get::<f64>("h-lambda1")?) {
        (Some(_), Some(_)) => return Err(usage("give at most one of --h and --h-lambda1")),
        (Some(h), None) => h,
        (None, Some(f)) => f * dirichlet_eigenvalue(p.n(), p.k(), &grid)?,
        (None, None) => 0.0,
    };
    let h = RadialField::from_fn(&grid, Parity::Even, |_| h_value)?;
    let report = coercivity_margin(&p, &h, &v, &grid)?;
    let mut w = Writer::new(c.out_dir())?;
    let mut value = to_value(&report);
    value["h"] = json!(h_value);
    let path = w.json("coercivity.json", &envelope(c, value))?;
    Ok(Artifacts {
        report: path,
        files: w.files,
        summary: format!("margin = {:.6}", report.margin),
    })
}

fn run_certify(c: &ExperimentConfig) -> Result<Artifacts> {
    let p = c.params(c.get_or("lambda", 0.0)?)?;
    let (n, k) = (p.n(), p.k());
    let grid = ball_grid(c, 400)?;
    // default μ is half of the sufficient threshold 1/(2 C_H L) with L = 1
    let mu = match c.get::<f64>("mu")? {
        Some(mu) => mu,
        None => 0.25 / hardy_constant(n, k)?,
    };
    let v = if mu == 0.0 {
        HardyPotential::zero()
    } else {
        HardyPotential::inverse_power(mu, k)?
    };
    let poles = c.list("poles", &[0.5])?;
    let gammas = c.list("gamma", &[0.2, 0.5, 0.8])?;
    let op = assemble_operator(&p, &v, &grid)?;
    let table = discrete_green_poles(&op, &poles)?;
    let certificates = gammas
        .iter()
        .map(|&g| green_bound_certificate(&table, g, mu).map(|r| to_value(&r)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut report = json!({
        "mu": mu,
        "certificates": certificates,
    });
    if let Some(i) = c.get::<usize>("iterate")? {
        let seed: u64 = c
            .get("seed")?
            .ok_or_else(|| usage("Monte-Carlo iterates require an explicit --seed"))?;
        let pairs = random_pairs(n, c.get_or("pairs", 100)?, c.get_or("d-min", 0.02)?, c.get_or("d-max", 1.0)?, seed)?;
        let samples = c.get_or("samples", MIN_SAMPLES)?;
        let h = c.get_or("h", 1.0)?;
        report["giraud"] = to_value(&neumann_iterate(n, k, h, i, &pairs, samples, seed)?);
    }
    let mut w = Writer::new(c.out_dir())?;
    let out = w.create("certify_green.csv")?;
    table.write_csv(out)?;
    let path = w.json("certify.json", &envelope(c, report))?;
    Ok(Artifacts {
        report: path,
        files: w.files,
        summary: format!("{} certificates at mu = {mu}", gammas.len()),
    })
}
