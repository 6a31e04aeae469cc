//! Command-line front end.
//!
//! Every subcommand writes its result to `--out` (atomically, through a
//! temporary file in the same directory) or to standard output. Exit codes:
//! 0 on success, 2 on usage errors, 1 on numerical failures, which also
//! print a JSON diagnostic on standard error.

mod svg;

use std::ffi::OsString;
use std::f64::consts::FRAC_PI_2;
use std::io::{Read as _, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::asymptotics::{fit, predict, verify, verify_model, Tolerances, VerifyReport, Window};
use crate::bifurcation::{branches_csv, stability_scan, transcritical_branches};
use crate::compactify::DiskPoint;
use crate::equilibria::{find, list_equilibria, EqId, Equilibrium, StabilityClass};
use crate::error::Error;
use crate::field::{PhasePoint, SystemKind};
use crate::integrate::{connection_census, CensusOptions, ConnectionCensus};
use crate::integrate::{endpoint_of, integrate, shoot, BranchSelector, Controls, Direction, Manifold, Start};
use crate::params::Params;
use crate::profile::{map_profile, End, MapTarget, Variable, WaveProfile, WaveType};
use crate::profiles::{classify_wave, wave_profile, ProfileOptions};

#[derive(Parser, Debug)]
#[command(name = "travwave", version, about = "Phase-plane analysis of traveling waves of a degenerate parabolic equation")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct Model {
    /// Exponent p (p = 1 only in `bifurcate`).
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Wave speed.
    #[arg(long)]
    c: f64,
    #[arg(long, default_value_t = 0)]
    delta: i64,
}

#[derive(Args, Debug, Clone, Copy, Default)]
struct Numerics {
    /// Seed offset of shots from equilibria.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    tol_abs: Option<f64>,
    #[arg(long)]
    tol_rel: Option<f64>,
    /// Time budget per frame segment.
    #[arg(long)]
    max_time: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    #[value(name = "U")]
    U,
    #[value(name = "V")]
    V,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EndArg {
    Left,
    Right,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ManifoldArg {
    Unstable,
    Stable,
    CenterUnstable,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Equilibria with their eigenvalues and classes.
    Equilibria {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        output: Output,
    },
    /// SVG phase portrait on the Poincaré disk.
    Portrait {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        num: Numerics,
        #[command(flatten)]
        output: Output,
        /// Seeds per disk quadrant with phi >= 0.
        #[arg(long, default_value_t = 16)]
        seeds: usize,
    },
    /// Connecting-orbit census, or a single shot with `--from`.
    Connect {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        num: Numerics,
        #[command(flatten)]
        output: Output,
        /// Equilibrium to shoot from (E0..E4).
        #[arg(long)]
        from: Option<String>,
        /// Angle selector in [0, pi/2] for two-dimensional manifolds.
        #[arg(long)]
        branch_angle: Option<f64>,
        #[arg(long, value_enum)]
        manifold: Option<ManifoldArg>,
        /// Directory for the census witness CSVs; defaults to the directory of `--out`.
        #[arg(long)]
        witness_dir: Option<PathBuf>,
    },
    /// Profile of one wave type: CSV samples or classification JSON.
    Profile {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        num: Numerics,
        #[command(flatten)]
        output: Output,
        /// Wave type label (I..V, i..v or A..E).
        #[arg(long = "type")]
        wave: String,
        #[arg(long, value_enum)]
        target: Option<Target>,
    },
    /// Asymptotic verification report at the ends of a profile.
    Asym {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        num: Numerics,
        #[command(flatten)]
        output: Output,
        #[arg(long = "type")]
        wave: String,
        #[arg(long, value_enum, default_value_t = EndArg::Both)]
        end: EndArg,
        #[arg(long, value_enum)]
        target: Option<Target>,
        /// Fit window `a,b` in xi instead of the automatic one.
        #[arg(long)]
        window: Option<String>,
    },
    /// Transcritical branches at gamma = 0, or the stability table with `--table`.
    Bifurcate {
        #[command(flatten)]
        output: Output,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        gamma_min: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        gamma_max: f64,
        #[arg(long, default_value_t = 201)]
        steps: usize,
        #[arg(long)]
        table: bool,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75, 2.0, 3.0])]
        p_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        mu_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        c_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0, 1])]
        delta_list: Vec<i64>,
    },
    /// Maps a profile CSV from u to U, or from u or U to V.
    Transform {
        #[arg(long)]
        p: f64,
        /// Input profile CSV (`-` for standard input).
        #[arg(long)]
        input: PathBuf,
        /// Variable of the input: u or U.
        #[arg(long, default_value = "u")]
        source: String,
        #[arg(long, value_enum)]
        target: Target,
        #[command(flatten)]
        output: Output,
    },
}

/// Failure of a subcommand and its exit code.
enum Failure {
    Usage(String),
    Numerical(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParam(_) | Error::CriticalExponent | Error::Domain(_) => Failure::Usage(e.to_string()),
            Error::InsufficientData(_) | Error::Numerical(_) | Error::Io(_) => {
                let kind = match e {
                    Error::InsufficientData(_) => "insufficient_data",
                    Error::Io(_) => "io",
                    _ => "numerical",
                };
                Failure::Numerical(json!({"error": kind, "message": e.to_string()}))
            }
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Numerical(v)) => {
            eprintln!("{v}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Equilibria { model, output } => cmd_equilibria(model, &output),
        Command::Portrait { model, num, output, seeds } => cmd_portrait(model, num, &output, seeds),
        Command::Connect { model, num, output, from, branch_angle, manifold, witness_dir } => {
            cmd_connect(model, num, &output, from, branch_angle, manifold, witness_dir)
        }
        Command::Profile { model, num, output, wave, target } => cmd_profile(model, num, &output, &wave, target),
        Command::Asym { model, num, output, wave, end, target, window } => {
            cmd_asym(model, num, &output, &wave, end, target, window)
        }
        Command::Bifurcate { output, c, gamma_min, gamma_max, steps, table, p_list, mu_list, c_list, delta_list } => {
            if table {
                let t = stability_scan(&p_list, &mu_list, &c_list, &delta_list)?;
                match output.format.unwrap_or(Format::Csv) {
                    Format::Csv => emit(&output, &t.to_csv()),
                    Format::Json => emit(&output, &pretty(&t.to_json())),
                }
            } else {
                let (z, s) = transcritical_branches(c, (gamma_min, gamma_max), steps)?;
                match output.format.unwrap_or(Format::Csv) {
                    Format::Csv => emit(&output, &branches_csv(&[&z, &s])),
                    Format::Json => {
                        let v = serde_json::to_value([&z, &s]).map_err(|e| Error::Numerical(e.to_string()))?;
                        emit(&output, &pretty(&v))
                    }
                }
            }
        }
        Command::Transform { p, input, source, target, output } => cmd_transform(p, &input, &source, target, &output),
    }
}

fn params(m: Model) -> std::result::Result<Params, Failure> {
    Ok(Params::new(m.p, m.mu, m.delta, m.c)?)
}

fn apply(ctl: &mut Controls, num: Numerics) -> CmdResult {
    for (name, v) in [("tol-abs", num.tol_abs), ("tol-rel", num.tol_rel), ("max-time", num.max_time), ("eps", num.eps)] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::Usage(format!("--{name} must be positive, got {v}")));
            }
        }
    }
    if let Some(a) = num.tol_abs {
        ctl.atol = a;
    }
    if let Some(r) = num.tol_rel {
        ctl.rtol = r;
    }
    if let Some(t) = num.max_time {
        ctl.max_time = t;
    }
    Ok(())
}

fn census_options(num: Numerics) -> std::result::Result<CensusOptions, Failure> {
    let mut o = CensusOptions::default();
    apply(&mut o.controls, num)?;
    if let Some(e) = num.eps {
        o.eps = e;
    }
    Ok(o)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Writes through a temporary sibling file and renames it into place.
fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

fn emit(output: &Output, content: &str) -> CmdResult {
    match &output.out {
        Some(path) => write_atomic(path, content).map_err(|e| Failure::from(Error::from(e))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(content.as_bytes()).and_then(|_| out.flush()) {
                // a closed reader (e.g. `| head`) is not a failure of the run
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::from(Error::from(e))),
                _ => Ok(()),
            }
        }
    }
}

fn unsupported(f: Format, what: &str) -> Failure {
    Failure::Usage(format!("{what} does not support --format {f:?}").to_lowercase())
}

fn cmd_equilibria(model: Model, output: &Output) -> CmdResult {
    let pr = params(model)?;
    let eqs = list_equilibria(&pr)?;
    match output.format.unwrap_or(Format::Json) {
        Format::Json => emit(output, &pretty(&Value::Array(eqs.iter().map(|e| e.to_json()).collect()))),
        Format::Csv => {
            let mut s = String::from("id,frame,loc_a,loc_b,eig1_re,eig1_im,eig2_re,eig2_im,class\n");
            for e in &eqs {
                let [a, b] = e.eigenvalues;
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    e.id.name(),
                    e.frame.name(),
                    e.location.0,
                    e.location.1,
                    a.re,
                    a.im,
                    b.re,
                    b.im,
                    e.klass.name()
                ));
            }
            emit(output, &s)
        }
    }
}

/// Seeds in the two disk quadrants with `phi >= 0`, as plane points.
fn portrait_seeds(per_quadrant: usize) -> Vec<PhasePoint> {
    let side = (per_quadrant as f64).sqrt().ceil().max(1.0) as usize;
    let mut out = Vec::new();
    for sign in [1.0, -1.0] {
        let mut n = 0;
        'grid: for i in 0..side {
            for j in 0..side {
                if n == per_quadrant {
                    break 'grid;
                }
                let r = 0.95 * (i as f64 + 0.5) / side as f64;
                let th = sign * FRAC_PI_2 * (j as f64 + 0.5) / side as f64;
                let (y1, y2) = (r * th.cos(), r * th.sin());
                let s = (1.0 - r * r).sqrt();
                out.push(PhasePoint::new(y1 / s, y2 / s));
                n += 1;
            }
        }
    }
    out
}

fn cmd_portrait(model: Model, num: Numerics, output: &Output, seeds: usize) -> CmdResult {
    if let Some(f) = output.format {
        return Err(unsupported(f, "portrait"));
    }
    let pr = params(model)?;
    let eqs = list_equilibria(&pr)?;
    let mut ctl = Controls { max_time: 100.0, max_steps: 50_000, ..Controls::default() };
    apply(&mut ctl, num)?;
    let mut orbits: Vec<Vec<DiskPoint>> = Vec::new();
    for pt in portrait_seeds(seeds) {
        for dir in [Direction::Forward, Direction::Backward] {
            // seeds whose orbit cannot be followed are left out of the picture
            if let Ok(tr) = integrate(&pr, SystemKind::Desingularized, Start::Plane(pt), dir, &ctl) {
                orbits.push(tr.disk_points());
            }
        }
    }
    let mut witnesses = Vec::new();
    let mut title = format!("p={} mu={} c={} delta={}", pr.p, pr.mu, pr.c, pr.delta);
    if pr.is_subcritical() {
        let census = connection_census(&pr, &census_options(num)?)?;
        for r in &census.records {
            witnesses.push((
                format!("{} -> {} {}", r.from.name(), r.to.name(), r.multiplicity.name()),
                r.witness.disk_points(),
            ));
        }
    } else {
        title.push_str(" (no census for p > 1)");
    }
    emit(output, &svg::portrait(&title, &eqs, &orbits, &witnesses))
}

fn witness_name(census: &ConnectionCensus, i: usize) -> String {
    let r = &census.records[i];
    format!("witness_{i}_{}_{}.csv", r.from.name(), r.to.name())
}

fn cmd_connect(
    model: Model,
    num: Numerics,
    output: &Output,
    from: Option<String>,
    branch_angle: Option<f64>,
    manifold: Option<ManifoldArg>,
    witness_dir: Option<PathBuf>,
) -> CmdResult {
    let pr = params(model)?;
    let opts = census_options(num)?;
    let Some(from) = from else {
        if branch_angle.is_some() || manifold.is_some() {
            return Err(Failure::Usage("--branch-angle and --manifold need --from".into()));
        }
        if let Some(f) = output.format.filter(|&f| f != Format::Json) {
            return Err(unsupported(f, "the census"));
        }
        let census = connection_census(&pr, &opts)?;
        let dir = witness_dir.or_else(|| {
            output.out.as_ref().map(|p| p.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(".")))
        });
        let mut v = census.to_json(|i| witness_name(&census, i));
        match &dir {
            Some(d) => {
                for (i, r) in census.records.iter().enumerate() {
                    let path = d.join(witness_name(&census, i));
                    write_atomic(&path, &r.witness.to_csv()).map_err(|e| Failure::from(Error::from(e)))?;
                }
            }
            None => {
                // no directory to hold the witnesses
                for rec in v.as_array_mut().unwrap() {
                    rec["witness_file"] = Value::Null;
                }
            }
        }
        return emit(output, &pretty(&v));
    };
    let id = EqId::parse(&from).ok_or_else(|| Failure::Usage(format!("unknown equilibrium {from}")))?;
    let eqs = list_equilibria(&pr)?;
    let eq: &Equilibrium = find(&eqs, id).ok_or_else(|| Failure::Usage(format!("{from} is not an equilibrium here")))?;
    let manifold = match manifold {
        Some(ManifoldArg::Unstable) => Manifold::Unstable,
        Some(ManifoldArg::Stable) => Manifold::Stable,
        Some(ManifoldArg::CenterUnstable) => Manifold::CenterUnstable,
        None => match eq.klass {
            StabilityClass::Sink | StabilityClass::StableNode | StabilityClass::StableFocus => Manifold::Stable,
            StabilityClass::CenterManifold => Manifold::CenterUnstable,
            _ => Manifold::Unstable,
        },
    };
    let branch = match branch_angle {
        Some(a) if (0.0..=FRAC_PI_2).contains(&a) => BranchSelector::Angle(a),
        Some(a) => return Err(Failure::Usage(format!("--branch-angle must lie in [0, pi/2], got {a}"))),
        None => BranchSelector::Positive,
    };
    let eps = if manifold == Manifold::CenterUnstable { opts.eps_center } else { opts.eps };
    let tr = shoot(&pr, eq, manifold, branch, num.eps.unwrap_or(eps), &opts.controls)?;
    match output.format.unwrap_or(Format::Csv) {
        Format::Csv => emit(output, &tr.to_csv()),
        Format::Json => {
            let to = endpoint_of(&tr, &pr, opts.controls.prox);
            let events: Vec<Value> =
                tr.events.iter().map(|e| json!({"kind": format!("{:?}", e.kind), "t": e.t, "index": e.index})).collect();
            emit(
                output,
                &pretty(&json!({
                    "from": id.name(),
                    "to": to.map(|e| e.name()),
                    "terminal": tr.terminal.name(),
                    "samples": tr.samples.len(),
                    "events": events,
                })),
            )
        }
    }
}

fn parse_type(s: &str) -> std::result::Result<(WaveType, Variable), Failure> {
    WaveType::parse(s).ok_or_else(|| Failure::Usage(format!("unknown wave type {s}")))
}

fn variable_of(label: Variable, target: Option<Target>) -> Variable {
    match target {
        Some(Target::U) => Variable::Big,
        Some(Target::V) => Variable::Pme,
        None => label,
    }
}

fn to_variable(profile: &WaveProfile, var: Variable, pr: &Params) -> crate::error::Result<WaveProfile> {
    match var {
        Variable::Small => Ok(profile.clone()),
        Variable::Big => map_profile(profile, MapTarget::UFromU, pr),
        Variable::Pme => map_profile(&map_profile(profile, MapTarget::UFromU, pr)?, MapTarget::VFromU, pr),
    }
}

/// Classified `u`-profile of the requested type; unclassified profiles are numerical failures.
fn classified_profile(pr: &Params, ty: WaveType, num: Numerics) -> std::result::Result<WaveProfile, Failure> {
    let mut opts = ProfileOptions::default();
    apply(&mut opts.controls, num)?;
    opts.census = census_options(num)?;
    let (mut prof, _) = wave_profile(pr, ty, &opts)?;
    let cl = classify_wave(&mut prof, pr);
    if cl.wave_type != Some(ty) {
        return Err(Failure::Numerical(json!({
            "error": "unclassified",
            "message": format!("profile of type {} did not classify", ty.label(Variable::Small)),
            "classification": cl.to_json(),
        })));
    }
    Ok(prof)
}

fn cmd_profile(model: Model, num: Numerics, output: &Output, wave: &str, target: Option<Target>) -> CmdResult {
    let pr = params(model)?;
    let (ty, label_var) = parse_type(wave)?;
    let var = variable_of(label_var, target);
    let mut opts = ProfileOptions::default();
    apply(&mut opts.controls, num)?;
    opts.census = census_options(num)?;
    let (mut prof, _) = wave_profile(&pr, ty, &opts)?;
    let mut cl = classify_wave(&mut prof, &pr);
    if cl.wave_type != Some(ty) {
        return Err(Failure::Numerical(json!({"error": "unclassified", "classification": cl.to_json()})));
    }
    let out = to_variable(&prof, var, &pr)?;
    match output.format.unwrap_or(Format::Csv) {
        Format::Csv => emit(output, &out.to_csv()),
        Format::Json => {
            cl.variable = var;
            emit(output, &pretty(&cl.to_json()))
        }
    }
}

fn parse_window(s: &str) -> std::result::Result<Window, Failure> {
    let bad = || Failure::Usage(format!("--window expects a,b with a < b, got {s}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if a < b {
        Ok(Window::Xi(a, b))
    } else {
        Err(bad())
    }
}

fn cmd_asym(
    model: Model,
    num: Numerics,
    output: &Output,
    wave: &str,
    end: EndArg,
    target: Option<Target>,
    window: Option<String>,
) -> CmdResult {
    if let Some(f) = output.format.filter(|&f| f != Format::Json) {
        return Err(unsupported(f, "asym"));
    }
    let pr = params(model)?;
    let (ty, label_var) = parse_type(wave)?;
    let var = variable_of(label_var, target);
    let window = window.as_deref().map(parse_window).transpose()?;
    let prof = to_variable(&classified_profile(&pr, ty, num)?, var, &pr)?;
    let ends = match end {
        EndArg::Left => vec![End::Left],
        EndArg::Right => vec![End::Right],
        EndArg::Both => vec![End::Left, End::Right],
    };
    let tol = Tolerances::default();
    let mut reports: Vec<VerifyReport> = Vec::new();
    for e in ends {
        match window {
            None => reports.extend(verify(&prof, e, &pr, tol)?),
            Some(w) => {
                for m in predict(&pr, ty, var, e)? {
                    reports.push(verify_model(&fit(&prof, &m, w, &pr)?, tol)?);
                }
            }
        }
    }
    emit(output, &pretty(&Value::Array(reports.iter().map(|r| r.to_json()).collect())))
}

fn cmd_transform(p: f64, input: &Path, source: &str, target: Target, output: &Output) -> CmdResult {
    if let Some(f) = output.format.filter(|&f| f != Format::Csv) {
        return Err(unsupported(f, "transform"));
    }
    // the maps only involve p
    let pr = Params::new(p, 0.0, 0, 1.0)?;
    let text = if input == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::from(Error::from(e)))?;
        s
    } else {
        std::fs::read_to_string(input).map_err(|e| Failure::from(Error::from(e)))?
    };
    let src = match source {
        "u" => Variable::Small,
        "U" => Variable::Big,
        other => return Err(Failure::Usage(format!("--source must be u or U, got {other}"))),
    };
    let prof = WaveProfile::from_csv(&text, src)?;
    let out = match (src, target) {
        (Variable::Small, Target::U) => map_profile(&prof, MapTarget::UFromU, &pr)?,
        (Variable::Small, Target::V) => to_variable(&prof, Variable::Pme, &pr)?,
        (Variable::Big, Target::V) => map_profile(&prof, MapTarget::VFromU, &pr)?,
        _ => return Err(Failure::Usage("the input is already in U".into())),
    };
    emit(output, &out.to_csv())
}
