//! Command-line front end.
//!
//! Every verb prints a JSON summary on stdout. Parameters come from flags,
//! optionally layered over a flat JSON file given with `--config`; any JSON
//! summary can be fed back as a config and reproduces itself.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::equilibria::{excited_state, relaxed_state, DEFAULT_ROOT_TOL};
use crate::error::{Error, Result};
use crate::kpp::{concavity_scan, kpp_verdict, p_threshold};
use crate::model::ModelParams;
use crate::pde::{
    measure_front_speed, simulate, stationarity_series, FieldState, GridConfig, InitialData, Mode,
    Scaling, SimulationConfig, Stencil,
};
use crate::reduced::{shoot_heteroclinic_with, ShootOptions};
use crate::spectra::{eigen_a, eigen_b, omega_thresholds, Spectrum};

const SNAPSHOT_INDEX: &str = "snapshots.csv";

#[derive(Debug, Parser)]
#[command(
    name = "riotwave",
    version,
    about = "Traveling fronts in a model of civil unrest"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Excited equilibrium (ubar, vbar).
    Equilibria(ParamArgs),
    /// Eigenvalues of the traveling-wave flow at A or B.
    Spectrum {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Point::B)]
        at: Point,
    },
    /// Shoot the front from A backward to B.
    Shoot {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        shot: ShotArgs,
        /// Directory for orbit.csv and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Concavity of the scalar source and the minimal front speed.
    KppCheck {
        #[command(flatten)]
        params: ParamArgs,
        /// Grid size of the concavity scan.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Random (gamma, beta, p) draws inside the sufficient region to test.
        #[arg(long, alias = "region_samples", default_value_t = 0)]
        region_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the finite-difference solver and write snapshots.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Front speed from a directory written by `simulate`.
    FrontSpeed {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        level: f64,
        /// Ignore snapshots before this time.
        #[arg(long, default_value_t = 0.0)]
        from: f64,
    },
    /// Shoot over a range of omega values.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        shot: ShotArgs,
        #[arg(long)]
        start: f64,
        #[arg(long)]
        stop: f64,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Spacing::Log)]
        scale: Spacing,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Point {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Spacing {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Frame {
    Lab,
    Moving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    System,
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StencilArg {
    DiffusionScaled,
    Consistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScalingArg {
    Bandwagon,
    Tension,
}

#[derive(Debug, Clone, Args)]
struct ParamArgs {
    /// Flat JSON file with any of the parameter keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d2: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct ShotArgs {
    #[arg(long, alias = "delta_seed")]
    delta_seed: Option<f64>,
    /// Capture radius relative to |B - A|.
    #[arg(long, alias = "capture_radius")]
    capture_radius: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct SimArgs {
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    dtau: Option<f64>,
    #[arg(long, alias = "t_end")]
    t_end: Option<f64>,
    /// Initial amplitude A of u = A exp(-k x); defaults to ubar.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Initial decay rate k.
    #[arg(long)]
    decay: Option<f64>,
    /// Initial uniform tension B.
    #[arg(long)]
    tension: Option<f64>,
    #[arg(long, alias = "snapshot_every")]
    snapshot_every: Option<usize>,
    #[arg(long, value_enum)]
    frame: Option<Frame>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    stencil: Option<StencilArg>,
    #[arg(long, value_enum)]
    scaling: Option<ScalingArg>,
    /// Level for the front position; defaults to ubar / 2.
    #[arg(long, allow_hyphen_values = true)]
    level: Option<f64>,
    /// Fit the front speed on snapshots from this time on; defaults to t_end / 2.
    #[arg(long, alias = "fit_from")]
    fit_from: Option<f64>,
}

/// Flat key-value configuration read from JSON.
struct Config(Map<String, Value>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self(Map::new()));
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
        match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(map)) => Ok(Self(map)),
            Ok(_) => Err(Error::Usage(format!(
                "{} is not a JSON object",
                path.display()
            ))),
            Err(e) => Err(Error::Usage(format!(
                "invalid JSON in {}: {e}",
                path.display()
            ))),
        }
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.0.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| Error::Usage(format!("config key `{key}` is not a number"))),
        }
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        match self.0.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|x| Some(x as usize))
                .ok_or_else(|| Error::Usage(format!("config key `{key}` is not an integer"))),
        }
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).and_then(Value::as_str)
    }

    fn pick(&self, flag: Option<f64>, key: &str, default: f64) -> Result<f64> {
        Ok(flag.or(self.f64(key)?).unwrap_or(default))
    }
}

fn parse_enum<T: ValueEnum>(s: &str, key: &str) -> Result<T> {
    T::from_str(s, true)
        .map_err(|_| Error::Usage(format!("config key `{key}` has unknown value `{s}`")))
}

impl ParamArgs {
    fn resolve(&self) -> Result<(ModelParams, Config)> {
        let cfg = Config::load(self.config.as_deref())?;
        let d = ModelParams::default();
        let params = ModelParams {
            gamma: cfg.pick(self.gamma, "gamma", d.gamma)?,
            beta: cfg.pick(self.beta, "beta", d.beta)?,
            p: cfg.pick(self.p, "p", d.p)?,
            omega: cfg.pick(self.omega, "omega", d.omega)?,
            alpha: cfg.pick(self.alpha, "alpha", d.alpha)?,
            c: cfg.pick(self.c, "c", d.c)?,
            d1: cfg.pick(self.d1, "d1", d.d1)?,
            d2: cfg.pick(self.d2, "d2", d.d2)?,
        };
        Ok((params, cfg))
    }
}

/// JSON formatter writing every float with 17 significant digits.
struct SigFigs;

impl serde_json::ser::Formatter for SigFigs {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs);
    value
        .serialize(&mut ser)
        .expect("serializing an in-memory value cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn params_object(p: &ModelParams) -> Map<String, Value> {
    match serde_json::to_value(p).expect("parameters serialize") {
        Value::Object(m) => m,
        _ => unreachable!("parameters serialize to an object"),
    }
}

fn merge(mut base: Map<String, Value>, extra: Value) -> Value {
    if let Value::Object(m) = extra {
        base.extend(m);
    }
    Value::Object(base)
}

fn complex_json(z: num_complex::Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn class_name(s: &Spectrum) -> String {
    format!("{:?}", s.classification)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

fn cmd_equilibria(args: &ParamArgs) -> Result<String> {
    let (params, _) = args.resolve()?;
    let b = excited_state(&params, DEFAULT_ROOT_TOL)?;
    let out = merge(
        params_object(&params),
        json!({ "u_bar": b.u_star, "v_bar": b.v_star, "residual": b.residual }),
    );
    Ok(to_json(&out))
}

fn cmd_spectrum(args: &ParamArgs, at: Point) -> Result<String> {
    let (params, _) = args.resolve()?;
    let spec = match at {
        Point::A => eigen_a(&params)?,
        Point::B => eigen_b(&params)?,
    };
    let (w1, w2, degenerate) = if params.gamma > 2.0 {
        let t = omega_thresholds(&params)?;
        (json!(t.omega1), json!(t.omega2), json!(t.degenerate))
    } else {
        (Value::Null, Value::Null, Value::Null)
    };
    let at_name = match at {
        Point::A => "A",
        Point::B => "B",
    };
    let point = match at {
        Point::A => relaxed_state(),
        Point::B => excited_state(&params, DEFAULT_ROOT_TOL)?,
    };
    let out = merge(
        params_object(&params),
        json!({
            "at": at_name,
            "u": point.u_star,
            "v": point.v_star,
            "lambda1": complex_json(spec.lambda1),
            "lambda2": complex_json(spec.lambda2),
            "class": class_name(&spec),
            "omega1": w1,
            "omega2": w2,
            "degenerate": degenerate,
        }),
    );
    Ok(to_json(&out))
}

fn shoot_options(shot: &ShotArgs, cfg: &Config) -> Result<ShootOptions> {
    let d = ShootOptions::default();
    Ok(ShootOptions {
        delta_seed: cfg.pick(shot.delta_seed, "delta_seed", d.delta_seed)?,
        capture_radius: cfg.pick(shot.capture_radius, "capture_radius", d.capture_radius)?,
        ..d
    })
}

fn cmd_shoot(args: &ParamArgs, shot: &ShotArgs, out: Option<&Path>) -> Result<String> {
    let (params, cfg) = args.resolve()?;
    let opts = shoot_options(shot, &cfg)?;
    let r = shoot_heteroclinic_with(&params, &opts)?;
    let (cu, cv) = match r.nullcline_crossing {
        Some([u, v]) => (json!(u), json!(v)),
        None => (Value::Null, Value::Null),
    };
    let summary = to_json(&merge(
        params_object(&params),
        json!({
            "delta_seed": opts.delta_seed,
            "capture_radius": opts.capture_radius,
            "connected": r.connected,
            "approach": format!("{:?}", r.approach),
            "distance_to_B": r.distance_to_b,
            "separation": r.separation,
            "tail_sign_changes": r.tail_sign_changes,
            "crossing_u": cu,
            "crossing_v": cv,
            "orbit_points": r.orbit.points.len(),
        }),
    ));
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let mut csv = String::from("xi,u,v\n");
        for p in &r.orbit.points {
            csv.push_str(&format!(
                "{},{},{}\n",
                num(p.xi),
                num(p.state[0]),
                num(p.state[1])
            ));
        }
        write_file(&dir.join("orbit.csv"), &csv)?;
        write_file(&dir.join("summary.json"), &summary)?;
    }
    Ok(summary)
}

/// Draws `(gamma, beta, p)` inside the sufficient region and counts draws
/// whose scan is not concave.
fn region_soundness(n: usize, seed: u64, samples: usize) -> Result<(usize, Option<[f64; 3]>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    let mut first = None;
    for _ in 0..n {
        let gamma = rng.gen_range(2.0..20.0);
        let beta = rng.gen_range(0.5..30.0);
        let p = p_threshold(beta)? * rng.gen_range(1.0..4.0);
        let scan = concavity_scan(&ModelParams::new(gamma, beta, p), samples)?;
        if !scan.is_concave {
            bad += 1;
            first.get_or_insert([gamma, beta, p]);
        }
    }
    Ok((bad, first))
}

fn cmd_kpp(args: &ParamArgs, samples: usize, region_samples: usize, seed: u64) -> Result<String> {
    let (params, _) = args.resolve()?;
    params.validate_analysis()?;
    let v = kpp_verdict(&params, samples)?;
    let mut extra = json!({
        "p_threshold": v.p_threshold,
        "guaranteed": v.guaranteed_by_region,
        "numeric_concave": v.numeric_concave,
        "max_f2": v.max_f2,
        "min_speed": v.min_speed,
    });
    if region_samples > 0 {
        let (bad, first) = region_soundness(region_samples, seed, samples)?;
        let m = extra.as_object_mut().expect("object literal");
        m.insert("seed".into(), json!(seed));
        m.insert("region_samples".into(), json!(region_samples));
        m.insert("region_violations".into(), json!(bad));
        m.insert("first_violation".into(), json!(first));
    }
    Ok(to_json(&merge(params_object(&params), extra)))
}

struct Fit {
    level: Option<f64>,
    from: f64,
}

fn sim_config(
    params: &ModelParams,
    sim: &SimArgs,
    cfg: &Config,
) -> Result<(SimulationConfig, Fit)> {
    let dg = GridConfig::default();
    let grid = GridConfig {
        length: cfg.pick(sim.length, "length", dg.length)?,
        nx: sim.nx.or(cfg.usize("nx")?).unwrap_or(dg.nx),
        dtau: cfg.pick(sim.dtau, "dtau", dg.dtau)?,
        t_end: cfg.pick(sim.t_end, "t_end", dg.t_end)?,
    };
    grid.validate()?;
    let frame = match sim.frame {
        Some(f) => f,
        None => cfg
            .str("frame")
            .map(|s| parse_enum(s, "frame"))
            .transpose()?
            .unwrap_or(Frame::Moving),
    };
    let mut params = *params;
    if frame == Frame::Lab {
        params.c = 0.0;
    }
    let ubar = excited_state(&params.with_speed(1.0), DEFAULT_ROOT_TOL)
        .ok()
        .map(|b| b.u_star);
    let amplitude = match sim.amplitude.or(cfg.f64("amplitude")?) {
        Some(a) => a,
        None => ubar.ok_or(Error::NoPositiveEquilibrium {
            gamma: params.gamma,
        })?,
    };
    let initial = InitialData {
        amplitude,
        decay: cfg.pick(sim.decay, "decay", 5.0)?,
        tension: cfg.pick(sim.tension, "tension", 1.0)?,
    };
    let mode = match sim.mode {
        Some(ModeArg::Scalar) => Mode::Scalar,
        Some(ModeArg::System) => Mode::System,
        None => match cfg.str("mode") {
            Some(s) => match parse_enum::<ModeArg>(s, "mode")? {
                ModeArg::Scalar => Mode::Scalar,
                ModeArg::System => Mode::System,
            },
            None => Mode::System,
        },
    };
    let stencil = match sim.stencil.or(cfg
        .str("stencil")
        .map(|s| parse_enum(s, "stencil"))
        .transpose()?)
    {
        Some(StencilArg::Consistent) => Stencil::Consistent,
        _ => Stencil::DiffusionScaled,
    };
    let scaling = match sim.scaling.or(cfg
        .str("scaling")
        .map(|s| parse_enum(s, "scaling"))
        .transpose()?)
    {
        Some(ScalingArg::Tension) => Scaling::Tension,
        _ => Scaling::Bandwagon,
    };
    let snapshot_every = sim
        .snapshot_every
        .or(cfg.usize("snapshot_every")?)
        .unwrap_or(1000);
    let fit = Fit {
        level: sim.level.or(cfg.f64("level")?).or(ubar.map(|u| 0.5 * u)),
        from: cfg.pick(sim.fit_from, "fit_from", 0.5 * grid.t_end)?,
    };
    Ok((
        SimulationConfig {
            params,
            grid,
            initial,
            snapshot_every,
            mode,
            stencil,
            scaling,
        },
        fit,
    ))
}

fn enum_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

fn snapshot_csv(s: &FieldState) -> String {
    let mut csv = String::from("x,u,v\n");
    for i in 0..s.len() {
        csv.push_str(&format!(
            "{},{},{}\n",
            num(s.x(i)),
            num(s.u[i]),
            num(s.v[i])
        ));
    }
    csv
}

fn cmd_simulate(
    args: &ParamArgs,
    sim: &SimArgs,
    out: Option<&Path>,
) -> Result<(String, Vec<String>)> {
    let (params, cfg) = args.resolve()?;
    let (config, fit) = sim_config(&params, sim, &cfg)?;
    let run = simulate(&config)?;
    let late: Vec<FieldState> = run
        .snapshots
        .iter()
        .filter(|s| s.tau >= fit.from)
        .cloned()
        .collect();
    let front = fit.level.and_then(|l| measure_front_speed(&late, l).ok());
    let series = stationarity_series(&run.snapshots)?;
    let mode = match config.mode {
        Mode::System => ModeArg::System,
        Mode::Scalar => ModeArg::Scalar,
    };
    let stencil = match config.stencil {
        Stencil::DiffusionScaled => StencilArg::DiffusionScaled,
        Stencil::Consistent => StencilArg::Consistent,
    };
    let scaling = match config.scaling {
        Scaling::Bandwagon => ScalingArg::Bandwagon,
        Scaling::Tension => ScalingArg::Tension,
    };
    let frame = if config.params.c == 0.0 {
        Frame::Lab
    } else {
        Frame::Moving
    };
    let summary = to_json(&merge(
        params_object(&config.params),
        json!({
            "length": config.grid.length,
            "nx": config.grid.nx,
            "dtau": config.grid.dtau,
            "t_end": config.grid.t_end,
            "amplitude": config.initial.amplitude,
            "decay": config.initial.decay,
            "tension": config.initial.tension,
            "snapshot_every": config.snapshot_every,
            "frame": enum_name(&frame),
            "mode": enum_name(&mode),
            "stencil": enum_name(&stencil),
            "scaling": enum_name(&scaling),
            "level": fit.level,
            "fit_from": fit.from,
            "front_speed": front.as_ref().map(|f| f.speed),
            "fit_residual": front.as_ref().map(|f| f.fit_residual),
            "stationarity_residual_series": series,
            "min_u": run.min_u,
            "min_v": run.min_v,
            "snapshots": run.snapshots.len(),
            "warnings": run.warnings,
        }),
    ));
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let mut index = String::from("index,tau,file\n");
        for (k, s) in run.snapshots.iter().enumerate() {
            let name = format!("snapshot_{k:05}.csv");
            write_file(&dir.join(&name), &snapshot_csv(s))?;
            index.push_str(&format!("{k},{},{name}\n", num(s.tau)));
        }
        write_file(&dir.join(SNAPSHOT_INDEX), &index)?;
        write_file(&dir.join("summary.json"), &summary)?;
    }
    Ok((summary, run.warnings))
}

fn parse_f64(field: &str, path: &Path) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("malformed number `{field}` in {}", path.display())))
}

/// Reads the snapshots written by `simulate`.
pub fn read_snapshots(dir: &Path) -> Result<Vec<FieldState>> {
    let index_path = dir.join(SNAPSHOT_INDEX);
    let index = fs::read_to_string(&index_path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", index_path.display())))?;
    let mut snaps = Vec::new();
    for line in index.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Usage(format!("malformed index line `{line}`")));
        }
        let tau = parse_f64(cols[1], &index_path)?;
        let path = dir.join(cols[2].trim());
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
        let (mut x, mut u, mut v) = (Vec::new(), Vec::new(), Vec::new());
        for row in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = row.split(',').collect();
            if f.len() != 3 {
                return Err(Error::Usage(format!(
                    "malformed row `{row}` in {}",
                    path.display()
                )));
            }
            x.push(parse_f64(f[0], &path)?);
            u.push(parse_f64(f[1], &path)?);
            v.push(parse_f64(f[2], &path)?);
        }
        if x.len() < 2 {
            return Err(Error::Usage(format!(
                "{} holds fewer than two nodes",
                path.display()
            )));
        }
        let dx = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
        snaps.push(FieldState { u, v, tau, dx });
    }
    Ok(snaps)
}

fn cmd_front_speed(dir: &Path, level: f64, from: f64) -> Result<String> {
    let snaps: Vec<FieldState> = read_snapshots(dir)?
        .into_iter()
        .filter(|s| s.tau >= from)
        .collect();
    let f = measure_front_speed(&snaps, level)?;
    Ok(to_json(&json!({
        "level": level,
        "from": from,
        "snapshots": snaps.len(),
        "speed": f.speed,
        "intercept": f.intercept,
        "fit_residual": f.fit_residual,
    })))
}

/// `count` values from `start` to `stop` inclusive.
fn range_values(start: f64, stop: f64, count: usize, scale: Spacing) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Usage("sweep range is empty (count = 0)".into()));
    }
    if !(start.is_finite() && stop.is_finite()) || start > stop {
        return Err(Error::Usage(format!(
            "sweep needs start <= stop, got {start} and {stop}"
        )));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    match scale {
        Spacing::Lin => Ok((0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect()),
        Spacing::Log => {
            if !(start > 0.0) {
                return Err(Error::Usage("log sweep needs start > 0".into()));
            }
            let (a, b) = (start.log10(), stop.log10());
            Ok((0..count)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
                .collect())
        }
    }
}

struct SweepRow {
    omega: f64,
    connected: bool,
    approach: String,
    crossing: Option<[f64; 2]>,
    tail_sign_changes: usize,
}

fn cmd_sweep(
    args: &ParamArgs,
    shot: &ShotArgs,
    (start, stop, count, scale): (f64, f64, usize, Spacing),
    out: Option<&Path>,
) -> Result<String> {
    let (params, cfg) = args.resolve()?;
    let opts = shoot_options(shot, &cfg)?;
    let omegas = range_values(start, stop, count, scale)?;
    let rows = omegas
        .par_iter()
        .map(|&omega| {
            let r = shoot_heteroclinic_with(&params.with_omega(omega), &opts)?;
            Ok(SweepRow {
                omega,
                connected: r.connected,
                approach: format!("{:?}", r.approach),
                crossing: r.nullcline_crossing,
                tail_sign_changes: r.tail_sign_changes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv =
        String::from("omega,connected,approach,crossing_u,crossing_v,tail_sign_changes\n");
    for r in &rows {
        let (cu, cv) = match r.crossing {
            Some([u, v]) => (num(u), num(v)),
            None => (String::new(), String::new()),
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            num(r.omega),
            r.connected,
            r.approach,
            cu,
            cv,
            r.tail_sign_changes
        ));
    }
    if let Some(path) = out {
        write_file(path, &csv)?;
        return Ok(to_json(&merge(
            params_object(&params),
            json!({ "rows": rows.len(), "out": path.display().to_string() }),
        )));
    }
    Ok(csv.trim_end().to_string())
}

fn dispatch(cli: Cli) -> Result<(String, Vec<String>)> {
    let text = match cli.command {
        Command::Equilibria(p) => cmd_equilibria(&p),
        Command::Spectrum { params, at } => cmd_spectrum(&params, at),
        Command::Shoot { params, shot, out } => cmd_shoot(&params, &shot, out.as_deref()),
        Command::KppCheck {
            params,
            samples,
            region_samples,
            seed,
        } => cmd_kpp(&params, samples, region_samples, seed),
        Command::Simulate { params, sim, out } => {
            return cmd_simulate(&params, &sim, out.as_deref())
        }
        Command::FrontSpeed { dir, level, from } => cmd_front_speed(&dir, level, from),
        Command::Sweep {
            params,
            shot,
            start,
            stop,
            count,
            scale,
            out,
        } => cmd_sweep(&params, &shot, (start, stop, count, scale), out.as_deref()),
    }?;
    Ok((text, Vec::new()))
}

/// Parses `argv` (including the program name), runs the verb and returns the
/// process exit status: 0 on success, 1 on model or numerical errors, 2 on
/// usage errors.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli) {
        Ok((text, warnings)) => {
            for w in warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            let _ = writeln!(stdout, "{text}");
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Usage(_) => 2,
                _ => 1,
            }
        }
    }
}
