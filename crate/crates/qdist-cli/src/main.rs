mod output;

use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qdist_core::accinfo::{self, BinaryChannel, BoundKind, SweepOptions, SWEEP_KINDS};
use qdist_core::broadcast::{build_commuting_broadcaster, can_broadcast, cloning_feasible};
use qdist_core::kullback::kullback_bounds;
use qdist_core::linops::commutator_norm;
use qdist_core::oracle::{optimize_povm, optimize_projective_2d, Functional, FunctionalKind, DEFAULT_RESTARTS};
use qdist_core::qdisc::{fidelity_q, helstrom};
use qdist_core::states::{partial_trace, Keep};
use qdist_core::tradeoff::tradeoff_sweep;
use qdist_core::{BlochVector, DensityOperator, Error};

use output::{emit, g12};

#[derive(Parser, Debug)]
#[command(name = "qdist", version, about = "Distinguishability measures and accessible-information bounds")]
struct Cli {
    /// Report informations in bits instead of nats.
    #[arg(long, global = true)]
    bits: bool,
    /// Output file, written atomically; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single measures of a pair of states.
    Measure {
        #[arg(value_enum)]
        kind: MeasureKind,
        #[command(flatten)]
        pair: PairArgs,
        /// Prior of the first state (helstrom) or weight of the second (holevo).
        #[arg(long)]
        prior: Option<f64>,
        /// Bloch vector "x,y,z" to convert into a state file.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        vector: Option<Vec<f64>>,
    },
    /// Accessible-information bounds of a binary channel over a grid of priors.
    Bounds {
        #[command(flatten)]
        pair: PairArgs,
        /// Number of prior values t in [0, 1]; odd and at least 3.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value_t = accinfo::QUAD_POINTS)]
        quad_points: usize,
        #[arg(long, default_value_t = 720)]
        axis_grid: usize,
    },
    /// Restricted inference-disturbance optimum over a grid of state angles.
    Tradeoff {
        #[arg(long, default_value_t = 85)]
        theta_grid: usize,
    },
    /// Numerical measurement optimization for comparison with closed forms.
    Oracle {
        #[arg(value_enum)]
        functional: FunctionalArg,
        #[command(flatten)]
        pair: PairArgs,
        /// Weight of the second state.
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[arg(long, value_enum, default_value_t = OracleMode::Projective)]
        mode: OracleMode,
        #[arg(long, default_value_t = 720)]
        grid: usize,
        #[arg(long, default_value_t = 60)]
        refine: usize,
        /// Number of POVM elements (povm mode).
        #[arg(long)]
        outcomes: Option<usize>,
        /// Required in povm mode.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Broadcasting and cloning checks.
    Broadcast {
        #[command(flatten)]
        pair: PairArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct PairArgs {
    /// First state as a JSON file.
    #[arg(long)]
    rho0: Option<PathBuf>,
    /// Second state as a JSON file.
    #[arg(long)]
    rho1: Option<PathBuf>,
    /// Bloch length of the first qubit state, along x.
    #[arg(long)]
    a: Option<f64>,
    /// Bloch length of the second qubit state.
    #[arg(long)]
    b: Option<f64>,
    /// Angle between the two Bloch vectors.
    #[arg(long)]
    theta: Option<f64>,
    /// Read --theta in degrees.
    #[arg(long)]
    deg: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MeasureKind {
    Fidelity,
    Helstrom,
    Kullback,
    Holevo,
    Bloch,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FunctionalArg {
    MinOverlap,
    MinError,
    MaxKl,
    MaxMutual,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum OracleMode {
    Projective,
    Povm,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = format!("{e:?}");
        let kind = kind.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        let code = if matches!(e, Error::NoConvergence(_)) { 3 } else { 2 };
        Self { code, kind, message: e.to_string() }
    }
}

fn bad_input(message: impl Into<String>) -> Failure {
    Failure { code: 2, kind: "BadInput".into(), message: message.into() }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure { code: 2, kind: "Io".into(), message: e.to_string() }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read_state(path: &Path) -> Outcome<DensityOperator> {
    let text = std::fs::read_to_string(path).map_err(|e| bad_input(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| bad_input(format!("{}: {e}", path.display())))?;
    Ok(DensityOperator::from_json(&value)?)
}

impl PairArgs {
    fn states(&self) -> Outcome<(DensityOperator, DensityOperator)> {
        match (&self.rho0, &self.rho1, self.a, self.b, self.theta) {
            (Some(p0), Some(p1), None, None, None) => Ok((read_state(p0)?, read_state(p1)?)),
            (None, None, Some(a), Some(b), Some(theta)) => {
                let theta = if self.deg { theta.to_radians() } else { theta };
                let ch = BinaryChannel::from_bloch(a, b, theta, 0.5)?;
                Ok((ch.r0, ch.r1))
            }
            _ => Err(bad_input("give either --rho0 and --rho1, or --a, --b and --theta")),
        }
    }
}

fn prior(p: Option<f64>) -> Outcome<f64> {
    let p = p.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&p) {
        return Err(bad_input(format!("prior {p} outside [0,1]")));
    }
    Ok(p)
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn measure(kind: MeasureKind, pair: &PairArgs, p: Option<f64>, vector: Option<&[f64]>, unit: f64) -> Outcome<String> {
    if let MeasureKind::Bloch = kind {
        // Conversion in either direction.
        return match (vector, &pair.rho0) {
            (Some(v), None) => {
                if v.len() != 3 {
                    return Err(bad_input(format!("--vector needs 3 components, got {}", v.len())));
                }
                let b = BlochVector::new([v[0], v[1], v[2]])?;
                Ok(json_text(&DensityOperator::from_bloch(&b).to_json()))
            }
            (None, Some(path)) => {
                let b = read_state(path)?.to_bloch()?;
                Ok(json_text(&json!({ "bloch": b.coords() })))
            }
            _ => Err(bad_input("bloch needs exactly one of --vector or --rho0")),
        };
    }
    let (r0, r1) = pair.states()?;
    let v = match kind {
        MeasureKind::Fidelity => {
            let f = fidelity_q(&r0, &r1)?;
            json!({ "fidelity": f.f, "bures": f.bures })
        }
        MeasureKind::Helstrom => {
            let pi0 = prior(p)?;
            let h = helstrom(&r0, &r1, pi0)?;
            json!({ "pe": h.pe, "prior0": pi0, "gamma_eigenvalues": h.gamma_eigs })
        }
        MeasureKind::Kullback => {
            let k = kullback_bounds(&r0, &r1, &[0.5, 1.0, 2.0], true)?;
            let hiai: Vec<Value> = k.hiai_upper.iter().map(|(p, v)| json!({ "p": p, "value": v / unit })).collect();
            json!({
                "lower": { "k_f": k.k_f / unit, "k_b": k.k_b / unit, "hiai": k.hiai_lower / unit, "jensen": k.jensen_lower / unit },
                "upper": { "umegaki": k.k_umegaki / unit, "ando": k.ando_upper / unit, "jensen": k.jensen_upper / unit, "hiai": hiai },
                "regularized": k.regularized,
            })
        }
        MeasureKind::Holevo => {
            let t = prior(p)?;
            let ch = BinaryChannel::new(r0, r1, t)?;
            let mut m = serde_json::Map::new();
            m.insert("t".into(), json!(t));
            m.insert("S".into(), json!(accinfo::holevo_s(&ch) / unit));
            m.insert("Q".into(), json!(accinfo::jrw_q(&ch) / unit));
            m.insert("M".into(), json!(accinfo::lower_m(&ch)?.0 / unit));
            m.insert("L".into(), json!(accinfo::upper_l(&ch)? / unit));
            m.insert("N".into(), json!(accinfo::upper_n(&ch)? / unit));
            m.insert("R".into(), json!(accinfo::upper_r(&ch)? / unit));
            m.insert("P".into(), json!(accinfo::upper_p(&ch)? / unit));
            if ch.dim() == 2 {
                m.insert("I_num".into(), json!(accinfo::optimal_i_2d(&ch, 720, 60)?.0 / unit));
            }
            Value::Object(m)
        }
        MeasureKind::Bloch => unreachable!(),
    };
    Ok(json_text(&v))
}

fn bounds(pair: &PairArgs, grid: usize, quad_points: usize, axis_grid: usize, unit: f64) -> Outcome<String> {
    if grid < 3 || grid.is_multiple_of(2) {
        return Err(Error::BadGrid(grid).into());
    }
    if quad_points < 3 || quad_points.is_multiple_of(2) {
        return Err(Error::BadGrid(quad_points).into());
    }
    let (r0, r1) = pair.states()?;
    let opts = SweepOptions { quad_points, axis_grid, ..SweepOptions::default() };
    let curves = accinfo::bounds_sweep(&r0, &r1, grid, &opts)?;
    let column = |k: BoundKind| curves.iter().find(|c| c.kind == k);
    let mut csv = String::from("t");
    for k in SWEEP_KINDS {
        csv.push(',');
        csv.push_str(k.label());
    }
    csv.push('\n');
    for i in 0..grid {
        csv.push_str(&g12(curves[0].samples[i].0));
        for k in SWEEP_KINDS {
            csv.push(',');
            if let Some(c) = column(k) {
                csv.push_str(&g12(c.samples[i].1 / unit));
            }
        }
        csv.push('\n');
    }
    Ok(csv)
}

fn tradeoff(n: usize) -> Outcome<String> {
    let rows = tradeoff_sweep(n)?;
    let mut csv = String::from("theta_deg,phi_opt_deg,ps,c,ps_plus_c,loose_bound\n");
    for r in rows {
        let fields = [r.theta.to_degrees(), r.phi_opt.to_degrees(), r.ps, r.c, r.ps + r.c, r.loose_bound];
        csv.push_str(&fields.map(g12).join(","));
        csv.push('\n');
    }
    Ok(csv)
}

#[allow(clippy::too_many_arguments)]
fn oracle(
    functional: FunctionalArg,
    pair: &PairArgs,
    t: f64,
    mode: OracleMode,
    grid: usize,
    refine: usize,
    outcomes: Option<usize>,
    seed: Option<u64>,
    restarts: usize,
    unit: f64,
) -> Outcome<String> {
    let kind = match functional {
        FunctionalArg::MinOverlap => FunctionalKind::MinOverlap,
        FunctionalArg::MinError => FunctionalKind::MinError,
        FunctionalArg::MaxKl => FunctionalKind::MaxKl,
        FunctionalArg::MaxMutual => FunctionalKind::MaxMutual,
    };
    let (r0, r1) = pair.states()?;
    let f = Functional::new(kind, r0.clone(), r1.clone(), t)?;
    let is_info = matches!(kind, FunctionalKind::MaxKl | FunctionalKind::MaxMutual);
    let scale = if is_info { unit } else { 1.0 };
    let mut out = serde_json::Map::new();
    out.insert("functional".into(), json!(kind));
    match mode {
        OracleMode::Projective => {
            let (v, axis) = optimize_projective_2d(&f, grid, refine)?;
            out.insert("value".into(), json!(v / scale));
            out.insert("axis".into(), json!(axis));
        }
        OracleMode::Povm => {
            let seed = seed.ok_or_else(|| bad_input("povm mode needs --seed"))?;
            let n = outcomes.unwrap_or(r0.dim());
            let (v, povm) = optimize_povm(&f, n, seed, restarts)?;
            out.insert("value".into(), json!(v / scale));
            out.insert("outcomes".into(), json!(povm.len()));
            out.insert("seed".into(), json!(seed));
        }
    }
    let reference = match kind {
        FunctionalKind::MinOverlap => json!({ "fidelity": fidelity_q(&r0, &r1)?.f }),
        FunctionalKind::MinError => json!({ "helstrom_pe": helstrom(&r0, &r1, 1.0 - t)?.pe }),
        FunctionalKind::MaxKl => {
            let k = kullback_bounds(&r0, &r1, &[0.5, 1.0, 2.0], true)?;
            json!({ "best_lower": k.best_lower() / unit, "best_upper": k.best_upper() / unit })
        }
        FunctionalKind::MaxMutual => {
            let ch = BinaryChannel::new(r0, r1, t)?;
            json!({ "lower_m": accinfo::lower_m(&ch)?.0 / unit, "upper_l": accinfo::upper_l(&ch)? / unit, "holevo": accinfo::holevo_s(&ch) / unit })
        }
    };
    out.insert("closed_form".into(), reference);
    Ok(json_text(&Value::Object(out)))
}

fn broadcast(pair: &PairArgs) -> Outcome<String> {
    let (r0, r1) = pair.states()?;
    let f = fidelity_q(&r0, &r1)?.f;
    let mut out = json!({
        "commutator_norm": commutator_norm(r0.matrix(), r1.matrix()),
        "can_broadcast": can_broadcast(&r0, &r1),
        "cloning_feasible": cloning_feasible(&r0, &r1),
        "fidelity": f,
    });
    if can_broadcast(&r0, &r1) {
        let bc = build_commuting_broadcaster(&r0, &r1)?;
        let d = r0.dim();
        let mut err: f64 = 0.0;
        let o0 = bc.apply(&r0)?;
        let o1 = bc.apply(&r1)?;
        for (s, o) in [(&r0, &o0), (&r1, &o1)] {
            for keep in [Keep::A, Keep::B] {
                err = err.max((partial_trace(o, (d, d), keep)?.matrix() - s.matrix()).norm());
            }
        }
        out["broadcaster"] = json!({ "marginal_error": err, "output_fidelity": fidelity_q(&o0, &o1)?.f });
    }
    Ok(json_text(&out))
}

fn run(cli: Cli) -> Outcome<()> {
    if let Ok(n) = std::env::var("QDIST_THREADS") {
        let n: usize = n.parse().map_err(|_| bad_input(format!("QDIST_THREADS={n} is not a count")))?;
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let unit = if cli.bits { LN_2 } else { 1.0 };
    let payload = match &cli.command {
        Command::Measure { kind, pair, prior, vector } => measure(*kind, pair, *prior, vector.as_deref(), unit)?,
        Command::Bounds { pair, grid, quad_points, axis_grid } => bounds(pair, *grid, *quad_points, *axis_grid, unit)?,
        Command::Tradeoff { theta_grid } => tradeoff(*theta_grid)?,
        Command::Oracle { functional, pair, t, mode, grid, refine, outcomes, seed, restarts } => {
            oracle(*functional, pair, *t, *mode, *grid, *refine, *outcomes, *seed, *restarts, unit)?
        }
        Command::Broadcast { pair } => broadcast(pair)?,
    };
    emit(cli.out.as_deref(), &payload).map_err(io_failure)
}

fn report(f: &Failure) -> ExitCode {
    eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
    ExitCode::from(f.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return report(&bad_input(e.to_string().trim().to_string()));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(&f),
    }
}
