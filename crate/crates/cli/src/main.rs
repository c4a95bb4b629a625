use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, Matrix4, Matrix6, Vector3};
use vecpose::align::{run_experiment, write_cost_history_csv, ExperimentConfig, SolverConfig, SolverSpec, UpdateMap};
use vecpose::apps::{
    fmt_f64, interpolation_rows, max_path_distance, servo_rows, servo_simulate, write_trajectory_csv,
    InterpolationSpec, ReferencePath, ServoSpec, TrajectoryRow,
};
use vecpose::tables::{check_tables, Fault};
use vecpose::{
    adjoint_from_vec, pose_from_vec, vec_from_pose, AdjointMatrix, CouplingChoice, Error, GeneratingFunction,
    PoseVector6, TransformMatrix,
};

#[derive(Parser, Debug)]
#[command(name = "vecpose", version, about = "Vectorial parameterizations of rotation and pose")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Generating function: rotvec, cgr, mrp, euler-rodrigues, bauchau-trainelli, tan:m or sin:m.
    #[arg(long, global = true)]
    gen: Option<GeneratingFunction>,
    /// Translational coupling: screw, cayley or explicit:a,c.
    #[arg(long, global = true, default_value = "screw")]
    coupling: CouplingChoice,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output directory for generated files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare the closed-form rotation rows against the series map.
    CheckTables {
        /// Damage one row as GEN:SCALE to exercise the failure path.
        #[arg(long, hide = true)]
        corrupt: Option<String>,
    },
    /// Straight-line interpolation between two pose vectors.
    Interp {
        /// Initial pose: 6 parameters or a row-major 4×4 matrix.
        #[arg(long, allow_hyphen_values = true)]
        initial: String,
        /// Final pose: 6 parameters or a row-major 4×4 matrix.
        #[arg(long = "final", allow_hyphen_values = true)]
        final_: String,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// One file per named generating function.
        #[arg(long)]
        all_gens: bool,
    },
    /// Proportional servo towards a reference pose.
    Servo {
        #[arg(long, default_value_t = 1.0)]
        gain: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        /// Initial pose vector (6 parameters).
        #[arg(long, allow_hyphen_values = true, default_value = "0 0 0 0 0 0")]
        xi0: String,
        /// Reference start pose: 6 parameters or a row-major 4×4 matrix.
        #[arg(long, allow_hyphen_values = true, default_value = "0 0 0 0 0 0")]
        reference: String,
        /// Reference translational velocity.
        #[arg(long, allow_hyphen_values = true, default_value = "0.5 0 0")]
        velocity: String,
    },
    /// Monte Carlo comparison of alignment solvers.
    Align {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Comma-separated update maps: expmap, cayper or a generating function name.
        #[arg(long, default_value = "expmap,cayper", value_delimiter = ',')]
        solvers: Vec<UpdateMap>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Convert between pose vectors, 4×4 poses and 6×6 adjoints.
    Map {
        #[arg(long, value_enum)]
        to: Target,
        /// Whitespace or comma separated numbers; read from stdin when absent.
        #[arg(allow_hyphen_values = true)]
        values: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Pose,
    Adjoint,
    Vec,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(format!("i/o error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let c = &cli.common;
    match cli.command {
        Command::CheckTables { corrupt } => cmd_check_tables(c, corrupt.as_deref()),
        Command::Interp { initial, final_, steps, all_gens } => cmd_interp(c, &initial, &final_, steps, all_gens),
        Command::Servo { gain, dt, duration, xi0, reference, velocity } => {
            cmd_servo(c, gain, dt, duration, &xi0, &reference, &velocity)
        }
        Command::Align { trials, solvers, threads } => cmd_align(c, trials, solvers, threads),
        Command::Map { to, values } => cmd_map(c, to, values),
    }
}

fn gen_or_default(c: &Common) -> GeneratingFunction {
    c.gen.unwrap_or(GeneratingFunction::RotationVector)
}

fn cmd_check_tables(c: &Common, corrupt: Option<&str>) -> Outcome {
    let fault = corrupt
        .map(|s| {
            let (g, k) =
                s.rsplit_once(':').ok_or_else(|| Failure::Usage(format!("--corrupt expects GEN:SCALE, got {s:?}")))?;
            let scale = k.parse().map_err(|_| Failure::Usage(format!("bad scale {k:?}")))?;
            Ok::<_, Failure>(Fault { gen: g.parse()?, scale })
        })
        .transpose()?;
    let extra: Vec<_> = c.gen.into_iter().filter(|g| !GeneratingFunction::TABLE.contains(g)).collect();
    let rows = check_tables(&extra, fault)?;
    let mut out = io::stdout().lock();
    match c.format {
        Format::Csv => {
            writeln!(out, "gen,max_error,samples,passed")?;
            for r in &rows {
                writeln!(out, "{},{},{},{}", r.gen, fmt_f64(r.max_error), r.samples, r.passed())?;
            }
        }
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "gen": r.gen.to_string(), "max_error": r.max_error, "samples": r.samples, "passed": r.passed()
                    })
                })
                .collect();
            writeln!(out, "{}", serde_json::Value::from(v))?;
        }
    }
    if rows.iter().all(|r| r.passed()) {
        Ok(())
    } else {
        let bad: Vec<_> = rows.iter().filter(|r| !r.passed()).map(|r| r.gen.to_string()).collect();
        Err(Failure::Numerical(format!("closed form disagrees with the series map for {}", bad.join(", "))))
    }
}

fn parse_numbers(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Failure::Usage(format!("not a number: {t:?}"))))
        .collect()
}

fn parse_vector3(s: &str) -> Result<Vector3<f64>, Failure> {
    match parse_numbers(s)?.as_slice() {
        [x, y, z] => Ok(Vector3::new(*x, *y, *z)),
        v => Err(Failure::Usage(format!("expected 3 numbers, got {}", v.len()))),
    }
}

/// A pose given as 6 parameters `ρ, φ` or as 16 entries of a 4×4 matrix.
fn parse_pose(s: &str, gen: GeneratingFunction, coupling: CouplingChoice) -> Result<PoseVector6, Failure> {
    let v = parse_numbers(s)?;
    match v.len() {
        6 => Ok(PoseVector6::new(Vector3::new(v[0], v[1], v[2]), Vector3::new(v[3], v[4], v[5]), gen, coupling)?),
        16 => {
            let t = TransformMatrix::try_new(Matrix4::from_row_slice(&v)).map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(vec_from_pose(&t, gen, coupling)?)
        }
        n => Err(Failure::Usage(format!("a pose needs 6 parameters or 16 matrix entries, got {n}"))),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_rows(c: &Common, stem: &str, rows: &[TrajectoryRow]) -> Result<PathBuf, Failure> {
    let name = match c.format {
        Format::Csv => format!("{stem}.csv"),
        Format::Json => format!("{stem}.json"),
    };
    let mut w = create(&c.out, &name)?;
    match c.format {
        Format::Csv => write_trajectory_csv(&mut w, rows)?,
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|r| {
                    let m = r.pose.matrix();
                    serde_json::json!({
                        "step": r.step,
                        "s_or_t": r.s_or_t,
                        "translation": [m[(0, 3)], m[(1, 3)], m[(2, 3)]],
                        "rotation": (0..3).map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)]]).collect::<Vec<_>>(),
                        "error_norm": r.error_norm,
                    })
                })
                .collect();
            serde_json::to_writer_pretty(&mut w, &v).map_err(|e| Failure::Numerical(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(c.out.join(name))
}

fn cmd_interp(c: &Common, initial: &str, final_: &str, steps: usize, all_gens: bool) -> Outcome {
    let gens = if all_gens { GeneratingFunction::TABLE.to_vec() } else { vec![gen_or_default(c)] };
    let mut paths = Vec::new();
    for &g in &gens {
        let spec =
            InterpolationSpec::new(parse_pose(initial, g, c.coupling)?, parse_pose(final_, g, c.coupling)?, steps)?;
        let rows = interpolation_rows(&spec)?;
        let stem = format!("interp_{}", g.to_string().replace(':', "_"));
        println!("{}", write_rows(c, &stem, &rows)?.display());
        paths.push(rows.into_iter().map(|r| r.pose).collect::<Vec<_>>());
    }
    if paths.len() > 1 {
        // max and mean over the other paths of the worst-case pointwise distance
        println!("gen,max_distance_to_others,mean_distance_to_others");
        for (i, g) in gens.iter().enumerate() {
            let d: Vec<f64> =
                (0..paths.len()).filter(|&j| j != i).map(|j| max_path_distance(&paths[i], &paths[j])).collect();
            let max = d.iter().copied().fold(0.0, f64::max);
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            println!("{g},{},{}", fmt_f64(max), fmt_f64(mean));
        }
    }
    Ok(())
}

fn cmd_servo(c: &Common, gain: f64, dt: f64, duration: f64, xi0: &str, reference: &str, velocity: &str) -> Outcome {
    let g = gen_or_default(c);
    let start = pose_from_vec(&parse_pose(reference, GeneratingFunction::RotationVector, CouplingChoice::Screw)?)?;
    let reference = ReferencePath { start, velocity: parse_vector3(velocity)? };
    let spec = ServoSpec::new(gain, dt, duration, reference, parse_pose(xi0, g, c.coupling)?)?;
    let rows = servo_rows(&servo_simulate(&spec)?);
    let stem = format!("servo_{}", g.to_string().replace(':', "_"));
    println!("{}", write_rows(c, &stem, &rows)?.display());
    Ok(())
}

fn cmd_align(c: &Common, trials: usize, solvers: Vec<UpdateMap>, threads: usize) -> Outcome {
    let cfg = ExperimentConfig {
        seed: c.seed,
        trials,
        threads,
        solvers: solvers.into_iter().map(|m| SolverSpec::new(SolverConfig::with_map(m))).collect(),
        ..Default::default()
    };
    let report = run_experiment(&cfg)?;
    let mut json = create(&c.out, "align_report.json")?;
    json.write_all(report.to_json()?.as_bytes())?;
    json.flush()?;
    let mut hist = create(&c.out, "cost_history.csv")?;
    write_cost_history_csv(&mut hist, &report)?;
    hist.flush()?;
    println!("solver,success_rate,mean_iterations,max_iterations");
    for s in &report.per_solver {
        println!("{},{},{},{}", s.name, fmt_f64(s.success_rate), fmt_f64(s.mean_iterations), s.max_iterations);
    }
    Ok(())
}

fn cmd_map(c: &Common, to: Target, values: Option<String>) -> Outcome {
    let text = match values {
        Some(v) => v,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let g = gen_or_default(c);
    let v = parse_numbers(&text)?;
    let out: DMatrix<f64> = match to {
        Target::Pose | Target::Adjoint => {
            if v.len() != 6 {
                return Err(Failure::Usage(format!("--to {to:?} expects 6 parameters, got {}", v.len())));
            }
            let xi = parse_pose(&text, g, c.coupling)?;
            match to {
                Target::Pose => DMatrix::from_column_slice(4, 4, pose_from_vec(&xi)?.matrix().as_slice()),
                _ => DMatrix::from_column_slice(6, 6, adjoint_from_vec(&xi)?.matrix().as_slice()),
            }
        }
        Target::Vec => {
            let t = match v.len() {
                16 => {
                    TransformMatrix::try_new(Matrix4::from_row_slice(&v)).map_err(|e| Failure::Usage(e.to_string()))?
                }
                36 => AdjointMatrix::try_new(Matrix6::from_row_slice(&v))
                    .map_err(|e| Failure::Usage(e.to_string()))?
                    .to_transform(),
                n => return Err(Failure::Usage(format!("--to vec expects 16 or 36 entries, got {n}"))),
            };
            DMatrix::from_column_slice(1, 6, vec_from_pose(&t, g, c.coupling)?.xi().as_slice())
        }
    };
    let mut stdout = io::stdout().lock();
    match c.format {
        Format::Csv => {
            for row in out.row_iter() {
                let cells: Vec<_> = row.iter().map(|x| fmt_f64(*x)).collect();
                writeln!(stdout, "{}", cells.join(","))?;
            }
        }
        Format::Json => {
            let rows: Vec<Vec<f64>> = out.row_iter().map(|r| r.iter().copied().collect()).collect();
            let v = if rows.len() == 1 { serde_json::json!(rows[0]) } else { serde_json::json!(rows) };
            writeln!(stdout, "{v}")?;
        }
    }
    Ok(())
}
