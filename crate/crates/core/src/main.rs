use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use sha2::{Digest, Sha256};

use ectkit::ect::{per_direction_grid, ThresholdGrid};
use ectkit::io::{
    read_off_mesh, read_point_cloud_text, write_archive, write_atomic, write_matrix_csv,
    write_matrix_pgm, write_off_mesh, write_point_cloud_text, Archive, Provenance,
};
use ectkit::optimize::{learn_coordinates, learn_directions, OptimizeConfig, OptimizeTrace};
use ectkit::sampling::{
    double_annulus_raw, generate_double_annulus, generate_noisy_circle, noisy_circle_raw,
    sample_directions_uniform, sample_target_directions, DEFAULT_NOISE_SIGMA,
};
use ectkit::{
    ecc, ect, normalize_points, soft_ecc, soft_ect, EctError, GeometricSimplicialComplex, SmoothEctMatrix,
};

#[derive(Parser)]
#[command(name = "ectkit", version, about = "Euler Characteristic Transforms of simplicial complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Euler characteristic of an OFF mesh or point table.
    Chi { input: PathBuf },
    /// Euler characteristic curve along one direction.
    Ecc(EccArgs),
    /// ECT matrix over sampled directions.
    Ect(EctArgs),
    /// Fit directions to a target ECT.
    LearnDirections(LearnDirectionsArgs),
    /// Fit point coordinates to a target ECT.
    LearnCoordinates(LearnCoordinatesArgs),
    /// Center and scale an input into the unit ball.
    Normalize {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic point cloud.
    Gen(GenArgs),
}

#[derive(Args)]
struct EccArgs {
    input: PathBuf,
    /// Comma-separated unit vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "angle", required_unless_present = "angle")]
    direction: Option<Vec<f64>>,
    /// Planar direction `(cos θ, sin θ)`.
    #[arg(long, allow_hyphen_values = true)]
    angle: Option<f64>,
    /// Thresholds, evenly spaced over [-1, 1].
    #[arg(long)]
    l: usize,
    /// Smooth the curve with this sigmoid sharpness.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Global,
    PerDirection,
}

#[derive(Args)]
struct EctArgs {
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    l: usize,
    #[arg(long, value_enum, default_value = "global")]
    strategy: StrategyArg,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Archive path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    log_every: Option<usize>,
    /// Directory for the trace, learned parameters and archives.
    #[arg(long)]
    out_dir: PathBuf,
}

impl TrainArgs {
    fn config(&self, base: OptimizeConfig) -> OptimizeConfig {
        OptimizeConfig {
            steps: self.steps.unwrap_or(base.steps),
            learning_rate: self.lr.unwrap_or(base.learning_rate),
            seed: self.seed,
            lambda: self.lambda.unwrap_or(base.lambda),
            k: self.k.unwrap_or(base.k),
            l: self.l.unwrap_or(base.l),
            log_every: self.log_every.unwrap_or(base.log_every),
        }
    }
}

#[derive(Args)]
struct LearnDirectionsArgs {
    /// Complex to probe; defaults to a 100-point double annulus.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Fit against the exact transform instead of the smoothed one.
    #[arg(long)]
    exact_target: bool,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Args)]
struct LearnCoordinatesArgs {
    /// Target point cloud; defaults to a double annulus.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Initial point cloud; defaults to a noisy circle.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_NOISE_SIGMA)]
    sigma: f64,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    DoubleAnnulus,
    NoisyCircle,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    shape: Shape,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_NOISE_SIGMA)]
    sigma: f64,
    /// Skip normalization to the unit ball.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    out: PathBuf,
}

fn is_off(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("off"))
}

fn load(path: &Path) -> ectkit::Result<GeometricSimplicialComplex> {
    if is_off(path) {
        let mesh = read_off_mesh(path)?;
        GeometricSimplicialComplex::from_triangle_mesh(mesh.coordinates, &mesh.triangles)
    } else {
        GeometricSimplicialComplex::from_point_cloud(read_point_cloud_text(path)?)
    }
}

/// Canonical description of an experiment, written next to its outputs.
/// Archives carry its SHA-256.
struct ExperimentConfig {
    text: String,
}

impl ExperimentConfig {
    fn new(command: &str, config: &OptimizeConfig, extra: &[(&str, String)]) -> Self {
        use ectkit::sampling::double_annulus::{CENTER_OFFSET, INNER_RADIUS, OUTER_RADIUS};
        let mut text = format!(
            "{command}\nsteps {}\nlr {:?}\nseed {}\nlambda {:?}\nk {}\nl {}\nrng chacha8\n",
            config.steps, config.learning_rate, config.seed, config.lambda, config.k, config.l
        );
        writeln!(
            text,
            "double_annulus center_offset {CENTER_OFFSET:?} inner_radius {INNER_RADIUS:?} outer_radius {OUTER_RADIUS:?}"
        )
        .unwrap();
        for (key, value) in extra {
            writeln!(text, "{key} {value}").unwrap();
        }
        ExperimentConfig { text }
    }

    fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.text.as_bytes()))
    }

    fn write(&self, dir: &Path) -> ectkit::Result<()> {
        write_atomic(&dir.join("config.txt"), self.text.as_bytes())
    }
}

fn file_digest(path: &Path) -> ectkit::Result<String> {
    let bytes = std::fs::read(path).map_err(|source| EctError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_trace(dir: &Path, trace: &OptimizeTrace) -> ectkit::Result<()> {
    let mut text = String::from("step,loss\n");
    for r in &trace.records {
        writeln!(text, "{},{:?}", r.step, r.loss).unwrap();
    }
    write_atomic(&dir.join("trace.csv"), text.as_bytes())
}

fn create_dir(dir: &Path) -> ectkit::Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| EctError::Io {
        path: dir.to_owned(),
        source,
    })
}

fn print_matrix(values: &Array2<f64>) {
    for row in values.rows() {
        let line: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
        println!("{}", line.join(" "));
    }
}

fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

fn run_chi(input: &Path) -> ectkit::Result<()> {
    println!("{}", load(input)?.euler_characteristic());
    Ok(())
}

fn run_ecc(args: &EccArgs) -> ectkit::Result<()> {
    let complex = load(&args.input)?;
    let w = match (&args.direction, args.angle) {
        (Some(v), _) => ndarray::Array1::from(v.clone()),
        (None, Some(theta)) => ndarray::array![theta.cos(), theta.sin()],
        (None, None) => unreachable!("clap requires one of --direction and --angle"),
    };
    let ThresholdGrid::Global(grid) = ThresholdGrid::unit(args.l)? else {
        unreachable!("unit grids are global")
    };
    let values: Vec<f64> = match args.lambda {
        Some(lambda) => soft_ecc(&complex, w.view(), &grid, lambda)?,
        None => ecc(&complex, w.view(), &grid)?.into_iter().map(|v| v as f64).collect(),
    };
    for (t, v) in grid.iter().zip(values) {
        println!("{t:?} {}", format_number(v));
    }
    Ok(())
}

fn run_ect(args: &EctArgs) -> ectkit::Result<()> {
    let complex = load(&args.input)?;
    let directions = sample_directions_uniform(args.k, complex.d(), args.seed)?;
    let grid = match args.strategy {
        StrategyArg::Global => ThresholdGrid::unit(args.l)?,
        StrategyArg::PerDirection => per_direction_grid(&complex, &directions, args.l)?,
    };
    let provenance = Provenance {
        seed: Some(args.seed),
        config_hash: None,
    };
    let (values, archive) = match args.lambda {
        Some(lambda) => {
            let m = soft_ect(&complex, &directions, &grid, lambda)?;
            (m.values.clone(), Archive::smooth(m, provenance))
        }
        None => {
            let m = ect(&complex, &directions, &grid)?;
            (m.values.mapv(|v| v as f64), Archive::exact(m, provenance))
        }
    };
    if let Some(path) = &args.out {
        write_archive(path, &archive)?;
    }
    if let Some(path) = &args.csv {
        write_matrix_csv(path, values.view(), &grid)?;
    }
    if let Some(path) = &args.pgm {
        write_matrix_pgm(path, values.view())?;
    }
    if args.out.is_none() && args.csv.is_none() && args.pgm.is_none() {
        print_matrix(&values);
    }
    Ok(())
}

fn run_learn_directions(args: &LearnDirectionsArgs) -> ectkit::Result<()> {
    let config = args.train.config(OptimizeConfig::for_directions());
    config.validate()?;
    let (complex, source) = match &args.input {
        Some(path) => (load(path)?, file_digest(path)?),
        None => (
            GeometricSimplicialComplex::from_point_cloud(generate_double_annulus(100, config.seed)?)?,
            "double-annulus 100".to_string(),
        ),
    };
    let target_directions = sample_target_directions(config.k, complex.d(), config.seed)?;
    let grid = ThresholdGrid::unit(config.l)?;
    let target = if args.exact_target {
        let exact = ect(&complex, &target_directions, &grid)?;
        SmoothEctMatrix::from_exact(&exact, config.lambda, complex.stats().counts)
    } else {
        soft_ect(&complex, &target_directions, &grid, config.lambda)?
    };

    let trace = learn_directions(&target, &complex, &config)?;
    let learned = trace.directions().expect("direction learning yields directions");
    let fitted = soft_ect(&complex, &learned, &grid, config.lambda)?;

    let experiment = ExperimentConfig::new(
        "learn-directions",
        &config,
        &[("input", source), ("target", if args.exact_target { "exact" } else { "smooth" }.into())],
    );
    let provenance = Provenance {
        seed: Some(config.seed),
        config_hash: Some(experiment.hash()),
    };
    let dir = &args.train.out_dir;
    create_dir(dir)?;
    experiment.write(dir)?;
    write_trace(dir, &trace)?;
    write_point_cloud_text(dir.join("directions.txt"), learned.vectors())?;
    write_archive(dir.join("target.ect"), &Archive::smooth(target, provenance.clone()))?;
    write_archive(dir.join("learned.ect"), &Archive::smooth(fitted, provenance))?;
    report(&trace);
    Ok(())
}

fn run_learn_coordinates(args: &LearnCoordinatesArgs) -> ectkit::Result<()> {
    let config = args.train.config(OptimizeConfig::for_coordinates());
    config.validate()?;
    let (target_points, target_source) = match &args.target {
        Some(path) => (read_point_cloud_text(path)?, file_digest(path)?),
        None => (
            generate_double_annulus(args.n, config.seed)?,
            format!("double-annulus {}", args.n),
        ),
    };
    let (initial, init_source) = match &args.init {
        Some(path) => (read_point_cloud_text(path)?, file_digest(path)?),
        None => (
            generate_noisy_circle(target_points.nrows(), config.seed, args.sigma)?,
            format!("noisy-circle {:?}", args.sigma),
        ),
    };
    if initial.dim() != target_points.dim() {
        return Err(EctError::ShapeMismatch(format!(
            "initial cloud is {:?} but the target is {:?}",
            initial.dim(),
            target_points.dim()
        )));
    }
    let directions = sample_directions_uniform(config.k, target_points.ncols(), config.seed)?;
    let grid = ThresholdGrid::unit(config.l)?;
    let target_complex = GeometricSimplicialComplex::from_point_cloud(target_points)?;
    let target = soft_ect(&target_complex, &directions, &grid, config.lambda)?;

    let trace = learn_coordinates(&target, initial.view(), &directions, &config)?;
    let points = trace.coordinates().expect("coordinate learning yields coordinates");
    let fitted = soft_ect(
        &GeometricSimplicialComplex::from_point_cloud(points.clone())?,
        &directions,
        &grid,
        config.lambda,
    )?;

    let experiment = ExperimentConfig::new(
        "learn-coordinates",
        &config,
        &[("target", target_source), ("init", init_source)],
    );
    let provenance = Provenance {
        seed: Some(config.seed),
        config_hash: Some(experiment.hash()),
    };
    let dir = &args.train.out_dir;
    create_dir(dir)?;
    experiment.write(dir)?;
    write_trace(dir, &trace)?;
    write_point_cloud_text(dir.join("points.txt"), points.view())?;
    write_archive(dir.join("target.ect"), &Archive::smooth(target, provenance.clone()))?;
    write_archive(dir.join("learned.ect"), &Archive::smooth(fitted, provenance))?;
    report(&trace);
    Ok(())
}

fn report(trace: &OptimizeTrace) {
    println!("initial_loss {:?}", trace.initial_loss);
    println!("final_loss {:?}", trace.final_loss);
    eprintln!("elapsed {:.3}s", trace.elapsed.as_secs_f64());
}

fn run_normalize(input: &Path, out: &Path) -> ectkit::Result<()> {
    let (coordinates, triangles) = if is_off(input) {
        let mesh = read_off_mesh(input)?;
        (mesh.coordinates, Some(mesh.triangles))
    } else {
        (read_point_cloud_text(input)?, None)
    };
    let normalized = normalize_points(coordinates.view())?;
    match triangles {
        Some(t) => write_off_mesh(out, normalized.value.view(), &t)?,
        None => write_point_cloud_text(out, normalized.value.view())?,
    }
    let center: Vec<String> = normalized.center.iter().map(|x| format!("{x:?}")).collect();
    println!("center {}", center.join(" "));
    println!("scale {:?}", normalized.scale);
    Ok(())
}

fn run_gen(args: &GenArgs) -> ectkit::Result<()> {
    let points = match (args.shape, args.raw) {
        (Shape::DoubleAnnulus, false) => generate_double_annulus(args.n, args.seed)?,
        (Shape::DoubleAnnulus, true) => double_annulus_raw(args.n, args.seed)?,
        (Shape::NoisyCircle, false) => generate_noisy_circle(args.n, args.seed, args.sigma)?,
        (Shape::NoisyCircle, true) => noisy_circle_raw(args.n, args.seed, args.sigma)?,
    };
    write_point_cloud_text(&args.out, points.view())
}

fn run(cli: Cli) -> ectkit::Result<()> {
    match &cli.command {
        Command::Chi { input } => run_chi(input),
        Command::Ecc(args) => run_ecc(args),
        Command::Ect(args) => run_ect(args),
        Command::LearnDirections(args) => run_learn_directions(args),
        Command::LearnCoordinates(args) => run_learn_coordinates(args),
        Command::Normalize { input, out } => run_normalize(input, out),
        Command::Gen(args) => run_gen(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
