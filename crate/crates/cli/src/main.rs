//! bevbox — rasterize clouds into grid maps, build percentile hulls,
//! evaluate detections, generate synthetic scenes, and run forward-pass
//! convergence studies.

mod commands;
mod config;
mod errors;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use errors::CliResult;

#[derive(Parser)]
#[command(name = "bevbox", version, about = "Bird's-eye-view boxes with calibrated uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize a point cloud into a multi-layer grid map
    Rasterize(RasterizeArgs),
    /// Build percentile hulls from an uncertain-box CSV
    Hull(HullArgs),
    /// Evaluate detections against ground truth (AP + uncertainty bins)
    Eval(EvalArgs),
    /// Generate a synthetic scene with known noise
    Simulate(SimulateArgs),
    /// Train the tiny heteroscedastic regressor on an x,y CSV
    Train(TrainArgs),
    /// Forward-pass convergence study on a trained regressor
    Calibrate(CalibrateArgs),
}

#[derive(clap::Args)]
struct RasterizeArgs {
    /// Input cloud: binary x,y,z,intensity f32 quadruples, or ASCII with --ascii
    #[arg(long)]
    cloud: PathBuf,
    /// Output grid-map file
    #[arg(long)]
    out: PathBuf,
    /// Treat the input as ASCII `x y z intensity` lines
    #[arg(long)]
    ascii: bool,
    /// Optional SVG rendering of the grid
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Comma-separated subset of layers to write (default: all five)
    #[arg(long)]
    layers: Option<String>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    y_min: Option<f64>,
    #[arg(long)]
    y_max: Option<f64>,
    #[arg(long)]
    cell_size: Option<f64>,
    #[arg(long)]
    ground_z: Option<f64>,
    /// Sensor origin as `x,y,z`
    #[arg(long)]
    sensor_origin: Option<String>,
    /// key=value file overriding defaults (flags override the file)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct HullArgs {
    /// Uncertain-box CSV (see `uncertainties.csv` from `simulate`)
    #[arg(long)]
    boxes: PathBuf,
    /// Output hull CSV `object_id, vertex_index, x, y`
    #[arg(long)]
    out_csv: PathBuf,
    /// Optional SVG overlay (median boxes blue, hulls red)
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Optional KITTI ground-truth labels drawn green in the overlay
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long)]
    percentile: Option<f64>,
    #[arg(long)]
    rotations: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Directory of detection label files (KITTI format + score)
    #[arg(long)]
    dets: PathBuf,
    /// Directory of ground-truth label files
    #[arg(long)]
    gts: PathBuf,
    /// Output directory for the report, bins and plots
    #[arg(long)]
    out_dir: PathBuf,
    /// Uncertain-box CSV joined to detections by (frame, in-file order);
    /// enables the binned uncertainty reports
    #[arg(long)]
    uncertainty: Option<PathBuf>,
    #[arg(long)]
    iou_car: Option<f64>,
    #[arg(long)]
    iou_pedestrian: Option<f64>,
    #[arg(long)]
    iou_cyclist: Option<f64>,
    /// easy | moderate | hard | all
    #[arg(long)]
    difficulty: Option<String>,
    /// Worker threads for per-frame matching
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Output directory (gts/, dets/, clouds/, uncertainties.csv)
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cars: Option<f64>,
    #[arg(long)]
    pedestrians: Option<f64>,
    #[arg(long)]
    cyclists: Option<f64>,
    /// area | distance (uniform-in-distance placement)
    #[arg(long)]
    placement: Option<String>,
    #[arg(long)]
    fp_rate: Option<f64>,
    #[arg(long)]
    miss_base: Option<f64>,
    #[arg(long)]
    miss_slope: Option<f64>,
    #[arg(long)]
    sigma_x_base: Option<f64>,
    #[arg(long)]
    sigma_x_slope: Option<f64>,
    #[arg(long)]
    sigma_y_base: Option<f64>,
    #[arg(long)]
    sigma_y_slope: Option<f64>,
    #[arg(long)]
    sigma_log_bl_base: Option<f64>,
    #[arg(long)]
    sigma_log_bl_slope: Option<f64>,
    #[arg(long)]
    sigma_log_bw_base: Option<f64>,
    #[arg(long)]
    sigma_log_bw_slope: Option<f64>,
    #[arg(long)]
    sigma_sin2phi_base: Option<f64>,
    #[arg(long)]
    sigma_sin2phi_slope: Option<f64>,
    #[arg(long)]
    sigma_cos2phi_base: Option<f64>,
    #[arg(long)]
    sigma_cos2phi_slope: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct TrainArgs {
    /// Training CSV with `x,y` rows
    #[arg(long)]
    data: PathBuf,
    /// Output checkpoint path
    #[arg(long)]
    out: PathBuf,
    /// Training-curve CSV (epoch, loss, data_term, decay_term)
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Comma-separated hidden widths, e.g. `32,32`
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long)]
    p_drop: Option<f64>,
    /// head-only | all-layers | second-stage-conv
    #[arg(long)]
    placement: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CalibrateArgs {
    /// Trained checkpoint from `train`
    #[arg(long)]
    model: PathBuf,
    /// Probe CSV with `x,y` rows (x values are the probe inputs)
    #[arg(long)]
    data: PathBuf,
    /// Output convergence CSV (one row per forward-pass count)
    #[arg(long)]
    out: PathBuf,
    /// Upper bound of the forward-pass sweep
    #[arg(long)]
    t_max: Option<usize>,
    /// Default operating point reported on stdout
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result: CliResult<()> = match cli.command {
        Command::Rasterize(args) => commands::rasterize::run(&args),
        Command::Hull(args) => commands::hull::run(&args),
        Command::Eval(args) => commands::eval::run(&args),
        Command::Simulate(args) => commands::simulate::run(&args),
        Command::Train(args) => commands::train::run(&args),
        Command::Calibrate(args) => commands::calibrate::run(&args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}
