use bevbox::io::{self, BoxRecord, CameraAux};
use bevbox::sim::{
    self, class_height, DistanceFn, NoiseModel, Placement, SceneSpec, SimDetection, SimFrame,
};

use super::write_file;
use crate::config::ConfigMap;
use crate::errors::{CliError, CliResult};
use crate::SimulateArgs;

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let d_spec = SceneSpec::default();
    let placement_text = cfg.resolve(args.placement.clone(), "placement", "area".to_string())?;
    let placement = match placement_text.as_str() {
        "area" => Placement::UniformArea,
        "distance" => Placement::UniformDistance,
        other => {
            return Err(CliError::Usage(format!(
                "placement must be area|distance, got '{other}'"
            )))
        }
    };
    let spec = SceneSpec {
        n_frames: cfg.resolve(args.frames, "frames", d_spec.n_frames)?,
        mean_cars: cfg.resolve(args.cars, "cars", d_spec.mean_cars)?,
        mean_pedestrians: cfg.resolve(args.pedestrians, "pedestrians", d_spec.mean_pedestrians)?,
        mean_cyclists: cfg.resolve(args.cyclists, "cyclists", d_spec.mean_cyclists)?,
        region: d_spec.region,
        placement,
        seed: cfg.resolve(args.seed, "seed", 0)?,
    };

    let d_noise = NoiseModel::default();
    let lin = |base: Option<f64>, slope: Option<f64>, key: &str, d: DistanceFn| -> CliResult<DistanceFn> {
        Ok(DistanceFn::new(
            cfg.resolve(base, &format!("{key}-base"), d.base)?,
            cfg.resolve(slope, &format!("{key}-slope"), d.slope)?,
        ))
    };
    let noise = NoiseModel {
        sigma_x: lin(args.sigma_x_base, args.sigma_x_slope, "sigma-x", d_noise.sigma_x)?,
        sigma_y: lin(args.sigma_y_base, args.sigma_y_slope, "sigma-y", d_noise.sigma_y)?,
        sigma_log_bl: lin(
            args.sigma_log_bl_base,
            args.sigma_log_bl_slope,
            "sigma-log-bl",
            d_noise.sigma_log_bl,
        )?,
        sigma_log_bw: lin(
            args.sigma_log_bw_base,
            args.sigma_log_bw_slope,
            "sigma-log-bw",
            d_noise.sigma_log_bw,
        )?,
        sigma_sin2phi: lin(
            args.sigma_sin2phi_base,
            args.sigma_sin2phi_slope,
            "sigma-sin2phi",
            d_noise.sigma_sin2phi,
        )?,
        sigma_cos2phi: lin(
            args.sigma_cos2phi_base,
            args.sigma_cos2phi_slope,
            "sigma-cos2phi",
            d_noise.sigma_cos2phi,
        )?,
        false_positive_rate: cfg.resolve(args.fp_rate, "fp-rate", d_noise.false_positive_rate)?,
        miss_rate: lin(args.miss_base, args.miss_slope, "miss", d_noise.miss_rate)?,
    };

    let frames = sim::generate_scene(&spec)?;
    let detections = sim::corrupt(&frames, &noise, spec.seed ^ 0x0C0F_FEE0)?;

    let mut box_records = Vec::new();
    for (frame, dets) in frames.iter().zip(&detections) {
        write_frame(args, frame, dets)?;
        for det in dets {
            box_records.push(BoxRecord {
                frame: frame.index,
                class: det.class,
                score: det.score,
                uncertain: det.uncertain.clone(),
            });
        }
    }
    write_file(
        &args.out_dir.join("uncertainties.csv"),
        io::write_box_csv(&box_records).as_bytes(),
    )?;
    eprintln!(
        "simulated {} frames ({} detections) into {}",
        frames.len(),
        box_records.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn write_frame(args: &SimulateArgs, frame: &SimFrame, dets: &[SimDetection]) -> CliResult<()> {
    let stem = format!("{:06}.txt", frame.index);

    let gt_records: Vec<_> = frame
        .ground_truths
        .iter()
        .map(|g| {
            let aux = CameraAux::synthetic(
                g.object.class.as_str(),
                g.height,
                &g.object.bev_box,
                g.object.bbox_height_px,
            );
            io::kitti::from_bev(&g.object, &aux)
        })
        .collect();
    write_file(
        &args.out_dir.join("gts").join(&stem),
        io::write_labels(&gt_records).as_bytes(),
    )?;

    let det_records: Vec<_> = dets
        .iter()
        .map(|det| -> Result<_, bevbox::Error> {
            let labeled = det.to_labeled()?;
            let aux = CameraAux::synthetic(
                det.class.as_str(),
                class_height(det.class),
                &labeled.bev_box,
                labeled.bbox_height_px,
            );
            Ok(io::kitti::from_bev(&labeled, &aux))
        })
        .collect::<Result<_, _>>()
        .map_err(CliError::from)?;
    write_file(
        &args.out_dir.join("dets").join(&stem),
        io::write_labels(&det_records).as_bytes(),
    )?;

    write_file(
        &args
            .out_dir
            .join("clouds")
            .join(format!("{:06}.bin", frame.index)),
        &io::write_point_cloud(&frame.cloud),
    )
}
