use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use bevbox::eval::{
    average_precision, bin_uncertainties, format_tv_e4, match_frame, BinAxis, BinSample, Class,
    Difficulty, LabeledObject, MatchResult, UncertaintyBins,
};
use bevbox::io::{self, BoxRecord, PlotSeries};

use super::{fmt, list_label_files, read_text, write_file};
use crate::config::ConfigMap;
use crate::errors::{CliError, CliResult};
use crate::EvalArgs;

struct FrameData {
    dets: Vec<LabeledObject>,
    gts: Vec<LabeledObject>,
    uncertainty: Vec<Option<BoxRecord>>,
}

struct FrameOutcome {
    per_class: Vec<MatchResult>,
    samples: Vec<BinSample>,
}

pub fn run(args: &EvalArgs) -> CliResult<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let thresholds = [
        cfg.resolve(args.iou_car, "iou-car", Class::Car.default_iou_threshold())?,
        cfg.resolve(
            args.iou_pedestrian,
            "iou-pedestrian",
            Class::Pedestrian.default_iou_threshold(),
        )?,
        cfg.resolve(
            args.iou_cyclist,
            "iou-cyclist",
            Class::Cyclist.default_iou_threshold(),
        )?,
    ];
    let difficulty_text =
        cfg.resolve(args.difficulty.clone(), "difficulty", "moderate".to_string())?;
    let difficulty = parse_difficulty(&difficulty_text)?;
    let jobs = cfg.resolve(args.jobs, "jobs", 0usize)?;

    let frames = load_frames(args)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
    let outcomes: Vec<FrameOutcome> = pool.install(|| {
        frames
            .par_iter()
            .map(|frame| evaluate_frame(frame, &thresholds, difficulty))
            .collect::<Result<_, _>>()
    })?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", args.out_dir.display())))?;

    write_report(&args.out_dir, &frames, &outcomes)?;

    if args.uncertainty.is_some() {
        let samples: Vec<BinSample> = outcomes.into_iter().flat_map(|o| o.samples).collect();
        for axis in [BinAxis::Iou, BinAxis::Distance, BinAxis::DiffToBaseAngle] {
            let bins = bin_uncertainties(&samples, axis, axis.default_bin_width())?;
            write_bins(&args.out_dir, &bins)?;
        }
    }
    eprintln!(
        "evaluated {} frames into {}",
        frames.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn parse_difficulty(text: &str) -> CliResult<Option<Difficulty>> {
    match text {
        "easy" => Ok(Some(Difficulty::Easy)),
        "moderate" => Ok(Some(Difficulty::Moderate)),
        "hard" => Ok(Some(Difficulty::Hard)),
        "all" => Ok(None),
        other => Err(CliError::Usage(format!(
            "difficulty must be easy|moderate|hard|all, got '{other}'"
        ))),
    }
}

fn load_frames(args: &EvalArgs) -> CliResult<Vec<FrameData>> {
    let gt_files = list_label_files(&args.gts)?;
    if gt_files.is_empty() {
        return Err(CliError::Input(format!(
            "no .txt label files in {}",
            args.gts.display()
        )));
    }

    let mut uncertainty_by_frame: HashMap<usize, Vec<BoxRecord>> = HashMap::new();
    if let Some(path) = &args.uncertainty {
        for record in io::parse_box_csv(&read_text(path)?)? {
            uncertainty_by_frame
                .entry(record.frame)
                .or_default()
                .push(record);
        }
    }

    let mut frames = Vec::with_capacity(gt_files.len());
    for (frame_id, gt_path) in gt_files {
        let gts = parse_objects(&gt_path)?;
        let det_path = args.dets.join(gt_path.file_name().unwrap());
        let dets = if det_path.exists() {
            parse_objects(&det_path)?
        } else {
            Vec::new()
        };
        let rows = uncertainty_by_frame.remove(&frame_id).unwrap_or_default();
        if !rows.is_empty() && rows.len() != dets.len() {
            return Err(CliError::Input(format!(
                "frame {frame_id}: {} uncertainty rows for {} detections (rows join by in-file order)",
                rows.len(),
                dets.len()
            )));
        }
        let uncertainty = if rows.is_empty() {
            vec![None; dets.len()]
        } else {
            rows.into_iter().map(Some).collect()
        };
        frames.push(FrameData {
            dets,
            gts,
            uncertainty,
        });
    }
    Ok(frames)
}

fn parse_objects(path: &Path) -> CliResult<Vec<LabeledObject>> {
    let records = io::parse_labels(&read_text(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut objects = Vec::with_capacity(records.len());
    for record in &records {
        let (object, _) = io::to_bev(record)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        objects.push(object);
    }
    Ok(objects)
}

fn evaluate_frame(
    frame: &FrameData,
    thresholds: &[f64; 3],
    difficulty: Option<Difficulty>,
) -> Result<FrameOutcome, CliError> {
    let mut per_class = Vec::with_capacity(3);
    let mut samples = Vec::new();
    for (class, threshold) in Class::EVALUATED.into_iter().zip(thresholds) {
        let result = match_frame(&frame.dets, &frame.gts, *threshold, class, difficulty)
            .map_err(CliError::from)?;
        for pair in &result.pairs {
            if let Some(record) = &frame.uncertainty[pair.det_index] {
                samples.push(BinSample {
                    u: record.uncertain.clone(),
                    iou: pair.iou,
                    distance: frame.dets[pair.det_index].distance(),
                });
            }
        }
        for &(det_index, _) in &result.false_positives {
            if let Some(record) = &frame.uncertainty[det_index] {
                samples.push(BinSample {
                    u: record.uncertain.clone(),
                    iou: 0.0,
                    distance: frame.dets[det_index].distance(),
                });
            }
        }
        per_class.push(result);
    }
    Ok(FrameOutcome { per_class, samples })
}

fn write_report(
    out_dir: &Path,
    frames: &[FrameData],
    outcomes: &[FrameOutcome],
) -> CliResult<()> {
    let mut csv = String::from("class,ap,n_gt,n_det,n_tp,n_fp\n");
    for (ci, class) in Class::EVALUATED.into_iter().enumerate() {
        let results: Vec<MatchResult> = outcomes
            .iter()
            .map(|o| o.per_class[ci].clone())
            .collect();
        let ap = average_precision(&results);
        let n_gt: usize = results
            .iter()
            .map(|r| r.pairs.len() + r.false_negatives.len())
            .sum();
        let n_det: usize = frames
            .iter()
            .map(|f| f.dets.iter().filter(|d| d.class == class).count())
            .sum();
        let n_tp: usize = results.iter().map(|r| r.pairs.len()).sum();
        let n_fp: usize = results.iter().map(|r| r.false_positives.len()).sum();
        csv.push_str(&format!(
            "{},{},{n_gt},{n_det},{n_tp},{n_fp}\n",
            class.as_str(),
            ap.map_or(String::new(), fmt),
        ));
    }
    write_file(&out_dir.join("eval_report.csv"), csv.as_bytes())
}

fn write_bins(out_dir: &Path, bins: &UncertaintyBins) -> CliResult<()> {
    let mut csv = String::from(
        "bin_lo,bin_hi,count,mean_tv,mean_tv_e4,mean_std_x,mean_std_y,mean_std_log_bl,mean_std_log_bw,mean_std_sin2phi,mean_std_cos2phi,mean_mult_std_bl,mean_mult_std_bw,mean_entropy\n",
    );
    for i in 0..bins.counts.len() {
        let lo = bins.edges[i];
        let hi = bins.edges[i + 1];
        match &bins.means[i] {
            None => csv.push_str(&format!("{},{},0,,,,,,,,,,,\n", fmt(lo), fmt(hi))),
            Some(m) => {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    fmt(lo),
                    fmt(hi),
                    bins.counts[i],
                    fmt(m.total_variance),
                    format_tv_e4(m.total_variance),
                    fmt(m.std_devs[0]),
                    fmt(m.std_devs[1]),
                    fmt(m.std_devs[2]),
                    fmt(m.std_devs[3]),
                    fmt(m.std_devs[4]),
                    fmt(m.std_devs[5]),
                    fmt(m.mult_std[0]),
                    fmt(m.mult_std[1]),
                    fmt(m.entropy),
                ));
            }
        }
    }
    let name = format!("bins_{}.csv", bins.axis.as_str());
    write_file(&out_dir.join(name), csv.as_bytes())?;

    let center = |i: usize| (bins.edges[i] + bins.edges[i + 1]) / 2.0;
    let line = |pick: &dyn Fn(&bevbox::eval::BinMeans) -> f64| -> Vec<(f64, f64)> {
        bins.means
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.as_ref().map(|m| (center(i), pick(m))))
            .collect()
    };
    let series = vec![
        PlotSeries {
            name: "std x / m".into(),
            points: line(&|m| m.std_devs[0]),
        },
        PlotSeries {
            name: "std y / m".into(),
            points: line(&|m| m.std_devs[1]),
        },
        PlotSeries {
            name: "mult std b_l".into(),
            points: line(&|m| m.mult_std[0]),
        },
        PlotSeries {
            name: "mult std b_w".into(),
            points: line(&|m| m.mult_std[1]),
        },
        PlotSeries {
            name: "entropy / nats".into(),
            points: line(&|m| m.entropy),
        },
    ];
    let axis_label = match bins.axis {
        BinAxis::Iou => "IoU",
        BinAxis::Distance => "distance / m",
        BinAxis::DiffToBaseAngle => "difference to base angle / deg",
    };
    let svg = io::svg_line_plot(
        &format!("mean uncertainty over {}", bins.axis.as_str()),
        axis_label,
        "mean value",
        &series,
    );
    write_file(
        &out_dir.join(format!("bins_{}.svg", bins.axis.as_str())),
        svg.as_bytes(),
    )
}
