use rayon::prelude::*;

use bevbox::eval::Class;
use bevbox::io;
use bevbox::uncert::{build_hull, decode_median, HullConfig, HullPolygon, OrientedBox};

use super::{fmt, read_text, write_file};
use crate::config::ConfigMap;
use crate::errors::{CliError, CliResult};
use crate::HullArgs;

pub fn run(args: &HullArgs) -> CliResult<()> {
    let cfg_map = ConfigMap::load(args.config.as_deref())?;
    let defaults = HullConfig::default();
    let hull_cfg = HullConfig {
        percentile: cfg_map.resolve(args.percentile, "percentile", defaults.percentile)?,
        n_rotations: cfg_map.resolve(args.rotations, "rotations", defaults.n_rotations)?,
        n_mc_samples: cfg_map.resolve(args.samples, "samples", defaults.n_mc_samples)?,
        rng_seed: cfg_map.resolve(args.seed, "seed", defaults.rng_seed)?,
    };
    hull_cfg.validate()?;

    let records = io::parse_box_csv(&read_text(&args.boxes)?)?;

    let results: Vec<(HullPolygon, OrientedBox)> = records
        .par_iter()
        .map(|r| -> Result<_, bevbox::Error> {
            let hull = build_hull(&r.uncertain, &hull_cfg)?;
            let median = decode_median(&r.uncertain)?;
            Ok((hull, median))
        })
        .collect::<Result<_, _>>()
        .map_err(CliError::from)?;

    let mut csv = String::from("# bevbox hull-csv v1\nobject_id,vertex_index,x,y\n");
    for (id, (hull, _)) in results.iter().enumerate() {
        for (vi, v) in hull.vertices().iter().enumerate() {
            csv.push_str(&format!("{id},{vi},{},{}\n", fmt(v.x), fmt(v.y)));
        }
    }
    write_file(&args.out_csv, csv.as_bytes())?;

    if let Some(svg_path) = &args.svg {
        let gt_boxes: Vec<OrientedBox> = match &args.gt {
            None => Vec::new(),
            Some(path) => io::parse_labels(&read_text(path)?)?
                .iter()
                .map(io::to_bev)
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .filter(|(o, _)| o.class != Class::DontCare)
                .map(|(o, _)| o.bev_box)
                .collect(),
        };
        let hulls: Vec<HullPolygon> = results.iter().map(|(h, _)| h.clone()).collect();
        let medians: Vec<OrientedBox> = results.iter().map(|(_, m)| *m).collect();
        let svg = io::svg_overlay(None, &gt_boxes, &medians, &hulls);
        write_file(svg_path, svg.as_bytes())?;
    }
    eprintln!(
        "built {} hulls at percentile {}",
        results.len(),
        hull_cfg.percentile
    );
    Ok(())
}
