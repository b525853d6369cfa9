use bevbox::gridmap::{rasterize, GridConfig, STANDARD_LAYERS};
use bevbox::io;

use super::{parse_origin, read_file, read_text, write_file};
use crate::config::ConfigMap;
use crate::errors::CliResult;
use crate::RasterizeArgs;

pub fn run(args: &RasterizeArgs) -> CliResult<()> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let d = GridConfig::default();
    let grid_cfg = GridConfig {
        x_min: cfg.resolve(args.x_min, "x-min", d.x_min)?,
        x_max: cfg.resolve(args.x_max, "x-max", d.x_max)?,
        y_min: cfg.resolve(args.y_min, "y-min", d.y_min)?,
        y_max: cfg.resolve(args.y_max, "y-max", d.y_max)?,
        cell_size: cfg.resolve(args.cell_size, "cell-size", d.cell_size)?,
        ground_z: cfg.resolve(args.ground_z, "ground-z", d.ground_z)?,
    };
    let origin_text = cfg.resolve(
        args.sensor_origin.clone(),
        "sensor-origin",
        "0,0,0".to_string(),
    )?;
    let origin = parse_origin(&origin_text)?;

    let cloud = if args.ascii {
        io::parse_point_cloud_ascii(&read_text(&args.cloud)?, origin)?
    } else {
        io::read_point_cloud(&read_file(&args.cloud)?, origin)?
    };

    let grid = rasterize(&cloud, &grid_cfg)?;

    let bytes = match &args.layers {
        None => io::write_gridmap(&grid),
        Some(list) => {
            let names: Vec<&str> = list.split(',').map(str::trim).collect();
            let view = grid.select_layers(&names)?;
            io::write_gridmap_view(&view)
        }
    };
    write_file(&args.out, &bytes)?;

    if let Some(svg_path) = &args.svg {
        let svg = io::svg_overlay(Some(&grid), &[], &[], &[]);
        write_file(svg_path, svg.as_bytes())?;
    }
    eprintln!(
        "rasterized {} points into {} ({} layers)",
        cloud.len(),
        args.out.display(),
        args.layers
            .as_ref()
            .map_or(STANDARD_LAYERS.len(), |l| l.split(',').count())
    );
    Ok(())
}
