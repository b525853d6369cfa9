//! The grid-map file format.
//!
//! An ASCII header line
//!
//! ```text
//! GRIDMAP v1 <rows> <cols> <cell_size> <x_min> <y_min> <layer-count> <layer-names...>
//! ```
//!
//! followed by row-major little-endian `f32` data per layer, layers
//! concatenated in header order. Layer values round-trip bit-exactly
//! because maps quantize through `f32` on construction. The header does
//! not carry `ground_z`; readers restore it as 0.

use crate::error::{Error, Result};
use crate::gridmap::{GridConfig, GridMap, LayerView};

pub fn write_gridmap(grid: &GridMap) -> Vec<u8> {
    let names: Vec<&str> = grid.layer_names().iter().map(|s| s.as_str()).collect();
    let view = grid
        .select_layers(&names)
        .expect("own layer names always select");
    write_gridmap_view(&view)
}

pub fn write_gridmap_view(view: &LayerView<'_>) -> Vec<u8> {
    let cfg = view.config;
    let mut header = format!(
        "GRIDMAP v1 {} {} {:?} {:?} {:?} {}",
        cfg.rows(),
        cfg.cols(),
        cfg.cell_size,
        cfg.x_min,
        cfg.y_min,
        view.names.len()
    );
    for name in &view.names {
        header.push(' ');
        header.push_str(name);
    }
    header.push('\n');

    let mut out = header.into_bytes();
    for layer in &view.layers {
        for &v in *layer {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn read_gridmap(bytes: &[u8]) -> Result<GridMap> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing header line".into(),
        })?;
    let header = std::str::from_utf8(&bytes[..newline]).map_err(|_| Error::Parse {
        line: 1,
        msg: "header is not UTF-8".into(),
    })?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() < 8 || tokens[0] != "GRIDMAP" || tokens[1] != "v1" {
        return Err(Error::Parse {
            line: 1,
            msg: "bad grid-map magic/header".into(),
        });
    }
    let parse_usize = |t: &str| -> Result<usize> {
        t.parse().map_err(|_| Error::Parse {
            line: 1,
            msg: format!("bad integer '{t}'"),
        })
    };
    let parse_f64 = |t: &str| -> Result<f64> {
        t.parse().map_err(|_| Error::Parse {
            line: 1,
            msg: format!("bad float '{t}'"),
        })
    };
    let rows = parse_usize(tokens[2])?;
    let cols = parse_usize(tokens[3])?;
    let cell_size = parse_f64(tokens[4])?;
    let x_min = parse_f64(tokens[5])?;
    let y_min = parse_f64(tokens[6])?;
    let layer_count = parse_usize(tokens[7])?;
    if tokens.len() != 8 + layer_count {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "header names {} layers but lists {}",
                layer_count,
                tokens.len() - 8
            ),
        });
    }
    let names: Vec<String> = tokens[8..].iter().map(|s| s.to_string()).collect();

    let cfg = GridConfig {
        x_min,
        x_max: x_min + cols as f64 * cell_size,
        y_min,
        y_max: y_min + rows as f64 * cell_size,
        cell_size,
        ground_z: 0.0,
    };
    if cfg.rows() != rows || cfg.cols() != cols {
        return Err(Error::Parse {
            line: 1,
            msg: "header extent does not reproduce the row/col counts".into(),
        });
    }

    let body = &bytes[newline + 1..];
    let expected = rows * cols * layer_count * 4;
    if body.len() != expected {
        return Err(Error::Length(format!(
            "grid body holds {} bytes, expected {expected}",
            body.len()
        )));
    }
    let mut layers = Vec::with_capacity(layer_count);
    for li in 0..layer_count {
        let start = li * rows * cols * 4;
        let layer: Vec<f64> = body[start..start + rows * cols * 4]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        layers.push(layer);
    }
    GridMap::from_layers(cfg, names, layers)
}
