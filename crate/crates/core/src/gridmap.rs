//! Multi-layer top-view grid maps rasterized from a single range sensor.
//!
//! A [`GridMap`] holds named float rasters over ground-plane cells. The
//! standard layers are per-cell reflection counts, minimum and maximum
//! height above ground, mean reflection intensity, and the maximum height
//! of occlusions cast by objects (computed by extending the ray from the
//! sensor origin through each reflection beyond the hit point).
//!
//! Layer values are quantized through `f32` on construction so the binary
//! file format round-trips bit-exactly.

use crate::error::{Error, Result};

pub const LAYER_DETECTIONS: &str = "detections";
pub const LAYER_Z_MIN: &str = "z_min";
pub const LAYER_Z_MAX: &str = "z_max";
pub const LAYER_INTENSITY_MEAN: &str = "intensity_mean";
pub const LAYER_OCCLUSION_HEIGHT: &str = "occlusion_height";

/// Layer order used by [`rasterize`] and the grid-map file format.
pub const STANDARD_LAYERS: [&str; 5] = [
    LAYER_DETECTIONS,
    LAYER_Z_MIN,
    LAYER_Z_MAX,
    LAYER_INTENSITY_MEAN,
    LAYER_OCCLUSION_HEIGHT,
];

/// Points more than this far below the ground plane are discarded as
/// ground-return noise.
pub const GROUND_NOISE_MARGIN: f64 = 0.3;

/// One lidar return: position in meters, intensity in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointXyzi {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub intensity: f64,
}

/// A point set from a single range sensor together with the sensor origin.
#[derive(Debug, Clone)]
pub struct PointCloud {
    pub points: Vec<PointXyzi>,
    pub sensor_origin: [f64; 3],
}

impl PointCloud {
    /// Build a cloud, validating coordinates and normalizing intensities.
    ///
    /// Intensities already in `[0, 1]` are kept as-is; if any exceed 1 the
    /// whole channel is divided by its maximum.
    pub fn new(mut points: Vec<PointXyzi>, sensor_origin: [f64; 3]) -> Result<Self> {
        if !sensor_origin.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("sensor origin must be finite".into()));
        }
        let mut max_intensity = 0.0f64;
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite() && p.intensity.is_finite())
            {
                return Err(Error::Config(format!("non-finite point at index {i}")));
            }
            if p.intensity < 0.0 {
                return Err(Error::Config(format!(
                    "negative intensity {} at index {i}",
                    p.intensity
                )));
            }
            max_intensity = max_intensity.max(p.intensity);
        }
        if max_intensity > 1.0 {
            for p in &mut points {
                p.intensity /= max_intensity;
            }
        }
        Ok(Self {
            points,
            sensor_origin,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Grid extent, resolution and ground-plane height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub cell_size: f64,
    pub ground_z: f64,
}

impl Default for GridConfig {
    /// 60 m forward, ±30 m lateral, 0.1 m cells, ground 1.73 m below the
    /// sensor origin (a roof-mounted lidar frame).
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: 60.0,
            y_min: -30.0,
            y_max: 30.0,
            cell_size: 0.1,
            ground_z: -1.73,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.x_min,
            self.x_max,
            self.y_min,
            self.y_max,
            self.cell_size,
            self.ground_z,
        ];
        if !vals.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("grid config must be finite".into()));
        }
        if self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::Config("grid extent must be positive".into()));
        }
        if self.cell_size <= 0.0 {
            return Err(Error::Config("cell size must be positive".into()));
        }
        Ok(())
    }

    /// Rows index y, columns index x.
    pub fn rows(&self) -> usize {
        ((self.y_max - self.y_min) / self.cell_size).ceil() as usize
    }

    pub fn cols(&self) -> usize {
        ((self.x_max - self.x_min) / self.cell_size).ceil() as usize
    }

    /// Cell containing `(x, y)`, or `None` outside the extent.
    pub fn cell_index(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let col = (x - self.x_min) / self.cell_size;
        let row = (y - self.y_min) / self.cell_size;
        if col < 0.0 || row < 0.0 {
            return None;
        }
        let (col, row) = (col.floor() as usize, row.floor() as usize);
        if col >= self.cols() || row >= self.rows() {
            return None;
        }
        Some((row, col))
    }

    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.x_min + (col as f64 + 0.5) * self.cell_size,
            self.y_min + (row as f64 + 0.5) * self.cell_size,
        )
    }
}

/// Named float rasters sharing one grid geometry, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    pub config: GridConfig,
    names: Vec<String>,
    layers: Vec<Vec<f64>>,
}

impl GridMap {
    pub fn zeros(config: GridConfig, names: &[&str]) -> Result<Self> {
        config.validate()?;
        let n = config.rows() * config.cols();
        Ok(Self {
            config,
            names: names.iter().map(|s| s.to_string()).collect(),
            layers: names.iter().map(|_| vec![0.0; n]).collect(),
        })
    }

    pub fn from_layers(config: GridConfig, names: Vec<String>, layers: Vec<Vec<f64>>) -> Result<Self> {
        config.validate()?;
        let n = config.rows() * config.cols();
        if names.len() != layers.len() {
            return Err(Error::Config("layer name/data count mismatch".into()));
        }
        if layers.iter().any(|l| l.len() != n) {
            return Err(Error::Config("layer size does not match grid extent".into()));
        }
        Ok(Self {
            config,
            names,
            layers,
        })
    }

    pub fn rows(&self) -> usize {
        self.config.rows()
    }

    pub fn cols(&self) -> usize {
        self.config.cols()
    }

    pub fn layer_names(&self) -> &[String] {
        &self.names
    }

    pub fn layer(&self, name: &str) -> Option<&[f64]> {
        let idx = self.names.iter().position(|n| n == name)?;
        Some(&self.layers[idx])
    }

    pub fn layer_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let idx = self.names.iter().position(|n| n == name)?;
        Some(&mut self.layers[idx])
    }

    /// Value of `name` at `(row, col)`; panics on unknown layer.
    pub fn at(&self, name: &str, row: usize, col: usize) -> f64 {
        let cols = self.cols();
        self.layer(name).expect("unknown layer")[row * cols + col]
    }

    /// Borrowed view selecting a subset of layers, in the given order.
    pub fn select_layers(&self, names: &[&str]) -> Result<LayerView<'_>> {
        let mut sel_names = Vec::with_capacity(names.len());
        let mut sel_layers = Vec::with_capacity(names.len());
        for &want in names {
            let idx = self
                .names
                .iter()
                .position(|n| n == want)
                .ok_or_else(|| Error::Config(format!("unknown layer '{want}'")))?;
            sel_names.push(self.names[idx].as_str());
            sel_layers.push(self.layers[idx].as_slice());
        }
        Ok(LayerView {
            config: &self.config,
            names: sel_names,
            layers: sel_layers,
        })
    }

    /// Quantize every value through `f32` (file-format precision).
    fn quantize(&mut self) {
        for layer in &mut self.layers {
            for v in layer.iter_mut() {
                *v = *v as f32 as f64;
            }
        }
    }
}

/// Borrowed selection of layers from a [`GridMap`].
#[derive(Debug, Clone)]
pub struct LayerView<'a> {
    pub config: &'a GridConfig,
    pub names: Vec<&'a str>,
    pub layers: Vec<&'a [f64]>,
}

/// Whether a point survives the ground-noise filter.
fn above_ground_filter(z: f64, ground_z: f64) -> bool {
    z >= ground_z - GROUND_NOISE_MARGIN
}

/// Rasterize a point cloud into the standard five-layer grid map.
///
/// Per cell: `detections` counts the in-cell points, `z_min`/`z_max` hold
/// the extreme point heights above `ground_z`, `intensity_mean` the mean
/// intensity. Cells without detections keep 0 in all value layers, with
/// `detections == 0` as the validity mask. Points outside the extent or
/// below the ground-noise margin are ignored. The occlusion layer is
/// filled by [`cast_occlusions`].
///
/// Accumulation is order-canonical, so any permutation of the input
/// points yields a bit-identical map.
pub fn rasterize(cloud: &PointCloud, cfg: &GridConfig) -> Result<GridMap> {
    cfg.validate()?;
    if cloud.is_empty() {
        return Err(Error::EmptyInput("point cloud has no points".into()));
    }

    let cols = cfg.cols();
    let mut grid = GridMap::zeros(*cfg, &STANDARD_LAYERS)?;

    // (cell, intensity, z) tuples in canonical order
    let mut entries: Vec<(usize, f64, f64)> = cloud
        .points
        .iter()
        .filter(|p| above_ground_filter(p.z, cfg.ground_z))
        .filter_map(|p| {
            cfg.cell_index(p.x, p.y)
                .map(|(r, c)| (r * cols + c, p.intensity, p.z))
        })
        .collect();
    entries.sort_unstable_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });

    {
        let mut i = 0;
        while i < entries.len() {
            let cell = entries[i].0;
            let mut j = i;
            let mut count = 0u64;
            let mut z_lo = f64::INFINITY;
            let mut z_hi = f64::NEG_INFINITY;
            let mut intensity_sum = 0.0;
            while j < entries.len() && entries[j].0 == cell {
                let (_, intensity, z) = entries[j];
                count += 1;
                z_lo = z_lo.min(z);
                z_hi = z_hi.max(z);
                intensity_sum += intensity;
                j += 1;
            }
            grid.layer_mut(LAYER_DETECTIONS).unwrap()[cell] = count as f64;
            grid.layer_mut(LAYER_Z_MIN).unwrap()[cell] = z_lo - cfg.ground_z;
            grid.layer_mut(LAYER_Z_MAX).unwrap()[cell] = z_hi - cfg.ground_z;
            grid.layer_mut(LAYER_INTENSITY_MEAN).unwrap()[cell] = intensity_sum / count as f64;
            i = j;
        }
    }

    cast_occlusions(cloud, cfg, &mut grid)?;
    grid.quantize();
    Ok(grid)
}

/// Fill the `occlusion_height` layer by extending the ray from the sensor
/// origin through every reflection beyond the hit point.
///
/// For a hit at horizontal range `r_p` and height `z_p` above ground seen
/// from a sensor at height `z_s`, a traversed cell whose center lies at
/// range `r > r_p` receives the shadow boundary height
/// `h(r) = z_s + (z_p - z_s) * r / r_p`, clamped to 0 at the ground. Each
/// cell keeps the maximum over all rays; cells never shadowed hold 0.
pub fn cast_occlusions(cloud: &PointCloud, cfg: &GridConfig, grid: &mut GridMap) -> Result<()> {
    cfg.validate()?;
    let sensor_height = cloud.sensor_origin[2] - cfg.ground_z;
    if sensor_height <= 0.0 {
        return Err(Error::Geometry(format!(
            "sensor origin z {} is at or below the ground plane {}",
            cloud.sensor_origin[2], cfg.ground_z
        )));
    }
    if grid.layer(LAYER_OCCLUSION_HEIGHT).is_none() {
        return Err(Error::Config("grid has no occlusion_height layer".into()));
    }

    let (ox, oy) = (cloud.sensor_origin[0], cloud.sensor_origin[1]);
    let cols = grid.cols();

    for p in &cloud.points {
        if !above_ground_filter(p.z, cfg.ground_z) {
            continue;
        }
        let dx = p.x - ox;
        let dy = p.y - oy;
        let hit_range = dx.hypot(dy);
        if hit_range < 1e-9 {
            continue;
        }
        let dir = (dx / hit_range, dy / hit_range);
        let hit_height = p.z - cfg.ground_z;

        let layer = grid.layer_mut(LAYER_OCCLUSION_HEIGHT).unwrap();
        traverse_ray(cfg, (ox, oy), dir, hit_range, |row, col, center_range| {
            let h = sensor_height + (hit_height - sensor_height) * (center_range / hit_range);
            let h = h.max(0.0);
            let cell = &mut layer[row * cols + col];
            if h > *cell {
                *cell = h;
            }
        });
    }

    // keep the layer at file precision even when called standalone
    for v in grid.layer_mut(LAYER_OCCLUSION_HEIGHT).unwrap() {
        *v = *v as f32 as f64;
    }
    Ok(())
}

/// Walk grid cells along `origin + t * dir` for `t > start_range`
/// (Amanatides–Woo stepping) and call `visit(row, col, center_range)` for
/// every traversed cell whose center lies beyond `start_range`.
fn traverse_ray<F: FnMut(usize, usize, f64)>(
    cfg: &GridConfig,
    origin: (f64, f64),
    dir: (f64, f64),
    start_range: f64,
    mut visit: F,
) {
    let rows = cfg.rows() as isize;
    let cols = cfg.cols() as isize;
    let x_hi = cfg.x_min + cols as f64 * cfg.cell_size;
    let y_hi = cfg.y_min + rows as f64 * cfg.cell_size;

    // clip the ray parameter to the grid rectangle (slab method)
    let mut t0 = start_range;
    let mut t1 = f64::INFINITY;
    for (o, d, lo, hi) in [
        (origin.0, dir.0, cfg.x_min, x_hi),
        (origin.1, dir.1, cfg.y_min, y_hi),
    ] {
        if d.abs() < 1e-15 {
            if o < lo || o >= hi {
                return;
            }
        } else {
            let (ta, tb) = ((lo - o) / d, (hi - o) / d);
            let (ta, tb) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(ta);
            t1 = t1.min(tb);
        }
    }
    if t0 >= t1 {
        return;
    }

    // nudge inside the boundary before locating the start cell
    let eps = 1e-9 * cfg.cell_size.max(1.0);
    let start = (origin.0 + dir.0 * (t0 + eps), origin.1 + dir.1 * (t0 + eps));
    let mut col = ((start.0 - cfg.x_min) / cfg.cell_size).floor() as isize;
    let mut row = ((start.1 - cfg.y_min) / cfg.cell_size).floor() as isize;
    if col < 0 || col >= cols || row < 0 || row >= rows {
        return;
    }

    let step_c: isize = if dir.0 > 0.0 { 1 } else { -1 };
    let step_r: isize = if dir.1 > 0.0 { 1 } else { -1 };
    let mut t_max_x = if dir.0.abs() < 1e-15 {
        f64::INFINITY
    } else {
        let next = cfg.x_min + (col + if dir.0 > 0.0 { 1 } else { 0 }) as f64 * cfg.cell_size;
        (next - origin.0) / dir.0
    };
    let mut t_max_y = if dir.1.abs() < 1e-15 {
        f64::INFINITY
    } else {
        let next = cfg.y_min + (row + if dir.1 > 0.0 { 1 } else { 0 }) as f64 * cfg.cell_size;
        (next - origin.1) / dir.1
    };
    let t_delta_x = if dir.0.abs() < 1e-15 {
        f64::INFINITY
    } else {
        cfg.cell_size / dir.0.abs()
    };
    let t_delta_y = if dir.1.abs() < 1e-15 {
        f64::INFINITY
    } else {
        cfg.cell_size / dir.1.abs()
    };

    let max_steps = (rows + cols + 4) as usize;
    for _ in 0..max_steps {
        let (cx, cy) = cfg.cell_center(row as usize, col as usize);
        let center_range = (cx - origin.0).hypot(cy - origin.1);
        if center_range > start_range {
            visit(row as usize, col as usize, center_range);
        }
        if t_max_x < t_max_y {
            col += step_c;
            t_max_x += t_delta_x;
        } else {
            row += step_r;
            t_max_y += t_delta_y;
        }
        if col < 0 || col >= cols || row < 0 || row >= rows {
            return;
        }
    }
}

/// The two-layer occupied-space encoding: a view of `z_min` and `z_max`.
pub fn range_layers(grid: &GridMap) -> LayerView<'_> {
    grid.select_layers(&[LAYER_Z_MIN, LAYER_Z_MAX])
        .expect("standard grid always has z layers")
}
