//! File formats: KITTI labels, point-cloud binaries, grid-map files, the
//! uncertain-box CSV interchange, and SVG emitters.
//!
//! All binary formats are little-endian. Versioned formats carry a
//! leading magic token; the fixed external KITTI formats do not.

pub mod boxcsv;
pub mod cloud;
pub mod gridfile;
pub mod kitti;
pub mod svg;

pub use boxcsv::{parse_box_csv, write_box_csv, BoxRecord};
pub use cloud::{
    parse_point_cloud_ascii, read_point_cloud, write_point_cloud, write_point_cloud_ascii,
};
pub use gridfile::{read_gridmap, write_gridmap, write_gridmap_view};
pub use kitti::{parse_labels, to_bev, write_labels, CameraAux, KittiLabelRecord};
pub use svg::{svg_line_plot, svg_overlay, PlotSeries};
