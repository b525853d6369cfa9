//! CSV interchange for uncertain boxes: one detection per row,
//!
//! ```text
//! frame,class,score,x,y,log_bl,log_bw,sin2phi,cos2phi,var_x,var_y,var_log_bl,var_log_bw,var_sin2phi,var_cos2phi,entropy
//! ```

use crate::error::{Error, Result};
use crate::eval::Class;
use crate::uncert::{BoxParams, UncertainBox};

pub const BOX_CSV_VERSION: &str = "# bevbox box-csv v1";
pub const BOX_CSV_HEADER: &str = "frame,class,score,x,y,log_bl,log_bw,sin2phi,cos2phi,var_x,var_y,var_log_bl,var_log_bw,var_sin2phi,var_cos2phi,entropy";

#[derive(Debug, Clone, PartialEq)]
pub struct BoxRecord {
    pub frame: usize,
    pub class: Class,
    pub score: f64,
    pub uncertain: UncertainBox,
}

fn class_from_str(s: &str, line: usize) -> Result<Class> {
    match s {
        "Car" => Ok(Class::Car),
        "Pedestrian" => Ok(Class::Pedestrian),
        "Cyclist" => Ok(Class::Cyclist),
        "DontCare" => Ok(Class::DontCare),
        other => Err(Error::Parse {
            line,
            msg: format!("unknown class '{other}'"),
        }),
    }
}

pub fn write_box_csv(records: &[BoxRecord]) -> String {
    let mut out = String::from(BOX_CSV_VERSION);
    out.push('\n');
    out.push_str(BOX_CSV_HEADER);
    out.push('\n');
    for r in records {
        let m = r.uncertain.mean.as_array();
        let v = r.uncertain.var.as_array();
        out.push_str(&format!(
            "{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}\n",
            r.frame,
            r.class.as_str(),
            r.score,
            m[0],
            m[1],
            m[2],
            m[3],
            m[4],
            m[5],
            v[0],
            v[1],
            v[2],
            v[3],
            v[4],
            v[5],
            r.uncertain.class_entropy,
        ));
    }
    out
}

pub fn parse_box_csv(text: &str) -> Result<Vec<BoxRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("frame,") || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 16 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 16 columns, got {}", fields.len()),
            });
        }
        let frame: usize = fields[0].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad frame '{}'", fields[0]),
        })?;
        let class = class_from_str(fields[1].trim(), line_no)?;
        let mut nums = [0.0f64; 14];
        for (k, field) in fields[2..].iter().enumerate() {
            nums[k] = field.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("column {} is not numeric: '{field}'", k + 3),
            })?;
        }
        let uncertain = UncertainBox {
            mean: BoxParams::from_array([nums[1], nums[2], nums[3], nums[4], nums[5], nums[6]]),
            var: BoxParams::from_array([nums[7], nums[8], nums[9], nums[10], nums[11], nums[12]]),
            class_scores: Vec::new(),
            class_entropy: nums[13],
        };
        uncertain.validate().map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        records.push(BoxRecord {
            frame,
            class,
            score: nums[0],
            uncertain,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> BoxRecord {
        BoxRecord {
            frame: 3,
            class: Class::Car,
            score: 0.875,
            uncertain: UncertainBox {
                mean: BoxParams::from_array([10.5, -2.25, 1.435, 0.5596, 0.389, 0.921]),
                var: BoxParams::from_array([0.01, 0.02, 0.001, 0.002, 0.003, 0.004]),
                class_scores: Vec::new(),
                class_entropy: 0.35,
            },
        }
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![record()];
        let text = write_box_csv(&records);
        assert!(text.starts_with("# bevbox box-csv v1\nframe,class,score,x,y"));
        let parsed = parse_box_csv(&text).unwrap();
        assert_eq!(parsed, records);
    }

    #[test]
    fn csv_rejects_malformed_rows() {
        let err = parse_box_csv("1,Car,0.5,1,2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));

        let mut text = write_box_csv(&[record()]);
        text = text.replace("0.875", "zebra");
        assert!(parse_box_csv(&text).is_err());

        let negative_var = "0,Car,0.5,0,0,0,0,0,1,-0.1,0,0,0,0,0,0";
        assert!(parse_box_csv(negative_var).is_err());
    }
}
