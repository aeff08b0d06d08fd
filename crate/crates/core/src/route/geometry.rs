use std::fmt::Write as _;
use std::path::Path;

use super::RouteError;

/// Number of sections a real corridor is divided into when mapped onto the
/// abstract field.
pub const SECTIONS: u32 = 10;

/// Metric layout of a field in a local frame.
///
/// Local `x` runs across the rows, local `y` along them; rows are assumed to
/// have been rotated onto the `y` axis beforehand. `heading_rad` rotates the
/// local frame counter-clockwise and `origin` translates it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldGeometry {
    pub row_spacing_m: f64,
    pub corridor_length_m: f64,
    pub origin_e: f64,
    pub origin_n: f64,
    pub heading_rad: f64,
    /// Distance of headland waypoints beyond the row ends.
    pub headland_offset_m: f64,
}

pub const DEFAULT_HEADLAND_OFFSET_M: f64 = 1.0;

const KEYS: [&str; 6] = [
    "row_spacing_m",
    "corridor_length_m",
    "origin_e",
    "origin_n",
    "heading_rad",
    "headland_offset_m",
];

impl FieldGeometry {
    pub fn new(row_spacing_m: f64, corridor_length_m: f64) -> Result<Self, RouteError> {
        let g = Self {
            row_spacing_m,
            corridor_length_m,
            origin_e: 0.0,
            origin_n: 0.0,
            heading_rad: 0.0,
            headland_offset_m: DEFAULT_HEADLAND_OFFSET_M,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), RouteError> {
        let positive = |key: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(RouteError::BadValue {
                    key: key.into(),
                    value: v.to_string(),
                })
            }
        };
        positive("row_spacing_m", self.row_spacing_m)?;
        positive("corridor_length_m", self.corridor_length_m)?;
        for (key, v) in [
            ("origin_e", self.origin_e),
            ("origin_n", self.origin_n),
            ("heading_rad", self.heading_rad),
            ("headland_offset_m", self.headland_offset_m),
        ] {
            if !v.is_finite() {
                return Err(RouteError::BadValue {
                    key: key.into(),
                    value: v.to_string(),
                });
            }
        }
        if self.headland_offset_m < 0.0 {
            return Err(RouteError::BadValue {
                key: "headland_offset_m".into(),
                value: self.headland_offset_m.to_string(),
            });
        }
        Ok(())
    }

    /// Parses the `key = value` config format.
    ///
    /// Blank lines and `#` comments are ignored. `row_spacing_m` and
    /// `corridor_length_m` are required; the origin and heading default to 0
    /// and the headland offset to 1 m.
    pub fn parse(text: &str) -> Result<Self, RouteError> {
        let mut values: [Option<f64>; 6] = [None; 6];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| RouteError::Syntax {
                line: lineno + 1,
                text: line.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| RouteError::UnknownKey(key.to_string()))?;
            if values[slot].is_some() {
                return Err(RouteError::DuplicateKey(key.to_string()));
            }
            let parsed = value.parse::<f64>().map_err(|_| RouteError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
            })?;
            values[slot] = Some(parsed);
        }
        let required = |slot: usize| values[slot].ok_or_else(|| RouteError::MissingKey(KEYS[slot].into()));
        let g = Self {
            row_spacing_m: required(0)?,
            corridor_length_m: required(1)?,
            origin_e: values[2].unwrap_or(0.0),
            origin_n: values[3].unwrap_or(0.0),
            heading_rad: values[4].unwrap_or(0.0),
            headland_offset_m: values[5].unwrap_or(DEFAULT_HEADLAND_OFFSET_M),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self, RouteError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for (key, v) in KEYS.iter().zip([
            self.row_spacing_m,
            self.corridor_length_m,
            self.origin_e,
            self.origin_n,
            self.heading_rad,
            self.headland_offset_m,
        ]) {
            let _ = writeln!(out, "{key} = {v}");
        }
        out
    }

    /// Local frame to output frame.
    pub fn to_world(&self, x: f64, y: f64) -> (f64, f64) {
        if self.heading_rad == 0.0 {
            return (self.origin_e + x, self.origin_n + y);
        }
        let (s, c) = self.heading_rad.sin_cos();
        (self.origin_e + c * x - s * y, self.origin_n + s * x + c * y)
    }

    /// Output frame back to the local frame.
    pub fn to_local(&self, e: f64, n: f64) -> (f64, f64) {
        let (dx, dy) = (e - self.origin_e, n - self.origin_n);
        if self.heading_rad == 0.0 {
            return (dx, dy);
        }
        let (s, c) = self.heading_rad.sin_cos();
        (c * dx + s * dy, -s * dx + c * dy)
    }
}

/// Nearest section (of [`SECTIONS`]) for a position along a real corridor.
pub fn snap_to_sections(real_y_m: f64, corridor_length_m: f64) -> Result<u32, RouteError> {
    snap_to_n_sections(real_y_m, corridor_length_m, SECTIONS)
}

/// Nearest section centre among `sections` equal divisions.
///
/// Section `k` is centred at `(k + 0.5) * len / sections`; the index is
/// `clamp(round(sections * y / len - 0.5), 0, sections - 1)`.
pub fn snap_to_n_sections(real_y_m: f64, corridor_length_m: f64, sections: u32) -> Result<u32, RouteError> {
    if !(corridor_length_m > 0.0) || !(0.0..=corridor_length_m).contains(&real_y_m) {
        return Err(RouteError::OutOfCorridor {
            y_m: real_y_m,
            length_m: corridor_length_m,
        });
    }
    let n = f64::from(sections);
    let k = (n * real_y_m / corridor_length_m - 0.5).round();
    Ok(k.clamp(0.0, n - 1.0) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snap_nearest_centre() {
        // Centres of sections 4 and 5 in a 207 m corridor: 93.15 m and 113.85 m.
        assert_eq!(snap_to_sections(103.0, 207.0).unwrap(), 4);
        assert_eq!(snap_to_sections(0.0, 207.0).unwrap(), 0);
        assert_eq!(snap_to_sections(207.0, 207.0).unwrap(), 9);
        assert_eq!(snap_to_sections(5.0, 20.0).unwrap(), 2);
        assert!(snap_to_sections(-0.1, 20.0).is_err());
        assert!(snap_to_sections(20.5, 20.0).is_err());
    }

    #[test]
    fn snap_agrees_with_brute_force_nearest_centre() {
        let len = 207.0;
        for i in 0..=2070 {
            let y = f64::from(i) * 0.1;
            let brute = (0..SECTIONS)
                .min_by(|&a, &b| {
                    let ca = (f64::from(a) + 0.5) * len / 10.0;
                    let cb = (f64::from(b) + 0.5) * len / 10.0;
                    (y - ca).abs().total_cmp(&(y - cb).abs())
                })
                .unwrap();
            let snapped = snap_to_sections(y, len).unwrap();
            // Exact midpoints between centres may go either way.
            let cb = (f64::from(brute) + 0.5) * len / 10.0;
            let cs = (f64::from(snapped) + 0.5) * len / 10.0;
            assert!((y - cb).abs() == (y - cs).abs() || snapped == brute, "y = {y}");
        }
    }

    #[test]
    fn parse_config() {
        let g = FieldGeometry::parse(
            "# test field\nrow_spacing_m = 0.76\ncorridor_length_m = 20\nheadland_offset_m = 2.5 # wide\n",
        )
        .unwrap();
        assert_eq!(g.row_spacing_m, 0.76);
        assert_eq!(g.corridor_length_m, 20.0);
        assert_eq!(g.headland_offset_m, 2.5);
        assert_eq!(g.origin_e, 0.0);
        assert_eq!(FieldGeometry::parse(&g.to_config_string()).unwrap(), g);
    }

    #[test]
    fn parse_errors_name_the_key() {
        let err = FieldGeometry::parse("row_spacing_m = 1\ncorridor_length_m = 5\nrow_spacing = 3\n").unwrap_err();
        assert!(matches!(&err, RouteError::UnknownKey(k) if k == "row_spacing"));
        assert!(err.to_string().contains("row_spacing"));
        let err = FieldGeometry::parse("row_spacing_m = 1\n").unwrap_err();
        assert!(matches!(err, RouteError::MissingKey(k) if k == "corridor_length_m"));
        let err = FieldGeometry::parse("row_spacing_m = abc\ncorridor_length_m = 5").unwrap_err();
        assert!(matches!(err, RouteError::BadValue { key, .. } if key == "row_spacing_m"));
        let err = FieldGeometry::parse("row_spacing_m = -1\ncorridor_length_m = 5").unwrap_err();
        assert!(matches!(err, RouteError::BadValue { key, .. } if key == "row_spacing_m"));
        assert!(matches!(
            FieldGeometry::parse("row_spacing_m 1").unwrap_err(),
            RouteError::Syntax { line: 1, .. }
        ));
    }

    #[test]
    fn frame_transform_round_trip() {
        let mut g = FieldGeometry::new(0.76, 20.0).unwrap();
        g.origin_e = 500_000.0;
        g.origin_n = 4_650_000.0;
        g.heading_rad = 0.3;
        let (e, n) = g.to_world(3.2, 11.0);
        let (x, y) = g.to_local(e, n);
        assert!((x - 3.2).abs() < 1e-6 && (y - 11.0).abs() < 1e-6);
    }
}
