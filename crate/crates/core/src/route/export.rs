use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Value};

use super::{Direction, Phase, RouteError, Waypoint, WaypointPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    GeoJson,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::GeoJson => "geojson",
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for ExportFormat {
    type Err = RouteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "geojson" => Ok(ExportFormat::GeoJson),
            other => Err(RouteError::Malformed(format!("unknown export format `{other}`"))),
        }
    }
}

/// Writes `x_m,y_m,phase,direction` rows with a header.
pub fn to_csv<W: Write>(path: &WaypointPath, out: W) -> Result<(), RouteError> {
    let mut w = csv::Writer::from_writer(out);
    for p in path.points() {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn from_csv<R: Read>(input: R) -> Result<WaypointPath, RouteError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["x_m", "y_m", "phase", "direction"] {
        return Err(RouteError::Malformed(format!("unexpected CSV header {header:?}")));
    }
    let points = r.deserialize().collect::<Result<Vec<Waypoint>, _>>()?;
    WaypointPath::new(points)
}

/// A GeoJSON Feature whose geometry is a LineString (a Point for single
/// waypoint paths) and whose properties carry per-vertex `phases` and
/// `directions` arrays.
pub fn to_geojson(path: &WaypointPath) -> Value {
    let pts = path.points();
    let coords: Vec<Value> = pts.iter().map(|p| json!([p.x_m, p.y_m])).collect();
    let geometry = if coords.len() == 1 {
        json!({ "type": "Point", "coordinates": coords[0] })
    } else {
        json!({ "type": "LineString", "coordinates": coords })
    };
    json!({
        "type": "Feature",
        "geometry": geometry,
        "properties": {
            "phases": pts.iter().map(|p| p.phase).collect::<Vec<_>>(),
            "directions": pts.iter().map(|p| p.direction).collect::<Vec<_>>(),
        }
    })
}

pub fn from_geojson(value: &Value) -> Result<WaypointPath, RouteError> {
    let bad = |what: &str| RouteError::Malformed(format!("GeoJSON: {what}"));
    if value["type"] != "Feature" {
        return Err(bad("expected a Feature"));
    }
    let geometry = &value["geometry"];
    let coords: Vec<[f64; 2]> = match geometry["type"].as_str() {
        Some("LineString") => serde_json::from_value(geometry["coordinates"].clone())?,
        Some("Point") => vec![serde_json::from_value(geometry["coordinates"].clone())?],
        _ => return Err(bad("geometry must be a LineString or Point")),
    };
    let phases: Vec<Phase> = serde_json::from_value(value["properties"]["phases"].clone())?;
    let directions: Vec<Direction> = serde_json::from_value(value["properties"]["directions"].clone())?;
    if phases.len() != coords.len() || directions.len() != coords.len() {
        return Err(bad("property arrays do not match the coordinate count"));
    }
    let points = coords
        .into_iter()
        .zip(phases)
        .zip(directions)
        .map(|(([x_m, y_m], phase), direction)| Waypoint {
            x_m,
            y_m,
            phase,
            direction,
        })
        .collect();
    WaypointPath::new(points)
}

pub fn write_path(path: &WaypointPath, format: ExportFormat, file: &Path) -> Result<(), RouteError> {
    let mut out = BufWriter::new(File::create(file)?);
    match format {
        ExportFormat::Csv => to_csv(path, &mut out)?,
        ExportFormat::GeoJson => {
            serde_json::to_writer_pretty(&mut out, &to_geojson(path))?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_path(format: ExportFormat, file: &Path) -> Result<WaypointPath, RouteError> {
    match format {
        ExportFormat::Csv => from_csv(File::open(file)?),
        ExportFormat::GeoJson => {
            let value: Value = serde_json::from_reader(File::open(file)?)?;
            from_geojson(&value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> WaypointPath {
        let wp = |x_m, y_m, phase, direction| Waypoint {
            x_m,
            y_m,
            phase,
            direction,
        };
        WaypointPath::new(vec![
            wp(0.38, 11.0, Phase::Exit, Direction::Forward),
            wp(0.38, 21.0, Phase::Exit, Direction::Forward),
            wp(4.18, 21.0, Phase::Switch, Direction::Forward),
        ])
        .unwrap()
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        to_csv(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x_m,y_m,phase,direction");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "4.18,21.0,switch,forward");
        assert_eq!(from_csv(text.as_bytes()).unwrap(), sample());
    }

    #[test]
    fn csv_rejects_wrong_header() {
        assert!(from_csv("x,y,phase,direction\n1,2,exit,forward\n".as_bytes()).is_err());
    }

    #[test]
    fn geojson_round_trip() {
        let v = to_geojson(&sample());
        assert_eq!(v["geometry"]["type"], "LineString");
        assert_eq!(v["properties"]["phases"][2], "switch");
        let text = serde_json::to_string(&v).unwrap();
        let back = from_geojson(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn single_point_is_a_point_feature() {
        let p = WaypointPath::new(vec![Waypoint {
            x_m: 1.5,
            y_m: 2.0,
            phase: Phase::Approach,
            direction: Direction::Forward,
        }])
        .unwrap();
        let v = to_geojson(&p);
        assert_eq!(v["geometry"]["type"], "Point");
        assert_eq!(from_geojson(&v).unwrap(), p);
    }
}
