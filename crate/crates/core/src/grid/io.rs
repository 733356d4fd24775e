//! Scenario files: one JSON document plus `hour,value` CSV series.

use super::{
    FlexibleLoad, Generator, GeneratorKind, GridError, GridModel, ScenarioConfig, StorageUnit,
    TransmissionLine, Zone,
};
use crate::io::write_atomic;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// An hourly series given either as a path to a CSV file (relative to the
/// scenario document) or inline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SeriesRef {
    File(String),
    Inline(Vec<f64>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZoneFile {
    id: String,
    demand: SeriesRef,
    #[serde(default)]
    clean_share_min: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorFile {
    id: String,
    zone_id: String,
    kind: GeneratorKind,
    #[serde(default)]
    existing_cap_mw: f64,
    #[serde(default)]
    buildable: bool,
    #[serde(default)]
    retirable: bool,
    #[serde(default)]
    inv_cost_annual: f64,
    #[serde(default)]
    fixed_om: f64,
    #[serde(default)]
    var_om: f64,
    #[serde(default)]
    heat_rate: f64,
    #[serde(default)]
    fuel_price: f64,
    #[serde(default)]
    emissions_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capacity_factor_profile: Option<SeriesRef>,
    #[serde(default)]
    min_stable_fraction: f64,
    #[serde(default)]
    startup_cost: f64,
    #[serde(default)]
    is_clean: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlexibleLoadFile {
    id: String,
    zone_id: String,
    baseline_profile: SeriesRef,
    #[serde(default)]
    max_advance_hours: usize,
    #[serde(default)]
    max_delay_hours: usize,
    #[serde(default)]
    max_charge_rate_mw: Option<f64>,
    #[serde(default = "one")]
    penetration_scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    zones: Vec<ZoneFile>,
    #[serde(default)]
    generators: Vec<GeneratorFile>,
    #[serde(default)]
    storage: Vec<StorageUnit>,
    #[serde(default)]
    lines: Vec<TransmissionLine>,
    #[serde(default)]
    flexible_loads: Vec<FlexibleLoadFile>,
    config: ScenarioConfig,
}

struct SeriesLoader<'a> {
    base: &'a Path,
}

impl SeriesLoader<'_> {
    fn load(&self, entity: &str, field: &str, r: SeriesRef) -> Result<Vec<f64>, GridError> {
        match r {
            SeriesRef::Inline(v) => Ok(v),
            SeriesRef::File(rel) => {
                let path = self.base.join(&rel);
                if !path.exists() {
                    return Err(GridError::MissingSeries {
                        entity: entity.into(),
                        field: field.into(),
                        path: path.display().to_string(),
                    });
                }
                read_series_csv(&path)
            }
        }
    }
}

/// Reads a `hour,value` CSV; hours must run 0, 1, 2, ... in order.
pub(crate) fn read_series_csv(path: &Path) -> Result<Vec<f64>, GridError> {
    let shown = path.display().to_string();
    let parse_err = |line: Option<usize>, message: String| GridError::Parse { path: shown.clone(), line, message };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| parse_err(None, e.to_string()))?;
    let headers = rdr.headers().map_err(|e| parse_err(Some(1), e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "hour" || &headers[1] != "value" {
        return Err(parse_err(Some(1), format!("expected header `hour,value`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| parse_err(Some(line), e.to_string()))?;
        if rec.len() != 2 {
            return Err(parse_err(Some(line), "expected two columns".into()));
        }
        let hour: usize = rec[0].parse().map_err(|_| parse_err(Some(line), format!("field `hour`: bad integer `{}`", &rec[0])))?;
        if hour != k {
            return Err(parse_err(Some(line), format!("field `hour`: expected {k}, found {hour}")));
        }
        let value: f64 = rec[1].parse().map_err(|_| parse_err(Some(line), format!("field `value`: bad number `{}`", &rec[1])))?;
        out.push(value);
    }
    Ok(out)
}

pub(crate) fn series_csv(values: &[f64]) -> String {
    let mut s = String::from("hour,value\n");
    for (h, v) in values.iter().enumerate() {
        s.push_str(&format!("{h},{v}\n"));
    }
    s
}

/// Loads and validates a scenario document and the series it references.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<GridModel, GridError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    parse_with_base(&text, &path.display().to_string(), &base)
}

/// Parses a scenario document whose series are all inline or relative to the
/// current directory.
pub fn parse_scenario_str(text: &str) -> Result<GridModel, GridError> {
    parse_with_base(text, "<string>", Path::new("."))
}

fn parse_with_base(text: &str, shown: &str, base: &Path) -> Result<GridModel, GridError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| GridError::Parse {
        path: shown.to_string(),
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    let loader = SeriesLoader { base };
    let mut zones = Vec::with_capacity(file.zones.len());
    for z in file.zones {
        let demand = loader.load(&z.id, "demand", z.demand)?;
        zones.push(Zone { id: z.id, demand, clean_share_min: z.clean_share_min });
    }
    let mut generators = Vec::with_capacity(file.generators.len());
    for g in file.generators {
        let capacity_factor_profile = match g.capacity_factor_profile {
            Some(r) => Some(loader.load(&g.id, "capacity_factor_profile", r)?),
            None => None,
        };
        generators.push(Generator {
            id: g.id,
            zone_id: g.zone_id,
            kind: g.kind,
            existing_cap_mw: g.existing_cap_mw,
            buildable: g.buildable,
            retirable: g.retirable,
            inv_cost_annual: g.inv_cost_annual,
            fixed_om: g.fixed_om,
            var_om: g.var_om,
            heat_rate: g.heat_rate,
            fuel_price: g.fuel_price,
            emissions_factor: g.emissions_factor,
            capacity_factor_profile,
            min_stable_fraction: g.min_stable_fraction,
            startup_cost: g.startup_cost,
            is_clean: g.is_clean,
        });
    }
    let mut flexible_loads = Vec::with_capacity(file.flexible_loads.len());
    for f in file.flexible_loads {
        let baseline_profile = loader.load(&f.id, "baseline_profile", f.baseline_profile)?;
        flexible_loads.push(FlexibleLoad {
            id: f.id,
            zone_id: f.zone_id,
            baseline_profile,
            max_advance_hours: f.max_advance_hours,
            max_delay_hours: f.max_delay_hours,
            max_charge_rate_mw: f.max_charge_rate_mw,
            penetration_scale: f.penetration_scale,
        });
    }
    let grid = GridModel {
        zones,
        generators,
        storage_units: file.storage,
        lines: file.lines,
        flexible_loads,
        config: file.config,
    };
    grid.validate()?;
    Ok(grid)
}

/// Writes `grid` as a scenario document at `path` with one CSV per series
/// next to it, named `<entity>_<field>.csv`.
pub fn write_scenario(grid: &GridModel, path: impl AsRef<Path>) -> Result<(), GridError> {
    let path = path.as_ref();
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let emit = |entity: &str, field: &str, values: &[f64]| -> Result<SeriesRef, GridError> {
        let name = format!("{entity}_{field}.csv");
        write_atomic(&dir.join(&name), series_csv(values).as_bytes())?;
        Ok(SeriesRef::File(name))
    };
    let mut zones = Vec::new();
    for z in &grid.zones {
        zones.push(ZoneFile { id: z.id.clone(), demand: emit(&z.id, "demand", &z.demand)?, clean_share_min: z.clean_share_min });
    }
    let mut generators = Vec::new();
    for g in &grid.generators {
        let capacity_factor_profile = match &g.capacity_factor_profile {
            Some(p) => Some(emit(&g.id, "capacity_factor", p)?),
            None => None,
        };
        generators.push(GeneratorFile {
            id: g.id.clone(),
            zone_id: g.zone_id.clone(),
            kind: g.kind,
            existing_cap_mw: g.existing_cap_mw,
            buildable: g.buildable,
            retirable: g.retirable,
            inv_cost_annual: g.inv_cost_annual,
            fixed_om: g.fixed_om,
            var_om: g.var_om,
            heat_rate: g.heat_rate,
            fuel_price: g.fuel_price,
            emissions_factor: g.emissions_factor,
            capacity_factor_profile,
            min_stable_fraction: g.min_stable_fraction,
            startup_cost: g.startup_cost,
            is_clean: g.is_clean,
        });
    }
    let mut flexible_loads = Vec::new();
    for f in &grid.flexible_loads {
        flexible_loads.push(FlexibleLoadFile {
            id: f.id.clone(),
            zone_id: f.zone_id.clone(),
            baseline_profile: emit(&f.id, "baseline", &f.baseline_profile)?,
            max_advance_hours: f.max_advance_hours,
            max_delay_hours: f.max_delay_hours,
            max_charge_rate_mw: f.max_charge_rate_mw,
            penetration_scale: f.penetration_scale,
        });
    }
    let doc = ScenarioFile {
        zones,
        generators,
        storage: grid.storage_units.clone(),
        lines: grid.lines.clone(),
        flexible_loads,
        config: grid.config.clone(),
    };
    let text = serde_json::to_string_pretty(&doc).expect("scenario serializes");
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "zones": [{"id": "z", "demand": "demand.csv"}],
        "generators": [{"id": "coal", "zone_id": "z", "kind": "thermal",
                        "existing_cap_mw": 100, "heat_rate": 10, "fuel_price": 2,
                        "emissions_factor": 0.9}],
        "config": {"horizon_hours": 24}
    }"#;

    fn write_fixture(dir: &Path, demand_len: usize) -> PathBuf {
        std::fs::write(dir.join("demand.csv"), series_csv(&vec![50.0; demand_len])).unwrap();
        let p = dir.join("scenario.json");
        std::fs::write(&p, MINIMAL).unwrap();
        p
    }

    #[test]
    fn minimal_scenario_loads() {
        let dir = tempfile::tempdir().unwrap();
        let g = load_scenario(write_fixture(dir.path(), 24)).unwrap();
        assert_eq!(g.horizon(), 24);
        assert_eq!(g.zones[0].demand.len(), 24);
        assert_eq!(g.config.nse_penalty, Some(9000.0));
        assert_eq!(g.config.srme1_fraction, 0.03);
    }

    #[test]
    fn short_series_is_a_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        match load_scenario(write_fixture(dir.path(), 23)) {
            Err(GridError::Validation { entity, field, .. }) => assert_eq!((entity.as_str(), field.as_str()), ("z", "demand")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_series_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("scenario.json");
        std::fs::write(&p, MINIMAL).unwrap();
        assert!(matches!(load_scenario(&p), Err(GridError::MissingSeries { .. })));
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = parse_scenario_str("{\n  \"zones\": [\n  oops\n]}").unwrap_err();
        match err {
            GridError::Parse { line, .. } => assert_eq!(line, Some(3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_csv_row_reports_line_and_field() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, "hour,value\n0,1\n1,abc\n").unwrap();
        match read_series_csv(&p) {
            Err(GridError::Parse { line, message, .. }) => {
                assert_eq!(line, Some(3));
                assert!(message.contains("value"));
            }
            other => panic!("{other:?}"),
        }
    }
}
