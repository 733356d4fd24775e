use super::DispatchResult;
use crate::grid::GridModel;
use crate::io::{sig12, write_atomic};
use serde_json::json;
use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

pub(crate) fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

/// Writes `dispatch.csv`, `capacity.csv`, `emissions.csv`, `prices.csv` and
/// `summary.json` into `dir`, returning the paths written.
pub fn write_dispatch_outputs(result: &DispatchResult, grid: &GridModel, dir: &Path) -> io::Result<Vec<PathBuf>> {
    let h = result.horizon();
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> io::Result<()> {
        let p = dir.join(name);
        write_atomic(&p, &bytes)?;
        written.push(p);
        Ok(())
    };

    let mut rows = Vec::new();
    for t in 0..h {
        for g in &result.generators {
            rows.push(vec![t.to_string(), g.zone_id.clone(), g.id.clone(), sig12(g.generation[t])]);
        }
    }
    put("dispatch.csv", csv_bytes(&["hour", "zone", "unit", "generation_mw"], rows)?)?;

    let mut rows: Vec<Vec<String>> = result
        .generators
        .iter()
        .map(|g| vec![g.id.clone(), sig12(g.existing_mw), sig12(g.new_mw), sig12(g.retired_mw)])
        .collect();
    rows.extend(
        result.storage.iter().map(|s| vec![s.id.clone(), sig12(s.existing_power_mw), sig12(s.new_power_mw), sig12(0.0)]),
    );
    rows.extend(result.lines.iter().map(|l| vec![l.id.clone(), sig12(l.existing_mw), sig12(l.new_mw), sig12(0.0)]));
    put("capacity.csv", csv_bytes(&["unit", "existing_mw", "new_mw", "retired_mw"], rows)?)?;

    let per_zone = |m: &Vec<Vec<f64>>| {
        let mut rows = Vec::new();
        for t in 0..h {
            for (z, id) in result.zone_ids.iter().enumerate() {
                rows.push(vec![t.to_string(), id.clone(), sig12(m[z][t])]);
            }
        }
        rows
    };
    put("emissions.csv", csv_bytes(&["hour", "zone", "tco2"], per_zone(&result.emissions))?)?;
    put("prices.csv", csv_bytes(&["hour", "zone", "usd_per_mwh"], per_zone(&result.prices))?)?;

    let mut by_kind: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut by_unit = serde_json::Map::new();
    for (g, spec) in result.generators.iter().zip(&grid.generators) {
        let mwh: f64 = g.generation.iter().sum();
        let tco2 = mwh * spec.emissions_factor;
        let kind = serde_json::to_value(spec.kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        let e = by_kind.entry(kind).or_default();
        e.0 += mwh;
        e.1 += tco2;
        by_unit.insert(g.id.clone(), json!({ "generation_mwh": mwh, "emissions_tco2": tco2, "capacity_mw": g.capacity_mw() }));
    }
    let summary = json!({
        "mode": result.mode.to_string(),
        "total_cost": result.total_cost,
        "investment_cost": result.investment_cost,
        "operational_cost": result.operational_cost,
        "total_emissions_tco2": result.total_emissions(),
        "total_demand_mwh": result.total_demand(),
        "non_served_mwh": result.non_served.iter().flatten().sum::<f64>(),
        "by_kind": by_kind.iter().map(|(k, (mwh, t))| (k.clone(), json!({ "generation_mwh": mwh, "emissions_tco2": t }))).collect::<serde_json::Map<_, _>>(),
        "by_unit": by_unit,
    });
    put("summary.json", serde_json::to_vec_pretty(&summary)?)?;
    Ok(written)
}
