use crate::error::CliError;
use crate::{Method, Signal, SolveMode, ZoneArg};
use gridmarg::flex::{
    cost_min_schedule, evaluate_fixed_schedule_detailed, schedule_min_srme, with_flex_mode, write_schedule_csv,
    write_trace_csv, FlexMode,
};
use gridmarg::grid::{load_scenario, GridModel};
use gridmarg::io::{sig12, write_atomic};
use gridmarg::metrics::{
    average_emission_rate, long_run_report, srme_dual, srme_uniform, write_consequential_json, write_srme_csv,
    ConsequentialReport, EmissionRateSeries, RateMethod, Scope,
};
use gridmarg::planner::{
    build_expansion_lp, build_operational_lp, solve_model, write_dispatch_outputs, Capacities, DispatchResult,
};
use gridmarg::sweep::{run_sweep, SweepSpec, TargetZones};
use serde_json::json;
use std::path::Path;

fn load(path: &Path) -> Result<GridModel, CliError> {
    let grid = load_scenario(path)?;
    log::info!(
        "{}: {} zones, {} generators, {} hours",
        path.display(),
        grid.zones.len(),
        grid.generators.len(),
        grid.horizon()
    );
    Ok(grid)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    write_atomic(path, &serde_json::to_vec_pretty(value)?)?;
    Ok(())
}

pub fn solve(scenario: &Path, mode: SolveMode, out: &Path) -> Result<(), CliError> {
    let g = load(scenario)?.resolved()?;
    let model = match mode {
        SolveMode::Expansion => build_expansion_lp(&g)?,
        SolveMode::Operational => build_operational_lp(&g, &Capacities::default())?,
    };
    let result = solve_model(&model)?;
    let files = write_dispatch_outputs(&result, &g, out)?;
    println!("{} optimal", result.mode);
    println!("  total cost         {:>16.4} $", result.total_cost);
    println!("  total emissions    {:>16.4} tCO2", result.total_emissions());
    println!("  served demand      {:>16.4} MWh", result.total_demand());
    println!("wrote {} files to {}", files.len(), out.display());
    Ok(())
}

/// Resolves `--zone` into (label, zones) pairs. `all` keeps an empty list,
/// which the perturbation routines read as every zone.
fn zone_targets(g: &GridModel, zone: &ZoneArg) -> Result<Vec<(String, Vec<String>)>, CliError> {
    Ok(match zone {
        ZoneArg::All => vec![("all".to_string(), Vec::new())],
        ZoneArg::One(z) => {
            g.zone_index(z)?;
            vec![(z.clone(), vec![z.clone()])]
        }
        ZoneArg::EachSeparately => g.zones.iter().map(|z| (z.id.clone(), vec![z.id.clone()])).collect(),
    })
}

fn demand_weighted(series: &EmissionRateSeries, base: &DispatchResult) -> f64 {
    let weights: Vec<Vec<f64>> = series
        .zone_ids
        .iter()
        .map(|z| {
            let i = base.zone_ids.iter().position(|b| b == z).expect("rate zones come from the base solve");
            base.demand[i].clone()
        })
        .collect();
    series.weighted_mean(&weights)
}

fn keep_zone(series: &mut EmissionRateSeries, zone: &str) {
    let i = series.zone_ids.iter().position(|z| z == zone).expect("zone was checked");
    series.zone_ids = vec![series.zone_ids[i].clone()];
    series.rates = vec![series.rates[i].clone()];
    if let Some(a) = &mut series.annual_basis_rates {
        *a = vec![a[i].clone()];
    }
}

pub fn metrics(scenario: &Path, method: Method, zone: &ZoneArg, out: &Path) -> Result<(), CliError> {
    let g = load(scenario)?.resolved()?;
    let targets = zone_targets(&g, zone)?;
    let all_zones: Vec<String> = g.zones.iter().map(|z| z.id.clone()).collect();
    let each = matches!(zone, ZoneArg::EachSeparately);

    if method == Method::Lrmer {
        let fraction = g.config.perturbation_fraction;
        let targets = match zone {
            ZoneArg::EachSeparately => TargetZones::Keyword("each-separately".into()).expand(&g)?,
            _ => targets,
        };
        let mut rows = Vec::new();
        for (label, zones) in &targets {
            let (report, _, _) = long_run_report(&g, fraction, zones)?;
            let name = if each { format!("consequential_{label}.json") } else { "consequential.json".to_string() };
            write_consequential_json(&report, &out.join(&name))?;
            println!(
                "lrmer {label}: {:.6} tCO2/MWh (short-run attributed {}, average {})",
                report.lr_mer,
                report.sr_rate().map_or("n/a".into(), |r| format!("{r:.6}")),
                report.aer_attributed.map_or("n/a".into(), |a| format!("{:.6}", a / report.delta_demand_mwh)),
            );
            rows.push((label.clone(), report));
        }
        if each {
            write_lrmer_table(&rows, &out.join("lrmer.csv"))?;
        }
        return Ok(());
    }

    let base = solve_model(&build_expansion_lp(&g)?)?;
    match method {
        Method::Aer => {
            let mut rates = serde_json::Map::new();
            for (label, zones) in &targets {
                let scope = match zones.first() {
                    None => Scope::System,
                    Some(z) => Scope::Zone(z.clone()),
                };
                let v = average_emission_rate(&base, &scope)?;
                println!("aer {label}: {v:.6} tCO2/MWh");
                rates.insert(label.clone(), json!(v));
            }
            write_json(&out.join("aer.json"), &json!({ "method": "aer", "rates_tco2_per_mwh": rates }))
        }
        Method::Srme1 => {
            let caps = base.capacities();
            for (label, zones) in &targets {
                let zones = if zones.is_empty() { &all_zones } else { zones };
                let series = srme_uniform(&g, &caps, zones)?;
                let name = if each { format!("srme_{label}.csv") } else { "srme.csv".to_string() };
                write_srme_csv(&[&series], &out.join(&name))?;
                println!("srme1 {label}: demand-weighted {:.6} tCO2/MWh", demand_weighted(&series, &base));
            }
            Ok(())
        }
        Method::Srme2 => {
            let mut series = srme_dual(&g, &base.capacities())?;
            if let ZoneArg::One(z) = zone {
                keep_zone(&mut series, z);
            }
            write_srme_csv(&[&series], &out.join("srme.csv"))?;
            let degenerate = series.degenerate.iter().filter(|d| **d).count();
            println!(
                "srme2: demand-weighted {:.6} tCO2/MWh, {degenerate} degenerate hours",
                demand_weighted(&series, &base)
            );
            Ok(())
        }
        Method::Lrmer => unreachable!(),
    }
}

fn write_lrmer_table(rows: &[(String, ConsequentialReport)], path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["zone", "lr_mer", "emissions_delta_tco2", "delta_demand_mwh", "cost_delta"])?;
    for (zone, r) in rows {
        w.write_record([
            zone.clone(),
            sig12(r.lr_mer),
            sig12(r.emissions_delta()),
            sig12(r.delta_demand_mwh),
            sig12(r.pert_total_cost - r.base_total_cost),
        ])?;
    }
    write_atomic(path, &w.into_inner().map_err(|e| CliError::input(e.to_string()))?)?;
    Ok(())
}

/// One line of the schedule comparison: the cost-signal reference, the
/// chosen signal, and their difference.
struct Row {
    metric: String,
    reference: f64,
    chosen: f64,
}

fn comparison_rows(
    ref_report: &ConsequentialReport,
    ref_base: &DispatchResult,
    report: &ConsequentialReport,
    base: &DispatchResult,
) -> Vec<Row> {
    let row = |metric: &str, reference: f64, chosen: f64| Row { metric: metric.to_string(), reference, chosen };
    let mut rows = vec![
        row("total_cost", ref_base.total_cost, base.total_cost),
        row("total_emissions_tco2", ref_base.total_emissions(), base.total_emissions()),
        row("consequential_emissions_tco2", ref_report.emissions_delta(), report.emissions_delta()),
        row("lr_mer", ref_report.lr_mer, report.lr_mer),
    ];
    for (a, b) in ref_base.generators.iter().zip(&base.generators) {
        rows.push(row(&format!("capacity_mw:{}", a.id), a.capacity_mw(), b.capacity_mw()));
    }
    for (a, b) in ref_base.storage.iter().zip(&base.storage) {
        rows.push(row(
            &format!("capacity_mw:{}", a.id),
            a.existing_power_mw + a.new_power_mw,
            b.existing_power_mw + b.new_power_mw,
        ));
    }
    for (a, b) in ref_base.generators.iter().zip(&base.generators) {
        rows.push(row(&format!("generation_mwh:{}", a.id), a.generation.iter().sum(), b.generation.iter().sum()));
    }
    rows
}

pub fn schedule(scenario: &Path, signal: Signal, flex: FlexMode, out: &Path) -> Result<(), CliError> {
    let g = with_flex_mode(&load(scenario)?.resolved()?, flex);
    let (cost_min, base) = cost_min_schedule(&g, None)?;
    let (ref_report, ref_base, _) = evaluate_fixed_schedule_detailed(&g, &cost_min)?;

    let (chosen, trace) = match signal {
        Signal::Cost => (cost_min, None),
        Signal::Srme1 | Signal::Srme2 => {
            let method = if signal == Signal::Srme1 { RateMethod::Srme1 } else { RateMethod::Srme2 };
            let (s, t) = schedule_min_srme(&g, &base.capacities(), method, g.config.emissions_penalty)?;
            if !t.converged {
                log::warn!("{method} loop stopped after {} iterations without converging", t.iterations_used);
            }
            (s, Some(t))
        }
    };
    let (report, chosen_base) = match trace {
        None => (ref_report.clone(), ref_base.clone()),
        Some(_) => {
            let (r, b, _) = evaluate_fixed_schedule_detailed(&g, &chosen)?;
            (r, b)
        }
    };

    write_schedule_csv(&chosen, &g, &out.join("schedule.csv"))?;
    if let Some(t) = &trace {
        write_trace_csv(t, &out.join("iteration_trace.csv"))?;
    }
    write_consequential_json(&report, &out.join("consequential.json"))?;

    let per_1000 = g.config.ev_fleet_size.filter(|n| *n > 0.0).map(|n| 1000.0 / n);
    let rows = comparison_rows(&ref_report, &ref_base, &report, &chosen_base);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "cost_signal", "signal", "delta", "delta_per_1000_ev"])?;
    for r in &rows {
        let d = r.chosen - r.reference;
        w.write_record([
            r.metric.clone(),
            sig12(r.reference),
            sig12(r.chosen),
            sig12(d),
            per_1000.map(|k| sig12(d * k)).unwrap_or_default(),
        ])?;
    }
    write_atomic(&out.join("comparison.csv"), &w.into_inner().map_err(|e| CliError::input(e.to_string()))?)?;

    let signal_name = match signal {
        Signal::Cost => "cost",
        Signal::Srme1 => "srme1",
        Signal::Srme2 => "srme2",
    };
    write_json(
        &out.join("schedule_summary.json"),
        &json!({
            "signal": signal_name,
            "flex": flex.to_string(),
            "converged": trace.as_ref().is_none_or(|t| t.converged),
            "iterations_used": trace.as_ref().map_or(0, |t| t.iterations_used),
            "consequential_emissions_tco2": report.emissions_delta(),
            "cost_signal_consequential_emissions_tco2": ref_report.emissions_delta(),
        }),
    )?;

    println!("signal {signal_name}, flexibility {flex}");
    if let Some(t) = &trace {
        println!("loop: {} iterations, converged {}", t.iterations_used, t.converged);
    }
    println!("{:<36} {:>16} {:>16} {:>16}", "metric", "cost signal", signal_name, "delta");
    for r in &rows {
        println!("{:<36} {:>16.4} {:>16.4} {:>16.4}", r.metric, r.reference, r.chosen, r.chosen - r.reference);
    }
    Ok(())
}

pub fn sweep(scenario: &Path, spec_path: &Path, parallel: usize, out: &Path) -> Result<(), CliError> {
    if parallel == 0 {
        return Err(CliError::input("--parallel must be at least 1"));
    }
    let grid = load(scenario)?;
    let spec = SweepSpec::load(spec_path)?;
    let manifest = run_sweep(&grid, &scenario.display().to_string(), &spec, parallel, out)?;
    let failed = manifest.failures();
    println!("{} runs, {failed} failed; results in {}", manifest.runs.len(), out.join("sweep_results.csv").display());
    for r in manifest.runs.iter().filter(|r| r.error.is_some()) {
        eprintln!("{}: {}", r.run_id, r.error.as_deref().unwrap_or_default());
    }
    Ok(())
}

pub fn validate(scenario: &Path, sweep: Option<&Path>) -> Result<(), CliError> {
    let grid = load(scenario)?;
    grid.resolved()?.validate()?;
    println!(
        "{}: ok ({} zones, {} generators, {} storage units, {} lines, {} flexible loads, {} hours)",
        scenario.display(),
        grid.zones.len(),
        grid.generators.len(),
        grid.storage_units.len(),
        grid.lines.len(),
        grid.flexible_loads.len(),
        grid.horizon()
    );
    if let Some(p) = sweep {
        let spec = SweepSpec::load(p)?;
        let cells = spec.cells(&grid)?;
        println!("{}: ok ({} runs)", p.display(), cells.len());
    }
    Ok(())
}
