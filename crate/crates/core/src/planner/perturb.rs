use crate::grid::{invalid, GridError, GridModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Perturbation {
    /// Scale flexible (EV) baselines in the target zones by `1 + fraction`.
    ScaleEv(f64),
    /// Scale fixed demand in the target zones by `1 + fraction`.
    UniformAll(f64),
    /// Add `mw` to a single fixed-demand cell.
    SingleHour { zone: String, hour: usize, mw: f64 },
}

/// Returns a perturbed copy of `grid`. `target_zones` limits the
/// fraction-based modes; an empty slice means every zone.
pub fn perturb_demand(grid: &GridModel, target_zones: &[String], mode: &Perturbation) -> Result<GridModel, GridError> {
    for z in target_zones {
        grid.zone_index(z)?;
    }
    let targeted = |zone: &str| target_zones.is_empty() || target_zones.iter().any(|z| z == zone);
    let mut out = grid.clone();
    match mode {
        Perturbation::ScaleEv(f) | Perturbation::UniformAll(f) if !(*f > -1.0 && f.is_finite()) => {
            return Err(invalid("perturbation", "fraction", format!("must be > -1, got {f}")));
        }
        Perturbation::ScaleEv(f) => {
            for load in out.flexible_loads.iter_mut().filter(|l| targeted(&l.zone_id)) {
                load.baseline_profile.iter_mut().for_each(|v| *v *= 1.0 + f);
            }
        }
        Perturbation::UniformAll(f) => {
            for zone in out.zones.iter_mut().filter(|z| targeted(&z.id)) {
                zone.demand.iter_mut().for_each(|v| *v *= 1.0 + f);
            }
        }
        Perturbation::SingleHour { zone, hour, mw } => {
            let z = grid.zone_index(zone)?;
            if *hour >= grid.horizon() {
                return Err(invalid("perturbation", "hour", format!("{hour} is outside the horizon")));
            }
            out.zones[z].demand[*hour] += mw;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::fixtures::*;
    use crate::grid::FlexibleLoad;

    #[test]
    fn scale_ev_five_percent() {
        let mut g = one_zone(vec![10.0; 24], vec![]);
        g.flexible_loads.push(FlexibleLoad {
            id: "ev".into(),
            zone_id: "z".into(),
            baseline_profile: vec![300.0; 24],
            max_advance_hours: 0,
            max_delay_hours: 0,
            max_charge_rate_mw: None,
            penetration_scale: 1.0,
        });
        let out = perturb_demand(&g, &[], &Perturbation::ScaleEv(0.05)).unwrap();
        let sum: f64 = out.flexible_loads[0].baseline_profile.iter().sum();
        assert!((sum - 7560.0).abs() < 1e-9);
        assert_eq!(out.zones, g.zones);
    }

    #[test]
    fn uniform_all_three_percent() {
        let g = one_zone(vec![100.0; 24], vec![]);
        let out = perturb_demand(&g, &["z".into()], &Perturbation::UniformAll(0.03)).unwrap();
        assert!(out.zones[0].demand.iter().all(|&d| (d - 103.0).abs() < 1e-12));
    }

    #[test]
    fn single_hour_changes_one_cell() {
        let g = one_zone(vec![100.0; 24], vec![]);
        let out = perturb_demand(&g, &[], &Perturbation::SingleHour { zone: "z".into(), hour: 12, mw: 1.0 }).unwrap();
        let diffs: Vec<usize> = (0..24).filter(|&t| out.zones[0].demand[t] != g.zones[0].demand[t]).collect();
        assert_eq!(diffs, vec![12]);
        assert_eq!(out.zones[0].demand[12] - g.zones[0].demand[12], 1.0);
    }

    #[test]
    fn unknown_zone_and_bad_inputs() {
        let g = one_zone(vec![100.0; 4], vec![]);
        assert!(matches!(perturb_demand(&g, &["q".into()], &Perturbation::UniformAll(0.1)), Err(GridError::UnknownZone(_))));
        assert!(perturb_demand(&g, &[], &Perturbation::UniformAll(-1.0)).is_err());
        assert!(perturb_demand(&g, &[], &Perturbation::SingleHour { zone: "z".into(), hour: 4, mw: 1.0 }).is_err());
    }
}
