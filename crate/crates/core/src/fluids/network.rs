//! Quasi-steady liquid feed network: tank → line → regulating valve →
//! injector manifold → injector orifice → chamber (or atmosphere).
//!
//! Every element is quadratic in volumetric flow, `Δp = R·Q²`, so a branch
//! with a known back pressure has a closed-form flow. The two branches are
//! coupled only through chamber pressure, which is found by bisection on the
//! monotone residual `c*/At·ṁ(Pc) − Pc`.

use std::f64::consts::PI;

use super::chamber::{chamber_state, ChamberModel};
use super::flow::{darcy_weisbach_dp, orifice_mass_flow};
use super::valve::{cv_of_angle, ValveModel};
use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedLine {
    pub friction_factor: f64,
    pub length: f64,
    pub diameter: f64,
}

impl FeedLine {
    pub fn flow_area(&self) -> f64 {
        PI * self.diameter * self.diameter / 4.0
    }

    /// Loss coefficient in Pa/(m³/s)².
    pub fn resistance(&self, rho: f64) -> f64 {
        let a = self.flow_area();
        darcy_weisbach_dp(self.friction_factor, self.length, self.diameter, rho, 1.0) / (a * a)
    }

    pub fn pressure_drop(&self, rho: f64, vdot: f64) -> f64 {
        darcy_weisbach_dp(
            self.friction_factor,
            self.length,
            self.diameter,
            rho,
            vdot / self.flow_area(),
        )
    }
}

/// Injector element (or mock orifice), lumped as one discharge area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Injector {
    pub cd: f64,
    pub area: f64,
}

impl Injector {
    pub fn resistance(&self, rho: f64) -> f64 {
        let cda = self.cd * self.area;
        rho / (2.0 * cda * cda)
    }

    pub fn mass_flow(&self, rho: f64, dp: f64) -> f64 {
        orifice_mass_flow(self.cd, self.area, rho, dp)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FeedBranch {
    pub tank_pressure: f64,
    pub density: f64,
    pub line: FeedLine,
    pub valve: ValveModel,
    pub angle: f64,
    pub injector: Injector,
    /// False once the tank has no liquid left.
    pub liquid_available: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BranchFlow {
    pub mdot: f64,
    pub vdot: f64,
    pub manifold_pressure: f64,
    pub valve_dp: f64,
    pub line_dp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedSolution {
    pub chamber_pressure: f64,
    pub thrust: f64,
    pub branches: [BranchFlow; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldSolution {
    pub chamber_pressure: f64,
    pub thrust: f64,
    pub mdot: [f64; 2],
}

/// Back pressure seen by both branches. Without a chamber the injectors
/// discharge to ambient.
fn solve_back_pressure(
    total_mdot: impl Fn(f64) -> f64,
    chamber: Option<&ChamberModel>,
    ambient: f64,
    upper: f64,
) -> f64 {
    let Some(chamber) = chamber else {
        return ambient;
    };
    let gain = chamber.pressure_per_mass_flow();
    let floor = chamber.ambient_pressure;
    let residual = |pc: f64| gain * total_mdot(pc) - pc;
    if upper <= floor || residual(floor) <= 0.0 {
        return floor;
    }
    let (mut lo, mut hi) = (floor, upper);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-10 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn branch_resistance(b: &FeedBranch) -> Result<Option<f64>, ModelError> {
    let cv = cv_of_angle(&b.valve, b.angle)?;
    if cv <= 0.0 || !b.liquid_available {
        return Ok(None);
    }
    Ok(Some(
        b.line.resistance(b.density) + b.density / (cv * cv) + b.injector.resistance(b.density),
    ))
}

/// Solves both propellant branches against a shared chamber.
pub fn solve_feed(
    branches: &[FeedBranch; 2],
    chamber: Option<&ChamberModel>,
    ambient: f64,
) -> Result<FeedSolution, ModelError> {
    let r = [branch_resistance(&branches[0])?, branch_resistance(&branches[1])?];
    let vdot_at = |i: usize, pb: f64| -> f64 {
        match r[i] {
            Some(res) if branches[i].tank_pressure > pb => {
                ((branches[i].tank_pressure - pb) / res).sqrt()
            }
            _ => 0.0,
        }
    };
    let total = |pb: f64| (0..2).map(|i| branches[i].density * vdot_at(i, pb)).sum::<f64>();
    let upper = branches[0].tank_pressure.max(branches[1].tank_pressure);
    let pb = solve_back_pressure(total, chamber, ambient, upper);

    let mut flows = [BranchFlow::default(); 2];
    for (i, b) in branches.iter().enumerate() {
        let q = vdot_at(i, pb);
        let cv = cv_of_angle(&b.valve, b.angle)?;
        let valve_dp = if q > 0.0 { b.density * (q / cv) * (q / cv) } else { 0.0 };
        flows[i] = BranchFlow {
            mdot: b.density * q,
            vdot: q,
            manifold_pressure: pb + b.injector.resistance(b.density) * q * q,
            valve_dp,
            line_dp: b.line.pressure_drop(b.density, q),
        };
    }
    let mdot_total = flows[0].mdot + flows[1].mdot;
    let (chamber_pressure, thrust) = match chamber {
        Some(c) => {
            let s = chamber_state(mdot_total, c);
            (pb, s.thrust)
        }
        None => (ambient, 0.0),
    };
    Ok(FeedSolution {
        chamber_pressure,
        thrust,
        branches: flows,
    })
}

/// Flows through the injectors when both manifold pressures are held at
/// given values (the steady state an ideal injector regulator produces).
pub fn flows_at_manifold_pressures(
    manifold: [f64; 2],
    injectors: &[Injector; 2],
    densities: [f64; 2],
    chamber: Option<&ChamberModel>,
    ambient: f64,
) -> ManifoldSolution {
    let mdot_at = |i: usize, pb: f64| injectors[i].mass_flow(densities[i], manifold[i] - pb);
    let total = |pb: f64| mdot_at(0, pb) + mdot_at(1, pb);
    let pb = solve_back_pressure(total, chamber, ambient, manifold[0].max(manifold[1]));
    let mdot = [mdot_at(0, pb), mdot_at(1, pb)];
    let thrust = chamber.map_or(0.0, |c| chamber_state(mdot[0] + mdot[1], c).thrust);
    ManifoldSolution {
        chamber_pressure: if chamber.is_some() { pb } else { ambient },
        thrust,
        mdot,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluids::flow::liquid_volumetric_flow;
    use crate::units::AMBIENT_PRESSURE;

    fn line() -> FeedLine {
        FeedLine {
            friction_factor: 0.02,
            length: 2.0,
            diameter: 0.0127,
        }
    }

    fn branch(tank_pressure: f64, density: f64, angle: f64, area: f64) -> FeedBranch {
        FeedBranch {
            tank_pressure,
            density,
            line: line(),
            valve: ValveModel::new(4e-6, 10.0, 78e5, 0.0).unwrap(),
            angle,
            injector: Injector { cd: 0.7, area },
            liquid_available: true,
        }
    }

    fn chamber() -> ChamberModel {
        ChamberModel::calibrated(1.63, 24e5, 3000.0, 1600.0, AMBIENT_PRESSURE).unwrap()
    }

    #[test]
    fn element_drops_sum_to_tank_pressure() {
        let b = [branch(42e5, 1141.0, 25.0, 3.2e-5), branch(42e5, 493.0, 22.0, 2.1e-5)];
        let c = chamber();
        let s = solve_feed(&b, Some(&c), AMBIENT_PRESSURE).unwrap();
        for (bi, f) in b.iter().zip(s.branches.iter()) {
            let total = f.line_dp + f.valve_dp + (f.manifold_pressure - s.chamber_pressure);
            assert!(((bi.tank_pressure - s.chamber_pressure) - total).abs() < 1e-3);
            // valve drop is consistent with the liquid valve law
            let q = liquid_volumetric_flow(&bi.valve, bi.angle, f.valve_dp, bi.density).unwrap();
            assert!(((q - f.vdot) / f.vdot).abs() < 1e-12);
            // injector drop is consistent with the orifice law
            let m = orifice_mass_flow(0.7, bi.injector.area, bi.density, f.manifold_pressure - s.chamber_pressure);
            assert!(((m - f.mdot) / f.mdot).abs() < 1e-12);
        }
        let pc = chamber_state(s.branches[0].mdot + s.branches[1].mdot, &c).chamber_pressure;
        assert!(((pc - s.chamber_pressure) / pc).abs() < 1e-9);
    }

    #[test]
    fn closed_valves_mean_no_flow() {
        let b = [branch(42e5, 1141.0, 5.0, 3.2e-5), branch(42e5, 493.0, 0.0, 2.1e-5)];
        let s = solve_feed(&b, Some(&chamber()), AMBIENT_PRESSURE).unwrap();
        assert_eq!(s.chamber_pressure, AMBIENT_PRESSURE);
        assert_eq!(s.thrust, 0.0);
        assert_eq!(s.branches[0].mdot, 0.0);
        assert_eq!(s.branches[1].manifold_pressure, AMBIENT_PRESSURE);
    }

    #[test]
    fn removing_chamber_increases_flow() {
        let b = [branch(42e5, 1141.0, 25.0, 3.2e-5), branch(42e5, 493.0, 22.0, 2.1e-5)];
        let hot = solve_feed(&b, Some(&chamber()), AMBIENT_PRESSURE).unwrap();
        let cold = solve_feed(&b, None, AMBIENT_PRESSURE).unwrap();
        for i in 0..2 {
            assert!(cold.branches[i].mdot > hot.branches[i].mdot);
        }
    }

    #[test]
    fn manifold_solution_matches_orifice_law() {
        let inj = [Injector { cd: 0.7, area: 3.25e-5 }, Injector { cd: 0.7, area: 2.13e-5 }];
        let c = chamber();
        let s = flows_at_manifold_pressures([35e5, 35e5], &inj, [1141.0, 493.0], Some(&c), AMBIENT_PRESSURE);
        let pc = chamber_state(s.mdot[0] + s.mdot[1], &c).chamber_pressure;
        assert!(((pc - s.chamber_pressure) / pc).abs() < 1e-9);
        let cold = flows_at_manifold_pressures([35e5, 35e5], &inj, [1141.0, 493.0], None, AMBIENT_PRESSURE);
        assert_eq!(cold.chamber_pressure, AMBIENT_PRESSURE);
        assert!(cold.mdot[0] > s.mdot[0]);
    }
}
