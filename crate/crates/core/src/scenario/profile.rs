//! Injector setpoint schedule: from a start pressure, each segment ramps at
//! a fixed rate to its target and holds it. The final target is held for the
//! rest of the run.

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrottleSegment {
    /// Injector pressures (ox, fuel), Pa.
    pub target: [f64; 2],
    /// s.
    pub hold: f64,
    /// Pa/s; both injectors arrive together, the larger change sets the pace.
    pub ramp_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThrottleProfile {
    pub start: [f64; 2],
    pub segments: Vec<ThrottleSegment>,
}

/// Time interval over which a segment's target is held.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoldWindow {
    pub start: f64,
    /// `f64::INFINITY` for the terminal hold.
    pub end: f64,
    pub target: [f64; 2],
}

impl ThrottleProfile {
    pub fn validate(&self, ambient: f64) -> Result<(), ConfigError> {
        let check_p = |p: f64, what: &str| {
            if p > ambient && p.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!(
                    "profile {what} pressure {p} Pa must exceed ambient"
                )))
            }
        };
        for p in self.start {
            check_p(p, "start")?;
        }
        for (i, s) in self.segments.iter().enumerate() {
            for p in s.target {
                check_p(p, &format!("segment {i}"))?;
            }
            if !(s.hold >= 0.0 && s.hold.is_finite()) {
                return Err(ConfigError::Invalid(format!("segment {i} hold must be >= 0")));
            }
            if !(s.ramp_rate > 0.0) {
                return Err(ConfigError::Invalid(format!("segment {i} ramp rate must be > 0")));
            }
        }
        Ok(())
    }

    fn ramp_duration(from: [f64; 2], seg: &ThrottleSegment) -> f64 {
        let delta = (seg.target[0] - from[0]).abs().max((seg.target[1] - from[1]).abs());
        delta / seg.ramp_rate
    }

    /// Start and end of every hold, in order.
    pub fn hold_windows(&self) -> Vec<HoldWindow> {
        let mut t = 0.0;
        let mut from = self.start;
        let n = self.segments.len();
        self.segments
            .iter()
            .enumerate()
            .map(|(i, seg)| {
                t += Self::ramp_duration(from, seg);
                let start = t;
                t += seg.hold;
                from = seg.target;
                HoldWindow {
                    start,
                    end: if i + 1 == n { f64::INFINITY } else { t },
                    target: seg.target,
                }
            })
            .collect()
    }

    /// Injector setpoints (ox, fuel) at time `t`.
    pub fn injector_setpoints(&self, t: f64) -> [f64; 2] {
        let mut t0 = 0.0;
        let mut from = self.start;
        for seg in &self.segments {
            let ramp = Self::ramp_duration(from, seg);
            if t < t0 + ramp {
                let s = (t - t0) / ramp;
                return [
                    from[0] + (seg.target[0] - from[0]) * s,
                    from[1] + (seg.target[1] - from[1]) * s,
                ];
            }
            t0 += ramp;
            if t < t0 + seg.hold {
                return seg.target;
            }
            t0 += seg.hold;
            from = seg.target;
        }
        from
    }
}

/// All four setpoints (ox tank, fuel tank, ox injector, fuel injector), Pa.
/// Tank setpoints are constant.
pub fn setpoints_at(profile: &ThrottleProfile, tank_setpoints: [f64; 2], t: f64) -> [f64; 4] {
    let inj = profile.injector_setpoints(t.max(0.0));
    [tank_setpoints[0], tank_setpoints[1], inj[0], inj[1]]
}
