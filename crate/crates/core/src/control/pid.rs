use crate::error::ControlError;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub fn new(kp: f64, ki: f64, kd: f64) -> Result<Self, ControlError> {
        if [kp, ki, kd].iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(ControlError::InvalidParameter(format!(
                "PID gains must be finite and non-negative, got ({kp}, {ki}, {kd})"
            )));
        }
        Ok(PidGains { kp, ki, kd })
    }

    pub fn scaled(&self, factor: f64) -> PidGains {
        PidGains {
            kp: self.kp * factor,
            ki: self.ki * factor,
            kd: self.kd * factor,
        }
    }
}

/// Discrete PID memory.
///
/// Integration is rectangular (the current error is included in the step's
/// output). The derivative acts on the measurement, not the error, and is
/// low-passed with a time constant of four samples. The integral is frozen
/// while the output is saturated in the direction the error would push it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidState {
    /// Accumulated ∫e dt (the gain is applied at output time).
    pub integral: f64,
    pub previous_measurement: Option<f64>,
    pub previous_error: f64,
    pub filtered_derivative: f64,
    pub output_limits: (f64, f64),
    pub integral_limits: (f64, f64),
    pub last_output: f64,
}

const DERIVATIVE_FILTER_SAMPLES: f64 = 4.0;

impl PidState {
    pub fn new(output_limits: (f64, f64), integral_limits: (f64, f64)) -> Self {
        PidState {
            integral: 0.0,
            previous_measurement: None,
            previous_error: 0.0,
            filtered_derivative: 0.0,
            output_limits,
            integral_limits,
            last_output: 0.0,
        }
    }

    pub fn reset(&mut self) {
        *self = PidState::new(self.output_limits, self.integral_limits);
    }

    pub fn step(
        &mut self,
        gains: &PidGains,
        setpoint: f64,
        measurement: f64,
        dt: f64,
    ) -> Result<f64, ControlError> {
        if !setpoint.is_finite() {
            return Err(ControlError::NonFinite("setpoint"));
        }
        if !measurement.is_finite() {
            return Err(ControlError::NonFinite("measurement"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ControlError::BadTimeStep(dt));
        }
        let (lo, hi) = self.output_limits;
        let (ilo, ihi) = self.integral_limits;
        let error = setpoint - measurement;

        let raw_derivative = match self.previous_measurement {
            Some(prev) => -(measurement - prev) / dt,
            None => 0.0,
        };
        let blend = 1.0 / (DERIVATIVE_FILTER_SAMPLES + 1.0);
        self.filtered_derivative += blend * (raw_derivative - self.filtered_derivative);

        let candidate = (self.integral + error * dt).clamp(ilo, ihi);
        let unclamped = gains.kp * error + gains.ki * candidate + gains.kd * self.filtered_derivative;
        let winding_up = (unclamped > hi && error > 0.0) || (unclamped < lo && error < 0.0);
        if !winding_up {
            self.integral = candidate;
        }
        let output = (gains.kp * error + gains.ki * self.integral + gains.kd * self.filtered_derivative)
            .clamp(lo, hi);
        if !output.is_finite() {
            return Err(ControlError::NonFinite("output"));
        }
        self.previous_measurement = Some(measurement);
        self.previous_error = error;
        self.last_output = output;
        Ok(output)
    }
}

/// Value-semantic form of [`PidState::step`].
pub fn pid_step(
    gains: &PidGains,
    state: &PidState,
    setpoint: f64,
    measurement: f64,
    dt: f64,
) -> Result<(f64, PidState), ControlError> {
    let mut next = *state;
    let out = next.step(gains, setpoint, measurement, dt)?;
    Ok((out, next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wide() -> PidState {
        PidState::new((-1e9, 1e9), (-1e9, 1e9))
    }

    #[test]
    fn zero_error_gives_zero_output() {
        let g = PidGains::new(3.0, 2.0, 1.0).unwrap();
        let mut s = wide();
        for _ in 0..100 {
            assert_eq!(s.step(&g, 5.0, 5.0, 0.01).unwrap(), 0.0);
        }
    }

    #[test]
    fn pure_proportional() {
        let g = PidGains::new(3.0, 0.0, 0.0).unwrap();
        let (out, _) = pid_step(&g, &wide(), 2.0, 0.0, 0.01).unwrap();
        assert_eq!(out, 6.0);
    }

    #[test]
    fn rectangular_integration_is_exact() {
        let (ki, e, dt, n) = (1.5, 2.0, 0.25, 8);
        let g = PidGains::new(0.0, ki, 0.0).unwrap();
        let mut s = wide();
        let mut out = 0.0;
        for _ in 0..n {
            out = s.step(&g, e, 0.0, dt).unwrap();
        }
        assert_eq!(out, ki * e * n as f64 * dt);
    }

    #[test]
    fn non_finite_inputs_are_fatal() {
        let g = PidGains::default();
        let mut s = wide();
        assert!(s.step(&g, f64::NAN, 0.0, 0.01).is_err());
        assert!(s.step(&g, 0.0, f64::INFINITY, 0.01).is_err());
        assert!(s.step(&g, 0.0, 0.0, 0.0).is_err());
        assert!(PidGains::new(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn anti_windup_freezes_integral_when_saturated_high() {
        let g = PidGains::new(1.0, 1.0, 0.0).unwrap();
        let mut s = PidState::new((-1.0, 1.0), (-100.0, 100.0));
        s.step(&g, 10.0, 0.0, 0.1).unwrap();
        let frozen = s.integral;
        for _ in 0..50 {
            let out = s.step(&g, 10.0, 0.0, 0.1).unwrap();
            assert_eq!(out, 1.0);
            assert!(s.integral <= frozen);
        }
    }

    #[test]
    fn integral_limits_hold() {
        let g = PidGains::new(0.0, 1e-6, 0.0).unwrap();
        let mut s = PidState::new((-1e9, 1e9), (-0.5, 0.5));
        for _ in 0..100 {
            s.step(&g, 1.0, 0.0, 0.1).unwrap();
        }
        assert_eq!(s.integral, 0.5);
    }

    #[test]
    fn setpoint_step_has_no_derivative_kick() {
        let g = PidGains::new(0.0, 0.0, 5.0).unwrap();
        let mut s = wide();
        s.step(&g, 0.0, 1.0, 0.01).unwrap();
        let out = s.step(&g, 100.0, 1.0, 0.01).unwrap();
        assert_eq!(out, 0.0);
    }

    #[test]
    fn derivative_responds_to_measurement_with_lag() {
        let g = PidGains::new(0.0, 0.0, 1.0).unwrap();
        let mut s = wide();
        s.step(&g, 0.0, 0.0, 0.01).unwrap();
        // measurement ramps at +1/s: steady derivative term -1
        let mut out = 0.0;
        for k in 1..200 {
            out = s.step(&g, 0.0, k as f64 * 0.01, 0.01).unwrap();
        }
        assert!((out + 1.0).abs() < 1e-9);
        let mut first = wide();
        first.step(&g, 0.0, 0.0, 0.01).unwrap();
        let kicked = first.step(&g, 0.0, 0.01, 0.01).unwrap();
        assert!((kicked + 0.2).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn output_and_integral_stay_in_limits(
            steps in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..100),
            kp in 0.0f64..10.0, ki in 0.0f64..10.0, kd in 0.0f64..1.0) {
            let g = PidGains::new(kp, ki, kd).unwrap();
            let mut s = PidState::new((-1.0, 1.0), (-5.0, 5.0));
            for (sp, m) in steps {
                let out = s.step(&g, sp, m, 0.001).unwrap();
                prop_assert!((-1.0..=1.0).contains(&out));
                prop_assert!((-5.0..=5.0).contains(&s.integral));
            }
        }

        #[test]
        fn saturated_high_never_increases_integral(m in -100.0f64..-1.0, n in 1usize..50) {
            let g = PidGains::new(1.0, 0.5, 0.0).unwrap();
            let mut s = PidState::new((-1.0, 1.0), (-1e6, 1e6));
            s.step(&g, 0.0, m, 0.01).unwrap();
            for _ in 0..n {
                let before = s.integral;
                let out = s.step(&g, 0.0, m, 0.01).unwrap();
                prop_assert_eq!(out, 1.0);
                prop_assert!(s.integral <= before);
            }
        }
    }
}
