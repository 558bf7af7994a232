//! Time-step selection and the sampling loop shared by both solvers.

use crate::error::{Error, Result};
use crate::field::Field3;

/// Steps between CFL re-evaluations in [`StepSize::Auto`] mode.
pub const AUTO_RECOMPUTE_EVERY: usize = 10;

/// Fixed step or the advective CFL rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Fixed(f64),
    Auto,
}

/// Advective limit `0.5·h / max(‖u‖∞, ‖B‖∞, 1)`, `h = 2π/n`.
pub fn cfl_limit(u: &Field3, b: &Field3) -> f64 {
    let h = u.grid().spacing();
    0.5 * h / u.linf_norm().max(b.linf_norm()).max(1.0)
}

pub(crate) fn check_cfl(dt: f64, limit: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
    }
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    Ok(())
}

/// Sampled states of one run. If the run aborted, `abort` holds the error and
/// `samples` ends at the last good sample.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub samples: Vec<S>,
    /// Every step size taken, in order.
    pub dts: Vec<f64>,
    pub abort: Option<Error>,
}

impl<S> Trajectory<S> {
    /// Turns a recorded abort into an error.
    pub fn into_result(self) -> Result<Self> {
        match self.abort {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }

    pub fn last(&self) -> &S {
        self.samples.last().expect("trajectory always holds the initial state")
    }
}

pub(crate) trait Timed {
    fn time(&self) -> f64;
    fn set_time(&mut self, t: f64);
    fn cfl(&self) -> f64;
}

/// Runs `advance` from `s0` to `t_end`, sampling every `sample_every` steps
/// and at `t_end`.
///
/// With a fixed step the last step is shortened to land on `t_end`. In auto
/// mode the sample interval is `sample_every` times the initial CFL step,
/// the step is recomputed every [`AUTO_RECOMPUTE_EVERY`] steps and clipped
/// so that steps land on sample times.
pub(crate) fn drive<S: Timed + Clone>(
    s0: S,
    t_end: f64,
    step: StepSize,
    sample_every: usize,
    mut advance: impl FnMut(&S, f64) -> Result<S>,
) -> Result<Trajectory<S>> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} must be >= 0")));
    }
    if sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be >= 1".into()));
    }
    let t0 = s0.time();
    let mut traj = Trajectory {
        samples: vec![s0.clone()],
        dts: Vec::new(),
        abort: None,
    };
    if t_end == 0.0 {
        return Ok(traj);
    }
    let t_stop = t0 + t_end;
    let tiny = 1e-12 * t_end.max(1.0);
    let mut s = s0;
    match step {
        StepSize::Fixed(dt) => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
            }
            let nsteps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
            for k in 1..=nsteps {
                let h = if k == nsteps {
                    t_stop - s.time()
                } else {
                    dt
                };
                match advance(&s, h) {
                    Ok(next) => {
                        s = next;
                        // avoid accumulating round-off in t
                        s.set_time(if k == nsteps {
                            t_stop
                        } else {
                            t0 + k as f64 * dt
                        });
                    }
                    Err(e) => {
                        traj.abort = Some(e);
                        return Ok(traj);
                    }
                }
                traj.dts.push(h);
                if k % sample_every == 0 || k == nsteps {
                    traj.samples.push(s.clone());
                }
            }
        }
        StepSize::Auto => {
            let interval = sample_every as f64 * s.cfl();
            let mut next_sample = t0 + interval;
            let mut dt = s.cfl();
            let mut k = 0usize;
            while s.time() < t_stop - tiny {
                if k > 0 && k % AUTO_RECOMPUTE_EVERY == 0 {
                    dt = s.cfl();
                }
                let target = next_sample.min(t_stop);
                let remaining = target - s.time();
                let h = if remaining <= dt * (1.0 + 1e-9) {
                    remaining
                } else {
                    dt
                };
                match advance(&s, h) {
                    Ok(next) => s = next,
                    Err(e) => {
                        traj.abort = Some(e);
                        return Ok(traj);
                    }
                }
                traj.dts.push(h);
                k += 1;
                if (s.time() - target).abs() <= tiny {
                    s.set_time(target);
                    traj.samples.push(s.clone());
                    next_sample += interval;
                }
            }
        }
    }
    Ok(traj)
}
