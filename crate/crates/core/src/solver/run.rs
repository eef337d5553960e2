use serde::Serialize;

use super::{mass_step_residual, Integrator, SimConfig, SimState};
use crate::analysis::{DiagnosticsContext, DiagnosticsRecord};
use crate::error::{Error, Result};

/// How an integration ended. `BlowupSuspected` only records that the step
/// size collapsed under the positivity guards.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status")]
pub enum Outcome {
    Completed { t: f64 },
    BlowupSuspected { t: f64 },
    Failed { t: f64, reason: String },
}

impl Outcome {
    pub fn t(&self) -> f64 {
        match self {
            Outcome::Completed { t } | Outcome::BlowupSuspected { t } | Outcome::Failed { t, .. } => *t,
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, Outcome::Completed { .. })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub steps: u64,
    pub rejected_steps: u64,
    pub min_dt: f64,
    pub max_dt: f64,
    /// Worst per-step N-mass identity residual (main system only).
    pub max_mass_step_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<SimState>,
    pub outcome: Outcome,
    pub final_state: SimState,
    pub stats: RunStats,
}

pub fn run(config: &SimConfig) -> Result<Trajectory> {
    run_observed(config, |_, _| {})
}

/// Integrates `config`, calling `observer` with each output record and the
/// state it was computed from, in time order.
///
/// A record is released once the following output is known, so its energy
/// residuals can use a centered window; the first and last records carry none.
/// Errors are returned only for invalid configurations; failures during
/// integration end up in [`Outcome`].
pub fn run_observed(
    config: &SimConfig,
    mut observer: impl FnMut(&DiagnosticsRecord, &SimState),
) -> Result<Trajectory> {
    let (it, mut state) = Integrator::new(config.clone())?;
    let ctx = DiagnosticsContext::new(&config.model, &state, *it.bounds(), config.guard_tol, it.sensitivity_floor())?;
    let omega = config.model.pitcher().map(|p| p.omega);

    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut stats = RunStats { min_dt: f64::INFINITY, ..RunStats::default() };
    stats.max_mass_step_residual = omega.map(|_| 0.0);

    // outputs awaiting their successor: at most two states are held back
    let mut window: Vec<SimState> = vec![state.clone()];
    let mut emit = |rec: DiagnosticsRecord, s: &SimState, records: &mut Vec<DiagnosticsRecord>| {
        observer(&rec, s);
        if config.keep_snapshots {
            snapshots.push(s.clone());
        }
        records.push(rec);
    };

    let t_end = config.t_end;
    let time_eps = 1e-12 * t_end.max(1.0);
    let mut k_out: u64 = 1;
    let next_output = |k: u64| (k as f64 * config.output_every).min(t_end);
    let mut dt_prev = config.dt_init / super::DT_GROWTH;
    let mut outcome = None;

    while state.t < t_end - time_eps {
        let target = next_output(k_out);
        let dt_free = match it.adapt_dt(&state, dt_prev, f64::INFINITY) {
            Ok(dt) => dt,
            Err(e) => {
                outcome = Some(Outcome::Failed { t: state.t, reason: e.to_string() });
                break;
            }
        };
        let dt_cap = dt_free.min(target - state.t);
        let mut dt = dt_cap;
        let next = loop {
            match it.step(&state, dt) {
                Ok(s) => break Ok(s),
                Err(Error::PositivityBreach(_) | Error::FloorViolation { .. } | Error::NonFinite { .. }) => {
                    stats.rejected_steps += 1;
                    dt *= 0.5;
                    if dt < config.dt_min {
                        break Err(Outcome::BlowupSuspected { t: state.t });
                    }
                }
                Err(e) => break Err(Outcome::Failed { t: state.t, reason: e.to_string() }),
            }
        };
        let mut next = match next {
            Ok(s) => s,
            Err(o) => {
                outcome = Some(o);
                break;
            }
        };
        dt_prev = if dt < dt_cap { dt } else { dt_free };
        if (next.t - target).abs() <= time_eps {
            next.t = target;
        }
        stats.steps += 1;
        stats.min_dt = stats.min_dt.min(dt);
        stats.max_dt = stats.max_dt.max(dt);
        if let (Some(w), Some(m)) = (omega, stats.max_mass_step_residual.as_mut()) {
            *m = m.max(mass_step_residual(&state, &next, w));
        }
        state = next;

        if state.t == target {
            k_out += 1;
            window.push(state.clone());
            if window.len() == 3 {
                let rec = ctx.record(&window[1], Some((&window[0], &window[1], &window[2])));
                let rec = match rec {
                    Ok(r) => r,
                    Err(e) => {
                        outcome = Some(Outcome::Failed { t: state.t, reason: e.to_string() });
                        break;
                    }
                };
                if records.is_empty() {
                    match ctx.record(&window[0], None) {
                        Ok(first) => emit(first, &window[0], &mut records),
                        Err(e) => {
                            outcome = Some(Outcome::Failed { t: 0.0, reason: e.to_string() });
                            break;
                        }
                    }
                }
                emit(rec, &window[1], &mut records);
                window.remove(0);
            }
        }
    }

    // flush whatever is still held back
    let start = if records.is_empty() { 0 } else { 1 };
    for s in &window[start..] {
        match ctx.record(s, None) {
            Ok(r) => emit(r, s, &mut records),
            Err(e) if outcome.is_none() => {
                outcome = Some(Outcome::Failed { t: s.t, reason: e.to_string() });
            }
            Err(_) => {}
        }
    }
    if stats.min_dt == f64::INFINITY {
        stats.min_dt = 0.0;
    }
    let outcome = outcome.unwrap_or(Outcome::Completed { t: state.t });
    Ok(Trajectory { records, snapshots, outcome, final_state: state, stats })
}
