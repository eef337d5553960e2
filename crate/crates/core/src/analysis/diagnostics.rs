use std::fmt::Write as _;

use serde::Serialize;

use super::{
    choose_c, energy_residuals, entropy_params, entropy_phi, entropy_y, verify_apriori, BoundFlags,
    EnergyResiduals, EntropyParams, K_SQUARE, MU_SQ_SQUARE,
};
use crate::error::{Error, Result};
use crate::model::{DerivedBounds, ModelKind, ModelParams};
use crate::solver::SimState;

pub const DIAGNOSTICS_COLUMNS: [&str; 14] = [
    "t",
    "mass_N",
    "minA",
    "maxA",
    "minN",
    "grad_A_l2sq",
    "phi",
    "y_entropy",
    "mass_residual",
    "r1",
    "r2",
    "r3",
    "r4",
    "flags",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass_n: f64,
    pub min_a: f64,
    pub max_a: f64,
    pub min_n: f64,
    pub grad_a_l2sq: f64,
    pub phi: Option<f64>,
    pub y_entropy: Option<f64>,
    pub c_used: Option<f64>,
    pub mass_residual: Option<f64>,
    pub bound_flags: Option<BoundFlags>,
    pub energy: Option<EnergyResiduals>,
}

fn opt(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        let _ = write!(out, "{v}");
    }
}

impl DiagnosticsRecord {
    pub fn csv_header() -> String {
        DIAGNOSTICS_COLUMNS.join(",")
    }

    /// One CSV row in [`DIAGNOSTICS_COLUMNS`] order; absent values are empty.
    pub fn to_csv_row(&self) -> String {
        let mut out = format!(
            "{},{},{},{},{},{},",
            self.t, self.mass_n, self.min_a, self.max_a, self.min_n, self.grad_a_l2sq
        );
        for v in [self.phi, self.y_entropy, self.mass_residual] {
            opt(&mut out, v);
            out.push(',');
        }
        for i in 0..4 {
            opt(&mut out, self.energy.map(|e| e.r[i]));
            out.push(',');
        }
        out.push_str(&self.flags_field());
        out
    }

    /// `Amin:ok;Amax:ok;Npos:fail;id3:ok`, listing only the monitors present.
    pub fn flags_field(&self) -> String {
        let word = |ok: bool| if ok { "ok" } else { "fail" };
        let mut parts = Vec::new();
        if let Some(f) = &self.bound_flags {
            parts.push(format!("Amin:{}", word(f.a_min.ok)));
            parts.push(format!("Amax:{}", word(f.a_max.ok)));
            parts.push(format!("Npos:{}", word(f.n_pos.ok)));
        }
        if let Some(e) = &self.energy {
            parts.push(format!("id3:{}", word(e.id3_sign_ok)));
        }
        parts.join(";")
    }
}

/// Everything fixed at the start of a run that the per-output records need.
#[derive(Debug, Clone)]
pub struct DiagnosticsContext {
    params: Option<ModelParams>,
    bounds: DerivedBounds,
    n0_mass: f64,
    entropy: Option<EntropyParams>,
    c: Option<f64>,
    tol: f64,
    floor: f64,
}

impl DiagnosticsContext {
    pub fn new(kind: &ModelKind, initial: &SimState, bounds: DerivedBounds, tol: f64, floor: f64) -> Result<Self> {
        let params = kind.pitcher().copied();
        let entropy = match &params {
            Some(p) => match entropy_params(p, &bounds, MU_SQ_SQUARE, K_SQUARE) {
                Ok(ep) => Some(ep),
                // φ stays well defined when the decay regime is out of reach
                Err(Error::InfeasibleRegime { sigma, c1 }) => {
                    Some(EntropyParams { sigma, c1, omega_tilde: p.omega.min(2.0) })
                }
                Err(e) => return Err(e),
            },
            None => None,
        };
        let c = params.and_then(|p| choose_c(p.chi, p.eta));
        Ok(Self { params, bounds, n0_mass: initial.mass_n(), entropy, c, tol, floor })
    }

    pub fn entropy_params(&self) -> Option<&EntropyParams> {
        self.entropy.as_ref()
    }

    pub fn c(&self) -> Option<f64> {
        self.c
    }

    pub fn bounds(&self) -> &DerivedBounds {
        &self.bounds
    }

    /// Builds the record for `state`; energy residuals need a centered
    /// window and are skipped when it is absent or not uniformly spaced.
    pub fn record(
        &self,
        state: &SimState,
        window: Option<(&SimState, &SimState, &SimState)>,
    ) -> Result<DiagnosticsRecord> {
        let (a, n) = (&state.a, &state.n);
        let mut rec = DiagnosticsRecord {
            t: state.t,
            mass_n: state.mass_n(),
            min_a: a.min(),
            max_a: a.max(),
            min_n: n.min(),
            grad_a_l2sq: a.grad_l2sq(),
            phi: None,
            y_entropy: None,
            c_used: None,
            mass_residual: None,
            bound_flags: None,
            energy: None,
        };
        let Some(p) = &self.params else {
            return Ok(rec);
        };
        if let Some(ep) = &self.entropy {
            rec.phi = match entropy_phi(state, ep) {
                Ok(v) => Some(v),
                Err(Error::NegativeN { .. }) => None,
                Err(e) => return Err(e),
            };
        }
        if let Some(c) = self.c {
            rec.y_entropy = entropy_y(state, c).ok();
            rec.c_used = Some(c);
        }
        let chk = verify_apriori(state, &self.bounds, p, self.n0_mass, self.tol);
        rec.mass_residual = Some(chk.mass_residual);
        rec.bound_flags = Some(chk.flags);
        if let Some(w) = window {
            rec.energy = match energy_residuals(w, p, self.floor) {
                Ok(e) => Some(e),
                Err(Error::NonUniformWindow | Error::NonPositiveN { .. }) => None,
                Err(e) => return Err(e),
            };
        }
        Ok(rec)
    }
}
