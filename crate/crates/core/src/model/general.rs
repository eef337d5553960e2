//! Generic plug-in kinetics
//!
//! ```text
//! A_t = η ΔA − A + f(A, N)
//! N_t = ΔN − ∇·(N ∇h(A)) − ω N + g(A, N)
//! ```
//!
//! and sampled checks of the structural hypotheses under which the global
//! existence argument carries over. The checks are evidence at sample points,
//! never proofs.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DerivedBounds, ModelParams};
use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ScalarFn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Plug-in declared growth envelopes:
/// `|g| ≤ g₁(A) N^{1−δ} + g₂(A)` and `|f| ≤ f₁(A) N + f₂(A)`.
#[derive(Clone)]
pub struct Envelopes {
    pub f1: ScalarFn,
    pub f2: ScalarFn,
    pub g1: ScalarFn,
    pub g2: ScalarFn,
    pub delta: f64,
}

#[derive(Clone)]
pub struct GeneralModel {
    pub eta: f64,
    pub omega: f64,
    pub f: ScalarFn2,
    pub g: ScalarFn2,
    /// Sensitivity potential.
    pub h: ScalarFn,
    pub a_min: f64,
    pub a_max: f64,
    pub envelopes: Envelopes,
}

impl fmt::Debug for GeneralModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralModel")
            .field("eta", &self.eta)
            .field("omega", &self.omega)
            .field("a_min", &self.a_min)
            .field("a_max", &self.a_max)
            .field("delta", &self.envelopes.delta)
            .finish_non_exhaustive()
    }
}

impl GeneralModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.omega > 0.0) {
            return Err(Error::InvalidParameter("general model needs eta, omega > 0".into()));
        }
        if !(self.a_min > 0.0 && self.a_max > self.a_min && self.a_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "declared bounds need 0 < A_min < A_max, got [{}, {}]",
                self.a_min, self.a_max
            )));
        }
        if !(self.envelopes.delta > 0.0 && self.envelopes.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "envelope exponent delta must lie in (0, 1), got {}",
                self.envelopes.delta
            )));
        }
        Ok(())
    }

    /// The main system written in plug-in form: `f = ψNA(1 − A) + Ã`, `g = ω`,
    /// `h = χ log A`, with declared bounds taken from `bounds`.
    pub fn from_pitcher(p: ModelParams, bounds: DerivedBounds) -> Self {
        let ModelParams { psi, omega, atilde, chi, .. } = p;
        Self {
            eta: p.eta,
            omega,
            f: Arc::new(move |a, n| psi * n * a * (1.0 - a) + atilde),
            g: Arc::new(move |_, _| omega),
            h: Arc::new(move |a| chi * a.ln()),
            a_min: bounds.a_min,
            a_max: bounds.a_max,
            envelopes: Envelopes {
                f1: Arc::new(move |a| psi * a * (1.0 - a).abs()),
                f2: Arc::new(move |_| atilde),
                g1: Arc::new(|_| 0.0),
                g2: Arc::new(move |_| omega),
                delta: 0.5,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// `g(A, 0) ≥ 0`.
    SourceNonnegative,
    /// `−A_min + f(A_min, N) ≥ 0` and `−A_max + f(A_max, N) ≤ 0`.
    InvariantBounds,
    /// `|g| ≤ g₁ N^{1−δ} + g₂` with bounded `g₁, g₂`.
    SourceGrowth,
    /// `|f| ≤ f₁ N + f₂` with bounded `f₁, f₂`.
    KineticsGrowth,
    /// `h′, h″` bounded on `[A_min, A_max]`.
    SensitivityRegular,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 5] = [
        Hypothesis::SourceNonnegative,
        Hypothesis::InvariantBounds,
        Hypothesis::SourceGrowth,
        Hypothesis::KineticsGrowth,
        Hypothesis::SensitivityRegular,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::SourceNonnegative => "H1",
            Hypothesis::InvariantBounds => "H2",
            Hypothesis::SourceGrowth => "H3",
            Hypothesis::KineticsGrowth => "H4",
            Hypothesis::SensitivityRegular => "H5",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    pub passed: bool,
    /// First offending `(A, N)` and the offending value.
    pub counterexample: Option<(f64, f64, f64)>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    pub samples: usize,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, h: Hypothesis) -> &HypothesisCheck {
        self.checks.iter().find(|c| c.hypothesis == h).expect("all hypotheses are checked")
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{}: {}", c.hypothesis.label(), c.message)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisSampling {
    pub n_samples: usize,
    pub seed: u64,
    /// Upper end of the sampled N range.
    pub n_big: f64,
    /// Sampled |h′| or |h″| above this counts as a suspected singularity.
    pub derivative_threshold: f64,
}

impl Default for HypothesisSampling {
    fn default() -> Self {
        Self { n_samples: 400, seed: 0, n_big: 1e3, derivative_threshold: 1e8 }
    }
}

const SLACK: f64 = 1e-12;

pub fn validate_general_hypotheses(m: &GeneralModel, cfg: HypothesisSampling) -> Result<HypothesisReport> {
    if !(m.a_min > 0.0 && m.a_max > m.a_min) {
        return Err(Error::InvalidParameter(format!(
            "declared bounds need 0 < A_min < A_max, got [{}, {}]",
            m.a_min, m.a_max
        )));
    }
    let (a_lo, a_hi) = (m.a_min, m.a_max);
    // structured points (endpoints included) plus seeded uniform points
    let side = ((cfg.n_samples as f64).sqrt().ceil() as usize).max(2);
    let mut a_pts: Vec<f64> =
        (0..side).map(|k| a_lo + (a_hi - a_lo) * k as f64 / (side - 1) as f64).collect();
    let mut n_pts: Vec<f64> = std::iter::once(0.0)
        .chain((0..side - 1).map(|k| cfg.n_big.powf(k as f64 / (side - 2).max(1) as f64) - 1.0))
        .chain(std::iter::once(cfg.n_big))
        .collect();
    let mut pairs: Vec<(f64, f64)> =
        a_pts.iter().flat_map(|&a| n_pts.iter().map(move |&n| (a, n))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.n_samples {
        let a = rng.gen_range(a_lo..=a_hi);
        let n = rng.gen_range(0.0..=cfg.n_big);
        pairs.push((a, n));
        a_pts.push(a);
        n_pts.push(n);
    }

    let mut checks = Vec::with_capacity(5);

    checks.push(first_violation(Hypothesis::SourceNonnegative, a_pts.iter().map(|&a| {
        let v = (m.g)(a, 0.0);
        ((a, 0.0, v), v >= -SLACK && v.is_finite())
    })));

    checks.push(first_violation(
        Hypothesis::InvariantBounds,
        n_pts.iter().flat_map(|&n| {
            let lo = -a_lo + (m.f)(a_lo, n);
            let hi = -a_hi + (m.f)(a_hi, n);
            [((a_lo, n, lo), lo >= -SLACK), ((a_hi, n, hi), hi <= SLACK)]
        }),
    ));

    let e = &m.envelopes;
    checks.push(first_violation(Hypothesis::SourceGrowth, pairs.iter().map(|&(a, n)| {
        let (g1, g2) = ((e.g1)(a), (e.g2)(a));
        let bound = g1 * n.powf(1.0 - e.delta) + g2;
        let v = (m.g)(a, n).abs();
        ((a, n, v), g1.is_finite() && g2.is_finite() && v.is_finite() && v <= bound + SLACK * (1.0 + bound))
    })));

    checks.push(first_violation(Hypothesis::KineticsGrowth, pairs.iter().map(|&(a, n)| {
        let (f1, f2) = ((e.f1)(a), (e.f2)(a));
        let bound = f1 * n + f2;
        let v = (m.f)(a, n).abs();
        ((a, n, v), f1.is_finite() && f2.is_finite() && v.is_finite() && v <= bound + SLACK * (1.0 + bound))
    })));

    let step = 1e-4 * (a_hi - a_lo);
    checks.push(first_violation(Hypothesis::SensitivityRegular, a_pts.iter().map(|&a| {
        let (d1, d2) = h_derivatives(&m.h, a, step, a_lo, a_hi);
        let worst = d1.abs().max(d2.abs());
        let ok = d1.is_finite() && d2.is_finite() && worst <= cfg.derivative_threshold;
        ((a, f64::NAN, if worst.is_nan() { f64::INFINITY } else { worst }), ok)
    })));

    Ok(HypothesisReport { checks, samples: pairs.len() })
}

/// Finite-difference `h′, h″` at `a`, with stencils kept inside `[lo, hi]`.
fn h_derivatives(h: &ScalarFn, a: f64, s: f64, lo: f64, hi: f64) -> (f64, f64) {
    if a - s < lo {
        let (h0, h1, h2) = (h(a), h(a + s), h(a + 2.0 * s));
        ((h1 - h0) / s, (h2 - 2.0 * h1 + h0) / (s * s))
    } else if a + s > hi {
        let (h0, h1, h2) = (h(a), h(a - s), h(a - 2.0 * s));
        ((h0 - h1) / s, (h2 - 2.0 * h1 + h0) / (s * s))
    } else {
        let (hm, h0, hp) = (h(a - s), h(a), h(a + s));
        ((hp - hm) / (2.0 * s), (hp - 2.0 * h0 + hm) / (s * s))
    }
}

fn first_violation(
    hypothesis: Hypothesis,
    points: impl Iterator<Item = ((f64, f64, f64), bool)>,
) -> HypothesisCheck {
    let mut count = 0usize;
    for (pt, ok) in points {
        count += 1;
        if !ok {
            let message = if hypothesis == Hypothesis::SensitivityRegular {
                format!("suspected violation near A = {} (|derivative| = {:e})", pt.0, pt.2)
            } else {
                format!("violated at A = {}, N = {} (value {})", pt.0, pt.1, pt.2)
            };
            return HypothesisCheck { hypothesis, passed: false, counterexample: Some(pt), message };
        }
    }
    HypothesisCheck {
        hypothesis,
        passed: true,
        counterexample: None,
        message: format!("passed at {count} sampled points"),
    }
}
