//! Stability of Picard iteration under perturbation schedules.
//!
//! A perturbed run records, against a fixed point q with p(q,q) = 0,
//!
//!   a_n = p(y_n, q)              distance to the fixed point
//!   c_n = s * p(y_{n+1}, T y_n)  scaled drift away from exact iteration
//!
//! The iteration is stable for the map when vanishing drift forces
//! a_n -> 0. Finite trials cannot certify limits, so the verdict
//! vocabulary is converged/inconclusive, never "refuted": the drift and
//! distance tails are required to sit below tolerance (exactly zero on
//! finite spaces) over the last quarter of the run.

use crate::error::{Error, Result};
use crate::ratio::{fmt_q, q_int, qser, qser_opt, qser_vec, Q};
use crate::selfmap::{MapFormula, MapTable};
use crate::space::{FiniteSpace, FuncSpace};
use num::{Signed, Zero};
use serde::Serialize;

// ---------------------------------------------------------------------------
// Parameter condition
// ---------------------------------------------------------------------------

/// The five contraction parameters together with the coefficient, plus the
/// derived per-step stability factor
///
///   l = s * (2 L1 + s L4 + s L5) / (2 - 2 L3 - s L4 - s L5),
///
/// which lies in [0, 1) exactly when
///
///   2 s L1 + 2 L3 + (s + s^2)(L4 + L5) < 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityParams {
    #[serde(with = "qser_vec")]
    pub lambdas: Vec<Q>,
    #[serde(with = "qser")]
    pub s: Q,
}

impl StabilityParams {
    pub fn new(lambdas: [Q; 5], s: Q) -> Result<Self> {
        for (k, l) in lambdas.iter().enumerate() {
            if l < &Q::zero() {
                return Err(Error::Parameter(format!(
                    "lambda{} = {} must be nonnegative",
                    k + 1,
                    fmt_q(l)
                )));
            }
        }
        if s < q_int(1) {
            return Err(Error::Parameter(format!("coefficient {} is below 1", fmt_q(&s))));
        }
        Ok(StabilityParams { lambdas: lambdas.to_vec(), s })
    }

    pub fn condition_lhs(&self) -> Q {
        let [l1, _, l3, l4, l5] = [
            &self.lambdas[0],
            &self.lambdas[1],
            &self.lambdas[2],
            &self.lambdas[3],
            &self.lambdas[4],
        ];
        let s = &self.s;
        let two = q_int(2);
        &two * s * l1 + &two * l3 + (s + s * s) * (l4 + l5)
    }

    pub fn condition_holds(&self) -> bool {
        self.condition_lhs() < q_int(2)
    }

    /// The per-step factor l, when its denominator is positive.
    pub fn stability_factor(&self) -> Option<Q> {
        let [l1, _, l3, l4, l5] = [
            &self.lambdas[0],
            &self.lambdas[1],
            &self.lambdas[2],
            &self.lambdas[3],
            &self.lambdas[4],
        ];
        let s = &self.s;
        let two = q_int(2);
        let denom = &two - &two * l3 - s * l4 - s * l5;
        (denom > Q::zero()).then(|| s * (&two * l1 + s * l4 + s * l5) / denom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    #[serde(with = "qser")]
    pub lhs: Q,
    pub holds: bool,
    #[serde(with = "qser_opt")]
    pub stability_factor: Option<Q>,
}

/// Exact evaluation of the parameter condition and the derived factor.
pub fn stability_condition(params: &StabilityParams) -> ConditionReport {
    ConditionReport {
        lhs: params.condition_lhs(),
        holds: params.condition_holds(),
        stability_factor: params.stability_factor(),
    }
}

// ---------------------------------------------------------------------------
// Sequence lemma
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum LemmaVerdict {
    /// a_{n+1} <= h a_n + c_n holds on the whole prefix; carries the exact
    /// tail bound a_N <= h^N a_0 + sum h^(N-1-i) c_i at the last index.
    Verified {
        #[serde(with = "qser")]
        a_last: Q,
        #[serde(with = "qser")]
        bound_last: Q,
        /// whether the c-tail has visibly vanished on the prefix
        c_vanishing: bool,
    },
    PremiseFailed { index: usize },
}

/// Verify the recurrence premise a_{n+1} <= h a_n + c_n on a finite prefix
/// and evaluate the telescoped tail bound exactly.
pub fn check_lemma_sequences(a: &[Q], c: &[Q], h: &Q) -> Result<LemmaVerdict> {
    if h < &Q::zero() || h >= &q_int(1) {
        return Err(Error::Parameter(format!("h = {} must lie in [0, 1)", fmt_q(h))));
    }
    if a.is_empty() {
        return Err(Error::Parameter("empty a-sequence".into()));
    }
    if c.len() + 1 < a.len() {
        return Err(Error::Parameter("c-sequence too short for the a-prefix".into()));
    }
    for (name, seq) in [("a", a), ("c", c)] {
        if seq.iter().any(|v| v < &Q::zero()) {
            return Err(Error::Parameter(format!("{name}-sequence has a negative entry")));
        }
    }
    for n in 0..a.len() - 1 {
        if a[n + 1] > h * &a[n] + &c[n] {
            return Ok(LemmaVerdict::PremiseFailed { index: n });
        }
    }
    let last = a.len() - 1;
    let mut bound = h.pow(last as i32) * &a[0];
    for (i, ci) in c.iter().take(last).enumerate() {
        bound += h.pow((last - 1 - i) as i32) * ci;
    }
    // the c-tail on the observed prefix: last quarter strictly below the
    // first quarter's maximum, or identically zero
    let quarter = (c.len() / 4).max(1);
    let head_max = c.iter().take(quarter).cloned().fold(Q::zero(), |m, v| m.max(v));
    let tail_max = c
        .iter()
        .rev()
        .take(quarter)
        .cloned()
        .fold(Q::zero(), |m, v| m.max(v));
    let c_vanishing = tail_max.is_zero() || tail_max < head_max;
    Ok(LemmaVerdict::Verified { a_last: a[last].clone(), bound_last: bound, c_vanishing })
}

// ---------------------------------------------------------------------------
// Perturbed runs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum TrialVerdict {
    ConvergedToQ,
    Inconclusive { reason: String },
}

/// Stepwise re-verification of the recurrence a_{n+1} <= c_n + l a_n used
/// by the stability argument, when parameters are supplied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepwiseReport {
    pub ok: bool,
    pub first_violation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityTrial {
    pub y: Vec<String>,
    /// a_n = p(y_n, q)
    #[serde(with = "qser_vec")]
    pub a: Vec<Q>,
    /// raw drift p(y_{n+1}, T y_n)
    #[serde(with = "qser_vec")]
    pub c_raw: Vec<Q>,
    /// scaled drift s * p(y_{n+1}, T y_n)
    #[serde(with = "qser_vec")]
    pub c: Vec<Q>,
    pub verdict: TrialVerdict,
    pub drift_vanished: bool,
    pub distance_vanished: bool,
    pub stepwise: Option<StepwiseReport>,
}

impl StabilityTrial {
    /// A trial refutes stability only when its drift vanished while the
    /// distance to the fixed point did not.
    pub fn is_stability_failure(&self) -> bool {
        self.drift_vanished && !self.distance_vanished
    }
}

/// Perturbation schedules. Explicit sequences are taken as-is; the
/// geometric-noise generator perturbs T y_n by a magnitude r * 2^-n,
/// realized on finite spaces as the point whose distance from T y_n is
/// closest to that magnitude.
#[derive(Debug, Clone)]
pub enum Schedule {
    Explicit(Vec<usize>),
    GeometricNoise { r: Q, y0: usize },
}

fn last_quarter_all_zero(values: &[Q]) -> bool {
    if values.is_empty() {
        return false;
    }
    let quarter = (values.len() / 4).max(1);
    values.iter().rev().take(quarter).all(|v| v.is_zero())
}

/// Run a perturbed trial on a finite space against the fixed point q.
/// Finite-space vanishing is exact: the last quarter of the run must be
/// identically zero.
pub fn run_perturbed(
    space: &FiniteSpace,
    map: &MapTable,
    q: usize,
    schedule: &Schedule,
    n_steps: usize,
    params: Option<&StabilityParams>,
) -> Result<StabilityTrial> {
    if map.apply(q) != q {
        return Err(Error::Precondition(format!(
            "{} is not a fixed point of the map",
            space.label(q)
        )));
    }
    if !space.p(q, q).is_zero() {
        return Err(Error::Precondition(format!(
            "fixed point {} has positive self-distance {}",
            space.label(q),
            fmt_q(space.p(q, q))
        )));
    }
    if n_steps < 4 {
        return Err(Error::Parameter("a trial needs at least 4 steps".into()));
    }

    let y: Vec<usize> = match schedule {
        Schedule::Explicit(seq) => {
            if seq.len() < 2 {
                return Err(Error::Parameter("explicit schedule needs at least 2 points".into()));
            }
            if let Some(&bad) = seq.iter().find(|&&i| i >= space.len()) {
                return Err(Error::UnknownPoint(format!("schedule index {bad}")));
            }
            seq.clone()
        }
        Schedule::GeometricNoise { r, y0 } => {
            if r <= &Q::zero() {
                return Err(Error::Parameter("noise magnitude must be positive".into()));
            }
            let mut seq = vec![*y0];
            let mut magnitude = r.clone();
            for _ in 0..n_steps {
                let target = map.apply(*seq.last().unwrap());
                // nearest realizable noise: minimize |p(z, target) - magnitude|
                let z = (0..space.len())
                    .min_by_key(|&z| (space.p(z, target) - &magnitude).abs())
                    .expect("nonempty space");
                seq.push(z);
                magnitude /= q_int(2);
            }
            seq
        }
    };

    let steps = y.len() - 1;
    let mut a: Vec<Q> = Vec::with_capacity(y.len());
    let mut c_raw: Vec<Q> = Vec::with_capacity(steps);
    let mut c: Vec<Q> = Vec::with_capacity(steps);
    let s = space.declared_s();
    for (n, &yn) in y.iter().enumerate() {
        a.push(space.p(yn, q).clone());
        if n + 1 < y.len() {
            let raw = space.p(y[n + 1], map.apply(yn)).clone();
            c.push(s * &raw);
            c_raw.push(raw);
        }
    }

    let drift_vanished = last_quarter_all_zero(&c_raw);
    let distance_vanished = last_quarter_all_zero(&a);
    let verdict = if drift_vanished && distance_vanished {
        TrialVerdict::ConvergedToQ
    } else if !drift_vanished {
        TrialVerdict::Inconclusive { reason: "drift did not vanish".into() }
    } else {
        TrialVerdict::Inconclusive {
            reason: "drift vanished but the distance to q did not".into(),
        }
    };

    let stepwise = params.and_then(|p| {
        let l = p.stability_factor()?;
        if !p.condition_holds() {
            return None;
        }
        let mut first_violation = None;
        for n in 0..steps {
            if a[n + 1] > &c[n] + &l * &a[n] {
                first_violation = Some(n);
                break;
            }
        }
        Some(StepwiseReport { ok: first_violation.is_none(), first_violation })
    });

    Ok(StabilityTrial {
        y: y.iter().map(|&i| space.label(i).to_string()).collect(),
        a,
        c_raw,
        c,
        verdict,
        drift_vanished,
        distance_vanished,
        stepwise,
    })
}

// ---------------------------------------------------------------------------
// Function-backed trials
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum FuncSchedule {
    Explicit(Vec<f64>),
    /// y_n = (n / (n+1)) * q
    ScaledFixedPoint,
    /// y_{n+1} = clamp(T y_n + r * 2^-n)
    GeometricNoise { r: f64, y0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuncStabilityTrial {
    pub a: Vec<f64>,
    pub c_raw: Vec<f64>,
    pub c: Vec<f64>,
    pub verdict: TrialVerdict,
    pub drift_vanished: bool,
    pub distance_vanished: bool,
    pub stepwise: Option<StepwiseReport>,
    pub a_last: f64,
    pub c_last: f64,
}

fn last_quarter_below(values: &[f64], tol: f64) -> bool {
    if values.is_empty() {
        return false;
    }
    let quarter = (values.len() / 4).max(1);
    values.iter().rev().take(quarter).all(|v| *v < tol)
}

/// Run a perturbed trial on a function-backed space. `s` scales the drift;
/// `tol_drift` and `tol_dist` bound the last-quarter tails of c and a.
#[allow(clippy::too_many_arguments)]
pub fn run_perturbed_func(
    space: &FuncSpace,
    map: &MapFormula,
    q: f64,
    schedule: &FuncSchedule,
    n_steps: usize,
    s: f64,
    tol_drift: f64,
    tol_dist: f64,
    stepwise_params: Option<(f64, f64)>, // (l, s) for the recurrence check
) -> Result<FuncStabilityTrial> {
    let residual = space.p(q, map.apply(q));
    if residual > 1e-9 {
        return Err(Error::Precondition(format!(
            "q = {q} is not numerically fixed (residual {residual:.3e})"
        )));
    }
    if n_steps < 4 {
        return Err(Error::Parameter("a trial needs at least 4 steps".into()));
    }
    let clamp = |x: f64| x.clamp(space.lo, space.hi);
    let y: Vec<f64> = match schedule {
        FuncSchedule::Explicit(seq) => seq.clone(),
        FuncSchedule::ScaledFixedPoint => (0..=n_steps)
            .map(|n| (n as f64) / ((n + 1) as f64) * q)
            .collect(),
        FuncSchedule::GeometricNoise { r, y0 } => {
            let mut seq = vec![clamp(*y0)];
            let mut magnitude = *r;
            for _ in 0..n_steps {
                let t = map.apply(*seq.last().unwrap());
                seq.push(clamp(t + magnitude));
                magnitude /= 2.0;
            }
            seq
        }
    };
    if y.len() < 2 {
        return Err(Error::Parameter("schedule needs at least 2 points".into()));
    }

    let steps = y.len() - 1;
    let mut a = Vec::with_capacity(y.len());
    let mut c_raw = Vec::with_capacity(steps);
    let mut c = Vec::with_capacity(steps);
    for (n, &yn) in y.iter().enumerate() {
        a.push(space.p(yn, q));
        if n + 1 < y.len() {
            let raw = space.p(y[n + 1], map.apply(yn));
            c_raw.push(raw);
            c.push(s * raw);
        }
    }

    let drift_vanished = last_quarter_below(&c, tol_drift);
    let distance_vanished = last_quarter_below(&a, tol_dist);
    let verdict = if drift_vanished && distance_vanished {
        TrialVerdict::ConvergedToQ
    } else if !drift_vanished {
        TrialVerdict::Inconclusive { reason: "drift did not vanish".into() }
    } else {
        TrialVerdict::Inconclusive {
            reason: "drift vanished but the distance to q did not".into(),
        }
    };

    let stepwise = stepwise_params.map(|(l, s_rec)| {
        let mut first_violation = None;
        for n in 0..steps {
            let slack = 1e-12 * (a[n] + 1.0);
            if a[n + 1] > s_rec * c_raw[n] + l * a[n] + slack {
                first_violation = Some(n);
                break;
            }
        }
        StepwiseReport { ok: first_violation.is_none(), first_violation }
    });

    Ok(FuncStabilityTrial {
        a_last: *a.last().unwrap(),
        c_last: *c.last().unwrap(),
        a,
        c_raw,
        c,
        verdict,
        drift_vanished,
        distance_vanished,
        stepwise,
    })
}
