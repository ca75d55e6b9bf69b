//! Picard iteration, quantitative rate certificates and fixed-point sets.

use crate::error::{Error, Result};
use crate::ratio::{fmt_q, q_int, qser, qser_vec, Q};
use crate::selfmap::{MapFormula, MapTable};
use crate::space::{FiniteSpace, FuncSpace};
use num::Zero;
use serde::Serialize;

/// How many consecutive strict increases of b_n trigger the divergence
/// heuristic. Heuristic only; finite orbits cannot truly diverge.
const DIVERGENCE_RUN: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TraceVerdict {
    /// Exact fixed point on a finite space.
    FixedPointFound {
        point: String,
        #[serde(with = "qser")]
        self_distance: Q,
    },
    /// Residual went below tolerance on a function-backed space; the
    /// verdict is numerical, not exact.
    NumericalFixedPoint { point: f64, residual_p: f64 },
    MaxIterations,
    DivergenceSuspected,
}

/// Picard orbit on a finite space, with the distance sequence
/// b_n = p(x_n, x_{n+1}).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteTrace {
    pub orbit: Vec<usize>,
    pub orbit_labels: Vec<String>,
    #[serde(with = "qser_vec")]
    pub b: Vec<Q>,
    pub verdict: TraceVerdict,
    pub iterations: usize,
}

/// Iterate x_{n+1} = T x_n until an exact repeat, the divergence heuristic,
/// or max_iter steps. Fixed-point detection is exact point equality; small
/// p(x_n, x_{n+1}) proves nothing here because self-distances may be
/// positive.
pub fn iterate(space: &FiniteSpace, map: &MapTable, x0: usize, max_iter: usize) -> FiniteTrace {
    assert!(x0 < space.len(), "start point outside the space");
    let mut orbit = vec![x0];
    let mut b: Vec<Q> = Vec::new();
    let mut growth_run = 0usize;
    let mut verdict = TraceVerdict::MaxIterations;
    for _ in 0..max_iter {
        let cur = *orbit.last().unwrap();
        let next = map.apply(cur);
        b.push(space.p(cur, next).clone());
        orbit.push(next);
        if next == cur {
            verdict = TraceVerdict::FixedPointFound {
                point: space.label(cur).to_string(),
                self_distance: space.p(cur, cur).clone(),
            };
            break;
        }
        if b.len() >= 2 && b[b.len() - 1] > b[b.len() - 2] {
            growth_run += 1;
            if growth_run >= DIVERGENCE_RUN {
                verdict = TraceVerdict::DivergenceSuspected;
                break;
            }
        } else {
            growth_run = 0;
        }
    }
    let iterations = orbit.len() - 1;
    FiniteTrace {
        orbit_labels: orbit.iter().map(|&i| space.label(i).to_string()).collect(),
        orbit,
        b,
        verdict,
        iterations,
    }
}

/// Picard orbit on a function-backed space. Stops when the step distance
/// p(x_n, x_{n+1}) drops below tol (or on an exactly stationary f64).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuncTrace {
    pub orbit: Vec<f64>,
    pub b: Vec<f64>,
    pub verdict: TraceVerdict,
    pub iterations: usize,
}

pub fn iterate_func(
    space: &FuncSpace,
    map: &MapFormula,
    x0: f64,
    max_iter: usize,
    tol: f64,
) -> Result<FuncTrace> {
    if !space.contains(x0) {
        return Err(Error::UnknownPoint(format!("{x0} outside [{}, {}]", space.lo, space.hi)));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance {tol} must be positive")));
    }
    let mut orbit = vec![x0];
    let mut b = Vec::new();
    let mut growth_run = 0usize;
    let mut verdict = TraceVerdict::MaxIterations;
    for _ in 0..max_iter {
        let cur = *orbit.last().unwrap();
        let next = map.apply(cur);
        let step = space.p(cur, next);
        b.push(step);
        orbit.push(next);
        if step < tol || next == cur {
            let residual = space.p(next, map.apply(next));
            verdict = TraceVerdict::NumericalFixedPoint { point: next, residual_p: residual };
            break;
        }
        if b.len() >= 2 && b[b.len() - 1] > b[b.len() - 2] {
            growth_run += 1;
            if growth_run >= DIVERGENCE_RUN {
                verdict = TraceVerdict::DivergenceSuspected;
                break;
            }
        } else {
            growth_run = 0;
        }
    }
    let iterations = orbit.len() - 1;
    Ok(FuncTrace { orbit, b, verdict, iterations })
}

// ---------------------------------------------------------------------------
// Rate certificates
// ---------------------------------------------------------------------------

/// Quantitative certificate over a recorded orbit: the geometric decay
/// b_n <= mu^n b_0, plus, when s*mu < 1, the tail bound
/// p(x_n, x_m) <= s mu^n / (1 - s mu) * p(x_0, x_1) over realized pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCertificate {
    #[serde(with = "qser")]
    pub mu: Q,
    #[serde(with = "qser")]
    pub s: Q,
    pub step_ok: bool,
    pub step_violations: Vec<usize>,
    /// s*mu < 1, which makes the tail bound meaningful.
    pub tail_applicable: bool,
    pub tail_ok: Option<bool>,
    pub tail_violations: Vec<(usize, usize)>,
    pub all_pass: bool,
}

pub fn certify_rate(
    space: &FiniteSpace,
    trace: &FiniteTrace,
    mu: &Q,
    s: &Q,
) -> Result<RateCertificate> {
    if mu < &Q::zero() || mu >= &q_int(1) {
        return Err(Error::Parameter(format!("rate {} must lie in [0, 1)", fmt_q(mu))));
    }
    let b = &trace.b;
    let mut step_violations = Vec::new();
    if !b.is_empty() {
        let b0 = &b[0];
        let mut mu_pow = q_int(1);
        for (n, bn) in b.iter().enumerate() {
            if n > 0 {
                mu_pow *= mu;
            }
            if bn > &(&mu_pow * b0) {
                step_violations.push(n);
            }
        }
    }

    let smu = s * mu;
    let tail_applicable = smu < q_int(1);
    let mut tail_violations = Vec::new();
    let tail_ok = if tail_applicable && !b.is_empty() {
        let b0 = &b[0];
        let denom = q_int(1) - &smu;
        for n in 0..trace.orbit.len() {
            for m in (n + 1)..trace.orbit.len() {
                let bound = s * mu.pow(n as i32) / &denom * b0;
                if space.p(trace.orbit[n], trace.orbit[m]) > &bound {
                    tail_violations.push((n, m));
                }
            }
        }
        Some(tail_violations.is_empty())
    } else {
        None
    };

    let step_ok = step_violations.is_empty();
    let all_pass = step_ok && tail_ok.unwrap_or(true);
    Ok(RateCertificate {
        mu: mu.clone(),
        s: s.clone(),
        step_ok,
        step_violations,
        tail_applicable,
        tail_ok,
        tail_violations,
        all_pass,
    })
}

/// f64 analog for function-backed traces; comparisons carry a small
/// relative slack because the recorded values are already rounded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericRateCertificate {
    pub mu: f64,
    pub s: f64,
    pub step_ok: bool,
    pub tail_applicable: bool,
    pub tail_ok: Option<bool>,
    pub all_pass: bool,
}

pub fn certify_rate_func(
    space: &FuncSpace,
    trace: &FuncTrace,
    mu: f64,
    s: f64,
) -> Result<NumericRateCertificate> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::Parameter(format!("rate {mu} must lie in [0, 1)")));
    }
    let b = &trace.b;
    let mut step_ok = true;
    if let Some(b0) = b.first() {
        let slack = 1e-9 * (b0 + 1.0);
        for (n, bn) in b.iter().enumerate() {
            if *bn > mu.powi(n as i32) * b0 + slack {
                step_ok = false;
            }
        }
    }
    let tail_applicable = s * mu < 1.0;
    let tail_ok = if tail_applicable && !b.is_empty() {
        let b0 = b[0];
        let slack = 1e-9 * (b0 + 1.0);
        let mut ok = true;
        for n in 0..trace.orbit.len() {
            for m in (n + 1)..trace.orbit.len() {
                let bound = s * mu.powi(n as i32) / (1.0 - s * mu) * b0;
                if space.p(trace.orbit[n], trace.orbit[m]) > bound + slack {
                    ok = false;
                }
            }
        }
        Some(ok)
    } else {
        None
    };
    let all_pass = step_ok && tail_ok.unwrap_or(true);
    Ok(NumericRateCertificate { mu, s, step_ok, tail_applicable, tail_ok, all_pass })
}

// ---------------------------------------------------------------------------
// Fixed-point sets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSet {
    pub points: Vec<usize>,
    pub labels: Vec<String>,
    #[serde(with = "qser_vec")]
    pub self_distances: Vec<Q>,
}

impl FixedPointSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

/// Exhaustive, exact fixed-point scan on a finite space.
pub fn fixed_points(space: &FiniteSpace, map: &MapTable) -> FixedPointSet {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut self_distances = Vec::new();
    for i in 0..space.len() {
        if map.apply(i) == i {
            points.push(i);
            labels.push(space.label(i).to_string());
            self_distances.push(space.p(i, i).clone());
        }
    }
    FixedPointSet { points, labels, self_distances }
}
