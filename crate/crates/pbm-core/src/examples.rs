//! Bundled demonstration instances and their reference reports.
//!
//! Instance 1 is a four-point space with p(x,y) = |x-y|^2 + max(x,y) off
//! the diagonal, self-distances p(x,x) = x except p(1,1) = 0, and the map
//! 1 -> 1, 2 -> 1, 3 -> 2, 4 -> 2. The table ships in corrected form: the
//! source presentation it reproduces prints p(1,3) = 4 where the formula
//! gives 7, and prints T(3) = 3 even though its own worked computations
//! (p(T3,T4) = p(2,2)) and the uniqueness of the fixed point both require
//! T(3) = 2. Both corrections are carried as an explicit discrepancy list.
//!
//! Instance 2 is the interval [0,1] with p(x,y) = |x-y|^k for k = 2 and
//! the map x -> e^(x-2): Picard iteration, the analytic contraction bound
//! e^-2, and a perturbed schedule y_n = (n/(n+1)) u.

use crate::contraction::{
    check_banach, check_banach_sampled, check_ch2, check_chatterjea, check_chka, check_eq211,
    ContractionReport, SampledContractionReport,
};
use crate::error::Result;
use crate::picard::{fixed_points, iterate, iterate_func, FiniteTrace, FuncTrace, TraceVerdict};
use crate::ratio::{q, q_int, qser, Q};
use crate::selfmap::{MapFormula, MapTable};
use crate::space::{AxiomReport, FiniteSpace, FuncSpace, PFormula};
use crate::stability::{run_perturbed_func, FuncSchedule, FuncStabilityTrial};
use serde::Serialize;

// ---------------------------------------------------------------------------
// Instance 1
// ---------------------------------------------------------------------------

/// The corrected four-point table, declared at coefficient 4.
pub fn example1_space() -> FiniteSpace {
    let labels: Vec<String> = (1..=4).map(|i| i.to_string()).collect();
    let f = |x: i64, y: i64| -> Q {
        if x == y {
            if x == 1 {
                q_int(0)
            } else {
                q_int(x)
            }
        } else {
            q_int((x - y).pow(2) + x.max(y))
        }
    };
    let rows: Vec<Vec<Q>> = (1..=4)
        .map(|x| (1..=4).map(|y| f(x, y)).collect())
        .collect();
    FiniteSpace::new(labels, rows, q_int(4)).expect("valid table")
}

/// Corrected map: 1 -> 1, 2 -> 1, 3 -> 2, 4 -> 2.
pub fn example1_map(space: &FiniteSpace) -> Result<MapTable> {
    MapTable::new(vec![0, 0, 1, 1], space)
}

/// The map as printed in the source presentation (T3 = 3), kept for the
/// discrepancy report; it has two fixed points.
pub fn example1_map_printed(space: &FiniteSpace) -> Result<MapTable> {
    MapTable::new(vec![0, 0, 2, 1], space)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub quantity: String,
    pub printed: String,
    pub corrected: String,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Example1Report {
    pub axioms_at_4: AxiomReport,
    #[serde(with = "qser")]
    pub minimal_s: Q,
    pub minimal_s_witness: Option<Vec<String>>,
    pub banach: ContractionReport,
    pub chatterjea: ContractionReport,
    pub ch2: ContractionReport,
    pub eq211: ContractionReport,
    /// Five-term condition with the single first parameter 3/4.
    pub chka_first_parameter: ContractionReport,
    pub fixed_points: Vec<String>,
    pub fixed_points_printed_map: Vec<String>,
    pub orbit_from_4: FiniteTrace,
    pub discrepancies: Vec<Discrepancy>,
}

pub fn reproduce_example1() -> Result<Example1Report> {
    let space = example1_space();
    let map = example1_map(&space)?;
    let printed = example1_map_printed(&space)?;
    let s4 = q_int(4);

    let minimal = space.minimal_coefficient()?;
    let minimal_s_witness = minimal
        .witness
        .map(|[x, y, z]| vec![
            space.label(x).to_string(),
            space.label(y).to_string(),
            space.label(z).to_string(),
        ]);

    let chka = check_chka(&space, &map, &[q(3, 4), q_int(0), q_int(0), q_int(0), q_int(0)], &s4)?;

    let discrepancies = vec![
        Discrepancy {
            quantity: "p(1,3)".into(),
            printed: "4".into(),
            corrected: "7".into(),
            note: "the formula |x-y|^2 + max(x,y) gives |1-3|^2 + 3 = 7".into(),
        },
        Discrepancy {
            quantity: "T(3)".into(),
            printed: "3".into(),
            corrected: "2".into(),
            note: "the worked inequality p(T3,T4) = p(2,2) and the uniqueness of the fixed \
                   point both require T(3) = 2; with T(3) = 3 the map has fixed points {1, 3}"
                .into(),
        },
    ];

    Ok(Example1Report {
        axioms_at_4: space.verify_axioms(&s4),
        minimal_s: minimal.value,
        minimal_s_witness,
        banach: check_banach(&space, &map),
        chatterjea: check_chatterjea(&space, &map, &s4),
        ch2: check_ch2(&space, &map, &s4),
        eq211: check_eq211(&space, &map)?,
        chka_first_parameter: chka,
        fixed_points: fixed_points(&space, &map).labels,
        fixed_points_printed_map: fixed_points(&space, &printed).labels,
        orbit_from_4: iterate(&space, &map, 3, 16),
        discrepancies,
    })
}

// ---------------------------------------------------------------------------
// Instance 2
// ---------------------------------------------------------------------------

pub const EXAMPLE2_K: f64 = 2.0;
pub const EXAMPLE2_LAMBDA: f64 = 2.0;

pub fn example2_space() -> FuncSpace {
    FuncSpace::new(0.0, 1.0, PFormula::AbsDiffPowK { k: EXAMPLE2_K }, 65).expect("valid interval")
}

pub fn example2_map() -> MapFormula {
    MapFormula::ExpShift { lambda: EXAMPLE2_LAMBDA }
}

/// Independent root of u = e^(u - lambda) on [0, 1], by bisection on
/// g(x) = x - e^(x - lambda). g(0) < 0 < g(1) for lambda > 1.
pub fn bisect_fixed_point(lambda: f64) -> f64 {
    let g = |x: f64| x - (x - lambda).exp();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Serialize)]
pub struct Example2Report {
    /// Fixed point reached by Picard iteration from 1.
    pub u: f64,
    pub iterations: usize,
    /// |u - e^(u-2)|
    pub residual_abs: f64,
    /// p(u, Tu) = |u - e^(u-2)|^k
    pub residual_p: f64,
    /// Root found independently by bisection, and the gap to u.
    pub bisection_u: f64,
    pub bisection_gap: f64,
    /// max over recorded steps of p(x_{n+1}, u) / p(x_n, u)
    pub max_step_ratio: f64,
    /// Analytic contraction bound (e^(1-lambda))^k = e^-2.
    pub lambda1: f64,
    pub sampled_banach: SampledContractionReport,
    /// Coefficient as presented (2^k) and the sharp one (2^(k-1)).
    pub s_presented: f64,
    pub s_sharp: f64,
    /// 2 s L1 + 2 L3 + (s + s^2)(L4 + L5) < 2 at each coefficient.
    pub stability_condition_presented: bool,
    pub stability_condition_sharp: bool,
    pub trace: FuncTrace,
    /// Perturbed schedule y_n = (n/(n+1)) u over 10^4 steps.
    pub stability_trial: FuncStabilityTrial,
}

pub fn reproduce_example2() -> Result<Example2Report> {
    let space = example2_space();
    let map = example2_map();

    // p-scale tolerance 1e-24 puts the coordinate residual near 1e-12
    let trace = iterate_func(&space, &map, 1.0, 200, 1e-24)?;
    let u = match trace.verdict {
        TraceVerdict::NumericalFixedPoint { point, .. } => point,
        _ => *trace.orbit.last().expect("nonempty orbit"),
    };
    let residual_abs = (u - map.apply(u)).abs();
    let residual_p = space.p(u, map.apply(u));

    let bisection_u = bisect_fixed_point(EXAMPLE2_LAMBDA);

    let mut max_step_ratio = 0.0f64;
    for w in trace.orbit.windows(2) {
        let denom = space.p(w[0], u);
        if denom > 0.0 {
            max_step_ratio = max_step_ratio.max(space.p(w[1], u) / denom);
        }
    }

    let lambda1 = ((1.0 - EXAMPLE2_LAMBDA).exp()).powf(EXAMPLE2_K);
    let s_presented = 2.0f64.powf(EXAMPLE2_K);
    let s_sharp = 2.0f64.powf(EXAMPLE2_K - 1.0);
    let condition = |s: f64| 2.0 * s * lambda1 < 2.0;

    let l_presented = s_presented * lambda1;
    let stability_trial = run_perturbed_func(
        &space,
        &map,
        u,
        &FuncSchedule::ScaledFixedPoint,
        10_000,
        s_presented,
        1e-8,
        1e-6,
        Some((l_presented, s_presented)),
    )?;

    Ok(Example2Report {
        u,
        iterations: trace.iterations,
        residual_abs,
        residual_p,
        bisection_u,
        bisection_gap: (u - bisection_u).abs(),
        max_step_ratio,
        lambda1,
        sampled_banach: check_banach_sampled(&space, &map),
        s_presented,
        s_sharp,
        stability_condition_presented: condition(s_presented),
        stability_condition_sharp: condition(s_sharp),
        trace,
        stability_trial,
    })
}
