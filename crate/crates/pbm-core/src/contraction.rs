//! Contraction conditions and their minimal admissible constants.
//!
//! Every condition is classified by exhaustive ratio maximization over the
//! pair universe (all unordered pairs including equal pairs; the five-term
//! rational condition is checked over ordered pairs since it is not
//! symmetric in x and y). 0/0 instances are vacuously true and excluded
//! from maximization; if every pair is excluded the minimal constant is 0.
//!
//! Conditions, for a self-map T with constant(s) below:
//!
//!   banach      p(Tx,Ty) <= L * p(x,y),                      admissible L < 1
//!   chatterjea  p(Tx,Ty) <= L * (p(x,Ty) + p(y,Tx)),         admissible s >= 2, L < 1/s^2
//!   ch2         p(Tx,Ty) <= L * max(p(x,y), p(x,Ty), p(y,Tx)), admissible s > 1, L < 1/s
//!   chka        five-term rational condition with nonnegative (L1..L5),
//!               admissible when it holds on all pairs and
//!               L1 + L2 + 2s L3 + s L4 + s L5 < 1
//!   eq211       p(Tx,T2x) <= L * p(x,Tx),                    admissible L < 1
//!
//! The chka report also carries the derived per-step Picard rate
//! (2L1 + 2s L3 + s L4 + s L5) / (2 - 2L2 - 2s L3 - s L4 - s L5).

use crate::error::{Error, Result};
use crate::ratio::{fmt_q, q_int, qser, qser_opt, Q};
use crate::selfmap::{MapFormula, MapTable};
use crate::space::{CheckBasis, FiniteSpace, FuncSpace};
use num::Zero;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Banach,
    Power,
    Chatterjea,
    Ch2,
    ChKa,
    Eq211,
}

impl Condition {
    pub fn tag(&self) -> &'static str {
        match self {
            Condition::Banach => "banach",
            Condition::Power => "power",
            Condition::Chatterjea => "chatterjea",
            Condition::Ch2 => "ch2",
            Condition::ChKa => "chka",
            Condition::Eq211 => "eq211",
        }
    }
}

/// Outcome of classifying one condition on a finite instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub condition: Condition,
    pub basis: CheckBasis,
    /// Least constant satisfying the condition; None means no finite
    /// constant works (a zero denominator with a positive numerator).
    #[serde(with = "qser_opt")]
    pub minimal: Option<Q>,
    /// Pair (or single point for eq211) attaining the minimal constant.
    pub witness: Option<Vec<String>>,
    /// Constant strictly below the condition's threshold, preconditions on
    /// s included.
    pub admissible: bool,
    /// The threshold the constant was compared against.
    #[serde(with = "qser_opt")]
    pub threshold: Option<Q>,
    #[serde(with = "qser_opt")]
    pub s_used: Option<Q>,
    /// chatterjea only: whether s^2 >= 2, the claimed-sharp region.
    pub sharp_s: Option<bool>,
    pub note: Option<String>,
    /// chka only.
    pub chka: Option<ChkaDetail>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChkaDetail {
    #[serde(with = "crate::ratio::qser_vec")]
    pub lambdas: Vec<Q>,
    #[serde(with = "qser")]
    pub weighted_sum: Q,
    pub sum_ok: bool,
    pub pointwise_ok: bool,
    pub pointwise_witness: Option<Vec<String>>,
    /// Per-step Picard rate implied by the parameters, when the
    /// denominator is positive.
    #[serde(with = "qser_opt")]
    pub derived_rate: Option<Q>,
}

fn report(
    condition: Condition,
    minimal: Option<Q>,
    witness: Option<Vec<String>>,
    admissible: bool,
    threshold: Option<Q>,
    s_used: Option<Q>,
) -> ContractionReport {
    ContractionReport {
        condition,
        basis: CheckBasis::Exact,
        minimal,
        witness,
        admissible,
        threshold,
        s_used,
        sharp_s: None,
        note: None,
        chka: None,
    }
}

/// Scan unordered pairs (i <= j), maximizing numer/denom with the 0/0
/// exclusion. Returns (max, witness, finite) where finite = false means
/// some pair had denom = 0 with numer > 0.
fn max_ratio<F>(space: &FiniteSpace, mut terms: F) -> (Q, Option<(usize, usize)>, bool)
where
    F: FnMut(usize, usize) -> (Q, Q),
{
    let n = space.len();
    let mut best = Q::zero();
    let mut witness = None;
    for i in 0..n {
        for j in i..n {
            let (numer, denom) = terms(i, j);
            if denom.is_zero() {
                if !numer.is_zero() {
                    return (best, witness, false);
                }
                continue;
            }
            let ratio = numer / denom;
            if ratio > best {
                best = ratio;
                witness = Some((i, j));
            }
        }
    }
    (best, witness, true)
}

fn pair_labels(space: &FiniteSpace, w: Option<(usize, usize)>) -> Option<Vec<String>> {
    w.map(|(i, j)| vec![space.label(i).to_string(), space.label(j).to_string()])
}

/// Minimal L with p(Tx,Ty) <= L p(x,y) on all pairs.
pub fn check_banach(space: &FiniteSpace, map: &MapTable) -> ContractionReport {
    let (best, w, finite) =
        max_ratio(space, |i, j| (space.p(map.apply(i), map.apply(j)).clone(), space.p(i, j).clone()));
    if !finite {
        let mut r = report(Condition::Banach, None, None, false, Some(q_int(1)), None);
        r.note = Some("no finite constant: a pair with p(x,y) = 0 has p(Tx,Ty) > 0".into());
        return r;
    }
    let admissible = best < q_int(1);
    report(Condition::Banach, Some(best), pair_labels(space, w), admissible, Some(q_int(1)), None)
}

/// Power-contraction scan: minimal Banach constant of T^n for n = 2..n_max.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerReport {
    /// (n, K_n); None entries mean no finite constant for that power.
    pub constants: Vec<(u32, Option<String>)>,
    /// Least n with K_n < 1 and its constant.
    pub least: Option<PowerWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerWitness {
    pub n: u32,
    #[serde(with = "qser")]
    pub constant: Q,
}

/// Exact constants of the iterated compositions, exposed for reuse.
pub fn power_constants(space: &FiniteSpace, map: &MapTable, n_max: u32) -> Vec<(u32, Option<Q>)> {
    let mut out = Vec::new();
    let mut comp = map.clone();
    for n in 2..=n_max {
        comp = map.compose(&comp);
        let (best, _, finite) = max_ratio(space, |i, j| {
            (space.p(comp.apply(i), comp.apply(j)).clone(), space.p(i, j).clone())
        });
        out.push((n, finite.then_some(best)));
    }
    out
}

pub fn check_power_banach(space: &FiniteSpace, map: &MapTable, n_max: u32) -> Result<PowerReport> {
    if n_max < 2 {
        return Err(Error::Parameter("power scan needs n_max >= 2".into()));
    }
    let constants = power_constants(space, map, n_max);
    let least = constants.iter().find_map(|(n, k)| match k {
        Some(k) if k < &q_int(1) => Some(PowerWitness { n: *n, constant: k.clone() }),
        _ => None,
    });
    Ok(PowerReport {
        constants: constants
            .into_iter()
            .map(|(n, k)| (n, k.as_ref().map(fmt_q)))
            .collect(),
        least,
    })
}

/// Minimal L with p(Tx,Ty) <= L (p(x,Ty) + p(y,Tx)).
pub fn check_chatterjea(space: &FiniteSpace, map: &MapTable, s: &Q) -> ContractionReport {
    let (best, w, finite) = max_ratio(space, |i, j| {
        let numer = space.p(map.apply(i), map.apply(j)).clone();
        let denom = space.p(i, map.apply(j)) + space.p(j, map.apply(i));
        (numer, denom)
    });
    let threshold = q_int(1) / (s * s);
    let mut r = if !finite {
        let mut r =
            report(Condition::Chatterjea, None, None, false, Some(threshold), Some(s.clone()));
        r.note = Some("no finite constant".into());
        r
    } else {
        let admissible = s >= &q_int(2) && best < threshold;
        report(
            Condition::Chatterjea,
            Some(best),
            pair_labels(space, w),
            admissible,
            Some(threshold),
            Some(s.clone()),
        )
    };
    r.sharp_s = Some(s * s >= q_int(2));
    if s < &q_int(2) {
        r.note = Some("coefficient below 2: outside the proved range".into());
    }
    r
}

/// Minimal L with p(Tx,Ty) <= L max(p(x,y), p(x,Ty), p(y,Tx)).
pub fn check_ch2(space: &FiniteSpace, map: &MapTable, s: &Q) -> ContractionReport {
    let (best, w, finite) = max_ratio(space, |i, j| {
        let numer = space.p(map.apply(i), map.apply(j)).clone();
        let denom = space
            .p(i, j)
            .max(space.p(i, map.apply(j)))
            .max(space.p(j, map.apply(i)))
            .clone();
        (numer, denom)
    });
    let threshold = q_int(1) / s;
    if !finite {
        let mut r = report(Condition::Ch2, None, None, false, Some(threshold), Some(s.clone()));
        r.note = Some("no finite constant".into());
        return r;
    }
    let admissible = s > &q_int(1) && best < threshold;
    let mut r = report(
        Condition::Ch2,
        Some(best),
        pair_labels(space, w),
        admissible,
        Some(threshold),
        Some(s.clone()),
    );
    if s <= &q_int(1) {
        r.note = Some("coefficient not above 1: outside the proved range".into());
    }
    r
}

/// The five-term rational condition, checked pointwise over ordered pairs.
pub fn check_chka(space: &FiniteSpace, map: &MapTable, lambdas: &[Q; 5], s: &Q) -> Result<ContractionReport> {
    for (k, l) in lambdas.iter().enumerate() {
        if l < &Q::zero() {
            return Err(Error::Parameter(format!(
                "lambda{} = {} must be nonnegative",
                k + 1,
                fmt_q(l)
            )));
        }
    }
    let [l1, l2, l3, l4, l5] = lambdas;
    let n = space.len();
    let one = q_int(1);

    let mut pointwise_ok = true;
    let mut pointwise_witness = None;
    'scan: for x in 0..n {
        for y in 0..n {
            let tx = map.apply(x);
            let ty = map.apply(y);
            let lhs = space.p(tx, ty);
            let base = space.p(x, y);
            let denom = &one + base;
            let rhs = l1 * base
                + l2 * (space.p(x, tx) * space.p(y, ty)) / &denom
                + l3 * (space.p(x, ty) * space.p(y, tx)) / &denom
                + l4 * (space.p(x, tx) * space.p(x, ty)) / &denom
                + l5 * (space.p(y, ty) * space.p(y, tx)) / &denom;
            if lhs > &rhs {
                pointwise_ok = false;
                pointwise_witness =
                    Some(vec![space.label(x).to_string(), space.label(y).to_string()]);
                break 'scan;
            }
        }
    }

    let two = q_int(2);
    let weighted_sum = l1 + l2 + &two * s * l3 + s * l4 + s * l5;
    let sum_ok = weighted_sum < one;

    let rate_numer = &two * l1 + &two * s * l3 + s * l4 + s * l5;
    let rate_denom = &two - &two * l2 - &two * s * l3 - s * l4 - s * l5;
    let derived_rate = (rate_denom > Q::zero()).then(|| rate_numer / rate_denom);

    let admissible = pointwise_ok && sum_ok;
    let mut r = report(Condition::ChKa, None, None, admissible, Some(one), Some(s.clone()));
    r.witness = pointwise_witness.clone();
    r.chka = Some(ChkaDetail {
        lambdas: lambdas.to_vec(),
        weighted_sum,
        sum_ok,
        pointwise_ok,
        pointwise_witness,
        derived_rate,
    });
    if !sum_ok {
        r.note = Some("weighted parameter sum is not below 1".into());
    }
    Ok(r)
}

/// Minimal L with p(Tx,T2x) <= L p(x,Tx) over single points.
pub fn check_eq211(space: &FiniteSpace, map: &MapTable) -> Result<ContractionReport> {
    let n = space.len();
    let mut best = Q::zero();
    let mut witness: Option<usize> = None;
    for x in 0..n {
        let tx = map.apply(x);
        let t2x = map.apply(tx);
        let numer = space.p(tx, t2x);
        let denom = space.p(x, tx);
        if denom.is_zero() {
            if !numer.is_zero() {
                // p(x,Tx) = 0 forces Tx = x and hence T2x = Tx on a space
                // satisfying pm1/pm2; a positive numerator means the table
                // is corrupt.
                return Err(Error::AxiomViolation(format!(
                    "p(x,Tx) = 0 with p(Tx,T2x) > 0 at x = {}",
                    space.label(x)
                )));
            }
            continue;
        }
        let ratio = numer / denom;
        if ratio > best {
            best = ratio;
            witness = Some(x);
        }
    }
    let admissible = best < q_int(1);
    Ok(report(
        Condition::Eq211,
        Some(best),
        witness.map(|x| vec![space.label(x).to_string()]),
        admissible,
        Some(q_int(1)),
        None,
    ))
}

// ---------------------------------------------------------------------------
// Sampled variants over function-backed spaces
// ---------------------------------------------------------------------------

/// Grid-sampled analog of a ratio-maximized condition; the constant is a
/// lower bound of the true supremum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledContractionReport {
    pub condition: Condition,
    pub basis: CheckBasis,
    pub minimal: Option<f64>,
    pub witness: Option<Vec<f64>>,
    pub admissible: bool,
    pub threshold: Option<f64>,
    pub s_used: Option<f64>,
    pub note: String,
}

fn sampled_max<F>(pts: &[f64], mut terms: F) -> (f64, Option<(f64, f64)>, bool)
where
    F: FnMut(f64, f64) -> (f64, f64),
{
    let mut best = 0.0f64;
    let mut witness = None;
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i..] {
            let (numer, denom) = terms(x, y);
            if denom == 0.0 {
                if numer > 0.0 {
                    return (best, witness, false);
                }
                continue;
            }
            let ratio = numer / denom;
            if ratio > best {
                best = ratio;
                witness = Some((x, y));
            }
        }
    }
    (best, witness, true)
}

const SAMPLED_NOTE: &str = "sampled lower bound of the true supremum";

pub fn check_banach_sampled(space: &FuncSpace, map: &MapFormula) -> SampledContractionReport {
    let pts = space.grid_points();
    let (best, w, finite) =
        sampled_max(&pts, |x, y| (space.p(map.apply(x), map.apply(y)), space.p(x, y)));
    SampledContractionReport {
        condition: Condition::Banach,
        basis: CheckBasis::Sampled,
        minimal: finite.then_some(best),
        witness: w.map(|(x, y)| vec![x, y]),
        admissible: finite && best < 1.0,
        threshold: Some(1.0),
        s_used: None,
        note: SAMPLED_NOTE.into(),
    }
}

pub fn check_chatterjea_sampled(
    space: &FuncSpace,
    map: &MapFormula,
    s: f64,
) -> SampledContractionReport {
    let pts = space.grid_points();
    let (best, w, finite) = sampled_max(&pts, |x, y| {
        (space.p(map.apply(x), map.apply(y)), space.p(x, map.apply(y)) + space.p(y, map.apply(x)))
    });
    let threshold = 1.0 / (s * s);
    SampledContractionReport {
        condition: Condition::Chatterjea,
        basis: CheckBasis::Sampled,
        minimal: finite.then_some(best),
        witness: w.map(|(x, y)| vec![x, y]),
        admissible: finite && s >= 2.0 && best < threshold,
        threshold: Some(threshold),
        s_used: Some(s),
        note: SAMPLED_NOTE.into(),
    }
}

pub fn check_ch2_sampled(space: &FuncSpace, map: &MapFormula, s: f64) -> SampledContractionReport {
    let pts = space.grid_points();
    let (best, w, finite) = sampled_max(&pts, |x, y| {
        let m = space
            .p(x, y)
            .max(space.p(x, map.apply(y)))
            .max(space.p(y, map.apply(x)));
        (space.p(map.apply(x), map.apply(y)), m)
    });
    let threshold = 1.0 / s;
    SampledContractionReport {
        condition: Condition::Ch2,
        basis: CheckBasis::Sampled,
        minimal: finite.then_some(best),
        witness: w.map(|(x, y)| vec![x, y]),
        admissible: finite && s > 1.0 && best < threshold,
        threshold: Some(threshold),
        s_used: Some(s),
        note: SAMPLED_NOTE.into(),
    }
}

pub fn check_eq211_sampled(space: &FuncSpace, map: &MapFormula) -> SampledContractionReport {
    let pts = space.grid_points();
    let mut best = 0.0f64;
    let mut witness = None;
    for &x in &pts {
        let tx = map.apply(x);
        let t2x = map.apply(tx);
        let denom = space.p(x, tx);
        if denom == 0.0 {
            continue;
        }
        let ratio = space.p(tx, t2x) / denom;
        if ratio > best {
            best = ratio;
            witness = Some(x);
        }
    }
    SampledContractionReport {
        condition: Condition::Eq211,
        basis: CheckBasis::Sampled,
        minimal: Some(best),
        witness: witness.map(|x| vec![x]),
        admissible: best < 1.0,
        threshold: Some(1.0),
        s_used: None,
        note: SAMPLED_NOTE.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{example1_map, example1_space};
    use crate::ratio::q;
    use crate::space::space_from_ratios;

    fn example1() -> (FiniteSpace, MapTable) {
        let space = example1_space();
        let map = example1_map(&space).unwrap();
        (space, map)
    }

    fn chain3() -> (FiniteSpace, MapTable) {
        let space = space_from_ratios(
            &["a", "b", "c"],
            &[
                &[(0, 1), (1, 1), (2, 1)],
                &[(1, 1), (0, 1), (1, 1)],
                &[(2, 1), (1, 1), (0, 1)],
            ],
            (1, 1),
        )
        .unwrap();
        let map = MapTable::new(vec![0, 0, 1], &space).unwrap();
        (space, map)
    }

    #[test]
    fn banach_example1_three_quarters() {
        let (space, map) = example1();
        let rep = check_banach(&space, &map);
        assert_eq!(rep.minimal, Some(q(3, 4)));
        assert_eq!(rep.witness, Some(vec!["2".into(), "3".into()]));
        assert!(rep.admissible);
        // tightness: the witness attains the constant exactly
        let (i, j) = (1, 2);
        let attained = space.p(map.apply(i), map.apply(j)) / space.p(i, j);
        assert_eq!(attained, q(3, 4));
    }

    #[test]
    fn banach_identity_not_admissible() {
        let space = example1_space();
        let id = MapTable::new(vec![0, 1, 2, 3], &space).unwrap();
        let rep = check_banach(&space, &id);
        assert_eq!(rep.minimal, Some(q_int(1)));
        assert!(!rep.admissible);
    }

    #[test]
    fn banach_constant_map_to_zero_self_distance() {
        let (space, _) = example1();
        let constant = MapTable::new(vec![0, 0, 0, 0], &space).unwrap();
        let rep = check_banach(&space, &constant);
        assert_eq!(rep.minimal, Some(q_int(0)));
        assert!(rep.admissible);
    }

    #[test]
    fn banach_no_finite_constant() {
        // p(a,a) = 0 but p(Ta,Ta) = p(b,b) = 1
        let space = space_from_ratios(
            &["a", "b"],
            &[&[(0, 1), (1, 1)], &[(1, 1), (1, 1)]],
            (1, 1),
        )
        .unwrap();
        let map = MapTable::new(vec![1, 1], &space).unwrap();
        let rep = check_banach(&space, &map);
        assert_eq!(rep.minimal, None);
        assert!(!rep.admissible);
        assert!(rep.note.unwrap().contains("no finite"));
    }

    #[test]
    fn power_chain_least_is_2_with_zero() {
        let (space, map) = chain3();
        // one-step constant is 1 at the pair (b,c)
        let one_step = check_banach(&space, &map);
        assert_eq!(one_step.minimal, Some(q_int(1)));
        let rep = check_power_banach(&space, &map, 4).unwrap();
        let least = rep.least.unwrap();
        assert_eq!(least.n, 2);
        assert_eq!(least.constant, q_int(0));
    }

    #[test]
    fn power_example1_second_power_collapses() {
        let (space, map) = example1();
        let rep = check_power_banach(&space, &map, 3).unwrap();
        let least = rep.least.unwrap();
        assert_eq!(least.n, 2);
        assert_eq!(least.constant, q_int(0));
        assert!(least.constant <= q(9, 16)); // submultiplicativity bound (3/4)^2
    }

    #[test]
    fn power_identity_never_admissible() {
        let space = example1_space();
        let id = MapTable::new(vec![0, 1, 2, 3], &space).unwrap();
        let rep = check_power_banach(&space, &id, 6).unwrap();
        assert!(rep.least.is_none());
        for (_, k) in &rep.constants {
            assert_eq!(k.as_deref(), Some("1"));
        }
    }

    #[test]
    fn power_submultiplicative_on_example1() {
        let (space, map) = example1();
        let ks = power_constants(&space, &map, 6);
        let k = |n: u32| -> Option<Q> {
            if n == 1 {
                check_banach(&space, &map).minimal
            } else {
                ks.iter().find(|(m, _)| *m == n).and_then(|(_, k)| k.clone())
            }
        };
        for m in 1..=3u32 {
            for n in 1..=3u32 {
                if let (Some(kmn), Some(km), Some(kn)) = (k(m + n), k(m), k(n)) {
                    assert!(kmn <= km * kn, "K_{} > K_{} * K_{}", m + n, m, n);
                }
            }
        }
    }

    #[test]
    fn chatterjea_example1_one_third() {
        let (space, map) = example1();
        let rep = check_chatterjea(&space, &map, &q_int(4));
        assert_eq!(rep.minimal, Some(q(1, 3)));
        assert_eq!(rep.witness, Some(vec!["2".into(), "3".into()]));
        // not admissible at s = 4: 1/3 >= 1/16
        assert!(!rep.admissible);
        assert_eq!(rep.threshold, Some(q(1, 16)));
        assert_eq!(rep.sharp_s, Some(true)); // 16 >= 2
    }

    #[test]
    fn chatterjea_below_2_is_not_admissible_even_with_small_constant() {
        let (space, map) = example1();
        let rep = check_chatterjea(&space, &map, &q(15, 11));
        assert_eq!(rep.minimal, Some(q(1, 3)));
        // 1/3 < 121/225 but s < 2
        assert!(rep.minimal.clone().unwrap() < rep.threshold.clone().unwrap());
        assert!(!rep.admissible);
        assert_eq!(rep.sharp_s, Some(false)); // (15/11)^2 < 2
    }

    #[test]
    fn chatterjea_constant_map_admissible_for_s_2() {
        let (space, _) = example1();
        let constant = MapTable::new(vec![0, 0, 0, 0], &space).unwrap();
        let rep = check_chatterjea(&space, &constant, &q_int(2));
        assert_eq!(rep.minimal, Some(q_int(0)));
        assert!(rep.admissible);
    }

    #[test]
    fn ch2_example1_one_half() {
        let (space, map) = example1();
        let rep = check_ch2(&space, &map, &q(15, 11));
        assert_eq!(rep.minimal, Some(q(1, 2)));
        assert_eq!(rep.witness, Some(vec!["3".into(), "3".into()]));
        // 1/2 < 11/15
        assert!(rep.admissible);
    }

    #[test]
    fn ch2_identity_not_admissible() {
        let space = example1_space();
        let id = MapTable::new(vec![0, 1, 2, 3], &space).unwrap();
        let rep = check_ch2(&space, &id, &q(3, 2));
        assert_eq!(rep.minimal, Some(q_int(1)));
        assert!(!rep.admissible);
    }

    #[test]
    fn ch2_never_exceeds_banach() {
        let (space, map) = example1();
        let b = check_banach(&space, &map).minimal.unwrap();
        let c = check_ch2(&space, &map, &q_int(2)).minimal.unwrap();
        assert!(c <= b);
    }

    #[test]
    fn chka_example1_first_parameter_three_quarters() {
        let (space, map) = example1();
        let lams = [q(3, 4), q_int(0), q_int(0), q_int(0), q_int(0)];
        let rep = check_chka(&space, &map, &lams, &q(15, 11)).unwrap();
        assert!(rep.admissible);
        let d = rep.chka.unwrap();
        assert!(d.pointwise_ok);
        assert!(d.sum_ok);
        assert_eq!(d.weighted_sum, q(3, 4));
        assert_eq!(d.derived_rate, Some(q(3, 4)));
    }

    #[test]
    fn chka_rate_reduces_to_first_parameter() {
        let (space, _) = example1();
        let constant = MapTable::new(vec![0, 0, 0, 0], &space).unwrap();
        let lams = [q(1, 10), q_int(0), q_int(0), q_int(0), q_int(0)];
        let rep = check_chka(&space, &constant, &lams, &q_int(2)).unwrap();
        assert_eq!(rep.chka.unwrap().derived_rate, Some(q(1, 10)));
    }

    #[test]
    fn chka_rate_zero_when_only_second_parameter() {
        let (space, map) = example1();
        let lams = [q_int(0), q(9, 10), q_int(0), q_int(0), q_int(0)];
        let rep = check_chka(&space, &map, &lams, &q_int(2)).unwrap();
        let d = rep.chka.unwrap();
        assert_eq!(d.weighted_sum, q(9, 10));
        assert!(d.sum_ok);
        assert_eq!(d.derived_rate, Some(q_int(0)));
    }

    #[test]
    fn chka_sum_violation_still_checks_pointwise() {
        let (space, map) = example1();
        let lams = [q(3, 4), q(1, 2), q_int(0), q_int(0), q_int(0)];
        let rep = check_chka(&space, &map, &lams, &q_int(2)).unwrap();
        assert!(!rep.admissible);
        let d = rep.chka.unwrap();
        assert!(!d.sum_ok);
        assert!(d.pointwise_ok); // larger right side than the pure 3/4 case
        assert!(rep.note.unwrap().contains("sum"));
    }

    #[test]
    fn chka_negative_parameter_rejected() {
        let (space, map) = example1();
        let lams = [q(-1, 4), q_int(0), q_int(0), q_int(0), q_int(0)];
        assert!(check_chka(&space, &map, &lams, &q_int(2)).is_err());
    }

    #[test]
    fn chka_lambda1_only_matches_banach_verdict() {
        // equivalence of the reduction: admissible iff the one-step
        // constant is <= lambda1 with lambda1 < 1
        let (space, map) = example1();
        let banach = check_banach(&space, &map).minimal.unwrap();
        for l1 in [q(1, 2), q(3, 4), q(7, 8), q(15, 16)] {
            let rep = check_chka(
                &space,
                &map,
                &[l1.clone(), q_int(0), q_int(0), q_int(0), q_int(0)],
                &q_int(2),
            )
            .unwrap();
            let expected = banach <= l1 && l1 < q_int(1);
            assert_eq!(rep.admissible, expected, "lambda1 = {}", fmt_q(&l1));
        }
    }

    #[test]
    fn eq211_example1_three_quarters_at_3() {
        let (space, map) = example1();
        let rep = check_eq211(&space, &map).unwrap();
        assert_eq!(rep.minimal, Some(q(3, 4)));
        assert_eq!(rep.witness, Some(vec!["3".into()]));
        assert!(rep.admissible);
    }

    #[test]
    fn eq211_constant_and_identity() {
        let (space, _) = example1();
        let constant = MapTable::new(vec![0, 0, 0, 0], &space).unwrap();
        assert_eq!(check_eq211(&space, &constant).unwrap().minimal, Some(q_int(0)));
        // identity on a zero-self-distance space: every point is excluded
        // as 0/0 and the constant is 0 by convention
        let (zero_space, _) = chain3();
        let id = MapTable::new(vec![0, 1, 2], &zero_space).unwrap();
        let rep = check_eq211(&zero_space, &id).unwrap();
        assert_eq!(rep.minimal, Some(q_int(0)));
        assert!(rep.witness.is_none());
        // identity on a positive-self-distance space is pinned at 1 instead
        let id4 = MapTable::new(vec![0, 1, 2, 3], &space).unwrap();
        assert_eq!(check_eq211(&space, &id4).unwrap().minimal, Some(q_int(1)));
    }

    #[test]
    fn eq211_detects_corrupt_data() {
        // pm1/pm2-violating table: p(a,b) = 0 with distinct a, b and
        // p(b,b) > 0, so p(a,Ta) = 0 but p(Ta,T2a) > 0 for T: a->b, b->b
        let space = space_from_ratios(
            &["a", "b"],
            &[&[(0, 1), (0, 1)], &[(0, 1), (1, 1)]],
            (1, 1),
        )
        .unwrap();
        let map = MapTable::new(vec![1, 1], &space).unwrap();
        assert!(matches!(check_eq211(&space, &map), Err(Error::AxiomViolation(_))));
    }

    #[test]
    fn sampled_banach_on_squared_interval() {
        let space = FuncSpace::new(0.0, 1.0, crate::space::PFormula::AbsDiffPowK { k: 2.0 }, 65)
            .unwrap();
        let map = MapFormula::ExpShift { lambda: 2.0 };
        let rep = check_banach_sampled(&space, &map);
        let sampled = rep.minimal.unwrap();
        let analytic = (-2.0f64).exp();
        assert!(sampled <= analytic + 1e-12, "sampled {sampled} vs analytic {analytic}");
        assert!(sampled > 0.8 * analytic);
        assert!(rep.admissible);
        assert_eq!(rep.note, SAMPLED_NOTE);
    }
}
