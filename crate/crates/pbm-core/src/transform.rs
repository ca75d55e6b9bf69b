//! The weighted orbit-sum transform and its series variant.
//!
//! Given a power contraction p(T^n x, T^n y) <= K p(x,y) with 0 < K < 1 and
//! a weight 1 < lambda < K^(-1/n), the finite sum
//!
//!     p'(x,y) = sum_{i=0}^{n-1} lambda^i p(T^i x, T^i y)
//!
//! is again a partial b-metric with the base coefficient, and T becomes a
//! one-step contraction for p' with constant 1/lambda. The infinite series
//! h(x,y) = sum_{i>=0} lambda^i p(T^i x, T^i y), when it converges, is
//! sandwiched between p' and p'/(1 - lambda^n K).

use crate::error::{Error, Result};
use crate::ratio::{fmt_q, q_int, qser, Q};
use crate::selfmap::MapTable;
use crate::space::FiniteSpace;
use num::Zero;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum TransformMode {
    FiniteSum,
    /// Series summed exactly via orbit-pair cycle detection; the cycle part
    /// must have zero p-contribution or the series diverges.
    Series,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSpace {
    pub base: FiniteSpace,
    pub map: MapTable,
    pub n: u32,
    pub k_cert: Q,
    pub lambda: Q,
    pub mode: TransformMode,
    /// The transformed table, declared at the base coefficient.
    pub prime: FiniteSpace,
    /// The exact series table in series mode.
    pub series: Option<FiniteSpace>,
}

fn short_hash(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    let digest = h.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl TransformedSpace {
    /// Space file plus a provenance block tying the table to its inputs.
    pub fn to_json_value(&self) -> serde_json::Value {
        let table = self.series.as_ref().unwrap_or(&self.prime);
        let mut v = table.to_json_value();
        let map_json = crate::selfmap::map_to_json(&self.base, &self.map);
        v["provenance"] = serde_json::json!({
            "base_hash": short_hash(&self.base.to_json()),
            "map_hash": short_hash(&map_json),
            "n": self.n,
            "K": fmt_q(&self.k_cert),
            "lambda": fmt_q(&self.lambda),
            "mode": match self.mode {
                TransformMode::FiniteSum => "finite-sum",
                TransformMode::Series => "series",
            },
        });
        v
    }
}

fn validate_params(n: u32, k: &Q, lambda: &Q) -> Result<()> {
    if n < 2 {
        return Err(Error::Parameter("transform needs a power n > 1".into()));
    }
    if k <= &Q::zero() || k >= &q_int(1) {
        return Err(Error::Parameter(format!(
            "power certificate K = {} must lie in (0, 1)",
            fmt_q(k)
        )));
    }
    if lambda <= &q_int(1) {
        return Err(Error::Parameter(format!(
            "weight lambda = {} must exceed 1",
            fmt_q(lambda)
        )));
    }
    // lambda < K^(-1/n), checked exactly as lambda^n K < 1.
    if lambda.pow(n as i32) * k >= q_int(1) {
        return Err(Error::Parameter(format!(
            "weight lambda = {} is too large: lambda^{} * K >= 1",
            fmt_q(lambda),
            n
        )));
    }
    Ok(())
}

/// Check p(T^n x, T^n y) <= K p(x,y) on all pairs (the build precondition).
pub fn power_condition_holds(
    space: &FiniteSpace,
    map: &MapTable,
    n: u32,
    k: &Q,
) -> Option<(usize, usize)> {
    let tn = map.power(n);
    let m = space.len();
    for i in 0..m {
        for j in i..m {
            if space.p(tn.apply(i), tn.apply(j)) > &(k * space.p(i, j)) {
                return Some((i, j));
            }
        }
    }
    None
}

fn weighted_orbit_table(space: &FiniteSpace, map: &MapTable, n: u32, lambda: &Q) -> Vec<Vec<Q>> {
    let m = space.len();
    let mut rows = vec![vec![Q::zero(); m]; m];
    for i in 0..m {
        for j in i..m {
            let mut acc = Q::zero();
            let mut weight = q_int(1);
            let mut a = i;
            let mut b = j;
            for step in 0..n {
                if step > 0 {
                    weight *= lambda;
                    a = map.apply(a);
                    b = map.apply(b);
                }
                acc += &weight * space.p(a, b);
            }
            rows[i][j] = acc.clone();
            rows[j][i] = acc;
        }
    }
    rows
}

/// Build the finite-sum transform. Errors on bad parameters or when the
/// power condition does not hold at K.
pub fn build_pprime(
    space: &FiniteSpace,
    map: &MapTable,
    n: u32,
    k: &Q,
    lambda: &Q,
) -> Result<TransformedSpace> {
    validate_params(n, k, lambda)?;
    if let Some((i, j)) = power_condition_holds(space, map, n, k) {
        return Err(Error::Precondition(format!(
            "power condition fails at pair ({},{}): p(T^{}x, T^{}y) > K p(x,y)",
            space.label(i),
            space.label(j),
            n,
            n
        )));
    }
    let rows = weighted_orbit_table(space, map, n, lambda);
    let prime =
        FiniteSpace::new(space.labels().to_vec(), rows, space.declared_s().clone())?;
    Ok(TransformedSpace {
        base: space.clone(),
        map: map.clone(),
        n,
        k_cert: k.clone(),
        lambda: lambda.clone(),
        mode: TransformMode::FiniteSum,
        prime,
        series: None,
    })
}

/// Entrywise contraction and identity verification on a built transform.
/// A failure here falsifies the construction and should never occur when
/// the build preconditions held.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformContractionReport {
    pub contraction_ok: bool,
    pub contraction_witness: Option<Vec<String>>,
    /// p'(Tx,Ty) = (1/lambda)(p'(x,y) - p(x,y)) + lambda^(n-1) p(T^n x, T^n y),
    /// exactly, on every pair.
    pub identity_ok: bool,
    pub identity_witness: Option<Vec<String>>,
    pub axioms_at_base_s: bool,
}

pub fn verify_transform_contraction(t: &TransformedSpace) -> TransformContractionReport {
    let m = t.base.len();
    let inv_lambda = q_int(1) / &t.lambda;
    let tn = t.map.power(t.n);
    let lambda_nm1 = t.lambda.pow(t.n as i32 - 1);

    let mut contraction_ok = true;
    let mut contraction_witness = None;
    let mut identity_ok = true;
    let mut identity_witness = None;
    for i in 0..m {
        for j in i..m {
            let ti = t.map.apply(i);
            let tj = t.map.apply(j);
            let lhs = t.prime.p(ti, tj);
            if contraction_ok && lhs > &(&inv_lambda * t.prime.p(i, j)) {
                contraction_ok = false;
                contraction_witness =
                    Some(vec![t.base.label(i).to_string(), t.base.label(j).to_string()]);
            }
            let rhs = &inv_lambda * (t.prime.p(i, j) - t.base.p(i, j))
                + &lambda_nm1 * t.base.p(tn.apply(i), tn.apply(j));
            if identity_ok && lhs != &rhs {
                identity_ok = false;
                identity_witness =
                    Some(vec![t.base.label(i).to_string(), t.base.label(j).to_string()]);
            }
        }
    }

    let axioms_at_base_s = t.prime.verify_axioms(t.base.declared_s()).all_pass();
    TransformContractionReport {
        contraction_ok,
        contraction_witness,
        identity_ok,
        identity_witness,
        axioms_at_base_s,
    }
}

/// Exact series sum for one orbit pair, by cycle detection. The pair orbit
/// (T^i x, T^i y) is eventually periodic; the series converges for
/// lambda > 1 exactly when every term on the cycle vanishes.
fn series_entry(
    space: &FiniteSpace,
    map: &MapTable,
    lambda: &Q,
    i: usize,
    j: usize,
) -> Result<Q> {
    let m = space.len();
    let mut seen = vec![usize::MAX; m * m];
    let mut acc = Q::zero();
    let mut weight = q_int(1);
    let (mut a, mut b) = (i, j);
    let mut step = 0usize;
    loop {
        let key = a * m + b;
        if seen[key] != usize::MAX {
            // entered the cycle; all remaining terms repeat points we have
            // already visited starting at seen[key]
            break;
        }
        seen[key] = step;
        if step > 0 {
            weight *= lambda;
        }
        acc += &weight * space.p(a, b);
        a = map.apply(a);
        b = map.apply(b);
        step += 1;
    }
    // check the cycle contributes nothing
    let (mut ca, mut cb) = (a, b);
    loop {
        if !space.p(ca, cb).is_zero() {
            return Err(Error::Divergence(format!(
                "series term at pair ({},{}) stays positive on the orbit cycle through ({},{})",
                space.label(i),
                space.label(j),
                space.label(ca),
                space.label(cb)
            )));
        }
        ca = map.apply(ca);
        cb = map.apply(cb);
        if (ca, cb) == (a, b) {
            break;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    /// p <= p' <= h <= p' / (1 - lambda^n K), entrywise.
    pub holds: bool,
    pub witness: Option<Vec<String>>,
    #[serde(with = "qser")]
    pub upper_factor: Q,
}

/// Build the exact series table h alongside p' and verify the sandwich.
/// `tail_tol` is kept for the truncating fallback; the finite-space path
/// sums exactly, so the recorded truncation error is zero.
pub fn build_h_series(
    space: &FiniteSpace,
    map: &MapTable,
    n: u32,
    k: &Q,
    lambda: &Q,
    _tail_tol: f64,
) -> Result<(TransformedSpace, SandwichReport)> {
    let mut t = build_pprime(space, map, n, k, lambda)?;
    let m = space.len();
    let mut rows = vec![vec![Q::zero(); m]; m];
    for i in 0..m {
        for j in i..m {
            let v = series_entry(space, map, lambda, i, j)?;
            rows[i][j] = v.clone();
            rows[j][i] = v;
        }
    }
    let h = FiniteSpace::new(space.labels().to_vec(), rows, space.declared_s().clone())?;

    let upper_factor = q_int(1) / (q_int(1) - lambda.pow(n as i32) * k);
    let mut holds = true;
    let mut witness = None;
    for i in 0..m {
        for j in i..m {
            let ok = space.p(i, j) <= t.prime.p(i, j)
                && t.prime.p(i, j) <= h.p(i, j)
                && h.p(i, j) <= &(&upper_factor * t.prime.p(i, j));
            if !ok {
                holds = false;
                witness = Some(vec![space.label(i).to_string(), space.label(j).to_string()]);
            }
        }
    }
    t.mode = TransformMode::Series;
    t.series = Some(h);
    Ok((t, SandwichReport { holds, witness, upper_factor }))
}

// ---------------------------------------------------------------------------
// Convergence transfer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum TransferVerdict {
    /// The sequence converges to the same limit under p', with zero
    /// self-distance there.
    Transfers,
    /// The hypothesis is unmet (no zero-self-distance limit); nothing is
    /// claimed either way.
    Inconclusive { reason: String },
    /// The limit exists under the base metric but p' gives it positive
    /// self-distance; transfer fails.
    Fails { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub verdict: TransferVerdict,
    pub limit: Option<String>,
    /// Whether zero-self-distance points keep zero self-distance along the
    /// whole orbit prefix used by the transform; this is the finite-space
    /// content of uniform continuity and it forces a transfer.
    pub zero_preserving_map: bool,
}

/// Desk-scale convergence transfer: a sequence that is eventually constant
/// at a point of zero self-distance must converge under p' to the same
/// point with zero p'-self-distance.
pub fn check_convergence_transfer(
    space: &FiniteSpace,
    map: &MapTable,
    t: &TransformedSpace,
    seq: &[usize],
) -> TransferReport {
    let zero_preserving_map = (0..space.len()).all(|x| {
        !space.p(x, x).is_zero() || space.p(map.apply(x), map.apply(x)).is_zero()
    });

    let Some(&last) = seq.last() else {
        return TransferReport {
            verdict: TransferVerdict::Inconclusive { reason: "empty sequence".into() },
            limit: None,
            zero_preserving_map,
        };
    };
    // eventual constancy: the recorded prefix must end in at least two
    // copies of the limit to witness settling
    let tail_start = seq.iter().rposition(|&x| x != last).map(|p| p + 1).unwrap_or(0);
    if seq.len() - tail_start < 2 {
        return TransferReport {
            verdict: TransferVerdict::Inconclusive {
                reason: "prefix too short to witness settling".into(),
            },
            limit: None,
            zero_preserving_map,
        };
    }
    if !space.p(last, last).is_zero() {
        return TransferReport {
            verdict: TransferVerdict::Inconclusive {
                reason: format!(
                    "limit {} has positive self-distance {} under the base metric",
                    space.label(last),
                    fmt_q(space.p(last, last))
                ),
            },
            limit: Some(space.label(last).to_string()),
            zero_preserving_map,
        };
    }
    let prime_self = t.prime.p(last, last);
    if prime_self.is_zero() {
        TransferReport {
            verdict: TransferVerdict::Transfers,
            limit: Some(space.label(last).to_string()),
            zero_preserving_map,
        }
    } else {
        TransferReport {
            verdict: TransferVerdict::Fails {
                reason: format!(
                    "p'({0},{0}) = {1} > 0",
                    space.label(last),
                    fmt_q(prime_self)
                ),
            },
            limit: Some(space.label(last).to_string()),
            zero_preserving_map,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{example1_map, example1_space};
    use crate::picard::iterate;
    use crate::ratio::q;
    use crate::space::space_from_ratios;

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
    fn chain3_table_matches_hand_sums() {
        let (space, map) = chain3();
        let t = build_pprime(&space, &map, 2, &q(1, 4), &q(3, 2)).unwrap();
        let at = |a: &str, b: &str| {
            t.prime.p(t.prime.index_of(a).unwrap(), t.prime.index_of(b).unwrap()).clone()
        };
        assert_eq!(at("a", "b"), q_int(1)); // 1 + (3/2) * 0
        assert_eq!(at("b", "c"), q(5, 2)); // 1 + (3/2) * 1
        assert_eq!(at("a", "c"), q(7, 2)); // 2 + (3/2) * 1
        for x in ["a", "b", "c"] {
            assert_eq!(at(x, x), q_int(0));
        }
    }

    #[test]
    fn chain3_contraction_identity_and_axioms() {
        let (space, map) = chain3();
        let t = build_pprime(&space, &map, 2, &q(1, 4), &q(3, 2)).unwrap();
        let rep = verify_transform_contraction(&t);
        assert!(rep.contraction_ok, "p'(Tb,Tc) = 1 <= (2/3)(5/2)");
        assert!(rep.identity_ok);
        assert!(rep.axioms_at_base_s);
        // base values never exceed the transform
        for i in 0..space.len() {
            for j in 0..space.len() {
                assert!(space.p(i, j) <= t.prime.p(i, j));
            }
        }
    }

    #[test]
    fn parameter_validation() {
        let (space, map) = chain3();
        // lambda must exceed 1
        assert!(matches!(
            build_pprime(&space, &map, 2, &q(1, 4), &q_int(1)),
            Err(Error::Parameter(_))
        ));
        // lambda^n K >= 1
        assert!(matches!(
            build_pprime(&space, &map, 2, &q(1, 4), &q_int(2)),
            Err(Error::Parameter(_))
        ));
        // K outside (0,1)
        assert!(matches!(
            build_pprime(&space, &map, 2, &q_int(0), &q(3, 2)),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            build_pprime(&space, &map, 2, &q_int(1), &q(3, 2)),
            Err(Error::Parameter(_))
        ));
        // n must exceed 1
        assert!(matches!(
            build_pprime(&space, &map, 1, &q(1, 4), &q(3, 2)),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn power_precondition_enforced() {
        let (space, _) = chain3();
        let id = MapTable::new(vec![0, 1, 2], &space).unwrap();
        // identity has K_2 = 1, so no K in (0,1) certifies it
        assert!(matches!(
            build_pprime(&space, &id, 2, &q(1, 2), &q(5, 4)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn example1_second_power_build() {
        let space = example1_space();
        let map = example1_map(&space).unwrap();
        // measured power ratio is 0; any K in (0,1) certifies it
        let t = build_pprime(&space, &map, 2, &q(1, 100), &q_int(5)).unwrap();
        let rep = verify_transform_contraction(&t);
        assert!(rep.contraction_ok && rep.identity_ok && rep.axioms_at_base_s);
        let at = |a: &str, b: &str| {
            t.prime.p(t.prime.index_of(a).unwrap(), t.prime.index_of(b).unwrap()).clone()
        };
        assert_eq!(at("1", "2"), q_int(3)); // 3 + 5 * p(1,1)
        assert_eq!(at("3", "4"), q_int(15)); // 5 + 5 * p(2,2)
    }

    #[test]
    fn series_equals_finite_sum_on_collapsing_orbits() {
        let (space, map) = chain3();
        let (t, sandwich) = build_h_series(&space, &map, 2, &q(1, 4), &q(3, 2), 1e-12).unwrap();
        let h = t.series.as_ref().unwrap();
        assert_eq!(h, &t.prime, "orbits collapse from step 2, so h = p'");
        assert!(sandwich.holds);
        assert_eq!(sandwich.upper_factor, q(16, 7)); // 1 / (1 - (9/4)(1/4))
        // equivalence constants between p' and h are exactly (1, 1)
        let pair = crate::space::MetricPair::new(&t.prime, h).unwrap();
        let c = crate::space::equivalence_constants(&pair).constants.unwrap();
        assert_eq!((c.alpha, c.beta), (q_int(1), q_int(1)));
    }

    #[test]
    fn series_on_single_point_zero_space() {
        let space = space_from_ratios(&["a"], &[&[(0, 1)]], (1, 1)).unwrap();
        let map = MapTable::new(vec![0], &space).unwrap();
        let (t, sandwich) = build_h_series(&space, &map, 2, &q(1, 2), &q(5, 4), 1e-12).unwrap();
        assert_eq!(t.series.unwrap().p(0, 0), &q_int(0));
        assert!(sandwich.holds);
    }

    #[test]
    fn series_divergence_on_two_cycle() {
        let space = space_from_ratios(
            &["a", "b"],
            &[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]],
            (1, 1),
        )
        .unwrap();
        let swap = MapTable::new(vec![1, 0], &space).unwrap();
        let err = series_entry(&space, &swap, &q_int(2), 0, 1).unwrap_err();
        match err {
            Error::Divergence(msg) => assert!(msg.contains("(a,b)"), "{msg}"),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn transfer_on_picard_orbit() {
        let space = example1_space();
        let map = example1_map(&space).unwrap();
        let t = build_pprime(&space, &map, 2, &q(1, 100), &q_int(5)).unwrap();
        let orbit = iterate(&space, &map, 3, 16).orbit;
        let rep = check_convergence_transfer(&space, &map, &t, &orbit);
        assert!(matches!(rep.verdict, TransferVerdict::Transfers), "{rep:?}");
        assert_eq!(rep.limit.as_deref(), Some("1"));
    }

    #[test]
    fn transfer_constant_sequence_at_fixed_point() {
        let space = example1_space();
        let map = example1_map(&space).unwrap();
        let t = build_pprime(&space, &map, 2, &q(1, 100), &q_int(5)).unwrap();
        let rep = check_convergence_transfer(&space, &map, &t, &[0, 0, 0]);
        assert!(matches!(rep.verdict, TransferVerdict::Transfers));
    }

    #[test]
    fn transfer_inconclusive_on_positive_self_distance_limit() {
        let space = example1_space();
        let map = example1_map(&space).unwrap();
        let t = build_pprime(&space, &map, 2, &q(1, 100), &q_int(5)).unwrap();
        // settles at point 2, whose self-distance is 2 > 0
        let rep = check_convergence_transfer(&space, &map, &t, &[3, 1, 1]);
        assert!(matches!(rep.verdict, TransferVerdict::Inconclusive { .. }));
    }

    #[test]
    fn serialized_transform_carries_provenance() {
        let (space, map) = chain3();
        let t = build_pprime(&space, &map, 2, &q(1, 4), &q(3, 2)).unwrap();
        let v = t.to_json_value();
        assert_eq!(v["provenance"]["n"], 2);
        assert_eq!(v["provenance"]["lambda"], "3/2");
        assert!(v["points"].is_array());
    }
}
