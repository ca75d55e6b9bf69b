//! Fixed-point sets of powers: F(T) versus F(T^n).
//!
//! A map has the P property when F(T) = F(T^n) for every n. The inclusion
//! F(T) ⊆ F(T^n) always holds; the orbital condition
//! p(Tx, T^2 x) <= L p(x, Tx) with L < 1 forces the converse, so on any
//! instance where that condition holds with a constant below 1 a violation
//! of set equality is a falsification event.

use crate::contraction::check_eq211;
use crate::error::Result;
use crate::ratio::{q_int, qser_opt, Q};
use crate::selfmap::MapTable;
use crate::space::FiniteSpace;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PPropertyReport {
    pub f_t: Vec<String>,
    /// fixed points of T^n for n = 2..=n_max
    pub f_tn: Vec<(u32, Vec<String>)>,
    pub holds: bool,
    pub first_violation: Option<(u32, String)>,
    /// F(T) ⊆ F(T^n) for every scanned n; always expected to hold.
    pub subset_ok: bool,
    #[serde(with = "qser_opt")]
    pub eq211_lambda: Option<Q>,
    /// The orbital condition holds with constant < 1 and F(T) is nonempty,
    /// so set equality is forced.
    pub equality_forced: bool,
    /// equality_forced yet holds = false: an implementation or data bug.
    pub falsification: bool,
    pub note: Option<String>,
}

fn fixed_set(space: &FiniteSpace, map: &MapTable) -> Vec<usize> {
    (0..space.len()).filter(|&i| map.apply(i) == i).collect()
}

/// Compare F(T^n) against F(T) for n up to n_max by iterated composition.
pub fn p_property(space: &FiniteSpace, map: &MapTable, n_max: u32) -> Result<PPropertyReport> {
    let n_max = n_max.max(2);
    let eq211 = check_eq211(space, map)?;
    let f_t = fixed_set(space, map);

    let mut holds = true;
    let mut first_violation = None;
    let mut subset_ok = true;
    let mut f_tn = Vec::new();
    let mut comp = map.clone();
    for n in 2..=n_max {
        comp = map.compose(&comp);
        let f_n = fixed_set(space, &comp);
        if holds && f_n != f_t {
            holds = false;
            let offender = f_n
                .iter()
                .find(|i| !f_t.contains(i))
                .or_else(|| f_t.iter().find(|i| !f_n.contains(i)))
                .copied()
                .unwrap_or(0);
            first_violation = Some((n, space.label(offender).to_string()));
        }
        if !f_t.iter().all(|i| f_n.contains(i)) {
            subset_ok = false;
        }
        f_tn.push((n, f_n.iter().map(|&i| space.label(i).to_string()).collect()));
    }

    let lambda = eq211.minimal.clone();
    let condition_below_one = lambda.as_ref().is_some_and(|l| l < &q_int(1));
    let equality_forced = condition_below_one && !f_t.is_empty();
    let falsification = equality_forced && !holds;
    let note = if f_t.is_empty() {
        Some("F(T) is empty: the orbital-condition implication is not tested".into())
    } else {
        None
    };

    Ok(PPropertyReport {
        f_t: f_t.iter().map(|&i| space.label(i).to_string()).collect(),
        f_tn,
        holds,
        first_violation,
        subset_ok,
        eq211_lambda: lambda,
        equality_forced,
        falsification,
        note,
    })
}
