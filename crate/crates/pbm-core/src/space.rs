//! Partial b-metric spaces and their structural axioms.
//!
//! A partial b-metric on a point set X is a symmetric nonnegative function
//! p with a relaxation coefficient s >= 1:
//!
//!   pm1  p(x,y) = p(x,x) = p(y,y)  implies  x = y
//!   pm2  p(x,x) <= p(x,y)
//!   pm3  p(x,y) = p(y,x)
//!   pm4  p(x,y) + p(z,z) <= s * (p(x,z) + p(z,y))
//!
//! Finite spaces are tabulated exactly over rationals; function-backed
//! spaces evaluate a closed form over f64 and are only ever checked on a
//! sampling grid (their verdicts are labeled "sampled", never "proved").

use crate::error::{Error, Result};
use crate::ratio::{fmt_q, parse_q, q_int, q_to_f64, qser, qser_opt, Q};
use num::Zero;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Finite spaces
// ---------------------------------------------------------------------------

/// A finite partial b-metric space: labeled points, an exact pairwise table
/// and a declared coefficient.
///
/// Construction enforces the structural part only (square shape, symmetry,
/// nonnegativity, s >= 1); the axioms pm1/pm2/pm4 are checked by
/// [`FiniteSpace::verify_axioms`], which is the whole point of the tool.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    table: Vec<Q>, // row-major n*n
    declared_s: Q,
}

impl FiniteSpace {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<Q>>, declared_s: Q) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Structural("empty point set".into()));
        }
        {
            let mut seen = std::collections::BTreeSet::new();
            for l in &labels {
                if !seen.insert(l) {
                    return Err(Error::Structural(format!("duplicate point label {l:?}")));
                }
            }
        }
        if rows.len() != n {
            return Err(Error::Structural(format!(
                "table has {} rows for {} points",
                rows.len(),
                n
            )));
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Structural(format!(
                    "row {} has {} entries for {} points",
                    i,
                    row.len(),
                    n
                )));
            }
            for v in row {
                if v < &Q::zero() {
                    return Err(Error::Structural(format!(
                        "negative entry {} in row {}",
                        fmt_q(v),
                        i
                    )));
                }
            }
            table.extend(row.iter().cloned());
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if table[i * n + j] != table[j * n + i] {
                    return Err(Error::Structural(format!(
                        "asymmetric table: p({},{}) = {} but p({},{}) = {}",
                        labels[i],
                        labels[j],
                        fmt_q(&table[i * n + j]),
                        labels[j],
                        labels[i],
                        fmt_q(&table[j * n + i]),
                    )));
                }
            }
        }
        if declared_s < q_int(1) {
            return Err(Error::Parameter(format!(
                "declared coefficient {} is below 1",
                fmt_q(&declared_s)
            )));
        }
        Ok(FiniteSpace { labels, table, declared_s })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty point sets
    }

    pub fn p(&self, i: usize, j: usize) -> &Q {
        &self.table[i * self.len() + j]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn declared_s(&self) -> &Q {
        &self.declared_s
    }

    /// Same point set, new declared coefficient.
    pub fn with_declared_s(&self, s: Q) -> Result<Self> {
        if s < q_int(1) {
            return Err(Error::Parameter(format!(
                "declared coefficient {} is below 1",
                fmt_q(&s)
            )));
        }
        Ok(FiniteSpace { labels: self.labels.clone(), table: self.table.clone(), declared_s: s })
    }

    // pm1 as the contrapositive: no distinct pair with a flat triple.
    fn check_pm1(&self) -> AxiomVerdict {
        let n = self.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.p(i, j) == self.p(i, i) && self.p(i, j) == self.p(j, j) {
                    return AxiomVerdict::fail(
                        vec![self.label(i), self.label(j)],
                        format!(
                            "distinct points with p(x,y) = p(x,x) = p(y,y) = {}",
                            fmt_q(self.p(i, j))
                        ),
                    );
                }
            }
        }
        AxiomVerdict::Pass
    }

    fn check_pm2(&self) -> AxiomVerdict {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                if self.p(i, i) > self.p(i, j) {
                    return AxiomVerdict::fail(
                        vec![self.label(i), self.label(j)],
                        format!(
                            "p(x,x) = {} > {} = p(x,y)",
                            fmt_q(self.p(i, i)),
                            fmt_q(self.p(i, j))
                        ),
                    );
                }
            }
        }
        AxiomVerdict::Pass
    }

    /// Check pm1..pm4 exhaustively against the given coefficient.
    ///
    /// pm3 and nonnegativity were already enforced at construction, so the
    /// pm3 verdict in the report is always a pass; it is kept so that the
    /// report covers all four axioms. A pm4 failure is witnessed by the
    /// extremal triple, the one needing the largest coefficient.
    pub fn verify_axioms(&self, s: &Q) -> AxiomReport {
        let pm1 = self.check_pm1();
        let pm2 = self.check_pm2();
        let pm3 = AxiomVerdict::Pass;

        let (pm4, minimal_s) = match self.minimal_coefficient_scan() {
            Ok(m) => {
                let pm4 = if &m.value <= s {
                    AxiomVerdict::Pass
                } else if let Some([x, y, z]) = m.witness {
                    let lhs = self.p(x, y) + self.p(z, z);
                    let rhs = s * (self.p(x, z) + self.p(z, y));
                    AxiomVerdict::fail(
                        vec![self.label(x), self.label(y), self.label(z)],
                        format!(
                            "p(x,y) + p(z,z) = {} > {} = s * (p(x,z) + p(z,y))",
                            fmt_q(&lhs),
                            fmt_q(&rhs)
                        ),
                    )
                } else {
                    // only reachable with s < 1, where the floor itself wins
                    AxiomVerdict::fail(vec![], "every admissible coefficient is at least 1".into())
                };
                (pm4, Some(m.value))
            }
            // a zero right side under a positive left side fails pm4 for
            // every coefficient (only possible when pm1/pm2 already fail)
            Err(Error::AxiomViolation(detail)) => {
                (AxiomVerdict::fail(vec![], detail), None)
            }
            Err(_) => unreachable!("coefficient scan only fails on axiom violations"),
        };

        let minimal_s = if pm1.passed() && pm2.passed() { minimal_s } else { None };
        AxiomReport {
            s_used: s.clone(),
            basis: CheckBasis::Exact,
            pm1,
            pm2,
            pm3,
            pm4,
            minimal_s,
        }
    }

    /// Least coefficient for which pm4 holds, floored at 1, with the
    /// extremal triple. Requires pm1-pm3.
    pub fn minimal_coefficient(&self) -> Result<MinimalS> {
        self.require_pm123()?;
        self.minimal_coefficient_scan()
    }

    fn minimal_coefficient_scan(&self) -> Result<MinimalS> {
        let n = self.len();
        let mut best = q_int(1);
        let mut witness: Option<[usize; 3]> = None;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let denom = self.p(x, z) + self.p(z, y);
                    let numer = self.p(x, y) + self.p(z, z);
                    if denom.is_zero() {
                        if !numer.is_zero() {
                            // p(x,z) = 0 forces x = z under pm1/pm2, so this
                            // cannot happen on a table that passed the check
                            // above; surface it as corrupted data.
                            return Err(Error::AxiomViolation(format!(
                                "zero denominator with positive numerator at triple ({},{},{})",
                                self.label(x),
                                self.label(y),
                                self.label(z)
                            )));
                        }
                        continue;
                    }
                    let ratio = numer / denom;
                    if ratio > best {
                        best = ratio;
                        witness = Some([x, y, z]);
                    }
                }
            }
        }
        Ok(MinimalS { value: best, witness })
    }

    /// Strong (max) variant of pm4: p(x,y) + p(z,z) <= max{p(x,z), p(z,y)}.
    /// A failure is witnessed by the extremal triple in the sense of the
    /// relaxed-triangle ratio, as for pm4.
    pub fn is_ultra(&self) -> Result<UltraReport> {
        self.require_pm123()?;
        let n = self.len();
        let mut worst: Option<(Q, [usize; 3])> = None;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let lhs = self.p(x, y) + self.p(z, z);
                    let rhs = std::cmp::max(self.p(x, z), self.p(z, y));
                    if &lhs > rhs {
                        let denom = self.p(x, z) + self.p(z, y);
                        // pm1/pm2 hold, so a violating triple has a positive
                        // sum denominator
                        let ratio = lhs / denom;
                        if worst.as_ref().is_none_or(|(r, _)| &ratio > r) {
                            worst = Some((ratio, [x, y, z]));
                        }
                    }
                }
            }
        }
        match worst {
            None => Ok(UltraReport { holds: true, witness: None }),
            Some((_, [x, y, z])) => {
                let lhs = self.p(x, y) + self.p(z, z);
                let rhs = std::cmp::max(self.p(x, z), self.p(z, y));
                Ok(UltraReport {
                    holds: false,
                    witness: Some(Witness {
                        points: vec![
                            self.label(x).into(),
                            self.label(y).into(),
                            self.label(z).into(),
                        ],
                        detail: format!(
                            "p(x,y) + p(z,z) = {} > {} = max(p(x,z), p(z,y))",
                            fmt_q(&lhs),
                            fmt_q(rhs)
                        ),
                    }),
                })
            }
        }
    }

    /// Membership in the open ball B'(center, eps) = {y : p(center,y) < eps + p(center,center)}.
    pub fn ball_contains(&self, center: usize, eps: &Q, y: usize) -> Result<bool> {
        if eps <= &Q::zero() {
            return Err(Error::Parameter(format!("ball radius {} must be positive", fmt_q(eps))));
        }
        Ok(self.p(center, y) < &(eps + self.p(center, center)))
    }

    fn require_pm123(&self) -> Result<()> {
        let pm1 = self.check_pm1();
        if !pm1.passed() {
            return Err(Error::AxiomViolation(format!("pm1 fails: {}", pm1.describe())));
        }
        let pm2 = self.check_pm2();
        if !pm2.passed() {
            return Err(Error::AxiomViolation(format!("pm2 fails: {}", pm2.describe())));
        }
        Ok(())
    }

    // -- file format -------------------------------------------------------

    pub fn to_json_value(&self) -> serde_json::Value {
        let n = self.len();
        let rows: Vec<Vec<String>> = (0..n)
            .map(|i| (0..n).map(|j| fmt_q(self.p(i, j))).collect())
            .collect();
        serde_json::json!({
            "points": self.labels,
            "p": rows,
            "declared_s": fmt_q(&self.declared_s),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }
}

/// Minimal pm4 coefficient with its extremal triple (absent when every
/// triple degenerates, e.g. a single point of zero self-distance).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalS {
    #[serde(with = "qser")]
    pub value: Q,
    pub witness: Option<[usize; 3]>,
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub points: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum AxiomVerdict {
    Pass,
    Fail { witness: Witness },
}

impl AxiomVerdict {
    fn fail(points: Vec<&str>, detail: String) -> Self {
        AxiomVerdict::Fail {
            witness: Witness { points: points.into_iter().map(String::from).collect(), detail },
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self, AxiomVerdict::Pass)
    }

    pub fn witness_points(&self) -> Option<&[String]> {
        match self {
            AxiomVerdict::Pass => None,
            AxiomVerdict::Fail { witness } => Some(&witness.points),
        }
    }

    fn describe(&self) -> String {
        match self {
            AxiomVerdict::Pass => "pass".into(),
            AxiomVerdict::Fail { witness } => {
                format!("{} at ({})", witness.detail, witness.points.join(","))
            }
        }
    }
}

/// Whether a verdict was established exhaustively or on a sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckBasis {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    #[serde(with = "qser")]
    pub s_used: Q,
    pub basis: CheckBasis,
    pub pm1: AxiomVerdict,
    pub pm2: AxiomVerdict,
    pub pm3: AxiomVerdict,
    pub pm4: AxiomVerdict,
    #[serde(with = "qser_opt")]
    pub minimal_s: Option<Q>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.pm1.passed() && self.pm2.passed() && self.pm3.passed() && self.pm4.passed()
    }
}

impl std::fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "axioms at s = {} ({})",
            fmt_q(&self.s_used),
            match self.basis {
                CheckBasis::Exact => "exact",
                CheckBasis::Sampled => "sampled",
            }
        )?;
        for (name, v) in
            [("pm1", &self.pm1), ("pm2", &self.pm2), ("pm3", &self.pm3), ("pm4", &self.pm4)]
        {
            writeln!(f, "  {name}: {}", v.describe())?;
        }
        if let Some(m) = &self.minimal_s {
            writeln!(f, "  minimal s: {}", fmt_q(m))?;
        }
        write!(f, "  overall: {}", if self.all_pass() { "pass" } else { "fail" })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UltraReport {
    pub holds: bool,
    pub witness: Option<Witness>,
}

// ---------------------------------------------------------------------------
// Metric pairs / equivalence
// ---------------------------------------------------------------------------

/// Two partial b-metrics over the same ordered point set.
pub struct MetricPair<'a> {
    pub first: &'a FiniteSpace,
    pub second: &'a FiniteSpace,
}

impl<'a> MetricPair<'a> {
    pub fn new(first: &'a FiniteSpace, second: &'a FiniteSpace) -> Result<Self> {
        if first.labels != second.labels {
            return Err(Error::Structural(
                "metric pair requires identical point sets in identical order".into(),
            ));
        }
        Ok(MetricPair { first, second })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// (alpha, beta) with alpha * p1 <= p2 <= beta * p1 on all pairs,
    /// None when no positive two-sided comparison exists.
    pub constants: Option<EquivalenceConstants>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceConstants {
    #[serde(with = "qser")]
    pub alpha: Q,
    #[serde(with = "qser")]
    pub beta: Q,
}

/// Tight two-sided comparison constants between the pair's metrics.
///
/// Pairs where both metrics vanish are skipped (both force x = y under
/// pm1/pm2); a pair where exactly one vanishes rules the comparison out.
pub fn equivalence_constants(pair: &MetricPair<'_>) -> EquivalenceReport {
    let n = pair.first.len();
    let mut alpha: Option<Q> = None;
    let mut beta: Option<Q> = None;
    for i in 0..n {
        for j in i..n {
            let p1 = pair.first.p(i, j);
            let p2 = pair.second.p(i, j);
            if p1.is_zero() && p2.is_zero() {
                continue;
            }
            if p1.is_zero() || p2.is_zero() {
                return EquivalenceReport {
                    constants: None,
                    reason: Some(format!(
                        "one-sided zero at pair ({},{}): p1 = {}, p2 = {}",
                        pair.first.label(i),
                        pair.first.label(j),
                        fmt_q(p1),
                        fmt_q(p2)
                    )),
                };
            }
            let ratio = p2 / p1;
            alpha = Some(match alpha {
                Some(a) => std::cmp::min(a, ratio.clone()),
                None => ratio.clone(),
            });
            beta = Some(match beta {
                Some(b) => std::cmp::max(b, ratio),
                None => ratio,
            });
        }
    }
    match (alpha, beta) {
        (Some(a), Some(b)) => EquivalenceReport {
            constants: Some(EquivalenceConstants { alpha: a, beta: b }),
            reason: None,
        },
        _ => EquivalenceReport {
            constants: None,
            reason: Some("every pair vanishes under both metrics".into()),
        },
    }
}

// ---------------------------------------------------------------------------
// Function-backed spaces
// ---------------------------------------------------------------------------

/// Built-in closed forms for function-backed spaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PFormula {
    /// p(x,y) = |x - y|^k
    AbsDiffPowK { k: f64 },
}

impl PFormula {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            PFormula::AbsDiffPowK { k } => (x - y).abs().powf(*k),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PFormula::AbsDiffPowK { .. } => "abs_diff_pow_k",
        }
    }
}

/// An interval of the real line with a closed-form p and a sampling grid.
/// Verdicts over such spaces are grid-sampled, never exhaustive.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncSpace {
    pub lo: f64,
    pub hi: f64,
    pub formula: PFormula,
    pub grid: usize,
    /// Comparison tolerance for sampled equality checks.
    pub cmp_tol: f64,
}

impl FuncSpace {
    pub fn new(lo: f64, hi: f64, formula: PFormula, grid: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Parameter(format!("bad interval [{lo}, {hi}]")));
        }
        if grid < 2 {
            return Err(Error::Parameter("sampling grid needs at least 2 points".into()));
        }
        Ok(FuncSpace { lo, hi, formula, grid, cmp_tol: 1e-12 })
    }

    pub fn p(&self, x: f64, y: f64) -> f64 {
        self.formula.eval(x, y)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn grid_points(&self) -> Vec<f64> {
        let n = self.grid;
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * (i as f64) / ((n - 1) as f64))
            .collect()
    }

    /// Sampled pm1..pm4 over the grid. A pass here is evidence, not proof.
    pub fn verify_axioms_sampled(&self, s: f64) -> SampledAxiomReport {
        let pts = self.grid_points();
        let tol = self.cmp_tol;
        let close = |a: f64, b: f64| (a - b).abs() <= tol;

        let mut pm1 = true;
        let mut pm1_witness = None;
        'pm1: for (i, &x) in pts.iter().enumerate() {
            for &y in &pts[i + 1..] {
                let pxy = self.p(x, y);
                if close(pxy, self.p(x, x)) && close(pxy, self.p(y, y)) {
                    pm1 = false;
                    pm1_witness = Some(vec![x, y]);
                    break 'pm1;
                }
            }
        }

        let mut pm2 = true;
        let mut pm2_witness = None;
        'pm2: for &x in &pts {
            for &y in &pts {
                if self.p(x, x) > self.p(x, y) + tol {
                    pm2 = false;
                    pm2_witness = Some(vec![x, y]);
                    break 'pm2;
                }
            }
        }

        let mut pm3 = true;
        let mut pm3_witness = None;
        'pm3: for &x in &pts {
            for &y in &pts {
                if !close(self.p(x, y), self.p(y, x)) {
                    pm3 = false;
                    pm3_witness = Some(vec![x, y]);
                    break 'pm3;
                }
            }
        }

        let mut pm4 = true;
        let mut pm4_witness = None;
        'pm4: for &x in &pts {
            for &y in &pts {
                for &z in &pts {
                    if self.p(x, y) + self.p(z, z) > s * (self.p(x, z) + self.p(z, y)) + tol {
                        pm4 = false;
                        pm4_witness = Some(vec![x, y, z]);
                        break 'pm4;
                    }
                }
            }
        }

        SampledAxiomReport {
            s_used: s,
            grid: self.grid,
            basis: CheckBasis::Sampled,
            pm1,
            pm1_witness,
            pm2,
            pm2_witness,
            pm3,
            pm3_witness,
            pm4,
            pm4_witness,
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        match self.formula {
            PFormula::AbsDiffPowK { k } => serde_json::json!({
                "interval": [self.lo, self.hi],
                "formula": "abs_diff_pow_k",
                "k": k,
                "grid": self.grid,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledAxiomReport {
    pub s_used: f64,
    pub grid: usize,
    pub basis: CheckBasis,
    pub pm1: bool,
    pub pm1_witness: Option<Vec<f64>>,
    pub pm2: bool,
    pub pm2_witness: Option<Vec<f64>>,
    pub pm3: bool,
    pub pm3_witness: Option<Vec<f64>>,
    pub pm4: bool,
    pub pm4_witness: Option<Vec<f64>>,
}

impl SampledAxiomReport {
    pub fn all_pass(&self) -> bool {
        self.pm1 && self.pm2 && self.pm3 && self.pm4
    }
}

// ---------------------------------------------------------------------------
// The space file format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Space {
    Finite(FiniteSpace),
    Func(FuncSpace),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RatioLit {
    Int(i64),
    Str(String),
}

impl RatioLit {
    fn to_q(&self, field: &str) -> Result<Q> {
        match self {
            RatioLit::Int(n) => Ok(q_int(*n)),
            RatioLit::Str(s) => {
                parse_q(s).map_err(|e| Error::Parse(format!("field {field:?}: {e}")))
            }
        }
    }
}

#[derive(Deserialize)]
struct SpaceFile {
    points: Option<Vec<String>>,
    p: Option<Vec<Vec<RatioLit>>>,
    declared_s: Option<RatioLit>,
    interval: Option<[f64; 2]>,
    formula: Option<String>,
    k: Option<f64>,
    grid: Option<usize>,
}

impl Space {
    pub fn from_json(text: &str) -> Result<Space> {
        let file: SpaceFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("space file: {e}")))?;
        if let Some(points) = file.points {
            let rows = file
                .p
                .ok_or_else(|| Error::Parse("space file: missing field \"p\"".into()))?;
            let declared_s = file
                .declared_s
                .ok_or_else(|| Error::Parse("space file: missing field \"declared_s\"".into()))?
                .to_q("declared_s")?;
            let mut table = Vec::with_capacity(rows.len());
            for (i, row) in rows.iter().enumerate() {
                let mut out = Vec::with_capacity(row.len());
                for lit in row {
                    out.push(lit.to_q(&format!("p[{i}]"))?);
                }
                table.push(out);
            }
            Ok(Space::Finite(FiniteSpace::new(points, table, declared_s)?))
        } else if let Some([lo, hi]) = file.interval {
            let name = file
                .formula
                .ok_or_else(|| Error::Parse("space file: missing field \"formula\"".into()))?;
            let formula = match name.as_str() {
                "abs_diff_pow_k" => {
                    let k = file.k.ok_or_else(|| {
                        Error::Parse("space file: formula abs_diff_pow_k needs field \"k\"".into())
                    })?;
                    if !(k.is_finite() && k > 0.0) {
                        return Err(Error::Parse(format!("field \"k\": bad exponent {k}")));
                    }
                    PFormula::AbsDiffPowK { k }
                }
                other => {
                    return Err(Error::Parse(format!("field \"formula\": unknown builtin {other:?}")))
                }
            };
            let grid = file.grid.unwrap_or(65);
            Ok(Space::Func(FuncSpace::new(lo, hi, formula, grid)?))
        } else {
            Err(Error::Parse(
                "space file: need either \"points\"/\"p\"/\"declared_s\" or \"interval\"/\"formula\""
                    .into(),
            ))
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        match self {
            Space::Finite(s) => s.to_json_value(),
            Space::Func(s) => s.to_json_value(),
        }
    }

    pub fn as_finite(&self) -> Result<&FiniteSpace> {
        match self {
            Space::Finite(s) => Ok(s),
            Space::Func(_) => {
                Err(Error::Unsupported("operation requires a finite space".into()))
            }
        }
    }
}

// ---------------------------------------------------------------------------

/// Convenience: a finite space from integer-pair rationals, for tests and
/// builders. `rows[i][j]` is (numer, denom).
pub fn space_from_ratios(
    labels: &[&str],
    rows: &[&[(i64, i64)]],
    declared_s: (i64, i64),
) -> Result<FiniteSpace> {
    let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    let table: Vec<Vec<Q>> = rows
        .iter()
        .map(|r| r.iter().map(|&(n, d)| crate::ratio::q(n, d)).collect())
        .collect();
    FiniteSpace::new(labels, table, crate::ratio::q(declared_s.0, declared_s.1))
}

/// Summary statistic helper used by search reports.
pub fn approx_stats(values: &[Q]) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let xs: Vec<f64> = values.iter().map(q_to_f64).collect();
    let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    Some((min, max, mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{example1_map, example1_space};
    use crate::ratio::q;

    fn chain3() -> FiniteSpace {
        // ordinary metric: d(a,b) = d(b,c) = 1, d(a,c) = 2, zero self-distances
        space_from_ratios(
            &["a", "b", "c"],
            &[
                &[(0, 1), (1, 1), (2, 1)],
                &[(1, 1), (0, 1), (1, 1)],
                &[(2, 1), (1, 1), (1, 1)],
            ],
            (1, 1),
        )
        .unwrap()
    }

    #[test]
    fn example1_axioms_pass_at_4() {
        let space = example1_space();
        let rep = space.verify_axioms(&q_int(4));
        assert!(rep.all_pass(), "{rep}");
        assert_eq!(rep.minimal_s, Some(q(15, 11)));
    }

    #[test]
    fn example1_pm4_fails_at_1_with_witness() {
        let space = example1_space();
        let rep = space.verify_axioms(&q_int(1));
        assert!(rep.pm1.passed() && rep.pm2.passed() && rep.pm3.passed());
        let w = rep.pm4.witness_points().expect("pm4 must fail at s = 1");
        assert_eq!(w, &["1".to_string(), "4".to_string(), "2".to_string()]);
    }

    #[test]
    fn ordinary_metric_passes_at_1() {
        let rep = chain3().verify_axioms(&q_int(1));
        assert!(rep.all_pass(), "{rep}");
    }

    #[test]
    fn minimal_coefficient_example1_is_15_over_11() {
        let space = example1_space();
        let m = space.minimal_coefficient().unwrap();
        assert_eq!(m.value, q(15, 11));
        let [x, y, z] = m.witness.unwrap();
        assert_eq!(
            [space.label(x), space.label(y), space.label(z)],
            ["1", "4", "2"]
        );
    }

    #[test]
    fn minimal_coefficient_against_float_scan() {
        // independent oracle: the same maximum recomputed in floating point
        let space = example1_space();
        let n = space.len();
        let mut best = 1.0f64;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let numer = q_to_f64(space.p(x, y)) + q_to_f64(space.p(z, z));
                    let denom = q_to_f64(space.p(x, z)) + q_to_f64(space.p(z, y));
                    if denom > 0.0 {
                        best = best.max(numer / denom);
                    }
                }
            }
        }
        let exact = q_to_f64(&space.minimal_coefficient().unwrap().value);
        assert!((best - exact).abs() < 1e-12, "float scan {best} vs exact {exact}");
    }

    #[test]
    fn minimal_coefficient_ordinary_metric_is_1() {
        assert_eq!(chain3().minimal_coefficient().unwrap().value, q_int(1));
    }

    #[test]
    fn minimal_coefficient_squared_distance() {
        // p(x,y) = |x-y|^2 on {0,1,2}
        let space = space_from_ratios(
            &["0", "1", "2"],
            &[
                &[(0, 1), (1, 1), (4, 1)],
                &[(1, 1), (0, 1), (1, 1)],
                &[(4, 1), (1, 1), (0, 1)],
            ],
            (2, 1),
        )
        .unwrap();
        let m = space.minimal_coefficient().unwrap();
        assert_eq!(m.value, q_int(2));
        let [x, y, z] = m.witness.unwrap();
        assert_eq!([space.label(x), space.label(y), space.label(z)], ["0", "2", "1"]);
    }

    #[test]
    fn minimal_coefficient_needs_pm12() {
        // pm2 broken: self-distance above the row
        let space = space_from_ratios(
            &["a", "b"],
            &[&[(5, 1), (1, 1)], &[(1, 1), (0, 1)]],
            (1, 1),
        )
        .unwrap();
        assert!(matches!(space.minimal_coefficient(), Err(Error::AxiomViolation(_))));
    }

    #[test]
    fn single_point_space_minimal_s_is_1() {
        let space = space_from_ratios(&["a"], &[&[(3, 4)]], (1, 1)).unwrap();
        assert_eq!(space.minimal_coefficient().unwrap().value, q_int(1));
        assert!(space.verify_axioms(&q_int(1)).all_pass());
    }

    #[test]
    fn ultra_holds_on_all_zero_singleton_and_standard_ultrametric() {
        let single = space_from_ratios(&["a"], &[&[(0, 1)]], (1, 1)).unwrap();
        assert!(single.is_ultra().unwrap().holds);

        // standard ultrametric: d(a,b) = d(a,c) = 1, d(b,c) = 1, zero selfs
        let ultra = space_from_ratios(
            &["a", "b", "c"],
            &[
                &[(0, 1), (1, 1), (1, 1)],
                &[(1, 1), (0, 1), (1, 1)],
                &[(1, 1), (1, 1), (0, 1)],
            ],
            (1, 1),
        )
        .unwrap();
        assert!(ultra.is_ultra().unwrap().holds);
    }

    #[test]
    fn ultra_fails_on_example1() {
        let rep = example1_space().is_ultra().unwrap();
        assert!(!rep.holds);
        let w = rep.witness.unwrap();
        assert_eq!(w.points, vec!["1", "4", "2"]);
    }

    #[test]
    fn equivalence_uniform_scaling() {
        let space = example1_space();
        let doubled = {
            let rows: Vec<Vec<Q>> = (0..space.len())
                .map(|i| (0..space.len()).map(|j| space.p(i, j) * q_int(2)).collect())
                .collect();
            FiniteSpace::new(space.labels().to_vec(), rows, space.declared_s().clone()).unwrap()
        };
        let pair = MetricPair::new(&space, &doubled).unwrap();
        let rep = equivalence_constants(&pair);
        let c = rep.constants.unwrap();
        assert_eq!(c.alpha, q_int(2));
        assert_eq!(c.beta, q_int(2));
    }

    #[test]
    fn equivalence_none_against_discrete_metric() {
        let space = example1_space();
        let discrete = {
            let rows: Vec<Vec<Q>> = (0..4)
                .map(|i| (0..4).map(|j| if i == j { Q::zero() } else { q_int(1) }).collect())
                .collect();
            FiniteSpace::new(space.labels().to_vec(), rows, q_int(1)).unwrap()
        };
        let pair = MetricPair::new(&space, &discrete).unwrap();
        let rep = equivalence_constants(&pair);
        assert!(rep.constants.is_none());
        assert!(rep.reason.unwrap().contains("2,2"));
    }

    #[test]
    fn equivalence_swap_antisymmetry() {
        let a = example1_space();
        let b = {
            // p2 = p1 scaled by 3/2 on off-diagonal, same diagonal
            let rows: Vec<Vec<Q>> = (0..a.len())
                .map(|i| {
                    (0..a.len())
                        .map(|j| {
                            if i == j {
                                a.p(i, j).clone()
                            } else {
                                a.p(i, j) * q(3, 2)
                            }
                        })
                        .collect()
                })
                .collect();
            FiniteSpace::new(a.labels().to_vec(), rows, a.declared_s().clone()).unwrap()
        };
        let fwd = equivalence_constants(&MetricPair::new(&a, &b).unwrap()).constants.unwrap();
        let bwd = equivalence_constants(&MetricPair::new(&b, &a).unwrap()).constants.unwrap();
        assert_eq!(bwd.alpha, q_int(1) / &fwd.beta);
        assert_eq!(bwd.beta, q_int(1) / &fwd.alpha);
    }

    #[test]
    fn metric_pair_requires_identical_points() {
        let a = example1_space();
        let b = chain3();
        assert!(MetricPair::new(&a, &b).is_err());
    }

    #[test]
    fn ball_membership_examples() {
        let space = example1_space();
        let one = space.index_of("1").unwrap();
        let two = space.index_of("2").unwrap();
        assert!(space.ball_contains(one, &q_int(4), two).unwrap()); // 3 < 4 + 0
        assert!(!space.ball_contains(one, &q_int(3), two).unwrap()); // 3 < 3 fails
        for x in 0..space.len() {
            assert!(space.ball_contains(x, &q(1, 100), x).unwrap());
        }
        assert!(space.ball_contains(one, &q_int(0), two).is_err());
        assert!(space.ball_contains(one, &q(-1, 2), two).is_err());
    }

    #[test]
    fn structural_rejects_bad_tables() {
        // asymmetric
        let r = FiniteSpace::new(
            vec!["a".into(), "b".into()],
            vec![vec![q_int(0), q_int(1)], vec![q_int(2), q_int(0)]],
            q_int(1),
        );
        assert!(matches!(r, Err(Error::Structural(_))));
        // negative
        let r = FiniteSpace::new(
            vec!["a".into(), "b".into()],
            vec![vec![q_int(0), q(-1, 2)], vec![q(-1, 2), q_int(0)]],
            q_int(1),
        );
        assert!(matches!(r, Err(Error::Structural(_))));
        // non-square
        let r = FiniteSpace::new(
            vec!["a".into(), "b".into()],
            vec![vec![q_int(0), q_int(1)]],
            q_int(1),
        );
        assert!(matches!(r, Err(Error::Structural(_))));
        // duplicate labels
        let r = FiniteSpace::new(
            vec!["a".into(), "a".into()],
            vec![vec![q_int(0), q_int(1)], vec![q_int(1), q_int(0)]],
            q_int(1),
        );
        assert!(matches!(r, Err(Error::Structural(_))));
    }

    #[test]
    fn space_file_round_trip() {
        let space = example1_space();
        let text = space.to_json();
        match Space::from_json(&text).unwrap() {
            Space::Finite(s) => assert_eq!(s, space),
            _ => panic!("expected finite"),
        }
    }

    #[test]
    fn space_file_accepts_integers_and_ratio_strings() {
        let text = r#"{
            "points": ["a", "b"],
            "p": [[0, "1/2"], ["1/2", "1/4"]],
            "declared_s": "1"
        }"#;
        let Space::Finite(s) = Space::from_json(text).unwrap() else { panic!() };
        assert_eq!(s.p(0, 1), &q(1, 2));
        assert_eq!(s.p(1, 1), &q(1, 4));
    }

    #[test]
    fn space_file_errors_name_fields() {
        let missing = r#"{ "points": ["a"], "declared_s": "1" }"#;
        let e = Space::from_json(missing).unwrap_err();
        assert!(e.to_string().contains("\"p\""), "{e}");

        let bad_ratio = r#"{ "points": ["a"], "p": [["x"]], "declared_s": "1" }"#;
        let e = Space::from_json(bad_ratio).unwrap_err();
        assert!(e.to_string().contains("p[0]"), "{e}");
    }

    #[test]
    fn func_space_file_and_sampled_axioms() {
        let text = r#"{ "interval": [0.0, 1.0], "formula": "abs_diff_pow_k", "k": 2.0, "grid": 33 }"#;
        let Space::Func(f) = Space::from_json(text).unwrap() else { panic!() };
        assert_eq!(f.grid, 33);
        let rep = f.verify_axioms_sampled(4.0);
        assert!(rep.all_pass(), "{rep:?}");
        // s = 1 must fail pm4 on the grid for a squared distance
        let rep1 = f.verify_axioms_sampled(1.0);
        assert!(!rep1.pm4);
    }
}
