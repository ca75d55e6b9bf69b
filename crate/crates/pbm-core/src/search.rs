//! Seeded random instances and large-scale probes.
//!
//! Instances are finite spaces sampled on a rational grid (so every
//! downstream check stays exact) together with uniform random self-maps.
//! Trial-level generators derive from (master seed, trial index, stream),
//! which makes every probe a pure function of its configuration and keeps
//! trials independent of execution order.
//!
//! Probe targets:
//!
//!   theorem-5   double-sum condition at the quadratic threshold
//!               (s >= 2, L < 1/s^2), conclusion: unique fixed point with
//!               zero self-distance, rate mu = L/(1-L)
//!   theorem-6   max condition at the linear threshold (s > 1, L < 1/s),
//!               conclusion as above with rate mu = L
//!   theorem-7   five-term rational condition with a random parameter
//!               vector, conclusion as above with the derived rate
//!   theorem-9   orbital condition L < 1 and nonempty F(T), conclusion:
//!               F(T^n) = F(T) for n <= 8
//!   s-window    double-sum condition on spaces whose minimal coefficient
//!               sits below 2, reported separately for s^2 < 2 and
//!               2 <= s^2 < 4; conclusions may genuinely fail and any
//!               counterexample is surfaced in full
//!   chka-pproperty-conjecture
//!               five-term condition, conclusion: F(T^n) = F(T)

use crate::contraction::{
    check_banach, check_ch2, check_chatterjea, check_chka, check_eq211, power_constants,
};
use crate::error::{Error, Result};
use crate::picard::{certify_rate, fixed_points, iterate, TraceVerdict};
use crate::pproperty::p_property;
use crate::ratio::{fmt_q, q, q_int, Q};
use crate::selfmap::{map_to_json, MapTable};
use crate::space::{approx_stats, FiniteSpace};
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeTarget {
    Theorem5,
    Theorem6,
    Theorem7,
    Theorem9,
    SWindow,
    ChkaPpropertyConjecture,
}

impl ProbeTarget {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "theorem-5" => ProbeTarget::Theorem5,
            "theorem-6" => ProbeTarget::Theorem6,
            "theorem-7" => ProbeTarget::Theorem7,
            "theorem-9" => ProbeTarget::Theorem9,
            "s-window" => ProbeTarget::SWindow,
            "chka-pproperty-conjecture" => ProbeTarget::ChkaPpropertyConjecture,
            other => return Err(Error::Parameter(format!("unknown probe target {other:?}"))),
        })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ProbeTarget::Theorem5 => "theorem-5",
            ProbeTarget::Theorem6 => "theorem-6",
            ProbeTarget::Theorem7 => "theorem-7",
            ProbeTarget::Theorem9 => "theorem-9",
            ProbeTarget::SWindow => "s-window",
            ProbeTarget::ChkaPpropertyConjecture => "chka-pproperty-conjecture",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenConfig {
    pub n_points: usize,
    /// Grid denominator for sampled values.
    pub denominator: u32,
    /// Off-diagonal values are sampled from (0, max_value].
    pub max_value: u32,
    pub seed: u64,
    pub trials: u64,
    pub target: ProbeTarget,
}

impl GenConfig {
    pub fn new(target: ProbeTarget, trials: u64, n_points: usize, seed: u64) -> Self {
        GenConfig { n_points, denominator: 16, max_value: 2, seed, trials, target }
    }
}

fn trial_rng(master: u64, trial: u64, stream: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master.to_le_bytes());
    seed[8..16].copy_from_slice(&trial.to_le_bytes());
    seed[16..24].copy_from_slice(&stream.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

// ---------------------------------------------------------------------------
// Instance generation
// ---------------------------------------------------------------------------

const RESAMPLE_BUDGET: usize = 64;

fn sample_value(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Q {
    let hi = (cfg.max_value * cfg.denominator).max(1) as i64;
    q(rng.gen_range(1..=hi), cfg.denominator as i64)
}

fn gen_space(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Result<FiniteSpace> {
    let n = cfg.n_points.max(1);
    let labels: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();

    let mut off = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = sample_value(rng, cfg);
            off[i][j] = v.clone();
            off[j][i] = v;
        }
    }
    // target self-distances; zero is boosted so that the contraction
    // conclusions (which force a zero-self-distance fixed point) stay
    // reachable on random instances
    let self_target: Vec<Q> = (0..n)
        .map(|_| if rng.gen_bool(0.5) { Q::zero() } else { sample_value(rng, cfg) })
        .collect();

    let clamp_selfs = |off: &mut Vec<Vec<Q>>, targets: &[Q]| {
        for i in 0..n {
            let row_min = (0..n)
                .filter(|&j| j != i)
                .map(|j| off[i][j].clone())
                .min();
            off[i][i] = match row_min {
                Some(m) => targets[i].clone().min(m),
                None => targets[i].clone(),
            };
        }
    };
    clamp_selfs(&mut off, &self_target);

    // pm1: resample flat triples p(x,y) = p(x,x) = p(y,y) on distinct pairs
    for _ in 0..RESAMPLE_BUDGET {
        let mut collisions = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if off[i][j] == off[i][i] && off[i][j] == off[j][j] {
                    collisions.push((i, j));
                }
            }
        }
        if collisions.is_empty() {
            let rows = off.clone();
            let mut space = FiniteSpace::new(labels.clone(), rows, q_int(1))?;
            let minimal = space.minimal_coefficient()?;
            space = space.with_declared_s(minimal.value)?;
            debug_assert!(space.verify_axioms(space.declared_s()).all_pass());
            return Ok(space);
        }
        for (i, j) in collisions {
            let v = sample_value(rng, cfg);
            off[i][j] = v.clone();
            off[j][i] = v;
        }
        clamp_selfs(&mut off, &self_target);
    }
    Err(Error::Generation(format!(
        "pm1 resampling budget exhausted (seed {}, {} points)",
        cfg.seed, n
    )))
}

/// Deterministic random space for (config, trial).
pub fn random_space(cfg: &GenConfig, trial: u64) -> Result<FiniteSpace> {
    gen_space(&mut trial_rng(cfg.seed, trial, 0), cfg)
}

/// Uniform independent image per point, deterministic for (config, trial).
pub fn random_map(space: &FiniteSpace, cfg: &GenConfig, trial: u64) -> MapTable {
    let mut rng = trial_rng(cfg.seed, trial, 1);
    let image = (0..space.len()).map(|_| rng.gen_range(0..space.len())).collect();
    MapTable::new(image, space).expect("image indices in range")
}

/// Random parameter vector for the five-term condition: each entry is zero
/// with probability 1/2, otherwise a small grid value.
pub fn random_lambda_vector(cfg: &GenConfig, trial: u64) -> [Q; 5] {
    let mut rng = trial_rng(cfg.seed, trial, 2);
    std::array::from_fn(|_| {
        if rng.gen_bool(0.5) {
            Q::zero()
        } else {
            q(rng.gen_range(1..=4), 16)
        }
    })
}

/// A random instance satisfying the power-contraction precondition, with a
/// valid certificate (n, K) and weight lambda for the orbit-sum transform.
#[derive(Debug, Clone)]
pub struct PowerInstance {
    pub space: FiniteSpace,
    pub map: MapTable,
    pub n: u32,
    pub k: Q,
    pub lambda: Q,
}

/// Random collapsing map toward a zero-self-distance root; every orbit
/// reaches the root within |X| - 1 steps, so some power is contractive.
pub fn random_power_contractive(cfg: &GenConfig, trial: u64) -> Result<PowerInstance> {
    if cfg.n_points < 2 {
        return Err(Error::Parameter("power instances need at least 2 points".into()));
    }
    let mut rng = trial_rng(cfg.seed, trial, 3);
    for _ in 0..RESAMPLE_BUDGET {
        let space = gen_space(&mut rng, cfg)?;
        let zero_selfs: Vec<usize> =
            (0..space.len()).filter(|&i| space.p(i, i).is_zero()).collect();
        if zero_selfs.is_empty() {
            continue;
        }
        let root = zero_selfs[rng.gen_range(0..zero_selfs.len())];
        // random order with the root first, then parent links into earlier
        // positions
        let mut order: Vec<usize> = (0..space.len()).collect();
        order.swap(0, root);
        for i in (2..order.len()).rev() {
            let j = rng.gen_range(1..=i);
            order.swap(i, j);
        }
        let mut image = vec![0usize; space.len()];
        image[order[0]] = order[0];
        for k in 1..order.len() {
            image[order[k]] = order[rng.gen_range(0..k)];
        }
        let map = MapTable::new(image, &space)?;

        let n_max = (space.len() as u32).max(2);
        let constants = power_constants(&space, &map, n_max);
        let Some((n, measured)) = constants.iter().find_map(|(n, k)| match k {
            Some(k) if k < &q_int(1) => Some((*n, k.clone())),
            _ => None,
        }) else {
            continue;
        };
        let k_cert = if measured.is_zero() {
            q(1, 2)
        } else {
            (measured + q_int(1)) / q_int(2)
        };
        // smallest weight of the form 1 + 2^-j with lambda^n K < 1
        let lambda = (0..64)
            .map(|j| q_int(1) + q(1, 1i64 << j.min(62)))
            .find(|l| l.pow(n as i32) * &k_cert < q_int(1));
        let Some(lambda) = lambda else { continue };
        return Ok(PowerInstance { space, map, n, k: k_cert, lambda });
    }
    Err(Error::Generation(format!(
        "no power-contractive instance within budget (seed {}, trial {trial})",
        cfg.seed
    )))
}

// ---------------------------------------------------------------------------
// Probes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bucket {
    pub name: String,
    pub hypothesis_count: u64,
    pub verified_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: u64,
    pub bucket: String,
    pub reason: String,
    pub space_json: String,
    pub map_json: String,
    pub lambdas: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub config: GenConfig,
    pub trials_run: u64,
    pub gen_failures: u64,
    pub buckets: Vec<Bucket>,
    pub counterexamples: Vec<Counterexample>,
    /// (min, max, mean) of the minimal coefficients seen.
    pub s_min_stats: Option<(f64, f64, f64)>,
    /// (min, max, mean) of the target condition's minimal constants.
    pub lambda_stats: Option<(f64, f64, f64)>,
    pub injected_trial: Option<String>,
}

impl SearchReport {
    pub fn total_hypothesis(&self) -> u64 {
        self.buckets.iter().map(|b| b.hypothesis_count).sum()
    }

    pub fn total_verified(&self) -> u64 {
        self.buckets.iter().map(|b| b.verified_count).sum()
    }
}

/// Unique zero-self-distance fixed point, reached by iteration from every
/// start, with an optional rate certificate on every trace.
fn unique_fixed_point_conclusion(
    space: &FiniteSpace,
    map: &MapTable,
    mu: Option<&Q>,
) -> std::result::Result<(), String> {
    let fps = fixed_points(space, map);
    if fps.len() != 1 {
        return Err(format!("expected a unique fixed point, found {}", fps.len()));
    }
    if !fps.self_distances[0].is_zero() {
        return Err(format!(
            "fixed point {} has self-distance {}",
            fps.labels[0],
            fmt_q(&fps.self_distances[0])
        ));
    }
    let u = fps.points[0];
    let max_iter = 4 * space.len() + 16;
    for start in 0..space.len() {
        let trace = iterate(space, map, start, max_iter);
        match &trace.verdict {
            TraceVerdict::FixedPointFound { point, .. } if point == space.label(u) => {}
            other => {
                return Err(format!(
                    "orbit from {} did not settle at {}: {:?}",
                    space.label(start),
                    space.label(u),
                    other
                ))
            }
        }
        if let Some(mu) = mu {
            let cert = certify_rate(space, &trace, mu, space.declared_s())
                .map_err(|e| e.to_string())?;
            if !cert.all_pass {
                return Err(format!(
                    "rate certificate mu = {} failed from start {} (step violations {:?}, tail violations {:?})",
                    fmt_q(mu),
                    space.label(start),
                    cert.step_violations,
                    cert.tail_violations
                ));
            }
        }
    }
    Ok(())
}

/// Set equality of fixed points across powers up to 8.
fn p_property_conclusion(space: &FiniteSpace, map: &MapTable) -> std::result::Result<(), String> {
    let rep = p_property(space, map, 8).map_err(|e| e.to_string())?;
    if !rep.subset_ok {
        return Err("F(T) not contained in some F(T^n)".into());
    }
    if !rep.holds {
        let (n, p) = rep.first_violation.unwrap_or((0, "?".into()));
        return Err(format!("F(T^{n}) differs from F(T) at point {p}"));
    }
    Ok(())
}

/// The instance a probe uses at a given trial (the s-window probe injects
/// a known four-point instance at trial 0).
pub fn probe_instance(cfg: &GenConfig, trial: u64) -> Result<(FiniteSpace, MapTable, bool)> {
    if cfg.target == ProbeTarget::SWindow && trial == 0 {
        let space = crate::examples::example1_space();
        let minimal = space.minimal_coefficient()?.value;
        let space = space.with_declared_s(minimal)?;
        let map = crate::examples::example1_map(&space)?;
        return Ok((space, map, true));
    }
    let space = random_space(cfg, trial)?;
    let map = random_map(&space, cfg, trial);
    Ok((space, map, false))
}

/// Run the configured probe. The report is a pure function of the config.
pub fn probe(cfg: &GenConfig) -> SearchReport {
    let mut gen_failures = 0u64;
    let mut counterexamples = Vec::new();
    let mut s_mins: Vec<Q> = Vec::new();
    let mut lambdas_seen: Vec<Q> = Vec::new();
    let mut injected_trial = None;

    let mut buckets: Vec<Bucket> = match cfg.target {
        ProbeTarget::SWindow => vec![
            Bucket { name: "s-below-sqrt2".into(), hypothesis_count: 0, verified_count: 0 },
            Bucket { name: "sqrt2-to-2".into(), hypothesis_count: 0, verified_count: 0 },
        ],
        _ => vec![Bucket { name: "all".into(), hypothesis_count: 0, verified_count: 0 }],
    };

    for trial in 0..cfg.trials {
        let (space, map, injected) = match probe_instance(cfg, trial) {
            Ok(v) => v,
            Err(_) => {
                gen_failures += 1;
                continue;
            }
        };
        if injected {
            injected_trial = Some("trial 0: four-point demonstration instance".to_string());
        }
        let s_min = space.declared_s().clone();
        s_mins.push(s_min.clone());

        let mut record_counterexample = |bucket: &str, reason: String, lams: Option<&[Q; 5]>| {
            counterexamples.push(Counterexample {
                trial,
                bucket: bucket.to_string(),
                reason,
                space_json: space.to_json(),
                map_json: map_to_json(&space, &map),
                lambdas: lams.map(|ls| ls.iter().map(fmt_q).collect()),
            });
        };

        match cfg.target {
            ProbeTarget::Theorem5 => {
                let rep = check_chatterjea(&space, &map, &s_min);
                if let Some(l) = &rep.minimal {
                    lambdas_seen.push(l.clone());
                }
                if rep.admissible {
                    buckets[0].hypothesis_count += 1;
                    let l = rep.minimal.as_ref().expect("admissible implies finite");
                    let mu = l / (q_int(1) - l);
                    match unique_fixed_point_conclusion(&space, &map, Some(&mu)) {
                        Ok(()) => buckets[0].verified_count += 1,
                        Err(reason) => record_counterexample("all", reason, None),
                    }
                }
            }
            ProbeTarget::Theorem6 => {
                let rep = check_ch2(&space, &map, &s_min);
                if let Some(l) = &rep.minimal {
                    lambdas_seen.push(l.clone());
                }
                if rep.admissible {
                    buckets[0].hypothesis_count += 1;
                    let mu = rep.minimal.clone().expect("admissible implies finite");
                    match unique_fixed_point_conclusion(&space, &map, Some(&mu)) {
                        Ok(()) => buckets[0].verified_count += 1,
                        Err(reason) => record_counterexample("all", reason, None),
                    }
                }
            }
            ProbeTarget::Theorem7 => {
                let banach = check_banach(&space, &map);
                if let Some(l) = &banach.minimal {
                    lambdas_seen.push(l.clone());
                }
                let lams = random_lambda_vector(cfg, trial);
                let rep = match check_chka(&space, &map, &lams, &s_min) {
                    Ok(r) => r,
                    Err(e) => {
                        record_counterexample("all", format!("chka check errored: {e}"), Some(&lams));
                        continue;
                    }
                };
                if rep.admissible {
                    buckets[0].hypothesis_count += 1;
                    let mu = rep
                        .chka
                        .as_ref()
                        .and_then(|d| d.derived_rate.clone())
                        .expect("admissible implies a derived rate");
                    match unique_fixed_point_conclusion(&space, &map, Some(&mu)) {
                        Ok(()) => buckets[0].verified_count += 1,
                        Err(reason) => record_counterexample("all", reason, Some(&lams)),
                    }
                }
            }
            ProbeTarget::Theorem9 => {
                let rep = match check_eq211(&space, &map) {
                    Ok(r) => r,
                    Err(e) => {
                        record_counterexample("all", format!("eq211 check errored: {e}"), None);
                        continue;
                    }
                };
                if let Some(l) = &rep.minimal {
                    lambdas_seen.push(l.clone());
                }
                let f_t_nonempty = !fixed_points(&space, &map).is_empty();
                let below_one = rep.minimal.as_ref().is_some_and(|l| l < &q_int(1));
                if below_one && f_t_nonempty {
                    buckets[0].hypothesis_count += 1;
                    match p_property_conclusion(&space, &map) {
                        Ok(()) => buckets[0].verified_count += 1,
                        Err(reason) => record_counterexample("all", reason, None),
                    }
                }
            }
            ProbeTarget::SWindow => {
                let rep = check_chatterjea(&space, &map, &s_min);
                if let Some(l) = &rep.minimal {
                    lambdas_seen.push(l.clone());
                }
                let s_sq = &s_min * &s_min;
                let bucket_idx = if s_sq < q_int(2) {
                    Some(0)
                } else if s_min < q_int(2) {
                    Some(1)
                } else {
                    None
                };
                if let (Some(idx), Some(l)) = (bucket_idx, rep.minimal.as_ref()) {
                    let threshold = q_int(1) / (&s_min * &s_min);
                    if l < &threshold {
                        buckets[idx].hypothesis_count += 1;
                        let bucket_name = buckets[idx].name.clone();
                        match unique_fixed_point_conclusion(&space, &map, None) {
                            Ok(()) => buckets[idx].verified_count += 1,
                            Err(reason) => record_counterexample(&bucket_name, reason, None),
                        }
                    }
                }
            }
            ProbeTarget::ChkaPpropertyConjecture => {
                let lams = random_lambda_vector(cfg, trial);
                let rep = match check_chka(&space, &map, &lams, &s_min) {
                    Ok(r) => r,
                    Err(e) => {
                        record_counterexample("all", format!("chka check errored: {e}"), Some(&lams));
                        continue;
                    }
                };
                if let Ok(eq) = check_eq211(&space, &map) {
                    if let Some(l) = eq.minimal {
                        lambdas_seen.push(l);
                    }
                }
                if rep.admissible {
                    buckets[0].hypothesis_count += 1;
                    match p_property_conclusion(&space, &map) {
                        Ok(()) => buckets[0].verified_count += 1,
                        Err(reason) => record_counterexample("all", reason, Some(&lams)),
                    }
                }
            }
        }
    }

    SearchReport {
        config: cfg.clone(),
        trials_run: cfg.trials,
        gen_failures,
        buckets,
        counterexamples,
        s_min_stats: approx_stats(&s_mins),
        lambda_stats: approx_stats(&lambdas_seen),
        injected_trial,
    }
}
