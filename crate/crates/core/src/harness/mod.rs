//! Seeded random instances and the full property suite.

pub mod oracle;

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classify::{theorem_report, Classification, Label};
use crate::model::{joint_weight, BitWord, Instance, InstanceFile, DEFAULT_ENUM_LIMIT};
use crate::partitions::{
    bound_chain, check_appendix_b_all, check_prop2, check_prop9, Analysis, ChainReport, CheckReport, Outcome,
    PartitionError,
};
use crate::weights::{LaurentWeight, Rational};

use oracle::Oracle;

/// Upper limits on the generator's blocklength and code size.
pub const FUZZ_MAX_N: usize = 12;
pub const FUZZ_MAX_M: usize = 8;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid fuzz configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// How prior weights are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightStyle {
    /// Constants `a/b` with `a, b in 1..=4`.
    Rational,
    /// Monomials `q^e` with `e in -3..=3`.
    Laurent,
    /// Rational or Laurent, chosen per trial.
    Mixed,
    /// All weights equal.
    Uniform,
}

impl FromStr for WeightStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(WeightStyle::Rational),
            "laurent" => Ok(WeightStyle::Laurent),
            "mixed" => Ok(WeightStyle::Mixed),
            "uniform" => Ok(WeightStyle::Uniform),
            other => Err(format!(
                "unknown weight style {other:?} (rational, laurent, mixed, uniform)"
            )),
        }
    }
}

impl fmt::Display for WeightStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightStyle::Rational => "rational",
            WeightStyle::Laurent => "laurent",
            WeightStyle::Mixed => "mixed",
            WeightStyle::Uniform => "uniform",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_n: usize,
    pub max_m: usize,
    pub p_pool: Vec<Rational>,
    pub weight_style: WeightStyle,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 0,
            trials: 100,
            max_n: 8,
            max_m: 6,
            p_pool: default_p_pool(),
            weight_style: WeightStyle::Mixed,
        }
    }
}

pub fn default_p_pool() -> Vec<Rational> {
    [(1, 3), (1, 4), (2, 5), (1, 5), (3, 7)]
        .iter()
        .map(|&(a, b)| Rational::new(a, b))
        .collect()
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if !(2..=FUZZ_MAX_N).contains(&self.max_n) {
            return bad(format!("max_n = {} is outside [2, {FUZZ_MAX_N}]", self.max_n));
        }
        if !(2..=FUZZ_MAX_M).contains(&self.max_m) {
            return bad(format!("max_m = {} is outside [2, {FUZZ_MAX_M}]", self.max_m));
        }
        if self.p_pool.is_empty() {
            return bad("p_pool is empty".into());
        }
        let half = Rational::new(1, 2);
        if let Some(p) = self.p_pool.iter().find(|p| !p.is_positive() || **p >= half) {
            return bad(format!("p = {p} in p_pool is not in (0, 1/2)"));
        }
        Ok(())
    }
}

/// Instance number `trial` of the sequence defined by `cfg`. Each trial reads
/// its own ChaCha stream of `cfg.seed`, so trials can be generated in any
/// order.
pub fn random_instance(cfg: &FuzzConfig, trial: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let n = rng.random_range(2..=cfg.max_n);
    let m = rng.random_range(2..=cfg.max_m.min(1 << n));
    let codewords: Vec<BitWord> = sample(&mut rng, 1 << n, m)
        .into_iter()
        .map(|c| BitWord(c as u64))
        .collect();
    let style = match cfg.weight_style {
        WeightStyle::Mixed if rng.random_bool(0.5) => WeightStyle::Rational,
        WeightStyle::Mixed => WeightStyle::Laurent,
        s => s,
    };
    let weights = (0..m)
        .map(|_| match style {
            WeightStyle::Rational => {
                LaurentWeight::constant(Rational::new(rng.random_range(1..=4), rng.random_range(1..=4)))
            }
            WeightStyle::Laurent => LaurentWeight::monomial(Rational::one(), rng.random_range(-3..=3)),
            _ => LaurentWeight::constant(Rational::one()),
        })
        .collect();
    let p = cfg.p_pool[rng.random_range(0..cfg.p_pool.len())].clone();
    Instance::new(n, codewords, weights, p).expect("generator respects the instance invariants")
}

/// Failing instance plus the first property it broke.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reproducer {
    pub instance: InstanceFile,
    pub property: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckReport>,
    pub chain: ChainReport,
    pub reproducer: Option<Reproducer>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckReport::passed)
    }

    pub fn check(&self, property: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.property == property)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

pub fn run_suite(inst: &Instance) -> Result<SuiteReport, HarnessError> {
    run_suite_with_limit(inst, DEFAULT_ENUM_LIMIT)
}

pub fn run_suite_with_limit(inst: &Instance, limit: usize) -> Result<SuiteReport, HarnessError> {
    let analysis = Analysis::with_limit(inst, limit)?;
    let oracle = Oracle::build(inst);
    let mut checks = Vec::new();

    checks.push(check_output_partition(&analysis, oracle.as_ref()));
    checks.push(check_reciprocity(&analysis));
    checks.push(check_metrics_two_ways(&analysis, oracle.as_ref()));
    checks.extend(theorem_checks(&analysis));
    checks.push(check_argmax_invariance(&analysis, limit));
    checks.extend(analysis.structural_checks());
    let p2 = check_prop2(&analysis);
    checks.extend(p2.reports().into_iter().cloned());
    checks.push(check_prop9(&analysis));
    checks.push(check_appendix_b_all(&analysis));
    let chain = bound_chain(&analysis);
    checks.push(chain.report.clone());
    checks.push(check_oracle_equivalence(&analysis, oracle.as_ref()));

    let reproducer = checks.iter().find(|c| !c.passed()).map(|c| Reproducer {
        instance: inst.to_file(),
        property: c.property.clone(),
    });
    Ok(SuiteReport {
        checks,
        chain,
        reproducer,
    })
}

fn theorem_checks(a: &Analysis<'_>) -> Vec<CheckReport> {
    let t = theorem_report(a.instance(), a.classification().metrics());
    let m = &t.metrics;
    let one = |name: &str, ok: Option<bool>, msg: String| {
        let mut r = CheckReport::new(name);
        if let Some(ok) = ok {
            r.checked = 1;
            if !ok {
                r.fail(msg);
            }
        }
        r.finish()
    };
    let two_qn = &t.theorem_factor - Rational::one();
    vec![
        one(
            "sandwich",
            Some(t.sandwich),
            format!("b = {}, a = {}, b + delta = {}", m.b, m.a, &m.b + &m.delta),
        ),
        one(
            "delta_bound",
            Some(t.delta_bound),
            format!("delta = {} > 2qn b = {}", m.delta, &two_qn * &m.b),
        ),
        one(
            "theorem_bound",
            Some(t.theorem),
            format!("a = {} > (1+2qn) b = {}", m.a, &t.theorem_factor * &m.b),
        ),
        one(
            "uniform_theorem_bound",
            t.uniform_theorem,
            format!("a = {} > (1+qn) b", m.a),
        ),
    ]
}

/// Each output is exactly one of tie, tie-free error or correct for every
/// codeword, and the engine's sets match the reference ones.
fn check_output_partition(a: &Analysis<'_>, oracle: Option<&Oracle>) -> CheckReport {
    let mut rep = CheckReport::new("output_partition");
    let cls = a.classification();
    let inst = a.instance();
    let counts = cls.counts();
    let total = inst.output_count();
    for i in 0..inst.m() {
        rep.checked += 1;
        let row = |v: &[u64]| v[i * counts.stride..(i + 1) * counts.stride].iter().sum::<u64>();
        let (t, e) = (row(&counts.tie), row(&counts.error));
        if t + e > total {
            rep.fail(format!("codeword {}: |T| + |N| = {} exceeds 2^n", i + 1, t + e));
        }
        if let Some(o) = oracle {
            let tie: Vec<u64> = cls.tie_set(i).into_iter().map(|y| y.0).collect();
            let err: Vec<u64> = cls.error_set(i).into_iter().map(|y| y.0).collect();
            if tie != o.tie[i] || err != o.error[i] {
                rep.fail(format!("codeword {}: T or N differs from the reference sets", i + 1));
            }
            if (tie.len() + err.len()) as u64 != t + e {
                rep.fail(format!(
                    "codeword {}: region counts disagree with the listed sets",
                    i + 1
                ));
            }
            let exclusive = (0..total as usize).all(|y| {
                let best = (0..o.m)
                    .filter(|&r| r != i)
                    .map(|r| &o.joint[y][r])
                    .max()
                    .expect("M >= 2");
                let cases = [o.joint[y][i] == *best, o.joint[y][i] < *best, o.joint[y][i] > *best];
                cases.iter().filter(|&&c| c).count() == 1
            });
            if !exclusive {
                rep.fail(format!(
                    "codeword {}: an output falls in zero or several regions",
                    i + 1
                ));
            }
        }
    }
    rep.finish()
}

/// `h in I_i(y)` implies `i in I_h(y)` with equal joint weights.
fn check_reciprocity(a: &Analysis<'_>) -> CheckReport {
    let cls = a.classification();
    let table = cls.table();
    let inst = a.instance();
    let m = inst.m();
    let mut rep = CheckReport::new("tie_reciprocity");
    let bad = cls.par_collect(|w, out: &mut Vec<(BitWord, usize, usize)>| {
        for i in (0..m).filter(|&i| w.label(i) == Label::Tie) {
            for h in (0..m).filter(|&h| h != i && w.ranks[h] == w.ranks[i]) {
                if w.label(h) != Label::Tie || table.key(h, w.dists[h]) != table.key(i, w.dists[i]) {
                    out.push((w.y, i, h));
                }
            }
        }
    });
    rep.checked = usize::from(!cls.metrics().delta.is_zero());
    for (y, i, h) in bad {
        rep.fail(format!(
            "{}: {} in I_{}(y) but not the converse",
            inst.word(y),
            h + 1,
            i + 1
        ));
    }
    // Spot-check the exact weights on the first tie of each codeword.
    for i in 0..m {
        if let Some(&y) = cls.tie_set(i).first() {
            for h in cls.tie_indices(i, y) {
                let (pi, ph) = (joint_weight(inst, i, y), joint_weight(inst, h, y));
                if pi.ok() != ph.ok() {
                    rep.fail(format!("{}: P(c_{}, y) != P(c_{}, y)", inst.word(y), i + 1, h + 1));
                }
            }
        }
    }
    rep.finish()
}

/// Per-codeword sums (engine) against per-output sums (reference).
fn check_metrics_two_ways(a: &Analysis<'_>, oracle: Option<&Oracle>) -> CheckReport {
    let mut rep = CheckReport::new("metrics_two_ways");
    if let Some(o) = oracle {
        rep.checked = 1;
        let met = a.classification().metrics();
        for (name, x, y) in [
            ("a", &met.a, &o.a),
            ("b", &met.b, &o.b),
            ("delta", &met.delta, &o.delta),
        ] {
            if x != y {
                rep.fail(format!("{name}: engine {x} vs per-output {y}"));
            }
        }
    }
    rep.finish()
}

/// Scaling every prior weight by the same constant leaves the decoder alone.
fn check_argmax_invariance(a: &Analysis<'_>, limit: usize) -> CheckReport {
    let inst = a.instance();
    let mut rep = CheckReport::new("argmax_invariance");
    let factor = LaurentWeight::constant(Rational::new(7, 3));
    let weights = inst.weights().iter().map(|w| w * &factor).collect();
    let scaled = match Instance::new(inst.n(), inst.codewords().to_vec(), weights, inst.p().clone()) {
        Ok(s) => s,
        Err(e) => {
            rep.fail(format!("scaled instance rejected: {e}"));
            return rep.finish();
        }
    };
    let other = match Classification::with_limit(&scaled, limit) {
        Ok(c) => c,
        Err(e) => {
            rep.fail(format!("scaled instance not enumerable: {e}"));
            return rep.finish();
        }
    };
    let cls = a.classification();
    rep.checked = 1;
    let differ = cls.par_collect(|w, out: &mut Vec<BitWord>| {
        if cls.decode(w.y) != other.decode(w.y) {
            out.push(w.y);
        }
    });
    for y in differ {
        rep.fail(format!("{}: decision changes after scaling the priors", inst.word(y)));
    }
    rep.finish()
}

fn ids(v: &[BitWord]) -> Vec<u64> {
    v.iter().map(|y| y.0).collect()
}

/// Engine sets against the literal transcription, set for set.
fn check_oracle_equivalence(a: &Analysis<'_>, oracle: Option<&Oracle>) -> CheckReport {
    let mut rep = CheckReport::new("oracle_equivalence");
    let Some(o) = oracle else {
        return rep.finish();
    };
    let f = a.families();
    for (i, j) in f.pairs() {
        rep.checked += 1;
        let tag = format!("pair ({}, {})", i + 1, j + 1);
        if ids(f.tied(i, j)) != o.tied[i][j] {
            rep.fail(format!("{tag}: T({}|{}) differs", j + 1, i + 1));
        }
        if ids(f.residual(i, j)) != o.residual[i][j] {
            rep.fail(format!("{tag}: T~({}|{}) differs", j + 1, i + 1));
        }
        if ids(f.matched(i, j)) != o.matched[i][j] {
            rep.fail(format!("{tag}: N({}|{}) differs", j + 1, i + 1));
        }
        let pair = a.pair(i, j);
        let op = &o.pairs[&(i, j)];
        let r = &pair.refinement;
        let n = r.n;
        let cells: Vec<Vec<usize>> = (1..=r.cell_count()).map(|m| r.cell(m).indices(n)).collect();
        if cells != op.cells {
            rep.fail(format!("{tag}: refinement cells differ"));
        }
        let eta: Vec<usize> = r.levels.iter().map(|lv| lv.eta as usize).collect();
        if eta != op.eta {
            rep.fail(format!("{tag}: eta map differs ({eta:?} vs {:?})", op.eta));
        }
        let lp = &pair.levels;
        let t_levels: Vec<Vec<u64>> = lp.t_levels.iter().map(|v| ids(v)).collect();
        let n_levels: Vec<Vec<u64>> = lp.n_levels.iter().map(|v| ids(v)).collect();
        if t_levels != op.t_levels {
            rep.fail(format!("{tag}: T-levels differ"));
        }
        if n_levels != op.n_levels {
            rep.fail(format!("{tag}: N-levels differ"));
        }
        let atoms: Vec<Vec<oracle::OracleAtom>> = lp
            .atoms
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|at| (at.representative.0, ids(&at.t), ids(&at.n)))
                    .collect()
            })
            .collect();
        if atoms != op.atoms {
            rep.fail(format!("{tag}: atoms differ"));
        }
    }
    rep.finish()
}

/// Pass, vacuous and fail counts of one property across a corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub property: String,
    pub pass: usize,
    pub vacuous: usize,
    pub fail: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub reproducer: Reproducer,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub trials: usize,
    pub weight_style: WeightStyle,
    /// Trials whose drawn priors came out equal.
    pub uniform_trials: usize,
    /// Trials with at least one tie.
    pub tie_trials: usize,
    pub tallies: Vec<Tally>,
    pub failures: Vec<TrialFailure>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn tally(&self, property: &str) -> Option<&Tally> {
        self.tallies.iter().find(|t| t.property == property)
    }
}

/// Runs the suite on every trial of `cfg`, in parallel; results are merged in
/// trial order.
pub fn run_fuzz(cfg: &FuzzConfig) -> Result<FuzzReport, HarnessError> {
    cfg.validate()?;
    let results: Vec<(bool, bool, SuiteReport)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let inst = random_instance(cfg, t);
            let report = run_suite(&inst)?;
            let ties = report.chain.report.outcome != Outcome::Vacuous;
            Ok((inst.is_uniform(), ties, report))
        })
        .collect::<Result<_, HarnessError>>()?;
    let mut tallies: Vec<Tally> = Vec::new();
    let mut failures = Vec::new();
    let mut uniform_trials = 0;
    let mut tie_trials = 0;
    for (trial, (uniform, ties, report)) in results.into_iter().enumerate() {
        uniform_trials += uniform as usize;
        tie_trials += ties as usize;
        for c in &report.checks {
            let pos = match tallies.iter().position(|t| t.property == c.property) {
                Some(p) => p,
                None => {
                    tallies.push(Tally {
                        property: c.property.clone(),
                        ..Default::default()
                    });
                    tallies.len() - 1
                }
            };
            let t = &mut tallies[pos];
            match c.outcome {
                Outcome::Pass => t.pass += 1,
                Outcome::Vacuous => t.vacuous += 1,
                Outcome::Fail => t.fail += 1,
            }
        }
        if let Some(reproducer) = report.reproducer.clone() {
            let violations = report
                .failures()
                .flat_map(|c| c.violations.iter().map(move |v| format!("{}: {v}", c.property)))
                .collect();
            failures.push(TrialFailure {
                trial,
                reproducer,
                violations,
            });
        }
    }
    Ok(FuzzReport {
        seed: cfg.seed,
        trials: cfg.trials,
        weight_style: cfg.weight_style,
        uniform_trials,
        tie_trials,
        tallies,
        failures,
    })
}
