//! Exhaustive classification of channel outputs into tie, tie-free error and
//! correct regions, and the exact error metrics built from them.
//!
//! Every joint weight has the form `prior_r * p^n * q^e` with `e = n - d` in
//! `0..=n`. The [`ScoreTable`] precomputes those values (plus `e = n+1, n+2`,
//! needed for the `q^2`-shifted comparisons of the partition machinery) and
//! ranks them once, so the per-word comparisons are integer comparisons that
//! agree exactly with the rational ones. Sums over sets are formed by counting
//! words per `(codeword, distance)` and multiplying at the end.

use std::fmt;

use rayon::prelude::*;

use crate::model::{distance, BitWord, Instance, ModelError, DEFAULT_ENUM_LIMIT};
use crate::weights::Rational;

/// Words per parallel work unit.
const CHUNK: u64 = 1 << 12;

/// Exact ranks of `prior_r * q^e` for every codeword `r` and exponent
/// `e in 0..=n+2`. Equal values share a rank.
#[derive(Clone, Debug)]
pub struct ScoreTable {
    n: usize,
    stride: usize,
    ranks: Vec<u32>,
    keys: Vec<Rational>,
}

impl ScoreTable {
    pub fn new(inst: &Instance) -> ScoreTable {
        let n = inst.n();
        let stride = n + 3;
        let mut keys = Vec::with_capacity(inst.m() * stride);
        for prior in inst.prior() {
            let mut v = prior.clone();
            for _ in 0..stride {
                keys.push(v.clone());
                v *= inst.q();
            }
        }
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        let mut ranks = vec![0u32; keys.len()];
        let mut rank = 0u32;
        for (pos, &idx) in order.iter().enumerate() {
            if pos > 0 && keys[order[pos - 1]] != keys[idx] {
                rank += 1;
            }
            ranks[idx] = rank;
        }
        ScoreTable { n, stride, ranks, keys }
    }

    /// Rank of `P(c_r, y)` for a word at distance `d` from `c_r`.
    #[inline]
    pub fn rank(&self, r: usize, d: u32) -> u32 {
        self.ranks[r * self.stride + self.n - d as usize]
    }

    /// Rank of `P(c_r, y) * q^2` (the exponent shifted by two).
    #[inline]
    pub fn rank_q2(&self, r: usize, d: u32) -> u32 {
        self.ranks[r * self.stride + self.n + 2 - d as usize]
    }

    /// `prior_r * q^(n - d)`, i.e. the joint weight without the common `p^n`.
    pub fn key(&self, r: usize, d: u32) -> &Rational {
        &self.keys[r * self.stride + self.n - d as usize]
    }
}

/// Membership of one output with respect to one transmitted codeword.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    /// `y in T_i`: `c_i` ties for the maximum with at least one other codeword.
    Tie,
    /// `y in N_i`: some other codeword is strictly more likely.
    Error,
    /// `c_i` is the unique maximizer.
    Correct,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Tie => "TIE",
            Label::Error => "ERR",
            Label::Correct => "OK",
        })
    }
}

/// Per-word summary: top rank, how many codewords attain it, and the least one.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Top {
    pub(crate) rank: u32,
    pub(crate) count: u32,
    pub(crate) first: usize,
}

/// Distances and score ranks of one output against every codeword.
#[derive(Clone, Copy, Debug)]
pub struct WordView<'b> {
    pub y: BitWord,
    pub dists: &'b [u32],
    pub ranks: &'b [u32],
    pub top_rank: u32,
    /// Number of codewords attaining `top_rank`.
    pub top_count: u32,
}

impl WordView<'_> {
    pub fn label(&self, i: usize) -> Label {
        label_of(
            &Top {
                rank: self.top_rank,
                count: self.top_count,
                first: 0,
            },
            self.ranks[i],
        )
    }
}

/// `a_n`, `b_n` and `delta_n` for one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metrics {
    /// Minimum (MAP) error probability, `1 - sum_y max_i P(c_i, y)`.
    pub a: Rational,
    /// Tie-free error probability, `sum_i P(c_i, N_i)`.
    pub b: Rational,
    /// Tie probability, `sum_i P(c_i, T_i)`.
    pub delta: Rational,
}

/// Counts of outputs per `(codeword, distance)` in `T_i`, `N_i` and in the
/// set of words whose least maximizer is `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionCounts {
    pub stride: usize,
    pub tie: Vec<u64>,
    pub error: Vec<u64>,
    pub decoded: Vec<u64>,
}

impl RegionCounts {
    fn zeros(m: usize, stride: usize) -> Self {
        RegionCounts {
            stride,
            tie: vec![0; m * stride],
            error: vec![0; m * stride],
            decoded: vec![0; m * stride],
        }
    }

    fn merge(mut self, other: RegionCounts) -> RegionCounts {
        for (a, b) in self.tie.iter_mut().zip(other.tie) {
            *a += b;
        }
        for (a, b) in self.error.iter_mut().zip(other.error) {
            *a += b;
        }
        for (a, b) in self.decoded.iter_mut().zip(other.decoded) {
            *a += b;
        }
        self
    }
}

/// The full labeling of `{0,1}^n` for one instance.
///
/// Sets are not stored; they are regenerated on demand in ascending word
/// order from the score table.
#[derive(Clone, Debug)]
pub struct Classification<'a> {
    inst: &'a Instance,
    table: ScoreTable,
    counts: RegionCounts,
    metrics: Metrics,
}

impl<'a> Classification<'a> {
    pub fn new(inst: &'a Instance) -> Result<Self, ModelError> {
        Self::with_limit(inst, DEFAULT_ENUM_LIMIT)
    }

    pub fn with_limit(inst: &'a Instance, limit: usize) -> Result<Self, ModelError> {
        inst.check_enumerable(limit)?;
        let table = ScoreTable::new(inst);
        let m = inst.m();
        let stride = inst.n() + 1;
        let total = inst.output_count();
        let chunks = total.div_ceil(CHUNK);
        // Integer counts make the reduction order irrelevant.
        let counts = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = RegionCounts::zeros(m, stride);
                let mut dists = vec![0u32; m];
                let mut ranks = vec![0u32; m];
                for y in c * CHUNK..((c + 1) * CHUNK).min(total) {
                    let y = BitWord(y);
                    let top = scan(inst, &table, y, &mut dists, &mut ranks);
                    for i in 0..m {
                        let slot = i * stride + dists[i] as usize;
                        if ranks[i] < top.rank {
                            acc.error[slot] += 1;
                        } else if top.count >= 2 {
                            acc.tie[slot] += 1;
                        }
                    }
                    acc.decoded[top.first * stride + dists[top.first] as usize] += 1;
                }
                acc
            })
            .reduce(|| RegionCounts::zeros(m, stride), RegionCounts::merge);
        let weigh = |cells: &[u64]| -> Rational {
            let mut sum = Rational::zero();
            for (slot, &count) in cells.iter().enumerate() {
                if count > 0 {
                    let (r, d) = (slot / stride, (slot % stride) as u32);
                    sum += table.key(r, d) * Rational::from(count);
                }
            }
            sum * inst.p_pow_n()
        };
        let metrics = Metrics {
            a: Rational::one() - weigh(&counts.decoded),
            b: weigh(&counts.error),
            delta: weigh(&counts.tie),
        };
        Ok(Classification {
            inst,
            table,
            counts,
            metrics,
        })
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn table(&self) -> &ScoreTable {
        &self.table
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn counts(&self) -> &RegionCounts {
        &self.counts
    }

    /// All `2^n` outputs in ascending order.
    pub fn outputs(&self) -> impl Iterator<Item = BitWord> {
        (0..self.inst.output_count()).map(BitWord)
    }

    fn top(&self, y: BitWord) -> (Top, Vec<u32>) {
        let m = self.inst.m();
        let mut dists = vec![0u32; m];
        let mut ranks = vec![0u32; m];
        let top = scan(self.inst, &self.table, y, &mut dists, &mut ranks);
        (top, ranks)
    }

    /// Rank of `P(c_i, y)` among all joint weights of this instance.
    pub fn rank(&self, i: usize, y: BitWord) -> u32 {
        self.table.rank(i, distance(self.inst.codeword(i), y))
    }

    pub fn label(&self, i: usize, y: BitWord) -> Label {
        let (top, ranks) = self.top(y);
        label_of(&top, ranks[i])
    }

    /// Labels of `y` for every codeword.
    pub fn labels(&self, y: BitWord) -> Vec<Label> {
        let (top, ranks) = self.top(y);
        ranks.iter().map(|&r| label_of(&top, r)).collect()
    }

    pub fn is_tie(&self, i: usize, y: BitWord) -> bool {
        self.label(i, y) == Label::Tie
    }

    pub fn is_error(&self, i: usize, y: BitWord) -> bool {
        self.label(i, y) == Label::Error
    }

    /// `T_i`, ascending.
    pub fn tie_set(&self, i: usize) -> Vec<BitWord> {
        self.collect(i, Label::Tie)
    }

    /// `N_i`, ascending.
    pub fn error_set(&self, i: usize) -> Vec<BitWord> {
        self.collect(i, Label::Error)
    }

    fn collect(&self, i: usize, want: Label) -> Vec<BitWord> {
        self.par_collect(|w, out| {
            if w.label(i) == want {
                out.push(w.y);
            }
        })
    }

    /// Visits every output in parallel and concatenates what `f` emits, in
    /// ascending word order.
    pub fn par_collect<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&WordView<'_>, &mut Vec<T>) + Sync,
    {
        let total = self.inst.output_count();
        let chunks = total.div_ceil(CHUNK);
        let m = self.inst.m();
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut dists = vec![0u32; m];
                let mut ranks = vec![0u32; m];
                let mut out = Vec::new();
                for y in c * CHUNK..((c + 1) * CHUNK).min(total) {
                    let y = BitWord(y);
                    let top = scan(self.inst, &self.table, y, &mut dists, &mut ranks);
                    let view = WordView {
                        y,
                        dists: &dists,
                        ranks: &ranks,
                        top_rank: top.rank,
                        top_count: top.count,
                    };
                    f(&view, &mut out);
                }
                out
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }

    /// `I_i(y)`: the other codewords tying with `c_i` at the maximum. Empty
    /// exactly when `y` is not in `T_i`.
    pub fn tie_indices(&self, i: usize, y: BitWord) -> Vec<usize> {
        let (top, ranks) = self.top(y);
        if label_of(&top, ranks[i]) != Label::Tie {
            return Vec::new();
        }
        (0..ranks.len()).filter(|&h| h != i && ranks[h] == ranks[i]).collect()
    }

    /// MAP decision with ties broken toward the least index.
    pub fn decode(&self, y: BitWord) -> usize {
        self.top(y).0.first
    }
}

fn label_of(top: &Top, rank: u32) -> Label {
    if rank < top.rank {
        Label::Error
    } else if top.count >= 2 {
        Label::Tie
    } else {
        Label::Correct
    }
}

#[inline]
pub(crate) fn scan(inst: &Instance, table: &ScoreTable, y: BitWord, dists: &mut [u32], ranks: &mut [u32]) -> Top {
    let mut top = Top {
        rank: 0,
        count: 0,
        first: 0,
    };
    for (r, c) in inst.codewords().iter().enumerate() {
        let d = distance(*c, y);
        let rank = table.rank(r, d);
        dists[r] = d;
        ranks[r] = rank;
        if top.count == 0 || rank > top.rank {
            top = Top {
                rank,
                count: 1,
                first: r,
            };
        } else if rank == top.rank {
            top.count += 1;
        }
    }
    top
}

/// MAP decision for one output, ties to the least index. Needs no enumeration.
pub fn map_decode(inst: &Instance, y: BitWord) -> usize {
    let table = ScoreTable::new(inst);
    let mut dists = vec![0u32; inst.m()];
    let mut ranks = vec![0u32; inst.m()];
    scan(inst, &table, y, &mut dists, &mut ranks).first
}

pub fn tie_set(inst: &Instance, i: usize) -> Result<Vec<BitWord>, ModelError> {
    inst.check_index(i)?;
    Ok(Classification::new(inst)?.tie_set(i))
}

pub fn error_set(inst: &Instance, i: usize) -> Result<Vec<BitWord>, ModelError> {
    inst.check_index(i)?;
    Ok(Classification::new(inst)?.error_set(i))
}

/// `I_i(y)` computed directly from the joint weights of `y`.
pub fn tie_indices(inst: &Instance, i: usize, y: BitWord) -> Result<Vec<usize>, ModelError> {
    inst.check_index(i)?;
    let table = ScoreTable::new(inst);
    let ranks: Vec<u32> = (0..inst.m())
        .map(|r| table.rank(r, distance(inst.codeword(r), y)))
        .collect();
    let best_other = (0..inst.m()).filter(|&r| r != i).map(|r| ranks[r]).max();
    Ok(match best_other {
        Some(b) if b == ranks[i] => (0..inst.m()).filter(|&h| h != i && ranks[h] == b).collect(),
        _ => Vec::new(),
    })
}

pub fn metrics(inst: &Instance) -> Result<Metrics, ModelError> {
    Ok(Classification::new(inst)?.metrics().clone())
}

/// Outcome of the bound checks on `a_n`, `b_n`, `delta_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremReport {
    pub n: usize,
    pub q: Rational,
    pub metrics: Metrics,
    /// `b_n <= a_n <= b_n + delta_n`.
    pub sandwich: bool,
    /// `delta_n <= 2 q n b_n`.
    pub delta_bound: bool,
    /// `a_n <= (1 + 2 q n) b_n`.
    pub theorem: bool,
    /// `a_n <= (1 + q n) b_n`, checked only for uniform priors.
    pub uniform_theorem: Option<bool>,
    pub tie_free: bool,
    /// `a_n / b_n` when `b_n > 0`.
    pub a_over_b: Option<Rational>,
    /// `delta_n / b_n` when `b_n > 0`.
    pub delta_over_b: Option<Rational>,
    /// `1 + 2 q n`.
    pub theorem_factor: Rational,
}

impl TheoremReport {
    pub fn holds(&self) -> bool {
        self.sandwich && self.delta_bound && self.theorem && self.uniform_theorem.unwrap_or(true)
    }

    pub fn violations(&self) -> Vec<String> {
        let m = &self.metrics;
        let mut out = Vec::new();
        if !self.sandwich {
            out.push(format!(
                "sandwich b <= a <= b + delta fails: a = {}, b = {}, delta = {}",
                m.a, m.b, m.delta
            ));
        }
        if !self.delta_bound {
            out.push(format!(
                "delta = {} exceeds 2qn*b = {}",
                m.delta,
                (&self.theorem_factor - Rational::one()) * &m.b
            ));
        }
        if !self.theorem {
            out.push(format!(
                "a = {} exceeds (1+2qn)*b = {}",
                m.a,
                &self.theorem_factor * &m.b
            ));
        }
        if self.uniform_theorem == Some(false) {
            out.push(format!("uniform prior: a = {} exceeds (1+qn)*b", m.a));
        }
        out
    }
}

pub fn theorem_report(inst: &Instance, metrics: &Metrics) -> TheoremReport {
    let n = Rational::from(inst.n());
    let q = inst.q().clone();
    let qn = &q * &n;
    let two_qn = Rational::from(2i64) * &qn;
    let m = metrics;
    let sandwich = m.b <= m.a && m.a <= &m.b + &m.delta;
    let delta_bound = m.delta <= &two_qn * &m.b;
    let factor = Rational::one() + &two_qn;
    let theorem = m.a <= &factor * &m.b;
    let uniform_theorem = inst.is_uniform().then(|| m.a <= (Rational::one() + &qn) * &m.b);
    let ratio = |x: &Rational| (!m.b.is_zero()).then(|| x / &m.b);
    TheoremReport {
        n: inst.n(),
        q,
        metrics: m.clone(),
        sandwich,
        delta_bound,
        theorem,
        uniform_theorem,
        tie_free: m.delta.is_zero(),
        a_over_b: ratio(&m.a),
        delta_over_b: ratio(&m.delta),
        theorem_factor: factor,
    }
}

pub fn verify_theorem(inst: &Instance) -> Result<TheoremReport, ModelError> {
    let c = Classification::new(inst)?;
    Ok(theorem_report(inst, c.metrics()))
}

/// One output's row of the membership table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureRow {
    pub y: BitWord,
    /// Per codeword: `d(c_r, y) - e_r` when every weight is `c q^(e_r)` with
    /// a common `c`, plain `d(c_r, y)` otherwise. Smaller means more likely.
    pub scores: Vec<i64>,
    /// `I_r(y)` per codeword, 0-based.
    pub ties: Vec<Vec<usize>>,
}

/// Distances (shifted by the weight exponents where that is exact) and tie
/// sets for every output, in ascending word order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureTable {
    /// Whether `scores` carry the exponent shift.
    pub shifted: bool,
    pub headers: Vec<String>,
    pub rows: Vec<MeasureRow>,
}

pub fn measure_table(cls: &Classification<'_>) -> MeasureTable {
    let inst = cls.instance();
    let monomials: Option<Vec<(&Rational, i32)>> = inst.weights().iter().map(|w| w.as_monomial()).collect();
    let exps: Option<Vec<i64>> = monomials.and_then(|ms| {
        let c = ms[0].0;
        ms.iter()
            .all(|(ci, _)| *ci == c)
            .then(|| ms.iter().map(|(_, e)| *e as i64).collect())
    });
    let shifted = exps.is_some();
    let exps = exps.unwrap_or_else(|| vec![0; inst.m()]);
    let headers = (0..inst.m())
        .map(|r| {
            let base = format!("d({},y)", inst.word(inst.codeword(r)));
            match -exps[r] {
                0 => base,
                e if e > 0 => format!("{base}+{e}"),
                e => format!("{base}{e}"),
            }
        })
        .collect();
    let rows = cls
        .outputs()
        .map(|y| MeasureRow {
            y,
            scores: (0..inst.m())
                .map(|r| distance(inst.codeword(r), y) as i64 - exps[r])
                .collect(),
            ties: (0..inst.m()).map(|r| cls.tie_indices(r, y)).collect(),
        })
        .collect();
    MeasureTable { shifted, headers, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_instance;
    use crate::weights::parse_weight;

    fn inst(code: &[&str], w: &[&str], p: (i64, i64)) -> Instance {
        let w = w.iter().map(|t| parse_weight(t).unwrap()).collect();
        build_instance(code, w, Rational::new(p.0, p.1)).unwrap()
    }

    fn example1() -> Instance {
        inst(&["0000", "0101", "0110", "0111"], &["q^2", "1", "1", "q^-2"], (1, 3))
    }

    fn words(list: &[&str]) -> Vec<BitWord> {
        list.iter().map(|s| BitWord::parse(s).unwrap().0).collect()
    }

    fn word(s: &str) -> BitWord {
        BitWord::parse(s).unwrap().0
    }

    #[test]
    fn example1_tie_sets() {
        let e = example1();
        let c = Classification::new(&e).unwrap();
        assert_eq!(c.tie_set(0), words(&["0101", "0110", "0111", "1101", "1110", "1111"]));
        assert!(c.tie_set(3).is_empty());
        assert!(c.error_set(0).is_empty());
        assert_eq!(c.error_set(3).len(), 16);
    }

    #[test]
    fn example1_tie_indices() {
        let e = example1();
        assert_eq!(tie_indices(&e, 0, word("0111")).unwrap(), vec![1, 2]);
        assert!(tie_indices(&e, 3, word("0111")).unwrap().is_empty());
        assert_eq!(tie_indices(&e, 1, word("0101")).unwrap(), vec![0]);
        let c = Classification::new(&e).unwrap();
        assert_eq!(c.tie_indices(0, word("0111")), vec![1, 2]);
    }

    #[test]
    fn decoding_breaks_ties_low() {
        let e = example1();
        assert_eq!(map_decode(&e, word("0000")), 0);
        assert_eq!(map_decode(&e, word("0111")), 0);
        let u = inst(&["00", "11"], &["1", "1"], (1, 4));
        assert_eq!(map_decode(&u, word("01")), 0);
    }

    #[test]
    fn antipodal_pair() {
        let u = inst(&["00", "11"], &["1", "1"], (1, 4));
        let c = Classification::new(&u).unwrap();
        assert_eq!(c.tie_set(0), words(&["01", "10"]));
        assert_eq!(c.error_set(0), words(&["11"]));
        // Frozen from an independent fraction-based brute force over all 4 outputs.
        let m = c.metrics();
        assert_eq!(m.delta, Rational::new(3, 8));
        assert_eq!(m.b, Rational::new(1, 16));
        assert_eq!(m.a, Rational::new(1, 4));
        let r = theorem_report(&u, m);
        assert!(r.holds());
        assert_eq!(r.uniform_theorem, Some(true));
    }

    #[test]
    fn example1_metrics_golden() {
        // Frozen from an independent fraction-based brute force over all 16 outputs.
        let e = example1();
        let m = metrics(&e).unwrap();
        assert_eq!(m.a, Rational::new(9, 25));
        assert_eq!(m.b, Rational::new(49, 225));
        assert_eq!(m.delta, Rational::new(176, 675));
        let r = verify_theorem(&e).unwrap();
        assert!(r.holds() && !r.tie_free);
        assert_eq!(r.uniform_theorem, None);
    }

    #[test]
    fn odd_repetition_is_tie_free() {
        let u = inst(&["00000", "11111"], &["1", "1"], (1, 5));
        let m = metrics(&u).unwrap();
        assert!(m.delta.is_zero());
        assert_eq!(m.a, m.b);
        let r = verify_theorem(&u).unwrap();
        assert!(r.tie_free && r.holds());
    }

    #[test]
    fn enumeration_limit_enforced() {
        let n = 30;
        let e = inst(&[&"0".repeat(n), &"1".repeat(n)], &["1", "1"], (1, 3));
        assert!(matches!(
            Classification::new(&e).unwrap_err(),
            ModelError::EnumerationLimit { n: 30, limit: 24 }
        ));
        assert_eq!(map_decode(&e, BitWord(0)), 0);
    }

    #[test]
    fn labels_partition_outputs() {
        let e = example1();
        let c = Classification::new(&e).unwrap();
        for i in 0..e.m() {
            let t = c.tie_set(i).len();
            let n = c.error_set(i).len();
            let ok = c.outputs().filter(|&y| c.label(i, y) == Label::Correct).count();
            assert_eq!(t + n + ok, 16);
        }
    }

    #[test]
    fn example1_measure_rows() {
        let e = example1();
        let c = Classification::new(&e).unwrap();
        let t = measure_table(&c);
        assert!(t.shifted);
        assert_eq!(t.headers, vec!["d(0000,y)-2", "d(0101,y)", "d(0110,y)", "d(0111,y)+2"]);
        let row = &t.rows[0b0111];
        assert_eq!(row.scores, vec![1, 1, 1, 2]);
        assert_eq!(row.ties, vec![vec![1, 2], vec![0, 2], vec![0, 1], vec![]]);
    }
}
