//! Problem instances: a binary code, a prior over it, and a BSC crossover.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::weights::{parse_prior_weight, LaurentWeight, Rational, WeightParseError};

/// Longest blocklength a [`BitWord`] can hold.
pub const MAX_BLOCKLENGTH: usize = 64;

/// Default cap on `n` for operations that enumerate all `2^n` outputs.
pub const DEFAULT_ENUM_LIMIT: usize = 24;

/// An `n`-bit word. Index 1 (the leftmost character of the text form) is the
/// most significant of the `n` low bits, so ascending integer order matches
/// lexicographic order of the bit strings.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct BitWord(pub u64);

impl BitWord {
    pub fn bits(self) -> u64 {
        self.0
    }

    /// Parses a string over `{0, 1}`.
    pub fn parse(text: &str) -> Result<(BitWord, usize), ModelError> {
        let n = text.len();
        if n == 0 {
            return Err(ModelError::EmptyWord);
        }
        if n > MAX_BLOCKLENGTH {
            return Err(ModelError::BlocklengthTooLarge {
                n,
                max: MAX_BLOCKLENGTH,
            });
        }
        let mut bits = 0u64;
        for (idx, ch) in text.chars().enumerate() {
            bits <<= 1;
            match ch {
                '0' => {}
                '1' => bits |= 1,
                _ => {
                    return Err(ModelError::BadBit {
                        word: text.to_string(),
                        position: idx + 1,
                    })
                }
            }
        }
        Ok((BitWord(bits), n))
    }

    /// Renders the low `n` bits, index 1 leftmost.
    pub fn to_string_n(self, n: usize) -> String {
        (1..=n).map(|t| if self.bit(n, t) { '1' } else { '0' }).collect()
    }

    /// Bit at 1-based index `t`.
    pub fn bit(self, n: usize, t: usize) -> bool {
        debug_assert!((1..=n).contains(&t));
        (self.0 >> (n - t)) & 1 == 1
    }

    pub fn flip(self, n: usize, t: usize) -> BitWord {
        BitWord(self.0 ^ (1u64 << (n - t)))
    }

    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }
}

impl std::ops::BitXor for BitWord {
    type Output = BitWord;
    fn bitxor(self, rhs: BitWord) -> BitWord {
        BitWord(self.0 ^ rhs.0)
    }
}

/// A subset of `[n]` stored as a mask in the same bit layout as [`BitWord`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct IndexSet(pub u64);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    /// All of `[n]`.
    pub fn full(n: usize) -> IndexSet {
        IndexSet(full_mask(n))
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, indices: I) -> IndexSet {
        IndexSet(
            indices
                .into_iter()
                .inspect(|&t| assert!((1..=n).contains(&t), "index {t} outside [1, {n}]"))
                .fold(0, |m, t| m | (1u64 << (n - t))),
        )
    }

    /// Members in ascending (1-based) order.
    pub fn indices(self, n: usize) -> Vec<usize> {
        (1..=n).filter(|&t| self.contains(n, t)).collect()
    }

    pub fn contains(self, n: usize, t: usize) -> bool {
        (self.0 >> (n - t)) & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn intersect(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & other.0)
    }

    pub fn minus(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & !other.0)
    }

    pub fn complement(self, n: usize) -> IndexSet {
        IndexSet(!self.0 & full_mask(n))
    }

    pub fn is_subset(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// `{t1,t2,...}` with 1-based indices.
    pub fn display(self, n: usize) -> String {
        let parts: Vec<String> = self.indices(n).iter().map(|t| t.to_string()).collect();
        format!("{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexSet({:#b})", self.0)
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// `d(x, y | S)`: positions in `S` where `x` and `y` differ. `S = ∅` gives 0.
pub fn restricted_distance(x: BitWord, y: BitWord, s: IndexSet) -> u32 {
    ((x.0 ^ y.0) & s.0).count_ones()
}

/// Plain Hamming distance.
pub fn distance(x: BitWord, y: BitWord) -> u32 {
    (x.0 ^ y.0).count_ones()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("empty codeword string")]
    EmptyWord,
    #[error("codeword {word:?} has a character other than 0/1 at index {position}")]
    BadBit { word: String, position: usize },
    #[error("codeword {index} has length {found}, expected blocklength n = {expected}")]
    LengthMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("blocklength n = {n} exceeds the supported maximum {max}")]
    BlocklengthTooLarge { n: usize, max: usize },
    #[error("a code needs at least 2 codewords, got M = {0}")]
    TooFewCodewords(usize),
    #[error("M = {m} codewords do not fit in {{0,1}}^{n}")]
    TooManyCodewords { m: usize, n: usize },
    #[error("codewords must be pairwise distinct: codeword {first} equals codeword {second}")]
    DuplicateCodeword { first: usize, second: usize },
    #[error("{codewords} codewords but {weights} prior weights")]
    WeightCountMismatch { codewords: usize, weights: usize },
    #[error("prior weight {index} evaluates to {value} at q = {q}; every codeword needs positive probability")]
    NonPositiveWeight { index: usize, value: String, q: String },
    #[error("crossover probability p = {0} is not in (0, 1/2)")]
    CrossoverOutOfRange(Rational),
    #[error("declared n = {declared} but codewords have length {actual}")]
    DeclaredLengthMismatch { declared: usize, actual: usize },
    #[error("prior weight {index}: {source}")]
    Weight {
        index: usize,
        #[source]
        source: WeightParseError,
    },
    #[error("invalid crossover probability: {0}")]
    BadCrossover(String),
    #[error("codeword index {index} out of range 1..={m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("n = {n} exceeds the enumeration limit {limit}")]
    EnumerationLimit { n: usize, limit: usize },
}

/// A validated (code, prior, channel) triple.
///
/// Codeword indices are 0-based in the API; every rendered report shows them
/// 1-based.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Instance {
    n: usize,
    codewords: Vec<BitWord>,
    weights: Vec<LaurentWeight>,
    prior: Vec<Rational>,
    p: Rational,
    q: Rational,
    p_pow_n: Rational,
}

impl Instance {
    /// Validates and normalizes: `prior_i = w_i(q) / sum_j w_j(q)`.
    pub fn new(
        n: usize,
        codewords: Vec<BitWord>,
        weights: Vec<LaurentWeight>,
        p: Rational,
    ) -> Result<Instance, ModelError> {
        if n == 0 {
            return Err(ModelError::EmptyWord);
        }
        if n > MAX_BLOCKLENGTH {
            return Err(ModelError::BlocklengthTooLarge {
                n,
                max: MAX_BLOCKLENGTH,
            });
        }
        let m = codewords.len();
        if m < 2 {
            return Err(ModelError::TooFewCodewords(m));
        }
        if n < 63 && m as u128 > 1u128 << n {
            return Err(ModelError::TooManyCodewords { m, n });
        }
        if weights.len() != m {
            return Err(ModelError::WeightCountMismatch {
                codewords: m,
                weights: weights.len(),
            });
        }
        let mask = full_mask(n);
        if let Some(idx) = codewords.iter().position(|c| c.0 & !mask != 0) {
            return Err(ModelError::LengthMismatch {
                index: idx + 1,
                expected: n,
                found: 64 - codewords[idx].0.leading_zeros() as usize,
            });
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&i| (codewords[i], i));
        for pair in order.windows(2) {
            if codewords[pair[0]] == codewords[pair[1]] {
                return Err(ModelError::DuplicateCodeword {
                    first: pair[0] + 1,
                    second: pair[1] + 1,
                });
            }
        }
        if !p.is_positive() || p >= Rational::new(1, 2) {
            return Err(ModelError::CrossoverOutOfRange(p));
        }
        let q = (Rational::one() - &p) / &p;
        let values: Vec<Rational> = weights.iter().map(|w| w.eval(&q)).collect();
        if let Some(idx) = values.iter().position(|v| !v.is_positive()) {
            return Err(ModelError::NonPositiveWeight {
                index: idx + 1,
                value: values[idx].to_string(),
                q: q.to_string(),
            });
        }
        let total: Rational = values.iter().sum();
        let prior = values.iter().map(|v| v / &total).collect();
        let p_pow_n = p.pow(n as i32);
        Ok(Instance {
            n,
            codewords,
            weights,
            prior,
            p,
            q,
            p_pow_n,
        })
    }

    /// Same as [`Instance::new`] with rational weights.
    pub fn with_prior(
        n: usize,
        codewords: Vec<BitWord>,
        prior: Vec<Rational>,
        p: Rational,
    ) -> Result<Instance, ModelError> {
        let weights = prior.into_iter().map(LaurentWeight::constant).collect();
        Instance::new(n, codewords, weights, p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of codewords `M`.
    pub fn m(&self) -> usize {
        self.codewords.len()
    }

    pub fn codewords(&self) -> &[BitWord] {
        &self.codewords
    }

    pub fn codeword(&self, i: usize) -> BitWord {
        self.codewords[i]
    }

    /// The weight expressions as supplied (before normalization).
    pub fn weights(&self) -> &[LaurentWeight] {
        &self.weights
    }

    /// Normalized prior; sums to 1.
    pub fn prior(&self) -> &[Rational] {
        &self.prior
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    /// `(1 - p) / p`, always `> 1`.
    pub fn q(&self) -> &Rational {
        &self.q
    }

    pub fn p_pow_n(&self) -> &Rational {
        &self.p_pow_n
    }

    pub fn is_uniform(&self) -> bool {
        self.prior.windows(2).all(|w| w[0] == w[1])
    }

    /// Number of outputs, `2^n`. Only meaningful below the enumeration limit.
    pub fn output_count(&self) -> u64 {
        1u64 << self.n
    }

    pub fn word(&self, y: BitWord) -> String {
        y.to_string_n(self.n)
    }

    /// `S_{i,j}`: positions where codewords `i` and `j` differ.
    pub fn differ_mask(&self, i: usize, j: usize) -> IndexSet {
        IndexSet((self.codewords[i].0 ^ self.codewords[j].0) & full_mask(self.n))
    }

    /// Fails when enumerating `2^n` outputs would exceed `limit`.
    pub fn check_enumerable(&self, limit: usize) -> Result<(), ModelError> {
        if self.n > limit || self.n >= 63 {
            return Err(ModelError::EnumerationLimit { n: self.n, limit });
        }
        Ok(())
    }

    pub fn check_index(&self, i: usize) -> Result<(), ModelError> {
        if i >= self.m() {
            return Err(ModelError::IndexOutOfRange {
                index: i + 1,
                m: self.m(),
            });
        }
        Ok(())
    }

    /// Instance-file form; priors are echoed as exact normalized rationals so
    /// the file rebuilds an equal instance.
    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            n: self.n,
            codewords: self.codewords.iter().map(|c| self.word(*c)).collect(),
            prior_weights: self.prior.iter().map(|w| w.to_string()).collect(),
            p: self.p.to_string(),
        }
    }

    /// Same instance with its weights replaced by the normalized prior.
    pub fn normalized(&self) -> Instance {
        Instance::with_prior(self.n, self.codewords.clone(), self.prior.clone(), self.p.clone())
            .expect("normalizing a valid instance")
    }
}

/// `P(c_i, y) = prior_i * p^n * q^(n - d(c_i, y))`.
pub fn joint_weight(inst: &Instance, i: usize, y: BitWord) -> Result<Rational, ModelError> {
    inst.check_index(i)?;
    let d = distance(inst.codewords[i], y) as i32;
    Ok(&inst.prior[i] * inst.p_pow_n() * inst.q.pow(inst.n as i32 - d))
}

/// Builds an instance from bit strings and parsed weights.
pub fn build_instance<S: AsRef<str>>(
    codewords: &[S],
    weights: Vec<LaurentWeight>,
    p: Rational,
) -> Result<Instance, ModelError> {
    let mut n = None;
    let mut words = Vec::with_capacity(codewords.len());
    for (idx, text) in codewords.iter().enumerate() {
        let (word, len) = BitWord::parse(text.as_ref())?;
        match n {
            None => n = Some(len),
            Some(expected) if expected != len => {
                return Err(ModelError::LengthMismatch {
                    index: idx + 1,
                    expected,
                    found: len,
                })
            }
            _ => {}
        }
        words.push(word);
    }
    let n = n.ok_or(ModelError::TooFewCodewords(0))?;
    Instance::new(n, words, weights, p)
}

/// The JSON instance file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub codewords: Vec<String>,
    pub prior_weights: Vec<String>,
    pub p: String,
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<Instance, ModelError> {
        let weights = self
            .prior_weights
            .iter()
            .enumerate()
            .map(|(idx, text)| parse_prior_weight(text).map_err(|source| ModelError::Weight { index: idx + 1, source }))
            .collect::<Result<Vec<_>, _>>()?;
        let p: Rational = self
            .p
            .parse()
            .map_err(|e: crate::weights::ParseRationalError| ModelError::BadCrossover(e.to_string()))?;
        let inst = build_instance(&self.codewords, weights, p)?;
        if inst.n() != self.n {
            return Err(ModelError::DeclaredLengthMismatch {
                declared: self.n,
                actual: inst.n(),
            });
        }
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::parse_weight;

    fn weights(texts: &[&str]) -> Vec<LaurentWeight> {
        texts.iter().map(|t| parse_weight(t).unwrap()).collect()
    }

    fn example1() -> Instance {
        build_instance(
            &["0000", "0101", "0110", "0111"],
            weights(&["q^2", "1", "1", "q^-2"]),
            Rational::new(1, 3),
        )
        .unwrap()
    }

    #[test]
    fn example1_prior() {
        let inst = example1();
        let expect: Vec<Rational> = [16, 4, 4, 1].iter().map(|&k| Rational::new(k, 25)).collect();
        assert_eq!(inst.prior(), &expect[..]);
        assert_eq!(inst.q(), &Rational::from(2i64));
    }

    #[test]
    fn uniform_prior() {
        let inst = build_instance(&["00", "11"], weights(&["1", "1"]), Rational::new(1, 4)).unwrap();
        assert_eq!(inst.prior(), &[Rational::new(1, 2), Rational::new(1, 2)]);
        assert!(inst.is_uniform());
    }

    #[test]
    fn validation_errors() {
        let dup = build_instance(&["000", "000"], weights(&["1", "1"]), Rational::new(1, 4));
        assert_eq!(dup.unwrap_err(), ModelError::DuplicateCodeword { first: 1, second: 2 });
        let p = build_instance(&["00", "11"], weights(&["1", "1"]), Rational::new(3, 4));
        assert!(matches!(p.unwrap_err(), ModelError::CrossoverOutOfRange(_)));
        let half = build_instance(&["00", "11"], weights(&["1", "1"]), Rational::new(1, 2));
        assert!(matches!(half.unwrap_err(), ModelError::CrossoverOutOfRange(_)));
        let one = build_instance(&["00"], weights(&["1"]), Rational::new(1, 4));
        assert_eq!(one.unwrap_err(), ModelError::TooFewCodewords(1));
        let neg = build_instance(&["00", "11"], weights(&["1", "q - 3"]), Rational::new(1, 3));
        assert!(matches!(
            neg.unwrap_err(),
            ModelError::NonPositiveWeight { index: 2, .. }
        ));
        let len = build_instance(&["00", "110"], weights(&["1", "1"]), Rational::new(1, 3));
        assert!(matches!(len.unwrap_err(), ModelError::LengthMismatch { index: 2, .. }));
        let bad = build_instance(&["0a", "11"], weights(&["1", "1"]), Rational::new(1, 3));
        assert!(matches!(bad.unwrap_err(), ModelError::BadBit { position: 2, .. }));
    }

    #[test]
    fn restricted_distance_examples() {
        let w = |s: &str| BitWord::parse(s).unwrap().0;
        assert_eq!(restricted_distance(w("0101"), w("0111"), IndexSet::full(4)), 1);
        assert_eq!(restricted_distance(w("0101"), w("0111"), IndexSet::EMPTY), 0);
        let s = IndexSet::from_indices(5, [2, 3, 4, 5]);
        assert_eq!(restricted_distance(w("00000"), w("01111"), s), 4);
    }

    #[test]
    fn joint_weight_examples() {
        let inst = example1();
        let y = BitWord::parse("0111").unwrap().0;
        assert_eq!(joint_weight(&inst, 0, y).unwrap(), Rational::new(32, 2025));
        let c3 = inst.codeword(2);
        let expect = &inst.prior()[2] * inst.p_pow_n() * inst.q().pow(4);
        assert_eq!(joint_weight(&inst, 2, c3).unwrap(), expect);
        assert!(joint_weight(&inst, 4, y).is_err());

        let uni = build_instance(&["00", "11"], weights(&["1", "1"]), Rational::new(1, 4)).unwrap();
        let y = BitWord::parse("11").unwrap().0;
        assert_eq!(joint_weight(&uni, 0, y).unwrap(), Rational::new(1, 32));
    }

    #[test]
    fn word_layout() {
        let (w, n) = BitWord::parse("0111").unwrap();
        assert_eq!((w.0, n), (7, 4));
        assert!(!w.bit(4, 1) && w.bit(4, 4));
        assert_eq!(w.flip(4, 1).to_string_n(4), "1111");
        assert_eq!(IndexSet::from_indices(4, [2, 4]).indices(4), vec![2, 4]);
        assert_eq!(IndexSet::from_indices(4, [2, 4]).display(4), "{2,4}");
    }

    #[test]
    fn file_round_trip() {
        let inst = example1();
        let file = inst.to_file();
        assert_eq!(file.prior_weights, vec!["16/25", "4/25", "4/25", "1/25"]);
        let back = file.to_instance().unwrap();
        assert_eq!(back.prior(), inst.prior());
        assert_eq!(back, inst.normalized());
    }

    #[test]
    fn file_rejects_unknown_fields() {
        let text = r#"{"n":2,"codewords":["00","11"],"prior_weights":["1","1"],"p":"1/4","x":1}"#;
        assert!(serde_json::from_str::<InstanceFile>(text).is_err());
    }
}
