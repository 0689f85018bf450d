//! Executable properties over an [`Analysis`]. Every check returns data; a
//! failing property carries human-readable violation records with 1-based
//! indices.

use std::collections::HashMap;

use serde::Serialize;

use crate::classify::Label;
use crate::model::{distance, BitWord};
use crate::weights::Rational;

use super::families::{in_n_level, in_t_level, mass, Atom};
use super::refine::ones;
use super::{Analysis, PartitionError};

/// Violation records kept per report; the total is still counted.
const KEEP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    /// Nothing to check on this instance (for example no ties at all).
    Vacuous,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub property: String,
    pub outcome: Outcome,
    /// Number of items the property was evaluated on.
    pub checked: usize,
    pub violation_count: usize,
    pub violations: Vec<String>,
}

impl CheckReport {
    pub(crate) fn new(property: &str) -> Self {
        CheckReport {
            property: property.to_string(),
            outcome: Outcome::Vacuous,
            checked: 0,
            violation_count: 0,
            violations: Vec::new(),
        }
    }

    pub(crate) fn fail(&mut self, msg: String) {
        self.violation_count += 1;
        if self.violations.len() < KEEP {
            self.violations.push(msg);
        }
    }

    pub(crate) fn finish(mut self) -> Self {
        self.outcome = if self.violation_count > 0 {
            Outcome::Fail
        } else if self.checked == 0 {
            Outcome::Vacuous
        } else {
            Outcome::Pass
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.outcome != Outcome::Fail
    }
}

fn word(a: &Analysis<'_>, y: BitWord) -> String {
    a.instance().word(y)
}

fn sorted(mut v: Vec<BitWord>) -> Vec<BitWord> {
    v.sort_unstable();
    v
}

/// Cells, incremental unions and the level map of every pair.
pub fn check_refinement(a: &Analysis<'_>) -> CheckReport {
    let inst = a.instance();
    let n = inst.n();
    let mut rep = CheckReport::new("refinement");
    for pair in a.pairs() {
        let r = &pair.refinement;
        let (i, j) = (r.i(), r.j());
        rep.checked += 1;
        let tag = format!("pair ({}, {})", i + 1, j + 1);
        if r.differ.support != inst.differ_mask(j, i)
            || r.differ.len as u32 != distance(inst.codeword(i), inst.codeword(j))
        {
            rep.fail(format!(
                "{tag}: differ-set is not symmetric or its size is not d(c_i, c_j)"
            ));
        }
        let mut union = crate::model::IndexSet::EMPTY;
        let mut total = 0;
        let mut last = 0;
        for c in &r.cells {
            if c.index <= last || c.index > r.cell_count() || c.members.is_empty() {
                rep.fail(format!("{tag}: bad cell index {}", c.index));
            }
            last = c.index;
            union = union.union(c.members);
            total += c.members.len();
            for &o in &r.others {
                let d = ones(inst.codeword(i), inst.codeword(o), c.members);
                let expect = if r.lambda(c.index, o) == Some(true) {
                    c.members.len()
                } else {
                    0
                };
                if d != expect {
                    rep.fail(format!(
                        "{tag}: cell {} has d(c_i, c_{} | cell) = {d}, expected {expect}",
                        c.index,
                        o + 1
                    ));
                }
            }
        }
        if union != r.differ.support || total != r.differ.len {
            rep.fail(format!("{tag}: cells do not partition {}", r.differ.support.display(n)));
        }
        let l = r.differ.len;
        for lv in &r.levels {
            let prev = r.prefix(lv.eta - 1);
            let cur = r.prefix(lv.eta);
            let ok = prev == lv.before
                && cur == lv.window
                && if lv.k + 1 < l {
                    prev.len() <= lv.k + 1 && lv.k + 1 < cur.len()
                } else {
                    cur.len() == l
                };
            if !ok {
                rep.fail(format!("{tag}: eta_{} = {} violates its bounds", lv.k, lv.eta));
            }
        }
    }
    rep.finish()
}

/// `T_{j|i}` and `T~_{j|i}` over `j` partition `T_i`; the `N_{j|i}` are
/// disjoint subsets of `N_i`.
pub fn check_prop1(a: &Analysis<'_>) -> CheckReport {
    let cls = a.classification();
    let f = a.families();
    let m = a.instance().m();
    let mut rep = CheckReport::new("prop1_partition");
    for i in 0..m {
        let tie = cls.tie_set(i);
        if !tie.is_empty() {
            rep.checked += 1;
        }
        let mut parts = Vec::new();
        for j in (0..m).filter(|&j| j != i) {
            parts.extend_from_slice(f.tied(i, j));
            parts.extend_from_slice(f.residual(i, j));
        }
        if sorted(parts) != tie {
            rep.fail(format!(
                "T_{} is not the disjoint union of its T and T~ families",
                i + 1
            ));
        }
        let err = cls.error_set(i);
        let mut matched = Vec::new();
        for j in (0..m).filter(|&j| j != i) {
            matched.extend_from_slice(f.matched(i, j));
        }
        let matched = sorted(matched);
        if matched.windows(2).any(|w| w[0] == w[1]) {
            rep.fail(format!("the N families of codeword {} overlap", i + 1));
        }
        for y in matched {
            if err.binary_search(&y).is_err() {
                rep.fail(format!(
                    "{} lies in an N family of codeword {} but not in N_{}",
                    word(a, y),
                    i + 1,
                    i + 1
                ));
            }
        }
    }
    rep.finish()
}

/// Results of the checks attached to the residual families.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Prop2Report {
    pub prop2: CheckReport,
    pub exactly_once: CheckReport,
    pub inequality: CheckReport,
    pub tied_mass: Rational,
    pub residual_mass: Rational,
}

impl Prop2Report {
    pub fn reports(&self) -> [&CheckReport; 3] {
        [&self.prop2, &self.exactly_once, &self.inequality]
    }
}

/// Every `y in T~_{j|i}` is, for each `h in I_i(y)`, in some `T_{l|h}` with
/// `l in I_h(y)`, and the weights of `i` and `h` agree at `y`. Each such `y`
/// appears in one residual family only, and the residual mass never exceeds
/// the mass of the `T` families.
pub fn check_prop2(a: &Analysis<'_>) -> Prop2Report {
    let inst = a.instance();
    let cls = a.classification();
    let table = cls.table();
    let f = a.families();
    let m = inst.m();
    let mut prop2 = CheckReport::new("prop2_residual_cover");
    let mut once = CheckReport::new("residual_exactly_once");
    let mut seen: HashMap<BitWord, Vec<(usize, usize)>> = HashMap::new();
    for (i, j) in f.pairs() {
        for &y in f.residual(i, j) {
            prop2.checked += 1;
            seen.entry(y).or_default().push((i, j));
            let d: Vec<u32> = inst.codewords().iter().map(|&c| distance(c, y)).collect();
            let rank: Vec<u32> = (0..m).map(|r| table.rank(r, d[r])).collect();
            for h in (0..m).filter(|&h| h != i && rank[h] == rank[i]) {
                let covered = (0..m)
                    .filter(|&l| l != h && rank[l] == rank[h])
                    .any(|l| f.tied(h, l).binary_search(&y).is_ok());
                if !covered {
                    prop2.fail(format!(
                        "{} in T~({}|{}): no T(l|{}) with l in I_{}(y) contains it",
                        word(a, y),
                        j + 1,
                        i + 1,
                        h + 1,
                        h + 1
                    ));
                }
                if table.key(i, d[i]) != table.key(h, d[h]) {
                    prop2.fail(format!("{}: P(c_{}, y) != P(c_{}, y)", word(a, y), i + 1, h + 1));
                }
            }
        }
    }
    let mut repeated: Vec<_> = seen.into_iter().filter(|(_, v)| v.len() > 1).collect();
    repeated.sort();
    once.checked = prop2.checked;
    for (y, owners) in repeated {
        let list: Vec<String> = owners.iter().map(|(i, j)| format!("T~({}|{})", j + 1, i + 1)).collect();
        once.fail(format!("{} appears in {}", word(a, y), list.join(", ")));
    }
    let (tied_mass, residual_mass) = a.family_masses();
    let mut inequality = CheckReport::new("residual_mass_le_tied_mass");
    if !cls.metrics().delta.is_zero() {
        inequality.checked = 1;
    }
    if residual_mass > tied_mass {
        inequality.fail(format!("sum P(T~) = {residual_mass} exceeds sum P(T) = {tied_mass}"));
    }
    Prop2Report {
        prop2: prop2.finish(),
        exactly_once: once.finish(),
        inequality: inequality.finish(),
        tied_mass,
        residual_mass,
    }
}

/// Levels partition `T_{j|i}` under the formal membership test; N-levels are
/// disjoint subsets of `N_{j|i}`.
pub fn check_prop3(a: &Analysis<'_>) -> CheckReport {
    let inst = a.instance();
    let mut rep = CheckReport::new("prop3_levels");
    for pair in a.pairs() {
        let lp = &pair.levels;
        let r = &pair.refinement;
        let (i, j) = (lp.i, lp.j);
        let tied = a.families().tied(i, j);
        if tied.is_empty() {
            continue;
        }
        rep.checked += 1;
        let ci = inst.codeword(i);
        for &y in &lp.unassigned {
            rep.fail(format!("{} in T({}|{}) belongs to no level", word(a, y), j + 1, i + 1));
        }
        for (k, level) in lp.t_levels.iter().enumerate() {
            for &y in level {
                let hits: Vec<usize> = r
                    .levels
                    .iter()
                    .filter(|lv| in_t_level(lv, ci, y))
                    .map(|lv| lv.k)
                    .collect();
                if hits != [k] {
                    rep.fail(format!(
                        "{} assigned to T({}|{})({k}) but the membership test accepts levels {:?}",
                        word(a, y),
                        j + 1,
                        i + 1,
                        hits
                    ));
                }
            }
        }
        let matched = a.families().matched(i, j);
        let mut all: Vec<BitWord> = lp.n_levels.iter().flatten().copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            rep.fail(format!("N-levels of pair ({}, {}) overlap", i + 1, j + 1));
        }
        if all.iter().any(|y| matched.binary_search(y).is_err()) {
            rep.fail(format!(
                "an N-level of pair ({}, {}) leaves N({}|{})",
                i + 1,
                j + 1,
                j + 1,
                i + 1
            ));
        }
    }
    rep.finish()
}

/// Atoms partition each level; every N-atom is nonempty.
pub fn check_prop4(a: &Analysis<'_>) -> CheckReport {
    let n = a.instance().n();
    let mut rep = CheckReport::new("prop4_atoms");
    for pair in a.pairs() {
        let lp = &pair.levels;
        for (k, atoms) in lp.atoms.iter().enumerate() {
            let level = &lp.t_levels[k];
            if level.is_empty() {
                continue;
            }
            rep.checked += 1;
            let outside = pair.refinement.level(k).window.complement(n).0;
            let tag = format!("T({}|{})({k})", lp.j + 1, lp.i + 1);
            let union = sorted(atoms.iter().flat_map(|at| at.t.iter().copied()).collect());
            if &union != level {
                rep.fail(format!("atoms of {tag} do not partition the level"));
            }
            for at in atoms {
                let u = at.representative.0 & outside;
                if at.t.iter().chain(&at.n).any(|y| y.0 & outside != u) {
                    rep.fail(format!(
                        "atom of {} in {tag} mixes words outside the window",
                        word(a, at.representative)
                    ));
                }
                if at.n.is_empty() {
                    rep.fail(format!("N-atom of {} in {tag} is empty", word(a, at.representative)));
                }
            }
            let nunion: Vec<BitWord> = sorted(atoms.iter().flat_map(|at| at.n.iter().copied()).collect());
            if nunion.windows(2).any(|w| w[0] == w[1]) {
                rep.fail(format!("N-atoms of {tag} overlap"));
            }
        }
    }
    rep.finish()
}

pub(crate) fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    (0..k).fold(1u128, |acc, t| acc * (n - t) / (t + 1))
}

/// `|N(u;k)|` equals the binomial count of its window, and `|T(u;k)|` stays
/// below the two-term count of candidates.
pub fn check_atom_cardinality(a: &Analysis<'_>) -> CheckReport {
    let mut rep = CheckReport::new("atom_cardinality");
    for pair in a.pairs() {
        let lp = &pair.levels;
        for atom in lp.all_atoms() {
            rep.checked += 1;
            let lv = pair.refinement.level(atom.k);
            let (l0, l1, k) = (lv.before_len() as i64, lv.window_len() as i64, atom.k as i64);
            let want_n = binomial(l1 - l0, k + 1 - l0);
            if atom.n.len() as u128 != want_n {
                rep.fail(format!(
                    "N({}|{})({}; {k}) has {} words, expected {want_n}",
                    lp.j + 1,
                    lp.i + 1,
                    a.instance().word(atom.representative),
                    atom.n.len()
                ));
            }
            let cap_t = binomial(l0, l0 - 1) * binomial(l1 - l0, k - l0 + 1) + binomial(l1 - l0, k - l0);
            if atom.t.len() as u128 > cap_t {
                rep.fail(format!(
                    "T({}|{})({}; {k}) has {} words, above the count {cap_t}",
                    lp.j + 1,
                    lp.i + 1,
                    a.instance().word(atom.representative),
                    atom.t.len()
                ));
            }
        }
    }
    rep.finish()
}

/// Atom weight ratios: `P(c_i, T(u;k)) / P(c_i, N(u;k)) = q |T| / |N|` and
/// `|T| <= n |N|`.
pub fn check_prop9(a: &Analysis<'_>) -> CheckReport {
    let inst = a.instance();
    let cls = a.classification();
    let q = inst.q();
    let n = Rational::from(inst.n());
    let mut rep = CheckReport::new("prop9_atom_ratio");
    for pair in a.pairs() {
        let i = pair.levels.i;
        for atom in pair.levels.all_atoms() {
            rep.checked += 1;
            let tag = format!(
                "atom ({}; {}) of pair ({}, {})",
                inst.word(atom.representative),
                atom.k,
                i + 1,
                pair.levels.j + 1
            );
            if atom.n.is_empty() {
                rep.fail(format!("{tag}: empty N-atom"));
                continue;
            }
            let (nt, nn) = (Rational::from(atom.t.len()), Rational::from(atom.n.len()));
            let ratio = mass(cls, i, &atom.t) / mass(cls, i, &atom.n);
            let expect = q * &nt / &nn;
            if ratio != expect {
                rep.fail(format!("{tag}: weight ratio {ratio} differs from q|T|/|N| = {expect}"));
            }
            if nt > &n * &nn {
                rep.fail(format!("{tag}: |T|/|N| = {} exceeds n", nt / nn));
            }
        }
    }
    rep.finish()
}

/// Every `T~_{j|i}` is empty under equal priors and `T_{j|i}` follows the
/// least-index rule.
pub fn check_uniform_degeneration(a: &Analysis<'_>) -> CheckReport {
    let mut rep = CheckReport::new("uniform_degeneration");
    let inst = a.instance();
    if !inst.is_uniform() {
        return rep.finish();
    }
    let f = a.families();
    let cls = a.classification();
    for (i, j) in f.pairs() {
        rep.checked += 1;
        if !f.residual(i, j).is_empty() {
            rep.fail(format!("T~({}|{}) is nonempty under equal priors", j + 1, i + 1));
        }
        for &y in f.tied(i, j) {
            if cls.tie_indices(i, y).first() != Some(&j) {
                rep.fail(format!(
                    "{} in T({}|{}) but {} is not the least index in I_{}(y)",
                    inst.word(y),
                    j + 1,
                    i + 1,
                    j + 1,
                    i + 1
                ));
            }
        }
    }
    rep.finish()
}

/// Verifies, for `u in T_{j|i}(k)`, that every word agreeing with `u` outside
/// `S̄^(eta_k)` and meeting the N-level distance conditions satisfies the
/// weight relation and the exclusion clause, and that the single-flip
/// construction lands in `N_{j|i}(u;k)`.
pub fn check_appendix_b(
    a: &Analysis<'_>,
    i: usize,
    j: usize,
    k: usize,
    u: BitWord,
) -> Result<CheckReport, PartitionError> {
    let inst = a.instance();
    inst.check_index(i)?;
    inst.check_index(j)?;
    if i == j {
        return Err(PartitionError::SameIndex(i + 1));
    }
    let pair = a.pair(i, j);
    let lp = &pair.levels;
    if k >= lp.t_levels.len() {
        return Err(PartitionError::LevelOutOfRange {
            k,
            len: lp.t_levels.len(),
        });
    }
    if lp.t_levels[k].binary_search(&u).is_err() {
        return Err(PartitionError::NotInLevel {
            word: inst.word(u),
            i: i + 1,
            j: j + 1,
            k,
        });
    }
    let n = inst.n();
    let lv = pair.refinement.level(k);
    let outside = lv.window.complement(n).0;
    let atom: &Atom = lp.atoms[k]
        .iter()
        .find(|at| at.representative.0 & outside == u.0 & outside)
        .expect("every level word lies in an atom");
    let cls = a.classification();
    let table = cls.table();
    let q2 = inst.q() * inst.q();
    let (ci, cj) = (inst.codeword(i), inst.codeword(j));
    let tag = format!("u = {}, pair ({}, {}), k = {k}", inst.word(u), i + 1, j + 1);
    let mut rep = CheckReport::new("appendix_b_claim");

    let base = u.0 & outside;
    let window = lv.window.0;
    let mut candidates = Vec::new();
    let mut s = window;
    loop {
        let w = BitWord(base | s);
        if in_n_level(lv, ci, w) {
            rep.checked += 1;
            candidates.push(w);
            let d: Vec<u32> = inst.codewords().iter().map(|&c| distance(c, w)).collect();
            let kj = table.key(j, d[j]);
            if &(table.key(i, d[i]) * &q2) != kj {
                rep.fail(format!("{tag}: w = {} breaks P(c_i, w) q^2 = P(c_j, w)", inst.word(w)));
            }
            if let Some(r) = (0..j).filter(|&r| r != i).find(|&r| table.key(r, d[r]) == kj) {
                rep.fail(format!(
                    "{tag}: w = {} has P(c_{}, w) = P(c_j, w) for an earlier index",
                    inst.word(w),
                    r + 1
                ));
            }
            if cls.label(i, w) != Label::Error {
                rep.fail(format!("{tag}: w = {} is not in N_{}", inst.word(w), i + 1));
            }
        }
        if s == 0 {
            break;
        }
        s = (s - 1) & window;
    }
    if sorted(candidates) != atom.n {
        rep.fail(format!("{tag}: the candidate words differ from N(u;k)"));
    }

    let x = ci.0 ^ u.0;
    let agree_before = lv.before.0 & !x;
    let target = match agree_before.count_ones() {
        0 => {
            let free = lv.cell().0 & !x;
            (free != 0).then(|| 63 - free.leading_zeros() as u64)
        }
        1 => Some(agree_before.trailing_zeros() as u64),
        _ => None,
    };
    rep.checked += 1;
    match target {
        None => rep.fail(format!("{tag}: no flip position exists")),
        Some(bit) => {
            let v = BitWord(u.0 ^ (1u64 << bit));
            let (du_i, du_j) = (distance(ci, u), distance(cj, u));
            let (dv_i, dv_j) = (distance(ci, v), distance(cj, v));
            if dv_i != du_i + 1 || dv_j + 1 != du_j {
                rep.fail(format!(
                    "{tag}: flip to v = {} does not move distances by one",
                    inst.word(v)
                ));
            } else {
                let q = inst.q();
                if table.key(i, dv_i) != &(table.key(i, du_i) / q) || table.key(j, dv_j) != &(table.key(j, du_j) * q) {
                    rep.fail(format!(
                        "{tag}: flip to v = {} breaks the weight relations",
                        inst.word(v)
                    ));
                }
            }
            if atom.n.binary_search(&v).is_err() {
                rep.fail(format!("{tag}: v = {} is not in N(u;k)", inst.word(v)));
            }
        }
    }
    Ok(rep.finish())
}

/// [`check_appendix_b`] for every word of every level.
pub fn check_appendix_b_all(a: &Analysis<'_>) -> CheckReport {
    let mut total = CheckReport::new("appendix_b_claim");
    for pair in a.pairs() {
        let lp = &pair.levels;
        for (k, level) in lp.t_levels.iter().enumerate() {
            for &u in level {
                let r = check_appendix_b(a, lp.i, lp.j, k, u).expect("level word");
                total.checked += r.checked;
                for v in r.violations {
                    total.fail(v);
                }
            }
        }
    }
    total.finish()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainLink {
    pub name: String,
    /// `None` when the ratio has a zero denominator.
    pub value: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub links: Vec<ChainLink>,
    /// `delta/b <= qn`, evaluated for equal priors only.
    pub uniform_bound: Option<bool>,
    pub report: CheckReport,
}

fn ratio(num: &Rational, den: &Rational) -> Option<Rational> {
    (!den.is_zero()).then(|| num / den)
}

fn max_ratio<I: Iterator<Item = (Rational, Rational)>>(items: I) -> Option<Option<Rational>> {
    let mut best: Option<Option<Rational>> = None;
    for (num, den) in items {
        let r = ratio(&num, &den);
        best = Some(match (best, r) {
            (None, r) => r,
            (Some(None), _) | (_, None) => None,
            (Some(Some(b)), Some(r)) => Some(if r > b { r } else { b }),
        });
    }
    best
}

/// Successive upper bounds on `delta/b`, each expected to dominate the one
/// before, ending at `2qn`.
pub fn bound_chain(a: &Analysis<'_>) -> ChainReport {
    let inst = a.instance();
    let cls = a.classification();
    let f = a.families();
    let met = cls.metrics();
    let two = Rational::from(2i64);
    let qn = inst.q() * Rational::from(inst.n());
    let mut report = CheckReport::new("bound_chain");
    if met.delta.is_zero() {
        return ChainReport {
            links: Vec::new(),
            uniform_bound: None,
            report: report.finish(),
        };
    }
    report.checked = 1;
    let (t, tt) = a.family_masses();
    let nsum = a.matched_mass();
    let double = |r: Option<Rational>| r.map(|r| &two * r);

    let nonempty = || a.pairs().iter().filter(|p| !f.tied(p.levels.i, p.levels.j).is_empty());
    let per_pair = max_ratio(nonempty().map(|p| {
        let (i, j) = (p.levels.i, p.levels.j);
        (mass(cls, i, f.tied(i, j)), mass(cls, i, f.matched(i, j)))
    }));
    let per_level = max_ratio(nonempty().flat_map(|p| {
        let i = p.levels.i;
        p.levels
            .t_levels
            .iter()
            .zip(&p.levels.n_levels)
            .filter(|(tl, _)| !tl.is_empty())
            .map(move |(tl, nl)| (mass(cls, i, tl), mass(cls, i, nl)))
            .collect::<Vec<_>>()
    }));
    let per_atom = max_ratio(nonempty().flat_map(|p| {
        let i = p.levels.i;
        p.levels
            .all_atoms()
            .map(move |at| (mass(cls, i, &at.t), mass(cls, i, &at.n)))
            .collect::<Vec<_>>()
    }));

    let links = vec![
        ChainLink {
            name: "delta/b".into(),
            value: ratio(&met.delta, &met.b),
        },
        ChainLink {
            name: "(sum T + sum T~)/sum N".into(),
            value: ratio(&(&t + &tt), &nsum),
        },
        ChainLink {
            name: "2 sum T/sum N".into(),
            value: double(ratio(&t, &nsum)),
        },
        ChainLink {
            name: "2 max pair T/N".into(),
            value: per_pair.and_then(double),
        },
        ChainLink {
            name: "2 max level T/N".into(),
            value: per_level.and_then(double),
        },
        ChainLink {
            name: "2 max atom T/N".into(),
            value: per_atom.and_then(double),
        },
        ChainLink {
            name: "2qn".into(),
            value: Some(&two * &qn),
        },
    ];
    for w in links.windows(2) {
        match (&w[0].value, &w[1].value) {
            (Some(x), Some(y)) if x <= y => {}
            (Some(x), Some(y)) => report.fail(format!("{} = {x} exceeds {} = {y}", w[0].name, w[1].name)),
            _ => report.fail(format!("link {} -> {} has a zero denominator", w[0].name, w[1].name)),
        }
    }
    let uniform_bound = inst.is_uniform().then(|| met.delta <= &qn * &met.b);
    if uniform_bound == Some(false) {
        report.fail(format!("equal priors: delta/b exceeds qn = {qn}"));
    }
    ChainReport {
        links,
        uniform_bound,
        report: report.finish(),
    }
}
