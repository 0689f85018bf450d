//! The coarse families `T_{j|i}`, `T~_{j|i}`, `N_{j|i}`, their levels in `k`
//! and the atoms inside each level.

use std::collections::HashMap;

use crate::classify::{Classification, Label};
use crate::model::{distance, BitWord, IndexSet};
use crate::weights::Rational;

use super::refine::{ones, LevelWindow, RefinedPartition};

/// `T_{j|i}`, `T~_{j|i}` and `N_{j|i}` for every ordered pair, ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TieFamilies {
    m: usize,
    tied: Vec<Vec<BitWord>>,
    residual: Vec<Vec<BitWord>>,
    matched: Vec<Vec<BitWord>>,
}

#[derive(Clone, Copy)]
enum Kind {
    Tied,
    Residual,
    Matched,
}

impl TieFamilies {
    pub fn new(cls: &Classification<'_>) -> TieFamilies {
        let inst = cls.instance();
        let m = inst.m();
        let table = cls.table();
        let masks: Vec<IndexSet> = (0..m * m).map(|x| inst.differ_mask(x / m, x % m)).collect();
        let hits = cls.par_collect(|w, out: &mut Vec<(Kind, usize, usize, BitWord)>| {
            for i in 0..m {
                match w.label(i) {
                    Label::Tie => {
                        let ci = inst.codeword(i);
                        let mut first = None;
                        let mut flippable = None;
                        for h in (0..m).filter(|&h| h != i && w.ranks[h] == w.ranks[i]) {
                            first.get_or_insert(h);
                            let s = masks[i * m + h];
                            if ones(ci, w.y, s) < s.len() {
                                flippable = Some(h);
                                break;
                            }
                        }
                        match flippable {
                            Some(j) => out.push((Kind::Tied, i, j, w.y)),
                            None => out.push((Kind::Residual, i, first.expect("tie has a partner"), w.y)),
                        }
                    }
                    Label::Error => {
                        // The least j hitting the q^2 relation can have no earlier
                        // r with an equal weight, so the exclusion clause holds.
                        let target = table.rank_q2(i, w.dists[i]);
                        if let Some(j) = (0..m).find(|&j| j != i && w.ranks[j] == target) {
                            out.push((Kind::Matched, i, j, w.y));
                        }
                    }
                    Label::Correct => {}
                }
            }
        });
        let mut fam = TieFamilies {
            m,
            tied: vec![Vec::new(); m * m],
            residual: vec![Vec::new(); m * m],
            matched: vec![Vec::new(); m * m],
        };
        for (kind, i, j, y) in hits {
            let slot = i * m + j;
            match kind {
                Kind::Tied => fam.tied[slot].push(y),
                Kind::Residual => fam.residual[slot].push(y),
                Kind::Matched => fam.matched[slot].push(y),
            }
        }
        fam
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `T_{j|i}`.
    pub fn tied(&self, i: usize, j: usize) -> &[BitWord] {
        &self.tied[i * self.m + j]
    }

    /// `T~_{j|i}`.
    pub fn residual(&self, i: usize, j: usize) -> &[BitWord] {
        &self.residual[i * self.m + j]
    }

    /// `N_{j|i}`.
    pub fn matched(&self, i: usize, j: usize) -> &[BitWord] {
        &self.matched[i * self.m + j]
    }

    /// Ordered pairs `(i, j)`, `i != j`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.m;
        (0..m).flat_map(move |i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
    }
}

/// One atom: a representative `u`, `T_{j|i}(u;k)` and `N_{j|i}(u;k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub k: usize,
    pub representative: BitWord,
    pub t: Vec<BitWord>,
    pub n: Vec<BitWord>,
}

/// Levels `T_{j|i}(k)`, `N_{j|i}(k)` and their atoms for one ordered pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelPartition {
    pub i: usize,
    pub j: usize,
    pub t_levels: Vec<Vec<BitWord>>,
    /// A word meeting the membership test of several levels is listed in each.
    pub n_levels: Vec<Vec<BitWord>>,
    /// Words of `T_{j|i}` that no level accepts. Always empty when the
    /// families are consistent.
    pub unassigned: Vec<BitWord>,
    /// Atoms per level, representatives ascending.
    pub atoms: Vec<Vec<Atom>>,
}

impl LevelPartition {
    pub fn build(refinement: &RefinedPartition, ci: BitWord, tied: &[BitWord], matched: &[BitWord]) -> LevelPartition {
        let l = refinement.differ.len;
        let mut t_levels = vec![Vec::new(); l];
        let mut unassigned = Vec::new();
        for &y in tied {
            match t_level_of(refinement, ci, y) {
                Some(k) => t_levels[k].push(y),
                None => unassigned.push(y),
            }
        }
        let mut n_levels = vec![Vec::new(); l];
        for &w in matched {
            for lv in &refinement.levels {
                if in_n_level(lv, ci, w) {
                    n_levels[lv.k].push(w);
                }
            }
        }
        let atoms = refinement
            .levels
            .iter()
            .map(|lv| atoms_of(lv, &t_levels[lv.k], &n_levels[lv.k], refinement.n))
            .collect();
        LevelPartition {
            i: refinement.i(),
            j: refinement.j(),
            t_levels,
            n_levels,
            unassigned,
            atoms,
        }
    }

    pub fn all_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().flatten()
    }
}

/// Level of `y in T_{j|i}`: the distance inside the first incremental union
/// where `y` agrees with `c_i` on at least two positions, or `l - 1` if none.
fn t_level_of(r: &RefinedPartition, ci: BitWord, y: BitWord) -> Option<usize> {
    let mut acc = IndexSet::EMPTY;
    for c in &r.cells {
        acc = acc.union(c.members);
        let d = ones(ci, y, acc);
        if d + 1 < acc.len() {
            return Some(d);
        }
    }
    let l = r.differ.len;
    (ones(ci, y, r.differ.support) + 1 == l).then_some(l - 1)
}

/// `T_{j|i}(k)` membership, for the oracle comparison and the claim checks.
pub fn in_t_level(lv: &LevelWindow, ci: BitWord, y: BitWord) -> bool {
    ones(ci, y, lv.before) + 1 >= lv.before_len() && ones(ci, y, lv.window) == lv.k
}

pub fn in_n_level(lv: &LevelWindow, ci: BitWord, w: BitWord) -> bool {
    ones(ci, w, lv.before) == lv.before_len() && ones(ci, w, lv.window) == lv.k + 1
}

fn atoms_of(lv: &LevelWindow, t_level: &[BitWord], n_level: &[BitWord], n: usize) -> Vec<Atom> {
    let outside = lv.window.complement(n).0;
    let mut slot: HashMap<u64, usize> = HashMap::new();
    let mut atoms: Vec<Atom> = Vec::new();
    for &y in t_level {
        let key = y.0 & outside;
        let idx = *slot.entry(key).or_insert_with(|| {
            atoms.push(Atom {
                k: lv.k,
                representative: y,
                t: Vec::new(),
                n: Vec::new(),
            });
            atoms.len() - 1
        });
        atoms[idx].t.push(y);
    }
    for &w in n_level {
        if let Some(&idx) = slot.get(&(w.0 & outside)) {
            atoms[idx].n.push(w);
        }
    }
    atoms
}

/// `P(c_i, A)` for a set of outputs.
pub fn mass(cls: &Classification<'_>, i: usize, words: &[BitWord]) -> Rational {
    let inst = cls.instance();
    let ci = inst.codeword(i);
    let mut counts = vec![0u64; inst.n() + 1];
    for &y in words {
        counts[distance(ci, y) as usize] += 1;
    }
    let sum: Rational = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(d, &c)| cls.table().key(i, d as u32) * Rational::from(c))
        .sum();
    sum * inst.p_pow_n()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, Instance};
    use crate::partitions::refine::refine;
    use crate::weights::parse_weight;

    fn example1(p: (i64, i64)) -> Instance {
        let w = ["q^2", "1", "1", "q^-2"]
            .iter()
            .map(|t| parse_weight(t).unwrap())
            .collect();
        build_instance(&["0000", "0101", "0110", "0111"], w, Rational::new(p.0, p.1)).unwrap()
    }

    fn words(list: &[&str]) -> Vec<BitWord> {
        list.iter().map(|s| BitWord::parse(s).unwrap().0).collect()
    }

    #[test]
    fn example1_families_for_first_codeword() {
        let e = example1((1, 3));
        let c = Classification::new(&e).unwrap();
        let f = TieFamilies::new(&c);
        for j in 1..4 {
            assert!(f.tied(0, j).is_empty());
        }
        assert_eq!(f.residual(0, 1), words(&["0101", "0111", "1101", "1111"]));
        assert_eq!(f.residual(0, 2), words(&["0110", "1110"]));
        assert!(f.residual(0, 3).is_empty());
    }

    #[test]
    fn example1_families_for_second_codeword() {
        let e = example1((1, 3));
        let c = Classification::new(&e).unwrap();
        let f = TieFamilies::new(&c);
        assert_eq!(f.tied(1, 0), words(&["0101", "0111", "1101", "1111"]));
        for j in [0, 2, 3] {
            assert!(f.residual(1, j).is_empty());
        }
        assert_eq!(
            f.matched(1, 0),
            words(&["0001", "0011", "0100", "0110", "1001", "1011", "1100", "1110"])
        );
        assert_eq!(f.matched(1, 2), words(&["0010", "1010"]));
        assert!(f.matched(1, 3).is_empty());
    }

    #[test]
    fn example1_levels_and_atoms() {
        let e = example1((1, 3));
        let c = Classification::new(&e).unwrap();
        let f = TieFamilies::new(&c);
        let r = refine(&e, 1, 0).unwrap();
        let lp = LevelPartition::build(&r, e.codeword(1), f.tied(1, 0), f.matched(1, 0));
        assert!(lp.unassigned.is_empty());
        let total: usize = lp.t_levels.iter().map(Vec::len).sum();
        assert_eq!(total, 4);
        for atom in lp.all_atoms() {
            assert!(!atom.n.is_empty());
            assert_eq!(atom.representative, atom.t[0]);
        }
    }

    #[test]
    fn mass_of_whole_space_is_prior() {
        let e = example1((1, 4));
        let c = Classification::new(&e).unwrap();
        let all: Vec<BitWord> = c.outputs().collect();
        for i in 0..e.m() {
            assert_eq!(mass(&c, i, &all), e.prior()[i]);
        }
    }
}
