//! Direct transcription of the set definitions: every membership test is
//! evaluated per word on bit vectors and exact joint weights, with no score
//! ranks, masks or incremental bookkeeping shared with the partition engine.
//! Slow, and only meant for small instances.

use std::collections::BTreeMap;

use crate::model::{BitWord, Instance};
use crate::weights::Rational;

/// Largest blocklength the oracle accepts.
pub const ORACLE_MAX_N: usize = 14;
/// Largest code size the oracle accepts (it enumerates `2^(M-2)` cells).
pub const ORACLE_MAX_M: usize = 12;

type Bits = Vec<bool>;

fn bits_of(y: u64, n: usize) -> Bits {
    (1..=n).map(|t| BitWord(y).bit(n, t)).collect()
}

/// `d(x, y | S)` with `S` a list of 0-based positions.
fn dist_on(x: &Bits, y: &Bits, s: &[usize]) -> usize {
    s.iter().filter(|&&t| x[t] != y[t]).count()
}

fn dist(x: &Bits, y: &Bits) -> usize {
    x.iter().zip(y).filter(|(a, b)| a != b).count()
}

/// `(u, T(u;k), N(u;k))` with words as integers.
pub type OracleAtom = (u64, Vec<u64>, Vec<u64>);

/// Levels and atoms of one ordered pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OraclePair {
    /// Dense cells `S^(1..=2^(M-2))`, 1-based positions.
    pub cells: Vec<Vec<usize>>,
    /// `eta_k` for `k in 0..l`.
    pub eta: Vec<usize>,
    pub t_levels: Vec<Vec<u64>>,
    pub n_levels: Vec<Vec<u64>>,
    /// Per level: `(u, T(u;k), N(u;k))` in selection order.
    pub atoms: Vec<Vec<OracleAtom>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Oracle {
    pub n: usize,
    pub m: usize,
    /// `joint[y][r] = P(c_r, y)`.
    pub joint: Vec<Vec<Rational>>,
    pub tie: Vec<Vec<u64>>,
    pub error: Vec<Vec<u64>>,
    /// `[i][j]`, ascending words.
    pub tied: Vec<Vec<Vec<u64>>>,
    pub residual: Vec<Vec<Vec<u64>>>,
    pub matched: Vec<Vec<Vec<u64>>>,
    pub pairs: BTreeMap<(usize, usize), OraclePair>,
    /// `1 - sum_y max_r P(c_r, y)`, `sum_y sum_i P(c_i, y) [y in N_i]`,
    /// `sum_y sum_i P(c_i, y) [y in T_i]`.
    pub a: Rational,
    pub b: Rational,
    pub delta: Rational,
}

impl Oracle {
    /// `None` when the instance is beyond the oracle's size limits.
    pub fn build(inst: &Instance) -> Option<Oracle> {
        let n = inst.n();
        let m = inst.m();
        if n > ORACLE_MAX_N || m > ORACLE_MAX_M {
            return None;
        }
        let code: Vec<Bits> = inst.codewords().iter().map(|c| bits_of(c.0, n)).collect();
        let outputs: Vec<Bits> = (0..1u64 << n).map(|y| bits_of(y, n)).collect();
        let pn = inst.p().pow(n as i32);
        let q = inst.q();
        let joint: Vec<Vec<Rational>> = outputs
            .iter()
            .map(|y| {
                (0..m)
                    .map(|r| &inst.prior()[r] * &pn * q.pow((n - dist(&code[r], y)) as i32))
                    .collect()
            })
            .collect();

        let max_other = |y: usize, i: usize| -> Rational {
            (0..m)
                .filter(|&r| r != i)
                .map(|r| joint[y][r].clone())
                .max()
                .expect("M >= 2")
        };
        let in_tie = |y: usize, i: usize| joint[y][i] == max_other(y, i);
        let in_err = |y: usize, i: usize| joint[y][i] < max_other(y, i);
        let ties_with = |y: usize, i: usize| -> Vec<usize> {
            if !in_tie(y, i) {
                return Vec::new();
            }
            (0..m).filter(|&h| h != i && joint[y][h] == joint[y][i]).collect()
        };
        let differ = |i: usize, j: usize| -> Vec<usize> { (0..n).filter(|&t| code[i][t] != code[j][t]).collect() };

        let words = 0..outputs.len();
        let tie: Vec<Vec<u64>> = (0..m)
            .map(|i| words.clone().filter(|&y| in_tie(y, i)).map(|y| y as u64).collect())
            .collect();
        let error: Vec<Vec<u64>> = (0..m)
            .map(|i| words.clone().filter(|&y| in_err(y, i)).map(|y| y as u64).collect())
            .collect();

        // T_{j|i}: j is the least r in I_i(y) with d(c_i, y | S_{i,r}) < |S_{i,r}|.
        let first_flippable = |y: usize, i: usize| -> Option<usize> {
            ties_with(y, i).into_iter().find(|&r| {
                let s = differ(i, r);
                dist_on(&code[i], &outputs[y], &s) < s.len()
            })
        };
        let q2 = q * q;
        let mut tied = vec![vec![Vec::new(); m]; m];
        let mut residual = vec![vec![Vec::new(); m]; m];
        let mut matched = vec![vec![Vec::new(); m]; m];
        for i in 0..m {
            for j in (0..m).filter(|&j| j != i) {
                for y in words.clone() {
                    if in_tie(y, i) && first_flippable(y, i) == Some(j) {
                        tied[i][j].push(y as u64);
                    }
                }
            }
            for j in (0..m).filter(|&j| j != i) {
                for y in words.clone() {
                    // Remaining words of T_i, filed under the least index of I_i(y).
                    let in_some_t = (0..m).filter(|&h| h != i).any(|h| tied[i][h].contains(&(y as u64)));
                    if in_tie(y, i) && !in_some_t && ties_with(y, i).first() == Some(&j) {
                        residual[i][j].push(y as u64);
                    }
                    let relation = joint[y][j] == &joint[y][i] * &q2;
                    let exclusion = (0..j).filter(|&r| r != i).all(|r| joint[y][j] != joint[y][r]);
                    if in_err(y, i) && relation && exclusion {
                        matched[i][j].push(y as u64);
                    }
                }
            }
        }

        let mut pairs = BTreeMap::new();
        for i in 0..m {
            for j in (0..m).filter(|&j| j != i) {
                pairs.insert((i, j), pair_sets(i, j, &code, &outputs, &tied[i][j], &matched[i][j], n));
            }
        }

        let mut a = Rational::one();
        let mut b = Rational::zero();
        let mut delta = Rational::zero();
        for y in words.clone() {
            a -= joint[y].iter().max().expect("M >= 2");
            for (i, w) in joint[y].iter().enumerate() {
                if in_err(y, i) {
                    b += w;
                } else if in_tie(y, i) {
                    delta += w;
                }
            }
        }

        Some(Oracle {
            n,
            m,
            joint,
            tie,
            error,
            tied,
            residual,
            matched,
            pairs,
            a,
            b,
            delta,
        })
    }

    /// `I_i(y)` from the joint table.
    pub fn tie_indices(&self, i: usize, y: u64) -> Vec<usize> {
        let row = &self.joint[y as usize];
        let best = (0..self.m).filter(|&r| r != i).map(|r| &row[r]).max().expect("M >= 2");
        if &row[i] != best {
            return Vec::new();
        }
        (0..self.m).filter(|&h| h != i && row[h] == row[i]).collect()
    }
}

/// Cells, levels and atoms for `(i, j)` in the frame translated by `c_i`, where
/// `c_i` becomes all-zero and "ones of `y` in `S`" is `d(c_i, y | S)`.
fn pair_sets(
    i: usize,
    j: usize,
    code: &[Bits],
    outputs: &[Bits],
    tied: &[u64],
    matched: &[u64],
    n: usize,
) -> OraclePair {
    let m = code.len();
    let shift = |x: &Bits| -> Bits { x.iter().zip(&code[i]).map(|(a, b)| a != b).collect() };
    let tc: Vec<Bits> = code.iter().map(shift).collect();
    let ones_on = |x: &Bits, s: &[usize]| s.iter().filter(|&&t| x[t]).count();
    let s_of = |r: usize| -> Vec<usize> { (0..n).filter(|&t| tc[r][t]).collect() };
    let s_ij = s_of(j);
    let l = s_ij.len();
    let others: Vec<usize> = (0..m).filter(|&r| r != i && r != j).collect();

    let count = 1usize << others.len();
    let cells: Vec<Vec<usize>> = (1..=count)
        .map(|mm| {
            s_ij.iter()
                .copied()
                .filter(|&t| {
                    others.iter().enumerate().all(|(pos, &r)| {
                        let lambda = ((mm - 1) >> pos) & 1 == 1;
                        s_of(r).contains(&t) == lambda
                    })
                })
                .collect()
        })
        .collect();
    // Incremental unions, index 0 is the empty union.
    let mut bar: Vec<Vec<usize>> = vec![Vec::new()];
    for c in &cells {
        let mut next = bar.last().expect("nonempty").clone();
        next.extend(c);
        next.sort_unstable();
        bar.push(next);
    }
    let len = |mm: usize| bar[mm].len();
    let eta: Vec<usize> = (0..l)
        .map(|k| {
            (1..=count)
                .find(|&mm| if k + 1 < l { k + 1 < len(mm) } else { len(mm) == l })
                .expect("the full union is S_{i,j}")
        })
        .collect();

    let word = |y: u64| shift(&outputs[y as usize]);
    let mut t_levels = Vec::with_capacity(l);
    let mut n_levels = Vec::with_capacity(l);
    let mut atoms = Vec::with_capacity(l);
    for (k, &e) in eta.iter().enumerate() {
        let t_level: Vec<u64> = tied
            .iter()
            .copied()
            .filter(|&y| {
                let x = word(y);
                len(e - 1) <= ones_on(&x, &bar[e - 1]) + 1 && ones_on(&x, &bar[e]) == k
            })
            .collect();
        let n_level: Vec<u64> = matched
            .iter()
            .copied()
            .filter(|&w| {
                let x = word(w);
                ones_on(&x, &bar[e - 1]) == len(e - 1) && ones_on(&x, &bar[e]) == k + 1
            })
            .collect();
        let outside: Vec<usize> = (0..n).filter(|t| !bar[e].contains(t)).collect();
        let agree = |u: u64, y: u64| dist_on(&outputs[u as usize], &outputs[y as usize], &outside) == 0;
        let mut rest = t_level.clone();
        let mut level_atoms = Vec::new();
        while let Some(&u) = rest.first() {
            let t: Vec<u64> = t_level.iter().copied().filter(|&y| agree(u, y)).collect();
            let nn: Vec<u64> = n_level.iter().copied().filter(|&w| agree(u, w)).collect();
            rest.retain(|y| !t.contains(y));
            level_atoms.push((u, t, nn));
        }
        t_levels.push(t_level);
        n_levels.push(n_level);
        atoms.push(level_atoms);
    }
    OraclePair {
        cells: cells
            .into_iter()
            .map(|c| c.into_iter().map(|t| t + 1).collect())
            .collect(),
        eta,
        t_levels,
        n_levels,
        atoms,
    }
}
