//! Tie families, their refinement into levels and atoms, and the executable
//! checks built on them.

mod checks;
mod families;
mod refine;

use thiserror::Error;

use crate::classify::Classification;
use crate::model::{Instance, ModelError, DEFAULT_ENUM_LIMIT};
use crate::weights::Rational;

pub use checks::{
    bound_chain, check_appendix_b, check_appendix_b_all, check_atom_cardinality, check_prop1, check_prop2, check_prop3,
    check_prop4, check_prop9, check_refinement, check_uniform_degeneration, ChainLink, ChainReport, CheckReport,
    Outcome, Prop2Report,
};
pub use families::{mass, Atom, LevelPartition, TieFamilies};
pub use refine::{differ_set, refine, Cell, DifferSet, LevelWindow, RefinedPartition, MAX_PARTITION_CODEWORDS};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("i and j must differ (both are {0})")]
    SameIndex(usize),
    #[error("{m} codewords exceed the partition limit of {max}")]
    TooManyCodewords { m: usize, max: usize },
    #[error("level k = {k} is out of range for a differ-set of size {len}")]
    LevelOutOfRange { k: usize, len: usize },
    #[error("word {word} is not in T({j}|{i}) at level {k}")]
    NotInLevel { word: String, i: usize, j: usize, k: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Refinement and levels for one ordered pair.
#[derive(Clone, Debug)]
pub struct PairAnalysis {
    pub refinement: RefinedPartition,
    pub levels: LevelPartition,
}

/// Classification plus every family, refinement, level and atom of an
/// instance.
#[derive(Clone, Debug)]
pub struct Analysis<'a> {
    classification: Classification<'a>,
    families: TieFamilies,
    pairs: Vec<PairAnalysis>,
}

impl<'a> Analysis<'a> {
    pub fn new(inst: &'a Instance) -> Result<Self, PartitionError> {
        Self::with_limit(inst, DEFAULT_ENUM_LIMIT)
    }

    pub fn with_limit(inst: &'a Instance, limit: usize) -> Result<Self, PartitionError> {
        if inst.m() > MAX_PARTITION_CODEWORDS {
            return Err(PartitionError::TooManyCodewords {
                m: inst.m(),
                max: MAX_PARTITION_CODEWORDS,
            });
        }
        let classification = Classification::with_limit(inst, limit)?;
        let families = TieFamilies::new(&classification);
        let pairs = families
            .pairs()
            .map(|(i, j)| {
                let refinement = refine(inst, i, j)?;
                let levels = LevelPartition::build(
                    &refinement,
                    inst.codeword(i),
                    families.tied(i, j),
                    families.matched(i, j),
                );
                Ok(PairAnalysis { refinement, levels })
            })
            .collect::<Result<Vec<_>, PartitionError>>()?;
        Ok(Analysis {
            classification,
            families,
            pairs,
        })
    }

    pub fn instance(&self) -> &'a Instance {
        self.classification.instance()
    }

    pub fn classification(&self) -> &Classification<'a> {
        &self.classification
    }

    pub fn families(&self) -> &TieFamilies {
        &self.families
    }

    /// All ordered pairs, lexicographic in `(i, j)`.
    pub fn pairs(&self) -> &[PairAnalysis] {
        &self.pairs
    }

    pub fn pair(&self, i: usize, j: usize) -> &PairAnalysis {
        assert!(i != j, "pair needs distinct indices");
        let m = self.instance().m();
        let idx = i * (m - 1) + if j < i { j } else { j - 1 };
        &self.pairs[idx]
    }

    /// `(sum_{i,j} P(c_i, T_{j|i}), sum_{i,j} P(c_i, T~_{j|i}))`.
    pub fn family_masses(&self) -> (Rational, Rational) {
        let mut t = Rational::zero();
        let mut tt = Rational::zero();
        for (i, j) in self.families.pairs() {
            t += mass(&self.classification, i, self.families.tied(i, j));
            tt += mass(&self.classification, i, self.families.residual(i, j));
        }
        (t, tt)
    }

    /// `sum_{i,j} P(c_i, N_{j|i})`.
    pub fn matched_mass(&self) -> Rational {
        self.families
            .pairs()
            .map(|(i, j)| mass(&self.classification, i, self.families.matched(i, j)))
            .sum()
    }

    /// Every invariant of the families, refinements, levels and atoms.
    pub fn structural_checks(&self) -> Vec<CheckReport> {
        vec![
            check_refinement(self),
            check_prop1(self),
            check_prop3(self),
            check_prop4(self),
            check_atom_cardinality(self),
            check_uniform_degeneration(self),
        ]
    }
}

/// `T_{j|i}`, `T~_{j|i}` and `N_{j|i}` over `j` for one `i`.
pub fn tie_partition(inst: &Instance, i: usize) -> Result<TieFamilies, PartitionError> {
    inst.check_index(i)?;
    Ok(TieFamilies::new(&Classification::new(inst)?))
}

pub fn level_partition(inst: &Instance, i: usize, j: usize) -> Result<LevelPartition, PartitionError> {
    let r = refine(inst, i, j)?;
    let f = TieFamilies::new(&Classification::new(inst)?);
    Ok(LevelPartition::build(
        &r,
        inst.codeword(i),
        f.tied(i, j),
        f.matched(i, j),
    ))
}

/// Atoms of level `k` for the pair `(i, j)`.
pub fn atom_partition(inst: &Instance, i: usize, j: usize, k: usize) -> Result<Vec<Atom>, PartitionError> {
    let lp = level_partition(inst, i, j)?;
    lp.atoms
        .get(k)
        .cloned()
        .ok_or(PartitionError::LevelOutOfRange { k, len: lp.atoms.len() })
}
