//! Fixtures shared by the benchmarks.

use tiebound::harness::random_instance;
use tiebound::{build_instance, parse_weight, FuzzConfig, Instance, Rational, WeightStyle};

/// The four-word, length-4 example with weights `q^2, 1, 1, q^-2`.
pub fn example1() -> Instance {
    let w = ["q^2", "1", "1", "q^-2"]
        .iter()
        .map(|t| parse_weight(t).unwrap())
        .collect();
    build_instance(&["0000", "0101", "0110", "0111"], w, Rational::new(1, 3)).unwrap()
}

/// A random code of length `n` with `m` words and Laurent weights, fixed by `seed`.
pub fn random_code(n: usize, m: usize, seed: u64) -> Instance {
    let cfg = FuzzConfig {
        seed,
        max_n: n,
        max_m: m,
        weight_style: WeightStyle::Laurent,
        ..Default::default()
    };
    // Draw until the generator lands on the requested shape; the sequence is
    // deterministic so this always returns the same instance.
    (0..)
        .map(|t| random_instance(&cfg, t))
        .find(|inst| inst.n() == n && inst.m() == m)
        .unwrap()
}
