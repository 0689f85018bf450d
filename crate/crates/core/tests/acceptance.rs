//! Acceptance criteria. Run with `cargo test -p tiebound --test acceptance`.
//! Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use tiebound::classify::measure_table;
use tiebound::model::BitWord;
use tiebound::partitions::Analysis;
use tiebound::{
    build_instance, parse_weight, run_fuzz, Classification, FuzzConfig, Instance, InstanceFile, Rational, WeightStyle,
};

/// Monte Carlo agreement: every estimate within this many standard errors.
const MC_SIGMAS: f64 = 4.0;
const MC_SAMPLES: u64 = 100_000;
const MC_SEED: u64 = 20_240_611;

const FUZZ_SEED: u64 = 0x7135;
const FUZZ_TRIALS: usize = 1000;
const UNIFORM_TRIALS: usize = 200;

fn example1(p: &Rational) -> Instance {
    let w = ["q^2", "1", "1", "q^-2"]
        .iter()
        .map(|t| parse_weight(t).unwrap())
        .collect();
    build_instance(&["0000", "0101", "0110", "0111"], w, p.clone()).unwrap()
}

fn pools() -> [Rational; 3] {
    [Rational::new(1, 3), Rational::new(1, 4), Rational::new(2, 5)]
}

fn word(s: &str) -> BitWord {
    BitWord::parse(s).unwrap().0
}

fn set(list: &[&str]) -> Vec<BitWord> {
    let mut v: Vec<BitWord> = list.iter().map(|s| word(s)).collect();
    v.sort();
    v
}

fn all_words() -> Vec<BitWord> {
    (0..16).map(BitWord).collect()
}

fn minus(a: &[BitWord], b: &[BitWord]) -> Vec<BitWord> {
    a.iter().copied().filter(|y| !b.contains(y)).collect()
}

/// Output word, shifted scores and tie sets (1-based).
type MeasureRow = (&'static str, [i64; 4], [&'static [usize]; 4]);

/// Every output of the four-word example, in the order it is usually
/// tabulated.
#[rustfmt::skip]
const MEASURES: [MeasureRow; 16] = [
    ("0000", [-2, 2, 2, 5], [&[], &[], &[], &[]]),
    ("0001", [-1, 1, 3, 4], [&[], &[], &[], &[]]),
    ("0010", [-1, 3, 1, 4], [&[], &[], &[], &[]]),
    ("0100", [-1, 1, 1, 4], [&[], &[], &[], &[]]),
    ("1000", [-1, 3, 3, 6], [&[], &[], &[], &[]]),
    ("0011", [0, 2, 2, 3], [&[], &[], &[], &[]]),
    ("0101", [0, 0, 2, 3], [&[2], &[1], &[], &[]]),
    ("0110", [0, 2, 0, 3], [&[3], &[], &[1], &[]]),
    ("1001", [0, 2, 4, 5], [&[], &[], &[], &[]]),
    ("1010", [0, 4, 2, 5], [&[], &[], &[], &[]]),
    ("1100", [0, 2, 2, 5], [&[], &[], &[], &[]]),
    ("0111", [1, 1, 1, 2], [&[2, 3], &[1, 3], &[1, 2], &[]]),
    ("1011", [1, 3, 3, 4], [&[], &[], &[], &[]]),
    ("1101", [1, 1, 3, 4], [&[2], &[1], &[], &[]]),
    ("1110", [1, 3, 1, 4], [&[3], &[], &[1], &[]]),
    ("1111", [2, 2, 2, 3], [&[2, 3], &[1, 3], &[1, 2], &[]]),
];

fn criterion_measures() -> Result<String, String> {
    for p in pools() {
        let inst = example1(&p);
        let cls = Classification::new(&inst).map_err(|e| e.to_string())?;
        let table = measure_table(&cls);
        if !table.shifted {
            return Err(format!("p = {p}: scores not shifted"));
        }
        let want_headers = ["d(0000,y)-2", "d(0101,y)", "d(0110,y)", "d(0111,y)+2"];
        if table.headers != want_headers {
            return Err(format!("p = {p}: headers {:?}", table.headers));
        }
        for (y, scores, ties) in MEASURES {
            let row = table
                .rows
                .iter()
                .find(|r| r.y == word(y))
                .ok_or_else(|| format!("p = {p}: row {y} missing"))?;
            if row.scores != scores {
                return Err(format!("p = {p}, y = {y}: scores {:?} != {:?}", row.scores, scores));
            }
            for (r, (have, want)) in row.ties.iter().zip(ties).enumerate() {
                let got: Vec<usize> = have.iter().map(|h| h + 1).collect();
                if got != want {
                    return Err(format!("p = {p}, y = {y}: I_{} = {got:?}, want {want:?}", r + 1));
                }
            }
        }
    }
    Ok("16 rows x 3 crossovers, exact".into())
}

/// Expected `(T, T~, N)` for the ordered pair `(i, j)`, 1-based.
fn expected_families(i: usize, j: usize) -> (Vec<BitWord>, Vec<BitWord>, Vec<BitWord>) {
    let t2 = set(&["0101", "0111", "1101", "1111"]);
    let t3 = set(&["0110", "0111", "1110", "1111"]);
    let n2 = minus(&all_words(), &t2);
    let n3 = minus(&all_words(), &t3);
    match (i, j) {
        (1, 2) => (vec![], t2, vec![]),
        (1, 3) => (vec![], set(&["0110", "1110"]), vec![]),
        (2, 1) => (t2, vec![], minus(&n2, &set(&["0000", "0010", "1000", "1010"]))),
        (2, 3) => (vec![], vec![], set(&["0010", "1010"])),
        (3, 1) => (t3, vec![], minus(&n3, &set(&["0000", "0001", "1000", "1001"]))),
        (3, 2) => (vec![], vec![], set(&["0001", "1001"])),
        _ => (vec![], vec![], vec![]),
    }
}

fn criterion_families() -> Result<String, String> {
    let inst = example1(&Rational::new(1, 3));
    let an = Analysis::new(&inst).map_err(|e| e.to_string())?;
    let f = an.families();
    let cls = an.classification();
    let mut compared = 0;
    for i in 0..4 {
        let want_t = match i {
            0 => set(&["0101", "0110", "0111", "1101", "1110", "1111"]),
            1 => set(&["0101", "0111", "1101", "1111"]),
            2 => set(&["0110", "0111", "1110", "1111"]),
            _ => vec![],
        };
        let want_n = match i {
            0 => vec![],
            1 => minus(&all_words(), &want_t),
            2 => minus(&all_words(), &want_t),
            _ => all_words(),
        };
        if cls.tie_set(i) != want_t || cls.error_set(i) != want_n {
            return Err(format!("T_{0} or N_{0} differs", i + 1));
        }
        for j in (0..4).filter(|&j| j != i) {
            let (t, tt, n) = expected_families(i + 1, j + 1);
            let tag = format!("{}|{}", j + 1, i + 1);
            if f.tied(i, j) != t {
                return Err(format!("T_{tag} = {:?}", f.tied(i, j)));
            }
            if f.residual(i, j) != tt {
                return Err(format!("T~_{tag} = {:?}", f.residual(i, j)));
            }
            if f.matched(i, j) != n {
                return Err(format!("N_{tag} = {:?}", f.matched(i, j)));
            }
            compared += 3;
        }
    }
    Ok(format!("{compared} families + 8 region sets, exact"))
}

fn criterion_identity() -> Result<String, String> {
    for p in pools() {
        let inst = example1(&p);
        let an = Analysis::new(&inst).map_err(|e| e.to_string())?;
        let (t, tt) = an.family_masses();
        let q = inst.q().clone();
        let one = Rational::one();
        let want = p.pow(4) * q.pow(2) * (&q + &one) / (Rational::from(2i64) + q.pow(2) + q.pow(-2));
        let got = &t - &tt;
        if got != want {
            return Err(format!("p = {p}: {got} != {want}"));
        }
    }
    Ok("3 crossovers, exact".into())
}

struct Corpus {
    mixed: tiebound::harness::FuzzReport,
    uniform: tiebound::harness::FuzzReport,
}

fn corpus() -> Result<Corpus, String> {
    let base = FuzzConfig {
        seed: FUZZ_SEED,
        trials: FUZZ_TRIALS,
        max_n: 8,
        max_m: 6,
        weight_style: WeightStyle::Mixed,
        ..Default::default()
    };
    let mixed = run_fuzz(&base).map_err(|e| e.to_string())?;
    let uniform = run_fuzz(&FuzzConfig {
        seed: FUZZ_SEED + 1,
        trials: UNIFORM_TRIALS,
        weight_style: WeightStyle::Uniform,
        ..base
    })
    .map_err(|e| e.to_string())?;
    Ok(Corpus { mixed, uniform })
}

fn zero_fails(c: &Corpus, properties: &[&str]) -> Result<(), String> {
    for rep in [&c.mixed, &c.uniform] {
        for p in properties {
            let t = rep.tally(p).ok_or_else(|| format!("{p} never ran"))?;
            if t.fail > 0 {
                let first = rep
                    .failures
                    .iter()
                    .find(|f| f.reproducer.property == *p)
                    .map(|f| format!(" (first: trial {} {:?})", f.trial, f.violations.first()))
                    .unwrap_or_default();
                return Err(format!(
                    "{p}: {} failures in the {} corpus{first}",
                    t.fail, rep.weight_style
                ));
            }
        }
    }
    Ok(())
}

fn criterion_bounds(c: &Corpus) -> Result<String, String> {
    zero_fails(
        c,
        &[
            "sandwich",
            "delta_bound",
            "theorem_bound",
            "uniform_theorem_bound",
            "uniform_degeneration",
        ],
    )?;
    let uni = c.uniform.tally("uniform_theorem_bound").map(|t| t.pass).unwrap_or(0)
        + c.mixed.tally("uniform_theorem_bound").map(|t| t.pass).unwrap_or(0);
    if uni < UNIFORM_TRIALS {
        return Err(format!("only {uni} uniform-prior trials were checked"));
    }
    Ok(format!(
        "{} + {} trials, {} with ties, {uni} uniform",
        c.mixed.trials,
        c.uniform.trials,
        c.mixed.tie_trials + c.uniform.tie_trials
    ))
}

fn criterion_propositions(c: &Corpus) -> Result<String, String> {
    zero_fails(
        c,
        &[
            "refinement",
            "prop1_partition",
            "prop2_residual_cover",
            "residual_exactly_once",
            "residual_mass_le_tied_mass",
            "prop3_levels",
            "prop4_atoms",
            "atom_cardinality",
            "prop9_atom_ratio",
            "appendix_b_claim",
            "bound_chain",
        ],
    )?;
    let nonvacuous = |p: &str| -> usize {
        [&c.mixed, &c.uniform]
            .iter()
            .map(|r| r.tally(p).map(|t| t.pass).unwrap_or(0))
            .sum()
    };
    let chain = nonvacuous("bound_chain");
    let residual = nonvacuous("prop2_residual_cover");
    let atoms = nonvacuous("prop9_atom_ratio");
    if chain == 0 || residual == 0 || atoms == 0 {
        return Err(format!(
            "coverage too thin: chain {chain}, residual {residual}, atoms {atoms}"
        ));
    }
    Ok(format!(
        "non-vacuous trials: chain {chain}, residual {residual}, atoms {atoms}"
    ))
}

fn criterion_oracle(c: &Corpus) -> Result<String, String> {
    zero_fails(
        c,
        &[
            "oracle_equivalence",
            "output_partition",
            "metrics_two_ways",
            "tie_reciprocity",
        ],
    )?;
    for rep in [&c.mixed, &c.uniform] {
        let t = rep.tally("oracle_equivalence").ok_or("oracle never ran")?;
        if t.pass != rep.trials {
            return Err(format!("oracle ran on {} of {} trials", t.pass, rep.trials));
        }
    }
    Ok(format!("{} trials, all compared", c.mixed.trials + c.uniform.trials))
}

fn criterion_monte_carlo() -> Result<String, String> {
    let file: InstanceFile =
        serde_json::from_str(include_str!("../../../instances/mc_n10.json")).map_err(|e| e.to_string())?;
    let inst = file.to_instance().map_err(|e| e.to_string())?;
    let exact = Classification::new(&inst).map_err(|e| e.to_string())?.metrics().clone();
    if exact.delta.is_zero() {
        return Err("instance has no ties".into());
    }
    let est = tiebound::estimate_metrics(&inst, MC_SAMPLES, MC_SEED).map_err(|e| e.to_string())?;
    let again = tiebound::estimate_metrics(&inst, MC_SAMPLES, MC_SEED).map_err(|e| e.to_string())?;
    if est != again {
        return Err("same seed gave different estimates".into());
    }
    let mut worst: f64 = 0.0;
    for (e, x) in est.all().into_iter().zip([&exact.a, &exact.b, &exact.delta]) {
        let z = e.z_score(x.to_f64());
        if z > MC_SIGMAS {
            return Err(format!(
                "{}: {} vs exact {} ({z:.2} sigma)",
                e.metric,
                e.point,
                x.to_f64()
            ));
        }
        worst = worst.max(z);
    }
    Ok(format!(
        "{MC_SAMPLES} samples, worst {worst:.2} sigma (limit {MC_SIGMAS})"
    ))
}

fn report(id: usize, name: &str, budget: Duration, start: Instant, result: Result<String, String>) -> bool {
    let took = start.elapsed();
    let (ok, detail) = match result {
        Ok(d) if took <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
        Err(e) => (false, e),
    };
    println!(
        "{} criterion {id} {name}: {detail} [{:.2}s]",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64()
    );
    ok
}

fn main() -> ExitCode {
    let mut ok = true;
    let t = Instant::now();
    ok &= report(1, "membership-table", Duration::from_secs(1), t, criterion_measures());
    let t = Instant::now();
    ok &= report(2, "family-table", Duration::from_secs(1), t, criterion_families());
    let t = Instant::now();
    ok &= report(3, "tie-mass-identity", Duration::from_secs(1), t, criterion_identity());

    let t = Instant::now();
    let c = corpus();
    let corpus_time = t.elapsed();
    match c {
        Ok(c) => {
            ok &= report(4, "theorem-bounds", Duration::from_secs(300), t, criterion_bounds(&c));
            // The corpus run is shared; criterion 5 is charged for it as well.
            let t5 = Instant::now() - corpus_time;
            ok &= report(
                5,
                "proposition-suite",
                Duration::from_secs(600),
                t5,
                criterion_propositions(&c),
            );
            let t6 = Instant::now();
            ok &= report(
                6,
                "oracle-equivalence",
                Duration::from_secs(600),
                t6,
                criterion_oracle(&c),
            );
        }
        Err(e) => {
            for (id, name) in [
                (4, "theorem-bounds"),
                (5, "proposition-suite"),
                (6, "oracle-equivalence"),
            ] {
                ok &= report(id, name, Duration::MAX, t, Err(e.clone()));
            }
        }
    }

    let t = Instant::now();
    ok &= report(
        7,
        "monte-carlo-agreement",
        Duration::from_secs(30),
        t,
        criterion_monte_carlo(),
    );

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
