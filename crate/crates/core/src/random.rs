//! Seeded generators for words, chains and partition instances.

use rand::Rng;

use crate::finprob::{stationary_distribution, FiniteSpace, Partition, Stationary, StochasticMatrix, WeightVector};
use crate::fword::GroupWord;
use crate::scalar::{rat, Rational, Scalar};

/// Rational `a/b` with `|a| ≤ 5`, `1 ≤ b ≤ 4`.
pub fn small_ratio<S: Scalar, R: Rng>(rng: &mut R) -> S {
    S::ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

/// Word of up to `max_len` unit letters `g_k^{±1}`, `k ≤ max_index`, then
/// freely merged.
pub fn random_word<R: Rng>(rng: &mut R, max_len: usize, max_index: u64) -> GroupWord {
    let len = rng.gen_range(0..=max_len);
    GroupWord::from_pairs((0..len).map(|_| {
        let e = if rng.gen_bool(0.5) { 1 } else { -1 };
        (rng.gen_range(0..=max_index), e)
    }))
}

/// Random non-identity word (by its normal form).
pub fn random_nontrivial_word<R: Rng>(rng: &mut R, max_len: usize, max_index: u64) -> GroupWord {
    loop {
        let w = random_word(rng, max_len, max_index);
        if !crate::fword::is_identity(&w).unwrap_or(true) {
            return w;
        }
    }
}

/// Random rational stochastic matrix with a unique, strictly positive
/// stationary vector. Entries are small integer ratios; zeros occur.
pub fn random_chain<R: Rng>(rng: &mut R, d: usize) -> (WeightVector<Rational>, StochasticMatrix<Rational>) {
    loop {
        let rows: Vec<Vec<Rational>> = (0..d)
            .map(|_| loop {
                let raw: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=4)).collect();
                let total: i64 = raw.iter().sum();
                if total > 0 {
                    break raw.iter().map(|&x| rat(x, total)).collect();
                }
            })
            .collect();
        let r = StochasticMatrix::new(rows).expect("rows are normalized");
        if let Ok(Stationary::Unique(q)) = stationary_distribution(&r) {
            return (q, r);
        }
    }
}

fn random_positive_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = raw.iter().sum();
    raw.iter().map(|&x| rat(x, total)).collect()
}

fn random_coarsening<R: Rng>(rng: &mut R, p: &Partition) -> Partition {
    let target = rng.gen_range(1..=p.blocks().max(1));
    let map: Vec<usize> = (0..p.blocks()).map(|_| rng.gen_range(0..target)).collect();
    Partition::from_labels(p.labels().iter().map(|&b| map[b]))
}

/// An admissible triple `(P1, P2, P0)` with `P0` coarser than both, on a
/// space of at most 64 outcomes.
///
/// Half of the instances are built conditionally independent given `P0`, so
/// both outcomes of the commuting-square test occur.
pub fn random_square_instance<R: Rng>(rng: &mut R) -> (FiniteSpace<Rational>, Partition, Partition, Partition) {
    let a = rng.gen_range(2..=4);
    let b = rng.gen_range(2..=4);
    let c = rng.gen_range(1..=4);
    let names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let alphabets = vec![a, b, c];
    let mut outcomes = Vec::new();
    for x in 0..a {
        for y in 0..b {
            for z in 0..c {
                outcomes.push(vec![x, y, z]);
            }
        }
    }
    let structured = rng.gen_bool(0.5);
    let weights: Vec<Rational> = if structured {
        // μ(c) α(a|c) β(b|c)
        let mu = random_positive_vector(rng, c);
        let alpha: Vec<Vec<Rational>> = (0..c).map(|_| random_positive_vector(rng, a)).collect();
        let beta: Vec<Vec<Rational>> = (0..c).map(|_| random_positive_vector(rng, b)).collect();
        outcomes
            .iter()
            .map(|o| mu[o[2]].clone() * alpha[o[2]][o[0]].clone() * beta[o[2]][o[1]].clone())
            .collect()
    } else {
        random_positive_vector(rng, outcomes.len())
    };
    let space = FiniteSpace::new(names, alphabets, outcomes.into_iter().zip(weights).collect())
        .expect("weights are normalized");
    let n = space.len();
    let (p1, p2, p0) = match rng.gen_range(0..3) {
        0 => (
            Partition::by_coords(&space, &[0, 2]),
            Partition::by_coords(&space, &[1, 2]),
            Partition::by_coords(&space, &[2]),
        ),
        1 => {
            let p1 = Partition::by_coords(&space, &[0, 2]);
            let p2 = Partition::by_coords(&space, &[1, 2]);
            let p0 = random_coarsening(rng, &Partition::by_coords(&space, &[2]));
            (p1, p2, p0)
        }
        _ => {
            let p1 = Partition::from_labels((0..n).map(|_| rng.gen_range(0..4)));
            let p2 = Partition::from_labels((0..n).map(|_| rng.gen_range(0..4)));
            let meet = p1.meet(&p2);
            let p0 = if rng.gen_bool(0.5) {
                meet
            } else {
                random_coarsening(rng, &meet)
            };
            (p1, p2, p0)
        }
    };
    (space, p1, p2, p0)
}
