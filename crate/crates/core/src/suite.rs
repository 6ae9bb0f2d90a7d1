//! The acceptance suite: nine property sweeps, each exact and seeded.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dilation::{
    build_coupling, compress_first_order, coupling_preserves_measure, joint_law_check, noise_register_compress,
    DEFAULT_BOX_LIMIT,
};
use crate::error::Result;
use crate::finprob::{
    bernoulli_factorization_check, bernoulli_generator_sites, commuting_square_report, ergodic_factorization_check,
    intertwining_check, markovianity_check, order_two_model, random_site_observable, transition_recover,
    transition_recover_n, triangular_array_check, SiteModel, SiteObservable, StochasticMatrix, WeightVector,
    WindowModel,
};
use crate::fword::{equal, is_identity, normal_form, GroupWord, PartialShift};
use crate::pl::{pl_generator, word_to_pl};
use crate::random::{random_chain, random_nontrivial_word, random_square_instance, random_word};
use crate::scalar::{rat, Rational};
use crate::sites::{
    certify_fixed_support, check_bijectivity, coupling_region_fixed, verify_relation, BiSite, RepName, Site,
};

/// Sweep sizes. `quick` divides the sample counts by ten and shrinks the
/// site windows, for smoke runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub quick: bool,
}

impl SuiteOptions {
    fn count(&self, full: usize) -> usize {
        if self.quick {
            (full / 10).max(1)
        } else {
            full
        }
    }

    fn window(&self, full: u64) -> u64 {
        if self.quick {
            (full / 4).max(8)
        } else {
            full
        }
    }

    fn rng(&self, criterion: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ criterion)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub number: u8,
    pub title: &'static str,
    pub pass: bool,
    pub checks: u64,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub elapsed_ms: u128,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}] {}: {} checks, {} failures",
            self.number,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.checks,
            self.failures.len()
        )
    }
}

struct Tally {
    checks: u64,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checks: 0,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(what());
        } else if !ok {
            // keep counting past the cap
            self.failures.push(String::new());
        }
    }

    fn finish(self, number: u8, title: &'static str, start: Instant) -> CriterionResult {
        CriterionResult {
            number,
            title,
            pass: self.failures.is_empty(),
            checks: self.checks,
            failures: self.failures.into_iter().filter(|f| !f.is_empty()).collect(),
            notes: self.notes,
            elapsed_ms: start.elapsed().as_millis(),
        }
    }
}

/// Inserts a relator `g_k g_l g_k^-1 g_{l+1}^-1` (`k < l`) at a random position.
fn insert_relator<R: Rng>(rng: &mut R, w: &GroupWord) -> GroupWord {
    let mut pairs: Vec<(u64, i64)> = w.letters().iter().map(|l| (l.index.0, l.exponent)).collect();
    let k = rng.gen_range(0..4);
    let l = rng.gen_range(k + 1..6);
    let at = rng.gen_range(0..=pairs.len());
    let mut rel = vec![(k, 1), (l, 1), (k, -1), (l + 1, -1)];
    if rng.gen_bool(0.5) {
        // the inverse relator
        rel = rel.into_iter().rev().map(|(i, e)| (i, -e)).collect();
    }
    pairs.splice(at..at, rel);
    GroupWord::from_pairs(pairs)
}

pub fn criterion_normal_forms(opts: &SuiteOptions) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut rng = opts.rng(1);
    let mut t = Tally::new();
    for _ in 0..opts.count(10_000) {
        let w = random_word(&mut rng, 30, 5);
        let nf = normal_form(&w)?;
        let back = nf.to_word();
        t.check(word_to_pl(&back) == word_to_pl(&w), || {
            format!("normal form of {w} changes the PL map")
        });
        t.check(normal_form(&back)? == nf, || {
            format!("normal form of {w} is not idempotent")
        });
    }
    let mut equal_pairs = 0;
    for p in 0..opts.count(2_000) {
        let u = random_word(&mut rng, 30, 5);
        let v = if p % 2 == 0 {
            let mut v = insert_relator(&mut rng, &u);
            if rng.gen_bool(0.5) {
                v = insert_relator(&mut rng, &v);
            }
            v
        } else {
            random_word(&mut rng, 30, 5)
        };
        let by_nf = equal(&u, &v)?;
        let by_pl = word_to_pl(&u) == word_to_pl(&v);
        equal_pairs += usize::from(by_pl);
        t.check(by_nf == by_pl, || {
            format!("equal({u}, {v}) = {by_nf} but the PL maps say {by_pl}")
        });
    }
    t.notes.push(format!("{equal_pairs} of the pairs are equal in F"));
    Ok(t.finish(1, "normal form agrees with the PL oracle", start))
}

pub fn criterion_pl_relations(_opts: &SuiteOptions) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut t = Tally::new();
    for k in 0..=8u64 {
        for l in (k + 1)..=8 {
            let lhs = pl_generator(k).compose(&pl_generator(l));
            let rhs = pl_generator(l + 1).compose(&pl_generator(k));
            t.check(lhs == rhs, || format!("g{k} g{l} != g{} g{k} as PL maps", l + 1));
        }
    }
    Ok(t.finish(2, "presentation relations hold for the PL generators", start))
}

pub fn criterion_partial_shifts(opts: &SuiteOptions) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut rng = opts.rng(3);
    let mut t = Tally::new();
    let shifts: Vec<PartialShift> = (0..=3u64)
        .flat_map(|n| (0..=n).map(move |m| PartialShift::new(m, n).expect("m <= n")))
        .collect();
    for _ in 0..opts.count(1_000) {
        let w = random_nontrivial_word(&mut rng, 30, 5);
        for s in &shifts {
            let img = s.apply(&w);
            t.check(!is_identity(&img)?, || {
                format!("({}, {})-shift kills {w}", s.m(), s.n())
            });
        }
    }
    for _ in 0..opts.count(1_000) {
        let u = random_word(&mut rng, 20, 5);
        let v = random_word(&mut rng, 20, 5);
        let s = shifts[rng.gen_range(0..shifts.len())];
        let lhs = s.apply(&u.multiply(&v));
        let rhs = s.apply(&u).multiply(&s.apply(&v));
        t.check(equal(&lhs, &rhs)?, || {
            format!("({}, {})-shift is not multiplicative on {u}, {v}", s.m(), s.n())
        });
        // well defined on the group, not just on words
        let nf_img = s.apply(&normal_form(&u)?.to_word());
        t.check(equal(&nf_img, &s.apply(&u))?, || {
            format!("({}, {})-shift depends on the representative of {u}", s.m(), s.n())
        });
    }
    Ok(t.finish(3, "partial shifts are injective homomorphisms", start))
}

pub fn criterion_site_relations(opts: &SuiteOptions) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut t = Tally::new();
    let (w_b, w_mono) = (opts.window(256), opts.window(512));
    for k in 0..=6u64 {
        for l in (k + 1)..=6 {
            let r = verify_relation(RepName::GroupB, k, l, w_b)?;
            t.check(r.pass(), || {
                format!("B: g{k} g{l} relation fails at {}", r.witness.unwrap())
            });
            let r = verify_relation(RepName::GroupM, k, l, w_b.min(64))?;
            t.check(r.pass(), || {
                format!("M: g{k} g{l} relation fails at {}", r.witness.unwrap())
            });
        }
    }
    for k in 0..=6u64 {
        for l in k..=6 {
            let r = verify_relation(RepName::MonoidB, k, l, w_mono)?;
            t.check(r.pass(), || {
                format!("monoidB: g{k} g{l} relation fails at {}", r.witness.unwrap())
            });
        }
    }
    let r = verify_relation(RepName::GroupB, 0, 0, w_b)?;
    t.check(r.witness.is_some(), || {
        "B at k = l = 0 unexpectedly holds on the window".into()
    });
    if let Some(s) = r.witness {
        t.notes.push(format!("B at k = l = 0 fails, witness site {s}"));
    }
    for k in 0..=6u64 {
        let bad = check_bijectivity(k, w_b);
        t.check(bad.is_none(), || {
            format!("push and pull of g{k} are not inverse at {}", bad.unwrap())
        });
    }
    for k in 1..=6u64 {
        t.check(coupling_region_fixed(k)?, || format!("g{k} moves the coupling region"));
    }
    Ok(t.finish(4, "site relations, bijectivity and coupling region", start))
}

pub fn criterion_fixed_supports(opts: &SuiteOptions) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut t = Tally::new();
    let window = opts.window(128);
    for k in 0..=4u64 {
        for rep in [RepName::GroupB, RepName::MonoidB] {
            let c = certify_fixed_support(rep, k, window)?;
            t.check(c.pass(), || {
                format!(
                    "{rep} g{k}: support {} disagrees with orbits at {:?}",
                    c.support.describe(),
                    c.mismatches
                )
            });
        }
    }
    Ok(t.finish(5, "fixed supports match the column pattern", start))
}

/// The chains shared by the Markov and dilation sweeps.
pub fn suite_chains(opts: &SuiteOptions) -> Vec<(WeightVector<Rational>, StochasticMatrix<Rational>)> {
    let mut rng = opts.rng(68);
    (0..opts.count(100))
        .map(|_| {
            let d = if rng.gen_bool(0.5) { 2 } else { 3 };
            random_chain(&mut rng, d)
        })
        .collect()
}

fn basis(d: usize) -> Vec<Vec<Rational>> {
    (0..d)
        .map(|i| (0..d).map(|j| rat(i64::from(i == j), 1)).collect())
        .collect()
}

pub fn criterion_markov(opts: &SuiteOptions) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut t = Tally::new();
    for (c, (q, r)) in suite_chains(opts).iter().enumerate() {
        let model = WindowModel::markov(q, r, -3, 3)?;
        let rep = markovianity_check(&model)?;
        for tc in &rep.times {
            t.check(tc.pass, || {
                format!("chain {c}: Markov identity fails at time {}", tc.time)
            });
        }
        let tri = triangular_array_check(&model, 3)?;
        for cell in &tri.cells {
            t.check(cell.pass, || {
                format!("chain {c}: triangular cell [{}, {}] fails", cell.m, cell.n)
            });
        }
        t.check(tri.shifts.iter().all(|s| s.pass), || {
            format!("chain {c}: shift covariance fails")
        });
        t.check(transition_recover(&model)? == *r, || {
            format!("chain {c}: recovered matrix differs from R")
        });
        for n in 2..=3 {
            t.check(transition_recover_n(&model, n)? == r.pow(n), || {
                format!("chain {c}: {n}-step recovery differs from R^{n}")
            });
        }
    }
    for repeat in [rat(3, 4), rat(1, 5), rat(2, 3)] {
        let model = order_two_model(-3, 3, repeat.clone())?;
        let rep = markovianity_check(&model)?;
        let witness = rep.times.iter().find_map(|tc| tc.witness.clone());
        t.check(!rep.pass() && witness.is_some(), || {
            format!("order-two weights with repeat {repeat} pass the Markov check")
        });
        if let Some(w) = witness {
            t.notes.push(format!(
                "repeat {repeat}: given {:?}, event {:?}: {} vs {}",
                w.given, w.event, w.lhs, w.rhs
            ));
        }
        let tri = triangular_array_check(&model, 3)?;
        t.check(tri.cells.iter().any(|c| !c.pass), || {
            format!("order-two weights with repeat {repeat} pass every triangular cell")
        });
    }
    Ok(t.finish(6, "classical Markov windows", start))
}

pub fn criterion_commuting_squares(opts: &SuiteOptions) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut rng = opts.rng(7);
    let mut t = Tally::new();
    let (mut yes, mut no) = (0, 0);
    for s in 0..opts.count(100) {
        let (space, p1, p2, p0) = random_square_instance(&mut rng);
        let r = commuting_square_report(&space, &p1, &p2, &p0)?;
        t.check(r.agree(), || {
            format!("instance {s}: conditions disagree {:?}", r.conditions())
        });
        if r.all_true() {
            yes += 1;
        } else {
            no += 1;
        }
    }
    t.notes.push(format!("{yes} commuting, {no} non-commuting instances"));
    Ok(t.finish(7, "commuting-square conditions are equivalent", start))
}

pub fn criterion_dilation(opts: &SuiteOptions) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut t = Tally::new();
    for (c, (q, r)) in suite_chains(opts).iter().enumerate() {
        let built = build_coupling(q, r);
        t.check(built.is_ok(), || format!("chain {c}: coupling construction failed"));
        let Ok(cm) = built else { continue };
        let m = coupling_preserves_measure(&cm);
        t.check(m.pass, || {
            format!("chain {c}: {}", m.reason.clone().unwrap_or_default())
        });
        let d = r.d();
        for (i, e) in basis(d).iter().enumerate() {
            t.check(compress_first_order(&cm, e)? == r.apply(e), || {
                format!("chain {c}: first-order compression differs from R on e{i}")
            });
            for n in 0..=3usize {
                let g = noise_register_compress(&cm, n, e, DEFAULT_BOX_LIMIT)?;
                t.check(g == r.pow(n as u32).apply(e), || {
                    format!("chain {c}: {n}-step register compression differs from R^{n} on e{i}")
                });
            }
        }
        for n in 1..=3usize {
            let j = joint_law_check(&cm, n, DEFAULT_BOX_LIMIT)?;
            t.check(j.pass, || {
                format!("chain {c}: joint law of {n} steps differs at {:?}", j.mismatch)
            });
        }
    }
    Ok(t.finish(8, "dilation coupling reproduces the chain", start))
}

fn site_model() -> SiteModel<Rational> {
    SiteModel::new(
        WeightVector::new(vec![rat(1, 3), rat(2, 3)]).expect("positive"),
        WeightVector::new(vec![rat(1, 4), rat(3, 4)]).expect("positive"),
    )
}

pub fn criterion_bernoulli(opts: &SuiteOptions) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut rng = opts.rng(9);
    let mut t = Tally::new();
    let model = site_model();
    for s in 0..opts.count(200) {
        let rows = rng.gen_range(1..=2);
        let base = bernoulli_generator_sites(rows, rng.gen_bool(0.5));
        // disjoint intervals inside [-2, 3]
        let a = rng.gen_range(-2..=2);
        let b = rng.gen_range(a..=2);
        let c = rng.gen_range(b + 1..=3);
        let d = rng.gen_range(c..=3).min(c + 1);
        let (i, j) = if rng.gen_bool(0.5) {
            ((a, b.min(a + 1)), (c, d))
        } else {
            ((c, d), (a, b.min(a + 1)))
        };
        let r = bernoulli_factorization_check(&model, &base, i, j, 1, &mut rng)?;
        t.check(r.pass() && r.supports_disjoint, || {
            format!(
                "sample {s}: I = {i:?}, J = {j:?} on {} generator rows does not factorize",
                rows
            )
        });
    }
    for s in 0..opts.count(200) {
        let n = rng.gen_range(1..=3u64);
        let k = rng.gen_range(0..n);
        let r = intertwining_check(&model, k, n, 1, &mut rng)?;
        t.check(r.pass(), || {
            format!("sample {s}: intertwining fails for k = {k}, n = {n}")
        });
    }
    for s in 0..opts.count(100) {
        let k = rng.gen_range(0..=2u64);
        let f = moving_observable(&model, k, &mut rng)?;
        let g = random_site_observable(&model, k + 3, &mut rng)?;
        let r = ergodic_factorization_check(&model, k, &f, &g)?;
        t.check(r.pass() && r.factorizes(), || {
            format!(
                "sample {s}: eventual factorization fails for k = {k} past i0 = {}",
                r.i0
            )
        });
    }
    Ok(t.finish(
        9,
        "Bernoulli factorization, intertwining and eventual factorization",
        start,
    ))
}

/// Observable on one or two cells outside the fixed support of `g_k`.
pub fn moving_observable<R: Rng>(model: &SiteModel<Rational>, k: u64, rng: &mut R) -> Result<SiteObservable<Rational>> {
    let mut sites = std::collections::BTreeSet::new();
    let count = rng.gen_range(1..=2);
    while sites.len() < count {
        sites.insert(BiSite::Cell(rng.gen_range(0..4), rng.gen_range(k..k + 3)));
    }
    debug_assert!(sites
        .iter()
        .all(|&s| !crate::sites::FixedSupport::Bi { columns: k }.contains(Site::Bi(s))));
    SiteObservable::random(model, sites.into_iter().collect(), rng)
}

pub type Runner = fn(&SuiteOptions) -> Result<CriterionResult>;

/// All criteria in order.
pub fn criteria() -> [Runner; 9] {
    [
        criterion_normal_forms,
        criterion_pl_relations,
        criterion_partial_shifts,
        criterion_site_relations,
        criterion_fixed_supports,
        criterion_markov,
        criterion_commuting_squares,
        criterion_dilation,
        criterion_bernoulli,
    ]
}

pub fn run_all(opts: &SuiteOptions) -> Result<Vec<CriterionResult>> {
    criteria().iter().map(|run| run(opts)).collect()
}
