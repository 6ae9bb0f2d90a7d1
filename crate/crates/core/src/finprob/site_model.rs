//! Finitely supported observables on the bilateral site model
//! `{Mark} ⊔ ℕ₀²`, where `Mark` carries `φ` and every cell carries `χ`.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;

use crate::error::{Error, Result};
use crate::random::small_ratio;
use crate::scalar::Scalar;
use crate::sites::{beta_pull, beta_push, BiSite, FixedSupport};

use super::markov::WeightVector;
use super::space::FiniteSpace;

/// Product weight `φ ⊗ χ^{⊗ sites}`.
#[derive(Clone, Debug)]
pub struct SiteModel<S> {
    chi: WeightVector<S>,
    phi: WeightVector<S>,
}

impl<S: Scalar> SiteModel<S> {
    pub fn new(chi: WeightVector<S>, phi: WeightVector<S>) -> Self {
        SiteModel { chi, phi }
    }

    pub fn chi(&self) -> &WeightVector<S> {
        &self.chi
    }

    pub fn phi(&self) -> &WeightVector<S> {
        &self.phi
    }

    fn marginal(&self, s: BiSite) -> &[S] {
        match s {
            BiSite::Mark => self.phi.as_slice(),
            BiSite::Cell(..) => self.chi.as_slice(),
        }
    }

    fn radix(&self, s: BiSite) -> usize {
        self.marginal(s).len()
    }
}

/// The product space on finitely many active sites, one coordinate per site.
pub fn site_model_build<S: Scalar>(
    active: &[BiSite],
    chi: &WeightVector<S>,
    phi: &WeightVector<S>,
) -> Result<FiniteSpace<S>> {
    let sites: BTreeSet<BiSite> = active.iter().copied().collect();
    let model = SiteModel::new(chi.clone(), phi.clone());
    let names = sites.iter().map(|s| s.to_string()).collect();
    let marginals: Vec<Vec<S>> = sites.iter().map(|&s| model.marginal(s).to_vec()).collect();
    FiniteSpace::product(names, &marginals)
}

/// Function of the values at finitely many sites, stored as a dense table
/// (first site most significant).
#[derive(Clone, Debug, PartialEq)]
pub struct SiteObservable<S> {
    sites: Vec<BiSite>,
    radix: Vec<usize>,
    values: Vec<S>,
}

fn digits(mut index: usize, radix: &[usize]) -> Vec<usize> {
    let mut d = vec![0; radix.len()];
    for (slot, &r) in d.iter_mut().zip(radix).rev() {
        *slot = index % r;
        index /= r;
    }
    d
}

fn index_of(digits: impl Iterator<Item = usize>, radix: &[usize]) -> usize {
    digits.zip(radix).fold(0, |acc, (d, &r)| acc * r + d)
}

impl<S: Scalar> SiteObservable<S> {
    pub fn new(model: &SiteModel<S>, sites: Vec<BiSite>, values: Vec<S>) -> Result<Self> {
        let mut sorted = sites.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != sites.len() {
            return Err(Error::Precondition("observable sites must be distinct".into()));
        }
        let radix: Vec<usize> = sites.iter().map(|&s| model.radix(s)).collect();
        let size: usize = radix.iter().product();
        if values.len() != size {
            return Err(Error::Dimension(format!(
                "{} values for a table of size {size}",
                values.len()
            )));
        }
        Ok(SiteObservable { sites, radix, values }.sorted())
    }

    pub fn constant(c: S) -> Self {
        SiteObservable {
            sites: Vec::new(),
            radix: Vec::new(),
            values: vec![c],
        }
    }

    /// Random small rational table on the given sites.
    pub fn random<R: Rng>(model: &SiteModel<S>, sites: Vec<BiSite>, rng: &mut R) -> Result<Self> {
        let size: usize = sites.iter().map(|&s| model.radix(s)).product();
        let values = (0..size).map(|_| small_ratio(rng)).collect();
        SiteObservable::new(model, sites, values)
    }

    pub fn sites(&self) -> &[BiSite] {
        &self.sites
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Same function, with sites in increasing order.
    fn sorted(self) -> Self {
        let mut order: Vec<usize> = (0..self.sites.len()).collect();
        order.sort_by_key(|&i| self.sites[i]);
        if order.iter().enumerate().all(|(a, &b)| a == b) {
            return self;
        }
        let sites: Vec<BiSite> = order.iter().map(|&i| self.sites[i]).collect();
        let radix: Vec<usize> = order.iter().map(|&i| self.radix[i]).collect();
        let mut values = vec![S::zero(); self.values.len()];
        for (old, v) in self.values.into_iter().enumerate() {
            let d = digits(old, &self.radix);
            values[index_of(order.iter().map(|&i| d[i]), &radix)] = v;
        }
        SiteObservable { sites, radix, values }
    }

    /// Same function viewed on a superset of its sites.
    fn extend(&self, model: &SiteModel<S>, target: &[BiSite]) -> Self {
        let radix: Vec<usize> = target.iter().map(|&s| model.radix(s)).collect();
        let pos: Vec<usize> = self
            .sites
            .iter()
            .map(|s| target.iter().position(|t| t == s).expect("target contains the support"))
            .collect();
        let size: usize = radix.iter().product();
        let values = (0..size)
            .map(|idx| {
                let d = digits(idx, &radix);
                self.values[index_of(pos.iter().map(|&p| d[p]), &self.radix)].clone()
            })
            .collect();
        SiteObservable {
            sites: target.to_vec(),
            radix,
            values,
        }
    }

    fn union_sites(&self, other: &Self) -> Vec<BiSite> {
        let u: BTreeSet<BiSite> = self.sites.iter().chain(&other.sites).copied().collect();
        u.into_iter().collect()
    }

    pub fn mul(&self, model: &SiteModel<S>, other: &Self) -> Self {
        let u = self.union_sites(other);
        let a = self.extend(model, &u);
        let b = other.extend(model, &u);
        SiteObservable {
            values: a.values.into_iter().zip(b.values).map(|(x, y)| x * y).collect(),
            ..a
        }
    }

    /// Pointwise equality as functions on the full configuration space.
    pub fn same_function(&self, model: &SiteModel<S>, other: &Self) -> bool {
        let u = self.union_sites(other);
        let a = self.extend(model, &u);
        let b = other.extend(model, &u);
        a.values.iter().zip(&b.values).all(|(x, y)| x.same(y))
    }

    fn relabel(&self, f: impl Fn(BiSite) -> BiSite) -> Self {
        SiteObservable {
            sites: self.sites.iter().map(|&s| f(s)).collect(),
            radix: self.radix.clone(),
            values: self.values.clone(),
        }
        .sorted()
    }

    /// `β_k^power (f)`: content at `s` moves to `τ_k^power (s)`.
    pub fn shift(&self, k: u64, power: i64) -> Self {
        self.relabel(|s| {
            let mut s = s;
            for _ in 0..power.unsigned_abs() {
                s = if power > 0 { beta_push(k, s) } else { beta_pull(k, s) };
            }
            s
        })
    }

    /// Integrates out every site for which `keep` is false.
    pub fn integrate_out(&self, model: &SiteModel<S>, keep: impl Fn(BiSite) -> bool) -> Self {
        let kept: Vec<usize> = (0..self.sites.len()).filter(|&i| keep(self.sites[i])).collect();
        let sites: Vec<BiSite> = kept.iter().map(|&i| self.sites[i]).collect();
        let radix: Vec<usize> = kept.iter().map(|&i| self.radix[i]).collect();
        let mut values = vec![S::zero(); radix.iter().product()];
        for (idx, v) in self.values.iter().enumerate() {
            let d = digits(idx, &self.radix);
            let mut w = v.clone();
            for (i, &s) in self.sites.iter().enumerate() {
                if !keep(s) {
                    w = w * model.marginal(s)[d[i]].clone();
                }
            }
            let slot = index_of(kept.iter().map(|&i| d[i]), &radix);
            values[slot] = values[slot].clone() + w;
        }
        SiteObservable { sites, radix, values }
    }

    /// `Q_n`: conditional expectation onto the sites fixed by `β_n`.
    pub fn q(&self, model: &SiteModel<S>, n: u64) -> Self {
        let support = FixedSupport::Bi { columns: n };
        self.integrate_out(model, |s| support.contains(crate::sites::Site::Bi(s)))
    }

    /// `ψ(f)`.
    pub fn expectation(&self, model: &SiteModel<S>) -> S {
        let c = self.integrate_out(model, |_| false);
        c.values[0].clone()
    }
}

fn power_orbit(k: u64, sites: &[BiSite], powers: &[i64]) -> Vec<BiSite> {
    let s: BTreeSet<BiSite> = powers
        .iter()
        .flat_map(|&p| {
            sites.iter().map(move |&s| {
                let mut s = s;
                for _ in 0..p.unsigned_abs() {
                    s = if p > 0 { beta_push(k, s) } else { beta_pull(k, s) };
                }
                s
            })
        })
        .collect();
    s.into_iter().collect()
}

/// Generating sites of the Bernoulli factor under `β₀`: `Mark` and the
/// even-row cells of column 0 below `rows`. Images of these cells under
/// distinct powers of `τ₀` are disjoint.
pub fn bernoulli_generator_sites(rows: u64, with_mark: bool) -> Vec<BiSite> {
    let mut v: Vec<BiSite> = (0..rows).map(|i| BiSite::Cell(2 * i, 0)).collect();
    if with_mark {
        v.insert(0, BiSite::Mark);
    }
    v
}

/// `Q₀(xy) = Q₀(x) Q₀(y)`.
pub fn bernoulli_pair_check<S: Scalar>(model: &SiteModel<S>, x: &SiteObservable<S>, y: &SiteObservable<S>) -> bool {
    let lhs = x.mul(model, y).q(model, 0);
    let rhs = x.q(model, 0).mul(model, &y.q(model, 0));
    lhs.same_function(model, &rhs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BernoulliReport {
    pub samples: usize,
    pub failures: usize,
    /// Whether the pushed cell supports of the two sides are disjoint.
    pub supports_disjoint: bool,
}

impl BernoulliReport {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }

    /// Factorization held exactly when, and only when, the supports are disjoint.
    pub fn consistent(&self) -> bool {
        self.pass() == self.supports_disjoint
    }
}

/// Random `x` on `⋃_{i∈I} τ₀^i(base)` and `y` on `⋃_{j∈J} τ₀^j(base)`.
pub fn bernoulli_factorization_check<S: Scalar, R: Rng>(
    model: &SiteModel<S>,
    base: &[BiSite],
    i_range: (i64, i64),
    j_range: (i64, i64),
    samples: usize,
    rng: &mut R,
) -> Result<BernoulliReport> {
    let is: Vec<i64> = (i_range.0..=i_range.1).collect();
    let js: Vec<i64> = (j_range.0..=j_range.1).collect();
    let xs = power_orbit(0, base, &is);
    let ys = power_orbit(0, base, &js);
    let cells = |v: &[BiSite]| -> BTreeSet<BiSite> { v.iter().copied().filter(|s| *s != BiSite::Mark).collect() };
    let supports_disjoint = cells(&xs).is_disjoint(&cells(&ys));
    let mut failures = 0;
    for _ in 0..samples {
        let x = SiteObservable::random(model, xs.clone(), rng)?;
        let y = SiteObservable::random(model, ys.clone(), rng)?;
        if !bernoulli_pair_check(model, &x, &y) {
            failures += 1;
        }
    }
    Ok(BernoulliReport {
        samples,
        failures,
        supports_disjoint,
    })
}

/// `α_k Q_n f = Q_{n+1} α_k f` for one observable.
pub fn intertwining_holds<S: Scalar>(model: &SiteModel<S>, k: u64, n: u64, f: &SiteObservable<S>) -> Result<bool> {
    if k >= n {
        return Err(Error::Precondition(format!(
            "intertwining needs k < n, got k = {k}, n = {n}"
        )));
    }
    let lhs = f.q(model, n).shift(k, 1);
    let rhs = f.shift(k, 1).q(model, n + 1);
    Ok(lhs.same_function(model, &rhs))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntertwiningReport {
    pub k: u64,
    pub n: u64,
    pub samples: usize,
    pub failures: usize,
}

impl IntertwiningReport {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

/// Random observables on `Mark` (half the time) plus one to three cells with
/// rows below 4 and columns below `n + 2`.
pub fn random_site_observable<S: Scalar, R: Rng>(
    model: &SiteModel<S>,
    max_column: u64,
    rng: &mut R,
) -> Result<SiteObservable<S>> {
    let mut sites = BTreeSet::new();
    if rng.gen_bool(0.5) {
        sites.insert(BiSite::Mark);
    }
    let cells = rng.gen_range(1..=3);
    while sites.iter().filter(|s| **s != BiSite::Mark).count() < cells {
        sites.insert(BiSite::Cell(rng.gen_range(0..4), rng.gen_range(0..max_column)));
    }
    SiteObservable::random(model, sites.into_iter().collect(), rng)
}

pub fn intertwining_check<S: Scalar, R: Rng>(
    model: &SiteModel<S>,
    k: u64,
    n: u64,
    samples: usize,
    rng: &mut R,
) -> Result<IntertwiningReport> {
    if k >= n {
        return Err(Error::Precondition(format!(
            "intertwining needs k < n, got k = {k}, n = {n}"
        )));
    }
    let mut failures = 0;
    for _ in 0..samples {
        let f = random_site_observable(model, n + 2, rng)?;
        if !intertwining_holds(model, k, n, &f)? {
            failures += 1;
        }
    }
    Ok(IntertwiningReport {
        k,
        n,
        samples,
        failures,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicReport<S> {
    pub k: u64,
    /// From this power on, the moving part of `f` avoids `supp g`.
    pub i0: u64,
    /// `ψ(g · β_k^i f)` for `i = 0..=i0+5`.
    pub terms: Vec<S>,
    /// `ψ(g · Q_k f)`, the value the terms settle at.
    pub limit: S,
    /// `ψ(g) ψ(f)`.
    pub product: S,
    /// `|Σ_{i<i0} (t_i - limit)|`.
    pub cesaro_constant: S,
    pub tail_exact: bool,
    pub cesaro_bound: bool,
}

impl<S: Scalar> ErgodicReport<S> {
    pub fn pass(&self) -> bool {
        self.tail_exact && self.cesaro_bound
    }

    pub fn factorizes(&self) -> bool {
        self.limit.same(&self.product)
    }
}

/// Eventual factorization of `ψ(g · β_k^i f)`.
pub fn ergodic_factorization_check<S: Scalar>(
    model: &SiteModel<S>,
    k: u64,
    f: &SiteObservable<S>,
    g: &SiteObservable<S>,
) -> Result<ErgodicReport<S>> {
    let support = FixedSupport::Bi { columns: k };
    let fixed = |s: BiSite| support.contains(crate::sites::Site::Bi(s));
    let g_sites: BTreeSet<BiSite> = g.sites().iter().copied().collect();
    let g_max_col = g_sites
        .iter()
        .filter_map(|s| match s {
            BiSite::Cell(_, j) => Some(*j),
            BiSite::Mark => None,
        })
        .max();
    let mut i0 = 0u64;
    for &s in f.sites().iter().filter(|&&s| !fixed(s)) {
        let mut cur = s;
        let mut i = 0u64;
        loop {
            if g_sites.contains(&cur) {
                i0 = i0.max(i + 1);
            }
            let escaped = match cur {
                BiSite::Cell(_, j) => j > k && g_max_col.is_none_or(|m| j > m),
                BiSite::Mark => true,
            };
            if escaped {
                break;
            }
            cur = beta_push(k, cur);
            i += 1;
        }
    }
    let terms: Vec<S> = (0..=i0 + 5)
        .map(|i| g.mul(model, &f.shift(k, i as i64)).expectation(model))
        .collect();
    let limit = g.mul(model, &f.q(model, k)).expectation(model);
    let product = g.expectation(model) * f.expectation(model);
    let tail_exact = terms[i0 as usize..].iter().all(|t| t.same(&limit));
    let c = terms[..i0 as usize]
        .iter()
        .fold(S::zero(), |a, t| a + t.clone() - limit.clone())
        .abs();
    let mut cesaro_bound = true;
    let mut partial = S::zero();
    for (m, t) in terms.iter().enumerate() {
        partial = partial + t.clone();
        let m1 = S::from_usize(m + 1).expect("small integer");
        if m as u64 + 1 >= i0 {
            let err = (partial.clone() / m1.clone() - limit.clone()).abs();
            let bound = c.clone() / m1;
            if err > bound && !err.same(&bound) {
                cesaro_bound = false;
            }
        }
    }
    Ok(ErgodicReport {
        k,
        i0,
        terms,
        limit,
        product,
        cesaro_constant: c,
        tail_exact,
        cesaro_bound,
    })
}

/// Sites reached from `s` by repeated `τ_k`, up to `steps` of them.
pub fn orbit(k: u64, s: BiSite, steps: usize) -> Vec<BiSite> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut cur = s;
    out.push(cur);
    for _ in 0..steps {
        cur = beta_push(k, cur);
        out.push(cur);
    }
    out
}

/// Convenience: observables keyed by site, e.g. for CLI input.
pub fn observable_from_map<S: Scalar>(
    model: &SiteModel<S>,
    table: &HashMap<Vec<usize>, S>,
    sites: Vec<BiSite>,
) -> Result<SiteObservable<S>> {
    let radix: Vec<usize> = sites.iter().map(|&s| model.radix(s)).collect();
    let size: usize = radix.iter().product();
    let values = (0..size)
        .map(|idx| table.get(&digits(idx, &radix)).cloned().unwrap_or_else(S::zero))
        .collect();
    SiteObservable::new(model, sites, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> SiteModel<Rational> {
        SiteModel::new(
            WeightVector::new(vec![rat(1, 3), rat(2, 3)]).unwrap(),
            WeightVector::new(vec![rat(1, 4), rat(3, 4)]).unwrap(),
        )
    }

    fn cell(i: u64, j: u64) -> BiSite {
        BiSite::Cell(i, j)
    }

    #[test]
    fn build_examples() {
        let m = model();
        let s = site_model_build(&[BiSite::Mark], m.chi(), m.phi()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.weights(), m.phi().as_slice());
        let s = site_model_build(&[BiSite::Mark, cell(0, 0), cell(3, 1)], m.chi(), m.phi()).unwrap();
        let total: Rational = s.weights().iter().cloned().sum();
        assert_eq!(total, rat(1, 1));
        use super::super::space::{commuting_square_report, Partition};
        let s2 = site_model_build(&[BiSite::Mark, cell(0, 0)], m.chi(), m.phi()).unwrap();
        let r = commuting_square_report(
            &s2,
            &Partition::by_coords(&s2, &[0]),
            &Partition::by_coords(&s2, &[1]),
            &Partition::trivial(s2.len()),
        )
        .unwrap();
        assert!(r.all_true());
    }

    #[test]
    fn shift_moves_content() {
        let m = model();
        let f = SiteObservable::new(&m, vec![cell(1, 0)], vec![rat(1, 1), rat(5, 1)]).unwrap();
        let g = f.shift(0, 1);
        assert_eq!(g.sites(), &[cell(0, 0)]);
        assert_eq!(g.shift(0, -1), f);
    }

    #[test]
    fn bernoulli_examples() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = bernoulli_factorization_check(&m, &[cell(0, 0)], (0, 0), (1, 1), 20, &mut rng).unwrap();
        assert!(r.pass() && r.supports_disjoint);
        let x = SiteObservable::new(&m, vec![cell(0, 0)], vec![rat(0, 1), rat(1, 1)]).unwrap();
        let c = SiteObservable::constant(rat(3, 1));
        assert!(bernoulli_pair_check(&m, &c, &x));
        assert!(!bernoulli_pair_check(&m, &x, &x));
        let r = bernoulli_factorization_check(&m, &[cell(0, 0)], (0, 0), (0, 0), 5, &mut rng).unwrap();
        assert!(!r.supports_disjoint && r.consistent());
        let base = bernoulli_generator_sites(2, true);
        let r = bernoulli_factorization_check(&m, &base, (-1, 0), (1, 2), 10, &mut rng).unwrap();
        assert!(r.pass() && r.consistent());
    }

    #[test]
    fn intertwining_examples() {
        let m = model();
        let f = SiteObservable::new(&m, vec![cell(0, 0)], vec![rat(2, 1), rat(-1, 1)]).unwrap();
        assert!(intertwining_holds(&m, 0, 1, &f).unwrap());
        // inside the fixed support: Q_n is the identity
        let inside =
            SiteObservable::new(&m, vec![BiSite::Mark, cell(2, 0)], (0..4).map(|v| rat(v, 3)).collect()).unwrap();
        assert_eq!(inside.q(&m, 2), inside);
        assert!(intertwining_holds(&m, 1, 2, &inside).unwrap());
        let c = SiteObservable::constant(rat(7, 2));
        assert!(intertwining_holds(&m, 0, 3, &c).unwrap());
        assert!(intertwining_holds(&m, 2, 2, &c).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(intertwining_check(&m, 1, 3, 30, &mut rng).unwrap().pass());
    }

    #[test]
    fn ergodic_examples() {
        let m = model();
        let f = SiteObservable::new(&m, vec![cell(0, 0)], vec![rat(2, 1), rat(-1, 1)]).unwrap();
        let g = SiteObservable::new(&m, vec![cell(0, 0)], vec![rat(1, 2), rat(3, 1)]).unwrap();
        let r = ergodic_factorization_check(&m, 0, &f, &g).unwrap();
        assert_eq!(r.i0, 1);
        assert!(r.pass() && r.factorizes());
        let one = SiteObservable::constant(rat(1, 1));
        let r = ergodic_factorization_check(&m, 0, &f, &one).unwrap();
        assert!(r.terms.iter().all(|t| *t == f.expectation(&m)));
        let r = ergodic_factorization_check(&m, 1, &SiteObservable::constant(rat(5, 1)), &g).unwrap();
        assert_eq!(r.i0, 0);
        assert!(r.pass());
        // a column-k cell with an odd row walks down the column first
        let f2 = SiteObservable::new(&m, vec![cell(5, 1)], vec![rat(1, 1), rat(4, 1)]).unwrap();
        let g2 = SiteObservable::new(&m, vec![cell(1, 1)], vec![rat(2, 1), rat(0, 1)]).unwrap();
        let r = ergodic_factorization_check(&m, 1, &f2, &g2).unwrap();
        assert_eq!(
            orbit(1, cell(5, 1), 3),
            vec![cell(5, 1), cell(2, 1), cell(1, 2), cell(1, 3)]
        );
        assert_eq!(r.i0, 0);
        let f3 = SiteObservable::new(&m, vec![cell(3, 1)], vec![rat(1, 1), rat(4, 1)]).unwrap();
        let r = ergodic_factorization_check(&m, 1, &f3, &g2).unwrap();
        assert_eq!(r.i0, 2);
        assert!(r.pass() && r.factorizes());
    }
}
