//! Finite weighted outcome spaces, partition subalgebras and conditional
//! expectations.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Real-valued function on the outcomes of a [`FiniteSpace`], stored in
/// outcome order.
pub type Observable<S> = Vec<S>;

/// Finite product-indexed outcome set with a faithful probability weight.
///
/// Only outcomes with positive weight are stored, so every block of every
/// partition has positive mass.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSpace<S> {
    names: Vec<String>,
    alphabets: Vec<usize>,
    outcomes: Vec<Vec<usize>>,
    weights: Vec<S>,
}

impl<S: Scalar> FiniteSpace<S> {
    /// Builds a space from weighted outcomes. Zero weights are dropped.
    pub fn new(names: Vec<String>, alphabets: Vec<usize>, weighted: Vec<(Vec<usize>, S)>) -> Result<Self> {
        if names.len() != alphabets.len() {
            return Err(Error::Dimension(format!(
                "{} coordinate names for {} alphabets",
                names.len(),
                alphabets.len()
            )));
        }
        let mut seen = HashMap::new();
        let mut outcomes = Vec::new();
        let mut weights = Vec::new();
        let mut total = S::zero();
        for (o, w) in weighted {
            if o.len() != alphabets.len() || o.iter().zip(&alphabets).any(|(&v, &a)| v >= a) {
                return Err(Error::Dimension(format!(
                    "outcome {o:?} does not fit alphabets {alphabets:?}"
                )));
            }
            if w.is_negative() {
                return Err(Error::InvalidWeights(format!("negative weight {w} at {o:?}")));
            }
            if w.is_negligible() {
                continue;
            }
            if seen.insert(o.clone(), ()).is_some() {
                return Err(Error::InvalidWeights(format!("outcome {o:?} listed twice")));
            }
            total = total + w.clone();
            outcomes.push(o);
            weights.push(w);
        }
        if !total.same(&S::one()) {
            return Err(Error::InvalidWeights(format!("total weight {total} is not 1")));
        }
        Ok(FiniteSpace {
            names,
            alphabets,
            outcomes,
            weights,
        })
    }

    /// Product of independent coordinates with the given marginals.
    pub fn product(names: Vec<String>, marginals: &[Vec<S>]) -> Result<Self> {
        let alphabets: Vec<usize> = marginals.iter().map(Vec::len).collect();
        let mut weighted = vec![(Vec::new(), S::one())];
        for m in marginals {
            let mut next = Vec::with_capacity(weighted.len() * m.len());
            for (o, w) in &weighted {
                for (v, p) in m.iter().enumerate() {
                    let mut o2 = o.clone();
                    o2.push(v);
                    next.push((o2, w.clone() * p.clone()));
                }
            }
            weighted = next;
        }
        FiniteSpace::new(names, alphabets, weighted)
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn alphabets(&self) -> &[usize] {
        &self.alphabets
    }

    pub fn outcomes(&self) -> &[Vec<usize>] {
        &self.outcomes
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn coordinate(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn observable<F: FnMut(&[usize]) -> S>(&self, mut f: F) -> Observable<S> {
        self.outcomes.iter().map(|o| f(o)).collect()
    }

    /// `ψ(f)`.
    pub fn expectation(&self, f: &[S]) -> S {
        self.weights
            .iter()
            .zip(f)
            .fold(S::zero(), |acc, (w, x)| acc + w.clone() * x.clone())
    }
}

/// Partition of the outcome set; stands for the subalgebra of block-constant
/// functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    blocks: usize,
}

impl Partition {
    /// Relabels blocks in order of first appearance.
    pub fn from_labels<T: std::hash::Hash + Eq>(raw: impl IntoIterator<Item = T>) -> Self {
        let mut ids: HashMap<T, usize> = HashMap::new();
        let labels: Vec<usize> = raw
            .into_iter()
            .map(|t| {
                let next = ids.len();
                *ids.entry(t).or_insert(next)
            })
            .collect();
        Partition {
            blocks: ids.len(),
            labels,
        }
    }

    pub fn trivial(n: usize) -> Self {
        Partition {
            labels: vec![0; n],
            blocks: usize::from(n > 0),
        }
    }

    pub fn discrete(n: usize) -> Self {
        Partition {
            labels: (0..n).collect(),
            blocks: n,
        }
    }

    /// The algebra generated by the listed coordinates.
    pub fn by_coords<S: Scalar>(space: &FiniteSpace<S>, coords: &[usize]) -> Self {
        Partition::from_labels(
            space
                .outcomes()
                .iter()
                .map(|o| coords.iter().map(|&c| o[c]).collect::<Vec<_>>()),
        )
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn block_of(&self, outcome: usize) -> usize {
        self.labels[outcome]
    }

    /// For each block of `self`, the `coarse` block that contains it, or
    /// `None` if some block of `self` straddles two `coarse` blocks.
    pub fn coarsening_map(&self, coarse: &Partition) -> Option<Vec<usize>> {
        let mut map = vec![usize::MAX; self.blocks];
        for (&b, &c) in self.labels.iter().zip(&coarse.labels) {
            if map[b] == usize::MAX {
                map[b] = c;
            } else if map[b] != c {
                return None;
            }
        }
        Some(map)
    }

    pub fn refines(&self, coarse: &Partition) -> bool {
        self.labels.len() == coarse.labels.len() && self.coarsening_map(coarse).is_some()
    }

    /// Finest partition coarser than both: the intersection of the two
    /// subalgebras. Connected components of the union of the block relations.
    pub fn meet(&self, other: &Partition) -> Partition {
        let n = self.labels.len();
        let (a, b) = (self.blocks, other.blocks);
        let mut uf = UnionFind::<usize>::new(n + a + b);
        for w in 0..n {
            uf.union(w, n + self.labels[w]);
            uf.union(w, n + a + other.labels[w]);
        }
        Partition::from_labels((0..n).map(|w| uf.find(w)))
    }

    /// Common refinement: the algebra generated by both.
    pub fn join(&self, other: &Partition) -> Partition {
        Partition::from_labels(self.labels.iter().zip(&other.labels).map(|(&x, &y)| (x, y)))
    }
}

pub fn block_masses<S: Scalar>(space: &FiniteSpace<S>, p: &Partition) -> Vec<S> {
    let mut m = vec![S::zero(); p.blocks()];
    for (w, &b) in space.weights().iter().zip(p.labels()) {
        m[b] = m[b].clone() + w.clone();
    }
    m
}

/// `E_P(f)`: weighted block averages.
pub fn cond_exp<S: Scalar>(space: &FiniteSpace<S>, p: &Partition, f: &[S]) -> Observable<S> {
    let mut num = vec![S::zero(); p.blocks()];
    let mut den = vec![S::zero(); p.blocks()];
    for ((w, x), &b) in space.weights().iter().zip(f).zip(p.labels()) {
        num[b] = num[b].clone() + w.clone() * x.clone();
        den[b] = den[b].clone() + w.clone();
    }
    let avg: Vec<S> = num.into_iter().zip(den).map(|(n, d)| n / d).collect();
    p.labels().iter().map(|&b| avg[b].clone()).collect()
}

pub fn is_measurable<S: Scalar>(p: &Partition, f: &[S]) -> bool {
    let mut value: Vec<Option<&S>> = vec![None; p.blocks()];
    for (x, &b) in f.iter().zip(p.labels()) {
        match value[b] {
            None => value[b] = Some(x),
            Some(v) if v.same(x) => {}
            Some(_) => return false,
        }
    }
    true
}

/// Joint block masses of a square `P0 ⊂ P1, P2`, stored sparsely.
struct SquareTables<S> {
    m0: Vec<S>,
    m1: Vec<S>,
    m2: Vec<S>,
    // nonempty (b1, b2) intersections, grouped by their P0 block
    m12: HashMap<(usize, usize), S>,
    b1_in: Vec<Vec<usize>>,
    b2_in: Vec<Vec<usize>>,
    classes_in: Vec<Vec<(usize, usize)>>,
}

impl<S: Scalar> SquareTables<S> {
    fn new(space: &FiniteSpace<S>, p1: &Partition, p2: &Partition, p0: &Partition) -> Result<Self> {
        let n = space.len();
        if p1.len() != n || p2.len() != n || p0.len() != n {
            return Err(Error::Dimension("partitions must cover the outcome set".into()));
        }
        let b0_of_b1 = p1
            .coarsening_map(p0)
            .ok_or_else(|| Error::Precondition("P0 is not coarser than P1".into()))?;
        let b0_of_b2 = p2
            .coarsening_map(p0)
            .ok_or_else(|| Error::Precondition("P0 is not coarser than P2".into()))?;
        let mut m12: HashMap<(usize, usize), S> = HashMap::new();
        let mut classes_in = vec![Vec::new(); p0.blocks()];
        for (w, (&b1, &b2)) in space.weights().iter().zip(p1.labels().iter().zip(p2.labels())) {
            match m12.get_mut(&(b1, b2)) {
                Some(m) => *m = m.clone() + w.clone(),
                None => {
                    m12.insert((b1, b2), w.clone());
                    classes_in[b0_of_b1[b1]].push((b1, b2));
                }
            }
        }
        let mut b1_in = vec![Vec::new(); p0.blocks()];
        for (b1, &b0) in b0_of_b1.iter().enumerate() {
            b1_in[b0].push(b1);
        }
        let mut b2_in = vec![Vec::new(); p0.blocks()];
        for (b2, &b0) in b0_of_b2.iter().enumerate() {
            b2_in[b0].push(b2);
        }
        Ok(SquareTables {
            m0: block_masses(space, p0),
            m1: block_masses(space, p1),
            m2: block_masses(space, p2),
            m12,
            b1_in,
            b2_in,
            classes_in,
        })
    }

    fn m12(&self, b1: usize, b2: usize) -> S {
        self.m12.get(&(b1, b2)).cloned().unwrap_or_else(S::zero)
    }
}

/// A pair of blocks on which a condition failed, with the two sides compared.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareWitness<S> {
    pub block1: usize,
    pub block2: usize,
    pub lhs: S,
    pub rhs: S,
}

/// `E1 E2 = E0`, checked on the indicators of the `P2` blocks. That suffices
/// because `E1 E2 f = E1 E2 (E2 f)` and `E0 f = E0 (E2 f)`.
pub fn product_identity<S: Scalar>(
    space: &FiniteSpace<S>,
    p1: &Partition,
    p2: &Partition,
    p0: &Partition,
) -> Result<Option<SquareWitness<S>>> {
    let t = SquareTables::new(space, p1, p2, p0)?;
    Ok(product_identity_on(&t))
}

fn product_identity_on<S: Scalar>(t: &SquareTables<S>) -> Option<SquareWitness<S>> {
    for (b0, b2s) in t.b2_in.iter().enumerate() {
        for &b2 in b2s {
            // E0(1_{b2}) on b0
            let rhs = t.m2[b2].clone() / t.m0[b0].clone();
            for &b1 in &t.b1_in[b0] {
                let lhs = t.m12(b1, b2) / t.m1[b1].clone();
                if !lhs.same(&rhs) {
                    return Some(SquareWitness {
                        block1: b1,
                        block2: b2,
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    None
}

/// The four equivalent commuting-square conditions for `P0 ⊂ P1, P2`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutingSquareReport<S> {
    /// `E0(xy) = E0(x) E0(y)` for `x ∈ A1`, `y ∈ A2`.
    pub factorization: bool,
    /// `E1 E2 = E0`.
    pub product: bool,
    /// `E1(A2) = A0`.
    pub image: bool,
    /// `E1 E2 = E2 E1` together with `A1 ∩ A2 = A0`.
    pub commuting: bool,
    pub commutation_only: bool,
    pub intersection_is_p0: bool,
    pub witness: Option<SquareWitness<S>>,
}

impl<S> CommutingSquareReport<S> {
    pub fn conditions(&self) -> [bool; 4] {
        [self.factorization, self.product, self.image, self.commuting]
    }

    pub fn agree(&self) -> bool {
        let c = self.conditions();
        c.iter().all(|&x| x == c[0])
    }

    pub fn all_true(&self) -> bool {
        self.conditions().iter().all(|&x| x)
    }
}

pub fn commuting_square_report<S: Scalar>(
    space: &FiniteSpace<S>,
    p1: &Partition,
    p2: &Partition,
    p0: &Partition,
) -> Result<CommutingSquareReport<S>> {
    let t = SquareTables::new(space, p1, p2, p0)?;
    let mut witness = None;

    // (i) on pairs of block indicators inside a common P0 block
    let mut factorization = true;
    'outer: for b0 in 0..t.m0.len() {
        let m0 = t.m0[b0].clone();
        for &b1 in &t.b1_in[b0] {
            for &b2 in &t.b2_in[b0] {
                let lhs = t.m12(b1, b2) / m0.clone();
                let rhs = (t.m1[b1].clone() / m0.clone()) * (t.m2[b2].clone() / m0.clone());
                if !lhs.same(&rhs) {
                    factorization = false;
                    witness = Some(SquareWitness {
                        block1: b1,
                        block2: b2,
                        lhs,
                        rhs,
                    });
                    break 'outer;
                }
            }
        }
    }

    // (ii)
    let product_w = product_identity_on(&t);
    let product = product_w.is_none();
    if witness.is_none() {
        witness = product_w;
    }

    // (iii) every E1(1_{b2}) is P0-measurable, and E1 fixes A0
    let mut image = true;
    'outer3: for (b0, b2s) in t.b2_in.iter().enumerate() {
        let mut e1_of_b0 = vec![S::zero(); t.b1_in[b0].len()];
        for &b2 in b2s {
            let mut first: Option<S> = None;
            for (slot, &b1) in t.b1_in[b0].iter().enumerate() {
                let v = t.m12(b1, b2) / t.m1[b1].clone();
                e1_of_b0[slot] = e1_of_b0[slot].clone() + v.clone();
                match &first {
                    None => first = Some(v),
                    Some(f) if f.same(&v) => {}
                    Some(_) => {
                        image = false;
                        break 'outer3;
                    }
                }
            }
        }
        if e1_of_b0.iter().any(|v| !v.same(&S::one())) {
            image = false;
            break;
        }
    }

    // (iv) commutation on the kernel, evaluated per (b1, b2) class pair;
    // classes in different P0 blocks give zero on both sides.
    let mut commutation_only = true;
    'outer4: for classes in &t.classes_in {
        for &(b1, b2) in classes {
            for &(c1, c2) in classes {
                // (E1 E2 1_w)(w') for w in class (b1, b2), w' in class (c1, c2),
                // divided by the common factor w(w)
                let lhs = t.m12(c1, b2) / (t.m2[b2].clone() * t.m1[c1].clone());
                let rhs = t.m12(b1, c2) / (t.m1[b1].clone() * t.m2[c2].clone());
                if !lhs.same(&rhs) {
                    commutation_only = false;
                    break 'outer4;
                }
            }
        }
    }
    let intersection_is_p0 = p1.meet(p2) == *p0;

    Ok(CommutingSquareReport {
        factorization,
        product,
        image,
        commuting: commutation_only && intersection_is_p0,
        commutation_only,
        intersection_is_p0,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    fn uniform2x2() -> FiniteSpace<Rational> {
        let h = vec![rat(1, 2), rat(1, 2)];
        FiniteSpace::product(names(2), &[h.clone(), h]).unwrap()
    }

    #[test]
    fn cond_exp_examples() {
        let s = uniform2x2();
        let f = s.observable(|o| if o == [1, 1] { rat(1, 1) } else { rat(0, 1) });
        assert_eq!(cond_exp(&s, &Partition::discrete(s.len()), &f), f);
        let t = cond_exp(&s, &Partition::trivial(s.len()), &f);
        assert!(t.iter().all(|x| *x == rat(1, 4)));
        let p = Partition::by_coords(&s, &[0]);
        let e = cond_exp(&s, &p, &f);
        for (o, v) in s.outcomes().iter().zip(&e) {
            assert_eq!(*v, if o[0] == 1 { rat(1, 2) } else { rat(0, 1) });
        }
    }

    #[test]
    fn cond_exp_properties() {
        let s = FiniteSpace::product(
            names(2),
            &[vec![rat(1, 3), rat(2, 3)], vec![rat(1, 5), rat(3, 5), rat(1, 5)]],
        )
        .unwrap();
        let p = Partition::by_coords(&s, &[1]);
        let f = s.observable(|o| rat((o[0] * 3 + o[1]) as i64, 7));
        let e = cond_exp(&s, &p, &f);
        assert_eq!(cond_exp(&s, &p, &e), e);
        assert_eq!(s.expectation(&e), s.expectation(&f));
        assert!(is_measurable(&p, &e));
        let a = s.observable(|o| rat(o[1] as i64 + 1, 2));
        let afa: Vec<_> = f.iter().zip(&a).map(|(x, y)| x * y * y).collect();
        let lhs = cond_exp(&s, &p, &afa);
        let rhs: Vec<_> = e.iter().zip(&a).map(|(x, y)| x * y * y).collect();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn product_square_is_commuting() {
        let s = uniform2x2();
        let r = commuting_square_report(
            &s,
            &Partition::by_coords(&s, &[0]),
            &Partition::by_coords(&s, &[1]),
            &Partition::trivial(s.len()),
        )
        .unwrap();
        assert!(r.all_true(), "{r:?}");
    }

    #[test]
    fn correlated_square_fails_everywhere() {
        // c0 and c1 correlated: mass on the diagonal
        let s = FiniteSpace::new(
            names(2),
            vec![2, 2],
            vec![
                (vec![0, 0], rat(3, 8)),
                (vec![0, 1], rat(1, 8)),
                (vec![1, 0], rat(1, 8)),
                (vec![1, 1], rat(3, 8)),
            ],
        )
        .unwrap();
        let r = commuting_square_report(
            &s,
            &Partition::by_coords(&s, &[0]),
            &Partition::by_coords(&s, &[1]),
            &Partition::trivial(s.len()),
        )
        .unwrap();
        assert_eq!(r.conditions(), [false; 4]);
        assert!(r.witness.is_some());
    }

    #[test]
    fn precondition_is_checked() {
        let s = uniform2x2();
        let err = commuting_square_report(
            &s,
            &Partition::by_coords(&s, &[0]),
            &Partition::by_coords(&s, &[1]),
            &Partition::by_coords(&s, &[0]),
        );
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn meet_and_join() {
        let a = Partition::from_labels([0, 0, 1, 1, 2, 2]);
        let b = Partition::from_labels([0, 1, 1, 2, 2, 3]);
        assert_eq!(a.meet(&b), Partition::trivial(6));
        let c = Partition::from_labels([0, 0, 0, 1, 1, 1]);
        let d = Partition::from_labels([0, 1, 0, 2, 3, 3]);
        assert_eq!(c.meet(&d), c);
        assert_eq!(c.join(&d), d);
        assert!(d.refines(&c));
        assert!(!c.refines(&d));
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(FiniteSpace::new(names(1), vec![2], vec![(vec![0], rat(1, 2))]).is_err());
        assert!(FiniteSpace::new(names(1), vec![2], vec![(vec![0], rat(3, 2)), (vec![1], rat(-1, 2))]).is_err());
        assert!(FiniteSpace::new(names(1), vec![2], vec![(vec![2], rat(1, 1))]).is_err());
        // zero weights are dropped
        let s = FiniteSpace::new(names(1), vec![2], vec![(vec![0], rat(1, 1)), (vec![1], rat(0, 1))]).unwrap();
        assert_eq!(s.len(), 1);
    }
}
