//! First-order tensor dilation of a stochastic matrix as an exact
//! interval-exchange coupling of `[d] × [0,1)`, and the noise-register
//! simulator for powers of the coupled shift.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::finprob::{StochasticMatrix, WeightVector, WindowModel};
use crate::scalar::Scalar;
use crate::sites::{beta_push, BiSite};

/// Half-open interval `[left, right)` inside `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval<S> {
    pub left: S,
    pub right: S,
}

impl<S: Scalar> Interval<S> {
    pub fn new(left: S, right: S) -> Result<Self> {
        if left.is_negative() || right > S::one() || right <= left {
            return Err(Error::OutOfDomain(format!(
                "[{left}, {right}) is not a subinterval of [0, 1]"
            )));
        }
        Ok(Interval { left, right })
    }

    pub fn len(&self) -> S {
        self.right.clone() - self.left.clone()
    }

    pub fn contains(&self, u: &S) -> bool {
        *u >= self.left && *u < self.right
    }
}

impl<S: fmt::Display> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.left, self.right)
    }
}

/// One affine piece: `I_ij` in fiber `i` goes onto `J_ji` in fiber `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Block<S> {
    pub from: usize,
    pub to: usize,
    pub source: Interval<S>,
    pub target: Interval<S>,
}

impl<S: Scalar> Block<S> {
    fn forward(&self, u: &S) -> S {
        self.target.left.clone() + (u.clone() - self.source.left.clone()) * self.target.len() / self.source.len()
    }

    fn backward(&self, v: &S) -> S {
        self.source.left.clone() + (v.clone() - self.target.left.clone()) * self.source.len() / self.target.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMap<S> {
    q: WeightVector<S>,
    r: StochasticMatrix<S>,
    blocks: Vec<Block<S>>,
}

/// Canonical layout: fiber `i` is cut in increasing `j` into pieces of length
/// `p_ij`; fiber `j` is cut in increasing `i` into pieces of length
/// `q_i p_ij / q_j`. Empty pieces are skipped.
pub fn build_coupling<S: Scalar>(q: &WeightVector<S>, r: &StochasticMatrix<S>) -> Result<CouplingMap<S>> {
    r.check_stationary(q)?;
    let d = r.d();
    let qs = q.as_slice();
    let mut target_start = vec![S::zero(); d];
    let mut blocks = Vec::new();
    for i in 0..d {
        let mut left = S::zero();
        for j in 0..d {
            let p = r.get(i, j).clone();
            if p.is_negligible() {
                continue;
            }
            let right = left.clone() + p.clone();
            let t_len = qs[i].clone() * p / qs[j].clone();
            let t_right = target_start[j].clone() + t_len;
            blocks.push(Block {
                from: i,
                to: j,
                source: Interval::new(left.clone(), right.clone())?,
                target: Interval::new(target_start[j].clone(), t_right.clone())?,
            });
            left = right;
            target_start[j] = t_right;
        }
    }
    Ok(CouplingMap {
        q: q.clone(),
        r: r.clone(),
        blocks,
    })
}

impl<S: Scalar> CouplingMap<S> {
    /// Hand-assembled coupling; no consistency checks beyond the types.
    pub fn from_blocks(q: WeightVector<S>, r: StochasticMatrix<S>, blocks: Vec<Block<S>>) -> Self {
        CouplingMap { q, r, blocks }
    }

    pub fn d(&self) -> usize {
        self.r.d()
    }

    pub fn q(&self) -> &WeightVector<S> {
        &self.q
    }

    pub fn matrix(&self) -> &StochasticMatrix<S> {
        &self.r
    }

    pub fn blocks(&self) -> &[Block<S>] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [Block<S>] {
        &mut self.blocks
    }

    pub fn blocks_from(&self, i: usize) -> impl Iterator<Item = &Block<S>> {
        self.blocks.iter().filter(move |b| b.from == i)
    }
}

fn locate<'a, S: Scalar>(
    blocks: impl Iterator<Item = &'a Block<S>>,
    u: &S,
    interval: impl Fn(&Block<S>) -> &Interval<S>,
) -> Option<&'a Block<S>> {
    // half-open pieces; u = 1 belongs to the piece that ends at 1
    let blocks: Vec<&Block<S>> = blocks.collect();
    blocks
        .iter()
        .find(|b| interval(b).contains(u))
        .or_else(|| blocks.iter().rfind(|b| u.is_one() && interval(b).right == *u))
        .copied()
}

/// `σ(i, u)`.
pub fn apply_coupling<S: Scalar>(cm: &CouplingMap<S>, i: usize, u: &S) -> Result<(usize, S)> {
    if i >= cm.d() || u.is_negative() || *u > S::one() {
        return Err(Error::OutOfDomain(format!("({i}, {u}) is outside [d] x [0, 1]")));
    }
    let b = locate(cm.blocks_from(i), u, |b| &b.source)
        .ok_or_else(|| Error::OutOfDomain(format!("no piece of fiber {i} contains {u}")))?;
    Ok((b.to, b.forward(u)))
}

/// `σ⁻¹(j, v)`.
pub fn apply_inverse<S: Scalar>(cm: &CouplingMap<S>, j: usize, v: &S) -> Result<(usize, S)> {
    if j >= cm.d() || v.is_negative() || *v > S::one() {
        return Err(Error::OutOfDomain(format!("({j}, {v}) is outside [d] x [0, 1]")));
    }
    let b = locate(cm.blocks.iter().filter(|b| b.to == j), v, |b| &b.target)
        .ok_or_else(|| Error::OutOfDomain(format!("no piece of target fiber {j} contains {v}")))?;
    Ok((b.from, b.backward(v)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureReport {
    pub pass: bool,
    /// `(from, to)` of the first offending piece, if any.
    pub offending: Option<(usize, usize)>,
    pub reason: Option<String>,
}

fn tiles<S: Scalar>(mut pieces: Vec<&Interval<S>>) -> bool {
    pieces.sort_by(|a, b| a.left.partial_cmp(&b.left).expect("ordered scalars"));
    let mut at = S::zero();
    for p in pieces {
        if !p.left.same(&at) {
            return false;
        }
        at = p.right.clone();
    }
    at.same(&S::one())
}

/// Every piece carries the same `q ⊗ λ` mass on both sides, and both the
/// source and the target pieces tile each fiber. Together these make `σ` a
/// measure-preserving bijection, and so is its inverse.
pub fn coupling_preserves_measure<S: Scalar>(cm: &CouplingMap<S>) -> MeasureReport {
    let qs = cm.q.as_slice();
    let fail = |b: Option<&Block<S>>, why: String| MeasureReport {
        pass: false,
        offending: b.map(|b| (b.from, b.to)),
        reason: Some(why),
    };
    for b in &cm.blocks {
        let src = qs[b.from].clone() * b.source.len();
        let tgt = qs[b.to].clone() * b.target.len();
        if !src.same(&tgt) {
            return fail(
                Some(b),
                format!("piece {}->{}: mass {src} maps onto mass {tgt}", b.from, b.to),
            );
        }
    }
    for i in 0..cm.d() {
        if !tiles(cm.blocks.iter().filter(|b| b.from == i).map(|b| &b.source).collect()) {
            let b = cm.blocks.iter().find(|b| b.from == i);
            return fail(b, format!("source pieces of fiber {i} do not tile [0, 1)"));
        }
        if !tiles(cm.blocks.iter().filter(|b| b.to == i).map(|b| &b.target).collect()) {
            let b = cm.blocks.iter().find(|b| b.to == i);
            return fail(b, format!("target pieces of fiber {i} do not tile [0, 1)"));
        }
    }
    MeasureReport {
        pass: true,
        offending: None,
        reason: None,
    }
}

/// `i ↦ ∫ f(π₁ σ(i, u)) du = Σ_j |I_ij| f(j)`.
pub fn compress_first_order<S: Scalar>(cm: &CouplingMap<S>, f: &[S]) -> Result<Vec<S>> {
    if f.len() != cm.d() {
        return Err(Error::Dimension(format!(
            "observable has {} values for {} states",
            f.len(),
            cm.d()
        )));
    }
    Ok((0..cm.d())
        .map(|i| {
            cm.blocks_from(i)
                .fold(S::zero(), |a, b| a + b.source.len() * f[b.to].clone())
        })
        .collect())
}

/// A box of `[d] × [0,1)^n` on which the trajectory is constant.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseBox<S> {
    /// States `X_0, …, X_t`.
    pub itinerary: Vec<usize>,
    /// Register cut used at each step, before the coupling acts.
    pub registers: Vec<Interval<S>>,
    /// What each consumed register holds afterwards.
    pub images: Vec<Interval<S>>,
    /// `q ⊗ λ^t` mass.
    pub mass: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRegisterState<S> {
    pub steps: usize,
    pub boxes: Vec<NoiseBox<S>>,
    /// Site of each consumed register after all steps; all distinct.
    pub register_sites: Vec<BiSite>,
}

impl<S: Scalar> NoiseRegisterState<S> {
    pub fn total_mass(&self) -> S {
        self.boxes.iter().fold(S::zero(), |a, b| a + b.mass.clone())
    }
}

/// Box count cap for [`noise_register_run`].
pub const DEFAULT_BOX_LIMIT: usize = 1 << 20;

/// Runs `n` steps of the coupled shift from the stationary start.
///
/// Each step cuts every box of the current state `x` along the source pieces
/// of fiber `x`, which is the preimage partition of `σ` on the fresh register.
/// The register site bookkeeping follows `τ₀`: the register consumed by the
/// `t`-th coupling ends up at `τ₀^{n-t}(0,0)`.
pub fn noise_register_run<S: Scalar>(cm: &CouplingMap<S>, n: usize, limit: usize) -> Result<NoiseRegisterState<S>> {
    let qs = cm.q.as_slice();
    let mut boxes: Vec<NoiseBox<S>> = (0..cm.d())
        .map(|i| NoiseBox {
            itinerary: vec![i],
            registers: Vec::new(),
            images: Vec::new(),
            mass: qs[i].clone(),
        })
        .collect();
    for step in 0..n {
        let mut next = Vec::new();
        for b in &boxes {
            let x = *b.itinerary.last().expect("itinerary starts with X_0");
            for piece in cm.blocks_from(x) {
                if next.len() >= limit {
                    return Err(Error::ResourceLimit {
                        what: "noise register boxes",
                        limit,
                    });
                }
                let mut it = b.itinerary.clone();
                it.push(piece.to);
                let mut regs = b.registers.clone();
                regs.push(piece.source.clone());
                let mut imgs = b.images.clone();
                imgs.push(piece.target.clone());
                next.push(NoiseBox {
                    itinerary: it,
                    registers: regs,
                    images: imgs,
                    mass: b.mass.clone() * piece.source.len(),
                });
            }
        }
        boxes = next;
        let total = boxes.iter().fold(S::zero(), |a, b| a + b.mass.clone());
        if !total.same(&S::one()) {
            return Err(Error::Precondition(format!(
                "mass {total} after step {} is not 1",
                step + 1
            )));
        }
    }
    let register_sites = (1..=n)
        .map(|t| (0..n - t).fold(BiSite::Cell(0, 0), |s, _| beta_push(0, s)))
        .collect();
    Ok(NoiseRegisterState {
        steps: n,
        boxes,
        register_sites,
    })
}

/// `g(i) = Σ_{boxes from i} mass · f(X_n) / q_i`, which must equal `Rⁿ f`.
pub fn noise_register_compress<S: Scalar>(cm: &CouplingMap<S>, n: usize, f: &[S], limit: usize) -> Result<Vec<S>> {
    if f.len() != cm.d() {
        return Err(Error::Dimension(format!(
            "observable has {} values for {} states",
            f.len(),
            cm.d()
        )));
    }
    let state = noise_register_run(cm, n, limit)?;
    let mut g = vec![S::zero(); cm.d()];
    for b in &state.boxes {
        let last = *b.itinerary.last().expect("nonempty itinerary");
        g[b.itinerary[0]] = g[b.itinerary[0]].clone() + b.mass.clone() * f[last].clone();
    }
    Ok(g.into_iter().zip(cm.q.as_slice()).map(|(x, q)| x / q.clone()).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointLawReport<S> {
    pub steps: usize,
    pub paths: usize,
    pub pass: bool,
    /// First path whose masses differ: `(path, from coupling, from window)`.
    pub mismatch: Option<(Vec<usize>, S, S)>,
}

/// Law of `(X_0, …, X_n)` from the boxes against the window weights
/// `q_{i_0} ∏ p_{i_t i_{t+1}}`.
pub fn joint_law_check<S: Scalar>(cm: &CouplingMap<S>, n: usize, limit: usize) -> Result<JointLawReport<S>> {
    let state = noise_register_run(cm, n, limit)?;
    let mut law: BTreeMap<Vec<usize>, S> = BTreeMap::new();
    for b in state.boxes {
        let e = law.entry(b.itinerary).or_insert_with(S::zero);
        *e = e.clone() + b.mass;
    }
    let window = WindowModel::markov(&cm.q, &cm.r, 0, n as i64)?;
    let mut reference: BTreeMap<Vec<usize>, S> = BTreeMap::new();
    for (o, w) in window.space().outcomes().iter().zip(window.space().weights()) {
        reference.insert(o.clone(), w.clone());
    }
    let mut mismatch = None;
    for path in law.keys().chain(reference.keys()) {
        let a = law.get(path).cloned().unwrap_or_else(S::zero);
        let b = reference.get(path).cloned().unwrap_or_else(S::zero);
        if !a.same(&b) {
            mismatch = Some((path.clone(), a, b));
            break;
        }
    }
    Ok(JointLawReport {
        steps: n,
        paths: reference.len(),
        pass: mismatch.is_none(),
        mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn uniform_flip() -> CouplingMap<Rational> {
        let h = || vec![rat(1, 2), rat(1, 2)];
        let r = StochasticMatrix::new(vec![h(), h()]).unwrap();
        build_coupling(&WeightVector::uniform(2), &r).unwrap()
    }

    fn chain3() -> (WeightVector<Rational>, StochasticMatrix<Rational>) {
        let r = StochasticMatrix::new(vec![
            vec![rat(1, 2), rat(1, 4), rat(1, 4)],
            vec![rat(0, 1), rat(1, 3), rat(2, 3)],
            vec![rat(1, 2), rat(1, 2), rat(0, 1)],
        ])
        .unwrap();
        match crate::finprob::stationary_distribution(&r).unwrap() {
            crate::finprob::Stationary::Unique(q) => (q, r),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identity_coupling() {
        let cm = build_coupling(&WeightVector::uniform(3), &StochasticMatrix::identity(3)).unwrap();
        assert_eq!(cm.blocks().len(), 3);
        for b in cm.blocks() {
            assert_eq!(b.from, b.to);
            assert_eq!(b.source, Interval::new(rat(0, 1), rat(1, 1)).unwrap());
        }
        assert_eq!(apply_coupling(&cm, 1, &rat(2, 7)).unwrap(), (1, rat(2, 7)));
        assert!(coupling_preserves_measure(&cm).pass);
        let f = vec![rat(1, 1), rat(-3, 2), rat(4, 5)];
        assert_eq!(compress_first_order(&cm, &f).unwrap(), f);
    }

    #[test]
    fn uniform_flip_layout() {
        let cm = uniform_flip();
        assert_eq!(cm.blocks().len(), 4);
        let b = &cm.blocks()[1];
        assert_eq!((b.from, b.to), (0, 1));
        assert_eq!(b.source, Interval::new(rat(1, 2), rat(1, 1)).unwrap());
        assert_eq!(b.target, Interval::new(rat(0, 1), rat(1, 2)).unwrap());
        let (j, v) = apply_coupling(&cm, 0, &rat(3, 4)).unwrap();
        assert_eq!(j, 1);
        assert!(v >= rat(0, 1) && v <= rat(1, 1));
        assert_eq!(apply_inverse(&cm, j, &v).unwrap(), (0, rat(3, 4)));
        let f = vec![rat(2, 1), rat(6, 1)];
        assert_eq!(compress_first_order(&cm, &f).unwrap(), cm.matrix().apply(&f));
    }

    #[test]
    fn non_stationary_rejected() {
        let (_, r) = chain3();
        assert!(matches!(
            build_coupling(&WeightVector::uniform(3), &r),
            Err(Error::NotStationary { .. })
        ));
    }

    #[test]
    fn round_trip_and_boundaries() {
        let (q, r) = chain3();
        let cm = build_coupling(&q, &r).unwrap();
        for i in 0..3 {
            for k in 0..24 {
                let u = rat(k, 24);
                let (j, v) = apply_coupling(&cm, i, &u).unwrap();
                assert_eq!(apply_inverse(&cm, j, &v).unwrap(), (i, u.clone()), "i={i} u={u}");
            }
        }
        // the closed end is accepted but lies outside the bijection on [0, 1)
        assert!(apply_coupling(&cm, 2, &rat(1, 1)).is_ok());
        assert!(apply_coupling(&cm, 0, &rat(5, 4)).is_err());
        assert!(apply_coupling(&cm, 3, &rat(1, 4)).is_err());
    }

    #[test]
    fn perturbed_block_detected() {
        let (q, r) = chain3();
        let mut cm = build_coupling(&q, &r).unwrap();
        assert!(coupling_preserves_measure(&cm).pass);
        let b = &mut cm.blocks_mut()[1];
        b.source.right = b.source.right.clone() - rat(1, 100);
        let rep = coupling_preserves_measure(&cm);
        assert!(!rep.pass);
        assert_eq!(rep.offending, Some((0, 1)));
    }

    #[test]
    fn noise_register_matches_powers() {
        let (q, r) = chain3();
        let cm = build_coupling(&q, &r).unwrap();
        let f = vec![rat(1, 1), rat(-2, 3), rat(5, 2)];
        assert_eq!(noise_register_compress(&cm, 0, &f, DEFAULT_BOX_LIMIT).unwrap(), f);
        assert_eq!(
            noise_register_compress(&cm, 1, &f, DEFAULT_BOX_LIMIT).unwrap(),
            compress_first_order(&cm, &f).unwrap()
        );
        for n in 2..=3 {
            assert_eq!(
                noise_register_compress(&cm, n, &f, DEFAULT_BOX_LIMIT).unwrap(),
                r.pow(n as u32).apply(&f)
            );
        }
        let st = noise_register_run(&cm, 3, DEFAULT_BOX_LIMIT).unwrap();
        assert_eq!(st.total_mass(), rat(1, 1));
        assert_eq!(
            st.register_sites,
            vec![BiSite::Cell(0, 2), BiSite::Cell(0, 1), BiSite::Cell(0, 0)]
        );
        assert!(matches!(
            noise_register_run(&cm, 3, 5),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn joint_law_examples() {
        let (q, r) = chain3();
        let cm = build_coupling(&q, &r).unwrap();
        for n in 1..=3 {
            assert!(joint_law_check(&cm, n, DEFAULT_BOX_LIMIT).unwrap().pass);
        }
        let id = build_coupling(&WeightVector::<Rational>::uniform(2), &StochasticMatrix::identity(2)).unwrap();
        let st = noise_register_run(&id, 3, DEFAULT_BOX_LIMIT).unwrap();
        assert!(st
            .boxes
            .iter()
            .all(|b| b.itinerary.iter().all(|&x| x == b.itinerary[0])));
        let flip = uniform_flip();
        let st = noise_register_run(&flip, 2, DEFAULT_BOX_LIMIT).unwrap();
        assert_eq!(st.boxes.len(), 8);
        assert!(st.boxes.iter().all(|b| b.mass == rat(1, 8)));
        assert!(joint_law_check(&flip, 2, DEFAULT_BOX_LIMIT).unwrap().pass);
    }
}
