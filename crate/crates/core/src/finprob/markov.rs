//! Stationary Markov chains on a finite alphabet and their finite-window
//! Daniell–Kolmogorov models.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::space::{product_identity, FiniteSpace, Partition};

/// Strictly positive probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<S> {
    q: Vec<S>,
}

impl<S: Scalar> WeightVector<S> {
    pub fn new(q: Vec<S>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some((i, x)) = q
            .iter()
            .enumerate()
            .find(|(_, x)| !x.is_positive() || x.is_negligible())
        {
            return Err(Error::InvalidWeights(format!(
                "entry {i} = {x} is not strictly positive"
            )));
        }
        let total = q.iter().fold(S::zero(), |a, x| a + x.clone());
        if !total.same(&S::one()) {
            return Err(Error::InvalidWeights(format!("entries sum to {total}, not 1")));
        }
        Ok(WeightVector { q })
    }

    pub fn uniform(d: usize) -> Self {
        WeightVector {
            q: vec![S::ratio(1, d as i64); d],
        }
    }

    pub fn as_slice(&self) -> &[S] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// `φ(f) = Σ q_i f(i)`.
    pub fn expect(&self, f: &[S]) -> S {
        self.q
            .iter()
            .zip(f)
            .fold(S::zero(), |a, (q, x)| a + q.clone() * x.clone())
    }
}

/// Square matrix with nonnegative rows summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix<S> {
    p: Vec<Vec<S>>,
}

/// Exact row-sum and sign check.
pub fn check_stochastic<S: Scalar>(rows: &[Vec<S>]) -> bool {
    validate_rows(rows).is_ok()
}

fn validate_rows<S: Scalar>(rows: &[Vec<S>]) -> Result<()> {
    let d = rows.len();
    if d == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::NotStochastic {
                row: i,
                reason: format!("has {} entries, expected {d}", row.len()),
            });
        }
        if let Some((j, x)) = row
            .iter()
            .enumerate()
            .find(|(_, x)| x.is_negative() && !x.is_negligible())
        {
            return Err(Error::NotStochastic {
                row: i,
                reason: format!("entry {j} = {x} is negative"),
            });
        }
        let sum = row.iter().fold(S::zero(), |a, x| a + x.clone());
        if !sum.same(&S::one()) {
            return Err(Error::NotStochastic {
                row: i,
                reason: format!("row sum is {sum}"),
            });
        }
    }
    Ok(())
}

fn identity_rows<S: Scalar>(d: usize) -> Vec<Vec<S>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect()
}

impl<S: Scalar> StochasticMatrix<S> {
    pub fn new(rows: Vec<Vec<S>>) -> Result<Self> {
        validate_rows(&rows)?;
        Ok(StochasticMatrix { p: rows })
    }

    pub fn identity(d: usize) -> Self {
        StochasticMatrix { p: identity_rows(d) }
    }

    pub fn d(&self) -> usize {
        self.p.len()
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.p
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.p[i][j]
    }

    /// `(R f)(i) = Σ_j p_ij f(j)`.
    pub fn apply(&self, f: &[S]) -> Vec<S> {
        self.p
            .iter()
            .map(|row| row.iter().zip(f).fold(S::zero(), |a, (p, x)| a + p.clone() * x.clone()))
            .collect()
    }

    /// `(q R)(j) = Σ_i q_i p_ij`.
    pub fn left_apply(&self, q: &[S]) -> Vec<S> {
        (0..self.d())
            .map(|j| {
                q.iter()
                    .zip(&self.p)
                    .fold(S::zero(), |a, (qi, row)| a + qi.clone() * row[j].clone())
            })
            .collect()
    }

    pub fn mul(&self, other: &StochasticMatrix<S>) -> StochasticMatrix<S> {
        let d = self.d();
        let p = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).fold(S::zero(), |a, k| a + self.p[i][k].clone() * other.p[k][j].clone()))
                    .collect()
            })
            .collect();
        StochasticMatrix { p }
    }

    pub fn pow(&self, n: u32) -> StochasticMatrix<S> {
        (0..n).fold(StochasticMatrix::identity(self.d()), |acc, _| acc.mul(self))
    }

    /// `Ok(())` iff `q R = q`; otherwise the first failing column.
    pub fn check_stationary(&self, q: &WeightVector<S>) -> Result<()> {
        if q.len() != self.d() {
            return Err(Error::Dimension(format!(
                "weight vector has {} entries for a {}-state matrix",
                q.len(),
                self.d()
            )));
        }
        let qr = self.left_apply(q.as_slice());
        match qr.iter().zip(q.as_slice()).position(|(a, b)| !a.same(b)) {
            Some(column) => Err(Error::NotStationary { column }),
            None => Ok(()),
        }
    }
}

/// Result of solving `q R = q`.
#[derive(Clone, Debug, PartialEq)]
pub enum Stationary<S> {
    Unique(WeightVector<S>),
    /// The solution space has dimension > 1; no choice is made.
    NotUnique {
        dimension: usize,
        basis: Vec<Vec<S>>,
    },
}

/// Basis of `{x : A x = 0}` by Gauss–Jordan elimination.
pub fn null_space<S: Scalar>(mut a: Vec<Vec<S>>, cols: usize) -> Vec<Vec<S>> {
    let rows = a.len();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_negligible()) else {
            continue;
        };
        a.swap(r, p);
        let inv = S::one() / a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_negligible() {
                let factor = a[i][c].clone();
                for k in 0..cols {
                    let v = a[r][k].clone() * factor.clone();
                    a[i][k] = a[i][k].clone() - v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![S::zero(); cols];
            x[f] = S::one();
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = -a[row][f].clone();
            }
            x
        })
        .collect()
}

/// Exact solve of `q R = q`, `Σ q = 1`.
pub fn stationary_distribution<S: Scalar>(r: &StochasticMatrix<S>) -> Result<Stationary<S>> {
    let d = r.d();
    // (R - I)^T q = 0
    let a: Vec<Vec<S>> = (0..d)
        .map(|j| {
            (0..d)
                .map(|i| {
                    let v = r.get(i, j).clone();
                    if i == j {
                        v - S::one()
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let basis = null_space(a, d);
    if basis.len() != 1 {
        return Ok(Stationary::NotUnique {
            dimension: basis.len(),
            basis,
        });
    }
    let v = &basis[0];
    let total = v.iter().fold(S::zero(), |a, x| a + x.clone());
    if total.is_negligible() {
        return Err(Error::NoPositiveStationary);
    }
    let q: Vec<S> = v.iter().map(|x| x.clone() / total.clone()).collect();
    WeightVector::new(q)
        .map(Stationary::Unique)
        .map_err(|_| Error::NoPositiveStationary)
}

/// `(R*)_{ji} = q_i p_ij / q_j`.
pub fn adjoint_markov<S: Scalar>(r: &StochasticMatrix<S>, q: &WeightVector<S>) -> Result<StochasticMatrix<S>> {
    r.check_stationary(q)?;
    let d = r.d();
    let qs = q.as_slice();
    let p = (0..d)
        .map(|j| {
            (0..d)
                .map(|i| qs[i].clone() * r.get(i, j).clone() / qs[j].clone())
                .collect()
        })
        .collect();
    StochasticMatrix::new(p)
}

/// `φ(f_0 R(f_1 R(⋯ f_{n-1} R(f_n))))`, evaluated from the inside out.
pub fn dk_moment<S: Scalar>(q: &WeightVector<S>, r: &StochasticMatrix<S>, fs: &[Vec<S>]) -> Result<S> {
    let d = r.d();
    if q.len() != d || fs.iter().any(|f| f.len() != d) {
        return Err(Error::Dimension("observables must have one value per state".into()));
    }
    let Some((last, rest)) = fs.split_last() else {
        return Ok(S::one());
    };
    let mut g = last.clone();
    for f in rest.iter().rev() {
        g = r.apply(&g).into_iter().zip(f).map(|(x, y)| x * y.clone()).collect();
    }
    Ok(q.expect(&g))
}

/// Joint law of `(X_lo, …, X_hi)` as a finite space with one coordinate per
/// time.
#[derive(Clone, Debug)]
pub struct WindowModel<S> {
    lo: i64,
    hi: i64,
    d: usize,
    space: FiniteSpace<S>,
}

fn time_names(lo: i64, hi: i64) -> Vec<String> {
    (lo..=hi).map(|t| format!("X{t}")).collect()
}

fn all_paths(d: usize, len: usize) -> Vec<Vec<usize>> {
    let mut paths = vec![Vec::new()];
    for _ in 0..len {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                (0..d).map(move |v| {
                    let mut p2 = p.clone();
                    p2.push(v);
                    p2
                })
            })
            .collect();
    }
    paths
}

impl<S: Scalar> WindowModel<S> {
    /// Weight `q_{i_lo} ∏ p_{i_t i_{t+1}}`.
    pub fn markov(q: &WeightVector<S>, r: &StochasticMatrix<S>, lo: i64, hi: i64) -> Result<Self> {
        r.check_stationary(q)?;
        let len = window_len(lo, hi)?;
        let d = r.d();
        let weighted = all_paths(d, len)
            .into_iter()
            .map(|path| {
                let w = path
                    .windows(2)
                    .fold(q.as_slice()[path[0]].clone(), |a, s| a * r.get(s[0], s[1]).clone());
                (path, w)
            })
            .collect();
        let space = FiniteSpace::new(time_names(lo, hi), vec![d; len], weighted)?;
        Ok(WindowModel { lo, hi, d, space })
    }

    /// Arbitrary window law, for counterexamples.
    pub fn from_weights(d: usize, lo: i64, hi: i64, weight: impl Fn(&[usize]) -> S) -> Result<Self> {
        let len = window_len(lo, hi)?;
        let weighted = all_paths(d, len)
            .into_iter()
            .map(|p| {
                let w = weight(&p);
                (p, w)
            })
            .collect();
        let space = FiniteSpace::new(time_names(lo, hi), vec![d; len], weighted)?;
        Ok(WindowModel { lo, hi, d, space })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn space(&self) -> &FiniteSpace<S> {
        &self.space
    }

    fn coord(&self, t: i64) -> usize {
        (t - self.lo) as usize
    }

    /// Partition generated by `X_m, …, X_n`.
    pub fn interval(&self, m: i64, n: i64) -> Partition {
        let coords: Vec<usize> = (m.max(self.lo)..=n.min(self.hi)).map(|t| self.coord(t)).collect();
        Partition::by_coords(&self.space, &coords)
    }

    /// `E[∏ f_t(X_t)]` with `fs[0]` at time `lo`.
    pub fn expectation_of_product(&self, fs: &[Vec<S>]) -> S {
        let f = self
            .space
            .observable(|o| fs.iter().enumerate().fold(S::one(), |a, (t, ft)| a * ft[o[t]].clone()));
        self.space.expectation(&f)
    }

    fn check_time(&self, t: i64) -> Result<()> {
        if t < self.lo || t > self.hi {
            return Err(Error::OutOfDomain(format!(
                "time {t} outside [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// Values of `X_m..=X_n` on a representative outcome of every block.
    fn block_values(&self, p: &Partition, m: i64, n: i64) -> Vec<Vec<(i64, usize)>> {
        let mut out = vec![Vec::new(); p.blocks()];
        let mut done = vec![false; p.blocks()];
        for (w, o) in self.space.outcomes().iter().enumerate() {
            let b = p.block_of(w);
            if !done[b] {
                done[b] = true;
                out[b] = (m..=n).map(|t| (t, o[self.coord(t)])).collect();
            }
        }
        out
    }
}

fn window_len(lo: i64, hi: i64) -> Result<usize> {
    if hi < lo {
        return Err(Error::OutOfDomain(format!("empty window [{lo}, {hi}]")));
    }
    Ok((hi - lo + 1) as usize)
}

/// Binary process whose next symbol repeats the one two steps back with
/// probability `repeat`. Not Markov unless `repeat = 1/2`.
pub fn order_two_model<S: Scalar>(lo: i64, hi: i64, repeat: S) -> Result<WindowModel<S>> {
    let half = S::ratio(1, 2);
    let flip = S::one() - repeat.clone();
    WindowModel::from_weights(2, lo, hi, |p| {
        let start = if p.len() >= 2 {
            half.clone() * half.clone()
        } else {
            half.clone()
        };
        p.windows(3).fold(start, |a, s| {
            a * if s[2] == s[0] { repeat.clone() } else { flip.clone() }
        })
    })
}

/// One evaluation of `E_A E_B = E_C` on a window, with the failing event.
#[derive(Clone, Debug, PartialEq)]
pub struct FiltrationWitness<S> {
    /// Conditioning history, as `(time, value)` pairs.
    pub given: Vec<(i64, usize)>,
    /// The observable is the indicator of this future event.
    pub event: Vec<(i64, usize)>,
    pub lhs: S,
    pub rhs: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeCheck<S> {
    pub time: i64,
    pub pass: bool,
    pub witness: Option<FiltrationWitness<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovReport<S> {
    pub window: (i64, i64),
    pub times: Vec<TimeCheck<S>>,
}

impl<S> MarkovReport<S> {
    pub fn pass(&self) -> bool {
        self.times.iter().all(|t| t.pass)
    }
}

fn identity_check<S: Scalar>(
    model: &WindowModel<S>,
    a: (i64, i64),
    b: (i64, i64),
    c: (i64, i64),
) -> Result<Option<FiltrationWitness<S>>> {
    let pa = model.interval(a.0, a.1);
    let pb = model.interval(b.0, b.1);
    let pc = model.interval(c.0, c.1);
    Ok(
        product_identity(model.space(), &pa, &pb, &pc)?.map(|w| FiltrationWitness {
            given: model.block_values(&pa, a.0, a.1)[w.block1].clone(),
            event: model.block_values(&pb, b.0, b.1)[w.block2].clone(),
            lhs: w.lhs,
            rhs: w.rhs,
        }),
    )
}

/// `E_{[lo,n]} E_{[n,hi]} = E_{[n,n]}` for every interior `n`. The window
/// stands in for the two half-lines.
pub fn markovianity_check<S: Scalar>(model: &WindowModel<S>) -> Result<MarkovReport<S>> {
    let (lo, hi) = (model.lo(), model.hi());
    let mut times = Vec::new();
    for n in (lo + 1)..hi {
        let witness = identity_check(model, (lo, n), (n, hi), (n, n))?;
        times.push(TimeCheck {
            time: n,
            pass: witness.is_none(),
            witness,
        });
    }
    Ok(MarkovReport {
        window: (lo, hi),
        times,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellCheck<S> {
    pub m: i64,
    pub n: i64,
    pub pass: bool,
    pub witness: Option<FiltrationWitness<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftCheck {
    pub m: i64,
    pub n: i64,
    pub time: i64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleReport<S> {
    pub depth: i64,
    pub cells: Vec<CellCheck<S>>,
    pub shifts: Vec<ShiftCheck>,
}

impl<S> TriangleReport<S> {
    pub fn pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass) && self.shifts.iter().all(|s| s.pass)
    }
}

/// Conditional law of `X_t` given `X_m..=X_n`, keyed by the conditioning values.
fn conditional_kernel<S: Scalar>(model: &WindowModel<S>, m: i64, n: i64, t: i64) -> HashMap<Vec<usize>, (S, Vec<S>)> {
    let mut table: HashMap<Vec<usize>, (S, Vec<S>)> = HashMap::new();
    let ct = model.coord(t);
    for (o, w) in model.space().outcomes().iter().zip(model.space().weights()) {
        let key: Vec<usize> = (m..=n).map(|s| o[model.coord(s)]).collect();
        let entry = table
            .entry(key)
            .or_insert_with(|| (S::zero(), vec![S::zero(); model.d()]));
        entry.0 = entry.0.clone() + w.clone();
        entry.1[o[ct]] = entry.1[o[ct]].clone() + w.clone();
    }
    for (mass, row) in table.values_mut() {
        for x in row.iter_mut() {
            *x = x.clone() / mass.clone();
        }
    }
    table
}

/// Cell identities `E_{[m,n]} E_{[m+1,n+1]} = E_{[m+1,n]}` for
/// `1 ≤ n - m ≤ depth`, plus shift covariance of every cell's expectation on
/// single-time indicators: the law of `X_{t+1}` given `X_{[m+1,n+1]}` equals
/// the law of `X_t` given `X_{[m,n]}`.
pub fn triangular_array_check<S: Scalar>(model: &WindowModel<S>, depth: i64) -> Result<TriangleReport<S>> {
    let (lo, hi) = (model.lo(), model.hi());
    if depth < 1 || depth > hi - lo - 1 {
        return Err(Error::Precondition(format!(
            "depth {depth} does not fit in the window [{lo}, {hi}]"
        )));
    }
    let mut cells = Vec::new();
    let mut shifts = Vec::new();
    for m in lo..hi {
        for n in (m + 1)..=(m + depth).min(hi - 1) {
            let witness = identity_check(model, (m, n), (m + 1, n + 1), (m + 1, n))?;
            cells.push(CellCheck {
                m,
                n,
                pass: witness.is_none(),
                witness,
            });
            for t in lo..hi {
                let here = conditional_kernel(model, m, n, t);
                let there = conditional_kernel(model, m + 1, n + 1, t + 1);
                let pass = here.len() == there.len()
                    && here.iter().all(|(k, (_, row))| {
                        there
                            .get(k)
                            .is_some_and(|(_, r2)| row.iter().zip(r2).all(|(a, b)| a.same(b)))
                    });
                shifts.push(ShiftCheck { m, n, time: t, pass });
            }
        }
    }
    Ok(TriangleReport { depth, cells, shifts })
}

/// `E[1{X_{s+n} = j} | X_s = i]` read off the window, with `s = 0` when the
/// window allows it.
pub fn transition_recover_n<S: Scalar>(model: &WindowModel<S>, n: u32) -> Result<StochasticMatrix<S>> {
    let (lo, hi) = (model.lo(), model.hi());
    let n = n as i64;
    let s = if lo <= 0 && n <= hi { 0 } else { lo };
    model.check_time(s)?;
    model.check_time(s + n)?;
    let d = model.d();
    let mut counts = vec![vec![S::zero(); d]; d];
    let mut mass = vec![S::zero(); d];
    let (cs, ct) = (model.coord(s), model.coord(s + n));
    for (o, w) in model.space().outcomes().iter().zip(model.space().weights()) {
        counts[o[cs]][o[ct]] = counts[o[cs]][o[ct]].clone() + w.clone();
        mass[o[cs]] = mass[o[cs]].clone() + w.clone();
    }
    let rows = counts
        .into_iter()
        .zip(mass)
        .enumerate()
        .map(|(i, (row, m))| {
            if m.is_negligible() {
                return Err(Error::Precondition(format!("state {i} has zero mass at time {s}")));
            }
            Ok(row.into_iter().map(|x| x / m.clone()).collect())
        })
        .collect::<Result<Vec<Vec<S>>>>()?;
    StochasticMatrix::new(rows)
}

pub fn transition_recover<S: Scalar>(model: &WindowModel<S>) -> Result<StochasticMatrix<S>> {
    transition_recover_n(model, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn m(rows: &[&[(i64, i64)]]) -> StochasticMatrix<Rational> {
        StochasticMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|&(a, b)| rat(a, b)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn reversible() -> StochasticMatrix<Rational> {
        m(&[&[(2, 3), (1, 3)], &[(1, 6), (5, 6)]])
    }

    #[test]
    fn stochastic_examples() {
        let half = vec![rat(1, 2), rat(1, 2)];
        assert!(check_stochastic(&[half.clone(), half]));
        assert!(check_stochastic(&identity_rows::<Rational>(2)));
        assert!(!check_stochastic(&[
            vec![rat(1, 2), rat(1, 3)],
            vec![rat(0, 1), rat(1, 1)]
        ]));
        let err = StochasticMatrix::new(vec![vec![rat(1, 1), rat(0, 1)], vec![rat(1, 2), rat(1, 3)]]).unwrap_err();
        assert!(matches!(err, Error::NotStochastic { row: 1, .. }));
    }

    #[test]
    fn stationary_examples() {
        let u = m(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]]);
        assert_eq!(
            stationary_distribution(&u).unwrap(),
            Stationary::Unique(WeightVector::new(vec![rat(1, 2), rat(1, 2)]).unwrap())
        );
        assert_eq!(
            stationary_distribution(&reversible()).unwrap(),
            Stationary::Unique(WeightVector::new(vec![rat(1, 3), rat(2, 3)]).unwrap())
        );
        match stationary_distribution(&StochasticMatrix::<Rational>::identity(2)).unwrap() {
            Stationary::NotUnique { dimension, .. } => assert_eq!(dimension, 2),
            other => panic!("{other:?}"),
        }
        // state 0 is transient
        let t = m(&[&[(1, 2), (1, 2)], &[(0, 1), (1, 1)]]);
        assert_eq!(stationary_distribution(&t), Err(Error::NoPositiveStationary));
    }

    #[test]
    fn adjoint_examples() {
        let q = WeightVector::new(vec![rat(1, 3), rat(2, 3)]).unwrap();
        let r = reversible();
        let a = adjoint_markov(&r, &q).unwrap();
        assert_eq!(a, r);
        let c = m(&[
            &[(0, 1), (1, 2), (1, 2)],
            &[(1, 2), (0, 1), (1, 2)],
            &[(1, 2), (1, 2), (0, 1)],
        ]);
        let u = WeightVector::uniform(3);
        assert_eq!(adjoint_markov(&c, &u).unwrap(), c);
        let bad = WeightVector::new(vec![rat(1, 2), rat(1, 2)]).unwrap();
        assert!(matches!(adjoint_markov(&r, &bad), Err(Error::NotStationary { .. })));
        // non-reversible cycle: adjoint is the reverse cycle, and taking it twice returns R
        let cyc = m(&[
            &[(1, 2), (1, 2), (0, 1)],
            &[(0, 1), (1, 2), (1, 2)],
            &[(1, 2), (0, 1), (1, 2)],
        ]);
        let adj = adjoint_markov(&cyc, &u).unwrap();
        assert_ne!(adj, cyc);
        assert_eq!(adjoint_markov(&adj, &u).unwrap(), cyc);
        let f = vec![rat(1, 1), rat(-2, 3), rat(5, 7)];
        let g = vec![rat(3, 2), rat(0, 1), rat(1, 4)];
        let lhs: Rational = (0..3)
            .map(|j| u.as_slice()[j].clone() * adj.apply(&f)[j].clone() * g[j].clone())
            .sum();
        let rhs: Rational = (0..3)
            .map(|i| u.as_slice()[i].clone() * f[i].clone() * cyc.apply(&g)[i].clone())
            .sum();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn dk_moment_examples() {
        let q = WeightVector::new(vec![rat(1, 2), rat(1, 2)]).unwrap();
        let u = m(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]]);
        let one = vec![rat(1, 1), rat(1, 1)];
        assert_eq!(
            dk_moment(&q, &u, &[one.clone(), one.clone(), one.clone()]).unwrap(),
            rat(1, 1)
        );
        let ind1 = vec![rat(0, 1), rat(1, 1)];
        assert_eq!(dk_moment(&q, &u, std::slice::from_ref(&ind1)).unwrap(), rat(1, 2));
        assert_eq!(dk_moment(&q, &u, &[ind1.clone(), ind1.clone()]).unwrap(), rat(1, 4));

        let q = WeightVector::new(vec![rat(1, 3), rat(2, 3)]).unwrap();
        let r = reversible();
        let model = WindowModel::markov(&q, &r, 0, 2).unwrap();
        let fs = vec![
            vec![rat(2, 1), rat(-1, 3)],
            vec![rat(1, 5), rat(1, 1)],
            vec![rat(0, 1), rat(7, 2)],
        ];
        assert_eq!(dk_moment(&q, &r, &fs).unwrap(), model.expectation_of_product(&fs));
    }

    #[test]
    fn markov_window_passes() {
        let q = WeightVector::new(vec![rat(1, 3), rat(2, 3)]).unwrap();
        let model = WindowModel::markov(&q, &reversible(), -3, 3).unwrap();
        let rep = markovianity_check(&model).unwrap();
        assert_eq!(rep.times.len(), 5);
        assert!(rep.pass());
        let tri = triangular_array_check(&model, 3).unwrap();
        assert!(tri.pass());
        assert_eq!(transition_recover(&model).unwrap(), reversible());
        assert_eq!(transition_recover_n(&model, 3).unwrap(), reversible().pow(3));
    }

    #[test]
    fn degenerate_and_product_windows() {
        let one = WeightVector::new(vec![rat(1, 1)]).unwrap();
        let model = WindowModel::markov(&one, &StochasticMatrix::identity(1), -3, 3).unwrap();
        assert!(markovianity_check(&model).unwrap().pass());
        let rows = m(&[&[(1, 4), (3, 4)], &[(1, 4), (3, 4)]]);
        let q = WeightVector::new(vec![rat(1, 4), rat(3, 4)]).unwrap();
        let model = WindowModel::markov(&q, &rows, 0, 4).unwrap();
        assert!(triangular_array_check(&model, 2).unwrap().pass());
        assert_eq!(transition_recover(&model).unwrap(), rows);
    }

    #[test]
    fn order_two_process_fails() {
        let model = order_two_model(-3, 3, rat(3, 4)).unwrap();
        let rep = markovianity_check(&model).unwrap();
        assert!(!rep.pass());
        let w = rep.times.iter().find_map(|t| t.witness.clone()).unwrap();
        assert_ne!(w.lhs, w.rhs);
        assert!(!triangular_array_check(&model, 2).unwrap().pass());
        // repeat = 1/2 makes it i.i.d. fair coins
        assert!(markovianity_check(&order_two_model(-2, 2, rat(1, 2)).unwrap())
            .unwrap()
            .pass());
    }

    #[test]
    fn window_square_example() {
        use super::super::space::commuting_square_report;
        let q = WeightVector::new(vec![rat(1, 3), rat(2, 3)]).unwrap();
        let model = WindowModel::markov(&q, &reversible(), -1, 1).unwrap();
        let r = commuting_square_report(
            model.space(),
            &model.interval(-1, 0),
            &model.interval(0, 1),
            &model.interval(0, 0),
        )
        .unwrap();
        assert!(r.all_true());
        let bad = order_two_model(-1, 1, rat(3, 4)).unwrap();
        let r = commuting_square_report(
            bad.space(),
            &bad.interval(-1, 0),
            &bad.interval(0, 1),
            &bad.interval(0, 0),
        )
        .unwrap();
        assert_eq!(r.conditions(), [false; 4]);
    }
}
