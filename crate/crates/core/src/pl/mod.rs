//! Piecewise-linear model of `F` over the dyadic rationals.
//!
//! Every element of `F` acts on `[0, 1]` as a PL homeomorphism with dyadic
//! breakpoints and power-of-two slopes. The action is faithful, which makes
//! exact map equality an independent oracle for the word problem.

mod dyadic;

pub use dyadic::Dyadic;

use crate::error::{Error, Result};
use crate::fword::GroupWord;

/// Exact PL homeomorphism of `[0, 1]` in canonical form.
///
/// Breakpoints are minimal (no collinear triples), so two maps are equal as
/// functions iff their point lists are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlMap {
    points: Vec<(Dyadic, Dyadic)>,
    // log2 of the slope on each segment
    slopes: Vec<i64>,
}

impl PlMap {
    pub fn identity() -> Self {
        PlMap {
            points: vec![(Dyadic::zero(), Dyadic::zero()), (Dyadic::one(), Dyadic::one())],
            slopes: vec![0],
        }
    }

    /// Validates and canonicalizes a list of `(breakpoint, value)` pairs.
    pub fn from_points(points: Vec<(Dyadic, Dyadic)>) -> Result<Self> {
        let bad = |m: &str| Err(Error::OutOfDomain(format!("invalid PL map: {m}")));
        if points.len() < 2 {
            return bad("fewer than two points");
        }
        let (first, last) = (&points[0], &points[points.len() - 1]);
        if !first.0.is_zero() || !first.1.is_zero() {
            return bad("does not start at (0, 0)");
        }
        if last.0 != Dyadic::one() || last.1 != Dyadic::one() {
            return bad("does not end at (1, 1)");
        }
        let mut kept: Vec<(Dyadic, Dyadic)> = Vec::with_capacity(points.len());
        let mut slopes: Vec<i64> = Vec::with_capacity(points.len());
        for p in points {
            if let Some(prev) = kept.last() {
                if p.0 <= prev.0 || p.1 <= prev.1 {
                    return bad("not strictly increasing");
                }
                let slope = match (&p.1 - &prev.1).log2_ratio(&(&p.0 - &prev.0)) {
                    Some(s) => s,
                    None => return bad("slope is not a power of two"),
                };
                if slopes.last() == Some(&slope) {
                    kept.pop();
                    slopes.pop();
                    let prev = kept.last().expect("first point is never dropped");
                    let merged = (&p.1 - &prev.1)
                        .log2_ratio(&(&p.0 - &prev.0))
                        .expect("collinear merge keeps the slope");
                    debug_assert_eq!(merged, slope);
                }
                slopes.push(slope);
            }
            kept.push(p);
        }
        Ok(PlMap { points: kept, slopes })
    }

    pub fn points(&self) -> &[(Dyadic, Dyadic)] {
        &self.points
    }

    pub fn slopes_log2(&self) -> &[i64] {
        &self.slopes
    }

    /// Largest dyadic exponent among breakpoints and values.
    pub fn max_exponent(&self) -> u32 {
        self.points
            .iter()
            .map(|(x, y)| x.exponent().max(y.exponent()))
            .max()
            .unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        self.points.len() == 2
    }

    fn segment(&self, t: &Dyadic) -> usize {
        // last index with x <= t, clamped to a valid segment start
        let idx = self.points.partition_point(|(x, _)| x <= t);
        idx.saturating_sub(1).min(self.slopes.len() - 1)
    }

    pub fn eval(&self, t: &Dyadic) -> Result<Dyadic> {
        if t.is_negative() || *t > Dyadic::one() {
            return Err(Error::OutOfDomain(format!("{t} is outside [0, 1]")));
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: &Dyadic) -> Dyadic {
        let s = self.segment(t);
        let (x0, y0) = &self.points[s];
        &(t - x0).shl(self.slopes[s]) + y0
    }

    pub fn inverse(&self) -> PlMap {
        PlMap {
            points: self.points.iter().map(|(x, y)| (y.clone(), x.clone())).collect(),
            slopes: self.slopes.iter().map(|s| -s).collect(),
        }
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &PlMap) -> PlMap {
        let inner_inv = inner.inverse();
        let mut xs: Vec<Dyadic> = inner.points.iter().map(|(x, _)| x.clone()).collect();
        xs.extend(self.points.iter().map(|(x, _)| inner_inv.eval_unchecked(x)));
        xs.sort();
        xs.dedup();
        let points = xs
            .into_iter()
            .map(|x| {
                let y = self.eval_unchecked(&inner.eval_unchecked(&x));
                (x, y)
            })
            .collect();
        PlMap::from_points(points).expect("composition of PL homeomorphisms")
    }

    pub fn pow(&self, e: i64) -> PlMap {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = PlMap::identity();
        for _ in 0..e.unsigned_abs() {
            out = out.compose(&base);
        }
        out
    }

    /// Breakpoint/value pairs as exact `"a/2^e"` strings.
    pub fn to_strings(&self) -> Vec<[String; 2]> {
        self.points
            .iter()
            .map(|(x, y)| [x.to_string(), y.to_string()])
            .collect()
    }
}

fn pt(n: u64, e: u32, m: u64, f: u32) -> (Dyadic, Dyadic) {
    (Dyadic::new(n, e), Dyadic::new(m, f))
}

/// The usual first literature generator `A`. Our `g0` is its inverse.
pub fn standard_a() -> PlMap {
    PlMap::from_points(vec![pt(0, 0, 0, 0), pt(1, 1, 1, 2), pt(3, 2, 1, 1), pt(1, 0, 1, 0)])
        .expect("A is a PL homeomorphism")
}

/// The usual second literature generator `B`. Our `g1` is its inverse.
pub fn standard_b() -> PlMap {
    PlMap::from_points(vec![
        pt(0, 0, 0, 0),
        pt(1, 1, 1, 1),
        pt(3, 2, 5, 3),
        pt(7, 3, 3, 2),
        pt(1, 0, 1, 0),
    ])
    .expect("B is a PL homeomorphism")
}

/// PL map of `g_k`.
///
/// `g0 = A^-1` and `g1 = B^-1`; for `k >= 2` the relation
/// `g0 g_l g0^-1 = g_{l+1}` forces `g_k = g0^(k-1) g1 g0^-(k-1)`, which is
/// the `A^-1` profile rescaled onto `[1 - 2^-k, 1]`. That closed form is what
/// gets built here; tests compare it with the conjugation and check every
/// defining relation.
///
/// # Panics
/// If `k >= 2^31`, where dyadic exponents stop fitting in `u32`.
pub fn pl_generator(k: u64) -> PlMap {
    let k: u32 = u32::try_from(k)
        .ok()
        .filter(|&k| k < (1 << 31))
        .expect("generator index too large for the PL model");
    // left end a = 1 - 2^-k, width h = 2^-k
    let a = Dyadic::new((num_bigint::BigInt::from(1) << k) - 1, k);
    let h = |num: u64, den_log: u32| Dyadic::new(num, k + den_log);
    let mut points = vec![(Dyadic::zero(), Dyadic::zero())];
    if k > 0 {
        points.push((a.clone(), a.clone()));
    }
    points.push((&a + &h(1, 2), &a + &h(1, 1)));
    points.push((&a + &h(1, 1), &a + &h(3, 2)));
    points.push((Dyadic::one(), Dyadic::one()));
    PlMap::from_points(points).expect("generator profile is a PL homeomorphism")
}

/// `w1 w2 ... ↦ pl(w1) ∘ pl(w2) ∘ ...`.
pub fn word_to_pl(w: &GroupWord) -> PlMap {
    w.letters().iter().fold(PlMap::identity(), |acc, l| {
        acc.compose(&pl_generator(l.index.0).pow(l.exponent))
    })
}

pub fn pl_compose(f: &PlMap, g: &PlMap) -> PlMap {
    f.compose(g)
}

pub fn pl_invert(f: &PlMap) -> PlMap {
    f.inverse()
}

pub fn pl_eval(f: &PlMap, t: &Dyadic) -> Result<Dyadic> {
    f.eval(t)
}

pub fn pl_equal(f: &PlMap, g: &PlMap) -> bool {
    f == g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fword::parse_word;

    fn d(n: i64, e: u32) -> Dyadic {
        Dyadic::new(n, e)
    }

    #[test]
    fn generator_examples() {
        let g0 = pl_generator(0);
        assert_eq!(g0.eval(&d(1, 2)).unwrap(), d(1, 1));
        assert_eq!(g0.eval(&d(1, 0)).unwrap(), d(1, 0));
        for k in 0..12 {
            let g = pl_generator(k);
            assert_eq!(g.eval(&Dyadic::zero()).unwrap(), Dyadic::zero());
            assert_eq!(g.eval(&Dyadic::one()).unwrap(), Dyadic::one());
        }
    }

    #[test]
    fn generators_unwind_to_literature_pair() {
        assert_eq!(pl_invert(&pl_generator(0)), standard_a());
        assert_eq!(pl_invert(&pl_generator(1)), standard_b());
    }

    #[test]
    fn closed_form_matches_conjugation() {
        let g0 = pl_generator(0);
        let mut conj = pl_generator(1);
        for k in 2..=10 {
            conj = g0.compose(&conj).compose(&g0.inverse());
            assert_eq!(conj, pl_generator(k), "k = {k}");
        }
        assert_eq!(
            pl_generator(2),
            pl_compose(&pl_compose(&g0, &pl_generator(1)), &pl_invert(&g0))
        );
    }

    #[test]
    fn defining_relations_hold_exactly() {
        for k in 0..=8u64 {
            for l in (k + 1)..=8 {
                let lhs = pl_generator(k).compose(&pl_generator(l));
                let rhs = pl_generator(l + 1).compose(&pl_generator(k));
                assert_eq!(lhs, rhs, "k = {k}, l = {l}");
            }
        }
        // and the non-relation g0 g1 != g1 g0
        assert_ne!(
            pl_generator(0).compose(&pl_generator(1)),
            pl_generator(1).compose(&pl_generator(0))
        );
    }

    #[test]
    fn compose_and_invert_basics() {
        let id = PlMap::identity();
        let g = pl_generator(3);
        assert_eq!(pl_compose(&id, &g), g);
        assert!(pl_compose(&g, &pl_invert(&g)).is_identity());
        assert_eq!(pl_invert(&pl_invert(&g)), g);
        assert_eq!(pl_invert(&id), id);
        assert_eq!(id.eval(&d(3, 3)).unwrap(), d(3, 3));
        assert!(id.eval(&d(3, 1)).is_err());
        assert!(id.eval(&d(-1, 1)).is_err());
    }

    #[test]
    fn equality_examples() {
        assert!(pl_equal(&PlMap::identity(), &PlMap::identity()));
        assert!(!pl_equal(&pl_generator(0), &pl_generator(1)));
        let a = word_to_pl(&parse_word("g0 g1").unwrap());
        let b = word_to_pl(&parse_word("g2 g0").unwrap());
        assert!(pl_equal(&a, &b));
        assert!(word_to_pl(&GroupWord::identity()).is_identity());
        assert!(word_to_pl(&parse_word("g0 g0^-1").unwrap()).is_identity());
    }

    #[test]
    fn rejects_bad_maps() {
        assert!(PlMap::from_points(vec![(d(0, 0), d(0, 0))]).is_err());
        // slope 3
        assert!(PlMap::from_points(vec![(d(0, 0), d(0, 0)), (d(1, 2), d(3, 4)), (d(1, 0), d(1, 0))]).is_err());
        // decreasing
        assert!(PlMap::from_points(vec![
            (d(0, 0), d(0, 0)),
            (d(1, 1), d(1, 1)),
            (d(1, 2), d(1, 2)),
            (d(1, 0), d(1, 0))
        ])
        .is_err());
    }

    #[test]
    fn collinear_points_are_removed() {
        let m = PlMap::from_points(vec![(d(0, 0), d(0, 0)), (d(1, 1), d(1, 1)), (d(1, 0), d(1, 0))]).unwrap();
        assert!(m.is_identity());
        assert_eq!(m, PlMap::identity());
    }

    #[test]
    fn parse_dyadic_strings() {
        let m = pl_generator(1);
        let strings = m.to_strings();
        assert_eq!(strings[1], ["1/2^1".to_string(), "1/2^1".to_string()]);
        assert_eq!(strings[2], ["5/2^3".to_string(), "3/2^2".to_string()]);
    }
}
