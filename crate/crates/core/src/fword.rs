//! Word calculus for the Thompson group `F`.
//!
//! Generators are `g0, g1, g2, ...` subject to `g_k g_l = g_{l+1} g_k` for
//! `k < l`. Words are reduced freely on construction; [`normal_form`] solves
//! the word problem by rewriting into the unique normal form
//! `g0^-b0 ... gk^-bk gk^ak ... g0^a0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index `k` of a generator `g_k`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneratorIndex(pub u64);

impl fmt::Display for GeneratorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A power `g_k^e` with `e != 0`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub index: GeneratorIndex,
    pub exponent: i64,
}

impl Letter {
    pub fn new(index: u64, exponent: i64) -> Self {
        debug_assert!(exponent != 0, "letters carry a nonzero exponent");
        Letter {
            index: GeneratorIndex(index),
            exponent,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exponent {
            1 => write!(f, "g{}", self.index),
            e => write!(f, "g{}^{}", self.index, e),
        }
    }
}

/// A freely reduced word in the generators. The empty word is `e`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupWord {
    letters: Vec<Letter>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord::default()
    }

    pub fn generator(k: u64) -> Self {
        GroupWord {
            letters: vec![Letter::new(k, 1)],
        }
    }

    /// Builds a word from `(index, exponent)` pairs, merging as it goes.
    /// Zero exponents are accepted and dropped.
    pub fn from_pairs<I: IntoIterator<Item = (u64, i64)>>(pairs: I) -> Self {
        let mut w = GroupWord::identity();
        for (k, e) in pairs {
            w.push(Letter {
                index: GeneratorIndex(k),
                exponent: e,
            });
        }
        w
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    /// Positive words represent elements of the Thompson monoid `F+`.
    pub fn is_positive(&self) -> bool {
        self.letters.iter().all(|l| l.exponent > 0)
    }

    pub fn max_index(&self) -> Option<u64> {
        self.letters.iter().map(|l| l.index.0).max()
    }

    // Appends one letter, merging with the last one when indices agree.
    fn push(&mut self, letter: Letter) {
        if letter.exponent == 0 {
            return;
        }
        if let Some(last) = self.letters.last_mut() {
            if last.index == letter.index {
                last.exponent += letter.exponent;
                if last.exponent == 0 {
                    self.letters.pop();
                }
                return;
            }
        }
        self.letters.push(letter);
    }

    pub fn multiply(&self, other: &GroupWord) -> GroupWord {
        let mut out = self.clone();
        for &l in &other.letters {
            out.push(l);
        }
        out
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| Letter {
                    index: l.index,
                    exponent: -l.exponent,
                })
                .collect(),
        }
    }

    /// Total number of unit letters `g_k^{+-1}`.
    pub fn unit_length(&self) -> u64 {
        self.letters.iter().map(|l| l.exponent.unsigned_abs()).sum()
    }
}

/// Merges adjacent same-index letters and deletes zero exponents.
pub fn free_reduce(letters: &[Letter]) -> GroupWord {
    let mut w = GroupWord::identity();
    for &l in letters {
        w.push(l);
    }
    w
}

pub fn multiply(u: &GroupWord, v: &GroupWord) -> GroupWord {
    u.multiply(v)
}

pub fn invert(w: &GroupWord) -> GroupWord {
    w.inverse()
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (n, l) in self.letters.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for GroupWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_word(s)
    }
}

/// Parses the word grammar
///
/// ```text
/// word := "e" | term { sep term }
/// term := "g" digits [ "^" [ "-" ] digits ]
/// sep  := whitespace | "*"
/// ```
pub fn parse_word(text: &str) -> Result<GroupWord> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let skip_sep = |pos: &mut usize| {
        while *pos < bytes.len() && (bytes[*pos].is_ascii_whitespace() || bytes[*pos] == b'*') {
            *pos += 1;
        }
    };
    let digits = |pos: &mut usize| -> Option<(usize, usize)> {
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        (*pos > start).then_some((start, *pos))
    };

    if text.trim() == "e" {
        return Ok(GroupWord::identity());
    }
    let mut word = GroupWord::identity();
    let mut terms = 0;
    skip_sep(&mut pos);
    while pos < bytes.len() {
        if bytes[pos] != b'g' {
            return Err(Error::Syntax {
                pos,
                msg: format!("expected 'g', found {:?}", bytes[pos] as char),
            });
        }
        pos += 1;
        if pos < bytes.len() && bytes[pos] == b'-' {
            return Err(Error::NegativeIndex { pos });
        }
        let (s, e) = digits(&mut pos).ok_or(Error::Syntax {
            pos,
            msg: "expected generator index".into(),
        })?;
        let index: u64 = text[s..e].parse().map_err(|_| Error::Syntax {
            pos: s,
            msg: "generator index out of range".into(),
        })?;
        let mut exponent: i64 = 1;
        if pos < bytes.len() && bytes[pos] == b'^' {
            pos += 1;
            let negative = pos < bytes.len() && bytes[pos] == b'-';
            if negative {
                pos += 1;
            }
            let (s, e) = digits(&mut pos).ok_or(Error::Syntax {
                pos,
                msg: "expected exponent digits".into(),
            })?;
            exponent = text[s..e].parse().map_err(|_| Error::Syntax {
                pos: s,
                msg: "exponent out of range".into(),
            })?;
            if negative {
                exponent = -exponent;
            }
        }
        if pos < bytes.len() && !(bytes[pos].is_ascii_whitespace() || bytes[pos] == b'*') {
            return Err(Error::Syntax {
                pos,
                msg: format!("unexpected {:?}", bytes[pos] as char),
            });
        }
        word.push(Letter {
            index: GeneratorIndex(index),
            exponent,
        });
        terms += 1;
        skip_sep(&mut pos);
    }
    if terms == 0 {
        return Err(Error::Syntax {
            pos: 0,
            msg: "empty word (use \"e\" for the identity)".into(),
        });
    }
    Ok(word)
}

/// Exponent vectors of the normal form `g0^-b0 ... gk^-bk gk^ak ... g0^a0`.
///
/// `neg[i] = b_i` and `pos[i] = a_i`; both vectors have the same length and
/// are empty for the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalForm {
    neg: Vec<u64>,
    pos: Vec<u64>,
}

impl NormalForm {
    /// Validates both normal-form conditions before accepting the vectors.
    pub fn new(neg: Vec<u64>, pos: Vec<u64>) -> Result<Self> {
        let nf = NormalForm { neg, pos };
        nf.check()?;
        Ok(nf)
    }

    pub fn neg(&self) -> &[u64] {
        &self.neg
    }

    pub fn pos(&self) -> &[u64] {
        &self.pos
    }

    pub fn is_identity(&self) -> bool {
        self.neg.is_empty()
    }

    /// Checks the top condition (exactly one of `a_k`, `b_k` nonzero) and
    /// the interior condition (if `a_i` and `b_i` are both nonzero then so is
    /// one of `a_{i+1}`, `b_{i+1}`).
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Precondition(msg));
        if self.neg.len() != self.pos.len() {
            return bad("exponent vectors differ in length".into());
        }
        let Some(k) = self.neg.len().checked_sub(1) else {
            return Ok(());
        };
        if (self.neg[k] != 0) == (self.pos[k] != 0) {
            return bad(format!("top index {k}: exactly one of a_k, b_k must be nonzero"));
        }
        for i in 0..k {
            if self.neg[i] != 0 && self.pos[i] != 0 && self.neg[i + 1] == 0 && self.pos[i + 1] == 0 {
                return bad(format!("interior condition fails at index {i}"));
            }
        }
        Ok(())
    }

    /// The word spelled by the normal form.
    pub fn to_word(&self) -> GroupWord {
        let negs = self.neg.iter().enumerate().map(|(i, &b)| (i as u64, -(b as i64)));
        let poss = self.pos.iter().enumerate().rev().map(|(i, &a)| (i as u64, a as i64));
        GroupWord::from_pairs(negs.chain(poss))
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_word())
    }
}

/// Default cap on rewrite steps for [`normal_form`].
pub const DEFAULT_STEP_LIMIT: usize = 1 << 22;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
struct Unit {
    index: u64,
    positive: bool,
}

enum Rule {
    Keep,
    Cancel,
    Swap(Unit, Unit),
}

fn bump(index: u64) -> Result<u64> {
    index.checked_add(1).ok_or(Error::ResourceLimit {
        what: "generator index overflow",
        limit: u64::MAX as usize,
    })
}

// Rewrite rule for the adjacent pair (left, right).
fn rule(left: Unit, right: Unit) -> Result<Rule> {
    let (a, b) = (left.index, right.index);
    let pos = |index| Unit { index, positive: true };
    let neg = |index| Unit { index, positive: false };
    Ok(match (left.positive, right.positive) {
        // g_a g_b -> g_{b+1} g_a
        (true, true) if a < b => Rule::Swap(pos(bump(b)?), pos(a)),
        // g_a^-1 g_b^-1 -> g_b^-1 g_{a+1}^-1
        (false, false) if a > b => Rule::Swap(neg(b), neg(bump(a)?)),
        (true, false) if a == b => Rule::Cancel,
        // g_a g_b^-1 -> g_{b+1}^-1 g_a
        (true, false) if a < b => Rule::Swap(neg(bump(b)?), pos(a)),
        // g_a g_b^-1 -> g_b^-1 g_{a+1}
        (true, false) => Rule::Swap(neg(b), pos(bump(a)?)),
        (false, true) if a == b => Rule::Cancel,
        _ => Rule::Keep,
    })
}

/// Normal form with the default step cap.
pub fn normal_form(w: &GroupWord) -> Result<NormalForm> {
    normal_form_with_limit(w, DEFAULT_STEP_LIMIT)
}

/// Rewrites `w` into its unique normal form.
///
/// Unit letters are first sorted into seminormal form (inverse letters on
/// the left with non-decreasing indices, positive letters on the right with
/// non-increasing indices) by the adjacent-swap rules derived from the
/// defining relations. Then `g_i^-1 X g_i` is collapsed whenever `X` only
/// involves indices `>= i + 2`, which shifts those indices down by one.
pub fn normal_form_with_limit(w: &GroupWord, step_limit: usize) -> Result<NormalForm> {
    let total = w.unit_length();
    if total > step_limit as u64 {
        return Err(Error::ResourceLimit {
            what: "unit letters in input word",
            limit: step_limit,
        });
    }
    let mut pending: Vec<Unit> = Vec::with_capacity(total as usize);
    for l in w.letters().iter().rev() {
        for _ in 0..l.exponent.unsigned_abs() {
            pending.push(Unit {
                index: l.index.0,
                positive: l.exponent > 0,
            });
        }
    }

    let mut out: Vec<Unit> = Vec::with_capacity(pending.len());
    let mut steps = 0usize;
    while let Some(next) = pending.pop() {
        let Some(&top) = out.last() else {
            out.push(next);
            continue;
        };
        match rule(top, next)? {
            Rule::Keep => out.push(next),
            Rule::Cancel => {
                out.pop();
            }
            Rule::Swap(first, second) => {
                out.pop();
                pending.push(second);
                pending.push(first);
            }
        }
        steps += 1;
        if steps > step_limit {
            return Err(Error::ResourceLimit {
                what: "rewrite steps",
                limit: step_limit,
            });
        }
    }

    let len = out.iter().map(|u| u.index + 1).max().unwrap_or(0) as usize;
    let mut neg = vec![0u64; len];
    let mut pos = vec![0u64; len];
    for u in &out {
        if u.positive {
            pos[u.index as usize] += 1;
        } else {
            neg[u.index as usize] += 1;
        }
    }

    // Collapse g_i^-1 ... g_i around a block that skips index i + 1.
    loop {
        let n = neg.len();
        let hit = (0..n)
            .rev()
            .find(|&i| neg[i] > 0 && pos[i] > 0 && (i + 1 >= n || (neg[i + 1] == 0 && pos[i + 1] == 0)));
        let Some(i) = hit else { break };
        neg[i] -= 1;
        pos[i] -= 1;
        if i + 1 < n {
            neg.remove(i + 1);
            pos.remove(i + 1);
        }
        while neg.last() == Some(&0) && pos.last() == Some(&0) {
            neg.pop();
            pos.pop();
        }
        steps += 1;
        if steps > step_limit {
            return Err(Error::ResourceLimit {
                what: "rewrite steps",
                limit: step_limit,
            });
        }
    }

    let nf = NormalForm { neg, pos };
    debug_assert!(nf.check().is_ok(), "rewriter produced {nf:?}");
    Ok(nf)
}

/// Equality in `F`.
pub fn equal(u: &GroupWord, v: &GroupWord) -> Result<bool> {
    Ok(normal_form(u)? == normal_form(v)?)
}

pub fn is_identity(w: &GroupWord) -> Result<bool> {
    Ok(normal_form(w)?.is_identity())
}

/// The `(m, n)`-partial shift `g0 -> g_m`, `g_k -> g_{n+k}` for `k >= 1`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialShift {
    m: u64,
    n: u64,
}

impl PartialShift {
    pub fn new(m: u64, n: u64) -> Result<Self> {
        if m > n {
            return Err(Error::InvalidShift { m, n });
        }
        Ok(PartialShift { m, n })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn image_index(&self, k: u64) -> u64 {
        if k == 0 {
            self.m
        } else {
            self.n + k
        }
    }

    pub fn apply(&self, w: &GroupWord) -> GroupWord {
        GroupWord::from_pairs(w.letters().iter().map(|l| (self.image_index(l.index.0), l.exponent)))
    }
}

pub fn partial_shift(sh: PartialShift, w: &GroupWord) -> GroupWord {
    sh.apply(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> GroupWord {
        parse_word(s).unwrap()
    }

    fn pairs(word: &GroupWord) -> Vec<(u64, i64)> {
        word.letters().iter().map(|l| (l.index.0, l.exponent)).collect()
    }

    #[test]
    fn parse_examples() {
        assert!(w("e").is_empty());
        assert_eq!(pairs(&w("g0^-1 g2")), vec![(0, -1), (2, 1)]);
        assert!(w("g1 g1^2 g1^-3").is_empty());
        assert_eq!(pairs(&w("g3*g4^2 *  g5")), vec![(3, 1), (4, 2), (5, 1)]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_word("g-1"), Err(Error::NegativeIndex { pos: 1 })));
        assert!(matches!(parse_word("h1"), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse_word("g1 x"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse_word("g^2"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_word("g1^"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_word("g1g2"), Err(Error::Syntax { pos: 2, .. })));
        assert!(parse_word("").is_err());
        assert!(parse_word("e g1").is_err());
    }

    #[test]
    fn free_reduce_examples() {
        let l = |k, e| Letter::new(k, e);
        assert!(free_reduce(&[l(0, 1), l(0, -1)]).is_empty());
        assert_eq!(pairs(&free_reduce(&[l(0, 1), l(1, 1)])), vec![(0, 1), (1, 1)]);
        assert_eq!(
            pairs(&free_reduce(&[l(2, 1), l(2, 1), l(3, -1)])),
            vec![(2, 2), (3, -1)]
        );
    }

    #[test]
    fn multiply_and_invert() {
        let g0 = GroupWord::generator(0);
        assert_eq!(multiply(&GroupWord::identity(), &g0), g0);
        assert!(multiply(&g0, &g0.inverse()).is_empty());
        assert_eq!(pairs(&multiply(&g0, &GroupWord::generator(1))), vec![(0, 1), (1, 1)]);
        assert!(invert(&GroupWord::identity()).is_empty());
        assert_eq!(pairs(&invert(&w("g0 g1"))), vec![(1, -1), (0, -1)]);
    }

    #[test]
    fn normal_form_examples() {
        let nf = normal_form(&w("g0 g1")).unwrap();
        assert_eq!(nf.pos(), &[1, 0, 1]);
        assert_eq!(nf.neg(), &[0, 0, 0]);
        assert_eq!(nf.to_string(), "g2 g0");

        let nf = normal_form(&w("g1 g0^-1")).unwrap();
        assert_eq!(nf.neg(), &[1, 0, 0]);
        assert_eq!(nf.pos(), &[0, 0, 1]);
        assert_eq!(nf.to_string(), "g0^-1 g2");

        let nf = normal_form(&w("g0^-1 g2 g0")).unwrap();
        assert_eq!(nf.to_string(), "g1");
        assert!(normal_form(&w("e")).unwrap().is_identity());
    }

    #[test]
    fn canonical_text() {
        let nf = NormalForm::new(vec![1, 0, 1], vec![1, 1, 0]).unwrap();
        assert_eq!(nf.to_string(), "g0^-1 g2^-1 g1 g0");
        let nf = NormalForm::new(vec![2, 0], vec![0, 3]).unwrap();
        assert_eq!(nf.to_string(), "g0^-2 g1^3");
    }

    #[test]
    fn normal_form_validation() {
        assert!(NormalForm::new(vec![1], vec![1]).is_err());
        assert!(NormalForm::new(vec![0], vec![0]).is_err());
        // a_0 = b_0 = 1 with nothing at index 1 but a_2 = 1
        assert!(NormalForm::new(vec![1, 0, 0], vec![1, 0, 1]).is_err());
        assert!(NormalForm::new(vec![1, 1], vec![1, 0]).is_ok());
    }

    #[test]
    fn equality_examples() {
        assert!(equal(&w("g0 g1"), &w("g2 g0")).unwrap());
        assert!(!equal(&w("g0 g1"), &w("g1 g0")).unwrap());
        assert!(equal(&w("g3 g1^-2"), &w("g3 g1^-2")).unwrap());
    }

    #[test]
    fn identity_examples() {
        assert!(is_identity(&GroupWord::identity()).unwrap());
        assert!(is_identity(&w("g0 g1 g0^-1 g2^-1")).unwrap());
        assert!(!is_identity(&w("g5")).unwrap());
    }

    #[test]
    fn partial_shift_examples() {
        let sh = PartialShift::new(1, 2).unwrap();
        assert_eq!(sh.apply(&w("g0 g1")).to_string(), "g1 g3");
        let id = PartialShift::new(0, 0).unwrap();
        let x = w("g0^-2 g3 g1 g4^2");
        assert_eq!(id.apply(&x), x);
        assert!(!is_identity(&sh.apply(&w("g1 g0^-1"))).unwrap());
        assert!(matches!(
            PartialShift::new(3, 1),
            Err(Error::InvalidShift { m: 3, n: 1 })
        ));
    }

    #[test]
    fn step_limit_is_reported() {
        let word = w("g0^-40 g1^40");
        assert!(matches!(
            normal_form_with_limit(&word, 10),
            Err(Error::ResourceLimit { .. })
        ));
        assert!(normal_form(&word).is_ok());
    }
}
