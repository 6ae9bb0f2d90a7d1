//! Site-level dynamics of the represented generators.
//!
//! The bilateral model lives on `{Mark} ⊔ ℕ₀²`, the unilateral one on
//! `{Mark} ⊔ ℕ₀`. A pull map `σ` gives `(β x)_s = x_{σ(s)}`; the push map
//! `τ = σ⁻¹` says where the content of a site travels. A word `w₁ w₂ …` acts
//! by `τ_{w₁} ∘ τ_{w₂} ∘ …`, so letters are applied right to left.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fword::GroupWord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BiSite {
    Mark,
    Cell(u64, u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UniSite {
    Mark,
    Pos(u64),
}

/// A site of either model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    Bi(BiSite),
    Uni(UniSite),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RepName {
    GroupB,
    GroupM,
    MonoidB,
    MonoidM,
}

impl RepName {
    pub fn is_bilateral(self) -> bool {
        matches!(self, RepName::GroupB | RepName::GroupM)
    }

    pub fn is_monoid(self) -> bool {
        !self.is_bilateral()
    }

    pub fn has_coupling(self) -> bool {
        matches!(self, RepName::GroupM | RepName::MonoidM)
    }

    pub fn all() -> [RepName; 4] {
        [RepName::GroupB, RepName::GroupM, RepName::MonoidB, RepName::MonoidM]
    }
}

impl fmt::Display for RepName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepName::GroupB => "B",
            RepName::GroupM => "M",
            RepName::MonoidB => "monoidB",
            RepName::MonoidM => "monoidM",
        })
    }
}

impl FromStr for RepName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" | "GroupB" => Ok(RepName::GroupB),
            "M" | "GroupM" => Ok(RepName::GroupM),
            "monoidB" | "MonoidB" => Ok(RepName::MonoidB),
            "monoidM" | "MonoidM" => Ok(RepName::MonoidM),
            _ => Err(Error::Syntax {
                pos: 0,
                msg: format!("unknown representation {s:?} (expected B, M, monoidB, monoidM)"),
            }),
        }
    }
}

impl fmt::Display for BiSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BiSite::Mark => f.write_str("mark"),
            BiSite::Cell(i, j) => write!(f, "{i},{j}"),
        }
    }
}

impl fmt::Display for UniSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UniSite::Mark => f.write_str("mark"),
            UniSite::Pos(n) => write!(f, "{n}"),
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Bi(s) => s.fmt(f),
            Site::Uni(s) => s.fmt(f),
        }
    }
}

/// Parses `"mark"`, `"i,j"` or `"n"`.
pub fn parse_site(text: &str) -> Result<Site> {
    let t = text.trim();
    let num = |s: &str, pos: usize| {
        s.trim().parse::<u64>().map_err(|_| Error::Syntax {
            pos,
            msg: format!("expected a nonnegative integer, found {:?}", s.trim()),
        })
    };
    if t.eq_ignore_ascii_case("mark") {
        // ambiguous between the two models; callers resolve with the rep
        return Ok(Site::Bi(BiSite::Mark));
    }
    match t.split_once(',') {
        Some((i, j)) => Ok(Site::Bi(BiSite::Cell(num(i, 0)?, num(j, i.len() + 1)?))),
        None => Ok(Site::Uni(UniSite::Pos(num(t, 0)?))),
    }
}

/// Parses a site for a given representation, mapping `mark` to the right model.
pub fn parse_site_for(rep: RepName, text: &str) -> Result<Site> {
    let s = parse_site(text)?;
    match (rep.is_bilateral(), s) {
        (true, Site::Bi(_)) => Ok(s),
        (false, Site::Bi(BiSite::Mark)) => Ok(Site::Uni(UniSite::Mark)),
        (false, Site::Uni(_)) => Ok(s),
        _ => Err(Error::UnsupportedPairing {
            rep: rep.to_string(),
            site: s.to_string(),
        }),
    }
}

fn overflow() -> Error {
    Error::ResourceLimit {
        what: "site coordinate overflow",
        limit: u64::MAX as usize,
    }
}

pub fn checked_pull(k: u64, s: BiSite) -> Option<BiSite> {
    match s {
        BiSite::Mark => Some(BiSite::Mark),
        BiSite::Cell(i, j) if j < k => Some(BiSite::Cell(i, j)),
        BiSite::Cell(i, j) if j == k => Some(BiSite::Cell(i.checked_mul(2)?.checked_add(1)?, k)),
        BiSite::Cell(i, j) if j == k + 1 => Some(BiSite::Cell(i.checked_mul(2)?, k)),
        BiSite::Cell(i, j) => Some(BiSite::Cell(i, j - 1)),
    }
}

pub fn checked_push(k: u64, s: BiSite) -> Option<BiSite> {
    match s {
        BiSite::Mark => Some(BiSite::Mark),
        BiSite::Cell(i, j) if j < k => Some(BiSite::Cell(i, j)),
        BiSite::Cell(i, j) if j == k && i % 2 == 1 => Some(BiSite::Cell(i / 2, k)),
        BiSite::Cell(i, j) if j == k => Some(BiSite::Cell(i / 2, k.checked_add(1)?)),
        BiSite::Cell(i, j) => Some(BiSite::Cell(i, j.checked_add(1)?)),
    }
}

/// Pullback `σ_k`.
///
/// # Panics
/// On coordinate overflow (`i ≥ 2^63` in column `k` or `k + 1`).
pub fn beta_pull(k: u64, s: BiSite) -> BiSite {
    checked_pull(k, s).expect("site coordinate overflow")
}

/// Pushforward `τ_k = σ_k⁻¹`.
///
/// # Panics
/// On coordinate overflow (column index `u64::MAX`).
pub fn beta_push(k: u64, s: BiSite) -> BiSite {
    checked_push(k, s).expect("site coordinate overflow")
}

pub fn checked_tilde_push(k: u64, s: UniSite) -> Option<UniSite> {
    match s {
        UniSite::Mark => Some(UniSite::Mark),
        UniSite::Pos(n) if n < k => Some(UniSite::Pos(n)),
        UniSite::Pos(n) => Some(UniSite::Pos(n.checked_add(1)?)),
    }
}

/// Unilateral push: positions below `k` stay, the rest move up by one.
///
/// # Panics
/// On `Pos(u64::MAX)`.
pub fn tilde_push(k: u64, s: UniSite) -> UniSite {
    checked_tilde_push(k, s).expect("site coordinate overflow")
}

/// Left inverse of [`tilde_push`]; `None` on `Pos(k)`, which is not an image.
pub fn tilde_pull(k: u64, s: UniSite) -> Option<UniSite> {
    match s {
        UniSite::Mark => Some(UniSite::Mark),
        UniSite::Pos(n) if n < k => Some(UniSite::Pos(n)),
        UniSite::Pos(n) if n == k => None,
        UniSite::Pos(n) => Some(UniSite::Pos(n - 1)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ActionResult {
    pub site: Site,
    pub coupling_events: u64,
}

fn in_coupling_region(s: Site) -> bool {
    matches!(
        s,
        Site::Bi(BiSite::Mark) | Site::Bi(BiSite::Cell(0, 0)) | Site::Uni(UniSite::Mark) | Site::Uni(UniSite::Pos(0))
    )
}

/// Transports site content along a word.
///
/// Under the coupled representations every unit `g0` first pushes and then
/// counts an event if the site landed in the coupling region; `g0^-1` counts
/// first and then pulls.
pub fn act_word(rep: RepName, w: &GroupWord, s: Site) -> Result<ActionResult> {
    let pairing = || Error::UnsupportedPairing {
        rep: rep.to_string(),
        site: s.to_string(),
    };
    match (rep.is_bilateral(), s) {
        (true, Site::Bi(_)) | (false, Site::Uni(_)) => {}
        _ => return Err(pairing()),
    }
    if rep.is_monoid() {
        if let Some(l) = w.letters().iter().find(|l| l.exponent < 0) {
            return Err(Error::InverseInMonoid {
                index: l.index.0,
                exponent: l.exponent,
            });
        }
    }
    let mut site = s;
    let mut events = 0u64;
    for l in w.letters().iter().rev() {
        let k = l.index.0;
        let coupled = rep.has_coupling() && k == 0;
        for _ in 0..l.exponent.unsigned_abs() {
            if l.exponent > 0 {
                site = match site {
                    Site::Bi(b) => Site::Bi(checked_push(k, b).ok_or_else(overflow)?),
                    Site::Uni(u) => Site::Uni(checked_tilde_push(k, u).ok_or_else(overflow)?),
                };
                if coupled && in_coupling_region(site) {
                    events += 1;
                }
            } else {
                if coupled && in_coupling_region(site) {
                    events += 1;
                }
                site = match site {
                    Site::Bi(b) => Site::Bi(checked_pull(k, b).ok_or_else(overflow)?),
                    Site::Uni(_) => unreachable!("monoid words are positive"),
                };
            }
        }
    }
    Ok(ActionResult {
        site,
        coupling_events: events,
    })
}

/// Sites fixed pointwise by every power of a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedSupport {
    /// `Mark` and every cell with column `< columns`.
    Bi { columns: u64 },
    /// `Mark` and every position `< positions`.
    Uni { positions: u64 },
}

impl FixedSupport {
    pub fn contains(&self, s: Site) -> bool {
        match (self, s) {
            (_, Site::Bi(BiSite::Mark)) | (_, Site::Uni(UniSite::Mark)) => true,
            (FixedSupport::Bi { columns }, Site::Bi(BiSite::Cell(_, j))) => j < *columns,
            (FixedSupport::Uni { positions }, Site::Uni(UniSite::Pos(n))) => n < *positions,
            _ => false,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            FixedSupport::Bi { columns: 0 } | FixedSupport::Uni { positions: 0 } => "{mark}".into(),
            FixedSupport::Bi { columns: 1 } => "{mark} + column 0".into(),
            FixedSupport::Bi { columns } => format!("{{mark}} + columns 0..{}", columns - 1),
            FixedSupport::Uni { positions } => format!("{{mark}} + positions 0..{}", positions - 1),
        }
    }
}

pub fn fixed_support(rep: RepName, k: u64) -> Result<FixedSupport> {
    match rep {
        RepName::GroupB => Ok(FixedSupport::Bi { columns: k }),
        RepName::MonoidB => Ok(FixedSupport::Uni { positions: k }),
        _ => Err(Error::Precondition(format!(
            "fixed supports are defined for B and monoidB, not {rep}"
        ))),
    }
}

/// Outcome of certifying a fixed support on a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportCertificate {
    pub support: FixedSupport,
    pub sites_checked: u64,
    /// Sites where the orbit analysis disagrees with the descriptor.
    pub mismatches: Vec<Site>,
}

impl SupportCertificate {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Classifies a site under `τ_k`: `true` if it is fixed, `false` if its forward
/// orbit is infinite.
///
/// Non-fixed orbits are followed until they enter the escape region (column
/// `> k`, or position `≥ k`), where the map strictly increases a coordinate
/// forever. Column `k` reaches it in at most `log₂ i + 1` steps.
fn orbit_is_fixed(k: u64, s: Site) -> Option<bool> {
    match s {
        Site::Bi(b) => {
            if checked_push(k, b)? == b {
                return Some(true);
            }
            let mut cur = b;
            loop {
                match cur {
                    BiSite::Cell(_, j) if j > k => return Some(false),
                    _ => {}
                }
                let next = checked_push(k, cur)?;
                if next == b {
                    // periodic non-fixed orbit
                    return None;
                }
                cur = next;
            }
        }
        Site::Uni(u) => {
            if checked_tilde_push(k, u)? == u {
                return Some(true);
            }
            match u {
                UniSite::Pos(n) if n >= k => Some(false),
                _ => None,
            }
        }
    }
}

/// Checks the fixed-support descriptor against orbit analysis of every site
/// (plus `Mark`) with coordinates below `window`.
pub fn certify_fixed_support(rep: RepName, k: u64, window: u64) -> Result<SupportCertificate> {
    let support = fixed_support(rep, k)?;
    let mut sites: Vec<Site> = Vec::new();
    if rep.is_bilateral() {
        sites.push(Site::Bi(BiSite::Mark));
        for i in 0..window {
            for j in 0..window {
                sites.push(Site::Bi(BiSite::Cell(i, j)));
            }
        }
    } else {
        sites.push(Site::Uni(UniSite::Mark));
        sites.extend((0..window).map(|n| Site::Uni(UniSite::Pos(n))));
    }
    let mut mismatches = Vec::new();
    for &s in &sites {
        match orbit_is_fixed(k, s) {
            Some(fixed) if fixed == support.contains(s) => {}
            _ => mismatches.push(s),
        }
    }
    Ok(SupportCertificate {
        support,
        sites_checked: sites.len() as u64,
        mismatches,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationReport {
    pub rep: RepName,
    pub k: u64,
    pub l: u64,
    pub window: u64,
    pub sites_checked: u64,
    /// First site where `g_k g_l` and `g_{l+1} g_k` disagree.
    pub witness: Option<Site>,
    pub lhs: Option<ActionResult>,
    pub rhs: Option<ActionResult>,
}

impl RelationReport {
    pub fn pass(&self) -> bool {
        self.witness.is_none()
    }
}

/// Checks `g_k g_l = g_{l+1} g_k` at site level on every site with
/// coordinates below `window`. Images are computed from the closed forms, so
/// nothing is clamped at the window boundary. Under the coupled
/// representations the event counts must agree too.
pub fn verify_relation(rep: RepName, k: u64, l: u64, window: u64) -> Result<RelationReport> {
    let lhs_w = GroupWord::from_pairs([(k, 1), (l, 1)]);
    let l1 = l.checked_add(1).ok_or_else(overflow)?;
    let rhs_w = GroupWord::from_pairs([(l1, 1), (k, 1)]);
    let mut report = RelationReport {
        rep,
        k,
        l,
        window,
        sites_checked: 0,
        witness: None,
        lhs: None,
        rhs: None,
    };
    let mut check = |s: Site| -> Result<bool> {
        report.sites_checked += 1;
        let a = act_word(rep, &lhs_w, s)?;
        let b = act_word(rep, &rhs_w, s)?;
        if a != b {
            report.witness = Some(s);
            report.lhs = Some(a);
            report.rhs = Some(b);
            return Ok(false);
        }
        Ok(true)
    };
    if rep.is_bilateral() {
        if !check(Site::Bi(BiSite::Mark))? {
            return Ok(report);
        }
        for i in 0..window {
            for j in 0..window {
                if !check(Site::Bi(BiSite::Cell(i, j)))? {
                    return Ok(report);
                }
            }
        }
    } else {
        if !check(Site::Uni(UniSite::Mark))? {
            return Ok(report);
        }
        for n in 0..window {
            if !check(Site::Uni(UniSite::Pos(n)))? {
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// Whether `τ_k` fixes both `Mark` and `Cell(0,0)`. Only meaningful for `k ≥ 1`.
pub fn coupling_region_fixed(k: u64) -> Result<bool> {
    if k == 0 {
        return Err(Error::Precondition(
            "coupling_region_fixed requires k >= 1; g0 moves the coupling region".into(),
        ));
    }
    Ok(beta_push(k, BiSite::Mark) == BiSite::Mark && beta_push(k, BiSite::Cell(0, 0)) == BiSite::Cell(0, 0))
}

/// Whether `beta_push ∘ beta_pull` and `beta_pull ∘ beta_push` are the
/// identity on the window. Returns the first failing site.
pub fn check_bijectivity(k: u64, window: u64) -> Option<BiSite> {
    std::iter::once(BiSite::Mark)
        .chain((0..window).flat_map(|i| (0..window).map(move |j| BiSite::Cell(i, j))))
        .find(|&s| beta_push(k, beta_pull(k, s)) != s || beta_pull(k, beta_push(k, s)) != s)
}
