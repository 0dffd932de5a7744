//! Parity-constrained searches over spaces of plane curves over `F_2`.
//!
//! A campaign is a basis split into five sets `S_1..S_5`. Admissible forms are the
//! sum of all of `S_1` plus an odd-size subset of each nonempty `S_i`, `i ≥ 2`; by
//! construction they vanish at no rational point. Candidates are rejected when
//! they have a smooth point of a forbidden degree, or when they miss every
//! required point. Evaluation is linear over `F_2`, so every basis form is
//! precomputed as bit-planes of its values and a mask's values are the XOR of
//! the rows it includes.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gfield::{Fe, Field, FieldCtx};
use crate::homforms::{monomials, num_monomials, TernaryForm};
use crate::projplane::{closed_points, ProjPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CampaignId {
    G6D7,
    G7D8,
    G7D9C1,
    G7D9C2,
    G7D9C3,
}

impl CampaignId {
    pub const ALL: [CampaignId; 5] =
        [CampaignId::G6D7, CampaignId::G7D8, CampaignId::G7D9C1, CampaignId::G7D9C2, CampaignId::G7D9C3];
}

impl fmt::Display for CampaignId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CampaignId::G6D7 => "G6D7",
            CampaignId::G7D8 => "G7D8",
            CampaignId::G7D9C1 => "G7D9C1",
            CampaignId::G7D9C2 => "G7D9C2",
            CampaignId::G7D9C3 => "G7D9C3",
        };
        f.write_str(s)
    }
}

impl FromStr for CampaignId {
    type Err = Error;
    fn from_str(s: &str) -> Result<CampaignId> {
        CampaignId::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownCampaign(s.to_string()))
    }
}

/// A required vanishing order at a point defined over `F_{2^r}`.
#[derive(Clone, Debug)]
pub struct VanishingCondition {
    pub ext_degree: u32,
    pub point: String,
    pub order: u32,
}

#[derive(Clone, Debug)]
pub struct BasisFamily {
    pub degree: u32,
    pub sets: [Vec<TernaryForm>; 5],
    pub vanishing: Vec<VanishingCondition>,
}

impl BasisFamily {
    pub fn len(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Basis elements in canonical order (`S_1` first, each set in listed order).
    pub fn elements(&self) -> impl Iterator<Item = &TernaryForm> {
        self.sets.iter().flatten()
    }

    /// `Σ (|S_i| − 1)` over nonempty `S_i`, `i ≥ 2`.
    pub fn free_dimension(&self) -> u32 {
        self.sets[1..].iter().filter(|s| !s.is_empty()).map(|s| s.len() as u32 - 1).sum()
    }
}

#[derive(Clone, Debug)]
pub struct Campaign {
    pub id: CampaignId,
    pub basis: BasisFamily,
    pub reject_degrees: Vec<u32>,
    /// `(r, point)` with the point's coordinates in `F_{2^r}`.
    pub require_points: Vec<(u32, String)>,
}

impl Campaign {
    pub fn free_dimension(&self) -> u32 {
        self.basis.free_dimension()
    }

    /// Applies a text override of the reject/require rules, one directive per line:
    /// `reject 2 4 5` replaces the reject degrees, `require 3 (0:1:t)` adds a
    /// required point over `F_{2^3}`, `require none` clears them. `#` starts a comment.
    pub fn with_overrides(mut self, text: &str) -> Result<Campaign> {
        let mut cleared = false;
        for line in text.lines() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match key {
                "reject" => {
                    self.reject_degrees = rest
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad degree `{s}`"))))
                        .collect::<Result<_>>()?;
                }
                "require" if rest == "none" => self.require_points.clear(),
                "require" => {
                    if !cleared {
                        self.require_points.clear();
                        cleared = true;
                    }
                    let (r, pt) = rest
                        .split_once(char::is_whitespace)
                        .ok_or_else(|| Error::Parse(format!("require needs a degree and a point: `{line}`")))?;
                    let r: u32 = r.parse().map_err(|_| Error::Parse(format!("bad degree `{r}`")))?;
                    let k = FieldCtx::of_order(2)?.extension(r)?;
                    ProjPoint::parse(&k, pt.trim())?;
                    self.require_points.push((r, pt.trim().to_string()));
                }
                _ => return Err(Error::Parse(format!("unknown directive `{key}`"))),
            }
        }
        Ok(self)
    }
}

fn f2() -> Field {
    FieldCtx::of_order(2).expect("F_2")
}

fn forms(k: &FieldCtx, exprs: &[String]) -> Vec<TernaryForm> {
    exprs.iter().map(|s| TernaryForm::parse(k, s).unwrap_or_else(|e| panic!("basis form `{s}`: {e}"))).collect()
}

fn mono(i: u32, j: u32, l: u32) -> String {
    format!("x^{i}*y^{j}*z^{l}")
}

/// The monomial basis used for plane models of degree `g + 1`.
fn monomial_family(k: &FieldCtx, g: u32) -> BasisFamily {
    let d = g + 1;
    let s1 = vec![mono(d, 0, 0), mono(0, d, 0), mono(0, 0, d)];
    let s2 = (1..=g).map(|i| mono(i, d - i, 0)).collect::<Vec<_>>();
    let s3 = (1..=g).map(|i| mono(i, 0, d - i)).collect::<Vec<_>>();
    let s4 = (1..=g).map(|i| mono(0, i, d - i)).collect::<Vec<_>>();
    let s5 = (1..g).flat_map(|i| (1..=g - i).map(move |j| mono(i, j, d - i - j))).collect::<Vec<_>>();
    BasisFamily {
        degree: d,
        sets: [forms(k, &s1), forms(k, &s2), forms(k, &s3), forms(k, &s4), forms(k, &s5)],
        vanishing: Vec::new(),
    }
}

const C: &str = "(y^3 + y^2*z + z^3)";
const Q: &str = "(y^5 + y*z^4 + z^5)";
const CX: &str = "(x^3 + x^2*z + z^3)";
const QX: &str = "(x^5 + x*z^4 + z^5)";

fn triple_point_family(k: &FieldCtx) -> BasisFamily {
    let s1 = vec!["x^9".to_string(), format!("{C}^3")];
    let mut s2: Vec<String> = (3..=8).map(|i| mono(i, 9 - i, 0)).collect();
    s2.push(format!("x^2*y^4*{C}"));
    s2.push(format!("x*y^2*{C}^2"));
    let mut s3: Vec<String> = (3..=8).map(|i| mono(i, 0, 9 - i)).collect();
    s3.push(format!("x^2*z*{C}^2"));
    s3.push(format!("x*z^2*{C}^2"));
    let mut s5: Vec<String> =
        (3..=7).flat_map(|i| (1..=5).filter(move |&j| i + j < 9).map(move |j| mono(i, j, 9 - i - j))).collect();
    s5.push(format!("x*y*z*{C}^2"));
    s5.push(format!("x^2*y*z*{Q}"));
    s5.push(format!("x^2*y^2*z^2*{C}"));
    s5.push(format!("x^2*y^3*z*{C}"));
    BasisFamily {
        degree: 9,
        sets: [forms(k, &s1), forms(k, &s2), forms(k, &s3), Vec::new(), forms(k, &s5)],
        vanishing: vec![VanishingCondition { ext_degree: 3, point: "(0:1:t)".into(), order: 3 }],
    }
}

fn double_single_family(k: &FieldCtx) -> BasisFamily {
    let s1 = vec!["x^9".to_string(), format!("(y^3 + y*z^2 + z^3)*{C}^2")];
    let mut s2: Vec<String> = (2..=8).map(|i| mono(i, 9 - i, 0)).collect();
    s2.push(format!("x*y^5*{C}"));
    let mut s3: Vec<String> = (2..=8).map(|i| mono(i, 0, 9 - i)).collect();
    s3.push(format!("x*z^2*{C}^2"));
    let mut s5: Vec<String> =
        (2..=7).flat_map(|i| (1..=6).filter(move |&j| i + j < 9).map(move |j| mono(i, j, 9 - i - j))).collect();
    s5.push(format!("x*y*z*{C}^2"));
    s5.push(format!("x*y^2*z*{Q}"));
    s5.push(format!("x*y^3*z^2*{C}"));
    s5.push(format!("x*y^4*z*{C}"));
    BasisFamily {
        degree: 9,
        sets: [forms(k, &s1), forms(k, &s2), forms(k, &s3), Vec::new(), forms(k, &s5)],
        vanishing: vec![
            VanishingCondition { ext_degree: 3, point: "(0:1:t)".into(), order: 2 },
            VanishingCondition { ext_degree: 3, point: "(0:1:t+1)".into(), order: 1 },
        ],
    }
}

fn two_lines_family(k: &FieldCtx) -> BasisFamily {
    let s1 = vec!["x^2*(x^7 + z^7)".to_string(), "y^2*(y^7 + z^7)".into(), "z^2*(x^7 + y^7 + z^7)".into()];
    let s2: Vec<String> = (1..=8).map(|i| mono(i, 9 - i, 0)).collect();
    let s3 = vec![
        format!("x^2*z*{CX}^2"),
        format!("x^2*z^2*{QX}"),
        format!("x*z^3*{QX}"),
        format!("x^3*z^3*{CX}"),
        format!("x*z^5*{CX}"),
    ];
    let s4 = vec![
        format!("y^2*z*{C}^2"),
        format!("y^2*z^2*{Q}"),
        format!("y*z^3*{Q}"),
        format!("y^3*z^3*{C}"),
        format!("y*z^5*{C}"),
    ];
    let s5: Vec<String> =
        (1..=7).flat_map(|i| (1..=7).filter(move |&j| i + j < 9).map(move |j| mono(i, j, 9 - i - j))).collect();
    BasisFamily {
        degree: 9,
        sets: [forms(k, &s1), forms(k, &s2), forms(k, &s3), forms(k, &s4), forms(k, &s5)],
        vanishing: vec![
            VanishingCondition { ext_degree: 3, point: "(0:1:t)".into(), order: 1 },
            VanishingCondition { ext_degree: 3, point: "(1:0:t)".into(), order: 1 },
        ],
    }
}

pub fn build_campaign(id: CampaignId) -> Campaign {
    let k = f2();
    let (basis, reject_degrees, require_points) = match id {
        CampaignId::G6D7 => (
            monomial_family(&k, 6),
            vec![2, 4],
            vec![(3, "(0:1:t)".to_string()), (3, "(1:t:t^2)".to_string())],
        ),
        CampaignId::G7D8 => (
            monomial_family(&k, 7),
            vec![5],
            vec![(4, "(0:1:s)".to_string()), (4, "(1:s:s^2)".to_string()), (4, "(0:1:s^2+s)".to_string())],
        ),
        CampaignId::G7D9C1 => (triple_point_family(&k), vec![2, 4, 5], Vec::new()),
        CampaignId::G7D9C2 => (double_single_family(&k), vec![2, 4, 5], Vec::new()),
        CampaignId::G7D9C3 => (two_lines_family(&k), vec![2, 4, 5], Vec::new()),
    };
    Campaign { id, basis, reject_degrees, require_points }
}

#[derive(Clone, Debug, Default)]
pub struct BasisReport {
    pub elements: usize,
    pub rank: usize,
    pub violations: Vec<String>,
}

impl BasisReport {
    pub fn ok(&self) -> bool {
        self.rank == self.elements && self.violations.is_empty()
    }
}

/// Coefficient vector of an `F_2` form as a bitset (monomial `i` is bit `i`).
pub fn form_bits(f: &TernaryForm) -> u64 {
    assert!(f.coeffs.len() <= 64, "forms of degree above 9 do not fit a word");
    f.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).fold(0, |acc, (i, _)| acc | 1 << i)
}

pub fn form_from_bits(k: &FieldCtx, degree: u32, bits: u64) -> TernaryForm {
    let coeffs = (0..num_monomials(degree)).map(|i| if bits >> i & 1 == 1 { Fe::ONE } else { Fe::ZERO }).collect();
    TernaryForm::from_coeffs(k, degree, coeffs).unwrap()
}

pub fn f2_rank(rows: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

const RATIONAL_CLASSES: [[u32; 3]; 7] = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]];

fn eval_f2(k: &FieldCtx, f: &TernaryForm, p: [u32; 3]) -> bool {
    !f.eval_raw(k, p.map(Fe)).is_zero()
}

/// Whether every Hasse derivative of total order `< order` vanishes at `pt`.
pub fn vanishes_to_order(base: &FieldCtx, ext: &FieldCtx, f: &TernaryForm, pt: &ProjPoint, order: u32) -> Result<bool> {
    let lifted = f.lift(base, ext)?;
    for s in 0..order {
        for a in 0..=s {
            for b in 0..=s - a {
                let d = lifted.hasse(ext, [a, b, s - a - b]);
                if !d.eval_raw(ext, pt.c).is_zero() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Checks linear independence, the five parity conditions at the rational points,
/// and the family's vanishing conditions.
pub fn verify_basis(b: &BasisFamily) -> BasisReport {
    let k = f2();
    let rows: Vec<u64> = b.elements().map(form_bits).collect();
    let mut rep = BasisReport { elements: rows.len(), rank: f2_rank(&rows), violations: Vec::new() };
    if rep.rank != rep.elements {
        rep.violations.push(format!("rank {} but {} elements", rep.rank, rep.elements));
    }
    let s4_empty = b.sets[3].is_empty();
    let nonzero_s1 = |p: [u32; 3]| b.sets[0].iter().filter(|f| eval_f2(&k, f, p)).count();
    let name = |p: [u32; 3]| format!("({}:{}:{})", p[0], p[1], p[2]);
    for (ci, &p) in RATIONAL_CLASSES.iter().enumerate() {
        let n1 = nonzero_s1(p);
        // which S_i (i ≥ 2) must be nonzero at p; the rest must vanish
        let nonzero_sets: &[usize] = match ci {
            0..=2 => &[],
            3 => &[1],
            4 => &[2],
            5 => &[3],
            _ => &[1, 2, 3, 4],
        };
        let s1_ok = match ci {
            0..=2 => n1 == 1,
            3 | 4 => n1 % 2 == 0,
            5 => (n1 % 2 == 0) != s4_empty,
            _ => (n1 % 2 == 1) != s4_empty,
        };
        if !s1_ok {
            rep.violations.push(format!("S1 has {n1} elements nonzero at {}", name(p)));
        }
        for (si, set) in b.sets.iter().enumerate().skip(1) {
            let want_nonzero = nonzero_sets.contains(&si);
            for (ei, f) in set.iter().enumerate() {
                if eval_f2(&k, f, p) != want_nonzero {
                    rep.violations.push(format!(
                        "S{} element {} should {} at {}",
                        si + 1,
                        ei + 1,
                        if want_nonzero { "be nonzero" } else { "vanish" },
                        name(p)
                    ));
                }
            }
        }
    }
    for cond in &b.vanishing {
        let ext = match k.extension(cond.ext_degree) {
            Ok(e) => e,
            Err(e) => {
                rep.violations.push(e.to_string());
                continue;
            }
        };
        let pt = match ProjPoint::parse(&ext, &cond.point) {
            Ok(p) => p,
            Err(e) => {
                rep.violations.push(e.to_string());
                continue;
            }
        };
        for (i, f) in b.elements().enumerate() {
            if !vanishes_to_order(&k, &ext, f, &pt, cond.order).unwrap_or(false) {
                rep.violations.push(format!("element {} does not vanish to order {} at {}", i + 1, cond.order, cond.point));
            }
        }
    }
    rep
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GroupKind {
    Require,
    Reject,
}

/// Up to 64 sites sharing an extension degree `r`, stored as `r` words of value
/// bit-planes followed (for reject groups) by `3r` words for the partials.
#[derive(Clone, Debug)]
struct SiteGroup {
    kind: GroupKind,
    offset: usize,
    r: usize,
    lane: u64,
}

impl SiteGroup {
    fn width(&self) -> usize {
        match self.kind {
            GroupKind::Require => self.r,
            GroupKind::Reject => 4 * self.r,
        }
    }
}

/// A site: a point over `F_{2^r}` whose values land in bit `slot` of its group.
#[derive(Clone, Debug)]
pub struct Site {
    pub r: u32,
    pub point: ProjPoint,
    group: usize,
    slot: u32,
}

/// Bit-plane values of every basis form (and its partials) at every site.
#[derive(Clone, Debug)]
pub struct EvalTables {
    pub degree: u32,
    pub width: usize,
    groups: Vec<SiteGroup>,
    pub sites: Vec<Site>,
    /// One row per basis element, canonical order.
    pub rows: Vec<Vec<u64>>,
    pub basis_bits: Vec<u64>,
    /// Index of the first element of each `S_i`.
    set_starts: [usize; 5],
    set_lens: [usize; 5],
}

impl EvalTables {
    /// Value planes of a form computed directly from its coefficients.
    pub fn direct_row(&self, f: &TernaryForm) -> Vec<u64> {
        let k = f2();
        let mut row = vec![0u64; self.width];
        let partials = f.partials(&k);
        let mut lifted_cache: Vec<(u32, Field, [TernaryForm; 4])> = Vec::new();
        for site in &self.sites {
            if !lifted_cache.iter().any(|(r, _, _)| *r == site.r) {
                let ext = k.extension(site.r).unwrap();
                let lf = [
                    f.lift(&k, &ext).unwrap(),
                    partials[0].lift(&k, &ext).unwrap(),
                    partials[1].lift(&k, &ext).unwrap(),
                    partials[2].lift(&k, &ext).unwrap(),
                ];
                lifted_cache.push((site.r, ext, lf));
            }
            let (_, ext, lf) = lifted_cache.iter().find(|(r, _, _)| *r == site.r).unwrap();
            let g = &self.groups[site.group];
            let nfun = if g.kind == GroupKind::Reject { 4 } else { 1 };
            for (fi, form) in lf.iter().take(nfun).enumerate() {
                let v = form.eval_raw(ext, site.point.c).0;
                for b in 0..g.r {
                    if v >> b & 1 == 1 {
                        row[g.offset + fi * g.r + b] |= 1 << site.slot;
                    }
                }
            }
        }
        row
    }

    /// XOR of the rows selected by `mask`.
    pub fn compose(&self, mask: u64) -> Vec<u64> {
        let mut out = vec![0u64; self.width];
        for (i, row) in self.rows.iter().enumerate() {
            if mask >> i & 1 == 1 {
                for (o, r) in out.iter_mut().zip(row) {
                    *o ^= r;
                }
            }
        }
        out
    }

    /// Coefficient bits of the form selected by `mask`.
    pub fn form_bits_of(&self, mask: u64) -> u64 {
        self.basis_bits.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).fold(0, |acc, (_, b)| acc ^ b)
    }

    /// Whether a state (given as `a ^ b`, word by word) passes all filters.
    /// Require groups go first, then reject groups in increasing cost.
    #[inline]
    fn passes(&self, a: &[u64], b: &[u64]) -> bool {
        let mut need_require = false;
        let mut hit = false;
        for g in &self.groups {
            let o = g.offset;
            match g.kind {
                GroupKind::Require => {
                    need_require = true;
                    if hit {
                        continue;
                    }
                    let mut nz = 0;
                    for w in o..o + g.r {
                        nz |= a[w] ^ b[w];
                    }
                    if !nz & g.lane != 0 {
                        hit = true;
                    }
                }
                GroupKind::Reject => {
                    if need_require && !hit {
                        return false;
                    }
                    let mut nz = 0;
                    for w in o..o + g.r {
                        nz |= a[w] ^ b[w];
                    }
                    let zero = !nz & g.lane;
                    if zero == 0 {
                        continue;
                    }
                    let mut grad = 0;
                    for w in o + g.r..o + 4 * g.r {
                        grad |= a[w] ^ b[w];
                    }
                    if zero & grad != 0 {
                        return false;
                    }
                }
            }
        }
        !need_require || hit
    }

    /// Filter decision for a full state vector.
    pub fn state_passes(&self, state: &[u64]) -> bool {
        let zeros = vec![0u64; self.width];
        self.passes(state, &zeros)
    }

    /// The mask with all of `S_1` and the parity corrector (last element) of each
    /// nonempty `S_i`, `i ≥ 2`.
    fn base_mask(&self) -> u64 {
        let mut m = (1u64 << self.set_lens[0]) - 1;
        for i in 1..5 {
            if self.set_lens[i] > 0 {
                m |= 1 << (self.set_starts[i] + self.set_lens[i] - 1);
            }
        }
        m
    }

    /// For each free bit, the basis elements it toggles (the element and its corrector).
    fn free_masks(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for i in 1..5 {
            let n = self.set_lens[i];
            if n == 0 {
                continue;
            }
            let corrector = self.set_starts[i] + n - 1;
            for e in 0..n - 1 {
                out.push(1 << (self.set_starts[i] + e) | 1 << corrector);
            }
        }
        out
    }
}

fn push_group(groups: &mut Vec<SiteGroup>, width: &mut usize, kind: GroupKind, r: usize, n: usize) -> usize {
    let g = SiteGroup { kind, offset: *width, r, lane: if n == 64 { u64::MAX } else { (1u64 << n) - 1 } };
    *width += g.width();
    groups.push(g);
    groups.len() - 1
}

/// Builds the tables: one representative per closed point of each reject degree
/// (Frobenius equivariance makes one per orbit enough), plus each required point.
pub fn precompute_tables(c: &Campaign) -> Result<EvalTables> {
    let k = f2();
    let mut groups = Vec::new();
    let mut sites = Vec::new();
    let mut width = 0;
    // require sites grouped by extension degree
    let mut req_degrees: Vec<u32> = c.require_points.iter().map(|(r, _)| *r).collect();
    req_degrees.sort_unstable();
    req_degrees.dedup();
    for r in req_degrees {
        let ext = k.extension(r)?;
        let pts: Vec<ProjPoint> = c
            .require_points
            .iter()
            .filter(|(rr, _)| *rr == r)
            .map(|(_, s)| ProjPoint::parse(&ext, s))
            .collect::<Result<_>>()?;
        for chunk in pts.chunks(64) {
            let gi = push_group(&mut groups, &mut width, GroupKind::Require, r as usize, chunk.len());
            for (slot, p) in chunk.iter().enumerate() {
                sites.push(Site { r, point: *p, group: gi, slot: slot as u32 });
            }
        }
    }
    let mut rej = c.reject_degrees.clone();
    rej.sort_unstable();
    rej.dedup();
    for d in rej {
        let pts: Vec<ProjPoint> = closed_points(&k, d)?.into_iter().map(|cp| cp.rep).collect();
        for chunk in pts.chunks(64) {
            let gi = push_group(&mut groups, &mut width, GroupKind::Reject, d as usize, chunk.len());
            for (slot, p) in chunk.iter().enumerate() {
                sites.push(Site { r: d, point: *p, group: gi, slot: slot as u32 });
            }
        }
    }
    let mut set_starts = [0usize; 5];
    let mut set_lens = [0usize; 5];
    let mut acc = 0;
    for i in 0..5 {
        set_starts[i] = acc;
        set_lens[i] = c.basis.sets[i].len();
        acc += set_lens[i];
    }
    if acc > 64 {
        return Err(Error::InternalInconsistency("basis larger than 64 elements".into()));
    }
    let mut t = EvalTables {
        degree: c.basis.degree,
        width,
        groups,
        sites,
        rows: Vec::new(),
        basis_bits: c.basis.elements().map(form_bits).collect(),
        set_starts,
        set_lens,
    };
    t.rows = c.basis.elements().map(|f| t.direct_row(f)).collect();
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileSpec {
    pub campaign: CampaignId,
    pub bits: u32,
    pub index: u64,
}

impl TileSpec {
    pub fn whole(campaign: CampaignId) -> TileSpec {
        TileSpec { campaign, bits: 0, index: 0 }
    }

    pub fn validate(&self, c: &Campaign) -> Result<()> {
        let free = c.free_dimension();
        if self.campaign != c.id || self.bits > free || self.bits >= 64 || self.index >= 1u64 << self.bits {
            return Err(Error::InvalidTile { bits: self.bits, index: self.index, free });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurvivorRecord {
    pub campaign: CampaignId,
    pub tile: u64,
    pub mask: u64,
    pub form: TernaryForm,
}

impl SurvivorRecord {
    /// `campaign<TAB>tile<TAB>hex mask<TAB>form`.
    pub fn to_line(&self) -> String {
        format!("{}\t{}\t{:x}\t{}", self.campaign, self.tile, self.mask, self.form.format(&f2()))
    }

    pub fn parse_line(line: &str) -> Result<SurvivorRecord> {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::Parse(format!("survivor line needs 4 columns: `{line}`")));
        }
        let campaign: CampaignId = cols[0].parse()?;
        let tile = cols[1].parse().map_err(|_| Error::Parse(format!("bad tile `{}`", cols[1])))?;
        let mask = u64::from_str_radix(cols[2], 16).map_err(|_| Error::Parse(format!("bad mask `{}`", cols[2])))?;
        let degree = build_campaign(campaign).basis.degree;
        let form = TernaryForm::parse_with_degree(&f2(), cols[3], degree)?;
        Ok(SurvivorRecord { campaign, tile, mask, form })
    }
}

/// Walks one tile in reflected Gray-code order over its free bits, calling
/// `visit(mask, state_a, state_b)` where the state is `state_a ^ state_b`.
///
/// The low `L` free bits come from a precomputed table of all `2^L` combinations,
/// the remaining bits are updated incrementally with one combined row per step.
fn walk_tile<F: FnMut(u64, &[u64], &[u64])>(t: &EvalTables, free: u32, tile: &TileSpec, mut visit: F) {
    let free_masks = t.free_masks();
    debug_assert_eq!(free_masks.len() as u32, free);
    let crow: Vec<Vec<u64>> = free_masks.iter().map(|&m| t.compose(m)).collect();
    let inner = free - tile.bits;
    let low = inner.min(8);
    let high = inner - low;

    let mut hmask = t.base_mask();
    for j in 0..tile.bits {
        if tile.index >> j & 1 == 1 {
            hmask ^= free_masks[(inner + j) as usize];
        }
    }
    let mut hstate = t.compose(hmask);

    let n_low = 1usize << low;
    let mut table = vec![0u64; n_low * t.width];
    let mut tmask = vec![0u64; n_low];
    for v in 1..n_low {
        let j = v.trailing_zeros() as usize;
        let prev = v & (v - 1);
        tmask[v] = tmask[prev] ^ free_masks[j];
        for w in 0..t.width {
            table[v * t.width + w] = table[prev * t.width + w] ^ crow[j][w];
        }
    }

    for h in 0..1u64 << high {
        if h > 0 {
            let j = (low + h.trailing_zeros()) as usize;
            hmask ^= free_masks[j];
            for (s, r) in hstate.iter_mut().zip(&crow[j]) {
                *s ^= r;
            }
        }
        for i in 0..n_low {
            let i = if h & 1 == 0 { i } else { n_low - 1 - i };
            let g = i ^ (i >> 1);
            visit(hmask ^ tmask[g], &hstate, &table[g * t.width..(g + 1) * t.width]);
        }
    }
}

/// Every admissible mask of a tile, in traversal order.
pub fn enumerate_space(c: &Campaign, t: &EvalTables, tile: &TileSpec) -> Result<Vec<u64>> {
    tile.validate(c)?;
    let mut out = Vec::new();
    walk_tile(t, c.free_dimension(), tile, |m, _, _| out.push(m));
    Ok(out)
}

/// Calls `visit(mask, state)` for each mask of a tile in traversal order, with the
/// state maintained by the search engine.
pub fn walk_states<F: FnMut(u64, Vec<u64>)>(c: &Campaign, t: &EvalTables, tile: &TileSpec, mut visit: F) -> Result<()> {
    tile.validate(c)?;
    walk_tile(t, c.free_dimension(), tile, |m, a, b| visit(m, a.iter().zip(b).map(|(x, y)| x ^ y).collect()));
    Ok(())
}

/// Survivors of one tile, sorted by mask.
pub fn run_search(c: &Campaign, t: &EvalTables, tile: &TileSpec) -> Result<Vec<SurvivorRecord>> {
    tile.validate(c)?;
    let mut masks = Vec::new();
    walk_tile(t, c.free_dimension(), tile, |m, a, b| {
        if t.passes(a, b) {
            masks.push(m);
        }
    });
    masks.sort_unstable();
    let k = f2();
    Ok(masks
        .into_iter()
        .map(|mask| SurvivorRecord {
            campaign: c.id,
            tile: tile.index,
            mask,
            form: form_from_bits(&k, t.degree, t.form_bits_of(mask)),
        })
        .collect())
}

/// Runs the given tiles of a `2^bits` split in parallel and merges the survivors by mask.
pub fn run_tiles(c: &Campaign, t: &EvalTables, bits: u32, tiles: &[u64]) -> Result<Vec<SurvivorRecord>> {
    let parts: Vec<Vec<SurvivorRecord>> = tiles
        .par_iter()
        .map(|&index| run_search(c, t, &TileSpec { campaign: c.id, bits, index }))
        .collect::<Result<_>>()?;
    let mut out: Vec<SurvivorRecord> = parts.into_iter().flatten().collect();
    out.sort_by_key(|r| r.mask);
    Ok(out)
}

/// Re-applies the filters by direct evaluation at every point of every orbit.
pub fn naive_passes(c: &Campaign, f: &TernaryForm) -> Result<bool> {
    let k = f2();
    let partials = f.partials(&k);
    if !c.require_points.is_empty() {
        let mut hit = false;
        for (r, s) in &c.require_points {
            let ext = k.extension(*r)?;
            let p = ProjPoint::parse(&ext, s)?;
            if f.evaluate(&k, &ext, &p)?.is_zero() {
                hit = true;
            }
        }
        if !hit {
            return Ok(false);
        }
    }
    for &d in &c.reject_degrees {
        let ext = k.extension(d)?;
        for cp in closed_points(&k, d)? {
            for p in &cp.orbit {
                if f.evaluate(&k, &ext, p)?.is_zero() {
                    for g in &partials {
                        if !g.evaluate(&k, &ext, p)?.is_zero() {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Whether `mask` is admissible: all of `S_1`, odd weight in each nonempty `S_i`.
pub fn mask_is_admissible(c: &Campaign, mask: u64) -> bool {
    let mut start = 0;
    for (i, set) in c.basis.sets.iter().enumerate() {
        let n = set.len();
        let part = if n == 0 { 0 } else { (mask >> start) & ((1u64 << n) - 1) };
        let ok = match i {
            0 => part.count_ones() as usize == n,
            _ => n == 0 || part.count_ones() % 2 == 1,
        };
        if !ok {
            return false;
        }
        start += n;
    }
    mask >> start == 0
}

/// An admissible mask built from random words: all of `S_1`, and for each other
/// nonempty set the drawn bits with the corrector flipped to make the weight odd.
pub fn admissible_mask(c: &Campaign, mut next: impl FnMut() -> u64) -> u64 {
    let mut mask = 0u64;
    let mut start = 0;
    for (i, set) in c.basis.sets.iter().enumerate() {
        let n = set.len();
        if n > 0 {
            let mut part: u64 = if i == 0 { (1 << n) - 1 } else { next() & ((1 << n) - 1) };
            if i > 0 && part.count_ones() % 2 == 0 {
                part ^= 1 << (n - 1);
            }
            mask |= part << start;
        }
        start += n;
    }
    mask
}

/// Whether an `F_2` form is nonzero at all seven points of `P²(F_2)`.
pub fn nonzero_at_rational_points(f: &TernaryForm) -> bool {
    let k = f2();
    RATIONAL_CLASSES.iter().all(|&p| eval_f2(&k, f, p))
}

/// Exponents of the monomial with bit index `i` in a degree-`d` form.
pub fn monomial_of_bit(d: u32, i: usize) -> [u32; 3] {
    monomials(d)[i]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mask(c: &Campaign, rng: &mut ChaCha8Rng) -> u64 {
        admissible_mask(c, || rng.gen())
    }

    #[test]
    fn free_dimensions() {
        let dims: Vec<u32> = CampaignId::ALL.iter().map(|&id| build_campaign(id).free_dimension()).collect();
        assert_eq!(dims, vec![29, 38, 32, 38, 42]);
        let sizes: Vec<usize> = CampaignId::ALL.iter().map(|&id| build_campaign(id).basis.len()).collect();
        assert_eq!(sizes, vec![36, 45, 37, 43, 49]);
    }

    #[test]
    fn unknown_campaign() {
        assert_eq!("G9D10".parse::<CampaignId>(), Err(Error::UnknownCampaign("G9D10".into())));
        assert_eq!("g7d9c2".parse::<CampaignId>(), Ok(CampaignId::G7D9C2));
    }

    #[test]
    fn bases_pass_verification() {
        for id in CampaignId::ALL {
            let rep = verify_basis(&build_campaign(id).basis);
            assert!(rep.ok(), "{id}: {:?}", rep.violations);
        }
        let ranks: Vec<usize> = [CampaignId::G7D9C1, CampaignId::G7D9C2, CampaignId::G7D9C3]
            .iter()
            .map(|&id| verify_basis(&build_campaign(id).basis).rank)
            .collect();
        assert_eq!(ranks, vec![37, 43, 49]);
    }

    #[test]
    fn broken_basis_is_reported() {
        let mut b = build_campaign(CampaignId::G7D9C1).basis;
        let dup = b.sets[4][0].clone();
        b.sets[4].push(dup);
        let rep = verify_basis(&b);
        assert!(!rep.ok());
        assert_eq!(rep.rank, 37);
        let mut b = build_campaign(CampaignId::G6D7).basis;
        b.sets[1][0] = TernaryForm::parse(&f2(), "x^7").unwrap();
        assert!(verify_basis(&b).violations.iter().any(|v| v.contains("(1:0:0)")));
    }

    #[test]
    fn xor_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = build_campaign(CampaignId::G6D7);
        let t = precompute_tables(&c).unwrap();
        let k = f2();
        for _ in 0..1000 {
            let m = random_mask(&c, &mut rng);
            let f = form_from_bits(&k, t.degree, t.form_bits_of(m));
            assert_eq!(t.compose(m), t.direct_row(&f));
        }
    }

    #[test]
    fn all_s1_value_at_cubic_point() {
        let k = f2();
        let f8 = k.extension(3).unwrap();
        let f = TernaryForm::parse(&k, "x^7 + y^7 + z^7").unwrap();
        let p = ProjPoint::parse(&f8, "(0:1:t)").unwrap();
        let v = f.evaluate(&k, &f8, &p).unwrap();
        // 1 + t^7 with t^7 = 1
        assert_eq!(f8.pow(f8.t(), 7), Fe::ONE);
        assert_eq!(v, Fe::ZERO);
    }

    #[test]
    fn generated_forms_avoid_rational_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = f2();
        for id in CampaignId::ALL {
            let c = build_campaign(id);
            let t = precompute_tables(&c).unwrap();
            // the base mask value at (1:1:1) is 1
            let f = form_from_bits(&k, t.degree, t.form_bits_of(t.base_mask()));
            assert!(eval_f2(&k, &f, [1, 1, 1]));
            for _ in 0..2000 {
                let m = random_mask(&c, &mut rng);
                assert!(mask_is_admissible(&c, m));
                let f = form_from_bits(&k, t.degree, t.form_bits_of(m));
                for p in RATIONAL_CLASSES {
                    assert!(eval_f2(&k, &f, p), "{id} mask {m:x}");
                }
            }
        }
    }

    #[test]
    fn gray_walk_properties() {
        let c = build_campaign(CampaignId::G6D7);
        let t = precompute_tables(&c).unwrap();
        let tile = TileSpec { campaign: c.id, bits: 12, index: 1234 };
        let masks = enumerate_space(&c, &t, &tile).unwrap();
        assert_eq!(masks.len(), 1 << 17);
        for w in masks.windows(2) {
            assert!((w[0] ^ w[1]).count_ones() <= 2);
        }
        let mut sorted = masks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), masks.len());
        assert!(masks.iter().all(|&m| mask_is_admissible(&c, m)));
        let mut n = 0;
        walk_states(&c, &t, &tile, |m, st| {
            if n % 97 == 0 {
                assert_eq!(st, t.compose(m));
            }
            n += 1;
        })
        .unwrap();
    }

    #[test]
    fn tiles_partition_the_space() {
        let c = build_campaign(CampaignId::G6D7);
        let t = precompute_tables(&c).unwrap();
        // splitting a tile into 8 finer tiles (three more fixed bits) covers the same masks
        let outer = TileSpec { campaign: c.id, bits: 17, index: 77 };
        let mut whole = enumerate_space(&c, &t, &outer).unwrap();
        whole.sort_unstable();
        let mut parts = Vec::new();
        for i in 0..8u64 {
            let tile = TileSpec { campaign: c.id, bits: 20, index: 77 << 3 | i };
            parts.extend(enumerate_space(&c, &t, &tile).unwrap());
        }
        parts.sort_unstable();
        assert_eq!(whole, parts);
    }

    #[test]
    fn invalid_tiles() {
        let c = build_campaign(CampaignId::G6D7);
        let bad = TileSpec { campaign: c.id, bits: 3, index: 8 };
        assert!(matches!(bad.validate(&c), Err(Error::InvalidTile { bits: 3, index: 8, free: 29 })));
        assert!(TileSpec { campaign: c.id, bits: 30, index: 0 }.validate(&c).is_err());
    }

    #[test]
    fn survivors_recheck_naively() {
        for id in [CampaignId::G6D7, CampaignId::G7D9C1, CampaignId::G7D8] {
            let c = build_campaign(id);
            let t = precompute_tables(&c).unwrap();
            let tile = TileSpec { campaign: id, bits: c.free_dimension() - 12, index: 5 };
            let surv = run_search(&c, &t, &tile).unwrap();
            for s in surv.iter().take(40) {
                assert!(naive_passes(&c, &s.form).unwrap());
                assert_eq!(SurvivorRecord::parse_line(&s.to_line()).unwrap(), *s);
            }
            // rejected masks are rejected naively as well
            let all = enumerate_space(&c, &t, &tile).unwrap();
            let k = f2();
            for &m in all.iter().step_by(101) {
                let f = form_from_bits(&k, t.degree, t.form_bits_of(m));
                let kept = surv.binary_search_by_key(&m, |s| s.mask).is_ok();
                assert_eq!(naive_passes(&c, &f).unwrap(), kept, "{id} {m:x}");
            }
        }
    }

    #[test]
    fn overrides() {
        let c = build_campaign(CampaignId::G6D7)
            .with_overrides("# custom\nreject 2\nrequire 3 (0:1:t)\n")
            .unwrap();
        assert_eq!(c.reject_degrees, vec![2]);
        assert_eq!(c.require_points, vec![(3, "(0:1:t)".to_string())]);
        assert!(build_campaign(CampaignId::G6D7).with_overrides("frobnicate").is_err());
    }
}
