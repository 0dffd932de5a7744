//! Isomorphism classes of smooth plane quartics over `F_q` with no rational point.
//!
//! For `q ≥ 7` classes are found through pinned quartics: forms vanishing at the two
//! fixed quadratic points `P1 = (s:0:1)` and `P2 = (0:s:1)`, where `s` generates
//! `F_{q²}`. Each class gets a normal form, its first pinned quartic. For `q ≤ 5`
//! every pointless quartic is enumerated and split into `PGL_3` orbits directly.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::gfield::{Fe, Field, FieldCtx};
use crate::homforms::{closed_point_counts, count_points_in, is_smooth, monomial_index, monomials, TernaryForm};
use crate::projplane::{closed_point_of, cross, enumerate_points, mat_inv, mat_mul, normalize, ClosedPoint, Mat3};
use crate::weilkit::{real_weil_from_counts, RealWeilPoly};

/// Quartic coefficients in monomial order, as field element encodings.
pub type Coeffs = [u8; 15];

const MAX_Q: u32 = 32;

/// Table arithmetic for a small field plus monomial index tables.
pub struct Kit {
    pub field: Field,
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    /// `int[e]` is the integer `e` as a field element, `e ≤ 4`.
    int: [u8; 5],
    primitive: u8,
    // idx[a][b]: position of monomial a (degree da) times monomial b (degree db) in degree 8
    mac_f: Vec<[usize; 15]>,
    mac_d: Vec<[usize; 10]>,
    // partial derivative tables: (source monomial, exponent) per variable
    part: [[(usize, u32); 10]; 3],
}

impl Kit {
    pub fn new(k: &Field) -> Result<Kit> {
        let q = k.order();
        if q > MAX_Q {
            return Err(Error::UnsupportedField(q));
        }
        let qs = q as usize;
        let mut add = vec![0u8; qs * qs];
        let mut mul = vec![0u8; qs * qs];
        for a in 0..q {
            for b in 0..q {
                add[a as usize * qs + b as usize] = k.add(Fe(a), Fe(b)).0 as u8;
                mul[a as usize * qs + b as usize] = k.mul(Fe(a), Fe(b)).0 as u8;
            }
        }
        let neg = (0..q).map(|a| k.neg(Fe(a)).0 as u8).collect();
        let inv = (0..q).map(|a| if a == 0 { 0 } else { k.inv(Fe(a)).unwrap().0 as u8 }).collect();
        let int = [0, 1, 2, 3, 4].map(|e| k.from_int(e).0 as u8);
        let m4 = monomials(4);
        let m3 = monomials(3);
        let mac_f = monomials(4)
            .iter()
            .map(|s| {
                let mut row = [0usize; 15];
                for (n, e) in m4.iter().enumerate() {
                    row[n] = monomial_index(8, e[0] + s[0], e[1] + s[1]);
                }
                row
            })
            .collect();
        let mac_d = monomials(5)
            .iter()
            .map(|s| {
                let mut row = [0usize; 10];
                for (n, e) in m3.iter().enumerate() {
                    row[n] = monomial_index(8, e[0] + s[0], e[1] + s[1]);
                }
                row
            })
            .collect();
        let mut part = [[(0usize, 0u32); 10]; 3];
        for (v, tab) in part.iter_mut().enumerate() {
            for (n, e) in m3.iter().enumerate() {
                let mut src = *e;
                src[v] += 1;
                tab[n] = (monomial_index(4, src[0], src[1]), src[v]);
            }
        }
        Ok(Kit {
            field: k.clone(),
            q: qs,
            add,
            mul,
            neg,
            inv,
            int,
            primitive: k.generator().0 as u8,
            mac_f,
            mac_d,
            part,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    fn a(&self, x: u8, y: u8) -> u8 {
        self.add[x as usize * self.q + y as usize]
    }

    #[inline]
    fn m(&self, x: u8, y: u8) -> u8 {
        self.mul[x as usize * self.q + y as usize]
    }

    pub fn to_coeffs(&self, f: &TernaryForm) -> Result<Coeffs> {
        if f.degree != 4 || f.field != self.field.id() {
            return Err(Error::ContextMismatch);
        }
        let mut c = [0u8; 15];
        for (o, x) in c.iter_mut().zip(&f.coeffs) {
            *o = x.0 as u8;
        }
        Ok(c)
    }

    pub fn to_form(&self, c: &Coeffs) -> TernaryForm {
        TernaryForm::from_coeffs(&self.field, 4, c.iter().map(|&x| Fe(x as u32)).collect()).unwrap()
    }

    /// Scales so the first nonzero coefficient is 1.
    pub fn normalize(&self, c: &Coeffs) -> Coeffs {
        match c.iter().find(|&&x| x != 0) {
            Some(&lead) if lead != 1 => {
                let s = self.inv[lead as usize];
                c.map(|x| self.m(x, s))
            }
            _ => *c,
        }
    }

    pub fn eval(&self, c: &Coeffs, v: [u8; 3]) -> u8 {
        let mut pw = [[1u8; 5]; 3];
        for (axis, row) in pw.iter_mut().enumerate() {
            for e in 1..5 {
                row[e] = self.m(row[e - 1], v[axis]);
            }
        }
        let mut acc = 0;
        for (n, e) in MONO4.iter().enumerate() {
            if c[n] != 0 {
                let t = self.m(self.m(pw[0][e[0]], pw[1][e[1]]), pw[2][e[2]]);
                acc = self.a(acc, self.m(c[n], t));
            }
        }
        acc
    }

    /// Whether `f = 0` has a point in `P²(F_q)`.
    pub fn has_rational_point(&self, c: &Coeffs) -> bool {
        let q = self.q as u8;
        if c[0] == 0 {
            return true;
        }
        for a in 0..q {
            if self.eval(c, [a, 1, 0]) == 0 {
                return true;
            }
            for b in 0..q {
                if self.eval(c, [a, b, 1]) == 0 {
                    return true;
                }
            }
        }
        false
    }

    /// The linear map on coefficient vectors induced by `f ↦ f(M v)`.
    pub fn transform(&self, m: &[[u8; 3]; 3]) -> [[u8; 15]; 15] {
        // powers of the three linear forms, as polynomials of degree 0..=4
        let mut pw: [Vec<Vec<u8>>; 3] = Default::default();
        for (r, row) in pw.iter_mut().enumerate() {
            row.push(vec![1]);
            for e in 1..=4u32 {
                let next = self.poly_mul(&row[e as usize - 1], e - 1, &m[r], 1);
                row.push(next);
            }
        }
        let mut t = [[0u8; 15]; 15];
        for (j, e) in MONO4.iter().enumerate() {
            let d01 = (e[0] + e[1]) as u32;
            let a = self.poly_mul(&pw[0][e[0]], e[0] as u32, &pw[1][e[1]], e[1] as u32);
            let col = self.poly_mul(&a, d01, &pw[2][e[2]], e[2] as u32);
            for (i, &x) in col.iter().enumerate() {
                t[i][j] = x;
            }
        }
        t
    }

    fn poly_mul(&self, a: &[u8], da: u32, b: &[u8], db: u32) -> Vec<u8> {
        let d = da + db;
        let mut out = vec![0u8; ((d + 1) * (d + 2) / 2) as usize];
        for (ea, &ca) in monomials(da).iter().zip(a) {
            if ca == 0 {
                continue;
            }
            for (eb, &cb) in monomials(db).iter().zip(b) {
                if cb != 0 {
                    let i = monomial_index(d, ea[0] + eb[0], ea[1] + eb[1]);
                    out[i] = self.a(out[i], self.m(ca, cb));
                }
            }
        }
        out
    }

    pub fn apply(&self, t: &[[u8; 15]; 15], c: &Coeffs) -> Coeffs {
        let mut out = [0u8; 15];
        for (j, &x) in c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let y = t[i][j];
                if y != 0 {
                    *o = self.a(*o, self.m(x, y));
                }
            }
        }
        out
    }

    /// Smoothness by the same linear-algebra criterion as [`is_smooth`], on tables.
    pub fn is_smooth(&self, c: &Coeffs) -> bool {
        if c.iter().all(|&x| x == 0) {
            return false;
        }
        let mut parts = [[0u8; 10]; 3];
        for (v, p) in parts.iter_mut().enumerate() {
            for (n, &(src, e)) in self.part[v].iter().enumerate() {
                p[n] = self.m(c[src], self.int[e as usize]);
            }
        }
        let mut pivots: Vec<Option<[u8; 45]>> = vec![None; 45];
        let mut rank = 0;
        let mut insert = |row: &mut [u8; 45]| -> bool {
            for col in 0..45 {
                let x = row[col];
                if x == 0 {
                    continue;
                }
                match &pivots[col] {
                    Some(p) => {
                        let s = self.neg[x as usize];
                        for i in col..45 {
                            if p[i] != 0 {
                                row[i] = self.a(row[i], self.m(s, p[i]));
                            }
                        }
                    }
                    None => {
                        let s = self.inv[x as usize];
                        for v in row[col..].iter_mut() {
                            *v = self.m(*v, s);
                        }
                        pivots[col] = Some(*row);
                        rank += 1;
                        return rank == 45;
                    }
                }
            }
            false
        };
        for shift in &self.mac_f {
            let mut row = [0u8; 45];
            for n in 0..15 {
                row[shift[n]] = c[n];
            }
            if insert(&mut row) {
                return true;
            }
        }
        for p in &parts {
            if p.iter().all(|&x| x == 0) {
                continue;
            }
            for shift in &self.mac_d {
                let mut row = [0u8; 45];
                for n in 0..10 {
                    row[shift[n]] = p[n];
                }
                if insert(&mut row) {
                    return true;
                }
            }
        }
        false
    }

    /// Generators of `GL_3(F_q)`: two permutations, a transvection and a scaling.
    fn generators(&self) -> Vec<[[u8; 3]; 3]> {
        vec![
            [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
            [[0, 1, 0], [1, 0, 0], [0, 0, 1]],
            [[1, 1, 0], [0, 1, 0], [0, 0, 1]],
            [[self.primitive, 0, 0], [0, 1, 0], [0, 0, 1]],
        ]
    }
}

const MONO4: [[usize; 3]; 15] = [
    [4, 0, 0],
    [3, 1, 0],
    [3, 0, 1],
    [2, 2, 0],
    [2, 1, 1],
    [2, 0, 2],
    [1, 3, 0],
    [1, 2, 1],
    [1, 1, 2],
    [1, 0, 3],
    [0, 4, 0],
    [0, 3, 1],
    [0, 2, 2],
    [0, 1, 3],
    [0, 0, 4],
];

// positions in monomial order
const X4: usize = 0;
const X3Y: usize = 1;
const X3Z: usize = 2;
const X2Y2: usize = 3;
const X2YZ: usize = 4;
const X2Z2: usize = 5;
const XY3: usize = 6;
const XY2Z: usize = 7;
const XYZ2: usize = 8;
const XZ3: usize = 9;
const Y4: usize = 10;
const Y3Z: usize = 11;
const Y2Z2: usize = 12;
const YZ3: usize = 13;
const Z4: usize = 14;

pub fn key(c: &Coeffs) -> u128 {
    c.iter().fold(0u128, |acc, &x| (acc << 5) | x as u128)
}

/// Ordering used for normal forms: fewer nonzero terms first, then coefficients.
fn nf_key(c: &Coeffs) -> (usize, Coeffs) {
    (c.iter().filter(|&&x| x != 0).count(), *c)
}

/// Coefficient blocks feeding [`for_each_pointless`]. Each block is already free of
/// zeros on its own coordinate line.
struct Blocks {
    /// `(x⁴, x³z, x²z², xz³, z⁴)` with `x⁴ = 1`.
    yfree: Vec<[u8; 5]>,
    /// `(y⁴, y³z, y²z², yz³)` compatible with each `z⁴` value.
    xfree: Vec<Vec<[u8; 4]>>,
}

impl Kit {
    /// All `(x³y, x²y², xy³)` with `f(a:1:0) ≠ 0` for every `a`.
    fn zfree_interior(&self, y4: u8) -> Vec<[u8; 3]> {
        let q = self.q as u8;
        let mut out = Vec::new();
        for e1 in 0..q {
            for e2 in 0..q {
                'e3: for e3 in 0..q {
                    for a in 1..q {
                        let a2 = self.m(a, a);
                        let a3 = self.m(a2, a);
                        let v = [self.m(a2, a2), self.m(e1, a3), self.m(e2, a2), self.m(e3, a), y4]
                            .iter()
                            .fold(0, |s, &t| self.a(s, t));
                        if v == 0 {
                            continue 'e3;
                        }
                    }
                    out.push([e1, e2, e3]);
                }
            }
        }
        out
    }

    fn univariate_no_roots(&self, c: &[u8; 5], skip_zero: bool) -> bool {
        // c[0] t⁴ + … + c[4]
        let q = self.q as u8;
        (if skip_zero { 1 } else { 0 }..q).all(|t| c.iter().fold(0, |s, &x| self.a(self.m(s, t), x)) != 0)
    }
}

/// Calls `sink` on every pointless quartic assembled from `blocks` whose first
/// coefficient is 1, restricted to `yfree[range]`.
fn for_each_pointless(kit: &Kit, blocks: &Blocks, range: std::ops::Range<usize>, sink: &mut dyn FnMut(&Coeffs)) {
    let q = kit.q as u8;
    let nz: Vec<u8> = (1..q).collect();
    let pts: Vec<(u8, u8, u8)> = nz.iter().flat_map(|&a| nz.iter().map(move |&b| (a, b, 0))).collect();
    let pts: Vec<(u8, u8, u8)> = pts.into_iter().map(|(a, b, _)| (a, b, kit.m(a, b))).collect();
    let mut zint_cache: Vec<Option<Vec<[u8; 3]>>> = vec![None; kit.q];
    let mut yv = vec![0u8; kit.q];
    let mut xv = vec![0u8; kit.q];
    let mut w = vec![0u8; pts.len()];
    for y in &blocks.yfree[range] {
        for a in 1..q {
            let r = [y[0], y[1], y[2], y[3], y[4]];
            yv[a as usize] = r.iter().fold(0, |s, &x| kit.a(kit.m(s, a), x));
        }
        for x in &blocks.xfree[y[4] as usize] {
            for b in 1..q {
                let r = [x[0], x[1], x[2], x[3], 0];
                xv[b as usize] = r.iter().fold(0, |s, &t| kit.a(kit.m(s, b), t));
            }
            let zint = zint_cache[x[0] as usize].get_or_insert_with(|| kit.zfree_interior(x[0])).clone();
            for z in &zint {
                for (n, &(a, b, ab)) in pts.iter().enumerate() {
                    let (a2, b2) = (kit.m(a, a), kit.m(b, b));
                    let zv = kit.m(ab, [kit.m(z[0], a2), kit.m(z[1], ab), kit.m(z[2], b2)].iter().fold(0, |s, &t| kit.a(s, t)));
                    let r = kit.a(kit.a(yv[a as usize], xv[b as usize]), zv);
                    // need a·c1 + b·c2 + c3 ≠ −R/(ab)
                    w[n] = kit.neg[kit.m(r, kit.inv[ab as usize]) as usize];
                }
                let mut f = [0u8; 15];
                f[X4] = y[0];
                f[X3Z] = y[1];
                f[X2Z2] = y[2];
                f[XZ3] = y[3];
                f[Z4] = y[4];
                f[Y4] = x[0];
                f[Y3Z] = x[1];
                f[Y2Z2] = x[2];
                f[YZ3] = x[3];
                f[X3Y] = z[0];
                f[X2Y2] = z[1];
                f[XY3] = z[2];
                for c1 in 0..q {
                    for c2 in 0..q {
                        let mut forbidden = 0u32;
                        for (n, &(a, b, _)) in pts.iter().enumerate() {
                            let s = kit.a(kit.m(a, c1), kit.m(b, c2));
                            forbidden |= 1 << kit.a(w[n], kit.neg[s as usize]);
                        }
                        let mut free = !forbidden & ((1u64 << q) - 1) as u32;
                        while free != 0 {
                            let c3 = free.trailing_zeros() as u8;
                            free &= free - 1;
                            f[X2YZ] = c1;
                            f[XY2Z] = c2;
                            f[XYZ2] = c3;
                            sink(&f);
                        }
                    }
                }
            }
        }
    }
}

fn brute_blocks(kit: &Kit) -> Blocks {
    let q = kit.q as u8;
    let mut yfree = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 1..q {
                    let y = [1, a, b, c, d];
                    if kit.univariate_no_roots(&y, false) {
                        yfree.push(y);
                    }
                }
            }
        }
    }
    let mut xfree = vec![Vec::new(); kit.q];
    for (z4, list) in xfree.iter_mut().enumerate().skip(1) {
        for a in 1..q {
            for b in 0..q {
                for c in 0..q {
                    for d in 0..q {
                        if kit.univariate_no_roots(&[a, b, c, d, z4 as u8], true) {
                            list.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
    }
    Blocks { yfree, xfree }
}

/// The fixed quadratic points used to pin quartics.
pub struct PinnedFrame {
    pub q: u32,
    pub base: Field,
    pub ext: Field,
    /// Least element of `F_{q²}` (by encoding) outside `F_q`.
    pub s1: Fe,
    pub p1: ClosedPoint,
    pub p2: ClosedPoint,
    /// Minimal polynomial of `s1`: `x² + m[0] x + m[1]`.
    pub minpoly: [Fe; 2],
}

pub fn pinned_frame(q: u32) -> Result<PinnedFrame> {
    let base = FieldCtx::of_order(q)?;
    let ext = base.extension(2)?;
    let mut s1 = None;
    for a in ext.elements() {
        if ext.degree_over(a, &base)? == 2 {
            s1 = Some(a);
            break;
        }
    }
    let s1 = s1.ok_or_else(|| Error::InternalInconsistency("no quadratic element".into()))?;
    let s2 = ext.frobenius(s1, &base)?;
    let emb = ext.base().ok_or_else(|| Error::InternalInconsistency("extension without base".into()))?;
    let pull = |a: Fe| emb.pull(a).ok_or_else(|| Error::InternalInconsistency("minimal polynomial not rational".into()));
    let minpoly = [pull(ext.neg(ext.add(s1, s2)))?, pull(ext.mul(s1, s2))?];
    let pt = |c: [Fe; 3]| closed_point_of(&ext, &base, crate::projplane::ProjPoint::new(&ext, c).unwrap());
    let p1 = pt([s1, Fe::ZERO, Fe::ONE])?;
    let p2 = pt([Fe::ZERO, s1, Fe::ONE])?;
    Ok(PinnedFrame { q, base, ext, s1, p1, p2, minpoly })
}

impl PinnedFrame {
    /// Whether `f` vanishes at both pinned points.
    pub fn is_pinned(&self, f: &TernaryForm) -> Result<bool> {
        let g = f.lift(&self.base, &self.ext)?;
        Ok(g.eval_raw(&self.ext, self.p1.rep.c).is_zero() && g.eval_raw(&self.ext, self.p2.rep.c).is_zero())
    }

    fn blocks(&self, kit: &Kit) -> Blocks {
        let q = kit.q as u8;
        let m1 = self.minpoly[0].0 as u8;
        let m0 = self.minpoly[1].0 as u8;
        let irreducible = |lead: u8, mid: u8, cst: u8| kit.univariate_no_roots(&[0, 0, lead, mid, cst], false) && lead != 0;
        // (x² + m1 xz + m0 z²)(x² + b xz + c z²)
        let mut yfree = Vec::new();
        for b in 0..q {
            for c in 1..q {
                if irreducible(1, b, c) {
                    yfree.push([
                        1,
                        kit.a(b, m1),
                        kit.a(kit.a(c, kit.m(m1, b)), m0),
                        kit.a(kit.m(m1, c), kit.m(m0, b)),
                        kit.m(m0, c),
                    ]);
                }
            }
        }
        // (y² + m1 yz + m0 z²)(h2 y² + h1 yz + c z²), where m0·c is the shared z⁴ coefficient
        let mut xfree = vec![Vec::new(); kit.q];
        for (z4, list) in xfree.iter_mut().enumerate().skip(1) {
            let c = kit.m(z4 as u8, kit.inv[m0 as usize]);
            for h2 in 1..q {
                for h1 in 0..q {
                    if irreducible(h2, h1, c) {
                        list.push([
                            h2,
                            kit.a(h1, kit.m(m1, h2)),
                            kit.a(kit.a(c, kit.m(m1, h1)), kit.m(m0, h2)),
                            kit.a(kit.m(m1, c), kit.m(m0, h1)),
                        ]);
                    }
                }
            }
        }
        Blocks { yfree, xfree }
    }
}

/// Every pinned quartic with no rational point, scaled so the `x⁴` coefficient is 1.
/// Smoothness is not checked.
pub fn enumerate_pinned_pointless(frame: &PinnedFrame) -> Result<Vec<TernaryForm>> {
    let kit = Kit::new(&frame.base)?;
    Ok(pinned_pointless_coeffs(frame, &kit).iter().map(|c| kit.to_form(c)).collect())
}

fn pinned_pointless_coeffs(frame: &PinnedFrame, kit: &Kit) -> Vec<Coeffs> {
    let blocks = frame.blocks(kit);
    let n = blocks.yfree.len();
    (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            for_each_pointless(kit, &blocks, i..i + 1, &mut |c| out.push(*c));
            out
        })
        .collect()
}

fn pull_mat(frame: &PinnedFrame, m: &Mat3) -> Result<[[u8; 3]; 3]> {
    let ext = &frame.ext;
    let lead = *m.iter().flatten().find(|x| !x.is_zero()).ok_or(Error::InternalInconsistency("zero matrix".into()))?;
    let s = ext.inv(lead)?;
    let emb = ext.base().unwrap();
    let mut out = [[0u8; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let v = emb
                .pull(ext.mul(m[i][j], s))
                .ok_or_else(|| Error::InternalInconsistency("pinning map is not rational".into()))?;
            out[i][j] = v.0 as u8;
        }
    }
    Ok(out)
}

/// Matrix sending the standard frame `e1, e2, e3, (1,1,1)` to `w`.
fn frame_matrix(k: &FieldCtx, w: &[[Fe; 3]; 4]) -> Option<Mat3> {
    let a: Mat3 = [0, 1, 2].map(|r| [w[0][r], w[1][r], w[2][r]]);
    let ai = mat_inv(k, &a)?;
    let lam = crate::projplane::mat_vec(k, &ai, w[3]);
    if lam.iter().any(|x| x.is_zero()) {
        return None;
    }
    Some([0, 1, 2].map(|r| [0, 1, 2].map(|c| k.mul(a[r][c], lam[c]))))
}

struct QuadPoint {
    pts: [[Fe; 3]; 2],
    line: [Fe; 3],
}

fn quadratic_points(frame: &PinnedFrame, f: &TernaryForm) -> Result<Vec<QuadPoint>> {
    let ext = &frame.ext;
    let g = f.lift(&frame.base, ext)?;
    let mut out = Vec::new();
    for pt in enumerate_points(ext)? {
        if !g.eval_raw(ext, pt.c).is_zero() {
            continue;
        }
        let conj = pt.frobenius(ext, &frame.base)?;
        if conj == pt || conj < pt {
            continue;
        }
        let line = normalize(ext, cross(ext, pt.c, conj.c)).unwrap();
        out.push(QuadPoint { pts: [pt.c, conj.c], line });
    }
    Ok(out)
}

/// Images of a smooth pointless quartic under every map sending an ordered pair of
/// its quadratic points on distinct lines to `(P1, P2)`, four maps per pair.
/// Returned normalized, with multiplicity.
fn pinned_images(frame: &PinnedFrame, kit: &Kit, f: &TernaryForm) -> Result<Vec<Coeffs>> {
    let ext = &frame.ext;
    let c = kit.to_coeffs(f)?;
    let quads = quadratic_points(frame, f)?;
    let p = [frame.p1.orbit[0].c, frame.p1.orbit[1].c, frame.p2.orbit[0].c, frame.p2.orbit[1].c];
    let p_frame = frame_matrix(ext, &p).ok_or_else(|| Error::InternalInconsistency("pinned points collinear".into()))?;
    let p_inv = mat_inv(ext, &p_frame).unwrap();
    let mut out = Vec::new();
    for (i, q1) in quads.iter().enumerate() {
        for (j, q2) in quads.iter().enumerate() {
            if i == j || q1.line == q2.line {
                continue;
            }
            for s1 in 0..2 {
                for s2 in 0..2 {
                    let u = [q1.pts[s1], q1.pts[1 - s1], q2.pts[s2], q2.pts[1 - s2]];
                    let u_frame = frame_matrix(ext, &u)
                        .ok_or_else(|| Error::InternalInconsistency("quadratic points not in general position".into()))?;
                    // f(N v) vanishes at p_i when N p_i = u_i
                    let n = mat_mul(ext, &u_frame, &p_inv);
                    let t = kit.transform(&pull_mat(frame, &n)?);
                    out.push(kit.normalize(&kit.apply(&t, &c)));
                }
            }
        }
    }
    Ok(out)
}

fn check_quartic(base: &Field, f: &TernaryForm) -> Result<()> {
    if f.degree != 4 || !is_smooth(base, f)? {
        return Err(Error::NotSmooth);
    }
    if count_points_in(base, f) > 0 {
        return Err(Error::NotPointless);
    }
    Ok(())
}

/// The first pinned quartic isomorphic to `f`: fewest nonzero coefficients, then least
/// coefficient vector. An isomorphism invariant of smooth pointless quartics.
pub fn first_pinned_quartic(frame: &PinnedFrame, f: &TernaryForm) -> Result<TernaryForm> {
    check_quartic(&frame.base, f)?;
    let kit = Kit::new(&frame.base)?;
    let images = pinned_images(frame, &kit, f)?;
    let best = images.iter().min_by_key(|c| nf_key(c)).ok_or(Error::NotEnoughQuadraticPoints)?;
    Ok(kit.to_form(best))
}

/// Number of pinned quartics (with multiplicity) produced from `f`, and the number of
/// ordered pairs of quadratic points on distinct lines.
pub fn pinned_multiplicity(frame: &PinnedFrame, f: &TernaryForm) -> Result<(usize, usize)> {
    check_quartic(&frame.base, f)?;
    let kit = Kit::new(&frame.base)?;
    let quads = quadratic_points(frame, f)?;
    let mut pairs = 0;
    for (i, a) in quads.iter().enumerate() {
        for (j, b) in quads.iter().enumerate() {
            if i != j && a.line != b.line {
                pairs += 1;
            }
        }
    }
    Ok((pinned_images(frame, &kit, f)?.len(), pairs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CensusMethod {
    /// Brute force for `q ≤ 5`, pinned otherwise.
    Auto,
    Pinned,
    Brute,
}

impl FromStr for CensusMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(CensusMethod::Auto),
            "pinned" => Ok(CensusMethod::Pinned),
            "brute" => Ok(CensusMethod::Brute),
            _ => Err(Error::Parse(format!("unknown census method `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusEntry {
    pub q: u32,
    /// The class representative: the first pinned quartic, or for brute force the
    /// least coefficient vector in the orbit.
    pub normal_form: TernaryForm,
    /// Closed points of degree 1, 2, 3.
    pub counts: [i128; 3],
    pub real_weil: RealWeilPoly,
}

impl CensusEntry {
    fn of(base: &Field, f: TernaryForm) -> Result<CensusEntry> {
        let a = closed_point_counts(base, &f, 3)?;
        let n: Vec<i128> = (1..=3).map(|r| (1..=r).filter(|d| r % d == 0).map(|d| d as i128 * a[d - 1]).sum()).collect();
        let real_weil = real_weil_from_counts(&n, 3, base.order() as u64)?;
        Ok(CensusEntry { q: base.order(), normal_form: f, counts: [a[0], a[1], a[2]], real_weil })
    }

    /// `q <TAB> form <TAB> a1,a2,a3 <TAB> real Weil polynomial`.
    pub fn to_line(&self) -> String {
        let k = FieldCtx::of_order(self.q).unwrap();
        format!(
            "{}\t{}\t{},{},{}\t{}",
            self.q,
            self.normal_form.format(&k),
            self.counts[0],
            self.counts[1],
            self.counts[2],
            self.real_weil
        )
    }

    pub fn parse_line(line: &str) -> Result<CensusEntry> {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::Parse(format!("census line needs 4 columns: {line}")));
        }
        let q: u32 = cols[0].trim().parse().map_err(|_| Error::Parse(format!("bad q `{}`", cols[0])))?;
        let k = FieldCtx::of_order(q)?;
        let normal_form = TernaryForm::parse_with_degree(&k, cols[1], 4)?;
        let counts: Vec<i128> = cols[2]
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("bad count `{s}`"))))
            .collect::<Result<_>>()?;
        let counts: [i128; 3] = counts.try_into().map_err(|_| Error::Parse("need three counts".into()))?;
        let real_weil = RealWeilPoly::parse(q as u64, cols[3])?;
        Ok(CensusEntry { q, normal_form, counts, real_weil })
    }
}

impl fmt::Display for CensusEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

pub fn write_census(entries: &[CensusEntry]) -> String {
    let mut s = String::from("# q\tnormal form\ta1,a2,a3\treal Weil polynomial\n");
    for e in entries {
        s.push_str(&e.to_line());
        s.push('\n');
    }
    s
}

pub fn parse_census(text: &str) -> Result<Vec<CensusEntry>> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(CensusEntry::parse_line)
        .collect()
}

pub fn census(q: u32) -> Result<Vec<CensusEntry>> {
    census_with(q, CensusMethod::Auto)
}

pub fn census_with(q: u32, method: CensusMethod) -> Result<Vec<CensusEntry>> {
    match method {
        CensusMethod::Brute => brute_census_small(q),
        CensusMethod::Pinned => pinned_census(q),
        CensusMethod::Auto if q <= 5 => brute_census_small(q),
        CensusMethod::Auto => pinned_census(q),
    }
}

/// Census through pinned quartics. Complete when every smooth pointless quartic over
/// `F_q` has two quadratic points on distinct lines, which holds for `q ≥ 7`.
pub fn pinned_census(q: u32) -> Result<Vec<CensusEntry>> {
    let frame = pinned_frame(q)?;
    let kit = Kit::new(&frame.base)?;
    let candidates = pinned_pointless_coeffs(&frame, &kit);
    let mut seen: FxHashSet<u128> = FxHashSet::default();
    let mut forms = Vec::new();
    for c in &candidates {
        if seen.contains(&key(c)) || !kit.is_smooth(c) {
            continue;
        }
        let images = pinned_images(&frame, &kit, &kit.to_form(c))?;
        let best = *images.iter().min_by_key(|x| nf_key(x)).unwrap();
        seen.extend(images.iter().map(key));
        if !seen.contains(&key(c)) {
            return Err(Error::InternalInconsistency("pinned quartic missing from its own class".into()));
        }
        forms.push(best);
    }
    forms.sort_by_key(nf_key);
    forms.into_iter().map(|c| CensusEntry::of(&frame.base, kit.to_form(&c))).collect()
}

/// Orbit of `start` under the group generated by `gens`, recorded in `visited`.
/// Returns the least coefficient vector in the orbit.
fn orbit_min(kit: &Kit, gens: &[[[u8; 15]; 15]], start: Coeffs, visited: &mut FxHashSet<u128>) -> Coeffs {
    let mut best = start;
    let mut queue = VecDeque::from([start]);
    visited.insert(key(&start));
    while let Some(c) = queue.pop_front() {
        for t in gens {
            let d = kit.normalize(&kit.apply(t, &c));
            if visited.insert(key(&d)) {
                best = best.min(d);
                queue.push_back(d);
            }
        }
    }
    best
}

/// Least coefficient vector in the `PGL_3(F_q)` orbit of `f`.
pub fn orbit_representative(kit: &Kit, f: &Coeffs) -> Coeffs {
    let gens: Vec<_> = kit.generators().iter().map(|m| kit.transform(m)).collect();
    orbit_min(kit, &gens, kit.normalize(f), &mut FxHashSet::default())
}

/// Census by enumerating every pointless quartic and splitting it into orbits.
/// Practical for `q ≤ 5`.
pub fn brute_census_small(q: u32) -> Result<Vec<CensusEntry>> {
    if q > 5 {
        return Err(Error::UnsupportedField(q));
    }
    let base = FieldCtx::of_order(q)?;
    let kit = Kit::new(&base)?;
    let blocks = brute_blocks(&kit);
    let gens: Vec<_> = kit.generators().iter().map(|m| kit.transform(m)).collect();
    let mut visited: FxHashSet<u128> = FxHashSet::default();
    let mut reps = Vec::new();
    for_each_pointless(&kit, &blocks, 0..blocks.yfree.len(), &mut |c| {
        if visited.contains(&key(c)) {
            return;
        }
        let rep = orbit_min(&kit, &gens, *c, &mut visited);
        if kit.is_smooth(c) {
            reps.push(rep);
        }
    });
    reps.sort();
    reps.into_iter().map(|c| CensusEntry::of(&base, kit.to_form(&c))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub q: u32,
    pub form: String,
    pub smooth: bool,
    pub pointless: bool,
    pub counts: [i128; 3],
    pub real_weil: RealWeilPoly,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.smooth && self.pointless
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "F_{}: {}\n  smooth: {}\n  pointless: {}\n  a1,a2,a3: {},{},{}\n  real Weil polynomial: {}",
            self.q,
            self.form,
            self.smooth,
            self.pointless,
            self.counts[0],
            self.counts[1],
            self.counts[2],
            crate::weilkit::factor_string(&self.real_weil)
        )
    }
}

/// Smoothness, pointlessness and zeta data of one quartic over `F_q`.
pub fn verify_quartic(q: u32, form: &str) -> Result<VerifyReport> {
    let base = FieldCtx::of_order(q)?;
    let f = TernaryForm::parse_with_degree(&base, form, 4)?;
    let smooth = is_smooth(&base, &f)?;
    let pointless = count_points_in(&base, &f) == 0;
    let entry = CensusEntry::of(&base, f.clone())?;
    Ok(VerifyReport { q, form: f.format(&base), smooth, pointless, counts: entry.counts, real_weil: entry.real_weil })
}

/// `x⁴ + y⁴ + z⁴` over `F_29`; expected smooth and pointless with real Weil
/// polynomial `(T − 10)³`. Uniqueness of the class is not rechecked.
pub fn verify_f29_unique() -> Result<VerifyReport> {
    verify_quartic(29, "x^4 + y^4 + z^4")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pgl(kit: &Kit, rng: &mut ChaCha8Rng) -> [[u8; 3]; 3] {
        let k = &kit.field;
        loop {
            let m: Mat3 = [0; 3].map(|_| [0; 3].map(|_| Fe(rng.gen_range(0..k.order()))));
            if !crate::projplane::det3(k, &m).is_zero() {
                return m.map(|r| r.map(|x| x.0 as u8));
            }
        }
    }

    #[test]
    fn kit_matches_generic_arithmetic() {
        for q in [2, 3, 4, 5, 7, 8, 9] {
            let k = FieldCtx::of_order(q).unwrap();
            let kit = Kit::new(&k).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(q as u64);
            for _ in 0..30 {
                let c: Coeffs = [0; 15].map(|_| rng.gen_range(0..q) as u8);
                let f = kit.to_form(&c);
                let v = [0; 3].map(|_| rng.gen_range(0..q) as u8);
                assert_eq!(kit.eval(&c, v) as u32, f.eval_raw(&k, v.map(|x| Fe(x as u32))).0);
                assert_eq!(kit.is_smooth(&c), is_smooth(&k, &f).unwrap(), "{}", f.format(&k));
                let m = random_pgl(&kit, &mut rng);
                let g = f.substitute(&k, &m.map(|r| r.map(|x| Fe(x as u32))));
                assert_eq!(kit.to_form(&kit.apply(&kit.transform(&m), &c)), g);
                assert_eq!(kit.has_rational_point(&c), count_points_in(&k, &f) > 0);
            }
        }
    }

    #[test]
    fn frame_points() {
        for q in [2, 3, 4, 7] {
            let fr = pinned_frame(q).unwrap();
            assert_eq!(fr.p1.degree, 2);
            assert_eq!(fr.p2.degree, 2);
            assert_eq!(fr.s1, fr.ext.t(), "q = {q}");
        }
    }

    #[test]
    fn pinned_enumeration_matches_filter() {
        // q = 3: compare with a scan over all pinned forms
        let fr = pinned_frame(3).unwrap();
        let kit = Kit::new(&fr.base).unwrap();
        let got: FxHashSet<u128> = pinned_pointless_coeffs(&fr, &kit).iter().map(key).collect();
        let mut want = FxHashSet::default();
        let mut c = [0u8; 15];
        c[X4] = 1;
        for code in 0..3u64.pow(14) {
            let mut r = code;
            for x in c.iter_mut().skip(1) {
                *x = (r % 3) as u8;
                r /= 3;
            }
            if !kit.has_rational_point(&c) && fr.is_pinned(&kit.to_form(&c)).unwrap() {
                want.insert(key(&c));
            }
        }
        assert!(!want.is_empty());
        assert_eq!(got, want);
    }

    #[test]
    fn pinned_enumeration_is_pinned_and_pointless() {
        let fr = pinned_frame(7).unwrap();
        let kit = Kit::new(&fr.base).unwrap();
        let all = pinned_pointless_coeffs(&fr, &kit);
        assert!(!all.is_empty());
        for c in all.iter().step_by(97) {
            assert!(!kit.has_rational_point(c));
            assert!(fr.is_pinned(&kit.to_form(c)).unwrap());
            assert_eq!(c[X4], 1);
        }
    }

    #[test]
    fn normal_form_is_invariant() {
        let fr = pinned_frame(7).unwrap();
        let kit = Kit::new(&fr.base).unwrap();
        let all = pinned_pointless_coeffs(&fr, &kit);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut tried = 0;
        for c in all.iter().step_by(211) {
            if !kit.is_smooth(c) {
                continue;
            }
            let f = kit.to_form(c);
            let nf = first_pinned_quartic(&fr, &f).unwrap();
            assert!(fr.is_pinned(&nf).unwrap());
            for _ in 0..3 {
                let m = random_pgl(&kit, &mut rng);
                let g = kit.to_form(&kit.apply(&kit.transform(&m), c));
                assert_eq!(first_pinned_quartic(&fr, &g).unwrap(), nf);
            }
            let (with_mult, pairs) = pinned_multiplicity(&fr, &f).unwrap();
            assert_eq!(with_mult, 4 * pairs);
            tried += 1;
            if tried == 6 {
                break;
            }
        }
        assert_eq!(tried, 6);
    }

    #[test]
    fn first_pinned_quartic_errors() {
        let fr = pinned_frame(7).unwrap();
        let k = &fr.base;
        let with_point = TernaryForm::parse_with_degree(k, "x^4 + y^4 - z^4", 4).unwrap();
        assert!(is_smooth(k, &with_point).unwrap());
        assert_eq!(first_pinned_quartic(&fr, &with_point), Err(Error::NotPointless));
        let singular = TernaryForm::parse_with_degree(k, "(x^2 + y^2 + z^2)^2", 4).unwrap();
        assert_eq!(first_pinned_quartic(&fr, &singular), Err(Error::NotSmooth));
    }

    #[test]
    fn orbit_representative_is_invariant() {
        let k = FieldCtx::of_order(2).unwrap();
        let kit = Kit::new(&k).unwrap();
        let f = TernaryForm::parse_with_degree(&k, "x^4 + x*y^3 + y^4 + x*y*z^2 + x*z^3 + y*z^3 + z^4", 4).unwrap();
        let c = kit.to_coeffs(&f).unwrap();
        let rep = orbit_representative(&kit, &c);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let m = random_pgl(&kit, &mut rng);
            assert_eq!(orbit_representative(&kit, &kit.apply(&kit.transform(&m), &c)), rep);
        }
    }

    #[test]
    fn brute_census_q2_q3() {
        let c2 = brute_census_small(2).unwrap();
        assert_eq!(c2.len(), 4);
        let c3 = brute_census_small(3).unwrap();
        assert_eq!(c3.len(), 8);
        for e in c2.iter().chain(&c3) {
            assert_eq!(e.counts[0], 0);
        }
    }

    #[test]
    fn brute_q2_orbits_match_full_group() {
        // orbit sizes from generators agree with the full group action
        let k = FieldCtx::of_order(2).unwrap();
        let kit = Kit::new(&k).unwrap();
        let group = crate::projplane::pgl3_elements(&k).unwrap();
        for e in brute_census_small(2).unwrap() {
            let c = kit.to_coeffs(&e.normal_form).unwrap();
            let full: FxHashSet<u128> = group
                .iter()
                .map(|g| key(&kit.normalize(&kit.apply(&kit.transform(&g.m.map(|r| r.map(|x| x.0 as u8))), &c))))
                .collect();
            let mut visited = FxHashSet::default();
            let gens: Vec<_> = kit.generators().iter().map(|m| kit.transform(m)).collect();
            orbit_min(&kit, &gens, c, &mut visited);
            assert_eq!(visited, full);
        }
    }

    #[test]
    fn pinned_classes_match_brute_force() {
        for q in [2, 3] {
            let brute: Vec<Coeffs> = brute_census_small(q)
                .unwrap()
                .iter()
                .map(|e| {
                    let k = FieldCtx::of_order(q).unwrap();
                    Kit::new(&k).unwrap().to_coeffs(&e.normal_form).unwrap()
                })
                .collect();
            let pinned = pinned_census(q).unwrap();
            assert!(pinned.len() <= brute.len());
            let k = FieldCtx::of_order(q).unwrap();
            let kit = Kit::new(&k).unwrap();
            for e in &pinned {
                let rep = orbit_representative(&kit, &kit.to_coeffs(&e.normal_form).unwrap());
                assert!(brute.contains(&rep), "q={q}: {}", e.normal_form.format(&k));
            }
        }
    }

    #[test]
    fn census_q7() {
        let c = census(7).unwrap();
        assert_eq!(c.len(), 32);
        let text = write_census(&c);
        assert_eq!(parse_census(&text).unwrap(), c);
        for e in &c {
            assert_eq!(e.counts[0], 0);
            assert!(e.real_weil.g() == 3);
        }
    }

    #[test]
    fn f32_quartic_is_pointless_over_f2_and_f32() {
        for q in [2, 32] {
            let r = verify_quartic(q, crate::fixtures::F32_QUARTIC).unwrap();
            assert!(r.ok(), "{r}");
        }
    }

    #[test]
    fn f29_fermat() {
        let r = verify_f29_unique().unwrap();
        assert!(r.ok(), "{r:?}");
        assert_eq!(r.real_weil.to_string(), "T^3 - 30T^2 + 300T - 1000");
        assert_eq!(r.counts, [0, 358, 8000]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn transform_is_a_group_action(seed in any::<u64>()) {
            let k = FieldCtx::of_order(5).unwrap();
            let kit = Kit::new(&k).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_pgl(&kit, &mut rng);
            let b = random_pgl(&kit, &mut rng);
            let c: Coeffs = [0; 15].map(|_| rng.gen_range(0..5u8));
            let ab = crate::projplane::mat_mul(&k, &a.map(|r| r.map(|x| Fe(x as u32))), &b.map(|r| r.map(|x| Fe(x as u32))));
            let ab = ab.map(|r| r.map(|x| x.0 as u8));
            // f(ABv) = (f∘A)(Bv)
            let lhs = kit.apply(&kit.transform(&ab), &c);
            let rhs = kit.apply(&kit.transform(&b), &kit.apply(&kit.transform(&a), &c));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
