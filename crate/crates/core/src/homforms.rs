//! Homogeneous ternary forms: evaluation, derivatives, point counts and smoothness.
//!
//! Coefficients are indexed by monomials `x^i y^j z^k` ordered by `i` descending,
//! then `j` descending. For quartics this is
//! `x⁴, x³y, x³z, x²y², x²yz, x²z², xy³, xy²z, xyz², xz³, y⁴, y³z, y²z², yz³, z⁴`.

use std::collections::BTreeMap;

use crate::arith::closed_from_counts;
use crate::error::{Error, Result};
use crate::gfield::{Fe, Field, FieldCtx, FieldId};
use crate::projplane::{closed_points, enumerate_points, ClosedPoint, Mat3, ProjPoint};

pub fn num_monomials(d: u32) -> usize {
    ((d + 1) * (d + 2) / 2) as usize
}

/// Exponent triples of degree `d` in coefficient order.
pub fn monomials(d: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity(num_monomials(d));
    for i in (0..=d).rev() {
        for j in (0..=d - i).rev() {
            out.push([i, j, d - i - j]);
        }
    }
    out
}

#[inline]
pub fn monomial_index(d: u32, i: u32, j: u32) -> usize {
    let r = d - i;
    (r * (r + 1) / 2 + (r - j)) as usize
}

fn binom_mod(n: u32, k: u32, p: u32) -> u32 {
    if k > n {
        return 0;
    }
    let mut c: u64 = 1;
    for i in 0..k as u64 {
        c = c * (n as u64 - i) / (i + 1);
    }
    (c % p as u64) as u32
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TernaryForm {
    pub field: FieldId,
    pub degree: u32,
    pub coeffs: Vec<Fe>,
}

impl TernaryForm {
    pub fn zero(k: &FieldCtx, degree: u32) -> TernaryForm {
        TernaryForm { field: k.id(), degree, coeffs: vec![Fe::ZERO; num_monomials(degree)] }
    }

    pub fn from_coeffs(k: &FieldCtx, degree: u32, coeffs: Vec<Fe>) -> Result<TernaryForm> {
        if coeffs.len() != num_monomials(degree) {
            return Err(Error::Parse(format!("degree {degree} needs {} coefficients", num_monomials(degree))));
        }
        Ok(TernaryForm { field: k.id(), degree, coeffs })
    }

    pub fn monomial(k: &FieldCtx, e: [u32; 3], c: Fe) -> TernaryForm {
        let d = e[0] + e[1] + e[2];
        let mut f = TernaryForm::zero(k, d);
        f.coeffs[monomial_index(d, e[0], e[1])] = c;
        f
    }

    pub fn coeff(&self, e: [u32; 3]) -> Fe {
        self.coeffs[monomial_index(self.degree, e[0], e[1])]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    fn check(&self, k: &FieldCtx) -> Result<()> {
        if self.field != k.id() {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn add(&self, k: &FieldCtx, other: &TernaryForm) -> Result<TernaryForm> {
        self.check(k)?;
        other.check(k)?;
        if self.degree != other.degree {
            return Err(Error::Parse("adding forms of different degree".into()));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| k.add(a, b)).collect();
        Ok(TernaryForm { field: self.field, degree: self.degree, coeffs })
    }

    pub fn scale(&self, k: &FieldCtx, s: Fe) -> TernaryForm {
        TernaryForm { field: self.field, degree: self.degree, coeffs: self.coeffs.iter().map(|&c| k.mul(c, s)).collect() }
    }

    pub fn mul(&self, k: &FieldCtx, other: &TernaryForm) -> Result<TernaryForm> {
        self.check(k)?;
        other.check(k)?;
        let d = self.degree + other.degree;
        let mut out = TernaryForm::zero(k, d);
        let ma = monomials(self.degree);
        let mb = monomials(other.degree);
        for (ea, &ca) in ma.iter().zip(&self.coeffs) {
            if ca.is_zero() {
                continue;
            }
            for (eb, &cb) in mb.iter().zip(&other.coeffs) {
                if cb.is_zero() {
                    continue;
                }
                let idx = monomial_index(d, ea[0] + eb[0], ea[1] + eb[1]);
                out.coeffs[idx] = k.add(out.coeffs[idx], k.mul(ca, cb));
            }
        }
        Ok(out)
    }

    /// Scales so the first nonzero coefficient is 1. The zero form is returned as is.
    pub fn normalized(&self, k: &FieldCtx) -> TernaryForm {
        match self.coeffs.iter().find(|c| !c.is_zero()) {
            Some(&lead) if lead != Fe::ONE => self.scale(k, k.inv(lead).unwrap()),
            _ => self.clone(),
        }
    }

    /// The same form with coefficients mapped into `ext`.
    pub fn lift(&self, base: &FieldCtx, ext: &FieldCtx) -> Result<TernaryForm> {
        self.check(base)?;
        let coeffs = self.coeffs.iter().map(|&c| ext.lift(base, c)).collect::<Result<_>>()?;
        Ok(TernaryForm { field: ext.id(), degree: self.degree, coeffs })
    }

    /// Formal partial derivatives `(∂/∂x, ∂/∂y, ∂/∂z)`.
    pub fn partials(&self, k: &FieldCtx) -> [TernaryForm; 3] {
        [0, 1, 2].map(|v| {
            let mut e = [0, 0, 0];
            e[v] = 1;
            self.hasse(k, e)
        })
    }

    /// Hasse derivative `D^{(a,b,c)}`: `x^i y^j z^k ↦ C(i,a)C(j,b)C(k,c) x^{i-a} y^{j-b} z^{k-c}`.
    /// For a single order-one index this is the ordinary partial derivative.
    pub fn hasse(&self, k: &FieldCtx, e: [u32; 3]) -> TernaryForm {
        let s = e[0] + e[1] + e[2];
        if s > self.degree {
            return TernaryForm::zero(k, 0);
        }
        let d = self.degree - s;
        let mut out = TernaryForm::zero(k, d);
        out.field = self.field;
        for (m, &c) in monomials(self.degree).iter().zip(&self.coeffs) {
            if c.is_zero() || m[0] < e[0] || m[1] < e[1] || m[2] < e[2] {
                continue;
            }
            let b = binom_mod(m[0], e[0], k.p()) as u64 * binom_mod(m[1], e[1], k.p()) as u64
                * binom_mod(m[2], e[2], k.p()) as u64;
            let b = k.from_int((b % k.p() as u64) as i64);
            let idx = monomial_index(d, m[0] - e[0], m[1] - e[1]);
            out.coeffs[idx] = k.add(out.coeffs[idx], k.mul(b, c));
        }
        out
    }

    /// Value at a coordinate vector whose entries lie in the form's own field.
    pub fn eval_raw(&self, k: &FieldCtx, v: [Fe; 3]) -> Fe {
        let d = self.degree as usize;
        let mut pw = [[Fe::ONE; 16]; 3];
        for (axis, row) in pw.iter_mut().enumerate() {
            for e in 1..=d {
                row[e] = k.mul(row[e - 1], v[axis]);
            }
        }
        let mut acc = Fe::ZERO;
        let mut idx = 0;
        for i in (0..=d).rev() {
            for j in (0..=d - i).rev() {
                let c = self.coeffs[idx];
                idx += 1;
                if c.is_zero() {
                    continue;
                }
                let m = k.mul(k.mul(pw[0][i], pw[1][j]), pw[2][d - i - j]);
                acc = k.add(acc, k.mul(c, m));
            }
        }
        acc
    }

    /// Value at `pt`, a point over `ext` (the form's field or an extension of it).
    pub fn evaluate(&self, base: &FieldCtx, ext: &FieldCtx, pt: &ProjPoint) -> Result<Fe> {
        if pt.field != ext.id() {
            return Err(Error::ContextMismatch);
        }
        if base.id() == ext.id() {
            self.check(base)?;
            return Ok(self.eval_raw(base, pt.c));
        }
        Ok(self.lift(base, ext)?.eval_raw(ext, pt.c))
    }

    /// The form `v ↦ f(Mv)`.
    pub fn substitute(&self, k: &FieldCtx, m: &Mat3) -> TernaryForm {
        let d = self.degree;
        let lin: Vec<TernaryForm> = (0..3)
            .map(|r| {
                let mut l = TernaryForm::zero(k, 1);
                l.field = self.field;
                l.coeffs = vec![m[r][0], m[r][1], m[r][2]];
                l
            })
            .collect();
        let mut powers: Vec<Vec<TernaryForm>> = Vec::new();
        for l in &lin {
            let mut one = TernaryForm::zero(k, 0);
            one.field = self.field;
            one.coeffs[0] = Fe::ONE;
            let mut row = vec![one];
            for e in 1..=d as usize {
                let next = row[e - 1].mul_unchecked(k, l);
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = TernaryForm::zero(k, d);
        out.field = self.field;
        for (e, &c) in monomials(d).iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let t = powers[0][e[0] as usize]
                .mul_unchecked(k, &powers[1][e[1] as usize])
                .mul_unchecked(k, &powers[2][e[2] as usize]);
            for (o, &x) in out.coeffs.iter_mut().zip(&t.coeffs) {
                *o = k.add(*o, k.mul(c, x));
            }
        }
        out
    }

    fn mul_unchecked(&self, k: &FieldCtx, other: &TernaryForm) -> TernaryForm {
        let mut a = self.clone();
        a.field = k.id();
        let mut b = other.clone();
        b.field = k.id();
        let mut r = a.mul(k, &b).unwrap();
        r.field = self.field;
        r
    }

    /// Human-readable form, e.g. `x^4 + x*y^3 + (t^2+1)*z^4`.
    pub fn format(&self, k: &FieldCtx) -> String {
        let mut terms = Vec::new();
        for (e, &c) in monomials(self.degree).iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let mono: Vec<String> = e
                .iter()
                .zip(['x', 'y', 'z'])
                .filter(|(&p, _)| p > 0)
                .map(|(&p, v)| if p == 1 { v.to_string() } else { format!("{v}^{p}") })
                .collect();
            let mono = mono.join("*");
            let cs = k.format_elem(c);
            let cs = if cs.contains('+') { format!("({cs})") } else { cs };
            terms.push(match (c == Fe::ONE, mono.is_empty()) {
                (_, true) => cs,
                (true, false) => mono,
                (false, false) => format!("{cs}*{mono}"),
            });
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    /// Parses a polynomial expression in `x, y, z` (sums, products, powers,
    /// parentheses and implicit multiplication). The result must be homogeneous.
    /// The zero form needs an explicit degree, so `"0"` parses to degree 0.
    pub fn parse(k: &FieldCtx, s: &str) -> Result<TernaryForm> {
        let mut p = ExprParser { k, s: s.as_bytes(), pos: 0 };
        let poly = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(Error::Parse(format!("trailing input in `{s}`")));
        }
        let poly: BTreeMap<[u32; 3], Fe> = poly.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let degrees: Vec<u32> = poly.keys().map(|e| e[0] + e[1] + e[2]).collect();
        let d = degrees.first().copied().unwrap_or(0);
        if degrees.iter().any(|&e| e != d) {
            return Err(Error::Parse(format!("`{s}` is not homogeneous")));
        }
        let mut f = TernaryForm::zero(k, d);
        for (e, c) in poly {
            f.coeffs[monomial_index(d, e[0], e[1])] = c;
        }
        Ok(f)
    }

    /// Parses with a required degree, so that `"0"` can denote the zero form of any degree.
    pub fn parse_with_degree(k: &FieldCtx, s: &str, degree: u32) -> Result<TernaryForm> {
        let f = TernaryForm::parse(k, s)?;
        if f.is_zero() {
            return Ok(TernaryForm::zero(k, degree));
        }
        if f.degree != degree {
            return Err(Error::Parse(format!("expected degree {degree}, got {}", f.degree)));
        }
        Ok(f)
    }

    /// Compact format: for each coefficient in order, its `k` base-`p` digits
    /// (constant term first), each written as one base-36 character.
    pub fn to_digits(&self, k: &FieldCtx) -> String {
        let mut s = String::with_capacity(self.coeffs.len() * k.k() as usize);
        for &c in &self.coeffs {
            for d in k.digits(c) {
                s.push(char::from_digit(d, 36).unwrap());
            }
        }
        s
    }

    pub fn from_digits(k: &FieldCtx, s: &str) -> Result<TernaryForm> {
        let kk = k.k() as usize;
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() % kk != 0 {
            return Err(Error::Parse("digit string length not a multiple of the field degree".into()));
        }
        let n = chars.len() / kk;
        let d = (0..=64u32)
            .find(|&d| num_monomials(d) == n)
            .ok_or_else(|| Error::Parse(format!("{n} coefficients is not a form size")))?;
        let mut coeffs = Vec::with_capacity(n);
        for chunk in chars.chunks(kk) {
            let mut digits = Vec::with_capacity(kk);
            for &ch in chunk {
                let v = ch.to_digit(36).filter(|&v| v < k.p()).ok_or_else(|| Error::Parse(format!("bad digit `{ch}`")))?;
                digits.push(v);
            }
            coeffs.push(k.from_digits(&digits));
        }
        TernaryForm::from_coeffs(k, d, coeffs)
    }
}

type Sparse = BTreeMap<[u32; 3], Fe>;

struct ExprParser<'a> {
    k: &'a FieldCtx,
    s: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at offset {} in `{}`", self.pos, String::from_utf8_lossy(self.s)))
    }

    fn expr(&mut self) -> Result<Sparse> {
        let mut acc = Sparse::new();
        let mut first = true;
        loop {
            let neg = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                _ if first => false,
                _ => break,
            };
            first = false;
            let t = self.term()?;
            for (e, c) in t {
                let c = if neg { self.k.neg(c) } else { c };
                let slot = acc.entry(e).or_insert(Fe::ZERO);
                *slot = self.k.add(*slot, c);
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Sparse> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                }
                Some(c) if c == b'(' || c.is_ascii_alphanumeric() => {}
                _ => break,
            }
            let rhs = self.power()?;
            acc = self.product(&acc, &rhs);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Sparse> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.number()?;
            let mut acc: Sparse = [([0, 0, 0], Fe::ONE)].into_iter().collect();
            for _ in 0..e {
                acc = self.product(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("expected a number"))
    }

    fn atom(&mut self) -> Result<Sparse> {
        let c = self.peek().ok_or_else(|| self.err("unexpected end"))?;
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected `)`"));
            }
            self.pos += 1;
            return Ok(e);
        }
        if c.is_ascii_digit() {
            let n = self.number()?;
            let v = self.k.from_int((n % self.k.p() as u64) as i64);
            return Ok([([0, 0, 0], v)].into_iter().collect());
        }
        if c.is_ascii_lowercase() {
            self.pos += 1;
            let e = match c {
                b'x' => [1, 0, 0],
                b'y' => [0, 1, 0],
                b'z' => [0, 0, 1],
                _ if self.k.k() > 1 => return Ok([([0, 0, 0], self.k.t())].into_iter().collect()),
                _ => return Err(self.err("generator symbol in a prime field")),
            };
            return Ok([(e, Fe::ONE)].into_iter().collect());
        }
        Err(self.err("unexpected character"))
    }

    fn product(&self, a: &Sparse, b: &Sparse) -> Sparse {
        let mut out = Sparse::new();
        for (ea, &ca) in a {
            for (eb, &cb) in b {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                let slot = out.entry(e).or_insert(Fe::ZERO);
                *slot = self.k.add(*slot, self.k.mul(ca, cb));
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }
}

/// Univariate polynomial helpers over a field, coefficients constant term first.
mod upoly {
    use crate::gfield::{Fe, FieldCtx};

    pub fn trim(a: &mut Vec<Fe>) {
        while a.last().is_some_and(|c| c.is_zero()) {
            a.pop();
        }
    }

    /// `a mod b` for nonzero trimmed `b`.
    pub fn rem(k: &FieldCtx, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
        let mut r = a.to_vec();
        trim(&mut r);
        let db = b.len() - 1;
        let inv_lead = k.inv(b[db]).unwrap();
        while r.len() > db {
            let c = k.mul(*r.last().unwrap(), inv_lead);
            let off = r.len() - 1 - db;
            for j in 0..=db {
                r[off + j] = k.sub(r[off + j], k.mul(c, b[j]));
            }
            r.pop();
            trim(&mut r);
        }
        r
    }

    pub fn mulmod(k: &FieldCtx, a: &[Fe], b: &[Fe], m: &[Fe]) -> Vec<Fe> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![Fe::ZERO; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = k.add(prod[i + j], k.mul(x, y));
            }
        }
        rem(k, &prod, m)
    }

    pub fn gcd_degree(k: &FieldCtx, a: &[Fe], b: &[Fe]) -> usize {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(k, &a, &b);
            a = b;
            b = r;
        }
        a.len().saturating_sub(1)
    }

    /// Number of distinct roots of `g` in `k`; the zero polynomial has `|k|` roots.
    pub fn count_roots(k: &FieldCtx, g: &[Fe]) -> u64 {
        let mut g = g.to_vec();
        trim(&mut g);
        let q = k.order() as u64;
        match g.len() {
            0 => return q,
            1 => return 0,
            2 => return 1,
            _ => {}
        }
        if q <= 32 {
            return k
                .elements()
                .filter(|&x| g.iter().rev().fold(Fe::ZERO, |acc, &c| k.add(k.mul(acc, x), c)).is_zero())
                .count() as u64;
        }
        // x^q mod g by square-and-multiply
        let x = vec![Fe::ZERO, Fe::ONE];
        let mut result = vec![Fe::ONE];
        let mut base = rem(k, &x, &g);
        let mut e = q;
        while e > 0 {
            if e & 1 == 1 {
                result = mulmod(k, &result, &base, &g);
            }
            base = mulmod(k, &base, &base, &g);
            e >>= 1;
        }
        result.resize(result.len().max(2), Fe::ZERO);
        result[1] = k.sub(result[1], Fe::ONE);
        gcd_degree(k, &g, &result) as u64
    }
}

/// Points of `f = 0` in `P²(k)`, where `f` already has coefficients in `k`.
pub fn count_points_in(k: &FieldCtx, f: &TernaryForm) -> u64 {
    let d = f.degree as usize;
    let mut total = 0;
    let mut bpow = vec![Fe::ONE; d + 1];
    let mut g = vec![Fe::ZERO; d + 1];
    // affine chart z = 1: for each b, the polynomial f(x, b, 1)
    for b in k.elements() {
        for e in 1..=d {
            bpow[e] = k.mul(bpow[e - 1], b);
        }
        g.iter_mut().for_each(|c| *c = Fe::ZERO);
        let mut idx = 0;
        for i in (0..=d).rev() {
            for j in (0..=d - i).rev() {
                let c = f.coeffs[idx];
                idx += 1;
                if !c.is_zero() {
                    g[i] = k.add(g[i], k.mul(c, bpow[j]));
                }
            }
        }
        total += upoly::count_roots(k, &g);
    }
    // line z = 0: points (a:1:0) and (1:0:0)
    g.iter_mut().for_each(|c| *c = Fe::ZERO);
    for i in 0..=d {
        g[i] = f.coeffs[monomial_index(d as u32, i as u32, (d - i) as u32)];
    }
    total += upoly::count_roots(k, &g);
    if f.coeffs[0].is_zero() {
        total += 1;
    }
    total
}

/// `#{P ∈ P²(F_{q^r}) : f(P) = 0}`.
pub fn count_points(base: &Field, f: &TernaryForm, r: u32) -> Result<u64> {
    let ext = base.extension(r)?;
    Ok(count_points_in(&ext, &f.lift(base, &ext)?))
}

/// `N_1, …, N_{r_max}`.
pub fn point_counts(base: &Field, f: &TernaryForm, r_max: u32) -> Result<Vec<u64>> {
    (1..=r_max).map(|r| count_points(base, f, r)).collect()
}

/// `a_1, …, a_{d_max}`, the numbers of closed points of each degree on `f = 0`.
pub fn closed_point_counts(base: &Field, f: &TernaryForm, d_max: u32) -> Result<Vec<i128>> {
    let n: Vec<i128> = point_counts(base, f, d_max)?.into_iter().map(|x| x as i128).collect();
    closed_from_counts(&n).ok_or_else(|| Error::InternalInconsistency("Möbius inversion of point counts".into()))
}

/// Closed points of exact degree `d` where `f` vanishes and its gradient does not.
pub fn smooth_points_of_degree(base: &Field, f: &TernaryForm, d: u32) -> Result<Vec<ClosedPoint>> {
    let ext = base.extension(d)?;
    let g = f.lift(base, &ext)?;
    let parts = g.partials(&ext);
    let mut out = Vec::new();
    for cp in closed_points(base, d)? {
        let p = cp.rep.c;
        if g.eval_raw(&ext, p).is_zero() && parts.iter().any(|h| !h.eval_raw(&ext, p).is_zero()) {
            out.push(cp);
        }
    }
    Ok(out)
}

/// Incremental row echelon form over a field.
pub struct Echelon<'a> {
    k: &'a FieldCtx,
    rows: Vec<(usize, Vec<Fe>)>,
}

impl<'a> Echelon<'a> {
    pub fn new(k: &'a FieldCtx) -> Self {
        Echelon { k, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds a row; returns whether it increased the rank.
    pub fn insert(&mut self, mut v: Vec<Fe>) -> bool {
        let k = self.k;
        for (piv, row) in &self.rows {
            let c = v[*piv];
            if c.is_zero() {
                continue;
            }
            for (x, &y) in v.iter_mut().zip(row) {
                *x = k.sub(*x, k.mul(c, y));
            }
        }
        let Some(piv) = v.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let s = k.inv(v[piv]).unwrap();
        v.iter_mut().for_each(|x| *x = k.mul(*x, s));
        for (_, row) in self.rows.iter_mut() {
            let c = row[piv];
            if c.is_zero() {
                continue;
            }
            for (x, &y) in row.iter_mut().zip(&v) {
                *x = k.sub(*x, k.mul(c, y));
            }
        }
        self.rows.push((piv, v));
        true
    }
}

/// Whether the plane curve `f = 0` is smooth over the algebraic closure.
///
/// Decided by linear algebra: the curve is smooth iff `(f, f_x, f_y, f_z)` has no
/// projective zero, iff that ideal contains every form of degree `3d − 4`.
pub fn is_smooth(k: &FieldCtx, f: &TernaryForm) -> Result<bool> {
    f.check(k)?;
    let d = f.degree;
    if d > 4 {
        return Err(Error::DegreeTooLarge(d));
    }
    if f.is_zero() {
        return Ok(false);
    }
    if d <= 1 {
        return Ok(true);
    }
    let target = 3 * d - 4;
    let dim = num_monomials(target);
    let mut ech = Echelon::new(k);
    let mut gens = vec![f.clone()];
    gens.extend(f.partials(k));
    for g in gens {
        if g.is_zero() {
            continue;
        }
        let shift = target - g.degree;
        for m in monomials(shift) {
            let mut row = vec![Fe::ZERO; dim];
            for (e, &c) in monomials(g.degree).iter().zip(&g.coeffs) {
                if !c.is_zero() {
                    row[monomial_index(target, e[0] + m[0], e[1] + m[1])] = c;
                }
            }
            ech.insert(row);
            if ech.rank() == dim {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Singular-point search over `F_{q^r}` for every `r ≤ r_max`.
pub fn is_smooth_exhaustive(base: &Field, f: &TernaryForm, r_max: u32) -> Result<bool> {
    for r in 1..=r_max {
        let ext = base.extension(r)?;
        let g = f.lift(base, &ext)?;
        let parts = g.partials(&ext);
        for pt in enumerate_points(&ext)? {
            if g.eval_raw(&ext, pt.c).is_zero() && parts.iter().all(|h| h.eval_raw(&ext, pt.c).is_zero()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// For a smooth plane quartic: 3 if it has a rational point, else 4.
pub fn quartic_gonality_class(base: &Field, f: &TernaryForm) -> Result<u32> {
    if f.degree != 4 || !is_smooth(base, f)? {
        return Err(Error::NotSmooth);
    }
    Ok(if count_points(base, f, 1)? > 0 { 3 } else { 4 })
}
