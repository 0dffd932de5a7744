//! Real Weil polynomials: point counts, reconstruction from counts, exact
//! real-rootedness, vanishing constraints, the Weil-bound gate and a
//! constraint-pruned enumeration of candidate isogeny classes.
//!
//! Integer polynomials are `Vec<i128>` with the constant term first.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::arith::{closed_from_counts, prime_power};
use crate::error::{Error, Result};

pub type IntPoly = Vec<i128>;

pub fn trim(p: &mut IntPoly) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

pub fn degree(p: &[i128]) -> usize {
    p.len().saturating_sub(1)
}

pub fn poly_mul(a: &[i128], b: &[i128]) -> IntPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact quotient `a / b` over the integers, if `b` divides `a` with integral quotient.
pub fn poly_div_exact(a: &[i128], b: &[i128]) -> Option<IntPoly> {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut b = b.to_vec();
    trim(&mut b);
    if b.is_empty() {
        return None;
    }
    if r.is_empty() {
        return Some(Vec::new());
    }
    if r.len() < b.len() {
        return None;
    }
    let db = b.len() - 1;
    let lead = b[db];
    let mut q = vec![0i128; r.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db];
        if c % lead != 0 {
            return None;
        }
        let c = c / lead;
        q[i] = c;
        for j in 0..=db {
            r[i + j] -= c * b[j];
        }
    }
    r.iter().all(|&x| x == 0).then_some(q)
}

pub fn poly_eval(p: &[i128], x: i128) -> i128 {
    p.iter().rev().fold(0, |acc, &c| acc * x + c)
}

/// `T^2 - T - 5` style, highest degree first.
pub fn format_poly(p: &[i128]) -> String {
    let mut s = String::new();
    let n = p.len();
    for i in (0..n).rev() {
        let c = p[i];
        if c == 0 {
            continue;
        }
        let neg = c < 0;
        let a = c.unsigned_abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let var = match i {
            0 => String::new(),
            1 => "T".into(),
            _ => format!("T^{i}"),
        };
        if a != 1 || i == 0 {
            s.push_str(&a.to_string());
        }
        s.push_str(&var);
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

/// Parses expressions like `(T-2)(T^2 - T - 5)`, `T^3 - 3T^2 - 4T + 13` or
/// `(T + 1)*(T^4 - 2*T^3)^2`.
pub fn parse_poly(s: &str) -> Result<IntPoly> {
    let mut p = PolyParser { s: s.as_bytes(), pos: 0 };
    let mut out = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(Error::Parse(format!("trailing input in `{s}`")));
    }
    trim(&mut out);
    Ok(out)
}

struct PolyParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl PolyParser<'_> {
    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn err(&self) -> Error {
        Error::Parse(format!("bad polynomial `{}` at offset {}", String::from_utf8_lossy(self.s), self.pos))
    }

    fn add_into(acc: &mut IntPoly, t: &[i128], sign: i128) {
        if acc.len() < t.len() {
            acc.resize(t.len(), 0);
        }
        for (a, &b) in acc.iter_mut().zip(t) {
            *a += sign * b;
        }
    }

    fn expr(&mut self) -> Result<IntPoly> {
        let mut acc = Vec::new();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    1
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                _ if first => 1,
                _ => break,
            };
            first = false;
            let t = self.term()?;
            Self::add_into(&mut acc, &t, sign);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<IntPoly> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => self.pos += 1,
                Some(c) if c == b'(' || c == b'T' || c.is_ascii_digit() => {}
                _ => break,
            }
            let rhs = self.power()?;
            acc = poly_mul(&acc, &rhs);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<IntPoly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.ws();
            let e = self.number()?;
            let mut acc = vec![1];
            for _ in 0..e {
                acc = poly_mul(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<i128> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).unwrap().parse().map_err(|_| self.err())
    }

    fn atom(&mut self) -> Result<IntPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err());
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'T') => {
                self.pos += 1;
                Ok(vec![0, 1])
            }
            Some(c) if c.is_ascii_digit() => Ok(vec![self.number()?]),
            _ => Err(self.err()),
        }
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// A monic integer polynomial `h` of degree `g`, tied to a base field order `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RealWeilPoly {
    pub q: u64,
    pub coeffs: IntPoly,
}

impl RealWeilPoly {
    pub fn new(q: u64, coeffs: IntPoly) -> Result<RealWeilPoly> {
        let mut coeffs = coeffs;
        trim(&mut coeffs);
        if coeffs.last() != Some(&1) {
            return Err(Error::Parse("real Weil polynomial must be monic".into()));
        }
        Ok(RealWeilPoly { q, coeffs })
    }

    pub fn parse(q: u64, s: &str) -> Result<RealWeilPoly> {
        RealWeilPoly::new(q, parse_poly(s)?)
    }

    pub fn g(&self) -> u32 {
        degree(&self.coeffs) as u32
    }

    /// Coefficients below the leading one, highest degree first: `(c_1, …, c_g)`.
    pub fn key(&self) -> Vec<i128> {
        self.coeffs.iter().rev().skip(1).copied().collect()
    }

    /// The Weil polynomial `f(T) = T^g h(T + q/T)`, constant term first.
    pub fn weil_poly(&self) -> IntPoly {
        let g = self.g() as usize;
        let q = self.q as i128;
        let mut f = vec![0i128; 2 * g + 1];
        // T^{g-j} (T^2 + q)^j for each coefficient h_j of u^j
        let mut pw: IntPoly = vec![1];
        for j in 0..=g {
            let c = self.coeffs[j];
            for (i, &x) in pw.iter().enumerate() {
                f[g - j + i] += c * x;
            }
            pw = poly_mul(&pw, &[q, 0, 1]);
        }
        f
    }
}

impl fmt::Display for RealWeilPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(&self.coeffs))
    }
}

/// Power sums `s_1..s_{r_max}` of the roots of a monic polynomial (constant term first).
pub fn power_sums(f: &[i128], r_max: usize) -> Vec<i128> {
    let n = degree(f);
    // e[i] is the coefficient of T^{n-i}
    let e: Vec<i128> = (0..=n).map(|i| f[n - i]).collect();
    let mut s = vec![0i128; r_max + 1];
    for r in 1..=r_max {
        let mut acc = 0i128;
        for i in 1..=(r - 1).min(n) {
            acc += e[i] * s[r - i];
        }
        if r <= n {
            acc += r as i128 * e[r];
        }
        s[r] = -acc;
    }
    s.remove(0);
    s
}

/// Point counts `N_1..N_{r_max}` of a curve with real Weil polynomial `h`.
pub fn counts_from_real_weil(h: &RealWeilPoly, r_max: usize) -> Vec<i128> {
    let s = power_sums(&h.weil_poly(), r_max);
    let q = h.q as i128;
    (1..=r_max).map(|r| q.pow(r as u32) + 1 - s[r - 1]).collect()
}

/// Coefficients of `B_r(u)` where `T^r + (q/T)^r = B_r(T + q/T)`, for `r = 0..=n`.
pub fn dickson_table(q: i128, n: usize) -> Vec<IntPoly> {
    let mut b: Vec<IntPoly> = vec![vec![2], vec![0, 1]];
    for r in 2..=n {
        let mut next = vec![0i128; r + 1];
        for (i, &c) in b[r - 1].iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, &c) in b[r - 2].iter().enumerate() {
            next[i] -= q * c;
        }
        b.push(next);
    }
    b.truncate(n + 1);
    b
}

/// Rebuilds `h` from `N_1..N_g`.
pub fn real_weil_from_counts(n: &[i128], g: usize, q: u64) -> Result<RealWeilPoly> {
    if n.len() < g {
        return Err(Error::NonIntegralReconstruction);
    }
    let qi = q as i128;
    let s: Vec<i128> = (1..=g).map(|r| qi.pow(r as u32) + 1 - n[r - 1]).collect();
    // a[i] is the coefficient of T^{2g-i} in f
    let mut a = vec![0i128; 2 * g + 1];
    a[0] = 1;
    for r in 1..=g {
        let mut acc = s[r - 1];
        for i in 1..r {
            acc += a[i] * s[r - i - 1];
        }
        if acc % r as i128 != 0 {
            return Err(Error::NonIntegralReconstruction);
        }
        a[r] = -acc / r as i128;
    }
    for i in 0..g {
        a[2 * g - i] = qi.pow((g - i) as u32) * a[i];
    }
    let b = dickson_table(qi, g);
    let mut h = vec![0i128; g + 1];
    h[0] = a[g];
    for j in 1..=g {
        for (i, &c) in b[j].iter().enumerate() {
            h[i] += a[g - j] * c;
        }
    }
    RealWeilPoly::new(q, h)
}

type Big = Vec<BigInt>;

fn big(p: &[i128]) -> Big {
    p.iter().map(|&c| BigInt::from(c)).collect()
}

fn big_trim(p: &mut Big) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

/// Remainder of `a` by `b`, scaled by a positive constant so it is integral.
fn positive_prem(a: &Big, b: &Big) -> Big {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut scale_sign_negative = false;
    while r.len() > db && !r.is_empty() {
        let c = r.last().unwrap().clone();
        let off = r.len() - 1 - db;
        // r <- lead * r - c * T^off * b
        for x in r.iter_mut() {
            *x *= &lead;
        }
        for j in 0..=db {
            r[off + j] -= &c * &b[j];
        }
        if lead.is_negative() {
            scale_sign_negative = !scale_sign_negative;
        }
        r.pop();
        big_trim(&mut r);
    }
    if scale_sign_negative {
        for x in r.iter_mut() {
            *x = -x.clone();
        }
    }
    primitive(r)
}

fn primitive(mut p: Big) -> Big {
    let g = p.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if !g.is_zero() && !g.is_one() {
        for x in p.iter_mut() {
            *x /= &g;
        }
    }
    p
}

fn derivative(p: &Big) -> Big {
    p.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

/// Sign of `p(eps · 2√q)` computed exactly.
fn sign_at_endpoint(p: &Big, q: u64, eps: i32) -> i32 {
    let four_q = BigInt::from(4 * q);
    let (mut a, mut b) = (BigInt::zero(), BigInt::zero());
    // x^i = (eps·2)^i q^{i/2}: even i contribute (4q)^{i/2}, odd i contribute eps·2·(4q)^{(i-1)/2}·√q
    let mut pw = BigInt::one();
    for (i, c) in p.iter().enumerate() {
        if i % 2 == 0 {
            if i > 0 {
                pw *= &four_q;
            }
            a += c * &pw;
        } else {
            b += c * &pw * BigInt::from(2 * eps);
        }
    }
    let sa = a.sign();
    let sb = b.sign();
    use num_bigint::Sign::*;
    match (sa, sb) {
        (NoSign, NoSign) => 0,
        (Plus | NoSign, Plus | NoSign) => 1,
        (Minus | NoSign, Minus | NoSign) => -1,
        _ => {
            let lhs = &a * &a;
            let rhs = &b * &b * BigInt::from(q);
            let diff = if sa == Plus { lhs - rhs } else { rhs - lhs };
            match diff.sign() {
                Plus => 1,
                Minus => -1,
                NoSign => 0,
            }
        }
    }
}

fn sign_changes(signs: impl Iterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut n = 0;
    for s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// Whether every complex root of the integer polynomial `h` is real and lies in
/// `[-2√q, 2√q]`, decided with exact arithmetic.
pub fn is_real_rooted_in_interval(h: &[i128], q: u64) -> bool {
    let mut p = h.to_vec();
    trim(&mut p);
    if p.is_empty() {
        return false;
    }
    // clear roots at the endpoints
    let s = isqrt(q);
    if s * s == q {
        for root in [2 * s as i128, -2 * s as i128] {
            while degree(&p) > 0 {
                match poly_div_exact(&p, &[-root, 1]) {
                    Some(r) => p = r,
                    None => break,
                }
            }
        }
    } else {
        while degree(&p) >= 2 {
            match poly_div_exact(&p, &[-4 * q as i128, 0, 1]) {
                Some(r) => p = r,
                None => break,
            }
        }
    }
    if degree(&p) == 0 {
        return true;
    }
    let p0 = big(&p);
    let mut chain = vec![p0.clone(), primitive(derivative(&p0))];
    loop {
        let n = chain.len();
        let r = positive_prem(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            break;
        }
        let neg: Big = r.into_iter().map(|c| -c).collect();
        chain.push(neg);
    }
    let distinct = degree_big(&chain[0]) - degree_big(chain.last().unwrap());
    let count = |eps: i32| -> usize {
        if s * s == q {
            let x = BigInt::from(eps as i64 * 2 * s as i64);
            sign_changes(chain.iter().map(|c| {
                let v = c.iter().rev().fold(BigInt::zero(), |acc, k| acc * &x + k);
                v.sign_i32()
            }))
        } else {
            sign_changes(chain.iter().map(|c| sign_at_endpoint(c, q, eps)))
        }
    };
    let inside = count(-1) - count(1);
    inside == distinct
}

fn degree_big(p: &Big) -> usize {
    p.len().saturating_sub(1)
}

trait SignI32 {
    fn sign_i32(&self) -> i32;
}

impl SignI32 for BigInt {
    fn sign_i32(&self) -> i32 {
        match self.sign() {
            num_bigint::Sign::Plus => 1,
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
        }
    }
}

/// `Res(f, g) = lc(g)^{deg f} · Π_{g(β)=0} f(β)`, so that `res(T−a, T−b) = b − a`.
pub fn resultant(f: &[i128], g: &[i128]) -> BigInt {
    let mut a = big(g);
    let mut b = big(f);
    big_trim(&mut a);
    big_trim(&mut b);
    // the standard Res(A, B) = lc(A)^{deg B} Π_{A(α)=0} B(α) with A = g, B = f
    subresultant(a, b)
}

fn content(p: &Big) -> BigInt {
    p.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c))
}

fn pseudo_rem(a: &Big, b: &Big) -> Big {
    let db = degree_big(b);
    let lead = b[db].clone();
    let mut r = a.clone();
    let mut e = degree_big(a) as i64 - db as i64 + 1;
    while !r.is_empty() && r.len() > db {
        let c = r.last().unwrap().clone();
        let off = r.len() - 1 - db;
        for x in r.iter_mut() {
            *x *= &lead;
        }
        for j in 0..=db {
            r[off + j] -= &c * &b[j];
        }
        r.pop();
        big_trim(&mut r);
        e -= 1;
    }
    while e > 0 {
        for x in r.iter_mut() {
            *x *= &lead;
        }
        e -= 1;
    }
    r
}

fn subresultant(mut a: Big, mut b: Big) -> BigInt {
    if a.is_empty() || b.is_empty() {
        return BigInt::zero();
    }
    let ca = content(&a);
    let cb = content(&b);
    for x in a.iter_mut() {
        *x /= &ca;
    }
    for x in b.iter_mut() {
        *x /= &cb;
    }
    let (da, db) = (degree_big(&a), degree_big(&b));
    let t = num_traits::pow(ca, db) * num_traits::pow(cb, da);
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    let mut s = BigInt::one();
    if da < db {
        std::mem::swap(&mut a, &mut b);
        if da % 2 == 1 && db % 2 == 1 {
            s = -s;
        }
    }
    loop {
        let (da, db) = (degree_big(&a), degree_big(&b));
        if db == 0 {
            let hh = if da == 0 {
                BigInt::one()
            } else {
                num_traits::pow(b[0].clone(), da) / num_traits::pow(h.clone(), da - 1)
            };
            return s * t * hh;
        }
        let delta = da - db;
        if da % 2 == 1 && db % 2 == 1 {
            s = -s;
        }
        let r = pseudo_rem(&a, &b);
        if r.is_empty() {
            return BigInt::zero();
        }
        let div = &g * num_traits::pow(h.clone(), delta);
        a = b;
        b = r.into_iter().map(|c| c / &div).collect();
        g = a.last().unwrap().clone();
        h = if delta == 0 {
            h
        } else {
            num_traits::pow(g.clone(), delta) / num_traits::pow(h.clone(), delta - 1)
        };
    }
}

/// Degree sets `S` whose closed points would yield an effective divisor of
/// degree `g − 2` if all `a_d` for `d ∈ S` were positive, keeping only minimal sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSet {
    pub g: u32,
    pub forbidden: Vec<Vec<u32>>,
}

impl ConstraintSet {
    pub fn none(g: u32) -> ConstraintSet {
        ConstraintSet { g, forbidden: Vec::new() }
    }

    /// Whether a (possibly partial) `a`-sequence violates a constraint; only
    /// degrees `≤ a.len()` are examined.
    pub fn violated_by(&self, a: &[i128]) -> bool {
        self.forbidden
            .iter()
            .any(|s| s.iter().all(|&d| (d as usize) <= a.len() && a[d as usize - 1] != 0))
    }

    /// E.g. `a_1 = a_5 = a_2 a_3 = 0`.
    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self
            .forbidden
            .iter()
            .map(|s| s.iter().map(|d| format!("a_{d}")).collect::<Vec<_>>().join(" "))
            .collect();
        parts.push("0".into());
        parts.join(" = ")
    }
}

fn representable(n: u32, set: &[u32]) -> bool {
    // n = Σ k_d d with every k_d ≥ 1
    let base: u32 = set.iter().sum();
    if base > n {
        return false;
    }
    let rest = (n - base) as usize;
    let mut ok = vec![false; rest + 1];
    ok[0] = true;
    for i in 1..=rest {
        ok[i] = set.iter().any(|&d| d as usize <= i && ok[i - d as usize]);
    }
    ok[rest]
}

pub fn vanishing_constraints(g: u32) -> ConstraintSet {
    let n = g.saturating_sub(2);
    let mut found: Vec<Vec<u32>> = Vec::new();
    for size in 1..=n as usize {
        let mut combo: Vec<u32> = (1..=size as u32).collect();
        loop {
            let minimal = !found.iter().any(|s| s.iter().all(|d| combo.contains(d)));
            if minimal && representable(n, &combo) {
                found.push(combo.clone());
            }
            // next combination of `size` elements from 1..=n
            let mut i = size;
            while i > 0 && combo[i - 1] == n - (size - i) as u32 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    found.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    ConstraintSet { g, forbidden: found }
}

/// Genera `3..=10` with the prime powers `q` satisfying `q^{g-2} < (2g)²`.
pub fn weil_bound_pairs() -> Vec<(u32, Vec<u32>)> {
    (3..=10u32)
        .map(|g| {
            let bound = (4 * g * g) as u64;
            let qs = (2..bound as u32)
                .filter(|&q| prime_power(q as u64).is_some())
                .filter(|&q| (q as u64).checked_pow(g - 2).is_some_and(|v| v < bound))
                .collect();
            (g, qs)
        })
        .filter(|(_, qs): &(u32, Vec<u32>)| !qs.is_empty())
        .collect()
}

/// One line of the gate table, e.g. `g=3: q ≤ 32` or `g=6: q = 2 or 3`.
pub fn render_gate_row(g: u32, qs: &[u32]) -> String {
    match qs {
        [q] => format!("g={g}: q = {q}"),
        [a, b] => format!("g={g}: q = {a} or {b}"),
        _ => format!("g={g}: q ≤ {}", qs.last().unwrap()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsogenyClassRecord {
    pub h: RealWeilPoly,
    pub f: IntPoly,
    pub n: Vec<i128>,
    pub a: Vec<i128>,
}

impl IsogenyClassRecord {
    /// Derives counts up to degree `2g`; `None` if some `a_d` is negative.
    pub fn from_h(h: RealWeilPoly) -> Option<IsogenyClassRecord> {
        let g = h.g() as usize;
        let n = counts_from_real_weil(&h, 2 * g);
        let a = closed_from_counts(&n)?;
        let f = h.weil_poly();
        Some(IsogenyClassRecord { h, f, n, a })
    }
}

struct SieveCtx<'a> {
    g: usize,
    q: u64,
    a: f64,
    binom: Vec<Vec<f64>>,
    dickson: Vec<IntPoly>,
    // None disables the count-based pruning entirely
    constraints: Option<&'a ConstraintSet>,
}

fn eval_f(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn bisect(p: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = eval_f(p, lo);
    if flo == 0.0 {
        return lo;
    }
    if eval_f(p, hi) == 0.0 {
        return hi;
    }
    let tol = (2.0f64).powi(-40);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = eval_f(p, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl<'a> SieveCtx<'a> {
    fn new(g: usize, q: u64, constraints: Option<&'a ConstraintSet>) -> SieveCtx<'a> {
        SieveCtx {
            g,
            q,
            a: 2.0 * (q as f64).sqrt(),
            binom: (0..=g).map(|n| (0..=g).map(|k| binom_i(n, k) as f64).collect()).collect(),
            dickson: dickson_table(q as i128, g),
            constraints,
        }
    }

    /// `D_k = Σ_{i<k} c_i C(g-i, k-i) T^{k-i}`, a rescaled `(g-k)`-th derivative of `h`
    /// with the unknown constant term `c_k` left at zero.
    fn level_poly(&self, c: &[i128], k: usize) -> Vec<f64> {
        let mut p = vec![0.0; k + 1];
        for i in 0..k {
            p[k - i] = c[i] as f64 * self.binom[self.g - i][k - i];
        }
        p
    }

    fn level_poly_exact(&self, c: &[i128], k: usize) -> IntPoly {
        let mut p = vec![0i128; k + 1];
        for i in 0..=k {
            p[k - i] = c[i] * binom_i(self.g - i, k - i);
        }
        p
    }

    /// `a_1..a_k` from the prefix `c_0..c_k`; these do not depend on later coefficients.
    fn partial_a(&self, c: &[i128], k: usize) -> Option<Vec<i128>> {
        let mut p = vec![0i128; k + 1];
        p[0] = self.g as i128;
        for r in 1..=k {
            let mut acc = r as i128 * c[r];
            for i in 1..r {
                acc += c[i] * p[r - i];
            }
            p[r] = -acc;
        }
        let qi = self.q as i128;
        let n: Vec<i128> = (1..=k)
            .map(|r| {
                let s: i128 = self.dickson[r].iter().enumerate().map(|(i, &b)| b * p[i]).sum();
                qi.pow(r as u32) + 1 - s
            })
            .collect();
        closed_from_counts(&n)
    }

    fn pruned(&self, c: &[i128], k: usize) -> bool {
        let Some(cons) = self.constraints else {
            return false;
        };
        match self.partial_a(c, k) {
            Some(a) => a.iter().any(|&v| v < 0) || cons.violated_by(&a),
            None => true,
        }
    }

    fn recurse(&self, c: &mut Vec<i128>, roots: &[f64], out: &mut Vec<IntPoly>) {
        let k = c.len();
        if k > self.g {
            let h: IntPoly = c.iter().rev().copied().collect();
            if is_real_rooted_in_interval(&h, self.q) {
                out.push(h);
            }
            return;
        }
        let p0 = self.level_poly(c, k);
        let a = self.a;
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        // interlacing: D_k alternates sign at ±a and at the roots of D_{k-1}
        let mut bound = |x: f64, nonneg: bool| {
            let v = -eval_f(&p0, x);
            if nonneg {
                lo = lo.max(v);
            } else {
                hi = hi.min(v);
            }
        };
        bound(a, true);
        bound(-a, k % 2 == 0);
        for (j, &r) in roots.iter().enumerate() {
            bound(r, (k - (j + 1)) % 2 == 0);
        }
        let tol = 1e-6 * (1.0 + lo.abs().max(hi.abs()));
        if lo > hi + tol {
            return;
        }
        let cmin = (lo - tol).ceil() as i128;
        let cmax = (hi + tol).floor() as i128;
        for ck in cmin..=cmax {
            let x = ck as f64;
            c.push(ck);
            let safe = x >= lo + tol && x <= hi - tol;
            let ok = (safe || is_real_rooted_in_interval(&self.level_poly_exact(c, k), self.q)) && !self.pruned(c, k);
            if ok {
                let mut p = p0.clone();
                p[0] = x;
                let mut brackets = Vec::with_capacity(k + 1);
                brackets.push(-a);
                brackets.extend_from_slice(roots);
                brackets.push(a);
                let next: Vec<f64> = brackets.windows(2).map(|w| bisect(&p, w[0], w[1])).collect();
                self.recurse(c, &next, out);
            }
            c.pop();
        }
    }

    fn run(&self) -> Vec<IntPoly> {
        let g = self.g;
        if g == 0 {
            return Vec::new();
        }
        // D_1 = g·T + c_1 must have its root in [-a, a]
        let bound = (g as f64 * self.a).floor() as i128 + 1;
        let mut out: Vec<IntPoly> = (-bound..=bound)
            .into_par_iter()
            .flat_map_iter(|c1| {
                let mut found = Vec::new();
                let mut c = vec![1i128, c1];
                if is_real_rooted_in_interval(&[c1, g as i128], self.q) && !self.pruned(&c, 1) {
                    self.recurse(&mut c, &[-(c1 as f64) / g as f64], &mut found);
                }
                found
            })
            .collect();
        out.sort_by(|x, y| x.iter().rev().cmp(y.iter().rev()));
        out
    }
}

fn binom_i(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let mut c: i128 = 1;
    for i in 0..k {
        c = c * (n - i) as i128 / (i + 1) as i128;
    }
    c
}

/// All monic integer `h` of degree `g` with roots in `[-2√q, 2√q]`, nonnegative
/// `a_d` for `d ≤ 2g`, and satisfying `constraints`. Sorted by `(c_1, …, c_g)`.
pub fn sieve(g: u32, q: u64, constraints: &ConstraintSet) -> Vec<IsogenyClassRecord> {
    SieveCtx::new(g as usize, q, Some(constraints))
        .run()
        .into_iter()
        .filter_map(|h| IsogenyClassRecord::from_h(RealWeilPoly::new(q, h).unwrap()))
        .filter(|r| !constraints.violated_by(&r.a))
        .collect()
}

/// Monic integer polynomials of degree `g` with all roots in `[-2√q, 2√q]`, no count conditions.
pub fn real_rooted_polys(g: u32, q: u64) -> Vec<IntPoly> {
    SieveCtx::new(g as usize, q, None).run()
}

/// Brute-force enumeration over the coefficient box `|c_k| ≤ C(g,k)(2√q)^k`.
pub fn real_rooted_box(g: usize, q: u64) -> Vec<IntPoly> {
    let a = 2.0 * (q as f64).sqrt();
    let bounds: Vec<i128> = (1..=g).map(|k| (binom_i(g, k) as f64 * a.powi(k as i32)).floor() as i128).collect();
    let mut out = Vec::new();
    let mut c = vec![0i128; g];
    fn rec(i: usize, c: &mut Vec<i128>, bounds: &[i128], q: u64, out: &mut Vec<IntPoly>) {
        if i == c.len() {
            let mut h: IntPoly = c.iter().rev().copied().collect();
            h.push(1);
            if is_real_rooted_in_interval(&h, q) {
                out.push(h);
            }
            return;
        }
        for v in -bounds[i]..=bounds[i] {
            c[i] = v;
            rec(i + 1, c, bounds, q, out);
        }
    }
    rec(0, &mut c, &bounds, q, &mut out);
    out
}

fn factor_candidates(q: u64, h: &[i128]) -> Vec<IntPoly> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Vec<IntPoly>>>> = OnceLock::new();
    let a = 2.0 * (q as f64).sqrt();
    let c0 = h.iter().find(|&&c| c != 0).copied().unwrap_or(0).unsigned_abs();
    let mut out: Vec<IntPoly> = Vec::new();
    if h.first() == Some(&0) {
        out.push(vec![0, 1]);
    }
    // linear factors T - r with r dividing the lowest nonzero coefficient
    let mut roots: Vec<i128> = Vec::new();
    for d in 1..=c0.min(a as u128 + 1) {
        if c0 % d == 0 {
            for r in [d as i128, -(d as i128)] {
                if (r as f64).abs() <= a + 1e-9 {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort_by(|x, y| y.cmp(x));
    out.extend(roots.into_iter().map(|r| vec![-r, 1]));
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    // a factor of degree above deg(h)/2 is left over as the cofactor
    for d in 2..=(degree(h) as u32 / 2).min(4) {
        out.extend(cache.entry((q, d)).or_insert_with(|| real_rooted_polys(d, q)).iter().cloned());
    }
    out
}

/// Factors `h` over the integers into monic pieces of degree ≤ 4 plus a cofactor,
/// written like `(T - 2)(T + 1)(T^2 - 8)` or `T(T^2 - 2)^2`.
pub fn factor_string(h: &RealWeilPoly) -> String {
    let cands = factor_candidates(h.q, &h.coeffs);
    let mut rest = h.coeffs.clone();
    let mut factors: Vec<(IntPoly, u32)> = Vec::new();
    for cand in &cands {
        let mut mult = 0;
        while degree(&rest) >= degree(cand) {
            match poly_div_exact(&rest, cand) {
                Some(r) => {
                    rest = r;
                    mult += 1;
                }
                None => break,
            }
        }
        if mult > 0 {
            factors.push((cand.clone(), mult));
        }
    }
    if degree(&rest) > 0 {
        factors.push((rest, 1));
    }
    if factors.len() == 1 && factors[0].1 == 1 {
        return format_poly(&factors[0].0);
    }
    let mut s = String::new();
    for (f, m) in &factors {
        if *f == vec![0, 1] && *m == 1 {
            s.push('T');
        } else {
            s.push_str(&format!("({})", format_poly(f)));
        }
        if *m > 1 {
            s.push_str(&format!("^{m}"));
        }
    }
    s
}

/// `a_1..a_d` for the curve class of `h`.
pub fn closed_counts_of(h: &RealWeilPoly, d: usize) -> Option<Vec<i128>> {
    closed_from_counts(&counts_from_real_weil(h, d))
}

/// One sieve line: factored `h`, raw coefficients `c_1..c_g`, `N_1..N_{2g}`, `a_1..a_{2g}`,
/// tab-separated with comma-separated vectors.
pub fn format_record(r: &IsogenyClassRecord) -> String {
    let join = |v: &[i128]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    format!("{}\t{}\t{}\t{}", factor_string(&r.h), join(&r.h.key()), join(&r.n), join(&r.a))
}

pub fn parse_record(line: &str, q: u64) -> Result<IsogenyClassRecord> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 4 {
        return Err(Error::Parse(format!("sieve line needs 4 columns: `{line}`")));
    }
    let nums = |s: &str| -> Result<Vec<i128>> {
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split(',').map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("bad integer `{x}`")))).collect()
    };
    let h = RealWeilPoly::parse(q, cols[0])?;
    let key = nums(cols[1])?;
    if key != h.key() {
        return Err(Error::Parse("factored and raw coefficients disagree".into()));
    }
    let rec = IsogenyClassRecord::from_h(h).ok_or(Error::NonIntegralReconstruction)?;
    if rec.n != nums(cols[2])? || rec.a != nums(cols[3])? {
        return Err(Error::Parse("counts disagree with the polynomial".into()));
    }
    Ok(rec)
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn counts_round_trip(
            g in 1usize..8,
            q in proptest::sample::select(vec![2u64, 3, 4, 5, 7, 8, 9, 16, 29, 32]),
            tail in proptest::collection::vec(-40i128..40, 8),
        ) {
            let mut c: IntPoly = tail[..g].to_vec();
            c.push(1);
            let h = RealWeilPoly::new(q, c).unwrap();
            let n = counts_from_real_weil(&h, g);
            prop_assert_eq!(real_weil_from_counts(&n, g, q).unwrap(), h);
        }

        #[test]
        fn sieve_output_is_sound(g in 1u32..5, q in proptest::sample::select(vec![2u64, 3, 4, 5])) {
            let cons = vanishing_constraints(g);
            for r in sieve(g, q, &cons) {
                prop_assert!(is_real_rooted_in_interval(&r.h.coeffs, q));
                prop_assert!(r.a.iter().all(|&v| v >= 0));
                prop_assert!(!cons.violated_by(&r.a));
                prop_assert_eq!(r.n.len(), 2 * g as usize);
            }
        }

        #[test]
        fn newton_matches_direct_power_sums(roots in proptest::collection::vec(-6i128..6, 1..7)) {
            let mut f = vec![1i128];
            for &r in &roots {
                f = poly_mul(&f, &[-r, 1]);
            }
            let s = power_sums(&f, 8);
            for (i, &v) in s.iter().enumerate() {
                let direct: i128 = roots.iter().map(|r| r.pow(i as u32 + 1)).sum();
                prop_assert_eq!(v, direct);
            }
        }
    }
}
