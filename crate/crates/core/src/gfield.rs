//! Finite fields `F_{p^k}` of small order, with log/exp tables.
//!
//! Elements are stored as their integer encoding `Σ dᵢ pⁱ`, where `dᵢ` are the
//! coordinates in the polynomial basis `1, t, …, t^{k-1}`. The same encoding
//! gives the total order on elements used by every normal form downstream.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use crate::arith::{is_prime, prime_factors};
use crate::error::{Error, Result};

/// Largest field order for which tables are built.
pub const MAX_ORDER: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldId(u64);

/// An element tagged with the context it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    pub field: FieldId,
    pub value: Fe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Inv,
    Pow(u64),
}

pub type Field = Arc<FieldCtx>;

/// The image of a subfield inside a larger field.
pub struct Embedding {
    pub base: Field,
    image: Vec<Fe>,
    preimage: Vec<u32>,
}

impl Embedding {
    #[inline]
    pub fn map(&self, a: Fe) -> Fe {
        self.image[a.0 as usize]
    }

    /// Pulls an element back into the base field, if it lies in the image.
    #[inline]
    pub fn pull(&self, a: Fe) -> Option<Fe> {
        let v = self.preimage[a.0 as usize];
        (v != u32::MAX).then_some(Fe(v))
    }
}

pub struct FieldCtx {
    id: FieldId,
    p: u32,
    k: u32,
    order: u32,
    modulus: Vec<u32>,
    symbol: char,
    generator: Fe,
    exp: Vec<u32>,
    log: Vec<u32>,
    // one_plus[n] = 1 + g^n, for odd characteristic extension fields
    one_plus: Vec<u32>,
    minus_one: Fe,
    base: Option<Embedding>,
    extensions: Mutex<HashMap<u32, Field>>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod {:?}", self.p, self.k, self.modulus)
    }
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn default_symbol(p: u32, k: u32) -> char {
    if (p, k) == (2, 4) {
        's'
    } else {
        't'
    }
}

impl FieldCtx {
    /// Builds `F_{p^k}`. Without a modulus, prime fields use `t` and extensions use
    /// the Conway polynomial (which is `t³+t+1` for `F_8` and `t⁴+t+1` for `F_16`).
    /// Moduli are digit lists, constant term first, including the leading 1.
    pub fn new(p: u32, k: u32, modulus: Option<Vec<u32>>) -> Result<Field> {
        Self::build(p, k, modulus, None)
    }

    /// The shared instance of `F_q` with the default modulus; repeated calls return
    /// the same context, so values from different call sites are compatible.
    pub fn of_order(q: u32) -> Result<Field> {
        static SHARED: OnceLock<Mutex<HashMap<u32, Field>>> = OnceLock::new();
        let (p, k) = crate::arith::prime_power(q as u64).ok_or(Error::UnsupportedField(q))?;
        let mut cache = SHARED.get_or_init(Default::default).lock().unwrap();
        if let Some(f) = cache.get(&q) {
            return Ok(Arc::clone(f));
        }
        let f = Self::new(p, k, None)?;
        cache.insert(q, Arc::clone(&f));
        Ok(f)
    }

    fn build(p: u32, k: u32, modulus: Option<Vec<u32>>, base: Option<&Field>) -> Result<Field> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime { p });
        }
        if k == 0 || (p as u64).checked_pow(k).map_or(true, |n| n > MAX_ORDER) {
            return Err(Error::FieldTooLarge { p, k });
        }
        let order = p.pow(k);
        let modulus = match modulus {
            Some(m) => {
                if m.len() != k as usize + 1 || m[k as usize] != 1 || m.iter().any(|&d| d >= p) {
                    return Err(Error::Parse(format!("modulus must be monic of degree {k}")));
                }
                if !is_irreducible(&m, p) {
                    return Err(Error::NotIrreducible { p });
                }
                m
            }
            None if k == 1 => vec![0, 1],
            None => conway(p, k),
        };

        let pm = PolyMod { p, m: &modulus };
        let generator = if k == 1 {
            (1..p).find(|&g| pm.is_primitive_scalar(g)).unwrap()
        } else {
            (1..order).find(|&g| pm.is_primitive(&pm.decode(g))).unwrap()
        };
        let n = (order - 1) as usize;
        let mut exp = vec![0u32; 2 * n];
        let mut log = vec![0u32; order as usize];
        let gpoly = pm.decode(generator);
        let mut cur = pm.decode(1);
        for i in 0..n {
            let v = pm.encode(&cur);
            exp[i] = v;
            exp[i + n] = v;
            log[v as usize] = i as u32;
            cur = pm.mul(&cur, &gpoly);
        }
        let one_plus = if p != 2 && k > 1 {
            (0..n)
                .map(|i| {
                    let mut d = pm.decode(exp[i]);
                    d[0] = (d[0] + 1) % p;
                    pm.encode(&d)
                })
                .collect()
        } else {
            Vec::new()
        };
        let minus_one = Fe(if p == 2 { 1 } else { p - 1 });

        let mut ctx = FieldCtx {
            id: FieldId(NEXT_ID.fetch_add(1, Ordering::Relaxed)),
            p,
            k,
            order,
            modulus,
            symbol: default_symbol(p, k),
            generator: Fe(generator),
            exp,
            log,
            one_plus,
            minus_one,
            base: None,
            extensions: Mutex::new(HashMap::new()),
        };
        if let Some(b) = base {
            ctx.base = Some(ctx.embedding_of(b)?);
        }
        Ok(Arc::new(ctx))
    }

    fn embedding_of(&self, base: &Field) -> Result<Embedding> {
        if base.p != self.p || self.k % base.k != 0 {
            return Err(Error::NotASubfield { base: base.order, field: self.order });
        }
        // the image of the base generator symbol is a root of the base modulus
        let root = if base.k == 1 {
            Fe::ZERO
        } else {
            (0..self.order)
                .map(Fe)
                .find(|&e| {
                    let mut acc = Fe::ZERO;
                    for &c in base.modulus.iter().rev() {
                        acc = self.add(self.mul(acc, e), Fe(c));
                    }
                    acc.is_zero()
                })
                .ok_or(Error::InternalInconsistency("no root of subfield modulus".into()))?
        };
        let mut image = Vec::with_capacity(base.order as usize);
        for a in 0..base.order {
            let mut acc = Fe::ZERO;
            for &d in base.digits(Fe(a)).iter().rev() {
                acc = self.add(self.mul(acc, root), Fe(d));
            }
            image.push(acc);
        }
        let mut preimage = vec![u32::MAX; self.order as usize];
        for (a, &e) in image.iter().enumerate() {
            if preimage[e.0 as usize] != u32::MAX {
                return Err(Error::InternalInconsistency("embedding not injective".into()));
            }
            preimage[e.0 as usize] = a as u32;
        }
        Ok(Embedding { base: Arc::clone(base), image, preimage })
    }

    /// The degree-`r` extension of this field, with an embedding of `self`.
    /// Results are cached per base field.
    pub fn extension(self: &Field, r: u32) -> Result<Field> {
        if r == 1 {
            return Ok(Arc::clone(self));
        }
        if let Some(f) = self.extensions.lock().unwrap().get(&r) {
            return Ok(Arc::clone(f));
        }
        let f = Self::build(self.p, self.k * r, None, Some(self))?;
        self.extensions.lock().unwrap().insert(r, Arc::clone(&f));
        Ok(f)
    }

    #[inline]
    pub fn id(&self) -> FieldId {
        self.id
    }
    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }
    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }
    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn symbol(&self) -> char {
        self.symbol
    }
    pub fn generator(&self) -> Fe {
        self.generator
    }
    pub fn base(&self) -> Option<&Embedding> {
        self.base.as_ref()
    }

    /// Maps an element of `base` into this field, where `base` is either this field
    /// itself or the field this one was built as an extension of.
    #[inline]
    pub fn lift(&self, base: &FieldCtx, a: Fe) -> Result<Fe> {
        if base.id == self.id {
            return Ok(a);
        }
        match &self.base {
            Some(e) if e.base.id == base.id => Ok(e.map(a)),
            _ => Err(Error::ContextMismatch),
        }
    }

    /// The element `t` (the class of the polynomial variable).
    pub fn t(&self) -> Fe {
        if self.k == 1 {
            Fe::ZERO
        } else {
            Fe(self.p)
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.order).map(Fe)
    }

    pub fn digits(&self, a: Fe) -> Vec<u32> {
        let mut v = a.0;
        (0..self.k)
            .map(|_| {
                let d = v % self.p;
                v /= self.p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, d: &[u32]) -> Fe {
        Fe(d.iter().rev().fold(0, |acc, &x| acc * self.p + x % self.p))
    }

    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.p as i64) as u32)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.p == 2 {
            return Fe(a.0 ^ b.0);
        }
        if self.k == 1 {
            let s = a.0 + b.0;
            return Fe(if s >= self.p { s - self.p } else { s });
        }
        if a.0 == 0 {
            return b;
        }
        if b.0 == 0 {
            return a;
        }
        let n = self.order - 1;
        let la = self.log[a.0 as usize];
        let lb = self.log[b.0 as usize];
        let s = self.one_plus[((lb + n - la) % n) as usize];
        if s == 0 {
            Fe::ZERO
        } else {
            Fe(self.exp[(la + self.log[s as usize]) as usize])
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if self.p == 2 || a.0 == 0 {
            a
        } else if self.k == 1 {
            Fe(self.p - a.0)
        } else {
            self.mul(a, self.minus_one)
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        Fe(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        let n = self.order - 1;
        Ok(Fe(self.exp[((n - self.log[a.0 as usize]) % n) as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.0 == 0 {
            return Fe::ZERO;
        }
        let n = (self.order - 1) as u64;
        let l = self.log[a.0 as usize] as u64 * (e % n) % n;
        Fe(self.exp[l as usize])
    }

    /// Discrete log with respect to the stored generator.
    #[inline]
    pub fn log(&self, a: Fe) -> Option<u32> {
        (a.0 != 0).then(|| self.log[a.0 as usize])
    }

    #[inline]
    pub fn exp(&self, e: u32) -> Fe {
        Fe(self.exp[(e % (self.order - 1)) as usize])
    }

    pub fn elem(&self, v: Fe) -> FieldElem {
        FieldElem { field: self.id, value: v }
    }

    /// Checked arithmetic on tagged elements.
    pub fn arith(&self, op: ArithOp, args: &[FieldElem]) -> Result<FieldElem> {
        if args.iter().any(|a| a.field != self.id) {
            return Err(Error::ContextMismatch);
        }
        let arg = |i: usize| {
            args.get(i)
                .map(|a| a.value)
                .ok_or_else(|| Error::Parse(format!("{op:?} needs more operands")))
        };
        let v = match op {
            ArithOp::Add => self.add(arg(0)?, arg(1)?),
            ArithOp::Sub => self.sub(arg(0)?, arg(1)?),
            ArithOp::Mul => self.mul(arg(0)?, arg(1)?),
            ArithOp::Inv => self.inv(arg(0)?)?,
            ArithOp::Pow(e) => self.pow(arg(0)?, e),
        };
        Ok(self.elem(v))
    }

    fn check_subfield(&self, base: &FieldCtx) -> Result<()> {
        if base.p != self.p || self.k % base.k != 0 {
            return Err(Error::NotASubfield { base: base.order, field: self.order });
        }
        Ok(())
    }

    /// `a^Q` where `Q` is the order of `base`.
    pub fn frobenius(&self, a: Fe, base: &FieldCtx) -> Result<Fe> {
        self.check_subfield(base)?;
        Ok(self.pow(a, base.order as u64))
    }

    /// Smallest `d ≥ 1` with `a^{Q^d} = a`.
    pub fn degree_over(&self, a: Fe, base: &FieldCtx) -> Result<u32> {
        self.check_subfield(base)?;
        let mut d = 1;
        let mut b = self.pow(a, base.order as u64);
        while b != a {
            b = self.pow(b, base.order as u64);
            d += 1;
        }
        Ok(d)
    }

    pub fn format_elem(&self, a: Fe) -> String {
        if self.k == 1 {
            return a.0.to_string();
        }
        let d = self.digits(a);
        let mut terms = Vec::new();
        for (i, &c) in d.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let var = match i {
                0 => String::new(),
                1 => self.symbol.to_string(),
                _ => format!("{}^{}", self.symbol, i),
            };
            terms.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => var,
                _ => format!("{c}*{var}"),
            });
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }

    /// Parses an element literal such as `3`, `t`, `t^2+t+1` or `2*t+1`.
    /// Any lowercase letter other than `x`, `y`, `z` is accepted as the generator symbol.
    pub fn parse_elem(&self, s: &str) -> Result<Fe> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let s = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(&s);
        if s.is_empty() {
            return Err(Error::Parse("empty element literal".into()));
        }
        let mut acc = Fe::ZERO;
        let mut rest = s;
        while !rest.is_empty() {
            let (neg, body) = match rest.as_bytes()[0] {
                b'+' => (false, &rest[1..]),
                b'-' => (true, &rest[1..]),
                _ => (false, rest),
            };
            let end = body.find(['+', '-']).unwrap_or(body.len());
            let term = self.parse_term(&body[..end])?;
            acc = if neg { self.sub(acc, term) } else { self.add(acc, term) };
            rest = &body[end..];
        }
        Ok(acc)
    }

    fn parse_term(&self, term: &str) -> Result<Fe> {
        let bad = || Error::Parse(format!("bad element term `{term}`"));
        let mut val = Fe::ONE;
        for factor in term.split('*') {
            if factor.is_empty() {
                return Err(bad());
            }
            let split = factor.find(|c: char| !c.is_ascii_digit()).unwrap_or(factor.len());
            let (num, sym) = factor.split_at(split);
            if !num.is_empty() {
                let n: u64 = num.parse().map_err(|_| bad())?;
                val = self.mul(val, Fe((n % self.p as u64) as u32));
            }
            if sym.is_empty() {
                continue;
            }
            let mut chars = sym.chars();
            let c = chars.next().unwrap();
            if !c.is_ascii_lowercase() || "xyz".contains(c) || self.k == 1 {
                return Err(bad());
            }
            let e = match chars.as_str() {
                "" => 1,
                r => r.strip_prefix('^').and_then(|e| e.parse::<u64>().ok()).ok_or_else(bad)?,
            };
            val = self.mul(val, self.pow(self.t(), e));
        }
        Ok(val)
    }
}

/// Arithmetic in `F_p[t]/(m)` on digit vectors, used only while building tables.
struct PolyMod<'a> {
    p: u32,
    m: &'a [u32],
}

impl PolyMod<'_> {
    fn k(&self) -> usize {
        self.m.len() - 1
    }

    fn decode(&self, mut v: u32) -> Vec<u32> {
        (0..self.k())
            .map(|_| {
                let d = v % self.p;
                v /= self.p;
                d
            })
            .collect()
    }

    fn encode(&self, d: &[u32]) -> u32 {
        d.iter().rev().fold(0, |acc, &x| acc * self.p + x)
    }

    fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        let mut prod = vec![0u64; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        let k = self.k();
        for i in (k..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for j in 0..=k {
                let idx = i - k + j;
                prod[idx] = (prod[idx] + (p - c) * self.m[j] as u64) % p;
            }
        }
        prod.truncate(k);
        prod.into_iter().map(|x| x as u32).collect()
    }

    fn pow(&self, a: &[u32], mut e: u64) -> Vec<u32> {
        let mut result = self.decode(1);
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        result
    }

    fn is_one(&self, a: &[u32]) -> bool {
        a[0] == 1 && a[1..].iter().all(|&d| d == 0)
    }

    fn is_primitive(&self, a: &[u32]) -> bool {
        let n = (self.p as u64).pow(self.k() as u32) - 1;
        if a.iter().all(|&d| d == 0) {
            return false;
        }
        self.is_one(&self.pow(a, n)) && prime_factors(n).into_iter().all(|l| !self.is_one(&self.pow(a, n / l)))
    }

    fn is_primitive_scalar(&self, g: u32) -> bool {
        let p = self.p as u64;
        let n = p - 1;
        let powm = |mut b: u64, mut e: u64| {
            let mut r = 1u64;
            b %= p;
            while e > 0 {
                if e & 1 == 1 {
                    r = r * b % p;
                }
                b = b * b % p;
                e >>= 1;
            }
            r
        };
        prime_factors(n).into_iter().all(|l| powm(g as u64, n / l) != 1) && (p == 2 || g != 0)
    }
}

/// Remainder of `a` modulo monic `b` over `F_p`, digit vectors constant term first.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&x| x as u64).collect();
    let db = b.len() - 1;
    let p64 = p as u64;
    while r.len() > db {
        let c = r.pop().unwrap();
        if c == 0 {
            continue;
        }
        let off = r.len() - db;
        for j in 0..db {
            r[off + j] = (r[off + j] + (p64 - c) * b[j] as u64) % p64;
        }
    }
    r.into_iter().map(|x| x as u32).collect()
}

/// Irreducibility over `F_p` by trial division against every monic polynomial of
/// degree at most half the degree of `m`.
pub fn is_irreducible(m: &[u32], p: u32) -> bool {
    let n = m.len() - 1;
    if n <= 1 {
        return n == 1;
    }
    for d in 1..=n / 2 {
        for code in 0..(p as u64).pow(d as u32) {
            let mut div = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                div.push((c % p as u64) as u32);
                c /= p as u64;
            }
            div.push(1);
            if poly_rem(m, &div, p).iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

fn conway_cache() -> &'static Mutex<HashMap<(u32, u32), Vec<u32>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Vec<u32>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Conway polynomial of degree `n` over `F_p`, constant term first.
///
/// Computed from the definition: the least primitive monic polynomial, in the
/// order on `(α_{n-1}, …, α_0)` where the coefficient of `x^i` is `(-1)^{n-i} α_i`,
/// that is compatible with the Conway polynomials of every proper divisor degree.
pub fn conway(p: u32, n: u32) -> Vec<u32> {
    if let Some(c) = conway_cache().lock().unwrap().get(&(p, n)) {
        return c.clone();
    }
    let lower: Vec<(u32, Vec<u32>)> =
        (1..n).filter(|m| n % m == 0).map(|m| (m, conway(p, m))).collect();
    let total = (p as u64).pow(n);
    let order = total - 1;
    let mut found = None;
    for code in 0..total {
        // code's most significant base-p digit is α_{n-1}
        let mut alpha = vec![0u32; n as usize];
        let mut c = code;
        for i in 0..n as usize {
            alpha[i] = (c % p as u64) as u32;
            c /= p as u64;
        }
        if alpha[0] == 0 {
            continue;
        }
        let mut f: Vec<u32> = (0..n as usize)
            .map(|i| if (n as usize - i) % 2 == 0 { alpha[i] } else { (p - alpha[i]) % p })
            .collect();
        f.push(1);
        if !is_irreducible(&f, p) {
            continue;
        }
        let pm = PolyMod { p, m: &f };
        let x = if n == 1 { vec![(p - f[0]) % p] } else { pm.decode(p) };
        if !pm.is_primitive(&x) {
            continue;
        }
        let compatible = lower.iter().all(|(m, cm)| {
            let y = pm.pow(&x, order / ((p as u64).pow(*m) - 1));
            let mut acc = vec![0u32; n as usize];
            for &c in cm.iter().rev() {
                acc = pm.mul(&acc, &y);
                acc[0] = (acc[0] + c) % p;
            }
            acc.iter().all(|&d| d == 0)
        });
        if compatible {
            found = Some(f);
            break;
        }
    }
    let f = found.expect("Conway polynomial exists");
    conway_cache().lock().unwrap().insert((p, n), f.clone());
    f
}
