//! Points of the projective plane over finite fields, closed points, and the
//! action of `PGL_3(F_q)`.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::gfield::{Fe, Field, FieldCtx, FieldId};

/// A point `(x:y:z)` scaled so its first nonzero coordinate is 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProjPoint {
    pub field: FieldId,
    pub c: [Fe; 3],
}

impl Ord for ProjPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.c.cmp(&other.c)
    }
}

impl PartialOrd for ProjPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Scales `c` so that the first nonzero entry is 1; `None` for the zero vector.
pub fn normalize(k: &FieldCtx, c: [Fe; 3]) -> Option<[Fe; 3]> {
    let lead = *c.iter().find(|x| !x.is_zero())?;
    if lead == Fe::ONE {
        return Some(c);
    }
    let s = k.inv(lead).ok()?;
    Some(c.map(|x| k.mul(x, s)))
}

impl ProjPoint {
    pub fn new(k: &FieldCtx, c: [Fe; 3]) -> Option<ProjPoint> {
        normalize(k, c).map(|c| ProjPoint { field: k.id(), c })
    }

    pub fn parse(k: &FieldCtx, s: &str) -> Result<ProjPoint> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("point literal `{s}` needs three coordinates")));
        }
        let mut c = [Fe::ZERO; 3];
        for (slot, part) in c.iter_mut().zip(&parts) {
            *slot = k.parse_elem(part)?;
        }
        ProjPoint::new(k, c).ok_or_else(|| Error::Parse("the zero vector is not a point".into()))
    }

    pub fn format(&self, k: &FieldCtx) -> String {
        let c: Vec<String> = self.c.iter().map(|&x| k.format_elem(x)).collect();
        format!("({})", c.join(":"))
    }

    /// Applies the `base`-Frobenius coordinatewise.
    pub fn frobenius(&self, k: &FieldCtx, base: &FieldCtx) -> Result<ProjPoint> {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x = k.frobenius(*x, base)?;
        }
        Ok(ProjPoint { field: self.field, c })
    }

    /// Degree of the closed point through `self`, over `base`.
    pub fn degree_over(&self, k: &FieldCtx, base: &FieldCtx) -> Result<u32> {
        let mut d = 1;
        for &x in &self.c {
            let e = k.degree_over(x, base)?;
            d = num_integer::lcm(d, e);
        }
        Ok(d)
    }

    /// The Frobenius conjugates of `self`, starting with `self`.
    pub fn conjugates(&self, k: &FieldCtx, base: &FieldCtx) -> Result<Vec<ProjPoint>> {
        let mut out = vec![*self];
        let mut cur = self.frobenius(k, base)?;
        while cur != *self {
            out.push(cur);
            cur = cur.frobenius(k, base)?;
        }
        Ok(out)
    }
}

/// All points of `P²(k)`: `(a:b:1)` in element order, then `(a:1:0)`, then `(1:0:0)`,
/// each stored in normalized form.
pub fn enumerate_points(k: &FieldCtx) -> Result<Vec<ProjPoint>> {
    let q = k.order();
    let mut out = Vec::with_capacity((q * q + q + 1) as usize);
    let id = k.id();
    for a in k.elements() {
        for b in k.elements() {
            out.push(ProjPoint::new(k, [a, b, Fe::ONE]).unwrap());
        }
    }
    for a in k.elements() {
        out.push(ProjPoint::new(k, [a, Fe::ONE, Fe::ZERO]).unwrap());
    }
    out.push(ProjPoint { field: id, c: [Fe::ONE, Fe::ZERO, Fe::ZERO] });
    Ok(out)
}

/// A Galois orbit of points, represented by its least member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedPoint {
    pub rep: ProjPoint,
    pub degree: u32,
    pub orbit: Vec<ProjPoint>,
}

/// All closed points of exact degree `d` over `base`, sorted by representative.
/// Coordinates live in `base.extension(d)`.
pub fn closed_points(base: &Field, d: u32) -> Result<Vec<ClosedPoint>> {
    let ext = base.extension(d)?;
    let mut out = Vec::new();
    let mut by_degree = vec![0u64; d as usize + 1];
    for pt in enumerate_points(&ext)? {
        let deg = pt.degree_over(&ext, base)?;
        by_degree[deg as usize] += 1;
        if deg != d {
            continue;
        }
        let orbit = pt.conjugates(&ext, base)?;
        if orbit.iter().all(|o| pt <= *o) {
            out.push(ClosedPoint { rep: pt, degree: d, orbit });
        }
    }
    let q = ext.order() as u64;
    let lower: u64 = (1..d).map(|e| by_degree[e as usize]).sum();
    if (q * q + q + 1 - lower) / d as u64 != out.len() as u64 || by_degree[d as usize] != d as u64 * out.len() as u64 {
        return Err(Error::InternalInconsistency(format!("closed point count of degree {d}")));
    }
    out.sort_by(|a, b| a.rep.cmp(&b.rep));
    Ok(out)
}

/// The closed point containing `pt`.
pub fn closed_point_of(k: &FieldCtx, base: &FieldCtx, pt: ProjPoint) -> Result<ClosedPoint> {
    let orbit = pt.conjugates(k, base)?;
    let rep = *orbit.iter().min().unwrap();
    Ok(ClosedPoint { rep, degree: orbit.len() as u32, orbit })
}

pub type Mat3 = [[Fe; 3]; 3];

pub fn mat_mul(k: &FieldCtx, a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[Fe::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = Fe::ZERO;
            for l in 0..3 {
                s = k.add(s, k.mul(a[i][l], b[l][j]));
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn mat_vec(k: &FieldCtx, m: &Mat3, v: [Fe; 3]) -> [Fe; 3] {
    let mut out = [Fe::ZERO; 3];
    for i in 0..3 {
        let mut s = Fe::ZERO;
        for j in 0..3 {
            s = k.add(s, k.mul(m[i][j], v[j]));
        }
        out[i] = s;
    }
    out
}

pub fn det3(k: &FieldCtx, m: &Mat3) -> Fe {
    let minor = |a: usize, b: usize, c: usize, d: usize| {
        k.sub(k.mul(m[1][a], m[2][b]), k.mul(m[1][c], m[2][d]))
    };
    let t0 = k.mul(m[0][0], minor(1, 2, 2, 1));
    let t1 = k.mul(m[0][1], minor(0, 2, 2, 0));
    let t2 = k.mul(m[0][2], minor(0, 1, 1, 0));
    k.add(k.sub(t0, t1), t2)
}

/// Inverse via the adjugate; `None` if singular.
pub fn mat_inv(k: &FieldCtx, m: &Mat3) -> Option<Mat3> {
    let d = det3(k, m);
    let di = k.inv(d).ok()?;
    let mut out = [[Fe::ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            // cofactor of entry (j, i)
            let r: Vec<usize> = (0..3).filter(|&x| x != j).collect();
            let c: Vec<usize> = (0..3).filter(|&x| x != i).collect();
            let mut v = k.sub(k.mul(m[r[0]][c[0]], m[r[1]][c[1]]), k.mul(m[r[0]][c[1]], m[r[1]][c[0]]));
            if (i + j) % 2 == 1 {
                v = k.neg(v);
            }
            out[i][j] = k.mul(v, di);
        }
    }
    Some(out)
}

/// Cross product of two vectors: the line through two points, or the meet of two lines.
pub fn cross(k: &FieldCtx, a: [Fe; 3], b: [Fe; 3]) -> [Fe; 3] {
    [
        k.sub(k.mul(a[1], b[2]), k.mul(a[2], b[1])),
        k.sub(k.mul(a[2], b[0]), k.mul(a[0], b[2])),
        k.sub(k.mul(a[0], b[1]), k.mul(a[1], b[0])),
    ]
}

/// An invertible 3×3 matrix over `F_q`, scaled so its first nonzero entry is 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Pgl3Map {
    pub field: FieldId,
    pub m: Mat3,
}

impl Pgl3Map {
    pub fn new(k: &FieldCtx, m: Mat3) -> Option<Pgl3Map> {
        if det3(k, &m).is_zero() {
            return None;
        }
        let lead = *m.iter().flatten().find(|x| !x.is_zero())?;
        let s = k.inv(lead).ok()?;
        Some(Pgl3Map { field: k.id(), m: m.map(|row| row.map(|x| k.mul(x, s))) })
    }

    pub fn identity(k: &FieldCtx) -> Pgl3Map {
        let (o, z) = (Fe::ONE, Fe::ZERO);
        Pgl3Map { field: k.id(), m: [[o, z, z], [z, o, z], [z, z, o]] }
    }

    /// Image of `pt`, whose field `ext` is `base` or an extension of it.
    pub fn apply(&self, base: &FieldCtx, ext: &FieldCtx, pt: &ProjPoint) -> Result<ProjPoint> {
        if self.field != base.id() || pt.field != ext.id() {
            return Err(Error::ContextMismatch);
        }
        let mut m = [[Fe::ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = ext.lift(base, self.m[i][j])?;
            }
        }
        ProjPoint::new(ext, mat_vec(ext, &m, pt.c))
            .ok_or_else(|| Error::InternalInconsistency("singular map".into()))
    }
}

/// Every element of `PGL_3(F_q)` for `q ≤ 4`.
pub fn pgl3_elements(base: &FieldCtx) -> Result<Vec<Pgl3Map>> {
    let q = base.order();
    if q > 4 {
        return Err(Error::GroupTooLarge { q });
    }
    let mut out = Vec::new();
    let total = (q as u64).pow(9);
    for code in 0..total {
        let mut m = [[Fe::ZERO; 3]; 3];
        let mut c = code;
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x = Fe((c % q as u64) as u32);
                c /= q as u64;
            }
        }
        if *m.iter().flatten().find(|x| !x.is_zero()).unwrap_or(&Fe::ZERO) != Fe::ONE {
            continue;
        }
        if !det3(base, &m).is_zero() {
            out.push(Pgl3Map { field: base.id(), m });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub rep: ClosedPoint,
    pub members: Vec<ClosedPoint>,
}

/// Partitions closed points of one degree into `PGL_3(F_q)` orbits, `q ≤ 4`.
pub fn pgl3_orbits(base: &Field, points: &[ClosedPoint]) -> Result<Vec<Orbit>> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let group = pgl3_elements(base)?;
    let d = points[0].degree;
    let ext = base.extension(d)?;
    let index: HashMap<ProjPoint, usize> = points.iter().enumerate().map(|(i, p)| (p.rep, i)).collect();
    let mut seen = vec![false; points.len()];
    let mut orbits = Vec::new();
    for start in 0..points.len() {
        if seen[start] {
            continue;
        }
        let mut members = Vec::new();
        for g in &group {
            let img = g.apply(base, &ext, &points[start].rep)?;
            let cp = closed_point_of(&ext, base, img)?;
            let &i = index
                .get(&cp.rep)
                .ok_or_else(|| Error::InternalInconsistency("orbit leaves the point set".into()))?;
            if !seen[i] {
                seen[i] = true;
                members.push(points[i].clone());
            }
        }
        members.sort_by(|a, b| a.rep.cmp(&b.rep));
        orbits.push(Orbit { rep: members[0].clone(), members });
    }
    Ok(orbits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::divisors;

    fn f(q: u32) -> Field {
        FieldCtx::of_order(q).unwrap()
    }

    #[test]
    fn point_counts() {
        assert_eq!(enumerate_points(&f(2)).unwrap().len(), 7);
        assert_eq!(enumerate_points(&f(8)).unwrap().len(), 73);
        assert_eq!(enumerate_points(&f(29)).unwrap().len(), 871);
    }

    #[test]
    fn enumeration_order_and_normalization() {
        let k = f(3);
        let pts = enumerate_points(&k).unwrap();
        assert_eq!(pts[0].c, [Fe(0), Fe(0), Fe(1)]);
        assert_eq!(pts[1].c, [Fe(0), Fe(1), Fe(1)]);
        // (1:2:1) over F_3 is already normalized; (2:1:1) becomes (1:2:2)
        assert_eq!(pts[3 * 2 + 1].c, [Fe(1), Fe(2), Fe(2)]);
        assert_eq!(pts.last().unwrap().c, [Fe(1), Fe(0), Fe(0)]);
        for p in &pts {
            assert_eq!(ProjPoint::new(&k, p.c).unwrap(), *p);
        }
    }

    #[test]
    fn closed_point_counts_over_f2() {
        let f2 = f(2);
        assert_eq!(closed_points(&f2, 2).unwrap().len(), 7);
        assert_eq!(closed_points(&f2, 3).unwrap().len(), 22);
        assert_eq!(closed_points(&f2, 4).unwrap().len(), 63);
        assert_eq!(closed_points(&f2, 5).unwrap().len(), 210);
    }

    #[test]
    fn closed_points_sum_to_plane_counts() {
        for q in [2u32, 3] {
            let base = f(q);
            let mut a = vec![0u64; 7];
            for d in 1..=6 {
                a[d] = closed_points(&base, d as u32).unwrap().len() as u64;
            }
            for r in 1..=6u32 {
                let qr = (q as u64).pow(r);
                let total: u64 = divisors(r).into_iter().map(|d| d as u64 * a[d as usize]).sum();
                assert_eq!(total, qr * qr + qr + 1);
            }
        }
    }

    #[test]
    fn closed_point_reps_are_minimal() {
        let f2 = f(2);
        for cp in closed_points(&f2, 4).unwrap() {
            assert_eq!(cp.orbit.len(), 4);
            assert!(cp.orbit.iter().all(|p| cp.rep <= *p));
        }
    }

    #[test]
    fn map_examples() {
        let f2 = f(2);
        let f8 = f2.extension(3).unwrap();
        let id = Pgl3Map::identity(&f2);
        let p = ProjPoint::parse(&f8, "1:t:t^2").unwrap();
        assert_eq!(id.apply(&f2, &f8, &p).unwrap(), p);
        let (o, z) = (Fe::ONE, Fe::ZERO);
        let swap = Pgl3Map::new(&f2, [[z, o, z], [o, z, z], [z, z, o]]).unwrap();
        let q = ProjPoint::parse(&f8, "0:1:t").unwrap();
        assert_eq!(swap.apply(&f2, &f8, &q).unwrap(), ProjPoint::parse(&f8, "1:0:t").unwrap());
        let m = Pgl3Map::new(&f2, [[o, z, z], [z, o, z], [o, o, o]]).unwrap();
        let r = ProjPoint::parse(&f2, "1:1:0").unwrap();
        assert_eq!(m.apply(&f2, &f2, &r).unwrap(), r);
        let other = f(8);
        assert_eq!(m.apply(&f2, &other, &q), Err(Error::ContextMismatch));
    }

    #[test]
    fn pgl3_orders() {
        assert_eq!(pgl3_elements(&f(2)).unwrap().len(), 168);
        assert_eq!(pgl3_elements(&f(3)).unwrap().len(), 5616);
        assert!(matches!(pgl3_elements(&f(5)), Err(Error::GroupTooLarge { q: 5 })));
    }

    #[test]
    fn orbits_over_f2() {
        let f2 = f(2);
        let f8 = f2.extension(3).unwrap();
        let cubic = closed_points(&f2, 3).unwrap();
        let orbits = pgl3_orbits(&f2, &cubic).unwrap();
        assert_eq!(orbits.len(), 2);
        let a = closed_point_of(&f8, &f2, ProjPoint::parse(&f8, "0:1:t").unwrap()).unwrap();
        let b = closed_point_of(&f8, &f2, ProjPoint::parse(&f8, "1:t:t^2").unwrap()).unwrap();
        let which = |cp: &ClosedPoint| orbits.iter().position(|o| o.members.iter().any(|m| m.rep == cp.rep));
        assert_ne!(which(&a), which(&b));
        assert_eq!(pgl3_orbits(&f2, &closed_points(&f2, 4).unwrap()).unwrap().len(), 2);
        assert_eq!(pgl3_orbits(&f2, &closed_points(&f2, 2).unwrap()).unwrap().len(), 1);
        for d in 1..=4 {
            let orbits = pgl3_orbits(&f2, &closed_points(&f2, d).unwrap()).unwrap();
            let total: usize = orbits.iter().map(|o| o.members.len()).sum();
            assert_eq!(total, closed_points(&f2, d).unwrap().len());
            assert!(orbits.iter().all(|o| 168 % o.members.len() == 0));
        }
    }

    #[test]
    fn maps_preserve_degree() {
        let f2 = f(2);
        let f16 = f2.extension(4).unwrap();
        let group = pgl3_elements(&f2).unwrap();
        for cp in closed_points(&f2, 4).unwrap().iter().take(10) {
            for g in group.iter().step_by(7) {
                let img = g.apply(&f2, &f16, &cp.rep).unwrap();
                assert_eq!(img.degree_over(&f16, &f2).unwrap(), 4);
            }
        }
    }

    #[test]
    fn matrix_inverse() {
        let k = f(9);
        let m = [[Fe(1), Fe(4), Fe(2)], [Fe(0), Fe(7), Fe(3)], [Fe(5), Fe(0), Fe(8)]];
        if let Some(mi) = mat_inv(&k, &m) {
            let id = mat_mul(&k, &m, &mi);
            assert_eq!(id, [[Fe(1), Fe(0), Fe(0)], [Fe(0), Fe(1), Fe(0)], [Fe(0), Fe(0), Fe(1)]]);
        } else {
            assert!(det3(&k, &m).is_zero());
        }
    }
}
