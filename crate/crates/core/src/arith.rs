//! Integer helpers: primes, divisors, Möbius function.

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Returns `(p, k)` with `n = p^k`, or `None` if `n` is not a prime power.
pub fn prime_power(n: u64) -> Option<(u32, u32)> {
    if n < 2 {
        return None;
    }
    let p = (2..=n).find(|d| n % d == 0)?;
    let (mut m, mut k) = (n, 0);
    while m % p == 0 {
        m /= p;
        k += 1;
    }
    (m == 1).then_some((p as u32, k))
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n % d == 0).collect()
}

pub fn mobius(n: u32) -> i64 {
    let mut n = n;
    let mut sign = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Closed-point counts from point counts: `a_d = (1/d) Σ_{r | d} μ(d/r) N_r`.
/// `n[r-1]` holds `N_r`. Returns `None` if some `a_d` is not a nonnegative integer.
pub fn closed_from_counts(n: &[i128]) -> Option<Vec<i128>> {
    let mut a = Vec::with_capacity(n.len());
    for d in 1..=n.len() as u32 {
        let s: i128 = divisors(d)
            .into_iter()
            .map(|r| mobius(d / r) as i128 * n[r as usize - 1])
            .sum();
        if s < 0 || s % d as i128 != 0 {
            return None;
        }
        a.push(s / d as i128);
    }
    Some(a)
}

/// Inverse of [`closed_from_counts`]: `N_r = Σ_{d | r} d a_d`.
pub fn counts_from_closed(a: &[i128]) -> Vec<i128> {
    (1..=a.len() as u32)
        .map(|r| divisors(r).into_iter().map(|d| d as i128 * a[d as usize - 1]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mobius_small() {
        let want = [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0];
        for (i, &m) in want.iter().enumerate() {
            assert_eq!(mobius(i as u32 + 1), m);
        }
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(32), Some((2, 5)));
        assert_eq!(prime_power(29), Some((29, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn two_term_inversion() {
        assert_eq!(closed_from_counts(&[0, 2]), Some(vec![0, 1]));
        assert_eq!(closed_from_counts(&[0, 3]), None);
    }

    #[test]
    fn plane_points_over_f2() {
        let n: Vec<i128> = (1..=6).map(|r| 4i128.pow(r) + 2i128.pow(r) + 1).collect();
        let a = closed_from_counts(&n).unwrap();
        assert_eq!(&a[..5], &[7, 7, 22, 63, 210]);
        assert_eq!(counts_from_closed(&a), n);
    }
}
