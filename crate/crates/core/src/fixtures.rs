//! Published reference data: isogeny class lists, quartic tables, printed table rows.

use crate::error::{Error, Result};
use crate::weilkit::RealWeilPoly;

/// Genus 7 over `F_2`: index, real Weil polynomial, `a_1..a_7`, tab-separated.
pub const GENUS7_Q2: &str = include_str!("../fixtures/genus7_q2.txt");

/// Genus 6 over `F_2`: real Weil polynomial and `a_1..a_6`.
pub const GENUS6_Q2: [(&str, [i128; 6]); 3] = [
    ("(T - 2)(T + 1)(T^2 - 2T - 2)(T^2 - 8)", [0, 0, 0, 0, 12, 4]),
    ("(T^2 - 8)(T^4 - 3T^3 - 2T^2 + 7T + 1)", [0, 0, 1, 0, 8, 3]),
    ("(T^2 - 8)(T^4 - 3T^3 - 2T^2 + 8T - 2)", [0, 0, 2, 0, 4, 1]),
];

pub const GENUS9_Q2: (&str, [i128; 9]) = ("(T + 1)(T^4 - 2T^3 - 6T^2 + 10T + 1)^2", [0, 4, 0, 0, 0, 8, 0, 18, 64]);

/// The two real Weil factors whose resultant is checked in genus 9.
pub const GENUS9_FACTORS: (&str, &str, i64) = ("T + 1", "T^4 - 2T^3 - 6T^2 + 10T + 1", -12);

/// Pointless quartics over `F_2`: equation, real Weil polynomial, `a_1, a_2, a_3`.
pub const POINTLESS_F2: [(&str, &str, [i128; 3]); 4] = [
    ("x^4 + x*y^3 + y^4 + x*y*z^2 + x*z^3 + y*z^3 + z^4", "(T - 2)(T^2 - T - 5)", [0, 1, 1]),
    ("x^4 + x*y^3 + y^4 + x^2*z^2 + x*y*z^2 + y*z^3 + z^4", "(T - 2)(T^2 - T - 4)", [0, 2, 2]),
    ("x^4 + x*y^3 + y^4 + x^3*z + x*y*z^2 + y*z^3 + z^4", "T^3 - 3T^2 - 4T + 13", [0, 0, 1]),
    (
        "x^4 + x^2*y^2 + y^4 + x^2*y*z + x*y^2*z + x^2*z^2 + x*y*z^2 + y^2*z^2 + z^4",
        "(T - 1)^3",
        [0, 7, 8],
    ),
];

pub const GATE_TABLE: [&str; 8] = [
    "g=3: q ≤ 32",
    "g=4: q ≤ 7",
    "g=5: q ≤ 4",
    "g=6: q = 2 or 3",
    "g=7: q = 2",
    "g=8: q = 2",
    "g=9: q = 2",
    "g=10: q = 2",
];

/// Vanishing conditions on closed point counts for `g = 3..=10`.
pub const CONSTRAINT_TABLE: [&str; 8] = [
    "a_1 = 0",
    "a_1 = a_2 = 0",
    "a_1 = a_3 = 0",
    "a_1 = a_2 = a_4 = 0",
    "a_1 = a_5 = a_2 a_3 = 0",
    "a_1 = a_2 = a_3 = a_6 = 0",
    "a_1 = a_7 = a_2 a_3 = a_2 a_5 = a_3 a_4 = 0",
    "a_1 = a_2 = a_4 = a_8 = a_3 a_5 = 0",
];

/// Isomorphism class counts of pointless smooth plane quartics.
pub const CENSUS_COUNTS: [(u32, usize); 8] = [(2, 4), (3, 8), (4, 21), (5, 31), (7, 32), (8, 39), (9, 27), (11, 21)];

/// Counts for larger fields, too slow for routine runs.
pub const CENSUS_COUNTS_EXTENDED: [(u32, usize); 5] = [(13, 11), (16, 8), (17, 7), (19, 2), (23, 2)];

/// The pointless quartic over `F_32`, and also over `F_2`.
pub const F32_QUARTIC: &str = "(x^2 + x*z)^2 + (y^2 + y*z)*(x^2 + x*z) + (y^2 + y*z)^2 + z^4";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureClass {
    pub index: usize,
    pub h: RealWeilPoly,
    pub a: Vec<i128>,
}

pub fn genus7_q2() -> Result<Vec<FixtureClass>> {
    GENUS7_Q2
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("fixture line `{l}`")));
            }
            let index = cols[0].parse().map_err(|_| Error::Parse(format!("fixture index `{}`", cols[0])))?;
            let a = cols[2]
                .split(',')
                .map(|x| x.parse().map_err(|_| Error::Parse(format!("fixture count `{x}`"))))
                .collect::<Result<_>>()?;
            Ok(FixtureClass { index, h: RealWeilPoly::parse(2, cols[1])?, a })
        })
        .collect()
}

/// The published class list for `(g, q)`, if there is one.
pub fn sieve_fixture(g: u32, q: u64) -> Result<Option<Vec<FixtureClass>>> {
    let one = |i: usize, s: &str, a: &[i128]| -> Result<FixtureClass> {
        Ok(FixtureClass { index: i, h: RealWeilPoly::parse(2, s)?, a: a.to_vec() })
    };
    Ok(match (g, q) {
        (6, 2) => Some(GENUS6_Q2.iter().enumerate().map(|(i, (s, a))| one(i + 1, s, a)).collect::<Result<_>>()?),
        (6, 3) => Some(Vec::new()),
        (7, 2) => Some(genus7_q2()?),
        (9, 2) => Some(vec![one(1, GENUS9_Q2.0, &GENUS9_Q2.1)?]),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse() {
        assert_eq!(genus7_q2().unwrap().len(), 79);
        assert_eq!(sieve_fixture(6, 2).unwrap().unwrap().len(), 3);
        assert!(sieve_fixture(6, 3).unwrap().unwrap().is_empty());
        assert!(sieve_fixture(8, 2).unwrap().is_none());
    }
}
