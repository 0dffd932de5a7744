use excess::weilkit::{
    closed_counts_of, factor_string, sieve, vanishing_constraints, RealWeilPoly,
};

const GENUS7: &str = include_str!("../fixtures/genus7_q2.txt");

fn genus7_rows() -> Vec<(usize, RealWeilPoly, Vec<i128>)> {
    GENUS7
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            let a = cols[2].split(',').map(|x| x.parse().unwrap()).collect();
            (cols[0].parse().unwrap(), RealWeilPoly::parse(2, cols[1]).unwrap(), a)
        })
        .collect()
}

#[test]
fn genus7_rows_reproduce_closed_point_counts() {
    let rows = genus7_rows();
    assert_eq!(rows.len(), 79);
    for (i, h, a) in &rows {
        assert_eq!(&closed_counts_of(h, 7).unwrap(), a, "row {i}");
    }
}

#[test]
fn genus7_sieve_contains_every_row() {
    let out = sieve(7, 2, &vanishing_constraints(7));
    let rows = genus7_rows();
    for (i, h, a) in &rows {
        let rec = out.iter().find(|r| &r.h == h).unwrap_or_else(|| panic!("row {i} missing: {h}"));
        assert_eq!(&rec.a[..7], &a[..], "row {i}");
    }
    let extras: Vec<String> = out
        .iter()
        .filter(|r| !rows.iter().any(|(_, h, _)| *h == r.h))
        .map(|r| factor_string(&r.h))
        .collect();
    eprintln!("genus 7 sieve: {} records, {} beyond the fixture", out.len(), extras.len());
    for e in &extras {
        eprintln!("  extra: {e}");
    }
}

#[test]
fn genus9_sieve_contains_the_listed_class() {
    let h = RealWeilPoly::parse(2, "(T+1)(T^4 - 2T^3 - 6T^2 + 10T + 1)^2").unwrap();
    let out = sieve(9, 2, &vanishing_constraints(9));
    let rec = out.iter().find(|r| r.h == h).expect("class present");
    assert_eq!(rec.a[..9], [0, 4, 0, 0, 0, 8, 0, 18, 64]);
    assert_eq!(factor_string(&h), "(T + 1)(T^4 - 2T^3 - 6T^2 + 10T + 1)^2");
    eprintln!("genus 9 sieve: {} records", out.len());
}
