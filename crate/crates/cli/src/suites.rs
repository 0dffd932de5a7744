//! Fixture suites for `excess verify`. Each check prints one PASS or FAIL line.

use excess::fixtures;
use excess::gfield::FieldCtx;
use excess::homforms::{closed_point_counts, count_points_in, is_smooth, TernaryForm};
use excess::quartic_census::{self, Kit};
use excess::searchkit::{
    admissible_mask, build_campaign, form_from_bits, nonzero_at_rational_points, precompute_tables, verify_basis,
    CampaignId,
};
use excess::weilkit::{
    self, closed_counts_of, factor_string, real_weil_from_counts, render_gate_row, resultant, vanishing_constraints,
    weil_bound_pairs, RealWeilPoly,
};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUITES: [&str; 7] = ["gate", "quartics-f2", "genus7", "genus9", "bases", "f29", "normal-form"];

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        if ok {
            println!("PASS {name}");
        } else {
            self.failures += 1;
            println!("FAIL {name}: {}", detail());
        }
    }
}

pub fn run(suite: &str, seed: u64) -> Result<bool, String> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if let Some(s) = SUITES.iter().find(|s| s.eq_ignore_ascii_case(suite)) {
        vec![*s]
    } else {
        return Err(format!("unknown suite `{suite}`; expected one of {} or all", SUITES.join(", ")));
    };
    let mut r = Report { failures: 0 };
    for name in names {
        let res = match name {
            "gate" => gate(&mut r),
            "quartics-f2" => quartics_f2(&mut r),
            "genus7" => genus7(&mut r),
            "genus9" => genus9(&mut r),
            "bases" => degree9_bases(&mut r, seed),
            "f29" => f29(&mut r),
            _ => normal_form(&mut r, seed),
        };
        res.map_err(|e| e.to_string())?;
    }
    println!("{} failure(s)", r.failures);
    Ok(r.failures == 0)
}

fn gate(r: &mut Report) -> excess::Result<()> {
    let rows: Vec<String> = weil_bound_pairs().iter().map(|(g, qs)| render_gate_row(*g, qs)).collect();
    r.check("gate table", rows == fixtures::GATE_TABLE, || rows.join(" | "));
    let cons: Vec<String> = (3..=10).map(|g| vanishing_constraints(g).render()).collect();
    r.check("constraint table", cons == fixtures::CONSTRAINT_TABLE, || cons.join(" | "));
    Ok(())
}

fn quartics_f2(r: &mut Report) -> excess::Result<()> {
    let k = FieldCtx::of_order(2)?;
    for (i, (form, h, a)) in fixtures::POINTLESS_F2.iter().enumerate() {
        let f = TernaryForm::parse_with_degree(&k, form, 4)?;
        let smooth = is_smooth(&k, &f)?;
        let pointless = count_points_in(&k, &f) == 0;
        let got_a = closed_point_counts(&k, &f, 3)?;
        let n: Vec<i128> = vec![got_a[0], got_a[0] + 2 * got_a[1], got_a[0] + 3 * got_a[2]];
        let got_h = factor_string(&real_weil_from_counts(&n, 3, 2)?);
        r.check(&format!("quartic {}", i + 1), smooth && pointless && got_a == a && got_h == *h, || {
            format!("smooth={smooth} pointless={pointless} a={got_a:?} h={got_h}")
        });
    }
    Ok(())
}

fn genus7(r: &mut Report) -> excess::Result<()> {
    let rows = fixtures::genus7_q2()?;
    let bad: Vec<usize> =
        rows.iter().filter(|fx| closed_counts_of(&fx.h, 7).as_deref() != Some(&fx.a[..])).map(|fx| fx.index).collect();
    r.check(&format!("genus 7 a-columns ({} rows)", rows.len()), rows.len() == 79 && bad.is_empty(), || {
        format!("rows {bad:?}")
    });
    Ok(())
}

fn genus9(r: &mut Report) -> excess::Result<()> {
    let (h1, h2, want) = fixtures::GENUS9_FACTORS;
    let res = resultant(&weilkit::parse_poly(h1)?, &weilkit::parse_poly(h2)?);
    r.check("resultant", res == BigInt::from(want), || res.to_string());
    let h = RealWeilPoly::parse(2, fixtures::GENUS9_Q2.0)?;
    let a = closed_counts_of(&h, 9);
    r.check("genus 9 a-row", a.as_deref() == Some(&fixtures::GENUS9_Q2.1[..]), || format!("{a:?}"));
    Ok(())
}

fn degree9_bases(r: &mut Report, seed: u64) -> excess::Result<()> {
    let k = FieldCtx::of_order(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (id, rank) in [(CampaignId::G7D9C1, 37), (CampaignId::G7D9C2, 43), (CampaignId::G7D9C3, 49)] {
        let c = build_campaign(id);
        let rep = verify_basis(&c.basis);
        r.check(&format!("{id} basis, rank {rank}"), rep.ok() && rep.rank == rank, || {
            format!("rank {} of {}, {:?}", rep.rank, rep.elements, rep.violations)
        });
        let t = precompute_tables(&c)?;
        let bad = (0..10_000)
            .map(|_| admissible_mask(&c, || rng.gen()))
            .filter(|&m| !nonzero_at_rational_points(&form_from_bits(&k, t.degree, t.form_bits_of(m))))
            .count();
        r.check(&format!("{id} sampled forms avoid rational points"), bad == 0, || format!("{bad} of 10000"));
    }
    Ok(())
}

fn f29(r: &mut Report) -> excess::Result<()> {
    let rep = quartic_census::verify_f29_unique()?;
    let h = factor_string(&rep.real_weil);
    r.check("x^4 + y^4 + z^4 over F_29", rep.ok() && h == "(T - 10)^3", || rep.to_string());
    Ok(())
}

fn normal_form(r: &mut Report, seed: u64) -> excess::Result<()> {
    let frame = quartic_census::pinned_frame(7)?;
    let kit = Kit::new(&frame.base)?;
    let entries = quartic_census::census(7)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for e in &entries {
        let c = kit.to_coeffs(&e.normal_form)?;
        for _ in 0..50 {
            let m = random_map(&frame.base, &mut rng);
            let g = kit.to_form(&kit.apply(&kit.transform(&m), &c));
            if quartic_census::first_pinned_quartic(&frame, &g)? != e.normal_form {
                bad += 1;
            }
        }
    }
    r.check(&format!("normal forms over F_7 ({} classes, 50 maps each)", entries.len()), bad == 0, || {
        format!("{bad} mismatches")
    });
    Ok(())
}

fn random_map(k: &FieldCtx, rng: &mut ChaCha8Rng) -> [[u8; 3]; 3] {
    use excess::gfield::Fe;
    loop {
        let m = [0; 3].map(|_| [0; 3].map(|_| Fe(rng.gen_range(0..k.order()))));
        if !excess::projplane::det3(k, &m).is_zero() {
            return m.map(|row| row.map(|x| x.0 as u8));
        }
    }
}
