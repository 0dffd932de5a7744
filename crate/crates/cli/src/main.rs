mod search;
mod suites;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use excess::fixtures;
use excess::quartic_census::{self, CensusMethod};
use excess::searchkit::CampaignId;
use excess::weilkit::{self, format_record, vanishing_constraints, ConstraintSet};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Parser)]
#[command(name = "excess", version, about = "Curves of maximal gonality over small finite fields")]
struct Cli {
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Directory for output files when `--out` is not given.
    #[arg(long, global = true, env = "EXCESS_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the (g, q) pairs allowed by the Weil bound.
    Gate {
        /// Also print the closed-point vanishing conditions per genus.
        #[arg(long)]
        constraints: bool,
    },
    /// Enumerate candidate real Weil polynomials.
    Sieve {
        #[arg(long)]
        g: u32,
        /// Field order, as `q` or `p^k`.
        #[arg(long, value_parser = parse_order)]
        q: u32,
        /// Skip the closed-point vanishing conditions.
        #[arg(long)]
        no_constraints: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compare against the published class list.
        #[arg(long)]
        fixtures: bool,
    },
    /// Search a plane curve space, optionally split into tiles.
    Search {
        #[arg(long)]
        campaign: CampaignId,
        /// Number of tiles, a power of two.
        #[arg(long, default_value_t = 1)]
        tiles: u64,
        /// Tiles to run; all when omitted.
        #[arg(long = "tile-index")]
        tile_index: Vec<u64>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Reject/require override file.
        #[arg(long)]
        overrides: Option<PathBuf>,
        /// Stop after this many tiles; the checkpoint allows resuming.
        #[arg(long)]
        max_tiles: Option<usize>,
    },
    /// Classify pointless smooth plane quartics over F_q.
    Census {
        #[arg(long, value_parser = parse_order)]
        q: u32,
        #[arg(long, default_value = "auto")]
        method: CensusMethod,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a fixture suite: gate, quartics-f2, genus7, genus9, bases, f29, normal-form, all.
    Verify {
        #[arg(long)]
        suite: String,
    },
}

/// Parses a field order given as `q` or `p^k`.
fn parse_order(s: &str) -> Result<u32, String> {
    let s = s.trim();
    let q = match s.split_once('^') {
        Some((p, k)) => {
            let p: u32 = p.trim().parse().map_err(|_| format!("bad characteristic in `{s}`"))?;
            let k: u32 = k.trim().parse().map_err(|_| format!("bad exponent in `{s}`"))?;
            p.checked_pow(k).ok_or_else(|| format!("`{s}` is too large"))?
        }
        None => s.parse().map_err(|_| format!("bad field order `{s}`"))?,
    };
    excess::gfield::FieldCtx::of_order(q).map_err(|e| e.to_string())?;
    Ok(q)
}

fn out_path(cli_dir: &Path, out: &Option<PathBuf>, default: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| cli_dir.join(default))
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        }
    }
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, String> {
    match &cli.cmd {
        Cmd::Gate { constraints } => {
            for (g, qs) in weilkit::weil_bound_pairs() {
                println!("{}", weilkit::render_gate_row(g, &qs));
            }
            if *constraints {
                for (g, _) in weilkit::weil_bound_pairs() {
                    println!("g={g}: {}", vanishing_constraints(g).render());
                }
            }
            Ok(true)
        }
        Cmd::Sieve { g, q, no_constraints, out, fixtures: check } => {
            cmd_sieve(cli, *g, *q, *no_constraints, out, *check)
        }
        Cmd::Search { campaign, tiles, tile_index, checkpoint, out, workers, overrides, max_tiles } => {
            let out = out_path(&cli.out_dir, out, &format!("search_{campaign}.txt"));
            search::run(&search::SearchArgs {
                campaign: *campaign,
                tiles: *tiles,
                indices: tile_index.clone(),
                checkpoint: checkpoint.clone(),
                out,
                workers: *workers,
                overrides: overrides.clone(),
                max_tiles: *max_tiles,
            })
        }
        Cmd::Census { q, method, out } => cmd_census(cli, *q, *method, out),
        Cmd::Verify { suite } => suites::run(suite, cli.seed),
    }
}

fn cmd_sieve(cli: &Cli, g: u32, q: u32, no_constraints: bool, out: &Option<PathBuf>, check: bool) -> Result<bool, String> {
    let allowed = weilkit::weil_bound_pairs().into_iter().any(|(gg, qs)| gg == g && qs.contains(&q));
    if !allowed {
        return Err(format!("(g, q) = ({g}, {q}) is outside the gate table"));
    }
    let cons = if no_constraints { ConstraintSet::none(g) } else { vanishing_constraints(g) };
    let records = weilkit::sieve(g, q as u64, &cons);
    let mut text = format!(
        "# excess sieve v1\tg={g}\tq={q}\tconstraints={}\n",
        if no_constraints { "none".to_string() } else { cons.render() }
    );
    for r in &records {
        text.push_str(&format_record(r));
        text.push('\n');
    }
    let path = out_path(&cli.out_dir, out, &format!("sieve_g{g}_q{q}.txt"));
    write_file(&path, &text)?;
    println!("{} classes written to {}", records.len(), path.display());
    if !check {
        return Ok(true);
    }
    let Some(list) = fixtures::sieve_fixture(g, q as u64).map_err(|e| e.to_string())? else {
        println!("no published list for g={g}, q={q}");
        return Ok(true);
    };
    let mut missing = 0;
    for fx in &list {
        match records.iter().find(|r| r.h == fx.h) {
            None => {
                missing += 1;
                println!("missing: {} ({})", weilkit::factor_string(&fx.h), fx.index);
            }
            Some(r) if r.a[..fx.a.len()] != fx.a[..] => {
                missing += 1;
                println!("count mismatch: {} ({})", weilkit::factor_string(&fx.h), fx.index);
            }
            Some(_) => {}
        }
    }
    let extras: Vec<_> = records.iter().filter(|r| !list.iter().any(|fx| fx.h == r.h)).collect();
    for r in &extras {
        println!("warning: extra class {}", weilkit::factor_string(&r.h));
    }
    println!("{missing} missing out of {}, {} extra", list.len(), extras.len());
    Ok(missing == 0)
}

fn cmd_census(cli: &Cli, q: u32, method: CensusMethod, out: &Option<PathBuf>) -> Result<bool, String> {
    let path = out_path(&cli.out_dir, out, &format!("census_q{q}.txt"));
    let verify_only = match q {
        29 => Some("x^4 + y^4 + z^4"),
        32 => Some(fixtures::F32_QUARTIC),
        _ => None,
    };
    if let Some(form) = verify_only {
        let report = quartic_census::verify_quartic(q, form).map_err(|e| e.to_string())?;
        println!("verification only over F_{q}");
        println!("{report}");
        write_file(&path, &format!("# excess verify v1\n{report}\n"))?;
        return Ok(report.ok());
    }
    if q > 23 {
        return Err(excess::Error::UnsupportedField(q).to_string());
    }
    let entries = quartic_census::census_with(q, method).map_err(|e| e.to_string())?;
    write_file(&path, &quartic_census::write_census(&entries))?;
    let known = fixtures::CENSUS_COUNTS.iter().chain(&fixtures::CENSUS_COUNTS_EXTENDED).find(|(qq, _)| *qq == q);
    match known {
        Some((_, n)) => println!("{} classes over F_{q} (published: {n}), written to {}", entries.len(), path.display()),
        None => println!("{} classes over F_{q}, written to {}", entries.len(), path.display()),
    }
    Ok(known.map_or(true, |(_, n)| *n == entries.len()))
}
