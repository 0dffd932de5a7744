//! Tiled searches with a resumable checkpoint.
//!
//! The checkpoint is a text file: a format line, the campaign and tile count, then
//! one `done <index>` line per finished tile. Survivors of each finished tile are
//! appended to the output before the tile is marked done; at the end of every run the
//! output is rewritten sorted by mask with duplicates dropped, so the final file only
//! depends on which tiles have finished.

use std::collections::BTreeSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::PathBuf;

use excess::searchkit::{build_campaign, precompute_tables, run_search, CampaignId, SurvivorRecord, TileSpec};
use rayon::prelude::*;

const CHECKPOINT_TAG: &str = "# excess checkpoint v1";
const SURVIVOR_TAG: &str = "# excess survivors v1";

pub struct SearchArgs {
    pub campaign: CampaignId,
    pub tiles: u64,
    pub indices: Vec<u64>,
    pub checkpoint: Option<PathBuf>,
    pub out: PathBuf,
    pub workers: usize,
    pub overrides: Option<PathBuf>,
    pub max_tiles: Option<usize>,
}

fn checkpoint_header(a: &SearchArgs, overrides: &str) -> String {
    let rules: Vec<&str> = overrides
        .lines()
        .map(|l| l.split('#').next().unwrap().trim())
        .filter(|l| !l.is_empty())
        .collect();
    let rules = if rules.is_empty() { "none".to_string() } else { rules.join("; ") };
    format!("{CHECKPOINT_TAG}\ncampaign {}\ntiles {}\noverrides {rules}\n", a.campaign, a.tiles)
}

/// Finished tiles recorded in an existing checkpoint.
fn read_checkpoint(path: &PathBuf, header: &str) -> Result<BTreeSet<u64>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if !text.starts_with(header) {
        return Err(format!("checkpoint {} does not match this run", path.display()));
    }
    text[header.len()..]
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.strip_prefix("done ")
                .and_then(|n| n.trim().parse().ok())
                .ok_or_else(|| format!("bad checkpoint line `{l}`"))
        })
        .collect()
}

fn read_survivors(path: &PathBuf) -> Result<Vec<SurvivorRecord>, String> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| SurvivorRecord::parse_line(l).map_err(|e| e.to_string()))
        .collect()
}

fn append(path: &PathBuf, text: &str) -> Result<(), String> {
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    f.write_all(text.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn run(a: &SearchArgs) -> Result<bool, String> {
    if !a.tiles.is_power_of_two() {
        return Err(format!("tile count {} is not a power of two", a.tiles));
    }
    let bits = a.tiles.trailing_zeros();
    let overrides = match &a.overrides {
        Some(p) => fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => String::new(),
    };
    let campaign = build_campaign(a.campaign).with_overrides(&overrides).map_err(|e| e.to_string())?;
    let tables = precompute_tables(&campaign).map_err(|e| e.to_string())?;
    let indices: BTreeSet<u64> = if a.indices.is_empty() { (0..a.tiles).collect() } else { a.indices.iter().copied().collect() };
    for &index in &indices {
        TileSpec { campaign: a.campaign, bits, index }.validate(&campaign).map_err(|e| e.to_string())?;
    }
    if let Some(dir) = a.out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        }
    }

    let header = checkpoint_header(a, &overrides);
    let done = match &a.checkpoint {
        Some(cp) if cp.exists() => read_checkpoint(cp, &header)?,
        Some(cp) => {
            fs::write(cp, &header).map_err(|e| format!("{}: {e}", cp.display()))?;
            fs::write(&a.out, "").map_err(|e| format!("{}: {e}", a.out.display()))?;
            BTreeSet::new()
        }
        None => {
            fs::write(&a.out, "").map_err(|e| format!("{}: {e}", a.out.display()))?;
            BTreeSet::new()
        }
    };

    let mut pending: Vec<u64> = indices.iter().copied().filter(|i| !done.contains(i)).collect();
    if let Some(m) = a.max_tiles {
        pending.truncate(m);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.workers.max(1)).build().map_err(|e| e.to_string())?;
    for chunk in pending.chunks(a.workers.max(1)) {
        let results: Vec<Vec<SurvivorRecord>> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&index| run_search(&campaign, &tables, &TileSpec { campaign: a.campaign, bits, index }))
                .collect::<Result<_, _>>()
        })
        .map_err(|e| e.to_string())?;
        for (index, recs) in chunk.iter().zip(results) {
            let text: String = recs.iter().map(|r| r.to_line() + "\n").collect();
            append(&a.out, &text)?;
            if let Some(cp) = &a.checkpoint {
                append(cp, &format!("done {index}\n"))?;
            }
        }
    }

    let mut all = read_survivors(&a.out)?;
    all.sort_by_key(|r| r.mask);
    all.dedup_by_key(|r| r.mask);
    let mut text = format!("{SURVIVOR_TAG}\tcampaign={}\ttiles={}\n", a.campaign, a.tiles);
    for r in &all {
        text.push_str(&r.to_line());
        text.push('\n');
    }
    fs::write(&a.out, text).map_err(|e| format!("{}: {e}", a.out.display()))?;
    let finished = match &a.checkpoint {
        Some(cp) => read_checkpoint(cp, &header)?.intersection(&indices).count(),
        None => pending.len(),
    };
    println!(
        "{} survivors, {finished} of {} requested tiles finished, written to {}",
        all.len(),
        indices.len(),
        a.out.display()
    );
    Ok(true)
}
