use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use super::corpus::EntryMeta;
use super::CampaignResult;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// `{ordinal:06}-{8 hex digits of the content hash}`.
pub fn entry_file_name(ordinal: usize, input: &[u8]) -> String {
    let h = fnv1a(input);
    format!("{ordinal:06}-{:08x}", (h ^ (h >> 32)) as u32)
}

/// Paths of everything [`write_campaign`] produced.
#[derive(Clone, Debug)]
pub struct CampaignFiles {
    pub corpus_dir: PathBuf,
    pub crashes_dir: PathBuf,
    pub crashes_json: PathBuf,
    pub stats_jsonl: PathBuf,
    pub timing_json: PathBuf,
}

/// Layout under `dir`:
/// `corpus/` (one file per entry plus `index.json`), `crashes/` (one file
/// per call-stack hash), `crashes.json`, `stats.jsonl`, `timing.json`.
pub fn write_campaign(dir: &Path, r: &CampaignResult) -> io::Result<CampaignFiles> {
    let files = CampaignFiles {
        corpus_dir: dir.join("corpus"),
        crashes_dir: dir.join("crashes"),
        crashes_json: dir.join("crashes.json"),
        stats_jsonl: dir.join("stats.jsonl"),
        timing_json: dir.join("timing.json"),
    };
    fs::create_dir_all(&files.corpus_dir)?;
    fs::create_dir_all(&files.crashes_dir)?;

    let mut index = Vec::new();
    for (i, e) in r.corpus.entries().iter().enumerate() {
        let name = entry_file_name(i, &e.input);
        fs::write(files.corpus_dir.join(&name), &e.input)?;
        index.push(EntryMeta {
            ordinal: i,
            file: name,
            len: e.input.len(),
            steps: e.steps,
            new_indices: e.novelty.new_indices,
            new_buckets: e.novelty.new_buckets,
            found_at: e.found_at,
        });
    }
    fs::write(files.corpus_dir.join("index.json"), to_json(&index)?)?;

    let crashes: Vec<_> = r.crashes.iter().collect();
    for c in &crashes {
        fs::write(files.crashes_dir.join(format!("{:016x}", c.hash)), &c.input)?;
    }
    fs::write(&files.crashes_json, to_json(&crashes)?)?;

    let mut stats = io::BufWriter::new(fs::File::create(&files.stats_jsonl)?);
    for rec in &r.stats.series {
        serde_json::to_writer(&mut stats, rec)?;
        stats.write_all(b"\n")?;
    }
    stats.flush()?;
    fs::write(&files.timing_json, to_json(&r.timing)?)?;
    Ok(files)
}

fn to_json<T: serde::Serialize + ?Sized>(v: &T) -> io::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Regular files of `dir` sorted by name, skipping dot-files and `*.json`.
pub fn read_corpus_dir(dir: &Path) -> io::Result<Vec<Vec<u8>>> {
    let mut names = Vec::new();
    for e in fs::read_dir(dir)? {
        let e = e?;
        let name = e.file_name().to_string_lossy().into_owned();
        if !e.file_type()?.is_file() || name.starts_with('.') || name.ends_with(".json") {
            continue;
        }
        names.push(name);
    }
    names.sort();
    names.iter().map(|n| fs::read(dir.join(n))).collect()
}
