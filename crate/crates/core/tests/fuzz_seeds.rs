//! Runs the fuzz entry points over the checked-in corpus, then over seeded
//! byte-level mutations of it.

use std::path::PathBuf;

use metachain::fuzzing;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Entry = fn(&[u8]);

const TARGETS: [(&str, Entry); 5] = [
    ("parse_json_graph", fuzzing::json_graph),
    ("parse_tsv_graph", fuzzing::tsv_graph),
    ("parse_weight", fuzzing::weight),
    ("parse_stop", fuzzing::stop),
    ("parse_grid", fuzzing::grid),
];

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fuzz", "corpus", target]
        .iter()
        .collect();
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files.iter().map(|p| std::fs::read(p).unwrap()).collect()
}

#[test]
fn every_target_has_seeds_and_accepts_them() {
    for (name, entry) in TARGETS {
        let s = seeds(name);
        assert!(s.len() >= 5, "{name}: only {} seeds", s.len());
        for data in &s {
            entry(data);
        }
    }
}

fn mutate(rng: &mut ChaCha8Rng, data: &[u8], dict: &[u8]) -> Vec<u8> {
    let mut out = data.to_vec();
    for _ in 0..rng.random_range(1..4) {
        let at = rng.random_range(0..=out.len());
        match rng.random_range(0..4) {
            0 if !out.is_empty() => {
                out.remove(at.min(out.len() - 1));
            }
            1 => out.insert(at, dict[rng.random_range(0..dict.len())]),
            2 if !out.is_empty() => {
                let i = at.min(out.len() - 1);
                out[i] = dict[rng.random_range(0..dict.len())];
            }
            _ => {
                // duplicate a slice
                let end = (at + rng.random_range(0..8)).min(out.len());
                let piece = out[at.min(end)..end].to_vec();
                out.splice(at.min(end)..at.min(end), piece);
            }
        }
    }
    out
}

#[test]
fn mutated_seeds_never_break_invariants() {
    let dict = b"0123456789./-+:,\t\n{}[]\"@abcdefsUkaptox e";
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (name, entry) in TARGETS {
        let s = seeds(name);
        for _ in 0..2000 {
            let base = &s[rng.random_range(0..s.len())];
            let data = mutate(&mut rng, base, dict);
            let r = std::panic::catch_unwind(|| entry(&data));
            assert!(r.is_ok(), "{name} panicked on {:?}", String::from_utf8_lossy(&data));
        }
    }
}
