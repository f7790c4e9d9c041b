//! Shared input generators for the benchmarks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use screenwright_core::ingest::Utterance;
use screenwright_core::Episode;

/// A reproducible soap-sized episode: `n_utterances` spread over `duration_s`.
pub fn synthetic_episode(seed: u64, n_utterances: usize, duration_s: f64) -> Episode {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slot = duration_s / n_utterances as f64;
    let utterances = (0..n_utterances)
        .map(|i| {
            let base = i as f64 * slot;
            let start = base + rng.gen_range(0.0..slot * 0.3);
            let end = (start + rng.gen_range(slot * 0.2..slot * 0.6)).min(duration_s);
            Utterance {
                speaker: format!("SPEAKER{}", i % 6),
                text: "They keep talking about the ledger in the study.".into(),
                start_s: start,
                end_s: end,
            }
        })
        .collect();
    Episode {
        id: "bench-ep".into(),
        video_path: None,
        duration_s,
        utterances,
        references: vec![],
    }
}

/// Deterministic word soup of `n_words` over a small vocabulary.
pub fn word_soup(seed: u64, n_words: usize) -> String {
    const VOCAB: [&str; 16] = [
        "mara", "ellis", "june", "victor", "marina", "ledger", "study", "wine", "box", "drawer",
        "says", "leaves", "calls", "watches", "argues", "waits",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words = Vec::with_capacity(n_words);
    for i in 0..n_words {
        words.push(VOCAB[rng.gen_range(0..VOCAB.len())]);
        if i % 12 == 11 {
            words.push("END.");
        }
    }
    words.join(" ")
}
