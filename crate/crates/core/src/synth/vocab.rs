//! Fixed synthetic vocabulary and the measurement resources built on it.
//!
//! Category token sets are mutually disjoint so injected effects on one
//! measure never bleed into another: affect words drive the affect
//! lexicon category, each symptom label has its own vocabulary and an
//! exact-match classifier, topic words drive the embedding clusters, and
//! the neutral pool carries the aggregate lexicon categories.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::substream;
use crate::text_features::{EmbeddingTable, Lexicon, LinearTextModel};

pub const SYMPTOM_LABELS: [&str; 4] = ["anxiety", "depression", "stress", "suicidal_ideation"];

pub const AFFECT_WORDS: [&str; 14] = [
    "happy", "glad", "hopeful", "relieved", "grateful", "calm", "proud", "joyful", "cheerful",
    "content", "sad", "upset", "angry", "afraid",
];

pub const ANXIETY_WORDS: [&str; 8] = [
    "anxious", "worried", "panic", "nervous", "uneasy", "restless", "dread", "jittery",
];

pub const DEPRESSION_WORDS: [&str; 8] = [
    "hopeless", "empty", "worthless", "numb", "drained", "miserable", "gloomy", "despair",
];

pub const STRESS_WORDS: [&str; 8] = [
    "overwhelmed", "pressure", "deadline", "exhausted", "burnout", "tense", "swamped", "frazzled",
];

pub const IDEATION_WORDS: [&str; 8] = [
    "ideation", "suicidal", "crisis", "hotline", "lifeline", "intrusive", "spiral", "darkest",
];

pub const COGNITION_WORDS: [&str; 10] = [
    "think", "thought", "realize", "understand", "because", "reason", "wonder", "notice",
    "believe", "idea",
];

pub const SOCIAL_WORDS: [&str; 10] = [
    "friend", "family", "team", "people", "community", "home", "school", "neighbor", "crowd",
    "colleague",
];

pub const LEXICAL_WORDS: [&str; 10] = [
    "really", "very", "quite", "just", "maybe", "also", "still", "again", "almost", "enough",
];

pub const INTERPERSONAL_WORDS: [&str; 5] = ["i", "you", "we", "me", "they"];

pub const TEMPORAL_WORDS: [&str; 10] = [
    "today", "yesterday", "tomorrow", "soon", "later", "morning", "evening", "weekend", "month",
    "year",
];

pub const FILLER_WORDS: [&str; 12] = [
    "coffee", "window", "garden", "street", "book", "river", "photo", "dinner", "bicycle",
    "weather", "don't", "it's",
];

pub const TOPICS: [[&str; 10]; 6] = [
    [
        "guitar", "concert", "album", "melody", "playlist", "chorus", "drummer", "vinyl",
        "lyrics", "festival",
    ],
    [
        "match", "goal", "league", "coach", "stadium", "training", "defense", "striker",
        "tournament", "referee",
    ],
    [
        "recipe", "kitchen", "pasta", "bakery", "flavor", "roast", "spice", "salad", "dessert",
        "picnic",
    ],
    [
        "cinema", "trailer", "director", "sequel", "actor", "screenplay", "premiere", "subtitle",
        "documentary", "soundtrack",
    ],
    [
        "airport", "luggage", "passport", "hostel", "itinerary", "beach", "mountain", "museum",
        "souvenir", "voyage",
    ],
    [
        "console", "puzzle", "quest", "arcade", "multiplayer", "pixel", "strategy", "dungeon",
        "joystick", "tutorial",
    ],
];

pub fn symptom_words(label: &str) -> &'static [&'static str] {
    match label {
        "anxiety" => &ANXIETY_WORDS,
        "depression" => &DEPRESSION_WORDS,
        "stress" => &STRESS_WORDS,
        "suicidal_ideation" => &IDEATION_WORDS,
        other => panic!("unknown symptom label {other}"),
    }
}

/// Neutral pool: the aggregate-category sets plus filler.
pub fn neutral_words() -> Vec<&'static str> {
    COGNITION_WORDS
        .iter()
        .chain(SOCIAL_WORDS.iter())
        .chain(LEXICAL_WORDS.iter())
        .chain(INTERPERSONAL_WORDS.iter())
        .chain(TEMPORAL_WORDS.iter())
        .chain(FILLER_WORDS.iter())
        .copied()
        .collect()
}

/// Tokens carried by the embedding table. Affect and symptom words are
/// deliberately absent: topic diversity should reflect what people talk
/// about, not how often emotion or symptom vocabulary shows up, so post
/// vectors are built from topical and neutral tokens only.
fn embedded_tokens() -> Vec<&'static str> {
    let mut tokens = neutral_words();
    for topic in &TOPICS {
        tokens.extend(topic.iter().copied());
    }
    tokens
}

/// The stand-in lexicon: the affect category plus the five aggregates.
/// One prefix pattern exercises the wildcard path.
pub fn build_lexicon() -> Lexicon {
    let owned = |words: &[&str]| words.iter().map(|w| w.to_string()).collect::<Vec<_>>();
    let mut affect = owned(&AFFECT_WORDS);
    // "cheer*" subsumes "cheerful"; keep both forms to test dedup-free counting
    affect.push("cheer*".into());
    Lexicon::new(
        "synthetic",
        vec![
            ("affect".into(), affect),
            ("cognition_perception".into(), owned(&COGNITION_WORDS)),
            ("social_context".into(), owned(&SOCIAL_WORDS)),
            ("lexical_density_awareness".into(), owned(&LEXICAL_WORDS)),
            ("interpersonal_focus".into(), owned(&INTERPERSONAL_WORDS)),
            ("temporal_references".into(), owned(&TEMPORAL_WORDS)),
        ],
    )
    .expect("fixed lexicon is valid")
}

/// One exact-match classifier per symptom label: weight 1 per label
/// token, bias -0.5, so a post is flagged iff it contains any of them.
pub fn build_classifiers() -> Vec<LinearTextModel> {
    SYMPTOM_LABELS
        .iter()
        .map(|label| {
            let words = symptom_words(label);
            let vocabulary: HashMap<String, usize> =
                words.iter().enumerate().map(|(i, w)| (w.to_string(), i)).collect();
            LinearTextModel::new(*label, vocabulary, vec![1.0; words.len()], -0.5)
                .expect("fixed classifier is valid")
        })
        .collect()
}

pub const EMBEDDING_DIM: usize = 12;

/// Deterministic embedding table over the whole synthetic vocabulary:
/// topic words cluster around a per-topic direction, everything else
/// scatters. Independent of the cohort seed so resources are identical
/// across runs.
pub fn build_embeddings() -> EmbeddingTable {
    let mut rng = substream(0x5EED_BEEF, "synth-embeddings");
    let mut vectors: HashMap<String, Vec<f64>> = HashMap::new();

    let mut tokens = embedded_tokens();
    tokens.sort_unstable();
    tokens.dedup();
    let topic_of = |token: &str| -> Option<usize> {
        TOPICS.iter().position(|words| words.contains(&token))
    };

    for token in tokens {
        let noise: Vec<f64> =
            (0..EMBEDDING_DIM).map(|_| StandardNormal.sample(&mut rng)).collect();
        let v: Vec<f64> = match topic_of(token) {
            Some(t) => (0..EMBEDDING_DIM)
                .map(|d| if d == t * 2 { 2.0 } else { 0.0 } + 0.3 * noise[d])
                .collect(),
            None => noise.iter().map(|x| 0.8 * x).collect(),
        };
        vectors.insert(token.to_string(), v);
    }
    let _ = rng.random::<u64>();
    EmbeddingTable::new(EMBEDDING_DIM, vectors).expect("fixed embeddings are valid")
}
