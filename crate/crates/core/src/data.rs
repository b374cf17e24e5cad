//! Bundled fixture data.

pub const MAP_JSON: &str = include_str!("../data/map.json");
pub const LEXICON_JSON: &str = include_str!("../data/lexicon.json");
pub const SEED_CORPUS_JSON: &str = include_str!("../data/seed_corpus.json");
pub const EMBEDDINGS_JSON: &str = include_str!("../data/embeddings.json");
pub const TEMPLATES_JSON: &str = include_str!("../data/templates.json");
