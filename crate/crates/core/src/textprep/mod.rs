//! Tokenizing, stop-word filtering, stemming and location-weighted word
//! counting of feed documents.

mod porter;

use std::collections::{BTreeMap, HashSet};

use log::{info, warn};
use thiserror::Error;

use crate::exec::{self, Exec};
use crate::feedio::{parse_feed, FeedDocument, FeedError, FeedList, SourceLoader};

pub use porter::porter_stem;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("no feed could be loaded")]
    EmptyCorpus,
}

/// Token → accumulated weight.
pub type WordCounts = BTreeMap<String, u64>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWordSet {
    words: HashSet<String>,
}

impl StopWordSet {
    /// One word per line; blank lines are skipped and entries lowercased.
    pub fn from_text(raw: &str) -> Self {
        raw.lines().collect()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl<'a> FromIterator<&'a str> for StopWordSet {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let words = iter
            .into_iter()
            .map(|w| w.trim().to_lowercase())
            .filter(|w| !w.is_empty() && !w.contains(char::is_whitespace))
            .collect();
        Self { words }
    }
}

/// Weights added per occurrence, by where in the feed a word appears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightConfig {
    pub description: u64,
    pub post_title: u64,
    pub word: u64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            description: 10,
            post_title: 3,
            word: 1,
        }
    }
}

/// Blog title → word counts, ordered by title.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BlogsContent {
    pub entries: BTreeMap<String, WordCounts>,
}

impl BlogsContent {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Splits on every run of characters that are not ASCII alphanumeric and
/// lowercases the pieces.
pub fn separate_words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_ascii_lowercase)
        .collect()
}

fn add_tokens(counts: &mut WordCounts, text: &str, stop: &StopWordSet, weight: u64) {
    for token in separate_words(text) {
        // the stop list is checked against the raw token, before stemming
        if stop.contains(&token) {
            continue;
        }
        *counts.entry(porter_stem(&token)).or_insert(0) += weight;
    }
}

pub fn word_count(doc: &FeedDocument, stop: &StopWordSet, weights: &WeightConfig) -> WordCounts {
    let mut counts = WordCounts::new();
    add_tokens(&mut counts, &doc.description, stop, weights.description);
    for title in &doc.post_titles {
        add_tokens(&mut counts, title, stop, weights.post_title);
    }
    for summary in &doc.summaries {
        add_tokens(&mut counts, summary, stop, weights.word);
    }
    counts.retain(|_, w| *w > 0);
    counts
}

/// Outcome of loading one locator from a feed list.
#[derive(Debug)]
pub enum SourceOutcome {
    Parsed(FeedDocument),
    Skipped(FeedError),
}

/// Loads and parses every locator, in list order. Failures are reported per
/// source and never abort the run.
pub fn fetch_documents(list: &FeedList, loader: &SourceLoader, exec: Exec) -> Vec<(String, SourceOutcome)> {
    exec::map_ordered(exec, &list.entries, |locator| {
        let outcome = match loader.load(locator).and_then(|raw| parse_feed(&raw)) {
            Ok(doc) => SourceOutcome::Parsed(doc),
            Err(e) => {
                warn!("Failed to fetch the feed {locator}: {e}");
                SourceOutcome::Skipped(e)
            }
        };
        (locator.clone(), outcome)
    })
}

/// Word counts per blog title. A later document with a title already seen
/// replaces the earlier one.
pub fn blogs_content(docs: &[FeedDocument], stop: &StopWordSet, weights: &WeightConfig) -> BlogsContent {
    let mut content = BlogsContent::default();
    for doc in docs {
        let counts = word_count(doc, stop, weights);
        if content.entries.insert(doc.title.clone(), counts).is_some() {
            warn!("duplicate blog title {:?}; keeping the later feed", doc.title);
        }
    }
    content
}

pub fn get_feeds_content(
    list: &FeedList,
    stop: &StopWordSet,
    weights: &WeightConfig,
    loader: &SourceLoader,
) -> Result<BlogsContent, TextError> {
    let docs: Vec<FeedDocument> = fetch_documents(list, loader, Exec::default())
        .into_iter()
        .filter_map(|(_, outcome)| match outcome {
            SourceOutcome::Parsed(doc) => Some(doc),
            SourceOutcome::Skipped(_) => None,
        })
        .collect();
    info!("parsed {} of {} feeds", docs.len(), list.entries.len());
    if docs.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    Ok(blogs_content(&docs, stop, weights))
}
