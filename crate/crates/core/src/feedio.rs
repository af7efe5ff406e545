//! Feed ingestion: a minimal RSS 2.0 / Atom reader, feed-list parsing, source
//! loading and the line-delimited corpus format.

use std::collections::HashSet;
use std::path::Path;

use roxmltree::{Document, Node, ParsingOptions};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const ATOM_NS: &str = "http://www.w3.org/2005/Atom";

#[derive(Debug, Error)]
pub enum FeedError {
    #[error("malformed feed: {0}")]
    MalformedFeed(String),
    #[error("feed has no title")]
    MissingTitle,
    #[error("feed list contains no usable entries")]
    EmptyFeedList,
    #[error("source {locator} unavailable: {reason}")]
    SourceUnavailable { locator: String, reason: String },
    #[error("corrupt corpus record on line {line}: {reason}")]
    CorruptRecord { line: usize, reason: String },
    #[error("invalid document {title:?}: {reason}")]
    InvalidDocument { title: String, reason: String },
}

/// One parsed blog feed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedDocument {
    pub title: String,
    pub description: String,
    pub post_titles: Vec<String>,
    pub summaries: Vec<String>,
}

impl FeedDocument {
    pub fn validate(&self) -> Result<(), FeedError> {
        let invalid = |reason: &str| FeedError::InvalidDocument {
            title: self.title.clone(),
            reason: reason.to_string(),
        };
        if self.title.trim().is_empty() {
            return Err(invalid("empty title"));
        }
        if self.post_titles.iter().chain(&self.summaries).any(|s| has_markup(s)) {
            return Err(invalid("post text contains markup"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedList {
    pub entries: Vec<String>,
}

pub fn read_feed_list(raw: &str) -> Result<FeedList, FeedError> {
    let mut seen = HashSet::new();
    let entries: Vec<String> = raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter(|l| seen.insert(l.to_string()))
        .map(str::to_string)
        .collect();
    if entries.is_empty() {
        return Err(FeedError::EmptyFeedList);
    }
    Ok(FeedList { entries })
}

/// Removes every `<...>` sequence. An unmatched `<` is kept verbatim.
pub fn strip_tags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        match rest[open..].find('>') {
            Some(close) => {
                out.push_str(&rest[..open]);
                rest = &rest[open + close + 1..];
            }
            None => break,
        }
    }
    out.push_str(rest);
    out
}

fn has_markup(text: &str) -> bool {
    text.find('<').is_some_and(|open| text[open..].contains('>'))
}

/// Decodes the five predefined XML entities and numeric character references.
/// Unknown entities are left as they are.
pub fn decode_entities(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        let decoded = tail.find(';').filter(|&semi| semi <= 10).and_then(|semi| {
            let name = &tail[1..semi];
            let ch = match name {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                _ => {
                    let num = name.strip_prefix('#')?;
                    let code = match num.strip_prefix(['x', 'X']) {
                        Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                        None => num.parse().ok()?,
                    };
                    char::from_u32(code)
                }
            };
            ch.map(|c| (c, semi))
        });
        match decoded {
            Some((c, semi)) => {
                out.push(c);
                rest = &tail[semi + 1..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// Text content of an element with markup stripped, entities decoded and
/// whitespace collapsed.
fn clean_text(node: Node<'_, '_>) -> String {
    let raw: String = node
        .descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect();
    let text = strip_tags(&decode_entities(&strip_tags(&raw)));
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn child<'a, 'input>(node: Node<'a, 'input>, name: &str) -> Option<Node<'a, 'input>> {
    node.children().find(|c| c.is_element() && c.tag_name().name() == name)
}

fn children<'a, 'input>(node: Node<'a, 'input>, name: &'a str) -> impl Iterator<Item = Node<'a, 'input>> + 'a {
    node.children()
        .filter(move |c| c.is_element() && c.tag_name().name() == name)
}

pub fn parse_feed(raw: &[u8]) -> Result<FeedDocument, FeedError> {
    let text = std::str::from_utf8(raw).map_err(|e| FeedError::MalformedFeed(e.to_string()))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let opts = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    let doc = Document::parse_with_options(text, opts).map_err(|e| FeedError::MalformedFeed(e.to_string()))?;
    let root = doc.root_element();

    let (channel, title_tag, desc_tag, item_tag, body_tags): (_, _, _, _, &[&str]) = match root.tag_name().name() {
        "rss" => {
            let channel =
                child(root, "channel").ok_or_else(|| FeedError::MalformedFeed("rss without channel".into()))?;
            (channel, "title", "description", "item", &["description"])
        }
        "feed" if matches!(root.tag_name().namespace(), None | Some(ATOM_NS)) => {
            (root, "title", "subtitle", "entry", &["summary", "content"])
        }
        other => return Err(FeedError::MalformedFeed(format!("unrecognized root element <{other}>"))),
    };

    let title = child(channel, title_tag).map(clean_text).unwrap_or_default();
    if title.is_empty() {
        return Err(FeedError::MissingTitle);
    }
    let description = child(channel, desc_tag).map(clean_text).unwrap_or_default();

    let mut post_titles = Vec::new();
    let mut summaries = Vec::new();
    for item in children(channel, item_tag) {
        if let Some(t) = child(item, "title") {
            post_titles.push(clean_text(t));
        }
        if let Some(body) = body_tags.iter().find_map(|tag| child(item, tag)) {
            summaries.push(clean_text(body));
        }
    }

    Ok(FeedDocument {
        title,
        description,
        post_titles,
        summaries,
    })
}

/// Reads feed sources. HTTP(S) locators are only fetched when networking is
/// enabled and the crate is built with the `http` feature.
#[derive(Debug, Clone, Copy, Default)]
pub struct SourceLoader {
    pub allow_network: bool,
}

impl SourceLoader {
    pub fn new(allow_network: bool) -> Self {
        Self { allow_network }
    }

    pub fn load(&self, locator: &str) -> Result<Vec<u8>, FeedError> {
        let unavailable = |reason: String| FeedError::SourceUnavailable {
            locator: locator.to_string(),
            reason,
        };
        if is_url(locator) {
            if !self.allow_network {
                return Err(unavailable("networking disabled".into()));
            }
            return fetch(locator).map_err(unavailable);
        }
        std::fs::read(Path::new(locator)).map_err(|e| unavailable(e.to_string()))
    }
}

fn is_url(locator: &str) -> bool {
    let lower = locator.to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://")
}

#[cfg(feature = "http")]
fn fetch(url: &str) -> Result<Vec<u8>, String> {
    let mut resp = ureq::get(url).call().map_err(|e| e.to_string())?;
    resp.body_mut().read_to_vec().map_err(|e| e.to_string())
}

#[cfg(not(feature = "http"))]
fn fetch(_url: &str) -> Result<Vec<u8>, String> {
    Err("built without the `http` feature".into())
}

/// One JSON object per line, in input order.
pub fn write_corpus(docs: &[FeedDocument]) -> Result<Vec<u8>, FeedError> {
    let mut out = Vec::new();
    for doc in docs {
        doc.validate()?;
        serde_json::to_writer(&mut out, doc).expect("serializing plain strings cannot fail");
        out.push(b'\n');
    }
    Ok(out)
}

pub fn read_corpus(raw: &[u8]) -> Result<Vec<FeedDocument>, FeedError> {
    let text = std::str::from_utf8(raw).map_err(|e| FeedError::CorruptRecord {
        line: 1 + raw[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        reason: e.to_string(),
    })?;
    let mut docs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let corrupt = |reason: String| FeedError::CorruptRecord { line: idx + 1, reason };
        let doc: FeedDocument = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
        doc.validate().map_err(|e| corrupt(e.to_string()))?;
        docs.push(doc);
    }
    Ok(docs)
}
