//! Data model and cohort construction.
//!
//! Houses the post/individual domain types, file ingestion, the keyword
//! pre-filter for candidate story posts, treatment-event extraction,
//! placebo-date assignment for the control group, and observation-window
//! carving around each individual's anchor date.

mod ingest;
mod placebo;
mod windows;

pub use ingest::{ingest_timelines, read_story_ids, Ingest};
pub use placebo::{assign_placebo_dates, PlaceboAssignment};
pub use windows::carve_windows;

use std::collections::HashSet;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("keyword filter requires both phrase sets to be non-empty")]
    EmptyKeywordSet,
    #[error("no treatment dates available for placebo assignment")]
    NoTreatmentDates,
}

/// Opaque author identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AuthorId(pub String);

impl fmt::Display for AuthorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AuthorId {
    fn from(s: &str) -> Self {
        AuthorId(s.to_owned())
    }
}

/// Opaque post identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PostId(pub String);

impl fmt::Display for PostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PostId {
    fn from(s: &str) -> Self {
        PostId(s.to_owned())
    }
}

/// Cohort label in the causal-inference sense: `Treatment` individuals
/// replied to a story post, `Control` individuals did not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Treatment,
    Control,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Treatment => f.write_str("treatment"),
            Group::Control => f.write_str("control"),
        }
    }
}

/// One timeline entry.
///
/// `is_reply` is true exactly when `reply_to_post_id` is present; ingestion
/// rejects lines violating that.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub post_id: PostId,
    pub author_id: AuthorId,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub is_reply: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply_to_post_id: Option<PostId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply_to_author_id: Option<AuthorId>,
}

/// An author's platform metadata, timeline, and study state.
///
/// `timeline` is sorted ascending by timestamp with unique post ids.
/// Once an anchor date is set and windows are carved, `pre_window` holds
/// the posts in `[anchor - W, anchor)` and `post_window` the posts in
/// `(anchor, anchor + W]`; the anchor instant itself belongs to neither.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndividualRecord {
    pub author_id: AuthorId,
    pub n_posts: u64,
    pub n_likes: u64,
    pub n_followers: u64,
    pub n_followees: u64,
    pub account_created: DateTime<Utc>,
    pub timeline: Vec<Post>,
    pub group: Group,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_date: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pre_window: Vec<Post>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub post_window: Vec<Post>,
}

impl IndividualRecord {
    /// Timestamps of the individual's reply posts.
    pub fn reply_times(&self) -> impl Iterator<Item = DateTime<Utc>> + '_ {
        self.timeline
            .iter()
            .filter(|p| p.is_reply)
            .map(|p| p.timestamp)
    }
}

/// The two conjunctive phrase sets of the candidate-story pre-filter.
///
/// A post is retained when its lowercased text contains at least one
/// phrase from each set. Matching is case-insensitive raw substring
/// search, mirroring platform phrase-search semantics; there is no
/// tokenization step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeywordFilterSpec {
    pub required_set_a: Vec<String>,
    pub required_set_b: Vec<String>,
}

impl KeywordFilterSpec {
    pub fn new(
        required_set_a: Vec<String>,
        required_set_b: Vec<String>,
    ) -> Result<Self, CorpusError> {
        if required_set_a.is_empty() || required_set_b.is_empty() {
            return Err(CorpusError::EmptyKeywordSet);
        }
        Ok(Self {
            required_set_a,
            required_set_b,
        })
    }
}

/// Pluggable story-post classifier hook.
///
/// The production classifier is an external model; studies normally feed
/// its output in as a story-id list. The hook exists so a bespoke
/// classifier can be slotted into the candidate-filter path.
pub trait StoryClassifier {
    fn is_story(&self, post: &Post) -> bool;
}

/// Accepts every candidate; the default when story annotation happens
/// outside the pipeline.
#[derive(Debug, Clone, Copy, Default)]
pub struct AcceptAll;

impl StoryClassifier for AcceptAll {
    fn is_story(&self, _post: &Post) -> bool {
        true
    }
}

/// Retain the posts whose lowercased text contains at least one phrase
/// from set A and at least one from set B.
pub fn keyword_filter(posts: &[Post], spec: &KeywordFilterSpec) -> Vec<Post> {
    let set_a: Vec<String> = spec.required_set_a.iter().map(|p| p.to_lowercase()).collect();
    let set_b: Vec<String> = spec.required_set_b.iter().map(|p| p.to_lowercase()).collect();
    posts
        .iter()
        .filter(|post| {
            let text = post.text.to_lowercase();
            set_a.iter().any(|p| text.contains(p.as_str()))
                && set_b.iter().any(|p| text.contains(p.as_str()))
        })
        .cloned()
        .collect()
}

/// Outcome of scanning a timeline for replies to story posts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreatmentEvent {
    /// No reply to any story post.
    Absent,
    /// Exactly one story reply; its timestamp is the anchor date.
    Unique(DateTime<Utc>),
    /// Replies to more than one story post; the individual is excluded
    /// from the study to avoid stacked exposures.
    Multiple(usize),
}

/// Find the unique reply to a story post in the record's timeline.
pub fn extract_treatment_event(
    record: &IndividualRecord,
    story_post_ids: &HashSet<PostId>,
) -> TreatmentEvent {
    let mut hits = record.timeline.iter().filter(|p| {
        p.reply_to_post_id
            .as_ref()
            .is_some_and(|id| story_post_ids.contains(id))
    });
    match (hits.next(), hits.next()) {
        (None, _) => TreatmentEvent::Absent,
        (Some(first), None) => TreatmentEvent::Unique(first.timestamp),
        (Some(_), Some(_)) => TreatmentEvent::Multiple(2 + hits.count()),
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use chrono::TimeZone;

    pub(crate) fn post(id: &str, author: &str, ts: &str, text: &str) -> Post {
        Post {
            post_id: PostId(id.into()),
            author_id: AuthorId(author.into()),
            timestamp: ts.parse().unwrap(),
            text: text.into(),
            is_reply: false,
            reply_to_post_id: None,
            reply_to_author_id: None,
        }
    }

    pub(crate) fn reply(id: &str, author: &str, ts: &str, to: &str) -> Post {
        Post {
            is_reply: true,
            reply_to_post_id: Some(PostId(to.into())),
            reply_to_author_id: Some(AuthorId("other".into())),
            ..post(id, author, ts, "a reply")
        }
    }

    pub(crate) fn record(author: &str, timeline: Vec<Post>, group: Group) -> IndividualRecord {
        IndividualRecord {
            author_id: AuthorId(author.into()),
            n_posts: timeline.len() as u64,
            n_likes: 10,
            n_followers: 20,
            n_followees: 30,
            account_created: Utc.with_ymd_and_hms(2017, 1, 1, 0, 0, 0).unwrap(),
            timeline,
            group,
            anchor_date: None,
            pre_window: Vec::new(),
            post_window: Vec::new(),
        }
    }
}
