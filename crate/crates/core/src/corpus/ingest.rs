//! File-based ingestion.
//!
//! Timelines and individual metadata arrive as UTF-8 line-delimited JSON,
//! one record per line. Malformed lines are skipped and counted; an author
//! whose timeline contains a duplicate post id is rejected outright.

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::Deserialize;

use super::{AuthorId, CorpusError, Group, IndividualRecord, Post, PostId};

/// Ingestion result: validated records plus diagnostics.
#[derive(Debug)]
pub struct Ingest {
    pub records: Vec<IndividualRecord>,
    /// Lines that failed to parse or violated a field invariant.
    pub skipped_lines: usize,
    /// Authors rejected wholesale, with the reason.
    pub rejected: Vec<(AuthorId, String)>,
}

#[derive(Deserialize)]
struct MetadataLine {
    author_id: AuthorId,
    n_posts: u64,
    n_likes: u64,
    n_followers: u64,
    n_followees: u64,
    account_created: DateTime<Utc>,
}

fn open(path: &Path) -> Result<BufReader<File>, CorpusError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })
}

/// Read one timeline file and one metadata file into validated records
/// tagged with `group`.
///
/// Timelines come back sorted by `(timestamp, post_id)`. A post line is
/// skipped when it is not valid JSON, when its timestamp is not a valid
/// ISO-8601 instant, or when `is_reply` disagrees with the presence of
/// `reply_to_post_id`. Authors with duplicate post ids, or with posts but
/// no metadata line, are rejected with a diagnostic.
pub fn ingest_timelines(
    timeline_path: &Path,
    metadata_path: &Path,
    group: Group,
) -> Result<Ingest, CorpusError> {
    let mut skipped_lines = 0usize;
    let mut rejected = Vec::new();

    let mut metadata: BTreeMap<AuthorId, MetadataLine> = BTreeMap::new();
    for line in open(metadata_path)?.lines() {
        let line = line.map_err(|source| CorpusError::Io {
            path: metadata_path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<MetadataLine>(&line) {
            Ok(meta) => {
                metadata.insert(meta.author_id.clone(), meta);
            }
            Err(_) => skipped_lines += 1,
        }
    }

    let mut timelines: BTreeMap<AuthorId, Vec<Post>> = BTreeMap::new();
    for line in open(timeline_path)?.lines() {
        let line = line.map_err(|source| CorpusError::Io {
            path: timeline_path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Post>(&line) {
            Ok(post) if post.is_reply == post.reply_to_post_id.is_some() => {
                timelines.entry(post.author_id.clone()).or_default().push(post);
            }
            _ => skipped_lines += 1,
        }
    }

    let mut records = Vec::with_capacity(metadata.len());
    for (author_id, mut timeline) in timelines {
        let Some(meta) = metadata.remove(&author_id) else {
            rejected.push((author_id, "no metadata record".into()));
            continue;
        };
        timeline.sort_by(|a, b| (a.timestamp, &a.post_id).cmp(&(b.timestamp, &b.post_id)));
        let mut seen: HashSet<&PostId> = HashSet::with_capacity(timeline.len());
        if !timeline.iter().all(|p| seen.insert(&p.post_id)) {
            rejected.push((author_id, "duplicate post_id in timeline".into()));
            continue;
        }
        records.push(IndividualRecord {
            author_id: meta.author_id,
            n_posts: meta.n_posts,
            n_likes: meta.n_likes,
            n_followers: meta.n_followers,
            n_followees: meta.n_followees,
            account_created: meta.account_created,
            timeline,
            group,
            anchor_date: None,
            pre_window: Vec::new(),
            post_window: Vec::new(),
        });
    }
    // Metadata-only authors keep an empty timeline; downstream minimum-data
    // filters decide their fate.
    for (_, meta) in metadata {
        records.push(IndividualRecord {
            author_id: meta.author_id,
            n_posts: meta.n_posts,
            n_likes: meta.n_likes,
            n_followers: meta.n_followers,
            n_followees: meta.n_followees,
            account_created: meta.account_created,
            timeline: Vec::new(),
            group,
            anchor_date: None,
            pre_window: Vec::new(),
            post_window: Vec::new(),
        });
    }
    records.sort_by(|a, b| a.author_id.cmp(&b.author_id));

    Ok(Ingest {
        records,
        skipped_lines,
        rejected,
    })
}

/// Read a story-post id list: one id per line, `#` comments allowed.
pub fn read_story_ids(path: &Path) -> Result<HashSet<PostId>, CorpusError> {
    let mut ids = HashSet::new();
    for line in open(path)?.lines() {
        let line = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        ids.insert(PostId(trimmed.to_owned()));
    }
    Ok(ids)
}
