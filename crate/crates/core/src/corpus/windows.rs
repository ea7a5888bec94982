//! Observation-window carving.

use chrono::Duration;

use super::IndividualRecord;

/// Populate `pre_window` and `post_window` from the timeline.
///
/// The pre-window covers `[anchor - W, anchor)` and the post-window
/// `(anchor, anchor + W]` with `W = window_days`; a post at the anchor
/// instant (the treatment reply itself) lands in neither, keeping the
/// treatment act out of the outcome measurements.
///
/// No-op when the anchor date is unset. Empty windows are allowed; the
/// minimum-data filters downstream deal with them.
pub fn carve_windows(record: &mut IndividualRecord, window_days: u32) {
    let Some(anchor) = record.anchor_date else {
        return;
    };
    let w = Duration::days(i64::from(window_days));
    record.pre_window = record
        .timeline
        .iter()
        .filter(|p| p.timestamp >= anchor - w && p.timestamp < anchor)
        .cloned()
        .collect();
    record.post_window = record
        .timeline
        .iter()
        .filter(|p| p.timestamp > anchor && p.timestamp <= anchor + w)
        .cloned()
        .collect();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::{post, record};
    use crate::corpus::Group;
    use chrono::{DateTime, Utc};

    fn rec_with_offsets(offsets_hours: &[i64]) -> IndividualRecord {
        let anchor: DateTime<Utc> = "2021-02-01T00:00:00Z".parse().unwrap();
        let posts = offsets_hours
            .iter()
            .enumerate()
            .map(|(i, &h)| {
                let ts = anchor + Duration::hours(h);
                post(&format!("p{i}"), "a", &ts.to_rfc3339(), "text")
            })
            .collect();
        let mut r = record("a", posts, Group::Treatment);
        r.anchor_date = Some(anchor);
        r.timeline.sort_by_key(|p| p.timestamp);
        r
    }

    #[test]
    fn boundary_rules() {
        // -15d, -14d exactly, -1d, anchor, +1h, +14d exactly, +15d
        let mut r = rec_with_offsets(&[-15 * 24, -14 * 24, -24, 0, 1, 14 * 24, 15 * 24]);
        carve_windows(&mut r, 14);
        let pre: Vec<_> = r.pre_window.iter().map(|p| p.post_id.0.as_str()).collect();
        let post_w: Vec<_> = r.post_window.iter().map(|p| p.post_id.0.as_str()).collect();
        assert_eq!(pre, vec!["p1", "p2"], "closed left edge, open right edge");
        assert_eq!(post_w, vec!["p4", "p5"], "open left edge, closed right edge");
    }

    #[test]
    fn anchor_post_is_excluded_from_both() {
        let mut r = rec_with_offsets(&[0]);
        carve_windows(&mut r, 14);
        assert!(r.pre_window.is_empty());
        assert!(r.post_window.is_empty());
    }

    #[test]
    fn windows_are_disjoint_and_bounded() {
        let offsets: Vec<i64> = (-400..400).step_by(7).collect();
        let mut r = rec_with_offsets(&offsets);
        carve_windows(&mut r, 14);
        let anchor = r.anchor_date.unwrap();
        for p in &r.pre_window {
            assert!(p.timestamp < anchor && p.timestamp >= anchor - Duration::days(14));
            assert!(!r.post_window.iter().any(|q| q.post_id == p.post_id));
        }
        for p in &r.post_window {
            assert!(p.timestamp > anchor && p.timestamp <= anchor + Duration::days(14));
        }
    }

    #[test]
    fn unset_anchor_is_a_no_op() {
        let mut r = rec_with_offsets(&[-24, 24]);
        r.anchor_date = None;
        carve_windows(&mut r, 14);
        assert!(r.pre_window.is_empty() && r.post_window.is_empty());
    }
}
