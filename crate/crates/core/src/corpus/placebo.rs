//! Placebo-date assignment for the control group.
//!
//! Each control individual receives a pseudo-treatment date so that the
//! assigned dates follow the empirical distribution of real treatment
//! dates while still falling on a day the control actually replied:
//! a day is drawn from the treatment-date distribution (day granularity)
//! and then mapped to the control's reply day with the smallest absolute
//! day distance, ties resolved toward the earlier day.

use chrono::{DateTime, Datelike, Utc};
use rand::Rng;

use super::{AuthorId, CorpusError, IndividualRecord};
use crate::rng::substream;

/// Assignment result: anchored controls plus the excluded ones.
#[derive(Debug)]
pub struct PlaceboAssignment {
    pub records: Vec<IndividualRecord>,
    /// Controls without a single reply post cannot take a placebo date.
    pub excluded: Vec<(AuthorId, String)>,
}

fn day_number(ts: DateTime<Utc>) -> i64 {
    i64::from(ts.date_naive().num_days_from_ce())
}

/// Draw placebo anchor dates for `controls`, deterministic in `seed`.
///
/// The anchor instant is the control's earliest reply on the chosen day.
/// Records are processed in author-id order so the draw sequence does not
/// depend on input ordering.
pub fn assign_placebo_dates(
    mut controls: Vec<IndividualRecord>,
    treatment_dates: &[DateTime<Utc>],
    seed: u64,
) -> Result<PlaceboAssignment, CorpusError> {
    if treatment_dates.is_empty() {
        return Err(CorpusError::NoTreatmentDates);
    }
    let mut treatment_days: Vec<i64> = treatment_dates.iter().map(|&d| day_number(d)).collect();
    treatment_days.sort_unstable();

    controls.sort_by(|a, b| a.author_id.cmp(&b.author_id));
    let mut rng = substream(seed, "placebo");
    let mut excluded = Vec::new();
    let mut records = Vec::with_capacity(controls.len());

    for mut record in controls {
        // (day, earliest reply instant on that day); timeline order is
        // ascending so the first reply seen on a day is the earliest.
        let mut reply_days: Vec<(i64, DateTime<Utc>)> = Vec::new();
        for post in record.timeline.iter().filter(|p| p.is_reply) {
            let day = day_number(post.timestamp);
            if reply_days.last().map(|&(d, _)| d) != Some(day) {
                reply_days.push((day, post.timestamp));
            }
        }
        if reply_days.is_empty() {
            excluded.push((record.author_id.clone(), "no reply posts".into()));
            continue;
        }

        let drawn = treatment_days[rng.random_range(0..treatment_days.len())];
        let idx = match reply_days.binary_search_by_key(&drawn, |&(d, _)| d) {
            Ok(i) => i,
            Err(i) => {
                // Nearest neighbour among reply days; ties go to the
                // earlier day, hence `<=` on the left candidate.
                if i == 0 {
                    0
                } else if i == reply_days.len() {
                    reply_days.len() - 1
                } else if (drawn - reply_days[i - 1].0) <= (reply_days[i].0 - drawn) {
                    i - 1
                } else {
                    i
                }
            }
        };
        record.anchor_date = Some(reply_days[idx].1);
        records.push(record);
    }

    Ok(PlaceboAssignment { records, excluded })
}
