//! Record generation.
//!
//! Every individual draws an independent RNG sub-stream keyed by the
//! cohort seed and their index, so generation parallelizes without
//! affecting the output. Treatment membership is a weighted sample
//! without replacement: assignment keys favor individuals whose latent
//! trait raises their assignment odds, which is exactly the confounding
//! the matching stage has to undo.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use super::vocab::{
    neutral_words, symptom_words, AFFECT_WORDS, SYMPTOM_LABELS, TOPICS,
};
use super::{GroundTruth, SynthError, SynthSpec, TraitRow};
use crate::corpus::{AuthorId, Group, IndividualRecord, Post, PostId};
use crate::rng::substream_indexed;

/// Days generated beyond each window edge, so boundary rules always have
/// material to act on.
const MARGIN_DAYS: i64 = 3;
/// Per-token probability of drawing from the individual's preferred
/// topics instead of the neutral pool.
const TOPIC_SHARE: f64 = 0.22;
/// Maximum days between consecutive replies in a timeline. Capping the
/// gap (by flipping a post to a reply when it would be exceeded) keeps
/// placebo anchors within a couple of days of their drawn date, so no
/// observation window can ever run past the generated horizon. Applied
/// to both groups alike so reply behavior stays comparable.
const MAX_REPLY_GAP_DAYS: i64 = 4;

fn study_start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap()
}

pub struct SynthCohort {
    pub treatment: Vec<IndividualRecord>,
    pub control: Vec<IndividualRecord>,
    pub truth: GroundTruth,
}

struct IndividualPlan {
    latent_trait: f64,
    assignment_key: f64,
    metadata: (u64, u64, u64, u64),
    account_created: DateTime<Utc>,
    posting_rate: f64,
    reply_odds: f64,
    affect_rate: f64,
    symptom_rates: Vec<f64>,
    preferred_topics: [usize; 2],
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn norm(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn plan_individual(spec: &SynthSpec, index: u64) -> IndividualPlan {
    let mut rng = substream_indexed(spec.seed, "synth-plan", index);
    let u = norm(&mut rng);
    let beta = spec.outcome_confounding;
    let conf = (beta * u).exp();

    let noise = |rng: &mut ChaCha8Rng, sd: f64| -> f64 { (sd * norm(rng)).exp() };

    let n_posts = (180.0 + 70.0 * u + 35.0 * norm(&mut rng)).max(0.0);
    let n_likes = (400.0 + 150.0 * u + 80.0 * norm(&mut rng)).max(0.0);
    let n_followers = (4.6 + 0.8 * u + 0.4 * norm(&mut rng)).exp();
    let n_followees = (5.0 + 0.4 * u + 0.4 * norm(&mut rng)).exp();

    let posting_rate =
        (spec.posting_rate_ln_mean + spec.posting_rate_ln_sd * norm(&mut rng)).exp() * conf;
    let base_odds = spec.reply_prob / (1.0 - spec.reply_prob);
    let reply_odds = base_odds * noise(&mut rng, 0.4) * (0.5 * beta * u).exp();
    let affect_rate = (spec.affect_rate * noise(&mut rng, 0.5) * conf).clamp(0.005, 0.4);
    let symptom_rates = SYMPTOM_LABELS
        .iter()
        .map(|label| {
            let base = spec.symptom_rates.get(*label).copied().unwrap_or(0.2);
            (base * noise(&mut rng, 0.4) * conf).clamp(0.01, 0.8)
        })
        .collect();

    // Assignment odds depend on the trait only through the OBSERVED
    // platform counts, so treatment is ignorable given the covariates the
    // matching stage actually sees; the trait still confounds marginally
    // because the counts load on it. The standardisation constants are
    // the design values of the count models above.
    let z_posts = (n_posts - 180.0) / (70.0f64 * 70.0 + 35.0 * 35.0).sqrt();
    let z_likes = (n_likes - 400.0) / (150.0f64 * 150.0 + 80.0 * 80.0).sqrt();
    let rho = (70.0 / (70.0f64 * 70.0 + 35.0 * 35.0).sqrt())
        * (150.0 / (150.0f64 * 150.0 + 80.0 * 80.0).sqrt());
    let observed_index = (z_posts + z_likes) / (2.0 + 2.0 * rho).sqrt();
    let prevalence = spec.n_treatment as f64 / (spec.n_treatment + spec.n_control) as f64;
    let p_assign = logistic(
        spec.confounder_strength * observed_index + (prevalence / (1.0 - prevalence)).ln(),
    );
    // Weighted sampling without replacement: the n_treatment largest keys
    // win; ln(U)/p is monotone in p for fixed U.
    let assignment_key = rng.random_range(0.0f64..1.0).ln() / p_assign;

    let account_age_days = 800.0 + 500.0 * rng.random_range(0.0f64..1.0);
    let account_created = study_start() - Duration::days(account_age_days as i64);

    let preferred_topics = [
        rng.random_range(0..TOPICS.len()),
        rng.random_range(0..TOPICS.len()),
    ];

    IndividualPlan {
        latent_trait: u,
        assignment_key,
        metadata: (
            n_posts.round() as u64,
            n_likes.round() as u64,
            n_followers.round() as u64,
            n_followees.round() as u64,
        ),
        account_created,
        posting_rate,
        reply_odds,
        affect_rate,
        symptom_rates,
        preferred_topics,
    }
}

struct TextGen<'a> {
    neutral: Vec<&'static str>,
    affect_rate: f64,
    symptom_rates: &'a [f64],
    preferred_topics: [usize; 2],
}

impl<'a> TextGen<'a> {
    fn post_text(&self, rng: &mut ChaCha8Rng, affect_mult: f64, symptom_mults: &[f64]) -> String {
        let n_sentences = 1 + usize::from(rng.random_range(0.0f64..1.0) < 0.45);
        let mut sentences = Vec::with_capacity(n_sentences + 1);
        let affect_rate = (self.affect_rate * affect_mult).min(0.6);
        for _ in 0..n_sentences {
            let len = rng.random_range(4..10);
            let mut words = Vec::with_capacity(len);
            for _ in 0..len {
                let r = rng.random_range(0.0f64..1.0);
                let word = if r < affect_rate {
                    AFFECT_WORDS[rng.random_range(0..AFFECT_WORDS.len())]
                } else if r < affect_rate + TOPIC_SHARE {
                    let topic = self.preferred_topics[rng.random_range(0..2)];
                    TOPICS[topic][rng.random_range(0..TOPICS[topic].len())]
                } else {
                    self.neutral[rng.random_range(0..self.neutral.len())]
                };
                words.push(word);
            }
            sentences.push(words);
        }
        // symptomatic expressions ride on their own short sentence
        for (i, label) in SYMPTOM_LABELS.iter().enumerate() {
            let q = (self.symptom_rates[i] * symptom_mults[i]).min(0.9);
            if rng.random_range(0.0f64..1.0) < q {
                let words = symptom_words(label);
                sentences.push(vec![
                    "feeling",
                    words[rng.random_range(0..words.len())],
                    "and",
                    words[rng.random_range(0..words.len())],
                ]);
            }
        }

        let mut text = String::new();
        for (i, words) in sentences.iter().enumerate() {
            if i > 0 {
                text.push(' ');
            }
            let mut sentence = words.join(" ");
            if let Some(first) = sentence.get_mut(0..1) {
                first.make_ascii_uppercase();
            }
            text.push_str(&sentence);
            let terminator = match rng.random_range(0..10) {
                0 => '!',
                1 => '?',
                _ => '.',
            };
            text.push(terminator);
        }
        text
    }
}

struct SegmentSpec {
    start: DateTime<Utc>,
    end: DateTime<Utc>,
    rate_per_day: f64,
    affect_mult: f64,
    symptom_mults: [f64; 4],
    reply_odds_mult: f64,
}

#[allow(clippy::too_many_arguments)]
fn generate_timeline(
    rng: &mut ChaCha8Rng,
    author_id: &AuthorId,
    plan: &IndividualPlan,
    segments: &[SegmentSpec],
    text_gen: &TextGen<'_>,
) -> Vec<Post> {
    let mut posts = Vec::new();
    let mut seq = 0usize;
    let mut last_reply: Option<DateTime<Utc>> = None;
    for segment in segments {
        let days = (segment.end - segment.start).num_seconds() as f64 / 86_400.0;
        let expected = (segment.rate_per_day * days).max(1e-9);
        let count = Poisson::new(expected).map(|d| d.sample(rng)).unwrap_or(0.0) as usize;
        let span = (segment.end - segment.start).num_seconds();
        let mut offsets: Vec<i64> = (0..count).map(|_| rng.random_range(0..span)).collect();
        offsets.sort_unstable();
        for offset in offsets {
            let timestamp = segment.start + Duration::seconds(offset);
            let odds = plan.reply_odds * segment.reply_odds_mult;
            let mut is_reply = rng.random_range(0.0f64..1.0) < odds / (1.0 + odds);
            if !is_reply {
                let gap_exceeded = match last_reply {
                    Some(prev) => timestamp - prev > Duration::days(MAX_REPLY_GAP_DAYS),
                    None => true,
                };
                if gap_exceeded {
                    is_reply = true;
                }
            }
            if is_reply {
                last_reply = Some(timestamp);
            }
            let text =
                text_gen.post_text(rng, segment.affect_mult, &segment.symptom_mults);
            posts.push(Post {
                post_id: PostId(format!("{author_id}-p{seq}")),
                author_id: author_id.clone(),
                timestamp,
                text,
                is_reply,
                reply_to_post_id: is_reply.then(|| PostId(format!("other-{}", rng.random::<u32>()))),
                reply_to_author_id: is_reply.then(|| AuthorId(format!("user-{}", rng.random::<u32>()))),
            });
            seq += 1;
        }
    }
    posts
}

/// Generate the full cohort in memory.
pub fn generate_records(spec: &SynthSpec) -> Result<SynthCohort, SynthError> {
    spec.validate()?;
    let n_total = spec.n_treatment + spec.n_control;

    let plans: Vec<IndividualPlan> = (0..n_total as u64)
        .into_par_iter()
        .map(|i| plan_individual(spec, i))
        .collect();

    // Top n_treatment assignment keys become the treatment group.
    let mut order: Vec<usize> = (0..n_total).collect();
    order.sort_by(|&a, &b| {
        plans[b]
            .assignment_key
            .total_cmp(&plans[a].assignment_key)
            .then(a.cmp(&b))
    });
    let mut is_treatment = vec![false; n_total];
    for &i in order.iter().take(spec.n_treatment) {
        is_treatment[i] = true;
    }

    let effect_affect = spec.effect("liwc_affect");
    let effect_activity = spec.effect("activity");
    let effect_interactivity = spec.effect("interactivity");
    let effect_symptoms: [f64; 4] = [
        spec.effect("anxiety"),
        spec.effect("depression"),
        spec.effect("stress"),
        spec.effect("suicidal_ideation"),
    ];
    let no_effects = [1.0, 1.0, 1.0, 1.0];

    let window = Duration::days(i64::from(spec.window_days) + MARGIN_DAYS);
    let n_stories = spec.period_days as usize;

    let records: Vec<(bool, IndividualRecord)> = (0..n_total)
        .into_par_iter()
        .map(|i| {
            let plan = &plans[i];
            let treated = is_treatment[i];
            let author_id = if treated {
                AuthorId(format!("t{:05}", i))
            } else {
                AuthorId(format!("c{:05}", i))
            };
            let mut rng = substream_indexed(spec.seed, "synth-timeline", i as u64);
            let text_gen = TextGen {
                neutral: neutral_words(),
                affect_rate: plan.affect_rate,
                symptom_rates: &plan.symptom_rates,
                preferred_topics: plan.preferred_topics,
            };

            let mut timeline;
            if treated {
                let anchor_day = rng.random_range(0..spec.period_days) as usize;
                let anchor = study_start()
                    + Duration::days(anchor_day as i64)
                    + Duration::seconds(rng.random_range(30_000..60_000));
                let segments = [
                    SegmentSpec {
                        start: anchor - window,
                        end: anchor,
                        rate_per_day: plan.posting_rate,
                        affect_mult: 1.0,
                        symptom_mults: no_effects,
                        reply_odds_mult: 1.0,
                    },
                    SegmentSpec {
                        start: anchor + Duration::seconds(1),
                        end: anchor + window,
                        rate_per_day: plan.posting_rate * effect_activity,
                        affect_mult: effect_affect,
                        symptom_mults: effect_symptoms,
                        reply_odds_mult: effect_interactivity,
                    },
                ];
                timeline = generate_timeline(&mut rng, &author_id, plan, &segments, &text_gen);
                let story = PostId(format!("story-{:03}", anchor_day % n_stories));
                timeline.push(Post {
                    post_id: PostId(format!("{author_id}-anchor")),
                    author_id: author_id.clone(),
                    timestamp: anchor,
                    text: text_gen.post_text(&mut rng, 1.0, &no_effects),
                    is_reply: true,
                    reply_to_post_id: Some(story),
                    reply_to_author_id: Some(AuthorId("storyteller".into())),
                });
            } else {
                let segments = [SegmentSpec {
                    start: study_start() - window,
                    end: study_start() + Duration::days(i64::from(spec.period_days)) + window,
                    rate_per_day: plan.posting_rate,
                    affect_mult: 1.0,
                    symptom_mults: no_effects,
                    reply_odds_mult: 1.0,
                }];
                timeline = generate_timeline(&mut rng, &author_id, plan, &segments, &text_gen);
            }
            timeline.sort_by(|a, b| (a.timestamp, &a.post_id).cmp(&(b.timestamp, &b.post_id)));

            let record = IndividualRecord {
                author_id,
                n_posts: plan.metadata.0,
                n_likes: plan.metadata.1,
                n_followers: plan.metadata.2,
                n_followees: plan.metadata.3,
                account_created: plan.account_created,
                timeline,
                group: if treated { Group::Treatment } else { Group::Control },
                anchor_date: None,
                pre_window: Vec::new(),
                post_window: Vec::new(),
            };
            (treated, record)
        })
        .collect();

    let mut treatment = Vec::with_capacity(spec.n_treatment);
    let mut control = Vec::with_capacity(spec.n_control);
    let mut traits = Vec::with_capacity(n_total);
    for ((treated, record), plan) in records.into_iter().zip(&plans) {
        traits.push(TraitRow {
            author_id: record.author_id.clone(),
            group: record.group,
            latent_trait: plan.latent_trait,
        });
        if treated {
            treatment.push(record);
        } else {
            control.push(record);
        }
    }

    let story_ids = (0..n_stories)
        .map(|k| PostId(format!("story-{k:03}")))
        .collect();

    Ok(SynthCohort {
        treatment,
        control,
        truth: GroundTruth {
            effects: spec.effect_map.clone(),
            confounder_strength: spec.confounder_strength,
            outcome_confounding: spec.outcome_confounding,
            seed: spec.seed,
            story_ids,
            traits,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SynthSpec {
        SynthSpec {
            n_treatment: 40,
            n_control: 120,
            seed: 11,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn counts_match_the_spec() {
        let cohort = generate_records(&small_spec()).unwrap();
        assert_eq!(cohort.treatment.len(), 40);
        assert_eq!(cohort.control.len(), 120);
        assert_eq!(cohort.truth.traits.len(), 160);
    }

    #[test]
    fn treatment_individuals_reply_to_exactly_one_story() {
        let cohort = generate_records(&small_spec()).unwrap();
        for record in &cohort.treatment {
            let story_replies = record
                .timeline
                .iter()
                .filter(|p| {
                    p.reply_to_post_id
                        .as_ref()
                        .is_some_and(|id| id.0.starts_with("story-"))
                })
                .count();
            assert_eq!(story_replies, 1, "{}", record.author_id);
        }
        for record in &cohort.control {
            assert!(record.timeline.iter().all(|p| {
                p.reply_to_post_id.as_ref().map_or(true, |id| !id.0.starts_with("story-"))
            }));
            assert!(record.timeline.iter().any(|p| p.is_reply));
        }
    }

    #[test]
    fn timelines_are_sorted_with_unique_ids() {
        let cohort = generate_records(&small_spec()).unwrap();
        for record in cohort.treatment.iter().chain(&cohort.control) {
            assert!(record
                .timeline
                .windows(2)
                .all(|w| w[0].timestamp <= w[1].timestamp));
            let mut ids: Vec<&str> =
                record.timeline.iter().map(|p| p.post_id.0.as_str()).collect();
            ids.sort_unstable();
            let before = ids.len();
            ids.dedup();
            assert_eq!(ids.len(), before);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_records(&small_spec()).unwrap();
        let b = generate_records(&small_spec()).unwrap();
        for (x, y) in a.treatment.iter().zip(&b.treatment) {
            assert_eq!(x.author_id, y.author_id);
            assert_eq!(x.timeline.len(), y.timeline.len());
            for (p, q) in x.timeline.iter().zip(&y.timeline) {
                assert_eq!(p, q);
            }
        }
    }

    #[test]
    fn confounding_shifts_treatment_traits() {
        let cohort = generate_records(&SynthSpec {
            n_treatment: 300,
            n_control: 900,
            confounder_strength: 1.5,
            seed: 3,
            ..SynthSpec::default()
        })
        .unwrap();
        let mean = |group: Group| {
            let values: Vec<f64> = cohort
                .truth
                .traits
                .iter()
                .filter(|t| t.group == group)
                .map(|t| t.latent_trait)
                .collect();
            values.iter().sum::<f64>() / values.len() as f64
        };
        assert!(
            mean(Group::Treatment) > mean(Group::Control) + 0.2,
            "confounded assignment should select high-trait individuals"
        );
    }
}
