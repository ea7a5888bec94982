// Scratch harness for sizing the synthetic-cohort defaults. Not part of
// the deliverable surface; run with:
//   cargo run --release -p copestudy-core --example calibrate -- <mode>
use std::collections::HashSet;
use std::time::Instant;

use copestudy_core::config::StudyParams;
use copestudy_core::study::{run_cohort_study, FeatureResources};
use copestudy_core::synth::{
    build_classifiers, build_embeddings, build_lexicon, generate_records, suggested_params,
    SynthSpec,
};

fn resources() -> FeatureResources {
    FeatureResources {
        lexicon: build_lexicon(),
        models: build_classifiers(),
        embeddings: build_embeddings(),
    }
}

fn run_once(spec: &SynthSpec, params: &StudyParams, res: &FeatureResources, verbose: bool) {
    let t0 = Instant::now();
    let cohort = generate_records(spec).unwrap();
    let gen_time = t0.elapsed();
    let stories: HashSet<_> = cohort.truth.story_ids.iter().cloned().collect();
    let t1 = Instant::now();
    let out = run_cohort_study(cohort.treatment, cohort.control, &stories, res, params);
    let run_time = t1.elapsed();
    match out {
        Ok(out) => {
            println!(
                "gen {:.2}s pipeline {:.2}s | placebo_ks {:.4} | balance max_un {:.3} mean_un {:.3} max_m {:.3} mean_m {:.3} pass {}",
                gen_time.as_secs_f64(),
                run_time.as_secs_f64(),
                out.placebo_ks,
                out.balance.max_unmatched,
                out.balance.mean_unmatched,
                out.balance.max_matched,
                out.balance.mean_matched,
                out.balance.pass
            );
            if verbose {
                for r in &out.reports {
                    println!(
                        "  {:28} meanT {:8.4} meanC {:8.4} RTE {:>7} d {:7.3} t {:8.3} p {:.4} padj {:.4}",
                        r.outcome,
                        r.mean_treatment,
                        r.mean_control,
                        r.weighted_rte.map_or("-".into(), |w| format!("{w:.3}")),
                        r.cohens_d,
                        r.t_stat,
                        r.p_raw,
                        r.p_adjusted
                    );
                }
                for d in &out.diagnostics {
                    println!("  # {d}");
                }
            }
        }
        Err(e) => println!("ERROR: {e}"),
    }
}

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_else(|| "null".into());
    let res = resources();
    match mode.as_str() {
        // criterion 1 scale: 2000/6000, confounding on, null effects
        "null" => {
            let l2: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1.0);
            let spec = SynthSpec {
                n_treatment: 2000,
                n_control: 6000,
                seed: 1,
                ..SynthSpec::default()
            };
            let mut params = suggested_params(&spec);
            params.l2_penalty = l2;
            run_once(&spec, &params, &res, true);
        }
        // many seeds: false-positive fraction + RTE spread
        "fp" => {
            let n_runs: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(20);
            let t0 = Instant::now();
            let mut rejections = 0usize;
            let mut total = 0usize;
            let mut worst_rte: (f64, String) = (1.0, String::new());
            for seed in 0..n_runs {
                let spec = SynthSpec {
                    n_treatment: 2000,
                    n_control: 6000,
                    seed,
                    ..SynthSpec::default()
                };
                let params = suggested_params(&spec);
                let cohort = generate_records(&spec).unwrap();
                let stories: HashSet<_> = cohort.truth.story_ids.iter().cloned().collect();
                let out =
                    run_cohort_study(cohort.treatment, cohort.control, &stories, &res, &params)
                        .unwrap();
                for r in &out.reports {
                    total += 1;
                    if r.p_adjusted < 0.05 {
                        rejections += 1;
                    }
                    if let Some(w) = r.weighted_rte {
                        if (w - 1.0).abs() > (worst_rte.0 - 1.0).abs() {
                            worst_rte = (w, format!("{} seed {seed}", r.outcome));
                        }
                    }
                }
            }
            println!(
                "{n_runs} runs in {:.1}s: fp fraction {:.4} ({rejections}/{total}), worst RTE {:.4} ({})",
                t0.elapsed().as_secs_f64(),
                rejections as f64 / total as f64,
                worst_rte.0,
                worst_rte.1
            );
        }
        // criterion 2 scale: injected effects
        "effect" => {
            let n_runs: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(10);
            let t0 = Instant::now();
            let mut ok_affect = 0usize;
            let mut ok_activity = 0usize;
            for seed in 0..n_runs {
                let mut spec = SynthSpec {
                    n_treatment: 1000,
                    n_control: 3000,
                    seed,
                    ..SynthSpec::default()
                };
                spec.effect_map.insert("liwc_affect".into(), 1.5);
                spec.effect_map.insert("activity".into(), 1.5);
                let params = suggested_params(&spec);
                let cohort = generate_records(&spec).unwrap();
                let stories: HashSet<_> = cohort.truth.story_ids.iter().cloned().collect();
                let out =
                    run_cohort_study(cohort.treatment, cohort.control, &stories, &res, &params)
                        .unwrap();
                let rte = |name: &str| {
                    out.reports
                        .iter()
                        .find(|r| r.outcome == name)
                        .and_then(|r| r.weighted_rte)
                        .unwrap_or(f64::NAN)
                };
                let (ra, rc) = (rte("liwc_affect"), rte("activity"));
                println!("seed {seed}: affect {ra:.3} activity {rc:.3}");
                if (ra - 1.5).abs() <= 0.1 {
                    ok_affect += 1;
                }
                if (rc - 1.5).abs() <= 0.1 {
                    ok_activity += 1;
                }
            }
            println!(
                "{n_runs} runs in {:.1}s: affect in-band {ok_affect}, activity in-band {ok_activity}",
                t0.elapsed().as_secs_f64()
            );
        }
        // criterion 3 scale: stratified vs naive
        "confound" => {
            let n_runs: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(10);
            use copestudy_core::inference::{measure_outcomes, standard_outcomes};
            let t0 = Instant::now();
            let mut strat_closer = 0usize;
            for seed in 0..n_runs {
                let spec = SynthSpec {
                    n_treatment: 1000,
                    n_control: 3000,
                    seed: 1000 + seed,
                    ..SynthSpec::default()
                };
                let params = suggested_params(&spec);
                let cohort = generate_records(&spec).unwrap();
                let stories: HashSet<_> = cohort.truth.story_ids.iter().cloned().collect();
                let out = run_cohort_study(
                    cohort.treatment,
                    cohort.control,
                    &stories,
                    &res,
                    &params,
                )
                .unwrap();
                // naive unmatched ratio over every windowed individual
                let specs = standard_outcomes(&res.lexicon, &res.models);
                let naive_matrix =
                    measure_outcomes(&out.records, None, &specs, &res.measurement(), &params);
                let idx = naive_matrix.spec_index("activity").unwrap();
                let mean_of = |group| {
                    let v: Vec<f64> = naive_matrix.group_values(idx, group);
                    v.iter().sum::<f64>() / v.len() as f64
                };
                let naive =
                    mean_of(copestudy_core::Group::Treatment) / mean_of(copestudy_core::Group::Control);
                let stratified = out
                    .reports
                    .iter()
                    .find(|r| r.outcome == "activity")
                    .and_then(|r| r.weighted_rte)
                    .unwrap();
                println!(
                    "seed {}: naive {naive:.3} stratified {stratified:.3} | pre max SMD {:.3} post {:.3}",
                    1000 + seed,
                    out.balance.max_unmatched,
                    out.balance.max_matched
                );
                if (stratified - 1.0).abs() < (naive - 1.0).abs() {
                    strat_closer += 1;
                }
            }
            println!(
                "{n_runs} runs in {:.1}s: stratified closer in {strat_closer}",
                t0.elapsed().as_secs_f64()
            );
        }
        // structural probe: no confounding at all, unmatched group means
        "probe" => {
            use copestudy_core::inference::{measure_outcomes, standard_outcomes};
            use copestudy_core::corpus::carve_windows;
            use copestudy_core::corpus::extract_treatment_event;
            use copestudy_core::corpus::TreatmentEvent;
            let spec = SynthSpec {
                n_treatment: 4000,
                n_control: 4000,
                confounder_strength: 0.0,
                outcome_confounding: 0.0,
                seed: 5,
                ..SynthSpec::default()
            };
            let params = suggested_params(&spec);
            let cohort = generate_records(&spec).unwrap();
            let stories: HashSet<_> = cohort.truth.story_ids.iter().cloned().collect();
            let mut records = Vec::new();
            for mut r in cohort.treatment {
                if let TreatmentEvent::Unique(ts) = extract_treatment_event(&r, &stories) {
                    r.anchor_date = Some(ts);
                    records.push(r);
                }
            }
            let dates: Vec<_> = records.iter().filter_map(|r| r.anchor_date).collect();
            let placebo = copestudy_core::corpus::assign_placebo_dates(
                cohort.control,
                &dates,
                spec.seed,
            )
            .unwrap();
            records.extend(placebo.records);
            for r in records.iter_mut() {
                carve_windows(r, params.window_days);
            }
            let specs = standard_outcomes(&res.lexicon, &res.models);
            let matrix = measure_outcomes(&records, None, &specs, &res.measurement(), &params);
            for (i, spec) in matrix.specs.iter().enumerate() {
                let t = matrix.group_values(i, copestudy_core::Group::Treatment);
                let c = matrix.group_values(i, copestudy_core::Group::Control);
                let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
                println!(
                    "{:28} T {:9.4} (n={}) C {:9.4} (n={}) ratio {:.4}",
                    spec.name,
                    mean(&t),
                    t.len(),
                    mean(&c),
                    c.len(),
                    mean(&t) / mean(&c)
                );
            }
        }
        // stage timing at criterion-1 scale
        "stages" => {
            use copestudy_core::cohort::{
                balance_report, build_covariates, fit_propensity, stratify,
            };
            use copestudy_core::corpus::{
                assign_placebo_dates, carve_windows, extract_treatment_event, TreatmentEvent,
            };
            use copestudy_core::inference::{
                estimate_effects, measure_outcomes, standard_outcomes,
            };
            let spec = SynthSpec {
                n_treatment: 2000,
                n_control: 6000,
                seed: 1,
                ..SynthSpec::default()
            };
            let mut params = suggested_params(&spec);
            params.l2_penalty = 0.001;
            let mut t = Instant::now();
            let mut lap = |label: &str, t: &mut Instant| {
                println!("{label:24} {:.3}s", t.elapsed().as_secs_f64());
                *t = Instant::now();
            };
            let cohort = generate_records(&spec).unwrap();
            lap("generate", &mut t);
            let stories: HashSet<_> = cohort.truth.story_ids.iter().cloned().collect();
            let mut records = Vec::new();
            for mut r in cohort.treatment {
                if let TreatmentEvent::Unique(ts) = extract_treatment_event(&r, &stories) {
                    r.anchor_date = Some(ts);
                    records.push(r);
                }
            }
            let dates: Vec<_> = records.iter().filter_map(|r| r.anchor_date).collect();
            let placebo = assign_placebo_dates(cohort.control, &dates, spec.seed).unwrap();
            records.extend(placebo.records);
            lap("anchor+placebo", &mut t);
            for r in records.iter_mut() {
                carve_windows(r, params.window_days);
            }
            lap("carve", &mut t);
            let build = build_covariates(&records, &res.lexicon, &res.models, &params).unwrap();
            lap("covariates", &mut t);
            let fit =
                fit_propensity(&build.schema, &build.vectors, params.l2_penalty, params.rng_seed)
                    .unwrap();
            lap("propensity", &mut t);
            let strat = stratify(&fit.scores, &params).unwrap();
            lap("stratify", &mut t);
            let _balance =
                balance_report(&build.schema, &build.vectors, &strat, params.smd_threshold)
                    .unwrap();
            lap("balance", &mut t);
            let specs = standard_outcomes(&res.lexicon, &res.models);
            let matrix =
                measure_outcomes(&records, Some(&strat), &specs, &res.measurement(), &params);
            lap("outcomes", &mut t);
            let _reports = estimate_effects(&matrix, &strat, &params).unwrap();
            lap("effects", &mut t);
        }
        other => eprintln!("unknown mode {other}"),
    }
}
