mod support;

use rolemodel::sttm::{init_model, recovery_score, run_gibbs, CountTables, SamplerConfig};

#[test]
fn conditionals_match_normalized_joint() {
    let err = support::gibbs_conditional_error(40, 1);
    assert!(err < 1e-9, "max deviation {err:e}");
}

#[test]
fn viterbi_matches_exhaustive_search() {
    let r = support::viterbi_vs_exhaustive(100, 2);
    assert!(r.max_score_error < 1e-9, "score error {:e}", r.max_score_error);
    assert_eq!(r.path_mismatches, 0);
}

#[test]
fn recovers_profiles_when_topics_match_states() {
    let (set, record) = support::recovery_corpus(3);
    let mut model = init_model(&set, record.hyper, 13).unwrap();
    let run = run_gibbs(&mut model, &SamplerConfig::default()).unwrap();
    let r = recovery_score(&record, &run.profiles, 30);
    assert!(r.phi <= 0.15, "{r:?}");
    assert!(r.psi <= 0.15, "{r:?}");
    assert!(r.pi <= 0.20 && r.pi_rows > 0, "{r:?}");
}

// With more topics than states only the per-state word mixtures are pinned
// down by the data; the topic split is not checked here.
#[test]
fn recovers_states_and_transitions_with_more_topics() {
    let (set, record) = support::recovery_corpus(5);
    let mut model = init_model(&set, record.hyper, 13).unwrap();
    let run = run_gibbs(&mut model, &SamplerConfig::default()).unwrap();
    let r = recovery_score(&record, &run.profiles, 30);
    assert!(r.psi <= 0.15, "{r:?}");
    assert!(r.pi <= 0.20 && r.pi_rows > 0, "{r:?}");
}

#[test]
fn counts_match_tally_after_100_sweeps() {
    let (set, record) = support::recovery_corpus(5);
    let mut model = init_model(&set, record.hyper, 5).unwrap();
    let cfg = SamplerConfig {
        sweeps: 100,
        burn_in: 50,
        ..SamplerConfig::default()
    };
    run_gibbs(&mut model, &cfg).unwrap();
    let fresh = CountTables::tally(&model.hyper, model.vocab_size, &model.data, &model.states, &model.topics);
    assert_eq!(model.counts, fresh);
}
