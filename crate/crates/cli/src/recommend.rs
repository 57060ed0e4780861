use std::collections::{BTreeMap, BTreeSet, HashSet};

use rolemodel::recommender::{
    baseline_filter, by_user, constraint_filter, evaluate_map, evaluate_ob, objective, read_discussions,
    read_participation, recommendations_csv, split_per_user, train_relevance, user_info_from_corpus, Assignment,
    AssignmentProblem, BaselineThresholds, Candidate, Discussion, FeatureTable, FilterMode, Recommendation,
    RelevanceModel, UserInfo,
};
use serde::Serialize;

use crate::artifact::{read_json_payload, sha256_hex, write_json, write_text, Provenance};
use crate::config::{RecommendSection, RunConfig};
use crate::input::load_corpus;
use crate::Failure;

#[derive(Serialize)]
struct Report<'a> {
    map: f64,
    ob: f64,
    /// OB minus the workload cost.
    objective: f64,
    mode: &'a str,
    features: &'a str,
    seed: u64,
    config: &'a RunConfig,
    evaluated_users: usize,
    skipped_users: &'a [String],
    train_pairs: usize,
    held_out_pairs: usize,
    candidates: usize,
    assigned: usize,
    final_loss: Option<f64>,
    /// SHA-256 of the plain-text outputs of this run.
    artifacts: BTreeMap<String, String>,
}

fn user_info(cfg: &RunConfig) -> Result<Vec<UserInfo>, Failure> {
    if let Some(p) = &cfg.paths.users {
        return read_json_payload(p, "users");
    }
    let default = cfg.out_dir().join("users.json");
    if default.exists() {
        return read_json_payload(&default, "users");
    }
    match load_corpus(cfg)? {
        Some(corpus) => Ok(user_info_from_corpus(&corpus)?),
        None => Ok(Vec::new()),
    }
}

// Participant lists without the held-out memberships, so that implicit
// feedback cannot reveal test pairs.
fn training_view(discussions: &[Discussion], held_out: &[(String, String)]) -> Vec<Discussion> {
    let hidden: HashSet<(&str, &str)> = held_out.iter().map(|(u, d)| (u.as_str(), d.as_str())).collect();
    discussions
        .iter()
        .map(|d| Discussion {
            participants: d
                .participants
                .iter()
                .filter(|u| !hidden.contains(&(u.as_str(), d.discussion_id.as_str())))
                .cloned()
                .collect(),
            ..d.clone()
        })
        .collect()
}

// Per discussion: the highest-scoring users that did not train on it, plus
// the best-scoring user meeting each requirement of the mode.
fn candidates(
    model: &RelevanceModel,
    trained: &HashSet<(usize, usize)>,
    goal: &[f64],
    centrality: &[f64],
    rec: &RecommendSection,
    mode: FilterMode,
) -> Vec<Candidate> {
    let (use_g, use_c) = mode.uses();
    let nu = model.features.users.len();
    let mut out = Vec::new();
    for d in 0..model.features.discussions.len() {
        let mut scored: Vec<Candidate> = (0..nu)
            .filter(|&u| !trained.contains(&(u, d)))
            .map(|u| Candidate {
                user: u,
                discussion: d,
                score: model.predict_idx(u, d),
            })
            .collect();
        scored.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.user.cmp(&b.user)));
        let limit = if rec.candidates_per_discussion == 0 {
            scored.len()
        } else {
            rec.candidates_per_discussion
        };
        let mut keep: BTreeSet<usize> = (0..scored.len().min(limit)).collect();
        if mode.is_flow() {
            if use_g {
                keep.extend(scored.iter().position(|c| goal[c.user] >= rec.goal_threshold));
            }
            if use_c {
                keep.extend(scored.iter().position(|c| centrality[c.user] >= rec.centrality_threshold));
            }
        }
        out.extend(keep.into_iter().map(|i| scored[i]));
    }
    out
}

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let rec = &cfg.recommend;
    let mode = rec.filter_mode()?;
    let flags = rec.feature_flags()?;
    let pairs = read_participation(&cfg.path_or_out(&cfg.paths.participation, "participation.csv"))?;
    let discussions = read_discussions(&cfg.path_or_out(&cfg.paths.discussions, "discussions.jsonl"))?;
    let info = user_info(cfg)?;

    let (train, test) = split_per_user(&pairs, cfg.seed);
    let features = FeatureTable::build(&info, &training_view(&discussions, &test), &train)?;
    let positives: Vec<(usize, usize)> = train
        .iter()
        .map(|(u, d)| Ok((features.user(u)?, features.discussion(d)?)))
        .collect::<Result<_, rolemodel::Error>>()?;
    let model = train_relevance(features, &positives, flags, rec.train_config(), cfg.seed)?;

    let trained_by_user = by_user(&train);
    let held_out = by_user(&test);
    let all_ids: Vec<String> = model.features.discussions.iter().map(|d| d.discussion_id.clone()).collect();
    let ranked_for: BTreeMap<String, Vec<String>> = held_out
        .keys()
        .map(|u| {
            let seen = trained_by_user.get(u);
            let cands = all_ids
                .iter()
                .filter(|d| seen.is_none_or(|s| !s.contains(*d)))
                .cloned()
                .collect();
            (u.clone(), cands)
        })
        .collect();
    let map = evaluate_map(
        |u, d| model.predict(u, d).unwrap_or(f64::NEG_INFINITY),
        &held_out,
        &ranked_for,
    );

    let goal: Vec<f64> = model.features.users.iter().map(|u| u.goal_quality as f64).collect();
    let centrality: Vec<f64> = model.features.users.iter().map(|u| u.centrality).collect();
    let trained: HashSet<(usize, usize)> = positives.iter().copied().collect();
    let (use_g, use_c) = mode.uses();
    let problem = AssignmentProblem {
        users: model.features.users.iter().map(|u| u.user_id.clone()).collect(),
        discussions: all_ids.clone(),
        goal: goal.clone(),
        centrality: centrality.clone(),
        candidates: candidates(&model, &trained, &goal, &centrality, rec, mode),
        goal_threshold: use_g.then_some(rec.goal_threshold),
        centrality_threshold: use_c.then_some(rec.centrality_threshold),
        penalty: rec.penalty,
        cap: rec.cap,
        workload: rec.workload,
    };
    let assignment: Assignment = if mode.is_flow() {
        constraint_filter(&problem)?
    } else {
        problem.validate()?;
        baseline_filter(
            &problem,
            mode,
            rec.top_n,
            BaselineThresholds {
                goal_min: rec.goal_threshold,
                centrality_above: rec.centrality_threshold,
            },
        )
    };

    let scores: BTreeMap<(usize, usize), f64> = problem
        .candidates
        .iter()
        .map(|c| ((c.user, c.discussion), c.score))
        .collect();
    let mut rows: Vec<Recommendation> = assignment
        .pairs
        .iter()
        .map(|&(u, d)| Recommendation {
            user_id: problem.users[u].clone(),
            discussion_id: problem.discussions[d].clone(),
            score: scores[&(u, d)],
        })
        .collect();
    rows.sort_by(|a, b| {
        a.user_id
            .cmp(&b.user_id)
            .then(b.score.total_cmp(&a.score))
            .then(a.discussion_id.cmp(&b.discussion_id))
    });
    let csv = recommendations_csv(&rows)?;

    let out = cfg.out_dir();
    write_text(&out.join("recommendations.csv"), &csv)?;
    let report = Report {
        map: map.map,
        ob: evaluate_ob(&problem, &assignment),
        objective: objective(&problem, &assignment),
        mode: mode.label(),
        features: flags.label(),
        seed: cfg.seed,
        config: cfg,
        evaluated_users: map.evaluated,
        skipped_users: &map.skipped,
        train_pairs: train.len(),
        held_out_pairs: test.len(),
        candidates: problem.candidates.len(),
        assigned: assignment.pairs.len(),
        final_loss: model.loss_trace.last().copied(),
        artifacts: BTreeMap::from([("recommendations.csv".to_string(), sha256_hex(csv.as_bytes()))]),
    };
    write_json(&out.join("report.json"), &Provenance::of(cfg), &report)?;
    eprintln!(
        "recommend: {} / {}: MAP {:.4} over {} users, OB {:.4}, {} pairs assigned -> {}",
        flags.label(),
        mode.label(),
        report.map,
        report.evaluated_users,
        report.ob,
        report.assigned,
        out.display()
    );
    Ok(())
}
