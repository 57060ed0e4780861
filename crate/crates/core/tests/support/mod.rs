//! Fixtures and brute-force oracles shared by the integration tests and the
//! acceptance suite.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rolemodel::corpus::{SeqDocument, SequenceSet, TimePoint, Vocabulary};
use rolemodel::recommender::{
    baseline_filter, by_user, check_assignment, constraint_filter, evaluate_map, evaluate_ob, objective,
    split_per_user, train_relevance, Assignment, AssignmentProblem, BaselineThresholds, Block, Candidate, Discussion,
    FeatureFlags, FeatureTable, FilterMode, RelevanceModel, TrainConfig, UserInfo,
};
use rolemodel::sttm::{
    generate_synthetic, init_model, joint_log_prob, viterbi_decode, well_separated_truth, CategorySchedule,
    ConditionalForm, CountTables, Hyperparams, StateProfiles, SttmModel, SynthShape, TruthRecord,
};

// ---------------------------------------------------------------- sttm

/// The corpus used for parameter recovery and the count audit.
pub fn recovery_corpus(topics: usize) -> (SequenceSet, TruthRecord) {
    let h = Hyperparams {
        states: 3,
        categories: 2,
        topics,
        doc_types: 3,
        ..Hyperparams::default()
    };
    let truth = well_separated_truth(&h, 50, 11).unwrap();
    let shape = SynthShape {
        lengths: vec![8; 200],
        docs_per_step: (1, 3),
        words_per_doc: (8, 12),
        schedule: CategorySchedule::Uniform,
    };
    generate_synthetic(&h, &truth, &shape, 12).unwrap()
}

fn normalize_logs(logs: &[f64]) -> Vec<f64> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn retally(model: &mut SttmModel) {
    model.counts = CountTables::tally(&model.hyper, model.vocab_size, &model.data, &model.states, &model.topics);
}

fn tiny_model(rng: &mut ChaCha8Rng) -> SttmModel {
    let h = Hyperparams {
        states: rng.gen_range(1..=3),
        categories: 2,
        topics: rng.gen_range(1..=2),
        doc_types: 2,
        alpha: rng.gen_range(0.05..2.0),
        beta: rng.gen_range(0.01..1.0),
        nu: rng.gen_range(0.05..2.0),
        gamma: rng.gen_range(0.05..2.0),
    };
    let v = rng.gen_range(h.topics.max(2)..=4);
    let truth = well_separated_truth(&h, v, rng.gen()).unwrap();
    let n_seq = rng.gen_range(1..=2);
    let shape = SynthShape {
        lengths: (0..n_seq).map(|_| rng.gen_range(1..=3)).collect(),
        docs_per_step: (1, 2),
        words_per_doc: (1, 2),
        schedule: CategorySchedule::Uniform,
    };
    let (set, _) = generate_synthetic(&h, &truth, &shape, rng.gen()).unwrap();
    init_model(&set, h, rng.gen()).unwrap()
}

/// Largest absolute difference between a sampler conditional and the
/// brute-force normalization of the joint over the site's values, across
/// every topic and state site of `instances` random tiny models.
pub fn gibbs_conditional_error(instances: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let mut model = tiny_model(&mut rng);
        for m in 0..model.data.len() {
            for t in 0..model.data[m].steps.len() {
                for i in 0..model.data[m].steps[t].words.len() {
                    let got = model.topic_conditional(m, t, i, ConditionalForm::Exact);
                    let logs: Vec<f64> = (0..model.hyper.topics)
                        .map(|j| {
                            let mut alt = model.clone();
                            alt.topics[m][t][i] = j;
                            retally(&mut alt);
                            joint_log_prob(&alt)
                        })
                        .collect();
                    for (a, b) in got.iter().zip(normalize_logs(&logs)) {
                        worst = worst.max((a - b).abs());
                    }
                }
                let got = model.state_conditional(m, t, ConditionalForm::Exact);
                let logs: Vec<f64> = (0..model.hyper.states)
                    .map(|c| {
                        let mut alt = model.clone();
                        alt.states[m][t] = c;
                        retally(&mut alt);
                        joint_log_prob(&alt)
                    })
                    .collect();
                for (a, b) in got.iter().zip(normalize_logs(&logs)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    worst
}

fn random_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn viterbi_fixture(rng: &mut ChaCha8Rng, uniform: bool) -> (StateProfiles, Vec<TimePoint>) {
    let s = rng.gen_range(1..=4);
    let (a, z, d, v) = (2, 2, 2, 3);
    let h = Hyperparams {
        states: s,
        categories: a,
        topics: z,
        doc_types: d,
        ..Hyperparams::default()
    };
    let mut row = |n: usize| {
        if uniform {
            vec![1.0 / n as f64; n]
        } else {
            random_row(rng, n)
        }
    };
    let p = StateProfiles {
        hyper: h,
        vocab: Vocabulary::from_words(["a", "b", "c"]),
        phi: (0..z).map(|_| row(v)).collect(),
        theta: (0..s).map(|_| row(z)).collect(),
        psi: (0..s).map(|_| row(d)).collect(),
        pi: (0..s).map(|_| (0..a).map(|_| row(s)).collect()).collect(),
        init: (0..a).map(|_| row(s)).collect(),
        theta_doc: vec![],
    };
    let len = rng.gen_range(1..=6);
    let steps = (0..len)
        .map(|t| TimePoint {
            week: t as u32,
            category: rng.gen_range(0..a),
            docs: (0..rng.gen_range(1..=2))
                .map(|_| SeqDocument {
                    doc_type: rng.gen_range(0..d),
                    tokens: (0..rng.gen_range(0..=3)).map(|_| rng.gen_range(0..v as u32)).collect(),
                })
                .collect(),
        })
        .collect();
    (p, steps)
}

fn path_log_score(p: &StateProfiles, steps: &[TimePoint], path: &[usize]) -> f64 {
    let mut total = p.init[steps[0].category][path[0]].ln();
    for t in 1..path.len() {
        total += p.pi[path[t - 1]][steps[t - 1].category][path[t]].ln();
    }
    for (tp, &c) in steps.iter().zip(path) {
        for doc in &tp.docs {
            total += p.psi[c][doc.doc_type].ln();
            for &w in &doc.tokens {
                let mix: f64 = (0..p.hyper.topics).map(|j| p.theta[c][j] * p.phi[j][w as usize]).sum();
                total += mix.ln();
            }
        }
    }
    total
}

pub struct ViterbiCheck {
    pub fixtures: usize,
    pub max_score_error: f64,
    pub path_mismatches: usize,
}

/// Decodes random fixtures (every tenth with all-uniform profiles, where
/// every path ties) and compares with exhaustive enumeration. Among tied
/// paths the expected winner is the smallest one read from the last time
/// point backwards.
pub fn viterbi_vs_exhaustive(fixtures: usize, seed: u64) -> ViterbiCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ViterbiCheck {
        fixtures,
        max_score_error: 0.0,
        path_mismatches: 0,
    };
    for f in 0..fixtures {
        let (p, steps) = viterbi_fixture(&mut rng, f % 10 == 9);
        let (s, len) = (p.hyper.states, steps.len());
        let mut best: Option<(f64, Vec<usize>)> = None;
        for code in 0..s.pow(len as u32) {
            let path: Vec<usize> = (0..len).map(|t| code / s.pow(t as u32) % s).collect();
            let score = path_log_score(&p, &steps, &path);
            let key = |x: &Vec<usize>| x.iter().rev().copied().collect::<Vec<_>>();
            let replace = match &best {
                None => true,
                Some((b, bp)) => score > b + 1e-9 || ((score - b).abs() <= 1e-9 && key(&path) < key(bp)),
            };
            if replace {
                best = Some((score, path));
            }
        }
        let (score, path) = best.unwrap();
        let got = viterbi_decode(&p, &steps).unwrap();
        out.max_score_error = out.max_score_error.max((got.log_score - score).abs());
        if got.states != path {
            out.path_mismatches += 1;
        }
    }
    out
}

// ---------------------------------------------------------------- relevance

fn gradient_fixture() -> (RelevanceModel, Vec<(usize, usize, f64)>) {
    let info: Vec<UserInfo> = (0..4)
        .map(|u| UserInfo {
            user_id: format!("u{u}"),
            goal_quality: (u % 3) as u8,
            centrality: 0.2 + 0.15 * u as f64,
            registration_week: u % 2,
        })
        .collect();
    let discussions = vec![
        Discussion {
            discussion_id: "d0".into(),
            n_replies: 4,
            length: 120,
            participants: vec!["u0".into(), "u1".into(), "u2".into()],
        },
        Discussion {
            discussion_id: "d1".into(),
            n_replies: 1,
            length: 300,
            participants: vec!["u3".into(), "u1".into()],
        },
        Discussion {
            discussion_id: "d2".into(),
            n_replies: 0,
            length: 40,
            participants: vec![],
        },
    ];
    let pairs = vec![
        ("u0".to_string(), "d0".to_string()),
        ("u1".to_string(), "d0".to_string()),
        ("u1".to_string(), "d1".to_string()),
        ("u2".to_string(), "d0".to_string()),
        ("u3".to_string(), "d1".to_string()),
    ];
    let table = FeatureTable::build(&info, &discussions, &pairs).unwrap();
    let cfg = TrainConfig {
        k: 2,
        regularization: 0.05,
        ..TrainConfig::default()
    };
    let mut model = RelevanceModel::zeros(table, FeatureFlags::ALL[3], cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for b in Block::ALL {
        for x in model.params.block_mut(b) {
            *x = rng.gen_range(-0.8..0.8);
        }
    }
    let samples = vec![
        (0, 0, 1.0),
        (1, 0, 1.0),
        (1, 1, 1.0),
        (2, 0, 1.0),
        (3, 1, 1.0),
        (0, 2, 0.0),
        (2, 1, 0.0),
        (3, 0, 0.0),
        (1, 2, 0.0),
    ];
    (model, samples)
}

/// Relative error `|a - n| / max(|a|, |n|, 1e-6)` between the analytic
/// gradient and a central difference (step 1e-5), maximized over every
/// entry, per parameter block.
pub fn gradient_check() -> Vec<(Block, f64)> {
    let (model, samples) = gradient_fixture();
    let analytic = model.gradient(&samples);
    let h = 1e-5;
    Block::ALL
        .iter()
        .map(|&b| {
            let mut worst: f64 = 0.0;
            for i in 0..model.params.block(b).len() {
                let mut plus = model.clone();
                plus.params.block_mut(b)[i] += h;
                let mut minus = model.clone();
                minus.params.block_mut(b)[i] -= h;
                let numeric = (plus.objective(&samples) - minus.objective(&samples)) / (2.0 * h);
                let a = analytic.block(b)[i];
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(rel);
            }
            (b, worst)
        })
        .collect()
}

/// Expected average precision of a uniformly random ranking of `n` items
/// containing `m` positives.
pub fn random_ap(n: usize, m: usize) -> f64 {
    let harmonic: f64 = (1..=n).map(|i| 1.0 / i as f64).sum();
    if n == 1 {
        return 1.0;
    }
    (harmonic + (m as f64 - 1.0) / (n as f64 - 1.0) * (n as f64 - harmonic)) / n as f64
}

pub struct PlantedResult {
    pub map: f64,
    /// MAP after the participation labels are shuffled.
    pub control_map: f64,
    /// Random-ranking expectation for the control's users.
    pub control_expected: f64,
}

const PLANTED_USERS: usize = 20;
const PLANTED_DISCUSSIONS: usize = 30;

// Planted K = 2 model driven by features only: the user factor is
// (goal + 0.3, 2 centrality + 0.3) and the discussion factor is
// (replies, length). Discussions sit in five tight clusters of directions
// and every user's direction points at one cluster, so each user's top
// discussions are exactly one cluster.
struct Planted {
    info: Vec<UserInfo>,
    /// (replies, length) per discussion.
    shape: Vec<(u64, u64)>,
    pairs: Vec<(String, String)>,
}

const CLUSTER_DEGREES: [f64; 5] = [10.0, 25.0, 40.0, 55.0, 70.0];

fn planted(rng: &mut ChaCha8Rng) -> Planted {
    let per_cluster = PLANTED_DISCUSSIONS / CLUSTER_DEGREES.len();
    let shape: Vec<(u64, u64)> = (0..PLANTED_DISCUSSIONS)
        .map(|d| {
            let angle = (CLUSTER_DEGREES[d / per_cluster] + rng.gen_range(-1.5..1.5)).to_radians();
            ((1000.0 * angle.cos()).round() as u64, (1000.0 * angle.sin()).round() as u64)
        })
        .collect();
    // Four users per cluster; the goal quality is drawn among those for
    // which some centrality in [0, 1] aims the user factor at the cluster.
    let info: Vec<UserInfo> = (0..PLANTED_USERS)
        .map(|u| {
            let tan = CLUSTER_DEGREES[u % CLUSTER_DEGREES.len()].to_radians().tan();
            let aim = |goal: u8| ((goal as f64 + 0.3) * tan - 0.3) / 2.0;
            let goals: Vec<u8> = (0..=2).filter(|&g| (0.0..=1.0).contains(&aim(g))).collect();
            let goal = *goals.choose(rng).expect("every cluster is reachable");
            UserInfo {
                user_id: format!("u{u:02}"),
                goal_quality: goal,
                centrality: aim(goal),
                registration_week: 0,
            }
        })
        .collect();
    let mut pairs = Vec::new();
    for u in &info {
        let left = (u.goal_quality as f64 + 0.3, 2.0 * u.centrality + 0.3);
        let mut ranked: Vec<(f64, usize)> = shape
            .iter()
            .enumerate()
            .map(|(d, &(r, l))| (left.0 * r as f64 + left.1 * l as f64, d))
            .collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, d) in ranked.iter().take(per_cluster) {
            pairs.push((u.user_id.clone(), format!("d{d:02}")));
        }
    }
    Planted { info, shape, pairs }
}

// Trains on a per-user split and ranks every discussion the user has not
// trained on. Returns the MAP and the random-ranking expectation.
fn map_on_split(p: &Planted, pairs: &[(String, String)], flags: FeatureFlags, seed: u64) -> (f64, f64) {
    let (train, test) = split_per_user(pairs, seed);
    let mut members: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (u, d) in &train {
        members.entry(d.as_str()).or_default().push(u.clone());
    }
    let discussions: Vec<Discussion> = p
        .shape
        .iter()
        .enumerate()
        .map(|(d, &(n_replies, length))| {
            let id = format!("d{d:02}");
            Discussion {
                participants: members.get(id.as_str()).cloned().unwrap_or_default(),
                discussion_id: id,
                n_replies,
                length,
            }
        })
        .collect();
    let table = FeatureTable::build(&p.info, &discussions, &train).unwrap();
    let positives: Vec<(usize, usize)> = train
        .iter()
        .map(|(u, d)| (table.user(u).unwrap(), table.discussion(d).unwrap()))
        .collect();
    let model = train_relevance(table, &positives, flags, TrainConfig::default(), seed).unwrap();

    let trained = by_user(&train);
    let held_out = by_user(&test);
    let candidates: BTreeMap<String, Vec<String>> = held_out
        .keys()
        .map(|u| {
            let seen = &trained[u];
            let cands = discussions
                .iter()
                .map(|d| d.discussion_id.clone())
                .filter(|d| !seen.contains(d))
                .collect();
            (u.clone(), cands)
        })
        .collect();
    let report = evaluate_map(|u, d| model.predict(u, d).unwrap(), &held_out, &candidates);
    let expected = held_out
        .iter()
        .map(|(u, pos)| random_ap(candidates[u].len(), pos.len()))
        .sum::<f64>()
        / held_out.len() as f64;
    (report.map, expected)
}

/// Mean over `replicates` independently planted data sets (seeds `0..`).
pub fn planted_recommendation(replicates: u64) -> PlantedResult {
    let runs: Vec<PlantedResult> = (0..replicates).map(planted_replicate).collect();
    let mean = |f: fn(&PlantedResult) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
    PlantedResult {
        map: mean(|r| r.map),
        control_map: mean(|r| r.control_map),
        control_expected: mean(|r| r.control_expected),
    }
}

pub fn planted_replicate(seed: u64) -> PlantedResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = planted(&mut rng);
    let (map, _) = map_on_split(&p, &p.pairs, FeatureFlags::ALL[3], seed);

    // Same users and counts, discussions drawn at random.
    let mut shuffled = Vec::new();
    let all: Vec<usize> = (0..PLANTED_DISCUSSIONS).collect();
    for u in &p.info {
        for &d in all.choose_multiple(&mut rng, PLANTED_DISCUSSIONS / CLUSTER_DEGREES.len()) {
            shuffled.push((u.user_id.clone(), format!("d{d:02}")));
        }
    }
    let (control_map, control_expected) = map_on_split(&p, &shuffled, FeatureFlags::ALL[3], seed);
    PlantedResult {
        map,
        control_map,
        control_expected,
    }
}

// ---------------------------------------------------------------- flow

/// Random assignment problem. Scores and thresholds are multiples of 1/8
/// so objective sums are exact in binary floating point.
pub fn random_problem(
    rng: &mut ChaCha8Rng,
    users: usize,
    discussions: usize,
    max_pairs: usize,
    mode: FilterMode,
) -> AssignmentProblem {
    let mut all: Vec<(usize, usize)> = (0..users).flat_map(|u| (0..discussions).map(move |d| (u, d))).collect();
    all.shuffle(rng);
    all.truncate(max_pairs);
    all.sort_unstable();
    let (use_g, use_c) = mode.uses();
    AssignmentProblem {
        users: (0..users).map(|u| format!("u{u}")).collect(),
        discussions: (0..discussions).map(|d| format!("d{d}")).collect(),
        goal: (0..users).map(|_| rng.gen_range(0..=2) as f64).collect(),
        centrality: (0..users).map(|_| rng.gen_range(0..=8) as f64 / 8.0).collect(),
        candidates: all
            .into_iter()
            .map(|(user, discussion)| Candidate {
                user,
                discussion,
                score: rng.gen_range(-8..=16) as f64 / 8.0,
            })
            .collect(),
        goal_threshold: use_g.then_some(1.0),
        centrality_threshold: use_c.then_some(0.5),
        penalty: rng.gen_range(0..=4) as f64 / 8.0,
        cap: rng.gen_range(1..=3),
        workload: rng.gen_range(0..=2) as f64 / 8.0,
    }
}

/// Best objective over all feasible subsets of the candidates.
pub fn brute_force_optimum(problem: &AssignmentProblem) -> Option<f64> {
    let n = problem.candidates.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let a = Assignment::new(
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| (problem.candidates[i].user, problem.candidates[i].discussion)),
        );
        if check_assignment(problem, &a).is_ok() {
            let v = objective(problem, &a);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best
}

#[derive(Debug, Default)]
pub struct FlowCheck {
    pub instances: usize,
    pub feasible: usize,
    /// Instances where the filter's objective differs from the optimum.
    pub objective_mismatches: usize,
    /// Outputs violating a cap or an enabled requirement.
    pub violations: usize,
    /// Infeasible reported on a feasible instance, or the reverse.
    pub feasibility_mismatches: usize,
}

pub fn flow_vs_brute_force(instances: usize, seed: u64) -> FlowCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = [FilterMode::MccfG, FilterMode::MccfC, FilterMode::MccfGc];
    let mut out = FlowCheck {
        instances,
        ..FlowCheck::default()
    };
    for i in 0..instances {
        let users = rng.gen_range(1..=4);
        let discussions = rng.gen_range(1..=4);
        let pairs = rng.gen_range(1..=12);
        let problem = random_problem(&mut rng, users, discussions, pairs, modes[i % 3]);
        let optimum = brute_force_optimum(&problem);
        match (constraint_filter(&problem), optimum) {
            (Ok(a), Some(best)) => {
                out.feasible += 1;
                if check_assignment(&problem, &a).is_err() {
                    out.violations += 1;
                }
                if objective(&problem, &a) != best {
                    out.objective_mismatches += 1;
                }
            }
            (Err(_), None) => {}
            _ => out.feasibility_mismatches += 1,
        }
    }
    out
}

#[derive(Debug, Default)]
pub struct ObCheck {
    pub fixtures: usize,
    pub flow_not_lower: usize,
    pub worst_gap: f64,
}

/// Fixtures are random problems with zero workload whose baseline output
/// already satisfies the flow mode's requirements and caps, drawn by
/// rejection. Counts fixtures where the flow's OB is at least the
/// baseline's.
pub fn ob_direction(fixtures: usize, seed: u64) -> ObCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let baselines = [FilterMode::GoalPart, FilterMode::HighCent, FilterMode::GoalPartHighCent];
    let thresholds = BaselineThresholds {
        goal_min: 1.0,
        centrality_above: 0.5 - 1.0 / 16.0,
    };
    let mut out = ObCheck {
        worst_gap: f64::INFINITY,
        ..ObCheck::default()
    };
    while out.fixtures < fixtures {
        let mode = baselines[out.fixtures % 3];
        let users = rng.gen_range(3..=8);
        let discussions = rng.gen_range(2..=5);
        let mut problem = random_problem(&mut rng, users, discussions, users * discussions, mode.flow_counterpart());
        problem.workload = 0.0;
        problem.cap = discussions;
        let top_n = rng.gen_range(1..=3);
        let base = baseline_filter(&problem, mode, top_n, thresholds);
        if check_assignment(&problem, &base).is_err() {
            continue;
        }
        let flow = constraint_filter(&problem).unwrap();
        let gap = evaluate_ob(&problem, &flow) - evaluate_ob(&problem, &base);
        out.fixtures += 1;
        if gap >= 0.0 {
            out.flow_not_lower += 1;
        }
        out.worst_gap = out.worst_gap.min(gap);
    }
    out
}
