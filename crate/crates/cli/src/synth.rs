use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rolemodel::corpus::{EffType, SequenceSet, SocialCategory};
use rolemodel::recommender::{Discussion, UserInfo};
use rolemodel::sttm::{
    generate_synthetic, well_separated_truth, CategorySchedule, Hyperparams, SynthShape, TrueProfiles, TruthRecord,
};
use serde::Serialize;

use crate::artifact::{read_json_payload, sha256_hex, write_json, write_text, Provenance};
use crate::config::RunConfig;
use crate::Failure;

// Offset between the corpus seed and the recommendation-data seed.
const RECOMMEND_SEED_OFFSET: u64 = 0x5eed;

#[derive(Serialize)]
struct SequencesBody<'a> {
    sequences: &'a SequenceSet,
}

#[derive(Serialize)]
struct TruthBody<'a> {
    truth: &'a TruthRecord,
    /// SHA-256 of the plain-text files written next to this one.
    artifacts: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct UsersBody<'a> {
    users: &'a [UserInfo],
}

fn shape_of(truth: &TrueProfiles) -> Hyperparams {
    Hyperparams {
        states: truth.theta.len(),
        categories: truth.init.len(),
        topics: truth.phi.len(),
        doc_types: truth.psi.first().map_or(0, Vec::len),
        ..Hyperparams::default()
    }
}

/// Users with random attributes and latent tastes; each joins the
/// `per_user` discussions that suit them best. A discussion's first
/// participant is the member it suits best.
fn recommendation_data(
    users: &[String],
    n_discussions: usize,
    per_user: usize,
    seed: u64,
) -> (Vec<UserInfo>, Vec<Discussion>, Vec<(String, String)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let info: Vec<UserInfo> = users
        .iter()
        .map(|u| UserInfo {
            user_id: u.clone(),
            goal_quality: rng.gen_range(0..=2),
            centrality: rng.gen_range(0.0..1.0),
            registration_week: rng.gen_range(0..3),
        })
        .collect();
    let taste: Vec<[f64; 2]> = users.iter().map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let topic: Vec<[f64; 2]> = (0..n_discussions)
        .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect();
    let replies: Vec<u64> = (0..n_discussions).map(|_| rng.gen_range(1..=60)).collect();
    let lengths: Vec<u64> = (0..n_discussions).map(|_| rng.gen_range(50..=3000)).collect();
    let affinity = |u: usize, d: usize| {
        taste[u][0] * topic[d][0]
            + taste[u][1] * topic[d][1]
            + 0.2 * info[u].goal_quality as f64 * replies[d] as f64 / 60.0
            + 0.2 * info[u].centrality * lengths[d] as f64 / 3000.0
    };

    let mut members: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n_discussions];
    let mut pairs = Vec::new();
    for u in 0..users.len() {
        let mut ranked: Vec<(f64, usize)> = (0..n_discussions).map(|d| (affinity(u, d), d)).collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(score, d) in ranked.iter().take(per_user) {
            members[d].push((score, u));
            pairs.push((users[u].clone(), format!("d{d:03}")));
        }
    }
    let discussions = members
        .into_iter()
        .enumerate()
        .map(|(d, mut m)| {
            m.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            Discussion {
                discussion_id: format!("d{d:03}"),
                n_replies: replies[d],
                length: lengths[d],
                participants: m.into_iter().map(|(_, u)| users[u].clone()).collect(),
            }
        })
        .collect();
    pairs.sort();
    (info, discussions, pairs)
}

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let s = &cfg.synth;
    let (h, truth) = match &cfg.paths.truth {
        Some(path) => {
            let truth: TrueProfiles = read_json_payload(path, "truth")?;
            let h = Hyperparams {
                alpha: cfg.model.alpha,
                beta: cfg.model.beta,
                nu: cfg.model.nu,
                gamma: cfg.model.gamma,
                ..shape_of(&truth)
            };
            (h, truth)
        }
        None => {
            let h = cfg.hyperparams(SocialCategory::COUNT, EffType::COUNT);
            let truth = well_separated_truth(&h, s.vocab_size, cfg.seed)?;
            (h, truth)
        }
    };
    let shape = SynthShape {
        lengths: vec![s.length; s.sequences],
        docs_per_step: s.docs_per_step,
        words_per_doc: s.words_per_doc,
        schedule: CategorySchedule::Uniform,
    };
    let (set, record) = generate_synthetic(&h, &truth, &shape, cfg.seed)?;

    let users: Vec<String> = set.sequences.iter().map(|q| q.user.clone()).collect();
    let (info, discussions, pairs) = recommendation_data(
        &users,
        s.discussions,
        s.per_user.min(s.discussions),
        cfg.seed.wrapping_add(RECOMMEND_SEED_OFFSET),
    );

    let mut participation = String::from("user_id,discussion_id\n");
    for (u, d) in &pairs {
        participation.push_str(&format!("{u},{d}\n"));
    }
    let mut jsonl = String::new();
    for d in &discussions {
        jsonl.push_str(&serde_json::to_string(d).map_err(|e| Failure::internal(e.to_string()))?);
        jsonl.push('\n');
    }

    let out = cfg.out_dir();
    let prov = Provenance::of(cfg);
    write_text(&out.join("participation.csv"), &participation)?;
    write_text(&out.join("discussions.jsonl"), &jsonl)?;
    write_json(&out.join("sequences.json"), &prov, &SequencesBody { sequences: &set })?;
    write_json(&out.join("users.json"), &prov, &UsersBody { users: &info })?;
    let artifacts = BTreeMap::from([
        ("participation.csv".to_string(), sha256_hex(participation.as_bytes())),
        ("discussions.jsonl".to_string(), sha256_hex(jsonl.as_bytes())),
    ]);
    write_json(
        &out.join("truth.json"),
        &prov,
        &TruthBody {
            truth: &record,
            artifacts,
        },
    )?;
    eprintln!(
        "synth: {} sequences, {} time points, {} tokens; {} discussions, {} participation pairs -> {}",
        set.sequences.len(),
        set.n_timepoints(),
        set.n_tokens(),
        discussions.len(),
        pairs.len(),
        out.display()
    );
    Ok(())
}
