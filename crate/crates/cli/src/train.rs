use rolemodel::sttm::{init_model, joint_log_prob, run_gibbs, GibbsRun, StateProfiles, SttmModel};
use serde::Serialize;

use crate::artifact::{write_json, Provenance};
use crate::config::RunConfig;
use crate::input::load_sequences;
use crate::Failure;

#[derive(Debug, Clone, Serialize)]
struct ChainSummary {
    seed: u64,
    /// Mean joint log-probability over the post-burn-in sweeps.
    mean_log_prob: f64,
    final_log_prob: f64,
}

#[derive(Serialize)]
struct ModelBody<'a> {
    model: &'a SttmModel,
}

#[derive(Serialize)]
struct ProfilesBody<'a> {
    profiles: &'a StateProfiles,
    snapshots: usize,
    chain: usize,
    chains: &'a [ChainSummary],
    log_prob_trace: &'a [f64],
}

fn summarize(seed: u64, model: &SttmModel, run: &GibbsRun, burn_in: usize) -> ChainSummary {
    let final_log_prob = run.log_prob_trace.last().copied().unwrap_or_else(|| joint_log_prob(model));
    let tail = run.log_prob_trace.get(burn_in..).unwrap_or(&[]);
    let mean_log_prob = if tail.is_empty() {
        final_log_prob
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    };
    ChainSummary {
        seed,
        mean_log_prob,
        final_log_prob,
    }
}

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let set = load_sequences(cfg)?;
    let h = cfg.hyperparams(set.categories, set.doc_types);
    let scfg = cfg.sampler_config();
    scfg.validate()?;
    let n_chains = cfg.sampler.chains.max(1);

    let results: Vec<Result<(SttmModel, GibbsRun, ChainSummary), Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..n_chains as u64)
            .map(|c| {
                let set = &set;
                let seed = cfg.seed.wrapping_add(c);
                scope.spawn(move || -> Result<_, Failure> {
                    let mut model = init_model(set, h, seed)?;
                    let run = run_gibbs(&mut model, &scfg)?;
                    let summary = summarize(seed, &model, &run, scfg.burn_in);
                    Ok((model, run, summary))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Failure::internal("sampler thread panicked"))))
            .collect()
    });
    let mut chains = Vec::with_capacity(n_chains);
    for r in results {
        chains.push(r?);
    }
    let summaries: Vec<ChainSummary> = chains.iter().map(|c| c.2.clone()).collect();
    let best = (0..chains.len())
        .max_by(|&a, &b| {
            summaries[a]
                .mean_log_prob
                .total_cmp(&summaries[b].mean_log_prob)
                .then(b.cmp(&a))
        })
        .expect("at least one chain");
    let (model, run, _) = &chains[best];

    let prov = Provenance::of(cfg);
    let model_path = cfg.path_or_out(&cfg.paths.model, "model.json");
    let profiles_path = cfg.path_or_out(&cfg.paths.profiles, "profiles.json");
    write_json(&model_path, &prov, &ModelBody { model })?;
    write_json(
        &profiles_path,
        &prov,
        &ProfilesBody {
            profiles: &run.profiles,
            snapshots: run.snapshots,
            chain: best,
            chains: &summaries,
            log_prob_trace: &run.log_prob_trace,
        },
    )?;
    eprintln!(
        "train: S={} Z={} on {} sequences, {} sweeps x {} chain(s); kept chain {best} (mean log p {:.3}) -> {}",
        h.states,
        h.topics,
        set.sequences.len(),
        scfg.sweeps,
        n_chains,
        summaries[best].mean_log_prob,
        profiles_path.display()
    );
    Ok(())
}
