use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::profiles::{profiles_from_sums, CountSums};
use super::{joint_log_prob, ConditionalForm, SamplerConfig, ScanOrder, StateProfiles, SttmModel};
use crate::special::ln_rising;
use crate::Result;

fn draw<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    // Rounding left `u` at or past the last bucket.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn normalize(mut weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    weights
}

fn exp_normalize(log_w: &[f64]) -> Vec<f64> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    normalize(log_w.iter().map(|l| (l - max).exp()).collect())
}

impl SttmModel {
    fn remove_token(&mut self, m: usize, t: usize, i: usize) {
        let g = self.timepoint_index(m, t);
        let (j, c, w) = (self.topics[m][t][i], self.states[m][t], self.data[m].steps[t].words[i]);
        let (v, z) = (self.vocab_size, self.hyper.topics);
        let counts = &mut self.counts;
        counts.mtz[g][j] -= 1;
        counts.zw[j * v + w as usize] -= 1;
        counts.z_total[j] -= 1;
        counts.sz[c * z + j] -= 1;
        counts.sz_total[c] -= 1;
    }

    fn add_token(&mut self, m: usize, t: usize, i: usize, j: usize) {
        let g = self.timepoint_index(m, t);
        let (c, w) = (self.states[m][t], self.data[m].steps[t].words[i]);
        let (v, z) = (self.vocab_size, self.hyper.topics);
        self.topics[m][t][i] = j;
        let counts = &mut self.counts;
        counts.mtz[g][j] += 1;
        counts.zw[j * v + w as usize] += 1;
        counts.z_total[j] += 1;
        counts.sz[c * z + j] += 1;
        counts.sz_total[c] += 1;
    }

    // Unnormalized topic weights for token (m, t, i), which must already be
    // removed from the counts.
    fn topic_weights(&self, m: usize, t: usize, i: usize, form: ConditionalForm) -> Vec<f64> {
        let h = &self.hyper;
        let g = self.timepoint_index(m, t);
        let c = self.states[m][t];
        let w = self.data[m].steps[t].words[i] as usize;
        let v_beta = self.vocab_size as f64 * h.beta;
        (0..h.topics)
            .map(|j| {
                let doc_side = match form {
                    ConditionalForm::Exact => self.counts.sz[c * h.topics + j],
                    ConditionalForm::Timepoint => self.counts.mtz[g][j],
                };
                let word = (self.counts.zw[j * self.vocab_size + w] as f64 + h.beta)
                    / (self.counts.z_total[j] as f64 + v_beta);
                (doc_side as f64 + h.alpha) * word
            })
            .collect()
    }

    /// Normalized conditional distribution of the topic of token `(m, t, i)`
    /// given every other assignment. Counts are left unchanged.
    pub fn topic_conditional(&mut self, m: usize, t: usize, i: usize, form: ConditionalForm) -> Vec<f64> {
        let j = self.topics[m][t][i];
        self.remove_token(m, t, i);
        let p = normalize(self.topic_weights(m, t, i, form));
        self.add_token(m, t, i, j);
        p
    }

    /// Resamples the topic of token `(m, t, i)` and returns the new topic.
    pub fn sample_topic(&mut self, m: usize, t: usize, i: usize, form: ConditionalForm) -> usize {
        self.remove_token(m, t, i);
        let weights = self.topic_weights(m, t, i, form);
        let j = draw(&mut self.rng, &weights);
        self.add_token(m, t, i, j);
        j
    }

    fn outgoing_row(&self, m: usize, t: usize) -> Option<(usize, usize)> {
        (t + 1 < self.data[m].steps.len()).then(|| (self.data[m].steps[t].category, self.states[m][t + 1]))
    }

    // Adds (+1) or removes (-1) time point (m, t) from the emission counts
    // and its adjacent transitions from the transition counts.
    fn shift_timepoint(&mut self, m: usize, t: usize, delta: i64) {
        let h = self.hyper;
        let g = self.timepoint_index(m, t);
        let c = self.states[m][t];
        let bump = |x: &mut u32, n: u32| {
            *x = (*x as i64 + delta * n as i64) as u32;
        };
        let step = &self.data[m].steps[t];
        for (k, &n) in step.doc_type_counts.iter().enumerate() {
            bump(&mut self.counts.sd[c * h.doc_types + k], n);
            bump(&mut self.counts.sd_total[c], n);
        }
        for j in 0..h.topics {
            let n = self.counts.mtz[g][j];
            bump(&mut self.counts.sz[c * h.topics + j], n);
            bump(&mut self.counts.sz_total[c], n);
        }
        let (src, a) = self.incoming_row(m, t);
        let idx = self.sas_index(src, a, c);
        bump(&mut self.counts.sas[idx], 1);
        bump(&mut self.counts.sas_total[src * h.categories + a], 1);
        if let Some((a_t, next)) = self.outgoing_row(m, t) {
            let idx = self.sas_index(c, a_t, next);
            bump(&mut self.counts.sas[idx], 1);
            bump(&mut self.counts.sas_total[c * h.categories + a_t], 1);
        }
    }

    // Log weights of each state for time point (m, t), which must already be
    // removed from the counts.
    fn state_log_weights(&self, m: usize, t: usize, form: ConditionalForm) -> Vec<f64> {
        let h = &self.hyper;
        let g = self.timepoint_index(m, t);
        let step = &self.data[m].steps[t];
        let n_docs = step.n_docs();
        let n_words = step.words.len() as u32;
        let (src, a_src) = self.incoming_row(m, t);
        let outgoing = self.outgoing_row(m, t);
        let s_gamma = h.states as f64 * h.gamma;
        let c = &self.counts;

        (0..h.states)
            .map(|state| {
                let mut lw = 0.0;

                for (k, &n) in step.doc_type_counts.iter().enumerate() {
                    lw += ln_rising(c.sd[state * h.doc_types + k] as f64 + h.nu, n);
                }
                lw -= ln_rising(c.sd_total[state] as f64 + h.doc_types as f64 * h.nu, n_docs);

                for j in 0..h.topics {
                    lw += ln_rising(c.sz[state * h.topics + j] as f64 + h.alpha, c.mtz[g][j]);
                }
                lw -= ln_rising(c.sz_total[state] as f64 + h.topics as f64 * h.alpha, n_words);

                lw += (c.sas[self.sas_index(src, a_src, state)] as f64 + h.gamma).ln()
                    - (c.sas_total[src * h.categories + a_src] as f64 + s_gamma).ln();

                if let Some((a_t, next)) = outgoing {
                    let num = c.sas[self.sas_index(state, a_t, next)] as f64 + h.gamma;
                    match form {
                        ConditionalForm::Exact => {
                            // The incoming transition shares this row when it
                            // leaves `state` under the same category.
                            let same_row = src == state && a_src == a_t;
                            let loop_bonus = (same_row && state == next) as u32 as f64;
                            let row_bonus = same_row as u32 as f64;
                            lw += (num + loop_bonus).ln()
                                - (c.sas_total[state * h.categories + a_t] as f64 + row_bonus + s_gamma)
                                    .ln();
                        }
                        ConditionalForm::Timepoint => {
                            let ind = |x: usize| (src == x && x == next) as u32 as f64;
                            let denom: f64 = (0..h.states)
                                .map(|x| c.sas[self.sas_index(x, a_t, next)] as f64 + ind(x) + h.gamma)
                                .sum();
                            lw += (num + ind(state)).ln() - denom.ln();
                        }
                    }
                }
                lw
            })
            .collect()
    }

    /// Normalized conditional distribution of the state of time point
    /// `(m, t)` given every other assignment. Counts are left unchanged.
    pub fn state_conditional(&mut self, m: usize, t: usize, form: ConditionalForm) -> Vec<f64> {
        self.shift_timepoint(m, t, -1);
        let p = exp_normalize(&self.state_log_weights(m, t, form));
        self.shift_timepoint(m, t, 1);
        p
    }

    /// Resamples the state of time point `(m, t)` and returns it.
    pub fn sample_state(&mut self, m: usize, t: usize, form: ConditionalForm) -> usize {
        self.shift_timepoint(m, t, -1);
        let weights = exp_normalize(&self.state_log_weights(m, t, form));
        let c = draw(&mut self.rng, &weights);
        self.states[m][t] = c;
        self.shift_timepoint(m, t, 1);
        c
    }

    /// One full pass: every topic site, then every state site.
    pub fn sweep(&mut self, scan: ScanOrder, form: ConditionalForm) {
        let mut token_sites: Vec<(usize, usize, usize)> = Vec::with_capacity(self.n_tokens());
        let mut state_sites: Vec<(usize, usize)> = Vec::with_capacity(self.n_timepoints());
        for (m, seq) in self.data.iter().enumerate() {
            for (t, step) in seq.steps.iter().enumerate() {
                state_sites.push((m, t));
                token_sites.extend((0..step.words.len()).map(|i| (m, t, i)));
            }
        }
        if scan == ScanOrder::Random {
            token_sites.shuffle(&mut self.rng);
            state_sites.shuffle(&mut self.rng);
        }
        if self.hyper.topics > 1 {
            for (m, t, i) in token_sites {
                self.sample_topic(m, t, i, form);
            }
        }
        if self.hyper.states > 1 {
            for (m, t) in state_sites {
                self.sample_state(m, t, form);
            }
        }
    }
}

/// Output of a sampling run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GibbsRun {
    pub profiles: StateProfiles,
    /// Joint log-probability after each sweep.
    pub log_prob_trace: Vec<f64>,
    /// Number of post-burn-in snapshots averaged into the profiles.
    pub snapshots: usize,
}

/// Runs `cfg.sweeps` sweeps and estimates profiles from the average of the
/// count snapshots taken every `cfg.thin` sweeps after burn-in. If no
/// snapshot falls in the window the final counts are used.
pub fn run_gibbs(model: &mut SttmModel, cfg: &SamplerConfig) -> Result<GibbsRun> {
    cfg.validate()?;
    let mut sums = CountSums::zeros_like(&model.counts).with_vocab(&model.vocab);
    let mut snapshots = 0;
    let mut log_prob_trace = Vec::with_capacity(cfg.sweeps);
    for sweep in 1..=cfg.sweeps {
        model.sweep(cfg.scan, cfg.conditionals);
        log_prob_trace.push(joint_log_prob(model));
        if sweep > cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0 {
            sums.add(&model.counts);
            snapshots += 1;
        }
    }
    if snapshots == 0 {
        sums.add(&model.counts);
    }
    let profiles = profiles_from_sums(
        &model.hyper,
        &sums.scaled(1.0 / snapshots.max(1) as f64),
        &model.sequence_lengths(),
    );
    Ok(GibbsRun {
        profiles,
        log_prob_trace,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{SeqDocument, Sequence, SequenceSet, TimePoint, Vocabulary};
    use crate::sttm::{estimate_profiles, init_model, Hyperparams};

    fn small_set() -> SequenceSet {
        let mk = |user: &str, weeks: &[(u32, usize, Vec<u32>)]| Sequence {
            user: user.into(),
            steps: weeks
                .iter()
                .map(|(w, cat, toks)| TimePoint {
                    week: *w,
                    category: *cat,
                    docs: vec![SeqDocument {
                        doc_type: (*w as usize) % 2,
                        tokens: toks.clone(),
                    }],
                })
                .collect(),
        };
        SequenceSet {
            vocab: Vocabulary::from_words(["a", "b", "c", "d"]),
            doc_types: 2,
            categories: 2,
            sequences: vec![
                mk("u1", &[(0, 0, vec![0, 1, 1]), (1, 1, vec![2, 3]), (2, 1, vec![0])]),
                mk("u2", &[(0, 1, vec![3, 3, 2]), (3, 0, vec![1])]),
            ],
        }
    }

    fn hyper(states: usize, topics: usize) -> Hyperparams {
        Hyperparams {
            states,
            categories: 2,
            topics,
            doc_types: 2,
            alpha: 0.5,
            beta: 0.3,
            nu: 0.7,
            gamma: 0.4,
        }
    }

    #[test]
    fn single_topic_always_zero() {
        let mut model = init_model(&small_set(), hyper(2, 1), 5).unwrap();
        for _ in 0..10 {
            assert_eq!(model.sample_topic(0, 0, 1, ConditionalForm::Exact), 0);
        }
    }

    #[test]
    fn single_state_always_zero() {
        let mut model = init_model(&small_set(), hyper(1, 2), 5).unwrap();
        for _ in 0..10 {
            assert_eq!(model.sample_state(0, 1, ConditionalForm::Exact), 0);
        }
    }

    #[test]
    fn conditionals_sum_to_one() {
        for form in [ConditionalForm::Exact, ConditionalForm::Timepoint] {
            let mut model = init_model(&small_set(), hyper(3, 2), 11).unwrap();
            for (m, t) in [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1)] {
                let p = model.state_conditional(m, t, form);
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                let q = model.topic_conditional(m, t, 0, form);
                assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            model.audit().unwrap();
        }
    }

    #[test]
    fn isolated_token_has_uniform_topic_conditional() {
        // A single token: once removed, all counts are zero and the
        // conditional reduces to the symmetric prior.
        let set = SequenceSet {
            vocab: Vocabulary::from_words(["x", "y", "z"]),
            doc_types: 1,
            categories: 1,
            sequences: vec![Sequence {
                user: "u".into(),
                steps: vec![TimePoint {
                    week: 0,
                    category: 0,
                    docs: vec![SeqDocument { doc_type: 0, tokens: vec![1] }],
                }],
            }],
        };
        let h = Hyperparams {
            states: 2,
            categories: 1,
            topics: 4,
            doc_types: 1,
            ..Hyperparams::default()
        };
        let mut model = init_model(&set, h, 3).unwrap();
        for form in [ConditionalForm::Exact, ConditionalForm::Timepoint] {
            let p = model.topic_conditional(0, 0, 0, form);
            for v in p {
                assert!((v - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_counts_give_uniform_state_conditional() {
        // One time point, alone: with it removed every state has zero counts.
        let set = SequenceSet {
            vocab: Vocabulary::from_words(["x", "y"]),
            doc_types: 2,
            categories: 1,
            sequences: vec![Sequence {
                user: "u".into(),
                steps: vec![TimePoint {
                    week: 0,
                    category: 0,
                    docs: vec![SeqDocument { doc_type: 1, tokens: vec![0, 1, 1] }],
                }],
            }],
        };
        let h = Hyperparams {
            states: 3,
            categories: 1,
            topics: 2,
            doc_types: 2,
            ..Hyperparams::default()
        };
        let mut model = init_model(&set, h, 3).unwrap();
        let p = model.state_conditional(0, 0, ConditionalForm::Exact);
        for v in p {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_sweeps_return_initial_profiles() {
        let mut model = init_model(&small_set(), hyper(2, 2), 1).unwrap();
        let expected = estimate_profiles(&model);
        let cfg = SamplerConfig {
            sweeps: 0,
            burn_in: 0,
            ..SamplerConfig::default()
        };
        let run = run_gibbs(&mut model, &cfg).unwrap();
        assert_eq!(run.profiles, expected);
        assert!(run.log_prob_trace.is_empty());
    }

    #[test]
    fn counts_stay_consistent_across_sweeps() {
        for scan in [ScanOrder::Fixed, ScanOrder::Random] {
            let mut model = init_model(&small_set(), hyper(3, 2), 21).unwrap();
            for _ in 0..50 {
                model.sweep(scan, ConditionalForm::Exact);
                model.audit().unwrap();
            }
        }
    }

    #[test]
    fn same_seed_bit_identical_profiles() {
        let cfg = SamplerConfig {
            sweeps: 40,
            burn_in: 10,
            thin: 5,
            ..SamplerConfig::default()
        };
        let run = |seed| {
            let mut model = init_model(&small_set(), hyper(3, 2), seed).unwrap();
            run_gibbs(&mut model, &cfg).unwrap()
        };
        let (a, b) = (run(8), run(8));
        assert_eq!(a.profiles, b.profiles);
        assert_eq!(a.log_prob_trace, b.log_prob_trace);
        assert_eq!(a.snapshots, 6);
    }

    #[test]
    fn invalid_schedule_rejected() {
        let mut model = init_model(&small_set(), hyper(2, 2), 1).unwrap();
        let cfg = SamplerConfig {
            sweeps: 10,
            burn_in: 10,
            ..SamplerConfig::default()
        };
        assert!(run_gibbs(&mut model, &cfg).is_err());
    }
}
