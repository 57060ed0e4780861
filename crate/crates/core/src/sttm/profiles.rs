use serde::{Deserialize, Serialize};

use super::{CountTables, Hyperparams, SttmModel};
use crate::corpus::Vocabulary;

/// Smoothed distributions estimated from sampler counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateProfiles {
    pub hyper: Hyperparams,
    pub vocab: Vocabulary,
    /// Topic-word distributions `phi[j][w]`.
    pub phi: Vec<Vec<f64>>,
    /// Per-state topic distributions `theta[c][j]`.
    pub theta: Vec<Vec<f64>>,
    /// Per-state document-type distributions `psi[c][k]`.
    pub psi: Vec<Vec<f64>>,
    /// Conditional transitions `pi[c][b][c']` out of real states.
    pub pi: Vec<Vec<Vec<f64>>>,
    /// First-state distribution per social category `init[b][c]`.
    pub init: Vec<Vec<f64>>,
    /// Per-time-point topic distributions `theta_doc[m][t][j]`.
    pub theta_doc: Vec<Vec<Vec<f64>>>,
}

impl StateProfiles {
    /// Every distribution row, for invariant checks.
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.phi
            .iter()
            .chain(&self.theta)
            .chain(&self.psi)
            .chain(self.pi.iter().flatten())
            .chain(&self.init)
            .chain(self.theta_doc.iter().flatten())
            .map(Vec::as_slice)
    }

    /// Checks shapes and that every row is a distribution with entries in
    /// (0, 1].
    pub fn validate(&self) -> Result<(), String> {
        let h = &self.hyper;
        let v = self.vocab.len();
        let shape_ok = self.phi.len() == h.topics
            && self.phi.iter().all(|r| r.len() == v)
            && self.theta.len() == h.states
            && self.theta.iter().all(|r| r.len() == h.topics)
            && self.psi.len() == h.states
            && self.psi.iter().all(|r| r.len() == h.doc_types)
            && self.pi.len() == h.states
            && self
                .pi
                .iter()
                .all(|b| b.len() == h.categories && b.iter().all(|r| r.len() == h.states))
            && self.init.len() == h.categories
            && self.init.iter().all(|r| r.len() == h.states);
        if !shape_ok {
            return Err("profile shapes do not match hyperparameters".into());
        }
        for row in self.rows() {
            if row.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
                return Err("probability outside (0, 1]".into());
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(format!("row sums to {sum}"));
            }
        }
        Ok(())
    }
}

/// Real-valued counts with the shapes of [`CountTables`]; used to average
/// post-burn-in snapshots.
#[derive(Debug, Clone)]
pub(crate) struct CountSums {
    mtz: Vec<Vec<f64>>,
    zw: Vec<f64>,
    sd: Vec<f64>,
    sz: Vec<f64>,
    sas: Vec<f64>,
    vocab: Vocabulary,
}

impl CountSums {
    pub(crate) fn zeros_like(c: &CountTables) -> Self {
        Self {
            mtz: c.mtz.iter().map(|r| vec![0.0; r.len()]).collect(),
            zw: vec![0.0; c.zw.len()],
            sd: vec![0.0; c.sd.len()],
            sz: vec![0.0; c.sz.len()],
            sas: vec![0.0; c.sas.len()],
            vocab: Vocabulary::new(),
        }
    }

    pub(crate) fn with_vocab(mut self, vocab: &Vocabulary) -> Self {
        self.vocab = vocab.clone();
        self
    }

    pub(crate) fn add(&mut self, c: &CountTables) {
        let acc = |dst: &mut [f64], src: &[u32]| {
            dst.iter_mut().zip(src).for_each(|(d, &s)| *d += s as f64);
        };
        for (d, s) in self.mtz.iter_mut().zip(&c.mtz) {
            acc(d, s);
        }
        acc(&mut self.zw, &c.zw);
        acc(&mut self.sd, &c.sd);
        acc(&mut self.sz, &c.sz);
        acc(&mut self.sas, &c.sas);
    }

    pub(crate) fn scaled(mut self, k: f64) -> Self {
        let scale = |v: &mut [f64]| v.iter_mut().for_each(|x| *x *= k);
        self.mtz.iter_mut().for_each(|r| scale(r));
        scale(&mut self.zw);
        scale(&mut self.sd);
        scale(&mut self.sz);
        scale(&mut self.sas);
        self
    }
}

fn row(table: &[f64], width: usize, r: usize) -> &[f64] {
    &table[r * width..(r + 1) * width]
}

fn smooth(counts: &[f64], prior: f64) -> Vec<f64> {
    let total: f64 = counts.iter().map(|&n| n + prior).sum();
    counts.iter().map(|&n| (n + prior) / total).collect()
}

/// Applies the smoothing estimators to (averaged) counts. `lengths` gives
/// the number of time points of each sequence.
pub(crate) fn profiles_from_sums(h: &Hyperparams, sums: &CountSums, lengths: &[usize]) -> StateProfiles {
    let mut per_tp = sums.mtz.iter().map(|r| smooth(r, h.alpha));
    let theta_doc = lengths.iter().map(|&n| per_tp.by_ref().take(n).collect()).collect();
    let v = sums.vocab.len();
    let (s, a, z, d) = (h.states, h.categories, h.topics, h.doc_types);
    StateProfiles {
        hyper: *h,
        vocab: sums.vocab.clone(),
        phi: (0..z).map(|j| smooth(row(&sums.zw, v, j), h.beta)).collect(),
        theta: (0..s).map(|c| smooth(row(&sums.sz, z, c), h.alpha)).collect(),
        psi: (0..s).map(|c| smooth(row(&sums.sd, d, c), h.nu)).collect(),
        pi: (0..s)
            .map(|c| (0..a).map(|b| smooth(row(&sums.sas, s, c * a + b), h.gamma)).collect())
            .collect(),
        init: (0..a).map(|b| smooth(row(&sums.sas, s, s * a + b), h.gamma)).collect(),
        theta_doc,
    }
}

/// Point estimates from the model's current counts.
pub fn estimate_profiles(model: &SttmModel) -> StateProfiles {
    let mut sums = CountSums::zeros_like(&model.counts).with_vocab(&model.vocab);
    sums.add(&model.counts);
    profiles_from_sums(&model.hyper, &sums, &model.sequence_lengths())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h() -> Hyperparams {
        Hyperparams {
            states: 2,
            categories: 2,
            topics: 2,
            doc_types: 3,
            alpha: 0.1,
            beta: 1.0,
            nu: 0.5,
            gamma: 0.2,
        }
    }

    fn sums_from(c: &CountTables, vocab: &Vocabulary) -> CountSums {
        let mut sums = CountSums::zeros_like(c).with_vocab(vocab);
        sums.add(c);
        sums
    }

    #[test]
    fn zero_counts_give_uniform_rows() {
        let vocab = Vocabulary::from_words(["x", "y", "z"]);
        let counts = CountTables::zeros(&h(), 3, 2);
        let p = profiles_from_sums(&h(), &sums_from(&counts, &vocab), &[2]);
        p.validate().unwrap();
        for row in p.rows() {
            let u = 1.0 / row.len() as f64;
            assert!(row.iter().all(|&x| (x - u).abs() < 1e-15));
        }
        assert_eq!(p.theta_doc.len(), 1);
        assert_eq!(p.theta_doc[0].len(), 2);
    }

    #[test]
    fn phi_from_printed_formula() {
        let vocab = Vocabulary::from_words(["x", "y"]);
        let mut counts = CountTables::zeros(&h(), 2, 0);
        counts.zw = vec![3, 1, 0, 0];
        counts.z_total = vec![4, 0];
        let p = profiles_from_sums(&h(), &sums_from(&counts, &vocab), &[]);
        assert!((p.phi[0][0] - 4.0 / 6.0).abs() < 1e-15);
        assert!((p.phi[0][1] - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn fixture_counts_match_hand_arithmetic() {
        // Values computed by hand from (N + prior) / sum(N + prior).
        let vocab = Vocabulary::from_words(["x", "y"]);
        let hp = h();
        let mut counts = CountTables::zeros(&hp, 2, 1);
        counts.sz = vec![5, 0, 1, 3];
        counts.sd = vec![2, 0, 1, 0, 0, 4];
        counts.mtz = vec![vec![2, 1]];
        // Row (c=1, a=0) -> [1, 3]; start row (a=1) -> [2, 0].
        let s = hp.states;
        let a = hp.categories;
        counts.sas[(1 * a) * s] = 1;
        counts.sas[(1 * a) * s + 1] = 3;
        counts.sas[(s * a + 1) * s] = 2;
        let p = profiles_from_sums(&hp, &sums_from(&counts, &vocab), &[1]);
        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        assert!(close(p.theta[0][0], 5.1 / 5.2));
        assert!(close(p.theta[1][1], 3.1 / 4.2));
        assert!(close(p.psi[0][0], 2.5 / 4.5));
        assert!(close(p.psi[1][2], 4.5 / 5.5));
        assert!(close(p.pi[1][0][1], 3.2 / 4.4));
        assert!(close(p.pi[0][1][0], 0.5));
        assert!(close(p.init[1][0], 2.2 / 2.4));
        assert!(close(p.theta_doc[0][0][0], 2.1 / 3.2));
        p.validate().unwrap();
    }
}
