use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FeatureTable;
use crate::{Error, Result};

const NEGATIVE_TRIES: usize = 100;

/// Which optional user features enter the model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureFlags {
    pub goal: bool,
    pub centrality: bool,
}

impl FeatureFlags {
    pub const ALL: [FeatureFlags; 4] = [
        FeatureFlags {
            goal: false,
            centrality: false,
        },
        FeatureFlags {
            goal: true,
            centrality: false,
        },
        FeatureFlags {
            goal: false,
            centrality: true,
        },
        FeatureFlags {
            goal: true,
            centrality: true,
        },
    ];

    pub fn label(self) -> &'static str {
        match (self.goal, self.centrality) {
            (false, false) => "CAMF",
            (true, false) => "CAMF_G",
            (false, true) => "CAMF_C",
            (true, true) => "CAMF_GC",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.label().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Latent dimension.
    pub k: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    pub epochs: usize,
    /// Sampled negatives per positive, redrawn every epoch.
    pub negatives: usize,
    /// Latent entries start uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            k: 8,
            learning_rate: 0.01,
            regularization: 0.01,
            epochs: 200,
            negatives: 3,
            init_scale: 0.1,
        }
    }
}

/// Parameter blocks of the relevance model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    Bias,
    /// Per-user latent vectors.
    User,
    /// Per-discussion latent vectors.
    Discussion,
    Participated,
    Initiated,
    Goal,
    Centrality,
    Replies,
    Length,
    /// Per-registration-week vectors.
    Week,
    /// Per-user implicit-feedback vectors.
    Implicit,
}

impl Block {
    pub const ALL: [Block; 11] = [
        Block::Bias,
        Block::User,
        Block::Discussion,
        Block::Participated,
        Block::Initiated,
        Block::Goal,
        Block::Centrality,
        Block::Replies,
        Block::Length,
        Block::Week,
        Block::Implicit,
    ];
}

/// All learned parameters; matrices are row-major with rows of length `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub k: usize,
    pub bias: f64,
    pub user: Vec<f64>,
    pub discussion: Vec<f64>,
    pub participated: Vec<f64>,
    pub initiated: Vec<f64>,
    pub goal: Vec<f64>,
    pub centrality: Vec<f64>,
    pub replies: Vec<f64>,
    pub length: Vec<f64>,
    pub week: Vec<f64>,
    pub implicit: Vec<f64>,
}

impl Params {
    pub fn zeros(k: usize, users: usize, discussions: usize, weeks: usize) -> Self {
        Self {
            k,
            bias: 0.0,
            user: vec![0.0; users * k],
            discussion: vec![0.0; discussions * k],
            participated: vec![0.0; k],
            initiated: vec![0.0; k],
            goal: vec![0.0; k],
            centrality: vec![0.0; k],
            replies: vec![0.0; k],
            length: vec![0.0; k],
            week: vec![0.0; weeks * k],
            implicit: vec![0.0; users * k],
        }
    }

    pub fn block(&self, b: Block) -> &[f64] {
        match b {
            Block::Bias => std::slice::from_ref(&self.bias),
            Block::User => &self.user,
            Block::Discussion => &self.discussion,
            Block::Participated => &self.participated,
            Block::Initiated => &self.initiated,
            Block::Goal => &self.goal,
            Block::Centrality => &self.centrality,
            Block::Replies => &self.replies,
            Block::Length => &self.length,
            Block::Week => &self.week,
            Block::Implicit => &self.implicit,
        }
    }

    pub fn block_mut(&mut self, b: Block) -> &mut [f64] {
        match b {
            Block::Bias => std::slice::from_mut(&mut self.bias),
            Block::User => &mut self.user,
            Block::Discussion => &mut self.discussion,
            Block::Participated => &mut self.participated,
            Block::Initiated => &mut self.initiated,
            Block::Goal => &mut self.goal,
            Block::Centrality => &mut self.centrality,
            Block::Replies => &mut self.replies,
            Block::Length => &mut self.length,
            Block::Week => &mut self.week,
            Block::Implicit => &mut self.implicit,
        }
    }

    fn row(v: &[f64], i: usize, k: usize) -> &[f64] {
        &v[i * k..(i + 1) * k]
    }
}

/// One training example: user index, discussion index, target.
pub type Sample = (usize, usize, f64);

// The two factor vectors of a (user, discussion) pair.
struct Factors {
    left: Vec<f64>,
    right: Vec<f64>,
    others: Vec<usize>,
    norm: f64,
}

/// Feature-augmented factor model with implicit feedback.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceModel {
    pub flags: FeatureFlags,
    pub config: TrainConfig,
    pub features: FeatureTable,
    pub params: Params,
    /// Mean squared-error term per epoch, measured during the epoch.
    pub loss_trace: Vec<f64>,
}

fn axpy(dst: &mut [f64], a: f64, x: &[f64]) {
    dst.iter_mut().zip(x).for_each(|(d, x)| *d += a * x);
}

impl RelevanceModel {
    /// A model with all parameters zero.
    pub fn zeros(features: FeatureTable, flags: FeatureFlags, config: TrainConfig) -> Self {
        let params = Params::zeros(
            config.k,
            features.users.len(),
            features.discussions.len(),
            features.weeks,
        );
        Self {
            flags,
            config,
            features,
            params,
            loss_trace: Vec::new(),
        }
    }

    fn factors(&self, u: usize, d: usize) -> Factors {
        let k = self.params.k;
        let p = &self.params;
        let uf = &self.features.users[u];
        let df = &self.features.discussions[d];

        let mut left = Params::row(&p.user, u, k).to_vec();
        axpy(&mut left, uf.participated, &p.participated);
        axpy(&mut left, uf.initiated, &p.initiated);
        if self.flags.goal {
            axpy(&mut left, uf.goal_quality as f64, &p.goal);
        }
        if self.flags.centrality {
            axpy(&mut left, uf.centrality, &p.centrality);
        }
        axpy(&mut left, 1.0, Params::row(&p.week, uf.registration_week, k));

        let mut right = Params::row(&p.discussion, d, k).to_vec();
        axpy(&mut right, df.replies, &p.replies);
        axpy(&mut right, df.length, &p.length);
        let others: Vec<usize> = self.features.members[d].iter().copied().filter(|&v| v != u).collect();
        let norm = if others.is_empty() {
            0.0
        } else {
            1.0 / (others.len() as f64).sqrt()
        };
        for &v in &others {
            axpy(&mut right, norm, Params::row(&p.implicit, v, k));
        }
        Factors {
            left,
            right,
            others,
            norm,
        }
    }

    /// Relevance of discussion `d` to user `u` by dense index. `u` itself is
    /// left out of the discussion's implicit-feedback participants.
    pub fn predict_idx(&self, u: usize, d: usize) -> f64 {
        let f = self.factors(u, d);
        self.params.bias + f.left.iter().zip(&f.right).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn predict(&self, user: &str, discussion: &str) -> Result<f64> {
        let u = self.features.user(user)?;
        let d = self.features.discussion(discussion)?;
        Ok(self.predict_idx(u, d))
    }

    fn trainable(&self, b: Block) -> bool {
        match b {
            Block::Goal => self.flags.goal,
            Block::Centrality => self.flags.centrality,
            _ => true,
        }
    }

    // Squared norm of the regularized parameters a sample touches.
    fn touched_norm(&self, u: usize, d: usize, others: &[usize]) -> f64 {
        let k = self.params.k;
        let p = &self.params;
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let week = self.features.users[u].registration_week;
        let mut total = sq(Params::row(&p.user, u, k))
            + sq(Params::row(&p.discussion, d, k))
            + sq(Params::row(&p.week, week, k))
            + sq(&p.participated)
            + sq(&p.initiated)
            + sq(&p.replies)
            + sq(&p.length);
        if self.flags.goal {
            total += sq(&p.goal);
        }
        if self.flags.centrality {
            total += sq(&p.centrality);
        }
        total + others.iter().map(|&v| sq(Params::row(&p.implicit, v, k))).sum::<f64>()
    }

    /// Training objective: for every sample, half the squared error plus
    /// half the regularization weight times the squared norm of every
    /// latent parameter the sample touches (the bias is not regularized).
    pub fn objective(&self, samples: &[Sample]) -> f64 {
        samples
            .iter()
            .map(|&(u, d, r)| {
                let f = self.factors(u, d);
                let e = self.params.bias + f.left.iter().zip(&f.right).map(|(a, b)| a * b).sum::<f64>() - r;
                0.5 * e * e + 0.5 * self.config.regularization * self.touched_norm(u, d, &f.others)
            })
            .sum()
    }

    // Adds the gradient of one sample's objective term to `g`.
    fn accumulate_gradient(&self, g: &mut Params, (u, d, r): Sample) {
        let k = self.params.k;
        let p = &self.params;
        let lam = self.config.regularization;
        let uf = &self.features.users[u];
        let df = &self.features.discussions[d];
        let f = self.factors(u, d);
        let e = p.bias + f.left.iter().zip(&f.right).map(|(a, b)| a * b).sum::<f64>() - r;

        g.bias += e;
        let (se, sl) = (e, lam);
        let row = |i: usize| i * k..(i + 1) * k;

        axpy(&mut g.user[row(u)], se, &f.right);
        axpy(&mut g.user[row(u)], sl, Params::row(&p.user, u, k));
        let week = uf.registration_week;
        axpy(&mut g.week[row(week)], se, &f.right);
        axpy(&mut g.week[row(week)], sl, Params::row(&p.week, week, k));
        let user_feature = |dst: &mut Vec<f64>, src: &[f64], x: f64| {
            axpy(dst, se * x, &f.right);
            axpy(dst, sl, src);
        };
        user_feature(&mut g.participated, &p.participated, uf.participated);
        user_feature(&mut g.initiated, &p.initiated, uf.initiated);
        if self.flags.goal {
            user_feature(&mut g.goal, &p.goal, uf.goal_quality as f64);
        }
        if self.flags.centrality {
            user_feature(&mut g.centrality, &p.centrality, uf.centrality);
        }

        axpy(&mut g.discussion[row(d)], se, &f.left);
        axpy(&mut g.discussion[row(d)], sl, Params::row(&p.discussion, d, k));
        axpy(&mut g.replies, se * df.replies, &f.left);
        axpy(&mut g.replies, sl, &p.replies);
        axpy(&mut g.length, se * df.length, &f.left);
        axpy(&mut g.length, sl, &p.length);
        for &v in &f.others {
            axpy(&mut g.implicit[row(v)], se * f.norm, &f.left);
            axpy(&mut g.implicit[row(v)], sl, Params::row(&p.implicit, v, k));
        }
    }

    /// Analytic gradient of [`objective`](Self::objective).
    pub fn gradient(&self, samples: &[Sample]) -> Params {
        let mut g = Params::zeros(
            self.params.k,
            self.features.users.len(),
            self.features.discussions.len(),
            self.features.weeks,
        );
        for &s in samples {
            self.accumulate_gradient(&mut g, s);
        }
        g
    }

    // One stochastic step on a single sample; returns the pre-step error.
    // Every block's gradient depends only on the pre-step factor vectors
    // and its own entries, so blocks can be updated in place.
    fn sgd_step(&mut self, (u, d, r): Sample) -> f64 {
        let k = self.params.k;
        let lr = self.config.learning_rate;
        let lam = self.config.regularization;
        let (goal_on, cent_on) = (self.flags.goal, self.flags.centrality);
        let uf = &self.features.users[u];
        let df = &self.features.discussions[d];
        let (x_part, x_init, x_goal, x_cent, week) = (
            uf.participated,
            uf.initiated,
            uf.goal_quality as f64,
            uf.centrality,
            uf.registration_week,
        );
        let (x_rep, x_len) = (df.replies, df.length);
        let f = self.factors(u, d);
        let e = self.params.bias + f.left.iter().zip(&f.right).map(|(a, b)| a * b).sum::<f64>() - r;

        let descend = |x: &mut [f64], coef: f64, dir: &[f64]| {
            x.iter_mut().zip(dir).for_each(|(x, g)| *x -= lr * (coef * g + lam * *x));
        };
        let row = |i: usize| i * k..(i + 1) * k;
        let p = &mut self.params;
        p.bias -= lr * e;
        descend(&mut p.user[row(u)], e, &f.right);
        descend(&mut p.week[row(week)], e, &f.right);
        descend(&mut p.participated, e * x_part, &f.right);
        descend(&mut p.initiated, e * x_init, &f.right);
        if goal_on {
            descend(&mut p.goal, e * x_goal, &f.right);
        }
        if cent_on {
            descend(&mut p.centrality, e * x_cent, &f.right);
        }
        descend(&mut p.discussion[row(d)], e, &f.left);
        descend(&mut p.replies, e * x_rep, &f.left);
        descend(&mut p.length, e * x_len, &f.left);
        for &v in &f.others {
            descend(&mut p.implicit[row(v)], e * f.norm, &f.left);
        }
        e
    }
}

/// Fits the model by stochastic gradient descent on squared error.
/// Every epoch visits each positive pair (target 1) together with
/// `negatives` uniformly drawn non-positive discussions of the same user
/// (target 0), in a fresh random order.
pub fn train_relevance(
    features: FeatureTable,
    positives: &[(usize, usize)],
    flags: FeatureFlags,
    config: TrainConfig,
    seed: u64,
) -> Result<RelevanceModel> {
    if positives.is_empty() {
        return Err(Error::InvalidInput("no positive participation pairs to train on".into()));
    }
    if config.k == 0 || !(config.learning_rate > 0.0) || !(config.regularization >= 0.0) {
        return Err(Error::InvalidInput("invalid relevance training configuration".into()));
    }
    let n_users = features.users.len();
    let n_disc = features.discussions.len();
    if let Some(&(u, d)) = positives.iter().find(|&&(u, d)| u >= n_users || d >= n_disc) {
        return Err(Error::InvalidInput(format!("positive pair ({u}, {d}) out of range")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = RelevanceModel::zeros(features, flags, config);
    for b in Block::ALL {
        if b == Block::Bias || !model.trainable(b) {
            continue;
        }
        for x in model.params.block_mut(b) {
            *x = rng.gen_range(-config.init_scale..=config.init_scale);
        }
    }

    let positive_set: HashSet<(usize, usize)> = positives.iter().copied().collect();
    let mut ordered: Vec<(usize, usize)> = positive_set.iter().copied().collect();
    ordered.sort_unstable();
    let mut samples: Vec<Sample> = Vec::with_capacity(ordered.len() * (1 + config.negatives));
    for _ in 0..config.epochs {
        samples.clear();
        for &(u, d) in &ordered {
            samples.push((u, d, 1.0));
            for _ in 0..config.negatives {
                let neg = (0..NEGATIVE_TRIES)
                    .map(|_| rng.gen_range(0..n_disc))
                    .find(|&cand| !positive_set.contains(&(u, cand)));
                if let Some(cand) = neg {
                    samples.push((u, cand, 0.0));
                }
            }
        }
        samples.shuffle(&mut rng);
        let mut loss = 0.0;
        for &s in &samples {
            let e = model.sgd_step(s);
            loss += e * e;
        }
        model.loss_trace.push(loss / samples.len() as f64);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recommender::{DiscussionFeatures, UserFeatures};

    fn user(id: &str, participated: f64, week: usize) -> UserFeatures {
        UserFeatures {
            user_id: id.into(),
            participated,
            initiated: 0.0,
            goal_quality: 1,
            centrality: 0.3,
            registration_week: week,
        }
    }

    fn disc(id: &str, members: &[&str]) -> DiscussionFeatures {
        DiscussionFeatures {
            discussion_id: id.into(),
            replies: 0.5,
            length: 0.25,
            participants: members.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn table() -> FeatureTable {
        FeatureTable::new(
            vec![user("a", 2.0, 0), user("b", 1.0, 1), user("c", 0.0, 0)],
            vec![disc("x", &["a", "b"]), disc("y", &["b", "c"]), disc("z", &[])],
        )
        .unwrap()
    }

    #[test]
    fn zero_parameters_score_bias() {
        let mut m = RelevanceModel::zeros(table(), FeatureFlags::ALL[3], TrainConfig::default());
        m.params.bias = 0.25;
        assert_eq!(m.predict("a", "y").unwrap(), 0.25);
        assert!(matches!(m.predict("q", "y"), Err(Error::UnknownUser(_))));
        assert!(matches!(m.predict("a", "q"), Err(Error::UnknownDiscussion(_))));
    }

    #[test]
    fn hand_set_k1() {
        let cfg = TrainConfig {
            k: 1,
            ..TrainConfig::default()
        };
        let mut m = RelevanceModel::zeros(table(), FeatureFlags::default(), cfg);
        let a = m.features.user("a").unwrap();
        let z = m.features.discussion("z").unwrap();
        m.params.user[a] = 0.5;
        m.params.participated[0] = 0.1;
        m.params.discussion[z] = 1.0;
        assert!((m.predict_idx(a, z) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn self_is_excluded_from_implicit_feedback() {
        let cfg = TrainConfig {
            k: 1,
            ..TrainConfig::default()
        };
        let mut m = RelevanceModel::zeros(table(), FeatureFlags::default(), cfg);
        let (a, b) = (m.features.user("a").unwrap(), m.features.user("b").unwrap());
        let x = m.features.discussion("x").unwrap();
        m.params.user[a] = 1.0;
        m.params.implicit[a] = 5.0;
        m.params.implicit[b] = 2.0;
        // U(x) \ {a} = {b}: right = 2 / sqrt(1)
        assert!((m.predict_idx(a, x) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn linear_in_each_feature_weight() {
        let mut m = RelevanceModel::zeros(table(), FeatureFlags::ALL[3], TrainConfig { k: 2, ..Default::default() });
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for b in Block::ALL {
            for x in m.params.block_mut(b) {
                *x = rng.gen_range(-1.0..1.0);
            }
        }
        for b in [Block::Participated, Block::Goal, Block::Centrality, Block::Replies, Block::Length] {
            let probe = |m: &mut RelevanceModel, v: f64| {
                m.params.block_mut(b)[0] = v;
                m.predict_idx(0, 1)
            };
            let s: Vec<f64> = [-1.0, 0.5, 2.0].iter().map(|&v| probe(&mut m, v)).collect();
            let slope1 = (s[1] - s[0]) / 1.5;
            let slope2 = (s[2] - s[1]) / 1.5;
            assert!((slope1 - slope2).abs() < 1e-8, "{b:?}");
        }
    }

    #[test]
    fn flags_round_trip() {
        for f in FeatureFlags::ALL {
            assert_eq!(FeatureFlags::parse(f.label()), Some(f));
        }
        assert_eq!(FeatureFlags::parse("nope"), None);
    }

    #[test]
    fn no_positives_is_an_error() {
        assert!(train_relevance(table(), &[], FeatureFlags::default(), TrainConfig::default(), 1).is_err());
    }

    #[test]
    fn memorizes_single_positive() {
        let cfg = TrainConfig {
            negatives: 0,
            epochs: 500,
            learning_rate: 0.05,
            ..TrainConfig::default()
        };
        let t = FeatureTable::new(
            vec![user("a", 1.0, 0)],
            vec![disc("x", &[]), disc("y", &[]), disc("z", &[])],
        )
        .unwrap();
        let m = train_relevance(t, &[(0, 1)], FeatureFlags::default(), cfg, 9).unwrap();
        let pos = m.predict_idx(0, 1);
        assert!(pos > m.predict_idx(0, 0));
        assert!(pos > m.predict_idx(0, 2));
        assert!(m.loss_trace.last().unwrap() <= &m.loss_trace[0]);
    }

    #[test]
    fn same_seed_same_parameters() {
        let cfg = TrainConfig {
            epochs: 20,
            ..TrainConfig::default()
        };
        let pos = [(0, 0), (1, 0), (1, 1), (2, 1)];
        let a = train_relevance(table(), &pos, FeatureFlags::ALL[3], cfg, 5).unwrap();
        let b = train_relevance(table(), &pos, FeatureFlags::ALL[3], cfg, 5).unwrap();
        assert_eq!(a.params, b.params);
        assert!(a.loss_trace.last().unwrap() <= &a.loss_trace[0]);
    }

    #[test]
    fn disabled_features_stay_zero() {
        let cfg = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        let m = train_relevance(table(), &[(0, 0), (1, 1)], FeatureFlags::default(), cfg, 1).unwrap();
        assert!(m.params.goal.iter().all(|&x| x == 0.0));
        assert!(m.params.centrality.iter().all(|&x| x == 0.0));
    }
}
