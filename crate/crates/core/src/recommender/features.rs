use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, FollowEdge};
use crate::{Error, Result};

const HITS_TOL: f64 = 1e-10;
const HITS_MAX_ITERS: usize = 1000;

/// Hub and authority scores of one user.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Centrality {
    pub authority: f64,
    pub hub: f64,
    pub mean: f64,
}

fn normalize_l2(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// HITS by power iteration on the follow graph (follower points at
/// followee). Scores are L2-normalized every step; users listed in `users`
/// but without edges score 0. Self-loops and duplicate edges are ignored.
pub fn hits_centrality(users: &[String], edges: &[FollowEdge]) -> BTreeMap<String, Centrality> {
    let mut ids: BTreeSet<&str> = users.iter().map(String::as_str).collect();
    for e in edges {
        ids.insert(&e.follower);
        ids.insert(&e.followee);
    }
    let ids: Vec<&str> = ids.into_iter().collect();
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let links: BTreeSet<(usize, usize)> = edges
        .iter()
        .map(|e| (index[e.follower.as_str()], index[e.followee.as_str()]))
        .filter(|(a, b)| a != b)
        .collect();

    let n = ids.len();
    let mut linked = vec![false; n];
    for &(a, b) in &links {
        linked[a] = true;
        linked[b] = true;
    }
    let start = 1.0 / (linked.iter().filter(|&&l| l).count().max(1) as f64).sqrt();
    let mut hub: Vec<f64> = linked.iter().map(|&l| if l { start } else { 0.0 }).collect();
    let mut auth = hub.clone();
    for _ in 0..HITS_MAX_ITERS {
        let mut next_auth = vec![0.0; n];
        for &(a, b) in &links {
            next_auth[b] += hub[a];
        }
        normalize_l2(&mut next_auth);
        let mut next_hub = vec![0.0; n];
        for &(a, b) in &links {
            next_hub[a] += next_auth[b];
        }
        normalize_l2(&mut next_hub);
        let delta = auth
            .iter()
            .zip(&next_auth)
            .chain(hub.iter().zip(&next_hub))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        auth = next_auth;
        hub = next_hub;
        if delta < HITS_TOL {
            break;
        }
    }
    ids.iter()
        .enumerate()
        .map(|(i, &u)| {
            let c = Centrality {
                authority: auth[i],
                hub: hub[i],
                mean: (auth[i] + hub[i]) / 2.0,
            };
            (u.to_string(), c)
        })
        .collect()
}

/// A discussion as read from input: initiator first in `participants`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discussion {
    pub discussion_id: String,
    pub n_replies: u64,
    pub length: u64,
    pub participants: Vec<String>,
}

/// Per-user attributes that do not depend on participation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserInfo {
    pub user_id: String,
    /// 0 bystander, 1 participant, 2 setter.
    pub goal_quality: u8,
    pub centrality: f64,
    pub registration_week: usize,
}

impl UserInfo {
    pub fn unknown(user_id: &str) -> Self {
        Self {
            user_id: user_id.to_string(),
            goal_quality: 0,
            centrality: 0.0,
            registration_week: 0,
        }
    }
}

/// Goal quality at the end of the corpus, mean HITS score, and the week of
/// the first document, for every user of the corpus.
pub fn user_info_from_corpus(corpus: &Corpus) -> Result<Vec<UserInfo>> {
    let users: Vec<String> = corpus.users().map(str::to_string).collect();
    let centrality = hits_centrality(&users, &corpus.follows);
    let mut first_week: HashMap<&str, u32> = HashMap::new();
    for d in &corpus.documents {
        let w = first_week.entry(d.user_id.as_str()).or_insert(d.week_index);
        *w = (*w).min(d.week_index);
    }
    let last = corpus.last_week();
    users
        .iter()
        .map(|u| {
            Ok(UserInfo {
                user_id: u.clone(),
                goal_quality: corpus.goal_category(u, last)?.quality(),
                centrality: centrality.get(u).map_or(0.0, |c| c.mean),
                registration_week: first_week.get(u.as_str()).copied().unwrap_or(0) as usize,
            })
        })
        .collect()
}

/// User side of the relevance model. Counts are divided by their maximum
/// over users so every feature lies in [0, 1] except goal quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserFeatures {
    pub user_id: String,
    pub participated: f64,
    pub initiated: f64,
    pub goal_quality: u8,
    pub centrality: f64,
    pub registration_week: usize,
}

/// Discussion side of the relevance model; replies and length are scaled
/// by their maximum over discussions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscussionFeatures {
    pub discussion_id: String,
    pub replies: f64,
    pub length: f64,
    pub participants: Vec<String>,
}

/// Users and discussions with dense indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub users: Vec<UserFeatures>,
    pub discussions: Vec<DiscussionFeatures>,
    /// Participant indices per discussion.
    pub members: Vec<Vec<usize>>,
    /// Number of distinct registration weeks modeled (max week + 1).
    pub weeks: usize,
    user_index: HashMap<String, usize>,
    discussion_index: HashMap<String, usize>,
}

fn scaled(values: Vec<f64>) -> Vec<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        values.into_iter().map(|v| v / max).collect()
    } else {
        values
    }
}

impl FeatureTable {
    pub fn new(users: Vec<UserFeatures>, discussions: Vec<DiscussionFeatures>) -> Result<Self> {
        let mut user_index = HashMap::new();
        for (i, u) in users.iter().enumerate() {
            if user_index.insert(u.user_id.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate user `{}`", u.user_id)));
            }
            if u.goal_quality > 2 {
                return Err(Error::InvalidInput(format!("user `{}`: goal quality above 2", u.user_id)));
            }
        }
        let mut discussion_index = HashMap::new();
        for (i, d) in discussions.iter().enumerate() {
            if discussion_index.insert(d.discussion_id.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate discussion `{}`", d.discussion_id)));
            }
        }
        let members = discussions
            .iter()
            .map(|d| {
                let set: BTreeSet<usize> = d
                    .participants
                    .iter()
                    .map(|p| user_index.get(p).copied().ok_or_else(|| Error::UnknownUser(p.clone())))
                    .collect::<Result<_>>()?;
                Ok(set.into_iter().collect())
            })
            .collect::<Result<_>>()?;
        let weeks = users.iter().map(|u| u.registration_week + 1).max().unwrap_or(1);
        Ok(Self {
            users,
            discussions,
            members,
            weeks,
            user_index,
            discussion_index,
        })
    }

    /// Assembles features from user attributes, discussions and the
    /// training participation pairs. Participants that appear only in
    /// `discussions` or `pairs` get [`UserInfo::unknown`] attributes.
    pub fn build(info: &[UserInfo], discussions: &[Discussion], pairs: &[(String, String)]) -> Result<Self> {
        let mut all: BTreeMap<String, UserInfo> = info.iter().map(|u| (u.user_id.clone(), u.clone())).collect();
        let mentioned = discussions
            .iter()
            .flat_map(|d| d.participants.iter())
            .chain(pairs.iter().map(|(u, _)| u));
        for u in mentioned {
            all.entry(u.clone()).or_insert_with(|| UserInfo::unknown(u));
        }
        let known: BTreeSet<&str> = discussions.iter().map(|d| d.discussion_id.as_str()).collect();
        let mut participated: HashMap<&str, f64> = HashMap::new();
        for (u, d) in pairs.iter().collect::<BTreeSet<_>>() {
            if !known.contains(d.as_str()) {
                return Err(Error::UnknownDiscussion(d.clone()));
            }
            *participated.entry(u.as_str()).or_default() += 1.0;
        }
        let mut initiated: HashMap<&str, f64> = HashMap::new();
        for d in discussions {
            if let Some(first) = d.participants.first() {
                *initiated.entry(first.as_str()).or_default() += 1.0;
            }
        }
        let ids: Vec<&String> = all.keys().collect();
        let part = scaled(ids.iter().map(|u| participated.get(u.as_str()).copied().unwrap_or(0.0)).collect());
        let init = scaled(ids.iter().map(|u| initiated.get(u.as_str()).copied().unwrap_or(0.0)).collect());
        let users = all
            .values()
            .zip(part.into_iter().zip(init))
            .map(|(u, (participated, initiated))| UserFeatures {
                user_id: u.user_id.clone(),
                participated,
                initiated,
                goal_quality: u.goal_quality,
                centrality: u.centrality,
                registration_week: u.registration_week,
            })
            .collect();

        let replies = scaled(discussions.iter().map(|d| d.n_replies as f64).collect());
        let lengths = scaled(discussions.iter().map(|d| d.length as f64).collect());
        let discussions = discussions
            .iter()
            .zip(replies.into_iter().zip(lengths))
            .map(|(d, (replies, length))| DiscussionFeatures {
                discussion_id: d.discussion_id.clone(),
                replies,
                length,
                participants: d.participants.clone(),
            })
            .collect();
        Self::new(users, discussions)
    }

    pub fn user(&self, id: &str) -> Result<usize> {
        self.user_index.get(id).copied().ok_or_else(|| Error::UnknownUser(id.to_string()))
    }

    pub fn discussion(&self, id: &str) -> Result<usize> {
        self.discussion_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownDiscussion(id.to_string()))
    }
}
