use std::fmt;

use serde::{Deserialize, Serialize};

use super::FollowEdge;

/// Goal-setting quality of a student, ordered so that `max` picks the best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GoalCategory {
    GoalBystander,
    GoalParticipant,
    GoalSetter,
}

impl GoalCategory {
    /// Numeric goal quality used as a recommender feature (0, 1, 2).
    pub fn quality(self) -> u8 {
        self as u8
    }
}

/// A goal note of one user: the week it was written and its annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoalNote {
    pub week: u32,
    pub contains_goal: bool,
}

/// Goal category at the end of `week` given all of the user's goal notes.
///
/// Notes after `week` are ignored, so the result is monotone in `week`.
pub fn goal_category_at(notes: &[GoalNote], week: u32) -> GoalCategory {
    notes
        .iter()
        .filter(|n| n.week <= week)
        .map(|n| {
            if n.contains_goal {
                GoalCategory::GoalSetter
            } else {
                GoalCategory::GoalParticipant
            }
        })
        .max()
        .unwrap_or(GoalCategory::GoalBystander)
}

/// Weekly social-connection class S1..S7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SocialCategory {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
}

impl SocialCategory {
    pub const ALL: [SocialCategory; 7] = [
        SocialCategory::S1,
        SocialCategory::S2,
        SocialCategory::S3,
        SocialCategory::S4,
        SocialCategory::S5,
        SocialCategory::S6,
        SocialCategory::S7,
    ];

    pub const COUNT: usize = 7;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            SocialCategory::S1 => "S1",
            SocialCategory::S2 => "S2",
            SocialCategory::S3 => "S3",
            SocialCategory::S4 => "S4",
            SocialCategory::S5 => "S5",
            SocialCategory::S6 => "S6",
            SocialCategory::S7 => "S7",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            SocialCategory::S1 => "Has been following a goal setter",
            SocialCategory::S2 => "Started to follow a goal setter",
            SocialCategory::S3 => "Has been following a goal participant",
            SocialCategory::S4 => "Started to follow a goal participant",
            SocialCategory::S5 => "Has been following a goal bystander",
            SocialCategory::S6 => "Started to follow a goal bystander",
            SocialCategory::S7 => "Follows no one",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.label().eq_ignore_ascii_case(s))
    }

    fn from_tier(best: GoalCategory, new: bool) -> Self {
        match (best, new) {
            (GoalCategory::GoalSetter, false) => SocialCategory::S1,
            (GoalCategory::GoalSetter, true) => SocialCategory::S2,
            (GoalCategory::GoalParticipant, false) => SocialCategory::S3,
            (GoalCategory::GoalParticipant, true) => SocialCategory::S4,
            (GoalCategory::GoalBystander, false) => SocialCategory::S5,
            (GoalCategory::GoalBystander, true) => SocialCategory::S6,
        }
    }
}

impl fmt::Display for SocialCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Social-connection class of `user` in `week`.
///
/// The best goal category among current followees (evaluated as of `week`)
/// defines the tier. The week is a "started to follow" week iff an edge to a
/// followee of that tier appears exactly in `week` and no edge to a followee
/// of that tier existed earlier.
pub fn derive_social_category<F>(
    user: &str,
    week: u32,
    edges: &[FollowEdge],
    mut followee_category: F,
) -> SocialCategory
where
    F: FnMut(&str, u32) -> GoalCategory,
{
    let current: Vec<(&FollowEdge, GoalCategory)> = edges
        .iter()
        .filter(|e| e.follower == user && e.week_index <= week)
        .map(|e| (e, followee_category(&e.followee, week)))
        .collect();
    let Some(best) = current.iter().map(|(_, c)| *c).max() else {
        return SocialCategory::S7;
    };
    let first_tier_week = current
        .iter()
        .filter(|(_, c)| *c == best)
        .map(|(e, _)| e.week_index)
        .min()
        .expect("best tier has at least one edge");
    SocialCategory::from_tier(best, first_tier_week == week)
}
