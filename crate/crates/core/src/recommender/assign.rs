use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::flow::Network;
use crate::{Error, Result};

// Fixed-point scale for arc costs.
const COST_SCALE: f64 = 1e9;
const COST_LIMIT: f64 = 1e17;
// Up to this many discussions with a choice of coverage pattern are solved
// by enumerating every pattern.
const MAX_ENUMERATED: usize = 12;

/// The six filtering configurations compared in the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FilterMode {
    #[serde(rename = "MCCF_G")]
    MccfG,
    #[serde(rename = "MCCF_C")]
    MccfC,
    #[serde(rename = "MCCF_GC")]
    MccfGc,
    GoalPart,
    HighCent,
    #[serde(rename = "GoalPart_HighCent")]
    GoalPartHighCent,
}

impl FilterMode {
    pub const ALL: [FilterMode; 6] = [
        FilterMode::MccfG,
        FilterMode::MccfC,
        FilterMode::MccfGc,
        FilterMode::GoalPart,
        FilterMode::HighCent,
        FilterMode::GoalPartHighCent,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FilterMode::MccfG => "MCCF_G",
            FilterMode::MccfC => "MCCF_C",
            FilterMode::MccfGc => "MCCF_GC",
            FilterMode::GoalPart => "GoalPart",
            FilterMode::HighCent => "HighCent",
            FilterMode::GoalPartHighCent => "GoalPart_HighCent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.label().eq_ignore_ascii_case(s))
    }

    /// Whether the goal and centrality requirements are part of this mode.
    pub fn uses(self) -> (bool, bool) {
        match self {
            FilterMode::MccfG | FilterMode::GoalPart => (true, false),
            FilterMode::MccfC | FilterMode::HighCent => (false, true),
            FilterMode::MccfGc | FilterMode::GoalPartHighCent => (true, true),
        }
    }

    pub fn is_flow(self) -> bool {
        matches!(self, FilterMode::MccfG | FilterMode::MccfC | FilterMode::MccfGc)
    }

    /// The flow mode with the same requirements.
    pub fn flow_counterpart(self) -> FilterMode {
        match self.uses() {
            (true, false) => FilterMode::MccfG,
            (false, true) => FilterMode::MccfC,
            _ => FilterMode::MccfGc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub user: usize,
    pub discussion: usize,
    pub score: f64,
}

/// Users, discussions, scored candidate pairs and the requirements of one
/// assignment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentProblem {
    pub users: Vec<String>,
    pub discussions: Vec<String>,
    /// Goal quality of each user.
    pub goal: Vec<f64>,
    /// Centrality of each user.
    pub centrality: Vec<f64>,
    pub candidates: Vec<Candidate>,
    /// Minimum goal quality one assignee of every discussion must reach;
    /// `None` disables the requirement and its penalty.
    pub goal_threshold: Option<f64>,
    pub centrality_threshold: Option<f64>,
    pub penalty: f64,
    /// Maximum number of discussions per user.
    pub cap: usize,
    /// Marginal cost of a user's k-th extra discussion is `k * workload`.
    pub workload: f64,
}

/// Assigned (user, discussion) index pairs, sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub pairs: Vec<(usize, usize)>,
}

impl Assignment {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let set: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
        Self {
            pairs: set.into_iter().collect(),
        }
    }

    pub fn load(&self, users: usize) -> Vec<usize> {
        let mut n = vec![0; users];
        for &(u, _) in &self.pairs {
            n[u] += 1;
        }
        n
    }
}

impl AssignmentProblem {
    pub fn validate(&self) -> Result<()> {
        let nu = self.users.len();
        if self.goal.len() != nu || self.centrality.len() != nu {
            return Err(Error::InvalidInput("one goal quality and centrality per user required".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &self.candidates {
            if c.user >= nu || c.discussion >= self.discussions.len() {
                return Err(Error::InvalidInput("candidate pair out of range".into()));
            }
            if !c.score.is_finite() {
                return Err(Error::InvalidInput("non-finite candidate score".into()));
            }
            if !seen.insert((c.user, c.discussion)) {
                return Err(Error::InvalidInput(format!(
                    "duplicate candidate ({}, {})",
                    self.users[c.user], self.discussions[c.discussion]
                )));
            }
        }
        let finite = [self.penalty, self.workload]
            .iter()
            .chain(self.goal_threshold.iter())
            .chain(self.centrality_threshold.iter())
            .chain(&self.goal)
            .chain(&self.centrality)
            .all(|x| x.is_finite());
        if !finite || self.penalty < 0.0 || self.workload < 0.0 {
            return Err(Error::InvalidInput("penalty, workload and thresholds must be finite and nonnegative".into()));
        }
        Ok(())
    }

    fn goal_ok(&self, u: usize) -> bool {
        self.goal_threshold.is_some_and(|g| self.goal[u] >= g)
    }

    fn centrality_ok(&self, u: usize) -> bool {
        self.centrality_threshold.is_some_and(|c| self.centrality[u] >= c)
    }

    // Penalty charged for pair (u, d) given its assignment indicator; the
    // indicator is applied to the product `value * f` as written.
    fn penalty_term(&self, u: usize, assigned: bool) -> f64 {
        let f = if assigned { 1.0 } else { 0.0 };
        let mut p = 0.0;
        if let Some(g) = self.goal_threshold {
            if self.goal[u] * f >= g {
                p += self.goal[u] - g;
            }
        }
        if let Some(c) = self.centrality_threshold {
            if self.centrality[u] * f >= c {
                p += self.centrality[u] - c;
            }
        }
        self.penalty * p
    }

    // Change in the objective from assigning one pair, before workload.
    fn pair_value(&self, c: &Candidate) -> f64 {
        c.score - (self.penalty_term(c.user, true) - self.penalty_term(c.user, false))
    }
}

/// Overall community benefit: total score of the assigned pairs minus the
/// qualification penalties, summed over every user and discussion. Pairs
/// that are not candidates score 0. Requirements are not checked.
pub fn evaluate_ob(problem: &AssignmentProblem, assignment: &Assignment) -> f64 {
    let scores: HashMap<(usize, usize), f64> = problem
        .candidates
        .iter()
        .map(|c| ((c.user, c.discussion), c.score))
        .collect();
    let assigned: BTreeSet<(usize, usize)> = assignment.pairs.iter().copied().collect();
    let relevance: f64 = assigned.iter().map(|p| scores.get(p).copied().unwrap_or(0.0)).sum();
    let mut penalties = 0.0;
    for u in 0..problem.users.len() {
        let n_assigned = assigned.iter().filter(|&&(au, _)| au == u).count();
        let n_free = problem.discussions.len() - n_assigned;
        penalties += n_assigned as f64 * problem.penalty_term(u, true) + n_free as f64 * problem.penalty_term(u, false);
    }
    relevance - penalties
}

/// [`evaluate_ob`] minus the workload cost, the quantity the flow optimizes.
pub fn objective(problem: &AssignmentProblem, assignment: &Assignment) -> f64 {
    let workload: f64 = assignment
        .load(problem.users.len())
        .iter()
        .map(|&n| problem.workload * (n * n.saturating_sub(1) / 2) as f64)
        .sum();
    evaluate_ob(problem, assignment) - workload
}

fn requirement_names(goal: bool, centrality: bool) -> &'static str {
    match (goal, centrality) {
        (true, true) => "user meeting both the goal and the centrality threshold",
        (true, false) => "user meeting the goal threshold",
        _ => "user meeting the centrality threshold",
    }
}

/// Checks caps and every enabled requirement.
pub fn check_assignment(problem: &AssignmentProblem, assignment: &Assignment) -> Result<()> {
    if let Some(u) = assignment.load(problem.users.len()).iter().position(|&n| n > problem.cap) {
        return Err(Error::Infeasible {
            discussion: String::new(),
            requirement: format!("assignment within the cap for user `{}`", problem.users[u]),
        });
    }
    let mut has_goal = vec![false; problem.discussions.len()];
    let mut has_cent = vec![false; problem.discussions.len()];
    for &(u, d) in &assignment.pairs {
        has_goal[d] |= problem.goal_ok(u);
        has_cent[d] |= problem.centrality_ok(u);
    }
    for d in 0..problem.discussions.len() {
        let need_goal = problem.goal_threshold.is_some() && !has_goal[d];
        let need_cent = problem.centrality_threshold.is_some() && !has_cent[d];
        if need_goal || need_cent {
            return Err(Error::Infeasible {
                discussion: problem.discussions[d].clone(),
                requirement: requirement_names(need_goal, need_cent).into(),
            });
        }
    }
    Ok(())
}

// How a discussion's requirements are met when both are enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cover {
    /// One user meeting both thresholds.
    Dual,
    /// A user meeting the goal threshold and another meeting the
    /// centrality threshold.
    Split,
}

struct Solved {
    assignment: Assignment,
    objective: f64,
    uncovered: Option<(usize, &'static str)>,
}

fn scale_for(problem: &AssignmentProblem) -> f64 {
    let largest = problem
        .candidates
        .iter()
        .map(|c| problem.pair_value(c).abs())
        .chain([problem.workload * problem.cap as f64])
        .fold(1.0, f64::max);
    let terms = (problem.candidates.len() + problem.users.len() * problem.cap.max(1) + 1) as f64;
    let mut scale = COST_SCALE;
    while scale > 1.0 && largest * terms * scale > COST_LIMIT {
        scale /= 10.0;
    }
    scale
}

// Builds and solves the layered network for one coverage pattern.
fn solve_pattern(problem: &AssignmentProblem, covers: &[Cover], scale: f64) -> Solved {
    let nu = problem.users.len();
    let nd = problem.discussions.len();
    let (use_g, use_c) = (problem.goal_threshold.is_some(), problem.centrality_threshold.is_some());
    let to_int = |x: f64| (x * scale).round() as i64;

    let values: Vec<i64> = problem.candidates.iter().map(|c| to_int(problem.pair_value(c))).collect();
    let step = to_int(problem.workload);
    let big = values.iter().map(|v| v.abs()).sum::<i64>() + step * (nu * problem.cap) as i64 + 1;

    let mut g = Network::new(2 + nu + nd);
    let (source, sink) = (0, 1);
    let user_node = |u: usize| 2 + u;
    let disc_node = |d: usize| 2 + nu + d;
    let unlimited = (nu * problem.cap.max(1)) as i64 + 1;

    for u in 0..nu {
        if problem.cap == 0 {
            continue;
        }
        if step == 0 {
            g.add_arc(source, user_node(u), problem.cap as i64, 0);
        } else {
            for k in 0..problem.cap {
                g.add_arc(source, user_node(u), 1, step * k as i64);
            }
        }
    }
    // Per discussion: qualification nodes with the predicate they accept.
    type Accept = fn(&AssignmentProblem, usize) -> bool;
    let mut quals: Vec<Vec<(usize, usize, Accept, &'static str)>> = Vec::with_capacity(nd);
    for d in 0..nd {
        g.add_arc(disc_node(d), sink, unlimited, 0);
        let kinds: Vec<(Accept, &'static str)> = match (use_g, use_c, covers[d]) {
            (true, true, Cover::Dual) => vec![(
                |p, u| p.goal_ok(u) && p.centrality_ok(u),
                requirement_names(true, true),
            )],
            (true, true, Cover::Split) => vec![
                (|p, u| p.goal_ok(u), requirement_names(true, false)),
                (|p, u| p.centrality_ok(u), requirement_names(false, true)),
            ],
            (true, false, _) => vec![(|p, u| p.goal_ok(u), requirement_names(true, false))],
            (false, true, _) => vec![(|p, u| p.centrality_ok(u), requirement_names(false, true))],
            (false, false, _) => vec![],
        };
        let mut nodes = Vec::new();
        for (accept, name) in kinds {
            let q = g.add_node();
            let bonus = g.add_arc(q, sink, 1, -big);
            g.add_arc(q, disc_node(d), unlimited, 0);
            nodes.push((q, bonus, accept, name));
        }
        quals.push(nodes);
    }
    let mut pair_arcs = Vec::with_capacity(problem.candidates.len());
    for (c, &v) in problem.candidates.iter().zip(&values) {
        let p = g.add_node();
        pair_arcs.push(g.add_arc(user_node(c.user), p, 1, -v));
        g.add_arc(p, disc_node(c.discussion), 1, 0);
        for &(q, _, accept, _) in &quals[c.discussion] {
            if accept(problem, c.user) {
                g.add_arc(p, q, 1, 0);
            }
        }
    }

    g.min_cost_flow(source, sink);

    let assignment = Assignment::new(
        problem
            .candidates
            .iter()
            .zip(&pair_arcs)
            .filter(|(_, &arc)| g.flow(arc) > 0)
            .map(|(c, _)| (c.user, c.discussion)),
    );
    let uncovered = quals.iter().enumerate().find_map(|(d, nodes)| {
        nodes
            .iter()
            .find(|&&(_, bonus, _, _)| g.flow(bonus) == 0)
            .map(|&(_, _, _, name)| (d, name))
    });
    Solved {
        objective: objective(problem, &assignment),
        assignment,
        uncovered,
    }
}

fn better(a: &Solved, b: &Solved) -> bool {
    match (a.uncovered, b.uncovered) {
        (None, Some(_)) => true,
        (None, None) => a.objective > b.objective,
        _ => false,
    }
}

/// Assigns users to discussions to maximize the objective of
/// [`objective`] subject to the per-user cap and, for every discussion, at
/// least one assignee meeting each enabled threshold.
///
/// Each case is a min-cost flow: source → user arcs carry the cap and the
/// convex workload costs, user → pair → discussion arcs carry the negated
/// pair value, and each requirement of a discussion is a node whose single
/// unit toward the sink earns a bonus larger than every other cost, so
/// coverage is maximized first. With both thresholds enabled a discussion is
/// covered either by one user meeting both or by two users meeting one each;
/// the best pattern is found by enumeration when at most twelve discussions
/// admit both patterns, and by coordinate ascent from the all-dual and
/// all-split patterns otherwise.
pub fn constraint_filter(problem: &AssignmentProblem) -> Result<Assignment> {
    problem.validate()?;
    let nd = problem.discussions.len();
    let (use_g, use_c) = (problem.goal_threshold.is_some(), problem.centrality_threshold.is_some());
    for d in 0..nd {
        let cands: Vec<usize> = problem
            .candidates
            .iter()
            .filter(|c| c.discussion == d)
            .map(|c| c.user)
            .collect();
        for (on, ok, name) in [
            (use_g, &(|u| problem.goal_ok(u)) as &dyn Fn(usize) -> bool, requirement_names(true, false)),
            (use_c, &|u| problem.centrality_ok(u), requirement_names(false, true)),
        ] {
            if on && !cands.iter().any(|&u| ok(u)) {
                return Err(Error::Infeasible {
                    discussion: problem.discussions[d].clone(),
                    requirement: name.into(),
                });
            }
        }
    }

    let scale = scale_for(problem);
    let flexible: Vec<usize> = if use_g && use_c {
        (0..nd)
            .filter(|&d| {
                problem
                    .candidates
                    .iter()
                    .any(|c| c.discussion == d && problem.goal_ok(c.user) && problem.centrality_ok(c.user))
            })
            .collect()
    } else {
        Vec::new()
    };
    let pattern = |dual: &[bool]| {
        let mut covers = vec![Cover::Split; nd];
        for (&d, &is_dual) in flexible.iter().zip(dual) {
            if is_dual {
                covers[d] = Cover::Dual;
            }
        }
        covers
    };

    let best = if flexible.len() <= MAX_ENUMERATED {
        let mut best: Option<Solved> = None;
        for mask in 0u32..(1 << flexible.len()) {
            let dual: Vec<bool> = (0..flexible.len()).map(|i| mask & (1 << i) != 0).collect();
            let s = solve_pattern(problem, &pattern(&dual), scale);
            if best.as_ref().is_none_or(|b| better(&s, b)) {
                best = Some(s);
            }
        }
        best.expect("at least one pattern")
    } else {
        let mut best: Option<Solved> = None;
        for start in [false, true] {
            let mut dual = vec![start; flexible.len()];
            let mut current = solve_pattern(problem, &pattern(&dual), scale);
            let mut improved = true;
            while improved {
                improved = false;
                for i in 0..flexible.len() {
                    dual[i] = !dual[i];
                    let s = solve_pattern(problem, &pattern(&dual), scale);
                    if better(&s, &current) {
                        current = s;
                        improved = true;
                    } else {
                        dual[i] = !dual[i];
                    }
                }
            }
            if best.as_ref().is_none_or(|b| better(&current, b)) {
                best = Some(current);
            }
        }
        best.expect("two starts")
    };

    if let Some((d, name)) = best.uncovered {
        return Err(Error::Infeasible {
            discussion: problem.discussions[d].clone(),
            requirement: format!("{name} within the per-user cap"),
        });
    }
    check_assignment(problem, &best.assignment).map_err(|e| Error::Internal(format!("flow solution rejected: {e}")))?;
    Ok(best.assignment)
}

/// Thresholds of the post-hoc filters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineThresholds {
    /// Goal quality a kept user must reach.
    pub goal_min: f64,
    /// Centrality a kept user must exceed.
    pub centrality_above: f64,
}

impl Default for BaselineThresholds {
    fn default() -> Self {
        Self {
            goal_min: 1.0,
            centrality_above: 0.1,
        }
    }
}

/// The `top_n` highest-scoring candidates of every discussion (ties by user
/// index), minus users failing the mode's filters.
pub fn baseline_filter(
    problem: &AssignmentProblem,
    mode: FilterMode,
    top_n: usize,
    thresholds: BaselineThresholds,
) -> Assignment {
    let (use_g, use_c) = mode.uses();
    let mut by_disc: Vec<Vec<&Candidate>> = vec![Vec::new(); problem.discussions.len()];
    for c in &problem.candidates {
        by_disc[c.discussion].push(c);
    }
    let keep = |u: usize| {
        (!use_g || problem.goal[u] >= thresholds.goal_min) && (!use_c || problem.centrality[u] > thresholds.centrality_above)
    };
    Assignment::new(by_disc.into_iter().flat_map(|mut cs| {
        cs.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.user.cmp(&b.user)));
        cs.into_iter()
            .take(top_n)
            .filter(|c| keep(c.user))
            .map(|c| (c.user, c.discussion))
            .collect::<Vec<_>>()
    }))
}
