use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::human::{HumanModel, ModalPlan};

/// Row sums of every probability table must match 1 within this tolerance.
pub const PROB_TOL: f64 = 1e-12;

/// Discrete world state: one coordinate per declared component.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorldState(pub Vec<u32>);

/// Mixed-radix enumeration of a finite product state space.
///
/// State indices follow lexicographic order of the components, the last
/// component varying fastest.
#[derive(Clone, Debug)]
pub struct StateSpace {
    names: Vec<String>,
    cards: Vec<u32>,
    len: usize,
}

impl StateSpace {
    pub fn new(components: &[(&str, u32)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::model("state space needs at least one component"));
        }
        let mut len: usize = 1;
        for (name, card) in components {
            if *card == 0 {
                return Err(Error::model(format!("component `{name}` has zero cardinality")));
            }
            len = len.checked_mul(*card as usize).ok_or_else(|| Error::model("state space too large"))?;
        }
        Ok(StateSpace {
            names: components.iter().map(|(n, _)| n.to_string()).collect(),
            cards: components.iter().map(|(_, c)| *c).collect(),
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn component_names(&self) -> &[String] {
        &self.names
    }

    pub fn cardinalities(&self) -> &[u32] {
        &self.cards
    }

    pub fn index_of(&self, state: &WorldState) -> Option<usize> {
        if state.0.len() != self.cards.len() {
            return None;
        }
        let mut idx = 0usize;
        for (v, c) in state.0.iter().zip(&self.cards) {
            if v >= c {
                return None;
            }
            idx = idx * (*c as usize) + *v as usize;
        }
        Some(idx)
    }

    pub fn state(&self, mut index: usize) -> WorldState {
        debug_assert!(index < self.len);
        let mut out = vec![0u32; self.cards.len()];
        for (slot, c) in out.iter_mut().zip(&self.cards).rev() {
            *slot = (index % *c as usize) as u32;
            index /= *c as usize;
        }
        WorldState(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = WorldState> + '_ {
        (0..self.len).map(|i| self.state(i))
    }
}

/// Latent human parameter `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanType {
    pub id: usize,
    pub label: String,
    /// Probability of switching to the plan the robot demonstrates.
    pub adaptability: f64,
    /// Index into the human reward family.
    pub reward_param: usize,
}

/// Finite type set with a robot-action-conditioned transition kernel.
#[derive(Clone, Debug)]
pub struct TypeSpace {
    types: Vec<HumanType>,
    // kernel[(y * n_robot + a_r) * n_types + y']
    kernel: Vec<f64>,
    n_robot: usize,
    identity: bool,
}

impl TypeSpace {
    /// Static types: every row of the kernel is a point mass on the current type.
    pub fn fixed(types: Vec<HumanType>, n_robot_actions: usize) -> Self {
        let n = types.len();
        let mut kernel = vec![0.0; n * n_robot_actions * n];
        for y in 0..n {
            for a in 0..n_robot_actions {
                kernel[(y * n_robot_actions + a) * n + y] = 1.0;
            }
        }
        TypeSpace { types, kernel, n_robot: n_robot_actions, identity: true }
    }

    /// `rows[y][a_r]` is the distribution of the next type.
    pub fn with_kernel(types: Vec<HumanType>, rows: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = types.len();
        if rows.len() != n {
            return Err(Error::model("kernel must have one block per type"));
        }
        let n_robot = rows.first().map_or(0, |r| r.len());
        let mut kernel = Vec::with_capacity(n * n_robot * n);
        for (y, block) in rows.iter().enumerate() {
            if block.len() != n_robot {
                return Err(Error::model(format!("kernel block {y} has the wrong action count")));
            }
            for (a, row) in block.iter().enumerate() {
                check_distribution(row, n, &format!("kernel row (y={y}, aR={a})"))?;
                kernel.extend_from_slice(row);
            }
        }
        let mut ts = TypeSpace { types, kernel, n_robot, identity: false };
        ts.identity = (0..n).all(|y| (0..n_robot).all(|a| ts.transition_row(y, a)[y] == 1.0));
        Ok(ts)
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[HumanType] {
        &self.types
    }

    pub fn get(&self, y: usize) -> &HumanType {
        &self.types[y]
    }

    pub fn transition_row(&self, y: usize, a_r: usize) -> &[f64] {
        let n = self.types.len();
        let start = (y * self.n_robot + a_r) * n;
        &self.kernel[start..start + n]
    }

    pub fn is_static(&self) -> bool {
        self.identity
    }

    pub(crate) fn robot_action_count(&self) -> usize {
        self.n_robot
    }
}

pub(crate) fn check_distribution(row: &[f64], len: usize, what: &str) -> Result<()> {
    if row.len() != len {
        return Err(Error::model(format!("{what}: expected {len} entries, got {}", row.len())));
    }
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::model(format!("{what}: entries must be finite and non-negative")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::model(format!("{what}: sums to {sum}, expected 1")));
    }
    Ok(())
}

/// Which reward the robot optimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Teamwork {
    /// The robot maximizes its own reward `R^R`.
    EqualPartners,
    /// The robot maximizes the human's reward (`R^R ≡ R^H(·; y)`).
    LeaderAssistant,
}

/// Coarse class of a state, used for episode outcome metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Ongoing,
    RobotGoal,
    HumanGoal,
    Complete,
    Timeout,
}

/// Dense reward tables keyed by (state, robot action, human action).
#[derive(Clone, Debug)]
pub struct RewardModel {
    n_robot: usize,
    n_human: usize,
    robot: Vec<f64>,
    human: Vec<Vec<f64>>,
    trust: Vec<f64>,
    param_labels: Vec<String>,
}

impl RewardModel {
    /// `human[p]` is the table for reward parameterization `p`; `trust` is a
    /// planning-only cost (zero table when absent).
    pub fn new(
        n_states: usize,
        n_robot: usize,
        n_human: usize,
        robot: Vec<f64>,
        human: Vec<Vec<f64>>,
        trust: Option<Vec<f64>>,
        param_labels: Vec<String>,
    ) -> Result<Self> {
        let len = n_states * n_robot * n_human;
        let check = |t: &[f64], what: &str| -> Result<()> {
            if t.len() != len {
                return Err(Error::model(format!("{what} table has {} entries, expected {len}", t.len())));
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::model(format!("{what} table has non-finite entries")));
            }
            Ok(())
        };
        check(&robot, "robot reward")?;
        if human.is_empty() {
            return Err(Error::model("need at least one human reward parameterization"));
        }
        for h in &human {
            check(h, "human reward")?;
        }
        let trust = trust.unwrap_or_else(|| vec![0.0; len]);
        check(&trust, "trust cost")?;
        if param_labels.len() != human.len() {
            return Err(Error::model("one label per human reward parameterization"));
        }
        Ok(RewardModel { n_robot, n_human, robot, human, trust, param_labels })
    }

    #[inline]
    fn idx(&self, s: usize, a_r: usize, a_h: usize) -> usize {
        (s * self.n_robot + a_r) * self.n_human + a_h
    }

    pub fn robot(&self, s: usize, a_r: usize, a_h: usize) -> f64 {
        self.robot[self.idx(s, a_r, a_h)]
    }

    pub fn human(&self, param: usize, s: usize, a_r: usize, a_h: usize) -> f64 {
        self.human[param][self.idx(s, a_r, a_h)]
    }

    pub fn trust(&self, s: usize, a_r: usize, a_h: usize) -> f64 {
        self.trust[self.idx(s, a_r, a_h)]
    }

    pub fn param_count(&self) -> usize {
        self.human.len()
    }

    pub fn param_labels(&self) -> &[String] {
        &self.param_labels
    }

    /// Returns a copy with every robot reward entry shifted by `c`.
    pub fn shifted_robot(&self, c: f64) -> RewardModel {
        let mut out = self.clone();
        out.robot.iter_mut().for_each(|v| *v += c);
        out
    }

    pub(crate) fn zero_rows(&mut self, s: usize) {
        for a_r in 0..self.n_robot {
            for a_h in 0..self.n_human {
                let i = self.idx(s, a_r, a_h);
                self.robot[i] = 0.0;
                self.trust[i] = 0.0;
                for h in &mut self.human {
                    h[i] = 0.0;
                }
            }
        }
    }
}

/// Everything needed to assemble a [`GameModel`]; validated by [`GameModel::new`].
#[derive(Clone, Debug)]
pub struct ModelParts {
    pub env: String,
    pub space: StateSpace,
    pub robot_actions: Vec<String>,
    pub human_actions: Vec<String>,
    /// `next[(s * nR + aR) * nH + aH]`.
    pub next: Vec<usize>,
    pub terminal: Vec<bool>,
    pub rewards: RewardModel,
    pub types: TypeSpace,
    pub horizon: usize,
    pub human_model: HumanModel,
    pub teamwork: Teamwork,
    pub start: usize,
    pub initial_belief: Vec<f64>,
    pub disagreement: Vec<bool>,
    pub outcome: Vec<Outcome>,
    pub state_class: Vec<usize>,
    /// Joint plans the environment declares (may be empty).
    pub plans: Vec<ModalPlan>,
    pub role_swap: Option<RoleSwap>,
}

/// Data needed to run the task with human and robot roles exchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoleSwap {
    /// Candidate preference orders; order `i` is reward parameterization `i`.
    pub orders: Vec<Vec<usize>>,
    /// Pairs `[a, b]`: step `a` must precede step `b`.
    pub precedence: Vec<[usize; 2]>,
    /// Probability mass a demonstrator spreads uniformly over legal actions.
    pub noise: f64,
}

/// The two-player game: finite states, action sets, rewards, latent types,
/// deterministic transitions and a finite horizon.
#[derive(Clone, Debug)]
pub struct GameModel {
    env: String,
    space: StateSpace,
    robot_actions: Vec<String>,
    human_actions: Vec<String>,
    next: Vec<usize>,
    terminal: Vec<bool>,
    rewards: RewardModel,
    types: TypeSpace,
    horizon: usize,
    human_model: HumanModel,
    teamwork: Teamwork,
    start: usize,
    initial_belief: Vec<f64>,
    disagreement: Vec<bool>,
    outcome: Vec<Outcome>,
    state_class: Vec<usize>,
    n_classes: usize,
    plans: Vec<ModalPlan>,
    role_swap: Option<RoleSwap>,
}

impl GameModel {
    pub fn new(parts: ModelParts) -> Result<Self> {
        let ModelParts {
            env,
            space,
            robot_actions,
            human_actions,
            next,
            terminal,
            mut rewards,
            types,
            horizon,
            human_model,
            teamwork,
            start,
            initial_belief,
            disagreement,
            outcome,
            state_class,
            plans,
            role_swap,
        } = parts;
        let n = space.len();
        let (nr, nh) = (robot_actions.len(), human_actions.len());
        if nr == 0 || nh == 0 {
            return Err(Error::model("action sets must be non-empty"));
        }
        if horizon == 0 {
            return Err(Error::model("horizon must be at least 1"));
        }
        let table = n * nr * nh;
        if next.len() != table || disagreement.len() != table {
            return Err(Error::model("transition and disagreement tables must cover every (x, aR, aH)"));
        }
        if let Some(bad) = next.iter().find(|s| **s >= n) {
            return Err(Error::model(format!("transition leaves the state set (successor {bad})")));
        }
        if terminal.len() != n || outcome.len() != n || state_class.len() != n {
            return Err(Error::model("per-state tables must have one entry per state"));
        }
        if start >= n {
            return Err(Error::model("start state out of range"));
        }
        if types.is_empty() {
            return Err(Error::model("type space is empty"));
        }
        if types.robot_action_count() != nr {
            return Err(Error::model("type kernel must be indexed by the robot action set"));
        }
        for t in types.types() {
            if !(0.0..=1.0).contains(&t.adaptability) {
                return Err(Error::model(format!("type {} adaptability outside [0, 1]", t.id)));
            }
            if t.reward_param >= rewards.param_count() {
                return Err(Error::model(format!("type {} reward_param out of range", t.id)));
            }
        }
        check_distribution(&initial_belief, types.len(), "initial belief")?;
        let mut next = next;
        for s in (0..n).filter(|s| terminal[*s]) {
            for i in 0..nr * nh {
                next[s * nr * nh + i] = s;
            }
            rewards.zero_rows(s);
        }
        human_model.validate(n, nr, nh, &types, &terminal)?;
        let n_classes = state_class.iter().copied().max().map_or(0, |m| m + 1);
        Ok(GameModel {
            env,
            space,
            robot_actions,
            human_actions,
            next,
            terminal,
            rewards,
            types,
            horizon,
            human_model,
            teamwork,
            start,
            initial_belief,
            disagreement,
            outcome,
            state_class,
            n_classes,
            plans,
            role_swap,
        })
    }

    /// Decomposes the model back into its parts, e.g. to derive a variant.
    pub fn into_parts(self) -> ModelParts {
        ModelParts {
            env: self.env,
            space: self.space,
            robot_actions: self.robot_actions,
            human_actions: self.human_actions,
            next: self.next,
            terminal: self.terminal,
            rewards: self.rewards,
            types: self.types,
            horizon: self.horizon,
            human_model: self.human_model,
            teamwork: self.teamwork,
            start: self.start,
            initial_belief: self.initial_belief,
            disagreement: self.disagreement,
            outcome: self.outcome,
            state_class: self.state_class,
            plans: self.plans,
            role_swap: self.role_swap,
        }
    }

    #[inline]
    fn idx(&self, s: usize, a_r: usize, a_h: usize) -> usize {
        (s * self.robot_actions.len() + a_r) * self.human_actions.len() + a_h
    }

    pub fn env(&self) -> &str {
        &self.env
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn n_states(&self) -> usize {
        self.space.len()
    }

    pub fn robot_actions(&self) -> &[String] {
        &self.robot_actions
    }

    pub fn human_actions(&self) -> &[String] {
        &self.human_actions
    }

    pub fn n_robot(&self) -> usize {
        self.robot_actions.len()
    }

    pub fn n_human(&self) -> usize {
        self.human_actions.len()
    }

    pub fn next_state(&self, s: usize, a_r: usize, a_h: usize) -> usize {
        self.next[self.idx(s, a_r, a_h)]
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    pub fn rewards(&self) -> &RewardModel {
        &self.rewards
    }

    pub fn types(&self) -> &TypeSpace {
        &self.types
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn human_model(&self) -> &HumanModel {
        &self.human_model
    }

    pub fn teamwork(&self) -> Teamwork {
        self.teamwork
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn initial_belief(&self) -> &[f64] {
        &self.initial_belief
    }

    pub fn disagree(&self, s: usize, a_r: usize, a_h: usize) -> bool {
        self.disagreement[self.idx(s, a_r, a_h)]
    }

    pub fn outcome(&self, s: usize) -> Outcome {
        self.outcome[s]
    }

    pub fn state_class(&self, s: usize) -> usize {
        self.state_class[s]
    }

    pub fn n_state_classes(&self) -> usize {
        self.n_classes
    }

    pub fn plans(&self) -> &[ModalPlan] {
        &self.plans
    }

    pub fn role_swap(&self) -> Option<&RoleSwap> {
        self.role_swap.as_ref()
    }

    pub fn world_state(&self, s: usize) -> WorldState {
        self.space.state(s)
    }

    /// Robot reward actually received (what traces log as `rR`).
    pub fn robot_reward(&self, s: usize, a_r: usize, a_h: usize, y: usize) -> f64 {
        match self.teamwork {
            Teamwork::EqualPartners => self.rewards.robot(s, a_r, a_h),
            Teamwork::LeaderAssistant => self.human_reward(s, a_r, a_h, y),
        }
    }

    pub fn human_reward(&self, s: usize, a_r: usize, a_h: usize, y: usize) -> f64 {
        self.rewards.human(self.types.get(y).reward_param, s, a_r, a_h)
    }

    /// Per-step term of the planning objective for a known type.
    pub fn planning_reward(&self, s: usize, a_r: usize, a_h: usize, y: usize) -> f64 {
        match self.teamwork {
            Teamwork::EqualPartners => self.rewards.robot(s, a_r, a_h) - self.rewards.trust(s, a_r, a_h),
            Teamwork::LeaderAssistant => self.human_reward(s, a_r, a_h, y),
        }
    }

    /// True when the planning objective does not depend on the type.
    pub fn planning_reward_is_type_free(&self) -> bool {
        self.teamwork == Teamwork::EqualPartners
    }

    /// Replaces the reward model, keeping every other table.
    pub fn with_rewards(self, rewards: RewardModel) -> Result<GameModel> {
        let mut parts = self.into_parts();
        parts.rewards = rewards;
        GameModel::new(parts)
    }

    /// States reachable from the start state by breadth-first search.
    pub fn reachable_states(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n_states()];
        let mut queue = std::collections::VecDeque::from([self.start]);
        seen[self.start] = true;
        let mut out = Vec::new();
        while let Some(s) = queue.pop_front() {
            out.push(s);
            for a_r in 0..self.n_robot() {
                for a_h in 0..self.n_human() {
                    let n = self.next_state(s, a_r, a_h);
                    if !seen[n] {
                        seen[n] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}
