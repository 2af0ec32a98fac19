//! Live interactive sessions: a person supplies the human actions, the
//! planner supplies the robot's.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::envs::{build_model, EnvConfig, HumanConfig};
use crate::game::{
    belief_update_with, Belief, EpisodeTrace, GameModel, HumanContext, TraceStep, ZeroLikelihoodPolicy,
    SESSION_SMOOTHING,
};
use crate::planner::{policy_for, Condition, PolicyRunner, RobotPolicy, SolveOptions};

pub const SESSION_TTL: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("unknown session `{0}`")]
    NotFound(String),
    #[error("session `{0}` is finished")]
    Finished(String),
    #[error("human action {action} is not one of the {n} legal actions")]
    IllegalAction { action: usize, n: usize },
    #[error(transparent)]
    Core(#[from] crate::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Active,
    Finished,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreateRequest {
    pub environment: EnvConfig,
    #[serde(default)]
    pub human_model: HumanConfig,
    pub condition: String,
}

/// Snapshot sent to clients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub env: String,
    pub condition: String,
    pub t: usize,
    pub horizon: usize,
    pub x: Vec<u32>,
    pub belief: Vec<f64>,
    pub status: Status,
    pub robot_actions: Vec<String>,
    pub human_actions: Vec<String>,
    pub type_labels: Vec<String>,
}

/// One completed step: the trace record plus the resulting state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    #[serde(flatten)]
    pub step: TraceStep,
    pub next_x: Vec<u32>,
    pub status: Status,
}

pub struct Session {
    pub id: String,
    pub condition: Condition,
    model: Arc<GameModel>,
    runner: PolicyRunner,
    x: usize,
    belief: Belief,
    ctx: HumanContext,
    t: usize,
    status: Status,
    trace: EpisodeTrace,
}

impl Session {
    pub fn new(id: String, model: Arc<GameModel>, policy: Arc<RobotPolicy>, condition: Condition) -> Self {
        let belief = Belief::uniform(model.types().len());
        let status = if model.is_terminal(model.start()) { Status::Finished } else { Status::Active };
        Session {
            trace: EpisodeTrace {
                seed: 0,
                condition: condition.to_string(),
                initial_belief: belief.probs().to_vec(),
                steps: Vec::new(),
            },
            runner: PolicyRunner::new(policy, model.clone()),
            id,
            condition,
            x: model.start(),
            ctx: model.human_model().initial_context(),
            belief,
            t: 0,
            status,
            model,
        }
    }

    pub fn state(&self) -> SessionState {
        let m = &self.model;
        SessionState {
            id: self.id.clone(),
            env: m.env().to_string(),
            condition: self.condition.to_string(),
            t: self.t,
            horizon: m.horizon(),
            x: m.world_state(self.x).0,
            belief: self.belief.probs().to_vec(),
            status: self.status,
            robot_actions: m.robot_actions().to_vec(),
            human_actions: m.human_actions().to_vec(),
            type_labels: m.types().types().iter().map(|t| t.label.clone()).collect(),
        }
    }

    pub fn trace(&self) -> &EpisodeTrace {
        &self.trace
    }

    pub fn model(&self) -> &GameModel {
        &self.model
    }

    /// Robot and human act simultaneously; the robot's choice depends only
    /// on what it knew before the human's input.
    pub fn submit(&mut self, a_h: usize) -> Result<StepResult, SessionError> {
        if self.status == Status::Finished {
            return Err(SessionError::Finished(self.id.clone()));
        }
        let m = self.model.clone();
        if a_h >= m.n_human() {
            return Err(SessionError::IllegalAction { action: a_h, n: m.n_human() });
        }
        let x = self.x;
        let a_r = self.runner.decide(x, &self.ctx, &self.belief, m.horizon() - self.t)?;
        let prior = self.belief.clone();
        let r_r = prior.expect(|y| m.robot_reward(x, a_r, a_h, y));
        let r_h = prior.expect(|y| m.human_reward(x, a_r, a_h, y));
        let smooth = ZeroLikelihoodPolicy::Smooth(SESSION_SMOOTHING);
        self.belief = belief_update_with(&prior, x, a_r, a_h, &m, &self.ctx, smooth)?;
        self.runner.observe(x, a_r, a_h)?;
        self.ctx = m.human_model().next_context(&self.ctx, x, a_r, a_h);
        let step = TraceStep {
            t: self.t,
            x: m.world_state(x).0,
            a_r,
            a_h,
            belief: self.belief.probs().to_vec(),
            r_r,
            r_h,
            y: -1,
        };
        self.trace.steps.push(step.clone());
        self.t += 1;
        self.x = m.next_state(x, a_r, a_h);
        if self.t >= m.horizon() || m.is_terminal(self.x) {
            self.status = Status::Finished;
        }
        Ok(StepResult { step, next_x: m.world_state(self.x).0, status: self.status })
    }
}

type PolicyKey = String;
type SessionSlot = (Arc<Mutex<Session>>, Instant);
type CachedPolicy = (Arc<GameModel>, Arc<RobotPolicy>);

/// In-memory sessions with idle expiry. Each session sits behind its own
/// lock so steps within a session are serialized.
#[derive(Default)]
pub struct SessionStore {
    sessions: Mutex<HashMap<String, SessionSlot>>,
    policies: Mutex<HashMap<PolicyKey, CachedPolicy>>,
    ttl: Option<Duration>,
}

impl SessionStore {
    pub fn new() -> Self {
        SessionStore::default()
    }

    pub fn with_ttl(ttl: Duration) -> Self {
        SessionStore { ttl: Some(ttl), ..Default::default() }
    }

    fn ttl(&self) -> Duration {
        self.ttl.unwrap_or(SESSION_TTL)
    }

    fn policy(&self, req: &CreateRequest, condition: Condition) -> crate::Result<(Arc<GameModel>, Arc<RobotPolicy>)> {
        let key = serde_json::to_string(&(&req.environment, &req.human_model, condition))?;
        if let Some(hit) = self.policies.lock().expect("policy cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let model = Arc::new(build_model(&req.environment, &req.human_model)?);
        let b0 = Belief::uniform(model.types().len());
        let policy = Arc::new(policy_for(&model, condition, &b0, SolveOptions::default())?);
        let entry = (model, policy);
        self.policies.lock().expect("policy cache poisoned").insert(key, entry.clone());
        Ok(entry)
    }

    pub fn create(&self, req: &CreateRequest) -> Result<SessionState, SessionError> {
        let condition: Condition = req.condition.parse()?;
        let (model, policy) = self.policy(req, condition)?;
        let id = uuid::Uuid::new_v4().to_string();
        let session = Session::new(id.clone(), model, policy, condition);
        let state = session.state();
        self.sweep();
        self.sessions.lock().expect("session map poisoned").insert(id, (Arc::new(Mutex::new(session)), Instant::now()));
        Ok(state)
    }

    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        let mut map = self.sessions.lock().expect("session map poisoned");
        match map.get_mut(id) {
            Some((s, seen)) if seen.elapsed() <= self.ttl() => {
                *seen = Instant::now();
                Ok(s.clone())
            }
            Some(_) => {
                map.remove(id);
                Err(SessionError::NotFound(id.to_string()))
            }
            None => Err(SessionError::NotFound(id.to_string())),
        }
    }

    pub fn submit(&self, id: &str, a_h: usize) -> Result<StepResult, SessionError> {
        let s = self.get(id)?;
        let mut guard = s.lock().expect("session poisoned");
        guard.submit(a_h)
    }

    pub fn state(&self, id: &str) -> Result<SessionState, SessionError> {
        Ok(self.get(id)?.lock().expect("session poisoned").state())
    }

    pub fn trace(&self, id: &str) -> Result<EpisodeTrace, SessionError> {
        Ok(self.get(id)?.lock().expect("session poisoned").trace().clone())
    }

    /// Drops sessions idle for longer than the TTL.
    pub fn sweep(&self) {
        let ttl = self.ttl();
        self.sessions.lock().expect("session map poisoned").retain(|_, (_, seen)| seen.elapsed() <= ttl);
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
