mod common;

use std::time::Duration;

use coadapt_core::envs::EnvConfig;
use coadapt_core::game::{belief_update_with, Belief, ZeroLikelihoodPolicy};
use coadapt_core::session::{CreateRequest, SessionError, SessionStore, Status};
use common::alphas;

fn request(condition: &str, horizon: usize) -> CreateRequest {
    CreateRequest {
        environment: EnvConfig::named("shared-autonomy").with_horizon(horizon),
        human_model: alphas(&[0.0, 0.25, 0.5, 0.75, 1.0]),
        condition: condition.into(),
    }
}

#[test]
fn new_sessions_start_uniform_with_distinct_ids() {
    let store = SessionStore::new();
    let a = store.create(&request("mutual-adaptation", 10)).unwrap();
    let b = store.create(&request("mutual-adaptation", 10)).unwrap();
    assert_ne!(a.id, b.id);
    assert_eq!(a.belief, vec![0.2; 5]);
    assert_eq!(a.status, Status::Active);
    assert_eq!(a.t, 0);
    assert_eq!(store.len(), 2);
}

#[test]
fn unknown_condition_is_rejected() {
    let store = SessionStore::new();
    assert!(matches!(store.create(&request("telepathy", 10)), Err(SessionError::Core(_))));
    assert!(store.is_empty());
}

#[test]
fn insisting_on_a_goal_shifts_belief_to_low_alpha() {
    let store = SessionStore::new();
    let s = store.create(&request("mutual-adaptation", 10)).unwrap();
    for _ in 0..3 {
        store.submit(&s.id, 0).unwrap();
    }
    let b = store.state(&s.id).unwrap().belief;
    let mean_alpha: f64 = b.iter().zip([0.0, 0.25, 0.5, 0.75, 1.0]).map(|(p, a)| p * a).sum();
    assert!(mean_alpha < 0.5, "{b:?}");
}

#[test]
fn trace_replays_exactly() {
    let store = SessionStore::new();
    let s = store.create(&request("mutual-adaptation", 10)).unwrap();
    let inputs = [0, 1, 1, 0, 1];
    for a in inputs {
        store.submit(&s.id, a).unwrap();
    }
    let trace = store.trace(&s.id).unwrap();
    assert_eq!(trace.steps.len(), inputs.len());
    let handle = store.get(&s.id).unwrap();
    let session = handle.lock().unwrap();
    let m = session.model();
    let mut b = Belief::new(trace.initial_belief.clone()).unwrap();
    let mut ctx = m.human_model().initial_context();
    for st in &trace.steps {
        let x = m.space().index_of(&coadapt_core::game::WorldState(st.x.clone())).unwrap();
        b = belief_update_with(&b, x, st.a_r, st.a_h, m, &ctx, ZeroLikelihoodPolicy::Smooth(1e-6)).unwrap();
        ctx = m.human_model().next_context(&ctx, x, st.a_r, st.a_h);
        for (p, q) in b.probs().iter().zip(&st.belief) {
            assert!((p - q).abs() <= 1e-9);
        }
        assert_eq!(st.y, -1);
    }
}

#[test]
fn finished_and_illegal_inputs_are_errors() {
    let store = SessionStore::new();
    let s = store.create(&request("no-adaptation", 2)).unwrap();
    assert!(matches!(store.submit(&s.id, 7), Err(SessionError::IllegalAction { action: 7, n: 2 })));
    store.submit(&s.id, 1).unwrap();
    let last = store.submit(&s.id, 1).unwrap();
    assert_eq!(last.status, Status::Finished);
    assert!(matches!(store.submit(&s.id, 1), Err(SessionError::Finished(_))));
    assert!(matches!(store.state("nope"), Err(SessionError::NotFound(_))));
}

#[test]
fn idle_sessions_expire() {
    let store = SessionStore::with_ttl(Duration::from_millis(20));
    let s = store.create(&request("no-adaptation", 4)).unwrap();
    std::thread::sleep(Duration::from_millis(50));
    assert!(matches!(store.state(&s.id), Err(SessionError::NotFound(_))));
    let t = store.create(&request("no-adaptation", 4)).unwrap();
    std::thread::sleep(Duration::from_millis(50));
    store.sweep();
    assert!(store.is_empty());
    assert!(matches!(store.submit(&t.id, 0), Err(SessionError::NotFound(_))));
}
