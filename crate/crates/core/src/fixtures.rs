//! Canonical instances used throughout the test suites and shipped as JSON
//! under `fixtures/` at the workspace root.

use crate::instance::Instance;
use crate::rational::{rat, rat_int, Rat};

fn single_agent(valuations: [[i64; 2]; 2]) -> Instance {
    // Outcomes a, b; types t1, t2; f(t1) = a, f(t2) = b; uniform prior.
    // `valuations[outcome][type]`.
    Instance::from_parts(
        vec!["a".into(), "b".into()],
        vec![vec!["t1".into(), "t2".into()]],
        vec![rat(1, 2), rat(1, 2)],
        vec![vec![
            valuations[0].iter().map(|&v| rat_int(v)).collect(),
            valuations[1].iter().map(|&v| rat_int(v)).collect(),
        ]],
        vec![0, 1],
    )
    .expect("fixture is well-formed")
}

/// Single agent, each type strictly prefers its own assigned outcome.
/// Weakly and strongly implementable with zero payments.
pub fn fixture_a() -> Instance {
    single_agent([[1, 0], [0, 1]])
}

/// Single agent, type-independent valuations: both types prefer outcome
/// `a`. Weakly implementable, not strongly implementable.
pub fn fixture_b() -> Instance {
    single_agent([[1, 1], [0, 0]])
}

/// Single agent, each type strictly prefers the other type's outcome.
/// Not even weakly implementable.
pub fn fixture_c() -> Instance {
    single_agent([[0, 1], [1, 0]])
}

/// Two agents, two types each, uniform prior, given valuations and social
/// choice function. `valuations[agent][outcome][profile]` over the profile
/// order (t1,u1), (t1,u2), (t2,u1), (t2,u2); `scf` in the same order with
/// outcome indices into `{a, b}`.
pub fn fixture_d(valuations: Vec<Vec<Vec<Rat>>>, scf: Vec<usize>) -> Instance {
    Instance::from_parts(
        vec!["a".into(), "b".into()],
        vec![
            vec!["t1".into(), "t2".into()],
            vec!["u1".into(), "u2".into()],
        ],
        vec![rat(1, 4); 4],
        valuations,
        scf,
    )
    .expect("fixture is well-formed")
}

/// Fixture D with all-zero valuations and constant choice `a`.
pub fn two_agent_uniform() -> Instance {
    fixture_d(vec![vec![vec![rat_int(0); 4]; 2]; 2], vec![0; 4])
}

/// Two agents with a correlated prior:
/// p(t1,u1) = 1/2, p(t1,u2) = 1/4, p(t2,u1) = 1/4, p(t2,u2) = 0.
pub fn correlated_two_agent() -> Instance {
    Instance::from_parts(
        vec!["a".into(), "b".into()],
        vec![
            vec!["t1".into(), "t2".into()],
            vec!["u1".into(), "u2".into()],
        ],
        vec![rat(1, 2), rat(1, 4), rat(1, 4), rat_int(0)],
        vec![vec![vec![rat_int(0); 4]; 2]; 2],
        vec![0; 4],
    )
    .expect("fixture is well-formed")
}
