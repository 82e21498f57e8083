//! Weak implementability: do payments exist making truthful reporting an
//! equilibrium of the direct revelation mechanism?
//!
//! The authoritative decision is exact LP feasibility of the incentive
//! constraints, valid for arbitrary correlated priors. A negative-cycle
//! check on the per-agent type graphs is exposed as a fast cross-check; it
//! is applied only to product priors (see [`negative_cycle_cross_check`]).

use num_traits::Zero;

use crate::instance::{Beliefs, Instance};
use crate::lp::{self, FeasibilityOutcome, LinearSystem, Relation};
use crate::rational::Rat;

/// Outcome of [`decide_weak`]: payments making truthful reporting an
/// equilibrium, or multipliers refuting the incentive system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakVerdict {
    pub implementable: bool,
    /// `payments[agent][type_profile]`, present on yes.
    pub payments: Option<Vec<Vec<Rat>>>,
    /// Farkas multipliers over the rows of [`build_ic_system`], present on no.
    pub refutation: Option<Vec<Rat>>,
}

/// Identifier of the payment variable `P_i(θ)` in the incentive system.
pub fn payment_var(inst: &Instance, agent: usize, profile: usize) -> usize {
    agent * inst.profile_count() + profile
}

/// The incentive-compatibility system over the `n·|Θ|` payment variables:
/// one non-strict row per (agent, type, deviating report) triple requiring
/// the truthful expected utility to be at least the deviation's.
///
/// Rows are ordered by (agent, type, report); each row touches only the
/// agent's own payment variables.
pub fn build_ic_system(inst: &Instance, beliefs: &Beliefs) -> LinearSystem {
    let mut sys = LinearSystem::new(inst.agent_count() * inst.profile_count());
    for agent in 0..inst.agent_count() {
        for (coeffs, bound) in ic_rows_for_agent(inst, beliefs, agent) {
            let coeffs = coeffs
                .into_iter()
                .map(|(p, c)| (payment_var(inst, agent, p), c))
                .collect();
            sys.add(coeffs, bound, Relation::NonStrictLeq);
        }
    }
    sys
}

/// Rows of the agent's incentive block with variables indexed by type
/// profile (not yet offset into the joint variable space):
/// `Σ_{θ_{-i}} q·(P_i(θ_{-i}, θ̃_i) − P_i(θ)) ≤ Σ_{θ_{-i}} q·(V_i(f(θ), θ) − V_i(f(θ_{-i}, θ̃_i), θ))`.
fn ic_rows_for_agent(
    inst: &Instance,
    beliefs: &Beliefs,
    agent: usize,
) -> Vec<(Vec<(usize, Rat)>, Rat)> {
    let own_types = inst.type_space(agent).len();
    let co_space = inst.co_space(agent);
    let mut rows = Vec::new();
    for own_type in 0..own_types {
        for report in 0..own_types {
            if report == own_type {
                continue;
            }
            let mut coeffs: Vec<(usize, Rat)> = Vec::new();
            let mut bound = Rat::zero();
            for co in 0..co_space.len() {
                let q = beliefs.weight(agent, own_type, co);
                if q.is_zero() {
                    continue;
                }
                let truthful = inst.compose_profile(agent, own_type, co);
                let deviated = inst.compose_profile(agent, report, co);
                coeffs.push((deviated, q.clone()));
                coeffs.push((truthful, -q.clone()));
                let value_truth = inst.valuation(agent, inst.choice(truthful), truthful);
                let value_dev = inst.valuation(agent, inst.choice(deviated), truthful);
                bound += q * (value_truth - value_dev);
            }
            rows.push((coeffs, bound));
        }
    }
    rows
}

/// Decides weak implementability. The incentive system splits by agent, so
/// each agent's block is solved independently; the first infeasible block
/// yields the refutation, expanded to the full row indexing with zeros
/// elsewhere.
pub fn decide_weak(inst: &Instance, beliefs: &Beliefs) -> WeakVerdict {
    let mut payments: Vec<Vec<Rat>> = Vec::with_capacity(inst.agent_count());
    let mut row_offset = 0usize;
    for agent in 0..inst.agent_count() {
        let rows = ic_rows_for_agent(inst, beliefs, agent);
        let block_len = rows.len();
        let mut sub = LinearSystem::new(inst.profile_count());
        for (coeffs, bound) in rows {
            sub.add(coeffs, bound, Relation::NonStrictLeq);
        }
        match lp::solve_mixed_system(&sub) {
            FeasibilityOutcome::StrictlyFeasible { point, .. } => {
                payments.push(point);
                row_offset += block_len;
            }
            FeasibilityOutcome::Infeasible { multipliers } => {
                let total_rows: usize = (0..inst.agent_count())
                    .map(|i| {
                        let k = inst.type_space(i).len();
                        k * (k - 1)
                    })
                    .sum();
                let mut full = vec![Rat::zero(); total_rows];
                full[row_offset..row_offset + block_len].clone_from_slice(&multipliers);
                return WeakVerdict {
                    implementable: false,
                    payments: None,
                    refutation: Some(full),
                };
            }
        }
    }
    WeakVerdict { implementable: true, payments: Some(payments), refutation: None }
}

/// The complete weighted digraph on an agent's types. The weight of the
/// edge `θ_i → θ̃_i` is the expected valuation loss from reporting `θ̃_i`
/// instead of the true `θ_i`:
/// `Σ_{θ_{-i}} q_i(θ_{-i}|θ_i) · (V_i(f(θ_{-i},θ_i),θ) − V_i(f(θ_{-i},θ̃_i),θ))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeGraph {
    pub vertex_count: usize,
    /// `(from, to, weight)` in lexicographic edge order, `from ≠ to`.
    pub edges: Vec<(usize, usize, Rat)>,
}

pub fn type_graph(inst: &Instance, beliefs: &Beliefs, agent: usize) -> TypeGraph {
    let own_types = inst.type_space(agent).len();
    let co_space = inst.co_space(agent);
    let mut edges = Vec::with_capacity(own_types * own_types.saturating_sub(1));
    for from in 0..own_types {
        for to in 0..own_types {
            if from == to {
                continue;
            }
            let mut weight = Rat::zero();
            for co in 0..co_space.len() {
                let q = beliefs.weight(agent, from, co);
                if q.is_zero() {
                    continue;
                }
                let truthful = inst.compose_profile(agent, from, co);
                let deviated = inst.compose_profile(agent, to, co);
                let value_truth = inst.valuation(agent, inst.choice(truthful), truthful);
                let value_dev = inst.valuation(agent, inst.choice(deviated), truthful);
                weight += q * (value_truth - value_dev);
            }
            edges.push((from, to, weight));
        }
    }
    TypeGraph { vertex_count: own_types, edges }
}

/// Bellman-Ford negative-cycle detection with exact weights: relax from an
/// implicit zero-distance source `V − 1` times, then a further improving
/// relaxation proves a negative cycle.
pub fn has_negative_cycle(graph: &TypeGraph) -> bool {
    if graph.vertex_count == 0 {
        return false;
    }
    let mut dist = vec![Rat::zero(); graph.vertex_count];
    for _ in 1..graph.vertex_count {
        let mut updated = false;
        for (from, to, weight) in &graph.edges {
            let candidate = &dist[*from] + weight;
            if candidate < dist[*to] {
                dist[*to] = candidate;
                updated = true;
            }
        }
        if !updated {
            return false;
        }
    }
    graph
        .edges
        .iter()
        .any(|(from, to, weight)| &dist[*from] + weight < dist[*to])
}

/// True iff the prior factors exactly into its per-agent marginals.
pub fn is_product_prior(inst: &Instance) -> bool {
    let space = inst.profile_space();
    (0..space.len()).all(|p| {
        let tuple = space.tuple_of(p);
        let product: Rat = tuple
            .iter()
            .enumerate()
            .map(|(i, &t)| inst.marginal(i, t))
            .product();
        inst.prior(p) == &product
    })
}

/// The cycle cross-check: `Some(implementable)` for product priors, `None`
/// (skipped) otherwise — the graph characterization is not established for
/// correlated priors, so the LP verdict stands alone there.
pub fn negative_cycle_cross_check(inst: &Instance, beliefs: &Beliefs) -> Option<bool> {
    if !is_product_prior(inst) {
        return None;
    }
    Some(
        (0..inst.agent_count())
            .all(|agent| !has_negative_cycle(&type_graph(inst, beliefs, agent))),
    )
}
