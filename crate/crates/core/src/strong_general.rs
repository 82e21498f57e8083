//! General strong implementability by exhaustive search over equilibrium
//! labelings, deviation witnesses and selective-elimination data, each
//! branch tested by exact strict feasibility.
//!
//! A branch fixes, for every strategy profile of the direct mechanism,
//! whether it is an equilibrium (witnessed deviation otherwise) and, for
//! every bad equilibrium, the elimination data (agent, threatened type,
//! flag outcome map). The branch's linear system over the payments and the
//! flag payments is strictly feasible iff payments exist realizing exactly
//! that equilibrium set and eliminating its bad members, so the search is
//! sound; it is complete because a strongly implementable instance has at
//! least one realizable branch and all branches are enumerated.
//!
//! The search is depth-first in a fixed lexicographic order with the
//! truthful profile pre-committed as an equilibrium, and prunes a subtree
//! as soon as the committed prefix is strictly infeasible. Elimination data
//! is committed as soon as its bad equilibrium is, not at the leaves, so an
//! ineliminable bad equilibrium cuts the search at its own depth. Verdicts
//! and certificates are deterministic.

use std::collections::BTreeMap;
use std::time::Instant;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::index::ProductSpace;
use crate::instance::{Beliefs, Instance};
use crate::lp::{self, FeasibilityOutcome, LinearConstraint, LinearSystem, Relation};
use crate::mechanism::{
    enumerate_equilibria, is_equilibrium, realizes_scf_direct, Mechanism, StrategyProfile,
    DEFAULT_PROFILE_BUDGET,
};
use crate::rational::Rat;
use crate::weak::payment_var;

/// Status of one strategy profile in a labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileLabel {
    Equilibrium,
    /// Witnessed non-equilibrium: the agent of `own_type` strictly gains by
    /// reporting `deviation` instead of its profile bid.
    NonEquilibrium { agent: usize, own_type: usize, deviation: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelingError {
    #[error("labeling covers {got} profiles, expected {expected}")]
    Incomplete { expected: usize, got: usize },
    #[error("the truthful profile must be labeled an equilibrium")]
    TruthfulNotEquilibrium,
    #[error("witness of profile {profile} is invalid")]
    InvalidWitness { profile: usize },
}

/// A total assignment of labels to the strategy profiles of the direct
/// mechanism, in lexicographic profile order. The truthful profile is
/// always an equilibrium and every witness deviates from the profile's bid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    labels: Vec<ProfileLabel>,
}

impl Labeling {
    pub fn new(inst: &Instance, labels: Vec<ProfileLabel>) -> Result<Self, LabelingError> {
        let space = direct_strategy_space(inst);
        if labels.len() != space.len() {
            return Err(LabelingError::Incomplete { expected: space.len(), got: labels.len() });
        }
        let truthful = StrategyProfile::truthful(inst).to_index(&space);
        if labels[truthful] != ProfileLabel::Equilibrium {
            return Err(LabelingError::TruthfulNotEquilibrium);
        }
        for (idx, label) in labels.iter().enumerate() {
            if let ProfileLabel::NonEquilibrium { agent, own_type, deviation } = *label {
                let profile = StrategyProfile::from_index(inst, &space, idx);
                let valid = agent < inst.agent_count()
                    && own_type < inst.type_space(agent).len()
                    && deviation < inst.type_space(agent).len()
                    && deviation != profile.bid_for(agent, own_type);
                if !valid {
                    return Err(LabelingError::InvalidWitness { profile: idx });
                }
            }
        }
        Ok(Labeling { labels })
    }

    pub fn label(&self, profile_index: usize) -> ProfileLabel {
        self.labels[profile_index]
    }

    pub fn labels(&self) -> &[ProfileLabel] {
        &self.labels
    }

    /// Indices of profiles labeled equilibria whose play disagrees with the
    /// social choice function — the bad equilibria the labeling commits to.
    pub fn bad_equilibria(&self, inst: &Instance) -> Vec<usize> {
        let space = direct_strategy_space(inst);
        self.labels
            .iter()
            .enumerate()
            .filter(|(idx, label)| {
                **label == ProfileLabel::Equilibrium
                    && !realizes_scf_direct(inst, &StrategyProfile::from_index(inst, &space, *idx))
            })
            .map(|(idx, _)| idx)
            .collect()
    }
}

/// Elimination data for one bad equilibrium: the flagging agent, the
/// threatened type preferring the flag, and the flag outcome for every
/// co-bid profile. The flag payments are fresh LP variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanEntry {
    pub agent: usize,
    pub threat_type: usize,
    /// Outcome index per co-bid-profile index of `agent`.
    pub outcome_map: Vec<usize>,
}

/// Elimination data per bad equilibrium, keyed by profile index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EliminationPlan {
    pub entries: BTreeMap<usize, PlanEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("no elimination plan entry for bad equilibrium profile {0}")]
    MissingPlanEntry(usize),
}

/// A complete positive certificate: payments, the equilibrium labeling they
/// realize, and the elimination data for every bad equilibrium, together
/// with the resolved flag payments and the strict slack of the assembled
/// system at the certified point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrongCertificate {
    /// `payments[agent][type_profile]`.
    pub payments: Vec<Vec<Rat>>,
    pub labeling: Labeling,
    pub plan: EliminationPlan,
    /// Flag payments per bad equilibrium, by co-bid-profile index.
    pub elimination_payments: BTreeMap<usize, Vec<Rat>>,
    pub strict_slack: Rat,
}

impl StrongCertificate {
    /// Maximum bit length over all payments and flag payments.
    pub fn max_payment_bits(&self) -> u64 {
        self.payments
            .iter()
            .flatten()
            .chain(self.elimination_payments.values().flatten())
            .map(crate::rational::bit_length)
            .max()
            .unwrap_or(0)
    }
}

/// Resource limits for [`decide_strong`]. Exceeding any cap aborts with
/// `ResourceExceeded`; the search never guesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchLimits {
    /// Cap on the number of strategy profiles of the direct mechanism.
    pub max_profiles: u64,
    /// Cap on search-tree branch commitments (profile labels and plan
    /// entries combined).
    pub max_branches: u64,
    /// Wall-time cap.
    pub max_seconds: Option<u64>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_profiles: DEFAULT_PROFILE_BUDGET,
            max_branches: 10_000_000,
            max_seconds: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub branches_explored: u64,
    pub branches_refuted: u64,
    pub lp_solves: u64,
    pub leaves_reached: u64,
    pub plans_tried: u64,
}

/// Verdict of the general decision procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrongOutcome {
    Implementable(Box<StrongCertificate>),
    NotImplementable,
    ResourceExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrongDecision {
    pub outcome: StrongOutcome,
    pub stats: SearchStats,
}

/// The strategy-profile space of the direct mechanism `Γ_{(f,·)}`: one
/// coordinate per (agent, type), ranging over the agent's own types.
pub fn direct_strategy_space(inst: &Instance) -> ProductSpace {
    let mut dims = Vec::new();
    for types in inst.type_spaces() {
        dims.extend(std::iter::repeat_n(types.len(), types.len()));
    }
    ProductSpace::new(dims)
}

/// Co-bid profile of agent `agent` reported under `profile` when the true
/// co-types are `co`: each other agent's bid on its true type, re-encoded
/// in the same co-space (bids are types in a direct mechanism).
fn reported_co_index(
    inst: &Instance,
    profile: &StrategyProfile,
    agent: usize,
    co: usize,
) -> usize {
    let co_space = inst.co_space(agent);
    let tuple = co_space.tuple_of(co);
    let mut bids = Vec::with_capacity(tuple.len());
    let mut pos = 0;
    for j in 0..inst.agent_count() {
        if j == agent {
            continue;
        }
        bids.push(profile.bid_for(j, tuple[pos]));
        pos += 1;
    }
    co_space.index_of(&bids)
}

/// Equilibrium rows of one profile for one agent, payment variables mapped
/// through `pvar`: for every (type, report) with the report differing from
/// the profile's bid, the played bid must be weakly better. The rows of
/// different agents share no variables, so branch systems split by agent.
fn equilibrium_rows_for_agent(
    inst: &Instance,
    beliefs: &Beliefs,
    profile: &StrategyProfile,
    agent: usize,
    pvar: &dyn Fn(usize) -> usize,
) -> Vec<LinearConstraint> {
    let own_types = inst.type_space(agent).len();
    let mut rows = Vec::new();
    for own_type in 0..own_types {
        let chosen = profile.bid_for(agent, own_type);
        for report in 0..own_types {
            if report == chosen {
                continue;
            }
            let mut coeffs: Vec<(usize, Rat)> = Vec::new();
            let mut bound = Rat::zero();
            for co in 0..inst.co_space(agent).len() {
                let q = beliefs.weight(agent, own_type, co);
                if q.is_zero() {
                    continue;
                }
                let co_rep = reported_co_index(inst, profile, agent, co);
                let played = inst.compose_profile(agent, chosen, co_rep);
                let deviated = inst.compose_profile(agent, report, co_rep);
                let true_profile = inst.compose_profile(agent, own_type, co);
                coeffs.push((pvar(deviated), q.clone()));
                coeffs.push((pvar(played), -q.clone()));
                let value_played = inst.valuation(agent, inst.choice(played), true_profile);
                let value_dev = inst.valuation(agent, inst.choice(deviated), true_profile);
                bound += q * (value_played - value_dev);
            }
            rows.push(LinearConstraint::new(coeffs, bound, Relation::NonStrictLeq));
        }
    }
    rows
}

/// The strict witness row of a profile labeled `NonEquilibrium`: the
/// witnessed deviation strictly beats the profile's bid.
fn witness_row(
    inst: &Instance,
    beliefs: &Beliefs,
    profile: &StrategyProfile,
    agent: usize,
    own_type: usize,
    deviation: usize,
    pvar: &dyn Fn(usize) -> usize,
) -> LinearConstraint {
    let chosen = profile.bid_for(agent, own_type);
    let mut coeffs: Vec<(usize, Rat)> = Vec::new();
    let mut bound = Rat::zero();
    for co in 0..inst.co_space(agent).len() {
        let q = beliefs.weight(agent, own_type, co);
        if q.is_zero() {
            continue;
        }
        let co_rep = reported_co_index(inst, profile, agent, co);
        let played = inst.compose_profile(agent, chosen, co_rep);
        let deviated = inst.compose_profile(agent, deviation, co_rep);
        let true_profile = inst.compose_profile(agent, own_type, co);
        coeffs.push((pvar(played), q.clone()));
        coeffs.push((pvar(deviated), -q.clone()));
        let value_played = inst.valuation(agent, inst.choice(played), true_profile);
        let value_dev = inst.valuation(agent, inst.choice(deviated), true_profile);
        bound += q * (value_dev - value_played);
    }
    LinearConstraint::new(coeffs, bound, Relation::StrictLess)
}

/// The selective-elimination rows of one bad equilibrium: the strict
/// flag-gain row of the threatened type, then the no-gain-under-truth row
/// of every type of the flagging agent. Flag payments are the variables
/// `flag_base..flag_base + |co-space|`; payment variables map through
/// `pvar`. Only the flagging agent's variables appear.
fn plan_block_rows(
    inst: &Instance,
    beliefs: &Beliefs,
    profile: &StrategyProfile,
    entry: &PlanEntry,
    flag_base: usize,
    pvar: &dyn Fn(usize) -> usize,
) -> Vec<LinearConstraint> {
    let agent = entry.agent;
    let co_space = inst.co_space(agent);
    let mut rows = Vec::with_capacity(1 + inst.type_space(agent).len());

    // Strict gain at the threatened type under the bad equilibrium's play.
    let chosen = profile.bid_for(agent, entry.threat_type);
    let mut coeffs: Vec<(usize, Rat)> = Vec::new();
    let mut bound = Rat::zero();
    for co in 0..co_space.len() {
        let q = beliefs.weight(agent, entry.threat_type, co);
        if q.is_zero() {
            continue;
        }
        let co_rep = reported_co_index(inst, profile, agent, co);
        let played = inst.compose_profile(agent, chosen, co_rep);
        let true_profile = inst.compose_profile(agent, entry.threat_type, co);
        coeffs.push((pvar(played), q.clone()));
        coeffs.push((flag_base + co_rep, -q.clone()));
        let value_flag = inst.valuation(agent, entry.outcome_map[co_rep], true_profile);
        let value_played = inst.valuation(agent, inst.choice(played), true_profile);
        bound += q * (value_flag - value_played);
    }
    rows.push(LinearConstraint::new(coeffs, bound, Relation::StrictLess));

    // No type may gain by flagging when everyone reports truthfully.
    for own_type in 0..inst.type_space(agent).len() {
        let mut coeffs: Vec<(usize, Rat)> = Vec::new();
        let mut bound = Rat::zero();
        for co in 0..co_space.len() {
            let q = beliefs.weight(agent, own_type, co);
            if q.is_zero() {
                continue;
            }
            let truthful = inst.compose_profile(agent, own_type, co);
            coeffs.push((flag_base + co, q.clone()));
            coeffs.push((pvar(truthful), -q.clone()));
            let value_truth = inst.valuation(agent, inst.choice(truthful), truthful);
            let value_flag = inst.valuation(agent, entry.outcome_map[co], truthful);
            bound += q * (value_truth - value_flag);
        }
        rows.push(LinearConstraint::new(coeffs, bound, Relation::NonStrictLeq));
    }
    rows
}

/// Assembles the full system of a labeling and plan: strict witness rows of
/// non-equilibria, equilibrium rows, then per bad equilibrium the strict
/// flag-gain row and the truthful no-gain rows. Variables are the payments
/// `P_i(θ)` followed by per-bad-equilibrium flag payment blocks in profile
/// order.
pub fn build_system(
    inst: &Instance,
    beliefs: &Beliefs,
    labeling: &Labeling,
    plan: &EliminationPlan,
) -> Result<LinearSystem, BuildError> {
    let space = direct_strategy_space(inst);
    let bads = labeling.bad_equilibria(inst);
    for &bad in &bads {
        if !plan.entries.contains_key(&bad) {
            return Err(BuildError::MissingPlanEntry(bad));
        }
    }
    let mut variable_count = inst.agent_count() * inst.profile_count();
    let mut flag_bases = BTreeMap::new();
    for &bad in &bads {
        flag_bases.insert(bad, variable_count);
        variable_count += inst.co_space(plan.entries[&bad].agent).len();
    }
    let mut sys = LinearSystem::new(variable_count);
    for (idx, label) in labeling.labels().iter().enumerate() {
        if let ProfileLabel::NonEquilibrium { agent, own_type, deviation } = *label {
            let profile = StrategyProfile::from_index(inst, &space, idx);
            let pvar = |p: usize| payment_var(inst, agent, p);
            sys.push(witness_row(inst, beliefs, &profile, agent, own_type, deviation, &pvar));
        }
    }
    for (idx, label) in labeling.labels().iter().enumerate() {
        if *label == ProfileLabel::Equilibrium {
            let profile = StrategyProfile::from_index(inst, &space, idx);
            for agent in 0..inst.agent_count() {
                let pvar = |p: usize| payment_var(inst, agent, p);
                for row in equilibrium_rows_for_agent(inst, beliefs, &profile, agent, &pvar) {
                    sys.push(row);
                }
            }
        }
    }
    for &bad in &bads {
        let profile = StrategyProfile::from_index(inst, &space, bad);
        let entry = &plan.entries[&bad];
        let pvar = |p: usize| payment_var(inst, entry.agent, p);
        for row in plan_block_rows(inst, beliefs, &profile, entry, flag_bases[&bad], &pvar) {
            sys.push(row);
        }
    }
    Ok(sys)
}

/// Exact check of the two selective-elimination conditions for an
/// equilibrium `profile` of the direct mechanism with `payments`, given the
/// plan entry and resolved flag payments (by co-bid-profile index).
pub fn selectively_eliminable(
    inst: &Instance,
    beliefs: &Beliefs,
    payments: &[Vec<Rat>],
    profile: &StrategyProfile,
    entry: &PlanEntry,
    flag_payments: &[Rat],
) -> bool {
    let agent = entry.agent;
    let co_space = inst.co_space(agent);
    assert_eq!(flag_payments.len(), co_space.len());
    assert_eq!(entry.outcome_map.len(), co_space.len());

    // Condition 1: the threatened type strictly gains by flagging while the
    // others play the bad equilibrium.
    let chosen = profile.bid_for(agent, entry.threat_type);
    let mut flag_side = Rat::zero();
    let mut play_side = Rat::zero();
    for co in 0..co_space.len() {
        let q = beliefs.weight(agent, entry.threat_type, co);
        if q.is_zero() {
            continue;
        }
        let co_rep = reported_co_index(inst, profile, agent, co);
        let played = inst.compose_profile(agent, chosen, co_rep);
        let true_profile = inst.compose_profile(agent, entry.threat_type, co);
        flag_side +=
            q * (inst.valuation(agent, entry.outcome_map[co_rep], true_profile)
                + &flag_payments[co_rep]);
        play_side += q
            * (inst.valuation(agent, inst.choice(played), true_profile)
                + &payments[agent][played]);
    }
    if flag_side <= play_side {
        return false;
    }

    // Condition 2: no type gains by flagging under truthful reporting.
    for own_type in 0..inst.type_space(agent).len() {
        let mut gain = Rat::zero();
        for (co, flag_payment) in flag_payments.iter().enumerate() {
            let q = beliefs.weight(agent, own_type, co);
            if q.is_zero() {
                continue;
            }
            let truthful = inst.compose_profile(agent, own_type, co);
            let truth_value = inst.valuation(agent, inst.choice(truthful), truthful)
                + &payments[agent][truthful];
            let flag_value =
                inst.valuation(agent, entry.outcome_map[co], truthful) + flag_payment;
            gain += q * (truth_value - flag_value);
        }
        if gain < Rat::zero() {
            return false;
        }
    }
    true
}

/// Independent re-derivation of a certificate's claims:
/// (a) brute-force enumeration of `Γ_{(f,P)}` reproduces the labeling's
/// equilibrium set, (b) truthful reporting is an equilibrium, (c) every bad
/// equilibrium passes [`selectively_eliminable`] with its plan entry, and
/// (d) the certified point satisfies the assembled system.
pub fn verify_certificate(inst: &Instance, beliefs: &Beliefs, cert: &StrongCertificate) -> bool {
    if cert.strict_slack <= Rat::zero() {
        return false;
    }
    if cert.payments.len() != inst.agent_count()
        || cert.payments.iter().any(|p| p.len() != inst.profile_count())
    {
        return false;
    }
    let space = direct_strategy_space(inst);
    if cert.labeling.labels().len() != space.len() {
        return false;
    }

    // (a) The labeling must be the exact equilibrium set.
    let mech = Mechanism::direct(inst, &cert.payments);
    let Ok(reports) = enumerate_equilibria(inst, beliefs, &mech, DEFAULT_PROFILE_BUDGET, 1) else {
        return false;
    };
    let mut actual: Vec<usize> = reports.iter().map(|r| r.profile.to_index(&space)).collect();
    actual.sort_unstable();
    let labeled: Vec<usize> = cert
        .labeling
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| **l == ProfileLabel::Equilibrium)
        .map(|(idx, _)| idx)
        .collect();
    if actual != labeled {
        return false;
    }

    // (b) Truthful reporting must be among them.
    let truthful = StrategyProfile::truthful(inst);
    if !is_equilibrium(inst, beliefs, &mech, &truthful).is_equilibrium {
        return false;
    }

    // (c) Every bad equilibrium is selectively eliminated by its entry.
    let bads = cert.labeling.bad_equilibria(inst);
    for &bad in &bads {
        let (Some(entry), Some(flag_payments)) =
            (cert.plan.entries.get(&bad), cert.elimination_payments.get(&bad))
        else {
            return false;
        };
        if entry.agent >= inst.agent_count()
            || entry.threat_type >= inst.type_space(entry.agent).len()
            || entry.outcome_map.len() != inst.co_space(entry.agent).len()
            || entry.outcome_map.iter().any(|&x| x >= inst.outcome_count())
            || flag_payments.len() != inst.co_space(entry.agent).len()
        {
            return false;
        }
        let profile = StrategyProfile::from_index(inst, &space, bad);
        if !selectively_eliminable(inst, beliefs, &cert.payments, &profile, entry, flag_payments) {
            return false;
        }
    }

    // (d) The certified point satisfies the assembled system.
    let Ok(sys) = build_system(inst, beliefs, &cert.labeling, &cert.plan) else {
        return false;
    };
    let mut point: Vec<Rat> = cert.payments.iter().flatten().cloned().collect();
    for &bad in &bads {
        point.extend(cert.elimination_payments[&bad].iter().cloned());
    }
    lp::check_point(&sys, &point) == Ok(true)
}

#[derive(Debug)]
struct ResourceExceeded;

/// All elimination entries in (agent, threatened type, outcome map) order.
fn plan_entry_pool(inst: &Instance) -> Vec<PlanEntry> {
    let mut pool = Vec::new();
    for agent in 0..inst.agent_count() {
        let co_len = inst.co_space(agent).len();
        let map_space = ProductSpace::new(vec![inst.outcome_count(); co_len]);
        for threat_type in 0..inst.type_space(agent).len() {
            for map_index in 0..map_space.len() {
                pool.push(PlanEntry {
                    agent,
                    threat_type,
                    outcome_map: map_space.tuple_of(map_index),
                });
            }
        }
    }
    pool
}

struct Search<'a> {
    inst: &'a Instance,
    beliefs: &'a Beliefs,
    profiles: Vec<StrategyProfile>,
    realizes: Vec<bool>,
    truthful_index: usize,
    labels: Vec<Option<ProfileLabel>>,
    /// Profile indices in visiting order: truthful first, then the rest in
    /// lexicographic order.
    order: Vec<usize>,
    /// Committed elimination data, in ascending bad-profile order.
    plans: Vec<(usize, PlanEntry)>,
    /// Every elimination entry (agent, threatened type, outcome map) in
    /// lexicographic order; the same pool serves every bad equilibrium.
    entry_pool: Vec<PlanEntry>,
    /// Last pool index that worked per profile, tried first on re-probes.
    probe_hint: Vec<Option<usize>>,
    limits: &'a SearchLimits,
    stats: SearchStats,
    started: Instant,
}

impl<'a> Search<'a> {
    fn check_limits(&self) -> Result<(), ResourceExceeded> {
        if self.stats.branches_explored > self.limits.max_branches {
            return Err(ResourceExceeded);
        }
        if let Some(cap) = self.limits.max_seconds {
            if self.started.elapsed().as_secs() >= cap {
                return Err(ResourceExceeded);
            }
        }
        Ok(())
    }

    /// The committed rows restricted to one agent, over local variables:
    /// the agent's payments by profile index, then the flag blocks of its
    /// committed plans in commit order, then the probe block when `extra`
    /// is given. Rows of different agents never share variables, so the
    /// full branch system is feasible iff every per-agent system is.
    fn agent_system(
        &self,
        agent: usize,
        extra: Option<(usize, &PlanEntry)>,
    ) -> LinearSystem {
        let mut variable_count = self.inst.profile_count();
        let mut bases = Vec::with_capacity(self.plans.len());
        for (_, entry) in &self.plans {
            if entry.agent == agent {
                bases.push(Some(variable_count));
                variable_count += self.inst.co_space(agent).len();
            } else {
                bases.push(None);
            }
        }
        let extra_base = variable_count;
        if extra.is_some() {
            variable_count += self.inst.co_space(agent).len();
        }
        let local = |p: usize| p;
        let mut sys = LinearSystem::new(variable_count);
        for (idx, label) in self.labels.iter().enumerate() {
            match label {
                None => {}
                Some(ProfileLabel::Equilibrium) => {
                    for row in equilibrium_rows_for_agent(
                        self.inst,
                        self.beliefs,
                        &self.profiles[idx],
                        agent,
                        &local,
                    ) {
                        sys.push(row);
                    }
                }
                Some(ProfileLabel::NonEquilibrium { agent: a, own_type, deviation })
                    if *a == agent =>
                {
                    sys.push(witness_row(
                        self.inst,
                        self.beliefs,
                        &self.profiles[idx],
                        agent,
                        *own_type,
                        *deviation,
                        &local,
                    ));
                }
                Some(ProfileLabel::NonEquilibrium { .. }) => {}
            }
        }
        for ((bad, entry), base) in self.plans.iter().zip(&bases) {
            if let Some(base) = base {
                for row in plan_block_rows(
                    self.inst,
                    self.beliefs,
                    &self.profiles[*bad],
                    entry,
                    *base,
                    &local,
                ) {
                    sys.push(row);
                }
            }
        }
        if let Some((bad, entry)) = extra {
            for row in plan_block_rows(
                self.inst,
                self.beliefs,
                &self.profiles[bad],
                entry,
                extra_base,
                &local,
            ) {
                sys.push(row);
            }
        }
        sys
    }

    fn solve_agent(
        &mut self,
        agent: usize,
        extra: Option<(usize, &PlanEntry)>,
    ) -> Result<FeasibilityOutcome, ResourceExceeded> {
        if let Some(cap) = self.limits.max_seconds {
            if self.started.elapsed().as_secs() >= cap {
                return Err(ResourceExceeded);
            }
        }
        self.stats.lp_solves += 1;
        Ok(lp::solve_mixed_system(&self.agent_system(agent, extra)))
    }

    /// Re-checks the agents a commitment touched; agents outside `touched`
    /// stay feasible from the parent node.
    fn agents_feasible(&mut self, touched: &[usize]) -> Result<bool, ResourceExceeded> {
        for &agent in touched {
            if !self.solve_agent(agent, None)?.is_feasible() {
                self.stats.branches_refuted += 1;
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Block rows of one elimination entry for the bad equilibrium at
    /// `bad`, at the probe offset of the entry's agent. Entries with equal
    /// rows are interchangeable, so duplicates can be skipped.
    fn entry_rows(&self, bad: usize, entry: &PlanEntry) -> Vec<LinearConstraint> {
        let owned = self
            .plans
            .iter()
            .filter(|(_, e)| e.agent == entry.agent)
            .count();
        let base =
            self.inst.profile_count() + owned * self.inst.co_space(entry.agent).len();
        let local = |p: usize| p;
        plan_block_rows(self.inst, self.beliefs, &self.profiles[bad], entry, base, &local)
    }

    /// Whether the committed rows of the entry's agent plus the entry's
    /// block are strictly feasible. Nothing is committed and no other agent
    /// is involved.
    fn entry_works(&mut self, bad: usize, entry: &PlanEntry) -> Result<bool, ResourceExceeded> {
        self.stats.plans_tried += 1;
        Ok(self.solve_agent(entry.agent, Some((bad, entry)))?.is_feasible())
    }

    /// Existence probe: some elimination entry works for the bad
    /// equilibrium at `bad` against the rows committed so far. Adding rows
    /// below can only shrink the options, so a failed probe prunes the
    /// subtree; a successful one defers the actual choice to the leaf. The
    /// entry that worked last time for this profile is tried first — the
    /// probe only needs existence, so the order does not affect verdicts.
    fn some_entry_works(&mut self, bad: usize) -> Result<bool, ResourceExceeded> {
        let mut tested: Vec<Vec<LinearConstraint>> = Vec::new();
        if let Some(hint) = self.probe_hint[bad] {
            let entry = self.entry_pool[hint].clone();
            if self.entry_works(bad, &entry)? {
                return Ok(true);
            }
            tested.push(self.entry_rows(bad, &entry));
        }
        for k in 0..self.entry_pool.len() {
            if Some(k) == self.probe_hint[bad] {
                continue;
            }
            let entry = self.entry_pool[k].clone();
            let rows = self.entry_rows(bad, &entry);
            if tested.contains(&rows) {
                continue;
            }
            if self.entry_works(bad, &entry)? {
                self.probe_hint[bad] = Some(k);
                return Ok(true);
            }
            tested.push(rows);
        }
        self.stats.branches_refuted += 1;
        Ok(false)
    }

    fn search(&mut self, depth: usize) -> Result<Option<StrongCertificate>, ResourceExceeded> {
        if depth == self.profiles.len() {
            return self.leaf();
        }
        // The truthful profile is visited first (its equilibrium label is
        // forced, so its incentive rows constrain every prefix), the rest
        // in lexicographic order.
        let target = self.order[depth];
        // Equilibrium first; the truthful profile admits nothing else. A
        // profile committed as an equilibrium that does not realize the
        // choice function is bad; descending requires at least one workable
        // elimination entry for it, so a hopeless bad equilibrium prunes
        // the subtree at this depth rather than at every leaf below it.
        self.stats.branches_explored += 1;
        self.check_limits()?;
        self.labels[target] = Some(ProfileLabel::Equilibrium);
        let all_agents: Vec<usize> = (0..self.inst.agent_count()).collect();
        if self.agents_feasible(&all_agents)?
            && (self.realizes[target] || self.some_entry_works(target)?)
        {
            if let Some(cert) = self.search(depth + 1)? {
                return Ok(Some(cert));
            }
        }
        if target != self.truthful_index {
            // Witnesses whose strict rows coincide produce identical
            // subtrees; only the first of each row class is branched.
            let profile = self.profiles[target].clone();
            let mut seen_rows: Vec<LinearConstraint> = Vec::new();
            for agent in 0..self.inst.agent_count() {
                for own_type in 0..self.inst.type_space(agent).len() {
                    let chosen = profile.bid_for(agent, own_type);
                    for deviation in 0..self.inst.type_space(agent).len() {
                        if deviation == chosen {
                            continue;
                        }
                        let local = |p: usize| p;
                        let row = witness_row(
                            self.inst,
                            self.beliefs,
                            &profile,
                            agent,
                            own_type,
                            deviation,
                            &local,
                        );
                        if seen_rows.contains(&row) {
                            continue;
                        }
                        seen_rows.push(row);
                        self.stats.branches_explored += 1;
                        self.check_limits()?;
                        self.labels[target] =
                            Some(ProfileLabel::NonEquilibrium { agent, own_type, deviation });
                        if self.agents_feasible(&[agent])? {
                            if let Some(cert) = self.search(depth + 1)? {
                                return Ok(Some(cert));
                            }
                        }
                    }
                }
            }
        }
        self.labels[target] = None;
        Ok(None)
    }

    /// All profiles are labeled; assign elimination entries to the bad
    /// equilibria. Each bad is screened independently first (its workable
    /// entries against the full labeling rows), so a dead bad is found in
    /// one pass instead of once per combination of the others' entries.
    fn leaf(&mut self) -> Result<Option<StrongCertificate>, ResourceExceeded> {
        self.stats.leaves_reached += 1;
        let bads: Vec<usize> = (0..self.profiles.len())
            .filter(|&idx| {
                self.labels[idx] == Some(ProfileLabel::Equilibrium) && !self.realizes[idx]
            })
            .collect();
        if bads.is_empty() {
            return self.assemble_certificate();
        }
        let mut options: Vec<Vec<usize>> = Vec::with_capacity(bads.len());
        for &bad in &bads {
            let mut workable = Vec::new();
            let mut tested: Vec<Vec<LinearConstraint>> = Vec::new();
            for k in 0..self.entry_pool.len() {
                let entry = self.entry_pool[k].clone();
                let rows = self.entry_rows(bad, &entry);
                if tested.contains(&rows) {
                    continue;
                }
                if self.entry_works(bad, &entry)? {
                    workable.push(k);
                }
                tested.push(rows);
            }
            if workable.is_empty() {
                self.stats.branches_refuted += 1;
                return Ok(None);
            }
            options.push(workable);
        }
        self.assign_plans(&bads, &options, 0)
    }

    fn assign_plans(
        &mut self,
        bads: &[usize],
        options: &[Vec<usize>],
        next: usize,
    ) -> Result<Option<StrongCertificate>, ResourceExceeded> {
        for &k in &options[next] {
            self.stats.branches_explored += 1;
            self.check_limits()?;
            let entry = self.entry_pool[k].clone();
            let agent = entry.agent;
            self.plans.push((bads[next], entry));
            let mut found = None;
            if self.agents_feasible(&[agent])? {
                if next + 1 == bads.len() {
                    found = self.assemble_certificate()?;
                } else {
                    found = self.assign_plans(bads, options, next + 1)?;
                }
            }
            self.plans.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    /// Solves every agent's committed system and merges the per-agent
    /// points into a certificate. Called only on fully feasible branches.
    fn assemble_certificate(&mut self) -> Result<Option<StrongCertificate>, ResourceExceeded> {
        let profile_count = self.inst.profile_count();
        let mut payments: Vec<Vec<Rat>> = Vec::with_capacity(self.inst.agent_count());
        let mut flag_values: Vec<Vec<Rat>> = vec![Vec::new(); self.plans.len()];
        let mut slacks: Vec<Rat> = Vec::new();
        for agent in 0..self.inst.agent_count() {
            let sys = self.agent_system(agent, None);
            let has_strict = sys.strict_row_count() > 0;
            if let Some(cap) = self.limits.max_seconds {
                if self.started.elapsed().as_secs() >= cap {
                    return Err(ResourceExceeded);
                }
            }
            self.stats.lp_solves += 1;
            let FeasibilityOutcome::StrictlyFeasible { point, min_strict_slack } =
                lp::solve_mixed_system(&sys)
            else {
                return Ok(None);
            };
            if has_strict {
                slacks.push(min_strict_slack);
            }
            payments.push(point[..profile_count].to_vec());
            let mut offset = profile_count;
            for (slot, (_, entry)) in self.plans.iter().enumerate() {
                if entry.agent == agent {
                    let co_len = self.inst.co_space(agent).len();
                    flag_values[slot] = point[offset..offset + co_len].to_vec();
                    offset += co_len;
                }
            }
        }
        let strict_slack = slacks.into_iter().min().unwrap_or_else(<Rat as One>::one);
        let mut elimination_payments = BTreeMap::new();
        let mut entries = BTreeMap::new();
        for (slot, (bad, entry)) in self.plans.iter().enumerate() {
            elimination_payments.insert(*bad, flag_values[slot].clone());
            entries.insert(*bad, entry.clone());
        }
        let labeling = Labeling {
            labels: self.labels.iter().map(|l| l.expect("leaf labels are total")).collect(),
        };
        Ok(Some(StrongCertificate {
            payments,
            labeling,
            plan: EliminationPlan { entries },
            elimination_payments,
            strict_slack,
        }))
    }
}

/// Decides strong implementability by deterministic exhaustive search.
///
/// Yes-verdicts carry the first certificate in the search order; no-verdicts
/// mean every branch was refuted. Either way the statistics report the work
/// done.
pub fn decide_strong(inst: &Instance, beliefs: &Beliefs, limits: &SearchLimits) -> StrongDecision {
    let dims: Vec<usize> = inst
        .type_spaces()
        .iter()
        .flat_map(|types| std::iter::repeat_n(types.len(), types.len()))
        .collect();
    if ProductSpace::count(&dims) > limits.max_profiles as u128 {
        return StrongDecision {
            outcome: StrongOutcome::ResourceExceeded,
            stats: SearchStats::default(),
        };
    }
    let space = direct_strategy_space(inst);
    let profiles: Vec<StrategyProfile> = (0..space.len())
        .map(|idx| StrategyProfile::from_index(inst, &space, idx))
        .collect();
    let realizes: Vec<bool> = profiles
        .iter()
        .map(|p| realizes_scf_direct(inst, p))
        .collect();
    let truthful_index = StrategyProfile::truthful(inst).to_index(&space);
    let mut search = Search {
        inst,
        beliefs,
        profiles,
        realizes,
        truthful_index,
        labels: vec![None; space.len()],
        order: std::iter::once(truthful_index)
            .chain((0..space.len()).filter(|&idx| idx != truthful_index))
            .collect(),
        plans: Vec::new(),
        entry_pool: plan_entry_pool(inst),
        probe_hint: vec![None; space.len()],
        limits,
        stats: SearchStats::default(),
        started: Instant::now(),
    };
    let outcome = match search.search(0) {
        Ok(Some(cert)) => StrongOutcome::Implementable(Box::new(cert)),
        Ok(None) => StrongOutcome::NotImplementable,
        Err(ResourceExceeded) => StrongOutcome::ResourceExceeded,
    };
    StrongDecision { outcome, stats: search.stats }
}
