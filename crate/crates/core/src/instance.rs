//! Problem instances: outcomes, type spaces, prior, valuations, social
//! choice function, and the conditional beliefs derived from the prior.
//!
//! Labels are strings in the external format; internally everything is
//! addressed by dense indices fixed by declaration order. Instances are
//! immutable after validation and safe to share across workers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::index::ProductSpace;
use crate::rational::{format_rat, parse_rat, Rat, RationalParseError};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("agent count must be positive")]
    InvalidAgentCount,
    #[error("prior sums to {0}, expected 1")]
    PriorNotNormalized(String),
    #[error("prior of profile {0:?} is negative")]
    NegativePrior(String),
    #[error("marginal probability of agent {agent} type {label:?} is zero")]
    ZeroMarginal { agent: usize, label: String },
    #[error("missing entry: {0}")]
    MissingEntry(String),
    #[error("unknown label: {0}")]
    UnknownLabel(String),
    #[error("duplicate label: {0}")]
    DuplicateLabel(String),
    #[error("bad rational: {0}")]
    BadRational(#[from] RationalParseError),
    #[error("malformed instance JSON: {0}")]
    Json(String),
}

/// Raw instance as it appears in the external JSON format. Profile keys are
/// type labels joined by `","` in agent order. For a single agent the prior
/// may be omitted entirely.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawInstance {
    pub agents: usize,
    pub outcomes: Vec<String>,
    pub types: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<BTreeMap<String, String>>,
    pub valuations: Vec<BTreeMap<String, BTreeMap<String, String>>>,
    pub scf: BTreeMap<String, String>,
}

/// A validated problem instance. All invariants hold: the prior sums to 1
/// exactly, every per-agent marginal is positive, and the valuation and
/// social choice maps are total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agent_count: usize,
    outcomes: Vec<String>,
    type_spaces: Vec<Vec<String>>,
    /// Prior by type-profile index.
    prior: Vec<Rat>,
    /// `valuations[agent][outcome][profile]`.
    valuations: Vec<Vec<Vec<Rat>>>,
    /// Social choice by type-profile index, as outcome indices.
    scf: Vec<usize>,
    profile_space: ProductSpace,
    co_spaces: Vec<ProductSpace>,
    /// `compose[agent][own_type][co_index]` = full profile index.
    compose: Vec<Vec<Vec<usize>>>,
}

/// Conditional beliefs: `q[agent][own_type][co_index]` is the probability
/// the agent of that type assigns to the co-profile. Rows sum to 1 exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Beliefs {
    q: Vec<Vec<Vec<Rat>>>,
}

impl Beliefs {
    pub fn weight(&self, agent: usize, own_type: usize, co_index: usize) -> &Rat {
        &self.q[agent][own_type][co_index]
    }
}

impl Instance {
    /// Validates raw parts into an instance. `prior`, `valuations` and `scf`
    /// are indexed densely; label-keyed input goes through [`Instance::from_raw`].
    pub fn from_parts(
        outcomes: Vec<String>,
        type_spaces: Vec<Vec<String>>,
        prior: Vec<Rat>,
        valuations: Vec<Vec<Vec<Rat>>>,
        scf: Vec<usize>,
    ) -> Result<Self, InstanceError> {
        let agent_count = type_spaces.len();
        if agent_count == 0 {
            return Err(InstanceError::InvalidAgentCount);
        }
        check_distinct(&outcomes)?;
        if outcomes.is_empty() {
            return Err(InstanceError::MissingEntry("outcome set is empty".into()));
        }
        for space in &type_spaces {
            if space.is_empty() {
                return Err(InstanceError::MissingEntry("empty type space".into()));
            }
            check_distinct(space)?;
        }

        let profile_space = ProductSpace::new(type_spaces.iter().map(|s| s.len()).collect());
        let profile_count = profile_space.len();
        if prior.len() != profile_count {
            return Err(InstanceError::MissingEntry(format!(
                "prior has {} entries, expected {}",
                prior.len(),
                profile_count
            )));
        }
        if scf.len() != profile_count {
            return Err(InstanceError::MissingEntry(format!(
                "scf has {} entries, expected {}",
                scf.len(),
                profile_count
            )));
        }
        if valuations.len() != agent_count {
            return Err(InstanceError::MissingEntry(format!(
                "valuations given for {} agents, expected {}",
                valuations.len(),
                agent_count
            )));
        }
        for per_agent in &valuations {
            if per_agent.len() != outcomes.len() {
                return Err(InstanceError::MissingEntry(
                    "valuation table misses an outcome".into(),
                ));
            }
            for per_outcome in per_agent {
                if per_outcome.len() != profile_count {
                    return Err(InstanceError::MissingEntry(
                        "valuation table misses a type profile".into(),
                    ));
                }
            }
        }
        for &x in &scf {
            if x >= outcomes.len() {
                return Err(InstanceError::UnknownLabel(format!(
                    "scf outcome index {x} out of range"
                )));
            }
        }

        // Prior: nonnegative entries summing exactly to 1.
        let mut total = Rat::zero();
        for (idx, p) in prior.iter().enumerate() {
            if p < &Rat::zero() {
                let labels = profile_labels(&type_spaces, &profile_space, idx);
                return Err(InstanceError::NegativePrior(labels));
            }
            total += p;
        }
        if !total.is_one() {
            return Err(InstanceError::PriorNotNormalized(format_rat(&total)));
        }

        let co_spaces: Vec<ProductSpace> = (0..agent_count)
            .map(|i| {
                ProductSpace::new(
                    type_spaces
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, s)| s.len())
                        .collect(),
                )
            })
            .collect();
        let compose: Vec<Vec<Vec<usize>>> = (0..agent_count)
            .map(|i| {
                (0..type_spaces[i].len())
                    .map(|own| {
                        (0..co_spaces[i].len())
                            .map(|co| {
                                let co_tuple = co_spaces[i].tuple_of(co);
                                let mut full = Vec::with_capacity(agent_count);
                                let mut it = co_tuple.into_iter();
                                for j in 0..agent_count {
                                    full.push(if j == i { own } else { it.next().unwrap() });
                                }
                                profile_space.index_of(&full)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let inst = Instance {
            agent_count,
            outcomes,
            type_spaces,
            prior,
            valuations,
            scf,
            profile_space,
            co_spaces,
            compose,
        };

        // Every marginal must be strictly positive.
        for i in 0..inst.agent_count {
            for own in 0..inst.type_spaces[i].len() {
                if inst.marginal(i, own).is_zero() {
                    return Err(InstanceError::ZeroMarginal {
                        agent: i,
                        label: inst.type_spaces[i][own].clone(),
                    });
                }
            }
        }
        Ok(inst)
    }

    /// Validates a raw (label-keyed) instance into the canonical form.
    pub fn from_raw(raw: &RawInstance) -> Result<Self, InstanceError> {
        if raw.agents == 0 {
            return Err(InstanceError::InvalidAgentCount);
        }
        if raw.types.len() != raw.agents {
            return Err(InstanceError::MissingEntry(format!(
                "{} type spaces given for {} agents",
                raw.types.len(),
                raw.agents
            )));
        }
        let type_spaces = raw.types.clone();
        for space in &type_spaces {
            check_distinct(space)?;
        }
        check_distinct(&raw.outcomes)?;
        let profile_space = ProductSpace::new(type_spaces.iter().map(|s| s.len()).collect());

        let profile_index = |key: &str| -> Result<usize, InstanceError> {
            let parts: Vec<&str> = key.split(',').collect();
            if parts.len() != raw.agents {
                return Err(InstanceError::UnknownLabel(format!(
                    "profile key {key:?} has {} components, expected {}",
                    parts.len(),
                    raw.agents
                )));
            }
            let mut tuple = Vec::with_capacity(raw.agents);
            for (i, part) in parts.iter().enumerate() {
                let pos = type_spaces[i]
                    .iter()
                    .position(|t| t == part)
                    .ok_or_else(|| {
                        InstanceError::UnknownLabel(format!(
                            "type {part:?} of agent {} in profile key {key:?}",
                            i + 1
                        ))
                    })?;
                tuple.push(pos);
            }
            Ok(profile_space.index_of(&tuple))
        };

        // Prior. A single-agent instance may omit it; the uniform prior is
        // then used (beliefs do not depend on it when n = 1).
        let prior = match &raw.prior {
            Some(map) => {
                let mut prior = vec![None; profile_space.len()];
                for (key, value) in map {
                    prior[profile_index(key)?] = Some(parse_rat(value)?);
                }
                prior
                    .into_iter()
                    .enumerate()
                    .map(|(idx, p)| {
                        p.ok_or_else(|| {
                            InstanceError::MissingEntry(format!(
                                "prior of profile {}",
                                profile_labels(&type_spaces, &profile_space, idx)
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
            None if raw.agents == 1 => {
                let k = profile_space.len();
                vec![Rat::new(1.into(), (k as i64).into()); k]
            }
            None => return Err(InstanceError::MissingEntry("prior".into())),
        };

        if raw.valuations.len() != raw.agents {
            return Err(InstanceError::MissingEntry(format!(
                "valuations given for {} agents, expected {}",
                raw.valuations.len(),
                raw.agents
            )));
        }
        let mut valuations = Vec::with_capacity(raw.agents);
        for (i, table) in raw.valuations.iter().enumerate() {
            for key in table.keys() {
                if !raw.outcomes.contains(key) {
                    return Err(InstanceError::UnknownLabel(format!(
                        "valuation outcome {key:?} of agent {}",
                        i + 1
                    )));
                }
            }
            let mut per_agent = Vec::with_capacity(raw.outcomes.len());
            for outcome in &raw.outcomes {
                let row = table.get(outcome).ok_or_else(|| {
                    InstanceError::MissingEntry(format!(
                        "valuation of outcome {outcome:?} for agent {}",
                        i + 1
                    ))
                })?;
                let mut per_outcome = vec![None; profile_space.len()];
                for (key, value) in row {
                    per_outcome[profile_index(key)?] = Some(parse_rat(value)?);
                }
                let per_outcome = per_outcome
                    .into_iter()
                    .enumerate()
                    .map(|(idx, v)| {
                        v.ok_or_else(|| {
                            InstanceError::MissingEntry(format!(
                                "valuation of outcome {outcome:?} at profile {} for agent {}",
                                profile_labels(&type_spaces, &profile_space, idx),
                                i + 1
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                per_agent.push(per_outcome);
            }
            valuations.push(per_agent);
        }

        let mut scf = vec![None; profile_space.len()];
        for (key, value) in &raw.scf {
            let x = raw
                .outcomes
                .iter()
                .position(|o| o == value)
                .ok_or_else(|| InstanceError::UnknownLabel(format!("scf outcome {value:?}")))?;
            scf[profile_index(key)?] = Some(x);
        }
        let scf = scf
            .into_iter()
            .enumerate()
            .map(|(idx, x)| {
                x.ok_or_else(|| {
                    InstanceError::MissingEntry(format!(
                        "scf at profile {}",
                        profile_labels(&type_spaces, &profile_space, idx)
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        Instance::from_parts(raw.outcomes.clone(), type_spaces, prior, valuations, scf)
    }

    /// Parses and validates an instance from its JSON representation.
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let raw: RawInstance =
            serde_json::from_str(text).map_err(|e| InstanceError::Json(e.to_string()))?;
        Instance::from_raw(&raw)
    }

    /// Serializes back to the raw external form. Round-trips: validating the
    /// result reproduces a structurally identical instance.
    pub fn to_raw(&self) -> RawInstance {
        let key = |idx: usize| self.profile_key(idx);
        RawInstance {
            agents: self.agent_count,
            outcomes: self.outcomes.clone(),
            types: self.type_spaces.clone(),
            prior: Some(
                (0..self.profile_space.len())
                    .map(|idx| (key(idx), format_rat(&self.prior[idx])))
                    .collect(),
            ),
            valuations: (0..self.agent_count)
                .map(|i| {
                    self.outcomes
                        .iter()
                        .enumerate()
                        .map(|(x, label)| {
                            (
                                label.clone(),
                                (0..self.profile_space.len())
                                    .map(|idx| (key(idx), format_rat(&self.valuations[i][x][idx])))
                                    .collect(),
                            )
                        })
                        .collect()
                })
                .collect(),
            scf: (0..self.profile_space.len())
                .map(|idx| (key(idx), self.outcomes[self.scf[idx]].clone()))
                .collect(),
        }
    }

    pub fn agent_count(&self) -> usize {
        self.agent_count
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn outcome_count(&self) -> usize {
        self.outcomes.len()
    }

    pub fn type_space(&self, agent: usize) -> &[String] {
        &self.type_spaces[agent]
    }

    pub fn type_spaces(&self) -> &[Vec<String>] {
        &self.type_spaces
    }

    /// The space of full type profiles, in declaration order.
    pub fn profile_space(&self) -> &ProductSpace {
        &self.profile_space
    }

    pub fn profile_count(&self) -> usize {
        self.profile_space.len()
    }

    /// The space of co-profiles of all agents except `agent`.
    pub fn co_space(&self, agent: usize) -> &ProductSpace {
        &self.co_spaces[agent]
    }

    /// Full profile index from an agent's own type and a co-profile index.
    pub fn compose_profile(&self, agent: usize, own_type: usize, co_index: usize) -> usize {
        self.compose[agent][own_type][co_index]
    }

    pub fn prior(&self, profile: usize) -> &Rat {
        &self.prior[profile]
    }

    pub fn valuation(&self, agent: usize, outcome: usize, profile: usize) -> &Rat {
        &self.valuations[agent][outcome][profile]
    }

    /// Social choice at a profile, as an outcome index.
    pub fn choice(&self, profile: usize) -> usize {
        self.scf[profile]
    }

    /// Label form of a profile index, joined by `","` in agent order.
    pub fn profile_key(&self, profile: usize) -> String {
        profile_labels(&self.type_spaces, &self.profile_space, profile)
    }

    /// Label form of a co-profile index for `agent`.
    pub fn co_profile_key(&self, agent: usize, co_index: usize) -> String {
        let tuple = self.co_spaces[agent].tuple_of(co_index);
        let mut labels = Vec::with_capacity(tuple.len());
        let mut it = tuple.into_iter();
        for (j, space) in self.type_spaces.iter().enumerate() {
            if j != agent {
                labels.push(space[it.next().unwrap()].as_str());
            }
        }
        labels.join(",")
    }

    /// Exact marginal probability of an agent's type:
    /// the prior summed over all co-profiles.
    pub fn marginal(&self, agent: usize, own_type: usize) -> Rat {
        let mut total = Rat::zero();
        for co in 0..self.co_spaces[agent].len() {
            total += &self.prior[self.compose_profile(agent, own_type, co)];
        }
        total
    }

    /// Conditional beliefs of every agent/type: prior over co-profiles
    /// divided by the (positive) marginal. Rows sum to 1 exactly.
    pub fn conditional_beliefs(&self) -> Beliefs {
        let q = (0..self.agent_count)
            .map(|i| {
                (0..self.type_spaces[i].len())
                    .map(|own| {
                        let marginal = self.marginal(i, own);
                        (0..self.co_spaces[i].len())
                            .map(|co| {
                                let joint = &self.prior[self.compose_profile(i, own, co)];
                                joint / &marginal
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Beliefs { q }
    }
}

fn check_distinct(labels: &[String]) -> Result<(), InstanceError> {
    for (k, label) in labels.iter().enumerate() {
        if labels[..k].contains(label) {
            return Err(InstanceError::DuplicateLabel(label.clone()));
        }
    }
    Ok(())
}

fn profile_labels(spaces: &[Vec<String>], profile_space: &ProductSpace, idx: usize) -> String {
    let tuple = profile_space.tuple_of(idx);
    tuple
        .iter()
        .zip(spaces)
        .map(|(&c, space)| space[c].as_str())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{rat, rat_int};

    #[test]
    fn fixture_a_validates() {
        let inst = fixtures::fixture_a();
        assert_eq!(inst.agent_count(), 1);
        assert_eq!(inst.profile_count(), 2);
        assert_eq!(inst.choice(0), 0);
        assert_eq!(inst.choice(1), 1);
    }

    #[test]
    fn unnormalized_prior_is_rejected() {
        let raw = fixtures::fixture_a().to_raw();
        let mut bad = raw.clone();
        bad.prior = Some(
            [("t1".to_string(), "1/2".to_string()), ("t2".to_string(), "1/4".to_string())]
                .into_iter()
                .collect(),
        );
        assert!(matches!(
            Instance::from_raw(&bad),
            Err(InstanceError::PriorNotNormalized(s)) if s == "3/4"
        ));
    }

    #[test]
    fn negative_prior_is_rejected() {
        let mut raw = fixtures::fixture_a().to_raw();
        raw.prior = Some(
            [("t1".to_string(), "3/2".to_string()), ("t2".to_string(), "-1/2".to_string())]
                .into_iter()
                .collect(),
        );
        assert!(matches!(
            Instance::from_raw(&raw),
            Err(InstanceError::NegativePrior(_))
        ));
    }

    #[test]
    fn zero_marginal_is_rejected() {
        // Two agents, two types each; mass only on profiles sharing agent 1's
        // type t1, so agent 1's type t2 has zero marginal.
        let outcomes = vec!["a".to_string()];
        let types = vec![
            vec!["t1".to_string(), "t2".to_string()],
            vec!["u1".to_string(), "u2".to_string()],
        ];
        let prior = vec![rat(1, 2), rat(1, 2), rat_int(0), rat_int(0)];
        let vals = vec![vec![vec![rat_int(0); 4]; 1]; 2];
        let scf = vec![0; 4];
        let err = Instance::from_parts(outcomes, types, prior, vals, scf).unwrap_err();
        assert_eq!(
            err,
            InstanceError::ZeroMarginal { agent: 0, label: "t2".to_string() }
        );
    }

    #[test]
    fn zero_prior_entries_are_allowed() {
        // Mass on the diagonal only: every marginal is 1/2, all fine.
        let outcomes = vec!["a".to_string()];
        let types = vec![
            vec!["t1".to_string(), "t2".to_string()],
            vec!["u1".to_string(), "u2".to_string()],
        ];
        let prior = vec![rat(1, 2), rat_int(0), rat_int(0), rat(1, 2)];
        let vals = vec![vec![vec![rat_int(0); 4]; 1]; 2];
        let scf = vec![0; 4];
        let inst = Instance::from_parts(outcomes, types, prior, vals, scf).unwrap();
        assert_eq!(inst.marginal(0, 0), rat(1, 2));
        assert_eq!(inst.marginal(1, 1), rat(1, 2));
    }

    #[test]
    fn marginal_examples() {
        // Uniform 2x2: every marginal is 1/2.
        let inst = fixtures::two_agent_uniform();
        for i in 0..2 {
            for t in 0..2 {
                assert_eq!(inst.marginal(i, t), rat(1, 2));
            }
        }
        // Single agent: the marginal is the prior itself.
        let a = fixtures::fixture_a();
        assert_eq!(a.marginal(0, 0), rat(1, 2));

        // p = {(t1,u1):1/2, (t1,u2):1/4, (t2,u1):1/4}: marginal of t1 is 3/4.
        let inst = fixtures::correlated_two_agent();
        assert_eq!(inst.marginal(0, 0), rat(3, 4));
    }

    #[test]
    fn belief_examples() {
        // Uniform prior: uniform belief rows.
        let inst = fixtures::two_agent_uniform();
        let beliefs = inst.conditional_beliefs();
        for i in 0..2 {
            for t in 0..2 {
                for co in 0..2 {
                    assert_eq!(beliefs.weight(i, t, co), &rat(1, 2));
                }
            }
        }
        // Single agent: probability 1 on the single empty co-profile.
        let a = fixtures::fixture_a();
        let b = a.conditional_beliefs();
        assert_eq!(b.weight(0, 0, 0), &rat_int(1));
        assert_eq!(b.weight(0, 1, 0), &rat_int(1));

        // Correlated: q_1(u1|t1) = (1/2)/(3/4) = 2/3, q_1(u2|t1) = 1/3.
        let inst = fixtures::correlated_two_agent();
        let b = inst.conditional_beliefs();
        assert_eq!(b.weight(0, 0, 0), &rat(2, 3));
        assert_eq!(b.weight(0, 0, 1), &rat(1, 3));
    }

    #[test]
    fn beliefs_rows_sum_to_one_and_factor_the_prior() {
        let inst = fixtures::correlated_two_agent();
        let beliefs = inst.conditional_beliefs();
        for i in 0..inst.agent_count() {
            for own in 0..inst.type_space(i).len() {
                let mut sum = Rat::zero();
                for co in 0..inst.co_space(i).len() {
                    let q = beliefs.weight(i, own, co);
                    // q * marginal = joint prior, exactly.
                    assert_eq!(
                        q * inst.marginal(i, own),
                        inst.prior(inst.compose_profile(i, own, co)).clone()
                    );
                    sum += q;
                }
                assert!(sum.is_one());
            }
        }
    }

    #[test]
    fn json_roundtrip_is_identity() {
        for inst in [
            fixtures::fixture_a(),
            fixtures::fixture_b(),
            fixtures::fixture_c(),
            fixtures::correlated_two_agent(),
        ] {
            let text = serde_json::to_string(&inst.to_raw()).unwrap();
            let back = Instance::from_json(&text).unwrap();
            assert_eq!(inst, back);
        }
    }

    #[test]
    fn single_agent_prior_may_be_omitted() {
        let text = r#"{
            "agents": 1, "outcomes": ["a","b"], "types": [["t1","t2"]],
            "valuations": [ { "a": {"t1": "1", "t2": "0"}, "b": {"t1": "0", "t2": "1"} } ],
            "scf": { "t1": "a", "t2": "b" } }"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.prior(0), &rat(1, 2));
        assert_eq!(inst, fixtures::fixture_a());
    }

    #[test]
    fn missing_and_unknown_labels_are_rejected() {
        let missing_scf = r#"{
            "agents": 1, "outcomes": ["a","b"], "types": [["t1","t2"]],
            "valuations": [ { "a": {"t1": "1", "t2": "0"}, "b": {"t1": "0", "t2": "1"} } ],
            "scf": { "t1": "a" } }"#;
        assert!(matches!(
            Instance::from_json(missing_scf),
            Err(InstanceError::MissingEntry(_))
        ));

        let unknown_outcome = r#"{
            "agents": 1, "outcomes": ["a","b"], "types": [["t1","t2"]],
            "valuations": [ { "a": {"t1": "1", "t2": "0"}, "b": {"t1": "0", "t2": "1"} } ],
            "scf": { "t1": "a", "t2": "c" } }"#;
        assert!(matches!(
            Instance::from_json(unknown_outcome),
            Err(InstanceError::UnknownLabel(_))
        ));
    }
}
