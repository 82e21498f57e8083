//! JSON forms of mechanisms, strategy profiles, payment schemes and strong
//! certificates, all tied to a validated instance for label resolution.
//!
//! Rationals are exact strings throughout (`"p"` or `"p/q"`). Profile keys
//! join labels with `","` in agent order; the empty co-profile of a single
//! agent uses the empty key. Agents are numbered from 1 in external JSON.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::instance::Instance;
use crate::mechanism::{Mechanism, MechanismError, StrategyProfile};
use crate::rational::{format_rat, parse_rat, Rat, RationalParseError};
use crate::strong_general::{
    EliminationPlan, Labeling, LabelingError, PlanEntry, ProfileLabel, StrongCertificate,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonIoError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("unknown label: {0}")]
    UnknownLabel(String),
    #[error("missing entry: {0}")]
    MissingEntry(String),
    #[error("bad rational: {0}")]
    BadRational(#[from] RationalParseError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Labeling(#[from] LabelingError),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
}

/// Raw mechanism file. A payments-only file denotes the direct revelation
/// mechanism: bid sets are the type spaces and the outcome function is the
/// social choice function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawMechanism {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bids: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<BTreeMap<String, String>>,
    pub payments: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flags: Option<Vec<Vec<String>>>,
    #[serde(rename = "bidMap", default, skip_serializing_if = "Option::is_none")]
    pub bid_map: Option<Vec<BTreeMap<String, String>>>,
}

fn bid_profile_index(
    inst: &Instance,
    bid_sets: &[Vec<String>],
    space: &crate::index::ProductSpace,
    key: &str,
) -> Result<usize, JsonIoError> {
    let parts: Vec<&str> = if inst.agent_count() == 1 && key.is_empty() {
        vec![""]
    } else {
        key.split(',').collect()
    };
    if parts.len() != inst.agent_count() {
        return Err(JsonIoError::UnknownLabel(format!(
            "profile key {key:?} has {} components, expected {}",
            parts.len(),
            inst.agent_count()
        )));
    }
    let mut tuple = Vec::with_capacity(parts.len());
    for (agent, part) in parts.iter().enumerate() {
        let pos = bid_sets[agent]
            .iter()
            .position(|b| b == part)
            .ok_or_else(|| {
                JsonIoError::UnknownLabel(format!("bid {part:?} of agent {}", agent + 1))
            })?;
        tuple.push(pos);
    }
    Ok(space.index_of(&tuple))
}

/// Parses a mechanism file against an instance.
pub fn parse_mechanism(inst: &Instance, text: &str) -> Result<Mechanism, JsonIoError> {
    let raw: RawMechanism =
        serde_json::from_str(text).map_err(|e| JsonIoError::Json(e.to_string()))?;
    mechanism_from_raw(inst, &raw)
}

pub fn mechanism_from_raw(inst: &Instance, raw: &RawMechanism) -> Result<Mechanism, JsonIoError> {
    let bid_sets: Vec<Vec<String>> = match &raw.bids {
        Some(bids) => bids.clone(),
        None => inst.type_spaces().to_vec(),
    };
    let space = crate::index::ProductSpace::new(bid_sets.iter().map(|s| s.len()).collect());

    let outcome: Vec<usize> = match &raw.outcome {
        Some(map) => {
            let mut outcome = vec![None; space.len()];
            for (key, label) in map {
                let x = inst
                    .outcomes()
                    .iter()
                    .position(|o| o == label)
                    .ok_or_else(|| JsonIoError::UnknownLabel(format!("outcome {label:?}")))?;
                outcome[bid_profile_index(inst, &bid_sets, &space, key)?] = Some(x);
            }
            outcome
                .into_iter()
                .enumerate()
                .map(|(idx, x)| {
                    x.ok_or_else(|| JsonIoError::MissingEntry(format!("outcome of profile {idx}")))
                })
                .collect::<Result<_, _>>()?
        }
        None => {
            if raw.bids.is_some() {
                return Err(JsonIoError::MissingEntry(
                    "outcome table (required unless the mechanism is payments-only)".into(),
                ));
            }
            (0..inst.profile_count()).map(|p| inst.choice(p)).collect()
        }
    };

    let mut payments = vec![None; space.len()];
    for (key, values) in &raw.payments {
        if values.len() != inst.agent_count() {
            return Err(JsonIoError::MissingEntry(format!(
                "payment vector of profile {key:?} has {} entries, expected {}",
                values.len(),
                inst.agent_count()
            )));
        }
        let parsed: Vec<Rat> = values
            .iter()
            .map(|v| parse_rat(v))
            .collect::<Result<_, _>>()?;
        payments[bid_profile_index(inst, &bid_sets, &space, key)?] = Some(parsed);
    }
    let payments: Vec<Vec<Rat>> = payments
        .into_iter()
        .enumerate()
        .map(|(idx, p)| {
            p.ok_or_else(|| JsonIoError::MissingEntry(format!("payments of profile {idx}")))
        })
        .collect::<Result<_, _>>()?;

    Ok(Mechanism::new(inst, bid_sets, outcome, payments)?)
}

/// Direct payment scheme `payments[agent][type_profile]` from a
/// payments-only mechanism file.
pub fn parse_direct_payments(inst: &Instance, text: &str) -> Result<Vec<Vec<Rat>>, JsonIoError> {
    let mech = parse_mechanism(inst, text)?;
    if !mech.is_direct() {
        return Err(JsonIoError::InvalidCertificate(
            "expected a direct (payments-only) mechanism".into(),
        ));
    }
    Ok((0..inst.agent_count())
        .map(|agent| {
            (0..inst.profile_count())
                .map(|p| mech.payment_at(p, agent).clone())
                .collect()
        })
        .collect())
}

fn bid_profile_key(bid_sets: &[Vec<String>], space: &crate::index::ProductSpace, idx: usize) -> String {
    space
        .tuple_of(idx)
        .iter()
        .zip(bid_sets)
        .map(|(&b, set)| set[b].as_str())
        .collect::<Vec<_>>()
        .join(",")
}

/// Flag labels and bid-routing map of an augmentation, attached to the
/// mechanism JSON when serializing augmentation results.
pub type FlagAnnotations<'a> = (&'a [Vec<String>], &'a [Vec<usize>]);

/// Mechanism as a JSON value, optionally annotated with flag labels and a
/// bid-routing map (used for augmentation results).
pub fn mechanism_to_value(
    inst: &Instance,
    mech: &Mechanism,
    annotations: Option<FlagAnnotations<'_>>,
) -> Value {
    let space = mech.bid_space();
    let bid_sets = mech.bid_sets();
    let outcome: BTreeMap<String, String> = (0..space.len())
        .map(|idx| {
            (
                bid_profile_key(bid_sets, space, idx),
                inst.outcomes()[mech.outcome_at(idx)].clone(),
            )
        })
        .collect();
    let payments: BTreeMap<String, Vec<String>> = (0..space.len())
        .map(|idx| {
            (
                bid_profile_key(bid_sets, space, idx),
                (0..inst.agent_count())
                    .map(|agent| format_rat(mech.payment_at(idx, agent)))
                    .collect(),
            )
        })
        .collect();
    let mut value = json!({
        "bids": bid_sets,
        "outcome": outcome,
        "payments": payments,
    });
    if let Some((flags, bid_map)) = annotations {
        value["flags"] = json!(flags);
        let map: Vec<BTreeMap<String, String>> = bid_map
            .iter()
            .enumerate()
            .map(|(agent, routing)| {
                routing
                    .iter()
                    .enumerate()
                    .map(|(aug, &orig)| {
                        (
                            mech.bid_sets()[agent][aug].clone(),
                            // Flags route to original bids whose labels are
                            // recoverable by stripping the tag.
                            mech.bid_sets()[agent][aug]
                                .strip_prefix("flag:")
                                .map(|s| s.to_string())
                                .unwrap_or_else(|| mech.bid_sets()[agent][orig].clone()),
                        )
                    })
                    .collect()
            })
            .collect();
        value["bidMap"] = json!(map);
    }
    value
}

/// Strategy profile as per-agent maps from type label to bid label.
pub fn strategy_to_value(inst: &Instance, mech: &Mechanism, profile: &StrategyProfile) -> Value {
    let maps: Vec<BTreeMap<String, String>> = (0..inst.agent_count())
        .map(|agent| {
            inst.type_space(agent)
                .iter()
                .enumerate()
                .map(|(t, label)| {
                    (
                        label.clone(),
                        mech.bid_sets()[agent][profile.bid_for(agent, t)].clone(),
                    )
                })
                .collect()
        })
        .collect();
    json!(maps)
}

/// Parses a strategy profile (array of per-agent type→bid maps).
pub fn parse_strategy(
    inst: &Instance,
    mech: &Mechanism,
    value: &Value,
) -> Result<StrategyProfile, JsonIoError> {
    let maps: Vec<BTreeMap<String, String>> =
        serde_json::from_value(value.clone()).map_err(|e| JsonIoError::Json(e.to_string()))?;
    if maps.len() != inst.agent_count() {
        return Err(JsonIoError::MissingEntry(format!(
            "strategy given for {} agents, expected {}",
            maps.len(),
            inst.agent_count()
        )));
    }
    let mut bids = Vec::with_capacity(maps.len());
    for (agent, map) in maps.iter().enumerate() {
        let mut per_agent = Vec::with_capacity(inst.type_space(agent).len());
        for label in inst.type_space(agent) {
            let bid_label = map.get(label).ok_or_else(|| {
                JsonIoError::MissingEntry(format!("bid of agent {} type {label:?}", agent + 1))
            })?;
            let bid = mech.bid_sets()[agent]
                .iter()
                .position(|b| b == bid_label)
                .ok_or_else(|| {
                    JsonIoError::UnknownLabel(format!(
                        "bid {bid_label:?} of agent {}",
                        agent + 1
                    ))
                })?;
            per_agent.push(bid);
        }
        bids.push(per_agent);
    }
    Ok(StrategyProfile { bids })
}

/// Payments of a direct scheme as JSON: a flat profile→rational map for a
/// single agent, an array of per-agent maps otherwise.
pub fn payments_to_value(inst: &Instance, payments: &[Vec<Rat>]) -> Value {
    let per_agent: Vec<BTreeMap<String, String>> = payments
        .iter()
        .map(|scheme| {
            (0..inst.profile_count())
                .map(|p| (inst.profile_key(p), format_rat(&scheme[p])))
                .collect()
        })
        .collect();
    if inst.agent_count() == 1 {
        json!(per_agent[0])
    } else {
        json!(per_agent)
    }
}

fn payments_from_value(inst: &Instance, value: &Value) -> Result<Vec<Vec<Rat>>, JsonIoError> {
    let per_agent: Vec<BTreeMap<String, String>> = if inst.agent_count() == 1 {
        vec![serde_json::from_value(value.clone())
            .map_err(|e| JsonIoError::Json(e.to_string()))?]
    } else {
        serde_json::from_value(value.clone()).map_err(|e| JsonIoError::Json(e.to_string()))?
    };
    if per_agent.len() != inst.agent_count() {
        return Err(JsonIoError::MissingEntry(format!(
            "payments for {} agents, expected {}",
            per_agent.len(),
            inst.agent_count()
        )));
    }
    let mut payments = Vec::with_capacity(per_agent.len());
    for map in &per_agent {
        let mut scheme = vec![None; inst.profile_count()];
        for (key, value) in map {
            let idx = profile_index_from_key(inst, key)?;
            scheme[idx] = Some(parse_rat(value)?);
        }
        payments.push(
            scheme
                .into_iter()
                .enumerate()
                .map(|(idx, p)| {
                    p.ok_or_else(|| {
                        JsonIoError::MissingEntry(format!(
                            "payment of profile {}",
                            inst.profile_key(idx)
                        ))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(payments)
}

fn profile_index_from_key(inst: &Instance, key: &str) -> Result<usize, JsonIoError> {
    let parts: Vec<&str> = key.split(',').collect();
    if parts.len() != inst.agent_count() {
        return Err(JsonIoError::UnknownLabel(format!(
            "profile key {key:?} has {} components, expected {}",
            parts.len(),
            inst.agent_count()
        )));
    }
    let mut tuple = Vec::with_capacity(parts.len());
    for (agent, part) in parts.iter().enumerate() {
        let pos = inst
            .type_space(agent)
            .iter()
            .position(|t| t == part)
            .ok_or_else(|| {
                JsonIoError::UnknownLabel(format!("type {part:?} of agent {}", agent + 1))
            })?;
        tuple.push(pos);
    }
    Ok(inst.profile_space().index_of(&tuple))
}

fn co_profile_index_from_key(
    inst: &Instance,
    agent: usize,
    key: &str,
) -> Result<usize, JsonIoError> {
    let co_space = inst.co_space(agent);
    let others: Vec<usize> = (0..inst.agent_count()).filter(|&j| j != agent).collect();
    let parts: Vec<&str> = if others.is_empty() {
        if !key.is_empty() {
            return Err(JsonIoError::UnknownLabel(format!(
                "co-profile key {key:?} for a single agent must be empty"
            )));
        }
        Vec::new()
    } else {
        key.split(',').collect()
    };
    if parts.len() != others.len() {
        return Err(JsonIoError::UnknownLabel(format!(
            "co-profile key {key:?} has {} components, expected {}",
            parts.len(),
            others.len()
        )));
    }
    let mut tuple = Vec::with_capacity(parts.len());
    for (&j, part) in others.iter().zip(&parts) {
        let pos = inst
            .type_space(j)
            .iter()
            .position(|t| t == part)
            .ok_or_else(|| {
                JsonIoError::UnknownLabel(format!("type {part:?} of agent {}", j + 1))
            })?;
        tuple.push(pos);
    }
    Ok(co_space.index_of(&tuple))
}

/// Certificate as JSON, matching the schema consumed by `verify-certificate`.
pub fn certificate_to_value(inst: &Instance, cert: &StrongCertificate) -> Value {
    let mech = Mechanism::direct(inst, &cert.payments);
    let space = crate::strong_general::direct_strategy_space(inst);
    let labeling: Vec<Value> = cert
        .labeling
        .labels()
        .iter()
        .enumerate()
        .map(|(idx, label)| {
            let profile = StrategyProfile::from_index(inst, &space, idx);
            let strategy = strategy_to_value(inst, &mech, &profile);
            match label {
                ProfileLabel::Equilibrium => {
                    let classification =
                        if crate::mechanism::realizes_scf_direct(inst, &profile) {
                            "good"
                        } else {
                            "bad"
                        };
                    json!({
                        "strategy": strategy,
                        "status": "equilibrium",
                        "classification": classification,
                    })
                }
                ProfileLabel::NonEquilibrium { agent, own_type, deviation } => json!({
                    "strategy": strategy,
                    "status": "nonEquilibrium",
                    "witness": {
                        "agent": agent + 1,
                        "type": inst.type_space(*agent)[*own_type].clone(),
                        "bid": inst.type_space(*agent)[*deviation].clone(),
                    },
                }),
            }
        })
        .collect();
    let plan: Vec<Value> = cert
        .plan
        .entries
        .iter()
        .map(|(&bad, entry)| {
            let outcomes: BTreeMap<String, String> = (0..inst.co_space(entry.agent).len())
                .map(|co| {
                    (
                        inst.co_profile_key(entry.agent, co),
                        inst.outcomes()[entry.outcome_map[co]].clone(),
                    )
                })
                .collect();
            json!({
                "profile": bad,
                "agent": entry.agent + 1,
                "threatType": inst.type_space(entry.agent)[entry.threat_type].clone(),
                "outcomes": outcomes,
            })
        })
        .collect();
    let elimination_payments: Vec<Value> = cert
        .plan
        .entries
        .iter()
        .map(|(&bad, entry)| {
            let values: BTreeMap<String, String> = (0..inst.co_space(entry.agent).len())
                .map(|co| {
                    (
                        inst.co_profile_key(entry.agent, co),
                        format_rat(&cert.elimination_payments[&bad][co]),
                    )
                })
                .collect();
            json!(values)
        })
        .collect();
    json!({
        "payments": payments_to_value(inst, &cert.payments),
        "labeling": labeling,
        "eliminationPlan": plan,
        "eliminationPayments": elimination_payments,
        "strictSlack": format_rat(&cert.strict_slack),
    })
}

/// Parses a certificate produced by [`certificate_to_value`].
pub fn parse_certificate(inst: &Instance, text: &str) -> Result<StrongCertificate, JsonIoError> {
    let value: Value = serde_json::from_str(text).map_err(|e| JsonIoError::Json(e.to_string()))?;
    let payments = payments_from_value(
        inst,
        value
            .get("payments")
            .ok_or_else(|| JsonIoError::MissingEntry("payments".into()))?,
    )?;

    let mech = Mechanism::direct(inst, &payments);
    let space = crate::strong_general::direct_strategy_space(inst);
    let entries = value
        .get("labeling")
        .and_then(Value::as_array)
        .ok_or_else(|| JsonIoError::MissingEntry("labeling".into()))?;
    if entries.len() != space.len() {
        return Err(JsonIoError::InvalidCertificate(format!(
            "labeling covers {} profiles, expected {}",
            entries.len(),
            space.len()
        )));
    }
    let mut labels = vec![None; space.len()];
    for entry in entries {
        let strategy = entry
            .get("strategy")
            .ok_or_else(|| JsonIoError::MissingEntry("labeling strategy".into()))?;
        let profile = parse_strategy(inst, &mech, strategy)?;
        let idx = profile.to_index(&space);
        let status = entry.get("status").and_then(Value::as_str).unwrap_or("");
        let label = match status {
            "equilibrium" => ProfileLabel::Equilibrium,
            "nonEquilibrium" => {
                let witness = entry
                    .get("witness")
                    .ok_or_else(|| JsonIoError::MissingEntry("witness".into()))?;
                let agent = witness
                    .get("agent")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| JsonIoError::MissingEntry("witness agent".into()))?
                    as usize;
                if agent == 0 || agent > inst.agent_count() {
                    return Err(JsonIoError::UnknownLabel(format!("agent {agent}")));
                }
                let agent = agent - 1;
                let type_label = witness
                    .get("type")
                    .and_then(Value::as_str)
                    .ok_or_else(|| JsonIoError::MissingEntry("witness type".into()))?;
                let bid_label = witness
                    .get("bid")
                    .and_then(Value::as_str)
                    .ok_or_else(|| JsonIoError::MissingEntry("witness bid".into()))?;
                let own_type = inst
                    .type_space(agent)
                    .iter()
                    .position(|t| t == type_label)
                    .ok_or_else(|| JsonIoError::UnknownLabel(type_label.to_string()))?;
                let deviation = inst
                    .type_space(agent)
                    .iter()
                    .position(|t| t == bid_label)
                    .ok_or_else(|| JsonIoError::UnknownLabel(bid_label.to_string()))?;
                ProfileLabel::NonEquilibrium { agent, own_type, deviation }
            }
            other => {
                return Err(JsonIoError::InvalidCertificate(format!(
                    "unknown labeling status {other:?}"
                )))
            }
        };
        if labels[idx].replace(label).is_some() {
            return Err(JsonIoError::InvalidCertificate(format!(
                "duplicate labeling entry for profile {idx}"
            )));
        }
    }
    let labels: Vec<ProfileLabel> = labels
        .into_iter()
        .enumerate()
        .map(|(idx, l)| {
            l.ok_or_else(|| {
                JsonIoError::InvalidCertificate(format!("profile {idx} is unlabeled"))
            })
        })
        .collect::<Result<_, _>>()?;
    let labeling = Labeling::new(inst, labels)?;

    let plan_entries = value
        .get("eliminationPlan")
        .and_then(Value::as_array)
        .cloned()
        .unwrap_or_default();
    let payment_entries = value
        .get("eliminationPayments")
        .and_then(Value::as_array)
        .cloned()
        .unwrap_or_default();
    if plan_entries.len() != payment_entries.len() {
        return Err(JsonIoError::InvalidCertificate(
            "eliminationPlan and eliminationPayments disagree in length".into(),
        ));
    }
    let mut plan = EliminationPlan::default();
    let mut elimination_payments = BTreeMap::new();
    for (entry, pay) in plan_entries.iter().zip(&payment_entries) {
        let bad = entry
            .get("profile")
            .and_then(Value::as_u64)
            .ok_or_else(|| JsonIoError::MissingEntry("plan profile".into()))?
            as usize;
        let agent = entry
            .get("agent")
            .and_then(Value::as_u64)
            .ok_or_else(|| JsonIoError::MissingEntry("plan agent".into()))? as usize;
        if agent == 0 || agent > inst.agent_count() {
            return Err(JsonIoError::UnknownLabel(format!("agent {agent}")));
        }
        let agent = agent - 1;
        let threat_label = entry
            .get("threatType")
            .and_then(Value::as_str)
            .ok_or_else(|| JsonIoError::MissingEntry("plan threatType".into()))?;
        let threat_type = inst
            .type_space(agent)
            .iter()
            .position(|t| t == threat_label)
            .ok_or_else(|| JsonIoError::UnknownLabel(threat_label.to_string()))?;
        let outcomes: BTreeMap<String, String> =
            serde_json::from_value(entry.get("outcomes").cloned().unwrap_or_default())
                .map_err(|e| JsonIoError::Json(e.to_string()))?;
        let co_len = inst.co_space(agent).len();
        let mut outcome_map = vec![None; co_len];
        for (key, label) in &outcomes {
            let co = co_profile_index_from_key(inst, agent, key)?;
            let x = inst
                .outcomes()
                .iter()
                .position(|o| o == label)
                .ok_or_else(|| JsonIoError::UnknownLabel(label.clone()))?;
            outcome_map[co] = Some(x);
        }
        let outcome_map: Vec<usize> = outcome_map
            .into_iter()
            .map(|x| x.ok_or_else(|| JsonIoError::MissingEntry("plan outcome".into())))
            .collect::<Result<_, _>>()?;

        let values: BTreeMap<String, String> = serde_json::from_value(pay.clone())
            .map_err(|e| JsonIoError::Json(e.to_string()))?;
        let mut flag_payments = vec![None; co_len];
        for (key, v) in &values {
            let co = co_profile_index_from_key(inst, agent, key)?;
            flag_payments[co] = Some(parse_rat(v)?);
        }
        let flag_payments: Vec<Rat> = flag_payments
            .into_iter()
            .map(|x| x.ok_or_else(|| JsonIoError::MissingEntry("elimination payment".into())))
            .collect::<Result<_, _>>()?;

        plan.entries.insert(bad, PlanEntry { agent, threat_type, outcome_map });
        elimination_payments.insert(bad, flag_payments);
    }

    let strict_slack = parse_rat(
        value
            .get("strictSlack")
            .and_then(Value::as_str)
            .ok_or_else(|| JsonIoError::MissingEntry("strictSlack".into()))?,
    )?;

    Ok(StrongCertificate { payments, labeling, plan, elimination_payments, strict_slack })
}
