//! Augmented revelation mechanisms built from a mechanism and one of its
//! equilibria.
//!
//! The construction gives every agent its types as bids plus the original
//! bids its equilibrium strategy never uses (tagged as flags). Type bids
//! route through the equilibrium strategy, flags through themselves; the
//! outcome function and payments are pulled back along that map. Truthful
//! reporting then replays the chosen equilibrium, and equilibria of the
//! result correspond to equilibria of the original mechanism with the same
//! outcomes and payments.

use thiserror::Error;

use crate::instance::{Beliefs, Instance};
use crate::mechanism::{is_equilibrium, Mechanism, StrategyProfile, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AugmentError {
    #[error("the given strategy profile is not an equilibrium (agent {}, type {}, better bid {})",
            .0.agent + 1, .0.own_type, .0.bid)]
    NotAnEquilibrium(Violation),
    #[error("strategy profile does not fit the mechanism")]
    InvalidStrategy,
}

/// Result of [`augment_from_mechanism`]: the augmented mechanism and the
/// per-agent map from its bids back to the original ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentationResult {
    pub mechanism: Mechanism,
    /// `bid_map[agent][augmented_bid]` = original bid index.
    pub bid_map: Vec<Vec<usize>>,
    /// Labels of the flag bids per agent (a subset of each augmented bid
    /// set, tagged `flag:<original label>`).
    pub flags: Vec<Vec<String>>,
}

/// Builds the augmented revelation mechanism from `mech` and an equilibrium
/// `profile` of it. Bid sets become the agent's types plus its unused
/// original bids; the outcome function and payments compose with the
/// routing map.
pub fn augment_from_mechanism(
    inst: &Instance,
    beliefs: &Beliefs,
    mech: &Mechanism,
    profile: &StrategyProfile,
) -> Result<AugmentationResult, AugmentError> {
    if !profile.is_valid_for(inst, mech) {
        return Err(AugmentError::InvalidStrategy);
    }
    let report = is_equilibrium(inst, beliefs, mech, profile);
    if !report.is_equilibrium {
        return Err(AugmentError::NotAnEquilibrium(
            report.violation.expect("non-equilibria carry a violation"),
        ));
    }

    let mut bid_sets = Vec::with_capacity(inst.agent_count());
    let mut bid_map = Vec::with_capacity(inst.agent_count());
    let mut flags = Vec::with_capacity(inst.agent_count());
    for agent in 0..inst.agent_count() {
        let types = inst.type_space(agent);
        let originals = &mech.bid_sets()[agent];
        let image: Vec<usize> = profile.bids[agent].clone();
        let mut labels: Vec<String> = types.to_vec();
        let mut map: Vec<usize> = (0..types.len())
            .map(|own_type| profile.bid_for(agent, own_type))
            .collect();
        let mut agent_flags = Vec::new();
        for (bid, label) in originals.iter().enumerate() {
            if !image.contains(&bid) {
                let flag = format!("flag:{label}");
                labels.push(flag.clone());
                agent_flags.push(flag);
                map.push(bid);
            }
        }
        bid_sets.push(labels);
        bid_map.push(map);
        flags.push(agent_flags);
    }

    // Pull outcomes and payments back along the routing map.
    let space = crate::index::ProductSpace::new(bid_sets.iter().map(|s| s.len()).collect());
    let mut outcome = Vec::with_capacity(space.len());
    let mut payments = Vec::with_capacity(space.len());
    for idx in 0..space.len() {
        let tuple = space.tuple_of(idx);
        let routed: Vec<usize> = tuple
            .iter()
            .enumerate()
            .map(|(agent, &bid)| bid_map[agent][bid])
            .collect();
        let original = mech.bid_space().index_of(&routed);
        outcome.push(mech.outcome_at(original));
        payments.push(
            (0..inst.agent_count())
                .map(|agent| mech.payment_at(original, agent).clone())
                .collect(),
        );
    }
    let mechanism = Mechanism::new(inst, bid_sets, outcome, payments)
        .expect("augmented tables are total by construction");
    debug_assert!(
        is_equilibrium(inst, beliefs, &mechanism, &StrategyProfile::truthful(inst)).is_equilibrium
    );
    Ok(AugmentationResult { mechanism, bid_map, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mechanism::{enumerate_equilibria, verify_strong_implementation, DEFAULT_PROFILE_BUDGET};
    use crate::rational::rat_int;

    #[test]
    fn direct_truthful_augmentation_is_identity() {
        let inst = fixtures::fixture_a();
        let beliefs = inst.conditional_beliefs();
        let mech = Mechanism::direct(&inst, &[vec![rat_int(0), rat_int(0)]]);
        let truthful = StrategyProfile::truthful(&inst);
        let result = augment_from_mechanism(&inst, &beliefs, &mech, &truthful).unwrap();
        assert_eq!(result.mechanism, mech);
        assert!(result.flags.iter().all(|f| f.is_empty()));
    }

    #[test]
    fn extra_bid_becomes_a_flag() {
        // Fixture A's direct mechanism plus a dominated bid z with a large
        // penalty; the truthful equilibrium never uses z, so it survives as
        // the only flag and the 3-bid result keeps truthful play optimal.
        let inst = fixtures::fixture_a();
        let beliefs = inst.conditional_beliefs();
        let mech = Mechanism::new(
            &inst,
            vec![vec!["t1".into(), "t2".into(), "z".into()]],
            vec![0, 1, 0],
            vec![vec![rat_int(0)], vec![rat_int(0)], vec![rat_int(-10)]],
        )
        .unwrap();
        let truthful = StrategyProfile { bids: vec![vec![0, 1]] };
        let result = augment_from_mechanism(&inst, &beliefs, &mech, &truthful).unwrap();
        assert_eq!(result.flags, vec![vec!["flag:z".to_string()]]);
        assert_eq!(result.mechanism.bid_sets()[0].len(), 3);
        assert_eq!(result.bid_map, vec![vec![0, 1, 2]]);
        // The augmentation extends the direct tables.
        assert_eq!(result.mechanism.outcome_at(0), 0);
        assert_eq!(result.mechanism.outcome_at(1), 1);
        assert_eq!(result.mechanism.outcome_at(2), 0);
        assert_eq!(result.mechanism.payment_at(2, 0), &rat_int(-10));
        // Strong implementation carries over, by brute force.
        let verdict = verify_strong_implementation(
            &inst,
            &beliefs,
            &result.mechanism,
            DEFAULT_PROFILE_BUDGET,
            1,
        )
        .unwrap();
        assert!(verdict.implements);
    }

    #[test]
    fn non_truthful_equilibrium_routes_type_bids() {
        // Swapped bid labels: s1 plays b, s2 plays a; the equilibrium maps
        // t1 to s2 and t2 to s1, realizing the choice function. After the
        // augmentation the type bids route through that map.
        let inst = fixtures::fixture_a();
        let beliefs = inst.conditional_beliefs();
        let mech = Mechanism::new(
            &inst,
            vec![vec!["s1".into(), "s2".into()]],
            vec![1, 0],
            vec![vec![rat_int(0)], vec![rat_int(0)]],
        )
        .unwrap();
        let swapped = StrategyProfile { bids: vec![vec![1, 0]] };
        let result = augment_from_mechanism(&inst, &beliefs, &mech, &swapped).unwrap();
        assert!(result.flags[0].is_empty());
        assert_eq!(result.bid_map, vec![vec![1, 0]]);
        assert_eq!(result.mechanism.outcome_at(0), 0); // bidding t1 yields a
        assert_eq!(result.mechanism.outcome_at(1), 1);
        let truthful = StrategyProfile::truthful(&inst);
        assert!(is_equilibrium(&inst, &beliefs, &result.mechanism, &truthful).is_equilibrium);
        let verdict = verify_strong_implementation(
            &inst,
            &beliefs,
            &result.mechanism,
            DEFAULT_PROFILE_BUDGET,
            1,
        )
        .unwrap();
        assert!(verdict.implements);
    }

    #[test]
    fn non_equilibrium_strategies_are_rejected() {
        let inst = fixtures::fixture_a();
        let beliefs = inst.conditional_beliefs();
        let mech = Mechanism::direct(&inst, &[vec![rat_int(0), rat_int(0)]]);
        let pooling = StrategyProfile { bids: vec![vec![0, 0]] };
        let err = augment_from_mechanism(&inst, &beliefs, &mech, &pooling).unwrap_err();
        assert!(matches!(err, AugmentError::NotAnEquilibrium(_)));
    }

    #[test]
    fn equilibria_of_the_result_map_back() {
        // Each equilibrium of the augmented mechanism, routed through the
        // bid map, is an equilibrium of the original.
        let inst = fixtures::fixture_a();
        let beliefs = inst.conditional_beliefs();
        let mech = Mechanism::new(
            &inst,
            vec![vec!["t1".into(), "t2".into(), "z".into()]],
            vec![0, 1, 0],
            vec![vec![rat_int(0)], vec![rat_int(0)], vec![rat_int(-10)]],
        )
        .unwrap();
        let truthful = StrategyProfile { bids: vec![vec![0, 1]] };
        let result = augment_from_mechanism(&inst, &beliefs, &mech, &truthful).unwrap();
        let reports = enumerate_equilibria(
            &inst,
            &beliefs,
            &result.mechanism,
            DEFAULT_PROFILE_BUDGET,
            1,
        )
        .unwrap();
        assert!(!reports.is_empty());
        for report in reports {
            let routed = StrategyProfile {
                bids: report
                    .profile
                    .bids
                    .iter()
                    .enumerate()
                    .map(|(agent, map)| map.iter().map(|&b| result.bid_map[agent][b]).collect())
                    .collect::<Vec<Vec<usize>>>(),
            };
            assert!(is_equilibrium(&inst, &beliefs, &mech, &routed).is_equilibrium);
        }
    }
}
