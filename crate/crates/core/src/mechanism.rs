//! Finite mechanisms, strategy profiles, exact interim expected utilities,
//! and brute-force equilibrium enumeration.
//!
//! Enumeration over all `∏_i |S_i|^{|Θ_i|}` strategy profiles is the
//! ground-truth oracle every solver module is checked against. Verdicts are
//! deterministic: profiles are visited in lexicographic order (agent, then
//! type, then bid index) and results are merged in that order even when the
//! range is partitioned across workers.

use num_traits::Zero;
use thiserror::Error;

use crate::index::ProductSpace;
use crate::instance::{Beliefs, Instance};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechanismError {
    #[error("enumeration budget exceeded: {profiles} strategy profiles, cap {budget}")]
    BudgetExceeded { profiles: u128, budget: u64 },
    #[error("outcome table has {got} entries, expected {expected}")]
    PartialOutcome { expected: usize, got: usize },
    #[error("payment table has {got} entries, expected {expected}")]
    PartialPayments { expected: usize, got: usize },
    #[error("bid sets given for {got} agents, expected {expected}")]
    AgentMismatch { expected: usize, got: usize },
    #[error("duplicate bid label {0:?}")]
    DuplicateBid(String),
}

/// Default cap on the number of strategy profiles enumerated.
pub const DEFAULT_PROFILE_BUDGET: u64 = 1_000_000;

/// A finite mechanism: per-agent bid sets, outcome function and payment
/// scheme, both total over the bid profile space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mechanism {
    bid_sets: Vec<Vec<String>>,
    /// Outcome index by bid-profile index.
    outcome: Vec<usize>,
    /// `payments[bid_profile][agent]`.
    payments: Vec<Vec<Rat>>,
    direct: bool,
    bid_space: ProductSpace,
    co_bid_spaces: Vec<ProductSpace>,
    /// `compose[agent][own_bid][co_bid_index]` = bid profile index.
    compose: Vec<Vec<Vec<usize>>>,
}

impl Mechanism {
    /// Builds a mechanism, checking totality of the outcome and payment
    /// tables. The direct-revelation flag is set iff the bid sets equal the
    /// instance's type spaces label for label.
    pub fn new(
        inst: &Instance,
        bid_sets: Vec<Vec<String>>,
        outcome: Vec<usize>,
        payments: Vec<Vec<Rat>>,
    ) -> Result<Self, MechanismError> {
        if bid_sets.len() != inst.agent_count() {
            return Err(MechanismError::AgentMismatch {
                expected: inst.agent_count(),
                got: bid_sets.len(),
            });
        }
        for set in &bid_sets {
            for (k, bid) in set.iter().enumerate() {
                if set[..k].contains(bid) {
                    return Err(MechanismError::DuplicateBid(bid.clone()));
                }
            }
        }
        let bid_space = ProductSpace::new(bid_sets.iter().map(|s| s.len()).collect());
        if outcome.len() != bid_space.len() {
            return Err(MechanismError::PartialOutcome {
                expected: bid_space.len(),
                got: outcome.len(),
            });
        }
        if payments.len() != bid_space.len()
            || payments.iter().any(|p| p.len() != inst.agent_count())
        {
            return Err(MechanismError::PartialPayments {
                expected: bid_space.len(),
                got: payments.len(),
            });
        }
        let direct = bid_sets
            .iter()
            .zip(inst.type_spaces())
            .all(|(bids, types)| bids == types);
        let agent_count = bid_sets.len();
        let co_bid_spaces: Vec<ProductSpace> = (0..agent_count)
            .map(|i| {
                ProductSpace::new(
                    bid_sets
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
                (0..bid_sets[i].len())
                    .map(|own| {
                        (0..co_bid_spaces[i].len())
                            .map(|co| {
                                let co_tuple = co_bid_spaces[i].tuple_of(co);
                                let mut full = Vec::with_capacity(agent_count);
                                let mut it = co_tuple.into_iter();
                                for j in 0..agent_count {
                                    full.push(if j == i { own } else { it.next().unwrap() });
                                }
                                bid_space.index_of(&full)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Mechanism {
            bid_sets,
            outcome,
            payments,
            direct,
            bid_space,
            co_bid_spaces,
            compose,
        })
    }

    /// The direct revelation mechanism for the instance's social choice
    /// function and a payment scheme `payments[agent][type_profile]`.
    pub fn direct(inst: &Instance, payments_by_agent: &[Vec<Rat>]) -> Self {
        assert_eq!(payments_by_agent.len(), inst.agent_count());
        let profile_count = inst.profile_count();
        let payments: Vec<Vec<Rat>> = (0..profile_count)
            .map(|p| {
                payments_by_agent
                    .iter()
                    .map(|per_agent| per_agent[p].clone())
                    .collect()
            })
            .collect();
        let outcome = (0..profile_count).map(|p| inst.choice(p)).collect();
        Mechanism::new(inst, inst.type_spaces().to_vec(), outcome, payments)
            .expect("direct mechanism tables are total by construction")
    }

    pub fn is_direct(&self) -> bool {
        self.direct
    }

    pub fn bid_sets(&self) -> &[Vec<String>] {
        &self.bid_sets
    }

    pub fn bid_space(&self) -> &ProductSpace {
        &self.bid_space
    }

    pub fn outcome_at(&self, bid_profile: usize) -> usize {
        self.outcome[bid_profile]
    }

    pub fn payment_at(&self, bid_profile: usize, agent: usize) -> &Rat {
        &self.payments[bid_profile][agent]
    }

    /// Bid profile index from an agent's own bid and a co-bid index.
    pub fn compose_bids(&self, agent: usize, own_bid: usize, co_index: usize) -> usize {
        self.compose[agent][own_bid][co_index]
    }

    pub fn co_bid_space(&self, agent: usize) -> &ProductSpace {
        &self.co_bid_spaces[agent]
    }

    /// Number of strategy profiles `∏_i |S_i|^{|Θ_i|}` as a `u128`.
    pub fn strategy_profile_count(&self, inst: &Instance) -> u128 {
        self.bid_sets
            .iter()
            .zip(inst.type_spaces())
            .map(|(bids, types)| (bids.len() as u128).pow(types.len() as u32))
            .product()
    }

    /// The space of strategy profiles: one coordinate per (agent, type)
    /// pair, in agent-major order, ranging over the agent's bids.
    pub fn strategy_space(&self, inst: &Instance) -> ProductSpace {
        let mut dims = Vec::new();
        for (i, types) in inst.type_spaces().iter().enumerate() {
            dims.extend(std::iter::repeat_n(self.bid_sets[i].len(), types.len()));
        }
        ProductSpace::new(dims)
    }
}

/// One strategy per agent: a total map from the agent's types to its bids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StrategyProfile {
    /// `bids[agent][type]` = bid index.
    pub bids: Vec<Vec<usize>>,
}

impl StrategyProfile {
    /// The truthful profile of a direct mechanism: every type bids itself.
    pub fn truthful(inst: &Instance) -> Self {
        StrategyProfile {
            bids: inst
                .type_spaces()
                .iter()
                .map(|types| (0..types.len()).collect())
                .collect(),
        }
    }

    pub fn bid_for(&self, agent: usize, own_type: usize) -> usize {
        self.bids[agent][own_type]
    }

    /// Decodes a dense strategy-profile index (see
    /// [`Mechanism::strategy_space`]) into per-agent maps.
    pub fn from_index(inst: &Instance, space: &ProductSpace, index: usize) -> Self {
        let flat = space.tuple_of(index);
        let mut bids = Vec::with_capacity(inst.agent_count());
        let mut offset = 0;
        for types in inst.type_spaces() {
            bids.push(flat[offset..offset + types.len()].to_vec());
            offset += types.len();
        }
        StrategyProfile { bids }
    }

    pub fn to_index(&self, space: &ProductSpace) -> usize {
        let flat: Vec<usize> = self.bids.iter().flatten().copied().collect();
        space.index_of(&flat)
    }

    /// Validity for a mechanism: one total map per agent into its bid set.
    pub fn is_valid_for(&self, inst: &Instance, mech: &Mechanism) -> bool {
        self.bids.len() == inst.agent_count()
            && self
                .bids
                .iter()
                .zip(inst.type_spaces())
                .zip(mech.bid_sets())
                .all(|((map, types), bids)| {
                    map.len() == types.len() && map.iter().all(|&b| b < bids.len())
                })
    }
}

/// A profitable deviation found while checking a profile: the lexicographic
/// first `(agent, type, bid)` whose expected utility strictly exceeds the
/// profile's.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub agent: usize,
    pub own_type: usize,
    pub bid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Equilibrium realizing the social choice function.
    Good,
    /// Equilibrium whose play disagrees with the social choice function.
    Bad,
}

/// Verdict of an equilibrium check; classification is present only for
/// direct revelation mechanisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumReport {
    pub profile: StrategyProfile,
    pub is_equilibrium: bool,
    pub violation: Option<Violation>,
    pub classification: Option<Classification>,
}

/// Interim expected utility of bidding `bid` for `agent` of type `own_type`
/// when all other agents play `co_strategies`:
/// `Σ_{θ_{-i}} q_i(θ_{-i}|θ_i) · (V_i(g(α_{-i}(θ_{-i}), s_i), θ) + P_i(α_{-i}(θ_{-i}), s_i))`.
///
/// Only the strategies of agents other than `agent` are read.
pub fn expected_utility(
    inst: &Instance,
    beliefs: &Beliefs,
    mech: &Mechanism,
    co_strategies: &StrategyProfile,
    agent: usize,
    own_type: usize,
    bid: usize,
) -> Rat {
    let co_types = inst.co_space(agent);
    let mut total = Rat::zero();
    for co in 0..co_types.len() {
        let weight = beliefs.weight(agent, own_type, co);
        if weight.is_zero() {
            continue;
        }
        let bid_profile = co_bids_at(inst, mech, co_strategies, agent, co, bid);
        let type_profile = inst.compose_profile(agent, own_type, co);
        let value = inst.valuation(agent, mech.outcome_at(bid_profile), type_profile)
            + mech.payment_at(bid_profile, agent);
        total += weight * value;
    }
    total
}

/// Bid profile resulting from the co-strategies applied at co-type-profile
/// `co` with `agent` bidding `bid`.
fn co_bids_at(
    inst: &Instance,
    mech: &Mechanism,
    strategies: &StrategyProfile,
    agent: usize,
    co: usize,
    bid: usize,
) -> usize {
    let co_types = inst.co_space(agent);
    let co_bid_space = mech.co_bid_space(agent);
    let mut co_bids = Vec::with_capacity(co_types.dims().len());
    let mut pos = 0;
    for j in 0..inst.agent_count() {
        if j == agent {
            continue;
        }
        co_bids.push(strategies.bid_for(j, co_types.coordinate(co, pos)));
        pos += 1;
    }
    mech.compose_bids(agent, bid, co_bid_space.index_of(&co_bids))
}

/// Checks a profile against every unilateral deviation. Ties never break an
/// equilibrium; the report carries the lexicographically first strict
/// violation if any exists, and the Good/Bad classification when the
/// mechanism is direct revelation.
pub fn is_equilibrium(
    inst: &Instance,
    beliefs: &Beliefs,
    mech: &Mechanism,
    profile: &StrategyProfile,
) -> EquilibriumReport {
    debug_assert!(profile.is_valid_for(inst, mech));
    for agent in 0..inst.agent_count() {
        for own_type in 0..inst.type_space(agent).len() {
            let chosen = profile.bid_for(agent, own_type);
            let current = expected_utility(inst, beliefs, mech, profile, agent, own_type, chosen);
            for bid in 0..mech.bid_sets()[agent].len() {
                if bid == chosen {
                    continue;
                }
                let alternative =
                    expected_utility(inst, beliefs, mech, profile, agent, own_type, bid);
                if alternative > current {
                    return EquilibriumReport {
                        profile: profile.clone(),
                        is_equilibrium: false,
                        violation: Some(Violation { agent, own_type, bid }),
                        classification: None,
                    };
                }
            }
        }
    }
    let classification = if mech.is_direct() {
        Some(classify_direct(inst, profile))
    } else {
        None
    };
    EquilibriumReport {
        profile: profile.clone(),
        is_equilibrium: true,
        violation: None,
        classification,
    }
}

/// Good iff `f ∘ α = f`: for every type profile, the reported profile is
/// mapped by the social choice function to the same outcome as the true one.
fn classify_direct(inst: &Instance, profile: &StrategyProfile) -> Classification {
    if realizes_scf_direct(inst, profile) {
        Classification::Good
    } else {
        Classification::Bad
    }
}

/// Whether `f ∘ α = f` holds for a profile of a direct mechanism.
pub fn realizes_scf_direct(inst: &Instance, profile: &StrategyProfile) -> bool {
    let space = inst.profile_space();
    (0..space.len()).all(|p| {
        let tuple = space.tuple_of(p);
        let reported: Vec<usize> = tuple
            .iter()
            .enumerate()
            .map(|(i, &t)| profile.bid_for(i, t))
            .collect();
        inst.choice(space.index_of(&reported)) == inst.choice(p)
    })
}

/// All equilibria of the mechanism in lexicographic profile order, each
/// classified Good/Bad when the mechanism is direct revelation.
///
/// `workers > 1` partitions the profile-index range; results are merged in
/// order, so the output is identical to a single-worker run.
pub fn enumerate_equilibria(
    inst: &Instance,
    beliefs: &Beliefs,
    mech: &Mechanism,
    budget: u64,
    workers: usize,
) -> Result<Vec<EquilibriumReport>, MechanismError> {
    let profiles = mech.strategy_profile_count(inst);
    if profiles > budget as u128 {
        return Err(MechanismError::BudgetExceeded { profiles, budget });
    }
    let space = mech.strategy_space(inst);
    let total = space.len();
    let check_range = |range: std::ops::Range<usize>| -> Vec<EquilibriumReport> {
        range
            .map(|idx| {
                let profile = StrategyProfile::from_index(inst, &space, idx);
                is_equilibrium(inst, beliefs, mech, &profile)
            })
            .filter(|report| report.is_equilibrium)
            .collect()
    };
    if workers <= 1 || total < 2 * workers {
        return Ok(check_range(0..total));
    }
    let chunk = total.div_ceil(workers);
    let results: Vec<Vec<EquilibriumReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let start = w * chunk;
                let end = ((w + 1) * chunk).min(total);
                let check = &check_range;
                scope.spawn(move || check(start..end.max(start)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    Ok(results.into_iter().flatten().collect())
}

/// Incentive compatibility: the truthful profile is an equilibrium of the
/// direct mechanism with payments `payments[agent][type_profile]`.
pub fn is_incentive_compatible(
    inst: &Instance,
    beliefs: &Beliefs,
    payments_by_agent: &[Vec<Rat>],
) -> bool {
    let mech = Mechanism::direct(inst, payments_by_agent);
    let truthful = StrategyProfile::truthful(inst);
    is_equilibrium(inst, beliefs, &mech, &truthful).is_equilibrium
}

/// Why a mechanism fails to strongly implement the social choice function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImplementationWitness {
    NoEquilibrium,
    /// An equilibrium whose play disagrees with the social choice function
    /// at the given type profile.
    DeviantEquilibrium { profile: StrategyProfile, type_profile: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplementationVerdict {
    pub implements: bool,
    pub witness: Option<ImplementationWitness>,
    pub equilibrium_count: usize,
}

/// Strong implementation check by brute force: at least one equilibrium
/// exists and every equilibrium realizes the social choice function.
pub fn verify_strong_implementation(
    inst: &Instance,
    beliefs: &Beliefs,
    mech: &Mechanism,
    budget: u64,
    workers: usize,
) -> Result<ImplementationVerdict, MechanismError> {
    let reports = enumerate_equilibria(inst, beliefs, mech, budget, workers)?;
    if reports.is_empty() {
        return Ok(ImplementationVerdict {
            implements: false,
            witness: Some(ImplementationWitness::NoEquilibrium),
            equilibrium_count: 0,
        });
    }
    let space = inst.profile_space();
    for report in &reports {
        for p in 0..space.len() {
            let tuple = space.tuple_of(p);
            let bids: Vec<usize> = tuple
                .iter()
                .enumerate()
                .map(|(i, &t)| report.profile.bid_for(i, t))
                .collect();
            let played = mech.bid_space().index_of(&bids);
            if mech.outcome_at(played) != inst.choice(p) {
                return Ok(ImplementationVerdict {
                    implements: false,
                    witness: Some(ImplementationWitness::DeviantEquilibrium {
                        profile: report.profile.clone(),
                        type_profile: p,
                    }),
                    equilibrium_count: reports.len(),
                });
            }
        }
    }
    Ok(ImplementationVerdict {
        implements: true,
        witness: None,
        equilibrium_count: reports.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{rat, rat_int};

    fn zero_payments(inst: &Instance) -> Vec<Vec<Rat>> {
        vec![vec![Rat::zero(); inst.profile_count()]; inst.agent_count()]
    }

    #[test]
    fn single_agent_utility_is_value_plus_payment() {
        let inst = fixtures::fixture_a();
        let beliefs = inst.conditional_beliefs();
        let mut payments = zero_payments(&inst);
        payments[0][1] = rat(3, 2);
        let mech = Mechanism::direct(&inst, &payments);
        let any = StrategyProfile::truthful(&inst);
        // Bid t2 as type t1: V(b, t1) + P(t2) = 0 + 3/2.
        assert_eq!(
            expected_utility(&inst, &beliefs, &mech, &any, 0, 0, 1),
            rat(3, 2)
        );
        // Bid t1 as type t1: V(a, t1) + P(t1) = 1.
        assert_eq!(
            expected_utility(&inst, &beliefs, &mech, &any, 0, 0, 0),
            rat_int(1)
        );
    }

    #[test]
    fn constant_payment_passes_through() {
        // Uniform beliefs, all-zero valuations, constant payment c: the
        // expected utility of any bid is c.
        let inst = fixtures::two_agent_uniform();
        let beliefs = inst.conditional_beliefs();
        let payments = vec![vec![rat(7, 3); 4], vec![rat(7, 3); 4]];
        let mech = Mechanism::direct(&inst, &payments);
        let profile = StrategyProfile::truthful(&inst);
        for agent in 0..2 {
            for own_type in 0..2 {
                for bid in 0..2 {
                    assert_eq!(
                        expected_utility(&inst, &beliefs, &mech, &profile, agent, own_type, bid),
                        rat(7, 3)
                    );
                }
            }
        }
    }

    #[test]
    fn utility_averages_over_co_bids() {
        // Agent 1 values outcome a at 1, b at 0 everywhere; the co-agent's
        // truthful strategy routes u1 to a and u2 to b; uniform beliefs
        // average the two branches to 1/2.
        let mut valuations = vec![vec![vec![rat_int(0); 4]; 2]; 2];
        valuations[0][0] = vec![rat_int(1); 4]; // V_1(a, ·) = 1
        let inst = fixtures::fixture_d(valuations, vec![0, 1, 0, 1]);
        let beliefs = inst.conditional_beliefs();
        let mech = Mechanism::direct(&inst, &zero_payments(&inst));
        let truthful = StrategyProfile::truthful(&inst);
        for bid in 0..2 {
            assert_eq!(
                expected_utility(&inst, &beliefs, &mech, &truthful, 0, 0, bid),
                rat(1, 2)
            );
        }
    }

    #[test]
    fn constant_mechanism_has_all_equilibria() {
        let inst = fixtures::two_agent_uniform();
        let beliefs = inst.conditional_beliefs();
        let mech = Mechanism::direct(&inst, &zero_payments(&inst));
        let reports =
            enumerate_equilibria(&inst, &beliefs, &mech, DEFAULT_PROFILE_BUDGET, 1).unwrap();
        assert_eq!(reports.len() as u128, mech.strategy_profile_count(&inst));
        assert!(reports
            .iter()
            .all(|r| r.classification == Some(Classification::Good)));
    }

    #[test]
    fn fixture_b_pooling_is_the_only_equilibrium() {
        let inst = fixtures::fixture_b();
        let beliefs = inst.conditional_beliefs();
        let mech = Mechanism::direct(&inst, &zero_payments(&inst));

        // Both types bidding t1 is an equilibrium, classified Bad.
        let pooling = StrategyProfile { bids: vec![vec![0, 0]] };
        let report = is_equilibrium(&inst, &beliefs, &mech, &pooling);
        assert!(report.is_equilibrium);
        assert_eq!(report.classification, Some(Classification::Bad));

        // Truthful reporting is not: type t2 deviates to bidding t1.
        let truthful = StrategyProfile::truthful(&inst);
        let report = is_equilibrium(&inst, &beliefs, &mech, &truthful);
        assert!(!report.is_equilibrium);
        assert_eq!(
            report.violation,
            Some(Violation { agent: 0, own_type: 1, bid: 0 })
        );

        let reports =
            enumerate_equilibria(&inst, &beliefs, &mech, DEFAULT_PROFILE_BUDGET, 1).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].profile, pooling);
    }

    #[test]
    fn fixture_a_truthful_is_the_only_equilibrium() {
        let inst = fixtures::fixture_a();
        let beliefs = inst.conditional_beliefs();
        let mech = Mechanism::direct(&inst, &zero_payments(&inst));
        let truthful = StrategyProfile::truthful(&inst);
        assert!(is_equilibrium(&inst, &beliefs, &mech, &truthful).is_equilibrium);
        let reports =
            enumerate_equilibria(&inst, &beliefs, &mech, DEFAULT_PROFILE_BUDGET, 1).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].profile, truthful);
        assert_eq!(reports[0].classification, Some(Classification::Good));
    }

    #[test]
    fn incentive_compatibility_examples() {
        let beliefs_a = fixtures::fixture_a().conditional_beliefs();
        assert!(is_incentive_compatible(
            &fixtures::fixture_a(),
            &beliefs_a,
            &zero_payments(&fixtures::fixture_a())
        ));
        let b = fixtures::fixture_b();
        let beliefs_b = b.conditional_beliefs();
        assert!(!is_incentive_compatible(&b, &beliefs_b, &zero_payments(&b)));
        // P(t1) = 0, P(t2) = 1 makes both types indifferent: 1 ≥ 1.
        assert!(is_incentive_compatible(
            &b,
            &beliefs_b,
            &[vec![rat_int(0), rat_int(1)]]
        ));
    }

    #[test]
    fn strong_implementation_verdicts() {
        let a = fixtures::fixture_a();
        let beliefs = a.conditional_beliefs();
        let mech = Mechanism::direct(&a, &zero_payments(&a));
        let verdict =
            verify_strong_implementation(&a, &beliefs, &mech, DEFAULT_PROFILE_BUDGET, 1).unwrap();
        assert!(verdict.implements);

        let b = fixtures::fixture_b();
        let beliefs = b.conditional_beliefs();
        let mech = Mechanism::direct(&b, &zero_payments(&b));
        let verdict =
            verify_strong_implementation(&b, &beliefs, &mech, DEFAULT_PROFILE_BUDGET, 1).unwrap();
        assert!(!verdict.implements);
        match verdict.witness {
            Some(ImplementationWitness::DeviantEquilibrium { profile, .. }) => {
                assert_eq!(profile.bids, vec![vec![0, 0]]);
            }
            other => panic!("expected deviant equilibrium, got {other:?}"),
        }
    }

    #[test]
    fn shifting_payments_by_a_constant_preserves_equilibria() {
        let inst = fixtures::fixture_b();
        let beliefs = inst.conditional_beliefs();
        let base = Mechanism::direct(&inst, &zero_payments(&inst));
        let shifted = Mechanism::direct(&inst, &[vec![rat(5, 7), rat(5, 7)]]);
        let a = enumerate_equilibria(&inst, &beliefs, &base, DEFAULT_PROFILE_BUDGET, 1).unwrap();
        let b = enumerate_equilibria(&inst, &beliefs, &shifted, DEFAULT_PROFILE_BUDGET, 1).unwrap();
        let profiles = |rs: &[EquilibriumReport]| -> Vec<StrategyProfile> {
            rs.iter().map(|r| r.profile.clone()).collect()
        };
        assert_eq!(profiles(&a), profiles(&b));
    }

    #[test]
    fn budget_is_enforced() {
        let inst = fixtures::two_agent_uniform();
        let beliefs = inst.conditional_beliefs();
        let mech = Mechanism::direct(&inst, &zero_payments(&inst));
        // 2^2 * 2^2 = 16 profiles; a budget of 15 must fail loudly.
        let err = enumerate_equilibria(&inst, &beliefs, &mech, 15, 1).unwrap_err();
        assert_eq!(
            err,
            MechanismError::BudgetExceeded { profiles: 16, budget: 15 }
        );
    }

    #[test]
    fn worker_partitions_agree() {
        let inst = fixtures::two_agent_uniform();
        let beliefs = inst.conditional_beliefs();
        let mech = Mechanism::direct(&inst, &zero_payments(&inst));
        let one = enumerate_equilibria(&inst, &beliefs, &mech, DEFAULT_PROFILE_BUDGET, 1).unwrap();
        let four = enumerate_equilibria(&inst, &beliefs, &mech, DEFAULT_PROFILE_BUDGET, 4).unwrap();
        assert_eq!(one, four);
    }
}
