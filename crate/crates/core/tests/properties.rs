//! Property tests for the structural invariants: payment-shift invariance
//! of equilibria, affine dependence of utilities on payment entries, and
//! enumeration soundness against the per-profile check.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scf_core::fixtures;
use scf_core::mechanism::{
    enumerate_equilibria, expected_utility, is_equilibrium, Mechanism, StrategyProfile,
    DEFAULT_PROFILE_BUDGET,
};
use scf_core::rational::{format_rat, parse_rat, rat, Rat};

fn small_rat() -> impl Strategy<Value = Rat> {
    (-12i64..=12, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_string_roundtrip(n in -1000i64..=1000, d in 1i64..=999) {
        let value = rat(n, d);
        prop_assert_eq!(parse_rat(&format_rat(&value)).unwrap(), value);
    }

    /// Adding one constant to an agent's payments at every bid profile
    /// leaves the equilibrium set unchanged.
    #[test]
    fn payment_shift_preserves_equilibria(
        base in proptest::collection::vec(small_rat(), 8),
        shift in small_rat()
    ) {
        let inst = fixtures::fixture_d(
            {
                let mut v = vec![vec![vec![Rat::from_integer(0.into()); 4]; 2]; 2];
                v[0][0] = vec![rat(1, 1), rat(1, 1), rat(0, 1), rat(0, 1)];
                v[1][1] = vec![rat(0, 1), rat(1, 1), rat(0, 1), rat(1, 1)];
                v
            },
            vec![0, 1, 1, 0],
        );
        let beliefs = inst.conditional_beliefs();
        let payments: Vec<Vec<Rat>> =
            vec![base[0..4].to_vec(), base[4..8].to_vec()];
        let mut shifted = payments.clone();
        for entry in shifted[0].iter_mut() {
            *entry += &shift;
        }
        let mech_a = Mechanism::direct(&inst, &payments);
        let mech_b = Mechanism::direct(&inst, &shifted);
        let eq_a = enumerate_equilibria(&inst, &beliefs, &mech_a, DEFAULT_PROFILE_BUDGET, 1)
            .unwrap();
        let eq_b = enumerate_equilibria(&inst, &beliefs, &mech_b, DEFAULT_PROFILE_BUDGET, 1)
            .unwrap();
        let profiles = |rs: &[scf_core::mechanism::EquilibriumReport]| -> Vec<StrategyProfile> {
            rs.iter().map(|r| r.profile.clone()).collect()
        };
        prop_assert_eq!(profiles(&eq_a), profiles(&eq_b));
    }

    /// Perturbing one payment entry changes the expected utility by exactly
    /// the belief weight times the perturbation.
    #[test]
    fn utility_is_affine_in_payments(
        base in proptest::collection::vec(small_rat(), 8),
        delta in small_rat(),
        own_type in 0usize..2,
        co_bid in 0usize..2,
        bid in 0usize..2
    ) {
        let inst = fixtures::correlated_two_agent();
        let beliefs = inst.conditional_beliefs();
        let agent = 0usize;
        let payments: Vec<Vec<Rat>> = vec![base[0..4].to_vec(), base[4..8].to_vec()];
        let truthful = StrategyProfile::truthful(&inst);
        let before = expected_utility(
            &inst, &beliefs, &Mechanism::direct(&inst, &payments),
            &truthful, agent, own_type, bid,
        );
        // The perturbed entry is the bid profile (bid, co_bid); under the
        // truthful co-strategy it is reached when the co-type equals the
        // co-bid, so the weight is q(co_bid | own_type).
        let mut perturbed = payments.clone();
        let profile_idx = inst.compose_profile(agent, bid, co_bid);
        perturbed[agent][profile_idx] += &delta;
        let after = expected_utility(
            &inst, &beliefs, &Mechanism::direct(&inst, &perturbed),
            &truthful, agent, own_type, bid,
        );
        let weight = beliefs.weight(agent, own_type, co_bid).clone();
        prop_assert_eq!(after - before, weight * delta);
    }
}

/// The enumeration returns exactly the profiles that pass the per-profile
/// check, in lexicographic order, across random instances and payments.
#[test]
fn enumeration_agrees_with_pointwise_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..40 {
        let inst = common::random_instance(&mut rng);
        let beliefs = inst.conditional_beliefs();
        let payments: Vec<Vec<Rat>> = (0..inst.agent_count())
            .map(|_| {
                (0..inst.profile_count())
                    .map(|_| {
                        use rand::Rng;
                        rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))
                    })
                    .collect()
            })
            .collect();
        let mech = Mechanism::direct(&inst, &payments);
        let reports =
            enumerate_equilibria(&inst, &beliefs, &mech, DEFAULT_PROFILE_BUDGET, 1).unwrap();
        let space = mech.strategy_space(&inst);
        let reported: Vec<usize> = reports.iter().map(|r| r.profile.to_index(&space)).collect();
        let mut expected = Vec::new();
        for idx in 0..space.len() {
            let profile = StrategyProfile::from_index(&inst, &space, idx);
            if is_equilibrium(&inst, &beliefs, &mech, &profile).is_equilibrium {
                expected.push(idx);
            }
        }
        assert_eq!(reported, expected);
        let mut sorted = reported.clone();
        sorted.sort_unstable();
        assert_eq!(reported, sorted);
    }
}
