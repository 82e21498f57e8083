//! Shared test support: seeded random instance generation.
#![allow(dead_code)] // each test binary uses a different subset

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use scf_core::instance::Instance;
use scf_core::rational::{rat_int, Rat};

/// A random instance with n ∈ {1,2} agents, at most two types per agent, at
/// most three outcomes, integer valuations in [−2,2] and a random rational
/// prior with positive marginals.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n: usize = rng.gen_range(1..=2);
    random_instance_shaped(rng, n, 2, 3)
}

/// Random instance with the given agent count, maximum types per agent and
/// maximum outcome count.
pub fn random_instance_shaped(
    rng: &mut ChaCha8Rng,
    agents: usize,
    max_types: usize,
    max_outcomes: usize,
) -> Instance {
    let type_counts: Vec<usize> = (0..agents).map(|_| rng.gen_range(1..=max_types)).collect();
    let outcome_count: usize = rng.gen_range(1..=max_outcomes);
    random_instance_exact(rng, &type_counts, outcome_count)
}

/// Random instance with exactly the given per-agent type counts and outcome
/// count.
pub fn random_instance_exact(
    rng: &mut ChaCha8Rng,
    type_counts: &[usize],
    outcome_count: usize,
) -> Instance {
    let agents = type_counts.len();
    let type_counts = type_counts.to_vec();
    let profile_count: usize = type_counts.iter().product();

    let outcomes: Vec<String> = (0..outcome_count).map(|x| format!("x{x}")).collect();
    let type_spaces: Vec<Vec<String>> = type_counts
        .iter()
        .enumerate()
        .map(|(i, &k)| (0..k).map(|t| format!("a{i}t{t}")).collect())
        .collect();

    let prior = random_prior(rng, &type_counts);
    let valuations: Vec<Vec<Vec<Rat>>> = (0..agents)
        .map(|_| {
            (0..outcome_count)
                .map(|_| {
                    (0..profile_count)
                        .map(|_| rat_int(rng.gen_range(-2..=2)))
                        .collect()
                })
                .collect()
        })
        .collect();
    let scf: Vec<usize> = (0..profile_count)
        .map(|_| rng.gen_range(0..outcome_count))
        .collect();

    Instance::from_parts(outcomes, type_spaces, prior, valuations, scf)
        .expect("generated instances are well-formed")
}

/// Random rational prior over the profile space with every per-agent
/// marginal strictly positive; individual profiles may carry zero mass.
pub fn random_prior(rng: &mut ChaCha8Rng, type_counts: &[usize]) -> Vec<Rat> {
    let profile_count: usize = type_counts.iter().product();
    loop {
        let weights: Vec<i64> = (0..profile_count).map(|_| rng.gen_range(0..=8)).collect();
        let total: i64 = weights.iter().sum();
        if total == 0 {
            continue;
        }
        let prior: Vec<Rat> = weights
            .iter()
            .map(|&w| Rat::new(w.into(), total.into()))
            .collect();
        if marginals_positive(&prior, type_counts) {
            return prior;
        }
    }
}

/// Random product prior: per-agent positive marginals, multiplied.
pub fn random_product_prior(rng: &mut ChaCha8Rng, type_counts: &[usize]) -> Vec<Rat> {
    let marginals: Vec<Vec<Rat>> = type_counts
        .iter()
        .map(|&k| {
            let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=6)).collect();
            let total: i64 = weights.iter().sum();
            weights
                .iter()
                .map(|&w| Rat::new(w.into(), total.into()))
                .collect()
        })
        .collect();
    let mut prior = Vec::new();
    let mut tuple = vec![0usize; type_counts.len()];
    loop {
        prior.push(
            tuple
                .iter()
                .zip(&marginals)
                .map(|(&t, m)| m[t].clone())
                .product(),
        );
        // Mixed-radix increment, last coordinate fastest.
        let mut pos = type_counts.len();
        loop {
            if pos == 0 {
                return prior;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < type_counts[pos] {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

fn marginals_positive(prior: &[Rat], type_counts: &[usize]) -> bool {
    use num_traits::Zero;
    let mut strides = vec![1usize; type_counts.len()];
    for k in (0..type_counts.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * type_counts[k + 1];
    }
    for (agent, &k) in type_counts.iter().enumerate() {
        for t in 0..k {
            let mut marginal = Rat::zero();
            for (idx, p) in prior.iter().enumerate() {
                if (idx / strides[agent]) % k == t {
                    marginal += p;
                }
            }
            if marginal.is_zero() {
                return false;
            }
        }
    }
    true
}

/// Random product-prior instance (used by the weak cross-check suite).
pub fn random_product_instance(rng: &mut ChaCha8Rng) -> Instance {
    let agents: usize = rng.gen_range(1..=2);
    let type_counts: Vec<usize> = (0..agents).map(|_| rng.gen_range(1..=2)).collect();
    let outcome_count: usize = rng.gen_range(1..=3);
    let profile_count: usize = type_counts.iter().product();

    let outcomes: Vec<String> = (0..outcome_count).map(|x| format!("x{x}")).collect();
    let type_spaces: Vec<Vec<String>> = type_counts
        .iter()
        .enumerate()
        .map(|(i, &k)| (0..k).map(|t| format!("a{i}t{t}")).collect())
        .collect();
    let prior = random_product_prior(rng, &type_counts);
    let valuations: Vec<Vec<Vec<Rat>>> = (0..agents)
        .map(|_| {
            (0..outcome_count)
                .map(|_| {
                    (0..profile_count)
                        .map(|_| rat_int(rng.gen_range(-2..=2)))
                        .collect()
                })
                .collect()
        })
        .collect();
    let scf: Vec<usize> = (0..profile_count)
        .map(|_| rng.gen_range(0..outcome_count))
        .collect();
    Instance::from_parts(outcomes, type_spaces, prior, valuations, scf)
        .expect("generated instances are well-formed")
}
