//! Single-agent strong implementability in one exact LP.
//!
//! With one agent, a bad equilibrium can never be selectively eliminated,
//! so strong implementability reduces to the existence of payments making
//! the direct mechanism incentive compatible *without* bad equilibria: for
//! every ordered type pair whose assigned outcomes differ, misreporting
//! must be *strictly* worse. The resulting strict/non-strict system is
//! decided by the exact feasibility kernel.

use thiserror::Error;

use crate::instance::Instance;
use crate::lp::{self, FeasibilityOutcome, LinearSystem, Relation};
use crate::rational::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("single-agent solver invoked on an instance with {0} agents")]
pub struct NotSingleAgent(pub usize);

/// Outcome of [`decide_strong_single`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleVerdict {
    pub implementable: bool,
    /// Payments by type, present on yes.
    pub payments: Option<Vec<Rat>>,
    /// Exact minimum slack of the strict rows at the returned payments.
    pub strict_slack: Option<Rat>,
    /// Multipliers over the rows of [`build_single_system`], present on no.
    pub refutation: Option<Vec<Rat>>,
}

/// The strict/non-strict system over the payment variables `P(θ)`.
///
/// For every ordered pair `(θ, θ′)`, `θ ≠ θ′`, in lexicographic order:
/// a strict row `P(θ′) − P(θ) < V(f(θ),θ) − V(f(θ′),θ)` when the assigned
/// outcomes differ (no bad equilibrium may prefer the misreport), and the
/// non-strict incentive row otherwise. Self-pairs are tautologies and the
/// non-strict row of a differing pair is implied by its strict row; both
/// are omitted.
pub fn build_single_system(inst: &Instance) -> Result<LinearSystem, NotSingleAgent> {
    if inst.agent_count() != 1 {
        return Err(NotSingleAgent(inst.agent_count()));
    }
    let types = inst.profile_count();
    let mut sys = LinearSystem::new(types);
    for own in 0..types {
        for report in 0..types {
            if report == own {
                continue;
            }
            let value_truth = inst.valuation(0, inst.choice(own), own);
            let value_dev = inst.valuation(0, inst.choice(report), own);
            let relation = if inst.choice(own) != inst.choice(report) {
                Relation::StrictLess
            } else {
                Relation::NonStrictLeq
            };
            sys.add(
                vec![
                    (report, Rat::from_integer(1.into())),
                    (own, Rat::from_integer((-1).into())),
                ],
                value_truth - value_dev,
                relation,
            );
        }
    }
    Ok(sys)
}

/// Decides single-agent strong implementability by strict feasibility of
/// [`build_single_system`].
pub fn decide_strong_single(inst: &Instance) -> Result<SingleVerdict, NotSingleAgent> {
    let sys = build_single_system(inst)?;
    Ok(match lp::solve_mixed_system(&sys) {
        FeasibilityOutcome::StrictlyFeasible { point, min_strict_slack } => SingleVerdict {
            implementable: true,
            payments: Some(point),
            strict_slack: Some(min_strict_slack),
            refutation: None,
        },
        FeasibilityOutcome::Infeasible { multipliers } => SingleVerdict {
            implementable: false,
            payments: None,
            strict_slack: None,
            refutation: Some(multipliers),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::instance::Instance;
    use crate::mechanism::{
        enumerate_equilibria, is_incentive_compatible, Classification, Mechanism,
        DEFAULT_PROFILE_BUDGET,
    };
    use crate::rational::{rat, rat_int};

    #[test]
    fn rejects_multi_agent_instances() {
        let inst = fixtures::two_agent_uniform();
        assert_eq!(build_single_system(&inst), Err(NotSingleAgent(2)));
        assert_eq!(decide_strong_single(&inst), Err(NotSingleAgent(2)));
    }

    #[test]
    fn constant_choice_has_no_strict_rows() {
        let inst = Instance::from_parts(
            vec!["a".into(), "b".into()],
            vec![vec!["t1".into(), "t2".into()]],
            vec![rat(1, 2), rat(1, 2)],
            vec![vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]]],
            vec![0, 0],
        )
        .unwrap();
        let sys = build_single_system(&inst).unwrap();
        assert_eq!(sys.strict_row_count(), 0);
        assert_eq!(lp::check_point(&sys, &[rat_int(0), rat_int(0)]), Ok(true));
        let verdict = decide_strong_single(&inst).unwrap();
        assert!(verdict.implementable);
    }

    #[test]
    fn fixture_a_system_shape_and_point() {
        let inst = fixtures::fixture_a();
        let sys = build_single_system(&inst).unwrap();
        assert_eq!(sys.row_count(), 2);
        assert_eq!(sys.strict_row_count(), 2);
        // P ≡ 0 satisfies both strict rows with slack 1.
        assert_eq!(lp::check_point(&sys, &[rat_int(0), rat_int(0)]), Ok(true));
        for row in &sys.constraints {
            assert_eq!(row.bound, rat_int(1));
        }
    }

    #[test]
    fn fixture_b_point_with_tie_fails_check() {
        let inst = fixtures::fixture_b();
        let sys = build_single_system(&inst).unwrap();
        // P(t1) = 0, P(t2) = 1: a strict row holds with equality only.
        assert_eq!(lp::check_point(&sys, &[rat_int(0), rat_int(1)]), Ok(false));
    }

    #[test]
    fn fixture_b_strict_pair_refutes_by_summation() {
        let inst = fixtures::fixture_b();
        let sys = build_single_system(&inst).unwrap();
        assert_eq!(
            lp::validate_refutation(&sys, &[rat_int(1), rat_int(1)]),
            Ok(true)
        );
    }

    #[test]
    fn fixture_verdicts() {
        let a = decide_strong_single(&fixtures::fixture_a()).unwrap();
        assert!(a.implementable);
        assert!(a.strict_slack.unwrap() > rat_int(0));

        let b = decide_strong_single(&fixtures::fixture_b()).unwrap();
        assert!(!b.implementable);
        let sys = build_single_system(&fixtures::fixture_b()).unwrap();
        assert_eq!(
            lp::validate_refutation(&sys, &b.refutation.unwrap()),
            Ok(true)
        );

        let c = decide_strong_single(&fixtures::fixture_c()).unwrap();
        assert!(!c.implementable);
        let sys = build_single_system(&fixtures::fixture_c()).unwrap();
        assert_eq!(
            lp::validate_refutation(&sys, &c.refutation.unwrap()),
            Ok(true)
        );
    }

    #[test]
    fn yes_payments_are_ic_without_bad_equilibria() {
        let inst = fixtures::fixture_a();
        let beliefs = inst.conditional_beliefs();
        let verdict = decide_strong_single(&inst).unwrap();
        let payments = vec![verdict.payments.unwrap()];
        assert!(is_incentive_compatible(&inst, &beliefs, &payments));
        let mech = Mechanism::direct(&inst, &payments);
        let reports =
            enumerate_equilibria(&inst, &beliefs, &mech, DEFAULT_PROFILE_BUDGET, 1).unwrap();
        assert!(!reports.is_empty());
        assert!(reports
            .iter()
            .all(|r| r.classification == Some(Classification::Good)));
    }
}
