//! Batch command-line surface for the implementability toolkit.
//!
//! Every subcommand reads a JSON instance (plus optional mechanism,
//! payment, strategy or certificate files), prints a deterministic JSON
//! report to standard output and exits with: 0 decided yes / verified
//! true, 1 decided no / verified false, 2 input error, 3 resource limits
//! exceeded. Timing goes to standard error (and into the `--report` file
//! as `timingMs`), keeping standard output byte-identical across runs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use scf_core::augment::augment_from_mechanism;
use scf_core::instance::Instance;
use scf_core::jsonio::{
    certificate_to_value, mechanism_to_value, parse_certificate, parse_mechanism, parse_strategy,
    payments_to_value, strategy_to_value,
};
use scf_core::mechanism::{
    enumerate_equilibria, Classification, ImplementationWitness, Mechanism, MechanismError,
    StrategyProfile,
};
use scf_core::rational::{bit_length, format_rat, Rat};
use scf_core::strong_general::{decide_strong, SearchLimits, SearchStats, StrongOutcome};
use scf_core::strong_single::decide_strong_single;
use scf_core::weak::{build_ic_system, decide_weak, negative_cycle_cross_check};

const EXIT_YES: u8 = 0;
const EXIT_NO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "scf",
    about = "Decide weak and strong implementability of social choice functions, \
             enumerate equilibria, and verify mechanisms and certificates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Resource caps as `profiles,branches,seconds` (0 seconds = no cap).
    #[arg(long, global = true, value_name = "P,B,S")]
    limits: Option<String>,

    /// Worker threads for equilibrium enumeration.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Human-readable summary on standard error.
    #[arg(long, global = true)]
    verbose: bool,

    /// Also write the JSON report (with timing) to this path.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an instance file.
    Validate(InstanceArg),
    /// Decide weak implementability (payments making truth-telling an
    /// equilibrium), with a negative-cycle cross-check on product priors.
    Weak(InstanceArg),
    /// Decide strong implementability (a mechanism whose every equilibrium
    /// realizes the choice function).
    Strong {
        #[command(flatten)]
        instance: InstanceArg,
        /// Run the general search even for a single agent.
        #[arg(long)]
        force_general: bool,
    },
    /// Enumerate the equilibria of a direct mechanism (`--payments`) or an
    /// explicit mechanism (`--mechanism`).
    Equilibria {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, value_name = "PATH", conflicts_with = "mechanism")]
        payments: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        mechanism: Option<PathBuf>,
    },
    /// Check by brute force that a mechanism strongly implements the
    /// instance's social choice function.
    VerifyMechanism {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, value_name = "PATH")]
        mechanism: PathBuf,
    },
    /// Re-derive every claim of a strong-implementability certificate.
    VerifyCertificate {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, value_name = "PATH")]
        certificate: PathBuf,
    },
    /// Build the augmented revelation mechanism from a mechanism and one of
    /// its equilibria (the truthful strategy by default).
    Augment {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, value_name = "PATH")]
        mechanism: PathBuf,
        /// Equilibrium strategy file (array of per-agent type→bid maps).
        #[arg(long, value_name = "PATH")]
        strategy: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceArg {
    /// Instance file (JSON).
    instance: PathBuf,
}

struct Report {
    value: Value,
    exit: u8,
    summary: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let limits = match parse_limits(cli.limits.as_deref()) {
        Ok(limits) => limits,
        Err(message) => return finish(input_error(&message), &cli, started),
    };
    if cli.workers == 0 {
        return finish(input_error("--workers must be at least 1"), &cli, started);
    }
    let report = run(&cli, &limits);
    finish(report, &cli, started)
}

fn finish(report: Report, cli: &Cli, started: Instant) -> ExitCode {
    let elapsed = started.elapsed();
    println!("{}", serde_json::to_string_pretty(&report.value).expect("report serializes"));
    eprintln!("{} ({} ms)", report.summary, elapsed.as_millis());
    if cli.verbose {
        eprintln!("exit code {}", report.exit);
    }
    if let Some(path) = &cli.report {
        let mut with_timing = report.value.clone();
        with_timing["timingMs"] = json!(elapsed.as_millis() as u64);
        let text = serde_json::to_string_pretty(&with_timing).expect("report serializes");
        if let Err(err) = std::fs::write(path, text + "\n") {
            eprintln!("failed to write report file: {err}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    ExitCode::from(report.exit)
}

fn input_error(message: &str) -> Report {
    Report {
        value: json!({"error": message}),
        exit: EXIT_INPUT,
        summary: format!("input error: {message}"),
    }
}

fn parse_limits(text: Option<&str>) -> Result<SearchLimits, String> {
    let Some(text) = text else {
        return Ok(SearchLimits::default());
    };
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err("--limits expects profiles,branches,seconds".into());
    }
    let parse = |s: &str, what: &str| -> Result<u64, String> {
        s.trim().parse().map_err(|_| format!("bad {what} limit {s:?}"))
    };
    let max_profiles = parse(parts[0], "profile")?;
    let max_branches = parse(parts[1], "branch")?;
    let seconds = parse(parts[2], "seconds")?;
    Ok(SearchLimits {
        max_profiles,
        max_branches,
        max_seconds: if seconds == 0 { None } else { Some(seconds) },
    })
}

fn load_instance(path: &Path) -> Result<Instance, Box<Report>> {
    let text = load_text(path)?;
    Instance::from_json(&text).map_err(|err| Box::new(input_error(&err.to_string())))
}

fn load_text(path: &Path) -> Result<String, Box<Report>> {
    std::fs::read_to_string(path).map_err(|err| {
        Box::new(input_error(&format!("cannot read {}: {err}", path.display())))
    })
}

fn run(cli: &Cli, limits: &SearchLimits) -> Report {
    match &cli.command {
        Command::Validate(arg) => run_validate(&arg.instance),
        Command::Weak(arg) => run_weak(&arg.instance),
        Command::Strong { instance, force_general } => {
            run_strong(&instance.instance, *force_general, limits)
        }
        Command::Equilibria { instance, payments, mechanism } => run_equilibria(
            &instance.instance,
            payments.as_deref(),
            mechanism.as_deref(),
            limits,
            cli.workers,
        ),
        Command::VerifyMechanism { instance, mechanism } => {
            run_verify_mechanism(&instance.instance, mechanism, limits, cli.workers)
        }
        Command::VerifyCertificate { instance, certificate } => {
            run_verify_certificate(&instance.instance, certificate)
        }
        Command::Augment { instance, mechanism, strategy } => {
            run_augment(&instance.instance, mechanism, strategy.as_deref())
        }
    }
}

fn run_validate(path: &Path) -> Report {
    match load_instance(path) {
        Ok(inst) => Report {
            value: json!({
                "command": "validate",
                "valid": true,
                "agents": inst.agent_count(),
                "outcomes": inst.outcome_count(),
                "typeProfiles": inst.profile_count(),
            }),
            exit: EXIT_YES,
            summary: "instance is valid".into(),
        },
        Err(report) => {
            let mut report = *report;
            report.value["command"] = json!("validate");
            report.value["valid"] = json!(false);
            report
        }
    }
}

fn max_bits(payments: &[Vec<Rat>]) -> u64 {
    payments.iter().flatten().map(bit_length).max().unwrap_or(0)
}

fn run_weak(path: &Path) -> Report {
    let inst = match load_instance(path) {
        Ok(inst) => inst,
        Err(report) => return *report,
    };
    let beliefs = inst.conditional_beliefs();
    let verdict = decide_weak(&inst, &beliefs);
    let cycle_check = match negative_cycle_cross_check(&inst, &beliefs) {
        None => "skipped",
        Some(cycle_verdict) if cycle_verdict == verdict.implementable => "agrees",
        Some(_) => "disagrees",
    };
    if verdict.implementable {
        let payments = verdict.payments.expect("yes verdicts carry payments");
        debug_assert_eq!(
            scf_core::lp::check_point(
                &build_ic_system(&inst, &beliefs),
                &payments.iter().flatten().cloned().collect::<Vec<_>>(),
            ),
            Ok(true)
        );
        Report {
            value: json!({
                "command": "weak",
                "implementable": true,
                "payments": payments_to_value(&inst, &payments),
                "maxPaymentBits": max_bits(&payments),
                "cycleCheck": cycle_check,
            }),
            exit: EXIT_YES,
            summary: "weakly implementable".into(),
        }
    } else {
        let refutation = verdict.refutation.expect("no verdicts carry a refutation");
        Report {
            value: json!({
                "command": "weak",
                "implementable": false,
                "refutation": refutation.iter().map(format_rat).collect::<Vec<_>>(),
                "cycleCheck": cycle_check,
            }),
            exit: EXIT_NO,
            summary: "not weakly implementable".into(),
        }
    }
}

fn stats_value(stats: &SearchStats) -> Value {
    json!({
        "branchesExplored": stats.branches_explored,
        "branchesRefuted": stats.branches_refuted,
        "lpSolves": stats.lp_solves,
        "leavesReached": stats.leaves_reached,
        "plansTried": stats.plans_tried,
    })
}

fn run_strong(path: &Path, force_general: bool, limits: &SearchLimits) -> Report {
    let inst = match load_instance(path) {
        Ok(inst) => inst,
        Err(report) => return *report,
    };
    if inst.agent_count() == 1 && !force_general {
        let verdict = decide_strong_single(&inst).expect("dispatched on agent count");
        return if verdict.implementable {
            let scheme = vec![verdict.payments.expect("yes verdicts carry payments")];
            Report {
                value: json!({
                    "command": "strong",
                    "solver": "single",
                    "implementable": true,
                    "payments": payments_to_value(&inst, &scheme),
                    "strictSlack": format_rat(&verdict.strict_slack.expect("yes has slack")),
                    "maxPaymentBits": max_bits(&scheme),
                }),
                exit: EXIT_YES,
                summary: "strongly implementable".into(),
            }
        } else {
            Report {
                value: json!({
                    "command": "strong",
                    "solver": "single",
                    "implementable": false,
                    "refutation": verdict
                        .refutation
                        .expect("no verdicts carry a refutation")
                        .iter()
                        .map(format_rat)
                        .collect::<Vec<_>>(),
                }),
                exit: EXIT_NO,
                summary: "not strongly implementable".into(),
            }
        };
    }
    let beliefs = inst.conditional_beliefs();
    let decision = decide_strong(&inst, &beliefs, limits);
    match decision.outcome {
        StrongOutcome::Implementable(cert) => Report {
            value: json!({
                "command": "strong",
                "solver": "general",
                "implementable": true,
                "certificate": certificate_to_value(&inst, &cert),
                "maxPaymentBits": cert.max_payment_bits(),
                "stats": stats_value(&decision.stats),
            }),
            exit: EXIT_YES,
            summary: "strongly implementable".into(),
        },
        StrongOutcome::NotImplementable => Report {
            value: json!({
                "command": "strong",
                "solver": "general",
                "implementable": false,
                "stats": stats_value(&decision.stats),
            }),
            exit: EXIT_NO,
            summary: "not strongly implementable".into(),
        },
        StrongOutcome::ResourceExceeded => Report {
            value: json!({
                "command": "strong",
                "solver": "general",
                "resourceExceeded": true,
                "stats": stats_value(&decision.stats),
            }),
            exit: EXIT_RESOURCE,
            summary: "resource limits exceeded".into(),
        },
    }
}

fn run_equilibria(
    instance: &Path,
    payments: Option<&Path>,
    mechanism: Option<&Path>,
    limits: &SearchLimits,
    workers: usize,
) -> Report {
    let inst = match load_instance(instance) {
        Ok(inst) => inst,
        Err(report) => return *report,
    };
    let mech = match (payments, mechanism) {
        (Some(path), None) | (None, Some(path)) => {
            let text = match load_text(path) {
                Ok(text) => text,
                Err(report) => return *report,
            };
            match parse_mechanism(&inst, &text) {
                Ok(mech) => mech,
                Err(err) => return input_error(&err.to_string()),
            }
        }
        _ => return input_error("equilibria requires exactly one of --payments or --mechanism"),
    };
    let beliefs = inst.conditional_beliefs();
    match enumerate_equilibria(&inst, &beliefs, &mech, limits.max_profiles, workers) {
        Ok(reports) => {
            let equilibria: Vec<Value> = reports
                .iter()
                .map(|report| {
                    let mut entry = json!({
                        "strategy": strategy_to_value(&inst, &mech, &report.profile),
                    });
                    if let Some(class) = report.classification {
                        entry["classification"] = json!(match class {
                            Classification::Good => "good",
                            Classification::Bad => "bad",
                        });
                    }
                    entry
                })
                .collect();
            let count = equilibria.len();
            Report {
                value: json!({
                    "command": "equilibria",
                    "count": count,
                    "equilibria": equilibria,
                }),
                exit: EXIT_YES,
                summary: format!("{count} equilibria"),
            }
        }
        Err(err @ MechanismError::BudgetExceeded { .. }) => Report {
            value: json!({"command": "equilibria", "error": err.to_string()}),
            exit: EXIT_RESOURCE,
            summary: err.to_string(),
        },
        Err(err) => input_error(&err.to_string()),
    }
}

fn run_verify_mechanism(
    instance: &Path,
    mechanism: &Path,
    limits: &SearchLimits,
    workers: usize,
) -> Report {
    let inst = match load_instance(instance) {
        Ok(inst) => inst,
        Err(report) => return *report,
    };
    let text = match load_text(mechanism) {
        Ok(text) => text,
        Err(report) => return *report,
    };
    let mech = match parse_mechanism(&inst, &text) {
        Ok(mech) => mech,
        Err(err) => return input_error(&err.to_string()),
    };
    let beliefs = inst.conditional_beliefs();
    match scf_core::mechanism::verify_strong_implementation(
        &inst,
        &beliefs,
        &mech,
        limits.max_profiles,
        workers,
    ) {
        Ok(verdict) => {
            if verdict.implements {
                Report {
                    value: json!({
                        "command": "verify-mechanism",
                        "implements": true,
                        "equilibria": verdict.equilibrium_count,
                    }),
                    exit: EXIT_YES,
                    summary: "mechanism strongly implements the choice function".into(),
                }
            } else {
                let witness = match verdict.witness.expect("failures carry a witness") {
                    ImplementationWitness::NoEquilibrium => json!("noEquilibrium"),
                    ImplementationWitness::DeviantEquilibrium { profile, type_profile } => {
                        json!({
                            "strategy": strategy_to_value(&inst, &mech, &profile),
                            "typeProfile": inst.profile_key(type_profile),
                        })
                    }
                };
                Report {
                    value: json!({
                        "command": "verify-mechanism",
                        "implements": false,
                        "witness": witness,
                    }),
                    exit: EXIT_NO,
                    summary: "mechanism does not strongly implement the choice function".into(),
                }
            }
        }
        Err(err @ MechanismError::BudgetExceeded { .. }) => Report {
            value: json!({"command": "verify-mechanism", "error": err.to_string()}),
            exit: EXIT_RESOURCE,
            summary: err.to_string(),
        },
        Err(err) => input_error(&err.to_string()),
    }
}

fn run_verify_certificate(instance: &Path, certificate: &Path) -> Report {
    let inst = match load_instance(instance) {
        Ok(inst) => inst,
        Err(report) => return *report,
    };
    let text = match load_text(certificate) {
        Ok(text) => text,
        Err(report) => return *report,
    };
    let cert = match parse_certificate(&inst, &text) {
        Ok(cert) => cert,
        Err(err) => return input_error(&err.to_string()),
    };
    let beliefs = inst.conditional_beliefs();
    let valid = scf_core::strong_general::verify_certificate(&inst, &beliefs, &cert);
    Report {
        value: json!({
            "command": "verify-certificate",
            "valid": valid,
            "maxPaymentBits": cert.max_payment_bits(),
        }),
        exit: if valid { EXIT_YES } else { EXIT_NO },
        summary: if valid {
            "certificate verified".into()
        } else {
            "certificate rejected".into()
        },
    }
}

fn run_augment(instance: &Path, mechanism: &Path, strategy: Option<&Path>) -> Report {
    let inst = match load_instance(instance) {
        Ok(inst) => inst,
        Err(report) => return *report,
    };
    let text = match load_text(mechanism) {
        Ok(text) => text,
        Err(report) => return *report,
    };
    let mech = match parse_mechanism(&inst, &text) {
        Ok(mech) => mech,
        Err(err) => return input_error(&err.to_string()),
    };
    let profile = match strategy {
        Some(path) => {
            let text = match load_text(path) {
                Ok(text) => text,
                Err(report) => return *report,
            };
            let value: Value = match serde_json::from_str(&text) {
                Ok(value) => value,
                Err(err) => return input_error(&err.to_string()),
            };
            match parse_strategy(&inst, &mech, &value) {
                Ok(profile) => profile,
                Err(err) => return input_error(&err.to_string()),
            }
        }
        None => match truthful_in(&inst, &mech) {
            Some(profile) => profile,
            None => {
                return input_error(
                    "mechanism bids do not contain the type labels; pass --strategy",
                )
            }
        },
    };
    let beliefs = inst.conditional_beliefs();
    match augment_from_mechanism(&inst, &beliefs, &mech, &profile) {
        Ok(result) => {
            let annotated = mechanism_to_value(
                &inst,
                &result.mechanism,
                Some((&result.flags, &result.bid_map)),
            );
            Report {
                value: json!({
                    "command": "augment",
                    "mechanism": annotated,
                }),
                exit: EXIT_YES,
                summary: "augmented revelation mechanism constructed".into(),
            }
        }
        Err(err) => input_error(&err.to_string()),
    }
}

/// The truthful strategy expressed in the mechanism's bid sets: every type
/// bids the bid carrying its own label, when such bids exist.
fn truthful_in(inst: &Instance, mech: &Mechanism) -> Option<StrategyProfile> {
    let mut bids = Vec::with_capacity(inst.agent_count());
    for agent in 0..inst.agent_count() {
        let mut per_agent = Vec::with_capacity(inst.type_space(agent).len());
        for label in inst.type_space(agent) {
            per_agent.push(mech.bid_sets()[agent].iter().position(|b| b == label)?);
        }
        bids.push(per_agent);
    }
    Some(StrategyProfile { bids })
}
