use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pscfkit::harness::{exhaustive_rmec_efficiency, run_table2, ExperimentSpec};
use pscfkit::lottery::format_rational;
use pscfkit::prefs::{sample_profile, Profile};
use pscfkit::rules::{Rule, ScoringVector};
use pscfkit::verify::{
    ex_post_efficient, monotonicity_check, pareto_optimal_set, participation_report,
    proportional_share_ok, sd_efficient, sd_uniform_ok, strategyproofness_scan, Domain,
    EfficiencyVerdict,
};

#[derive(Parser)]
#[command(name = "pscfkit", version, about = "Probabilistic voting rules with exact arithmetic")]
struct Cli {
    /// Increase log verbosity (-vvv dumps simplex tableaus)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a rule on a profile
    Rule {
        #[arg(value_enum)]
        name: RuleName,
        #[arg(long)]
        profile: PathBuf,
        /// Scoring vector for smec, e.g. `3,2,1,0` or `1,1/2,0`
        #[arg(long)]
        scores: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Check an axiom for a rule's outcome on a profile
    Verify {
        #[arg(value_enum)]
        axiom: Axiom,
        #[arg(long)]
        profile: PathBuf,
        /// 1-based agent position; all agents if omitted
        #[arg(long)]
        agent: Option<usize>,
        #[arg(long, value_enum, default_value = "rmec")]
        rule: RuleName,
        #[arg(long)]
        scores: Option<String>,
        /// Alternative label for `monotone`; all alternatives if omitted
        #[arg(long)]
        alternative: Option<String>,
        /// Misreport domain for `sp`
        #[arg(long, value_enum, default_value = "all")]
        domain: DomainArg,
    },
    #[command(subcommand)]
    Experiment(Experiment),
    /// Print a uniformly random profile
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// SD-efficiency of random profiles per (n, m) cell
    Table2 {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Agent range x alternative range, e.g. `4-8x4-8`
        #[arg(long, default_value = "4-8x4-8")]
        sizes: String,
        #[arg(long, value_enum, default_value = "rmec")]
        rule: RuleName,
        #[arg(long)]
        scores: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Count SD-inefficient RMEC outcomes over all profiles up to anonymity
    Exhaustive {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleName {
    Rmec,
    Smec,
    Rankmax,
    Rd,
    Rsd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axiom {
    Expost,
    Sdeff,
    Participation,
    Sp,
    Propshare,
    Sduniform,
    Monotone,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    All,
    Strict,
    Dichotomous,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::All => Domain::All,
            DomainArg::Strict => Domain::Strict,
            DomainArg::Dichotomous => Domain::Dichotomous,
        }
    }
}

fn make_rule(name: RuleName, scores: Option<&str>) -> Result<Rule> {
    let scores = scores.map(ScoringVector::parse).transpose()?;
    let name = match name {
        RuleName::Rmec => "rmec",
        RuleName::Smec => "smec",
        RuleName::Rankmax => "rankmax",
        RuleName::Rd => "rd",
        RuleName::Rsd => "rsd",
    };
    Ok(Rule::from_name(name, scores)?)
}

fn load(path: &PathBuf) -> Result<Profile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Profile::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>> {
    match s.split_once('-') {
        Some((a, b)) => Ok(a.trim().parse()?..=b.trim().parse()?),
        None => {
            let v = s.trim().parse()?;
            Ok(v..=v)
        }
    }
}

fn agents(profile: &Profile, agent: Option<usize>) -> Result<Vec<usize>> {
    match agent {
        Some(i) if i >= 1 && i <= profile.num_agents() => Ok(vec![i - 1]),
        Some(i) => bail!("agent {i} out of range 1..={}", profile.num_agents()),
        None => Ok((0..profile.num_agents()).collect()),
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Rule {
            name,
            profile,
            scores,
            json,
        } => {
            let profile = load(&profile)?;
            let rule = make_rule(name, scores.as_deref())?;
            let labels = profile.labels();
            let outcome = rule.apply(&profile)?;
            if json {
                print_json(&json!({
                    "rule": rule.name(),
                    "lottery": outcome.to_json(&labels),
                }));
            } else {
                let width = labels.iter().map(String::len).max().unwrap_or(1);
                for a in 0..profile.num_alternatives() {
                    println!("{:<width$}  {}", labels[a], format_rational(outcome.prob(a)));
                }
            }
            Ok(true)
        }
        Command::Verify {
            axiom,
            profile,
            agent,
            rule,
            scores,
            alternative,
            domain,
        } => {
            let profile = load(&profile)?;
            let rule = make_rule(rule, scores.as_deref())?;
            let labels = profile.labels();
            let outcome = rule.apply(&profile)?;
            let name = |i: usize| profile.agents()[i].clone();
            let (holds, details) = match axiom {
                Axiom::Expost => {
                    let pareto: Vec<&str> =
                        pareto_optimal_set(&profile).into_iter().map(|a| profile.label(a)).collect();
                    (ex_post_efficient(&outcome, &profile), json!({ "pareto_optimal": pareto }))
                }
                Axiom::Sdeff => match sd_efficient(&outcome, &profile) {
                    EfficiencyVerdict::Efficient => (true, json!({})),
                    EfficiencyVerdict::Dominated { witness } => {
                        (false, json!({ "witness": witness.to_json(&labels) }))
                    }
                },
                Axiom::Participation => {
                    let mut all = true;
                    let mut reports = Vec::new();
                    for i in agents(&profile, agent)? {
                        let r = participation_report(&rule, &profile, i)?;
                        all &= r.very_strong_ok;
                        reports.push(json!({
                            "agent": name(i),
                            "with": r.with_outcome.to_json(&labels),
                            "without": r.without_outcome.to_json(&labels),
                            "sd_ok": r.sd_ok,
                            "strong_ok": r.strong_ok,
                            "very_strong_ok": r.very_strong_ok,
                        }));
                    }
                    (all, json!({ "agents": reports }))
                }
                Axiom::Sp => {
                    let mut found = Vec::new();
                    for i in agents(&profile, agent)? {
                        for f in strategyproofness_scan(&rule, &profile, i, domain.into())? {
                            found.push(json!({
                                "agent": name(i),
                                "misreport": f.misreport.display(&labels).to_string(),
                                "outcome": f.outcome.to_json(&labels),
                            }));
                        }
                    }
                    (found.is_empty(), json!({ "manipulations": found }))
                }
                Axiom::Propshare => (proportional_share_ok(&outcome, &profile)?, json!({})),
                Axiom::Sduniform => (sd_uniform_ok(&outcome, &profile)?, json!({})),
                Axiom::Monotone => {
                    let alts = match &alternative {
                        Some(l) => vec![profile.alternative_id(l)?],
                        None => (0..profile.num_alternatives()).collect(),
                    };
                    let mut failures = Vec::new();
                    for i in agents(&profile, agent)? {
                        for &a in &alts {
                            if !monotonicity_check(&rule, &profile, i, a)? {
                                failures.push(json!({ "agent": name(i), "alternative": labels[a] }));
                            }
                        }
                    }
                    (failures.is_empty(), json!({ "failures": failures }))
                }
            };
            let mut report = json!({
                "axiom": axiom_name(axiom),
                "rule": rule.name(),
                "outcome": outcome.to_json(&labels),
                "holds": holds,
            });
            if let (Value::Object(r), Value::Object(d)) = (&mut report, details) {
                r.extend(d);
            }
            print_json(&report);
            Ok(true)
        }
        Command::Experiment(Experiment::Table2 {
            trials,
            seed,
            sizes,
            rule,
            scores,
            json,
        }) => {
            let (ns, ms) = sizes
                .split_once('x')
                .with_context(|| format!("bad --sizes `{sizes}`, expected e.g. 4-8x4-8"))?;
            let mut spec = ExperimentSpec::grid(parse_range(ns)?, parse_range(ms)?, trials, seed);
            spec.rule = make_rule(rule, scores.as_deref())?;
            let cells = run_table2(&spec)?;
            if json {
                print_json(&json!({
                    "rule": spec.rule.name(),
                    "seed": seed,
                    "cells": cells,
                }));
            } else {
                println!("{:>3} {:>3} {:>8} {:>12} {:>10}", "n", "m", "trials", "sd-efficient", "seconds");
                for c in &cells {
                    println!(
                        "{:>3} {:>3} {:>8} {:>12} {:>10.2}",
                        c.n,
                        c.m,
                        c.trials,
                        c.sd_efficient_count,
                        c.elapsed.as_secs_f64()
                    );
                }
            }
            Ok(true)
        }
        Command::Experiment(Experiment::Exhaustive { n, m }) => {
            let start = Instant::now();
            let bad = exhaustive_rmec_efficiency(n, m)?;
            print_json(&json!({
                "n": n,
                "m": m,
                "sd_inefficient": bad,
                "seconds": start.elapsed().as_secs_f64(),
            }));
            Ok(bad == 0)
        }
        Command::Gen { n, m, seed } => {
            print!("{}", sample_profile(n, m, seed)?);
            Ok(true)
        }
    }
}

fn axiom_name(a: Axiom) -> &'static str {
    match a {
        Axiom::Expost => "expost",
        Axiom::Sdeff => "sdeff",
        Axiom::Participation => "participation",
        Axiom::Sp => "sp",
        Axiom::Propshare => "propshare",
        Axiom::Sduniform => "sduniform",
        Axiom::Monotone => "monotone",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
