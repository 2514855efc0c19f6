//! Experiment harness for the cosetcast toolkit.
//!
//! Exit codes: 0 = the run succeeded and every security verdict came back
//! secure; 2 = the run worked but an exact audit found leakage; 1 = an
//! operational error (bad file, infeasible instance without --force, failed
//! search, no decodable trial).

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

use cosetcast::adversary::{audit_code_coordinates, AuditOptions};
use cosetcast::coset::{search_code, CosetCode, SearchBudget};
use cosetcast::experiment::{
    mincut_table, run_gossip_trials, run_multicast, CodeChoice, MulticastOptions,
};
use cosetcast::gf::FieldSpec;
use cosetcast::gossip::{estimate_flooding, theorem3_rounds};
use cosetcast::scenario::{CodeRef, Scenario, ScenarioKind};

const EXIT_INSECURE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "cosetcast",
    version,
    about = "individually-secure multicast coding experiments with exact leakage audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print min-cut tables for a multicast scenario.
    Mincut {
        scenario: PathBuf,
        /// Directory for report files (created if missing).
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Tap-set size for the eavesdropper cut rows (scenario `w` when
        /// omitted).
        #[arg(long)]
        w: Option<usize>,
    },
    /// Encode, disseminate, decode and audit a multicast scenario.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Run even when the feasibility check fails.
        #[arg(long)]
        force: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Spread independent trials across threads.
        #[arg(long)]
        parallel: bool,
    },
    /// Run gossip trials; with a code also the tapped-call experiment.
    Gossip {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        parallel: bool,
        /// Also estimate flooding time/throughput with this many trials.
        #[arg(long)]
        flooding_trials: Option<u64>,
    },
    /// Exhaustive coordinate-tap audit of a coset-code descriptor.
    Audit {
        code: PathBuf,
        #[arg(long)]
        w: usize,
        /// Message-subset size budget.
        #[arg(long, default_value_t = 1)]
        ks: usize,
        /// Also report the joint leakage over all messages.
        #[arg(long)]
        joint: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Search for a code whose generator passes the column-subset check.
    SearchCode {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        w: usize,
        #[arg(long)]
        q: u32,
        /// Exhaustive-enumeration cap on q^(w*k).
        #[arg(long, default_value_t = 1 << 20)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Descriptor output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Mincut { scenario, out, w } => cmd_mincut(&scenario, &out, w),
        Command::Run {
            scenario,
            seed,
            trials,
            force,
            out,
            parallel,
        } => cmd_run(&scenario, seed, trials, force, &out, parallel),
        Command::Gossip {
            scenario,
            seed,
            trials,
            out,
            parallel,
            flooding_trials,
        } => cmd_gossip(&scenario, seed, trials, &out, parallel, flooding_trials),
        Command::Audit {
            code,
            w,
            ks,
            joint,
            out,
        } => cmd_audit(&code, w, ks, joint, &out),
        Command::SearchCode {
            k,
            w,
            q,
            budget,
            seed,
            out,
        } => cmd_search_code(k, w, q, budget, seed, out.as_deref()),
    }
}

fn load_scenario(path: &Path, kind: ScenarioKind) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scenario `{}`", path.display()))?;
    let sc = Scenario::parse(&text).with_context(|| format!("parsing `{}`", path.display()))?;
    if sc.kind != kind {
        bail!(
            "scenario `{}` has the wrong kind for this subcommand",
            path.display()
        );
    }
    Ok(sc)
}

/// Resolve the scenario's code selection. Relative descriptor paths are
/// taken relative to the scenario file's directory.
fn load_code(sc: &Scenario, scenario_path: &Path, k: usize) -> Result<Option<CosetCode>> {
    match &sc.code {
        CodeRef::None => Ok(None),
        CodeRef::Search => {
            let field = FieldSpec::new(sc.field)?;
            let budget = SearchBudget {
                seed: sc.seed,
                ..SearchBudget::default()
            };
            let code = search_code(k, sc.w, field, &budget)?
                .ok_or_else(|| anyhow!("code search exhausted its budget for k={k}, w={}", sc.w))?;
            Ok(Some(code))
        }
        CodeRef::CosetFile(rel) => {
            let path = scenario_path
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(rel);
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading code descriptor `{}`", path.display()))?;
            Ok(Some(CosetCode::from_descriptor(&text)?))
        }
    }
}

fn write_report(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing `{}`", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_mincut(path: &Path, out: &Path, w_override: Option<usize>) -> Result<i32> {
    let sc = load_scenario(path, ScenarioKind::Multicast)?;
    let spec = sc.to_network_spec()?;
    let w = w_override.unwrap_or(sc.w);
    let table = mincut_table(&spec, w, 10_000)?;
    let csv = table.csv();
    print!("{csv}");
    if table.truncated {
        println!("# tap-set enumeration truncated");
    }
    write_report(out, "mincut.csv", &csv)?;
    Ok(0)
}

fn cmd_run(
    path: &Path,
    seed: Option<u64>,
    trials: Option<u64>,
    force: bool,
    out: &Path,
    parallel: bool,
) -> Result<i32> {
    let sc = load_scenario(path, ScenarioKind::Multicast)?;
    let spec = sc.to_network_spec()?;
    let k = spec.sources().first().map(|s| s.k).unwrap_or(0);
    let code = load_code(&sc, path, k)?;
    let opts = MulticastOptions {
        trials: trials.unwrap_or(sc.trials),
        seed: seed.unwrap_or(sc.seed),
        w: sc.w,
        ks: sc.ks,
        enumeration_cap: sc.enumeration_cap,
        audit_trial: 0,
        force,
        parallel,
    };
    let choice = match code {
        Some(c) => CodeChoice::Coset(c),
        None => CodeChoice::Plain,
    };
    let report = run_multicast(&spec, &choice, &opts)?;
    write_report(out, "feasibility.txt", &report.feasibility.render())?;
    if report.refused {
        let why = report
            .feasibility
            .individual_violation()
            .unwrap_or_else(|| "infeasible".into());
        eprintln!("refusing to run: {why} (use --force to override)");
        return Ok(1);
    }
    write_report(out, "trials.csv", &report.trials_csv())?;
    write_report(out, "packets.csv", &report.packets_csv)?;
    write_report(out, "summary.txt", &report.summary())?;
    if let Some(audit) = &report.audit {
        write_report(out, "leakage.csv", &audit.to_csv())?;
        write_report(out, "leakage.txt", &audit.render())?;
    }
    println!(
        "decoded everything in {}/{} trials",
        report.full_success_trials,
        report.trials.len()
    );
    if report.full_success_trials == 0 {
        eprintln!("no trial decoded everywhere");
        return Ok(1);
    }
    if let Some(audit) = &report.audit {
        if !audit.protected_secure() {
            eprintln!("audit verdict: INSECURE");
            return Ok(EXIT_INSECURE);
        }
        println!("audit verdict: protected subsets leak exactly zero bits");
    }
    Ok(0)
}

fn cmd_gossip(
    path: &Path,
    seed: Option<u64>,
    trials: Option<u64>,
    out: &Path,
    parallel: bool,
    flooding_trials: Option<u64>,
) -> Result<i32> {
    let mut sc = load_scenario(path, ScenarioKind::Gossip)?;
    if let Some(s) = seed {
        sc.seed = s;
    }
    let config = sc.to_gossip_config()?;
    let trials = trials.unwrap_or(sc.trials);
    let code = load_code(&sc, path, config.k)?;
    let report = run_gossip_trials(
        &config,
        code.as_ref(),
        trials,
        sc.seed,
        sc.w,
        sc.ks,
        sc.enumeration_cap,
        parallel,
    )?;
    write_report(out, "rounds.csv", &report.rounds_csv)?;
    write_report(out, "trace.txt", &report.first_trace)?;
    if let Some(ft) = flooding_trials {
        let est = estimate_flooding(&config, ft, sc.seed)?;
        let bound = theorem3_rounds(
            est.t_hat as f64,
            est.alpha,
            config.k,
            config.sources.len(),
            0.05,
            config.field.order(),
        )?;
        let mut text = format!(
            "t_hat {}\nalpha {}\nalpha_is_lower_bound {}\nstalled {}\n",
            est.t_hat, est.alpha, est.alpha_is_lower_bound, est.stalled_trials
        );
        for (k, p) in &est.tail {
            text.push_str(&format!("tail {k} {p}\n"));
        }
        text.push_str(&format!("predicted_rounds(eps=0.05) {bound}\n"));
        write_report(out, "flooding.txt", &text)?;
    }
    let completed = report.completions.iter().filter(|c| c.is_some()).count();
    println!("{completed}/{trials} trials completed");
    if let Some(secure) = &report.secure {
        write_report(out, "secure-rounds.csv", &secure.rounds_csv())?;
        let mut leak = String::from("trial,calls_tapped,packets_seen,max_protected_mi,zero\n");
        for l in &secure.leakage {
            leak.push_str(&format!(
                "{},{},{},{},{}\n",
                l.trial,
                l.calls_tapped.len(),
                l.packets_seen,
                l.max_protected_mi,
                l.protected_zero
            ));
        }
        write_report(out, "secure-leakage.csv", &leak)?;
        println!(
            "coded vs uncoded rounds: KS D = {:.4}, p = {:.4}, equivalent = {}",
            secure.ks_test.statistic, secure.ks_test.p_value, secure.rounds_equivalent
        );
        if !secure.all_trials_protected_zero {
            eprintln!("audit verdict: INSECURE (some tapped trial leaked)");
            return Ok(EXIT_INSECURE);
        }
        println!("audit verdict: every trial leaked exactly zero bits on protected subsets");
    }
    Ok(0)
}

fn cmd_audit(code_path: &Path, w: usize, ks: usize, joint: bool, out: &Path) -> Result<i32> {
    let text = std::fs::read_to_string(code_path)
        .with_context(|| format!("reading code descriptor `{}`", code_path.display()))?;
    let code = CosetCode::from_descriptor(&text)?;
    let report = audit_code_coordinates(
        &code,
        &AuditOptions {
            w,
            ks,
            include_joint: joint,
            ..Default::default()
        },
    )?;
    write_report(out, "leakage.csv", &report.to_csv())?;
    write_report(out, "leakage.txt", &report.render())?;
    print!("{}", report.render());
    if !report.protected_secure() {
        return Ok(EXIT_INSECURE);
    }
    Ok(0)
}

fn cmd_search_code(
    k: usize,
    w: usize,
    q: u32,
    budget: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<i32> {
    let field = FieldSpec::new(q)?;
    let budget = SearchBudget {
        exhaustive_cap: budget,
        random_trials: budget,
        seed,
    };
    match search_code(k, w, field, &budget)? {
        Some(code) => {
            let descriptor = code.to_descriptor();
            match out {
                Some(path) => {
                    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                        std::fs::create_dir_all(dir)?;
                    }
                    std::fs::write(path, &descriptor)?;
                    println!("wrote {}", path.display());
                }
                None => print!("{descriptor}"),
            }
            Ok(0)
        }
        None => {
            eprintln!("no passing generator within the budget for k={k}, w={w}, q={q}");
            Ok(1)
        }
    }
}
