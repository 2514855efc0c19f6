//! Seeded end-to-end pipelines: encode, disseminate, decode, audit. The
//! command-line tool is a thin wrapper over these, and the acceptance suite
//! drives them directly. All randomness flows from one experiment seed
//! through named substreams (`messages/<trial>`, `network/<trial>`,
//! `gossip-*/<trial>`), so every artifact is reproducible byte for byte.

use crate::adversary::{audit_network_run, AuditOptions, LeakageReport};
use crate::coset::{CodewordMatrix, CosetCode, MessageMatrix};
use crate::error::{Error, Result};
use crate::gossip::{self, GossipConfig, GossipTrace, SecureGossipOptions, SecureGossipReport};
use crate::network::{DecodeOutcome, FeasibilityReport, NetworkSpec, RlncRun};
use crate::util::{subseed, substream};
use std::fmt::Write as _;

/// Source coding selection for a multicast run.
#[derive(Debug, Clone)]
pub enum CodeChoice {
    /// Sources transmit raw message rows.
    Plain,
    /// Every source encodes with the same coset code.
    Coset(CosetCode),
}

#[derive(Debug, Clone, Copy)]
pub struct MulticastOptions {
    pub trials: u64,
    pub seed: u64,
    pub w: usize,
    pub ks: usize,
    pub enumeration_cap: u64,
    /// Which trial's packet log feeds the exhaustive audit.
    pub audit_trial: u64,
    /// Run even when the feasibility check fails.
    pub force: bool,
    /// Spread independent trials across threads; results are identical to
    /// the serial order because every trial is a pure function of
    /// (seed, trial index).
    pub parallel: bool,
}

impl Default for MulticastOptions {
    fn default() -> Self {
        MulticastOptions {
            trials: 1,
            seed: 0,
            w: 1,
            ks: 1,
            enumeration_cap: crate::adversary::DEFAULT_ENUMERATION_CAP,
            audit_trial: 0,
            force: false,
            parallel: false,
        }
    }
}

/// Run `f` over trial indices `0..trials`, optionally striding the work
/// across threads; the output order is by trial index either way.
pub fn map_trials<T, F>(trials: u64, parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    if !parallel || trials < 2 {
        return (0..trials).map(f).collect();
    }
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(4)
        .min(trials as usize);
    let chunks: Vec<Vec<(u64, Result<T>)>> = std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                scope.spawn(move || {
                    (t as u64..trials)
                        .step_by(threads)
                        .map(|i| (i, f(i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("trial thread")).collect()
    });
    let mut indexed: Vec<(u64, Result<T>)> = chunks.into_iter().flatten().collect();
    indexed.sort_by_key(|(i, _)| *i);
    indexed.into_iter().map(|(_, r)| r).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub trial: u64,
    /// Destination name and whether it recovered every source matrix
    /// (codewords and messages) exactly.
    pub per_destination: Vec<(String, bool)>,
    pub all_decoded: bool,
}

#[derive(Debug, Clone)]
pub struct MulticastReport {
    pub feasibility: FeasibilityReport,
    /// True when the run was refused (infeasible and not forced).
    pub refused: bool,
    pub trials: Vec<TrialOutcome>,
    /// Trials in which every destination decoded everything.
    pub full_success_trials: u64,
    pub audit: Option<LeakageReport>,
    pub audited_trial: u64,
    /// Packet log of the audited trial, one row per edge unit.
    pub packets_csv: String,
}

impl MulticastReport {
    pub fn trials_csv(&self) -> String {
        let mut s = String::from("trial,destination,decoded\n");
        for t in &self.trials {
            for (d, ok) in &t.per_destination {
                let _ = writeln!(s, "{},{},{}", t.trial, d, ok);
            }
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "trials: {} total, {} fully decoded",
            self.trials.len(),
            self.full_success_trials
        );
        if let Some(a) = &self.audit {
            let _ = writeln!(s, "audited trial: {}", self.audited_trial);
            s.push_str(&a.render());
        } else {
            let _ = writeln!(s, "no audit (plain sources or refused run)");
        }
        s
    }
}

/// Generate per-trial messages, encode, disseminate and decode; audit one
/// trial's log exhaustively. Messages for trial `t` come from substream
/// `messages/<t>` of the experiment seed, packets from `network/<t>`.
pub fn run_multicast(
    spec: &NetworkSpec,
    code: &CodeChoice,
    opts: &MulticastOptions,
) -> Result<MulticastReport> {
    let ks_uniform: Vec<usize> = spec.sources().iter().map(|s| s.k).collect();
    let k = *ks_uniform
        .first()
        .ok_or_else(|| Error::InvalidParameter("no sources".into()))?;
    if ks_uniform.iter().any(|&kk| kk != k) {
        return Err(Error::InvalidParameter(
            "pipeline expects every source to carry the same k".into(),
        ));
    }
    if let CodeChoice::Coset(c) = code {
        if c.k() != k || c.field() != spec.field() {
            return Err(Error::InvalidParameter(format!(
                "code is ({}, {}) over {}, network wants k={} over {}",
                c.k(),
                c.w(),
                c.field(),
                k,
                spec.field()
            )));
        }
    }
    let feasibility = spec.feasibility_check(k, opts.w);
    if !feasibility.individual_feasible && !opts.force {
        return Ok(MulticastReport {
            feasibility,
            refused: true,
            trials: Vec::new(),
            full_success_trials: 0,
            audit: None,
            audited_trial: opts.audit_trial,
            packets_csv: String::new(),
        });
    }

    let trials = map_trials(opts.trials, opts.parallel, |trial| {
        let (messages, codewords) = trial_payloads(spec, code, opts.seed, trial)?;
        let run = spec.rlnc_run(&codewords, subseed(opts.seed, &format!("network/{trial}")))?;
        let mut per_destination = Vec::new();
        for &d in spec.destinations() {
            let ok = match spec.decode_at(run.state_of(d)) {
                DecodeOutcome::Decoded(got) => {
                    got == codewords && decode_messages(code, &got)? == messages
                }
                DecodeOutcome::InsufficientRank(_) => false,
            };
            per_destination.push((spec.node_name(d).to_string(), ok));
        }
        let all = per_destination.iter().all(|(_, ok)| *ok);
        Ok(TrialOutcome {
            trial,
            per_destination,
            all_decoded: all,
        })
    })?;
    let full_success = trials.iter().filter(|t| t.all_decoded).count() as u64;

    // replay the audited trial; trials are pure functions of (seed, index)
    let mut audit = None;
    let mut packets_csv = String::new();
    if opts.audit_trial < opts.trials {
        let (_, codewords) = trial_payloads(spec, code, opts.seed, opts.audit_trial)?;
        let run = spec.rlnc_run(
            &codewords,
            subseed(opts.seed, &format!("network/{}", opts.audit_trial)),
        )?;
        packets_csv = render_packets(spec, &run);
        if let CodeChoice::Coset(c) = code {
            let encoders: Vec<&dyn crate::adversary::ColumnEncoder> =
                spec.sources().iter().map(|_| c as _).collect();
            audit = Some(audit_network_run(
                spec,
                &run,
                &encoders,
                &AuditOptions {
                    w: opts.w,
                    ks: opts.ks,
                    include_joint: false,
                    enumeration_cap: opts.enumeration_cap,
                    max_tap_sets: 100_000,
                },
            )?);
        }
    }
    Ok(MulticastReport {
        feasibility,
        refused: false,
        trials,
        full_success_trials: full_success,
        audit,
        audited_trial: opts.audit_trial,
        packets_csv,
    })
}

/// Messages and codewords of one trial, deterministic in (seed, trial).
pub fn trial_payloads(
    spec: &NetworkSpec,
    code: &CodeChoice,
    seed: u64,
    trial: u64,
) -> Result<(Vec<MessageMatrix>, Vec<CodewordMatrix>)> {
    let mut rng = substream(seed, &format!("messages/{trial}"));
    let mut messages = Vec::new();
    for s in spec.sources() {
        messages.push(MessageMatrix::random(
            spec.node_name(s.node),
            spec.field(),
            s.k,
            spec.payload_len(),
            &mut rng,
        ));
    }
    let codewords = match code {
        CodeChoice::Plain => messages
            .iter()
            .map(|m| CodewordMatrix::new(m.source.clone(), m.data.clone()))
            .collect(),
        CodeChoice::Coset(c) => messages
            .iter()
            .map(|m| c.encode_matrix(m))
            .collect::<Result<_>>()?,
    };
    Ok((messages, codewords))
}

fn decode_messages(code: &CodeChoice, codewords: &[CodewordMatrix]) -> Result<Vec<MessageMatrix>> {
    match code {
        CodeChoice::Plain => Ok(codewords
            .iter()
            .map(|c| MessageMatrix::new(c.source.clone(), c.data.clone()))
            .collect()),
        CodeChoice::Coset(c) => codewords.iter().map(|x| c.decode_matrix(x)).collect(),
    }
}

fn render_packets(spec: &NetworkSpec, run: &RlncRun) -> String {
    let mut s = String::from("unit,coding,payload\n");
    for lp in &run.packets {
        let coding = lp
            .packet
            .coding
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let payload = lp
            .packet
            .payload
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(s, "{},{},{}", spec.unit_label(lp.unit), coding, payload);
    }
    s
}

/// Min-cut tables the `mincut` subcommand prints: all source/destination
/// pairs, the all-sources cut per destination, and the eavesdropper cut per
/// source for every tap set of size `w` (capped).
#[derive(Debug, Clone)]
pub struct MincutTable {
    pub rows: Vec<(String, String, String, usize)>,
    pub truncated: bool,
}

impl MincutTable {
    pub fn csv(&self) -> String {
        let mut s = String::from("kind,from,to,value\n");
        for (kind, a, b, v) in &self.rows {
            let _ = writeln!(s, "{kind},{a},{b},{v}");
        }
        s
    }
}

pub fn mincut_table(spec: &NetworkSpec, w: usize, max_sets: u64) -> Result<MincutTable> {
    let mut rows = Vec::new();
    for s in spec.sources() {
        let sname = spec.node_name(s.node).to_string();
        for &d in spec.destinations() {
            let v = spec.min_cut(&[&sname], spec.node_name(d))?;
            rows.push(("rho(s,d)".to_string(), sname.clone(), spec.node_name(d).to_string(), v));
        }
    }
    let all: Vec<&str> = spec.source_names();
    for &d in spec.destinations() {
        let v = spec.min_cut(&all, spec.node_name(d))?;
        rows.push((
            "rho(S,d)".to_string(),
            "S".to_string(),
            spec.node_name(d).to_string(),
            v,
        ));
    }
    let mut truncated = false;
    if w > 0 {
        let units = spec.edge_units();
        let mut emitted = 0u64;
        let mut sets = Vec::new();
        crate::util::for_each_combination_while(units.len(), w.min(units.len()), |idx| {
            if emitted >= max_sets {
                truncated = true;
                return false;
            }
            sets.push(idx.to_vec());
            emitted += 1;
            true
        });
        for s in spec.sources() {
            let sname = spec.node_name(s.node).to_string();
            for set in &sets {
                let taps: Vec<_> = set.iter().map(|&i| units[i]).collect();
                let label = taps
                    .iter()
                    .map(|&u| spec.unit_label(u))
                    .collect::<Vec<_>>()
                    .join("+");
                let v = spec.eve_min_cut(&[&sname], &taps)?;
                rows.push(("rho(s,z)".to_string(), sname.clone(), label, v));
            }
        }
    }
    Ok(MincutTable { rows, truncated })
}

/// Plain (uncoded) gossip trials plus optional secure experiment.
#[derive(Debug, Clone)]
pub struct GossipExperimentReport {
    pub completions: Vec<Option<u64>>,
    pub rounds_csv: String,
    /// Trace dump of trial 0.
    pub first_trace: String,
    pub secure: Option<SecureGossipReport>,
}

pub fn run_gossip_trials(
    config: &GossipConfig,
    code: Option<&CosetCode>,
    trials: u64,
    seed: u64,
    w: usize,
    ks: usize,
    enumeration_cap: u64,
    parallel: bool,
) -> Result<GossipExperimentReport> {
    let completions: Vec<Option<u64>> = map_trials(trials, parallel, |trial| {
        Ok(plain_gossip_trial(config, seed, trial)?.completion_round)
    })?;
    let first_trace = if trials > 0 {
        plain_gossip_trial(config, seed, 0)?.to_dump()
    } else {
        String::new()
    };
    let mut rounds_csv = String::from("trial,completion_round\n");
    for (i, c) in completions.iter().enumerate() {
        let _ = writeln!(
            rounds_csv,
            "{i},{}",
            c.map_or("stalled".to_string(), |r| r.to_string())
        );
    }
    let secure = match code {
        Some(c) => Some(gossip::secure_gossip_experiment(
            config,
            c,
            &SecureGossipOptions {
                w,
                ks,
                trials,
                significance: 0.01,
                seed,
                enumeration_cap,
                parallel,
            },
        )?),
        None => None,
    };
    Ok(GossipExperimentReport {
        completions,
        rounds_csv,
        first_trace,
        secure,
    })
}

/// One uncoded gossip trial, deterministic in (seed, trial).
pub fn plain_gossip_trial(config: &GossipConfig, seed: u64, trial: u64) -> Result<GossipTrace> {
    let mut rng = substream(seed, &format!("gossip-messages/{trial}"));
    let codewords: Vec<CodewordMatrix> = config
        .sources
        .iter()
        .map(|&node| {
            let m = MessageMatrix::random(
                format!("node{node}"),
                config.field,
                config.k,
                config.payload_len,
                &mut rng,
            );
            CodewordMatrix::new(m.source.clone(), m.data)
        })
        .collect();
    gossip::run(config, &codewords, subseed(seed, &format!("gossip-plain/{trial}")))
}
