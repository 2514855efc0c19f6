//! Directed unit-capacity multicast instances.
//!
//! A [`NetworkSpec`] is a finite directed graph with noise-free unit-capacity
//! edges (parallel capacity modeled by an explicit multiplicity), a set of
//! sources holding message rows, and a set of destinations. On top of it:
//! min-cut queries (plain and through an eavesdropper's virtual sink),
//! feasibility checks for individually-secure and naive strong-secrecy
//! rates, a seeded single-generation packet dissemination that logs every
//! packet, destination decoding, and the rate-versus-taps diagnostic bound.

mod flow;

pub use flow::FlowNetwork;

use crate::coset::CodewordMatrix;
use crate::error::{Error, Result};
use crate::gf::{FieldMatrix, FieldSpec};
use crate::util::{binomial, for_each_combination, substream};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// A directed edge with parallel capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpec {
    pub node: usize,
    pub k: usize,
}

/// One unit of one edge: the atomic thing a packet crosses and a wiretap
/// grabs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct EdgeUnit {
    pub edge: usize,
    pub copy: usize,
}

/// Coding vector over the stacked source rows plus the payload it encodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedPacket {
    pub coding: Vec<u32>,
    pub payload: Vec<u32>,
}

/// A packet together with the edge unit that carried it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoggedPacket {
    pub unit: EdgeUnit,
    pub packet: CodedPacket,
}

/// What a node has received (sources' own rows are not listed here).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeState {
    pub node: usize,
    pub field: FieldSpec,
    /// Total stacked source rows; the decoding target rank.
    pub width: usize,
    pub packets: Vec<CodedPacket>,
}

impl NodeState {
    /// Received coding vectors stacked into a matrix.
    pub fn decoding_matrix(&self) -> FieldMatrix {
        let rows = self.packets.iter().map(|p| p.coding.clone()).collect();
        FieldMatrix::from_rows(self.field, rows).expect("packets share the coding width")
    }

    pub fn rank(&self) -> usize {
        if self.packets.is_empty() {
            0
        } else {
            self.decoding_matrix().rank()
        }
    }
}

/// Result of a full dissemination run.
#[derive(Debug, Clone)]
pub struct RlncRun {
    pub packets: Vec<LoggedPacket>,
    pub states: Vec<NodeState>,
}

impl RlncRun {
    pub fn state_of(&self, node: usize) -> &NodeState {
        &self.states[node]
    }

    /// Packets logged on the given edge units, in log order.
    pub fn packets_on(&self, taps: &[EdgeUnit]) -> Vec<CodedPacket> {
        self.packets
            .iter()
            .filter(|p| taps.contains(&p.unit))
            .map(|p| p.packet.clone())
            .collect()
    }
}

/// Destination decoding outcome; rank shortfalls are data, not faults.
#[derive(Debug, Clone, PartialEq)]
pub enum DecodeOutcome {
    Decoded(Vec<CodewordMatrix>),
    InsufficientRank(usize),
}

/// A multicast instance. Nodes are created by name; all other methods take
/// names too and resolve them internally.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    field: FieldSpec,
    payload_len: usize,
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    edges: Vec<EdgeSpec>,
    sources: Vec<SourceSpec>,
    destinations: Vec<usize>,
    allow_source_destination_overlap: bool,
}

impl NetworkSpec {
    pub fn new(field: FieldSpec, payload_len: usize) -> Self {
        NetworkSpec {
            field,
            payload_len,
            names: Vec::new(),
            index: BTreeMap::new(),
            edges: Vec::new(),
            sources: Vec::new(),
            destinations: Vec::new(),
            allow_source_destination_overlap: false,
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn add_node(&mut self, name: &str) -> Result<usize> {
        if self.index.contains_key(name) {
            return Err(Error::InvalidParameter(format!("duplicate node `{name}`")));
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn node_index(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn node_name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    /// Add a directed edge; parallel capacity goes through `multiplicity`,
    /// not repeated `(from, to)` entries.
    pub fn add_edge(&mut self, from: &str, to: &str, multiplicity: usize) -> Result<usize> {
        let (f, t) = (self.node_index(from)?, self.node_index(to)?);
        if multiplicity == 0 {
            return Err(Error::InvalidParameter(format!(
                "edge {from}->{to} with zero multiplicity"
            )));
        }
        if f == t {
            return Err(Error::InvalidParameter(format!("self-loop on `{from}`")));
        }
        if self.edges.iter().any(|e| e.from == f && e.to == t) {
            return Err(Error::InvalidParameter(format!(
                "duplicate edge {from}->{to}; raise the multiplicity instead"
            )));
        }
        self.edges.push(EdgeSpec {
            from: f,
            to: t,
            multiplicity,
        });
        Ok(self.edges.len() - 1)
    }

    pub fn add_source(&mut self, node: &str, k: usize) -> Result<()> {
        let id = self.node_index(node)?;
        if self.sources.iter().any(|s| s.node == id) {
            return Err(Error::InvalidParameter(format!("duplicate source `{node}`")));
        }
        if k == 0 {
            return Err(Error::InvalidParameter(format!("source `{node}` with k=0")));
        }
        self.sources.push(SourceSpec { node: id, k });
        self.check_overlap()
    }

    pub fn add_destination(&mut self, node: &str) -> Result<()> {
        let id = self.node_index(node)?;
        if self.destinations.contains(&id) {
            return Err(Error::InvalidParameter(format!(
                "duplicate destination `{node}`"
            )));
        }
        self.destinations.push(id);
        self.check_overlap()
    }

    /// Permit a node to be both source and destination. Off by default.
    pub fn allow_source_destination_overlap(&mut self) {
        self.allow_source_destination_overlap = true;
    }

    fn check_overlap(&self) -> Result<()> {
        if self.allow_source_destination_overlap {
            return Ok(());
        }
        for s in &self.sources {
            if self.destinations.contains(&s.node) {
                return Err(Error::InvalidParameter(format!(
                    "node `{}` is both source and destination; flag the overlap explicitly",
                    self.names[s.node]
                )));
            }
        }
        Ok(())
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    pub fn sources(&self) -> &[SourceSpec] {
        &self.sources
    }

    pub fn source_names(&self) -> Vec<&str> {
        self.sources.iter().map(|s| self.names[s.node].as_str()).collect()
    }

    pub fn destinations(&self) -> &[usize] {
        &self.destinations
    }

    pub fn destination_names(&self) -> Vec<&str> {
        self.destinations.iter().map(|&d| self.names[d].as_str()).collect()
    }

    /// Total stacked message rows over all sources.
    pub fn total_rows(&self) -> usize {
        self.sources.iter().map(|s| s.k).sum()
    }

    /// Row range of the given source (by position in the source list) in the
    /// stacked coding vector.
    pub fn source_block(&self, source_pos: usize) -> std::ops::Range<usize> {
        let start: usize = self.sources[..source_pos].iter().map(|s| s.k).sum();
        start..start + self.sources[source_pos].k
    }

    /// Every edge unit in deterministic (edge, copy) order.
    pub fn edge_units(&self) -> Vec<EdgeUnit> {
        let mut units = Vec::new();
        for (e, spec) in self.edges.iter().enumerate() {
            for c in 0..spec.multiplicity {
                units.push(EdgeUnit { edge: e, copy: c });
            }
        }
        units
    }

    pub fn unit_label(&self, unit: EdgeUnit) -> String {
        let e = &self.edges[unit.edge];
        format!(
            "{}->{}#{}",
            self.names[e.from], self.names[e.to], unit.copy
        )
    }

    fn flow_of_graph(&self) -> FlowNetwork {
        let mut net = FlowNetwork::new(self.names.len());
        for e in &self.edges {
            net.add_edge(e.from, e.to, e.multiplicity as u64);
        }
        net
    }

    /// Min edge cut (= max flow) from a set of nodes to a target; a virtual
    /// super-source feeds the set when it has more than one member.
    /// Unreachable targets give 0.
    pub fn min_cut(&self, from: &[&str], to: &str) -> Result<usize> {
        let to_id = self.node_index(to)?;
        let mut from_ids = Vec::new();
        for name in from {
            let id = self.node_index(name)?;
            if id == to_id {
                return Err(Error::InvalidParameter(format!(
                    "target `{to}` is in the source set"
                )));
            }
            from_ids.push(id);
        }
        if from_ids.is_empty() {
            return Err(Error::InvalidParameter("empty source set".into()));
        }
        let mut net = self.flow_of_graph();
        let s = if from_ids.len() == 1 {
            from_ids[0]
        } else {
            let s = net.add_node();
            for &f in &from_ids {
                net.add_edge(s, f, u64::MAX / 4);
            }
            s
        };
        Ok(net.max_flow(s, to_id) as usize)
    }

    /// Min cut from `from` to a virtual eavesdropper node fed by the tapped
    /// edge units: each tapped unit is split so one unit of its capacity can
    /// divert to the sink.
    pub fn eve_min_cut(&self, from: &[&str], taps: &[EdgeUnit]) -> Result<usize> {
        for t in taps {
            if t.edge >= self.edges.len() || t.copy >= self.edges[t.edge].multiplicity {
                return Err(Error::InvalidParameter(format!(
                    "tap on nonexistent edge unit {t:?}"
                )));
            }
        }
        let mut from_ids = Vec::new();
        for name in from {
            from_ids.push(self.node_index(name)?);
        }
        if from_ids.is_empty() {
            return Err(Error::InvalidParameter("empty source set".into()));
        }
        // count tapped units per edge
        let mut tapped: BTreeMap<usize, u64> = BTreeMap::new();
        for t in taps {
            *tapped.entry(t.edge).or_insert(0) += 1;
        }
        let mut net = FlowNetwork::new(self.names.len());
        let z = net.add_node();
        for (e, spec) in self.edges.iter().enumerate() {
            let t = tapped.get(&e).copied().unwrap_or(0).min(spec.multiplicity as u64);
            let untapped = spec.multiplicity as u64 - t;
            if untapped > 0 {
                net.add_edge(spec.from, spec.to, untapped);
            }
            if t > 0 {
                // tapped units pass through a splitter that also feeds z
                let mid = net.add_node();
                net.add_edge(spec.from, mid, t);
                net.add_edge(mid, spec.to, t);
                net.add_edge(mid, z, t);
            }
        }
        let s = if from_ids.len() == 1 {
            from_ids[0]
        } else {
            let s = net.add_node();
            for &f in &from_ids {
                net.add_edge(s, f, u64::MAX / 4);
            }
            s
        };
        Ok(net.max_flow(s, z) as usize)
    }

    /// Evaluate the cut conditions for disseminating `k` messages per source
    /// under individual security, and the naive strong-secrecy conditions
    /// with eavesdropper budget `w` for comparison.
    pub fn feasibility_check(&self, k: usize, w: usize) -> FeasibilityReport {
        let ns = self.sources.len();
        let mut per_pair = Vec::new();
        let mut per_dest = Vec::new();
        for s in &self.sources {
            for &d in &self.destinations {
                let cut = self
                    .min_cut(&[self.names[s.node].as_str()], &self.names[d])
                    .unwrap_or(0);
                per_pair.push(PairCut {
                    source: self.names[s.node].clone(),
                    dest: self.names[d].clone(),
                    cut,
                    ok_individual: cut >= k,
                    ok_strong: cut >= k + w,
                });
            }
        }
        let all_sources: Vec<&str> = self.source_names();
        for &d in &self.destinations {
            let cut = self.min_cut(&all_sources, &self.names[d]).unwrap_or(0);
            per_dest.push(DestCut {
                dest: self.names[d].clone(),
                cut,
                need_individual: k * ns,
                need_strong: (k + w) * ns,
                ok_individual: cut >= k * ns,
                ok_strong: cut >= (k + w) * ns,
            });
        }
        let nonempty = !self.sources.is_empty() && !self.destinations.is_empty();
        FeasibilityReport {
            k,
            w,
            num_sources: ns,
            individual_feasible: nonempty
                && per_pair.iter().all(|p| p.ok_individual)
                && per_dest.iter().all(|d| d.ok_individual),
            naive_strong_feasible: nonempty
                && per_pair.iter().all(|p| p.ok_strong)
                && per_dest.iter().all(|d| d.ok_strong),
            per_pair,
            per_dest,
        }
    }

    /// Deterministic topological order (lowest node id first among ready
    /// nodes); errors on cycles.
    fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.names.len();
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            indeg[e.to] += 1;
        }
        let mut order = Vec::with_capacity(n);
        let mut done = vec![false; n];
        for _ in 0..n {
            let Some(u) = (0..n).find(|&u| !done[u] && indeg[u] == 0) else {
                return Err(Error::UnsupportedTopology);
            };
            done[u] = true;
            order.push(u);
            for e in &self.edges {
                if e.from == u {
                    indeg[e.to] -= 1;
                }
            }
        }
        Ok(order)
    }

    /// Single-generation dissemination: nodes are processed in topological
    /// order; every edge unit carries one packet, a uniform random
    /// combination of everything the sending node holds at that point
    /// (sources hold their own rows). Deterministic and replayable from the
    /// seed.
    pub fn rlnc_run(&self, codewords: &[CodewordMatrix], seed: u64) -> Result<RlncRun> {
        if codewords.len() != self.sources.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} codeword matrices for {} sources",
                codewords.len(),
                self.sources.len()
            )));
        }
        for (pos, (cw, src)) in codewords.iter().zip(&self.sources).enumerate() {
            if cw.source != self.names[src.node] {
                return Err(Error::InvalidParameter(format!(
                    "codeword matrix {pos} is for `{}`, expected `{}`",
                    cw.source, self.names[src.node]
                )));
            }
            if cw.data.rows() != src.k
                || cw.data.cols() != self.payload_len
                || cw.data.field() != self.field
            {
                return Err(Error::DimensionMismatch(format!(
                    "codeword matrix for `{}` is {}x{} over {}, expected {}x{} over {}",
                    cw.source,
                    cw.data.rows(),
                    cw.data.cols(),
                    cw.data.field(),
                    src.k,
                    self.payload_len,
                    self.field
                )));
            }
        }
        let order = self.topological_order()?;
        let width = self.total_rows();
        let f = self.field;
        let mut rng = substream(seed, "rlnc");

        // what each node can combine: sources start with their own rows
        let mut holdings: Vec<Vec<CodedPacket>> = vec![Vec::new(); self.names.len()];
        for (pos, src) in self.sources.iter().enumerate() {
            let block = self.source_block(pos);
            for (i, row) in block.clone().enumerate() {
                let mut coding = vec![0u32; width];
                coding[row] = 1;
                holdings[src.node].push(CodedPacket {
                    coding,
                    payload: codewords[pos].data.row(i).to_vec(),
                });
            }
        }

        let mut states: Vec<NodeState> = (0..self.names.len())
            .map(|node| NodeState {
                node,
                field: f,
                width,
                packets: Vec::new(),
            })
            .collect();
        let mut log = Vec::new();

        for &u in &order {
            for (e, spec) in self.edges.iter().enumerate() {
                if spec.from != u {
                    continue;
                }
                for copy in 0..spec.multiplicity {
                    let packet = combine(f, width, self.payload_len, &holdings[u], &mut rng);
                    log.push(LoggedPacket {
                        unit: EdgeUnit { edge: e, copy },
                        packet: packet.clone(),
                    });
                    states[spec.to].packets.push(packet.clone());
                    holdings[spec.to].push(packet);
                }
            }
        }
        Ok(RlncRun {
            packets: log,
            states,
        })
    }

    /// Recover every source's codeword matrix from a node's received
    /// packets, or report the achieved rank.
    pub fn decode_at(&self, state: &NodeState) -> DecodeOutcome {
        let width = self.total_rows();
        if state.packets.is_empty() {
            return DecodeOutcome::InsufficientRank(0);
        }
        let coding = state.decoding_matrix();
        let payload_rows: Vec<Vec<u32>> =
            state.packets.iter().map(|p| p.payload.clone()).collect();
        let payloads = FieldMatrix::from_rows(self.field, payload_rows)
            .expect("payloads share the packet width");
        let aug = coding.augment(&payloads).expect("same row count");
        let (r, pivots) = aug.rref_prefix(width);
        if pivots.len() < width {
            return DecodeOutcome::InsufficientRank(pivots.len());
        }
        let mut out = Vec::with_capacity(self.sources.len());
        for (pos, src) in self.sources.iter().enumerate() {
            let block = self.source_block(pos);
            let mut data = FieldMatrix::zero(self.field, src.k, self.payload_len);
            for (i, row) in block.clone().enumerate() {
                for j in 0..self.payload_len {
                    data.set(i, j, r.get(row, width + j));
                }
            }
            out.push(CodewordMatrix {
                source: self.names[src.node].clone(),
                data,
            });
        }
        DecodeOutcome::Decoded(out)
    }

    /// Rate bound against a specific tap set: `rho(s,d) - rho(s,z) + w`,
    /// clamped at zero.
    pub fn converse_bound(
        &self,
        source: &str,
        dest: &str,
        w: usize,
        taps: &[EdgeUnit],
    ) -> Result<usize> {
        let rho_sd = self.min_cut(&[source], dest)?;
        let rho_sz = self.eve_min_cut(&[source], taps)?;
        Ok((rho_sd + w).saturating_sub(rho_sz))
    }

    /// The bound over every tap set of the given size (or a capped prefix of
    /// them, flagged non-exhaustive), with the worst case called out.
    pub fn converse_bound_table(
        &self,
        source: &str,
        dest: &str,
        w: usize,
        tap_size: usize,
        max_sets: u64,
    ) -> Result<ConverseReport> {
        let rho_sd = self.min_cut(&[source], dest)?;
        let units = self.edge_units();
        let total = binomial(units.len() as u64, tap_size as u64);
        let exhaustive = total <= max_sets;
        let mut rows = Vec::new();
        let mut emitted = 0u64;
        crate::util::for_each_combination_while(units.len(), tap_size, |idx| {
            if emitted >= max_sets {
                return false;
            }
            emitted += 1;
            let taps: Vec<EdgeUnit> = idx.iter().map(|&i| units[i]).collect();
            let rho_sz = self.eve_min_cut(&[source], &taps).expect("valid taps");
            let bound = (rho_sd + w).saturating_sub(rho_sz);
            let label = taps
                .iter()
                .map(|&u| self.unit_label(u))
                .collect::<Vec<_>>()
                .join("+");
            rows.push(ConverseRow {
                taps: label,
                rho_sz,
                bound,
            });
            true
        });
        let worst = rows
            .iter()
            .min_by_key(|r| r.bound)
            .map(|r| (r.taps.clone(), r.bound));
        Ok(ConverseReport {
            source: source.to_string(),
            dest: dest.to_string(),
            w,
            tap_size,
            rho_sd,
            rows,
            worst,
            exhaustive,
        })
    }

    /// The running example: two sources fanning out through four relays to
    /// four destinations. Per-source/destination cut 2, all-sources cut 4,
    /// and any single tapped edge yields an eavesdropper cut of at most 1.
    pub fn two_source_relay(field: FieldSpec, payload_len: usize) -> Self {
        let mut net = NetworkSpec::new(field, payload_len);
        for name in ["s1", "s2", "r1", "r2", "r3", "r4", "d1", "d2", "d3", "d4"] {
            net.add_node(name).unwrap();
        }
        for (s, rs) in [("s1", ["r1", "r2"]), ("s2", ["r3", "r4"])] {
            for r in rs {
                net.add_edge(s, r, 1).unwrap();
            }
        }
        for r in ["r1", "r2", "r3", "r4"] {
            for d in ["d1", "d2", "d3", "d4"] {
                net.add_edge(r, d, 1).unwrap();
            }
        }
        net.add_source("s1", 2).unwrap();
        net.add_source("s2", 2).unwrap();
        for d in ["d1", "d2", "d3", "d4"] {
            net.add_destination(d).unwrap();
        }
        net
    }
}

fn combine<R: Rng + ?Sized>(
    f: FieldSpec,
    width: usize,
    payload_len: usize,
    held: &[CodedPacket],
    rng: &mut R,
) -> CodedPacket {
    let mut coding = vec![0u32; width];
    let mut payload = vec![0u32; payload_len];
    for p in held {
        let coeff = f.random_element(rng);
        if coeff == 0 {
            continue;
        }
        for (acc, &v) in coding.iter_mut().zip(&p.coding) {
            *acc = f.add(*acc, f.mul(coeff, v));
        }
        for (acc, &v) in payload.iter_mut().zip(&p.payload) {
            *acc = f.add(*acc, f.mul(coeff, v));
        }
    }
    CodedPacket { coding, payload }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCut {
    pub source: String,
    pub dest: String,
    pub cut: usize,
    pub ok_individual: bool,
    pub ok_strong: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DestCut {
    pub dest: String,
    pub cut: usize,
    pub need_individual: usize,
    pub need_strong: usize,
    pub ok_individual: bool,
    pub ok_strong: bool,
}

/// Outcome of [`NetworkSpec::feasibility_check`]; `render` spells out both
/// rate conditions with the offending cuts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub k: usize,
    pub w: usize,
    pub num_sources: usize,
    pub per_pair: Vec<PairCut>,
    pub per_dest: Vec<DestCut>,
    pub individual_feasible: bool,
    pub naive_strong_feasible: bool,
}

impl FeasibilityReport {
    /// First violated condition, spelled out, if any.
    pub fn individual_violation(&self) -> Option<String> {
        if let Some(p) = self.per_pair.iter().find(|p| !p.ok_individual) {
            return Some(format!(
                "rho(s,d) >= k violated: rho({},{}) = {} < k = {}",
                p.source, p.dest, p.cut, self.k
            ));
        }
        if let Some(d) = self.per_dest.iter().find(|d| !d.ok_individual) {
            return Some(format!(
                "rho(S,d) >= k|S| violated: rho(S,{}) = {} < {}",
                d.dest, d.cut, d.need_individual
            ));
        }
        if self.per_pair.is_empty() || self.per_dest.is_empty() {
            return Some("no sources or no destinations".into());
        }
        None
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "feasibility for k={} messages per source, w={}", self.k, self.w);
        let _ = writeln!(
            s,
            "individual security needs rho(s,d) >= k and rho(S,d) >= k|S| (k|S| = {})",
            self.k * self.num_sources
        );
        let _ = writeln!(
            s,
            "naive strong secrecy needs rho(s,d) >= k+w = {} and rho(S,d) >= (k+w)|S| = {}",
            self.k + self.w,
            (self.k + self.w) * self.num_sources
        );
        for p in &self.per_pair {
            let _ = writeln!(
                s,
                "  rho({},{}) = {}  individual:{}  strong:{}",
                p.source,
                p.dest,
                p.cut,
                if p.ok_individual { "ok" } else { "VIOLATED" },
                if p.ok_strong { "ok" } else { "VIOLATED" },
            );
        }
        for d in &self.per_dest {
            let _ = writeln!(
                s,
                "  rho(S,{}) = {}  individual(>= {}):{}  strong(>= {}):{}",
                d.dest,
                d.cut,
                d.need_individual,
                if d.ok_individual { "ok" } else { "VIOLATED" },
                d.need_strong,
                if d.ok_strong { "ok" } else { "VIOLATED" },
            );
        }
        let _ = writeln!(
            s,
            "individually secure dissemination feasible: {}",
            if self.individual_feasible { "yes" } else { "no" }
        );
        let _ = writeln!(
            s,
            "naive strong secrecy feasible: {}",
            if self.naive_strong_feasible { "yes" } else { "no" }
        );
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConverseRow {
    pub taps: String,
    pub rho_sz: usize,
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConverseReport {
    pub source: String,
    pub dest: String,
    pub w: usize,
    pub tap_size: usize,
    pub rho_sd: usize,
    pub rows: Vec<ConverseRow>,
    /// Tap set with the smallest bound.
    pub worst: Option<(String, usize)>,
    pub exhaustive: bool,
}
