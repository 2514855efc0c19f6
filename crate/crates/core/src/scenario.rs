//! Human-editable scenario files with a versioned header.
//!
//! A scenario names an experiment kind (`multicast`, `gossip` or
//! `code-audit`), the instance (graph or gossip population), the source
//! code selection and the adversary parameters. Golden scenario files
//! double as documentation; the grammar is line based:
//!
//! ```text
//! scenario v1
//! kind multicast
//! seed 7
//! field 256
//! payload 8
//! nodes s1 s2 r1 r2 r3 r4 d1 d2 d3 d4
//! edge s1 r1 1
//! source s1 2
//! dest d1 d2 d3 d4
//! w 1
//! ks 1
//! trials 100
//! code search
//! ```
//!
//! Gossip scenarios use `gossip-nodes`, `gossip-exchange`,
//! `gossip-sources`, `gossip-k` and `max-rounds` instead of the graph
//! lines. `code` is one of `none`, `search`, or `coset <path>` (the path is
//! resolved by the caller). Blank lines and `#` comments are ignored;
//! unknown keys are rejected.

use crate::adversary::DEFAULT_ENUMERATION_CAP;
use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::gossip::{Exchange, GossipConfig};
use crate::network::NetworkSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Multicast,
    Gossip,
    CodeAudit,
}

/// How the source code is chosen; file contents are loaded by the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeRef {
    None,
    /// Search for a generator passing the column-subset check.
    Search,
    /// Load a coset-code descriptor from this path.
    CosetFile(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub field: u32,
    pub payload_len: usize,
    pub w: usize,
    pub ks: usize,
    pub trials: u64,
    pub enumeration_cap: u64,
    pub code: CodeRef,
    // multicast instance
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String, usize)>,
    pub sources: Vec<(String, usize)>,
    pub dests: Vec<String>,
    // gossip instance
    pub gossip_nodes: usize,
    pub gossip_exchange: Exchange,
    pub gossip_sources: Vec<usize>,
    pub gossip_k: usize,
    pub max_rounds: u64,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        let mut kind = None;
        let mut sc = Scenario {
            kind: ScenarioKind::Multicast,
            seed: 0,
            field: 2,
            payload_len: 4,
            w: 0,
            ks: 1,
            trials: 1,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            code: CodeRef::None,
            nodes: Vec::new(),
            edges: Vec::new(),
            sources: Vec::new(),
            dests: Vec::new(),
            gossip_nodes: 0,
            gossip_exchange: Exchange::PushPull,
            gossip_sources: Vec::new(),
            gossip_k: 1,
            max_rounds: 10_000,
        };
        let mut saw_header = false;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = no + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: lineno, msg };
            if !saw_header {
                if line != "scenario v1" {
                    return Err(err(format!("expected `scenario v1`, found `{line}`")));
                }
                saw_header = true;
                continue;
            }
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let words: Vec<&str> = rest.split_whitespace().collect();
            let num = |s: &str, what: &str| -> Result<u64> {
                s.parse()
                    .map_err(|e| err(format!("bad {what} `{s}`: {e}")))
            };
            match key {
                "kind" => {
                    kind = Some(match rest {
                        "multicast" => ScenarioKind::Multicast,
                        "gossip" => ScenarioKind::Gossip,
                        "code-audit" => ScenarioKind::CodeAudit,
                        other => return Err(err(format!("unknown kind `{other}`"))),
                    });
                }
                "seed" => sc.seed = num(rest, "seed")?,
                "field" => sc.field = num(rest, "field order")? as u32,
                "payload" => sc.payload_len = num(rest, "payload length")? as usize,
                "w" => sc.w = num(rest, "w")? as usize,
                "ks" => sc.ks = num(rest, "ks")? as usize,
                "trials" => sc.trials = num(rest, "trials")?,
                "cap" => sc.enumeration_cap = num(rest, "cap")?,
                "max-rounds" => sc.max_rounds = num(rest, "max-rounds")?,
                "nodes" => sc.nodes.extend(words.iter().map(|s| s.to_string())),
                "node" => {
                    if words.len() != 1 {
                        return Err(err("`node` takes one name".into()));
                    }
                    sc.nodes.push(words[0].to_string());
                }
                "edge" => {
                    let mult = match words.len() {
                        2 => 1,
                        3 => num(words[2], "multiplicity")? as usize,
                        _ => return Err(err("`edge` takes `from to [multiplicity]`".into())),
                    };
                    sc.edges
                        .push((words[0].to_string(), words[1].to_string(), mult));
                }
                "source" => {
                    if words.len() != 2 {
                        return Err(err("`source` takes `node k`".into()));
                    }
                    sc.sources
                        .push((words[0].to_string(), num(words[1], "k")? as usize));
                }
                "dest" => sc.dests.extend(words.iter().map(|s| s.to_string())),
                "gossip-nodes" => sc.gossip_nodes = num(rest, "gossip-nodes")? as usize,
                "gossip-exchange" => {
                    sc.gossip_exchange = match rest {
                        "push" => Exchange::Push,
                        "pull" => Exchange::Pull,
                        "push-pull" => Exchange::PushPull,
                        other => return Err(err(format!("unknown exchange `{other}`"))),
                    };
                }
                "gossip-sources" => {
                    for wd in &words {
                        sc.gossip_sources.push(num(wd, "gossip source id")? as usize);
                    }
                }
                "gossip-k" => sc.gossip_k = num(rest, "gossip-k")? as usize,
                "code" => {
                    sc.code = match words.as_slice() {
                        ["none"] => CodeRef::None,
                        ["search"] => CodeRef::Search,
                        ["coset", path] => CodeRef::CosetFile(path.to_string()),
                        _ => return Err(err(format!("bad code selection `{rest}`"))),
                    };
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        if !saw_header {
            return Err(Error::Parse {
                line: 0,
                msg: "missing `scenario v1` header".into(),
            });
        }
        sc.kind = kind.ok_or(Error::Parse {
            line: 0,
            msg: "missing `kind`".into(),
        })?;
        sc.validate()?;
        Ok(sc)
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            ScenarioKind::Multicast => {
                if self.nodes.is_empty() || self.sources.is_empty() || self.dests.is_empty() {
                    return Err(Error::InvalidParameter(
                        "multicast scenario needs nodes, sources and dests".into(),
                    ));
                }
            }
            ScenarioKind::Gossip => {
                if self.gossip_nodes < 2 || self.gossip_sources.is_empty() {
                    return Err(Error::InvalidParameter(
                        "gossip scenario needs gossip-nodes >= 2 and gossip-sources".into(),
                    ));
                }
            }
            ScenarioKind::CodeAudit => {
                if self.code == CodeRef::None {
                    return Err(Error::InvalidParameter(
                        "code-audit scenario needs a code selection".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Materialize the multicast instance.
    pub fn to_network_spec(&self) -> Result<NetworkSpec> {
        let field = FieldSpec::new(self.field)?;
        let mut net = NetworkSpec::new(field, self.payload_len);
        for n in &self.nodes {
            net.add_node(n)?;
        }
        for (from, to, mult) in &self.edges {
            net.add_edge(from, to, *mult)?;
        }
        for (node, k) in &self.sources {
            net.add_source(node, *k)?;
        }
        for d in &self.dests {
            net.add_destination(d)?;
        }
        Ok(net)
    }

    /// Materialize the gossip instance.
    pub fn to_gossip_config(&self) -> Result<GossipConfig> {
        let config = GossipConfig {
            nodes: self.gossip_nodes,
            exchange: self.gossip_exchange,
            field: FieldSpec::new(self.field)?,
            sources: self.gossip_sources.clone(),
            k: self.gossip_k,
            payload_len: self.payload_len,
            max_rounds: self.max_rounds,
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MULTICAST: &str = "\
scenario v1
kind multicast
seed 7
field 256
payload 8
nodes s1 s2 r1 r2 r3 r4 d1 d2 d3 d4
edge s1 r1
edge s1 r2
edge s2 r3
edge s2 r4
edge r1 d1
edge r1 d2
edge r1 d3
edge r1 d4
edge r2 d1
edge r2 d2
edge r2 d3
edge r2 d4
edge r3 d1
edge r3 d2
edge r3 d3
edge r3 d4
edge r4 d1
edge r4 d2
edge r4 d3
edge r4 d4
source s1 2
source s2 2
dest d1 d2 d3 d4
w 1
ks 1
trials 100
code search
";

    #[test]
    fn parses_multicast() {
        let sc = Scenario::parse(MULTICAST).unwrap();
        assert_eq!(sc.kind, ScenarioKind::Multicast);
        assert_eq!(sc.seed, 7);
        assert_eq!(sc.field, 256);
        assert_eq!(sc.code, CodeRef::Search);
        let net = sc.to_network_spec().unwrap();
        assert_eq!(net.node_count(), 10);
        assert_eq!(net.min_cut(&["s1"], "d1").unwrap(), 2);
        assert_eq!(net.min_cut(&["s1", "s2"], "d1").unwrap(), 4);
    }

    #[test]
    fn parses_gossip() {
        let text = "\
scenario v1
kind gossip
seed 11
field 2
payload 4
gossip-nodes 16
gossip-exchange push-pull
gossip-sources 0 1
gossip-k 4
trials 200
w 1
code none
";
        let sc = Scenario::parse(text).unwrap();
        assert_eq!(sc.kind, ScenarioKind::Gossip);
        let cfg = sc.to_gossip_config().unwrap();
        assert_eq!(cfg.nodes, 16);
        assert_eq!(cfg.sources, vec![0, 1]);
        assert_eq!(cfg.k, 4);
        assert_eq!(cfg.exchange, Exchange::PushPull);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(Scenario::parse("").is_err());
        assert!(Scenario::parse("scenario v2\nkind multicast\n").is_err());
        assert!(Scenario::parse("scenario v1\n").is_err(), "kind is required");
        assert!(Scenario::parse("scenario v1\nkind multicast\nbogus 3\n").is_err());
        assert!(
            Scenario::parse("scenario v1\nkind multicast\n").is_err(),
            "multicast needs an instance"
        );
        assert!(Scenario::parse("scenario v1\nkind gossip\ngossip-nodes 1\ngossip-sources 0\n").is_err());
        let bad_edge = "scenario v1\nkind multicast\nnodes a b\nedge a\nsource a 1\ndest b\n";
        assert!(Scenario::parse(bad_edge).is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "\
# demo
scenario v1

kind gossip
# population
gossip-nodes 4
gossip-sources 0
gossip-k 2
";
        let sc = Scenario::parse(text).unwrap();
        assert_eq!(sc.gossip_nodes, 4);
        assert_eq!(sc.gossip_k, 2);
    }
}
