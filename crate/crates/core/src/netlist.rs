//! Node-indexed circuit representation, plus a SPICE-like text format.
//!
//! Grammar (one element per line, `*` starts a comment):
//!
//! ```text
//! M<label> <d> <g> <s> nch|pch tubes=<int> [chirality=<m>,<n>]
//! R<label> <a> <b> <ohms>
//! C<label> <a> <b> <farads>
//! V<label> <a> <b> dc <volts>
//! V<label> <a> <b> pwl (t1 v1 t2 v2 ...)
//! .port <name> <node>
//! .end
//! ```
//!
//! Node `0` or `gnd` is ground; all other node names map to dense indices in
//! first-appearance order. SI suffixes k, m, u, n, p, f are accepted on
//! numeric values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::device::{Chirality, CntfetParams, DeviceInstance, Polarity};
use crate::waveform::Waveform;

/// Dense circuit node index; 0 is always ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const GROUND: NodeId = NodeId(0);

    pub fn is_ground(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    CntfetN,
    CntfetP,
    VSource,
    Resistor,
    Capacitor,
}

#[derive(Debug, Clone)]
pub enum ElementValue {
    Cntfet(DeviceInstance),
    Source(Waveform),
    /// Ohms.
    Resistance(f64),
    /// Farads.
    Capacitance(f64),
}

/// One circuit element. CNTFET terminals are ordered (drain, gate, source);
/// two-terminal elements are (a, b).
#[derive(Debug, Clone)]
pub struct Element {
    pub label: String,
    pub terminals: Vec<NodeId>,
    pub value: ElementValue,
}

impl Element {
    pub fn kind(&self) -> ElementKind {
        match &self.value {
            ElementValue::Cntfet(d) => match d.polarity {
                Polarity::N => ElementKind::CntfetN,
                Polarity::P => ElementKind::CntfetP,
            },
            ElementValue::Source(_) => ElementKind::VSource,
            ElementValue::Resistance(_) => ElementKind::Resistor,
            ElementValue::Capacitance(_) => ElementKind::Capacitor,
        }
    }
}

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("line {line}, col {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate element label `{0}`")]
    DuplicateLabel(String),
    #[error("duplicate node name `{0}`")]
    DuplicateNodeName(String),
    #[error(".port `{0}` refers to undefined node `{1}`")]
    UndefinedPortNode(String, String),
    #[error("element `{0}`: {1}")]
    BadElement(String, String),
    #[error("node {0} is disconnected from ground")]
    DisconnectedNode(usize),
    #[error("device error: {0}")]
    Device(#[from] crate::device::DeviceError),
}

/// Immutable node-indexed netlist with named ports.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub elements: Vec<Element>,
    pub node_count: usize,
    /// Port name -> node, sorted by name for deterministic iteration.
    pub ports: BTreeMap<String, NodeId>,
    /// Node -> name for nodes that carry one.
    node_names: Vec<Option<String>>,
}

impl Circuit {
    pub fn port(&self, name: &str) -> Option<NodeId> {
        self.ports.get(name).copied()
    }

    pub fn node_name(&self, node: NodeId) -> Option<&str> {
        self.node_names.get(node.0).and_then(|n| n.as_deref())
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        if name == "0" || name.eq_ignore_ascii_case("gnd") {
            return Some(NodeId::GROUND);
        }
        self.node_names
            .iter()
            .position(|n| n.as_deref() == Some(name))
            .map(NodeId)
    }

    pub fn vsource_labels(&self) -> Vec<&str> {
        self.elements
            .iter()
            .filter(|e| e.kind() == ElementKind::VSource)
            .map(|e| e.label.as_str())
            .collect()
    }

    pub fn find_element(&self, label: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.label == label)
    }

    /// Replaces the waveform of the named source. Returns false when no
    /// source carries the label.
    pub fn set_source_value(&mut self, label: &str, wave: Waveform) -> bool {
        for e in &mut self.elements {
            if e.label == label {
                if let ElementValue::Source(w) = &mut e.value {
                    *w = wave;
                    return true;
                }
            }
        }
        false
    }
}

/// Incremental circuit constructor.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    elements: Vec<Element>,
    names: BTreeMap<String, NodeId>,
    node_names: Vec<Option<String>>,
    ports: BTreeMap<String, NodeId>,
    next: usize,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        CircuitBuilder {
            elements: Vec::new(),
            names: BTreeMap::new(),
            node_names: vec![Some("gnd".to_string())],
            ports: BTreeMap::new(),
            next: 1,
        }
    }

    /// Seeds the builder with an existing circuit, preserving node indices,
    /// names and ports, so testbench elements can be layered on top.
    pub fn from_circuit(c: &Circuit) -> Self {
        let mut names = BTreeMap::new();
        for (i, n) in c.node_names.iter().enumerate() {
            if i == 0 {
                continue;
            }
            if let Some(name) = n {
                names.insert(name.clone(), NodeId(i));
            }
        }
        CircuitBuilder {
            elements: c.elements.clone(),
            names,
            node_names: c.node_names.clone(),
            ports: c.ports.clone(),
            next: c.node_count,
        }
    }

    /// Returns the node with the given name, creating it on first use.
    /// `0` and `gnd` are the ground node.
    pub fn node(&mut self, name: &str) -> NodeId {
        if name == "0" || name.eq_ignore_ascii_case("gnd") {
            return NodeId::GROUND;
        }
        if let Some(&id) = self.names.get(name) {
            return id;
        }
        let id = NodeId(self.next);
        self.next += 1;
        self.names.insert(name.to_string(), id);
        self.node_names.push(Some(name.to_string()));
        id
    }

    pub fn add_cntfet(
        &mut self,
        label: &str,
        d: NodeId,
        g: NodeId,
        s: NodeId,
        dev: DeviceInstance,
    ) -> &mut Self {
        self.elements.push(Element {
            label: label.to_string(),
            terminals: vec![d, g, s],
            value: ElementValue::Cntfet(dev),
        });
        self
    }

    pub fn add_resistor(&mut self, label: &str, a: NodeId, b: NodeId, ohms: f64) -> &mut Self {
        self.elements.push(Element {
            label: label.to_string(),
            terminals: vec![a, b],
            value: ElementValue::Resistance(ohms),
        });
        self
    }

    pub fn add_capacitor(&mut self, label: &str, a: NodeId, b: NodeId, farads: f64) -> &mut Self {
        self.elements.push(Element {
            label: label.to_string(),
            terminals: vec![a, b],
            value: ElementValue::Capacitance(farads),
        });
        self
    }

    pub fn add_vsource(&mut self, label: &str, a: NodeId, b: NodeId, wave: Waveform) -> &mut Self {
        self.elements.push(Element {
            label: label.to_string(),
            terminals: vec![a, b],
            value: ElementValue::Source(wave),
        });
        self
    }

    pub fn add_port(&mut self, name: &str, node: NodeId) -> &mut Self {
        self.ports.insert(name.to_string(), node);
        self
    }

    /// Validates invariants and freezes the circuit.
    pub fn build(self) -> Result<Circuit, NetlistError> {
        let mut labels = BTreeMap::new();
        for e in &self.elements {
            if labels.insert(e.label.clone(), ()).is_some() {
                return Err(NetlistError::DuplicateLabel(e.label.clone()));
            }
            let want = match e.kind() {
                ElementKind::CntfetN | ElementKind::CntfetP => 3,
                _ => 2,
            };
            if e.terminals.len() != want {
                return Err(NetlistError::BadElement(e.label.clone(), "terminal count".into()));
            }
            for t in &e.terminals {
                if t.0 >= self.next {
                    return Err(NetlistError::BadElement(e.label.clone(), "terminal out of range".into()));
                }
            }
            match &e.value {
                ElementValue::Resistance(r) if !(*r > 0.0) => {
                    return Err(NetlistError::BadElement(e.label.clone(), "resistance must be > 0".into()));
                }
                ElementValue::Capacitance(c) if !(*c >= 0.0) => {
                    return Err(NetlistError::BadElement(e.label.clone(), "capacitance must be >= 0".into()));
                }
                _ => {}
            }
        }
        // Connectivity: treat every element as a clique over its terminals
        // (device gmin ties drain and source; a gate pin still anchors the
        // node to the element). All used nodes must form one component;
        // gmin insertion then ties that component to ground even when no
        // element references ground explicitly.
        let n = self.next;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for e in &self.elements {
            for w in e.terminals.windows(2) {
                let (a, b) = (find(&mut parent, w[0].0), find(&mut parent, w[1].0));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut seen = vec![false; n];
        for e in &self.elements {
            for t in &e.terminals {
                seen[t.0] = true;
            }
        }
        let mut root: Option<usize> = None;
        for i in 0..n {
            if !seen[i] {
                if i > 0 {
                    return Err(NetlistError::DisconnectedNode(i));
                }
                continue;
            }
            let r = find(&mut parent, i);
            match root {
                None => root = Some(r),
                Some(r0) if r0 != r => return Err(NetlistError::DisconnectedNode(i)),
                _ => {}
            }
        }
        Ok(Circuit {
            elements: self.elements,
            node_count: self.next,
            ports: self.ports,
            node_names: self.node_names,
        })
    }
}

/// Parses a numeric field with optional SI suffix (k, m, u, n, p, f; meg for 1e6).
pub fn parse_si_value(tok: &str) -> Option<f64> {
    let t = tok.trim();
    if t.is_empty() {
        return None;
    }
    let lower = t.to_ascii_lowercase();
    let (num, mult) = if let Some(stripped) = lower.strip_suffix("meg") {
        (stripped, 1e6)
    } else {
        match lower.as_bytes().last() {
            Some(b'k') => (&lower[..lower.len() - 1], 1e3),
            Some(b'm') => (&lower[..lower.len() - 1], 1e-3),
            Some(b'u') => (&lower[..lower.len() - 1], 1e-6),
            Some(b'n') => (&lower[..lower.len() - 1], 1e-9),
            Some(b'p') => (&lower[..lower.len() - 1], 1e-12),
            Some(b'f') => (&lower[..lower.len() - 1], 1e-15),
            _ => (lower.as_str(), 1.0),
        }
    };
    num.parse::<f64>().ok().map(|v| v * mult)
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> NetlistError {
    NetlistError::Syntax { line, col, msg: msg.into() }
}

/// Parses the netlist text into a [`Circuit`]. CNTFET lines without an
/// explicit chirality use the chirality-(19,0) default of `params`.
pub fn parse_netlist(text: &str, params: &Arc<CntfetParams>) -> Result<Circuit, NetlistError> {
    let mut b = CircuitBuilder::new();
    let mut ports: Vec<(String, String, usize)> = Vec::new();
    let mut saw_end = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        if saw_end {
            break;
        }
        let line = raw.trim();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let first = toks[0];
        let col_of = |tok_idx: usize| -> usize {
            if tok_idx >= toks.len() {
                return raw.len() + 1;
            }
            raw.find(toks[tok_idx]).map(|p| p + 1).unwrap_or(1)
        };
        match first.chars().next().unwrap().to_ascii_uppercase() {
            '.' => {
                let word = first.to_ascii_lowercase();
                match word.as_str() {
                    ".end" => saw_end = true,
                    ".port" => {
                        if toks.len() != 3 {
                            return Err(syntax(lineno, 1, ".port expects `<name> <node>`"));
                        }
                        ports.push((toks[1].to_string(), toks[2].to_string(), lineno));
                    }
                    other => return Err(syntax(lineno, 1, format!("unknown directive `{other}`"))),
                }
            }
            'M' => {
                if toks.len() < 6 {
                    return Err(syntax(lineno, 1, "CNTFET expects `M<label> d g s nch|pch tubes=<n> [chirality=m,n]`"));
                }
                let d = b.node(toks[1]);
                let g = b.node(toks[2]);
                let s = b.node(toks[3]);
                let pol = match toks[4].to_ascii_lowercase().as_str() {
                    "nch" => Polarity::N,
                    "pch" => Polarity::P,
                    other => {
                        return Err(syntax(lineno, col_of(4), format!("unknown device kind `{other}` (want nch|pch)")));
                    }
                };
                let mut tubes: Option<u32> = None;
                let mut chir: Option<Chirality> = None;
                for (ti, tok) in toks.iter().enumerate().skip(5) {
                    let lower = tok.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("tubes=") {
                        tubes = Some(
                            v.parse()
                                .map_err(|_| syntax(lineno, col_of(ti), format!("bad tube count `{v}`")))?,
                        );
                    } else if let Some(v) = lower.strip_prefix("chirality=") {
                        let mut it = v.splitn(2, ',');
                        let m = it.next().and_then(|x| x.parse().ok());
                        let n = it.next().and_then(|x| x.parse().ok());
                        match (m, n) {
                            (Some(m), Some(n)) => {
                                chir = Some(
                                    Chirality::new(m, n)
                                        .map_err(|e| syntax(lineno, col_of(ti), e.to_string()))?,
                                )
                            }
                            _ => return Err(syntax(lineno, col_of(ti), format!("bad chirality `{v}`"))),
                        }
                    } else {
                        return Err(syntax(lineno, col_of(ti), format!("unknown device field `{tok}`")));
                    }
                }
                let tubes = tubes.ok_or_else(|| syntax(lineno, 1, "CNTFET needs tubes=<n>"))?;
                let chir = match chir {
                    Some(c) => c,
                    None => Chirality::new(19, 0).unwrap(),
                };
                let dev = DeviceInstance::new(pol, chir, tubes, Arc::clone(params))
                    .map_err(|e| syntax(lineno, 1, e.to_string()))?;
                b.add_cntfet(first, d, g, s, dev);
            }
            'R' => {
                if toks.len() != 4 {
                    return Err(syntax(lineno, 1, "resistor expects `R<label> a b <ohms>`"));
                }
                let a = b.node(toks[1]);
                let bb = b.node(toks[2]);
                let ohms = parse_si_value(toks[3])
                    .ok_or_else(|| syntax(lineno, col_of(3), format!("bad value `{}`", toks[3])))?;
                b.add_resistor(first, a, bb, ohms);
            }
            'C' => {
                if toks.len() != 4 {
                    return Err(syntax(lineno, 1, "capacitor expects `C<label> a b <farads>`"));
                }
                let a = b.node(toks[1]);
                let bb = b.node(toks[2]);
                let farads = parse_si_value(toks[3])
                    .ok_or_else(|| syntax(lineno, col_of(3), format!("bad value `{}`", toks[3])))?;
                b.add_capacitor(first, a, bb, farads);
            }
            'V' => {
                if toks.len() < 4 {
                    return Err(syntax(lineno, 1, "source expects `V<label> a b dc <v>` or `V<label> a b pwl (...)`"));
                }
                let a = b.node(toks[1]);
                let bb = b.node(toks[2]);
                let mode = toks[3].to_ascii_lowercase();
                let wave = match mode.as_str() {
                    "dc" => {
                        if toks.len() != 5 {
                            return Err(syntax(lineno, col_of(3), "dc source expects one value"));
                        }
                        Waveform::Dc(
                            parse_si_value(toks[4])
                                .ok_or_else(|| syntax(lineno, col_of(4), format!("bad value `{}`", toks[4])))?,
                        )
                    }
                    "pwl" => {
                        let rest = match line.find('(') {
                            Some(p) => line[p..].trim(),
                            None => "",
                        };
                        let inner = rest
                            .strip_prefix('(')
                            .and_then(|r| r.strip_suffix(')'))
                            .ok_or_else(|| syntax(lineno, col_of(3), "pwl expects `(t1 v1 t2 v2 ...)`"))?;
                        let nums: Result<Vec<f64>, _> = inner
                            .split_whitespace()
                            .map(|t| parse_si_value(t).ok_or_else(|| syntax(lineno, 1, format!("bad pwl value `{t}`"))))
                            .collect();
                        let nums = nums?;
                        if nums.len() < 2 || nums.len() % 2 != 0 {
                            return Err(syntax(lineno, col_of(3), "pwl needs an even, nonzero number of values"));
                        }
                        let mut pts = Vec::with_capacity(nums.len() / 2);
                        for pair in nums.chunks(2) {
                            pts.push((pair[0], pair[1]));
                        }
                        if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
                            return Err(syntax(lineno, col_of(3), "pwl times must be strictly increasing"));
                        }
                        Waveform::Pwl(pts)
                    }
                    other => {
                        return Err(syntax(lineno, col_of(3), format!("unknown source kind `{other}` (want dc|pwl)")));
                    }
                };
                b.add_vsource(first, a, bb, wave);
            }
            other => {
                return Err(syntax(lineno, 1, format!("unknown element kind `{other}`")));
            }
        }
    }
    for (name, node, lineno) in ports {
        let id = if node == "0" || node.eq_ignore_ascii_case("gnd") {
            NodeId::GROUND
        } else {
            match b.names.get(&node) {
                Some(&id) => id,
                None => {
                    let _ = lineno;
                    return Err(NetlistError::UndefinedPortNode(name, node));
                }
            }
        };
        b.add_port(&name, id);
    }
    b.build()
}

fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v:e}");
    if !s.contains('e') {
        s.push_str("e0");
    }
    s
}

/// Emits text that [`parse_netlist`] maps back to a structurally equal circuit.
pub fn serialize_netlist(c: &Circuit) -> String {
    let mut out = String::new();
    let name_of = |n: NodeId| -> String {
        if n.is_ground() {
            "0".to_string()
        } else {
            match c.node_name(n) {
                Some(s) => s.to_string(),
                None => format!("n{}", n.0),
            }
        }
    };
    for e in &c.elements {
        match &e.value {
            ElementValue::Cntfet(dev) => {
                let kind = match dev.polarity {
                    Polarity::N => "nch",
                    Polarity::P => "pch",
                };
                let _ = writeln!(
                    out,
                    "{} {} {} {} {} tubes={} chirality={},{}",
                    e.label,
                    name_of(e.terminals[0]),
                    name_of(e.terminals[1]),
                    name_of(e.terminals[2]),
                    kind,
                    dev.tubes,
                    dev.chirality.m,
                    dev.chirality.n
                );
            }
            ElementValue::Resistance(r) => {
                let _ = writeln!(
                    out,
                    "{} {} {} {}",
                    e.label,
                    name_of(e.terminals[0]),
                    name_of(e.terminals[1]),
                    fmt_f64(*r)
                );
            }
            ElementValue::Capacitance(cap) => {
                let _ = writeln!(
                    out,
                    "{} {} {} {}",
                    e.label,
                    name_of(e.terminals[0]),
                    name_of(e.terminals[1]),
                    fmt_f64(*cap)
                );
            }
            ElementValue::Source(w) => match w {
                Waveform::Dc(v) => {
                    let _ = writeln!(
                        out,
                        "{} {} {} dc {}",
                        e.label,
                        name_of(e.terminals[0]),
                        name_of(e.terminals[1]),
                        fmt_f64(*v)
                    );
                }
                Waveform::Pwl(pts) => {
                    let body: Vec<String> = pts
                        .iter()
                        .flat_map(|(t, v)| [fmt_f64(*t), fmt_f64(*v)])
                        .collect();
                    let _ = writeln!(
                        out,
                        "{} {} {} pwl ({})",
                        e.label,
                        name_of(e.terminals[0]),
                        name_of(e.terminals[1]),
                        body.join(" ")
                    );
                }
            },
        }
    }
    for (name, node) in &c.ports {
        let _ = writeln!(out, ".port {} {}", name, name_of(*node));
    }
    out.push_str(".end\n");
    out
}

/// Structural fingerprint used by the round-trip tests: elements and ports
/// with node names resolved, independent of node numbering.
pub fn structural_form(c: &Circuit) -> Vec<String> {
    let name_of = |n: NodeId| -> String {
        if n.is_ground() {
            "0".into()
        } else {
            c.node_name(n).map(str::to_string).unwrap_or_else(|| format!("n{}", n.0))
        }
    };
    let mut rows: Vec<String> = c
        .elements
        .iter()
        .map(|e| {
            let terms: Vec<String> = e.terminals.iter().map(|t| name_of(*t)).collect();
            let val = match &e.value {
                ElementValue::Cntfet(d) => format!(
                    "fet:{:?}:{}:{}:{}",
                    d.polarity, d.tubes, d.chirality.m, d.chirality.n
                ),
                ElementValue::Resistance(r) => format!("r:{r:e}"),
                ElementValue::Capacitance(cv) => format!("c:{cv:e}"),
                ElementValue::Source(w) => format!("v:{w:?}"),
            };
            format!("{} [{}] {}", e.label, terms.join(","), val)
        })
        .collect();
    for (name, node) in &c.ports {
        rows.push(format!("port {} {}", name, name_of(*node)));
    }
    rows.sort();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Arc<CntfetParams> {
        Arc::new(CntfetParams::default())
    }

    #[test]
    fn parse_single_fet() {
        let c = parse_netlist("MN1 d g s nch tubes=3\n.end\n", &params()).unwrap();
        assert_eq!(c.elements.len(), 1);
        assert_eq!(c.node_count, 4);
        assert_eq!(c.elements[0].kind(), ElementKind::CntfetN);
    }

    #[test]
    fn parse_shared_node() {
        let c = parse_netlist("R1 a gnd 1k\nV1 a gnd dc 0.9\n.end\n", &params()).unwrap();
        assert_eq!(c.elements.len(), 2);
        assert_eq!(c.node_count, 2);
        assert_eq!(c.elements[0].terminals[0], c.elements[1].terminals[0]);
    }

    #[test]
    fn si_suffixes() {
        let close = |got: Option<f64>, want: f64| {
            let v = got.expect("should parse");
            assert!((v - want).abs() <= want.abs() * 1e-12, "got {v}, want {want}");
        };
        close(parse_si_value("1k"), 1e3);
        close(parse_si_value("10f"), 10e-15);
        close(parse_si_value("2.5meg"), 2.5e6);
        close(parse_si_value("50p"), 50e-12);
        close(parse_si_value("3u"), 3e-6);
        close(parse_si_value("1m"), 1e-3);
        assert_eq!(parse_si_value("bogus"), None);
        assert_eq!(parse_si_value(""), None);
    }

    #[test]
    fn empty_circuit_serializes_to_end() {
        let c = CircuitBuilder::new().build().unwrap();
        assert_eq!(serialize_netlist(&c), ".end\n");
    }

    #[test]
    fn syntax_error_carries_line() {
        let err = parse_netlist("R1 a gnd 1k\nXQ a b 1\n.end\n", &params()).unwrap_err();
        match err {
            NetlistError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_label_rejected() {
        let err = parse_netlist("R1 a gnd 1k\nR1 b gnd 2k\n.end\n", &params()).unwrap_err();
        assert!(matches!(err, NetlistError::DuplicateLabel(_)));
    }

    #[test]
    fn undefined_port_rejected() {
        let err = parse_netlist("R1 a gnd 1k\n.port OUT zzz\n.end\n", &params()).unwrap_err();
        assert!(matches!(err, NetlistError::UndefinedPortNode(..)));
    }

    #[test]
    fn disconnected_island_rejected() {
        let err = parse_netlist("R1 a gnd 1k\nR2 x y 1k\n.end\n", &params()).unwrap_err();
        assert!(matches!(err, NetlistError::DisconnectedNode(_)));
    }

    #[test]
    fn roundtrip_small() {
        let text = "R1 a gnd 1k\nV1 a gnd pwl (0 0 1n 0.9)\nCL a gnd 10f\nMN1 a g gnd nch tubes=2\n.port OUT a\n.end\n";
        let c1 = parse_netlist(text, &params()).unwrap();
        let c2 = parse_netlist(&serialize_netlist(&c1), &params()).unwrap();
        assert_eq!(structural_form(&c1), structural_form(&c2));
    }
}
