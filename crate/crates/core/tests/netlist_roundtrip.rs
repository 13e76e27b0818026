//! Parser contract: parse/serialize round-trips for the whole cell library
//! and randomized circuits, and diagnostics for every malformed-line class.

use std::sync::Arc;

use cntsram_core::cells::{build_cell, default_sizing, CellKind};
use cntsram_core::device::CntfetParams;
use cntsram_core::netlist::{
    parse_netlist, serialize_netlist, structural_form, NetlistError,
};

fn params() -> Arc<CntfetParams> {
    Arc::new(CntfetParams::default())
}

#[test]
fn all_cells_roundtrip() {
    let p = params();
    for kind in CellKind::ALL {
        let cell = build_cell(kind, &default_sizing(kind), &p).unwrap();
        let text = serialize_netlist(&cell);
        let back = parse_netlist(&text, &p).unwrap();
        assert_eq!(
            structural_form(&cell),
            structural_form(&back),
            "{kind:?} did not round-trip"
        );
        let again = serialize_netlist(&back);
        assert_eq!(text, again, "{kind:?} serialization is not a fixed point");
    }
}

/// Deterministic generator for random valid netlists.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 11
    }

    fn pick(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }

    fn value(&mut self) -> f64 {
        ((self.next() % 100000) as f64 + 1.0) * 1e-3
    }
}

#[test]
fn randomized_netlists_roundtrip() {
    let p = params();
    let mut rng = Rng(0xfeed_beef_cafe_0001);
    for case in 0..100 {
        let n_nodes = 3 + rng.pick(6);
        let n_elems = 2 + rng.pick(8);
        let mut text = String::new();
        let node = |i: usize| {
            if i == 0 {
                "gnd".to_string()
            } else {
                format!("n{i}")
            }
        };
        // A spine of resistors keeps everything one connected component.
        for i in 1..n_nodes {
            text.push_str(&format!("Rspine{i} {} {} 1k\n", node(i - 1), node(i)));
        }
        for e in 0..n_elems {
            let a = node(rng.pick(n_nodes));
            let b = node(rng.pick(n_nodes));
            if a == b {
                continue;
            }
            match rng.pick(4) {
                0 => text.push_str(&format!("Rr{e} {a} {b} {}\n", rng.value())),
                1 => text.push_str(&format!("Cc{e} {a} {b} {}f\n", rng.value())),
                2 => text.push_str(&format!("Vv{e} {a} {b} dc {}\n", rng.value())),
                _ => {
                    let g = node(rng.pick(n_nodes));
                    let pol = if rng.pick(2) == 0 { "nch" } else { "pch" };
                    let tubes = 1 + rng.pick(8);
                    text.push_str(&format!("Mm{e} {a} {g} {b} {pol} tubes={tubes}\n"));
                }
            }
        }
        text.push_str(&format!(".port OUT {}\n.end\n", node(n_nodes - 1)));
        let c1 = parse_netlist(&text, &p).unwrap_or_else(|err| panic!("case {case}: {err}\n{text}"));
        let c2 = parse_netlist(&serialize_netlist(&c1), &p).unwrap();
        assert_eq!(structural_form(&c1), structural_form(&c2), "case {case}");
    }
}

#[test]
fn malformed_lines_are_diagnosed() {
    let p = params();
    let cases: &[(&str, usize)] = &[
        // unknown element kind
        ("R1 a gnd 1k\nXQ a b 1\n.end\n", 2),
        // bad numeric value
        ("R1 a gnd 1x2k\n.end\n", 1),
        // missing CNTFET fields
        ("M1 d g s nch\n.end\n", 1),
        // unknown device kind
        ("M1 d g s xch tubes=2\n.end\n", 1),
        // bad chirality
        ("M1 d g s nch tubes=2 chirality=0,0\n.end\n", 1),
        // malformed source
        ("V1 a gnd ac 1\n.end\n", 1),
        // pwl with odd value count
        ("V1 a gnd pwl (0 0 1n)\n.end\n", 1),
        // pwl times not increasing
        ("V1 a gnd pwl (1n 0 0 1)\n.end\n", 1),
        // unknown directive
        ("R1 a gnd 1k\n.foo bar\n.end\n", 2),
        // resistor arity
        ("R1 a gnd\n.end\n", 1),
    ];
    for (text, want_line) in cases {
        match parse_netlist(text, &p) {
            Err(NetlistError::Syntax { line, .. }) => {
                assert_eq!(line, *want_line, "wrong line for {text:?}");
            }
            other => panic!("expected syntax error for {text:?}, got {other:?}"),
        }
    }

    // Non-syntax classes keep their own diagnostics.
    assert!(matches!(
        parse_netlist("R1 a gnd 1k\nR1 b gnd 1k\n.end\n", &p),
        Err(NetlistError::DuplicateLabel(_))
    ));
    assert!(matches!(
        parse_netlist("R1 a gnd 1k\n.port X nope\n.end\n", &p),
        Err(NetlistError::UndefinedPortNode(..))
    ));
    assert!(matches!(
        parse_netlist("R1 a gnd 1k\nR2 u w 1k\n.end\n", &p),
        Err(NetlistError::DisconnectedNode(_))
    ));
    assert!(matches!(
        parse_netlist("R1 a gnd -5\n.end\n", &p),
        Err(NetlistError::BadElement(..))
    ));
}

#[test]
fn text_after_end_is_ignored() {
    let p = params();
    let c = parse_netlist("R1 a gnd 1k\n.end\ngarbage beyond end\n", &p).unwrap();
    assert_eq!(c.elements.len(), 1);
}
