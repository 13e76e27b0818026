//! The seven CNTFET SRAM cell topologies with their default tube-count sizing.
//!
//! Connectivity notes, per cell:
//!
//! * 4T: a two-transistor latch (NMOS driver M1 gated by STB, PMOS load M2
//!   gated by ST) plus an NMOS access M3 on the BLB/WL1 side and a PMOS
//!   access M4 on the BL/WL2 side. Data retention of a stored '1' relies on
//!   the subthreshold leakage of the PMOS access from BL.
//! * 5T: cross-coupled inverters with a single NMOS access M5 on BL. The
//!   accessed-side inverter (M2/M3) is weak and the far side (M1/M4) strong,
//!   so one bit line can write both values around an intermediate precharge.
//! * 6T: the standard cell; M1/M2 and M3/M4 form the inverters, M5/M6 the
//!   BL/BLB access pair on WL.
//! * 7T: 6T core plus M7 in the feedback path between the second inverter
//!   output Q and the first inverter input Q1. M5 writes Q1 from WriteBit,
//!   M6 reads Q onto ReadBit; M3 (8 tubes) gives the read-zero path a fast
//!   pull to ground.
//! * 8T: write core (L/D inverters, A1/A2 access on WWL) plus a two-device
//!   read stack E3 (RWL) and E1 (gated by Q) discharging RBL; the stack
//!   touches the storage nodes only through E1's gate.
//! * 9T: single write bit line WBL through the parallel pass pair A2/E1 on
//!   WWL; RBL conditionally discharges through the E3-E2-E4 stack, with E2
//!   gated by QB and E3/E4 by RWL.
//! * 10T: stacked access pairs AL1/AL2 and AR1/AR2 between the bit lines and
//!   the storage nodes, WL on the outer and WWL on the inner device; NL/NR
//!   (gated by Q and QB) discharge the bit-line side of the stacks into Vgnd
//!   for the differential, inverted read.
//!
//! Storage nodes get a 0.1 fF shunt to ground and bit lines 10 fF
//! (configurable through [`CellBuildOptions`]).

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::device::{Chirality, CntfetParams, DeviceInstance, Polarity};
use crate::netlist::{Circuit, CircuitBuilder, NetlistError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellKind {
    Sram4T,
    Sram5T,
    Sram6T,
    Sram7T,
    Sram8T,
    Sram9T,
    Sram10T,
}

impl CellKind {
    pub const ALL: [CellKind; 7] = [
        CellKind::Sram4T,
        CellKind::Sram5T,
        CellKind::Sram6T,
        CellKind::Sram7T,
        CellKind::Sram8T,
        CellKind::Sram9T,
        CellKind::Sram10T,
    ];

    pub fn transistor_count(self) -> usize {
        match self {
            CellKind::Sram4T => 4,
            CellKind::Sram5T => 5,
            CellKind::Sram6T => 6,
            CellKind::Sram7T => 7,
            CellKind::Sram8T => 8,
            CellKind::Sram9T => 9,
            CellKind::Sram10T => 10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Sram4T => "4t",
            CellKind::Sram5T => "5t",
            CellKind::Sram6T => "6t",
            CellKind::Sram7T => "7t",
            CellKind::Sram8T => "8t",
            CellKind::Sram9T => "9t",
            CellKind::Sram10T => "10t",
        }
    }

    pub fn from_name(s: &str) -> Option<CellKind> {
        match s.to_ascii_lowercase().as_str() {
            "4t" => Some(CellKind::Sram4T),
            "5t" => Some(CellKind::Sram5T),
            "6t" => Some(CellKind::Sram6T),
            "7t" => Some(CellKind::Sram7T),
            "8t" => Some(CellKind::Sram8T),
            "9t" => Some(CellKind::Sram9T),
            "10t" => Some(CellKind::Sram10T),
            _ => None,
        }
    }
}

/// Transistor label -> tube count.
pub type CellSizing = BTreeMap<String, u32>;

#[derive(Debug, Error)]
pub enum CellError {
    #[error("sizing is missing label `{0}`")]
    MissingSizing(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Device(#[from] crate::device::DeviceError),
}

/// Tube counts per transistor label for each cell.
pub fn default_sizing(kind: CellKind) -> CellSizing {
    let pairs: &[(&str, u32)] = match kind {
        // M1/M2 driver/load latch pair, M3/M4 access pair.
        CellKind::Sram4T => &[("M1", 3), ("M2", 3), ("M3", 5), ("M4", 5)],
        CellKind::Sram5T => &[("M1", 4), ("M4", 4), ("M2", 2), ("M3", 2), ("M5", 5)],
        CellKind::Sram6T => &[("M1", 3), ("M2", 3), ("M3", 3), ("M4", 3), ("M5", 5), ("M6", 5)],
        CellKind::Sram7T => &[
            ("M1", 3),
            ("M2", 3),
            ("M5", 3),
            ("M4", 1),
            ("M7", 1),
            ("M3", 8),
            ("M6", 6),
        ],
        CellKind::Sram8T => &[
            ("L1", 1),
            ("L2", 1),
            ("E1", 1),
            ("D1", 4),
            ("D2", 4),
            ("A1", 6),
            ("A2", 6),
            ("E3", 6),
        ],
        CellKind::Sram9T => &[
            ("E1", 4),
            ("E3", 4),
            ("E4", 4),
            ("A2", 4),
            ("D1", 1),
            ("D2", 1),
            ("L1", 1),
            ("L2", 1),
            ("E2", 7),
        ],
        CellKind::Sram10T => &[
            ("AL1", 2),
            ("AL2", 2),
            ("AR1", 2),
            ("AR2", 2),
            ("L1", 3),
            ("L2", 3),
            ("D1", 5),
            ("D2", 5),
            ("NR", 8),
            ("NL", 8),
        ],
    };
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Parasitics and tube geometry attached by the cell builder.
#[derive(Debug, Clone, Copy)]
pub struct CellBuildOptions {
    /// Shunt capacitance on storage (and internal dynamic) nodes (F).
    pub node_cap: f64,
    /// Capacitance on each bit-line port (F).
    pub bitline_cap: f64,
    /// Tube chirality of every transistor in the cell.
    pub chirality: Chirality,
}

impl Default for CellBuildOptions {
    fn default() -> Self {
        CellBuildOptions {
            node_cap: 0.1e-15,
            bitline_cap: 10e-15,
            chirality: Chirality { m: 19, n: 0 },
        }
    }
}

struct CellCtx<'a> {
    b: CircuitBuilder,
    sizing: &'a CellSizing,
    params: Arc<CntfetParams>,
    chirality: Chirality,
}

impl<'a> CellCtx<'a> {
    fn tubes(&self, label: &str) -> Result<u32, CellError> {
        self.sizing
            .get(label)
            .copied()
            .ok_or_else(|| CellError::MissingSizing(label.to_string()))
    }

    /// Adds transistor `label` (circuit element name `M<label>` unless the
    /// label already starts with M).
    fn fet(&mut self, label: &str, pol: Polarity, d: &str, g: &str, s: &str) -> Result<(), CellError> {
        let tubes = self.tubes(label)?;
        let dev = DeviceInstance::new(pol, self.chirality, tubes, Arc::clone(&self.params))?;
        let name = if label.starts_with('M') {
            label.to_string()
        } else {
            format!("M{label}")
        };
        let (d, g, s) = (self.b.node(d), self.b.node(g), self.b.node(s));
        self.b.add_cntfet(&name, d, g, s, dev);
        Ok(())
    }

    fn cap(&mut self, label: &str, node: &str, farads: f64) {
        let n = self.b.node(node);
        self.b.add_capacitor(label, n, crate::netlist::NodeId::GROUND, farads);
    }

    fn ports(&mut self, names: &[&str]) {
        for name in names {
            let n = self.b.node(name);
            self.b.add_port(name, n);
        }
    }
}

/// Builds one SRAM cell as a circuit with named ports and default parasitics.
pub fn build_cell(
    kind: CellKind,
    sizing: &CellSizing,
    params: &Arc<CntfetParams>,
) -> Result<Circuit, CellError> {
    build_cell_with(kind, sizing, params, CellBuildOptions::default())
}

pub fn build_cell_with(
    kind: CellKind,
    sizing: &CellSizing,
    params: &Arc<CntfetParams>,
    opts: CellBuildOptions,
) -> Result<Circuit, CellError> {
    let mut cx = CellCtx {
        b: CircuitBuilder::new(),
        sizing,
        params: Arc::clone(params),
        chirality: opts.chirality,
    };
    use Polarity::{N, P};
    match kind {
        CellKind::Sram4T => {
            // Driver pulls ST low when STB is high; load pulls STB high when
            // ST is low. A stored '1' at ST is sustained by M4 leakage from
            // BL. The access pair carries the larger tube count: writing '1'
            // needs the NMOS access to park STB low against the full-on
            // load, and the PMOS access leakage then lifts the floating ST.
            cx.fet("M1", N, "Q", "QB", "gnd")?; // driver, ST = Q
            cx.fet("M2", P, "QB", "Q", "VDD")?; // load, STB = QB
            cx.fet("M3", N, "BLB", "WL1", "QB")?; // NMOS access
            cx.fet("M4", P, "Q", "WL2", "BL")?; // PMOS access
            cx.cap("CQ", "Q", opts.node_cap);
            cx.cap("CQB", "QB", opts.node_cap);
            cx.cap("CBL", "BL", opts.bitline_cap);
            cx.cap("CBLB", "BLB", opts.bitline_cap);
            cx.ports(&["BL", "BLB", "WL1", "WL2", "Q", "QB", "VDD"]);
        }
        CellKind::Sram5T => {
            cx.fet("M1", N, "QB", "Q", "gnd")?; // far-side driver
            cx.fet("M4", P, "QB", "Q", "VDD")?; // far-side load
            cx.fet("M3", N, "Q", "QB", "gnd")?; // accessed-side driver (weak)
            cx.fet("M2", P, "Q", "QB", "VDD")?; // accessed-side load (weak)
            cx.fet("M5", N, "BL", "WL", "Q")?;
            cx.cap("CQ", "Q", opts.node_cap);
            cx.cap("CQB", "QB", opts.node_cap);
            cx.cap("CBL", "BL", opts.bitline_cap);
            cx.ports(&["BL", "WL", "Q", "QB", "VDD"]);
        }
        CellKind::Sram6T => {
            cx.fet("M1", N, "QB", "Q", "gnd")?;
            cx.fet("M2", P, "QB", "Q", "VDD")?;
            cx.fet("M3", N, "Q", "QB", "gnd")?;
            cx.fet("M4", P, "Q", "QB", "VDD")?;
            cx.fet("M5", N, "BL", "WL", "Q")?;
            cx.fet("M6", N, "BLB", "WL", "QB")?;
            cx.cap("CQ", "Q", opts.node_cap);
            cx.cap("CQB", "QB", opts.node_cap);
            cx.cap("CBL", "BL", opts.bitline_cap);
            cx.cap("CBLB", "BLB", opts.bitline_cap);
            cx.ports(&["BL", "BLB", "WL", "Q", "QB", "VDD"]);
        }
        CellKind::Sram7T => {
            cx.fet("M1", N, "QB", "Q1", "gnd")?; // INV1 driver
            cx.fet("M2", P, "QB", "Q1", "VDD")?; // INV1 load
            cx.fet("M3", N, "Q", "QB", "gnd")?; // INV2 driver, read-zero path
            cx.fet("M4", P, "Q", "QB", "VDD")?; // INV2 load
            cx.fet("M5", N, "WriteBit", "WriteSelect", "Q1")?;
            cx.fet("M6", N, "ReadBit", "ReadSelect", "Q")?;
            cx.fet("M7", N, "Q", "WriteBar", "Q1")?; // feedback switch
            cx.cap("CQ", "Q", opts.node_cap);
            cx.cap("CQB", "QB", opts.node_cap);
            cx.cap("CQ1", "Q1", opts.node_cap);
            cx.cap("CWBIT", "WriteBit", opts.bitline_cap);
            cx.cap("CRBIT", "ReadBit", opts.bitline_cap);
            cx.ports(&[
                "WriteBit",
                "ReadBit",
                "WriteSelect",
                "ReadSelect",
                "WriteBar",
                "Q",
                "QB",
                "VDD",
            ]);
        }
        CellKind::Sram8T => {
            cx.fet("L1", P, "Q", "QB", "VDD")?;
            cx.fet("D1", N, "Q", "QB", "gnd")?;
            cx.fet("L2", P, "QB", "Q", "VDD")?;
            cx.fet("D2", N, "QB", "Q", "gnd")?;
            cx.fet("A1", N, "WBL", "WWL", "Q")?;
            cx.fet("A2", N, "WBLB", "WWL", "QB")?;
            cx.fet("E3", N, "RBL", "RWL", "RX")?;
            cx.fet("E1", N, "RX", "Q", "gnd")?;
            cx.cap("CQ", "Q", opts.node_cap);
            cx.cap("CQB", "QB", opts.node_cap);
            cx.cap("CRX", "RX", opts.node_cap);
            cx.cap("CWBL", "WBL", opts.bitline_cap);
            cx.cap("CWBLB", "WBLB", opts.bitline_cap);
            cx.cap("CRBL", "RBL", opts.bitline_cap);
            cx.ports(&["WBL", "WBLB", "WWL", "RBL", "RWL", "Q", "QB", "VDD"]);
        }
        CellKind::Sram9T => {
            cx.fet("L1", P, "Q", "QB", "VDD")?;
            cx.fet("D1", N, "Q", "QB", "gnd")?;
            cx.fet("L2", P, "QB", "Q", "VDD")?;
            cx.fet("D2", N, "QB", "Q", "gnd")?;
            cx.fet("A2", N, "WBL", "WWL", "Q")?;
            cx.fet("E1", N, "WBL", "WWL", "Q")?; // pass companion of A2
            cx.fet("E3", N, "RBL", "RWL", "R1")?;
            cx.fet("E2", N, "R1", "QB", "R2")?;
            cx.fet("E4", N, "R2", "RWL", "gnd")?;
            cx.cap("CQ", "Q", opts.node_cap);
            cx.cap("CQB", "QB", opts.node_cap);
            cx.cap("CR1", "R1", opts.node_cap);
            cx.cap("CR2", "R2", opts.node_cap);
            cx.cap("CWBL", "WBL", opts.bitline_cap);
            cx.cap("CRBL", "RBL", opts.bitline_cap);
            cx.ports(&["WBL", "RBL", "WWL", "RWL", "Q", "QB", "VDD"]);
        }
        CellKind::Sram10T => {
            cx.fet("L1", P, "Q", "QB", "VDD")?;
            cx.fet("D1", N, "Q", "QB", "gnd")?;
            cx.fet("L2", P, "QB", "Q", "VDD")?;
            cx.fet("D2", N, "QB", "Q", "gnd")?;
            cx.fet("AL1", N, "BL", "WL", "ML")?;
            cx.fet("AL2", N, "ML", "WWL", "Q")?;
            cx.fet("AR1", N, "BLB", "WL", "MR")?;
            cx.fet("AR2", N, "MR", "WWL", "QB")?;
            cx.fet("NL", N, "ML", "Q", "Vgnd")?;
            cx.fet("NR", N, "MR", "QB", "Vgnd")?;
            cx.cap("CQ", "Q", opts.node_cap);
            cx.cap("CQB", "QB", opts.node_cap);
            cx.cap("CML", "ML", opts.node_cap);
            cx.cap("CMR", "MR", opts.node_cap);
            cx.cap("CBL", "BL", opts.bitline_cap);
            cx.cap("CBLB", "BLB", opts.bitline_cap);
            cx.ports(&["BL", "BLB", "WL", "WWL", "Vgnd", "Q", "QB", "VDD"]);
        }
    }
    Ok(cx.b.build()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::ElementKind;

    fn params() -> Arc<CntfetParams> {
        Arc::new(CntfetParams::default())
    }

    #[test]
    fn default_sizing_tables() {
        let s4 = default_sizing(CellKind::Sram4T);
        assert_eq!(s4.get("M1"), Some(&3));
        assert_eq!(s4.get("M3"), Some(&5));
        let s9 = default_sizing(CellKind::Sram9T);
        assert_eq!(s9.get("E2"), Some(&7));
        assert_eq!(s9.get("A2"), Some(&4));
        assert_eq!(s9.get("D1"), Some(&1));
        let s10 = default_sizing(CellKind::Sram10T);
        assert_eq!(s10.get("NL"), Some(&8));
        assert_eq!(s10.get("AL1"), Some(&2));
        assert_eq!(s10.get("D1"), Some(&5));
    }

    #[test]
    fn transistor_counts_match_names() {
        for kind in CellKind::ALL {
            let c = build_cell(kind, &default_sizing(kind), &params()).unwrap();
            let fets = c
                .elements
                .iter()
                .filter(|e| matches!(e.kind(), ElementKind::CntfetN | ElementKind::CntfetP))
                .count();
            assert_eq!(fets, kind.transistor_count(), "{kind:?}");
        }
    }

    #[test]
    fn six_t_default_tubes() {
        let c = build_cell(CellKind::Sram6T, &default_sizing(CellKind::Sram6T), &params()).unwrap();
        for label in ["M1", "M2", "M3", "M4"] {
            let e = c.find_element(label).unwrap();
            if let crate::netlist::ElementValue::Cntfet(d) = &e.value {
                assert_eq!(d.tubes, 3);
            }
        }
        for label in ["M5", "M6"] {
            let e = c.find_element(label).unwrap();
            if let crate::netlist::ElementValue::Cntfet(d) = &e.value {
                assert_eq!(d.tubes, 5);
            }
        }
    }

    #[test]
    fn seven_t_read_zero_sizing() {
        let c = build_cell(CellKind::Sram7T, &default_sizing(CellKind::Sram7T), &params()).unwrap();
        let m3 = c.find_element("M3").unwrap();
        let m6 = c.find_element("M6").unwrap();
        if let crate::netlist::ElementValue::Cntfet(d) = &m3.value {
            assert_eq!(d.tubes, 8);
        }
        if let crate::netlist::ElementValue::Cntfet(d) = &m6.value {
            assert_eq!(d.tubes, 6);
        }
    }

    #[test]
    fn missing_sizing_rejected() {
        let mut s = default_sizing(CellKind::Sram6T);
        s.remove("M5");
        let err = build_cell(CellKind::Sram6T, &s, &params()).unwrap_err();
        assert!(matches!(err, CellError::MissingSizing(l) if l == "M5"));
    }

    #[test]
    fn expected_ports_exist() {
        let want: &[(CellKind, &[&str])] = &[
            (CellKind::Sram4T, &["BL", "BLB", "WL1", "WL2", "Q", "QB", "VDD"]),
            (CellKind::Sram5T, &["BL", "WL", "Q", "QB", "VDD"]),
            (CellKind::Sram6T, &["BL", "BLB", "WL", "Q", "QB", "VDD"]),
            (
                CellKind::Sram7T,
                &["WriteBit", "ReadBit", "WriteSelect", "ReadSelect", "WriteBar", "Q", "QB", "VDD"],
            ),
            (CellKind::Sram8T, &["WBL", "WBLB", "WWL", "RBL", "RWL", "Q", "QB", "VDD"]),
            (CellKind::Sram9T, &["WBL", "RBL", "WWL", "RWL", "Q", "QB", "VDD"]),
            (CellKind::Sram10T, &["BL", "BLB", "WL", "WWL", "Vgnd", "Q", "QB", "VDD"]),
        ];
        for (kind, ports) in want {
            let c = build_cell(*kind, &default_sizing(*kind), &params()).unwrap();
            for p in *ports {
                assert!(c.port(p).is_some(), "{kind:?} missing port {p}");
            }
        }
    }
}
