//! Plain-text `key=value` configuration files.
//!
//! Device keys mirror the process parameter names (`l_channel_nm=32.0`,
//! `chirality=19,0`, ...); protocol keys carry the supply and the timing and
//! calibrated idle/precharge levels. `#` or `*` starts a comment. Unknown
//! keys are rejected with their line number.

use thiserror::Error;

use crate::analysis::ProtocolConfig;
use crate::cells::CellBuildOptions;
use crate::device::{Chirality, CntfetParams};

#[derive(Debug, Clone)]
pub struct Config {
    pub params: CntfetParams,
    pub protocol: ProtocolConfig,
    pub cell: CellBuildOptions,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            params: CntfetParams::default(),
            protocol: ProtocolConfig::default(),
            cell: CellBuildOptions::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {msg}")]
    BadValue { line: usize, key: String, msg: String },
}

/// Applies `text` on top of `base`.
pub fn parse_config(text: &str, base: Config) -> Result<Config, ConfigError> {
    let mut cfg = base;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') || s.starts_with('*') {
            continue;
        }
        let (key, value) = match s.split_once('=') {
            Some((k, v)) => (k.trim().to_ascii_lowercase(), v.trim().to_string()),
            None => {
                return Err(ConfigError::BadValue {
                    line,
                    key: s.to_string(),
                    msg: "expected key=value".into(),
                })
            }
        };
        let bad = |msg: &str| ConfigError::BadValue { line, key: key.clone(), msg: msg.into() };
        let num = || -> Result<f64, ConfigError> {
            value.parse::<f64>().map_err(|_| bad("not a number"))
        };
        match key.as_str() {
            "l_channel_nm" => cfg.params.l_channel = num()? * 1e-9,
            "l_sd_nm" => cfg.params.l_sd = num()? * 1e-9,
            "e_fo_ev" => cfg.params.e_fo = num()?,
            "t_ox_nm" => cfg.params.t_ox = num()? * 1e-9,
            "pitch_nm" => cfg.params.pitch = num()? * 1e-9,
            "chirality" => {
                let mut it = value.splitn(2, ',');
                let m = it.next().and_then(|x| x.trim().parse::<u32>().ok());
                let n = it.next().and_then(|x| x.trim().parse::<u32>().ok());
                match (m, n) {
                    (Some(m), Some(n)) => {
                        cfg.cell.chirality =
                            Chirality::new(m, n).map_err(|e| bad(&e.to_string()))?;
                    }
                    _ => return Err(bad("expected m,n")),
                }
            }
            "v_fbn_v" => cfg.params.v_fbn = num()?,
            "v_fbp_v" => cfg.params.v_fbp = num()?,
            "l_ceff_nm" => cfg.params.l_ceff = num()? * 1e-9,
            "mfp_doped_nm" => cfg.params.mfp_doped = num()? * 1e-9,
            "phi_contact_ev" => cfg.params.phi_contact = num()?,
            "phi_cnt_ev" => cfg.params.phi_cnt = num()?,
            "n_slope" => cfg.params.subthreshold_slope_factor = num()?,
            "i_on_per_tube_a" => cfg.params.i_on_per_tube = num()?,
            "i_off_floor_per_tube_a" => cfg.params.i_off_floor_per_tube = num()?,
            "v_dsat_v" => cfg.params.v_dsat = num()?,
            "vdd_v" => cfg.protocol.vdd = num()?,
            "v_idle1_v" => cfg.protocol.v_idle1 = num()?,
            "v_idle2_v" => cfg.protocol.v_idle2 = num()?,
            "v_pc_v" => cfg.protocol.v_pc = num()?,
            "write_assist_boost" => cfg.protocol.write_assist_boost = num()?,
            "pulse_width_s" => cfg.protocol.pulse_width = num()?,
            "slew_s" => cfg.protocol.slew = num()?,
            "hold_duration_s" => cfg.protocol.hold_duration = num()?,
            "node_cap_f" => cfg.cell.node_cap = num()?,
            "bitline_cap_f" => cfg.cell.bitline_cap = num()?,
            _ => return Err(ConfigError::UnknownKey { line, key }),
        }
    }
    Ok(cfg)
}

fn round9(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

/// Renders a configuration as a loadable file.
pub fn render_config(cfg: &Config) -> String {
    let p = &cfg.params;
    let pr = &cfg.protocol;
    format!(
        "# CNTFET process parameters\n\
         l_channel_nm={}\n\
         l_sd_nm={}\n\
         e_fo_ev={}\n\
         t_ox_nm={}\n\
         pitch_nm={}\n\
         chirality={},{}\n\
         v_fbn_v={}\n\
         v_fbp_v={}\n\
         l_ceff_nm={}\n\
         mfp_doped_nm={}\n\
         phi_contact_ev={}\n\
         phi_cnt_ev={}\n\
         # compact-model fit\n\
         n_slope={}\n\
         i_on_per_tube_a={:e}\n\
         i_off_floor_per_tube_a={:e}\n\
         v_dsat_v={}\n\
         # protocol levels and timing (idle/precharge values from `calibrate`)\n\
         vdd_v={}\n\
         v_idle1_v={}\n\
         v_idle2_v={}\n\
         v_pc_v={}\n\
         write_assist_boost={}\n\
         pulse_width_s={:e}\n\
         slew_s={:e}\n\
         hold_duration_s={:e}\n\
         # cell parasitics\n\
         node_cap_f={:e}\n\
         bitline_cap_f={:e}\n",
        round9(p.l_channel * 1e9),
        round9(p.l_sd * 1e9),
        p.e_fo,
        round9(p.t_ox * 1e9),
        round9(p.pitch * 1e9),
        cfg.cell.chirality.m,
        cfg.cell.chirality.n,
        p.v_fbn,
        p.v_fbp,
        round9(p.l_ceff * 1e9),
        round9(p.mfp_doped * 1e9),
        p.phi_contact,
        p.phi_cnt,
        p.subthreshold_slope_factor,
        p.i_on_per_tube,
        p.i_off_floor_per_tube,
        p.v_dsat,
        pr.vdd,
        pr.v_idle1,
        pr.v_idle2,
        pr.v_pc,
        pr.write_assist_boost,
        pr.pulse_width,
        pr.slew,
        pr.hold_duration,
        cfg.cell.node_cap,
        cfg.cell.bitline_cap,
    )
}
