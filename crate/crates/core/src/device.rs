//! CNTFET compact device model.
//!
//! Geometry and threshold voltage come from the chirality vector:
//!
//! ```text
//! d_cnt = (a / pi) * sqrt(m^2 + n^2 + m*n)
//! v_th  = a * v_pi / (sqrt(3) * q * d_cnt)
//! ```
//!
//! The drain current is a single-expression unified model per tube. With
//! `vov = v_gs - min(v_ds, 0)` (gate drive referenced to the conducting,
//! i.e. lower-potential, terminal of an n-type device):
//!
//! ```text
//! x     = (vov - v_th) / (n_slope * v_t)
//! g_ch  = n_slope * v_t * ln(1 + exp(x))          // softplus blend, volts
//! d(v)  = sign(v) * (1 - exp(-|v| / v_dsat)) * (1 + lambda * v)
//! i     = tubes * (k_on * g_ch * d(v_ds) + GMIN_PER_TUBE * v_ds)
//! ```
//!
//! `g_ch` is exponential below threshold (slope `n_slope * v_t` per e-fold)
//! and linear in the gate overdrive above it, so subthreshold conduction and
//! strong inversion come out of one continuous, once-differentiable
//! expression. `k_on` is calibrated per device so that the drain current at
//! `v_gs = v_ds = V_ON_REF` equals `i_on_per_tube`. The `(1 + lambda*v_ds)`
//! factor is applied signed, which makes reverse conduction slightly weaker
//! than forward conduction at equal bias magnitudes: the drain and source
//! terminals are not interchangeable.
//!
//! A p-type device is the exact mirror of the n-type expression:
//! `i_p(v_gs, v_ds) = -i_n(-v_gs, -v_ds)`, with `v_th` derived from the same
//! tube diameter.
//!
//! The remaining process parameters (`l_channel`, `e_fo`, oxide, pitch,
//! mean free paths, work functions) are carried and reported as device
//! metadata but do not enter this simplified current expression.

use std::sync::Arc;

use thiserror::Error;

/// Channel-length modulation coefficient (1/V), applied signed.
pub const LAMBDA: f64 = 0.05;

/// Minimum drain-source conductance contributed per tube (S).
///
/// Keeps every device row of the nodal matrix nonsingular and gives
/// floating nodes a defined pull. Scaling it with the tube count keeps
/// current and conductances exactly proportional to `tubes`.
pub const GMIN_PER_TUBE: f64 = 1e-12;

/// Gate/drain bias at which `i_on_per_tube` is calibrated (V).
pub const V_ON_REF: f64 = 0.9;

#[derive(Debug, Error, PartialEq)]
pub enum DeviceError {
    #[error("chirality (0, 0) has no diameter")]
    ZeroChirality,
    #[error("diameter must be positive, got {0}")]
    NonPositiveDiameter(f64),
    #[error("invalid device parameter: {0}")]
    InvalidParam(&'static str),
    #[error("tube count must be at least 1")]
    ZeroTubes,
}

/// Fixed physical constants used by the device equations.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalConstants {
    /// CNT atomic distance (m).
    pub a: f64,
    /// Carbon pi-to-pi bond energy (J).
    pub v_pi: f64,
    /// Elementary charge (C).
    pub q: f64,
    /// Thermal voltage at 300 K (V).
    pub v_t: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        let q = 1.602176634e-19;
        PhysicalConstants {
            a: 0.249e-9,
            v_pi: 3.033 * q,
            q,
            v_t: 25.85e-3,
        }
    }
}

/// Roll-up vector (m, n) of the tube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chirality {
    pub m: u32,
    pub n: u32,
}

impl Chirality {
    pub fn new(m: u32, n: u32) -> Result<Self, DeviceError> {
        if m == 0 && n == 0 {
            return Err(DeviceError::ZeroChirality);
        }
        Ok(Chirality { m, n })
    }
}

/// Tube diameter from the chirality vector (m).
pub fn cnt_diameter(c: Chirality, k: &PhysicalConstants) -> f64 {
    let (m, n) = (c.m as f64, c.n as f64);
    (k.a / std::f64::consts::PI) * (m * m + n * n + m * n).sqrt()
}

/// Threshold voltage for a given tube diameter (V).
///
/// Strictly decreasing in the diameter; rejects non-positive diameters.
pub fn threshold_voltage(d: f64, k: &PhysicalConstants) -> Result<f64, DeviceError> {
    if !(d > 0.0) {
        return Err(DeviceError::NonPositiveDiameter(d));
    }
    Ok(k.a * k.v_pi / (3.0f64.sqrt() * k.q * d))
}

/// Process and model parameters shared by a family of devices.
///
/// Lengths are stored in meters and energies in eV. Only `v_fbn`/`v_fbp`,
/// `subthreshold_slope_factor`, `i_on_per_tube`, `i_off_floor_per_tube` and
/// `v_dsat` enter the current expression; the rest are carried as metadata.
#[derive(Debug, Clone)]
pub struct CntfetParams {
    pub l_channel: f64,
    pub l_sd: f64,
    pub e_fo: f64,
    pub t_ox: f64,
    pub pitch: f64,
    /// Flatband shift added to the n-type threshold (V).
    pub v_fbn: f64,
    /// Flatband shift added to the p-type threshold magnitude (V).
    pub v_fbp: f64,
    pub l_ceff: f64,
    pub mfp_doped: f64,
    /// Source/drain metal contact work function (eV).
    pub phi_contact: f64,
    /// CNT work function (eV).
    pub phi_cnt: f64,
    /// Subthreshold slope ideality factor (dimensionless, >= 1).
    pub subthreshold_slope_factor: f64,
    /// Calibrated on-current per tube at `V_ON_REF` (A).
    pub i_on_per_tube: f64,
    /// Reference off-current scale per tube (A).
    pub i_off_floor_per_tube: f64,
    /// Drain saturation voltage scale of the v_ds dependence (V).
    pub v_dsat: f64,
    pub constants: PhysicalConstants,
}

impl Default for CntfetParams {
    fn default() -> Self {
        CntfetParams {
            l_channel: 32.0e-9,
            l_sd: 32.0e-9,
            e_fo: 0.6,
            t_ox: 4.0e-9,
            pitch: 10.0e-9,
            v_fbn: 0.0,
            v_fbp: 0.0,
            l_ceff: 200.0e-9,
            mfp_doped: 15.0e-9,
            phi_contact: 4.6,
            phi_cnt: 4.5,
            subthreshold_slope_factor: 1.2,
            i_on_per_tube: 20e-6,
            i_off_floor_per_tube: 1e-12,
            v_dsat: 0.45,
            constants: PhysicalConstants::default(),
        }
    }
}

impl CntfetParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        let positive = [
            (self.l_channel, "l_channel"),
            (self.l_sd, "l_sd"),
            (self.e_fo, "e_fo"),
            (self.t_ox, "t_ox"),
            (self.pitch, "pitch"),
            (self.l_ceff, "l_ceff"),
            (self.mfp_doped, "mfp_doped"),
            (self.phi_contact, "phi_contact"),
            (self.phi_cnt, "phi_cnt"),
            (self.v_dsat, "v_dsat"),
        ];
        for (v, name) in positive {
            if !(v > 0.0) {
                return Err(DeviceError::InvalidParam(name));
            }
        }
        if !(self.subthreshold_slope_factor >= 1.0) {
            return Err(DeviceError::InvalidParam("subthreshold_slope_factor"));
        }
        if !(self.i_on_per_tube > self.i_off_floor_per_tube && self.i_off_floor_per_tube > 0.0) {
            return Err(DeviceError::InvalidParam("i_on_per_tube/i_off_floor_per_tube"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    N,
    P,
}

/// One CNTFET instance: polarity, chirality, tube count and its parameter set.
///
/// Threshold voltage and the on-current normalization are derived once at
/// construction; evaluation is pure and reentrant.
#[derive(Debug, Clone)]
pub struct DeviceInstance {
    pub polarity: Polarity,
    pub chirality: Chirality,
    pub tubes: u32,
    pub params: Arc<CntfetParams>,
    v_th: f64,
    k_on: f64,
}

impl DeviceInstance {
    pub fn new(
        polarity: Polarity,
        chirality: Chirality,
        tubes: u32,
        params: Arc<CntfetParams>,
    ) -> Result<Self, DeviceError> {
        if tubes == 0 {
            return Err(DeviceError::ZeroTubes);
        }
        params.validate()?;
        let k = &params.constants;
        let d = cnt_diameter(chirality, k);
        let mut v_th = threshold_voltage(d, k)?;
        v_th += match polarity {
            Polarity::N => params.v_fbn,
            Polarity::P => params.v_fbp,
        };
        let n_vt = params.subthreshold_slope_factor * k.v_t;
        let g_on = n_vt * softplus((V_ON_REF - v_th) / n_vt);
        let d_on = d_factor(V_ON_REF, params.v_dsat);
        let k_on = params.i_on_per_tube / (g_on * d_on);
        Ok(DeviceInstance {
            polarity,
            chirality,
            tubes,
            params,
            v_th,
            k_on,
        })
    }

    /// Threshold voltage of this instance (V), flatband shift included.
    pub fn v_th(&self) -> f64 {
        self.v_th
    }

    /// Tube diameter (m).
    pub fn diameter(&self) -> f64 {
        cnt_diameter(self.chirality, &self.params.constants)
    }

    /// Signed drain-to-source current (A) at the given bias.
    ///
    /// Exactly proportional to the tube count. Panics on non-finite input.
    pub fn drain_current(&self, v_gs: f64, v_ds: f64) -> f64 {
        assert!(
            v_gs.is_finite() && v_ds.is_finite(),
            "device bias must be finite (got v_gs={v_gs}, v_ds={v_ds})"
        );
        let (vgs, vds, sign) = match self.polarity {
            Polarity::N => (v_gs, v_ds, 1.0),
            Polarity::P => (-v_gs, -v_ds, -1.0),
        };
        sign * self.tubes as f64 * self.i_tube_n(vgs, vds)
    }

    /// Analytic partial derivatives `(gm, gds)` of [`Self::drain_current`] (S).
    pub fn conductances(&self, v_gs: f64, v_ds: f64) -> (f64, f64) {
        assert!(
            v_gs.is_finite() && v_ds.is_finite(),
            "device bias must be finite (got v_gs={v_gs}, v_ds={v_ds})"
        );
        let (vgs, vds) = match self.polarity {
            Polarity::N => (v_gs, v_ds),
            Polarity::P => (-v_gs, -v_ds),
        };
        let (gm, gds) = self.g_tube_n(vgs, vds);
        let nt = self.tubes as f64;
        (nt * gm, nt * gds)
    }

    /// On-current per tube at `(v_gs, v_ds) = (vdd, vdd)` (A).
    pub fn on_current_per_tube(&self, vdd: f64) -> f64 {
        let nt = self.tubes as f64;
        match self.polarity {
            Polarity::N => self.drain_current(vdd, vdd) / nt,
            Polarity::P => -self.drain_current(-vdd, -vdd) / nt,
        }
    }

    /// Off-current per tube at `(v_gs, v_ds) = (0, vdd)` (A).
    pub fn off_current_per_tube(&self, vdd: f64) -> f64 {
        let nt = self.tubes as f64;
        match self.polarity {
            Polarity::N => self.drain_current(0.0, vdd) / nt,
            Polarity::P => -self.drain_current(0.0, -vdd) / nt,
        }
    }

    fn n_vt(&self) -> f64 {
        self.params.subthreshold_slope_factor * self.params.constants.v_t
    }

    /// Per-tube n-type current, gmin shunt included.
    fn i_tube_n(&self, vgs: f64, vds: f64) -> f64 {
        let n_vt = self.n_vt();
        let vov = vgs - vds.min(0.0);
        let g_ch = n_vt * softplus((vov - self.v_th) / n_vt);
        self.k_on * g_ch * d_factor(vds, self.params.v_dsat) + GMIN_PER_TUBE * vds
    }

    /// Per-tube n-type (gm, gds).
    fn g_tube_n(&self, vgs: f64, vds: f64) -> (f64, f64) {
        let n_vt = self.n_vt();
        let vsat = self.params.v_dsat;
        let vov = vgs - vds.min(0.0);
        let x = (vov - self.v_th) / n_vt;
        let g_ch = n_vt * softplus(x);
        let dg = sigmoid(x);
        let d = d_factor(vds, vsat);
        let dd = d_factor_deriv(vds, vsat);
        let gm = self.k_on * dg * d;
        // For vds < 0 the gate reference follows the drain, so vov depends
        // on vds as well: d(vov)/d(vds) = -1 there.
        let dvov_dvds = if vds < 0.0 { -1.0 } else { 0.0 };
        let gds = self.k_on * (dg * dvov_dvds * d + g_ch * dd) + GMIN_PER_TUBE;
        (gm, gds)
    }
}

/// Numerically stable ln(1 + exp(x)).
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Signed drain-voltage dependence `sign(v) * (1 - exp(-|v|/vsat)) * (1 + lambda*v)`.
fn d_factor(v: f64, vsat: f64) -> f64 {
    let m = -(-v.abs() / vsat).exp_m1();
    v.signum() * m * (1.0 + LAMBDA * v)
}

fn d_factor_deriv(v: f64, vsat: f64) -> f64 {
    let m = -(-v.abs() / vsat).exp_m1();
    let dm = (-v.abs() / vsat).exp() / vsat;
    dm * (1.0 + LAMBDA * v) + v.signum() * m * LAMBDA
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nmos(tubes: u32) -> DeviceInstance {
        DeviceInstance::new(
            Polarity::N,
            Chirality::new(19, 0).unwrap(),
            tubes,
            Arc::new(CntfetParams::default()),
        )
        .unwrap()
    }

    fn pmos(tubes: u32) -> DeviceInstance {
        DeviceInstance::new(
            Polarity::P,
            Chirality::new(19, 0).unwrap(),
            tubes,
            Arc::new(CntfetParams::default()),
        )
        .unwrap()
    }

    #[test]
    fn diameter_19_0() {
        let k = PhysicalConstants::default();
        let d = cnt_diameter(Chirality::new(19, 0).unwrap(), &k);
        assert!((d - 1.5059e-9).abs() < 1e-13, "d = {d}");
    }

    #[test]
    fn diameter_symmetry() {
        let k = PhysicalConstants::default();
        let d1 = cnt_diameter(Chirality::new(19, 0).unwrap(), &k);
        let d2 = cnt_diameter(Chirality::new(0, 19).unwrap(), &k);
        assert_eq!(d1, d2);
    }

    #[test]
    fn diameter_1_1() {
        let k = PhysicalConstants::default();
        let d = cnt_diameter(Chirality::new(1, 1).unwrap(), &k);
        assert!((d - 0.13728e-9).abs() < 1e-13, "d = {d}");
    }

    #[test]
    fn chirality_zero_rejected() {
        assert_eq!(Chirality::new(0, 0), Err(DeviceError::ZeroChirality));
    }

    #[test]
    fn vth_19_0() {
        let k = PhysicalConstants::default();
        let d = cnt_diameter(Chirality::new(19, 0).unwrap(), &k);
        let vth = threshold_voltage(d, &k).unwrap();
        assert!((vth - 0.2896).abs() < 1e-3, "vth = {vth}");
    }

    #[test]
    fn vth_1_1() {
        let k = PhysicalConstants::default();
        let d = cnt_diameter(Chirality::new(1, 1).unwrap(), &k);
        let vth = threshold_voltage(d, &k).unwrap();
        assert!((vth - 3.177).abs() < 1e-2, "vth = {vth}");
    }

    #[test]
    fn vth_inverse_proportional() {
        let k = PhysicalConstants::default();
        let v1 = threshold_voltage(1.0e-9, &k).unwrap();
        let v2 = threshold_voltage(2.0e-9, &k).unwrap();
        assert!((v1 / v2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn vth_rejects_nonpositive() {
        let k = PhysicalConstants::default();
        assert!(threshold_voltage(0.0, &k).is_err());
        assert!(threshold_voltage(-1e-9, &k).is_err());
    }

    #[test]
    fn zero_bias_zero_current() {
        let dev = nmos(3);
        assert_eq!(dev.drain_current(0.0, 0.0), 0.0);
        assert_eq!(dev.drain_current(0.9, 0.0), 0.0);
        assert_eq!(dev.drain_current(-0.5, 0.0), 0.0);
    }

    #[test]
    fn on_current_calibrated() {
        let dev = nmos(1);
        let i = dev.drain_current(V_ON_REF, V_ON_REF);
        // The gmin shunt adds tubes * 1e-12 * 0.9 on top of i_on.
        assert!((i - 20e-6).abs() < 1e-11, "i_on = {i}");
    }

    #[test]
    fn off_current_in_expected_band() {
        let dev = nmos(1);
        let i = dev.drain_current(0.0, 0.9);
        assert!(i >= 1e-12 && i <= 100e-12, "i_off = {i}");
    }

    #[test]
    fn tube_linearity_exact() {
        let base = nmos(3);
        let double = nmos(6);
        for &(vgs, vds) in &[(0.9, 0.9), (0.3, 0.1), (0.0, 0.9), (0.5, -0.4)] {
            assert_eq!(2.0 * base.drain_current(vgs, vds), double.drain_current(vgs, vds));
            let (gm1, gds1) = base.conductances(vgs, vds);
            let (gm2, gds2) = double.conductances(vgs, vds);
            assert_eq!(2.0 * gm1, gm2);
            assert_eq!(2.0 * gds1, gds2);
        }
    }

    #[test]
    fn np_mirror() {
        let n = nmos(2);
        let p = pmos(2);
        for &(vgs, vds) in &[(0.9, 0.9), (0.2, 0.4), (-0.3, 0.7), (0.6, -0.5)] {
            let sum = p.drain_current(vgs, vds) + n.drain_current(-vgs, -vds);
            assert_eq!(sum, 0.0);
        }
    }

    #[test]
    fn monotone_in_vgs_and_vds() {
        let dev = nmos(2);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=90 {
            let vgs = i as f64 * 0.01;
            let i_d = dev.drain_current(vgs, 0.6);
            assert!(i_d >= prev);
            prev = i_d;
        }
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=90 {
            let vds = i as f64 * 0.01;
            let i_d = dev.drain_current(0.5, vds);
            assert!(i_d >= prev);
            prev = i_d;
        }
    }

    #[test]
    fn cutoff_gds_is_gmin_floor() {
        let dev = nmos(1);
        let (_, gds) = dev.conductances(-0.5, 0.0);
        assert!((gds - GMIN_PER_TUBE).abs() < 0.01 * GMIN_PER_TUBE, "gds = {gds}");
    }

    #[test]
    #[should_panic(expected = "finite")]
    fn non_finite_bias_rejected() {
        nmos(1).drain_current(f64::NAN, 0.0);
    }

    #[test]
    fn conductances_match_finite_differences() {
        // Deterministic pseudo-random biases in [-0.9, 0.9]^2, skipping the
        // v_ds origin (curvature break of the signed extension) and points
        // where the channel conductance sits on the gmin floor.
        let dev = nmos(3);
        let pdev = pmos(2);
        let h = 1e-6;
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 1.8 - 0.9
        };
        let mut checked = 0;
        while checked < 500 {
            let (vgs, vds) = (rnd(), rnd());
            if vds.abs() < 1e-4 {
                continue;
            }
            for dev in [&dev, &pdev] {
                let (gm, gds) = dev.conductances(vgs, vds);
                let fd_gm = (dev.drain_current(vgs + h, vds) - dev.drain_current(vgs - h, vds)) / (2.0 * h);
                let fd_gds = (dev.drain_current(vgs, vds + h) - dev.drain_current(vgs, vds - h)) / (2.0 * h);
                for (a, f) in [(gm, fd_gm), (gds, fd_gds)] {
                    if a.abs() < 100.0 * GMIN_PER_TUBE {
                        assert!((a - f).abs() < 1e-10, "floor region: a={a} fd={f}");
                    } else {
                        assert!((a - f).abs() / a.abs() <= 1e-5, "a={a} fd={f}");
                    }
                }
            }
            checked += 1;
        }
    }
}
