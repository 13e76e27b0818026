//! Butterfly curves and maximal-square noise-margin extraction.
//!
//! The two voltage-transfer curves are overlaid in the unit box (the
//! mirrored one already axis-swapped). Both curves are single valued — the
//! forward one in x, the mirrored one in its injected y — so the plane
//! splits into four faces and the two butterfly lobes are exactly:
//! upper-left = below the forward curve and right of the mirrored one,
//! lower-right = above the forward curve and left of the mirrored one.
//!
//! Extraction runs in two passes. A rotated-coordinate ray pass casts the
//! 45-degree anti-diagonal family from every curve sample (linear
//! interpolation along the opposite polyline), validates each ray's face
//! and finds the diagonal clearance of each lobe; that locates the lobe and
//! rejects degenerate eyes. A rasterized largest-empty-square search seeded
//! by the best ray then measures the side of the largest square that fits
//! inside the lobe, which is the reported margin.
//!
//! Hold/read margins take the smaller lobe. Write margins use the same
//! machinery on the write-configured butterfly: a successful write leaves
//! the curves with exactly one crossing, and the margin is the largest
//! square in the opened eye region; a failed (still bistable) write reports
//! zero margin.

use crate::cells::CellKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnmMode {
    Hold,
    Read,
    Write,
}

/// Paired voltage-transfer curves of one cell under one bias mode.
#[derive(Debug, Clone)]
pub struct ButterflyCurve {
    /// (v_in, v_out) of the first inverter.
    pub forward: Vec<(f64, f64)>,
    /// (v_out, v_in) of the second inverter: already mirrored about the
    /// 45-degree line.
    pub mirrored: Vec<(f64, f64)>,
    pub mode: SnmMode,
    pub kind: Option<CellKind>,
    pub vdd: f64,
}

impl ButterflyCurve {
    /// CSV export: the two polylines side by side.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fwd_in,fwd_out,mir_x,mir_y\n");
        let rows = self.forward.len().max(self.mirrored.len());
        for i in 0..rows {
            let f = self.forward.get(i);
            let m = self.mirrored.get(i);
            let cell = |v: Option<f64>| v.map(|x| format!("{x:.17e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                cell(f.map(|p| p.0)),
                cell(f.map(|p| p.1)),
                cell(m.map(|p| p.0)),
                cell(m.map(|p| p.1)),
            ));
        }
        out
    }
}

/// Extracted noise margins.
#[derive(Debug, Clone)]
pub struct SnmReport {
    /// Hold/read: min of the lobes. Write: margin of the opened eye, zero
    /// when the write fails.
    pub snm: f64,
    pub lobe_high: f64,
    pub lobe_low: f64,
    pub mode: SnmMode,
    pub kind: Option<CellKind>,
    /// No eye opening found.
    pub degenerate_eye: bool,
    /// Write mode only: curves cross exactly once.
    pub monostable: Option<bool>,
}

impl SnmReport {
    pub fn csv_header() -> &'static str {
        "cell,mode,snm_v,lobe_high_v,lobe_low_v,degenerate,monostable\n"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{:?},{:.17e},{:.17e},{:.17e},{},{}\n",
            self.kind.map(|k| k.name()).unwrap_or("-"),
            self.mode,
            self.snm,
            self.lobe_high,
            self.lobe_low,
            self.degenerate_eye,
            self.monostable.map(|m| m.to_string()).unwrap_or_default(),
        )
    }
}

/// Plain-text comparison table: cell name column, value column.
pub fn comparison_table(title: &str, rows: &[(String, f64)]) -> String {
    let mut out = format!("{title}\n");
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(4).max(4);
    for (name, value) in rows {
        out.push_str(&format!("{name:<width$}  {:.4}\n", value, width = width));
    }
    out
}

/// Clearance below which a lobe counts as closed (V).
const EYE_GATE: f64 = 2e-3;

/// Nearest positive ray-polyline crossing, rays cast along `dir` (components
/// are +-1; `t` is then the square side in volts).
fn nearest_crossing(p: (f64, f64), dir: (f64, f64), poly: &[(f64, f64)], t_min: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for seg in poly.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let ex = b.0 - a.0;
        let ey = b.1 - a.1;
        // Solve p + t*dir = a + s*e. Near-parallel segments are skipped on a
        // scale-relative threshold so rounding noise cannot fabricate far
        // intersections.
        let det = dir.0 * (-ey) - dir.1 * (-ex);
        if det.abs() < 1e-9 * (ex.abs() + ey.abs()).max(1e-30) {
            continue;
        }
        let rx = a.0 - p.0;
        let ry = a.1 - p.1;
        let t = (rx * (-ey) - ry * (-ex)) / det;
        let s = (dir.0 * ry - dir.1 * rx) / det;
        if t > t_min && t < 10.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
            best = Some(best.map_or(t, |b: f64| b.min(t)));
        }
    }
    best
}

/// Piecewise-linear interpolation of `samples` as a function of its first
/// coordinate (assumed monotone ascending).
fn interp(samples: &[(f64, f64)], x: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    if x <= samples[0].0 {
        return samples[0].1;
    }
    if x >= samples[samples.len() - 1].0 {
        return samples[samples.len() - 1].1;
    }
    let i = samples.partition_point(|p| p.0 <= x);
    let (x0, y0) = samples[i - 1];
    let (x1, y1) = samples[i];
    if x1 == x0 {
        y1
    } else {
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

fn in_lobe(fwd: &[(f64, f64)], mir_by_y: &[(f64, f64)], p: (f64, f64), upper_left: bool) -> bool {
    let f_at = interp(fwd, p.0);
    let g_at = interp(mir_by_y, p.1);
    if upper_left {
        p.1 < f_at && p.0 > g_at
    } else {
        p.1 > f_at && p.0 < g_at
    }
}

/// Largest diagonal clearance inside one lobe: anchors on both curves,
/// nearest crossing against either curve, midpoint required to lie in the
/// lobe's face. Returns the clearance and the midpoint of its ray.
fn lobe_clearance(
    fwd: &[(f64, f64)],
    mir: &[(f64, f64)],
    mir_by_y: &[(f64, f64)],
    upper_left: bool,
    t_min: f64,
) -> Option<(f64, (f64, f64))> {
    let dir_from_fwd = if upper_left { (-1.0, 1.0) } else { (1.0, -1.0) };
    let dir_from_mir = (-dir_from_fwd.0, -dir_from_fwd.1);
    let mut best: Option<(f64, (f64, f64))> = None;
    let mut consider = |p: (f64, f64), dir: (f64, f64)| {
        let t_a = nearest_crossing(p, dir, fwd, t_min);
        let t_b = nearest_crossing(p, dir, mir, t_min);
        let t = match (t_a, t_b) {
            (Some(x), Some(y)) => x.min(y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => return,
        };
        if best.map(|(bt, _)| t <= bt).unwrap_or(false) {
            return;
        }
        let mid = (p.0 + dir.0 * t / 2.0, p.1 + dir.1 * t / 2.0);
        if in_lobe(fwd, mir_by_y, mid, upper_left) {
            best = Some((t, mid));
        }
    };
    for p in fwd {
        consider(*p, dir_from_fwd);
    }
    for p in mir {
        consider(*p, dir_from_mir);
    }
    best
}

/// Raster resolution of the largest-square search (cells per vdd).
const N_CELLS: usize = 1800;

struct Raster {
    n: usize,
    px: f64,
    blocked: Vec<bool>,
}

impl Raster {
    fn new(vdd: f64, curves: &[&[(f64, f64)]]) -> Self {
        let n = N_CELLS;
        let px = vdd / n as f64;
        let mut blocked = vec![false; n * n];
        let clamp = |i: f64| -> usize { (i.max(0.0) as usize).min(n - 1) };
        for poly in curves {
            for seg in poly.windows(2) {
                let (a, b) = (seg[0], seg[1]);
                let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
                let steps = ((len / (px * 0.25)).ceil() as usize).max(1);
                for k in 0..=steps {
                    let f = k as f64 / steps as f64;
                    let x = a.0 + f * (b.0 - a.0);
                    let y = a.1 + f * (b.1 - a.1);
                    blocked[clamp((y / px).floor()) * n + clamp((x / px).floor())] = true;
                }
            }
        }
        Raster { n, px, blocked }
    }

    /// Flood-fills the free component holding `seed` (4-connected, so the
    /// rasterized curves wall it off) and returns the side of the largest
    /// square of component cells.
    fn largest_square_from(&self, seed: (f64, f64)) -> usize {
        let n = self.n;
        let to_cell = |v: f64| -> isize { (v / self.px).floor() as isize };
        let (mut si, mut sj) = (to_cell(seed.0), to_cell(seed.1));
        let mut found = false;
        'nudge: for r in 0..4isize {
            for dj in -r..=r {
                for di in -r..=r {
                    let (i, j) = (si + di, sj + dj);
                    if i >= 0
                        && j >= 0
                        && (i as usize) < n
                        && (j as usize) < n
                        && !self.blocked[j as usize * n + i as usize]
                    {
                        si = i;
                        sj = j;
                        found = true;
                        break 'nudge;
                    }
                }
            }
        }
        if !found {
            return 0;
        }
        let mut comp = vec![false; n * n];
        let mut queue = std::collections::VecDeque::new();
        comp[sj as usize * n + si as usize] = true;
        queue.push_back((si as usize, sj as usize));
        while let Some((i, j)) = queue.pop_front() {
            let push = |i: usize,
                            j: usize,
                            queue: &mut std::collections::VecDeque<(usize, usize)>,
                            comp: &mut Vec<bool>| {
                let idx = j * n + i;
                if !self.blocked[idx] && !comp[idx] {
                    comp[idx] = true;
                    queue.push_back((i, j));
                }
            };
            if i > 0 {
                push(i - 1, j, &mut queue, &mut comp);
            }
            if i + 1 < n {
                push(i + 1, j, &mut queue, &mut comp);
            }
            if j > 0 {
                push(i, j - 1, &mut queue, &mut comp);
            }
            if j + 1 < n {
                push(i, j + 1, &mut queue, &mut comp);
            }
        }
        let mut dp = vec![0u32; n * n];
        let mut best = 0u32;
        for j in 0..n {
            for i in 0..n {
                let idx = j * n + i;
                if !comp[idx] {
                    continue;
                }
                let v = if i == 0 || j == 0 {
                    1
                } else {
                    1 + dp[idx - 1].min(dp[idx - n]).min(dp[idx - n - 1])
                };
                dp[idx] = v;
                best = best.max(v);
            }
        }
        best as usize
    }
}

/// Counts proper crossings between the two polylines, clustering near-
/// coincident hits.
pub fn count_intersections(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> usize {
    let mut hits: Vec<(f64, f64)> = Vec::new();
    for sa in a.windows(2) {
        for sb in b.windows(2) {
            let (p, q) = (sa[0], sa[1]);
            let (r, s) = (sb[0], sb[1]);
            let d1 = (q.0 - p.0, q.1 - p.1);
            let d2 = (s.0 - r.0, s.1 - r.1);
            let det = d1.0 * d2.1 - d1.1 * d2.0;
            if det.abs() < 1e-18 {
                continue;
            }
            let rx = r.0 - p.0;
            let ry = r.1 - p.1;
            let t = (rx * d2.1 - ry * d2.0) / det;
            let u = (rx * d1.1 - ry * d1.0) / det;
            if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
                hits.push((p.0 + t * d1.0, p.1 + t * d1.1));
            }
        }
    }
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    for h in hits {
        if !clusters.iter().any(|c| (c.0 - h.0).abs() < tol && (c.1 - h.1).abs() < tol) {
            clusters.push(h);
        }
    }
    clusters.len()
}

/// Extracts the maximal-square noise margins of a butterfly curve.
pub fn snm_max_square(curve: &ButterflyCurve) -> SnmReport {
    let fwd = &curve.forward;
    let mir = &curve.mirrored;
    let vdd = curve.vdd;

    let mut lobe_high = 0.0;
    let mut lobe_low = 0.0;
    if fwd.len() >= 2 && mir.len() >= 2 {
        let mut mir_by_y: Vec<(f64, f64)> = mir.iter().map(|&(x, y)| (y, x)).collect();
        mir_by_y.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let t_min = vdd * 1e-4;
        let raster = Raster::new(vdd, &[fwd.as_slice(), mir.as_slice()]);
        for (slot, upper_left) in [(0usize, true), (1usize, false)] {
            let Some((t, seed)) = lobe_clearance(fwd, mir, &mir_by_y, upper_left, t_min) else {
                continue;
            };
            if t < EYE_GATE {
                continue;
            }
            let cells = raster.largest_square_from(seed);
            let side = if cells > 0 { (cells as f64 + 1.0) * raster.px } else { 0.0 };
            if slot == 0 {
                lobe_high = side;
            } else {
                lobe_low = side;
            }
        }
    }

    match curve.mode {
        SnmMode::Hold | SnmMode::Read => {
            let snm = lobe_high.min(lobe_low);
            SnmReport {
                snm,
                lobe_high,
                lobe_low,
                mode: curve.mode,
                kind: curve.kind,
                degenerate_eye: snm == 0.0,
                monostable: None,
            }
        }
        SnmMode::Write => {
            let crossings = count_intersections(fwd, mir, 8e-3);
            let monostable = crossings == 1;
            let snm = if monostable { lobe_high.max(lobe_low) } else { 0.0 };
            SnmReport {
                snm,
                lobe_high,
                lobe_low,
                mode: SnmMode::Write,
                kind: curve.kind,
                degenerate_eye: lobe_high.max(lobe_low) == 0.0,
                monostable: Some(monostable),
            }
        }
    }
}
