//! Pole-aware root scanning: locate every zero of a G-branch in a window,
//! refine by bisection, and detect exceptional (lifted-pole) eigenvalues.

use rayon::prelude::*;
use serde::Serialize;

use crate::chains::{one_photon_chain_at_pole, two_photon_chain_at_pole};
use crate::error::{RabiError, Result};
use crate::extreal::ExtReal;
use crate::gfunc::{GBranch, GValue};
use crate::model::{
    derive_squeeze_frame, DisplacedFrame, FockParity, ModelParams, Parity, SectorLabel,
};

/// Scanner knobs; the defaults are the ones every CLI entry point uses.
#[derive(Clone, Copy, Debug)]
pub struct ScanConfig {
    /// Base grid density per unit of the scan variable.
    pub grid_per_unit: usize,
    /// Bisection stops when the bracket is this narrow (in x).
    pub refine_tol: f64,
    /// Roots closer than this are merged.
    pub dedup_tol: f64,
    /// Half-width of the exclusion zone around every pole.
    pub pole_exclusion: f64,
    /// Relative threshold on |f_n(x = n)| for the exceptional lift test.
    pub lift_tol: f64,
    /// Truncation ceiling override (None → per-branch default).
    pub trunc: Option<usize>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            grid_per_unit: 200,
            refine_tol: 1e-12,
            dedup_tol: 1e-9,
            pole_exclusion: 1e-6,
            lift_tol: 1e-8,
            trunc: None,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_per_unit == 0
            || self.refine_tol <= 0.0
            || self.dedup_tol <= 0.0
            || self.pole_exclusion <= 0.0
            || self.lift_tol <= 0.0
        {
            return Err(RabiError::InvalidParameter(
                "scan tolerances must be positive".into(),
            ));
        }
        if self.pole_exclusion <= self.refine_tol {
            return Err(RabiError::InvalidParameter(
                "pole_exclusion must exceed refine_tol".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RootKind {
    #[serde(rename = "regular")]
    Regular,
    #[serde(rename = "exceptional")]
    Exceptional,
}

impl RootKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RootKind::Regular => "regular",
            RootKind::Exceptional => "exceptional",
        }
    }
}

/// A located eigenvalue.
///
/// Regular roots carry the sign-change bracket and |G| at the root relative
/// to the local scale.  Exceptional roots sit exactly on a pole; their
/// residual is the relative lift value |f_n(n)| / max_{k<n} |f_k(n)|.
#[derive(Clone, Copy, Debug)]
pub struct Root {
    pub x: f64,
    pub energy: f64,
    pub sector: SectorLabel,
    pub residual: f64,
    pub kind: RootKind,
    pub bracket: (f64, f64),
}

/// Near-tangent zero candidate: a deep |G| minimum without a sign change.
/// Never auto-promoted to a root; the validation pipeline decides.
#[derive(Clone, Copy, Debug)]
pub struct Suspect {
    pub x: f64,
    pub log2_abs_g: f64,
    pub sector: SectorLabel,
}

/// Everything a window scan produced.
#[derive(Clone, Debug, Default)]
pub struct ScanOutcome {
    pub roots: Vec<Root>,
    pub suspects: Vec<Suspect>,
    /// Grid points whose G-value failed the tail criterion at the ceiling.
    pub unconverged_points: usize,
}

impl ScanOutcome {
    fn merge(&mut self, mut other: ScanOutcome) {
        self.roots.append(&mut other.roots);
        self.suspects.append(&mut other.suspects);
        self.unconverged_points += other.unconverged_points;
    }
}

/// All sign-change zeros of `branch` on `window`, bisection-refined.
///
/// The grid is laid out per pole-free segment, with geometrically spaced
/// extra points stacked toward each pole so zeros hugging a pole are still
/// bracketed.  Zeros inside the pole exclusion zones are unreachable here;
/// they are the business of [`find_exceptional`].
pub fn find_zeros(branch: &GBranch, window: (f64, f64), cfg: &ScanConfig) -> Result<ScanOutcome> {
    cfg.validate()?;
    let (lo, hi) = window;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(RabiError::WindowEmpty);
    }

    let poles: Vec<f64> = branch.poles(window).positions().collect();
    let mut cuts = vec![lo];
    for &p in &poles {
        cuts.push((p - cfg.pole_exclusion).max(lo));
        cuts.push((p + cfg.pole_exclusion).min(hi));
    }
    cuts.push(hi);

    let mut outcome = ScanOutcome::default();
    for seg in cuts.chunks(2) {
        let (a, b) = (seg[0], seg[1]);
        if b - a > cfg.refine_tol {
            outcome.merge(scan_segment(branch, a, b, cfg)?);
        }
    }

    outcome
        .roots
        .sort_by(|r, s| r.x.partial_cmp(&s.x).unwrap());
    outcome.roots = dedup_roots(outcome.roots, cfg.dedup_tol);
    Ok(outcome)
}

fn scan_segment(branch: &GBranch, a: f64, b: f64, cfg: &ScanConfig) -> Result<ScanOutcome> {
    let len = b - a;
    let base = ((len * cfg.grid_per_unit as f64).ceil() as usize).max(1);
    let spacing = len / base as f64;

    let mut grid: Vec<f64> = (0..=base).map(|i| a + len * i as f64 / base as f64).collect();
    // geometric ladders toward both ends catch zeros crowding a pole
    let mut d = cfg.pole_exclusion;
    while d < spacing {
        grid.push(a + d);
        grid.push(b - d);
        d *= 2.0;
    }
    grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
    grid.dedup_by(|x, y| (*x - *y).abs() < cfg.refine_tol);

    let values: Vec<GValue> = grid
        .par_iter()
        .map(|&x| branch.eval(x, cfg.trunc))
        .collect::<Result<Vec<_>>>()?;

    let unconverged_points = values.iter().filter(|v| !v.converged).count();
    let seg_max_log2 = values
        .iter()
        .map(|v| v.value.log2_abs())
        .fold(f64::NEG_INFINITY, f64::max);

    let mut roots = Vec::new();
    let mut suspects = Vec::new();
    for i in 1..grid.len() {
        let (s0, s1) = (values[i - 1].value.signum(), values[i].value.signum());
        if s0 == 0 {
            // exact zero on a grid point
            roots.push(make_root(branch, grid[i - 1], grid[i - 1], grid[i - 1], 0.0));
            continue;
        }
        if s1 != 0 && s0 != s1 {
            let (xa, xb) = (grid[i - 1], grid[i]);
            let root = refine_bisection(branch, xa, xb, s0, cfg)?;
            let scale = values[i - 1].value.log2_abs().max(values[i].value.log2_abs());
            let rel = root.1 - scale;
            roots.push(make_root(branch, root.0 .0, root.0 .1, 0.5 * (root.0 .0 + root.0 .1), rel.exp2()));
        }
    }
    // deep local minima without a sign change
    for i in 1..grid.len().saturating_sub(1) {
        let m = values[i].value.log2_abs();
        if m < values[i - 1].value.log2_abs()
            && m < values[i + 1].value.log2_abs()
            && m - seg_max_log2 < (1e-10f64).log2()
            && values[i - 1].value.signum() == values[i + 1].value.signum()
            && values[i].value.signum() == values[i + 1].value.signum()
        {
            suspects.push(Suspect { x: grid[i], log2_abs_g: m, sector: branch.sector() });
        }
    }

    Ok(ScanOutcome { roots, suspects, unconverged_points })
}

fn make_root(branch: &GBranch, lo: f64, hi: f64, x: f64, residual: f64) -> Root {
    Root {
        x,
        energy: branch.x_to_energy(x),
        sector: branch.sector(),
        residual,
        kind: RootKind::Regular,
        bracket: (lo, hi),
    }
}

/// Plain bisection: G swings violently near poles, so the bracket guarantee
/// beats superlinear methods here.  Returns the final bracket and
/// log2|G(midpoint)|.
fn refine_bisection(
    branch: &GBranch,
    mut a: f64,
    mut b: f64,
    sign_a: i8,
    cfg: &ScanConfig,
) -> Result<((f64, f64), f64)> {
    let mut sa = sign_a;
    let mut mid_log2 = f64::NEG_INFINITY;
    for _ in 0..50 {
        if b - a <= cfg.refine_tol {
            break;
        }
        let m = 0.5 * (a + b);
        let gv = branch.eval(m, cfg.trunc)?;
        mid_log2 = gv.value.log2_abs();
        let sm = gv.value.signum();
        if sm == 0 {
            return Ok(((m, m), f64::NEG_INFINITY));
        }
        if sm == sa {
            a = m;
            sa = sm;
        } else {
            b = m;
        }
    }
    Ok(((a, b), mid_log2))
}

fn dedup_roots(roots: Vec<Root>, tol: f64) -> Vec<Root> {
    let mut out: Vec<Root> = Vec::with_capacity(roots.len());
    for r in roots {
        if let Some(last) = out.last_mut() {
            if (r.x - last.x).abs() <= tol {
                if r.residual < last.residual {
                    *last = r;
                }
                continue;
            }
        }
        out.push(r);
    }
    out
}

/// Exceptional (lifted-pole) eigenvalues for pole indices `n_lo..=n_hi`.
///
/// The chain numerator is evaluated exactly at its pole — well defined
/// because the recurrence only uses sub-pole denominators — and the pole is
/// declared lifted when |f_n(n)| < lift_tol · max_{k<n} |f_k(n)|.  At Δ = 0
/// the G-functions have no poles at all (the residue carries a factor Δ),
/// so every pole energy is an exact eigenvalue of the decoupled model.
///
/// Exceptional levels are doubly degenerate and belong to both ± branches;
/// they are labeled with the plus branch of their chain parity by
/// convention.
pub fn find_exceptional(
    model: &ModelParams,
    n_lo: usize,
    n_hi: usize,
    cfg: &ScanConfig,
) -> Result<Vec<Root>> {
    cfg.validate()?;
    let mut out = Vec::new();
    let delta = model.delta();
    for n in n_lo..=n_hi {
        match model {
            ModelParams::OnePhoton(p) => {
                let frames: &[DisplacedFrame] = if p.eps == 0.0 {
                    &[DisplacedFrame::A]
                } else {
                    &[DisplacedFrame::A, DisplacedFrame::B]
                };
                for &frame in frames {
                    let chain = one_photon_chain_at_pole(p, frame, n);
                    let lift = if delta == 0.0 {
                        Some(0.0)
                    } else if p.g == 0.0 {
                        None // undisplaced frames carry no pole lift to test
                    } else {
                        lift_ratio_scaled(&chain.terms, p.g, n)
                            .filter(|r| *r < cfg.lift_tol)
                    };
                    if let Some(residual) = lift {
                        let x = chain.x;
                        out.push(Root {
                            x,
                            energy: p.x_to_energy(x),
                            sector: if p.eps == 0.0 {
                                SectorLabel::OnePhotonPlus
                            } else {
                                SectorLabel::OnePhotonBiased
                            },
                            residual,
                            kind: RootKind::Exceptional,
                            bracket: (x, x),
                        });
                    }
                }
            }
            ModelParams::TwoPhoton(p) => {
                let frame = derive_squeeze_frame(p)?;
                let lift = if delta == 0.0 {
                    Some(0.0)
                } else {
                    let chain = two_photon_chain_at_pole(p, n)?;
                    lift_ratio(&chain.terms, n, 2).filter(|r| *r < cfg.lift_tol)
                };
                if let Some(residual) = lift {
                    let fock = if n % 2 == 0 { FockParity::Even } else { FockParity::Odd };
                    out.push(Root {
                        x: n as f64,
                        energy: frame.pole_energy(n),
                        sector: SectorLabel::two_photon(fock, Parity::Plus),
                        residual,
                        kind: RootKind::Exceptional,
                        bracket: (n as f64, n as f64),
                    });
                }
            }
        }
    }
    out.sort_by(|r, s| r.energy.partial_cmp(&s.energy).unwrap());
    Ok(out)
}

/// |f_n| / max_{k<n} |f_k| over the populated stride.
fn lift_ratio(terms: &[ExtReal], n: usize, stride: usize) -> Option<f64> {
    if n < stride {
        return None; // first chain entry is the initialization, never zero
    }
    let mut max_below = ExtReal::ZERO;
    let mut k = n % stride;
    while k < n {
        if terms[k].abs().cmp_abs(max_below) == std::cmp::Ordering::Greater {
            max_below = terms[k].abs();
        }
        k += stride;
    }
    if max_below.is_zero() {
        return None;
    }
    Some((terms[n].abs().log2_abs() - max_below.log2_abs()).exp2())
}

/// Same test for the g-scaled one-photon chain: f_k = t_k g^{-k}.
fn lift_ratio_scaled(terms: &[ExtReal], g: f64, n: usize) -> Option<f64> {
    if n == 0 {
        return None;
    }
    let inv_g = ExtReal::from_f64(1.0 / g);
    let mut unscaled = Vec::with_capacity(n + 1);
    let mut w = ExtReal::ONE;
    for &t in terms.iter().take(n + 1) {
        unscaled.push(t * w);
        w = w * inv_g;
    }
    lift_ratio(&unscaled, n, 1)
}

/// The full spectrum of a model in an energy window: every G-branch scanned,
/// exceptional poles tested, everything merged and sorted by energy.
pub fn find_spectrum(
    model: &ModelParams,
    energy_window: (f64, f64),
    cfg: &ScanConfig,
) -> Result<ScanOutcome> {
    cfg.validate()?;
    let (e_lo, e_hi) = energy_window;
    if !(e_lo < e_hi) {
        return Err(RabiError::WindowEmpty);
    }

    let branches: Vec<GBranch> = match model {
        ModelParams::OnePhoton(p) if p.eps == 0.0 => vec![
            GBranch::OnePhotonG0 { params: *p, parity: Parity::Plus },
            GBranch::OnePhotonG0 { params: *p, parity: Parity::Minus },
        ],
        ModelParams::OnePhoton(p) => vec![GBranch::OnePhotonBiased { params: *p }],
        ModelParams::TwoPhoton(p) => vec![
            GBranch::TwoPhoton { params: *p, fock: FockParity::Even, parity: Parity::Plus },
            GBranch::TwoPhoton { params: *p, fock: FockParity::Even, parity: Parity::Minus },
            GBranch::TwoPhoton { params: *p, fock: FockParity::Odd, parity: Parity::Plus },
            GBranch::TwoPhoton { params: *p, fock: FockParity::Odd, parity: Parity::Minus },
        ],
    };

    let mut outcome = ScanOutcome::default();
    for branch in &branches {
        let window = (branch.energy_to_x(e_lo), branch.energy_to_x(e_hi));
        outcome.merge(find_zeros(branch, window, cfg)?);
    }

    // pole indices whose x could fall in any branch window
    let x_hi = model.energy_to_x(e_hi)?;
    if x_hi >= 0.0 {
        let n_hi = x_hi.ceil() as usize + 1;
        let mut exceptional = find_exceptional(model, 0, n_hi, cfg)?;
        exceptional.retain(|r| r.energy >= e_lo && r.energy <= e_hi);
        outcome.roots.append(&mut exceptional);
    }

    outcome
        .roots
        .sort_by(|r, s| r.energy.partial_cmp(&s.energy).unwrap());
    Ok(outcome)
}
