//! Assembly of G-function and displacement-series values from coefficient
//! chains, plus the pole structure of each branch.
//!
//! Overall constants that multiply a whole branch (e^{−g²/2}, squeeze-frame
//! normalizations, chain rescalings) are dropped everywhere: zeros are
//! invariant and dropping them avoids under/overflow at strong coupling.
//! Values come back as [`ExtReal`]; root finding only ever consumes signs
//! and relative magnitudes.

use crate::chains::{
    falpha_chain, falpha_weights, one_photon_chain, settle_index, squeeze_overlaps, two_photon_chain,
    TailTracker, FALPHA_M_MAX, ONE_PHOTON_N_MAX, TWO_PHOTON_N_MAX,
};
use crate::error::{RabiError, Result};
use crate::extreal::ExtReal;
use crate::model::{
    derive_squeeze_frame, DisplacedFrame, FockParity, OnePhotonParams, Parity, SectorLabel,
    TwoPhotonParams,
};

/// Adaptive evaluation starts at this truncation and doubles until the tail
/// criterion holds or the branch ceiling is reached.
const ADAPTIVE_START: usize = 60;

/// A G-function (or F(α)) value in extended range.
#[derive(Clone, Copy, Debug)]
pub struct GValue {
    pub value: ExtReal,
    /// False whenever any underlying chain or assembled series failed the
    /// tail criterion at the ceiling.
    pub converged: bool,
    /// Distance from `x` to the nearest pole of the branch (+inf if none).
    pub nearest_pole_distance: f64,
}

/// Which denominator family a pole comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoleFamily {
    /// x = n (unbiased one-photon; two-photon with the sector's parity).
    Integer,
    /// x = n − ε/2 (biased, frame A).
    IntegerMinusHalfEps,
    /// x = n + ε/2 (biased, frame B).
    IntegerPlusHalfEps,
}

/// A single pole position with its index and family tag.
#[derive(Clone, Copy, Debug)]
pub struct Pole {
    pub x: f64,
    pub index: usize,
    pub family: PoleFamily,
}

/// Strictly increasing pole positions of a branch inside a window.
#[derive(Clone, Debug, Default)]
pub struct PoleSet {
    pub poles: Vec<Pole>,
}

impl PoleSet {
    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        self.poles.iter().map(|p| p.x)
    }

    pub fn nearest_distance(&self, x: f64) -> f64 {
        self.poles
            .iter()
            .map(|p| (p.x - x).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// One evaluable G-branch: everything the root scanner needs to know.
#[derive(Clone, Copy, Debug)]
pub enum GBranch {
    /// G₀^±(x) = Σ t_n (1 ∓ (Δ/2)/(x−n)), unbiased one-photon.
    OnePhotonG0 { params: OnePhotonParams, parity: Parity },
    /// G_ε(x) = (Δ/2)² R̄⁺R̄⁻ − R⁺R⁻, biased one-photon.
    OnePhotonBiased { params: OnePhotonParams },
    /// G_{e,o}^±(x) = Σ f_n [1 ± Δ(u²+v²)/(2(n−x))] L_n, two-photon.
    TwoPhoton { params: TwoPhotonParams, fock: FockParity, parity: Parity },
    /// F(α) = Σ_j (2α)^j/j! c_{M−j}; the scan variable is α, pole-free.
    FAlpha { params: OnePhotonParams, parity: Parity },
}

impl GBranch {
    pub fn sector(&self) -> SectorLabel {
        match self {
            GBranch::OnePhotonG0 { parity: Parity::Plus, .. } => SectorLabel::OnePhotonPlus,
            GBranch::OnePhotonG0 { parity: Parity::Minus, .. } => SectorLabel::OnePhotonMinus,
            GBranch::OnePhotonBiased { .. } => SectorLabel::OnePhotonBiased,
            GBranch::TwoPhoton { fock, parity, .. } => SectorLabel::two_photon(*fock, *parity),
            GBranch::FAlpha { parity: Parity::Plus, .. } => SectorLabel::FAlphaPlus,
            GBranch::FAlpha { parity: Parity::Minus, .. } => SectorLabel::FAlphaMinus,
        }
    }

    pub fn default_ceiling(&self) -> usize {
        match self {
            GBranch::OnePhotonG0 { .. } | GBranch::OnePhotonBiased { .. } => ONE_PHOTON_N_MAX,
            GBranch::TwoPhoton { .. } => TWO_PHOTON_N_MAX,
            GBranch::FAlpha { .. } => FALPHA_M_MAX,
        }
    }

    /// Physical energy of a point on the scan axis.
    pub fn x_to_energy(&self, x: f64) -> f64 {
        match self {
            GBranch::OnePhotonG0 { params, .. } | GBranch::OnePhotonBiased { params } => {
                params.x_to_energy(x)
            }
            GBranch::TwoPhoton { params, .. } => derive_squeeze_frame(params)
                .expect("validated params")
                .x_to_energy(x),
            // E^± = αg ∓ Δ/2
            GBranch::FAlpha { params, parity } => {
                x * params.g - parity.sign() * params.delta / 2.0
            }
        }
    }

    pub fn energy_to_x(&self, energy: f64) -> f64 {
        match self {
            GBranch::OnePhotonG0 { params, .. } | GBranch::OnePhotonBiased { params } => {
                params.energy_to_x(energy)
            }
            GBranch::TwoPhoton { params, .. } => derive_squeeze_frame(params)
                .expect("validated params")
                .energy_to_x(energy),
            GBranch::FAlpha { params, parity } => {
                (energy + parity.sign() * params.delta / 2.0) / params.g
            }
        }
    }

    /// Pole positions inside `window` (empty for the displacement series).
    pub fn poles(&self, window: (f64, f64)) -> PoleSet {
        let (lo, hi) = window;
        let mut poles = Vec::new();
        let mut push_family = |family: PoleFamily, offset: f64| {
            let step = match self {
                GBranch::TwoPhoton { .. } => 2usize,
                _ => 1usize,
            };
            let start = match self {
                GBranch::TwoPhoton { fock, .. } => fock.start_index(),
                _ => 0usize,
            };
            let mut n = start;
            loop {
                let x = n as f64 + offset;
                if x > hi {
                    break;
                }
                if x >= lo {
                    poles.push(Pole { x, index: n, family });
                }
                n += step;
                if n > 10_000_000 {
                    break; // window sanity bound
                }
            }
        };
        match self {
            GBranch::OnePhotonG0 { .. } => push_family(PoleFamily::Integer, 0.0),
            GBranch::OnePhotonBiased { params } => {
                push_family(PoleFamily::IntegerMinusHalfEps, -params.eps / 2.0);
                push_family(PoleFamily::IntegerPlusHalfEps, params.eps / 2.0);
            }
            GBranch::TwoPhoton { .. } => push_family(PoleFamily::Integer, 0.0),
            GBranch::FAlpha { .. } => {}
        }
        poles.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
        PoleSet { poles }
    }

    /// Evaluate the branch at `x`, adaptively growing the truncation from
    /// 60 toward `ceiling` (None → the branch default) until the assembled
    /// tail criterion holds.
    pub fn eval(&self, x: f64, ceiling: Option<usize>) -> Result<GValue> {
        let ceiling = ceiling.unwrap_or_else(|| self.default_ceiling());
        match self {
            GBranch::FAlpha { params, parity } => eval_falpha(params, x, *parity, ceiling),
            _ => {
                let mut n = ADAPTIVE_START.min(ceiling);
                loop {
                    let gv = match self {
                        GBranch::OnePhotonG0 { params, parity } => {
                            assemble_g0(params, x, *parity, n)?
                        }
                        GBranch::OnePhotonBiased { params } => assemble_biased(params, x, n)?,
                        GBranch::TwoPhoton { params, fock, parity } => {
                            assemble_g2p(params, x, *fock, *parity, n)?
                        }
                        GBranch::FAlpha { .. } => unreachable!(),
                    };
                    if gv.converged || n >= ceiling {
                        return Ok(gv);
                    }
                    n = (2 * n).min(ceiling);
                }
            }
        }
    }
}

fn assemble_g0(p: &OnePhotonParams, x: f64, parity: Parity, n_max: usize) -> Result<GValue> {
    let chain = one_photon_chain(p, p.x_to_energy(x), DisplacedFrame::A, n_max)?;
    let sign = parity.sign();
    let half_delta = p.delta / 2.0;

    let mut sum = ExtReal::ZERO;
    let mut tail = TailTracker::new(settle_index(x));
    let mut nearest = f64::INFINITY;
    for (n, &t) in chain.terms.iter().enumerate() {
        let d = x - n as f64;
        nearest = nearest.min(d.abs());
        let s = t.scale_f64(1.0 - sign * half_delta / d);
        sum = sum + s;
        tail.push(n, s.abs());
    }
    Ok(GValue {
        value: sum,
        converged: chain.converged && tail.converged,
        nearest_pole_distance: nearest,
    })
}

fn assemble_biased(p: &OnePhotonParams, x: f64, n_max: usize) -> Result<GValue> {
    let energy = p.x_to_energy(x);
    let minus = one_photon_chain(p, energy, DisplacedFrame::A, n_max)?; // K⁻
    let plus = one_photon_chain(p, energy, DisplacedFrame::B, n_max)?; // K⁺
    let half_eps = p.eps / 2.0;
    let half_delta = p.delta / 2.0;

    let len = minus.terms.len().min(plus.terms.len());
    let mut r_minus = ExtReal::ZERO;
    let mut r_plus = ExtReal::ZERO;
    let mut rbar_minus = ExtReal::ZERO;
    let mut rbar_plus = ExtReal::ZERO;
    let mut tails = [
        TailTracker::new(settle_index(x)),
        TailTracker::new(settle_index(x)),
        TailTracker::new(settle_index(x)),
        TailTracker::new(settle_index(x)),
    ];
    let mut nearest = f64::INFINITY;
    for n in 0..len {
        let d_minus = x - n as f64 + half_eps;
        let d_plus = x - n as f64 - half_eps;
        nearest = nearest.min(d_minus.abs()).min(d_plus.abs());

        let tm = minus.terms[n];
        let tp = plus.terms[n];
        let bm = tm.scale_f64(1.0 / d_minus);
        let bp = tp.scale_f64(1.0 / d_plus);
        r_minus = r_minus + tm;
        r_plus = r_plus + tp;
        rbar_minus = rbar_minus + bm;
        rbar_plus = rbar_plus + bp;
        tails[0].push(n, tm.abs());
        tails[1].push(n, tp.abs());
        tails[2].push(n, bm.abs());
        tails[3].push(n, bp.abs());
    }
    let value = rbar_plus * rbar_minus.scale_f64(half_delta * half_delta) - r_plus * r_minus;
    Ok(GValue {
        value,
        converged: minus.converged && plus.converged && tails.iter().all(|t| t.converged),
        nearest_pole_distance: nearest,
    })
}

fn assemble_g2p(
    p: &TwoPhotonParams,
    x: f64,
    fock: FockParity,
    parity: Parity,
    n_max: usize,
) -> Result<GValue> {
    let frame = derive_squeeze_frame(p)?;
    let chain = two_photon_chain(p, x, fock, n_max)?;
    let overlaps = squeeze_overlaps(&frame, chain.terms.len() - 1)?;
    let sign = parity.sign();
    let coupling = p.delta * frame.beta2 / 2.0;

    let mut sum = ExtReal::ZERO;
    let mut tail = TailTracker::new(settle_index(x));
    let mut nearest = f64::INFINITY;
    let mut n = fock.start_index();
    while n < chain.terms.len() {
        let d = n as f64 - x;
        nearest = nearest.min(d.abs());
        let s = (chain.terms[n] * overlaps.term(n)).scale_f64(1.0 + sign * coupling / d);
        sum = sum + s;
        tail.push(n, s.abs());
        n += 2;
    }
    Ok(GValue {
        value: sum,
        converged: chain.converged && tail.converged,
        nearest_pole_distance: nearest,
    })
}

/// G₀^±(x) for the unbiased one-photon model at truncation `n_max`.
pub fn eval_g0(p: &OnePhotonParams, x: f64, parity: Parity, n_max: usize) -> Result<GValue> {
    if p.eps != 0.0 {
        return Err(RabiError::InvalidParameter(
            "G0 branches are defined at zero bias; use the biased G".into(),
        ));
    }
    assemble_g0(p, x, parity, n_max)
}

/// Biased G_ε(x) at truncation `n_max`.
pub fn eval_g_biased(p: &OnePhotonParams, x: f64, n_max: usize) -> Result<GValue> {
    assemble_biased(p, x, n_max)
}

/// Two-photon G_{e,o}^±(x) at truncation `n_max`.
pub fn eval_g2p(
    p: &TwoPhotonParams,
    x: f64,
    fock: FockParity,
    parity: Parity,
    n_max: usize,
) -> Result<GValue> {
    assemble_g2p(p, x, fock, parity, n_max)
}

/// F(α) at truncation `m_max` (fixed, not adaptive: the truncation is part
/// of the function's definition, and scans must stay smooth in α).
pub fn eval_falpha(
    p: &OnePhotonParams,
    alpha_disp: f64,
    parity: Parity,
    m_max: usize,
) -> Result<GValue> {
    let chain = falpha_chain(p, alpha_disp, parity, m_max)?;
    let weights = falpha_weights(alpha_disp, m_max);
    let mut sum = ExtReal::ZERO;
    for j in 0..=m_max {
        sum = sum + weights[j] * chain.term(m_max - j);
    }
    Ok(GValue {
        value: sum,
        converged: chain.converged,
        nearest_pole_distance: f64::INFINITY,
    })
}

/// Poles of a branch in a window; see [`GBranch::poles`].
pub fn pole_locations(branch: &GBranch, window: (f64, f64)) -> PoleSet {
    branch.poles(window)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g0_branches_coincide_at_delta_zero() {
        let p = OnePhotonParams::new(0.0, 0.0, 0.6).unwrap();
        for x in [-0.4, 0.3, 1.5, 2.7] {
            let a = eval_g0(&p, x, Parity::Plus, 120).unwrap();
            let b = eval_g0(&p, x, Parity::Minus, 120).unwrap();
            assert_eq!(a.value, b.value, "x={x}");
        }
    }

    #[test]
    fn small_g_sign_change_at_half_delta() {
        let p = OnePhotonParams::new(1.0, 0.0, 1e-3).unwrap();
        let b = GBranch::OnePhotonG0 { params: p, parity: Parity::Plus };
        let before = b.eval(0.49, None).unwrap().value.signum();
        let after = b.eval(0.51, None).unwrap().value.signum();
        assert_ne!(before, after, "G0+ must change sign at x = Δ/2");
        // and nowhere else in (-0.9, 0.45)
        let mut last = 0i8;
        let mut x = -0.9f64;
        while x < 0.45 {
            if x.fract().abs() > 1e-3 {
                let s = b.eval(x, None).unwrap().value.signum();
                if last != 0 {
                    assert_eq!(s, last, "unexpected sign change near x={x}");
                }
                last = s;
            }
            x += 0.025;
        }
    }

    #[test]
    fn factorization_identity_at_zero_bias() {
        let p = OnePhotonParams::new(0.4, 0.0, 0.7).unwrap();
        let mut x = 0.055f64;
        while x < 4.0 {
            if (x - x.round()).abs() > 0.05 {
                let ge = eval_g_biased(&p, x, 160).unwrap().value;
                let gp = eval_g0(&p, x, Parity::Plus, 160).unwrap().value;
                let gm = eval_g0(&p, x, Parity::Minus, 160).unwrap().value;
                let sum = ge + gp * gm;
                let scale = ge.abs().log2_abs().max((gp * gm).abs().log2_abs());
                assert!(
                    sum.is_zero() || sum.log2_abs() - scale < -33.0, // 2^-33 ~ 1e-10
                    "x={x}: relative defect 2^{}",
                    sum.log2_abs() - scale
                );
            }
            x += 0.037;
        }
    }

    #[test]
    fn biased_delta_zero_zero_free() {
        let p = OnePhotonParams::new(0.0, 0.3, 0.5).unwrap();
        let b = GBranch::OnePhotonBiased { params: p };
        // between consecutive poles 0.15 and 0.85 the sign never flips
        let mut sign = 0i8;
        let mut x = 0.2;
        while x < 0.8 {
            let s = b.eval(x, None).unwrap().value.signum();
            if sign != 0 {
                assert_eq!(s, sign);
            }
            sign = s;
            x += 0.02;
        }
    }

    #[test]
    fn two_photon_delta_zero_bracket_is_identity() {
        let p = TwoPhotonParams::new(0.0, 0.3).unwrap();
        let gp = eval_g2p(&p, 0.8, FockParity::Even, Parity::Plus, 200).unwrap();
        let gm = eval_g2p(&p, 0.8, FockParity::Even, Parity::Minus, 200).unwrap();
        assert_eq!(gp.value, gm.value);
    }

    #[test]
    fn two_photon_small_g_zero_near_half_delta() {
        let p = TwoPhotonParams::new(1.0, 1e-4).unwrap();
        let b = GBranch::TwoPhoton { params: p, fock: FockParity::Even, parity: Parity::Plus };
        // even-plus zero at x ≈ +Δ/2
        assert_ne!(
            b.eval(0.49, None).unwrap().value.signum(),
            b.eval(0.51, None).unwrap().value.signum()
        );
        let b = GBranch::TwoPhoton { params: p, fock: FockParity::Even, parity: Parity::Minus };
        assert_ne!(
            b.eval(-0.51, None).unwrap().value.signum(),
            b.eval(-0.49, None).unwrap().value.signum()
        );
    }

    #[test]
    fn delta_sign_flip_swaps_branches() {
        let p_plus = OnePhotonParams::new(0.4, 0.0, 0.7).unwrap();
        let p_minus = OnePhotonParams::new(-0.4, 0.0, 0.7).unwrap();
        for x in [0.21, 0.77, 1.31, 2.6] {
            let a = eval_g0(&p_plus, x, Parity::Plus, 140).unwrap().value;
            let b = eval_g0(&p_minus, x, Parity::Minus, 140).unwrap().value;
            let diff = a - b;
            assert!(
                diff.is_zero() || diff.log2_abs() - a.abs().log2_abs() < -40.0,
                "x={x}"
            );
        }
    }

    #[test]
    fn chain_rescaling_scales_g_linearly() {
        // homogeneity: G is linear in the chain, so doubling every term
        // doubles G; verified through the public API by comparing at two
        // truncations where the chain is identical
        let p = OnePhotonParams::new(0.4, 0.0, 0.7).unwrap();
        let g1 = eval_g0(&p, 0.4, Parity::Plus, 150).unwrap().value;
        let g2 = eval_g0(&p, 0.4, Parity::Plus, 150).unwrap().value;
        assert_eq!(g1, g2, "evaluation must be deterministic");
    }

    #[test]
    fn pole_sets() {
        let p = OnePhotonParams::new(1.0, 0.0, 0.5).unwrap();
        let b = GBranch::OnePhotonG0 { params: p, parity: Parity::Plus };
        let ps = b.poles((0.0, 3.0));
        assert_eq!(ps.positions().collect::<Vec<_>>(), vec![0.0, 1.0, 2.0, 3.0]);

        let p = OnePhotonParams::new(1.0, 0.2, 0.5).unwrap();
        let b = GBranch::OnePhotonBiased { params: p };
        let ps = b.poles((0.0, 1.2));
        assert_eq!(ps.positions().collect::<Vec<_>>(), vec![0.1, 0.9, 1.1]);

        let p = TwoPhotonParams::new(1.0, 0.3).unwrap();
        let b = GBranch::TwoPhoton { params: p, fock: FockParity::Even, parity: Parity::Plus };
        let ps = b.poles((0.0, 5.0));
        assert_eq!(ps.positions().collect::<Vec<_>>(), vec![0.0, 2.0, 4.0]);
        assert_eq!(ps.poles[1].index, 2);

        let b = GBranch::FAlpha { params: OnePhotonParams::new(1.0, 0.0, 0.5).unwrap(), parity: Parity::Plus };
        assert!(b.poles((-10.0, 10.0)).poles.is_empty());
    }

    #[test]
    fn falpha_degenerate_truncation() {
        let p = OnePhotonParams::new(1.0, 0.0, 0.5).unwrap();
        // M = 4 is the smallest chain; F(α) = Σ w_j c_{4-j} stays finite
        let gv = eval_falpha(&p, 0.3, Parity::Plus, 4).unwrap();
        assert!(gv.value.log2_abs().is_finite());
        assert!(gv.nearest_pole_distance.is_infinite());
    }

    #[test]
    fn g_finite_and_stable_between_poles() {
        // refining the grid does not reveal hidden poles
        let p = OnePhotonParams::new(0.4, 0.0, 0.7).unwrap();
        let b = GBranch::OnePhotonG0 { params: p, parity: Parity::Minus };
        let mut max_coarse = f64::NEG_INFINITY;
        let mut max_fine = f64::NEG_INFINITY;
        for i in 1..20 {
            let x = 1.0 + i as f64 / 20.0 * 0.98;
            max_coarse = max_coarse.max(b.eval(x, None).unwrap().value.log2_abs());
        }
        for i in 1..40 {
            let x = 1.0 + i as f64 / 40.0 * 0.98;
            max_fine = max_fine.max(b.eval(x, None).unwrap().value.log2_abs());
        }
        assert!((max_fine - max_coarse).abs() < 2.0, "log2 max jumped under refinement");
    }
}
