//! Recurrence-defined coefficient chains behind every G-function.
//!
//! Four families are produced here, all in extended-range arithmetic:
//!
//! * one-photon chains in either displaced frame, kept in the g-absorbed
//!   variable t_n = f_n g^n so that series terms stay O(1),
//! * two-photon chains of even or odd Fock parity (unscaled f_n),
//! * squeezed-vacuum overlap constants L_n,
//! * displacement-series coefficients c_m.
//!
//! The raw one-photon coefficients grow like (2g)^-n and the overlap
//! constants grow factorially, so the two-photon f·L product is only safe
//! to form with explicit exponent tracking.

use crate::error::{RabiError, Result};
use crate::extreal::ExtReal;
use crate::model::{
    derive_one_photon_constants, derive_squeeze_frame, DisplacedFrame, FockParity, ModelParams,
    OnePhotonParams, Parity, SectorLabel, SqueezeFrame, TwoPhotonParams,
};

/// Minimum distance from a recurrence pole before evaluation refuses.
pub const POLE_GUARD: f64 = 1e-12;

/// Relative tail threshold: a chain is converged once this many consecutive
/// series terms drop below `TAIL_RTOL` times the running maximum.
pub const TAIL_RTOL: f64 = 1e-14;
pub const TAIL_RUN: usize = 5;

/// Default truncation ceilings.
pub const ONE_PHOTON_N_MAX: usize = 200;
pub const TWO_PHOTON_N_MAX: usize = 400;
pub const FALPHA_M_MAX: usize = 80;

/// A recurrence-defined coefficient sequence plus convergence metadata.
///
/// `terms[n]` is t_n, f_n, L_n or c_n depending on the producing operation;
/// `scaled` records whether the one-photon g^n absorption is in effect.
/// For parity-split chains the off-parity entries are exact zeros.
#[derive(Clone, Debug)]
pub struct CoefficientChain {
    pub terms: Vec<ExtReal>,
    pub scaled: bool,
    pub sector: SectorLabel,
    /// Displaced frame the chain was built in (one-photon only).
    pub frame: Option<DisplacedFrame>,
    /// Spectral variable (or displacement α for c-chains) at build time.
    pub x: f64,
    pub converged: bool,
    pub n_used: usize,
}

impl CoefficientChain {
    /// Highest populated index.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, n: usize) -> ExtReal {
        self.terms.get(n).copied().unwrap_or(ExtReal::ZERO)
    }
}

/// The Ω(m) recurrence weight of either model, with pole bookkeeping.
///
/// For the one-photon model the value returned is the g-absorbed gΩ(m)
/// used by the scaled recurrence; for the two-photon model it is Ω(m)
/// itself.
#[derive(Clone, Copy, Debug)]
pub enum OmegaEvaluator {
    OnePhotonScaled {
        alpha: f64,
        beta: f64,
        delta: f64,
        energy: f64,
    },
    TwoPhoton {
        frame: SqueezeFrame,
        g: f64,
        delta: f64,
        energy: f64,
    },
}

impl OmegaEvaluator {
    pub fn one_photon(p: &OnePhotonParams, frame: DisplacedFrame, energy: f64) -> Self {
        let c = derive_one_photon_constants(p);
        let (alpha, beta) = match frame {
            DisplacedFrame::A => (c.alpha, c.beta),
            DisplacedFrame::B => (c.alpha_p, c.beta_p),
        };
        OmegaEvaluator::OnePhotonScaled { alpha, beta, delta: p.delta, energy }
    }

    pub fn two_photon(p: &TwoPhotonParams, energy: f64) -> Result<Self> {
        Ok(OmegaEvaluator::TwoPhoton {
            frame: derive_squeeze_frame(p)?,
            g: p.g,
            delta: p.delta,
            energy,
        })
    }

    /// Distance of the Ω(m) denominator from its pole.
    pub fn pole_distance(&self, m: usize) -> f64 {
        match *self {
            OmegaEvaluator::OnePhotonScaled { alpha, energy, .. } => {
                (m as f64 - alpha - energy).abs()
            }
            OmegaEvaluator::TwoPhoton { frame, energy, .. } => {
                ((m as f64 - frame.v * frame.v) / frame.beta2 - energy).abs()
            }
        }
    }

    /// gΩ(m) (one-photon, scaled) or Ω(m) (two-photon).
    pub fn value(&self, m: usize) -> f64 {
        let m_f = m as f64;
        match *self {
            OmegaEvaluator::OnePhotonScaled { alpha, beta, delta, energy } => {
                ((m_f + beta - energy) - delta * delta / (4.0 * (m_f - alpha - energy))) / 2.0
            }
            OmegaEvaluator::TwoPhoton { frame, g, delta, energy } => {
                let (u, v, b2) = (frame.u, frame.v, frame.beta2);
                b2 * m_f + v * v + 2.0 * g * u * v * (2.0 * m_f + 1.0)
                    - energy
                    - delta * delta / (4.0 * ((m_f - v * v) / b2 - energy))
            }
        }
    }
}

/// Running tail test over the magnitudes the G-sum will actually add.
pub(crate) struct TailTracker {
    max_abs: ExtReal,
    run: usize,
    settle_after: usize,
    pub(crate) n_used: usize,
    pub(crate) converged: bool,
}

impl TailTracker {
    /// `settle_after`: index below which terms are still shaped by nearby
    /// poles and the tail run must not start counting.
    pub(crate) fn new(settle_after: usize) -> Self {
        TailTracker {
            max_abs: ExtReal::ZERO,
            run: 0,
            settle_after,
            n_used: 0,
            converged: false,
        }
    }

    /// Feed |s_n|; returns true once the chain may stop.
    pub(crate) fn push(&mut self, n: usize, term_abs: ExtReal) -> bool {
        if term_abs.cmp_abs(self.max_abs) == std::cmp::Ordering::Greater {
            self.max_abs = term_abs;
        }
        let threshold = self.max_abs.scale_f64(TAIL_RTOL);
        if n >= self.settle_after && term_abs.cmp_abs(threshold) != std::cmp::Ordering::Greater {
            self.run += 1;
            if self.run >= TAIL_RUN && !self.converged {
                self.converged = true;
                self.n_used = n;
            }
        } else {
            self.run = 0;
        }
        self.converged
    }
}

pub(crate) fn settle_index(x: f64) -> usize {
    if x.is_finite() && x > 0.0 {
        x.ceil() as usize + 2
    } else {
        2
    }
}

/// One-photon chain t_n = f_n g^n in the requested displaced frame.
///
/// The scaled three-term recurrence is
/// m t_m = gΩ(m−1) t_{m−1} − g² t_{m−2},  t_0 = 1,  t_1 = gΩ(0),
/// with gΩ(m) = [(m + β − E) − Δ²/(4(m − α − E))]/2 and the primed
/// constants in frame B.
pub fn one_photon_chain(
    p: &OnePhotonParams,
    energy: f64,
    frame: DisplacedFrame,
    n_max: usize,
) -> Result<CoefficientChain> {
    assert!(n_max >= 2, "one-photon chain needs n_max >= 2");
    let omega = OmegaEvaluator::one_photon(p, frame, energy);
    for m in 0..n_max {
        let d = omega.pole_distance(m);
        if d < POLE_GUARD {
            return Err(RabiError::PoleTooClose { index: m, distance: d });
        }
    }
    let x = p.energy_to_x(energy);
    let g2 = ExtReal::from_f64(p.g * p.g);

    let mut terms = Vec::with_capacity(n_max + 1);
    terms.push(ExtReal::ONE);
    terms.push(ExtReal::from_f64(omega.value(0)));

    let mut tail = TailTracker::new(settle_index(x));
    tail.push(0, terms[0].abs());
    tail.push(1, terms[1].abs());

    for m in 2..=n_max {
        let t = (terms[m - 1] * ExtReal::from_f64(omega.value(m - 1)) - terms[m - 2] * g2)
            .scale_f64(1.0 / m as f64);
        terms.push(t);
        if tail.push(m, t.abs()) {
            break;
        }
    }

    let n_used = if tail.converged { tail.n_used } else { terms.len() - 1 };
    Ok(CoefficientChain {
        terms,
        scaled: true,
        sector: if p.eps == 0.0 {
            SectorLabel::OnePhotonPlus
        } else {
            SectorLabel::OnePhotonBiased
        },
        frame: Some(frame),
        x,
        converged: tail.converged,
        n_used,
    })
}

/// One-photon chain evaluated exactly at the pole x = pole_index (+ frame
/// offset), built only up to the pole index.  All recurrence denominators
/// below the pole are regular, so the truncated chain is well defined; it
/// feeds the exceptional-eigenvalue lift test.
pub fn one_photon_chain_at_pole(
    p: &OnePhotonParams,
    frame: DisplacedFrame,
    pole_index: usize,
) -> CoefficientChain {
    let c = derive_one_photon_constants(p);
    let alpha = match frame {
        DisplacedFrame::A => c.alpha,
        DisplacedFrame::B => c.alpha_p,
    };
    // x = n − α + g² (= n ∓ ε/2) puts m − α − E = m − n for every m
    let x = pole_index as f64 - alpha + p.g * p.g;
    let energy = x - p.g * p.g;
    let omega = OmegaEvaluator::one_photon(p, frame, energy);
    let g2 = ExtReal::from_f64(p.g * p.g);

    let mut terms = vec![ExtReal::ONE];
    if pole_index >= 1 {
        terms.push(ExtReal::from_f64(omega.value(0)));
    }
    for m in 2..=pole_index {
        let t = (terms[m - 1] * ExtReal::from_f64(omega.value(m - 1)) - terms[m - 2] * g2)
            .scale_f64(1.0 / m as f64);
        terms.push(t);
    }
    let n_used = terms.len() - 1;
    CoefficientChain {
        terms,
        scaled: true,
        sector: if p.eps == 0.0 {
            SectorLabel::OnePhotonPlus
        } else {
            SectorLabel::OnePhotonBiased
        },
        frame: Some(frame),
        x,
        converged: true,
        n_used,
    }
}

/// Two-photon chain of the given Fock parity, unscaled f_n.
///
/// (m+2)(m+1) f_{m+2} = −f_{m−2} + Ω(m)/(uv + g(u²+v²)) f_m with
/// f_0 = 1 (even) or f_1 = 1 (odd); off-parity entries are exact zeros.
/// The tail test runs on |f_n L_n|, the magnitudes the G-sum adds.
pub fn two_photon_chain(
    p: &TwoPhotonParams,
    x: f64,
    start: FockParity,
    n_max: usize,
) -> Result<CoefficientChain> {
    assert!(n_max >= 4, "two-photon chain needs n_max >= 4");
    let frame = derive_squeeze_frame(p)?;
    let energy = frame.x_to_energy(x);
    let omega = OmegaEvaluator::two_photon(p, energy)?;

    let first = start.start_index();
    let mut m = first;
    while m < n_max {
        let d = (m as f64 - x).abs();
        if d < POLE_GUARD {
            return Err(RabiError::PoleTooClose { index: m, distance: d });
        }
        m += 2;
    }

    let denom = frame.u * frame.v + p.g * frame.beta2;
    let overlaps = squeeze_overlaps(&frame, n_max)?;

    let mut terms = vec![ExtReal::ZERO; n_max + 1];
    terms[first] = ExtReal::ONE;

    let mut tail = TailTracker::new(settle_index(x));
    tail.push(first, overlaps.term(first).abs());

    let mut last = first;
    let mut m = first;
    while m + 2 <= n_max {
        let prev = if m >= 2 { terms[m - 2] } else { ExtReal::ZERO };
        let next = (terms[m] * ExtReal::from_f64(omega.value(m) / denom) - prev)
            .scale_f64(1.0 / ((m + 2) as f64 * (m + 1) as f64));
        terms[m + 2] = next;
        last = m + 2;
        if tail.push(m + 2, (next * overlaps.term(m + 2)).abs()) {
            break;
        }
        m += 2;
    }

    terms.truncate(last + 1);
    let n_used = if tail.converged { tail.n_used } else { last };
    Ok(CoefficientChain {
        terms,
        scaled: false,
        sector: SectorLabel::two_photon(start, Parity::Plus),
        frame: None,
        x,
        converged: tail.converged,
        n_used,
    })
}

/// Two-photon chain at the pole x = n, truncated at the pole index, for the
/// exceptional lift test f_n(x = n) = 0.
pub fn two_photon_chain_at_pole(p: &TwoPhotonParams, pole_index: usize) -> Result<CoefficientChain> {
    let frame = derive_squeeze_frame(p)?;
    let x = pole_index as f64;
    let energy = frame.x_to_energy(x);
    let omega = OmegaEvaluator::two_photon(p, energy)?;
    let start = if pole_index % 2 == 0 { FockParity::Even } else { FockParity::Odd };
    let first = start.start_index();
    let denom = frame.u * frame.v + p.g * frame.beta2;

    let mut terms = vec![ExtReal::ZERO; pole_index + 1];
    terms[first] = ExtReal::ONE;
    let mut m = first;
    while m + 2 <= pole_index {
        let prev = if m >= 2 { terms[m - 2] } else { ExtReal::ZERO };
        terms[m + 2] = (terms[m] * ExtReal::from_f64(omega.value(m) / denom) - prev)
            .scale_f64(1.0 / ((m + 2) as f64 * (m + 1) as f64));
        m += 2;
    }
    Ok(CoefficientChain {
        terms,
        scaled: false,
        sector: SectorLabel::two_photon(start, Parity::Plus),
        frame: None,
        x,
        converged: true,
        n_used: pole_index,
    })
}

/// Squeezed-vacuum overlap constants L_n for the two-photon G-functions.
///
/// With w = v/(2u) the closed forms are
///
/// L_{2k}   = (2k)!/k! · w^k        (overlap of |n⟩_b with the Fock vacuum),
/// L_{2k+1} = v · (2k+1)!/k! · w^k  (overlap with the n = 1 Fock row).
///
/// Frame-global constants (powers of 1/√u) are dropped: only relative
/// magnitudes and signs enter the G-functions, whose zeros are invariant.
/// Factorial growth is accumulated incrementally in extended range.
pub fn squeeze_overlaps(frame: &SqueezeFrame, n_max: usize) -> Result<CoefficientChain> {
    assert!(n_max >= 2, "overlap chain needs n_max >= 2");
    let w = ExtReal::from_f64(frame.v / (2.0 * frame.u));
    let v = ExtReal::from_f64(frame.v);

    let mut terms = Vec::with_capacity(n_max + 1);
    let mut even = ExtReal::ONE; // L_{2k}
    terms.push(even);
    let mut k = 0usize;
    while terms.len() <= n_max {
        let n = terms.len();
        if n % 2 == 1 {
            // L_{2k+1} = v (2k+1) L_{2k}
            terms.push(even.scale_f64((2 * k + 1) as f64) * v);
        } else {
            // L_{2k+2} = w (2k+1)(2k+2)/(k+1) L_{2k}
            k += 1;
            even = even
                .scale_f64((2 * k - 1) as f64 * (2 * k) as f64 / k as f64)
                * w;
            terms.push(even);
        }
    }

    let n_used = n_max;
    Ok(CoefficientChain {
        terms,
        scaled: false,
        sector: SectorLabel::TwoPhotonEvenPlus, // spans both parities; label marks the family
        frame: None,
        x: 0.0,
        converged: true,
        n_used,
    })
}

/// Displacement-series coefficients c_m for the pole-free spectral function.
///
/// c_0 = 1, c_1 = 0, then
/// (m+1) g c_{m+1} = −(m ± Δ/2) c_m − (α + g) c_{m−1}
///                   ± (−1)^m (Δ/2) Σ_{j=0}^m (2α)^j/j! · c_{m−j},
/// where α is the displacement variable and ± follows `parity`.
/// The convolution sums make the total cost O(M²).
pub fn falpha_chain(
    p: &OnePhotonParams,
    alpha_disp: f64,
    parity: Parity,
    m_max: usize,
) -> Result<CoefficientChain> {
    assert!(m_max >= 4, "displacement chain needs m_max >= 4");
    if p.g <= 0.0 {
        return Err(RabiError::ZeroCoupling);
    }
    if p.eps != 0.0 {
        return Err(RabiError::InvalidParameter(
            "displacement series is defined for the unbiased model (eps = 0)".into(),
        ));
    }
    let s = parity.sign();
    let half_delta = p.delta / 2.0;

    let weights = falpha_weights(alpha_disp, m_max);

    let mut c = Vec::with_capacity(m_max + 1);
    c.push(ExtReal::ONE);
    c.push(ExtReal::ZERO);
    for m in 1..m_max {
        let mut conv = ExtReal::ZERO;
        for j in 0..=m {
            conv = conv + weights[j] * c[m - j];
        }
        let mut rhs = c[m].scale_f64(-(m as f64 + s * half_delta))
            + c[m - 1].scale_f64(-(alpha_disp + p.g));
        let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
        rhs = rhs + conv.scale_f64(s * sign_m * half_delta);
        c.push(rhs.scale_f64(1.0 / ((m + 1) as f64 * p.g)));
    }

    // convergence: the top-index terms of the assembled sum must be
    // negligible, i.e. |c_m (2α)^{M-m}/(M-m)!| tails off as m -> M
    let mut tail = TailTracker::new(0);
    for m in 0..=m_max {
        tail.push(m, (c[m] * weights[m_max - m]).abs());
    }

    Ok(CoefficientChain {
        terms: c,
        scaled: false,
        sector: match parity {
            Parity::Plus => SectorLabel::FAlphaPlus,
            Parity::Minus => SectorLabel::FAlphaMinus,
        },
        frame: None,
        x: alpha_disp,
        converged: tail.converged,
        n_used: if tail.converged { tail.n_used } else { m_max },
    })
}

/// (2α)^j / j! for j = 0..=m_max.
pub(crate) fn falpha_weights(alpha_disp: f64, m_max: usize) -> Vec<ExtReal> {
    let two_alpha = ExtReal::from_f64(2.0 * alpha_disp);
    let mut weights = Vec::with_capacity(m_max + 1);
    weights.push(ExtReal::ONE);
    for j in 1..=m_max {
        let w = weights[j - 1] * two_alpha;
        weights.push(w.scale_f64(1.0 / j as f64));
    }
    weights
}

/// Upper-component coefficients from lower ones:
/// e_m = (Δ/2)/(m − α − E) f_m (one-photon, frame α from the chain) or
/// e_m = (Δ/2)/((m − v²)/(u²+v²) − E) f_m (two-photon).
/// The ratio form is independent of any chain rescaling.
pub fn relate_e_from_f(
    chain: &CoefficientChain,
    model: &ModelParams,
    energy: f64,
) -> Result<CoefficientChain> {
    let half_delta = model.delta() / 2.0;
    let denom_at = |m: usize| -> Result<f64> {
        let d = match model {
            ModelParams::OnePhoton(p) => {
                let c = derive_one_photon_constants(p);
                let alpha = match chain.frame {
                    Some(DisplacedFrame::B) => c.alpha_p,
                    _ => c.alpha,
                };
                m as f64 - alpha - energy
            }
            ModelParams::TwoPhoton(p) => {
                let f = derive_squeeze_frame(p)?;
                (m as f64 - f.v * f.v) / f.beta2 - energy
            }
        };
        if d.abs() < POLE_GUARD {
            return Err(RabiError::PoleTooClose { index: m, distance: d.abs() });
        }
        Ok(d)
    };

    let mut terms = Vec::with_capacity(chain.terms.len());
    for (m, &f) in chain.terms.iter().enumerate() {
        if f.is_zero() {
            terms.push(ExtReal::ZERO);
            continue;
        }
        terms.push(f.scale_f64(half_delta / denom_at(m)?));
    }
    Ok(CoefficientChain { terms, ..chain.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Raw unscaled one-photon recurrence in plain f64:
    /// m f_m = Ω(m−1) f_{m−1} − f_{m−2}.
    fn raw_one_photon(p: &OnePhotonParams, energy: f64, n_max: usize) -> Vec<f64> {
        let c = derive_one_photon_constants(p);
        let omega = |m: f64| {
            ((m + c.beta - energy) - p.delta * p.delta / (4.0 * (m - c.alpha - energy)))
                / (2.0 * p.g)
        };
        let mut f = vec![1.0, omega(0.0)];
        for m in 2..=n_max {
            f.push((omega(m as f64 - 1.0) * f[m - 1] - f[m - 2]) / m as f64);
        }
        f
    }

    #[test]
    fn scaled_first_term_hand_value() {
        // g=0.5, Δ=1, ε=0, E=0 in frame A: t1 = [(0.75) − 1/(4·(−0.25))]/2
        let p = OnePhotonParams::new(1.0, 0.0, 0.5).unwrap();
        let ch = one_photon_chain(&p, 0.0, DisplacedFrame::A, 10).unwrap();
        assert_eq!(ch.term(0).to_f64(), 1.0);
        assert!((ch.term(1).to_f64() - 0.875).abs() < 1e-15);
        assert!(ch.scaled);
    }

    #[test]
    fn scaled_equals_raw_times_gn() {
        for &(g, delta, e) in &[(0.5, 1.0, 0.13), (0.1, 0.4, -0.4), (1.0, 1.0, 0.77)] {
            let p = OnePhotonParams::new(delta, 0.0, g).unwrap();
            let ch = one_photon_chain(&p, e, DisplacedFrame::A, 60).unwrap();
            let raw = raw_one_photon(&p, e, 60);
            let mut gn = 1.0;
            for n in 0..=60.min(ch.len() - 1) {
                let expect = raw[n] * gn;
                let got = ch.term(n).to_f64();
                assert!(
                    (got - expect).abs() <= 1e-10 * expect.abs().max(1e-30),
                    "g={g} n={n}: {got} vs {expect}"
                );
                gn *= g;
            }
        }
    }

    #[test]
    fn frames_agree_at_zero_bias() {
        let p = OnePhotonParams::new(0.4, 0.0, 0.7).unwrap();
        let a = one_photon_chain(&p, 0.3, DisplacedFrame::A, 80).unwrap();
        let b = one_photon_chain(&p, 0.3, DisplacedFrame::B, 80).unwrap();
        for n in 0..=a.n_used.min(b.n_used) {
            assert_eq!(a.term(n), b.term(n), "n={n}");
        }
    }

    #[test]
    fn pole_guard_fires() {
        let p = OnePhotonParams::new(0.4, 0.0, 0.5).unwrap();
        // m − α − E = 0 at m=1 for E = 1 − α
        let e = 1.0 - 0.25 + 5e-13;
        assert!(matches!(
            one_photon_chain(&p, e, DisplacedFrame::A, 40),
            Err(RabiError::PoleTooClose { index: 1, .. })
        ));
    }

    #[test]
    fn two_photon_hand_value() {
        // g=0.3, Δ=0, E=0 (x = v²), even chain: f2 = Ω(0)/(2(uv+gβ)) = 0.35/1.5
        let p = TwoPhotonParams::new(0.0, 0.3).unwrap();
        let frame = derive_squeeze_frame(&p).unwrap();
        let x = frame.energy_to_x(0.0);
        let ch = two_photon_chain(&p, x, FockParity::Even, 40).unwrap();
        assert_eq!(ch.term(0).to_f64(), 1.0);
        assert!((ch.term(2).to_f64() - 0.35 / 1.5).abs() < 1e-14);
        for n in (1..ch.len()).step_by(2) {
            assert!(ch.term(n).is_zero(), "odd index {n} populated in even chain");
        }
    }

    #[test]
    fn two_photon_odd_start() {
        let p = TwoPhotonParams::new(1.0, 0.3).unwrap();
        let ch = two_photon_chain(&p, 0.4, FockParity::Odd, 40).unwrap();
        assert!(ch.term(0).is_zero());
        assert_eq!(ch.term(1).to_f64(), 1.0);
        assert!(!ch.term(3).is_zero());
    }

    #[test]
    fn overlap_low_orders() {
        let p = TwoPhotonParams::new(0.0, 0.3).unwrap();
        let frame = derive_squeeze_frame(&p).unwrap();
        let l = squeeze_overlaps(&frame, 12).unwrap();
        assert_eq!(l.term(0).to_f64(), 1.0);
        assert!((l.term(1).to_f64() - frame.v).abs() < 1e-15);
        assert!((l.term(2).to_f64() - frame.v / frame.u).abs() < 1e-15);
        // closed form at n = 6: 6!/3! (v/2u)^3
        let w = frame.v / (2.0 * frame.u);
        assert!((l.term(6).to_f64() - 120.0 * w.powi(3)).abs() < 1e-13);
    }

    #[test]
    fn overlaps_finite_up_to_200() {
        for g in [0.1, 0.3, 0.45] {
            let frame = derive_squeeze_frame(&TwoPhotonParams::new(0.0, g).unwrap()).unwrap();
            let l = squeeze_overlaps(&frame, 200).unwrap();
            for n in 0..=200 {
                assert!(l.term(n).log2_abs().is_finite(), "g={g} n={n}");
                assert!(l.term(n).signum() == 1, "L_n must stay positive");
            }
        }
    }

    #[test]
    fn falpha_initialization_and_hand_value() {
        // (g=0.5, Δ=1, α=1, plus): c2 = [−(α+g) − Δα]/(2g) = −2.5
        let p = OnePhotonParams::new(1.0, 0.0, 0.5).unwrap();
        let ch = falpha_chain(&p, 1.0, Parity::Plus, 10).unwrap();
        assert_eq!(ch.term(0).to_f64(), 1.0);
        assert_eq!(ch.term(1).to_f64(), 0.0);
        assert!((ch.term(2).to_f64() + 2.5).abs() < 1e-14);
    }

    #[test]
    fn falpha_delta_zero_reduction() {
        // Δ=0: (m+1) g c_{m+1} = −m c_m − (α+g) c_{m−1}
        let p = OnePhotonParams::new(0.0, 0.0, 0.4).unwrap();
        let alpha = 0.8;
        let ch = falpha_chain(&p, alpha, Parity::Plus, 20).unwrap();
        let mut c = vec![1.0, 0.0];
        for m in 1..20 {
            c.push((-(m as f64) * c[m] - (alpha + p.g) * c[m - 1]) / ((m + 1) as f64 * p.g));
        }
        for m in 0..=20 {
            let got = ch.term(m).to_f64();
            assert!(
                (got - c[m]).abs() <= 1e-12 * c[m].abs().max(1.0),
                "m={m}: {got} vs {}",
                c[m]
            );
        }
    }

    #[test]
    fn falpha_rejects_zero_coupling() {
        let p = OnePhotonParams::new(1.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            falpha_chain(&p, 1.0, Parity::Plus, 10),
            Err(RabiError::ZeroCoupling)
        ));
    }

    #[test]
    fn e_from_f_relation() {
        let p = OnePhotonParams::new(0.8, 0.0, 0.5).unwrap();
        let model = ModelParams::OnePhoton(p);
        let ch = one_photon_chain(&p, 0.0, DisplacedFrame::A, 30).unwrap();
        let e = relate_e_from_f(&ch, &model, 0.0).unwrap();
        // e0 = (Δ/2)/(0 − α − 0) f0 = (0.4)/(−0.25) = −1.6
        assert!((e.term(0).to_f64() + 1.6).abs() < 1e-14);
        // ratio e_m/f_m unchanged by rescaling the chain
        let mut scaled = ch.clone();
        for t in &mut scaled.terms {
            *t = t.scale_f64(3.7);
        }
        let e2 = relate_e_from_f(&scaled, &model, 0.0).unwrap();
        for m in 0..e.len() {
            if ch.term(m).is_zero() {
                continue;
            }
            let r1 = e.term(m).to_f64() / ch.term(m).to_f64();
            let r2 = e2.term(m).to_f64() / scaled.term(m).to_f64();
            assert!((r1 - r2).abs() <= 1e-12 * r1.abs().max(1e-12));
        }
    }

    #[test]
    fn e_from_f_delta_zero() {
        let p = TwoPhotonParams::new(0.0, 0.3).unwrap();
        let ch = two_photon_chain(&p, 0.4, FockParity::Even, 20).unwrap();
        let e = relate_e_from_f(
            &ch,
            &ModelParams::TwoPhoton(p),
            derive_squeeze_frame(&p).unwrap().x_to_energy(0.4),
        )
        .unwrap();
        assert!(e.terms.iter().all(|t| t.is_zero()));
    }

    #[test]
    fn convergence_flag_set_for_easy_chain() {
        let p = OnePhotonParams::new(0.4, 0.0, 0.7).unwrap();
        let ch = one_photon_chain(&p, 0.37, DisplacedFrame::A, ONE_PHOTON_N_MAX).unwrap();
        assert!(ch.converged, "desk-scale chain should converge well before 200");
        assert!(ch.n_used < ONE_PHOTON_N_MAX);
    }
}
