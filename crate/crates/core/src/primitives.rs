//! Motion primitives and the multi-resolution primitive hierarchy.
//!
//! The search works on [`LatticePrimitive`]s, which keep arc length and
//! curving-plane angle as exact dyadic fractions of `delta_ell_max` and
//! `delta_theta_max`. Refinement, levels and ids are then integer
//! arithmetic. The real-valued functions ([`length_level`], [`refine`], …)
//! operate on plain [`MotionPrimitive`]s with a tolerance-based modulo and are
//! kept consistent with the lattice versions by tests.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::geometry::{self, Pose};

/// Deepest level probed when evaluating a level from a real value.
pub const MAX_LEVEL: u32 = 60;
const LEVEL_TOLERANCE: f64 = 1e-9;

/// Curvature, arc length and curving-plane angle of one circular arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionPrimitive {
    pub kappa: f64,
    pub delta_ell: f64,
    pub delta_theta: f64,
}

impl MotionPrimitive {
    pub const fn new(kappa: f64, delta_ell: f64, delta_theta: f64) -> Self {
        Self {
            kappa,
            delta_ell,
            delta_theta,
        }
    }
}

/// Discretization of the action space: minimal insertion `ell` (mm) and
/// minimal axial rotation `theta` (rad).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub ell: f64,
    pub theta: f64,
}

impl Resolution {
    pub fn new(ell: f64, theta: f64) -> Result<Self> {
        if !(ell > 0.0 && theta > 0.0 && ell.is_finite() && theta.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "resolution must be strictly positive, got ({ell}, {theta})"
            )));
        }
        Ok(Self { ell, theta })
    }
}

fn dyadic_level(value: f64, max: f64) -> Result<u32> {
    let tol = LEVEL_TOLERANCE * max;
    for level in 0..=MAX_LEVEL {
        let grid = max * 0.5f64.powi(level as i32);
        if grid <= 2.0 * tol {
            // every value would pass; the grid is finer than the tolerance
            break;
        }
        let rem = value.rem_euclid(grid);
        if rem <= tol || grid - rem <= tol {
            return Ok(level);
        }
    }
    Err(Error::NoLevel {
        value,
        max,
        max_level: MAX_LEVEL,
    })
}

/// Smallest `l ≥ 0` with `δℓ mod 2^-l·δℓ_max = 0`.
pub fn length_level(m: &MotionPrimitive, delta_ell_max: f64) -> Result<u32> {
    if !(m.delta_ell > 0.0 && m.delta_ell <= delta_ell_max * (1.0 + LEVEL_TOLERANCE)) {
        return Err(Error::InvalidInput(format!(
            "arc length {} outside (0, {delta_ell_max}]",
            m.delta_ell
        )));
    }
    dyadic_level(m.delta_ell, delta_ell_max)
}

/// Smallest `l ≥ 0` with `δθ mod 2^-l·δθ_max = 0`.
pub fn angle_level(m: &MotionPrimitive, delta_theta_max: f64) -> Result<u32> {
    if !(m.delta_theta >= 0.0 && m.delta_theta < TAU) {
        return Err(Error::InvalidInput(format!(
            "angle {} outside [0, 2π)",
            m.delta_theta
        )));
    }
    dyadic_level(m.delta_theta, delta_theta_max)
}

/// Cartesian product of curvatures and angles at full length.
pub fn coarsest_primitives(curvatures: &[f64], delta_ell_max: f64, angles: &[f64]) -> Vec<MotionPrimitive> {
    curvatures
        .iter()
        .flat_map(|&k| angles.iter().map(move |&t| MotionPrimitive::new(k, delta_ell_max, t)))
        .collect()
}

/// The length- and angle-refined neighbours of `m`.
///
/// The longer sibling is omitted for length level 0 and the lower-angle sibling
/// for angle level 0, since both leave the explored range.
pub fn refine(m: &MotionPrimitive, delta_ell_max: f64, delta_theta_max: f64) -> Result<Vec<MotionPrimitive>> {
    let ll = length_level(m, delta_ell_max)?;
    let la = angle_level(m, delta_theta_max)?;
    let dl = delta_ell_max * 0.5f64.powi(ll as i32 + 1);
    let dt = delta_theta_max * 0.5f64.powi(la as i32 + 1);
    let mut out = Vec::with_capacity(4);
    out.push(MotionPrimitive::new(m.kappa, m.delta_ell - dl, m.delta_theta));
    if ll > 0 {
        out.push(MotionPrimitive::new(m.kappa, m.delta_ell + dl, m.delta_theta));
    }
    if la > 0 {
        out.push(MotionPrimitive::new(
            m.kappa,
            m.delta_ell,
            (m.delta_theta - dt).rem_euclid(TAU),
        ));
    }
    out.push(MotionPrimitive::new(
        m.kappa,
        m.delta_ell,
        (m.delta_theta + dt).rem_euclid(TAU),
    ));
    Ok(out)
}

/// Rank of a node reached from a parent of rank `parent_rank` via `m`.
pub fn rank(parent_rank: u32, m: &MotionPrimitive, delta_ell_max: f64, delta_theta_max: f64) -> Result<u32> {
    Ok(parent_rank + length_level(m, delta_ell_max)? + angle_level(m, delta_theta_max)? + 1)
}

pub fn below_cutoff(
    m: &MotionPrimitive,
    cutoff: &Resolution,
    delta_ell_max: f64,
    delta_theta_max: f64,
) -> Result<bool> {
    let ll = length_level(m, delta_ell_max)?;
    let la = angle_level(m, delta_theta_max)?;
    Ok(level_below_cutoff(ll, la, cutoff, delta_ell_max, delta_theta_max))
}

fn level_below_cutoff(ll: u32, la: u32, cutoff: &Resolution, delta_ell_max: f64, delta_theta_max: f64) -> bool {
    delta_ell_max * 0.5f64.powi(ll as i32) < cutoff.ell || delta_theta_max * 0.5f64.powi(la as i32) < cutoff.theta
}

/// All primitives of length `r.ell` and angles `n·r.theta`, `n ∈ [0, ⌊2π/r.theta⌋]`.
pub fn finest_set(r: &Resolution, curvatures: &[f64]) -> Vec<MotionPrimitive> {
    let n_max = (TAU / r.theta).floor() as u64;
    curvatures
        .iter()
        .flat_map(|&k| (0..=n_max).map(move |n| MotionPrimitive::new(k, r.ell, n as f64 * r.theta)))
        .collect()
}

/// Approximates an arc of curvature `kappa_target` with straight and
/// max-curvature segments.
///
/// The arc is cut into `2^k` equal chunks, `k` the smallest value whose chunk
/// satisfies `r·(1/cos(η/2) − 1) < eps`, `r = 1/kappa_target`, `η` the
/// chunk's central angle. Each chunk becomes straight / max-curvature /
/// straight, with both straights sized so the chunk's end pose is reproduced
/// exactly. Only the first emitted primitive carries `delta_theta_initial`.
pub fn duty_cycle_decompose(
    kappa_target: f64,
    length: f64,
    delta_theta_initial: f64,
    kappa_max: f64,
    eps: f64,
) -> Result<Vec<MotionPrimitive>> {
    if !(kappa_max > 0.0 && (0.0..=kappa_max).contains(&kappa_target) && length > 0.0 && eps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "duty cycling needs 0 <= kappa_target <= kappa_max, positive length and eps; got ({kappa_target}, {length}, {kappa_max}, {eps})"
        )));
    }
    if kappa_target == 0.0 || kappa_target == kappa_max {
        return Ok(vec![MotionPrimitive::new(kappa_target, length, delta_theta_initial)]);
    }
    let (chunks, sweep) = duty_cycle_chunking(kappa_target, length, eps)?;
    let r = 1.0 / kappa_target;
    let r_max = 1.0 / kappa_max;
    let straight = (r - r_max) * (0.5 * sweep).tan();
    let turn = sweep * r_max;

    let mut out = Vec::with_capacity(3 * chunks as usize);
    for _ in 0..chunks {
        out.push(MotionPrimitive::new(0.0, straight, 0.0));
        out.push(MotionPrimitive::new(kappa_max, turn, 0.0));
        out.push(MotionPrimitive::new(0.0, straight, 0.0));
    }
    out[0].delta_theta = delta_theta_initial;
    Ok(out)
}

/// Chunk count and per-chunk central angle used by [`duty_cycle_decompose`].
pub fn duty_cycle_chunking(kappa_target: f64, length: f64, eps: f64) -> Result<(u64, f64)> {
    let r = 1.0 / kappa_target;
    for k in 0..48 {
        let chunks = 1u64 << k;
        let sweep = length / chunks as f64 / r;
        if sweep < std::f64::consts::PI && duty_cycle_bound(r, sweep) < eps {
            return Ok((chunks, sweep));
        }
    }
    Err(Error::InvalidInput(format!(
        "no dyadic chunking reaches deviation {eps} for radius {r}"
    )))
}

/// Deviation bound `r·(1/cos(η/2) − 1)` of one duty-cycled chunk.
pub fn duty_cycle_bound(radius: f64, sweep: f64) -> f64 {
    radius * (1.0 / (0.5 * sweep).cos() - 1.0)
}

/// Step used to sample trajectories in [`action_distance`].
pub const ACTION_SAMPLE_STEP: f64 = 0.1;

/// Two-way Hausdorff distance, under the pose metric, between the arcs of
/// `m1` and `m2` executed from the identity pose.
pub fn action_distance(m1: &MotionPrimitive, m2: &MotionPrimitive, alpha: f64) -> f64 {
    let origin = Pose::identity();
    let lengths = [m1.delta_ell, m2.delta_ell];
    let sample = |m: &MotionPrimitive| -> Vec<Pose> {
        let mut params = geometry::sample_params(m.delta_ell, ACTION_SAMPLE_STEP);
        params.extend(lengths.iter().copied().filter(|&l| l < m.delta_ell));
        params.sort_by(f64::total_cmp);
        params.dedup();
        params
            .into_iter()
            .map(|s| geometry::advance(&origin, m.kappa, s, m.delta_theta))
            .collect()
    };
    let a = sample(m1);
    let b = sample(m2);
    let directed = |from: &[Pose], to: &[Pose]| {
        from.iter()
            .map(|x| {
                to.iter()
                    .map(|y| geometry::distance(x, y, alpha))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(&a, &b).max(directed(&b, &a))
}

/// Similar-node radius bound for the resolution-completeness argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DSimBound {
    /// `min{δℓ_min, τ(L−1)/(2(L^H−1))}`, or 0 when the second term underflows.
    pub value: f64,
    /// Natural log of the second term, always finite.
    pub ln_term: f64,
    /// Number of maximal-depth steps `H = ⌈ℓ_max/δℓ_min⌉`.
    pub horizon: u64,
    /// Set when the second term is below machine epsilon relative to `δℓ_min`.
    pub underflow: bool,
}

pub fn d_sim_bound(tau: f64, ell_max: f64, delta_ell_min: f64, lipschitz: f64) -> Result<DSimBound> {
    if !(lipschitz > 1.0 && tau > 0.0 && ell_max > 0.0 && delta_ell_min > 0.0) {
        return Err(Error::InvalidInput(format!(
            "d_sim bound needs L_s > 1 and positive lengths; got tau={tau}, ell_max={ell_max}, delta_ell_min={delta_ell_min}, L_s={lipschitz}"
        )));
    }
    let horizon = (ell_max / delta_ell_min).ceil() as u64;
    let h = horizon as f64;
    let ln_l = (lipschitz - 1.0).ln_1p();
    // ln(L^H - 1) = ln(expm1(H ln L)); switch to H ln L + ln(1 - L^-H) when large
    let hl = h * ln_l;
    let ln_denominator = if hl < 30.0 {
        hl.exp_m1().ln()
    } else {
        hl + (-(-hl).exp()).ln_1p()
    };
    let ln_term = tau.ln() + (lipschitz - 1.0).ln() - std::f64::consts::LN_2 - ln_denominator;
    let underflow = ln_term < (f64::EPSILON * delta_ell_min).ln();
    let value = if underflow {
        0.0
    } else {
        delta_ell_min.min(ln_term.exp())
    };
    Ok(DSimBound {
        value,
        ln_term,
        horizon,
        underflow,
    })
}

/// Exact dyadic fraction `num · 2^-level` of a maximum step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dyadic {
    pub num: u32,
    pub level: u8,
}

impl Dyadic {
    fn value(self, max: f64) -> f64 {
        self.num as f64 * max * 0.5f64.powi(self.level as i32)
    }
}

/// Injective key of a lattice primitive, bit-packed from its curvature index
/// and dyadic length and angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimitiveId(pub u128);

impl fmt::Display for PrimitiveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

/// A primitive on the planner's multi-resolution grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticePrimitive {
    /// Index into the hierarchy's curvature set.
    pub curvature: u8,
    /// Length as a fraction of `delta_ell_max`; `num` is odd for `level > 0`.
    pub length: Dyadic,
    /// Angle as a fraction of `delta_theta_max`; `num` is odd for `level > 0`.
    pub angle: Dyadic,
}

impl LatticePrimitive {
    pub fn length_level(&self) -> u32 {
        self.length.level as u32
    }

    pub fn angle_level(&self) -> u32 {
        self.angle.level as u32
    }

    pub fn id(&self) -> PrimitiveId {
        let packed = (self.curvature as u128) << 80
            | (self.length.level as u128) << 72
            | (self.length.num as u128) << 40
            | (self.angle.level as u128) << 32
            | self.angle.num as u128;
        PrimitiveId(packed)
    }
}

/// Parameters of the primitive hierarchy used by one planner run.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    pub curvatures: Vec<f64>,
    pub delta_ell_max: f64,
    pub delta_theta_max: f64,
    pub cutoff: Resolution,
    coarse_angles: u32,
}

impl Hierarchy {
    pub fn new(kappa_max: f64, delta_ell_max: f64, delta_theta_max: f64, cutoff: Resolution) -> Result<Self> {
        if !(kappa_max > 0.0 && delta_ell_max > 0.0 && delta_theta_max > 0.0 && delta_theta_max <= TAU) {
            return Err(Error::Config(format!(
                "hierarchy needs positive kappa_max, delta_ell_max and delta_theta_max in (0, 2π]; got ({kappa_max}, {delta_ell_max}, {delta_theta_max})"
            )));
        }
        let coarse_angles = ((TAU / delta_theta_max) * (1.0 - 1e-12)).ceil() as u32;
        Ok(Self {
            curvatures: vec![0.0, kappa_max],
            delta_ell_max,
            delta_theta_max,
            cutoff,
            coarse_angles,
        })
    }

    /// Hierarchy with the usual quarter-turn coarsest angle.
    pub fn with_quarter_turns(kappa_max: f64, delta_ell_max: f64, cutoff: Resolution) -> Result<Self> {
        Self::new(kappa_max, delta_ell_max, FRAC_PI_2, cutoff)
    }

    pub fn coarsest(&self) -> Vec<LatticePrimitive> {
        let mut out = Vec::with_capacity(self.curvatures.len() * self.coarse_angles as usize);
        for curvature in 0..self.curvatures.len() as u8 {
            for n in 0..self.coarse_angles {
                out.push(LatticePrimitive {
                    curvature,
                    length: Dyadic { num: 1, level: 0 },
                    angle: Dyadic { num: n, level: 0 },
                });
            }
        }
        out
    }

    /// Integer-exact counterpart of [`refine`].
    pub fn refine(&self, p: &LatticePrimitive) -> SmallVec<[LatticePrimitive; 4]> {
        let mut out = SmallVec::new();
        let Dyadic { num: ln, level: ll } = p.length;
        let Dyadic { num: an, level: al } = p.angle;
        if ll < 30 {
            out.push(LatticePrimitive {
                length: Dyadic {
                    num: 2 * ln - 1,
                    level: ll + 1,
                },
                ..*p
            });
            if ll > 0 {
                out.push(LatticePrimitive {
                    length: Dyadic {
                        num: 2 * ln + 1,
                        level: ll + 1,
                    },
                    ..*p
                });
            }
        }
        if al < 30 {
            let finer = |num: u32| LatticePrimitive {
                angle: Dyadic { num, level: al + 1 },
                ..*p
            };
            if al > 0 {
                out.push(finer(2 * an - 1));
            }
            let up = finer(2 * an + 1);
            if up.angle.value(self.delta_theta_max) < TAU * (1.0 - 1e-12) {
                out.push(up);
            }
        }
        out
    }

    pub fn below_cutoff(&self, p: &LatticePrimitive) -> bool {
        level_below_cutoff(
            p.length_level(),
            p.angle_level(),
            &self.cutoff,
            self.delta_ell_max,
            self.delta_theta_max,
        )
    }

    pub fn rank(&self, parent_rank: u32, p: &LatticePrimitive) -> u32 {
        parent_rank + p.length_level() + p.angle_level() + 1
    }

    pub fn kappa(&self, p: &LatticePrimitive) -> f64 {
        self.curvatures[p.curvature as usize]
    }

    pub fn to_motion(&self, p: &LatticePrimitive) -> MotionPrimitive {
        MotionPrimitive::new(
            self.kappa(p),
            p.length.value(self.delta_ell_max),
            p.angle.value(self.delta_theta_max),
        )
    }

    /// Deepest length and angle levels that are not below the cutoff.
    pub fn max_levels(&self) -> (u32, u32) {
        let deepest = |max: f64, min: f64| {
            (0..=MAX_LEVEL)
                .take_while(|&l| max * 0.5f64.powi(l as i32) >= min)
                .last()
                .unwrap_or(0)
        };
        (
            deepest(self.delta_ell_max, self.cutoff.ell),
            deepest(self.delta_theta_max, self.cutoff.theta),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::collections::HashSet;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

    fn m(k: f64, l: f64, t: f64) -> MotionPrimitive {
        MotionPrimitive::new(k, l, t)
    }

    #[test]
    fn level_examples() {
        assert_eq!(length_level(&m(0.0, 20.0, 0.0), 20.0).unwrap(), 0);
        assert_eq!(length_level(&m(0.0, 10.0, 0.0), 20.0).unwrap(), 1);
        assert_eq!(length_level(&m(0.0, 15.0, 0.0), 20.0).unwrap(), 2);
        assert_eq!(angle_level(&m(0.0, 1.0, PI), FRAC_PI_2).unwrap(), 0);
        assert_eq!(angle_level(&m(0.0, 1.0, FRAC_PI_4), FRAC_PI_2).unwrap(), 1);
        assert_eq!(angle_level(&m(0.0, 1.0, 3.0 * FRAC_PI_8), FRAC_PI_2).unwrap(), 2);
    }

    #[test]
    fn off_grid_value_has_no_level() {
        assert!(matches!(
            length_level(&m(0.0, 20.0 / 3.0, 0.0), 20.0),
            Err(Error::NoLevel { .. })
        ));
    }

    #[test]
    fn coarsest_set() {
        let set = coarsest_primitives(&[0.0, 0.01], 20.0, &[0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2]);
        assert_eq!(set.len(), 8);
        for p in &set {
            assert_eq!(length_level(p, 20.0).unwrap(), 0);
            assert_eq!(angle_level(p, FRAC_PI_2).unwrap(), 0);
        }
        assert_eq!(coarsest_primitives(&[0.0], 20.0, &[0.0]), vec![m(0.0, 20.0, 0.0)]);
    }

    #[test]
    fn refine_coarsest_omits_out_of_range_siblings() {
        let out = refine(&m(0.01, 20.0, 0.0), 20.0, FRAC_PI_2).unwrap();
        assert_eq!(out, vec![m(0.01, 10.0, 0.0), m(0.01, 20.0, FRAC_PI_4)]);
    }

    #[test]
    fn refine_level_one() {
        let out = refine(&m(0.01, 10.0, FRAC_PI_4), 20.0, FRAC_PI_2).unwrap();
        assert_eq!(out.len(), 4);
        let expect = [
            m(0.01, 5.0, FRAC_PI_4),
            m(0.01, 15.0, FRAC_PI_4),
            m(0.01, 10.0, FRAC_PI_8),
            m(0.01, 10.0, 3.0 * FRAC_PI_8),
        ];
        for (a, b) in out.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(a.delta_ell, b.delta_ell, epsilon = 1e-12);
            assert_abs_diff_eq!(a.delta_theta, b.delta_theta, epsilon = 1e-12);
        }
        for r in &out[..2] {
            assert_eq!(length_level(r, 20.0).unwrap(), 2);
        }
        for r in &out[2..] {
            assert_eq!(angle_level(r, FRAC_PI_2).unwrap(), 2);
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(0, &m(0.0, 20.0, 0.0), 20.0, FRAC_PI_2).unwrap(), 1);
        assert_eq!(rank(1, &m(0.0, 10.0, 0.0), 20.0, FRAC_PI_2).unwrap(), 3);
    }

    #[test]
    fn cutoff_examples() {
        let cutoff = Resolution::new(0.125, 0.157).unwrap();
        let at = |ll: i32, la: i32| {
            below_cutoff(
                &m(0.0, 20.0 * 0.5f64.powi(ll), FRAC_PI_2 * 0.5f64.powi(la)),
                &cutoff,
                20.0,
                FRAC_PI_2,
            )
            .unwrap()
        };
        assert!(!at(7, 1));
        assert!(at(8, 1));
        assert!(!at(1, 3));
        assert!(at(1, 4));
        assert!(!below_cutoff(&m(0.0, 20.0, 0.0), &cutoff, 20.0, FRAC_PI_2).unwrap());
    }

    #[test]
    fn finest_set_examples() {
        let r = Resolution::new(1.0, FRAC_PI_2).unwrap();
        assert_eq!(finest_set(&r, &[0.0, 0.01]).len(), 10);
        let r = Resolution::new(0.125, 0.157).unwrap();
        let set = finest_set(&r, &[0.0]);
        assert_eq!(set.len(), (TAU / 0.157).floor() as usize + 1);
        assert!(set.iter().all(|p| p.delta_ell == 0.125));
    }

    #[test]
    fn duty_cycle_degenerate_cases() {
        assert_eq!(
            duty_cycle_decompose(0.0, 30.0, 1.0, 0.01, 0.1).unwrap(),
            vec![m(0.0, 30.0, 1.0)]
        );
        assert_eq!(
            duty_cycle_decompose(0.01, 30.0, 1.0, 0.01, 0.1).unwrap(),
            vec![m(0.01, 30.0, 1.0)]
        );
    }

    #[test]
    fn duty_cycle_structure() {
        let seq = duty_cycle_decompose(0.005, 40.0, 0.3, 0.01, 0.2503).unwrap();
        // 40 mm at r = 200 needs chunks of 20 mm (bound ≈ 0.25026)
        assert_eq!(seq.len(), 6);
        assert_eq!(seq[0].delta_theta, 0.3);
        assert!(seq[1..].iter().all(|p| p.delta_theta == 0.0));
        assert!(seq.iter().all(|p| p.kappa == 0.0 || p.kappa == 0.01));
        assert_abs_diff_eq!(duty_cycle_bound(200.0, 0.1), 0.250_260_7, epsilon = 1e-6);
    }

    #[test]
    fn action_distance_examples() {
        let a = m(0.0, 10.0, 0.0);
        assert_eq!(action_distance(&a, &a, 0.05), 0.0);
        assert_abs_diff_eq!(action_distance(&a, &m(0.0, 20.0, 0.0), 0.05), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn d_sim_bound_examples() {
        let b = d_sim_bound(1.0, 10.0, 5.0, 1.1).unwrap();
        assert_eq!(b.horizon, 2);
        assert_abs_diff_eq!(b.value, 0.1 / 0.42, epsilon = 1e-12);
        let tiny = d_sim_bound(1.0, 100.0, 0.125, 2.0).unwrap();
        assert_eq!(tiny.horizon, 800);
        assert!(tiny.underflow);
        assert_eq!(tiny.value, 0.0);
        assert_abs_diff_eq!(tiny.ln_term, -800.0 * 2f64.ln() - 2f64.ln(), epsilon = 1e-9);
        // L_s -> 1+ approaches tau / (2H)
        let near = d_sim_bound(1.0, 10.0, 0.5, 1.0 + 1e-9).unwrap();
        assert_abs_diff_eq!(near.value, 1.0 / 40.0, epsilon = 1e-8);
        assert!(d_sim_bound(1.0, 10.0, 0.5, 1.0).is_err());
    }

    fn hierarchy() -> Hierarchy {
        Hierarchy::with_quarter_turns(0.01, 20.0, Resolution::new(0.125, 0.157).unwrap()).unwrap()
    }

    #[test]
    fn lattice_matches_real_refinement() {
        let h = hierarchy();
        let mut frontier = h.coarsest();
        for _ in 0..5 {
            let mut next = Vec::new();
            for p in &frontier {
                let mp = h.to_motion(p);
                assert_eq!(length_level(&mp, 20.0).unwrap(), p.length_level());
                assert_eq!(angle_level(&mp, FRAC_PI_2).unwrap(), p.angle_level());
                let real = refine(&mp, 20.0, FRAC_PI_2).unwrap();
                let lattice: Vec<_> = h.refine(p).iter().map(|c| h.to_motion(c)).collect();
                assert_eq!(real.len(), lattice.len());
                for (a, b) in real.iter().zip(&lattice) {
                    assert_abs_diff_eq!(a.delta_ell, b.delta_ell, epsilon = 1e-12);
                    assert_abs_diff_eq!(a.delta_theta, b.delta_theta, epsilon = 1e-12);
                }
                next.extend(h.refine(p));
            }
            frontier = next;
        }
    }

    #[test]
    fn ids_are_injective_over_refinement_closure() {
        let h = hierarchy();
        let mut seen: std::collections::HashMap<PrimitiveId, (u64, u64)> = Default::default();
        let mut frontier = h.coarsest();
        let mut values = HashSet::new();
        for _ in 0..6 {
            let mut next = Vec::new();
            for p in &frontier {
                let mp = h.to_motion(p);
                let key = (mp.kappa.to_bits(), mp.delta_ell.to_bits() ^ mp.delta_theta.to_bits().rotate_left(17));
                if let Some(prev) = seen.insert(p.id(), key) {
                    assert_eq!(prev, key);
                }
                values.insert(key);
                assert!(!h.refine(p).contains(p));
                next.extend(h.refine(p));
            }
            frontier = next;
        }
        let ids: HashSet<_> = seen.keys().collect();
        assert_eq!(ids.len(), values.len());
    }

    #[test]
    fn max_levels_at_default_cutoff() {
        assert_eq!(hierarchy().max_levels(), (7, 3));
    }

    proptest! {
        #[test]
        fn rank_unrolls_along_paths(choices in prop::collection::vec((0usize..8, 0usize..4, 0usize..4), 1..8)) {
            let h = hierarchy();
            let mut rank = 0;
            let mut depth = 0;
            let mut level_sum = 0;
            for (coarse, steps, pick) in choices {
                let mut p = h.coarsest()[coarse];
                for _ in 0..steps {
                    let refined = h.refine(&p);
                    p = refined[pick % refined.len()];
                }
                let mp = h.to_motion(&p);
                prop_assert_eq!(self::rank(rank, &mp, 20.0, FRAC_PI_2).unwrap(), h.rank(rank, &p));
                rank = h.rank(rank, &p);
                depth += 1;
                level_sum += p.length_level() + p.angle_level();
                prop_assert_eq!(rank, depth + level_sum);
            }
        }

        #[test]
        fn equal_curvature_action_distance_bound(
            k in prop::sample::select(vec![0.0, 0.01]),
            l1 in 0.1..20.0f64, l2 in 0.1..20.0f64,
            t1 in 0.0..TAU, t2 in 0.0..TAU,
        ) {
            let alpha = 0.05;
            let a = m(k, l1, t1);
            let b = m(k, l2, t2);
            let dt = (t1 - t2).abs();
            let dl = (l1 - l2).abs();
            let bound = dt * l1.min(l2) + dl;
            let allowance = alpha * (dt.min(TAU - dt) + k * dl);
            prop_assert!(action_distance(&a, &b, alpha) <= bound + allowance + 1e-9);
        }
    }
}
