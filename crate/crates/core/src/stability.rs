//! Monte-Carlo scaling of volume², circumradius² and hull angle when a
//! simplex on a 2-sphere in `ℝ³` is lifted by offsets orthogonal to `ℝ³`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::geom::{subspace_angle, GeomError, Simplex};
use crate::linalg;
use crate::point::{FloatPoint, Point};

/// Smallest accepted volume of the unperturbed simplex.
pub const MIN_VOLUME: f64 = 1e-12;
/// Base simplices must have volume at least `FATNESS · δ³`, the volume of
/// a regular tetrahedron with edge `δ`.
pub const FATNESS: f64 = 0.117_851_130_197_757_9;
/// Relative agreement required between the two `2r²` routes.
pub const Q11_AGREEMENT: f64 = 1e-8;
pub const DEFAULT_AMBIENT_K: usize = 6;
const REJECTION_BUDGET: usize = 100_000;
/// Slack on the `4h²` pair bound, for rounding.
const PAIR_BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StabilityError {
    #[error("need 0 <= h <= delta <= 1 and r0 > 0 (r0 = {r0}, delta = {delta}, h = {h})")]
    Parameters { r0: f64, delta: f64, h: f64 },
    #[error("no {delta}-separated nondegenerate quadruple on a sphere of radius {r0}")]
    RejectionBudget { r0: f64, delta: f64 },
    #[error("ambient_k must be at least 1")]
    AmbientK,
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("circumradius routes disagree: direct {direct:e}, q11 {q11:e}")]
    Q11Mismatch { direct: f64, q11: f64 },
    #[error("h grid must be geometric with at least 5 points in (0, delta]")]
    Grid,
    #[error("trials_per_h must be positive")]
    Trials,
    #[error("all {0} measurements are zero; no slope to fit")]
    DegenerateFit(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSample {
    pub t0: Simplex<f64>,
    pub t: Simplex<f64>,
    pub delta: f64,
    pub h: f64,
    pub seed: u64,
}

impl PerturbationSample {
    /// `z_i − y_i` for each vertex.
    pub fn offsets(&self) -> Vec<Vec<f64>> {
        self.t0
            .vertices()
            .iter()
            .zip(self.t.vertices())
            .map(|(y, z)| linalg::sub(z.coords(), y.coords()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityMeasurement {
    #[serde(rename = "dV2")]
    pub d_v2: f64,
    #[serde(rename = "dR2")]
    pub d_r2: f64,
    #[serde(rename = "dPhi")]
    pub d_phi: f64,
    /// Largest `|d_ij² − d0_ij²|` over vertex pairs.
    pub max_pair_change: f64,
    /// Largest error of the expansion `|o_i|² + |o_j|² − 2(o_i, o_j)`.
    pub pair_identity_residual: f64,
}

impl StabilityMeasurement {
    pub fn within_pair_bound(&self, h: f64) -> bool {
        self.max_pair_change <= 4.0 * h * h + PAIR_BOUND_SLACK
    }
}

fn check_parameters(r0: f64, delta: f64, h: f64) -> Result<(), StabilityError> {
    if !(r0 > 0.0 && (0.0..=delta).contains(&h) && delta > 0.0 && delta <= 1.0) {
        return Err(StabilityError::Parameters { r0, delta, h });
    }
    Ok(())
}

fn unit_in_ball<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
        let n = linalg::norm(&g);
        if n > 1e-12 {
            let radius = rng.random::<f64>().powf(1.0 / k as f64);
            return linalg::scaled(radius / n, &g);
        }
    }
}

/// Base configuration drawn from `rng`: four points on `S²(r0)` and four
/// offsets in the unit `k`-ball, later scaled by `h`.
fn draw_base<R: Rng>(
    rng: &mut R,
    r0: f64,
    delta: f64,
    k: usize,
) -> Result<(Vec<[f64; 3]>, Vec<Vec<f64>>), StabilityError> {
    if delta > 2.0 * r0 {
        return Err(StabilityError::RejectionBudget { r0, delta });
    }
    for _ in 0..REJECTION_BUDGET {
        let ys: Vec<[f64; 3]> = (0..4)
            .map(|_| {
                let g = unit_in_ball(rng, 3);
                let n = linalg::norm(&g);
                [r0 * g[0] / n, r0 * g[1] / n, r0 * g[2] / n]
            })
            .collect();
        let separated = (0..4).all(|i| (i + 1..4).all(|j| linalg::dist(&ys[i], &ys[j]) >= delta));
        if !separated {
            continue;
        }
        let t0 = Simplex::new(ys.iter().map(|y| Point::plain(y.to_vec())).collect())?;
        if t0.volume() < MIN_VOLUME.max(FATNESS * delta.powi(3)) {
            continue;
        }
        let offsets = (0..4).map(|_| unit_in_ball(rng, k)).collect();
        return Ok((ys, offsets));
    }
    Err(StabilityError::RejectionBudget { r0, delta })
}

fn assemble(ys: &[[f64; 3]], offsets: &[Vec<f64>], h: f64, delta: f64, seed: u64) -> Result<PerturbationSample, StabilityError> {
    let k = offsets[0].len();
    let lift = |y: &[f64; 3], o: Option<&Vec<f64>>| -> FloatPoint {
        let slab = o.map_or(vec![0.0; k], |o| linalg::scaled(h, o));
        Point::new(y.to_vec(), slab).expect("3 + k coordinates")
    };
    let t0 = Simplex::new(ys.iter().map(|y| lift(y, None)).collect())?;
    let t = Simplex::new(ys.iter().zip(offsets).map(|(y, o)| lift(y, Some(o))).collect())?;
    Ok(PerturbationSample { t0, t, delta, h, seed })
}

/// Four `delta`-separated points on `S²(r0) ⊂ ℝ³ × 0` and their lifts by
/// offsets drawn uniformly from the `h`-ball of the last `ambient_k`
/// coordinates.
pub fn sample_perturbation(
    r0: f64,
    delta: f64,
    h: f64,
    seed: u64,
    ambient_k: usize,
) -> Result<PerturbationSample, StabilityError> {
    check_parameters(r0, delta, h)?;
    if ambient_k == 0 {
        return Err(StabilityError::AmbientK);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ys, offsets) = draw_base(&mut rng, r0, delta, ambient_k)?;
    assemble(&ys, &offsets, h, delta, seed)
}

fn edge_basis(s: &Simplex<f64>) -> Vec<Vec<f64>> {
    let v = s.vertices();
    v[1..].iter().map(|p| linalg::sub(p.coords(), v[0].coords())).collect()
}

pub fn measure_stability(s: &PerturbationSample) -> Result<StabilityMeasurement, StabilityError> {
    let c0 = s.t0.circumsphere()?;
    let c1 = s.t.circumsphere()?;
    let d_r2 = (2.0 * c1.radius_sq - 2.0 * c0.radius_sq).abs();
    let q11 = (c1.two_radius_sq_q11 - c0.two_radius_sq_q11).abs();
    let scale = c0.two_radius_sq_q11.abs().max(1.0);
    if (d_r2 - q11).abs() > Q11_AGREEMENT * scale {
        return Err(StabilityError::Q11Mismatch { direct: d_r2, q11 });
    }
    let d_v2 = (s.t0.volume_sq() - s.t.volume_sq()).abs();
    let dim = s.t0.vertices()[0].dim();
    let plane: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect();
    let d_phi = subspace_angle(&edge_basis(&s.t), &plane)?;

    let offsets = s.offsets();
    let (y, z) = (s.t0.vertices(), s.t.vertices());
    let mut max_pair_change: f64 = 0.0;
    let mut pair_identity_residual: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            let change = z[i].dist_sq(&z[j]) - y[i].dist_sq(&y[j]);
            let (oi, oj) = (&offsets[i], &offsets[j]);
            let expansion = linalg::dot(oi, oi) + linalg::dot(oj, oj) - 2.0 * linalg::dot(oi, oj);
            max_pair_change = max_pair_change.max(change.abs());
            pair_identity_residual = pair_identity_residual.max((change - expansion).abs());
        }
    }
    Ok(StabilityMeasurement {
        d_v2,
        d_r2,
        d_phi,
        max_pair_change,
        pair_identity_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% t-interval on the slope.
    pub ci: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub h: f64,
    pub trial: usize,
    pub m: StabilityMeasurement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub r0: f64,
    pub delta: f64,
    pub h_grid: Vec<f64>,
    pub trials_per_h: usize,
    pub seed: u64,
    #[serde(rename = "sV2")]
    pub s_v2: SlopeFit,
    #[serde(rename = "sR2")]
    pub s_r2: SlopeFit,
    #[serde(rename = "sPhi")]
    pub s_phi: SlopeFit,
    /// Per-h maxima of (dV2, dR2, dPhi).
    pub envelopes: Vec<[f64; 3]>,
    /// Whether `|d_ij² − d0_ij²| ≤ 4h²` held in every sample.
    pub pair_bound_holds: bool,
    pub max_pair_identity_residual: f64,
    #[serde(skip)]
    pub rows: Vec<TrialRow>,
}

impl ScalingReport {
    /// `h,trial,dV2,dR2,dPhi` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,trial,dV2,dR2,dPhi\n");
        for r in &self.rows {
            writeln!(out, "{:e},{},{:e},{:e},{:e}", r.h, r.trial, r.m.d_v2, r.m.d_r2, r.m.d_phi).unwrap();
        }
        out
    }
}

/// `h_max · ratio^i`, `i = 0..count`.
pub fn geometric_grid(h_max: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| h_max * ratio.powi(i as i32)).collect()
}

fn is_geometric(grid: &[f64]) -> bool {
    if grid.len() < 5 || grid.iter().any(|&h| !(h > 0.0)) {
        return false;
    }
    let ratio = grid[1] / grid[0];
    ratio != 1.0 && grid.windows(2).all(|w| ((w[1] / w[0]) / ratio - 1.0).abs() < 1e-9)
}

/// Least-squares line through `(x, y)` with a 95% t-interval on the slope.
pub fn fit_line(x: &[f64], y: &[f64]) -> SlopeFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = n - 2.0;
    let half = if dof > 0.0 {
        let se = (sse / dof / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, dof).expect("positive dof").inverse_cdf(0.975);
        t * se
    } else {
        f64::INFINITY
    };
    SlopeFit {
        slope,
        intercept,
        ci: (slope - half, slope + half),
    }
}

/// Fits `log(max measurement)` against `log h` over a geometric grid.
/// Trial `t` draws its base configuration from stream `t` of the seed, so
/// every `h` sees the same configurations and results do not depend on
/// thread count.
pub fn fit_scaling_exponents(
    r0: f64,
    delta: f64,
    h_grid: &[f64],
    trials_per_h: usize,
    seed: u64,
) -> Result<ScalingReport, StabilityError> {
    if !is_geometric(h_grid) || h_grid.iter().any(|&h| h > delta) {
        return Err(StabilityError::Grid);
    }
    if trials_per_h == 0 {
        return Err(StabilityError::Trials);
    }
    for &h in h_grid {
        check_parameters(r0, delta, h)?;
    }
    let bases = (0..trials_per_h)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            draw_base(&mut rng, r0, delta, DEFAULT_AMBIENT_K)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows = h_grid
        .iter()
        .flat_map(|&h| bases.iter().enumerate().map(move |(t, b)| (h, t, b)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(h, trial, (ys, offsets))| {
            let s = assemble(ys, offsets, h, delta, seed)?;
            Ok(TrialRow {
                h,
                trial,
                m: measure_stability(&s)?,
            })
        })
        .collect::<Result<Vec<_>, StabilityError>>()?;

    let envelopes: Vec<[f64; 3]> = h_grid
        .iter()
        .enumerate()
        .map(|(i, _)| {
            rows[i * trials_per_h..(i + 1) * trials_per_h]
                .iter()
                .fold([0.0f64; 3], |a, r| [a[0].max(r.m.d_v2), a[1].max(r.m.d_r2), a[2].max(r.m.d_phi)])
        })
        .collect();
    let log_h: Vec<f64> = h_grid.iter().map(|h| h.ln()).collect();
    let fit = |idx: usize, name: &'static str| -> Result<SlopeFit, StabilityError> {
        if envelopes.iter().any(|e| !(e[idx] > 0.0)) {
            return Err(StabilityError::DegenerateFit(name));
        }
        let y: Vec<f64> = envelopes.iter().map(|e| e[idx].ln()).collect();
        Ok(fit_line(&log_h, &y))
    };
    Ok(ScalingReport {
        r0,
        delta,
        h_grid: h_grid.to_vec(),
        trials_per_h,
        seed,
        s_v2: fit(0, "dV2")?,
        s_r2: fit(1, "dR2")?,
        s_phi: fit(2, "dPhi")?,
        pair_bound_holds: rows.iter().all(|r| r.m.within_pair_bound(r.h)),
        max_pair_identity_residual: rows.iter().map(|r| r.m.pair_identity_residual).fold(0.0, f64::max),
        envelopes,
        rows,
    })
}
