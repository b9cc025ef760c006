//! Seven-color hexagonal tiling avoiding monochromatic distances in a band
//! `[1 − ε, 1 + ε]`.
//!
//! Hexagons of side `s` are the Voronoi cells of a triangular lattice with
//! spacing `√3·s`. Lattice point `i·a + j·b` gets color `(i + 3j) mod 7`, so
//! equal colors repeat on a sublattice with minimal vector length `√21·s`.
//! A tile has diameter `2s`, and two tiles of one color are at least
//! `(√21 − 2)s` apart. The band is safe when `2s ≤ 1 − ε` and
//! `(√21 − 2)s > 1 + ε`; equality in both gives `s = 2/√21` and the largest
//! admissible `ε = 1 − 4/√21`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Sublattice vectors `(i, j)` preserving colors.
pub const SUPERLATTICE: [(i64, i64); 2] = [(1, 2), (-3, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexCell {
    pub i: i64,
    pub j: i64,
}

impl HexCell {
    pub fn color(&self) -> u8 {
        (self.i + 3 * self.j).rem_euclid(7) as u8
    }

    pub fn center(&self, s: f64) -> (f64, f64) {
        let l = SQRT3 * s;
        (l * (self.i as f64 + 0.5 * self.j as f64), l * SQRT3 / 2.0 * self.j as f64)
    }
}

/// Lattice cell whose hexagon (side `s`) contains `(x, y)`.
pub fn hex_cell(x: f64, y: f64, s: f64) -> HexCell {
    assert!(s > 0.0 && s < 1.0, "hexagon side must lie in (0, 1)");
    let l = SQRT3 * s;
    let fj = y / (l * SQRT3 / 2.0);
    let fi = x / l - 0.5 * fj;
    let (i0, j0) = (fi.floor() as i64, fj.floor() as i64);
    let mut best = (f64::INFINITY, HexCell { i: i0, j: j0 });
    for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        let c = HexCell { i: i0 + di, j: j0 + dj };
        let (cx, cy) = c.center(s);
        let d = (x - cx).powi(2) + (y - cy).powi(2);
        if d < best.0 {
            best = (d, c);
        }
    }
    best.1
}

pub fn isbell_color(x: f64, y: f64, s: f64) -> u8 {
    hex_cell(x, y, s).color()
}

/// `1 − 4/√21`.
pub fn isbell_threshold() -> f64 {
    1.0 - 4.0 / 21f64.sqrt()
}

/// Side making the tile diameter equal to `1 − ε`.
pub fn optimal_side(eps: f64) -> f64 {
    (1.0 - eps) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub eps: f64,
    pub s: f64,
    pub pairs: usize,
    pub seed: u64,
    pub monochromatic: usize,
    pub threshold: f64,
    /// `(√21 − 2)s`, a lower bound on same-color distances across tiles.
    pub same_color_gap: f64,
    pub derivation: String,
}

/// Samples `pairs` point pairs at distances uniform in `[1 − ε, 1 + ε]`
/// and counts equal colors under the tiling with side `(1 − ε)/2`.
pub fn isbell_band_check(eps: f64, pairs: usize, seed: u64) -> BandReport {
    let s = optimal_side(eps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // one period of the color pattern is a 7-cell patch; sample a few
    let window = 8.0 * 21f64.sqrt() * s;
    let mut monochromatic = 0;
    for _ in 0..pairs {
        let (x, y) = (window * rng.random::<f64>(), window * rng.random::<f64>());
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        let d = rng.random_range((1.0 - eps)..=(1.0 + eps));
        if isbell_color(x, y, s) == isbell_color(x + d * theta.cos(), y + d * theta.sin(), s) {
            monochromatic += 1;
        }
    }
    BandReport {
        eps,
        s,
        pairs,
        seed,
        monochromatic,
        threshold: isbell_threshold(),
        same_color_gap: (21f64.sqrt() - 2.0) * s,
        derivation: "tile diameter 2s <= 1 - eps and same-color gap (sqrt(21) - 2)s > 1 + eps; \
                     equality in both gives s = 2/sqrt(21), eps_max = 1 - 4/sqrt(21)"
            .to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_value() {
        assert!((isbell_threshold() - 0.127_128_4).abs() < 1e-7);
        let s = 2.0 / 21f64.sqrt();
        assert!((2.0 * s - (1.0 - isbell_threshold())).abs() < 1e-15);
        assert!(((21f64.sqrt() - 2.0) * s - (1.0 + isbell_threshold())).abs() < 1e-15);
    }

    #[test]
    fn centers_map_to_their_cell() {
        for i in -5..5 {
            for j in -5..5 {
                let c = HexCell { i, j };
                let (x, y) = c.center(0.4);
                assert_eq!(hex_cell(x, y, 0.4), c);
            }
        }
    }

    #[test]
    fn superlattice_invariance() {
        let s = 0.45;
        for (di, dj) in SUPERLATTICE {
            let (tx, ty) = HexCell { i: di, j: dj }.center(s);
            for k in 0..200 {
                let (x, y) = (0.037 * k as f64, 0.011 * k as f64 - 1.0);
                assert_eq!(isbell_color(x, y, s), isbell_color(x + tx, y + ty, s));
            }
        }
    }

    #[test]
    fn neighbours_differ() {
        let c = HexCell { i: 0, j: 0 };
        let ring = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];
        let mut colors: Vec<u8> = ring.iter().map(|&(i, j)| HexCell { i, j }.color()).collect();
        colors.push(c.color());
        colors.sort();
        colors.dedup();
        assert_eq!(colors.len(), 7);
    }
}
