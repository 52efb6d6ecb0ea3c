//! Unit-coefficient pair weights as functions of the lattice offset.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;
use std::sync::{Arc, Mutex, OnceLock};

use crate::quad;

/// `(2−α)∫_{cell at offset o} |s|^{−d−α} ds` for every offset with
/// `|o_k| ≤ span`, plus the central-cell stencil weight for the `2d`
/// axis neighbours.
#[derive(Debug)]
pub struct OffsetTable {
    dim: usize,
    alpha: f64,
    h: f64,
    span: i64,
    width: usize,
    cell: Vec<f64>,
    stencil: f64,
    /// 2D: inclusive prefix sums of the total weight over `[−span, ·]²`.
    prefix: Vec<f64>,
}

impl OffsetTable {
    /// Shared table for `(dim, α, h)` covering offsets up to `span`.
    pub fn get(dim: usize, alpha: f64, h: f64, span: usize) -> Arc<OffsetTable> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u64, u64, usize), Arc<OffsetTable>>>> = OnceLock::new();
        let key = (dim, alpha.to_bits(), h.to_bits(), span);
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().unwrap().get(&key) {
            return t.clone();
        }
        let table = Arc::new(OffsetTable::build(dim, alpha, h, span));
        let mut guard = cache.lock().unwrap();
        if guard.len() > 64 {
            guard.clear();
        }
        guard.entry(key).or_insert(table).clone()
    }

    fn build(dim: usize, alpha: f64, h: f64, span: usize) -> OffsetTable {
        let span_i = span as i64;
        let width = 2 * span + 1;
        let norm = 2.0 - alpha;
        let mut cell = vec![0.0; width.pow(dim as u32)];
        if dim == 1 {
            for k in 1..=span_i {
                let lo = (k as f64 - 0.5) * h;
                let w = norm * quad::power_interval(0.0, lo, lo + h, alpha);
                cell[(span_i + k) as usize] = w;
                cell[(span_i - k) as usize] = w;
            }
        } else {
            // one octant, then symmetry
            for ky in 0..=span_i {
                for kx in ky..=span_i {
                    if kx == 0 {
                        continue;
                    }
                    let w = norm * square_power_integral(kx, ky, h, alpha);
                    for (sx, sy) in [(kx, ky), (ky, kx)] {
                        for (ax, ay) in [(sx, sy), (-sx, sy), (sx, -sy), (-sx, -sy)] {
                            cell[((ay + span_i) as usize) * width + (ax + span_i) as usize] = w;
                        }
                    }
                }
            }
        }
        let stencil = central_moment(dim, alpha, h) / (h * h);
        let mut table = OffsetTable {
            dim,
            alpha,
            h,
            span: span_i,
            width,
            cell,
            stencil,
            prefix: Vec::new(),
        };
        if dim == 2 {
            let mut prefix = vec![0.0; width * width];
            for iy in 0..width {
                let mut row = 0.0;
                for ix in 0..width {
                    let o = [ix as i64 - span_i, iy as i64 - span_i];
                    row += table.weight(o);
                    prefix[iy * width + ix] = row + if iy > 0 { prefix[(iy - 1) * width + ix] } else { 0.0 };
                }
            }
            table.prefix = prefix;
        }
        table
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn span(&self) -> usize {
        self.span as usize
    }

    /// Cell integral for offset `o` (zero for `o = 0`).
    #[inline]
    pub fn cell(&self, o: [i64; 2]) -> f64 {
        debug_assert!(o[0].abs() <= self.span && o[1].abs() <= self.span);
        if self.dim == 1 {
            self.cell[(o[0] + self.span) as usize]
        } else {
            self.cell[((o[1] + self.span) as usize) * self.width + (o[0] + self.span) as usize]
        }
    }

    /// Stencil weight `c₀/h²` for one axis neighbour at unit coefficient.
    #[inline]
    pub fn stencil(&self) -> f64 {
        self.stencil
    }

    #[inline]
    pub fn is_axis_neighbor(o: [i64; 2]) -> bool {
        o[0].abs() + o[1].abs() == 1
    }

    /// Total unit pair weight: cell integral plus the stencil for axis neighbours.
    #[inline]
    pub fn weight(&self, o: [i64; 2]) -> f64 {
        let s = if Self::is_axis_neighbor(o) { self.stencil } else { 0.0 };
        self.cell(o) + s
    }

    /// 2D: sum of `weight(o)` over the offset rectangle `[x0, x1] × [y0, y1]`.
    pub fn window_sum(&self, x0: i64, x1: i64, y0: i64, y1: i64) -> f64 {
        debug_assert_eq!(self.dim, 2);
        let s = self.span;
        let at = |x: i64, y: i64| -> f64 {
            if x < -s || y < -s {
                0.0
            } else {
                self.prefix[((y + s) as usize) * self.width + (x + s) as usize]
            }
        };
        at(x1, y1) - at(x0 - 1, y1) - at(x1, y0 - 1) + at(x0 - 1, y0 - 1)
    }
}

/// `∫ |s|^{−2−α}` over the square of side `h` centered at `(kx·h, ky·h)`.
fn square_power_integral(kx: i64, ky: i64, h: f64, alpha: f64) -> f64 {
    let cheb = kx.abs().max(ky.abs());
    let f = |s: [f64; 2]| (s[0] * s[0] + s[1] * s[1]).powf(-1.0 - 0.5 * alpha);
    let center = [kx as f64 * h, ky as f64 * h];
    match cheb {
        1 => {
            // the kernel varies by a large factor across cells touching the
            // central cell, so split them into 4×4 sub-squares
            let sub = 4;
            let q = h / sub as f64;
            let mut acc = 0.0;
            for iy in 0..sub {
                for ix in 0..sub {
                    let c = [
                        center[0] - 0.5 * h + (ix as f64 + 0.5) * q,
                        center[1] - 0.5 * h + (iy as f64 + 0.5) * q,
                    ];
                    acc += quad::integrate_square(8, c, 0.5 * q, f);
                }
            }
            acc
        }
        2..=3 => quad::integrate_square(8, center, 0.5 * h, f),
        _ => quad::integrate_square(4, center, 0.5 * h, f),
    }
}

/// `½ ∫_{central cell} s_k² (2−α)|s|^{−d−α} ds` for one axis `k`.
pub fn central_moment(dim: usize, alpha: f64, h: f64) -> f64 {
    let half = 0.5 * h;
    if dim == 1 {
        half.powf(2.0 - alpha)
    } else {
        let j = quad::integrate_composite(16, 4, 0.0, FRAC_PI_4, |th| th.cos().powf(alpha - 2.0));
        2.0 * half.powf(2.0 - alpha) * j
    }
}

/// 1D far weight `(2−α)∫_{|y| > b} |x − y|^{−1−α} dy`.
pub fn far_weight_1d(x: f64, b: f64, alpha: f64) -> f64 {
    (2.0 - alpha) / alpha * ((b - x).powf(-alpha) + (b + x).powf(-alpha))
}

/// 2D far weight `(2−α)∫_{R²∖[−b,b]²} |x − y|^{−2−α} dy`.
pub fn far_weight_2d(x: [f64; 2], b: f64, alpha: f64) -> f64 {
    (2.0 - alpha) / alpha * quad::square_exit_moment(x, b, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_cells_telescope() {
        let t = OffsetTable::get(1, 1.0, 0.1, 20);
        let sum: f64 = (1..=20).map(|k| t.cell([k, 0])).sum();
        // (2−α)∫_{h/2}^{20.5h} s^{−2} ds
        let exact = 1.0 / 0.05 - 1.0 / 2.05;
        assert!((sum - exact).abs() < 1e-12);
        assert_eq!(t.cell([3, 0]), t.cell([-3, 0]));
    }

    #[test]
    fn two_dimensional_symmetry() {
        let t = OffsetTable::get(2, 0.7, 0.2, 6);
        assert_eq!(t.cell([2, 5]), t.cell([-5, 2]));
        assert_eq!(t.cell([1, 0]), t.cell([0, -1]));
        assert_eq!(t.cell([0, 0]), 0.0);
        let direct: f64 = (-2..=3)
            .flat_map(|y| (-1..=4).map(move |x| [x, y]))
            .map(|o| t.weight(o))
            .sum();
        assert!((t.window_sum(-1, 4, -2, 3) - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn square_moment_matches_far_field_of_a_disc() {
        // the annulus between the square [−b,b]² and a large disc
        let (alpha, b) = (1.0, 1.0);
        let w = far_weight_2d([0.0, 0.0], b, alpha);
        // inside the unit disc: ∫_{|y|>1} = (2−α)2π/α; the square removes more
        let disc = (2.0 - alpha) * 2.0 * std::f64::consts::PI / alpha;
        assert!(w < disc && w > disc / 2.0_f64.sqrt().powf(alpha) * 0.99);
    }
}
