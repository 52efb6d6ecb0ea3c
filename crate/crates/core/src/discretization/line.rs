//! Integrals of exterior data along a line against `|s − x|^{−1−α}`.

use crate::quad;

/// A rule restricted to a line, as a function of the line coordinate `s`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Shape1D {
    Constant(f64),
    /// `value` on each open interval `(l, r)`.
    Intervals(Vec<(f64, f64, f64)>),
    /// `amp · cos(w s + phase)`.
    Cosine {
        w: f64,
        amp: f64,
        phase: f64,
    },
    /// `amp · exp(−(s − c)² / (2σ²))`.
    Gaussian {
        c: f64,
        sigma: f64,
        amp: f64,
    },
}

impl Shape1D {
    fn scaled(&self, f: f64) -> Shape1D {
        match self {
            Shape1D::Constant(v) => Shape1D::Constant(v * f),
            Shape1D::Intervals(iv) => Shape1D::Intervals(iv.iter().map(|&(l, r, v)| (l, r, v * f)).collect()),
            Shape1D::Cosine { w, amp, phase } => Shape1D::Cosine {
                w: *w,
                amp: amp * f,
                phase: *phase,
            },
            Shape1D::Gaussian { c, sigma, amp } => Shape1D::Gaussian {
                c: *c,
                sigma: *sigma,
                amp: amp * f,
            },
        }
    }

    fn reflected(&self) -> Shape1D {
        match self {
            Shape1D::Constant(v) => Shape1D::Constant(*v),
            Shape1D::Intervals(iv) => Shape1D::Intervals(iv.iter().map(|&(l, r, v)| (-r, -l, v)).collect()),
            Shape1D::Cosine { w, amp, phase } => Shape1D::Cosine {
                w: *w,
                amp: *amp,
                phase: -phase,
            },
            Shape1D::Gaussian { c, sigma, amp } => Shape1D::Gaussian {
                c: -c,
                sigma: *sigma,
                amp: *amp,
            },
        }
    }

    fn eval(&self, s: f64) -> f64 {
        match self {
            Shape1D::Constant(v) => *v,
            Shape1D::Intervals(iv) => iv.iter().filter(|&&(l, r, _)| s > l && s < r).map(|&(_, _, v)| v).sum(),
            Shape1D::Cosine { w, amp, phase } => amp * (w * s + phase).cos(),
            Shape1D::Gaussian { c, sigma, amp } => {
                let z = (s - c) / sigma;
                amp * (-0.5 * z * z).exp()
            }
        }
    }

    fn is_smooth_part(&self) -> bool {
        match self {
            Shape1D::Cosine { w, amp, .. } => *w != 0.0 && *amp != 0.0,
            Shape1D::Gaussian { amp, .. } => *amp != 0.0,
            _ => false,
        }
    }
}

/// How data values enter an integral: as is, or through `|·|`, `(·)₊`, `(·)₋`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueMap {
    Signed,
    Abs,
    Pos,
    Neg,
}

impl ValueMap {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            ValueMap::Signed => v,
            ValueMap::Abs => v.abs(),
            ValueMap::Pos => v.max(0.0),
            ValueMap::Neg => (-v).max(0.0),
        }
    }
}

/// A sum of one-dimensional shapes at a fixed time.
#[derive(Clone, Debug, Default)]
pub(crate) struct LineData {
    parts: Vec<Shape1D>,
}

const GL_ORDER: usize = 16;
const FAR_WINDOW: f64 = 200.0;

impl LineData {
    pub(crate) fn new(terms: Vec<(f64, Shape1D)>) -> Self {
        LineData {
            parts: terms.into_iter().map(|(c, s)| s.scaled(c)).collect(),
        }
    }

    pub(crate) fn eval(&self, s: f64) -> f64 {
        self.parts.iter().map(|p| p.eval(s)).sum()
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| match p {
            Shape1D::Constant(v) => *v == 0.0,
            Shape1D::Intervals(iv) => iv.iter().all(|&(l, r, v)| v == 0.0 || r <= l),
            Shape1D::Cosine { amp, .. } | Shape1D::Gaussian { amp, .. } => *amp == 0.0,
        })
    }

    fn has_smooth(&self) -> bool {
        self.parts.iter().any(Shape1D::is_smooth_part)
    }

    fn reflected(&self) -> LineData {
        LineData {
            parts: self.parts.iter().map(Shape1D::reflected).collect(),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for p in &self.parts {
            if let Shape1D::Intervals(iv) = p {
                for &(l, r, _) in iv {
                    out.push(l);
                    out.push(r);
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    /// Longest panel that resolves the smooth parts.
    fn panel_cap(&self) -> f64 {
        self.parts
            .iter()
            .map(|p| match p {
                Shape1D::Cosine { w, .. } if *w != 0.0 => 1.0 / w.abs(),
                Shape1D::Gaussian { sigma, .. } => *sigma,
                _ => f64::INFINITY,
            })
            .fold(1.0, f64::min)
    }

    /// `∫_l^r map(g(s)) |s − x|^{−1−α} ds` for `x ∉ (l, r)`; `l` may be `−∞`
    /// and `r` may be `+∞`, but not both.
    pub(crate) fn integrate(&self, x: f64, alpha: f64, l: f64, r: f64, map: ValueMap) -> f64 {
        if !(l < r) {
            return 0.0;
        }
        debug_assert!(!(x > l && x < r), "kernel point inside the integration range");
        if l == f64::NEG_INFINITY {
            return self.reflected().integrate(-x, alpha, -r, f64::INFINITY, map);
        }
        let mut cuts = vec![l];
        cuts.extend(self.breakpoints().into_iter().filter(|&b| b > l && b < r));
        cuts.push(r);
        let smooth = self.has_smooth();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (p, q) = (w[0], w[1]);
            if !smooth {
                let mid = if q.is_finite() { 0.5 * (p + q) } else { p + 1.0 };
                let v = map.apply(self.eval(mid));
                if v != 0.0 {
                    let weight = if q.is_finite() {
                        quad::power_interval(x, p, q, alpha)
                    } else {
                        quad::power_half_line(x, p, alpha)
                    };
                    total += v * weight;
                }
            } else if q.is_finite() {
                total += self.graded(x, alpha, p, q, map);
            } else {
                total += self.far_smooth(x, alpha, p, map);
            }
        }
        total
    }

    /// Gauss–Legendre panels whose lengths grow with the distance to `x`.
    fn graded(&self, x: f64, alpha: f64, p: f64, q: f64, map: ValueMap) -> f64 {
        let cap = self.panel_cap();
        let f = |s: f64| map.apply(self.eval(s)) * (s - x).abs().powf(-1.0 - alpha);
        let mut total = 0.0;
        if x <= p {
            let mut a = p;
            while a < q {
                let len = (a - x).min(cap).max(1e-300);
                let b = (a + len).min(q);
                total += quad::integrate(GL_ORDER, a, b, f);
                a = b;
            }
        } else {
            let mut b = q;
            while b > p {
                let len = (x - b).min(cap).max(1e-300);
                let a = (b - len).max(p);
                total += quad::integrate(GL_ORDER, a, b, f);
                b = a;
            }
        }
        total
    }

    /// `∫_p^∞` for data with smooth parts: panels up to a window, then an
    /// asymptotic remainder for the oscillating and constant parts.
    fn far_smooth(&self, x: f64, alpha: f64, p: f64, map: ValueMap) -> f64 {
        let mut end = p + FAR_WINDOW;
        for part in &self.parts {
            if let Shape1D::Gaussian { c, sigma, .. } = part {
                end = end.max(c + 40.0 * sigma);
            }
        }
        let head = self.graded(x, alpha, p, end, map);
        let constant: f64 = self
            .parts
            .iter()
            .map(|part| match part {
                Shape1D::Constant(v) => *v,
                Shape1D::Cosine { w, amp, phase } if *w == 0.0 => amp * phase.cos(),
                _ => 0.0,
            })
            .sum();
        let cosines: Vec<(f64, f64, f64)> = self
            .parts
            .iter()
            .filter_map(|part| match part {
                Shape1D::Cosine { w, amp, phase } if *w != 0.0 && *amp != 0.0 => Some((*w, *amp, *phase)),
                _ => None,
            })
            .collect();
        let psi = (end - x).powf(-1.0 - alpha);
        let dpsi = -(1.0 + alpha) * (end - x).powf(-2.0 - alpha);
        let tail_weight = quad::power_half_line(x, end, alpha);
        let tail = if cosines.is_empty() {
            map.apply(constant) * tail_weight
        } else if map == ValueMap::Signed {
            constant * tail_weight
                + cosines
                    .iter()
                    .map(|&(w, amp, ph)| {
                        -amp * ((w * end + ph).sin() * psi / w + (w * end + ph).cos() * dpsi / (w * w))
                    })
                    .sum::<f64>()
        } else {
            // mean of the mapped far data over one period of the slowest cosine
            let period = cosines
                .iter()
                .map(|&(w, _, _)| 2.0 * std::f64::consts::PI / w.abs())
                .fold(0.0, f64::max);
            let g = |s: f64| {
                constant
                    + cosines
                        .iter()
                        .map(|&(w, amp, ph)| amp * (w * s + ph).cos())
                        .sum::<f64>()
            };
            let mean = quad::integrate_composite(GL_ORDER, 8, end, end + period, |s| map.apply(g(s))) / period;
            mean * tail_weight
        };
        head + tail
    }
}
