//! Reference-line primitives: exact line/arc evaluation and chord-bounded
//! sample tables for the curve kinds that have no cheap closed form.

use serde::{Deserialize, Serialize};

/// Upper bound on the distance between an approximated curve and its sample
/// polyline.
pub const MAX_CHORD_DEVIATION: f64 = 0.05;

// Internal target, kept below the contract to absorb the dense-polyline error.
const SIMPLIFY_TOLERANCE: f64 = 0.04;
const DENSE_STEP: f64 = 0.02;
const MAX_SAMPLE_GAP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Pose { x, y, heading }
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Moves the pose sideways; positive `t` is to the left of `heading`.
    pub fn offset_left(&self, t: f64) -> Pose {
        let (sin, cos) = self.heading.sin_cos();
        Pose {
            x: self.x - t * sin,
            y: self.y + t * cos,
            heading: self.heading,
        }
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(angle: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeometryKind {
    Line,
    Arc { curvature: f64 },
    /// World-frame samples, strictly increasing in local `s`, spanning
    /// `[0, length]`. Evaluated by linear interpolation.
    Approximated { samples: Vec<GeometrySample> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySegment {
    pub s_offset: f64,
    pub origin_x: f64,
    pub origin_y: f64,
    pub heading: f64,
    pub length: f64,
    pub kind: GeometryKind,
}

impl GeometrySegment {
    /// Pose at local arc length `ds`, clamped to `[0, length]`.
    pub fn eval(&self, ds: f64) -> Pose {
        let ds = ds.clamp(0.0, self.length);
        match &self.kind {
            GeometryKind::Line => {
                let (sin, cos) = self.heading.sin_cos();
                Pose::new(
                    self.origin_x + ds * cos,
                    self.origin_y + ds * sin,
                    self.heading,
                )
            }
            GeometryKind::Arc { curvature } => {
                let k = *curvature;
                let end_heading = self.heading + k * ds;
                Pose::new(
                    self.origin_x + (end_heading.sin() - self.heading.sin()) / k,
                    self.origin_y + (self.heading.cos() - end_heading.cos()) / k,
                    end_heading,
                )
            }
            GeometryKind::Approximated { samples } => interpolate_samples(samples, ds),
        }
    }

    pub fn end_pose(&self) -> Pose {
        self.eval(self.length)
    }
}

fn interpolate_samples(samples: &[GeometrySample], ds: f64) -> Pose {
    let idx = samples.partition_point(|p| p.s <= ds);
    if idx == 0 {
        let p = samples[0];
        return Pose::new(p.x, p.y, p.heading);
    }
    if idx >= samples.len() {
        let p = samples[samples.len() - 1];
        return Pose::new(p.x, p.y, p.heading);
    }
    let a = samples[idx - 1];
    let b = samples[idx];
    let f = (ds - a.s) / (b.s - a.s);
    Pose::new(
        a.x + f * (b.x - a.x),
        a.y + f * (b.y - a.y),
        a.heading + f * (b.heading - a.heading),
    )
}

/// Dense local-frame polyline: (arc length, u, v, local heading).
type DenseCurve = Vec<[f64; 4]>;

/// Euler spiral with curvature varying linearly from `curv_start` to
/// `curv_end`, integrated with Simpson's rule per dense step.
pub fn spiral_samples(
    origin: Pose,
    length: f64,
    curv_start: f64,
    curv_end: f64,
) -> Vec<GeometrySample> {
    let rate = (curv_end - curv_start) / length;
    let theta = |s: f64| curv_start * s + 0.5 * rate * s * s;
    let n = ((length / DENSE_STEP).ceil() as usize).max(8);
    let h = length / n as f64;
    let mut dense: DenseCurve = Vec::with_capacity(n + 1);
    let (mut u, mut v) = (0.0, 0.0);
    dense.push([0.0, 0.0, 0.0, 0.0]);
    for i in 0..n {
        let s0 = i as f64 * h;
        let (t0, tm, t1) = (theta(s0), theta(s0 + 0.5 * h), theta(s0 + h));
        u += h / 6.0 * (t0.cos() + 4.0 * tm.cos() + t1.cos());
        v += h / 6.0 * (t0.sin() + 4.0 * tm.sin() + t1.sin());
        let s1 = if i + 1 == n { length } else { s0 + h };
        dense.push([s1, u, v, theta(s1)]);
    }
    finish(origin, length, dense)
}

/// Cubic lateral polynomial `v(u) = a + b u + c u^2 + d u^3` in the local
/// frame, walked in `u` until the declared arc length is covered.
pub fn poly3_samples(origin: Pose, length: f64, coeffs: [f64; 4]) -> Vec<GeometrySample> {
    let [a, b, c, d] = coeffs;
    let v = |u: f64| a + u * (b + u * (c + u * d));
    let dv = |u: f64| b + u * (2.0 * c + 3.0 * d * u);
    let mut dense: DenseCurve = vec![[0.0, 0.0, v(0.0), dv(0.0).atan()]];
    let mut u = 0.0;
    let mut s = 0.0;
    let max_steps = ((length / DENSE_STEP).ceil() as usize + 1) * 4;
    for _ in 0..max_steps {
        let slope = dv(u).hypot(1.0);
        let du = (DENSE_STEP / slope).max(1e-6);
        let (nu, nv) = (u + du, v(u + du));
        let prev = dense[dense.len() - 1];
        let step = (nu - prev[1]).hypot(nv - prev[2]);
        if s + step >= length {
            let f = (length - s) / step;
            let fu = prev[1] + f * (nu - prev[1]);
            dense.push([length, fu, v(fu), dv(fu).atan()]);
            return finish(origin, length, dense);
        }
        s += step;
        u = nu;
        dense.push([s, nu, nv, dv(nu).atan()]);
    }
    finish(origin, length, dense)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamRange {
    Normalized,
    ArcLength,
}

/// Parametric cubic `(u(p), v(p))` in the local frame.
pub fn param_poly3_samples(
    origin: Pose,
    length: f64,
    u_coeffs: [f64; 4],
    v_coeffs: [f64; 4],
    range: ParamRange,
) -> Vec<GeometrySample> {
    let p_max = match range {
        ParamRange::Normalized => 1.0,
        ParamRange::ArcLength => length,
    };
    let cubic = |c: [f64; 4], p: f64| c[0] + p * (c[1] + p * (c[2] + p * c[3]));
    let deriv = |c: [f64; 4], p: f64| c[1] + p * (2.0 * c[2] + 3.0 * c[3] * p);
    let n = ((length / DENSE_STEP).ceil() as usize).max(8);
    let mut dense: DenseCurve = Vec::with_capacity(n + 1);
    let mut s = 0.0;
    let mut prev = (cubic(u_coeffs, 0.0), cubic(v_coeffs, 0.0));
    for i in 0..=n {
        let p = p_max * i as f64 / n as f64;
        let (u, v) = (cubic(u_coeffs, p), cubic(v_coeffs, p));
        s += (u - prev.0).hypot(v - prev.1);
        prev = (u, v);
        let heading = deriv(v_coeffs, p).atan2(deriv(u_coeffs, p));
        dense.push([s, u, v, heading]);
    }
    // Rescale so the table spans exactly the declared length.
    let total = dense[dense.len() - 1][0];
    if total > 0.0 {
        for p in &mut dense {
            p[0] *= length / total;
        }
    }
    finish(origin, length, dense)
}

fn finish(origin: Pose, length: f64, mut dense: DenseCurve) -> Vec<GeometrySample> {
    unwrap_headings(&mut dense);
    let keep = simplify(&dense, SIMPLIFY_TOLERANCE);
    let (sin, cos) = origin.heading.sin_cos();
    let mut out: Vec<GeometrySample> = keep
        .into_iter()
        .map(|i| {
            let [s, u, v, h] = dense[i];
            GeometrySample {
                s,
                x: origin.x + u * cos - v * sin,
                y: origin.y + u * sin + v * cos,
                heading: origin.heading + h,
            }
        })
        .collect();
    out[0].s = 0.0;
    let last = out.len() - 1;
    out[last].s = length;
    out
}

fn unwrap_headings(dense: &mut DenseCurve) {
    use std::f64::consts::PI;
    for i in 1..dense.len() {
        let prev = dense[i - 1][3];
        let mut h = dense[i][3];
        while h - prev > PI {
            h -= 2.0 * PI;
        }
        while h - prev < -PI {
            h += 2.0 * PI;
        }
        dense[i][3] = h;
    }
}

/// Greedy chord simplification: keeps a point whenever extending the current
/// chord would leave some dense point farther than `tol` from it.
fn simplify(dense: &DenseCurve, tol: f64) -> Vec<usize> {
    let mut keep = vec![0];
    let mut anchor = 0;
    let mut j = 1;
    while j < dense.len() {
        let fits = dense[j][0] - dense[anchor][0] <= MAX_SAMPLE_GAP
            && (anchor + 1..j).all(|k| chord_distance(dense, anchor, j, k) <= tol);
        if !fits {
            anchor = j - 1;
            keep.push(anchor);
        }
        j += 1;
    }
    let last = dense.len() - 1;
    if *keep.last().unwrap() != last {
        keep.push(last);
    }
    keep
}

fn chord_distance(dense: &DenseCurve, a: usize, b: usize, p: usize) -> f64 {
    let (ax, ay) = (dense[a][1], dense[a][2]);
    let (bx, by) = (dense[b][1], dense[b][2]);
    let (px, py) = (dense[p][1], dense[p][2]);
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return (px - ax).hypot(py - ay);
    }
    let f = (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0);
    (px - ax - f * dx).hypot(py - ay - f * dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn seg(kind: GeometryKind, x: f64, y: f64, hdg: f64, length: f64) -> GeometrySegment {
        GeometrySegment {
            s_offset: 0.0,
            origin_x: x,
            origin_y: y,
            heading: hdg,
            length,
            kind,
        }
    }

    #[test]
    fn line_translation() {
        let g = seg(GeometryKind::Line, 5.0, 5.0, 0.0, 20.0);
        let p = g.eval(10.0);
        assert_eq!((p.x, p.y, p.heading), (15.0, 5.0, 0.0));
    }

    #[test]
    fn quarter_circle() {
        let k = 0.01;
        let g = seg(GeometryKind::Arc { curvature: k }, 0.0, 0.0, 0.0, PI / (2.0 * k));
        let p = g.eval(PI / (2.0 * k));
        assert!((p.x - 100.0).abs() < 1e-9);
        assert!((p.y - 100.0).abs() < 1e-9);
        assert!((p.heading - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn arc_matches_numerical_integration() {
        let (k, h0) = (0.037, 0.4);
        let g = seg(GeometryKind::Arc { curvature: k }, 1.0, -2.0, h0, 40.0);
        let step = 1e-3;
        let (mut x, mut y) = (1.0, -2.0);
        let n = (40.0 / step) as usize;
        for i in 0..n {
            // midpoint rule on (cos, sin) of the heading
            let th = h0 + k * (i as f64 + 0.5) * step;
            x += step * th.cos();
            y += step * th.sin();
            if (i + 1) % 5000 == 0 {
                let p = g.eval((i + 1) as f64 * step);
                assert!((p.x - x).abs() < 1e-6 && (p.y - y).abs() < 1e-6, "at {i}");
            }
        }
    }

    fn max_deviation(samples: &[GeometrySample], truth: &dyn Fn(f64) -> (f64, f64), length: f64) -> f64 {
        let mut worst: f64 = 0.0;
        let n = 4000;
        for i in 0..=n {
            let s = length * i as f64 / n as f64;
            let (tx, ty) = truth(s);
            // distance from the true point to the polyline
            let mut best = f64::INFINITY;
            for w in samples.windows(2) {
                let (ax, ay, bx, by) = (w[0].x, w[0].y, w[1].x, w[1].y);
                let (dx, dy) = (bx - ax, by - ay);
                let f = (((tx - ax) * dx + (ty - ay) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
                best = best.min((tx - ax - f * dx).hypot(ty - ay - f * dy));
            }
            worst = worst.max(best);
        }
        worst
    }

    #[test]
    fn spiral_chord_deviation_bounded() {
        let origin = Pose::new(3.0, 4.0, 0.3);
        let (l, k0, k1) = (60.0, 0.0, 0.08);
        let samples = spiral_samples(origin, l, k0, k1);
        // independent midpoint integration on a 1e-3 m grid
        let n = 60_000;
        let h = l / n as f64;
        let mut pts = vec![(origin.x, origin.y)];
        let (mut x, mut y) = (origin.x, origin.y);
        for i in 0..n {
            let sm = (i as f64 + 0.5) * h;
            let th = origin.heading + k0 * sm + 0.5 * (k1 - k0) / l * sm * sm;
            x += h * th.cos();
            y += h * th.sin();
            pts.push((x, y));
        }
        let truth = |s: f64| pts[((s / h).round() as usize).min(n)];
        assert!(max_deviation(&samples, &truth, l) <= MAX_CHORD_DEVIATION);
        assert_eq!(samples[0].s, 0.0);
        assert_eq!(samples.last().unwrap().s, l);
        assert!(samples.windows(2).all(|w| w[1].s > w[0].s));
    }

    #[test]
    fn param_poly3_arc_is_close_to_circle() {
        // A gentle cubic; compare against its own dense evaluation.
        let origin = Pose::new(0.0, 0.0, 0.0);
        let u = [0.0, 30.0, 0.0, 0.0];
        let v = [0.0, 0.0, 6.0, -2.0];
        let cubic = |c: [f64; 4], p: f64| c[0] + p * (c[1] + p * (c[2] + p * c[3]));
        // arc length via fine sum
        let n = 100_000;
        let mut len = 0.0;
        let mut pts = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let p = i as f64 / n as f64;
            pts.push((cubic(u, p), cubic(v, p)));
            if i > 0 {
                len += (pts[i].0 - pts[i - 1].0).hypot(pts[i].1 - pts[i - 1].1);
            }
        }
        let samples = param_poly3_samples(origin, len, u, v, ParamRange::Normalized);
        let truth = |s: f64| {
            let idx = ((s / len) * n as f64).round() as usize;
            pts[idx.min(n)]
        };
        assert!(max_deviation(&samples, &truth, len) <= MAX_CHORD_DEVIATION + 1e-3);
    }

    #[test]
    fn poly3_straight_when_flat() {
        let samples = poly3_samples(Pose::new(1.0, 1.0, 0.0), 25.0, [0.0, 0.0, 0.0, 0.0]);
        let last = samples.last().unwrap();
        assert!((last.x - 26.0).abs() < 1e-6 && (last.y - 1.0).abs() < 1e-9);
    }

    #[test]
    fn angle_normalization() {
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-12);
        assert_eq!(normalize_angle(0.5), 0.5);
    }
}
