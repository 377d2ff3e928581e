//! Sampling checks for the output-map assumptions.
//!
//! A failed part comes with a witnessing grid pair and is conclusive. A pass
//! is only evidence: the properties quantify over all reals.

use super::{Component, OutputFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct PartCheck {
    /// 1 = continuity, 2 = monotonicity, 3 = zero only at the origin,
    /// 4 = local Lipschitz, 5 = lower slope bound on the band.
    pub part: u8,
    pub passed: bool,
    pub witness: Option<(f64, f64)>,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ComponentReport {
    pub parts: Vec<PartCheck>,
    /// Max finite-difference slope on `[-radius, radius]`.
    pub lipschitz_estimate: f64,
    /// Min finite-difference slope on `[-h, h]`.
    pub varrho_estimate: f64,
}

impl ComponentReport {
    pub fn passed(&self) -> bool {
        self.parts.iter().all(|p| p.passed)
    }

    pub fn part(&self, k: u8) -> &PartCheck {
        &self.parts[usize::from(k) - 1]
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub grid_radius: f64,
    pub grid_points: usize,
    pub components: Vec<ComponentReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.components.iter().all(ComponentReport::passed)
    }
}

/// Checks every component of `f` on a grid of `grid_points` samples over
/// `[-grid_radius, grid_radius]`, refined with the same number of samples
/// on the band `[-h, h]`.
///
/// # Panics
/// If `grid_points < 3`.
pub fn validate_assumption(
    f: &OutputFunction,
    grid_radius: f64,
    grid_points: usize,
) -> ValidationReport {
    assert!(grid_points >= 3, "need at least 3 grid points");
    let components = f
        .components()
        .iter()
        .map(|c| check_component(c, grid_radius, grid_points))
        .collect();
    ValidationReport {
        grid_radius,
        grid_points,
        components,
    }
}

fn grid(radius: f64, band: f64, points: usize) -> Vec<f64> {
    let mut xs = Vec::with_capacity(2 * points + 3);
    let uniform = |r: f64, out: &mut Vec<f64>| {
        for k in 0..points {
            out.push(-r + 2.0 * r * k as f64 / (points - 1) as f64);
        }
    };
    uniform(radius, &mut xs);
    if band.is_finite() {
        uniform(band, &mut xs);
        xs.extend([-band, band]);
    }
    xs.push(0.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

fn slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect()
}

fn check_component(c: &Component, radius: f64, points: usize) -> ComponentReport {
    let band = c.h.min(radius);
    let xs = grid(radius, band, points);
    let ys: Vec<f64> = xs.iter().map(|&x| c.apply(x)).collect();
    let scale = ys.iter().fold(1.0_f64, |m, y| m.max(y.abs()));
    let dy = slopes(&xs, &ys);

    let parts = vec![
        continuity(c, &xs, &ys, scale),
        monotonicity(&xs, &ys, band, scale),
        zero_at_origin(c, &xs, &ys),
        lipschitz(c, &xs, &dy, radius, band, points),
        lower_slope(c, band, points),
    ];

    let lipschitz_estimate = dy.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    let (varrho_estimate, _) = band_min_slope(c, band, points);
    ComponentReport {
        parts,
        lipschitz_estimate,
        varrho_estimate,
    }
}

fn pass(part: u8, detail: impl Into<String>) -> PartCheck {
    PartCheck {
        part,
        passed: true,
        witness: None,
        detail: detail.into(),
    }
}

fn fail(part: u8, witness: (f64, f64), detail: impl Into<String>) -> PartCheck {
    PartCheck {
        part,
        passed: false,
        witness: Some(witness),
        detail: detail.into(),
    }
}

fn continuity(c: &Component, xs: &[f64], ys: &[f64], scale: f64) -> PartCheck {
    if let Some(k) = ys.iter().position(|y| !y.is_finite()) {
        return fail(1, (xs[k], xs[k]), "non-finite value");
    }
    // chase the largest jump by bisection; a true discontinuity survives
    let Some(k) = (0..xs.len() - 1).max_by(|&i, &j| {
        (ys[i + 1] - ys[i])
            .abs()
            .total_cmp(&(ys[j + 1] - ys[j]).abs())
    }) else {
        return pass(1, "single sample");
    };
    let (mut lo, mut hi) = (xs[k], xs[k + 1]);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (glo, gmid, ghi) = (c.apply(lo), c.apply(mid), c.apply(hi));
        if (gmid - glo).abs() >= (ghi - gmid).abs() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let jump = (c.apply(hi) - c.apply(lo)).abs();
    if jump > 1e-6 * scale {
        fail(
            1,
            (lo, hi),
            format!("jump of {jump:e} persists under refinement"),
        )
    } else {
        pass(1, "no persistent jump")
    }
}

fn monotonicity(xs: &[f64], ys: &[f64], band: f64, scale: f64) -> PartCheck {
    for k in 0..xs.len() - 1 {
        if ys[k + 1] < ys[k] - 1e-12 * scale {
            return fail(2, (xs[k], xs[k + 1]), "decreasing between samples");
        }
    }
    for k in 0..xs.len() - 1 {
        let inside = xs[k] >= -band && xs[k + 1] <= band;
        if inside && ys[k + 1] <= ys[k] {
            return fail(2, (xs[k], xs[k + 1]), "not strictly increasing on the band");
        }
    }
    pass(2, "nondecreasing, strictly increasing on the band")
}

fn zero_at_origin(c: &Component, xs: &[f64], ys: &[f64]) -> PartCheck {
    let g0 = c.apply(0.0);
    if g0 != 0.0 {
        return fail(3, (0.0, 0.0), format!("g(0) = {g0}"));
    }
    if let Some(k) = (0..xs.len()).find(|&k| xs[k] != 0.0 && ys[k] == 0.0) {
        return fail(3, (xs[k], xs[k]), "vanishes away from the origin");
    }
    pass(3, "zero only at the origin")
}

fn lipschitz(
    c: &Component,
    xs: &[f64],
    dy: &[f64],
    radius: f64,
    band: f64,
    points: usize,
) -> PartCheck {
    let coarse = dy.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    if !coarse.is_finite() {
        return fail(4, (xs[0], xs[xs.len() - 1]), "infinite slope");
    }
    let fine_xs = grid(radius, band, 4 * points);
    let fine_ys: Vec<f64> = fine_xs.iter().map(|&x| c.apply(x)).collect();
    let fine_dy = slopes(&fine_xs, &fine_ys);
    let (k, fine) = fine_dy
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |(bk, bm), (k, s)| {
            if s.abs() > bm {
                (k, s.abs())
            } else {
                (bk, bm)
            }
        });
    if fine > 1.5 * coarse + 1e-12 {
        return fail(
            4,
            (fine_xs[k], fine_xs[k + 1]),
            format!("slope grows under refinement ({coarse:e} -> {fine:e})"),
        );
    }
    pass(4, format!("K(S) ≈ {coarse}"))
}

fn band_min_slope(c: &Component, band: f64, points: usize) -> (f64, (f64, f64)) {
    let xs = grid(band, band, points);
    let ys: Vec<f64> = xs.iter().map(|&x| c.apply(x)).collect();
    let dy = slopes(&xs, &ys);
    let (k, m) =
        dy.iter().enumerate().fold(
            (0, f64::INFINITY),
            |(bk, bm), (k, s)| if *s < bm { (k, *s) } else { (bk, bm) },
        );
    (m, (xs[k], xs[k + 1]))
}

fn lower_slope(c: &Component, band: f64, points: usize) -> PartCheck {
    let (coarse, at) = band_min_slope(c, band, points);
    if coarse.is_nan() || coarse <= 0.0 {
        return fail(5, at, format!("min slope on the band is {coarse:e}"));
    }
    if coarse < c.varrho * (1.0 - 1e-9) {
        return fail(
            5,
            at,
            format!("min slope {coarse:e} below declared ϱ = {}", c.varrho),
        );
    }
    let (fine, fine_at) = band_min_slope(c, band, 4 * points);
    if fine < 0.6 * coarse {
        return fail(
            5,
            fine_at,
            format!("min slope shrinks under refinement ({coarse:e} -> {fine:e})"),
        );
    }
    pass(5, format!("ϱ ≈ {coarse}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Component;

    #[test]
    fn saturation_passes_with_unit_slopes() {
        let r = validate_assumption(&OutputFunction::saturation(1, 1.0), 10.0, 401);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.components[0].lipschitz_estimate, 1.0);
        assert_eq!(r.components[0].varrho_estimate, 1.0);
    }

    #[test]
    fn cubic_fails_lower_slope_near_origin() {
        let f = OutputFunction::from_components(vec![Component::custom(
            "cube",
            |x: f64| x * x * x,
            1.0,
            1e-3,
        )])
        .unwrap();
        let r = validate_assumption(&f, 10.0, 1001);
        let p5 = r.components[0].part(5);
        assert!(!p5.passed);
        let (a, b) = p5.witness.unwrap();
        assert!(a.abs() < 0.01 && b.abs() < 0.01, "witness ({a}, {b})");
        assert!(r.components[0].part(4).passed);
    }

    #[test]
    fn zero_map_fails_part_three() {
        let f = OutputFunction::from_components(vec![Component::custom("zero", |_| 0.0, 1.0, 1.0)])
            .unwrap();
        let r = validate_assumption(&f, 5.0, 101);
        assert!(!r.components[0].part(3).passed);
    }

    #[test]
    fn step_fails_continuity() {
        let f = OutputFunction::from_components(vec![Component::custom(
            "step",
            |x: f64| if x > 0.5 { x + 1.0 } else { x },
            0.25,
            1.0,
        )])
        .unwrap();
        let r = validate_assumption(&f, 2.0, 101);
        let p1 = r.components[0].part(1);
        assert!(!p1.passed);
        let (a, b) = p1.witness.unwrap();
        assert!(a <= 0.5 && b >= 0.5);
    }

    #[test]
    fn cube_root_fails_lipschitz() {
        let f =
            OutputFunction::from_components(vec![Component::custom("cbrt", f64::cbrt, 1.0, 1.0)])
                .unwrap();
        let r = validate_assumption(&f, 2.0, 201);
        assert!(!r.components[0].part(4).passed);
    }

    #[test]
    fn decreasing_map_fails_monotonicity() {
        let f =
            OutputFunction::from_components(vec![Component::custom("neg", |x: f64| -x, 1.0, 1.0)])
                .unwrap();
        assert!(
            !validate_assumption(&f, 1.0, 11).components[0]
                .part(2)
                .passed
        );
    }
}
