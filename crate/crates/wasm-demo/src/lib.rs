//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented on
//! each function. Build with `wasm-pack build --target web --out-dir www/pkg`.

use betalogistic::geodesics::{self, Tolerances};
use betalogistic::{distribution, geometry, ThetaPoint};
use wasm_bindgen::prelude::*;

/// Upper limits keeping a single call interactive.
pub const MAX_POINTS: usize = 4096;
pub const MAX_DIRECTIONS: usize = 64;
pub const MAX_FIELD_CELLS: usize = 200 * 200;

fn point(theta1: f64, theta2: f64) -> Result<ThetaPoint, String> {
    ThetaPoint::new(theta1, theta2).map_err(|e| e.to_string())
}

/// `[x0, p(x0), x1, p(x1), ...]` on `points` equally spaced abscissae.
pub fn density_curve(theta1: f64, theta2: f64, from: f64, to: f64, points: usize) -> Result<Vec<f64>, String> {
    let p = point(theta1, theta2)?;
    if !(2..=MAX_POINTS).contains(&points) || !(to > from) || !from.is_finite() || !to.is_finite() {
        return Err(format!("need 2..={MAX_POINTS} points on a finite interval with to > from"));
    }
    let step = (to - from) / (points - 1) as f64;
    Ok((0..points)
        .flat_map(|i| {
            let x = from + step * i as f64;
            [x, distribution::pdf(&p, x)]
        })
        .collect())
}

/// Unit-speed geodesics from `(theta1, theta2)`. Layout: for each path the
/// pairs `θ¹, θ²` of its states, with paths separated by a `NaN, NaN` pair.
pub fn bundle_polylines(theta1: f64, theta2: f64, directions: usize, t_end: f64) -> Result<Vec<f64>, String> {
    let p = point(theta1, theta2)?;
    if !(1..=MAX_DIRECTIONS).contains(&directions) {
        return Err(format!("directions must lie in 1..={MAX_DIRECTIONS}"));
    }
    let paths = geodesics::geodesic_bundle(&p, directions, t_end, &Tolerances::new(1e-8, 1e-11).expect("valid"))
        .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (i, path) in paths.iter().enumerate() {
        if i > 0 {
            out.extend([f64::NAN, f64::NAN]);
        }
        for s in &path.states {
            out.extend(s.theta.as_array());
        }
    }
    Ok(out)
}

/// Gaussian α-curvature `K = R₁₂₁₂ / det G` on an `nx × ny` grid covering
/// `θ¹ ∈ [t1_min, t1_max]`, `θ² ∈ [−t1_max, t1_max]`; row-major with θ²
/// increasing by row. Cells outside the domain hold `NaN`.
pub fn curvature_grid(alpha: f64, t1_min: f64, t1_max: f64, nx: usize, ny: usize) -> Result<Vec<f64>, String> {
    if !(t1_min > 0.0 && t1_max > t1_min && t1_max.is_finite()) {
        return Err("need 0 < t1_min < t1_max".into());
    }
    if nx < 2 || ny < 2 || nx * ny > MAX_FIELD_CELLS {
        return Err(format!("grid must be at least 2x2 and at most {MAX_FIELD_CELLS} cells"));
    }
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let t2 = -t1_max + 2.0 * t1_max * j as f64 / (ny - 1) as f64;
        for i in 0..nx {
            let t1 = t1_min + (t1_max - t1_min) * i as f64 / (nx - 1) as f64;
            out.push(match ThetaPoint::new(t1, t2) {
                Ok(p) => geometry::curvature(&p, alpha).gaussian,
                Err(_) => f64::NAN,
            });
        }
    }
    Ok(out)
}

/// `[g11, g12, g22, det]` at a point.
pub fn metric_at(theta1: f64, theta2: f64) -> Result<Vec<f64>, String> {
    let g = geometry::fisher(&point(theta1, theta2)?);
    Ok(vec![g.g11, g.g12, g.g22, g.det])
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = densityCurve)]
pub fn density_curve_js(theta1: f64, theta2: f64, from: f64, to: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(density_curve(theta1, theta2, from, to, points))
}

#[wasm_bindgen(js_name = geodesicBundle)]
pub fn geodesic_bundle_js(theta1: f64, theta2: f64, directions: usize, t_end: f64) -> Result<Vec<f64>, JsError> {
    js(bundle_polylines(theta1, theta2, directions, t_end))
}

#[wasm_bindgen(js_name = curvatureField)]
pub fn curvature_field_js(alpha: f64, t1_min: f64, t1_max: f64, nx: usize, ny: usize) -> Result<Vec<f64>, JsError> {
    js(curvature_grid(alpha, t1_min, t1_max, nx, ny))
}

#[wasm_bindgen(js_name = metricAt)]
pub fn metric_at_js(theta1: f64, theta2: f64) -> Result<Vec<f64>, JsError> {
    js(metric_at(theta1, theta2))
}
