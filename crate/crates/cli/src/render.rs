//! SVG pictures of spiral patterns.
//!
//! The wave `u(s) e^{i(mφ - Ωt)}` has constant phase `ℓπ` along the
//! isophase curves `φ_ℓ(s) = (Ωt - p(s) + ℓπ)/m`, `ℓ = 0..2m-1`, where `p` is
//! the unwrapped argument of `u`. Each picture shows these curves twice: in
//! the `(s, φ)` chart and on the surface itself (polar view for surfaces
//! with boundary, orthographic projection for closed ones).

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use glspiral::profile::SpiralProfile;

/// Argument of `u` along the grid with `2π` jumps removed.
pub fn unwrapped_phase(profile: &SpiralProfile) -> Vec<f64> {
    let mut out = Vec::with_capacity(profile.u.len());
    let mut prev: Option<f64> = None;
    for z in &profile.u {
        let raw = z.arg();
        let p = match prev {
            None => raw,
            Some(q) => raw + TAU * ((q - raw) / TAU).round(),
        };
        out.push(p);
        prev = Some(p);
    }
    out
}

/// Isophase curves as `(s, φ)` samples with `φ` not reduced modulo `2π`.
pub fn isophase_curves(profile: &SpiralProfile, t: f64) -> Vec<Vec<(f64, f64)>> {
    let m = profile.m as f64;
    let phase = unwrapped_phase(profile);
    let s = profile.domain().grid().nodes();
    (0..2 * profile.m)
        .map(|l| s.iter().zip(&phase).map(|(&s, &p)| (s, (profile.omega * t - p + l as f64 * PI) / m)).collect())
        .collect()
}

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 440.0;
const PANEL: f64 = 400.0;
const MARGIN: f64 = 40.0;
/// Camera elevation of the orthographic view.
const ELEVATION: f64 = 0.5;
const COLORS: [&str; 6] = ["#c0392b", "#2471a3", "#229954", "#8e44ad", "#d68910", "#17a589"];

fn color(l: usize) -> &'static str {
    COLORS[l % COLORS.len()]
}

fn polyline(out: &mut String, points: &[(f64, f64)], stroke: &str) {
    if points.len() < 2 {
        return;
    }
    let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(out, r#"<polyline fill="none" stroke="{stroke}" stroke-width="1.6" points="{}"/>"#, coords.join(" "));
}

/// Splits a curve wherever `φ` wraps around `2π`.
fn wrapped_segments(curve: &[(f64, f64)]) -> Vec<Vec<(f64, f64)>> {
    let mut segments = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    let mut last_turn: Option<f64> = None;
    for &(s, phi) in curve {
        let turn = (phi / TAU).floor();
        if last_turn.is_some_and(|t| t != turn) && !current.is_empty() {
            segments.push(std::mem::take(&mut current));
        }
        last_turn = Some(turn);
        current.push((s, phi - TAU * turn));
    }
    if !current.is_empty() {
        segments.push(current);
    }
    segments
}

fn chart_panel(out: &mut String, profile: &SpiralProfile, curves: &[Vec<(f64, f64)>]) {
    let s_star = profile.domain().grid().s_star();
    let (x0, y0) = (MARGIN, MARGIN);
    let sx = PANEL / s_star;
    let sy = PANEL / TAU;
    let _ = writeln!(out, r#"<g id="chart">"#);
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.2}" y="{y0:.2}" width="{PANEL:.2}" height="{PANEL:.2}" fill="#fbfbfb" stroke="#444"/>"##
    );
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">s</text>"#, x0 + PANEL / 2.0, y0 + PANEL + 22.0);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">φ</text>"#, x0 - 18.0, y0 + PANEL / 2.0);
    for (l, curve) in curves.iter().enumerate() {
        let _ = writeln!(out, r#"<g class="arm" data-index="{l}">"#);
        for seg in wrapped_segments(curve) {
            let pts: Vec<(f64, f64)> = seg.iter().map(|&(s, phi)| (x0 + s * sx, y0 + PANEL - phi * sy)).collect();
            polyline(out, &pts, color(l));
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</g>");
}

/// Polar view: the point `(s, φ)` is drawn at radius `s`, angle `φ`.
fn polar_panel(out: &mut String, profile: &SpiralProfile, curves: &[Vec<(f64, f64)>]) {
    let s_star = profile.domain().grid().s_star();
    let cx = 2.0 * MARGIN + PANEL + PANEL / 2.0 + 20.0;
    let cy = MARGIN + PANEL / 2.0;
    let scale = PANEL / 2.0 / s_star;
    let _ = writeln!(out, r#"<g id="pattern" data-view="polar" data-cx="{cx:.2}" data-cy="{cy:.2}" data-scale="{scale:.6}">"#);
    let _ = writeln!(
        out,
        r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="#fbfbfb" stroke="#444"/>"##,
        s_star * scale
    );
    for (l, curve) in curves.iter().enumerate() {
        let _ = writeln!(out, r#"<g class="arm" data-index="{l}">"#);
        let pts: Vec<(f64, f64)> = curve.iter().map(|&(s, phi)| (cx + scale * s * phi.cos(), cy - scale * s * phi.sin())).collect();
        polyline(out, &pts, color(l));
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</g>");
}

/// Orthographic projection of the embedded surface seen from elevation
/// [`ELEVATION`]; only the near side is drawn.
fn orthographic_panel(out: &mut String, profile: &SpiralProfile, curves: &[Vec<(f64, f64)>]) {
    let surface = profile.domain().surface();
    let s_star = surface.s_star();
    let z_mid = 0.5 * (surface.atilde(0.0) + surface.atilde(s_star));
    let (se, ce) = ELEVATION.sin_cos();
    // Screen coordinates and depth towards the viewer, relative to the axis midpoint.
    let project = |s: f64, phi: f64| {
        let (x, y, z) = (surface.a(s) * phi.cos(), surface.a(s) * phi.sin(), surface.atilde(s) - z_mid);
        (x, z * ce + y * se, z * se - y * ce)
    };
    let samples = 400;
    let mut extent = 1e-12f64;
    for k in 0..=samples {
        let s = s_star * k as f64 / samples as f64;
        extent = extent.max(surface.a(s)).max((surface.atilde(s) - z_mid).abs());
    }
    let cx = 2.0 * MARGIN + PANEL + PANEL / 2.0 + 20.0;
    let cy = MARGIN + PANEL / 2.0;
    let scale = PANEL / 2.0 / extent;
    let to_screen = |(x, y): (f64, f64)| (cx + scale * x, cy - scale * y);
    let _ = writeln!(out, r#"<g id="pattern" data-view="orthographic" data-cx="{cx:.2}" data-cy="{cy:.2}" data-scale="{scale:.6}">"#);
    // Silhouette: meridians at the left and right limbs.
    for side in [0.0, PI] {
        let pts: Vec<(f64, f64)> = (0..=samples)
            .map(|k| {
                let s = s_star * k as f64 / samples as f64;
                let (x, y, _) = project(s, side);
                to_screen((x, y))
            })
            .collect();
        polyline(out, &pts, "#444");
    }
    for (l, curve) in curves.iter().enumerate() {
        let _ = writeln!(out, r#"<g class="arm" data-index="{l}">"#);
        let mut seg: Vec<(f64, f64)> = Vec::new();
        for &(s, phi) in curve {
            let (x, y, depth) = project(s, phi);
            if depth >= 0.0 {
                seg.push(to_screen((x, y)));
            } else if !seg.is_empty() {
                polyline(out, &seg, color(l));
                seg.clear();
            }
        }
        polyline(out, &seg, color(l));
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</g>");
}

/// Complete SVG document for `profile` at time `t`.
pub fn render_svg(profile: &SpiralProfile, t: f64) -> String {
    let curves = isophase_curves(profile, t);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        "<title>m = {}, j = {}, lambda = {}, omega = {:.6}, t = {t}</title>",
        profile.m, profile.j, profile.lambda, profile.omega
    );
    chart_panel(&mut out, profile, &curves);
    if profile.domain().surface().boundary_empty() {
        orthographic_panel(&mut out, profile, &curves);
    } else {
        polar_panel(&mut out, profile, &curves);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_splits_at_full_turns() {
        let curve = vec![(0.0, 6.0), (0.1, 6.2), (0.2, 6.4), (0.3, 6.6)];
        let segs = wrapped_segments(&curve);
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].len(), 2);
        assert!((segs[1][0].1 - (6.4 - TAU)).abs() < 1e-12);
    }
}
