use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::determinants::NodeSet;
use crate::error::Result;
use crate::numeric::{c_to_f64, dd, dd_div, Dd, DdComplex};

use super::beam_splitter::BeamSplitter;
use super::coefficients::{build_coefficient_matrix, det_scale_dd};
use super::rank_one::RankOneForm;

/// Relative determinant tolerance for accepting a transmission as a root.
pub const DET_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Grid points on `[-1, 1]` for sign-change detection.
    pub grid_points: usize,
    /// Bracket width at which bisection stops.
    pub bisection_tolerance: f64,
    pub det_tolerance: f64,
    /// Also search the open unit disk with a 2D grid and Newton refinement.
    pub complex_search: bool,
    /// Grid points per axis for the complex search.
    pub complex_grid: usize,
    pub newton_iterations: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_points: 2000,
            bisection_tolerance: 1e-13,
            det_tolerance: DET_TOLERANCE,
            complex_search: false,
            complex_grid: 81,
            newton_iterations: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionRoot {
    /// Leading part of the root.
    pub t: Complex64,
    /// The root to full working precision.
    pub beam_splitter: BeamSplitter,
    /// `|det a| / det_scale` at the root.
    pub det_residual: f64,
}

fn real_splitter(t: Dd) -> Option<BeamSplitter> {
    BeamSplitter::from_dd(DdComplex::new(t, dd(0.0))).ok()
}

/// Exact `det a(T) / det_scale(T)` for real `T`, or `None` where the scale
/// vanishes.
fn reduced_det_exact(nodes: &NodeSet, t: Dd) -> Option<Dd> {
    let bs = real_splitter(t)?;
    let m = build_coefficient_matrix(nodes, &bs).ok()?;
    let scale = det_scale_dd(nodes, f64::from(t).abs());
    let det = m.det_dd().re;
    if scale > 0.0 && f64::from(scale).is_normal() {
        Some(dd_div(det, scale))
    } else if nodes.len() == 1 {
        // N = 1 has unit scale; keep the |T| = 1 endpoints
        Some(det)
    } else {
        None
    }
}

fn form_real(form: &RankOneForm, t: Dd) -> Option<Dd> {
    form.eval(DdComplex::new(t, dd(0.0))).map(|z| z.re)
}

fn form_complex(form: &RankOneForm, t: Complex64) -> Option<Complex64> {
    form.eval(DdComplex::new(dd(t.re), dd(t.im))).map(c_to_f64)
}

fn accept(nodes: &NodeSet, bs: BeamSplitter, tolerance: f64) -> Option<TransmissionRoot> {
    let m = build_coefficient_matrix(nodes, &bs).ok()?;
    let r = m.det_residual();
    (r.is_finite() && r <= tolerance).then_some(TransmissionRoot {
        t: bs.transmission(),
        beam_splitter: bs,
        det_residual: r,
    })
}

/// All transmissions in the search domain at which the coefficient matrix is
/// singular, sorted by real then imaginary part.
///
/// The real scan covers `(-1, 0) ∪ (0, 1)`; the endpoints `±1` are only
/// admissible for `N = 1`, where the scale does not vanish there.
pub fn find_transmission(nodes: &NodeSet, config: &SearchConfig) -> Result<Vec<TransmissionRoot>> {
    let mut roots = real_roots(nodes, config);
    if config.complex_search {
        for root in complex_roots(nodes, config) {
            if !roots.iter().any(|r| (r.t - root.t).norm() < 1e-9) {
                roots.push(root);
            }
        }
    }
    roots.sort_by(|a, b| {
        a.t.re
            .total_cmp(&b.t.re)
            .then_with(|| a.t.im.total_cmp(&b.t.im))
    });
    Ok(roots)
}

fn real_roots(nodes: &NodeSet, config: &SearchConfig) -> Vec<TransmissionRoot> {
    let g = config.grid_points.max(2);
    let grid: Vec<f64> = (0..=g).map(|i| -1.0 + 2.0 * i as f64 / g as f64).collect();
    let form = RankOneForm::new(nodes);
    let values: Vec<Option<Dd>> = grid.par_iter().map(|&t| form_real(&form, dd(t))).collect();

    let mut exact = Vec::new();
    let mut brackets = Vec::new();
    for i in 0..grid.len() {
        let Some(fi) = values[i] else { continue };
        if fi == 0.0 {
            exact.push(dd(grid[i]));
            continue;
        }
        if i + 1 < grid.len() {
            if let Some(fj) = values[i + 1] {
                // never bracket across the pole at T = 0
                let straddles_zero = grid[i] < 0.0 && grid[i + 1] > 0.0;
                if fj != 0.0 && (fi < 0.0) != (fj < 0.0) && !straddles_zero {
                    brackets.push((grid[i], grid[i + 1], fi));
                }
            }
        }
    }

    let mut found: Vec<Dd> = brackets
        .par_iter()
        .filter_map(|&(lo, hi, flo)| bisect(nodes, &form, lo, hi, flo, config))
        .collect();
    found.extend(exact);

    found
        .into_iter()
        .filter_map(|t| accept(nodes, real_splitter(t)?, config.det_tolerance))
        .collect()
}

fn bisect(nodes: &NodeSet, form: &RankOneForm, mut lo: f64, mut hi: f64, flo: Dd, config: &SearchConfig) -> Option<Dd> {
    let lo_negative = flo < 0.0;
    while hi - lo > config.bisection_tolerance {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = form_real(form, dd(mid))?;
        if fm == 0.0 {
            return Some(dd(mid));
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = refine(&|x| form_real(form, x), dd(lo), dd(hi))?;
    let bs = real_splitter(t)?;
    let residual = build_coefficient_matrix(nodes, &bs).ok()?.det_residual();
    if residual <= config.det_tolerance {
        return Some(t);
    }
    // the exact determinant decides; it fails only for roots the form cannot resolve
    refine(&|x| reduced_det_exact(nodes, x), dd(lo), dd(hi))
}

fn refine(f: &dyn Fn(Dd) -> Option<Dd>, lo: Dd, hi: Dd) -> Option<Dd> {
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 || (flo < 0.0) == (fhi < 0.0) {
        // rounding moved the sign change; keep whichever end is closer
        return Some(if fhi.abs() < flo.abs() { hi } else { lo });
    }
    Some(polish(f, lo, hi, flo, fhi))
}

/// Secant iteration inside the final bracket `[lo, hi]`; returns the
/// iterate with the smallest `|f|`.
fn polish(f: &dyn Fn(Dd) -> Option<Dd>, lo: Dd, hi: Dd, flo: Dd, fhi: Dd) -> Dd {
    let mut best = if flo.abs() <= fhi.abs() { (lo, flo) } else { (hi, fhi) };
    let (mut x0, mut f0, mut x1, mut f1) = (lo, flo, hi, fhi);
    for _ in 0..8 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - dd_div(f1 * (x1 - x0), f1 - f0);
        if !(x2 >= lo && x2 <= hi) {
            break;
        }
        let Some(f2) = f(x2) else { break };
        if f2.abs() < best.1.abs() {
            best = (x2, f2);
        }
        let step = f64::from((x2 - x1).abs());
        if f2 == 0.0 || step <= 1e-31 * f64::from(x2.abs()) {
            break;
        }
        (x0, f0, x1, f1) = (x1, f1, x2, f2);
    }
    best.0
}

fn complex_roots(nodes: &NodeSet, config: &SearchConfig) -> Vec<TransmissionRoot> {
    let g = config.complex_grid.max(3);
    let step = 2.0 / (g - 1) as f64;
    let form = RankOneForm::new(nodes);
    let coord = |i: usize| -1.0 + step * i as f64;
    let field: Vec<Option<f64>> = (0..g * g)
        .into_par_iter()
        .map(|idx| {
            let t = Complex64::new(coord(idx % g), coord(idx / g));
            if t.norm() >= 1.0 || t.norm() < 1e-3 {
                return None;
            }
            form_complex(&form, t).map(|z| z.norm())
        })
        .collect();

    let mut seeds = Vec::new();
    for j in 1..g - 1 {
        for i in 1..g - 1 {
            let Some(v) = field[j * g + i] else { continue };
            let is_min = (-1i64..=1).all(|dj| {
                (-1i64..=1).all(|di| {
                    if di == 0 && dj == 0 {
                        return true;
                    }
                    let nb = field[(j as i64 + dj) as usize * g + (i as i64 + di) as usize];
                    nb.is_none_or(|w| v < w)
                })
            });
            // real-axis minima are the real roots already found
            if is_min && coord(j).abs() > step * 0.5 {
                seeds.push(Complex64::new(coord(i), coord(j)));
            }
        }
    }

    let mut out: Vec<TransmissionRoot> = Vec::new();
    let refined: Vec<TransmissionRoot> = seeds
        .par_iter()
        .filter_map(|&seed| newton(nodes, &form, seed, config))
        .collect();
    for root in refined {
        if root.t.im.abs() > 1e-12 && !out.iter().any(|r| (r.t - root.t).norm() < 1e-9) {
            out.push(root);
        }
    }
    out
}

fn newton(nodes: &NodeSet, form: &RankOneForm, mut t: Complex64, config: &SearchConfig) -> Option<TransmissionRoot> {
    let h = 1e-7;
    for _ in 0..config.newton_iterations {
        let f = form_complex(form, t)?;
        if f.norm() < 1e-15 {
            break;
        }
        let fu = (form_complex(form, t + Complex64::new(h, 0.0))? - f) / h;
        let fv = (form_complex(form, t + Complex64::new(0.0, h))? - f) / h;
        // Jacobian [[fu.re, fv.re], [fu.im, fv.im]]
        let det = fu.re * fv.im - fv.re * fu.im;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let du = (fv.im * f.re - fv.re * f.im) / det;
        let dv = (-fu.im * f.re + fu.re * f.im) / det;
        let mut next = t - Complex64::new(du, dv);
        if next.norm() >= 1.0 {
            next = t + (next - t) * 0.5;
            if next.norm() >= 1.0 {
                return None;
            }
        }
        if (next - t).norm() < 1e-15 {
            t = next;
            break;
        }
        t = next;
    }
    accept(nodes, BeamSplitter::new(t).ok()?, config.det_tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::optimal_transmission;

    fn contains(roots: &[TransmissionRoot], t: f64, tol: f64) -> bool {
        roots.iter().any(|r| (r.t.re - t).abs() <= tol && r.t.im == 0.0)
    }

    #[test]
    fn single_mode_root_at_minus_one() {
        let roots = find_transmission(&NodeSet::minimal(1), &SearchConfig::default()).unwrap();
        assert!(contains(&roots, -1.0, 0.0));
    }

    #[test]
    fn minimal_nodes_contain_the_analytic_root() {
        for n in 2..=6 {
            let roots = find_transmission(&NodeSet::minimal(n), &SearchConfig::default()).unwrap();
            assert!(contains(&roots, optimal_transmission(n), 1e-12), "N = {n}: {roots:?}");
            for r in &roots {
                assert!(r.det_residual <= DET_TOLERANCE);
            }
        }
    }

    #[test]
    fn non_minimal_nodes_can_have_several_roots() {
        let roots = find_transmission(&NodeSet::new(vec![0, 2]).unwrap(), &SearchConfig::default()).unwrap();
        assert_eq!(roots.len(), 2, "{roots:?}");
        assert!(roots[0].t.re < 0.0 && roots[1].t.re > 0.0);
    }
}
