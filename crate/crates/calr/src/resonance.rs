//! Power, normalization, δ-sweeps, blow-up classification, the zero-Cauchy-data
//! extendability test and the critical radius.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CalrError, Result};
use crate::medium::{LayerRole, LayeredMedium, RadialProfile};
use crate::spectral::harmonics::angular_weight;
use crate::spectral::{sobolev_trace_norm, Field, ModeSolver, ModeSpectrum, RadialBasis};

/// Far-field annulus starts at `(1 + FAR_FIELD_MARGIN) r₃`.
pub const FAR_FIELD_MARGIN: f64 = 0.1;

/// `∫_{shell} |∇u|²` summed over the plasmonic layers.
pub fn shell_energy(field: &Field, medium: &LayeredMedium) -> f64 {
    medium.shell_intervals().iter().map(|&(a, b)| field.h1_energy(a, b)).sum()
}

/// `E_δ = δ ∫_{shell} |∇u|²`.
pub fn power(field: &Field, medium: &LayeredMedium, delta: f64) -> f64 {
    delta * shell_energy(field, medium)
}

/// `c_δ = (δ^{1/2} ∫_{shell}|∇u|²)^{-1/2}`, so that `v = c_δ u` has `δ^{1/2}∫_{shell}|∇v|² = 1`.
pub fn normalization_constant(shell_energy: f64, delta: f64) -> Result<f64> {
    if !(shell_energy > 0.0 && shell_energy.is_finite()) {
        return Err(CalrError::Insufficient(format!(
            "shell energy {shell_energy:e} does not allow normalization"
        )));
    }
    Ok((delta.sqrt() * shell_energy).powf(-0.5))
}

/// Normalizes a solved field: returns `(c_δ, v_δ)`.
pub fn normalize_field(field: &Field, medium: &LayeredMedium) -> Result<(f64, Field)> {
    let c = normalization_constant(shell_energy(field, medium), field.delta())?;
    Ok((c, field.scaled(Complex64::new(c, 0.0))))
}

/// Solves and normalizes in one step.
pub fn normalize(src: &ModeSpectrum, medium: &LayeredMedium, delta: f64, cutoff: usize) -> Result<(f64, Field)> {
    let u = crate::spectral::solve_field(medium, src, delta, cutoff)?;
    normalize_field(&u, medium)
}

/// Radius of the outermost complementary interface (`r₃`, or the last interface).
pub fn outer_radius(medium: &LayeredMedium) -> f64 {
    match medium.geometry() {
        Some(g) => g.r3,
        None => medium.interfaces().last().copied().unwrap_or(0.0),
    }
}

/// Far-field annulus `((1 + margin) r₃, R_Ω)`.
pub fn far_field_annulus(medium: &LayeredMedium) -> (f64, f64) {
    ((1.0 + FAR_FIELD_MARGIN) * outer_radius(medium), medium.omega_radius())
}

/// `n` logarithmically spaced values from `start` down to `end`.
pub fn log_delta_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    let (a, b) = (start.log10(), end.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

/// The default sweep `10^{-2} … 10^{-10}`, 17 points.
pub fn default_delta_grid() -> Vec<f64> {
    log_delta_grid(1e-2, 1e-10, 17)
}

/// One δ of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: f64,
    pub power: f64,
    pub shell_energy: f64,
    pub u_farfield_h1: f64,
    pub v_farfield_h1: f64,
    pub c_delta: f64,
    /// `‖u_δ‖_{H¹(Ω)}`.
    pub u_h1_omega: f64,
    pub valid: bool,
    pub error: Option<String>,
}

impl SweepRow {
    fn invalid(delta: f64, e: &CalrError) -> Self {
        SweepRow {
            delta,
            power: f64::NAN,
            shell_energy: f64::NAN,
            u_farfield_h1: f64::NAN,
            v_farfield_h1: f64::NAN,
            c_delta: f64::NAN,
            u_h1_omega: f64::NAN,
            valid: false,
            error: Some(e.to_string()),
        }
    }
}

/// Rows of a sweep together with the solved fields (for Cauchy differences).
#[derive(Clone, Debug)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub fields: Vec<Option<Field>>,
    pub far_field: (f64, f64),
}

fn row_for(field: &Field, medium: &LayeredMedium, far: (f64, f64)) -> SweepRow {
    let delta = field.delta();
    let s = shell_energy(field, medium);
    let u_ff = field.h1_norm(far.0, far.1);
    let c = normalization_constant(s, delta).unwrap_or(f64::NAN);
    SweepRow {
        delta,
        power: delta * s,
        shell_energy: s,
        u_farfield_h1: u_ff,
        v_farfield_h1: c * u_ff,
        c_delta: c,
        u_h1_omega: field.h1_norm(0.0, medium.omega_radius()),
        valid: c.is_finite(),
        error: if c.is_finite() { None } else { Some("zero shell energy".into()) },
    }
}

/// Runs a sweep with a prepared solver, in parallel over δ.
pub fn run_sweep_with(solver: &ModeSolver, src: &ModeSpectrum, deltas: &[f64]) -> Result<Sweep> {
    check_deltas(deltas)?;
    let medium = solver.medium();
    let far = far_field_annulus(medium);
    let out: Vec<(SweepRow, Option<Field>)> = deltas
        .par_iter()
        .map(|&delta| match solver.solve(src, delta) {
            Ok(f) => (row_for(&f, medium, far), Some(f)),
            Err(e) => (SweepRow::invalid(delta, &e), None),
        })
        .collect();
    let (rows, fields) = out.into_iter().unzip();
    Ok(Sweep { rows, fields, far_field: far })
}

/// Solves `medium` for `src` at every δ (descending, in `(0, 1)`).
pub fn run_sweep(medium: &LayeredMedium, src: &ModeSpectrum, deltas: &[f64], cutoff: usize) -> Result<Sweep> {
    let solver = ModeSolver::for_spectrum(medium, src, cutoff)?;
    run_sweep_with(&solver, src, deltas)
}

/// Rows only.
pub fn delta_sweep(medium: &LayeredMedium, src: &ModeSpectrum, deltas: &[f64], cutoff: usize) -> Result<Vec<SweepRow>> {
    Ok(run_sweep(medium, src, deltas, cutoff)?.rows)
}

fn check_deltas(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(CalrError::Validation("empty δ list".into()));
    }
    if deltas.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
        return Err(CalrError::Validation("every δ must lie in (0, 1)".into()));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CalrError::Validation("δ list must be strictly descending".into()));
    }
    Ok(())
}

/// Verdict classes of the power dichotomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictClass {
    BlowUp,
    Bounded,
    Indeterminate,
}

/// Classifier thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierPolicy {
    /// BlowUp needs slope ≤ −`blowup_slope`.
    pub blowup_slope: f64,
    /// Flat Bounded needs |slope| ≤ `flat_slope`.
    pub flat_slope: f64,
    /// Flat Bounded needs max/min − 1 ≤ `bounded_variation` over the last two decades.
    pub bounded_variation: f64,
    /// Decaying Bounded needs slope ≥ `decay_slope` and a non-increasing tail.
    pub decay_slope: f64,
    pub min_rows: usize,
    pub min_decades: f64,
}

impl Default for ClassifierPolicy {
    fn default() -> Self {
        ClassifierPolicy {
            blowup_slope: 0.1,
            flat_slope: 0.05,
            bounded_variation: 0.1,
            decay_slope: 0.1,
            min_rows: 5,
            min_decades: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub class: VerdictClass,
    /// Least-squares slope of `ln E_δ` against `ln δ` over the tail.
    pub slope: f64,
    /// Coefficient of determination of that fit.
    pub r_squared: f64,
    /// `max/min − 1` of `E_δ` over the last two decades.
    pub variation: f64,
    /// `E_δ` non-decreasing as δ decreases along the tail.
    pub increasing_tail: bool,
    /// `E_δ` non-increasing as δ decreases along the tail.
    pub decreasing_tail: bool,
    /// Tail rows, ordered by decreasing δ.
    pub tail: Vec<(f64, f64)>,
    pub reason: String,
}

/// Least-squares line `y = a + b x`; returns `(b, r²)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let b = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (b, r2)
}

pub fn classify(rows: &[SweepRow]) -> Result<Verdict> {
    classify_with(rows, &ClassifierPolicy::default())
}

/// Classifies the power curve of a sweep; row order does not matter.
pub fn classify_with(rows: &[SweepRow], policy: &ClassifierPolicy) -> Result<Verdict> {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.valid && r.delta > 0.0 && r.power > 0.0 && r.power.is_finite())
        .map(|r| (r.delta, r.power))
        .collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    if pts.len() < policy.min_rows {
        return Err(CalrError::Insufficient(format!("{} valid rows, need {}", pts.len(), policy.min_rows)));
    }
    let decades = (pts[0].0 / pts[pts.len() - 1].0).log10();
    if decades < policy.min_decades - 1e-9 {
        return Err(CalrError::Insufficient(format!("rows span {decades:.2} decades, need {}", policy.min_decades)));
    }
    let tail = &pts[pts.len() / 2..];
    let x: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    let (slope, r_squared) = fit_line(&x, &y);
    let increasing_tail = tail.windows(2).all(|w| w[1].1 >= w[0].1);
    let decreasing_tail = tail.windows(2).all(|w| w[1].1 <= w[0].1);
    let last = pts[pts.len() - 1].0;
    let window: Vec<f64> = pts.iter().filter(|p| p.0 <= last * 100.0 * (1.0 + 1e-9)).map(|p| p.1).collect();
    let (lo, hi) = window.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let variation = hi / lo - 1.0;

    let (class, reason) = if slope <= -policy.blowup_slope && increasing_tail {
        (VerdictClass::BlowUp, format!("slope {slope:.4} ≤ −{} with a monotone tail", policy.blowup_slope))
    } else if slope.abs() <= policy.flat_slope && variation <= policy.bounded_variation {
        (VerdictClass::Bounded, format!("flat tail: slope {slope:.4}, variation {:.1}%", 100.0 * variation))
    } else if slope >= policy.decay_slope && decreasing_tail {
        (VerdictClass::Bounded, format!("power decays along the tail: slope {slope:.4}"))
    } else {
        (VerdictClass::Indeterminate, format!("slope {slope:.4}, variation {:.1}%", 100.0 * variation))
    };
    Ok(Verdict {
        class,
        slope,
        r_squared,
        variation,
        increasing_tail,
        decreasing_tail,
        tail: tail.to_vec(),
        reason,
    })
}

/// Far-field side of the dichotomy for one sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarFieldBehaviour {
    /// Normalized far field decreases monotonically (5% jitter) along the tail.
    pub v_decaying: bool,
    /// Far-field differences of `u_δ` contract by at least one half per step along the tail.
    pub u_cauchy: bool,
    pub v_tail: Vec<f64>,
    pub u_differences: Vec<f64>,
    /// Overall decay factor of `v` from the first to the last valid row.
    pub v_decay_factor: f64,
}

pub const FARFIELD_JITTER: f64 = 0.05;
pub const CAUCHY_CONTRACTION: f64 = 0.5;
/// Differences below this fraction of `‖u‖` count as converged.
pub const CAUCHY_FLOOR: f64 = 1e-11;

pub fn far_field_behaviour(sweep: &Sweep) -> Result<FarFieldBehaviour> {
    let mut idx: Vec<usize> = (0..sweep.rows.len()).filter(|&i| sweep.rows[i].valid && sweep.fields[i].is_some()).collect();
    idx.sort_by(|&a, &b| sweep.rows[b].delta.total_cmp(&sweep.rows[a].delta));
    if idx.len() < 4 {
        return Err(CalrError::Insufficient("too few valid rows for far-field behaviour".into()));
    }
    let tail = &idx[idx.len() / 2..];
    let v_tail: Vec<f64> = tail.iter().map(|&i| sweep.rows[i].v_farfield_h1).collect();
    let v_decaying = v_tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + FARFIELD_JITTER)) && v_tail[v_tail.len() - 1] < v_tail[0];
    let (a, b) = sweep.far_field;
    let mut diffs = Vec::new();
    for w in tail.windows(2) {
        let (f0, f1) = (sweep.fields[w[0]].as_ref().expect("checked"), sweep.fields[w[1]].as_ref().expect("checked"));
        diffs.push(f1.difference(f0)?.h1_norm(a, b));
    }
    let scale = sweep.rows[tail[tail.len() - 1]].u_farfield_h1;
    let floor = CAUCHY_FLOOR * scale;
    let u_cauchy = diffs.windows(2).all(|w| w[1] <= CAUCHY_CONTRACTION * w[0] || w[1] <= floor);
    let first = sweep.rows[idx[0]].v_farfield_h1;
    let last = sweep.rows[idx[idx.len() - 1]].v_farfield_h1;
    Ok(FarFieldBehaviour { v_decaying, u_cauchy, v_tail, u_differences: diffs, v_decay_factor: first / last })
}

/// Consistency of the power verdict with the far-field behaviour: a BlowUp
/// verdict needs a decaying normalized far field and a Bounded verdict a
/// Cauchy far field of `u_δ`. `None` for Indeterminate verdicts.
pub fn dichotomy_agrees(verdict: &Verdict, ff: &FarFieldBehaviour) -> Option<bool> {
    match verdict.class {
        VerdictClass::BlowUp => Some(ff.v_decaying),
        VerdictClass::Bounded => Some(ff.u_cauchy),
        VerdictClass::Indeterminate => None,
    }
}

/// Largest ratio `‖u‖²_{H¹(Ω)} / (∫_{shell}|∇u|² + ‖f‖²)` over a sweep, with
/// `‖f‖` the `H^{-1/2}` norm of the source on its sphere.
pub fn energy_inequality_constants(sweep: &Sweep, src: &ModeSpectrum) -> Vec<f64> {
    let f = sobolev_trace_norm(src.iter().map(|(m, g)| (m.degree, g)), src.radius(), src.dimension(), -0.5);
    sweep
        .rows
        .iter()
        .filter(|r| r.valid)
        .map(|r| r.u_h1_omega * r.u_h1_omega / (r.shell_energy + f * f))
        .collect()
}

/// Outcome of the zero-Cauchy-data extension test.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtendabilityReport {
    pub target_radius: f64,
    pub source_radius: f64,
    pub degrees: Vec<usize>,
    /// `ln` of the per-degree `H¹(B_R∖B_{r₂})` energy of the extension.
    pub log_energies: Vec<f64>,
    /// `ln` of the partial sums of those energies.
    pub log_partial_sums: Vec<f64>,
    /// Every degree lies below half the cutoff: the source extends to every radius.
    pub finite_band: bool,
    /// `None` when the fit is not possible.
    pub diverges: Option<bool>,
    /// Fitted per-degree energy ratio `e^β`.
    pub growth_ratio: Option<f64>,
    /// `R e^{-β/2}`, or `+∞` for finite-band sources.
    pub max_radius: Option<f64>,
    /// Fit `ln e_ℓ ≈ α + βℓ + γ ln ℓ`.
    pub fit: Option<[f64; 3]>,
    /// Coefficients of `W` on `(ρ^ℓ − ρ^{-ℓ})` / `(ρ^ℓ − ρ^{-ℓ-1})` with `ρ = r/r₂`,
    /// available for constant annulus coefficients.
    pub w_coefficients: Option<WCoefficients>,
}

/// Per-mode coefficients `G` of `W`, kept as `ln|G|` and phase to survive high degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WCoefficients {
    pub dimension: usize,
    pub r2: f64,
    pub r3: f64,
    pub source_radius: f64,
    /// Radius `r₀` up to which the zero-Cauchy-data extension is taken to exist.
    /// It sets the damping `ξ_ℓ = δ^{1/2}(r₃/r₀)^ℓ`.
    pub extension_radius: f64,
    /// `(degree, order, ln|G|, arg G)`.
    pub entries: Vec<(usize, i64, f64, f64)>,
}

const MIN_FIT_POINTS: usize = 8;
/// Largest `ln` growth allowed across one marching piece.
const MARCH_LOG_STEP: f64 = 100.0;

/// Marches the zero-Cauchy-data extension of a unit mode of degree `ℓ` from
/// `r0` to `target` and returns `ln` of its `H¹` energy, without angular weight.
fn extension_log_energy(pieces: &[(f64, f64, RadialProfile)], degree: usize, d: usize, r0: f64, target: f64) -> Result<f64> {
    let mut log_scale = 0.0f64;
    let (mut u, mut flux) = (Complex64::default(), Complex64::new(r0.powi(d as i32 - 1), 0.0));
    let mut terms: Vec<f64> = Vec::new();
    for (lo, hi, profile) in pieces {
        let (lo, hi) = (lo.max(r0), hi.min(target));
        if hi <= lo {
            continue;
        }
        let growth = (degree as f64 + 1.0) * (hi / lo).ln();
        let n = (growth / MARCH_LOG_STEP).ceil().max(1.0) as usize;
        for k in 0..n {
            let a = lo * (hi / lo).powf(k as f64 / n as f64);
            let b = if k + 1 == n { hi } else { lo * (hi / lo).powf((k + 1) as f64 / n as f64) };
            let basis = RadialBasis::new(profile, degree, d, a, b)?;
            let (v, f) = (basis.values(a), basis.fluxes(a));
            let det = v[0] * f[1] - v[1] * f[0];
            let c = (u * f[1] - flux * v[1]) / det;
            let dd = (flux * v[0] - u * f[0]) / det;
            let e = basis.gradient_energy(c, dd, a, b) + basis.l2_energy(c, dd, a, b);
            if e > 0.0 {
                terms.push(2.0 * log_scale + e.ln());
            }
            let (u1, f1) = basis.combine(c, dd, b);
            let s = u1.norm().max(f1.norm());
            if s == 0.0 || !s.is_finite() {
                return Err(CalrError::Solver { degree, reason: "extension lost its Cauchy data".into() });
            }
            log_scale += s.ln();
            u = u1 / s;
            flux = f1 / s;
        }
    }
    Ok(log_sum_exp(&terms))
}

/// `ln Σ e^{v_k}` without overflow.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Zero-Cauchy-data extension test for `src` up to radius `target`.
///
/// `cutoff` is the mode cutoff the source is judged against: sources whose
/// highest degree is below `cutoff / 2` are treated as finite-band.
pub fn extendability_test(src: &ModeSpectrum, medium: &LayeredMedium, target: f64, cutoff: usize) -> Result<ExtendabilityReport> {
    let r2 = medium
        .geometry()
        .map(|g| g.r2)
        .or_else(|| medium.layer(LayerRole::Annulus).map(|l| l.inner))
        .ok_or_else(|| CalrError::Validation("medium has no annulus".into()))?;
    let r0 = src.radius();
    if !(r2 < r0 && r0 < target) {
        return Err(CalrError::Validation(format!("need r₂ < r₀ < R, got {r2}, {r0}, {target}")));
    }
    src.check_against(medium)?;
    let d = medium.dimension();
    let mut pieces: Vec<(f64, f64, RadialProfile)> = medium
        .layers()
        .iter()
        .filter(|l| l.outer > r0 && l.inner < target)
        .map(|l| (l.inner, l.outer, l.profile.clone()))
        .collect();
    if let Some(last) = pieces.last_mut() {
        if target > last.1 {
            if last.2.power_law_parts().is_none() {
                return Err(CalrError::Validation("target radius beyond Ω needs a closed-form outer layer".into()));
            }
            last.1 = target;
        }
    }
    let mags = src.degree_magnitudes();
    let degrees: Vec<usize> = mags.iter().filter(|(_, g)| **g > 0.0).map(|(l, _)| *l).collect();
    let omega = angular_weight(d);
    let unit: Vec<Result<f64>> = degrees
        .par_iter()
        .map(|&l| extension_log_energy(&pieces, l, d, r0, target))
        .collect();
    let mut log_energies = Vec::with_capacity(degrees.len());
    for (l, e) in degrees.iter().zip(unit) {
        log_energies.push(e? + omega.ln() + 2.0 * mags[l].ln());
    }
    let mut log_partial_sums = Vec::with_capacity(log_energies.len());
    let mut acc = f64::NEG_INFINITY;
    for &e in &log_energies {
        acc = log_sum_exp(&[acc, e]);
        log_partial_sums.push(acc);
    }
    let max_degree = degrees.last().copied().unwrap_or(0);
    let finite_band = 2 * max_degree < cutoff;
    let mut report = ExtendabilityReport {
        target_radius: target,
        source_radius: r0,
        degrees: degrees.clone(),
        log_energies: log_energies.clone(),
        log_partial_sums,
        finite_band,
        diverges: None,
        growth_ratio: None,
        max_radius: None,
        fit: None,
        w_coefficients: w_coefficients(src, medium).ok(),
    };
    if finite_band {
        report.diverges = Some(false);
        report.max_radius = Some(f64::INFINITY);
        // every radius works; r₃ leaves ξ_ℓ = δ^{1/2}
        report.w_coefficients = report.w_coefficients.take().and_then(|w| {
            let r3 = w.r3.max(w.source_radius);
            w.with_extension_radius(r3).ok()
        });
        return Ok(report);
    }
    let pts: Vec<(f64, f64)> = degrees
        .iter()
        .zip(&log_energies)
        .filter(|(l, e)| 2 * **l >= max_degree && **l > 0 && e.is_finite())
        .map(|(l, e)| (*l as f64, *e))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Ok(report);
    }
    let a = DMatrix::from_fn(pts.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => pts[i].0,
        _ => pts[i].0.ln(),
    });
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| CalrError::Solver { degree: max_degree, reason: e.to_string() })?;
    let beta = sol[1];
    report.fit = Some([sol[0], sol[1], sol[2]]);
    report.growth_ratio = Some(beta.exp());
    report.diverges = Some(beta > 0.0);
    let max_radius = target * (-beta / 2.0).exp();
    report.max_radius = Some(max_radius);
    report.w_coefficients = report.w_coefficients.take().map(|w| {
        let r = max_radius.max(w.source_radius);
        w.clone().with_extension_radius(r).unwrap_or(w)
    });
    Ok(report)
}

/// Coefficients of `W = −φ` on `(r₂, r₀)`, `φ` the Dirichlet solution of the
/// annulus `(r₂, r₃)` with the source, expressed in `ρ = r/r₂`.
pub fn w_coefficients(src: &ModeSpectrum, medium: &LayeredMedium) -> Result<WCoefficients> {
    let g = medium
        .geometry()
        .ok_or_else(|| CalrError::Validation("W needs a doubly complementary medium".into()))?;
    let a = g
        .annulus_profile
        .is_constant()
        .ok_or_else(|| CalrError::Validation("W is available for constant annulus coefficients only".into()))?;
    let d = medium.dimension();
    let (r2, r3, r0) = (g.r2, g.r3, src.radius());
    if !(r2 < r0 && r0 < r3) {
        return Err(CalrError::Validation("W needs the source inside the annulus".into()));
    }
    let (rho0, rho3) = (r0 / r2, r3 / r2);
    let mut entries = Vec::new();
    for (mode, gl) in src.iter() {
        // flux jump of φ in ρ: a [∂_ρ φ] = r₂ g
        let j = gl * r2 / a;
        let l = mode.degree as f64;
        let kappa = 2.0 * l + d as f64 - 2.0;
        let ln_factor = if kappa == 0.0 {
            rho0.ln() + ((rho3 / rho0).ln() / rho3.ln()).ln()
        } else {
            // ρ₀^{1-ℓ}/κ · (1 − (ρ₀/ρ₃)^κ)/(1 − ρ₃^{-κ})
            (1.0 - l) * rho0.ln() - kappa.ln() + (-(kappa * (rho0 / rho3).ln()).exp()).ln_1p()
                - (-(-kappa * rho3.ln()).exp()).ln_1p()
        };
        entries.push((mode.degree, mode.order, j.norm().ln() + ln_factor, j.arg()));
    }
    Ok(WCoefficients { dimension: d, r2, r3, source_radius: r0, extension_radius: r0, entries })
}

impl WCoefficients {
    /// Same coefficients with the extension taken out to `r`.
    ///
    /// `W` is harmonic on all of `(r₂, r)`, so only the damping changes.
    pub fn with_extension_radius(mut self, r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= self.source_radius) {
            return Err(CalrError::Validation(format!(
                "extension radius must be finite and at least the source radius {}, got {r}",
                self.source_radius
            )));
        }
        self.extension_radius = r;
        Ok(self)
    }
}

/// Critical radius estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalRadius {
    pub value: f64,
    /// Radii bracketing the estimate.
    pub bracket: (f64, f64),
    /// Closed form `√(r₂ r₃)` (identity annulus coefficient).
    pub exact: bool,
    /// Source radius of the threshold family.
    pub probe_radius: f64,
    pub warnings: Vec<String>,
}

/// Settings of the empirical critical-radius search.
#[derive(Clone, Debug)]
pub struct CriticalRadiusOptions {
    pub cutoff: usize,
    pub deltas: Vec<f64>,
    pub scan_points: usize,
    pub bisection_steps: usize,
}

impl Default for CriticalRadiusOptions {
    fn default() -> Self {
        CriticalRadiusOptions { cutoff: 200, deltas: default_delta_grid(), scan_points: 9, bisection_steps: 10 }
    }
}

pub fn critical_radius(medium: &LayeredMedium) -> Result<CriticalRadius> {
    let g = medium
        .geometry()
        .ok_or_else(|| CalrError::Validation("critical radius needs a doubly complementary medium".into()))?;
    if g.annulus_profile.is_constant() == Some(1.0) {
        let v = (g.r2 * g.r3).sqrt();
        return Ok(CriticalRadius { value: v, bracket: (v, v), exact: true, probe_radius: f64::NAN, warnings: vec![] });
    }
    critical_radius_empirical(medium, &CriticalRadiusOptions::default())
}

/// Bisection on the sign of the fitted power slope for threshold sources
/// `g_ℓ = t^ℓ` on a fixed probe circle; the estimate is `r₀ / t`.
pub fn critical_radius_empirical(medium: &LayeredMedium, opts: &CriticalRadiusOptions) -> Result<CriticalRadius> {
    let g = medium
        .geometry()
        .ok_or_else(|| CalrError::Validation("critical radius needs a doubly complementary medium".into()))?;
    let d = medium.dimension();
    let r0 = g.r2 * (g.r3 / g.r2).powf(0.3);
    let probe = ModeSpectrum::geometric(r0, d, 1.0, opts.cutoff)?;
    let solver = ModeSolver::for_spectrum(medium, &probe, opts.cutoff)?;
    let slope_at = |t: f64| -> Result<f64> {
        let src = ModeSpectrum::geometric(r0, d, t, opts.cutoff)?;
        let sweep = run_sweep_with(&solver, &src, &opts.deltas)?;
        Ok(classify(&sweep.rows)?.slope)
    };
    let (t_lo, t_hi) = (r0 / (0.98 * g.r3), 0.98);
    let n = opts.scan_points.max(3);
    let ts: Vec<f64> = (0..n).map(|k| t_lo + (t_hi - t_lo) * k as f64 / (n - 1) as f64).collect();
    let slopes = ts.iter().map(|&t| slope_at(t)).collect::<Result<Vec<f64>>>()?;
    let changes: Vec<usize> = (0..n - 1).filter(|&k| (slopes[k] > 0.0) != (slopes[k + 1] > 0.0)).collect();
    let mut warnings = Vec::new();
    let (mut a, mut b) = match (changes.first(), changes.last()) {
        (Some(&first), Some(&last)) => {
            if changes.len() > 1 {
                warnings.push(format!(
                    "slope changes sign {} times across the scan; bracket widened",
                    changes.len()
                ));
            }
            (ts[first], ts[last + 1])
        }
        _ => {
            return Err(CalrError::Insufficient(format!(
                "no sign change of the power slope for t in [{t_lo:.3}, {t_hi:.3}]"
            )))
        }
    };
    if changes.len() == 1 {
        let mut sa = slopes[changes[0]];
        for _ in 0..opts.bisection_steps {
            let m = 0.5 * (a + b);
            let sm = slope_at(m)?;
            if (sm > 0.0) == (sa > 0.0) {
                a = m;
                sa = sm;
            } else {
                b = m;
            }
        }
    }
    let t_root = 0.5 * (a + b);
    Ok(CriticalRadius { value: r0 / t_root, bracket: (r0 / b, r0 / a), exact: false, probe_radius: r0, warnings })
}

/// `r_* = √(r_e³ / r_i)` in terms of the shell radii; equals `√(r₂ r₃)` when `r₁ r₃ = r₂²`.
pub fn critical_radius_from_shell(r_e: f64, r_i: f64) -> f64 {
    (r_e.powi(3) / r_i).sqrt()
}

/// `2π`-periodic helper kept for reports: the trace measure of the unit sphere.
pub fn unit_sphere_measure(d: usize) -> f64 {
    if d == 2 {
        2.0 * PI
    } else {
        4.0 * PI
    }
}
