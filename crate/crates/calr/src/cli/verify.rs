//! Built-in verification suites behind `calr verify`.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::analysis_checks::{
    density_residual, plasmon_pairs, rigidity_check_pairs, target_from_degrees, three_spheres_check, DensityFamily,
    PlasmonMedium,
};
use crate::cli::config::Config;
use crate::error::{CalrError, Result};
use crate::medium::RadialProfile;
use crate::resonance::run_sweep;
use crate::singularity::{reflect, remove_singularity, JumpNorms};
use crate::spectral::Mode;

/// Tolerance of the plasmon trace and flux identities.
pub const PAIR_TOL: f64 = 1e-11;
/// Largest admissible relative density residual at degree 64.
pub const DENSITY_TOL: f64 = 1e-3;
/// Required decrease of every jump norm from δ = 1e−3 to δ = 1e−9.
pub const JUMP_DECREASE: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    ThreeSpheres,
    Modes,
    Rigidity,
    Singularity,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::ThreeSpheres, Suite::Modes, Suite::Rigidity, Suite::Singularity];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ThreeSpheres => "three-spheres",
            Suite::Modes => "modes",
            Suite::Rigidity => "rigidity",
            Suite::Singularity => "singularity",
        }
    }
}

impl FromStr for Suite {
    type Err = CalrError;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| CalrError::Validation(format!("unknown suite '{s}' (known: three-spheres, modes, rigidity, singularity)")))
    }
}

/// Parses a comma-separated suite list; `all` selects every suite.
pub fn parse_suites(list: &str) -> Result<Vec<Suite>> {
    if list.trim() == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    let mut out: Vec<Suite> = Vec::new();
    for s in list.split(',').filter(|s| !s.trim().is_empty()) {
        let s = s.parse()?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(CalrError::Validation("empty suite list".into()));
    }
    Ok(out)
}

/// One row of the pass/fail table.
#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub suite: &'static str,
    pub check: String,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

fn line(suite: Suite, check: impl Into<String>, value: f64, bound: impl Into<String>, passed: bool) -> CheckLine {
    CheckLine { suite: suite.name(), check: check.into(), value, bound: bound.into(), passed }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<CheckLine>> {
    match suite {
        Suite::ThreeSpheres => three_spheres(seed),
        Suite::Modes => modes(seed),
        Suite::Rigidity => rigidity(seed),
        Suite::Singularity => singularity(),
    }
}

fn three_spheres(seed: u64) -> Result<Vec<CheckLine>> {
    let s = Suite::ThreeSpheres;
    let radii = [1.0, 2.0, 4.0];
    let mut worst = 0.0f64;
    for l in 1..=32i64 {
        // r^ℓ cos ℓθ
        let v = [(Mode::planar(l), Complex64::new(0.5, 0.0)), (Mode::planar(-l), Complex64::new(0.5, 0.0))];
        worst = worst.max((three_spheres_check(&v, radii, 2)?.ratio - 1.0).abs());
    }
    let mut out = vec![line(s, "equality family l=1..32, |ratio-1|", worst, "<= 1e-10", worst <= 1e-10)];
    let mut rng = StdRng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    for _ in 0..20 {
        let v = random_harmonic(&mut rng, 20);
        max_ratio = max_ratio.max(three_spheres_check(&v, radii, 2)?.ratio);
    }
    out.push(line(s, "random 20-mode harmonics, max ratio", max_ratio, "<= 1 + 1e-10", max_ratio <= 1.0 + 1e-10));
    Ok(out)
}

/// Twenty distinct planar modes with random complex coefficients.
pub fn random_harmonic<R: Rng>(rng: &mut R, n: usize) -> Vec<(Mode, Complex64)> {
    let mut orders: Vec<i64> = Vec::new();
    while orders.len() < n {
        let m = rng.gen_range(-24i64..=24);
        if !orders.contains(&m) {
            orders.push(m);
        }
    }
    orders.sort_unstable();
    orders
        .into_iter()
        .map(|m| (Mode::planar(m), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect()
}

/// The two reference shell profiles.
pub fn reference_profiles() -> Result<Vec<RadialProfile>> {
    Ok(vec![RadialProfile::constant(1.0), RadialProfile::expression("2 + sin(r)")?])
}

/// Random smooth target: coefficients decaying like `e^{-σℓ}`, σ ∈ [0.2, 0.5].
pub fn random_smooth_target<R: Rng>(rng: &mut R, lmax: usize) -> Vec<(usize, Complex64, Complex64)> {
    let sigma = rng.gen_range(0.2..0.5);
    let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    (0..=lmax)
        .map(|l| {
            let e = (-sigma * l as f64).exp();
            (l, c() * e, c() * e)
        })
        .collect()
}

fn modes(seed: u64) -> Result<Vec<CheckLine>> {
    let s = Suite::Modes;
    let mut out = Vec::new();
    let mut rng = StdRng::seed_from_u64(seed);
    for d in [2, 3] {
        for prof in reference_profiles()? {
            let label = format!("{d}D a={}", prof.label());
            let pairs = plasmon_pairs(&PlasmonMedium::new(prof, 0.5, 1.0, d)?, 64)?;
            let err = pairs.iter().skip(1).map(|p| p.trace_error.max(p.flux_error)).fold(0.0, f64::max);
            out.push(line(s, format!("{label}: trace/flux identities l=1..64"), err, "<= 1e-11", err <= PAIR_TOL));
            let mut worst = 0.0f64;
            for _ in 0..10 {
                let target = target_from_degrees(d, &random_smooth_target(&mut rng, 96));
                for fam in [DensityFamily::Difference, DensityFamily::FluxSum, DensityFamily::Joint] {
                    let r = density_residual(&pairs, &target, fam, 64)?;
                    worst = worst.max(r.residual / r.target_norm);
                }
            }
            out.push(line(s, format!("{label}: density residual m=64"), worst, "< 1e-3", worst < DENSITY_TOL));
        }
    }
    Ok(out)
}

fn rigidity(seed: u64) -> Result<Vec<CheckLine>> {
    let s = Suite::Rigidity;
    let mut out = Vec::new();
    let mut rng = StdRng::seed_from_u64(seed);
    for d in [2, 3] {
        for prof in reference_profiles()? {
            let label = format!("{d}D a={}", prof.label());
            let pairs = plasmon_pairs(&PlasmonMedium::new(prof, 0.5, 1.0, d)?, 64)?;
            let seeds: Vec<Complex64> =
                (0..pairs.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let rep = rigidity_check_pairs(&pairs, &seeds)?;
            let min_det = rep
                .rows
                .iter()
                .map(|r| r.trace_determinant.min(r.flux_determinant))
                .fold(f64::INFINITY, f64::min);
            out.push(line(s, format!("{label}: min determinant l=1..64"), min_det, "> 1e-12", rep.degenerate.is_empty()));
            out.push(line(s, format!("{label}: monopole flux"), rep.monopole_flux.abs(), "<= 1e-10", rep.c_forced_zero));
        }
    }
    Ok(out)
}

/// Jump norms of the glued field at `δ` for the reference blow-up configuration.
pub fn reference_jumps(deltas: &[f64]) -> Result<Vec<(JumpNorms, f64)>> {
    let cfg = Config::reference(0.85);
    let medium = cfg.medium()?;
    let src = cfg.spectrum()?;
    let sweep = run_sweep(&medium, &src, deltas, cfg.cutoff)?;
    sweep
        .fields
        .iter()
        .zip(deltas)
        .map(|(f, d)| {
            let f = f.as_ref().ok_or_else(|| CalrError::Solver { degree: 0, reason: format!("no field at δ={d:e}") })?;
            let part = remove_singularity(&reflect(f, &medium)?, f, &medium)?;
            Ok((part.jumps, part.glued_residual))
        })
        .collect()
}

fn singularity() -> Result<Vec<CheckLine>> {
    let s = Suite::Singularity;
    let j = reference_jumps(&[1e-3, 1e-9])?;
    let (a, b) = (&j[0].0, &j[1].0);
    let pairs = [
        ("trace jump at r2", a.trace_r2, b.trace_r2),
        ("flux jump at r2", a.flux_r2, b.flux_r2),
        ("trace jump at r3", a.trace_r3, b.trace_r3),
        ("flux jump at r3", a.flux_r3, b.flux_r3),
    ];
    let mut out: Vec<CheckLine> = pairs
        .iter()
        .map(|(name, x, y)| {
            let f = x / y;
            line(s, format!("{name}: decrease 1e-3 -> 1e-9"), f, ">= 3", f >= JUMP_DECREASE)
        })
        .collect();
    let res = j[0].1.max(j[1].1);
    out.push(line(s, "glued pieces solve their equations", res, "<= 1e-8", res <= 1e-8));
    Ok(out)
}

/// Fixed-width pass/fail table.
pub fn table(lines: &[CheckLine]) -> String {
    let mut t = String::new();
    for l in lines {
        let verdict = if l.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(t, "{verdict}  {:<14} {:<52} {:>12.4e}  {}", l.suite, l.check, l.value, l.bound);
    }
    t
}
