//! Per-degree transmission systems.
//!
//! Each layer of the medium contributes one anchored pair `(φ⁺, φ⁻)` and two
//! unknown coefficients; the layer holding the source sphere is split there.
//! The rows are, in order: regularity at the origin, then for every interface
//! continuity of `u` and of the signed flux `s_δ Φ` (jumping by
//! `r₀^{d-1} g` across the source sphere), and finally `u(R_Ω) = 0`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CalrError, Result};
use crate::medium::LayeredMedium;
use crate::spectral::basis::RadialBasis;
use crate::spectral::field::{Field, ModeField};
use crate::spectral::spectrum::ModeSpectrum;

/// Condition number above which a lossless plasmonic system is reported singular.
pub const SINGULAR_CONDITION: f64 = 1e12;
/// Relative residual accepted from the dense solve.
pub const RESIDUAL_TOL: f64 = 1e-11;

/// Sign slot of a layer: `1`, or `−1 + iδ` on plasmonic layers.
pub fn layer_sign(plasmonic: bool, delta: f64) -> Complex64 {
    if plasmonic {
        Complex64::new(-1.0, delta)
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// One solver layer: a medium layer, or half of one split by the source sphere.
#[derive(Clone, Debug)]
pub struct SolverLayer {
    pub inner: f64,
    pub outer: f64,
    pub basis: RadialBasis,
    pub plasmonic: bool,
    /// Index of the medium layer this piece belongs to.
    pub medium_layer: usize,
}

/// δ-independent layout of one degree: the layers and their fundamental pairs.
#[derive(Clone, Debug)]
pub struct DegreeLayout {
    pub degree: usize,
    pub dimension: usize,
    pub layers: Vec<SolverLayer>,
    /// Interface index `i` (between layers `i` and `i+1`) carrying the source.
    pub source_interface: Option<usize>,
    pub omega_radius: f64,
}

/// Which side of an interface a radial quantity is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inner,
    Outer,
}

impl DegreeLayout {
    /// Builds the layout; `source_radius` splits the layer containing it.
    pub fn build(medium: &LayeredMedium, source_radius: Option<f64>, degree: usize) -> Result<Self> {
        let d = medium.dimension();
        let mut pieces: Vec<(f64, f64, usize)> = Vec::new();
        for (j, l) in medium.layers().iter().enumerate() {
            match source_radius {
                Some(r0) if r0 > l.inner && r0 < l.outer => {
                    pieces.push((l.inner, r0, j));
                    pieces.push((r0, l.outer, j));
                }
                _ => pieces.push((l.inner, l.outer, j)),
            }
        }
        let mut layers = Vec::with_capacity(pieces.len());
        let mut source_interface = None;
        for (k, &(lo, hi, j)) in pieces.iter().enumerate() {
            let ml = &medium.layers()[j];
            let basis = RadialBasis::new(&ml.profile, degree, d, lo, hi)?;
            if let Some(r0) = source_radius {
                if hi == r0 && k + 1 < pieces.len() {
                    source_interface = Some(k);
                }
            }
            layers.push(SolverLayer { inner: lo, outer: hi, basis, plasmonic: ml.plasmonic, medium_layer: j });
        }
        if source_radius.is_some() && source_interface.is_none() {
            return Err(CalrError::Validation("source radius does not lie strictly inside a layer".into()));
        }
        Ok(DegreeLayout { degree, dimension: d, layers, source_interface, omega_radius: medium.omega_radius() })
    }

    /// Index of the solver layer holding `r`, resolving interfaces by `side`.
    pub fn layer_at(&self, r: f64, side: Side) -> usize {
        let n = self.layers.len();
        for (j, l) in self.layers.iter().enumerate() {
            let inside = match side {
                Side::Inner => r <= l.outer,
                Side::Outer => r < l.outer,
            };
            if inside {
                return j;
            }
        }
        n - 1
    }

    pub fn has_plasmonic(&self) -> bool {
        self.layers.iter().any(|l| l.plasmonic)
    }
}

/// Dense equilibrated system for one degree and unit source amplitude times `g`.
#[derive(Clone, Debug)]
pub struct ModeSystem {
    pub degree: usize,
    pub delta: f64,
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
    plasmonic: bool,
}

impl ModeSystem {
    pub fn assemble(layout: &DegreeLayout, delta: f64, g: Complex64) -> Self {
        let nl = layout.layers.len();
        let n = 2 * nl;
        let d = layout.dimension as i32;
        let mut a = DMatrix::<Complex64>::zeros(n, n);
        let mut b = DVector::<Complex64>::zeros(n);
        let one = Complex64::new(1.0, 0.0);
        a[(0, 1)] = one;
        let mut row = 1;
        for i in 0..nl - 1 {
            let (left, right) = (&layout.layers[i], &layout.layers[i + 1]);
            let rho = left.outer;
            let (vl, fl) = (left.basis.values(rho), left.basis.fluxes(rho));
            let (vr, fr) = (right.basis.values(rho), right.basis.fluxes(rho));
            let (sl, sr) = (layer_sign(left.plasmonic, delta), layer_sign(right.plasmonic, delta));
            for k in 0..2 {
                a[(row, 2 * i + k)] = one * vl[k];
                a[(row, 2 * i + 2 + k)] = -one * vr[k];
                a[(row + 1, 2 * i + k)] = sl * fl[k];
                a[(row + 1, 2 * i + 2 + k)] = -sr * fr[k];
            }
            if layout.source_interface == Some(i) {
                b[row + 1] = -g * rho.powi(d - 1);
            }
            row += 2;
        }
        let last = &layout.layers[nl - 1];
        let v = last.basis.values(layout.omega_radius);
        a[(row, 2 * nl - 2)] = one * v[0];
        a[(row, 2 * nl - 1)] = one * v[1];

        // power-of-two row scaling keeps the entries exact
        for r in 0..n {
            let max = (0..n).map(|c| a[(r, c)].norm()).fold(0.0, f64::max);
            if max > 0.0 {
                let scale = 2f64.powi(max.log2().round() as i32);
                for c in 0..n {
                    a[(r, c)] /= scale;
                }
                b[r] /= scale;
            }
        }
        ModeSystem { degree: layout.degree, delta, matrix: a, rhs: b, plasmonic: layout.has_plasmonic() }
    }

    /// 2-norm condition number of the equilibrated matrix.
    pub fn condition_number(&self) -> f64 {
        let sv = self.matrix.clone().singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn solve(&self) -> Result<DVector<Complex64>> {
        if self.delta == 0.0 && self.plasmonic {
            let condition = self.condition_number();
            if !(condition <= SINGULAR_CONDITION) {
                return Err(CalrError::ResonanceSingular { degree: self.degree, condition });
            }
        }
        let lu = self.matrix.clone().lu();
        let singular = || CalrError::Solver { degree: self.degree, reason: "singular LU factor".into() };
        let mut x = lu.solve(&self.rhs).ok_or_else(singular)?;
        // iterative refinement against a residual accumulated in double-double
        for _ in 0..REFINEMENT_STEPS {
            let dx = lu.solve(&accurate_residual(&self.matrix, &x, &self.rhs)).ok_or_else(singular)?;
            x += &dx;
            if dx.norm() <= f64::EPSILON * x.norm() {
                break;
            }
        }
        // the first row reads d₀ = 0; keep the singular member out exactly
        x[1] = Complex64::new(0.0, 0.0);
        let res = (&self.matrix * &x - &self.rhs).norm();
        let scale = self.matrix.norm() * x.norm() + self.rhs.norm();
        if !(res <= RESIDUAL_TOL * scale) {
            return Err(CalrError::Solver {
                degree: self.degree,
                reason: format!("relative residual {:.3e} exceeds {RESIDUAL_TOL:.0e}", res / scale.max(f64::MIN_POSITIVE)),
            });
        }
        Ok(x)
    }
}

const REFINEMENT_STEPS: usize = 4;

/// `a·b` as an unevaluated sum `p + e`.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `a + b` as an unevaluated sum `s + e`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// Compensated real sum of the given terms.
fn sum2(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for t in terms {
        let (s1, e) = two_sum(s, t);
        s = s1;
        c += e;
    }
    s + c
}

/// `b − A x` with twice-working-precision accumulation.
fn accurate_residual(a: &DMatrix<Complex64>, x: &DVector<Complex64>, b: &DVector<Complex64>) -> DVector<Complex64> {
    let n = b.len();
    DVector::from_iterator(
        n,
        (0..n).map(|r| {
            let mut re = vec![b[r].re];
            let mut im = vec![b[r].im];
            let push = |out: &mut Vec<f64>, p: f64, q: f64, sgn: f64| {
                let (h, l) = two_prod(p, q);
                out.push(sgn * h);
                out.push(sgn * l);
            };
            for c in 0..x.len() {
                let (m, v) = (a[(r, c)], x[c]);
                push(&mut re, m.re, v.re, -1.0);
                push(&mut re, m.im, v.im, 1.0);
                push(&mut im, m.re, v.im, -1.0);
                push(&mut im, m.im, v.re, -1.0);
            }
            Complex64::new(sum2(re.into_iter()), sum2(im.into_iter()))
        }),
    )
}

/// Assembles the system for one degree of `medium` with a source of amplitude `g` on `r0`.
pub fn assemble_mode_system(medium: &LayeredMedium, r0: f64, degree: usize, delta: f64, g: Complex64) -> Result<ModeSystem> {
    let layout = DegreeLayout::build(medium, Some(r0), degree)?;
    Ok(ModeSystem::assemble(&layout, delta, g))
}

/// Reusable solver: layouts (and thus fundamental pairs) are built once per
/// degree and shared by every δ of a sweep.
#[derive(Clone, Debug)]
pub struct ModeSolver {
    medium: LayeredMedium,
    source_radius: f64,
    layouts: BTreeMap<usize, Arc<DegreeLayout>>,
}

impl ModeSolver {
    pub fn new<I: IntoIterator<Item = usize>>(medium: &LayeredMedium, source_radius: f64, degrees: I) -> Result<Self> {
        check_source_radius(medium, source_radius)?;
        let mut list: Vec<usize> = degrees.into_iter().collect();
        list.sort_unstable();
        list.dedup();
        let built: Vec<Result<(usize, Arc<DegreeLayout>)>> = list
            .par_iter()
            .map(|&l| DegreeLayout::build(medium, Some(source_radius), l).map(|x| (l, Arc::new(x))))
            .collect();
        let mut layouts = BTreeMap::new();
        for b in built {
            let (l, x) = b?;
            layouts.insert(l, x);
        }
        Ok(ModeSolver { medium: medium.clone(), source_radius, layouts })
    }

    /// Solver for every degree of `src` not exceeding `cutoff`.
    pub fn for_spectrum(medium: &LayeredMedium, src: &ModeSpectrum, cutoff: usize) -> Result<Self> {
        src.check_against(medium)?;
        Self::new(medium, src.radius(), src.degrees().into_iter().filter(|&l| l <= cutoff))
    }

    pub fn medium(&self) -> &LayeredMedium {
        &self.medium
    }

    pub fn source_radius(&self) -> f64 {
        self.source_radius
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.layouts.keys().copied().collect()
    }

    pub fn layout(&self, degree: usize) -> Option<&Arc<DegreeLayout>> {
        self.layouts.get(&degree)
    }

    /// Layer coefficients of the radial solution for unit source amplitude.
    pub fn solve_degree(&self, degree: usize, delta: f64) -> Result<Vec<[Complex64; 2]>> {
        let layout = self
            .layouts
            .get(&degree)
            .ok_or_else(|| CalrError::Validation(format!("degree {degree} was not prepared")))?;
        let x = ModeSystem::assemble(layout, delta, Complex64::new(1.0, 0.0)).solve()?;
        Ok((0..layout.layers.len()).map(|j| [x[2 * j], x[2 * j + 1]]).collect())
    }

    /// Solves every mode of `src` whose degree was prepared. Modes above the
    /// prepared degrees are dropped and counted in the returned field.
    pub fn solve(&self, src: &ModeSpectrum, delta: f64) -> Result<Field> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(CalrError::Validation(format!("loss δ must lie in (0, 1], got {delta}")));
        }
        if (src.radius() - self.source_radius).abs() > 0.0 || src.dimension() != self.medium.dimension() {
            return Err(CalrError::Validation("source does not match the prepared solver".into()));
        }
        let degrees: Vec<usize> = src.degrees().into_iter().filter(|l| self.layouts.contains_key(l)).collect();
        let unit: Vec<Result<(usize, Vec<[Complex64; 2]>)>> = degrees
            .par_iter()
            .map(|&l| self.solve_degree(l, delta).map(|c| (l, c)))
            .collect();
        let mut per_degree = BTreeMap::new();
        for u in unit {
            let (l, c) = u?;
            per_degree.insert(l, c);
        }
        let mut modes = Vec::new();
        let mut dropped = 0;
        for (mode, g) in src.iter() {
            match per_degree.get(&mode.degree) {
                Some(c) => {
                    let coeffs = c.iter().map(|p| [p[0] * g, p[1] * g]).collect();
                    modes.push(ModeField::new(mode, self.layouts[&mode.degree].clone(), coeffs, delta));
                }
                None => dropped += 1,
            }
        }
        let cutoff = self.layouts.keys().next_back().copied().unwrap_or(0);
        Ok(Field::from_modes(self.medium.dimension(), delta, self.medium.omega_radius(), modes, cutoff, dropped))
    }
}

pub(crate) fn check_source_radius(medium: &LayeredMedium, r0: f64) -> Result<()> {
    if !(r0 > 0.0 && r0 < medium.omega_radius()) {
        return Err(CalrError::Validation(format!("source radius {r0} outside (0, R_Ω)")));
    }
    for rho in medium.interfaces() {
        if (rho - r0).abs() <= 1e-12 * rho {
            return Err(CalrError::Validation(format!("source radius {r0} sits on the interface {rho}")));
        }
    }
    Ok(())
}

/// Solves the medium for `src` at loss `delta`, keeping degrees up to `cutoff`.
pub fn solve_field(medium: &LayeredMedium, src: &ModeSpectrum, delta: f64, cutoff: usize) -> Result<Field> {
    ModeSolver::for_spectrum(medium, src, cutoff)?.solve(src, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{build_doubly_complementary, RadialProfile};

    #[test]
    fn inner_ball_carries_no_singular_member() {
        let m = mn();
        let solver = ModeSolver::new(&m, 1.5, [0, 3, 12]).unwrap();
        for l in [0, 3, 12] {
            for delta in [1e-2, 1e-7] {
                assert_eq!(solver.solve_degree(l, delta).unwrap()[0][1], Complex64::new(0.0, 0.0));
            }
        }
    }

    fn mn() -> LayeredMedium {
        build_doubly_complementary(&RadialProfile::constant(1.0), 1.0, 4.0, 8.0, 2).unwrap()
    }

    #[test]
    fn layout_splits_the_source_layer() {
        let l = DegreeLayout::build(&mn(), Some(1.5), 3).unwrap();
        assert_eq!(l.layers.len(), 6);
        assert_eq!(l.source_interface, Some(3));
        assert_eq!(l.layers[3].outer, 1.5);
        assert_eq!(l.layers[4].medium_layer, 3);
    }

    #[test]
    fn source_on_interface_is_rejected() {
        let src = ModeSpectrum::geometric(4.0, 2, 0.5, 4).unwrap();
        assert!(solve_field(&mn(), &src, 1e-3, 4).is_err());
    }

    #[test]
    fn zero_loss_is_rejected_by_solve_field() {
        let src = ModeSpectrum::geometric(1.5, 2, 0.5, 4).unwrap();
        assert!(matches!(solve_field(&mn(), &src, 0.0, 4), Err(CalrError::Validation(_))));
    }

    #[test]
    fn lossless_plasmonic_system_is_flagged() {
        // With anchored pairs the condition number grows like (r2/r1)^ℓ = 4^ℓ.
        let sys = assemble_mode_system(&mn(), 1.5, 24, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(sys.solve(), Err(CalrError::ResonanceSingular { degree: 24, .. })));
        let c8 = assemble_mode_system(&mn(), 1.5, 8, 0.0, Complex64::new(1.0, 0.0)).unwrap().condition_number();
        let c12 = assemble_mode_system(&mn(), 1.5, 12, 0.0, Complex64::new(1.0, 0.0)).unwrap().condition_number();
        assert!((c12 / c8).log(4.0) > 3.5 && (c12 / c8).log(4.0) < 4.5);
        let mild = assemble_mode_system(&mn(), 1.5, 1, 0.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!(mild.condition_number() < SINGULAR_CONDITION);
        let lossy = assemble_mode_system(&mn(), 1.5, 12, 1e-3, Complex64::new(1.0, 0.0)).unwrap();
        assert!(lossy.solve().is_ok());
    }
}
