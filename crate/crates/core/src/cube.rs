//! Linear functions on the Boolean cube `{0,1}^m` and the restriction of a
//! linear function on `S_n` to the sub-cube selected by a square system.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linfn::LinearFunction;
use crate::perm::SquareSystem;

/// `constant + Σ coef[i] · x_i` on `{0,1}^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeLinear {
    pub constant: f64,
    pub coef: Vec<f64>,
}

impl CubeLinear {
    pub fn new(constant: f64, coef: Vec<f64>) -> Self {
        CubeLinear { constant, coef }
    }

    pub fn m(&self) -> usize {
        self.coef.len()
    }

    pub fn eval(&self, x: &[bool]) -> f64 {
        self.constant
            + self
                .coef
                .iter()
                .zip(x)
                .filter(|(_, &b)| b)
                .map(|(c, _)| c)
                .sum::<f64>()
    }

    /// `E[g]` under the uniform measure on the cube.
    pub fn mean(&self) -> f64 {
        self.constant + self.coef.iter().sum::<f64>() / 2.0
    }

    pub fn complement(&self) -> CubeLinear {
        CubeLinear {
            constant: 1.0 - self.constant,
            coef: self.coef.iter().map(|c| -c).collect(),
        }
    }
}

/// The functions `0`, `1`, `x_i` and `1 − x_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeCandidate {
    Zero,
    One,
    Var(usize),
    NegVar(usize),
}

impl CubeCandidate {
    pub fn eval(&self, x: &[bool]) -> f64 {
        match *self {
            CubeCandidate::Zero => 0.0,
            CubeCandidate::One => 1.0,
            CubeCandidate::Var(i) => f64::from(u8::from(x[i])),
            CubeCandidate::NegVar(i) => f64::from(u8::from(!x[i])),
        }
    }

    fn as_linear(&self, m: usize) -> CubeLinear {
        let mut coef = alloc::vec![0.0; m];
        let constant = match *self {
            CubeCandidate::Zero => 0.0,
            CubeCandidate::One => 1.0,
            CubeCandidate::Var(i) => {
                coef[i] = 1.0;
                0.0
            }
            CubeCandidate::NegVar(i) => {
                coef[i] = -1.0;
                1.0
            }
        };
        CubeLinear { constant, coef }
    }

    fn complement(&self) -> CubeCandidate {
        match *self {
            CubeCandidate::Zero => CubeCandidate::One,
            CubeCandidate::One => CubeCandidate::Zero,
            CubeCandidate::Var(i) => CubeCandidate::NegVar(i),
            CubeCandidate::NegVar(i) => CubeCandidate::Var(i),
        }
    }
}

impl fmt::Display for CubeCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CubeCandidate::Zero => write!(f, "0"),
            CubeCandidate::One => write!(f, "1"),
            CubeCandidate::Var(i) => write!(f, "x_{}", i + 1),
            CubeCandidate::NegVar(i) => write!(f, "1-x_{}", i + 1),
        }
    }
}

/// All `2m + 2` candidates in tie-breaking order.
pub fn candidates(m: usize) -> impl Iterator<Item = CubeCandidate> {
    [CubeCandidate::Zero, CubeCandidate::One]
        .into_iter()
        .chain((0..m).map(CubeCandidate::Var))
        .chain((0..m).map(CubeCandidate::NegVar))
}

/// Restriction of `f` to the permutations hitting every square of `sys`.
///
/// Cube variable `t` is 1 on the straight pairing `a ↦ b, a' ↦ b'` and 0 on
/// the crossed pairing `a ↦ b', a' ↦ b`.
pub fn restrict_to_square_system(f: &LinearFunction, sys: &SquareSystem) -> Result<CubeLinear> {
    if f.n() != sys.n() {
        return Err(Error::SizeMismatch {
            expected: f.n(),
            found: sys.n(),
        });
    }
    let c = f.coeff();
    let mut constant = f.constant();
    let mut coef = Vec::with_capacity(sys.dim());
    for s in sys.squares() {
        let (a, a2) = s.rows;
        let (b, b2) = s.cols;
        let crossed = c[(a, b2)] + c[(a2, b)];
        constant += crossed;
        coef.push(c[(a, b)] + c[(a2, b2)] - crossed);
    }
    if let Some(cell) = sys.singleton() {
        constant += c[cell];
    }
    Ok(CubeLinear { constant, coef })
}

/// Exact `E[(g − h)²]` over the cube: `(mean difference)² + Σ (coef difference)²/4`.
pub fn cube_sq_distance(g: &CubeLinear, h: &CubeLinear) -> f64 {
    let dm = g.mean() - h.mean();
    let dc: f64 = g
        .coef
        .iter()
        .zip(&h.coef)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    dm * dm + dc / 4.0
}

/// The candidate closest to `g` in L2, with its squared distance. Ties go to
/// the earlier candidate in the order `0, 1, x_1 … x_m, 1−x_1 … 1−x_m`.
pub fn fkn_round_cube(g: &CubeLinear) -> (CubeCandidate, f64) {
    let m = g.m();
    let mut best = (CubeCandidate::Zero, f64::INFINITY);
    for cand in candidates(m) {
        let d = cube_sq_distance(g, &cand.as_linear(m));
        if d < best.1 {
            best = (cand, d);
        }
    }
    best
}

/// Exact form of a cube function, up to `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeForm {
    Zero,
    One,
    Var(usize),
    NegVar(usize),
    None,
}

pub fn l0_form_check(g: &CubeLinear, tau: f64) -> CubeForm {
    let near = |x: f64, v: f64| libm::fabs(x - v) <= tau;
    let mut nonzero = g.coef.iter().enumerate().filter(|(_, &c)| !near(c, 0.0));
    let first = nonzero.next();
    if nonzero.next().is_some() {
        return CubeForm::None;
    }
    match first {
        None if near(g.constant, 0.0) => CubeForm::Zero,
        None if near(g.constant, 1.0) => CubeForm::One,
        Some((i, &c)) if near(g.constant, 0.0) && near(c, 1.0) => CubeForm::Var(i),
        Some((i, &c)) if near(g.constant, 1.0) && near(c, -1.0) => CubeForm::NegVar(i),
        _ => CubeForm::None,
    }
}

/// Candidate for a cube function that is `ε`-close to Boolean everywhere.
pub fn linf_round_cube(g: &CubeLinear, eps: f64) -> Result<CubeCandidate> {
    if !(0.0..0.25).contains(&eps) {
        return Err(Error::invalid("linf rounding needs 0 <= eps < 1/4"));
    }
    let flipped = libm::fabs(g.constant) > eps;
    let h = if flipped { g.complement() } else { g.clone() };
    let mut problems: Vec<String> = Vec::new();
    if libm::fabs(h.constant) > eps {
        problems.push(format!("constant {} not eps-close to 0 or 1", g.constant));
    }
    let tol = 2.0 * eps;
    let mut ones = Vec::new();
    for (i, &c) in h.coef.iter().enumerate() {
        if libm::fabs(c - 1.0) <= tol {
            ones.push(i);
        } else if libm::fabs(c) > tol {
            problems.push(format!("x_{} coefficient {} not 2eps-close to 0 or 1", i + 1, c));
        }
    }
    if ones.len() > 1 {
        let list: Vec<String> = ones.iter().map(|i| format!("x_{}", i + 1)).collect();
        problems.push(format!("several unit coefficients: {}", list.join(", ")));
    }
    if !problems.is_empty() {
        return Err(Error::premise(problems.join("; "), Vec::new()));
    }
    let cand = match ones.first() {
        Some(&i) => CubeCandidate::Var(i),
        None => CubeCandidate::Zero,
    };
    Ok(if flipped { cand.complement() } else { cand })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rng_from_seed, round_01};
    use crate::perm::{sample_square_system, Permutation, Square};
    use rand::Rng;

    fn cube_points(m: usize) -> impl Iterator<Item = Vec<bool>> {
        (0u32..(1 << m)).map(move |b| (0..m).map(|k| b >> k & 1 == 1).collect())
    }

    fn brute_sq_distance(g: &CubeLinear, h: &CubeCandidate) -> f64 {
        let m = g.m();
        let pts: Vec<_> = cube_points(m).collect();
        pts.iter()
            .map(|x| (g.eval(x) - h.eval(x)).powi(2))
            .sum::<f64>()
            / pts.len() as f64
    }

    #[test]
    fn restriction_examples() {
        let f = LinearFunction::indicator_sum(2, [(0, 0)]).unwrap();
        let id = Permutation::identity(2);
        let sys = SquareSystem::from_sequences(&id, &id).unwrap();
        let g = restrict_to_square_system(&f, &sys).unwrap();
        assert_eq!(g, CubeLinear::new(0.0, alloc::vec![1.0]));

        let c = LinearFunction::constant_fn(5, 0.3);
        let mut rng = rng_from_seed(1);
        let s5 = sample_square_system(5, &mut rng).unwrap();
        let gc = restrict_to_square_system(&c, &s5).unwrap();
        assert_eq!(gc.constant, 0.3);
        assert!(gc.coef.iter().all(|&x| x == 0.0));

        let f33 = LinearFunction::indicator_sum(3, [(2, 2)]).unwrap();
        let id3 = Permutation::identity(3);
        let s3 = SquareSystem::from_sequences(&id3, &id3).unwrap();
        assert_eq!(s3.singleton(), Some((2, 2)));
        let g3 = restrict_to_square_system(&f33, &s3).unwrap();
        assert_eq!(g3, CubeLinear::new(1.0, alloc::vec![0.0]));
    }

    #[test]
    fn restriction_agrees_with_evaluation() {
        let mut rng = rng_from_seed(31);
        for n in 2..=8 {
            for _ in 0..100 {
                let f = LinearFunction::new(
                    rng.random_range(-1.0..1.0),
                    crate::linfn::Grid::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
                )
                .unwrap();
                let sys = sample_square_system(n, &mut rng).unwrap();
                let g = restrict_to_square_system(&f, &sys).unwrap();
                for x in cube_points(sys.dim()) {
                    let p = sys.permutation(&x).unwrap();
                    assert!((g.eval(&x) - f.evaluate(&p).unwrap()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn random_system_then_cube_point_is_uniform() {
        // Chi-square over the 24 elements of S_4; 23 degrees of freedom,
        // the 0.999 quantile is about 49.7.
        let samples = 100_000;
        let mut rng = rng_from_seed(77);
        let mut counts = [0usize; 24];
        for _ in 0..samples {
            let sys = sample_square_system(4, &mut rng).unwrap();
            let x = [rng.random_bool(0.5), rng.random_bool(0.5)];
            counts[sys.permutation(&x).unwrap().lex_rank()] += 1;
        }
        let expected = samples as f64 / 24.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 49.7, "chi2 = {chi2}");
    }

    #[test]
    fn fkn_rounding_examples() {
        let x3 = CubeLinear::new(0.0, alloc::vec![0.0, 0.0, 1.0]);
        assert_eq!(fkn_round_cube(&x3), (CubeCandidate::Var(2), 0.0));
        let g = CubeLinear::new(0.05, alloc::vec![0.0, 0.9]);
        assert_eq!(fkn_round_cube(&g).0, CubeCandidate::Var(1));
        let sym = CubeLinear::new(0.0, alloc::vec![0.4, 0.4]);
        let (cand, d) = fkn_round_cube(&sym);
        let scan = candidates(2)
            .map(|c| (c, brute_sq_distance(&sym, &c)))
            .fold((CubeCandidate::Zero, f64::INFINITY), |b, x| if x.1 < b.1 - 1e-12 { x } else { b });
        assert_eq!(cand, scan.0);
        assert!((d - scan.1).abs() < 1e-12);
    }

    #[test]
    fn fkn_closed_form_matches_brute_force() {
        let mut rng = rng_from_seed(2);
        for m in 0..7 {
            for _ in 0..50 {
                let g = CubeLinear::new(
                    rng.random_range(-0.5..1.5),
                    (0..m).map(|_| rng.random_range(-1.2..1.2)).collect(),
                );
                let (_, d) = fkn_round_cube(&g);
                let min = candidates(m)
                    .map(|c| brute_sq_distance(&g, &c))
                    .fold(f64::INFINITY, f64::min);
                assert!((d - min).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boolean_cube_functions_have_zero_distance() {
        for m in 0..5 {
            for cand in candidates(m) {
                let g = cand.as_linear(m);
                assert_eq!(fkn_round_cube(&g), (cand, 0.0));
            }
        }
    }

    #[test]
    fn l0_forms() {
        assert_eq!(
            l0_form_check(&CubeLinear::new(1.0, alloc::vec![0.0, 0.0, 0.0, -1.0]), 1e-9),
            CubeForm::NegVar(3)
        );
        assert_eq!(l0_form_check(&CubeLinear::new(0.0, alloc::vec![0.5]), 1e-9), CubeForm::None);
        assert_eq!(l0_form_check(&CubeLinear::new(0.0, Vec::new()), 1e-9), CubeForm::Zero);
        assert_eq!(l0_form_check(&CubeLinear::new(1.0, alloc::vec![0.0]), 1e-9), CubeForm::One);
        assert_eq!(
            l0_form_check(&CubeLinear::new(0.0, alloc::vec![0.0, 1.0]), 1e-9),
            CubeForm::Var(1)
        );
    }

    #[test]
    fn linf_rounding_examples() {
        let g = CubeLinear::new(0.02, alloc::vec![0.99]);
        assert_eq!(linf_round_cube(&g, 0.02).unwrap(), CubeCandidate::Var(0));
        let h = CubeLinear::new(1.01, alloc::vec![0.0, -1.02]);
        assert_eq!(linf_round_cube(&h, 0.02).unwrap(), CubeCandidate::NegVar(1));
        let bad = CubeLinear::new(0.0, alloc::vec![0.5]);
        assert!(linf_round_cube(&bad, 0.02).unwrap_err().is_premise_violation());
    }

    #[test]
    fn linf_candidate_is_pointwise_rounding() {
        let mut rng = rng_from_seed(12);
        let eps = 0.02;
        for m in 1..=10 {
            for _ in 0..30 {
                let base = [
                    CubeCandidate::Zero,
                    CubeCandidate::One,
                    CubeCandidate::Var(rng.random_range(0..m)),
                    CubeCandidate::NegVar(rng.random_range(0..m)),
                ][rng.random_range(0..4)];
                // Keep the total perturbation within eps at every point.
                let mut g = base.as_linear(m);
                let per = eps / (m as f64 + 1.0);
                g.constant += rng.random_range(-per..per);
                for c in &mut g.coef {
                    *c += rng.random_range(-per..per);
                }
                let cand = linf_round_cube(&g, eps).unwrap();
                assert_eq!(cand, base);
                for x in cube_points(m) {
                    assert_eq!(cand.eval(&x), round_01(g.eval(&x)));
                }
            }
        }
    }

    #[test]
    fn square_canonical_form() {
        let s = Square::new((3, 1), (0, 2)).unwrap();
        assert_eq!(s.canonical().rows, (1, 3));
        assert!(Square::new((1, 1), (0, 2)).is_err());
    }
}
