//! Eigenvalues of generator matrices and their asymptotic estimates.
//!
//! Two numerical routes are provided. [`numerical_eigenvalues`] runs a dense
//! real Schur decomposition; it is accurate to about `1e-16 * |L|`, which is
//! useless for eigenvalues of size `exp(-Delta/eps)` at small `eps`.
//! [`accurate_eigenvalues`] instead forms the characteristic polynomial from
//! principal minors of `-L`, each computed by elimination that only adds
//! nonnegative quantities (no cancellation), keeps everything in log space,
//! and finds the roots scale by scale with simultaneous Aberth iteration.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::alg1::Alg1Report;
use crate::generator::{check_epsilon, GeneratorError, GeneratorMatrix};
use crate::graph::ChainGraph;
use crate::weight::Weight;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("Schur iteration did not converge within {max_iter} iterations (n = {n})")]
    NoConvergence { n: usize, max_iter: usize },
    #[error("root iteration did not converge: largest relative step {residual:e} after {iterations} iterations")]
    RootsNoConvergence { iterations: usize, residual: f64 },
    #[error("{n} states is too many for principal-minor expansion (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    #[error("the run detected symmetry; eigenvalue estimates require unique min-arcs")]
    Symmetry,
}

/// Natural log of zero.
const LN_ZERO: f64 = f64::NEG_INFINITY;

fn ln_add(a: f64, b: f64) -> f64 {
    if a == LN_ZERO {
        return b;
    }
    if b == LN_ZERO {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// All eigenvalues of `L`, sorted by decreasing real part (the zero
/// eigenvalue first).
pub fn numerical_eigenvalues(l: &GeneratorMatrix) -> Result<Vec<Complex64>, SpectralError> {
    let n = l.matrix.nrows();
    let max_iter = 1000 * n.max(1);
    let schur = nalgebra::linalg::Schur::try_new(l.matrix.clone(), f64::EPSILON, max_iter)
        .ok_or(SpectralError::NoConvergence { n, max_iter })?;
    let mut ev: Vec<Complex64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|c| Complex64::new(c.re, c.im))
        .collect();
    sort_eigenvalues(&mut ev);
    Ok(ev)
}

fn sort_eigenvalues(ev: &mut [Complex64]) {
    ev.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Log-rate matrix: `ln L_ij` off the diagonal, `-inf` where there is no arc.
pub fn log_rates(g: &ChainGraph, eps: f64) -> Result<Vec<Vec<f64>>, GeneratorError> {
    check_epsilon(eps)?;
    let n = g.n();
    let mut r = vec![vec![LN_ZERO; n]; n];
    for a in g.arcs() {
        r[a.tail][a.head] = g.kappa(a).ln() - a.weight.to_f64() / eps;
    }
    Ok(r)
}

/// `ln det(-L_II)` for the principal submatrix on `set`, by elimination that
/// tracks the rate leaving the subset separately from internal rates.
fn ln_principal_minor(lr: &[Vec<f64>], set: &[usize]) -> f64 {
    let n = lr.len();
    let q = set.len();
    let mut inside = vec![false; n];
    for &i in set {
        inside[i] = true;
    }
    // internal rates and the rate leaving the subset, in log space
    let mut a: Vec<Vec<f64>> = set
        .iter()
        .map(|&i| set.iter().map(|&j| if i == j { LN_ZERO } else { lr[i][j] }).collect())
        .collect();
    let mut leak: Vec<f64> = set
        .iter()
        .map(|&i| {
            (0..n)
                .filter(|&j| j != i && !inside[j])
                .fold(LN_ZERO, |s, j| ln_add(s, lr[i][j]))
        })
        .collect();
    let mut alive = vec![true; q];
    let mut ln_det = 0.0;
    for k in 0..q {
        // pivot: everything leaving k among the remaining states
        let mut piv = leak[k];
        for j in 0..q {
            if alive[j] && j != k {
                piv = ln_add(piv, a[k][j]);
            }
        }
        ln_det += piv;
        if piv == LN_ZERO {
            return LN_ZERO;
        }
        alive[k] = false;
        for i in 0..q {
            if !alive[i] || a[i][k] == LN_ZERO {
                continue;
            }
            let f = a[i][k] - piv;
            leak[i] = ln_add(leak[i], f + leak[k]);
            for j in 0..q {
                if alive[j] && j != i {
                    a[i][j] = ln_add(a[i][j], f + a[k][j]);
                }
            }
        }
    }
    ln_det
}

pub const MINOR_EXPANSION_LIMIT: usize = 16;

/// `ln C_l`, `l = 0..=n`, for `det(tI - L) = sum_l C_l t^(n-l)`; `C_0 = 1`.
/// `C_l` is the sum of all principal minors of `-L` of order `l`.
pub fn ln_charpoly_coefficients(lr: &[Vec<f64>]) -> Result<Vec<f64>, SpectralError> {
    let n = lr.len();
    if n > MINOR_EXPANSION_LIMIT {
        return Err(SpectralError::TooLarge {
            n,
            limit: MINOR_EXPANSION_LIMIT,
        });
    }
    let mut c = vec![LN_ZERO; n + 1];
    c[0] = 0.0;
    let mut set = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        set.clear();
        set.extend((0..n).filter(|&i| mask & (1 << i) != 0));
        c[set.len()] = ln_add(c[set.len()], ln_principal_minor(lr, &set));
    }
    Ok(c)
}

/// A complex number `exp(scale) * unit`, for roots spanning many orders of
/// magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledRoot {
    pub scale: f64,
    pub unit: (f64, f64),
}

impl ScaledRoot {
    fn unit(&self) -> Complex64 {
        Complex64::new(self.unit.0, self.unit.1)
    }

    /// The value itself; may underflow to zero.
    pub fn value(&self) -> Complex64 {
        self.unit() * self.scale.exp()
    }

    /// `ln(-Re z)`, finite whenever the real part is negative.
    pub fn ln_neg_re(&self) -> f64 {
        self.scale + (-self.unit.0).ln()
    }

    /// Imaginary part relative to the real part.
    pub fn im_over_re(&self) -> f64 {
        self.unit.1 / self.unit.0
    }
}

/// Evaluates `p/p'` for `p(t) = sum_j c_j t^j` (`ln_c[j] = ln c_j`, all real
/// positive) at `t = exp(scale) * s`, returned in units of `exp(scale)`.
fn newton_ratio(ln_c: &[f64], scale: f64, s: Complex64) -> Complex64 {
    let ln_abs = s.norm().ln();
    let arg = s.arg();
    let mut terms_p = Vec::with_capacity(ln_c.len());
    let mut terms_d = Vec::with_capacity(ln_c.len());
    for (j, &lc) in ln_c.iter().enumerate() {
        if lc == LN_ZERO {
            continue;
        }
        let jf = j as f64;
        terms_p.push((lc + jf * (scale + ln_abs), jf * arg));
        if j > 0 {
            terms_d.push((lc + jf.ln() + (jf - 1.0) * (scale + ln_abs), (jf - 1.0) * arg));
        }
    }
    let sum = |terms: &[(f64, f64)]| -> (f64, Complex64) {
        let m = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        let s: Complex64 = terms
            .iter()
            .map(|&(lm, ph)| Complex64::from_polar((lm - m).exp(), ph))
            .sum();
        (m, s)
    };
    let (mp, sp) = sum(&terms_p);
    let (md, sd) = sum(&terms_d);
    sp / sd * (mp - md - scale).exp()
}

/// Roots of `p(t) = sum_j c_j t^j` with `c_j >= 0`, `c_deg > 0`, `c_0 > 0`.
fn scaled_roots(ln_c: &[f64]) -> Result<Vec<ScaledRoot>, SpectralError> {
    let deg = ln_c.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    // upper convex hull of (j, ln c_j): each edge gives a cluster of roots
    // whose log-magnitude is minus the edge slope
    let pts: Vec<(f64, f64)> = ln_c
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > LN_ZERO)
        .map(|(j, &v)| (j as f64, v))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut scales = Vec::with_capacity(deg);
    let mut units = Vec::with_capacity(deg);
    for w in hull.windows(2) {
        let d = (w[1].0 - w[0].0) as usize;
        let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        for r in 0..d {
            scales.push(-slope);
            let ang = std::f64::consts::PI * (1.0 - (r as f64 + 0.5) / (d as f64 * 4.0) - 0.1 / (d as f64));
            units.push(Complex64::from_polar(1.0, ang + 0.4 * r as f64));
        }
    }
    let max_iter = 500;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        residual = 0.0;
        for k in 0..deg {
            let n_k = newton_ratio(ln_c, scales[k], units[k]);
            let mut s_sum = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j == k {
                    continue;
                }
                let ratio = (scales[j] - scales[k]).exp();
                let diff = units[k] - units[j] * ratio;
                if diff.norm() > 0.0 && diff.norm().is_finite() {
                    s_sum += diff.inv();
                }
            }
            let step = n_k / (Complex64::new(1.0, 0.0) - n_k * s_sum);
            if step.is_finite() {
                units[k] -= step;
                residual = f64::max(residual, step.norm() / units[k].norm().max(f64::MIN_POSITIVE));
            }
        }
        if residual < 1e-14 {
            break;
        }
    }
    if !(residual < 1e-9) {
        return Err(SpectralError::RootsNoConvergence {
            iterations: max_iter,
            residual,
        });
    }
    Ok(scales
        .into_iter()
        .zip(units)
        .map(|(scale, u)| {
            // renormalise so the unit part has modulus one
            let r = u.norm();
            let u = u / r;
            ScaledRoot {
                scale: scale + r.ln(),
                unit: (u.re, u.im),
            }
        })
        .collect())
}

/// Nonzero eigenvalues of `L` computed through the characteristic
/// polynomial, ordered by increasing `-Re z` (so entry `m-1` is `z_m`).
pub fn accurate_eigenvalues(g: &ChainGraph, eps: f64) -> Result<Vec<ScaledRoot>, SpectralError> {
    let lr = log_rates(g, eps)?;
    let c = ln_charpoly_coefficients(&lr)?;
    let n = g.n();
    // det(tI - L) / t = sum_{l=0}^{n-1} C_l t^(n-1-l); ascending powers:
    let asc: Vec<f64> = (0..n).map(|j| c[n - 1 - j]).collect();
    let mut roots = scaled_roots(&asc)?;
    // roots of the polynomial in t are eigenvalues of L
    roots.sort_by(|a, b| {
        a.ln_neg_re()
            .partial_cmp(&b.ln_neg_re())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(roots)
}

/// Roots of `det(tI - L)` from the coefficients in plain double precision,
/// including the zero eigenvalue, for moderate `eps`.
pub fn charpoly_coefficients(g: &ChainGraph, eps: f64) -> Result<Vec<f64>, SpectralError> {
    let lr = log_rates(g, eps)?;
    Ok(ln_charpoly_coefficients(&lr)?.into_iter().map(f64::exp).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenEstimate {
    pub m: usize,
    pub delta: Weight,
    pub alpha: f64,
    /// Prefactors were absent: `alpha = 1` is only of order one.
    pub alpha_order_only: bool,
    /// `ln(alpha * exp(-delta / eps))`; use when the estimate underflows.
    pub ln_lambda: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub epsilon: f64,
    pub estimates: Vec<EigenEstimate>,
    /// Accurate nonzero eigenvalues of `L`, when requested.
    pub numerical: Option<Vec<ScaledRoot>>,
}

impl SpectralEstimate {
    /// `lambda_num / lambda_est` per `m`, computed in log space.
    pub fn ratios(&self) -> Option<Vec<(usize, f64)>> {
        let num = self.numerical.as_ref()?;
        Some(
            self.estimates
                .iter()
                .filter_map(|e| num.get(e.m - 1).map(|z| (e.m, (z.ln_neg_re() - e.ln_lambda).exp())))
                .collect(),
        )
    }
}

/// `lambda_m ~ alpha_m exp(-Delta_m / eps)` for every index reached by the run.
pub fn eigenvalue_estimates(report: &Alg1Report, eps: f64) -> Result<SpectralEstimate, SpectralError> {
    check_epsilon(eps)?;
    if report.symmetry_detected() {
        return Err(SpectralError::Symmetry);
    }
    let mut estimates: Vec<EigenEstimate> = report
        .eigen
        .iter()
        .map(|e| {
            let ln_lambda = e.alpha.ln() - e.delta.to_f64() / eps;
            EigenEstimate {
                m: e.m,
                delta: e.delta,
                alpha: e.alpha,
                alpha_order_only: report.order_only,
                ln_lambda,
                lambda: ln_lambda.exp(),
            }
        })
        .collect();
    estimates.sort_by_key(|e| e.m);
    Ok(SpectralEstimate {
        epsilon: eps,
        estimates,
        numerical: None,
    })
}

/// Estimates together with accurate eigenvalues of `L(eps)`.
pub fn eigenvalue_estimates_with_numerics(
    g: &ChainGraph,
    report: &Alg1Report,
    eps: f64,
) -> Result<SpectralEstimate, SpectralError> {
    let mut s = eigenvalue_estimates(report, eps)?;
    s.numerical = Some(accurate_eigenvalues(g, eps)?);
    Ok(s)
}

/// Plain-double characteristic polynomial coefficients from eigenvalues,
/// `det(tI - L) = prod (t - z)`; used to cross-check the minor expansion.
pub fn coefficients_from_eigenvalues(ev: &[Complex64]) -> Vec<f64> {
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for z in ev {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * z;
        }
        poly = next;
    }
    poly.into_iter().map(|c| c.re).collect()
}

/// Dense matrix helper used by tests and the oracle: `-L` restricted to `set`.
pub fn principal_submatrix(l: &DMatrix<f64>, set: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(set.len(), set.len(), |i, j| -l[(set[i], set[j])])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientCheck {
    pub l: usize,
    /// `C_l` from the principal-minor expansion of `det(tI - L)`.
    pub from_minors: f64,
    /// Sum over W-graphs with `n - l` sinks of the product of their rates.
    pub from_wgraphs: f64,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharpolyCheck {
    pub epsilon: f64,
    pub coefficients: Vec<CoefficientCheck>,
    pub max_relative_residual: f64,
    /// `det(-L)` by plain LU, which must vanish.
    pub constant_term: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CharpolyError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    WGraph(#[from] crate::wgraph::WGraphError),
}

/// Compares every coefficient of the characteristic polynomial with the
/// corresponding sum over W-graphs.
pub fn charpoly_identity_check(g: &ChainGraph, eps: f64, cap: usize) -> Result<CharpolyCheck, CharpolyError> {
    let lr = log_rates(g, eps).map_err(SpectralError::from)?;
    let c = ln_charpoly_coefficients(&lr)?;
    let n = g.n();
    let mut coefficients = Vec::with_capacity(n.saturating_sub(1));
    let mut max_rel: f64 = 0.0;
    for l in 1..n {
        let mut acc = LN_ZERO;
        crate::wgraph::enumerate_wgraphs(g, n - l, cap, |w| {
            let ln_prod: f64 = w.arcs().iter().map(|&(i, j)| lr[i][j]).sum();
            acc = ln_add(acc, ln_prod);
        })?;
        let (a, b) = (c[l].exp(), acc.exp());
        // compare in log space so tiny coefficients are judged relatively
        let rel = if c[l] == LN_ZERO && acc == LN_ZERO {
            0.0
        } else {
            (c[l] - acc).abs().exp_m1()
        };
        max_rel = max_rel.max(rel);
        coefficients.push(CoefficientCheck {
            l,
            from_minors: a,
            from_wgraphs: b,
            relative_residual: rel,
        });
    }
    let l = crate::generator::generator_matrix(g, eps).map_err(SpectralError::from)?;
    Ok(CharpolyCheck {
        epsilon: eps,
        coefficients,
        max_relative_residual: max_rel,
        constant_term: (-l.matrix).determinant(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub m: usize,
    /// `eps * ln(lambda_num) + Delta_m`.
    pub exponent_error: f64,
    /// `lambda_num / (alpha_m exp(-Delta_m / eps))`.
    pub ratio: f64,
}

/// Numerical eigenvalues against the estimates along a schedule of `eps`.
pub fn convergence_table(
    g: &ChainGraph,
    report: &Alg1Report,
    schedule: &[f64],
) -> Result<Vec<ConvergenceRow>, SpectralError> {
    let mut rows = Vec::new();
    for &eps in schedule {
        let est = eigenvalue_estimates_with_numerics(g, report, eps)?;
        let num = est.numerical.as_ref().expect("requested");
        for e in &est.estimates {
            let Some(z) = num.get(e.m - 1) else { continue };
            rows.push(ConvergenceRow {
                epsilon: eps,
                m: e.m,
                exponent_error: eps * z.ln_neg_re() + e.delta.to_f64(),
                ratio: (z.ln_neg_re() - e.ln_lambda).exp(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::generator_matrix;

    fn two_state() -> ChainGraph {
        ChainGraph::from_triples(&[("1", "2", "1"), ("2", "1", "2")]).unwrap()
    }

    #[test]
    fn two_state_closed_form() {
        let g = two_state();
        let l = generator_matrix(&g, 0.5).unwrap();
        let ev = numerical_eigenvalues(&l).unwrap();
        let sum = (-2f64).exp() + (-4f64).exp();
        assert!(ev[0].norm() < 1e-15);
        assert!((ev[1].re + sum).abs() < 1e-15);
        let acc = accurate_eigenvalues(&g, 0.1).unwrap();
        let exact = (-10f64).exp() + (-20f64).exp();
        assert!((acc[0].value().re + exact).abs() / exact < 1e-13);
    }

    #[test]
    fn identity_on_two_states() {
        let g = two_state();
        let c = charpoly_identity_check(&g, 1.0, 9).unwrap();
        assert_eq!(c.coefficients.len(), 1);
        let want = (-1f64).exp() + (-2f64).exp();
        assert!((c.coefficients[0].from_minors - want).abs() < 1e-15);
        assert!((c.coefficients[0].from_wgraphs - want).abs() < 1e-15);
        assert!(c.constant_term.abs() < 1e-12);
    }

    #[test]
    fn minors_match_plain_determinants_at_moderate_eps() {
        let g = ChainGraph::from_triples(&[
            ("1", "2", "1"),
            ("2", "3", "1.5"),
            ("3", "1", "0.7"),
            ("2", "1", "2"),
            ("3", "4", "1.2"),
            ("4", "2", "0.9"),
        ])
        .unwrap();
        let l = generator_matrix(&g, 1.0).unwrap().matrix;
        let lr = log_rates(&g, 1.0).unwrap();
        for mask in 1u32..16 {
            let set: Vec<usize> = (0..4).filter(|&i| mask & (1 << i) != 0).collect();
            let plain = principal_submatrix(&l, &set).determinant();
            let ours = ln_principal_minor(&lr, &set).exp();
            if mask == 15 {
                assert_eq!(ours, 0.0);
                assert!(plain.abs() < 1e-14);
            } else {
                assert!((plain - ours).abs() <= 1e-12 * ours, "{set:?}: {plain} vs {ours}");
            }
        }
    }

    #[test]
    fn accurate_route_agrees_with_schur_at_moderate_eps() {
        let g = ChainGraph::from_triples(&[
            ("1", "2", "0.4"),
            ("2", "3", "0.8"),
            ("3", "1", "0.2"),
            ("3", "4", "1.1"),
            ("4", "5", "0.6"),
            ("5", "4", "0.9"),
            ("5", "1", "1.3"),
            ("2", "5", "1.7"),
        ])
        .unwrap();
        let l = generator_matrix(&g, 0.3).unwrap();
        let schur = numerical_eigenvalues(&l).unwrap();
        let acc = accurate_eigenvalues(&g, 0.3).unwrap();
        let scale = l.matrix.norm();
        for (z, r) in schur[1..].iter().zip(&acc) {
            let v = r.value();
            // conjugate pairs may come out in either order
            let d = (z - v).norm().min((z - v.conj()).norm());
            assert!(d <= 1e-8 * z.norm().max(1e-12 * scale), "{z} vs {v}");
        }
    }
}
