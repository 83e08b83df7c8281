//! Origin-centered minimum-volume enclosing ellipsoids.
//!
//! For a centrally symmetric point set the MVEE is centered at the origin and
//! is the solution of the D-optimal design problem
//! `max log det Σ u_k f_k f_kᵀ` over the simplex. We solve it with the
//! Khachiyan / Todd–Yildirim iteration (Frank–Wolfe with away steps) using
//! rank-one updates of the inverse moment matrix.
//!
//! Samples are first rotated onto the principal axes of their second moment
//! and each axis is scaled by its extent. Axes whose extent is negligible are
//! treated as degenerate and clamped to a tiny semi-axis instead of entering
//! the iteration.

use nalgebra::{DMatrix, DVector, Matrix6, SymmetricEigen, Vector6};
use serde::{Deserialize, Serialize};

use super::{LimitSurfaceError, Wrench};

/// Containment tolerance of the iteration.
pub const FIT_TOLERANCE: f64 = 1e-4;
/// Iteration budget before giving up.
pub const MAX_ITERATIONS: usize = 10_000;
/// Eigenvalue of `A⁻¹` (squared semi-axis) of a degenerate direction relative
/// to the largest one.
pub const DEGENERATE_AXIS_RATIO: f64 = 1e-8;
/// Axes whose sample extent is below this fraction of the largest extent are degenerate.
const DEGENERATE_EXTENT_RATIO: f64 = 1e-10;
const REFRESH_EVERY: usize = 64;

/// Ellipsoid `{ f : fᵀ A f ≤ 1 }` with `A = Wᵀ W`.
///
/// The factor is kept instead of `A` itself because clamped degenerate axes
/// leave `A` badly conditioned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    factor: Matrix6<f64>,
    factor_inverse: Matrix6<f64>,
    /// Number of non-degenerate directions; rows `rank..6` of the factor are clamped axes.
    rank: usize,
    iterations: usize,
}

impl Ellipsoid {
    /// Ellipsoid from a positive definite matrix.
    pub fn from_matrix(a: &Matrix6<f64>) -> Option<Self> {
        let sym = (a + a.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return None;
        }
        let sqrt = Matrix6::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let inv_sqrt = Matrix6::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
        let u = eig.eigenvectors;
        Some(Ellipsoid {
            factor: sqrt * u.transpose(),
            factor_inverse: u * inv_sqrt,
            rank: 6,
            iterations: 0,
        })
    }

    /// The matrix `A`.
    pub fn matrix(&self) -> Matrix6<f64> {
        self.factor.transpose() * self.factor
    }

    /// `W` with `A = WᵀW`.
    pub fn factor(&self) -> &Matrix6<f64> {
        &self.factor
    }

    /// `W⁻¹`; maps the unit sphere onto the ellipsoid surface.
    pub fn factor_inverse(&self) -> &Matrix6<f64> {
        &self.factor_inverse
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `fᵀ A f`, evaluated as `|W f|²`.
    pub fn quad_form(&self, f: &Vector6<f64>) -> f64 {
        (self.factor * f).norm_squared()
    }

    /// Point on the surface for unit-sphere coordinate `q`: `W⁻¹ q / |q|`.
    pub fn surface_point(&self, q: &Vector6<f64>) -> Vector6<f64> {
        self.factor_inverse * (q / q.norm())
    }

    /// Outward normal `A p` at the surface point `p = W⁻¹ q/|q|`, computed as `Wᵀ q/|q|`.
    pub fn surface_normal(&self, q: &Vector6<f64>) -> Vector6<f64> {
        self.factor.transpose() * (q / q.norm())
    }

    /// Semi-axis lengths, largest first (from the singular values of `W⁻¹`).
    pub fn semi_axes(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .factor_inverse
            .singular_values()
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Rescales the ellipsoid by `s` (semi-axes multiply by `s`).
    pub(crate) fn scale(&mut self, s: f64) {
        self.factor /= s;
        self.factor_inverse *= s;
    }
}

/// Minimum-volume origin-centered ellipsoid containing every `w` and `-w`.
pub fn fit_ellipsoid(wrenches: &[Wrench]) -> Result<Ellipsoid, LimitSurfaceError> {
    fit_ellipsoid_with(wrenches, FIT_TOLERANCE, MAX_ITERATIONS)
}

pub fn fit_ellipsoid_with(
    wrenches: &[Wrench],
    tolerance: f64,
    max_iterations: usize,
) -> Result<Ellipsoid, LimitSurfaceError> {
    if wrenches.len() < 2 {
        return Err(LimitSurfaceError::TooFewSamples(wrenches.len()));
    }
    if wrenches.iter().any(|w| !w.is_finite()) {
        return Err(LimitSurfaceError::NumericalFailure(
            "non-finite sample".into(),
        ));
    }
    let points = canonical_points(wrenches);

    let mut moment = Matrix6::<f64>::zeros();
    for f in &points {
        moment += f * f.transpose();
    }
    moment /= points.len() as f64;
    let eig = SymmetricEigen::new(moment);
    let axes = eig.eigenvectors;

    let extents: Vec<f64> = (0..6)
        .map(|i| {
            let u = axes.column(i);
            points.iter().map(|f| u.dot(f).abs()).fold(0.0, f64::max)
        })
        .collect();
    let max_extent = extents.iter().copied().fold(0.0, f64::max);
    if !(max_extent > 0.0) {
        return Err(LimitSurfaceError::NumericalFailure(
            "all samples are zero".into(),
        ));
    }
    let mut live: Vec<usize> = (0..6)
        .filter(|&i| extents[i] > DEGENERATE_EXTENT_RATIO * max_extent)
        .collect();
    live.sort_by(|&a, &b| extents[b].total_cmp(&extents[a]));
    let dead: Vec<usize> = (0..6).filter(|i| !live.contains(i)).collect();
    let r = live.len();

    // whitened coordinates y_k = D⁻¹ U_rᵀ f_k
    let mut y = Vec::with_capacity(points.len() * r);
    for f in &points {
        for &i in &live {
            y.push(axes.column(i).dot(f) / extents[i]);
        }
    }
    let (x_inv, iterations) = khachiyan(&y, r, tolerance, max_iterations)?;
    let mut a_y = x_inv / r as f64;
    let worst = (0..points.len())
        .map(|k| {
            let yk = DVector::from_column_slice(&y[k * r..(k + 1) * r]);
            (yk.transpose() * &a_y * &yk)[0]
        })
        .fold(0.0, f64::max);
    a_y /= worst;

    let chol = a_y.clone().cholesky().ok_or_else(|| {
        LimitSurfaceError::NumericalFailure("fitted matrix is not positive definite".into())
    })?;
    let l = chol.l();
    let l_inv_t = l
        .clone()
        .try_inverse()
        .ok_or_else(|| LimitSurfaceError::NumericalFailure("singular Cholesky factor".into()))?
        .transpose();

    // largest semi-axis in original units: sqrt(λmax(D A_y⁻¹ D))
    let a_y_inv = l_inv_t.clone() * l_inv_t.transpose();
    let scaled = DMatrix::from_fn(r, r, |i, j| {
        extents[live[i]] * a_y_inv[(i, j)] * extents[live[j]]
    });
    let largest_axis = scaled.symmetric_eigenvalues().max().sqrt();
    let clamped_axis = DEGENERATE_AXIS_RATIO.sqrt() * largest_axis;

    let mut factor = Matrix6::<f64>::zeros();
    let mut factor_inverse = Matrix6::<f64>::zeros();
    let lt = l.transpose();
    for row in 0..r {
        for (c, &i) in live.iter().enumerate() {
            let coef = lt[(row, c)] / extents[i];
            if coef != 0.0 {
                let u = axes.column(i);
                for k in 0..6 {
                    factor[(row, k)] += coef * u[k];
                }
            }
        }
    }
    // W⁻¹ columns for the live block: U_r D L⁻ᵀ
    for col in 0..r {
        for (c, &i) in live.iter().enumerate() {
            let coef = extents[i] * l_inv_t[(c, col)];
            if coef != 0.0 {
                let u = axes.column(i);
                for k in 0..6 {
                    factor_inverse[(k, col)] += coef * u[k];
                }
            }
        }
    }
    for (d, &i) in dead.iter().enumerate() {
        let row = r + d;
        let u = axes.column(i);
        for k in 0..6 {
            factor[(row, k)] = u[k] / clamped_axis;
            factor_inverse[(k, row)] = u[k] * clamped_axis;
        }
    }

    let mut ellipsoid = Ellipsoid {
        factor,
        factor_inverse,
        rank: r,
        iterations,
    };
    // leakage of samples along clamped axes is restored by a final uniform scale
    let worst = points
        .iter()
        .map(|f| ellipsoid.quad_form(f))
        .fold(0.0, f64::max);
    if worst > 1.0 {
        ellipsoid.scale(worst.sqrt());
    }
    Ok(ellipsoid)
}

/// Sign-canonicalized, deduplicated sample vectors (the fit only sees f fᵀ).
fn canonical_points(wrenches: &[Wrench]) -> Vec<Vector6<f64>> {
    let mut pts: Vec<Vector6<f64>> = wrenches
        .iter()
        .map(|w| {
            let v = *w.as_vector();
            let lead = v.iter().copied().find(|x| *x != 0.0).unwrap_or(0.0);
            if lead < 0.0 {
                -v
            } else {
                v
            }
        })
        .collect();
    pts.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pts.dedup();
    pts.retain(|v| v.iter().any(|x| *x != 0.0));
    if pts.is_empty() {
        pts.push(Vector6::zeros());
    }
    pts
}

/// Returns `(X(u)⁻¹, iterations)` at a `tolerance`-optimal design for points `y` (row-major, `r` columns).
fn khachiyan(
    y: &[f64],
    r: usize,
    tolerance: f64,
    max_iterations: usize,
) -> Result<(DMatrix<f64>, usize), LimitSurfaceError> {
    let n = y.len() / r;
    let rf = r as f64;
    let row = |k: usize| &y[k * r..(k + 1) * r];
    let mut u = vec![0.0; n];
    let support = initial_support(y, r);
    for &k in &support {
        u[k] = 1.0 / support.len() as f64;
    }

    let refresh = |u: &[f64]| -> Result<(DMatrix<f64>, Vec<f64>), LimitSurfaceError> {
        let mut x = DMatrix::<f64>::zeros(r, r);
        for (k, &w) in u.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let yk = row(k);
            for i in 0..r {
                for j in 0..=i {
                    x[(i, j)] += w * yk[i] * yk[j];
                }
            }
        }
        for i in 0..r {
            for j in 0..i {
                x[(j, i)] = x[(i, j)];
            }
        }
        let x_inv = x
            .try_inverse()
            .ok_or_else(|| LimitSurfaceError::NumericalFailure("singular moment matrix".into()))?;
        let omega = (0..n).map(|k| quad(&x_inv, row(k))).collect();
        Ok((x_inv, omega))
    };

    let (mut x_inv, mut omega) = refresh(&u)?;
    let mut g = vec![0.0; r];
    for iter in 0..max_iterations {
        if iter % REFRESH_EVERY == REFRESH_EVERY - 1 {
            (x_inv, omega) = refresh(&u)?;
        }
        let (j, omega_j) = argmax(&omega);
        if omega_j <= rf * (1.0 + tolerance) {
            return Ok((x_inv, iter));
        }
        if omega_j <= rf * (1.0 + POLISH_FROM) && tolerance < POLISH_FROM {
            let mut polished = u.clone();
            if let Some(steps) = newton_polish(y, r, &mut polished, tolerance) {
                let (x_inv, omega) = refresh(&polished)?;
                if argmax(&omega).1 <= rf * (1.0 + tolerance) {
                    return Ok((x_inv, iter + steps));
                }
            }
        }
        let (i, omega_i) = omega
            .iter()
            .enumerate()
            .filter(|(k, _)| u[*k] > 0.0)
            .map(|(k, &w)| (k, w))
            .fold(
                (usize::MAX, f64::INFINITY),
                |b, c| if c.1 < b.1 { c } else { b },
            );

        let (idx, tau) = if i != usize::MAX && rf - omega_i > omega_j - rf && u[i] < 1.0 {
            let bound = -u[i] / (1.0 - u[i]);
            let tau = if omega_i > 1.0 {
                ((omega_i - rf) / (rf * (omega_i - 1.0))).max(bound)
            } else {
                bound
            };
            (i, tau)
        } else {
            (j, (omega_j - rf) / (rf * (omega_j - 1.0)))
        };

        for w in u.iter_mut() {
            *w *= 1.0 - tau;
        }
        u[idx] += tau;
        if u[idx] < 1e-15 {
            u[idx] = 0.0;
        }

        let yi = row(idx);
        for a in 0..r {
            g[a] = (0..r).map(|b| x_inv[(a, b)] * yi[b]).sum();
        }
        let denom = 1.0 - tau + tau * omega[idx];
        let inv_keep = 1.0 / (1.0 - tau);
        for (k, om) in omega.iter_mut().enumerate() {
            let s: f64 = row(k).iter().zip(&g).map(|(a, b)| a * b).sum();
            *om = (*om - tau * s * s / denom) * inv_keep;
        }
        for a in 0..r {
            for b in 0..r {
                x_inv[(a, b)] = (x_inv[(a, b)] - tau * g[a] * g[b] / denom) * inv_keep;
            }
        }
    }
    let (x_inv, omega) = refresh(&u)?;
    if argmax(&omega).1 <= rf * (1.0 + tolerance) {
        return Ok((x_inv, max_iterations));
    }
    Err(LimitSurfaceError::NumericalFailure(format!(
        "ellipsoid fit did not converge in {max_iterations} iterations"
    )))
}

/// Active-set Newton refinement of the design `u`.
///
/// Alternates an exact solve of the design problem restricted to the current
/// support with adding the most violated point. Returns the number of Newton
/// steps, or `None` when it makes no progress (the caller then keeps
/// iterating first-order steps).
fn newton_polish(y: &[f64], r: usize, u: &mut [f64], tolerance: f64) -> Option<usize> {
    let n = y.len() / r;
    let rf = r as f64;
    let row = |k: usize| DVector::from_column_slice(&y[k * r..(k + 1) * r]);
    let moment = |u: &[f64]| {
        let mut x = DMatrix::<f64>::zeros(r, r);
        for (k, &w) in u.iter().enumerate() {
            if w > 0.0 {
                let yk = row(k);
                x += w * &yk * yk.transpose();
            }
        }
        x
    };
    let log_det = |u: &[f64]| {
        moment(u)
            .cholesky()
            .map(|c| 2.0 * c.l().diagonal().map(f64::ln).sum())
    };
    let mut steps = 0;
    for _ in 0..POLISH_MAX_ADDS {
        for _ in 0..POLISH_MAX_NEWTON {
            let support: Vec<usize> = (0..n).filter(|&k| u[k] > 0.0).collect();
            let m = support.len();
            let x_inv = moment(u).try_inverse()?;
            let ys = DMatrix::from_fn(m, r, |i, c| y[support[i] * r + c]);
            let mm = &ys * &x_inv * ys.transpose();
            let g = mm.diagonal();
            if g.iter().all(|&w| (w - rf).abs() <= 1e-10 * rf) {
                break;
            }
            // KKT system of the quadratic model under Σ d = 0
            let mut kkt = DMatrix::<f64>::zeros(m + 1, m + 1);
            let ridge = 1e-12 * (0..m).map(|i| mm[(i, i)].powi(2)).sum::<f64>();
            for i in 0..m {
                for j in 0..m {
                    kkt[(i, j)] = mm[(i, j)].powi(2);
                }
                kkt[(i, i)] += ridge;
                kkt[(i, m)] = 1.0;
                kkt[(m, i)] = 1.0;
            }
            let mut rhs = DVector::<f64>::zeros(m + 1);
            rhs.rows_mut(0, m).copy_from(&g);
            let sol = kkt.lu().solve(&rhs)?;
            let d = sol.rows(0, m);
            let mut t_max = 1.0f64;
            let mut blocking = None;
            for (i, &k) in support.iter().enumerate() {
                if d[i] < 0.0 && -u[k] / d[i] < t_max {
                    t_max = -u[k] / d[i];
                    blocking = Some(k);
                }
            }
            let base = log_det(u)?;
            let mut t = t_max;
            let mut trial = u.to_vec();
            let accepted = loop {
                for (i, &k) in support.iter().enumerate() {
                    trial[k] = (u[k] + t * d[i]).max(0.0);
                }
                if t == t_max {
                    if let Some(k) = blocking {
                        trial[k] = 0.0;
                    }
                }
                match log_det(&trial) {
                    Some(v) if v >= base - 1e-14 * base.abs().max(1.0) => break true,
                    _ => {}
                }
                t *= 0.5;
                if t < 1e-12 {
                    break false;
                }
            };
            if !accepted {
                return None;
            }
            let total: f64 = trial.iter().sum();
            trial.iter_mut().for_each(|w| *w /= total);
            u.copy_from_slice(&trial);
            steps += 1;
        }
        let x_inv = moment(u).try_inverse()?;
        let (j, omega_j) = (0..n)
            .map(|k| (k, quad(&x_inv, &y[k * r..(k + 1) * r])))
            .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
        if omega_j <= rf * (1.0 + tolerance) {
            return Some(steps);
        }
        let tau = (omega_j - rf) / (rf * (omega_j - 1.0));
        u.iter_mut().for_each(|w| *w *= 1.0 - tau);
        u[j] += tau;
        steps += 1;
    }
    None
}

const POLISH_FROM: f64 = 1e-2;
const POLISH_MAX_ADDS: usize = 200;
const POLISH_MAX_NEWTON: usize = 40;

/// `r` linearly independent extreme points: each maximizes the residual norm
/// against the span of the previous ones (Gram–Schmidt).
fn initial_support(y: &[f64], r: usize) -> Vec<usize> {
    let n = y.len() / r;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut chosen = Vec::with_capacity(r);
    let residual = |k: usize, basis: &[Vec<f64>]| -> Vec<f64> {
        let mut v = y[k * r..(k + 1) * r].to_vec();
        for b in basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        v
    };
    for _ in 0..r {
        let best = (0..n)
            .filter(|k| !chosen.contains(k))
            .map(|k| (k, residual(k, &basis).iter().map(|x| x * x).sum::<f64>()))
            .fold((usize::MAX, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        if best.0 == usize::MAX || best.1 <= 1e-24 {
            break;
        }
        let v = residual(best.0, &basis);
        let norm = best.1.sqrt();
        basis.push(v.iter().map(|x| x / norm).collect());
        chosen.push(best.0);
    }
    if chosen.len() < r {
        // rank-deficient after whitening: fall back to every point
        return (0..n).collect();
    }
    chosen
}

fn quad(m: &DMatrix<f64>, v: &[f64]) -> f64 {
    let r = v.len();
    let mut s = 0.0;
    for i in 0..r {
        let mut t = 0.0;
        for j in 0..r {
            t += m[(i, j)] * v[j];
        }
        s += v[i] * t;
    }
    s
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, unit_sphere_point};
    use approx::assert_relative_eq;

    fn w(v: [f64; 6]) -> Wrench {
        Wrench::from_vector(Vector6::from_row_slice(&v))
    }

    #[test]
    fn sphere_is_its_own_mvee() {
        let mut rng = seeded(11);
        let mut samples: Vec<Wrench> = (0..6)
            .flat_map(|i| {
                let mut e = [0.0; 6];
                e[i] = 1.0;
                [w(e), -w(e)]
            })
            .collect();
        for _ in 0..400 {
            let p = unit_sphere_point(&mut rng, 6);
            samples.push(Wrench::from_vector(Vector6::from_row_slice(&p)));
        }
        let e = fit_ellipsoid(&samples).unwrap();
        assert_eq!(e.rank(), 6);
        let diff = e.matrix() - Matrix6::identity();
        assert!(diff.amax() < 1e-3, "{diff}");
    }

    /// Brute-force oracle: minimum-area origin-centered ellipse over a grid
    /// of (a, b, angle) parameterizations containing the 2D points.
    fn brute_force_2d(points: &[[f64; 2]]) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let steps = 400;
        for ia in 1..=steps {
            let a = 4.0 * ia as f64 / steps as f64;
            // smallest b containing every point for this a (axis-aligned)
            let mut need_b: f64 = 0.0;
            let mut ok = true;
            for p in points {
                let rest = 1.0 - (p[0] / a).powi(2);
                if rest <= 0.0 {
                    ok = false;
                    break;
                }
                need_b = need_b.max(p[1].abs() / rest.sqrt());
            }
            if ok && a * need_b < best.0 {
                best = (a * need_b, a, need_b);
            }
        }
        (best.1, best.2)
    }

    #[test]
    fn axis_extremes_set_semi_axes() {
        let (a, b) = (2.0, 0.5);
        let mut samples = vec![
            w([a, 0.0, 0.0, 0.0, 0.0, 0.0]),
            w([0.0, b, 0.0, 0.0, 0.0, 0.0]),
        ];
        let mut rng = seeded(4);
        let mut proj = vec![[a, 0.0], [0.0, b]];
        for _ in 0..60 {
            let p = unit_sphere_point(&mut rng, 6);
            let v = [
                p[0] * 0.3,
                p[1] * 0.1,
                p[2] * 1e-3,
                p[3] * 1e-3,
                p[4] * 1e-3,
                p[5] * 1e-3,
            ];
            proj.push([v[0], v[1]]);
            samples.push(w(v));
        }
        let samples: Vec<Wrench> = samples.iter().flat_map(|s| [*s, -*s]).collect();
        let e = fit_ellipsoid(&samples).unwrap();
        let (oa, ob) = brute_force_2d(&proj);
        let m = e.matrix();
        // semi-axis along e1 restricted to the e1-e2 plane
        let plane = nalgebra::Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let _ = plane;
        let fit_a = 1.0 / m[(0, 0)].sqrt();
        let fit_b = 1.0 / m[(1, 1)].sqrt();
        assert!((fit_a - oa).abs() / oa < 0.05, "{fit_a} vs {oa}");
        assert!((fit_b - ob).abs() / ob < 0.05, "{fit_b} vs {ob}");
        assert!(fit_a >= a * (1.0 - 1e-9) && fit_b >= b * (1.0 - 1e-9));
    }

    #[test]
    fn rank_one_pair_is_clamped() {
        let v = w([0.3, -0.1, 0.0, 0.2, 0.0, 0.0]);
        let e = fit_ellipsoid(&[v, -v, v, -v]).unwrap();
        assert_eq!(e.rank(), 1);
        assert_relative_eq!(e.quad_form(v.as_vector()), 1.0, epsilon = 1e-9);
        let axes = e.semi_axes();
        assert_relative_eq!(axes[0], v.as_vector().norm(), max_relative = 1e-9);
        for s in &axes[1..] {
            assert_relative_eq!(
                s * s,
                DEGENERATE_AXIS_RATIO * axes[0] * axes[0],
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            fit_ellipsoid(&[w([1.0; 6])]),
            Err(LimitSurfaceError::TooFewSamples(1))
        ));
        assert!(matches!(
            fit_ellipsoid(&[w([0.0; 6]), w([0.0; 6])]),
            Err(LimitSurfaceError::NumericalFailure(_))
        ));
    }

    #[test]
    fn from_matrix_round_trip() {
        let mut a = Matrix6::identity();
        a[(0, 0)] = 4.0;
        a[(1, 2)] = 0.3;
        a[(2, 1)] = 0.3;
        let e = Ellipsoid::from_matrix(&a).unwrap();
        assert_relative_eq!(e.matrix(), a, epsilon = 1e-12);
        let q = Vector6::new(0.1, 0.5, -0.2, 0.3, 0.0, 0.9);
        let p = e.surface_point(&q);
        assert_relative_eq!(e.quad_form(&p), 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.surface_normal(&q), a * p, epsilon = 1e-12);
    }
}
