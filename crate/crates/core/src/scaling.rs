//! Peak finding, least-squares fits and finite-size data collapse.

use serde::{Deserialize, Serialize};

use crate::engine::xx_correlator;
use crate::error::{Error, Result};
use crate::model::{majorana_covariance, ModelParams};

/// Samples of one observable against λ for a fixed size and anisotropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub n: usize,
    pub gamma: f64,
    pub observable: String,
    points: Vec<(f64, f64)>,
}

impl Curve {
    /// Sorts the points by λ; duplicate λ values are rejected.
    pub fn new(n: usize, gamma: f64, observable: impl Into<String>, mut points: Vec<(f64, f64)>) -> Result<Self> {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidParams("curve λ values must be distinct".into()));
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::InvalidParams("curve contains non-finite values".into()));
        }
        Ok(Self {
            n,
            gamma,
            observable: observable.into(),
            points,
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lambdas(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Piecewise-linear interpolation; `None` outside the sampled range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        interpolate(&self.points, x)
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = points.first()?;
    let last = points.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    let i = points.partition_point(|p| p.0 < x);
    if i == 0 {
        return Some(first.1);
    }
    let (x0, y0) = points[i - 1];
    let (x1, y1) = points[i];
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub lambda: f64,
    pub height: f64,
    pub interior: bool,
}

/// Grid maximum refined by the parabola through it and its neighbours.
/// Ties go to the smallest λ; an endpoint maximum is returned unrefined.
pub fn find_peak(c: &Curve) -> Result<Peak> {
    let pts = c.points();
    if pts.len() < 3 {
        return Err(Error::InvalidParams("peak search needs at least 3 points".into()));
    }
    let mut arg = 0;
    for (i, p) in pts.iter().enumerate() {
        if p.1 > pts[arg].1 {
            arg = i;
        }
    }
    if arg == 0 || arg == pts.len() - 1 {
        return Ok(Peak {
            lambda: pts[arg].0,
            height: pts[arg].1,
            interior: false,
        });
    }
    let (x0, y0) = pts[arg - 1];
    let (x1, y1) = pts[arg];
    let (x2, y2) = pts[arg + 1];
    // Vertex of the interpolating parabola in divided-difference form.
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    let (lambda, height) = if a < 0.0 {
        let b = d01 - a * (x0 + x1);
        let xv = -b / (2.0 * a);
        let xv = xv.clamp(x0, x2);
        (xv, y1 + (xv - x1) * (d01 + a * (xv - x0)))
    } else {
        (x1, y1)
    };
    Ok(Peak {
        lambda,
        height: height.max(y1),
        interior: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitModel {
    /// `y = a + b ln x`
    Log,
    /// `y = a x^p`, fitted as a line in log–log space
    Power,
    /// `y = c0 + c1 x + c2 x²`
    Parabola,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: FitModel,
    /// `[a, b]` for `Log`, `[a, p]` for `Power`, `[c0, c1, c2]` for `Parabola`.
    pub coefficients: Vec<f64>,
    /// RMS residual in the space the fit was performed in.
    pub residual_rms: f64,
    pub r_squared: f64,
}

/// Fewest points accepted by [`fit_model`].
pub const MIN_FIT_POINTS: usize = 5;

/// Least squares via the normal equations.
pub fn fit_model(xs: &[f64], ys: &[f64], model: FitModel) -> Result<FitReport> {
    fit_with_minimum(xs, ys, model, MIN_FIT_POINTS)
}

/// [`fit_model`] for short size series, accepting as few points as leave
/// one residual degree of freedom.
pub fn fit_model_small(xs: &[f64], ys: &[f64], model: FitModel) -> Result<FitReport> {
    let params = if model == FitModel::Parabola { 3 } else { 2 };
    fit_with_minimum(xs, ys, model, params + 1)
}

fn fit_with_minimum(xs: &[f64], ys: &[f64], model: FitModel, minimum: usize) -> Result<FitReport> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParams("xs and ys differ in length".into()));
    }
    if xs.len() < minimum {
        return Err(Error::InvalidParams(format!("a fit needs at least {minimum} points")));
    }
    let (u, v, degree): (Vec<f64>, Vec<f64>, usize) = match model {
        FitModel::Log => {
            if xs.iter().any(|&x| x <= 0.0) {
                return Err(Error::InvalidParams("log fit needs positive abscissae".into()));
            }
            (xs.iter().map(|x| x.ln()).collect(), ys.to_vec(), 1)
        }
        FitModel::Power => {
            if xs.iter().chain(ys).any(|&x| x <= 0.0) {
                return Err(Error::InvalidParams("power fit needs positive data".into()));
            }
            (
                xs.iter().map(|x| x.ln()).collect(),
                ys.iter().map(|y| y.ln()).collect(),
                1,
            )
        }
        FitModel::Parabola => (xs.to_vec(), ys.to_vec(), 2),
    };
    let coeffs = polyfit(&u, &v, degree)?;
    let predict = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let ss_res: f64 = u.iter().zip(&v).map(|(&x, &y)| (y - predict(x)).powi(2)).sum();
    let ss_tot: f64 = v.iter().map(|y| (y - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let mut coefficients = coeffs;
    if model == FitModel::Power {
        coefficients[0] = coefficients[0].exp();
    }
    Ok(FitReport {
        model,
        coefficients,
        residual_rms: (ss_res / v.len() as f64).sqrt(),
        r_squared,
    })
}

/// Polynomial coefficients (constant first). The abscissae are centred and
/// scaled before forming the normal equations to keep them well conditioned.
fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    let m = degree + 1;
    let n = xs.len() as f64;
    let shift = xs.iter().sum::<f64>() / n;
    let scale = xs.iter().map(|x| (x - shift).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::numerical("degenerate design matrix: all abscissae equal"));
    }
    let mut ata = vec![0.0; m * m];
    let mut aty = vec![0.0; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let t = (x - shift) / scale;
        let pows: Vec<f64> = (0..m).map(|k| t.powi(k as i32)).collect();
        for r in 0..m {
            aty[r] += pows[r] * y;
            for c in 0..m {
                ata[r * m + c] += pows[r] * pows[c];
            }
        }
    }
    let z = solve_dense(&mut ata, &mut aty, m)?;
    // Expand Σ z_k ((x - shift)/scale)^k into powers of x.
    let mut out = vec![0.0; m];
    for (k, &zk) in z.iter().enumerate() {
        let base = zk / scale.powi(k as i32);
        for (j, o) in out.iter_mut().enumerate().take(k + 1) {
            *o += base * binomial(k, j) * (-shift).powi((k - j) as i32);
        }
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Gaussian elimination with partial pivoting on a small system.
fn solve_dense(a: &mut [f64], b: &mut [f64], m: usize) -> Result<Vec<f64>> {
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i * m + col].abs().total_cmp(&a[j * m + col].abs()))
            .expect("non-empty range");
        if a[piv * m + col].abs() < 1e-300 {
            return Err(Error::numerical("degenerate design matrix"));
        }
        if piv != col {
            for c in 0..m {
                a.swap(piv * m + c, col * m + c);
            }
            b.swap(piv, col);
        }
        for r in col + 1..m {
            let f = a[r * m + col] / a[col * m + col];
            for c in col..m {
                a[r * m + c] -= f * a[col * m + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| a[r * m + c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r * m + r];
    }
    Ok(x)
}

/// Number of abscissae on the common grid used by [`collapse_quality`].
pub const COLLAPSE_GRID_POINTS: usize = 201;

/// One curve rescaled for a collapse plot.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledCurve {
    pub n: usize,
    pub lambda_m: f64,
    /// `(N^{1/ν}(λ - λ_m), y(λ) - y(λ_m), λ)`
    pub points: Vec<(f64, f64, f64)>,
}

/// Shifts each curve by its own peak (or, if it has no interior maximum, by
/// its minimum, which is where `Γ` peaks) and rescales the abscissa.
pub fn rescale_curves(curves: &[Curve], nu: f64, minimum: bool) -> Result<Vec<RescaledCurve>> {
    curves
        .iter()
        .map(|c| {
            let peak = if minimum {
                let flipped = Curve::new(c.n, c.gamma, "", c.points().iter().map(|&(x, y)| (x, -y)).collect())?;
                let p = find_peak(&flipped)?;
                Peak { height: -p.height, ..p }
            } else {
                find_peak(c)?
            };
            let f = (c.n as f64).powf(1.0 / nu);
            Ok(RescaledCurve {
                n: c.n,
                lambda_m: peak.lambda,
                points: c
                    .points()
                    .iter()
                    .map(|&(l, y)| (f * (l - peak.lambda), y - peak.height, l))
                    .collect(),
            })
        })
        .collect()
}

/// Normalized RMS spread of curves after rescaling `x = N^{1/ν}(λ - λ_m)`,
/// `y = Γ(λ) - Γ(λ_m)`, with `λ_m` each curve's extremum (a minimum, since
/// `Γ = 1/(T_4 - π/2)` is negative and smallest where `T_4` peaks).
pub fn collapse_quality(curves: &[Curve], nu: f64) -> Result<f64> {
    if curves.len() < 2 {
        return Err(Error::InvalidParams("collapse needs at least two curves".into()));
    }
    let rescaled = rescale_curves(curves, nu, true)?;
    let series: Vec<Vec<(f64, f64)>> = rescaled
        .iter()
        .map(|r| r.points.iter().map(|&(x, y, _)| (x, y)).collect())
        .collect();
    let lo = series.iter().map(|s| s[0].0).fold(f64::NEG_INFINITY, f64::max);
    let hi = series.iter().map(|s| s[s.len() - 1].0).fold(f64::INFINITY, f64::min);
    if !(hi > lo) {
        return Err(Error::InvalidParams("rescaled curves do not overlap".into()));
    }
    let mut sq = 0.0;
    let mut count = 0usize;
    for i in 0..COLLAPSE_GRID_POINTS {
        // Clamped: `lo + (hi - lo)` can land one ulp past `hi`.
        let x = (lo + (hi - lo) * i as f64 / (COLLAPSE_GRID_POINTS - 1) as f64).clamp(lo, hi);
        let ys: Vec<f64> = series
            .iter()
            .map(|s| interpolate(s, x).ok_or_else(|| Error::numerical(format!("x = {x} outside a rescaled curve"))))
            .collect::<Result<_>>()?;
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        sq += ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>();
        count += ys.len();
    }
    let pooled = series.iter().flatten().filter(|p| p.0 >= lo && p.0 <= hi).map(|p| p.1);
    let (ymin, ymax) = pooled.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let range = ymax - ymin;
    let rms = (sq / count as f64).sqrt();
    if range > 0.0 {
        Ok(rms / range)
    } else {
        Ok(rms)
    }
}

/// Finite-size order parameter `√max(0, ⟨σˣ_0 σˣ_{N/2}⟩)`.
pub fn long_range_order(params: &ModelParams) -> Result<f64> {
    let cov = majorana_covariance(params)?;
    let c = xx_correlator(0, params.n() / 2, &cov)?;
    Ok(c.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: Vec<(f64, f64)>) -> Curve {
        Curve::new(10, 1.0, "test", points).unwrap()
    }

    #[test]
    fn collapse_grid_stays_inside_every_curve() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let curves: Vec<Curve> = [32usize, 48, 64, 80]
                .iter()
                .map(|&n| {
                    let centre = 1.0 + rng.gen_range(-0.01..0.01);
                    let pts = (-8..=8)
                        .map(|i| {
                            let l = centre + i as f64 * 0.125 / n as f64;
                            (l, -3.0 + (n as f64 * (l - centre)).powi(2))
                        })
                        .collect();
                    Curve::new(n, 1.0, "g", pts).unwrap()
                })
                .collect();
            for nu in [0.5, 1.0, 2.0] {
                collapse_quality(&curves, nu).unwrap();
            }
        }
    }

    #[test]
    fn parabola_vertex_is_exact() {
        let f = |x: f64| 3.0 - 2.0 * (x - 0.93).powi(2);
        let c = curve((0..11).map(|i| 0.5 + 0.1 * i as f64).map(|x| (x, f(x))).collect());
        let p = find_peak(&c).unwrap();
        assert!(p.interior);
        assert!((p.lambda - 0.93).abs() < 1e-12);
        assert!((p.height - 3.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_data_has_no_interior_peak() {
        let c = curve((0..6).map(|i| (i as f64, (i as f64).sqrt())).collect());
        assert!(!find_peak(&c).unwrap().interior);
    }

    #[test]
    fn peak_shift_invariance() {
        let pts: Vec<(f64, f64)> = (0..9).map(|i| (i as f64 * 0.1, (i as f64 * 0.7).sin())).collect();
        let a = find_peak(&curve(pts.clone())).unwrap();
        let b = find_peak(&curve(pts.iter().map(|&(x, y)| (x, y + 5.0)).collect())).unwrap();
        assert!((a.lambda - b.lambda).abs() < 1e-12);
        assert!((b.height - a.height - 5.0).abs() < 1e-12);
    }

    #[test]
    fn exact_log_and_power_fits() {
        let xs = [24.0, 32.0, 48.0, 64.0, 96.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 2.0 + 3.0 * x.ln()).collect();
        let f = fit_model(&xs, &ys, FitModel::Log).unwrap();
        assert!((f.coefficients[0] - 2.0).abs() < 1e-10 && (f.coefficients[1] - 3.0).abs() < 1e-10);
        assert!(f.residual_rms < 1e-10);

        let ys: Vec<f64> = xs.iter().map(|x: &f64| 0.5 * x.powf(1.5)).collect();
        let f = fit_model(&xs, &ys, FitModel::Power).unwrap();
        assert!((f.coefficients[1] - 1.5).abs() < 1e-10);
        assert!((f.coefficients[0] - 0.5).abs() < 1e-10);
        assert!(f.residual_rms < 1e-10);

        let xs = [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x + 0.25 * x * x).collect();
        let f = fit_model(&xs, &ys, FitModel::Parabola).unwrap();
        for (c, e) in f.coefficients.iter().zip([1.0, -2.0, 0.25]) {
            assert!((c - e).abs() < 1e-10);
        }
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_model(&[1.0; 3], &[1.0; 3], FitModel::Log).is_err());
        assert!(fit_model(&[2.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0], FitModel::Log).is_err());
        assert!(fit_model(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, -2.0, 3.0, 4.0, 5.0], FitModel::Power).is_err());
    }

    #[test]
    fn identical_and_synthetic_collapse() {
        let f = |x: f64| -1.0 / (1.0 + x * x);
        let make = |n: usize, lm: f64, nu: f64| {
            let pts = (0..161)
                .map(|i| lm - 0.4 + 0.005 * i as f64)
                .map(|l| (l, f((n as f64).powf(1.0 / nu) * (l - lm))))
                .collect();
            Curve::new(n, 1.0, "gamma", pts).unwrap()
        };
        let same = [make(32, 0.9, 1.0), make(32, 0.9, 1.0)];
        assert_eq!(collapse_quality(&same, 1.0).unwrap(), 0.0);
        let family = [make(32, 0.9, 1.0), make(48, 0.93, 1.0), make(64, 0.95, 1.0)];
        assert!(collapse_quality(&family, 1.0).unwrap() < 1e-3);
        assert!(collapse_quality(&family, 2.0).unwrap() > 1e-2);
    }

    #[test]
    fn disjoint_curves_are_rejected() {
        let a = curve(vec![(0.0, 0.0), (0.1, -1.0), (0.2, 0.0)]);
        let b = Curve::new(10_000, 1.0, "x", vec![(5.0, 0.0), (5.1, -1.0), (5.2, 0.0)]).unwrap();
        // Both rescale around their own minima, so they do overlap near 0.
        assert!(collapse_quality(&[a, b], 1.0).is_ok());
        assert!(collapse_quality(&[curve(vec![(0.0, 0.0), (0.1, -1.0), (0.2, 0.0)])], 1.0).is_err());
    }

    #[test]
    fn order_parameter_limits() {
        let m = long_range_order(&ModelParams::new(16, 1.0, 0.0).unwrap()).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        let m = long_range_order(&ModelParams::new(128, 1.0, 2.0).unwrap()).unwrap();
        assert!(m < 0.05);
    }
}
