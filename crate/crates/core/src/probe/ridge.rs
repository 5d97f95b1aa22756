//! Closed-form ridge regression with an unpenalised intercept, λ chosen by
//! k-fold cross-validation, and the R² score.
//!
//! With at most as many columns as rows the normal equations are solved in
//! primal form `(XᵀX + λI) w = Xᵀy`; wider matrices use the dual
//! `(XXᵀ + λI) α = y`, `w = Xᵀα`. Both centre on the fitting rows, so the
//! intercept is the target mean minus the fitted offset. Several targets over
//! the same rows share every factorisation.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_in_place, cholesky_solve, gemm, Matrix};

pub const DEFAULT_LAMBDAS: [f64; 7] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0];
pub const DEFAULT_FOLDS: usize = 5;
/// Negative R² values are shown as this floor; stored values are unclipped.
pub const DISPLAY_FLOOR: f64 = -0.05;
/// Columns whose standard deviation is at most this (relative to
/// `max(1, |mean|)`) count as constant and are dropped.
pub const CONSTANT_COLUMN_TOLERANCE: f64 = 1e-12;

/// `1 − Σ(y − ŷ)² / Σ(y − ȳ)²` with ȳ the mean of `y`; `None` for fewer than
/// two values or zero variance.
pub fn r2(y: &[f64], pred: &[f64]) -> Option<f64> {
    assert_eq!(y.len(), pred.len(), "r2 needs one prediction per target");
    if y.len() < 2 {
        return None;
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if !(ss_tot > 0.0) {
        return None;
    }
    let ss_res: f64 = y.iter().zip(pred).map(|(a, b)| (a - b).powi(2)).sum();
    Some(1.0 - ss_res / ss_tot)
}

/// R² as displayed in reports: negative values floored at −0.05.
pub fn display_r2(value: f64) -> f64 {
    value.max(DISPLAY_FLOOR)
}

/// Per-column standardisation fitted on training rows; constant columns are
/// dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub kept: Vec<usize>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub input_width: usize,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let (n, p) = x.shape();
        let mut sum = vec![0.0; p];
        for r in 0..n {
            for (s, v) in sum.iter_mut().zip(x.row(r)) {
                *s += v;
            }
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n.max(1) as f64).collect();
        let mut ss = vec![0.0; p];
        for r in 0..n {
            for ((s, v), m) in ss.iter_mut().zip(x.row(r)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let mut out = Self {
            kept: Vec::new(),
            mean: Vec::new(),
            scale: Vec::new(),
            input_width: p,
        };
        for c in 0..p {
            let sd = (ss[c] / n.max(1) as f64).sqrt();
            if sd > CONSTANT_COLUMN_TOLERANCE * mean[c].abs().max(1.0) {
                out.kept.push(c);
                out.mean.push(mean[c]);
                out.scale.push(sd);
            }
        }
        out
    }

    pub fn width(&self) -> usize {
        self.kept.len()
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.input_width {
            return Err(Error::contract(format!(
                "standardiser fitted on {} columns, got {}x{}",
                self.input_width,
                x.rows(),
                x.cols()
            )));
        }
        let mut out = Matrix::zeros(x.rows(), self.kept.len());
        for r in 0..x.rows() {
            let src = x.row(r);
            for (k, o) in out.row_mut(r).iter_mut().enumerate() {
                *o = (src[self.kept[k]] - self.mean[k]) / self.scale[k];
            }
        }
        Ok(out)
    }
}

/// A fitted linear probe for one target.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    /// Mean validation R² of the chosen λ (`None` when no fold had target
    /// variance).
    pub cv_r2: Option<f64>,
}

impl RidgeFit {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.weights.len() {
            return Err(Error::contract(format!(
                "probe has {} weights, features are {}x{}",
                self.weights.len(),
                x.rows(),
                x.cols()
            )));
        }
        Ok((0..x.rows())
            .map(|r| self.intercept + x.row(r).iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Form {
    Primal,
    Dual,
}

/// Precomputed cross-products of one feature matrix and its targets.
struct System<'a> {
    x: &'a Matrix,
    y: &'a Matrix,
    form: Form,
    /// `XᵀX` (primal) or `XXᵀ` (dual).
    gram: Matrix,
    /// `XᵀY` (primal only).
    xty: Matrix,
}

fn column_means(x: &Matrix, rows: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; x.cols()];
    for &r in rows {
        for (a, v) in m.iter_mut().zip(x.row(r)) {
            *a += v;
        }
    }
    let n = rows.len() as f64;
    m.iter_mut().for_each(|a| *a /= n);
    m
}

fn add_ridge(a: &Matrix, lambda: f64) -> Matrix {
    let mut a = a.clone();
    for i in 0..a.rows() {
        let d = a.get(i, i);
        a.set(i, i, d + lambda);
    }
    a
}

fn factor(a: &Matrix, lambda: f64) -> Result<Matrix> {
    let mut l = add_ridge(a, lambda);
    cholesky_in_place(&mut l).map_err(|e| Error::Runtime(format!("ridge system at λ = {lambda:e}: {e}")))?;
    Ok(l)
}

/// A centred linear system over fitting rows, solvable for any λ, plus the
/// prediction map for held-out rows.
struct FoldProblem {
    /// Centred system matrix (p×p or n_f×n_f).
    a: Matrix,
    /// Right-hand sides (p×t or n_f×t).
    b: Matrix,
    /// Held-out rows mapped into the solution space, centred (n_v×p or n_v×n_f).
    held: Matrix,
    y_mean: Vec<f64>,
}

impl FoldProblem {
    /// Predictions for the held-out rows at `lambda`, one column per target.
    fn predict_held(&self, lambda: f64) -> Result<Matrix> {
        let l = factor(&self.a, lambda)?;
        let sol = cholesky_solve(&l, &self.b);
        let mut pred = Matrix::zeros(self.held.rows(), self.b.cols());
        gemm(1.0, &self.held, false, &sol, false, 0.0, &mut pred);
        for r in 0..pred.rows() {
            for (v, m) in pred.row_mut(r).iter_mut().zip(&self.y_mean) {
                *v += m;
            }
        }
        Ok(pred)
    }
}

impl<'a> System<'a> {
    fn new(x: &'a Matrix, y: &'a Matrix, form: Option<Form>) -> Self {
        let (n, p) = x.shape();
        let form = form.unwrap_or(if p <= n { Form::Primal } else { Form::Dual });
        let (gram, xty) = match form {
            Form::Primal => {
                let mut g = Matrix::zeros(p, p);
                gemm(1.0, x, true, x, false, 0.0, &mut g);
                let mut b = Matrix::zeros(p, y.cols());
                gemm(1.0, x, true, y, false, 0.0, &mut b);
                (g, b)
            }
            Form::Dual => {
                let mut k = Matrix::zeros(n, n);
                gemm(1.0, x, false, x, true, 0.0, &mut k);
                (k, Matrix::zeros(0, 0))
            }
        };
        Self { x, y, form, gram, xty }
    }

    fn target_means(&self, rows: &[usize]) -> Vec<f64> {
        column_means(self.y, rows)
    }

    /// Centred problem fitting on `fit` and predicting `held`.
    fn problem(&self, fit: &[usize], held: &[usize]) -> FoldProblem {
        let nf = fit.len() as f64;
        let y_mean = self.target_means(fit);
        match self.form {
            Form::Primal => {
                let p = self.x.cols();
                let mu = column_means(self.x, fit);
                let xh = self.x.select_rows(held);
                let yh = self.y.select_rows(held);
                // XᵀX and XᵀY over the fitting rows = totals minus the held-out part
                let mut a = self.gram.clone();
                gemm(-1.0, &xh, true, &xh, false, 1.0, &mut a);
                let mut b = self.xty.clone();
                gemm(-1.0, &xh, true, &yh, false, 1.0, &mut b);
                for i in 0..p {
                    for j in 0..p {
                        let v = a.get(i, j) - nf * mu[i] * mu[j];
                        a.set(i, j, v);
                    }
                    for (t, ym) in y_mean.iter().enumerate() {
                        let v = b.get(i, t) - nf * mu[i] * ym;
                        b.set(i, t, v);
                    }
                }
                let mut held_c = xh;
                for r in 0..held_c.rows() {
                    for (v, m) in held_c.row_mut(r).iter_mut().zip(&mu) {
                        *v -= m;
                    }
                }
                FoldProblem {
                    a,
                    b,
                    held: held_c,
                    y_mean,
                }
            }
            Form::Dual => {
                let k = &self.gram;
                let row_mean = |i: usize| fit.iter().map(|&j| k.get(i, j)).sum::<f64>() / nf;
                let m_fit: Vec<f64> = fit.iter().map(|&i| row_mean(i)).collect();
                let c = m_fit.iter().sum::<f64>() / nf;
                let mut a = Matrix::zeros(fit.len(), fit.len());
                for (ii, &i) in fit.iter().enumerate() {
                    for (jj, &j) in fit.iter().enumerate() {
                        a.set(ii, jj, k.get(i, j) - m_fit[ii] - m_fit[jj] + c);
                    }
                }
                let mut b = self.y.select_rows(fit);
                for r in 0..b.rows() {
                    for (v, m) in b.row_mut(r).iter_mut().zip(&y_mean) {
                        *v -= m;
                    }
                }
                let mut held_c = Matrix::zeros(held.len(), fit.len());
                for (vv, &v) in held.iter().enumerate() {
                    let mv = row_mean(v);
                    for (jj, &j) in fit.iter().enumerate() {
                        held_c.set(vv, jj, k.get(v, j) - mv - m_fit[jj] + c);
                    }
                }
                FoldProblem {
                    a,
                    b,
                    held: held_c,
                    y_mean,
                }
            }
        }
    }

    /// Weights (p×t) and intercepts fitted on every row at `lambda`.
    fn solve_all(&self, lambda: f64) -> Result<(Matrix, Vec<f64>)> {
        let all: Vec<usize> = (0..self.x.rows()).collect();
        let mu = column_means(self.x, &all);
        let prob = self.problem(&all, &[]);
        let l = factor(&prob.a, lambda)?;
        let sol = cholesky_solve(&l, &prob.b);
        let w = match self.form {
            Form::Primal => sol,
            Form::Dual => {
                // w = (X − 1μᵀ)ᵀ α
                let mut w = Matrix::zeros(self.x.cols(), sol.cols());
                gemm(1.0, self.x, true, &sol, false, 0.0, &mut w);
                for t in 0..sol.cols() {
                    let s: f64 = (0..sol.rows()).map(|r| sol.get(r, t)).sum();
                    for (c, m) in mu.iter().enumerate() {
                        let v = w.get(c, t) - m * s;
                        w.set(c, t, v);
                    }
                }
                w
            }
        };
        let intercepts = (0..w.cols())
            .map(|t| prob.y_mean[t] - mu.iter().enumerate().map(|(c, m)| m * w.get(c, t)).sum::<f64>())
            .collect();
        Ok((w, intercepts))
    }
}

/// Interleaved fold assignment: row `i` belongs to fold `groups[i] % folds`.
fn fold_rows(groups: &[usize], folds: usize, f: usize) -> (Vec<usize>, Vec<usize>) {
    (0..groups.len()).partition(|&i| groups[i] % folds != f)
}

fn check_inputs(x: &Matrix, y: &Matrix, lambdas: &[f64], folds: usize) -> Result<()> {
    if x.rows() != y.rows() {
        return Err(Error::contract(format!(
            "features {}x{} and targets {}x{} have different row counts",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::param("the λ grid must be non-empty and positive"));
    }
    if folds < 2 || x.rows() < folds {
        return Err(Error::contract(format!(
            "{}-fold cross-validation needs at least {folds} rows, got {}",
            folds,
            x.rows()
        )));
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::contract("ridge inputs must be finite"));
    }
    Ok(())
}

/// Ridge fits for every column of `y`, each with its own λ chosen by `folds`-fold
/// cross-validation (mean validation R², first best in grid order). Rows are
/// assigned to folds by `groups[i] % folds`; pass the row index for plain
/// interleaving or a group id to keep groups together.
pub fn fit_ridge_grouped(
    x: &Matrix,
    y: &Matrix,
    groups: &[usize],
    lambdas: &[f64],
    folds: usize,
) -> Result<Vec<RidgeFit>> {
    fit_with_form(x, y, groups, lambdas, folds, None)
}

fn fit_with_form(
    x: &Matrix,
    y: &Matrix,
    groups: &[usize],
    lambdas: &[f64],
    folds: usize,
    form: Option<Form>,
) -> Result<Vec<RidgeFit>> {
    check_inputs(x, y, lambdas, folds)?;
    if groups.len() != x.rows() {
        return Err(Error::contract("one fold group per row is required"));
    }
    let t = y.cols();
    let sys = System::new(x, y, form);
    // scores[λ][target] = (sum of fold R², folds with a defined R²)
    let mut scores = vec![vec![(0.0, 0usize); t]; lambdas.len()];
    for f in 0..folds {
        let (fit, held) = fold_rows(groups, folds, f);
        if fit.is_empty() || held.is_empty() {
            continue;
        }
        let prob = sys.problem(&fit, &held);
        let y_held = y.select_rows(&held);
        for (li, &lambda) in lambdas.iter().enumerate() {
            let pred = prob.predict_held(lambda)?;
            for (k, score) in scores[li].iter_mut().enumerate() {
                let truth: Vec<f64> = (0..held.len()).map(|r| y_held.get(r, k)).collect();
                let guess: Vec<f64> = (0..held.len()).map(|r| pred.get(r, k)).collect();
                if let Some(v) = r2(&truth, &guess) {
                    score.0 += v;
                    score.1 += 1;
                }
            }
        }
    }
    let chosen: Vec<(usize, Option<f64>)> = (0..t)
        .map(|k| {
            let mut best: (usize, Option<f64>) = (lambdas.len() - 1, None);
            for (li, s) in scores.iter().enumerate() {
                let (sum, count) = s[k];
                if count == 0 {
                    continue;
                }
                let mean = sum / count as f64;
                if best.1.map_or(true, |b| mean > b) {
                    best = (li, Some(mean));
                }
            }
            best
        })
        .collect();
    let mut fits: Vec<Option<RidgeFit>> = vec![None; t];
    for li in 0..lambdas.len() {
        if !chosen.iter().any(|c| c.0 == li) {
            continue;
        }
        let (w, b) = sys.solve_all(lambdas[li])?;
        for k in (0..t).filter(|&k| chosen[k].0 == li) {
            fits[k] = Some(RidgeFit {
                weights: (0..w.rows()).map(|c| w.get(c, k)).collect(),
                intercept: b[k],
                lambda: lambdas[li],
                cv_r2: chosen[k].1,
            });
        }
    }
    Ok(fits.into_iter().map(|f| f.expect("every target was assigned a λ")).collect())
}

/// Ridge fit of one target with λ chosen by interleaved `folds`-fold CV.
/// `x` should already be standardised; an intercept is always fitted.
pub fn fit_ridge(x: &Matrix, y: &[f64], lambdas: &[f64], folds: usize) -> Result<RidgeFit> {
    let y = Matrix::from_vec(y.len(), 1, y.to_vec());
    let groups: Vec<usize> = (0..y.rows()).collect();
    Ok(fit_ridge_grouped(x, &y, &groups, lambdas, folds)?.remove(0))
}

/// Ridge fit of every column of `y` at a fixed λ, without cross-validation.
pub fn solve_ridge(x: &Matrix, y: &Matrix, lambda: f64) -> Result<Vec<RidgeFit>> {
    check_inputs(x, y, &[lambda], 2.min(x.rows().max(2)))?;
    let (w, b) = System::new(x, y, None).solve_all(lambda)?;
    Ok((0..y.cols())
        .map(|k| RidgeFit {
            weights: (0..w.rows()).map(|c| w.get(c, k)).collect(),
            intercept: b[k],
            lambda,
            cv_r2: None,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect())
    }

    fn linear(x: &Matrix, w: &[f64], b: f64) -> Vec<f64> {
        (0..x.rows())
            .map(|r| b + x.row(r).iter().zip(w).map(|(a, c)| a * c).sum::<f64>())
            .collect()
    }

    #[test]
    fn r2_oracles() {
        let y = [1.0, 2.0, 4.0, 7.0];
        assert_eq!(r2(&y, &y), Some(1.0));
        assert_eq!(r2(&y, &[3.5; 4]), Some(0.0));
        assert_eq!(r2(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]), None);
        assert_eq!(r2(&[1.0], &[1.0]), None);
        assert!(r2(&y, &[7.0, 4.0, 2.0, 1.0]).unwrap() < 0.0);
        assert_eq!(display_r2(-0.83), -0.05);
        assert_eq!(display_r2(0.4), 0.4);
    }

    #[test]
    fn standardizer_uses_fit_rows_and_drops_constants() {
        let x = Matrix::from_rows(&[vec![1.0, 5.0, 0.0], vec![3.0, 5.0, 2.0]]).unwrap();
        let s = Standardizer::fit(&x);
        assert_eq!(s.kept, [0, 2]);
        let t = s.transform(&x).unwrap();
        assert_eq!(t.data(), &[-1.0, -1.0, 1.0, 1.0]);
        let other = s.transform(&Matrix::from_rows(&[vec![5.0, 0.0, 1.0]]).unwrap()).unwrap();
        assert_eq!(other.data(), &[3.0, 0.0]);
    }

    #[test]
    fn realizable_target_is_fitted() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random(60, 5, &mut rng);
        let y = linear(&x, &[1.0, -2.0, 0.5, 0.0, 3.0], 0.7);
        let fit = fit_ridge(&x, &y, &DEFAULT_LAMBDAS, DEFAULT_FOLDS).unwrap();
        assert_eq!(fit.lambda, 1e-4);
        assert!(r2(&y, &fit.predict(&x).unwrap()).unwrap() >= 0.999);
    }

    #[test]
    fn small_lambda_matches_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random(40, 4, &mut rng);
        let w = [0.3, -1.2, 2.0, 0.9];
        let mut y = linear(&x, &w, -1.5);
        for v in &mut y {
            *v += rng.gen_range(-0.1..0.1);
        }
        let fit = solve_ridge(&x, &Matrix::from_vec(40, 1, y.clone()), 1e-10).unwrap().remove(0);
        // the OLS optimum has zero residual correlation with every column and the constant
        let pred = fit.predict(&x).unwrap();
        let resid: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
        assert!(resid.iter().sum::<f64>().abs() < 1e-8);
        for c in 0..4 {
            let dot: f64 = (0..40).map(|r| x.get(r, c) * resid[r]).sum();
            assert!(dot.abs() < 1e-8, "column {c}: {dot}");
        }
        for (a, b) in fit.weights.iter().zip(&w) {
            assert!((a - b).abs() < 0.2);
        }
    }

    #[test]
    fn primal_and_dual_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, p) in [(30, 8), (12, 40)] {
            let x = random(n, p, &mut rng);
            let y = random(n, 3, &mut rng);
            let groups: Vec<usize> = (0..n).collect();
            let a = fit_with_form(&x, &y, &groups, &DEFAULT_LAMBDAS, 3, Some(Form::Primal)).unwrap();
            let b = fit_with_form(&x, &y, &groups, &DEFAULT_LAMBDAS, 3, Some(Form::Dual)).unwrap();
            for (fa, fb) in a.iter().zip(&b) {
                assert_eq!(fa.lambda, fb.lambda);
                assert!((fa.intercept - fb.intercept).abs() < 1e-8);
                for (u, v) in fa.weights.iter().zip(&fb.weights) {
                    assert!((u - v).abs() < 1e-8, "{u} vs {v}");
                }
            }
        }
    }

    #[test]
    fn duplicated_columns_halve_the_effective_penalty() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random(25, 3, &mut rng);
        let y = Matrix::from_vec(25, 1, (0..25).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let mut dup = Matrix::zeros(25, 6);
        for r in 0..25 {
            dup.row_mut(r)[..3].copy_from_slice(x.row(r));
            dup.row_mut(r)[3..].copy_from_slice(x.row(r));
        }
        let single = solve_ridge(&x, &y, 0.5).unwrap().remove(0);
        let doubled = solve_ridge(&dup, &y, 1.0).unwrap().remove(0);
        let (p, q) = (single.predict(&x).unwrap(), doubled.predict(&dup).unwrap());
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-10);
        }
        // and the exactly collinear system still solves at the smallest λ
        assert!(fit_ridge(&dup, &y.into_vec(), &DEFAULT_LAMBDAS, 5).is_ok());
    }

    #[test]
    fn noise_does_not_generalise() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let x = random(300, 20, &mut rng);
            let y: Vec<f64> = (0..300).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fit = fit_ridge(&x.select_rows(&(0..200).collect::<Vec<_>>()), &y[..200], &DEFAULT_LAMBDAS, 5).unwrap();
            let test = x.select_rows(&(200..300).collect::<Vec<_>>());
            let score = r2(&y[200..], &fit.predict(&test).unwrap()).unwrap();
            assert!(score <= 0.05, "seed {seed}: {score}");
        }
    }

    #[test]
    fn feature_scale_does_not_change_standardised_fits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random(80, 6, &mut rng);
        let mut y = linear(&x, &[1.0, 0.0, -1.0, 2.0, 0.0, 0.5], 0.0);
        let mut idx: Vec<usize> = (0..80).collect();
        idx.shuffle(&mut rng);
        for v in y.iter_mut() {
            *v += rng.gen_range(-0.5..0.5);
        }
        let mut scaled = x.clone();
        scaled.data_mut().iter_mut().for_each(|v| *v *= 10.0);
        let (sa, sb) = (Standardizer::fit(&x), Standardizer::fit(&scaled));
        let a = fit_ridge(&sa.transform(&x).unwrap(), &y, &DEFAULT_LAMBDAS, 5).unwrap();
        let b = fit_ridge(&sb.transform(&scaled).unwrap(), &y, &DEFAULT_LAMBDAS, 5).unwrap();
        assert_eq!(a.lambda, b.lambda);
        let pa = a.predict(&sa.transform(&x).unwrap()).unwrap();
        let pb = b.predict(&sb.transform(&scaled).unwrap()).unwrap();
        assert!((r2(&y, &pa).unwrap() - r2(&y, &pb).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn grouped_folds_keep_groups_together() {
        let (fit, held) = fold_rows(&[0, 0, 1, 1, 2, 7], 5, 2);
        assert_eq!(held, [4, 5]);
        assert_eq!(fit, [0, 1, 2, 3]);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let x = Matrix::zeros(3, 2);
        assert!(fit_ridge(&x, &[1.0, 2.0, 3.0], &DEFAULT_LAMBDAS, 5).is_err());
        assert!(fit_ridge(&x, &[1.0, 2.0], &DEFAULT_LAMBDAS, 2).is_err());
        assert!(fit_ridge(&x, &[1.0, 2.0, 3.0], &[], 2).is_err());
    }
}
