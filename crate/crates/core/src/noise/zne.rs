//! Zero-noise extrapolation by global unitary folding.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::model::{FitKind, NoiseModel, ZneConfig};
use super::trajectory::noisy_expectation;
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::rng::derive_seed;
use crate::statevec::StateVector;

/// `C (C^dagger C)^((lambda - 1) / 2)`. Measurements are dropped.
pub fn fold_global(circuit: &Circuit, lambda: usize) -> Result<Circuit> {
    if lambda == 0 || lambda % 2 == 0 {
        return Err(Error::InvalidParameter(format!("fold factor {lambda} must be odd and >= 1")));
    }
    let mut base = Circuit::new(circuit.n_qubits());
    base.metadata = circuit.metadata.clone();
    base.extend(circuit.gates().iter().filter(|g| !matches!(g, Gate::Measure(_))).cloned())?;
    let inverse = base.inverse();
    let mut out = base.clone();
    for _ in 0..(lambda - 1) / 2 {
        out.append(&inverse)?;
        out.append(&base)?;
    }
    out.metadata.insert("fold_factor".into(), lambda.to_string());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub kind: FitKind,
    /// Extrapolated value at zero noise.
    pub value_at_zero: f64,
    /// Polynomial coefficients in ascending order; for the exponential fit
    /// `y = sign * exp(c0 + c1 * lambda)`.
    pub coefficients: Vec<f64>,
    pub residual_rms: f64,
}

fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    let mut distinct = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < degree + 1 {
        return Err(Error::FitFailure(format!(
            "degree-{degree} fit needs {} distinct noise levels, got {}",
            degree + 1,
            distinct.len()
        )));
    }
    let a = DMatrix::from_fn(xs.len(), degree + 1, |r, c| xs[r].powi(c as i32));
    let b = DVector::from_column_slice(ys);
    let sol = a.svd(true, true).solve(&b, 1e-14).map_err(|e| Error::FitFailure(e.to_string()))?;
    let coeffs: Vec<f64> = sol.iter().copied().collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::FitFailure("non-finite coefficients".into()));
    }
    Ok(coeffs)
}

fn eval_poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Least-squares fit of `ys` against noise factors `xs`, evaluated at zero.
pub fn extrapolate(xs: &[f64], ys: &[f64], kind: FitKind) -> Result<FitResult> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::FitFailure(format!("{} noise levels for {} values", xs.len(), ys.len())));
    }
    if ys.iter().chain(xs).any(|v| !v.is_finite()) {
        return Err(Error::FitFailure("non-finite data point".into()));
    }
    let (value_at_zero, coefficients, fitted): (f64, Vec<f64>, Vec<f64>) = match kind {
        FitKind::Linear | FitKind::Quadratic => {
            let degree = if kind == FitKind::Linear { 1 } else { 2 };
            let c = polyfit(xs, ys, degree)?;
            let fitted = xs.iter().map(|&x| eval_poly(&c, x)).collect();
            (c[0], c, fitted)
        }
        FitKind::Exponential => {
            let sign = ys[0].signum();
            if ys.iter().any(|&y| y == 0.0 || y.signum() != sign) {
                return Err(Error::FitFailure("exponential fit needs values of one strict sign".into()));
            }
            let logs: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
            let c = polyfit(xs, &logs, 1)?;
            let fitted = xs.iter().map(|&x| sign * eval_poly(&c, x).exp()).collect();
            (sign * c[0].exp(), c, fitted)
        }
    };
    let residual_rms =
        (ys.iter().zip(&fitted).map(|(y, f): (&f64, &f64)| (y - f).powi(2)).sum::<f64>() / ys.len() as f64).sqrt();
    Ok(FitResult { kind, value_at_zero, coefficients, residual_rms })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZnePoint {
    pub fold_factor: usize,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZneResult {
    pub mitigated: f64,
    /// Propagated from the per-level standard errors.
    pub std_error: f64,
    pub points: Vec<ZnePoint>,
    pub fit: FitResult,
}

/// Fits per-level estimates and propagates their errors through the fit by
/// central differences.
pub fn extrapolate_points(points: Vec<ZnePoint>, kind: FitKind) -> Result<ZneResult> {
    let xs: Vec<f64> = points.iter().map(|p| p.fold_factor as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.value).collect();
    let fit = extrapolate(&xs, &ys, kind)?;
    let mut var = 0.0;
    for (i, p) in points.iter().enumerate() {
        if p.std_error == 0.0 {
            continue;
        }
        let h = 1e-6 * (1.0 + ys[i].abs());
        let shifted = |d: f64| {
            let mut y = ys.clone();
            y[i] += d;
            extrapolate(&xs, &y, kind).map(|f| f.value_at_zero)
        };
        let deriv = (shifted(h)? - shifted(-h)?) / (2.0 * h);
        var += (deriv * p.std_error).powi(2);
    }
    Ok(ZneResult { mitigated: fit.value_at_zero, std_error: var.sqrt(), points, fit })
}

/// Runs `circuit` folded at each configured factor and extrapolates the
/// trajectory-averaged expectation of `observable` to zero noise.
///
/// `shots` is the number of noisy trajectories per fold level; each
/// contributes the exact expectation on its final state. Level `lambda`
/// draws from seeds derived from `(seed, lambda)`.
pub fn zne_run(
    circuit: &Circuit,
    state0: &StateVector,
    noise: &NoiseModel,
    config: &ZneConfig,
    observable: &PauliSum,
    shots: u64,
    seed: u64,
) -> Result<ZneResult> {
    config.validate()?;
    let points = config
        .fold_factors
        .iter()
        .map(|&lambda| {
            let folded = fold_global(circuit, lambda)?;
            let (value, std_error) =
                noisy_expectation(&folded, state0, noise, observable, shots, derive_seed(seed, &[lambda as u64]))?;
            Ok(ZnePoint { fold_factor: lambda, value, std_error })
        })
        .collect::<Result<Vec<_>>>()?;
    extrapolate_points(points, config.fit)
}
