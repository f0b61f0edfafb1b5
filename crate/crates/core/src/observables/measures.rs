use crate::compiler::TrotterPlan;
use crate::error::{Error, Result};
use crate::models::SpinConvention;
use crate::noise::ReadoutMitigation;
use crate::statevec::basis_index;

use super::backend::{Backend, EstimationMode, Executor};
use super::series::TimeSeries;

fn describe_mode(mode: EstimationMode) -> (String, String, String) {
    match mode {
        EstimationMode::Exact => ("exact".into(), "-".into(), "-".into()),
        EstimationMode::Shots { shots, seed } => ("shots".into(), shots.to_string(), seed.to_string()),
    }
}

fn describe_mitigation(backend: &Backend) -> String {
    match backend {
        Backend::Noiseless => "none".into(),
        Backend::Noisy(nb) => {
            let m = &nb.mitigation;
            let mut parts = Vec::new();
            if m.readout == ReadoutMitigation::TensoredInversion {
                parts.push("readout_inversion".to_string());
            }
            if let Some(z) = &m.zne {
                parts.push(format!("zne{:?}/{:?}", z.fold_factors, z.fit).to_lowercase());
            }
            if let Some(t) = m.twirling {
                parts.push(format!("twirl x{}", t.n_twirls));
            }
            if m.dd != crate::noise::DdScheme::Off {
                parts.push("dd_xx".into());
            }
            if parts.is_empty() {
                "none".into()
            } else {
                parts.join("+")
            }
        }
    }
}

fn base_series(times: Vec<f64>, est: Vec<(f64, f64)>, mode: EstimationMode, backend: &Backend) -> Result<TimeSeries> {
    let (values, errors) = est.into_iter().unzip();
    let (m, shots, seed) = describe_mode(mode);
    Ok(TimeSeries::new(times, values, errors)?
        .with_meta("mode", m)
        .with_meta("shots", shots)
        .with_meta("seed", seed)
        .with_meta("backend", backend.describe())
        .with_meta("mitigation", describe_mitigation(backend)))
}

/// Clamps every value into `[lo, hi]`; returns how many moved.
fn clamp_values(est: &mut [(f64, f64)], lo: f64, hi: f64) -> usize {
    let mut moved = 0;
    for (v, _) in est.iter_mut() {
        let c = v.clamp(lo, hi);
        if c != *v {
            moved += 1;
            *v = c;
        }
    }
    moved
}

/// `R(t) = |<psi0|U(t)|psi0>|^2` at every Trotter step `0..=n_steps`.
///
/// `psi0` is a basis label, so `R` is the probability of re-measuring it.
/// Mitigated values outside `[0, 1]` are clamped; the count is recorded in
/// the `clamped` metadata entry.
pub fn return_probability(plan: &TrotterPlan, psi0: &str, mode: EstimationMode, backend: &Backend) -> Result<TimeSeries> {
    if psi0.len() != plan.n_qubits() {
        return Err(Error::WidthMismatch { left: plan.n_qubits(), right: psi0.len() });
    }
    let idx = basis_index(psi0)?;
    let ex = Executor::new(mode, backend)?;
    let steps = ex.measure_steps(plan, &[], psi0, &[], &[])?;
    let mut est = steps
        .iter()
        .map(|s| Ok(s.estimate(|x| vec![x.probability(idx)])?[0]))
        .collect::<Result<Vec<_>>>()?;
    let clamped = clamp_values(&mut est, 0.0, 1.0);
    Ok(base_series(plan.times(), est, mode, backend)?
        .with_meta("observable", "return_probability")
        .with_meta("psi0", psi0)
        .with_meta("clamped", clamped))
}

/// `<S^z_i(t)>` for every site, one series per qubit, scaled by the spin
/// convention (0.5 for `half`).
pub fn magnetization_series(
    plan: &TrotterPlan,
    psi0: &str,
    mode: EstimationMode,
    backend: &Backend,
    convention: SpinConvention,
) -> Result<Vec<TimeSeries>> {
    let n = plan.n_qubits();
    if psi0.len() != n {
        return Err(Error::WidthMismatch { left: n, right: psi0.len() });
    }
    basis_index(psi0)?;
    let scale = convention.scale();
    let ex = Executor::new(mode, backend)?;
    let steps = ex.measure_steps(plan, &[], psi0, &[], &[])?;
    let per_step = steps
        .iter()
        .map(|s| s.estimate(|x| (0..n).map(|q| x.z_expectation(q)).collect()))
        .collect::<Result<Vec<_>>>()?;
    (0..n)
        .map(|q| {
            let mut est: Vec<(f64, f64)> = per_step.iter().map(|v| (v[q].0 * scale, v[q].1 * scale)).collect();
            let clamped = clamp_values(&mut est, -scale, scale);
            Ok(base_series(plan.times(), est, mode, backend)?
                .with_meta("observable", "magnetization")
                .with_meta("site", q)
                .with_meta("convention", format!("{convention:?}").to_lowercase())
                .with_meta("psi0", psi0)
                .with_meta("clamped", clamped))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::DenseEvolution;
    use crate::models::{build_gross_neveu, build_hyperbolic_ising, GrossNeveuParams, HyperbolicIsingParams};
    use crate::statevec::StateVector;

    fn gn(l: usize, nf: usize, m: f64, g2: f64, dt: f64, steps: usize) -> TrotterPlan {
        let (h, layout) = build_gross_neveu(&GrossNeveuParams::new(l, nf, m, g2)).unwrap();
        TrotterPlan::with_layout(h, dt, steps, &layout).unwrap()
    }

    #[test]
    fn r_starts_at_one_and_stays_in_range() {
        let plan = gn(2, 2, 0.0, 1.0, 0.2, 5);
        let r = return_probability(&plan, "0010", EstimationMode::Exact, &Backend::Noiseless).unwrap();
        assert_eq!(r.len(), 6);
        assert!((r.values[0] - 1.0).abs() < 1e-12);
        assert!(r.values.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(r.std_errors.iter().all(|&e| e == 0.0));
        assert_eq!(r.metadata["observable"], "return_probability");
    }

    #[test]
    fn exact_mode_agrees_with_overlap_of_trotter_state() {
        let plan = gn(2, 1, 0.0, 0.0, 0.1, 4);
        let r = return_probability(&plan, "01", EstimationMode::Exact, &Backend::Noiseless).unwrap();
        let mut psi = StateVector::init_basis("01").unwrap();
        let c = crate::compiler::trotterize(&plan).unwrap();
        psi.run_circuit(&c).unwrap();
        let expect = StateVector::init_basis("01").unwrap().overlap(&psi).unwrap().norm_sqr();
        assert!((r.values[4] - expect).abs() < 1e-12);
    }

    #[test]
    fn trotter_close_to_exact_oracle() {
        // Pure hopping on two qubits: the Trotter step is exact up to the
        // (empty) commutator structure of a single-term-pair Hamiltonian.
        let plan = gn(2, 1, 0.0, 0.0, 0.05, 20);
        let r = return_probability(&plan, "01", EstimationMode::Exact, &Backend::Noiseless).unwrap();
        let d = DenseEvolution::build(plan.hamiltonian()).unwrap();
        let psi0 = StateVector::init_basis("01").unwrap();
        for (t, v) in r.times.iter().zip(&r.values) {
            let e = d.return_probability(&psi0, *t).unwrap();
            assert!((v - e).abs() < 0.05 * t.max(1e-3), "t={t}: {v} vs {e}");
        }
    }

    #[test]
    fn exact_mode_ignores_seed() {
        let plan = gn(2, 2, 0.0, 1.0, 0.2, 3);
        let a = return_probability(&plan, "0010", EstimationMode::Exact, &Backend::Noiseless).unwrap();
        let b = return_probability(&plan, "0010", EstimationMode::Exact, &Backend::Noiseless).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shots_mode_binomial_errors() {
        let plan = gn(2, 2, 0.0, 1.0, 0.2, 5);
        let ex = return_probability(&plan, "0010", EstimationMode::Exact, &Backend::Noiseless).unwrap();
        let sh = return_probability(&plan, "0010", EstimationMode::Shots { shots: 4000, seed: 11 }, &Backend::Noiseless)
            .unwrap();
        assert_eq!(sh.values[0], 1.0);
        for i in 1..6 {
            let p = sh.values[i];
            assert!((sh.std_errors[i] - (p * (1.0 - p) / 4000.0).sqrt()).abs() < 1e-15);
            assert!((p - ex.values[i]).abs() < 5.0 * sh.std_errors[i].max(1e-3));
        }
        let again =
            return_probability(&plan, "0010", EstimationMode::Shots { shots: 4000, seed: 11 }, &Backend::Noiseless).unwrap();
        assert_eq!(sh, again);
    }

    #[test]
    fn rejects_bad_state() {
        let plan = gn(2, 2, 0.0, 1.0, 0.2, 1);
        assert!(return_probability(&plan, "001", EstimationMode::Exact, &Backend::Noiseless).is_err());
        assert!(return_probability(&plan, "00a0", EstimationMode::Exact, &Backend::Noiseless).is_err());
    }

    #[test]
    fn magnetization_initial_and_bounded() {
        let (h, layout) = build_hyperbolic_ising(&HyperbolicIsingParams::new(5, 2.0, 1.05, 0.0, 2.0)).unwrap();
        let plan = TrotterPlan::with_layout(h, 0.1, 6, &layout).unwrap();
        let m = magnetization_series(&plan, "00000", EstimationMode::Exact, &Backend::Noiseless, SpinConvention::Half)
            .unwrap();
        assert_eq!(m.len(), 5);
        for s in &m {
            assert!((s.values[0] - 0.5).abs() < 1e-12);
            assert!(s.values.iter().all(|v| v.abs() <= 0.5));
        }
        let p = magnetization_series(&plan, "00000", EstimationMode::Exact, &Backend::Noiseless, SpinConvention::Pauli)
            .unwrap();
        assert!((p[2].values[3] - 2.0 * m[2].values[3]).abs() < 1e-12);
    }

    #[test]
    fn planar_chain_reflection_symmetric() {
        let (h, _) = build_hyperbolic_ising(&HyperbolicIsingParams::new(5, 2.0, 1.05, 0.0, f64::INFINITY)).unwrap();
        let d = DenseEvolution::build(&h).unwrap();
        let psi0 = StateVector::init_basis("00000").unwrap();
        for q in 0..5 {
            let mut z = crate::pauli::PauliSum::new(5);
            z.push(crate::pauli::PauliTerm::real(5, 1.0, [(q, crate::pauli::Pauli::Z)]).unwrap()).unwrap();
            let mut zr = crate::pauli::PauliSum::new(5);
            zr.push(crate::pauli::PauliTerm::real(5, 1.0, [(4 - q, crate::pauli::Pauli::Z)]).unwrap()).unwrap();
            let a = d.observable_series(&psi0, &z, &[0.3, 0.9]).unwrap();
            let b = d.observable_series(&psi0, &zr, &[0.3, 0.9]).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }
}
