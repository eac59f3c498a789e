use std::f64::consts::PI;

use echolab::analysis::freeze_plateau;
use echolab::dynamics::{apply, dense_matrix, CoupledRotatorFloquet, KickedRotatorFloquet, KickedTopFloquet};
use echolab::echoes::*;
use echolab::qstate::{
    compass_ensemble, gaussian_torus, spin_coherent, Basis, PureEnsemble, StateVector, TorusGrid, WavepacketSpec,
};
use echolab::{Error, C64};
use faer::Mat;
use proptest::prelude::*;

fn packet(g: &TorusGrid, x: f64, p: f64) -> StateVector {
    gaussian_torus(g, &WavepacketSpec::coherent(g, x, p).unwrap()).unwrap()
}

fn mat_vec(m: &Mat<C64>, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..v.len()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

#[test]
fn identical_engines_give_a_perfect_echo() {
    let g = TorusGrid::new(256).unwrap();
    let f = KickedRotatorFloquet::new(g, 9.95).unwrap();
    let s = loschmidt(&packet(&g, 1.0, 2.0), &f, &f, 50).unwrap();
    assert!(s.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
    assert_eq!(s.times.len(), 51);
}

#[test]
fn loschmidt_matches_dense_matrix_powers() {
    let n = 128;
    let g = TorusGrid::new(n).unwrap();
    // δK·N = √(0.5/0.024) puts Γ near 0.5
    let dk = (0.5f64 / 0.024).sqrt() / n as f64;
    let f0 = KickedRotatorFloquet::new(g, 9.95).unwrap();
    let f = f0.with_kick(9.95 + dk).unwrap();
    let (u0, u) = (dense_matrix(&f0).unwrap(), dense_matrix(&f).unwrap());
    let psi = packet(&g, 2.0, 1.0);
    let s = loschmidt(&psi, &f0, &f, 5).unwrap();
    let (mut a, mut b) = (psi.amplitudes().to_vec(), psi.amplitudes().to_vec());
    for t in 1..=5 {
        a = mat_vec(&u0, &a);
        b = mat_vec(&u, &b);
        let fa: C64 = b.iter().zip(&a).map(|(x, y)| x.conj() * y).sum();
        assert!((s.values[t] - fa.norm_sqr()).abs() < 1e-10);
        assert!((s.amplitude.as_ref().unwrap()[t] - fa).norm() < 1e-10);
    }
}

#[test]
fn prepared_echo_at_zero_is_the_plain_echo() {
    let g = TorusGrid::new(256).unwrap();
    let f0 = KickedRotatorFloquet::new(g, 9.95).unwrap();
    let f = f0.with_kick(9.96).unwrap();
    let psi = packet(&g, 3.0, 1.0);
    let a = loschmidt(&psi, &f0, &f, 30).unwrap();
    let b = prepared_echo(&psi, &f0, &f, 0, 30).unwrap();
    assert_eq!(a.values, b.values);
}

#[test]
fn prepared_echo_uses_the_evolved_state() {
    let g = TorusGrid::new(128).unwrap();
    let f0 = KickedRotatorFloquet::new(g, 9.95).unwrap();
    let f = f0.with_kick(9.99).unwrap();
    let psi = packet(&g, 3.0, 1.0);
    let b = prepared_echo(&psi, &f0, &f, 4, 10).unwrap();
    let a = loschmidt(&apply(&f0, &psi, 4).unwrap(), &f0, &f, 10).unwrap();
    assert_eq!(a.values, b.values);
}

#[test]
fn mismatched_engines_are_rejected() {
    let g = TorusGrid::new(64).unwrap();
    let f0 = KickedRotatorFloquet::new(g, 9.95).unwrap();
    let f = KickedRotatorFloquet::new(TorusGrid::new(32).unwrap(), 9.95).unwrap();
    assert!(matches!(loschmidt(&packet(&g, 1.0, 1.0), &f0, &f, 3), Err(Error::Basis(_))));
}

#[test]
fn unperturbed_ensemble_has_no_variance() {
    let g = TorusGrid::new(128).unwrap();
    let f = KickedRotatorFloquet::new(g, 9.95).unwrap();
    let sampler = InitialSampler::TorusCoherent { grid: g };
    let st = ensemble_stats(&sampler, &f, &f, 20, 8, 4).unwrap();
    assert!(st.variance.iter().all(|v| v.abs() < 1e-20));
    assert!(st.mean.iter().all(|m| (m - 1.0).abs() < 1e-10));
    assert!(ensemble_stats(&sampler, &f, &f, 20, 1, 4).is_err());
}

#[test]
fn ensembles_are_reproducible_per_seed() {
    let g = TorusGrid::new(128).unwrap();
    let f0 = KickedRotatorFloquet::new(g, 9.95).unwrap();
    let f = f0.with_kick(10.0).unwrap();
    let sampler = InitialSampler::TorusCoherent { grid: g };
    let a = ensemble_stats(&sampler, &f0, &f, 10, 6, 11).unwrap();
    let b = ensemble_stats(&sampler, &f0, &f, 10, 6, 11).unwrap();
    assert_eq!(a, b);
    let c = ensemble_stats(&sampler, &f0, &f, 10, 6, 12).unwrap();
    assert_ne!(a.mean, c.mean);
    // sample i is independent of how many samples are drawn
    assert_eq!(sampler.sample(11, 3).unwrap(), sampler.sample(11, 3).unwrap());
}

#[test]
fn chaotic_top_sampler_avoids_islands() {
    let sampler = InitialSampler::SpinCoherentChaotic { s: 20.0, k: 3.9 };
    let psi = sampler.sample(1, 0).unwrap();
    assert_eq!(psi.dim(), 41);
    assert!(sampler.describe().contains("chaotic"));
}

#[test]
fn spectral_echo_matches_direct_stepping() {
    let (s, k) = (30.0, 13.1);
    let f0 = KickedTopFloquet::new(s, k, 0.0).unwrap();
    let f = f0.perturbed(0.01).unwrap();
    let se = SpectralEcho::new(&f0, &f).unwrap();
    let psi = spin_coherent(s, 1.2, 0.3).unwrap();
    let times: Vec<u64> = (0..=25).collect();
    let spec = se.echo(&psi, 0, &times).unwrap();
    let direct = loschmidt(&psi, &f0, &f, 25).unwrap();
    for (a, b) in spec.values.iter().zip(&direct.values) {
        assert!((a - b).abs() < 1e-10);
    }
    let prep = se.echo(&psi, 7, &times).unwrap();
    let direct = prepared_echo(&psi, &f0, &f, 7, 25).unwrap();
    for (a, b) in prep.values.iter().zip(&direct.values) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn spectral_ensemble_matches_direct_ensemble() {
    let g = TorusGrid::new(64).unwrap();
    let f0 = KickedRotatorFloquet::new(g, 9.95).unwrap();
    let f = f0.with_kick(10.0).unwrap();
    let sampler = InitialSampler::TorusCoherent { grid: g };
    let times: Vec<u64> = (0..=12).collect();
    let a = SpectralEcho::new(&f0, &f).unwrap().ensemble(&sampler, 5, 3, 0, &times).unwrap();
    let b = ensemble_stats(&sampler, &f0, &f, 12, 5, 3).unwrap();
    for (x, y) in a.mean.iter().zip(&b.mean) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn mixed_echo_of_a_single_state_is_the_pure_echo() {
    let g = TorusGrid::new(128).unwrap();
    let f0 = KickedRotatorFloquet::new(g, 9.95).unwrap();
    let f = f0.with_kick(10.0).unwrap();
    let psi = packet(&g, 2.0, 2.0);
    let ens = PureEnsemble::new(vec![1.0], vec![psi.clone()]).unwrap();
    let m = mixed_loschmidt(&ens, &f0, &f, 10).unwrap();
    let l = loschmidt(&psi, &f0, &f, 10).unwrap();
    for (a, b) in m.values.iter().zip(&l.values) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn compass_mixture_echo_starts_at_one() {
    let g = TorusGrid::new(1024).unwrap();
    let f0 = KickedRotatorFloquet::new(g, 9.95).unwrap();
    let spec = WavepacketSpec::coherent(&g, PI, PI).unwrap();
    let ens = compass_ensemble(&g, &spec, PI / 2.0, PI / 2.0).unwrap();
    let m = mixed_loschmidt(&ens, &f0, &f0, 5).unwrap();
    assert!(m.values.iter().all(|v| (v - 1.0).abs() < 1e-6));
}

#[test]
fn zero_displacement_is_a_perfect_echo() {
    let g = TorusGrid::new(256).unwrap();
    let f0 = KickedRotatorFloquet::new(g, 10.09).unwrap();
    let s = displacement_echo(&packet(&g, 1.0, 1.0), &f0, &DisplacementSpec::momentum(0.0), 20).unwrap();
    assert!(s.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn fractional_spatial_shift_is_incommensurate() {
    let g = TorusGrid::new(64).unwrap();
    let f0 = KickedRotatorFloquet::new(g, 1.0).unwrap();
    let r = displacement_echo(&packet(&g, 1.0, 1.0), &f0, &DisplacementSpec::spatial(0.5), 3);
    assert!(matches!(r, Err(Error::Incommensurate(_))));
    assert!(displacement_echo(&packet(&g, 1.0, 1.0), &f0, &DisplacementSpec::spatial(2.0), 3).is_ok());
}

#[test]
fn displacement_echo_matches_dense_oracle() {
    let n = 128;
    let g = TorusGrid::new(n).unwrap();
    let f0 = KickedRotatorFloquet::new(g, 5.0).unwrap();
    let u = dense_matrix(&f0).unwrap();
    let psi = packet(&g, 2.0, 1.0);
    let shift = |v: &[C64]| -> Vec<C64> { (0..n).map(|l| v[(l + n - 4) % n]).collect() };
    let boost = |v: &[C64]| -> Vec<C64> { (0..n).map(|l| v[l] * C64::from_polar(1.0, 2.5 * g.x(l))).collect() };
    let spatial = displacement_echo(&psi, &f0, &DisplacementSpec::spatial(4.0), 6).unwrap();
    let momentum = displacement_echo(&psi, &f0, &DisplacementSpec::momentum(2.5), 6).unwrap();
    for (d, s) in [(&shift as &dyn Fn(&[C64]) -> Vec<C64>, &spatial), (&boost, &momentum)] {
        let mut a = psi.amplitudes().to_vec();
        let mut b = d(&a);
        for t in 0..=6 {
            if t > 0 {
                a = mat_vec(&u, &a);
                b = mat_vec(&u, &b);
            }
            let da = d(&a);
            let z: C64 = b.iter().zip(&da).map(|(x, y)| x.conj() * y).sum();
            assert!((s.values[t] - z.norm_sqr()).abs() < 1e-10);
        }
    }
}

#[test]
fn freeze_plateau_formula() {
    assert!((freeze_plateau(0.0, 0.1, 100) - 1.0).abs() < 1e-15);
    assert!((freeze_plateau(1.0, 0.1, 100) - 0.01).abs() < 1e-15);
    let v = freeze_plateau(0.5, 0.02, 16384);
    let want = (-(0.5f64 * 0.02).powi(2) / 2.0).exp() * 4.0 / (PI * PI);
    assert!((v - want).abs() < 1e-15);
}

#[test]
fn boltzmann_echo_is_perfect_without_coupling_or_perturbation() {
    let g = TorusGrid::new(32).unwrap();
    let hf = CoupledRotatorFloquet::new(g, g, 10.0, 10.0, 0.0).unwrap();
    let hb = CoupledRotatorFloquet::backward(g, g, 10.0, 10.0, 0.0).unwrap();
    let s = boltzmann_echo(&packet(&g, 1.0, 2.0), EnvSampler::Random, &hf, &hb, 15, 3, 1).unwrap();
    assert!(s.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
}

#[test]
fn boltzmann_echo_matches_explicit_reversal() {
    let g = TorusGrid::new(16).unwrap();
    let hf = CoupledRotatorFloquet::new(g, g, 10.0, 7.0, 0.01).unwrap();
    let hb = CoupledRotatorFloquet::backward(g, g, 10.05, 7.0, 0.01).unwrap();
    let psi1 = packet(&g, 1.0, 2.0);
    let times = [0u64, 3, 8];
    let s = boltzmann_echo_at(&psi1, EnvSampler::Gaussian, &hf, &hb, &times, 2, 5).unwrap();
    let (uf, ub) = (dense_matrix(&hf).unwrap(), dense_matrix(&hb).unwrap());
    let sampler = InitialSampler::TorusCoherent { grid: g };
    for (ti, &t) in times.iter().enumerate() {
        let mut m = 0.0;
        for e in 0..2 {
            let env = sampler.sample(5, e).unwrap();
            let mut v = StateVector::product(&psi1, &env).unwrap().into_amplitudes();
            for _ in 0..t {
                v = mat_vec(&uf, &v);
            }
            for _ in 0..t {
                v = mat_vec(&ub, &v);
            }
            // project the first particle on ψ1, trace the second
            for i2 in 0..16 {
                let a: C64 = (0..16).map(|i1| psi1.amplitudes()[i1].conj() * v[i1 * 16 + i2]).sum();
                m += a.norm_sqr() / 2.0;
            }
        }
        assert!((s.values[ti] - m).abs() < 1e-10, "t={t}");
    }
}

#[test]
fn boltzmann_rejects_unsorted_times() {
    let g = TorusGrid::new(8).unwrap();
    let hf = CoupledRotatorFloquet::new(g, g, 1.0, 1.0, 0.0).unwrap();
    let hb = CoupledRotatorFloquet::backward(g, g, 1.0, 1.0, 0.0).unwrap();
    let r = boltzmann_echo_at(&packet(&g, 1.0, 1.0), EnvSampler::Random, &hf, &hb, &[3, 2], 1, 0);
    assert!(r.is_err());
}

#[test]
fn threshold_times() {
    let times: Vec<u64> = (0..10).collect();
    let flat = EchoSeries::from_values(times.clone(), vec![1.0; 10], EchoMeta::new("x"));
    assert_eq!(threshold_time(&flat, 0.5).unwrap(), 10);
    let decay = EchoSeries::from_values(times.clone(), times.iter().map(|&t| (-(t as f64)).exp()).collect(), EchoMeta::new("x"));
    assert_eq!(threshold_time(&decay, (-3.0f64).exp()).unwrap(), 3);
    assert!(threshold_time(&decay, 1.5).is_err());
}

#[test]
fn response_spectrum_peaks() {
    let n = 200u64;
    let times: Vec<u64> = (0..=n).collect();
    let flat = EchoSeries::from_amplitudes(times.clone(), vec![C64::new(1.0, 0.0); times.len()], EchoMeta::new("x"));
    let om: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.02).collect();
    let s = response_spectrum(&flat, &om).unwrap();
    let peak = (0..om.len()).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
    assert_eq!(om[peak], 0.0);

    let w0 = 0.4;
    let osc = EchoSeries::from_amplitudes(
        times.clone(),
        times.iter().map(|&t| C64::from_polar(1.0, w0 * t as f64)).collect(),
        EchoMeta::new("x"),
    );
    let s = response_spectrum(&osc, &om).unwrap();
    let peak = (0..om.len()).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
    assert!((om[peak] - w0).abs() < 1e-9);

    let bare = EchoSeries::from_values(times, vec![1.0; n as usize + 1], EchoMeta::new("x"));
    assert!(matches!(response_spectrum(&bare, &om), Err(Error::MissingAmplitude)));
}

#[test]
fn series_serialize_without_amplitudes() {
    let s = EchoSeries::from_amplitudes(vec![0, 1], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.5)], EchoMeta::new("x").with("K", 1.0));
    let j = serde_json::to_string(&s).unwrap();
    assert!(!j.contains("amplitude"));
    let back: EchoSeries = serde_json::from_str(&j).unwrap();
    assert_eq!(back.values, vec![1.0, 0.25]);
}

#[test]
fn random_sampler_relabels_to_the_basis() {
    let g = TorusGrid::new(16).unwrap();
    let s = InitialSampler::Random { basis: Basis::TorusPosition(g) };
    assert_eq!(s.sample(1, 2).unwrap().basis(), Basis::TorusPosition(g));
    let listed = InitialSampler::Listed(vec![]);
    assert!(listed.sample(0, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn echoes_stay_in_the_unit_interval(seed in any::<u64>(), dk in -0.5..0.5f64) {
        let g = TorusGrid::new(64).unwrap();
        let f0 = KickedRotatorFloquet::new(g, 9.95).unwrap();
        let f = f0.with_kick(9.95 + dk).unwrap();
        let psi = InitialSampler::TorusCoherent { grid: g }.sample(seed, 0).unwrap();
        let s = loschmidt(&psi, &f0, &f, 20).unwrap();
        prop_assert!(s.values.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((s.values[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn echo_is_symmetric_under_swapping_engines(seed in any::<u64>(), dk in -0.1..0.1f64) {
        let g = TorusGrid::new(32).unwrap();
        let f0 = KickedRotatorFloquet::new(g, 5.0).unwrap();
        let f = f0.with_kick(5.0 + dk).unwrap();
        let psi = InitialSampler::TorusCoherent { grid: g }.sample(seed, 0).unwrap();
        let a = loschmidt(&psi, &f0, &f, 10).unwrap();
        let b = loschmidt(&psi, &f, &f0, 10).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}
