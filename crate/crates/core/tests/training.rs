use num_complex::Complex64;
use proptest::prelude::*;

use beamtrain::antenna::{Codebook, GaussianPattern};
use beamtrain::channel::{generate_channel, strip_los, ChannelGenParams, Cluster, OmniChannel, PolarizationMatrix, Ray};
use beamtrain::effective::{BeamSelection, Sampling};
use beamtrain::rate::RateConfig;
use beamtrain::training::{top_k_products, BeamScoreSet, Method, TrainingContext};

struct Setup {
    codebook: Codebook,
    pattern: GaussianPattern,
    sampling: Sampling,
    rate: RateConfig,
}

fn setup(rings: &[usize]) -> Setup {
    Setup {
        codebook: Codebook::build(90f64.to_radians(), rings).unwrap(),
        pattern: GaussianPattern::calibrated(60f64.to_radians()).unwrap(),
        sampling: Sampling::new(2.56e9, 64).unwrap(),
        rate: RateConfig::from_db(20.0, 2, 64).unwrap(),
    }
}

fn channel(seed: u64) -> OmniChannel {
    strip_los(&generate_channel(&ChannelGenParams::default(), seed).unwrap()).unwrap()
}

fn context<'a>(s: &'a Setup, ch: &'a OmniChannel) -> TrainingContext<'a> {
    TrainingContext::new(ch, &s.codebook, s.pattern, s.sampling, s.rate).unwrap()
}

#[test]
fn kbest_monotone_bounded_and_exhaustive_at_full_k() {
    let s = setup(&[1, 2]);
    let full = s.codebook.len().pow(4);
    for seed in 0..6 {
        let ch = channel(seed);
        let ctx = context(&s, &ch);
        let es = ctx.exhaustive_search();
        let sls = ctx.siso_sls().unwrap();
        assert!(sls.rate <= es.rate);

        let ks: Vec<usize> = (1..=full).collect();
        let sweep = ctx.k_best_sweep(&ks).unwrap();
        for w in sweep.windows(2) {
            assert!(w[1].rate >= w[0].rate);
        }
        for r in &sweep {
            assert!(r.rate <= es.rate);
            assert_eq!(r.n_siso_iter, 4 * s.codebook.len());
        }
        let last = sweep.last().unwrap();
        assert_eq!(last.rate, es.rate);
        assert_eq!(last.selection, es.selection);
        assert_eq!(sweep[0].selection, sls.selection);
    }
}

#[test]
fn sweep_equals_standalone_runs() {
    let s = setup(&[1, 6]);
    let ch = channel(11);
    let ctx = context(&s, &ch);
    let ks = [1, 3, 7, 20, 100];
    let sweep = ctx.k_best_sweep(&ks).unwrap();
    for (k, r) in ks.iter().zip(&sweep) {
        assert_eq!(*r, ctx.k_best_training(*k).unwrap());
        assert_eq!(r.n_mimo_iter, *k);
        assert_eq!(r.method, Method::Kbest);
    }
}

#[test]
fn k_beyond_combinations_is_capped() {
    let s = setup(&[1, 2]);
    let ch = channel(3);
    let ctx = context(&s, &ch);
    let r = ctx.k_best_training(1000).unwrap();
    assert_eq!(r.n_mimo_iter, 81);
    assert_eq!(r.rate, ctx.exhaustive_search().rate);
    assert!(ctx.k_best_training(0).is_err());
}

#[test]
fn iteration_counts() {
    let s = setup(&[1, 6]);
    let ch = channel(0);
    let ctx = context(&s, &ch);
    let es = ctx.exhaustive_search();
    assert_eq!((es.n_siso_iter, es.n_mimo_iter), (0, 2401));
    let sls = ctx.siso_sls().unwrap();
    assert_eq!((sls.n_siso_iter, sls.n_mimo_iter), (28, 1));
    let kb = ctx.k_best_training(5).unwrap();
    assert_eq!(kb.total_iter(), 33);
}

#[test]
fn sls_locks_onto_single_ray() {
    let s = setup(&[1, 6]);
    let target = s.codebook.get(5).unwrap();
    let ray = Ray { delay: 0.0, amplitude: Complex64::new(1.0, 0.0), aod: target, aoa: target };
    let ch = OmniChannel::new(vec![Cluster {
        toa: 0.0,
        center_aod: target,
        center_aoa: target,
        pol: PolarizationMatrix::identity(),
        rays: vec![ray],
        is_los: false,
    }])
    .unwrap();
    let ctx = context(&s, &ch);
    let sls = ctx.siso_sls().unwrap();
    assert_eq!(sls.selection, BeamSelection::new([5, 5], [5, 5]));
    let es = ctx.exhaustive_search();
    assert_eq!(es.selection, sls.selection);
}

#[test]
fn equal_scores_pick_first_beams() {
    let scores = BeamScoreSet::new(vec![vec![0.5; 7]; 4]).unwrap();
    assert_eq!(scores.argmax(), vec![0, 0, 0, 0]);
    let top = top_k_products(&scores, 3).unwrap();
    assert_eq!(top[0].indices, vec![0, 0, 0, 0]);
    assert_eq!(top[1].indices, vec![0, 0, 0, 1]);
    assert_eq!(top[2].indices, vec![0, 0, 0, 2]);
}

#[test]
fn rejects_other_rf_chain_counts() {
    let s = setup(&[1, 2]);
    let ch = channel(0);
    let rate = RateConfig::from_db(20.0, 3, 64).unwrap();
    assert!(TrainingContext::new(&ch, &s.codebook, s.pattern, s.sampling, rate).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn strategies_never_beat_exhaustive(seed in any::<u64>(), k in 1usize..200) {
        let s = setup(&[1, 6]);
        let ch = channel(seed);
        let ctx = context(&s, &ch);
        let es = ctx.exhaustive_search();
        prop_assert!(ctx.siso_sls().unwrap().rate <= es.rate);
        let kb = ctx.k_best_training(k).unwrap();
        prop_assert!(kb.rate <= es.rate);
        prop_assert!(kb.rate >= ctx.k_best_training(1).unwrap().rate);
        prop_assert_eq!(ctx.rate(&kb.selection), kb.rate);
    }
}
