use proptest::prelude::*;

use reconfig_stbc::antenna::{optimize_antenna, paired_gain, upper_gain};
use reconfig_stbc::channel::{propagate, ChannelRealization};
use reconfig_stbc::constellation::Constellation;
use reconfig_stbc::decoder::{combine, conditional_ml, pair_ml, Detector, ReceivedBlock};
use reconfig_stbc::encoder::{
    det_difference, det_difference_factored, encode_raw, optimal_theta1, precode, DifferenceSet,
    RotationAngles,
};
use reconfig_stbc::harness::{
    read_csv, resolve, write_csv, BerCurve, BerPoint, ChannelMode, ConfigFile, SimConfig,
};
use reconfig_stbc::numerics::{Complex, Mat2, RngStream};

fn cplx() -> impl Strategy<Value = Complex> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex::new(re, im))
}

fn mat() -> impl Strategy<Value = Mat2> {
    (cplx(), cplx(), cplx(), cplx()).prop_map(|(a, b, c, d)| Mat2::new(a, b, c, d))
}

fn constellation() -> impl Strategy<Value = Constellation> {
    prop_oneof![
        Just(Constellation::psk(2).unwrap()),
        Just(Constellation::psk(4).unwrap()),
        Just(Constellation::psk(8).unwrap()),
        Just(Constellation::qam(16).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matrix_identities(a in mat(), b in mat()) {
        prop_assert_eq!(a.conj_transpose().conj_transpose(), a);
        prop_assert!(a.frobenius_norm() >= 0.0);
        prop_assert!(a.hadamard(&b).frobenius_norm() <= a.frobenius_norm() * b.max_abs() * (1.0 + 1e-12));
        let g = (a.conj_transpose() * a).det();
        prop_assert!(g.re >= -1e-12 * (1.0 + a.frobenius_norm_sqr().powi(2)));
        prop_assert!(g.im.abs() <= 1e-12 * (1.0 + a.frobenius_norm_sqr().powi(2)));
    }

    #[test]
    fn rng_streams_replay(seed in any::<u64>(), stream in any::<u64>()) {
        let mut x = RngStream::new(seed, stream);
        let mut y = RngStream::new(seed, stream);
        for _ in 0..16 {
            prop_assert_eq!(x.standard_normal().to_bits(), y.standard_normal().to_bits());
            prop_assert_eq!(x.index(7), y.index(7));
        }
    }

    #[test]
    fn slicing_recovers_points(c in constellation(), i in 0usize..16, nudge in cplx()) {
        let i = i % c.order();
        prop_assert_eq!(c.slice(c.point(i)), i);
        // Well inside the decision region.
        let p = c.point(i) + nudge * 0.02;
        prop_assert_eq!(c.slice(p), i);
        prop_assert_eq!(c.slice(p), c.slice_exhaustive(p));
    }

    #[test]
    fn rotation_unit_pairs(t in 0.0..std::f64::consts::FRAC_PI_2) {
        let r = RotationAngles::complementary(t);
        prop_assert!((r.alpha1.powi(2) + r.beta1.powi(2) - 1.0).abs() < 1e-12);
        prop_assert!((r.alpha2.powi(2) + r.beta2.powi(2) - 1.0).abs() < 1e-12);
        prop_assert!((r.theta1 + r.theta2 - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn determinant_factorization(
        s in prop::array::uniform4(cplx()),
        u in prop::array::uniform4(cplx()),
        psi in mat(),
        t in 0.05..1.5f64,
        power in 0.1..4.0f64,
    ) {
        prop_assume!(psi.frobenius_norm() > 1e-3);
        let rot = RotationAngles::complementary(t);
        let c = precode(&encode_raw(&s, &rot, power).unwrap(), &psi).unwrap();
        let v = precode(&encode_raw(&u, &rot, power).unwrap(), &psi).unwrap();
        let direct = det_difference(&c, &v);
        let factored = det_difference_factored(&DifferenceSet::between(&s, &u), &rot, power, &psi);
        prop_assert!((direct - factored).abs() <= 1e-9 * factored.abs().max(1e-6), "{} vs {}", direct, factored);
    }

    #[test]
    fn noiseless_detection_recovers_symbols(
        c in constellation(),
        idx in prop::array::uniform4(0usize..16),
        h in mat(),
        power in 0.2..3.0f64,
    ) {
        prop_assume!(h.frobenius_norm() > 0.1);
        let idx = idx.map(|i| i % c.order());
        let rot = RotationAngles::complementary(optimal_theta1(&c).unwrap());
        let chan = ChannelRealization::new(h, Mat2::from_real([[1.0; 2]; 2]));
        let s = idx.map(|i| c.point(i));
        let cw = precode(&encode_raw(&s, &rot, power).unwrap(), &chan.psi).unwrap();
        let rb = ReceivedBlock::new(propagate(&cw.samples, &chan.psi));
        for d in [Detector::Conditional, Detector::Pair] {
            prop_assert_eq!(d.detect(&rb, &chan, &rot, power, &c).unwrap().indices, idx);
        }
    }

    #[test]
    fn conditional_equals_pair(
        c in constellation(),
        r in cplx(),
        norm in 0.05..5.0f64,
        t in 0.01..1.56f64,
    ) {
        let (a, b) = (t.sin(), t.cos());
        let x = pair_ml(r, norm, 1.0, a, b, &c).unwrap();
        let y = conditional_ml(r, norm, 1.0, a, b, &c).unwrap();
        prop_assert_eq!((x.a, x.b), (y.a, y.b));
        prop_assert_eq!(x.cost_evaluations, (c.order() * c.order()) as u64);
        prop_assert_eq!(y.cost_evaluations, c.order() as u64);
    }

    #[test]
    fn combining_is_linear(y in mat(), z in mat(), w in -2.0..2.0f64) {
        let (a1, a2) = combine(&ReceivedBlock::new(y));
        let (b1, b2) = combine(&ReceivedBlock::new(z));
        let (s1, s2) = combine(&ReceivedBlock::new(y + z.scale(w)));
        prop_assert!((s1 - (a1 + b1 * w)).norm() < 1e-12);
        prop_assert!((s2 - (a2 + b2 * w)).norm() < 1e-12);
    }

    #[test]
    fn paired_gain_is_involution(g in 0.0..8.0f64, b in 0.1..6.0f64) {
        let back = paired_gain(paired_gain(g, b).unwrap(), b).unwrap();
        prop_assert!((back - g).abs() < 1e-9 * (1.0 + g));
    }

    #[test]
    fn optimized_gains_are_symmetric_and_bounded(h in mat(), b in 0.2..3.0f64) {
        prop_assume!(h.entries().all(|z| z.norm() > 1e-3));
        let cfg = optimize_antenna(&h, b).unwrap().config;
        let g = cfg.gains;
        prop_assert_eq!(g[0][0], g[1][1]);
        prop_assert_eq!(g[0][1], g[1][0]);
        prop_assert!(g.iter().flatten().all(|&x| x >= 0.0 && x.is_finite()));
        prop_assert!(g[0][0] <= upper_gain(b) * (1.0 + 1e-12));
    }

    #[test]
    fn csv_round_trip(
        rows in prop::collection::vec((0u64..1_000_000, 1u64..10_000_000), 1..12),
        seed in any::<u64>(),
    ) {
        let points = rows
            .iter()
            .enumerate()
            .map(|(i, &(errors, trials))| {
                let bits = trials * 8;
                let errors = errors.min(bits);
                BerPoint { snr_db: i as f64 * 1.5 - 3.0, ber: errors as f64 / bits as f64, bit_errors: errors, bits, trials }
            })
            .collect();
        let curve = BerCurve { points, seed, config_hash: "0123456789abcdef".into() };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_csv(&curve, &path).unwrap();
        prop_assert_eq!(read_csv(&path).unwrap(), curve);
    }

    #[test]
    fn config_hash_ignores_seed_only(seed in any::<u64>(), other in any::<u64>(), target in 1u64..10_000) {
        let mut a = SimConfig::preset(ChannelMode::Physical);
        a.seed = seed;
        let mut b = a.clone();
        b.seed = other;
        prop_assert_eq!(a.config_hash(), b.config_hash());
        b.target_errors = target;
        prop_assert_eq!(a.config_hash() == b.config_hash(), a.target_errors == target);
    }
}

#[test]
fn canonical_toml_resolves_to_itself() {
    for mode in [ChannelMode::Normalized, ChannelMode::Physical] {
        let mut cfg = SimConfig::preset(mode);
        cfg.seed = 42;
        cfg.theta1 = Some(0.3);
        let file = ConfigFile::parse(&cfg.to_toml()).unwrap();
        assert_eq!(resolve(Some(&file), None).unwrap(), cfg);
    }
}
