use num_complex::Complex;
use proptest::prelude::*;
use rislearn::channel::{layout, sinr, LinkBudget, RisStates, ScenarioParams};
use rislearn::controller::{decide, greedy_states, oracle_states};
use rislearn::dataset::{self, LabeledDataset};
use rislearn::neuralnet::{argmax, model_from_bytes, model_to_bytes, softmax, Architecture, CnnModel};
use rislearn::signalgen::{IqWindow, SignalClass};

fn scenario() -> impl Strategy<Value = ScenarioParams> {
    (
        5.0..150.0f64,
        1usize..=4,
        prop::sample::select(vec![16usize, 64, 256, 1024]),
        0.3..=1.0f64,
        0.0..20.0f64,
        (20.0..100.0f64, 5.0..30.0f64, 40.0..120.0f64),
    )
        .prop_map(|(theta, k, n, amp, p_i, (d_ud, d_ui, d_bs))| ScenarioParams {
            theta,
            k,
            n,
            amp_coeff: amp,
            p_i,
            d_ris_ud: d_ud,
            d_ris_ui: d_ui,
            d_ris_bs: d_bs,
            ..ScenarioParams::default()
        })
}

fn posterior() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.0..1.0f64)
        .prop_filter("non-zero mass", |p| p.iter().sum::<f64>() > 1e-3)
        .prop_map(|p| {
            let s: f64 = p.iter().sum();
            p.map(|x| x / s)
        })
}

fn dataset_strategy() -> impl Strategy<Value = LabeledDataset> {
    (prop::sample::select(vec![32usize, 128]), 0usize..6).prop_flat_map(|(len, count)| {
        prop::collection::vec(
            (0usize..4, prop::collection::vec((any::<f32>(), any::<f32>()), len)),
            count,
        )
        .prop_map(move |ws| {
            let windows = ws
                .into_iter()
                .map(|(label, s)| {
                    IqWindow::new(
                        s.into_iter().map(|(re, im)| Complex::new(re, im)).collect(),
                        SignalClass::from_index(label),
                    )
                })
                .collect();
            LabeledDataset::new(len, windows).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn softmax_is_a_shift_invariant_distribution(z in prop::array::uniform4(-50.0..50.0f64), c in -200.0..200.0f64) {
        let p = softmax(&z);
        prop_assert!(p.iter().all(|&x| x > 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = z.iter().map(|x| x + c).collect();
        let q = softmax(&shifted);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert_eq!(argmax(&p), argmax(&z));
    }

    #[test]
    fn dataset_bytes_round_trip(ds in dataset_strategy()) {
        let bytes = dataset::to_bytes(&ds).unwrap();
        let back = dataset::from_bytes(&bytes).unwrap();
        // compare bit patterns so NaN payloads count as equal
        prop_assert_eq!(back.window_len(), ds.window_len());
        prop_assert_eq!(back.len(), ds.len());
        for (a, b) in back.windows().iter().zip(ds.windows()) {
            prop_assert_eq!(a.label, b.label);
            for (x, y) in a.samples.iter().zip(&b.samples) {
                prop_assert_eq!((x.re.to_bits(), x.im.to_bits()), (y.re.to_bits(), y.im.to_bits()));
            }
        }
        prop_assert_eq!(dataset::to_bytes(&back).unwrap(), bytes.clone());
        if !bytes.is_empty() {
            let cut = bytes.len() - 1;
            prop_assert!(dataset::from_bytes(&bytes[..cut]).is_err());
        }
    }

    #[test]
    fn stratified_split_is_a_disjoint_partition(n in 2usize..12, ratio in 0.2..0.8f64, seed in any::<u64>()) {
        let d = rislearn::UserSignature::desired_default();
        let i = rislearn::UserSignature::interferer_default();
        let ds = dataset::build_dataset(n, 32, (0.0, 20.0), &d, &i, 1).unwrap();
        let sp = dataset::split(&ds, ratio, seed).unwrap();
        prop_assert_eq!(sp.train.len() + sp.test.len(), ds.len());
        let tr = sp.train.class_counts();
        let te = sp.test.class_counts();
        for c in 0..4 {
            prop_assert_eq!(tr[c] + te[c], n);
            // within rounding of the requested ratio
            prop_assert!((tr[c] as f64 - ratio * n as f64).abs() <= 1.0);
        }
        let mut all: Vec<_> = sp.train.windows().iter().chain(sp.test.windows()).map(|w| w.samples[0].re.to_bits()).collect();
        all.sort_unstable();
        all.dedup();
        prop_assert_eq!(all.len(), ds.len());
    }

    #[test]
    fn model_bytes_round_trip(seed in any::<u64>(), hidden in 1usize..6) {
        let arch = Architecture { window_len: 32, conv1_filters: 2, conv1_kernel: 3, conv2_filters: 3, conv2_kernel: 5, hidden };
        let m = CnnModel::<f64>::init(arch, seed).unwrap();
        let back: CnnModel<f64> = model_from_bytes(&model_to_bytes(&m)).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn interferer_distance_shrinks_with_theta(a in 1.0..149.0f64, b in 1.0..149.0f64) {
        prop_assume!(a < b);
        let p = ScenarioParams::default();
        prop_assert!(layout(&p.with_theta(a)).d_ui_bs > layout(&p.with_theta(b)).d_ui_bs);
    }

    #[test]
    fn all_off_sinr_ignores_ris_hardware(p in scenario(), k in 1usize..=10, n in 1usize..4096, amp in 0.05..=1.0f64) {
        let base = sinr(&p, &layout(&p), &RisStates::all_off(p.k)).unwrap().sinr_db;
        let q = ScenarioParams { k, n, amp_coeff: amp, ..p.clone() };
        let other = sinr(&q, &layout(&q), &RisStates::all_off(k)).unwrap().sinr_db;
        prop_assert_eq!(base, other);
    }

    #[test]
    fn switching_a_ris_on(p in scenario(), which in 0usize..4, states in prop::collection::vec(any::<bool>(), 4)) {
        let which = which % p.k;
        let mut off = states[..p.k].to_vec();
        off[which] = false;
        let mut on = off.clone();
        on[which] = true;
        let l = layout(&p);
        let b = LinkBudget::new(&p, &l).unwrap();
        let (x, y) = (b.evaluate(&off), b.evaluate(&on));
        prop_assert!(y.desired_power > x.desired_power);
        prop_assert!(y.interference_power >= x.interference_power);

        // larger arrays help the desired link and leak more interference
        let big = ScenarioParams { n: p.n * 2, ..p.clone() };
        let bb = LinkBudget::new(&big, &l).unwrap().evaluate(&on);
        prop_assert!(bb.desired_power > y.desired_power);
        prop_assert!(bb.interference_power >= y.interference_power);
        prop_assert!(y.sinr_db.is_finite() && y.desired_power > 0.0 && y.noise_power > 0.0);
    }

    #[test]
    fn without_interference_on_beats_off(p in scenario(), states in prop::collection::vec(any::<bool>(), 4)) {
        let q = p.without_interferer();
        let l = layout(&q);
        let b = LinkBudget::new(&q, &l).unwrap();
        for r in 0..q.k {
            let mut off = states[..q.k].to_vec();
            off[r] = false;
            let mut on = off.clone();
            on[r] = true;
            prop_assert!(b.sinr_db(&on) >= b.sinr_db(&off));
        }
    }

    #[test]
    fn sinr_increases_with_desired_power(p in scenario(), delta in 0.1..10.0f64) {
        let l = layout(&p);
        let s = RisStates::all_on(p.k);
        let lo = sinr(&p, &l, &s).unwrap();
        let hi = sinr(&ScenarioParams { p_d: p.p_d + delta, ..p.clone() }, &l, &s).unwrap();
        prop_assert!(hi.sinr_db > lo.sinr_db);
        let direct = 10.0 * (lo.desired_power / (lo.interference_power + lo.noise_power)).log10();
        prop_assert!((direct - lo.sinr_db).abs() < 1e-9);
    }

    #[test]
    fn greedy_never_below_all_off(p in scenario()) {
        let l = layout(&p);
        let b = LinkBudget::new(&p, &l).unwrap();
        let g = greedy_states(&p, &l).unwrap();
        prop_assert_eq!(g.len(), p.k);
        prop_assert!(b.sinr_db(g.as_slice()) >= b.sinr_db(RisStates::all_off(p.k).as_slice()));
        let o = oracle_states(&p, &l).unwrap();
        prop_assert!(b.sinr_db(o.as_slice()) >= b.sinr_db(g.as_slice()));
        prop_assert!(b.sinr_db(o.as_slice()) >= b.sinr_db(RisStates::all_on(p.k).as_slice()));
    }

    #[test]
    fn decide_is_consistent(p in scenario(), post in posterior(), scale in 0.1..10.0f64) {
        let l = layout(&p);
        let d = decide(&post, &p, &l).unwrap();
        prop_assert_eq!(d.states.len(), p.k);
        prop_assert_eq!(&decide(&post, &p, &l).unwrap(), &d);

        // scaling before renormalization changes nothing
        let scaled: Vec<f64> = post.iter().map(|x| x * scale).collect();
        let s: f64 = scaled.iter().sum();
        let renorm: Vec<f64> = scaled.iter().map(|x| x / s).collect();
        prop_assert_eq!(decide(&renorm, &p, &l).unwrap().states, d.states.clone());

        // predicted SINR is the channel model under the inferred occupancy
        let mut belief = p.clone();
        if !d.inferred_class.has_desired() { belief.p_d = f64::NEG_INFINITY; }
        if !d.inferred_class.has_interferer() { belief.p_i = f64::NEG_INFINITY; }
        let expected = sinr(&belief, &l, &d.states).unwrap().sinr_db;
        prop_assert!(d.predicted_sinr_db == expected || (d.predicted_sinr_db.is_nan() && expected.is_nan()));
    }
}
