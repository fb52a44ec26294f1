use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rislearn::neuralnet::{Architecture, Batch, CnnModel};
use rislearn::signalgen::{make_window, IqWindow, SignalClass, UserSignature};

fn tiny_arch() -> Architecture {
    Architecture {
        window_len: 32,
        conv1_filters: 2,
        conv1_kernel: 5,
        conv2_filters: 2,
        conv2_kernel: 5,
        hidden: 4,
    }
}

fn windows(n: usize, seed: u64) -> Vec<IqWindow<f64>> {
    let (d, i) = (UserSignature::desired_default(), UserSignature::interferer_default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|j| make_window(SignalClass::ALL[j % 4], 32, 10.0, &d, &i, &mut rng).unwrap())
        .collect()
}

/// Initialized weights plus small random biases, so no pre-activation sits
/// exactly on a ReLU kink.
fn random_model(arch: Architecture, seed: u64) -> CnnModel<f64> {
    let a = arch;
    // flat layout: conv1 w, b | conv2 w, b | dense w, b | out w, b
    let sizes = [
        (a.conv1_filters * 2 * a.conv1_kernel, a.conv1_filters),
        (a.conv2_filters * a.conv1_filters * a.conv2_kernel, a.conv2_filters),
        (a.hidden * a.flat_len(), a.hidden),
        (4 * a.hidden, 4),
    ];
    let mut params = CnnModel::<f64>::init(arch, seed).unwrap().params().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
    let mut at = 0;
    for (w, b) in sizes {
        at += w;
        for p in &mut params[at..at + b] {
            *p = rng.random_range(-0.1..0.1);
        }
        at += b;
    }
    assert_eq!(at, params.len());
    CnnModel::from_params(arch, params).unwrap()
}

fn loss(arch: Architecture, params: &[f64], batch: &Batch<f64>) -> f64 {
    CnnModel::from_params(arch, params.to_vec())
        .unwrap()
        .backward(batch)
        .unwrap()
        .loss
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let arch = tiny_arch();
    let h = 1e-5;
    for seed in 0..3u64 {
        let model = random_model(arch, seed);
        let ws = windows(8, 100 + seed);
        let batch = Batch::from_windows(&ws, 32).unwrap();
        let g = model.backward(&batch).unwrap().values;
        let mut params = model.params().to_vec();
        let mut worst = 0.0f64;
        for p in 0..params.len() {
            let orig = params[p];
            params[p] = orig + h;
            let up = loss(arch, &params, &batch);
            params[p] = orig - h;
            let down = loss(arch, &params, &batch);
            params[p] = orig;
            let fd = (up - down) / (2.0 * h);
            let rel = (g[p] - fd).abs() / (g[p].abs() + 1e-8);
            worst = worst.max(rel);
            assert!(rel < 1e-4, "seed {seed} param {p}: analytic {} vs fd {fd}", g[p]);
        }
        eprintln!("seed {seed}: {} params, worst relative error {worst:.2e}", params.len());
    }
}

#[test]
fn duplicated_batch_leaves_mean_gradient_unchanged() {
    let arch = tiny_arch();
    let model = CnnModel::<f64>::init(arch, 11).unwrap();
    let ws = windows(6, 5);
    let single = model.backward(&Batch::from_windows(&ws, 32).unwrap()).unwrap();
    let doubled: Vec<_> = ws.iter().flat_map(|w| [w, w]).collect();
    let double = model
        .backward(&Batch::from_windows(doubled, 32).unwrap())
        .unwrap();
    assert!((single.loss - double.loss).abs() < 1e-12);
    for (a, b) in single.values.iter().zip(&double.values) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn confident_correct_output_has_vanishing_gradient() {
    // Zero weights everywhere except a huge output bias on the label's class:
    // softmax is one-hot on the target and the loss sits at its optimum.
    let arch = tiny_arch();
    let mut model = CnnModel::<f64>::zeros(arch).unwrap();
    let n = model.param_count();
    model.params_mut()[n - 4 + SignalClass::IOnly.index()] = 60.0;
    let ws: Vec<_> = windows(8, 9)
        .into_iter()
        .map(|w| IqWindow::new(w.samples, Some(SignalClass::IOnly)))
        .collect();
    let g = model.backward(&Batch::from_windows(&ws, 32).unwrap()).unwrap();
    assert!(g.loss < 1e-20);
    assert!(g.values.iter().all(|v| v.abs() < 1e-20));
}

#[test]
fn non_finite_input_is_an_error() {
    let model = CnnModel::<f64>::init(tiny_arch(), 0).unwrap();
    let mut ws = windows(2, 1);
    ws[1].samples[3].re = f64::NAN;
    assert!(model.backward(&Batch::from_windows(&ws, 32).unwrap()).is_err());
}

#[test]
fn nan_is_not_swallowed_by_relu() {
    let model = CnnModel::<f64>::init(tiny_arch(), 0).unwrap();
    let mut w = windows(1, 2).remove(0);
    w.samples[10].im = f64::NAN;
    assert!(matches!(model.predict(&w), Err(rislearn::Error::NonFinite(_))));
}
