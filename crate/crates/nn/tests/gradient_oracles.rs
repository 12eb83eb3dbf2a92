//! Finite-difference verification for every layer and for full
//! architecture-shaped micro networks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thzbeam_nn::{
    gradient_check, cross_entropy_loss, mse_loss, ChannelScale, Conv2d, Dense, Dropout, Flatten,
    GlobalAvgPool, InstanceNorm, Layer, MaxPool2d, Mode, Network, Relu, Tensor, ZeroPad2d,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let len: usize = shape.iter().product();
    let data = (0..len).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    Tensor::from_vec(shape, data).unwrap()
}

fn check_with_random_target(mut net: Network, input_shape: &[usize], seed: u64) -> f64 {
    let mut r = rng(seed);
    let input = random_tensor(input_shape, &mut r);
    let mut probe = rng(seed + 1);
    let out_shape = net.forward(&input, Mode::Eval, &mut probe).unwrap();
    let target = random_tensor(out_shape.shape(), &mut r);
    gradient_check(&mut net, &input, |out| mse_loss(out, &target)).unwrap()
}

#[test]
fn conv2d_gradients_match_finite_differences() {
    // random 4x4x2 input, 2x2x2x3 kernel
    let mut r = rng(10);
    let net = Network::new(vec![Box::new(Conv2d::new(2, 2, 2, 3, &mut r)) as Box<dyn Layer>]);
    let err = check_with_random_target(net, &[4, 4, 2], 11);
    assert!(err < 1e-6, "conv2d relative error {err}");
}

#[test]
fn dense_gradients_match_finite_differences() {
    let mut r = rng(20);
    let net = Network::new(vec![Box::new(Dense::new(6, 4, &mut r)) as Box<dyn Layer>]);
    let err = check_with_random_target(net, &[6], 21);
    assert!(err < 1e-6, "dense relative error {err}");
}

#[test]
fn instance_norm_gradients_match_finite_differences() {
    let layers: Vec<Box<dyn Layer>> = vec![Box::new(InstanceNorm::new(3))];
    let err = check_with_random_target(Network::new(layers), &[4, 2, 3], 31);
    assert!(err < 1e-5, "instance norm relative error {err}");
}

#[test]
fn maxpool_path_gradients_match_finite_differences() {
    // pooling has no parameters; check the gradient that flows through it
    // into an upstream conv, away from ties (random inputs never tie)
    let mut r = rng(40);
    let layers: Vec<Box<dyn Layer>> = vec![
        Box::new(Conv2d::new(2, 2, 1, 2, &mut r)),
        Box::new(MaxPool2d::new(2, 2)),
        Box::new(Flatten::new()),
        Box::new(Dense::new(8, 3, &mut r)),
    ];
    let err = check_with_random_target(Network::new(layers), &[5, 5, 1], 41);
    assert!(err < 1e-5, "maxpool path relative error {err}");
}

#[test]
fn gap_relu_pad_scale_path_matches_finite_differences() {
    let mut r = rng(50);
    let layers: Vec<Box<dyn Layer>> = vec![
        Box::new(ChannelScale::new(vec![2.0, 0.25])),
        Box::new(ZeroPad2d::new(1, 1)),
        Box::new(Conv2d::new(2, 2, 2, 4, &mut r)),
        Box::new(Relu::new()),
        Box::new(GlobalAvgPool::new()),
        Box::new(Dense::new(4, 2, &mut r)),
    ];
    let err = check_with_random_target(Network::new(layers), &[3, 3, 2], 51);
    assert!(err < 1e-5, "mixed path relative error {err}");
}

#[test]
fn estimator_shaped_micro_network_passes_gradient_check() {
    // two conv blocks (pad, conv, pool, instance norm, relu, dropout at
    // eval), global average pooling, dense head: the estimator topology at
    // micro scale
    let mut r = rng(60);
    let layers: Vec<Box<dyn Layer>> = vec![
        Box::new(ChannelScale::new(vec![1.5, 1.0])),
        Box::new(ZeroPad2d::new(1, 1)),
        Box::new(Conv2d::new(2, 2, 2, 4, &mut r)),
        Box::new(MaxPool2d::new(2, 2)),
        Box::new(InstanceNorm::new(4)),
        Box::new(Relu::new()),
        Box::new(Dropout::new(0.2)),
        Box::new(ZeroPad2d::new(1, 1)),
        Box::new(Conv2d::new(2, 2, 4, 6, &mut r)),
        Box::new(MaxPool2d::new(2, 1)),
        Box::new(InstanceNorm::new(6)),
        Box::new(Relu::new()),
        Box::new(Dropout::new(0.2)),
        Box::new(GlobalAvgPool::new()),
        Box::new(Dense::new(6, 14, &mut r)),
    ];
    let err = check_with_random_target(Network::new(layers), &[8, 2, 2], 61);
    assert!(err < 1e-5, "estimator micro network relative error {err}");
}

#[test]
fn classifier_shaped_micro_network_passes_gradient_check() {
    // 4 dense+relu+dropout blocks and a logit head under cross-entropy
    let mut r = rng(70);
    let layers: Vec<Box<dyn Layer>> = vec![
        Box::new(Flatten::new()),
        Box::new(Dense::new(14, 16, &mut r)),
        Box::new(Relu::new()),
        Box::new(Dropout::new(0.2)),
        Box::new(Dense::new(16, 16, &mut r)),
        Box::new(Relu::new()),
        Box::new(Dropout::new(0.2)),
        Box::new(Dense::new(16, 8, &mut r)),
        Box::new(Relu::new()),
        Box::new(Dropout::new(0.2)),
        Box::new(Dense::new(8, 8, &mut r)),
        Box::new(Relu::new()),
        Box::new(Dropout::new(0.2)),
        Box::new(Dense::new(8, 5, &mut r)),
    ];
    let mut net = Network::new(layers);
    let input = random_tensor(&[2, 7], &mut r);
    let err = gradient_check(&mut net, &input, |out| cross_entropy_loss(out, 3)).unwrap();
    assert!(err < 1e-5, "classifier micro network relative error {err}");
}

#[test]
fn baseline_shaped_micro_network_passes_gradient_check() {
    let mut r = rng(80);
    let layers: Vec<Box<dyn Layer>> = vec![
        Box::new(Conv2d::new(2, 2, 2, 3, &mut r)),
        Box::new(GlobalAvgPool::new()),
        Box::new(Relu::new()),
        Box::new(Dense::new(3, 8, &mut r)),
        Box::new(Relu::new()),
        Box::new(Dropout::new(0.2)),
        Box::new(Dense::new(8, 6, &mut r)),
    ];
    let mut net = Network::new(layers);
    let input = random_tensor(&[5, 4, 2], &mut r);
    let err = gradient_check(&mut net, &input, |out| cross_entropy_loss(out, 1)).unwrap();
    assert!(err < 1e-5, "baseline micro network relative error {err}");
}

#[test]
fn randomized_layer_shapes_pass_gradient_check() {
    // every parameterized layer, random small shapes
    let mut meta = rng(90);
    for trial in 0..5 {
        let c_in = meta.gen_range(1..3usize);
        let c_out = meta.gen_range(1..4usize);
        let h = meta.gen_range(2..5usize);
        let w = meta.gen_range(2..5usize);
        let mut r = rng(91 + trial);
        let net = Network::new(vec![
            Box::new(Conv2d::new(2, 2, c_in, c_out, &mut r)) as Box<dyn Layer>
        ]);
        let err = check_with_random_target(net, &[h.max(2), w.max(2), c_in], 92 + trial);
        assert!(err < 1e-5, "trial {trial}: conv error {err}");
    }
}
