use smes_core::data::gen_blobs;
use smes_core::net::{argmax, init_network, one_hot};
use smes_core::selfcheck;
use smes_core::{Activation, Loss, NetworkSpec, RngStream, Smes, SmesConfig, Tensor};

#[test]
fn finite_difference_suite_passes() {
    let result = selfcheck::finite_differences(20).unwrap();
    assert!(result.passed, "{}", result.detail);
}

#[test]
fn deep_sigmoid_stack_loses_gradient_towards_the_input() {
    let spec = NetworkSpec {
        sizes: vec![12; 9],
        activations: vec![Activation::Sigmoid; 8],
        loss: Loss::MeanSquaredError,
    };
    for seed in 0..10 {
        let mut rng = RngStream::new(seed);
        let mut net = init_network(&spec, &mut rng).unwrap();
        net.forward(&rng.normal(0.0, 1.0, &[12]).unwrap()).unwrap();
        let report = net.backward(&rng.uniform(0.0, 1.0, &[12]).unwrap()).unwrap();
        assert!(report.layer_norms[0] < report.layer_norms[7], "seed {seed}: {:?}", report.layer_norms);
    }
}

#[test]
fn smes_trains_a_classifier_for_several_alphas() {
    let (train, _) = gen_blobs(3, 30, 4, 0.5, &mut RngStream::new(3)).unwrap();
    for (alpha, eta) in [(0.0, 0.1), (0.5, 0.01), (-0.1, 0.1)] {
        let spec = NetworkSpec {
            sizes: vec![4, 16, 3],
            activations: vec![Activation::Relu, Activation::Identity],
            loss: Loss::SoftmaxCrossEntropy,
        };
        let mut net = init_network(&spec, &mut RngStream::new(1)).unwrap();
        let config = SmesConfig { eta, ..SmesConfig::adam().with_alpha(alpha) };
        let mut opt = Smes::new(config, net.parameters()).unwrap();
        for _ in 0..50 {
            for i in 0..train.len() {
                let x = Tensor::from_vec(train.features.row(i).to_vec());
                net.forward(&x).unwrap();
                net.backward(&one_hot(train.labels[i], 3)).unwrap();
                let grads: Vec<Tensor> = net.gradients().into_iter().cloned().collect();
                opt.step(net.parameters_mut(), &grads).unwrap();
            }
        }
        let correct = (0..train.len())
            .filter(|&i| {
                let x = Tensor::from_vec(train.features.row(i).to_vec());
                argmax(&net.predict(&x).unwrap()) == train.labels[i]
            })
            .count();
        assert!(correct as f64 / train.len() as f64 > 0.95, "alpha {alpha}: {correct}/{}", train.len());
    }
}
