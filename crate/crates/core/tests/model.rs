mod common;

use approx::assert_relative_eq;
use greedy_subnet::model::{
    build_feature_instance, feature_map, init_random_mlp, load_model, loss_mean, save_model, vec_loss, Activation,
    Dataset, FeatureInstance, Model, Neuron,
};
use greedy_subnet::training::grad_loss;
use ndarray::Array1;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_dataset, random_instance, random_net};

fn activation() -> impl Strategy<Value = Activation> {
    prop_oneof![
        Just(Activation::Tanh),
        Just(Activation::Sigmoid),
        Just(Activation::Relu)
    ]
}

fn smooth() -> impl Strategy<Value = Activation> {
    prop_oneof![Just(Activation::Tanh), Just(Activation::Sigmoid)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn feature_map_is_linear_in_outer_weight(seed in any::<u64>(), c in -4.0f64..4.0, act in activation()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_dataset(&mut rng, 7, 3);
        let net = random_net(&mut rng, 1, 3, act);
        let n = net.neuron(0);
        let scaled = Neuron::new(n.a.clone(), c * n.b);
        let p = feature_map(&n, act, &data).unwrap();
        let q = feature_map(&scaled, act, &data).unwrap();
        for (x, y) in p.iter().zip(q.iter()) {
            prop_assert!((c * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn relu_feature_map_is_one_homogeneous(seed in any::<u64>(), c in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_dataset(&mut rng, 6, 4);
        let n = random_net(&mut rng, 1, 4, Activation::Relu).neuron(0);
        let scaled = Neuron::new(&n.a * c, n.b);
        let p = feature_map(&n, Activation::Relu, &data).unwrap();
        let q = feature_map(&scaled, Activation::Relu, &data).unwrap();
        for (x, y) in p.iter().zip(q.iter()) {
            prop_assert!((c * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn subnetwork_loss_is_half_the_vector_loss(seed in any::<u64>(), act in activation(), n in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_dataset(&mut rng, 9, 3);
        let net = random_net(&mut rng, n, 3, act);
        let inst = build_feature_instance(&net, &data).unwrap();
        let counts: Vec<usize> = (0..n).map(|i| (seed as usize >> (i % 60)) % 3).collect();
        prop_assume!(counts.iter().any(|&c| c > 0));
        let sub = net.subnetwork(&counts).unwrap();
        let u = inst.weighted_sum(&counts).unwrap() / counts.iter().sum::<usize>() as f64;
        let l = loss_mean(sub.predict(data.inputs().view()).unwrap().view(), data.labels().view()).unwrap();
        let v = vec_loss(u.view(), inst.target().view()).unwrap();
        prop_assert!((v - 2.0 * l).abs() <= 1e-12 * (1.0 + v));
        prop_assert!((inst.multiset_loss(&counts).unwrap() - v).abs() <= 1e-12 * (1.0 + v));
    }

    #[test]
    fn net_files_round_trip(seed in any::<u64>(), act in activation(), n in 1usize..6, d in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = Model::TwoLayer(random_net(&mut rng, n, d, act));
        let json = model.to_json();
        let back = Model::from_json(&json).unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(back.to_json(), json);
    }

    #[test]
    fn feature_files_round_trip(seed in any::<u64>(), n in 1usize..8, m in 1usize..5) {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), n, m, false);
        let model = Model::Features(inst.clone());
        let back = Model::from_json(&model.to_json()).unwrap();
        prop_assert_eq!(&back, &model);
        if let Model::Features(b) = back {
            prop_assert_eq!(b.fingerprint(), inst.fingerprint());
        }
    }

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>(), act in smooth()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_dataset(&mut rng, 8, 3);
        let net = random_net(&mut rng, 4, 3, act);
        let g = grad_loss(&net, &data).unwrap();
        let h = 1e-5;
        let loss_with = |inner: Option<(usize, usize)>, outer: Option<usize>, d: f64| {
            let mut a = net.inner().clone();
            let mut b = net.outer().clone();
            if let Some(ij) = inner { a[ij] += d; }
            if let Some(i) = outer { b[i] += d; }
            greedy_subnet::model::TwoLayerNet::new(a, b, act).unwrap().loss(&data).unwrap()
        };
        for i in 0..4 {
            let fd = (loss_with(None, Some(i), h) - loss_with(None, Some(i), -h)) / (2.0 * h);
            prop_assert!((fd - g.outer[i]).abs() <= 1e-6 * (1.0 + fd.abs()));
            for j in 0..3 {
                let fd = (loss_with(Some((i, j)), None, h) - loss_with(Some((i, j)), None, -h)) / (2.0 * h);
                prop_assert!((fd - g.inner[[i, j]]).abs() <= 1e-6 * (1.0 + fd.abs()));
            }
        }
    }
}

#[test]
fn flow_is_negative_width_scaled_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data = random_dataset(&mut rng, 10, 2);
    let net = random_net(&mut rng, 5, 2, Activation::Tanh);
    let g = grad_loss(&net, &data).unwrap();
    let flow = g.flow();
    for (f, x) in flow.outer.iter().zip(g.outer.iter()) {
        assert_relative_eq!(*f, -5.0 * x, max_relative = 1e-15);
    }
}

#[test]
fn model_files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let mlp = Model::Deep(init_random_mlp(3, &[4, 5], Activation::Sigmoid, 11).unwrap());
    let path = dir.path().join("mlp.json");
    save_model(&path, &mlp).unwrap();
    assert_eq!(load_model(&path).unwrap(), mlp);
    std::fs::write(&path, "{\"format\":\"other\",\"version\":1}").unwrap();
    assert!(load_model(&path).is_err());
    assert!(load_model(dir.path().join("missing.json")).is_err());
}

#[test]
fn dataset_csv_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data = random_dataset(&mut rng, 12, 4);
    let back = Dataset::from_csv_str(&data.to_csv_string()).unwrap();
    assert_eq!(back, data);
}

#[test]
fn direct_instances_reject_bad_shapes() {
    let rows = ndarray::Array2::zeros((3, 2));
    assert!(FeatureInstance::direct(rows.clone(), Array1::zeros(3)).is_err());
    assert!(FeatureInstance::direct(ndarray::Array2::zeros((0, 2)), Array1::zeros(2)).is_err());
    assert!(FeatureInstance::direct(rows, Array1::from(vec![f64::NAN, 0.0])).is_err());
}
