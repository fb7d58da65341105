use seqmo::neuralnet::{
    evaluate_loss, loss_and_gradients, predict, token_accuracy, DecodeMode, PointerNetParams, TrainConfig, Trainer,
    GROUP_NAMES,
};
use seqmo::{Permutation, RngStream};

fn random_pairs(n: usize, count: usize, rng: &mut RngStream) -> Vec<(Permutation, Permutation)> {
    (0..count)
        .map(|_| (Permutation::random(n, rng).unwrap(), Permutation::random(n, rng).unwrap()))
        .collect()
}

fn loss_of(p: &PointerNetParams, pairs: &[(Permutation, Permutation)]) -> f64 {
    evaluate_loss(p, pairs).unwrap()
}

/// Relative error per parameter group between the analytic gradient and
/// central differences with step `eps`.
fn gradient_errors(p: &PointerNetParams, pairs: &[(Permutation, Permutation)], eps: f64) -> Vec<(String, f64)> {
    let data: Vec<&[usize]> = pairs.iter().map(|x| x.0.as_slice()).collect();
    let labels: Vec<&[usize]> = pairs.iter().map(|x| x.1.as_slice()).collect();
    let mut analytic = p.zeros_like();
    loss_and_gradients(p, &data, &labels, None, Some(&mut analytic)).unwrap();
    let mut probe = p.clone();
    let mut out = Vec::new();
    for (gi, name) in GROUP_NAMES.iter().enumerate() {
        let len = p.groups()[gi].len();
        let mut diff2 = 0.0;
        let mut a2 = 0.0;
        let mut n2 = 0.0;
        for j in 0..len {
            let orig = p.groups()[gi].data()[j];
            probe.groups_mut()[gi].data_mut()[j] = orig + eps;
            let up = loss_of(&probe, pairs);
            probe.groups_mut()[gi].data_mut()[j] = orig - eps;
            let down = loss_of(&probe, pairs);
            probe.groups_mut()[gi].data_mut()[j] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let a = analytic.groups()[gi].data()[j];
            diff2 += (a - numeric).powi(2);
            a2 += a * a;
            n2 += numeric * numeric;
        }
        let denom = a2.sqrt().max(n2.sqrt()).max(1e-12);
        out.push((name.to_string(), diff2.sqrt() / denom));
    }
    out
}

#[test]
fn full_network_gradient_matches_central_differences() {
    let mut rng = RngStream::new(2024);
    let p = PointerNetParams::init(5, 8, 8, &mut rng).unwrap();
    let pairs = random_pairs(5, 2, &mut rng);
    for (name, err) in gradient_errors(&p, &pairs, 1e-5) {
        assert!(err < 1e-4, "group {name}: relative error {err:e}");
    }
}

#[test]
fn gradient_is_accumulated_not_overwritten() {
    let mut rng = RngStream::new(1);
    let p = PointerNetParams::init(4, 3, 3, &mut rng).unwrap();
    let pairs = random_pairs(4, 2, &mut rng);
    let data: Vec<&[usize]> = pairs.iter().map(|x| x.0.as_slice()).collect();
    let labels: Vec<&[usize]> = pairs.iter().map(|x| x.1.as_slice()).collect();
    let mut once = p.zeros_like();
    loss_and_gradients(&p, &data, &labels, None, Some(&mut once)).unwrap();
    let mut twice = p.zeros_like();
    loss_and_gradients(&p, &data, &labels, None, Some(&mut twice)).unwrap();
    loss_and_gradients(&p, &data, &labels, None, Some(&mut twice)).unwrap();
    for (a, b) in once.groups().iter().zip(twice.groups()) {
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((2.0 * x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn single_pair_is_memorised() {
    let mut rng = RngStream::new(77);
    let pairs = random_pairs(10, 1, &mut rng);
    let cfg = TrainConfig { hidden_units: 32, embedding_dim: 16, dropout: 0.0, learn_rate: 0.01, ..TrainConfig::default() };
    let mut t = Trainer::new(cfg, 10, &mut RngStream::new(1)).unwrap();
    let trace = t.fit_epochs(&pairs, 500, &mut RngStream::new(2), &mut RngStream::new(3)).unwrap();
    let final_loss = *trace.last().unwrap();
    assert!(final_loss < 0.01, "final training loss {final_loss}");
    assert_eq!(predict(&t.params, &[pairs[0].0.clone()]).unwrap()[0], pairs[0].1);
}

#[test]
fn first_epoch_loss_is_near_the_uniform_pointer_baseline() {
    // before learning, each step picks uniformly among the unvisited
    // positions, so the summed loss is about ln(n!)
    let n = 12;
    let mut rng = RngStream::new(8);
    let pairs = random_pairs(n, 256, &mut rng);
    let mut t = Trainer::new(TrainConfig { hidden_units: 32, embedding_dim: 16, ..TrainConfig::default() }, n, &mut RngStream::new(4))
        .unwrap();
    let trace = t.fit_epochs(&pairs, 1, &mut RngStream::new(5), &mut RngStream::new(6)).unwrap();
    let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    assert!((trace[0] - ln_fact).abs() < 0.2 * ln_fact, "{} vs {}", trace[0], ln_fact);
}

#[test]
fn sampled_decodes_are_permutations() {
    let mut rng = RngStream::new(31);
    let p = PointerNetParams::init(7, 4, 6, &mut rng).unwrap();
    let inputs: Vec<Permutation> = (0..200).map(|_| Permutation::random(7, &mut rng).unwrap()).collect();
    let mut sampler = RngStream::new(32);
    let out = seqmo::neuralnet::decode(&p, &inputs, DecodeMode::Sample(&mut sampler)).unwrap();
    for o in out {
        assert!(seqmo::permutation::validate(o.as_slice()).is_ok());
    }
}

#[test]
fn identity_accuracy_helper_counts_positions() {
    let p = PointerNetParams::zeros(4, 2, 2);
    let d = Permutation::identity(4);
    // zero network decodes greedily to the identity order
    let acc = token_accuracy(&p, &[(d.clone(), d.clone())]).unwrap();
    assert_eq!(acc, 1.0);
}

#[test]
fn learns_to_sort_into_the_identity() {
    let n = 10;
    let mut rng = RngStream::new(11);
    let pairs: Vec<_> = (0..512)
        .map(|_| (Permutation::random(n, &mut rng).unwrap(), Permutation::identity(n)))
        .collect();
    let cfg = TrainConfig { hidden_units: 64, embedding_dim: 64, ..TrainConfig::default() };
    let mut t = Trainer::new(cfg, n, &mut RngStream::new(12)).unwrap();
    let mut shuffle = RngStream::new(13);
    let mut dropout = RngStream::new(14);
    let mut reached = None;
    for epoch in (10..=200).step_by(10) {
        t.fit_epochs(&pairs, 10, &mut shuffle, &mut dropout).unwrap();
        let acc = token_accuracy(&t.params, &pairs).unwrap();
        eprintln!("epoch {epoch}: accuracy {acc:.4}");
        if acc >= 0.95 {
            reached = Some(epoch);
            break;
        }
    }
    assert!(reached.is_some(), "identity task stayed below 95% accuracy after 200 epochs");
}
