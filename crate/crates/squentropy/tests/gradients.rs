//! Finite-difference verification of every analytic gradient.
//!
//! Central differences with step `h` approximate the directional derivative
//! to O(h^2); each analytic gradient coordinate must agree with the
//! numerical one up to a small relative error, with an absolute escape for
//! coordinates where the gradient itself is near zero.

use squentropy::loss::{Loss, RescaleParams};
use squentropy::mlp::{Architecture, MlpParameters};
use squentropy::numerics::Rng;

const H: f64 = 1e-6;

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-8)
}

fn check_grad(numerical: f64, analytic: f64, what: &str) {
    let ok = (numerical - analytic).abs() < 1e-8 || relative_error(numerical, analytic) < 1e-5;
    assert!(
        ok,
        "{what}: numerical {numerical} vs analytic {analytic} (rel {})",
        relative_error(numerical, analytic)
    );
}

fn check_loss_gradient(loss: &Loss, logits: &[f64], label: usize) {
    let out = loss.evaluate(logits, label);
    for j in 0..logits.len() {
        let mut plus = logits.to_vec();
        plus[j] += H;
        let mut minus = logits.to_vec();
        minus[j] -= H;
        let numerical =
            (loss.evaluate(&plus, label).value - loss.evaluate(&minus, label).value) / (2.0 * H);
        check_grad(
            numerical,
            out.grad[j],
            &format!("{} logit {j} of {logits:?} y={label}", loss.name()),
        );
    }
}

#[test]
fn loss_gradients_match_finite_differences() {
    let losses = [
        Loss::Squentropy,
        Loss::CrossEntropy,
        Loss::Square(RescaleParams::default()),
        Loss::Square(RescaleParams::new(1.0, 5.0).unwrap()),
        Loss::Square(RescaleParams::new(15.0, 30.0).unwrap()),
    ];
    // A few fixed vectors that exercise the interesting spots: the true
    // logit largest, smallest, and mixed signs.
    let cases: [(&[f64], usize); 4] = [
        (&[2.0, 0.0, -1.0], 0),
        (&[0.5, 1.5, -0.5], 2),
        (&[-1.0, -2.0], 1),
        (&[0.3, 0.7, 1.9, -2.2, 0.1], 3),
    ];
    for loss in &losses {
        for (logits, label) in &cases {
            check_loss_gradient(loss, logits, *label);
        }
    }
}

#[test]
fn loss_gradients_match_on_random_inputs() {
    let mut rng = Rng::new(416);
    let losses = [
        Loss::Squentropy,
        Loss::CrossEntropy,
        Loss::Square(RescaleParams::new(1.0, 5.0).unwrap()),
    ];
    for round in 0..30 {
        let c = 2 + (round % 5);
        let logits: Vec<f64> = (0..c).map(|_| rng.uniform(-3.0, 3.0)).collect();
        let label = (rng.next_u64() % c as u64) as usize;
        for loss in &losses {
            check_loss_gradient(loss, &logits, label);
        }
    }
}

/// End-to-end check through the network: perturb every weight and bias and
/// compare the loss difference against the backpropagated gradient.
fn check_network_gradient(loss: &Loss, seed: u64) {
    let arch = Architecture::new(2, vec![5, 4], 3).unwrap();
    let mut rng = Rng::new(seed);
    let params = MlpParameters::init(&arch, &mut rng);
    let x = [rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)];
    let label = (rng.next_u64() % 3) as usize;

    let pass = params.forward(&x);
    let out = loss.evaluate(&pass.logits, label);
    let grads = params.backward(&pass, &out.grad);

    let loss_at = |p: &MlpParameters| loss.evaluate(&p.logits(&x), label).value;

    for l in 0..params.layers().len() {
        let rows = params.layers()[l].weight.rows();
        let cols = params.layers()[l].weight.cols();
        for r in 0..rows {
            for c in 0..cols {
                let mut plus = params.clone();
                let w = plus.layers()[l].weight.get(r, c);
                plus.layers_mut()[l].weight.set(r, c, w + H);
                let mut minus = params.clone();
                minus.layers_mut()[l].weight.set(r, c, w - H);
                let numerical = (loss_at(&plus) - loss_at(&minus)) / (2.0 * H);
                check_grad(
                    numerical,
                    grads.layers[l].weight.get(r, c),
                    &format!("{} W[{l}][{r},{c}]", loss.name()),
                );
            }
        }
        for b in 0..params.layers()[l].bias.len() {
            let mut plus = params.clone();
            plus.layers_mut()[l].bias[b] += H;
            let mut minus = params.clone();
            minus.layers_mut()[l].bias[b] -= H;
            let numerical = (loss_at(&plus) - loss_at(&minus)) / (2.0 * H);
            check_grad(
                numerical,
                grads.layers[l].bias[b],
                &format!("{} b[{l}][{b}]", loss.name()),
            );
        }
    }
}

#[test]
fn backprop_matches_finite_differences_for_squentropy() {
    check_network_gradient(&Loss::Squentropy, 1001);
}

#[test]
fn backprop_matches_finite_differences_for_cross_entropy() {
    check_network_gradient(&Loss::CrossEntropy, 1002);
}

#[test]
fn backprop_matches_finite_differences_for_square() {
    check_network_gradient(&Loss::Square(RescaleParams::new(1.0, 5.0).unwrap()), 1003);
}

#[test]
fn backprop_matches_finite_differences_for_linear_model() {
    // No hidden layers: the gradient is exactly the outer product, and the
    // finite difference should agree tightly.
    let arch = Architecture::new(3, vec![], 2).unwrap();
    let mut rng = Rng::new(2005);
    let params = MlpParameters::init(&arch, &mut rng);
    let x = [0.4, -0.9, 1.3];
    let loss = Loss::Squentropy;
    let pass = params.forward(&x);
    let out = loss.evaluate(&pass.logits, 1);
    let grads = params.backward(&pass, &out.grad);
    for r in 0..2 {
        for c in 0..3 {
            let mut plus = params.clone();
            let w = plus.layers()[0].weight.get(r, c);
            plus.layers_mut()[0].weight.set(r, c, w + H);
            let mut minus = params.clone();
            minus.layers_mut()[0].weight.set(r, c, w - H);
            let numerical = (loss.evaluate(&plus.logits(&x), 1).value
                - loss.evaluate(&minus.logits(&x), 1).value)
                / (2.0 * H);
            check_grad(numerical, grads.layers[0].weight.get(r, c), "linear W");
        }
    }
}
