//! Logistic scorer primitives.

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Splits a logit into `(p, 1 - p)` such that the two values sum to exactly
/// 1.0: the larger one comes from the logistic function and the smaller one
/// is its exact complement.
pub fn complementary_pair(z: f64) -> (f64, f64) {
    let big = sigmoid(z.abs());
    let small = 1.0 - big;
    if z >= 0.0 {
        (big, small)
    } else {
        (small, big)
    }
}

pub fn logit(weights: &[f64], bias: f64, x: &[f64]) -> f64 {
    weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias
}

/// Mean logistic loss plus `l2/2 * |w|^2`, with its gradient with respect to
/// the weights and the bias.
pub fn loss_and_gradient(weights: &[f64], bias: f64, xs: &[Vec<f64>], ys: &[f64], l2: f64) -> (f64, Vec<f64>, f64) {
    let n = xs.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; weights.len()];
    let mut grad_bias = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z = logit(weights, bias, x);
        loss += softplus(z) - y * z;
        let residual = sigmoid(z) - y;
        for (g, v) in grad.iter_mut().zip(x) {
            *g += residual * v;
        }
        grad_bias += residual;
    }
    loss /= n;
    grad_bias /= n;
    for (g, w) in grad.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad, grad_bias)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(40.0) > 0.999_999);
        assert!(sigmoid(-800.0) >= 0.0);
        assert_eq!(complementary_pair(0.0), (0.5, 0.5));
    }

    #[test]
    fn complementary_pair_sums_to_one() {
        for i in -2000..2000 {
            let z = i as f64 * 0.0173;
            let (p, q) = complementary_pair(z);
            assert_eq!(p + q, 1.0, "z = {z}");
            let (q2, p2) = complementary_pair(-z);
            assert_eq!((p, q), (p2, q2));
        }
    }

    #[test]
    fn loss_at_zero_weights_is_ln2() {
        let xs = vec![vec![1.0, 2.0], vec![-1.0, 0.5]];
        let (loss, grad, gb) = loss_and_gradient(&[0.0, 0.0], 0.0, &xs, &[1.0, 0.0], 0.0);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((gb - 0.0).abs() < 1e-12);
        assert!((grad[0] - (-0.5 * 1.0 - 0.5) / 2.0).abs() < 1e-12);
    }
}
