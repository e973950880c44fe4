//! Finite-difference checks of every backward pass and a naive convolution
//! reference.

use coopsense_core::neural::*;
use coopsense_core::Hypothesis;
use proptest::prelude::*;

const H: f64 = 1e-6;
const TOL: f64 = 1e-5;

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-3)
}

/// Central difference of `f` with respect to `x[i]` for every `i`.
fn numeric_grad(x: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut buf = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = buf[i];
            buf[i] = orig + H;
            let up = f(&buf);
            buf[i] = orig - H;
            let down = f(&buf);
            buf[i] = orig;
            (up - down) / (2.0 * H)
        })
        .collect()
}

fn assert_close(analytic: &[f64], numeric: &[f64]) -> Result<(), TestCaseError> {
    prop_assert_eq!(analytic.len(), numeric.len());
    for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        prop_assert!(rel_err(a, n) < TOL, "entry {}: analytic {} numeric {}", i, a, n);
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn vals(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

/// Random `(h, w, c)` tensor with `h, w ≤ 6`, `c ≤ 2`, plus a same-length
/// upstream gradient.
fn tensor_and_weight(max_c: usize) -> impl Strategy<Value = (Tensor, Vec<f64>)> {
    (1usize..=6, 1usize..=6, 1usize..=max_c).prop_flat_map(|(h, w, c)| {
        (vals(h * w * c), vals(h * w * c)).prop_map(move |(d, r)| (Tensor::from_vec(h, w, c, d).unwrap(), r))
    })
}

fn conv_case() -> impl Strategy<Value = (Tensor, ConvParams, Vec<f64>)> {
    (1usize..=6, 1usize..=6, 1usize..=2, 1usize..=2).prop_flat_map(|(h, w, ci, co)| {
        (vals(h * w * ci), vals(9 * ci * co), vals(co), vals(h * w * co)).prop_map(move |(x, wt, b, r)| {
            let x = Tensor::from_vec(h, w, ci, x).unwrap();
            let p = ConvParams { in_ch: ci, out_ch: co, weights: wt, bias: b };
            (x, p, r)
        })
    })
}

fn naive_conv(x: &Tensor, p: &ConvParams) -> Tensor {
    let (h, w, _) = x.shape();
    let mut out = Tensor::zeros(h, w, p.out_ch);
    for r in 0..h {
        for c in 0..w {
            for co in 0..p.out_ch {
                let mut acc = p.bias[co];
                for ky in 0..3 {
                    for kx in 0..3 {
                        let (yy, xx) = (r as isize + ky as isize - 1, c as isize + kx as isize - 1);
                        if yy < 0 || xx < 0 || yy >= h as isize || xx >= w as isize {
                            continue;
                        }
                        for ci in 0..p.in_ch {
                            acc += p.weights[p.w_index(ky, kx, ci, co)] * x.at(yy as usize, xx as usize, ci);
                        }
                    }
                }
                let i = out.index(r, c, co);
                out.data[i] = acc;
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conv_forward_equals_naive_loops((x, p, _) in conv_case()) {
        let fast = conv3x3_forward(&x, &p).unwrap();
        let slow = naive_conv(&x, &p);
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn conv_backward_matches_differences((x, p, r) in conv_case()) {
        let g = Tensor::from_vec(x.height, x.width, p.out_ch, r.clone()).unwrap();
        let (gx, gp) = conv3x3_backward(&x, &p, &g).unwrap();
        let nx = numeric_grad(&x.data, |d| {
            let t = Tensor { data: d.to_vec(), ..x.clone() };
            dot(&conv3x3_forward(&t, &p).unwrap().data, &r)
        });
        assert_close(&gx.data, &nx)?;
        let nw = numeric_grad(&p.weights, |w| {
            let q = ConvParams { weights: w.to_vec(), ..p.clone() };
            dot(&conv3x3_forward(&x, &q).unwrap().data, &r)
        });
        assert_close(&gp.weights, &nw)?;
        let nb = numeric_grad(&p.bias, |b| {
            let q = ConvParams { bias: b.to_vec(), ..p.clone() };
            dot(&conv3x3_forward(&x, &q).unwrap().data, &r)
        });
        assert_close(&gp.bias, &nb)?;
    }

    #[test]
    fn relu_backward_matches_differences((x, r) in tensor_and_weight(2)) {
        prop_assume!(x.data.iter().all(|v| v.abs() > 10.0 * H));
        let g = Tensor { data: r.clone(), ..x.clone() };
        let gx = relu_backward(&x, &g).unwrap();
        let n = numeric_grad(&x.data, |d| dot(&relu_forward(&Tensor { data: d.to_vec(), ..x.clone() }).data, &r));
        assert_close(&gx.data, &n)?;
    }

    #[test]
    fn pool_backward_matches_differences((x, _) in tensor_and_weight(2), seed in any::<u64>()) {
        let (y, idx) = maxpool2x2_forward(&x);
        // Skip inputs where a window's top two entries (padding included) are nearly tied.
        for r in 0..y.height {
            for c in 0..y.width {
                for ch in 0..y.channels {
                    let mut w: Vec<f64> = Vec::new();
                    for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        let (yy, xx) = (2 * r + dy, 2 * c + dx);
                        w.push(if yy < x.height && xx < x.width { x.at(yy, xx, ch) } else { 0.0 });
                    }
                    w.sort_by(|a, b| b.partial_cmp(a).unwrap());
                    prop_assume!(w[0] - w[1] > 10.0 * H);
                }
            }
        }
        let r: Vec<f64> = (0..y.data.len()).map(|i| ((seed.rotate_left(i as u32) % 1000) as f64) / 500.0 - 1.0).collect();
        let g = Tensor { data: r.clone(), ..y.clone() };
        let gx = maxpool2x2_backward(&idx, &g).unwrap();
        let n = numeric_grad(&x.data, |d| dot(&maxpool2x2_forward(&Tensor { data: d.to_vec(), ..x.clone() }).0.data, &r));
        assert_close(&gx.data, &n)?;
    }

    #[test]
    fn fc_backward_matches_differences(
        (x, w, b, r) in (1usize..=12, 1usize..=8).prop_flat_map(|(ni, no)| (vals(ni), vals(ni * no), vals(no), vals(no)))
    ) {
        let p = FcParams { n_in: x.len(), n_out: b.len(), weights: w, bias: b };
        let (gx, gp) = fc_backward(&x, &p, &r).unwrap();
        let nx = numeric_grad(&x, |d| dot(&fc_forward(d, &p).unwrap(), &r));
        assert_close(&gx, &nx)?;
        let nw = numeric_grad(&p.weights, |w| dot(&fc_forward(&x, &FcParams { weights: w.to_vec(), ..p.clone() }).unwrap(), &r));
        assert_close(&gp.weights, &nw)?;
        let nb = numeric_grad(&p.bias, |b| dot(&fc_forward(&x, &FcParams { bias: b.to_vec(), ..p.clone() }).unwrap(), &r));
        assert_close(&gp.bias, &nb)?;
    }

    #[test]
    fn softmax_cross_entropy_backward_matches_differences(
        (x, w) in (1usize..=8).prop_flat_map(|n| (vals(n), vals(2 * n))),
        h1 in any::<bool>(),
    ) {
        let label = Hypothesis::from_active(h1);
        let p = SoftmaxParams { n_in: x.len(), weights: w };
        let loss = |x: &[f64], p: &SoftmaxParams| cross_entropy(softmax2(x, p).unwrap(), label).0;
        let (_, dlogits) = cross_entropy(softmax2(&x, &p).unwrap(), label);
        let (gx, gp) = softmax_backward(&x, &p, dlogits).unwrap();
        let nx = numeric_grad(&x, |d| loss(d, &p));
        assert_close(&gx, &nx)?;
        let nw = numeric_grad(&p.weights, |w| loss(&x, &SoftmaxParams { weights: w.to_vec(), ..p.clone() }));
        assert_close(&gp.weights, &nw)?;
    }

    #[test]
    fn softmax_is_a_distribution(z0 in -15.0f64..15.0, z1 in -15.0f64..15.0) {
        let p = softmax_from_logits([z0, z1]);
        prop_assert!(p[0] > 0.0 && p[0] < 1.0 && p[1] > 0.0 && p[1] < 1.0);
        prop_assert!((p[0] + p[1] - 1.0).abs() <= 1e-12);
        prop_assert_eq!(p[0] > p[1], z0 > z1);
    }

    #[test]
    fn adam_step_descends_a_quadratic(x0 in -10.0f64..10.0, c in -10.0f64..10.0) {
        prop_assume!((x0 - c).abs() > 1e-2);
        let f = |x: f64| (x - c) * (x - c);
        let mut x = [x0];
        let g = [2.0 * (x0 - c)];
        let mut st = AdamState::new(AdamConfig::default(), &[1]);
        adam_step(&mut [&mut x[..]], &[&g[..]], &mut st).unwrap();
        prop_assert!(f(x[0]) < f(x0));
    }
}

#[test]
fn confident_correct_output_costs_at_most_the_floor() {
    let (loss, _) = cross_entropy([1.0 - 1e-15, 1e-15], Hypothesis::H0);
    assert!(loss <= -(1.0 - PROB_FLOOR).ln() + 1e-15, "{loss}");
}
