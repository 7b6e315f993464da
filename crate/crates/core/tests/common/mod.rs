#![allow(dead_code)]

use gauss_quad::legendre::GaussLegendre;
use qrbsde::basis::BasisContext;
use qrbsde::rng::{stream_id, StreamDomain, StreamFactory};

/// Gram matrix of the basis under `nu`, by tensor Gauss-Legendre in
/// `theta = atan(x - center)`. For `mu = 2` both the weight `pdf * sec^2` and
/// `F(tan theta)` are smooth in `theta`, so the rule converges spectrally.
pub fn quadrature_gram(basis: &BasisContext, nodes: usize) -> Vec<Vec<f64>> {
    let rule = GaussLegendre::new(nodes).unwrap();
    let half = std::f64::consts::FRAC_PI_2;
    let m = basis.measure();
    let d = basis.dim();
    // Per coordinate: abscissae and weights in x.
    let axes: Vec<Vec<(f64, f64)>> = (0..d)
        .map(|l| {
            rule.as_node_weight_pairs()
                .iter()
                .map(|&(s, w)| {
                    let theta = half * s;
                    let z = theta.tan();
                    let x = m.center()[l] + z;
                    (x, w * half * m.pdf(l, x).unwrap() * (1.0 + z * z))
                })
                .collect()
        })
        .collect();
    let n = basis.len();
    let mut gram = vec![vec![0.0; n]; n];
    let mut phi = vec![0.0; n];
    let mut scratch = basis.scratch();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    loop {
        let mut w = 1.0;
        for l in 0..d {
            let (xl, wl) = axes[l][idx[l]];
            x[l] = xl;
            w *= wl;
        }
        basis.phi_all(&x, &mut scratch, &mut phi);
        for a in 0..n {
            let pa = w * phi[a];
            for b in a..n {
                gram[a][b] += pa * phi[b];
            }
        }
        let mut l = 0;
        loop {
            if l == d {
                for a in 0..n {
                    for b in 0..a {
                        gram[a][b] = gram[b][a];
                    }
                }
                return gram;
            }
            idx[l] += 1;
            if idx[l] < nodes {
                break;
            }
            idx[l] = 0;
            l += 1;
        }
    }
}

/// Monte-Carlo Gram matrix from `m` draws of `nu`.
pub fn monte_carlo_gram(basis: &BasisContext, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = basis.len();
    let streams = StreamFactory::new(seed);
    let mut gram = vec![vec![0.0; n]; n];
    let mut phi = vec![0.0; n];
    let mut scratch = basis.scratch();
    let mut x = vec![0.0; basis.dim()];
    for p in 0..m {
        let mut s = streams.stream(stream_id(StreamDomain::Auxiliary, 0, p as u64));
        basis.measure().sample_into(&mut s, &mut x);
        basis.phi_all(&x, &mut scratch, &mut phi);
        for a in 0..n {
            for b in a..n {
                gram[a][b] += phi[a] * phi[b];
            }
        }
    }
    for a in 0..n {
        for b in a..n {
            gram[a][b] /= m as f64;
            gram[b][a] = gram[a][b];
        }
    }
    gram
}

pub fn max_identity_deviation(gram: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (a, row) in gram.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((v - want).abs());
        }
    }
    worst
}

/// Counts of total-degree and hyperbolic-cross sets for every `deg <= max_deg`,
/// by scanning the cube `[0, max_deg]^d`.
pub fn brute_force_counts(d: usize, max_deg: u32) -> (Vec<u64>, Vec<u64>) {
    let mut total = vec![0u64; max_deg as usize + 1];
    let mut hyper = vec![0u64; max_deg as usize + 1];
    let mut k = vec![0u32; d];
    loop {
        let sum: u32 = k.iter().sum();
        let prod: u64 = k.iter().map(|&v| u64::from(v.max(1))).product();
        if sum <= max_deg {
            total[sum as usize] += 1;
        }
        if prod <= u64::from(max_deg) {
            hyper[prod as usize] += 1;
        }
        let mut l = 0;
        loop {
            if l == d {
                // cumulative counts
                for g in 1..=max_deg as usize {
                    total[g] += total[g - 1];
                    hyper[g] += hyper[g - 1];
                }
                return (total, hyper);
            }
            k[l] += 1;
            if k[l] <= max_deg {
                break;
            }
            k[l] = 0;
            l += 1;
        }
    }
}

/// Kolmogorov-Smirnov statistic of `sample` against the CDF `cdf`.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
