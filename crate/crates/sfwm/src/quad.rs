//! Quadrature rules: Gauss–Legendre, Gauss–Hermite and adaptive Gauss–Kronrod.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Result, SfwmError};

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
}

/// Gauss–Hermite rule for the weight e^{−x²}, weights normalized to sum to one.
pub fn gauss_hermite_normalized(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut w: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    for i in 0..n / 2 {
        let xs = 0.5 * (x[n - 1 - i] - x[i]);
        let ws = 0.5 * (w[n - 1 - i] + w[i]);
        x[i] = -xs;
        x[n - 1 - i] = xs;
        w[i] = ws;
        w[n - 1 - i] = ws;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let total = pairwise_sum(&w);
    w.iter_mut().for_each(|v| *v /= total);
    (x, w)
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        v.iter().sum()
    } else {
        let m = v.len() / 2;
        pairwise_sum(&v[..m]) + pairwise_sum(&v[m..])
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    val: [f64; N],
    err: [f64; N],
}

fn gk15<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> Panel<N> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let fc = f(c);
    for k in 0..N {
        kron[k] = WGK[7] * fc[k];
        gauss[k] = WG[3] * fc[k];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for k in 0..N {
            let s = f1[k] + f2[k];
            kron[k] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    let mut val = [0.0; N];
    let mut err = [0.0; N];
    for k in 0..N {
        val[k] = kron[k] * h;
        err[k] = ((kron[k] - gauss[k]) * h).abs();
    }
    Panel { a, b, val, err }
}

/// Adaptive Gauss–Kronrod (7–15) quadrature of a vector-valued integrand over
/// the given breakpoints. Each component must satisfy err ≤ rel·|val| + abs.
/// Refinement is batched and evaluated in parallel with a deterministic order.
pub fn integrate<const N: usize, F>(f: F, breakpoints: &[f64], rel: f64, abs: f64) -> Result<[f64; N]>
where
    F: Fn(f64) -> [f64; N] + Sync,
{
    if breakpoints.len() < 2 {
        return Err(SfwmError::InvalidInput("need at least two breakpoints".into()));
    }
    let mut panels: Vec<Panel<N>> = breakpoints
        .par_windows(2)
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();
    let max_panels = 200_000;
    loop {
        let mut total = [0.0; N];
        let mut errs = [0.0; N];
        for p in &panels {
            for k in 0..N {
                total[k] += p.val[k];
                errs[k] += p.err[k];
            }
        }
        let tol: Vec<f64> = (0..N).map(|k| rel * total[k].abs() + abs).collect();
        if (0..N).all(|k| errs[k] <= tol[k]) {
            return Ok(total);
        }
        if panels.len() > max_panels {
            let achieved = (0..N)
                .map(|k| errs[k] / total[k].abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            return Err(SfwmError::Convergence {
                what: "adaptive quadrature panel limit".into(),
                achieved,
            });
        }
        // Score each panel by its worst normalized error contribution.
        let score = |p: &Panel<N>| -> f64 {
            (0..N).map(|k| p.err[k] / tol[k].max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
        };
        let mut order: Vec<usize> = (0..panels.len()).collect();
        order.sort_by(|&i, &j| score(&panels[j]).partial_cmp(&score(&panels[i])).unwrap().then(i.cmp(&j)));
        let batch = (panels.len() / 4).clamp(1, 64);
        let mut split: Vec<usize> = order[..batch].to_vec();
        split.sort_unstable();
        let halves: Vec<(Panel<N>, Panel<N>)> = split
            .par_iter()
            .map(|&i| {
                let p = panels[i];
                let m = 0.5 * (p.a + p.b);
                (gk15(&f, p.a, m), gk15(&f, m, p.b))
            })
            .collect();
        let mut next = Vec::with_capacity(panels.len() + batch);
        let mut si = 0;
        for (i, p) in panels.iter().enumerate() {
            if si < split.len() && split[si] == i {
                next.push(halves[si].0);
                next.push(halves[si].1);
                si += 1;
            } else {
                next.push(*p);
            }
        }
        if next.iter().any(|p| p.b - p.a < 1e-14 * (p.a.abs() + p.b.abs()).max(1e-300)) {
            let achieved = (0..N)
                .map(|k| errs[k] / total[k].abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            return Err(SfwmError::Convergence {
                what: "adaptive quadrature interval underflow".into(),
                achieved,
            });
        }
        panels = next;
    }
}

/// ∫_{−∞}^{∞} f(ω) dω via ω = s·t/(1−t²). `omega_breaks` are interior points
/// (in ω) where the integrand has structure.
pub fn integrate_real_line<const N: usize, F>(
    f: F,
    scale: f64,
    omega_breaks: &[f64],
    rel: f64,
    abs: f64,
) -> Result<[f64; N]>
where
    F: Fn(f64) -> [f64; N] + Sync,
{
    let s = scale;
    let to_t = |w: f64| -> f64 {
        if w == 0.0 {
            0.0
        } else {
            let r = s / w;
            // root of t² + (s/ω) t − 1 = 0 inside (−1, 1)
            let t = (-r + (r * r + 4.0).sqrt()) / 2.0;
            if w > 0.0 {
                t
            } else {
                -((-r.abs() + (r * r + 4.0).sqrt()) / 2.0)
            }
        }
    };
    let mut ts: Vec<f64> = vec![-1.0, 1.0, 0.0];
    for k in 1..8 {
        let t = k as f64 / 8.0;
        ts.push(t);
        ts.push(-t);
    }
    for &w in omega_breaks {
        ts.push(to_t(w));
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let g = |t: f64| -> [f64; N] {
        let d = 1.0 - t * t;
        if d <= 0.0 {
            return [0.0; N];
        }
        let w = s * t / d;
        let jac = s * (1.0 + t * t) / (d * d);
        let mut v = f(w);
        for x in v.iter_mut() {
            *x *= jac;
        }
        v
    };
    integrate(g, &ts, rel, abs)
}
