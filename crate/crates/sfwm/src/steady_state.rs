//! Zeroth-order steady state of the four-level atom.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::DopplerShift;
use crate::error::{Result, SfwmError};
use crate::model::{DriveConfig, LevelScheme};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// ⟨σ_jk⟩ with 1-based labels stored at `sigma[j-1][k-1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub sigma: [[Complex64; 4]; 4],
}

impl SteadyState {
    pub fn ground() -> Self {
        let mut sigma = [[Complex64::new(0.0, 0.0); 4]; 4];
        sigma[0][0] = Complex64::new(1.0, 0.0);
        SteadyState { sigma }
    }

    /// ⟨σ_jk⟩ with 1-based indices.
    pub fn s(&self, j: usize, k: usize) -> Complex64 {
        self.sigma[j - 1][k - 1]
    }

    pub fn pop(&self, j: usize) -> f64 {
        self.sigma[j - 1][j - 1].re
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|j| self.sigma[j][j]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for j in 0..4 {
            for k in 0..4 {
                e = e.max((self.sigma[j][k] - self.sigma[k][j].conj()).norm());
            }
        }
        e
    }
}

fn idx(j: usize, k: usize) -> usize {
    4 * (j - 1) + (k - 1)
}

type Terms = Vec<(Complex64, (usize, usize))>;

/// Right-hand sides of the zeroth-order equations for σ_jk, as linear terms.
fn equations(scheme: &LevelScheme, drive: &DriveConfig, shift: &DopplerShift) -> Vec<((usize, usize), Terms)> {
    let d = scheme.decoherence();
    let (g21, g31, g42, g43) = (scheme.gamma21, scheme.gamma31, scheme.gamma42, scheme.gamma43);
    let oc = drive.omega_c;
    let od = drive.omega_d;
    let (d1, d2, d3) = (shift.delta1, shift.delta2, shift.delta3);
    let h = 0.5 * I;
    let r = |x: f64| Complex64::new(x, 0.0);
    vec![
        (
            (1, 1),
            vec![(r(g21), (2, 2)), (r(g31), (3, 3)), (h * oc.conj(), (1, 2)), (-h * oc, (2, 1))],
        ),
        (
            (2, 2),
            vec![
                (r(g42), (4, 4)),
                (r(-g21), (2, 2)),
                (h * oc, (2, 1)),
                (-h * oc.conj(), (1, 2)),
                (-h * od, (4, 2)),
                (h * od.conj(), (2, 4)),
            ],
        ),
        ((3, 3), vec![(r(g43), (4, 4)), (r(-g31), (3, 3))]),
        (
            (4, 4),
            vec![(r(-(g42 + g43)), (4, 4)), (h * od, (4, 2)), (-h * od.conj(), (2, 4))],
        ),
        (
            (2, 1),
            vec![
                (r(-0.5 * d.g21) - I * d1, (2, 1)),
                (h * oc.conj(), (2, 2)),
                (-h * oc.conj(), (1, 1)),
                (-h * od, (4, 1)),
            ],
        ),
        (
            (4, 1),
            vec![
                (r(-0.5 * d.g41) - I * d2, (4, 1)),
                (h * oc.conj(), (4, 2)),
                (-h * od.conj(), (2, 1)),
            ],
        ),
        (
            (4, 2),
            vec![
                (r(-0.5 * d.g42) + I * (d1 - d2), (4, 2)),
                (h * oc, (4, 1)),
                (h * od.conj(), (4, 4)),
                (-h * od.conj(), (2, 2)),
            ],
        ),
        (
            (3, 1),
            vec![(r(-0.5 * d.g31) - I * d3, (3, 1)), (h * oc.conj(), (3, 2))],
        ),
        (
            (3, 2),
            vec![
                (r(-0.5 * d.g32) + I * (d1 - d3), (3, 2)),
                (h * oc, (3, 1)),
                (h * od.conj(), (3, 4)),
            ],
        ),
        (
            (3, 4),
            vec![(r(-0.5 * d.g43) + I * (d2 - d3), (3, 4)), (h * od, (3, 2))],
        ),
    ]
}

/// Full linear solve of the zeroth-order equations, their adjoints and the
/// trace condition. `doppler_shift` replaces (Δ1, Δ2, 0).
pub fn solve_steady(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    doppler_shift: Option<&DopplerShift>,
) -> Result<SteadyState> {
    let shift = doppler_shift.copied().unwrap_or_else(|| DopplerShift::rest(drive));
    let n = 16;
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    let mut b = DVector::<Complex64>::zeros(n);
    for ((j, k), terms) in equations(scheme, drive, &shift) {
        let row = idx(j, k);
        for (c, (p, q)) in &terms {
            a[(row, idx(*p, *q))] += *c;
        }
        if j != k {
            let row = idx(k, j);
            for (c, (p, q)) in &terms {
                a[(row, idx(*q, *p))] += c.conj();
            }
        }
    }
    let trace_row = idx(1, 1);
    for c in 0..n {
        a[(trace_row, c)] = Complex64::new(0.0, 0.0);
    }
    for j in 1..=4 {
        a[(trace_row, idx(j, j))] = Complex64::new(1.0, 0.0);
    }
    b[trace_row] = Complex64::new(1.0, 0.0);

    let lu = a.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].norm()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(dmin > 1e-13 * dmax) {
        return Err(SfwmError::DegenerateSteadyState);
    }
    let x = lu.solve(&b).ok_or(SfwmError::DegenerateSteadyState)?;
    let resid = (&a * &x - &b).camax();
    if !(resid <= 1e-10) {
        return Err(SfwmError::Convergence {
            what: "steady-state residual".into(),
            achieved: resid,
        });
    }
    let mut sigma = [[Complex64::new(0.0, 0.0); 4]; 4];
    for j in 1..=4 {
        for k in 1..=4 {
            sigma[j - 1][k - 1] = x[idx(j, k)];
        }
    }
    Ok(SteadyState { sigma })
}

/// Large-detuning closed form.
pub fn gsa_steady(scheme: &LevelScheme, drive: &DriveConfig) -> Result<SteadyState> {
    if drive.delta1 == 0.0 {
        return Err(SfwmError::Domain("GSA steady state requires delta1 != 0".into()));
    }
    let d = scheme.decoherence();
    let d1 = drive.delta1;
    let mut s = SteadyState::ground();
    let s12 = -drive.omega_c / (2.0 * d1);
    let s14 = -I * drive.omega_c * drive.omega_d / (Complex64::new(2.0 * d.g41 * d1, 0.0) - 4.0 * I * d1 * drive.delta2);
    s.sigma[0][1] = s12;
    s.sigma[1][0] = s12.conj();
    s.sigma[0][3] = s14;
    s.sigma[3][0] = s14.conj();
    Ok(s)
}
