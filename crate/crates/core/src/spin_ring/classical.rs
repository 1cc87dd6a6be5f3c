//! Classical limit of the ring: three vectors of fixed length S replacing the
//! spin operators. Used to locate the two polar minima of the radial-field
//! ring and the tunnelling barrier between them by direct minimization over
//! the six spin angles.

use std::f64::consts::PI;

use super::{field_vectors, FieldKind};

/// Classical spins are unit vectors.
pub const SPIN_LENGTH: f64 = 1.0;

/// Azimuth of the field frame's x axis in the frame where the small-field
/// expansion is written. Only 3× this value modulo 2π matters.
pub const EXPANSION_AZIMUTH_OFFSET: f64 = PI / 2.0;

#[derive(Clone, Copy, Debug)]
pub struct ClassicalRing {
    pub jxy: f64,
    pub jz: f64,
    pub fields: [[f64; 3]; 3],
    pub spin: f64,
    /// Added to every mean azimuth passed in before building configurations.
    pub azimuth_offset: f64,
}

fn unit(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

impl ClassicalRing {
    /// Isotropic coupling J = 1 and radial field of strength `bj`.
    pub fn radial(bj: f64) -> Self {
        Self { jxy: 1.0, jz: 1.0, fields: field_vectors(FieldKind::Radial, bj), spin: SPIN_LENGTH, azimuth_offset: EXPANSION_AZIMUTH_OFFSET }
    }

    /// Energy of the configuration (θ₁, θ₂, θ₃, φ₁, φ₂, φ₃), measured from the
    /// exchange energy of three parallel spins along z.
    pub fn energy(&self, angles: &[f64; 6]) -> f64 {
        self.energy_and_gradient(angles).0
    }

    pub fn energy_and_gradient(&self, angles: &[f64; 6]) -> (f64, [f64; 6]) {
        let s = self.spin;
        let n: Vec<[f64; 3]> = (0..3).map(|i| unit(angles[i], angles[3 + i])).collect();
        let mut e = 3.0 * self.jz * s * s;
        // dE/dn_i
        let mut de = [[0.0; 3]; 3];
        for i in 0..3 {
            let j = (i + 1) % 3;
            e -= s * s * (self.jxy * (n[i][0] * n[j][0] + n[i][1] * n[j][1]) + self.jz * n[i][2] * n[j][2]);
            for (a, coupling) in [self.jxy, self.jxy, self.jz].into_iter().enumerate() {
                de[i][a] -= s * s * coupling * n[j][a];
                de[j][a] -= s * s * coupling * n[i][a];
            }
            for a in 0..3 {
                e += s * self.fields[i][a] * n[i][a];
                de[i][a] += s * self.fields[i][a];
            }
        }
        let mut g = [0.0; 6];
        for i in 0..3 {
            let (th, ph) = (angles[i], angles[3 + i]);
            let dth = [th.cos() * ph.cos(), th.cos() * ph.sin(), -th.sin()];
            let dph = [-th.sin() * ph.sin(), th.sin() * ph.cos(), 0.0];
            g[i] = (0..3).map(|a| de[i][a] * dth[a]).sum();
            g[3 + i] = (0..3).map(|a| de[i][a] * dph[a]).sum();
        }
        (e, g)
    }

    /// Minimum over all configurations whose mean zenith and mean azimuth are
    /// fixed to (θ̄, φ̄); the deviations of each angle sum to zero.
    pub fn constrained_minimum(&self, theta_bar: f64, phi_bar: f64) -> (f64, [f64; 6]) {
        let phi_bar = phi_bar + self.azimuth_offset;
        let to_angles = |x: &[f64]| -> [f64; 6] {
            [
                theta_bar + x[0],
                theta_bar + x[1],
                theta_bar - x[0] - x[1],
                phi_bar + x[2],
                phi_bar + x[3],
                phi_bar - x[2] - x[3],
            ]
        };
        let f = |x: &[f64]| -> (f64, Vec<f64>) {
            let (e, g) = self.energy_and_gradient(&to_angles(x));
            // chain rule through the linear constraint
            (e, vec![g[0] - g[2], g[1] - g[2], g[3] - g[5], g[4] - g[5]])
        };
        let (x, e) = bfgs(f, vec![0.0; 4], 2000);
        (e, to_angles(&x))
    }

    /// Unconstrained minimum over the six angles, from a set of starts
    /// around both poles and the equator.
    pub fn global_minimum(&self) -> (f64, [f64; 6]) {
        let mut best = (f64::INFINITY, [0.0; 6]);
        for &theta in &[0.05, 0.5 * PI, PI - 0.05] {
            for k in 0..6 {
                let phi = k as f64 * PI / 3.0 + 0.1;
                let x0 = vec![theta, theta + 0.01, theta - 0.01, phi, phi + 2.0, phi - 2.0];
                let (x, e) = bfgs(
                    |x: &[f64]| {
                        let a = [x[0], x[1], x[2], x[3], x[4], x[5]];
                        let (e, g) = self.energy_and_gradient(&a);
                        (e, g.to_vec())
                    },
                    x0,
                    4000,
                );
                if e < best.0 {
                    best = (e, [x[0], x[1], x[2], x[3], x[4], x[5]]);
                }
            }
        }
        best
    }

    /// Highest point of the constrained-minimum profile along θ̄ ∈ (0, π) at
    /// fixed φ̄, found by a grid scan refined with golden section.
    /// Returns (θ̄ at the top, energy there).
    pub fn path_maximum(&self, phi_bar: f64, grid: usize) -> (f64, f64) {
        let profile = |t: f64| self.constrained_minimum(t, phi_bar).0;
        let thetas: Vec<f64> = (1..grid).map(|k| PI * k as f64 / grid as f64).collect();
        let values: Vec<f64> = thetas.iter().map(|&t| profile(t)).collect();
        let k = (0..values.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
        let lo = if k == 0 { 1e-6 } else { thetas[k - 1] };
        let hi = if k + 1 >= thetas.len() { PI - 1e-6 } else { thetas[k + 1] };
        let (t, v) = crate::optimize::golden_section(|t| -profile(t), lo, hi, 1e-10);
        (t, -v)
    }

    /// Barrier between the poles along the azimuth φ̄.
    pub fn barrier(&self, phi_bar: f64) -> f64 {
        self.path_maximum(phi_bar, 36).1 - self.global_minimum().0
    }

    /// Barrier height on an azimuth grid of `n` points over [0, 2π), together
    /// with the grid azimuths whose barrier is a strict local minimum.
    pub fn barrier_scan(&self, n: usize) -> (Vec<(f64, f64)>, Vec<f64>) {
        let global = self.global_minimum().0;
        let scan: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / n as f64;
                (phi, self.path_maximum(phi, 36).1 - global)
            })
            .collect();
        let minima = (0..n)
            .filter(|&k| {
                let prev = scan[(k + n - 1) % n].1;
                let next = scan[(k + 1) % n].1;
                scan[k].1 < prev && scan[k].1 < next
            })
            .map(|k| scan[k].0)
            .collect();
        (scan, minima)
    }
}

/// Quasi-Newton minimization with an Armijo backtracking line search.
fn bfgs(f: impl Fn(&[f64]) -> (f64, Vec<f64>), x0: Vec<f64>, max_iter: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut hinv: Vec<f64> = (0..n * n).map(|k| if k % (n + 1) == 0 { 1.0 } else { 0.0 }).collect();
    for _ in 0..max_iter {
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm < 1e-15 {
            break;
        }
        let mut d: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| hinv[i * n + j] * g[j]).sum::<f64>()).collect();
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            hinv.iter_mut().enumerate().for_each(|(k, h)| *h = if k % (n + 1) == 0 { 1.0 } else { 0.0 });
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (fnew, gnew) = f(&xn);
            if fnew <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else { break };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let converged = (fx - fnew).abs() <= 1e-17 * fx.abs().max(1e-300) && gnorm < 1e-12;
        x = xn;
        fx = fnew;
        g = gnew;
        if converged {
            break;
        }
        if sy > 1e-300 {
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| hinv[i * n + j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += ((sy + yhy) * s[i] * s[j]) / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
    }
    (x, fx)
}
