//! Constant-velocity Kalman filter over 2D positions.
//!
//! State is `[row, col, v_row, v_col]`; measurements are positions only.
//! Process noise follows the white-acceleration model. All arithmetic is
//! on fixed-size arrays; no allocation per step.

// Index loops read better than iterator chains for small dense matrices.
#![allow(clippy::needless_range_loop)]

pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

const REGULARIZATION_EPS: f64 = 1e-9;

/// Filter state: estimate and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub x: Vec4,
    pub p: Mat4,
}

impl KalmanState {
    /// New track at a measured position with zero initial velocity.
    /// Position variance starts at the measurement variance, velocity
    /// variance at `vel_var`.
    pub fn at(row: f64, col: f64, meas_var: f64, vel_var: f64) -> Self {
        let mut p = [[0.0; 4]; 4];
        p[0][0] = meas_var.max(REGULARIZATION_EPS);
        p[1][1] = meas_var.max(REGULARIZATION_EPS);
        p[2][2] = vel_var;
        p[3][3] = vel_var;
        KalmanState {
            x: [row, col, 0.0, 0.0],
            p,
        }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x[0], self.x[1])
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.x[2], self.x[3])
    }
}

fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn mat_transpose(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

fn transition(dt: f64) -> Mat4 {
    [
        [1.0, 0.0, dt, 0.0],
        [0.0, 1.0, 0.0, dt],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

fn process_noise(dt: f64, q: f64) -> Mat4 {
    let dt2 = dt * dt;
    let dt3 = dt2 * dt;
    let dt4 = dt3 * dt;
    [
        [q * dt4 / 4.0, 0.0, q * dt3 / 2.0, 0.0],
        [0.0, q * dt4 / 4.0, 0.0, q * dt3 / 2.0],
        [q * dt3 / 2.0, 0.0, q * dt2, 0.0],
        [0.0, q * dt3 / 2.0, 0.0, q * dt2],
    ]
}

fn symmetrize(p: &mut Mat4) {
    for i in 0..4 {
        for j in (i + 1)..4 {
            let m = 0.5 * (p[i][j] + p[j][i]);
            p[i][j] = m;
            p[j][i] = m;
        }
    }
}

/// Cheap positive-semidefiniteness probe: a symmetric matrix is PSD iff
/// its Cholesky factorization (with zero-pivot tolerance) succeeds.
fn is_psd(p: &Mat4) -> bool {
    let mut l = [[0.0f64; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let mut sum = p[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum < -1e-12 {
                    return false;
                }
                l[i][j] = sum.max(0.0).sqrt();
            } else if l[j][j] > 0.0 {
                l[i][j] = sum / l[j][j];
            } else {
                l[i][j] = 0.0;
            }
        }
    }
    true
}

/// Prediction step over `dt` with white-acceleration intensity `q`.
pub fn kalman_predict(state: &mut KalmanState, dt: f64, q: f64) {
    assert!(dt > 0.0, "dt must be positive");
    let f = transition(dt);
    // x = F x
    let x = state.x;
    state.x = [x[0] + dt * x[2], x[1] + dt * x[3], x[2], x[3]];
    // P = F P F' + Q
    let fp = mat_mul(&f, &state.p);
    let mut p = mat_mul(&fp, &mat_transpose(&f));
    let qm = process_noise(dt, q);
    for i in 0..4 {
        for j in 0..4 {
            p[i][j] += qm[i][j];
        }
    }
    symmetrize(&mut p);
    state.p = p;
}

/// Measurement update with a position observation and measurement
/// variance `r`.
///
/// Returns true when the covariance had to be regularized (near-singular
/// innovation or loss of positive semidefiniteness); the filter adds a
/// small diagonal term and continues.
pub fn kalman_update(state: &mut KalmanState, meas_row: f64, meas_col: f64, r: f64) -> bool {
    let mut regularized = false;

    // Innovation covariance S = H P H' + R (2x2, H selects positions).
    let p = &state.p;
    let mut s00 = p[0][0] + r;
    let s01 = p[0][1];
    let s10 = p[1][0];
    let mut s11 = p[1][1] + r;
    let mut det = s00 * s11 - s01 * s10;
    if !det.is_finite() || det.abs() < 1e-300 {
        s00 += REGULARIZATION_EPS;
        s11 += REGULARIZATION_EPS;
        det = s00 * s11 - s01 * s10;
        regularized = true;
    }
    let inv00 = s11 / det;
    let inv01 = -s01 / det;
    let inv10 = -s10 / det;
    let inv11 = s00 / det;

    // Kalman gain K = P H' S^-1 (4x2).
    let mut k = [[0.0f64; 2]; 4];
    for i in 0..4 {
        let ph0 = p[i][0];
        let ph1 = p[i][1];
        k[i][0] = ph0 * inv00 + ph1 * inv10;
        k[i][1] = ph0 * inv01 + ph1 * inv11;
    }

    // State update with the innovation.
    let y0 = meas_row - state.x[0];
    let y1 = meas_col - state.x[1];
    for i in 0..4 {
        state.x[i] += k[i][0] * y0 + k[i][1] * y1;
    }

    // Covariance update P = (I - K H) P.
    let mut ikh = [[0.0f64; 4]; 4];
    for (i, row) in ikh.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let kh = if j < 2 { k[i][j] } else { 0.0 };
            *cell = if i == j { 1.0 - kh } else { -kh };
        }
    }
    let mut new_p = mat_mul(&ikh, &state.p);
    symmetrize(&mut new_p);
    if !is_psd(&new_p) {
        for (i, row) in new_p.iter_mut().enumerate() {
            row[i] += REGULARIZATION_EPS;
        }
        regularized = true;
    }
    state.p = new_p;
    regularized
}
