//! Classical fixed-step fourth-order Runge–Kutta.

/// Scratch buffers reused across steps.
#[derive(Debug, Clone, Default)]
pub struct Rk4Work {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Work {
    pub fn new(n: usize) -> Self {
        Self { k1: vec![0.0; n], k2: vec![0.0; n], k3: vec![0.0; n], k4: vec![0.0; n], tmp: vec![0.0; n] }
    }
}

/// Advances `x` by one step of length `dt`.
///
/// `f(c, x, dx)` writes the derivative at the stage time `t + c·dt`, with
/// `c ∈ {0, 1/2, 1}`; callers translate `c` into absolute or history time.
pub fn rk4_step<E, F>(x: &mut [f64], dt: f64, work: &mut Rk4Work, mut f: F) -> Result<(), E>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
{
    let n = x.len();
    if work.k1.len() != n {
        *work = Rk4Work::new(n);
    }
    let Rk4Work { k1, k2, k3, k4, tmp } = work;

    f(0.0, x, k1)?;
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * dt * k1[i];
    }
    f(0.5, tmp, k2)?;
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * dt * k2[i];
    }
    f(0.5, tmp, k3)?;
    for i in 0..n {
        tmp[i] = x[i] + dt * k3[i];
    }
    f(1.0, tmp, k4)?;
    for i in 0..n {
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(())
}
