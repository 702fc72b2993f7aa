// IFP indices from the frequency response, checked against the positive-real conditions.

use ifp_syncnet::passivity::{ifp_index, ifp_shift, prl_conditions, routh_hurwitz, vehicle_ifp, Polynomial, RationalTF};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // 1/(λ³ + 2λ² + 3λ): q > p²/2, so α = 1/(pq − p³/4) = 1/4 at ω* = 1
    let cubic = RationalTF::from_coeffs(&[1.0], &[0.0, 3.0, 2.0, 1.0])?;
    let cert = ifp_index(&cubic)?;
    println!("cubic:      alpha = {:.10}, omega* = {:.6}", cert.alpha, cert.omega_star);
    let prl = prl_conditions(&cubic, cert.alpha);
    println!("            positive-real at alpha: {}", prl.all_ok());
    println!("            positive-real at alpha/2: {}", prl_conditions(&cubic, cert.alpha / 2.0).all_ok());

    // a pure integrator is passive
    let integrator = RationalTF::from_coeffs(&[1.0], &[0.0, 1.0])?;
    println!("integrator: alpha = {}", ifp_index(&integrator)?.alpha);

    // vehicle longitudinal model 1/(τλ³ + λ² + μλ)
    let (tau, mu) = (0.1, 2.0);
    let vehicle = RationalTF::from_coeffs(&[1.0], &[0.0, mu, 1.0, tau])?;
    println!(
        "vehicle:    swept alpha = {:.10}, closed form 1/mu^2 = {}",
        ifp_index(&vehicle)?.alpha,
        vehicle_ifp(tau, mu)?.alpha
    );

    // an unstable pole makes the index undefined
    let unstable = RationalTF::from_coeffs(&[1.0], &[-1.0, 1.0])?;
    println!("unstable:   {}", ifp_index(&unstable).unwrap_err());

    // the denominator of a third-order loop with gain 0.5 is Hurwitz
    let den = Polynomial::new(vec![0.5, 3.0, 2.0, 1.0]);
    println!("s^3+2s^2+3s+0.5 Hurwitz: {}", routh_hurwitz(&den)?);

    let shift = ifp_shift(cert.alpha, 1.0)?;
    println!("shift with b = 1: alpha_hat = {:.4}, gamma = {:.4}", shift.alpha_hat, shift.gamma);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
