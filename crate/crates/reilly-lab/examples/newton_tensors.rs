//! Newton transformations, mean curvatures and the quartic minimum on a few
//! explicit second fundamental forms.

use nalgebra::DMatrix;
use reilly_lab::immersion::clifford_ts;
use reilly_lab::tensorlab::{
    h_t, mean_curvature_tensor, mean_profile, newton_tensor, quartic_minimum, quartic_minimum_brute_force,
    SecondFundamentalForm,
};

fn main() -> reilly_lab::Result<()> {
    let a2: f64 = 0.5;
    let (a, b) = (a2.sqrt(), (1.0 - a2).sqrt());
    // Clifford torus S^2(a) x S^2(b) in R^6: one radial normal and one normal
    // inside the unit sphere.
    let radial = DMatrix::identity(4, 4);
    let inner = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-b / a, -b / a, a / b, a / b]));
    let h = SecondFundamentalForm::new(vec![radial, inner])?;
    let t2 = newton_tensor(&h, 2)?;
    println!("T_2 =\n{}", t2.matrix()?);
    println!("closed form (t, s) = {:?}", clifford_ts(2, 4, a, 0.0));
    println!("H_T2 = {}", h_t(t2.matrix()?, &h)?.transpose());

    let prof = mean_profile(&h)?;
    for r in 0..=4 {
        println!("S_{r} = {:?}", prof.s_vector(r).map(|v| v.as_slice().to_vec()));
    }

    let k = [0.9, 1.1, 1.4, 0.2];
    let t = mean_curvature_tensor(&SecondFundamentalForm::from_principal(&k)?)?;
    println!("T = nH I - h: min eigenvalue {:.6}, min eigenvalue of T' {:.6}", t.t_min, t.tprime_min);

    let (sa, sb) = (4.0, 5.5);
    let closed = quartic_minimum(sa, sb)?;
    let (brute, at) = quartic_minimum_brute_force(sa, sb, 200_000)?;
    println!("quartic minimum a={sa} b={sb}: closed {:.9} brute force {:.9} at {:?}", closed.min, brute, at);
    Ok(())
}
