//! Orthogonal matching pursuit on a random unit-norm dictionary.

use dreamgen::inversion::omp_traced;
use dreamgen::rng;
use nalgebra::DMatrix;

fn main() -> dreamgen::Result<()> {
    let mut r = rng::seeded(5);
    let (d, k) = (10, 24);
    let mut dict = DMatrix::from_vec(d, k, rng::gaussian_vec(&mut r, d * k));
    for mut c in dict.column_iter_mut() {
        let n = c.norm();
        c /= n;
    }

    // A signal built from three atoms is recovered exactly.
    let y = dict.column(3) * 2.0 - dict.column(17) * 0.5 + dict.column(20) * 1.25;
    let trace = omp_traced(y.as_slice(), &dict, 3)?;
    println!("picked atoms {:?}", trace.order);
    println!("coefficients {:?} on {:?}", trace.code.values, trace.code.support);
    println!("residual norms {:?}", trace.residual_norms);
    Ok(())
}
