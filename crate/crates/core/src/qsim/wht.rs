use num_complex::Complex64;

use crate::error::{Error, Result};

/// In-place normalized Walsh-Hadamard transform,
/// `out[z] = 2^(-p/2) * sum_x (-1)^(z.x) * a[x]`.
///
/// This is `H^{(x)p}` acting on a statevector, so it is unitary and its own
/// inverse. The butterfly order is fixed, so results are reproducible bit for bit.
pub fn wht(amps: &mut [Complex64]) -> Result<()> {
    let len = amps.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidLength(format!(
            "transform length {len} is not a power of two"
        )));
    }
    let mut half = 1;
    while half < len {
        for start in (0..len).step_by(half * 2) {
            for i in start..start + half {
                let a = amps[i];
                let b = amps[i + half];
                amps[i] = a + b;
                amps[i + half] = a - b;
            }
        }
        half *= 2;
    }
    let scale = (len as f64).sqrt().recip();
    for a in amps.iter_mut() {
        *a *= scale;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_transform() {
        let mut a = [1.0, 2.0, 3.0, 4.0].map(|x| Complex64::new(x, 0.0));
        wht(&mut a).unwrap();
        let expect = [5.0, -1.0, -2.0, 0.0];
        for (got, want) in a.iter().zip(expect) {
            assert!((got.re - want).abs() < 1e-12 && got.im.abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(wht(&mut []).is_err());
        assert!(wht(&mut [Complex64::new(1.0, 0.0); 6]).is_err());
        let mut one = [Complex64::new(0.5, 0.5)];
        wht(&mut one).unwrap();
        assert_eq!(one[0], Complex64::new(0.5, 0.5));
    }
}
