//! Complex amplitudes and the tolerance policy shared by every module.

use num_complex::Complex64;

pub type Amplitude = Complex64;

/// Absolute componentwise tolerance for amplitude equality. Canonicity and
/// merging decisions in the diagram modules quantize to this same grid.
pub const EPS: f64 = 1e-9;

pub fn approx_eq(a: Amplitude, b: Amplitude) -> bool {
    (a.re - b.re).abs() <= EPS && (a.im - b.im).abs() <= EPS
}

pub fn approx_zero(a: Amplitude) -> bool {
    a.re.abs() <= EPS && a.im.abs() <= EPS
}

/// Quantized form of a scalar, used as a hash key in unique-node tables.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct QuantAmplitude(i64, i64);

pub fn quantize(a: Amplitude) -> QuantAmplitude {
    QuantAmplitude((a.re / EPS).round() as i64, (a.im / EPS).round() as i64)
}

/// Formats `re,im` so that parsing recovers the exact bits (Rust's shortest
/// round-trip float printing).
pub fn format_amplitude(a: Amplitude) -> String {
    format!("{},{}", a.re, a.im)
}

pub fn parse_amplitude(s: &str) -> crate::Result<Amplitude> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| crate::Error::Parse(format!("expected re,im pair, got {s:?}")))?;
    let re: f64 = re
        .parse()
        .map_err(|e| crate::Error::Parse(format!("bad real part {re:?}: {e}")))?;
    let im: f64 = im
        .parse()
        .map_err(|e| crate::Error::Parse(format!("bad imaginary part {im:?}: {e}")))?;
    Ok(Amplitude::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quantization_merges_nearby_values() {
        let a = Amplitude::new(0.5, -0.25);
        let b = a + Amplitude::new(1e-13, -1e-13);
        assert_eq!(quantize(a), quantize(b));
        assert!(approx_eq(a, b));
    }

    proptest! {
        #[test]
        fn amplitude_text_round_trips(re in -1e6f64..1e6, im in -1e6f64..1e6) {
            let a = Amplitude::new(re, im);
            let back = parse_amplitude(&format_amplitude(a)).unwrap();
            prop_assert_eq!(a, back);
        }
    }
}
