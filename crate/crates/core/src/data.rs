//! Reference data sets shipped with the library.

use crate::dist::Sample;

/// Breaking strengths of 63 glass fibres of length 1.5 cm.
pub const GLASS_FIBRE: [f64; 63] = [
    0.55, 0.93, 1.25, 1.36, 1.49, 1.52, 1.58, 1.61, 1.64,
    1.68, 1.73, 1.81, 2.0, 0.74, 1.04, 1.27, 1.39, 1.49,
    1.53, 1.59, 1.61, 1.66, 1.68, 1.76, 1.82, 2.01, 0.77,
    1.11, 1.28, 1.42, 1.5, 1.54, 1.6, 1.62, 1.66, 1.69,
    1.76, 1.84, 2.24, 0.81, 1.13, 1.29, 1.48, 1.5, 1.55,
    1.61, 1.62, 1.66, 1.7, 1.77, 1.84, 0.84, 1.24, 1.3,
    1.48, 1.51, 1.55, 1.61, 1.63, 1.67, 1.7, 1.78, 1.89,
];

pub fn glass_fibre() -> Sample {
    Sample::new(GLASS_FIBRE.to_vec(), "glass fibre strengths (n = 63)").expect("embedded data is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_matches_fixture() {
        let fixture: Vec<f64> = include_str!("../data/glass_fibre.txt")
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| l.trim().parse().unwrap())
            .collect();
        assert_eq!(fixture, GLASS_FIBRE.to_vec());
        let s = glass_fibre();
        assert_eq!(s.len(), 63);
        let min = GLASS_FIBRE.iter().copied().fold(f64::INFINITY, f64::min);
        let max = GLASS_FIBRE.iter().copied().fold(0.0, f64::max);
        assert_eq!((min, max), (0.55, 2.24));
    }
}
