//! Geometric ladder of radius guesses.

use crate::error::{Error, Result};

const MAX_GUESSES: usize = 1 << 20;

/// The guesses `(1+β)^i` for `⌊log_{1+β} d_min⌋ ≤ i ≤ ⌈log_{1+β} d_max⌉`.
///
/// Exponents are found by walking powers of `1+β` from `1` instead of taking
/// floating logarithms, so exact powers (`d_min = 2`, `β = 1`) land on the
/// right side of the floor and ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessLadder {
    d_min: f64,
    d_max: f64,
    beta: f64,
    first_exponent: i64,
    guesses: Vec<f64>,
}

impl GuessLadder {
    pub fn new(d_min: f64, d_max: f64, beta: f64) -> Result<Self> {
        if !(d_min > 0.0 && d_min <= d_max && d_max.is_finite()) {
            return Err(Error::InvalidBounds { d_min, d_max });
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidBeta(beta));
        }
        let base = 1.0 + beta;
        if base == 1.0 {
            return Err(Error::InvalidBeta(beta));
        }

        // largest power not above d_min
        let mut exponent = 0i64;
        let mut g = 1.0f64;
        if g <= d_min {
            while g * base <= d_min {
                g *= base;
                exponent += 1;
            }
        } else {
            while g > d_min {
                g /= base;
                exponent -= 1;
            }
        }

        let mut guesses = vec![g];
        while g < d_max {
            g *= base;
            guesses.push(g);
            if guesses.len() > MAX_GUESSES {
                return Err(Error::InvalidParameter(format!(
                    "ladder for [{d_min}, {d_max}] with beta {beta} exceeds {MAX_GUESSES} guesses"
                )));
            }
        }
        Ok(Self {
            d_min,
            d_max,
            beta,
            first_exponent: exponent,
            guesses,
        })
    }

    /// A ladder holding exactly one guess.
    pub fn single(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidBounds {
                d_min: gamma,
                d_max: gamma,
            });
        }
        Ok(Self {
            d_min: gamma,
            d_max: gamma,
            beta: 1.0,
            first_exponent: 0,
            guesses: vec![gamma],
        })
    }

    pub fn guesses(&self) -> &[f64] {
        &self.guesses
    }

    pub fn len(&self) -> usize {
        self.guesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.guesses.is_empty()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    /// Exponent of the smallest guess.
    pub fn first_exponent(&self) -> i64 {
        self.first_exponent
    }

    /// Index of the smallest guess that is at least `r`, if any.
    pub fn covering_index(&self, r: f64) -> Option<usize> {
        self.guesses.iter().position(|&g| g >= r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degenerate_ladder() {
        assert_eq!(GuessLadder::new(2.0, 2.0, 1.0).unwrap().guesses(), &[2.0]);
    }

    #[test]
    fn powers_of_two() {
        let l = GuessLadder::new(1.0, 10.0, 1.0).unwrap();
        assert_eq!(l.guesses(), &[1.0, 2.0, 4.0, 8.0, 16.0]);
        assert_eq!(l.first_exponent(), 0);
        let l = GuessLadder::new(0.5, 8.0, 1.0).unwrap();
        assert_eq!(l.guesses(), &[0.5, 1.0, 2.0, 4.0, 8.0]);
        assert_eq!(l.first_exponent(), -1);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            GuessLadder::new(0.0, 1.0, 1.0).unwrap_err(),
            Error::InvalidBounds { d_min: 0.0, d_max: 1.0 }
        );
        assert!(GuessLadder::new(3.0, 1.0, 1.0).is_err());
        assert_eq!(GuessLadder::new(1.0, 2.0, 0.0).unwrap_err(), Error::InvalidBeta(0.0));
    }

    proptest! {
        #[test]
        fn ladder_shape(d_min in 1e-4f64..1e3, spread in 1.0f64..1e4, beta in 0.01f64..2.0) {
            let d_max = d_min * spread;
            let l = GuessLadder::new(d_min, d_max, beta).unwrap();
            let g = l.guesses();
            prop_assert!(g[0] <= d_min);
            prop_assert!(*g.last().unwrap() >= d_max);
            for w in g.windows(2) {
                prop_assert!(w[1] > w[0]);
                prop_assert!((w[1] / w[0] - (1.0 + beta)).abs() < 1e-9);
            }
            let expected = (d_max / d_min).ln() / (1.0 + beta).ln() + 1.0;
            prop_assert!((g.len() as f64 - expected).abs() <= 2.0);
        }

        #[test]
        fn every_radius_has_a_tight_guess(d_min in 1e-3f64..10.0, spread in 1.0f64..1e3,
                                          beta in 0.05f64..1.5, frac in 0.0f64..=1.0) {
            let d_max = d_min * spread;
            let l = GuessLadder::new(d_min, d_max, beta).unwrap();
            let r = d_min + frac * (d_max - d_min);
            let i = l.covering_index(r).unwrap();
            let gamma = l.guesses()[i];
            prop_assert!(r <= gamma && gamma < (1.0 + beta) * r * (1.0 + 1e-12));
        }
    }
}
