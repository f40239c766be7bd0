use std::f64::consts::TAU;

use num_rational::Rational64;

use crate::C64;

/// `exp(2πi r)` for a rational number of turns `r`, reduced mod 1 exactly first.
pub fn turns(r: Rational64) -> C64 {
    let den = *r.denom();
    let num = r.numer().rem_euclid(den);
    // Quarter turns are returned exactly.
    if (4 * num) % den == 0 {
        return match 4 * num / den {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    C64::from_polar(1.0, TAU * num as f64 / den as f64)
}

/// Circular delay `T_τ`: `out[k] = s[(k − τ) mod N_t]`.
pub fn circular_shift(s: &[C64], tau: i64) -> Vec<C64> {
    let n = s.len() as i64;
    if n == 0 {
        return Vec::new();
    }
    (0..n)
        .map(|k| s[(k - tau).rem_euclid(n) as usize])
        .collect()
}

/// Modulation `M_f`: `out[k] = exp(2πi f (k−1)/N_t) s[k]` with 1-based `k`.
pub fn modulate(s: &[C64], f: i64) -> Vec<C64> {
    let n = s.len() as i64;
    s.iter()
        .enumerate()
        .map(|(k, &v)| turns(Rational64::new(f * k as i64, n)) * v)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn shift_examples() {
        let s = vec![c(1.0), c(2.0), c(3.0), c(4.0)];
        assert_eq!(circular_shift(&s, 0), s);
        assert_eq!(circular_shift(&s, 4), s);
        assert_eq!(circular_shift(&s, 1), vec![c(4.0), c(1.0), c(2.0), c(3.0)]);
        assert_eq!(circular_shift(&s, -1), vec![c(2.0), c(3.0), c(4.0), c(1.0)]);
    }

    #[test]
    fn modulate_examples() {
        let s = vec![c(1.0), c(1.0)];
        assert_eq!(modulate(&s, 0), s);
        assert_eq!(modulate(&s, 2), s);
        assert_eq!(modulate(&s, 1), vec![c(1.0), c(-1.0)]);
    }

    #[test]
    fn turns_is_exact_on_integers() {
        assert_eq!(turns(Rational64::new(6, 3)), c(1.0));
        assert_eq!(turns(Rational64::new(-4, 2)), c(1.0));
        let quarter = turns(Rational64::new(5, 4));
        assert!((quarter - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn shifts_compose(v in prop::collection::vec(-5.0f64..5.0, 1..12), a in -20i64..20, b in -20i64..20) {
            let s: Vec<C64> = v.iter().map(|&x| c(x)).collect();
            prop_assert_eq!(circular_shift(&circular_shift(&s, a), b), circular_shift(&s, a + b));
        }

        #[test]
        fn modulation_is_periodic_and_unitary(v in prop::collection::vec(-5.0f64..5.0, 1..12), f in -20i64..20) {
            let s: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.5 * x)).collect();
            let n = s.len() as i64;
            let a = modulate(&s, f);
            let b = modulate(&s, f + n);
            for ((x, y), z) in a.iter().zip(&b).zip(&s) {
                prop_assert!((x - y).norm() < 1e-12);
                prop_assert!((x.norm() - z.norm()).abs() < 1e-12);
            }
        }
    }
}
