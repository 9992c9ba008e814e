use num_complex::Complex64;

/// Neumaier (improved Kahan–Babuška) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = NeumaierSum::default();
    values.into_iter().for_each(|x| acc.add(x));
    acc.total()
}

pub fn compensated_sum_complex<I: IntoIterator<Item = Complex64>>(values: I) -> Complex64 {
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for z in values {
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.total(), im.total())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let s = compensated_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(s, 2.0);
    }

    #[test]
    fn complex_parts_summed_independently() {
        let s = compensated_sum_complex([Complex64::new(1e16, 1.0), Complex64::new(1.0, 1e-16), Complex64::new(-1e16, 0.0)]);
        assert_eq!(s, Complex64::new(1.0, 1.0 + 1e-16));
    }
}
