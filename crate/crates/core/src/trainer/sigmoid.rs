const TABLE_SIZE: usize = 512;
const MAX_SIGMOID: f64 = 8.0;

/// Logistic function, either exact or via a 512-entry table over `[-8, 8]`.
///
/// The table is faster in the training loop but quantizes its output, so
/// gradient checks must use the exact form.
#[derive(Clone, Debug)]
pub struct Sigmoid {
    table: Option<Vec<f64>>,
}

impl Sigmoid {
    pub fn exact() -> Self {
        Sigmoid { table: None }
    }

    pub fn table() -> Self {
        let t = (0..=TABLE_SIZE)
            .map(|i| {
                let x = (i as f64 * 2.0 * MAX_SIGMOID) / TABLE_SIZE as f64 - MAX_SIGMOID;
                1.0 / (1.0 + (-x).exp())
            })
            .collect();
        Sigmoid { table: Some(t) }
    }

    pub fn new(exact: bool) -> Self {
        if exact {
            Self::exact()
        } else {
            Self::table()
        }
    }

    pub fn is_exact(&self) -> bool {
        self.table.is_none()
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.table {
            None => 1.0 / (1.0 + (-x).exp()),
            Some(t) => {
                let x = x.clamp(-MAX_SIGMOID, MAX_SIGMOID);
                let i = ((x + MAX_SIGMOID) * TABLE_SIZE as f64 / MAX_SIGMOID / 2.0) as usize;
                t[i.min(TABLE_SIZE)]
            }
        }
    }

    /// `-ln(sigmoid(x))`, numerically stable in exact mode.
    #[inline]
    pub fn neg_log(&self, x: f64) -> f64 {
        match &self.table {
            None => {
                if x > 0.0 {
                    (-x).exp().ln_1p()
                } else {
                    -x + x.exp().ln_1p()
                }
            }
            Some(_) => -self.eval(x).ln(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_tracks_exact_within_quantization() {
        let (t, e) = (Sigmoid::table(), Sigmoid::exact());
        for i in -1000..=1000 {
            let x = i as f64 / 100.0;
            // step 1/32 in x, slope <= 1/4
            assert!((t.eval(x) - e.eval(x)).abs() < 0.01, "{x}");
        }
        assert_eq!(t.eval(100.0), t.eval(8.0));
        assert!(t.eval(-100.0) > 0.0);
        assert_eq!(e.eval(0.0), 0.5);
    }

    #[test]
    fn neg_log_is_stable() {
        let e = Sigmoid::exact();
        assert!((e.neg_log(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((e.neg_log(-800.0) - 800.0).abs() < 1e-9);
        assert!(e.neg_log(800.0) >= 0.0);
    }
}
