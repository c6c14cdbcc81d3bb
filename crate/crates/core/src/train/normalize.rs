use super::TrainError;

/// Per-sector affine scaling `(x - offset) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Normalizer {
    pub fn new(offset: Vec<f64>, scale: Vec<f64>) -> Result<Self, TrainError> {
        if offset.len() != scale.len() {
            return Err(TrainError::BadNormalizer(format!(
                "{} offsets but {} scales",
                offset.len(),
                scale.len()
            )));
        }
        if offset.iter().any(|o| !o.is_finite()) {
            return Err(TrainError::BadNormalizer("offsets must be finite".into()));
        }
        if scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(TrainError::BadNormalizer("scales must be finite and positive".into()));
        }
        Ok(Normalizer { offset, scale })
    }

    pub fn identity(n: usize) -> Self {
        Normalizer { offset: vec![0.0; n], scale: vec![1.0; n] }
    }

    /// Min-max to `[0, 1]` per column. A constant column gets scale 1.
    pub fn fit_min_max(rows: &[[f64; 4]]) -> Self {
        let mut lo = [f64::INFINITY; 4];
        let mut hi = [f64::NEG_INFINITY; 4];
        for row in rows {
            for s in 0..4 {
                lo[s] = lo[s].min(row[s]);
                hi[s] = hi[s].max(row[s]);
            }
        }
        let mut offset = Vec::with_capacity(4);
        let mut scale = Vec::with_capacity(4);
        for s in 0..4 {
            if lo[s].is_finite() && hi[s] > lo[s] {
                offset.push(lo[s]);
                scale.push(hi[s] - lo[s]);
            } else {
                offset.push(if lo[s].is_finite() { lo[s] } else { 0.0 });
                scale.push(1.0);
            }
        }
        Normalizer { offset, scale }
    }

    pub fn len(&self) -> usize {
        self.offset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offset.is_empty()
    }

    pub fn normalize(&self, row: &[f64; 4]) -> [f64; 4] {
        std::array::from_fn(|s| (row[s] - self.offset[s]) / self.scale[s])
    }

    pub fn denormalize(&self, row: &[f64]) -> [f64; 4] {
        std::array::from_fn(|s| row[s] * self.scale[s] + self.offset[s])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn min_max_maps_to_unit_interval() {
        let rows = [[1.0, 5.0, 2.0, 0.0], [3.0, 5.0, 6.0, 10.0]];
        let n = Normalizer::fit_min_max(&rows);
        assert_eq!(n.offset, vec![1.0, 5.0, 2.0, 0.0]);
        assert_eq!(n.scale, vec![2.0, 1.0, 4.0, 10.0]);
        assert_eq!(n.normalize(&rows[0]), [0.0, 0.0, 0.0, 0.0]);
        assert_eq!(n.normalize(&rows[1]), [1.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_scales() {
        assert!(Normalizer::new(vec![0.0], vec![0.0]).is_err());
        assert!(Normalizer::new(vec![0.0], vec![-1.0]).is_err());
        assert!(Normalizer::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Normalizer::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn denormalize_inverts_normalize(
            rows in prop::collection::vec(prop::array::uniform4(0.0f64..1e5), 1..40),
            probe in prop::array::uniform4(0.0f64..1e5),
        ) {
            let n = Normalizer::fit_min_max(&rows);
            let back = n.denormalize(&n.normalize(&probe));
            for s in 0..4 {
                prop_assert!((back[s] - probe[s]).abs() <= 1e-9 * probe[s].abs().max(1.0));
            }
        }
    }
}
