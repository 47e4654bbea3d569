use ndarray::{array, Array2};

use crate::model::FeatureInstance;

/// Number of neurons in the backward-elimination counterexample.
pub const COUNTEREXAMPLE_WIDTH: usize = 43;

/// Two-point instance on which backward elimination stalls while forward
/// selection reaches zero loss.
///
/// Rows (1-based neuron `i`): `[0, 1.5]`, `[0, 0]`, `[-0.5, 1]`, `[2, 1]`,
/// then `[(-1.001)^(i-3) + 2, 1]` for `i = 5..=43`; target `[0, 1]`.
pub fn counterexample_instance() -> FeatureInstance {
    let mut rows = Array2::zeros((COUNTEREXAMPLE_WIDTH, 2));
    rows.row_mut(0).assign(&array![0.0, 1.5]);
    rows.row_mut(1).assign(&array![0.0, 0.0]);
    rows.row_mut(2).assign(&array![-0.5, 1.0]);
    rows.row_mut(3).assign(&array![2.0, 1.0]);
    for i in 5..=COUNTEREXAMPLE_WIDTH {
        let x = (-1.001f64).powi(i as i32 - 3) + 2.0;
        rows.row_mut(i - 1).assign(&array![x, 1.0]);
    }
    FeatureInstance::direct(rows, array![0.0, 1.0]).expect("counterexample is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Provenance;

    #[test]
    fn listed_rows() {
        let inst = counterexample_instance();
        assert_eq!(inst.len(), 43);
        assert_eq!(inst.dim(), 2);
        assert_eq!(inst.provenance(), Provenance::Direct);
        assert_eq!(inst.row(2).to_vec(), vec![-0.5, 1.0]);
        assert!((inst.row(4)[0] - 3.002001).abs() < 1e-12);
        assert_eq!(inst.row(4)[1], 1.0);
    }

    #[test]
    fn four_copies_of_third_and_one_fourth_hit_target() {
        let inst = counterexample_instance();
        let mut counts = vec![0; 43];
        counts[2] = 4;
        counts[3] = 1;
        assert!(inst.multiset_loss(&counts).unwrap() <= 1e-12);
    }

    #[test]
    fn full_average_is_far_from_target() {
        let inst = counterexample_instance();
        assert!(inst.multiset_loss(&[1; 43]).unwrap() > 0.03);
    }
}
