//! Two-class request pricing, the shape provider price sheets use: mutations
//! and listings in one class, reads and deletes in the other.

use ocbench_core::store::{OpTally, RestOpKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpClass {
    A,
    B,
}

/// Class A covers writes and listings, class B covers reads, probes, and
/// deletes. Container HEADs price with the other point lookups in class B.
pub fn op_class(kind: RestOpKind) -> OpClass {
    match kind {
        RestOpKind::PutObject | RestOpKind::CopyObject | RestOpKind::GetContainer => OpClass::A,
        RestOpKind::GetObject
        | RestOpKind::HeadObject
        | RestOpKind::HeadContainer
        | RestOpKind::DeleteObject => OpClass::B,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingModel {
    pub class_a: f64,
    pub class_b: f64,
}

impl Default for PricingModel {
    fn default() -> Self {
        Self {
            class_a: 1.0,
            class_b: 1.0,
        }
    }
}

impl PricingModel {
    pub fn validate(&self) -> Result<(), String> {
        for (label, price) in [("class_a", self.class_a), ("class_b", self.class_b)] {
            if !price.is_finite() || price < 0.0 {
                return Err(format!("pricing.{label} must be a nonnegative number"));
            }
        }
        Ok(())
    }

    pub fn price(&self, kind: RestOpKind) -> f64 {
        match op_class(kind) {
            OpClass::A => self.class_a,
            OpClass::B => self.class_b,
        }
    }
}

/// Σ count(kind) × price(class(kind)).
pub fn compute_cost(tally: &OpTally, pricing: &PricingModel) -> f64 {
    tally
        .counts()
        .map(|(kind, count)| count as f64 * pricing.price(kind))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_tally() -> OpTally {
        let mut t = OpTally::new();
        for _ in 0..4 {
            t.record(RestOpKind::HeadObject);
        }
        for _ in 0..3 {
            t.record(RestOpKind::PutObject);
        }
        t.record(RestOpKind::GetContainer);
        t
    }

    #[test]
    fn uniform_pricing_counts_operations() {
        let t = sample_tally();
        assert_eq!(compute_cost(&t, &PricingModel::default()), 8.0);
    }

    #[test]
    fn zero_pricing_costs_nothing() {
        let t = sample_tally();
        let free = PricingModel {
            class_a: 0.0,
            class_b: 0.0,
        };
        assert_eq!(compute_cost(&t, &free), 0.0);
    }

    #[test]
    fn classes_split_writes_from_reads() {
        let t = sample_tally();
        let writes_only = PricingModel {
            class_a: 1.0,
            class_b: 0.0,
        };
        let reads_only = PricingModel {
            class_a: 0.0,
            class_b: 1.0,
        };
        assert_eq!(compute_cost(&t, &writes_only), 4.0);
        assert_eq!(compute_cost(&t, &reads_only), 4.0);
    }

    #[test]
    fn raising_any_class_price_never_lowers_cost() {
        let t = sample_tally();
        let base = PricingModel {
            class_a: 0.3,
            class_b: 0.7,
        };
        let start = compute_cost(&t, &base);
        for bump_a in [0.0, 0.5, 2.0] {
            for bump_b in [0.0, 0.25, 1.0] {
                let raised = PricingModel {
                    class_a: base.class_a + bump_a,
                    class_b: base.class_b + bump_b,
                };
                assert!(compute_cost(&t, &raised) >= start);
            }
        }
    }

    #[test]
    fn negative_or_non_finite_prices_are_rejected() {
        assert!(PricingModel {
            class_a: -0.1,
            class_b: 1.0
        }
        .validate()
        .is_err());
        assert!(PricingModel {
            class_a: 1.0,
            class_b: f64::NAN
        }
        .validate()
        .is_err());
        assert!(PricingModel::default().validate().is_ok());
    }

    #[test]
    fn every_kind_has_a_class() {
        let a: Vec<_> = RestOpKind::ALL
            .into_iter()
            .filter(|k| op_class(*k) == OpClass::A)
            .collect();
        assert_eq!(
            a,
            vec![
                RestOpKind::PutObject,
                RestOpKind::GetContainer,
                RestOpKind::CopyObject
            ]
        );
    }
}
