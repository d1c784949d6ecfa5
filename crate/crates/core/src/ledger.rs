//! Value bookkeeping for a two-input firm `(Q, K, L)` at prices `(p, r, w)`:
//! whole product of labor `(Q, -K, 0)`, the labor commodity `(0, 0, L)` and
//! the whole product `(Q, -K, -L)`, each with its value.

use serde::Serialize;

use crate::product_vectors::{
    input_services, responsible_whole_product, value, whole_product, PriceSystem, ProductVector, VectorError,
};

const LABOR: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImputationReport {
    /// `(Q, -K, 0)`
    pub wp_l: ProductVector,
    /// `(0, 0, L)`
    pub labor_commodity: ProductVector,
    /// `(Q, -K, -L)`
    pub wp: ProductVector,
    /// `pQ - rK`
    pub value_added: f64,
    /// `wL`
    pub labor_cost: f64,
    /// `pQ - rK - wL`
    pub profit: f64,
    pub zero_profit: bool,
}

pub fn impute(q: f64, k: f64, l: f64, prices: &PriceSystem) -> Result<ImputationReport, VectorError> {
    if prices.n_inputs() != 2 {
        return Err(VectorError::DimensionMismatch { expected: 2, got: prices.n_inputs() });
    }
    let wp = whole_product(q, &[k, l]);
    let wp_l = responsible_whole_product(&wp, LABOR)?;
    let labor_commodity = input_services(2, LABOR, l)?;
    let value_added = value(prices, &wp_l)?;
    let labor_cost = value(prices, &labor_commodity)?;
    let profit = value_added - labor_cost;
    Ok(ImputationReport {
        zero_profit: profit.abs() <= 1e-12 * (1.0 + value_added.abs()),
        wp_l,
        labor_commodity,
        wp,
        value_added,
        labor_cost,
        profit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prices(p: f64, r: f64, w: f64) -> PriceSystem {
        PriceSystem::new(p, vec![r, w]).unwrap()
    }

    #[test]
    fn equilibrium_firm() {
        let rep = impute(1.0, 1.0, 1.0, &prices(2.0, 1.0, 1.0)).unwrap();
        assert_eq!((rep.value_added, rep.labor_cost, rep.profit), (1.0, 1.0, 0.0));
        assert!(rep.zero_profit);
    }

    #[test]
    fn empty_firm() {
        let rep = impute(0.0, 0.0, 0.0, &prices(2.0, 1.0, 1.0)).unwrap();
        assert_eq!((rep.value_added, rep.labor_cost, rep.profit), (0.0, 0.0, 0.0));
        assert_eq!(rep.wp, ProductVector::zero(2));
    }

    #[test]
    fn profitable_firm() {
        let rep = impute(10.0, 4.0, 2.0, &prices(3.0, 2.0, 5.0)).unwrap();
        assert_eq!((rep.value_added, rep.labor_cost, rep.profit), (22.0, 10.0, 12.0));
        assert!(!rep.zero_profit);
        assert_eq!(rep.wp_l.components(), vec![10.0, -4.0, 0.0]);
        assert_eq!(rep.labor_commodity.components(), vec![0.0, 0.0, 2.0]);
        assert_eq!(rep.wp.components(), vec![10.0, -4.0, -2.0]);
    }

    #[test]
    fn needs_two_inputs() {
        let p = PriceSystem::new(1.0, vec![1.0]).unwrap();
        assert!(impute(1.0, 1.0, 1.0, &p).is_err());
    }

    proptest! {
        #[test]
        fn table_consistency(q in 0.0..100.0f64, k in 0.0..100.0f64, l in 0.0..100.0f64,
                             p in 0.0..10.0f64, r in 0.01..10.0f64, w in 0.01..10.0f64) {
            let prices = prices(p, r, w);
            let rep = impute(q, k, l, &prices).unwrap();
            let tol = 1e-12 * (1.0 + p * q + r * k + w * l);
            prop_assert!((value(&prices, &rep.wp).unwrap() - rep.profit).abs() <= tol);
            prop_assert!((value(&prices, &rep.wp_l).unwrap() - rep.value_added).abs() <= tol);
            prop_assert!((value(&prices, &rep.labor_commodity).unwrap() - rep.labor_cost).abs() <= tol);
            prop_assert_eq!(&rep.wp_l - &rep.labor_commodity, rep.wp.clone());
            prop_assert_eq!(&rep.wp + &rep.labor_commodity, rep.wp_l.clone());
        }
    }
}
