//! Property-based invariants over randomly generated inputs.

use hcbell::forms::{build_forms, enumerate_groupings, GroupingTree};
use hcbell::hypercomplex::{HypercomplexScalar, StructureTable};
use proptest::prelude::*;

fn any_table() -> impl Strategy<Value = StructureTable> {
    prop::sample::select(StructureTable::all_builtin())
}

proptest! {
    #[test]
    fn norm_is_multiplicative(
        table in any_table(),
        a in prop::collection::vec(-100.0f64..100.0, 8),
        b in prop::collection::vec(-100.0f64..100.0, 8),
    ) {
        let x = HypercomplexScalar::new(a[..table.dim()].to_vec()).unwrap();
        let y = HypercomplexScalar::new(b[..table.dim()].to_vec()).unwrap();
        let lhs = x.mul(&y, &table).unwrap().norm();
        let rhs = x.norm() * y.norm();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn conjugation_is_an_involution_and_fixes_norm(coeffs in prop::collection::vec(-1e6f64..1e6, 8)) {
        let x = HypercomplexScalar::new(coeffs).unwrap();
        prop_assert_eq!(x.conj().conj(), x.clone());
        prop_assert_eq!(x.conj().norm(), x.norm());
    }

    #[test]
    fn grouping_labels_round_trip(n in 1usize..6, index in any::<prop::sample::Index>()) {
        let groupings = enumerate_groupings(n).unwrap();
        let g = &groupings[index.index(groupings.len())];
        prop_assert_eq!(&GroupingTree::parse(&g.label()).unwrap(), g);
    }

    #[test]
    fn every_tuple_maps_to_exactly_one_form(table in any_table(), n in 1usize..4) {
        let groupings = enumerate_groupings(n).unwrap();
        let tensor = build_forms(&table, n, &groupings[0]).unwrap();
        let total: usize = (0..table.dim()).map(|s| tensor.monomials_for_form(s).len()).sum();
        prop_assert_eq!(total, table.dim().pow(n as u32));
        for s in 0..table.dim() {
            prop_assert_eq!(tensor.monomials_for_form(s).len(), table.dim().pow(n as u32 - 1));
        }
    }
}
