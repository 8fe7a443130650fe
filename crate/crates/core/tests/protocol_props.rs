mod common;

use common::invariants::{check, random_scenario};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariants_hold_without_failures(seed in any::<u64>()) {
        let (scenario, _) = random_scenario(seed, 12, false);
        if let Err(e) = check(&scenario) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn invariants_hold_across_a_tree_link_failure(seed in any::<u64>()) {
        let (scenario, failed) = random_scenario(seed, 12, true);
        prop_assume!(failed.is_some());
        if let Err(e) = check(&scenario) {
            prop_assert!(false, "{}", e);
        }
    }
}
