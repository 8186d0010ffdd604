mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(PROPTEST_CASES))]

    #[test]
    fn resolution_laws(
        a in logic9(), b in logic9(), c in logic9(),
        list in proptest::collection::vec(logic9(), 0..8), rot in 0usize..8,
    ) {
        check_resolution(a, b, c, list, rot)?;
    }

    #[test]
    fn slice_and_nth_agree(v in logic_vector(), a in any::<usize>(), b in any::<usize>(), k in any::<usize>()) {
        check_slice_nth(v, a, b, k)?;
    }

    #[test]
    fn promotion_is_idempotent(
        cur in proptest::collection::vec(-5i64..5, 1..10),
        eff in proptest::collection::vec(proptest::option::of(-5i64..5), 10),
        pick in proptest::collection::vec(any::<bool>(), 10),
    ) {
        check_update_idempotent(cur, eff, pick)?;
    }

    #[test]
    fn single_driver_passes_through(v in logic_vector(), resolved in any::<bool>(), full in any::<bool>()) {
        check_single_driver(v, resolved, full)?;
    }

    #[test]
    fn next_and_exit_unwind_to_their_loop(prog in loop_program()) {
        check_flags(prog)?;
    }
}

#[test]
fn subprogram_frames_are_restored() {
    let m = snapshot_model();
    let cfg = proptest::test_runner::Config::with_cases(PROPTEST_CASES);
    let mut runner = proptest::test_runner::TestRunner::new(cfg);
    runner
        .run(
            &(0i64..60, proptest::collection::vec(any::<i32>(), 1..6)),
            |(n, junk)| check_snapshot_restore(&m, n, junk.into_iter().map(i64::from).collect()),
        )
        .unwrap();
}
