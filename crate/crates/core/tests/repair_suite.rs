use vesseltopo::fragment::shapes::base_shapes;
use vesseltopo::fragment::{generate_breaks, FragmentParams};
use vesseltopo::metrics::{betti0_normalized, DEFAULT_PATCH_SIZE};
use vesseltopo::repair::{pair_endpoints, repair_mask, RepairParams};
use vesseltopo::topology::{count_components, Connectivity};

/// Fragments every base shape with seeds 0..200, repairs it and checks the
/// repair invariants on each case.
#[test]
fn two_hundred_seed_suite() {
    let params = RepairParams::default();
    let mut reductions = Vec::new();
    for (name, gt) in base_shapes() {
        for seed in 0..200 {
            let fparams = FragmentParams {
                seed,
                ..FragmentParams::default()
            };
            let (broken, _) = generate_breaks(&gt, &fparams).unwrap();
            let outcome = repair_mask(&broken, &params).unwrap();
            let fixed = &outcome.mask;

            assert!(broken.is_subset_of(fixed), "{name}/{seed} cleared pixels");
            assert!(
                count_components(fixed, Connectivity::Eight)
                    <= count_components(&broken, Connectivity::Eight),
                "{name}/{seed} gained components"
            );
            let before =
                betti0_normalized(&broken, &gt, DEFAULT_PATCH_SIZE, Connectivity::Eight).unwrap();
            let after =
                betti0_normalized(fixed, &gt, DEFAULT_PATCH_SIZE, Connectivity::Eight).unwrap();
            assert!(after <= before, "{name}/{seed}: {before} -> {after}");
            if before > 0.0 {
                reductions.push((before - after) / before);
            }
            // Once every gap is closed a second pass has nothing to add.
            if count_components(fixed, Connectivity::Eight)
                == count_components(&gt, Connectivity::Eight)
            {
                let again = pair_endpoints(fixed, &params);
                assert!(again.is_empty(), "{name}/{seed}: {again:?}");
            }
        }
    }
    reductions.sort_by(f64::total_cmp);
    let median = reductions[reductions.len() / 2];
    println!(
        "median beta0 reduction {:.1}% over {} cases",
        100.0 * median,
        reductions.len()
    );
    assert!(median >= 0.5);
}
