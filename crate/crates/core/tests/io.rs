use std::sync::Arc;

use proptest::prelude::*;
use tvcalib::geometry::LevelSetView;
use tvcalib::grid::{GridSpec, ScalarField, VectorField};
use tvcalib::io::{
    gap_history_csv, load_dump, read_dump, save_vector, write_pbm, write_pgm, write_scalar, write_vector,
    Dump,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dumps_round_trip_bitwise(
        shape in prop::collection::vec(1usize..7, 2..=3),
        spacing in 1e-3f64..2.0,
        values in prop::collection::vec(-1e6f64..1e6, 7 * 7 * 7 * 3),
        masked in any::<bool>(),
    ) {
        let d = shape.len();
        let origin: Vec<f64> = (0..d).map(|k| values[k] * 1e-6).collect();
        let n: usize = shape.iter().product();
        let grid = if masked {
            let mask: Vec<bool> = (0..n).map(|c| c % 3 != 1 || c == 0).collect();
            GridSpec::with_mask(shape.clone(), spacing, origin, mask).unwrap()
        } else {
            GridSpec::new(shape.clone(), spacing, origin).unwrap()
        };
        let grid = Arc::new(grid);
        let u = ScalarField::new(grid.clone(), values[..n].to_vec()).unwrap();
        let z = VectorField::from_components(grid.clone(), values[..d * n].to_vec()).unwrap();
        let mut a = Vec::new();
        write_scalar(&u, &mut a).unwrap();
        let mut b = Vec::new();
        write_vector(&z, &mut b).unwrap();
        match (read_dump(&a[..]).unwrap(), read_dump(&b[..]).unwrap()) {
            (Dump::Scalar(u2), Dump::Vector(z2)) => {
                prop_assert_eq!(u2.values(), u.values());
                prop_assert_eq!(u2.grid().as_ref(), grid.as_ref());
                prop_assert_eq!(z2.components(), z.components());
                prop_assert_eq!(z2.grid().mask(), grid.mask());
            }
            _ => prop_assert!(false, "kinds swapped"),
        }
    }
}

#[test]
fn header_is_plain_text() {
    let grid = Arc::new(GridSpec::new(vec![3, 2], 0.5, vec![1.0, -2.0]).unwrap());
    let mut buf = Vec::new();
    write_scalar(&ScalarField::zeros(grid), &mut buf).unwrap();
    let text = String::from_utf8_lossy(&buf[..buf.len() - 48]);
    assert_eq!(
        text,
        "tvcalib-field 1\nkind scalar\nshape 3 2\ncomponents 1\nspacing 0.5\norigin 1 -2\nmask 0\nend\n"
    );
    assert_eq!(buf.len(), text.len() + 6 * 8);
}

#[test]
fn files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Arc::new(GridSpec::unit_cube(3, 5).unwrap());
    let z = VectorField::from_fn(grid, |x| vec![x[0], x[1] * 2.0, -x[2]]);
    let p = dir.path().join("z.bin");
    save_vector(&z, &p).unwrap();
    match load_dump(&p).unwrap() {
        Dump::Vector(v) => assert_eq!(v.components(), z.components()),
        Dump::Scalar(_) => panic!("expected a vector dump"),
    }
    assert!(load_dump(&dir.path().join("missing.bin")).is_err());
}

#[test]
fn images_of_middle_slice() {
    let grid = Arc::new(GridSpec::unit_cube(3, 6).unwrap());
    let u = ScalarField::from_fn(grid.clone(), |x| x[0] + x[2]);
    let mut pgm = Vec::new();
    write_pgm(&u, &mut pgm).unwrap();
    assert!(pgm.starts_with(b"P5\n6 6\n255\n"));
    assert_eq!(pgm.len(), b"P5\n6 6\n255\n".len() + 36);
    let e = LevelSetView::from_predicate(grid, |x| x[0] < 0.5);
    let mut pbm = Vec::new();
    write_pbm(&e, &mut pbm).unwrap();
    let body = &pbm[b"P4\n6 6\n".len()..];
    // left half black on every row
    assert!(body.iter().all(|&b| b == 0b1110_0000));
}

#[test]
fn gap_history_format() {
    assert_eq!(
        gap_history_csv(&[(10, 0.5), (20, 0.25)]),
        "iteration,relative_gap\n10,0.5\n20,0.25\n"
    );
}
