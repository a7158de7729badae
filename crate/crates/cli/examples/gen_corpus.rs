//! Regenerates the bundled corpus files:
//! `cargo run -p rankwb-cli --example gen_corpus -- corpus/`

use std::collections::BTreeMap;
use std::path::Path;

use rankwb_core::certify::{cyclic_group_table, integer_fragment_table, AlmostRep};
use rankwb_core::construct::{integer_extension_example, regular_rep};
use rankwb_core::field::{rational_from_ints, Field, Value};
use rankwb_core::matrix::Matrix;

fn write<T: serde::Serialize>(dir: &Path, name: &str, value: &T) {
    let path = dir.join(name);
    let raw = serde_json::to_string_pretty(value).unwrap();
    std::fs::write(&path, raw + "\n").unwrap();
    println!("wrote {}", path.display());
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let dir = Path::new(args.get(1).map(String::as_str).unwrap_or("corpus"));
    std::fs::create_dir_all(dir).unwrap();
    let f = Field::Rationals;

    // group tables
    write(dir, "z2_table.json", &cyclic_group_table(2));
    write(dir, "z3_table.json", &cyclic_group_table(3));
    write(dir, "z_fragment.json", &integer_fragment_table(1));

    // regular representations
    write(
        dir,
        "z2_regular.json",
        &regular_rep(&cyclic_group_table(2), &f).unwrap(),
    );
    write(
        dir,
        "z3_regular.json",
        &regular_rep(&cyclic_group_table(3), &f).unwrap(),
    );

    // sign representation of Z/2
    let sign: BTreeMap<String, Matrix> = [
        ("e".to_string(), Matrix::identity(f.clone(), 2)),
        (
            "g".to_string(),
            Matrix::diagonal(f.clone(), &[f.from_i64(1), f.from_i64(-1)]),
        ),
    ]
    .into_iter()
    .collect();
    write(
        dir,
        "sign.json",
        &AlmostRep::new(cyclic_group_table(2), f.clone(), 2, sign).unwrap(),
    );

    // unipotent fragment representation of Z
    let unipotent: BTreeMap<String, Matrix> = [
        ("e".to_string(), Matrix::identity(f.clone(), 2)),
        (
            "1".to_string(),
            Matrix::from_i64_rows(f.clone(), &[&[1, 1], &[0, 1]]),
        ),
        (
            "-1".to_string(),
            Matrix::from_i64_rows(f.clone(), &[&[1, -1], &[0, 1]]),
        ),
    ]
    .into_iter()
    .collect();
    write(
        dir,
        "unipotent.json",
        &AlmostRep::new(integer_fragment_table(1), f.clone(), 2, unipotent).unwrap(),
    );

    // scalar-doubling representation of Z (vanishes on u_1 - 2 u_0)
    let two = Matrix::scalar(f.clone(), 2, &f.from_i64(2));
    let half = Matrix::scalar(f.clone(), 2, &Value::Rat(rational_from_ints(1, 2)));
    let doubling: BTreeMap<String, Matrix> = [
        ("e".to_string(), Matrix::identity(f.clone(), 2)),
        ("1".to_string(), two),
        ("-1".to_string(), half),
    ]
    .into_iter()
    .collect();
    write(
        dir,
        "doubling.json",
        &AlmostRep::new(integer_fragment_table(1), f.clone(), 2, doubling).unwrap(),
    );

    // group-algebra elements
    write(
        dir,
        "element_ue_minus_ug.json",
        &serde_json::json!({"coeffs": {"e": "1", "g": "-1"}}),
    );
    write(
        dir,
        "element_u1_minus_2u0.json",
        &serde_json::json!({"coeffs": {"1": "1", "e": "-2"}}),
    );

    // extension corpus: fragment {-2..2} of Z over the even integers
    let (data, fragment) = integer_extension_example(2, &f).unwrap();
    write(dir, "extension.json", &data);
    write(dir, "extension_fragment.json", &fragment);

    // permutation assignment for the embedding route
    write(
        dir,
        "z3_perms.json",
        &serde_json::json!({
            "e": {"perm": [0, 1, 2]},
            "g": {"perm": [1, 2, 0]},
            "g2": {"perm": [2, 0, 1]}
        }),
    );

    // matrices for amplify/jordan
    write(
        dir,
        "diag_1_1_m1.json",
        &Matrix::diagonal(f.clone(), &[f.from_i64(1), f.from_i64(1), f.from_i64(-1)]),
    );
    let one = f.one();
    let j = Matrix::jordan_block(f.clone(), &one, 2)
        .direct_sum(&Matrix::jordan_block(f.clone(), &one, 2))
        .unwrap();
    write(dir, "jordan_2_2.json", &j);
}
