//! Every dialog type over (size blend cream) against its listed episode set.

use mixdialog_core::text::parse_expr_str;
use mixdialog_core::{enumerate, parse_episodes};

pub const ROWS: [(&str, &str); 9] = [
    ("I", "(((size blend cream)))"),
    ("C", "((size blend cream))"),
    ("PFA", "((size (blend cream)))"),
    ("PFA_n", "(((size blend cream)) (size (blend cream)) ((size blend) cream))"),
    ("PFA_n*", "(((size blend cream)) (size (blend cream)) ((size blend) cream) (size blend cream))"),
    ("SPE", "((size (blend cream)) (blend (size cream)) (cream (size blend)))"),
    (
        "SPE'",
        "((size blend cream) (size cream blend) (blend size cream) (blend cream size) (cream blend size) (cream size blend))",
    ),
    (
        "PE",
        "(((size blend cream)) (size (blend cream)) (blend (size cream)) (cream (size blend))
          ((size blend) cream) ((size cream) blend) ((blend cream) size))",
    ),
    (
        "PE*",
        "(((size blend cream)) ((size blend) cream) (cream (size blend)) ((blend cream) size)
          (size (blend cream)) ((size cream) blend) (blend (size cream)) (size blend cream)
          (size cream blend) (blend size cream) (blend cream size) (cream blend size) (cream size blend))",
    ),
];

#[test]
fn notation_table() {
    for (tag, listed) in ROWS {
        let e = parse_expr_str(&format!("(\"{tag}\" size blend cream)")).unwrap();
        assert_eq!(
            enumerate(&e).unwrap(),
            parse_episodes(listed).unwrap(),
            "{tag}"
        );
    }
    let pe_star = parse_expr_str(r#"("PE*" size blend cream)"#).unwrap();
    assert_eq!(enumerate(&pe_star).unwrap().len(), 13);
    let pe = parse_expr_str(r#"("PE" size blend cream)"#).unwrap();
    assert_eq!(enumerate(&pe).unwrap().len(), 7);
}

#[test]
fn spe_prime_is_not_c() {
    let a = parse_expr_str(r#"("C" a b c)"#).unwrap();
    let b = parse_expr_str(r#"("C" b a c)"#).unwrap();
    assert_ne!(enumerate(&a).unwrap(), enumerate(&b).unwrap());
}
