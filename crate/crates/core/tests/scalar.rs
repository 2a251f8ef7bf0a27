use rg_spectra::scalar::*;
use num::{BigInt, BigRational};

#[test]
fn parses_exact_decimals() {
    assert_eq!(parse_rational("0.5"), Some(ratio(1, 2)));
    assert_eq!(parse_rational("-0.2"), Some(ratio(-1, 5)));
    assert_eq!(parse_rational("3/8"), Some(ratio(3, 8)));
    assert_eq!(parse_rational("2"), Some(int(2)));
    assert_eq!(parse_rational("1.5e1"), Some(int(15)));
    assert_eq!(parse_rational("abc"), None);
    assert_eq!(parse_rational("1/0"), None);
}

#[test]
fn formats_and_converts() {
    assert_eq!(format_rational(&ratio(35, 128)), "35/128");
    assert_eq!(format_rational(&int(-4)), "-4");
    assert_eq!(ratio(-3, 4).modulus(), 0.75);
    let huge = BigRational::new(BigInt::from(3) << 3000usize, BigInt::from(1) << 3001usize);
    assert!((rational_to_f64(&huge) - 1.5).abs() < 1e-12);
}
