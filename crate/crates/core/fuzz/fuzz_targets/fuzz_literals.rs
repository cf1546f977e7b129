//! Fuzzes the scalar / tuple / matrix literal parsers in isolation.

#![no_main]

use libfuzzer_sys::fuzz_target;
use selfaffine::config::{parse_matrix_literal, parse_scalar, parse_tuple};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_scalar(text) {
        assert!(v.is_finite());
    }
    if let Ok(t) = parse_tuple(text) {
        assert!(!t.is_empty());
        assert!(t.iter().all(|x| x.is_finite()));
    }
    if let Ok(m) = parse_matrix_literal(text) {
        assert!(!m.is_empty());
        assert!(m.iter().flatten().all(|x| x.is_finite()));
    }
});
