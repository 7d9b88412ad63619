mod common;

use common::fuzz::engine_agreement;

#[test]
fn engines_agree_on_random_models() {
    let s = engine_agreement(100, 3, 8);
    assert!(s.failures.is_empty(), "{}", s.failures.join("\n\n"));
    assert_eq!(s.compared, 300);
    assert!(s.violated > 0 && s.violated < s.compared, "{} of 300 violated", s.violated);
}
