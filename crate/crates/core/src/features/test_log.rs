use std::sync::OnceLock;

use regex::Regex;

use super::TestErrorType;

fn trace_head() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        // A stack-trace head: optional thread/cause prefix, then a dotted
        // class name whose simple name reads like a Throwable.
        Regex::new(
            r#"^\s*(?:Exception in thread "[^"]*"\s+)?(?:Caused by:\s+)?((?:[A-Za-z_$][\w$]*\.)+[A-Za-z_$][\w$]*(?:Exception|Error|Throwable|Failure))(?::|\s|$)"#,
        )
        .expect("valid regex")
    })
}

/// First non-trivial error class named at the head of a stack-trace line.
///
/// `junit.framework.AssertionFailedError` is skipped; `None` when the log
/// names no other error.
pub fn parse_test_error(test_log: &str) -> Option<TestErrorType> {
    test_log
        .lines()
        .filter_map(|line| trace_head().captures(line))
        .find_map(|caps| TestErrorType::new(&caps[1]))
}
