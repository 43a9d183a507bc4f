//! Shortest round-trip decimal formatting of finite floats.

/// The shorter of plain and scientific notation, each the shortest digit
/// string that parses back to the same `f64`; plain wins ties.
pub fn fmt_f64(v: f64) -> String {
    let plain = format!("{v}");
    let sci = format!("{v:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}
