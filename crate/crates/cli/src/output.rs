use std::path::{Path, PathBuf};

pub const OUT_ENV: &str = "BLOWUPLAB_OUT";
pub const DEFAULT_OUT: &str = "blowuplab-out";

/// Output root: explicit flag, then BLOWUPLAB_OUT, then ./blowuplab-out.
pub fn out_root(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUT),
    }
}

/// Filesystem-safe rendering of a label such as "r-sin(r)".
pub fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            'a'..='z' | 'A'..='Z' | '0'..='9' => out.push(c),
            '+' => out.push_str("plus"),
            '-' | '−' => out.push_str("minus"),
            '^' => out.push_str("pow"),
            _ => {}
        }
    }
    out
}

/// Compact float for directory names: 8 → "8", 7.5 → "7.5".
pub fn num(x: f64) -> String {
    if x == x.round() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}
