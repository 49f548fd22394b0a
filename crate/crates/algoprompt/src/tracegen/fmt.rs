//! Small text-formatting helpers shared by the block renderers.

/// `[1,2,8]` — digits joined by bare commas.
pub(super) fn digit_list(ds: &[u8]) -> String {
    let inner: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
    format!("[{}]", inner.join(","))
}

/// `[1,0,-6]` — signed digits joined by bare commas.
pub(super) fn signed_list(ds: &[i8]) -> String {
    let inner: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
    format!("[{}]", inner.join(","))
}

/// `[+1,+0,-6]` — signed digits with explicit sign marks.
pub(super) fn marked_list(ds: &[i8]) -> String {
    let inner: Vec<String> = ds.iter().map(|d| format!("{d:+}")).collect();
    format!("[{}]", inner.join(","))
}

/// `[1, 1, 0, 1, 0]` — comma-space separated (bit lists).
pub(super) fn comma_space_list(ds: &[u8]) -> String {
    let inner: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
    format!("[{}]", inner.join(", "))
}

/// `1 2 8` — digits separated by single spaces.
pub(super) fn spaced(ds: &[u8]) -> String {
    let inner: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
    inner.join(" ")
}

/// The comparison clause against ten: `15>10`, `10=10`, `9<10`, and the
/// negative forms `-6<-10` / `-10=-10` written exactly as the traces do.
pub(super) fn compare10(v: i64) -> String {
    if v > 10 {
        format!("{v}>10")
    } else if v == 10 {
        "10=10".to_string()
    } else if v >= 0 {
        format!("{v}<10")
    } else if v == -10 {
        "-10=-10".to_string()
    } else {
        format!("{v}<-10")
    }
}

/// The modulus clause: `15%10=5` for non-negative sums, `-6%-10=-6` for
/// negative ones (truncating remainder, written with the signed base).
pub(super) fn mod10(v: i64, d: i64) -> String {
    if v >= 0 {
        format!("{v}%10={d}")
    } else {
        format!("{v}%-10={d}")
    }
}

/// `1 digit` / `3 digits`.
pub(super) fn digits_word(n: usize) -> String {
    if n == 1 {
        "1 digit".to_string()
    } else {
        format!("{n} digits")
    }
}

/// `there is 1 operator` / `there are 2 operators`, with an optional label
/// inserted before "operator" (`there is 1 * operator`).
pub(super) fn operator_clause(n: usize, label: &str) -> String {
    let label = if label.is_empty() { String::new() } else { format!("{label} ") };
    if n == 1 {
        format!("there is 1 {label}operator")
    } else {
        format!("there are {n} {label}operators")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(digit_list(&[1, 2, 8]), "[1,2,8]");
        assert_eq!(digit_list(&[]), "[]");
        assert_eq!(signed_list(&[1, 0, -6]), "[1,0,-6]");
        assert_eq!(marked_list(&[1, 0, -6]), "[+1,+0,-6]");
        assert_eq!(comma_space_list(&[1, 1, 0]), "[1, 1, 0]");
        assert_eq!(spaced(&[4, 9, 5]), "4 9 5");
    }

    #[test]
    fn comparisons() {
        assert_eq!(compare10(15), "15>10");
        assert_eq!(compare10(10), "10=10");
        assert_eq!(compare10(9), "9<10");
        assert_eq!(compare10(0), "0<10");
        assert_eq!(compare10(-6), "-6<-10");
        assert_eq!(compare10(-10), "-10=-10");
        assert_eq!(compare10(-12), "-12<-10");
    }

    #[test]
    fn modulus() {
        assert_eq!(mod10(15, 5), "15%10=5");
        assert_eq!(mod10(0, 0), "0%10=0");
        assert_eq!(mod10(-6, -6), "-6%-10=-6");
        assert_eq!(mod10(-10, 0), "-10%-10=0");
    }

    #[test]
    fn words() {
        assert_eq!(digits_word(1), "1 digit");
        assert_eq!(digits_word(3), "3 digits");
        assert_eq!(operator_clause(1, ""), "there is 1 operator");
        assert_eq!(operator_clause(2, ""), "there are 2 operators");
        assert_eq!(operator_clause(1, "*"), "there is 1 * operator");
        assert_eq!(operator_clause(2, "add"), "there are 2 add operators");
    }
}
