use super::sweep::SweepRow;

/// Six significant digits, `%g` style.
pub fn format_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("sweep_var,scheme,mean_sinr_db,n,cls_accuracy\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_sig6(r.sweep_var),
            r.scheme.name(),
            format_sig6(r.mean_sinr_db),
            r.n,
            format_sig6(r.cls_accuracy)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6() {
        assert_eq!(format_sig6(30.0), "30");
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(-0.194321987), "-0.194322");
        assert_eq!(format_sig6(11.5378912), "11.5379");
        assert_eq!(format_sig6(123456789.0), "1.23457e8");
        assert_eq!(format_sig6(0.000012345678), "1.23457e-5");
        assert_eq!(format_sig6(0.0001234), "0.0001234");
        assert_eq!(format_sig6(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(0.9999999), "1");
    }
}
