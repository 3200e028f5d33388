//! Benchmark fixtures shared by the criterion targets.

use satenc::{parse_instance, Instance};

/// Random-looking but fixed PB inequality over `n` Booleans.
pub fn pb_instance(n: usize) -> Instance {
    let names: Vec<String> = (0..n).map(|i| format!("b{i}")).collect();
    let terms: Vec<String> = (0..n).map(|i| format!("{}*b{i}", 1 + (i * 7919) % 37)).collect();
    let total: usize = (0..n).map(|i| 1 + (i * 7919) % 37).sum();
    let text = format!("bool {}\ncon {} <= {}\n", names.join(" "), terms.join(" + "), total / 2);
    parse_instance("bench", &text).expect("valid fixture")
}

/// Linear integer constraint over `n` variables with domain 0..=`d`.
pub fn li_instance(n: usize, d: i64) -> Instance {
    let mut text: String = (0..n).map(|i| format!("int y{i} 0..{d}\n")).collect();
    let terms: Vec<String> = (0..n).map(|i| format!("{}*y{i}", 1 + i % 5)).collect();
    text.push_str(&format!("con {} <= {}\n", terms.join(" + "), (n as i64) * d));
    parse_instance("bench", &text).expect("valid fixture")
}

/// Deterministic pseudo-random feature matrix and two-class labels.
pub fn forest_data(rows: usize, cols: usize) -> (Vec<Vec<f64>>, Vec<usize>, Vec<f64>) {
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let x: Vec<Vec<f64>> = (0..rows).map(|_| (0..cols).map(|_| next()).collect()).collect();
    let y = x.iter().map(|r| usize::from(r[0] + 0.5 * r[1] > 0.75)).collect();
    (x, y, vec![1.0; rows])
}
