//! Jaro and Jaro-Winkler similarity over Unicode scalar values.

/// Winkler prefix scale.
pub const PREFIX_SCALE: f64 = 0.1;
/// Longest common prefix credited by the Winkler adjustment.
pub const MAX_PREFIX: usize = 4;
/// The prefix bonus only applies above this Jaro score.
pub const BOOST_THRESHOLD: f64 = 0.7;

/// Jaro similarity. Empty inputs score 0.
pub fn jaro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    jaro_chars(&a, &b)
}

fn jaro_chars(a: &[char], b: &[char]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut b_used = vec![false; b.len()];
    let mut a_matches = Vec::with_capacity(a.len());

    for (i, &ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_used[j] && b[j] == ca {
                b_used[j] = true;
                a_matches.push(ca);
                break;
            }
        }
    }
    let m = a_matches.len();
    if m == 0 {
        return 0.0;
    }
    let b_matches = b.iter().zip(&b_used).filter(|(_, &u)| u).map(|(&c, _)| c);
    let half_transpositions = a_matches.iter().zip(b_matches).filter(|(x, y)| *x != y).count();
    let t = half_transpositions as f64 / 2.0;
    let m = m as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

/// Jaro-Winkler similarity in `[0, 1]`.
///
/// Symmetric, and 1.0 exactly when both strings are equal and nonempty.
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let j = jaro_chars(&a, &b);
    if j <= BOOST_THRESHOLD {
        return j;
    }
    let prefix = a.iter().zip(&b).take(MAX_PREFIX).take_while(|(x, y)| x == y).count();
    (j + prefix as f64 * PREFIX_SCALE * (1.0 - j)).min(1.0)
}
