//! Envelope extraction and threshold crossings on sampled curves.

/// Upper envelope of a sampled curve: the first and last samples and every
/// local maximum (plateau points included) joined by straight lines.
pub fn upper_envelope(times: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let n = values.len();
    if n < 3 {
        return values.to_vec();
    }
    let mut anchors = vec![0];
    anchors.extend((1..n - 1).filter(|&i| values[i] >= values[i - 1] && values[i] >= values[i + 1]));
    anchors.push(n - 1);

    let mut env = Vec::with_capacity(n);
    let mut seg = 0;
    for (i, &t) in times.iter().enumerate() {
        while i > anchors[seg + 1] {
            seg += 1;
        }
        let (l, r) = (anchors[seg], anchors[seg + 1]);
        if i == l {
            env.push(values[l]);
        } else {
            let f = (t - times[l]) / (times[r] - times[l]);
            env.push(values[l] + f * (values[r] - values[l]));
        }
    }
    env
}

/// First time the sampled curve drops strictly below `threshold`, linearly
/// interpolated between samples. `None` if it never does.
pub fn first_crossing_below(times: &[f64], values: &[f64], threshold: f64) -> Option<f64> {
    let first = values.iter().position(|&v| v < threshold)?;
    if first == 0 {
        return Some(times[0]);
    }
    let (v0, v1) = (values[first - 1], values[first]);
    let (t0, t1) = (times[first - 1], times[first]);
    Some(t0 + (v0 - threshold) / (v0 - v1) * (t1 - t0))
}

/// Local maxima `(time, value)` of a sampled curve (interior points only).
pub fn local_maxima(times: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] >= values[i - 1] && values[i] > values[i + 1])
        .map(|i| (times[i], values[i]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_of_damped_cosine_tracks_decay() {
        let times: Vec<f64> = (0..4000).map(|i| i as f64 * 0.01).collect();
        let values: Vec<f64> = times.iter().map(|t| (-t / 10.0).exp() * (5.0 * t).cos().abs()).collect();
        let env = upper_envelope(&times, &values);
        for (i, t) in times.iter().enumerate().skip(100).take(3800) {
            assert!((env[i] - (-t / 10.0).exp()).abs() < 0.01, "t = {t}");
        }
        let half = first_crossing_below(&times, &env, 0.5).unwrap();
        assert!((half - 10.0 * 2f64.ln()).abs() < 0.05);
    }

    #[test]
    fn envelope_passes_through_peaks() {
        let times: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| (0.3 * t).sin() * (0.011 * t).cos()).collect();
        let env = upper_envelope(&times, &values);
        for (t, v) in local_maxima(&times, &values) {
            assert!((env[t as usize] - v).abs() < 1e-15);
        }
    }

    #[test]
    fn crossing_edge_cases() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(first_crossing_below(&t, &[1.0, 1.0, 1.0], 0.5), None);
        assert_eq!(first_crossing_below(&t, &[0.1, 1.0, 1.0], 0.5), Some(0.0));
        assert_eq!(first_crossing_below(&t, &[1.0, 0.0, 1.0], 0.5), Some(0.5));
    }
}
