//! Reference predictor matrices and shared helpers for the integration tests.

#![allow(dead_code)]

pub struct TableEntry {
    pub degree: usize,
    pub frame_length: usize,
    pub weight: &'static str,
    /// Integer weights are tabulated as exact fractions.
    pub exact: bool,
    pub rows: Vec<Vec<f64>>,
}

fn scaled(denominator: f64, rows: &[&[f64]]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| r.iter().map(|v| v / denominator).collect())
        .collect()
}

fn plain(rows: &[&[f64]]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r.to_vec()).collect()
}

pub fn predictor_table() -> Vec<TableEntry> {
    let e = |degree, frame_length, weight, rows| TableEntry {
        degree,
        frame_length,
        weight,
        exact: true,
        rows,
    };
    let a = |degree, frame_length, weight, rows| TableEntry {
        degree,
        frame_length,
        weight,
        exact: false,
        rows,
    };
    vec![
        e(0, 2, "0", scaled(2.0, &[&[1.0, 1.0]])),
        e(1, 3, "0", scaled(6.0, &[&[5.0, 2.0, -1.0], &[3.0, 0.0, -3.0]])),
        e(
            2,
            5,
            "0",
            scaled(
                70.0,
                &[
                    &[62.0, 18.0, -6.0, -10.0, 6.0],
                    &[54.0, -13.0, -40.0, -27.0, 26.0],
                    &[10.0, -5.0, -10.0, -5.0, 10.0],
                ],
            ),
        ),
        a(0, 2, "1/8", plain(&[&[0.5216473, 0.4783527]])),
        a(
            1,
            3,
            "1/8",
            plain(&[&[0.8426476, 0.3147049, -0.1573524], &[0.5115814, -0.0231627, -0.4884186]]),
        ),
        a(
            2,
            5,
            "1/8",
            plain(&[
                &[0.8917465, 0.2455946, -0.0872630, -0.1292439, 0.0791658],
                &[0.7860286, -0.2135760, -0.5754432, -0.3524997, 0.3554904],
                &[0.1468234, -0.0789864, -0.1439816, -0.0623714, 0.1385160],
            ]),
        ),
        a(0, 2, "1/4", plain(&[&[0.5432136, 0.4567864]])),
        a(
            1,
            3,
            "1/4",
            plain(&[&[0.8516937, 0.29661260, -0.1483063], &[0.5234379, -0.04687577, -0.4765621]]),
        ),
        a(
            2,
            5,
            "1/4",
            plain(&[
                &[0.89758532, 0.2342639, -0.0883036, -0.1165257, 0.0729801],
                &[0.80080398, -0.2421585, -0.5783484, -0.3200437, 0.3397466],
                &[0.15092258, -0.0869041, -0.1448233, -0.0533315, 0.1341363],
            ]),
        ),
        a(0, 2, "1/2", plain(&[&[0.5857864, 0.4142136]])),
        a(
            1,
            3,
            "1/2",
            plain(&[&[0.8689561, 0.2620878, -0.1310439], &[0.5479654, -0.0959308, -0.4520346]]),
        ),
        a(
            2,
            5,
            "1/2",
            plain(&[
                &[0.90868344, 0.2122978, -0.0889939, -0.0936393, 0.0616519],
                &[0.83086766, -0.3014847, -0.5807518, -0.2575129, 0.3088818],
                &[0.15954032, -0.1038855, -0.1455855, -0.0353338, 0.1252645],
            ]),
        ),
        e(0, 2, "1", scaled(3.0, &[&[2.0, 1.0]])),
        e(1, 3, "1", scaled(10.0, &[&[9.0, 2.0, -1.0], &[6.0, -2.0, -4.0]])),
        e(
            2,
            5,
            "1",
            scaled(
                140.0,
                &[
                    &[130.0, 24.0, -12.0, -8.0, 6.0],
                    &[125.0, -60.0, -80.0, -20.0, 35.0],
                    &[25.0, -20.0, -20.0, 0.0, 15.0],
                ],
            ),
        ),
        e(0, 2, "2", scaled(5.0, &[&[4.0, 1.0]])),
        e(1, 3, "2", scaled(38.0, &[&[36.0, 4.0, -2.0], &[27.0, -16.0, -11.0]])),
        e(
            2,
            5,
            "2",
            scaled(
                10164.0,
                &[
                    &[9750.0, 1056.0, -684.0, -144.0, 186.0],
                    &[10375.0, -7216.0, -5028.0, 368.0, 1501.0],
                    &[2275.0, -2464.0, -1176.0, 644.0, 721.0],
                ],
            ),
        ),
    ]
}

/// Largest entrywise difference between two matrices of equal shape.
pub fn max_entry_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len(), "row count");
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| {
            assert_eq!(ra.len(), rb.len(), "column count");
            ra.iter().zip(rb).map(|(x, y)| (x - y).abs())
        })
        .fold(0.0, f64::max)
}
