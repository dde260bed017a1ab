//! Exact DTW mean of the three-series sample, checked by brute force.

use circcons::dtw::{brute_force_mean_oracle, dtw_sq, fcost, solve_mean_exact, TimeSeries};
use circcons::{Guard, Rational};

fn main() -> circcons::Result<()> {
    let inputs = vec![
        TimeSeries::from_ints(&[1, 10, 0, 0, 4])?,
        TimeSeries::from_ints(&[0, 2, 10, 0, 0])?,
        TimeSeries::from_ints(&[0, 0, 0, 10, 0])?,
    ];
    let drawn = TimeSeries::new(vec![
        Rational::new(1, 4),
        Rational::from(1),
        Rational::from(10),
        Rational::from(0),
        Rational::new(4, 3),
    ])?;
    for (j, x) in inputs.iter().enumerate() {
        let (d, path) = dtw_sq(&drawn, x);
        println!("dtw(z, x{}) = {d}, path {:?}", j + 1, path.pairs());
    }
    println!("fcost of the drawn mean: {}", fcost(&drawn, &inputs));

    let guard = Guard::default();
    for len in 1..=5 {
        let sol = solve_mean_exact(&inputs, Some(len), &guard)?;
        println!("best mean with length <= {len}: {} ({}), z = {}", sol.cost, sol.cost.to_decimal(6), sol.mean);
    }
    let oracle = brute_force_mean_oracle(&inputs, 5, &guard)?;
    println!("brute-force oracle over lengths <= 5: {} at z = {}", oracle.cost, oracle.mean);
    Ok(())
}
