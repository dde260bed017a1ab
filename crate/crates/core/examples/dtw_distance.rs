//! Squared DTW distance by dynamic programming against path enumeration.

use circcons::dtw::{count_paths, dtw_sq, dtw_sq_bruteforce, TimeSeries};
use circcons::Guard;

fn main() -> circcons::Result<()> {
    let x = TimeSeries::from_ints(&[0, 2, 1, 2, 0])?;
    let y = TimeSeries::from_ints(&[1, 2, 0, 0])?;
    let (d, path) = dtw_sq(&x, &y);
    println!("dtw_sq = {d}, path {:?}", path.pairs());
    println!("{} warping paths of order 5x4", count_paths(5, 4));
    println!("brute force agrees: {}", dtw_sq_bruteforce(&x, &y, &Guard::default())? == d);
    Ok(())
}
