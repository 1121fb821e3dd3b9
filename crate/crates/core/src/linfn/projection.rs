use crate::linfn::{Grid, LinearFunction, ValueTable};
use crate::numeric::CompensatedSum;
use crate::perm::for_each_permutation;

/// `m[i][j] = E[t | π(i) = j]`.
pub fn conditional_means(t: &ValueTable) -> Grid<f64> {
    let n = t.n();
    let mut sums = Grid::filled(n, CompensatedSum::new());
    for_each_permutation(n, n, |p, rank| {
        let v = t.get(rank);
        for (i, &j) in p.image().iter().enumerate() {
            sums[(i, j)].add(v);
        }
    })
    .expect("a table exists only for enumerable n");
    // Each cell is hit by (n−1)! permutations.
    let per_cell = (t.values().len() / n) as f64;
    sums.map(|s| s.value() / per_cell)
}

/// Orthogonal projection of `t` onto the span of `1` and the `x[i][j]`.
///
/// The conditional means `m` have every row and column averaging to
/// `μ = E[t]`, and `F = μ + (n−1)/n · Σ (m[i][j] − μ) x[i][j]` then satisfies
/// `E[F x[k][l]] = m[k][l]/n = E[t x[k][l]]` for every cell. This is the
/// function every least-squares solution of the rank-deficient normal
/// equations evaluates to.
pub fn degree_le1_projection(t: &ValueTable) -> LinearFunction {
    let n = t.n();
    let mu = t.mean();
    if n == 1 {
        return LinearFunction::constant_fn(1, mu);
    }
    let m = conditional_means(t);
    let scale = (n as f64 - 1.0) / n as f64;
    let coeff = m.map(|&v| scale * (v - mu));
    LinearFunction::new(mu, coeff).expect("finite table gives finite projection")
}

/// `E[(t − t^{≤1})²]`, the squared distance from `t` to the linear functions.
pub fn closeness_to_linear(t: &ValueTable) -> f64 {
    let f = degree_le1_projection(t);
    let mut acc = CompensatedSum::new();
    for_each_permutation(t.n(), t.n(), |p, rank| {
        let d = t.get(rank) - f.eval_image(p.image());
        acc.add(d * d);
    })
    .expect("a table exists only for enumerable n");
    (acc.value() / t.values().len() as f64).max(0.0)
}
