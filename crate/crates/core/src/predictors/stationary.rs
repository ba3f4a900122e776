//! Stationary distributions of small finite Markov chains.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-9;
/// Chains up to this many states are always solved directly.
const DIRECT_LIMIT: usize = 64;
const MAX_SWEEPS: usize = 20_000;

/// Solves `pi = pi P`, `sum(pi) = 1` for an irreducible chain.
pub fn solve_stationary(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    if n == 0 {
        return Err(Error::NonErgodic);
    }
    if !is_irreducible(p) {
        return Err(Error::NonErgodic);
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    // (P^T - I) pi = 0 with the last equation replaced by normalization.
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(j, i)] = p[i][j];
        }
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let pi = a.lu().solve(&b).ok_or(Error::Singular)?;
    let mut pi: Vec<f64> = pi.iter().map(|x| x.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);

    let residual = (0..n)
        .map(|j| ((0..n).map(|i| pi[i] * p[i][j]).sum::<f64>() - pi[j]).abs())
        .fold(0.0, f64::max);
    if residual > RESIDUAL_TOL {
        return Err(Error::Singular);
    }
    Ok(pi)
}

/// Sparse variant for a chain already known to be irreducible, with
/// `rows[i]` listing `(j, P(i -> j))`. Large chains are iterated from `warm`
/// (lazy power method) and fall back to the direct solve if that stalls.
pub fn solve_stationary_sparse(rows: &[Vec<(usize, f64)>], warm: Option<&[f64]>) -> Result<Vec<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::NonErgodic);
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    if n > DIRECT_LIMIT {
        if let Some(pi) = iterate(rows, warm) {
            return Ok(pi);
        }
    }
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for &(j, w) in row {
            a[(j, i)] += w;
        }
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let pi = a.lu().solve(&b).ok_or(Error::Singular)?;
    let mut pi: Vec<f64> = pi.iter().map(|x| x.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    if sparse_residual(rows, &pi, &mut vec![0.0; n]) > RESIDUAL_TOL {
        return Err(Error::Singular);
    }
    Ok(pi)
}

fn sparse_residual(rows: &[Vec<(usize, f64)>], pi: &[f64], next: &mut [f64]) -> f64 {
    next.iter_mut().for_each(|x| *x = 0.0);
    for (i, row) in rows.iter().enumerate() {
        for &(j, w) in row {
            next[j] += pi[i] * w;
        }
    }
    next.iter().zip(pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn iterate(rows: &[Vec<(usize, f64)>], warm: Option<&[f64]>) -> Option<Vec<f64>> {
    let n = rows.len();
    let mut pi = match warm {
        Some(w) if w.len() == n && w.iter().sum::<f64>() > 0.0 => w.to_vec(),
        _ => vec![1.0; n],
    };
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    let mut next = vec![0.0; n];
    for _ in 0..MAX_SWEEPS {
        if sparse_residual(rows, &pi, &mut next) <= RESIDUAL_TOL / 10.0 {
            return Some(pi);
        }
        for (p, q) in pi.iter_mut().zip(&next) {
            *p = 0.5 * (*p + q);
        }
    }
    None
}

/// Every state reaches every other through positive-probability edges.
pub fn is_irreducible(p: &[Vec<f64>]) -> bool {
    let n = p.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let w = if forward { p[i][j] } else { p[j][i] };
                if w > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    n > 0 && reach(true) && reach(false)
}

/// Strongly connected components (Tarjan). Components come out in reverse
/// topological order.
pub fn strongly_connected(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct Tarjan<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    impl Tarjan<'_> {
        fn visit(&mut self, v: usize) {
            self.index[v] = Some(self.next);
            self.low[v] = self.next;
            self.next += 1;
            self.stack.push(v);
            self.on_stack[v] = true;
            for k in 0..self.adj[v].len() {
                let w = self.adj[v][k];
                match self.index[w] {
                    None => {
                        self.visit(w);
                        self.low[v] = self.low[v].min(self.low[w]);
                    }
                    Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                    _ => {}
                }
            }
            if Some(self.low[v]) == self.index[v] {
                let mut comp = Vec::new();
                while let Some(w) = self.stack.pop() {
                    self.on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                self.out.push(comp);
            }
        }
    }
    let n = adj.len();
    let mut t = Tarjan {
        adj,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if t.index[v].is_none() {
            t.visit(v);
        }
    }
    t.out
}

/// Probability of ending in each closed class when starting from `start`.
/// `classes` must be the closed classes of `p`; all other states are transient.
pub fn absorption_probabilities(p: &[Vec<f64>], classes: &[Vec<usize>], start: usize) -> Result<Vec<f64>> {
    let n = p.len();
    let mut class_of = vec![None; n];
    for (c, members) in classes.iter().enumerate() {
        for &m in members {
            class_of[m] = Some(c);
        }
    }
    if let Some(c) = class_of[start] {
        let mut out = vec![0.0; classes.len()];
        out[c] = 1.0;
        return Ok(out);
    }
    let transient: Vec<usize> = (0..n).filter(|&i| class_of[i].is_none()).collect();
    let mut index = vec![None; n];
    for (a, &s) in transient.iter().enumerate() {
        index[s] = Some(a);
    }
    let pos = |s: usize| index[s];
    let m = transient.len();
    let mut q = DMatrix::<f64>::identity(m, m);
    let mut r = DMatrix::<f64>::zeros(m, classes.len());
    for (a, &s) in transient.iter().enumerate() {
        for j in 0..n {
            let w = p[s][j];
            if w == 0.0 {
                continue;
            }
            match class_of[j] {
                Some(c) => r[(a, c)] += w,
                None => q[(a, pos(j).expect("transient state"))] -= w,
            }
        }
    }
    let x = q.lu().solve(&r).ok_or(Error::Singular)?;
    let row = pos(start).expect("start is transient");
    Ok((0..classes.len()).map(|c| x[(row, c)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn walk_frequencies(p: &[Vec<f64>], steps: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0usize; p.len()];
        let mut s = 0;
        for _ in 0..steps {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut next = p.len() - 1;
            for (j, &w) in p[s].iter().enumerate() {
                acc += w;
                if u < acc {
                    next = j;
                    break;
                }
            }
            s = next;
            counts[s] += 1;
        }
        counts.into_iter().map(|c| c as f64 / steps as f64).collect()
    }

    #[test]
    fn doubly_stochastic_is_uniform() {
        let p = vec![
            vec![0.2, 0.5, 0.3],
            vec![0.3, 0.2, 0.5],
            vec![0.5, 0.3, 0.2],
        ];
        let pi = solve_stationary(&p).unwrap();
        for x in pi {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_state_closed_form_and_walk() {
        let (a, b) = (0.3, 0.1);
        let p = vec![vec![1.0 - a, a], vec![b, 1.0 - b]];
        let pi = solve_stationary(&p).unwrap();
        assert!((pi[1] - a / (a + b)).abs() < 1e-12);
        let freq = walk_frequencies(&p, 1_000_000, 17);
        assert!((freq[1] - a / (a + b)).abs() < 1e-2, "walk {} vs {}", freq[1], a / (a + b));
    }

    #[test]
    fn rejects_reducible_chains() {
        let p = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        assert!(matches!(solve_stationary(&p), Err(Error::NonErgodic)));
    }

    #[test]
    fn periodic_chain_still_solves() {
        let p = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(solve_stationary(&p).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn absorption_splits_mass() {
        // 0 -> {1 (closed), 2 (closed)} with 0.25 / 0.75.
        let p = vec![vec![0.0, 0.25, 0.75], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let x = absorption_probabilities(&p, &[vec![1], vec![2]], 0).unwrap();
        assert!((x[0] - 0.25).abs() < 1e-12 && (x[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn tarjan_finds_components() {
        let adj = vec![vec![1], vec![2], vec![0, 3], vec![3]];
        let mut comps = strongly_connected(&adj);
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn sparse_iteration_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200;
        // Ring edge keeps the chain irreducible; a second random edge per row.
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| {
                let w: f64 = rng.random_range(0.05..0.95);
                vec![((i + 1) % n, w), (rng.random_range(0..n), 1.0 - w)]
            })
            .collect();
        let mut dense = vec![vec![0.0; n]; n];
        for (i, row) in rows.iter().enumerate() {
            for &(j, w) in row {
                dense[i][j] += w;
            }
        }
        let direct = solve_stationary(&dense).unwrap();
        let iterated = solve_stationary_sparse(&rows, None).unwrap();
        let diff = direct.iter().zip(&iterated).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-6, "{diff}");
        let freq = walk_frequencies(&dense, 1_000_000, 5);
        let diff = direct.iter().zip(&freq).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-2, "{diff}");
    }
}
