//! Taylor coefficients of the number-operator square roots and their exact
//! scalar remainders.

use serde::Serialize;

/// `c[j][l]` holds `c_j^{(l)}`, `d[j][nu]` holds `d_{j,nu}` for `nu <= j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientTable {
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

impl CoefficientTable {
    pub fn jmax(&self) -> usize {
        self.c.len() - 1
    }

    /// `c_j = c_j^{(0)}`, the coefficients of `sqrt(1 - x)`.
    pub fn c_plain(&self, j: usize) -> f64 {
        self.c[j][0]
    }
}

/// `c_j^{(l)} = (l - 1/2)(l + 1/2)...(l + j - 3/2) / j!`.
fn shifted_coefficient(j: usize, l: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (l as f64 - 0.5 + i as f64) / (i as f64 + 1.0))
}

pub fn taylor_coefficients(jmax: usize) -> CoefficientTable {
    let c: Vec<Vec<f64>> = (0..=jmax)
        .map(|j| (0..=jmax).map(|l| shifted_coefficient(j, l)).collect())
        .collect();
    let d = (0..=jmax)
        .map(|j| {
            (0..=j)
                .map(|nu| (0..=nu).map(|l| c[l][0] * c[nu - l][0] * c[j - nu][l]).sum())
                .collect()
        })
        .collect();
    CoefficientTable { c, d }
}

fn lambda(particles: usize) -> f64 {
    1.0 / (particles as f64 - 1.0)
}

/// `sqrt([N - n]_+) / (N - 1)`.
pub fn linear_root(particles: usize, n: usize) -> f64 {
    (particles as f64 - n as f64).max(0.0).sqrt() * lambda(particles)
}

/// `sqrt([(N - n)(N - n - 1)]_+) / (N - 1)`.
pub fn pair_root(particles: usize, n: usize) -> f64 {
    let rest = particles as f64 - n as f64;
    (rest * (rest - 1.0)).max(0.0).sqrt() * lambda(particles)
}

/// Exact remainder `R3_a(n)` defined by
/// `sqrt([N-n]_+)/(N-1) = sum_{l<=a} c_l lambda^{l+1/2} (n-1)^l + lambda^{a+3/2} R3_a(n)`.
pub fn linear_remainder(table: &CoefficientTable, a: usize, particles: usize, n: usize) -> f64 {
    let lam = lambda(particles);
    let x = n as f64 - 1.0;
    let partial: f64 = (0..=a)
        .map(|l| table.c_plain(l) * lam.powf(l as f64 + 0.5) * x.powi(l as i32))
        .sum();
    (linear_root(particles, n) - partial) / lam.powf(a as f64 + 1.5)
}

/// Exact remainder `R2_a(n)` defined by
/// `sqrt([(N-n)(N-n-1)]_+)/(N-1) = sum_{l<=a} lambda^l sum_j d_{l,j} (n-1)^j + lambda^{a+1} R2_a(n)`.
pub fn pair_remainder(table: &CoefficientTable, a: usize, particles: usize, n: usize) -> f64 {
    let lam = lambda(particles);
    let x = n as f64 - 1.0;
    let partial: f64 = (0..=a)
        .map(|l| lam.powi(l as i32) * (0..=l).map(|j| table.d[l][j] * x.powi(j as i32)).sum::<f64>())
        .sum();
    (pair_root(particles, n) - partial) / lam.powi(a as i32 + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarRemainder {
    pub n: usize,
    pub linear: f64,
    pub linear_bound: f64,
    pub pair: f64,
    pub pair_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarRemainderReport {
    pub a: usize,
    pub particles: usize,
    pub entries: Vec<ScalarRemainder>,
    pub holds: bool,
}

/// Evaluates both remainders at each `n` and compares with
/// `|R3_a(n)| <= 2^{a+1} (n+1)^{a+1}` and `|R2_a(n)| <= (a+1)^2 4^{a+1} (n+1)^{a+1}`.
pub fn scalar_remainder_check(a: usize, particles: usize, nvals: &[usize]) -> ScalarRemainderReport {
    let table = taylor_coefficients(a + 1);
    let entries: Vec<ScalarRemainder> = nvals
        .iter()
        .map(|&n| {
            let growth = (n as f64 + 1.0).powi(a as i32 + 1);
            ScalarRemainder {
                n,
                linear: linear_remainder(&table, a, particles, n),
                linear_bound: 2f64.powi(a as i32 + 1) * growth,
                pair: pair_remainder(&table, a, particles, n),
                pair_bound: ((a + 1) * (a + 1)) as f64 * 4f64.powi(a as i32 + 1) * growth,
            }
        })
        .collect();
    let holds = entries
        .iter()
        .all(|e| e.linear.abs() <= e.linear_bound && e.pair.abs() <= e.pair_bound);
    ScalarRemainderReport {
        a,
        particles,
        entries,
        holds,
    }
}
