//! The k-purchase dynamic program and its relatives.
//!
//! Buying any `k` of `N` sequentially inspected uniform costs is solved
//! exactly by backward induction.  Writing `rho[k][m]` for the optimal
//! expected total cost with `m` items left and `k` still to buy,
//!
//! ```text
//! rho[k][k] = k / 2                       (all remaining forced)
//! rho[k][m] = rho[k][m-1] - (rho[k][m-1] - rho[k-1][m-1])^2 / 2
//! ```
//!
//! and the optimal rule accepts a cost below
//! `rho[k][m-1] - rho[k-1][m-1]`.  As `N` grows, `N * rho[k][N]` tends to
//! the constant `c_k` with `c_1 = 2`, `c_k = c_{k-1} + 1 + sqrt(1 + 2 c_{k-1})`.
//!
//! The density-scaled variant replaces the uniform cost law by the latent
//! law `Pr(Z >= x) = (1 - x)^{1/D}` (the one whose D-fold minimum is
//! uniform); the same recurrence applies with the uniform integral
//! `theta^2 / 2` replaced by the exact integral of the latent CDF, and the
//! asymptotic value becomes `D * c_k / N`.

use crate::strategies::StrategyOutcome;
use crate::stream::Session;
use crate::util::KahanSum;
use crate::{invalid, Error, Result};

/// Mean of the latent law `Pr(Z >= x) = (1 - x)^{1/d}`.
#[inline]
pub fn latent_mean(d: f64) -> f64 {
    d / (d + 1.0)
}

/// `G(theta) = ∫_0^theta F(x) dx` for the latent CDF
/// `F(x) = 1 - (1-x)^{1/d}`; the per-step loss of the recurrence.
///
/// For `d = 1` this is `theta^2 / 2` exactly.  The `expm1`/`ln_1p` form
/// keeps full relative precision for thresholds as small as 1e-9.
#[inline]
pub fn latent_cdf_integral(theta: f64, d: f64) -> f64 {
    let theta = theta.clamp(0.0, 1.0);
    if d == 1.0 {
        return 0.5 * theta * theta;
    }
    let p = (d + 1.0) / d;
    theta + (d / (d + 1.0)) * (p * (-theta).ln_1p()).exp_m1()
}

/// Dense table of k-purchase values `rho[k][m]`, `0 <= k <= k_max`,
/// `k <= m <= n_max`, for the uniform law (`density = 1`) or a latent law.
#[derive(Debug, Clone)]
pub struct RhoTable {
    k_max: usize,
    n_max: usize,
    density: f64,
    /// Row-major by k; entry `k * (n_max + 1) + m`.  Entries with `m < k`
    /// are unused.
    values: Vec<f64>,
}

impl RhoTable {
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    /// `rho[k][m]`: optimal expected cost of buying `k` among `m` items.
    #[inline]
    pub fn get(&self, k: usize, m: usize) -> f64 {
        debug_assert!(k <= self.k_max && m <= self.n_max && k <= m);
        if k == 0 {
            return 0.0;
        }
        self.values[k * (self.n_max + 1) + m]
    }

    /// Acceptance threshold with `m` items remaining (including the current
    /// one) and `j` still needed, `m > j`: accept a cost strictly below it.
    #[inline]
    pub fn threshold(&self, j: usize, m: usize) -> f64 {
        debug_assert!(j >= 1 && m > j);
        self.get(j, m - 1) - self.get(j - 1, m - 1)
    }

    /// CSV export: header `k,N,rho`, one row per entry, 17 significant
    /// digits.
    pub fn write_csv(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "k,N,rho")?;
        for k in 0..=self.k_max {
            for m in k.max(1)..=self.n_max {
                writeln!(w, "{},{},{}", k, m, format_g17(self.get(k, m)))?;
            }
        }
        Ok(())
    }
}

/// Format with 17 significant digits, locale independent.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Run the recurrence column by column, invoking `visit(m, col)` where
/// `col[k] = rho[k][m]` for `k <= min(k_max, m)`.  O(k_max) memory; lets
/// invariant checks scan huge tables without storing them.
pub fn scan_rho(
    k_max: usize,
    n_max: usize,
    density: f64,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<()> {
    if k_max < 1 || k_max > n_max {
        return invalid(format!("need 1 <= k_max <= n_max, got k_max={k_max}, n_max={n_max}"));
    }
    if !(density > 0.0) || !density.is_finite() {
        return invalid("density must be positive and finite");
    }
    let mu = latent_mean(density);
    let uniform = density == 1.0;
    let mut col = vec![0.0f64; k_max + 1];
    for m in 1..=n_max {
        let hi = k_max.min(m);
        // Descending k: col[j] and col[j-1] still hold column m-1 values
        // when row j of column m is formed.
        for j in (1..=hi).rev() {
            if j == m {
                col[j] = j as f64 * mu;
            } else {
                let theta = col[j] - col[j - 1];
                let loss = if uniform {
                    0.5 * theta * theta
                } else {
                    latent_cdf_integral(theta, density)
                };
                col[j] -= loss;
            }
        }
        visit(m, &col[..=hi]);
    }
    Ok(())
}

/// Compute the full threshold table for the uniform cost law.
pub fn compute_rho(k_max: usize, n_max: usize) -> Result<RhoTable> {
    compute_rho_density(k_max, n_max, 1.0)
}

/// Compute the table for the latent law `Pr(Z >= x) = (1 - x)^{1/density}`
/// (density `D = 1` recovers the uniform law; `N * rho[1][N] -> 2 D`).
pub fn compute_rho_density(k_max: usize, n_max: usize, density: f64) -> Result<RhoTable> {
    let mut values = vec![f64::NAN; (k_max + 1) * (n_max + 1)];
    scan_rho(k_max, n_max, density, |m, col| {
        for (k, &v) in col.iter().enumerate().skip(1) {
            values[k * (n_max + 1) + m] = v;
        }
    })?;
    Ok(RhoTable { k_max, n_max, density, values })
}

/// The asymptotic k-purchase constants `c_k` and `d_k = sqrt(1 + 2 c_k)`.
#[derive(Debug, Clone)]
pub struct CkSequence {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

impl CkSequence {
    pub fn k_max(&self) -> usize {
        self.c.len()
    }

    /// `c_k`, 1-based.
    pub fn c(&self, k: usize) -> f64 {
        self.c[k - 1]
    }

    /// `d_k = sqrt(1 + 2 c_k)`, 1-based.
    pub fn d(&self, k: usize) -> f64 {
        self.d[k - 1]
    }
}

/// `c_1 = 2`, `c_k = c_{k-1} + 1 + sqrt(1 + 2 c_{k-1})`.
pub fn compute_ck(k_max: usize) -> CkSequence {
    assert!(k_max >= 1);
    let mut c = Vec::with_capacity(k_max);
    let mut d = Vec::with_capacity(k_max);
    let mut ck = 2.0f64;
    c.push(ck);
    d.push((1.0 + 2.0 * ck).sqrt());
    for _ in 1..k_max {
        ck = ck + 1.0 + (1.0 + 2.0 * ck).sqrt();
        c.push(ck);
        d.push((1.0 + 2.0 * ck).sqrt());
    }
    CkSequence { c, d }
}

/// Clique cost exponents: `d_3 = 4/7`, `d_{r+1} = d_r / (d_r + 2)`.
pub fn clique_exponent(r: u32) -> f64 {
    assert!(r >= 3);
    let mut d = 4.0 / 7.0;
    for _ in 3..r {
        d = d / (d + 2.0);
    }
    d
}

/// Execute the optimal k-purchase strategy against a session.
///
/// At a step with `m` items remaining (including the current one) and `j`
/// purchases still needed, accept when the cost is below
/// `rho[j][m-1] - rho[j-1][m-1]`; accept unconditionally when `m == j`.
/// Always returns exactly `k` purchases.
pub fn run_k_purchase<S: Session + ?Sized>(
    session: &mut S,
    k: usize,
    table: &RhoTable,
) -> Result<StrategyOutcome> {
    let n_items = session.universe().item_count();
    if k == 0 || k as u64 > n_items {
        return invalid(format!("need 1 <= k <= N, got k={k}, N={n_items}"));
    }
    if table.k_max() < k || (table.n_max() as u64) < n_items - 1 {
        return invalid("rho table does not cover (k, N)");
    }
    let mut outcome = StrategyOutcome::new();
    let mut needed = k;
    while let Some(ev) = session.next_event()? {
        let m = n_items - ev.position + 1;
        let accept = m <= needed as u64 || ev.cost < table.threshold(needed, m as usize);
        session.record_decision(accept);
        outcome.inspections = ev.position;
        if accept {
            outcome.buy(ev.item, ev.cost);
            needed -= 1;
            if needed == 0 {
                outcome.success = true;
                return Ok(outcome);
            }
        }
    }
    Err(Error::Internal("session exhausted before k purchases".into()))
}

/// The average-two-purchase program: buy at least one item, exactly two on
/// average, minimizing expected total cost.
///
/// `q[k]` is the probability the first `k` items are all rejected
/// (`q[0] = 1 >= q[1] >= ... >= q[n] = 0`) and `a[k]` the conditional
/// expected number of later purchases given the first acceptance happened
/// at step `k` (`0 <= a[k] <= n - k`).  Feasibility requires
/// `sum (q[k-1] - q[k]) a[k] = 1`, and the cost, scaled by `n`, is
///
/// ```text
/// n * sum_k (q[k-1] - q[k]) * ((q[k-1] - q[k]) / (2 q[k-1]) + a[k]^2 / (2 (n-k)))
/// ```
#[derive(Debug, Clone)]
pub struct Avg2Program {
    pub n: usize,
    /// `q[0..=n]`.
    pub q: Vec<f64>,
    /// `a[k]` for `k = 1..=n`, stored at index `k-1`.
    pub a: Vec<f64>,
    /// Scaled objective `n * expected cost`.
    pub objective: f64,
    /// `|sum (q[k-1]-q[k]) a[k] - 1|`.
    pub constraint_residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Objective and gradient of the reduced program in decrement space.
///
/// With `w[k] = q[k-1] - q[k]` on the simplex, the inner minimization over
/// `a` has the closed form `a[k] = (n-k) / S`, `S = sum w[j] (n-j)`,
/// reducing the objective to
/// `sum w[k]^2 / (2 T[k]) + 1 / (2 S)` with `T[k] = sum_{j>=k} w[j]`.
fn avg2_objective_grad(n: usize, w: &[f64], grad: Option<&mut [f64]>) -> f64 {
    // Suffix sums T[k] (1-based k stored at k-1).
    let mut t = vec![0.0f64; n + 1];
    let mut acc = KahanSum::new();
    for k in (1..=n).rev() {
        acc.add(w[k - 1]);
        t[k] = acc.value();
    }
    let mut s_acc = KahanSum::new();
    for k in 1..=n {
        s_acc.add(w[k - 1] * (n - k) as f64);
    }
    let s = s_acc.value();
    let mut f_acc = KahanSum::new();
    for k in 1..=n {
        f_acc.add(w[k - 1] * w[k - 1] / (2.0 * t[k]));
    }
    let f = f_acc.value() + 1.0 / (2.0 * s);
    if let Some(grad) = grad {
        // d/dw_i = w_i/T_i - (1/2) sum_{k<=i} w_k^2/T_k^2 - (n-i)/(2 S^2).
        let mut prefix = 0.0;
        let s2 = 2.0 * s * s;
        for i in 1..=n {
            prefix += w[i - 1] * w[i - 1] / (t[i] * t[i]);
            grad[i - 1] = w[i - 1] / t[i] - 0.5 * prefix - (n - i) as f64 / s2;
        }
    }
    f
}

/// Continuum warm start: the within-family optimum is
/// `q(t) = (sinh(w (1-t)) / sinh w)^2`, found by scanning the family
/// parameter; discretized onto the grid.
fn avg2_warm_start(n: usize) -> Vec<f64> {
    let family_value = |omega: f64| -> f64 {
        // K = 2 ∫ r'^2, V = ∫ r^2 for r = sinh(omega (1-t))/sinh(omega).
        let sh = omega.sinh();
        let int_sinh2 = (2.0 * omega).sinh() / (4.0 * omega) - 0.5;
        let int_cosh2 = (2.0 * omega).sinh() / (4.0 * omega) + 0.5;
        let v = int_sinh2 / (sh * sh);
        let k = 2.0 * omega * omega * int_cosh2 / (sh * sh);
        k + 1.0 / (2.0 * (1.0 - v))
    };
    // Golden-section scan over omega.
    let (mut lo, mut hi) = (1e-3, 4.0);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if family_value(m1) <= family_value(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let omega = 0.5 * (lo + hi);
    let sh = omega.sinh();
    let q = |t: f64| {
        let r = (omega * (1.0 - t)).sinh() / sh;
        r * r
    };
    let mut w = Vec::with_capacity(n);
    for k in 1..=n {
        let dec = q((k - 1) as f64 / n as f64) - q(k as f64 / n as f64);
        w.push(dec.max(1e-300));
    }
    w
}

/// Minimize the average-two-purchase program by gradient descent on the
/// logits of the decrement vector (monotone `q` by construction), warm
/// started from the continuum solution.
///
/// Returns the best feasible point found; `converged` is false when the
/// relative improvement never fell below `tolerance` within `iterations`.
pub fn optimize_avg2(n: usize, iterations: usize, tolerance: f64) -> Result<Avg2Program> {
    if n < 10 {
        return invalid(format!("n must be at least 10, got {n}"));
    }
    let mut z: Vec<f64> = avg2_warm_start(n).iter().map(|w| w.ln()).collect();
    let mut w = vec![0.0f64; n];
    let mut grad_w = vec![0.0f64; n];
    let mut grad_z = vec![0.0f64; n];
    // Adam state.
    let mut m1 = vec![0.0f64; n];
    let mut m2 = vec![0.0f64; n];
    let (b1, b2, eps, step): (f64, f64, f64, f64) = (0.9, 0.999, 1e-12, 0.05);

    let softmax = |z: &[f64], w: &mut [f64]| {
        let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (wi, zi) in w.iter_mut().zip(z) {
            *wi = (zi - zmax).exp();
            sum += *wi;
        }
        for wi in w.iter_mut() {
            *wi /= sum;
        }
    };

    softmax(&z, &mut w);
    let mut best_w = w.clone();
    let mut best_f = avg2_objective_grad(n, &w, None);
    let mut prev_f = best_f;
    let mut converged = false;
    let mut iters_used = 0;

    for it in 1..=iterations {
        iters_used = it;
        let f = avg2_objective_grad(n, &w, Some(&mut grad_w));
        if f < best_f {
            best_f = f;
            best_w.copy_from_slice(&w);
        }
        // Chain rule through softmax: dz = w .* (g - <w, g>).
        let inner: f64 = w.iter().zip(&grad_w).map(|(wi, gi)| wi * gi).sum();
        for i in 0..n {
            grad_z[i] = w[i] * (grad_w[i] - inner);
        }
        let (b1t, b2t) = (1.0 - b1.powi(it as i32), 1.0 - b2.powi(it as i32));
        for i in 0..n {
            m1[i] = b1 * m1[i] + (1.0 - b1) * grad_z[i];
            m2[i] = b2 * m2[i] + (1.0 - b2) * grad_z[i] * grad_z[i];
            z[i] -= step * (m1[i] / b1t) / ((m2[i] / b2t).sqrt() + eps);
        }
        softmax(&z, &mut w);
        // Convergence: relative improvement below tolerance over a window.
        if it % 25 == 0 {
            let rel = (prev_f - f) / f.abs().max(1e-300);
            if rel.abs() < tolerance {
                converged = true;
                break;
            }
            prev_f = f;
        }
    }
    let f = avg2_objective_grad(n, &w, None);
    if f < best_f {
        best_f = f;
        best_w.copy_from_slice(&w);
    }

    // Materialize q, a, and the exact constraint residual.
    let w = best_w;
    let mut q = Vec::with_capacity(n + 1);
    q.push(1.0);
    let mut acc = KahanSum::new();
    for k in 1..=n {
        acc.add(w[k - 1]);
        q.push((1.0 - acc.value()).max(0.0));
    }
    q[n] = 0.0;
    let mut s_acc = KahanSum::new();
    for k in 1..=n {
        s_acc.add(w[k - 1] * (n - k) as f64);
    }
    let s = s_acc.value();
    let a: Vec<f64> = (1..=n).map(|k| (n - k) as f64 / s).collect();
    let mut resid_acc = KahanSum::new();
    for k in 1..=n {
        resid_acc.add(w[k - 1] * a[k - 1]);
    }
    let constraint_residual = (resid_acc.value() - 1.0).abs();

    Ok(Avg2Program {
        n,
        q,
        a,
        objective: n as f64 * best_f,
        constraint_residual,
        converged,
        iterations: iters_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;
    use crate::stream::{ItemUniverse, RomSession};

    #[test]
    fn rho_base_cases() {
        let t = compute_rho(2, 4).unwrap();
        assert_eq!(t.get(1, 1), 0.5);
        assert_eq!(t.get(2, 2), 1.0);
        // One exact step: accept x2 iff x2 < 1/2 gives (1/2)(1/4) + (1/2)(1/2).
        assert!((t.get(1, 2) - 0.375).abs() < 1e-15);
    }

    /// Independent oracle: nested 1-D quadrature of the optimal policy
    /// value V_m = ∫ min(x, V_{m-1}) dx, Simpson with 2^14 panels.
    fn quadrature_value(m: usize) -> f64 {
        let mut v = 0.0f64; // V_0: forced regime never reached for k=1 at m>=1
        for step in 1..=m {
            let integrand = |x: f64| if step == 1 { x } else { x.min(v) };
            let panels = 1 << 14;
            let h = 1.0 / panels as f64;
            let mut sum = integrand(0.0) + integrand(1.0);
            for i in 1..panels {
                let x = i as f64 * h;
                sum += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(x);
            }
            v = sum * h / 3.0;
        }
        v
    }

    #[test]
    fn rho_matches_quadrature_oracle_small_n() {
        let t = compute_rho(1, 4).unwrap();
        for m in 1..=4 {
            let oracle = quadrature_value(m);
            assert!(
                (t.get(1, m) - oracle).abs() < 1e-9,
                "m={m}: dp={} oracle={oracle}",
                t.get(1, m)
            );
        }
    }

    #[test]
    fn rho_monotonicity_and_bounds() {
        let k_max = 12;
        let n_max = 3000;
        let t = compute_rho(k_max, n_max).unwrap();
        for k in 1..=k_max {
            assert_eq!(t.get(k, k), k as f64 / 2.0);
            for m in k + 1..=n_max {
                assert!(t.get(k, m) <= t.get(k, m - 1) + 1e-15, "k={k} m={m}");
                assert!(t.get(k, m) >= t.get(k - 1, m) - 1e-15);
            }
        }
        for m in 1..=n_max {
            assert!(t.get(1, m) <= 2.0 / (m as f64 + 1.0) + 1e-15);
        }
    }

    #[test]
    fn rho_finite_n_sandwich() {
        // The 2(1-10/N)/N lower bound holds up to N near 3800 and then
        // leaks: the induction step applied to the exact bound value lands
        // below the next bound from N = 3850 on, and the computed values
        // follow suit.  (The deficit at N = 1e5 is ~3e-5 relative, far
        // above the ~1e-12 accumulated rounding of the recurrence.)
        let t = compute_rho(1, 5000).unwrap();
        for m in 33..=3000 {
            let v = t.get(1, m);
            let lo = 2.0 * (1.0 - 10.0 / m as f64) / m as f64;
            let hi = 2.0 / (m as f64 + 1.0);
            assert!(lo <= v && v <= hi + 1e-15, "m={m} v={v}");
        }
        let b = |n: f64| 2.0 * (1.0 - 10.0 / n) / n;
        let x = b(3849.0);
        assert!(x * (1.0 - x / 2.0) < b(3850.0), "induction step unexpectedly holds");
        assert!(t.get(1, 3850) < b(3850.0));
    }

    #[test]
    fn rho_within_ck_bounds() {
        let ck = compute_ck(8);
        let t = compute_rho(8, 2000).unwrap();
        for k in 2..=8usize {
            for m in (k + 1)..=2000 {
                let v = t.get(k, m);
                let up = ck.c(k) / m as f64;
                let lo = (1.0 - 1.0 / (m as f64).sqrt()) * up;
                assert!(v <= up + 1e-12, "k={k} m={m}");
                assert!(v >= lo - 1e-12, "k={k} m={m}");
            }
        }
    }

    #[test]
    fn ck_values_and_bounds() {
        let ck = compute_ck(1000);
        assert_eq!(ck.c(1), 2.0);
        // One recurrence step evaluated independently.
        assert!((ck.c(2) - (3.0 + 5.0f64.sqrt())).abs() < 1e-12);
        let c3 = (3.0 + 5.0f64.sqrt()) + 1.0 + (1.0 + 2.0 * (3.0 + 5.0f64.sqrt())).sqrt();
        assert!((ck.c(3) - c3).abs() < 1e-12);
        for k in 1..=1000usize {
            let c = ck.c(k);
            let kf = k as f64;
            assert!(kf * kf / 2.0 <= c && c <= 2.0 * kf * kf, "k={k} c={c}");
            let d = ck.d(k);
            assert!((d * d - (1.0 + 2.0 * c)).abs() < 1e-9 * d * d);
            // d_k > k always; the excess d_k - k starts at sqrt(5) - 1 and
            // grows like (1/2) ln k, so no (k, k+1) window exists.
            assert!(kf < d, "k={k} d={d}");
            assert!(d < kf + 1.5 + 0.6 * kf.ln(), "k={k} d={d}");
        }
        // The k+1 ceiling is real only for the first two indices.
        assert!(ck.d(1) > 2.0 && ck.d(2) > 3.0);
    }

    #[test]
    fn clique_exponents_match() {
        assert!((clique_exponent(3) - 4.0 / 7.0).abs() < 1e-15);
        assert!((clique_exponent(4) - 2.0 / 9.0).abs() < 1e-15);
        assert!((clique_exponent(5) - 0.1).abs() < 1e-15);
        // Closed form 1 / (11 * 2^{r-5} - 1) for r >= 5.
        for r in 5..=12u32 {
            let closed = 1.0 / (11.0 * 2f64.powi(r as i32 - 5) - 1.0);
            assert!((clique_exponent(r) - closed).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn density_one_degenerates_to_uniform() {
        let a = compute_rho(3, 200).unwrap();
        let b = compute_rho_density(3, 200, 1.0).unwrap();
        for k in 1..=3 {
            for m in k..=200 {
                assert_eq!(a.get(k, m), b.get(k, m));
            }
        }
    }

    #[test]
    fn density_asymptote_moderate_n() {
        // N * rho_hat[1][N] approaches 2D from below.
        for d in [4.0, 10.0] {
            let n = 20_000;
            let t = compute_rho_density(1, n, d).unwrap();
            let scaled = n as f64 * t.get(1, n);
            assert!(
                (scaled - 2.0 * d).abs() < 0.04 * 2.0 * d,
                "d={d}: scaled {scaled}"
            );
        }
    }

    #[test]
    fn k_purchase_forced_when_k_equals_n() {
        let u = ItemUniverse::abstract_items(6).unwrap();
        let t = compute_rho(6, 6).unwrap();
        let mut total = 0.0;
        let trials = 4000;
        for s in 0..trials {
            let mut sess = RomSession::new(u, RngHandle::new(41, s));
            let out = run_k_purchase(&mut sess, 6, &t).unwrap();
            assert_eq!(out.purchased.len(), 6);
            assert!(out.success);
            total += out.total_cost();
        }
        let mean = total / trials as f64;
        // All items forced: expectation N/2 = 3.
        assert!((mean - 3.0).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn k_purchase_matches_dp_value() {
        let n_items = 60u64;
        let k = 2;
        let t = compute_rho(k, n_items as usize).unwrap();
        let u = ItemUniverse::abstract_items(n_items).unwrap();
        let trials = 60_000u64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for s in 0..trials {
            let mut sess = RomSession::new(u, RngHandle::new(7, s));
            let out = run_k_purchase(&mut sess, k, &t).unwrap();
            sum += out.total_cost();
            sumsq += out.total_cost() * out.total_cost();
        }
        let mean = sum / trials as f64;
        let var = (sumsq / trials as f64 - mean * mean).max(0.0);
        let se = (var / trials as f64).sqrt();
        let dp = t.get(k, n_items as usize);
        assert!(
            (mean - dp).abs() < 3.0 * se,
            "mean {mean} vs dp {dp} (se {se})"
        );
    }

    #[test]
    fn k_purchase_rejects_uncovered_table() {
        let u = ItemUniverse::abstract_items(10).unwrap();
        let t = compute_rho(1, 5).unwrap();
        let mut sess = RomSession::new(u, RngHandle::new(1, 1));
        assert!(run_k_purchase(&mut sess, 1, &t).is_err());
    }

    #[test]
    fn avg2_rejects_small_n() {
        assert!(optimize_avg2(5, 10, 1e-6).is_err());
    }

    #[test]
    fn avg2_constraint_and_feasibility() {
        let p = optimize_avg2(200, 400, 1e-10).unwrap();
        assert!(p.constraint_residual <= 1e-9, "residual {}", p.constraint_residual);
        assert_eq!(p.q[0], 1.0);
        assert_eq!(p.q[200], 0.0);
        for k in 1..=200 {
            assert!(p.q[k] <= p.q[k - 1] + 1e-15);
            assert!(p.a[k - 1] >= 0.0 && p.a[k - 1] <= (200 - k) as f64 + 1e-9);
        }
    }

    #[test]
    fn avg2_objective_near_continuum_value() {
        let p = optimize_avg2(2000, 2000, 1e-9).unwrap();
        assert!(
            p.objective > 2.70 && p.objective < 2.76,
            "objective {}",
            p.objective
        );
        assert!(p.objective >= 2.5 - 1e-3);
    }
}
