//! Radial solutions of `Δ^k u − λu = |u|^{2*−2}u` in the unit ball with
//! Dirichlet conditions: principal eigenvalue, damped Newton, continuation
//! in `λ` and blow-up diagnostics.

use serde::Serialize;
use std::sync::Arc;

use crate::bubbles::{bubble_integrals, BubbleProfile};
use crate::calculus::{differentiate, iterated_laplacian_with_estimate, weighted_integral};
use crate::error::{Error, Result};
use crate::field::{Parity, RadialField};
use crate::green::{boggio_center, discrete_green};
use crate::grid::RadialGrid;
use crate::operator::{assemble_operator, DiscreteOperator, HardyPotential};
use crate::params::ProblemParams;

pub const NEWTON_MAX_ITERATIONS: usize = 60;

/// Besides the residual test, Newton stops only once its last step is below
/// this fraction of `‖u‖_∞`.
pub const NEWTON_STEP_TOL: f64 = 1e-8;

/// An entry is in the blow-up regime once its sup-norm reaches this multiple
/// of the first entry's.
pub const BLOWUP_FACTOR: f64 = 10.0;

/// Regridding keeps at least `CORE_NODES` nodes inside `r ≤ CORE_WIDTH · ν`.
pub const CORE_NODES: usize = 30;
pub const CORE_WIDTH: f64 = 5.0;

/// Consecutive entries may differ in sup-norm by at most this factor.
const MAX_SUP_JUMP: f64 = 3.0;

const MAX_ENTRIES: usize = 400;

/// `F(u) = op·u − |u|^{2*−2}u` on interior rows, the boundary functionals on
/// the last `k` rows.
pub fn residual_vector(op: &DiscreteOperator, u: &[f64]) -> Vec<f64> {
    let q = op.params().two_star() - 2.0;
    let mut f = op.apply(u);
    for (i, fi) in f.iter_mut().enumerate() {
        if op.is_interior(i) {
            *fi -= u[i].abs().powf(q) * u[i];
        }
    }
    f
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Componentwise backward error of `u`:
/// `max_i |F_i(u)| / ((|A|·|u|)_i + |u_i|^{2*−1})`, with `A` the assembled
/// operator. It sits at roundoff level for an exact discrete solution
/// regardless of `‖u‖_∞`, and is not blind to the `λu` term where `u` is small.
pub fn scaled_residual(op: &DiscreteOperator, u: &[f64]) -> f64 {
    backward_error(op, &op.matrix(), u, &residual_vector(op, u))
}

fn backward_error(op: &DiscreteOperator, a: &crate::linalg::BandMatrix, u: &[f64], f: &[f64]) -> f64 {
    let q = op.params().two_star() - 1.0;
    let scale = a.abs_matvec(&u.iter().map(|v| v.abs()).collect::<Vec<_>>());
    f.iter()
        .enumerate()
        .map(|(i, fi)| {
            let d = scale[i] + if op.is_interior(i) { u[i].abs().powf(q) } else { 0.0 };
            if d > 0.0 {
                fi.abs() / d
            } else if *fi == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue of `Δ^k − λ − V` with Dirichlet rows, by inverse
/// iteration on the pencil `(A, B)` where `B` drops the boundary rows.
pub fn principal_eigenvalue(op: &DiscreteOperator) -> Result<f64> {
    let lu = op.matrix().lu()?;
    let mask = op.interior_mask();
    let mut x = mask.clone();
    let mut lam = f64::NAN;
    for _ in 0..500 {
        let bx: Vec<f64> = x.iter().zip(&mask).map(|(a, b)| a * b).collect();
        let y = lu.solve(&bx);
        let by: Vec<f64> = y.iter().zip(&mask).map(|(a, b)| a * b).collect();
        let num: f64 = bx.iter().zip(&by).map(|(a, b)| a * b).sum();
        let den: f64 = by.iter().map(|a| a * a).sum();
        let next = num / den;
        let s = sup(&y);
        if !(s > 0.0) || !next.is_finite() {
            return Err(Error::NotConverged {
                iterations: 0,
                detail: "inverse iteration produced a degenerate vector".into(),
            });
        }
        x = y.iter().map(|v| v / s).collect();
        if (next - lam).abs() <= 1e-11 * next.abs() {
            return Ok(next);
        }
        lam = next;
    }
    Err(Error::NotConverged {
        iterations: 500,
        detail: format!("inverse iteration stuck near {lam}"),
    })
}

/// `λ₁` of `Δ^k` on the given ball grid.
pub fn dirichlet_eigenvalue(n: usize, k: usize, grid: &Arc<RadialGrid>) -> Result<f64> {
    let p = ProblemParams::new(n, k, 0.0)?;
    principal_eigenvalue(&assemble_operator(&p, &HardyPotential::zero(), grid)?)
}

/// `ν^{−(n−2k)/2} U(r/ν) (1 − r²)^k`: a bubble of scale `ν` cut off to
/// satisfy the boundary conditions, used to seed Newton.
pub fn bubble_seed(p: &ProblemParams, grid: &Arc<RadialGrid>, nu: f64) -> Result<RadialField> {
    let b = BubbleProfile::standard(*p)?;
    let w = p.conformal_weight();
    let k = p.k() as i32;
    RadialField::from_fn(grid, Parity::Even, |r| nu.powf(-w) * b.eval(r / nu) * (1.0 - r * r).powi(k))
}

/// Bubble scales tried by [`solve_from_bubbles`], largest first.
pub const SEED_SCALES: [f64; 8] = [1.0, 0.5, 0.25, 0.14, 0.08, 0.04, 0.02, 0.01];

/// Newton from [`bubble_seed`] at each of [`SEED_SCALES`] in turn, on a grid
/// resolving the scale; returns the first nontrivial solution.
pub fn solve_from_bubbles(p: &ProblemParams, grid_points: usize, tol: f64) -> Result<NewtonSolution> {
    let mut last = None;
    for nu in SEED_SCALES {
        let grid = Arc::new(RadialGrid::clustered_resolving(grid_points, 1.0, CORE_WIDTH * nu, CORE_NODES)?);
        match newton_solve(p, None, &bubble_seed(p, &grid, nu)?, tol) {
            Ok(sol) if !sol.collapsed => return Ok(sol),
            Ok(_) => last = Some(Error::Inconclusive(format!("seed of scale {nu} collapsed to the trivial solution"))),
            Err(e) => last = Some(e),
        }
    }
    Err(Error::NotConverged {
        iterations: SEED_SCALES.len(),
        detail: format!(
            "no bubble seed converged at lambda = {}: {}",
            p.lambda(),
            last.map(|e| e.to_string()).unwrap_or_default()
        ),
    })
}

#[derive(Debug, Clone)]
pub struct NewtonSolution {
    pub field: RadialField,
    pub residual: f64,
    pub iterations: usize,
    /// The guess was nontrivial but the iteration converged to `u ≡ 0`.
    pub collapsed: bool,
}

/// Damped Newton on the discrete residual, stopping when
/// [`scaled_residual`] `≤ tol`.
pub fn newton_solve(p: &ProblemParams, v: Option<&HardyPotential>, guess: &RadialField, tol: f64) -> Result<NewtonSolution> {
    if guess.parity() != Parity::Even {
        return Err(Error::precondition("radial solutions are even fields"));
    }
    let zero = HardyPotential::zero();
    let op = assemble_operator(p, v.unwrap_or(&zero), guess.grid())?;
    newton_on(&op, guess, tol)
}

fn newton_on(op: &DiscreteOperator, guess: &RadialField, tol: f64) -> Result<NewtonSolution> {
    let p = op.params();
    let q = p.two_star() - 2.0;
    let guess_norm = guess.sup_norm();
    let a = op.matrix();
    let step = |u: &[f64], f: &[f64]| -> Result<Vec<f64>> {
        let mut jac = a.clone();
        let diag: Vec<f64> = (0..u.len())
            .map(|i| if op.is_interior(i) { -(q + 1.0) * u[i].abs().powf(q) } else { 0.0 })
            .collect();
        jac.add_diagonal(&diag);
        let lu = jac.lu().map_err(|_| Error::SingularJacobian {
            lambda: p.lambda(),
            guess_norm,
        })?;
        Ok(lu.solve(f))
    };
    let mut u = guess.values().to_vec();
    let mut f = residual_vector(op, &u);
    for it in 0..NEWTON_MAX_ITERATIONS {
        let res = backward_error(op, &a, &u, &f);
        let du = step(&u, &f)?;
        if res <= tol {
            let size = sup(&u);
            if sup(&du) <= NEWTON_STEP_TOL * size || size == 0.0 {
                let field = RadialField::new(guess.grid().clone(), u, Parity::Even)?;
                let collapsed = guess_norm >= 10.0 * tol && field.sup_norm() < 10.0 * tol;
                return Ok(NewtonSolution {
                    field,
                    residual: res,
                    iterations: it,
                    collapsed,
                });
            }
            // small residual, large step: ill-conditioned, take the full step
            u.iter_mut().zip(&du).for_each(|(a, d)| *a -= d);
            f = residual_vector(op, &u);
            continue;
        }
        let merit = sup(&f);
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&du).map(|(a, d)| a - alpha * d).collect();
            let ft = residual_vector(op, &trial);
            let m = sup(&ft);
            if m.is_finite() && m < (1.0 - 1e-4 * alpha) * merit {
                u = trial;
                f = ft;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-6 {
                return Err(Error::NotConverged {
                    iterations: it,
                    detail: format!("line search failed at lambda = {} (scaled residual {res:.2e})", p.lambda()),
                });
            }
        }
    }
    Err(Error::NotConverged {
        iterations: NEWTON_MAX_ITERATIONS,
        detail: format!("Newton did not reach {tol:e} at lambda = {}", p.lambda()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    DecreasingLambda,
    IncreasingLambda,
}

#[derive(Debug, Clone)]
pub struct BranchEntry {
    pub lambda: f64,
    pub field: RadialField,
    pub sup_norm: f64,
    pub l2star_norm: f64,
    pub hk_seminorm: f64,
    pub nu: f64,
    /// Scaled residual recomputed from a freshly assembled operator.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchFailure {
    pub lambda: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct SolutionBranch {
    pub n: usize,
    pub k: usize,
    pub direction: Direction,
    pub tol: f64,
    pub entries: Vec<BranchEntry>,
    pub failure: Option<BranchFailure>,
}

impl SolutionBranch {
    pub fn params_at(&self, lambda: f64) -> ProblemParams {
        ProblemParams::new(self.n, self.k, lambda).expect("validated on construction")
    }

    /// Ratio of the last to the first sup-norm.
    pub fn sup_growth(&self) -> f64 {
        match (self.entries.first(), self.entries.last()) {
            (Some(a), Some(b)) => b.sup_norm / a.sup_norm,
            _ => f64::NAN,
        }
    }

    /// Largest over smallest `‖u‖_{2*}` along the branch.
    pub fn l2star_spread(&self) -> f64 {
        let hi = self.entries.iter().map(|e| e.l2star_norm).fold(0.0, f64::max);
        let lo = self.entries.iter().map(|e| e.l2star_norm).fold(f64::INFINITY, f64::min);
        hi / lo
    }

    /// Index of the entry with the largest sup-norm.
    pub fn deepest(&self) -> Option<usize> {
        (0..self.entries.len()).max_by(|&a, &b| self.entries[a].sup_norm.total_cmp(&self.entries[b].sup_norm))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub lambda: f64,
    pub sup_norm: f64,
    pub l2star_norm: f64,
    pub hk_seminorm: f64,
    pub nu: f64,
    pub residual: f64,
    pub grid_points: usize,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchManifest {
    pub n: usize,
    pub k: usize,
    pub direction: Direction,
    pub tol: f64,
    pub sup_growth: f64,
    pub entries: Vec<ManifestEntry>,
    pub failure: Option<BranchFailure>,
}

impl SolutionBranch {
    pub fn manifest(&self) -> BranchManifest {
        BranchManifest {
            n: self.n,
            k: self.k,
            direction: self.direction,
            tol: self.tol,
            sup_growth: self.sup_growth(),
            entries: self
                .entries
                .iter()
                .enumerate()
                .map(|(i, e)| ManifestEntry {
                    lambda: e.lambda,
                    sup_norm: e.sup_norm,
                    l2star_norm: e.l2star_norm,
                    hk_seminorm: e.hk_seminorm,
                    nu: e.nu,
                    residual: e.residual,
                    grid_points: e.field.len(),
                    file: entry_file(i),
                })
                .collect(),
            failure: self.failure.clone(),
        }
    }

    /// One `r,u` CSV per entry, named as in [`SolutionBranch::manifest`].
    pub fn write_fields(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (i, e) in self.entries.iter().enumerate() {
            let file = std::fs::File::create(dir.join(entry_file(i)))?;
            e.field.write_csv(std::io::BufWriter::new(file))?;
        }
        Ok(())
    }
}

fn entry_file(i: usize) -> String {
    format!("entry_{i:04}.csv")
}

/// `∫ (Δ^{k/2}u)² dx` without the resolution guard.
fn seminorm(u: &RadialField, p: &ProblemParams) -> Result<f64> {
    let (h, _) = iterated_laplacian_with_estimate(u, p.n(), p.k() / 2)?;
    let h = if p.k() % 2 == 1 { differentiate(&h, 1)? } else { h };
    weighted_integral(&h.map(|_, v| v * v)?.with_parity(Parity::Even), p)
}

/// Norms and verified residual of one solution.
pub fn make_entry(p: &ProblemParams, field: RadialField) -> Result<BranchEntry> {
    let op = assemble_operator(p, &HardyPotential::zero(), field.grid())?;
    let residual = scaled_residual(&op, field.values());
    let two_star = p.two_star();
    let sup_norm = field.sup_norm();
    let l2 = weighted_integral(&field.map(|_, v| v.abs().powf(two_star))?, p)?.powf(1.0 / two_star);
    let hk = seminorm(&field, p)?;
    Ok(BranchEntry {
        lambda: p.lambda(),
        nu: sup_norm.powf(-2.0 / (p.n() - 2 * p.k()) as f64),
        sup_norm,
        l2star_norm: l2,
        hk_seminorm: hk,
        residual,
        field,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    pub tol: f64,
    pub grid_points: usize,
    /// Step halvings allowed below the first step before the branch is
    /// declared stalled.
    pub max_halvings: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            grid_points: 400,
            max_halvings: 20,
        }
    }
}

/// Grid resolving the scale `nu` and the previous solution transplanted onto
/// it by the dilation `u ↦ s^{(n−2k)/2} u(s ·)`, `s = ν_prev/ν`.
fn transplant(prev: &BranchEntry, p: &ProblemParams, nu: f64, points: usize) -> Result<RadialField> {
    let grid = Arc::new(RadialGrid::clustered_resolving(points, 1.0, CORE_WIDTH * nu, CORE_NODES)?);
    let s = prev.nu / nu;
    let w = p.conformal_weight();
    let scale = s.powf(w);
    let old = &prev.field;
    let values = grid
        .nodes()
        .iter()
        .map(|&r| {
            let x = s * r;
            if x >= 1.0 {
                Ok(0.0)
            } else {
                Ok(scale * old.value_at(x)?)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    RadialField::new(grid, values, Parity::Even)
}

fn predicted_nu(entries: &[BranchEntry], lambda: f64) -> f64 {
    let last = entries.last().expect("nonempty");
    if entries.len() < 2 {
        return last.nu;
    }
    let prev = &entries[entries.len() - 2];
    let slope = (last.nu - prev.nu) / (last.lambda - prev.lambda);
    let guess = last.nu + slope * (lambda - last.lambda);
    guess.clamp(0.25 * last.nu, 4.0 * last.nu)
}

fn accept(prev: &BranchEntry, sol: &NewtonSolution) -> Result<()> {
    if sol.collapsed {
        return Err(Error::Inconclusive("collapsed to the trivial solution".into()));
    }
    let s = sol.field.sup_norm();
    if s > MAX_SUP_JUMP * prev.sup_norm || s < prev.sup_norm / MAX_SUP_JUMP {
        return Err(Error::Inconclusive(format!(
            "sup-norm jumped from {:.3e} to {s:.3e}",
            prev.sup_norm
        )));
    }
    let sign = |f: &RadialField| f.values()[0].signum();
    if sign(&sol.field) != sign(&prev.field) {
        return Err(Error::Inconclusive("sign at the origin flipped".into()));
    }
    Ok(())
}

fn step_to(template: &ProblemParams, prev: &[BranchEntry], lambda: f64, opts: &ContinuationOptions) -> Result<BranchEntry> {
    let p = template.with_lambda(lambda);
    let last = prev.last().expect("nonempty");
    let nu = predicted_nu(prev, lambda);
    let mut err = None;
    for target in [nu, last.nu] {
        let guess = transplant(last, &p, target, opts.grid_points)?;
        match newton_solve(&p, None, &guess, opts.tol).and_then(|s| accept(last, &s).map(|_| s)) {
            Ok(sol) => {
                let entry = make_entry(&p, sol.field)?;
                // regrid once more if the converged scale escaped the core
                if entry.field.grid().count_within(CORE_WIDTH * entry.nu) >= CORE_NODES {
                    return Ok(entry);
                }
                let again = transplant(&entry, &p, entry.nu, opts.grid_points)?;
                let sol = newton_solve(&p, None, &again, opts.tol)?;
                return make_entry(&p, sol.field);
            }
            Err(e) => err = Some(e),
        }
    }
    Err(err.expect("at least one attempt"))
}

/// Solves along `lambda_path` (monotone), warm-starting each step from the
/// previous solution with a dilation-corrected predictor and bisecting the
/// step on failure. Every converged intermediate solve is kept as an entry.
/// The branch stops at the first `λ` that cannot be reached within
/// `max_halvings` halvings of the first step; that `λ` is recorded.
pub fn continuation(template: &ProblemParams, lambda_path: &[f64], seed: &RadialField, opts: &ContinuationOptions) -> Result<SolutionBranch> {
    if lambda_path.is_empty() {
        return Err(Error::invalid("empty lambda path"));
    }
    let increasing = lambda_path.windows(2).all(|w| w[1] > w[0]);
    let decreasing = lambda_path.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::invalid("lambda path must be strictly monotone"));
    }
    let mut branch = SolutionBranch {
        n: template.n(),
        k: template.k(),
        direction: if decreasing && lambda_path.len() > 1 {
            Direction::DecreasingLambda
        } else {
            Direction::IncreasingLambda
        },
        tol: opts.tol,
        entries: Vec::new(),
        failure: None,
    };
    let p0 = template.with_lambda(lambda_path[0]);
    match newton_solve(&p0, None, seed, opts.tol) {
        Ok(sol) if !sol.collapsed && sol.field.sup_norm() > 0.0 => branch.entries.push(make_entry(&p0, sol.field)?),
        Ok(_) => {
            branch.failure = Some(BranchFailure {
                lambda: lambda_path[0],
                reason: "first step collapsed to the trivial solution".into(),
            });
            return Ok(branch);
        }
        Err(e) => {
            branch.failure = Some(BranchFailure {
                lambda: lambda_path[0],
                reason: e.to_string(),
            });
            return Ok(branch);
        }
    }
    let first_step = lambda_path
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(f64::INFINITY, f64::min);
    let min_step = first_step * 0.5f64.powi(opts.max_halvings as i32);
    for &target in &lambda_path[1..] {
        let mut step = target - branch.entries.last().expect("nonempty").lambda;
        loop {
            let current = branch.entries.last().expect("nonempty").lambda;
            if current == target {
                break;
            }
            let remaining = target - current;
            if step.abs() > remaining.abs() {
                step = remaining;
            }
            let lambda = if step == remaining { target } else { current + step };
            match step_to(template, &branch.entries, lambda, opts) {
                Ok(entry) => {
                    branch.entries.push(entry);
                    step *= 2.0;
                    if branch.entries.len() >= MAX_ENTRIES {
                        branch.failure = Some(BranchFailure {
                            lambda,
                            reason: format!("entry budget of {MAX_ENTRIES} exhausted"),
                        });
                        return Ok(branch);
                    }
                }
                Err(e) => {
                    step *= 0.5;
                    if step.abs() < min_step {
                        branch.failure = Some(BranchFailure {
                            lambda,
                            reason: e.to_string(),
                        });
                        return Ok(branch);
                    }
                }
            }
        }
    }
    Ok(branch)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    pub lambda: f64,
    pub nu: f64,
    pub eps0: f64,
    /// `sup_{r ≤ Rν} |ν^{(n−2k)/2} u(r) − ε₀ U(r/ν)|`.
    pub profile_error: f64,
    /// Relative distance of `u/ν^{(n−2k)/2}` to `H = ε₀ (∫U^{2*−1}) G_λ(0,·)`
    /// on `[δ, 1−δ]`, with `G_λ` the discrete centre-pole Green function at
    /// the entry's `λ`.
    pub greenlimit_error: f64,
    /// The same with Boggio's `G_0` in place of `G_λ`.
    pub greenlimit_error_boggio: f64,
    /// `sup_r r^{(n−2k)/2} |u(r)|`.
    pub weak_estimate_sup: f64,
    /// `sup_r |u(r)| r^{n−2k−γ} / ν^{(n−2k)/2−γ}`.
    pub gamma_envelope: f64,
}

/// Blow-up diagnostics of entry `index`; refuses entries whose sup-norm is
/// below [`BLOWUP_FACTOR`] times the first entry's.
pub fn blowup_diagnostics(branch: &SolutionBranch, index: usize, radius: f64, delta: f64, gamma: f64) -> Result<BlowupReport> {
    let entry = branch
        .entries
        .get(index)
        .ok_or_else(|| Error::invalid(format!("no entry {index}")))?;
    let first = &branch.entries[0];
    if entry.sup_norm < BLOWUP_FACTOR * first.sup_norm {
        return Err(Error::precondition(format!(
            "entry is not in the blow-up regime: sup-norm {:.3e} below {BLOWUP_FACTOR} x {:.3e}",
            entry.sup_norm, first.sup_norm
        )));
    }
    if !(entry.nu * radius < 1.0) {
        return Err(Error::precondition(format!("need nu * R < 1, got {}", entry.nu * radius)));
    }
    let dn = (branch.n - 2 * branch.k) as f64;
    if !(gamma > 0.0 && gamma < dn) {
        return Err(Error::precondition(format!("gamma must lie in (0, {dn})")));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::invalid(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    let p = branch.params_at(entry.lambda);
    let w = p.conformal_weight();
    let u = &entry.field;
    let nodes = u.nodes();
    let vals = u.values();
    let eps0 = vals[0].signum();
    let nu = entry.nu;
    let scale = nu.powf(w);
    let bubble = BubbleProfile::standard(p)?;

    let profile_error = nodes
        .iter()
        .zip(vals)
        .filter(|(r, _)| **r <= radius * nu)
        .map(|(r, v)| (scale * v - eps0 * bubble.eval(r / nu)).abs())
        .fold(0.0, f64::max);

    let mass = bubble_integrals(&p)?.mass_u2sm1;
    let op = assemble_operator(&p, &HardyPotential::zero(), u.grid())?;
    let green = discrete_green(&op, 0.0)?;
    let g = &green.columns()[0].values;
    let mut greenlimit_error = 0.0f64;
    let mut greenlimit_error_boggio = 0.0f64;
    for (i, &r) in nodes.iter().enumerate() {
        if r < delta || r > 1.0 - delta {
            continue;
        }
        let x = vals[i] / scale;
        let h = eps0 * mass * g[i];
        greenlimit_error = greenlimit_error.max(((x - h) / h).abs());
        let h0 = eps0 * mass * boggio_center(p.n(), p.k(), r)?;
        greenlimit_error_boggio = greenlimit_error_boggio.max(((x - h0) / h0).abs());
    }

    let weak_estimate_sup = nodes
        .iter()
        .zip(vals)
        .map(|(r, v)| r.powf(w) * v.abs())
        .fold(0.0, f64::max);
    let gamma_envelope = nodes
        .iter()
        .zip(vals)
        .map(|(r, v)| v.abs() * r.powf(dn - gamma))
        .fold(0.0, f64::max)
        / nu.powf(w - gamma);
    Ok(BlowupReport {
        lambda: entry.lambda,
        nu,
        eps0,
        profile_error,
        greenlimit_error,
        greenlimit_error_boggio,
        weak_estimate_sup,
        gamma_envelope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridScheme};

    #[test]
    fn zero_is_a_fixed_point() {
        let p = ProblemParams::new(3, 1, 2.0).unwrap();
        let g = Arc::new(make_grid(60, GridScheme::Clustered, 1.0).unwrap());
        let sol = newton_solve(&p, None, &RadialField::zeros(&g, Parity::Even), 1e-10).unwrap();
        assert_eq!(sol.field.sup_norm(), 0.0);
        assert!(!sol.collapsed);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn ball_eigenvalue_n3() {
        let g = Arc::new(make_grid(80, GridScheme::Clustered, 1.0).unwrap());
        let l = dirichlet_eigenvalue(3, 1, &g).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((l - pi2).abs() < 1e-6 * pi2);
    }
}
