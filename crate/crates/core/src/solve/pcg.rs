use super::precond::Preconditioner;
use super::{SolveError, SolveOutcome};
use crate::sparse::{axpy, dot, norm2, CsrMatrix};
use crate::Real;

/// Removes the component along `k` (Euclidean projection).
pub(crate) fn project_out<T: Real>(k: Option<&[T]>, kk: T, v: &mut [T]) {
    if let Some(k) = k {
        let c = dot(k, v) / kk;
        axpy(-c, k, v);
    }
}

pub(crate) struct PcgParams<'a, T> {
    pub tolerance: T,
    pub max_iterations: usize,
    pub kernel: Option<&'a [T]>,
}

/// Preconditioned conjugate gradients on the complement of `kernel`.
pub(crate) fn pcg<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    m: &dyn Preconditioner<T>,
    params: &PcgParams<T>,
) -> Result<SolveOutcome<T>, SolveError> {
    let n = b.len();
    let kk = params.kernel.map_or(T::one(), |k| dot(k, k));
    let bnorm = norm2(b);
    let mut x = x0.map_or_else(|| vec![T::zero(); n], <[T]>::to_vec);
    project_out(params.kernel, kk, &mut x);
    if bnorm == T::zero() {
        return Ok(SolveOutcome { x: vec![T::zero(); n], iterations: 0, residual_history: vec![0.0], relative_residual: 0.0 });
    }
    let target = params.tolerance * bnorm;
    let mut history = Vec::new();
    let mut iterations = 0;
    // outer loop restarts from the true residual if the recurrence drifted
    for _restart in 0..4 {
        let mut r = a.mul_vec(&x);
        for (ri, &bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        project_out(params.kernel, kk, &mut r);
        let mut rnorm = norm2(&r);
        history.push((rnorm / bnorm).as_f64());
        if rnorm <= target {
            return Ok(SolveOutcome { x, iterations, relative_residual: (rnorm / bnorm).as_f64(), residual_history: history });
        }
        let mut z = vec![T::zero(); n];
        m.apply(&r, &mut z);
        project_out(params.kernel, kk, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut q = vec![T::zero(); n];
        while rnorm > target {
            if iterations >= params.max_iterations {
                return Err(SolveError::NotConverged { iterations, residual_history: history });
            }
            a.matvec(&p, &mut q);
            let pq = dot(&p, &q);
            if !(pq > T::zero()) {
                return Err(SolveError::Indefinite(format!(
                    "search direction with non-positive curvature pᵀAp = {:e} at iteration {iterations}",
                    pq.as_f64()
                )));
            }
            if !(rz > T::zero()) {
                return Err(SolveError::Indefinite(format!(
                    "preconditioner is not positive definite (rᵀz = {:e})",
                    rz.as_f64()
                )));
            }
            let alpha = rz / pq;
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &q, &mut r);
            iterations += 1;
            rnorm = norm2(&r);
            history.push((rnorm / bnorm).as_f64());
            if rnorm <= target {
                break;
            }
            m.apply(&r, &mut z);
            project_out(params.kernel, kk, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for (pi, &zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
        project_out(params.kernel, kk, &mut x);
    }
    let mut r = a.mul_vec(&x);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    project_out(params.kernel, kk, &mut r);
    let rel = (norm2(&r) / bnorm).as_f64();
    if rel <= params.tolerance.as_f64() * 10.0 {
        Ok(SolveOutcome { x, iterations, relative_residual: rel, residual_history: history })
    } else {
        Err(SolveError::NotConverged { iterations, residual_history: history })
    }
}

/// Per-column dot products of two interleaved blocks.
fn dots<T: Real>(k: usize, a: &[T], b: &[T], out: &mut [T]) {
    out.iter_mut().for_each(|v| *v = T::zero());
    for (ai, bi) in a.chunks_exact(k).zip(b.chunks_exact(k)) {
        for ((o, &x), &y) in out.iter_mut().zip(ai).zip(bi) {
            *o += x * y;
        }
    }
}

pub(crate) fn project_out_multi<T: Real>(k: Option<&[T]>, kk: T, width: usize, v: &mut [T]) {
    let Some(kern) = k else { return };
    let mut c = vec![T::zero(); width];
    for (&ki, vi) in kern.iter().zip(v.chunks_exact(width)) {
        for (cj, &x) in c.iter_mut().zip(vi) {
            *cj += ki * x;
        }
    }
    c.iter_mut().for_each(|v| *v = *v / kk);
    for (&ki, vi) in kern.iter().zip(v.chunks_exact_mut(width)) {
        for (x, &cj) in vi.iter_mut().zip(&c) {
            *x -= cj * ki;
        }
    }
}

/// Runs `k` independent PCG iterations in lockstep on interleaved vectors so
/// that every sweep over the matrix serves all right-hand sides. Columns
/// whose recurrence residual meets the tolerance but whose true residual
/// does not are finished by the single-vector solver.
pub(crate) fn pcg_multi<T: Real>(
    a: &CsrMatrix<T>,
    k: usize,
    b: &[T],
    m: &dyn Preconditioner<T>,
    params: &PcgParams<T>,
) -> Vec<Result<SolveOutcome<T>, SolveError>> {
    let n = a.nrows();
    assert_eq!(b.len(), n * k);
    let kk = params.kernel.map_or(T::one(), |k| dot(k, k));
    let mut x = vec![T::zero(); n * k];
    let mut r = b.to_vec();
    project_out_multi(params.kernel, kk, k, &mut r);
    let mut bnorm = vec![T::zero(); k];
    dots(k, b, b, &mut bnorm);
    bnorm.iter_mut().for_each(|v| *v = v.sqrt());
    let mut history: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut failure: Vec<Option<SolveError>> = (0..k).map(|_| None).collect();
    let mut iterations = vec![0usize; k];
    let mut active: Vec<bool> = bnorm.iter().map(|&v| v > T::zero()).collect();
    let mut rr = vec![T::zero(); k];
    dots(k, &r, &r, &mut rr);
    for j in 0..k {
        if active[j] {
            let rel = rr[j].sqrt() / bnorm[j];
            history[j].push(rel.as_f64());
            if rel <= params.tolerance {
                active[j] = false;
            }
        }
    }
    let mask = |v: &mut [T], active: &[bool]| {
        for vi in v.chunks_exact_mut(k) {
            for (x, &a) in vi.iter_mut().zip(active) {
                if !a {
                    *x = T::zero();
                }
            }
        }
    };
    let mut z = vec![T::zero(); n * k];
    let mut q = vec![T::zero(); n * k];
    let mut p;
    let mut rz = vec![T::zero(); k];
    let mut pq = vec![T::zero(); k];
    if active.iter().any(|&a| a) {
        m.apply_multi(k, &r, &mut z);
        project_out_multi(params.kernel, kk, k, &mut z);
        mask(&mut z, &active);
    }
    p = z.clone();
    dots(k, &r, &z, &mut rz);
    let mut alpha = vec![T::zero(); k];
    let mut beta = vec![T::zero(); k];
    while active.iter().any(|&a| a) {
        a.matmul_interleaved(k, &p, &mut q);
        dots(k, &p, &q, &mut pq);
        for j in 0..k {
            alpha[j] = T::zero();
            if !active[j] {
                continue;
            }
            if iterations[j] >= params.max_iterations {
                failure[j] = Some(SolveError::NotConverged { iterations: iterations[j], residual_history: history[j].clone() });
                active[j] = false;
            } else if !(pq[j] > T::zero()) {
                failure[j] = Some(SolveError::Indefinite(format!(
                    "search direction with non-positive curvature pᵀAp = {:e} at iteration {}",
                    pq[j].as_f64(),
                    iterations[j]
                )));
                active[j] = false;
            } else if !(rz[j] > T::zero()) {
                failure[j] = Some(SolveError::Indefinite(format!(
                    "preconditioner is not positive definite (rᵀz = {:e})",
                    rz[j].as_f64()
                )));
                active[j] = false;
            } else {
                alpha[j] = rz[j] / pq[j];
                iterations[j] += 1;
            }
        }
        for ((xi, ri), (pi, qi)) in x.chunks_exact_mut(k).zip(r.chunks_exact_mut(k)).zip(p.chunks_exact(k).zip(q.chunks_exact(k))) {
            for j in 0..k {
                xi[j] += alpha[j] * pi[j];
                ri[j] -= alpha[j] * qi[j];
            }
        }
        dots(k, &r, &r, &mut rr);
        for j in 0..k {
            if active[j] {
                let rel = rr[j].sqrt() / bnorm[j];
                history[j].push(rel.as_f64());
                if rel <= params.tolerance {
                    active[j] = false;
                }
            }
        }
        if !active.iter().any(|&a| a) {
            break;
        }
        m.apply_multi(k, &r, &mut z);
        project_out_multi(params.kernel, kk, k, &mut z);
        mask(&mut z, &active);
        let rz_old = rz.clone();
        dots(k, &r, &z, &mut rz);
        for j in 0..k {
            beta[j] = if active[j] { rz[j] / rz_old[j] } else { T::zero() };
        }
        for (pi, zi) in p.chunks_exact_mut(k).zip(z.chunks_exact(k)) {
            for j in 0..k {
                pi[j] = zi[j] + beta[j] * pi[j];
            }
        }
    }
    drop((z, p, q));
    project_out_multi(params.kernel, kk, k, &mut x);
    // true residuals
    a.matmul_interleaved(k, &x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    project_out_multi(params.kernel, kk, k, &mut r);
    dots(k, &r, &r, &mut rr);
    drop(r);
    let mut col = vec![T::zero(); n];
    let mut rhs = vec![T::zero(); n];
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        if let Some(e) = failure[j].take() {
            out.push(Err(e));
            continue;
        }
        for i in 0..n {
            col[i] = x[i * k + j];
        }
        if bnorm[j] == T::zero() {
            out.push(Ok(SolveOutcome { x: vec![T::zero(); n], iterations: 0, residual_history: vec![0.0], relative_residual: 0.0 }));
            continue;
        }
        let rel = rr[j].sqrt() / bnorm[j];
        if rel <= params.tolerance {
            out.push(Ok(SolveOutcome {
                x: col.clone(),
                iterations: iterations[j],
                residual_history: std::mem::take(&mut history[j]),
                relative_residual: rel.as_f64(),
            }));
            continue;
        }
        for i in 0..n {
            rhs[i] = b[i * k + j];
        }
        let restarted = PcgParams {
            tolerance: params.tolerance,
            max_iterations: params.max_iterations.saturating_sub(iterations[j]),
            kernel: params.kernel,
        };
        out.push(pcg(a, &rhs, Some(&col), m, &restarted).map(|mut o| {
            let mut h = std::mem::take(&mut history[j]);
            h.append(&mut o.residual_history);
            o.residual_history = h;
            o.iterations += iterations[j];
            o
        }));
    }
    out
}
