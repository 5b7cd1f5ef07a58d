"""Shared numerical helpers: batched Levenberg-Marquardt least squares."""
from __future__ import annotations

import numpy as np


def levenberg_marquardt(residual, jacobian, z0, *, tol: float, max_iter: int,
                        retract=None, lam0: float = 1e-3, lam_min: float = 1e-12,
                        lam_max: float = 1e8, step_cap: float = 0.5):
    """Damped least-squares iteration on a batch of starting points.

    residual(z) -> (n, m), jacobian(z) -> (n, m, d) with z of shape (n, d).
    Solves (J^T J + lam I) delta = -J^T r per row; accepted steps shrink the
    damping, rejected ones grow it.  Steps are capped at step_cap in norm,
    which keeps iterates from tunneling between basins when the Jacobian is
    rank-deficient (flat valleys, solution continua).  An optional ``retract``
    maps trial points back onto a constraint set after each step.  Rows whose
    residual or Jacobian stops being finite are abandoned and report an
    infinite residual norm.

    Returns (z, residual_norms).
    """
    z = np.array(z0, dtype=float)
    if retract is not None:
        z = retract(z)
    n, d = z.shape
    res = residual(z)
    rn = np.linalg.norm(res, axis=-1)
    dead = ~np.isfinite(rn)
    rn[dead] = np.inf
    lam = np.full(n, lam0)
    eye = np.eye(d)
    for _ in range(max_iter):
        active = (rn > tol) & ~dead
        if not active.any():
            break
        act_idx = np.flatnonzero(active)
        za = z[act_idx]
        ra = res[act_idx]
        la = lam[act_idx]
        jac = jacobian(za)
        jtj = np.einsum("nmi,nmj->nij", jac, jac)
        jtr = np.einsum("nmi,nm->ni", jac, ra)
        bad = ~(np.isfinite(jtj).all(axis=(1, 2)) & np.isfinite(jtr).all(axis=1))
        if bad.any():
            dead[act_idx[bad]] = True
            rn[act_idx[bad]] = np.inf
            keep = ~bad
            act_idx = act_idx[keep]
            if act_idx.size == 0:
                continue
            za, ra, la, jtj, jtr = za[keep], ra[keep], la[keep], jtj[keep], jtr[keep]
        # Marquardt scaling: damp relative to the diagonal of J^T J so the
        # shift survives rounding whatever the residual scale is
        diag = np.einsum("nii->ni", jtj)
        scale = np.maximum(diag, 1.0)
        prev = rn[act_idx]
        accepted = np.zeros(len(za), dtype=bool)
        best_z = za.copy()
        for _ in range(8):
            todo = ~accepted
            if not todo.any():
                break
            a = jtj[todo] + (la[todo, None] * scale[todo])[:, :, None] * eye
            try:
                delta = -np.linalg.solve(a, jtr[todo, :, None])[..., 0]
            except np.linalg.LinAlgError:
                delta = -np.einsum("nij,nj->ni", np.linalg.pinv(a), jtr[todo])
            norms = np.linalg.norm(delta, axis=-1)
            over = norms > step_cap
            if over.any():
                delta[over] *= (step_cap / norms[over])[:, None]
            trial = za[todo] + delta
            if retract is not None:
                trial = retract(trial)
            trn = np.linalg.norm(residual(trial), axis=-1)
            trn = np.where(np.isfinite(trn), trn, np.inf)
            good = trn < prev[todo]
            idx = np.flatnonzero(todo)
            gi = idx[good]
            best_z[gi] = trial[good]
            accepted[gi] = True
            la[gi] = np.maximum(la[gi] * 0.3, lam_min)
            bi = idx[~good]
            la[bi] = np.minimum(la[bi] * 10.0, lam_max)
        z[act_idx] = best_z
        res_new = residual(best_z)
        res[act_idx] = res_new
        new_rn = np.linalg.norm(res_new, axis=-1)
        rn[act_idx] = np.where(np.isfinite(new_rn), new_rn, np.inf)
        dead[act_idx] |= ~np.isfinite(new_rn)
        lam[act_idx] = la
    return z, rn
