"""Formal Taylor jets of functions f(z, zbar) by torus sampling.

The function is sampled on product tori with a geometric schedule of
radii per component.  On the torus of radius vector rho the discrete
Fourier mode mu in Z^n equals

    F_mu(rho) = sum_{I - J = mu} C[I,J] rho^(I + J)    (+ truncation),

so each mode pins down the coefficients along one diagonal I - J = mu.
Writing I = mu_+ + L, J = mu_- + L (L >= 0 componentwise), the unknowns
of a mode form a simplex of shifted even powers, and sampling the full
product grid of the radius schedule makes the per-mode linear system an
(overdetermined) tensor Vandermonde solve.  The cross-radius misfit of
that solve is the consistency certificate: a function admitting the jet
fits every mode to quadrature accuracy, while homogeneous non-polynomial
behaviour (for instance quotients by normsq) leaves a misfit whose decay
order locates the first inconsistent jet order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .expr import as_callable
from .series import FormalSeries

FULL_JET = "FullJet"
JET_UP_TO = "JetUpTo"
NO_JET = "NoJet"


class JetExtractionError(RuntimeError):
    """Evaluation failure on a torus or an unusable radius schedule."""


@dataclass
class JetResult:
    """Candidate jet plus per-order consistency diagnostics.

    ``per_order_residuals[k]`` is the worst relative cross-radius misfit
    charged to total order k; orders up to ``max_consistent_order`` are
    below the tolerance used for the run.  ``verdict`` is one of
    FullJet, JetUpTo (with ``max_consistent_order`` carrying the m of
    JetUpTo(m)) or NoJet.
    """

    series: FormalSeries
    max_consistent_order: int
    per_order_residuals: List[float]
    verdict: str
    tol: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def full(self) -> bool:
        return self.verdict == FULL_JET

    def verdict_text(self) -> str:
        if self.verdict == JET_UP_TO:
            return f"JetUpTo({self.max_consistent_order})"
        return self.verdict


def radius_schedule(num: int, rho0: float = 0.2, sigma: float = 1.25,
                    rho_max: Optional[float] = None) -> np.ndarray:
    """Geometric radius schedule rho0 * sigma^t, optionally rescaled so the
    largest radius equals rho_max (keeps the nodes distinct)."""
    if num < 2:
        raise ValueError("need at least 2 radii")
    if rho_max is not None and rho0 * sigma ** (num - 1) > rho_max:
        if rho_max <= rho0:
            raise ValueError("rho_max must exceed rho0")
        sigma = (rho_max / rho0) ** (1.0 / (num - 1))
    return rho0 * sigma ** np.arange(num)


def _mode_list(n: int, order: int) -> List[tuple]:
    """All mu in Z^n with |mu_1| + ... + |mu_n| <= order."""
    out = []
    for mu in itertools.product(range(-order, order + 1), repeat=n):
        if sum(abs(m) for m in mu) <= order:
            out.append(mu)
    return out


def extract_jet(f, n: int, order: int, *,
                radii: Optional[Sequence[float]] = None,
                rho0: float = 0.2, sigma: float = 1.25,
                rho_max: Optional[float] = None,
                grid: Optional[int] = None,
                tol: float = 1e-6,
                coeff_floor: float = 1e-10,
                cond_limit: float = 1e14,
                center: Optional[Sequence[complex]] = None) -> JetResult:
    """Extract the order-``order`` formal Taylor jet of f at the origin.

    f is an Expr or a callable taking a tuple of n complex arrays.  The
    radius schedule must contain at least ceil(order/2) + 1 entries and
    the angular grid at least 2*order + 1 points per dimension.  A
    nonzero ``center`` translates the expansion point.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    if grid is None:
        grid = 64 if n <= 2 else 32
    if grid < 2 * order + 1:
        raise ValueError(f"grid {grid} < 2*order+1 = {2 * order + 1}")
    m_needed = max((order + 1) // 2 + 1, 2)    # ceil(order/2) + 1
    if radii is None:
        radii = radius_schedule(m_needed, rho0, sigma, rho_max)
    radii = np.asarray(radii, dtype=float)
    if len(radii) < m_needed:
        raise ValueError(
            f"{len(radii)} radii given; order {order} needs >= {m_needed}")
    if np.any(radii <= 0) or len(set(radii.tolist())) != len(radii):
        raise ValueError("radii must be positive and distinct")

    func = as_callable(f, n)
    if center is not None:
        center = tuple(complex(c) for c in center)
        base = func
        func = lambda z: base(tuple(z[k] + center[k] for k in range(n)))

    # sample all product tori and keep the needed Fourier modes
    theta = 2.0 * np.pi * np.arange(grid) / grid
    angle_grids = np.meshgrid(*([theta] * n), indexing="ij")
    phases = [np.exp(1j * g) for g in angle_grids]
    modes = _mode_list(n, order)
    mode_pos = {mu: idx for idx, mu in enumerate(modes)}
    rows = list(itertools.product(range(len(radii)), repeat=n))
    mode_vals = np.empty((len(rows), len(modes)), dtype=complex)
    for ri, row in enumerate(rows):
        zs = tuple(radii[row[k]] * phases[k] for k in range(n))
        try:
            vals = np.asarray(func(zs), dtype=complex)
        except Exception as exc:
            raise JetExtractionError(
                f"evaluation failed on torus rho={tuple(radii[t] for t in row)}: {exc}"
            ) from exc
        vals = np.broadcast_to(vals, phases[0].shape)
        if not np.all(np.isfinite(vals)):
            raise JetExtractionError(
                f"non-finite samples on torus rho={tuple(radii[t] for t in row)}")
        F = np.fft.fftn(vals) / grid ** n
        for mu, idx in mode_pos.items():
            mode_vals[ri, idx] = F[tuple(mk % grid for mk in mu)]

    row_radii = np.array([[radii[t] for t in row] for row in rows])
    diag_rows = [ri for ri, row in enumerate(rows)
                 if all(t == row[0] for t in row)]

    coeffs = {}
    worst_cond = 1.0
    global_scale = float(np.abs(mode_vals).max()) if mode_vals.size else 0.0
    # quadrature values carry O(eps_mach * scale) noise; misfits below that
    # are indistinguishable from zero
    noise_floor = 1e-13 * max(1.0, global_scale)

    # pass 1: per-mode tensor-Vandermonde solves
    solved = []
    for mu, idx in mode_pos.items():
        mu_arr = np.array(mu)
        mu_plus = np.maximum(mu_arr, 0)
        mu_minus = np.maximum(-mu_arr, 0)
        base_order = int(mu_plus.sum() + mu_minus.sum())
        dmax = (order - base_order) // 2
        Ls = [L for L in itertools.product(range(dmax + 1), repeat=n)
              if sum(L) <= dmax]
        expo = mu_plus + mu_minus + 2 * np.array(Ls)      # (#L, n)
        A = np.prod(row_radii[:, None, :] ** expo[None, :, :], axis=2)
        b = mode_vals[:, idx]
        col_scale = np.linalg.norm(A, axis=0)
        col_scale[col_scale == 0] = 1.0
        Aeq = A / col_scale
        Um, sv, Vt = np.linalg.svd(Aeq, full_matrices=False)
        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
        worst_cond = max(worst_cond, cond)
        if cond > cond_limit:
            raise JetExtractionError(
                f"ill-conditioned radius schedule: mode {mu} condition "
                f"{cond:.3g} exceeds {cond_limit:.3g}")
        x_eq = Vt.T @ ((Um.conj().T @ b) / sv)
        x = x_eq / col_scale
        resid = A @ x - b
        bmax = float(np.abs(b).max())
        res_abs = float(np.abs(resid).max())
        if res_abs <= noise_floor:
            res_abs = 0.0

        # per-coefficient uncertainty: input noise (quadrature/aliasing) and
        # solve rounding filtered through the pseudoinverse rows; entries the
        # data cannot determine above that level are zeroed
        pinv_rows = np.sqrt(np.sum((Vt / sv[:, None]) ** 2, axis=0))
        data_unc = (10.0 * np.finfo(float).eps * np.linalg.norm(b)
                    + math.sqrt(len(b)) * noise_floor)
        noise = data_unc * pinv_rows / col_scale
        for L, c, nz in zip(Ls, x, noise):
            I = tuple(int(v) for v in (mu_plus + np.array(L)))
            J = tuple(int(v) for v in (mu_minus + np.array(L)))
            if abs(c) > max(coeff_floor, nz):
                coeffs[(I, J)] = complex(c)
        solved.append({"mode": mu, "base_order": base_order,
                       "res_abs": res_abs, "magnitude": bmax,
                       "resid": resid})

    # pass 2: normalize misfits by the largest mode magnitude at each total
    # order (absolute floor 1e-12 covers identically-zero orders) and charge
    # dirty modes to their failure order
    order_mag = np.zeros(order + 1)
    for entry in solved:
        d = entry["base_order"]
        order_mag[d] = max(order_mag[d], entry["magnitude"])
    order_noise = np.zeros(order + 1)
    fail_eps = np.zeros(order + 1)
    mode_table = []
    for entry in solved:
        d = entry["base_order"]
        eps = entry["res_abs"] / max(order_mag[d], 1e-12)
        row = {"mode": entry["mode"], "base_order": d, "misfit": eps,
               "magnitude": entry["magnitude"]}
        if eps <= tol:
            order_noise[d] = max(order_noise[d], eps)
        else:
            k_fail = _failure_order(entry["resid"], diag_rows, radii,
                                    entry["magnitude"], global_scale, d)
            row["failure_order"] = k_fail
            if k_fail <= order:
                fail_eps[k_fail] = max(fail_eps[k_fail], eps)
            else:
                row["truncation_only"] = True
        mode_table.append(row)

    residuals = []
    running = 0.0
    for k in range(order + 1):
        running = max(running, fail_eps[k])
        residuals.append(max(running, order_noise[k]))

    max_consistent = -1
    for k in range(order + 1):
        if residuals[k] <= tol:
            max_consistent = k
        else:
            break
    if max_consistent == order:
        verdict = FULL_JET
    elif max_consistent >= 1:
        verdict = JET_UP_TO
    else:
        verdict = NO_JET

    series = FormalSeries(n, order, coeffs)
    diagnostics = {
        "radii": radii.tolist(),
        "grid": grid,
        "coeff_floor": coeff_floor,
        "worst_condition": worst_cond,
        "modes": mode_table,
    }
    return JetResult(series=series, max_consistent_order=max_consistent,
                     per_order_residuals=residuals, verdict=verdict,
                     tol=tol, diagnostics=diagnostics)


def _failure_order(resid, diag_rows, radii, bmax, global_scale, base_order):
    """Charge a dirty mode to a jet order.

    The residual of the tensor-Vandermonde solve scales like rho^beta for
    the first inconsistent order beta.  The log-log slope is estimated as
    the median of consecutive-pair slopes over the diagonal radius rows,
    which ignores the sign-change dips the least-squares fit can leave at
    mid-range radii.  When the diagonal carries no usable signal (the
    misfit may cancel there by symmetry) fall back to the lowest order
    the mode contributes to.
    """
    ed = np.abs(resid[diag_rows])
    floor = 1e-11 * max(bmax, 1e-3 * max(global_scale, 1e-12))
    mask = ed > floor
    if mask.sum() < 2:
        return base_order
    logs_r = np.log(radii[mask])
    logs_e = np.log(ed[mask])
    slopes = np.diff(logs_e) / np.diff(logs_r)
    slope = float(np.median(slopes))
    if not np.isfinite(slope):
        return base_order
    return max(int(round(slope)), 0)


def jet_of_series(S: FormalSeries) -> JetResult:
    """Wrap an explicit series as an exact (residual-free) jet result."""
    residuals = [0.0] * (S.max_order + 1)
    return JetResult(series=S, max_consistent_order=S.max_order,
                     per_order_residuals=residuals, verdict=FULL_JET,
                     tol=0.0, diagnostics={"source": "explicit series"})
