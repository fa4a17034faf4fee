# src/minent/entropies.py
"""One-shot entropic quantities of states, in bits (log base 2).

Relative entropy families (max, Petz-Renyi, sandwiched Renyi, hypothesis
testing), the conditional min-entropies they induce, and certified
one-sided bounds for their smoothed versions. Anything defined through
an optimization is computed by the interior-point solver in `sdp`;
closed forms are used where the optimization collapses (and serve as
independent cross-checks of the solver).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import sdp
from .linalg import (TOL, DensityOperator, HermitianOperator,
                     hermitian_basis, herm_eig, partial_trace, psd_inv_sqrt,
                     psd_sqrt, purified_distance, support_projector)

__all__ = [
    "RenyiOrder",
    "SmoothingBall",
    "d_max",
    "d_max_sdp",
    "petz_renyi",
    "sandwiched_renyi",
    "d_hypothesis",
    "cond_min_entropy_up",
    "cond_min_entropy_up_many",
    "cond_min_entropy_down",
    "cond_min_entropy_down_sdp",
    "cond_hypothesis_entropy",
    "smooth_min_entropy_lower_bound",
    "max_fidelity_uniform",
]

# re-exported for callers building their own conditional-entropy stacks

LOG2E = 1.0 / math.log(2.0)

# mixing weights tried by the smoothing line search; a fixed grid keeps
# the certified bound monotone in the smoothing parameter
SMOOTH_GRID = (1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 0.01, 0.02, 0.04, 0.08,
               0.12, 0.2, 0.3, 0.45, 0.6, 0.8, 0.95)


@dataclass(frozen=True)
class RenyiOrder:
    """Renyi order with the limits 1 and infinity as distinguished points."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha >= 0):
            raise ValueError("alpha must be nonnegative")

    @classmethod
    def of(cls, alpha) -> "RenyiOrder":
        return alpha if isinstance(alpha, cls) else cls(float(alpha))


@dataclass(frozen=True)
class SmoothingBall:
    """Purified-distance ball of subnormalized states around a center."""

    epsilon: float
    center: DensityOperator

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")

    def contains(self, candidate: DensityOperator) -> bool:
        if candidate.trace() > 1 + TOL.trace:
            return False
        return purified_distance(self.center, candidate) <= self.epsilon + 1e-12


def _support_violation(rho_m: np.ndarray, sigma_m: np.ndarray) -> bool:
    proj = support_projector(sigma_m)
    comp = np.eye(sigma_m.shape[0]) - proj
    return float(np.trace(comp @ rho_m @ comp).real) > 1e-10


# ---------------------------------------------------------------------------
# relative entropies


def d_max(rho: DensityOperator, sigma: HermitianOperator) -> float:
    """Max-relative entropy logformed from the smallest lambda with
    lambda*sigma >= rho; +inf when rho leaves the support of sigma."""
    sig = sigma.matrix if isinstance(sigma, (HermitianOperator, DensityOperator)) \
        else np.asarray(sigma, dtype=complex)
    if rho.dim != sig.shape[0]:
        raise ValueError("dimension mismatch")
    if _support_violation(rho.matrix, sig):
        return math.inf
    isq = psd_inv_sqrt(sig)
    lam = float(np.linalg.eigvalsh(isq @ rho.matrix @ isq).max())
    return math.log2(max(lam, 1e-300))


def d_max_sdp(rho: DensityOperator, sigma: HermitianOperator) -> float:
    """Max-relative entropy by SDP: min lambda s.t. lambda*sigma >= rho.

    Independent code path from d_max, used for dual-path agreement
    audits. Returns +inf on infeasibility.
    """
    sig = sigma.matrix
    d = rho.dim
    n = 1 + d
    basis = hermitian_basis(d)
    m = d * d
    a = np.zeros((m, n, n), dtype=complex)
    b = np.zeros(m)
    for k, ek in enumerate(basis):
        a[k, 0, 0] = -np.trace(ek @ sig)
        a[k, 1:, 1:] = ek
        b[k] = -np.real(np.trace(ek @ rho.matrix))
    c = np.zeros((n, n), dtype=complex)
    c[0, 0] = 1.0
    prob = sdp.SdpProblem(c, tuple(zip(a, b)), "min", (1, d))
    sol = sdp.solve(prob, keep_trace=False)
    if sol.status == "infeasible":
        return math.inf
    if sol.status != "optimal":
        raise sdp.SdpFailure(f"d_max SDP ended with status {sol.status}")
    return math.log2(max(sol.primal_value, 1e-300))


def _matrix_power_psd(m: np.ndarray, power: float) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    if power < 0:
        vals = np.where(w > TOL.support, w, 1.0) ** power * (w > TOL.support)
    else:
        vals = w ** power
    return (v * vals) @ v.conj().T


def petz_renyi(alpha, rho: DensityOperator, sigma: HermitianOperator) -> float:
    """Petz-Renyi relative entropy (1/(alpha-1)) log tr(rho^a sigma^(1-a))."""
    a = RenyiOrder.of(alpha).alpha
    if not 0 <= a <= 2:
        raise ValueError("Petz order restricted to [0, 2] for monotone use")
    rm, sm = rho.matrix, sigma.matrix
    if a == 0:
        val = float(np.trace(support_projector(rm) @ sm).real)
        return -math.log2(max(val, 1e-300))
    if a == 1:
        return _umegaki(rm, sm)
    if a > 1 and _support_violation(rm, sm):
        return math.inf
    t = float(np.trace(_matrix_power_psd(rm, a) @ _matrix_power_psd(sm, 1 - a)).real)
    if t <= 0:
        return math.inf
    return math.log2(t) / (a - 1)


def sandwiched_renyi(alpha, rho: DensityOperator, sigma: HermitianOperator) -> float:
    """Sandwiched Renyi relative entropy; alpha=inf gives d_max and
    alpha=1/2 gives -log F."""
    a = RenyiOrder.of(alpha).alpha
    if math.isinf(a):
        return d_max(rho, sigma)
    if not a >= 0.5:
        raise ValueError("sandwiched order restricted to [1/2, inf]")
    rm, sm = rho.matrix, sigma.matrix
    if a == 1:
        return _umegaki(rm, sm)
    if a > 1 and _support_violation(rm, sm):
        return math.inf
    half = _matrix_power_psd(sm, (1 - a) / (2 * a))
    w = np.clip(np.linalg.eigvalsh(half @ rm @ half), 0.0, None)
    t = float((w ** a).sum())
    if t <= 0:
        return math.inf
    return math.log2(t) / (a - 1)


def _umegaki(rm: np.ndarray, sm: np.ndarray) -> float:
    if _support_violation(rm, sm):
        return math.inf
    wr, vr = np.linalg.eigh((rm + rm.conj().T) / 2)
    ws, vs = np.linalg.eigh((sm + sm.conj().T) / 2)
    wr = np.clip(wr, 0.0, None)
    ws = np.clip(ws, 0.0, None)
    log_r = (vr * np.log2(np.where(wr > TOL.support, wr, 1.0))) @ vr.conj().T
    log_s = (vs * np.log2(np.where(ws > TOL.support, ws, 1.0))) @ vs.conj().T
    return float(np.trace(rm @ (log_r - log_s)).real)


def d_hypothesis(eps: float, rho: DensityOperator, sigma: HermitianOperator) -> float:
    """Hypothesis-testing relative entropy at type-I error eps.

    SDP over tests 0 <= L <= 1 with tr(rho L) >= 1 - eps; at eps = 0 the
    projector closed form -log tr(Pi_rho sigma) applies.
    """
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    if eps == 0:
        return petz_renyi(0, rho, sigma)
    d = rho.dim
    basis = hermitian_basis(d)
    n = 2 * d + 1
    m = d * d + 1
    a = np.zeros((m, n, n), dtype=complex)
    b = np.zeros(m)
    for k, ek in enumerate(basis):
        a[k, :d, :d] = ek
        a[k, d:2 * d, d:2 * d] = ek
        b[k] = np.real(np.trace(ek))
    a[m - 1, :d, :d] = rho.matrix
    a[m - 1, 2 * d:, 2 * d:] = -1.0
    b[m - 1] = 1.0 - eps
    c = np.zeros((n, n), dtype=complex)
    c[:d, :d] = sigma.matrix
    prob = sdp.SdpProblem(c, tuple(zip(a, b)), "min", (d, d, 1))
    sol = sdp.solve(prob, keep_trace=False)
    if sol.status != "optimal":
        raise sdp.SdpFailure(f"hypothesis-testing SDP status {sol.status}")
    val = max(sol.primal_value, 0.0)
    if val < 1e-300:
        return math.inf
    return -math.log2(val)


# ---------------------------------------------------------------------------
# conditional entropies (A conditioned on B, state ordered A (x) B)


def _split_dims(rho: DensityOperator):
    if len(rho.dims) != 2:
        raise ValueError("conditional entropies need bipartite dims (dA, dB)")
    return rho.dims


def _cond_min_up_data(da: int, db: int):
    """SDP data for min tr(sigma_B) s.t. 1_A (x) sigma_B >= rho_AB.

    Blocks (sigma_B, Y) with Y = 1 (x) sigma - rho; rho enters only the
    right-hand side, so stacks of states share all constraint matrices.
    """
    dab = da * db
    basis = hermitian_basis(dab)
    n = db + dab
    m = dab * dab
    a = np.zeros((m, n, n), dtype=complex)
    for k, ek in enumerate(basis):
        a[k, :db, :db] = -np.einsum("ikil->kl", ek.reshape(da, db, da, db))
        a[k, db:, db:] = ek
    c = np.zeros((n, n), dtype=complex)
    c[:db, :db] = np.eye(db)
    return a, c, basis, (db, dab)


def cond_min_entropy_up_many(mats: np.ndarray, da: int, db: int):
    """S_min(A|B) for a stack of states (B, dab, dab).

    Returns (values, ok) where ok flags instances whose SDP certified
    optimality; values are -log2 of the optimal trace.
    """
    a, c, basis, blocks = _cond_min_up_data(da, db)
    b = -np.einsum("kij,bji->bk", basis, mats).real
    res = sdp.solve_stack(c, a, b, "min", blocks)
    ok = np.array([s == "optimal" for s in res["status_str"]])
    vals = -np.log2(np.clip(res["primal_value"], 1e-300, None))
    return vals, ok


def cond_min_entropy_up(rho: DensityOperator) -> float:
    """Conditional min-entropy S_min(A|B) = -log2 min tr(sigma) with
    1 (x) sigma >= rho, the SDP form of -inf_sigma D_max."""
    da, db = _split_dims(rho)
    vals, ok = cond_min_entropy_up_many(rho.matrix[None], da, db)
    if not ok[0]:
        raise sdp.SdpFailure("conditional min-entropy SDP did not certify")
    return float(vals[0])


def cond_min_entropy_down(rho: DensityOperator) -> float:
    """Down-variant -D_max(rho_AB || 1_A (x) rho_B), closed form."""
    da, db = _split_dims(rho)
    rho_b = partial_trace(rho.op, [1])
    sig = HermitianOperator(np.kron(np.eye(da), rho_b.matrix), rho.dims)
    return -d_max(rho, sig)


def cond_min_entropy_down_sdp(rho: DensityOperator) -> float:
    """Down-variant via the D_max SDP; independent of the eigen route."""
    da, db = _split_dims(rho)
    rho_b = partial_trace(rho.op, [1])
    sig = HermitianOperator(np.kron(np.eye(da), rho_b.matrix), rho.dims)
    return -d_max_sdp(rho, sig)


def cond_hypothesis_entropy(eps: float, rho: DensityOperator) -> float:
    """Hypothesis-testing conditional entropy S_H(A|B) at error eps.

    eps = 0 collapses to log2 lambda_max(tr_A Pi_rho). For eps > 0 the
    inner test minimization is dualized, leaving one joint maximization
    over (sigma, mu, Z):  max mu(1-eps) - tr Z  with  mu rho <= 1 (x)
    sigma + Z; the entropy is log2 of the optimum.
    """
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    da, db = _split_dims(rho)
    if eps == 0:
        proj = support_projector(rho.matrix)
        red = np.einsum("ikil->kl", proj.reshape(da, db, da, db))
        return math.log2(float(np.linalg.eigvalsh(red).max()))
    dab = da * db
    basis = hermitian_basis(dab)
    # blocks: sigma (db), mu (1), Z (dab), Y = 1 (x) sigma + Z - mu rho (dab)
    n = db + 1 + 2 * dab
    m = dab * dab + 1
    a = np.zeros((m, n, n), dtype=complex)
    b = np.zeros(m)
    z0 = db + 1
    y0 = db + 1 + dab
    for k, ek in enumerate(basis):
        a[k, :db, :db] = -np.einsum("ikil->kl", ek.reshape(da, db, da, db))
        a[k, db, db] = np.real(np.trace(ek @ rho.matrix))
        a[k, z0:y0, z0:y0] = -ek
        a[k, y0:, y0:] = ek
    a[m - 1, :db, :db] = np.eye(db)
    b[m - 1] = 1.0
    c = np.zeros((n, n), dtype=complex)
    c[db, db] = 1.0 - eps
    c[z0:y0, z0:y0] = -np.eye(dab)
    prob = sdp.SdpProblem(c, tuple(zip(a, b)), "max", (db, 1, dab, dab))
    sol = sdp.solve(prob, keep_trace=False)
    if sol.status != "optimal":
        raise sdp.SdpFailure(f"conditional hypothesis SDP status {sol.status}")
    return math.log2(max(sol.primal_value, 1e-300))


# ---------------------------------------------------------------------------
# smoothing (certified one-sided bounds)


def _smooth_candidates(rho: DensityOperator, eps: float):
    """Subnormalized candidates inside the eps-ball, including rho itself."""
    da, db = _split_dims(rho)
    ball = SmoothingBall(eps, rho)
    yield rho
    if eps <= 0:
        return
    rho_b = partial_trace(rho.op, [1]).matrix
    uniform = np.kron(np.eye(da) / da, rho_b)
    w, v = herm_eig(rho.op)
    top = np.outer(v[:, 0], v[:, 0].conj())
    directions = [
        None,                                  # pure trace scaling
        uniform,                               # mix towards pi_A (x) rho_B
        rho.matrix - w[0] * top,               # trim the top eigenvector
    ]
    for t in SMOOTH_GRID:
        for dirn in directions:
            cand = (1 - t) * rho.matrix if dirn is None \
                else (1 - t) * rho.matrix + t * dirn
            try:
                state = DensityOperator(cand, rho.dims, subnormalized=True)
            except ValueError:
                continue
            if ball.contains(state):
                yield state


def smooth_min_entropy_lower_bound(eps: float, rho: DensityOperator,
                                   variant: str = "up") -> float:
    """Certified lower bound on the eps-smoothed conditional min-entropy.

    Every candidate evaluated lies inside the smoothing ball (checked
    with the generalized fidelity), so the maximum over the candidate
    set never exceeds the true smoothed value. The down variant smooths
    the conditioning marginal along with the state.
    """
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    if variant not in ("up", "down"):
        raise ValueError("variant must be 'up' or 'down'")
    da, db = _split_dims(rho)
    best = -math.inf
    for k, cand in enumerate(_smooth_candidates(rho, eps)):
        if variant == "up":
            try:
                val = cond_min_entropy_up(cand)
            except sdp.SdpFailure:
                if k == 0:  # the center itself must certify
                    raise
                continue
        else:
            marg = partial_trace(cand.op, [1])
            sig = HermitianOperator(np.kron(np.eye(da), marg.matrix), cand.dims)
            val = -d_max(cand, sig)
        best = max(best, val)
    return best


# ---------------------------------------------------------------------------
# fidelity maximization against uniform-conditioned products


def _fidelity_to_uniform(sqrt_rho: np.ndarray, sigma: np.ndarray,
                         da: int) -> float:
    half = np.kron(np.eye(da), psd_sqrt(sigma))
    sv = np.linalg.svd(sqrt_rho @ half, compute_uv=False)
    return float(sv.sum()) ** 2


def _theta_to_state(theta: np.ndarray, db: int) -> np.ndarray:
    low = np.zeros((db, db), dtype=complex)
    k = db
    low[np.diag_indices(db)] = theta[:db]
    for i in range(db):
        for j in range(i):
            low[i, j] = theta[k] + 1j * theta[k + 1]
            k += 2
    g = low @ low.conj().T
    tr = float(np.trace(g).real)
    if tr < 1e-14:
        return np.eye(db) / db
    return g / tr


def _state_to_theta(sigma: np.ndarray, db: int) -> np.ndarray:
    w, v = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    w = np.clip(w, 1e-12, None)
    low = np.linalg.cholesky((v * w) @ v.conj().T)
    theta = np.zeros(db * db)
    theta[:db] = low[np.diag_indices(db)].real
    k = db
    for i in range(db):
        for j in range(i):
            theta[k] = low[i, j].real
            theta[k + 1] = low[i, j].imag
            k += 2
    return theta


def max_fidelity_uniform(rho: DensityOperator) -> float:
    """sup over states sigma_B of F(rho_AB, 1_A (x) sigma_B).

    Equals 2^(S_1/2-up(A|B)); the workhorse behind the duality checks
    and the environment-decoupling dual. Pure states admit the closed
    form lambda_max(tr_A rho); mixed states are handled by simplex
    ascent over sigma from several deterministic starts (the objective
    is concave in sigma, so local maxima are global).
    """
    from scipy.optimize import minimize

    da, db = _split_dims(rho)
    w = np.linalg.eigvalsh(rho.matrix)
    if w[-1] > rho.trace() - 1e-12:  # pure: F(psi, 1 (x) s) = <psi|1 (x) s|psi>
        red = np.einsum("ikil->kl", rho.matrix.reshape(da, db, da, db))
        return float(np.linalg.eigvalsh(red).max())
    sqrt_rho = psd_sqrt(rho.matrix)
    rho_b = partial_trace(rho.op, [1]).matrix
    rho_b = rho_b / max(np.trace(rho_b).real, 1e-300)
    starts = [np.eye(db) / db, rho_b, 0.5 * rho_b + 0.5 * np.eye(db) / db]
    best = 0.0
    for sig0 in starts:
        theta0 = _state_to_theta(sig0, db)
        res = minimize(
            lambda th: -_fidelity_to_uniform(sqrt_rho, _theta_to_state(th, db), da),
            theta0, method="Nelder-Mead",
            options={"maxiter": 6000, "fatol": 1e-13, "xatol": 1e-9})
        best = max(best, -float(res.fun))
    return best
