# src/minent/channels.py
"""Quantum channels in Kraus form, their Choi states and dilations.

Includes the named qubit families used throughout (depolarizing, the two
dephasing kinds, replacer, unitary, POVM measurement channels) and the
diamond-norm distance via SDP.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import sdp
from .linalg import (TOL, DensityOperator, HermitianOperator, hermitian_basis,
                     partial_trace, partial_transpose, pauli)

__all__ = [
    "KrausMap",
    "QuantumChannel",
    "ChoiState",
    "IsometryExtension",
    "identity_channel",
    "depolarizing",
    "dephasing1",
    "dephasing2",
    "replacer",
    "unitary_channel",
    "povm_channel",
    "make_named_channel",
    "replacer_swap_dilation",
    "partial_trace_channel",
    "apply",
    "choi_state",
    "choi_matrix",
    "stinespring_isometry",
    "is_ppt",
    "compose",
    "tensor_channels",
    "diamond_distance",
    "channel_from_spec",
    "channel_spec_to_json",
]


@dataclass(frozen=True)
class KrausMap:
    """Completely positive map given by Kraus operators (out_dim x in_dim)."""

    kraus: tuple
    in_dim: int
    out_dim: int

    def __init__(self, kraus, in_dim=None, out_dim=None):
        ops = tuple(np.array(k, dtype=complex) for k in kraus)
        if not ops:
            raise ValueError("need at least one Kraus operator")
        dout, din = ops[0].shape
        if any(k.shape != (dout, din) for k in ops):
            raise ValueError("all Kraus operators must share one shape")
        if in_dim is not None and in_dim != din:
            raise ValueError("in_dim does not match Kraus shape")
        if out_dim is not None and out_dim != dout:
            raise ValueError("out_dim does not match Kraus shape")
        for k in ops:
            k.flags.writeable = False
        object.__setattr__(self, "kraus", ops)
        object.__setattr__(self, "in_dim", din)
        object.__setattr__(self, "out_dim", dout)

    def evaluate(self, mat: np.ndarray) -> np.ndarray:
        return sum(k @ mat @ k.conj().T for k in self.kraus)

    def completeness(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.kraus)


@dataclass(frozen=True)
class QuantumChannel(KrausMap):
    """Trace-preserving Kraus map: sum K†K = identity."""

    def __init__(self, kraus, in_dim=None, out_dim=None):
        KrausMap.__init__(self, kraus, in_dim, out_dim)
        gap = np.abs(self.completeness() - np.eye(self.in_dim)).max()
        if gap > 1e-10:
            raise ValueError(f"Kraus completeness violated by {gap:.3e}")


@dataclass(frozen=True)
class ChoiState:
    """Choi state on R (x) A, reference on the left."""

    state: DensityOperator

    def __post_init__(self):
        dims = self.state.dims
        if len(dims) != 2:
            raise ValueError("Choi state needs dims (in_dim, out_dim)")
        marg = partial_trace(self.state.op, keep=[0]).matrix
        if np.abs(marg - np.eye(dims[0]) / dims[0]).max() > 1e-10:
            raise ValueError("reduced Choi state on R is not maximally mixed")

    @property
    def in_dim(self) -> int:
        return self.state.dims[0]

    @property
    def out_dim(self) -> int:
        return self.state.dims[1]


@dataclass(frozen=True)
class IsometryExtension:
    """Isometry V: in -> out (x) env with tr_env V rho V† the channel action."""

    isometry: np.ndarray
    env_dim: int

    def __post_init__(self):
        v = np.asarray(self.isometry, dtype=complex)
        din = v.shape[1]
        if v.shape[0] % self.env_dim:
            raise ValueError("isometry rows must factor as out_dim * env_dim")
        if np.abs(v.conj().T @ v - np.eye(din)).max() > 1e-10:
            raise ValueError("V†V is not the identity")
        object.__setattr__(self, "isometry", v)

    @property
    def in_dim(self) -> int:
        return self.isometry.shape[1]

    @property
    def out_dim(self) -> int:
        return self.isometry.shape[0] // self.env_dim


# ---------------------------------------------------------------------------
# constructors


def identity_channel(d: int) -> QuantumChannel:
    return QuantumChannel([np.eye(d, dtype=complex)])


def depolarizing(p: float) -> QuantumChannel:
    """Qubit depolarizing: rho -> (1-p) rho + (p/3) sum_i s_i rho s_i."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    ops = [math.sqrt(1 - p) * np.eye(2, dtype=complex)]
    for name in "xyz":
        ops.append(math.sqrt(p / 3) * pauli(name))
    return QuantumChannel([k for k in ops if np.abs(k).max() > 0])


def dephasing1(p: float) -> QuantumChannel:
    """First-kind dephasing: rho -> (1-p) rho + p diag(rho)."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    ops = [math.sqrt(1 - p) * np.eye(2, dtype=complex),
           math.sqrt(p) * np.diag([1.0, 0.0]).astype(complex),
           math.sqrt(p) * np.diag([0.0, 1.0]).astype(complex)]
    return QuantumChannel([k for k in ops if np.abs(k).max() > 0])


def dephasing2(p: float) -> QuantumChannel:
    """Second-kind dephasing: rho -> (1-p) rho + p s_z rho s_z."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    ops = [math.sqrt(1 - p) * np.eye(2, dtype=complex), math.sqrt(p) * pauli("z")]
    return QuantumChannel([k for k in ops if np.abs(k).max() > 0])


def replacer(omega: DensityOperator, in_dim: int | None = None) -> QuantumChannel:
    """Channel that outputs the fixed state omega for every input."""
    din = in_dim or omega.dim
    w, v = np.linalg.eigh(omega.matrix)
    ops = []
    for lam, vec in zip(w, v.T):
        if lam < TOL.support:
            continue
        for i in range(din):
            k = np.zeros((omega.dim, din), dtype=complex)
            k[:, i] = math.sqrt(max(lam, 0.0)) * vec
            ops.append(k)
    return QuantumChannel(ops)


def unitary_channel(u: np.ndarray) -> QuantumChannel:
    u = np.asarray(u, dtype=complex)
    if np.abs(u.conj().T @ u - np.eye(u.shape[1])).max() > 1e-10:
        raise ValueError("matrix is not unitary/isometric")
    return QuantumChannel([u])


def povm_channel(elements) -> QuantumChannel:
    """Measurement channel rho -> sum_x |x><x| tr(L_x rho) for a POVM {L_x}."""
    els = [np.asarray(e, dtype=complex) for e in elements]
    d = els[0].shape[0]
    total = sum(els)
    if np.abs(total - np.eye(d)).max() > 1e-10:
        raise ValueError("POVM elements must sum to the identity")
    nx = len(els)
    ops = []
    for x, el in enumerate(els):
        if np.linalg.eigvalsh((el + el.conj().T) / 2).min() < -TOL.psd:
            raise ValueError("POVM elements must be PSD")
        w, v = np.linalg.eigh((el + el.conj().T) / 2)
        root = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
        for row in root:
            if np.abs(row).max() < 1e-14:
                continue
            k = np.zeros((nx, d), dtype=complex)
            k[x, :] = row
            ops.append(k)
    return QuantumChannel(ops)


def make_named_channel(family: str, p: float | None = None,
                       omega: DensityOperator | None = None,
                       unitary: np.ndarray | None = None,
                       povm=None, dims: int | None = None) -> QuantumChannel:
    """Build one of the named channel families from its parameters."""
    family = family.lower()
    if family == "depolarizing":
        return depolarizing(_need(p, "p"))
    if family == "dephasing1":
        return dephasing1(_need(p, "p"))
    if family == "dephasing2":
        return dephasing2(_need(p, "p"))
    if family == "replacer":
        if omega is None:
            d = dims or 2
            omega = DensityOperator(np.eye(d) / d)
        return replacer(omega, in_dim=dims or omega.dim)
    if family == "unitary":
        if unitary is None:
            unitary = np.eye(dims or 2)
        return unitary_channel(unitary)
    if family == "povm":
        if povm is None:
            d = dims or 2
            povm = [np.diag([1.0 if i == k else 0.0 for i in range(d)])
                    for k in range(d)]
        return povm_channel(povm)
    raise ValueError(f"unknown channel family {family!r}")


def _need(value, name):
    if value is None:
        raise ValueError(f"missing parameter {name!r}")
    return value


def replacer_swap_dilation(omega: DensityOperator):
    """Replacer via the SWAP gate with environment prepared in omega.

    Returns (channel, swap_matrix). The channel equals replacer(omega);
    the SWAP dilation realizes the problem setup where ancilla in and
    out legs carry the displaced input.
    """
    d = omega.dim
    swap = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            swap[j * d + i, i * d + j] = 1.0
    w, v = np.linalg.eigh(omega.matrix)
    ops = []
    swap4 = swap.reshape(d, d, d, d)
    for lam, vec in zip(w, v.T):
        if lam < TOL.support:
            continue
        amp = math.sqrt(max(lam, 0.0))
        for e in range(d):
            # K = (1_A (x) <e|_E) SWAP (1_A' (x) amp|v>_E')
            ops.append(np.einsum("aij,j->ai", swap4[:, e, :, :], amp * vec))
    return QuantumChannel(ops), swap


def partial_trace_channel(dims, keep) -> QuantumChannel:
    """Partial trace over the subsystems of `dims` not listed in `keep`."""
    dims = tuple(int(d) for d in dims)
    keep = sorted(set(int(k) for k in keep))
    din = math.prod(dims)
    dkeep = math.prod(dims[k] for k in keep)
    traced = [k for k in range(len(dims)) if k not in keep]
    ops = []
    for idx in np.ndindex(*(dims[k] for k in traced)):
        k = np.zeros((dkeep, din), dtype=complex)
        for kidx in np.ndindex(*(dims[j] for j in keep)):
            full = [0] * len(dims)
            for pos, j in enumerate(keep):
                full[j] = kidx[pos]
            for pos, j in enumerate(traced):
                full[j] = idx[pos]
            row = int(np.ravel_multi_index(kidx, [dims[j] for j in keep])) \
                if keep else 0
            col = int(np.ravel_multi_index(full, dims))
            k[row, col] = 1.0
        ops.append(k)
    return QuantumChannel(ops)


# ---------------------------------------------------------------------------
# actions and representations


def apply(n: KrausMap, rho: DensityOperator,
          acting_subsystem: int | None = None) -> DensityOperator:
    """Apply a channel to a state, or to one subsystem of a larger state."""
    if acting_subsystem is None:
        if rho.dim != n.in_dim:
            raise ValueError("state dimension does not match channel input")
        out = n.evaluate(rho.matrix)
        return DensityOperator(out, (n.out_dim,),
                               subnormalized=not isinstance(n, QuantumChannel))
    dims = rho.dims
    if dims[acting_subsystem] != n.in_dim:
        raise ValueError("subsystem dimension does not match channel input")
    big_kraus = []
    for k in n.kraus:
        factors = [np.eye(d, dtype=complex) for d in dims]
        factors[acting_subsystem] = k
        full = factors[0]
        for f in factors[1:]:
            full = np.kron(full, f)
        big_kraus.append(full)
    out = sum(k @ rho.matrix @ k.conj().T for k in big_kraus)
    new_dims = list(dims)
    new_dims[acting_subsystem] = n.out_dim
    return DensityOperator(out, tuple(new_dims),
                           subnormalized=not isinstance(n, QuantumChannel))


def choi_matrix(n: KrausMap, normalized: bool = True) -> HermitianOperator:
    """Choi operator on R (x) A; divide by in_dim when normalized."""
    d = n.in_dim
    kr = np.stack(n.kraus)  # (nk, out, in)
    # Gamma = sum_ij |i><j| (x) N(|i><j|) = sum_k vec(K) vec(K)† arranged
    gamma = np.einsum("kai,kbj->iajb", kr, kr.conj()).reshape(
        d * n.out_dim, d * n.out_dim)
    if normalized:
        gamma = gamma / d
    return HermitianOperator(gamma, (d, n.out_dim))


def choi_state(n: QuantumChannel) -> ChoiState:
    return ChoiState(DensityOperator(choi_matrix(n).matrix, (n.in_dim, n.out_dim)))


def stinespring_isometry(n: QuantumChannel) -> IsometryExtension:
    """V = sum_i K_i (x) |i>_E, environment dimension = Kraus count."""
    nk = len(n.kraus)
    v = np.zeros((n.out_dim * nk, n.in_dim), dtype=complex)
    for i, k in enumerate(n.kraus):
        for a in range(n.out_dim):
            v[a * nk + i, :] = k[a, :]
    return IsometryExtension(v, nk)


def stinespring_output(n: QuantumChannel, rho: DensityOperator) -> DensityOperator:
    """State on A (x) E produced by the isometric extension."""
    v = stinespring_isometry(n)
    out = v.isometry @ rho.matrix @ v.isometry.conj().T
    return DensityOperator(out, (v.out_dim, v.env_dim))


def is_ppt(n: QuantumChannel) -> bool:
    """PPT test on the Choi state (partial transpose of the output leg)."""
    pt = partial_transpose(choi_matrix(n), 1)
    return bool(np.linalg.eigvalsh(pt.matrix).min() >= -TOL.psd)


def compose(n2: KrausMap, n1: KrausMap) -> QuantumChannel | KrausMap:
    """Serial composition n2 after n1."""
    if n1.out_dim != n2.in_dim:
        raise ValueError("composition dimension mismatch")
    ops = [k2 @ k1 for k2 in n2.kraus for k1 in n1.kraus]
    cls = QuantumChannel if isinstance(n1, QuantumChannel) \
        and isinstance(n2, QuantumChannel) else KrausMap
    return cls(ops)


def tensor_channels(n: KrausMap, m: KrausMap) -> QuantumChannel | KrausMap:
    ops = [np.kron(a, b) for a in n.kraus for b in m.kraus]
    cls = QuantumChannel if isinstance(n, QuantumChannel) \
        and isinstance(m, QuantumChannel) else KrausMap
    return cls(ops)


# ---------------------------------------------------------------------------
# diamond norm


def _diamond_problem_data(din: int, dout: int):
    """Constraint data for max <J, W> s.t. 0 <= W <= rho (x) 1, tr rho = 1.

    Blocks: W (din*dout), Y = rho (x) 1 - W (din*dout), rho (din).
    """
    dd = din * dout
    n = 2 * dd + din
    basis = hermitian_basis(dd)
    m = dd * dd + 1
    a = np.zeros((m, n, n), dtype=complex)
    b = np.zeros(m)
    for k, ek in enumerate(basis):
        a[k, :dd, :dd] = ek
        a[k, dd:2 * dd, dd:2 * dd] = ek
        # <rho (x) 1, Ek> = <rho, tr_out Ek>
        a[k, 2 * dd:, 2 * dd:] = -np.einsum(
            "ikjk->ij", ek.reshape(din, dout, din, dout))
    a[m - 1, 2 * dd:, 2 * dd:] = np.eye(din)
    b[m - 1] = 1.0
    return a, b, (dd, dd, din)


def _diamond_objective(j: np.ndarray, din: int, dout: int) -> np.ndarray:
    dd = din * dout
    n = 2 * dd + din
    c = np.zeros((n, n), dtype=complex)
    c[:dd, :dd] = j
    return c


def diamond_distance(n: KrausMap, m: KrausMap) -> float:
    """Half diamond-norm distance (1/2)||N - M||_diamond via SDP."""
    if (n.in_dim, n.out_dim) != (m.in_dim, m.out_dim):
        raise ValueError("channels must share input and output dimensions")
    j = (choi_matrix(n, normalized=False).matrix
         - choi_matrix(m, normalized=False).matrix)
    val = diamond_values_from_choi([j], n.in_dim, n.out_dim)[0]
    return float(val)


def diamond_values_from_choi(choi_diffs, din: int, dout: int,
                             require_optimal: bool = True) -> np.ndarray:
    """Batched (1/2)||.||_diamond of Hermitian maps given unnormalized Chois."""
    a, b, blocks = _diamond_problem_data(din, dout)
    cs = np.stack([_diamond_objective(j, din, dout) for j in choi_diffs])
    res = sdp.solve_stack(cs, a, b, sense="max", blocks=blocks)
    if require_optimal:
        bad = [s for s in res["status_str"] if s != "optimal"]
        if bad:
            raise sdp.SdpFailure(f"{len(bad)} diamond-norm SDPs failed")
    return np.maximum(res["primal_value"], 0.0)


# ---------------------------------------------------------------------------
# JSON channel specs (shared wire format with the CLI)


def channel_spec_to_json(spec: dict) -> str:
    return json.dumps(spec, sort_keys=True)


def _matrix_from_pairs(rows):
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def _matrix_to_pairs(mat):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(mat)]


def channel_from_spec(spec) -> QuantumChannel:
    """Build a channel from the JSON wire format.

    Fields: {family, p?, omega?, unitary?, povm?, dims?}; matrices are
    row-major [re, im] pair arrays; omega may also be the string
    "maximally-mixed".
    """
    if isinstance(spec, str):
        spec = json.loads(spec)
    if "family" not in spec:
        raise ValueError("channel spec needs a 'family' field")
    kw = {}
    if "p" in spec and spec["p"] is not None:
        kw["p"] = float(spec["p"])
    if "dims" in spec and spec["dims"] is not None:
        kw["dims"] = int(spec["dims"])
    if spec.get("omega") is not None:
        om = spec["omega"]
        if om == "maximally-mixed":
            d = kw.get("dims", 2)
            kw["omega"] = DensityOperator(np.eye(d) / d)
        else:
            kw["omega"] = DensityOperator(_matrix_from_pairs(om))
    if spec.get("unitary") is not None:
        kw["unitary"] = _matrix_from_pairs(spec["unitary"])
    if spec.get("povm") is not None:
        kw["povm"] = [_matrix_from_pairs(el) for el in spec["povm"]]
    return make_named_channel(spec["family"], **kw)
