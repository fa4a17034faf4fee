# src/minent/thermo.py
"""Thermodynamic and resource-theoretic erasure/preparation costs.

Costs are tracked in bits of work (multiples of k_B T ln 2) and convert
to joules only at the edge. Channel-level costs are suprema over inputs;
the maximally entangled reference input and the maximally mixed input
are always included because they attain the zero-error optima exactly
(the Choi state realizes the infimum defining the channel min-entropy).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _sampling, dynamical, entropies
from .channels import QuantumChannel, stinespring_isometry
from .sdp import SdpFailure
from .linalg import DensityOperator, support_projector

__all__ = [
    "K_B",
    "WorkCost",
    "CostReport",
    "SumBoundReport",
    "AdversarialBound",
    "resource_prep_cost_state",
    "resource_eras_cost_state",
    "sum_bound_check",
    "channel_costs",
    "adversarial_erasure_bound",
    "work_extraction_ledger",
]

K_B = 1.380649e-23  # J/K
LN2 = math.log(2.0)


@dataclass(frozen=True)
class WorkCost:
    """Work in bits at a bath temperature; negative means extractable."""

    bits: float
    temperature_kelvin: float
    certification: str = "exact"

    def __post_init__(self):
        if self.temperature_kelvin <= 0:
            raise ValueError("temperature must be positive")

    @property
    def joules(self) -> float:
        return self.bits * K_B * self.temperature_kelvin * LN2

    def extractable(self) -> bool:
        return self.bits < 0


@dataclass(frozen=True)
class CostReport:
    prep_cost: WorkCost
    eras_cost: WorkCost
    mu: float
    s_min_channel: float
    attained_inputs: dict = field(default_factory=dict)
    certification: str = "exact"

    def __post_init__(self):
        if self.mu == 0:
            gap = max(abs(self.prep_cost.bits + self.s_min_channel),
                      abs(self.eras_cost.bits + self.s_min_channel))
            if gap > 1e-6:
                raise ValueError(
                    f"zero-error costs must equal -S_min (gap {gap:.3e})")

    def to_json(self) -> dict:
        return {
            "mu": self.mu,
            "temperature_kelvin": self.prep_cost.temperature_kelvin,
            "prep_bits": self.prep_cost.bits,
            "eras_bits": self.eras_cost.bits,
            "prep_joules": self.prep_cost.joules,
            "eras_joules": self.eras_cost.joules,
            "s_min_channel": self.s_min_channel,
            "certification": self.certification,
        }


@dataclass(frozen=True)
class SumBoundReport:
    sum_bits: float
    lower_bound_bits: float
    passed: bool
    vacuous: bool = False


@dataclass(frozen=True)
class AdversarialBound:
    bound: WorkCost
    probability: float
    valid: bool


# ---------------------------------------------------------------------------
# state-level costs


def resource_prep_cost_state(rho: DensityOperator, mu: float,
                             t_kelvin: float) -> WorkCost:
    """Preparation cost -S_min-down(A|B) in bits; exact at mu = 0 and a
    certified upper bound (from one-sided smoothing) for mu > 0."""
    if not 0 <= mu < 1:
        raise ValueError("mu must lie in [0, 1)")
    if mu == 0:
        return WorkCost(-entropies.cond_min_entropy_down(rho), t_kelvin)
    bound = entropies.smooth_min_entropy_lower_bound(mu, rho, "down")
    return WorkCost(-bound, t_kelvin, certification="certified-upper")


def resource_eras_cost_state(rho: DensityOperator, mu: float,
                             t_kelvin: float) -> WorkCost:
    """Erasure cost S_H(A|B) in bits (closed form at mu = 0, SDP else)."""
    if not 0 <= mu < 1:
        raise ValueError("mu must lie in [0, 1)")
    return WorkCost(entropies.cond_hypothesis_entropy(mu, rho), t_kelvin)


def sum_bound_check(rho: DensityOperator, mu: float) -> SumBoundReport:
    """Lower bound on preparation + erasure cost of one state.

    Zero at mu = 0; for mu > 0 the bound log2(1 - mu/(1-mu^2)) - 2 is
    vacuous once the argument turns nonpositive (mu at or above the
    golden-ratio conjugate).
    """
    if not 0 <= mu < 1:
        raise ValueError("mu must lie in [0, 1)")
    total = resource_prep_cost_state(rho, mu, 300.0).bits \
        + resource_eras_cost_state(rho, mu, 300.0).bits
    if mu == 0:
        return SumBoundReport(total, 0.0, bool(total >= -1e-9))
    arg = 1.0 - mu / (1.0 - mu * mu)
    if arg <= 0:
        return SumBoundReport(total, -math.inf, True, vacuous=True)
    lb = math.log2(arg) - 2.0
    return SumBoundReport(total, lb, bool(total >= lb - 1e-9))


# ---------------------------------------------------------------------------
# channel-level costs


def _down_entropy_batch(mats: np.ndarray, da: int, dr: int) -> np.ndarray:
    """S_min-down(A|R) for stacked states ordered (R, A)."""
    out = np.zeros(mats.shape[0])
    for i in range(mats.shape[0]):
        m4 = mats[i].reshape(dr, da, dr, da)
        marg = np.einsum("rasa->rs", m4)
        w, v = np.linalg.eigh(marg)
        inv_sqrt = (v * np.where(w > 1e-9,
                                 1.0 / np.sqrt(np.where(w > 1e-9, w, 1.0)),
                                 0.0)) @ v.conj().T
        big = np.kron(inv_sqrt, np.eye(da))
        lam = np.linalg.eigvalsh(big @ mats[i] @ big).max()
        out[i] = -math.log2(max(lam, 1e-300))
    return out


def _hypothesis_entropy_zero_batch(mats: np.ndarray, da: int, de: int) -> np.ndarray:
    """S_H^0(A|E) = log2 lambda_max(tr_A support projector), stacked."""
    out = np.zeros(mats.shape[0])
    for i in range(mats.shape[0]):
        proj = support_projector(mats[i])
        red = np.einsum("aeaf->ef", proj.reshape(da, de, da, de))
        out[i] = math.log2(max(float(np.linalg.eigvalsh(red).max()), 1e-300))
    return out


def channel_costs(channel: QuantumChannel, mu: float, t_kelvin: float,
                  n_samples: int = 64, seed: int = 42) -> CostReport:
    """Preparation and adversarial erasure costs of one channel use.

    Preparation scans pure reference inputs (the maximally entangled one
    included, which attains the supremum); erasure scans mixed inputs to
    the isometric extension (the maximally mixed one included). At
    mu = 0 both suprema meet -S_min exactly; for mu > 0 the preparation
    side carries a certified-upper flag inherited from the one-sided
    smoothing.
    """
    if not 0 <= mu < 1:
        raise ValueError("mu must lie in [0, 1)")
    gen = _sampling.stream(seed, 0xC057)
    dr, da = channel.in_dim, channel.out_dim
    s_min = dynamical.channel_min_entropy(channel)

    # preparation: sup over pure psi_RA' of -S_down(A|R)
    phi = np.zeros(dr * dr, dtype=complex)
    phi[:: dr + 1] = 1.0 / math.sqrt(dr)
    basis_vecs = np.eye(dr * dr, dtype=complex)
    pure = np.concatenate([phi[None], basis_vecs,
                           _sampling.random_pure_vectors(gen, dr * dr, n_samples)])
    outs = dynamical._apply_to_pure_batch(channel, pure, dr)
    skipped = 0
    if mu == 0:
        down = _down_entropy_batch(outs, da, dr)
        prep_bits = float(-down.min())
        prep_idx = int(np.nonzero(down <= down.min() + 1e-9)[0][0])
        prep_cert = "exact"
    else:
        vals, kept = [], []
        for i in range(outs.shape[0]):
            state = DensityOperator(
                np.transpose(outs[i].reshape(dr, da, dr, da), (1, 0, 3, 2))
                .reshape(dr * da, dr * da), (da, dr))
            try:
                vals.append(entropies.smooth_min_entropy_lower_bound(
                    mu, state, "down"))
                kept.append(i)
            except SdpFailure:
                skipped += 1
        if not vals:
            raise RuntimeError("every preparation sample failed to certify")
        prep_bits = float(-min(vals))
        prep_idx = kept[int(np.argmin(vals))]
        prep_cert = "certified-upper"

    # erasure: sup over mixed rho_A' of S_H(A|E) on the Stinespring output
    iso = stinespring_isometry(channel)
    v = iso.isometry
    de = iso.env_dim
    mixed = [np.eye(dr, dtype=complex) / dr]
    eye = np.eye(dr, dtype=complex)
    mixed.extend(np.outer(eye[k], eye[k].conj()) for k in range(dr))
    mixed.extend(_sampling.random_density_matrices(gen, dr, max(n_samples // 2, 1)))
    big = np.stack([v @ m @ v.conj().T for m in mixed])
    if mu == 0:
        hvals = _hypothesis_entropy_zero_batch(big, da, de)
        eras_bits = float(hvals.max())
        eras_idx = int(np.nonzero(hvals >= hvals.max() - 1e-9)[0][0])
    else:
        hv, kept = [], []
        for i, m in enumerate(big):
            try:
                hv.append(entropies.cond_hypothesis_entropy(
                    mu, DensityOperator(m, (da, de))))
                kept.append(i)
            except SdpFailure:
                skipped += 1
        if not hv:
            raise RuntimeError("every erasure sample failed to certify")
        eras_bits = float(max(hv))
        eras_idx = kept[int(np.argmax(hv))]

    # certified ceilings implied by the one-shot cost bounds
    smooth_lb = dynamical.smooth_channel_min_entropy_lower_bound(mu, channel) \
        if mu > 0 else s_min
    if prep_bits > -smooth_lb + 1e-6:
        raise RuntimeError("preparation scan exceeded its certified ceiling")
    eras_ceiling = -s_min + (math.log2(1 - mu) if mu > 0 else 0.0)
    if eras_bits > eras_ceiling + 1e-6:
        raise RuntimeError("erasure scan exceeded its certified ceiling")

    labels_prep = {0: "maximally-entangled reference input"}
    labels_eras = {0: "maximally-mixed input"}
    report = CostReport(
        prep_cost=WorkCost(prep_bits, t_kelvin, certification=prep_cert),
        eras_cost=WorkCost(eras_bits, t_kelvin),
        mu=mu,
        s_min_channel=s_min,
        attained_inputs={
            "prep": labels_prep.get(prep_idx, f"sample-{prep_idx}"),
            "eras": labels_eras.get(eras_idx, f"sample-{eras_idx}"),
            "skipped_samples": skipped,
        },
        certification=prep_cert if mu > 0 else "exact",
    )
    return report


def adversarial_erasure_bound(channel: QuantumChannel, eps: float, delta: float,
                              t_kelvin: float) -> AdversarialBound:
    """Arithmetic of the high-probability erasure-cost bound.

    bound = (-S^eps_min + Delta) k_B T ln2 holding with probability
    1 - sqrt(2^(-Delta/2) + 12 eps); the probability is clamped to [0,1]
    and flagged invalid when the raw expression is negative.
    """
    if eps < 0 or delta <= 0:
        raise ValueError("need eps >= 0 and delta > 0")
    smin_eps = dynamical.smooth_channel_min_entropy_lower_bound(eps, channel) \
        if eps > 0 else dynamical.channel_min_entropy(channel)
    bits = -smin_eps + delta
    raw = 1.0 - math.sqrt(2.0 ** (-delta / 2.0) + 12.0 * eps)
    return AdversarialBound(
        bound=WorkCost(bits, t_kelvin, certification="certified-upper"),
        probability=float(min(max(raw, 0.0), 1.0)),
        valid=bool(raw >= 0.0))


def work_extraction_ledger(d_qubits: int, t_kelvin: float,
                           mode: str = "extract") -> WorkCost:
    """Energy ledger of the pure <-> maximally mixed conversion of d
    qubits: d k_B T ln2 extractable one way, paid back on erasure."""
    if d_qubits < 0:
        raise ValueError("d_qubits must be nonnegative")
    if mode not in ("extract", "erase"):
        raise ValueError("mode must be 'extract' or 'erase'")
    bits = -float(d_qubits) if mode == "extract" else float(d_qubits)
    return WorkCost(bits, t_kelvin)
