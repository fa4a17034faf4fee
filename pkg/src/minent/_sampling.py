# src/minent/_sampling.py
"""Counter-based randomness shared by the Monte Carlo layers.

Philox (64-bit counter PRNG) keyed by (master seed, stream id), with
complex Gaussians produced by Box-Muller from raw uniforms. Every
consumer derives its own stream id, so results are reproducible given
the master seed no matter how work is divided among workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "complex_ginibre", "haar_unitaries", "random_pure_vectors",
           "random_density_matrices", "random_channels_kraus"]


def stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF,
                                                     stream_id & 0xFFFFFFFFFFFFFFFF]))


def complex_ginibre(gen: np.random.Generator, shape) -> np.ndarray:
    """Standard complex normals via Box-Muller on Philox uniforms."""
    u1 = gen.random(shape)
    u2 = gen.random(shape)
    r = np.sqrt(-np.log(np.clip(u1, 1e-300, None)))
    return r * np.exp(2j * np.pi * u2)


def haar_unitaries(gen: np.random.Generator, dim: int, count: int) -> np.ndarray:
    """Haar-distributed unitaries: Ginibre QR with R-diagonal phase fix."""
    z = complex_ginibre(gen, (count, dim, dim))
    q, r = np.linalg.qr(z)
    diag = np.einsum("bii->bi", r)
    phases = diag / np.abs(np.where(np.abs(diag) > 0, diag, 1.0))
    return q * phases[:, None, :]


def random_pure_vectors(gen: np.random.Generator, dim: int, count: int) -> np.ndarray:
    v = complex_ginibre(gen, (count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_density_matrices(gen: np.random.Generator, dim: int, count: int,
                            rank: int | None = None) -> np.ndarray:
    r = rank or dim
    g = complex_ginibre(gen, (count, dim, r))
    mats = g @ g.conj().swapaxes(-1, -2)
    tr = np.einsum("bii->b", mats).real
    return mats / tr[:, None, None]


def random_channels_kraus(gen: np.random.Generator, in_dim: int, out_dim: int,
                          kraus_count: int, count: int):
    """Random channels from Haar isometries in -> out (x) env."""
    big = out_dim * kraus_count
    z = complex_ginibre(gen, (count, big, in_dim))
    q, r = np.linalg.qr(z)
    diag = np.einsum("bii->bi", r)
    phases = diag / np.abs(np.where(np.abs(diag) > 0, diag, 1.0))
    isos = q * phases[:, None, :]
    out = []
    for b in range(count):
        v = isos[b]
        # rows are indexed (a, e); Kraus operators collect fixed e
        kraus = [np.stack([v[a * kraus_count + e] for a in range(out_dim)])
                 for e in range(kraus_count)]
        out.append(kraus)
    return out
