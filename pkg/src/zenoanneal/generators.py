"""Sparse generators for the master equations used by the protocol.

Every builder returns a :class:`GeneratorSpec` whose matrix acts on
column-stacked density matrices (see :mod:`zenoanneal.fock` for conventions).
Hamiltonian terms enter as -i[H, rho]; dissipators in standard Lindblad form
L rho L^dag - (1/2){L^dag L, rho}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .fock import FockSpace

# Structural zeros below this magnitude are dropped from generator matrices.
SPARSE_PRUNE_TOL = 1e-15


@dataclass(frozen=True)
class GeneratorSpec:
    """A weighted sum of Hamiltonian-commutator and dissipator terms.

    ``terms`` records (kind, modes, rate) triples with
    kind in {"hamiltonian", "dissipator", "phase"}.
    """

    space: FockSpace
    matrix: sp.csr_array
    terms: tuple[tuple[str, tuple[int, ...], float], ...]

    @property
    def is_dissipative(self) -> bool:
        return any(kind == "dissipator" for kind, _, _ in self.terms)


@lru_cache(maxsize=None)
def _annihilation(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    return a


@lru_cache(maxsize=None)
def annihilation_operator(mode_dims: tuple[int, ...], mode: int) -> sp.csr_array:
    """Global sparse annihilation operator for one mode, cached per space."""
    n_modes = len(mode_dims)
    if mode < 0 or mode >= n_modes:
        raise ValueError(f"mode {mode} out of range")
    parts = []
    for m, d in enumerate(mode_dims):
        parts.append(sp.csr_array(_annihilation(d)) if m == mode else sp.identity(d, format="csr"))
    out = parts[0]
    for p in parts[1:]:
        out = sp.kron(out, p, format="csr")
    return sp.csr_array(out)


def _prune(mat: sp.csr_array) -> sp.csr_array:
    mat = sp.csr_array(mat)
    mat.data[np.abs(mat.data) < SPARSE_PRUNE_TOL] = 0.0
    mat.eliminate_zeros()
    return mat


def hamiltonian_superop(h: sp.csr_array, dim: int) -> sp.csr_array:
    """Matrix of rho -> -i[H, rho] under column stacking."""
    ident = sp.identity(dim, format="csr")
    return _prune(-1j * (sp.kron(ident, h) - sp.kron(h.T, ident)))


def dissipator_superop(jump: sp.csr_array, dim: int) -> sp.csr_array:
    """Matrix of the Lindblad dissipator with jump operator ``jump``."""
    ident = sp.identity(dim, format="csr")
    ldl = (jump.conj().T @ jump).tocsr()
    out = (sp.kron(jump.conj(), jump)
           - 0.5 * sp.kron(ident, ldl)
           - 0.5 * sp.kron(ldl.T, ident))
    return _prune(out)


def _single_term(space: FockSpace, kind: str, modes: tuple[int, ...],
                 matrix: sp.csr_array) -> GeneratorSpec:
    return GeneratorSpec(space, _prune(matrix), ((kind, modes, 1.0),))


def tpa_dissipator(space: FockSpace, mode: int) -> GeneratorSpec:
    """Two-photon absorption: incoherent removal of photon pairs from a mode.

    Inert on the zero- and one-photon span; nontrivial action needs
    mode dimension >= 3.
    """
    a = annihilation_operator(space.mode_dims, mode)
    return _single_term(space, "dissipator", (mode,),
                        dissipator_superop((a @ a).tocsr(), space.total_dim))


def loss_dissipator(space: FockSpace, mode: int) -> GeneratorSpec:
    """Single-photon loss on one mode."""
    a = annihilation_operator(space.mode_dims, mode)
    return _single_term(space, "dissipator", (mode,),
                        dissipator_superop(a, space.total_dim))


def displacement_generator(space: FockSpace, mode: int) -> GeneratorSpec:
    """Coherent displacement drive, -i[a + a^dag, rho]."""
    a = annihilation_operator(space.mode_dims, mode)
    h = (a + a.conj().T).tocsr()
    return _single_term(space, "hamiltonian", (mode,),
                        hamiltonian_superop(h, space.total_dim))


def sfg_generator(space: FockSpace, mode: int, pump_mode: int) -> GeneratorSpec:
    """Sum-frequency generation coupling a mode to its pump.

    H = a a p^dag + a^dag a^dag p converts photon pairs in ``mode`` into
    single pump photons and back.  The pump dimension must accommodate every
    convertible pair.
    """
    if pump_mode == mode:
        raise ValueError("pump mode must differ from the converted mode")
    max_pairs = (space.mode_dims[mode] - 1) // 2
    if space.mode_dims[pump_mode] - 1 < max_pairs:
        raise ValueError(
            f"pump dim {space.mode_dims[pump_mode]} cannot hold "
            f"{max_pairs} converted pairs")
    a = annihilation_operator(space.mode_dims, mode)
    p = annihilation_operator(space.mode_dims, pump_mode)
    h = (a @ a @ p.conj().T + a.conj().T @ a.conj().T @ p).tocsr()
    return _single_term(space, "hamiltonian", (mode, pump_mode),
                        hamiltonian_superop(h, space.total_dim))


def phase_generator(space: FockSpace, mode: int) -> GeneratorSpec:
    """Phase rotation: -i[n, rho], matching U(phi) = exp(-i phi n)."""
    a = annihilation_operator(space.mode_dims, mode)
    n = (a.conj().T @ a).tocsr()
    return _single_term(space, "phase", (mode,),
                        hamiltonian_superop(n, space.total_dim))


def combine(weighted: list[tuple[GeneratorSpec, float]]) -> GeneratorSpec:
    """Weighted sum of generators over a shared space."""
    if not weighted:
        raise ValueError("combine needs at least one generator")
    space = weighted[0][0].space
    matrix = None
    terms: list[tuple[str, tuple[int, ...], float]] = []
    for gen, rate in weighted:
        if gen.space != space:
            raise ValueError("generators live on different spaces")
        contrib = gen.matrix * rate
        matrix = contrib if matrix is None else matrix + contrib
        terms.extend((kind, modes, r * rate) for kind, modes, r in gen.terms)
    return GeneratorSpec(space, _prune(matrix), tuple(terms))
