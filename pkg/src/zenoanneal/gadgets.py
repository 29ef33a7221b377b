"""Composite superoperators: drives, pumped phase gadgets, edge constraints.

The pair-conversion processes here follow the convention fixed by the
generators module: the SFG Hamiltonian couples |2, 0_p> to |0, 1_p> with
matrix element sqrt(2), so a single conversion half-rotation corresponds to
gamma*t = pi/(4 sqrt(2)) inside the two-pass gadget.  Pump modes are always
private to one gadget invocation: appended empty, evolved, traced out,
discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .fock import (FockSpace, apply_local_superop_matrix, make_space,
                   partial_trace_matrix)
from .generators import (GeneratorSpec, combine, displacement_generator,
                         loss_dissipator, phase_generator, sfg_generator,
                         tpa_dissipator, annihilation_operator)
from .propagator import DENSE_DIM_THRESHOLD, Superoperator, expm_dense

# Per-half SFG angles bounding the coherence interpolation: at the lower
# endpoint the photon pair ends up in the (traced) pump, at the upper endpoint
# it returns coherently with a phase.
GAMMA_T_INCOHERENT = math.pi / (4 * math.sqrt(2))
GAMMA_T_COHERENT = math.pi / (2 * math.sqrt(2))


@dataclass(frozen=True)
class ConstraintParams:
    """Knobs of the two-pass constraint gadget.

    ``gamma_t`` is the SFG angle of each half-application, ``phi_q`` the pump
    phase injected between halves, ``eta_t`` the pump loss exposure.
    """

    phi_q: float
    gamma_t: float
    eta_t: float = 0.0

    def __post_init__(self):
        if self.gamma_t < 0:
            raise ValueError("gamma_t must be nonnegative")
        if self.eta_t < 0:
            raise ValueError("eta_t must be nonnegative")

    @property
    def coherence_mode(self) -> str:
        if math.isclose(self.gamma_t, GAMMA_T_INCOHERENT, rel_tol=1e-9):
            return "incoherent"
        if self.eta_t == 0 and math.isclose(self.gamma_t, GAMMA_T_COHERENT, rel_tol=1e-9):
            return "coherent"
        return "partial"


@dataclass(frozen=True)
class DriveParams:
    """Rates for a Zeno-blockaded driving window of duration ``t``."""

    c: float
    gamma: float
    eta: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        for name in ("c", "gamma", "eta", "t"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


def default_pump_dim(mode_dim: int) -> int:
    """Smallest pump truncation holding every convertible photon pair."""
    return 1 + (mode_dim - 1) // 2


def unitary_conjugation_superop(u: np.ndarray) -> np.ndarray:
    """Matrix of rho -> U rho U^dag under column stacking."""
    return np.kron(np.asarray(u).conj(), np.asarray(u))


def embed_local_superop(local: np.ndarray, space: FockSpace, targets) -> np.ndarray:
    """Expand a local superoperator to the full space by column probing."""
    d = space.total_dim
    out = np.empty((d * d, d * d), dtype=complex)
    basis = np.zeros((d, d), dtype=complex)
    for c in range(d * d):
        row, col = c % d, c // d
        basis[row, col] = 1.0
        out[:, c] = apply_local_superop_matrix(local, basis, space, targets).flatten(order="F")
        basis[row, col] = 0.0
    return out


def _appended_space(space: FockSpace, pump_dim: int) -> FockSpace:
    return make_space(list(space.mode_dims) + [pump_dim])


def _with_fresh_pump(space: FockSpace, joint_superop: np.ndarray,
                     pump_dim: int) -> np.ndarray:
    """Compose append-empty-pump, a joint superoperator, and pump trace-out."""
    d = space.total_dim
    joint_dims = tuple(space.mode_dims) + (pump_dim,)
    keep = list(range(space.n_modes))
    pump_vac = np.zeros((pump_dim, pump_dim), dtype=complex)
    pump_vac[0, 0] = 1.0
    out = np.empty((d * d, d * d), dtype=complex)
    basis = np.zeros((d, d), dtype=complex)
    dj = d * pump_dim
    for c in range(d * d):
        row, col = c % d, c // d
        basis[row, col] = 1.0
        joint = np.kron(basis, pump_vac)
        evolved = (joint_superop @ joint.flatten(order="F")).reshape((dj, dj), order="F")
        reduced = partial_trace_matrix(evolved, joint_dims, keep)
        out[:, c] = reduced.flatten(order="F")
        basis[row, col] = 0.0
    return out


def tpa_superop(space: FockSpace, mode: int, gamma_t: float,
                dim_cap: int = DENSE_DIM_THRESHOLD) -> Superoperator:
    """exp(gamma_t * L_TPA): identity on the {|0>, |1>} span, pair removal above."""
    if gamma_t < 0:
        raise ValueError("gamma_t must be nonnegative")
    return expm_dense(tpa_dissipator(space, mode), gamma_t, dim_cap=dim_cap)


def _pumped_generator(space: FockSpace, mode: int, pump_dim: int,
                      c: float = 0.0, gamma: float = 1.0,
                      eta: float = 0.0) -> tuple[GeneratorSpec, FockSpace]:
    joint_space = _appended_space(space, pump_dim)
    pump = joint_space.n_modes - 1
    parts = [(sfg_generator(joint_space, mode, pump), gamma)]
    if c != 0.0:
        parts.append((displacement_generator(joint_space, mode), c))
    if eta != 0.0:
        parts.append((loss_dissipator(joint_space, pump), eta))
    return combine(parts), joint_space


def sfg_superop(space: FockSpace, mode: int, gamma_t: float,
                pump_dim: int | None = None,
                dim_cap: int = DENSE_DIM_THRESHOLD) -> Superoperator:
    """Single SFG pass with a fresh pump traced out afterwards."""
    pump_dim = pump_dim or default_pump_dim(space.mode_dims[mode])
    gen, _ = _pumped_generator(space, mode, pump_dim)
    joint = expm_dense(gen, gamma_t, dim_cap=dim_cap)
    mat = _with_fresh_pump(space, joint.matrix, pump_dim)
    return Superoperator(space, mat, f"sfg(gamma_t={gamma_t})")


def driven_tpa_superop(space: FockSpace, mode: int, params: DriveParams,
                       dim_cap: int = DENSE_DIM_THRESHOLD) -> Superoperator:
    """Displacement drive under two-photon absorption: exp[t(c G_disp + gamma L_TPA)]."""
    gen = combine([(displacement_generator(space, mode), params.c),
                   (tpa_dissipator(space, mode), params.gamma)])
    return expm_dense(gen, params.t, dim_cap=dim_cap)


def driven_sfg_superop(space: FockSpace, mode: int, params: DriveParams,
                       pump_dim: int | None = None,
                       dim_cap: int = DENSE_DIM_THRESHOLD) -> Superoperator:
    """Displacement drive under SFG with optional pump loss, pump traced out.

    With eta = 0 this is the fully coherent drive; eta interpolates toward the
    incoherent blockade, reaching critical damping at eta = 4 sqrt(2) gamma.
    """
    pump_dim = pump_dim or default_pump_dim(space.mode_dims[mode])
    gen, _ = _pumped_generator(space, mode, pump_dim, c=params.c,
                               gamma=params.gamma, eta=params.eta)
    joint = expm_dense(gen, params.t, dim_cap=dim_cap)
    mat = _with_fresh_pump(space, joint.matrix, pump_dim)
    return Superoperator(space, mat,
                         f"driven_sfg(c={params.c},gamma={params.gamma},eta={params.eta},t={params.t})")


def beamsplitter(space: FockSpace, j: int, k: int) -> np.ndarray:
    """50:50 beamsplitter unitary with convention a_j -> (a_j + i a_k)/sqrt(2).

    Built as the exponential of the truncated coupler Hamiltonian, so it is
    exactly unitary on the truncated space and reproduces photon bunching on
    the two-photon block.
    """
    if j == k:
        raise ValueError("beamsplitter needs two distinct modes")
    if space.mode_dims[j] != space.mode_dims[k]:
        raise ValueError("beamsplitter modes must share a dimension")
    aj = annihilation_operator(space.mode_dims, j).toarray()
    ak = annihilation_operator(space.mode_dims, k).toarray()
    coupler = aj.conj().T @ ak + ak.conj().T @ aj
    return scipy.linalg.expm(1j * (math.pi / 4) * coupler)


def pumped_phase_gadget(space: FockSpace, mode: int, params: ConstraintParams,
                        pump_dim: int | None = None,
                        dim_cap: int = DENSE_DIM_THRESHOLD) -> Superoperator:
    """Two SFG half-passes with pump phase/loss in between, pump traced at the end.

    At gamma_t = pi/(4 sqrt 2) the photon pair is dumped into the pump
    (incoherent removal); at pi/(2 sqrt 2) it returns with amplitude
    -exp(i phi_q) (coherent phase kick of pi + phi_q).
    """
    pump_dim = pump_dim or default_pump_dim(space.mode_dims[mode])
    gen_sfg, joint_space = _pumped_generator(space, mode, pump_dim)
    pump = joint_space.n_modes - 1
    half = expm_dense(gen_sfg, params.gamma_t, dim_cap=dim_cap).matrix
    mid_parts = [(phase_generator(joint_space, pump), -params.phi_q)]
    if params.eta_t != 0.0:
        mid_parts.append((loss_dissipator(joint_space, pump), params.eta_t))
    mid = expm_dense(combine(mid_parts), 1.0, dim_cap=dim_cap).matrix
    mat = _with_fresh_pump(space, half @ mid @ half, pump_dim)
    return Superoperator(space, mat,
                         f"pumped_phase(phi_q={params.phi_q},gamma_t={params.gamma_t},eta_t={params.eta_t})")


def constraint_superop(space: FockSpace, j: int, k: int,
                       params: ConstraintParams) -> Superoperator:
    """Edge constraint: beamsplitter-conjugated pumped phase gadgets on both modes.

    Leaves all zero/one-photon patterns except |1_j 1_k> alone; what happens
    to |1_j 1_k> ranges from incoherent removal to a pure phase kick of
    pi + phi_q depending on ``params``.
    """
    if j == k:
        raise ValueError("constraint needs two distinct modes")
    u_bs = beamsplitter(space, j, k)
    s_bs = unitary_conjugation_superop(u_bs)
    nl = {}
    for mode in (j, k):
        local = pumped_phase_gadget(make_space([space.mode_dims[mode]]), 0, params)
        nl[mode] = embed_local_superop(local.matrix, space, [mode])
    mat = s_bs.conj().T @ nl[j] @ nl[k] @ s_bs
    return Superoperator(space, mat,
                         f"constraint(j={j},k={k},phi_q={params.phi_q},"
                         f"gamma_t={params.gamma_t},eta_t={params.eta_t})")


def conservative_pump_phase(d: float) -> float:
    """Safe pump phase pi + pi/d for a resolution parameter d > 0."""
    if d <= 0:
        raise ValueError("d must be positive")
    return math.pi + math.pi / d
