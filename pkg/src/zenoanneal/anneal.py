"""The optimization protocol: schedules, per-cycle pipeline, observables.

Each cycle applies, in this fixed order: (1) a per-node phase rotation,
(2) the drive, (3) one constraint gadget per edge in sorted edge order.
Edge gadgets sharing a vertex need not commute, so the order is part of the
contract and is recorded in every report.

Three execution paths share that pipeline:

* ``anneal_density``     - density matrices with per-mode dim >= 3, physical
                           constraint gadgets, and a choice of drive models;
* ``anneal_statevector`` - pure qubit amplitudes with the coherent-limit
                           constraint (a phase kick of pi + phi_q on |11>);
* ``anneal_ideal``       - reference run whose driver cannot reach
                           non-independent configurations at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .fock import (DensityState, FockSpace, PureState,
                   apply_local_operator_matrix, apply_local_superop_matrix,
                   make_space, vacuum)
from .gadgets import (ConstraintParams, DriveParams, constraint_superop,
                      default_pump_dim)
from .generators import (combine, displacement_generator, loss_dissipator,
                         sfg_generator, tpa_dissipator)
from .problems import ProblemGraph, brute_force_mis, brute_force_qubo, brute_force_wmis
from .propagator import PhaseKernel, build_cache

CYCLE_ORDER = "phase->drive->constraints"

DRIVE_MODES = ("ideal-2level", "zeno-tpa", "zeno-sfg")


@dataclass(frozen=True)
class Schedule:
    """Per-cycle phase and drive angles on the tau grid i/(n_cycle+1), i=1..n.

    Every entry satisfies |phi| + |c| = r_tot / n_cycle and
    phi/c = cot(pi tau); sweeping tau moves the pinned axis from the empty
    state to the occupied one through an avoided crossing at tau = 1/2.
    """

    n_cycle: int
    r_tot: float
    tau: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    weights: tuple[float, ...] | None = None
    zeta: np.ndarray | None = field(default=None, repr=False)


def make_schedule(n_cycle: int, r_tot: float) -> Schedule:
    if n_cycle < 1:
        raise ValueError("n_cycle must be at least 1")
    if r_tot <= 0:
        raise ValueError("r_tot must be positive")
    i = np.arange(1, n_cycle + 1, dtype=float)
    tau = i / (n_cycle + 1)
    cot = np.cos(math.pi * tau) / np.sin(math.pi * tau)
    step = r_tot / n_cycle
    phi = step * cot / (1.0 + np.abs(cot))
    c = step / (1.0 + np.abs(cot))
    return Schedule(n_cycle, float(r_tot), tau, phi, c)


def weighted_phases(schedule: Schedule, weights) -> Schedule:
    """Attach per-node phase weights: node j sees phi_i * w_j each cycle."""
    w = tuple(float(x) for x in weights)
    if any(x <= 0 for x in w):
        raise ValueError("phase weights must be positive")
    return Schedule(schedule.n_cycle, schedule.r_tot, schedule.tau,
                    schedule.phi, schedule.c, w, schedule.zeta)


@dataclass
class AnnealReport:
    """Per-cycle observables plus a summary of the final state."""

    n_cycle: int
    success: np.ndarray
    entropy: np.ndarray
    leakage: np.ndarray
    final_populations: dict[tuple[int, ...], float]
    cycle_order: str = CYCLE_ORDER
    meta: dict = field(default_factory=dict)
    final_state: object | None = None


def _binary_patterns(n: int):
    for idx in range(1 << n):
        yield tuple((idx >> (n - 1 - j)) & 1 for j in range(n))


def _optima_patterns(graph: ProblemGraph) -> list[tuple[int, ...]]:
    if graph.weights is None:
        _, optima = brute_force_mis(graph)
    else:
        _, optima = brute_force_wmis(graph)
    return [tuple(1 if j in s else 0 for j in range(graph.n_vertices)) for s in optima]


class _Observables:
    """Precomputed index sets for success/leakage on a product space."""

    def __init__(self, space: FockSpace, graph: ProblemGraph):
        self.space = space
        self.optima_idx = np.array([space.index(p) for p in _optima_patterns(graph)])
        independent = [p for p in _binary_patterns(graph.n_vertices)
                       if graph.is_independent([j for j, b in enumerate(p) if b])]
        self.independent_idx = np.array([space.index(p) for p in independent])
        self.qubit_patterns = list(_binary_patterns(graph.n_vertices))

    def success(self, diag: np.ndarray) -> float:
        return float(diag[self.optima_idx].sum())

    def leakage(self, diag: np.ndarray) -> float:
        return float(1.0 - diag[self.independent_idx].sum())

    def qubit_populations(self, diag: np.ndarray) -> dict[tuple[int, ...], float]:
        return {p: float(diag[self.space.index(p)]) for p in self.qubit_patterns}


def success_probability(state, graph: ProblemGraph) -> float:
    """Population on the basis patterns of every optimal vertex set."""
    obs = _Observables(state.space, graph)
    return obs.success(_diag(state))


def leakage(state, graph: ProblemGraph) -> float:
    """Population outside independent 0/1 patterns (including >= 2 photons)."""
    obs = _Observables(state.space, graph)
    return obs.leakage(_diag(state))


def _diag(state) -> np.ndarray:
    if isinstance(state, DensityState):
        return state.matrix.diagonal().real
    return np.abs(state.amplitudes) ** 2


def _ideal_drive_unitary(dim: int, c: float) -> np.ndarray:
    """Exact two-level rotation on {|0>, |1>}, identity on higher states."""
    u = np.eye(dim, dtype=complex)
    u[0, 0] = u[1, 1] = math.cos(c)
    u[0, 1] = u[1, 0] = -1j * math.sin(c)
    return u


class _ZenoDriveKernel:
    """Per-cycle drive superoperators from a binary-decomposition cache.

    The drive hardware runs for t_i = c_i / c each cycle, so the blockade
    exposure scales together with the rotation angle exactly as it would
    physically.
    """

    def __init__(self, mode_dim: int, drive: DriveParams, mode_kind: str,
                 t_max: float, m: int = 30):
        if drive.c <= 0:
            raise ValueError("zeno drive modes need a positive displacement rate c")
        self.mode_dim = mode_dim
        self.kind = mode_kind
        if mode_kind == "zeno-tpa":
            space = make_space([mode_dim])
            gen = combine([(displacement_generator(space, 0), drive.c),
                           (tpa_dissipator(space, 0), drive.gamma)])
            self._cache = build_cache(gen, t_max, m)
            self._embed = None
        else:
            pump_dim = default_pump_dim(mode_dim)
            joint = make_space([mode_dim, pump_dim])
            parts = [(displacement_generator(joint, 0), drive.c),
                     (sfg_generator(joint, 0, 1), drive.gamma)]
            if drive.eta:
                parts.append((loss_dissipator(joint, 1), drive.eta))
            self._cache = build_cache(combine(parts), t_max, m)
            self._embed = _pump_embed_matrices(mode_dim, pump_dim)

    def superop(self, t: float) -> np.ndarray:
        mat = self._cache.matrix_for(t)
        if self._embed is None:
            return mat
        append, trace = self._embed
        return trace @ mat @ append


def _pump_embed_matrices(mode_dim: int, pump_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """(append, trace): vec maps adding an empty pump and tracing it out."""
    d, p = mode_dim, pump_dim
    dj = d * p
    append = np.zeros((dj * dj, d * d))
    trace = np.zeros((d * d, dj * dj))
    for r in range(d):
        for c in range(d):
            vm = r + d * c
            append[(r * p) + dj * (c * p), vm] = 1.0
            for k in range(p):
                trace[vm, (r * p + k) + dj * (c * p + k)] = 1.0
    return append, trace


def anneal_density(graph: ProblemGraph, schedule: Schedule,
                   constraint: ConstraintParams,
                   drive_mode: str = "ideal-2level",
                   drive: DriveParams | None = None,
                   mode_dim: int = 3,
                   record_entropy: bool = True,
                   keep_final_state: bool = False) -> AnnealReport:
    """Density-matrix execution with physical constraint gadgets.

    ``mode_dim`` >= 3 is required whenever the graph has edges, since the
    gadgets route population through the two-photon state.
    """
    if drive_mode not in DRIVE_MODES:
        raise ValueError(f"drive_mode must be one of {DRIVE_MODES}")
    if graph.edges and mode_dim < 3:
        raise ValueError("constraint gadgets need per-mode dim >= 3")
    n = graph.n_vertices
    space = make_space([mode_dim] * n)
    obs = _Observables(space, graph)
    weights = schedule.weights or tuple(1.0 for _ in range(n))
    if len(weights) != n:
        raise ValueError("need one phase weight per graph vertex")

    kernels = [PhaseKernel(space, m) for m in range(n)]
    edges = graph.sorted_edges()
    edge_superop = None
    if edges:
        local = make_space([mode_dim, mode_dim])
        edge_superop = constraint_superop(local, 0, 1, constraint).matrix

    zeno = None
    if drive_mode != "ideal-2level":
        if drive is None:
            raise ValueError(f"drive_mode {drive_mode!r} needs DriveParams")
        t_max = float(np.max(schedule.c)) / drive.c
        zeno = _ZenoDriveKernel(mode_dim, drive, drive_mode, t_max)

    rho = vacuum(space).to_density().matrix
    success = np.empty(schedule.n_cycle)
    entropy = np.zeros(schedule.n_cycle)
    leak = np.empty(schedule.n_cycle)
    for i in range(schedule.n_cycle):
        phi_i, c_i = float(schedule.phi[i]), float(schedule.c[i])
        for m in range(n):
            rho = kernels[m].apply_matrix(rho, phi_i * weights[m])
        if drive_mode == "ideal-2level":
            u = _ideal_drive_unitary(mode_dim, c_i)
            for m in range(n):
                rho = apply_local_operator_matrix(u, rho, space, [m])
        else:
            s = zeno.superop(c_i / drive.c)
            for m in range(n):
                rho = apply_local_superop_matrix(s, rho, space, [m])
        if edge_superop is not None:
            for (j, k) in edges:
                rho = apply_local_superop_matrix(edge_superop, rho, space, [j, k])
        diag = rho.diagonal().real
        success[i] = obs.success(diag)
        leak[i] = obs.leakage(diag)
        if record_entropy:
            lam = np.linalg.eigvalsh(rho)
            lam = lam[lam > 1e-12]
            entropy[i] = float(-np.sum(lam * np.log2(lam))) if lam.size else 0.0

    final = DensityState(space, rho)
    return AnnealReport(
        schedule.n_cycle, success, entropy, leak,
        obs.qubit_populations(rho.diagonal().real),
        meta={"path": "density", "drive_mode": drive_mode, "mode_dim": mode_dim,
              "constraint": constraint, "r_tot": schedule.r_tot},
        final_state=final if keep_final_state else None)


def _qubit_space(n: int) -> FockSpace:
    return make_space([2] * n)


def _weighted_number_vector(space: FockSpace, weights) -> np.ndarray:
    number = np.zeros(space.total_dim)
    for m, w in enumerate(weights):
        number += space.occupation_array(m).astype(float) * w
    return number


def _statevector_pipeline(graph: ProblemGraph, schedule: Schedule,
                          edge_kicks: dict[tuple[int, int], complex] | None,
                          drive_apply):
    """Shared cycle loop for the pure-state paths; returns report pieces."""
    n = graph.n_vertices
    space = _qubit_space(n)
    obs = _Observables(space, graph)
    weights = schedule.weights or tuple(1.0 for _ in range(n))
    if len(weights) != n:
        raise ValueError("need one phase weight per graph vertex")
    number = _weighted_number_vector(space, weights)
    masks = {}
    if edge_kicks:
        for (j, k) in edge_kicks:
            masks[(j, k)] = ((space.occupation_array(j) == 1)
                             & (space.occupation_array(k) == 1))

    amps = vacuum(space).amplitudes.copy()
    success = np.empty(schedule.n_cycle)
    leak = np.empty(schedule.n_cycle)
    for i in range(schedule.n_cycle):
        phi_i, c_i = float(schedule.phi[i]), float(schedule.c[i])
        amps = amps * np.exp(-1j * phi_i * number)
        amps = drive_apply(amps, c_i)
        if edge_kicks:
            for (j, k), kick in edge_kicks.items():
                amps = np.where(masks[(j, k)], amps * kick, amps)
        p = np.abs(amps) ** 2
        success[i] = obs.success(p)
        leak[i] = obs.leakage(p)
    return space, obs, amps, success, leak


def _per_mode_rotation(space: FockSpace, n: int):
    """Return a function applying exp(-i c X) on every qubit mode."""

    def apply(amps: np.ndarray, c: float) -> np.ndarray:
        u = np.array([[math.cos(c), -1j * math.sin(c)],
                      [-1j * math.sin(c), math.cos(c)]])
        tensor = amps.reshape((2,) * n)
        for m in range(n):
            tensor = np.moveaxis(np.tensordot(u, tensor, axes=([1], [m])), 0, m)
        return tensor.reshape(space.total_dim)

    return apply


def anneal_statevector(graph: ProblemGraph, schedule: Schedule,
                       phi_q: float,
                       keep_final_state: bool = False) -> AnnealReport:
    """Pure-state run with the coherent-limit constraint.

    Each edge multiplies the |1_j 1_k> amplitudes by exp(i (pi + phi_q)),
    which is exactly what the physical gadget does in its fully coherent
    setting, so this path matches ``anneal_density`` there.
    """
    n = graph.n_vertices
    kick = complex(np.exp(1j * (math.pi + phi_q)))
    kicks = {e: kick for e in graph.sorted_edges()}
    space = _qubit_space(n)
    drive = _per_mode_rotation(space, n)
    space, obs, amps, success, leak = _statevector_pipeline(graph, schedule, kicks, drive)
    final = PureState(space, amps / np.linalg.norm(amps))
    return AnnealReport(schedule.n_cycle, success, np.zeros(schedule.n_cycle), leak,
                        obs.qubit_populations(np.abs(amps) ** 2),
                        meta={"path": "statevector", "phi_q": phi_q,
                              "r_tot": schedule.r_tot},
                        final_state=final if keep_final_state else None)


def anneal_ideal(graph: ProblemGraph, schedule: Schedule,
                 keep_final_state: bool = False) -> AnnealReport:
    """Reference run: driver matrix elements into non-independent sets are zeroed."""
    n = graph.n_vertices
    space = _qubit_space(n)
    dim = space.total_dim
    independent = np.zeros(dim, dtype=bool)
    for p in _binary_patterns(n):
        if graph.is_independent([j for j, b in enumerate(p) if b]):
            independent[space.index(p)] = True
    h = np.zeros((dim, dim))
    for m in range(n):
        occ = space.occupation_array(m)
        stride = space.strides[m]
        for idx in range(dim):
            if occ[idx] == 0:
                other = idx + stride
                if independent[idx] and independent[other]:
                    h[idx, other] = h[other, idx] = 1.0
    lam, vecs = np.linalg.eigh(h)

    def drive(amps: np.ndarray, c: float) -> np.ndarray:
        return vecs @ (np.exp(-1j * c * lam) * (vecs.conj().T @ amps))

    space, obs, amps, success, leak = _statevector_pipeline(graph, schedule, None, drive)
    final = PureState(space, amps / np.linalg.norm(amps))
    return AnnealReport(schedule.n_cycle, success, np.zeros(schedule.n_cycle), leak,
                        obs.qubit_populations(np.abs(amps) ** 2),
                        meta={"path": "ideal", "r_tot": schedule.r_tot},
                        final_state=final if keep_final_state else None)


def linear_three_parameter_profile(n_cycle: int, r_tot: float):
    """Default QUBO ramp: phi falls linearly, c bumps, zeta rises linearly.

    Endpoints: c(0) = zeta(0) = 0 with phi(0) > 0, and c(1) = phi(1) = 0 with
    zeta(1) > 0, both approached monotonically.  The early phase bias points
    at the all-empty state, so instances should be gauged to put their
    expected optimum there.
    """
    i = np.arange(1, n_cycle + 1, dtype=float)
    tau = i / (n_cycle + 1)
    step = r_tot / n_cycle
    phi = step * (1.0 - tau)
    # c/phi must vanish at both ends or the pinned axis never returns to the
    # diagonal bias; sin^2 * (1 - tau) dies quadratically against phi.
    c = step * np.sin(math.pi * tau) ** 2 * (1.0 - tau)
    zeta = step * tau
    return tau, phi, c, zeta


def qubo_anneal(q: np.ndarray, n_cycle: int, r_tot: float,
                zeta_profile=None,
                constraint: ConstraintParams | None = None,
                keep_final_state: bool = False) -> AnnealReport:
    """Three-parameter anneal minimizing E = sum_jk s_j s_k Q_jk.

    Diagonal elements ride on the per-mode phases; each off-diagonal pair
    applies a pump-phase kick of zeta * (Q_jk + Q_kj) on |1_j 1_k>, which is
    only realizable with a lossless pump, so lossy constraint parameters are
    rejected.
    """
    q = np.asarray(q, dtype=float)
    if constraint is not None and constraint.eta_t != 0.0:
        raise ValueError("QUBO phases need a lossless pump (eta_t = 0)")
    n = q.shape[0]
    profile = zeta_profile or linear_three_parameter_profile
    tau, phi, c, zeta = (np.asarray(x, dtype=float)
                         for x in profile(n_cycle, r_tot))

    space = _qubit_space(n)
    number = _weighted_number_vector(space, [1.0] * n)
    energy = np.zeros(space.total_dim)
    for idx in range(space.total_dim):
        bits = np.asarray(space.occupations(idx), dtype=float)
        energy[idx] = float(bits @ q @ bits)
    _, optima = brute_force_qubo(q)
    opt_idx = np.array([space.index(bits) for bits in optima])
    drive = _per_mode_rotation(space, n)

    amps = vacuum(space).amplitudes.copy()
    success = np.empty(n_cycle)
    for i in range(n_cycle):
        amps = amps * np.exp(-1j * (phi[i] * number + zeta[i] * energy))
        amps = drive(amps, float(c[i]))
        success[i] = float((np.abs(amps[opt_idx]) ** 2).sum())

    p = np.abs(amps) ** 2
    patterns = {tuple(space.occupations(i)): float(p[i])
                for i in range(space.total_dim)}
    final = PureState(space, amps / np.linalg.norm(amps))
    return AnnealReport(n_cycle, success, np.zeros(n_cycle), np.zeros(n_cycle),
                        patterns,
                        meta={"path": "qubo", "r_tot": r_tot, "optima": optima},
                        final_state=final if keep_final_state else None)
