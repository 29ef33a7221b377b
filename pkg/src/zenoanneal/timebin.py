"""Compilation of constraint schedules onto the two-nonlinear-element
time-bin architecture.

Logical modes ride in a train of time bins spaced by a base delay D.  Each
round, one switched delay stage reorders the train (an odd-even transposition
step), and each adjacent pair routed together either interacts through the
nonlinear element (a constraint) or passes through untouched (identity).
Both block types add a total delay of 3D/2 per bin; the switch settings per
incident bin are:

    constraint: first bin 0,0,0,0   second bin 1,1,1,1
    identity:   first bin 0,0,0,0   second bin 0,1,1,0

Switches are stateless per bin event: each row below is one bin's pass
through S1..S4, with 0 = top channel and 1 = bottom channel.  Positions are
counted from the back of the train (position 0 arrives last).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .problems import ProblemGraph

CONSTRAINT_ROWS = ((0, 0, 0, 0), (1, 1, 1, 1))
IDENTITY_ROWS = ((0, 0, 0, 0), (0, 1, 1, 0))

# Every interaction/identity block delays each bin by 3 half-units of D.
BLOCK_DELAY_HALF_D = 3


@dataclass
class BinEvent:
    """One bin's pass through the four switches in one round."""

    position: int
    mode: int
    settings: tuple[int, int, int, int]
    block: str            # "constraint" | "identity"
    role: str             # "first" | "second" | "solo"
    block_delay_half_d: int = BLOCK_DELAY_HALF_D
    shuffle_delay_half_d: int = 0


@dataclass
class Round:
    index: int
    order_before: list[int]
    order_after: list[int]
    events: list[BinEvent]
    pairs: list[tuple[int, int, str]] = field(default_factory=list)


@dataclass
class SwitchProgram:
    n_bins: int
    rounds: list[Round]


def shuffle_delays(n: int, round_index: int) -> list[int]:
    """Per-position delays (units of D) for one reordering round.

    Positions whose parity matches the round get the 2D shift that moves
    them one slot toward the back; the two train endpoints get D instead so
    they stay adjacent to their neighbours.
    """
    r = round_index % 2
    delays = []
    for i in range(n):
        if i % 2 == r:
            delays.append(1 if i == 0 else 2)
        elif i == n - 1:
            delays.append(1)
        else:
            delays.append(0)
    return delays


def apply_delays(order: list[int], delays: list[int]) -> list[int]:
    """New train order after the delays; checks the D spacing survives."""
    n = len(order)
    # Position i from the back sits at arrival time (n - 1 - i) * D.
    times = [(n - 1 - i) + delays[i] for i in range(n)]
    if len(set(times)) != n:
        raise ValueError("delays collide two bins onto one time slot")
    ranked = sorted(range(n), key=lambda i: times[i], reverse=True)
    spaced = sorted(times, reverse=True)
    if any(spaced[i] - spaced[i + 1] != 1 for i in range(n - 1)):
        raise ValueError("delays broke the uniform D spacing of the train")
    return [order[i] for i in ranked]


def swap_pairs(n: int, round_index: int) -> list[tuple[int, int]]:
    """Adjacent position pairs (p, p+1) that this round's delays transpose."""
    delays = shuffle_delays(n, round_index)
    return [(d - 1, d) for d in range(1, n) if delays[d] == 2]


def all_pairs_shuffle(n: int):
    """n rounds of alternating odd/even shifts covering every unordered pair.

    Returns a list of (delays, order_before, order_after, eligible_pairs)
    tuples, where eligible_pairs are the adjacent position pairs that may
    interact in that round.
    """
    if n < 2:
        raise ValueError("need at least two bins")
    order = list(range(n))
    rounds = []
    for r in range(n):
        delays = shuffle_delays(n, r)
        after = apply_delays(order, delays)
        rounds.append({
            "delays": delays,
            "order_before": list(order),
            "order_after": after,
            "eligible_pairs": swap_pairs(n, r),
        })
        order = after
    return rounds


def compile_round(n_bins: int, pairs, interact, order=None,
                  round_index: int = 0, delays=None) -> Round:
    """Emit one round of switch settings.

    ``pairs`` are disjoint adjacent position pairs; ``interact[i]`` selects a
    constraint block for pairs[i], otherwise an identity block.  Bins outside
    any pair traverse the unit alone with identity-first settings.
    """
    order = list(order) if order is not None else list(range(n_bins))
    if len(order) != n_bins:
        raise ValueError("order length does not match n_bins")
    pairs = [tuple(p) for p in pairs]
    interact = list(interact)
    if len(pairs) != len(interact):
        raise ValueError("need one interact flag per pair")
    seen: set[int] = set()
    for (a, b) in pairs:
        if b != a + 1:
            raise ValueError(f"pair ({a}, {b}) is not adjacent")
        if a in seen or b in seen:
            raise ValueError(f"bin {a if a in seen else b} assigned to two pairs")
        if a < 0 or b >= n_bins:
            raise ValueError(f"pair ({a}, {b}) out of range")
        seen.update((a, b))

    delays = list(delays) if delays is not None else [0] * n_bins
    events = []
    recorded_pairs = []
    paired: dict[int, tuple[str, str]] = {}
    for (a, b), flag in zip(pairs, interact):
        kind = "constraint" if flag else "identity"
        # Higher position = closer to the train front = first at the unit.
        paired[b] = (kind, "first")
        paired[a] = (kind, "second")
        recorded_pairs.append((a, b, kind))
    for pos in range(n_bins):
        if pos in paired:
            kind, role = paired[pos]
            rows = CONSTRAINT_ROWS if kind == "constraint" else IDENTITY_ROWS
            settings = rows[0] if role == "first" else rows[1]
        else:
            kind, role, settings = "identity", "solo", IDENTITY_ROWS[0]
        events.append(BinEvent(pos, order[pos], tuple(settings), kind, role,
                               BLOCK_DELAY_HALF_D, 2 * delays[pos]))
    after = apply_delays(order, delays) if any(delays) else list(order)
    return Round(round_index, order, after, events, recorded_pairs)


def compile_graph_program(graph: ProblemGraph, n_bins: int | None = None) -> SwitchProgram:
    """Full program: run the all-pairs shuffle, interacting exactly the edges.

    Sparse graphs still run the complete shuffle (correct, just not minimal);
    tailored reorderings are a separate compilation problem.
    """
    n = n_bins if n_bins is not None else graph.n_vertices
    if n < graph.n_vertices:
        raise ValueError("not enough bins for the graph")
    rounds = []
    for r, info in enumerate(all_pairs_shuffle(n)):
        order = info["order_before"]
        pairs, flags = [], []
        for (a, b) in info["eligible_pairs"]:
            edge = (min(order[a], order[b]), max(order[a], order[b]))
            pairs.append((a, b))
            flags.append(edge in graph.edges)
        rounds.append(compile_round(n, pairs, flags, order=order,
                                    round_index=r, delays=info["delays"]))
    return SwitchProgram(n, rounds)


@dataclass
class VerificationReport:
    violations: list[str]
    edges_covered: set[tuple[int, int]]
    constraints_applied: list[tuple[int, int]]

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_program(program: SwitchProgram, graph: ProblemGraph) -> VerificationReport:
    """Check a program realizes exactly the graph's edges.

    Violations reported: malformed switch rows, broken 3D/2 block accounting,
    bins claimed by two pairs, delay bookkeeping that does not reproduce the
    recorded reordering, edges never realized, and constraints applied
    between non-adjacent vertices.
    """
    violations: list[str] = []
    covered: set[tuple[int, int]] = set()
    applied: list[tuple[int, int]] = []
    for rnd in program.rounds:
        by_pos = {e.position: e for e in rnd.events}
        if sorted(by_pos) != list(range(program.n_bins)):
            violations.append(f"round {rnd.index}: bin positions are not 0..n-1")
            continue
        seen: set[int] = set()
        for (a, b, kind) in rnd.pairs:
            if a in seen or b in seen:
                violations.append(f"round {rnd.index}: bin in two pairs")
            seen.update((a, b))
            rows = CONSTRAINT_ROWS if kind == "constraint" else IDENTITY_ROWS
            first, second = by_pos[b], by_pos[a]
            if first.settings != rows[0]:
                violations.append(
                    f"round {rnd.index}: first-bin settings {first.settings} "
                    f"do not match the {kind} row {rows[0]}")
            if second.settings != rows[1]:
                violations.append(
                    f"round {rnd.index}: second-bin settings {second.settings} "
                    f"do not match the {kind} row {rows[1]}")
            if kind == "constraint":
                u, v = sorted((rnd.order_before[a], rnd.order_before[b]))
                applied.append((u, v))
                if (u, v) in graph.edges:
                    covered.add((u, v))
                else:
                    violations.append(
                        f"round {rnd.index}: constraint between non-edge ({u}, {v})")
        for e in rnd.events:
            if e.role == "solo" and e.settings != IDENTITY_ROWS[0]:
                violations.append(
                    f"round {rnd.index}: solo bin {e.position} settings "
                    f"{e.settings} are not identity")
            if e.block_delay_half_d != BLOCK_DELAY_HALF_D:
                violations.append(
                    f"round {rnd.index}: bin {e.position} block delay "
                    f"{e.block_delay_half_d} half-units, expected {BLOCK_DELAY_HALF_D}")
        delays = [by_pos[p].shuffle_delay_half_d // 2 for p in range(program.n_bins)]
        try:
            after = apply_delays(rnd.order_before, delays)
        except ValueError as exc:
            violations.append(f"round {rnd.index}: {exc}")
            continue
        if after != rnd.order_after:
            violations.append(f"round {rnd.index}: recorded reordering does not "
                              "follow from the recorded delays")
    for edge in sorted(graph.edges):
        if edge not in covered:
            violations.append(f"edge {edge} never realized by a constraint block")
    return VerificationReport(violations, covered, applied)


def render_program(program: SwitchProgram) -> str:
    """Deterministic line-oriented text form of a program."""
    lines = [
        "# time-bin switch program",
        f"# n_bins {program.n_bins}",
        "# columns: round position mode s1 s2 s3 s4 block role "
        "block_delay_half_d shuffle_delay_half_d",
    ]
    for rnd in program.rounds:
        lines.append(f"# round {rnd.index} order_before "
                     + " ".join(map(str, rnd.order_before))
                     + " order_after " + " ".join(map(str, rnd.order_after)))
        for e in sorted(rnd.events, key=lambda e: e.position):
            s1, s2, s3, s4 = e.settings
            lines.append(f"{rnd.index} {e.position} {e.mode} {s1} {s2} {s3} {s4} "
                         f"{e.block} {e.role} {e.block_delay_half_d} "
                         f"{e.shuffle_delay_half_d}")
    return "\n".join(lines) + "\n"
