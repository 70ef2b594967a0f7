"""Exhaustive ground truth for small mapping instances.

Everything here is deliberately independent of the swarm's internals: the
Pareto filter is the plain quadratic dominance check, and the optimum is a
linear scan over the full enumeration. Used to validate optimizer output and
exposed through the CLI's verify command.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterator

from .model import ClusteredSnn, HardwareConfig, Mapping
from .swarm import EvalContext, Evaluation, FrontPoint, InfeasibleError, ParetoFront

ENUMERATION_GUARD = 10 ** 6


class GuardExceededError(RuntimeError):
    """The instance is too large to enumerate within the configured guard."""

    def __init__(self, count: int, limit: int) -> None:
        super().__init__(
            f"instance admits {count} feasible assignments, over the enumeration "
            f"guard of {limit}"
        )
        self.count = count
        self.limit = limit


def count_feasible_mappings(num_clusters: int, num_tiles: int, capacity: int) -> int:
    """Exact count of capacity-respecting assignments.

    DP over tiles: choosing which s of the r unplaced clusters a tile hosts
    contributes comb(r, s) branches, so the count never requires enumeration.
    """
    dp = [0] * (num_clusters + 1)
    dp[num_clusters] = 1  # all clusters still unplaced
    for _ in range(num_tiles):
        nxt = [0] * (num_clusters + 1)
        for r, ways in enumerate(dp):
            if ways == 0:
                continue
            for s in range(min(capacity, r) + 1):
                nxt[r - s] += ways * comb(r, s)
        dp = nxt
    return dp[0]


def enumerate_mappings(snn: ClusteredSnn, hw: HardwareConfig) -> Iterator[Mapping]:
    """Yield every feasible mapping exactly once, in lexicographic assignment
    order. The guard and feasibility checks fire eagerly at call time."""
    num_clusters = len(snn.clusters)
    if num_clusters > hw.total_capacity:
        raise InfeasibleError(
            f"{num_clusters} clusters exceed total capacity {hw.total_capacity}"
        )
    count = count_feasible_mappings(num_clusters, hw.num_tiles, hw.tile_capacity)
    if count > ENUMERATION_GUARD:
        raise GuardExceededError(count, ENUMERATION_GUARD)

    loads = [0] * hw.num_tiles
    assignment = [0] * num_clusters

    def rec(i: int) -> Iterator[Mapping]:
        if i == num_clusters:
            yield Mapping(assignment)
            return
        for tile in range(hw.num_tiles):
            if loads[tile] < hw.tile_capacity:
                loads[tile] += 1
                assignment[i] = tile
                yield from rec(i + 1)
                loads[tile] -= 1

    return rec(0)


@dataclass(frozen=True)
class BruteForceOptimum:
    mapping: Mapping
    evaluation: Evaluation


def brute_force_optimum(
    snn: ClusteredSnn, hw: HardwareConfig, ctx: EvalContext
) -> BruteForceOptimum:
    """Exact argmin of lambda over the feasible set; lexicographic first on ties."""
    best: tuple[Mapping, Evaluation] | None = None
    for m in enumerate_mappings(snn, hw):
        ev = ctx.evaluate(m)
        if best is None or ev.lam < best[1].lam:
            best = (m, ev)
    if best is None:
        raise InfeasibleError("no feasible mapping")
    return BruteForceOptimum(mapping=best[0], evaluation=best[1])


def brute_force_pareto(
    snn: ClusteredSnn, hw: HardwareConfig, ctx: EvalContext
) -> ParetoFront:
    """Exact non-dominated set over all feasible mappings, by the quadratic
    dominance filter (kept separate from the swarm's sweep on purpose)."""
    pts = [
        FrontPoint(mapping=m, tau=ev.tau, aging=ev.aging)
        for m in enumerate_mappings(snn, hw)
        for ev in (ctx.evaluate(m),)
    ]
    front = [
        p
        for p in pts
        if not any(
            q.tau <= p.tau
            and q.aging <= p.aging
            and (q.tau < p.tau or q.aging < p.aging)
            for q in pts
        )
    ]
    front.sort(key=lambda p: (p.tau, p.aging, p.mapping.assignment))
    return ParetoFront(points=tuple(front))
