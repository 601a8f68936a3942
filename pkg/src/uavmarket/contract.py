"""Per-subregion contract construction and self-selection auditing.

The owner cannot observe UAV cost types, so it publishes a menu of
(coverage, reward) items built so that each announced type picks the item
meant for it. Types are collapsed onto a one-dimensional ladder ordered by
the marginal cost of coverage ``upsilon = phi * (alpha + beta)``; coverage
targets come from a closed form evaluated per rung, monotonicity is
repaired by pooling if needed, and rewards are set by a backward recursion
that leaves the costliest type exactly at break-even.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import Subregion
from .economics import ContractItem, EconomyParams

AUDIT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Announcement:
    """The cost type one UAV reports to one subregion after screening."""

    uav_id: str
    alpha: float
    beta: float
    psi: float = 0.0
    zeta: float = 0.0


@dataclass(frozen=True)
class AuxiliaryType:
    """A ladder rung: one announcer at its position in the marginal-cost order."""

    rank: int            # 1-based, 1 = cheapest coverage
    uav_id: str
    alpha: float
    beta: float
    upsilon: float
    psi: float = 0.0
    zeta: float = 0.0

    def __post_init__(self):
        if self.upsilon <= 0:
            raise ValueError("upsilon must be > 0")


@dataclass(frozen=True)
class AuditReport:
    """Result of checking a schedule's participation and self-selection logic.

    ``worst_ic_violation`` is the largest gain any type could get by taking
    another type's item; at or below tolerance means no profitable misreport.
    ``binding_ir_rank`` is the rank whose own-item payoff is smallest.
    """

    ir_ok: bool
    ic_ok: bool
    monotone_ok: bool
    worst_ic_violation: float
    binding_ir_rank: int


@dataclass(frozen=True)
class ContractSchedule:
    """The published menu for one subregion, plus its audit.

    ``ladder`` and ``items`` are aligned: item ``i`` is meant for the type
    at rank ``i + 1``. All items share the same fixed reward.
    """

    subregion_id: str
    ladder: tuple[AuxiliaryType, ...]
    items: tuple[ContractItem, ...]
    reward_hat: float
    audit: AuditReport

    def __post_init__(self):
        if len(self.ladder) != len(self.items):
            raise ValueError("ladder and items must have equal length")
        object.__setattr__(self, "ladder", tuple(self.ladder))
        object.__setattr__(self, "items", tuple(self.items))

    def rank_of(self, uav_id: str) -> int | None:
        for aux in self.ladder:
            if aux.uav_id == uav_id:
                return aux.rank
        return None

    def item_for(self, uav_id: str) -> ContractItem | None:
        rank = self.rank_of(uav_id)
        return None if rank is None else self.items[rank - 1]

    def coverage_rewards(self) -> tuple[float, ...]:
        return tuple(item.coverage_reward for item in self.items)

    def with_coverage_rewards(self, rewards: Sequence[float]) -> "ContractSchedule":
        """Same menu with a replaced reward vector, re-audited."""
        if len(rewards) != len(self.items):
            raise ValueError("reward vector length mismatch")
        items = tuple(
            item.with_coverage_reward(r) for item, r in zip(self.items, rewards)
        )
        return ContractSchedule(
            self.subregion_id,
            self.ladder,
            items,
            self.reward_hat,
            _audit(self.ladder, items, AUDIT_TOLERANCE),
        )


def marginal_cost(alpha: float, beta: float, phi: float) -> float:
    """Energy bill of one extra unit of coverage: ``phi * (alpha + beta)``."""
    if alpha <= 0 or beta <= 0 or phi <= 0:
        raise ValueError("alpha, beta, and phi must be > 0")
    return phi * (alpha + beta)


def sort_ladder(announcements: Sequence[Announcement], phi: float) -> list[AuxiliaryType]:
    """Order announcers by ascending marginal cost of coverage.

    Ties are broken by lower traversal cost, then lower upload cost, then
    announcement order, so ladders are deterministic.
    """
    if not announcements:
        raise ValueError("at least one announcement is required")
    keyed = sorted(
        enumerate(announcements),
        key=lambda pair: (
            marginal_cost(pair[1].alpha, pair[1].beta, phi),
            pair[1].psi,
            pair[1].zeta,
            pair[0],
        ),
    )
    return [
        AuxiliaryType(
            rank=i + 1,
            uav_id=a.uav_id,
            alpha=a.alpha,
            beta=a.beta,
            upsilon=marginal_cost(a.alpha, a.beta, phi),
            psi=a.psi,
            zeta=a.zeta,
        )
        for i, (_, a) in enumerate(keyed)
    ]


def optimal_coverage(aux: AuxiliaryType, sub: Subregion, econ: EconomyParams) -> float:
    """Profit-maximising coverage for this rung, clamped into [0, 1].

    Closed form: ``(sigma / (N * upsilon) - 1) / (mu * data_volume)``;
    cheap types are asked to cover more.
    """
    raw = (econ.sigma / (econ.n_subregions * aux.upsilon) - 1.0) / (econ.mu * sub.data_volume)
    return min(1.0, max(0.0, raw))


def iron_schedule(coverages: Sequence[float]) -> list[float]:
    """Repair a coverage ladder into non-increasing order by pooling.

    Adjacent entries that violate the order are replaced by their
    arithmetic mean, repeatedly, until the whole sequence is monotone.
    Already monotone input comes back unchanged.
    """
    blocks: list[tuple[float, int]] = []  # (sum, count), earliest first
    for value in coverages:
        total, count = float(value), 1
        # a later block must not average above an earlier one
        while blocks and blocks[-1][0] * count < total * blocks[-1][1]:
            prev_total, prev_count = blocks.pop()
            total += prev_total
            count += prev_count
        blocks.append((total, count))
    out: list[float] = []
    for total, count in blocks:
        out.extend([total / count] * count)
    return out


def reward_schedule(
    ladder: Sequence[AuxiliaryType],
    coverages: Sequence[float],
    reward_hat: float,
) -> list[ContractItem]:
    """Backward reward recursion over a monotone coverage ladder.

    The costliest rung is paid exactly its coverage-linked cost; every
    rung above is paid the next rung's reward plus its own marginal cost
    on the extra coverage it takes on. Requires non-increasing coverages.
    """
    if len(ladder) != len(coverages):
        raise ValueError("ladder and coverages must have equal length")
    for a, b in zip(coverages, coverages[1:]):
        if b > a + 1e-12:
            raise ValueError("coverages must be non-increasing; run iron_schedule first")
    n = len(ladder)
    rewards = [0.0] * n
    rewards[-1] = ladder[-1].upsilon * coverages[-1]
    for i in range(n - 2, -1, -1):
        rewards[i] = rewards[i + 1] + ladder[i].upsilon * (coverages[i] - coverages[i + 1])
    return [
        ContractItem(theta=theta, coverage_reward=r, fixed_reward=reward_hat)
        for theta, r in zip(coverages, rewards)
    ]


def build_schedule(
    announcements: Sequence[Announcement],
    sub: Subregion,
    econ: EconomyParams,
    reward_hat: float = 0.0,
) -> ContractSchedule:
    """Full pipeline: ladder, coverage targets, pooling, rewards, audit."""
    ladder = tuple(sort_ladder(announcements, econ.phi))
    coverages = iron_schedule([optimal_coverage(aux, sub, econ) for aux in ladder])
    items = tuple(reward_schedule(ladder, coverages, reward_hat))
    return ContractSchedule(
        subregion_id=sub.id,
        ladder=ladder,
        items=items,
        reward_hat=reward_hat,
        audit=_audit(ladder, items, AUDIT_TOLERANCE),
    )


def menu_utility(schedule: ContractSchedule, rank: int, item_rank: int) -> float:
    """Coverage-linked payoff of the type at ``rank`` taking the item at ``item_rank``."""
    aux = schedule.ladder[rank - 1]
    item = schedule.items[item_rank - 1]
    return item.coverage_reward - aux.upsilon * item.theta


def _audit(
    ladder: Sequence[AuxiliaryType],
    items: Sequence[ContractItem],
    tolerance: float,
) -> AuditReport:
    n = len(ladder)
    own = [items[i].coverage_reward - ladder[i].upsilon * items[i].theta for i in range(n)]
    ir_ok = all(u >= -tolerance for u in own)
    worst = 0.0 if n <= 1 else -float("inf")
    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            cross = items[k].coverage_reward - ladder[i].upsilon * items[k].theta
            worst = max(worst, cross - own[i])
    thetas = [item.theta for item in items]
    rewards = [item.coverage_reward for item in items]
    monotone_ok = all(
        b <= a + tolerance for a, b in zip(thetas, thetas[1:])
    ) and all(b <= a + tolerance for a, b in zip(rewards, rewards[1:]))
    return AuditReport(
        ir_ok=ir_ok,
        ic_ok=worst <= tolerance,
        monotone_ok=monotone_ok,
        worst_ic_violation=worst,
        binding_ir_rank=min(range(1, n + 1), key=lambda r: own[r - 1]) if n else 0,
    )


def audit_schedule(schedule: ContractSchedule, tolerance: float = AUDIT_TOLERANCE) -> AuditReport:
    """Check participation, self-selection, and monotonicity of a menu.

    Self-selection is checked over the full rank-by-item matrix, not just
    adjacent rungs. Fixed rewards are identical across items, so they
    cancel out of every comparison and the check runs on coverage-linked
    payoffs alone.
    """
    return _audit(schedule.ladder, schedule.items, tolerance)


def select_winner(schedule: ContractSchedule) -> list[AuxiliaryType]:
    """The cheapest rung(s) of the ladder.

    Normally a single entry; all entries tied at the minimum marginal cost
    are surfaced so the matching layer can resolve them by calibration.
    """
    if not schedule.ladder:
        raise ValueError("schedule has an empty ladder")
    best = schedule.ladder[0].upsilon
    return [aux for aux in schedule.ladder if aux.upsilon == best]
