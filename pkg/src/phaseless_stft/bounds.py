"""Closed-form measurement-count bounds and the proof-prescribed index sets.

Known window:   2(2W-1) + ceil((4a-1)(N-(W+a))/a)      (a = gcd(L, N))
Unknown window: 3(2W-1) + ceil((4a-1)(N-(W+2a))/a)

The second term clamps at zero when Step 1 already determines everything.
The index-set constructors emit Step-1 blocks of 2W-1 frequencies at the
prescribed sections plus one recursion block per Step-2 stage, sized so the
total matches the bound exactly (the final stage needs only 4a'-1 samples
for its a' remaining entries; it gets ceil((4a-1) a'/a) >= 4a'-1).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

from .core import ProblemParams, shift_index
from .errors import ParameterError

__all__ = [
    "BoundReport",
    "known_window_bound",
    "blind_bound",
    "known_window_measurement_set",
    "blind_measurement_set",
    "blind_solver_measurement_set",
    "recursion_plan",
    "pin_section",
    "bound_report",
    "bound_curves",
    "BOUND_CURVE_COLUMNS",
]

BOUND_CURVE_COLUMNS = ("L", "W", "known", "blind", "cap_known", "cap_blind")


@dataclass(frozen=True)
class BoundReport:
    known_window_count: int
    blind_count: int
    four_N: int
    four_N_plus_2W: int
    alpha: int


def _recursion_term(params: ProblemParams, reserved: int) -> int:
    """ceil((4a-1) * (N - reserved) / a), clamped at zero."""
    remaining = params.N - reserved
    if remaining <= 0:
        return 0
    return ceil((4 * params.alpha - 1) * remaining / params.alpha)


def known_window_bound(params: ProblemParams) -> int:
    return 2 * (2 * params.W - 1) + _recursion_term(params, params.W + params.alpha)


def blind_bound(params: ProblemParams) -> int:
    return 3 * (2 * params.W - 1) + _recursion_term(params, params.W + 2 * params.alpha)


def bound_report(params: ProblemParams) -> BoundReport:
    return BoundReport(
        known_window_count=known_window_bound(params),
        blind_count=blind_bound(params),
        four_N=4 * params.N,
        four_N_plus_2W=4 * params.N + 2 * params.W,
        alpha=params.alpha,
    )


def recursion_plan(params: ProblemParams, reserved: int) -> list[tuple[int, int, int]]:
    """Step-2 stages as (j, block_size, new_entry_count) triples.

    Stage t recovers the a (or fewer, at the end) signal entries feeding
    section j*alpha, j = t+1, from block_size intensity samples there.
    Block sizes sum to the recursion term of the bound.
    """
    a = params.alpha
    remaining = params.N - reserved
    plan = []
    if remaining <= 0:
        return plan
    steps = ceil(remaining / a)
    for t in range(1, steps + 1):
        new = min(a, remaining - (t - 1) * a)
        size = (4 * a - 1) if new == a else ceil((4 * a - 1) * new / a)
        plan.append((t + 1, size, new))
    return plan


def _check_feasible(params: ProblemParams, min_R: int) -> None:
    if params.N < 2 * params.W - 1:
        raise ParameterError(
            f"Step 1 needs 2W-1 = {2 * params.W - 1} distinct frequencies but N={params.N}"
        )
    if params.R < min_R:
        raise ParameterError(f"need at least {min_R} distinct sections, R={params.R}")


class _BlockAllocator:
    """Hands out the next unused frequencies at each section.

    Distinct blocks usually live at distinct sections, but at grid edges
    (W < alpha) the recursion can wrap onto a Step-1 section; the extra block
    then simply samples further frequencies there.
    """

    def __init__(self, params: ProblemParams):
        self._params = params
        self._used: dict[int, int] = {}

    def take(self, r: int, size: int) -> list[tuple[int, int]]:
        start = self._used.get(r, 0)
        if start + size > self._params.N:
            raise ParameterError(
                f"section r={r} would need {start + size} distinct frequencies, N={self._params.N}"
            )
        self._used[r] = start + size
        return [(m, r) for m in range(start, start + size)]


def known_window_blocks(params: ProblemParams):
    """[(label, j, index list)] for the two Step-1 blocks and each Step-2 stage."""
    _check_feasible(params, min_R=2)
    alloc = _BlockAllocator(params)
    blocks = [("step1", 0, alloc.take(0, 2 * params.W - 1))]
    blocks.append(("step1", 1, alloc.take(shift_index(params, 1), 2 * params.W - 1)))
    for j, size, _ in recursion_plan(params, params.W + params.alpha):
        blocks.append(("step2", j, alloc.take(shift_index(params, j), size)))
    return blocks


def known_window_measurement_set(params: ProblemParams) -> list[tuple[int, int]]:
    """Step-1 blocks at sections 0 and alpha plus the Step-2 blocks.

    Size equals known_window_bound(params).
    """
    return [k for _, _, block in known_window_blocks(params) for k in block]


def blind_blocks(params: ProblemParams):
    """[(label, j, index list)] for the three Step-1 blocks and each Step-2 stage."""
    _check_feasible(params, min_R=3)
    alloc = _BlockAllocator(params)
    blocks = [("step1", 0, alloc.take(0, 2 * params.W - 1))]
    for j in (1, -1):
        blocks.append(("step1", j, alloc.take(shift_index(params, j), 2 * params.W - 1)))
    for j, size, _ in recursion_plan(params, params.W + 2 * params.alpha):
        blocks.append(("step2", j, alloc.take(shift_index(params, j), size)))
    return blocks


def blind_measurement_set(params: ProblemParams) -> list[tuple[int, int]]:
    """Step-1 blocks at sections 0, alpha, -alpha plus the Step-2 blocks.

    Size equals blind_bound(params).
    """
    return [k for _, _, block in blind_blocks(params) for k in block]


def pin_section(params: ProblemParams) -> int:
    """Section index j whose window straddles the recursion wraparound boundary.

    The Theorem-2 blocks determine the pair only up to a continuous twist;
    a block at a section crossing the boundary N-W-alpha quantizes it to the
    Z_R ambiguity.  Exists iff W > alpha.
    """
    if params.W <= params.alpha:
        raise ParameterError("no straddling section exists when W <= alpha")
    boundary = params.N - params.W - params.alpha
    return boundary // params.alpha + 1


def blind_solver_measurement_set(params: ProblemParams) -> list[tuple[int, int]]:
    """blind_measurement_set plus the (4*alpha-1)-sample pin block.

    When alpha divides N-W-2*alpha the pin lives at its own section past the
    recursion; otherwise the final recursion block already straddles the
    boundary and the pin block extends it in place (the union is deduplicated,
    so the extra cost is 4*alpha-1 minus the final block's own size).
    """
    out = blind_measurement_set(params)
    if 4 * params.alpha - 1 > params.N:
        raise ParameterError(f"pin block needs 4*alpha-1 <= N, got alpha={params.alpha}, N={params.N}")
    rp = shift_index(params, pin_section(params))
    seen = set(out)
    pin = [(m, rp) for m in range(4 * params.alpha - 1)]
    return out + [k for k in pin if k not in seen]


def bound_curves(N: int, L_list, W_range) -> list[dict]:
    """Rows (L, W, known, blind, cap_known, cap_blind) for plotting."""
    from .core import make_params

    rows = []
    for L in L_list:
        for W in W_range:
            p = make_params(N, W, L)
            rows.append(
                {
                    "L": int(L),
                    "W": int(W),
                    "known": known_window_bound(p),
                    "blind": blind_bound(p),
                    "cap_known": 4 * N,
                    "cap_blind": 4 * N + 2 * int(W),
                }
            )
    return rows
