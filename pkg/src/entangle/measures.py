"""Combinatorial entropy measures: CEF, the entanglement combination, and CE."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from .errors import NumericalAmbiguity, SizeLimit, TrivialSubset
from .state import (
    DEFAULT_TOLERANCES,
    PartySubset,
    PureState,
    Tolerances,
    entropy_of_spectrum,
    rank_of_spectrum,
    reduced_pure_state,
    subset_spectrum,
)

MAX_PARTIES = 20

# a relative eigenvalue this close to rank_eps (either side) makes the
# separability call tolerance-dependent
AMBIGUITY_FACTOR = 10.0


@dataclass(frozen=True)
class EntanglementCombination:
    """Partition of the parties into fully entangled blocks, in discovery order."""

    blocks: tuple[PartySubset, ...]
    n: int

    def __post_init__(self):
        seen = 0
        for block in self.blocks:
            if block.n != self.n:
                raise ValueError("block party count does not match")
            if block.is_empty():
                raise ValueError("empty block")
            if seen & block.mask:
                raise ValueError("blocks overlap")
            seen |= block.mask
        if seen != (1 << self.n) - 1:
            raise ValueError("blocks do not cover every party")

    @property
    def r(self) -> int:
        return len(self.blocks)

    def canonical(self) -> EntanglementCombination:
        """Blocks sorted by their smallest party; use this for equality tests."""
        return EntanglementCombination(
            tuple(sorted(self.blocks, key=lambda b: b.parties[0])), self.n
        )

    def is_separable(self) -> bool:
        return self.r == self.n

    def is_fully_entangled(self) -> bool:
        return self.r == 1

    def as_lists(self) -> list[list[int]]:
        """Blocks as lists of 1-based party indices."""
        return [[k + 1 for k in b.parties] for b in self.blocks]

    def block_of(self, party: int) -> PartySubset:
        for b in self.blocks:
            if party in b:
                return b
        raise KeyError(party)

    def __str__(self):
        return "[" + ",".join(b.label() for b in self.blocks) + "]"


@dataclass(frozen=True)
class CEReport:
    dims: tuple[int, ...]
    ce: float
    ec: EntanglementCombination
    block_cefs: tuple[tuple[PartySubset, float], ...]
    subset_entropies: Optional[dict[PartySubset, float]]
    tolerances: Tolerances
    normalized_input: bool = False


def _check_parties(n: int, max_parties: int):
    if n > max_parties:
        raise SizeLimit(f"{n} parties exceed the subset enumeration cap of {max_parties}")


def _half_subsets(n: int) -> list[PartySubset]:
    # subsets without the last party; each pairs with its complement
    return [PartySubset(mask, n) for mask in range(1, 1 << (n - 1))]


def _entropy_table(state: PureState, threads: int) -> list[tuple[PartySubset, float]]:
    subsets = _half_subsets(state.n)

    def one(subset):
        return entropy_of_spectrum(subset_spectrum(state, subset))

    if threads > 1 and len(subsets) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(one, subsets))
    else:
        values = [one(s) for s in subsets]
    return list(zip(subsets, values))


def _cef_from_table(table) -> float:
    # each half-table entry stands for the subset and its complement, so
    # the factor 1/2 cancels the doubling
    total = 0.0
    for _, value in table:
        total += value
    return total


def cef(state: PureState, *, threads: int = 1, max_parties: int = MAX_PARTIES) -> float:
    """Half the sum of partial entropies over all nontrivial subsets (bits).

    Zero for a single party.  The formula is evaluated whether or not the
    state is actually fully entangled.
    """
    if state.n == 1:
        return 0.0
    _check_parties(state.n, max_parties)
    return _cef_from_table(_entropy_table(state, threads))


def is_block_separable(
    state: PureState, subset: PartySubset, tol: Tolerances = DEFAULT_TOLERANCES
) -> bool:
    """True iff ``subset`` is a pure tensor factor (Schmidt rank one)."""
    if not subset.is_nontrivial():
        raise TrivialSubset(f"subset {subset.label()} must be neither empty nor full")
    return rank_of_spectrum(subset_spectrum(state, subset), tol) == 1


def _separable_checked(state: PureState, subset: PartySubset, tol: Tolerances) -> bool:
    w = subset_spectrum(state, subset)
    top = float(w[-1])
    low, high = tol.rank_eps / AMBIGUITY_FACTOR, tol.rank_eps * AMBIGUITY_FACTOR
    for value in w[:-1]:
        ratio = float(value) / top
        if low < ratio < high:
            raise NumericalAmbiguity(
                f"eigenvalue ratio {ratio:.3e} of a reduced state is within a factor "
                f"{AMBIGUITY_FACTOR:g} of the rank threshold {tol.rank_eps:g}",
                subset=subset,
                ratio=ratio,
            )
    return rank_of_spectrum(w, tol) == 1


def entanglement_combination(
    state: PureState,
    tol: Tolerances = DEFAULT_TOLERANCES,
    *,
    max_parties: int = MAX_PARTIES,
) -> EntanglementCombination:
    """Split the parties into fully entangled blocks.

    Subsets of the remaining parties are tested by increasing size ``m``
    up to half the remaining count, lexicographically within a size.  A
    separable subset becomes the next block and is traced away; the
    search then resumes at the same ``m``.  Whatever is left at the end is
    the final block.
    """
    n = state.n
    _check_parties(n, max_parties)
    blocks: list[PartySubset] = []
    remaining = list(range(n))
    current = state
    m = 1
    while m <= len(remaining) // 2:
        local_n = len(remaining)
        for combo in combinations(range(local_n), m):
            local = PartySubset.of(combo, local_n)
            if _separable_checked(current, local, tol):
                blocks.append(PartySubset.of((remaining[k] for k in combo), n))
                current = reduced_pure_state(current, local.complement(), tol)
                remaining = [p for k, p in enumerate(remaining) if k not in combo]
                break
        else:
            m += 1
    if remaining:
        blocks.append(PartySubset.of(remaining, n))
    return EntanglementCombination(tuple(blocks), n)


def _lift(local: PartySubset, block: PartySubset) -> PartySubset:
    parties = block.parties
    return PartySubset.of((parties[k] for k in local.parties), block.n)


def ce(
    state: PureState,
    tol: Tolerances = DEFAULT_TOLERANCES,
    detail: bool = False,
    *,
    threads: int = 1,
    max_parties: int = MAX_PARTIES,
    normalized_input: bool = False,
) -> CEReport:
    """Combinatorial entropy: the sum of CEF over the blocks of the EC.

    With ``detail`` the report maps every within-block nontrivial subset
    (as a subset of the full party set) to the entropy that was summed.
    """
    ec = entanglement_combination(state, tol, max_parties=max_parties)
    block_cefs = []
    entropies: dict[PartySubset, float] | None = {} if detail else None
    total = 0.0
    for block in ec.blocks:
        if block.size == 1:
            value = 0.0
        else:
            factor = reduced_pure_state(state, block, tol)
            table = _entropy_table(factor, threads)
            value = _cef_from_table(table)
            if entropies is not None:
                for local, s in table:
                    entropies[_lift(local, block)] = s
                    entropies[_lift(local.complement(), block)] = s
        block_cefs.append((block, value))
        total += value
    if entropies is not None:
        entropies = dict(sorted(entropies.items(), key=lambda kv: (kv[0].size, kv[0].parties)))
    return CEReport(
        dims=state.dims,
        ce=total,
        ec=ec,
        block_cefs=tuple(block_cefs),
        subset_entropies=entropies,
        tolerances=tol,
        normalized_input=normalized_input,
    )
