"""Exhaustive enumerators used as an oracle for the catalog tables.

Nothing here uses generating functions.  Lattice paths are generated
explicitly as a numpy "frontier" of all feasible prefixes (one row per
prefix, pruned when the endpoint becomes unreachable; the watermelon frontier
merges equal states with multiplicities), permutations by a
depth-first search over pattern-avoiding prefixes, and quarter-plane walks
by a memoized depth-first search over (time, x, y).

The statistic conventions mirror :mod:`qgibbs.models`: returns and contacts
are counted at positive times, except for wall watermelons where the starting
point counts as a contact.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

from .errors import DomainError, ResourceLimitError
from .models import (
    QUARTER_PLANE_STEPS,
    ColouredWalk,
    DyckBridge,
    DyckExcursion,
    Model,
    MotzkinBridge,
    MotzkinExcursion,
    PermFixedPoints,
    QuarterPlane,
    TwoWatermelon,
    WallWatermelon,
    WeightedMotzkinExcursion,
)
from .series import BivariateTable, exact

PATH_LIMIT = 12
PERM_LIMIT = 9
WATERMELON_M_LIMIT = 3
WATERMELON_N_LIMIT = 8
COLOURED_M_LIMIT = 3
COLOURED_LENGTH_LIMIT = 16
QUARTER_LENGTH_LIMIT = 16


def _refuse(what: str, limit: int):
    raise ResourceLimitError(f"brute force refuses {what} beyond {limit}")


# ---------------------------------------------------------------------------
# one-dimensional paths


def _walk_1d(length: int, steps, nonneg: bool, tally_flat: bool = False) -> Counter:
    """Generate all walks of ``length`` from 0 to 0; tally (returns[, flats]).

    The frontier holds one row per prefix; a prefix is dropped as soon as it
    cannot come back to 0 in the remaining steps (or dips below 0 when
    ``nonneg``).
    """
    height = np.zeros(1, dtype=np.int16)
    returns = np.zeros(1, dtype=np.int16)
    flats = np.zeros(1, dtype=np.int16)
    for t in range(length):
        remaining = length - t - 1
        hs, rs, fs = [], [], []
        for s in steps:
            h = height + s
            keep = np.abs(h) <= remaining
            if nonneg:
                keep &= h >= 0
            hs.append(h[keep])
            rs.append(returns[keep] + (h[keep] == 0))
            fs.append(flats[keep] + (1 if s == 0 else 0))
        height, returns, flats = np.concatenate(hs), np.concatenate(rs), np.concatenate(fs)
    if tally_flat:
        return Counter(zip(returns.tolist(), flats.tolist()))
    return Counter(returns.tolist())


def _path_row(model: Model, n: int) -> dict:
    if isinstance(model, DyckExcursion):
        return dict(_walk_1d(2 * n, (1, -1), True))
    if isinstance(model, DyckBridge):
        return dict(_walk_1d(2 * n, (1, -1), False))
    if isinstance(model, MotzkinExcursion):
        return dict(_walk_1d(n, (1, 0, -1), True))
    if isinstance(model, MotzkinBridge):
        return dict(_walk_1d(n, (1, 0, -1), False))
    if isinstance(model, WeightedMotzkinExcursion):
        row: dict = {}
        for (k, flat), count in _walk_1d(n, (1, 0, -1), True, tally_flat=True).items():
            ups = (n - flat) // 2
            w = count * model.p_flat**flat * (model.p_up * model.p_down) ** ups
            if w:
                row[k] = row.get(k, 0) + w
        return {k: exact(Fraction(v)) for k, v in row.items()}
    raise DomainError(f"not a one-dimensional path model: {model.spec}")


# ---------------------------------------------------------------------------
# watermelons


def vicious_ok(config, wall: bool) -> bool:
    """True iff no two walkers share a lattice point (and the lowest stays >= 0 with a wall).

    ``config`` is a sequence of walkers, each a sequence of heights at times
    0..L, listed bottom to top.
    """
    walkers = [list(w) for w in config]
    if not walkers:
        return True
    length = len(walkers[0])
    if any(len(w) != length for w in walkers):
        raise DomainError("all walkers must have the same length")
    for t in range(length):
        hs = [w[t] for w in walkers]
        if wall and min(hs) < 0:
            return False
        if len(set(hs)) != len(hs):
            return False
    return True


def friendly_ok(config) -> bool:
    """Two walkers listed bottom to top that may share points but never cross."""
    bottom, top = config
    if len(bottom) != len(top):
        raise DomainError("both walkers must have the same length")
    return all(b <= t for b, t in zip(bottom, top))


def _two_watermelon_row(n: int) -> dict:
    """Two +-1 walkers from a common start to a common end, never crossing.

    Contacts are the positive times at which the walkers meet.
    """
    # frontier over (bottom, top) heights relative to the start
    bottom = np.zeros(1, dtype=np.int16)
    top = np.zeros(1, dtype=np.int16)
    contacts = np.zeros(1, dtype=np.int16)
    for t in range(n):
        remaining = n - t - 1
        bs, ts, cs = [], [], []
        for sb in (1, -1):
            for st in (1, -1):
                b, tp = bottom + sb, top + st
                keep = (b <= tp) & (tp - b <= 2 * remaining)
                bs.append(b[keep])
                ts.append(tp[keep])
                cs.append(contacts[keep] + (b[keep] == tp[keep]))
        bottom, top, contacts = np.concatenate(bs), np.concatenate(ts), np.concatenate(cs)
    keep = bottom == top
    return dict(Counter(contacts[keep].tolist()))


def _wall_watermelon_row(m: int, n: int) -> dict:
    """m vicious walkers of length 2n starting and ending at 0, 2, ..., 2m-2 above a wall.

    Contacts are the times (including time 0) at which the lowest walker is at 0.
    Prefixes that agree on (heights, contacts) are merged into one frontier row
    carrying a multiplicity; at m = 3, n = 8 there are 37 million configurations.
    """
    length = 2 * n
    target = np.arange(0, 2 * m, 2, dtype=np.int64)
    heights = target[None, :].copy()
    contacts = np.ones(1, dtype=np.int64)
    mult = np.ones(1, dtype=np.int64)
    moves = np.array(np.meshgrid(*([[1, -1]] * m), indexing="ij")).reshape(m, -1).T
    for t in range(length):
        remaining = length - t - 1
        hs, cs, ws = [], [], []
        for mv in moves:
            h = heights + mv
            keep = (h[:, 0] >= 0) & np.all(np.abs(h - target) <= remaining, axis=1)
            if m > 1:
                keep &= np.all(np.diff(h, axis=1) > 0, axis=1)
            hs.append(h[keep])
            cs.append(contacts[keep] + (h[keep, 0] == 0))
            ws.append(mult[keep])
        state = np.column_stack([np.concatenate(hs), np.concatenate(cs)])
        state, inverse = np.unique(state, axis=0, return_inverse=True)
        mult = np.zeros(len(state), dtype=np.int64)
        np.add.at(mult, inverse.ravel(), np.concatenate(ws))
        heights, contacts = state[:, :m], state[:, m]
    row: Counter = Counter()
    for c, w in zip(contacts.tolist(), mult.tolist()):
        row[c] += w
    return dict(row)


# ---------------------------------------------------------------------------
# coloured walks


def _coloured_walk_row(m: int, length: int) -> dict:
    """All +-1 walks of the given length; each bridge prefix is cut into m coloured blocks.

    A walk with k returns has a bridge part made of k minimal bridges; the
    m-tuple of (possibly empty) bridges is a choice of m-1 cut points among
    the k+1 gaps, enumerated explicitly.
    """
    h = np.zeros(1, dtype=np.int16)
    r = np.zeros(1, dtype=np.int16)
    for _ in range(length):
        up, down = h + 1, h - 1
        r = np.concatenate([r + (up == 0), r + (down == 0)])
        h = np.concatenate([up, down])
    row: dict = {}
    for k, walks in Counter(r.tolist()).items():
        colourings = sum(1 for _ in combinations_with_replacement(range(k + 1), m - 1))
        row[k] = walks * colourings
    return row


# ---------------------------------------------------------------------------
# permutations


_PATTERNS = {132: (0, 2, 1), 213: (1, 0, 2), 321: (2, 1, 0)}


def _order_type(a, b, c):
    vals = (a, b, c)
    ranks = sorted(range(3), key=lambda i: vals[i])
    out = [0] * 3
    for rank, i in enumerate(ranks):
        out[i] = rank
    return tuple(out)


def avoids(perm, pattern: int) -> bool:
    """True iff ``perm`` (a permutation of 1..n) has no occurrence of ``pattern``."""
    if pattern not in _PATTERNS:
        raise DomainError(f"pattern must be one of 132, 213, 321, not {pattern}")
    perm = tuple(perm)
    if sorted(perm) != list(range(1, len(perm) + 1)):
        raise DomainError(f"{perm} is not a permutation of 1..{len(perm)}")
    target = _PATTERNS[pattern]
    n = len(perm)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if _order_type(perm[i], perm[j], perm[k]) == target:
                    return False
    return True


def _perm_row(pattern: int, n: int) -> dict:
    target = _PATTERNS[pattern]
    row: Counter = Counter()
    used = [False] * (n + 1)
    prefix: list = []

    def extends_ok(c):
        # only occurrences ending at the new entry need checking
        for i in range(len(prefix)):
            for j in range(i + 1, len(prefix)):
                if _order_type(prefix[i], prefix[j], c) == target:
                    return False
        return True

    def dfs():
        if len(prefix) == n:
            row[sum(1 for i, v in enumerate(prefix, 1) if i == v)] += 1
            return
        for c in range(1, n + 1):
            if not used[c] and extends_ok(c):
                used[c] = True
                prefix.append(c)
                dfs()
                prefix.pop()
                used[c] = False

    dfs()
    return dict(row)


# ---------------------------------------------------------------------------
# quarter plane


def _quarter_plane_row(model: QuarterPlane, length: int) -> dict:
    xs, ys = QUARTER_PLANE_STEPS[model.kind]
    steps = [(dx, dy) for dx in xs for dy in ys]

    @lru_cache(maxsize=None)
    def walks(t, x, y):
        """Contacts still to come, as a sorted tuple of (contacts, count), from (x, y) at time t."""
        if t == length:
            return ((0, 1),) if x == 0 and y == 0 else ()
        remaining = length - t
        if x > remaining or y > remaining:
            return ()
        acc: Counter = Counter()
        for dx, dy in steps:
            nx, ny = x + dx, y + dy
            if nx < 0 or ny < 0:
                continue
            hit = (ny == 0) if model.axis == "x" else (nx == 0)
            for k, c in walks(t + 1, nx, ny):
                acc[k + hit] += c
        return tuple(sorted(acc.items()))

    return dict(walks(0, 0, 0))


# ---------------------------------------------------------------------------


def brute_row(model: Model, n: int) -> dict:
    """Exact ``{k: count}`` for size ``n`` by exhaustive generation."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    if isinstance(model, (DyckExcursion, DyckBridge, MotzkinExcursion, MotzkinBridge, WeightedMotzkinExcursion, TwoWatermelon)):
        if n > PATH_LIMIT:
            _refuse("paths", PATH_LIMIT)
        if isinstance(model, TwoWatermelon):
            return _two_watermelon_row(n)
        return _path_row(model, n)
    if isinstance(model, PermFixedPoints):
        if n > PERM_LIMIT:
            _refuse("permutations", PERM_LIMIT)
        return _perm_row(model.pattern, n)
    if isinstance(model, WallWatermelon):
        if model.m > WATERMELON_M_LIMIT or n > WATERMELON_N_LIMIT:
            _refuse("watermelons", WATERMELON_N_LIMIT)
        return _wall_watermelon_row(model.m, n)
    if isinstance(model, ColouredWalk):
        if model.m > COLOURED_M_LIMIT or n > COLOURED_LENGTH_LIMIT:
            _refuse("coloured walks", COLOURED_LENGTH_LIMIT)
        return _coloured_walk_row(model.m, n)
    if isinstance(model, QuarterPlane):
        length = n if model.kind == "king" else 2 * n
        if length > QUARTER_LENGTH_LIMIT:
            _refuse("quarter-plane walks of length", QUARTER_LENGTH_LIMIT)
        return _quarter_plane_row(model, length)
    raise DomainError(f"no oracle for {model!r}")


def oracle_limit(model: Model) -> int:
    """Largest index ``n`` the oracle accepts for ``model``."""
    if isinstance(model, PermFixedPoints):
        return PERM_LIMIT
    if isinstance(model, WallWatermelon):
        return WATERMELON_N_LIMIT if model.m <= WATERMELON_M_LIMIT else -1
    if isinstance(model, ColouredWalk):
        return COLOURED_LENGTH_LIMIT if model.m <= COLOURED_M_LIMIT else -1
    if isinstance(model, QuarterPlane):
        return QUARTER_LENGTH_LIMIT if model.kind == "king" else QUARTER_LENGTH_LIMIT // 2
    return PATH_LIMIT


def brute_table(model: Model, max_n: int) -> BivariateTable:
    rows = {n: brute_row(model, n) for n in range(max_n + 1)}
    return BivariateTable(model.spec, max_n, rows)
