"""Sudoku boards encoded as QUBO problems, clue clamping, and verification.

One binary variable per (row, column, digit) triple indicates that the cell
holds that digit; the vector index of (i, j, k) is n^4*(i-1) + n^2*(j-1) + k
for block size n.  The objective counts rule violations: the constant is the
number of one-hot constraints (4 n^4), every variable carries diagonal -4
(it appears in exactly four constraints), and every pair of variables that
cannot be simultaneously set carries an off-diagonal entry.  Pairs that
clash through more than one rule at once (same row and same block, or same
column and same block) are counted once, so all pair couplings share one
strength; the objective is zero exactly on valid boards and positive
otherwise.

Clamping fixes the clue variables to one, propagates the implied zeros, and
restricts the matrix to the surviving free variables; cross terms against
fixed ones are folded into the reduced diagonal (x = x^2) and the all-fixed
residue becomes an additive constant.

Board text format: one character per cell, row-major, digits with '0' or '.'
for empty cells (block sizes 2 and 3).  For larger blocks a comma-separated
list of n^4 integers is accepted, 0 meaning empty.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ising import QuboModel
from .mps import SpinConfiguration

__all__ = [
    "Board",
    "ClampMap",
    "DecodeResult",
    "Verdict",
    "InconsistentCluesError",
    "parse_board",
    "board_to_text",
    "full_qubo",
    "clamp",
    "decode",
    "verify",
    "random_solution",
    "make_puzzle",
    "solution_configuration",
]


class InconsistentCluesError(ValueError):
    """Two clues violate a rule directly; carries the conflicting cells."""

    def __init__(self, message: str, conflict=None):
        super().__init__(message)
        self.conflict = conflict


@dataclass(frozen=True)
class Board:
    """An n^2 x n^2 grid; 0 marks an empty cell."""

    block_size: int
    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.block_size
        if n < 2:
            raise ValueError(f"block size must be >= 2, got {n}")
        side = n * n
        if len(self.cells) != side or any(len(row) != side for row in self.cells):
            raise ValueError(f"board must be {side}x{side}")
        for row in self.cells:
            for v in row:
                if not 0 <= v <= side:
                    raise ValueError(f"cell value {v} out of range 0..{side}")

    @property
    def side(self) -> int:
        return self.block_size ** 2

    def clue_count(self) -> int:
        return sum(1 for row in self.cells for v in row if v != 0)

    def is_complete(self) -> bool:
        return all(v != 0 for row in self.cells for v in row)

    def clues(self) -> list[tuple[int, int, int]]:
        """(row, column, digit) triples of the filled cells, 1-based."""
        return [
            (i, j, self.cells[i - 1][j - 1])
            for i in range(1, self.side + 1)
            for j in range(1, self.side + 1)
            if self.cells[i - 1][j - 1] != 0
        ]


@dataclass(frozen=True)
class ClampMap:
    """Free-variable order and fixed assignments of a clamped board."""

    block_size: int
    free: tuple[tuple[int, int, int], ...]       # reduced index -> (i, j, k)
    fixed_one: tuple[tuple[int, int, int], ...]  # clue triples set to one
    c2: float

    @property
    def n_free(self) -> int:
        return len(self.free)


@dataclass(frozen=True)
class DecodeResult:
    board: Board
    problems: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.problems


@dataclass(frozen=True)
class Verdict:
    valid: bool
    violations: tuple[str, ...]


def _block_of(i: int, j: int, n: int) -> int:
    return ((i - 1) // n) * n + (j - 1) // n + 1


def _var_index(i: int, j: int, k: int, n: int) -> int:
    return n ** 4 * (i - 1) + n ** 2 * (j - 1) + k


def parse_board(text: str) -> Board:
    """Parse the character or comma-separated board format."""
    raw = text.strip()
    if "," in raw:
        tokens = [t.strip() for t in raw.replace("\n", ",").split(",") if t.strip()]
        values = []
        for t in tokens:
            if t == ".":
                values.append(0)
                continue
            try:
                values.append(int(t))
            except ValueError:
                raise ValueError(f"bad board token {t!r}") from None
    else:
        chars = [c for c in raw if not c.isspace()]
        values = []
        for c in chars:
            if c == ".":
                values.append(0)
            elif c.isdigit():
                values.append(int(c))
            else:
                raise ValueError(f"bad board character {c!r}")
    count = len(values)
    n = round(count ** 0.25)
    if n < 2 or n ** 4 != count:
        raise ValueError(f"board length {count} is not n^4 for any block size n >= 2")
    side = n * n
    cells = tuple(tuple(values[r * side : (r + 1) * side]) for r in range(side))
    return Board(n, cells)


def board_to_text(board: Board) -> str:
    """Inverse of parse_board (character format for n <= 3, commas above)."""
    if board.side <= 9:
        return "\n".join(
            "".join(str(v) for v in row) for row in board.cells
        ) + "\n"
    return "\n".join(",".join(str(v) for v in row) for row in board.cells) + "\n"


def _conflict_pairs(n: int):
    """All unordered pairs of variables that cannot both be one, counted once."""
    side = n * n
    pairs = set()
    # one digit per cell
    for i in range(1, side + 1):
        for j in range(1, side + 1):
            idxs = [_var_index(i, j, k, n) for k in range(1, side + 1)]
            pairs.update(
                (a, b) for ai, a in enumerate(idxs) for b in idxs[ai + 1 :]
            )
    # each digit once per row / column / block
    for k in range(1, side + 1):
        for i in range(1, side + 1):
            idxs = [_var_index(i, j, k, n) for j in range(1, side + 1)]
            pairs.update((a, b) for ai, a in enumerate(idxs) for b in idxs[ai + 1 :])
        for j in range(1, side + 1):
            idxs = [_var_index(i, j, k, n) for i in range(1, side + 1)]
            pairs.update((a, b) for ai, a in enumerate(idxs) for b in idxs[ai + 1 :])
        for b in range(1, side + 1):
            bi = (b - 1) // n
            bj = (b - 1) % n
            idxs = [
                _var_index(bi * n + r, bj * n + c, k, n)
                for r in range(1, n + 1)
                for c in range(1, n + 1)
            ]
            pairs.update(
                (x, y) if x < y else (y, x)
                for xi, x in enumerate(idxs)
                for y in idxs[xi + 1 :]
            )
    return pairs


def full_qubo(n: int) -> QuboModel:
    """The one-hot rule encoding over all n^6 indicator variables."""
    if n < 2:
        raise ValueError(f"block size must be >= 2, got {n}")
    nvars = n ** 6
    entries = {(v, v): -4.0 for v in range(1, nvars + 1)}
    for (a, b) in _conflict_pairs(n):
        entries[(a, b)] = 1.0
    return QuboModel(nvars, entries, offset=4.0 * n ** 4)


def _check_consistency(board: Board) -> None:
    n = board.block_size
    side = board.side
    seen: dict[tuple, tuple[int, int]] = {}
    for (i, j, k) in board.clues():
        for unit in (("row", i, k), ("column", j, k), ("block", _block_of(i, j, n), k)):
            if unit in seen:
                other = seen[unit]
                raise InconsistentCluesError(
                    f"digit {k} appears at cells {other} and {(i, j)} in the same {unit[0]}",
                    conflict=(other, (i, j)),
                )
            seen[unit] = (i, j)


def clamp(board: Board, q: QuboModel) -> tuple[QuboModel, ClampMap]:
    """Fix clue variables, propagate implied zeros, restrict the QUBO.

    The reduced objective over the free vector equals the full objective of
    the reconstructed full vector for every assignment: linear cross terms
    against fixed ones are folded into the reduced diagonal, and the
    all-fixed residue joins the offset as the clamping constant.
    """
    n = board.block_size
    side = board.side
    if q.n != n ** 6:
        raise ValueError(f"QUBO has {q.n} variables, expected {n ** 6}")
    _check_consistency(board)

    fixed_one: set[int] = set()
    fixed_zero: set[int] = set()
    clue_triples = board.clues()
    for (i, j, k) in clue_triples:
        fixed_one.add(_var_index(i, j, k, n))
    for (i, j, k) in clue_triples:
        for kk in range(1, side + 1):
            if kk != k:
                fixed_zero.add(_var_index(i, j, kk, n))
        for ii in range(1, side + 1):
            if ii != i:
                fixed_zero.add(_var_index(ii, j, k, n))
        for jj in range(1, side + 1):
            if jj != j:
                fixed_zero.add(_var_index(i, jj, k, n))
        b = _block_of(i, j, n)
        bi = (b - 1) // n
        bj = (b - 1) % n
        for r in range(1, n + 1):
            for c in range(1, n + 1):
                ii, jj = bi * n + r, bj * n + c
                if (ii, jj) != (i, j):
                    fixed_zero.add(_var_index(ii, jj, k, n))

    free = sorted(v for v in range(1, q.n + 1) if v not in fixed_one and v not in fixed_zero)
    position = {v: idx + 1 for idx, v in enumerate(free)}

    c2 = 0.0
    reduced: dict[tuple[int, int], float] = {}
    for (u, v), val in q.entries.items():
        u_one = u in fixed_one
        v_one = v in fixed_one
        u_free = u in position
        v_free = v in position
        if u == v:
            if u_one:
                c2 += val
            elif u_free:
                key = (position[u], position[u])
                reduced[key] = reduced.get(key, 0.0) + val
        elif u_one and v_one:
            c2 += 2.0 * val
        elif u_one and v_free:
            key = (position[v], position[v])
            reduced[key] = reduced.get(key, 0.0) + 2.0 * val
        elif v_one and u_free:
            key = (position[u], position[u])
            reduced[key] = reduced.get(key, 0.0) + 2.0 * val
        elif u_free and v_free:
            key = (position[u], position[v])
            reduced[key] = reduced.get(key, 0.0) + val
        # entries touching a fixed zero drop out

    triples = {
        _var_index(i, j, k, n): (i, j, k)
        for i in range(1, side + 1)
        for j in range(1, side + 1)
        for k in range(1, side + 1)
    }
    cmap = ClampMap(
        block_size=n,
        free=tuple(triples[v] for v in free),
        fixed_one=tuple(sorted(clue_triples)),
        c2=c2,
    )
    return QuboModel(len(free), reduced, offset=q.offset + c2), cmap


def decode(config: SpinConfiguration, cmap: ClampMap, board: Board) -> DecodeResult:
    """Fill the board from spin-up free variables; report ill-formed cells."""
    if config.n != cmap.n_free:
        raise ValueError(f"configuration has {config.n} spins, expected {cmap.n_free}")
    side = board.block_size ** 2
    cells = [list(row) for row in board.cells]
    asserted: dict[tuple[int, int], list[int]] = {}
    for value, (i, j, k) in zip(config.values, cmap.free):
        if value > 0:
            asserted.setdefault((i, j), []).append(k)
    problems = []
    for i in range(1, side + 1):
        for j in range(1, side + 1):
            if cells[i - 1][j - 1] != 0:
                continue
            digits = asserted.get((i, j), [])
            if len(digits) == 1:
                cells[i - 1][j - 1] = digits[0]
            elif not digits:
                problems.append(f"cell ({i}, {j}) has no asserted digit")
            else:
                problems.append(f"cell ({i}, {j}) asserts digits {sorted(digits)}")
    filled = Board(board.block_size, tuple(tuple(row) for row in cells))
    return DecodeResult(filled, tuple(problems))


def verify(board: Board) -> Verdict:
    """Check that every row, column, and block holds each digit exactly once."""
    if not board.is_complete():
        raise ValueError("board is incomplete")
    n = board.block_size
    side = board.side
    want = set(range(1, side + 1))
    violations = []
    for i in range(1, side + 1):
        got = set(board.cells[i - 1])
        if got != want:
            violations.append(f"row {i} holds {sorted(board.cells[i - 1])}")
    for j in range(1, side + 1):
        col = [board.cells[i - 1][j - 1] for i in range(1, side + 1)]
        if set(col) != want:
            violations.append(f"column {j} holds {sorted(col)}")
    for b in range(1, side + 1):
        bi = (b - 1) // n
        bj = (b - 1) % n
        block = [
            board.cells[bi * n + r - 1][bj * n + c - 1]
            for r in range(1, n + 1)
            for c in range(1, n + 1)
        ]
        if set(block) != want:
            violations.append(f"block {b} holds {sorted(block)}")
    return Verdict(not violations, tuple(violations))


def random_solution(rng, block_size: int = 3) -> Board:
    """A uniform-ish random valid complete board via pattern shuffling."""
    n = block_size
    side = n * n

    def pattern(r: int, c: int) -> int:
        return (n * (r % n) + r // n + c) % side

    digits = list(rng.permutation(side) + 1)
    bands = [list(rng.permutation(n) + g * n) for g in rng.permutation(n)]
    rows = [r for band in bands for r in band]
    stacks = [list(rng.permutation(n) + g * n) for g in rng.permutation(n)]
    cols = [c for stack in stacks for c in stack]
    cells = tuple(
        tuple(int(digits[pattern(r, c)]) for c in cols) for r in rows
    )
    return Board(n, cells)


def make_puzzle(n_clues: int, rng, block_size: int = 3) -> tuple[Board, Board]:
    """(puzzle, solution): keep `n_clues` random cells of a random solution."""
    solution = random_solution(rng, block_size)
    side = solution.side
    if not 0 <= n_clues <= side * side:
        raise ValueError(f"clue count {n_clues} out of range")
    keep = set(map(int, rng.choice(side * side, size=n_clues, replace=False)))
    cells = tuple(
        tuple(
            solution.cells[r][c] if r * side + c in keep else 0
            for c in range(side)
        )
        for r in range(side)
    )
    return Board(solution.block_size, cells), solution


def solution_configuration(solution: Board, cmap: ClampMap) -> SpinConfiguration:
    """The spin configuration of a complete board over a clamp's free variables."""
    if not solution.is_complete():
        raise ValueError("solution board is incomplete")
    values = tuple(
        0.5 if solution.cells[i - 1][j - 1] == k else -0.5
        for (i, j, k) in cmap.free
    )
    return SpinConfiguration(values)
