"""Shared fixtures: reference boards and small random-model builders."""

import pytest

import spindrive as sd

# A solved 9x9 grid and the 22 clue positions of the puzzle it came from;
# used as a regression fixture for the clamping pipeline.
SOLVED_GRID_TEXT = (
    "281354679\n"
    "973816524\n"
    "564792813\n"
    "139468257\n"
    "825973146\n"
    "647521938\n"
    "492635781\n"
    "356187492\n"
    "718249365\n"
)

CLUE_CELLS_22 = [
    (1, 2), (1, 4), (1, 9),
    (2, 1), (2, 3), (2, 7),
    (3, 2), (3, 6), (3, 8),
    (4, 1), (4, 4), (4, 8),
    (5, 4),
    (6, 1), (6, 9),
    (7, 1), (7, 9),
    (8, 3), (8, 5), (8, 6), (8, 9),
    (9, 6),
]


def puzzle22_text() -> str:
    grid = [list(map(int, row)) for row in SOLVED_GRID_TEXT.split()]
    rows = []
    for i in range(9):
        rows.append("".join(
            str(grid[i][j]) if (i + 1, j + 1) in CLUE_CELLS_22 else "0"
            for j in range(9)
        ))
    return "\n".join(rows) + "\n"


@pytest.fixture(scope="session")
def solved_board():
    return sd.parse_board(SOLVED_GRID_TEXT)


@pytest.fixture(scope="session")
def puzzle22_board():
    return sd.parse_board(puzzle22_text())


@pytest.fixture(scope="session")
def full_qubo_3():
    return sd.full_qubo(3)


@pytest.fixture(scope="session")
def clamped22(puzzle22_board, full_qubo_3):
    return sd.clamp(puzzle22_board, full_qubo_3)


def random_ising(n: int, rng, density: float = 0.3, coupling_choices=(-2.0, -1.0, 1.0, 2.0)):
    """A random spin model with integer couplings and mapped fields.

    Built through the QUBO route so the fields follow from the matrix the
    way they do for the frontends.
    """
    entries = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if rng.random() < density:
                entries[(i, j)] = float(rng.choice(coupling_choices)) / 2.0
    q = sd.QuboModel(n, entries, offset=0.0)
    return sd.to_ising(q)
