"""Fixed vertex layout of T = S_x + S_y + S_z (0-based positions).

    0..11   S_x in block order; 0,1 = Z (shared with S_y), 2,3 = Y (shared with S_z)
    12,13   X = S_y ^ S_z; t = position 12, t' = position 13
    14..21  the non-handle vertices of S_y
    22..29  the non-handle vertices of S_z
"""

from __future__ import annotations

T_SIZE = 30
T_VERTEX = 12
T_PRIME = 13
Z_POS = (0, 1)
Y_POS = (2, 3)
X_POS = (12, 13)


def _mask(positions) -> int:
    m = 0
    for p in positions:
        m |= 1 << p
    return m


SX_POS = tuple(range(12))
SY_POS = (0, 1, 12, 13, *range(14, 22))
SZ_POS = (2, 3, 12, 13, *range(22, 30))
SX_MASK = _mask(SX_POS)
SY_MASK = _mask(SY_POS)
SZ_MASK = _mask(SZ_POS)


def sy_positions(gluing: int) -> list[int]:
    """T position of each stored S_y vertex."""
    return ([1, 0] if gluing else [0, 1]) + list(range(12, 22))


def sz_positions(orient_y: int, orient_x: int) -> list[int]:
    """T position of each stored S_z vertex (handle1 onto Y, handle2 onto X)."""
    return ([3, 2] if orient_y else [2, 3]) + ([13, 12] if orient_x else [12, 13]) + list(range(22, 30))


def q_common(i: int, j: int) -> int:
    """Common neighbours of t_i and t_j inside the clique {x, y, z}."""
    bi, bj = 1 << i, 1 << j
    return (
        bool(SX_MASK & bi and SX_MASK & bj)
        + bool(SY_MASK & bi and SY_MASK & bj)
        + bool(SZ_MASK & bi and SZ_MASK & bj)
    )


def bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out
