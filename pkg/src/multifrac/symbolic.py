"""Formal bookkeeping of operator words in the square of a two-term
multiscale derivative, ignoring weight factors."""

from __future__ import annotations

import sympy as sp

D, L, W = sp.symbols("d L W", commutative=False)
g = sp.Symbol("g")


def _reduce(word: tuple[str, ...]) -> tuple[str, ...]:
    """Rewrite a word in {d, L, W} into canonical fractional factors.

    d is the ordinary derivative, which equals L^1 and -W^1, so it merges
    with a neighbouring factor of either family. Adjacent factors of the
    same family add their orders; mixed L/W products stay as they are.
    """
    out: list[list] = []
    for sym in word:
        if sym == "d":
            if out and out[-1][0] in ("d", "L", "W"):
                out[-1][1] = out[-1][1] + 1
                continue
            out.append(["d", 1])
            continue
        order = sp.Symbol("alpha")
        if out and out[-1][0] == "d":
            prev = out.pop()
            out.append([sym, order + prev[1]])
        elif out and out[-1][0] == sym:
            out[-1][1] = out[-1][1] + order
        else:
            out.append([sym, order])
    return tuple(f"{f}^{sp.sstr(o)}" for f, o in out)


def square_pieces(expr=None) -> set[tuple[str, ...]]:
    """Distinct operator pieces of (d + g/2 (L - W))**2 after reduction."""
    if expr is None:
        expr = D + g / 2 * (L - W)
    expanded = sp.expand(expr * expr)
    pieces = set()
    for term in expanded.as_ordered_terms():
        _, factors = term.args_cnc()
        word: list[str] = []
        for f in factors:
            base, exp = f.as_base_exp()
            word.extend([str(base)] * int(exp))
        pieces.add(_reduce(tuple(word)))
    return pieces


def seven_piece_count() -> int:
    return len(square_pieces())
