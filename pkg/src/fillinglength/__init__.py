"""Filling length invariants of null-homotopic words.

Exact computation of FL, FFL and FFFL by search over null-sequences of
rewriting moves, plus a van Kampen diagram kernel: shellings, corridor
tracing, height certificates, and generators for the explicit diagram
families realising the exponential/linear separation.
"""

from .words import (
    EMPTY,
    Generator,
    NotARetraction,
    Presentation,
    Word,
    WordError,
    cyclically_reduce,
    exponent_sum,
    free_reduce,
    invert,
    min_rotation,
    parse_presentation,
    parse_word,
    presentation_bs,
    presentation_rst,
    presentation_z2,
    retract,
    rotate,
    word_w,
    word_w_prime,
)

__all__ = [
    "EMPTY",
    "Generator",
    "NotARetraction",
    "Presentation",
    "Word",
    "WordError",
    "cyclically_reduce",
    "exponent_sum",
    "free_reduce",
    "invert",
    "min_rotation",
    "parse_presentation",
    "parse_word",
    "presentation_bs",
    "presentation_rst",
    "presentation_z2",
    "retract",
    "rotate",
    "word_w",
    "word_w_prime",
]
