"""
Syzygy sequences and tiling words.

A curve on the pants is coded by the collinear arcs it crosses, in temporal
order. Observed codes of collision orbits split into a head (crossings made
winding up the start leg), a core, and a tail (crossings made winding down the
finish leg); heads and tails are only ever observed up to a finite horizon.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple
import logging
import re

import numpy as np

from .exceptions import AmbiguousCrossingError, InvalidSequenceError
from .shape import end_arcs
from .geodesics import (
    HORIZON_DEPTH, TAIL_DEPTH, ReducedPath, classify_tail, crossings, on_seam, reversed_path,
    tail_crossings,
)

logger = logging.getLogger(__name__)

FINITE = 'FINITE'
SEMI_INFINITE_TRUNCATED = 'SEMI_INFINITE_TRUNCATED'
BI_INFINITE_TRUNCATED = 'BI_INFINITE_TRUNCATED'
KINDS = (FINITE, SEMI_INFINITE_TRUNCATED, BI_INFINITE_TRUNCATED)

UPPER = 'UPPER'
LOWER = 'LOWER'

ALPHABET = (1, 2, 3)
ELLIPSIS = '…'


def _symbols(values: Iterable) -> Tuple[int, ...]:
    out = tuple(int(s) for s in values)
    bad = [s for s in out if s not in ALPHABET]
    if bad:
        raise InvalidSequenceError(f"symbols must be 1, 2 or 3, got {bad}")
    return out


def _has_stutter(symbols: Tuple[int, ...]) -> bool:
    return any(a == b for a, b in zip(symbols, symbols[1:]))


@dataclass(frozen=True)
class SyzygySequence:
    """
    Arc labels crossed by a curve

    symbols is the core; head and tail hold the observed crossings of winding
    start and finish legs (empty for straight legs). kind says how many of the
    two ends were seen winding.
    """
    symbols: Tuple[int, ...] = ()
    kind: str = FINITE
    head: Tuple[int, ...] = ()
    tail: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSequenceError(f"unknown sequence kind {self.kind!r}")
        object.__setattr__(self, 'symbols', _symbols(self.symbols))
        object.__setattr__(self, 'head', _symbols(self.head))
        object.__setattr__(self, 'tail', _symbols(self.tail))

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return self.to_text()

    @property
    def stutter_free(self) -> bool:
        return not _has_stutter(self.symbols)

    @property
    def truncated(self) -> bool:
        return self.kind != FINITE

    def observed(self) -> Tuple[int, ...]:
        """All crossings in temporal order, head and tail included."""
        return self.head + self.symbols + self.tail

    def to_text(self) -> str:
        core = ''.join(map(str, self.symbols))
        if self.kind == FINITE:
            return core
        text = core
        if self.head or self.kind == BI_INFINITE_TRUNCATED:
            text = ELLIPSIS + ''.join(map(str, self.head)) + '|' + text
        if self.tail or self.kind == BI_INFINITE_TRUNCATED:
            text = text + '|' + ''.join(map(str, self.tail)) + ELLIPSIS
        return text


@dataclass(frozen=True)
class TilingWord:
    """Address of the fundamental domain reached, letters in {-2, -1, +1, +2}."""
    letters: Tuple[int, ...] = ()
    start_region: str = LOWER
    regions: Tuple[str, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.letters)

    def to_text(self) -> str:
        return ' '.join(f"{a:+d}" for a in self.letters)


def parse_sequence(text: str, require_stutter_free: bool = False) -> SyzygySequence:
    """
    Read a sequence from text

    Accepts plain digit strings ("31"), separated digits ("3 1", "3,1") and the
    truncated form written by to_text ("…2323|31|3232…", "..." also accepted).
    """
    raw = text.strip().replace('...', ELLIPSIS)
    if raw.count('|') > 2:
        raise InvalidSequenceError(f"too many '|' separators in {text!r}")
    parts = raw.split('|')
    head_text, tail_text = '', ''
    if len(parts) == 3:
        head_text, core_text, tail_text = parts
    elif len(parts) == 2:
        if parts[0].startswith(ELLIPSIS):
            head_text, core_text = parts
        else:
            core_text, tail_text = parts
    else:
        core_text = parts[0]

    def digits(chunk: str) -> Tuple[int, ...]:
        chunk = chunk.replace(ELLIPSIS, '')
        cleaned = re.sub(r'[\s,]+', '', chunk)
        if not re.fullmatch(r'[0-9]*', cleaned):
            raise InvalidSequenceError(f"cannot read a syzygy sequence from {text!r}")
        return _symbols(cleaned)

    if len(parts) == 1 and ELLIPSIS in core_text:
        raise InvalidSequenceError(f"truncation marker without separator in {text!r}")
    head, core, tail = digits(head_text), digits(core_text), digits(tail_text)
    kind = (FINITE, SEMI_INFINITE_TRUNCATED, BI_INFINITE_TRUNCATED)[len(parts) - 1]
    seq = SyzygySequence(core, kind, head, tail)
    if require_stutter_free and not seq.stutter_free:
        raise InvalidSequenceError(f"sequence {seq.to_text()} has a stutter")
    return seq


def code(path: ReducedPath, horizon_depth: float = HORIZON_DEPTH,
         tail_depth: float = TAIL_DEPTH) -> SyzygySequence:
    """
    Syzygy sequence of a reduced path

    Crossings made winding down a leg at depth >= tail_depth are split off into
    the head (start leg, found on the reversed path) or the tail (finish leg).

    Raises:
        AmbiguousCrossingError: a crossing sits at a collision point, or the
            path lies on the collinear seam
    """
    if len(path) > 1 and on_seam(path):
        raise AmbiguousCrossingError("path lies on the collinear seam and has no syzygy sequence")
    found = crossings(path)
    symbols = [c.arc for c in found]

    forward = classify_tail(path, horizon_depth, tail_depth, found=found)
    n_tail = len(tail_crossings(path, found, tail_depth)) if forward.kind == 'WINDING' else 0

    backward_path = reversed_path(path)
    backward = classify_tail(backward_path, horizon_depth, tail_depth)
    n_head = len(tail_crossings(backward_path, None, tail_depth)) if backward.kind == 'WINDING' else 0
    if n_head + n_tail > len(symbols):
        # a short path can sit in one leg: attribute everything to the tail
        n_head = max(0, len(symbols) - n_tail)

    head = tuple(symbols[:n_head])
    tail = tuple(symbols[len(symbols) - n_tail:]) if n_tail else ()
    core = tuple(symbols[n_head:len(symbols) - n_tail])
    winding = (forward.kind == 'WINDING') + (backward.kind == 'WINDING')
    kind = (FINITE, SEMI_INFINITE_TRUNCATED, BI_INFINITE_TRUNCATED)[winding]
    return SyzygySequence(core, kind, head, tail)


def cancel_stutters(seq: SyzygySequence) -> SyzygySequence:
    """
    Delete adjacent equal pairs until none are left

    A single left-to-right pass with a stack reaches the same fixed point as
    repeated pair deletion.
    """
    stack: List[int] = []
    for s in seq.symbols:
        if stack and stack[-1] == s:
            stack.pop()
        else:
            stack.append(s)
    return SyzygySequence(tuple(stack), seq.kind, seq.head, seq.tail)


def region_of(u) -> str:
    """Hemisphere of a shape point off the seam."""
    u3 = float(np.asarray(getattr(u, 'u', u))[2])
    if u3 == 0.0:
        raise InvalidSequenceError("collinear shapes are on the seam, not in a region")
    return UPPER if u3 > 0 else LOWER


def tiling_word(seq: SyzygySequence, start_region: str = LOWER) -> TilingWord:
    """
    Address word of the domain reached by a stutter-free sequence

    The pants is opened along seams 1 and 2 into the upper and lower
    hemispheres. Crossing seam a in {1, 2} from the lower side appends +a,
    from the upper side -a. Seam 3 is not cut: crossing it moves between the
    two hemispheres of the same domain pair and appends nothing. The region
    flips at every crossing.
    """
    if start_region not in (UPPER, LOWER):
        raise InvalidSequenceError(f"start region must be UPPER or LOWER, got {start_region!r}")
    if not seq.stutter_free:
        raise InvalidSequenceError(f"tiling words need a stutter-free sequence, got {seq.to_text()}")
    region = start_region
    letters: List[int] = []
    regions = [region]
    for s in seq.symbols:
        if s != 3:
            letter = s if region == LOWER else -s
            if letters and letters[-1] == -letter:
                # cannot happen for stutter-free input; reduce anyway
                letters.pop()
            else:
                letters.append(letter)
        region = UPPER if region == LOWER else LOWER
        regions.append(region)
    return TilingWord(tuple(letters), start_region, tuple(regions))


def loop_sequence(end_label: str, turns: int, start: Optional[int] = None) -> SyzygySequence:
    """Code of a curve winding turns times around an end: the alternating pair of its arcs."""
    a, b = end_arcs(end_label)
    if start == b:
        a, b = b, a
    return SyzygySequence(tuple(a if k % 2 == 0 else b for k in range(2 * turns)))
