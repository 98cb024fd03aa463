"""Character-span bookkeeping for phrase matchers and maskers."""

from __future__ import annotations

from typing import Any, Sequence

from .textvec import token_spans


def select_spans(candidates: Sequence[tuple[int, int, Any]]) -> list[tuple[int, int, Any]]:
    """Resolve overlapping (start, end, payload) candidates.

    Longest span wins, then leftmost, then original submission order.
    Returns the surviving spans sorted by start offset.
    """
    ranked = sorted(
        range(len(candidates)),
        key=lambda i: (-(candidates[i][1] - candidates[i][0]), candidates[i][0], i),
    )
    kept: list[tuple[int, int, Any]] = []
    for i in ranked:
        start, end, payload = candidates[i]
        if end <= start:
            continue
        if any(start < k_end and k_start < end for k_start, k_end, _ in kept):
            continue
        kept.append((start, end, payload))
    kept.sort(key=lambda s: s[0])
    return kept


def phrase_spans(
    text: str, phrases: dict[tuple[str, ...], Any], max_len: int
) -> list[tuple[int, int, Any]]:
    """Greedy longest-match scan of tokenized text against token-tuple phrases.

    Matches may cross punctuation (tokens need only be consecutive). Spans
    index into the original text and never overlap.
    """
    toks = token_spans(text)
    out: list[tuple[int, int, Any]] = []
    i, n = 0, len(toks)
    while i < n:
        hit_len = 0
        payload = None
        for length in range(min(max_len, n - i), 0, -1):
            cand = tuple(tok for tok, _, _ in toks[i : i + length])
            if cand in phrases:
                hit_len = length
                payload = phrases[cand]
                break
        if hit_len:
            out.append((toks[i][1], toks[i + hit_len - 1][2], payload))
            i += hit_len
        else:
            i += 1
    return out
