"""LRC lyric file parsing and serialization.

Accepted timed lines look like ``[mm:ss.xx]text`` or ``[mm:ss.xxx]text``;
several time tags may prefix one text. Metadata tags whose key starts with
a letter (``[ti:...]``, ``[ar:...]``, ``[offset:...]``) are ignored.
"""

from __future__ import annotations

import re
import statistics

from ..errors import DataError, LrcParseError
from .model import LyricLine

_TAG = re.compile(r"^\[([^\[\]]*)\]")
_TIME = re.compile(r"^(\d{1,3}):(\d{2})\.(\d{2,3})$")

# End time of a single-line song, where no neighbor spacing exists.
_DEFAULT_LAST_MS = 5000


def _tag_to_ms(body: str) -> int | None:
    m = _TIME.match(body)
    if m is None:
        return None
    minutes, seconds, frac = m.groups()
    ms = int(frac) * (10 if len(frac) == 2 else 1)
    return (int(minutes) * 60 + int(seconds)) * 1000 + ms


def parse_lrc(raw_text: str) -> list[LyricLine]:
    """Parse LRC text into timed lyric lines sorted by start time.

    Each line's end time is the next line's start; the last line gets the
    median line duration. Raises LrcParseError on malformed time tags and
    DataError when no lyric lines survive.
    """
    timed: list[tuple[int, str]] = []
    for line_no, raw in enumerate(raw_text.splitlines(), start=1):
        text = raw.strip("\ufeff").rstrip("\r")
        if not text.strip():
            continue
        if not text.startswith("["):
            # Stray untagged text; wild files carry headers and blank noise.
            continue
        stamps: list[int] = []
        is_meta = False
        while True:
            m = _TAG.match(text)
            if m is None:
                break
            body = m.group(1)
            ms = _tag_to_ms(body)
            if ms is not None:
                stamps.append(ms)
            elif body[:1].isalpha():
                is_meta = True
            else:
                raise LrcParseError(line_no, f"malformed time tag [{body}]")
            text = text[m.end():]
        lyric = text.strip()
        if is_meta and not stamps:
            continue
        if not lyric:
            continue
        for ms in stamps:
            timed.append((ms, lyric))

    if not timed:
        raise DataError("no lyric lines found")

    timed.sort(key=lambda t: t[0])
    starts = [t[0] for t in timed]
    durations = [max(b - a, 1) for a, b in zip(starts, starts[1:])]
    last_dur = int(statistics.median(durations)) if durations else _DEFAULT_LAST_MS
    lines = []
    for i, (start, text) in enumerate(timed):
        if i + 1 < len(timed):
            end = max(timed[i + 1][0], start + 1)
        else:
            end = start + max(last_dur, 1)
        lines.append(LyricLine(index=i, text=text, start_ms=start, end_ms=end))
    return lines


def serialize_lrc(lines: list[LyricLine]) -> str:
    """Render lines back to LRC text with millisecond precision."""
    out = []
    for ln in lines:
        total = ln.start_ms
        minutes, rem = divmod(total, 60_000)
        seconds, ms = divmod(rem, 1000)
        out.append(f"[{minutes:02d}:{seconds:02d}.{ms:03d}]{ln.text}")
    return "\n".join(out) + "\n"
