"""Minimal LRC reading, matching the core toolkit's line numbering.

Grammar: leading ``[mm:ss.xx]`` / ``[mm:ss.xxx]`` tags time a line (several
tags replicate it); tags starting with a letter are metadata and skipped;
untagged or empty-text lines are ignored. Lines sort by start time and are
numbered from zero in that order, which is what the interchange keys
``song_id:line_index`` refer to.
"""

from __future__ import annotations

import re
from pathlib import Path

_TAG = re.compile(r"^\[([^\[\]]*)\]")
_TIME = re.compile(r"^(\d{1,3}):(\d{2})\.(\d{2,3})$")


def read_lrc_lines(raw_text: str) -> list[str]:
    """Line texts ordered and indexed exactly like the core parser."""
    timed: list[tuple[int, str]] = []
    for raw in raw_text.splitlines():
        text = raw.strip("\ufeff").rstrip("\r")
        if not text.strip() or not text.startswith("["):
            continue
        stamps = []
        bad = False
        while True:
            m = _TAG.match(text)
            if m is None:
                break
            body = m.group(1)
            t = _TIME.match(body)
            if t is not None:
                minutes, seconds, frac = t.groups()
                ms = int(frac) * (10 if len(frac) == 2 else 1)
                stamps.append((int(minutes) * 60 + int(seconds)) * 1000 + ms)
            elif not body[:1].isalpha():
                bad = True
            text = text[m.end():]
        if bad:
            raise ValueError("malformed time tag")
        lyric = text.strip()
        if not lyric:
            continue
        for ms in stamps:
            timed.append((ms, lyric))
    timed.sort(key=lambda t: t[0])
    return [text for _, text in timed]


def read_corpus_lines(corpus_dir) -> list[tuple[str, int, str]]:
    """(song_id, line_index, text) triples for every line in the corpus."""
    lyrics = Path(corpus_dir) / "lyrics"
    if not lyrics.is_dir():
        raise FileNotFoundError(f"no lyrics/ directory under {corpus_dir}")
    out = []
    for path in sorted(lyrics.glob("*.lrc")):
        for index, text in enumerate(read_lrc_lines(
                path.read_text(encoding="utf-8"))):
            out.append((path.stem, index, text))
    if not out:
        raise ValueError(f"no lyric lines under {corpus_dir}")
    return out
