"""Shared lyric tokenizer.

Lowercases, splits on Unicode whitespace and punctuation, and splits CJK
runs into single-character tokens so Chinese lyrics work without a
segmenter.
"""

# BMP ranges covering Han (unified + ext A + compatibility), kana and hangul.
_CJK_RANGES = (
    (0x3040, 0x30FF),
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xAC00, 0xD7AF),
    (0xF900, 0xFAFF),
)


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def tokenize(text: str) -> list[str]:
    """Tokenize one line of lyrics into lowercase word tokens."""
    tokens: list[str] = []
    buf: list[str] = []
    for ch in text.lower():
        if _is_cjk(ch):
            if buf:
                tokens.append("".join(buf))
                buf = []
            tokens.append(ch)
        elif ch.isalnum():
            buf.append(ch)
        else:
            if buf:
                tokens.append("".join(buf))
                buf = []
    if buf:
        tokens.append("".join(buf))
    return tokens
