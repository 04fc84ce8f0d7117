"""Synthetic labeled corpora with text, chords, and audio.

Each song repeats a chorus block (identical text, its own chord loop,
louder and higher-register audio) between verse sections drawn from a
small shared vocabulary. Two kinds of deliberate contamination keep the
data honest at desk scale:

* quote lines: a verse line embeds the opening trigram of a neighbor
  song's chorus, so chorus keywords recur in other songs' verses;
* decoy lines: a verse line copies this song's own chorus text verbatim,
  so text alone cannot separate the classes (audio and chords still can);
* chord noise: some verse lines play the chorus loop, so chords alone are
  slightly weaker evidence than audio.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..dsp.waveform import Waveform
from .model import Corpus, LyricLine, Song

VERSE_PROGRESSIONS = (
    ("C", "Am", "F", "G"),
    ("Am", "F", "C", "G"),
    ("D", "Bm", "G", "A"),
    ("Em", "C", "G", "D"),
    ("F", "Dm", "A#", "C"),
    ("G", "Em", "C", "D"),
)
CHORUS_PROGRESSIONS = (
    ("F", "G", "Em", "Am"),
    ("C", "G", "Am", "F"),
    ("G", "D", "Em", "C"),
    ("A", "E", "F#m", "D"),
    ("Dm", "A#", "F", "C"),
    ("E", "B", "C#m", "A"),
)

_PITCH_CLASS = {
    "C": 0, "C#": 1, "D": 2, "D#": 3, "E": 4, "F": 5,
    "F#": 6, "G": 7, "G#": 8, "A": 9, "A#": 10, "B": 11,
}


@dataclass(frozen=True)
class SynthConfig:
    songs: int = 20
    lines_per_song: int = 16
    chorus_block: int = 4
    chorus_repeats: int = 2
    verse_vocab: int = 12
    chorus_vocab: int = 40
    verse_len: tuple[int, int] = (6, 9)
    chorus_len: tuple[int, int] = (4, 6)
    chord_styles: int = 4
    quote_neighbors: int = 2
    decoy_lines: int = 1
    verse_chord_noise: float = 0.15
    chords_per_line: int = 4
    chord_ms: int = 320
    sample_rate: int = 8000
    verse_amp: float = 0.25
    chorus_amp: float = 0.55
    chorus_octave_up: int = 1
    noise_amp: float = 0.01

    def __post_init__(self):
        if self.songs < 1:
            raise DataError("need at least one song")
        if self.chorus_block < 1 or self.chorus_block > self.lines_per_song:
            raise DataError(
                f"chorus block of {self.chorus_block} lines does not fit in "
                f"{self.lines_per_song}-line songs"
            )
        if self.chorus_repeats < 2:
            raise DataError("chorus block must repeat at least twice per song")
        if self.chorus_block * self.chorus_repeats > self.lines_per_song:
            raise DataError(
                f"{self.chorus_repeats} repeats of a {self.chorus_block}-line "
                f"block exceed {self.lines_per_song} lines"
            )
        if not 1 <= self.chord_styles <= len(VERSE_PROGRESSIONS):
            raise DataError(
                f"chord_styles must be 1..{len(VERSE_PROGRESSIONS)}"
            )

    @property
    def line_ms(self) -> int:
        return self.chords_per_line * self.chord_ms

    @property
    def chorus_fraction(self) -> float:
        return self.chorus_block * self.chorus_repeats / self.lines_per_song


def _words(prefix: str, count: int) -> list[str]:
    width = max(2, len(str(count - 1)))
    return [f"{prefix}{i:0{width}d}" for i in range(count)]


def _chord_pitches(symbol: str, octave: int) -> list[float]:
    minor = symbol.endswith("m") and symbol not in _PITCH_CLASS
    root_name = symbol[:-1] if minor else symbol
    root = _PITCH_CLASS[root_name]
    midi_root = 12 * (octave + 1) + root
    third = 3 if minor else 4
    return [440.0 * 2.0 ** ((midi_root + iv - 69) / 12.0) for iv in (0, third, 7)]


def _line_audio(loop, cfg: SynthConfig, is_chorus: bool, rng) -> np.ndarray:
    amp = cfg.chorus_amp if is_chorus else cfg.verse_amp
    octave = 3 + (cfg.chorus_octave_up if is_chorus else 0)
    n = int(round(cfg.chord_ms * cfg.sample_rate / 1000.0))
    t = np.arange(n) / cfg.sample_rate
    chunks = []
    for k in range(cfg.chords_per_line):
        symbol = loop[k % len(loop)]
        wave = np.zeros(n)
        for freq in _chord_pitches(symbol, octave):
            wave += (amp / 3.0) * np.sin(2.0 * np.pi * freq * t)
        chunks.append(wave)
    out = np.concatenate(chunks)
    out += cfg.noise_amp * rng.standard_normal(len(out))
    return out


def _layout(cfg: SynthConfig, rng) -> list[int | None]:
    """Per-line role: None for verse, else index into the chorus template."""
    n_verse = cfg.lines_per_song - cfg.chorus_block * cfg.chorus_repeats
    gaps = [n_verse // (cfg.chorus_repeats + 1)] * (cfg.chorus_repeats + 1)
    for _ in range(n_verse - sum(gaps)):
        gaps[int(rng.integers(0, len(gaps)))] += 1
    roles: list[int | None] = []
    for g, gap in enumerate(gaps):
        roles.extend([None] * gap)
        if g < cfg.chorus_repeats:
            roles.extend(range(cfg.chorus_block))
    return roles


def synth_corpus(cfg: SynthConfig, seed: int) -> Corpus:
    """Generate a fully labeled corpus with chords and waveforms, per seed."""
    rng = np.random.default_rng(seed)
    verse_words = _words("v", cfg.verse_vocab)
    chorus_words = _words("k", cfg.chorus_vocab)
    width = max(4, len(str(cfg.songs - 1)))
    ids = [f"s{i:0{width}d}" for i in range(cfg.songs)]

    # Pass 1: every song's chord loops and chorus template, so later songs
    # can quote earlier ones and vice versa.
    loops = []
    templates = []
    for _ in range(cfg.songs):
        verse_loop = VERSE_PROGRESSIONS[int(rng.integers(0, cfg.chord_styles))]
        chorus_loop = CHORUS_PROGRESSIONS[int(rng.integers(0, cfg.chord_styles))]
        loops.append((verse_loop, chorus_loop))
        template = []
        for _ in range(cfg.chorus_block):
            length = int(rng.integers(cfg.chorus_len[0], cfg.chorus_len[1] + 1))
            template.append(list(rng.choice(chorus_words, size=length)))
        templates.append(template)

    songs = []
    for s in range(cfg.songs):
        verse_loop, chorus_loop = loops[s]
        template = templates[s]
        roles = _layout(cfg, rng)
        verse_slots = [i for i, r in enumerate(roles) if r is None]

        pool = list(verse_slots)
        n_decoy = min(cfg.decoy_lines, len(pool))
        decoy_at = {}
        if n_decoy:
            picks = rng.choice(len(pool), size=n_decoy, replace=False)
            for d, p in enumerate(sorted(int(i) for i in picks)):
                decoy_at[pool[p]] = d % cfg.chorus_block
            pool = [i for i in pool if i not in decoy_at]
        n_quote = min(cfg.quote_neighbors, len(pool))
        quote_at = {}
        if n_quote and cfg.songs > 1:
            picks = rng.choice(len(pool), size=n_quote, replace=False)
            for q, p in enumerate(sorted(int(i) for i in picks)):
                src = (s - 1 - q) % cfg.songs
                quote_at[pool[p]] = templates[src][0][:3]

        lines = []
        chords = []
        audio_chunks = []
        for i, role in enumerate(roles):
            if role is not None:
                tokens = template[role]
                loop = chorus_loop
                is_chorus = True
            else:
                is_chorus = False
                if i in decoy_at:
                    tokens = template[decoy_at[i]]
                    loop = verse_loop
                elif i in quote_at:
                    quote = quote_at[i]
                    length = int(rng.integers(cfg.verse_len[0], cfg.verse_len[1] + 1))
                    n_own = max(length - len(quote), 1)
                    own = list(rng.choice(verse_words, size=n_own))
                    at = int(rng.integers(0, n_own + 1))
                    tokens = own[:at] + quote + own[at:]
                    loop = verse_loop
                else:
                    length = int(rng.integers(cfg.verse_len[0], cfg.verse_len[1] + 1))
                    tokens = list(rng.choice(verse_words, size=length))
                    loop = chorus_loop if rng.random() < cfg.verse_chord_noise \
                        else verse_loop
            line_chords = tuple(
                loop[k % len(loop)] for k in range(cfg.chords_per_line)
            )
            lines.append(LyricLine(
                index=i,
                text=" ".join(tokens),
                start_ms=i * cfg.line_ms,
                end_ms=(i + 1) * cfg.line_ms,
                label=is_chorus,
            ))
            chords.append(line_chords)
            audio_chunks.append(_line_audio(loop, cfg, is_chorus, rng))

        # float32 keeps 200-song corpora small and matches WAV round-trips
        waveform = Waveform(
            samples=np.concatenate(audio_chunks).astype(np.float32),
            sample_rate=cfg.sample_rate,
        )
        songs.append(Song(
            id=ids[s], lines=tuple(lines), chords=tuple(chords), audio=waveform
        ))
    return Corpus(songs=tuple(songs))
