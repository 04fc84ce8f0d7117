"""Four-step propagation over the song graph and next-line pre-training.

Sentence states are read after step ii (word and chord enrichment); steps
iii and iv push sentence information back into word and chord nodes to
complete the cycle. Line representations get sinusoidal positions added.
Pre-training scores consecutive-line pairs against random non-successors
with a bilinear form and a logistic loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_expit

from ..errors import DataError
from ..optim import Adam
from .graph import HeteroGraph
from .layers import attend_backward, attend_forward, positional_encoding
from .params import GatParams


@dataclass
class PropagateResult:
    lines: np.ndarray  # (n_sent, d_hidden), positions added
    sentence_states: np.ndarray  # after step ii
    word_states: np.ndarray  # after step iii
    chord_states: np.ndarray  # after step iv
    initial_states: tuple[np.ndarray, np.ndarray, np.ndarray]
    _caches: tuple = field(default=(), repr=False)


def _forward(graph: HeteroGraph, params: GatParams) -> PropagateResult:
    t = params.tensors
    dims = params.dims
    if graph.sent_base.shape[1] != dims.d_sent:
        raise DataError(
            f"graph sentence dim {graph.sent_base.shape[1]} != params {dims.d_sent}"
        )
    if graph.word_base.shape[0] and graph.word_base.shape[1] != dims.d_word:
        raise DataError(
            f"graph word dim {graph.word_base.shape[1]} != params {dims.d_word}"
        )
    if graph.chord_base.shape[0] and graph.chord_base.shape[1] != dims.d_chord:
        raise DataError(
            f"graph chord dim {graph.chord_base.shape[1]} != params {dims.d_chord}"
        )

    s0 = graph.sent_base @ t["adapt_sent_w"].T + t["adapt_sent_b"]
    w0 = (graph.word_base @ t["adapt_word_w"].T + t["adapt_word_b"]
          if graph.word_base.shape[0] else np.zeros((0, dims.d_hidden)))
    c0 = (graph.chord_base @ t["adapt_chord_w"].T + t["adapt_chord_b"]
          if graph.chord_base.shape[0] else np.zeros((0, dims.d_hidden)))

    s1, cache1 = attend_forward(
        s0, w0, graph.sw_sent, graph.sw_word, graph.sw_feat, t, "step1_", dims)
    s2, cache2 = attend_forward(
        s1, c0, graph.sc_sent, graph.sc_chord, graph.sc_feat, t, "step2_", dims)
    w1, cache3 = attend_forward(
        w0, s2, graph.sw_word, graph.sw_sent, graph.sw_feat, t, "step3_", dims)
    c1, cache4 = attend_forward(
        c0, s2, graph.sc_chord, graph.sc_sent, graph.sc_feat, t, "step4_", dims)

    lines = s2 + positional_encoding(graph.n_sent, dims.d_hidden)
    return PropagateResult(
        lines=lines,
        sentence_states=s2,
        word_states=w1,
        chord_states=c1,
        initial_states=(s0, w0, c0),
        _caches=(cache1, cache2),
    )


def propagate(graph: HeteroGraph, params: GatParams) -> PropagateResult:
    """Run steps i..iv once and return per-line representations."""
    return _forward(graph, params)


def propagate_backward(graph: HeteroGraph, params: GatParams, result: PropagateResult,
              d_lines: np.ndarray, grads: dict[str, np.ndarray]) -> None:
    """Accumulate parameter grads for a loss on ``result.lines``.

    Steps iii/iv feed nothing downstream of the line representations, so
    their parameter grads are identically zero and skipped.
    """
    t = params.tensors
    dims = params.dims
    cache1, cache2 = result._caches
    d_s2 = d_lines  # positions are additive constants
    d_s1, d_c0 = attend_backward(cache2, d_s2, t, "step2_", dims, grads)
    d_s0, d_w0 = attend_backward(cache1, d_s1, t, "step1_", dims, grads)

    def acc(name, value):
        grads[name] = grads.get(name, 0.0) + value

    acc("adapt_sent_w", d_s0.T @ graph.sent_base)
    acc("adapt_sent_b", d_s0.sum(axis=0, keepdims=True))
    if d_w0 is not None and graph.word_base.shape[0]:
        acc("adapt_word_w", d_w0.T @ graph.word_base)
        acc("adapt_word_b", d_w0.sum(axis=0, keepdims=True))
    if d_c0 is not None and graph.chord_base.shape[0]:
        acc("adapt_chord_w", d_c0.T @ graph.chord_base)
        acc("adapt_chord_b", d_c0.sum(axis=0, keepdims=True))


def make_pairs(n_lines: int, rng: np.random.Generator
               ) -> list[tuple[int, int, int]]:
    """Balanced (i, j, label) pairs: each successor pair plus one random
    non-successor drawn within the song."""
    pairs = []
    for i in range(n_lines - 1):
        pairs.append((i, i + 1, 1))
        r = int(rng.integers(0, n_lines - 1))
        if r >= i + 1:
            r += 1
        pairs.append((i, r, 0))
    return pairs


def pair_loss_and_grads(graph: HeteroGraph, params: GatParams,
                        pairs: list[tuple[int, int, int]]):
    """Mean logistic loss over scored line pairs plus grads for every
    parameter the loss reaches."""
    result = _forward(graph, params)
    lines = result.lines
    bil = params.tensors["score_bilinear"]

    loss = 0.0
    d_lines = np.zeros_like(lines)
    d_bil = np.zeros_like(bil)
    for i, j, label in pairs:
        score = float(lines[i] @ bil @ lines[j])
        loss += -float(log_expit(score if label else -score))
        g = expit(score) - label
        d_bil += g * np.outer(lines[i], lines[j])
        d_lines[i] += g * (bil @ lines[j])
        d_lines[j] += g * (bil.T @ lines[i])

    n = len(pairs)
    loss /= n
    grads: dict[str, np.ndarray] = {"score_bilinear": d_bil / n}
    propagate_backward(graph, params, result, d_lines / n, grads)
    return loss, grads


def pair_loss(graph: HeteroGraph, params: GatParams,
              pairs: list[tuple[int, int, int]]) -> float:
    """Loss only; the finite-difference oracle perturbs params through this."""
    lines = _forward(graph, params).lines
    bil = params.tensors["score_bilinear"]
    total = 0.0
    for i, j, label in pairs:
        score = float(lines[i] @ bil @ lines[j])
        total += -float(log_expit(score if label else -score))
    return total / len(pairs)


@dataclass(frozen=True)
class PretrainConfig:
    epochs: int = 3
    lr: float = 1e-3
    seed: int = 0


def corpus_pair_loss(graphs: list[HeteroGraph], params: GatParams,
                     seed: int = 0) -> float:
    """Mean pair loss over a graph list without updating anything."""
    rng = np.random.default_rng(seed)
    total, count = 0.0, 0
    for graph in graphs:
        if graph.n_sent < 2:
            continue
        pairs = make_pairs(graph.n_sent, rng)
        total += pair_loss(graph, params, pairs) * len(pairs)
        count += len(pairs)
    if count == 0:
        raise DataError("no songs with at least 2 lines")
    return total / count


def pretrain_next_line(graphs: list[HeteroGraph], params: GatParams,
                       config: PretrainConfig = PretrainConfig()
                       ) -> tuple[GatParams, list[float]]:
    """Train all reachable parameters with Adam, one song per step.

    Returns the mutated params and the per-epoch mean losses. Deterministic
    for a fixed seed; songs with fewer than 2 lines contribute nothing.
    """
    if params.frozen:
        raise DataError("params are frozen; thaw() before pre-training")
    usable = [g for g in graphs if g.n_sent >= 2]
    if not usable:
        raise DataError("no songs with at least 2 lines")
    rng = np.random.default_rng(config.seed)
    adam = Adam(lr=config.lr)
    epoch_losses = []
    for _ in range(config.epochs):
        order = rng.permutation(len(usable))
        total, count = 0.0, 0
        for gi in order:
            graph = usable[int(gi)]
            pairs = make_pairs(graph.n_sent, rng)
            loss, grads = pair_loss_and_grads(graph, params, pairs)
            adam.step(params.tensors, grads)
            total += loss * len(pairs)
            count += len(pairs)
        epoch_losses.append(total / count)
    return params, epoch_losses
