from .graph import HeteroGraph, build_graph, top_chords
from .params import GatDims, GatParams, load_params, params_hash, save_params
from .layers import positional_encoding, segment_softmax
from .model import (
    PretrainConfig,
    PropagateResult,
    corpus_pair_loss,
    pair_loss_and_grads,
    pretrain_next_line,
    propagate,
)

__all__ = [
    "GatDims",
    "GatParams",
    "HeteroGraph",
    "PretrainConfig",
    "PropagateResult",
    "build_graph",
    "corpus_pair_loss",
    "load_params",
    "pair_loss_and_grads",
    "params_hash",
    "positional_encoding",
    "pretrain_next_line",
    "propagate",
    "save_params",
    "segment_softmax",
    "top_chords",
]
