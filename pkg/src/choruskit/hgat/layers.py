"""Edge-featured multi-head graph attention with residual and FFN, plus the
matching hand-derived backward pass.

One attention step aggregates source-node states into target nodes:

    z_ij   = LeakyReLU(w_a . [W_q h_i ; W_k h_j ; embed(e_ij)])
    alpha  = softmax_j(z_ij) per target and head
    u_i    = concat_heads sum_j alpha_ij W_v h_j
    h'_i   = FFN_residual(h_i + u_i)

Targets without neighbors pass through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def positional_encoding(n: int, dim: int) -> np.ndarray:
    """Interleaved sin/cos position table, (n, dim)."""
    pe = np.zeros((n, dim))
    pos = np.arange(n, dtype=np.float64)[:, None]
    div = np.exp(np.arange(0, dim, 2, dtype=np.float64) * (-np.log(10_000.0) / dim))
    pe[:, 0::2] = np.sin(pos * div)
    pe[:, 1::2] = np.cos(pos * div[: pe[:, 1::2].shape[1]])
    return pe


def segment_softmax(z: np.ndarray, seg: np.ndarray, n_seg: int) -> np.ndarray:
    """Column-wise softmax of z (m, K) within groups given by seg (m,)."""
    k = z.shape[1]
    mx = np.full((n_seg, k), -np.inf)
    np.maximum.at(mx, seg, z)
    ez = np.exp(z - mx[seg])
    den = np.zeros((n_seg, k))
    np.add.at(den, seg, ez)
    return ez / den[seg]


def _segment_softmax_grad(alpha, d_alpha, seg, n_seg):
    s = np.zeros((n_seg, alpha.shape[1]))
    np.add.at(s, seg, alpha * d_alpha)
    return alpha * (d_alpha - s[seg])


@dataclass
class AttendCache:
    noop: bool = False
    h_t: np.ndarray = None
    h_s: np.ndarray = None
    tgt: np.ndarray = None
    src: np.ndarray = None
    e: np.ndarray = None
    qs: np.ndarray = None
    ks: np.ndarray = None
    vs: np.ndarray = None
    edge_vec: np.ndarray = None
    pre: np.ndarray = None
    alpha: np.ndarray = None
    h1: np.ndarray = None
    a1: np.ndarray = None
    r1: np.ndarray = None
    upd: np.ndarray = None  # bool mask of updated targets


def attend_forward(h_t, h_s, tgt, src, e, tensors, prefix, dims):
    """One propagation step; returns (new target states, cache)."""
    n_t = h_t.shape[0]
    if len(tgt) == 0 or h_s.shape[0] == 0:
        return h_t, AttendCache(noop=True, h_t=h_t)
    heads, dk = dims.heads, dims.d_head
    wq, wk, wv = tensors[prefix + "wq"], tensors[prefix + "wk"], tensors[prefix + "wv"]
    wa = tensors[prefix + "wa"]
    we, be = tensors[prefix + "we"], tensors[prefix + "be"]
    w1, b1 = tensors[prefix + "ffn_w1"], tensors[prefix + "ffn_b1"]
    w2, b2 = tensors[prefix + "ffn_w2"], tensors[prefix + "ffn_b2"]

    qs = (h_t @ wq.T).reshape(n_t, heads, dk)
    ks = (h_s @ wk.T).reshape(-1, heads, dk)
    vs = (h_s @ wv.T).reshape(-1, heads, dk)
    edge_vec = e[:, None] * we + be  # (m, d_edge)

    aq, ak, ae = wa[:, :dk], wa[:, dk:2 * dk], wa[:, 2 * dk:]
    pre = (
        np.einsum("mhd,hd->mh", qs[tgt], aq)
        + np.einsum("mhd,hd->mh", ks[src], ak)
        + edge_vec @ ae.T
    )
    z = np.where(pre > 0, pre, dims.leaky_slope * pre)
    alpha = segment_softmax(z, tgt, n_t)

    u = np.zeros((n_t, heads, dk))
    np.add.at(u, tgt, alpha[:, :, None] * vs[src])
    h1 = h_t + u.reshape(n_t, heads * dk)

    a1 = h1 @ w1.T + b1
    r1 = np.maximum(a1, 0.0)
    h2 = h1 + r1 @ w2.T + b2

    upd = np.zeros(n_t, dtype=bool)
    upd[tgt] = True
    out = np.where(upd[:, None], h2, h_t)
    cache = AttendCache(
        h_t=h_t, h_s=h_s, tgt=tgt, src=src, e=e, qs=qs, ks=ks, vs=vs,
        edge_vec=edge_vec, pre=pre, alpha=alpha, h1=h1, a1=a1, r1=r1, upd=upd,
    )
    return out, cache


def attend_backward(cache: AttendCache, d_out, tensors, prefix, dims, grads):
    """Backward for one step; accumulates parameter grads, returns
    (d_target_states, d_source_states)."""
    if cache.noop:
        return d_out, None
    heads, dk = dims.heads, dims.d_head
    n_t = cache.h_t.shape[0]
    n_s = cache.h_s.shape[0]
    wq, wk, wv = tensors[prefix + "wq"], tensors[prefix + "wk"], tensors[prefix + "wv"]
    wa = tensors[prefix + "wa"]
    w1, w2 = tensors[prefix + "ffn_w1"], tensors[prefix + "ffn_w2"]
    aq, ak, ae = wa[:, :dk], wa[:, dk:2 * dk], wa[:, 2 * dk:]

    def acc(name, value):
        grads[prefix + name] = grads.get(prefix + name, 0.0) + value

    mask = cache.upd[:, None]
    dh2 = np.where(mask, d_out, 0.0)
    d_ht = np.where(mask, 0.0, d_out)

    # FFN with residual
    dr1 = dh2 @ w2
    acc("ffn_w2", dh2.T @ cache.r1)
    acc("ffn_b2", dh2.sum(axis=0, keepdims=True))
    da1 = dr1 * (cache.a1 > 0)
    dh1 = dh2 + da1 @ w1
    acc("ffn_w1", da1.T @ cache.h1)
    acc("ffn_b1", da1.sum(axis=0, keepdims=True))

    d_ht = d_ht + dh1  # residual into h_t
    du = dh1.reshape(n_t, heads, dk)

    dmsg = du[cache.tgt]  # (m, K, dk)
    d_alpha = np.einsum("mhd,mhd->mh", dmsg, cache.vs[cache.src])
    dvs = np.zeros_like(cache.vs)
    np.add.at(dvs, cache.src, cache.alpha[:, :, None] * dmsg)

    dz = _segment_softmax_grad(cache.alpha, d_alpha, cache.tgt, n_t)
    dpre = dz * np.where(cache.pre > 0, 1.0, dims.leaky_slope)

    dqs = np.zeros_like(cache.qs)
    np.add.at(dqs, cache.tgt, dpre[:, :, None] * aq[None, :, :])
    dks = np.zeros_like(cache.ks)
    np.add.at(dks, cache.src, dpre[:, :, None] * ak[None, :, :])

    d_aq = np.einsum("mh,mhd->hd", dpre, cache.qs[cache.tgt])
    d_ak = np.einsum("mh,mhd->hd", dpre, cache.ks[cache.src])
    d_ae = dpre.T @ cache.edge_vec
    acc("wa", np.concatenate([d_aq, d_ak, d_ae], axis=1))

    d_edge_vec = dpre @ ae
    acc("we", (d_edge_vec * cache.e[:, None]).sum(axis=0, keepdims=True))
    acc("be", d_edge_vec.sum(axis=0, keepdims=True))

    dqs2 = dqs.reshape(n_t, heads * dk)
    d_ht = d_ht + dqs2 @ wq
    acc("wq", dqs2.T @ cache.h_t)

    dks2 = dks.reshape(n_s, heads * dk)
    dvs2 = dvs.reshape(n_s, heads * dk)
    d_hs = dks2 @ wk + dvs2 @ wv
    acc("wk", dks2.T @ cache.h_s)
    acc("wv", dvs2.T @ cache.h_s)
    return d_ht, d_hs
