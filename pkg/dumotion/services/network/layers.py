"""Transformer building blocks with adapter and prefix attachment points."""

import math

import torch
import torch.nn.functional as F
from torch import nn


def timestep_embedding(
    timesteps: torch.Tensor, dim: int, max_period: int = 10000
) -> torch.Tensor:
    """Sinusoidal embeddings of integer steps, shape (B, dim)."""
    half = dim // 2
    freqs = torch.exp(
        -math.log(max_period) * torch.arange(half, dtype=torch.float64) / half
    ).to(device=timesteps.device)
    args = timesteps[:, None].double() * freqs[None]
    embedding = torch.cat([torch.cos(args), torch.sin(args)], dim=-1)
    if dim % 2:
        embedding = torch.cat([embedding, torch.zeros_like(embedding[:, :1])], dim=-1)
    return embedding


def sinusoidal_table(length: int, dim: int) -> torch.Tensor:
    """Fixed positional table, shape (length, dim)."""
    return timestep_embedding(torch.arange(length), dim)


def zero_module(module: nn.Module) -> nn.Module:
    """Zero out the parameters of a module and return it."""
    for p in module.parameters():
        p.detach().zero_()
    return module


def split_heads(x: torch.Tensor, n_heads: int) -> torch.Tensor:
    b, n, d = x.shape
    return x.view(b, n, n_heads, d // n_heads).transpose(1, 2)


def merge_heads(x: torch.Tensor) -> torch.Tensor:
    b, h, n, dh = x.shape
    return x.transpose(1, 2).reshape(b, n, h * dh)


def attend(q: torch.Tensor, k: torch.Tensor, v: torch.Tensor) -> torch.Tensor:
    """softmax(q k^T / sqrt(d_head)) v over the last two dims."""
    scores = q @ k.transpose(-2, -1) / math.sqrt(q.shape[-1])
    return torch.softmax(scores, dim=-1) @ v


class MultiHeadAttention(nn.Module):
    """Multi-head attention with an optional learned prefix on keys and values."""

    def __init__(self, d_model: int, n_heads: int, dropout: float = 0.0) -> None:
        super().__init__()
        self.n_heads = n_heads
        self.q_proj = nn.Linear(d_model, d_model)
        self.k_proj = nn.Linear(d_model, d_model)
        self.v_proj = nn.Linear(d_model, d_model)
        self.out_proj = nn.Linear(d_model, d_model)
        self.dropout = nn.Dropout(dropout)
        self.prefix: nn.Module | None = None

    def forward(
        self,
        query: torch.Tensor,
        memory: torch.Tensor | None = None,
        cond: torch.Tensor | None = None,
    ) -> torch.Tensor:
        memory = query if memory is None else memory
        q = split_heads(self.q_proj(query), self.n_heads)
        k = split_heads(self.k_proj(memory), self.n_heads)
        v = split_heads(self.v_proj(memory), self.n_heads)

        if self.prefix is None:
            out = attend(q, k, v)
        else:
            prefix_k, prefix_v = self.prefix(query.shape[0], cond)
            out = prefix_attention(
                q,
                k,
                v,
                split_heads(prefix_k, self.n_heads),
                split_heads(prefix_v, self.n_heads),
                joint=self.prefix.joint,
            )
        return self.out_proj(self.dropout(merge_heads(out)))


def prefix_attention(
    q: torch.Tensor,
    k: torch.Tensor,
    v: torch.Tensor,
    prefix_k: torch.Tensor,
    prefix_v: torch.Tensor,
    joint: bool = False,
) -> torch.Tensor:
    """Attention with prefix tokens; the output keeps the query length.

    Joint mode prepends the prefix to keys and values under one softmax.
    Otherwise the prefix gets its own softmax and its read-out is added,
    so an all-zero value prefix leaves the output untouched.
    """
    if joint:
        keys = torch.cat([prefix_k, k], dim=-2)
        return attend(q, keys, torch.cat([prefix_v, v], dim=-2))
    return attend(q, k, v) + attend(q, prefix_k, prefix_v)


class FeedForward(nn.Module):
    def __init__(self, d_model: int, d_ff: int, dropout: float = 0.0) -> None:
        super().__init__()
        self.linear1 = nn.Linear(d_model, d_ff)
        self.linear2 = nn.Linear(d_ff, d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.linear2(self.dropout(F.gelu(self.linear1(x))))


class EncoderLayer(nn.Module):
    """Pre-norm self-attention block.

    ``mha_adapter`` and ``ffn_adapter`` start empty; PEFT injection fills
    them. Each adapter sees the sublayer input and output.
    """

    def __init__(self, d_model: int, n_heads: int, d_ff: int, dropout: float) -> None:
        super().__init__()
        self.norm1 = nn.LayerNorm(d_model)
        self.self_attn = MultiHeadAttention(d_model, n_heads, dropout)
        self.norm2 = nn.LayerNorm(d_model)
        self.ffn = FeedForward(d_model, d_ff, dropout)
        self.dropout = nn.Dropout(dropout)
        self.mha_adapter: nn.Module | None = None
        self.ffn_adapter: nn.Module | None = None

    def forward(
        self, x: torch.Tensor, cond: torch.Tensor | None = None
    ) -> torch.Tensor:
        attn = self.self_attn(self.norm1(x), cond=cond)
        if self.mha_adapter is not None:
            attn = self.mha_adapter(x, attn, cond)
        x = x + self.dropout(attn)

        ff = self.ffn(self.norm2(x))
        if self.ffn_adapter is not None:
            ff = self.ffn_adapter(x, ff, cond)
        return x + self.dropout(ff)


class DecoderLayer(nn.Module):
    """Pre-norm self-attention, cross-attention over audio, feed-forward."""

    def __init__(self, d_model: int, n_heads: int, d_ff: int, dropout: float) -> None:
        super().__init__()
        self.norm1 = nn.LayerNorm(d_model)
        self.self_attn = MultiHeadAttention(d_model, n_heads, dropout)
        self.norm2 = nn.LayerNorm(d_model)
        self.cross_attn = MultiHeadAttention(d_model, n_heads, dropout)
        self.norm3 = nn.LayerNorm(d_model)
        self.ffn = FeedForward(d_model, d_ff, dropout)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, memory: torch.Tensor) -> torch.Tensor:
        x = x + self.dropout(self.self_attn(self.norm1(x)))
        x = x + self.dropout(self.cross_attn(self.norm2(x), memory))
        return x + self.dropout(self.ffn(self.norm3(x)))
