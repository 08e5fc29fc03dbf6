"""CNN + transformer encoder-decoder for Arabic text-line images.

Input is a fixed ``height x width`` canvas (3 channels).  A three-block
CNN (3x3 conv, batch norm, ReLU, 2x2 max pool) reduces it 8x in each
axis; every remaining image column becomes one encoder token via a linear
projection, so the encoder sequence length is ``width / 8``.  Sinusoidal
position encodings are added to both encoder input and decoder character
embeddings.  The decoder attends causally over previously emitted tokens
and fully over the encoder memory, and a final linear layer produces
per-character logits.

Attention, encoder and decoder layers are written out explicitly (no
``nn.Transformer``) so their internals -- attention weights, masking,
post-layer-norm residual arithmetic -- are inspectable and testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

PAD_ID = 0


def sinusoidal_position_encoding(max_len: int, d_model: int) -> np.ndarray:
    """Classic sin/cos position table, computed in float64.

    ``out[pos, 2i] = sin(pos / 10000^(2i / d_model))`` and
    ``out[pos, 2i + 1] = cos`` of the same angle; shape
    ``(max_len, d_model)``.
    """
    if d_model % 2 != 0:
        raise ValueError("d_model must be even for sin/cos pairing")
    positions = np.arange(max_len, dtype=np.float64)[:, None]
    i = np.arange(0, d_model, 2, dtype=np.float64)[None, :]
    angles = positions / np.power(10000.0, i / d_model)
    table = np.zeros((max_len, d_model), dtype=np.float64)
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles)
    return table


def causal_mask(size: int, device: torch.device | None = None) -> torch.Tensor:
    """Boolean mask, True where attention is *blocked* (future positions)."""
    return torch.triu(
        torch.ones(size, size, dtype=torch.bool, device=device), diagonal=1
    )


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and training hyperparameters."""

    d_model: int = 256
    n_heads: int = 8
    n_encoder_layers: int = 6
    n_decoder_layers: int = 6
    ffn_dim: int = 512
    dropout: float = 0.1
    conv_channels: tuple[int, int, int] = (32, 64, 128)
    input_height: int = 64
    input_width: int = 1024
    input_channels: int = 3
    max_len: int = 2048
    batch_size: int = 16
    learning_rate: float = 1e-4
    epochs: int = 55

    def __post_init__(self) -> None:
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        if len(self.conv_channels) != 3:
            raise ValueError("conv_channels must list three block widths")
        if self.input_height % 8 != 0 or self.input_width % 8 != 0:
            raise ValueError("input dimensions must be divisible by 8")

    @property
    def encoder_length(self) -> int:
        return self.input_width // 8

    @property
    def feature_height(self) -> int:
        return self.input_height // 8


class MultiHeadAttention(nn.Module):
    """Scaled dot-product attention with explicit per-head arithmetic."""

    def __init__(self, d_model: int, n_heads: int, dropout: float):
        super().__init__()
        self.d_model = d_model
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.q_proj = nn.Linear(d_model, d_model)
        self.k_proj = nn.Linear(d_model, d_model)
        self.v_proj = nn.Linear(d_model, d_model)
        self.out_proj = nn.Linear(d_model, d_model)
        self.dropout = nn.Dropout(dropout)
        self.last_weights: torch.Tensor | None = None

    def forward(
        self,
        query: torch.Tensor,
        key: torch.Tensor,
        value: torch.Tensor,
        mask: torch.Tensor | None = None,
        store_weights: bool = False,
    ) -> torch.Tensor:
        b, n_q, _ = query.shape
        n_k = key.shape[1]

        def split(t: torch.Tensor, n: int) -> torch.Tensor:
            return t.view(b, n, self.n_heads, self.d_head).transpose(1, 2)

        q = split(self.q_proj(query), n_q)
        k = split(self.k_proj(key), n_k)
        v = split(self.v_proj(value), n_k)

        scores = q @ k.transpose(-2, -1) / math.sqrt(self.d_head)
        if mask is not None:
            scores = scores.masked_fill(mask, float("-inf"))
        weights = torch.softmax(scores, dim=-1)
        if store_weights:
            self.last_weights = weights.detach()
        weights = self.dropout(weights)
        context = weights @ v
        context = context.transpose(1, 2).reshape(b, n_q, self.d_model)
        return self.out_proj(context)


class FeedForward(nn.Module):
    def __init__(self, d_model: int, ffn_dim: int, dropout: float):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(d_model, ffn_dim),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(ffn_dim, d_model),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


class EncoderLayer(nn.Module):
    """Post-norm layer: LN(x + SelfAttn(x)), then LN(x + FFN(x))."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.self_attn = MultiHeadAttention(cfg.d_model, cfg.n_heads, cfg.dropout)
        self.ffn = FeedForward(cfg.d_model, cfg.ffn_dim, cfg.dropout)
        self.norm1 = nn.LayerNorm(cfg.d_model)
        self.norm2 = nn.LayerNorm(cfg.d_model)
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(
        self, x: torch.Tensor, store_weights: bool = False
    ) -> torch.Tensor:
        x = self.norm1(x + self.dropout(
            self.self_attn(x, x, x, store_weights=store_weights)
        ))
        x = self.norm2(x + self.dropout(self.ffn(x)))
        return x


class DecoderLayer(nn.Module):
    """Post-norm layer: causal self-attention, cross-attention, FFN."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.self_attn = MultiHeadAttention(cfg.d_model, cfg.n_heads, cfg.dropout)
        self.cross_attn = MultiHeadAttention(cfg.d_model, cfg.n_heads, cfg.dropout)
        self.ffn = FeedForward(cfg.d_model, cfg.ffn_dim, cfg.dropout)
        self.norm1 = nn.LayerNorm(cfg.d_model)
        self.norm2 = nn.LayerNorm(cfg.d_model)
        self.norm3 = nn.LayerNorm(cfg.d_model)
        self.dropout = nn.Dropout(cfg.dropout)

    def forward(
        self,
        x: torch.Tensor,
        memory: torch.Tensor,
        self_mask: torch.Tensor | None,
        store_weights: bool = False,
    ) -> torch.Tensor:
        x = self.norm1(x + self.dropout(
            self.self_attn(x, x, x, mask=self_mask, store_weights=store_weights)
        ))
        x = self.norm2(x + self.dropout(
            self.cross_attn(x, memory, memory, store_weights=store_weights)
        ))
        x = self.norm3(x + self.dropout(self.ffn(x)))
        return x


def _conv_block(c_in: int, c_out: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(c_in, c_out, kernel_size=3, padding=1),
        nn.BatchNorm2d(c_out),
        nn.ReLU(),
        nn.MaxPool2d(kernel_size=2, stride=2),
    )


class LineRecognizer(nn.Module):
    def __init__(self, cfg: ModelConfig, vocab_size: int):
        super().__init__()
        self.cfg = cfg
        self.vocab_size = vocab_size
        c1, c2, c3 = cfg.conv_channels
        self.backbone = nn.Sequential(
            _conv_block(cfg.input_channels, c1),
            _conv_block(c1, c2),
            _conv_block(c2, c3),
        )
        self.feature_proj = nn.Linear(c3 * cfg.feature_height, cfg.d_model)
        self.embedding = nn.Embedding(vocab_size, cfg.d_model, padding_idx=PAD_ID)
        self.encoder_layers = nn.ModuleList(
            EncoderLayer(cfg) for _ in range(cfg.n_encoder_layers)
        )
        self.decoder_layers = nn.ModuleList(
            DecoderLayer(cfg) for _ in range(cfg.n_decoder_layers)
        )
        self.output_proj = nn.Linear(cfg.d_model, vocab_size)
        self.input_dropout = nn.Dropout(cfg.dropout)

        table = sinusoidal_position_encoding(cfg.max_len, cfg.d_model)
        self.register_buffer(
            "position_table", torch.from_numpy(table).to(torch.float32)
        )

    def _positions(self, length: int, ref: torch.Tensor) -> torch.Tensor:
        if length > self.position_table.shape[0]:
            raise ValueError(
                f"sequence length {length} exceeds position table "
                f"({self.position_table.shape[0]})"
            )
        return self.position_table[:length].to(dtype=ref.dtype, device=ref.device)

    def extract_features(self, images: torch.Tensor) -> torch.Tensor:
        """CNN features as a sequence: (batch, width/8, d_model), no PE."""
        feats = self.backbone(images)  # (b, c3, h/8, w/8)
        b, c, h, w = feats.shape
        columns = feats.permute(0, 3, 1, 2).reshape(b, w, c * h)
        return self.feature_proj(columns)

    def encode(
        self, images: torch.Tensor, store_weights: bool = False
    ) -> torch.Tensor:
        x = self.extract_features(images)
        x = x + self._positions(x.shape[1], x)
        x = self.input_dropout(x)
        for layer in self.encoder_layers:
            x = layer(x, store_weights=store_weights)
        return x

    def decode(
        self,
        memory: torch.Tensor,
        tokens: torch.Tensor,
        store_weights: bool = False,
    ) -> torch.Tensor:
        x = self.embedding(tokens)
        x = x + self._positions(x.shape[1], x)
        x = self.input_dropout(x)
        mask = causal_mask(tokens.shape[1], device=tokens.device)
        for layer in self.decoder_layers:
            x = layer(x, memory, mask, store_weights=store_weights)
        return self.output_proj(x)

    def forward(
        self, images: torch.Tensor, tokens: torch.Tensor
    ) -> torch.Tensor:
        """Teacher-forced logits: (batch, len(tokens), vocab_size)."""
        return self.decode(self.encode(images), tokens)
