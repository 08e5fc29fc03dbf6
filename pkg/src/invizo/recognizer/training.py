"""Teacher-forced training utilities for the line recognizer.

The loss is cross-entropy averaged over non-padding target positions
only: ``sum(per-token CE where target != PAD) / max(1, n_non_pad)``.  A
batch whose targets are entirely padding therefore contributes zero loss
and zero gradients rather than NaN.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np
import torch
from torch import nn

from invizo.imaging.raster import RasterImage
from invizo.recognizer.model import LineRecognizer, ModelConfig
from invizo.recognizer.vocab import EOS_ID, PAD_ID, SOS_ID, Vocabulary


class TrainingDiverged(Exception):
    """The loss became NaN or infinite."""


def masked_cross_entropy(
    logits: torch.Tensor, targets: torch.Tensor, pad_id: int = PAD_ID
) -> torch.Tensor:
    """Cross-entropy over non-pad positions, averaged by their count."""
    vocab = logits.shape[-1]
    flat_logits = logits.reshape(-1, vocab)
    flat_targets = targets.reshape(-1)
    mask = flat_targets != pad_id
    count = int(mask.sum())
    if count == 0:
        # Keep the graph connected so .backward() still works.
        return logits.sum() * 0.0
    per_token = nn.functional.cross_entropy(
        flat_logits[mask], flat_targets[mask], reduction="sum"
    )
    return per_token / count


def make_optimizer(model: LineRecognizer, cfg: ModelConfig) -> torch.optim.Optimizer:
    return torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate)


def train_step(
    model: LineRecognizer,
    optimizer: torch.optim.Optimizer,
    images: torch.Tensor,
    decoder_input: torch.Tensor,
    decoder_target: torch.Tensor,
) -> float:
    """One optimization step; returns the batch loss.

    Raises ``TrainingDiverged`` if the loss is not finite.
    """
    model.train()
    optimizer.zero_grad()
    logits = model(images, decoder_input)
    loss = masked_cross_entropy(logits, decoder_target)
    if not torch.isfinite(loss):
        raise TrainingDiverged(f"non-finite loss: {loss.item()!r}")
    loss.backward()
    optimizer.step()
    return float(loss.item())


def image_to_tensor(image: RasterImage, cfg: ModelConfig) -> torch.Tensor:
    """Grayscale canvas -> (channels, H, W) float tensor in [0, 1]."""
    px = image.pixels
    if px.ndim != 2:
        raise ValueError("expected a grayscale line image")
    if px.shape != (cfg.input_height, cfg.input_width):
        raise ValueError(
            f"expected {cfg.input_height}x{cfg.input_width} input, "
            f"got {px.shape[0]}x{px.shape[1]}"
        )
    t = torch.from_numpy(px.astype(np.float32) / 255.0)
    return t.unsqueeze(0).repeat(cfg.input_channels, 1, 1)


def encode_batch(
    samples: Sequence[tuple[RasterImage, str]],
    vocab: Vocabulary,
    cfg: ModelConfig,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Build (images, decoder_input, decoder_target) tensors.

    Token stream per label: ``SOS, chars..., EOS`` padded to the batch
    maximum; decoder input drops the last element, the target drops the
    first (standard one-step shift).
    """
    if not samples:
        raise ValueError("empty batch")
    images = torch.stack([image_to_tensor(img, cfg) for img, _ in samples])
    sequences = [[SOS_ID] + vocab.encode(label) + [EOS_ID] for _, label in samples]
    max_len = max(len(s) for s in sequences)
    padded = torch.full((len(sequences), max_len), PAD_ID, dtype=torch.long)
    for row, seq in enumerate(sequences):
        padded[row, : len(seq)] = torch.tensor(seq, dtype=torch.long)
    return images, padded[:, :-1], padded[:, 1:]


def batch_iterator(
    samples: Sequence[tuple[RasterImage, str]],
    vocab: Vocabulary,
    cfg: ModelConfig,
    seed: int = 0,
) -> Iterator[tuple[torch.Tensor, torch.Tensor, torch.Tensor]]:
    """Endless shuffled batches of ``cfg.batch_size`` encoded samples."""
    rng = np.random.default_rng(seed)
    order = np.arange(len(samples))
    while True:
        rng.shuffle(order)
        for start in range(0, len(order), cfg.batch_size):
            chunk = [samples[i] for i in order[start : start + cfg.batch_size]]
            if chunk:
                yield encode_batch(chunk, vocab, cfg)
