"""Greedy decoding and image preparation for inference.

``prepare_line_image`` fits an arbitrary field crop onto the recognizer's
fixed canvas the same way training lines are composed: scale to the
canvas height (shrinking further if the line is too wide), right-align,
pad with background.  ``greedy_decode`` rolls the decoder forward one
argmax token at a time until end-of-sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from invizo.imaging.raster import RasterImage, resize_bilinear, to_grayscale
from invizo.recognizer.model import LineRecognizer
from invizo.recognizer.training import image_to_tensor
from invizo.recognizer.vocab import EOS_ID, SOS_ID, Vocabulary

BACKGROUND = 255


@dataclass(frozen=True)
class DecodeResult:
    token_ids: list[int]
    logprobs: list[float]
    text: str


def prepare_line_image(image: RasterImage, cfg) -> RasterImage:
    """Fit a crop onto the ``input_height x input_width`` canvas."""
    import numpy as np

    gray = to_grayscale(image) if image.pixels.ndim == 3 else image
    h, w = gray.pixels.shape
    target_h, target_w = cfg.input_height, cfg.input_width
    scale = target_h / h
    new_w = max(1, int(round(w * scale)))
    new_h = target_h
    if new_w > target_w:
        shrink = target_w / new_w
        new_w = target_w
        new_h = max(1, int(round(target_h * shrink)))
    scaled = resize_bilinear(gray, new_w, new_h).pixels
    canvas = np.full((target_h, target_w), BACKGROUND, dtype=np.uint8)
    top = (target_h - new_h) // 2
    canvas[top : top + new_h, target_w - new_w :] = scaled
    return RasterImage(canvas)


@torch.no_grad()
def greedy_decode(
    model: LineRecognizer,
    images: torch.Tensor,
    max_out: int = 128,
) -> list[tuple[list[int], list[float]]]:
    """Argmax decoding for a batch of prepared image tensors.

    Returns per sample the emitted token ids (without SOS, including EOS
    when produced) and the log-probability of each emitted token.
    """
    model.eval()
    batch = images.shape[0]
    memory = model.encode(images)
    tokens = torch.full((batch, 1), SOS_ID, dtype=torch.long, device=images.device)
    emitted: list[list[int]] = [[] for _ in range(batch)]
    logprobs: list[list[float]] = [[] for _ in range(batch)]
    finished = [False] * batch

    for _ in range(max_out):
        logits = model.decode(memory, tokens)[:, -1, :]
        step_logprobs = torch.log_softmax(logits, dim=-1)
        next_tokens = logits.argmax(dim=-1)
        for row in range(batch):
            if finished[row]:
                continue
            tok = int(next_tokens[row])
            emitted[row].append(tok)
            logprobs[row].append(float(step_logprobs[row, tok]))
            if tok == EOS_ID:
                finished[row] = True
        if all(finished):
            break
        tokens = torch.cat([tokens, next_tokens.unsqueeze(1)], dim=1)

    return list(zip(emitted, logprobs))


def recognize(
    model: LineRecognizer,
    vocab: Vocabulary,
    image: RasterImage,
    max_out: int = 128,
) -> DecodeResult:
    """Recognize one field crop: prepare, decode greedily, detokenize."""
    prepared = prepare_line_image(image, model.cfg)
    tensor = image_to_tensor(prepared, model.cfg).unsqueeze(0)
    (ids, lps), = greedy_decode(model, tensor, max_out=max_out)
    return DecodeResult(token_ids=ids, logprobs=lps, text=vocab.decode(ids))
