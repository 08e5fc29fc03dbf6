"""Line recognizer: CNN feature extractor + transformer encoder-decoder,
trained with teacher forcing and decoded greedily."""

from invizo.recognizer.vocab import PAD_ID, SOS_ID, EOS_ID, Vocabulary
from invizo.recognizer.model import (
    LineRecognizer,
    ModelConfig,
    causal_mask,
    sinusoidal_position_encoding,
)
from invizo.recognizer.training import (
    TrainingDiverged,
    batch_iterator,
    encode_batch,
    make_optimizer,
    masked_cross_entropy,
    train_step,
)
from invizo.recognizer.decoding import greedy_decode, prepare_line_image, recognize
from invizo.recognizer.checkpoint import (
    CheckpointError,
    load_checkpoint,
    read_manifest,
    save_checkpoint,
)

__all__ = [
    "PAD_ID",
    "SOS_ID",
    "EOS_ID",
    "Vocabulary",
    "LineRecognizer",
    "ModelConfig",
    "causal_mask",
    "sinusoidal_position_encoding",
    "TrainingDiverged",
    "batch_iterator",
    "encode_batch",
    "make_optimizer",
    "masked_cross_entropy",
    "train_step",
    "greedy_decode",
    "prepare_line_image",
    "recognize",
    "CheckpointError",
    "load_checkpoint",
    "read_manifest",
    "save_checkpoint",
]
