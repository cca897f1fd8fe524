"""Character-level headline classification with TextCNN, TextRNN and FastText."""
from .kernels import BACKEND
from .metrics import ConfusionMatrix, MetricsReport, render_report
from .models import ARCHITECTURES, ModelConfig, init_params
from .tensor import Tape, Tensor, backward
from .text import Vocab, build_vocab, encode_dataset, load_dataset, tokenize
from .training import TrainConfig, evaluate, loss_forward, train

__all__ = [
    "BACKEND", "ConfusionMatrix", "MetricsReport", "render_report", "ARCHITECTURES",
    "ModelConfig", "init_params", "Tape", "Tensor", "backward", "Vocab", "build_vocab",
    "encode_dataset", "load_dataset", "tokenize", "TrainConfig", "evaluate", "loss_forward",
    "train",
]
__version__ = "0.1.0"
