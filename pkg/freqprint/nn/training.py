# Copyright 2023 freqprint contributors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Mini-batch training with Adam and early stopping on validation accuracy."""

from typing import Dict, List, Tuple

import numpy as np
import structlog
from more_itertools import chunked
from pydantic import validator

from freqprint.nn.layers import ParamDict
from freqprint.nn.model import CnnModel, backward_batch, batch_cross_entropy, forward_batch
from freqprint.traces.models import FreqprintBaseModel
from freqprint.types import FloatArray, IntArray, Mode
from freqprint.utils.errors import InvalidDatasetError
from freqprint.utils.rng import make_rng

logger = structlog.get_logger(__name__)

EVAL_BATCH_SIZE = 256

LabeledArrays = Tuple[FloatArray, IntArray]


class TrainConfig(FreqprintBaseModel):
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_epsilon: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 100
    early_stop_patience: int = 10
    seed: int = 0

    @validator("learning_rate", "adam_epsilon")
    def _positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @validator("beta1", "beta2")
    def _unit_interval(cls, v: float) -> float:
        if not 0 <= v < 1:
            raise ValueError("must be in [0, 1)")
        return v

    @validator("batch_size", "max_epochs", "early_stop_patience")
    def _at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v


class EpochMetrics(FreqprintBaseModel):
    epoch: int
    train_loss: float
    train_accuracy: float
    validation_loss: float
    validation_accuracy: float


class TrainResult(FreqprintBaseModel):
    model: CnnModel
    metrics: List[EpochMetrics]
    best_epoch: int


class Adam:
    """Adam with bias correction; parameters are updated in place."""

    def __init__(self, cfg: TrainConfig) -> None:
        self.cfg = cfg
        self.step_count = 0
        self.first: Dict[str, FloatArray] = {}
        self.second: Dict[str, FloatArray] = {}

    def step(self, params: ParamDict, grads: ParamDict) -> None:
        cfg = self.cfg
        self.step_count += 1
        correction1 = 1 - cfg.beta1**self.step_count
        correction2 = 1 - cfg.beta2**self.step_count
        for name, value in params.items():
            grad = grads[name]
            m = self.first.setdefault(name, np.zeros_like(value))
            v = self.second.setdefault(name, np.zeros_like(value))
            m *= cfg.beta1
            m += (1 - cfg.beta1) * grad
            v *= cfg.beta2
            v += (1 - cfg.beta2) * grad**2
            value -= cfg.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + cfg.adam_epsilon)


def predict_proba(model: CnnModel, x: FloatArray, batch_size: int = EVAL_BATCH_SIZE) -> FloatArray:
    """Eval mode class probabilities for every row of `x`, computed in fixed size batches."""
    batches = [forward_batch(model, x[start : start + batch_size]) for start in range(0, len(x), batch_size)]
    return np.concatenate(batches) if batches else np.zeros((0, model.num_classes))


def loss_and_accuracy(model: CnnModel, x: FloatArray, y: IntArray) -> Tuple[float, float]:
    probs = predict_proba(model, x)
    return batch_cross_entropy(probs, y), float(np.mean(probs.argmax(axis=1) == y))


def _check_split(name: str, split: LabeledArrays) -> None:
    x, y = split
    if len(x) == 0:
        raise InvalidDatasetError(f"{name} split is empty")
    if len(x) != len(y):
        raise InvalidDatasetError(f"{name} split has {len(x)} inputs but {len(y)} labels")


def train(
    model: CnnModel, train_split: LabeledArrays, validation_split: LabeledArrays, cfg: TrainConfig
) -> TrainResult:
    """Train `model` in place and return it with the weights of its best validation epoch.

    Shuffling and dropout draw from one generator seeded with `cfg.seed`, so a fixed seed reproduces the
    metric trajectory exactly. Training stops once validation accuracy has not improved for
    `early_stop_patience` epochs.
    """
    _check_split("train", train_split)
    _check_split("validation", validation_split)
    x_train, y_train = np.asarray(train_split[0], dtype=np.float64), np.asarray(train_split[1], dtype=np.int64)
    x_val, y_val = np.asarray(validation_split[0], dtype=np.float64), np.asarray(validation_split[1], dtype=np.int64)

    rng = make_rng(cfg.seed)
    optimizer = Adam(cfg)
    metrics: List[EpochMetrics] = []
    best_accuracy = -1.0
    best_epoch = 0
    best_weights = model.get_weights()
    stale = 0

    logger.info(
        "Start training",
        train_items=len(x_train),
        validation_items=len(x_val),
        parameters=model.parameter_count(),
        max_epochs=cfg.max_epochs,
    )
    for epoch in range(1, cfg.max_epochs + 1):
        losses = []
        for batch in chunked(rng.permutation(len(x_train)), cfg.batch_size):
            indices = np.asarray(batch)
            probs = forward_batch(model, x_train[indices], Mode.TRAIN, rng)
            losses.append(batch_cross_entropy(probs, y_train[indices]))
            optimizer.step(model.parameters(), backward_batch(model, y_train[indices]))

        _, train_accuracy = loss_and_accuracy(model, x_train, y_train)
        validation_loss, validation_accuracy = loss_and_accuracy(model, x_val, y_val)
        metrics.append(
            EpochMetrics(
                epoch=epoch,
                train_loss=float(np.mean(losses)),
                train_accuracy=train_accuracy,
                validation_loss=validation_loss,
                validation_accuracy=validation_accuracy,
            )
        )
        logger.debug("Epoch done", **metrics[-1].dict())

        if validation_accuracy > best_accuracy:
            best_accuracy = validation_accuracy
            best_epoch = epoch
            best_weights = model.get_weights()
            stale = 0
        else:
            stale += 1
            if stale >= cfg.early_stop_patience:
                logger.info("Early stop", epoch=epoch, best_epoch=best_epoch)
                break

    model.set_weights(best_weights)
    logger.info("Training finished", best_epoch=best_epoch, validation_accuracy=best_accuracy, epochs=len(metrics))
    return TrainResult(model=model, metrics=metrics, best_epoch=best_epoch)
