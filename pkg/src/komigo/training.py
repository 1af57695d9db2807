"""Training driver: records file(s) -> updated weight file.

Samples batches uniformly from the most recent `window` records and runs
SGD-with-momentum steps on the combined policy/value/regularization loss.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .network import Network, SgdMomentum, TrainingBatch, train_step
from .records import load_window

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Training knobs.  window: positions kept; 8k-60k works well on 7x7."""

    steps: int = 1000
    batch_size: int = 64
    lr: float = 0.02
    momentum: float = 0.9
    window: int = 16000
    seed: int = 0
    max_grad_norm: float = 1.0

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be positive")
        if self.steps < 1 or self.batch_size < 1:
            raise ValueError("steps and batch_size must be positive")


def batch_from_records(records, indices, planes_count) -> TrainingBatch:
    sample = [records[i] for i in indices]
    return TrainingBatch(
        planes=np.stack([r.planes for r in sample]).astype(np.float64),
        targets=np.stack([r.policy_target for r in sample]),
        kbar=np.array([r.signed_komi for r in sample]),
        z=np.array([float(r.z) for r in sample]),
    )


def train(net: Network, data_paths, cfg: TrainConfig, progress_every: int = 200):
    """Runs cfg.steps SGD steps on the newest cfg.window records in place.

    Returns (net, history) where history is the list of periodic losses.
    """
    records = load_window(data_paths, cfg.window)
    if not records:
        raise ValueError("no training records found")
    rng = np.random.default_rng(cfg.seed)
    optimizer = SgdMomentum(net.params, momentum=cfg.momentum)
    history = []
    for step in range(cfg.steps):
        indices = rng.integers(0, len(records), size=min(cfg.batch_size, len(records)))
        batch = batch_from_records(records, indices, net.cfg.input_planes)
        parts = train_step(net, optimizer, batch, cfg.lr, max_grad_norm=cfg.max_grad_norm)
        if step % progress_every == 0 or step == cfg.steps - 1:
            history.append(parts)
            log.info(
                "step %d: total=%.4f ce=%.4f value=%.4f l2=%.4f",
                step, parts["total"], parts["ce"], parts["value"], parts["l2"],
            )
    return net, history
