"""Dual-stream training.

Every batch pairs event sequences with class-matched appearance sequences,
splices them into a mixed stream and runs both streams through the shared
network: the mixed stream feeds the mixed class head, the auxiliary modality
and ratio heads, and the event stream feeds the event class head. The event
head is the one evaluated.

Ablations keep the loss slots fixed: without the alignment term the ``rda``
slot holds the plain event-stream TET loss with weight 1, so the event head
is always trained. ``method="event_only"`` skips the mixed stream entirely.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np

from ..autodiff import SGD, Adam, cosine_lr
from ..data import PairedDataset, gen_synthetic_paired, load_dataset, make_pair_batches
from ..losses import AlignmentGates, NonFiniteLossError, mag_loss, mrp_loss, rda_loss, tet_loss, total_loss
from ..mixup import TimeStepMixup, mix_batch, schedule_ratio
from ..snn import LIFParams, Network, build_network, snn_forward
from .checkpoints import save_network
from .config import TrainConfig
from .evaluate import evaluate_network
from .metrics import LOSS_FIELDS, EpochMetrics, MetricsLog


class TrainingAborted(RuntimeError):
    def __init__(self, epoch: int, batch: int, cause: Exception):
        super().__init__(f"epoch {epoch}, batch {batch}: {cause}")
        self.epoch = epoch
        self.batch = batch
        self.cause = cause


@dataclass
class TrainResult:
    net: Network
    gates: AlignmentGates
    metrics: List[EpochMetrics]
    checkpoint_path: Optional[Path] = None
    metrics_path: Optional[Path] = None
    extra: dict = field(default_factory=dict)


def load_training_data(config: TrainConfig) -> PairedDataset:
    if config.data_dir:
        ds = load_dataset(config.data_dir)
    else:
        ds = gen_synthetic_paired(config.synth_classes, config.synth_per_class, config.synth_size,
                                  config.synth_size, config.T, seed=config.synth_seed)
    if len(ds.train) == 0:
        raise ValueError("training split is empty")
    steps = ds.train.event[0].T
    if steps != config.T:
        raise ValueError(f"dataset has {steps} time-steps, config asks for T={config.T}")
    bad = sorted(set(ds.test.labels.tolist()) - set(ds.train.labels.tolist()))
    if bad:
        raise ValueError(f"test classes {bad} never appear in the training split")
    return ds


def _build(config: TrainConfig, ds: PairedDataset, seed: int) -> Network:
    sample = ds.train.event[0].frames
    lif = LIFParams(config.lif.tau, config.lif.v_th, config.lif.surrogate_width)
    return build_network(config.arch, in_channels=sample.shape[1], n_classes=ds.n_classes, lif=lif,
                         input_size=sample.shape[2:], hidden=config.hidden or None, seed=seed,
                         time_steps=config.T, gain=config.init_gain)


def _optimizer(config: TrainConfig, params):
    opt = config.optimizer
    if opt.kind == "adam":
        return Adam(params, lr=opt.lr, betas=(opt.beta1, opt.beta2), eps=opt.eps)
    return SGD(params, lr=opt.lr, momentum=opt.momentum)


def batch_losses(config: TrainConfig, net: Network, gates: AlignmentGates, event, appearance, labels, t_star):
    """Forward both streams for one batch and assemble the loss bundle.

    Returns (bundle, event-stream activations).
    """
    event_acts = snn_forward(net, event, head="event")
    cls_e = tet_loss(event_acts.logits, labels)
    if config.method == "event_only":
        return total_loss(0.0, cls_e, 0.0, 0.0, lam=1.0, cls_e=cls_e), event_acts

    mixed, y_s, y_m = mix_batch(appearance, event, t_star)
    mixed_acts = snn_forward(net, mixed, head="mixed")
    cls_m = tet_loss(mixed_acts.logits, labels)
    mag = mag_loss(mixed_acts.mag_logits, y_s) if config.use_mag else 0.0
    mrp = mrp_loss(mixed_acts.pred_ratio, y_m) if config.use_mrp else 0.0
    if config.use_rda:
        rda = rda_loss(mixed_acts.potentials, event_acts.potentials, event_acts.logits, labels, gates,
                       mode=config.rda_regularizer_mode)
        lam = config.lam
    else:
        rda, lam = cls_e, 1.0
    return total_loss(cls_m, rda, mag, mrp, lam=lam, cls_e=cls_e), event_acts


def run_training(config: TrainConfig, dataset: Optional[PairedDataset] = None, write: bool = True,
                 progress: Optional[Callable[[EpochMetrics], None]] = None) -> TrainResult:
    """Train per ``config``; writes metrics.csv, timing.csv, config.txt and checkpoint.tmkt to ``out_dir``."""
    config.validate()
    ds = dataset if dataset is not None else load_training_data(config)
    init_seq, shuffle_seq, mixup_seq = np.random.SeedSequence(config.seed).spawn(3)
    net = _build(config, ds, seed=int(init_seq.generate_state(1)[0]))
    gates = AlignmentGates.zeros(config.T)
    params = net.named_parameters() + [(gates.theta.name, gates.theta)]
    opt = _optimizer(config, params)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    mixup_rng = np.random.default_rng(mixup_seq)
    mixer = TimeStepMixup(config.T, config.expectation_mode)
    kind = config.schedule_kind if config.use_tsm else "fixed"
    base_ratio = config.r_m if config.use_tsm else 1.0

    train_arrays = ds.train.arrays()
    test_app, test_evt, test_labels = ds.test.arrays()
    n_train = len(ds.train)
    n_batches = -(-n_train // config.batch_size)
    total_steps = n_batches * config.epochs
    fixed_t_star = None
    if not config.fresh_t_star and config.method != "event_only":
        fixed_t_star = mixer.draw(kind, schedule_ratio(kind, r_m=base_ratio), n_train, mixup_rng)

    out = Path(config.out_dir)
    log = MetricsLog(out / "metrics.csv", config.T, out / "timing.csv") if write else None
    if write:
        (out / "config.txt").write_text(config.dumps())

    history = []
    for epoch in range(config.epochs):
        started = time.perf_counter()
        sums = dict.fromkeys(LOSS_FIELDS, 0.0)
        correct = 0
        batches = make_pair_batches(ds.train, config.batch_size, shuffle_rng, arrays=train_arrays)
        for b, batch in enumerate(batches):
            opt.lr = config.optimizer.lr
            if config.optimizer.schedule == "cosine":
                opt.lr = cosine_lr(config.optimizer.lr, epoch * n_batches + b, total_steps)
            if config.method == "event_only":
                t_star = None
            elif fixed_t_star is not None:
                t_star = fixed_t_star[batch.indices]
            else:
                ratio = schedule_ratio(kind, b_i=b, b_l=n_batches, e_c=epoch, e_m=config.epochs, r_m=base_ratio)
                t_star = mixer.draw(kind, ratio, len(batch), mixup_rng)
            try:
                bundle, event_acts = batch_losses(config, net, gates, batch.event, batch.appearance,
                                                  batch.classes, t_star)
            except NonFiniteLossError as err:
                raise TrainingAborted(epoch + 1, b + 1, err) from err
            opt.zero_grad()
            bundle.total.backward()
            opt.step()
            for k, v in bundle.as_floats().items():
                if k in sums:
                    sums[k] += v
            correct += int(np.sum(np.argmax(event_acts.mean_logits(), axis=1) == batch.classes))

        test_acc = 0.0
        if test_evt is not None:
            test_acc = evaluate_network(net, test_evt, test_labels).accuracy
        m = EpochMetrics(
            epoch=epoch + 1,
            losses={k: v / n_batches for k, v in sums.items()},
            train_acc=correct / n_train,
            test_acc=test_acc,
            gate_means=[float(g) for g in gates.weights()],
            wall_time=time.perf_counter() - started,
        )
        history.append(m)
        if log:
            log.append(m)
        if progress:
            progress(m)

    result = TrainResult(net, gates, history)
    if write:
        result.checkpoint_path = out / "checkpoint.tmkt"
        result.metrics_path = out / "metrics.csv"
        save_network(result.checkpoint_path, net, gates)
    return result
