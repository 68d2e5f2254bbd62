"""Training loop: SGD + cosine schedule, early stopping, MIOU selection."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import torch

from .model import NetConfig, SegNet


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4              # initial learning rate
    batch_size: int = 8
    max_epochs: int = 50
    patience: int = 5             # epochs of non-decreasing validation loss
    momentum: float = 0.0         # plain SGD
    loss_scale: str = "image_sum"  # BCE summed per image, averaged over batch
    seed: int = 0

    def __post_init__(self):
        if self.patience >= self.max_epochs:
            raise ValueError("patience must be < max_epochs")
        if self.loss_scale not in ("image_sum", "pixel_mean"):
            raise ValueError("loss_scale must be image_sum or pixel_mean")


def bce_loss(pred, target, loss_scale: str = "image_sum"):
    """Binary cross entropy; either per-pixel mean or per-image pixel sum
    averaged over the batch (keeps the gradient scale independent of batch
    size but proportional to the image area)."""
    per_pixel = torch.nn.functional.binary_cross_entropy(
        pred, target, reduction="none"
    )
    if loss_scale == "pixel_mean":
        return per_pixel.mean()
    return per_pixel.sum(dim=(-2, -1)).mean()


def miou(pred, target, threshold: float = 0.5) -> float:
    """Mean IOU of the background and curvature classes at a threshold."""
    p = (pred >= threshold)
    t = (target >= 0.5)
    ious = []
    for positive in (False, True):
        pp = p if positive else ~p
        tt = t if positive else ~t
        union = (pp | tt).sum().item()
        ious.append(((pp & tt).sum().item() / union) if union else 1.0)
    return float(np.mean(ious))


def init_output_bias(net: SegNet, positive_rate: float) -> None:
    """Start the head at the label prior so early epochs are not spent
    re-learning the class imbalance."""
    rate = min(max(positive_rate, 1e-6), 1 - 1e-6)
    with torch.no_grad():
        net.head.bias.fill_(math.log(rate / (1.0 - rate)))


def train(x_train, y_train, x_val, y_val,
          net_config: NetConfig = NetConfig(),
          train_config: TrainConfig = TrainConfig(),
          verbose: bool = False):
    """Fit the network; returns (best_state, history).

    history is a list of per-epoch dicts (train_loss, val_loss, val_miou).
    The returned state dict is the epoch with the highest validation MIOU.
    Training stops early when the validation loss has not decreased for
    `patience` consecutive epochs.
    """
    torch.manual_seed(train_config.seed)
    net = SegNet(net_config)
    init_output_bias(net, float(y_train.mean()))
    opt = torch.optim.SGD(net.parameters(), lr=train_config.lr,
                          momentum=train_config.momentum)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(
        opt, T_max=train_config.max_epochs
    )
    gen = torch.Generator().manual_seed(train_config.seed)
    n = x_train.shape[0]
    bs = train_config.batch_size

    history = []
    best_state = None
    best_miou = -1.0
    best_val_loss = math.inf
    stale = 0
    for epoch in range(1, train_config.max_epochs + 1):
        net.train()
        order = torch.randperm(n, generator=gen)
        losses = []
        for start in range(0, n, bs):
            idx = order[start : start + bs]
            opt.zero_grad()
            pred = net(x_train[idx])
            loss = bce_loss(pred, y_train[idx], train_config.loss_scale)
            loss.backward()
            opt.step()
            losses.append(loss.item())
        sched.step()

        net.eval()
        with torch.no_grad():
            val_losses = []
            val_preds = []
            for start in range(0, x_val.shape[0], bs):
                pred = net(x_val[start : start + bs])
                val_losses.append(float(bce_loss(
                    pred, y_val[start : start + bs], train_config.loss_scale
                )))
                val_preds.append(pred)
            val_pred = torch.cat(val_preds)
            val_loss = float(np.mean(val_losses))
            val_miou = miou(val_pred, y_val)
        history.append({
            "epoch": epoch,
            "train_loss": float(np.mean(losses)),
            "val_loss": val_loss,
            "val_miou": val_miou,
        })
        if verbose:
            print(f"epoch {epoch:3d}  train {np.mean(losses):10.2f}  "
                  f"val {val_loss:10.2f}  miou {val_miou:.4f}", flush=True)
        if val_miou > best_miou:
            best_miou = val_miou
            best_state = {k: v.detach().clone()
                          for k, v in net.state_dict().items()}
        if val_loss < best_val_loss - 1e-12:
            best_val_loss = val_loss
            stale = 0
        else:
            stale += 1
            if stale >= train_config.patience:
                break
    return best_state, history


def save_checkpoint(path, state, net_config: NetConfig,
                    train_config: TrainConfig, history) -> None:
    torch.save({
        "state": state,
        "net_config": asdict(net_config),
        "train_config": asdict(train_config),
        "history": history,
    }, path)


def load_checkpoint(path):
    blob = torch.load(path, map_location="cpu", weights_only=False)
    net_config = NetConfig(**{
        k: tuple(v) if isinstance(v, list) else v
        for k, v in blob["net_config"].items()
    })
    net = SegNet(net_config)
    net.load_state_dict(blob["state"])
    net.eval()
    return net, blob
