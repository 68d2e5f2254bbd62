"""Attention U-Net for curvature segmentation.

Encoder stem -> three down-sampling blocks -> three up-sampling blocks with
skip connections -> 1x1 head with sigmoid.  A convolutional block attention
module (channel gate then spatial gate) sits at the end of the stem to fuse
the four input feature channels.  The first convolution uses tanh so both
signal polarities survive; everything else is ReLU.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F


@dataclass(frozen=True)
class NetConfig:
    in_channels: int = 4
    widths: tuple = (32, 64, 128, 256)   # stem and three encoder depths
    cbam_reduction: int = 16
    cbam_kernel: int = 7

    def __post_init__(self):
        if len(self.widths) != 4:
            raise ValueError("widths must list stem + 3 encoder channels")
        if self.widths[0] % self.cbam_reduction:
            raise ValueError("cbam_reduction must divide the stem width")
        if self.cbam_kernel % 2 == 0:
            raise ValueError("cbam_kernel must be odd")


class ChannelGate(nn.Module):
    def __init__(self, channels: int, reduction: int):
        super().__init__()
        hidden = channels // reduction
        self.mlp = nn.Sequential(
            nn.Conv2d(channels, hidden, 1, bias=True),
            nn.ReLU(inplace=True),
            nn.Conv2d(hidden, channels, 1, bias=True),
        )

    def forward(self, x):
        avg = self.mlp(F.adaptive_avg_pool2d(x, 1))
        mx = self.mlp(F.adaptive_max_pool2d(x, 1))
        return torch.sigmoid(avg + mx)


class SpatialGate(nn.Module):
    def __init__(self, kernel: int):
        super().__init__()
        self.conv = nn.Conv2d(2, 1, kernel, padding=kernel // 2, bias=True)

    def forward(self, x):
        pooled = torch.cat(
            [x.mean(dim=1, keepdim=True), x.max(dim=1, keepdim=True).values],
            dim=1,
        )
        return torch.sigmoid(self.conv(pooled))


class CBAM(nn.Module):
    """Channel attention then spatial attention, both multiplicative."""

    def __init__(self, channels: int, reduction: int, kernel: int):
        super().__init__()
        self.channel_gate = ChannelGate(channels, reduction)
        self.spatial_gate = SpatialGate(kernel)

    def forward(self, x):
        x = x * self.channel_gate(x)
        return x * self.spatial_gate(x)


def _double_conv(c_in, c_out, first_tanh=False):
    return nn.Sequential(
        nn.Conv2d(c_in, c_out, 3, padding=1),
        nn.Tanh() if first_tanh else nn.ReLU(inplace=True),
        nn.Conv2d(c_out, c_out, 3, padding=1),
        nn.ReLU(inplace=True),
    )


class SegNet(nn.Module):
    def __init__(self, config: NetConfig = NetConfig()):
        super().__init__()
        self.config = config
        w0, w1, w2, w3 = config.widths
        self.stem = _double_conv(config.in_channels, w0, first_tanh=True)
        self.cbam = CBAM(w0, config.cbam_reduction, config.cbam_kernel)
        self.pool = nn.MaxPool2d(2)
        self.down1 = _double_conv(w0, w1)
        self.down2 = _double_conv(w1, w2)
        self.down3 = _double_conv(w2, w3)
        self.up3 = nn.ConvTranspose2d(w3, w2, 2, stride=2)
        self.dec3 = _double_conv(w2 + w2, w2)
        self.up2 = nn.ConvTranspose2d(w2, w1, 2, stride=2)
        self.dec2 = _double_conv(w1 + w1, w1)
        self.up1 = nn.ConvTranspose2d(w1, w0, 2, stride=2)
        self.dec1 = _double_conv(w0 + w0, w0)
        self.head = nn.Conv2d(w0, 1, 1)

    def forward(self, x):
        """(N, 4, H, W) -> (N, H, W) probabilities; any H, W (pad-and-crop)."""
        h, w = x.shape[-2:]
        pad_h = (-h) % 8
        pad_w = (-w) % 8
        if pad_h or pad_w:
            x = F.pad(x, (0, pad_w, 0, pad_h), mode="reflect")
        e0 = self.cbam(self.stem(x))
        e1 = self.down1(self.pool(e0))
        e2 = self.down2(self.pool(e1))
        e3 = self.down3(self.pool(e2))
        d3 = self.dec3(torch.cat([self.up3(e3), e2], dim=1))
        d2 = self.dec2(torch.cat([self.up2(d3), e1], dim=1))
        d1 = self.dec1(torch.cat([self.up1(d2), e0], dim=1))
        out = torch.sigmoid(self.head(d1)).squeeze(1)
        return out[..., :h, :w]
