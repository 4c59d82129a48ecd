"""A small four-scale encoder-decoder that predicts the estimate residual.

Input channels: normalized estimate, normalized forcing, domain mask.
The network outputs a correction added to the estimate channel, so the
identity (no-op) is the zero function, which keeps behavior on clean
inputs close to identity and makes the learning target the structured
Monte Carlo error itself.
"""

from __future__ import annotations

import torch
from torch import nn


def _block(cin: int, cout: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, padding=1),
        nn.GroupNorm(min(8, cout), cout),
        nn.GELU(),
        nn.Conv2d(cout, cout, 3, padding=1),
        nn.GroupNorm(min(8, cout), cout),
        nn.GELU(),
    )


class ResidualUNet(nn.Module):
    DEPTH = 4  # input sides must be divisible by 2**(DEPTH-1)

    def __init__(self, in_channels: int = 3, base: int = 24):
        super().__init__()
        chans = [base, base * 2, base * 4, base * 8]
        self.enc = nn.ModuleList()
        prev = in_channels
        for c in chans:
            self.enc.append(_block(prev, c))
            prev = c
        self.down = nn.MaxPool2d(2)
        self.dec = nn.ModuleList()
        self.up = nn.ModuleList()
        for i in range(len(chans) - 1, 0, -1):
            self.up.append(nn.ConvTranspose2d(chans[i], chans[i - 1], 2, stride=2))
            self.dec.append(_block(chans[i - 1] * 2, chans[i - 1]))
        self.head = nn.Conv2d(chans[0], 1, 1)
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips = []
        h = x
        for i, enc in enumerate(self.enc):
            h = enc(h)
            if i < len(self.enc) - 1:
                skips.append(h)
                h = self.down(h)
        for up, dec, skip in zip(self.up, self.dec, reversed(skips)):
            h = up(h)
            h = dec(torch.cat([h, skip], dim=1))
        mask = x[:, 2:3]
        return (x[:, 0:1] + self.head(h)) * mask

    def n_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())
