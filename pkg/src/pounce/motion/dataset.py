"""Training dataset: planar clips plus their mirrored copies and the
running normalized-return estimate each clip carries for prioritized
sampling."""

from __future__ import annotations

import numpy as np

from .planar import PlanarClip, mirror_clip

RETURN_EMA = 0.05


class MotionDataset:
    def __init__(self, clips, mirror: bool = True, initial_return: float = 0.0):
        expanded = []
        for c in clips:
            expanded.append(c)
            if mirror:
                expanded.append(mirror_clip(c))
        if mirror and len(expanded) % 2 != 0:
            raise ValueError("mirrored dataset must have an even clip count")
        self.clips = expanded
        self.returns = np.full(len(expanded), float(np.clip(initial_return, 0.0, 1.0)))

    def __len__(self):
        return len(self.clips)

    def __getitem__(self, i) -> PlanarClip:
        return self.clips[i]

    def update_return(self, index: int, episode_return: float, ema: float = RETURN_EMA):
        """Fold one episode's normalized reward into the clip's estimate."""
        r = float(np.clip(episode_return, 0.0, 1.0))
        self.returns[index] = np.clip(
            (1.0 - ema) * self.returns[index] + ema * r, 0.0, 1.0)

    def ids(self):
        return [c.id for c in self.clips]
