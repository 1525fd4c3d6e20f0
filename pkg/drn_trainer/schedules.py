"""에폭 단위 스케줄: 정규화 계수 ramp-up, 학습률, 가중치 감쇠."""

import math
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .trainer import TrainConfig


def ramp(epoch: float, ramp_epochs: int, max_val: float) -> float:
    """처음 ramp_epochs 동안 0에서 max_val까지 선형 증가."""
    if epoch < 0:
        raise ValueError(f"epoch는 0 이상이어야 합니다: {epoch}")
    if ramp_epochs <= 0:
        return max_val
    return max_val * min(1.0, epoch / ramp_epochs)


def lr_schedule(epoch: int, cfg: "TrainConfig") -> float:
    """선형 warmup 후 0까지 코사인 감쇠.

    warmup 마지막 에폭(warmup_epochs - 1)에서 정확히 lr_peak가 된다.
    """
    W, E = cfg.warmup_epochs, cfg.epochs
    if epoch < W:
        return cfg.lr_peak * ((epoch + 1) / W)
    return cfg.lr_peak * 0.5 * (1.0 + math.cos(math.pi * (epoch - W) / (E - W)))


def wd_schedule(epoch: int, cfg: "TrainConfig") -> float:
    """wd_start에서 wd_end로 증가하는 코사인 스케줄. 양 끝값은 정확히 일치한다."""
    if cfg.epochs <= 1:
        return cfg.wd_start
    w = 0.5 * (1.0 - math.cos(math.pi * epoch / (cfg.epochs - 1)))
    return cfg.wd_end * w + cfg.wd_start * (1.0 - w)
