"""특징 벡터용 확률적 증강.

영상 증강(가우시안 평활, 대비 조정, 확대, 밝기 이동)을 1차원 특징 벡터에 옮긴 것으로,
잡음 -> 평활 -> 배율 -> 이동 -> 좌표 확대 재표본화 순서로 적용한다.
크기가 0인 단계는 건너뛰어 입력을 그대로 둔다.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d


@dataclass(frozen=True)
class AugmentConfig:
    """증강 강도. 모두 0 이상."""
    noise_std: float = 0.05
    smooth_radius: float = 0.0
    scale_range: float = 0.1
    shift_range: float = 0.05
    zoom_range: float = 0.0

    def __post_init__(self):
        for name in ("noise_std", "smooth_radius", "scale_range", "shift_range", "zoom_range"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name}는 0 이상이어야 합니다: {getattr(self, name)}")
        if self.zoom_range >= 1.0:
            raise ValueError(f"zoom_range는 1 미만이어야 합니다: {self.zoom_range}")

    @classmethod
    def identity(cls) -> "AugmentConfig":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0)


def _zoom(x: np.ndarray, factor: float) -> np.ndarray:
    """중심 기준으로 좌표를 factor배 확대해 선형 보간한다 (경계는 끝값 유지)."""
    d = x.size
    if d < 2:
        return x
    grid = np.arange(d, dtype=np.float64)
    center = 0.5 * (d - 1)
    return np.interp(center + (grid - center) / factor, grid, x)


def augment(x, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    """한 번의 확률적 변환."""
    x = np.array(x, dtype=np.float64)
    if cfg.noise_std > 0.0:
        x = x + cfg.noise_std * rng.standard_normal(x.shape)
    if cfg.smooth_radius > 0.0:
        size = 2 * int(round(cfg.smooth_radius)) + 1
        w = rng.uniform(0.0, 1.0)
        x = (1.0 - w) * x + w * uniform_filter1d(x, size=size, mode="nearest")
    if cfg.scale_range > 0.0:
        x = x * rng.uniform(1.0 - cfg.scale_range, 1.0 + cfg.scale_range)
    if cfg.shift_range > 0.0:
        x = x + rng.uniform(-cfg.shift_range, cfg.shift_range)
    if cfg.zoom_range > 0.0:
        x = _zoom(x, rng.uniform(1.0 - cfg.zoom_range, 1.0 + cfg.zoom_range))
    return x


def augment_pair(x, cfg: AugmentConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """같은 입력에서 독립적인 두 시점 (x_s, x_t)를 만든다."""
    return augment(x, cfg, rng), augment(x, cfg, rng)


def augment_batch(X, cfg: AugmentConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """배치의 각 행에 augment_pair를 순서대로 적용한다."""
    X = np.asarray(X, dtype=np.float64)
    Xs = np.empty_like(X)
    Xt = np.empty_like(X)
    for i, x in enumerate(X):
        Xs[i], Xt[i] = augment_pair(x, cfg, rng)
    return Xs, Xt
