"""참값이 알려진 합성 데이터 생성기.

난수원은 numpy의 Philox(64비트 카운터 기반 생성기)로 고정하여
플랫폼과 무관하게 같은 시드에서 같은 비트열을 낸다.
"""

from dataclasses import dataclass, field

import numpy as np

from errors import ShapeError
from lsmi_estimator.oracles import check_pmf

PAIRED_KINDS = ("gaussian_pair", "discrete_joint")
LABELED_KINDS = ("two_moons", "blobs", "csv")
DATASET_KINDS = PAIRED_KINDS + LABELED_KINDS


def make_rng(seed: int) -> np.random.Generator:
    """시드 하나로 결정되는 Philox 생성기."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass
class DatasetSpec:
    """데이터셋 생성 설정. params는 kind별 파라미터 (rho / pmf / noise, n_classes, spread / path). csv는 n을 쓰지 않는다."""
    kind: str
    n: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise ValueError(f"알 수 없는 데이터셋 종류입니다: {self.kind}")
        if self.n < 1:
            raise ValueError(f"n은 1 이상이어야 합니다: {self.n}")


@dataclass
class LabeledDataset:
    """분류용 데이터셋: features (n, d), labels (n,) 정수."""
    features: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __len__(self) -> int:
        return self.features.shape[0]


def gen_gaussian_pair(n: int, rho: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """상관계수 rho인 표준 이변량 가우시안 n개 (Cholesky 변환).

    Returns:
        (X, Y) 각각 (n, 1)
    """
    rho = float(rho)
    if not abs(rho) < 1.0:
        raise ValueError(f"|rho| < 1 이어야 합니다: {rho}")
    chol = np.linalg.cholesky(np.array([[1.0, rho], [rho, 1.0]]))
    Z = make_rng(seed).standard_normal((n, 2)) @ chol.T
    return Z[:, :1].copy(), Z[:, 1:].copy()


def gen_discrete_joint(pmf, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """결합확률표에서 n개 범주쌍을 뽑아 one-hot으로 임베딩한다.

    Returns:
        (X, Y): X는 행 인덱스의 one-hot (n, r), Y는 열 인덱스의 one-hot (n, c)
    """
    p = check_pmf(pmf)
    r, c = p.shape
    cells = make_rng(seed).choice(r * c, size=n, p=p.ravel())
    return np.eye(r)[cells // c], np.eye(c)[cells % c]


def gen_two_moons(n: int, noise: float, seed: int) -> LabeledDataset:
    """엇갈린 두 반원. 클래스 0은 위쪽 단위 반원, 클래스 1은 (1, 0.5)만큼 옮긴 아래쪽 반원."""
    if noise < 0.0:
        raise ValueError(f"noise는 0 이상이어야 합니다: {noise}")
    rng = make_rng(seed)
    n0 = (n + 1) // 2
    n1 = n - n0
    t0 = np.linspace(0.0, np.pi, n0)
    t1 = np.linspace(0.0, np.pi, n1)
    upper = np.column_stack([np.cos(t0), np.sin(t0)])
    lower = np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
    features = np.vstack([upper, lower])
    labels = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    if noise > 0.0:
        features = features + noise * rng.standard_normal(features.shape)
    order = rng.permutation(n)
    return LabeledDataset(features[order], labels[order], n_classes=2)


def gen_blobs(n: int, n_classes: int, spread: float, seed: int) -> LabeledDataset:
    """원 위에 등간격으로 놓인 n_classes개 가우시안 덩어리 (다중 클래스 과제용)."""
    if n_classes < 2:
        raise ShapeError(f"클래스는 2개 이상이어야 합니다: {n_classes}")
    if spread < 0.0:
        raise ValueError(f"spread는 0 이상이어야 합니다: {spread}")
    rng = make_rng(seed)
    labels = np.arange(n, dtype=np.int64) % n_classes
    angles = 2.0 * np.pi * labels / n_classes
    centers = 2.0 * np.column_stack([np.cos(angles), np.sin(angles)])
    features = centers + spread * rng.standard_normal((n, 2))
    order = rng.permutation(n)
    return LabeledDataset(features[order], labels[order], n_classes=n_classes)


def make_paired_dataset(spec: DatasetSpec) -> tuple[np.ndarray, np.ndarray]:
    """짝 샘플 (X, Y)를 만든다 (gaussian_pair, discrete_joint)."""
    if spec.kind == "gaussian_pair":
        return gen_gaussian_pair(spec.n, spec.params["rho"], spec.seed)
    if spec.kind == "discrete_joint":
        return gen_discrete_joint(spec.params["pmf"], spec.n, spec.seed)
    raise ValueError(f"짝 샘플 데이터셋이 아닙니다: {spec.kind}")


def make_labeled_dataset(spec: DatasetSpec) -> LabeledDataset:
    """분류용 데이터셋을 만든다 (two_moons, blobs, csv)."""
    if spec.kind == "csv":
        from .csv_io import load_labeled_csv

        return load_labeled_csv(spec.params["path"])
    if spec.kind == "two_moons":
        return gen_two_moons(spec.n, spec.params.get("noise", 0.3), spec.seed)
    if spec.kind == "blobs":
        return gen_blobs(spec.n, spec.params.get("n_classes", 4), spec.params.get("spread", 0.6), spec.seed)
    raise ValueError(f"분류용 데이터셋이 아닙니다: {spec.kind}")


def split_dataset(dataset: LabeledDataset, val_fraction: float, seed: int) -> tuple[LabeledDataset, LabeledDataset]:
    """시드로 섞은 뒤 (학습, 검증)으로 나눈다. 양쪽 모두 최소 1개."""
    n = len(dataset)
    if n < 2:
        raise ValueError(f"나누려면 샘플이 2개 이상 필요합니다: {n}")
    n_val = min(n - 1, max(1, int(round(n * val_fraction))))
    order = make_rng(seed).permutation(n)
    val_idx, train_idx = order[:n_val], order[n_val:]
    return (
        LabeledDataset(dataset.features[train_idx], dataset.labels[train_idx], dataset.n_classes),
        LabeledDataset(dataset.features[val_idx], dataset.labels[val_idx], dataset.n_classes),
    )
